use numerics::Matrix;

use network_sim::NetworkInstance;

use crate::{ModelError, Result};

/// Diagonal convention for the ad hoc similarity matrix.
///
/// The default is `S_ii = 1`: with the pairwise formula applied at i = j the
/// diagonal drops below nearby off-diagonal entries whenever two links
/// overlap tightly, producing negative 2x2 minors whose sign no choice of
/// sigma can fix — and with it zero-probability training labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagMode {
    /// `S_ii = 1`.
    #[default]
    Unit,
    /// `S_ii = exp(-2 d_ii^2 / sigma^2)`: the pairwise formula applied at
    /// i = j, with `d_ii` the serving Tx-Rx distance.
    Literal,
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Per-link quality features: serving received power and the two strongest
/// interference powers at the link's receiver (zero-padded for m < 3).
pub fn adhoc_features(inst: &NetworkInstance) -> Vec<[f64; 3]> {
    let m = inst.m();
    (0..m)
        .map(|i| {
            let mut interference: Vec<f64> = (0..m)
                .filter(|&j| j != i)
                .map(|j| inst.p_high_watts * inst.gain[(j, i)])
                .collect();
            interference.sort_by(|a, b| b.partial_cmp(a).expect("finite gains"));
            let i1 = interference.first().copied().unwrap_or(0.0);
            let i2 = interference.get(1).copied().unwrap_or(0.0);
            [inst.p_high_watts * inst.gain[(i, i)], i1, i2]
        })
        .collect()
}

/// Quality vector `g_i = exp(theta . features_i)`.
pub fn quality_adhoc(inst: &NetworkInstance, theta: &[f64; 3]) -> Vec<f64> {
    adhoc_features(inst)
        .iter()
        .map(|f| (theta[0] * f[0] + theta[1] * f[1] + theta[2] * f[2]).exp())
        .collect()
}

/// Squared cross distances `D_ij = d_ij^2 + d_ji^2` with
/// `d_ij = dist(Tx i, Rx j)`; the diagonal holds `2 d_ii^2`.
pub(crate) fn cross_distance2(inst: &NetworkInstance) -> Matrix {
    let m = inst.m();
    let mut d = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            d[(i, j)] = dist2(inst.tx_pos[i], inst.rx_pos[j]) + dist2(inst.tx_pos[j], inst.rx_pos[i]);
        }
    }
    d
}

/// Symmetric similarity `S_ij = exp(-(d_ij^2 + d_ji^2) / sigma^2)` with the
/// default (unit) diagonal convention.
pub fn similarity_adhoc(inst: &NetworkInstance, sigma: f64) -> Result<Matrix> {
    similarity_adhoc_with(inst, sigma, DiagMode::Unit)
}

pub fn similarity_adhoc_with(inst: &NetworkInstance, sigma: f64, diag: DiagMode) -> Result<Matrix> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(ModelError::Params(format!(
            "sigma must be positive finite, got {sigma}"
        )));
    }
    let m = inst.m();
    let d2 = cross_distance2(inst);
    let mut s = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = (-d2[(i, j)] / (sigma * sigma)).exp();
        }
        if diag == DiagMode::Unit {
            s[(i, i)] = 1.0;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use network_sim::ScenarioTag;

    fn two_link_instance() -> NetworkInstance {
        // Tx0 at origin with Rx0 at (1,0); Tx1 at (0,2) with Rx1 at (1,2).
        let gain = Matrix::from_rows(2, 2, vec![1.0, 0.2, 0.2, 1.0]).unwrap();
        NetworkInstance {
            scenario: ScenarioTag::Adhoc,
            tx_pos: vec![[0.0, 0.0, 0.0], [0.0, 2.0, 0.0]],
            rx_pos: vec![[1.0, 0.0, 0.0], [1.0, 2.0, 0.0]],
            gain,
            p_high_watts: 1.0,
            noise_watts: 0.1,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        }
    }

    #[test]
    fn zero_theta_gives_unit_quality() {
        let inst = two_link_instance();
        let g = quality_adhoc(&inst, &[0.0, 0.0, 0.0]);
        assert_eq!(g, vec![1.0, 1.0]);
    }

    #[test]
    fn single_link_direct_substitution() {
        let gain = Matrix::from_rows(1, 1, vec![0.7]).unwrap();
        let inst = NetworkInstance {
            gain,
            tx_pos: vec![[0.0; 3]],
            rx_pos: vec![[1.0, 0.0, 0.0]],
            ..two_link_instance()
        };
        // m = 1: both interference features are zero.
        let g = quality_adhoc(&inst, &[1.0, 0.0, 0.0]);
        assert!((g[0] - 0.7f64.exp()).abs() < 1e-15);
        let g2 = quality_adhoc(&inst, &[1.0, 5.0, -3.0]);
        assert!((g2[0] - 0.7f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn feature_ordering_i1_ge_i2() {
        let gain =
            Matrix::from_rows(3, 3, vec![1.0, 0.5, 0.2, 0.1, 1.0, 0.4, 0.3, 0.6, 1.0]).unwrap();
        let inst = NetworkInstance {
            gain,
            tx_pos: vec![[0.0; 3]; 3],
            rx_pos: vec![[0.0; 3]; 3],
            ..two_link_instance()
        };
        for f in adhoc_features(&inst) {
            assert!(f[1] >= f[2]);
        }
        // Receiver 0 hears Tx1 (0.1) and Tx2 (0.3): sorted (0.3, 0.1).
        let f0 = adhoc_features(&inst)[0];
        assert_eq!([f0[1], f0[2]], [0.3, 0.1]);
    }

    #[test]
    fn permutation_equivariance() {
        let inst = two_link_instance();
        let theta = [0.3, -0.2, -0.1];
        let g = quality_adhoc(&inst, &theta);
        let swapped = NetworkInstance {
            gain: Matrix::from_rows(2, 2, vec![1.0, 0.2, 0.2, 1.0]).unwrap(),
            tx_pos: vec![inst.tx_pos[1], inst.tx_pos[0]],
            rx_pos: vec![inst.rx_pos[1], inst.rx_pos[0]],
            ..two_link_instance()
        };
        let gs = quality_adhoc(&swapped, &theta);
        assert!((g[0] - gs[1]).abs() < 1e-15);
        assert!((g[1] - gs[0]).abs() < 1e-15);
    }

    #[test]
    fn hand_two_link_similarity() {
        let inst = two_link_instance();
        // d_01 = dist(Tx0, Rx1) = sqrt(1 + 4); d_10 = dist(Tx1, Rx0) = sqrt(1 + 4).
        let sigma = 1.5;
        let s = similarity_adhoc(&inst, sigma).unwrap();
        let expect = (-(5.0 + 5.0) / (sigma * sigma)).exp();
        assert!((s[(0, 1)] - expect).abs() < 1e-15);
        assert_eq!(s[(0, 1)], s[(1, 0)]);
        assert_eq!(s[(0, 0)], 1.0);
        // Literal diagonal: serving distance 1 on both links.
        let lit = similarity_adhoc_with(&inst, sigma, DiagMode::Literal).unwrap();
        let diag = (-2.0 / (sigma * sigma)).exp();
        assert!((lit[(0, 0)] - diag).abs() < 1e-15);
        assert_eq!(lit[(0, 1)], s[(0, 1)]);
    }

    #[test]
    fn huge_sigma_tends_to_all_ones() {
        let inst = two_link_instance();
        let s = similarity_adhoc_with(&inst, 1e9, DiagMode::Unit).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((s[(i, j)] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn entries_symmetric_and_unit_bounded() {
        let inst = two_link_instance();
        let s = similarity_adhoc(&inst, 0.8).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(s[(i, j)] > 0.0 && s[(i, j)] <= 1.0);
                assert_eq!(s[(i, j)], s[(j, i)]);
            }
        }
    }
}
