use numerics::Matrix;

use dpp_core::Subset;
use network_sim::{sinr, NetworkInstance};

use crate::{ModelError, Result};

/// Diagonal rule for the interference similarity matrix. Both choices make
/// every row diagonally dominant with a nonnegative diagonal, which
/// certifies nonnegative principal minors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagRule {
    /// Every diagonal entry equals the largest off-diagonal row sum.
    #[default]
    GlobalMax,
    /// Each diagonal entry equals its own row's off-diagonal sum.
    PerRow,
}

/// Quality vector `g_i = sqrt(theta * gamma_i)` with the SINR evaluated in
/// the pre-scheduling state (every ground-set link active).
pub fn quality_dronecell(inst: &NetworkInstance, theta: f64) -> Result<Vec<f64>> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(ModelError::Params(format!(
            "theta must be positive finite, got {theta}"
        )));
    }
    let full = Subset::new((0..inst.m()).collect()).expect("distinct indices");
    Ok(sinr(inst, &full)
        .iter()
        .map(|&g| (theta * g).sqrt())
        .collect())
}

/// Asymmetric similarity: off-diagonals are cross-interference powers
/// normalized by the noise power, the diagonal follows `diag`, and the whole
/// matrix is scaled by sigma.
pub fn similarity_dronecell(inst: &NetworkInstance, sigma: f64) -> Result<Matrix> {
    similarity_dronecell_with(inst, sigma, DiagRule::GlobalMax)
}

pub fn similarity_dronecell_with(
    inst: &NetworkInstance,
    sigma: f64,
    diag: DiagRule,
) -> Result<Matrix> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(ModelError::Params(format!(
            "sigma must be positive finite, got {sigma}"
        )));
    }
    let m = inst.m();
    let mut s = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            if i != j {
                // Interference caused by link i's transmitter at receiver j.
                s[(i, j)] = inst.p_high_watts * inst.gain[(i, j)] / inst.noise_watts;
            }
        }
    }
    let row_sum = |s: &Matrix, i: usize| -> f64 { (0..m).filter(|&j| j != i).map(|j| s[(i, j)]).sum() };
    let global_max = (0..m).map(|i| row_sum(&s, i)).fold(0.0, f64::max);
    for i in 0..m {
        s[(i, i)] = match diag {
            DiagRule::GlobalMax => global_max,
            DiagRule::PerRow => row_sum(&s, i),
        };
    }
    Ok(s.scale(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpp_core::{subset_logdet, KernelEnsemble};
    use network_sim::ScenarioTag;

    fn hand_instance(gain: Matrix, p_high: f64, noise: f64) -> NetworkInstance {
        let m = gain.rows();
        NetworkInstance {
            scenario: ScenarioTag::Dronecell,
            tx_pos: vec![[0.0; 3]; m],
            rx_pos: vec![[0.0; 3]; m],
            gain,
            p_high_watts: p_high,
            noise_watts: noise,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        }
    }

    #[test]
    fn quality_is_sqrt_theta_gamma() {
        // Single link: gamma = P*zeta/N = 2*2/1 = 4, so g = sqrt(theta*4).
        let inst = hand_instance(Matrix::from_rows(1, 1, vec![2.0]).unwrap(), 2.0, 1.0);
        let g = quality_dronecell(&inst, 1.0).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-15);
        let g9 = quality_dronecell(&inst, 9.0).unwrap();
        assert!((g9[0] - 6.0).abs() < 1e-15);
    }

    #[test]
    fn hand_three_link_diagonal() {
        // Off-diagonal interference-to-noise values [[., 1, 2], [3, ., 1],
        // [2, 2, .]]: row sums (3, 4, 4), so every diagonal entry is 4.
        let gain = Matrix::from_rows(
            3,
            3,
            vec![9.0, 1.0, 2.0, 3.0, 9.0, 1.0, 2.0, 2.0, 9.0],
        )
        .unwrap();
        let inst = hand_instance(gain, 1.0, 1.0);
        let s = similarity_dronecell(&inst, 1.0).unwrap();
        for i in 0..3 {
            assert_eq!(s[(i, i)], 4.0);
        }
        assert_eq!(s[(1, 0)], 3.0);
        assert_eq!(s[(0, 2)], 2.0);
        let per_row = similarity_dronecell_with(&inst, 1.0, DiagRule::PerRow).unwrap();
        assert_eq!(per_row[(0, 0)], 3.0);
        assert_eq!(per_row[(1, 1)], 4.0);
    }

    #[test]
    fn hand_three_link_minors_nonnegative() {
        let gain = Matrix::from_rows(
            3,
            3,
            vec![9.0, 1.0, 2.0, 3.0, 9.0, 1.0, 2.0, 2.0, 9.0],
        )
        .unwrap();
        let inst = hand_instance(gain, 1.0, 1.0);
        let s = similarity_dronecell(&inst, 0.7).unwrap();
        let k = KernelEnsemble::from_l(s).unwrap();
        assert_eq!(k.p0_status(), dpp_core::P0Status::MinorsChecked);
    }

    #[test]
    fn sigma_scales_logdet_by_cardinality() {
        let gain = Matrix::from_rows(
            3,
            3,
            vec![9.0, 1.0, 2.0, 3.0, 9.0, 1.0, 2.0, 2.0, 9.0],
        )
        .unwrap();
        let inst = hand_instance(gain, 1.0, 1.0);
        let s1 = KernelEnsemble::from_l(similarity_dronecell(&inst, 1.0).unwrap()).unwrap();
        let c = 3.7;
        let sc = KernelEnsemble::from_l(similarity_dronecell(&inst, c).unwrap()).unwrap();
        for mask in 1u32..8 {
            let y = Subset::from_mask(mask, 3);
            let base = subset_logdet(&s1, &y).unwrap();
            let scaled = subset_logdet(&sc, &y).unwrap();
            assert!(
                (scaled - base - y.len() as f64 * c.ln()).abs() < 1e-10,
                "mask {mask}"
            );
        }
    }
}
