use numerics::{LuFactors, Matrix};

use dpp_core::{build_kernel, subset_log_prob, KernelEnsemble, Subset};
use network_sim::NetworkInstance;

use crate::adhoc::{adhoc_features, cross_distance2, quality_adhoc, similarity_adhoc};
use crate::dronecell::{quality_dronecell, similarity_dronecell};
use crate::params::{ModelFamily, ModelParams};
use crate::{ModelError, Result};

/// One labeled realization: a network and its scheduler-optimal subset.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub instance: NetworkInstance,
    pub optimal: Subset,
}

impl TrainingSample {
    pub fn validate(&self) -> Result<()> {
        if let Some(max) = self.optimal.max_index() {
            if max >= self.instance.m() {
                return Err(ModelError::Data(format!(
                    "label index {max} out of range for {} links",
                    self.instance.m()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub samples: Vec<TrainingSample>,
}

impl TrainingSet {
    pub fn new(samples: Vec<TrainingSample>) -> Result<Self> {
        let set = Self { samples };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.samples {
            s.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let samples: Vec<serde_json::Value> = self
            .samples
            .iter()
            .map(|s| -> Result<serde_json::Value> {
                let inst: serde_json::Value = serde_json::from_str(
                    &s.instance
                        .to_json()
                        .map_err(|e| ModelError::Data(e.to_string()))?,
                )?;
                Ok(serde_json::json!({
                    "instance": inst,
                    "optimal": s.optimal.indices(),
                }))
            })
            .collect::<Result<_>>()?;
        Ok(serde_json::to_string_pretty(&serde_json::json!({
            "schemaVersion": 1,
            "samples": samples,
        }))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let samples = value["samples"]
            .as_array()
            .ok_or_else(|| ModelError::Data("missing samples array".into()))?
            .iter()
            .map(|entry| -> Result<TrainingSample> {
                let inst = NetworkInstance::from_json(&entry["instance"].to_string())
                    .map_err(|e| ModelError::Data(e.to_string()))?;
                let indices: Vec<usize> = serde_json::from_value(entry["optimal"].clone())?;
                let optimal =
                    Subset::new(indices).map_err(|e| ModelError::Data(e.to_string()))?;
                Ok(TrainingSample {
                    instance: inst,
                    optimal,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(samples)
    }
}

/// Builds the family's L-ensemble for one instance.
pub fn build_model_kernel(inst: &NetworkInstance, params: &ModelParams) -> Result<KernelEnsemble> {
    params.validate()?;
    match params.family {
        ModelFamily::Adhoc => {
            let theta = [params.theta[0], params.theta[1], params.theta[2]];
            let g = quality_adhoc(inst, &theta);
            if g.iter().any(|v| !v.is_finite() || !(*v > 0.0)) {
                return Err(ModelError::Params(
                    "adhoc quality overflowed or degenerated; theta too large".into(),
                ));
            }
            let s = similarity_adhoc(inst, params.sigma)?;
            Ok(build_kernel(&g, &s)?)
        }
        ModelFamily::Dronecell => {
            let g = quality_dronecell(inst, params.theta[0])?;
            let s = similarity_dronecell(inst, params.sigma)?;
            if g.iter().all(|&v| v > 0.0) {
                Ok(build_kernel(&g, &s)?)
            } else {
                // A zero-SINR link yields a zero kernel row: representable,
                // just not through the positive-quality constructor.
                let m = inst.m();
                let mut l = Matrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        l[(i, j)] = g[i] * s[(i, j)] * g[j];
                    }
                }
                Ok(KernelEnsemble::from_l(l)?)
            }
        }
    }
}

/// Conditional log-likelihood outcome. `value` is `-inf` whenever any
/// sample's labeled subset has nonpositive kernel determinant; those sample
/// indices are listed in `degenerate`.
#[derive(Debug, Clone)]
pub struct LogLik {
    pub value: f64,
    pub degenerate: Vec<usize>,
}

/// `sum_t [logdet(L_Y_t) - logdet(L_t + I)]` over the training set, with the
/// normalizer computed in closed form.
pub fn log_likelihood(train: &TrainingSet, params: &ModelParams) -> Result<LogLik> {
    train.validate()?;
    let mut value = 0.0;
    let mut degenerate = Vec::new();
    for (t, sample) in train.samples.iter().enumerate() {
        let k = build_model_kernel(&sample.instance, params)?;
        let lp = subset_log_prob(&k, &sample.optimal)?;
        if lp == f64::NEG_INFINITY {
            degenerate.push(t);
        }
        value += lp;
    }
    Ok(LogLik { value, degenerate })
}

fn trace_prod(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            tr += a[(i, j)] * b[(j, i)];
        }
    }
    tr
}

/// `tr(L_Y^{-1} dL_Y) - tr((L+I)^{-1} dL)` for one parameter direction.
fn grad_term(ly_inv: &Matrix, m_inv: &Matrix, dl: &Matrix, y: &Subset) -> f64 {
    let dl_y = dl.principal_submatrix(y.indices());
    trace_prod(ly_inv, &dl_y) - trace_prod(m_inv, dl)
}

/// Analytic likelihood gradient in raw coordinates: `[theta.., sigma]`
/// (length 4 for adhoc, 2 for dronecell), via
/// `d logdet A(p) = tr(A^{-1} dA/dp)`.
pub fn grad_log_likelihood(train: &TrainingSet, params: &ModelParams) -> Result<Vec<f64>> {
    train.validate()?;
    params.validate()?;
    let dim = params.theta.len() + 1;
    let mut grad = vec![0.0; dim];
    for (t, sample) in train.samples.iter().enumerate() {
        let inst = &sample.instance;
        let y = &sample.optimal;
        let k = build_model_kernel(inst, params)?;
        let l = k.l();
        let n = k.n();

        let m_inv = LuFactors::factor(&l.add(&Matrix::identity(n))?)?
            .inverse()
            .map_err(|_| ModelError::DegenerateSample { index: t })?;
        let ly = l.principal_submatrix(y.indices());
        let ly_inv = if y.is_empty() {
            Matrix::zeros(0, 0)
        } else {
            let factors =
                LuFactors::factor(&ly).map_err(|_| ModelError::DegenerateSample { index: t })?;
            let (sign, _) = factors.logdet();
            if sign <= 0 {
                return Err(ModelError::DegenerateSample { index: t });
            }
            factors
                .inverse()
                .map_err(|_| ModelError::DegenerateSample { index: t })?
        };

        match params.family {
            ModelFamily::Adhoc => {
                let f = adhoc_features(inst);
                let d2 = cross_distance2(inst);
                let sigma = params.sigma;
                for kk in 0..3 {
                    let mut dl = Matrix::zeros(n, n);
                    for i in 0..n {
                        for j in 0..n {
                            dl[(i, j)] = (f[i][kk] + f[j][kk]) * l[(i, j)];
                        }
                    }
                    grad[kk] += grad_term(&ly_inv, &m_inv, &dl, y);
                }
                let mut dl = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        // S_ii is the constant 1, so the diagonal does not
                        // move with sigma.
                        if i != j {
                            dl[(i, j)] = l[(i, j)] * 2.0 * d2[(i, j)] / sigma.powi(3);
                        }
                    }
                }
                grad[3] += grad_term(&ly_inv, &m_inv, &dl, y);
            }
            ModelFamily::Dronecell => {
                // L scales linearly in both theta and sigma, so
                // tr(L_Y^{-1} L_Y) = |Y| and the shared factor is
                // |Y| - tr((L+I)^{-1} L).
                let shared = y.len() as f64 - trace_prod(&m_inv, l);
                grad[0] += shared / params.theta[0];
                grad[1] += shared / params.sigma;
            }
        }
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dpp_core::enumerate_map;
    use network_sim::{gen_adhoc, AdHocConfig, ScenarioTag};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two far-separated links whose Tx and Rx coincide: with theta = 0 the
    /// adhoc kernel is exactly the identity.
    fn identity_kernel_sample() -> TrainingSample {
        let gain = Matrix::from_rows(2, 2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let inst = NetworkInstance {
            scenario: ScenarioTag::Adhoc,
            tx_pos: vec![[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]],
            rx_pos: vec![[0.0, 0.0, 0.0], [100.0, 0.0, 0.0]],
            gain,
            p_high_watts: 1.0,
            noise_watts: 0.1,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        };
        TrainingSample {
            instance: inst,
            optimal: Subset::new(vec![0]).unwrap(),
        }
    }

    fn unit_params() -> ModelParams {
        ModelParams {
            family: ModelFamily::Adhoc,
            theta: vec![0.0, 0.0, 0.0],
            sigma: 0.1,
            train_meta: None,
        }
    }

    #[test]
    fn identity_kernel_singleton_probability() {
        let train = TrainingSet::new(vec![identity_kernel_sample()]).unwrap();
        let params = unit_params();
        let k = build_model_kernel(&train.samples[0].instance, &params).unwrap();
        assert_eq!(k.l(), &Matrix::identity(2));
        let ll = log_likelihood(&train, &params).unwrap();
        assert!((ll.value - 0.25f64.ln()).abs() < 1e-12);
        assert!(ll.degenerate.is_empty());
    }

    #[test]
    fn additivity_over_duplicated_samples() {
        let one = TrainingSet::new(vec![identity_kernel_sample()]).unwrap();
        let two =
            TrainingSet::new(vec![identity_kernel_sample(), identity_kernel_sample()]).unwrap();
        let params = unit_params();
        let a = log_likelihood(&one, &params).unwrap().value;
        let b = log_likelihood(&two, &params).unwrap().value;
        assert!((b - 2.0 * a).abs() < 1e-12);
    }

    #[test]
    fn matches_enumerated_probability() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20u64 {
            let inst = gen_adhoc(&AdHocConfig {
                density: 5.0,
                seed,
                ..AdHocConfig::default()
            })
            .unwrap();
            if inst.m() > 8 {
                continue;
            }
            let params = ModelParams {
                family: ModelFamily::Adhoc,
                theta: vec![0.01, -0.001, -0.0005],
                sigma: 0.3,
                train_meta: None,
            };
            let k = build_model_kernel(&inst, &params).unwrap();
            // Random subset with positive probability under the kernel.
            let mask = rng.gen_range(0u32..(1 << inst.m()));
            let y = Subset::from_mask(mask, inst.m());
            let train = TrainingSet::new(vec![TrainingSample {
                instance: inst.clone(),
                optimal: y.clone(),
            }])
            .unwrap();
            let ll = log_likelihood(&train, &params).unwrap();
            // Enumerated normalizer with signed subset determinants.
            let norm = {
                let li = k.l().add(&Matrix::identity(inst.m())).unwrap();
                numerics::logdet_lu(&li).unwrap().1.exp()
            };
            let mut total = 1.0; // empty subset
            for m2 in 1u32..(1 << inst.m()) {
                let y = Subset::from_mask(m2, inst.m());
                let sub = k.l().principal_submatrix(y.indices());
                let (sign, ld) = numerics::logdet_lu(&sub).unwrap();
                total += sign as f64 * ld.exp();
            }
            assert!(
                (total / norm - 1.0).abs() < 1e-8,
                "normalization broke: {total} vs {norm}"
            );
            let direct = subset_log_prob(&k, &y).unwrap();
            assert!((ll.value - direct).abs() < 1e-12);
        }
    }

    fn finite_diff(
        train: &TrainingSet,
        params: &ModelParams,
        coord: usize,
        h: f64,
    ) -> f64 {
        let mut plus = params.clone();
        let mut minus = params.clone();
        if coord < params.theta.len() {
            plus.theta[coord] += h;
            minus.theta[coord] -= h;
        } else {
            plus.sigma += h;
            minus.sigma -= h;
        }
        let a = log_likelihood(train, &plus).unwrap().value;
        let b = log_likelihood(train, &minus).unwrap().value;
        (a - b) / (2.0 * h)
    }

    #[test]
    fn gradient_matches_finite_differences_adhoc() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for seed in 0..40u64 {
            let inst = gen_adhoc(&AdHocConfig {
                density: 5.0,
                seed: 1000 + seed,
                ..AdHocConfig::default()
            })
            .unwrap();
            if inst.m() > 10 {
                continue;
            }
            let params = ModelParams {
                family: ModelFamily::Adhoc,
                theta: vec![
                    rng.gen_range(-0.02..0.02),
                    rng.gen_range(-0.002..0.0),
                    rng.gen_range(-0.002..0.0),
                ],
                sigma: rng.gen_range(0.2..1.0),
                train_meta: None,
            };
            let y = Subset::from_mask(rng.gen_range(1u32..(1 << inst.m())), inst.m());
            let train = TrainingSet::new(vec![TrainingSample {
                instance: inst,
                optimal: y,
            }])
            .unwrap();
            if log_likelihood(&train, &params).unwrap().value == f64::NEG_INFINITY {
                continue;
            }
            let grad = grad_log_likelihood(&train, &params).unwrap();
            for coord in 0..4 {
                let fd = finite_diff(&train, &params, coord, 1e-6);
                let scale = 1.0 + fd.abs().max(grad[coord].abs());
                assert!(
                    (grad[coord] - fd).abs() <= 1e-5 * scale,
                    "seed {seed} coord {coord}: analytic {} vs fd {fd}",
                    grad[coord]
                );
            }
            checked += 1;
        }
        assert!(checked >= 15, "only {checked} gradient checks ran");
    }

    #[test]
    fn dronecell_gradient_reduces_to_product_form() {
        // Gradient w.r.t. log theta and log sigma must agree (only the
        // product is identifiable), and match finite differences.
        let gain = Matrix::from_rows(
            3,
            3,
            vec![9.0, 1.0, 2.0, 3.0, 9.0, 1.0, 2.0, 2.0, 9.0],
        )
        .unwrap();
        let inst = NetworkInstance {
            scenario: ScenarioTag::Dronecell,
            tx_pos: vec![[0.0; 3]; 3],
            rx_pos: vec![[0.0; 3]; 3],
            gain,
            p_high_watts: 1.0,
            noise_watts: 1.0,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        };
        let train = TrainingSet::new(vec![TrainingSample {
            instance: inst,
            optimal: Subset::new(vec![0, 2]).unwrap(),
        }])
        .unwrap();
        let params = ModelParams {
            family: ModelFamily::Dronecell,
            theta: vec![0.8],
            sigma: 1.3,
            train_meta: None,
        };
        let grad = grad_log_likelihood(&train, &params).unwrap();
        assert!((grad[0] * params.theta[0] - grad[1] * params.sigma).abs() < 1e-10);
        for coord in 0..2 {
            let fd = finite_diff(&train, &params, coord, 1e-6);
            assert!(
                (grad[coord] - fd).abs() <= 1e-5 * (1.0 + fd.abs()),
                "coord {coord}: {} vs {fd}",
                grad[coord]
            );
        }
    }

    #[test]
    fn degenerate_subset_reports_index_and_sentinel() {
        // Mutually crossing links (each Rx sits on the other's Tx) give
        // S_01 = 1, making S_Y singular for Y = {0, 1}.
        let gain = Matrix::from_rows(2, 2, vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let inst = NetworkInstance {
            scenario: ScenarioTag::Adhoc,
            tx_pos: vec![[0.0; 3], [0.1, 0.0, 0.0]],
            rx_pos: vec![[0.1, 0.0, 0.0], [0.0; 3]],
            gain,
            p_high_watts: 1.0,
            noise_watts: 0.1,
            seed: 0,
            config_echo: serde_json::Value::Null,
            retries: 0,
        };
        let train = TrainingSet::new(vec![TrainingSample {
            instance: inst,
            optimal: Subset::new(vec![0, 1]).unwrap(),
        }])
        .unwrap();
        let params = ModelParams {
            family: ModelFamily::Adhoc,
            theta: vec![0.0; 3],
            sigma: 1.0,
            train_meta: None,
        };
        let ll = log_likelihood(&train, &params).unwrap();
        assert_eq!(ll.value, f64::NEG_INFINITY);
        assert_eq!(ll.degenerate, vec![0]);
    }

    #[test]
    fn training_set_json_round_trip() {
        let inst = gen_adhoc(&AdHocConfig {
            seed: 2,
            ..AdHocConfig::default()
        })
        .unwrap();
        let set = TrainingSet::new(vec![TrainingSample {
            instance: inst,
            optimal: Subset::new(vec![1, 3]).unwrap(),
        }])
        .unwrap();
        let text = set.to_json().unwrap();
        let back = TrainingSet::from_json(&text).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back.samples[0].optimal.indices(), &[1, 3]);
        assert_eq!(back.samples[0].instance.gain, set.samples[0].instance.gain);
    }

    #[test]
    fn map_route_close_to_enumeration() {
        // Sanity composition: enumerate_map on a built model kernel works.
        let inst = gen_adhoc(&AdHocConfig {
            density: 5.0,
            seed: 77,
            ..AdHocConfig::default()
        })
        .unwrap();
        if inst.m() <= 12 {
            let params = ModelParams {
                family: ModelFamily::Adhoc,
                theta: vec![0.01, -0.001, -0.0005],
                sigma: 0.3,
                train_meta: None,
            };
            let k = build_model_kernel(&inst, &params).unwrap();
            enumerate_map(&k).unwrap();
        }
    }
}
