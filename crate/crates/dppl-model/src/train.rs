use crate::likelihood::{grad_log_likelihood, log_likelihood, TrainingSet};
use crate::params::{ModelFamily, ModelParams, TrainMeta};
use crate::{ModelError, Result};

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub max_iters: usize,
    /// Stop when the transformed-gradient infinity norm falls below this.
    pub grad_tol: f64,
    /// Armijo sufficient-increase constant.
    pub armijo_c: f64,
    pub init_step: f64,
    /// Recorded in the output metadata only; training is deterministic.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            grad_tol: 1e-6,
            armijo_c: 1e-4,
            init_step: 1.0,
            seed: 0,
        }
    }
}

/// Optimization coordinates: positive parameters (sigma always; theta for
/// the dronecell family) are driven through their logarithm so positivity
/// holds by construction; the ad hoc theta components are unconstrained.
fn to_coords(p: &ModelParams) -> Vec<f64> {
    match p.family {
        ModelFamily::Adhoc => vec![p.theta[0], p.theta[1], p.theta[2], p.sigma.ln()],
        ModelFamily::Dronecell => vec![p.theta[0].ln(), p.sigma.ln()],
    }
}

fn from_coords(family: ModelFamily, z: &[f64]) -> ModelParams {
    match family {
        ModelFamily::Adhoc => ModelParams {
            family,
            theta: vec![z[0], z[1], z[2]],
            sigma: z[3].exp(),
            train_meta: None,
        },
        ModelFamily::Dronecell => ModelParams {
            family,
            theta: vec![z[0].exp()],
            sigma: z[1].exp(),
            train_meta: None,
        },
    }
}

/// Chain rule from the raw-parameter gradient to coordinate space.
fn coord_grad(p: &ModelParams, raw: &[f64]) -> Vec<f64> {
    match p.family {
        ModelFamily::Adhoc => vec![raw[0], raw[1], raw[2], raw[3] * p.sigma],
        ModelFamily::Dronecell => vec![raw[0] * p.theta[0], raw[1] * p.sigma],
    }
}

fn objective(train: &TrainingSet, p: &ModelParams) -> f64 {
    match log_likelihood(train, p) {
        Ok(ll) => ll.value,
        // Overflowed quality or a failed factorization: treat as a rejected
        // step, not a fatal error.
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Gradient ascent with backtracking (halving) Armijo line search, stopping
/// at gradient tolerance or the iteration cap. The returned parameters carry
/// training metadata and never have lower likelihood than `init`.
pub fn train(train_set: &TrainingSet, init: &ModelParams, cfg: &TrainConfig) -> Result<ModelParams> {
    Ok(train_with_trace(train_set, init, cfg)?.0)
}

/// As [`train`], also returning the log-likelihood after initialization and
/// each accepted ascent step (a non-decreasing sequence).
pub fn train_with_trace(
    train_set: &TrainingSet,
    init: &ModelParams,
    cfg: &TrainConfig,
) -> Result<(ModelParams, Vec<f64>)> {
    if train_set.is_empty() {
        return Err(ModelError::Data("empty training set".into()));
    }
    init.validate()?;
    // Labels with nonpositive subset determinant have zero probability at
    // every parameter value reachable from here (the quality factors only
    // rescale rows and columns positively), so they are dropped rather than
    // pinning the whole likelihood at -inf. Only an entirely degenerate
    // start is an error.
    let filtered;
    let (train_set, init_ll) = match log_likelihood(train_set, init) {
        Ok(ll) if ll.value > f64::NEG_INFINITY => (train_set, ll),
        Ok(ll) if ll.degenerate.len() < train_set.len() => {
            let keep: Vec<_> = train_set
                .samples
                .iter()
                .enumerate()
                .filter(|(t, _)| ll.degenerate.binary_search(t).is_err())
                .map(|(_, s)| s.clone())
                .collect();
            filtered = TrainingSet::new(keep)?;
            let ll = log_likelihood(&filtered, init)?;
            if ll.value == f64::NEG_INFINITY {
                return Err(ModelError::DegenerateInit);
            }
            (&filtered, ll)
        }
        // A failed normalizer at the start is as unusable as an all-sentinel
        // likelihood: the caller needs a different starting point.
        Ok(_) | Err(ModelError::Dpp(_)) => return Err(ModelError::DegenerateInit),
        Err(e) => return Err(e),
    };
    let train_set: &TrainingSet = train_set;

    let family = init.family;
    let mut z = to_coords(init);
    let mut value = init_ll.value;
    let mut step = cfg.init_step;
    let mut iterations = 0;
    let mut trace = vec![value];

    while iterations < cfg.max_iters {
        let params = from_coords(family, &z);
        let raw = grad_log_likelihood(train_set, &params)?;
        let grad = coord_grad(&params, &raw);
        let inf_norm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        if inf_norm <= cfg.grad_tol {
            break;
        }
        let grad_sq: f64 = grad.iter().map(|g| g * g).sum();
        let mut accepted = false;
        let mut s = step;
        for _ in 0..60 {
            let z_try: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + s * gi).collect();
            let v_try = objective(train_set, &from_coords(family, &z_try));
            if v_try.is_finite() && v_try >= value + cfg.armijo_c * s * grad_sq {
                z = z_try;
                value = v_try;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(value);
        step = (2.0 * s).min(cfg.init_step * 64.0);
        iterations += 1;
    }

    let mut out = from_coords(family, &z);
    out.train_meta = Some(TrainMeta {
        iterations,
        final_log_lik: value,
        seed: cfg.seed,
    });
    Ok((out, trace))
}
