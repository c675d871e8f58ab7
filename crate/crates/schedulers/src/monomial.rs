use crate::{Result, SchedError};

/// Tangent monomial coefficients at the previous iterate:
/// `alpha_i = g'/(1+g')`, `k_i = (1+g') / g'^alpha_i`.
pub fn monomial_params(gamma_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(bad) = gamma_prev.iter().find(|&&g| !(g > 0.0) || !g.is_finite()) {
        return Err(SchedError::Domain(format!(
            "previous SINR must be positive finite, got {bad}"
        )));
    }
    let alpha: Vec<f64> = gamma_prev.iter().map(|&g| g / (1.0 + g)).collect();
    let k: Vec<f64> = gamma_prev
        .iter()
        .zip(&alpha)
        .map(|(&g, &a)| (1.0 + g) / g.powf(a))
        .collect();
    Ok((k, alpha))
}

/// Global lower-bound check for the tangent monomial:
/// `prod (1+gamma_i) >= prod k_i gamma_i^alpha_i`, evaluated in log domain
/// with a 1e-9 slack. Used as a runtime assertion each outer iteration.
pub fn monomial_validity(gamma: &[f64], gamma_prev: &[f64]) -> bool {
    let Ok((k, alpha)) = monomial_params(gamma_prev) else {
        return false;
    };
    if gamma.len() != gamma_prev.len() || gamma.iter().any(|&g| !(g > 0.0)) {
        return false;
    }
    let lhs: f64 = gamma.iter().map(|&g| (1.0 + g).ln()).sum();
    let rhs: f64 = gamma
        .iter()
        .zip(k.iter().zip(&alpha))
        .map(|(&g, (&ki, &ai))| ki.ln() + ai * g.ln())
        .sum();
    lhs >= rhs - 1e-9
}
