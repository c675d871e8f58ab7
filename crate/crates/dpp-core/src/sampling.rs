use numerics::sym_eig;
use rand::Rng;

use crate::kernel::{marginal_kernel, KernelEnsemble, Subset};
use crate::{DppError, Result};

/// Exact sampler for symmetric kernels via the two-phase spectral scheme.
///
/// Phase 1 keeps eigenindex `n` with probability `lambda_n / (1 + lambda_n)`;
/// phase 2 draws `|J|` items from the induced elementary DPP by selecting an
/// item with probability proportional to its squared row norm and projecting
/// the remaining rows orthogonal to the chosen one.
pub fn sample_spectral(k: &KernelEnsemble, rng: &mut impl Rng) -> Result<Subset> {
    let scale = k.l().max_abs().max(1.0);
    if !k.is_symmetric() {
        return Err(DppError::Asymmetric {
            asym: k.l().max_asymmetry(),
        });
    }
    let eig = sym_eig(k.l())?;
    let clamp_tol = 1e-9 * scale;
    let mut lambdas = Vec::with_capacity(k.n());
    for &lam in &eig.values {
        if lam < -clamp_tol {
            return Err(DppError::NumericFailure(format!(
                "eigenvalue {lam:.3e} below -{clamp_tol:.3e}; kernel is not PSD"
            )));
        }
        lambdas.push(lam.max(0.0));
    }

    // Phase 1: choose the elementary DPP.
    let selected: Vec<usize> = (0..k.n())
        .filter(|&j| rng.gen::<f64>() < lambdas[j] / (1.0 + lambdas[j]))
        .collect();

    Ok(sample_elementary(k.n(), &eig.vectors, &selected, rng))
}

/// Phase 2 of the spectral sampler, exposed for the fixed-cardinality
/// property test: given the phase-1 eigenindex set, |Y| = |J| always.
pub fn sample_elementary(
    n: usize,
    eigvectors: &numerics::Matrix,
    selected_eigs: &[usize],
    rng: &mut impl Rng,
) -> Subset {
    let k = selected_eigs.len();
    if k == 0 {
        return Subset::empty();
    }
    // Row i of `b` holds item i's coordinates in the selected eigenbasis.
    let mut b: Vec<Vec<f64>> = (0..n)
        .map(|i| selected_eigs.iter().map(|&j| eigvectors[(i, j)]).collect())
        .collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);

    for _ in 0..k {
        let norms: Vec<f64> = b.iter().map(|row| row.iter().map(|v| v * v).sum()).collect();
        let total: f64 = norms
            .iter()
            .enumerate()
            .filter(|(i, _)| !chosen.contains(i))
            .map(|(_, v)| v)
            .sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = usize::MAX;
        for i in 0..n {
            if chosen.contains(&i) {
                continue;
            }
            target -= norms[i];
            if target <= 0.0 {
                pick = i;
                break;
            }
        }
        if pick == usize::MAX {
            // Rounding at the very end of the cumulative scan.
            pick = (0..n).rev().find(|i| !chosen.contains(i)).unwrap();
        }
        chosen.push(pick);

        // Project every row orthogonal to the chosen one and renormalize.
        let norm = norms[pick].sqrt();
        if norm > 0.0 {
            let unit: Vec<f64> = b[pick].iter().map(|v| v / norm).collect();
            for row in b.iter_mut() {
                let dot: f64 = row.iter().zip(&unit).map(|(a, u)| a * u).sum();
                for (a, u) in row.iter_mut().zip(&unit) {
                    *a -= dot * u;
                }
            }
        }
    }

    chosen.sort_unstable();
    Subset::new(chosen).expect("chosen items are distinct")
}

/// Exact sampler for general P0 kernels.
///
/// Visits items in index order; the running matrix starts as the marginal
/// kernel `K = L (L+I)^{-1}` and each decision is folded in by a Schur
/// complement update, so the current diagonal entry is always the exact
/// conditional inclusion probability given all previous decisions.
pub fn sample_sequential(k: &KernelEnsemble, rng: &mut impl Rng) -> Result<Subset> {
    let n = k.n();
    let mut a = marginal_kernel(k)?;
    let mut indices = Vec::new();
    let tol = 1e-9;

    for j in 0..n {
        let p = a[(j, j)];
        if !(-tol..=1.0 + tol).contains(&p) {
            return Err(DppError::NumericFailure(format!(
                "conditional inclusion probability {p:.6e} for item {j} \
                 outside [0, 1]; kernel is not P0"
            )));
        }
        let include = rng.gen::<f64>() < p.clamp(0.0, 1.0);
        if include {
            indices.push(j);
        } else {
            a[(j, j)] -= 1.0;
        }
        let pivot = a[(j, j)];
        if pivot.abs() < 1e-300 {
            // Probability-zero branch taken by rounding; nothing to condition.
            continue;
        }
        for r in (j + 1)..n {
            let f = a[(r, j)] / pivot;
            if f == 0.0 {
                continue;
            }
            for c in (j + 1)..n {
                a[(r, c)] -= f * a[(j, c)];
            }
        }
    }

    Ok(Subset::new(indices).expect("indices are strictly increasing"))
}
