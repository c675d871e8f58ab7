use numerics::{logdet_lu, LuFactors, Matrix};

use crate::kernel::{KernelEnsemble, Subset};
use crate::{DppError, Result};

const CG_IMPROVEMENT_TOL: f64 = 1e-7;
const CG_MAX_ITERS: usize = 500;
const GOLDEN_ITERS: usize = 40;
const ENUM_GUARD: usize = 20;

/// A point of the box relaxation, componentwise in [0, 1].
#[derive(Debug, Clone)]
pub struct RelaxedPoint {
    x: Vec<f64>,
}

impl RelaxedPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DppError::Domain(format!(
                "relaxed point component {bad} outside [0, 1]"
            )));
        }
        Ok(Self { x })
    }

    pub fn zeros(n: usize) -> Self {
        Self { x: vec![0.0; n] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    /// Rounds by the indicator `x_i > delta`.
    pub fn round(&self, delta: f64) -> Subset {
        Subset::new(
            self.x
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > delta)
                .map(|(i, _)| i)
                .collect(),
        )
        .expect("indices are distinct")
    }
}

fn relaxation_matrix(k: &KernelEnsemble, x: &[f64]) -> Matrix {
    // diag(x) (L - I) + I
    let n = k.n();
    let l = k.l();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let lmi = l[(i, j)] - if i == j { 1.0 } else { 0.0 };
            m[(i, j)] = x[i] * lmi + if i == j { 1.0 } else { 0.0 };
        }
    }
    m
}

/// Multilinear extension `F(x) = logdet(diag(x)(L - I) + I)`.
///
/// Returns `-inf` when the argument matrix is singular or has nonpositive
/// determinant.
pub fn multilinear_value(k: &KernelEnsemble, x: &RelaxedPoint) -> Result<f64> {
    if x.x.len() != k.n() {
        return Err(DppError::Dimension("relaxed point length mismatch".into()));
    }
    let m = relaxation_matrix(k, &x.x);
    let (sign, ld) = logdet_lu(&m)?;
    if sign <= 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ld)
}

/// Gradient of the multilinear extension: component `i` is
/// `tr(M^{-1} (L - I)_i)` with `(L - I)_i` keeping only row i.
pub fn multilinear_gradient(k: &KernelEnsemble, x: &RelaxedPoint) -> Result<Vec<f64>> {
    if x.x.len() != k.n() {
        return Err(DppError::Dimension("relaxed point length mismatch".into()));
    }
    let n = k.n();
    let m = relaxation_matrix(k, &x.x);
    let w = LuFactors::factor(&m)?
        .inverse()
        .map_err(|e| DppError::NumericFailure(format!("relaxation matrix singular: {e}")))?;
    let l = k.l();
    let mut grad = vec![0.0; n];
    for i in 0..n {
        // tr(W R_i) with R_i zero outside row i reduces to a dot product of
        // row i of (L - I) with column i of W.
        let mut acc = 0.0;
        for j in 0..n {
            let lmi = l[(i, j)] - if i == j { 1.0 } else { 0.0 };
            acc += lmi * w[(j, i)];
        }
        grad[i] = acc;
    }
    Ok(grad)
}

/// Conditional-gradient ascent of `F` over the box `[0, upper]`.
///
/// Each step moves toward the vertex maximizing the linearized objective and
/// picks the step length by golden-section search on the segment; stops when
/// the improvement falls below 1e-7 or after 500 iterations.
pub fn local_opt(k: &KernelEnsemble, feasible_upper: &[f64]) -> Result<RelaxedPoint> {
    if feasible_upper.len() != k.n() {
        return Err(DppError::Dimension("feasible_upper length mismatch".into()));
    }
    if let Some(bad) = feasible_upper.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(DppError::Domain(format!(
            "feasible_upper component {bad} outside [0, 1]"
        )));
    }
    let n = k.n();
    let mut x = vec![0.0f64; n];
    let mut fx = 0.0; // F(0) = logdet(I) = 0

    for _ in 0..CG_MAX_ITERS {
        let grad = multilinear_gradient(k, &RelaxedPoint { x: x.clone() })?;
        let vertex: Vec<f64> = grad
            .iter()
            .zip(feasible_upper)
            .map(|(&g, &u)| if g > 0.0 { u } else { 0.0 })
            .collect();
        let dir: Vec<f64> = vertex.iter().zip(&x).map(|(v, xi)| v - xi).collect();
        if dir.iter().all(|d| d.abs() < 1e-15) {
            break;
        }
        let eval = |t: f64| -> Result<f64> {
            let pt: Vec<f64> = x
                .iter()
                .zip(&dir)
                .map(|(xi, di)| (xi + t * di).clamp(0.0, 1.0))
                .collect();
            multilinear_value(k, &RelaxedPoint { x: pt })
        };
        let (t_best, f_best) = golden_section_max(&eval, fx)?;
        if f_best <= fx + CG_IMPROVEMENT_TOL {
            break;
        }
        for (xi, di) in x.iter_mut().zip(&dir) {
            *xi = (*xi + t_best * di).clamp(0.0, 1.0);
        }
        fx = f_best;
    }

    Ok(RelaxedPoint { x })
}

/// Golden-section search for the maximum of `f` over [0, 1], seeded with the
/// endpoint value at t = 0.
fn golden_section_max(f: &impl Fn(f64) -> Result<f64>, f_at_zero: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut a = hi - INV_PHI * (hi - lo);
    let mut b = lo + INV_PHI * (hi - lo);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    let mut best = (0.0, f_at_zero);
    let f_one = f(1.0)?;
    if f_one > best.1 {
        best = (1.0, f_one);
    }
    for _ in 0..GOLDEN_ITERS {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = f(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + INV_PHI * (hi - lo);
            fb = f(b)?;
        }
        let (t, v) = if fa >= fb { (a, fa) } else { (b, fb) };
        if v > best.1 {
            best = (t, v);
        }
    }
    Ok(best)
}

/// MAP estimate via the relaxation: optimize over the full box, restart over
/// the complementary box capped at `1 - x`, keep the better point, round by
/// the indicator `x_i > delta`.
pub fn map_infer(k: &KernelEnsemble, delta: f64) -> Result<Subset> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(DppError::Domain(format!(
            "rounding threshold {delta} outside (0, 1)"
        )));
    }
    let n = k.n();
    let x = local_opt(k, &vec![1.0; n])?;
    let cap: Vec<f64> = x.coords().iter().map(|v| 1.0 - v).collect();
    let y = local_opt(k, &cap)?;
    let fx = multilinear_value(k, &x)?;
    let fy = multilinear_value(k, &y)?;
    Ok(if fx >= fy {
        x.round(delta)
    } else {
        y.round(delta)
    })
}

/// Exhaustive MAP over all subsets; guard at n <= 20. Ties break toward
/// smaller cardinality, then lexicographically smaller index list.
pub fn enumerate_map(k: &KernelEnsemble) -> Result<Subset> {
    let n = k.n();
    if n > ENUM_GUARD {
        return Err(DppError::Guard { n, max: ENUM_GUARD });
    }
    let mut best = Subset::empty();
    let mut best_ld = 0.0f64; // logdet(L_emptyset) = 0
    for mask in 1u32..(1 << n) {
        let y = Subset::from_mask(mask, n);
        let sub = k.l().principal_submatrix(y.indices());
        let (sign, ld) = logdet_lu(&sub)?;
        if sign <= 0 {
            continue;
        }
        let tie = (ld - best_ld).abs() <= 1e-12;
        if (tie
            && (y.len() < best.len() || (y.len() == best.len() && y.indices() < best.indices())))
            || (!tie && ld > best_ld)
        {
            best_ld = ld.max(best_ld);
            best = y;
        }
    }
    Ok(best)
}

/// Log-determinant of the principal submatrix `L_Y` (`-inf` when nonpositive).
pub fn subset_logdet(k: &KernelEnsemble, y: &Subset) -> Result<f64> {
    k.validate_subset(y)?;
    if y.is_empty() {
        return Ok(0.0);
    }
    let sub = k.l().principal_submatrix(y.indices());
    let (sign, ld) = logdet_lu(&sub)?;
    if sign <= 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ld)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelEnsemble;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernel(entries: Vec<f64>, n: usize) -> KernelEnsemble {
        KernelEnsemble::from_l(Matrix::from_rows(n, n, entries).unwrap()).unwrap()
    }

    #[test]
    fn value_at_zero_is_zero() {
        let k = kernel(vec![2., 1., 1., 2.], 2);
        let v = multilinear_value(&k, &RelaxedPoint::zeros(2)).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn value_at_ones_is_logdet() {
        let k = kernel(vec![2., 1., 1., 2.], 2);
        let v = multilinear_value(&k, &RelaxedPoint::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert!((v - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn value_at_indicator_is_principal_minor() {
        let k = kernel(vec![2., 1., 1., 2.], 2);
        let v = multilinear_value(&k, &RelaxedPoint::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_zero_for_identity_kernel() {
        let k = kernel(vec![1., 0., 0., 1.], 2);
        let g =
            multilinear_gradient(&k, &RelaxedPoint::new(vec![0.3, 0.7]).unwrap()).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gradient_at_zero_is_diagonal_minus_one() {
        let k = kernel(vec![2., 1., 1., 3.], 2);
        let g = multilinear_gradient(&k, &RelaxedPoint::zeros(2)).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!((g[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let n = rng.gen_range(2..=8);
            let mut b = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] = rng.gen_range(-1.0..1.0);
                }
            }
            let l = b.matmul(&b.transpose()).unwrap();
            let k = KernelEnsemble::from_l(l).unwrap();
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.8)).collect();
            let pt = RelaxedPoint::new(x.clone()).unwrap();
            let grad = multilinear_gradient(&k, &pt).unwrap();
            let h = 1e-6;
            for i in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fp = multilinear_value(&k, &RelaxedPoint::new(xp).unwrap()).unwrap();
                let fm = multilinear_value(&k, &RelaxedPoint::new(xm).unwrap()).unwrap();
                let fd = (fp - fm) / (2.0 * h);
                let denom = 1.0f64.max(fd.abs());
                assert!(
                    (grad[i] - fd).abs() / denom <= 1e-5,
                    "component {i}: analytic {} vs fd {fd}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn local_opt_monotone_diagonal_case() {
        let k = kernel(vec![3., 0., 0., 3.], 2);
        let x = local_opt(&k, &[1.0, 1.0]).unwrap();
        let f = multilinear_value(&k, &x).unwrap();
        assert!((f - 9.0f64.ln()).abs() < 1e-4, "F = {f}");
        assert!(x.coords().iter().all(|&v| v > 0.99));
    }

    #[test]
    fn local_opt_degenerate_box() {
        let k = kernel(vec![3., 0., 0., 3.], 2);
        let x = local_opt(&k, &[0.0, 0.0]).unwrap();
        assert!(x.coords().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn map_diagonal_prefers_large_eigenvalue() {
        let k = kernel(vec![10., 0., 0., 0.1], 2);
        let y = map_infer(&k, 0.5).unwrap();
        assert_eq!(y.indices(), &[0]);
        // Agreement with the brute-force oracle.
        let exact = enumerate_map(&k).unwrap();
        assert_eq!(y.indices(), exact.indices());
    }

    #[test]
    fn map_zero_kernel_is_empty() {
        let k = kernel(vec![0.0; 4], 2);
        assert!(map_infer(&k, 0.5).unwrap().is_empty());
    }

    #[test]
    fn enumerate_map_identity_tie_breaks_to_empty() {
        let k = kernel(vec![1., 0., 0., 1.], 2);
        assert!(enumerate_map(&k).unwrap().is_empty());
    }

    #[test]
    fn enumerate_map_hand_cases() {
        let k = kernel(vec![3., 0., 0., 0.5], 2);
        assert_eq!(enumerate_map(&k).unwrap().indices(), &[0]);
        let k = kernel(vec![2., 1., 1., 2.], 2);
        assert_eq!(enumerate_map(&k).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn enumerate_map_guard() {
        let k = KernelEnsemble::from_l(Matrix::identity(21)).unwrap();
        assert!(matches!(
            enumerate_map(&k),
            Err(DppError::Guard { n: 21, max: 20 })
        ));
    }

    #[test]
    fn scale_covariance_of_logdet() {
        // Replacing S by c*S shifts logdet(L_Y) by |Y| log c.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 5;
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b[(i, j)] = rng.gen_range(-1.0..1.0);
            }
        }
        let s = b.matmul(&b.transpose()).unwrap();
        let g = vec![1.3, 0.7, 2.0, 0.5, 1.0];
        let c = 3.7;
        let k1 = crate::build_kernel(&g, &s).unwrap();
        let k2 = crate::build_kernel(&g, &s.scale(c)).unwrap();
        for mask in 1u32..1 << n {
            let y = Subset::from_mask(mask, n);
            let ld1 = subset_logdet(&k1, &y).unwrap();
            let ld2 = subset_logdet(&k2, &y).unwrap();
            if ld1.is_finite() && ld2.is_finite() {
                let shift = y.len() as f64 * c.ln();
                assert!((ld2 - ld1 - shift).abs() < 1e-9 * (1.0 + ld1.abs()));
            }
        }
    }

    #[test]
    fn map_near_exhaustive_on_random_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut hits = 0;
        let total = 50;
        for _ in 0..total {
            let n = rng.gen_range(3..=8);
            let mut b = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] = rng.gen_range(-1.0..1.0);
                }
            }
            let mut l = b.matmul(&b.transpose()).unwrap();
            for i in 0..n {
                l[(i, i)] += 0.5;
            }
            let k = KernelEnsemble::from_l(l).unwrap();
            let approx = map_infer(&k, 0.5).unwrap();
            let exact = enumerate_map(&k).unwrap();
            let ld_a = subset_logdet(&k, &approx).unwrap();
            let ld_e = subset_logdet(&k, &exact).unwrap();
            if ld_a >= ld_e - 0.05 {
                hits += 1;
            }
        }
        assert!(hits * 10 >= total * 9, "only {hits}/{total} near-optimal");
    }
}
