use numerics::{logdet_lu, LuFactors, Matrix};

use crate::{DppError, Result};

/// Tolerance on principal minors when certifying the P0 property.
const MINOR_TOL: f64 = 1e-9;

/// Sorted, duplicate-free index set into a ground set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    indices: Vec<usize>,
}

impl Subset {
    /// Builds a subset; indices are sorted and must be unique.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(DppError::Domain("duplicate subset index".into()));
        }
        Ok(Self { indices })
    }

    pub fn empty() -> Self {
        Self {
            indices: Vec::new(),
        }
    }

    pub fn from_mask(mask: u32, n: usize) -> Self {
        Self {
            indices: (0..n).filter(|&i| mask >> i & 1 == 1).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.indices.last().copied()
    }
}

/// Outcome of the P0 (nonnegative principal minors) admissibility check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P0Status {
    /// All principal minors checked exhaustively (n <= 8).
    MinorsChecked,
    /// Certified by nonnegative diagonal with row diagonal dominance.
    RowDominance,
    /// Too large for exhaustive minors and no dominance certificate; the
    /// kernel is used as-is with this warning flag recorded.
    Unverified,
    /// A principal minor is negative beyond tolerance.
    Failed,
}

/// An L-ensemble kernel with optional quality/similarity provenance.
#[derive(Debug, Clone)]
pub struct KernelEnsemble {
    n: usize,
    l: Matrix,
    g: Option<Vec<f64>>,
    s: Option<Matrix>,
    p0: P0Status,
}

impl KernelEnsemble {
    /// Wraps a raw L matrix, running the P0 admissibility check.
    pub fn from_l(l: Matrix) -> Result<Self> {
        if !l.is_square() {
            return Err(DppError::Dimension(format!(
                "kernel must be square, got {}x{}",
                l.rows(),
                l.cols()
            )));
        }
        let n = l.rows();
        let p0 = check_p0(&l);
        Ok(Self {
            n,
            l,
            g: None,
            s: None,
            p0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn quality(&self) -> Option<&[f64]> {
        self.g.as_deref()
    }

    pub fn similarity(&self) -> Option<&Matrix> {
        self.s.as_ref()
    }

    pub fn p0_status(&self) -> P0Status {
        self.p0
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-10 * (1.0 + self.l.max_abs());
        self.l.max_asymmetry() <= tol
    }

    pub fn validate_subset(&self, y: &Subset) -> Result<()> {
        if let Some(max) = y.max_index() {
            if max >= self.n {
                return Err(DppError::Dimension(format!(
                    "subset index {max} out of range for ground set of size {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Exhaustive minors for n <= 8, Gershgorin row-dominance certificate above.
fn check_p0(l: &Matrix) -> P0Status {
    let n = l.rows();
    let scale = l.max_abs().max(1.0);
    if n <= 8 {
        for mask in 1u32..(1 << n) {
            let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let sub = l.principal_submatrix(&idx);
            if det_small(&sub) < -MINOR_TOL * scale.powi(idx.len() as i32) {
                return P0Status::Failed;
            }
        }
        return P0Status::MinorsChecked;
    }
    if row_dominance(l) {
        P0Status::RowDominance
    } else {
        P0Status::Unverified
    }
}

pub(crate) fn row_dominance(a: &Matrix) -> bool {
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        let d = a[(i, i)];
        if d < -1e-12 * scale || d + 1e-9 * scale < radius {
            return false;
        }
    }
    true
}

fn det_small(a: &Matrix) -> f64 {
    match logdet_lu(a) {
        Ok((0, _)) => 0.0,
        Ok((sign, ld)) => sign as f64 * ld.exp(),
        Err(_) => 0.0,
    }
}

/// Builds `L_ij = g_i * s_ij * g_j` from a positive quality vector and a
/// similarity matrix, retaining both as provenance.
pub fn build_kernel(g: &[f64], s: &Matrix) -> Result<KernelEnsemble> {
    let n = g.len();
    if s.rows() != n || s.cols() != n {
        return Err(DppError::Dimension(format!(
            "quality has length {n} but similarity is {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    if let Some(bad) = g.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
        return Err(DppError::Domain(format!(
            "quality entries must be positive and finite, got {bad}"
        )));
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = g[i] * s[(i, j)] * g[j];
        }
    }
    // P0 is invariant under positive diagonal conjugation, so certify on the
    // similarity matrix where the Gershgorin construction guarantees it.
    let p0 = {
        let from_s = check_p0(s);
        if from_s == P0Status::Unverified {
            check_p0(&l)
        } else {
            from_s
        }
    };
    Ok(KernelEnsemble {
        n,
        l,
        g: Some(g.to_vec()),
        s: Some(s.clone()),
        p0,
    })
}

/// Log-probability `logdet(L_Y) - logdet(L + I)` of a subset under the
/// L-ensemble; the empty set uses `det(L_emptyset) = 1`.
///
/// Returns `-inf` when `det(L_Y)` is nonpositive within tolerance.
pub fn subset_log_prob(k: &KernelEnsemble, y: &Subset) -> Result<f64> {
    k.validate_subset(y)?;
    let log_norm = log_normalizer(k)?;
    if y.is_empty() {
        return Ok(-log_norm);
    }
    let sub = k.l.principal_submatrix(y.indices());
    let (sign, ld) = logdet_lu(&sub)?;
    if sign <= 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ld - log_norm)
}

/// `logdet(L + I)`, the L-ensemble normalization constant.
pub fn log_normalizer(k: &KernelEnsemble) -> Result<f64> {
    let li = k.l.add(&Matrix::identity(k.n))?;
    let (sign, ld) = logdet_lu(&li)?;
    if sign <= 0 {
        return Err(DppError::NumericFailure(
            "L + I is singular or has nonpositive determinant".into(),
        ));
    }
    Ok(ld)
}

/// Marginal kernel `K = L (L + I)^{-1}`.
pub fn marginal_kernel(k: &KernelEnsemble) -> Result<Matrix> {
    let li = k.l.add(&Matrix::identity(k.n))?;
    // K (L+I) = L  =>  (L+I)^T K^T = L^T
    let factors = LuFactors::factor(&li.transpose())?;
    let kt = factors.solve(&k.l.transpose())?;
    Ok(kt.transpose())
}
