use crate::{Matrix, NumericsError, Result, SINGULARITY_RTOL};

/// Partial-pivot LU factorization of a square matrix.
///
/// Stores L (unit lower) and U packed in one matrix plus the row permutation.
/// A pivot smaller than `SINGULARITY_RTOL` times the largest absolute entry of
/// the input marks the matrix as numerically singular.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Matrix,
    perm: Vec<usize>,
    perm_sign: f64,
    /// Index of the first degenerate pivot, if any.
    singular_at: Option<usize>,
    pivot_floor: f64,
}

impl LuFactors {
    pub fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(NumericsError::Dimension(format!(
                "LU requires a square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        let pivot_floor = SINGULARITY_RTOL * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut perm_sign = 1.0;
        let mut singular_at = None;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for r in (k + 1)..n {
                let v = lu[(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if p != k {
                for c in 0..n {
                    let tmp = lu[(k, c)];
                    lu[(k, c)] = lu[(p, c)];
                    lu[(p, c)] = tmp;
                }
                perm.swap(k, p);
                perm_sign = -perm_sign;
            }
            let pivot = lu[(k, k)];
            if pivot.abs() <= pivot_floor {
                if singular_at.is_none() {
                    singular_at = Some(k);
                }
                continue;
            }
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / pivot;
                lu[(r, k)] = factor;
                if factor == 0.0 {
                    continue;
                }
                for c in (k + 1)..n {
                    lu[(r, c)] -= factor * lu[(k, c)];
                }
            }
        }

        Ok(Self {
            lu,
            perm,
            perm_sign,
            singular_at,
            pivot_floor,
        })
    }

    pub fn is_singular(&self) -> bool {
        self.singular_at.is_some()
    }

    /// Determinant as `(sign, log|det|)`; sign 0 means numerically singular.
    pub fn logdet(&self) -> (i8, f64) {
        if self.singular_at.is_some() {
            return (0, f64::NEG_INFINITY);
        }
        let n = self.lu.rows();
        let mut sign = self.perm_sign;
        let mut log_abs = 0.0;
        for k in 0..n {
            let pivot = self.lu[(k, k)];
            if pivot < 0.0 {
                sign = -sign;
            }
            log_abs += pivot.abs().ln();
        }
        (if sign > 0.0 { 1 } else { -1 }, log_abs)
    }

    /// Solves `a x = b` for all columns of `b`.
    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if let Some(pivot) = self.singular_at {
            return Err(NumericsError::Singular { pivot });
        }
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(NumericsError::Dimension(format!(
                "solve rhs has {} rows, expected {n}",
                b.rows()
            )));
        }
        let ncols = b.cols();
        let mut x = Matrix::zeros(n, ncols);
        // Forward substitution on the permuted rhs, then back substitution.
        for c in 0..ncols {
            for i in 0..n {
                let mut v = b[(self.perm[i], c)];
                for k in 0..i {
                    v -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = v;
            }
            for i in (0..n).rev() {
                let mut v = x[(i, c)];
                for k in (i + 1)..n {
                    v -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = v / self.lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.lu.rows()))
    }

    pub fn pivot_floor(&self) -> f64 {
        self.pivot_floor
    }
}

/// Determinant of `a` via partial-pivot LU as `(sign, log|det|)`.
///
/// `sign == 0` indicates a pivot below the relative singularity threshold.
pub fn logdet_lu(a: &Matrix) -> Result<(i8, f64)> {
    Ok(LuFactors::factor(a)?.logdet())
}

/// Solves `a x = b`; errors on singular `a` naming the failing pivot index.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    LuFactors::factor(a)?.solve(b)
}
