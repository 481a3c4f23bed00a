//! Small dense matrices and a cyclic Jacobi eigensolver for symmetric ones.

use std::fmt;

use crate::scalar::Scalar;

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![T::zero(); size * size],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size);
        for i in 0..size {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds from rows; `None` unless every row has `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return None;
        }
        Some(Self {
            size,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.size.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            size: self.size,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.size, other.size);
        let n = self.size;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `y = A x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let n = self.size;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            y[i] = crate::scalar::dot(row, x);
        }
    }

    /// `y = Aᵀ x`
    pub fn apply_transpose(&self, x: &[T], y: &mut [T]) {
        let n = self.size;
        for (j, yj) in y.iter_mut().enumerate().take(n) {
            let mut acc = T::zero();
            for i in 0..n {
                acc = acc + self.data[i * n + j] * x[i];
            }
            *yj = acc;
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn asymmetry(&self) -> T {
        self.max_abs_diff(&self.transpose())
    }

    fn off_diagonal_norm(&self) -> T {
        let n = self.size;
        let mut acc = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc = acc + self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }

    fn frobenius(&self) -> T {
        crate::scalar::norm(&self.data)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.size + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.size + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for row in self.data.chunks(self.size.max(1)) {
            list.entry(&row);
        }
        list.finish()
    }
}

/// Orthogonal eigendecomposition `B = Q diag(values) Qᵀ`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        self.vectors
            .matmul(&Matrix::diag(&self.values))
            .matmul(&self.vectors.transpose())
    }

    pub fn orthogonality_defect(&self) -> T {
        self.vectors
            .transpose()
            .matmul(&self.vectors)
            .max_abs_diff(&Matrix::identity(self.vectors.size()))
    }

    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
pub struct EigFailure {
    pub sweeps: usize,
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi. Converged when the off-diagonal Frobenius norm drops to
/// `1e-13 · ‖B‖_F` (floored at a few ulps for single precision).
pub fn symmetric_eigen<T: Scalar>(b: &Matrix<T>) -> Result<SymmetricEigen<T>, EigFailure> {
    let n = b.size();
    let mut a = b.clone();
    let mut q = Matrix::identity(n);
    let threshold = T::lit(1e-13).max(T::lit(16.0) * T::epsilon()) * b.frobenius();

    let mut converged = a.off_diagonal_norm() <= threshold;
    let mut sweep = 0;
    while !converged && sweep < JACOBI_MAX_SWEEPS {
        for p in 0..n {
            for r in (p + 1)..n {
                let apr = a[(p, r)];
                if apr == T::zero() {
                    continue;
                }
                let theta = (a[(r, r)] - a[(p, p)]) / (T::lit(2.0) * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // A <- Jᵀ A J on rows/cols p, r
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akr = a[(k, r)];
                    a[(k, p)] = c * akp - s * akr;
                    a[(k, r)] = s * akp + c * akr;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let ark = a[(r, k)];
                    a[(p, k)] = c * apk - s * ark;
                    a[(r, k)] = s * apk + c * ark;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
        sweep += 1;
        converged = a.off_diagonal_norm() <= threshold;
    }
    if !converged {
        return Err(EigFailure { sweeps: sweep });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).expect("finite eigenvalues"));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n);
    let tiny = T::epsilon().sqrt();
    for (col, &src) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|k| q[(k, src)])
            .find(|v| v.abs() > tiny)
            .map_or(T::one(), |v| v.signum());
        for k in 0..n {
            vectors[(k, col)] = sign * q[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}
