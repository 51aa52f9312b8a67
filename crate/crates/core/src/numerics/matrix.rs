use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;

use super::{to_f64, Rational};
use crate::error::{Error, Result};

/// Square rational matrix with no symmetry assumption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    dim: usize,
    entries: Vec<Rational>,
}

impl RatMatrix {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.dim + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

/// Exact symmetric matrix; only the upper triangle is stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymMatrixExact {
    dim: usize,
    upper: Vec<Rational>,
}

impl SymMatrixExact {
    /// Builds from a function that is only queried for `i <= j`.
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut upper = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                upper.push(f(i, j));
            }
        }
        Self { dim, upper }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_upper_fn(dim, |_, _| Rational::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper_fn(dim, |i, j| {
            if i == j {
                Rational::from_integer(1.into())
            } else {
                Rational::zero()
            }
        })
    }

    pub fn diagonal(values: Vec<Rational>) -> Self {
        let dim = values.len();
        Self::from_upper_fn(dim, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Fails unless `m` is exactly symmetric.
    pub fn from_matrix(m: &RatMatrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::Internal("matrix is not symmetric".into()));
        }
        Ok(Self::from_upper_fn(m.dim(), |i, j| m.get(i, j).clone()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.upper[self.offset(i, j)]
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn entries_upper(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        let dim = self.dim;
        (0..dim)
            .flat_map(move |i| (i..dim).map(move |j| (i, j)))
            .zip(self.upper.iter())
            .map(|((i, j), v)| (i, j, v))
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries_upper().all(|(i, j, v)| i == j || v.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            dim: self.dim,
            upper: self.upper.iter().map(|a| a * c).collect(),
        }
    }

    pub fn to_float(&self) -> SymMatrixFloat {
        SymMatrixFloat::from_upper_fn(self.dim, |i, j| to_f64(self.get(i, j)))
    }
}

/// Double-precision symmetric matrix. Symmetry is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrixFloat {
    m: DMatrix<f64>,
}

impl SymMatrixFloat {
    pub fn from_upper_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { m }
    }

    /// Rejects any matrix that is not bit-for-bit symmetric.
    pub fn try_from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("matrix is not square".into()));
        }
        for i in 0..m.nrows() {
            for j in 0..i {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { m })
    }

    /// Symmetrizes `(m + mᵀ)/2`.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        Self::from_upper_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect()
    }
}

/// Outcome of [`psd_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

/// Tests `m ⪰ -tol·I` via a symmetric eigendecomposition.
pub fn psd_check(m: &SymMatrixFloat, tol: f64) -> PsdCheck {
    let min_eigenvalue = m
        .eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    PsdCheck {
        is_psd: min_eigenvalue >= -tol,
        min_eigenvalue,
    }
}
