//! Dense square matrices and log-determinants via LU factorization.
//!
//! The scattering matrices this crate builds are small (a few hundred rows at
//! most) and dense, and the only decomposition the physics needs is
//! `ln det`. A straightforward partial-pivot LU in place is accurate, simple
//! to audit, and fast enough that matrix assembly — not factorization —
//! dominates the runtime.
//!
//! Determinants of the matrices that arise here range over hundreds of
//! orders of magnitude, so the factorizations never form the determinant
//! itself: they accumulate `Σ ln|u_ii|` plus a sign (real case) or a wrapped
//! phase (complex case).

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Log-determinant of a real matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLogDet {
    /// `ln |det|`.
    pub ln_abs: f64,
    /// `det / |det|`, i.e. `+1.0` or `-1.0`.
    pub sign: f64,
    /// Crude conditioning proxy `max|u_ii| / min|u_ii|` from the LU diagonal.
    pub condition: f64,
}

/// Log-determinant of a complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CplxLogDet {
    /// `ln |det|`.
    pub ln_abs: f64,
    /// `arg det`, wrapped to `(−π, π]`. Callers that need a continuous
    /// phase along a curve must unwrap across evaluations themselves.
    pub phase: f64,
    /// Crude conditioning proxy `max|u_ii| / min|u_ii|` from the LU diagonal.
    pub condition: f64,
}

/// Dense row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Dense row-major square matrix of `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct CplxMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl RealMatrix {
    /// All-zero `n × n` matrix.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from an entry function `(row, col) -> value`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at `(row, col)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Set entry at `(row, col)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    /// Naive matrix product `self · rhs`.
    pub fn mul(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = RealMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Log-determinant by in-place partial-pivot LU.
    ///
    /// Errors with [`Error::SingularMatrix`] if a pivot column is entirely
    /// zero or subnormal. An empty matrix has determinant 1 by convention.
    pub fn log_det(mut self) -> Result<RealLogDet> {
        let n = self.n;
        let mut ln_abs = 0.0;
        let mut sign = 1.0;
        let mut max_piv = f64::MIN_POSITIVE;
        let mut min_piv = f64::MAX;
        for col in 0..n {
            // pivot search: largest magnitude in the column at or below the diagonal
            let mut piv_row = col;
            let mut piv_mag = self.data[col * n + col].abs();
            for row in (col + 1)..n {
                let mag = self.data[row * n + col].abs();
                if mag > piv_mag {
                    piv_mag = mag;
                    piv_row = row;
                }
            }
            if !(piv_mag >= f64::MIN_POSITIVE) || !piv_mag.is_finite() {
                return Err(Error::SingularMatrix { pivot: col, dim: n });
            }
            if piv_row != col {
                for j in 0..n {
                    self.data.swap(col * n + j, piv_row * n + j);
                }
                sign = -sign;
            }
            let pivot = self.data[col * n + col];
            ln_abs += piv_mag.ln();
            if pivot < 0.0 {
                sign = -sign;
            }
            max_piv = max_piv.max(piv_mag);
            min_piv = min_piv.min(piv_mag);
            for row in (col + 1)..n {
                let factor = self.data[row * n + col] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[row * n + col] = 0.0;
                for j in (col + 1)..n {
                    self.data[row * n + j] -= factor * self.data[col * n + j];
                }
            }
        }
        let condition = if n == 0 { 1.0 } else { max_piv / min_piv };
        Ok(RealLogDet {
            ln_abs,
            sign,
            condition,
        })
    }
}

impl CplxMatrix {
    /// All-zero `n × n` matrix.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from an entry function `(row, col) -> value`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry at `(row, col)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Set entry at `(row, col)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// Raw row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Naive matrix product `self · rhs`.
    pub fn mul(&self, rhs: &CplxMatrix) -> CplxMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = CplxMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Log-determinant by in-place partial-pivot LU.
    ///
    /// The returned phase is `arg det` wrapped to `(−π, π]`; it is the sum of
    /// pivot arguments re-wrapped once at the end.
    pub fn log_det(mut self) -> Result<CplxLogDet> {
        let n = self.n;
        let mut ln_abs = 0.0;
        let mut phase = 0.0;
        let mut max_piv = f64::MIN_POSITIVE;
        let mut min_piv = f64::MAX;
        for col in 0..n {
            let mut piv_row = col;
            let mut piv_mag = self.data[col * n + col].norm();
            for row in (col + 1)..n {
                let mag = self.data[row * n + col].norm();
                if mag > piv_mag {
                    piv_mag = mag;
                    piv_row = row;
                }
            }
            if !(piv_mag >= f64::MIN_POSITIVE) || !piv_mag.is_finite() {
                return Err(Error::SingularMatrix { pivot: col, dim: n });
            }
            if piv_row != col {
                for j in 0..n {
                    self.data.swap(col * n + j, piv_row * n + j);
                }
                phase += std::f64::consts::PI; // row swap flips the sign
            }
            let pivot = self.data[col * n + col];
            ln_abs += piv_mag.ln();
            phase += pivot.arg();
            max_piv = max_piv.max(piv_mag);
            min_piv = min_piv.min(piv_mag);
            for row in (col + 1)..n {
                let factor = self.data[row * n + col] / pivot;
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                self.data[row * n + col] = Complex64::new(0.0, 0.0);
                for j in (col + 1)..n {
                    let sub = factor * self.data[col * n + j];
                    self.data[row * n + j] -= sub;
                }
            }
        }
        // wrap to (−π, π]
        let wrapped = phase.rem_euclid(2.0 * std::f64::consts::PI);
        let phase = if wrapped > std::f64::consts::PI {
            wrapped - 2.0 * std::f64::consts::PI
        } else {
            wrapped
        };
        let condition = if n == 0 { 1.0 } else { max_piv / min_piv };
        Ok(CplxLogDet {
            ln_abs,
            phase,
            condition,
        })
    }
}
