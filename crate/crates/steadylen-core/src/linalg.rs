//! Dense linear algebra on charts (n ≤ 4 in practice).
//!
//! Matrices are row-major flat buffers generic over [`Scalar`] so the same
//! LU factorization runs inside dual-number pipelines. Pivoting compares
//! stripped values, which is valid because pivot selection only steers the
//! elimination order.

use crate::scalar::Scalar;
use alloc::vec;
use alloc::vec::Vec;

/// Row-major n×n matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> SquareMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            *m.at_mut(i, i) = S::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                *m.at_mut(i, j) = f(i, j);
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.n + j]
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut acc = S::zero();
            for k in 0..n {
                acc += self.at(i, k) * rhs.at(k, j);
            }
            acc
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.at(j, i))
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = S::zero();
                for j in 0..n {
                    acc += self.at(i, j) * v[j];
                }
                acc
            })
            .collect()
    }

    /// Bilinear form vᵀ M w.
    pub fn bilinear(&self, v: &[S], w: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += v[i] * self.at(i, j) * w[j];
            }
        }
        acc
    }

    /// Closed-form inverse for n ≤ 2 (hot path inside nested dual
    /// arithmetic), LU for larger n.
    fn inverse_small(&self) -> Option<Self> {
        match self.n {
            1 => {
                if self.data[0].value() == 0.0 {
                    return None;
                }
                Some(SquareMatrix {
                    n: 1,
                    data: alloc::vec![S::one() / self.data[0]],
                })
            }
            2 => {
                let (a, b, c, d) = (self.data[0], self.data[1], self.data[2], self.data[3]);
                let det = a * d - b * c;
                let dv = det.value();
                if dv == 0.0 || !dv.is_finite() {
                    return None;
                }
                let inv = S::one() / det;
                Some(SquareMatrix {
                    n: 2,
                    data: alloc::vec![d * inv, -b * inv, -c * inv, a * inv],
                })
            }
            _ => None,
        }
    }

    /// LU solve with partial pivoting. Returns `None` when a pivot vanishes.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        if self.n <= 2 {
            return Some(self.inverse_small()?.mul_vec(b));
        }
        let n = self.n;
        let mut a = self.data.clone();
        let mut x: Vec<S> = b.to_vec();
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].value().abs();
            for row in (col + 1)..n {
                let v = a[row * n + col].value().abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                x.swap(col, pivot);
            }
            let inv = S::one() / a[col * n + col];
            for row in (col + 1)..n {
                let factor = a[row * n + col] * inv;
                for j in col..n {
                    let sub = factor * a[col * n + j];
                    a[row * n + j] -= sub;
                }
                let sub = factor * x[col];
                x[row] -= sub;
            }
        }
        for col in (0..n).rev() {
            let mut acc = x[col];
            for j in (col + 1)..n {
                acc -= a[col * n + j] * x[j];
            }
            x[col] = acc / a[col * n + col];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.n <= 2 {
            return self.inverse_small();
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                *out.at_mut(i, j) = col[i];
            }
        }
        Some(out)
    }

    /// Largest |entry| of the stripped values.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|s| s.value().abs())
            .fold(0.0, f64::max)
    }

    /// Positive definiteness of the stripped matrix via Cholesky.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.n;
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.at(i, j).value();
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 || !sum.is_finite() {
                        return false;
                    }
                    l[i * n + i] = libm::sqrt(sum);
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        true
    }
}

/// Euclidean-coefficient dot product (no metric).
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (x, y) in a.iter().zip(b.iter()) {
        acc += *x * *y;
    }
    acc
}

pub fn scale<S: Scalar>(a: &[S], c: S) -> Vec<S> {
    a.iter().map(|x| *x * c).collect()
}

pub fn add<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b.iter()).map(|(x, y)| *x + *y).collect()
}

pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b.iter()).map(|(x, y)| *x - *y).collect()
}

pub fn axpy<S: Scalar>(y: &mut [S], alpha: S, x: &[S]) {
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += alpha * *xi;
    }
}

pub fn norm2(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Dual;

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = SquareMatrix {
            n: 3,
            data: vec![4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0],
        };
        let b = vec![1.0, -2.0, 0.25];
        let x = m.solve(&b).unwrap();
        let back = m.mul_vec(&x);
        for i in 0..3 {
            assert!((back[i] - b[i]).abs() < 1e-12);
        }
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((id.at(i, j) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_works_in_dual_arithmetic() {
        // Solving A(x) y = b where A depends on x propagates derivatives;
        // check d/dx of y for A = [[x, 0], [0, 2]], b = (1, 1):
        // y0 = 1/x, dy0/dx = -1/x^2.
        let x = Dual::<f64>::variable(3.0);
        let a = SquareMatrix {
            n: 2,
            data: vec![
                x,
                Dual::from_f64(0.0),
                Dual::from_f64(0.0),
                Dual::from_f64(2.0),
            ],
        };
        let b = vec![Dual::from_f64(1.0), Dual::from_f64(1.0)];
        let y = a.solve(&b).unwrap();
        assert!((y[0].re - 1.0 / 3.0).abs() < 1e-15);
        assert!((y[0].du - (-1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn cholesky_detects_indefiniteness() {
        let pd = SquareMatrix {
            n: 2,
            data: vec![2.0, 0.3, 0.3, 1.0],
        };
        assert!(pd.is_positive_definite());
        let indef = SquareMatrix {
            n: 2,
            data: vec![1.0, 2.0, 2.0, 1.0],
        };
        assert!(!indef.is_positive_definite());
    }

    #[test]
    fn singular_matrix_reports_none() {
        let m = SquareMatrix {
            n: 2,
            data: vec![1.0, 2.0, 2.0, 4.0],
        };
        assert!(m.solve(&[1.0, 1.0]).is_none());
    }
}
