//! Small dense matrices over arbitrary-precision rationals: exact products,
//! inverses, kernels, and characteristic polynomials.

use num::bigint::BigInt;
use num::{One, Signed, Zero};

use crate::rational::Rat;
use crate::CoreError;

/// Row-major square matrix of exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatMat {
    n: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zero(n: usize) -> Self {
        RatMat {
            n,
            data: vec![Rat::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zero(n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn diag(entries: &[Rat]) -> Self {
        let mut m = RatMat::zero(entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self, CoreError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(CoreError::Shape(format!(
                "expected a square matrix, got {n} rows of varying length"
            )));
        }
        Ok(RatMat {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n));
        RatMat {
            n,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|&v| Rat::from_integer(BigInt::from(v))))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul(&self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let n = self.n;
        let mut out = RatMat::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a * &rhs[(k, j)];
                    out[(i, j)] += v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Rat::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn transpose(&self) -> RatMat {
        let n = self.n;
        let mut out = RatMat::zero(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> RatMat {
        let mut base = self.clone();
        let mut out = RatMat::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> RatMat {
        RatMat {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, rhs: &RatMat) -> RatMat {
        assert_eq!(self.n, rhs.n);
        RatMat {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// `self - lambda * I`.
    pub fn sub_scalar_diag(&self, lambda: &Rat) -> RatMat {
        let mut out = self.clone();
        for i in 0..self.n {
            let v = &out[(i, i)] - lambda;
            out[(i, i)] = v;
        }
        out
    }

    /// Exact inverse via Gauss-Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<RatMat> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = RatMat::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] /= p.clone();
                inv[(col, j)] /= p.clone();
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let f = a[(r, col)].clone();
                for j in 0..n {
                    let av = &a[(col, j)] * &f;
                    a[(r, j)] -= av;
                    let iv = &inv[(col, j)] * &f;
                    inv[(r, j)] -= iv;
                }
            }
        }
        Some(inv)
    }

    /// Basis of the exact kernel (null space), via reduced row echelon form.
    /// Each basis vector carries coefficient 1 in its free-variable slot.
    pub fn kernel(&self) -> Vec<Vec<Rat>> {
        let n = self.n;
        let mut a = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0usize;
        for col in 0..n {
            let Some(p) = (r..n).find(|&row| !a[(row, col)].is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..n {
                    a.data.swap(r * n + j, p * n + j);
                }
            }
            let pv = a[(r, col)].clone();
            for j in 0..n {
                a[(r, j)] /= pv.clone();
            }
            for row in 0..n {
                if row == r || a[(row, col)].is_zero() {
                    continue;
                }
                let f = a[(row, col)].clone();
                for j in 0..n {
                    let v = &a[(r, j)] * &f;
                    a[(row, j)] -= v;
                }
            }
            pivot_cols.push(col);
            r += 1;
            if r == n {
                break;
            }
        }
        let mut basis = Vec::new();
        for free in 0..n {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); n];
            v[free] = Rat::one();
            for (ri, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = -a[(ri, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solves `self * x = b` exactly; `None` when singular.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        Some(self.inverse()?.mul_vec(b))
    }

    /// Characteristic polynomial det(t*I - M), exact, via the
    /// Faddeev-LeVerrier recurrence. Returned ascending by power of t, with
    /// leading coefficient 1 at index n.
    pub fn char_poly(&self) -> Vec<Rat> {
        let n = self.n;
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = Rat::one();
        let mut m = RatMat::identity(n);
        for k in 1..=n {
            m = self.mul(&m);
            let tr: Rat = (0..n).fold(Rat::zero(), |acc, i| acc + &m[(i, i)]);
            let c = -tr / Rat::from_integer(BigInt::from(k as i64));
            coeffs[n - k] = c.clone();
            for i in 0..n {
                m[(i, i)] += c.clone();
            }
        }
        coeffs
    }

    /// Largest absolute value of any entry, as an exact rational.
    pub fn max_abs(&self) -> Rat {
        self.data
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.n + j]
    }
}
