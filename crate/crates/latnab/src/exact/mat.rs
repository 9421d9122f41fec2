//! Dense matrices over exact scalars.
//!
//! Dimensions in this crate are tiny (≤ 17), so the implementations favor
//! clarity over cache tricks; the only algorithmic care taken is fraction
//! control: determinants go through fraction-free (Bareiss) elimination on a
//! denominator-cleared integer matrix rather than rational Gaussian
//! elimination.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Signed, Zero};

use super::{denominator_lcm, Int, Rat};
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IMat = Mat<Int>;
pub type QMat = Mat<Rat>;

impl<T: Clone> Mat<T> {
    pub fn filled(rows: usize, cols: usize, fill: T) -> Self {
        Mat { rows, cols, data: vec![fill; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::RaggedRows);
        }
        Ok(Mat { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn transpose(&self) -> Self {
        let mut out = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)].clone());
            }
        }
        Mat { rows: self.cols, cols: self.rows, data: out }
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Mat<T> {
    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Clone + Zero + One> Mat<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Mat::filled(n, n, T::zero());
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Mat::filled(rows, cols, T::zero())
    }
}

impl<T> Mat<T>
where
    T: Clone + Zero + std::ops::Mul<Output = T> + std::ops::Add<Output = T>,
{
    /// Matrix product; panics on inner-dimension mismatch (internal misuse).
    pub fn mul(&self, other: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Mat::filled(self.rows, other.cols, T::zero());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let t = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + t;
                }
            }
        }
        out
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len(), "vector-matrix dimension mismatch");
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j].clone() + vi.clone() * self[(i, j)].clone();
            }
        }
        out
    }
}

impl<T: fmt::Debug> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[")?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{:?}", self.data[i * self.cols + j])?;
            }
            writeln!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IMat {
    /// Determinant by fraction-free (Bareiss) elimination; all intermediate
    /// divisions are exact.
    pub fn det(&self) -> Result<Int> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(Int::one());
        }
        let mut b = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if b[(k, k)].is_zero() {
                let Some(swap) = (k + 1..n).find(|&i| !b[(i, k)].is_zero()) else {
                    return Ok(Int::zero());
                };
                for j in 0..n {
                    let t = b[(k, j)].clone();
                    b[(k, j)] = b[(swap, j)].clone();
                    b[(swap, j)] = t;
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &b[(k, k)] * &b[(i, j)] - &b[(i, k)] * &b[(k, j)];
                    b[(i, j)] = num / &prev;
                }
                b[(i, k)] = Int::zero();
            }
            prev = b[(k, k)].clone();
        }
        Ok(sign * b[(n - 1, n - 1)].clone())
    }

    pub fn to_rational(&self) -> QMat {
        self.map(|x| Rat::from_integer(x.clone()))
    }
}

/// Unit lower-triangular factorization data for a symmetric positive-definite
/// matrix G: G = Uᵀ·diag(q)·U with U unit upper-triangular. Written so that
/// the quadratic form splits as x·G·xᵀ = Σᵢ qᵢ·(xᵢ + Σ_{j>i} uᵢⱼ xⱼ)².
pub struct Ldl {
    /// Positive pivots q₀…q_{n−1}.
    pub q: Vec<Rat>,
    /// Strictly-upper coefficients uᵢⱼ (unit diagonal implicit).
    pub u: QMat,
}

impl QMat {
    /// Exact determinant: clear denominators once, run integer Bareiss,
    /// divide back by the scaling.
    pub fn det(&self) -> Result<Rat> {
        self.require_square()?;
        let lambda = denominator_lcm(self.data.iter());
        let scaled = self.map(|x| {
            let v = x * Rat::from_integer(lambda.clone());
            debug_assert!(v.denom().is_one());
            v.to_integer()
        });
        let d = scaled.det()?;
        let mut denom = Int::one();
        for _ in 0..self.rows {
            denom *= &lambda;
        }
        Ok(Rat::new(d, denom))
    }

    /// Solve M·x = v exactly (Gaussian elimination, first-nonzero pivoting).
    pub fn solve(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        self.require_square()?;
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, got: v.len() });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = v.to_vec();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !a[(i, col)].is_zero()) else {
                return Err(Error::Singular);
            };
            if p != col {
                for j in 0..n {
                    let t = a[(col, j)].clone();
                    a[(col, j)] = a[(p, j)].clone();
                    a[(p, j)] = t;
                }
                b.swap(col, p);
            }
            let inv = a[(col, col)].recip();
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = &a[(i, col)] * &inv;
                for j in col..n {
                    let t = &f * &a[(col, j)];
                    a[(i, j)] = &a[(i, j)] - &t;
                }
                let t = &f * &b[col];
                b[i] = &b[i] - &t;
            }
        }
        for i in 0..n {
            b[i] = &b[i] / &a[(i, i)];
        }
        Ok(b)
    }

    /// Exact inverse via Gauss-Jordan.
    pub fn inverse(&self) -> Result<QMat> {
        self.require_square()?;
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = QMat::identity(n);
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !a[(i, col)].is_zero()) else {
                return Err(Error::Singular);
            };
            if p != col {
                for j in 0..n {
                    let t = a[(col, j)].clone();
                    a[(col, j)] = a[(p, j)].clone();
                    a[(p, j)] = t;
                    let t = inv[(col, j)].clone();
                    inv[(col, j)] = inv[(p, j)].clone();
                    inv[(p, j)] = t;
                }
            }
            let d = a[(col, col)].recip();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] * &d;
                inv[(col, j)] = &inv[(col, j)] * &d;
            }
            for i in 0..n {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..n {
                    let t = &f * &a[(col, j)];
                    a[(i, j)] = &a[(i, j)] - &t;
                    let t = &f * &inv[(col, j)];
                    inv[(i, j)] = &inv[(i, j)] - &t;
                }
            }
        }
        Ok(inv)
    }

    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..i {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    /// Fraction-free-in-spirit LDL of a symmetric matrix; fails with
    /// `NotPositiveDefinite` on a nonpositive pivot, so it doubles as the
    /// positive-definiteness test.
    pub fn ldl(&self) -> Result<Ldl> {
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut u = QMat::zero(n, n);
        let mut q = Vec::with_capacity(n);
        for i in 0..n {
            let qi = a[(i, i)].clone();
            if !qi.is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
            for j in i + 1..n {
                u[(i, j)] = &a[(i, j)] / &qi;
            }
            for k in i + 1..n {
                for l in k..n {
                    let t = &u[(i, k)] * &a[(i, l)];
                    a[(k, l)] = &a[(k, l)] - &t;
                }
            }
            q.push(qi);
        }
        Ok(Ldl { q, u })
    }

    /// True iff every entry is an integer.
    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|x| x.denom().is_one())
    }

    /// All entries as integers after multiplying by `scale`; panics if the
    /// scaling does not clear denominators (internal misuse).
    pub fn scaled_integer(&self, scale: &Int) -> IMat {
        self.map(|x| {
            let v = x * Rat::from_integer(scale.clone());
            assert!(v.denom().is_one(), "scaling did not clear denominators");
            v.to_integer()
        })
    }

    /// LCM of all entry denominators.
    pub fn denominator_lcm(&self) -> Int {
        denominator_lcm(self.data.iter())
    }
}

/// Quadratic form evaluation x·G·yᵀ for rational G and rational vectors.
pub fn form_product(g: &QMat, x: &[Rat], y: &[Rat]) -> Rat {
    assert_eq!(g.nrows(), x.len());
    assert_eq!(g.ncols(), y.len());
    let mut acc = Rat::zero();
    for (i, xi) in x.iter().enumerate() {
        if xi.is_zero() {
            continue;
        }
        let mut row = Rat::zero();
        for (j, yj) in y.iter().enumerate() {
            if yj.is_zero() {
                continue;
            }
            row += &g[(i, j)] * yj;
        }
        acc += xi * &row;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, ratio};

    fn imat(rows: &[&[i64]]) -> IMat {
        IMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .unwrap()
    }

    fn qmat(rows: &[&[i64]]) -> QMat {
        imat(rows).to_rational()
    }

    #[test]
    fn det_small_integer_cases() {
        assert_eq!(imat(&[&[1, 0], &[0, 1]]).det().unwrap(), int(1));
        assert_eq!(imat(&[&[4, -2], &[-2, 4]]).det().unwrap(), int(12));
        assert_eq!(imat(&[&[0, 4], &[2, 0]]).det().unwrap(), int(-8));
        assert_eq!(imat(&[&[2, 0], &[4, 0]]).det().unwrap(), int(0));
        // 4x4 with a zero leading pivot partway
        let m = imat(&[&[1, 2, 3, 4], &[2, 4, 1, 0], &[0, 0, 2, 1], &[3, 0, 0, 1]]);
        assert_eq!(m.det().unwrap(), int(-66));
    }

    #[test]
    fn det_rational_scaling() {
        let mut g = qmat(&[&[4, -2], &[-2, 4]]);
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] = &g[(i, j)] / &rat(2);
            }
        }
        assert_eq!(g.det().unwrap(), rat(3));
    }

    #[test]
    fn solve_and_inverse_round_trip() {
        let m = qmat(&[&[2, 0], &[0, 2]]);
        let x = m.solve(&[rat(1), rat(3)]).unwrap();
        assert_eq!(x, vec![ratio(1, 2), ratio(3, 2)]);

        let m = qmat(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMat::identity(3));

        let singular = qmat(&[&[1, 2], &[2, 4]]);
        assert!(singular.solve(&[rat(1), rat(1)]).is_err());
        assert!(singular.inverse().is_err());
    }

    #[test]
    fn ldl_splits_the_form() {
        let g = qmat(&[&[4, -2], &[-2, 4]]);
        let ldl = g.ldl().unwrap();
        assert_eq!(ldl.q, vec![rat(4), rat(3)]);
        assert_eq!(ldl.u[(0, 1)], ratio(-1, 2));
        // x G xᵀ == Σ q_i (x_i + Σ u_ij x_j)² for a sample x
        let x = [rat(3), rat(-5)];
        let direct = form_product(&g, &x, &x);
        let y0 = &x[0] + &(&ldl.u[(0, 1)] * &x[1]);
        let split = &ldl.q[0] * &y0 * &y0 + &ldl.q[1] * &x[1] * &x[1];
        assert_eq!(direct, split);

        assert!(qmat(&[&[1, 2], &[2, 1]]).ldl().is_err());
        assert!(qmat(&[&[0, 0], &[0, 1]]).ldl().is_err());
    }

    #[test]
    fn mul_and_transpose() {
        let a = imat(&[&[1, 2], &[3, 4]]);
        let b = imat(&[&[0, 1], &[1, 0]]);
        assert_eq!(a.mul(&b), imat(&[&[2, 1], &[4, 3]]));
        assert_eq!(a.transpose(), imat(&[&[1, 3], &[2, 4]]));
        assert_eq!(a.vec_mul(&[int(1), int(1)]), vec![int(4), int(6)]);
    }
}
