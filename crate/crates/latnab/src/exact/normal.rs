//! Integer normal forms: row-style Hermite (with transform) and Smith (with
//! both transforms).
//!
//! The HNF here is the canonical form used for lattice equality, so its shape
//! is pinned: row echelon, pivots strictly positive, entries above each pivot
//! reduced into [0, pivot). Uniqueness of that form per row span is what
//! makes `Lattice::equals` a structural comparison.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::{IMat, Int};
use crate::{Error, Result};

/// Smith normal form data: d = s·m·t with s, t unimodular and the diagonal
/// of d a divisibility chain d₁ | d₂ | …
pub struct Smith {
    pub d: IMat,
    pub s: IMat,
    pub t: IMat,
}

/// Invariant factors (the positive diagonal) of a Smith form.
impl Smith {
    pub fn invariant_factors(&self) -> Vec<Int> {
        (0..self.d.nrows()).map(|i| self.d[(i, i)].clone()).collect()
    }
}

fn swap_rows(m: &mut IMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.ncols() {
        let t = m[(a, j)].clone();
        m[(a, j)] = m[(b, j)].clone();
        m[(b, j)] = t;
    }
}

fn swap_cols(m: &mut IMat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.nrows() {
        let t = m[(i, a)].clone();
        m[(i, a)] = m[(i, b)].clone();
        m[(i, b)] = t;
    }
}

/// row a -= q * row b
fn row_sub(m: &mut IMat, a: usize, b: usize, q: &Int) {
    if q.is_zero() {
        return;
    }
    for j in 0..m.ncols() {
        let t = q * &m[(b, j)];
        m[(a, j)] = &m[(a, j)] - t;
    }
}

/// col a -= q * col b
fn col_sub(m: &mut IMat, a: usize, b: usize, q: &Int) {
    if q.is_zero() {
        return;
    }
    for i in 0..m.nrows() {
        let t = q * &m[(i, b)];
        m[(i, a)] = &m[(i, a)] - t;
    }
}

fn negate_row(m: &mut IMat, a: usize) {
    for j in 0..m.ncols() {
        m[(a, j)] = -m[(a, j)].clone();
    }
}

/// Echelon HNF with transform; returns (h, u, rank) where h = u·m, u
/// unimodular, zero rows of h (if any) at the bottom.
fn hnf_core(m: &IMat) -> (IMat, IMat, usize) {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut h = m.clone();
    let mut u = IMat::identity(rows);
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        // Chain gcd reductions until at most one nonzero remains in rows r..
        loop {
            let piv = (r..rows)
                .filter(|&i| !h[(i, col)].is_zero())
                .min_by_key(|&i| h[(i, col)].abs());
            let Some(piv) = piv else { break };
            swap_rows(&mut h, r, piv);
            swap_rows(&mut u, r, piv);
            let mut below_nonzero = false;
            for i in r + 1..rows {
                if h[(i, col)].is_zero() {
                    continue;
                }
                let q = &h[(i, col)] / &h[(r, col)];
                row_sub(&mut h, i, r, &q);
                row_sub(&mut u, i, r, &q);
                below_nonzero |= !h[(i, col)].is_zero();
            }
            if !below_nonzero {
                break;
            }
        }
        if h[(r, col)].is_zero() {
            continue;
        }
        if h[(r, col)].is_negative() {
            negate_row(&mut h, r);
            negate_row(&mut u, r);
        }
        for i in 0..r {
            let q = h[(i, col)].div_floor(&h[(r, col)]);
            row_sub(&mut h, i, r, &q);
            row_sub(&mut u, i, r, &q);
        }
        r += 1;
    }
    (h, u, r)
}

/// Canonical row-style Hermite normal form of a full-row-rank matrix.
/// h = u·m with u unimodular.
pub fn hnf(m: &IMat) -> Result<(IMat, IMat)> {
    let (h, u, rank) = hnf_core(m);
    if rank != m.nrows() {
        return Err(Error::RankDeficient);
    }
    Ok((h, u))
}

/// HNF of a generating set: dependent/duplicate rows allowed; returns the
/// canonical basis (zero rows dropped) and the rank.
pub fn hnf_generators(m: &IMat) -> (IMat, usize) {
    let (h, _, rank) = hnf_core(m);
    let basis =
        IMat::from_rows((0..rank).map(|i| h.row(i).to_vec()).collect()).expect("rows uniform");
    (basis, rank)
}

/// Smith normal form of a square nonsingular matrix.
pub fn snf(m: &IMat) -> Result<Smith> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let n = m.nrows();
    let mut a = m.clone();
    let mut s = IMat::identity(n);
    let mut t = IMat::identity(n);
    for k in 0..n {
        'pivot: loop {
            // Smallest nonzero entry of the trailing submatrix as pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in k..n {
                for j in k..n {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return Err(Error::Singular);
            };
            swap_rows(&mut a, k, pi);
            swap_rows(&mut s, k, pi);
            swap_cols(&mut a, k, pj);
            swap_cols(&mut t, k, pj);

            let mut clean = true;
            for i in k + 1..n {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let q = &a[(i, k)] / &a[(k, k)];
                row_sub(&mut a, i, k, &q);
                row_sub(&mut s, i, k, &q);
                clean &= a[(i, k)].is_zero();
            }
            for j in k + 1..n {
                if a[(k, j)].is_zero() {
                    continue;
                }
                let q = &a[(k, j)] / &a[(k, k)];
                col_sub(&mut a, j, k, &q);
                col_sub(&mut t, j, k, &q);
                clean &= a[(k, j)].is_zero();
            }
            if !clean {
                continue 'pivot;
            }
            // Divisibility repair: fold in a row containing a non-multiple.
            for i in k + 1..n {
                for j in k + 1..n {
                    if !(&a[(i, j)] % &a[(k, k)]).is_zero() {
                        let minus_one = -Int::one();
                        row_sub(&mut a, k, i, &minus_one);
                        row_sub(&mut s, k, i, &minus_one);
                        continue 'pivot;
                    }
                }
            }
            break;
        }
        if a[(k, k)].is_negative() {
            negate_row(&mut a, k);
            negate_row(&mut s, k);
        }
    }
    Ok(Smith { d: a, s, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn imat(rows: &[&[i64]]) -> IMat {
        IMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
            .unwrap()
    }

    fn is_unimodular(m: &IMat) -> bool {
        matches!(m.det(), Ok(d) if d.abs() == int(1))
    }

    #[test]
    fn hnf_pinned_canonical_form() {
        let (h, u) = hnf(&imat(&[&[2, 0], &[1, 1]])).unwrap();
        assert_eq!(h, imat(&[&[1, 1], &[0, 2]]));
        assert!(is_unimodular(&u));
        assert_eq!(u.mul(&imat(&[&[2, 0], &[1, 1]])), h);

        let (h, _) = hnf(&IMat::identity(3)).unwrap();
        assert_eq!(h, IMat::identity(3));

        let (h, u) = hnf(&imat(&[&[0, 4], &[2, 0]])).unwrap();
        assert_eq!(h, imat(&[&[2, 0], &[0, 4]]));
        assert!(is_unimodular(&u));
        assert_eq!(h.det().unwrap().abs(), int(8));
    }

    #[test]
    fn hnf_rejects_rank_deficient() {
        assert!(matches!(hnf(&imat(&[&[1, 2], &[2, 4]])), Err(Error::RankDeficient)));
    }

    #[test]
    fn hnf_generators_drops_dependent_rows() {
        let (basis, rank) = hnf_generators(&imat(&[&[2, 0], &[1, 1], &[3, 1], &[0, 0]]));
        assert_eq!(rank, 2);
        assert_eq!(basis, imat(&[&[1, 1], &[0, 2]]));

        // A strict sublattice keeps its own span.
        let (basis, rank) = hnf_generators(&imat(&[&[4, 0], &[0, 6], &[4, 6]]));
        assert_eq!(rank, 2);
        assert_eq!(basis, imat(&[&[4, 0], &[0, 6]]));
    }

    #[test]
    fn snf_pinned_cases() {
        let sm = snf(&imat(&[&[2, 0], &[0, 4]])).unwrap();
        assert_eq!(sm.invariant_factors(), vec![int(2), int(4)]);

        // Hexagonal-type Gram: invariant factors (2, 6), order 12.
        let m = imat(&[&[4, -2], &[-2, 4]]);
        let sm = snf(&m).unwrap();
        assert_eq!(sm.invariant_factors(), vec![int(2), int(6)]);
        assert!(is_unimodular(&sm.s));
        assert!(is_unimodular(&sm.t));
        assert_eq!(sm.s.mul(&m).mul(&sm.t), sm.d);

        // Divisibility repair path: diag(2,3) has factors (1,6).
        let sm = snf(&imat(&[&[2, 0], &[0, 3]])).unwrap();
        assert_eq!(sm.invariant_factors(), vec![int(1), int(6)]);

        assert!(snf(&imat(&[&[1, 1], &[1, 1]])).is_err());
    }
}
