//! Dual quotient groups and coset class tables.
//!
//! For an integral lattice L the dual L* contains L with finite index det(L).
//! The Smith normal form of the Gram matrix G identifies L*/L: writing
//! d = s G t with s, t unimodular, the class of a dual vector with dual-basis
//! coefficient row a is (a t) mod diag(d), and the mixed-radix generator for
//! digit i is the i-th row of t^-1 G^-1 in lattice-basis coefficients.
//!
//! Each class is summarized by a coset leader: a vector of minimum norm in
//! the coset, ties broken by lexicographically smallest coefficient vector.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::exact::{int, snf, IMat, Int, QMat, Rat};
use crate::lattice::Lattice;
use crate::shells::coset_minimum;
use crate::{Error, Result};

/// Largest quotient the class enumeration will walk by default.
pub const DEFAULT_CLASS_BOUND: u64 = 4096;

/// The structure of L*/L.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    pub order: Int,
    /// Invariant factors greater than 1, in divisibility order.
    pub invariant_factors: Vec<Int>,
    /// Frame-coordinate generators, parallel to `invariant_factors`.
    pub generators: Vec<Vec<Rat>>,
}

/// One coset of L in L*.
#[derive(Clone, Debug)]
pub struct CosetClass {
    /// Minimum-norm coset member, frame coordinates.
    pub leader: Vec<Rat>,
    pub leader_norm: Rat,
    /// Order of the class in L*/L.
    pub group_order: Int,
    /// Whether the class equals its own negative.
    pub is_self_negative: bool,
}

/// Grouped class-table row: `count` classes (pairs when `paired`) sharing a
/// leader norm and group order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassRow {
    pub count: u64,
    pub paired: bool,
    pub norm: Rat,
    pub order: Int,
}

#[derive(Clone, Debug)]
pub struct ClassTable {
    pub order: Int,
    pub rows: Vec<ClassRow>,
}

/// Mixed-radix coordinates for L*/L, shared by the class walk here and the
/// overlattice census.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    /// Full Smith diagonal of the Gram matrix (including trivial 1s).
    pub diag: Vec<Int>,
    pub order: Int,
    /// Row i = lattice-basis coefficients of the digit-i generator
    /// (t^-1 G^-1).
    coeff_rows: QMat,
    /// Classifier: dual-coefficient row a belongs to class (a t) mod diag.
    t: IMat,
}

impl QuotientMap {
    pub fn new(lat: &Lattice) -> Result<QuotientMap> {
        if !lat.is_integral() {
            return Err(Error::NotIntegral);
        }
        let g = lat.gram().scaled_integer(&Int::one());
        let smith = snf(&g)?;
        let diag = smith.invariant_factors();
        let order = diag.iter().product();
        let tinv = smith.t.to_rational().inverse()?;
        let coeff_rows = tinv.mul(&lat.gram().inverse()?);
        Ok(QuotientMap { diag, order, coeff_rows, t: smith.t })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Class count as u64, or the budget error when it exceeds `bound`.
    pub fn checked_order(&self, bound: u64) -> Result<u64> {
        match self.order.to_u64() {
            Some(o) if o <= bound => Ok(o),
            Some(o) => Err(Error::QuotientTooLarge { order: o, bound }),
            None => Err(Error::QuotientTooLarge { order: u64::MAX, bound }),
        }
    }

    /// Lattice-basis coefficients of the representative with digits `v`.
    pub fn class_coefficients(&self, v: &[i64]) -> Vec<Rat> {
        let d = self.dim();
        let mut out = vec![Rat::zero(); d];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0 {
                continue;
            }
            let c = Rat::from_integer(int(vi));
            for (slot, r) in out.iter_mut().zip(self.coeff_rows.row(i)) {
                *slot += &c * r;
            }
        }
        out
    }

    /// Digits of the class of a dual vector given by dual-basis coefficients.
    pub fn classify_dual(&self, a: &[Int]) -> Vec<i64> {
        let d = self.dim();
        let mut digits = Vec::with_capacity(d);
        for j in 0..d {
            let mut x = Int::zero();
            for i in 0..d {
                x += &a[i] * &self.t[(i, j)];
            }
            digits.push(
                x.mod_floor(&self.diag[j])
                    .to_i64()
                    .expect("digit bounded by invariant factor"),
            );
        }
        digits
    }

    /// Machine-word form of the classifier for hot loops: (diag, m) with
    /// m[i][j] = t[i][j] mod diag[j], so a dual-coefficient row `a` has
    /// digits[j] = (sum_i a[i] m[i][j]) mod diag[j].
    pub fn classifier_table(&self, bound: u64) -> Result<(Vec<i64>, Vec<Vec<i64>>)> {
        self.checked_order(bound)?;
        let diag: Vec<i64> = self
            .diag
            .iter()
            .map(|d| d.to_i64().expect("bounded by checked order"))
            .collect();
        let d = self.dim();
        let mut m = vec![vec![0i64; d]; d];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = self.t[(i, j)]
                    .mod_floor(&self.diag[j])
                    .to_i64()
                    .expect("entry bounded by invariant factor");
            }
        }
        Ok((diag, m))
    }

    /// Componentwise sum of two digit vectors.
    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        (0..self.dim())
            .map(|i| {
                let m = self.diag[i].to_i64().expect("checked_order bounds the digits");
                (a[i] + b[i]).rem_euclid(m)
            })
            .collect()
    }

    /// Order of the class with digits `v`.
    pub fn class_order(&self, v: &[i64]) -> Int {
        let mut order = Int::one();
        for (vi, di) in v.iter().zip(&self.diag) {
            let vi = int(*vi);
            order = order.lcm(&(di / di.gcd(&vi)));
        }
        order
    }

    /// Whether the class equals its own negative (2v = 0).
    pub fn self_negative(&self, v: &[i64]) -> bool {
        v.iter()
            .zip(&self.diag)
            .all(|(vi, di)| (int(2 * vi) % di).is_zero())
    }

    /// All digit vectors in mixed-radix counting order (class 0 first).
    pub fn all_digits(&self, bound: u64) -> Result<Vec<Vec<i64>>> {
        let order = self.checked_order(bound)?;
        let radix: Vec<i64> = self
            .diag
            .iter()
            .map(|d| d.to_i64().expect("bounded by checked order"))
            .collect();
        let mut out = Vec::with_capacity(order as usize);
        let mut v = vec![0i64; self.dim()];
        loop {
            out.push(v.clone());
            let mut i = 0;
            loop {
                if i == v.len() {
                    return Ok(out);
                }
                v[i] += 1;
                if v[i] < radix[i] {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
        }
    }
}

/// The quotient group L*/L with its nontrivial generators.
pub fn quotient_group(lat: &Lattice) -> Result<QuotientGroup> {
    let map = QuotientMap::new(lat)?;
    let mut invariant_factors = Vec::new();
    let mut generators = Vec::new();
    for (i, d) in map.diag.iter().enumerate() {
        if *d > Int::one() {
            invariant_factors.push(d.clone());
            let mut digits = vec![0i64; map.dim()];
            digits[i] = 1;
            let coeffs = map.class_coefficients(&digits);
            generators.push(frame_vector(lat, &coeffs));
        }
    }
    Ok(QuotientGroup { order: map.order.clone(), invariant_factors, generators })
}

fn frame_vector(lat: &Lattice, coeffs: &[Rat]) -> Vec<Rat> {
    let d = lat.dim();
    let mut v = vec![Rat::zero(); d];
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (slot, b) in v.iter_mut().zip(lat.basis().row(i)) {
            *slot += c * b;
        }
    }
    v
}

/// All coset classes of L in L*, in mixed-radix order, each with its leader.
pub fn coset_classes(lat: &Lattice, bound: u64, budget: u64) -> Result<Vec<CosetClass>> {
    let map = QuotientMap::new(lat)?;
    let digit_list = map.all_digits(bound)?;
    let mut classes = Vec::with_capacity(digit_list.len());
    for digits in &digit_list {
        let offset = map.class_coefficients(digits);
        let (norm, args) = coset_minimum(lat, &offset, budget)?;
        // Leader: minimum norm, then lexicographically smallest coefficient
        // vector among the minimizers.
        let leader_coeffs = args
            .iter()
            .map(|x| {
                let c: Vec<Rat> = offset
                    .iter()
                    .zip(x)
                    .map(|(o, xi)| o + Rat::from_integer(int(*xi)))
                    .collect();
                c
            })
            .min()
            .expect("coset minimum returns at least one minimizer");
        classes.push(CosetClass {
            leader: frame_vector(lat, &leader_coeffs),
            leader_norm: norm,
            group_order: map.class_order(digits),
            is_self_negative: map.self_negative(digits),
        });
    }
    Ok(classes)
}

/// Class table rows grouped by (leader norm, order), +/- pairs counted once.
pub fn class_table(lat: &Lattice, bound: u64, budget: u64) -> Result<ClassTable> {
    let classes = coset_classes(lat, bound, budget)?;
    let mut buckets: std::collections::BTreeMap<(Rat, Int, bool), u64> =
        std::collections::BTreeMap::new();
    for c in &classes {
        *buckets
            .entry((c.leader_norm.clone(), c.group_order.clone(), !c.is_self_negative))
            .or_insert(0) += 1;
    }
    let mut rows = Vec::with_capacity(buckets.len());
    for ((norm, order, paired), n) in buckets {
        let count = if paired {
            assert!(n % 2 == 0, "non-self-negative classes come in +/- pairs");
            n / 2
        } else {
            n
        };
        rows.push(ClassRow { count, paired, norm, order });
    }
    let total: u64 = rows.iter().map(|r| r.count * if r.paired { 2 } else { 1 }).sum();
    let order = int(total as i64);
    debug_assert_eq!(order, int(classes.len() as i64));
    Ok(ClassTable { order, rows })
}
