//! Exact scalars and dense matrices over the integers and rationals, plus the
//! integer normal forms (Hermite, Smith) the lattice layer is built on.
//!
//! Scalars are arbitrary precision throughout: 64-bit overflow is reachable
//! in normal-form transforms already at dimension 16, so fixed-width integers
//! appear only in the enumeration kernels behind explicit overflow
//! certificates (see `shells`).

mod mat;
mod normal;

pub use mat::{form_product, IMat, Ldl, Mat, QMat};
pub use normal::{hnf, hnf_generators, snf, Smith};

use num_traits::{One, Signed};

use crate::{Error, Result};

/// Arbitrary-precision integer.
pub type Int = num_bigint::BigInt;

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (maintained by the `num-rational` representation).
pub type Rat = num_rational::BigRational;

/// Shorthand constructors for literals in code and tests.
pub fn int(n: i64) -> Int {
    Int::from(n)
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(int(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(int(n), int(d))
}

/// Parse "p" or "p/q" (q > 0 after normalization).
pub fn rat_parse(s: &str) -> Result<Rat> {
    let t = s.trim();
    match t.parse::<Rat>() {
        Ok(r) => Ok(r),
        Err(e) => Err(Error::Parse(format!("bad rational {t:?}: {e}"))),
    }
}

/// Render as "p" or "p/q"; inverse of `rat_parse`.
pub fn rat_display(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// True iff the rational is an integer.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Least common multiple of the denominators of a rational slice (≥ 1).
pub fn denominator_lcm<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> Int {
    use num_integer::Integer;
    let mut l = Int::one();
    for x in xs {
        l = l.lcm(x.denom());
    }
    l
}

/// Floor of a rational as an integer.
pub fn rat_floor(r: &Rat) -> Int {
    r.floor().to_integer()
}

/// Ceiling of a rational as an integer.
pub fn rat_ceil(r: &Rat) -> Int {
    r.ceil().to_integer()
}

/// Exact square root of a nonnegative rational, if one exists.
pub fn rat_sqrt(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = isqrt(r.numer());
    let d = isqrt(r.denom());
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Exact integer square root of a nonnegative integer (floor).
pub fn isqrt(n: &Int) -> Int {
    assert!(!n.is_negative(), "isqrt of negative");
    n.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_round_trip() {
        for s in ["0", "5", "-3", "1/2", "-11/8", "35/6"] {
            let r = rat_parse(s).unwrap();
            assert_eq!(rat_display(&r), s);
        }
        // normalization
        assert_eq!(rat_display(&rat_parse("4/8").unwrap()), "1/2");
        assert_eq!(rat_display(&rat_parse("3/1").unwrap()), "3");
        assert!(rat_parse("1/0").is_err());
        assert!(rat_parse("x").is_err());
    }

    #[test]
    fn denominator_lcm_over_slice() {
        let xs = [ratio(1, 2), ratio(1, 3), rat(4)];
        assert_eq!(denominator_lcm(xs.iter()), int(6));
        let empty: [Rat; 0] = [];
        assert_eq!(denominator_lcm(empty.iter()), int(1));
    }

    #[test]
    fn isqrt_exact() {
        assert_eq!(isqrt(&int(0)), int(0));
        assert_eq!(isqrt(&int(15)), int(3));
        assert_eq!(isqrt(&int(16)), int(4));
        assert_eq!(isqrt(&int(17)), int(4));
    }

    #[test]
    fn rational_sqrt() {
        assert_eq!(rat_sqrt(&ratio(9, 4)), Some(ratio(3, 2)));
        assert_eq!(rat_sqrt(&rat(1)), Some(rat(1)));
        assert_eq!(rat_sqrt(&rat(0)), Some(rat(0)));
        assert_eq!(rat_sqrt(&rat(2)), None);
        assert_eq!(rat_sqrt(&ratio(4, 3)), None);
        assert_eq!(rat_sqrt(&rat(-4)), None);
    }
}
