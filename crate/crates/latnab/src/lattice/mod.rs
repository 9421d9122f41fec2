//! Full-rank lattices over the rationals.
//!
//! A lattice is stored as a basis (rows) in the coordinates of an ambient
//! *frame*. The frame is either orthonormal, in which case basis entries are
//! honest Euclidean coordinates, or an explicit symmetric positive-definite
//! form on the coordinate space, which covers lattices given only by a Gram
//! matrix (the basis is then the identity). All derived data (Gram matrix,
//! determinant, canonical Hermite form) is computed once at construction.
//!
//! Equality is structural: same frame, same row span. Two lattices that are
//! abstractly isometric but sit in different frames compare unequal here;
//! that comparison lives in the isometry module.

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::{hnf, hnf_generators};
use crate::exact::{denominator_lcm, form_product, int, rat_sqrt, IMat, Int, QMat, Rat};
use crate::{Error, Result};

pub mod catalog;
pub mod io;

pub use catalog::CatalogName;

/// Coordinate frame of the ambient space.
#[derive(Clone, Debug)]
pub enum Frame {
    /// Standard Euclidean inner product; coordinates are honest lengths.
    Orthonormal,
    /// Explicit symmetric positive-definite form on the coordinate space.
    Form(QMat),
}

impl Frame {
    fn same(&self, other: &Frame) -> bool {
        match (self, other) {
            (Frame::Orthonormal, Frame::Orthonormal) => true,
            (Frame::Form(a), Frame::Form(b)) => a == b,
            _ => false,
        }
    }

    /// Inner product of two coordinate vectors under this frame.
    pub fn dot(&self, x: &[Rat], y: &[Rat]) -> Rat {
        match self {
            Frame::Orthonormal => {
                assert_eq!(x.len(), y.len(), "frame dot dimension mismatch");
                let mut acc = Rat::zero();
                for (a, b) in x.iter().zip(y) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            }
            Frame::Form(f) => form_product(f, x, y),
        }
    }
}

/// A full-rank lattice in a rational quadratic space.
#[derive(Clone, Debug)]
pub struct Lattice {
    basis: QMat,
    frame: Frame,
    gram: QMat,
    det: Rat,
    canon: IMat,
    canon_den: Int,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.frame.same(&other.frame)
            && self.canon_den == other.canon_den
            && self.canon == other.canon
    }
}

impl Eq for Lattice {}

impl Lattice {
    /// Lattice spanned by `rows` in orthonormal coordinates.
    pub fn from_basis(rows: Vec<Vec<Rat>>) -> Result<Lattice> {
        let basis = QMat::from_rows(rows)?;
        Lattice::build(basis, Frame::Orthonormal)
    }

    /// Lattice spanned by `rows` in the coordinates of an explicit form.
    /// An identity form is normalized to the orthonormal frame.
    pub fn from_basis_in_frame(form: QMat, rows: Vec<Vec<Rat>>) -> Result<Lattice> {
        let basis = QMat::from_rows(rows)?;
        Lattice::build(basis, normalize_frame(form)?)
    }

    /// Lattice with prescribed Gram matrix. When the form admits an exact
    /// rational Cholesky factor the lattice is realized by a triangular
    /// basis in orthonormal coordinates; otherwise it is kept frame-form
    /// with the identity basis.
    pub fn from_gram(g: QMat) -> Result<Lattice> {
        if !g.is_square() {
            return Err(Error::NonSquare { rows: g.nrows(), cols: g.ncols() });
        }
        if g.nrows() == 0 {
            return Err(Error::RankDeficient);
        }
        if !g.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let ldl = g.ldl()?;
        if let Some(rows) = cholesky_rows(&ldl) {
            let lat = Lattice::build(QMat::from_rows(rows)?, Frame::Orthonormal)?;
            debug_assert_eq!(lat.gram, g);
            return Ok(lat);
        }
        let n = g.nrows();
        Lattice::build(QMat::identity(n), Frame::Form(g))
    }

    /// Lattice spanned by an arbitrary (possibly redundant) generating set;
    /// fails with `RankDeficient` unless the span is full-dimensional.
    pub fn from_generators(frame: Frame, rows: Vec<Vec<Rat>>) -> Result<Lattice> {
        let gens = QMat::from_rows(rows)?;
        let dim = gens.ncols();
        let den = gens.denominator_lcm();
        let (h, rank) = hnf_generators(&gens.scaled_integer(&den));
        if rank < dim {
            return Err(Error::RankDeficient);
        }
        let den_rat = Rat::from_integer(den);
        let mut basis_rows = Vec::with_capacity(dim);
        for i in 0..dim {
            basis_rows.push(h.row(i).iter().map(|x| Rat::from_integer(x.clone()) / &den_rat).collect());
        }
        Lattice::build(QMat::from_rows(basis_rows)?, normalize_frame_enum(frame)?)
    }

    fn build(basis: QMat, frame: Frame) -> Result<Lattice> {
        if !basis.is_square() {
            return Err(Error::NonSquare { rows: basis.nrows(), cols: basis.ncols() });
        }
        if basis.nrows() == 0 {
            return Err(Error::RankDeficient);
        }
        if let Frame::Form(f) = &frame {
            if f.nrows() != basis.ncols() {
                return Err(Error::DimensionMismatch { expected: basis.ncols(), got: f.nrows() });
            }
        }
        let gram = gram_of(&basis, &frame);
        let det = gram.det()?;
        if !det.is_positive() {
            // A square basis with zero Gram determinant is rank deficient;
            // a negative one means the frame form was not positive definite.
            return Err(if det.is_zero() { Error::RankDeficient } else { Error::NotPositiveDefinite });
        }
        let den = basis.denominator_lcm();
        let (canon, _) = hnf(&basis.scaled_integer(&den))?;
        Ok(Lattice { basis, frame, gram, det, canon, canon_den: den })
    }

    /// Number of basis vectors (= ambient dimension; lattices are full rank).
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Basis rows in frame coordinates.
    pub fn basis(&self) -> &QMat {
        &self.basis
    }

    /// Ambient frame.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Gram matrix of the stored basis.
    pub fn gram(&self) -> &QMat {
        &self.gram
    }

    /// Determinant of the Gram matrix (discriminant of the lattice).
    pub fn det(&self) -> &Rat {
        &self.det
    }

    /// True when the lattice has no orthonormal-coordinate realization and
    /// is represented purely by its frame form.
    pub fn is_gram_only(&self) -> bool {
        !matches!(self.frame, Frame::Orthonormal)
    }

    /// Canonical form: the row-Hermite form of `den`·basis together with the
    /// common denominator `den`. Equal lattices in the same frame have equal
    /// canonical pairs.
    pub fn canonical(&self) -> (&IMat, &Int) {
        (&self.canon, &self.canon_den)
    }

    /// Inner product of two frame-coordinate vectors.
    pub fn vector_dot(&self, x: &[Rat], y: &[Rat]) -> Rat {
        self.frame.dot(x, y)
    }

    /// Squared length of a frame-coordinate vector.
    pub fn vector_norm(&self, x: &[Rat]) -> Rat {
        self.frame.dot(x, x)
    }

    /// Coefficients of `v` over the basis (exact; `v` need not be a lattice
    /// point, its coefficients are then non-integral).
    pub fn coefficients(&self, v: &[Rat]) -> Result<Vec<Rat>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        self.basis.transpose().solve(v)
    }

    /// True iff `v` (frame coordinates) is a lattice point.
    pub fn contains(&self, v: &[Rat]) -> bool {
        match self.coefficients(v) {
            Ok(c) => c.iter().all(|x| x.denom().is_one()),
            Err(_) => false,
        }
    }

    /// True iff all pairwise inner products are integers.
    pub fn is_integral(&self) -> bool {
        self.gram.is_integral()
    }

    /// True iff integral with every vector of even norm.
    pub fn is_even(&self) -> bool {
        self.is_integral() && (0..self.dim()).all(|i| self.gram[(i, i)].numer().is_even())
    }

    /// The dual lattice in the same frame.
    pub fn dual(&self) -> Result<Lattice> {
        let dual_basis = self.gram.inverse()?.mul(&self.basis);
        Lattice::build(dual_basis, self.frame.clone())
    }

    /// Index of `self` in `sup` as sublattice; `NotSublattice` if `self` is
    /// not contained in `sup` or the frames differ.
    pub fn index_in(&self, sup: &Lattice) -> Result<Int> {
        if self.dim() != sup.dim() {
            return Err(Error::DimensionMismatch { expected: sup.dim(), got: self.dim() });
        }
        if !self.frame.same(&sup.frame) {
            return Err(Error::NotSublattice);
        }
        let c = self.basis.mul(&sup.basis.inverse()?);
        if !c.is_integral() {
            return Err(Error::NotSublattice);
        }
        let d = c.scaled_integer(&Int::one()).det()?;
        Ok(d.abs())
    }

    /// Lattice generated by `self` and the given extra frame-coordinate
    /// vectors.
    pub fn adjoin(&self, vectors: &[Vec<Rat>]) -> Result<Lattice> {
        for v in vectors {
            if v.len() != self.dim() {
                return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
            }
        }
        let mut rows: Vec<Vec<Rat>> = self.basis.rows_iter().map(|r| r.to_vec()).collect();
        rows.extend(vectors.iter().cloned());
        Lattice::from_generators(self.frame.clone(), rows)
    }

    /// Index-2 neighbor step: adjoin a vector `v` with `v ∉ L`, `2v ∈ L`, and
    /// require the result to stay integral. The three preconditions are
    /// checked in that order.
    pub fn neighbor(&self, v: &[Rat]) -> Result<Lattice> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        if self.contains(v) {
            return Err(Error::NeighborInLattice);
        }
        let doubled: Vec<Rat> = v.iter().map(|x| x + x).collect();
        if !self.contains(&doubled) {
            return Err(Error::NeighborIndexTooLarge);
        }
        let out = self.adjoin(&[v.to_vec()])?;
        if !out.is_integral() {
            return Err(Error::NeighborNotIntegral);
        }
        debug_assert_eq!(self.index_in(&out).unwrap(), int(2));
        Ok(out)
    }

    /// Rescaled lattice: same point set with the form multiplied by `c > 0`
    /// (all norms scale by `c`).
    pub fn scale_form(&self, c: &Rat) -> Result<Lattice> {
        if !c.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        Lattice::from_gram(self.gram.map(|x| x * c))
    }
}

fn normalize_frame(form: QMat) -> Result<Frame> {
    if !form.is_square() {
        return Err(Error::NonSquare { rows: form.nrows(), cols: form.ncols() });
    }
    if !form.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    // Positive definiteness is the LDL feasibility test; the determinant
    // check in `build` alone would miss indefinite forms of positive
    // determinant.
    form.ldl()?;
    if form == QMat::identity(form.nrows()) {
        Ok(Frame::Orthonormal)
    } else {
        Ok(Frame::Form(form))
    }
}

fn normalize_frame_enum(frame: Frame) -> Result<Frame> {
    match frame {
        Frame::Orthonormal => Ok(Frame::Orthonormal),
        Frame::Form(f) => normalize_frame(f),
    }
}

fn gram_of(basis: &QMat, frame: &Frame) -> QMat {
    match frame {
        Frame::Orthonormal => basis.mul(&basis.transpose()),
        Frame::Form(f) => basis.mul(f).mul(&basis.transpose()),
    }
}

/// Lower-triangular rational square root of a positive-definite form from
/// its LDL data: rows b with b·bᵀ = UᵀDU, provided every pivot is a square.
fn cholesky_rows(ldl: &crate::exact::Ldl) -> Option<Vec<Vec<Rat>>> {
    let n = ldl.q.len();
    let mut s = Vec::with_capacity(n);
    for q in &ldl.q {
        s.push(rat_sqrt(q)?);
    }
    let mut rows = vec![vec![Rat::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            // B = Uᵀ·diag(s): entry (i, j) is u_{j,i}·s_j.
            let u = if i == j { Rat::one() } else { ldl.u[(j, i)].clone() };
            rows[i][j] = u * &s[j];
        }
    }
    Some(rows)
}

/// Common denominator of a frame-coordinate vector.
pub fn vector_denominator(v: &[Rat]) -> Int {
    denominator_lcm(v.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};

    fn qmat(rows: Vec<Vec<i64>>) -> QMat {
        QMat::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(rat).collect()).collect(),
        )
        .unwrap()
    }

    fn rv(v: Vec<i64>) -> Vec<Rat> {
        v.into_iter().map(rat).collect()
    }

    #[test]
    fn gram_and_det_of_plain_basis() {
        let l = Lattice::from_basis(vec![rv(vec![1, 1]), rv(vec![1, -1])]).unwrap();
        assert_eq!(l.gram(), &qmat(vec![vec![2, 0], vec![0, 2]]));
        assert_eq!(l.det(), &rat(4));
        assert!(l.is_even());
        assert!(!l.is_gram_only());
    }

    #[test]
    fn gram_roundtrip_without_rational_cholesky() {
        let g = qmat(vec![vec![2, -1], vec![-1, 2]]);
        let l = Lattice::from_gram(g.clone()).unwrap();
        assert!(l.is_gram_only());
        assert_eq!(l.gram(), &g);
        assert_eq!(l.det(), &rat(3));
    }

    #[test]
    fn gram_with_rational_cholesky_gets_coordinates() {
        // diag(4, 9) factors over the rationals.
        let l = Lattice::from_gram(qmat(vec![vec![4, 0], vec![0, 9]])).unwrap();
        assert!(!l.is_gram_only());
        assert_eq!(l.gram(), &qmat(vec![vec![4, 0], vec![0, 9]]));
    }

    #[test]
    fn equality_is_basis_independent() {
        let a = Lattice::from_basis(vec![rv(vec![1, 0]), rv(vec![0, 1])]).unwrap();
        let b = Lattice::from_basis(vec![rv(vec![3, 1]), rv(vec![2, 1])]).unwrap();
        assert_eq!(a, b);
        let c = Lattice::from_basis(vec![rv(vec![1, 1]), rv(vec![1, -1])]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generators_with_redundancy() {
        let l = Lattice::from_generators(
            Frame::Orthonormal,
            vec![rv(vec![2, 0]), rv(vec![0, 2]), rv(vec![1, 1])],
        )
        .unwrap();
        assert_eq!(l.det(), &rat(4));
        assert!(l.contains(&rv(vec![1, 1])));
        assert!(!l.contains(&rv(vec![1, 0])));
        let err = Lattice::from_generators(Frame::Orthonormal, vec![rv(vec![1, 1])]);
        assert!(matches!(err, Err(Error::RankDeficient)));
    }

    #[test]
    fn dual_of_dual_is_identity() {
        let l = Lattice::from_basis(vec![rv(vec![2, 0]), rv(vec![1, 2])]).unwrap();
        let dd = l.dual().unwrap().dual().unwrap();
        assert_eq!(l, dd);
        // Dual determinant is the reciprocal.
        assert_eq!(l.dual().unwrap().det(), &ratio(1, 16));
    }

    #[test]
    fn dual_in_form_frame() {
        let l = Lattice::from_gram(qmat(vec![vec![2, -1], vec![-1, 2]])).unwrap();
        let d = l.dual().unwrap();
        assert_eq!(d.det(), &ratio(1, 3));
        assert_eq!(l.index_in(&d).unwrap(), int(3));
        assert_eq!(l, d.dual().unwrap());
    }

    #[test]
    fn index_and_sublattice_checks() {
        let z2 = Lattice::from_basis(vec![rv(vec![1, 0]), rv(vec![0, 1])]).unwrap();
        let sub = Lattice::from_basis(vec![rv(vec![2, 0]), rv(vec![1, 3])]).unwrap();
        assert_eq!(sub.index_in(&z2).unwrap(), int(6));
        assert!(matches!(z2.index_in(&sub), Err(Error::NotSublattice)));
    }

    #[test]
    fn neighbor_precondition_order() {
        let z2 = Lattice::from_basis(vec![rv(vec![1, 0]), rv(vec![0, 1])]).unwrap();
        assert!(matches!(z2.neighbor(&rv(vec![1, 0])), Err(Error::NeighborInLattice)));
        assert!(matches!(
            z2.neighbor(&[ratio(1, 3), rat(0)]),
            Err(Error::NeighborIndexTooLarge)
        ));
        assert!(matches!(
            z2.neighbor(&[ratio(1, 2), rat(0)]),
            Err(Error::NeighborNotIntegral)
        ));
        // Adjoining the half-diagonal of the doubled square lattice yields an
        // integral index-2 overlattice.
        let l = Lattice::from_basis(vec![rv(vec![2, 0]), rv(vec![0, 2])]).unwrap();
        let n = l.neighbor(&rv(vec![1, 1])).unwrap();
        assert_eq!(l.index_in(&n).unwrap(), int(2));
        assert_eq!(n.det(), &rat(4));
    }

    #[test]
    fn coefficient_solve_matches_contains() {
        let l = Lattice::from_basis(vec![rv(vec![2, 0]), rv(vec![1, 2])]).unwrap();
        let c = l.coefficients(&rv(vec![3, 2])).unwrap();
        assert_eq!(c, rv(vec![1, 1]));
        assert!(l.contains(&rv(vec![3, 2])));
        let c2 = l.coefficients(&rv(vec![1, 0])).unwrap();
        assert_eq!(c2, vec![ratio(1, 2), rat(0)]);
    }

    #[test]
    fn form_frame_dots() {
        let l = Lattice::from_gram(qmat(vec![vec![2, -1], vec![-1, 2]])).unwrap();
        let x = rv(vec![1, 0]);
        let y = rv(vec![0, 1]);
        assert_eq!(l.vector_dot(&x, &y), rat(-1));
        assert_eq!(l.vector_norm(&rv(vec![1, 1])), rat(2));
    }

    #[test]
    fn scale_form_doubles_norms() {
        let l = Lattice::from_basis(vec![rv(vec![1, 0]), rv(vec![0, 1])]).unwrap();
        let s = l.scale_form(&rat(2)).unwrap();
        assert_eq!(s.det(), &rat(4));
        assert!(s.is_even());
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(matches!(
            Lattice::from_basis(vec![rv(vec![1, 1]), rv(vec![2, 2])]),
            Err(Error::RankDeficient)
        ));
        assert!(matches!(
            Lattice::from_gram(qmat(vec![vec![1, 2], vec![2, 1]])),
            Err(Error::NotPositiveDefinite)
        ));
        assert!(matches!(
            Lattice::from_gram(qmat(vec![vec![1, 2], vec![3, 4]])),
            Err(Error::NotSymmetric)
        ));
    }
}
