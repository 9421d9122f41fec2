//! Projection of an even lattice along a minimal vector.
//!
//! For an even integral lattice L of minimum 4 and a minimal vector e, the
//! sublattice L' of vectors pairing evenly with e projects orthogonally to
//! e into an odd integral lattice of minimum at least 3 in one dimension
//! down. The determinant is preserved when some lattice vector pairs oddly
//! with e (case 1), and divides by 4 when all pairings are even and some
//! pairing is 2 mod 4 (case 2). When every pairing is 0 mod 4 the projection
//! is not integral and the construction is refused.

use num_integer::Integer;

use crate::exact::{int, rat, Int, QMat, Rat};
use crate::lattice::Lattice;
use crate::shells::{minimum, DEFAULT_BUDGET};
use crate::{Error, Result};

/// Outcome of a projection: the lattice one dimension down, which pairing
/// case applied (1 or 2), and det(projected) / det(input).
#[derive(Clone, Debug)]
pub struct VenkovResult {
    pub projected: Lattice,
    pub assumption: u8,
    pub det_ratio: Rat,
}

/// Project `lat` along the minimal vector `e` (frame coordinates).
pub fn venkov_project(lat: &Lattice, e: &[Rat]) -> Result<VenkovResult> {
    let d = lat.dim();
    if d < 2 {
        return Err(Error::Venkov("lattice dimension must be at least 2".into()));
    }
    if !lat.is_even() {
        return Err(Error::Venkov("lattice must be even and integral".into()));
    }
    if e.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: e.len() });
    }
    if !lat.contains(e) {
        return Err(Error::Venkov("vector is not in the lattice".into()));
    }
    if lat.vector_dot(e, e) != rat(4) {
        return Err(Error::Venkov("vector must have norm 4".into()));
    }
    let (min, _) = minimum(lat, DEFAULT_BUDGET)?;
    if min != rat(4) {
        return Err(Error::Venkov(format!("lattice minimum must be 4, found {min}")));
    }

    let basis: Vec<Vec<Rat>> = lat.basis().rows_iter().map(|r| r.to_vec()).collect();
    // Pairings (b_i, e) are integers because the lattice is integral and e
    // is a lattice vector.
    let pairings: Vec<Int> = basis
        .iter()
        .map(|b| lat.vector_dot(b, e).numer().clone())
        .collect();

    let odd_pivot = pairings.iter().position(|p| p.is_odd());
    let (assumption, generators) = match odd_pivot {
        Some(k) => {
            // Case 1: the even-pairing sublattice has index 2. Shift every
            // oddly pairing basis vector by the pivot and double the pivot.
            let mut gens = Vec::with_capacity(d);
            for (i, b) in basis.iter().enumerate() {
                if i == k {
                    continue;
                }
                if pairings[i].is_odd() {
                    gens.push(sub(b, &basis[k]));
                } else {
                    gens.push(b.clone());
                }
            }
            gens.push(scale(&basis[k], 2));
            (1u8, gens)
        }
        None => {
            if !pairings.iter().any(|p| p.mod_floor(&int(4)) == int(2)) {
                return Err(Error::Venkov(
                    "every pairing with the vector is 0 mod 4; the projection is not integral"
                        .into(),
                ));
            }
            // Case 2: every vector already pairs evenly, so L' = L.
            (2u8, basis)
        }
    };

    // Orthogonal projection p(v) = v - ((v,e)/4) e, in frame coordinates.
    let mut projected_rows: Vec<Vec<Rat>> = Vec::with_capacity(generators.len());
    for g in &generators {
        let c = lat.vector_dot(g, e) / rat(4);
        let row: Vec<Rat> = g.iter().zip(e).map(|(gi, ei)| gi - &c * ei).collect();
        if row.iter().any(|x| *x != rat(0)) {
            projected_rows.push(row);
        }
    }

    let q = QMat::from_rows(projected_rows)?;
    let den = q.denominator_lcm();
    let (echelon, rank) = crate::exact::hnf_generators(&q.scaled_integer(&den));
    assert_eq!(rank, d - 1, "projection must drop exactly one dimension");
    let rows: Vec<Vec<Rat>> = (0..rank)
        .map(|i| {
            echelon
                .row(i)
                .iter()
                .map(|x| Rat::new(x.clone(), den.clone()))
                .collect()
        })
        .collect();

    let mut gram = QMat::zero(rank, rank);
    for i in 0..rank {
        for j in 0..=i {
            let v = lat.frame().dot(&rows[i], &rows[j]);
            gram[(i, j)] = v.clone();
            gram[(j, i)] = v;
        }
    }
    let projected = Lattice::from_gram(gram)?;

    assert!(projected.is_integral(), "projected lattice must be integral");
    assert!(!projected.is_even(), "projected lattice must be odd");
    let (pmin, _) = minimum(&projected, DEFAULT_BUDGET)?;
    assert!(pmin >= rat(3), "projected minimum must be at least 3");
    let det_ratio = projected.det() / lat.det();
    let expected = if assumption == 1 { rat(1) } else { Rat::new(int(1), int(4)) };
    assert_eq!(det_ratio, expected, "determinant ratio must match the pairing case");

    Ok(VenkovResult { projected, assumption, det_ratio })
}

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn scale(a: &[Rat], c: i64) -> Vec<Rat> {
    a.iter().map(|x| x * rat(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;
    use crate::shells::theta;

    fn minimal_vector_lambda8() -> Vec<Rat> {
        let mut e = vec![rat(0); 8];
        e[0] = rat(2);
        e
    }

    #[test]
    fn doubled_pairing_case_drops_determinant() {
        let l8 = catalog::build("Lambda8").unwrap();
        let r = venkov_project(&l8, &minimal_vector_lambda8()).unwrap();
        assert_eq!(r.assumption, 2);
        assert_eq!(r.det_ratio, Rat::new(int(1), int(4)));
        assert_eq!(r.projected.dim(), 7);
        assert_eq!(r.projected.det(), &rat(64));
        let (min, kissing) = minimum(&r.projected, DEFAULT_BUDGET).unwrap();
        assert_eq!((min, kissing), (rat(3), 56));
        let t = theta(&r.projected, &rat(4), DEFAULT_BUDGET).unwrap();
        assert_eq!(t.coefficients, vec![(rat(0), 1), (rat(3), 56), (rat(4), 126)]);
        assert_eq!(r.projected, catalog::build("O7").unwrap());
    }

    #[test]
    fn odd_pairing_case_preserves_determinant() {
        // In BW16 the all-halves glue vector pairs oddly with some
        // generators, exercising case 1.
        let bw = catalog::build("BW16").unwrap();
        let f0: Vec<Rat> = (0..16)
            .map(|i| {
                if i == 0 || i == 8 {
                    Rat::new(int(-1), int(2))
                } else {
                    Rat::new(int(1), int(2))
                }
            })
            .collect();
        let r = venkov_project(&bw, &f0).unwrap();
        assert_eq!(r.assumption, 1);
        assert_eq!(r.det_ratio, rat(1));
        assert_eq!(r.projected.dim(), 15);
        assert_eq!(r.projected.det(), &rat(256));
        assert!(r.projected.is_integral());
        assert!(!r.projected.is_even());
    }

    #[test]
    fn rejects_unsuitable_inputs() {
        let z2 = catalog::build("Z2").unwrap();
        assert!(matches!(
            venkov_project(&z2, &[rat(2), rat(0)]),
            Err(Error::Venkov(_))
        ));

        let e8 = catalog::build("E8").unwrap();
        let mut e = vec![rat(0); 8];
        e[0] = rat(2);
        // Norm 4 and contained, but the minimum of E8 is 2, not 4.
        assert!(matches!(venkov_project(&e8, &e), Err(Error::Venkov(_))));

        let l4 = catalog::build("Lambda4").unwrap();
        assert!(matches!(
            venkov_project(&l4, &[rat(2), rat(2), rat(0), rat(0)]),
            Err(Error::Venkov(_))
        ));
        assert!(matches!(
            venkov_project(&l4, &[Rat::new(int(1), int(2)), rat(0), rat(0), rat(0)]),
            Err(Error::Venkov(_))
        ));

        // All pairings 0 mod 4: the projection of 2Z^2 along (2,0) is the
        // non-integral lattice 2Z.
        let doubled = Lattice::from_basis(vec![vec![rat(2), rat(0)], vec![rat(0), rat(2)]]).unwrap();
        assert!(matches!(
            venkov_project(&doubled, &[rat(2), rat(0)]),
            Err(Error::Venkov(_))
        ));
    }
}
