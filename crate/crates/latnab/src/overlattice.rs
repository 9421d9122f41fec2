//! Exhaustive census of the integral overlattices of an integral lattice.
//!
//! An integral lattice M containing L sits between L and its dual, so it
//! corresponds to the subgroup H = M/L of the dual quotient. Conversely a
//! subgroup yields an integral lattice exactly when its classes pair
//! integrally; products spread from a generating set to the whole subgroup
//! by bilinearity. The census therefore walks subgroups breadth first,
//! adjoining one compatible class at a time (every subgroup of a finite
//! abelian group is reached this way, since each partial generating set
//! spans a valid intermediate subgroup).
//!
//! Each member is recorded by its sorted class set together with exact
//! invariants: det(M) = det(L) / |H|^2, parity, and vector counts through
//! the fingerprint bound. The counts come from a single classified shell
//! enumeration of the dual: every dual vector is tagged with its class, and
//! a member's theta prefix is the sum over its classes. Members materialize
//! as lattices on demand. Classification groups members by fingerprint,
//! optionally refines rank > 8 groups with short-vector component profiles,
//! and names the groups that match a catalog class.

use std::collections::{HashMap, HashSet, VecDeque};

use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::exact::{rat, rat_display, Rat};
use crate::isometry::{self, Fingerprint, IsometryStatus, Policy, FINGERPRINT_BOUND};
use crate::lattice::{catalog, Lattice};
use crate::quotient::{coset_classes, QuotientMap, DEFAULT_CLASS_BOUND};
use crate::shells;
use crate::{Error, Result};

/// Default enumeration budget for a census. The dominant cost is the
/// classified dual enumeration through the fingerprint bound; the densest
/// catalog case (the rank-16 chain) visits roughly twelve million vectors.
pub const DEFAULT_CENSUS_BUDGET: u64 = 20_000_000;

/// One integral overlattice, stored as the subgroup of dual classes that
/// defines it.
#[derive(Clone, Debug)]
pub struct CensusMember {
    /// Sorted class numbers of H = M/L; always contains class 0.
    pub classes: Vec<u16>,
    /// |H|, the index of the base lattice in the member.
    pub order: u64,
    /// Exact determinant of the member.
    pub determinant: Rat,
    /// Whether the member is an even lattice.
    pub even: bool,
    /// Vector counts at integer norms 0..=FINGERPRINT_BOUND.
    pub theta_counts: Vec<u64>,
}

impl CensusMember {
    /// Sparse (norm, count) prefix in the shape `shells::theta` produces.
    pub fn theta_prefix(&self) -> Vec<(Rat, u64)> {
        self.theta_counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(k, c)| (rat(k as i64), *c))
            .collect()
    }

    /// Invariant fingerprint of the member (no component profile).
    pub fn fingerprint(&self, dim: usize) -> Fingerprint {
        Fingerprint {
            dim,
            determinant: self.determinant.clone(),
            integral: true,
            even: self.even,
            theta: self.theta_prefix(),
            root_profile: None,
            decomposable: None,
        }
    }
}

/// The complete list of integral overlattices of a base lattice.
#[derive(Clone, Debug)]
pub struct OverlatticeCensus {
    pub base: Lattice,
    /// Minimum-norm coset leaders in frame coordinates, indexed by class.
    pub leaders: Vec<Vec<Rat>>,
    /// Every member, the base itself first, in breadth-first order.
    pub members: Vec<CensusMember>,
}

impl OverlatticeCensus {
    pub fn total(&self) -> u64 {
        self.members.len() as u64
    }

    /// Materialize member `i` from the base basis and its class leaders.
    pub fn member_lattice(&self, i: usize) -> Result<Lattice> {
        let m = &self.members[i];
        let mut rows: Vec<Vec<Rat>> = self.base.basis().rows_iter().map(|r| r.to_vec()).collect();
        for &c in &m.classes {
            if c != 0 {
                rows.push(self.leaders[c as usize].clone());
            }
        }
        let lattice = Lattice::from_generators(self.base.frame().clone(), rows)?;
        debug_assert_eq!(lattice.det(), &m.determinant, "subgroup order predicts the determinant");
        debug_assert_eq!(lattice.is_even(), m.even, "class parities predict evenness");
        Ok(lattice)
    }
}

/// Enumerate every integral overlattice of `lat`.
pub fn census(lat: &Lattice, budget: u64) -> Result<OverlatticeCensus> {
    if !lat.is_integral() {
        return Err(Error::NotIntegral);
    }
    let map = QuotientMap::new(lat)?;
    let n = map.checked_order(DEFAULT_CLASS_BOUND)? as usize;
    assert!(n <= 1 << 16, "class numbers fit in u16");
    let classes = coset_classes(lat, DEFAULT_CLASS_BOUND, budget)?;
    let digit_list = map.all_digits(DEFAULT_CLASS_BOUND)?;
    assert_eq!(classes.len(), n);
    assert_eq!(digit_list.len(), n);

    // Pairwise products of classes are well defined modulo the integers, so
    // one leader dot per pair decides integrality. Norms of an integral
    // class are all integers of one parity when the base is even.
    let mut class_integral = vec![false; n];
    let mut class_even = vec![false; n];
    let mut pair_ok = vec![vec![false; n]; n];
    for i in 0..n {
        if !lat.vector_dot(&classes[i].leader, &classes[i].leader).is_integer() {
            continue;
        }
        class_integral[i] = true;
        class_even[i] = classes[i].leader_norm.to_integer().is_even();
        for j in 0..=i {
            if !class_integral[j] {
                continue;
            }
            let ok = lat.vector_dot(&classes[i].leader, &classes[j].leader).is_integer();
            pair_ok[i][j] = ok;
            pair_ok[j][i] = ok;
        }
    }

    // Digit arithmetic tables, indexed like `digit_list`.
    let mut index_of: HashMap<Vec<i64>, u16> = HashMap::with_capacity(n);
    for (i, d) in digit_list.iter().enumerate() {
        index_of.insert(d.clone(), i as u16);
    }
    let mut add = vec![vec![0u16; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s = index_of[&map.add(&digit_list[i], &digit_list[j])];
            add[i][j] = s;
            add[j][i] = s;
        }
    }

    // One classified enumeration of the dual fills a theta table per class.
    let (diag, table) = map.classifier_table(DEFAULT_CLASS_BOUND)?;
    let dim = diag.len();
    let mut strides = vec![1u64; dim];
    for j in 1..dim {
        strides[j] = strides[j - 1] * diag[j - 1] as u64;
    }
    let classify = move |x: &[i64]| -> (u16, u16) {
        let mut idx = 0u64;
        let mut neg = 0u64;
        for j in 0..dim {
            let mut acc = 0i64;
            for (xi, row) in x.iter().zip(&table) {
                acc += xi * row[j];
            }
            let d = acc.rem_euclid(diag[j]);
            idx += d as u64 * strides[j];
            neg += ((diag[j] - d) % diag[j]) as u64 * strides[j];
        }
        (idx as u16, neg as u16)
    };
    let dual = lat.dual()?;
    #[cfg(debug_assertions)]
    for (i, c) in classes.iter().enumerate() {
        let coeffs = dual.coefficients(&c.leader).expect("leaders lie in the dual");
        let a: Vec<i64> = coeffs
            .iter()
            .map(|x| x.to_integer().to_i64().expect("leader coefficients are small"))
            .collect();
        assert_eq!(classify(&a).0 as usize, i, "classifier aligns with class order");
    }
    let counts = shells::classified_theta(&dual, &rat(FINGERPRINT_BOUND), budget, 0, &classify)?;
    let slots = (FINGERPRINT_BOUND + 1) as usize;
    let mut tables = vec![vec![0u64; slots]; n];
    for ((c, norm), count) in counts {
        // Non-integer norms only occur in classes that pair non-integrally,
        // which no member ever contains.
        if norm.is_integer() {
            tables[c as usize][norm.to_integer().to_usize().expect("norm within bound")] += count;
        }
    }

    // Breadth-first subgroup walk from the trivial subgroup.
    let base_even = lat.is_even();
    let det = lat.det().clone();
    let trivial = vec![0u16];
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut queue: VecDeque<Vec<u16>> = VecDeque::new();
    seen.insert(trivial.clone());
    queue.push_back(trivial);
    let mut members = Vec::new();
    while let Some(h) = queue.pop_front() {
        let order = h.len() as u64;
        let mut theta_counts = vec![0u64; slots];
        for &c in &h {
            for (slot, x) in theta_counts.iter_mut().zip(&tables[c as usize]) {
                *slot += x;
            }
        }
        let even = base_even && h.iter().all(|&c| class_even[c as usize]);
        let determinant = &det / rat((order * order) as i64);
        members.push(CensusMember { classes: h.clone(), order, determinant, even, theta_counts });

        for c in 1..n as u16 {
            if !class_integral[c as usize]
                || h.binary_search(&c).is_ok()
                || !h.iter().all(|&m| pair_ok[c as usize][m as usize])
            {
                continue;
            }
            // Close h + <c> under addition; the result pairs integrally by
            // bilinearity.
            let mut bits = vec![false; n];
            for &m in &h {
                bits[m as usize] = true;
            }
            let mut k = c;
            while k != 0 {
                for &m in &h {
                    bits[add[k as usize][m as usize] as usize] = true;
                }
                k = add[k as usize][c as usize];
            }
            let closed: Vec<u16> = (0..n as u16).filter(|&i| bits[i as usize]).collect();
            debug_assert!(closed
                .iter()
                .all(|&a| closed.iter().all(|&b| pair_ok[a as usize][b as usize])));
            if seen.insert(closed.clone()) {
                queue.push_back(closed);
            }
        }
    }

    let leaders = classes.into_iter().map(|c| c.leader).collect();
    Ok(OverlatticeCensus { base: lat.clone(), leaders, members })
}

/// One isometry class of census members.
#[derive(Clone, Debug)]
pub struct CensusBucket {
    /// Catalog name of the class when one matches.
    pub name: Option<String>,
    pub count: u64,
    pub fingerprint: Fingerprint,
    /// Index into `members` of the bucket's representative.
    pub representative: usize,
}

/// Group census members into isometry classes and name the ones the catalog
/// knows.
///
/// Members are bucketed by fingerprint. In rank > 8 a bucket whose
/// fingerprint matches two catalog classes with different component
/// profiles is split by profile (under `Policy::Strict` every rank > 8
/// bucket is). Naming tries catalog entries of the same rank in listing
/// order; in rank <= 8 a name is only assigned after a complete
/// basis-correspondence search certifies the representative, and strict
/// policy additionally certifies every other bucket member against the
/// representative. Two buckets claiming one name would disprove the
/// invariants' separating power, so that aborts loudly.
pub fn classify_census(
    census: &OverlatticeCensus,
    policy: Policy,
    budget: u64,
) -> Result<Vec<CensusBucket>> {
    let dim = census.base.dim();
    let mut buckets: Vec<(Fingerprint, Vec<usize>)> = Vec::new();
    for (i, m) in census.members.iter().enumerate() {
        let f = m.fingerprint(dim);
        match buckets.iter_mut().find(|(g, _)| *g == f) {
            Some((_, v)) => v.push(i),
            None => buckets.push((f, vec![i])),
        }
    }

    let mut candidates: Vec<(String, Lattice, Fingerprint)> = Vec::new();
    for name in catalog::all_names() {
        let built = name.build()?;
        if built.dim() != dim {
            continue;
        }
        let f = if dim > isometry::SEARCH_DIM {
            isometry::fingerprint_with_profile(&built, budget)?
        } else {
            isometry::fingerprint(&built, budget)?
        };
        candidates.push((name.to_string(), built, f));
    }

    if dim > isometry::SEARCH_DIM {
        let mut refined: Vec<(Fingerprint, Vec<usize>)> = Vec::new();
        for (f, idxs) in buckets {
            let mut profiles: Vec<_> = candidates
                .iter()
                .filter(|(_, _, cf)| cf.matches(&f))
                .map(|(_, _, cf)| &cf.root_profile)
                .collect();
            profiles.sort();
            profiles.dedup();
            if policy == Policy::Strict || profiles.len() >= 2 {
                for i in idxs {
                    let mut fi = f.clone();
                    fi.root_profile =
                        Some(isometry::root_profile(&census.member_lattice(i)?, budget)?);
                    match refined.iter_mut().find(|(g, _)| *g == fi) {
                        Some((_, v)) => v.push(i),
                        None => refined.push((fi, vec![i])),
                    }
                }
            } else {
                refined.push((f, idxs));
            }
        }
        buckets = refined;
    }

    let mut names_seen: HashSet<String> = HashSet::new();
    let mut out = Vec::with_capacity(buckets.len());
    for (f, idxs) in buckets {
        let representative = idxs[0];
        let mut name = None;
        if dim > isometry::SEARCH_DIM {
            name = candidates
                .iter()
                .find(|(_, _, cf)| cf.matches(&f))
                .map(|(nm, _, _)| nm.clone());
        } else {
            let rep = census.member_lattice(representative)?;
            for (nm, cand, cf) in &candidates {
                if !cf.matches(&f) {
                    continue;
                }
                let v = isometry::is_isometric(&rep, cand, Policy::Strict, budget)?;
                if v.status == IsometryStatus::Isometric {
                    name = Some(nm.clone());
                    break;
                }
            }
            if policy == Policy::Strict && idxs.len() > 1 {
                let rep = census.member_lattice(representative)?;
                for &i in &idxs[1..] {
                    let v = isometry::is_isometric(
                        &rep,
                        &census.member_lattice(i)?,
                        Policy::Strict,
                        budget,
                    )?;
                    assert_eq!(
                        v.status,
                        IsometryStatus::Isometric,
                        "a fingerprint bucket holds a single class"
                    );
                }
            }
        }
        if let Some(nm) = &name {
            assert!(names_seen.insert(nm.clone()), "two buckets matched catalog name {nm}");
        }
        out.push(CensusBucket { name, count: idxs.len() as u64, fingerprint: f, representative });
    }

    out.sort_by(|a, b| {
        let fa = &a.fingerprint;
        let fb = &b.fingerprint;
        fb.determinant
            .cmp(&fa.determinant)
            .then(fa.even.cmp(&fb.even))
            .then(fa.theta.cmp(&fb.theta))
            .then(fa.root_profile.cmp(&fb.root_profile))
    });
    Ok(out)
}

/// JSON value for a fingerprint.
pub fn fingerprint_json(f: &Fingerprint) -> serde_json::Value {
    serde_json::json!({
        "dim": f.dim,
        "determinant": rat_display(&f.determinant),
        "integral": f.integral,
        "even": f.even,
        "theta": f.theta.iter().map(|(n, c)| serde_json::json!([rat_display(n), c])).collect::<Vec<_>>(),
        "roots": f.root_profile.as_ref().map(|p| {
            p.iter().map(|(r, c)| serde_json::json!([r, c])).collect::<Vec<_>>()
        }),
    })
}

/// JSON report of a classified census.
pub fn census_json(label: &str, census: &OverlatticeCensus, buckets: &[CensusBucket]) -> String {
    let rows: Vec<serde_json::Value> = buckets
        .iter()
        .map(|b| {
            serde_json::json!({
                "name": b.name,
                "count": b.count,
                "fingerprint": fingerprint_json(&b.fingerprint),
            })
        })
        .collect();
    serde_json::json!({
        "base": label,
        "dim": census.base.dim(),
        "determinant": rat_display(census.base.det()),
        "total": census.total(),
        "buckets": rows,
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio, QMat};
    use crate::shells::DEFAULT_BUDGET;

    fn census_of(name: &str) -> OverlatticeCensus {
        census(&catalog::build(name).unwrap(), DEFAULT_CENSUS_BUDGET).unwrap()
    }

    fn brief(buckets: &[CensusBucket]) -> Vec<(Option<&str>, u64)> {
        buckets.iter().map(|b| (b.name.as_deref(), b.count)).collect()
    }

    /// Cross-check the subgroup enumeration against direct lattice arithmetic:
    /// adjoin every pair of integral coset leaders, keep the integral results,
    /// and count distinct index-4 overlattices the slow way.
    #[test]
    fn rank_three_census_matches_direct_adjunction() {
        let lat = catalog::build("Lambda3").unwrap();
        let classes = coset_classes(&lat, DEFAULT_CLASS_BOUND, 1_000_000).unwrap();
        let ints: Vec<usize> = (0..classes.len())
            .filter(|&i| lat.vector_dot(&classes[i].leader, &classes[i].leader).is_integer())
            .collect();
        assert_eq!(ints.len(), 8, "zero class, six of norm 1, one of norm 2");
        let mut found: Vec<Lattice> = Vec::new();
        for &i in &ints {
            for &j in &ints {
                if i == 0 || j == 0 || i == j {
                    continue;
                }
                let m = lat
                    .adjoin(&[classes[i].leader.clone(), classes[j].leader.clone()])
                    .unwrap();
                if m.is_integral() && lat.index_in(&m).unwrap() == int(4) && !found.contains(&m) {
                    found.push(m);
                }
            }
        }
        assert_eq!(found.len(), 3);
        let census = census(&lat, DEFAULT_CENSUS_BUDGET).unwrap();
        let at_index_four = census.members.iter().filter(|m| m.order == 4).count();
        assert_eq!(at_index_four, 3);
    }

    #[test]
    fn small_census_totals() {
        assert_eq!(census_of("Z1").total(), 1);
        assert_eq!(census_of("E8").total(), 1);
        assert_eq!(census_of("Lambda2").total(), 4);
        // 1 + 7 + 3: the product pairing on the 2-torsion of the dual quotient
        // is alternating with a one-dimensional radical, so exactly three
        // index-4 subgroups are isotropic (see the direct adjunction check).
        assert_eq!(census_of("Lambda3").total(), 11);
        assert_eq!(census_of("Lambda4").total(), 38);
        assert_eq!(census_of("Lambda5").total(), 122);
    }

    #[test]
    fn rejects_non_integral_bases() {
        let gram = QMat::from_rows(vec![vec![ratio(1, 2)]]).unwrap();
        let lat = Lattice::from_gram(gram).unwrap();
        assert!(matches!(census(&lat, 1000), Err(Error::NotIntegral)));
    }

    #[test]
    fn members_materialize_consistently() {
        let c = census_of("Lambda4");
        assert_eq!(c.total(), 38);
        for (i, m) in c.members.iter().enumerate() {
            let lat = c.member_lattice(i).unwrap();
            assert!(lat.is_integral());
            assert_eq!(lat.det(), &m.determinant);
            assert_eq!(lat.is_even(), m.even);
            assert_eq!(c.base.index_in(&lat).unwrap(), int(m.order as i64));
            let theta = shells::theta(&lat, &rat(FINGERPRINT_BOUND), DEFAULT_BUDGET).unwrap();
            assert_eq!(theta.coefficients, m.theta_prefix(), "member {i}");
        }
    }

    #[test]
    fn rank_four_classification() {
        let c = census_of("Lambda4");
        let buckets = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(
            brief(&buckets),
            vec![
                (Some("Lambda4"), 1),
                (None, 12),
                (Some("A1pow4"), 3),
                (None, 18),
                (Some("D4"), 1),
                (Some("Z4"), 3),
            ]
        );
    }

    #[test]
    fn strict_policy_verifies_buckets() {
        let c = census_of("Lambda3");
        let fast = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        let strict = classify_census(&c, Policy::Strict, DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(brief(&fast), brief(&strict));
        assert_eq!(brief(&fast), vec![(Some("Lambda3"), 1), (None, 6), (None, 1), (None, 3)]);
    }

    #[test]
    fn laminated_rank_six_census() {
        let c = census_of("Lambda6");
        assert_eq!(c.total(), 514);
        let buckets = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(
            brief(&buckets),
            vec![
                (Some("Lambda6"), 1),
                (None, 36),
                (None, 27),
                (None, 270),
                (None, 45),
                (None, 135),
            ]
        );
    }

    #[test]
    fn rank_seven_census_and_buckets() {
        let c = census_of("Lambda7");
        assert_eq!(c.total(), 2981);
        let buckets = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(
            brief(&buckets),
            vec![
                (Some("Lambda7"), 1),
                (None, 63),
                (Some("O7"), 1),
                (None, 63),
                (None, 63),
                (None, 945),
                (None, 315),
                (None, 315),
                (None, 945),
                (Some("D7"), 135),
                (Some("Z7"), 135),
            ]
        );
    }

    #[test]
    fn rank_eight_census_and_buckets() {
        let c = census_of("Lambda8");
        assert_eq!(c.total(), 19381);
        let buckets = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        assert_eq!(
            brief(&buckets),
            vec![
                (Some("Lambda8"), 1),
                (None, 120),
                (None, 135),
                (None, 3780),
                (Some("D4pow2"), 1575),
                (None, 9450),
                (Some("D8"), 2025),
                (Some("Z8"), 2025),
                (Some("E8"), 270),
            ]
        );
    }

    #[test]
    fn census_json_is_well_formed() {
        let c = census_of("Lambda2");
        let buckets = classify_census(&c, Policy::Fast, DEFAULT_CENSUS_BUDGET).unwrap();
        let v: serde_json::Value = serde_json::from_str(&census_json("Lambda2", &c, &buckets)).unwrap();
        assert_eq!(v["base"], "Lambda2");
        assert_eq!(v["total"], 4);
        assert_eq!(v["buckets"][0]["name"], "Lambda2");
        assert_eq!(v["buckets"][0]["count"], 1);
        assert_eq!(v["buckets"][1]["name"], serde_json::Value::Null);
        assert_eq!(v["buckets"][1]["count"], 3);
        assert_eq!(v["buckets"][1]["fingerprint"]["determinant"], "3");
    }
}
