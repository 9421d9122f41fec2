//! Isometry testing with exact certificates.
//!
//! Isometric lattices carry the same inner products under some bijective
//! linear map; in basis terms there is an integer matrix c with
//! c g1 c^T = g2, and c is unimodular whenever the determinants agree. The
//! verdict pipeline compares invariant fingerprints first (dimension,
//! determinant, parity, a theta prefix, and the component profile of the
//! short-vector graph), then runs a backtracking search for such a c. The
//! search is complete: candidate images of a basis vector range over the
//! full shell of its norm, so an exhausted search proves non-isometry.
//! Every certificate is re-verified exactly before it is returned.
//!
//! Above the search dimension both lattices are first split into orthogonal
//! summands: connected components of the graph on shell vectors (edges
//! between non-orthogonal pairs), collected shell by shell until the
//! vectors generate the lattice. Indecomposable summands match uniquely up
//! to order, so summands of searchable dimension are paired off and the
//! block certificates reassembled; anything larger is reported as
//! indeterminate rather than guessed.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{hnf_generators, int, rat, rat_floor, IMat, Int, QMat, Rat};
use crate::lattice::Lattice;
use crate::shells;
use crate::{Error, Result};

/// Norm bound of the theta prefix stored in fingerprints.
pub const FINGERPRINT_BOUND: i64 = 6;

/// Largest dimension the basis-image backtracking search accepts.
pub const SEARCH_DIM: usize = 8;

const FAST_NODE_CAP: u64 = 1_000_000;
const STRICT_NODE_CAP: u64 = 50_000_000;

/// How hard to work for a positive answer. Both policies prove and refute
/// with the same evidence; `Strict` spends a larger search budget before
/// giving up, and in census classification it additionally verifies bucket
/// members pairwise instead of trusting fingerprints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    Fast,
    Strict,
}

/// Invariants preserved by every isometry. `theta` is the series prefix
/// through norm 6. `root_profile` describes the graph on vectors of norm at
/// most 2 (edges between non-orthogonal pairs) as a sorted list of
/// (component rank, component vector count); it is `None` until requested.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fingerprint {
    pub dim: usize,
    pub determinant: Rat,
    pub integral: bool,
    pub even: bool,
    pub theta: Vec<(Rat, u64)>,
    pub root_profile: Option<Vec<(usize, u64)>>,
    pub decomposable: Option<bool>,
}

impl Fingerprint {
    /// Whether two fingerprints are compatible; optional fields only
    /// distinguish when both sides computed them.
    pub fn matches(&self, other: &Fingerprint) -> bool {
        self.dim == other.dim
            && self.determinant == other.determinant
            && self.integral == other.integral
            && self.even == other.even
            && self.theta == other.theta
            && match (&self.root_profile, &other.root_profile) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
            && match (self.decomposable, other.decomposable) {
                (Some(a), Some(b)) => a == b,
                _ => true,
            }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IsometryStatus {
    Isometric,
    NotIsometric,
    Indeterminate,
}

/// Outcome of an isometry test. `certificate` is a rational matrix c with
/// c g1 c^T = g2 exactly (g1, g2 the Gram matrices of the two inputs in
/// order); `witness` names the first distinguishing invariant or the reason
/// the test stayed indeterminate.
#[derive(Clone, Debug)]
pub struct IsometryVerdict {
    pub status: IsometryStatus,
    pub certificate: Option<QMat>,
    pub witness: Option<String>,
}

impl IsometryVerdict {
    fn not(witness: &str) -> IsometryVerdict {
        IsometryVerdict {
            status: IsometryStatus::NotIsometric,
            certificate: None,
            witness: Some(witness.to_string()),
        }
    }

    fn unknown(witness: &str) -> IsometryVerdict {
        IsometryVerdict {
            status: IsometryStatus::Indeterminate,
            certificate: None,
            witness: Some(witness.to_string()),
        }
    }

    fn found(cert: QMat) -> IsometryVerdict {
        IsometryVerdict { status: IsometryStatus::Isometric, certificate: Some(cert), witness: None }
    }
}

/// Fingerprint without the short-vector profile.
pub fn fingerprint(lat: &Lattice, budget: u64) -> Result<Fingerprint> {
    let theta = shells::theta(lat, &rat(FINGERPRINT_BOUND), budget)?;
    Ok(Fingerprint {
        dim: lat.dim(),
        determinant: lat.det().clone(),
        integral: lat.is_integral(),
        even: lat.is_even(),
        theta: theta.coefficients,
        root_profile: None,
        decomposable: None,
    })
}

/// Fingerprint including the short-vector component profile (integral
/// lattices only).
pub fn fingerprint_with_profile(lat: &Lattice, budget: u64) -> Result<Fingerprint> {
    let mut f = fingerprint(lat, budget)?;
    if f.integral {
        f.root_profile = Some(root_profile(lat, budget)?);
    }
    Ok(f)
}

/// Connected components of the graph on vectors of norm at most 2, as a
/// sorted list of (rank of the component span, number of vectors).
pub fn root_profile(lat: &Lattice, budget: u64) -> Result<Vec<(usize, u64)>> {
    if !lat.is_integral() {
        return Err(Error::NotIntegral);
    }
    let theta = shells::theta(lat, &rat(2), budget)?;
    let mut reps: Vec<Vec<i64>> = Vec::new();
    for (norm, _) in &theta.coefficients {
        if norm.is_zero() {
            continue;
        }
        reps.extend(shells::shell_representatives(lat, norm, budget)?);
    }
    let gram = lat.gram().scaled_integer(&Int::one());
    let mut uf = UnionFind::new(reps.len());
    link_non_orthogonal(&gram, &reps, 0, &mut uf);
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..reps.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut profile = Vec::with_capacity(groups.len());
    for members in groups.values() {
        let rows: Vec<Vec<Int>> = members
            .iter()
            .map(|&i| reps[i].iter().map(|&x| int(x)).collect())
            .collect();
        let (_, rank) = hnf_generators(&IMat::from_rows(rows).expect("rep rows share a length"));
        profile.push((rank, 2 * members.len() as u64));
    }
    profile.sort();
    Ok(profile)
}

/// Orthogonal summands, each as a lattice of its own rank. Component order
/// follows the enumeration order of their first vectors. The parts are
/// always genuinely orthogonal with product index one; they are the finest
/// splitting whenever the generating shells stay below twice the minimum
/// (in particular for every root-generated lattice).
pub fn orthogonal_decomposition(lat: &Lattice, budget: u64) -> Result<Vec<Lattice>> {
    let (bases, _) = decomposition_bases(lat, budget)?;
    bases.iter().map(|b| component_lattice(lat, b)).collect()
}

/// Whether the decomposition walk splits the lattice into two or more
/// orthogonal summands.
pub fn is_decomposable(lat: &Lattice, budget: u64) -> Result<bool> {
    Ok(decomposition_bases(lat, budget)?.0.len() > 1)
}

/// Full isometry test. See the module docs for the pipeline; `budget`
/// bounds every shell enumeration involved (in vectors).
pub fn is_isometric(a: &Lattice, b: &Lattice, policy: Policy, budget: u64) -> Result<IsometryVerdict> {
    if a.dim() != b.dim() {
        return Ok(IsometryVerdict::not("dimensions differ"));
    }
    if a == b {
        // Same point set in the same frame; the change of basis certifies.
        let cert = b.basis().mul(&a.basis().inverse()?);
        return Ok(check_certificate(cert, a, b));
    }
    if a.det() != b.det() {
        return Ok(IsometryVerdict::not("determinants differ"));
    }
    let fa = fingerprint(a, budget)?;
    let fb = fingerprint(b, budget)?;
    if fa.integral != fb.integral || fa.even != fb.even {
        return Ok(IsometryVerdict::not("parity differs"));
    }
    if fa.theta != fb.theta {
        return Ok(IsometryVerdict::not("theta series differ"));
    }
    if fa.integral {
        let pa = root_profile(a, budget)?;
        let pb = root_profile(b, budget)?;
        if pa != pb {
            return Ok(IsometryVerdict::not("short-vector component profiles differ"));
        }
    }
    if a.dim() <= SEARCH_DIM {
        search_verdict(a, b, policy, budget)
    } else {
        summand_verdict(a, b, policy, budget)
    }
}

fn node_cap(policy: Policy) -> u64 {
    match policy {
        Policy::Fast => FAST_NODE_CAP,
        Policy::Strict => STRICT_NODE_CAP,
    }
}

/// Self-check a proposed certificate and wrap it in a verdict; an invalid
/// certificate is an internal error, never returned.
fn check_certificate(cert: QMat, a: &Lattice, b: &Lattice) -> IsometryVerdict {
    let lhs = cert.mul(a.gram()).mul(&cert.transpose());
    assert!(lhs == *b.gram(), "certificate failed exact verification");
    IsometryVerdict::found(cert)
}

fn search_verdict(a: &Lattice, b: &Lattice, policy: Policy, budget: u64) -> Result<IsometryVerdict> {
    let scale = Rat::from_integer(a.gram().denominator_lcm().lcm(&b.gram().denominator_lcm()));
    let ga = a.gram().map(|x| x * &scale);
    let gb = b.gram().map(|x| x * &scale);
    let (ra, gar) = reduced_gram(&ga);
    let (rb, gbr) = reduced_gram(&gb);
    // Search toward the side with the smaller reduced diagonal: its norms
    // give the smaller candidate shells.
    let max_a = (0..ga.nrows()).map(|i| gar[(i, i)].clone()).max().expect("positive dimension");
    let max_b = (0..gb.nrows()).map(|i| gbr[(i, i)].clone()).max().expect("positive dimension");
    let cap = node_cap(policy);
    if max_a <= max_b {
        match basis_image_search(&gbr, &gar, cap, budget)? {
            SearchOutcome::Found(u) => {
                // u gbr u^T = gar, so (ra^-1 u rb) gb (..)^T = ga and the
                // inverse maps ga to gb.
                let w = ra.to_rational().inverse()?.mul(&u.to_rational()).mul(&rb.to_rational());
                Ok(check_certificate(w.inverse()?, a, b))
            }
            SearchOutcome::Exhausted => Ok(IsometryVerdict::not("no basis correspondence exists")),
            SearchOutcome::Capped => Ok(IsometryVerdict::unknown("search node budget exhausted")),
        }
    } else {
        match basis_image_search(&gar, &gbr, cap, budget)? {
            SearchOutcome::Found(u) => {
                let cert = rb.to_rational().inverse()?.mul(&u.to_rational()).mul(&ra.to_rational());
                Ok(check_certificate(cert, a, b))
            }
            SearchOutcome::Exhausted => Ok(IsometryVerdict::not("no basis correspondence exists")),
            SearchOutcome::Capped => Ok(IsometryVerdict::unknown("search node budget exhausted")),
        }
    }
}

enum SearchOutcome {
    Found(IMat),
    Exhausted,
    Capped,
}

/// Complete backtracking search for an integer u with u g1 u^T = g2 on
/// integral Gram matrices. Row i of u ranges over the full shell of norm
/// g2[i][i] in the form g1, rows are assigned in order of increasing shell
/// size, and partial assignments must reproduce the off-diagonal targets.
fn basis_image_search(g1: &QMat, g2: &QMat, cap: u64, budget: u64) -> Result<SearchOutcome> {
    let d = g1.nrows();
    debug_assert!(g1.is_integral() && g2.is_integral());
    let source = Lattice::from_gram(g1.clone())?;
    let Some(g1i) = small_rows(&g1.scaled_integer(&Int::one())) else {
        return Ok(SearchOutcome::Capped);
    };

    // Candidate vectors and their g1-product rows, one list per distinct
    // target norm.
    let mut by_norm: BTreeMap<Rat, (Vec<Vec<i64>>, Vec<Vec<i64>>)> = BTreeMap::new();
    for i in 0..d {
        let norm = g2[(i, i)].clone();
        if by_norm.contains_key(&norm) {
            continue;
        }
        if !norm.is_positive() {
            return Ok(SearchOutcome::Exhausted);
        }
        let reps = shells::shell_representatives(&source, &norm, budget)?;
        let mut cands = Vec::with_capacity(reps.len() * 2);
        for r in reps {
            let neg: Vec<i64> = r.iter().map(|x| -x).collect();
            cands.push(r);
            cands.push(neg);
        }
        let mut products = Vec::with_capacity(cands.len());
        for c in &cands {
            let Some(gw) = gram_times(&g1i, c) else {
                return Ok(SearchOutcome::Capped);
            };
            products.push(gw);
        }
        by_norm.insert(norm, (cands, products));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&i| by_norm[&g2[(i, i)]].0.len());
    let lists: Vec<&(Vec<Vec<i64>>, Vec<Vec<i64>>)> =
        order.iter().map(|&i| &by_norm[&g2[(i, i)]]).collect();
    let mut targets = vec![vec![0i64; d]; d];
    for a in 0..d {
        for b in 0..d {
            let Some(t) = g2[(order[a], order[b])].to_integer().to_i64() else {
                return Ok(SearchOutcome::Capped);
            };
            targets[a][b] = t;
        }
    }

    let mut dfs = Dfs { d, lists: &lists, targets: &targets, chosen: vec![0; d], nodes: 0, cap };
    match dfs.run(0) {
        None => Ok(SearchOutcome::Capped),
        Some(false) => Ok(SearchOutcome::Exhausted),
        Some(true) => {
            let mut rows = vec![Vec::new(); d];
            for (level, &orig) in order.iter().enumerate() {
                rows[orig] =
                    lists[level].0[dfs.chosen[level]].iter().map(|&x| int(x)).collect();
            }
            let u = IMat::from_rows(rows).expect("search rows share the dimension");
            let ur = u.to_rational();
            assert!(
                ur.mul(g1).mul(&ur.transpose()) == *g2,
                "basis-image search produced an invalid assignment"
            );
            assert!(u.det().expect("square").abs() == Int::one(), "image lattice has index one");
            Ok(SearchOutcome::Found(u))
        }
    }
}

struct Dfs<'a> {
    d: usize,
    /// Per level: (candidate rows, their g1-product rows).
    lists: &'a [&'a (Vec<Vec<i64>>, Vec<Vec<i64>>)],
    targets: &'a [Vec<i64>],
    chosen: Vec<usize>,
    nodes: u64,
    cap: u64,
}

impl Dfs<'_> {
    /// Some(true) on success (with `chosen` filled), Some(false) when
    /// exhausted, None when the node cap was hit.
    fn run(&mut self, level: usize) -> Option<bool> {
        if level == self.d {
            return Some(true);
        }
        let cands = &self.lists[level].0;
        'cand: for ci in 0..cands.len() {
            self.nodes += 1;
            if self.nodes > self.cap {
                return None;
            }
            let cand = &cands[ci];
            for prev in 0..level {
                let gw = &self.lists[prev].1[self.chosen[prev]];
                let mut dot: i128 = 0;
                for (x, y) in cand.iter().zip(gw) {
                    dot += *x as i128 * *y as i128;
                }
                if dot != self.targets[level][prev] as i128 {
                    continue 'cand;
                }
            }
            self.chosen[level] = ci;
            match self.run(level + 1) {
                Some(true) => return Some(true),
                Some(false) => {}
                None => return None,
            }
        }
        Some(false)
    }
}

fn small_rows(m: &IMat) -> Option<Vec<Vec<i64>>> {
    let mut out = Vec::with_capacity(m.nrows());
    for row in m.rows_iter() {
        let mut r = Vec::with_capacity(row.len());
        for x in row {
            r.push(x.to_i64()?);
        }
        out.push(r);
    }
    Some(out)
}

/// g * x^T for an integer Gram in machine words; None on overflow.
fn gram_times(g: &[Vec<i64>], x: &[i64]) -> Option<Vec<i64>> {
    let d = x.len();
    let mut out = Vec::with_capacity(d);
    for k in 0..d {
        let mut acc: i128 = 0;
        for (xi, row) in x.iter().zip(g) {
            acc += *xi as i128 * row[k] as i128;
        }
        out.push(i64::try_from(acc).ok()?);
    }
    Some(out)
}

/// Shorten a Gram matrix by integer row operations: repeatedly subtract the
/// nearest-integer multiple of one row from another while its norm strictly
/// decreases, then sort rows by norm. Returns (u, g') with g' = u g u^T and
/// u unimodular. Termination: norms live on a discrete grid and each applied
/// step strictly lowers one of them.
fn reduced_gram(g: &QMat) -> (IMat, QMat) {
    let d = g.nrows();
    let mut u = IMat::identity(d);
    let mut gg = g.clone();
    let half = Rat::new(Int::one(), int(2));
    loop {
        let mut changed = false;
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let k = rat_floor(&(&gg[(i, j)] / &gg[(j, j)] + &half));
                if k.is_zero() {
                    continue;
                }
                let kq = Rat::from_integer(k.clone());
                let new_ii = &gg[(i, i)] - (&kq + &kq) * &gg[(i, j)] + &kq * &kq * &gg[(j, j)];
                if new_ii >= gg[(i, i)] {
                    continue;
                }
                for c in 0..d {
                    let t = &u[(j, c)] * &k;
                    u[(i, c)] -= t;
                }
                for c in 0..d {
                    if c == i {
                        continue;
                    }
                    let t = &kq * &gg[(j, c)];
                    gg[(i, c)] -= t;
                    gg[(c, i)] = gg[(i, c)].clone();
                }
                gg[(i, i)] = new_ii;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| gg[(a, a)].cmp(&gg[(b, b)]));
    let mut up = IMat::zero(d, d);
    let mut gp = QMat::zero(d, d);
    for i in 0..d {
        for c in 0..d {
            up[(i, c)] = u[(order[i], c)].clone();
        }
        for j in 0..d {
            gp[(i, j)] = gg[(order[i], order[j])].clone();
        }
    }
    let check = up.to_rational().mul(g).mul(&up.to_rational().transpose());
    assert!(check == gp, "reduction bookkeeping is exact");
    (up, gp)
}

/// Integer row span in echelon form (strictly increasing leading columns),
/// closed under the unimodular row operations of its `insert`.
pub(crate) struct RowSpan {
    rows: Vec<Vec<Int>>,
}

impl RowSpan {
    pub(crate) fn new() -> RowSpan {
        RowSpan { rows: Vec::new() }
    }

    fn lead(row: &[Int]) -> usize {
        row.iter().position(|x| !x.is_zero()).expect("echelon rows are nonzero")
    }

    /// Fold a vector into the span; the extended gcd at each leading column
    /// keeps the stored rows a basis of the enlarged span.
    pub(crate) fn insert(&mut self, mut v: Vec<Int>) {
        while let Some(c) = v.iter().position(|x| !x.is_zero()) {
            match self.rows.binary_search_by_key(&c, |r| Self::lead(r)) {
                Err(pos) => {
                    self.rows.insert(pos, v);
                    return;
                }
                Ok(pos) => {
                    let eg = self.rows[pos][c].extended_gcd(&v[c]);
                    let a = &self.rows[pos][c] / &eg.gcd;
                    let b = &v[c] / &eg.gcd;
                    let mut newr = Vec::with_capacity(v.len());
                    let mut newv = Vec::with_capacity(v.len());
                    for (r, x) in self.rows[pos].iter().zip(&v) {
                        newr.push(&eg.x * r + &eg.y * x);
                        newv.push(&a * x - &b * r);
                    }
                    self.rows[pos] = newr;
                    v = newv;
                }
            }
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Whether the span is all of Z^d (full rank, unit leading entries).
    fn index_one(&self, d: usize) -> bool {
        self.rows.len() == d
            && self.rows.iter().all(|r| r[Self::lead(r)].abs() == Int::one())
    }
}

/// Integer coefficient bases (rows in lattice-basis coordinates) of
/// mutually orthogonal summands with product index one, plus a flag that is
/// true when the parts are provably the finest splitting. Shells are walked
/// in increasing norm, each vector linked to the earlier non-orthogonal
/// ones, until the collected vectors generate the lattice; the ball of
/// radius max diagonal always suffices, because it contains every basis
/// vector. A vector straddling two summands has norm at least twice the
/// minimum, so when the walk finishes below that bound every collected
/// vector lies in a single summand and the components are exactly the
/// indecomposable parts.
fn decomposition_bases(lat: &Lattice, budget: u64) -> Result<(Vec<IMat>, bool)> {
    let d = lat.dim();
    let bound = (0..d).map(|i| lat.gram()[(i, i)].clone()).max().expect("positive dimension");
    let theta = shells::theta(lat, &bound, budget)?;
    let gram = lat.gram().scaled_integer(&lat.gram().denominator_lcm());
    let g64 = small_rows(&gram);
    let mut reps: Vec<Vec<i64>> = Vec::new();
    let mut uf = UnionFind::new(0);
    let mut span = RowSpan::new();
    let mut minimum: Option<&Rat> = None;
    let mut last_norm: Option<&Rat> = None;
    let mut generated = false;
    'walk: for (norm, _) in &theta.coefficients {
        if norm.is_zero() {
            continue;
        }
        minimum.get_or_insert(norm);
        last_norm = Some(norm);
        for r in shells::shell_representatives(lat, norm, budget)? {
            if 2 * (reps.len() as u64 + 1) > budget {
                return Err(Error::GeneratingBudget { budget });
            }
            let i = reps.len();
            uf.grow_to(i + 1);
            match &g64 {
                Some(g) => {
                    let prod = gram_times(g, &r).expect("short-vector products fit i64");
                    for j in 0..i {
                        let mut dot: i128 = 0;
                        for (x, y) in reps[j].iter().zip(&prod) {
                            dot += *x as i128 * *y as i128;
                        }
                        if dot != 0 {
                            uf.union(i, j);
                        }
                    }
                }
                None => {
                    for j in 0..i {
                        if !big_dot(&gram, &r, &reps[j]).is_zero() {
                            uf.union(i, j);
                        }
                    }
                }
            }
            span.insert(r.iter().map(|&x| int(x)).collect());
            reps.push(r);
            if span.index_one(d) {
                generated = true;
                break 'walk;
            }
        }
    }
    assert!(generated, "the max-diagonal ball contains a generating set");
    let two_min = {
        let m = minimum.expect("a nonzero shell was walked");
        m + m
    };
    let finest = *last_norm.expect("a nonzero shell was walked") < two_min;
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..reps.len() {
        groups.entry(uf.find(i)).or_default().push(i);
    }
    let mut bases = Vec::with_capacity(groups.len());
    let mut total_rank = 0;
    for members in groups.values() {
        let mut comp = RowSpan::new();
        for &i in members {
            comp.insert(reps[i].iter().map(|&x| int(x)).collect());
        }
        total_rank += comp.rank();
        bases.push(IMat::from_rows(comp.rows).expect("echelon rows share the dimension"));
    }
    assert_eq!(total_rank, d, "orthogonal summand ranks add up to the dimension");
    Ok((bases, finest))
}

fn big_dot(gram: &IMat, a: &[i64], b: &[i64]) -> Int {
    let mut dot = Int::zero();
    for (r, xi) in a.iter().enumerate() {
        if *xi == 0 {
            continue;
        }
        for (c, yj) in b.iter().enumerate() {
            if *yj == 0 {
                continue;
            }
            dot += int(*xi) * int(*yj) * &gram[(r, c)];
        }
    }
    dot
}

/// The summand with the given coefficient basis, as a lattice of its rank.
fn component_lattice(lat: &Lattice, basis: &IMat) -> Result<Lattice> {
    let c = basis.to_rational();
    let gram = c.mul(lat.gram()).mul(&c.transpose());
    Lattice::from_gram(gram)
}

/// Isometry via orthogonal summands for dimensions above the search bound.
/// Negative evidence from the summand structure only counts as proof when
/// both decompositions are provably the finest ones.
fn summand_verdict(a: &Lattice, b: &Lattice, policy: Policy, budget: u64) -> Result<IsometryVerdict> {
    let (bases_a, finest_a) = decomposition_bases(a, budget)?;
    let (bases_b, finest_b) = decomposition_bases(b, budget)?;
    let negative = |witness: &str| {
        if finest_a && finest_b {
            IsometryVerdict::not(witness)
        } else {
            IsometryVerdict::unknown("decompositions may be coarser than the finest splitting")
        }
    };
    if bases_a.len() == 1 && bases_b.len() == 1 {
        return Ok(IsometryVerdict::unknown("indecomposable above the search dimension"));
    }
    if bases_a.len() != bases_b.len() {
        return Ok(negative("orthogonal summand counts differ"));
    }
    let comps_a: Vec<Lattice> =
        bases_a.iter().map(|c| component_lattice(a, c)).collect::<Result<_>>()?;
    let comps_b: Vec<Lattice> =
        bases_b.iter().map(|c| component_lattice(b, c)).collect::<Result<_>>()?;
    if comps_a.iter().any(|c| c.dim() > SEARCH_DIM) || comps_b.iter().any(|c| c.dim() > SEARCH_DIM)
    {
        return Ok(IsometryVerdict::unknown("a summand exceeds the search dimension"));
    }

    // Group the summands by fingerprint; indecomposable summands match
    // uniquely up to order, so group sizes must agree on both sides.
    let fp = |l: &Lattice| {
        if l.is_integral() {
            fingerprint_with_profile(l, budget)
        } else {
            fingerprint(l, budget)
        }
    };
    let fps_a: Vec<Fingerprint> = comps_a.iter().map(fp).collect::<Result<_>>()?;
    let fps_b: Vec<Fingerprint> = comps_b.iter().map(fp).collect::<Result<_>>()?;
    let mut groups: Vec<(Fingerprint, Vec<usize>, Vec<usize>)> = Vec::new();
    for (i, f) in fps_a.iter().enumerate() {
        match groups.iter_mut().find(|(g, _, _)| g.matches(f)) {
            Some((_, ia, _)) => ia.push(i),
            None => groups.push((f.clone(), vec![i], Vec::new())),
        }
    }
    for (i, f) in fps_b.iter().enumerate() {
        match groups.iter_mut().find(|(g, _, _)| g.matches(f)) {
            Some((_, _, ib)) => ib.push(i),
            None => return Ok(negative("summand fingerprints differ")),
        }
    }
    if groups.iter().any(|(_, ia, ib)| ia.len() != ib.len()) {
        return Ok(negative("summand fingerprints differ"));
    }

    // Perfect matching within each group, memoizing pair verdicts.
    let mut assignment: Vec<Option<(usize, QMat)>> = vec![None; comps_a.len()];
    let mut saw_indeterminate = false;
    for (_, ia, ib) in &groups {
        let mut verdicts: Vec<Vec<Option<Option<QMat>>>> = vec![vec![None; ib.len()]; ia.len()];
        let mut used = vec![false; ib.len()];
        if !match_group(
            a,
            b,
            &comps_a,
            &comps_b,
            ia,
            ib,
            0,
            &mut used,
            &mut verdicts,
            &mut assignment,
            &mut saw_indeterminate,
            policy,
            budget,
        )? {
            return Ok(if saw_indeterminate {
                IsometryVerdict::unknown("a summand comparison stayed indeterminate")
            } else {
                negative("orthogonal summands do not match")
            });
        }
    }

    // Stack the component bases, block the certificates, and pull the
    // composite back to the original bases.
    let d = a.dim();
    let stack = |bases: &[IMat], order: &[usize]| {
        let mut rows = Vec::with_capacity(d);
        for &i in order {
            for r in 0..bases[i].nrows() {
                rows.push(bases[i].row(r).to_vec());
            }
        }
        IMat::from_rows(rows).expect("stacked rows share the dimension")
    };
    let order_a: Vec<usize> = (0..comps_a.len()).collect();
    let order_b: Vec<usize> = order_a
        .iter()
        .map(|&i| assignment[i].as_ref().expect("matched above").0)
        .collect();
    let ca = stack(&bases_a, &order_a);
    let cb = stack(&bases_b, &order_b);
    let mut t = QMat::zero(d, d);
    let mut at = 0;
    for &i in &order_a {
        let cert = &assignment[i].as_ref().expect("matched above").1;
        let r = cert.nrows();
        for x in 0..r {
            for y in 0..r {
                t[(at + x, at + y)] = cert[(x, y)].clone();
            }
        }
        at += r;
    }
    let cert = cb.to_rational().inverse()?.mul(&t).mul(&ca.to_rational());
    Ok(check_certificate(cert, a, b))
}

#[allow(clippy::too_many_arguments)]
fn match_group(
    a: &Lattice,
    b: &Lattice,
    comps_a: &[Lattice],
    comps_b: &[Lattice],
    ia: &[usize],
    ib: &[usize],
    pos: usize,
    used: &mut [bool],
    verdicts: &mut [Vec<Option<Option<QMat>>>],
    assignment: &mut [Option<(usize, QMat)>],
    saw_indeterminate: &mut bool,
    policy: Policy,
    budget: u64,
) -> Result<bool> {
    if pos == ia.len() {
        return Ok(true);
    }
    for j in 0..ib.len() {
        if used[j] {
            continue;
        }
        if verdicts[pos][j].is_none() {
            let v = is_isometric(&comps_a[ia[pos]], &comps_b[ib[j]], policy, budget)?;
            if v.status == IsometryStatus::Indeterminate {
                *saw_indeterminate = true;
            }
            verdicts[pos][j] = Some(match v.status {
                IsometryStatus::Isometric => v.certificate,
                _ => None,
            });
        }
        let Some(Some(cert)) = verdicts[pos][j].clone() else { continue };
        used[j] = true;
        assignment[ia[pos]] = Some((ib[j], cert));
        if match_group(
            a,
            b,
            comps_a,
            comps_b,
            ia,
            ib,
            pos + 1,
            used,
            verdicts,
            assignment,
            saw_indeterminate,
            policy,
            budget,
        )? {
            return Ok(true);
        }
        used[j] = false;
        assignment[ia[pos]] = None;
    }
    Ok(false)
}

/// Union-find with path halving; roots are the smallest member indices, so
/// component order is deterministic.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn grow_to(&mut self, n: usize) {
        while self.parent.len() < n {
            self.parent.push(self.parent.len());
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Link every non-orthogonal pair (i, j) with i >= start or j >= start.
/// Machine-word fast path with a big-integer fallback when the Gram entries
/// overflow i64.
fn link_non_orthogonal(gram: &IMat, reps: &[Vec<i64>], start: usize, uf: &mut UnionFind) {
    if let Some(g) = small_rows(gram) {
        let products: Vec<Vec<i64>> = reps
            .iter()
            .map(|r| gram_times(&g, r).expect("short-vector products fit machine words"))
            .collect();
        for i in start.max(1)..reps.len() {
            for j in 0..i {
                let mut dot: i128 = 0;
                for (x, y) in reps[j].iter().zip(&products[i]) {
                    dot += *x as i128 * *y as i128;
                }
                if dot != 0 {
                    uf.union(i, j);
                }
            }
        }
    } else {
        for i in start.max(1)..reps.len() {
            for j in 0..i {
                let mut dot = Int::zero();
                for (r, xi) in reps[i].iter().enumerate() {
                    if *xi == 0 {
                        continue;
                    }
                    for (c, yj) in reps[j].iter().enumerate() {
                        if *yj == 0 {
                            continue;
                        }
                        dot += int(*xi) * int(*yj) * &gram[(r, c)];
                    }
                }
                if !dot.is_zero() {
                    uf.union(i, j);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;
    use crate::lattice::catalog;
    use crate::shells::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn verdict(a: &Lattice, b: &Lattice) -> IsometryVerdict {
        is_isometric(a, b, Policy::Strict, DEFAULT_BUDGET).unwrap()
    }

    fn assert_isometric(a: &Lattice, b: &Lattice) {
        let v = verdict(a, b);
        assert_eq!(v.status, IsometryStatus::Isometric, "witness: {:?}", v.witness);
        let c = v.certificate.expect("positive verdicts carry certificates");
        assert!(c.mul(a.gram()).mul(&c.transpose()) == *b.gram());
    }

    #[test]
    fn self_isometry_certificates() {
        for name in ["Z4", "A2", "D4", "Lambda4", "O1"] {
            let lat = catalog::build(name).unwrap();
            assert_isometric(&lat, &lat);
        }
    }

    #[test]
    fn scaled_checkerboard_matches_laminated() {
        let l4 = catalog::build("Lambda4").unwrap();
        let d4 = catalog::build("sqrt2:D4").unwrap();
        assert_isometric(&l4, &d4);
        let l3 = catalog::build("Lambda3").unwrap();
        let a3 = catalog::build("sqrt2:A3").unwrap();
        assert_isometric(&l3, &a3);
    }

    #[test]
    fn invariants_refute_quickly() {
        let z2 = catalog::build("Z2").unwrap();
        let a1s = catalog::build("A1pow2").unwrap();
        let v = verdict(&z2, &a1s);
        assert_eq!(v.status, IsometryStatus::NotIsometric);
        assert_eq!(v.witness.as_deref(), Some("determinants differ"));

        // Equal determinant, different theta: diag(1,1,4) vs diag(1,2,2).
        let g1 = QMat::from_rows(vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(0), rat(1), rat(0)],
            vec![rat(0), rat(0), rat(4)],
        ])
        .unwrap();
        let g2 = QMat::from_rows(vec![
            vec![rat(1), rat(0), rat(0)],
            vec![rat(0), rat(2), rat(0)],
            vec![rat(0), rat(0), rat(2)],
        ])
        .unwrap();
        let v = verdict(&Lattice::from_gram(g1).unwrap(), &Lattice::from_gram(g2).unwrap());
        assert_eq!(v.status, IsometryStatus::NotIsometric);
        assert_eq!(v.witness.as_deref(), Some("theta series differ"));
    }

    #[test]
    fn equal_theta_split_by_root_components() {
        let d16 = catalog::build("D16plus").unwrap();
        let ee = catalog::build("E8perpE8").unwrap();
        let fd = fingerprint(&d16, DEFAULT_BUDGET).unwrap();
        let fe = fingerprint(&ee, DEFAULT_BUDGET).unwrap();
        assert_eq!(fd.theta, fe.theta, "theta prefixes coincide");
        assert_eq!(root_profile(&d16, DEFAULT_BUDGET).unwrap(), vec![(16, 480)]);
        assert_eq!(root_profile(&ee, DEFAULT_BUDGET).unwrap(), vec![(8, 240), (8, 240)]);
        let v = verdict(&d16, &ee);
        assert_eq!(v.status, IsometryStatus::NotIsometric);
        assert_eq!(v.witness.as_deref(), Some("short-vector component profiles differ"));
    }

    #[test]
    fn decomposition_shapes() {
        let dims = |name: &str| -> Vec<usize> {
            let lat = catalog::build(name).unwrap();
            orthogonal_decomposition(&lat, DEFAULT_BUDGET)
                .unwrap()
                .iter()
                .map(|c| c.dim())
                .collect()
        };
        assert_eq!(dims("E8perpE8"), vec![8, 8]);
        assert_eq!(dims("Z4"), vec![1, 1, 1, 1]);
        assert_eq!(dims("A1pow4"), vec![1, 1, 1, 1]);
        assert_eq!(dims("D4"), vec![4]);
        assert_eq!(dims("Lambda4"), vec![4]);
        assert_eq!(dims("BW16"), vec![16]);

        let ee = catalog::build("E8perpE8").unwrap();
        let comps = orthogonal_decomposition(&ee, DEFAULT_BUDGET).unwrap();
        let det: Rat = comps.iter().map(|c| c.det().clone()).product();
        assert_eq!(&det, ee.det(), "summand determinants multiply up");
        assert!(is_decomposable(&ee, DEFAULT_BUDGET).unwrap());
        assert!(!is_decomposable(&catalog::build("D16plus").unwrap(), DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn summand_matching_certifies_large_lattices() {
        // The same lattice in interleaved coordinates: an isometry that is
        // only visible through the summand split.
        let ee = catalog::build("E8perpE8").unwrap();
        let perm: Vec<usize> = (0..16).map(|i| (i % 2) * 8 + i / 2).collect();
        let rows: Vec<Vec<Rat>> = ee
            .basis()
            .rows_iter()
            .map(|r| {
                let mut out = vec![rat(0); 16];
                for (c, x) in r.iter().enumerate() {
                    out[perm[c]] = x.clone();
                }
                out
            })
            .collect();
        let shuffled = Lattice::from_basis(rows).unwrap();
        assert!(shuffled != ee, "interleaving moves the point set");
        assert_isometric(&ee, &shuffled);
    }

    #[test]
    fn signed_permutations_are_found() {
        // Oracle: conjugating by a signed permutation is an isometry, and a
        // brute-force scan over all signed permutations must agree.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let d = rng.gen_range(2..=3usize);
            let basis: Vec<Vec<Rat>> = loop {
                let rows: Vec<Vec<Rat>> = (0..d)
                    .map(|_| (0..d).map(|_| rat(rng.gen_range(-2..=2i64))).collect())
                    .collect();
                if Lattice::from_basis(rows.clone()).is_ok() {
                    break rows;
                }
            };
            let a = Lattice::from_basis(basis).unwrap();
            let mut perm: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let signs: Vec<i64> = (0..d).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            let mut p = QMat::zero(d, d);
            for i in 0..d {
                p[(i, perm[i])] = rat(signs[i]);
            }
            let g2 = p.mul(a.gram()).mul(&p.transpose());
            let b = Lattice::from_gram(g2.clone()).unwrap();
            assert!(signed_permutation_exists(a.gram(), &g2), "oracle sees the conjugation");
            assert_isometric(&a, &b);
        }
    }

    fn signed_permutation_exists(g1: &QMat, g2: &QMat) -> bool {
        let d = g1.nrows();
        let mut perm: Vec<usize> = (0..d).collect();
        loop {
            for mask in 0..(1u32 << d) {
                let mut p = QMat::zero(d, d);
                for (i, &c) in perm.iter().enumerate() {
                    p[(i, c)] = if mask & (1 << i) != 0 { rat(-1) } else { rat(1) };
                }
                if p.mul(g1).mul(&p.transpose()) == *g2 {
                    return true;
                }
            }
            // next permutation in lexicographic order
            let Some(i) = (0..d.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
                return false;
            };
            let j = (i + 1..d).rev().find(|&j| perm[j] > perm[i]).expect("successor exists");
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
    }

    #[test]
    fn fingerprints_carry_parity_and_roots() {
        let o7 = catalog::build("O7").unwrap();
        let f = fingerprint_with_profile(&o7, DEFAULT_BUDGET).unwrap();
        assert!(f.integral && !f.even);
        assert_eq!(f.theta, vec![(rat(0), 1), (rat(3), 56), (rat(4), 126)]);
        assert_eq!(f.root_profile, Some(Vec::new()), "minimum 3 leaves no short vectors");

        let d7 = catalog::build("D7").unwrap();
        assert_eq!(root_profile(&d7, DEFAULT_BUDGET).unwrap(), vec![(7, 84)]);

        let z2 = catalog::build("Z2").unwrap();
        let f = fingerprint(&z2, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.determinant, rat(1));
        assert!(f.root_profile.is_none());
        let with = fingerprint_with_profile(&z2, DEFAULT_BUDGET).unwrap();
        assert_eq!(with.root_profile, Some(vec![(2, 8)]), "norm 1 and 2 vectors interlink");
        assert!(f.matches(&with), "missing profiles never distinguish");
    }

    #[test]
    fn reduction_shrinks_skew_bases() {
        // A badly skewed basis of Z2.
        let rows = vec![vec![rat(1), rat(0)], vec![rat(7), rat(1)]];
        let lat = Lattice::from_basis(rows).unwrap();
        let (u, gr) = reduced_gram(lat.gram());
        assert_eq!(gr[(0, 0)], rat(1));
        assert_eq!(gr[(1, 1)], rat(1));
        assert_eq!(gr[(0, 1)], rat(0));
        assert_eq!(u.det().unwrap().abs(), Int::one());
        let z2 = catalog::build("Z2").unwrap();
        assert_isometric(&lat, &z2);
    }

    #[test]
    fn indeterminate_above_search_dimension() {
        // BW16 is indecomposable and too large for the direct search; the
        // pipeline must admit that honestly for a self comparison of two
        // distinct constructions.
        let bw = catalog::build("BW16").unwrap();
        let alt = catalog::build("BW16alt").unwrap();
        if bw == alt {
            // The two constructions describe the same point set; nothing to
            // test in that case.
            return;
        }
        let v = verdict(&bw, &alt);
        assert_eq!(v.status, IsometryStatus::Indeterminate, "witness: {:?}", v.witness);
    }

    #[test]
    fn near_miss_norms_are_rejected() {
        // ratio() appears here to keep a rational-entry Gram in the mix.
        let g = QMat::from_rows(vec![
            vec![ratio(3, 2), rat(0)],
            vec![rat(0), ratio(3, 2)],
        ])
        .unwrap();
        let a = Lattice::from_gram(g).unwrap();
        let b = catalog::build("A1pow2").unwrap();
        let v = verdict(&a, &b);
        assert_eq!(v.status, IsometryStatus::NotIsometric);
    }
}
