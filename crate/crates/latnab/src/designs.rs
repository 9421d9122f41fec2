//! Spherical design analysis of lattice shells.
//!
//! A shell X of norm m is antipodal and lies on the sphere of radius sqrt(m)
//! inside its own span, of dimension d. The module reports the classical
//! configuration data (d, n, s, t): n = |X|, s = the number of distinct
//! inner products (x, y) over x != y, and t = the design strength, the
//! largest t such that X averages every polynomial of degree <= t exactly
//! over that sphere. Antipodality kills all odd moments, so strength is
//! decided by the even power sums: X has strength >= k for even k exactly
//! when sum_{x,y in X} (x,y)^k = c_k n^2 m^k with
//! c_k = (k-1)!! / (d (d+2) ... (d+k-2)).
//!
//! All arithmetic is exact. Products are computed against a common integer
//! scaling of the form, so every pairwise value is a machine integer and the
//! moment identities are tested as rational equalities.
//!
//! Three evaluation paths share the moment test:
//!   - pairwise: the full product histogram over one representative per
//!     antipodal pair; gives s exactly and decides every k up to the cap.
//!   - tensor power sums: for shells too large to pair, the identity
//!     sum_{x,y} (x,y)^k = sum_{|a| = k} (k!/a!) (sum_x x^a)^2 evaluates the
//!     k-th moment in one streaming pass over X in orthonormal coordinates.
//!   - witness directions: when the tensor pass is out of reach, a strength
//!     claim is attacked via sum_{x in X} (x,y)^k = c_k n (m |y|^2)^{k/2},
//!     which holds for every y in the span of a k-design. A failing witness
//!     refutes; agreeing witnesses leave the level undecided.

use std::collections::BTreeMap;

use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exact::{rat_display, Int, Rat};
use crate::isometry::RowSpan;
use crate::lattice::{Frame, Lattice};
use crate::shells::{self, Shell};
use crate::{Error, Result};

/// Default strength cap: shells of the catalog lattices max out at t = 7,
/// so probing the even levels through 10 (strength 11) leaves headroom
/// without chasing unbounded confirmation.
pub const DEFAULT_T_CAP: u32 = 11;

/// Default size cutoff for the pairwise path, counted in shell vectors.
pub const DEFAULT_PAIRWISE_BUDGET: u64 = 100_000;

/// Step ceiling for one tensor power-sum pass (coefficient multiplications).
const TENSOR_STEP_LIMIT: u128 = 80_000_000_000;

/// Largest scaled norm for which the product histogram stays a dense array.
const DENSE_HIST_LIMIT: i64 = 1_000_000;

/// Design strength of a shell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strength {
    /// Strength exactly t: every level <= t holds and level t + 1 fails.
    Exact(u32),
    /// Every level <= t holds; higher levels were not decided.
    AtLeast(u32),
    /// A single antipodal pair satisfies every level (span dimension 1).
    Unbounded,
}

impl Strength {
    /// True when the strength is known to reach `bound`.
    pub fn at_least(&self, bound: u32) -> bool {
        match self {
            Strength::Exact(t) | Strength::AtLeast(t) => *t >= bound,
            Strength::Unbounded => true,
        }
    }
}

impl std::fmt::Display for Strength {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Strength::Exact(t) => write!(f, "{t}"),
            Strength::AtLeast(t) => write!(f, ">={t}"),
            Strength::Unbounded => write!(f, "unbounded"),
        }
    }
}

/// Number of distinct off-diagonal inner products.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceCount {
    Exact(u64),
    /// The shell was too large for the pairwise pass.
    Exceeded,
}

impl std::fmt::Display for DistanceCount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceCount::Exact(s) => write!(f, "{s}"),
            DistanceCount::Exceeded => write!(f, "exceeded"),
        }
    }
}

/// Evaluation path that produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Pairwise,
    TensorMoment,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Pairwise => "pairwise",
            Method::TensorMoment => "tensor-moment",
        }
    }
}

/// Configuration data (d, n, s, t) of one shell.
#[derive(Clone, Debug)]
pub struct DesignReport {
    /// Shell norm m.
    pub norm: Rat,
    /// Dimension d of the span of the shell.
    pub dim: usize,
    /// Number n of shell vectors.
    pub count: u64,
    /// Number s of distinct inner products over unequal vectors.
    pub distances: DistanceCount,
    /// Design strength t within the span.
    pub strength: Strength,
    /// Evaluation path.
    pub method: Method,
    /// Off-diagonal product values as (raw, normalized by m) pairs in
    /// increasing raw order; present only on the pairwise path.
    pub distance_values: Option<Vec<(Rat, Rat)>>,
}

impl DesignReport {
    pub fn to_json(&self) -> serde_json::Value {
        let s = match self.distances {
            DistanceCount::Exact(s) => serde_json::json!(s),
            DistanceCount::Exceeded => serde_json::json!("exceeded"),
        };
        let t = match self.strength {
            Strength::Exact(t) => serde_json::json!(t),
            Strength::AtLeast(t) => serde_json::json!(format!(">={t}")),
            Strength::Unbounded => serde_json::json!("unbounded"),
        };
        let mut value = serde_json::json!({
            "m": rat_display(&self.norm),
            "d": self.dim,
            "n": self.count,
            "s": s,
            "t": t,
            "method": self.method.as_str(),
        });
        if let Some(pairs) = &self.distance_values {
            let rows: Vec<serde_json::Value> = pairs
                .iter()
                .map(|(raw, normalized)| {
                    serde_json::json!({
                        "raw": rat_display(raw),
                        "normalized": rat_display(normalized),
                    })
                })
                .collect();
            value["distances"] = serde_json::json!(rows);
        }
        value
    }
}

/// Outcome of testing one even moment level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Holds,
    Fails,
    Unknown,
}

/// c_k = (k-1)!! / (d (d+2) ... (d+k-2)) for even k > 0.
fn design_constant(d: usize, k: u32) -> Rat {
    debug_assert!(k > 0 && k % 2 == 0);
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 0..(k / 2) as usize {
        num *= Int::from(2 * i as u64 + 1);
        den *= Int::from((d + 2 * i) as u64);
    }
    Rat::new(num, den)
}

fn int_pow(base: &Int, k: u32) -> Int {
    let mut acc = Int::one();
    for _ in 0..k {
        acc *= base;
    }
    acc
}

fn pow_i128(base: i128, k: u32) -> Option<i128> {
    let mut acc = 1i128;
    for _ in 0..k {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// One representative per antipodal vector pair together with an integer
/// scaling of the bilinear form: `value(i, j) = reps[i] . form . reps[j]`
/// equals `denom` times the true inner product, and every diagonal equals
/// the common scaled norm `mhat`.
struct PointSet {
    reps: Vec<Vec<i64>>,
    /// `images[j] = form . reps[j]`, so a pair value is a plain dot product.
    images: Vec<Vec<i64>>,
    form: Vec<Vec<i64>>,
    denom: Int,
    mhat: i64,
    /// Pair values certified to fit i64 through the fast dot loop.
    fast_dot: bool,
}

fn to_i64(x: &Int, what: &str) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::BadVector(format!("{what} exceeds the machine integer range")))
}

impl PointSet {
    /// Build from coefficient-coordinate representatives against the Gram
    /// matrix of `lat`, scaled integral by the lcm of its denominators.
    fn from_coefficients(lat: &Lattice, reps: Vec<Vec<i64>>) -> Result<PointSet> {
        let scale = lat.gram().denominator_lcm();
        let integral = lat.gram().scaled_integer(&scale);
        let mut form = Vec::with_capacity(integral.nrows());
        for row in integral.rows_iter() {
            let mut out = Vec::with_capacity(row.len());
            for x in row {
                out.push(to_i64(x, "scaled Gram entry")?);
            }
            form.push(out);
        }
        PointSet::assemble(reps, form, scale)
    }

    /// Build from materialized frame-coordinate shell vectors, scaled by the
    /// lcm of their denominators (and the form's own, when one is present).
    fn from_shell(lat: &Lattice, shell: &Shell) -> Result<PointSet> {
        if shell.count == 0 {
            return Err(Error::EmptyShell("the shell holds no vectors".into()));
        }
        if !shell.materialized || shell.vectors.is_empty() {
            return Err(Error::BadVector(
                "design analysis needs a materialized shell".into(),
            ));
        }
        if shell.vectors.len() % 2 != 0 {
            return Err(Error::BadVector("shell is not antipodally paired".into()));
        }
        for pair in shell.vectors.chunks(2) {
            let antipodal = pair[0].iter().zip(&pair[1]).all(|(a, b)| *a == -b.clone());
            if !antipodal {
                return Err(Error::BadVector("shell is not antipodally paired".into()));
            }
        }
        let point_scale = crate::exact::denominator_lcm(shell.vectors.iter().flatten());
        let mut reps = Vec::with_capacity(shell.vectors.len() / 2);
        for pair in shell.vectors.chunks(2) {
            let mut row = Vec::with_capacity(pair[0].len());
            for x in &pair[0] {
                let scaled = x * Rat::from_integer(point_scale.clone());
                debug_assert!(scaled.is_integer());
                row.push(to_i64(&scaled.to_integer(), "scaled shell coordinate")?);
            }
            reps.push(row);
        }
        let ncols = reps.first().map_or(0, Vec::len);
        let (form, form_scale) = match lat.frame() {
            Frame::Orthonormal => {
                let mut id = vec![vec![0i64; ncols]; ncols];
                for (i, row) in id.iter_mut().enumerate() {
                    row[i] = 1;
                }
                (id, Int::one())
            }
            Frame::Form(f) => {
                let scale = f.denominator_lcm();
                let integral = f.scaled_integer(&scale);
                let mut rows = Vec::with_capacity(integral.nrows());
                for row in integral.rows_iter() {
                    let mut out = Vec::with_capacity(row.len());
                    for x in row {
                        out.push(to_i64(x, "scaled form entry")?);
                    }
                    rows.push(out);
                }
                (rows, scale)
            }
        };
        let denom = &point_scale * &point_scale * form_scale;
        PointSet::assemble(reps, form, denom)
    }

    /// Common tail: compute the form images, certify the shared diagonal,
    /// and pick the pair-value arithmetic width.
    fn assemble(reps: Vec<Vec<i64>>, form: Vec<Vec<i64>>, denom: Int) -> Result<PointSet> {
        let mut images = Vec::with_capacity(reps.len());
        for rep in &reps {
            let mut image = Vec::with_capacity(form.len());
            for row in &form {
                let mut acc = 0i128;
                for (a, b) in row.iter().zip(rep) {
                    acc += *a as i128 * *b as i128;
                }
                image.push(
                    i64::try_from(acc).map_err(|_| {
                        Error::BadVector("scaled form image exceeds the machine integer range".into())
                    })?,
                );
            }
            images.push(image);
        }
        let mut mhat = 0i64;
        for (i, (rep, image)) in reps.iter().zip(&images).enumerate() {
            let mut acc = 0i128;
            for (a, b) in rep.iter().zip(image) {
                acc += *a as i128 * *b as i128;
            }
            let norm = i64::try_from(acc).map_err(|_| {
                Error::BadVector("scaled shell norm exceeds the machine integer range".into())
            })?;
            if i == 0 {
                mhat = norm;
            } else if norm != mhat {
                return Err(Error::BadVector(
                    "shell vectors do not share a single norm".into(),
                ));
            }
        }
        let max_rep = reps
            .iter()
            .flatten()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        let max_image = images
            .iter()
            .flatten()
            .map(|x| x.unsigned_abs())
            .max()
            .unwrap_or(0);
        let ncols = reps.first().map_or(0, Vec::len);
        let fast_dot =
            (ncols as u128) * (max_rep as u128) * (max_image as u128) <= (i64::MAX / 2) as u128;
        Ok(PointSet { reps, images, form, denom, mhat, fast_dot })
    }

    fn rep_count(&self) -> usize {
        self.reps.len()
    }

    fn count(&self) -> u64 {
        2 * self.reps.len() as u64
    }

    /// Scaled product of representatives i and j.
    fn pair_value(&self, i: usize, j: usize) -> i64 {
        let (x, w) = (&self.reps[i], &self.images[j]);
        if self.fast_dot {
            let mut acc = 0i64;
            for (a, b) in x.iter().zip(w) {
                acc += a * b;
            }
            acc
        } else {
            let mut acc = 0i128;
            for (a, b) in x.iter().zip(w) {
                acc += *a as i128 * *b as i128;
            }
            i64::try_from(acc).expect("pair value is bounded by the shared norm")
        }
    }

    /// Dimension of the span of the shell (capped by the ambient rank).
    fn span_rank(&self, cap: usize) -> usize {
        let mut span = RowSpan::new();
        for rep in &self.reps {
            span.insert(rep.iter().map(|&x| Int::from(x)).collect());
            if span.rank() == cap {
                return cap;
            }
        }
        span.rank()
    }

    /// Histogram of scaled products over all ordered vector pairs, diagonal
    /// included: each unordered representative pair contributes four ordered
    /// pairs at +v and four at -v, each representative two diagonal pairs at
    /// +mhat and two antipodal pairs at -mhat.
    fn pair_histogram(&self) -> BTreeMap<i64, u64> {
        let r = self.rep_count();
        let n = self.count();
        let mut hist: BTreeMap<i64, u64> = BTreeMap::new();
        if self.mhat <= DENSE_HIST_LIMIT {
            let width = 2 * self.mhat as usize + 1;
            let dense = (0..r)
                .into_par_iter()
                .fold(
                    || vec![0u64; width],
                    |mut h, i| {
                        for j in (i + 1)..r {
                            let v = self.pair_value(i, j);
                            h[(v + self.mhat) as usize] += 4;
                            h[(self.mhat - v) as usize] += 4;
                        }
                        h
                    },
                )
                .reduce(
                    || vec![0u64; width],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(&b) {
                            *x += *y;
                        }
                        a
                    },
                );
            for (offset, count) in dense.into_iter().enumerate() {
                if count != 0 {
                    hist.insert(offset as i64 - self.mhat, count);
                }
            }
        } else {
            for i in 0..r {
                for j in (i + 1)..r {
                    let v = self.pair_value(i, j);
                    *hist.entry(v).or_insert(0) += 4;
                    *hist.entry(-v).or_insert(0) += 4;
                }
            }
        }
        *hist.entry(self.mhat).or_insert(0) += n;
        *hist.entry(-self.mhat).or_insert(0) += n;
        for (&v, &count) in &hist {
            assert_eq!(
                hist.get(&-v),
                Some(&count),
                "antipodal shell must yield a symmetric product histogram"
            );
        }
        hist
    }

    /// Attack level k with a handful of span directions y: any y violating
    /// sum_x (x,y)^k = c_k n (m |y|^2)^{k/2} refutes strength k. Returns
    /// true when some witness refutes.
    fn witness_refutes(&self, d: usize, k: u32) -> bool {
        let r0 = &self.reps[0];
        let mut directions: Vec<Vec<i64>> = vec![r0.clone()];
        if self.rep_count() > 1 {
            let r1 = &self.reps[1];
            let combine = |a: i64, b: i64| -> Vec<i64> {
                r0.iter().zip(r1).map(|(x, y)| a * x + b * y).collect()
            };
            directions.push(r1.clone());
            directions.push(combine(1, 1));
            directions.push(combine(1, -1));
            directions.push(combine(1, 2));
            directions.push(combine(3, -2));
        }
        let ck = design_constant(d, k);
        for y in &directions {
            let mut image = Vec::with_capacity(self.form.len());
            let mut fits = true;
            for row in &self.form {
                let mut acc = 0i128;
                for (a, b) in row.iter().zip(y) {
                    acc += *a as i128 * *b as i128;
                }
                match i64::try_from(acc) {
                    Ok(v) => image.push(v),
                    Err(_) => {
                        fits = false;
                        break;
                    }
                }
            }
            if !fits {
                continue;
            }
            let yfy: i128 = y.iter().zip(&image).map(|(a, b)| *a as i128 * *b as i128).sum();
            let mut total = Int::zero();
            let mut chunk = 0i128;
            for x in &self.reps {
                let mut v = 0i128;
                for (a, b) in x.iter().zip(&image) {
                    v += *a as i128 * *b as i128;
                }
                match pow_i128(v, k).and_then(|p| chunk.checked_add(p)) {
                    Some(next) => chunk = next,
                    None => {
                        total += Int::from(chunk);
                        chunk = 0;
                        total += int_pow(&Int::from(v), k);
                    }
                }
            }
            total += Int::from(chunk);
            total *= Int::from(2u64);
            let base = Int::from(self.mhat) * Int::from(yfy);
            let rhs = ck.clone()
                * Rat::from_integer(Int::from(self.count()))
                * Rat::from_integer(int_pow(&base, k / 2));
            if Rat::from_integer(total) != rhs {
                return true;
            }
        }
        false
    }
}

/// Shell points in scaled orthonormal ambient coordinates, column-major,
/// for the tensor power-sum pass.
struct AmbientPoints {
    /// `cols[c][i]` is coordinate c of representative i.
    cols: Vec<Vec<i64>>,
    reps: usize,
    /// Scaled common norm: every point satisfies x . x = mhat.
    mhat: i64,
    max_coord: u64,
}

impl AmbientPoints {
    /// Lift coefficient representatives to integer ambient coordinates.
    /// Returns None when the frame is not orthonormal or entries overflow.
    fn build(lat: &Lattice, ps: &PointSet) -> Option<AmbientPoints> {
        if !matches!(lat.frame(), Frame::Orthonormal) {
            return None;
        }
        let scale = lat.basis().denominator_lcm();
        let integral = lat.basis().scaled_integer(&scale);
        let mut basis = Vec::with_capacity(integral.nrows());
        for row in integral.rows_iter() {
            let mut out = Vec::with_capacity(row.len());
            for x in row {
                out.push(x.to_i64()?);
            }
            basis.push(out);
        }
        let ncols = basis.first().map_or(0, Vec::len);
        let mut cols = vec![vec![0i64; ps.rep_count()]; ncols];
        let mut mhat = 0i64;
        for (i, rep) in ps.reps.iter().enumerate() {
            let mut norm = 0i128;
            for c in 0..ncols {
                let mut acc = 0i128;
                for (x, row) in rep.iter().zip(&basis) {
                    acc += *x as i128 * row[c] as i128;
                }
                let entry = i64::try_from(acc).ok()?;
                cols[c][i] = entry;
                norm += acc * acc;
            }
            let norm = i64::try_from(norm).ok()?;
            if i == 0 {
                mhat = norm;
            } else {
                assert_eq!(norm, mhat, "ambient lift must preserve the shared norm");
            }
        }
        let max_coord = cols.iter().flatten().map(|x| x.unsigned_abs()).max().unwrap_or(0);
        Some(AmbientPoints { cols, reps: ps.rep_count(), mhat, max_coord })
    }

    /// The pass walks every monomial prefix of degree <= k over the
    /// coordinates, multiplying one per-point partial-product buffer per
    /// level, so its cost is (C(ncols + k + 1, k + 1) - 1) * reps
    /// coefficient multiplications.
    fn steps(&self, k: u32) -> u128 {
        let n = self.cols.len() as u64 + k as u64 + 1;
        let mut binom = 1u128;
        for i in 0..(k as u64 + 1) {
            binom = binom * (n - i) as u128 / (i + 1) as u128;
        }
        (binom - 1) * self.reps as u128
    }

    fn feasible(&self, k: u32) -> bool {
        let partial_bound = (self.max_coord as u128).checked_pow(k);
        matches!(partial_bound, Some(b) if b <= i64::MAX as u128)
            && self.steps(k) <= TENSOR_STEP_LIMIT
    }

    /// Exact k-th moment sum over all ordered vector pairs of the full
    /// shell: sum_{|a| = k} (k!/a!) (2 M_a)^2 with M_a the monomial power
    /// sum over the representatives.
    fn moment_sum(&self, k: u32) -> Int {
        let ncols = self.cols.len();
        let mut buffers: Vec<Vec<i64>> = vec![vec![0i64; self.reps]; ncols + 1];
        buffers[0].fill(1);
        let mut acc = Int::zero();
        self.walk(0, k, 1, &mut buffers, &mut acc);
        acc
    }

    fn walk(&self, level: usize, rem: u32, weight: u64, buffers: &mut [Vec<i64>], acc: &mut Int) {
        if level == self.cols.len() {
            if rem == 0 {
                let m: i128 = buffers[level].iter().map(|&x| x as i128).sum();
                if m != 0 {
                    let m = Int::from(m);
                    *acc += Int::from(4 * weight) * &m * &m;
                }
            }
            return;
        }
        {
            let (head, tail) = buffers.split_at_mut(level + 1);
            tail[0].copy_from_slice(&head[level]);
        }
        self.walk(level + 1, rem, weight, buffers, acc);
        let mut w = weight;
        let col = &self.cols[level];
        for e in 1..=rem {
            let mut any = false;
            {
                let dst = &mut buffers[level + 1];
                for (partial, x) in dst.iter_mut().zip(col) {
                    *partial *= x;
                    any |= *partial != 0;
                }
            }
            // Zero partials stay zero for every larger exponent.
            if !any {
                return;
            }
            // Running binomial keeps w = weight * C(rem, e), the multinomial
            // factor accumulated along the exponent path.
            w = w * (rem - e + 1) as u64 / e as u64;
            self.walk(level + 1, rem - e, w, buffers, acc);
        }
    }
}

/// Moment test at level k from an exact pair histogram.
fn histogram_level(hist: &BTreeMap<i64, u64>, n: u64, mhat: i64, d: usize, k: u32) -> Verdict {
    let mut sum = Int::zero();
    for (&v, &count) in hist {
        sum += Int::from(count) * int_pow(&Int::from(v), k);
    }
    let rhs = design_constant(d, k)
        * Rat::from_integer(Int::from(n) * Int::from(n))
        * Rat::from_integer(int_pow(&Int::from(mhat), k));
    if Rat::from_integer(sum) == rhs {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// Climb even levels k = 2, 4, ... up to the cap.
fn run_ladder(t_cap: u32, mut check: impl FnMut(u32) -> Verdict) -> Strength {
    let mut k = 2;
    while k <= t_cap {
        match check(k) {
            Verdict::Holds => k += 2,
            Verdict::Fails => return Strength::Exact(k - 1),
            Verdict::Unknown => return Strength::AtLeast(k - 1),
        }
    }
    Strength::AtLeast(t_cap)
}

/// Report for a single antipodal pair: a 0-sphere averages every
/// polynomial, so the strength is unbounded.
fn antipodal_report(norm: &Rat, ps: &PointSet) -> DesignReport {
    assert_eq!(ps.rep_count(), 1, "a rank-1 shell is a single antipodal pair");
    let raw = -norm.clone();
    DesignReport {
        norm: norm.clone(),
        dim: 1,
        count: 2,
        distances: DistanceCount::Exact(1),
        strength: Strength::Unbounded,
        method: Method::Pairwise,
        distance_values: Some(vec![(raw, -Rat::one())]),
    }
}

fn pairwise_report(norm: &Rat, ps: &PointSet, d: usize, t_cap: u32) -> DesignReport {
    let hist = ps.pair_histogram();
    let n = ps.count();
    let mut values = Vec::new();
    for &v in hist.keys() {
        if v != ps.mhat {
            let raw = Rat::new(Int::from(v), ps.denom.clone());
            let normalized = Rat::new(Int::from(v), Int::from(ps.mhat));
            values.push((raw, normalized));
        }
    }
    let strength = run_ladder(t_cap, |k| histogram_level(&hist, n, ps.mhat, d, k));
    DesignReport {
        norm: norm.clone(),
        dim: d,
        count: n,
        distances: DistanceCount::Exact(values.len() as u64),
        strength,
        method: Method::Pairwise,
        distance_values: Some(values),
    }
}

fn tensor_report(lat: &Lattice, norm: &Rat, ps: &PointSet, d: usize, t_cap: u32) -> DesignReport {
    let ambient = AmbientPoints::build(lat, ps);
    let n = ps.count();
    let strength = run_ladder(t_cap, |k| {
        if let Some(amb) = ambient.as_ref().filter(|a| a.feasible(k)) {
            let sum = amb.moment_sum(k);
            let rhs = design_constant(d, k)
                * Rat::from_integer(Int::from(n) * Int::from(n))
                * Rat::from_integer(int_pow(&Int::from(amb.mhat), k));
            if Rat::from_integer(sum) == rhs {
                Verdict::Holds
            } else {
                Verdict::Fails
            }
        } else if ps.witness_refutes(d, k) {
            Verdict::Fails
        } else {
            Verdict::Unknown
        }
    });
    DesignReport {
        norm: norm.clone(),
        dim: d,
        count: n,
        distances: DistanceCount::Exceeded,
        strength,
        method: Method::TensorMoment,
        distance_values: None,
    }
}

/// Full configuration report for the shell of `lat` at norm `norm`.
///
/// The pairwise path runs when the shell has at most `budget` vectors;
/// larger shells stream through the tensor pass (with witness refutation
/// beyond its reach), reporting the distance count as exceeded. Vector
/// enumeration itself is allowed `budget` vectors, or the default shell
/// budget if that is larger.
pub fn configuration(lat: &Lattice, norm: &Rat, t_cap: u32, budget: u64) -> Result<DesignReport> {
    let reps = shells::shell_representatives(lat, norm, budget.max(shells::DEFAULT_BUDGET))?;
    if reps.is_empty() {
        return Err(Error::EmptyShell(format!(
            "lattice has no vectors of norm {}",
            rat_display(norm)
        )));
    }
    let ps = PointSet::from_coefficients(lat, reps)?;
    let d = ps.span_rank(lat.dim());
    if d == 1 {
        return Ok(antipodal_report(norm, &ps));
    }
    if ps.count() <= budget {
        Ok(pairwise_report(norm, &ps, d, t_cap))
    } else {
        Ok(tensor_report(lat, norm, &ps, d, t_cap))
    }
}

/// Dimension of the span of a materialized shell.
pub fn span_dimension(lat: &Lattice, shell: &Shell) -> Result<usize> {
    let ps = PointSet::from_shell(lat, shell)?;
    Ok(ps.span_rank(lat.dim()))
}

/// Sorted normalized inner products (x, y)/m over unequal shell vectors.
pub fn distance_set(lat: &Lattice, shell: &Shell) -> Result<Vec<Rat>> {
    let ps = PointSet::from_shell(lat, shell)?;
    if ps.count() > DEFAULT_PAIRWISE_BUDGET {
        return Err(Error::PairwiseBudget { n: ps.count(), budget: DEFAULT_PAIRWISE_BUDGET });
    }
    let hist = ps.pair_histogram();
    Ok(hist
        .keys()
        .filter(|&&v| v != ps.mhat)
        .map(|&v| Rat::new(Int::from(v), Int::from(ps.mhat)))
        .collect())
}

/// Design strength of a materialized shell, probed up to `t_cap`.
pub fn design_strength(lat: &Lattice, shell: &Shell, t_cap: u32) -> Result<Strength> {
    let ps = PointSet::from_shell(lat, shell)?;
    let d = ps.span_rank(lat.dim());
    if d == 1 {
        return Ok(Strength::Unbounded);
    }
    if ps.count() > DEFAULT_PAIRWISE_BUDGET {
        return Err(Error::PairwiseBudget { n: ps.count(), budget: DEFAULT_PAIRWISE_BUDGET });
    }
    let hist = ps.pair_histogram();
    Ok(run_ladder(t_cap, |k| histogram_level(&hist, ps.count(), ps.mhat, d, k)))
}

/// True when the minimal shell is a spherical 4-design.
pub fn is_strongly_perfect(lat: &Lattice, budget: u64) -> Result<bool> {
    let (min, _) = shells::minimum(lat, budget)?;
    let report = configuration(lat, &min, 4, budget.max(DEFAULT_PAIRWISE_BUDGET))?;
    Ok(report.strength.at_least(4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio};
    use crate::lattice::catalog;
    use crate::shells::DEFAULT_BUDGET;

    fn report_of(name: &str, norm: i64) -> DesignReport {
        let lat = catalog::build(name).unwrap();
        configuration(&lat, &rat(norm), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET).unwrap()
    }

    fn brief(report: &DesignReport) -> (usize, u64, DistanceCount, Strength) {
        (report.dim, report.count, report.distances, report.strength)
    }

    #[test]
    fn orthoplex_minimal_shell_is_a_strong_design() {
        let report = report_of("O7", 3);
        assert_eq!(
            brief(&report),
            (7, 56, DistanceCount::Exact(3), Strength::Exact(5))
        );
        assert_eq!(report.method, Method::Pairwise);
    }

    #[test]
    fn integer_lattice_norm_three_shell() {
        let report = report_of("Z7", 3);
        assert_eq!(
            brief(&report),
            (7, 280, DistanceCount::Exact(6), Strength::Exact(5))
        );
    }

    #[test]
    fn dim_sixteen_small_shell() {
        let report = report_of("O16", 3);
        assert_eq!(
            brief(&report),
            (16, 512, DistanceCount::Exact(4), Strength::Exact(5))
        );
    }

    #[test]
    fn strength_ladder_on_root_lattices() {
        assert_eq!(
            brief(&report_of("Lambda8", 4)),
            (8, 240, DistanceCount::Exact(4), Strength::Exact(7))
        );
        assert_eq!(
            brief(&report_of("Lambda4", 4)),
            (4, 24, DistanceCount::Exact(4), Strength::Exact(5))
        );
        assert_eq!(
            brief(&report_of("Lambda5", 4)),
            (5, 40, DistanceCount::Exact(4), Strength::Exact(3))
        );
        assert_eq!(
            brief(&report_of("D4", 2)),
            (4, 24, DistanceCount::Exact(4), Strength::Exact(5))
        );
        assert_eq!(
            brief(&report_of("Z4", 1)),
            (4, 8, DistanceCount::Exact(2), Strength::Exact(3))
        );
    }

    #[test]
    fn span_can_be_smaller_than_the_ambient_dimension() {
        // Adjoining half of e1 + e3 to the rank-5 laminated lattice creates
        // norm-2 vectors spanning only a 4-dimensional subspace.
        let base = catalog::build("Lambda5").unwrap();
        let half = ratio(1, 2);
        let v = vec![half.clone(), rat(0), half, rat(0), rat(0)];
        let lat = base.adjoin(&[v]).unwrap();
        let report =
            configuration(&lat, &rat(2), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET).unwrap();
        assert_eq!(
            brief(&report),
            (4, 8, DistanceCount::Exact(2), Strength::Exact(3))
        );
    }

    #[test]
    fn antipodal_pair_reports_unbounded_strength() {
        let report = report_of("Z1", 1);
        assert_eq!(report.dim, 1);
        assert_eq!(report.count, 2);
        assert_eq!(report.distances, DistanceCount::Exact(1));
        assert_eq!(report.strength, Strength::Unbounded);
        assert_eq!(
            report.distance_values,
            Some(vec![(rat(-1), rat(-1))])
        );
    }

    #[test]
    fn distance_values_match_known_shells() {
        let report = report_of("BW16", 4);
        assert_eq!(report.distances, DistanceCount::Exact(6));
        let normalized: Vec<Rat> =
            report.distance_values.unwrap().into_iter().map(|(_, n)| n).collect();
        assert_eq!(
            normalized,
            vec![rat(-1), ratio(-1, 2), ratio(-1, 4), rat(0), ratio(1, 4), ratio(1, 2)]
        );
        let report = report_of("Lambda2", 4);
        assert_eq!(report.distances, DistanceCount::Exact(3));
        let raw: Vec<Rat> =
            report.distance_values.unwrap().into_iter().map(|(r, _)| r).collect();
        assert_eq!(raw, vec![rat(-4), rat(-2), rat(2)]);
    }

    #[test]
    fn shell_operations_agree_with_configuration() {
        let lat = catalog::build("Lambda4").unwrap();
        let shell = shells::shell(&lat, &rat(4), DEFAULT_BUDGET, true).unwrap();
        assert_eq!(span_dimension(&lat, &shell).unwrap(), 4);
        assert_eq!(
            distance_set(&lat, &shell).unwrap(),
            vec![rat(-1), ratio(-1, 2), rat(0), ratio(1, 2)]
        );
        assert_eq!(design_strength(&lat, &shell, 11).unwrap(), Strength::Exact(5));
        // A form-frame lattice exercises the scaled-form path.
        let gram_only = catalog::build("Lambda6").unwrap();
        let shell = shells::shell(&gram_only, &rat(4), DEFAULT_BUDGET, true).unwrap();
        assert_eq!(span_dimension(&gram_only, &shell).unwrap(), 6);
        assert_eq!(design_strength(&gram_only, &shell, 11).unwrap(), Strength::Exact(5));
    }

    #[test]
    fn tensor_path_agrees_with_pairwise() {
        let lat = catalog::build("Lambda4").unwrap();
        let pairwise =
            configuration(&lat, &rat(4), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET).unwrap();
        // A budget of 1 pushes the same shell through the tensor pass.
        let tensor = configuration(&lat, &rat(4), DEFAULT_T_CAP, 1).unwrap();
        assert_eq!(tensor.method, Method::TensorMoment);
        assert_eq!(tensor.distances, DistanceCount::Exceeded);
        assert_eq!(tensor.distance_values, None);
        assert_eq!(tensor.strength, pairwise.strength);
        assert_eq!(tensor.dim, pairwise.dim);
        assert_eq!(tensor.count, pairwise.count);
    }

    #[test]
    fn rotation_invariance_under_signed_permutation() {
        let base = catalog::build("Lambda4").unwrap();
        let rows: Vec<Vec<Rat>> = base
            .basis()
            .rows_iter()
            .map(|row| {
                // (x1, x2, x3, x4) -> (x3, -x1, x4, -x2) preserves the form.
                vec![row[2].clone(), -row[0].clone(), row[3].clone(), -row[1].clone()]
            })
            .collect();
        let rotated = crate::lattice::Lattice::from_basis(rows).unwrap();
        let a = configuration(&base, &rat(4), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET).unwrap();
        let b = configuration(&rotated, &rat(4), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET).unwrap();
        assert_eq!(brief(&a), brief(&b));
        assert_eq!(a.distance_values, b.distance_values);
    }

    #[test]
    fn strong_perfection_of_catalog_lattices() {
        let check = |name: &str| {
            is_strongly_perfect(&catalog::build(name).unwrap(), DEFAULT_BUDGET).unwrap()
        };
        assert!(check("O7"));
        assert!(!check("Lambda5"));
        assert!(!check("Z2"));
        assert!(check("E8"));
    }

    #[test]
    fn empty_and_missing_shells_are_rejected() {
        let lat = catalog::build("Lambda4").unwrap();
        assert!(matches!(
            configuration(&lat, &rat(3), DEFAULT_T_CAP, DEFAULT_PAIRWISE_BUDGET),
            Err(Error::EmptyShell(_))
        ));
        let unmaterialized = shells::shell(&lat, &rat(4), DEFAULT_BUDGET, false).unwrap();
        assert!(matches!(
            span_dimension(&lat, &unmaterialized),
            Err(Error::BadVector(_))
        ));
    }

    #[test]
    fn report_json_shape() {
        let report = report_of("Lambda2", 4);
        let value = report.to_json();
        assert_eq!(value["m"], "4");
        assert_eq!(value["d"], 2);
        assert_eq!(value["n"], 6);
        assert_eq!(value["s"], 3);
        assert_eq!(value["t"], 5);
        assert_eq!(value["method"], "pairwise");
        assert_eq!(value["distances"][0]["raw"], "-4");
        assert_eq!(value["distances"][0]["normalized"], "-1");
        let lat = catalog::build("Lambda4").unwrap();
        let tensor = configuration(&lat, &rat(4), DEFAULT_T_CAP, 1).unwrap();
        let value = tensor.to_json();
        assert_eq!(value["s"], "exceeded");
        assert_eq!(value["t"], 5);
        assert_eq!(value["method"], "tensor-moment");
        assert!(value.get("distances").is_none());
    }

    #[test]
    fn design_constants_are_the_sphere_moments() {
        assert_eq!(design_constant(3, 2), ratio(1, 3));
        assert_eq!(design_constant(3, 4), ratio(1, 5));
        assert_eq!(design_constant(8, 2), ratio(1, 8));
        assert_eq!(design_constant(8, 4), ratio(3, 80));
        assert_eq!(design_constant(8, 6), ratio(15, 960));
        assert_eq!(design_constant(2, 2), ratio(1, 2));
    }

    #[test]
    fn moment_sum_counts_match_between_paths() {
        // Exact cross-check of one tensor moment against the histogram sum.
        let lat = catalog::build("Z4").unwrap();
        let reps = shells::shell_representatives(&lat, &rat(2), DEFAULT_BUDGET).unwrap();
        let ps = PointSet::from_coefficients(&lat, reps).unwrap();
        let amb = AmbientPoints::build(&lat, &ps).unwrap();
        let hist = ps.pair_histogram();
        for k in [2u32, 4, 6] {
            let mut from_hist = Int::zero();
            for (&v, &c) in &hist {
                from_hist += Int::from(c) * int_pow(&Int::from(v), k);
            }
            assert_eq!(amb.moment_sum(k), from_hist, "level {k}");
        }
    }
}
