//! Vector enumeration by norm.
//!
//! The enumerator walks the coefficient tree of the quadratic form using the
//! split Q(y) = sum_i q_i (y_i + sum_{j>i} u_ij y_j)^2 from the exact LDL
//! factorization, with an optional rational offset for coset problems. All
//! pruning arithmetic is integer: each level is scaled by the lcm of its
//! denominators and the whole form by a global scale Z, so a vector of norm
//! p/q appears as an integer "scaled norm" Z*p/q.
//!
//! Two code paths share one setup. When precomputed bounds certify that every
//! intermediate fits in i64 (with the single product per node in i128), the
//! hot path runs on machine integers and splits the top-level branches across
//! threads; results merge in branch order so output is deterministic. When
//! certification fails the same recursion runs sequentially on big integers.
//!
//! Without an offset the tree is cut in half: the leading nonzero coefficient
//! is forced nonnegative and every leaf stands for a +/- pair.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::exact::{int, isqrt, rat, rat_ceil, rat_floor, Int, Rat};
use crate::lattice::Lattice;
use crate::{Error, Result};

/// Default leaf budget (counted in vectors, so a +/- pair costs 2).
pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Theta series up to and including `max_norm`; coefficients are
/// (norm, vector count) pairs in increasing norm order, present only for
/// nonempty shells, with the zero vector contributing (0, 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThetaSeries {
    pub max_norm: Rat,
    pub coefficients: Vec<(Rat, u64)>,
}

impl ThetaSeries {
    /// Count at an exact norm (0 when the shell is empty).
    pub fn count(&self, norm: &Rat) -> u64 {
        self.coefficients
            .iter()
            .find(|(m, _)| m == norm)
            .map_or(0, |(_, c)| *c)
    }
}

/// One shell of vectors at an exact norm. `vectors` holds frame coordinates,
/// +/- pairs adjacent, and is empty when `materialized` is false.
#[derive(Clone, Debug)]
pub struct Shell {
    pub norm: Rat,
    pub count: u64,
    pub vectors: Vec<Vec<Rat>>,
    pub materialized: bool,
}

/// Exact integer-scaled enumeration data for one ball Q(x + t) <= bound.
struct Kernel {
    dim: usize,
    /// Global scale: scaled norm = z * true norm.
    z: Int,
    that: Int,
    lambda: Vec<Int>,
    kappa: Vec<Int>,
    /// ucols[i][k] = scaled coefficient U-hat[k][i] for k < i.
    ucols: Vec<Vec<Int>>,
    ahat: Vec<Int>,
    /// Offset absent: enumerate one vector per +/- pair, weight 2.
    half: bool,
    fast: Option<FastKernel>,
}

struct FastKernel {
    dim: usize,
    that: i64,
    lambda: Vec<i64>,
    kappa: Vec<i64>,
    ucols: Vec<Vec<i64>>,
    ahat: Vec<i64>,
    half: bool,
}

impl Kernel {
    fn new(lat: &Lattice, bound: &Rat, offset: Option<&[Rat]>) -> Result<Kernel> {
        let d = lat.dim();
        if let Some(t) = offset {
            if t.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.len() });
            }
        }
        debug_assert!(!bound.is_negative());
        let ldl = lat.gram().ldl()?;
        let zero_t = vec![rat(0); d];
        let t = offset.unwrap_or(&zero_t);

        // alpha[i] = t_i + sum_{j>i} u_ij t_j, the constant part of level i.
        let mut alpha = vec![rat(0); d];
        for i in 0..d {
            let mut a = t[i].clone();
            for j in i + 1..d {
                a += &ldl.u[(i, j)] * &t[j];
            }
            alpha[i] = a;
        }

        let mut lambda = Vec::with_capacity(d);
        for i in 0..d {
            let mut l = alpha[i].denom().clone();
            for j in i + 1..d {
                l = l.lcm(ldl.u[(i, j)].denom());
            }
            lambda.push(l);
        }

        let mut z = bound.denom().clone();
        for i in 0..d {
            z = z.lcm(&(&lambda[i] * &lambda[i] * ldl.q[i].denom()));
        }
        let that = (&z * bound.numer()) / bound.denom();

        let mut kappa = Vec::with_capacity(d);
        let mut ahat = Vec::with_capacity(d);
        let mut ucols: Vec<Vec<Int>> = (0..d).map(|i| vec![Int::zero(); i]).collect();
        for i in 0..d {
            kappa.push(&z * ldl.q[i].numer() / (ldl.q[i].denom() * &lambda[i] * &lambda[i]));
            ahat.push(&lambda[i] * alpha[i].numer() / alpha[i].denom());
            for j in i + 1..d {
                let u = &ldl.u[(i, j)];
                ucols[j][i] = &lambda[i] * u.numer() / u.denom();
            }
        }

        // i64 certification: per-coordinate coefficient bounds X_j give bounds
        // on every intermediate the machine-integer path computes.
        let ginv = lat.gram().inverse()?;
        let mut xbound = Vec::with_capacity(d);
        for j in 0..d {
            let r = bound * &ginv[(j, j)];
            xbound.push(isqrt(&rat_floor(&r)) + rat_ceil(&t[j].abs()) + 1);
        }
        let lim62: Int = Int::one() << 62;
        let lim61: Int = Int::one() << 61;
        let lim126: Int = Int::one() << 126;
        let mut ok = that <= lim62;
        for i in 0..d {
            let mut c = ahat[i].abs();
            for j in i + 1..d {
                c += ucols[j][i].abs() * &xbound[j];
            }
            let zhat = &lambda[i] * &xbound[i] + &c;
            ok = ok
                && kappa[i] <= lim62
                && c <= lim61
                && zhat <= lim62
                && &kappa[i] * &zhat * &zhat <= lim126;
        }

        let fast = if ok {
            let to64 = |v: &Int| v.to_i64().expect("certified to fit i64");
            Some(FastKernel {
                dim: d,
                that: to64(&that),
                lambda: lambda.iter().map(to64).collect(),
                kappa: kappa.iter().map(to64).collect(),
                ucols: ucols.iter().map(|c| c.iter().map(to64).collect()).collect(),
                ahat: ahat.iter().map(to64).collect(),
                half: offset.is_none(),
            })
        } else {
            None
        };

        Ok(Kernel {
            dim: d,
            z,
            that,
            lambda,
            kappa,
            ucols,
            ahat,
            half: offset.is_none(),
            fast,
        })
    }

    fn norm_of_scaled(&self, scaled: &Int) -> Rat {
        Rat::new(scaled.clone(), self.z.clone())
    }
}

fn isqrt64(n: i64) -> i64 {
    debug_assert!(n >= 0);
    let mut r = (n as f64).sqrt() as i64;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn div_floor64(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

fn div_ceil64(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// Leaf consumer for the machine-integer path. Implementations must merge
/// associatively in branch order so the parallel split stays deterministic.
trait Sink: Send {
    fn leaf(&mut self, x: &[i64], scaled: i64, weight: u64);
    fn merge(&mut self, other: Self);
}

/// Scaled norm -> vector count.
#[derive(Default)]
struct CountSink {
    counts: BTreeMap<i64, u64>,
}

impl Sink for CountSink {
    fn leaf(&mut self, _x: &[i64], scaled: i64, weight: u64) {
        *self.counts.entry(scaled).or_insert(0) += weight;
    }
    fn merge(&mut self, other: Self) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
    }
}

/// Coefficient vectors at one exact scaled norm.
struct RepsSink {
    target: i64,
    store: bool,
    count: u64,
    reps: Vec<Vec<i64>>,
}

impl Sink for RepsSink {
    fn leaf(&mut self, x: &[i64], scaled: i64, weight: u64) {
        if scaled == self.target {
            self.count += weight;
            if self.store {
                self.reps.push(x.to_vec());
            }
        }
    }
    fn merge(&mut self, other: Self) {
        self.count += other.count;
        self.reps.extend(other.reps);
    }
}

/// Minimum scaled norm, its weight, and optionally all minimizers.
struct MinSink {
    best: Option<i64>,
    count: u64,
    args: Option<Vec<Vec<i64>>>,
}

impl Sink for MinSink {
    fn leaf(&mut self, x: &[i64], scaled: i64, weight: u64) {
        match self.best {
            Some(b) if scaled > b => return,
            Some(b) if scaled == b => {
                self.count += weight;
                if let Some(args) = &mut self.args {
                    args.push(x.to_vec());
                }
            }
            _ => {
                self.best = Some(scaled);
                self.count = weight;
                if let Some(args) = &mut self.args {
                    args.clear();
                    args.push(x.to_vec());
                }
            }
        }
    }
    fn merge(&mut self, other: Self) {
        let Some(ob) = other.best else { return };
        match self.best {
            Some(b) if b < ob => {}
            Some(b) if b == ob => {
                self.count += other.count;
                if let (Some(a), Some(oa)) = (&mut self.args, other.args) {
                    a.extend(oa);
                }
            }
            _ => {
                self.best = other.best;
                self.count = other.count;
                if self.args.is_some() {
                    self.args = other.args;
                }
            }
        }
    }
}

/// Scaled-norm counts split by a vector classifier. A weight-2 leaf stands
/// for the pair {x, -x}, which may fall in different classes, so it adds one
/// to each; classifiers return the classes of both signs.
struct ClassSink<'a> {
    classify: &'a (dyn Fn(&[i64]) -> (u16, u16) + Sync),
    counts: BTreeMap<(u16, i64), u64>,
}

impl Sink for ClassSink<'_> {
    fn leaf(&mut self, x: &[i64], scaled: i64, weight: u64) {
        let (c, cneg) = (self.classify)(x);
        if weight == 2 {
            *self.counts.entry((c, scaled)).or_insert(0) += 1;
            *self.counts.entry((cneg, scaled)).or_insert(0) += 1;
        } else {
            *self.counts.entry((c, scaled)).or_insert(0) += weight;
        }
    }
    fn merge(&mut self, other: Self) {
        for (k, v) in other.counts {
            *self.counts.entry(k).or_insert(0) += v;
        }
    }
}

struct FastRun<'a, S: Sink> {
    k: &'a FastKernel,
    counter: &'a AtomicU64,
    budget: u64,
    x: Vec<i64>,
    /// sums[j*dim + i] = sum over fixed levels k >= j of Uhat[i][k] * x[k].
    sums: Vec<i64>,
    sink: S,
}

impl<'a, S: Sink> FastRun<'a, S> {
    fn new(k: &'a FastKernel, counter: &'a AtomicU64, budget: u64, sink: S) -> Self {
        FastRun {
            k,
            counter,
            budget,
            x: vec![0; k.dim],
            sums: vec![0; (k.dim + 1) * k.dim],
            sink,
        }
    }

    fn rec(&mut self, level: usize, rem: i64, prefix_zero: bool) -> Result<()> {
        let k = self.k;
        let d = k.dim;
        let c = k.ahat[level] + self.sums[(level + 1) * d + level];
        let lam = k.lambda[level];
        let r = isqrt64(rem / k.kappa[level]);
        let mut lo = div_ceil64(-r - c, lam);
        let hi = div_floor64(r - c, lam);
        if k.half && prefix_zero && lo < 0 {
            lo = 0;
        }
        for v in lo..=hi {
            let z = lam * v + c;
            let term = (k.kappa[level] as i128 * z as i128 * z as i128) as i64;
            debug_assert!(term <= rem);
            let new_rem = rem - term;
            if level == 0 {
                if k.half && prefix_zero && v == 0 {
                    continue;
                }
                self.x[0] = v;
                let weight = if k.half { 2 } else { 1 };
                let used = self.counter.fetch_add(weight, Ordering::Relaxed) + weight;
                if used > self.budget {
                    return Err(Error::ShellBudget { budget: self.budget });
                }
                self.sink.leaf(&self.x, k.that - new_rem, weight);
            } else {
                self.x[level] = v;
                for i in 0..level {
                    self.sums[level * d + i] =
                        self.sums[(level + 1) * d + i] + k.ucols[level][i] * v;
                }
                self.rec(level - 1, new_rem, prefix_zero && v == 0)?;
            }
        }
        Ok(())
    }
}

fn enumerate_fast<S: Sink, F: Fn() -> S + Sync>(
    k: &FastKernel,
    budget: u64,
    make: F,
) -> Result<S> {
    let counter = AtomicU64::new(0);
    let d = k.dim;
    if d == 1 {
        let mut run = FastRun::new(k, &counter, budget, make());
        run.rec(0, k.that, true)?;
        return Ok(run.sink);
    }
    // Top-level branches are independent subtrees; one task each, merged in
    // branch order.
    let top = d - 1;
    let c = k.ahat[top];
    let r = isqrt64(k.that / k.kappa[top]);
    let mut lo = div_ceil64(-r - c, k.lambda[top]);
    let hi = div_floor64(r - c, k.lambda[top]);
    if k.half && lo < 0 {
        lo = 0;
    }
    if lo > hi {
        return Ok(make());
    }
    let parts: Result<Vec<S>> = (lo..=hi)
        .into_par_iter()
        .map(|v| {
            let mut run = FastRun::new(k, &counter, budget, make());
            let z = k.lambda[top] * v + c;
            let term = (k.kappa[top] as i128 * z as i128 * z as i128) as i64;
            run.x[top] = v;
            for i in 0..top {
                run.sums[top * d + i] = k.ucols[top][i] * v;
            }
            run.rec(top - 1, k.that - term, v == 0)?;
            Ok(run.sink)
        })
        .collect();
    let mut parts = parts?;
    let mut acc = parts.remove(0);
    for p in parts {
        acc.merge(p);
    }
    Ok(acc)
}

struct BigRun<'a, F: FnMut(&[i64], &Int, u64)> {
    k: &'a Kernel,
    used: u64,
    budget: u64,
    x: Vec<i64>,
    sums: Vec<Int>,
    f: F,
}

impl<'a, F: FnMut(&[i64], &Int, u64)> BigRun<'a, F> {
    fn rec(&mut self, level: usize, rem: Int, prefix_zero: bool) -> Result<()> {
        let d = self.k.dim;
        let c = &self.k.ahat[level] + &self.sums[(level + 1) * d + level];
        let lam = &self.k.lambda[level];
        let r = isqrt(&(&rem / &self.k.kappa[level]));
        let mut lo = (-&r - &c).div_ceil(lam);
        let hi = (&r - &c).div_floor(lam);
        if self.k.half && prefix_zero && lo.is_negative() {
            lo = Int::zero();
        }
        let mut v = lo;
        while v <= hi {
            let z = lam * &v + &c;
            let term = &self.k.kappa[level] * &z * &z;
            let new_rem = &rem - &term;
            let vi = v.to_i64().expect("enumeration coefficient fits i64");
            if level == 0 {
                if !(self.k.half && prefix_zero && v.is_zero()) {
                    self.x[0] = vi;
                    let weight = if self.k.half { 2 } else { 1 };
                    self.used += weight;
                    if self.used > self.budget {
                        return Err(Error::ShellBudget { budget: self.budget });
                    }
                    let scaled = &self.k.that - &new_rem;
                    (self.f)(&self.x, &scaled, weight);
                }
            } else {
                self.x[level] = vi;
                for i in 0..level {
                    self.sums[level * d + i] =
                        &self.sums[(level + 1) * d + i] + &self.k.ucols[level][i] * &v;
                }
                self.rec(level - 1, new_rem, prefix_zero && v.is_zero())?;
            }
            v += 1;
        }
        Ok(())
    }
}

fn enumerate_big<F: FnMut(&[i64], &Int, u64)>(k: &Kernel, budget: u64, f: F) -> Result<()> {
    let mut run = BigRun {
        k,
        used: 0,
        budget,
        x: vec![0; k.dim],
        sums: vec![Int::zero(); (k.dim + 1) * k.dim],
        f,
    };
    run.rec(k.dim - 1, k.that.clone(), true)
}

/// Theta series of the lattice through `max_norm`.
pub fn theta(lat: &Lattice, max_norm: &Rat, budget: u64) -> Result<ThetaSeries> {
    if max_norm.is_negative() {
        return Ok(ThetaSeries { max_norm: max_norm.clone(), coefficients: Vec::new() });
    }
    let kernel = Kernel::new(lat, max_norm, None)?;
    let mut counts: BTreeMap<Int, u64> = BTreeMap::new();
    match &kernel.fast {
        Some(fk) => {
            let sink = enumerate_fast(fk, budget, CountSink::default)?;
            for (scaled, c) in sink.counts {
                counts.insert(int(scaled), c);
            }
        }
        None => enumerate_big(&kernel, budget, |_x, scaled, w| {
            *counts.entry(scaled.clone()).or_insert(0) += w;
        })?,
    }
    *counts.entry(Int::zero()).or_insert(0) += 1;
    let coefficients = counts
        .into_iter()
        .map(|(scaled, c)| (kernel.norm_of_scaled(&scaled), c))
        .collect();
    Ok(ThetaSeries { max_norm: max_norm.clone(), coefficients })
}

/// Theta counts through `max_norm` split by a classifier on coefficient
/// vectors. `classify` maps a coefficient row to the classes of x and of -x;
/// the zero vector is counted once under `zero_class`. Returns
/// (class, norm) -> count.
pub fn classified_theta(
    lat: &Lattice,
    max_norm: &Rat,
    budget: u64,
    zero_class: u16,
    classify: &(dyn Fn(&[i64]) -> (u16, u16) + Sync),
) -> Result<BTreeMap<(u16, Rat), u64>> {
    if max_norm.is_negative() {
        return Ok(BTreeMap::new());
    }
    let kernel = Kernel::new(lat, max_norm, None)?;
    let mut counts: BTreeMap<(u16, Int), u64> = BTreeMap::new();
    match &kernel.fast {
        Some(fk) => {
            let sink = enumerate_fast(fk, budget, || ClassSink {
                classify,
                counts: BTreeMap::new(),
            })?;
            for ((c, scaled), n) in sink.counts {
                counts.insert((c, int(scaled)), n);
            }
        }
        None => enumerate_big(&kernel, budget, |x, scaled, w| {
            let (c, cneg) = classify(x);
            if w == 2 {
                *counts.entry((c, scaled.clone())).or_insert(0) += 1;
                *counts.entry((cneg, scaled.clone())).or_insert(0) += 1;
            } else {
                *counts.entry((c, scaled.clone())).or_insert(0) += w;
            }
        })?,
    }
    *counts.entry((zero_class, Int::zero())).or_insert(0) += 1;
    Ok(counts
        .into_iter()
        .map(|((c, scaled), n)| ((c, kernel.norm_of_scaled(&scaled)), n))
        .collect())
}

/// The shell of vectors at exactly `norm` (> 0). With `materialize` false
/// only the count is computed.
pub fn shell(lat: &Lattice, norm: &Rat, budget: u64, materialize: bool) -> Result<Shell> {
    if !norm.is_positive() {
        return Err(Error::EmptyShell("shell norm must be positive".into()));
    }
    let kernel = Kernel::new(lat, norm, None)?;
    let scaled_target = &kernel.z * norm.numer();
    if (&scaled_target % norm.denom()) != Int::zero() {
        // The scale clears every norm the lattice attains; a norm outside
        // that grid has an empty shell.
        return Ok(Shell { norm: norm.clone(), count: 0, vectors: Vec::new(), materialized: materialize });
    }
    let target = &scaled_target / norm.denom();
    let mut count = 0;
    let mut reps: Vec<Vec<i64>> = Vec::new();
    match &kernel.fast {
        Some(fk) => {
            let t64 = target.to_i64().expect("target within certified bound");
            let sink = enumerate_fast(fk, budget, || RepsSink {
                target: t64,
                store: materialize,
                count: 0,
                reps: Vec::new(),
            })?;
            count = sink.count;
            reps = sink.reps;
        }
        None => enumerate_big(&kernel, budget, |x, scaled, w| {
            if *scaled == target {
                count += w;
                if materialize {
                    reps.push(x.to_vec());
                }
            }
        })?,
    }
    let mut vectors = Vec::with_capacity(reps.len() * 2);
    for x in &reps {
        let v = coefficient_combination(lat, x);
        let neg: Vec<Rat> = v.iter().map(|r| -r).collect();
        vectors.push(v);
        vectors.push(neg);
    }
    Ok(Shell { norm: norm.clone(), count, vectors, materialized: materialize })
}

/// One coefficient vector per +/- pair at exactly `norm`.
pub fn shell_representatives(lat: &Lattice, norm: &Rat, budget: u64) -> Result<Vec<Vec<i64>>> {
    if !norm.is_positive() {
        return Err(Error::EmptyShell("shell norm must be positive".into()));
    }
    let kernel = Kernel::new(lat, norm, None)?;
    let scaled_target = &kernel.z * norm.numer();
    if (&scaled_target % norm.denom()) != Int::zero() {
        return Ok(Vec::new());
    }
    let target = &scaled_target / norm.denom();
    match &kernel.fast {
        Some(fk) => {
            let t64 = target.to_i64().expect("target within certified bound");
            let sink = enumerate_fast(fk, budget, || RepsSink {
                target: t64,
                store: true,
                count: 0,
                reps: Vec::new(),
            })?;
            Ok(sink.reps)
        }
        None => {
            let mut reps = Vec::new();
            enumerate_big(&kernel, budget, |x, scaled, _w| {
                if *scaled == target {
                    reps.push(x.to_vec());
                }
            })?;
            Ok(reps)
        }
    }
}

/// Minimum nonzero norm and the number of vectors attaining it.
pub fn minimum(lat: &Lattice, budget: u64) -> Result<(Rat, u64)> {
    let bound = (0..lat.dim())
        .map(|i| lat.gram()[(i, i)].clone())
        .min()
        .expect("lattice dimension is positive");
    let kernel = Kernel::new(lat, &bound, None)?;
    let (best, count) = match &kernel.fast {
        Some(fk) => {
            let sink = enumerate_fast(fk, budget, || MinSink { best: None, count: 0, args: None })?;
            (sink.best.map(int), sink.count)
        }
        None => {
            let mut best: Option<Int> = None;
            let mut count = 0;
            enumerate_big(&kernel, budget, |_x, scaled, w| match &best {
                Some(b) if scaled > b => {}
                Some(b) if scaled == b => count += w,
                _ => {
                    best = Some(scaled.clone());
                    count = w;
                }
            })?;
            (best, count)
        }
    };
    let best = best.expect("ball of radius min diagonal contains a basis vector");
    Ok((kernel.norm_of_scaled(&best), count))
}

/// Minimum norm over the coset (offset + L), the offset given by rational
/// coefficients; returns the norm and the lattice coefficient vectors x such
/// that offset + x attains it, in enumeration order.
pub fn coset_minimum(lat: &Lattice, offset: &[Rat], budget: u64) -> Result<(Rat, Vec<Vec<i64>>)> {
    if offset.len() != lat.dim() {
        return Err(Error::DimensionMismatch { expected: lat.dim(), got: offset.len() });
    }
    // Rounding the offset away coordinate-wise gives a valid enumeration
    // bound; the true coset minimum is often far smaller, so deepen through
    // a short ladder of radii and stop at the first nonempty ball.
    let guess: Vec<Rat> = offset
        .iter()
        .map(|t| {
            let half = Rat::new(Int::one(), int(2));
            Rat::from_integer(rat_floor(&(t + half))) - t
        })
        .collect();
    let mut cap = rat(0);
    for i in 0..lat.dim() {
        for j in 0..lat.dim() {
            cap += &guess[i] * &lat.gram()[(i, j)] * &guess[j];
        }
    }
    let ladder = [
        &cap / rat(16),
        &cap / rat(8),
        &cap / rat(4),
        &cap / rat(2),
        cap.clone(),
    ];
    for bound in &ladder {
        let found = coset_search(lat, offset, bound, budget)?;
        if let Some(hit) = found {
            return Ok(hit);
        }
    }
    unreachable!("rounded offset lies within the final enumeration bound")
}

fn coset_search(
    lat: &Lattice,
    offset: &[Rat],
    bound: &Rat,
    budget: u64,
) -> Result<Option<(Rat, Vec<Vec<i64>>)>> {
    let kernel = Kernel::new(lat, bound, Some(offset))?;
    let (best, args) = match &kernel.fast {
        Some(fk) => {
            let sink = enumerate_fast(fk, budget, || MinSink {
                best: None,
                count: 0,
                args: Some(Vec::new()),
            })?;
            (sink.best.map(int), sink.args.unwrap_or_default())
        }
        None => {
            let mut best: Option<Int> = None;
            let mut args: Vec<Vec<i64>> = Vec::new();
            enumerate_big(&kernel, budget, |x, scaled, _w| match &best {
                Some(b) if scaled > b => {}
                Some(b) if scaled == b => args.push(x.to_vec()),
                _ => {
                    best = Some(scaled.clone());
                    args = vec![x.to_vec()];
                }
            })?;
            (best, args)
        }
    };
    Ok(best.map(|b| (kernel.norm_of_scaled(&b), args)))
}

/// Frame coordinates of the lattice vector with the given basis coefficients.
pub fn coefficient_combination(lat: &Lattice, x: &[i64]) -> Vec<Rat> {
    let mut v = vec![rat(0); lat.dim()];
    for (i, &c) in x.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let ci = rat(c);
        for (slot, b) in v.iter_mut().zip(lat.basis().row(i)) {
            *slot += &ci * b;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::catalog;

    fn series(name: &str, max: i64) -> Vec<(Rat, u64)> {
        let lat = catalog::build(name).unwrap();
        theta(&lat, &rat(max), 100_000_000).unwrap().coefficients
    }

    fn as_pairs(coeffs: &[(Rat, u64)]) -> Vec<(Rat, u64)> {
        coeffs.to_vec()
    }

    #[test]
    fn one_dimensional_series() {
        assert_eq!(
            series("Lambda1", 16),
            vec![(rat(0), 1), (rat(4), 2), (rat(16), 2)]
        );
        assert_eq!(
            series("Z1", 9),
            vec![(rat(0), 1), (rat(1), 2), (rat(4), 2), (rat(9), 2)]
        );
        assert_eq!(series("O1", 12), vec![(rat(0), 1), (rat(3), 2), (rat(12), 2)]);
    }

    #[test]
    fn small_planar_series() {
        assert_eq!(series("Lambda2", 12), vec![(rat(0), 1), (rat(4), 6), (rat(12), 6)]);
        assert_eq!(
            series("Z2", 5),
            vec![(rat(0), 1), (rat(1), 4), (rat(2), 4), (rat(4), 4), (rat(5), 8)]
        );
    }

    #[test]
    fn classified_counts_split_by_parity() {
        use crate::exact::QMat;
        let z2 = catalog::build("Z2").unwrap();
        let classify = |x: &[i64]| {
            let c = (x[0] + x[1]).rem_euclid(2) as u16;
            (c, c)
        };
        let counts = classified_theta(&z2, &rat(2), DEFAULT_BUDGET, 0, &classify).unwrap();
        assert_eq!(counts.get(&(0, rat(0))).copied(), Some(1));
        assert_eq!(counts.get(&(1, rat(1))).copied(), Some(4));
        assert_eq!(counts.get(&(0, rat(1))), None);
        assert_eq!(counts.get(&(0, rat(2))).copied(), Some(4));
        // Class sums reproduce the plain series.
        for (norm, n) in theta(&z2, &rat(2), DEFAULT_BUDGET).unwrap().coefficients {
            let total: u64 =
                counts.iter().filter(|((_, m), _)| *m == norm).map(|(_, v)| *v).sum();
            assert_eq!(total, n, "norm {norm}");
        }
        // The big-integer fallback path splits the same way.
        let s = Rat::from_integer(int(1) << 63u32);
        let g = QMat::from_rows(vec![vec![s.clone(), rat(0)], vec![rat(0), s.clone()]])
            .unwrap();
        let big = Lattice::from_gram(g).unwrap();
        let counts = classified_theta(&big, &(&s + &s), DEFAULT_BUDGET, 0, &classify).unwrap();
        assert_eq!(counts.get(&(1, s.clone())).copied(), Some(4));
        assert_eq!(counts.get(&(0, &s + &s)).copied(), Some(4));
    }

    #[test]
    fn kissing_numbers() {
        let expected: [(&str, i64, u64); 6] = [
            ("A2", 2, 6),
            ("Lambda7", 4, 126),
            ("E8", 2, 240),
            ("D16plus", 2, 480),
            ("O16", 3, 512),
            ("BW16", 4, 4320),
        ];
        for (name, min, count) in expected {
            let lat = catalog::build(name).unwrap();
            assert_eq!(
                minimum(&lat, DEFAULT_BUDGET).unwrap(),
                (rat(min), count),
                "minimum of {name}"
            );
        }
    }

    #[test]
    fn shells_materialize_in_pairs() {
        let e8 = catalog::build("E8").unwrap();
        let s = shell(&e8, &rat(2), DEFAULT_BUDGET, true).unwrap();
        assert_eq!(s.count, 240);
        assert_eq!(s.vectors.len(), 240);
        for pair in s.vectors.chunks(2) {
            let neg: Vec<Rat> = pair[0].iter().map(|r| -r).collect();
            assert_eq!(pair[1], neg);
            assert_eq!(e8.vector_norm(&pair[0]), rat(2));
        }
        let empty = shell(&e8, &rat(3), DEFAULT_BUDGET, true).unwrap();
        assert_eq!((empty.count, empty.vectors.len()), (0, 0));
        let third = shell(&e8, &Rat::new(int(1), int(3)), DEFAULT_BUDGET, true).unwrap();
        assert_eq!(third.count, 0);
        assert!(shell(&e8, &rat(0), DEFAULT_BUDGET, true).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        let e8 = catalog::build("E8").unwrap();
        match theta(&e8, &rat(4), 10) {
            Err(Error::ShellBudget { budget: 10 }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn theta_of_orthogonal_sum_is_product() {
        // Z2 = Z1 perp Z1, so its series is the square of the Z1 series.
        let z1 = series("Z1", 8);
        let z2 = series("Z2", 8);
        let mut conv: BTreeMap<Rat, u64> = BTreeMap::new();
        for (m1, c1) in &z1 {
            for (m2, c2) in &z1 {
                let m = m1 + m2;
                if m <= rat(8) {
                    *conv.entry(m).or_insert(0) += c1 * c2;
                }
            }
        }
        let conv: Vec<(Rat, u64)> = conv.into_iter().collect();
        assert_eq!(as_pairs(&z2), conv);
    }

    #[test]
    fn coset_minimum_finds_deep_holes() {
        let l2 = catalog::build("Lambda2").unwrap();
        let t = vec![Rat::new(int(1), int(2)), rat(0)];
        let (norm, args) = coset_minimum(&l2, &t, DEFAULT_BUDGET).unwrap();
        assert_eq!(norm, rat(1));
        assert_eq!(args.len(), 2);
        // An integral offset reduces to the zero vector.
        let (norm, args) = coset_minimum(&l2, &[rat(3), rat(-2)], DEFAULT_BUDGET).unwrap();
        assert_eq!(norm, rat(0));
        assert_eq!(args, vec![vec![-3, 2]]);
    }

    #[test]
    fn representatives_cover_each_pair_once() {
        let d4 = catalog::build("D4").unwrap();
        let reps = shell_representatives(&d4, &rat(2), DEFAULT_BUDGET).unwrap();
        assert_eq!(reps.len(), 12);
        let mut seen = std::collections::BTreeSet::new();
        for x in &reps {
            let v = coefficient_combination(&d4, x);
            let neg: Vec<Rat> = v.iter().map(|r| -r).collect();
            assert!(seen.insert(v.clone()), "duplicate vector");
            assert!(!seen.contains(&neg), "pair enumerated twice");
        }
    }

    #[test]
    fn isqrt64_matches_exact() {
        for n in 0..2000i64 {
            let r = isqrt64(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n, "isqrt64({n})");
        }
        let big = (1i64 << 62) - 1;
        let r = isqrt64(big);
        assert!(r * r <= big);
        assert!((r + 1).checked_mul(r + 1).map_or(true, |s| s > big));
    }

    #[test]
    fn big_integer_path_agrees() {
        // A scaled form large enough to fail i64 certification: the kernel
        // must fall back and produce identical counts.
        let huge = int(1) << 63u32;
        let g = crate::exact::QMat::from_rows(vec![
            vec![Rat::from_integer(huge.clone()), rat(0)],
            vec![rat(0), Rat::from_integer(huge.clone())],
        ])
        .unwrap();
        let lat = Lattice::from_gram(g).unwrap();
        let bound = Rat::from_integer(&huge * int(4));
        let kernel = Kernel::new(&lat, &bound, None).unwrap();
        assert!(kernel.fast.is_none(), "expected big-integer fallback");
        let t = theta(&lat, &bound, DEFAULT_BUDGET).unwrap();
        let counts: Vec<(Rat, u64)> = t.coefficients;
        assert_eq!(
            counts,
            vec![
                (rat(0), 1),
                (Rat::from_integer(huge.clone()), 4),
                (Rat::from_integer(&huge * int(2)), 4),
                (Rat::from_integer(&huge * int(4)), 4),
            ]
        );
    }

    mod oracle {
        use super::*;
        use crate::exact::QMat;
        use proptest::prelude::*;

        /// Direct box enumeration: every coefficient vector with
        /// |x_j| <= isqrt(T * (G^-1)_jj) + 1, norms computed straight from
        /// the Gram matrix.
        fn box_counts(lat: &Lattice, max: i64) -> BTreeMap<Rat, u64> {
            let d = lat.dim();
            let ginv = lat.gram().inverse().unwrap();
            let bound: Vec<i64> = (0..d)
                .map(|j| {
                    let r = rat(max) * &ginv[(j, j)];
                    isqrt(&rat_floor(&r)).to_i64().unwrap() + 1
                })
                .collect();
            let mut counts = BTreeMap::new();
            let mut x: Vec<i64> = bound.iter().map(|b| -b).collect();
            loop {
                let mut norm = rat(0);
                for i in 0..d {
                    for j in 0..d {
                        if x[i] != 0 && x[j] != 0 {
                            norm += rat(x[i] * x[j]) * &lat.gram()[(i, j)];
                        }
                    }
                }
                if norm <= rat(max) {
                    *counts.entry(norm).or_insert(0) += 1;
                }
                let mut carry = d;
                for i in 0..d {
                    if x[i] < bound[i] {
                        x[i] += 1;
                        carry = i;
                        break;
                    }
                    x[i] = -bound[i];
                }
                if carry == d {
                    break;
                }
            }
            counts
        }

        fn arb_lattice(dim: usize) -> impl Strategy<Value = Lattice> {
            proptest::collection::vec(
                proptest::collection::vec(-3i64..=3, dim),
                dim,
            )
            .prop_filter_map("nonsingular basis", |rows| {
                let rows: Vec<Vec<Rat>> =
                    rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
                Lattice::from_basis(rows).ok()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]
            #[test]
            fn counts_match_box_enumeration(
                lat in (1usize..=4).prop_flat_map(arb_lattice),
                max in 1i64..=12,
            ) {
                let got = theta(&lat, &rat(max), 50_000_000).unwrap();
                let want = box_counts(&lat, max);
                let got_map: BTreeMap<Rat, u64> = got.coefficients.into_iter().collect();
                prop_assert_eq!(got_map, want);
            }
        }

        #[test]
        fn oracle_agrees_on_fixed_grams() {
            for (rows, max) in [
                (vec![vec![2, -1], vec![-1, 2]], 12),
                (vec![vec![1, 0, 0], vec![0, 2, 1], vec![0, 1, 3]], 9),
                (vec![vec![3, 1, 1], vec![1, 3, 1], vec![1, 1, 3]], 10),
            ] {
                let g = QMat::from_rows(
                    rows.iter()
                        .map(|r| r.iter().map(|&x| rat(x)).collect())
                        .collect(),
                )
                .unwrap();
                let lat = Lattice::from_gram(g).unwrap();
                let got: BTreeMap<Rat, u64> =
                    theta(&lat, &rat(max), DEFAULT_BUDGET).unwrap().coefficients.into_iter().collect();
                assert_eq!(got, box_counts(&lat, max));
            }
        }
    }
}
