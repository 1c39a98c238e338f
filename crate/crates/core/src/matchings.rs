//! Trace calculus over matchings.
//!
//! For a perfect matching `M` of `[2d]`, `Trace_sum(M)` is half the trace of
//! the sum over all Pauli products `σ_1 ⋯ σ_{2d}` with letters in {X,Y,Z},
//! constrained so matched positions carry the same letter. It is always an
//! integer with `|Trace_sum(M)| ≤ 3^d`, and its average over uniform
//! matchings is exactly `2d+1`.
//!
//! Two exact routes are provided: brute force over the 3^d constrained
//! assignments, and a memoized rewiring recursion in which position 1 is
//! eliminated against each other position with an alternating sign.
//!
//! The hypergraph side draws r distinct p-subsets of `[n]`, replicates each
//! twice, and pair-orders the 2r replicas uniformly; the per-qubit induced
//! matchings feed a Monte Carlo estimate of the multiplicative gap between
//! `E[Π_j Trace_sum(M_j)]` and `E[Π_j (2Δ(j)+1)]`. (Statements of this setup
//! sometimes speak of 2r superindices outright; here the list is always the r
//! distinct tuples each appearing exactly twice.) The annealed rate
//! `g(β,p) = C/β + βγ/2 + log(1+pγβ²)/β` and its minimizer close the loop.

use crate::binomial_u64;
use crate::error::{Error, Result};
use crate::pauli::{trace_of_letter_sequence, GaussInt, Pauli};
use crate::rng::{CounterRng, SeqRng};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// A perfect pairing of the positions 0..2d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// partner[i] is the position matched with i.
    partners: Vec<usize>,
}

impl Matching {
    pub fn new(pairs: &[(usize, usize)]) -> Result<Self> {
        let len = pairs.len() * 2;
        let mut partners = vec![usize::MAX; len];
        for &(a, b) in pairs {
            if a >= len || b >= len || a == b {
                return Err(Error::Validation(format!("bad pair ({a},{b})")));
            }
            if partners[a] != usize::MAX || partners[b] != usize::MAX {
                return Err(Error::Validation(format!("position reused in ({a},{b})")));
            }
            partners[a] = b;
            partners[b] = a;
        }
        Ok(Matching { partners })
    }

    fn from_partners(partners: Vec<usize>) -> Self {
        Matching { partners }
    }

    /// Number of pairs d.
    pub fn d(&self) -> usize {
        self.partners.len() / 2
    }

    pub fn len(&self) -> usize {
        self.partners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partners.is_empty()
    }

    pub fn partner(&self, i: usize) -> usize {
        self.partners[i]
    }

    /// Pairs (a, b) with a < b, sorted by a.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.d());
        for (i, &j) in self.partners.iter().enumerate() {
            if i < j {
                out.push((i, j));
            }
        }
        out
    }

    /// Order-preserving canonical label sequence: position i gets the index
    /// of its pair in order of first appearance.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = vec![u8::MAX; self.len()];
        let mut next = 0u8;
        for i in 0..self.len() {
            if key[i] == u8::MAX {
                key[i] = next;
                key[self.partners[i]] = next;
                next += 1;
            }
        }
        key
    }
}

/// All (2d−1)!! matchings of `[2d]`; capacity-capped at d ≤ 7.
pub fn enumerate_matchings(d: usize) -> Result<Vec<Matching>> {
    if d > 7 {
        return Err(Error::Capacity(format!(
            "(2d-1)!! matchings at d={d} exceed the d <= 7 cap"
        )));
    }
    let mut out = Vec::new();
    let mut partners = vec![usize::MAX; 2 * d];
    fn rec(partners: &mut Vec<usize>, out: &mut Vec<Matching>) {
        let first = match partners.iter().position(|&p| p == usize::MAX) {
            None => {
                out.push(Matching::from_partners(partners.clone()));
                return;
            }
            Some(i) => i,
        };
        for j in first + 1..partners.len() {
            if partners[j] == usize::MAX {
                partners[first] = j;
                partners[j] = first;
                rec(partners, out);
                partners[first] = usize::MAX;
                partners[j] = usize::MAX;
            }
        }
    }
    rec(&mut partners, &mut out);
    Ok(out)
}

/// Exact brute force: sum the 3^d constrained letter assignments.
pub fn trace_sum(m: &Matching) -> Result<i64> {
    let d = m.d();
    if d > 12 {
        return Err(Error::Capacity(format!(
            "3^d assignments at d={d} exceed the d <= 12 cap"
        )));
    }
    if d == 0 {
        return Ok(1);
    }
    let key = m.canonical_key();
    let mut letters = vec![0usize; d];
    let mut seq = vec![Pauli::X; 2 * d];
    let mut acc = GaussInt::ZERO;
    loop {
        for (i, &pair_id) in key.iter().enumerate() {
            seq[i] = Pauli::NON_IDENTITY[letters[pair_id as usize]];
        }
        acc = acc + trace_of_letter_sequence(&seq);
        // Odometer over the d free letters.
        let mut pos = 0;
        loop {
            if pos == d {
                debug_assert_eq!(acc.im, 0, "matched trace sums are real");
                debug_assert_eq!(acc.re % 2, 0);
                return Ok(acc.re / 2);
            }
            letters[pos] += 1;
            if letters[pos] < 3 {
                break;
            }
            letters[pos] = 0;
            pos += 1;
        }
    }
}

/// Memo table for the rewiring recursion, reusable across calls.
#[derive(Default)]
pub struct TraceSumCache {
    memo: HashMap<Vec<u8>, i64>,
}

impl TraceSumCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.memo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memo.is_empty()
    }
}

/// Exact evaluation through the rewiring recursion with memoization.
///
/// Position 1 (index 0) is eliminated against every other position j with
/// sign (−1)^j (1-based), rewiring j's partner to the partner of position 1;
/// the j = partner(1) term enters with total weight 3.
pub fn trace_sum_recursive(m: &Matching) -> i64 {
    let mut cache = TraceSumCache::new();
    trace_sum_recursive_with(m, &mut cache)
}

pub fn trace_sum_recursive_with(m: &Matching, cache: &mut TraceSumCache) -> i64 {
    let d = m.d();
    if d == 0 {
        return 1;
    }
    if d == 1 {
        return 3;
    }
    let key = m.canonical_key();
    if let Some(&v) = cache.memo.get(&key) {
        return v;
    }

    let len = m.len();
    let k = m.partner(0);
    let mut total = 0i64;
    for j in 1..len {
        // (−1)^{j+1} in 1-based position counting.
        let sign = if (j + 1) % 2 == 0 { 1i64 } else { -1i64 };
        if j == k {
            // Drop positions {0, k}; remaining pairs untouched.
            let sub = restrict(m, &[0, k], None);
            total += 3 * sign * trace_sum_recursive_with(&sub, cache);
        } else {
            // Drop positions {0, j}; rewire j's partner to k.
            let r = m.partner(j);
            let sub = restrict(m, &[0, j], Some((r, k)));
            total += sign * trace_sum_recursive_with(&sub, cache);
        }
    }
    cache.memo.insert(key, total);
    total
}

/// Matching on the positions of `m` minus `drop`, preserving order, with an
/// optional extra pair joining two surviving positions.
fn restrict(m: &Matching, drop: &[usize], join: Option<(usize, usize)>) -> Matching {
    let len = m.len();
    let mut rank = vec![usize::MAX; len];
    let mut next = 0usize;
    for (i, r) in rank.iter_mut().enumerate() {
        if !drop.contains(&i) {
            *r = next;
            next += 1;
        }
    }
    let mut partners = vec![usize::MAX; next];
    for i in 0..len {
        if rank[i] == usize::MAX {
            continue;
        }
        let p = m.partner(i);
        if rank[p] != usize::MAX {
            partners[rank[i]] = rank[p];
        }
    }
    if let Some((a, b)) = join {
        partners[rank[a]] = rank[b];
        partners[rank[b]] = rank[a];
    }
    debug_assert!(partners.iter().all(|&p| p != usize::MAX));
    Matching::from_partners(partners)
}

/// Exact average of Trace_sum over all matchings of `[2d]`; equals 2d+1.
pub fn expected_trace_sum(d: usize) -> Result<f64> {
    let all = enumerate_matchings(d)?;
    let mut sum = 0i128;
    for m in &all {
        sum += trace_sum(m)? as i128;
    }
    let count = all.len() as i128;
    debug_assert_eq!(sum % count, 0, "matching average must be integral");
    Ok((sum / count) as f64 + (sum % count) as f64 / count as f64)
}

/// A draw of r distinct p-subsets plus the pair-ordered matching they induce
/// on every qubit.
#[derive(Clone, Debug)]
pub struct HypergraphSample {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    /// r distinct sorted p-subsets of `[n]`.
    pub tuples: Vec<Vec<u16>>,
    /// Δ(j): number of tuples containing qubit j.
    pub degrees: Vec<u32>,
    /// Per qubit, the induced matching on its 2Δ(j) replica slots.
    pub induced_matchings: Vec<Matching>,
}

/// Uniform distinct tuples and one uniform pair-ordered matching of the 2r
/// replicas; per-qubit matchings pair the two replicas of each tuple.
pub fn sample_hypergraph(n: usize, p: usize, r: usize, seed: u64) -> Result<HypergraphSample> {
    if p == 0 || p > n {
        return Err(Error::Domain(format!("p={p} out of range for n={n}")));
    }
    let total = binomial_u64(n, p);
    if r as u64 > total {
        return Err(Error::Domain(format!(
            "r={r} exceeds the {total} distinct p-subsets"
        )));
    }
    let mut rng = SeqRng::from_stream(CounterRng::new(seed).derive(0x4276));

    let tuples: Vec<Vec<u16>> = if total <= 1_000_000 {
        // Partial Fisher-Yates over the full enumeration.
        let mut all: Vec<Vec<u16>> = Vec::with_capacity(total as usize);
        let mut subset: Vec<u16> = (0..p as u16).collect();
        loop {
            all.push(subset.clone());
            let mut i = p;
            let mut done = true;
            while i > 0 {
                i -= 1;
                if (subset[i] as usize) < n - (p - i) {
                    subset[i] += 1;
                    for j in i + 1..p {
                        subset[j] = subset[j - 1] + 1;
                    }
                    done = false;
                    break;
                }
            }
            if done {
                break;
            }
        }
        for i in 0..r {
            let j = i + rng.below((all.len() - i) as u64) as usize;
            all.swap(i, j);
        }
        all.truncate(r);
        all
    } else {
        // Rejection sampling; collisions are negligible in this regime.
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(r);
        while out.len() < r {
            let mut tuple: Vec<u16> = Vec::with_capacity(p);
            while tuple.len() < p {
                let q = rng.below(n as u64) as u16;
                if !tuple.contains(&q) {
                    tuple.push(q);
                }
            }
            tuple.sort_unstable();
            if seen.insert(tuple.clone()) {
                out.push(tuple);
            }
        }
        out
    };

    // Tuple membership masks (n <= 64 in all supported regimes).
    let masks: Vec<u128> = tuples
        .iter()
        .map(|t| t.iter().fold(0u128, |m, &q| m | (1u128 << q)))
        .collect();

    let mut degrees = vec![0u32; n];
    for t in &tuples {
        for &q in t {
            degrees[q as usize] += 1;
        }
    }

    // Uniform pair-ordered matching: shuffle the 2r replica ids.
    let mut replicas: Vec<u32> = (0..r as u32).flat_map(|i| [i, i]).collect();
    rng.shuffle(&mut replicas);

    let mut induced = Vec::with_capacity(n);
    for j in 0..n {
        let slots: Vec<u32> = replicas
            .iter()
            .copied()
            .filter(|&id| masks[id as usize] >> j & 1 == 1)
            .collect();
        let mut partners = vec![usize::MAX; slots.len()];
        let mut open: HashMap<u32, usize> = HashMap::new();
        for (pos, &id) in slots.iter().enumerate() {
            match open.remove(&id) {
                Some(first) => {
                    partners[first] = pos;
                    partners[pos] = first;
                }
                None => {
                    open.insert(id, pos);
                }
            }
        }
        debug_assert!(open.is_empty());
        induced.push(Matching::from_partners(partners));
    }

    Ok(HypergraphSample {
        n,
        p,
        r,
        tuples,
        degrees,
        induced_matchings: induced,
    })
}

/// Monte Carlo comparison of E[Π_j Trace_sum(M_j)] against E[Π_j (2Δ(j)+1)].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub samples: u64,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub ratio: f64,
    /// ratio^{1/r}: per-tuple growth read-off.
    pub per_r_ratio: f64,
    pub lhs_stderr: f64,
    pub rhs_stderr: f64,
    pub ratio_stderr: f64,
}

/// Per-sample products for one hypergraph draw.
pub fn matching_products(h: &HypergraphSample) -> Result<(f64, f64)> {
    let mut lhs = 1.0f64;
    let mut rhs = 1.0f64;
    for (j, m) in h.induced_matchings.iter().enumerate() {
        if m.d() > 12 {
            return Err(Error::Capacity(format!(
                "qubit {j} has degree {} > 12; Trace_sum is not computable",
                m.d()
            )));
        }
        lhs *= trace_sum(m)? as f64;
        rhs *= (2 * m.d() + 1) as f64;
    }
    Ok((lhs, rhs))
}

/// Estimate the matching-independence ratio by Monte Carlo with bootstrap
/// standard errors. Deterministic in (inputs, seed).
pub fn estimate_gamma_ratio(
    n: usize,
    p: usize,
    r: usize,
    samples: u64,
    seed: u64,
) -> Result<GammaEstimate> {
    if samples == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let master = CounterRng::new(seed).derive(0x6A44);
    let mut lhs_vals = Vec::with_capacity(samples as usize);
    let mut rhs_vals = Vec::with_capacity(samples as usize);
    for s in 0..samples {
        let h = sample_hypergraph(n, p, r, master.u64_at(s))?;
        let (lhs, rhs) = matching_products(&h)?;
        lhs_vals.push(lhs);
        rhs_vals.push(rhs);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let lhs_mean = mean(&lhs_vals);
    let rhs_mean = mean(&rhs_vals);
    let ratio = lhs_mean / rhs_mean;
    let per_r_ratio = if r > 0 {
        ratio.powf(1.0 / r as f64)
    } else {
        1.0
    };

    // Bootstrap over samples.
    let boot_rng = master.derive(0xB007);
    let b = 200usize;
    let mut lhs_b = Vec::with_capacity(b);
    let mut rhs_b = Vec::with_capacity(b);
    let mut ratio_b = Vec::with_capacity(b);
    for bi in 0..b {
        let br = boot_rng.derive(bi as u64);
        let mut ls = 0.0;
        let mut rs = 0.0;
        for k in 0..samples {
            let idx = (br.u64_at(k) % samples) as usize;
            ls += lhs_vals[idx];
            rs += rhs_vals[idx];
        }
        let lm = ls / samples as f64;
        let rm = rs / samples as f64;
        lhs_b.push(lm);
        rhs_b.push(rm);
        ratio_b.push(lm / rm);
    }
    let std = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
    };

    Ok(GammaEstimate {
        n,
        p,
        r,
        samples,
        lhs_mean,
        rhs_mean,
        ratio,
        per_r_ratio,
        lhs_stderr: std(&lhs_b),
        rhs_stderr: std(&rhs_b),
        ratio_stderr: std(&ratio_b),
    })
}

/// CSV export of a sweep of estimates; one row per (p, r) point.
pub fn gamma_sweep_csv(estimates: &[GammaEstimate]) -> String {
    let mut out = String::from(
        "n,p,r,samples,lhs_mean,rhs_mean,ratio,per_r_ratio,lhs_stderr,rhs_stderr,ratio_stderr\n",
    );
    for e in estimates {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            e.n,
            e.p,
            e.r,
            e.samples,
            e.lhs_mean,
            e.rhs_mean,
            e.ratio,
            e.per_r_ratio,
            e.lhs_stderr,
            e.rhs_stderr,
            e.ratio_stderr
        ));
    }
    out
}

/// Empirical degree marginal versus the Poisson(pr/n) reference.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PoissonReport {
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub samples: u64,
    pub lambda: f64,
    pub empirical_mean: f64,
    pub empirical_pmf: Vec<f64>,
    pub poisson_pmf: Vec<f64>,
    pub tv_distance: f64,
}

/// Distribution of Δ(1) (the first qubit, by exchangeability) across draws.
pub fn poisson_degree_check(
    n: usize,
    p: usize,
    r: usize,
    samples: u64,
    seed: u64,
) -> Result<PoissonReport> {
    if samples == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let master = CounterRng::new(seed).derive(0x7015);
    let lambda = p as f64 * r as f64 / n as f64;
    let mut hist: Vec<u64> = Vec::new();
    let mut degree_sum = 0u64;
    for s in 0..samples {
        let h = sample_hypergraph(n, p, r, master.u64_at(s))?;
        let d = h.degrees[0] as usize;
        if d >= hist.len() {
            hist.resize(d + 1, 0);
        }
        hist[d] += 1;
        degree_sum += d as u64;
    }
    let sigma = lambda.sqrt();
    let k_max = hist
        .len()
        .max((lambda + 10.0 * sigma + 10.0).ceil() as usize);

    let mut poisson = Vec::with_capacity(k_max);
    let mut q = (-lambda).exp();
    for k in 0..k_max {
        poisson.push(q);
        q *= lambda / (k + 1) as f64;
    }
    let empirical: Vec<f64> = (0..k_max)
        .map(|k| hist.get(k).copied().unwrap_or(0) as f64 / samples as f64)
        .collect();
    let mut tv = 0.0;
    for k in 0..k_max {
        tv += (empirical[k] - poisson[k]).abs();
    }
    let tail = (1.0 - poisson.iter().sum::<f64>()).max(0.0);
    tv = 0.5 * (tv + tail);

    Ok(PoissonReport {
        n,
        p,
        r,
        samples,
        lambda,
        empirical_mean: degree_sum as f64 / samples as f64,
        empirical_pmf: empirical,
        poisson_pmf: poisson,
        tv_distance: tv,
    })
}

/// Grid for the β minimization.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BetaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Inputs to the annealed bound g(β,p) = C/β + βγ/2 + log(1+pγβ²)/β.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundConfig {
    pub p: u64,
    pub gamma: f64,
    /// The O_p(1) constant; must exceed log 2.
    pub c: f64,
    pub grid: BetaGrid,
}

impl BoundConfig {
    /// Default grid: log-spaced around the witness point √(2 log p / γ).
    pub fn new(p: u64, gamma: f64, c: f64) -> Result<Self> {
        let witness = witness_beta(p, gamma)?;
        let cfg = BoundConfig {
            p,
            gamma,
            c,
            grid: BetaGrid {
                min: witness / 50.0,
                max: witness * 50.0,
                points: 201,
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 1.0 {
            return Err(Error::Parameter(format!("gamma {} < 1", self.gamma)));
        }
        if self.c <= std::f64::consts::LN_2 {
            return Err(Error::Parameter(format!(
                "C = {} must exceed log 2",
                self.c
            )));
        }
        if self.p < 2 {
            return Err(Error::Parameter("p must be at least 2".into()));
        }
        let w = witness_beta(self.p, self.gamma)?;
        if !(self.grid.min > 0.0 && self.grid.min <= w && w <= self.grid.max) {
            return Err(Error::Parameter(format!(
                "grid [{}, {}] must cover the witness beta {w}",
                self.grid.min, self.grid.max
            )));
        }
        if self.grid.points < 3 {
            return Err(Error::Parameter("grid needs at least 3 points".into()));
        }
        Ok(())
    }
}

/// g(β,p) with the given constants.
pub fn g_value(beta: f64, p: u64, gamma: f64, c: f64) -> f64 {
    c / beta + beta * gamma / 2.0 + (1.0 + p as f64 * gamma * beta * beta).ln() / beta
}

/// The witness point β = √(2 log p / γ).
pub fn witness_beta(p: u64, gamma: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::Parameter("p must be at least 2".into()));
    }
    Ok((2.0 * (p as f64).ln() / gamma).sqrt())
}

/// The three summands of g at the witness point, in closed form:
/// `C·√(γ/(2 log p))`, `√(γ log p / 2)`, `log(1 + 2p log p)·√(γ/(2 log p))`.
pub fn witness_summands(p: u64, gamma: f64, c: f64) -> Result<[f64; 3]> {
    if p < 2 {
        return Err(Error::Parameter("p must be at least 2".into()));
    }
    let logp = (p as f64).ln();
    let scale = (gamma / (2.0 * logp)).sqrt();
    Ok([
        c * scale,
        (gamma * logp / 2.0).sqrt(),
        (1.0 + 2.0 * p as f64 * logp).ln() * scale,
    ])
}

/// Result of minimizing g over β.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GBound {
    pub beta_star: f64,
    pub g_min: f64,
    /// The annealed upper bound itself (= g_min).
    pub bound_value: f64,
    /// g_min / √(2 γ log p).
    pub ratio_to_sqrt: f64,
    pub witness_beta: f64,
    pub witness_value: f64,
}

/// Grid search plus golden-section refinement of g over β.
pub fn minimize_g(config: &BoundConfig) -> Result<GBound> {
    config.validate()?;
    let BoundConfig { p, gamma, c, grid } = *config;
    let log_min = grid.min.ln();
    let log_max = grid.max.ln();
    let mut best_idx = 0usize;
    let mut best = f64::INFINITY;
    let betas: Vec<f64> = (0..grid.points)
        .map(|i| (log_min + (log_max - log_min) * i as f64 / (grid.points - 1) as f64).exp())
        .collect();
    for (i, &b) in betas.iter().enumerate() {
        let v = g_value(b, p, gamma, c);
        if v < best {
            best = v;
            best_idx = i;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let mut lo = betas[best_idx.saturating_sub(1)];
    let mut hi = betas[(best_idx + 1).min(betas.len() - 1)];
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if g_value(m1, p, gamma, c) <= g_value(m2, p, gamma, c) {
            hi = m2;
        } else {
            lo = m1;
        }
        if (hi - lo) / hi < 1e-14 {
            break;
        }
    }
    let beta_star = 0.5 * (lo + hi);
    let g_min = g_value(beta_star, p, gamma, c).min(best);
    let wb = witness_beta(p, gamma)?;
    let wv = g_value(wb, p, gamma, c);
    let reference = (2.0 * gamma * (p as f64).ln()).sqrt();
    Ok(GBound {
        beta_star,
        g_min,
        bound_value: g_min,
        ratio_to_sqrt: g_min / reference,
        witness_beta: wb,
        witness_value: wv,
    })
}
