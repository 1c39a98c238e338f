//! Product-state geometry and optimization.
//!
//! A pure product state is n Bloch unit vectors. Disorder covariance between
//! two product states reduces to the degree-p elementary symmetric polynomial
//! of the per-qubit overlaps `R_k = n̂_k · m̂_k = 2|⟨φ^(k)|ψ^(k)⟩|² − 1`,
//! normalized by C(n,p). The module also builds deterministic hemisphere
//! packing nets (latitude bands on the cap z ≥ 0.01), counts energy
//! exceedances over the induced product net, and maximizes ⟨φ|H|φ⟩ by
//! coordinate ascent on the Bloch vectors.

use crate::binomial;
use crate::error::{Error, Result};
use crate::model::DisorderSample;
use crate::rng::{CounterRng, SeqRng};
use serde::{Deserialize, Serialize};

const UNIT_TOL: f64 = 1e-12;

fn dot3(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn check_unit(v: [f64; 3]) -> Result<()> {
    let norm = dot3(v, v).sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Validation(format!(
            "Bloch vector norm {norm} deviates from 1 beyond 1e-12"
        )));
    }
    Ok(())
}

/// n Bloch unit vectors labelling a pure product state.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochProductState {
    vectors: Vec<[f64; 3]>,
}

impl BlochProductState {
    pub fn new(vectors: Vec<[f64; 3]>) -> Result<Self> {
        for &v in &vectors {
            check_unit(v)?;
        }
        Ok(BlochProductState { vectors })
    }

    /// All qubits pointing along +z (the |0...0> state).
    pub fn all_z(n: usize) -> Self {
        BlochProductState {
            vectors: vec![[0.0, 0.0, 1.0]; n],
        }
    }

    /// Deterministic pseudo-random unit vectors from a seed.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = SeqRng::from_stream(CounterRng::new(seed).derive(0xB10C));
        BlochProductState {
            vectors: (0..n).map(|_| rng.unit_vector3()).collect(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn vector(&self, qubit: usize) -> [f64; 3] {
        self.vectors[qubit]
    }

    pub fn vectors(&self) -> &[[f64; 3]] {
        &self.vectors
    }

    pub fn set_vector(&mut self, qubit: usize, v: [f64; 3]) -> Result<()> {
        check_unit(v)?;
        self.vectors[qubit] = v;
        Ok(())
    }

    /// The amplitude-level state |φ⟩ = ⊗_k |n̂_k⟩ with ⟨n̂|σ|n̂⟩ = n̂.
    pub fn to_state_vector(&self) -> Result<crate::spectral::StateVector> {
        let n = self.qubit_count();
        if n > crate::DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity(format!(
                "amplitude form on {n} qubits exceeds limit {}",
                crate::DENSE_QUBIT_LIMIT
            )));
        }
        // Per qubit: (cos(θ/2), e^{iφ} sin(θ/2)) for polar angle θ, azimuth φ.
        let singles: Vec<[num_complex::Complex64; 2]> = self
            .vectors
            .iter()
            .map(|&[x, y, z]| {
                let theta = z.clamp(-1.0, 1.0).acos();
                let phi = y.atan2(x);
                let (s, c) = (0.5 * theta).sin_cos();
                [
                    num_complex::Complex64::new(c, 0.0),
                    num_complex::Complex64::new(phi.cos() * s, phi.sin() * s),
                ]
            })
            .collect();
        let dim = 1usize << n;
        let amps = nalgebra::DVector::from_iterator(
            dim,
            (0..dim).map(|b| {
                let mut a = num_complex::Complex64::new(1.0, 0.0);
                for (k, single) in singles.iter().enumerate() {
                    a *= single[(b >> k) & 1];
                }
                a
            }),
        );
        crate::spectral::StateVector::from_unnormalized(n, amps)
    }
}

/// Bloch overlap u·v, equal to 2|⟨φ_u|ψ_v⟩|² − 1 of the corresponding states.
pub fn bloch_overlap(u: [f64; 3], v: [f64; 3]) -> Result<f64> {
    check_unit(u)?;
    check_unit(v)?;
    Ok(dot3(u, v))
}

/// Per-qubit overlaps R_k feeding the covariance formula.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapProfile {
    r: Vec<f64>,
}

impl OverlapProfile {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if r.iter().any(|&x| x.abs() > 1.0 + 1e-12) {
            return Err(Error::Validation("overlap outside [-1, 1]".into()));
        }
        Ok(OverlapProfile { r })
    }

    pub fn from_states(a: &BlochProductState, b: &BlochProductState) -> Result<Self> {
        if a.qubit_count() != b.qubit_count() {
            return Err(Error::Dimension("states on different qubit counts".into()));
        }
        let r = a
            .vectors()
            .iter()
            .zip(b.vectors())
            .map(|(&u, &v)| dot3(u, v))
            .collect();
        OverlapProfile::new(r)
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }
}

/// Elementary symmetric polynomial E_p(x_1..x_n) by the O(n·p) recurrence.
pub fn elementary_symmetric(values: &[f64], p: usize) -> f64 {
    if p > values.len() {
        return 0.0;
    }
    // e[k] after processing m values holds E_k(x_1..x_m).
    let mut e = vec![0.0f64; p + 1];
    e[0] = 1.0;
    for &x in values {
        for k in (1..=p).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e[p]
}

/// Disorder covariance of two product states: E_p(R)/C(n,p).
pub fn covariance(p: usize, profile: &OverlapProfile) -> Result<f64> {
    let n = profile.len();
    if p > n {
        return Err(Error::Domain(format!("p={p} exceeds n={n}")));
    }
    Ok(elementary_symmetric(profile.values(), p) / binomial(n, p))
}

/// Analytic covariance versus a Gaussian-disorder Monte Carlo estimate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub analytic: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Estimate E[⟨φ|H|φ⟩⟨ψ|H|ψ⟩] over fresh Gaussian disorder draws and compare
/// with the elementary-symmetric formula.
pub fn covariance_matches_monte_carlo(
    sample_template: &DisorderSample,
    state_a: &BlochProductState,
    state_b: &BlochProductState,
    samples: u64,
    seed: u64,
) -> Result<CovarianceCheck> {
    let cfg = *sample_template.config();
    if cfg.n > 10 {
        return Err(Error::Domain(
            "covariance Monte Carlo is capped at n <= 10".into(),
        ));
    }
    if state_a.qubit_count() != cfg.n || state_b.qubit_count() != cfg.n {
        return Err(Error::Dimension("state qubit count mismatch".into()));
    }
    let profile = OverlapProfile::from_states(state_a, state_b)?;
    let analytic = covariance(cfg.p, &profile)?;

    let nterms = sample_template.table().terms().len();
    let wa: Vec<f64> = (0..nterms)
        .map(|i| sample_template.term_weight(i, state_a))
        .collect();
    let wb: Vec<f64> = (0..nterms)
        .map(|i| sample_template.term_weight(i, state_b))
        .collect();
    let norm = cfg.normalization();

    let rng = CounterRng::new(seed).derive(0xC0FA);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for s in 0..samples {
        let draw = rng.derive(s);
        let mut ea = 0.0;
        let mut eb = 0.0;
        for i in 0..nterms {
            let g = draw.gaussian_at(i as u64);
            ea += g * wa[i];
            eb += g * wb[i];
        }
        let x = (norm * ea) * (norm * eb);
        sum += x;
        sum2 += x * x;
    }
    let empirical = sum / samples as f64;
    let var = (sum2 / samples as f64 - empirical * empirical).max(0.0);
    let stderr = (var / samples as f64).sqrt();
    Ok(CovarianceCheck {
        analytic,
        empirical,
        stderr,
        samples,
    })
}

/// Deterministic packing of the spherical cap z ≥ 0.01: pairwise |u·v| ≤ 1−ε.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PackingNet {
    points: Vec<[f64; 3]>,
    epsilon: f64,
}

impl PackingNet {
    /// Wrap explicit points, verifying every invariant.
    pub fn from_points(points: Vec<[f64; 3]>, epsilon: f64) -> Result<Self> {
        let net = PackingNet { points, epsilon };
        net.verify()?;
        Ok(net)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Exact pairwise and cap checks.
    pub fn verify(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::Parameter(format!(
                "epsilon {} outside (0, 0.5]",
                self.epsilon
            )));
        }
        for &p in &self.points {
            check_unit(p)?;
            if p[2] < 0.01 {
                return Err(Error::Validation(format!(
                    "point below the cap: z = {}",
                    p[2]
                )));
            }
        }
        let bound = 1.0 - self.epsilon;
        for i in 0..self.points.len() {
            for j in i + 1..self.points.len() {
                let d = dot3(self.points[i], self.points[j]).abs();
                if d > bound {
                    return Err(Error::Validation(format!(
                        "pair ({i},{j}) has |dot| = {d} > {bound}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// CSV export: x,y,z rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,z\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p[0], p[1], p[2]));
        }
        out
    }
}

/// Latitude-banded packing construction.
///
/// Rings are spaced by the chord condition with a tiny relative margin, and a
/// greedy filter drops any candidate that would violate the pairwise bound
/// (this only bites near the cap boundary and at epsilon = 1/2).
pub fn build_packing_net(epsilon: f64) -> Result<PackingNet> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Parameter(format!(
            "epsilon {epsilon} outside (0, 0.5]"
        )));
    }
    let eps_inner = epsilon * (1.0 + 1e-9);
    let dtheta = (1.0 - eps_inner).acos();
    let theta_cap = (0.01f64).acos();
    let golden = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());

    let mut candidates: Vec<[f64; 3]> = vec![[0.0, 0.0, 1.0]];
    let mut ring = 1usize;
    loop {
        let theta = ring as f64 * dtheta;
        if theta > theta_cap {
            break;
        }
        let (s, c) = theta.sin_cos();
        let ratio = eps_inner / (s * s);
        let m = if ratio >= 2.0 {
            1
        } else {
            let dphi = (1.0 - ratio).acos();
            ((2.0 * std::f64::consts::PI) / dphi).floor().max(1.0) as usize
        };
        let offset = golden * ring as f64;
        for k in 0..m {
            let phi = offset + 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            candidates.push([s * phi.cos(), s * phi.sin(), c]);
        }
        ring += 1;
    }

    let bound = 1.0 - epsilon;
    let mut points: Vec<[f64; 3]> = Vec::new();
    'next: for cand in candidates {
        if cand[2] < 0.01 {
            continue;
        }
        for &p in &points {
            if dot3(cand, p).abs() > bound {
                continue 'next;
            }
        }
        points.push(cand);
    }

    let net = PackingNet { points, epsilon };
    net.verify()?;
    Ok(net)
}

/// Default cap on the number of product-net states enumerated.
pub const NET_ENUMERATION_LIMIT: u64 = 10_000_000;

/// Count product states over the net (points ∪ negated points per qubit) whose
/// energy satisfies `√n·⟨μ|H|μ⟩ ≥ threshold·n`, i.e. `⟨μ|H|μ⟩ ≥ threshold·√n`.
///
/// States are enumerated in mixed-radix Gray order so each step re-evaluates
/// only the terms touching the qubit whose direction changed.
pub fn count_net_exceedances(
    sample: &DisorderSample,
    net: &PackingNet,
    threshold: f64,
) -> Result<u64> {
    count_net_exceedances_with_limit(sample, net, threshold, NET_ENUMERATION_LIMIT)
}

pub fn count_net_exceedances_with_limit(
    sample: &DisorderSample,
    net: &PackingNet,
    threshold: f64,
    limit: u64,
) -> Result<u64> {
    let n = sample.config().n;
    let q = 2 * net.size();
    let total = (q as f64).powi(n as i32);
    if total > limit as f64 {
        return Err(Error::Capacity(format!(
            "net enumeration would visit q^n = {total:.3e} states (limit {limit})"
        )));
    }
    if q == 0 {
        return Err(Error::Validation("empty net".into()));
    }

    let mut dirs: Vec<[f64; 3]> = net.points().to_vec();
    dirs.extend(net.points().iter().map(|p| [-p[0], -p[1], -p[2]]));

    let norm = sample.config().normalization();
    let cutoff = threshold * (n as f64).sqrt();

    // Dense coefficient view plus per-qubit lists of nonzero terms.
    let nterms = sample.table().terms().len();
    let mut coeffs = vec![0.0f64; nterms];
    for (i, c) in sample.iter_nonzero() {
        coeffs[i] = c;
    }
    let mut by_qubit: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, _) in sample.iter_nonzero() {
        let term = &sample.table().terms()[i];
        for (&qb, &l) in term.qubits().iter().zip(term.letters()) {
            if l != crate::pauli::Pauli::I {
                by_qubit[qb as usize].push(i as u32);
            }
        }
    }

    let mut digits = vec![0usize; n];
    let mut state = BlochProductState {
        vectors: vec![dirs[0]; n],
    };
    let mut energy = sample.product_energy(&state)?;

    // Loopless reflected mixed-radix Gray enumeration (uniform radix q).
    let mut focus: Vec<usize> = (0..=n).collect();
    let mut dir: Vec<i64> = vec![1; n];
    let mut count = 0u64;
    let mut visits = 0u64;
    let total_u = total as u64;

    loop {
        if energy >= cutoff {
            count += 1;
        }
        visits += 1;
        if visits == total_u {
            break;
        }
        let j = focus[0];
        focus[0] = 0;
        if j == n {
            break;
        }
        let old = dirs[digits[j]];
        digits[j] = (digits[j] as i64 + dir[j]) as usize;
        let new = dirs[digits[j]];
        if digits[j] == 0 || digits[j] == q - 1 {
            dir[j] = -dir[j];
            focus[j] = focus[j + 1];
            focus[j + 1] = j + 1;
        }
        // Energy delta from changing qubit j.
        let mut delta = 0.0;
        for &ti in &by_qubit[j] {
            let term = &sample.table().terms()[ti as usize];
            let mut w_rest = 1.0;
            let mut axis = 0usize;
            for (&qb, &l) in term.qubits().iter().zip(term.letters()) {
                let a = match l {
                    crate::pauli::Pauli::I => continue,
                    crate::pauli::Pauli::X => 0,
                    crate::pauli::Pauli::Y => 1,
                    crate::pauli::Pauli::Z => 2,
                };
                if qb as usize == j {
                    axis = a;
                } else {
                    w_rest *= state.vectors[qb as usize][a];
                }
            }
            delta += coeffs[ti as usize] * w_rest * (new[axis] - old[axis]);
        }
        state.vectors[j] = new;
        energy += norm * delta;
        // Periodic resync against float drift along the Gray walk.
        if visits.is_multiple_of(16_384) {
            energy = sample.product_energy(&state)?;
        }
    }

    Ok(count)
}

/// Result of a coordinate-ascent run.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub state: BlochProductState,
    pub energy: f64,
    /// Energy after each completed sweep, starting with the initial energy.
    pub sweep_trace: Vec<f64>,
    pub sweeps: usize,
}

impl Optimized {
    /// CSV export: sweep,energy rows.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("sweep,energy\n");
        for (i, e) in self.sweep_trace.iter().enumerate() {
            out.push_str(&format!("{i},{e}\n"));
        }
        out
    }
}

/// Reusable coordinate-ascent machinery over one disorder instance.
pub struct CoordinateAscent<'a> {
    sample: &'a DisorderSample,
    coeffs: Vec<f64>,
    by_qubit: Vec<Vec<u32>>,
}

impl<'a> CoordinateAscent<'a> {
    pub fn new(sample: &'a DisorderSample) -> Self {
        let n = sample.config().n;
        let nterms = sample.table().terms().len();
        let mut coeffs = vec![0.0f64; nterms];
        let mut by_qubit: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, c) in sample.iter_nonzero() {
            coeffs[i] = c;
            let term = &sample.table().terms()[i];
            for (&qb, &l) in term.qubits().iter().zip(term.letters()) {
                if l != crate::pauli::Pauli::I {
                    by_qubit[qb as usize].push(i as u32);
                }
            }
        }
        CoordinateAscent {
            sample,
            coeffs,
            by_qubit,
        }
    }

    /// Local field h at `qubit`: the energy is h·n̂ + const in that vector.
    pub fn local_field(&self, state: &BlochProductState, qubit: usize) -> [f64; 3] {
        let mut field = [0.0f64; 3];
        for &ti in &self.by_qubit[qubit] {
            let term = &self.sample.table().terms()[ti as usize];
            let mut w_rest = 1.0;
            let mut axis = 0usize;
            for (&qb, &l) in term.qubits().iter().zip(term.letters()) {
                let a = match l {
                    crate::pauli::Pauli::I => continue,
                    crate::pauli::Pauli::X => 0,
                    crate::pauli::Pauli::Y => 1,
                    crate::pauli::Pauli::Z => 2,
                };
                if qb as usize == qubit {
                    axis = a;
                } else {
                    w_rest *= state.vectors[qb as usize][a];
                }
            }
            field[axis] += self.coeffs[ti as usize] * w_rest;
        }
        field
    }

    /// One ascent update: n̂ ← h/‖h‖; a vanishing field keeps the current
    /// vector. Returns the (non-negative) energy gain of the update.
    pub fn update(&self, state: &mut BlochProductState, qubit: usize) -> f64 {
        let field = self.local_field(state, qubit);
        let fnorm = dot3(field, field).sqrt();
        if fnorm <= 0.0 {
            return 0.0;
        }
        let old = state.vectors[qubit];
        state.vectors[qubit] = [field[0] / fnorm, field[1] / fnorm, field[2] / fnorm];
        self.sample.config().normalization() * (fnorm - dot3(old, field))
    }
}

/// Coordinate ascent on ⟨φ|H|φ⟩.
///
/// The energy is linear in each Bloch vector given the others, so each qubit
/// update sets n̂_i to the normalized local field; a zero local field keeps
/// the current vector. Every update is non-decreasing; the sweep trace is
/// re-anchored with an exact energy evaluation after each sweep.
pub fn optimize_product_state(
    sample: &DisorderSample,
    init: &BlochProductState,
    max_sweeps: usize,
    tol: f64,
) -> Result<Optimized> {
    let n = sample.config().n;
    if init.qubit_count() != n {
        return Err(Error::Dimension(
            "initial state qubit count mismatch".into(),
        ));
    }
    let ascent = CoordinateAscent::new(sample);

    let mut state = init.clone();
    let mut energy = sample.product_energy(&state)?;
    let mut trace = vec![energy];
    let mut sweeps = 0;

    for _ in 0..max_sweeps {
        let before = energy;
        for j in 0..n {
            ascent.update(&mut state, j);
        }
        sweeps += 1;
        energy = sample.product_energy(&state)?;
        trace.push(energy);
        if energy - before < tol {
            break;
        }
    }

    Ok(Optimized {
        state,
        energy,
        sweep_trace: trace,
        sweeps,
    })
}

/// Best of `restarts` coordinate-ascent runs from seeded random initials.
pub fn optimize_multistart(
    sample: &DisorderSample,
    restarts: usize,
    seed: u64,
    max_sweeps: usize,
    tol: f64,
) -> Result<Optimized> {
    let n = sample.config().n;
    let mut best: Option<Optimized> = None;
    for r in 0..restarts.max(1) {
        let init = BlochProductState::random(n, crate::rng::mix_seed(&[seed, 0x0971, r as u64]));
        let run = optimize_product_state(sample, &init, max_sweeps, tol)?;
        if best.as_ref().is_none_or(|b| run.energy > b.energy) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}
