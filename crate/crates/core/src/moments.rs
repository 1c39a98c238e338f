//! Disorder-variance statistics of individual states.
//!
//! For a state |φ⟩ the variance of ⟨φ|H|φ⟩ over the disorder is the
//! normalized sum of squared Pauli expectations; it is exactly 1 for product
//! states, averages to `3^p/(2^n+1)` over Haar states, and expands in the
//! average subsystem purities `A_k` as `Σ_k (−1)^{p−k} 2^k C(p,k) A_k`.
//! In the adjusted (up-to-p-local) model the variance is the average p-subset
//! purity, which product states saturate at 1.

use crate::binomial;
use crate::error::{Error, Result};
use crate::model::{ModelConfig, TermTable};
use crate::rng::mix_seed;
use crate::spectral::{haar_state, partial_trace_state, StateVector};
use crate::DENSE_QUBIT_LIMIT;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// ⟨φ|P|φ⟩ for a letterwise word given by (xmask, zmask, y_count).
fn word_expectation(state: &StateVector, xmask: u64, zmask: u64, y_count: u32) -> f64 {
    let amps = state.amplitudes();
    let phase = match y_count % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for b in 0..amps.len() {
        let sign = if (b as u64 & zmask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        acc += amps[b ^ xmask as usize].conj() * amps[b] * sign;
    }
    (acc * phase).re
}

/// Exact E[⟨φ|H|φ⟩²] over the disorder: normalization² · Σ_terms ⟨φ|P|φ⟩².
pub fn state_variance(state: &StateVector, config: &ModelConfig) -> Result<f64> {
    config.validate()?;
    let n = config.n;
    if state.qubit_count() != n {
        return Err(Error::Dimension(format!(
            "state on {} qubits vs model on {n}",
            state.qubit_count()
        )));
    }
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "state variance on {n} qubits exceeds limit {DENSE_QUBIT_LIMIT}"
        )));
    }
    let table = TermTable::new(*config)?;
    let norm = config.normalization();
    let mut acc = 0.0;
    for term in table.terms() {
        let mut xmask = 0u64;
        let mut zmask = 0u64;
        let mut y_count = 0u32;
        for (&q, &l) in term.qubits().iter().zip(term.letters()) {
            let (xb, zb) = l.xz();
            if xb {
                xmask |= 1 << q;
            }
            if zb {
                zmask |= 1 << q;
            }
            if l == crate::pauli::Pauli::Y {
                y_count += 1;
            }
        }
        let e = word_expectation(state, xmask, zmask, y_count);
        acc += e * e;
    }
    Ok(acc * norm * norm)
}

/// Monte Carlo average of [`state_variance`] over Haar states.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HaarVarianceReport {
    pub n: usize,
    pub p: usize,
    pub samples: u64,
    pub empirical_mean: f64,
    /// The closed form 3^p / (2^n + 1).
    pub target: f64,
    pub stderr: f64,
}

pub fn haar_variance_check(
    n: usize,
    p: usize,
    samples: u64,
    seed: u64,
) -> Result<HaarVarianceReport> {
    if samples == 0 {
        return Err(Error::Parameter("sample count must be positive".into()));
    }
    let config = ModelConfig::new(n, p)?;
    let target = 3.0f64.powi(p as i32) / ((1u64 << n) as f64 + 1.0);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for s in 0..samples {
        let psi = haar_state(n, mix_seed(&[seed, 0x4AA3, s]))?;
        let v = state_variance(&psi, &config)?;
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / samples as f64;
    let var = (sum2 / samples as f64 - mean * mean).max(0.0);
    Ok(HaarVarianceReport {
        n,
        p,
        samples,
        empirical_mean: mean,
        target,
        stderr: (var / samples as f64).sqrt(),
    })
}

/// Average subsystem purities A_0..A_p (A_0 = 1 by convention).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityProfile {
    pub n: usize,
    pub p: usize,
    /// `a[k]` is the average of Tr(ρ_S²) over all k-qubit subsets S.
    pub a: Vec<f64>,
}

/// Cap on the number of subsets enumerated per order k.
const SUBSET_CAP: f64 = 100_000.0;

fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 {
        f(&[]);
        return;
    }
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        f(&subset);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if subset[i] < n - (k - i) {
                subset[i] += 1;
                for j in i + 1..k {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Exact subset-averaged purities by full enumeration.
pub fn compute_purity_profile(state: &StateVector, p: usize) -> Result<PurityProfile> {
    let n = state.qubit_count();
    if p == 0 || p > n {
        return Err(Error::Domain(format!("p={p} out of range for n={n}")));
    }
    let mut a = vec![1.0f64];
    for k in 1..=p {
        if binomial(n, k) > SUBSET_CAP {
            return Err(Error::Capacity(format!(
                "C({n},{k}) subsets exceed the enumeration cap"
            )));
        }
        let mut total = 0.0;
        let mut count = 0u64;
        for_each_subset(n, k, |s| {
            let rho = partial_trace_state(state, s).expect("valid subset");
            total += rho.purity();
            count += 1;
        });
        a.push(total / count as f64);
    }
    Ok(PurityProfile { n, p, a })
}

/// Variance via the purity expansion Σ_k (−1)^{p−k} 2^k C(p,k) A_k.
pub fn purity_variance(state: &StateVector, p: usize) -> Result<f64> {
    let profile = compute_purity_profile(state, p)?;
    Ok(purity_variance_from_profile(&profile))
}

pub fn purity_variance_from_profile(profile: &PurityProfile) -> f64 {
    let p = profile.p;
    let mut acc = 0.0;
    for (k, &ak) in profile.a.iter().enumerate() {
        let sign = if (p - k).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * 2.0f64.powi(k as i32) * binomial(p, k) * ak;
    }
    acc
}

/// Adjusted-model variance: the average p-subset purity A_p, in (0, 1].
pub fn adjusted_variance(state: &StateVector, p: usize) -> Result<f64> {
    let profile = compute_purity_profile(state, p)?;
    Ok(profile.a[p])
}

/// CSV export: one row of variance statistics per state.
pub fn variance_csv_header() -> &'static str {
    "n,p,seed,state_variance,purity_variance,adjusted_variance\n"
}

/// All three variance statistics of one state as a CSV row.
pub fn variance_csv_row(state: &StateVector, config: &ModelConfig, seed: u64) -> Result<String> {
    let sv = state_variance(state, config)?;
    let pv = purity_variance(state, config.p)?;
    let av = adjusted_variance(state, config.p)?;
    Ok(format!("{},{},{seed},{sv},{pv},{av}\n", config.n, config.p))
}
