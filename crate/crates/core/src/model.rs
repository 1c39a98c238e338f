//! The random p-local Hamiltonian ensemble.
//!
//! `H_{n,p} = C(n,p)^{-1/2} Σ_{ī∈I_p^n} Σ_{ā∈{X,Y,Z}^p} α[ī;ā] P_ī^ā`, with
//! i.i.d. disorder `α`. The adjusted variant sums letters over `{I,X,Y,Z}^p`
//! (all-identity tuple included) with normalization `2^{-p/2} C(n,p)^{-1/2}`.
//!
//! Terms are enumerated in a canonical order (lexicographic in
//! (qubit tuple, letter tuple)) and coefficient `i` is read from the counter
//! stream `(seed, i)`, so samples are bit-reproducible and sparse/dense draws
//! of the same seed agree on shared terms.

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliTerm};
use crate::product::BlochProductState;
use crate::rng::CounterRng;
use crate::spectral::{DenseOperator, LinearOp};
use crate::{binomial, DENSE_QUBIT_LIMIT, MATRIX_FREE_QUBIT_LIMIT};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

/// Disorder distribution. All three are centered with unit variance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisorderKind {
    Gaussian,
    Rademacher,
    /// Zero with probability `1 - 3^{-p} d_n / C(n,p-1)`, otherwise
    /// `±sqrt(3^p C(n,p-1) / d_n)` with equal probability. In the
    /// per-sign-probability parameterization this is
    /// `p_n = (1/2)·3^{-p}·d_n/C(n,p-1)`; `d_n` is the average number of
    /// nonzero couplings per qubit. Requires `d_n ≤ 3^p C(n,p-1)`.
    SparseRademacher {
        average_degree: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    #[serde(flatten)]
    pub kind: DisorderKind,
    pub seed: u64,
}

/// Which ensemble: standard (letters in {X,Y,Z}) or adjusted (up-to-p-local).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub include_identity_letters: bool,
}

impl ModelConfig {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        let cfg = ModelConfig {
            n,
            p,
            include_identity_letters: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn adjusted(n: usize, p: usize) -> Result<Self> {
        let cfg = ModelConfig {
            n,
            p,
            include_identity_letters: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 || self.p > self.n {
            return Err(Error::Domain(format!(
                "locality p={} must satisfy 2 <= p <= n={}",
                self.p, self.n
            )));
        }
        Ok(())
    }

    /// Coupling normalization in front of each coefficient:
    /// `C(n,p)^{-1/2}` for the standard model, `2^{-p/2} C(n,p)^{-1/2}` adjusted.
    pub fn normalization(&self) -> f64 {
        let base = binomial(self.n, self.p).sqrt().recip();
        if self.include_identity_letters {
            base / 2.0f64.powi(self.p as i32).sqrt()
        } else {
            base
        }
    }

    pub fn letters_per_site(&self) -> usize {
        if self.include_identity_letters {
            4
        } else {
            3
        }
    }

    pub fn term_count(&self) -> usize {
        let letters = (self.letters_per_site() as f64).powi(self.p as i32);
        (letters * binomial(self.n, self.p)) as usize
    }
}

/// Per-term masks for the fast matrix-free and product-state paths.
#[derive(Clone, Copy, Debug)]
struct TermMask {
    xmask: u64,
    zmask: u64,
    /// i^{y_count}, the intrinsic phase of the letterwise word.
    phase: Complex64,
}

/// Canonical enumeration of all terms of a model, shared across samples.
#[derive(Debug)]
pub struct TermTable {
    config: ModelConfig,
    terms: Vec<PauliTerm>,
    masks: Vec<TermMask>,
    /// Indices of terms whose support contains each qubit.
    by_qubit: Vec<Vec<u32>>,
}

impl TermTable {
    pub fn new(config: ModelConfig) -> Result<Arc<Self>> {
        config.validate()?;
        let terms = enumerate_terms(&config)?;
        let mut masks = Vec::with_capacity(terms.len());
        let mut by_qubit = vec![Vec::new(); config.n];
        for (idx, term) in terms.iter().enumerate() {
            let mut xmask = 0u64;
            let mut zmask = 0u64;
            let mut y_count = 0u32;
            for (&q, &l) in term.qubits().iter().zip(term.letters()) {
                let (xb, zb) = l.xz();
                if config.n <= 64 {
                    if xb {
                        xmask |= 1 << q;
                    }
                    if zb {
                        zmask |= 1 << q;
                    }
                }
                if l == Pauli::Y {
                    y_count += 1;
                }
                if l != Pauli::I {
                    by_qubit[q as usize].push(idx as u32);
                }
            }
            let phase = match y_count % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            masks.push(TermMask {
                xmask,
                zmask,
                phase,
            });
        }
        Ok(Arc::new(TermTable {
            config,
            terms,
            masks,
            by_qubit,
        }))
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn term_indices_touching(&self, qubit: usize) -> &[u32] {
        &self.by_qubit[qubit]
    }
}

/// Ordered term enumeration: qubit tuples lexicographic, letter tuples
/// lexicographic (I < X < Y < Z) within each tuple.
pub fn enumerate_terms(config: &ModelConfig) -> Result<Vec<PauliTerm>> {
    config.validate()?;
    let n = config.n;
    let p = config.p;
    let letters = if config.include_identity_letters {
        Pauli::ALL.to_vec()
    } else {
        Pauli::NON_IDENTITY.to_vec()
    };

    let mut terms = Vec::with_capacity(config.term_count());
    let mut subset: Vec<u16> = (0..p as u16).collect();
    loop {
        let mut assignment = vec![0usize; p];
        loop {
            let tuple: Vec<Pauli> = assignment.iter().map(|&a| letters[a]).collect();
            terms.push(PauliTerm::new_allowing_identity(n, subset.clone(), tuple)?);
            // Odometer over letter assignments, last site fastest.
            let mut pos = p;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                assignment[pos] += 1;
                if assignment[pos] < letters.len() {
                    break;
                }
                assignment[pos] = 0;
            }
            if assignment.iter().all(|&a| a == 0) {
                break;
            }
        }
        // Next p-combination of [n] in lexicographic order.
        let mut i = p;
        loop {
            if i == 0 {
                return Ok(terms);
            }
            i -= 1;
            if (subset[i] as usize) < n - (p - i) {
                subset[i] += 1;
                for j in i + 1..p {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Coefficient storage: dense canonical array or sparse (index, value) list.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Dense(Vec<f64>),
    Sparse(Vec<(u32, f64)>),
}

/// One realization of the disorder.
#[derive(Clone, Debug)]
pub struct DisorderSample {
    spec: DisorderSpec,
    table: Arc<TermTable>,
    coeffs: Coefficients,
}

/// Stream tag separating disorder draws from other uses of the same seed.
const DISORDER_STREAM: u64 = 0xD150;

impl DisorderSample {
    pub fn config(&self) -> &ModelConfig {
        self.table.config()
    }

    pub fn spec(&self) -> &DisorderSpec {
        &self.spec
    }

    pub fn table(&self) -> &Arc<TermTable> {
        &self.table
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    /// Coefficient of term `i` in canonical order.
    pub fn coefficient(&self, i: usize) -> f64 {
        match &self.coeffs {
            Coefficients::Dense(v) => v[i],
            Coefficients::Sparse(list) => list
                .binary_search_by_key(&(i as u32), |&(idx, _)| idx)
                .map(|k| list[k].1)
                .unwrap_or(0.0),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        match &self.coeffs {
            Coefficients::Dense(v) => v.iter().filter(|&&c| c != 0.0).count(),
            Coefficients::Sparse(list) => list.len(),
        }
    }

    /// Iterate (term index, coefficient) over stored nonzeros.
    pub fn iter_nonzero(&self) -> Box<dyn Iterator<Item = (usize, f64)> + '_> {
        match &self.coeffs {
            Coefficients::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0.0)
                    .map(|(i, &c)| (i, c)),
            ),
            Coefficients::Sparse(list) => Box::new(list.iter().map(|&(i, c)| (i as usize, c))),
        }
    }

    /// Build from explicit dense coefficients (toy instances and tests).
    pub fn from_dense_coefficients(config: ModelConfig, coeffs: Vec<f64>) -> Result<Self> {
        let table = TermTable::new(config)?;
        if coeffs.len() != table.terms().len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} terms",
                coeffs.len(),
                table.terms().len()
            )));
        }
        Ok(DisorderSample {
            spec: DisorderSpec {
                kind: DisorderKind::Gaussian,
                seed: 0,
            },
            table,
            coeffs: Coefficients::Dense(coeffs),
        })
    }

    /// A single-term instance with the given coefficient.
    pub fn single_term(
        config: ModelConfig,
        qubits: Vec<u16>,
        letters: Vec<Pauli>,
        value: f64,
    ) -> Result<Self> {
        let table = TermTable::new(config)?;
        let target = PauliTerm::new_allowing_identity(config.n, qubits, letters)?;
        let mut coeffs = vec![0.0; table.terms().len()];
        let idx = table
            .terms()
            .iter()
            .position(|t| *t == target)
            .ok_or_else(|| Error::Domain("term not part of this model".into()))?;
        coeffs[idx] = value;
        Ok(DisorderSample {
            spec: DisorderSpec {
                kind: DisorderKind::Gaussian,
                seed: 0,
            },
            table,
            coeffs: Coefficients::Dense(coeffs),
        })
    }

    /// Dense 2^n x 2^n Hermitian matrix with the ensemble normalization.
    pub fn materialize_hamiltonian(&self) -> Result<DenseOperator> {
        let n = self.config().n;
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity(format!(
                "dense Hamiltonian on {n} qubits exceeds limit {DENSE_QUBIT_LIMIT}"
            )));
        }
        let norm = self.config().normalization();
        let dim = 1usize << n;
        let mut mat = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
        for (i, c) in self.iter_nonzero() {
            let m = self.table.masks[i];
            let scaled = m.phase * (c * norm);
            for b in 0..dim {
                let sign = if (b as u64 & m.zmask).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                mat[(b ^ m.xmask as usize, b)] += scaled * sign;
            }
        }
        DenseOperator::from_matrix(n, mat)
    }

    /// ⟨φ|H|φ⟩ for a Bloch product state, in O(#nonzero terms · p).
    ///
    /// Uses ⟨φ|σ^a|φ⟩ = n̂_a (the Bloch component); identity letters contribute 1.
    pub fn product_energy(&self, state: &BlochProductState) -> Result<f64> {
        let n = self.config().n;
        if state.qubit_count() != n {
            return Err(Error::Dimension(format!(
                "state on {} qubits vs model on {n}",
                state.qubit_count()
            )));
        }
        let norm = self.config().normalization();
        let mut acc = 0.0;
        for (i, c) in self.iter_nonzero() {
            acc += c * self.term_weight(i, state);
        }
        Ok(acc * norm)
    }

    /// Π_k ⟨σ^{a_k}⟩ for term `i` under the given product state.
    pub(crate) fn term_weight(&self, i: usize, state: &BlochProductState) -> f64 {
        let term = &self.table.terms()[i];
        let mut w = 1.0;
        for (&q, &l) in term.qubits().iter().zip(term.letters()) {
            let v = state.vector(q as usize);
            w *= match l {
                Pauli::I => 1.0,
                Pauli::X => v[0],
                Pauli::Y => v[1],
                Pauli::Z => v[2],
            };
        }
        w
    }

    /// Matrix-free H·v with the ensemble normalization (n capped at 20).
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.config().n;
        if n > MATRIX_FREE_QUBIT_LIMIT {
            return Err(Error::Capacity(format!(
                "matrix-free apply on {n} qubits exceeds limit {MATRIX_FREE_QUBIT_LIMIT}"
            )));
        }
        if v.len() != 1usize << n {
            return Err(Error::Dimension("vector length mismatch".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        self.apply_into(v, &mut out);
        Ok(out)
    }
}

impl LinearOp for DisorderSample {
    fn qubit_count(&self) -> usize {
        self.config().n
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        debug_assert!(self.config().n <= MATRIX_FREE_QUBIT_LIMIT);
        let norm = self.config().normalization();
        out.fill(Complex64::new(0.0, 0.0));
        for (i, c) in self.iter_nonzero() {
            let m = self.table.masks[i];
            let scaled = m.phase * (c * norm);
            let x = m.xmask as usize;
            for (b, &vb) in v.iter().enumerate() {
                let sign = if (b as u64 & m.zmask).count_ones().is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                out[b ^ x] += scaled * (sign * vb);
            }
        }
    }
}

/// Draw one disorder realization; deterministic in (config, spec.seed).
pub fn sample_disorder(config: ModelConfig, spec: DisorderSpec) -> Result<DisorderSample> {
    let table = TermTable::new(config)?;
    sample_disorder_with_table(&table, spec)
}

/// Same as [`sample_disorder`] but reusing a shared term table (hot loops).
pub fn sample_disorder_with_table(
    table: &Arc<TermTable>,
    spec: DisorderSpec,
) -> Result<DisorderSample> {
    let config = *table.config();
    let rng = CounterRng::new(spec.seed).derive(DISORDER_STREAM);
    let count = table.terms().len();

    let coeffs = match spec.kind {
        DisorderKind::Gaussian => {
            let v: Vec<f64> = (0..count).map(|i| rng.gaussian_at(2 * i as u64)).collect();
            Coefficients::Dense(v)
        }
        DisorderKind::Rademacher => {
            let v: Vec<f64> = (0..count)
                .map(|i| {
                    if rng.u64_at(2 * i as u64) >> 63 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                })
                .collect();
            Coefficients::Dense(v)
        }
        DisorderKind::SparseRademacher { average_degree } => {
            if config.include_identity_letters {
                return Err(Error::Parameter(
                    "sparse disorder is defined for the standard model only".into(),
                ));
            }
            let budget = 3.0f64.powi(config.p as i32) * binomial(config.n, config.p - 1);
            if average_degree.is_nan() || average_degree <= 0.0 || average_degree > budget {
                return Err(Error::Parameter(format!(
                    "average degree {average_degree} must lie in (0, {budget}]"
                )));
            }
            let prob = average_degree / budget;
            let magnitude = (budget / average_degree).sqrt();
            let mut list = Vec::new();
            for i in 0..count {
                if rng.f64_at(2 * i as u64) < prob {
                    let sign = if rng.u64_at(2 * i as u64 + 1) >> 63 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    list.push((i as u32, sign * magnitude));
                }
            }
            Coefficients::Sparse(list)
        }
    };

    Ok(DisorderSample {
        spec,
        table: Arc::clone(table),
        coeffs,
    })
}

#[derive(Serialize, Deserialize)]
struct SampleDoc {
    n: usize,
    p: usize,
    #[serde(default)]
    include_identity_letters: bool,
    spec: DisorderSpec,
    storage: String,
    /// Nonzero coefficients as (word string, value) pairs.
    entries: Vec<(String, f64)>,
}

impl DisorderSample {
    /// JSON document listing the nonzero coefficients by word string.
    pub fn to_json(&self) -> String {
        let cfg = self.config();
        let entries: Vec<(String, f64)> = self
            .iter_nonzero()
            .map(|(i, c)| (self.table.terms()[i].to_string(), c))
            .collect();
        let doc = SampleDoc {
            n: cfg.n,
            p: cfg.p,
            include_identity_letters: cfg.include_identity_letters,
            spec: self.spec,
            storage: match self.coeffs {
                Coefficients::Dense(_) => "dense".into(),
                Coefficients::Sparse(_) => "sparse".into(),
            },
            entries,
        };
        serde_json::to_string_pretty(&doc).expect("sample serialization cannot fail")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let doc: SampleDoc =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        let config = ModelConfig {
            n: doc.n,
            p: doc.p,
            include_identity_letters: doc.include_identity_letters,
        };
        let table = TermTable::new(config)?;
        let index: HashMap<String, usize> = table
            .terms()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), i))
            .collect();
        let mut pairs: Vec<(u32, f64)> = Vec::with_capacity(doc.entries.len());
        for (word, value) in &doc.entries {
            let &i = index
                .get(word)
                .ok_or_else(|| Error::Config(format!("unknown term '{word}'")))?;
            pairs.push((i as u32, *value));
        }
        pairs.sort_by_key(|&(i, _)| i);
        let coeffs = if doc.storage == "dense" {
            let mut v = vec![0.0; table.terms().len()];
            for &(i, c) in &pairs {
                v[i as usize] = c;
            }
            Coefficients::Dense(v)
        } else {
            Coefficients::Sparse(pairs)
        };
        Ok(DisorderSample {
            spec: doc.spec,
            table,
            coeffs,
        })
    }

    /// Little-endian f64 array in canonical term order (dense samples only).
    pub fn to_binary(&self) -> Result<Vec<u8>> {
        match &self.coeffs {
            Coefficients::Dense(v) => {
                let mut out = Vec::with_capacity(v.len() * 8);
                for c in v {
                    out.extend_from_slice(&c.to_le_bytes());
                }
                Ok(out)
            }
            Coefficients::Sparse(_) => Err(Error::Validation(
                "binary form is defined for dense samples".into(),
            )),
        }
    }

    pub fn from_binary(config: ModelConfig, spec: DisorderSpec, bytes: &[u8]) -> Result<Self> {
        if !bytes.len().is_multiple_of(8) {
            return Err(Error::Validation(
                "binary length not a multiple of 8".into(),
            ));
        }
        let coeffs: Vec<f64> = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut sample = DisorderSample::from_dense_coefficients(config, coeffs)?;
        sample.spec = spec;
        Ok(sample)
    }
}
