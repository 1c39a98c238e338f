//! Dense and matrix-free linear algebra on 2^n-dimensional operators.
//!
//! Largest eigenvalues come from a restarted Lanczos iteration with full
//! reorthogonalization and an explicitly certified residual ‖Hv − θv‖; the
//! dense cross-check route is a full Hermitian eigendecomposition. Free
//! energies use the whole spectrum with a max-shift, partial traces produce
//! reduced density matrices, and Haar states are normalized complex Gaussians.

use crate::error::{Error, Result};
use crate::rng::CounterRng;
use crate::DENSE_QUBIT_LIMIT;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// A 2^n x 2^n complex operator tagged with its qubit count.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    n: usize,
    mat: DMatrix<Complex64>,
}

impl DenseOperator {
    pub fn from_matrix(n: usize, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = 1usize << n;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but n={n} needs {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DenseOperator { n, mat })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        if n > DENSE_QUBIT_LIMIT {
            return Err(Error::Capacity(format!(
                "dense operator on {n} qubits exceeds limit {DENSE_QUBIT_LIMIT}"
            )));
        }
        let dim = 1usize << n;
        Ok(DenseOperator {
            n,
            mat: DMatrix::zeros(dim, dim),
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    /// Max entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.mat.nrows() {
            for c in r..self.mat.ncols() {
                let d = (self.mat[(r, c)] - self.mat[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Real eigenvalues in ascending order (Hermitian input assumed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.mat.clone().symmetric_eigen();
        let mut evs: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        evs
    }

    /// Largest eigenvalue by full diagonalization (the dense oracle route).
    pub fn lambda_max_dense(&self) -> f64 {
        *self
            .eigenvalues()
            .last()
            .expect("operator has at least one eigenvalue")
    }

    /// Real part of ⟨ψ|M|ψ⟩.
    pub fn expectation(&self, state: &StateVector) -> f64 {
        let v = state.amplitudes();
        let mv = &self.mat * v;
        v.dotc(&mv).re
    }

    /// Tr(M²) for Hermitian M, i.e. the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.diagonal().iter().sum()
    }
}

impl LinearOp for DenseOperator {
    fn qubit_count(&self) -> usize {
        self.n
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let v = DVector::from_column_slice(v);
        let mv = &self.mat * v;
        out.copy_from_slice(mv.as_slice());
    }
}

/// Normalized pure state on n qubits.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: DVector<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amps: DVector<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::Dimension(format!(
                "state has {} amplitudes but n={n} needs {}",
                amps.len(),
                1usize << n
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!(
                "state norm {norm} deviates from 1 by more than 1e-12"
            )));
        }
        Ok(StateVector { n, amps })
    }

    pub fn from_unnormalized(n: usize, mut amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        amps /= Complex64::new(norm, 0.0);
        StateVector::new(n, amps)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range")));
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector::new(n, amps)
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    /// Density matrix |ψ⟩⟨ψ|.
    pub fn density(&self) -> Result<DenseOperator> {
        let mat = &self.amps * self.amps.adjoint();
        DenseOperator::from_matrix(self.n, mat)
    }
}

/// Hermitian operator exposed through matrix-vector products.
pub trait LinearOp {
    fn qubit_count(&self) -> usize;

    fn dim(&self) -> usize {
        1usize << self.qubit_count()
    }

    fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]);
}

/// Certified extremal eigenvalue estimate.
#[derive(Clone, Copy, Debug)]
pub struct LambdaMax {
    pub value: f64,
    /// Explicit ‖Hv − θv‖ of the returned Ritz pair.
    pub residual: f64,
    pub matvecs: usize,
}

/// Largest eigenvalue of a Hermitian operator via restarted Lanczos.
///
/// Stops once the explicitly computed residual ‖Hv − θv‖ drops below `tol`;
/// errors out with the best residual if the iteration cap is hit.
pub fn lambda_max<O: LinearOp + ?Sized>(op: &O, tol: f64) -> Result<LambdaMax> {
    let dim = op.dim();
    let mut matvecs = 0usize;

    if dim == 1 {
        let v = [Complex64::new(1.0, 0.0)];
        let mut out = [Complex64::new(0.0, 0.0)];
        op.apply_into(&v, &mut out);
        return Ok(LambdaMax {
            value: out[0].re,
            residual: 0.0,
            matvecs: 1,
        });
    }

    // Deterministic pseudo-random start vector.
    let rng = CounterRng::new(0x00C0_FFEE).derive(dim as u64);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|i| {
            Complex64::new(
                rng.gaussian_at(2 * i as u64),
                rng.gaussian_at(2 * i as u64 + 1),
            )
        })
        .collect();
    normalize(&mut v);

    let steps_per_cycle = dim.min(80);
    let max_cycles = 200;
    let mut best = LambdaMax {
        value: f64::NEG_INFINITY,
        residual: f64::INFINITY,
        matvecs: 0,
    };

    for _ in 0..max_cycles {
        let (theta, ritz, used) = lanczos_cycle(op, &v, steps_per_cycle, &mut matvecs);
        // Explicit residual certification.
        let mut hv = vec![Complex64::new(0.0, 0.0); dim];
        op.apply_into(&ritz, &mut hv);
        matvecs += 1;
        let mut resid2 = 0.0;
        for i in 0..dim {
            let d = hv[i] - ritz[i] * theta;
            resid2 += d.norm_sqr();
        }
        let residual = resid2.sqrt();
        if residual < best.residual {
            best = LambdaMax {
                value: theta,
                residual,
                matvecs,
            };
        }
        if residual <= tol {
            return Ok(LambdaMax {
                value: theta,
                residual,
                matvecs,
            });
        }
        if used < 2 {
            // Invariant subspace reached; the residual is as good as it gets.
            return Ok(LambdaMax {
                value: theta,
                residual,
                matvecs,
            });
        }
        v = ritz;
    }

    Err(Error::Convergence {
        message: "lambda_max did not reach the requested residual".into(),
        residual: best.residual,
    })
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    for c in v.iter_mut() {
        *c /= norm;
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One Lanczos sweep with full reorthogonalization. Returns the top Ritz pair
/// and the Krylov dimension actually built.
fn lanczos_cycle<O: LinearOp + ?Sized>(
    op: &O,
    start: &[Complex64],
    max_steps: usize,
    matvecs: &mut usize,
) -> (f64, Vec<Complex64>, usize) {
    let dim = start.len();
    let mut basis: Vec<Vec<Complex64>> = vec![start.to_vec()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    for step in 0..max_steps {
        let v = basis[step].clone();
        op.apply_into(&v, &mut w);
        *matvecs += 1;
        let alpha = dotc(&v, &w).re;
        alphas.push(alpha);
        // w -= alpha v + beta v_prev, then full reorthogonalization.
        for i in 0..dim {
            w[i] -= v[i] * alpha;
        }
        if step > 0 {
            let beta_prev = betas[step - 1];
            let vp = &basis[step - 1];
            for i in 0..dim {
                w[i] -= vp[i] * beta_prev;
            }
        }
        for b in &basis {
            let overlap = dotc(b, &w);
            for i in 0..dim {
                w[i] -= b[i] * overlap;
            }
        }
        let beta = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-14 || step + 1 == max_steps || basis.len() == dim {
            break;
        }
        betas.push(beta);
        let next: Vec<Complex64> = w.iter().map(|c| c / beta).collect();
        basis.push(next);
    }

    let k = alphas.len();
    // Dense eigensolve of the small tridiagonal.
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut top = 0;
    for i in 1..k {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
    }
    let theta = eig.eigenvalues[top];
    let coeffs = eig.eigenvectors.column(top);
    let mut ritz = vec![Complex64::new(0.0, 0.0); dim];
    for (j, b) in basis.iter().enumerate() {
        let c = coeffs[j];
        for i in 0..dim {
            ritz[i] += b[i] * c;
        }
    }
    normalize(&mut ritz);
    (theta, ritz, k)
}

/// Free energy F_β = β⁻¹ log Σ_k exp(β λ_k), computed with a max-shift.
pub fn log_partition(op: &DenseOperator, beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::Parameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let evs = op.eigenvalues();
    let m = evs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let sum: f64 = evs.iter().map(|&l| (beta * (l - m)).exp()).sum();
    Ok(m + sum.ln() / beta)
}

fn check_keep(n: usize, keep: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != keep.len() {
        return Err(Error::Validation("kept qubits must be distinct".into()));
    }
    if sorted.iter().any(|&q| q >= n) {
        return Err(Error::Domain("kept qubit index out of range".into()));
    }
    Ok(sorted)
}

/// Scatter the bits of `sub` into `positions` of a full index.
fn scatter(sub: usize, positions: &[usize]) -> usize {
    let mut out = 0usize;
    for (j, &pos) in positions.iter().enumerate() {
        out |= ((sub >> j) & 1) << pos;
    }
    out
}

/// Reduced density matrix of a pure state over the kept qubits.
///
/// Bit `j` of the reduced index corresponds to the j-th smallest kept qubit.
pub fn partial_trace_state(state: &StateVector, keep: &[usize]) -> Result<DenseOperator> {
    let n = state.qubit_count();
    let keep = check_keep(n, keep)?;
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let de = 1usize << rest.len();
    let amps = state.amplitudes();

    let mut mat = DMatrix::<Complex64>::zeros(dk, dk);
    for e in 0..de {
        let base = scatter(e, &rest);
        for a in 0..dk {
            let ia = base | scatter(a, &keep);
            let va = amps[ia];
            if va == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..dk {
                let ib = base | scatter(b, &keep);
                mat[(a, b)] += va * amps[ib].conj();
            }
        }
    }
    DenseOperator::from_matrix(keep.len(), mat)
}

/// Reduced density matrix of a density operator over the kept qubits.
pub fn partial_trace_density(rho: &DenseOperator, keep: &[usize]) -> Result<DenseOperator> {
    let n = rho.qubit_count();
    let keep = check_keep(n, keep)?;
    let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let de = 1usize << rest.len();

    let mut mat = DMatrix::<Complex64>::zeros(dk, dk);
    for e in 0..de {
        let base = scatter(e, &rest);
        for a in 0..dk {
            let ia = base | scatter(a, &keep);
            for b in 0..dk {
                let ib = base | scatter(b, &keep);
                mat[(a, b)] += rho.matrix()[(ia, ib)];
            }
        }
    }
    DenseOperator::from_matrix(keep.len(), mat)
}

/// Haar-random pure state: normalized vector of i.i.d. complex Gaussians.
pub fn haar_state(n: usize, seed: u64) -> Result<StateVector> {
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::Capacity(format!(
            "haar state on {n} qubits exceeds limit {DENSE_QUBIT_LIMIT}"
        )));
    }
    let rng = CounterRng::new(seed).derive(0x4AA2);
    let dim = 1usize << n;
    let amps = DVector::from_iterator(
        dim,
        (0..dim).map(|i| {
            Complex64::new(
                rng.gaussian_at(2 * i as u64),
                rng.gaussian_at(2 * i as u64 + 1),
            )
        }),
    );
    StateVector::from_unnormalized(n, amps)
}

/// CSV export of a spectrum: `index,eigenvalue` rows.
pub fn spectrum_csv(eigenvalues: &[f64]) -> String {
    let mut out = String::from("index,eigenvalue\n");
    for (i, ev) in eigenvalues.iter().enumerate() {
        out.push_str(&format!("{i},{ev}\n"));
    }
    out
}
