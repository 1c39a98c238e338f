//! Anticommutativity graphs and a small-scale Lovász theta solver.
//!
//! The max form (unit diagonal, zeros on edges, PSD, maximize λ_max) is
//! attacked through its trace-normalized Gram variant with a low-rank
//! factorized augmented-Lagrangian ascent; the resulting factor is projected
//! to an exactly feasible certificate B whose λ_max is a true lower bound.
//! The min form over the complement (ones on non-edges, free on edges,
//! minimize λ_max) is descended with eigenvalue subgradients using the lower
//! bound as a Polyak target, giving an upper bound. A result is accepted only
//! when the two bracket the value within the requested tolerance.

use crate::binomial;
use crate::error::{Error, Result};
use crate::pauli::{anticommutes, Pauli, PauliTerm, PhasedPauli};
use crate::rng::{CounterRng, SeqRng};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Simple undirected graph on contiguous node ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![vec![false; n]; n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in 0..n {
                g.adj[i][j] = i != j;
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::empty(n);
        for i in 0..n {
            g.add_edge(i, (i + 1) % n);
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a][b] = true;
            self.adj[b][a] = true;
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adj[a][b] = false;
        self.adj[b][a] = false;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn complement(&self) -> Graph {
        let mut g = Graph::empty(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                g.adj[i][j] = i != j && !self.adj[i][j];
            }
        }
        g
    }

    /// CSV edge list: source,target rows.
    pub fn to_edge_csv(&self) -> String {
        let mut out = String::from("source,target\n");
        for (a, b) in self.edges() {
            out.push_str(&format!("{a},{b}\n"));
        }
        out
    }

    /// Greedy independent set (ascending degree order).
    pub fn greedy_independent_set(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        let degree = |i: usize| self.adj[i].iter().filter(|&&b| b).count();
        order.sort_by_key(|&i| degree(i));
        let mut chosen: Vec<usize> = Vec::new();
        for i in order {
            if chosen.iter().all(|&j| !self.adj[i][j]) {
                chosen.push(i);
            }
        }
        chosen.sort_unstable();
        chosen
    }
}

/// Anticommutativity graph of the 9·C(n,2) two-local Paulis.
#[derive(Clone, Debug)]
pub struct PauliGraph {
    pub n: usize,
    pub nodes: Vec<PauliTerm>,
    pub graph: Graph,
}

/// Nodes are the 2-local terms in canonical order; edges join anticommuting pairs.
pub fn build_anticommutativity_graph(n: usize) -> Result<PauliGraph> {
    build_anticommutativity_graph_p(n, 2)
}

/// General p-local builder hook. No theta bound is claimed beyond p = 2;
/// the graph itself is exact for any locality.
pub fn build_anticommutativity_graph_p(n: usize, p: usize) -> Result<PauliGraph> {
    if n < 2 {
        return Err(Error::Domain("need at least 2 qubits".into()));
    }
    let count = 3.0f64.powi(p as i32) * binomial(n, p);
    if count > 2000.0 {
        return Err(Error::Capacity(format!(
            "{count} nodes exceed the 2000-node cap"
        )));
    }
    let config = crate::model::ModelConfig::new(n, p)?;
    let nodes = crate::model::enumerate_terms(&config)?;
    let words: Vec<PhasedPauli> = nodes.iter().map(|t| t.to_word()).collect();
    let m = nodes.len();
    let mut graph = Graph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            if anticommutes(&words[i], &words[j])? {
                graph.add_edge(i, j);
            }
        }
    }
    Ok(PauliGraph { n, nodes, graph })
}

/// Feasibility residuals of a theta certificate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ThetaResiduals {
    pub max_diag_dev: f64,
    pub max_edge_dev: f64,
    /// upper − lower bracket width.
    pub gap: f64,
}

/// Two-sided theta estimate with a feasible max-form certificate.
#[derive(Clone, Debug)]
pub struct ThetaResult {
    /// λ_max of the feasible certificate (a valid lower bound, reported value).
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub certificate: DMatrix<f64>,
    pub residuals: ThetaResiduals,
}

impl ThetaResult {
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            value: f64,
            lower: f64,
            upper: f64,
            residuals: &'a ThetaResiduals,
            certificate: Vec<Vec<f64>>,
        }
        let n = self.certificate.nrows();
        let cert: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.certificate[(i, j)]).collect())
            .collect();
        serde_json::to_string_pretty(&Doc {
            value: self.value,
            lower: self.lower,
            upper: self.upper,
            residuals: &self.residuals,
            certificate: cert,
        })
        .expect("theta serialization cannot fail")
    }
}

/// Default solver budget (node count).
pub const THETA_NODE_BUDGET: usize = 200;

/// Lovász theta with bracketing; errors with the final gap when the two
/// sides fail to meet within `tol`.
pub fn lovasz_theta(graph: &Graph, tol: f64) -> Result<ThetaResult> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Domain("empty graph".into()));
    }
    if n > THETA_NODE_BUDGET {
        return Err(Error::Capacity(format!(
            "{n} nodes exceed the solver budget {THETA_NODE_BUDGET}"
        )));
    }

    let (upper_b, upper_smoothed) = min_form_smoothed(graph);
    let (mut lower, mut certificate, mut gram) = max_form_lower(graph, &upper_b);
    let mut upper = min_form_polish(graph, upper_b.clone(), upper_smoothed, lower, 1500);
    // Escalate both sides while the bracket stays open and keeps shrinking.
    for round in 0..3 {
        if upper - lower <= tol {
            break;
        }
        let before = upper - lower;
        let iters = 1500usize << round;
        let (lv, lc, lx) = pgd_polish(graph, gram, iters);
        gram = lx;
        if lv > lower {
            lower = lv;
            certificate = lc;
        }
        upper = min_form_polish(graph, upper_b.clone(), upper, lower, iters);
        if upper - lower > before - 1e-9 {
            break;
        }
    }

    let mut max_diag_dev: f64 = 0.0;
    let mut max_edge_dev: f64 = 0.0;
    for i in 0..n {
        max_diag_dev = max_diag_dev.max((certificate[(i, i)] - 1.0).abs());
        for j in 0..n {
            if graph.has_edge(i, j) {
                max_edge_dev = max_edge_dev.max(certificate[(i, j)].abs());
            }
        }
    }
    let gap = upper - lower;
    let result = ThetaResult {
        value: lower,
        lower,
        upper,
        certificate,
        residuals: ThetaResiduals {
            max_diag_dev,
            max_edge_dev,
            gap,
        },
    };
    if gap > tol {
        return Err(Error::Convergence {
            message: format!("theta bracket [{lower}, {upper}] wider than tol {tol}"),
            residual: gap,
        });
    }
    Ok(result)
}

/// Max-form side: augmented-Lagrangian ascent on the factorized, trace-1 Gram
/// matrix, then projection to an exactly feasible certificate. Runs several
/// starts, including one seeded by the top eigenspace of the min-form matrix
/// (the KKT support of the optimal Gram matrix).
fn max_form_lower(graph: &Graph, upper_b: &DMatrix<f64>) -> (f64, DMatrix<f64>, DMatrix<f64>) {
    let n = graph.node_count();
    let edges = graph.edges();
    let k = n.min(((2 * n) as f64).sqrt().ceil() as usize + 4).max(4);

    // Random starts plus one seeded by the min-form top eigenspace.
    let attempts = if n <= 64 { 3 } else { 2 };
    let mut inits: Vec<Option<DMatrix<f64>>> = vec![None; attempts];
    inits.push(Some(eigenspace_init(upper_b, n, k)));

    let mut best_value = f64::NEG_INFINITY;
    let mut best_cert = DMatrix::<f64>::identity(n, n);
    let mut best_x = DMatrix::<f64>::identity(n, n) / n as f64;
    for (attempt, init) in inits.into_iter().enumerate() {
        let x = alm_solve(&edges, n, k, attempt as u64, init);
        let (value, cert) = certify_from_gram(graph, &x);
        if value > best_value {
            best_value = value;
            best_cert = cert;
            best_x = x;
        }
    }
    // Convex polish in the full matrix space from the best factorized point.
    let (pvalue, pcert, px) = pgd_polish(graph, best_x.clone(), 400);
    if pvalue > best_value {
        best_value = pvalue;
        best_cert = pcert;
        best_x = px;
    }
    (best_value, best_cert, best_x)
}

/// Projected gradient ascent on <J, X> over {X ⪰ 0, Tr X = 1, X_edges = 0}:
/// alternating-projection steps from a warm start, certified periodically.
/// Returns the best certified value, its certificate, and the evolved X.
fn pgd_polish(graph: &Graph, x0: DMatrix<f64>, iters: usize) -> (f64, DMatrix<f64>, DMatrix<f64>) {
    let n = graph.node_count();
    let edges = graph.edges();
    let mut x = x0;
    let mut eta = 0.5 / n as f64;
    let (mut best_value, mut best_cert) = certify_from_gram(graph, &x);
    let mut since_improved = 0usize;
    for it in 0..iters {
        // Ascent on the linear objective, then project approximately.
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] += eta;
            }
        }
        for &(i, j) in &edges {
            x[(i, j)] = 0.0;
            x[(j, i)] = 0.0;
        }
        // PSD projection.
        let eig = x.clone().symmetric_eigen();
        let mut scaled = eig.eigenvectors.clone();
        for c in 0..n {
            let lam = eig.eigenvalues[c].max(0.0).sqrt();
            for r in 0..n {
                scaled[(r, c)] *= lam;
            }
        }
        x = &scaled * scaled.transpose();
        let tr: f64 = (0..n).map(|i| x[(i, i)]).sum();
        if tr > 0.0 {
            x /= tr;
        }
        if it % 10 == 9 {
            let (value, cert) = certify_from_gram(graph, &x);
            if value > best_value + 1e-12 {
                best_value = value;
                best_cert = cert;
                since_improved = 0;
            } else {
                since_improved += 1;
                eta *= 0.7;
                if since_improved > 6 + iters / 100 || eta < 1e-12 {
                    break;
                }
            }
        }
    }
    (best_value, best_cert, x)
}

/// Columns spanning the near-top eigenspace of B, weighted and mildly noised.
fn eigenspace_init(b: &DMatrix<f64>, n: usize, k: usize) -> DMatrix<f64> {
    let eig = b.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &c| eig.eigenvalues[c].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let lam_max = eig.eigenvalues[order[0]];
    let mut rng = SeqRng::from_stream(CounterRng::new(0x16E7).derive(k as u64));
    let mut r = DMatrix::<f64>::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let w = ((eig.eigenvalues[idx] / lam_max).max(0.0)).powi(4);
        for i in 0..n {
            r[(i, c)] = w * eig.eigenvectors[(i, idx)] + 1e-3 * rng.next_gaussian();
        }
    }
    let norm = r.norm();
    if norm > 0.0 {
        r /= norm;
    }
    r
}

/// Maximize <J, R Rᵀ> with ‖R‖_F = 1 and ⟨r_i,r_j⟩ = 0 on edges.
fn alm_solve(
    edges: &[(usize, usize)],
    n: usize,
    k: usize,
    seed_tag: u64,
    init: Option<DMatrix<f64>>,
) -> DMatrix<f64> {
    let mut rng = SeqRng::from_stream(CounterRng::new(0x7413).derive(seed_tag));
    let mut r = init.unwrap_or_else(|| DMatrix::<f64>::from_fn(n, k, |_, _| rng.next_gaussian()));
    let norm = r.norm();
    r /= norm;

    let mut multipliers = vec![0.0f64; edges.len()];
    let mut rho = 10.0f64;
    let mut prev_violation = f64::INFINITY;

    let lagrangian = |r: &DMatrix<f64>, y: &[f64], rho: f64| -> f64 {
        let colsum = r.row_sum(); // 1ᵀR, length k
        let mut val = colsum.norm_squared();
        for (e, &(i, j)) in edges.iter().enumerate() {
            let c = r.row(i).dot(&r.row(j));
            val -= y[e] * c + 0.5 * rho * c * c;
        }
        val
    };

    for _outer in 0..40 {
        let mut step = 0.5 / (1.0 + rho);
        let mut current = lagrangian(&r, &multipliers, rho);
        for _inner in 0..800 {
            let colsum = r.row_sum();
            let mut grad = DMatrix::<f64>::zeros(n, k);
            for i in 0..n {
                for c in 0..k {
                    grad[(i, c)] = 2.0 * colsum[c];
                }
            }
            for (e, &(i, j)) in edges.iter().enumerate() {
                let c = r.row(i).dot(&r.row(j));
                let w = multipliers[e] + rho * c;
                for col in 0..k {
                    grad[(i, col)] -= w * r[(j, col)];
                    grad[(j, col)] -= w * r[(i, col)];
                }
            }
            // Tangent component on the Frobenius sphere.
            let radial = grad.dot(&r);
            grad -= &r * radial;
            let gnorm = grad.norm();
            if gnorm < 1e-12 {
                break;
            }
            let mut improved = false;
            for _ in 0..40 {
                let mut trial = &r + &grad * step;
                let tn = trial.norm();
                trial /= tn;
                let val = lagrangian(&trial, &multipliers, rho);
                if val > current + 1e-15 {
                    r = trial;
                    current = val;
                    step *= 1.4;
                    improved = true;
                    break;
                }
                step *= 0.4;
                if step < 1e-14 {
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        let mut violation: f64 = 0.0;
        for (e, &(i, j)) in edges.iter().enumerate() {
            let c = r.row(i).dot(&r.row(j));
            multipliers[e] += rho * c;
            violation = violation.max(c.abs());
        }
        if violation < 1e-11 {
            break;
        }
        if violation > 0.3 * prev_violation {
            rho = (rho * 2.0).min(1e8);
        }
        prev_violation = violation;
    }

    &r * r.transpose()
}

/// Exact-feasibility projection: zero the edges, shift to PSD, renormalize to
/// unit diagonal; returns (λ_max, certificate B).
fn certify_from_gram(graph: &Graph, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let n = x.nrows();
    let mut x1 = x.clone();
    for i in 0..n {
        for j in 0..n {
            if graph.has_edge(i, j) {
                x1[(i, j)] = 0.0;
            }
        }
    }
    // Symmetrize (guards against float asymmetry).
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (x1[(i, j)] + x1[(j, i)]);
            x1[(i, j)] = v;
            x1[(j, i)] = v;
        }
    }
    let eig = x1.clone().symmetric_eigen();
    let lambda_min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let shift = (-lambda_min).max(0.0) + 1e-12;
    for i in 0..n {
        x1[(i, i)] += shift;
    }
    // Congruence scaling to unit diagonal keeps PSD and edge zeros.
    let mut b = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                b[(i, j)] = 1.0;
            } else {
                let d = (x1[(i, i)] * x1[(j, j)]).sqrt();
                if d > 0.0 {
                    b[(i, j)] = x1[(i, j)] / d;
                }
            }
        }
    }
    let eig_b = b.clone().symmetric_eigen();
    let lam = eig_b
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    (lam, b)
}

/// Exact λ_max and the smoothed soft-max surrogate with its weight matrix.
fn smoothed_top(b: &DMatrix<f64>, mu: f64) -> (f64, f64, DMatrix<f64>) {
    let eig = b.clone().symmetric_eigen();
    let n = b.nrows();
    let lam_max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = (0..n)
        .map(|i| ((eig.eigenvalues[i] - lam_max) / mu).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let smoothed = lam_max + mu * z.ln();
    // W = Q diag(w/z) Qᵀ, the gradient of the smoothed objective.
    let mut scaled = eig.eigenvectors.clone();
    for i in 0..n {
        let s = (weights[i] / z).sqrt();
        for r in 0..n {
            scaled[(r, i)] *= s;
        }
    }
    let w = &scaled * scaled.transpose();
    (lam_max, smoothed, w)
}

/// Min-form side over the complement (ones on non-edges, free on edges):
/// smoothed eigenvalue descent with a decreasing temperature schedule.
/// Returns the final matrix and its exact λ_max.
fn min_form_smoothed(graph: &Graph) -> (DMatrix<f64>, f64) {
    let n = graph.node_count();
    let edges = graph.edges();
    let mut b = DMatrix::<f64>::from_element(n, n, 1.0);
    for &(i, j) in &edges {
        b[(i, j)] = 0.0;
        b[(j, i)] = 0.0;
    }
    let (mut best_f, _, _) = smoothed_top(&b, 1.0);
    let mut best_b = b.clone();
    if edges.is_empty() {
        return (best_b, best_f);
    }

    let mut mu = 0.5f64;
    while mu > 2e-5 {
        let mut step = mu;
        let (_, mut current, mut w) = smoothed_top(&b, mu);
        for _inner in 0..400 {
            let mut gnorm2 = 0.0;
            for &(i, j) in &edges {
                let g = 2.0 * w[(i, j)];
                gnorm2 += g * g;
            }
            if gnorm2 < 1e-20 {
                break;
            }
            let mut improved = false;
            for _ in 0..30 {
                let mut trial = b.clone();
                for &(i, j) in &edges {
                    let g = 2.0 * w[(i, j)];
                    trial[(i, j)] -= step * g;
                    trial[(j, i)] = trial[(i, j)];
                }
                let (exact, smoothed, tw) = smoothed_top(&trial, mu);
                if smoothed < current - 1e-15 {
                    b = trial;
                    current = smoothed;
                    w = tw;
                    if exact < best_f {
                        best_f = exact;
                        best_b = b.clone();
                    }
                    step *= 1.4;
                    improved = true;
                    break;
                }
                step *= 0.4;
                if step < 1e-16 {
                    break;
                }
            }
            if !improved {
                break;
            }
        }
        mu *= 0.4;
    }
    (best_b, best_f)
}

/// Final squeeze of the upper bound: Polyak subgradient steps targeting the
/// certified lower bound.
fn min_form_polish(
    graph: &Graph,
    b0: DMatrix<f64>,
    f0: f64,
    lower_target: f64,
    iters: usize,
) -> f64 {
    let n = graph.node_count();
    let edges = graph.edges();
    if edges.is_empty() {
        return f0;
    }
    let mut b = b0;
    let mut best = f0;

    let top = |b: &DMatrix<f64>| -> (f64, nalgebra::DVector<f64>) {
        let eig = b.clone().symmetric_eigen();
        let mut idx = 0;
        for i in 1..n {
            if eig.eigenvalues[i] > eig.eigenvalues[idx] {
                idx = i;
            }
        }
        (eig.eigenvalues[idx], eig.eigenvectors.column(idx).into())
    };
    let (mut f, mut u) = top(&b);
    for _it in 0..iters {
        let mut gnorm2 = 0.0;
        for &(i, j) in &edges {
            let g = 2.0 * u[i] * u[j];
            gnorm2 += g * g;
        }
        if gnorm2 < 1e-20 {
            break;
        }
        let excess = (f - lower_target).max(1e-12);
        let step = excess / gnorm2;
        for &(i, j) in &edges {
            let g = 2.0 * u[i] * u[j];
            b[(i, j)] -= step * g;
            b[(j, i)] = b[(i, j)];
        }
        let (nf, nu) = top(&b);
        f = nf;
        u = nu;
        if f < best {
            best = f;
        }
        if best <= lower_target + 1e-10 {
            break;
        }
    }
    best
}

/// The nine 2-local Paulis on qubits {0,1}, {0,2}, {0,3} that pairwise
/// anticommute (share exactly one differing non-identity site).
pub fn nine_pauli_family(n: usize) -> Result<Vec<PauliTerm>> {
    if n < 4 {
        return Err(Error::Domain("the family needs n >= 4".into()));
    }
    let mut out = Vec::with_capacity(9);
    let anchors = [Pauli::X, Pauli::Y, Pauli::Z];
    for (row, &anchor) in anchors.iter().enumerate() {
        let partner_qubit = (row + 1) as u16;
        for &second in &[Pauli::X, Pauli::Y, Pauli::Z] {
            out.push(PauliTerm::new(
                n,
                vec![0, partner_qubit],
                vec![anchor, second],
            )?);
        }
    }
    Ok(out)
}

/// True iff the terms pairwise anticommute (an independent set of the
/// commutation graph, giving ϑ(Ḡ_n) ≥ family size).
pub fn verify_independent_set(terms: &[PauliTerm]) -> Result<bool> {
    let words: Vec<PhasedPauli> = terms.iter().map(|t| t.to_word()).collect();
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            if !anticommutes(&words[i], &words[j])? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// ϑ(G_n)·ϑ(Ḡ_n) versus the vertex-symmetric identity target 9·C(n,2).
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ProductCheck {
    pub n: usize,
    pub theta_g: f64,
    pub theta_gbar: f64,
    pub product: f64,
    pub target: f64,
}

pub fn vertex_symmetric_product_check(n: usize, tol: f64) -> Result<ProductCheck> {
    let pg = build_anticommutativity_graph(n)?;
    let theta_g = lovasz_theta(&pg.graph, tol)?;
    let theta_gbar = lovasz_theta(&pg.graph.complement(), tol)?;
    let target = 9.0 * binomial(n, 2);
    Ok(ProductCheck {
        n,
        theta_g: theta_g.value,
        theta_gbar: theta_gbar.value,
        product: theta_g.value * theta_gbar.value,
        target,
    })
}
