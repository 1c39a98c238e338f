//! spinlab: command-line front door for the spin-glass ensemble toolkit.
//!
//! One subcommand per experiment or verification suite; every run is a pure
//! function of its flags and seed. Exit codes: 0 success, 1 verification
//! failure, 2 usage error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use spinlab_core::experiments::{
    run_concentration, run_product_scaling, run_universality, ExperimentConfig, OptimizerSettings,
};
use spinlab_core::lovasz;
use spinlab_core::matchings;
use spinlab_core::model::{sample_disorder, DisorderKind, DisorderSpec, ModelConfig};
use spinlab_core::moments;
use spinlab_core::pauli::{Pauli, PhasedPauli};
use spinlab_core::product;
use spinlab_core::spectral;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spinlab",
    version,
    about = "Quantum p-local spin-glass ensemble: verification suites, experiments, and exports",
    after_help = "Output file formats are documented by `spinlab formats`.\n\
                  The SPINLAB_OUT environment variable overrides the output directory."
)]
struct Cli {
    /// Output directory for artifacts (SPINLAB_OUT overrides this).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Worker pool size; defaults to the logical core count. Results are
    /// identical for every setting.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Verbose progress output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DisorderArgs {
    /// Disorder distribution: gaussian | rademacher | sparse.
    #[arg(long, default_value = "gaussian")]
    kind: String,

    /// Average degree d_n for the sparse distribution.
    #[arg(long)]
    degree: Option<f64>,
}

impl DisorderArgs {
    fn to_kind(&self) -> Result<DisorderKind> {
        match self.kind.as_str() {
            "gaussian" => Ok(DisorderKind::Gaussian),
            "rademacher" => Ok(DisorderKind::Rademacher),
            "sparse" => Ok(DisorderKind::SparseRademacher {
                average_degree: self
                    .degree
                    .ok_or_else(|| anyhow!("--degree is required with --kind sparse"))?,
            }),
            other => bail!("unknown disorder kind '{other}'"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the lemma/identity verification suite.
    Verify {
        /// Desk-scale subset (seconds instead of minutes).
        #[arg(long)]
        quick: bool,
    },

    /// Draw a disorder sample and write it as JSON (plus .bin when dense).
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        /// Include identity letters (the adjusted, up-to-p-local model).
        #[arg(long)]
        adjusted: bool,
        #[command(flatten)]
        disorder: DisorderArgs,
        #[arg(long)]
        seed: u64,
        /// Output file stem; defaults to sample_n{n}_p{p}_s{seed}.
        #[arg(long)]
        out: Option<String>,
    },

    /// Coordinate-ascent product-state optimization on one instance.
    Optimize {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        disorder: DisorderArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        sweeps: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the best run's sweep trace CSV here.
        #[arg(long)]
        trace_out: Option<String>,
    },

    /// Exact extremal eigenvalue of one instance: prints λ_max/√n.
    Exact {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        disorder: DisorderArgs,
        #[arg(long)]
        seed: u64,
        /// Residual tolerance of the certified iterative solve.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Write the full spectrum as index,eigenvalue CSV (dense sizes only).
        #[arg(long)]
        spectrum_out: Option<String>,
    },

    /// Matching calculus at a given d: counts, values, expectation, recursion.
    Matchings {
        #[arg(long)]
        d: usize,
    },

    /// Monte Carlo estimate of the matching-independence ratio.
    Gamma {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "gamma.json")]
        out: String,
        /// Extra comma-separated (p, r) sweep points written as CSV,
        /// e.g. 2x10,2x20,3x10.
        #[arg(long)]
        sweep: Option<String>,
    },

    /// Empirical degree marginal versus Poisson(pr/n).
    Poisson {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<String>,
    },

    /// Minimize the annealed bound g(β,p) = C/β + βγ/2 + log(1+pγβ²)/β.
    Gbound {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// The O_p(1) constant; must exceed log 2 ≈ 0.693.
        #[arg(long, default_value_t = 0.7)]
        c: f64,
        #[arg(long)]
        beta_min: Option<f64>,
        #[arg(long)]
        beta_max: Option<f64>,
        #[arg(long, default_value_t = 201)]
        points: usize,
        #[arg(long)]
        out: Option<String>,
    },

    /// Mean λ_max/√n across disorder distributions.
    Universality {
        #[command(flatten)]
        exp: ExperimentArgs,
    },

    /// Optimized product-state energy scaling over (n, p) points.
    Scaling {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated sweep points, e.g. 8x2,10x2,10x3.
        #[arg(long)]
        sweep: Option<String>,
    },

    /// Spread of the optimized product energy across disorder samples.
    Concentration {
        #[command(flatten)]
        exp: ExperimentArgs,
    },

    /// Lovász theta of the 2-local anticommutativity graph or a named graph.
    Theta {
        /// Build G_n from the 9·C(n,2) two-local Paulis.
        #[arg(long)]
        n: Option<usize>,
        /// Use the complement graph.
        #[arg(long)]
        complement: bool,
        /// Named test graph: cycle:N | empty:N | complete:N.
        #[arg(long)]
        graph: Option<String>,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
        /// Write the graph's edge list as source,target CSV.
        #[arg(long)]
        edges_out: Option<String>,
    },

    /// Build a hemisphere packing net and write it as CSV.
    Net {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        out: Option<String>,
        /// Also count threshold exceedances of a Gaussian instance over the
        /// product net: model size n.
        #[arg(long)]
        count_n: Option<usize>,
        /// Locality p for the counted instance.
        #[arg(long)]
        count_p: Option<usize>,
        /// Disorder seed for the counted instance.
        #[arg(long)]
        count_seed: Option<u64>,
        /// Exceedance threshold in the √n·energy >= threshold·n convention.
        #[arg(long)]
        threshold: Option<f64>,
    },

    /// Document all output file formats.
    Formats,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// JSON experiment config; inline flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Use the adjusted (up-to-p-local) model.
    #[arg(long)]
    adjusted: bool,
    /// Comma-separated disorder arms, e.g. gaussian,rademacher,sparse:8.
    #[arg(long)]
    disorders: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Master seed; overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Counting threshold C_eps; defaults to (1-eps)*sqrt(2) when --epsilon is set.
    #[arg(long)]
    c_epsilon: Option<f64>,
    /// Packing epsilon for threshold bookkeeping.
    #[arg(long)]
    epsilon: Option<f64>,
}

impl ExperimentArgs {
    fn resolve(&self, default_id: &str) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                ExperimentConfig::from_json(&text)?
            }
            None => ExperimentConfig {
                id: default_id.to_string(),
                n: 8,
                p: 2,
                adjusted: false,
                disorders: vec![DisorderKind::Gaussian],
                samples: 100,
                optimizer: OptimizerSettings::default(),
                sweep: vec![],
                thresholds: None,
                output_dir: None,
                master_seed: 1,
            },
        };
        if let Some(id) = &self.id {
            cfg.id = id.clone();
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(r) = self.restarts {
            cfg.optimizer.restarts = r;
        }
        if let Some(s) = self.sweeps {
            cfg.optimizer.max_sweeps = s;
        }
        if let Some(t) = self.tol {
            cfg.optimizer.tol = t;
        }
        if self.adjusted {
            cfg.adjusted = true;
        }
        if let Some(d) = &self.disorders {
            cfg.disorders = parse_arms(d)?;
        }
        if let Some(eps) = self.epsilon {
            cfg.thresholds = Some(spinlab_core::experiments::Thresholds {
                c_epsilon: self
                    .c_epsilon
                    .unwrap_or((1.0 - eps) * std::f64::consts::SQRT_2),
                epsilon: eps,
            });
        } else if let Some(ce) = self.c_epsilon {
            let eps = cfg.thresholds.map(|t| t.epsilon).unwrap_or(0.0);
            cfg.thresholds = Some(spinlab_core::experiments::Thresholds {
                c_epsilon: ce,
                epsilon: eps,
            });
        }
        Ok(cfg)
    }
}

fn parse_arms(spec: &str) -> Result<Vec<DisorderKind>> {
    spec.split(',')
        .map(|arm| match arm.trim() {
            "gaussian" => Ok(DisorderKind::Gaussian),
            "rademacher" => Ok(DisorderKind::Rademacher),
            other => {
                if let Some(d) = other.strip_prefix("sparse:") {
                    Ok(DisorderKind::SparseRademacher {
                        average_degree: d.parse().context("parsing sparse degree")?,
                    })
                } else {
                    bail!("unknown arm '{other}'")
                }
            }
        })
        .collect()
}

fn parse_sweep(spec: &str) -> Result<Vec<spinlab_core::experiments::ModelPoint>> {
    spec.split(',')
        .map(|pt| {
            let (n, p) = pt
                .trim()
                .split_once('x')
                .ok_or_else(|| anyhow!("sweep point '{pt}' is not of the form NxP"))?;
            Ok(spinlab_core::experiments::ModelPoint {
                n: n.parse()?,
                p: p.parse()?,
            })
        })
        .collect()
}

fn out_dir(cli_dir: &Path) -> PathBuf {
    match std::env::var_os("SPINLAB_OUT") {
        Some(dir) => PathBuf::from(dir),
        None => cli_dir.to_path_buf(),
    }
}

fn gaussian_with_seed(seed: u64) -> DisorderSpec {
    DisorderSpec {
        kind: DisorderKind::Gaussian,
        seed,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Determinism never depends on this; it only sizes the pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let dir = out_dir(&cli.out_dir);
    match &cli.command {
        Command::Verify { quick } => verify(*quick, cli.verbose > 0),
        Command::Sample {
            n,
            p,
            adjusted,
            disorder,
            seed,
            out,
        } => {
            let config = if *adjusted {
                ModelConfig::adjusted(*n, *p)?
            } else {
                ModelConfig::new(*n, *p)?
            };
            let spec = DisorderSpec {
                kind: disorder.to_kind()?,
                seed: *seed,
            };
            let sample = sample_disorder(config, spec)?;
            let stem = out
                .clone()
                .unwrap_or_else(|| format!("sample_n{n}_p{p}_s{seed}"));
            std::fs::create_dir_all(&dir)?;
            let json_path = dir.join(format!("{stem}.json"));
            std::fs::write(&json_path, sample.to_json())?;
            println!("wrote {}", json_path.display());
            if let Ok(bytes) = sample.to_binary() {
                let bin_path = dir.join(format!("{stem}.bin"));
                std::fs::write(&bin_path, bytes)?;
                println!("wrote {}", bin_path.display());
            }
            println!(
                "terms: {}, nonzero: {}",
                sample.table().terms().len(),
                sample.nonzero_count()
            );
            Ok(true)
        }
        Command::Optimize {
            n,
            p,
            disorder,
            seed,
            restarts,
            sweeps,
            tol,
            trace_out,
        } => {
            let config = ModelConfig::new(*n, *p)?;
            let sample = sample_disorder(
                config,
                DisorderSpec {
                    kind: disorder.to_kind()?,
                    seed: *seed,
                },
            )?;
            let run = product::optimize_multistart(&sample, *restarts, *seed, *sweeps, *tol)?;
            println!("energy {}", run.energy);
            println!("energy_over_sqrt_n {}", run.energy / (*n as f64).sqrt());
            println!("sweeps {}", run.sweeps);
            if let Some(path) = trace_out {
                std::fs::create_dir_all(&dir)?;
                let p = dir.join(path);
                std::fs::write(&p, run.trace_csv())?;
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Exact {
            n,
            p,
            disorder,
            seed,
            tol,
            spectrum_out,
        } => {
            let config = ModelConfig::new(*n, *p)?;
            let sample = sample_disorder(
                config,
                DisorderSpec {
                    kind: disorder.to_kind()?,
                    seed: *seed,
                },
            )?;
            let lm = spectral::lambda_max(&sample, *tol)?;
            println!("lambda_max_over_sqrt_n {}", lm.value / (*n as f64).sqrt());
            println!("residual {}", lm.residual);
            if let Some(path) = spectrum_out {
                let evs = sample.materialize_hamiltonian()?.eigenvalues();
                std::fs::create_dir_all(&dir)?;
                let p = dir.join(path);
                std::fs::write(&p, spectral::spectrum_csv(&evs))?;
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
        Command::Matchings { d } => {
            let all = matchings::enumerate_matchings(*d)?;
            println!("matchings {}", all.len());
            let expected = matchings::expected_trace_sum(*d)?;
            println!("expected_trace_sum {expected}");
            println!("target {}", 2 * d + 1);
            let mut cache = matchings::TraceSumCache::new();
            let mut agree = true;
            for m in &all {
                let brute = matchings::trace_sum(m)?;
                let rec = matchings::trace_sum_recursive_with(m, &mut cache);
                if brute != rec {
                    agree = false;
                }
                if *d <= 3 {
                    println!("{:?} -> {brute}", m.pairs());
                }
            }
            println!("recursion_matches_brute_force {agree}");
            Ok(agree && expected == (2 * d + 1) as f64)
        }
        Command::Gamma {
            n,
            p,
            r,
            samples,
            seed,
            out,
            sweep,
        } => {
            let est = matchings::estimate_gamma_ratio(*n, *p, *r, *samples, *seed)?;
            println!(
                "lhs_mean {} rhs_mean {} ratio {} per_r_ratio {}",
                est.lhs_mean, est.rhs_mean, est.ratio, est.per_r_ratio
            );
            std::fs::create_dir_all(&dir)?;
            let path = dir.join(out);
            std::fs::write(&path, serde_json::to_string_pretty(&est)?)?;
            println!("wrote {}", path.display());
            if let Some(sweep) = sweep {
                let mut estimates = vec![est];
                for point in sweep.split(',') {
                    let (sp, sr) = point
                        .trim()
                        .split_once('x')
                        .ok_or_else(|| anyhow!("sweep point '{point}' is not of the form PxR"))?;
                    estimates.push(matchings::estimate_gamma_ratio(
                        *n,
                        sp.parse()?,
                        sr.parse()?,
                        *samples,
                        *seed,
                    )?);
                }
                let csv_path = dir.join("gamma_sweep.csv");
                std::fs::write(&csv_path, matchings::gamma_sweep_csv(&estimates))?;
                println!("wrote {}", csv_path.display());
            }
            Ok(true)
        }
        Command::Poisson {
            n,
            p,
            r,
            samples,
            seed,
            out,
        } => {
            let rep = matchings::poisson_degree_check(*n, *p, *r, *samples, *seed)?;
            println!(
                "lambda {} empirical_mean {} tv_distance {}",
                rep.lambda, rep.empirical_mean, rep.tv_distance
            );
            if let Some(out) = out {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(out);
                std::fs::write(&path, serde_json::to_string_pretty(&rep)?)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Gbound {
            p,
            gamma,
            c,
            beta_min,
            beta_max,
            points,
            out,
        } => {
            let mut cfg = matchings::BoundConfig::new(*p, *gamma, *c)?;
            if let Some(lo) = beta_min {
                cfg.grid.min = *lo;
            }
            if let Some(hi) = beta_max {
                cfg.grid.max = *hi;
            }
            cfg.grid.points = *points;
            let bound = matchings::minimize_g(&cfg)?;
            println!(
                "beta_star {} g_min {} ratio_to_sqrt {}",
                bound.beta_star, bound.g_min, bound.ratio_to_sqrt
            );
            if let Some(out) = out {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(out);
                std::fs::write(&path, serde_json::to_string_pretty(&bound)?)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Universality { exp } => {
            let mut cfg = exp.resolve("universality")?;
            if cfg.disorders.len() < 2 && exp.config.is_none() && exp.disorders.is_none() {
                cfg.disorders = vec![DisorderKind::Gaussian, DisorderKind::Rademacher];
            }
            let rep = run_universality(&cfg)?;
            println!("{}", rep.summary_json());
            rep.write_artifacts(&dir)?;
            Ok(true)
        }
        Command::Scaling { exp, sweep } => {
            let mut cfg = exp.resolve("scaling")?;
            if let Some(sweep) = sweep {
                cfg.sweep = parse_sweep(sweep)?;
            }
            let rep = run_product_scaling(&cfg)?;
            println!("{}", rep.summary_json());
            rep.write_artifacts(&dir)?;
            Ok(true)
        }
        Command::Concentration { exp } => {
            let cfg = exp.resolve("concentration")?;
            let rep = run_concentration(&cfg)?;
            println!("{}", rep.summary_json());
            rep.write_artifacts(&dir)?;
            Ok(true)
        }
        Command::Theta {
            n,
            complement,
            graph,
            tol,
            out,
            edges_out,
        } => {
            let g = match (n, graph) {
                (Some(n), None) => {
                    let pg = lovasz::build_anticommutativity_graph(*n)?;
                    if *complement {
                        pg.graph.complement()
                    } else {
                        pg.graph
                    }
                }
                (None, Some(spec)) => {
                    let (kind, size) = spec
                        .split_once(':')
                        .ok_or_else(|| anyhow!("--graph expects kind:N"))?;
                    let size: usize = size.parse()?;
                    match kind {
                        "cycle" => lovasz::Graph::cycle(size),
                        "empty" => lovasz::Graph::empty(size),
                        "complete" => lovasz::Graph::complete(size),
                        other => bail!("unknown graph '{other}'"),
                    }
                }
                _ => bail!("specify exactly one of --n or --graph"),
            };
            if let Some(path) = edges_out {
                std::fs::create_dir_all(&dir)?;
                let p = dir.join(path);
                std::fs::write(&p, g.to_edge_csv())?;
                println!("wrote {}", p.display());
            }
            let th = lovasz::lovasz_theta(&g, *tol)?;
            println!(
                "theta {} lower {} upper {} gap {}",
                th.value, th.lower, th.upper, th.residuals.gap
            );
            if let Some(out) = out {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join(out);
                std::fs::write(&path, th.to_json())?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Net {
            epsilon,
            out,
            count_n,
            count_p,
            count_seed,
            threshold,
        } => {
            let net = product::build_packing_net(*epsilon)?;
            net.verify()?;
            println!("size {}", net.size());
            let path = dir.join(
                out.clone()
                    .unwrap_or_else(|| format!("net_eps{epsilon}.csv")),
            );
            std::fs::create_dir_all(&dir)?;
            std::fs::write(&path, net.to_csv())?;
            println!("wrote {}", path.display());
            if let (Some(cn), Some(cp)) = (count_n, count_p) {
                let cfg = ModelConfig::new(*cn, *cp)?;
                let sample = sample_disorder(cfg, gaussian_with_seed(count_seed.unwrap_or(1)))?;
                let thr = threshold.unwrap_or(0.0);
                let count = product::count_net_exceedances(&sample, &net, thr)?;
                println!("exceedances {count} (threshold {thr})");
            }
            Ok(true)
        }
        Command::Formats => {
            print!("{FORMATS_DOC}");
            Ok(true)
        }
    }
}

const FORMATS_DOC: &str = "\
Output file formats
===================

Disorder sample JSON (`sample`):
  {\"n\", \"p\", \"include_identity_letters\", \"spec\": {\"kind\", ..., \"seed\"},
   \"storage\": \"dense\"|\"sparse\", \"entries\": [[word, value], ...]}
  Words are strings over {I,X,Y,Z}, most-significant qubit first, optional
  phase prefix in {+, -, +i, -i}. Only nonzero coefficients are listed.

Disorder sample binary (`sample`, dense only):
  little-endian f64 array in canonical term order (lexicographic in
  (qubit tuple, letter tuple)).

Experiment CSV (`universality`, `scaling`, `concentration`):
  one row per sample; column order is the header line. Columns:
    universality:  arm,sample,lambda_max_over_sqrt_n
    scaling:       n,p,sample,energy_raw,energy_over_sqrt_n,ratio_to_sqrt_2_log_p
    concentration: sample,energy_raw,energy_over_sqrt_n

Experiment summary JSON: {\"id\", \"config_hash\", \"code_version\", \"summary\"}.

Gamma estimate JSON (`gamma`): {n, p, r, samples, lhs_mean, rhs_mean, ratio,
  per_r_ratio, lhs_stderr, rhs_stderr, ratio_stderr}.

Poisson report JSON (`poisson`): {n, p, r, samples, lambda, empirical_mean,
  empirical_pmf, poisson_pmf, tv_distance}.

Annealed bound JSON (`gbound`): {beta_star, g_min, bound_value,
  ratio_to_sqrt, witness_beta, witness_value}.

Theta JSON (`theta`): {value, lower, upper, residuals, certificate}.

Packing net CSV (`net`): x,y,z rows of unit vectors on the cap z >= 0.01.

Optimizer trace CSV (`optimize --trace-out`): sweep,energy rows.
";

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

/// The identity suite behind `spinlab verify`.
fn verify(quick: bool, verbose: bool) -> Result<bool> {
    let mut checks: Vec<Check> = Vec::new();

    // SWAP identity: Σ_a σ^a ⊗ σ^a = 2·SWAP − I, entrywise exact.
    {
        let mut sum = nalgebra::DMatrix::<num_complex::Complex64>::zeros(4, 4);
        for l in Pauli::NON_IDENTITY {
            let word = PhasedPauli::from_letters(&[l, l]);
            sum += word.materialize()?.matrix();
        }
        let mut target = nalgebra::DMatrix::<num_complex::Complex64>::zeros(4, 4);
        let one = num_complex::Complex64::new(1.0, 0.0);
        // SWAP exchanges the two qubit bits of the basis index.
        for b in 0..4usize {
            let swapped = ((b & 1) << 1) | ((b >> 1) & 1);
            target[(swapped, b)] += one * 2.0;
        }
        for i in 0..4 {
            target[(i, i)] -= one;
        }
        let exact = sum == target;
        checks.push(check(
            "swap identity",
            exact,
            "sum_a sigma^a (x) sigma^a == 2 SWAP - I".into(),
        ));
    }

    // Matching lemma and recursion.
    {
        let dmax = if quick { 4 } else { 6 };
        let mut ok = true;
        for d in 1..=dmax {
            ok &= matchings::expected_trace_sum(d)? == (2 * d + 1) as f64;
        }
        checks.push(check(
            "matching expectation",
            ok,
            format!("E[Trace_sum] == 2d+1 for d <= {dmax}"),
        ));
        let rmax = if quick { 4 } else { 5 };
        let mut cache = matchings::TraceSumCache::new();
        let mut agree = true;
        for d in 1..=rmax {
            for m in matchings::enumerate_matchings(d)? {
                agree &= matchings::trace_sum(&m)?
                    == matchings::trace_sum_recursive_with(&m, &mut cache);
            }
        }
        checks.push(check(
            "matching recursion",
            agree,
            format!("rewiring recursion == brute force for d <= {rmax}"),
        ));
    }

    // Covariance of product states via elementary symmetric polynomials.
    {
        let combos: &[(usize, usize)] = if quick {
            &[(4, 2)]
        } else {
            &[(4, 2), (6, 2), (6, 3)]
        };
        let samples = if quick { 20_000 } else { 50_000 };
        let mut ok = true;
        let mut worst = 0.0f64;
        for &(n, p) in combos {
            let cfg = ModelConfig::new(n, p)?;
            let template = sample_disorder(
                cfg,
                DisorderSpec {
                    kind: DisorderKind::Gaussian,
                    seed: 0,
                },
            )?;
            for pair in 0..4u64 {
                let a = product::BlochProductState::random(n, 900 + pair);
                let b = product::BlochProductState::random(n, 1900 + pair);
                let chk =
                    product::covariance_matches_monte_carlo(&template, &a, &b, samples, 7 + pair)?;
                let dev = (chk.empirical - chk.analytic).abs() / chk.stderr.max(1e-12);
                worst = worst.max(dev);
                ok &= dev <= 3.0;
            }
        }
        checks.push(check(
            "covariance formula",
            ok,
            format!("Monte Carlo within 3 stderr (worst {worst:.2})"),
        ));
    }

    // Product-state variance is 1; Bell state variance is 3; purity route agrees.
    {
        let mut ok = true;
        for seed in 0..6u64 {
            let bloch = product::BlochProductState::random(5, seed);
            let psi = bloch.to_state_vector()?;
            let v = moments::state_variance(&psi, &ModelConfig::new(5, 2)?)?;
            ok &= (v - 1.0).abs() < 1e-10;
        }
        let bell = spectral::StateVector::new(
            2,
            nalgebra::DVector::from_vec(vec![
                num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            ]),
        )?;
        let bell_var = moments::state_variance(&bell, &ModelConfig::new(2, 2)?)?;
        ok &= (bell_var - 3.0).abs() < 1e-12;
        checks.push(check(
            "product variance",
            ok,
            format!("product states at 1, Bell at {bell_var}"),
        ));

        let mut purity_ok = true;
        for seed in 0..4u64 {
            let psi = spectral::haar_state(4, seed)?;
            let a = moments::state_variance(&psi, &ModelConfig::new(4, 2)?)?;
            let b = moments::purity_variance(&psi, 2)?;
            purity_ok &= (a - b).abs() < 1e-10;
        }
        checks.push(check(
            "purity expansion",
            purity_ok,
            "sum_k (-1)^(p-k) 2^k C(p,k) A_k == direct variance".into(),
        ));
    }

    // Adjusted model: variance == average p-subset purity; product states at 1.
    {
        let mut ok = true;
        for seed in 0..4u64 {
            let psi = spectral::haar_state(4, 40 + seed)?;
            let via_terms = moments::state_variance(&psi, &ModelConfig::adjusted(4, 2)?)?;
            let via_purity = moments::adjusted_variance(&psi, 2)?;
            ok &= (via_terms - via_purity).abs() < 1e-10;
        }
        let bloch = product::BlochProductState::random(4, 77);
        let v = moments::adjusted_variance(&bloch.to_state_vector()?, 2)?;
        ok &= (v - 1.0).abs() < 1e-10;
        checks.push(check(
            "adjusted model",
            ok,
            "variance equals mean p-subset purity; product states saturate 1".into(),
        ));
    }

    // Lovász checks.
    {
        let th_empty = lovasz::lovasz_theta(&lovasz::Graph::empty(7), 1e-3)?;
        let th_complete = lovasz::lovasz_theta(&lovasz::Graph::complete(7), 1e-3)?;
        let th_c5 = lovasz::lovasz_theta(&lovasz::Graph::cycle(5), 1e-2)?;
        let mut ok = (th_empty.value - 7.0).abs() <= 1e-3
            && (th_complete.value - 1.0).abs() <= 1e-3
            && (th_c5.value - 5.0f64.sqrt()).abs() <= 1e-2;
        let fam = lovasz::nine_pauli_family(4)?;
        ok &= lovasz::verify_independent_set(&fam)?;
        let mut detail = format!(
            "empty 7 -> {:.4}, complete -> {:.4}, C5 -> {:.4}",
            th_empty.value, th_complete.value, th_c5.value
        );
        if !quick {
            let pg = lovasz::build_anticommutativity_graph(3)?;
            let th_g3 = lovasz::lovasz_theta(&pg.graph, 1e-2)?;
            ok &= th_g3.value <= 3.0 + 1e-2;
            detail.push_str(&format!(", theta(G_3) = {:.4}", th_g3.value));
        }
        checks.push(check("lovasz suite", ok, detail));
    }

    let mut all_ok = true;
    for c in &checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {}: {}", c.name, c.detail);
        all_ok &= c.passed;
    }
    if verbose {
        println!("{} checks run", checks.len());
    }
    Ok(all_ok)
}
