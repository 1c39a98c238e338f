//! Seeded experiment drivers.
//!
//! Every report is a pure function of its configuration: per-sample seeds are
//! derived as mix(master_seed, experiment tag, arm, sample index), so results
//! are byte-identical across reruns and indifferent to the worker-pool size.
//! Artifacts are a CSV (one row per sample, documented column order) plus a
//! JSON summary embedding the config hash and code version; re-running into
//! the same directory aborts if the existing summary carries a different hash.

use crate::error::{Error, Result};
use crate::model::{
    sample_disorder_with_table, DisorderKind, DisorderSpec, ModelConfig, TermTable,
};
use crate::product::optimize_multistart;
use crate::rng::mix_seed;
use crate::spectral::lambda_max;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub restarts: usize,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings {
            restarts: 8,
            max_sweeps: 500,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelPoint {
    pub n: usize,
    pub p: usize,
}

/// Net-counting thresholds (C_ε and the packing ε).
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub c_epsilon: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub n: usize,
    pub p: usize,
    #[serde(default)]
    pub adjusted: bool,
    /// Disorder arms; seeds are derived, not stored.
    pub disorders: Vec<DisorderKind>,
    pub samples: usize,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
    /// Extra (n, p) points for sweep experiments; empty means just (n, p).
    #[serde(default)]
    pub sweep: Vec<ModelPoint>,
    #[serde(default)]
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub output_dir: Option<String>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if self.disorders.is_empty() {
            return Err(Error::Config("at least one disorder spec required".into()));
        }
        ModelConfig {
            n: self.n,
            p: self.p,
            include_identity_letters: self.adjusted,
        }
        .validate()?;
        for pt in &self.sweep {
            ModelConfig::new(pt.n, pt.p)?;
        }
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n: self.n,
            p: self.p,
            include_identity_letters: self.adjusted,
        }
    }

    /// SHA-256 of the canonical JSON form, truncated to 16 hex chars.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialization cannot fail");
        let digest = Sha256::digest(json.as_bytes());
        let mut out = String::with_capacity(16);
        for byte in digest.iter().take(8) {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Per-sample numeric records plus summary statistics and provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub id: String,
    pub config_hash: String,
    pub code_version: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub summary: serde_json::Value,
}

impl ExperimentReport {
    /// CSV with the documented column order, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "id": self.id,
            "config_hash": self.config_hash,
            "code_version": self.code_version,
            "summary": self.summary,
        }))
        .expect("summary serialization cannot fail")
    }

    /// Write `{id}.csv` and `{id}.json` under `dir`; aborts when an existing
    /// summary was produced by a different configuration.
    pub fn write_artifacts(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let json_path = dir.join(format!("{}.json", self.id));
        if json_path.exists() {
            let existing = std::fs::read_to_string(&json_path)?;
            if let Ok(doc) = serde_json::from_str::<serde_json::Value>(&existing) {
                if let Some(hash) = doc.get("config_hash").and_then(|h| h.as_str()) {
                    if hash != self.config_hash {
                        return Err(Error::Config(format!(
                            "refusing to overwrite {}: existing hash {hash} != {}",
                            json_path.display(),
                            self.config_hash
                        )));
                    }
                }
            }
        }
        std::fs::write(dir.join(format!("{}.csv", self.id)), self.to_csv())?;
        std::fs::write(json_path, self.summary_json())?;
        Ok(())
    }
}

const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, (var / n).sqrt())
}

/// λ_max/√n per disorder arm; the first two arms define the reported gap.
pub fn run_universality(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.n > 10 {
        return Err(Error::Capacity(
            "universality needs exact lambda_max; capped at n <= 10".into(),
        ));
    }
    let mc = config.model_config();
    let table = TermTable::new(mc)?;
    let tag = 0x0e41u64;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut arm_values: Vec<Vec<f64>> = Vec::new();
    for (arm, kind) in config.disorders.iter().enumerate() {
        // Streams are keyed by the disorder kind itself, so identical arms
        // draw identical samples and self-comparisons gap at exactly zero.
        let kind_json = serde_json::to_string(kind).expect("kind serialization cannot fail");
        let kind_key = mix_seed(
            &kind_json
                .as_bytes()
                .iter()
                .map(|&b| b as u64)
                .collect::<Vec<u64>>(),
        );
        let values: Vec<f64> = (0..config.samples)
            .into_par_iter()
            .map(|i| {
                let seed = mix_seed(&[config.master_seed, tag, kind_key, i as u64]);
                let sample =
                    sample_disorder_with_table(&table, DisorderSpec { kind: *kind, seed })?;
                let lm = lambda_max(&sample, 1e-9)?;
                Ok(lm.value / (config.n as f64).sqrt())
            })
            .collect::<Result<Vec<f64>>>()?;
        for (i, v) in values.iter().enumerate() {
            rows.push(vec![arm as f64, i as f64, *v]);
        }
        arm_values.push(values);
    }

    let stats: Vec<serde_json::Value> = arm_values
        .iter()
        .enumerate()
        .map(|(arm, vals)| {
            let (mean, se) = mean_stderr(vals);
            serde_json::json!({
                "arm": arm,
                "kind": config.disorders[arm],
                "mean": mean,
                "stderr": se,
            })
        })
        .collect();
    let mut summary = serde_json::json!({ "arms": stats, "samples": config.samples });
    if arm_values.len() >= 2 {
        let (m0, s0) = mean_stderr(&arm_values[0]);
        let (m1, s1) = mean_stderr(&arm_values[1]);
        summary["gap"] = serde_json::json!(m0 - m1);
        summary["combined_stderr"] = serde_json::json!((s0 * s0 + s1 * s1).sqrt());
    }

    Ok(ExperimentReport {
        id: config.id.clone(),
        config_hash: config.hash(),
        code_version: CODE_VERSION.into(),
        columns: vec![
            "arm".into(),
            "sample".into(),
            "lambda_max_over_sqrt_n".into(),
        ],
        rows,
        summary,
    })
}

/// Optimized product-state energies across a sweep of (n, p) points.
///
/// Rows carry the raw ⟨μ|H|μ⟩ (unit disorder variance per product state),
/// its value over √n, and the ratio of the latter to √(2 log p).
pub fn run_product_scaling(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let kind = config.disorders[0];
    let points: Vec<ModelPoint> = if config.sweep.is_empty() {
        vec![ModelPoint {
            n: config.n,
            p: config.p,
        }]
    } else {
        config.sweep.clone()
    };
    let tag = 0x5ca1u64;
    let opt = config.optimizer;

    let mut rows = Vec::new();
    let mut point_stats = Vec::new();
    for pt in &points {
        let mc = ModelConfig::new(pt.n, pt.p)?;
        let table = TermTable::new(mc)?;
        let reference = (2.0 * (pt.p as f64).ln()).sqrt();
        let energies: Vec<f64> = (0..config.samples)
            .into_par_iter()
            .map(|i| {
                let seed = mix_seed(&[config.master_seed, tag, pt.n as u64, pt.p as u64, i as u64]);
                let sample = sample_disorder_with_table(&table, DisorderSpec { kind, seed })?;
                let run = optimize_multistart(
                    &sample,
                    opt.restarts,
                    mix_seed(&[seed, 0x0b7a]),
                    opt.max_sweeps,
                    opt.tol,
                )?;
                Ok(run.energy)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (i, &e) in energies.iter().enumerate() {
            let normalized = e / (pt.n as f64).sqrt();
            rows.push(vec![
                pt.n as f64,
                pt.p as f64,
                i as f64,
                e,
                normalized,
                normalized / reference,
            ]);
        }
        let normalized: Vec<f64> = energies.iter().map(|e| e / (pt.n as f64).sqrt()).collect();
        let (mean, se) = mean_stderr(&normalized);
        point_stats.push(serde_json::json!({
            "n": pt.n,
            "p": pt.p,
            "mean_normalized": mean,
            "stderr": se,
            "ratio_to_sqrt_2_log_p": mean / reference,
        }));
    }

    Ok(ExperimentReport {
        id: config.id.clone(),
        config_hash: config.hash(),
        code_version: CODE_VERSION.into(),
        columns: vec![
            "n".into(),
            "p".into(),
            "sample".into(),
            "energy_raw".into(),
            "energy_over_sqrt_n".into(),
            "ratio_to_sqrt_2_log_p".into(),
        ],
        rows,
        summary: serde_json::json!({ "points": point_stats, "samples": config.samples }),
    })
}

/// Spread of the optimized product energy across disorder samples.
pub fn run_concentration(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    if config.samples < 100 {
        return Err(Error::Config(
            "concentration needs at least 100 samples".into(),
        ));
    }
    let kind = config.disorders[0];
    let mc = ModelConfig::new(config.n, config.p)?;
    let table = TermTable::new(mc)?;
    let tag = 0xc0ccu64;
    let opt = config.optimizer;

    let energies: Vec<f64> = (0..config.samples)
        .into_par_iter()
        .map(|i| {
            let seed = mix_seed(&[config.master_seed, tag, i as u64]);
            let sample = sample_disorder_with_table(&table, DisorderSpec { kind, seed })?;
            let run = optimize_multistart(
                &sample,
                opt.restarts,
                mix_seed(&[seed, 0x0b7a]),
                opt.max_sweeps,
                opt.tol,
            )?;
            Ok(run.energy)
        })
        .collect::<Result<Vec<f64>>>()?;

    let sqrt_n = (config.n as f64).sqrt();
    let rows: Vec<Vec<f64>> = energies
        .iter()
        .enumerate()
        .map(|(i, &e)| vec![i as f64, e, e / sqrt_n])
        .collect();
    let normalized: Vec<f64> = energies.iter().map(|e| e / sqrt_n).collect();
    let (mean, _) = mean_stderr(&normalized);
    let std = (normalized
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / normalized.len() as f64)
        .sqrt();

    Ok(ExperimentReport {
        id: config.id.clone(),
        config_hash: config.hash(),
        code_version: CODE_VERSION.into(),
        columns: vec![
            "sample".into(),
            "energy_raw".into(),
            "energy_over_sqrt_n".into(),
        ],
        rows,
        summary: serde_json::json!({
            "samples": config.samples,
            "mean_normalized": mean,
            "std_normalized": std,
            "std_normalized_times_sqrt_n": std * sqrt_n,
        }),
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Universality,
    Scaling,
    Concentration,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
}

/// Outcome of one manifest entry; failures are recorded, not fatal.
#[derive(Debug)]
pub struct RunOutcome {
    pub id: String,
    pub report: Result<ExperimentReport>,
}

pub fn run_experiment(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentReport> {
    match kind {
        ExperimentKind::Universality => run_universality(config),
        ExperimentKind::Scaling => run_product_scaling(config),
        ExperimentKind::Concentration => run_concentration(config),
    }
}

/// Execute every manifest entry, writing artifacts where configured.
pub fn run_all(manifest: &[ManifestEntry], fail_fast: bool) -> Result<Vec<RunOutcome>> {
    let mut outcomes = Vec::with_capacity(manifest.len());
    for entry in manifest {
        let report = run_experiment(entry.kind, &entry.config).and_then(|rep| {
            if let Some(dir) = &entry.config.output_dir {
                rep.write_artifacts(Path::new(dir))?;
            }
            Ok(rep)
        });
        let failed = report.is_err();
        outcomes.push(RunOutcome {
            id: entry.config.id.clone(),
            report,
        });
        if fail_fast && failed {
            break;
        }
    }
    Ok(outcomes)
}

/// Parse a manifest JSON array, reporting the offending field on error.
pub fn parse_manifest(json: &str) -> Result<Vec<ManifestEntry>> {
    let entries: Vec<ManifestEntry> =
        serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
    for e in &entries {
        e.config.validate()?;
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(id: &str) -> ExperimentConfig {
        ExperimentConfig {
            id: id.into(),
            n: 4,
            p: 2,
            adjusted: false,
            disorders: vec![DisorderKind::Gaussian, DisorderKind::Rademacher],
            samples: 8,
            optimizer: OptimizerSettings {
                restarts: 2,
                max_sweeps: 200,
                tol: 1e-9,
            },
            sweep: vec![],
            thresholds: None,
            output_dir: None,
            master_seed: 3,
        }
    }

    #[test]
    fn universality_self_gap_is_zero() {
        // Identical arms draw identical kind-keyed streams: gap exactly 0.
        let mut cfg = small_config("self");
        cfg.disorders = vec![DisorderKind::Gaussian, DisorderKind::Gaussian];
        let rep = run_universality(&cfg).unwrap();
        assert_eq!(rep.summary["gap"].as_f64().unwrap(), 0.0);
        let rep2 = run_universality(&cfg).unwrap();
        assert_eq!(rep.to_csv(), rep2.to_csv());
    }

    #[test]
    fn reports_are_reproducible_byte_for_byte() {
        let cfg = small_config("repro");
        let a = run_universality(&cfg).unwrap();
        let b = run_universality(&cfg).unwrap();
        assert_eq!(a.to_csv().into_bytes(), b.to_csv().into_bytes());
        assert_eq!(a.summary_json(), b.summary_json());
    }

    #[test]
    fn scaling_and_concentration_shapes() {
        let mut cfg = small_config("shape");
        cfg.sweep = vec![ModelPoint { n: 4, p: 2 }, ModelPoint { n: 5, p: 2 }];
        let rep = run_product_scaling(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 2 * cfg.samples);
        assert_eq!(rep.columns.len(), rep.rows[0].len());

        let mut cc = small_config("conc");
        cc.samples = 100;
        let rep = run_concentration(&cc).unwrap();
        assert_eq!(rep.rows.len(), 100);
        assert!(rep.summary["std_normalized_times_sqrt_n"].as_f64().unwrap() >= 0.0);
    }

    #[test]
    fn universality_accepts_sparse_third_arm() {
        let mut cfg = small_config("sparse-arm");
        cfg.disorders = vec![
            DisorderKind::Gaussian,
            DisorderKind::Rademacher,
            DisorderKind::SparseRademacher {
                average_degree: cfg.n as f64,
            },
        ];
        let rep = run_universality(&cfg).unwrap();
        assert_eq!(rep.rows.len(), 3 * cfg.samples);
        assert_eq!(rep.summary["arms"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn scaling_ratios_finite_across_p() {
        let mut cfg = small_config("psweep");
        cfg.samples = 3;
        cfg.optimizer.restarts = 2;
        cfg.sweep = vec![
            ModelPoint { n: 10, p: 2 },
            ModelPoint { n: 10, p: 3 },
            ModelPoint { n: 10, p: 4 },
        ];
        let rep = run_product_scaling(&cfg).unwrap();
        let ratio_col = rep
            .columns
            .iter()
            .position(|c| c == "ratio_to_sqrt_2_log_p")
            .unwrap();
        for row in &rep.rows {
            assert!(row[ratio_col].is_finite());
        }
        for point in rep.summary["points"].as_array().unwrap() {
            assert!(point["ratio_to_sqrt_2_log_p"].as_f64().unwrap().is_finite());
        }
    }

    #[test]
    fn concentration_does_not_widen_when_n_doubles() {
        let run_at = |n: usize| {
            let cfg = ExperimentConfig {
                id: format!("trend-{n}"),
                n,
                p: 2,
                adjusted: false,
                disorders: vec![DisorderKind::Gaussian],
                samples: 120,
                optimizer: OptimizerSettings {
                    restarts: 4,
                    max_sweeps: 300,
                    tol: 1e-8,
                },
                sweep: vec![],
                thresholds: None,
                output_dir: None,
                master_seed: 21,
            };
            let rep = run_concentration(&cfg).unwrap();
            rep.summary["std_normalized"].as_f64().unwrap()
        };
        let at6 = run_at(6);
        let at12 = run_at(12);
        assert!(at12 <= 1.5 * at6, "std grew too much: {at6} -> {at12}");
    }

    #[test]
    fn manifest_parsing_and_errors() {
        assert!(parse_manifest("[]").unwrap().is_empty());
        let good = serde_json::json!([{
            "kind": "universality",
            "config": small_config("m1"),
        }])
        .to_string();
        assert_eq!(parse_manifest(&good).unwrap().len(), 1);
        // Unknown field is named in the error.
        let bad = good.replace("\"samples\":8", "\"samples\":8,\"bogus_field\":1");
        let err = parse_manifest(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus_field"), "{err}");
    }

    #[test]
    fn artifact_hash_mismatch_aborts() {
        let dir = std::env::temp_dir().join(format!("spinlab-art-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let cfg = small_config("art");
        let rep = run_universality(&cfg).unwrap();
        rep.write_artifacts(&dir).unwrap();
        // Same hash overwrites fine.
        rep.write_artifacts(&dir).unwrap();
        // Different config producing the same id must abort.
        let mut cfg2 = cfg.clone();
        cfg2.master_seed = 4;
        let rep2 = run_universality(&cfg2).unwrap();
        assert!(rep2.write_artifacts(&dir).is_err());
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn run_all_records_failures() {
        let mut bad = small_config("bad");
        bad.n = 12; // over the exact-lambda cap
        let manifest = vec![
            ManifestEntry {
                kind: ExperimentKind::Universality,
                config: bad,
            },
            ManifestEntry {
                kind: ExperimentKind::Scaling,
                config: small_config("ok"),
            },
        ];
        let outcomes = run_all(&manifest, false).unwrap();
        assert_eq!(outcomes.len(), 2);
        assert!(outcomes[0].report.is_err());
        assert!(outcomes[1].report.is_ok());
    }
}
