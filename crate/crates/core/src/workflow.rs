//! The extraction pipeline: split every experiment into train and test rows,
//! optimise on train while tracking the held-out objective, tighten the
//! search space around the train-best point, retrain on all rows starting
//! from that point, and report thresholded errors for the final parameters.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::number;
use crate::loss::{experiment_objective, report_error, scalarize, ReportValue, ScalarizerSpec};
use crate::models::{evaluate_model, Experiment, Model};
use crate::sampler::{
    best_so_far, holdout_best_so_far, run_study_parallel, Evaluation, SamplerConfig, Study,
};
use crate::space::SearchSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionConfig {
    pub model: Model,
    pub space: SearchSpace,
    pub experiments: Vec<Experiment>,
    pub scalarizer: ScalarizerSpec,
    pub sampler: SamplerConfig,
    pub n_trials: usize,
    pub retrain_trials: usize,
    pub tighten_factor: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl ExtractionConfig {
    /// A config with the workflow defaults; weights are taken from the experiments.
    pub fn new(model: Model, space: SearchSpace, experiments: Vec<Experiment>) -> Self {
        let weights = experiments.iter().map(|e| e.weight).collect();
        Self {
            model,
            space,
            experiments,
            scalarizer: ScalarizerSpec { weights },
            sampler: SamplerConfig::default(),
            n_trials: 250,
            retrain_trials: 50,
            tighten_factor: 0.4,
            train_fraction: 0.8,
            seed: 0,
        }
    }

    /// Every violated invariant, not just the first.
    pub fn problems(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.experiments.is_empty() {
            problems.push("at least one experiment is required".to_string());
        }
        if self.scalarizer.weights.len() != self.experiments.len() {
            problems.push(format!(
                "{} scalarizer weights for {} experiments",
                self.scalarizer.weights.len(),
                self.experiments.len()
            ));
        } else if let Err(e) = self.scalarizer.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.sampler.validate() {
            problems.push(e.to_string());
        }
        if self.n_trials < 1 {
            problems.push("n_trials must be at least 1".to_string());
        }
        if !(self.tighten_factor > 0.0 && self.tighten_factor <= 1.0) {
            problems.push(format!(
                "tighten_factor must be in (0, 1], got {}",
                self.tighten_factor
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            problems.push(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if let Err(e) = self.model.check_params(&self.space.names()) {
            problems.push(e.to_string());
        }
        for exp in &self.experiments {
            if let Err(e) = exp.validate() {
                problems.push(e.to_string());
            }
            if let Err(e) = self.model.check_experiment(exp) {
                problems.push(e.to_string());
            }
            if exp.len() < 2 {
                problems.push(format!(
                    "experiment `{}` needs at least 2 points to split",
                    exp.name
                ));
            }
            if exp.report_threshold.is_nan() || exp.report_threshold < 0.0 {
                problems.push(format!(
                    "experiment `{}`: report_threshold must be nonnegative",
                    exp.name
                ));
            }
        }
        problems
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// SHA-256 of the canonical JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&json))
    }
}

/// Stage seeds derived from one user seed (SplitMix64 over `seed ^ stage ^ index`).
pub fn stage_seed(seed: u64, stage: Stage, index: u64) -> u64 {
    let mut z = seed
        ^ (stage as u64).wrapping_mul(0xA076_1D64_78BD_642F)
        ^ index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Split = 1,
    Train = 2,
    Retrain = 3,
    Corrupt = 4,
}

fn floor_count(fraction: f64, k: usize) -> usize {
    // slack keeps e.g. 0.29 * 100 from flooring to 28
    (fraction * k as f64 + 1e-9).floor() as usize
}

/// Random row partition: `floor(train_fraction·k)` rows train, the rest test,
/// both sides non-empty. Rows keep their original order within each side.
pub fn split_dataset(
    exp: &Experiment,
    train_fraction: f64,
    seed: u64,
) -> Result<(Experiment, Experiment)> {
    let k = exp.len();
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "experiment `{}` has {k} points, need at least 2 to split",
            exp.name
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = floor_count(train_fraction, k).clamp(1, k - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = sample(&mut rng, k, n_train).into_vec();
    train.sort_unstable();
    let mut in_train = vec![false; k];
    for &i in &train {
        in_train[i] = true;
    }
    let test: Vec<usize> = (0..k).filter(|&i| !in_train[i]).collect();
    Ok((exp.subset(&train), exp.subset(&test)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorruptionSpec {
    pub fraction: f64,
    pub mu: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(fraction: f64, seed: u64) -> Self {
        Self {
            fraction,
            mu: 0.0,
            sigma: 10.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::Config(format!(
                "corruption fraction must be in [0, 1], got {}",
                self.fraction
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) || !self.mu.is_finite() {
            return Err(Error::Config(format!(
                "invalid corruption noise mu={} sigma={}",
                self.mu, self.sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrupted {
    /// Corrupted copy; `clean_response` holds the original values.
    pub experiment: Experiment,
    /// Indices of the responses that were replaced, ascending.
    pub altered: Vec<usize>,
    pub warning: Option<String>,
}

/// Replaces `floor(fraction·k)` positive responses by `y·10^z`, `z ~ N(mu, sigma)`.
pub fn corrupt_dataset(exp: &Experiment, spec: &CorruptionSpec) -> Result<Corrupted> {
    spec.validate()?;
    let mut out = exp.clone();
    out.clean_response = Some(
        exp.clean_response
            .clone()
            .unwrap_or_else(|| exp.response.clone()),
    );
    let wanted = floor_count(spec.fraction, exp.len());
    if wanted == 0 {
        return Ok(Corrupted {
            experiment: out,
            altered: Vec::new(),
            warning: Some(format!(
                "experiment `{}`: corruption fraction selects no points",
                exp.name
            )),
        });
    }
    let eligible: Vec<usize> = (0..exp.len()).filter(|&i| exp.response[i] > 0.0).collect();
    let mut warning = None;
    let count = if wanted > eligible.len() {
        warning = Some(format!(
            "experiment `{}`: only {} positive responses, {wanted} requested",
            exp.name,
            eligible.len()
        ));
        eligible.len()
    } else {
        wanted
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut altered: Vec<usize> = sample(&mut rng, eligible.len(), count)
        .into_iter()
        .map(|j| eligible[j])
        .collect();
    altered.sort_unstable();
    let noise = Normal::new(spec.mu, spec.sigma)
        .map_err(|e| Error::Config(format!("corruption noise: {e}")))?;
    for &i in &altered {
        let z = noise.sample(&mut rng);
        out.response[i] = exp.response[i] * 10f64.powf(z);
    }
    Ok(Corrupted {
        experiment: out,
        altered,
        warning,
    })
}

/// Corrupts every experiment with its own stream derived from `spec.seed`.
pub fn corrupt_experiments(
    experiments: &[Experiment],
    spec: &CorruptionSpec,
) -> Result<Vec<Corrupted>> {
    experiments
        .iter()
        .enumerate()
        .map(|(i, exp)| {
            let seeded = CorruptionSpec {
                seed: stage_seed(spec.seed, Stage::Corrupt, i as u64),
                ..*spec
            };
            corrupt_dataset(exp, &seeded)
        })
        .collect()
}

/// Scalarized mean loss of `params` over `experiments`.
pub fn objective_of(
    config: &ExtractionConfig,
    params: &[f64],
    experiments: &[Experiment],
) -> Result<f64> {
    let names = config.space.names();
    let objectives = experiments
        .iter()
        .map(|exp| {
            let predicted = evaluate_model(&config.model, &names, params, exp)?;
            experiment_objective(&exp.loss, &predicted, &exp.response)
        })
        .collect::<Result<Vec<_>>>()?;
    scalarize(&config.scalarizer, &objectives)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitTarget {
    Stored,
    CleanOriginal,
}

/// Thresholded report error per experiment for `params`.
pub fn evaluate_fit(
    model: &Model,
    names: &[String],
    params: &[f64],
    experiments: &[Experiment],
    against: FitTarget,
) -> Result<Vec<(String, ReportValue)>> {
    experiments
        .iter()
        .map(|exp| {
            let truth = match against {
                FitTarget::Stored => &exp.response,
                FitTarget::CleanOriginal => exp.clean_response.as_ref().ok_or_else(|| {
                    Error::Config(format!(
                        "experiment `{}` has no clean original to compare against",
                        exp.name
                    ))
                })?,
            };
            let predicted = evaluate_model(model, names, params, exp)?;
            Ok((
                exp.name.clone(),
                report_error(&exp.loss, &predicted, truth, exp.report_threshold)?,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub threshold: f64,
    pub value: ReportValue,
    /// Report against the pre-corruption data, when available.
    pub clean: Option<ReportValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub split_seeds: Vec<u64>,
    pub train_seed: u64,
    pub retrain_seed: u64,
}

#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub param_names: Vec<String>,
    /// Final parameters; `None` when every trial failed.
    pub best_params: Option<Vec<f64>>,
    /// Full-data objective of `best_params`.
    pub best_objective: Option<f64>,
    pub train_best: Option<Vec<f64>>,
    pub train_curve: Vec<Option<f64>>,
    pub test_curve: Vec<Option<f64>>,
    pub retrain_curve: Vec<Option<f64>>,
    pub report: Vec<ExperimentReport>,
    /// Predictions of `best_params` on each full experiment.
    pub fits: Vec<Option<Vec<f64>>>,
    pub train_study: Study,
    pub retrain_study: Option<Study>,
    pub retrain_space: Option<SearchSpace>,
    pub splits: Vec<(Experiment, Experiment)>,
    pub provenance: Provenance,
}

impl ExtractionResult {
    pub fn has_best(&self) -> bool {
        self.best_params.is_some()
    }
}

pub fn extract(config: &ExtractionConfig) -> Result<ExtractionResult> {
    extract_with_jobs(config, 1)
}

/// [`extract`] with up to `jobs` concurrent objective evaluations per batch.
pub fn extract_with_jobs(config: &ExtractionConfig, jobs: usize) -> Result<ExtractionResult> {
    config.validate()?;
    let split_seeds: Vec<u64> = (0..config.experiments.len())
        .map(|i| stage_seed(config.seed, Stage::Split, i as u64))
        .collect();
    let train_seed = stage_seed(config.seed, Stage::Train, 0);
    let retrain_seed = stage_seed(config.seed, Stage::Retrain, 0);

    let splits = config
        .experiments
        .iter()
        .zip(&split_seeds)
        .map(|(exp, &seed)| split_dataset(exp, config.train_fraction, seed))
        .collect::<Result<Vec<_>>>()?;
    let (train, test): (Vec<Experiment>, Vec<Experiment>) = splits.iter().cloned().unzip();

    let train_study = run_study_parallel(
        |params: &[f64]| -> Result<Evaluation> {
            let objective = objective_of(config, params, &train)?;
            Ok(Evaluation {
                objective,
                holdout: objective_of(config, params, &test).ok(),
            })
        },
        &config.space,
        config.n_trials,
        train_seed,
        &config.sampler,
        &[],
        jobs,
    )?;
    let train_best = train_study.best().map(|t| t.params.clone());

    let (retrain_study, retrain_space) = match &train_best {
        Some(best) if config.retrain_trials > 0 => {
            let space = config.space.tighten(best, config.tighten_factor)?;
            let study = run_study_parallel(
                |params: &[f64]| objective_of(config, params, &config.experiments),
                &space,
                config.retrain_trials,
                retrain_seed,
                &config.sampler,
                std::slice::from_ref(best),
                jobs,
            )?;
            (Some(study), Some(space))
        }
        _ => (None, None),
    };

    let best_params = retrain_study
        .as_ref()
        .and_then(|s| s.best())
        .map(|t| t.params.clone())
        .or_else(|| train_best.clone());
    let best_objective = best_params
        .as_ref()
        .and_then(|p| objective_of(config, p, &config.experiments).ok());

    let names = config.space.names();
    let mut report = Vec::with_capacity(config.experiments.len());
    let mut fits = Vec::with_capacity(config.experiments.len());
    for exp in &config.experiments {
        let predicted = best_params
            .as_ref()
            .and_then(|p| evaluate_model(&config.model, &names, p, exp).ok());
        let value = match &predicted {
            Some(pred) => report_error(&exp.loss, pred, &exp.response, exp.report_threshold)?,
            None => ReportValue::NoPoints,
        };
        let clean = match (&predicted, &exp.clean_response) {
            (Some(pred), Some(clean)) => {
                Some(report_error(&exp.loss, pred, clean, exp.report_threshold)?)
            }
            _ => None,
        };
        report.push(ExperimentReport {
            name: exp.name.clone(),
            threshold: exp.report_threshold,
            value,
            clean,
        });
        fits.push(predicted);
    }

    Ok(ExtractionResult {
        param_names: names,
        best_params,
        best_objective,
        train_best,
        train_curve: best_so_far(&train_study),
        test_curve: holdout_best_so_far(&train_study),
        retrain_curve: retrain_study.as_ref().map(best_so_far).unwrap_or_default(),
        report,
        fits,
        train_study,
        retrain_study,
        retrain_space,
        splits,
        provenance: Provenance {
            seed: config.seed,
            config_hash: config.hash(),
            split_seeds,
            train_seed,
            retrain_seed,
        },
    })
}

/// Results of one extraction per seed plus the per-experiment median report.
#[derive(Debug, Clone)]
pub struct SeedSweep {
    pub results: Vec<(u64, ExtractionResult)>,
    pub median_report: Vec<(String, Option<f64>)>,
}

/// Independent extractions, one per seed, run concurrently.
pub fn extract_seeds(config: &ExtractionConfig, seeds: &[u64]) -> Result<SeedSweep> {
    use rayon::prelude::*;

    let results = seeds
        .par_iter()
        .map(|&seed| {
            extract(&ExtractionConfig {
                seed,
                ..config.clone()
            })
            .map(|r| (seed, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let median_report = config
        .experiments
        .iter()
        .enumerate()
        .map(|(i, exp)| {
            let values: Vec<f64> = results
                .iter()
                .filter_map(|(_, r)| r.report[i].value.value())
                .collect();
            (exp.name.clone(), median(values))
        })
        .collect();
    Ok(SeedSweep {
        results,
        median_report,
    })
}

pub fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}

fn cell(value: Option<f64>) -> String {
    value.map(number).unwrap_or_default()
}

fn report_cell(value: &ReportValue) -> String {
    cell(value.value())
}

/// Makes an experiment name safe to embed in a file name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
    fs::write(dir.join(name), contents)
        .map_err(|e| Error::InvalidInput(format!("writing {name}: {e}")))
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for row in rows {
        w.write_record(row).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn strings(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Writes the result directory layout into `dir` (which must exist).
pub fn write_result_files(
    result: &ExtractionResult,
    config: &ExtractionConfig,
    dir: &Path,
) -> Result<()> {
    let mut buf = Vec::new();
    result.train_study.write_csv(&mut buf)?;
    write_file(dir, "trials_train.csv", &buf)?;

    buf.clear();
    match &result.retrain_study {
        Some(study) => study.write_csv(&mut buf)?,
        None => {
            let mut header = strings(&["trial", "status", "objective"]);
            header.extend(result.param_names.iter().cloned());
            buf = csv_bytes(&header, &[]);
        }
    }
    write_file(dir, "trials_retrain.csv", &buf)?;

    let rows_len = result
        .train_curve
        .len()
        .max(result.test_curve.len())
        .max(result.retrain_curve.len());
    let at = |curve: &[Option<f64>], i: usize| cell(curve.get(i).copied().flatten());
    let rows: Vec<Vec<String>> = (0..rows_len)
        .map(|i| {
            vec![
                i.to_string(),
                at(&result.train_curve, i),
                at(&result.test_curve, i),
                at(&result.retrain_curve, i),
            ]
        })
        .collect();
    write_file(
        dir,
        "curves.csv",
        &csv_bytes(
            &strings(&["trial", "train_error", "test_error", "retrain_error"]),
            &rows,
        ),
    )?;

    let mut best = String::new();
    if let Some(params) = &result.best_params {
        for (name, value) in result.param_names.iter().zip(params) {
            best.push_str(&format!("{name},{}\n", number(*value)));
        }
    }
    write_file(dir, "best_params.csv", best.as_bytes())?;

    let any_clean = result.report.iter().any(|r| r.clean.is_some());
    let mut header = strings(&["experiment", "threshold", "points", "report_error"]);
    if any_clean {
        header.push("clean_report_error".into());
    }
    let rows: Vec<Vec<String>> = result
        .report
        .iter()
        .map(|r| {
            let mut row = vec![
                r.name.clone(),
                number(r.threshold),
                r.value.points().to_string(),
                report_cell(&r.value),
            ];
            if any_clean {
                row.push(r.clean.as_ref().map(report_cell).unwrap_or_default());
            }
            row
        })
        .collect();
    write_file(dir, "report.csv", &csv_bytes(&header, &rows))?;

    for (exp, fit) in config.experiments.iter().zip(&result.fits) {
        let mut header = exp.columns.clone();
        header.push("measured".into());
        header.push("predicted".into());
        if exp.clean_response.is_some() {
            header.push("clean".into());
        }
        let rows: Vec<Vec<String>> = (0..exp.len())
            .map(|i| {
                let mut row: Vec<String> = exp.stimulus[i].iter().map(|&v| number(v)).collect();
                row.push(number(exp.response[i]));
                row.push(cell(fit.as_ref().map(|f| f[i])));
                if let Some(clean) = &exp.clean_response {
                    row.push(number(clean[i]));
                }
                row
            })
            .collect();
        write_file(
            dir,
            &format!("fit_{}.csv", file_stem(&exp.name)),
            &csv_bytes(&header, &rows),
        )?;
    }

    let p = &result.provenance;
    let mut prov = format!(
        "seed,{}\nconfig_hash,{}\ntrain_seed,{}\nretrain_seed,{}\n",
        p.seed, p.config_hash, p.train_seed, p.retrain_seed
    );
    for (exp, seed) in config.experiments.iter().zip(&p.split_seeds) {
        prov.push_str(&format!("split_seed_{},{seed}\n", file_stem(&exp.name)));
    }
    prov.push_str(&format!("has_best,{}\n", result.has_best()));
    write_file(dir, "provenance.csv", prov.as_bytes())
}

/// Builds the directory next to `out` and renames it into place on success,
/// so a failed run never leaves a partial result directory.
pub fn write_dir_atomically<F>(out: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    let io = |what: &str, e: std::io::Error| {
        Error::InvalidInput(format!("{what} {}: {e}", out.display()))
    };
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(|e| io("creating parent of", e))?;
    let staging = tempfile::Builder::new()
        .prefix(".dfx-staging-")
        .tempdir_in(&parent)
        .map_err(|e| io("staging", e))?;
    fill(staging.path())?;
    if out.exists() {
        fs::remove_dir_all(out).map_err(|e| io("replacing", e))?;
    }
    let staged = staging.keep();
    fs::rename(&staged, out).map_err(|e| {
        let _ = fs::remove_dir_all(&staged);
        io("renaming into", e)
    })
}

/// Writes the full result layout to `out` atomically.
pub fn write_result_dir(
    result: &ExtractionResult,
    config: &ExtractionConfig,
    out: &Path,
) -> Result<()> {
    write_dir_atomically(out, |dir| write_result_files(result, config, dir))
}

/// Writes `summary.csv` for a seed sweep: one row per seed and experiment.
pub fn write_sweep_summary<W: Write>(sweep: &SeedSweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidInput(format!("writing summary: {e}"));
    w.write_record(["seed", "experiment", "report_error"])
        .map_err(err)?;
    for (seed, result) in &sweep.results {
        for r in &result.report {
            w.write_record([seed.to_string(), r.name.clone(), report_cell(&r.value)])
                .map_err(err)?;
        }
    }
    for (name, value) in &sweep.median_report {
        w.write_record(["median".to_string(), name.clone(), cell(*value)])
            .map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidInput(format!("writing summary: {e}")))
}
