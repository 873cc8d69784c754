//! Command-line front end for `dfx-core`.
//!
//! Exit status is 0 on success, 1 for usage or validation errors and 2 when
//! a run fails after its inputs validated.

pub mod config;
pub mod data;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use dfx_core::format::number;
use dfx_core::loss::ReportValue;
use dfx_core::models::{evaluate_model, Experiment};
use dfx_core::workflow::{
    corrupt_experiments, evaluate_fit, extract_seeds, extract_with_jobs, file_stem,
    write_dir_atomically, write_result_files, write_sweep_summary, FitTarget,
};

use crate::config::{load_config, LoadedConfig};
use crate::data::{params_in_order, read_params_file, write_experiment_csv};

pub const SEED_ENV: &str = "DFX_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "dfx",
    version,
    about = "Derivative-free compact-model parameter extraction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the split, optimise, tighten and retrain pipeline.
    Fit {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Concurrent objective evaluations per batch.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Comma-separated seeds; one result directory per seed plus summary.csv.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// Print the report error of each experiment for a parameter file.
    Eval {
        config: PathBuf,
        #[arg(long)]
        params: PathBuf,
    },
    /// Write corrupted copies of the experiment data next to the originals.
    Corrupt {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write model predictions for a parameter file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarise a result directory written by `fit`.
    Report { dir: PathBuf },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(
    args: I,
    env_seed: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    match execute(&cli.command, env_seed, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse_seed(env_seed: Option<&str>) -> Result<Option<u64>, CliError> {
    env_seed
        .map(|s| {
            s.trim().parse::<u64>().map_err(|_| {
                CliError::Validation(vec![format!(
                    "{SEED_ENV}=`{s}` is not a nonnegative integer"
                )])
            })
        })
        .transpose()
}

pub fn execute(
    command: &Command,
    env_seed: Option<&str>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let seed = parse_seed(env_seed)?;
    match command {
        Command::Fit {
            config,
            out,
            jobs,
            seeds,
        } => fit(config, out, *jobs, seeds.as_deref(), seed, stdout, stderr),
        Command::Eval { config, params } => eval(config, params, seed, stdout),
        Command::Corrupt { config, out } => corrupt(config, out, seed, stderr),
        Command::Simulate {
            config,
            params,
            out,
        } => simulate(config, params, out, seed),
        Command::Report { dir } => report(dir, stdout),
    }
}

/// Applies the config's corruption section, if any, to its experiments.
fn apply_corruption(loaded: &mut LoadedConfig, stderr: &mut dyn Write) -> Result<(), CliError> {
    let Some(spec) = loaded.corruption else {
        return Ok(());
    };
    let corrupted = corrupt_experiments(&loaded.extraction.experiments, &spec).map_err(runtime)?;
    loaded.extraction.experiments = corrupted
        .into_iter()
        .map(|c| {
            if let Some(w) = &c.warning {
                let _ = writeln!(stderr, "warning: {w}");
            }
            c.experiment
        })
        .collect();
    Ok(())
}

fn fmt_report(value: &ReportValue) -> String {
    match value.value() {
        Some(v) => format!("{v:.3e}"),
        None => "no points".to_string(),
    }
}

fn fit(
    path: &Path,
    out: &Path,
    jobs: usize,
    seeds: Option<&[u64]>,
    seed: Option<u64>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let mut loaded = load_config(path, seed)?;
    apply_corruption(&mut loaded, stderr)?;
    let config = &loaded.extraction;

    if let Some(seeds) = seeds {
        if seeds.is_empty() {
            return Err(CliError::Usage("--seeds needs at least one seed".into()));
        }
        let sweep = extract_seeds(config, seeds).map_err(runtime)?;
        write_dir_atomically(out, |dir| {
            for (s, result) in &sweep.results {
                let sub = dir.join(format!("seed_{s}"));
                fs::create_dir(&sub).map_err(|e| {
                    dfx_core::Error::InvalidInput(format!("{}: {e}", sub.display()))
                })?;
                let seeded = dfx_core::workflow::ExtractionConfig {
                    seed: *s,
                    ..config.clone()
                };
                write_result_files(result, &seeded, &sub)?;
            }
            let file = fs::File::create(dir.join("summary.csv"))
                .map_err(|e| dfx_core::Error::InvalidInput(format!("summary.csv: {e}")))?;
            write_sweep_summary(&sweep, file)
        })
        .map_err(runtime)?;
        for (name, median) in &sweep.median_report {
            let shown = median
                .map(|v| format!("{v:.3e}"))
                .unwrap_or_else(|| "no points".into());
            let _ = writeln!(stdout, "{name}\tmedian report error {shown}");
        }
        return Ok(());
    }

    let result = extract_with_jobs(config, jobs).map_err(runtime)?;
    write_dir_atomically(out, |dir| write_result_files(&result, config, dir)).map_err(runtime)?;
    if !result.has_best() {
        return Err(CliError::Runtime(format!(
            "every trial failed; see {}",
            out.join("trials_train.csv").display()
        )));
    }
    if let Some(obj) = result.best_objective {
        let _ = writeln!(stdout, "objective\t{obj:.3e}");
    }
    for r in &result.report {
        let clean = r
            .clean
            .as_ref()
            .map(|c| format!("\tclean {}", fmt_report(c)))
            .unwrap_or_default();
        let _ = writeln!(stdout, "{}\t{}{clean}", r.name, fmt_report(&r.value));
    }
    Ok(())
}

fn load_params(loaded: &LoadedConfig, params: &Path) -> Result<Vec<f64>, CliError> {
    let pairs = read_params_file(params)?;
    params_in_order(params, &pairs, &loaded.extraction.space.names())
}

fn eval(
    path: &Path,
    params: &Path,
    seed: Option<u64>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let loaded = load_config(path, seed)?;
    let values = load_params(&loaded, params)?;
    let config = &loaded.extraction;
    let reports = evaluate_fit(
        &config.model,
        &config.space.names(),
        &values,
        &config.experiments,
        FitTarget::Stored,
    )
    .map_err(runtime)?;
    for (name, value) in reports {
        let _ = writeln!(stdout, "{name}\t{}", fmt_report(&value));
    }
    Ok(())
}

fn corrupt(
    path: &Path,
    out: &Path,
    seed: Option<u64>,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let loaded = load_config(path, seed)?;
    let spec = loaded.corruption.ok_or_else(|| {
        CliError::Validation(vec![format!("{}: no [corruption] section", path.display())])
    })?;
    let corrupted = corrupt_experiments(&loaded.extraction.experiments, &spec).map_err(runtime)?;
    for c in &corrupted {
        if let Some(w) = &c.warning {
            let _ = writeln!(stderr, "warning: {w}");
        }
    }
    write_dir_atomically(out, |dir| {
        let io = |e: std::io::Error| dfx_core::Error::InvalidInput(e.to_string());
        let csv_err = |e: CliError| dfx_core::Error::InvalidInput(e.to_string());
        let mut altered = String::from("experiment,row\n");
        for c in &corrupted {
            let exp: &Experiment = &c.experiment;
            let stem = file_stem(&exp.name);
            let clean = exp
                .clean_response
                .as_ref()
                .expect("corruption keeps the original");
            let f = fs::File::create(dir.join(format!("{stem}.csv"))).map_err(io)?;
            write_experiment_csv(exp, &exp.response, f).map_err(csv_err)?;
            let f = fs::File::create(dir.join(format!("{stem}_clean.csv"))).map_err(io)?;
            write_experiment_csv(exp, clean, f).map_err(csv_err)?;
            for i in &c.altered {
                altered.push_str(&format!("{},{i}\n", exp.name));
            }
        }
        fs::write(dir.join("altered.csv"), altered).map_err(io)
    })
    .map_err(runtime)
}

fn simulate(path: &Path, params: &Path, out: &Path, seed: Option<u64>) -> Result<(), CliError> {
    let loaded = load_config(path, seed)?;
    let values = load_params(&loaded, params)?;
    let config = &loaded.extraction;
    let names = config.space.names();

    let mut columns: Vec<String> = Vec::new();
    for exp in &config.experiments {
        for c in &exp.columns {
            if !columns.contains(c) {
                columns.push(c.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["experiment".to_string(), "row".to_string()];
    header.extend(columns.iter().cloned());
    header.push("predicted".into());
    w.write_record(&header).map_err(runtime)?;
    for exp in &config.experiments {
        let predicted = evaluate_model(&config.model, &names, &values, exp).map_err(runtime)?;
        for (i, (row, y)) in exp.stimulus.iter().zip(&predicted).enumerate() {
            let mut fields = vec![exp.name.clone(), i.to_string()];
            for c in &columns {
                fields.push(
                    exp.columns
                        .iter()
                        .position(|x| x == c)
                        .map(|j| number(row[j]))
                        .unwrap_or_default(),
                );
            }
            fields.push(number(*y));
            w.write_record(&fields).map_err(runtime)?;
        }
    }
    let bytes = w.into_inner().map_err(runtime)?;
    write_file_atomically(out, &bytes)
}

fn write_file_atomically(out: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file_name = out
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", out.display())))?
        .to_string_lossy()
        .into_owned();
    let staging = out.with_file_name(format!(".{file_name}.{}.tmp", std::process::id()));
    let fail = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", out.display()));
    fs::write(&staging, bytes).map_err(fail)?;
    fs::rename(&staging, out).map_err(|e| {
        let _ = fs::remove_file(&staging);
        fail(e)
    })
}

fn read_csv_rows(
    path: &Path,
    has_header: bool,
) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let header = if has_header {
        reader
            .headers()
            .map_err(runtime)?
            .iter()
            .map(str::to_string)
            .collect()
    } else {
        Vec::new()
    };
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok((header, rows))
}

fn report(dir: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    if !dir.is_dir() {
        return Err(CliError::Validation(vec![format!(
            "{} is not a result directory",
            dir.display()
        )]));
    }
    let (_, best) = read_csv_rows(&dir.join("best_params.csv"), false)?;
    let (header, curves) = read_csv_rows(&dir.join("curves.csv"), true)?;
    let (report_header, reports) = read_csv_rows(&dir.join("report.csv"), true)?;

    let mut text = String::new();
    if best.is_empty() {
        text.push_str("no successful trial\n");
    } else {
        text.push_str("best parameters\n");
        for row in &best {
            text.push_str(&format!(
                "  {:<14} {}\n",
                row[0],
                row.get(1).map(String::as_str).unwrap_or("")
            ));
        }
    }
    text.push_str("final Error*\n");
    for (col, name) in header.iter().enumerate().skip(1) {
        let last = curves
            .iter()
            .rev()
            .find_map(|r| r.get(col).filter(|c| !c.is_empty()));
        text.push_str(&format!(
            "  {:<14} {}\n",
            name,
            last.map(String::as_str).unwrap_or("-")
        ));
    }
    text.push_str("report error\n");
    let col = |name: &str| report_header.iter().position(|h| h == name);
    let (err_col, clean_col, points_col) = (
        col("report_error"),
        col("clean_report_error"),
        col("points"),
    );
    for row in &reports {
        let get = |c: Option<usize>| c.and_then(|c| row.get(c)).filter(|v| !v.is_empty());
        let value = get(err_col).map(String::as_str).unwrap_or("no points");
        let points = get(points_col).map(String::as_str).unwrap_or("0");
        let clean = get(clean_col)
            .map(|c| format!("  clean {c}"))
            .unwrap_or_default();
        text.push_str(&format!(
            "  {:<14} {value}  ({points} points){clean}\n",
            row[0]
        ));
    }
    stdout.write_all(text.as_bytes()).map_err(runtime)
}
