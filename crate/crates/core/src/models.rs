//! Device models evaluated by the objective: a SPICE-style diode with series
//! resistance, a square-law FET, and a file-based bridge to external simulators.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::Duration;

use serde::Serialize;
use wait_timeout::ChildExt;

use crate::error::{Error, EvalFailure, Result};
use crate::format::number;
use crate::loss::LossSpec;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

pub fn thermal_voltage(temperature: f64) -> f64 {
    BOLTZMANN * temperature / ELEMENTARY_CHARGE
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiodeParams {
    pub is: f64,
    pub n: f64,
    pub rs: f64,
    pub temperature: f64,
}

impl DiodeParams {
    pub fn new(is: f64, n: f64, rs: f64) -> Self {
        Self {
            is,
            n,
            rs,
            temperature: 300.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.is > 0.0 && self.n > 0.0 && self.rs >= 0.0 && self.temperature > 0.0) {
            return Err(Error::InvalidInput(format!(
                "invalid diode parameters {self:?}"
            )));
        }
        if ![self.is, self.n, self.rs, self.temperature]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "non-finite diode parameters {self:?}"
            )));
        }
        Ok(())
    }
}

const DIODE_MAX_ITER: usize = 200;

/// Diode current `I = IS·(exp((V − I·RS)/(n·V_T)) − 1)`.
///
/// Solved for the junction voltage `Vj = V − I·RS`, where
/// `f(Vj) = Vj + RS·IS·expm1(Vj/(n·V_T)) − V` is strictly increasing and
/// convex. The root is bracketed by `0` and `V`, and for forward bias also by
/// the point where the exponential term alone reaches `V`, so the exponent
/// never overflows.
pub fn diode_current(params: &DiodeParams, v: f64) -> Result<f64> {
    params.validate()?;
    if !v.is_finite() {
        return Err(Error::InvalidInput(format!(
            "bias voltage is not finite: {v}"
        )));
    }
    let nvt = params.n * thermal_voltage(params.temperature);
    if v == 0.0 {
        return Ok(0.0);
    }
    if params.rs == 0.0 {
        let i = params.is * (v / nvt).exp_m1();
        return if i.is_finite() {
            Ok(i)
        } else {
            Err(Error::Numeric(format!(
                "diode current overflows at V = {v}"
            )))
        };
    }

    let k = params.rs * params.is;
    let (mut lo, mut hi) = if v > 0.0 {
        (0.0, v.min(nvt * (v / k).ln_1p()))
    } else {
        (v, 0.0)
    };
    let f = |vj: f64| vj + k * (vj / nvt).exp_m1() - v;
    let tol = 1e-15 * v.abs().max(1.0);

    // Newton from the upper end approaches the root from the right for a convex f.
    let mut vj = hi;
    let mut converged = false;
    for _ in 0..DIODE_MAX_ITER {
        let fx = f(vj);
        if fx.abs() <= tol {
            converged = true;
            break;
        }
        if fx > 0.0 {
            hi = vj;
        } else {
            lo = vj;
        }
        let slope = 1.0 + k / nvt * (vj / nvt).exp();
        let mut next = vj - fx / slope;
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - vj).abs();
        vj = next;
        if step <= 1e-12 * vj.abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "diode solve did not converge after {DIODE_MAX_ITER} iterations at V = {v}"
        )));
    }
    Ok(params.is * (vj / nvt).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FetParams {
    pub vth: f64,
    pub k: f64,
    pub lambda: f64,
}

pub const FET_GM_STEP: f64 = 1e-3;

/// Square-law drain current with channel-length modulation.
pub fn fet_drain_current(p: &FetParams, vg: f64, vd: f64) -> f64 {
    let vov = vg - p.vth;
    if vov <= 0.0 {
        return 0.0;
    }
    let clm = 1.0 + p.lambda * vd;
    if vd < vov {
        p.k * (2.0 * vov * vd - vd * vd) * clm
    } else {
        p.k * vov * vov * clm
    }
}

/// Drain current and transconductance; `gm` is a central difference in `VG`.
pub fn fet_outputs(p: &FetParams, vg: f64, vd: f64) -> (f64, f64) {
    let id = fet_drain_current(p, vg, vd);
    let h = FET_GM_STEP;
    let gm = (fet_drain_current(p, vg + h, vd) - fet_drain_current(p, vg - h, vd)) / (2.0 * h);
    (id, gm)
}

/// One measurement campaign: stimulus rows, measured responses and loss settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Experiment {
    pub name: String,
    pub columns: Vec<String>,
    pub stimulus: Vec<Vec<f64>>,
    pub response: Vec<f64>,
    pub loss: LossSpec,
    pub weight: f64,
    pub report_threshold: f64,
    /// Output selector for multi-output models (`ID` or `gm` for the FET).
    pub output: Option<String>,
    /// Responses before corruption, when the data were corrupted in-process.
    pub clean_response: Option<Vec<f64>>,
}

impl Experiment {
    pub fn new(
        name: impl Into<String>,
        columns: Vec<String>,
        stimulus: Vec<Vec<f64>>,
        response: Vec<f64>,
        loss: LossSpec,
    ) -> Result<Self> {
        let exp = Self {
            name: name.into(),
            columns,
            stimulus,
            response,
            loss,
            weight: 1.0,
            report_threshold: 0.0,
            output: None,
            clean_response: None,
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_report_threshold(mut self, threshold: f64) -> Self {
        self.report_threshold = threshold;
        self
    }

    pub fn with_output(mut self, output: impl Into<String>) -> Self {
        self.output = Some(output.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stimulus.len() != self.response.len() {
            return Err(Error::InvalidInput(format!(
                "experiment `{}`: {} stimulus rows but {} responses",
                self.name,
                self.stimulus.len(),
                self.response.len()
            )));
        }
        if let Some((i, row)) = self
            .stimulus
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != self.columns.len())
        {
            return Err(Error::InvalidInput(format!(
                "experiment `{}`: row {i} has {} values for {} stimulus columns",
                self.name,
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(clean) = &self.clean_response {
            if clean.len() != self.response.len() {
                return Err(Error::InvalidInput(format!(
                    "experiment `{}`: clean response length mismatch",
                    self.name
                )));
            }
        }
        self.loss
            .validate()
            .map_err(|e| Error::Config(format!("experiment `{}`: {e}", self.name)))
    }

    pub fn len(&self) -> usize {
        self.response.len()
    }

    pub fn is_empty(&self) -> bool {
        self.response.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns
            .iter()
            .position(|c| c.eq_ignore_ascii_case(name))
    }

    fn require_column(&self, name: &str) -> Result<usize> {
        self.column_index(name).ok_or_else(|| {
            Error::Config(format!(
                "experiment `{}` has no stimulus column `{name}`",
                self.name
            ))
        })
    }

    /// The experiment restricted to the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Experiment {
        Experiment {
            name: self.name.clone(),
            columns: self.columns.clone(),
            stimulus: rows.iter().map(|&i| self.stimulus[i].clone()).collect(),
            response: rows.iter().map(|&i| self.response[i]).collect(),
            loss: self.loss,
            weight: self.weight,
            report_threshold: self.report_threshold,
            output: self.output.clone(),
            clean_response: self
                .clean_response
                .as_ref()
                .map(|c| rows.iter().map(|&i| c[i]).collect()),
        }
    }
}

/// How to invoke an external simulator: `program args... <dir>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalCommand {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalCommand {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            timeout: Self::DEFAULT_TIMEOUT,
        }
    }

    pub fn with_args(mut self, args: Vec<String>) -> Self {
        self.args = args;
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Diode { temperature: f64 },
    Fet,
    External(ExternalCommand),
}

const DIODE_PARAMS: [&str; 3] = ["IS", "N", "RS"];
const FET_PARAMS: [&str; 3] = ["VTH", "K", "LAM"];

impl Model {
    pub fn diode() -> Self {
        Model::Diode { temperature: 300.0 }
    }

    /// Returns the parameter names a built-in model requires (empty for external models).
    pub fn required_params(&self) -> &'static [&'static str] {
        match self {
            Model::Diode { .. } => &DIODE_PARAMS,
            Model::Fet => &FET_PARAMS,
            Model::External(_) => &[],
        }
    }

    /// Checks that `names` are exactly the model's parameters.
    pub fn check_params(&self, names: &[String]) -> Result<()> {
        let required = self.required_params();
        if required.is_empty() {
            return Ok(());
        }
        let mut problems = Vec::new();
        for name in names {
            if !required.iter().any(|r| r.eq_ignore_ascii_case(name)) {
                problems.push(format!(
                    "unknown parameter `{name}` (expected one of {})",
                    required.join(", ")
                ));
            }
        }
        for r in required {
            if !names.iter().any(|n| n.eq_ignore_ascii_case(r)) {
                problems.push(format!("missing parameter `{r}`"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Checks that the experiment carries the stimulus columns and output selector the model needs.
    pub fn check_experiment(&self, exp: &Experiment) -> Result<()> {
        match self {
            Model::Diode { .. } => {
                exp.require_column("V")?;
            }
            Model::Fet => {
                exp.require_column("VG")?;
                exp.require_column("VD")?;
                fet_output(exp)?;
            }
            Model::External(_) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FetOutput {
    DrainCurrent,
    Transconductance,
}

fn fet_output(exp: &Experiment) -> Result<FetOutput> {
    match exp.output.as_deref() {
        Some(o) if o.eq_ignore_ascii_case("id") => Ok(FetOutput::DrainCurrent),
        Some(o) if o.eq_ignore_ascii_case("gm") => Ok(FetOutput::Transconductance),
        Some(o) => Err(Error::Config(format!(
            "experiment `{}`: unknown fet output `{o}` (use ID or gm)",
            exp.name
        ))),
        None => Err(Error::Config(format!(
            "experiment `{}`: fet model needs an output selector (ID or gm)",
            exp.name
        ))),
    }
}

fn bind<const N: usize>(model: &Model, names: &[String], values: &[f64]) -> Result<[f64; N]> {
    if names.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} names for {} values",
            names.len(),
            values.len()
        )));
    }
    model.check_params(names)?;
    let required = model.required_params();
    let mut out = [0.0; N];
    for (slot, r) in out.iter_mut().zip(required) {
        let i = names
            .iter()
            .position(|n| n.eq_ignore_ascii_case(r))
            .expect("checked above");
        *slot = values[i];
    }
    Ok(out)
}

/// Predicted responses for every stimulus row of `exp`.
pub fn evaluate_model(
    model: &Model,
    names: &[String],
    values: &[f64],
    exp: &Experiment,
) -> Result<Vec<f64>> {
    match model {
        Model::Diode { temperature } => {
            let [is, n, rs] = bind::<3>(model, names, values)?;
            let params = DiodeParams {
                is,
                n,
                rs,
                temperature: *temperature,
            };
            let col = exp.require_column("V")?;
            exp.stimulus
                .iter()
                .map(|row| diode_current(&params, row[col]))
                .collect()
        }
        Model::Fet => {
            let [vth, k, lambda] = bind::<3>(model, names, values)?;
            let params = FetParams { vth, k, lambda };
            let (g, d) = (exp.require_column("VG")?, exp.require_column("VD")?);
            let which = fet_output(exp)?;
            Ok(exp
                .stimulus
                .iter()
                .map(|row| {
                    let (id, gm) = fet_outputs(&params, row[g], row[d]);
                    match which {
                        FetOutput::DrainCurrent => id,
                        FetOutput::Transconductance => gm,
                    }
                })
                .collect())
        }
        Model::External(cmd) => external_simulate(cmd, names, values, exp),
    }
}

fn io_failure(what: &str, e: std::io::Error) -> Error {
    EvalFailure::Io(format!("{what}: {e}")).into()
}

/// Runs one external evaluation through the file protocol.
///
/// A fresh temporary directory receives `params.csv` (`name,value` rows, no
/// header) and `stimulus.csv` (header, then one row per point). The command is
/// run as `program args... <dir>`; on exit code 0 it must have written
/// `prediction.csv` with exactly one number per stimulus row.
pub fn external_simulate(
    cmd: &ExternalCommand,
    names: &[String],
    values: &[f64],
    exp: &Experiment,
) -> Result<Vec<f64>> {
    if names.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "{} names for {} values",
            names.len(),
            values.len()
        )));
    }
    let dir = tempfile::Builder::new()
        .prefix("dfx-sim-")
        .tempdir()
        .map_err(|e| io_failure("temp dir", e))?;

    let mut params = String::new();
    for (n, v) in names.iter().zip(values) {
        params.push_str(&format!("{n},{}\n", number(*v)));
    }
    fs::write(dir.path().join("params.csv"), params).map_err(|e| io_failure("params.csv", e))?;

    let mut stimulus = exp.columns.join(",");
    stimulus.push('\n');
    for row in &exp.stimulus {
        let cells: Vec<String> = row.iter().map(|&v| number(v)).collect();
        stimulus.push_str(&cells.join(","));
        stimulus.push('\n');
    }
    fs::write(dir.path().join("stimulus.csv"), stimulus)
        .map_err(|e| io_failure("stimulus.csv", e))?;

    let stdout =
        fs::File::create(dir.path().join("stdout.log")).map_err(|e| io_failure("stdout.log", e))?;
    let stderr_path = dir.path().join("stderr.log");
    let stderr = fs::File::create(&stderr_path).map_err(|e| io_failure("stderr.log", e))?;
    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .arg(dir.path())
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(stderr)
        .spawn()
        .map_err(|e| EvalFailure::Spawn(format!("{}: {e}", cmd.program.display())))?;

    let status = match child
        .wait_timeout(cmd.timeout)
        .map_err(|e| io_failure("waiting for simulator", e))?
    {
        Some(status) => status,
        None => {
            let _ = child.kill();
            let _ = child.wait();
            let stderr = fs::read_to_string(&stderr_path).unwrap_or_default();
            return Err(EvalFailure::Timeout {
                seconds: cmd.timeout.as_secs_f64(),
                stderr,
            }
            .into());
        }
    };
    if !status.success() {
        let stderr = fs::read_to_string(&stderr_path).unwrap_or_default();
        return Err(EvalFailure::NonzeroExit {
            code: status.code(),
            stderr,
        }
        .into());
    }

    let text = fs::read_to_string(dir.path().join("prediction.csv"))
        .map_err(|e| EvalFailure::Malformed(format!("prediction.csv: {e}")))?;
    let mut predictions = Vec::with_capacity(exp.len());
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| {
            EvalFailure::Malformed(format!("prediction.csv line {}: `{line}`", line_no + 1))
        })?;
        predictions.push(value);
    }
    if predictions.len() < exp.len() {
        return Err(EvalFailure::ShortOutput {
            expected: exp.len(),
            got: predictions.len(),
        }
        .into());
    }
    if predictions.len() > exp.len() {
        return Err(EvalFailure::Malformed(format!(
            "prediction.csv has {} rows, expected {}",
            predictions.len(),
            exp.len()
        ))
        .into());
    }
    if let Some(bad) = predictions.iter().find(|p| !p.is_finite()) {
        return Err(EvalFailure::NonFinite(format!("{bad}")).into());
    }
    Ok(predictions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Principal-branch Lambert W from ln(x), via Newton on t + e^t = ln x with w = e^t.
    fn lambert_w_from_ln(ln_x: f64) -> f64 {
        let mut t = if ln_x > 1.0 {
            (ln_x - ln_x.ln()).ln()
        } else {
            ln_x.min(0.0) - 0.5
        };
        for _ in 0..100 {
            let et = t.exp();
            let step = (t + et - ln_x) / (1.0 + et);
            t -= step;
            if step.abs() < 1e-15 * t.abs().max(1.0) {
                break;
            }
        }
        t.exp()
    }

    fn lambert_current(p: &DiodeParams, v: f64) -> f64 {
        let nvt = p.n * thermal_voltage(p.temperature);
        let ln_x = (p.is * p.rs / nvt).ln() + (v + p.is * p.rs) / nvt;
        nvt / p.rs * lambert_w_from_ln(ln_x) - p.is
    }

    #[test]
    fn thermal_voltage_at_300k() {
        assert_relative_eq!(
            thermal_voltage(300.0),
            0.025_851_999_786_435_53,
            max_relative = 1e-14
        );
    }

    #[test]
    fn zero_bias_is_zero_current() {
        for rs in [0.0, 100.0, 150.0] {
            assert_eq!(
                diode_current(&DiodeParams::new(1e-23, 1.1, rs), 0.0).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn no_series_resistance_closed_form() {
        let i = diode_current(&DiodeParams::new(1e-23, 1.0, 0.0), 0.6).unwrap();
        assert_relative_eq!(i, 1.201_036_955_312_853_4e-13, max_relative = 1e-12);
    }

    #[test]
    fn matches_lambert_w() {
        let p = DiodeParams::new(1e-23, 1.1, 120.0);
        for v in [0.48, 1.0, 2.0] {
            let newton = diode_current(&p, v).unwrap();
            assert_relative_eq!(newton, lambert_current(&p, v), max_relative = 1e-9);
        }
    }

    #[test]
    fn reverse_and_high_bias() {
        let p = DiodeParams::new(1e-22, 0.5, 150.0);
        for v in [-10.0, -1.0, -1e-3, 1e-3, 5.0, 10.0] {
            let i = diode_current(&p, v).unwrap();
            assert!(i.is_finite());
            assert_eq!(i.signum(), v.signum());
        }
        let reverse = diode_current(&p, -10.0).unwrap();
        assert_relative_eq!(reverse, -1e-22, max_relative = 1e-9);
    }

    #[test]
    fn monotone_in_bias() {
        let p = DiodeParams::new(1e-25, 1.5, 100.0);
        let mut prev = f64::NEG_INFINITY;
        for i in -500..=2000 {
            let cur = diode_current(&p, i as f64 * 1e-3).unwrap();
            assert!(cur >= prev);
            prev = cur;
        }
    }

    #[test]
    fn invalid_diode_params() {
        assert!(diode_current(&DiodeParams::new(0.0, 1.0, 1.0), 0.5).is_err());
        assert!(diode_current(&DiodeParams::new(1e-20, -1.0, 1.0), 0.5).is_err());
        assert!(diode_current(&DiodeParams::new(1e-20, 1.0, -1.0), 0.5).is_err());
        assert!(diode_current(&DiodeParams::new(1e-20, 1.0, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn fet_regions() {
        let p = FetParams {
            vth: -2.0,
            k: 0.1,
            lambda: 0.01,
        };
        assert_eq!(fet_outputs(&p, -2.5, 5.0), (0.0, 0.0));
        let (id, gm) = fet_outputs(&p, -1.0, 5.0);
        assert_relative_eq!(id, 0.105, max_relative = 1e-12);
        let analytic = 2.0 * 0.1 * 1.0 * 1.05;
        assert_relative_eq!(gm, analytic, max_relative = 1e-5);
    }

    #[test]
    fn fet_continuous_at_saturation_edge() {
        let p = FetParams {
            vth: -2.0,
            k: 0.1,
            lambda: 0.01,
        };
        let vov: f64 = 1.3;
        let edge = vov;
        let sat = p.k * vov * vov * (1.0 + p.lambda * edge);
        let triode = p.k * (2.0 * vov * edge - edge * edge) * (1.0 + p.lambda * edge);
        assert!((sat - triode).abs() <= 1e-12);
        let below = fet_drain_current(&p, p.vth + vov, edge * (1.0 - 1e-12));
        assert!((below - sat).abs() <= 1e-12);
    }

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn diode_sweep(k: usize) -> Experiment {
        let stimulus = (0..k).map(|i| vec![0.48 + 0.04 * i as f64]).collect();
        Experiment::new(
            "iv",
            names(&["V"]),
            stimulus,
            vec![1e-6; k],
            LossSpec::clipped(1e-10, 0.15f64.sqrt()).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_diode_sweep() {
        let exp = diode_sweep(39);
        let pred = evaluate_model(
            &Model::diode(),
            &names(&["IS", "N", "RS"]),
            &[3e-23, 1.1, 120.0],
            &exp,
        )
        .unwrap();
        assert_eq!(pred.len(), 39);
        assert!(pred.iter().all(|p| p.is_finite()));
        assert!(pred.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn evaluate_rejects_bad_names() {
        let exp = diode_sweep(3);
        let err = evaluate_model(
            &Model::diode(),
            &names(&["IS", "N", "RSS"]),
            &[3e-23, 1.1, 1.0],
            &exp,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Config(_)));
        assert!(msg.contains("RSS") && msg.contains("RS"), "{msg}");
    }

    #[test]
    fn fet_requires_output_selector() {
        let exp = Experiment::new(
            "id",
            names(&["VG", "VD"]),
            vec![vec![-1.0, 5.0]],
            vec![0.1],
            LossSpec::clipped(1e-4, 0.3).unwrap(),
        )
        .unwrap();
        assert!(Model::Fet.check_experiment(&exp).is_err());
        let pred = evaluate_model(
            &Model::Fet,
            &names(&["VTH", "K", "LAM"]),
            &[-2.0, 0.1, 0.01],
            &exp.clone().with_output("ID"),
        )
        .unwrap();
        assert_relative_eq!(pred[0], 0.105, max_relative = 1e-12);
    }

    #[test]
    fn subset_keeps_rows_aligned() {
        let mut exp = diode_sweep(5);
        exp.response = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let sub = exp.subset(&[4, 1]);
        assert_eq!(sub.response, vec![5.0, 2.0]);
        assert_eq!(
            sub.stimulus,
            vec![exp.stimulus[4].clone(), exp.stimulus[1].clone()]
        );
    }

    #[test]
    fn experiment_rejects_length_mismatch() {
        let err = Experiment::new("x", names(&["V"]), vec![vec![0.0]], vec![], LossSpec::abs());
        assert!(err.is_err());
    }
}
