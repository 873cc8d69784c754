//! Loss family for fitting device characteristics.
//!
//! Residuals are measured in decades: `u = |log10(1 + ŷ/ε) − log10(1 + y/ε)|`.
//! Values far below the threshold `ε` contribute almost nothing, values well
//! above it are compared by their ratio. The clipped loss caps `u²` at `δ²`
//! so a corrupted point can never contribute more than a fixed amount.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which pointwise loss to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `|ŷ − y|`
    Abs,
    /// `|log10 ŷ − log10 y|`, both inputs must be positive.
    LogAbs,
    /// `min(u, δ)²` with `u` the thresholded log residual.
    ClippedRobust,
    /// `u²` without clipping.
    SquaredLog,
}

impl LossKind {
    pub fn uses_epsilon(self) -> bool {
        matches!(self, LossKind::ClippedRobust | LossKind::SquaredLog)
    }

    pub fn uses_delta(self) -> bool {
        matches!(self, LossKind::ClippedRobust)
    }
}

/// A loss kind together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
}

impl LossSpec {
    pub fn abs() -> Self {
        Self {
            kind: LossKind::Abs,
            epsilon: None,
            delta: None,
        }
    }

    pub fn log_abs() -> Self {
        Self {
            kind: LossKind::LogAbs,
            epsilon: None,
            delta: None,
        }
    }

    pub fn clipped(epsilon: f64, delta: f64) -> Result<Self> {
        Self {
            kind: LossKind::ClippedRobust,
            epsilon: Some(epsilon),
            delta: Some(delta),
        }
        .validated()
    }

    pub fn squared_log(epsilon: f64) -> Result<Self> {
        Self {
            kind: LossKind::SquaredLog,
            epsilon: Some(epsilon),
            delta: None,
        }
        .validated()
    }

    /// Checks that every hyperparameter the kind needs is present and positive.
    pub fn validate(&self) -> Result<()> {
        if self.kind.uses_epsilon() {
            match self.epsilon {
                None => {
                    return Err(Error::Config(format!(
                        "{:?} loss requires epsilon",
                        self.kind
                    )))
                }
                Some(eps) if !(eps > 0.0 && eps.is_finite()) => {
                    return Err(Error::Config(format!(
                        "epsilon must be positive and finite, got {eps}"
                    )))
                }
                _ => {}
            }
        }
        if self.kind.uses_delta() {
            match self.delta {
                None => {
                    return Err(Error::Config(format!(
                        "{:?} loss requires delta",
                        self.kind
                    )))
                }
                Some(delta) if !(delta > 0.0 && delta.is_finite()) => {
                    return Err(Error::Config(format!(
                        "delta must be positive and finite, got {delta}"
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    fn epsilon(&self) -> Result<f64> {
        self.epsilon
            .ok_or_else(|| Error::Config(format!("{:?} loss requires epsilon", self.kind)))
    }

    fn delta(&self) -> Result<f64> {
        self.delta
            .ok_or_else(|| Error::Config(format!("{:?} loss requires delta", self.kind)))
    }
}

/// Weighted-sum scalarizer over per-experiment objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarizerSpec {
    pub weights: Vec<f64>,
}

impl ScalarizerSpec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        let spec = Self { weights };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::Config(format!(
                "scalarizer weights must be nonnegative, got {w}"
            )));
        }
        if !self.weights.iter().any(|w| *w > 0.0) {
            return Err(Error::Config(
                "at least one scalarizer weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn check_finite(value: f64, what: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} is not finite: {value}"
        )))
    }
}

/// Thresholded log residual in decades. Negative inputs are floored at zero.
pub fn threshold_residual(yhat: f64, y: f64, epsilon: f64) -> Result<f64> {
    check_finite(yhat, "prediction")?;
    check_finite(y, "measurement")?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    let transform = |v: f64| (v.max(0.0) / epsilon).ln_1p() / std::f64::consts::LN_10;
    Ok((transform(yhat) - transform(y)).abs())
}

/// Loss contributed by a single prediction/measurement pair.
pub fn point_loss(spec: &LossSpec, yhat: f64, y: f64) -> Result<f64> {
    match spec.kind {
        LossKind::Abs => {
            check_finite(yhat, "prediction")?;
            check_finite(y, "measurement")?;
            Ok((yhat - y).abs())
        }
        LossKind::LogAbs => {
            check_finite(yhat, "prediction")?;
            check_finite(y, "measurement")?;
            if yhat <= 0.0 || y <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "log loss requires positive values, got prediction {yhat} and measurement {y}"
                )));
            }
            Ok((yhat.log10() - y.log10()).abs())
        }
        LossKind::ClippedRobust => {
            let delta = spec.delta()?;
            let u = threshold_residual(yhat, y, spec.epsilon()?)?;
            Ok(if u <= delta { u * u } else { delta * delta })
        }
        LossKind::SquaredLog => {
            let u = threshold_residual(yhat, y, spec.epsilon()?)?;
            Ok(u * u)
        }
    }
}

/// Mean point loss over one experiment.
pub fn experiment_objective(spec: &LossSpec, yhats: &[f64], ys: &[f64]) -> Result<f64> {
    if yhats.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "prediction length {} does not match measurement length {}",
            yhats.len(),
            ys.len()
        )));
    }
    if ys.is_empty() {
        return Err(Error::InvalidInput("experiment has no points".into()));
    }
    let mut total = 0.0;
    for (&yhat, &y) in yhats.iter().zip(ys) {
        total += point_loss(spec, yhat, y)?;
    }
    Ok(total / ys.len() as f64)
}

/// Weighted sum `wᵀv` of per-experiment objectives.
pub fn scalarize(spec: &ScalarizerSpec, objectives: &[f64]) -> Result<f64> {
    if spec.weights.len() != objectives.len() {
        return Err(Error::Config(format!(
            "{} weights for {} objectives",
            spec.weights.len(),
            objectives.len()
        )));
    }
    if let Some(w) = spec.weights.iter().find(|w| **w < 0.0) {
        return Err(Error::Config(format!("negative weight {w}")));
    }
    for &v in objectives {
        check_finite(v, "objective")?;
    }
    Ok(spec
        .weights
        .iter()
        .zip(objectives)
        .map(|(w, v)| w * v)
        .sum())
}

/// Outcome of a thresholded report: either a mean loss or an empty mask.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportValue {
    Value { error: f64, points: usize },
    NoPoints,
}

impl ReportValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            ReportValue::Value { error, .. } => Some(*error),
            ReportValue::NoPoints => None,
        }
    }

    pub fn points(&self) -> usize {
        match self {
            ReportValue::Value { points, .. } => *points,
            ReportValue::NoPoints => 0,
        }
    }
}

/// Mean point loss over the points whose measurement exceeds `threshold`.
pub fn report_error(
    spec: &LossSpec,
    yhats: &[f64],
    ys: &[f64],
    threshold: f64,
) -> Result<ReportValue> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::InvalidInput(format!(
            "report threshold must be nonnegative, got {threshold}"
        )));
    }
    if yhats.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "prediction length {} does not match measurement length {}",
            yhats.len(),
            ys.len()
        )));
    }
    let mut total = 0.0;
    let mut points = 0usize;
    for (&yhat, &y) in yhats.iter().zip(ys) {
        if y > threshold {
            total += point_loss(spec, yhat, y)?;
            points += 1;
        }
    }
    if points == 0 {
        Ok(ReportValue::NoPoints)
    } else {
        Ok(ReportValue::Value {
            error: total / points as f64,
            points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn robust() -> LossSpec {
        LossSpec::clipped(1e-10, 0.15f64.sqrt()).unwrap()
    }

    #[test]
    fn residual_examples() {
        assert_eq!(threshold_residual(5e-3, 5e-3, 1e-10).unwrap(), 0.0);
        assert_abs_diff_eq!(
            threshold_residual(1e-10, 0.0, 1e-10).unwrap(),
            std::f64::consts::LOG10_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            threshold_residual(1e-3, 1e-4, 1e-10).unwrap(),
            0.999_999_609_135_181_3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn residual_floors_negatives() {
        assert_eq!(threshold_residual(-1.0, 0.0, 1e-10).unwrap(), 0.0);
        assert_eq!(
            threshold_residual(-3e-4, 2e-4, 1e-10).unwrap(),
            threshold_residual(0.0, 2e-4, 1e-10).unwrap()
        );
    }

    #[test]
    fn residual_errors() {
        assert!(matches!(
            threshold_residual(f64::NAN, 1.0, 1e-10),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            threshold_residual(1.0, f64::INFINITY, 1e-10),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            threshold_residual(1.0, 1.0, 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            threshold_residual(1.0, 1.0, -1e-3),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn point_loss_examples() {
        let spec = robust();
        assert_abs_diff_eq!(
            point_loss(&spec, 1e-3, 1e-4).unwrap(),
            0.15,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            point_loss(&spec, 2e-4, 1e-4).unwrap(),
            0.090_618_927_553_935_74,
            epsilon = 1e-10
        );
        assert_eq!(point_loss(&LossSpec::abs(), 3.0, 5.0).unwrap(), 2.0);
        let tiny = point_loss(&spec, 1e-12, 0.0).unwrap();
        assert!(tiny <= 1.9e-5);
        assert_abs_diff_eq!(tiny, 1.867_427_136_931_059e-5, epsilon = 1e-12);
    }

    #[test]
    fn squared_log_is_unclipped() {
        let spec = LossSpec::squared_log(1e-10).unwrap();
        let u = threshold_residual(1e-3, 1e-4, 1e-10).unwrap();
        assert_abs_diff_eq!(
            point_loss(&spec, 1e-3, 1e-4).unwrap(),
            u * u,
            epsilon = 1e-15
        );
    }

    #[test]
    fn log_abs_rejects_nonpositive() {
        assert!(matches!(
            point_loss(&LossSpec::log_abs(), 0.0, 1.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            point_loss(&LossSpec::log_abs(), 1.0, -2.0),
            Err(Error::InvalidInput(_))
        ));
        assert_abs_diff_eq!(
            point_loss(&LossSpec::log_abs(), 10.0, 1.0).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn missing_hyperparameters() {
        let spec = LossSpec {
            kind: LossKind::ClippedRobust,
            epsilon: Some(1e-10),
            delta: None,
        };
        assert!(matches!(spec.validate(), Err(Error::Config(_))));
        assert!(matches!(point_loss(&spec, 1.0, 1.0), Err(Error::Config(_))));
        let spec = LossSpec {
            kind: LossKind::SquaredLog,
            epsilon: None,
            delta: None,
        };
        assert!(matches!(point_loss(&spec, 1.0, 1.0), Err(Error::Config(_))));
        assert!(LossSpec::clipped(1e-10, 0.0).is_err());
        assert!(LossSpec::clipped(-1.0, 0.3).is_err());
    }

    #[test]
    fn objective_examples() {
        let spec = robust();
        // one clipped point (0.15) and one at u² ≈ 0.0906
        let v = experiment_objective(&spec, &[1e-3, 2e-4], &[1e-4, 1e-4]).unwrap();
        assert_abs_diff_eq!(v, (0.15 + 0.090_618_927_553_935_74) / 2.0, epsilon = 1e-10);
        let abs = experiment_objective(&LossSpec::abs(), &[0.15, 0.09], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(abs, 0.12, epsilon = 1e-15);
        let ys = [1e-3, 2e-5, 7e-9];
        assert_eq!(experiment_objective(&spec, &ys, &ys).unwrap(), 0.0);
        let delta = 0.15f64.sqrt();
        let clipped = experiment_objective(&spec, &[1.0, 1.0, 1.0], &[1e-6, 1e-7, 1e-5]).unwrap();
        assert_eq!(clipped, delta * delta);
    }

    #[test]
    fn objective_errors() {
        let spec = robust();
        assert!(matches!(
            experiment_objective(&spec, &[1.0], &[1.0, 2.0]),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            experiment_objective(&spec, &[], &[]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn scalarize_examples() {
        let half = ScalarizerSpec::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(scalarize(&half, &[2.0, 4.0]).unwrap(), 3.0);
        assert_eq!(
            scalarize(&ScalarizerSpec::new(vec![1.0]).unwrap(), &[0.123]).unwrap(),
            0.123
        );
        assert_abs_diff_eq!(
            scalarize(&half, &[1.25e-3, 2.17e-3]).unwrap(),
            1.71e-3,
            epsilon = 1e-15
        );
    }

    #[test]
    fn scalarize_errors() {
        let half = ScalarizerSpec::new(vec![0.5, 0.5]).unwrap();
        assert!(matches!(scalarize(&half, &[1.0]), Err(Error::Config(_))));
        let negative = ScalarizerSpec {
            weights: vec![1.0, -0.5],
        };
        assert!(matches!(
            scalarize(&negative, &[1.0, 1.0]),
            Err(Error::Config(_))
        ));
        assert!(ScalarizerSpec::new(vec![0.0, 0.0]).is_err());
        assert!(matches!(
            scalarize(&half, &[1.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn report_masks_by_threshold() {
        let spec = robust();
        let ys = [1e-12, 1e-3];
        assert_eq!(
            report_error(&spec, &ys, &ys, 1e-10).unwrap(),
            ReportValue::Value {
                error: 0.0,
                points: 1
            }
        );

        let only_second = report_error(&spec, &[1.0, 2e-3], &ys, 1e-10).unwrap();
        let direct = point_loss(&spec, 2e-3, 1e-3).unwrap();
        assert_eq!(
            only_second,
            ReportValue::Value {
                error: direct,
                points: 1
            }
        );

        let none = report_error(&spec, &[1.0, 1.0], &[1e-12, 1e-11], 1e-10).unwrap();
        assert_eq!(none, ReportValue::NoPoints);
        assert_eq!(none.value(), None);
        assert!(report_error(&spec, &[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn report_with_zero_threshold_matches_objective() {
        let spec = robust();
        let ys = [1e-9, 3e-6, 2e-3, 1e-2];
        let yhats = [2e-9, 1e-6, 2.5e-3, 0.5];
        let report = report_error(&spec, &yhats, &ys, 0.0)
            .unwrap()
            .value()
            .unwrap();
        assert_abs_diff_eq!(
            report,
            experiment_objective(&spec, &yhats, &ys).unwrap(),
            epsilon = 1e-15
        );
    }
}
