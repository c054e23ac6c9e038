//! Linear models and the subset-selection procedures that decide which
//! predictors of a regression count as significant.

mod dist;
mod lasso;
mod ols;
mod select;

use serde::{Deserialize, Serialize};

pub use dist::student_t_sf;
pub use lasso::{lasso_fit, lasso_fit_traced, lasso_lambda_max, LassoTrace};
pub use ols::{ols_fit, ols_fit_table};
pub use select::{aic, aic_select, forward_select, stepwise_select};

use crate::error::{Error, Result};

pub const DEFAULT_P_ENTER: f64 = 0.1;
pub const DEFAULT_P_EXIT: f64 = 0.25;

/// Lasso penalty: a fixed value, or `16 / m` for an `m`-row table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Lambda {
    #[default]
    AutoSixteenOverM,
    Fixed(f64),
}

impl Lambda {
    pub fn resolve(self, rows: usize) -> f64 {
        match self {
            Lambda::AutoSixteenOverM => 16.0 / rows as f64,
            Lambda::Fixed(v) => v,
        }
    }
}

/// How the significant predictors of one regression are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum SelectionMethod {
    Stepwise { p_enter: f64, p_exit: f64 },
    Forward { p_enter: f64 },
    StepAic,
    Lasso { lambda: Lambda },
}

impl Default for SelectionMethod {
    fn default() -> Self {
        SelectionMethod::stepwise()
    }
}

impl SelectionMethod {
    pub fn stepwise() -> Self {
        SelectionMethod::Stepwise {
            p_enter: DEFAULT_P_ENTER,
            p_exit: DEFAULT_P_EXIT,
        }
    }

    pub fn forward() -> Self {
        SelectionMethod::Forward {
            p_enter: DEFAULT_P_ENTER,
        }
    }

    pub fn lasso() -> Self {
        SelectionMethod::Lasso {
            lambda: Lambda::AutoSixteenOverM,
        }
    }

    /// Builds a method from its name and optional overrides. Unset thresholds
    /// take the defaults; a parameter the method does not use is an error.
    pub fn from_parts(
        name: &str,
        p_enter: Option<f64>,
        p_exit: Option<f64>,
        lambda: Option<f64>,
    ) -> Result<Self> {
        let unused = |what: &str| {
            Err(Error::InvalidInput(format!(
                "method `{name}` takes no {what}"
            )))
        };
        let method = match name.to_ascii_lowercase().as_str() {
            "stepwise" => {
                if lambda.is_some() {
                    return unused("lambda");
                }
                SelectionMethod::Stepwise {
                    p_enter: p_enter.unwrap_or(DEFAULT_P_ENTER),
                    p_exit: p_exit.unwrap_or(DEFAULT_P_EXIT),
                }
            }
            "forward" => {
                if lambda.is_some() {
                    return unused("lambda");
                }
                if p_exit.is_some() {
                    return unused("p_exit");
                }
                SelectionMethod::Forward {
                    p_enter: p_enter.unwrap_or(DEFAULT_P_ENTER),
                }
            }
            "stepaic" | "step_aic" | "aic" => {
                if p_enter.is_some() || p_exit.is_some() || lambda.is_some() {
                    return unused("parameters");
                }
                SelectionMethod::StepAic
            }
            "lasso" => {
                if p_enter.is_some() || p_exit.is_some() {
                    return unused("p-value thresholds");
                }
                SelectionMethod::Lasso {
                    lambda: lambda.map_or(Lambda::AutoSixteenOverM, Lambda::Fixed),
                }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown selection method `{other}`"
                )))
            }
        };
        method.validate()?;
        Ok(method)
    }

    pub fn name(&self) -> &'static str {
        match self {
            SelectionMethod::Stepwise { .. } => "stepwise",
            SelectionMethod::Forward { .. } => "forward",
            SelectionMethod::StepAic => "stepaic",
            SelectionMethod::Lasso { .. } => "lasso",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_unit = |p: f64| p > 0.0 && p < 1.0;
        match *self {
            SelectionMethod::Stepwise { p_enter, p_exit } => {
                if !in_unit(p_enter) || !in_unit(p_exit) {
                    return Err(Error::OutOfRange("p-value threshold".into()));
                }
                if p_enter >= p_exit {
                    return Err(Error::InvalidInput(format!(
                        "p_enter ({p_enter}) must be below p_exit ({p_exit})"
                    )));
                }
            }
            SelectionMethod::Forward { p_enter } => {
                if !in_unit(p_enter) {
                    return Err(Error::OutOfRange("p-value threshold".into()));
                }
            }
            SelectionMethod::StepAic => {}
            SelectionMethod::Lasso { lambda } => {
                if let Lambda::Fixed(v) = lambda {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(Error::OutOfRange("lambda".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One coefficient of a fitted model. Inference fields are absent for Lasso.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub intercept: f64,
    /// Coefficients of the final model's predictors, in offered-column order.
    pub coefficients: Vec<Coefficient>,
    pub rss: f64,
    /// Selected predictor names, in offered-column order.
    pub selected: Vec<String>,
    pub n_obs: usize,
    /// Set when stepwise selection stopped on its iteration cap.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hit_iteration_cap: bool,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.coefficient(name).and_then(|c| c.p_value)
    }
}

/// Predictor columns offered to a regression, borrowed from a table.
#[derive(Debug, Clone, Copy)]
pub struct Design<'a> {
    pub columns: &'a [&'a [f64]],
    pub names: &'a [String],
}

impl<'a> Design<'a> {
    pub fn new(columns: &'a [&'a [f64]], names: &'a [String]) -> Result<Self> {
        if columns.len() != names.len() {
            return Err(Error::InvalidInput(format!(
                "{} columns for {} names",
                columns.len(),
                names.len()
            )));
        }
        Ok(Self { columns, names })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }
}

/// Runs `method` on `(x, y)` and returns the final fit.
///
/// Lasso expects standardized predictors and a centered response; the caller
/// is responsible for that transform.
pub fn fit_with(method: &SelectionMethod, x: Design<'_>, y: &[f64]) -> Result<FitResult> {
    method.validate()?;
    match *method {
        SelectionMethod::Stepwise { p_enter, p_exit } => stepwise_select(x, y, p_enter, p_exit),
        SelectionMethod::Forward { p_enter } => forward_select(x, y, p_enter),
        SelectionMethod::StepAic => aic_select(x, y),
        SelectionMethod::Lasso { lambda } => lasso_fit(x, y, lambda.resolve(y.len())),
    }
}
