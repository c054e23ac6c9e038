use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Two-sided tail `2 P(T > |t|)` of Student's t with `df` degrees of freedom.
///
/// Uses `2 P(T > |t|) = I_{df / (df + t^2)}(df / 2, 1 / 2)`.
pub fn student_t_sf(t: f64, df: f64) -> Result<f64> {
    if !(df >= 1.0) {
        return Err(Error::OutOfRange(format!("degrees of freedom {df}")));
    }
    if t.is_nan() {
        return Err(Error::InvalidInput("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let x = df / (df + t * t);
    Ok(beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0))
}
