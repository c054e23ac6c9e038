//! Greedy subset selection: p-value driven stepwise and forward search, and
//! bidirectional AIC search.

use super::ols::fit_subset;
use super::{Design, FitResult};
use crate::error::{Error, Result};

/// MASS-style minimum AIC improvement for a move to be taken.
const AIC_IMPROVEMENT: f64 = 1e-7;

/// RSS floor relative to the total sum of squares, so that an exact fit
/// yields a finite AIC and extra exact-fit predictors still cost 2 each.
const RSS_FLOOR: f64 = 1e-14;

/// AIC of a linear model with `p` predictors plus intercept, dropping the
/// additive constant `n ln(2 pi) + n`: `n ln(RSS / n) + 2 (p + 1)`.
pub fn aic(rss: f64, n: usize, p: usize, tss: f64) -> f64 {
    let n_f = n as f64;
    let rss = rss.max(RSS_FLOOR * tss.max(f64::MIN_POSITIVE));
    n_f * (rss / n_f).ln() + 2.0 * (p as f64 + 1.0)
}

fn is_inadmissible(e: &Error) -> bool {
    matches!(
        e,
        Error::RankDeficient(_) | Error::TooFewObservations { .. }
    )
}

/// Tries every excluded predictor and returns the one with the smallest
/// p-value, lowest index on ties. Candidates that make the design singular
/// are skipped.
fn best_entry(x: Design<'_>, y: &[f64], included: &[usize]) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..x.len() {
        if included.contains(&j) {
            continue;
        }
        let mut trial = included.to_vec();
        trial.push(j);
        let fit = match fit_subset(x, &trial, y) {
            Ok(f) => f,
            Err(e) if is_inadmissible(&e) => continue,
            Err(e) => return Err(e),
        };
        let p = fit.p_value(&x.names[j]).unwrap_or(1.0);
        if best.is_none_or(|(_, bp)| p < bp) {
            best = Some((j, p));
        }
    }
    Ok(best)
}

/// Included predictor with the largest p-value in `fit`, lowest index on ties.
fn worst_included(x: Design<'_>, fit: &FitResult, included: &[usize]) -> Option<(usize, f64)> {
    let mut sorted = included.to_vec();
    sorted.sort_unstable();
    let mut worst: Option<(usize, f64)> = None;
    for j in sorted {
        let p = fit.p_value(&x.names[j]).unwrap_or(1.0);
        if worst.is_none_or(|(_, wp)| p > wp) {
            worst = Some((j, p));
        }
    }
    worst
}

/// Bidirectional p-value selection.
///
/// Each round admits the best excluded predictor if its p-value is at most
/// `p_enter`, then repeatedly evicts the included predictor with the largest
/// p-value while that p-value is at least `p_exit`. Stops when a round changes
/// nothing or after `2 d` rounds, flagging the latter.
pub fn stepwise_select(x: Design<'_>, y: &[f64], p_enter: f64, p_exit: f64) -> Result<FitResult> {
    p_select(x, y, p_enter, Some(p_exit))
}

/// Forward-only p-value selection: admit while the best candidate has
/// p-value at most `p_enter`.
pub fn forward_select(x: Design<'_>, y: &[f64], p_enter: f64) -> Result<FitResult> {
    p_select(x, y, p_enter, None)
}

fn p_select(x: Design<'_>, y: &[f64], p_enter: f64, p_exit: Option<f64>) -> Result<FitResult> {
    let mut included: Vec<usize> = Vec::new();
    let mut current = fit_subset(x, &included, y)?;
    let cap = match p_exit {
        Some(_) => 2 * x.len().max(1),
        None => x.len() + 1,
    };
    let mut rounds = 0;
    loop {
        if rounds == cap {
            current.hit_iteration_cap = p_exit.is_some();
            break;
        }
        rounds += 1;
        let mut changed = false;
        if let Some((j, p)) = best_entry(x, y, &included)? {
            if p <= p_enter {
                included.push(j);
                current = fit_subset(x, &included, y)?;
                changed = true;
            }
        }
        if let Some(p_exit) = p_exit {
            while let Some((j, p)) = worst_included(x, &current, &included) {
                if p < p_exit {
                    break;
                }
                included.retain(|&k| k != j);
                current = fit_subset(x, &included, y)?;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(current)
}

/// Greedy bidirectional AIC search from the full model.
///
/// Every step scores all single deletions and single additions and takes the
/// lowest-AIC move if it improves on the incumbent; stops at a local minimum.
pub fn aic_select(x: Design<'_>, y: &[f64]) -> Result<FitResult> {
    let n = y.len();
    let full: Vec<usize> = (0..x.len()).collect();
    let mut current = fit_subset(x, &full, y)?;
    let tss = fit_subset(x, &[], y)?.rss;
    let mut included = full;
    let mut current_aic = aic(current.rss, n, included.len(), tss);
    loop {
        let mut best: Option<(Vec<usize>, FitResult, f64)> = None;
        let mut consider = |trial: Vec<usize>, fit: FitResult| {
            let score = aic(fit.rss, n, trial.len(), tss);
            if best.as_ref().is_none_or(|(_, _, b)| score < *b) {
                best = Some((trial, fit, score));
            }
        };
        for &j in &included {
            let trial: Vec<usize> = included.iter().copied().filter(|&k| k != j).collect();
            let fit = fit_subset(x, &trial, y)?;
            consider(trial, fit);
        }
        for j in 0..x.len() {
            if included.contains(&j) {
                continue;
            }
            let mut trial = included.clone();
            trial.push(j);
            match fit_subset(x, &trial, y) {
                Ok(fit) => consider(trial, fit),
                Err(e) if is_inadmissible(&e) => {}
                Err(e) => return Err(e),
            }
        }
        match best {
            Some((trial, fit, score)) if score < current_aic - AIC_IMPROVEMENT => {
                included = trial;
                current = fit;
                current_aic = score;
            }
            _ => break,
        }
    }
    Ok(current)
}
