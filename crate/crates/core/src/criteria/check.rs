//! Per-family compliance checks.
//!
//! Every member `i` of a family carries its current value `x_i` and a tracker `t_i`,
//! an upper bound on how far `x_i` is from every original point it stands for.
//! Trackers start at zero, so the first coarsening of original data evaluates the
//! exact deviation with the same code path.
//!
//! Sums involving a non-zero tracker are rounded outward by two ulps so the
//! stored bounds stay valid under floating-point evaluation.

use crate::criteria::CriterionKind;
use crate::error::{Error, Result};

/// Outcome of checking one candidate parent value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub accepted: bool,
    /// Error measure compared against the bound (absolute or relative).
    pub error: f64,
    /// Tracker the parent would carry if the coarsening is applied.
    pub tracker: f64,
}

/// One error criterion's compliance test.
pub trait ErrorCheck: Send + Sync {
    fn name(&self) -> &'static str;

    fn kind(&self) -> CriterionKind;

    fn check(&self, values: &[f64], trackers: &[f64], candidate: f64, bound: f64) -> Result<Verdict>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AbsoluteCheck;

#[derive(Debug, Clone, Copy, Default)]
pub struct RelativeCheck;

impl ErrorCheck for AbsoluteCheck {
    fn name(&self) -> &'static str {
        "abs"
    }

    fn kind(&self) -> CriterionKind {
        CriterionKind::Absolute
    }

    fn check(&self, values: &[f64], trackers: &[f64], candidate: f64, bound: f64) -> Result<Verdict> {
        check_absolute(values, trackers, candidate, bound)
    }
}

impl ErrorCheck for RelativeCheck {
    fn name(&self) -> &'static str {
        "rel"
    }

    fn kind(&self) -> CriterionKind {
        CriterionKind::Relative
    }

    fn check(&self, values: &[f64], trackers: &[f64], candidate: f64, bound: f64) -> Result<Verdict> {
        check_relative(values, trackers, candidate, bound)
    }
}

fn validate(values: &[f64], trackers: &[f64], candidate: f64) -> Result<()> {
    if values.len() != trackers.len() {
        return Err(Error::Shape(format!(
            "{} values but {} trackers",
            values.len(),
            trackers.len()
        )));
    }
    if !candidate.is_finite() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite value in family".into()));
    }
    if trackers.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Data("tracker must be finite and non-negative".into()));
    }
    Ok(())
}

/// `a + b`, nudged upward when `b` is a non-zero tracker.
#[inline]
pub(crate) fn add_tracker(deviation: f64, tracker: f64) -> f64 {
    if tracker == 0.0 {
        deviation
    } else {
        (deviation + tracker).next_up().next_up()
    }
}

/// Absolute check: `max_i(|candidate - x_i| + t_i) <= bound`.
pub fn check_absolute(values: &[f64], trackers: &[f64], candidate: f64, bound: f64) -> Result<Verdict> {
    validate(values, trackers, candidate)?;
    let error = values
        .iter()
        .zip(trackers)
        .map(|(&x, &t)| add_tracker((candidate - x).abs(), t))
        .fold(0.0, f64::max);
    Ok(Verdict {
        accepted: error <= bound,
        error,
        tracker: error,
    })
}

/// Relative check with the denominator estimate `min(|x_i - t_i|, |x_i|, |x_i + t_i|)`,
/// which never exceeds any original magnitude as long as every earlier step stayed
/// within a 100% relative error.
pub fn check_relative(values: &[f64], trackers: &[f64], candidate: f64, bound: f64) -> Result<Verdict> {
    validate(values, trackers, candidate)?;
    let mut error = 0.0f64;
    let mut tracker = 0.0f64;
    for (&x, &t) in values.iter().zip(trackers) {
        let deviation = (x - candidate).abs();
        let numerator = add_tracker(deviation, t);
        tracker = tracker.max(numerator);
        let ratio = if t == 0.0 {
            relative_ratio(numerator, x.abs())
        } else {
            let t = t.next_up();
            let denominator = (x - t).abs().min(x.abs()).min((x + t).abs()).next_down();
            relative_ratio(numerator, denominator).next_up()
        };
        error = error.max(ratio);
    }
    Ok(Verdict {
        accepted: error <= bound,
        error,
        tracker,
    })
}

fn relative_ratio(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if denominator <= 0.0 {
        f64::INFINITY
    } else {
        numerator / denominator
    }
}
