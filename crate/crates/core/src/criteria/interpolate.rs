/// Maps the values of a family (dummy members already removed) onto one parent value.
pub trait Interpolator: Send + Sync {
    fn name(&self) -> &'static str;

    /// `None` when no value is given, i.e. the parent is a dummy element.
    fn interpolate(&self, values: &[f64]) -> Option<f64>;
}

/// Arithmetic mean of the present members.
#[derive(Debug, Clone, Copy, Default)]
pub struct ArithmeticMean;

impl Interpolator for ArithmeticMean {
    fn name(&self) -> &'static str {
        "mean"
    }

    fn interpolate(&self, values: &[f64]) -> Option<f64> {
        let (&first, rest) = values.split_first()?;
        if rest.iter().all(|&v| v == first) {
            return Some(first);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        if mean.is_finite() {
            Some(mean)
        } else {
            Some(values.iter().map(|v| v / n).sum())
        }
    }
}
