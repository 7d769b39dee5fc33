//! Piecewise-constant term structures (rates, yields, volatilities).

use crate::error::{invalid, Result};

/// Right-open step function of time.
///
/// `values[0]` applies before `breakpoints[0]`, `values[k]` applies on
/// `[breakpoints[k-1], breakpoints[k])` and the last value extends to infinity,
/// so `values.len() == breakpoints.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseCurve {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(invalid(format!(
                "curve needs {} values for {} breakpoints, got {}",
                breakpoints.len() + 1,
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(invalid("curve breakpoints must be finite"));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("curve breakpoints must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("curve values must be finite"));
        }
        Ok(Self { breakpoints, values })
    }

    /// Step curve whose values must be non-negative.
    pub fn volatility(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&v| v < 0.0) {
            return Err(invalid("volatility values must be non-negative"));
        }
        Self::new(breakpoints, values)
    }

    pub fn constant(value: f64) -> Self {
        Self { breakpoints: Vec::new(), values: vec![value] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_non_negative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Value in effect at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.values[k]
    }

    /// Integral over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        check_interval(a, b)?;
        Ok(integrate_steps(&[self], a, b))
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() {
        return Err(invalid("integration bounds must be finite"));
    }
    if a > b {
        return Err(invalid(format!("integration bounds reversed: {a} > {b}")));
    }
    Ok(())
}

/// Integral over `[a, b]` of the product of the given curves, exact on the
/// merged breakpoint grid.
fn integrate_steps(curves: &[&PiecewiseCurve], a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut cuts: Vec<f64> =
        curves.iter().flat_map(|c| c.breakpoints.iter().copied()).filter(|&t| t > a && t < b).collect();
    cuts.sort_unstable_by(f64::total_cmp);
    cuts.dedup();

    let mut total = 0.0;
    let mut left = a;
    for right in cuts.into_iter().chain(std::iter::once(b)) {
        let product: f64 = curves.iter().map(|c| c.value_at(left)).product();
        total += product * (right - left);
        left = right;
    }
    total
}

/// Integral of `c1(s) c2(s)` over `[a, b]`.
pub fn integrate_product(c1: &PiecewiseCurve, c2: &PiecewiseCurve, a: f64, b: f64) -> Result<f64> {
    check_interval(a, b)?;
    Ok(integrate_steps(&[c1, c2], a, b))
}

/// Forward price `spot · exp(∫₀ᵗ r − q)`.
pub fn forward(spot: f64, rate: &PiecewiseCurve, yield_curve: &PiecewiseCurve, t: f64) -> Result<f64> {
    if !(spot > 0.0) {
        return Err(invalid(format!("spot must be positive, got {spot}")));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("forward time must be non-negative, got {t}")));
    }
    let drift = rate.integrate(0.0, t)? - yield_curve.integrate(0.0, t)?;
    Ok(spot * drift.exp())
}
