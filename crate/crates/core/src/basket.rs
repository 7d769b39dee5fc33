//! Canonical basket specification and the lognormal proxies built on it.
//!
//! Every instrument is priced through [`BasketSpec`]: weights, forwards to
//! maturity and the integrated covariance matrix `V` with
//! `V_ij = ρ_ij ∫₀ᵀ σᵢσⱼ ds`. The geometric proxy `G = Π (Sᵢ/Fᵢ)^{aᵢ}` is
//! lognormal with log-variance `aᵀVa`; it is rescaled by `α = 1/E[G]` so
//! that it has unit mean like the normalized arithmetic basket.

use std::fmt;

use nalgebra::DMatrix;

use crate::black76::{black, BlackArgs, OptionKind};
use crate::error::{invalid, PricingError, Result};
use crate::mc::factor_psd;
use crate::result::{Diagnostics, PriceResult};
use crate::summation::sum_descending;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct BasketSpec {
    weights: Vec<f64>,
    forwards: Vec<f64>,
    covariance: DMatrix<f64>,
    strike: f64,
    discount: f64,
    maturity: f64,
    kind: OptionKind,
}

impl BasketSpec {
    pub fn new(
        weights: Vec<f64>,
        forwards: Vec<f64>,
        covariance: DMatrix<f64>,
        strike: f64,
        discount: f64,
        maturity: f64,
        kind: OptionKind,
    ) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(invalid("basket needs at least one asset"));
        }
        if forwards.len() != n {
            return Err(PricingError::Dimension { expected: n, got: forwards.len() });
        }
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(PricingError::Dimension { expected: n, got: covariance.nrows() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invalid("weights must be finite"));
        }
        if forwards.iter().any(|&f| !(f > 0.0) || !f.is_finite()) {
            return Err(invalid("forwards must be positive and finite"));
        }
        if !strike.is_finite() {
            return Err(invalid("strike must be finite"));
        }
        if !(discount > 0.0 && discount <= 1.0) {
            return Err(invalid(format!("discount must lie in (0, 1], got {discount}")));
        }
        if !(maturity > 0.0) || !maturity.is_finite() {
            return Err(invalid(format!("maturity must be positive, got {maturity}")));
        }
        validate_covariance(&covariance)?;
        // Exact symmetry, so relabeling assets cannot change any rounding.
        let covariance = DMatrix::from_fn(n, n, |i, j| 0.5 * (covariance[(i, j)] + covariance[(j, i)]));

        let spec = Self { weights, forwards, covariance, strike, discount, maturity, kind };
        let a = spec.basket_forward();
        if !(a > 0.0) {
            return Err(invalid(format!("basket forward Σ wᵢFᵢ must be positive, got {a}")));
        }
        Ok(spec)
    }

    /// Basket from constant implied vols: `V_ij = ρ_ij σᵢ σⱼ T`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_vols(
        weights: Vec<f64>,
        forwards: Vec<f64>,
        vols: &[f64],
        correlation: &DMatrix<f64>,
        strike: f64,
        discount: f64,
        maturity: f64,
        kind: OptionKind,
    ) -> Result<Self> {
        let n = vols.len();
        if correlation.nrows() != n || correlation.ncols() != n {
            return Err(PricingError::Dimension { expected: n, got: correlation.nrows() });
        }
        if vols.iter().any(|&s| !(s >= 0.0)) {
            return Err(invalid("volatilities must be non-negative"));
        }
        let covariance = DMatrix::from_fn(n, n, |i, j| correlation[(i, j)] * (vols[i] * vols[j]) * maturity);
        Self::new(weights, forwards, covariance, strike, discount, maturity, kind)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn forwards(&self) -> &[f64] {
        &self.forwards
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    pub fn kind(&self) -> OptionKind {
        self.kind
    }

    /// `A = Σ wᵢFᵢ`.
    pub fn basket_forward(&self) -> f64 {
        let mut terms: Vec<f64> = self.weights.iter().zip(&self.forwards).map(|(w, f)| w * f).collect();
        sum_descending(&mut terms)
    }

    /// Normalized weights `ãᵢ = wᵢFᵢ/A`, summing to one.
    pub fn normalized_weights(&self) -> Vec<f64> {
        let a = self.basket_forward();
        self.weights.iter().zip(&self.forwards).map(|(w, f)| w * f / a).collect()
    }

    pub fn with_strike(&self, strike: f64) -> Self {
        Self { strike, ..self.clone() }
    }

    pub fn with_kind(&self, kind: OptionKind) -> Self {
        Self { kind, ..self.clone() }
    }

    /// True when every asset has zero variance.
    pub fn is_deterministic(&self) -> bool {
        self.covariance.iter().all(|&v| v == 0.0)
    }

    /// Discounted payoff of a deterministic basket.
    pub fn intrinsic_value(&self) -> f64 {
        self.discount * (self.kind.sign() * (self.basket_forward() - self.strike)).max(0.0)
    }
}

fn validate_covariance(v: &DMatrix<f64>) -> Result<()> {
    let n = v.nrows();
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    for i in 0..n {
        let vii = v[(i, i)];
        if !vii.is_finite() || vii < 0.0 {
            return Err(invalid(format!("covariance diagonal {i} must be non-negative, got {vii}")));
        }
        for j in 0..i {
            let (a, b) = (v[(i, j)], v[(j, i)]);
            if !a.is_finite() || (a - b).abs() > SYMMETRY_TOL * scale {
                return Err(invalid(format!("covariance not symmetric at ({i}, {j})")));
            }
            let bound = (vii * v[(j, j)]).sqrt();
            if a.abs() > bound * (1.0 + 1e-10) + SYMMETRY_TOL * scale {
                return Err(invalid(format!("covariance entry ({i}, {j}) = {a} exceeds √(VᵢᵢVⱼⱼ) = {bound}")));
            }
        }
    }
    factor_psd(v).map(|_| ())
}

/// Which lognormal proxy anchors the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProxyKind {
    /// Geometric average with exponents `ãᵢ`.
    VorstGeometric,
    /// Geometric average with exponents rescaled to match the arithmetic
    /// basket's second moment.
    VorstLevy,
}

impl ProxyKind {
    pub fn tag(self) -> &'static str {
        match self {
            ProxyKind::VorstGeometric => "VG",
            ProxyKind::VorstLevy => "VL",
        }
    }
}

impl fmt::Display for ProxyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Derived proxy quantities feeding the expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxyParams {
    pub kind: ProxyKind,
    pub atilde: Vec<f64>,
    /// Geometric exponents.
    pub exponents: Vec<f64>,
    /// Proxy total variance `aᵀVa`.
    pub nu2: f64,
    pub alpha: f64,
    /// `v̄ᵢ = Σₗ aₗ V_il`.
    pub vbar: Vec<f64>,
    pub normalized_strike: f64,
    pub basket_forward: f64,
}

/// Sum independent of term order.
fn ordered_sum(terms: impl Iterator<Item = f64>) -> f64 {
    sum_descending(&mut terms.collect::<Vec<_>>())
}

/// Mean and variance of `ln G` for exponents `a`.
pub fn geometric_moments(spec: &BasketSpec, exponents: &[f64]) -> Result<(f64, f64)> {
    let n = spec.len();
    if exponents.len() != n {
        return Err(PricingError::Dimension { expected: n, got: exponents.len() });
    }
    let v = spec.covariance();
    let mean = -0.5 * ordered_sum((0..n).map(|i| exponents[i] * v[(i, i)]));
    let variance = ordered_sum((0..n).map(|i| exponents[i] * ordered_sum((0..n).map(|j| v[(i, j)] * exponents[j]))));
    Ok((mean, variance.max(0.0)))
}

/// Log of the second moment of the unit-mean arithmetic basket,
/// `ln ΣΣ ãᵢãⱼ e^{V_ij}`.
pub fn levy_variance(spec: &BasketSpec, atilde: &[f64]) -> Result<f64> {
    let n = spec.len();
    if atilde.len() != n {
        return Err(PricingError::Dimension { expected: n, got: atilde.len() });
    }
    let total = ordered_sum(atilde.iter().copied());
    if (total - 1.0).abs() > 1e-12 * atilde.iter().map(|a| a.abs()).sum::<f64>().max(1.0) {
        return Err(invalid(format!("normalized weights must sum to one, got {total}")));
    }
    let v = spec.covariance();
    // Σã = 1 lets the constant part cancel exactly: Σ ãã e^V = 1 + Σ ãã (e^V − 1).
    let excess = ordered_sum((0..n).map(|i| atilde[i] * ordered_sum((0..n).map(|j| atilde[j] * v[(i, j)].exp_m1()))));
    if !(1.0 + excess > 0.0) {
        return Err(PricingError::Domain(format!(
            "second moment of the normalized basket is {} (not positive)",
            1.0 + excess
        )));
    }
    Ok(excess.ln_1p())
}

pub fn make_proxy(spec: &BasketSpec, kind: ProxyKind) -> Result<ProxyParams> {
    let atilde = spec.normalized_weights();
    let (_, nu_tilde2) = geometric_moments(spec, &atilde)?;

    let (exponents, nu2) = match kind {
        ProxyKind::VorstGeometric => (atilde.clone(), nu_tilde2),
        ProxyKind::VorstLevy => {
            let nu_a2 = levy_variance(spec, &atilde)?;
            if nu_tilde2 == 0.0 {
                if nu_a2 > 0.0 {
                    return Err(PricingError::DegenerateProxy(
                        "geometric variance is zero while the basket variance is not".into(),
                    ));
                }
                (atilde.clone(), 0.0)
            } else {
                let scale = (nu_a2 / nu_tilde2).sqrt();
                let a: Vec<f64> = atilde.iter().map(|x| x * scale).collect();
                (a, nu_a2)
            }
        }
    };

    let v = spec.covariance();
    let n = spec.len();
    let half_diag = 0.5 * ordered_sum((0..n).map(|i| exponents[i] * v[(i, i)]));
    let alpha = (half_diag - 0.5 * nu2).exp();
    let vbar = (0..n).map(|i| ordered_sum((0..n).map(|l| exponents[l] * v[(i, l)]))).collect();
    let basket_forward = spec.basket_forward();

    Ok(ProxyParams {
        kind,
        atilde,
        exponents,
        nu2,
        alpha,
        vbar,
        normalized_strike: spec.strike() / basket_forward,
        basket_forward,
    })
}

/// Order-0 price `A · Black(1, K*, ν²)`.
pub fn proxy_price(spec: &BasketSpec, params: &ProxyParams) -> Result<PriceResult> {
    let diagnostics = Diagnostics {
        basket_forward: params.basket_forward,
        normalized_strike: params.normalized_strike,
        proxy_variance: params.nu2,
        alpha: params.alpha,
        order: 0,
        proxy: Some(params.kind),
        warnings: Vec::new(),
    };
    let price = if params.normalized_strike <= 0.0 {
        non_positive_strike_value(spec)
    } else {
        params.basket_forward
            * black(&BlackArgs {
                forward: 1.0,
                strike: params.normalized_strike,
                variance: params.nu2,
                maturity: spec.maturity(),
                discount: spec.discount(),
                kind: spec.kind(),
            })?
    };
    Ok(PriceResult::analytic(price, diagnostics))
}

/// Value when the reduced strike is not positive: a call is always
/// exercised, a put never.
pub(crate) fn non_positive_strike_value(spec: &BasketSpec) -> f64 {
    match spec.kind() {
        OptionKind::Call => spec.discount() * (spec.basket_forward() - spec.strike()),
        OptionKind::Put => 0.0,
    }
}
