use crate::basket::ProxyKind;

/// Quantities describing how a price was obtained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Basket forward `A = Σ wᵢFᵢ`.
    pub basket_forward: f64,
    /// Normalized strike `K/A`.
    pub normalized_strike: f64,
    /// Proxy total variance.
    pub proxy_variance: f64,
    /// Spot adjustment `α = 1/E[G]`.
    pub alpha: f64,
    pub order: u8,
    pub proxy: Option<ProxyKind>,
    pub warnings: Vec<String>,
}

/// A price with diagnostics. `std_error` is set only by Monte Carlo.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult {
    pub price: f64,
    pub std_error: Option<f64>,
    pub diagnostics: Diagnostics,
}

impl PriceResult {
    pub(crate) fn analytic(price: f64, diagnostics: Diagnostics) -> Self {
        Self { price, std_error: None, diagnostics }
    }
}
