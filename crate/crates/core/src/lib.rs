//! Closed-form stochastic expansions for basket, Asian and cash-dividend
//! options, with a Monte Carlo reference pricer.
//!
//! Instruments are reduced to a [`BasketSpec`] (weights, forwards, integrated
//! covariance) and priced by [`expand_price`] at orders 0 to 3 around a
//! geometric (`VG`) or moment-matched (`VL`) lognormal proxy.

// `!(x > 0.0)` is used on purpose so NaN fails validation; index loops mirror
// the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod basket;
pub mod black76;
pub mod cli;
pub mod curves;
pub mod error;
pub mod expansion;
pub mod mc;
pub mod reductions;
pub mod result;
mod summation;

pub use basket::{BasketSpec, ProxyKind, ProxyParams};
pub use black76::OptionKind;
pub use curves::PiecewiseCurve;
pub use error::{PricingError, Result};
pub use expansion::{expand_price, expand_price_with, expansion_ladder, ExpansionOptions, ExpansionOrder};
pub use mc::{price_mc, price_mc_strikes, McConfig, Sampler};
pub use result::{Diagnostics, PriceResult};
pub use summation::CompensatedSum;
