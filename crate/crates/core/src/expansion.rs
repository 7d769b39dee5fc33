//! Stochastic Taylor expansion of the basket price around a lognormal proxy.
//!
//! Every correction is a Black-76 strike derivative evaluated at a shifted
//! forward `e^x` with the proxy's strike and variance, so a single
//! [`StrikeKernel`] per spec serves all terms.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basket::{make_proxy, non_positive_strike_value, BasketSpec, ProxyKind, ProxyParams};
use crate::black76::StrikeKernel;
use crate::error::{invalid, PricingError, Result};
use crate::result::{Diagnostics, PriceResult};
use crate::summation::{accumulate_descending, sum_descending, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExpansionOrder {
    /// Proxy price only.
    Zero,
    One,
    Two,
    Three,
}

impl ExpansionOrder {
    pub const ALL: [ExpansionOrder; 4] =
        [ExpansionOrder::Zero, ExpansionOrder::One, ExpansionOrder::Two, ExpansionOrder::Three];

    pub fn from_u8(order: u8) -> Result<Self> {
        Self::ALL
            .get(order as usize)
            .copied()
            .ok_or_else(|| invalid(format!("expansion order must be 0..=3, got {order}")))
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    /// Warn when `α·e^{3ν²}` exceeds this.
    pub sanity_bound: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self { sanity_bound: 100.0 }
    }
}

pub fn expand_price(spec: &BasketSpec, kind: ProxyKind, order: ExpansionOrder) -> Result<PriceResult> {
    expand_price_with(spec, kind, order, &ExpansionOptions::default())
}

pub fn expand_price_with(
    spec: &BasketSpec,
    kind: ProxyKind,
    order: ExpansionOrder,
    options: &ExpansionOptions,
) -> Result<PriceResult> {
    let (ladder, mut diagnostics) = ladder(spec, kind, order, options)?;
    diagnostics.order = order.as_u8();
    Ok(PriceResult::analytic(ladder[order as usize], diagnostics))
}

/// Prices at orders 0 through 3 from one pass; entry `k` is the order-`k`
/// price.
pub fn expansion_ladder(
    spec: &BasketSpec,
    kind: ProxyKind,
    options: &ExpansionOptions,
) -> Result<([f64; 4], Diagnostics)> {
    let (prices, mut diagnostics) = ladder(spec, kind, ExpansionOrder::Three, options)?;
    diagnostics.order = 3;
    Ok((prices, diagnostics))
}

fn ladder(
    spec: &BasketSpec,
    kind: ProxyKind,
    order: ExpansionOrder,
    options: &ExpansionOptions,
) -> Result<([f64; 4], Diagnostics)> {
    let proxy = make_proxy(spec, kind)?;
    let mut diagnostics = Diagnostics {
        basket_forward: proxy.basket_forward,
        normalized_strike: proxy.normalized_strike,
        proxy_variance: proxy.nu2,
        alpha: proxy.alpha,
        order: order.as_u8(),
        proxy: Some(kind),
        warnings: Vec::new(),
    };

    if proxy.normalized_strike <= 0.0 {
        diagnostics.warnings.push("non-positive strike: option is always or never exercised".into());
        return Ok(([non_positive_strike_value(spec); 4], diagnostics));
    }
    if spec.is_deterministic() {
        return Ok(([spec.intrinsic_value(); 4], diagnostics));
    }
    if proxy.nu2 <= 0.0 {
        if order == ExpansionOrder::Zero {
            let p = spec.discount() * (spec.kind().sign() * (proxy.basket_forward - spec.strike())).max(0.0);
            return Ok(([p; 4], diagnostics));
        }
        return Err(PricingError::DegenerateProxy("proxy variance is zero while the basket is random".into()));
    }

    let sanity = proxy.alpha * (3.0 * proxy.nu2).exp();
    if !(sanity <= options.sanity_bound) {
        diagnostics
            .warnings
            .push(format!("α·e^(3ν²) = {sanity:.4e} exceeds {}; higher-order terms may diverge", options.sanity_bound));
    }

    let corrections = Corrections::new(spec, &proxy);
    let a = proxy.basket_forward;
    let mut prices = [0.0; 4];
    let mut running = CompensatedSum::new();
    running.add(corrections.kernel.price(0.0));
    prices[0] = a * running.value();
    // A single asset is its own proxy; the corrections vanish identically.
    let exact_proxy = spec.len() == 1;
    for k in 1..=3 {
        if k <= order as usize && !exact_proxy {
            running.add(corrections.term(k));
        }
        prices[k] = a * running.value();
    }
    for (k, p) in prices.iter().enumerate().take(order as usize + 1) {
        if !p.is_finite() {
            return Err(PricingError::NumericalFailure(format!("order-{k} price is {p}")));
        }
    }
    Ok((prices, diagnostics))
}

struct Corrections<'a> {
    kernel: StrikeKernel,
    nu2: f64,
    atilde: &'a [f64],
    vbar: &'a [f64],
    v: &'a DMatrix<f64>,
    exp_v: DMatrix<f64>,
}

impl<'a> Corrections<'a> {
    fn new(spec: &'a BasketSpec, proxy: &'a ProxyParams) -> Self {
        let v = spec.covariance();
        Self {
            kernel: StrikeKernel::new(proxy.normalized_strike, proxy.nu2, spec.discount(), spec.kind()),
            nu2: proxy.nu2,
            atilde: &proxy.atilde,
            vbar: &proxy.vbar,
            v,
            exp_v: v.map(f64::exp),
        }
    }

    fn n(&self) -> usize {
        self.atilde.len()
    }

    /// Increment from order `k − 1` to order `k`, divided by `A`.
    fn term(&self, k: usize) -> f64 {
        let (nu2, a, vb, kr) = (self.nu2, self.atilde, self.vbar, &self.kernel);
        let n = self.n();
        match k {
            1 => {
                let mut single: Vec<f64> = (0..n).map(|i| a[i] * kr.dk(vb[i])).collect();
                kr.dk(nu2) - sum_descending(&mut single)
            }
            2 => {
                let mut single: Vec<f64> = (0..n).map(|i| a[i] * vb[i].exp() * kr.d2k(nu2 + vb[i])).collect();
                let double = symmetric_double_sum(n, |i, j| a[i] * a[j] * self.exp_v[(i, j)] * kr.d2k(vb[i] + vb[j]));
                let mut parts = [0.5 * nu2.exp() * kr.d2k(2.0 * nu2), -sum_descending(&mut single), 0.5 * double];
                sum_descending(&mut parts)
            }
            3 => {
                let v = self.v;
                let mut single: Vec<f64> =
                    (0..n).map(|i| a[i] * (nu2 + 2.0 * vb[i]).exp() * kr.d3k(2.0 * nu2 + vb[i])).collect();
                let double = symmetric_double_sum(n, |i, j| {
                    let s = vb[i] + vb[j];
                    a[i] * a[j] * (s + v[(i, j)]).exp() * kr.d3k(nu2 + s)
                });
                let e = &self.exp_v;
                // Sorted operands keep the rounding independent of asset labels.
                let triple = symmetric_triple_sum(n, |i, j, l| {
                    let weight = sorted_product([a[i], a[j], a[l]]) * sorted_product([e[(i, l)], e[(j, l)], e[(i, j)]]);
                    let [x, y, z] = sorted([vb[i], vb[j], vb[l]]);
                    weight * kr.d3k(x + y + z)
                });
                let mut parts = [
                    (3.0 * nu2).exp() / 6.0 * kr.d3k(3.0 * nu2),
                    -0.5 * sum_descending(&mut single),
                    0.5 * double,
                    -triple / 6.0,
                ];
                sum_descending(&mut parts)
            }
            _ => unreachable!("expansion order above three"),
        }
    }
}

fn sorted(mut x: [f64; 3]) -> [f64; 3] {
    x.sort_unstable_by(f64::total_cmp);
    x
}

fn sorted_product(x: [f64; 3]) -> f64 {
    let [p, q, r] = sorted(x);
    p * q * r
}

fn combine_rows(rows: Vec<CompensatedSum>) -> f64 {
    let mut acc = CompensatedSum::new();
    for row in &rows {
        acc.merge(row);
    }
    acc.value()
}

/// `Σᵢ Σⱼ t(i, j)` for a symmetric term, from the `j ≤ i` half.
pub fn symmetric_double_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let rows: Vec<CompensatedSum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<f64> = (0..i).map(|j| 2.0 * term(i, j)).collect();
            row.push(term(i, i));
            accumulate_descending(&mut row)
        })
        .collect();
    combine_rows(rows)
}

/// `Σᵢ Σⱼ Σₗ t(i, j, l)` for a fully symmetric term, from the `l ≤ j ≤ i`
/// wedge with multiplicities 1 (all equal), 3 (two equal) and 6 (distinct).
pub fn symmetric_triple_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize, usize, usize) -> f64 + Sync,
{
    let rows: Vec<CompensatedSum> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(1 + 2 * i + i * i.saturating_sub(1) / 2);
            row.push(term(i, i, i));
            for j in 0..i {
                row.push(3.0 * term(i, j, j));
                row.push(3.0 * term(i, i, j));
                for l in 0..j {
                    row.push(6.0 * term(i, j, l));
                }
            }
            accumulate_descending(&mut row)
        })
        .collect();
    combine_rows(rows)
}
