//! Command implementations behind the `basket-expansion` binary.
//!
//! Configs are TOML documents; see the README for the field reference.
//! Every command writes CSV with a header row.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::basket::{BasketSpec, ProxyKind};
use crate::black76::OptionKind;
use crate::curves::{forward, PiecewiseCurve};
use crate::error::PricingError;
use crate::expansion::{expand_price_with, ExpansionOptions, ExpansionOrder};
use crate::mc::{price_mc_strikes, McConfig, Sampler};
use crate::reductions::{
    asian_basket_to_basket, asian_to_basket, dividends_to_basket, dividends_to_spot_basket, AsianBasketSpec, AsianSpec,
    DividendOptionSpec, Underlying,
};
use crate::result::PriceResult;

const TABLES: &str = include_str!("../data/tables.toml");

#[derive(Debug)]
pub enum CliError {
    /// Malformed input; exit code 2.
    Usage(String),
    /// Pricing or output failure; exit code 1.
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::InvalidArgument(_) | PricingError::Dimension { .. } => CliError::Usage(e.to_string()),
            other => CliError::Failure(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failure(format!("csv output: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failure(format!("io: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

// ---------------------------------------------------------------------------
// Config schema

/// A scalar or a step curve.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CurveInput {
    Constant(f64),
    Steps { breakpoints: Vec<f64>, values: Vec<f64> },
}

impl CurveInput {
    fn build(&self, vol: bool) -> CliResult<PiecewiseCurve> {
        match self {
            CurveInput::Constant(x) if vol && *x < 0.0 => Err(usage("volatility must be non-negative")),
            CurveInput::Constant(x) => Ok(PiecewiseCurve::constant(*x)),
            CurveInput::Steps { breakpoints, values } => {
                let c = if vol {
                    PiecewiseCurve::volatility(breakpoints.clone(), values.clone())
                } else {
                    PiecewiseCurve::new(breakpoints.clone(), values.clone())
                };
                c.map_err(CliError::from)
            }
        }
    }
}

impl Default for CurveInput {
    fn default() -> Self {
        CurveInput::Constant(0.0)
    }
}

/// `count` evenly spaced dates from `start` to `end` inclusive.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleInput {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

fn observation_times(times: &Option<Vec<f64>>, schedule: &Option<ScheduleInput>) -> CliResult<Vec<f64>> {
    match (times, schedule) {
        (Some(t), None) => Ok(t.clone()),
        (None, Some(s)) => {
            if s.count == 0 {
                return Err(usage("schedule count must be positive"));
            }
            if s.count == 1 {
                return Ok(vec![s.end]);
            }
            let step = (s.end - s.start) / (s.count - 1) as f64;
            Ok((0..s.count).map(|i| if i + 1 == s.count { s.end } else { s.start + step * i as f64 }).collect())
        }
        (Some(_), Some(_)) => Err(usage("give either `times` or `schedule`, not both")),
        (None, None) => Err(usage("observation dates missing: give `times` or `schedule`")),
    }
}

fn averaging_weights(weights: &Option<Vec<f64>>, n: usize) -> Vec<f64> {
    weights.clone().unwrap_or_else(|| vec![1.0 / n as f64; n])
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum KindInput {
    #[default]
    Call,
    Put,
}

impl From<KindInput> for OptionKind {
    fn from(k: KindInput) -> Self {
        match k {
            KindInput::Call => OptionKind::Call,
            KindInput::Put => OptionKind::Put,
        }
    }
}

/// A full matrix or a single off-diagonal value.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CorrelationInput {
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
}

impl CorrelationInput {
    fn build(&self, n: usize) -> CliResult<DMatrix<f64>> {
        match self {
            CorrelationInput::Uniform(rho) => Ok(DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { *rho })),
            CorrelationInput::Matrix(rows) => matrix(rows, n, "correlation"),
        }
    }
}

fn matrix(rows: &[Vec<f64>], n: usize, what: &str) -> CliResult<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(usage(format!("{what} must be a {n}×{n} array of rows")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DividendReduction {
    /// Stock taken as numeraire.
    #[default]
    Numeraire,
    /// Long stock, short dividends in the spot measure.
    Spot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnderlyingInput {
    pub spot: f64,
    #[serde(default, rename = "yield")]
    pub yield_curve: CurveInput,
    pub vol: CurveInput,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstrumentConfig {
    Basket {
        weights: Vec<f64>,
        forwards: Vec<f64>,
        #[serde(default)]
        covariance: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        vols: Option<Vec<f64>>,
        #[serde(default)]
        correlation: Option<CorrelationInput>,
        strike: f64,
        maturity: f64,
        #[serde(default)]
        discount: Option<f64>,
        #[serde(default)]
        rate: Option<f64>,
        #[serde(default)]
        kind: KindInput,
    },
    Asian {
        spot: f64,
        #[serde(default)]
        rate: CurveInput,
        #[serde(default, rename = "yield")]
        yield_curve: CurveInput,
        vol: CurveInput,
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default)]
        schedule: Option<ScheduleInput>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        strike: f64,
        #[serde(default)]
        kind: KindInput,
        #[serde(default)]
        discount: Option<f64>,
        #[serde(default)]
        fixings: Vec<f64>,
    },
    AsianBasket {
        #[serde(default)]
        rate: CurveInput,
        underlyings: Vec<UnderlyingInput>,
        correlation: CorrelationInput,
        basket_weights: Vec<f64>,
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default)]
        schedule: Option<ScheduleInput>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
        strike: f64,
        #[serde(default)]
        kind: KindInput,
        #[serde(default)]
        discount: Option<f64>,
    },
    DividendVanilla {
        spot: f64,
        #[serde(default)]
        rate: CurveInput,
        vol: CurveInput,
        #[serde(default)]
        dividend_times: Vec<f64>,
        #[serde(default)]
        dividend_amounts: Vec<f64>,
        strike: f64,
        maturity: f64,
        #[serde(default)]
        kind: KindInput,
        #[serde(default)]
        discount: Option<f64>,
        #[serde(default)]
        reduction: DividendReduction,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SamplerInput {
    #[default]
    Pseudorandom,
    Sobol,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub paths: usize,
    pub seed: u64,
    pub sampler: SamplerInput,
    pub antithetic: bool,
    pub block_size: usize,
    pub replicates: usize,
}

impl Default for McSection {
    fn default() -> Self {
        let d = McConfig::default();
        Self {
            paths: d.paths,
            seed: d.seed,
            sampler: SamplerInput::Pseudorandom,
            antithetic: d.antithetic,
            block_size: d.block_size,
            replicates: d.replicates,
        }
    }
}

impl McSection {
    pub fn config(&self) -> McConfig {
        McConfig {
            paths: self.paths,
            seed: self.seed,
            sampler: match self.sampler {
                SamplerInput::Pseudorandom => Sampler::Pseudorandom,
                SamplerInput::Sobol => Sampler::Sobol,
            },
            antithetic: self.antithetic,
            block_size: self.block_size,
            replicates: self.replicates,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpansionSection {
    pub sanity_bound: f64,
}

impl Default for ExpansionSection {
    fn default() -> Self {
        Self { sanity_bound: ExpansionOptions::default().sanity_bound }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepGrid {
    /// `K = (1 + M) · forward value of the payoff underlying`.
    ForwardMoneyness,
    /// `K = m · notional`.
    SpotMoneyness,
    Strike,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub grid: SweepGrid,
    pub values: Vec<f64>,
    /// Denominator of the bp error; defaults to the instrument's spot notional.
    #[serde(default)]
    pub notional: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instrument: InstrumentConfig,
    pub methods: Vec<String>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub expansion: ExpansionSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| usage(format!("config: {e}")))?;
        if cfg.methods.is_empty() {
            return Err(usage("config lists no methods"));
        }
        for m in &cfg.methods {
            Method::parse(m)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    fn methods(&self) -> CliResult<Vec<Method>> {
        self.methods.iter().map(|m| Method::parse(m)).collect()
    }

    fn options(&self) -> ExpansionOptions {
        ExpansionOptions { sanity_bound: self.expansion.sanity_bound }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Expansion(ProxyKind, ExpansionOrder),
    MonteCarlo,
}

impl Method {
    pub fn parse(s: &str) -> CliResult<Self> {
        let up = s.trim().to_ascii_uppercase();
        if up == "MC" {
            return Ok(Method::MonteCarlo);
        }
        let bad = || usage(format!("unknown method `{s}` (expected VG0..VG3, VL0..VL3 or MC)"));
        if up.len() != 3 {
            return Err(bad());
        }
        let kind = match &up[..2] {
            "VG" => ProxyKind::VorstGeometric,
            "VL" => ProxyKind::VorstLevy,
            _ => return Err(bad()),
        };
        let order = up[2..].parse::<u8>().map_err(|_| bad())?;
        Ok(Method::Expansion(kind, ExpansionOrder::from_u8(order).map_err(|_| bad())?))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Expansion(k, o) => write!(f, "{}{}", k.tag(), o.as_u8()),
            Method::MonteCarlo => f.write_str("MC"),
        }
    }
}

// ---------------------------------------------------------------------------
// Instruments

#[derive(Debug, Clone)]
pub enum Instrument {
    Basket(BasketSpec),
    Asian(AsianSpec),
    AsianBasket(AsianBasketSpec),
    Dividend(DividendOptionSpec, DividendReduction),
}

impl Instrument {
    pub fn from_config(cfg: &InstrumentConfig) -> CliResult<Self> {
        Ok(match cfg {
            InstrumentConfig::Basket {
                weights,
                forwards,
                covariance,
                vols,
                correlation,
                strike,
                maturity,
                discount,
                rate,
                kind,
            } => {
                let n = weights.len();
                let discount = match (discount, rate) {
                    (Some(_), Some(_)) => return Err(usage("give either `discount` or `rate`, not both")),
                    (Some(b), None) => *b,
                    (None, Some(r)) => (-r * maturity).exp(),
                    (None, None) => 1.0,
                };
                let spec = match (covariance, vols) {
                    (Some(c), None) => {
                        if correlation.is_some() {
                            return Err(usage("`correlation` is only used with `vols`"));
                        }
                        BasketSpec::new(
                            weights.clone(),
                            forwards.clone(),
                            matrix(c, n, "covariance")?,
                            *strike,
                            discount,
                            *maturity,
                            (*kind).into(),
                        )?
                    }
                    (None, Some(v)) => {
                        let rho = correlation.clone().unwrap_or(CorrelationInput::Uniform(0.0)).build(n)?;
                        BasketSpec::from_vols(
                            weights.clone(),
                            forwards.clone(),
                            v,
                            &rho,
                            *strike,
                            discount,
                            *maturity,
                            (*kind).into(),
                        )?
                    }
                    _ => return Err(usage("basket needs exactly one of `covariance` or `vols`")),
                };
                Instrument::Basket(spec)
            }
            InstrumentConfig::Asian {
                spot,
                rate,
                yield_curve,
                vol,
                times,
                schedule,
                weights,
                strike,
                kind,
                discount,
                fixings,
            } => {
                let times = observation_times(times, schedule)?;
                let weights = averaging_weights(weights, times.len());
                Instrument::Asian(AsianSpec {
                    spot: *spot,
                    rate: rate.build(false)?,
                    yield_curve: yield_curve.build(false)?,
                    vol: vol.build(true)?,
                    times,
                    weights,
                    strike: *strike,
                    kind: (*kind).into(),
                    discount: *discount,
                    fixings: fixings.clone(),
                })
            }
            InstrumentConfig::AsianBasket {
                rate,
                underlyings,
                correlation,
                basket_weights,
                times,
                schedule,
                weights,
                strike,
                kind,
                discount,
            } => {
                let times = observation_times(times, schedule)?;
                let weights = averaging_weights(weights, times.len());
                let underlyings = underlyings
                    .iter()
                    .map(|u| {
                        Ok(Underlying {
                            spot: u.spot,
                            yield_curve: u.yield_curve.build(false)?,
                            vol: u.vol.build(true)?,
                        })
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                Instrument::AsianBasket(AsianBasketSpec {
                    rate: rate.build(false)?,
                    correlation: correlation.build(underlyings.len())?,
                    underlyings,
                    basket_weights: basket_weights.clone(),
                    times,
                    weights,
                    strike: *strike,
                    kind: (*kind).into(),
                    discount: *discount,
                })
            }
            InstrumentConfig::DividendVanilla {
                spot,
                rate,
                vol,
                dividend_times,
                dividend_amounts,
                strike,
                maturity,
                kind,
                discount,
                reduction,
            } => {
                if dividend_times.len() != dividend_amounts.len() {
                    return Err(usage("dividend_times and dividend_amounts differ in length"));
                }
                Instrument::Dividend(
                    DividendOptionSpec {
                        spot: *spot,
                        rate: rate.build(false)?,
                        vol: vol.build(true)?,
                        dividends: dividend_times.iter().copied().zip(dividend_amounts.iter().copied()).collect(),
                        strike: *strike,
                        maturity: *maturity,
                        kind: (*kind).into(),
                        discount: *discount,
                    },
                    *reduction,
                )
            }
        })
    }

    pub fn strike(&self) -> f64 {
        match self {
            Instrument::Basket(s) => s.strike(),
            Instrument::Asian(s) => s.strike,
            Instrument::AsianBasket(s) => s.strike,
            Instrument::Dividend(s, _) => s.strike,
        }
    }

    pub fn with_strike(&self, strike: f64) -> Self {
        let mut out = self.clone();
        match &mut out {
            Instrument::Basket(s) => *s = s.with_strike(strike),
            Instrument::Asian(s) => s.strike = strike,
            Instrument::AsianBasket(s) => s.strike = strike,
            Instrument::Dividend(s, _) => s.strike = strike,
        }
        out
    }

    /// Basket fed to the expansions.
    pub fn basket(&self) -> CliResult<BasketSpec> {
        Ok(match self {
            Instrument::Basket(s) => s.clone(),
            Instrument::Asian(s) => asian_to_basket(s)?,
            Instrument::AsianBasket(s) => asian_basket_to_basket(s)?,
            Instrument::Dividend(s, DividendReduction::Numeraire) => dividends_to_basket(s)?,
            Instrument::Dividend(s, DividendReduction::Spot) => dividends_to_spot_basket(s)?,
        })
    }

    /// Basket simulated by Monte Carlo. Its strike enters linearly, so one set
    /// of paths serves several strikes.
    pub fn mc_basket(&self) -> CliResult<BasketSpec> {
        match self {
            Instrument::Dividend(s, _) => Ok(dividends_to_spot_basket(s)?),
            other => other.basket(),
        }
    }

    /// Forward value of the underlying of the payoff (basket level, average,
    /// or dividend-adjusted stock).
    pub fn forward_value(&self) -> CliResult<f64> {
        Ok(match self {
            Instrument::Basket(s) => s.basket_forward(),
            Instrument::Asian(s) => s.expected_average()?,
            Instrument::AsianBasket(s) => {
                let mut total = 0.0;
                for (u, mu) in s.underlyings.iter().zip(&s.basket_weights) {
                    for (&t, &w) in s.times.iter().zip(&s.weights) {
                        total += w * mu * forward(u.spot, &s.rate, &u.yield_curve, t)?;
                    }
                }
                total
            }
            Instrument::Dividend(..) => {
                let b = self.mc_basket()?;
                b.basket_forward()
            }
        })
    }

    /// Spot-level size used for bp errors.
    pub fn notional(&self) -> f64 {
        match self {
            Instrument::Basket(s) => s.basket_forward(),
            Instrument::Asian(s) => s.spot,
            Instrument::AsianBasket(s) => s.underlyings.iter().zip(&s.basket_weights).map(|(u, mu)| u.spot * mu).sum(),
            Instrument::Dividend(s, _) => s.spot,
        }
    }
}

/// Expansion price of the instrument.
pub fn price_expansion(
    instrument: &Instrument,
    kind: ProxyKind,
    order: ExpansionOrder,
    options: &ExpansionOptions,
) -> CliResult<PriceResult> {
    Ok(expand_price_with(&instrument.basket()?, kind, order, options)?)
}

/// Monte Carlo prices of the instrument at several strikes on shared paths.
pub fn price_mc_grid(instrument: &Instrument, strikes: &[f64], cfg: &McConfig) -> CliResult<Vec<PriceResult>> {
    let base = instrument.mc_basket()?;
    let reduced = strikes
        .iter()
        .map(|&k| Ok(instrument.with_strike(k).mc_basket()?.strike()))
        .collect::<CliResult<Vec<f64>>>()?;
    Ok(price_mc_strikes(&base, &reduced, cfg)?)
}

// ---------------------------------------------------------------------------
// Commands

fn fmt_num(x: f64) -> String {
    format!("{x:.10}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// `price`: one CSV row per method. Every method is attempted; the first
/// failure is returned after all rows are written.
pub fn cmd_price(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let instrument = Instrument::from_config(&config.instrument)?;
    let methods = config.methods()?;
    let options = config.options();
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "method",
        "price",
        "std_error",
        "basket_forward",
        "normalized_strike",
        "proxy_variance",
        "alpha",
        "order",
        "warnings",
        "error",
    ])?;
    let mut first_error = None;
    for method in methods {
        let result = match method {
            Method::Expansion(kind, order) => price_expansion(&instrument, kind, order, &options),
            Method::MonteCarlo => {
                price_mc_grid(&instrument, &[instrument.strike()], &config.mc.config()).map(|mut v| v.remove(0))
            }
        };
        match result {
            Ok(r) => {
                let d = &r.diagnostics;
                let (nu2, alpha, order) = match method {
                    Method::Expansion(..) => (fmt_num(d.proxy_variance), fmt_num(d.alpha), d.order.to_string()),
                    Method::MonteCarlo => Default::default(),
                };
                w.write_record([
                    method.to_string(),
                    fmt_num(r.price),
                    fmt_opt(r.std_error),
                    fmt_num(d.basket_forward),
                    fmt_num(d.normalized_strike),
                    nu2,
                    alpha,
                    order,
                    d.warnings.join("; "),
                    String::new(),
                ])?;
            }
            Err(e) => {
                let mut row = vec![method.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.to_string());
                w.write_record(&row)?;
                first_error.get_or_insert(e);
            }
        }
    }
    w.flush()?;
    match first_error {
        None => Ok(()),
        Some(CliError::Usage(m)) | Some(CliError::Failure(m)) => Err(CliError::Failure(m)),
    }
}

/// Strikes requested by a sweep section.
pub fn sweep_strikes(instrument: &Instrument, sweep: &SweepSection) -> CliResult<(Vec<f64>, f64)> {
    if sweep.values.is_empty() {
        return Err(usage("sweep has no grid values"));
    }
    let notional = sweep.notional.unwrap_or_else(|| instrument.notional());
    let strikes = match sweep.grid {
        SweepGrid::Strike => sweep.values.clone(),
        SweepGrid::SpotMoneyness => sweep.values.iter().map(|m| m * notional).collect(),
        SweepGrid::ForwardMoneyness => {
            let f = instrument.forward_value()?;
            sweep.values.iter().map(|m| (1.0 + m) * f).collect()
        }
    };
    Ok((strikes, notional))
}

/// `sweep`: errors in bp of the notional against Monte Carlo over a strike
/// grid sharing one set of paths.
pub fn cmd_sweep(config: &RunConfig, out: &mut dyn Write) -> CliResult<()> {
    let sweep = config.sweep.as_ref().ok_or_else(|| usage("sweep config needs a [sweep] section"))?;
    let instrument = Instrument::from_config(&config.instrument)?;
    let methods: Vec<Method> = config.methods()?.into_iter().filter(|m| *m != Method::MonteCarlo).collect();
    let options = config.options();
    let (strikes, notional) = sweep_strikes(&instrument, sweep)?;
    let forward_value = instrument.forward_value()?;
    let mc = price_mc_grid(&instrument, &strikes, &config.mc.config())?;

    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "strike".to_string(),
        "forward_moneyness".into(),
        "spot_moneyness".into(),
        "mc_price".into(),
        "mc_se_bp".into(),
    ];
    header.extend(methods.iter().map(|m| format!("{m}_bp")));
    w.write_record(&header)?;
    let bp = 1e4 / notional;
    let mut first_error = None;
    for (&k, reference) in strikes.iter().zip(&mc) {
        let at = instrument.with_strike(k);
        let mut row = vec![
            fmt_num(k),
            fmt_num(k / forward_value - 1.0),
            fmt_num(k / notional),
            fmt_num(reference.price),
            fmt_num(reference.std_error.unwrap_or(0.0) * bp),
        ];
        for m in &methods {
            let Method::Expansion(kind, order) = *m else { unreachable!() };
            match price_expansion(&at, kind, order, &options) {
                Ok(r) => row.push(fmt_num((r.price - reference.price) * bp)),
                Err(e) => {
                    row.push(String::new());
                    first_error.get_or_insert(e);
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    match first_error {
        None => Ok(()),
        Some(e) => Err(CliError::Failure(e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Built-in tables

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDef {
    pub id: String,
    pub title: String,
    pub label: String,
    pub methods: Vec<String>,
    pub base: toml::Table,
    #[serde(rename = "row")]
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableRow {
    pub label: String,
    #[serde(default)]
    pub set: toml::Table,
    /// Reference values keyed by column name.
    #[serde(default)]
    pub reference: BTreeMap<String, f64>,
}

impl TableRow {
    /// Instrument of this row: the table base with the row overrides applied.
    pub fn instrument(&self, base: &toml::Table) -> CliResult<Instrument> {
        let mut merged = base.clone();
        for (k, v) in &self.set {
            merged.insert(k.clone(), v.clone());
        }
        let cfg: InstrumentConfig =
            toml::Value::Table(merged).try_into().map_err(|e| usage(format!("table row `{}`: {e}", self.label)))?;
        Instrument::from_config(&cfg)
    }
}

#[derive(Debug, Deserialize)]
struct TableFile {
    table: Vec<TableDef>,
}

/// Table definitions shipped with the binary.
pub fn builtin_tables() -> Vec<TableDef> {
    let file: TableFile = toml::from_str(TABLES).expect("embedded table definitions parse");
    file.table
}

pub fn find_table(id: &str) -> CliResult<TableDef> {
    let tables = builtin_tables();
    let ids: Vec<String> = tables.iter().map(|t| t.id.clone()).collect();
    tables
        .into_iter()
        .find(|t| t.id == id)
        .ok_or_else(|| usage(format!("unknown table `{id}` (known: {})", ids.join(", "))))
}

/// Computed table: `values[row][col]` for the columns in `columns`.
#[derive(Debug, Clone)]
pub struct TableOutput {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
    pub mc: Vec<Option<(f64, f64)>>,
    pub reference: Vec<BTreeMap<String, f64>>,
}

/// Evaluates every row of a table; Monte Carlo is skipped when `mc` is `None`.
pub fn compute_table(def: &TableDef, mc: Option<&McConfig>) -> CliResult<TableOutput> {
    let methods = def.methods.iter().map(|m| Method::parse(m)).collect::<CliResult<Vec<_>>>()?;
    let options = ExpansionOptions::default();
    let mut out = TableOutput {
        columns: methods.iter().map(|m| m.to_string()).collect(),
        labels: Vec::new(),
        values: Vec::new(),
        mc: Vec::new(),
        reference: Vec::new(),
    };
    for row in &def.rows {
        let instrument = row.instrument(&def.base)?;
        let mut values = Vec::new();
        for m in &methods {
            values.push(match *m {
                Method::Expansion(kind, order) => match price_expansion(&instrument, kind, order, &options) {
                    Ok(r) => Some(r.price),
                    Err(CliError::Failure(_)) => None,
                    Err(e) => return Err(e),
                },
                Method::MonteCarlo => None,
            });
        }
        let mc_value = match mc {
            Some(cfg) => {
                let r = price_mc_grid(&instrument, &[instrument.strike()], cfg)?.remove(0);
                Some((r.price, r.std_error.unwrap_or(0.0)))
            }
            None => None,
        };
        out.labels.push(row.label.clone());
        out.values.push(values);
        out.mc.push(mc_value);
        out.reference.push(row.reference.clone());
    }
    Ok(out)
}

fn rmse_mae(diffs: &[f64]) -> Option<(f64, f64)> {
    if diffs.is_empty() {
        return None;
    }
    let n = diffs.len() as f64;
    let rmse = (diffs.iter().map(|d| d * d).sum::<f64>() / n).sqrt();
    let mae = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    Some((rmse, mae))
}

impl TableOutput {
    /// Differences of a method column against the local MC column.
    pub fn errors_vs_mc(&self, col: usize) -> Vec<f64> {
        self.values.iter().zip(&self.mc).filter_map(|(v, mc)| Some(v[col]? - mc.as_ref()?.0)).collect()
    }

    /// Largest absolute difference of a method column against the reference values.
    pub fn max_diff_vs_reference(&self, col: usize) -> Option<f64> {
        let name = &self.columns[col];
        self.values.iter().zip(&self.reference).filter_map(|(v, p)| Some((v[col]? - p.get(name)?).abs())).reduce(f64::max)
    }

    pub fn write_csv(&self, def: &TableDef, out: &mut dyn Write) -> CliResult<()> {
        let mut w = csv::Writer::from_writer(out);
        let with_mc = self.mc.iter().any(Option::is_some);
        let mut header = vec![def.label.clone()];
        if with_mc {
            header.push("MC".into());
            header.push("MC_SE".into());
        }
        header.extend(self.columns.iter().cloned());
        let reference_cols: Vec<String> = {
            let mut names: Vec<String> = self.reference.iter().flat_map(|p| p.keys().cloned()).collect();
            names.sort();
            names.dedup();
            names
        };
        header.extend(reference_cols.iter().map(|c| format!("ref_{c}")));
        w.write_record(&header)?;

        for (r, label) in self.labels.iter().enumerate() {
            let mut row = vec![label.clone()];
            if with_mc {
                let (p, se) = self.mc[r].unwrap_or((f64::NAN, f64::NAN));
                row.push(fmt_num(p));
                row.push(fmt_num(se));
            }
            row.extend(self.values[r].iter().map(|v| v.map(fmt_num).unwrap_or_else(|| "NaN".into())));
            row.extend(reference_cols.iter().map(|c| fmt_opt(self.reference[r].get(c).copied())));
            w.write_record(&row)?;
        }

        let pad = header.len() - 1 - if with_mc { 2 } else { 0 } - self.columns.len();
        let mut footer = |name: &str, cells: Vec<String>| -> CliResult<()> {
            let mut row = vec![name.to_string()];
            if with_mc {
                row.push(String::new());
                row.push(String::new());
            }
            row.extend(cells);
            row.extend(std::iter::repeat_n(String::new(), pad));
            w.write_record(&row)?;
            Ok(())
        };
        if with_mc {
            let stats: Vec<Option<(f64, f64)>> =
                (0..self.columns.len()).map(|c| rmse_mae(&self.errors_vs_mc(c))).collect();
            footer("RMSE", stats.iter().map(|s| fmt_opt(s.map(|x| x.0))).collect())?;
            footer("MAE", stats.iter().map(|s| fmt_opt(s.map(|x| x.1))).collect())?;
        }
        footer("MAX_DIFF_VS_REF", (0..self.columns.len()).map(|c| fmt_opt(self.max_diff_vs_reference(c))).collect())?;
        w.flush()?;
        Ok(())
    }
}

/// `table`: regenerates a built-in table. `paths = 0` skips Monte Carlo.
pub fn cmd_table(id: &str, mc: &McConfig, out: &mut dyn Write) -> CliResult<()> {
    let def = find_table(id)?;
    let table = compute_table(&def, if mc.paths == 0 { None } else { Some(mc) })?;
    table.write_csv(&def, out)
}
