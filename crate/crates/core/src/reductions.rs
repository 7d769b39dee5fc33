//! Reductions of Asian, Asian-basket and cash-dividend options to a
//! [`BasketSpec`].

use nalgebra::DMatrix;

use crate::basket::BasketSpec;
use crate::black76::OptionKind;
use crate::curves::{forward, integrate_product, PiecewiseCurve};
use crate::error::{invalid, PricingError, Result};

/// Fixed-strike Asian option on one underlying.
///
/// Observations strictly before the valuation date (`t < 0`) need a known
/// fixing in `fixings`, listed in time order. An observation at `t = 0` is the
/// current spot and stays in the basket as a variance-free asset.
#[derive(Debug, Clone, PartialEq)]
pub struct AsianSpec {
    pub spot: f64,
    pub rate: PiecewiseCurve,
    pub yield_curve: PiecewiseCurve,
    pub vol: PiecewiseCurve,
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    pub strike: f64,
    pub kind: OptionKind,
    /// Discount to the payment date; defaults to `exp(−∫₀ᵀ r)`.
    pub discount: Option<f64>,
    pub fixings: Vec<f64>,
}

impl AsianSpec {
    /// Expected average `Σ wᵢ E[S(tᵢ)]`, with fixings for past dates.
    pub fn expected_average(&self) -> Result<f64> {
        validate_schedule(&self.times, &self.weights)?;
        let past = past_count(&self.times);
        if self.fixings.len() != past {
            return Err(fixing_mismatch(past, self.fixings.len()));
        }
        let mut total = 0.0;
        for (k, (&t, &w)) in self.times.iter().zip(&self.weights).enumerate() {
            total += w * if k < past { self.fixings[k] } else { forward(self.spot, &self.rate, &self.yield_curve, t)? };
        }
        Ok(total)
    }
}

/// One underlying of an Asian basket.
#[derive(Debug, Clone, PartialEq)]
pub struct Underlying {
    pub spot: f64,
    pub yield_curve: PiecewiseCurve,
    pub vol: PiecewiseCurve,
}

/// Asian option on a weighted basket `Σⱼ μⱼ Sⱼ`, averaged over `tᵢ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsianBasketSpec {
    pub rate: PiecewiseCurve,
    pub underlyings: Vec<Underlying>,
    pub correlation: DMatrix<f64>,
    pub basket_weights: Vec<f64>,
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
    pub strike: f64,
    pub kind: OptionKind,
    pub discount: Option<f64>,
}

/// European option on a stock paying known cash dividends.
#[derive(Debug, Clone, PartialEq)]
pub struct DividendOptionSpec {
    pub spot: f64,
    pub rate: PiecewiseCurve,
    pub vol: PiecewiseCurve,
    /// `(time, amount)` pairs with times inside `(0, T)`.
    pub dividends: Vec<(f64, f64)>,
    pub strike: f64,
    pub maturity: f64,
    pub kind: OptionKind,
    pub discount: Option<f64>,
}

fn validate_schedule(times: &[f64], weights: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(invalid("averaging schedule is empty"));
    }
    if times.len() != weights.len() {
        return Err(PricingError::Dimension { expected: times.len(), got: weights.len() });
    }
    if times.iter().any(|t| !t.is_finite()) || weights.iter().any(|w| !w.is_finite()) {
        return Err(invalid("averaging times and weights must be finite"));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("averaging times must be strictly increasing"));
    }
    Ok(())
}

fn past_count(times: &[f64]) -> usize {
    times.partition_point(|&t| t < 0.0)
}

fn fixing_mismatch(expected: usize, got: usize) -> PricingError {
    invalid(format!("{expected} observations lie in the past but {got} fixings were given"))
}

fn resolve_discount(discount: Option<f64>, rate: &PiecewiseCurve, maturity: f64) -> Result<f64> {
    match discount {
        Some(b) => Ok(b),
        None => Ok((-rate.integrate(0.0, maturity)?).exp()),
    }
}

fn check_vol(vol: &PiecewiseCurve) -> Result<()> {
    if vol.is_non_negative() {
        Ok(())
    } else {
        Err(invalid("volatility curve has negative values"))
    }
}

pub fn asian_to_basket(spec: &AsianSpec) -> Result<BasketSpec> {
    validate_schedule(&spec.times, &spec.weights)?;
    check_vol(&spec.vol)?;
    let past = past_count(&spec.times);
    if spec.fixings.len() != past {
        return Err(fixing_mismatch(past, spec.fixings.len()));
    }
    let times = &spec.times[past..];
    if times.is_empty() {
        return Err(PricingError::Reduction("every observation is already fixed".into()));
    }
    let realized: f64 = spec.weights[..past].iter().zip(&spec.fixings).map(|(w, x)| w * x).sum();
    let strike = spec.strike - realized;

    let forwards =
        times.iter().map(|&t| forward(spec.spot, &spec.rate, &spec.yield_curve, t)).collect::<Result<Vec<_>>>()?;
    let variances =
        times.iter().map(|&t| integrate_product(&spec.vol, &spec.vol, 0.0, t)).collect::<Result<Vec<_>>>()?;
    let n = times.len();
    // Times are increasing, so the integral to min(tᵢ, tⱼ) is the one of the earlier index.
    let covariance = DMatrix::from_fn(n, n, |i, j| variances[i.min(j)]);
    let maturity = times[n - 1];
    let discount = resolve_discount(spec.discount, &spec.rate, maturity)?;
    BasketSpec::new(spec.weights[past..].to_vec(), forwards, covariance, strike, discount, maturity, spec.kind)
}

/// Pseudo-asset `(j, i)` (underlying `j`, date `i`) lands at index `j·n + i`.
pub fn asian_basket_to_basket(spec: &AsianBasketSpec) -> Result<BasketSpec> {
    validate_schedule(&spec.times, &spec.weights)?;
    if spec.times[0] < 0.0 {
        return Err(invalid("Asian basket observations must not lie in the past"));
    }
    let m = spec.underlyings.len();
    if m == 0 {
        return Err(invalid("Asian basket needs at least one underlying"));
    }
    if spec.basket_weights.len() != m {
        return Err(PricingError::Dimension { expected: m, got: spec.basket_weights.len() });
    }
    if spec.correlation.nrows() != m || spec.correlation.ncols() != m {
        return Err(PricingError::Dimension { expected: m, got: spec.correlation.nrows() });
    }
    for j in 0..m {
        if (spec.correlation[(j, j)] - 1.0).abs() > 1e-12 {
            return Err(invalid("correlation diagonal must be one"));
        }
        for l in 0..j {
            let (a, b) = (spec.correlation[(j, l)], spec.correlation[(l, j)]);
            if (a - b).abs() > 1e-12 || a.abs() > 1.0 {
                return Err(invalid(format!("correlation entry ({j}, {l}) invalid")));
            }
        }
    }
    for u in &spec.underlyings {
        check_vol(&u.vol)?;
    }

    let n = spec.times.len();
    let mut weights = Vec::with_capacity(n * m);
    let mut forwards = Vec::with_capacity(n * m);
    for (u, &mu) in spec.underlyings.iter().zip(&spec.basket_weights) {
        for (&t, &w) in spec.times.iter().zip(&spec.weights) {
            weights.push(w * mu);
            forwards.push(forward(u.spot, &spec.rate, &u.yield_curve, t)?);
        }
    }

    // cross[j][l][i] = ∫₀^{tᵢ} σⱼσₗ
    let mut cross = vec![vec![Vec::new(); m]; m];
    for j in 0..m {
        for l in 0..=j {
            let row = spec
                .times
                .iter()
                .map(|&t| integrate_product(&spec.underlyings[j].vol, &spec.underlyings[l].vol, 0.0, t))
                .collect::<Result<Vec<_>>>()?;
            cross[l][j] = row.clone();
            cross[j][l] = row;
        }
    }
    let size = n * m;
    let covariance = DMatrix::from_fn(size, size, |p, q| {
        let (j, i) = (p / n, p % n);
        let (l, k) = (q / n, q % n);
        spec.correlation[(j, l)] * cross[j][l][i.min(k)]
    });
    let maturity = spec.times[n - 1];
    if !(maturity > 0.0) {
        return Err(invalid("last averaging date must be after the valuation date"));
    }
    let discount = resolve_discount(spec.discount, &spec.rate, maturity)?;
    BasketSpec::new(weights, forwards, covariance, spec.strike, discount, maturity, spec.kind)
}

fn validate_dividends(spec: &DividendOptionSpec) -> Result<()> {
    if !(spec.spot > 0.0) {
        return Err(invalid("spot must be positive"));
    }
    if !(spec.maturity > 0.0) || !spec.maturity.is_finite() {
        return Err(invalid("maturity must be positive"));
    }
    check_vol(&spec.vol)?;
    for &(t, d) in &spec.dividends {
        if !(t > 0.0 && t < spec.maturity) {
            return Err(invalid(format!("dividend time {t} outside (0, {})", spec.maturity)));
        }
        if !(d >= 0.0) || !d.is_finite() {
            return Err(invalid(format!("dividend amount {d} must be non-negative")));
        }
    }
    if spec.dividends.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(invalid("dividend times must be strictly increasing"));
    }
    Ok(())
}

/// `(anchor time, forward to T)` for every non-zero dividend.
fn dividend_forwards(spec: &DividendOptionSpec) -> Result<Vec<(f64, f64)>> {
    spec.dividends
        .iter()
        .filter(|&&(_, d)| d > 0.0)
        .map(|&(t, d)| Ok((t, d * spec.rate.integrate(t, spec.maturity)?.exp())))
        .collect()
}

fn long_forward(spec: &DividendOptionSpec) -> Result<f64> {
    Ok(spec.spot * spec.rate.integrate(0.0, spec.maturity)?.exp())
}

fn check_positive_net_forward(long: f64, divs: &[(f64, f64)]) -> Result<()> {
    let net = long - divs.iter().map(|d| d.1).sum::<f64>();
    if net > 0.0 {
        Ok(())
    } else {
        Err(PricingError::Reduction(format!("dividends exceed the forward spot (net forward {net})")))
    }
}

fn single_asset(spec: &DividendOptionSpec, long: f64, discount: f64) -> Result<BasketSpec> {
    let variance = integrate_product(&spec.vol, &spec.vol, 0.0, spec.maturity)?;
    BasketSpec::new(
        vec![1.0],
        vec![long],
        DMatrix::from_element(1, 1, variance),
        spec.strike,
        discount,
        spec.maturity,
        spec.kind,
    )
}

/// Basket priced in units of the stock.
///
/// Dividing the payoff by `S(T)` turns a call on `S(T)` (with dividends
/// paid out) into a put with strike `S(0)e^{∫r}` on the positive basket
/// `Σⱼ Dⱼe^{∫_{tⱼ}^T r}/S(tⱼ) + K/S(T)`, whose log-covariances are
/// `∫₀^{min(s,u)} σ²` for anchors `tⱼ` and `T`. Without dividends this is the
/// plain one-asset basket.
pub fn dividends_to_basket(spec: &DividendOptionSpec) -> Result<BasketSpec> {
    validate_dividends(spec)?;
    if !(spec.strike > 0.0) {
        return Err(invalid("dividend option strike must be positive"));
    }
    let long = long_forward(spec)?;
    let discount = resolve_discount(spec.discount, &spec.rate, spec.maturity)?;
    let divs = dividend_forwards(spec)?;
    check_positive_net_forward(long, &divs)?;
    if divs.is_empty() {
        return single_asset(spec, long, discount);
    }

    let mut anchors: Vec<f64> = divs.iter().map(|d| d.0).collect();
    let mut forwards: Vec<f64> = divs.iter().map(|d| d.1).collect();
    anchors.push(spec.maturity);
    forwards.push(spec.strike);
    let variances =
        anchors.iter().map(|&t| integrate_product(&spec.vol, &spec.vol, 0.0, t)).collect::<Result<Vec<_>>>()?;
    let n = anchors.len();
    let covariance = DMatrix::from_fn(n, n, |i, j| variances[i.min(j)]);
    BasketSpec::new(vec![1.0; n], forwards, covariance, long, discount, spec.maturity, spec.kind.flipped())
}

/// Basket in the spot measure: the stock long and each dividend short,
/// covariance `∫_{max(s,u)}^T σ²` between assets anchored at `s` and `u`.
pub fn dividends_to_spot_basket(spec: &DividendOptionSpec) -> Result<BasketSpec> {
    validate_dividends(spec)?;
    let long = long_forward(spec)?;
    let discount = resolve_discount(spec.discount, &spec.rate, spec.maturity)?;
    let divs = dividend_forwards(spec)?;
    check_positive_net_forward(long, &divs)?;

    let mut anchors = vec![0.0];
    let mut forwards = vec![long];
    let mut weights = vec![1.0];
    for &(t, f) in &divs {
        anchors.push(t);
        forwards.push(f);
        weights.push(-1.0);
    }
    let remaining = anchors
        .iter()
        .map(|&t| integrate_product(&spec.vol, &spec.vol, t, spec.maturity))
        .collect::<Result<Vec<_>>>()?;
    let n = anchors.len();
    let covariance = DMatrix::from_fn(n, n, |i, j| remaining[i.max(j)]);
    BasketSpec::new(weights, forwards, covariance, spec.strike, discount, spec.maturity, spec.kind)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(x: f64) -> PiecewiseCurve {
        PiecewiseCurve::constant(x)
    }

    fn two_obs() -> AsianSpec {
        AsianSpec {
            spot: 100.0,
            rate: flat(0.05),
            yield_curve: flat(0.0),
            vol: flat(0.5),
            times: vec![0.1, 1.1],
            weights: vec![0.5, 0.5],
            strike: 100.0,
            kind: OptionKind::Call,
            discount: None,
            fixings: vec![],
        }
    }

    #[test]
    fn two_observation_covariance() {
        let b = asian_to_basket(&two_obs()).unwrap();
        let v = b.covariance();
        let expected = [0.025, 0.025, 0.025, 0.275];
        for (k, e) in expected.iter().enumerate() {
            assert!((v[(k / 2, k % 2)] - e).abs() < 1e-15);
        }
        assert!((b.forwards()[1] - 100.0 * 0.055f64.exp()).abs() < 1e-12);
        assert!((b.discount() - (-0.055f64).exp()).abs() < 1e-15);
        assert_eq!(b.maturity(), 1.1);
    }

    #[test]
    fn past_fixings_fold_into_strike() {
        let mut s = two_obs();
        s.times = vec![-0.5, 0.1, 1.1];
        s.weights = vec![0.2, 0.4, 0.4];
        assert!(asian_to_basket(&s).is_err());
        s.fixings = vec![90.0];
        let b = asian_to_basket(&s).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b.strike() - (100.0 - 18.0)).abs() < 1e-12);
        let avg = s.expected_average().unwrap();
        assert!((avg - 18.0 - b.basket_forward()).abs() < 1e-12);
    }

    #[test]
    fn observation_at_zero_is_kept() {
        let mut s = two_obs();
        s.times = vec![0.0, 1.0];
        let b = asian_to_basket(&s).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.covariance()[(0, 0)], 0.0);
        assert_eq!(b.forwards()[0], 100.0);
    }

    #[test]
    fn rejects_bad_schedules() {
        let mut s = two_obs();
        s.times = vec![1.0, 1.0];
        assert!(asian_to_basket(&s).is_err());
        let mut s = two_obs();
        s.weights = vec![1.0];
        assert!(asian_to_basket(&s).is_err());
        let mut s = two_obs();
        s.times = vec![-2.0, -1.0];
        s.fixings = vec![1.0, 1.0];
        assert!(matches!(asian_to_basket(&s), Err(PricingError::Reduction(_))));
    }

    #[test]
    fn asian_basket_single_underlying_matches_asian() {
        let a = two_obs();
        let ab = AsianBasketSpec {
            rate: a.rate.clone(),
            underlyings: vec![Underlying { spot: 100.0, yield_curve: flat(0.0), vol: flat(0.5) }],
            correlation: DMatrix::identity(1, 1),
            basket_weights: vec![1.0],
            times: a.times.clone(),
            weights: a.weights.clone(),
            strike: a.strike,
            kind: a.kind,
            discount: None,
        };
        assert_eq!(asian_basket_to_basket(&ab).unwrap(), asian_to_basket(&a).unwrap());
    }

    #[test]
    fn asian_basket_layout() {
        let rho = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let spec = AsianBasketSpec {
            rate: flat(0.02),
            underlyings: vec![
                Underlying { spot: 50.0, yield_curve: flat(0.01), vol: flat(0.2) },
                Underlying { spot: 80.0, yield_curve: flat(0.0), vol: flat(0.4) },
            ],
            correlation: rho,
            basket_weights: vec![2.0, 1.0],
            times: vec![0.5, 1.0, 1.5],
            weights: vec![1.0 / 3.0; 3],
            strike: 170.0,
            kind: OptionKind::Put,
            discount: Some(0.97),
        };
        let b = asian_basket_to_basket(&spec).unwrap();
        assert_eq!(b.len(), 6);
        assert!((b.weights()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((b.forwards()[4] - 80.0 * 0.02f64.exp()).abs() < 1e-12);
        let v = b.covariance();
        // (asset 0, date 2) with (asset 1, date 1)
        assert!((v[(2, 4)] - 0.3 * 0.2 * 0.4 * 1.0).abs() < 1e-15);
        assert!((v[(5, 5)] - 0.16 * 1.5).abs() < 1e-15);
        assert_eq!(b.discount(), 0.97);
    }

    fn seven_year() -> DividendOptionSpec {
        DividendOptionSpec {
            spot: 100.0,
            rate: flat(0.06),
            vol: flat(0.25),
            dividends: vec![(0.9, 6.0), (1.9, 6.5), (2.9, 7.0), (3.9, 7.5), (4.9, 8.0), (5.9, 8.0), (6.9, 8.0)],
            strike: 100.0,
            maturity: 7.0,
            kind: OptionKind::Call,
            discount: None,
        }
    }

    #[test]
    fn dividend_baskets_share_forward_value() {
        let s = seven_year();
        let num = dividends_to_basket(&s).unwrap();
        let spot = dividends_to_spot_basket(&s).unwrap();
        assert_eq!(num.len(), 8);
        assert_eq!(spot.len(), 8);
        assert_eq!(num.kind(), OptionKind::Put);
        // The forward value of the payoff is the same in both forms up to sign.
        let f_spot = spot.basket_forward() - spot.strike();
        let f_num = num.strike() - num.basket_forward();
        assert!((f_spot - f_num).abs() < 1e-10);
        assert!((spot.covariance()[(0, 0)] - 0.0625 * 7.0).abs() < 1e-14);
        assert!((spot.covariance()[(1, 3)] - 0.0625 * (7.0 - 2.9)).abs() < 1e-14);
        assert!((num.covariance()[(7, 2)] - 0.0625 * 2.9).abs() < 1e-14);
    }

    #[test]
    fn zero_dividends_give_single_asset() {
        let mut s = seven_year();
        s.dividends.iter_mut().for_each(|d| d.1 = 0.0);
        let a = dividends_to_basket(&s).unwrap();
        let b = dividends_to_spot_basket(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 1);
        assert_eq!(a.kind(), OptionKind::Call);
    }

    #[test]
    fn dividend_validation() {
        let mut s = seven_year();
        s.dividends.push((7.0, 1.0));
        assert!(dividends_to_basket(&s).is_err());
        let mut s = seven_year();
        s.dividends = vec![(1.0, 200.0)];
        assert!(matches!(dividends_to_basket(&s), Err(PricingError::Reduction(_))));
        let mut s = seven_year();
        s.dividends[0].1 = -1.0;
        assert!(dividends_to_spot_basket(&s).is_err());
    }
}
