//! Monte Carlo reference pricer.
//!
//! The terminal law of a basket is an n-variate lognormal, so terminal values
//! are sampled directly: `Xᵢ = Fᵢ exp(−Vᵢᵢ/2 + (Lz)ᵢ)` with `LLᵀ = V`.
//! Work is split into blocks with independent generator streams; block
//! results are merged in index order, so estimates do not depend on the
//! number of worker threads.

mod factor;
pub mod sobol;

pub use factor::{factor_psd, spectral_factor};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::basket::BasketSpec;
use crate::black76::norm_inv_cdf;
use crate::error::{invalid, Result};
use crate::result::{Diagnostics, PriceResult};
use sobol::{SobolDirections, MAX_DIMENSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Pseudorandom,
    /// Randomized quasi Monte Carlo: scrambled, digitally shifted Sobol
    /// points on a PCA-ordered factor.
    Sobol,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// Number of payoff evaluations.
    pub paths: usize,
    pub seed: u64,
    pub sampler: Sampler,
    pub antithetic: bool,
    /// Samples per deterministic accumulation block.
    pub block_size: usize,
    /// Independent shifts used for the Sobol error estimate.
    pub replicates: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 1 << 20,
            seed: 42,
            sampler: Sampler::Pseudorandom,
            antithetic: false,
            block_size: 1 << 13,
            replicates: 16,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.paths < 2 {
            return Err(invalid("Monte Carlo needs at least two paths"));
        }
        if self.block_size == 0 {
            return Err(invalid("block size must be positive"));
        }
        if self.sampler == Sampler::Sobol {
            if self.replicates < 2 {
                return Err(invalid("Sobol sampling needs at least two replicates"));
            }
            let per_path = if self.antithetic { 2 } else { 1 };
            if self.paths < self.replicates * per_path {
                return Err(invalid("fewer paths than Sobol replicates"));
            }
        }
        Ok(())
    }
}

/// Running mean and sum of squared deviations (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count / total;
        self.m2 += other.m2 + delta * delta * self.count * other.count / total;
        self.count = total;
    }

    fn variance(&self) -> f64 {
        if self.count > 1.0 {
            self.m2 / (self.count - 1.0)
        } else {
            0.0
        }
    }
}

/// Maps standard normal draws to basket values.
struct BasketSampler {
    n: usize,
    cols: usize,
    /// Row-major `n × cols` factor.
    factor: Vec<f64>,
    /// Non-zero prefix length of each factor row.
    row_len: Vec<usize>,
    /// Row i of the factor extends row i−1 by one entry (Brownian-path
    /// structure), so `(Lz)ᵢ = (Lz)ᵢ₋₁ + L[i,i] zᵢ`.
    cumulative: bool,
    log_drift: Vec<f64>,
    weights: Vec<f64>,
}

impl BasketSampler {
    fn new(spec: &BasketSpec, factor: &DMatrix<f64>) -> Self {
        let n = spec.len();
        let cols = factor.ncols();
        let mut data = vec![0.0; n * cols];
        let mut row_len = vec![0; n];
        for i in 0..n {
            for c in 0..cols {
                data[i * cols + c] = factor[(i, c)];
                if factor[(i, c)] != 0.0 {
                    row_len[i] = c + 1;
                }
            }
        }
        let cumulative = cols == n && is_cumulative(factor);
        let v = spec.covariance();
        let log_drift = (0..n).map(|i| spec.forwards()[i].ln() - 0.5 * v[(i, i)]).collect();
        Self { n, cols, factor: data, row_len, cumulative, log_drift, weights: spec.weights().to_vec() }
    }

    #[inline]
    fn basket(&self, z: &[f64]) -> f64 {
        let mut total = 0.0;
        if self.cumulative {
            let mut y = 0.0;
            for i in 0..self.n {
                y += self.factor[i * self.cols + i] * z[i];
                total += self.weights[i] * (self.log_drift[i] + y).exp();
            }
        } else {
            for i in 0..self.n {
                let row = &self.factor[i * self.cols..i * self.cols + self.row_len[i]];
                let y: f64 = row.iter().zip(z).map(|(l, z)| l * z).sum();
                total += self.weights[i] * (self.log_drift[i] + y).exp();
            }
        }
        total
    }
}

fn is_cumulative(l: &DMatrix<f64>) -> bool {
    let n = l.nrows();
    let scale = l.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-13 * scale.max(f64::MIN_POSITIVE);
    (1..n).all(|i| (0..i).all(|k| (l[(i, k)] - l[(i - 1, k)]).abs() <= tol))
        && (0..n).all(|i| (i + 1..n).all(|k| l[(i, k)] == 0.0))
}

struct Payoffs<'a> {
    strikes: &'a [f64],
    eta: f64,
    discount: f64,
}

impl Payoffs<'_> {
    #[inline]
    fn value(&self, basket: f64, strike: f64) -> f64 {
        self.discount * (self.eta * (basket - strike)).max(0.0)
    }
}

/// Price at the spec's own strike.
pub fn price_mc(spec: &BasketSpec, cfg: &McConfig) -> Result<PriceResult> {
    let mut results = price_mc_strikes(spec, &[spec.strike()], cfg)?;
    Ok(results.remove(0))
}

/// Prices the spec at several strikes on one set of paths.
pub fn price_mc_strikes(spec: &BasketSpec, strikes: &[f64], cfg: &McConfig) -> Result<Vec<PriceResult>> {
    cfg.validate()?;
    let payoffs = Payoffs { strikes, eta: spec.kind().sign(), discount: spec.discount() };
    let mut warnings = Vec::new();

    let mut sampler = cfg.sampler;
    let factor = match sampler {
        Sampler::Pseudorandom => factor_psd(spec.covariance())?,
        Sampler::Sobol => {
            let f = spectral_factor(spec.covariance())?;
            if f.ncols() > MAX_DIMENSION {
                warnings.push(format!(
                    "dimension {} exceeds the Sobol table ({MAX_DIMENSION}); using pseudorandom draws",
                    f.ncols()
                ));
                sampler = Sampler::Pseudorandom;
                factor_psd(spec.covariance())?
            } else {
                f
            }
        }
    };
    let basket = BasketSampler::new(spec, &factor);

    let estimates = if basket.cols == 0 {
        let value = basket.basket(&[]);
        strikes.iter().map(|&k| (payoffs.value(value, k), 0.0)).collect()
    } else {
        match sampler {
            Sampler::Pseudorandom => run_pseudorandom(&basket, &payoffs, cfg),
            Sampler::Sobol => run_sobol(&basket, &payoffs, cfg),
        }
    };

    Ok(estimates
        .into_iter()
        .zip(strikes)
        .map(|((price, se), &k)| PriceResult {
            price,
            std_error: Some(se),
            diagnostics: Diagnostics {
                basket_forward: spec.basket_forward(),
                normalized_strike: k / spec.basket_forward(),
                warnings: warnings.clone(),
                ..Diagnostics::default()
            },
        })
        .collect())
}

fn blocks(total: usize, block_size: usize) -> Vec<(usize, usize)> {
    (0..total.div_ceil(block_size))
        .map(|b| {
            let start = b * block_size;
            (start, block_size.min(total - start))
        })
        .collect()
}

fn merge_in_order(parts: Vec<Vec<Moments>>, width: usize) -> Vec<Moments> {
    let mut total = vec![Moments::default(); width];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    total
}

/// One sample per draw (or per antithetic pair), accumulated for every strike.
#[inline]
fn accumulate(basket: &BasketSampler, payoffs: &Payoffs, z: &mut [f64], antithetic: bool, acc: &mut [Moments]) {
    let up = basket.basket(z);
    if antithetic {
        z.iter_mut().for_each(|x| *x = -*x);
        let down = basket.basket(z);
        for (m, &k) in acc.iter_mut().zip(payoffs.strikes) {
            m.push(0.5 * (payoffs.value(up, k) + payoffs.value(down, k)));
        }
    } else {
        for (m, &k) in acc.iter_mut().zip(payoffs.strikes) {
            m.push(payoffs.value(up, k));
        }
    }
}

fn run_pseudorandom(basket: &BasketSampler, payoffs: &Payoffs, cfg: &McConfig) -> Vec<(f64, f64)> {
    let samples = if cfg.antithetic { cfg.paths / 2 } else { cfg.paths };
    let width = payoffs.strikes.len();
    let parts: Vec<Vec<Moments>> = blocks(samples, cfg.block_size)
        .into_par_iter()
        .enumerate()
        .map(|(b, (_, len))| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(b as u64);
            let mut z = vec![0.0; basket.cols];
            let mut acc = vec![Moments::default(); width];
            for _ in 0..len {
                z.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
                accumulate(basket, payoffs, &mut z, cfg.antithetic, &mut acc);
            }
            acc
        })
        .collect();
    merge_in_order(parts, width).iter().map(|m| (m.mean, (m.variance() / m.count).sqrt())).collect()
}

fn run_sobol(basket: &BasketSampler, payoffs: &Payoffs, cfg: &McConfig) -> Vec<(f64, f64)> {
    let dims = basket.cols;
    let table = SobolDirections::new(dims);
    let per_replicate = if cfg.antithetic { cfg.paths / (2 * cfg.replicates) } else { cfg.paths / cfg.replicates };
    let width = payoffs.strikes.len();

    let randomized: Vec<(SobolDirections, Vec<u64>)> = (0..cfg.replicates)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream((1u64 << 40) + r as u64);
            let scrambled = table.scrambled(&mut rng);
            let shift = (0..dims).map(|_| rand::Rng::random::<u64>(&mut rng)).collect();
            (scrambled, shift)
        })
        .collect();

    let jobs: Vec<(usize, usize, usize)> = (0..cfg.replicates)
        .flat_map(|r| blocks(per_replicate, cfg.block_size).into_iter().map(move |(s, l)| (r, s, l)))
        .collect();
    let parts: Vec<(usize, Vec<Moments>)> = jobs
        .into_par_iter()
        .map(|(r, start, len)| {
            let (dirs, shift) = &randomized[r];
            let mut cursor = dirs.cursor(start as u64, shift);
            let mut u = vec![0.0; dims];
            let mut z = vec![0.0; dims];
            let mut acc = vec![Moments::default(); width];
            for _ in 0..len {
                cursor.next_into(&mut u);
                for (zi, &ui) in z.iter_mut().zip(&u) {
                    *zi = norm_inv_cdf(ui);
                }
                accumulate(basket, payoffs, &mut z, cfg.antithetic, &mut acc);
            }
            (r, acc)
        })
        .collect();

    let mut per_rep = vec![vec![Moments::default(); width]; cfg.replicates];
    for (r, acc) in &parts {
        for (t, p) in per_rep[*r].iter_mut().zip(acc) {
            t.merge(p);
        }
    }
    (0..width)
        .map(|k| {
            let mut across = Moments::default();
            for rep in &per_rep {
                across.push(rep[k].mean);
            }
            (across.mean, (across.variance() / across.count).sqrt())
        })
        .collect()
}
