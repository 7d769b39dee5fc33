//! Black-76 price and its first three strike derivatives.

use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{invalid, PricingError, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal cumulative distribution.
#[inline]
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Inverse of [`norm_cdf`] on `(0, 1)`, about 1e-11 relative in the tails.
#[inline]
pub fn norm_inv_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Call or put.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    /// `+1` for a call, `-1` for a put.
    pub fn sign(self) -> f64 {
        match self {
            OptionKind::Call => 1.0,
            OptionKind::Put => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            OptionKind::Call => OptionKind::Put,
            OptionKind::Put => OptionKind::Call,
        }
    }
}

/// Inputs to the Black-76 formula. `variance` is the total variance to
/// maturity; `maturity` is carried along but does not enter the formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackArgs {
    pub forward: f64,
    pub strike: f64,
    pub variance: f64,
    pub maturity: f64,
    pub discount: f64,
    pub kind: OptionKind,
}

impl BlackArgs {
    fn validate(&self) -> Result<()> {
        if !(self.forward > 0.0) || !self.forward.is_finite() {
            return Err(invalid(format!("forward must be positive, got {}", self.forward)));
        }
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(invalid(format!("strike must be positive, got {}", self.strike)));
        }
        if !(self.variance >= 0.0) || !self.variance.is_finite() {
            return Err(invalid(format!("variance must be non-negative, got {}", self.variance)));
        }
        Ok(())
    }

    fn kernel(&self) -> StrikeKernel {
        StrikeKernel::new(self.strike, self.variance, self.discount, self.kind)
    }
}

/// Black-76 price `ηB[FΦ(ηd₁) − KΦ(ηd₂)]`, intrinsic value when `v = 0`.
pub fn black(args: &BlackArgs) -> Result<f64> {
    args.validate()?;
    let eta = args.kind.sign();
    if args.variance == 0.0 {
        return Ok(args.discount * (eta * (args.forward - args.strike)).max(0.0));
    }
    Ok(args.kernel().price(args.forward.ln()))
}

/// First strike derivative `−ηBΦ(ηd₂)`.
pub fn black_dk(args: &BlackArgs) -> Result<f64> {
    args.validate()?;
    let eta = args.kind.sign();
    if args.variance == 0.0 {
        let itm = eta * (args.forward - args.strike);
        let prob = if itm > 0.0 {
            1.0
        } else if itm < 0.0 {
            0.0
        } else {
            0.5
        };
        return Ok(-eta * args.discount * prob);
    }
    Ok(args.kernel().dk(args.forward.ln()))
}

/// Second strike derivative `Bφ(d₂)/(K√v)`.
pub fn black_d2k(args: &BlackArgs) -> Result<f64> {
    args.validate()?;
    if args.variance == 0.0 {
        return Err(PricingError::DerivativeUndefined { order: 2 });
    }
    Ok(args.kernel().d2k(args.forward.ln()))
}

/// Third strike derivative `Bφ(d₂)/(K²√v) · (d₂/√v − 1)`.
pub fn black_d3k(args: &BlackArgs) -> Result<f64> {
    args.validate()?;
    if args.variance == 0.0 {
        return Err(PricingError::DerivativeUndefined { order: 3 });
    }
    Ok(args.kernel().d3k(args.forward.ln()))
}

/// Black-76 evaluated at a fixed strike and variance for many forwards,
/// addressed by log-forward. Requires `variance > 0` and `strike > 0`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StrikeKernel {
    strike: f64,
    ln_strike: f64,
    std_dev: f64,
    discount: f64,
    eta: f64,
}

impl StrikeKernel {
    pub(crate) fn new(strike: f64, variance: f64, discount: f64, kind: OptionKind) -> Self {
        Self { strike, ln_strike: strike.ln(), std_dev: variance.sqrt(), discount, eta: kind.sign() }
    }

    #[inline]
    fn d2(&self, ln_forward: f64) -> f64 {
        (ln_forward - self.ln_strike) / self.std_dev - 0.5 * self.std_dev
    }

    pub(crate) fn price(&self, ln_forward: f64) -> f64 {
        let d2 = self.d2(ln_forward);
        let d1 = d2 + self.std_dev;
        let eta = self.eta;
        eta * self.discount * (ln_forward.exp() * norm_cdf(eta * d1) - self.strike * norm_cdf(eta * d2))
    }

    #[inline]
    pub(crate) fn dk(&self, ln_forward: f64) -> f64 {
        -self.eta * self.discount * norm_cdf(self.eta * self.d2(ln_forward))
    }

    #[inline]
    pub(crate) fn d2k(&self, ln_forward: f64) -> f64 {
        self.discount * norm_pdf(self.d2(ln_forward)) / (self.strike * self.std_dev)
    }

    #[inline]
    pub(crate) fn d3k(&self, ln_forward: f64) -> f64 {
        let d2 = self.d2(ln_forward);
        self.discount * norm_pdf(d2) / (self.strike * self.strike * self.std_dev) * (d2 / self.std_dev - 1.0)
    }
}
