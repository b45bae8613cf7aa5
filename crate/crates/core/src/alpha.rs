//! The `∘_α` operator product.
//!
//! `X ∘_α Y := αXY + (1−α)YX` interpolates between the ordinary product
//! (`α = 1`), the reversed product (`α = 0`) and the Jordan product
//! (`α = ½`). Writing `α = s + it` splits it into `X ∘_s Y + it[X, Y]`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, CMatrix};

/// A finite complex parameter `α = s + it`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Complex64", into = "Complex64")]
pub struct AlphaParam(Complex64);

impl AlphaParam {
    /// `α = ½`, the real symmetric choice.
    pub const HALF: AlphaParam = AlphaParam(Complex64::new(0.5, 0.0));
    pub const ONE: AlphaParam = AlphaParam(Complex64::new(1.0, 0.0));
    pub const ZERO: AlphaParam = AlphaParam(Complex64::new(0.0, 0.0));

    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be finite, got {value}")));
        }
        Ok(Self(value))
    }

    pub fn real(s: f64) -> Result<Self> {
        Self::new(Complex64::new(s, 0.0))
    }

    pub fn from_parts(s: f64, t: f64) -> Result<Self> {
        Self::new(Complex64::new(s, t))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// `1 − α`
    pub fn complement(self) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.0
    }

    /// Real part `s` of `α = s + it`.
    pub fn s(self) -> f64 {
        self.0.re
    }

    /// Imaginary part `t` of `α = s + it`.
    pub fn t(self) -> f64 {
        self.0.im
    }

    /// Mixes a forward quantity with its reverse: `α·forward + (1−α)·reverse`.
    pub fn mix(self, forward: Complex64, reverse: Complex64) -> Complex64 {
        self.0 * forward + self.complement() * reverse
    }
}

impl Default for AlphaParam {
    fn default() -> Self {
        Self::HALF
    }
}

impl TryFrom<Complex64> for AlphaParam {
    type Error = Error;

    fn try_from(value: Complex64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<AlphaParam> for Complex64 {
    fn from(a: AlphaParam) -> Self {
        a.0
    }
}

impl fmt::Display for AlphaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

/// Parses `RE` or `RE,IM`.
impl FromStr for AlphaParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse alpha from {s:?}; expected RE[,IM]"));
        let mut parts = s.split(',');
        let re: f64 = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let im: f64 = match parts.next() {
            Some(p) => p.trim().parse().map_err(|_| bad())?,
            None => 0.0,
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Self::from_parts(re, im)
    }
}

fn check_square_pair(x: &CMatrix, y: &CMatrix) -> Result<()> {
    if !x.is_square() {
        return Err(Error::InvalidInput("alpha product needs square matrices".into()));
    }
    check_dim(x.nrows(), y.nrows())?;
    check_dim(x.ncols(), y.ncols())
}

/// `X ∘_α Y = αXY + (1−α)YX`
pub fn alpha_product(x: &CMatrix, y: &CMatrix, alpha: AlphaParam) -> Result<CMatrix> {
    check_square_pair(x, y)?;
    Ok(x * y * alpha.value() + y * x * alpha.complement())
}

/// `X ∘_α Y − Y ∘_α X`, which equals `(2α−1)[X, Y]`.
pub fn alpha_commut_defect(x: &CMatrix, y: &CMatrix, alpha: AlphaParam) -> Result<CMatrix> {
    Ok(alpha_product(x, y, alpha)? - alpha_product(y, x, alpha)?)
}

/// `[X, Y] = XY − YX`
pub fn commutator(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    check_square_pair(x, y)?;
    Ok(x * y - y * x)
}
