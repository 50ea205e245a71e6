//! Scalar abstraction shared by the exact and floating-point layers.
//!
//! Polynomials, polyhedral cones, the simplex solver and the appendix model
//! are generic over [`Scalar`]. Exact rationals compare exactly; floats compare
//! against a per-type tolerance.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// A real scalar: `f32`, `f64` or [`BigRational`].
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// True when the type carries exact arithmetic.
    const EXACT: bool;

    /// Absolute tolerance used by [`Scalar::is_negligible`]. Zero for exact types.
    fn tolerance() -> Self;

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    /// `self > 0` beyond tolerance.
    fn is_strictly_positive(&self) -> bool {
        *self > Self::tolerance()
    }

    /// `self < 0` beyond tolerance.
    fn is_strictly_negative(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_rational(q: &BigRational) -> Self;

    /// Exact rational value. Floats convert bit-exactly; non-finite floats give `None`.
    fn to_rational(&self) -> Option<BigRational>;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-12
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn tolerance() -> Self {
        1e-6
    }

    fn from_rational(q: &BigRational) -> Self {
        q.to_f32().unwrap_or(f32::NAN)
    }

    fn to_rational(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn from_rational(q: &BigRational) -> Self {
        q.clone()
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }
}

/// First continued-fraction convergent of `x` within `tol` of it, if one has
/// denominator at most `max_den`; otherwise [`rationalize`].
pub fn rationalize_within(x: f64, tol: f64, max_den: u64) -> Option<BigRational> {
    let exact = BigRational::from_float(x)?;
    let tol = BigRational::from_float(tol)?;
    let max = BigInt::from(max_den);
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > max {
            return rationalize(x, max_den);
        }
        let conv = BigRational::new(h2.clone(), k2.clone());
        if (&conv - &exact).abs() <= tol {
            return Some(conv);
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Some(BigRational::new(h1, k1));
        }
        rest = frac.recip();
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// by continued-fraction convergents (with the final semiconvergent).
pub fn rationalize(x: f64, max_den: u64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let exact = BigRational::from_float(x)?;
    if exact.denom() <= &BigInt::from(max_den) {
        return Some(exact);
    }
    let max_den = BigInt::from(max_den);
    // convergents h/k
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    loop {
        let a = rest.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        if k2 > max_den {
            // largest semiconvergent that still fits
            let t = (&max_den - &k0) / &k1;
            let hs = &t * &h1 + &h0;
            let ks = &t * &k1 + &k0;
            let conv = BigRational::new(h1.clone(), k1.clone());
            if ks.is_zero() {
                return Some(conv);
            }
            let semi = BigRational::new(hs, ks);
            let dc = (&conv - &exact).abs();
            let ds = (&semi - &exact).abs();
            return Some(if ds < dc { semi } else { conv });
        }
        h0 = std::mem::replace(&mut h1, h2);
        k0 = std::mem::replace(&mut k1, k2);
        let frac = &rest - BigRational::from_integer(a);
        if frac.is_zero() {
            return Some(BigRational::new(h1, k1));
        }
        rest = frac.recip();
    }
}

/// Parses `"3"`, `"-3/4"` or a decimal literal such as `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str_radix(n.trim(), 10).ok()?;
        let d = BigInt::from_str_radix(d.trim(), 10).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str_radix(int, 10).ok()?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_val = BigInt::from_str_radix(frac, 10).ok()?;
        let mag = int_part.abs() * &scale + frac_val;
        let num = if negative { -mag } else { mag };
        return Some(BigRational::new(num, scale));
    }
    BigInt::from_str_radix(text, 10).ok().map(BigRational::from_integer)
}
