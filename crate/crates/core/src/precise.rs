//! Unevaluated double-double reals and compensated integer dot products.
//!
//! Direction vectors arrive as decimal strings. Each component is held as
//! `hi + lo` where `hi` is the correctly rounded `f64` and `lo` the rounded
//! residual, so roughly 32 significant digits survive. Small divisors
//! `n·α` are then evaluated with the Ogita–Rump–Oishi `Dot2` scheme, which
//! delivers a result as accurate as if computed in twice the working
//! precision. This matters for Liouville directions, where `n·α` can be
//! eighteen orders of magnitude below `|n|`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A real number stored as an unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreciseReal {
    pub hi: f64,
    pub lo: f64,
}

impl PreciseReal {
    pub fn from_f64(x: f64) -> Self {
        PreciseReal { hi: x, lo: 0.0 }
    }

    /// Parses a decimal literal (`-1.25`, `3e-7`, `0.110001`) exactly and
    /// rounds it to double-double.
    pub fn from_decimal(s: &str) -> Result<Self> {
        let exact = parse_decimal_exact(s)?;
        Ok(Self::from_rational(&exact))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        let hi = rational_to_f64(r);
        let rest = r - BigRational::from_float(hi).unwrap_or_else(BigRational::zero);
        let lo = rational_to_f64(&rest);
        PreciseReal { hi, lo }
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

impl FromStr for PreciseReal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::from_decimal(s)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // Ratio<BigInt>::to_f64 is correctly rounded for in-range values.
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a decimal literal.
pub fn parse_decimal_exact(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = t[i + 1..].parse().map_err(|_| bad())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(i) => (&digits[..i], &digits[i + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(&all_digits).map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 4000 {
        return Err(bad());
    }
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

/// `10^(-exponent)` as an exact rational.
pub fn ten_to_minus(exponent: u32) -> BigRational {
    BigRational::new(
        BigInt::one(),
        num_traits::pow(BigInt::from(10u32), exponent as usize),
    )
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated `Σ n_j (hi_j + lo_j)`.
///
/// Integer entries must stay below 2^53 in magnitude so they convert to
/// `f64` exactly.
pub fn dot_int(n: &[i64], comps: &[PreciseReal]) -> f64 {
    debug_assert_eq!(n.len(), comps.len());
    let mut s = 0.0;
    let mut c = 0.0;
    for (&k, a) in n.iter().zip(comps) {
        if k == 0 {
            continue;
        }
        let kf = k as f64;
        let (p, e) = two_prod(kf, a.hi);
        let (s2, e2) = two_sum(s, p);
        s = s2;
        c += e + e2 + kf * a.lo;
    }
    s + c
}

/// Cheap approximation of `n·α` together with a bound on its error, used to
/// decide when the compensated routine is needed.
#[inline]
pub fn dot_int_fast(n: &[i64], comps: &[PreciseReal]) -> (f64, f64) {
    let mut s = 0.0;
    let mut mag = 0.0;
    let mut tail = 0.0;
    for (&k, a) in n.iter().zip(comps) {
        let kf = k as f64;
        let p = kf * a.hi;
        s += p;
        mag += p.abs();
        tail += (kf * a.lo).abs();
    }
    let bound = (n.len() as f64 + 1.0) * f64::EPSILON * mag + tail;
    (s, bound)
}

/// `(x + t·a) mod 1` evaluated with the product `t·a` kept to double-double.
pub fn affine_mod1(x: f64, t: f64, a: PreciseReal) -> f64 {
    let (p, e) = two_prod(t, a.hi);
    let (s, e2) = two_sum(x, p);
    let whole = s.floor();
    let r = (s - whole) + (e + e2 + t * a.lo);
    wrap_unit(r)
}

/// Reduces a real into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Signed distance from `x` to the nearest integer, in `[-1/2, 1/2]`.
pub fn circle_offset(x: f64) -> f64 {
    x - x.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_parse_is_exact() {
        let r = parse_decimal_exact("0.110001").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(110001), BigInt::from(1_000_000)));
        let r = parse_decimal_exact("-2.5e-3").unwrap();
        assert_eq!(r, BigRational::new(BigInt::from(-1), BigInt::from(400)));
        assert!(parse_decimal_exact("1.2.3").is_err());
        assert!(parse_decimal_exact("").is_err());
        assert!(parse_decimal_exact("abc").is_err());
        assert!(parse_decimal_exact(".").is_err());
    }

    #[test]
    fn double_double_keeps_the_residual() {
        let x = PreciseReal::from_decimal("0.1").unwrap();
        assert_eq!(x.hi, 0.1);
        // 0.1 - fl(0.1) = -5.551115123125783e-18
        assert!((x.lo + 5.551115123125783e-18).abs() < 1e-30);
        let n = [1i64, -10];
        let comps = [PreciseReal::from_f64(1.0), x];
        assert!(dot_int(&n, &comps).abs() < 1e-30);
    }

    #[test]
    fn tiny_liouville_tail_survives() {
        let lam = PreciseReal::from_decimal("0.110001000000000000000001").unwrap();
        let one = PreciseReal::from_f64(1.0);
        // 10^6 λ - 110001 = 1e-18
        let v = dot_int(&[110001, -1_000_000], &[one, lam]);
        assert!((v + 1e-18).abs() < 1e-26, "{v}");
    }

    #[test]
    fn affine_mod1_matches_reduction() {
        let phi = PreciseReal::from_decimal("1.6180339887498948482045868343656381177203").unwrap();
        let y = affine_mod1(0.0, 2.0, phi);
        assert!((y - 0.236_067_977_499_789_7).abs() < 1e-16);
        assert_eq!(wrap_unit(-0.25), 0.75);
        assert_eq!(wrap_unit(-1e-20), 0.0);
    }
}
