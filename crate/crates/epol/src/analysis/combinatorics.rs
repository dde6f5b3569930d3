//! Exact rational building blocks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Binomial coefficient `C(n, k)` as a big integer; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// An exact probability: a rational guaranteed to lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Probability(BigRational);

impl Probability {
    pub fn new(value: BigRational) -> Result<Self> {
        if value < BigRational::zero() || value > BigRational::one() {
            return Err(Error::InvalidParameter(format!(
                "probability {value} outside [0,1]"
            )));
        }
        Ok(Probability(value))
    }

    pub fn zero() -> Self {
        Probability(BigRational::zero())
    }

    pub fn one() -> Self {
        Probability(BigRational::one())
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering with 12 significant digits.
    pub fn to_decimal(&self) -> String {
        render_decimal(&self.0, 12)
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

/// Render a rational with `sig` significant digits, round-half-up.
pub fn render_decimal(value: &BigRational, sig: usize) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let negative = value.is_negative();
    let v = value.abs();
    // magnitude = floor(log10(v)), found by scaling
    let one = BigRational::one();
    let ten = BigRational::from(BigInt::from(10));
    let mut mag: i64 = 0;
    let mut scaled = v.clone();
    while scaled >= ten {
        scaled /= ten.clone();
        mag += 1;
    }
    while scaled < one {
        scaled *= ten.clone();
        mag -= 1;
    }
    // digits = round(v * 10^(sig-1-mag))
    let shift = sig as i64 - 1 - mag;
    let factor = pow10(shift);
    let shifted = v * factor;
    let rounded = shifted.round().to_integer();
    let digits = rounded.to_string();
    // mag may bump if rounding overflowed (e.g. 0.99995 -> 1.0000)
    let mag = mag + (digits.len() as i64 - sig as i64);
    let digits = if digits.len() > sig {
        digits[..sig].to_string()
    } else {
        digits
    };
    let sign = if negative { "-" } else { "" };
    let body = if mag >= 0 && (mag as usize) < sig {
        let split = mag as usize + 1;
        let (int_part, frac_part) = digits.split_at(split);
        let frac = frac_part.trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    } else if (-4..0).contains(&mag) {
        let zeros = "0".repeat((-mag - 1) as usize);
        let trimmed = digits.trim_end_matches('0');
        format!("0.{zeros}{trimmed}")
    } else {
        let trimmed = digits[1..].trim_end_matches('0');
        if trimmed.is_empty() {
            format!("{}e{}", &digits[..1], mag)
        } else {
            format!("{}.{}e{}", &digits[..1], trimmed, mag)
        }
    };
    format!("{sign}{body}")
}

fn pow10(exp: i64) -> BigRational {
    let base = BigInt::from(10);
    if exp >= 0 {
        BigRational::from(base.pow(exp as u32))
    } else {
        BigRational::new(BigInt::one(), base.pow((-exp) as u32))
    }
}

/// Parse a decimal string (`"0.05"`, `"1"`, `"3/20"`) into an exact rational.
pub fn rational_from_decimal(text: &str) -> Result<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad numerator: {e}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad denominator: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(BigRational::new(n, d));
    }
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    let negative = int_part.starts_with('-');
    let int_digits = int_part.trim_start_matches(['-', '+']);
    if !int_digits.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(Error::Parse(format!("not a decimal number: {text:?}")));
    }
    if int_digits.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("not a decimal number: {text:?}")));
    }
    let joined = format!("{int_digits}{frac_part}");
    let numerator: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().unwrap()
    };
    let numerator = if negative { -numerator } else { numerator };
    let denominator = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(BigRational::new(numerator, denominator))
}
