//! Arithmetic modes.
//!
//! Every combinatorial quantity in this crate is generic over [`Scalar`], which is
//! implemented for `f64` (fast, used by the large-N companions) and for
//! [`BigRational`] (exact, used by every identity check).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::Error;

/// Absolute tolerance used when a float-mode quantity must equal a known value.
pub const FLOAT_TOLERANCE: f64 = 1e-10;

/// Which number system a computation runs in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArithmeticMode {
    #[default]
    Rational,
    Float,
}

impl fmt::Display for ArithmeticMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticMode::Rational => f.write_str("rational"),
            ArithmeticMode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for ArithmeticMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rational" | "exact" => Ok(ArithmeticMode::Rational),
            "float" | "f64" => Ok(ArithmeticMode::Float),
            other => Err(Error::Parse(format!("unknown arithmetic mode `{other}`"))),
        }
    }
}

/// A field element usable by the symmetric-function code.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: ArithmeticMode;

    fn from_u64(v: u64) -> Self;
    fn from_biguint(v: &BigUint) -> Self;
    /// Exact conversion for rationals (every finite double is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;

    /// Equality up to the mode's tolerance; exact for rationals.
    fn approx_eq(&self, other: &Self) -> bool;

    /// Determinant of a square matrix given as rows.
    fn determinant(rows: Vec<Vec<Self>>) -> Self;

    fn powu(&self, exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for f64 {
    const MODE: ArithmeticMode = ArithmeticMode::Float;

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn from_biguint(v: &BigUint) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        let scale = 1.0_f64.max(f64::abs(*self)).max(f64::abs(*other));
        (self - other).abs() <= FLOAT_TOLERANCE * scale
    }

    fn determinant(mut rows: Vec<Vec<Self>>) -> Self {
        let n = rows.len();
        let mut det = 1.0;
        for k in 0..n {
            let pivot = (k..n)
                .max_by(|&a, &b| rows[a][k].abs().total_cmp(&rows[b][k].abs()))
                .expect("non-empty pivot range");
            if rows[pivot][k] == 0.0 {
                return 0.0;
            }
            if pivot != k {
                rows.swap(pivot, k);
                det = -det;
            }
            let p = rows[k][k];
            det *= p;
            for i in (k + 1)..n {
                let factor = rows[i][k] / p;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        rows[i][j] -= factor * rows[k][j];
                    }
                }
            }
        }
        det
    }
}

impl Scalar for BigRational {
    const MODE: ArithmeticMode = ArithmeticMode::Rational;

    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_biguint(v: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from_biguint(Sign::Plus, v.clone()))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }

    fn determinant(rows: Vec<Vec<Self>>) -> Self {
        // Clear denominators row by row, run fraction-free elimination over the
        // integers, then undo the scaling.
        let mut scale = BigInt::one();
        let int_rows: Vec<Vec<BigInt>> = rows
            .into_iter()
            .map(|row| {
                let lcm = row
                    .iter()
                    .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                scale *= &lcm;
                row.into_iter()
                    .map(|x| x.numer() * (&lcm / x.denom()))
                    .collect()
            })
            .collect();
        BigRational::new(bareiss(int_rows), scale)
    }
}

/// Fraction-free Gaussian elimination; every division is exact.
pub fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match ((k + 1)..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// Correctly rounded enough for reporting: scales so both parts fit in a double.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nbits = x.numer().bits() as i64;
    let dbits = x.denom().bits() as i64;
    let shift = nbits - dbits - 60;
    let (num, den) = if shift > 0 {
        (x.numer().clone(), x.denom() << (shift as usize))
    } else {
        (x.numer() << ((-shift) as usize), x.denom().clone())
    };
    let q = num / den;
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
}

/// Parses `a/b`, integers and plain or scientific decimals exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse `{s}` as a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| bad())?;
    if neg {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Parses a number into the requested scalar type; rationals are parsed exactly.
pub trait ParseScalar: Scalar {
    fn parse_scalar(s: &str) -> Result<Self, Error>;
}

impl ParseScalar for f64 {
    fn parse_scalar(s: &str) -> Result<Self, Error> {
        if s.contains('/') {
            return parse_rational(s).map(|r| rational_to_f64(&r));
        }
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("cannot parse `{s}` as a number")))
    }
}

impl ParseScalar for BigRational {
    fn parse_scalar(s: &str) -> Result<Self, Error> {
        parse_rational(s)
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bareiss_matches_float_elimination() {
        let rows = vec![
            vec![ratio(2, 3), ratio(1, 5), ratio(-1, 1)],
            vec![ratio(1, 2), ratio(3, 7), ratio(4, 9)],
            vec![ratio(0, 1), ratio(5, 2), ratio(1, 3)],
        ];
        let float_rows: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(Scalar::to_f64).collect())
            .collect();
        let exact = BigRational::determinant(rows);
        let approx = f64::determinant(float_rows);
        assert!((Scalar::to_f64(&exact) - approx).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_has_zero_determinant() {
        let rows = vec![vec![ratio(1, 2), ratio(1, 3)], vec![ratio(1, 1), ratio(2, 3)]];
        assert!(BigRational::determinant(rows).is_zero());
        assert_eq!(f64::determinant(vec![vec![0.0, 0.0], vec![1.0, 2.0]]), 0.0);
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_rational("0.68").unwrap(), ratio(17, 25));
        assert_eq!(parse_rational("1/3").unwrap(), ratio(1, 3));
        assert_eq!(parse_rational("-2.5e-1").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), ratio(3, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = BigInt::from(3u32).pow(900);
        let x = BigRational::new(big.clone() + 1u32, big);
        assert!((rational_to_f64(&x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integer_power() {
        assert_eq!(ratio(1, 2).powu(10), ratio(1, 1024));
        assert_eq!(3.0f64.powu(0), 1.0);
    }
}
