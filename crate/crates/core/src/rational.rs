//! Exact rational scalars.
//!
//! [`Rat`] wraps an arbitrary-precision `BigRational` and keeps it in
//! canonical form (positive denominator, reduced) after every operation.
//! Division is only available through [`Rat::checked_div`] and friends so a
//! zero divisor always surfaces as an error.

use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::NumericsError;

/// Arbitrary-precision exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        Rat(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `num/den`, reducing to canonical form.
    pub fn new(num: i64, den: i64) -> Result<Self, NumericsError> {
        Self::from_bigints(BigInt::from(num), BigInt::from(den))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, NumericsError> {
        if den.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Rat(BigRational::new(num, den)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self, NumericsError> {
        if self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Rat(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rat) -> Result<Self, NumericsError> {
        if rhs.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        Ok(Rat(&self.0 / &rhs.0))
    }

    /// Integer power; negative exponents invert the base.
    pub fn pow(&self, exp: i64) -> Result<Self, NumericsError> {
        if exp < 0 && self.is_zero() {
            return Err(NumericsError::DivisionByZero);
        }
        let e = i32::try_from(exp).map_err(|_| NumericsError::ExponentOverflow(exp))?;
        Ok(Rat(num_traits::Pow::pow(&self.0, e)))
    }

    /// Nearest `f64`. Very large or small magnitudes saturate to
    /// infinity or zero.
    pub fn to_f64(&self) -> f64 {
        if let Some(v) = self.0.to_f64() {
            return v;
        }
        // Fall back to a ratio of scaled integers when the direct
        // conversion gives up.
        let n = self.numer().bits() as i64;
        let d = self.denom().bits() as i64;
        let shift = n - d;
        let scaled = if shift > 0 {
            BigRational::new(self.numer().clone(), self.denom() << shift as usize)
        } else {
            BigRational::new(self.numer() << (-shift) as usize, self.denom().clone())
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Self {
        Rat::from_integer(n)
    }
}

impl From<BigRational> for Rat {
    fn from(r: BigRational) -> Self {
        Rat(r)
    }
}

impl fmt::Display for Rat {
    /// Always `p/q` with `q > 0`, including integers (`3/1`).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rat({self})")
    }
}

fn parse_int(text: &str, original: &str) -> Result<BigInt, NumericsError> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(NumericsError::Parse(original.to_string()));
    }
    text.parse::<BigInt>()
        .map_err(|_| NumericsError::Parse(original.to_string()))
}

impl FromStr for Rat {
    type Err = NumericsError;

    /// Accepts `int`, `int/int`, or an exact decimal `[-]d.ddd`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num = parse_int(num.trim(), s)?;
            let den = parse_int(den.trim(), s)?;
            return Rat::from_bigints(num, den);
        }
        if let Some((int_part, frac_part)) = text.split_once('.') {
            let negative = int_part.starts_with('-');
            let int_digits = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
            if (int_digits.is_empty() && frac_part.is_empty())
                || !int_digits.bytes().all(|b| b.is_ascii_digit())
                || !frac_part.bytes().all(|b| b.is_ascii_digit())
            {
                return Err(NumericsError::Parse(s.to_string()));
            }
            let mut all = String::with_capacity(int_digits.len() + frac_part.len());
            all.push_str(int_digits);
            all.push_str(frac_part);
            if all.is_empty() {
                return Err(NumericsError::Parse(s.to_string()));
            }
            let mut num: BigInt = all.parse().map_err(|_| NumericsError::Parse(s.to_string()))?;
            if negative {
                num = -num;
            }
            let den = num_traits::pow(BigInt::from(10), frac_part.len());
            return Rat::from_bigints(num, den);
        }
        Ok(Rat(BigRational::from_integer(parse_int(text, s)?)))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $assign_tr:ident, $assign_method:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $method(self, rhs: &Rat) -> Rat {
                Rat($tr::$method(self.0, &rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $method(self, rhs: Rat) -> Rat {
                Rat($tr::$method(&self.0, rhs.0))
            }
        }
        impl $assign_tr<&Rat> for Rat {
            fn $assign_method(&mut self, rhs: &Rat) {
                $assign_tr::$assign_method(&mut self.0, &rhs.0);
            }
        }
        impl $assign_tr<Rat> for Rat {
            fn $assign_method(&mut self, rhs: Rat) {
                $assign_tr::$assign_method(&mut self.0, rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign);
forward_binop!(Sub, sub, SubAssign, sub_assign);
forward_binop!(Mul, mul, MulAssign, mul_assign);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Self {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Self {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl Product for Rat {
    fn product<I: Iterator<Item = Rat>>(iter: I) -> Self {
        iter.fold(Rat::one(), |acc, x| acc * x)
    }
}

/// Least common multiple of the denominators of `values`.
pub(crate) fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n, d).unwrap()
    }

    #[test]
    fn parses_fraction_forms() {
        assert_eq!("5/6".parse::<Rat>().unwrap(), r(5, 6));
        assert_eq!("-1/6".parse::<Rat>().unwrap(), r(-1, 6));
        assert_eq!("0.25".parse::<Rat>().unwrap(), r(1, 4));
        assert_eq!("-0.125".parse::<Rat>().unwrap(), r(-1, 8));
        assert_eq!("42".parse::<Rat>().unwrap(), r(42, 1));
        assert_eq!("10/-4".parse::<Rat>().unwrap(), r(-5, 2));
        assert_eq!(".5".parse::<Rat>().unwrap(), r(1, 2));
    }

    #[test]
    fn rejects_malformed_text() {
        for bad in ["", "abc", "1/", "/2", "1.2.3", "1e5", "--1", ".", "1/2/3", "0x10"] {
            assert!(matches!(bad.parse::<Rat>(), Err(NumericsError::Parse(_))), "{bad}");
        }
        assert_eq!("3/0".parse::<Rat>(), Err(NumericsError::DivisionByZero));
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(r(10, -4).to_string(), "-5/2");
        assert_eq!(r(3, 1).to_string(), "3/1");
        assert_eq!(Rat::zero().to_string(), "0/1");
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(r(1, 2).checked_div(&Rat::zero()), Err(NumericsError::DivisionByZero));
        assert_eq!(Rat::zero().recip(), Err(NumericsError::DivisionByZero));
        assert_eq!(Rat::zero().pow(-1), Err(NumericsError::DivisionByZero));
    }

    #[test]
    fn negative_powers_invert() {
        assert_eq!(r(2, 7).pow(-2).unwrap(), r(49, 4));
        assert_eq!(r(-3, 2).pow(3).unwrap(), r(-27, 8));
        assert_eq!(r(5, 9).pow(0).unwrap(), Rat::one());
    }

    #[test]
    fn to_f64_handles_huge_parts() {
        let big = r(7, 2).pow(900).unwrap() * r(2, 7).pow(899).unwrap();
        assert!((big.to_f64() - 3.5).abs() < 1e-12);
        let ratio = Rat::from_bigints(
            num_traits::pow(BigInt::from(10), 400) * 3,
            num_traits::pow(BigInt::from(10), 400) * 4,
        )
        .unwrap();
        assert_eq!(ratio.to_f64(), 0.75);
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-1000i64..1000, 1i64..500).prop_map(|(n, d)| r(n, d))
    }

    proptest! {
        #[test]
        fn add_sub_roundtrip(a in arb_rat(), b in arb_rat()) {
            prop_assert_eq!(&(&a + &b) - &b, a);
        }

        #[test]
        fn mul_div_roundtrip(a in arb_rat(), b in arb_rat()) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).checked_div(&b).unwrap(), a);
        }

        #[test]
        fn always_canonical(a in arb_rat(), b in arb_rat()) {
            let c = &a * &b + &a - &b;
            prop_assert!(c.denom() > &BigInt::zero());
            prop_assert!(c.numer().gcd(c.denom()).is_one());
        }

        #[test]
        fn display_parses_back(a in arb_rat()) {
            prop_assert_eq!(a.to_string().parse::<Rat>().unwrap(), a);
        }
    }
}
