use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LinalgError;

/// Exact rational number in lowest terms with a positive denominator.
///
/// Values whose numerator and denominator fit in an `i64` are stored inline
/// and combined with `i128` intermediates; anything larger is held as a
/// `BigRational`. The representation is canonical, so derived equality and
/// hashing agree with numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(i64, i64),
    Big(BigRational),
}

fn fits(x: i128) -> Option<i64> {
    // i64::MIN is excluded so negation never overflows
    if x > i64::MIN as i128 && x <= i64::MAX as i128 {
        Some(x as i64)
    } else {
        None
    }
}

impl Rational {
    /// Builds `n / d` from already reduced parts with `d > 0`.
    fn reduced_i128(n: i128, d: i128) -> Rational {
        match (fits(n), fits(d)) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(BigRational::new_raw(BigInt::from(n), BigInt::from(d)))),
        }
    }

    fn from_i128(n: i128, d: i128) -> Rational {
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Self::reduced_i128(n, d)
    }

    fn from_big(x: BigRational) -> Rational {
        match (x.numer().to_i64(), x.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(x)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(x) => x.clone(),
        }
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn new(numer: BigInt, denom: BigInt) -> Rational {
        Self::from_big(BigRational::new(numer, denom))
    }

    pub fn from_integer(n: BigInt) -> Rational {
        Self::from_big(BigRational::from_integer(n))
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(x) => x.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(x) => x.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(x) => x.is_integer(),
        }
    }

    /// `1 / self`; panics at zero.
    pub fn recip(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => {
                assert!(*n != 0, "reciprocal of zero");
                if *n < 0 {
                    Rational(Repr::Small(-d, -n))
                } else {
                    Rational(Repr::Small(*d, *n))
                }
            }
            Repr::Big(x) => Self::from_big(x.recip()),
        }
    }

    pub fn abs(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(n.abs(), *d)),
            Repr::Big(x) => Rational(Repr::Big(x.abs())),
        }
    }

    /// `self^e` for `e >= 0`; negative powers invert.
    pub fn pow(&self, e: i32) -> Rational {
        let base = if e < 0 { self.recip() } else { self.clone() };
        (0..e.unsigned_abs()).fold(Rational::one(), |acc, _| acc * &base)
    }

    fn add_ref(&self, other: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if b == d {
                return Self::from_i128(a + c, b);
            }
            let g = b.gcd(&d);
            return Self::from_i128(a * (d / g) + c * (b / g), b / g * d);
        }
        Self::from_big(self.to_big() + other.to_big())
    }

    fn mul_ref(&self, other: &Rational) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
            if a == 0 || c == 0 {
                return Rational::zero();
            }
            let g1 = a.gcd(&d);
            let g2 = c.gcd(&b);
            return Self::reduced_i128((a / g1) * (c / g2), (b / g2) * (d / g1));
        }
        Self::from_big(self.to_big() * other.to_big())
    }

    fn neg_ref(&self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(x) => Self::from_big(-x),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl Zero for Rational {
    fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }
}

impl One for Rational {
    fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n.into())
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            return (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128));
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self))
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                let f: fn(&Rational, &Rational) -> Rational = $body;
                f(self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_ref(b));
binop!(Sub, sub, |a, b| a.add_ref(&b.neg_ref()));
binop!(Mul, mul, |a, b| a.mul_ref(b));
binop!(Div, div, |a, b| a.mul_ref(&b.recip()));

macro_rules! assignop {
    ($tr:ident, $method:ident, $op:ident) => {
        impl $tr<&Rational> for Rational {
            fn $method(&mut self, rhs: &Rational) {
                *self = (&*self).$op(rhs);
            }
        }
        impl $tr<Rational> for Rational {
            fn $method(&mut self, rhs: Rational) {
                *self = (&*self).$op(&rhs);
            }
        }
    };
}

assignop!(AddAssign, add_assign, add);
assignop!(SubAssign, sub_assign, sub);
assignop!(MulAssign, mul_assign, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Product for Rational {
    fn product<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::one(), |acc, x| acc * x)
    }
}

/// Parses `"p"`, `"-p"` or `"p/q"` with arbitrary-size integers.
pub fn parse_rational(s: &str) -> Result<Rational, LinalgError> {
    let bad = || LinalgError::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `"p/q"`, or `"p"` for integers.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_normalizes() {
        let x = parse_rational("4/-6").unwrap();
        assert_eq!(format_rational(&x), "-2/3");
        assert_eq!(format_rational(&parse_rational(" 7 ").unwrap()), "7");
        assert_eq!(format_rational(&parse_rational("0/5").unwrap()), "0");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    fn big(s: &str) -> BigRational {
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        BigRational::new(n.parse().unwrap(), d.parse().unwrap())
    }

    #[test]
    fn overflow_moves_to_big_and_back() {
        let m = parse_rational("9223372036854775807").unwrap();
        let sq = &m * &m;
        assert_eq!(format_rational(&sq), "85070591730234615847396907784232501249");
        assert_eq!(&sq / &m, m);
        assert!(matches!((&sq / &m).0, Repr::Small(..)));
        let tiny = parse_rational("1/9223372036854775807").unwrap();
        assert_eq!(&tiny * &m, Rational::one());
        assert_eq!(format_rational(&(&tiny + &tiny)), "2/9223372036854775807");
        assert!(-&m < m);
    }

    #[test]
    fn small_and_big_paths_agree() {
        let xs = ["0", "1", "-7/3", "5/6", "9223372036854775807", "-1/4611686018427387904", "123456789012345678901234567891/7"];
        for a in xs {
            for b in xs {
                let (x, y) = (parse_rational(a).unwrap(), parse_rational(b).unwrap());
                assert_eq!(format_rational(&(&x + &y)), format_rational(&Rational::from_big(big(a) + big(b))));
                assert_eq!(format_rational(&(&x - &y)), format_rational(&Rational::from_big(big(a) - big(b))));
                assert_eq!(format_rational(&(&x * &y)), format_rational(&Rational::from_big(big(a) * big(b))));
                assert_eq!(x.cmp(&y), big(a).cmp(&big(b)));
                if !y.is_zero() {
                    assert_eq!(&x / &y, Rational::from_big(big(a) / big(b)));
                }
            }
        }
    }

    #[test]
    fn big_values_survive() {
        let s = "123456789012345678901234567891/1000000000000000000000";
        assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
    }
}
