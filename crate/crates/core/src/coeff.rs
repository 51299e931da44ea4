//! Exact scalars in the field ℚ(i, √3).
//!
//! Every coefficient the engine produces lives here: Gaussian rationals cover
//! U(1), SU(2) and the Dirac matrices, the adjoined `√3` covers the eighth
//! Gell-Mann generator of SU(3).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

pub use crate::rational::Rational;

/// Build a rational from a numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
struct Gaussian {
    re: Rational,
    im: Rational,
}

impl Gaussian {
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Gaussian { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        Gaussian { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Gaussian { re: &self.re * &o.re, im: Rational::zero() };
        }
        Gaussian {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn scale(&self, k: &Rational) -> Self {
        Gaussian { re: &self.re * k, im: &self.im * k }
    }
    fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -&self.im }
    }
    fn neg(&self) -> Self {
        Gaussian { re: -&self.re, im: -&self.im }
    }
    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Gaussian { re: &self.re / &norm, im: -&self.im / &norm })
    }
}

/// An element `x + y·√3` with `x, y` Gaussian rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coeff {
    x: Gaussian,
    y: Gaussian,
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::default()
    }

    pub fn one() -> Self {
        Coeff::from_rational(Rational::one())
    }

    pub fn i() -> Self {
        Coeff::gaussian(Rational::zero(), Rational::one())
    }

    pub fn sqrt3() -> Self {
        Coeff {
            x: Gaussian::default(),
            y: Gaussian { re: Rational::one(), im: Rational::zero() },
        }
    }

    pub fn int(n: i64) -> Self {
        Coeff::from_rational(Rational::from_integer(n))
    }

    pub fn frac(num: i64, den: i64) -> Self {
        Coeff::from_rational(rat(num, den))
    }

    pub fn from_rational(r: Rational) -> Self {
        Coeff { x: Gaussian { re: r, im: Rational::zero() }, y: Gaussian::default() }
    }

    pub fn gaussian(re: Rational, im: Rational) -> Self {
        Coeff { x: Gaussian { re, im }, y: Gaussian::default() }
    }

    /// `(a + b i) + (c + d i)√3`.
    pub fn from_parts(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Coeff { x: Gaussian { re: a, im: b }, y: Gaussian { re: c, im: d } }
    }

    pub fn parts(&self) -> [&Rational; 4] {
        [&self.x.re, &self.x.im, &self.y.re, &self.y.im]
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.x.re.is_one() && self.x.im.is_zero() && self.y.is_zero()
    }

    /// True when the value is an ordinary rational number.
    pub fn as_rational(&self) -> Option<&Rational> {
        (self.x.im.is_zero() && self.y.is_zero()).then_some(&self.x.re)
    }

    /// Complex conjugation (fixes `√3`).
    pub fn conj(&self) -> Self {
        Coeff { x: self.x.conj(), y: self.y.conj() }
    }

    pub fn inv(&self) -> Option<Self> {
        // (x + y√3)^{-1} = (x − y√3) / (x² − 3y²)
        let three = Rational::from_integer(3);
        let norm = self.x.mul(&self.x).sub(&self.y.mul(&self.y).scale(&three));
        let ninv = norm.inv()?;
        Some(Coeff { x: self.x.mul(&ninv), y: self.y.neg().mul(&ninv) })
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Coeff { x: self.x.scale(k), y: self.y.scale(k) }
    }

    /// Sign-normalising key: the first nonzero part, used to pick a
    /// deterministic representative up to scaling.
    pub fn leading_part(&self) -> Option<&Rational> {
        self.parts().into_iter().find(|p| !p.is_zero())
    }
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        Coeff { x: self.x.add(&o.x), y: self.y.add(&o.y) }
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        Coeff { x: self.x.sub(&o.x), y: self.y.sub(&o.y) }
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        if self.y.is_zero() && o.y.is_zero() {
            return Coeff { x: self.x.mul(&o.x), y: Gaussian::default() };
        }
        let three = Rational::from_integer(3);
        Coeff {
            x: self.x.mul(&o.x).add(&self.y.mul(&o.y).scale(&three)),
            y: self.x.mul(&o.y).add(&self.y.mul(&o.x)),
        }
    }
}

impl Div for &Coeff {
    type Output = Coeff;
    fn div(self, o: &Coeff) -> Coeff {
        self * &o.inv().expect("division by zero coefficient")
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff { x: self.x.neg(), y: self.y.neg() }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, o: Coeff) -> Coeff {
                (&self).$m(&o)
            }
        }
        impl $tr<&Coeff> for Coeff {
            type Output = Coeff;
            fn $m(self, o: &Coeff) -> Coeff {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, o: &Coeff) {
        self.x = self.x.add(&o.x);
        self.y = self.y.add(&o.y);
    }
}

impl SubAssign<&Coeff> for Coeff {
    fn sub_assign(&mut self, o: &Coeff) {
        self.x = self.x.sub(&o.x);
        self.y = self.y.sub(&o.y);
    }
}

impl MulAssign<&Coeff> for Coeff {
    fn mul_assign(&mut self, o: &Coeff) {
        *self = &*self * o;
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::int(n)
    }
}

impl From<Rational> for Coeff {
    fn from(r: Rational) -> Self {
        Coeff::from_rational(r)
    }
}

fn fmt_part(r: &Rational, unit: &str, first: bool, out: &mut String) {
    let neg = r.is_negative();
    let mag = r.abs();
    if neg {
        out.push('-');
    } else if !first {
        out.push('+');
    }
    if unit.is_empty() {
        out.push_str(&mag.to_string());
    } else if mag.is_one() {
        out.push_str(unit);
    } else {
        out.push_str(&mag.to_string());
        out.push('*');
        out.push_str(unit);
    }
}

/// Renders as e.g. `-1/4`, `i`, `1/2*r3`, `(1+2*i)`; byte-stable.
impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let units = ["", "i", "r3", "i*r3"];
        let mut out = String::new();
        let mut count = 0;
        for (part, unit) in self.parts().into_iter().zip(units) {
            if part.is_zero() {
                continue;
            }
            fmt_part(part, unit, count == 0, &mut out);
            count += 1;
        }
        match count {
            0 => f.write_str("0"),
            1 => f.write_str(&out),
            _ => write!(f, "({out})"),
        }
    }
}
