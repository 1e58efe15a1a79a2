//! Dyadic Gaussian rationals (a + bi) / 2^k.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// (re + im*i) / 2^exp in canonical form: exp = 0 or re, im not both even.
/// Arithmetic is overflow-checked and panics rather than wrapping.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ExactScalar {
    re: i64,
    im: i64,
    exp: u32,
}

impl ExactScalar {
    pub const ZERO: ExactScalar = ExactScalar { re: 0, im: 0, exp: 0 };
    pub const ONE: ExactScalar = ExactScalar { re: 1, im: 0, exp: 0 };
    pub const I: ExactScalar = ExactScalar { re: 0, im: 1, exp: 0 };

    pub fn new(re: i64, im: i64, exp: u32) -> Self {
        let mut s = ExactScalar { re, im, exp };
        s.canonicalize();
        s
    }

    pub fn int(re: i64) -> Self {
        Self::new(re, 0, 0)
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        Self::new(re, im, 0)
    }

    /// i^k.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::ONE,
            1 => Self::I,
            2 => Self::int(-1),
            _ => Self::gaussian(0, -1),
        }
    }

    /// Exact conversion of a rational with power-of-two denominator.
    pub fn from_rational(q: Rational64) -> Result<Self> {
        let d = *q.denom();
        if d <= 0 || d & (d - 1) != 0 {
            return Err(Error::NonDyadic(q.to_string()));
        }
        Ok(Self::new(*q.numer(), 0, d.trailing_zeros()))
    }

    fn canonicalize(&mut self) {
        if self.re == 0 && self.im == 0 {
            self.exp = 0;
            return;
        }
        let tz = (self.re | self.im).trailing_zeros().min(self.exp);
        self.re >>= tz;
        self.im >>= tz;
        self.exp -= tz;
    }

    pub fn re_num(&self) -> i64 {
        self.re
    }

    pub fn im_num(&self) -> i64 {
        self.im
    }

    pub fn den_exp(&self) -> u32 {
        self.exp
    }

    pub fn real_part(&self) -> Self {
        Self::new(self.re, 0, self.exp)
    }

    pub fn imag_part(&self) -> Self {
        Self::new(self.im, 0, self.exp)
    }

    pub fn conj(&self) -> Self {
        ExactScalar {
            im: -self.im,
            ..*self
        }
    }

    pub fn is_real(&self) -> bool {
        self.im == 0
    }

    /// |z|^2.
    pub fn norm_sqr(&self) -> Self {
        *self * self.conj()
    }

    /// Division by 2^k.
    pub fn div_pow2(&self, k: u32) -> Self {
        Self::new(self.re, self.im, self.exp + k)
    }

    /// Division by a real scalar whose value is a power of two (possibly
    /// negative power).
    pub fn div_dyadic_real(&self, d: &Self) -> Result<Self> {
        if !d.is_real() || d.re <= 0 || d.re & (d.re - 1) != 0 {
            return Err(Error::NonDyadic(d.to_string()));
        }
        let shift = d.re.trailing_zeros() as i64 - d.exp as i64;
        if shift >= 0 {
            Ok(self.div_pow2(shift as u32))
        } else {
            Ok(*self * Self::int(1i64 << (-shift)))
        }
    }

    /// (re, im) as exact rationals.
    pub fn to_rationals(&self) -> (Rational64, Rational64) {
        let d = 1i64 << self.exp;
        (Rational64::new(self.re, d), Rational64::new(self.im, d))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let d = (self.exp as f64).exp2();
        (self.re as f64 / d, self.im as f64 / d)
    }

    fn align(a: &Self, b: &Self) -> (i64, i64, i64, i64, u32) {
        let e = a.exp.max(b.exp);
        let up = |x: i64, by: u32| {
            x.checked_mul(1i64.checked_shl(by).filter(|_| by < 63).expect("exact scalar overflow"))
                .expect("exact scalar overflow")
        };
        (
            up(a.re, e - a.exp),
            up(a.im, e - a.exp),
            up(b.re, e - b.exp),
            up(b.im, e - b.exp),
            e,
        )
    }
}

impl Add for ExactScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let (ar, ai, br, bi, e) = Self::align(&self, &o);
        Self::new(
            ar.checked_add(br).expect("exact scalar overflow"),
            ai.checked_add(bi).expect("exact scalar overflow"),
            e,
        )
    }
}

impl Sub for ExactScalar {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for ExactScalar {
    type Output = Self;
    fn neg(self) -> Self {
        ExactScalar {
            re: -self.re,
            im: -self.im,
            exp: self.exp,
        }
    }
}

impl Mul for ExactScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        let m = |x: i64, y: i64| x.checked_mul(y).expect("exact scalar overflow");
        let re = m(self.re, o.re).checked_sub(m(self.im, o.im)).expect("exact scalar overflow");
        let im = m(self.re, o.im).checked_add(m(self.im, o.re)).expect("exact scalar overflow");
        Self::new(re, im, self.exp + o.exp)
    }
}

impl Zero for ExactScalar {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
}

impl One for ExactScalar {
    fn one() -> Self {
        Self::ONE
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = match (self.re, self.im) {
            (re, 0) => format!("{re}"),
            (0, 1) => "i".to_string(),
            (0, -1) => "-i".to_string(),
            (0, im) => format!("{im}i"),
            (re, im) if im < 0 => format!("({re}-{}i)", -im),
            (re, im) => format!("({re}+{im}i)"),
        };
        if self.exp == 0 {
            write!(f, "{body}")
        } else {
            write!(f, "{body}/{}", 1u64 << self.exp)
        }
    }
}

impl fmt::Debug for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb() -> impl Strategy<Value = ExactScalar> {
        (-1000i64..1000, -1000i64..1000, 0u32..6).prop_map(|(a, b, k)| ExactScalar::new(a, b, k))
    }

    #[test]
    fn canonical_form() {
        assert_eq!(ExactScalar::new(2, 4, 1), ExactScalar::gaussian(1, 2));
        assert_eq!(ExactScalar::new(2, 3, 1).den_exp(), 1);
        assert_eq!(ExactScalar::new(0, 0, 5), ExactScalar::ZERO);
        assert_eq!(ExactScalar::new(4, 0, 1), ExactScalar::int(2));
    }

    #[test]
    fn i_squared() {
        assert_eq!(ExactScalar::I * ExactScalar::I, ExactScalar::int(-1));
        for k in -8..8 {
            assert_eq!(ExactScalar::i_pow(k) * ExactScalar::i_pow(-k), ExactScalar::ONE);
        }
    }

    #[test]
    fn halves_sum_to_one() {
        let h = ExactScalar::ONE.div_pow2(1);
        assert_eq!(h + h, ExactScalar::ONE);
        assert_eq!(h.to_string(), "1/2");
    }

    #[test]
    fn dyadic_conversion() {
        assert_eq!(
            ExactScalar::from_rational(Rational64::new(3, 4)).unwrap(),
            ExactScalar::new(3, 0, 2)
        );
        assert!(ExactScalar::from_rational(Rational64::new(1, 3)).is_err());
        let four = ExactScalar::int(4);
        assert_eq!(ExactScalar::int(6).div_dyadic_real(&four).unwrap(), ExactScalar::new(3, 0, 1));
        let quarter = ExactScalar::new(1, 0, 2);
        assert_eq!(ExactScalar::int(3).div_dyadic_real(&quarter).unwrap(), ExactScalar::int(12));
        assert!(ExactScalar::int(1).div_dyadic_real(&ExactScalar::int(3)).is_err());
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb(), b in arb(), c in arb()) {
            prop_assert_eq!(a + b, b + a);
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a + b) + c, a + (b + c));
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
            prop_assert_eq!(a - a, ExactScalar::ZERO);
            prop_assert_eq!((a * b).conj(), a.conj() * b.conj());
        }

        #[test]
        fn rational_round_trip(a in arb()) {
            let (re, im) = a.to_rationals();
            let back = ExactScalar::from_rational(re).unwrap() + ExactScalar::from_rational(im).unwrap() * ExactScalar::I;
            prop_assert_eq!(back, a);
        }
    }
}
