//! Exact Clifford algebra Cl_n with e_i e_j + e_j e_i = -2 delta_ij, stored as
//! sparse blade-bitmask maps. Spin elements, rotors, volume elements and the
//! vector representation lambda_n live here.

mod closure;

pub use closure::{group_closure, group_closure_of, AbelianGroup, GroupElement, GroupTable};

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 16;

/// Exact rational coefficient.
pub type Q = Rational64;
/// Multivector with exact rational coefficients.
pub type Mv = Multivector<Q>;

/// Coefficient ring of a multivector: exact rationals or doubles.
pub trait Coeff:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// Equality up to the mode's tolerance (exact for rationals).
    fn near(&self, other: &Self) -> bool;
    fn to_f64(&self) -> f64;
}

impl Coeff for Q {
    fn near(&self, other: &Self) -> bool {
        self == other
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Coeff for f64 {
    fn near(&self, other: &Self) -> bool {
        (self - other).abs() <= 1e-12 * (1.0 + self.abs().max(other.abs()))
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// A basis blade e_{i1}...e_{ik}; bit i of `mask` stands for e_{i+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Blade {
    pub mask: u32,
    pub n: usize,
}

impl Blade {
    pub fn new(n: usize, mask: u32) -> Result<Self> {
        check_dim(n)?;
        if n < 32 && mask >> n != 0 {
            return Err(Error::IndexOutOfRange {
                index: 32 - mask.leading_zeros() as usize,
                n,
            });
        }
        Ok(Blade { mask, n })
    }

    pub fn grade(&self) -> u32 {
        self.mask.count_ones()
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", blade_name(self.mask))
    }
}

fn blade_name(mask: u32) -> String {
    if mask == 0 {
        return "1".to_string();
    }
    (0..32)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| format!("e{}", i + 1))
        .collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::DimensionOutOfRange(n))
    } else {
        Ok(())
    }
}

/// Sign of the blade product e_a e_b relative to e_{a xor b}.
///
/// Each generator of `b` must pass every generator of `a` with a larger index;
/// the transpositions are counted with one popcount per bit of `b`. Shared
/// generators contribute e_i^2 = -1.
pub fn blade_sign(a: u32, b: u32) -> i32 {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros();
        swaps += (a >> i >> 1).count_ones();
        rest &= rest - 1;
    }
    swaps += (a & b).count_ones();
    if swaps.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Element of Cl_n as a sparse map blade mask -> coefficient. Zero
/// coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multivector<C> {
    n: usize,
    terms: BTreeMap<u32, C>,
}

impl<C: Coeff> Multivector<C> {
    pub fn zero(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Multivector {
            n,
            terms: BTreeMap::new(),
        })
    }

    pub fn scalar(n: usize, c: C) -> Result<Self> {
        Self::blade(n, 0, c)
    }

    pub fn one(n: usize) -> Result<Self> {
        Self::scalar(n, C::one())
    }

    pub fn blade(n: usize, mask: u32, c: C) -> Result<Self> {
        let b = Blade::new(n, mask)?;
        let mut mv = Self::zero(n)?;
        mv.add_term(b.mask, c);
        Ok(mv)
    }

    /// The generator e_i, 1-based.
    pub fn basis_vector(n: usize, i: usize) -> Result<Self> {
        if i == 0 || i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        Self::blade(n, 1 << (i - 1), C::one())
    }

    /// e_{i1} e_{i2} ... for 1-based indices in the given order.
    pub fn product_of_vectors(n: usize, indices: &[usize]) -> Result<Self> {
        let mut acc = Self::one(n)?;
        for &i in indices {
            acc = clifford_product(&acc, &Self::basis_vector(n, i)?)?;
        }
        Ok(acc)
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (u32, C)>) -> Result<Self> {
        let mut mv = Self::zero(n)?;
        for (mask, c) in terms {
            Blade::new(n, mask)?;
            mv.add_term(mask, c);
        }
        Ok(mv)
    }

    fn add_term(&mut self, mask: u32, c: C) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(C::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &C)> {
        let n = self.n;
        self.terms.iter().map(move |(m, c)| (Blade { mask: *m, n }, c))
    }

    pub fn coefficient(&self, mask: u32) -> C {
        self.terms.get(&mask).cloned().unwrap_or_else(C::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    /// Some(c) if the multivector is the scalar c.
    pub fn as_scalar(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }

    pub fn grade_part(&self, k: u32) -> Self {
        Multivector {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.count_ones() == k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Multivector {
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (m, x) in &self.terms {
            out.add_term(*m, x.clone() * c.clone());
        }
        out
    }

    /// Each grade-k blade scaled by (-1)^{k(k-1)/2}.
    pub fn reverse(&self) -> Self {
        let mut out = self.clone();
        for (m, c) in out.terms.iter_mut() {
            let k = m.count_ones();
            if (k * k.saturating_sub(1) / 2) % 2 == 1 {
                *c = -c.clone();
            }
        }
        out
    }

    /// Equality up to the coefficient mode's tolerance.
    pub fn near(&self, other: &Self) -> bool {
        if self.n != other.n {
            return false;
        }
        let masks: std::collections::BTreeSet<u32> =
            self.terms.keys().chain(other.terms.keys()).copied().collect();
        masks
            .into_iter()
            .all(|m| self.coefficient(m).near(&other.coefficient(m)))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(&-C::one()))
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::one(self.n)?;
        for _ in 0..e {
            acc = clifford_product(&acc, self)?;
        }
        Ok(acc)
    }

    /// Unit even element: even grades only and g * reverse(g) = 1.
    pub fn is_spin_element(&self) -> bool {
        if !self.is_even() {
            return false;
        }
        match clifford_product(self, &self.reverse()) {
            Ok(p) => p.near(&Self::one(self.n).expect("valid n")),
            Err(_) => false,
        }
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Multivector<D> {
        let mut out = Multivector::<D> {
            n: self.n,
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            out.add_term(*m, f(c));
        }
        out
    }
}

impl Mv {
    /// Rational-to-double conversion for float-mode demonstrations.
    pub fn to_float(&self) -> Multivector<f64> {
        self.map_coeffs(|c| c.to_f64())
    }

    /// Re-embeds the element in Cl_n for n >= the current dimension.
    pub fn embed(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::DimensionMismatch(self.n, n));
        }
        Self::from_terms(n, self.terms.iter().map(|(m, c)| (*m, *c)))
    }
}

/// Bilinear extension of the blade product.
pub fn clifford_product<C: Coeff>(a: &Multivector<C>, b: &Multivector<C>) -> Result<Multivector<C>> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(a.n, b.n));
    }
    let mut out = Multivector {
        n: a.n,
        terms: BTreeMap::new(),
    };
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let c = ca.clone() * cb.clone();
            let c = if blade_sign(*ma, *mb) < 0 { -c } else { c };
            out.add_term(ma ^ mb, c);
        }
    }
    Ok(out)
}

impl<C: Coeff> Mul for &Multivector<C> {
    type Output = Multivector<C>;
    /// Panics on a dimension mismatch; use [`clifford_product`] to handle it.
    fn mul(self, rhs: Self) -> Multivector<C> {
        clifford_product(self, rhs).expect("multivector dimensions agree")
    }
}

impl<C: Coeff> Add for &Multivector<C> {
    type Output = Multivector<C>;
    fn add(self, rhs: Self) -> Multivector<C> {
        self.try_add(rhs).expect("multivector dimensions agree")
    }
}

impl<C: Coeff> Sub for &Multivector<C> {
    type Output = Multivector<C>;
    fn sub(self, rhs: Self) -> Multivector<C> {
        self.try_sub(rhs).expect("multivector dimensions agree")
    }
}

impl<C: Coeff> Neg for &Multivector<C> {
    type Output = Multivector<C>;
    fn neg(self) -> Multivector<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> fmt::Debug for Multivector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cl{}[", self.n)?;
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{:?}*{}", c, blade_name(*m))?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Mv {
    /// Names +-1 and +-vol_n specially; other elements print as blade sums.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vol_mask = if self.n >= 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().expect("one term");
            let sign = if c.is_negative() { "-" } else { "" };
            if c.abs().is_one() {
                if *m == 0 {
                    return write!(f, "{sign}1");
                }
                if *m == vol_mask && self.n > 1 {
                    return write!(f, "{sign}vol_{}", self.n);
                }
                return write!(f, "{sign}{}", blade_name(*m));
            }
        }
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}*{}", c, blade_name(*m)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// e_1 e_2 ... e_n.
pub fn volume_element(n: usize) -> Result<Mv> {
    check_dim(n)?;
    Mv::blade(n, ((1u64 << n) - 1) as u32, Q::one())
}

/// Rotor cos(h) + sin(h) e_i e_j with h = `half_angle_over_pi` * pi, exact
/// when h is a multiple of pi/2.
pub fn rotor(n: usize, i: usize, j: usize, half_angle_over_pi: Q) -> Result<Mv> {
    let (c, s) = quarter_turn_cos_sin(half_angle_over_pi)?;
    rotor_from_cos_sin(n, i, j, Q::from_integer(c), Q::from_integer(s))
}

/// Float-mode rotor at an arbitrary half angle (radians).
pub fn rotor_float(n: usize, i: usize, j: usize, half_angle: f64) -> Result<Multivector<f64>> {
    rotor_from_cos_sin(n, i, j, half_angle.cos(), half_angle.sin())
}

fn rotor_from_cos_sin<C: Coeff>(n: usize, i: usize, j: usize, c: C, s: C) -> Result<Multivector<C>> {
    if i == j {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    let eij = clifford_product(
        &Multivector::<C>::basis_vector(n, i)?,
        &Multivector::<C>::basis_vector(n, j)?,
    )?;
    Multivector::<C>::scalar(n, c)?.try_add(&eij.scale(&s))
}

/// (cos, sin) of q*pi for q a multiple of 1/2.
pub fn quarter_turn_cos_sin(q: Q) -> Result<(i64, i64)> {
    let twice = q * Q::from_integer(2);
    if !twice.is_integer() {
        return Err(Error::AngleNotRepresentable(format!("{q}*pi")));
    }
    Ok(match twice.to_integer().rem_euclid(4) {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    })
}

/// Matrix of y -> g y g^{-1} on the vector grade, for g a Spin element.
/// Entry (i, j) is the e_{i+1} coefficient of g e_{j+1} reverse(g).
pub fn lambda_n<C: Coeff>(g: &Multivector<C>) -> Result<Vec<Vec<C>>> {
    if !g.is_spin_element() {
        return Err(Error::NotSpinElement);
    }
    let n = g.n;
    let gr = g.reverse();
    let mut m = vec![vec![C::zero(); n]; n];
    for j in 0..n {
        let y = Multivector::<C>::basis_vector(n, j + 1)?;
        let img = clifford_product(&clifford_product(g, &y)?, &gr)?;
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = img.coefficient(1 << i);
        }
    }
    Ok(m)
}

/// Matrix of the infinitesimal action y -> X y - y X of a bivector X on the
/// vector grade (so e_i e_j acts as 2E_ij).
pub fn lie_action(x: &Mv) -> Result<Vec<Vec<Q>>> {
    if !x.terms.keys().all(|m| m.count_ones() == 2) {
        return Err(Error::InvalidParams("lie_action expects a bivector".into()));
    }
    let n = x.n;
    let mut m = vec![vec![Q::zero(); n]; n];
    for j in 0..n {
        let y = Mv::basis_vector(n, j + 1)?;
        let img = clifford_product(x, &y)?.try_sub(&clifford_product(&y, x)?)?;
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = img.coefficient(1 << i);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64) -> Q {
        Q::from_integer(a)
    }

    /// Independent blade product: expand both blades into generator words
    /// and bubble-sort with explicit e_i e_i = -1 cancellation.
    fn oracle_blade_product(a: u32, b: u32) -> (i32, u32) {
        let mut word: Vec<u32> = (0..32).filter(|i| a >> i & 1 == 1).collect();
        word.extend((0..32).filter(|i| b >> i & 1 == 1));
        let mut sign = 1;
        loop {
            let mut changed = false;
            let mut k = 0;
            while k + 1 < word.len() {
                if word[k] > word[k + 1] {
                    word.swap(k, k + 1);
                    sign = -sign;
                    changed = true;
                } else if word[k] == word[k + 1] {
                    word.drain(k..k + 2);
                    sign = -sign;
                    changed = true;
                    continue;
                }
                k += 1;
            }
            if !changed {
                break;
            }
        }
        (sign, word.iter().fold(0, |acc, i| acc | 1 << i))
    }

    #[test]
    fn blade_sign_matches_word_oracle() {
        for a in 0..64u32 {
            for b in 0..64u32 {
                let (s, m) = oracle_blade_product(a, b);
                assert_eq!(m, a ^ b);
                assert_eq!(s, blade_sign(a, b), "a={a:b} b={b:b}");
            }
        }
    }

    #[test]
    fn generator_relations() {
        let e1 = Mv::basis_vector(2, 1).unwrap();
        let e2 = Mv::basis_vector(2, 2).unwrap();
        assert_eq!(&e1 * &e1, Mv::scalar(2, q(-1)).unwrap());
        let e12 = Mv::blade(2, 0b11, q(1)).unwrap();
        assert_eq!(&e1 * &e2, e12);
        assert_eq!(&e2 * &e1, -&e12);
        assert_eq!(&e12 * &e12, Mv::scalar(2, q(-1)).unwrap());
        for n in 1..=12 {
            for i in 1..=n {
                for j in 1..=n {
                    let ei = Mv::basis_vector(n, i).unwrap();
                    let ej = Mv::basis_vector(n, j).unwrap();
                    let anti = &(&ei * &ej) + &(&ej * &ei);
                    let expect = if i == j { q(-2) } else { q(0) };
                    assert_eq!(anti, Mv::scalar(n, expect).unwrap());
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Mv::one(2).unwrap();
        let b = Mv::one(3).unwrap();
        assert_eq!(clifford_product(&a, &b), Err(Error::DimensionMismatch(2, 3)));
    }

    #[test]
    fn reverse_signs() {
        let e12 = Mv::blade(3, 0b011, q(1)).unwrap();
        assert_eq!(e12.reverse(), -&e12);
        let x = &Mv::one(3).unwrap() + &e12;
        assert_eq!(x.reverse(), &Mv::one(3).unwrap() - &e12);
        let e123 = Mv::blade(3, 0b111, q(1)).unwrap();
        assert_eq!(e123.reverse(), -&e123);
    }

    #[test]
    fn volume_squares() {
        for n in 1..=16 {
            let v = volume_element(n).unwrap();
            let expect = if (n * (n + 1) / 2) % 2 == 0 { 1 } else { -1 };
            assert_eq!(&v * &v, Mv::scalar(n, q(expect)).unwrap(), "n={n}");
        }
        let v = volume_element(2).unwrap();
        assert_eq!(v, Mv::blade(2, 0b11, q(1)).unwrap());
    }

    #[test]
    fn volume_conjugation_reflects_vectors() {
        for n in 1..=8 {
            let v = volume_element(n).unwrap();
            let vinv = v.scale(&(&v * &v).as_scalar().unwrap());
            assert_eq!(&v * &vinv, Mv::one(n).unwrap());
            for i in 1..=n {
                let y = Mv::basis_vector(n, i).unwrap();
                let conj = &(&v * &y) * &vinv;
                if n % 2 == 0 {
                    assert_eq!(conj, -&y);
                } else {
                    assert_eq!(conj, y);
                }
            }
        }
    }

    #[test]
    fn volume_centrality() {
        for n in 2..=9 {
            let v = volume_element(n).unwrap();
            for i in 1..=n {
                for j in (i + 1)..=n {
                    let b = Mv::product_of_vectors(n, &[i, j]).unwrap();
                    assert_eq!(&v * &b, &b * &v);
                }
                let y = Mv::basis_vector(n, i).unwrap();
                if n % 2 == 0 {
                    assert_eq!(&v * &y, -&(&y * &v));
                } else {
                    assert_eq!(&v * &y, &y * &v);
                }
            }
        }
    }

    #[test]
    fn rotor_values() {
        let r = rotor(2, 1, 2, Q::new(1, 2)).unwrap();
        assert_eq!(r, Mv::blade(2, 0b11, q(1)).unwrap());
        let r = rotor(2, 1, 2, q(1)).unwrap();
        assert_eq!(r, Mv::scalar(2, q(-1)).unwrap());
        assert!(matches!(
            rotor(2, 1, 2, Q::new(1, 3)),
            Err(Error::AngleNotRepresentable(_))
        ));
        assert!(rotor(2, 1, 1, q(1)).is_err());
    }

    #[test]
    fn lambda_of_rotor_is_plane_rotation() {
        for &theta in &[0.3f64, 1.1, 2.5, -0.7] {
            let g = rotor_float(4, 1, 2, theta / 2.0).unwrap();
            let m = lambda_n(&g).unwrap();
            let (c, s) = (theta.cos(), theta.sin());
            let expect = [
                [c, -s, 0.0, 0.0],
                [s, c, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ];
            for i in 0..4 {
                for j in 0..4 {
                    assert!((m[i][j] - expect[i][j]).abs() < 1e-12, "theta={theta}");
                }
            }
            let neg = lambda_n(&-&g).unwrap();
            assert_eq!(m, neg);
        }
        let one = lambda_n(&Mv::one(3).unwrap()).unwrap();
        for (i, row) in one.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, q((i == j) as i64));
            }
        }
    }

    #[test]
    fn lambda_rejects_non_spin() {
        let e1 = Mv::basis_vector(3, 1).unwrap();
        assert_eq!(lambda_n(&e1), Err(Error::NotSpinElement));
        let two = Mv::scalar(3, q(2)).unwrap();
        assert_eq!(lambda_n(&two), Err(Error::NotSpinElement));
    }

    #[test]
    fn lie_action_of_bivector() {
        let x = Mv::product_of_vectors(3, &[1, 2]).unwrap();
        let m = lie_action(&x).unwrap();
        assert_eq!(m[1][0], q(2));
        assert_eq!(m[0][1], q(-2));
        assert_eq!(m[2][2], q(0));
    }

    #[test]
    fn display_names() {
        assert_eq!(volume_element(4).unwrap().to_string(), "vol_4");
        assert_eq!((-&Mv::one(3).unwrap()).to_string(), "-1");
        assert_eq!(Mv::product_of_vectors(3, &[1, 2]).unwrap().to_string(), "e1e2");
    }
}
