//! Maximal torus of Spin(r), spinor weights, and exact frequency extraction
//! for one-parameter loops t -> exp(2 pi i t D) presented as direct sums of
//! Kronecker products of diagonal factors.
//!
//! A torus element with angles theta_j = a_j pi is the product of rotors
//! cos(theta_j / 2) + sin(theta_j / 2) e_{2j-1} e_{2j}. On the spinor u_eps it
//! acts by exp((i/2) sum_j eps_{k+1-j} theta_j).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::blade_algebra::{rotor, Mv, Q};
use crate::error::{Error, Result};
use crate::spin_rep::{epsilon_of_index, index_chirality, Chirality, ExactMatrix, ExactScalar};

/// Point of the maximal torus, angles stored as multiples of pi in [0, 4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusElement {
    angles_over_pi: Vec<Q>,
}

impl TorusElement {
    pub fn new(r: usize, angles_over_pi: &[Q]) -> Result<Self> {
        if angles_over_pi.len() != r / 2 {
            return Err(Error::DimensionMismatch(angles_over_pi.len(), r / 2));
        }
        let four = Q::from_integer(4);
        let angles_over_pi = angles_over_pi
            .iter()
            .map(|a| *a - (*a / four).floor() * four)
            .collect();
        Ok(TorusElement { angles_over_pi })
    }

    pub fn angles_over_pi(&self) -> &[Q] {
        &self.angles_over_pi
    }

    /// The element as a product of rotors in Cl_r; exact when every angle is
    /// a multiple of pi.
    pub fn rotor(&self, r: usize) -> Result<Mv> {
        let mut g = Mv::one(r)?;
        for (j, a) in self.angles_over_pi.iter().enumerate() {
            let half = *a / Q::from_integer(2);
            g = &g * &rotor(r, 2 * j + 1, 2 * j + 2, half)?;
        }
        Ok(g)
    }
}

/// Spinor weight with entries stored doubled, so each entry is +-1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightVector {
    pub doubled_entries: Vec<i64>,
}

impl WeightVector {
    /// Weight of the basis spinor at index b (k = floor(r/2) coordinates).
    pub fn of_index(k: usize, b: usize) -> Self {
        let eps = epsilon_of_index(k, b);
        WeightVector {
            doubled_entries: (1..=k).map(|j| eps[k - j] as i64).collect(),
        }
    }

    pub fn negative_count(&self) -> usize {
        self.doubled_entries.iter().filter(|e| **e < 0).count()
    }

    pub fn chirality(&self) -> Chirality {
        if self.negative_count().is_multiple_of(2) {
            Chirality::Plus
        } else {
            Chirality::Minus
        }
    }

    /// Phase of the torus element on this weight, as a multiple of pi.
    pub fn phase_over_pi(&self, t: &TorusElement) -> Q {
        self.doubled_entries
            .iter()
            .zip(t.angles_over_pi())
            .map(|(d, a)| Q::from_integer(*d) * *a)
            .sum::<Q>()
            / Q::from_integer(2)
    }

    /// Frequency f of t -> exp(2 pi i f t) along the torus path with
    /// theta_j(t) = rates_j * pi * t.
    pub fn frequency(&self, rates: &[Q]) -> Q {
        self.doubled_entries
            .iter()
            .zip(rates)
            .map(|(d, c)| Q::from_integer(*d) * *c)
            .sum::<Q>()
            / Q::from_integer(4)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .doubled_entries
            .iter()
            .map(|d| if *d > 0 { "+1/2" } else { "-1/2" })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The 2^{floor(r/2)} weights of Delta_r in basis index order.
pub fn spin_weights(r: usize) -> Result<Vec<WeightVector>> {
    if r < 2 {
        return Err(Error::DimensionOutOfRange(r));
    }
    let k = r / 2;
    Ok((0..1usize << k).map(|b| WeightVector::of_index(k, b)).collect())
}

/// Weights of Delta_r^+- for even r.
pub fn half_spin_weights(r: usize, c: Chirality) -> Result<Vec<WeightVector>> {
    if r % 2 == 1 {
        return Err(Error::OddDimension(r));
    }
    Ok(spin_weights(r)?
        .into_iter()
        .enumerate()
        .filter(|(b, _)| index_chirality(*b) == c)
        .map(|(_, w)| w)
        .collect())
}

/// exp(i pi x) for x a multiple of 1/2.
fn unit_phase(x: Q) -> Result<ExactScalar> {
    let twice = x * Q::from_integer(2);
    if !twice.is_integer() {
        return Err(Error::AngleNotRepresentable(format!("{x}*pi")));
    }
    Ok(ExactScalar::i_pow(twice.to_integer()))
}

/// Diagonal matrix of the torus element in the u_eps basis.
pub fn torus_matrix(r: usize, t: &TorusElement) -> Result<ExactMatrix> {
    if t.angles_over_pi().len() != r / 2 {
        return Err(Error::DimensionMismatch(t.angles_over_pi().len(), r / 2));
    }
    let d = spin_weights(r)?
        .iter()
        .map(|w| unit_phase(w.phase_over_pi(t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExactMatrix::diagonal_matrix(&d))
}

mod freq_serde {
    use super::*;
    use std::str::FromStr;

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    fn to_repr(q: &Q) -> Repr {
        if q.is_integer() {
            Repr::Int(q.to_integer())
        } else {
            Repr::Text(q.to_string())
        }
    }

    fn from_repr<E: serde::de::Error>(r: Repr) -> std::result::Result<Q, E> {
        match r {
            Repr::Int(n) => Ok(Q::from_integer(n)),
            Repr::Text(s) => Rational64::from_str(s.trim()).map_err(|_| E::custom(format!("bad frequency {s:?}"))),
        }
    }

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        let reprs: Vec<Repr> = v.iter().map(to_repr).collect();
        reprs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let reprs = Vec::<Repr>::deserialize(d)?;
        reprs.into_iter().map(from_repr).collect()
    }
}

/// Primitive factor of a Kronecker term. Frequencies are exact rationals;
/// in JSON they are integers or strings such as "1/4".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Factor {
    /// Real block on R^dim rotating one plane per listed frequency, fixing
    /// the remaining dim - 2 * freqs.len() directions.
    Rot {
        #[serde(with = "freq_serde")]
        freqs: Vec<Q>,
        dim: usize,
    },
    /// Complex diagonal block diag(exp(2 pi i f t)); dim = freqs.len().
    Phase {
        #[serde(with = "freq_serde")]
        freqs: Vec<Q>,
        dim: usize,
    },
    Id { dim: usize },
}

impl Factor {
    pub fn rot(freqs: Vec<Q>, dim: usize) -> Self {
        Factor::Rot { freqs, dim }
    }

    pub fn phase(freqs: Vec<Q>) -> Self {
        let dim = freqs.len();
        Factor::Phase { freqs, dim }
    }

    pub fn id(dim: usize) -> Self {
        Factor::Id { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factor::Rot { dim, .. } | Factor::Phase { dim, .. } | Factor::Id { dim } => *dim,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Factor::Rot { freqs, dim } if 2 * freqs.len() > *dim => Err(Error::MalformedLoop(format!(
                "{} rotation planes do not fit in dimension {dim}",
                freqs.len()
            ))),
            Factor::Phase { freqs, dim } if freqs.len() != *dim => Err(Error::MalformedLoop(format!(
                "phase block lists {} frequencies for dimension {dim}",
                freqs.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Eigen-frequencies of the complexified block, with multiplicity.
    fn spectrum(&self) -> BTreeMap<Q, u64> {
        let mut out = BTreeMap::new();
        let mut add = |q: Q, c: u64| {
            if c > 0 {
                *out.entry(q).or_insert(0) += c;
            }
        };
        match self {
            Factor::Rot { freqs, dim } => {
                for f in freqs {
                    add(*f, 1);
                    add(-*f, 1);
                }
                add(Q::zero(), (dim - 2 * freqs.len()) as u64);
            }
            Factor::Phase { freqs, .. } => freqs.iter().for_each(|f| add(*f, 1)),
            Factor::Id { dim } => add(Q::zero(), *dim as u64),
        }
        out
    }

    /// Diagonal generator D of the complexified block, entry order: planes as
    /// (f, -f) pairs followed by fixed directions.
    fn generator(&self) -> Result<ExactMatrix> {
        let entries: Vec<Q> = match self {
            Factor::Rot { freqs, dim } => {
                let mut v: Vec<Q> = freqs.iter().flat_map(|f| [*f, -*f]).collect();
                v.resize(*dim, Q::zero());
                v
            }
            Factor::Phase { freqs, .. } => freqs.clone(),
            Factor::Id { dim } => vec![Q::zero(); *dim],
        };
        let d = entries.into_iter().map(ExactScalar::from_rational).collect::<Result<Vec<_>>>()?;
        Ok(ExactMatrix::diagonal_matrix(&d))
    }
}

/// Kronecker product of primitive factors. A `half` term lists one half V of
/// a complexified real loop whose other half is the conjugate of V.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorTerm {
    pub tensor: Vec<Factor>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub half: bool,
}

impl TensorTerm {
    pub fn new(tensor: Vec<Factor>) -> Self {
        TensorTerm { tensor, half: false }
    }

    pub fn half(tensor: Vec<Factor>) -> Self {
        TensorTerm { tensor, half: true }
    }

    pub fn dim(&self) -> usize {
        self.tensor.iter().map(Factor::dim).product()
    }

    /// Complex dimension contributed to the complexified loop.
    pub fn complex_dim(&self) -> usize {
        if self.half {
            2 * self.dim()
        } else {
            self.dim()
        }
    }

    fn first_rot(&self) -> Option<usize> {
        self.tensor.iter().position(|f| matches!(f, Factor::Rot { .. }))
    }

    /// Splits at the first rotation factor into (plus half, fixed part).
    fn split_first_rot(&self, q: usize) -> (TensorTerm, Option<TensorTerm>) {
        let Factor::Rot { freqs, dim } = &self.tensor[q] else {
            unreachable!("split at a rotation factor")
        };
        let mut plus = self.tensor.clone();
        plus[q] = Factor::phase(freqs.clone());
        let rest_dim = dim - 2 * freqs.len();
        let rest = (rest_dim > 0).then(|| {
            let mut t = self.tensor.clone();
            t[q] = Factor::id(rest_dim);
            TensorTerm::new(t)
        });
        (TensorTerm::half(plus), rest)
    }
}

/// Loop t -> exp(2 pi i t D) on the complexification of R^N, given as a
/// direct sum of Kronecker terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub sum: Vec<TensorTerm>,
}

impl LoopSpec {
    pub fn new(sum: Vec<TensorTerm>) -> Self {
        LoopSpec { sum }
    }

    /// Complex dimension N of the complexified space.
    pub fn dim(&self) -> usize {
        self.sum.iter().map(TensorTerm::complex_dim).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for term in &self.sum {
            if term.tensor.is_empty() {
                return Err(Error::MalformedLoop("empty tensor term".into()));
            }
            term.tensor.iter().try_for_each(Factor::validate)?;
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: LoopSpec = serde_json::from_str(s).map_err(|e| Error::MalformedLoop(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("loop spec serializes")
    }

    /// Full diagonal generator D of the complexified loop, built by explicit
    /// Kronecker sums; half terms contribute D_V and -D_V.
    pub fn generator_matrix(&self) -> Result<ExactMatrix> {
        self.validate()?;
        let mut blocks = vec![];
        for term in &self.sum {
            let d = kronecker_sum(&term.tensor)?;
            if term.half {
                blocks.push(-&d);
            }
            blocks.push(d);
        }
        Ok(ExactMatrix::direct_sum(&blocks))
    }
}

fn kronecker_sum(factors: &[Factor]) -> Result<ExactMatrix> {
    let gens = factors.iter().map(Factor::generator).collect::<Result<Vec<_>>>()?;
    let dims: Vec<usize> = factors.iter().map(Factor::dim).collect();
    let total: usize = dims.iter().product();
    let mut acc = ExactMatrix::zeros(total, total);
    for (i, g) in gens.iter().enumerate() {
        let parts: Vec<ExactMatrix> = dims
            .iter()
            .enumerate()
            .map(|(j, d)| if i == j { g.clone() } else { ExactMatrix::identity(*d) })
            .collect();
        acc = acc.try_add(&ExactMatrix::kron_all(&parts))?;
    }
    Ok(acc)
}

/// Rotation frequencies of a closed loop in SO(N): conjugate pairs +-n are
/// collapsed to |n| with multiplicity; `fixed` counts zero eigenvalues.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyMultiset {
    pub pairs: BTreeMap<u64, u64>,
    pub fixed: u64,
}

impl FrequencyMultiset {
    /// Collapses a complex spectrum symmetric under negation.
    pub fn from_spectrum(spectrum: &BTreeMap<Q, u64>) -> Result<Self> {
        let mut out = FrequencyMultiset::default();
        for (f, c) in spectrum {
            if !f.is_integer() {
                return Err(Error::MalformedLoop(format!("non-integer frequency {f}")));
            }
            let n = f.to_integer();
            let partner = spectrum.get(&-*f).copied().unwrap_or(0);
            if partner != *c {
                return Err(Error::MalformedLoop(format!(
                    "frequency {n} has multiplicity {c} but its conjugate has {partner}"
                )));
            }
            if n == 0 {
                out.fixed = *c;
            } else if n > 0 {
                out.pairs.insert(n as u64, *c);
            }
        }
        Ok(out)
    }

    /// Complex dimension accounted for.
    pub fn dim(&self) -> u64 {
        2 * self.pairs.values().sum::<u64>() + self.fixed
    }

    /// Sum of |n| over collapsed pairs.
    pub fn total(&self) -> u64 {
        self.pairs.iter().map(|(n, c)| n * c).sum()
    }

    pub fn count_of(&self, n: u64) -> u64 {
        self.pairs.get(&n).copied().unwrap_or(0)
    }
}

fn convolve(a: &BTreeMap<Q, u64>, b: &BTreeMap<Q, u64>) -> BTreeMap<Q, u64> {
    let mut out = BTreeMap::new();
    for (x, cx) in a {
        for (y, cy) in b {
            *out.entry(*x + *y).or_insert(0) += cx * cy;
        }
    }
    out
}

fn term_spectrum(factors: &[Factor]) -> BTreeMap<Q, u64> {
    factors
        .iter()
        .fold(BTreeMap::from([(Q::zero(), 1u64)]), |acc, f| convolve(&acc, &f.spectrum()))
}

/// Complex spectrum of the whole loop by combinatorial convolution.
pub fn loop_spectrum(spec: &LoopSpec) -> Result<BTreeMap<Q, u64>> {
    spec.validate()?;
    let mut total = BTreeMap::new();
    for term in &spec.sum {
        for (f, c) in term_spectrum(&term.tensor) {
            *total.entry(f).or_insert(0) += c;
            if term.half {
                *total.entry(-f).or_insert(0) += c;
            }
        }
    }
    Ok(total)
}

/// Collapsed frequency multiset of a loop; errors if a total frequency is
/// not an integer or the spectrum is not that of a real loop.
pub fn loop_frequencies(spec: &LoopSpec) -> Result<FrequencyMultiset> {
    let f = FrequencyMultiset::from_spectrum(&loop_spectrum(spec)?)?;
    debug_assert_eq!(f.dim(), spec.dim() as u64);
    Ok(f)
}

/// Signed number of copies of the generator of pi_1(SO(N)) traced by the
/// loop: the sum of frequencies over a half V of the complexification. V is
/// the listed part of a half term, the plus eigenspace of the first rotation
/// factor of a term, and the positive frequencies elsewhere.
pub fn loop_signed_count(spec: &LoopSpec) -> Result<i64> {
    spec.validate()?;
    let mut total = Q::zero();
    for term in &spec.sum {
        total += term_signed_count(term);
    }
    if !total.is_integer() {
        return Err(Error::MalformedLoop(format!("non-integer winding {total}")));
    }
    loop_frequencies(spec)?;
    Ok(total.to_integer())
}

fn term_signed_count(term: &TensorTerm) -> Q {
    if term.half {
        return term_spectrum(&term.tensor)
            .iter()
            .map(|(f, c)| *f * Q::from_integer(*c as i64))
            .sum();
    }
    match term.first_rot() {
        Some(q) => {
            let (plus, rest) = term.split_first_rot(q);
            term_signed_count(&plus) + rest.map_or(Q::zero(), |r| term_signed_count(&r))
        }
        None => term_spectrum(&term.tensor)
            .iter()
            .filter(|(f, _)| f.is_positive())
            .map(|(f, c)| *f * Q::from_integer(*c as i64))
            .sum(),
    }
}

/// Class in pi_1(SO(N)) = Z_2 of a loop with the given frequencies.
pub fn winding_parity(f: &FrequencyMultiset) -> u8 {
    (f.total() % 2) as u8
}

/// Reads the frequencies of t -> exp(2 pi i t D) off the exact diagonal of D.
pub fn matrix_frequency_oracle(d: &ExactMatrix) -> Result<FrequencyMultiset> {
    FrequencyMultiset::from_spectrum(&diagonal_spectrum(d)?)
}

fn diagonal_spectrum(d: &ExactMatrix) -> Result<BTreeMap<Q, u64>> {
    let mut spectrum = BTreeMap::new();
    for x in d.diagonal()? {
        let (re, im) = x.to_rationals();
        if !im.is_zero() {
            return Err(Error::MalformedLoop(format!("non-real frequency {x}")));
        }
        *spectrum.entry(re).or_insert(0) += 1;
    }
    Ok(spectrum)
}

/// Matrix counterpart of [`loop_signed_count`]: builds the generator of the
/// half V for each term explicitly and takes traces.
pub fn matrix_signed_count(spec: &LoopSpec) -> Result<i64> {
    spec.validate()?;
    let mut total = Q::zero();
    for term in &spec.sum {
        total += matrix_term_count(term)?;
    }
    if !total.is_integer() {
        return Err(Error::MalformedLoop(format!("non-integer winding {total}")));
    }
    Ok(total.to_integer())
}

fn matrix_term_count(term: &TensorTerm) -> Result<Q> {
    let d = kronecker_sum(&term.tensor)?;
    let spectrum = diagonal_spectrum(&d)?;
    let weighted = |keep: &dyn Fn(&Q) -> bool| -> Q {
        spectrum
            .iter()
            .filter(|(f, _)| keep(f))
            .map(|(f, c)| *f * Q::from_integer(*c as i64))
            .sum()
    };
    if term.half {
        return Ok(weighted(&|_| true));
    }
    match term.first_rot() {
        Some(q) => {
            let (plus, rest) = term.split_first_rot(q);
            Ok(matrix_term_count(&plus)? + rest.map_or(Ok(Q::zero()), |r| matrix_term_count(&r))?)
        }
        None => Ok(weighted(&|f| f.is_positive())),
    }
}

/// Shorthand for n/d.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Frequency of the weight-phase of a spin factor whose torus path has
/// rates c_j (theta_j = c_j pi t), for each weight in `weights`.
pub fn weight_frequencies(weights: &[WeightVector], rates: &[Q]) -> Vec<Q> {
    weights.iter().map(|w| w.frequency(rates)).collect()
}

impl fmt::Display for FrequencyMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(n, c)| format!("{n}x{c}")).collect();
        write!(f, "{{{}; fixed {}}}", parts.join(", "), self.fixed)
    }
}
