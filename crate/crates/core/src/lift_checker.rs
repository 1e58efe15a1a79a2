//! Explicit generator loops of the fundamental group of a structure group,
//! their winding in pi_1(SO(N)) computed three independent ways, and the
//! resulting verdict on lifts of the structure group to Spin(N).
//!
//! Each generator is joined to the identity in the covering product by a
//! path that is a one-parameter subgroup in every factor. Its image in SO(N)
//! is a loop t -> exp(2 pi i t D) presented in the torus DSL, one Kronecker
//! term per isotypic block: (outer factor) (x) (spin factor on the block's
//! complex spinor space).

use std::fmt;

use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blade_algebra::{rotor, volume_element, Mv, Q};
use crate::clifford_structures::{make_structure, CliffordParams, Multiplicity};
use crate::error::{Error, Result};
use crate::group_classifier::{
    collapse_central, kernel_of_rho, outer_factors, pi1_from_kernel, rho_block_images, same_subgroup,
    Discrepancy, FactorElement, FactorGroup, Pi1Result, ProductElement,
};
use crate::spin_rep::{half_spin_basis, spinor_basis, volume_action, Chirality, ExactScalar, SpinRep};
use crate::torus_weights::{
    half_spin_weights, loop_frequencies, loop_signed_count, matrix_frequency_oracle, matrix_signed_count,
    spin_weights, weight_frequencies, Factor, LoopSpec, TensorTerm,
};

/// A one-parameter path t -> exp(t X), t in [0, 1], in one covering factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorPath {
    Constant,
    /// prod_j (cos(s_j pi t) + sin(s_j pi t) e_{2j-1} e_{2j}) in Spin(n).
    Rotor { n: usize, half_rates: Vec<Q> },
    /// t -> rate pi t on the real line.
    Line { rate: Q },
    /// diag(exp(2 pi i f_j t)) in SU(m), with sum f_j = 0.
    Diagonal { freqs: Vec<Q> },
    /// diag(exp(rate pi i t), exp(-rate pi i t), ...) in Sp(m) inside U(2m).
    Symplectic { m: usize, rate: Q },
}

impl fmt::Display for FactorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[Q]| v.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",");
        match self {
            FactorPath::Constant => write!(f, "1"),
            FactorPath::Rotor { half_rates, .. } => write!(f, "rotor[{}]", list(half_rates)),
            FactorPath::Line { rate } => write!(f, "line[{rate}]"),
            FactorPath::Diagonal { freqs } => write!(f, "diag[{}]", list(freqs)),
            FactorPath::Symplectic { rate, .. } => write!(f, "sp[{rate}]"),
        }
    }
}

/// Explicit loop realizing one generator of the fundamental group.
#[derive(Debug, Clone)]
pub struct GeneratorLoop {
    /// delta1, delta2, ... within the residue class of r.
    pub case_id: String,
    /// The generator, as an element of the covering product.
    pub endpoint: ProductElement,
    /// One path per entry of the endpoint.
    pub paths: Vec<FactorPath>,
    /// Image loop with spin phases from weight combinatorics.
    pub spec: LoopSpec,
    /// The same loop with spin phases read off exact kappa matrices.
    pub matrix_spec: LoopSpec,
}

/// Complexified spinor space carried by one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SpinorSpace {
    Full,
    Half(Chirality),
}

fn z(n: i64) -> Q {
    Q::from_integer(n)
}

fn half() -> Q {
    Q::new(1, 2)
}

/// Chirality of Delta_r^+- on which vol_r acts by `sign`.
fn chirality_with_vol(r: usize, sign: i64) -> Result<Chirality> {
    let (plus, minus) = volume_action(r)?;
    let target = ExactScalar::int(sign);
    if plus == target {
        Ok(Chirality::Plus)
    } else if minus == target {
        Ok(Chirality::Minus)
    } else {
        Err(Error::Internal(format!("vol_{r} has no eigenvalue {sign} on Delta^+-")))
    }
}

/// Spinor spaces of the nonzero blocks, in block order. In a pair, the m1
/// block is where vol_r acts by +1.
fn block_spaces(p: &CliffordParams) -> Result<Vec<SpinorSpace>> {
    let r = p.r;
    Ok(match p.mult {
        Multiplicity::Single(_) => vec![match r % 8 {
            2 => SpinorSpace::Half(Chirality::Plus),
            6 => SpinorSpace::Half(Chirality::Minus),
            _ => SpinorSpace::Full,
        }],
        Multiplicity::Pair(m1, m2) => {
            let mut out = vec![];
            if m1 > 0 {
                out.push(SpinorSpace::Half(chirality_with_vol(r, 1)?));
            }
            if m2 > 0 {
                out.push(SpinorSpace::Half(chirality_with_vol(r, -1)?));
            }
            out
        }
    })
}

/// Entries of the covering product taken by each outer factor.
fn cover_width(g: FactorGroup) -> usize {
    match g {
        FactorGroup::U(_) => 2,
        _ => 1,
    }
}

/// Rotor path to a central element of Spin(n). For -vol the first plane
/// turns backwards, or every plane when `reverse_all` is set.
fn central_path(n: usize, z_elt: &Mv, reverse_all: bool) -> Result<FactorPath> {
    let planes = n / 2;
    let one = Mv::one(n)?;
    if *z_elt == one {
        return Ok(FactorPath::Constant);
    }
    let rates = if *z_elt == -&one {
        let mut v = vec![Q::zero(); planes];
        v[0] = Q::one();
        v
    } else if n.is_multiple_of(2) && *z_elt == volume_element(n)? {
        vec![half(); planes]
    } else if n.is_multiple_of(2) && *z_elt == -&volume_element(n)? {
        if reverse_all {
            vec![-half(); planes]
        } else {
            let mut v = vec![half(); planes];
            v[0] = -half();
            v
        }
    } else {
        return Err(Error::InvalidParams(format!("{z_elt} is not central in Spin({n})")));
    };
    Ok(FactorPath::Rotor { n, half_rates: rates })
}

/// Representative of a phase in (-1, 0].
fn nonpositive_rep(phase: Q) -> Q {
    if phase > Q::zero() {
        phase - Q::one()
    } else {
        phase
    }
}

/// Paths joining the identity to each entry of `endpoint`.
fn factor_paths(p: &CliffordParams, endpoint: &ProductElement) -> Result<Vec<FactorPath>> {
    let reverse_all = matches!(p.r_mod8(), 2 | 6);
    let mut out = vec![];
    for x in &endpoint.factors {
        out.push(match x {
            FactorElement::Orth { neg: false, .. } => FactorPath::Constant,
            FactorElement::SpinCover { m, elt } => central_path(*m, elt, false)?,
            FactorElement::Line { over_pi } => {
                if over_pi.is_zero() {
                    FactorPath::Constant
                } else {
                    FactorPath::Line { rate: *over_pi }
                }
            }
            FactorElement::SpecialUnitary { m, phase } => {
                if phase.is_zero() {
                    FactorPath::Constant
                } else {
                    let f = nonpositive_rep(*phase);
                    let mut freqs = vec![f; *m];
                    freqs[m - 1] = f * z(1 - *m as i64);
                    FactorPath::Diagonal { freqs }
                }
            }
            FactorElement::Symp { m, neg } => {
                if *neg {
                    FactorPath::Symplectic { m: *m, rate: Q::one() }
                } else {
                    FactorPath::Constant
                }
            }
            FactorElement::Spin { r, elt } => central_path(*r, elt, reverse_all)?,
            FactorElement::Spin3 { side, elt } => {
                // Path in Spin(4) to the central element whose image in the
                // surviving Spin(3) is elt, as (vol_4 or -vol_4).
                let target = if *elt == Mv::one(3)? {
                    Mv::one(4)?
                } else {
                    [volume_element(4)?, -&volume_element(4)?]
                        .into_iter()
                        .find(|v| collapse_central(v, *side).map(|c| c == *elt).unwrap_or(false))
                        .ok_or_else(|| Error::InvalidParams(format!("{elt} is not central in Spin(3)")))?
                };
                central_path(4, &target, false)?
            }
            other => return Err(Error::InvalidParams(format!("no path to {other}"))),
        });
    }
    Ok(out)
}

fn rotor_endpoint(n: usize, half_rates: &[Q]) -> Result<Mv> {
    let mut g = Mv::one(n)?;
    for (j, s) in half_rates.iter().enumerate() {
        g = &g * &rotor(n, 2 * j + 1, 2 * j + 2, *s)?;
    }
    Ok(g)
}

fn frac(q: Q) -> Q {
    q - q.floor()
}

/// The path evaluated at t = 1, as an element of the same factor as `like`.
fn evaluate(path: &FactorPath, like: &FactorElement) -> Result<FactorElement> {
    use FactorElement as E;
    let bad = || Error::Internal(format!("path {path} does not fit factor {like}"));
    Ok(match (path, like) {
        (FactorPath::Constant, E::Orth { m, .. }) => E::Orth { m: *m, neg: false },
        (FactorPath::Constant, E::SpinCover { m, .. }) => E::SpinCover { m: *m, elt: Mv::one(*m)? },
        (FactorPath::Constant, E::Line { .. }) => E::Line { over_pi: Q::zero() },
        (FactorPath::Constant, E::SpecialUnitary { m, .. }) => E::SpecialUnitary { m: *m, phase: Q::zero() },
        (FactorPath::Constant, E::Symp { m, .. }) => E::Symp { m: *m, neg: false },
        (FactorPath::Constant, E::Spin { r, .. }) => E::Spin { r: *r, elt: Mv::one(*r)? },
        (FactorPath::Constant, E::Spin3 { side, .. }) => E::Spin3 { side: *side, elt: Mv::one(3)? },
        (FactorPath::Rotor { n, half_rates }, E::SpinCover { m, .. }) if n == m => E::SpinCover {
            m: *m,
            elt: rotor_endpoint(*n, half_rates)?,
        },
        (FactorPath::Rotor { n, half_rates }, E::Spin { r, .. }) if n == r => E::Spin {
            r: *r,
            elt: rotor_endpoint(*n, half_rates)?,
        },
        (FactorPath::Rotor { n: 4, half_rates }, E::Spin3 { side, .. }) => E::Spin3 {
            side: *side,
            elt: collapse_central(&rotor_endpoint(4, half_rates)?, *side)?,
        },
        (FactorPath::Line { rate }, E::Line { .. }) => E::Line { over_pi: *rate },
        (FactorPath::Diagonal { freqs }, E::SpecialUnitary { m, .. }) => {
            if freqs.len() != *m || !freqs.iter().copied().sum::<Q>().is_zero() {
                return Err(bad());
            }
            let phase = frac(freqs[0]);
            if freqs.iter().any(|f| frac(*f) != phase) {
                return Err(Error::Internal(format!("{path} does not end at a scalar")));
            }
            E::SpecialUnitary { m: *m, phase }
        }
        (FactorPath::Symplectic { rate, .. }, E::Symp { m, .. }) => {
            if !rate.is_integer() {
                return Err(Error::Internal(format!("{path} does not end at a scalar")));
            }
            E::Symp {
                m: *m,
                neg: rate.to_integer().rem_euclid(2) == 1,
            }
        }
        _ => return Err(bad()),
    })
}

/// Image of the path endpoint in (outer scalars) x Spin(r), ready for an
/// exact image test. Spin(3) entries are replaced by the Spin(4) value.
fn project_endpoint(p: &CliffordParams, paths: &[FactorPath], endpoint: &ProductElement) -> Result<ProductElement> {
    let outer = outer_factors(p);
    let mut factors = vec![];
    let mut i = 0;
    for g in &outer {
        let x = &endpoint.factors[i];
        factors.push(match (g, x) {
            (FactorGroup::SO(m), FactorElement::SpinCover { elt, .. }) => {
                let one = Mv::one(*m)?;
                let neg = if *elt == one || *elt == -&one {
                    false
                } else if m % 2 == 0 && (*elt == volume_element(*m)? || *elt == -&volume_element(*m)?) {
                    true
                } else {
                    return Err(Error::Internal(format!("{elt} does not cover a scalar")));
                };
                FactorElement::Orth { m: *m, neg }
            }
            (FactorGroup::SO(2), FactorElement::Line { over_pi }) if over_pi.is_integer() => FactorElement::Orth {
                m: 2,
                neg: over_pi.to_integer().rem_euclid(2) == 1,
            },
            (FactorGroup::SO(m), FactorElement::Orth { .. }) => FactorElement::Orth { m: *m, neg: false },
            (FactorGroup::U(m), FactorElement::Line { over_pi }) => {
                let FactorElement::SpecialUnitary { phase, .. } = &endpoint.factors[i + 1] else {
                    return Err(Error::Internal("unitary entry without an SU part".into()));
                };
                let quarter = (*over_pi / z(2) + *phase) * z(4);
                if !quarter.is_integer() {
                    return Err(Error::Internal(format!("{endpoint} does not cover i^k")));
                }
                FactorElement::Unitary {
                    m: *m,
                    k: quarter.to_integer().rem_euclid(4) as u8,
                }
            }
            (FactorGroup::Sp(_), FactorElement::Symp { .. }) => x.clone(),
            _ => return Err(Error::Internal(format!("unexpected entry {x} for {g}"))),
        });
        i += cover_width(*g);
    }
    let spin = match paths.last() {
        Some(FactorPath::Constant) => Mv::one(p.r)?,
        Some(FactorPath::Rotor { n, half_rates }) if *n == p.r => rotor_endpoint(*n, half_rates)?,
        _ => return Err(Error::Internal("missing spin path".into())),
    };
    factors.push(FactorElement::Spin { r: p.r, elt: spin });
    Ok(ProductElement { factors })
}

/// Spin phases of a rotor path on a block's spinor space, from weights.
fn weight_phases(r: usize, space: SpinorSpace, path: &FactorPath) -> Result<Vec<Q>> {
    let weights = match space {
        SpinorSpace::Full => spin_weights(r)?,
        SpinorSpace::Half(c) => half_spin_weights(r, c)?,
    };
    Ok(match path {
        FactorPath::Constant => vec![Q::zero(); weights.len()],
        FactorPath::Rotor { half_rates, .. } => {
            let rates: Vec<Q> = half_rates.iter().map(|s| *s * z(2)).collect();
            weight_frequencies(&weights, &rates)
        }
        other => return Err(Error::Internal(format!("{other} is not a spin path"))),
    })
}

/// Spin phases of a rotor path read off the diagonal of kappa(X) on the
/// block's spinor space, X = sum_j s_j e_{2j-1} e_{2j}: kappa(X) = i lambda
/// gives the frequency lambda / 2.
fn kappa_phases(r: usize, space: SpinorSpace, path: &FactorPath) -> Result<Vec<Q>> {
    let basis = match space {
        SpinorSpace::Full => spinor_basis(r)?,
        SpinorSpace::Half(c) => half_spin_basis(r, c)?,
    };
    let half_rates = match path {
        FactorPath::Constant => return Ok(vec![Q::zero(); basis.len()]),
        FactorPath::Rotor { half_rates, .. } => half_rates,
        other => return Err(Error::Internal(format!("{other} is not a spin path"))),
    };
    let x = Mv::from_terms(
        r,
        half_rates
            .iter()
            .enumerate()
            .map(|(j, s)| ((0b11u32) << (2 * j), *s)),
    )?;
    let k = SpinRep::new(r)?.kappa(&x)?.restrict(&basis)?;
    k.diagonal()?
        .iter()
        .map(|d| {
            let (re, im) = d.to_rationals();
            if re.is_zero() {
                Ok(im / z(2))
            } else {
                Err(Error::Internal(format!("kappa of a bivector has real diagonal entry {d}")))
            }
        })
        .collect()
}

/// DSL factor of an outer path on its block, and whether it moves.
fn outer_factor(g: FactorGroup, paths: &[FactorPath]) -> Result<(Factor, bool)> {
    let nonzero = |v: &[Q]| v.iter().copied().filter(|q| !q.is_zero()).collect::<Vec<_>>();
    Ok(match (g, paths) {
        (FactorGroup::SO(m), [FactorPath::Constant]) => (Factor::id(m), false),
        (FactorGroup::SO(m), [FactorPath::Rotor { half_rates, .. }]) => (Factor::rot(nonzero(half_rates), m), true),
        (FactorGroup::SO(2), [FactorPath::Line { rate }]) => (Factor::rot(vec![*rate / z(2)], 2), true),
        (FactorGroup::U(m), [line, su]) => {
            let base = match line {
                FactorPath::Constant => Q::zero(),
                FactorPath::Line { rate } => *rate / z(2),
                other => return Err(Error::Internal(format!("{other} is not a line path"))),
            };
            let freqs = match su {
                FactorPath::Constant => vec![base; m],
                FactorPath::Diagonal { freqs } => freqs.iter().map(|f| base + *f).collect(),
                other => return Err(Error::Internal(format!("{other} is not an SU path"))),
            };
            (Factor::phase(freqs), true)
        }
        (FactorGroup::Sp(m), [FactorPath::Constant]) => (Factor::id(2 * m), false),
        (FactorGroup::Sp(m), [FactorPath::Symplectic { rate, .. }]) => (Factor::phase(vec![*rate / z(2); m]), true),
        _ => return Err(Error::Internal(format!("paths {paths:?} do not fit {g}"))),
    })
}

/// The image loop: one Kronecker term per nonzero block. Complex and
/// quaternionic blocks with a moving outer factor list only the half on
/// which the outer phases are (exp(2 pi i f t)); the conjugate half is implied.
fn image_loop(
    p: &CliffordParams,
    paths: &[FactorPath],
    phases: impl Fn(SpinorSpace, &FactorPath) -> Result<Vec<Q>>,
) -> Result<LoopSpec> {
    let outer = outer_factors(p);
    let spaces = block_spaces(p)?;
    let spin_path = paths.last().ok_or_else(|| Error::Internal("empty path list".into()))?;
    let mut terms = vec![];
    let mut i = 0;
    for (g, space) in outer.iter().zip(&spaces) {
        let w = cover_width(*g);
        let (f, moving) = outer_factor(*g, &paths[i..i + w])?;
        i += w;
        let tensor = vec![f, Factor::phase(phases(*space, spin_path)?)];
        let halved = match p.r_mod8() {
            2 | 6 => true,
            3..=5 => moving,
            _ => false,
        };
        terms.push(if halved {
            TensorTerm::half(tensor)
        } else {
            TensorTerm::new(tensor)
        });
    }
    let spec = LoopSpec::new(terms);
    if spec.dim() != p.n() {
        return Err(Error::Internal(format!("loop has dimension {} but N = {}", spec.dim(), p.n())));
    }
    Ok(spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Id,
    Neg,
    Vol,
    Other,
}

fn outer_kind(x: &FactorElement) -> Result<Kind> {
    use FactorElement as E;
    Ok(match x {
        E::Orth { neg: false, .. } | E::Symp { neg: false, .. } => Kind::Id,
        E::Symp { neg: true, .. } => Kind::Neg,
        E::SpinCover { m, elt } => {
            if *elt == Mv::one(*m)? {
                Kind::Id
            } else if *elt == -&Mv::one(*m)? {
                Kind::Neg
            } else if m % 2 == 0 && *elt == volume_element(*m)? {
                Kind::Vol
            } else {
                Kind::Other
            }
        }
        E::Line { over_pi } if *over_pi == z(0) => Kind::Id,
        E::Line { over_pi } if *over_pi == z(1) => Kind::Vol,
        E::Line { over_pi } if *over_pi == z(2) => Kind::Neg,
        _ => Kind::Other,
    })
}

/// Spin entry as a sign pattern (scalar sign, vol factor).
fn spin_kind(x: &FactorElement) -> Result<(i64, bool)> {
    let (n, elt) = match x {
        FactorElement::Spin { r, elt } => (*r, elt.clone()),
        FactorElement::Spin3 { side, elt } => {
            let target = if *elt == Mv::one(3)? {
                Mv::one(4)?
            } else {
                [volume_element(4)?, -&volume_element(4)?]
                    .into_iter()
                    .find(|v| collapse_central(v, *side).map(|c| c == *elt).unwrap_or(false))
                    .ok_or_else(|| Error::Internal(format!("{elt} is not central")))?
            };
            (4, target)
        }
        other => return Err(Error::Internal(format!("{other} is not a spin entry"))),
    };
    let one = Mv::one(n)?;
    for (sign, vol) in [(1, false), (-1, false), (1, true), (-1, true)] {
        let mut c = if vol { volume_element(n)? } else { one.clone() };
        if sign < 0 {
            c = -&c;
        }
        if c == elt {
            return Ok((sign, vol));
        }
    }
    Err(Error::Internal(format!("{elt} is not central")))
}

/// Loop label of a generator within its residue class.
fn case_id(p: &CliffordParams, endpoint: &ProductElement) -> Result<String> {
    let unsupported = || Error::InvalidParams(format!("no loop recipe for generator {endpoint} at {p}"));
    let (spin, outer) = endpoint.factors.split_last().ok_or_else(unsupported)?;
    let spin = spin_kind(spin)?;
    let id = match p.r_mod8() {
        1 | 7 => match (outer_kind(&outer[0])?, spin, &outer[0]) {
            (Kind::Neg, (1, false), _) => 1,
            (Kind::Vol, (-1, false), FactorElement::SpinCover { .. }) => 2,
            (Kind::Vol, (-1, false), FactorElement::Line { .. }) => 3,
            _ => return Err(unsupported()),
        },
        2 | 6 => match &outer[0] {
            FactorElement::Line { over_pi } if *over_pi == Q::new(1, 2) => 2,
            FactorElement::Line { .. } => 1,
            _ => return Err(unsupported()),
        },
        3 | 5 => return Ok("delta".into()),
        0 => {
            let (m1, m2) = p.pair_values().ok_or_else(unsupported)?;
            let kinds: Vec<Kind> = outer.iter().map(outer_kind).collect::<Result<_>>()?;
            if m1 > 0 && m2 > 0 {
                match (kinds[0], kinds[1], spin) {
                    (Kind::Neg, Kind::Id, (1, false)) => 1,
                    (Kind::Id, Kind::Neg, (1, false)) => 2,
                    (Kind::Id, Kind::Vol, (1, true)) => 3,
                    (Kind::Vol, Kind::Id, (-1, true)) => 4,
                    _ => return Err(unsupported()),
                }
            } else {
                match (kinds[0], spin) {
                    (Kind::Neg, (1, false)) => {
                        if m1 > 0 {
                            1
                        } else {
                            2
                        }
                    }
                    (Kind::Id, (_, true)) => 5,
                    (Kind::Vol, (-1, false)) => 6,
                    _ => return Err(unsupported()),
                }
            }
        }
        _ => {
            let (m1, m2) = p.pair_values().ok_or_else(unsupported)?;
            let kinds: Vec<Kind> = outer.iter().map(outer_kind).collect::<Result<_>>()?;
            if m1 > 0 && m2 > 0 {
                match (kinds[0], kinds[1], spin) {
                    (Kind::Neg, Kind::Neg, (-1, false)) => 1,
                    (Kind::Id, Kind::Neg, (1, true)) => 2,
                    _ => return Err(unsupported()),
                }
            } else {
                match (kinds[0], spin, m1 > 0) {
                    (Kind::Neg, (-1, false), true) => 3,
                    (Kind::Neg, (-1, false), false) => 4,
                    (Kind::Neg, (1, true), false) => 5,
                    (Kind::Neg, (-1, true), true) => 6,
                    _ => return Err(unsupported()),
                }
            }
        }
    };
    Ok(format!("delta{id}"))
}

/// Hand-picked generators for r = 4 mod 8: (-Id, -Id, -1) and
/// (Id, -Id, vol_r) for two blocks; (-Id, -1) with (-Id, -+vol_r) for one.
fn quaternionic_pair_generators(p: &CliffordParams, pi: &Pi1Result) -> Result<Option<Vec<ProductElement>>> {
    let Some((m1, m2)) = p.pair_values() else {
        return Ok(None);
    };
    if p.r_mod8() != 4 || p.r == 4 && (m1 == 0 || m2 == 0) {
        return Ok(None);
    }
    let r = p.r;
    let sp = |m: usize, neg: bool| FactorElement::Symp { m, neg };
    let spin = |x: Mv| FactorElement::Spin { r, elt: x };
    let one = Mv::one(r)?;
    let vol = volume_element(r)?;
    let el = |factors: Vec<FactorElement>| ProductElement { factors };
    let gens = if m1 > 0 && m2 > 0 {
        vec![
            el(vec![sp(m1, true), sp(m2, true), spin(-&one)]),
            el(vec![sp(m1, false), sp(m2, true), spin(vol)]),
        ]
    } else {
        let m = m1 + m2;
        let v = if m1 > 0 { -&vol } else { vol };
        vec![el(vec![sp(m, true), spin(-&one)]), el(vec![sp(m, true), spin(v)])]
    };
    let reference: Vec<ProductElement> = pi.generators.iter().map(|g| g.element.clone()).collect();
    if !same_subgroup(&gens, &reference)? {
        return Err(Error::Internal(format!("hand-picked generators do not span pi_1 at {p}")));
    }
    Ok(Some(gens))
}

/// One loop per generator of pi_1, following the hand-picked generator
/// lists; each loop is checked to close up at its endpoint, and the
/// endpoint to act trivially on R^N.
pub fn generator_loops(p: &CliffordParams) -> Result<Vec<GeneratorLoop>> {
    if p.r < 3 {
        return Err(Error::InvalidParams(format!("generator loops need r >= 3, got {}", p.r)));
    }
    let kernel = kernel_of_rho(p)?;
    let pi = pi1_from_kernel(p, &kernel)?;
    loops_for(p, &pi)
}

/// Generator loops followed by the full turn (-1, 1) of the outer factor
/// for r = 1, 7 (mod 8) when it is not already a generator.
pub fn oracle_loops(p: &CliffordParams) -> Result<Vec<GeneratorLoop>> {
    if p.r < 3 {
        return Err(Error::InvalidParams(format!("generator loops need r >= 3, got {}", p.r)));
    }
    let kernel = kernel_of_rho(p)?;
    let pi = pi1_from_kernel(p, &kernel)?;
    let mut endpoints = generator_endpoints(p, &pi)?;
    if let (1 | 7, Some(m)) = (p.r_mod8(), p.m()) {
        let outer = match m {
            1 => None,
            2 => Some(FactorElement::Line { over_pi: Q::from(2) }),
            _ => Some(FactorElement::SpinCover { m, elt: -&Mv::one(m)? }),
        };
        if let Some(outer) = outer {
            let turn = ProductElement {
                factors: vec![outer, FactorElement::Spin { r: p.r, elt: Mv::one(p.r)? }],
            };
            if !endpoints.contains(&turn) {
                endpoints.push(turn);
            }
        }
    }
    loops_at(p, endpoints)
}

fn generator_endpoints(p: &CliffordParams, pi: &Pi1Result) -> Result<Vec<ProductElement>> {
    Ok(match quaternionic_pair_generators(p, pi)? {
        Some(g) => g,
        None => pi.generators.iter().map(|g| g.element.clone()).collect(),
    })
}

fn loops_for(p: &CliffordParams, pi: &Pi1Result) -> Result<Vec<GeneratorLoop>> {
    loops_at(p, generator_endpoints(p, pi)?)
}

fn loops_at(p: &CliffordParams, endpoints: Vec<ProductElement>) -> Result<Vec<GeneratorLoop>> {
    let structure = make_structure(p)?;
    let mut out = vec![];
    for endpoint in endpoints {
        let case_id = case_id(p, &endpoint)?;
        let paths = factor_paths(p, &endpoint)?;
        if paths.len() != endpoint.factors.len() {
            return Err(Error::Internal("path count differs from factor count".into()));
        }
        for (path, x) in paths.iter().zip(&endpoint.factors) {
            let reached = evaluate(path, x)?;
            if reached != *x {
                return Err(Error::Internal(format!("{case_id}: path {path} ends at {reached}, not {x}")));
            }
        }
        let projected = project_endpoint(p, &paths, &endpoint)?;
        if !rho_block_images(p, &structure, &projected)?.iter().all(|m| m.is_identity()) {
            return Err(Error::Internal(format!("{case_id}: endpoint {projected} acts nontrivially")));
        }
        let spec = image_loop(p, &paths, |s, path| weight_phases(p.r, s, path))?;
        let matrix_spec = image_loop(p, &paths, |s, path| kappa_phases(p.r, s, path))?;
        out.push(GeneratorLoop {
            case_id,
            endpoint,
            paths,
            spec,
            matrix_spec,
        });
    }
    Ok(out)
}

type R = Ratio<i128>;

fn c(n: i64, k: i64) -> i128 {
    if k < 0 || k > n {
        0
    } else {
        binomial(n as i128, k as i128)
    }
}

fn pow2(e: i64) -> Result<i128> {
    if e < 0 {
        return Err(Error::InvalidParams(format!("negative exponent {e}")));
    }
    Ok(1i128 << e)
}

/// Binomial identities behind the closed-form winding counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClosedFormCase {
    /// sum_{j<k} (k-j) C(4k,2j) = k(2k-1)/(8k-2) C(4k,2k): an identity
    /// block against the half spinors at r = 8k.
    R0IdentityBlock,
    /// (1/2) sum_j (k-j) C(4k,2j+1) = 2^{4k-3}: a half-turned block at r = 8k.
    R0RotatedBlock,
    /// sum_j (k-j) C(4k+1,2j) = -2^{4k-2}: the -vol loop at r = 8k+2.
    R2Delta2,
    /// sum_j (k+1-j) C(4k+3,2j) = 2^{4k}: the -vol loop at r = 8k+6.
    R6Delta2,
    /// sum_j (k+1-j) C(4k+2,2j) = 16^k: a moving block at r = 8k+4.
    R4MovingBlock,
    /// 2 sum_{j<k} (k-j) C(4k+2,2j+1) = 2k(2k+1)/(8k+2) C(4k+2,2k+1): an
    /// identity block at r = 8k+4.
    R4IdentityBlock,
}

impl ClosedFormCase {
    pub const ALL: [ClosedFormCase; 6] = [
        ClosedFormCase::R0IdentityBlock,
        ClosedFormCase::R0RotatedBlock,
        ClosedFormCase::R2Delta2,
        ClosedFormCase::R6Delta2,
        ClosedFormCase::R4MovingBlock,
        ClosedFormCase::R4IdentityBlock,
    ];

    /// Smallest k for which the identity is meaningful.
    pub fn min_k(self) -> i64 {
        match self {
            ClosedFormCase::R6Delta2 | ClosedFormCase::R4MovingBlock | ClosedFormCase::R4IdentityBlock => 0,
            _ => 1,
        }
    }
}

/// Brute-force binomial sum and closed form of one identity at k.
pub fn closed_form_sides(k: i64, case: ClosedFormCase) -> Result<(R, R)> {
    if k < case.min_k() || k > 16 {
        return Err(Error::InvalidParams(format!("k = {k} outside the range of {case:?}")));
    }
    let ki = k as i128;
    let sum = |range: std::ops::Range<i64>, f: &dyn Fn(i64) -> i128| -> R { R::from_integer(range.map(f).sum()) };
    Ok(match case {
        ClosedFormCase::R0IdentityBlock => (
            sum(0..k, &|j| (ki - j as i128) * c(4 * k, 2 * j)),
            R::new(ki * (2 * ki - 1) * c(4 * k, 2 * k), 8 * ki - 2),
        ),
        ClosedFormCase::R0RotatedBlock => (
            sum(0..2 * k, &|j| (ki - j as i128) * c(4 * k, 2 * j + 1)) / R::from_integer(2),
            R::from_integer(pow2(4 * k - 3)?),
        ),
        ClosedFormCase::R2Delta2 => (
            sum(0..2 * k + 1, &|j| (ki - j as i128) * c(4 * k + 1, 2 * j)),
            R::from_integer(-pow2(4 * k - 2)?),
        ),
        ClosedFormCase::R6Delta2 => (
            sum(0..2 * k + 2, &|j| (ki + 1 - j as i128) * c(4 * k + 3, 2 * j)),
            R::from_integer(pow2(4 * k)?),
        ),
        ClosedFormCase::R4MovingBlock => (
            sum(0..2 * k + 2, &|j| (ki + 1 - j as i128) * c(4 * k + 2, 2 * j)),
            R::from_integer(16i128.pow(k as u32)),
        ),
        ClosedFormCase::R4IdentityBlock => (
            sum(0..k, &|j| (ki - j as i128) * c(4 * k + 2, 2 * j + 1)) * R::from_integer(2),
            R::new(2 * ki * (2 * ki + 1) * c(4 * k + 2, 2 * k + 1), 8 * ki + 2),
        ),
    })
}

/// True when the brute-force sum equals the closed form.
pub fn closed_form_check(k: i64, case: ClosedFormCase) -> bool {
    closed_form_sides(k, case).map(|(a, b)| a == b).unwrap_or(false)
}

fn closed_value(k: i64, case: ClosedFormCase) -> Result<i128> {
    let (_, rhs) = closed_form_sides(k, case)?;
    if !rhs.is_integer() {
        return Err(Error::Internal(format!("closed form {case:?} at k = {k} is {rhs}")));
    }
    Ok(rhs.to_integer())
}

/// Closed-form winding count of a loop and the expression it came from.
pub fn closed_form(p: &CliffordParams, case_id: &str) -> Result<(i64, String)> {
    let r = p.r as i64;
    let h = r / 2;
    let (m1, m2) = match p.mult {
        Multiplicity::Single(m) => (m as i128, 0),
        Multiplicity::Pair(a, b) => (a as i128, b as i128),
    };
    let m = m1 + m2;
    let unknown = || Error::InvalidParams(format!("no closed form for {case_id} at {p}"));
    let (v, expr): (i128, String) = match (p.r_mod8(), case_id) {
        (1 | 7, "delta1") => (pow2(h)?, format!("2^{h}")),
        (1 | 7, "delta2") => (m * pow2(h - 2)?, format!("{m} * 2^{}", h - 2)),
        (1 | 7, "delta3") => (pow2(h - 1)?, format!("2^{}", h - 1)),
        (0, id) => {
            let k = r / 8;
            let a = closed_value(k, ClosedFormCase::R0IdentityBlock)?;
            let b = closed_value(k, ClosedFormCase::R0RotatedBlock)?;
            let a_expr = format!("{k}(2*{k}-1)/(8*{k}-2) C({},{})", 4 * k, 2 * k);
            let b_expr = format!("2^{}", 4 * k - 3);
            match id {
                "delta1" | "delta2" => (pow2(4 * k - 1)?, format!("2^{}", 4 * k - 1)),
                "delta3" => (m1 * a + m2 * b, format!("{m1} * {a_expr} + {m2} * {b_expr}")),
                "delta4" => (m1 * b + m2 * a, format!("{m1} * {b_expr} + {m2} * {a_expr}")),
                "delta5" => (m * a, format!("{m} * {a_expr}")),
                "delta6" => (m * b, format!("{m} * {b_expr}")),
                _ => return Err(unknown()),
            }
        }
        (2 | 6, "delta1") => (pow2(h - 1)?, format!("2^{}", h - 1)),
        (2, "delta2") => {
            let k = (r - 2) / 8;
            (m * closed_value(k, ClosedFormCase::R2Delta2)?, format!("-{m} * 2^{}", 4 * k - 2))
        }
        (6, "delta2") => {
            let k = (r - 6) / 8;
            (m * closed_value(k, ClosedFormCase::R6Delta2)?, format!("{m} * 2^{}", 4 * k))
        }
        (3 | 5, "delta") => (m * pow2(h - 1)?, format!("{m} * 2^{}", h - 1)),
        (4, id) => {
            let k = (r - 4) / 8;
            let a = closed_value(k, ClosedFormCase::R4MovingBlock)?;
            let b = closed_value(k, ClosedFormCase::R4IdentityBlock)?;
            let b_expr = format!("2*{k}(2*{k}+1)/(8*{k}+2) C({},{})", 4 * k + 2, 2 * k + 1);
            match id {
                "delta1" => (m * pow2(h - 2)?, format!("({m1}+{m2}) * 2^{}", h - 2)),
                "delta2" => (m2 * a + m1 * b, format!("{m2} * 16^{k} + {m1} * {b_expr}")),
                "delta3" | "delta4" => (m * pow2(h - 2)?, format!("{m} * 2^{}", h - 2)),
                "delta5" | "delta6" => (m * a, format!("{m} * 16^{k}")),
                _ => return Err(unknown()),
            }
        }
        _ => return Err(unknown()),
    };
    Ok((v as i64, expr))
}

/// Winding of one generator loop, three ways.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Winding {
    pub case_id: String,
    pub endpoint: String,
    /// Sum of frequencies over a half of the complexification, from weights.
    pub combinatorial: i64,
    /// The same sum from explicit Kronecker generators and kappa matrices.
    pub matrix: i64,
    /// Closed-form value; equal to the others up to sign.
    pub closed_form: i64,
    pub closed_form_expr: String,
    /// Class in pi_1(SO(N)) = Z_2.
    pub parity: u8,
}

/// Counts a loop three ways; any disagreement is a hard error.
pub fn loop_winding(p: &CliffordParams, l: &GeneratorLoop) -> Result<Winding> {
    let disagree = |what: &str, a: String, b: String| Error::OracleDisagreement {
        context: format!("{} at {p}: {what}", l.case_id),
        left: a,
        right: b,
    };
    let comb = loop_signed_count(&l.spec)?;
    let matrix = matrix_signed_count(&l.matrix_spec)?;
    if comb != matrix {
        return Err(disagree("weight count vs matrix count", comb.to_string(), matrix.to_string()));
    }
    let freqs = loop_frequencies(&l.spec)?;
    let oracle = matrix_frequency_oracle(&l.matrix_spec.generator_matrix()?)?;
    if freqs != oracle {
        return Err(disagree("frequency multisets", freqs.to_string(), oracle.to_string()));
    }
    let parity = comb.rem_euclid(2) as u8;
    if freqs.total() % 2 != parity as u64 {
        return Err(disagree("parity of frequencies", freqs.total().to_string(), comb.to_string()));
    }
    let (closed, expr) = closed_form(p, &l.case_id)?;
    if closed.abs() != comb.abs() {
        return Err(disagree("count vs closed form", comb.to_string(), format!("{closed} = {expr}")));
    }
    Ok(Winding {
        case_id: l.case_id.clone(),
        endpoint: l.endpoint.to_string(),
        combinatorial: comb,
        matrix,
        closed_form: closed,
        closed_form_expr: expr,
        parity,
    })
}

/// Tabulated lift condition: r = 1, 7 (mod 8) always; otherwise always
/// above the smallest rank of the class, and at r = 3, 6 (m even) and
/// r = 4, 8 (m1, m2 even) only with even multiplicities.
pub fn expected_lift(p: &CliffordParams) -> bool {
    let even = |m: usize| m.is_multiple_of(2);
    match (p.r, p.mult) {
        (3 | 6, Multiplicity::Single(m)) => even(m),
        (4 | 8, Multiplicity::Pair(a, b)) => even(a) && even(b),
        _ => true,
    }
}

/// Exponent e with 2^e dividing every quaternionic winding 2^{[r/2]-1} m.
pub fn quaternionic_exponent(r: usize) -> Result<u32> {
    if !matches!(r % 8, 3 | 5) {
        return Err(Error::WrongResidue(r));
    }
    Ok((r / 2 - 1) as u32)
}

/// Lift verdict with the per-generator windings behind it.
#[derive(Debug, Clone)]
pub struct LiftVerdict {
    pub params: CliffordParams,
    pub pi1: String,
    pub windings: Vec<Winding>,
    /// Every generator loop has even winding.
    pub exists: bool,
    pub expected: bool,
    /// Set when the verdict and the tabulated condition part ways in a
    /// case where the table is known to be stated too broadly.
    pub tension: Option<String>,
    pub discrepancies: Vec<Discrepancy>,
}

/// Multiplicity as it appears in JSON: an integer or [m1, m2].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultiplicityJson {
    Single(usize),
    Pair([usize; 2]),
}

impl From<Multiplicity> for MultiplicityJson {
    fn from(m: Multiplicity) -> Self {
        match m {
            Multiplicity::Single(m) => MultiplicityJson::Single(m),
            Multiplicity::Pair(a, b) => MultiplicityJson::Pair([a, b]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub name: String,
    pub endpoint: String,
    pub count: i64,
    pub parity: u8,
}

/// Serializable verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftVerdictJson {
    pub r: usize,
    pub m: MultiplicityJson,
    #[serde(rename = "N")]
    pub n: usize,
    pub generators: Vec<GeneratorJson>,
    pub lift: bool,
    pub expected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tension: Option<String>,
}

impl LiftVerdict {
    pub fn summary(&self) -> LiftVerdictJson {
        LiftVerdictJson {
            r: self.params.r,
            m: self.params.mult.into(),
            n: self.params.n(),
            generators: self
                .windings
                .iter()
                .map(|w| GeneratorJson {
                    name: w.case_id.clone(),
                    endpoint: w.endpoint.clone(),
                    count: w.combinatorial,
                    parity: w.parity,
                })
                .collect(),
            lift: self.exists,
            expected: self.expected,
            tension: self.tension.clone(),
        }
    }
}

/// Decides whether the structure group lifts to Spin(N).
pub fn lift_exists(p: &CliffordParams) -> Result<LiftVerdict> {
    if p.r < 3 {
        return Err(Error::InvalidParams(format!("lift check needs r >= 3, got {}", p.r)));
    }
    let kernel = kernel_of_rho(p)?;
    let pi = pi1_from_kernel(p, &kernel)?;
    lift_from_pi1(p, &pi)
}

/// As [`lift_exists`], reusing a computed fundamental group.
pub fn lift_from_pi1(p: &CliffordParams, pi: &Pi1Result) -> Result<LiftVerdict> {
    if p.n() < 3 {
        return Err(Error::InvalidParams(format!("pi_1(SO(N)) = Z_2 needs N >= 3, got {}", p.n())));
    }
    let loops = loops_for(p, pi)?;
    let windings: Vec<Winding> = loops.iter().map(|l| loop_winding(p, l)).collect::<Result<_>>()?;
    if matches!(p.r_mod8(), 3 | 5) {
        let e = quaternionic_exponent(p.r)?;
        for w in &windings {
            if w.combinatorial.rem_euclid(1 << e) != 0 {
                return Err(Error::Internal(format!(
                    "{} winding {} is not divisible by 2^{e}",
                    w.case_id, w.combinatorial
                )));
            }
            if p.r >= 5 && (e < 1 || w.parity != 0) {
                return Err(Error::Internal(format!("{} winding at r = {} is odd", w.case_id, p.r)));
            }
        }
    }
    let exists = windings.iter().all(|w| w.parity == 0);
    let expected = expected_lift(p);
    let mut discrepancies = vec![];
    let mut tension = None;
    if exists != expected {
        discrepancies.push(Discrepancy {
            context: format!("lift to Spin(N) for {p}"),
            computed: exists.to_string(),
            expected: expected.to_string(),
        });
        if p.r == 8 {
            if let Some((m1, m2)) = p.pair_values() {
                if m1 % 2 == 1 && m2 % 2 == 1 {
                    tension = Some(format!(
                        "r = 8 with m1, m2 both odd: pi_1 = {} and every generator loop has even winding, \
                         so a lift exists although the tabulated condition asks for m1, m2 even",
                        pi.invariants
                    ));
                }
            }
        }
    }
    Ok(LiftVerdict {
        params: *p,
        pi1: pi.invariants.to_string(),
        windings,
        exists,
        expected,
        tension,
        discrepancies,
    })
}
