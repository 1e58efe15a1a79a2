//! Structure groups as explicit finite quotients of products of classical
//! groups with Spin(r), and their fundamental groups. Kernels come from exact
//! image tests; fundamental groups from lifting the kernel to the universal
//! cover and running finite-group arithmetic on the torsion part.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::blade_algebra::{group_closure, group_closure_of, volume_element, AbelianGroup, GroupElement, GroupTable, Mv, Q};
use crate::clifford_structures::{make_structure, CliffordParams, CliffordStructure, StructureBlock};
use crate::error::{Error, Result};
use crate::linalg::{integer_kernel, lattice_normal_form};
use crate::spin_rep::{quaternionic_triple, Chirality, ExactMatrix, ExactScalar};

/// Bound on enumerated elements in covering-group closures.
const PI1_CLOSURE_GUARD: usize = 4096;

/// The exact center of Spin(r): {+-1} for r odd, {+-1, +-vol_r} for r even.
pub fn center_of_spin(r: usize) -> Result<Vec<Mv>> {
    if r < 3 {
        return Err(Error::InvalidParams(format!("center_of_spin needs r >= 3, got {r}")));
    }
    let one = Mv::one(r)?;
    let mut out = vec![one.clone(), -&one];
    if r.is_multiple_of(2) {
        let vol = volume_element(r)?;
        out.push(vol.clone());
        out.push(-&vol);
    }
    Ok(out)
}

/// Isomorphism type of Z(Spin(r)) certified by closure.
pub fn center_iso_type(r: usize) -> Result<AbelianGroup> {
    let table = group_closure(&center_of_spin(r)?)?;
    table
        .abelian_invariants()
        .ok_or_else(|| Error::Internal("center of Spin(r) is not abelian".into()))
}

/// Which Spin(3) of Spin(4) = Spin(3) x Spin(3) an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin3Side {
    Left,
    Right,
}

/// A factor group of the covering or quotient presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FactorGroup {
    SO(usize),
    U(usize),
    Sp(usize),
    Spin(usize),
    Spin3(Spin3Side),
}

impl fmt::Display for FactorGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorGroup::SO(m) => write!(f, "SO({m})"),
            FactorGroup::U(m) => write!(f, "U({m})"),
            FactorGroup::Sp(m) => write!(f, "Sp({m})"),
            FactorGroup::Spin(r) => write!(f, "Spin({r})"),
            FactorGroup::Spin3(_) => write!(f, "Spin(3)"),
        }
    }
}

/// One entry of a product element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorElement {
    /// +-Id_m in SO(m).
    Orth { m: usize, neg: bool },
    /// An element of Spin(m) covering SO(m), m >= 3.
    SpinCover { m: usize, elt: Mv },
    /// i^k Id_m in U(m).
    Unitary { m: usize, k: u8 },
    /// exp(2 pi i phase) Id_m in SU(m), phase in [0, 1).
    SpecialUnitary { m: usize, phase: Q },
    /// +-Id_2m in Sp(m).
    Symp { m: usize, neg: bool },
    /// A unit even element of Cl_r.
    Spin { r: usize, elt: Mv },
    /// An element of one Spin(3) factor of Spin(4), as an even element of Cl_3.
    Spin3 { side: Spin3Side, elt: Mv },
    /// A point of the real line covering SO(2) or the center of U(m), as a
    /// multiple of pi.
    Line { over_pi: Q },
}

fn frac(q: Q) -> Q {
    q - q.floor()
}

impl FactorElement {
    fn op(&self, o: &Self) -> Self {
        use FactorElement::*;
        match (self, o) {
            (Orth { m, neg: a }, Orth { neg: b, .. }) => Orth { m: *m, neg: a ^ b },
            (SpinCover { m, elt: a }, SpinCover { elt: b, .. }) => SpinCover { m: *m, elt: a * b },
            (Unitary { m, k: a }, Unitary { k: b, .. }) => Unitary { m: *m, k: (a + b) % 4 },
            (SpecialUnitary { m, phase: a }, SpecialUnitary { phase: b, .. }) => SpecialUnitary {
                m: *m,
                phase: frac(a + b),
            },
            (Symp { m, neg: a }, Symp { neg: b, .. }) => Symp { m: *m, neg: a ^ b },
            (Spin { r, elt: a }, Spin { elt: b, .. }) => Spin { r: *r, elt: a * b },
            (Spin3 { side, elt: a }, Spin3 { elt: b, .. }) => Spin3 { side: *side, elt: a * b },
            (Line { over_pi: a }, Line { over_pi: b }) => Line { over_pi: a + b },
            _ => panic!("mismatched factor kinds {self:?} and {o:?}"),
        }
    }

    fn is_line(&self) -> bool {
        matches!(self, FactorElement::Line { .. })
    }
}

fn pi_multiple(q: Q) -> String {
    if q.is_zero() {
        return "0".into();
    }
    let num = match *q.numer() {
        1 => "pi".to_string(),
        -1 => "-pi".to_string(),
        n => format!("{n}pi"),
    };
    if *q.denom() == 1 {
        num
    } else {
        format!("{num}/{}", q.denom())
    }
}

impl fmt::Display for FactorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use FactorElement::*;
        let sign = |neg: &bool| if *neg { "-" } else { "" };
        match self {
            Orth { m, neg } => write!(f, "{}Id_{m}", sign(neg)),
            SpinCover { elt, .. } | Spin { elt, .. } => write!(f, "{elt}"),
            Unitary { m, k } => write!(f, "{}Id_{m}", ["", "i", "-", "-i"][*k as usize % 4]),
            SpecialUnitary { m, phase } => {
                if phase.is_zero() {
                    write!(f, "Id_{m}")
                } else {
                    write!(f, "exp(2pi i {phase})Id_{m}")
                }
            }
            Symp { m, neg } => write!(f, "{}Id_{}", sign(neg), 2 * m),
            Spin3 { side, elt } => match side {
                Spin3Side::Left => write!(f, "({elt},1)"),
                Spin3Side::Right => write!(f, "(1,{elt})"),
            },
            Line { over_pi } => write!(f, "{}", pi_multiple(*over_pi)),
        }
    }
}

/// An element of a product group, one entry per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProductElement {
    pub factors: Vec<FactorElement>,
}

impl GroupElement for ProductElement {
    fn op(&self, o: &Self) -> Self {
        ProductElement {
            factors: self.factors.iter().zip(&o.factors).map(|(a, b)| a.op(b)).collect(),
        }
    }
}

impl fmt::Display for ProductElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl ProductElement {
    /// Line coordinates (multiples of pi), in factor order.
    pub fn line_coordinates(&self) -> Vec<Q> {
        self.factors
            .iter()
            .filter_map(|x| match x {
                FactorElement::Line { over_pi } => Some(*over_pi),
                _ => None,
            })
            .collect()
    }

    pub fn has_line_part(&self) -> bool {
        self.line_coordinates().iter().any(|q| !q.is_zero())
    }

    /// The element with every line coordinate set to zero.
    pub fn compact_part(&self) -> Self {
        ProductElement {
            factors: self
                .factors
                .iter()
                .map(|x| {
                    if x.is_line() {
                        FactorElement::Line { over_pi: Q::zero() }
                    } else {
                        x.clone()
                    }
                })
                .collect(),
        }
    }

    pub fn identity_like(&self) -> Self {
        ProductElement {
            factors: self.factors.iter().map(identity_factor).collect(),
        }
    }

    /// self^e for e >= 0.
    pub fn pow(&self, e: u64) -> Self {
        let mut acc = self.identity_like();
        for _ in 0..e {
            acc = acc.op(self);
        }
        acc
    }
}

fn identity_factor(x: &FactorElement) -> FactorElement {
    use FactorElement::*;
    match x {
        Orth { m, .. } => Orth { m: *m, neg: false },
        SpinCover { m, .. } => SpinCover {
            m: *m,
            elt: Mv::one(*m).expect("valid dimension"),
        },
        Unitary { m, .. } => Unitary { m: *m, k: 0 },
        SpecialUnitary { m, .. } => SpecialUnitary { m: *m, phase: Q::zero() },
        Symp { m, .. } => Symp { m: *m, neg: false },
        Spin { r, .. } => Spin {
            r: *r,
            elt: Mv::one(*r).expect("valid dimension"),
        },
        Spin3 { side, .. } => Spin3 {
            side: *side,
            elt: Mv::one(3).expect("valid dimension"),
        },
        Line { .. } => Line { over_pi: Q::zero() },
    }
}

/// A computed-versus-reference mismatch, reported rather than resolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub context: String,
    pub computed: String,
    pub expected: String,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: computed {} but expected {}", self.context, self.computed, self.expected)
    }
}

/// The central element s * vol^v of Spin(r).
fn central(r: usize, neg: bool, vol: bool) -> Mv {
    let base = if vol {
        volume_element(r).expect("valid dimension")
    } else {
        Mv::one(r).expect("valid dimension")
    };
    if neg {
        -&base
    } else {
        base
    }
}

/// Outer (non-spin) factor groups, one per nonzero block, in block order.
pub fn outer_factors(p: &CliffordParams) -> Vec<FactorGroup> {
    p.blocks()
        .into_iter()
        .filter(|(m, _)| *m > 0)
        .map(|(m, _)| match p.r_mod8() {
            1 | 7 | 0 => FactorGroup::SO(m),
            2 | 6 => FactorGroup::U(m),
            _ => FactorGroup::Sp(m),
        })
        .collect()
}

/// True when r = 4 and one multiplicity vanishes, so that one Spin(3) factor
/// of Spin(4) acts trivially.
pub fn spin4_collapses(p: &CliffordParams) -> bool {
    p.r == 4 && matches!(p.pair_values(), Some((0, _)) | Some((_, 0)))
}

/// The Spin(3) factor of Spin(4) that survives a collapse. The vol_4 = +1
/// block (m1) sees the factor containing (1,-1) = -vol_4.
fn surviving_side(p: &CliffordParams) -> Spin3Side {
    match p.pair_values() {
        Some((_, 0)) => Spin3Side::Right,
        _ => Spin3Side::Left,
    }
}

/// Image of a central element of Spin(4) in the surviving Spin(3), using
/// vol_4 = (-1, 1) and -vol_4 = (1, -1).
pub fn collapse_central(z: &Mv, side: Spin3Side) -> Result<Mv> {
    let one = Mv::one(4)?;
    let vol = volume_element(4)?;
    let (left, right) = if *z == one {
        (1, 1)
    } else if *z == -&one {
        (-1, -1)
    } else if *z == vol {
        (-1, 1)
    } else if *z == -&vol {
        (1, -1)
    } else {
        return Err(Error::InvalidParams(format!("{z} is not central in Spin(4)")));
    };
    let s = match side {
        Spin3Side::Left => left,
        Spin3Side::Right => right,
    };
    Mv::scalar(3, Q::from_integer(s))
}

fn outer_scalar(g: FactorGroup, code: u8) -> FactorElement {
    match g {
        FactorGroup::SO(m) => FactorElement::Orth { m, neg: code == 1 },
        FactorGroup::U(m) => FactorElement::Unitary { m, k: code },
        FactorGroup::Sp(m) => FactorElement::Symp { m, neg: code == 1 },
        _ => unreachable!("outer factors are classical"),
    }
}

/// Scalar codes allowed in the candidate search: +-Id (with -Id in SO(m)
/// only for m even), i^k in U(m).
fn scalar_codes(g: FactorGroup) -> Vec<u8> {
    match g {
        FactorGroup::SO(m) if m % 2 == 1 => vec![0],
        FactorGroup::U(_) => vec![0, 1, 2, 3],
        _ => vec![0, 1],
    }
}

/// Real matrices of the unit scalars 1, I (, J, K) acting on one block's
/// irreducible module and commuting with kappa~.
fn block_units(p: &CliffordParams, block: &StructureBlock) -> Result<Vec<ExactMatrix>> {
    let d = block.form.dim();
    let id = ExactMatrix::identity(d);
    match p.r_mod8() {
        2 | 6 => {
            let i = block
                .form
                .realify(&ExactMatrix::scalar_identity(block.form.ambient.dim(), ExactScalar::I))?;
            // C^m pairs with Delta^+ for r = 2 and Cbar^m does for r = 6.
            let i = if p.r_mod8() == 2 { i } else { -&i };
            Ok(vec![id, i])
        }
        3..=5 => {
            let (form, t) = quaternionic_triple(p.r, block.form.chirality)?;
            if form.frame != block.form.frame {
                return Err(Error::Internal("quaternionic triple built on a different frame".into()));
            }
            Ok(vec![id, t.i, t.j, t.k])
        }
        _ => Ok(vec![id]),
    }
}

/// Real matrix of kappa(z) on one block's irreducible module.
fn block_kappa(block: &StructureBlock, z: &Mv) -> Result<ExactMatrix> {
    let amb = &block.form.ambient;
    block.form.realify(&amb.kappa(&z.embed(amb.n())?)?)
}

fn outer_block_matrix(x: &FactorElement, units: &[ExactMatrix]) -> Result<ExactMatrix> {
    let id = &units[0];
    Ok(match x {
        FactorElement::Orth { neg, .. } | FactorElement::Symp { neg, .. } => {
            if *neg {
                -id
            } else {
                id.clone()
            }
        }
        FactorElement::Unitary { k, .. } => {
            let i = units
                .get(1)
                .ok_or_else(|| Error::Internal("unitary factor without a complex structure".into()))?;
            let mut acc = id.clone();
            for _ in 0..*k {
                acc = &acc * i;
            }
            acc
        }
        other => return Err(Error::InvalidParams(format!("{other} is not an outer scalar"))),
    })
}

/// The list of kernel elements of rho with their verification status.
#[derive(Debug, Clone)]
pub struct KernelPresentation {
    pub params: CliffordParams,
    /// Factor groups of the domain of rho, spin factor last.
    pub domain: Vec<FactorGroup>,
    pub elements: Vec<ProductElement>,
    pub generators: Vec<ProductElement>,
    pub order: usize,
    pub iso_type: AbelianGroup,
    /// Every element's N x N image was checked to be Id_N exactly.
    pub verified_identity: bool,
    /// For r = 4 with a vanishing multiplicity: the kernel before dividing out
    /// the Spin(3) factor acting trivially.
    pub uncollapsed: Option<Vec<ProductElement>>,
    pub discrepancies: Vec<Discrepancy>,
}

/// Elements in order of appearance, generated greedily.
fn minimal_generators(elements: &[ProductElement]) -> Result<Vec<ProductElement>> {
    let Some(first) = elements.first() else {
        return Ok(vec![]);
    };
    let identity = first.identity_like();
    let mut gens: Vec<ProductElement> = vec![];
    let mut span: BTreeSet<String> = BTreeSet::from([identity.to_string()]);
    for e in elements {
        if span.contains(&e.to_string()) {
            continue;
        }
        gens.push(e.clone());
        let table = group_closure_of(identity.clone(), &gens, PI1_CLOSURE_GUARD)?;
        span = table.elements.iter().map(|x| x.to_string()).collect();
    }
    Ok(gens)
}

fn iso_type_of(elements: &[ProductElement]) -> Result<(usize, AbelianGroup)> {
    let Some(first) = elements.first() else {
        return Ok((1, AbelianGroup::trivial()));
    };
    let table = group_closure_of(first.identity_like(), elements, PI1_CLOSURE_GUARD)?;
    let iso = table
        .abelian_invariants()
        .ok_or_else(|| Error::Internal("kernel is not abelian".into()))?;
    Ok((table.order(), iso))
}

/// ker(rho) by exact image tests over (outer scalars) x Z(Spin(r)).
pub fn kernel_of_rho(p: &CliffordParams) -> Result<KernelPresentation> {
    if p.r < 3 {
        return Err(Error::InvalidParams(format!("kernel_of_rho needs r >= 3, got {}", p.r)));
    }
    let s = make_structure(p)?;
    kernel_with_structure(p, &s)
}

fn kernel_with_structure(p: &CliffordParams, s: &CliffordStructure) -> Result<KernelPresentation> {
    let outer = outer_factors(p);
    let blocks: Vec<&StructureBlock> = s.blocks.iter().filter(|b| b.mult > 0).collect();
    let units: Vec<Vec<ExactMatrix>> = blocks.iter().map(|b| block_units(p, b)).collect::<Result<_>>()?;
    let center = center_of_spin(p.r)?;
    let kappas: Vec<Vec<ExactMatrix>> = blocks
        .iter()
        .map(|b| center.iter().map(|z| block_kappa(b, z)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let mut combos: Vec<Vec<u8>> = vec![vec![]];
    for g in &outer {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                scalar_codes(*g).into_iter().map(move |x| {
                    let mut c = c.clone();
                    c.push(x);
                    c
                })
            })
            .collect();
    }

    let mut found = vec![];
    let mut verified = true;
    for codes in &combos {
        let scalars: Vec<FactorElement> = outer.iter().zip(codes).map(|(g, c)| outer_scalar(*g, *c)).collect();
        for (zi, z) in center.iter().enumerate() {
            let mut per_block = vec![];
            let mut trivial = true;
            for (bi, x) in scalars.iter().enumerate() {
                let img = &outer_block_matrix(x, &units[bi])? * &kappas[bi][zi];
                trivial &= img.is_identity();
                per_block.push(img);
            }
            if !trivial {
                continue;
            }
            let parts: Vec<ExactMatrix> = blocks
                .iter()
                .zip(&per_block)
                .map(|(b, img)| ExactMatrix::identity(b.mult).kron(img))
                .collect();
            verified &= ExactMatrix::direct_sum(&parts).is_identity();
            let mut factors = scalars.clone();
            factors.push(FactorElement::Spin { r: p.r, elt: z.clone() });
            found.push(ProductElement { factors });
        }
    }

    let mut domain = outer.clone();
    let (elements, uncollapsed) = if spin4_collapses(p) {
        let side = surviving_side(p);
        domain.push(FactorGroup::Spin3(side));
        let mut reduced: Vec<ProductElement> = vec![];
        for e in &found {
            let mut factors = e.factors.clone();
            if let Some(FactorElement::Spin { elt, .. }) = factors.pop() {
                factors.push(FactorElement::Spin3 {
                    side,
                    elt: collapse_central(&elt, side)?,
                });
            }
            let e = ProductElement { factors };
            if !reduced.contains(&e) {
                reduced.push(e);
            }
        }
        (reduced, Some(found))
    } else {
        domain.push(FactorGroup::Spin(p.r));
        (found, None)
    };

    let generators = minimal_generators(&elements)?;
    let (order, iso_type) = iso_type_of(&elements)?;
    let mut k = KernelPresentation {
        params: *p,
        domain,
        elements,
        generators,
        order,
        iso_type,
        verified_identity: verified,
        uncollapsed,
        discrepancies: vec![],
    };
    let (_, denominator) = expected_quotient(p)?;
    if k.iso_type != denominator {
        k.discrepancies.push(Discrepancy {
            context: format!("kernel of rho for {p}"),
            computed: k.iso_type.to_string(),
            expected: denominator.to_string(),
        });
    }
    let listed = reference_kernel(p)?;
    let a: BTreeSet<String> = k.elements.iter().map(|e| e.to_string()).collect();
    let b: BTreeSet<String> = listed.iter().map(|e| e.to_string()).collect();
    if a != b {
        k.discrepancies.push(Discrepancy {
            context: format!("kernel element list for {p}"),
            computed: format!("{a:?}"),
            expected: format!("{b:?}"),
        });
    }
    if !k.verified_identity {
        k.discrepancies.push(Discrepancy {
            context: format!("kernel image for {p}"),
            computed: "some N x N image differs from Id_N".into(),
            expected: "Id_N".into(),
        });
    }
    Ok(k)
}

/// The case lists of kernel elements derived by hand for each residue class.
pub fn reference_kernel(p: &CliffordParams) -> Result<Vec<ProductElement>> {
    let r = p.r;
    let spin = |neg: bool, vol: bool| FactorElement::Spin {
        r,
        elt: central(r, neg, vol),
    };
    let el = |factors: Vec<FactorElement>| ProductElement { factors };
    let out = match (p.r_mod8(), p.mult) {
        (1 | 7, _) => {
            let m = p.m().expect("single multiplicity");
            let o = |neg| FactorElement::Orth { m, neg };
            let mut v = vec![el(vec![o(false), spin(false, false)])];
            if m.is_multiple_of(2) {
                v.push(el(vec![o(true), spin(true, false)]));
            }
            v
        }
        (2 | 6, _) => {
            let m = p.m().expect("single multiplicity");
            let u = |k| FactorElement::Unitary { m, k };
            vec![
                el(vec![u(0), spin(false, false)]),
                el(vec![u(2), spin(true, false)]),
                el(vec![u(1), spin(true, true)]),
                el(vec![u(3), spin(false, true)]),
            ]
        }
        (3 | 5, _) => {
            let m = p.m().expect("single multiplicity");
            let s = |neg| FactorElement::Symp { m, neg };
            vec![el(vec![s(false), spin(false, false)]), el(vec![s(true), spin(true, false)])]
        }
        (0, _) => {
            let (m1, m2) = p.pair_values().expect("pair multiplicity");
            let o1 = |neg| FactorElement::Orth { m: m1, neg };
            let o2 = |neg| FactorElement::Orth { m: m2, neg };
            match (m1, m2) {
                (0, _) => {
                    let mut v = vec![el(vec![o2(false), spin(false, false)]), el(vec![o2(false), spin(true, true)])];
                    if m2 % 2 == 0 {
                        v.push(el(vec![o2(true), spin(true, false)]));
                        v.push(el(vec![o2(true), spin(false, true)]));
                    }
                    v
                }
                (_, 0) => {
                    let mut v = vec![el(vec![o1(false), spin(false, false)]), el(vec![o1(false), spin(false, true)])];
                    if m1 % 2 == 0 {
                        v.push(el(vec![o1(true), spin(true, false)]));
                        v.push(el(vec![o1(true), spin(true, true)]));
                    }
                    v
                }
                _ => {
                    let mut v = vec![el(vec![o1(false), o2(false), spin(false, false)])];
                    if m1 % 2 == 0 {
                        v.push(el(vec![o1(true), o2(false), spin(true, true)]));
                    }
                    if m2 % 2 == 0 {
                        v.push(el(vec![o1(false), o2(true), spin(false, true)]));
                    }
                    if m1 % 2 == 0 && m2 % 2 == 0 {
                        v.push(el(vec![o1(true), o2(true), spin(true, false)]));
                    }
                    v
                }
            }
        }
        (4, _) => {
            let (m1, m2) = p.pair_values().expect("pair multiplicity");
            let s1 = |neg| FactorElement::Symp { m: m1, neg };
            let s2 = |neg| FactorElement::Symp { m: m2, neg };
            let pair3 = |side, neg: bool| FactorElement::Spin3 {
                side,
                elt: Mv::scalar(3, Q::from_integer(if neg { -1 } else { 1 })).expect("valid dimension"),
            };
            match (m1, m2) {
                (_, 0) if r == 4 => vec![
                    el(vec![s1(false), pair3(Spin3Side::Right, false)]),
                    el(vec![s1(true), pair3(Spin3Side::Right, true)]),
                ],
                (0, _) if r == 4 => vec![
                    el(vec![s2(false), pair3(Spin3Side::Left, false)]),
                    el(vec![s2(true), pair3(Spin3Side::Left, true)]),
                ],
                (_, 0) => vec![
                    el(vec![s1(false), spin(false, false)]),
                    el(vec![s1(false), spin(false, true)]),
                    el(vec![s1(true), spin(true, false)]),
                    el(vec![s1(true), spin(true, true)]),
                ],
                (0, _) => vec![
                    el(vec![s2(false), spin(false, false)]),
                    el(vec![s2(false), spin(true, true)]),
                    el(vec![s2(true), spin(true, false)]),
                    el(vec![s2(true), spin(false, true)]),
                ],
                _ => vec![
                    el(vec![s1(false), s2(false), spin(false, false)]),
                    el(vec![s1(true), s2(true), spin(true, false)]),
                    el(vec![s1(false), s2(true), spin(false, true)]),
                    el(vec![s1(true), s2(false), spin(true, true)]),
                ],
            }
        }
        _ => return Err(Error::WrongResidue(r)),
    };
    Ok(out)
}

/// Factor groups and the isomorphism type of the finite denominator, as
/// tabulated for the connected normalizer.
pub fn expected_quotient(p: &CliffordParams) -> Result<(Vec<FactorGroup>, AbelianGroup)> {
    if p.r < 3 {
        return Err(Error::InvalidParams(format!("structure groups need r >= 3, got {}", p.r)));
    }
    let mut factors = outer_factors(p);
    let z2 = || AbelianGroup::new(0, [2]);
    let z2z2 = || AbelianGroup::new(0, [2, 2]);
    let denom = match p.r_mod8() {
        1 | 7 => {
            if p.m().expect("single").is_multiple_of(2) {
                z2()
            } else {
                AbelianGroup::trivial()
            }
        }
        0 => match p.pair_values().expect("pair") {
            (0, m) | (m, 0) => {
                if m % 2 == 0 {
                    z2z2()
                } else {
                    z2()
                }
            }
            (a, b) => match (a % 2, b % 2) {
                (1, 1) => AbelianGroup::trivial(),
                (0, 0) => z2z2(),
                _ => z2(),
            },
        },
        2 | 6 => AbelianGroup::new(0, [4]),
        3 | 5 => z2(),
        _ => {
            if spin4_collapses(p) {
                z2()
            } else {
                z2z2()
            }
        }
    };
    factors.push(if spin4_collapses(p) {
        FactorGroup::Spin3(surviving_side(p))
    } else {
        FactorGroup::Spin(p.r)
    });
    Ok((factors, denom))
}

/// The connected normalizer as an explicit quotient.
#[derive(Debug, Clone)]
pub struct QuotientDescription {
    pub params: CliffordParams,
    pub factor_groups: Vec<FactorGroup>,
    pub kernel: KernelPresentation,
    /// Which image of Spin(r) the group normalizes.
    pub image: String,
    pub discrepancies: Vec<Discrepancy>,
}

impl QuotientDescription {
    /// "(Sp(2) x Spin(3))/Z2", or the bare product when the kernel is trivial.
    pub fn label(&self) -> String {
        let prod: Vec<String> = self.factor_groups.iter().map(|g| g.to_string()).collect();
        let prod = prod.join(" x ");
        let k = &self.kernel.iso_type;
        match k.summands().len() {
            0 => prod,
            1 => format!("({prod})/{k}"),
            _ => format!("({prod})/({k})"),
        }
    }

    pub fn summary(&self) -> QuotientSummary {
        QuotientSummary {
            group: self.label(),
            factor_groups: self.factor_groups.iter().map(|g| g.to_string()).collect(),
            image: self.image.clone(),
            kernel: KernelSummary {
                elements: self.kernel.elements.iter().map(|e| e.to_string()).collect(),
                generators: self.kernel.generators.iter().map(|e| e.to_string()).collect(),
                order: self.kernel.order,
                iso_type: self.kernel.iso_type.to_string(),
                verified_identity: self.kernel.verified_identity,
            },
        }
    }
}

/// Serializable view of a kernel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub elements: Vec<String>,
    pub generators: Vec<String>,
    pub order: usize,
    pub iso_type: String,
    pub verified_identity: bool,
}

/// Serializable view of a structure group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub group: String,
    pub factor_groups: Vec<String>,
    pub image: String,
    pub kernel: KernelSummary,
}

fn image_label(p: &CliffordParams) -> String {
    match p.pair_values() {
        Some((_, 0)) if p.r_mod8() == 0 => format!("Spin({})^+", p.r),
        Some((0, _)) if p.r_mod8() == 0 => format!("Spin({})^-", p.r),
        Some((_, 0)) => format!("Spin({})^-", p.r),
        Some((0, _)) => format!("Spin({})^+", p.r),
        _ => format!("Spin({})", p.r),
    }
}

/// The connected normalizer with its kernel, checked against the table.
pub fn structure_group(p: &CliffordParams) -> Result<QuotientDescription> {
    let kernel = kernel_of_rho(p)?;
    let (factor_groups, _) = expected_quotient(p)?;
    let discrepancies = kernel.discrepancies.clone();
    Ok(QuotientDescription {
        params: *p,
        factor_groups,
        kernel,
        image: image_label(p),
        discrepancies,
    })
}

/// One generator of the fundamental group inside the covering product.
#[derive(Debug, Clone)]
pub struct Pi1Generator {
    pub element: ProductElement,
    /// Finite order, or None when a line coordinate is nonzero.
    pub order: Option<u64>,
    /// "lift" for a lifted kernel element, "fiber" for a covering deck element.
    pub origin: &'static str,
}

/// Fundamental group of the connected normalizer.
#[derive(Debug, Clone)]
pub struct Pi1Result {
    pub params: CliffordParams,
    /// Factors of the universal cover.
    pub cover: Vec<String>,
    pub invariants: AbelianGroup,
    pub generators: Vec<Pi1Generator>,
    /// Generators of the torsion subgroup (elements with zero line part).
    pub torsion_generators: Vec<ProductElement>,
    pub expected: AbelianGroup,
    pub discrepancies: Vec<Discrepancy>,
}

/// Serializable view of a fundamental group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi1Summary {
    pub group: String,
    pub invariants: Vec<String>,
    pub cover: Vec<String>,
    pub generators: Vec<Pi1GeneratorSummary>,
    pub torsion_generators: Vec<String>,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi1GeneratorSummary {
    pub element: String,
    /// Order, or null for an infinite-order generator.
    pub order: Option<u64>,
    pub origin: String,
}

impl Pi1Result {
    pub fn summary(&self) -> Pi1Summary {
        Pi1Summary {
            group: self.invariants.to_string(),
            invariants: self.invariants.summands(),
            cover: self.cover.clone(),
            generators: self
                .generators
                .iter()
                .map(|g| Pi1GeneratorSummary {
                    element: g.element.to_string(),
                    order: g.order,
                    origin: g.origin.to_string(),
                })
                .collect(),
            torsion_generators: self.torsion_generators.iter().map(|e| e.to_string()).collect(),
            expected: self.expected.to_string(),
        }
    }
}

/// Lift of a kernel factor to the universal cover of its factor group.
fn lift_factor(x: &FactorElement) -> Result<Vec<FactorElement>> {
    use FactorElement::*;
    Ok(match x {
        Orth { m, neg } if *m >= 3 => vec![SpinCover {
            m: *m,
            elt: if *neg { volume_element(*m)? } else { Mv::one(*m)? },
        }],
        Orth { m: 2, neg } => vec![Line {
            over_pi: if *neg { Q::one() } else { Q::zero() },
        }],
        Orth { m, .. } => vec![Orth { m: *m, neg: false }],
        Unitary { m, k } => vec![
            Line {
                over_pi: Q::new(*k as i64, 2),
            },
            SpecialUnitary { m: *m, phase: Q::zero() },
        ],
        other => vec![other.clone()],
    })
}

/// Generators of the deck group of the universal cover of one factor, as
/// full-length elements of the covering product.
fn fiber_generators(template: &[Vec<FactorElement>], outer: &[FactorGroup]) -> Result<Vec<ProductElement>> {
    let identity: Vec<FactorElement> = template.iter().flatten().map(identity_factor).collect();
    let mut out = vec![];
    let mut offset = 0;
    for (slot, g) in template.iter().zip(outer.iter().map(Some).chain(std::iter::repeat(None))) {
        let mut e = identity.clone();
        let deck: Option<Vec<FactorElement>> = match g {
            Some(FactorGroup::SO(m)) if *m >= 3 => Some(vec![FactorElement::SpinCover {
                m: *m,
                elt: -&Mv::one(*m)?,
            }]),
            Some(FactorGroup::SO(2)) => Some(vec![FactorElement::Line { over_pi: Q::from_integer(2) }]),
            Some(FactorGroup::U(m)) => Some(vec![
                FactorElement::Line {
                    over_pi: Q::new(2, *m as i64),
                },
                FactorElement::SpecialUnitary {
                    m: *m,
                    phase: frac(Q::new(-1, *m as i64)),
                },
            ]),
            _ => None,
        };
        if let Some(deck) = deck {
            for (i, x) in deck.into_iter().enumerate() {
                e[offset + i] = x;
            }
            out.push(ProductElement { factors: e });
        }
        offset += slot.len();
    }
    Ok(out)
}

fn element_order(e: &ProductElement) -> Result<u64> {
    let id = e.identity_like();
    let mut acc = e.clone();
    let mut k = 1u64;
    while acc != id {
        acc = acc.op(e);
        k += 1;
        if k as usize > PI1_CLOSURE_GUARD {
            return Err(Error::ClosureGuard(PI1_CLOSURE_GUARD));
        }
    }
    Ok(k)
}

fn cover_label(g: FactorGroup) -> Vec<String> {
    match g {
        FactorGroup::SO(m) if m >= 3 => vec![format!("Spin({m})")],
        FactorGroup::SO(2) => vec!["R".into()],
        FactorGroup::SO(m) => vec![format!("SO({m})")],
        FactorGroup::U(m) => vec!["R".into(), format!("SU({m})")],
        other => vec![other.to_string()],
    }
}

/// pi_1 as the preimage of ker(rho) in the universal cover: free rank from
/// the line coordinates, torsion from a closure over the integer relations
/// among them.
pub fn pi1(p: &CliffordParams) -> Result<Pi1Result> {
    let kernel = kernel_of_rho(p)?;
    pi1_from_kernel(p, &kernel)
}

pub fn pi1_from_kernel(p: &CliffordParams, kernel: &KernelPresentation) -> Result<Pi1Result> {
    let outer = outer_factors(p);
    let mut gens: Vec<Pi1Generator> = vec![];
    let mut template: Vec<Vec<FactorElement>> = vec![];
    for k in &kernel.generators {
        let slots: Vec<Vec<FactorElement>> = k.factors.iter().map(lift_factor).collect::<Result<_>>()?;
        if template.is_empty() {
            template = slots.clone();
        }
        gens.push(Pi1Generator {
            element: ProductElement {
                factors: slots.into_iter().flatten().collect(),
            },
            order: None,
            origin: "lift",
        });
    }
    if template.is_empty() {
        let ident = kernel
            .elements
            .first()
            .ok_or_else(|| Error::Internal("kernel has no identity".into()))?;
        template = ident.factors.iter().map(lift_factor).collect::<Result<_>>()?;
    }
    for e in fiber_generators(&template, &outer)? {
        gens.push(Pi1Generator {
            element: e,
            order: None,
            origin: "fiber",
        });
    }
    let cover: Vec<String> = outer
        .iter()
        .flat_map(|g| cover_label(*g))
        .chain(kernel.domain.last().map(|g| g.to_string()))
        .collect();

    for g in gens.iter_mut() {
        if !g.element.has_line_part() {
            g.order = Some(element_order(&g.element)?);
        }
    }

    let elements: Vec<ProductElement> = gens.iter().map(|g| g.element.clone()).collect();
    let (free_rank, torsion, mut torsion_generators) = if elements.is_empty() {
        (0, AbelianGroup::trivial(), vec![])
    } else {
        let span = Span::of(&elements)?;
        let torsion = span
            .torsion
            .abelian_invariants()
            .ok_or_else(|| Error::Internal("torsion subgroup is not abelian".into()))?;
        (span.lattice.len(), torsion, span.torsion_generators)
    };
    torsion_generators.retain(|t| *t != t.identity_like());
    prune_fibers(p, &mut gens);
    let invariants = AbelianGroup::new(free_rank, torsion.torsion.clone());
    let expected = expected_pi1(p)?;
    let mut discrepancies = kernel.discrepancies.clone();
    if invariants != expected {
        discrepancies.push(Discrepancy {
            context: format!("fundamental group for {p}"),
            computed: invariants.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(Pi1Result {
        params: *p,
        cover,
        invariants,
        generators: gens,
        torsion_generators,
        expected,
        discrepancies,
    })
}

/// A subgroup of a covering product generated by finitely many elements:
/// the lattice of line coordinates (scaled by `denom`) and the finite
/// subgroup of elements with zero line part.
struct Span {
    denom: i64,
    lattice: Vec<Vec<i128>>,
    torsion_generators: Vec<ProductElement>,
    torsion: GroupTable<ProductElement>,
}

impl Span {
    fn of(gens: &[ProductElement]) -> Result<Self> {
        let denom = gens
            .iter()
            .flat_map(|g| g.line_coordinates())
            .fold(1i64, |acc, q| acc.lcm(q.denom()));
        Self::with_denom(gens, denom)
    }

    fn with_denom(gens: &[ProductElement], denom: i64) -> Result<Self> {
        let first = gens
            .first()
            .ok_or_else(|| Error::Internal("empty generating set".into()))?;
        let int_lines: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| {
                g.line_coordinates()
                    .iter()
                    .map(|q| (*q.numer() * (denom / *q.denom())) as i128)
                    .collect()
            })
            .collect();
        let ncoords = int_lines.first().map_or(0, |v| v.len());
        let nonzero: Vec<Vec<i128>> = int_lines.iter().filter(|v| v.iter().any(|x| *x != 0)).cloned().collect();
        let lattice = if ncoords == 0 { vec![] } else { lattice_normal_form(&nonzero) };
        let compact: Vec<ProductElement> = gens.iter().map(|g| g.compact_part()).collect();
        let orders: Vec<u64> = compact.iter().map(element_order).collect::<Result<_>>()?;
        let identity = first.identity_like();
        let mut torsion_generators = vec![];
        for n in integer_kernel(&int_lines) {
            let mut acc = identity.clone();
            for ((c, &o), &ni) in compact.iter().zip(&orders).zip(&n) {
                acc = acc.op(&c.pow(ni.rem_euclid(o as i128) as u64));
            }
            torsion_generators.push(acc);
        }
        let torsion = group_closure_of(identity, &torsion_generators, PI1_CLOSURE_GUARD)?;
        Ok(Span {
            denom,
            lattice,
            torsion_generators,
            torsion,
        })
    }
}

/// True when two finite sets of covering-product elements generate the same
/// subgroup: equal line lattices and equal zero-line-part subgroups.
pub fn same_subgroup(a: &[ProductElement], b: &[ProductElement]) -> Result<bool> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return Ok(true),
        (true, false) | (false, true) => {
            let nonempty = if a.is_empty() { b } else { a };
            return Ok(nonempty.iter().all(|g| *g == g.identity_like()));
        }
        _ => {}
    }
    let both: Vec<ProductElement> = a.iter().chain(b).cloned().collect();
    let denom = Span::of(&both)?.denom;
    let sa = Span::with_denom(a, denom)?;
    let sb = Span::with_denom(b, denom)?;
    let set = |s: &Span| s.torsion.elements.iter().cloned().collect::<HashSet<ProductElement>>();
    Ok(sa.lattice == sb.lattice && set(&sa) == set(&sb))
}

/// Drops deck generators that are powers of a lifted generator, as in the
/// hand-picked generator lists. The unitary case keeps both, since its
/// deck loop is listed separately even when redundant.
fn prune_fibers(p: &CliffordParams, gens: &mut Vec<Pi1Generator>) {
    if matches!(p.r_mod8(), 2 | 6) {
        return;
    }
    let lifts: Vec<ProductElement> = gens
        .iter()
        .filter(|g| g.origin == "lift")
        .map(|g| g.element.clone())
        .collect();
    gens.retain(|g| g.origin != "fiber" || !lifts.iter().any(|l| (2..=4).any(|k| l.pow(k) == g.element)));
}

/// Real matrices of rho(e) on each block's irreducible module, for e in
/// (outer scalars) x Spin(r). The image on R^N is Id_mult (x) each block.
pub fn rho_block_images(p: &CliffordParams, s: &CliffordStructure, e: &ProductElement) -> Result<Vec<ExactMatrix>> {
    let blocks: Vec<&StructureBlock> = s.blocks.iter().filter(|b| b.mult > 0).collect();
    let Some((FactorElement::Spin { elt, .. }, outer)) = e.factors.split_last() else {
        return Err(Error::InvalidParams(format!("{e} has no Spin(r) entry")));
    };
    if outer.len() != blocks.len() {
        return Err(Error::DimensionMismatch(outer.len(), blocks.len()));
    }
    blocks
        .iter()
        .zip(outer)
        .map(|(b, x)| Ok(&outer_block_matrix(x, &block_units(p, b)?)? * &block_kappa(b, elt)?))
        .collect()
}

/// Class index of a multiplicity in the r = 0 mod 8 table:
/// 0, 1, 2, odd >= 3, 2 mod 4 (>= 6), 0 mod 4 (>= 4).
pub fn multiplicity_class(m: usize) -> usize {
    match m {
        0 => 0,
        1 => 1,
        2 => 2,
        _ if m % 2 == 1 => 3,
        _ if m % 4 == 2 => 4,
        _ => 5,
    }
}

/// Column and row labels of the r = 0 mod 8 table.
pub const CLASS_LABELS: [&str; 6] = ["0", "1", "2", "1 (mod 2)", "2 (mod 4)", "0 (mod 4)"];

/// The r = 0 mod 8 table: rows by m1 class, columns by m2 class.
pub const R0_TABLE: [[&str; 6]; 6] = [
    ["", "Z2", "Z+Z2", "Z2+Z2", "Z2+Z4", "Z2+Z2+Z2"],
    ["Z2", "{1}", "Z", "Z2", "Z4", "Z2+Z2"],
    ["Z+Z2", "Z", "Z+Z", "Z+Z2", "Z+Z4", "Z+Z2+Z2"],
    ["Z2+Z2", "Z2", "Z+Z2", "Z2+Z2", "Z2+Z4", "Z2+Z2+Z2"],
    ["Z2+Z4", "Z4", "Z+Z4", "Z2+Z4", "Z4+Z4", "Z2+Z2+Z4"],
    ["Z2+Z2+Z2", "Z2+Z2", "Z+Z2+Z2", "Z2+Z2+Z2", "Z2+Z2+Z4", "Z2+Z2+Z2+Z2"],
];

/// Tabulated fundamental groups.
pub fn expected_pi1(p: &CliffordParams) -> Result<AbelianGroup> {
    let g = |s: &str| AbelianGroup::parse(s);
    match p.r_mod8() {
        1 | 7 => {
            let m = p.m().expect("single");
            g(match m {
                1 => "{1}",
                2 => "Z",
                _ if m % 2 == 1 => "Z2",
                _ if m % 4 == 2 => "Z4",
                _ => "Z2+Z2",
            })
        }
        0 => {
            let (m1, m2) = p.pair_values().expect("pair");
            g(R0_TABLE[multiplicity_class(m1)][multiplicity_class(m2)])
        }
        2 | 6 => {
            let m = p.m().expect("single");
            g(match m.gcd(&4) {
                1 => "Z",
                2 => "Z+Z2",
                _ => "Z+Z4",
            })
        }
        3 | 5 => g("Z2"),
        _ => g(if spin4_collapses(p) { "Z2" } else { "Z2+Z2" }),
    }
}

/// A word a^x b^y in the abelian group <a, b | a^m = b^4>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    pub a: i64,
    pub b: i64,
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |name: &str, e: i64| match e {
            0 => String::new(),
            1 => name.to_string(),
            e => format!("{name}^{e}"),
        };
        let s = format!("{}{}", part("a", self.a), part("b", self.b));
        write!(f, "{}", if s.is_empty() { "1".into() } else { s })
    }
}

/// Named generators of <a, b | a^m = b^4> with their orders (None =
/// infinite) and, when (m, 4) = 1, the Bezout pair (t, s) with tm + 4s = 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UCaseGenerators {
    pub m: u64,
    pub gcd: u64,
    pub bezout: Option<(i64, i64)>,
    pub generators: Vec<(String, Word, Option<u64>)>,
    /// The generators together with the relation a^m b^-4 span Z^2.
    pub generates: bool,
}

/// Order of a^x b^y modulo the relation lattice Z (m, -4).
fn word_order(w: Word, m: i64) -> Option<u64> {
    // n (x, y) lies in Z (m, -4) for some n > 0 iff (x, y) = k (m, -4) with k
    // rational; the order is then the denominator of k.
    if w.a * -4 != w.b * m {
        return None;
    }
    if w.a == 0 && w.b == 0 {
        return Some(1);
    }
    let k = Q::new(if w.a != 0 { w.a } else { w.b }, if w.a != 0 { m } else { -4 });
    Some(*k.denom() as u64)
}

/// Generators of pi_1 in the unitary case, normalized by (m, 4).
pub fn u_case_generator_normalization(m: u64) -> Result<UCaseGenerators> {
    if m == 0 {
        return Err(Error::InvalidParams("m must be positive".into()));
    }
    let mi = m as i64;
    let g = mi.gcd(&4);
    let (bezout, generators) = match g {
        1 => {
            let e = mi.extended_gcd(&4);
            let (t, s) = (e.x, e.y);
            let w = Word { a: s, b: t };
            (Some((t, s)), vec![("b^t a^s".to_string(), w, word_order(w, mi))])
        }
        2 => {
            let k = (mi - 2) / 4;
            let c = Word { a: -(2 * k + 1), b: 2 };
            let d = Word { a: -k, b: 1 };
            (None, vec![("c".into(), c, word_order(c, mi)), ("d".into(), d, word_order(d, mi))])
        }
        _ => {
            let k = mi / 4;
            let a = Word { a: 1, b: 0 };
            let c = Word { a: -k, b: 1 };
            (None, vec![("a".into(), a, word_order(a, mi)), ("c".into(), c, word_order(c, mi))])
        }
    };
    let mut basis: Vec<Vec<i128>> = generators.iter().map(|(_, w, _)| vec![w.a as i128, w.b as i128]).collect();
    basis.push(vec![mi as i128, -4]);
    let generates = lattice_normal_form(&basis) == vec![vec![1, 0], vec![0, 1]];
    Ok(UCaseGenerators {
        m,
        gcd: g as u64,
        bezout,
        generators,
        generates,
    })
}

/// Result of the brute-force kernel search on a finite sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FallbackReport {
    pub sampled: usize,
    /// Sample elements with trivial image, as strings.
    pub found: Vec<String>,
    /// Every element found is one of the scalar-times-central candidates.
    pub consistent: bool,
}

/// Monomial matrices over a set of unit indices: (permutation, unit codes
/// with sign).
fn monomials(m: usize, units: &[usize]) -> Vec<Vec<(usize, usize, bool)>> {
    let perms: Vec<Vec<usize>> = permutations(m);
    let mut out = vec![];
    for perm in perms {
        let choices = units.len() * 2;
        let total = choices.pow(m as u32);
        for code in 0..total {
            let mut c = code;
            let entries: Vec<(usize, usize, bool)> = (0..m)
                .map(|col| {
                    let x = c % choices;
                    c /= choices;
                    (perm[col], units[x / 2], x % 2 == 1)
                })
                .collect();
            out.push(entries);
        }
    }
    out
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

fn perm_sign(perm: &[usize]) -> bool {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    inversions % 2 == 1
}

/// Brute-force search over monomial outer elements with unit entries and
/// spin elements +-e_I, for small cases (r <= 5, total multiplicity <= 2).
pub fn exhaustive_kernel_check(p: &CliffordParams) -> Result<FallbackReport> {
    if p.r > 5 || p.total_multiplicity() > 2 || p.r < 3 {
        return Err(Error::InvalidParams(format!("exhaustive search is limited to r <= 5, m <= 2, got {p}")));
    }
    let s = make_structure(p)?;
    let kernel = kernel_with_structure(p, &s)?;
    let candidates: BTreeSet<String> = kernel
        .uncollapsed
        .as_ref()
        .unwrap_or(&kernel.elements)
        .iter()
        .map(|e| e.to_string())
        .collect();
    let outer = outer_factors(p);
    let blocks: Vec<&StructureBlock> = s.blocks.iter().filter(|b| b.mult > 0).collect();
    let units: Vec<Vec<ExactMatrix>> = blocks.iter().map(|b| block_units(p, b)).collect::<Result<_>>()?;

    let mut spins = vec![];
    for mask in 0u32..(1 << p.r) {
        if mask.count_ones() % 2 == 0 {
            let e = Mv::blade(p.r, mask, Q::one())?;
            spins.push(e.clone());
            spins.push(-&e);
        }
    }
    // Outer samples per block: (realified m d x m d matrix, scalar label).
    let mut samples: Vec<Vec<(ExactMatrix, Option<FactorElement>)>> = vec![];
    for ((g, b), u) in outer.iter().zip(&blocks).zip(&units) {
        let m = b.mult;
        let d = b.form.dim();
        let unit_idx: Vec<usize> = (0..u.len()).collect();
        let mut list = vec![];
        for entries in monomials(m, &unit_idx) {
            if let FactorGroup::SO(_) = g {
                let perm: Vec<usize> = entries.iter().map(|e| e.0).collect();
                let negs = entries.iter().filter(|e| e.2).count();
                if perm_sign(&perm) ^ (negs % 2 == 1) {
                    continue;
                }
            }
            let mut mat = ExactMatrix::zeros(m * d, m * d);
            for (col, &(row, unit, neg)) in entries.iter().enumerate() {
                let x = if neg { -&u[unit] } else { u[unit].clone() };
                for a in 0..d {
                    for c in 0..d {
                        mat.set(row * d + a, col * d + c, x.get(a, c));
                    }
                }
            }
            let scalar = entries
                .iter()
                .enumerate()
                .all(|(col, e)| e.0 == col && e.1 == entries[0].1 && e.2 == entries[0].2)
                .then(|| scalar_label(*g, entries[0].1, entries[0].2));
            list.push((mat, scalar.flatten()));
        }
        samples.push(list);
    }

    let mut sampled = 0;
    let mut found = vec![];
    let mut consistent = true;
    let mut index = vec![0usize; samples.len()];
    loop {
        for z in &spins {
            sampled += 1;
            let mut trivial = true;
            for (bi, b) in blocks.iter().enumerate() {
                let k = ExactMatrix::identity(b.mult).kron(&block_kappa(b, z)?);
                if !(&samples[bi][index[bi]].0 * &k).is_identity() {
                    trivial = false;
                    break;
                }
            }
            if trivial {
                let labels: Option<Vec<FactorElement>> = index
                    .iter()
                    .enumerate()
                    .map(|(bi, &i)| samples[bi][i].1.clone())
                    .collect();
                match labels {
                    Some(mut factors) => {
                        factors.push(FactorElement::Spin { r: p.r, elt: z.clone() });
                        let e = ProductElement { factors };
                        consistent &= candidates.contains(&e.to_string());
                        found.push(e.to_string());
                    }
                    None => {
                        consistent = false;
                        found.push(format!("non-scalar outer element with spin part {z}"));
                    }
                }
            }
        }
        let mut pos = 0;
        loop {
            if pos == index.len() {
                found.sort();
                found.dedup();
                let all: BTreeSet<String> = found.iter().cloned().collect();
                consistent &= all == candidates;
                return Ok(FallbackReport {
                    sampled,
                    found,
                    consistent,
                });
            }
            index[pos] += 1;
            if index[pos] < samples[pos].len() {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Label of the scalar unit matrix, when it is one of the candidate scalars.
fn scalar_label(g: FactorGroup, unit: usize, neg: bool) -> Option<FactorElement> {
    match (g, unit) {
        (FactorGroup::SO(m), 0) => Some(FactorElement::Orth { m, neg }),
        (FactorGroup::Sp(m), 0) => Some(FactorElement::Symp { m, neg }),
        (FactorGroup::U(m), 0) => Some(FactorElement::Unitary { m, k: if neg { 2 } else { 0 } }),
        (FactorGroup::U(m), 1) => Some(FactorElement::Unitary { m, k: if neg { 3 } else { 1 } }),
        _ => None,
    }
}

/// Order of (vol_m, -1) in Spin(m) x Spin(r) for even m >= 4: 2 iff
/// m = 0 mod 4, else 4.
pub fn vol_pair_order(m: usize, r: usize) -> Result<u64> {
    if m % 2 == 1 || m < 4 {
        return Err(Error::InvalidParams(format!("vol_{m} lifts -Id_{m} only for even m >= 4")));
    }
    let e = ProductElement {
        factors: vec![
            FactorElement::SpinCover {
                m,
                elt: volume_element(m)?,
            },
            FactorElement::Spin {
                r,
                elt: -&Mv::one(r)?,
            },
        ],
    };
    element_order(&e)
}

/// Chirality of the block carrying a factor, for reports.
pub fn block_chirality(p: &CliffordParams, factor_index: usize) -> Option<Chirality> {
    p.blocks()
        .into_iter()
        .filter(|(m, _)| *m > 0)
        .nth(factor_index)
        .and_then(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(r: usize, m: usize) -> CliffordParams {
        CliffordParams::new(r, m).unwrap()
    }

    fn pair(r: usize, a: usize, b: usize) -> CliffordParams {
        CliffordParams::pair(r, a, b).unwrap()
    }

    #[test]
    fn centers() {
        assert_eq!(center_of_spin(5).unwrap().len(), 2);
        assert_eq!(center_iso_type(5).unwrap().to_string(), "Z2");
        assert_eq!(center_iso_type(6).unwrap().to_string(), "Z4");
        assert_eq!(center_iso_type(8).unwrap().to_string(), "Z2+Z2");
        assert_eq!(center_iso_type(10).unwrap().to_string(), "Z4");
        assert!(center_of_spin(2).is_err());
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_of_rho(&single(5, 1)).unwrap();
        assert_eq!(k.iso_type.to_string(), "Z2");
        assert!(k.discrepancies.is_empty(), "{:?}", k.discrepancies);
        let k = kernel_of_rho(&single(6, 1)).unwrap();
        assert_eq!(k.iso_type.to_string(), "Z4");
        assert_eq!(k.generators.len(), 1);
        assert!(k.elements.iter().any(|e| e.to_string() == "(iId_1, -vol_6)"));
        assert!(k.discrepancies.is_empty(), "{:?}", k.discrepancies);
        let k = kernel_of_rho(&pair(8, 2, 2)).unwrap();
        assert_eq!(k.iso_type.to_string(), "Z2+Z2");
        assert!(k.verified_identity);
        assert!(k.discrepancies.is_empty(), "{:?}", k.discrepancies);
    }

    #[test]
    fn spin4_collapse() {
        let q = structure_group(&pair(4, 1, 0)).unwrap();
        assert_eq!(q.label(), "(Sp(1) x Spin(3))/Z2");
        assert_eq!(q.kernel.uncollapsed.as_ref().unwrap().len(), 4);
        assert!(q.discrepancies.is_empty(), "{:?}", q.discrepancies);
        let k = kernel_of_rho(&pair(4, 0, 2)).unwrap();
        assert!(k.elements.iter().any(|e| e.to_string() == "(-Id_4, (-1,1))"));
        assert!(k.discrepancies.is_empty(), "{:?}", k.discrepancies);
    }

    #[test]
    fn structure_examples() {
        assert_eq!(structure_group(&single(3, 2)).unwrap().label(), "(Sp(2) x Spin(3))/Z2");
        assert_eq!(structure_group(&pair(8, 1, 1)).unwrap().label(), "SO(1) x SO(1) x Spin(8)");
        assert_eq!(structure_group(&single(7, 2)).unwrap().label(), "(SO(2) x Spin(7))/Z2");
        assert_eq!(structure_group(&pair(4, 1, 2)).unwrap().label(), "(Sp(1) x Sp(2) x Spin(4))/(Z2+Z2)");
    }

    #[test]
    fn pi1_examples() {
        for (p, want) in [
            (single(7, 6), "Z4"),
            (single(7, 1), "{1}"),
            (single(7, 2), "Z"),
            (single(7, 4), "Z2+Z2"),
            (pair(8, 2, 2), "Z+Z"),
            (single(6, 4), "Z+Z4"),
            (single(6, 3), "Z"),
            (single(6, 2), "Z+Z2"),
            (single(3, 1), "Z2"),
            (pair(4, 1, 0), "Z2"),
            (pair(4, 1, 1), "Z2+Z2"),
        ] {
            let res = pi1(&p).unwrap();
            assert_eq!(res.invariants.to_string(), want, "{p}");
            assert!(res.discrepancies.is_empty(), "{p}: {:?}", res.discrepancies);
        }
    }

    #[test]
    fn pi1_generators_have_verified_orders() {
        let res = pi1(&single(7, 6)).unwrap();
        let lift = res.generators.iter().find(|g| g.origin == "lift").unwrap();
        assert_eq!(lift.element.to_string(), "(vol_6, -1)");
        assert_eq!(lift.order, Some(4));
        let res = pi1(&single(7, 2)).unwrap();
        assert!(res.generators.iter().all(|g| g.order.is_none()));
    }

    #[test]
    fn vol_pair_orders_flip_with_m_mod_4() {
        assert!(vol_pair_order(5, 7).is_err());
        for m in (4..=16).step_by(2) {
            let want = if m % 4 == 0 { 2 } else { 4 };
            assert_eq!(vol_pair_order(m, 7).unwrap(), want, "m = {m}");
        }
    }

    #[test]
    fn u_case_normalization() {
        let g = u_case_generator_normalization(3).unwrap();
        assert_eq!(g.bezout, Some((-1, 1)));
        assert_eq!(g.generators[0].2, None);
        assert!(g.generates);
        let g = u_case_generator_normalization(6).unwrap();
        assert_eq!(g.generators[0].1, Word { a: -3, b: 2 });
        assert_eq!(g.generators[0].2, Some(2));
        assert_eq!(g.generators[1].1.to_string(), "a^-1b");
        assert_eq!(g.generators[1].2, None);
        assert!(g.generates);
        let g = u_case_generator_normalization(4).unwrap();
        assert_eq!(g.generators[1].1, Word { a: -1, b: 1 });
        assert_eq!(g.generators[1].2, Some(4));
        assert_eq!(g.generators[0].2, None);
        assert!(g.generates);
        // The literal a^-5 b^2 for m = 6 does not square to the identity.
        assert_eq!(word_order(Word { a: -5, b: 2 }, 6), None);
        for m in 1..=40 {
            let g = u_case_generator_normalization(m).unwrap();
            assert!(g.generates, "m = {m}");
            let finite: Vec<u64> = g.generators.iter().filter_map(|x| x.2).collect();
            let expected: Vec<u64> = if g.gcd == 1 { vec![] } else { vec![g.gcd] };
            assert_eq!(finite, expected, "m = {m}");
            if let Some((t, s)) = g.bezout {
                assert_eq!(t * m as i64 + 4 * s, 1);
            }
        }
    }

    #[test]
    fn exhaustive_fallback_small_cases() {
        for p in [single(3, 1), single(3, 2), single(5, 1), pair(4, 1, 1), pair(4, 2, 0), single(6, 1)]
            .into_iter()
            .filter(|p| p.r <= 5)
        {
            let rep = exhaustive_kernel_check(&p).unwrap();
            assert!(rep.consistent, "{p}: {:?}", rep.found);
        }
        assert!(exhaustive_kernel_check(&single(7, 1)).is_err());
    }
}
