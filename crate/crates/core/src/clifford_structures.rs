//! Linear even-Clifford Hermitian structures on R^N in model form: the real
//! module R^m (x) Delta~_r (or R^{m1} (x) Delta~_r^+ + R^{m2} (x) Delta~_r^-
//! for r = 0 mod 4) with J_ij = Id (x) kappa~(e_i e_j). Also the averaged
//! inner product, the complexification, and commutant verification.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{big, HomogeneousSystem};
use crate::spin_rep::{d_r, spinor_dim, Chirality, ExactMatrix, ExactScalar, RealForm};

/// Default bound on N for exact matrix work.
pub const DEFAULT_GUARD_N: usize = 512;
/// Hard ceiling for the N guard, whatever the environment says.
pub const MAX_GUARD_N: usize = 4096;
/// Bound on N for the exact commutant solve.
pub const COMMUTANT_GUARD_N: usize = 512;
/// Environment variable overriding the N guard.
pub const GUARD_ENV: &str = "SPINLAB_GUARD_N";

/// The active N guard: `SPINLAB_GUARD_N` if set and parseable, capped at
/// [`MAX_GUARD_N`], else [`DEFAULT_GUARD_N`].
pub fn guard_n() -> usize {
    std::env::var(GUARD_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map_or(DEFAULT_GUARD_N, |n| n.min(MAX_GUARD_N))
}

/// Multiplicities of the irreducible summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Multiplicity {
    Single(usize),
    Pair(usize, usize),
}

/// Rank and multiplicities of a structure without trivial summands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CliffordParams {
    pub r: usize,
    pub mult: Multiplicity,
}

impl CliffordParams {
    pub fn new(r: usize, m: usize) -> Result<Self> {
        Self::validated(r, Multiplicity::Single(m))
    }

    pub fn pair(r: usize, m1: usize, m2: usize) -> Result<Self> {
        Self::validated(r, Multiplicity::Pair(m1, m2))
    }

    pub fn validated(r: usize, mult: Multiplicity) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidParams(format!("rank {r} < 2")));
        }
        if r > 12 {
            return Err(Error::InvalidParams(format!("rank {r} > 12 is outside the supported range")));
        }
        match (r.is_multiple_of(4), mult) {
            (false, Multiplicity::Single(0)) => Err(Error::InvalidParams("m must be positive".into())),
            (false, Multiplicity::Single(_)) => Ok(CliffordParams { r, mult }),
            (true, Multiplicity::Pair(0, 0)) => Err(Error::InvalidParams("(m1, m2) = (0, 0) has no summands".into())),
            (true, Multiplicity::Pair(..)) => Ok(CliffordParams { r, mult }),
            (false, Multiplicity::Pair(..)) => Err(Error::InvalidParams(format!(
                "rank {r} takes a single multiplicity m"
            ))),
            (true, Multiplicity::Single(_)) => Err(Error::InvalidParams(format!(
                "rank {r} = 0 mod 4 takes two multiplicities m1, m2"
            ))),
        }
    }

    pub fn r_mod8(&self) -> usize {
        self.r % 8
    }

    pub fn d_r(&self) -> usize {
        d_r(self.r)
    }

    pub fn total_multiplicity(&self) -> usize {
        match self.mult {
            Multiplicity::Single(m) => m,
            Multiplicity::Pair(a, b) => a + b,
        }
    }

    /// N = d_r m or d_r (m1 + m2).
    pub fn n(&self) -> usize {
        self.d_r() * self.total_multiplicity()
    }

    pub fn m(&self) -> Option<usize> {
        match self.mult {
            Multiplicity::Single(m) => Some(m),
            Multiplicity::Pair(..) => None,
        }
    }

    pub fn pair_values(&self) -> Option<(usize, usize)> {
        match self.mult {
            Multiplicity::Pair(a, b) => Some((a, b)),
            Multiplicity::Single(_) => None,
        }
    }

    /// Blocks (multiplicity, chirality of the real summand).
    pub fn blocks(&self) -> Vec<(usize, Option<Chirality>)> {
        match self.mult {
            Multiplicity::Single(m) => vec![(m, None)],
            Multiplicity::Pair(a, b) => vec![(a, Some(Chirality::Plus)), (b, Some(Chirality::Minus))],
        }
    }

    pub fn check_guard(&self, limit: usize) -> Result<()> {
        if self.n() > limit {
            Err(Error::SizeGuard { n: self.n(), limit })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for CliffordParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mult {
            Multiplicity::Single(m) => write!(f, "r={}, m={m}", self.r),
            Multiplicity::Pair(a, b) => write!(f, "r={}, (m1,m2)=({a},{b})", self.r),
        }
    }
}

/// One isotypic block Id_mult (x) kappa~ on R^mult (x) Delta~.
#[derive(Debug, Clone)]
pub struct StructureBlock {
    pub mult: usize,
    pub form: RealForm,
    bivectors: BTreeMap<(usize, usize), ExactMatrix>,
}

impl StructureBlock {
    /// kappa~(e_i e_j) on the irreducible real module.
    pub fn bivector(&self, i: usize, j: usize) -> &ExactMatrix {
        &self.bivectors[&(i, j)]
    }
}

/// A linear even-Clifford Hermitian structure in model form.
#[derive(Debug, Clone)]
pub struct CliffordStructure {
    pub params: CliffordParams,
    pub blocks: Vec<StructureBlock>,
}

impl CliffordStructure {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// Assembles Id_mult (x) x_b over blocks from per-block matrices.
    pub fn assemble(&self, per_block: impl Fn(&StructureBlock) -> ExactMatrix) -> ExactMatrix {
        let parts: Vec<ExactMatrix> = self
            .blocks
            .iter()
            .filter(|b| b.mult > 0)
            .map(|b| ExactMatrix::identity(b.mult).kron(&per_block(b)))
            .collect();
        ExactMatrix::direct_sum(&parts)
    }

    /// J_ij on R^N.
    pub fn j(&self, i: usize, j: usize) -> Result<ExactMatrix> {
        if i == 0 || i >= j || j > self.params.r {
            return Err(Error::IndexOutOfRange { index: j, n: self.params.r });
        }
        Ok(self.assemble(|b| b.bivector(i, j).clone()))
    }

    /// Phi(e_I) for an even mask I, as a product of J's on the irreducible
    /// module of one block.
    pub fn block_blade(&self, block: &StructureBlock, mask: u32) -> Result<ExactMatrix> {
        if mask.count_ones() % 2 == 1 || mask >> self.params.r != 0 {
            return Err(Error::InvalidParams(format!("mask {mask:#b} is not an even blade of rank {}", self.params.r)));
        }
        let idx: Vec<usize> = (0..self.params.r).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let mut acc = ExactMatrix::identity(block.form.dim());
        for pair in idx.chunks(2) {
            acc = &acc * block.bivector(pair[0], pair[1]);
        }
        Ok(acc)
    }

    /// Phi(e_I) on R^N.
    pub fn blade(&self, mask: u32) -> Result<ExactMatrix> {
        for b in &self.blocks {
            self.block_blade(b, mask)?;
        }
        Ok(self.assemble(|b| self.block_blade(b, mask).expect("mask checked")))
    }

    /// Sparse columns of J_ij: for each column, the nonzero (row, value).
    pub fn sparse_j(&self, i: usize, j: usize) -> Vec<Vec<(usize, BigRational)>> {
        let mut cols = vec![];
        let mut offset = 0;
        for b in self.blocks.iter().filter(|b| b.mult > 0) {
            let x = b.bivector(i, j);
            let d = x.rows();
            for copy in 0..b.mult {
                for c in 0..d {
                    let col = (0..d)
                        .filter_map(|a| {
                            let v = x.get(a, c);
                            (!v.is_zero()).then(|| (offset + copy * d + a, big(v.to_rationals().0)))
                        })
                        .collect();
                    cols.push(col);
                }
            }
            offset += b.mult * d;
        }
        cols
    }
}

type IrreducibleBlock = (RealForm, BTreeMap<(usize, usize), ExactMatrix>);

/// The irreducible real module with its bivector images, memoized per
/// rank and chirality.
fn irreducible_block(r: usize, chirality: Option<Chirality>) -> Result<IrreducibleBlock> {
    type Cache = Mutex<HashMap<(usize, Option<Chirality>), IrreducibleBlock>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().expect("cache lock").get(&(r, chirality)) {
        return Ok(b.clone());
    }
    let form = RealForm::new(r, chirality)?;
    let mut bivectors = BTreeMap::new();
    for i in 1..=r {
        for j in i + 1..=r {
            bivectors.insert((i, j), form.bivector(i, j)?);
        }
    }
    let block = (form, bivectors);
    cache.lock().expect("cache lock").insert((r, chirality), block.clone());
    Ok(block)
}

/// Builds the model structure; N is checked against the active guard.
pub fn make_structure(p: &CliffordParams) -> Result<CliffordStructure> {
    p.check_guard(guard_n())?;
    let mut blocks = vec![];
    for (mult, chirality) in p.blocks() {
        let (form, bivectors) = irreducible_block(p.r, chirality)?;
        blocks.push(StructureBlock { mult, form, bivectors });
    }
    Ok(CliffordStructure { params: *p, blocks })
}

/// Outcome of the exact structure checks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureCheck {
    pub squares_to_minus_id: bool,
    pub skew: bool,
    pub disjoint_commute: bool,
    pub algebra_relations: bool,
}

impl StructureCheck {
    pub fn ok(&self) -> bool {
        self.squares_to_minus_id && self.skew && self.disjoint_commute && self.algebra_relations
    }
}

/// J_ij^2 = -Id, J_ij^T = -J_ij, disjoint pairs commute, and
/// J_ij J_jk = -J_ik for distinct i, j, k, with J_ji = -J_ij.
pub fn check_structure(s: &CliffordStructure) -> Result<StructureCheck> {
    let r = s.params.r;
    let mut out = StructureCheck {
        squares_to_minus_id: true,
        skew: true,
        disjoint_commute: true,
        algebra_relations: true,
    };
    let minus_id = ExactMatrix::scalar_identity(s.n(), ExactScalar::int(-1));
    let mut js = BTreeMap::new();
    for i in 1..=r {
        for j in i + 1..=r {
            let m = s.j(i, j)?;
            out.squares_to_minus_id &= &m * &m == minus_id;
            out.skew &= m.transpose() == -&m;
            js.insert((i, j), m);
        }
    }
    let signed = |a: usize, b: usize| -> ExactMatrix {
        if a < b {
            js[&(a, b)].clone()
        } else {
            -&js[&(b, a)]
        }
    };
    for i in 1..=r {
        for j in 1..=r {
            for k in 1..=r {
                if i == j || j == k || i == k {
                    continue;
                }
                out.algebra_relations &= &signed(i, j) * &signed(j, k) == -&signed(i, k);
                for l in k + 1..=r {
                    if [i, j].contains(&k) || [i, j].contains(&l) || i > j {
                        continue;
                    }
                    let a = signed(i, j);
                    let b = signed(k, l);
                    out.disjoint_commute &= &a * &b == &b * &a;
                }
            }
        }
    }
    Ok(out)
}

/// Index ranges for the averaging sum over even blades e_{i_1...i_{2k}}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AveragingConvention {
    /// 0 <= k and 1 <= i_1 < ... < i_{2k} <= r: all even blades.
    Inclusive,
    /// 1 <= k and 1 <= i_1 < ... < i_{2k} < r, read literally.
    Literal,
}

/// Even masks summed over under the convention.
pub fn averaging_masks(r: usize, conv: AveragingConvention) -> Vec<u32> {
    let top = match conv {
        AveragingConvention::Inclusive => r,
        AveragingConvention::Literal => r - 1,
    };
    (0u32..1 << top)
        .filter(|m| m.count_ones() % 2 == 0)
        .filter(|m| conv == AveragingConvention::Inclusive || *m != 0)
        .collect()
}

/// Float copy of a structure, optionally conjugated by an invertible P
/// (J -> P J P^{-1}), for demonstrating the averaging remark.
#[derive(Debug, Clone)]
pub struct FloatStructure {
    pub r: usize,
    pub bivectors: BTreeMap<(usize, usize), DMatrix<f64>>,
}

pub fn to_float(m: &ExactMatrix) -> DMatrix<f64> {
    let vals = m.to_f64();
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| vals[i * m.cols() + j].0)
}

impl FloatStructure {
    pub fn from_exact(s: &CliffordStructure) -> Result<Self> {
        let r = s.params.r;
        let mut bivectors = BTreeMap::new();
        for i in 1..=r {
            for j in i + 1..=r {
                bivectors.insert((i, j), to_float(&s.j(i, j)?));
            }
        }
        Ok(FloatStructure { r, bivectors })
    }

    pub fn n(&self) -> usize {
        self.bivectors.values().next().map_or(0, |m| m.nrows())
    }

    pub fn conjugated(&self, p: &DMatrix<f64>) -> Result<Self> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParams("conjugating matrix is singular".into()))?;
        Ok(FloatStructure {
            r: self.r,
            bivectors: self.bivectors.iter().map(|(k, m)| (*k, p * m * &pinv)).collect(),
        })
    }

    /// Phi(e_I) for an even mask.
    pub fn blade(&self, mask: u32) -> DMatrix<f64> {
        let idx: Vec<usize> = (0..self.r).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        let mut acc = DMatrix::identity(self.n(), self.n());
        for pair in idx.chunks(2) {
            acc *= &self.bivectors[&(pair[0], pair[1])];
        }
        acc
    }

    pub fn even_images(&self, conv: AveragingConvention) -> Vec<DMatrix<f64>> {
        averaging_masks(self.r, conv).into_iter().map(|m| self.blade(m)).collect()
    }

    /// max over J_ij of |J^T G + G J| / |G| (Frobenius).
    pub fn skew_defect(&self, g: &DMatrix<f64>) -> f64 {
        self.bivectors
            .values()
            .map(|j| (j.transpose() * g + g * j).norm() / g.norm())
            .fold(0.0, f64::max)
    }
}

/// Tolerance for float-mode Hermitian assertions.
pub const FLOAT_TOL: f64 = 1e-9;

/// (X, Y) = sum over images A of <A X, A Y>_B, as the Gram matrix
/// sum A^T B A. Fails unless the result is symmetric positive definite.
pub fn averaged_inner_product(images: &[DMatrix<f64>], base: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = base.nrows();
    if images.is_empty() || images.iter().all(|a| a.norm() == 0.0) {
        return Err(Error::InvalidStructure("no nonzero endomorphisms to average over".into()));
    }
    let mut g = DMatrix::zeros(n, n);
    for a in images {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch(a.nrows(), n));
        }
        g += a.transpose() * base * a;
    }
    if (&g - g.transpose()).norm() > FLOAT_TOL * g.norm() || g.clone().cholesky().is_none() {
        return Err(Error::InvalidStructure("averaged form is not positive definite".into()));
    }
    Ok(g)
}

/// Size guard for the dense float averaging check.
pub const FLOAT_GUARD_N: usize = 256;

/// Skew defects of a non-orthogonally conjugated copy of the structure
/// against the identity form and against the averaged form.
pub fn averaging_defects(s: &CliffordStructure) -> Result<(f64, f64)> {
    let n = s.n();
    if n > FLOAT_GUARD_N {
        return Err(Error::SizeGuard { n, limit: FLOAT_GUARD_N });
    }
    let p = DMatrix::from_fn(n, n, |i, j| match j.wrapping_sub(i) {
        0 => 1.0,
        1 => 0.5,
        _ => 0.0,
    });
    let f = FloatStructure::from_exact(s)?.conjugated(&p)?;
    let id = DMatrix::identity(n, n);
    let g = averaged_inner_product(&f.even_images(AveragingConvention::Inclusive), &id)?;
    Ok((f.skew_defect(&id), f.skew_defect(&g)))
}

/// Outer factor of a complex summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OuterField {
    Standard,
    Conjugate,
}

/// Which spinor module a summand carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HalfSpin {
    Full,
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupTag {
    SO,
    U,
    Sp,
}

/// C^s (x) Delta (or the conjugate C^s).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summand {
    pub outer: OuterField,
    pub s: usize,
    pub half_spin: HalfSpin,
    pub group: GroupTag,
}

/// Decomposition of the complexified R^N into C^s (x) Delta summands.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub r: usize,
    pub summands: Vec<Summand>,
}

impl Decomposition {
    pub fn complex_dim(&self) -> usize {
        self.summands
            .iter()
            .map(|s| {
                let d = match s.half_spin {
                    HalfSpin::Full => spinor_dim(self.r),
                    _ => spinor_dim(self.r) / 2,
                };
                s.s * d
            })
            .sum()
    }

    /// Multiplicity of Delta^+- (s-weighted) for even r.
    pub fn half_spin_multiplicity(&self, h: HalfSpin) -> usize {
        self.summands.iter().filter(|s| s.half_spin == h).map(|s| s.s).sum()
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .summands
            .iter()
            .map(|s| {
                let outer = match s.outer {
                    OuterField::Standard => "C",
                    OuterField::Conjugate => "Cbar",
                };
                let spin = match s.half_spin {
                    HalfSpin::Full => format!("Delta_{}", self.r),
                    HalfSpin::Plus => format!("Delta_{}^+", self.r),
                    HalfSpin::Minus => format!("Delta_{}^-", self.r),
                };
                format!("{outer}^{} (x) {spin}", s.s)
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The complexification of R^N by residue of r mod 8; summands with s = 0
/// are omitted.
pub fn complexify(p: &CliffordParams) -> Decomposition {
    use HalfSpin::*;
    use OuterField::*;
    let sum = |group, parts: &[(OuterField, usize, HalfSpin)]| Decomposition {
        r: p.r,
        summands: parts
            .iter()
            .filter(|(_, s, _)| *s > 0)
            .map(|&(outer, s, half_spin)| Summand {
                outer,
                s,
                half_spin,
                group,
            })
            .collect(),
    };
    match (p.r_mod8(), p.mult) {
        (1 | 7, Multiplicity::Single(m)) => sum(GroupTag::SO, &[(Standard, m, Full)]),
        (2, Multiplicity::Single(m)) => sum(GroupTag::U, &[(Standard, m, Plus), (Conjugate, m, Minus)]),
        (6, Multiplicity::Single(m)) => sum(GroupTag::U, &[(Conjugate, m, Plus), (Standard, m, Minus)]),
        (3 | 5, Multiplicity::Single(m)) => sum(GroupTag::Sp, &[(Standard, 2 * m, Full)]),
        (4, Multiplicity::Pair(a, b)) => sum(GroupTag::Sp, &[(Standard, 2 * b, Plus), (Standard, 2 * a, Minus)]),
        (0, Multiplicity::Pair(a, b)) => sum(GroupTag::SO, &[(Standard, a, Plus), (Standard, b, Minus)]),
        _ => unreachable!("params validated"),
    }
}

/// Dimensions of the +1 and -1 eigenspaces of (-i)^{r/2} Phi(vol_r) on the
/// complexification of R^N (r even), i.e. the Delta^+ and Delta^- content.
pub fn chirality_content(s: &CliffordStructure) -> Result<(usize, usize)> {
    let r = s.params.r;
    if r % 2 == 1 {
        return Err(Error::OddDimension(r));
    }
    let vol_mask = ((1u64 << r) - 1) as u32;
    let phase = ExactScalar::i_pow(-((r / 2) as i64));
    let c = s.blade(vol_mask)?.scale(phase);
    let id = ExactMatrix::identity(s.n());
    let plus = (&id + &c).rank();
    let minus = (&id - &c).rank();
    Ok((plus, minus))
}

/// Classical Lie algebras appearing in the normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LieAlgebra {
    So(usize),
    U(usize),
    Sp(usize),
    Spin(usize),
}

impl LieAlgebra {
    pub fn dim(&self) -> usize {
        match *self {
            LieAlgebra::So(m) | LieAlgebra::Spin(m) => m * m.saturating_sub(1) / 2,
            LieAlgebra::U(m) => m * m,
            LieAlgebra::Sp(m) => m * (2 * m + 1),
        }
    }
}

impl fmt::Display for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieAlgebra::So(m) => write!(f, "so({m})"),
            LieAlgebra::U(m) => write!(f, "u({m})"),
            LieAlgebra::Sp(m) => write!(f, "sp({m})"),
            LieAlgebra::Spin(r) => write!(f, "spin({r})"),
        }
    }
}

fn render_sum(parts: &[LieAlgebra]) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    parts.iter().map(ToString::to_string).collect::<Vec<_>>().join("+")
}

/// Centralizer and normalizer of spin(r) in so(N).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizerData {
    pub centralizer: Vec<LieAlgebra>,
    pub normalizer: Vec<LieAlgebra>,
}

impl NormalizerData {
    pub fn centralizer_dim(&self) -> usize {
        self.centralizer.iter().map(LieAlgebra::dim).sum()
    }

    pub fn centralizer_desc(&self) -> String {
        render_sum(&self.centralizer)
    }

    pub fn normalizer_desc(&self) -> String {
        render_sum(&self.normalizer)
    }
}

/// Centralizer and normalizer row for the parameters; zero-multiplicity summands are dropped.
pub fn normalizer_data(p: &CliffordParams) -> NormalizerData {
    let centralizer: Vec<LieAlgebra> = match (p.r_mod8(), p.mult) {
        (1 | 7, Multiplicity::Single(m)) => vec![LieAlgebra::So(m)],
        (2 | 6, Multiplicity::Single(m)) => vec![LieAlgebra::U(m)],
        (3 | 5, Multiplicity::Single(m)) => vec![LieAlgebra::Sp(m)],
        (4, Multiplicity::Pair(a, b)) => [a, b].into_iter().filter(|x| *x > 0).map(LieAlgebra::Sp).collect(),
        (0, Multiplicity::Pair(a, b)) => [a, b].into_iter().filter(|x| *x > 0).map(LieAlgebra::So).collect(),
        _ => unreachable!("params validated"),
    };
    let mut normalizer = centralizer.clone();
    normalizer.push(LieAlgebra::Spin(p.r));
    NormalizerData {
        centralizer,
        normalizer,
    }
}

/// Computed commutant dimension against the tabulated prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralizerReport {
    pub params: CliffordParams,
    pub computed: usize,
    pub expected: usize,
    pub desc: String,
}

impl CentralizerReport {
    pub fn ok(&self) -> bool {
        self.computed == self.expected
    }
}

/// Dimension of {X skew : X J_ij = J_ij X for all i < j}, solved exactly.
/// The J_{1j} generate the even algebra, so only they are imposed.
pub fn commutant_dimension(s: &CliffordStructure) -> Result<usize> {
    let n = s.n();
    if n > COMMUTANT_GUARD_N {
        return Err(Error::SizeGuard {
            n,
            limit: COMMUTANT_GUARD_N,
        });
    }
    let var = |a: usize, b: usize| -> Option<(usize, i64)> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some((a * n - a * (a + 1) / 2 + (b - a - 1), 1)),
            std::cmp::Ordering::Greater => Some((b * n - b * (b + 1) / 2 + (a - b - 1), -1)),
            std::cmp::Ordering::Equal => None,
        }
    };
    let mut sys = HomogeneousSystem::new(n * (n - 1) / 2);
    for j in 2..=s.params.r {
        let cols = s.sparse_j(1, j);
        let mut rows: Vec<Vec<(usize, BigRational)>> = vec![vec![]; n];
        for (c, col) in cols.iter().enumerate() {
            for (rr, v) in col {
                rows[*rr].push((c, v.clone()));
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                let mut terms = vec![];
                for (c, v) in &cols[b] {
                    if let Some((x, sg)) = var(a, *c) {
                        terms.push((x, v * BigRational::from_integer(BigInt::from(sg))));
                    }
                }
                for (c, v) in &rows[a] {
                    if let Some((x, sg)) = var(*c, b) {
                        terms.push((x, -(v * BigRational::from_integer(BigInt::from(sg)))));
                    }
                }
                sys.add_equation(&terms);
            }
        }
    }
    Ok(sys.nullity())
}

/// Commutant dimension against the tabulated centralizer dimension.
pub fn verify_centralizer(p: &CliffordParams) -> Result<CentralizerReport> {
    p.check_guard(COMMUTANT_GUARD_N)?;
    let s = make_structure(p)?;
    let data = normalizer_data(p);
    Ok(CentralizerReport {
        params: *p,
        computed: commutant_dimension(&s)?,
        expected: data.centralizer_dim(),
        desc: data.centralizer_desc(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_validation() {
        assert!(CliffordParams::new(3, 1).is_ok());
        assert!(CliffordParams::new(3, 0).is_err());
        assert!(CliffordParams::new(4, 1).is_err());
        assert!(CliffordParams::pair(8, 0, 0).is_err());
        assert!(CliffordParams::pair(8, 0, 2).is_ok());
        assert!(CliffordParams::pair(6, 1, 1).is_err());
        assert!(CliffordParams::new(1, 1).is_err());
        assert_eq!(CliffordParams::new(5, 3).unwrap().n(), 24);
        assert_eq!(CliffordParams::pair(8, 1, 2).unwrap().n(), 24);
        assert_eq!(CliffordParams::pair(4, 1, 1).unwrap().n(), 8);
    }

    #[test]
    fn rank_three_structure() {
        let s = make_structure(&CliffordParams::new(3, 1).unwrap()).unwrap();
        assert_eq!(s.n(), 4);
        assert!(check_structure(&s).unwrap().ok());
    }

    #[test]
    fn rank_four_single_block_support() {
        let s = make_structure(&CliffordParams::pair(4, 1, 0).unwrap()).unwrap();
        assert_eq!(s.n(), 4);
        let s2 = make_structure(&CliffordParams::pair(4, 1, 1).unwrap()).unwrap();
        let j = s2.j(1, 2).unwrap();
        for a in 0..4 {
            for b in 4..8 {
                assert!(j.get(a, b) == ExactScalar::ZERO && j.get(b, a) == ExactScalar::ZERO);
            }
        }
        assert!(check_structure(&s2).unwrap().ok());
    }

    #[test]
    fn structures_up_to_rank_eight() {
        for r in 2..=8 {
            let ps: Vec<CliffordParams> = if r % 4 == 0 {
                vec![CliffordParams::pair(r, 1, 0).unwrap(), CliffordParams::pair(r, 1, 2).unwrap()]
            } else {
                vec![CliffordParams::new(r, 1).unwrap(), CliffordParams::new(r, 2).unwrap()]
            };
            for p in ps {
                let s = make_structure(&p).unwrap();
                assert!(check_structure(&s).unwrap().ok(), "{p}");
            }
        }
    }

    #[test]
    fn complexification_rows() {
        let d = complexify(&CliffordParams::new(9, 2).unwrap());
        assert_eq!(d.to_string(), "C^2 (x) Delta_9");
        let d = complexify(&CliffordParams::pair(4, 1, 1).unwrap());
        assert_eq!(d.to_string(), "C^2 (x) Delta_4^+ + C^2 (x) Delta_4^-");
        let d = complexify(&CliffordParams::new(6, 1).unwrap());
        assert_eq!(d.to_string(), "Cbar^1 (x) Delta_6^+ + C^1 (x) Delta_6^-");
        for p in [
            CliffordParams::new(3, 2).unwrap(),
            CliffordParams::new(10, 3).unwrap(),
            CliffordParams::pair(12, 1, 3).unwrap(),
            CliffordParams::pair(8, 0, 5).unwrap(),
        ] {
            assert_eq!(complexify(&p).complex_dim(), p.n());
        }
    }

    #[test]
    fn chirality_content_matches_decomposition() {
        for p in [
            CliffordParams::new(2, 2).unwrap(),
            CliffordParams::new(6, 1).unwrap(),
            CliffordParams::pair(4, 1, 2).unwrap(),
            CliffordParams::pair(8, 2, 1).unwrap(),
        ] {
            let s = make_structure(&p).unwrap();
            let d = complexify(&p);
            let half = spinor_dim(p.r) / 2;
            let (plus, minus) = chirality_content(&s).unwrap();
            assert_eq!(plus, d.half_spin_multiplicity(HalfSpin::Plus) * half, "{p}");
            assert_eq!(minus, d.half_spin_multiplicity(HalfSpin::Minus) * half, "{p}");
        }
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(verify_centralizer(&CliffordParams::new(3, 1).unwrap()).unwrap().computed, 3);
        assert_eq!(verify_centralizer(&CliffordParams::new(9, 2).unwrap()).unwrap().computed, 1);
        assert_eq!(verify_centralizer(&CliffordParams::new(6, 1).unwrap()).unwrap().computed, 1);
        let rep = verify_centralizer(&CliffordParams::pair(4, 1, 2).unwrap()).unwrap();
        assert!(rep.ok(), "{rep:?}");
        assert_eq!(rep.desc, "sp(1)+sp(2)");
    }

    #[test]
    fn guard_rejects_large_n() {
        let p = CliffordParams::new(11, 9).unwrap();
        assert!(matches!(verify_centralizer(&p), Err(Error::SizeGuard { .. })));
    }

    #[test]
    fn hermitian_structure_averages_to_a_multiple() {
        let s = make_structure(&CliffordParams::new(3, 2).unwrap()).unwrap();
        let f = FloatStructure::from_exact(&s).unwrap();
        let id = DMatrix::identity(f.n(), f.n());
        let g = averaged_inner_product(&f.even_images(AveragingConvention::Inclusive), &id).unwrap();
        assert!((&g - &id * 4.0).norm() < FLOAT_TOL);
    }

    fn random_conjugate(f: &FloatStructure, seed: u64) -> FloatStructure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = f.n();
        let p = DMatrix::from_fn(n, n, |i, j| (i == j) as u8 as f64 * 2.0 + rng.random_range(-0.5..0.5));
        f.conjugated(&p).unwrap()
    }

    #[test]
    fn averaging_makes_structure_hermitian() {
        let s = make_structure(&CliffordParams::new(2, 1).unwrap()).unwrap();
        let f = random_conjugate(&FloatStructure::from_exact(&s).unwrap(), 7);
        let id = DMatrix::identity(f.n(), f.n());
        assert!(f.skew_defect(&id) > 1e-3);
        let g = averaged_inner_product(&f.even_images(AveragingConvention::Inclusive), &id).unwrap();
        assert!(f.skew_defect(&g) < FLOAT_TOL);
        assert!(averaged_inner_product(&f.even_images(AveragingConvention::Literal), &id).is_err());
    }

    #[test]
    fn literal_bounds_miss_the_last_index() {
        let s = make_structure(&CliffordParams::new(3, 1).unwrap()).unwrap();
        let f = random_conjugate(&FloatStructure::from_exact(&s).unwrap(), 11);
        let id = DMatrix::identity(f.n(), f.n());
        let g = averaged_inner_product(&f.even_images(AveragingConvention::Literal), &id).unwrap();
        assert!(f.skew_defect(&g) > 1e-3);
    }

    #[test]
    fn averaging_defects_shrink() {
        for p in [CliffordParams::new(3, 2).unwrap(), CliffordParams::pair(4, 1, 1).unwrap()] {
            let (before, after) = averaging_defects(&make_structure(&p).unwrap()).unwrap();
            assert!(before > 1e-3 && after < FLOAT_TOL, "{p}: {before} -> {after}");
        }
    }

    #[test]
    fn zero_structure_is_rejected() {
        let z = DMatrix::<f64>::zeros(2, 2);
        assert!(averaged_inner_product(std::slice::from_ref(&z), &DMatrix::identity(2, 2)).is_err());
        assert!(averaged_inner_product(&[], &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn guard_env_parsing_defaults() {
        assert!(guard_n() <= MAX_GUARD_N);
    }
}
