//! The complex spin representation kappa: Cl_n -> End(C^{2^k}), k = floor(n/2),
//! built from Kronecker products of the 2x2 matrices g1, g2, T; half-spin
//! projectors, the real/quaternionic structures gamma_n, real forms of the
//! irreducible even-Clifford modules, and the table of irreducible modules.
//!
//! Index conventions: the spinor u_eps = u_{eps_1} (x) ... (x) u_{eps_k} sits at
//! index b whose bit (k - s) is set iff eps_s = -1, so the last tensor slot is
//! the fastest-varying bit. The plane e_{2j-1}e_{2j} acts on slot k + 1 - j.

mod matrix;
mod scalar;

pub use matrix::{hermitian, kron_vec, AntilinearMap, ExactMatrix, ExactVector};
pub use scalar::ExactScalar;

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::blade_algebra::{Mv, MAX_DIM};
use crate::error::{Error, Result};

fn s(re: i64, im: i64) -> ExactScalar {
    ExactScalar::gaussian(re, im)
}

/// g1 = diag(i, -i).
pub fn g1() -> ExactMatrix {
    ExactMatrix::from_gaussian(&[&[(0, 1), (0, 0)], &[(0, 0), (0, -1)]]).expect("2x2")
}

/// g2 = [[0, i], [i, 0]].
pub fn g2() -> ExactMatrix {
    ExactMatrix::from_gaussian(&[&[(0, 0), (0, 1)], &[(0, 1), (0, 0)]]).expect("2x2")
}

/// T = [[0, -i], [i, 0]].
pub fn t_matrix() -> ExactMatrix {
    ExactMatrix::from_gaussian(&[&[(0, 0), (0, -1)], &[(0, 1), (0, 0)]]).expect("2x2")
}

/// Matrix of the quaternionic structure alpha(z1, z2) = (-conj z2, conj z1).
pub fn alpha_matrix() -> ExactMatrix {
    ExactMatrix::from_gaussian(&[&[(0, 0), (-1, 0)], &[(1, 0), (0, 0)]]).expect("2x2")
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::DimensionOutOfRange(n))
    } else {
        Ok(())
    }
}

/// Complex spinor dimension 2^{floor(n/2)}.
pub fn spinor_dim(n: usize) -> usize {
    1 << (n / 2)
}

/// kappa(e_i) for 1 <= i <= n.
pub fn kappa_generator(n: usize, i: usize) -> Result<ExactMatrix> {
    check_n(n)?;
    if i == 0 || i > n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let k = n / 2;
    let id = ExactMatrix::identity(2);
    if i == 2 * k + 1 {
        let t = ExactMatrix::kron_all(&vec![t_matrix(); k]);
        return Ok(t.scale(ExactScalar::I));
    }
    let j = i.div_ceil(2);
    let g = if i % 2 == 1 { g1() } else { g2() };
    let mut factors = vec![id; k - j];
    factors.push(g);
    factors.extend(std::iter::repeat_n(t_matrix(), j - 1));
    Ok(ExactMatrix::kron_all(&factors))
}

/// Cached kappa generators for Cl_n.
#[derive(Debug, Clone)]
pub struct SpinRep {
    n: usize,
    gens: Vec<ExactMatrix>,
}

impl SpinRep {
    pub fn new(n: usize) -> Result<Self> {
        check_n(n)?;
        let gens = (1..=n).map(|i| kappa_generator(n, i)).collect::<Result<_>>()?;
        Ok(SpinRep { n, gens })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        spinor_dim(self.n)
    }

    /// kappa(e_i), 1-based.
    pub fn generator(&self, i: usize) -> &ExactMatrix {
        &self.gens[i - 1]
    }

    /// kappa of the ordered blade product for a bitmask.
    pub fn blade(&self, mask: u32) -> ExactMatrix {
        let mut acc = ExactMatrix::identity(self.dim());
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                acc = &acc * &self.gens[i];
            }
        }
        acc
    }

    /// kappa(e_i e_j), 1-based.
    pub fn bivector(&self, i: usize, j: usize) -> ExactMatrix {
        self.generator(i) * self.generator(j)
    }

    /// Algebra-map extension of the generators; coefficients must be dyadic.
    pub fn kappa(&self, mv: &Mv) -> Result<ExactMatrix> {
        if mv.n() != self.n {
            return Err(Error::DimensionMismatch(mv.n(), self.n));
        }
        let mut out = ExactMatrix::zeros(self.dim(), self.dim());
        for (blade, c) in mv.terms() {
            let c = ExactScalar::from_rational(*c)?;
            out = &out + &self.blade(blade.mask).scale(c);
        }
        Ok(out)
    }

    /// kappa(vol_n).
    pub fn volume(&self) -> ExactMatrix {
        self.blade(((1u64 << self.n) - 1) as u32)
    }
}

/// kappa(mv) in dimension n.
pub fn kappa(mv: &Mv, n: usize) -> Result<ExactMatrix> {
    SpinRep::new(n)?.kappa(mv)
}

/// Half-spin chirality label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Chirality {
    Plus,
    Minus,
}

impl Chirality {
    pub fn sign(self) -> i64 {
        match self {
            Chirality::Plus => 1,
            Chirality::Minus => -1,
        }
    }

    pub fn both() -> [Chirality; 2] {
        [Chirality::Plus, Chirality::Minus]
    }
}

impl fmt::Display for Chirality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Chirality::Plus => "+",
            Chirality::Minus => "-",
        })
    }
}

/// (-i)^{n/2} kappa(vol_n), whose +-1 eigenspaces are the half spinors.
pub fn chirality_operator(n: usize) -> Result<ExactMatrix> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let rep = SpinRep::new(n)?;
    Ok(rep.volume().scale(ExactScalar::i_pow(-((n / 2) as i64))))
}

/// P+- = (Id +- (-i)^{n/2} kappa(vol)) / 2.
pub fn half_spin_projectors(n: usize) -> Result<(ExactMatrix, ExactMatrix)> {
    let c = chirality_operator(n)?;
    let id = ExactMatrix::identity(c.rows());
    let half = |m: ExactMatrix| m.map(|x| x.div_pow2(1));
    Ok((half(&id + &c), half(&id - &c)))
}

/// eps_1..eps_k of basis index b.
pub fn epsilon_of_index(k: usize, b: usize) -> Vec<i8> {
    (1..=k).map(|s| if b >> (k - s) & 1 == 1 { -1 } else { 1 }).collect()
}

/// Inverse of [`epsilon_of_index`].
pub fn index_of_epsilon(eps: &[i8]) -> usize {
    let k = eps.len();
    eps.iter()
        .enumerate()
        .fold(0, |acc, (s, e)| if *e < 0 { acc | 1 << (k - 1 - s) } else { acc })
}

/// Chirality of u_b by the parity of the number of -1 entries.
pub fn index_chirality(b: usize) -> Chirality {
    if b.count_ones().is_multiple_of(2) {
        Chirality::Plus
    } else {
        Chirality::Minus
    }
}

/// u_{+1} = (1, -i), u_{-1} = (1, i), unnormalized.
pub fn u_vector(eps: i8) -> ExactVector {
    vec![s(1, 0), s(0, -(eps as i64))]
}

/// The basis u_eps of Delta_n in index order, each with squared norm 2^k.
pub fn spinor_basis(n: usize) -> Result<Vec<ExactVector>> {
    check_n(n)?;
    let k = n / 2;
    Ok((0..1usize << k)
        .map(|b| {
            let factors: Vec<ExactVector> = epsilon_of_index(k, b).into_iter().map(u_vector).collect();
            kron_vec(&factors)
        })
        .collect())
}

/// The basis vectors of Delta_n^+- (n even).
pub fn half_spin_basis(n: usize, c: Chirality) -> Result<Vec<ExactVector>> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    Ok(spinor_basis(n)?
        .into_iter()
        .enumerate()
        .filter(|(b, _)| index_chirality(*b) == c)
        .map(|(_, v)| v)
        .collect())
}

/// gamma_n: alternating alpha (x) beta (x) alpha ... starting with alpha in the
/// leftmost slot; beta is plain conjugation. For n = 1 the map is conjugation.
pub fn gamma_structure(n: usize) -> Result<AntilinearMap> {
    check_n(n)?;
    let k = n / 2;
    let factors: Vec<ExactMatrix> = (0..k)
        .map(|s| if s % 2 == 0 { alpha_matrix() } else { ExactMatrix::identity(2) })
        .collect();
    AntilinearMap::new(ExactMatrix::kron_all(&factors))
}

/// Expected sign of gamma_n^2 by n mod 8.
pub fn gamma_square_sign(n: usize) -> i64 {
    match n % 8 {
        0 | 1 | 6 | 7 => 1,
        _ => -1,
    }
}

/// Result of an exact identity check over a family of generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub n: usize,
    pub checked: usize,
    pub failures: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// kappa(e_i) kappa(e_j) + kappa(e_j) kappa(e_i) = -2 delta_ij Id for all i, j.
pub fn clifford_relations_check(n: usize) -> Result<CheckReport> {
    let rep = SpinRep::new(n)?;
    let mut failures = vec![];
    let mut checked = 0;
    for i in 1..=n {
        for j in i..=n {
            let a = rep.generator(i);
            let b = rep.generator(j);
            let anti = &(a * b) + &(b * a);
            let expect = if i == j { -2 } else { 0 };
            checked += 1;
            if anti.as_scalar() != Some(ExactScalar::int(expect)) {
                failures.push(format!("e{i}e{j}"));
            }
        }
    }
    Ok(CheckReport { n, checked, failures })
}

/// kappa(e_i) is skew-Hermitian and unitary for every generator, so Clifford
/// multiplication by vectors is skew for the Hermitian product.
pub fn clifford_mult_skew_check(n: usize) -> Result<CheckReport> {
    let rep = SpinRep::new(n)?;
    let mut failures = vec![];
    for i in 1..=n {
        let g = rep.generator(i);
        let adj = g.adjoint();
        if adj != -g {
            failures.push(format!("e{i} not skew-Hermitian"));
        }
        if !(&adj * g).is_identity() {
            failures.push(format!("e{i} not unitary"));
        }
    }
    Ok(CheckReport { n, checked: n, failures })
}

/// gamma_n^2 = +-Id with the expected sign, and gamma_n commutes with every
/// kappa(e_i e_j).
pub fn gamma_check(n: usize) -> Result<CheckReport> {
    let rep = SpinRep::new(n)?;
    let gamma = gamma_structure(n)?;
    let mut failures = vec![];
    let sq = gamma.square()?;
    if sq.as_scalar() != Some(ExactScalar::int(gamma_square_sign(n))) {
        failures.push(format!("gamma^2 != {}Id", gamma_square_sign(n)));
    }
    let mut checked = 1;
    for i in 1..=n {
        for j in i + 1..=n {
            checked += 1;
            if !gamma.commutes_with(&rep.bivector(i, j))? {
                failures.push(format!("gamma does not commute with e{i}e{j}"));
            }
        }
    }
    Ok(CheckReport { n, checked, failures })
}

/// Projector identities: idempotent, complementary, ranks 2^{n/2-1}, and
/// u_{1,...,1} in Delta^+ (n even).
pub fn half_spin_check(n: usize) -> Result<CheckReport> {
    let (pp, pm) = half_spin_projectors(n)?;
    let dim = spinor_dim(n);
    let mut failures = vec![];
    if &pp * &pp != pp || &pm * &pm != pm {
        failures.push("projector not idempotent".into());
    }
    if !(&pp * &pm).is_zero() || !(&pp + &pm).is_identity() {
        failures.push("projectors not complementary".into());
    }
    for (name, p) in [("P+", &pp), ("P-", &pm)] {
        let r = p.rank();
        if r != dim / 2 {
            failures.push(format!("rank {name} = {r}"));
        }
    }
    let basis = spinor_basis(n)?;
    if pp.apply(&basis[0])? != basis[0] {
        failures.push("u_(1,...,1) not in Delta+".into());
    }
    for (b, u) in basis.iter().enumerate() {
        let p = if index_chirality(b) == Chirality::Plus { &pp } else { &pm };
        if p.apply(u)? != *u {
            failures.push(format!("u_{b} chirality does not follow the parity rule"));
        }
    }
    Ok(CheckReport { n, checked: 5, failures })
}

/// The scalars by which kappa(vol_n) acts on Delta^+ and Delta^- (n even).
pub fn volume_action(n: usize) -> Result<(ExactScalar, ExactScalar)> {
    let rep = SpinRep::new(n)?;
    let vol = rep.volume();
    let on = |c| -> Result<ExactScalar> {
        vol.restrict(&half_spin_basis(n, c)?)?
            .as_scalar()
            .ok_or_else(|| Error::Internal("volume element not scalar on a half spinor space".into()))
    };
    Ok((on(Chirality::Plus)?, on(Chirality::Minus)?))
}

/// Algebra type of the even Clifford algebra Cl_r^0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlgebraKind {
    RealMatrix,
    ComplexMatrix,
    QuaternionMatrix,
    RealPair,
    QuaternionPair,
}

/// One row of the irreducible-representation table of Cl_r^0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Row {
    pub r: usize,
    pub r_mod8: usize,
    pub d_r: usize,
    pub algebra_kind: AlgebraKind,
    pub v_r: usize,
}

impl Table1Row {
    /// The algebra, e.g. "H(2)" or "R(8)+R(8)".
    pub fn algebra_label(&self) -> String {
        let d = self.d_r;
        match self.algebra_kind {
            AlgebraKind::RealMatrix => format!("R({d})"),
            AlgebraKind::ComplexMatrix => format!("C({})", d / 2),
            AlgebraKind::QuaternionMatrix => format!("H({})", d / 4),
            AlgebraKind::RealPair => format!("R({d})+R({d})"),
            AlgebraKind::QuaternionPair => format!("H({})+H({})", d / 4, d / 4),
        }
    }

    /// The irreducible module over its scalar field, e.g. "H^2".
    pub fn module_label(&self) -> String {
        let d = self.d_r;
        match self.algebra_kind {
            AlgebraKind::RealMatrix | AlgebraKind::RealPair => format!("R^{d}"),
            AlgebraKind::ComplexMatrix => format!("C^{}", d / 2),
            AlgebraKind::QuaternionMatrix | AlgebraKind::QuaternionPair => format!("H^{}", d / 4),
        }
    }
}

/// Real dimension of an irreducible Cl_r^0 module.
pub fn d_r(r: usize) -> usize {
    let h = r / 2;
    match r % 8 {
        1 | 7 => 1 << h,
        2 | 6 | 4 => 1 << h,
        3 | 5 => 1 << (h + 1),
        _ => 1 << (h - 1),
    }
}

pub fn table1(r: usize) -> Result<Table1Row> {
    if r == 0 {
        return Err(Error::InvalidParams("rank must be at least 1".into()));
    }
    let algebra_kind = match r % 8 {
        1 | 7 => AlgebraKind::RealMatrix,
        2 | 6 => AlgebraKind::ComplexMatrix,
        3 | 5 => AlgebraKind::QuaternionMatrix,
        4 => AlgebraKind::QuaternionPair,
        _ => AlgebraKind::RealPair,
    };
    Ok(Table1Row {
        r,
        r_mod8: r % 8,
        d_r: d_r(r),
        algebra_kind,
        v_r: if r.is_multiple_of(4) { 2 } else { 1 },
    })
}

/// How an irreducible real module is cut out of a complex spinor space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RealFormKind {
    /// Fixed points of the real structure gamma.
    GammaFixed,
    /// A complex space viewed as a real one.
    Realified,
}

/// An irreducible real Cl_r^0 module realized inside Delta_n (n = r, or
/// n = r + 3 for r = 4 mod 8) by an explicit real frame.
#[derive(Debug, Clone)]
pub struct RealForm {
    pub r: usize,
    pub chirality: Option<Chirality>,
    pub ambient: SpinRep,
    pub kind: RealFormKind,
    pub frame: Vec<ExactVector>,
}

impl RealForm {
    /// The module Delta~_r, or Delta~_r^+- for r = 0 mod 4 where +- is the
    /// eigenvalue of vol_r.
    pub fn new(r: usize, chirality: Option<Chirality>) -> Result<Self> {
        if r == 0 || r + 3 > MAX_DIM && r % 8 == 4 {
            return Err(Error::DimensionOutOfRange(r));
        }
        if r.is_multiple_of(4) != chirality.is_some() {
            return Err(Error::InvalidParams(format!(
                "rank {r} {} a chirality",
                if r.is_multiple_of(4) { "needs" } else { "takes no" }
            )));
        }
        let n = if r % 8 == 4 { r + 3 } else { r };
        let ambient = SpinRep::new(n)?;
        let basis = spinor_basis(n)?;
        let vol_r_diag = if r.is_multiple_of(4) {
            let vol = ambient.blade(((1u64 << r) - 1) as u32);
            Some(vol.restrict(&basis)?.diagonal()?)
        } else {
            None
        };
        let in_scope = |b: usize| match (chirality, &vol_r_diag) {
            (Some(c), Some(d)) => d[b] == ExactScalar::int(c.sign()),
            _ => r % 8 != 2 && r % 8 != 6 || index_chirality(b) == Chirality::Plus,
        };
        let indices: Vec<usize> = (0..basis.len()).filter(|&b| in_scope(b)).collect();
        let (kind, frame) = match r % 8 {
            2 | 3 | 5 | 6 => {
                let frame = indices
                    .iter()
                    .flat_map(|&b| [basis[b].clone(), basis[b].iter().map(|x| *x * ExactScalar::I).collect()])
                    .collect();
                (RealFormKind::Realified, frame)
            }
            _ => (RealFormKind::GammaFixed, gamma_fixed_frame(n, &basis, &indices)?),
        };
        let form = RealForm {
            r,
            chirality,
            ambient,
            kind,
            frame,
        };
        if form.dim() != d_r(r) {
            return Err(Error::Internal(format!(
                "real form of rank {r} has dimension {} instead of {}",
                form.dim(),
                d_r(r)
            )));
        }
        Ok(form)
    }

    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// Real matrix of a complex-linear map preserving the real span of the
    /// frame: entry (a, b) = Re<w_a, A w_b> / <w_a, w_a>.
    pub fn realify(&self, a: &ExactMatrix) -> Result<ExactMatrix> {
        let images: Vec<ExactVector> = self.frame.iter().map(|w| a.apply(w)).collect::<Result<_>>()?;
        self.coordinates(&images)
    }

    /// Real matrix of an antilinear map preserving the real span.
    pub fn realify_antilinear(&self, g: &AntilinearMap) -> Result<ExactMatrix> {
        let images: Vec<ExactVector> = self.frame.iter().map(|w| g.apply(w)).collect::<Result<_>>()?;
        self.coordinates(&images)
    }

    fn coordinates(&self, images: &[ExactVector]) -> Result<ExactMatrix> {
        let d = self.dim();
        let norms: Vec<ExactScalar> = self.frame.iter().map(|w| hermitian(w, w)).collect();
        let mut m = ExactMatrix::zeros(d, d);
        for (b, img) in images.iter().enumerate() {
            let mut recon = vec![ExactScalar::ZERO; img.len()];
            for a in 0..d {
                let c = hermitian(&self.frame[a], img).real_part().div_dyadic_real(&norms[a])?;
                if !c.is_zero() {
                    m.set(a, b, c);
                    for (x, y) in recon.iter_mut().zip(&self.frame[a]) {
                        *x = *x + c * *y;
                    }
                }
            }
            if recon != *img {
                return Err(Error::InvalidStructure("map does not preserve the real form".into()));
            }
        }
        Ok(m)
    }

    /// Real matrix of kappa(e_i e_j), 1 <= i < j <= r.
    pub fn bivector(&self, i: usize, j: usize) -> Result<ExactMatrix> {
        if i == 0 || j > self.r || i >= j {
            return Err(Error::IndexOutOfRange { index: j, n: self.r });
        }
        self.realify(&self.ambient.bivector(i, j))
    }
}

/// Real frame of Fix(gamma_n) inside the span of the given basis vectors,
/// which must be permuted (up to scalars) by gamma_n.
fn gamma_fixed_frame(n: usize, basis: &[ExactVector], indices: &[usize]) -> Result<Vec<ExactVector>> {
    let gamma = gamma_structure(n)?;
    if gamma_square_sign(n) != 1 {
        return Err(Error::WrongResidue(n));
    }
    let partner = |b: usize| -> Result<usize> {
        let img = gamma.apply(&basis[b])?;
        basis
            .iter()
            .position(|u| {
                let h = hermitian(u, &img);
                !h.is_zero()
            })
            .ok_or_else(|| Error::Internal("gamma image has no basis component".into()))
    };
    let add = |x: &ExactVector, y: &ExactVector| -> ExactVector { x.iter().zip(y).map(|(a, b)| *a + *b).collect() };
    let mut frame = vec![];
    for &b in indices {
        let p = partner(b)?;
        if !indices.contains(&p) {
            return Err(Error::InvalidStructure("gamma does not preserve the subspace".into()));
        }
        if p < b {
            continue;
        }
        let u = &basis[b];
        let iu: ExactVector = u.iter().map(|x| *x * ExactScalar::I).collect();
        let w1 = add(u, &gamma.apply(u)?);
        let w2 = add(&iu, &gamma.apply(&iu)?);
        let nonzero = |w: &ExactVector| w.iter().any(|x| !x.is_zero());
        if p == b {
            frame.push(if nonzero(&w1) { w1 } else { w2 });
        } else {
            frame.push(w1);
            frame.push(w2);
        }
    }
    Ok(frame)
}

/// Quaternionic structures (I, J, K) on the real module, as real matrices.
#[derive(Debug, Clone)]
pub struct QuaternionicTriple {
    pub i: ExactMatrix,
    pub j: ExactMatrix,
    pub k: ExactMatrix,
}

impl QuaternionicTriple {
    /// I^2 = J^2 = K^2 = -Id and IJ = K = -JI.
    pub fn relations_hold(&self) -> bool {
        let minus = |m: &ExactMatrix| (m * m).as_scalar() == Some(ExactScalar::int(-1));
        minus(&self.i)
            && minus(&self.j)
            && minus(&self.k)
            && &self.i * &self.j == self.k
            && &self.j * &self.i == -&self.k
    }

    /// Each of I, J, K commutes with every real kappa(e_a e_b), a < b <= r.
    pub fn commutes_with_even_action(&self, form: &RealForm) -> Result<bool> {
        for a in 1..=form.r {
            for b in a + 1..=form.r {
                let x = form.bivector(a, b)?;
                for q in [&self.i, &self.j, &self.k] {
                    if &x * q != q * &x {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

/// For r = 3, 5 mod 8: I = multiplication by i, J = gamma_r, K = IJ on the
/// realified Delta_r. For r = 4 mod 8: I, J, K are Clifford multiplication by
/// e_{r+1}e_{r+2}, e_{r+1}e_{r+3}, e_{r+2}e_{r+3} inside Delta_{r+3}
/// restricted to the chosen vol_r eigenspace.
pub fn quaternionic_triple(r: usize, chirality: Option<Chirality>) -> Result<(RealForm, QuaternionicTriple)> {
    match r % 8 {
        3 | 5 => {
            let form = RealForm::new(r, None)?;
            let i = form.realify(&ExactMatrix::scalar_identity(spinor_dim(r), ExactScalar::I))?;
            let j = form.realify_antilinear(&gamma_structure(r)?)?;
            let k = &i * &j;
            Ok((form, QuaternionicTriple { i, j, k }))
        }
        4 => {
            let c = chirality.ok_or_else(|| Error::InvalidParams("rank 4 mod 8 needs a chirality".into()))?;
            let form = RealForm::new(r, Some(c))?;
            let amb = &form.ambient;
            let i = form.realify(&amb.bivector(r + 1, r + 2))?;
            let j = form.realify(&amb.bivector(r + 1, r + 3))?;
            let k = form.realify(&amb.bivector(r + 2, r + 3))?;
            Ok((form, QuaternionicTriple { i, j, k }))
        }
        _ => Err(Error::WrongResidue(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blade_algebra::{rotor, volume_element, Q};

    #[test]
    fn low_dimensional_generators() {
        assert_eq!(kappa_generator(2, 1).unwrap(), g1());
        assert_eq!(kappa_generator(2, 2).unwrap(), g2());
        assert_eq!(kappa_generator(3, 3).unwrap(), t_matrix().scale(ExactScalar::I));
        assert_eq!(kappa_generator(1, 1).unwrap(), ExactMatrix::scalar_identity(1, ExactScalar::I));
        assert!(kappa_generator(3, 4).is_err());
        assert!(kappa_generator(17, 1).is_err());
        let e3 = kappa_generator(4, 3).unwrap();
        assert_eq!(e3, g1().kron(&t_matrix()));
    }

    #[test]
    fn clifford_relations_up_to_12() {
        for n in 1..=12 {
            let rep = clifford_relations_check(n).unwrap();
            assert!(rep.ok(), "n={n}: {:?}", rep.failures);
        }
    }

    #[test]
    fn skewness() {
        for n in [2, 5, 12] {
            assert!(clifford_mult_skew_check(n).unwrap().ok());
        }
        assert_eq!(g1().adjoint(), -&g1());
    }

    #[test]
    fn kappa_is_multiplicative() {
        let rep = SpinRep::new(5).unwrap();
        let a = Mv::product_of_vectors(5, &[1, 3]).unwrap();
        let b = &Mv::one(5).unwrap() + &Mv::product_of_vectors(5, &[2, 5]).unwrap().scale(&Q::new(1, 2));
        let lhs = rep.kappa(&(&a * &b)).unwrap();
        let rhs = &rep.kappa(&a).unwrap() * &rep.kappa(&b).unwrap();
        assert_eq!(lhs, rhs);
        assert!(rep.kappa(&Mv::one(5).unwrap()).unwrap().is_identity());
        let e12 = Mv::product_of_vectors(2, &[1, 2]).unwrap();
        assert_eq!(kappa(&e12, 2).unwrap(), &g1() * &g2());
        let third = Mv::scalar(5, Q::new(1, 3)).unwrap();
        assert!(matches!(rep.kappa(&third), Err(Error::NonDyadic(_))));
    }

    #[test]
    fn kappa_vol6_is_complex_structure() {
        let v = kappa(&volume_element(6).unwrap(), 6).unwrap();
        assert_eq!((&v * &v).as_scalar(), Some(ExactScalar::int(-1)));
    }

    #[test]
    fn gamma_signs_and_commutation() {
        for n in 1..=10 {
            let rep = gamma_check(n).unwrap();
            assert!(rep.ok(), "n={n}: {:?}", rep.failures);
        }
        assert_eq!(gamma_structure(1).unwrap().matrix, ExactMatrix::identity(1));
        let g4 = gamma_structure(4).unwrap();
        assert_eq!(g4.square().unwrap().as_scalar(), Some(ExactScalar::int(-1)));
    }

    #[test]
    fn spinor_basis_is_weight_basis() {
        let basis = spinor_basis(2).unwrap();
        assert_eq!(basis[0], vec![s(1, 0), s(0, -1)]);
        assert_eq!(basis[1], vec![s(1, 0), s(0, 1)]);
        let e12 = SpinRep::new(2).unwrap().bivector(1, 2);
        for (b, u) in basis.iter().enumerate() {
            let eps = epsilon_of_index(1, b)[0] as i64;
            let expect: ExactVector = u.iter().map(|x| *x * s(0, eps)).collect();
            assert_eq!(e12.apply(u).unwrap(), expect);
        }
        for n in [4, 7, 10] {
            let basis = spinor_basis(n).unwrap();
            for (a, u) in basis.iter().enumerate() {
                for (b, v) in basis.iter().enumerate() {
                    let h = hermitian(u, v);
                    if a == b {
                        assert_eq!(h, ExactScalar::int(1 << (n / 2)));
                    } else {
                        assert!(h.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn epsilon_indexing_round_trip() {
        for k in 0..6 {
            for b in 0..1usize << k {
                assert_eq!(index_of_epsilon(&epsilon_of_index(k, b)), b);
            }
        }
        assert_eq!(epsilon_of_index(3, 1), vec![1, 1, -1]);
    }

    #[test]
    fn torus_rotor_acts_on_last_slot() {
        let n = 6;
        let rep = SpinRep::new(n).unwrap();
        let basis = spinor_basis(n).unwrap();
        let g = rotor(n, 1, 2, Q::new(1, 2)).unwrap();
        let m = rep.kappa(&g).unwrap();
        for (b, u) in basis.iter().enumerate() {
            let eps_k = epsilon_of_index(3, b)[2] as i64;
            let expect: ExactVector = u.iter().map(|x| *x * s(0, eps_k)).collect();
            assert_eq!(m.apply(u).unwrap(), expect);
        }
    }

    #[test]
    fn half_spin_identities() {
        for n in (2..=12).step_by(2) {
            let rep = half_spin_check(n).unwrap();
            assert!(rep.ok(), "n={n}: {:?}", rep.failures);
        }
        assert_eq!(half_spin_projectors(3).unwrap_err(), Error::OddDimension(3));
    }

    #[test]
    fn volume_scalars_by_residue() {
        let i = ExactScalar::I;
        let one = ExactScalar::ONE;
        for n in (2..=12).step_by(2) {
            let (p, m) = volume_action(n).unwrap();
            let expect = match n % 8 {
                2 => (i, -i),
                6 => (-i, i),
                4 => (-one, one),
                _ => (one, -one),
            };
            assert_eq!((p, m), expect, "n={n}");
        }
    }

    #[test]
    fn table1_rows() {
        let row = table1(3).unwrap();
        assert_eq!((row.d_r, row.algebra_kind, row.v_r), (4, AlgebraKind::QuaternionMatrix, 1));
        let row = table1(8).unwrap();
        assert_eq!((row.d_r, row.algebra_kind, row.v_r), (8, AlgebraKind::RealPair, 2));
        let row = table1(6).unwrap();
        assert_eq!((row.d_r, row.algebra_kind), (8, AlgebraKind::ComplexMatrix));
        assert_eq!(table1(5).unwrap().algebra_label(), "H(2)");
        assert_eq!(table1(4).unwrap().algebra_label(), "H(1)+H(1)");
        let dims: Vec<usize> = (1..=16).map(d_r).collect();
        assert_eq!(dims, vec![1, 2, 4, 4, 8, 8, 8, 8, 16, 32, 64, 64, 128, 128, 128, 128]);
    }

    #[test]
    fn real_forms_have_table_dimension_and_carry_the_action() {
        for r in 2..=12 {
            let chiralities: Vec<Option<Chirality>> = if r % 4 == 0 {
                vec![Some(Chirality::Plus), Some(Chirality::Minus)]
            } else {
                vec![None]
            };
            for c in chiralities {
                let form = RealForm::new(r, c).unwrap();
                assert_eq!(form.dim(), d_r(r));
                for i in 1..=r.min(4) {
                    for j in i + 1..=r.min(5) {
                        let m = form.bivector(i, j).unwrap();
                        assert!(m.is_real());
                        assert_eq!(m.transpose(), -&m, "r={r} e{i}e{j}");
                        assert_eq!((&m * &m).as_scalar(), Some(ExactScalar::int(-1)));
                    }
                }
            }
        }
        assert!(RealForm::new(8, None).is_err());
        assert!(RealForm::new(7, Some(Chirality::Plus)).is_err());
    }

    #[test]
    fn quaternionic_triples() {
        for r in [3, 5, 11] {
            let (form, q) = quaternionic_triple(r, None).unwrap();
            assert!(q.relations_hold(), "r={r}");
            assert!(q.commutes_with_even_action(&form).unwrap());
        }
        for c in Chirality::both() {
            let (form, q) = quaternionic_triple(4, Some(c)).unwrap();
            assert!(q.relations_hold());
            assert!(q.commutes_with_even_action(&form).unwrap());
        }
        assert_eq!(quaternionic_triple(6, None).unwrap_err(), Error::WrongResidue(6));
    }

    #[test]
    fn rank4_plus_form_has_i_plus_from_projected_element() {
        let r = 4;
        let form = RealForm::new(r, Some(Chirality::Plus)).unwrap();
        let n = r + 3;
        let half = Q::new(1, 2);
        let proj = &Mv::one(n).unwrap() + &volume_element(r).unwrap().embed(n).unwrap();
        let elem = &proj.scale(&half) * &Mv::product_of_vectors(n, &[5, 6]).unwrap();
        let m = form.realify(&form.ambient.kappa(&elem).unwrap()).unwrap();
        assert_eq!((&m * &m).as_scalar(), Some(ExactScalar::int(-1)));
    }
}
