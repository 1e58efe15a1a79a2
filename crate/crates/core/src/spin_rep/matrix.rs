//! Dense matrices over dyadic Gaussian rationals and antilinear maps.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::scalar::ExactScalar;
use crate::error::{Error, Result};
use crate::linalg;

/// A column vector of exact scalars.
pub type ExactVector = Vec<ExactScalar>;

/// Row-major dense matrix over dyadic Gaussian rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ExactScalar>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            data: vec![ExactScalar::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar_identity(n, ExactScalar::ONE)
    }

    pub fn scalar_identity(n: usize, c: ExactScalar) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> ExactScalar) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExactMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<ExactScalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if let Some(bad) = rows.iter().find(|x| x.len() != c) {
            return Err(Error::DimensionMismatch(c, bad.len()));
        }
        Ok(ExactMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    /// Integer Gaussian entries given as (re, im) pairs.
    pub fn from_gaussian(rows: &[&[(i64, i64)]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| ExactScalar::gaussian(a, b)).collect())
                .collect(),
        )
    }

    pub fn diagonal_matrix(d: &[ExactScalar]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            m.data[i * n + i] = *x;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ExactVector]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        if let Some(bad) = cols.iter().find(|v| v.len() != r) {
            return Err(Error::DimensionMismatch(r, bad.len()));
        }
        Ok(Self::from_fn(r, c, |i, j| cols[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> ExactScalar {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: ExactScalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[ExactScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> ExactVector {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[ExactScalar] {
        &self.data
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(self.cols, o.rows));
        }
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let orow = &o.data[k * o.cols..(k + 1) * o.cols];
                let dst = &mut out.data[i * o.cols..(i + 1) * o.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    if !b.is_zero() {
                        *d = *d + a * *b;
                    }
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, o: &Self, f: impl Fn(ExactScalar, ExactScalar) -> ExactScalar) -> Result<Self> {
        if self.rows != o.rows || self.cols != o.cols {
            return Err(Error::DimensionMismatch(self.rows * self.cols, o.rows * o.cols));
        }
        Ok(ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a + b)
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.zip_with(o, |a, b| a - b)
    }

    pub fn scale(&self, c: ExactScalar) -> Self {
        self.map(|x| x * c)
    }

    pub fn map(&self, f: impl Fn(ExactScalar) -> ExactScalar) -> Self {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(*x)).collect(),
        }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        self.map(|x| x.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    /// Kronecker product; the left factor indexes the most significant block.
    pub fn kron(&self, o: &Self) -> Self {
        let rows = self.rows * o.rows;
        let cols = self.cols * o.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        out.data[(i * o.rows + k) * cols + j * o.cols + l] = a * o.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Kronecker product of a list of factors, leftmost most significant.
    pub fn kron_all(factors: &[ExactMatrix]) -> Self {
        factors
            .iter()
            .fold(Self::identity(1), |acc, f| acc.kron(f))
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[ExactMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j));
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.as_scalar() == Some(ExactScalar::ONE)
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Some(c) if the matrix is c times the identity.
    pub fn as_scalar(&self) -> Option<ExactScalar> {
        if !self.is_diagonal() || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0);
        (0..self.rows).all(|i| self.get(i, i) == c).then_some(c)
    }

    pub fn diagonal(&self) -> Result<ExactVector> {
        if !self.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).collect())
    }

    pub fn trace(&self) -> ExactScalar {
        (0..self.rows.min(self.cols)).fold(ExactScalar::ZERO, |acc, i| acc + self.get(i, i))
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.is_real())
    }

    pub fn apply(&self, v: &[ExactScalar]) -> Result<ExactVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(self.cols, v.len()));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(ExactScalar::ZERO, |acc, (a, b)| acc + *a * *b)
            })
            .collect())
    }

    /// Rank over Q(i), via the real rank of [[Re, -Im], [Im, Re]] halved.
    pub fn rank(&self) -> usize {
        let (r, c) = (self.rows, self.cols);
        let mut real = vec![vec![num_rational::BigRational::zero(); 2 * c]; 2 * r];
        for i in 0..r {
            for j in 0..c {
                let (re, im) = self.get(i, j).to_rationals();
                let re = linalg::big(re);
                let im = linalg::big(im);
                real[i][j] = re.clone();
                real[i][c + j] = -im.clone();
                real[r + i][j] = im;
                real[r + i][c + j] = re;
            }
        }
        linalg::rank(real) / 2
    }

    /// Matrix of the restriction to the span of pairwise orthogonal basis
    /// vectors with power-of-two squared norms: entry (a, b) is
    /// <b_a, A b_b> / <b_a, b_a>. Fails if the span is not invariant.
    pub fn restrict(&self, basis: &[ExactVector]) -> Result<Self> {
        let images: Vec<ExactVector> = basis.iter().map(|b| self.apply(b)).collect::<Result<_>>()?;
        let norms: Vec<ExactScalar> = basis.iter().map(|b| hermitian(b, b)).collect();
        for n in &norms {
            n.div_dyadic_real(n)?;
        }
        let out = Self::from_fn(basis.len(), basis.len(), |a, b| {
            hermitian(&basis[a], &images[b])
                .div_dyadic_real(&norms[a])
                .expect("norms checked dyadic")
        });
        for (b, img) in images.iter().enumerate() {
            let mut recon = vec![ExactScalar::ZERO; self.rows];
            for (a, v) in basis.iter().enumerate() {
                let c = out.get(a, b);
                if !c.is_zero() {
                    for (x, y) in recon.iter_mut().zip(v) {
                        *x = *x + c * *y;
                    }
                }
            }
            if recon != *img {
                return Err(Error::InvalidStructure("subspace is not invariant".into()));
            }
        }
        Ok(out)
    }

    /// Entries as (re, im) doubles, row-major.
    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(|x| x.to_f64()).collect()
    }
}

/// <u, v> = sum conj(u_i) v_i.
pub fn hermitian(u: &[ExactScalar], v: &[ExactScalar]) -> ExactScalar {
    u.iter()
        .zip(v)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .fold(ExactScalar::ZERO, |acc, (a, b)| acc + a.conj() * *b)
}

/// Tensor product of vectors, leftmost most significant.
pub fn kron_vec(factors: &[ExactVector]) -> ExactVector {
    factors.iter().fold(vec![ExactScalar::ONE], |acc, f| {
        acc.iter().flat_map(|a| f.iter().map(move |b| *a * *b)).collect()
    })
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    /// Panics on shape mismatch; use [`ExactMatrix::try_mul`] to handle it.
    fn mul(self, o: &ExactMatrix) -> ExactMatrix {
        self.try_mul(o).expect("matrix shapes agree")
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, o: &ExactMatrix) -> ExactMatrix {
        self.try_add(o).expect("matrix shapes agree")
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, o: &ExactMatrix) -> ExactMatrix {
        self.try_sub(o).expect("matrix shapes agree")
    }
}

impl Neg for &ExactMatrix {
    type Output = ExactMatrix;
    fn neg(self) -> ExactMatrix {
        self.map(|x| -x)
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// v -> M * conj(v).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AntilinearMap {
    pub matrix: ExactMatrix,
}

impl AntilinearMap {
    pub fn new(matrix: ExactMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch(matrix.rows(), matrix.cols()));
        }
        Ok(AntilinearMap { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, v: &[ExactScalar]) -> Result<ExactVector> {
        let c: ExactVector = v.iter().map(|x| x.conj()).collect();
        self.matrix.apply(&c)
    }

    /// (A o B).matrix = A.matrix * conj(B.matrix); the composite is linear.
    pub fn compose(&self, other: &AntilinearMap) -> Result<ExactMatrix> {
        self.matrix.try_mul(&other.matrix.conj())
    }

    /// A o A as a linear map.
    pub fn square(&self) -> Result<ExactMatrix> {
        self.compose(self)
    }

    /// A o L as an antilinear map.
    pub fn after_linear(&self, l: &ExactMatrix) -> Result<AntilinearMap> {
        AntilinearMap::new(self.matrix.try_mul(&l.conj())?)
    }

    /// L o A as an antilinear map.
    pub fn before_linear(&self, l: &ExactMatrix) -> Result<AntilinearMap> {
        AntilinearMap::new(l.try_mul(&self.matrix)?)
    }

    /// A o L = L o A.
    pub fn commutes_with(&self, l: &ExactMatrix) -> Result<bool> {
        Ok(self.after_linear(l)? == self.before_linear(l)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: i64, b: i64) -> ExactScalar {
        ExactScalar::gaussian(a, b)
    }

    #[test]
    fn kron_shapes_and_entries() {
        let a = ExactMatrix::from_gaussian(&[&[(1, 0), (2, 0)], &[(0, 1), (0, 0)]]).unwrap();
        let b = ExactMatrix::identity(2);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 4);
        assert_eq!(k.get(0, 2), s(2, 0));
        assert_eq!(k.get(3, 1), s(0, 1));
        assert_eq!(k.get(3, 0), s(0, 0));
        let a2 = ExactMatrix::from_gaussian(&[&[(0, 1)]]).unwrap();
        assert_eq!(a2.kron(&b), ExactMatrix::scalar_identity(2, s(0, 1)));
    }

    #[test]
    fn kron_mixed_product() {
        let a = ExactMatrix::from_gaussian(&[&[(1, 1), (0, 2)], &[(3, 0), (0, -1)]]).unwrap();
        let b = ExactMatrix::from_gaussian(&[&[(0, 1), (1, 0)], &[(2, 0), (1, -1)]]).unwrap();
        let c = ExactMatrix::from_gaussian(&[&[(1, 0), (1, 0)], &[(0, 1), (5, 0)]]).unwrap();
        let d = ExactMatrix::from_gaussian(&[&[(2, 0), (0, 0)], &[(0, 0), (0, 3)]]).unwrap();
        assert_eq!(&a.kron(&b) * &c.kron(&d), (&a * &c).kron(&(&b * &d)));
    }

    #[test]
    fn rank_over_gaussian_field() {
        let m = ExactMatrix::from_gaussian(&[&[(1, 0), (0, 1)], &[(0, 1), (-1, 0)]]).unwrap();
        assert_eq!(m.rank(), 1);
        assert_eq!(ExactMatrix::identity(3).rank(), 3);
        assert_eq!(ExactMatrix::zeros(2, 3).rank(), 0);
    }

    #[test]
    fn antilinear_composition() {
        let alpha = AntilinearMap::new(ExactMatrix::from_gaussian(&[&[(0, 0), (-1, 0)], &[(1, 0), (0, 0)]]).unwrap()).unwrap();
        assert_eq!(alpha.square().unwrap(), ExactMatrix::scalar_identity(2, s(-1, 0)));
        let v = vec![s(1, 2), s(3, -1)];
        assert_eq!(alpha.apply(&v).unwrap(), vec![s(-3, -1), s(1, -2)]);
        let twice = alpha.apply(&alpha.apply(&v).unwrap()).unwrap();
        assert_eq!(alpha.square().unwrap().apply(&v).unwrap(), twice);
    }

    #[test]
    fn restriction_to_eigenbasis() {
        let m = ExactMatrix::from_gaussian(&[&[(0, 0), (-1, 0)], &[(1, 0), (0, 0)]]).unwrap();
        let up = vec![s(1, 0), s(0, -1)];
        let um = vec![s(1, 0), s(0, 1)];
        let r = m.restrict(std::slice::from_ref(&up)).unwrap();
        assert_eq!(r, ExactMatrix::scalar_identity(1, s(0, 1)));
        let both = m.restrict(&[up, um]).unwrap();
        assert_eq!(both.diagonal().unwrap(), vec![s(0, 1), s(0, -1)]);
        assert!(m.restrict(&[vec![s(1, 0), s(0, 0)]]).is_err());
    }

    #[test]
    fn direct_sum_and_scalar_detection() {
        let d = ExactMatrix::direct_sum(&[ExactMatrix::identity(2), ExactMatrix::identity(1)]);
        assert!(d.is_identity());
        let e = ExactMatrix::direct_sum(&[ExactMatrix::identity(1), ExactMatrix::scalar_identity(1, s(-1, 0))]);
        assert_eq!(e.as_scalar(), None);
        assert_eq!(e.diagonal().unwrap(), vec![s(1, 0), s(-1, 0)]);
    }
}
