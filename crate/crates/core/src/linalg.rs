//! Exact linear algebra: rational rank and nullspace, a sparse homogeneous
//! solver for commutation systems, and integer kernels.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};

pub fn big(q: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(rows: &mut [Vec<BigRational>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    rref(&mut rows).len()
}

/// Basis of {x : A x = 0}.
pub fn nullspace(mut rows: Vec<Vec<BigRational>>, ncols: usize) -> Vec<Vec<BigRational>> {
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -rows[i][f].clone();
            }
            v
        })
        .collect()
}

/// Homogeneous linear system over Q in many unknowns. Equations of the form
/// x_p = +-x_q or x_p = 0 go through a signed union-find; anything else is
/// reduced to class representatives and eliminated exactly at the end.
#[derive(Debug, Clone)]
pub struct HomogeneousSystem {
    parent: Vec<usize>,
    sign: Vec<i8>,
    zero: Vec<bool>,
    general: Vec<Vec<(usize, BigRational)>>,
}

impl HomogeneousSystem {
    pub fn new(nvars: usize) -> Self {
        HomogeneousSystem {
            parent: (0..nvars).collect(),
            sign: vec![1; nvars],
            zero: vec![false; nvars],
            general: vec![],
        }
    }

    pub fn nvars(&self) -> usize {
        self.parent.len()
    }

    /// (root, s) with x_v = s * x_root.
    fn find(&mut self, v: usize) -> (usize, i8) {
        let mut path = vec![];
        let mut cur = v;
        while self.parent[cur] != cur {
            path.push(cur);
            cur = self.parent[cur];
        }
        let root = cur;
        let mut acc = 1i8;
        for &node in path.iter().rev() {
            acc *= self.sign[node];
            self.sign[node] = acc;
            self.parent[node] = root;
        }
        (root, if path.is_empty() { 1 } else { self.sign[v] })
    }

    /// Imposes x_a = s * x_b.
    fn unite(&mut self, a: usize, b: usize, s: i8) {
        let (ra, sa) = self.find(a);
        let (rb, sb) = self.find(b);
        if ra == rb {
            if sa * s * sb == -1 {
                self.zero[ra] = true;
            }
            return;
        }
        self.parent[ra] = rb;
        self.sign[ra] = sa * s * sb;
        if self.zero[ra] {
            self.zero[rb] = true;
        }
    }

    /// Adds sum_k c_k x_{v_k} = 0.
    pub fn add_equation(&mut self, terms: &[(usize, BigRational)]) {
        let mut merged: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (v, c) in terms {
            *merged.entry(*v).or_insert_with(BigRational::zero) += c;
        }
        merged.retain(|_, c| !c.is_zero());
        let t: Vec<(usize, BigRational)> = merged.into_iter().collect();
        match t.as_slice() {
            [] => {}
            [(v, _)] => {
                let (r, _) = self.find(*v);
                self.zero[r] = true;
            }
            [(a, ca), (b, cb)] if ca.abs() == cb.abs() => {
                let s = if ca == cb { -1 } else { 1 };
                self.unite(*a, *b, s);
            }
            _ => self.general.push(t),
        }
    }

    /// Dimension of the solution space.
    pub fn nullity(&mut self) -> usize {
        let n = self.nvars();
        let mut live: HashMap<usize, usize> = HashMap::new();
        for v in 0..n {
            let (r, _) = self.find(v);
            if !self.zero[r] && !live.contains_key(&r) {
                let k = live.len();
                live.insert(r, k);
            }
        }
        if self.general.is_empty() {
            return live.len();
        }
        let general = std::mem::take(&mut self.general);
        let mut rows = vec![];
        for eq in &general {
            let mut row = vec![BigRational::zero(); live.len()];
            for (v, c) in eq {
                let (r, s) = self.find(*v);
                if let Some(&k) = live.get(&r) {
                    row[k] += c * BigRational::from_integer(BigInt::from(s));
                }
            }
            rows.push(row);
        }
        self.general = general;
        live.len() - rank(rows)
    }
}

/// Basis of the lattice {n in Z^k : sum_i n_i v_i = 0} for integer vectors
/// v_1..v_k, via unimodular row reduction of [V | I].
pub fn integer_kernel(vectors: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let k = vectors.len();
    let d = vectors.first().map_or(0, |v| v.len());
    let mut rows: Vec<Vec<i128>> = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut r = v.clone();
            r.extend((0..k).map(|j| (i == j) as i128));
            r
        })
        .collect();
    let mut top = 0;
    for c in 0..d {
        loop {
            let nz: Vec<usize> = (top..k).filter(|&i| rows[i][c] != 0).collect();
            if nz.len() <= 1 {
                if let Some(&i) = nz.first() {
                    rows.swap(top, i);
                    top += 1;
                }
                break;
            }
            let m = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).expect("nonempty");
            rows.swap(top, m);
            let pivot = rows[top].clone();
            for row in rows.iter_mut().skip(top + 1) {
                let q = row[c].div_euclid(pivot[c]);
                if q != 0 {
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x -= q * y;
                    }
                }
            }
        }
    }
    rows[top..].iter().map(|r| r[d..].to_vec()).collect()
}

/// Hermite-style normal form of a lattice basis (rows), so lattices can be
/// compared: rows in echelon form with positive pivots, entries above each
/// pivot reduced into [0, pivot).
pub fn lattice_normal_form(basis: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let Some(d) = basis.first().map(|v| v.len()) else {
        return vec![];
    };
    let mut rows: Vec<Vec<i128>> = basis.to_vec();
    let mut top = 0;
    for c in 0..d {
        loop {
            let nz: Vec<usize> = (top..rows.len()).filter(|&i| rows[i][c] != 0).collect();
            if nz.is_empty() {
                break;
            }
            let m = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).expect("nonempty");
            rows.swap(top, m);
            if rows[top][c] < 0 {
                for x in rows[top].iter_mut() {
                    *x = -*x;
                }
            }
            let pivot = rows[top].clone();
            let mut done = true;
            for row in rows.iter_mut().skip(top + 1) {
                let q = row[c].div_euclid(pivot[c]);
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= q * y;
                }
                if row[c] != 0 {
                    done = false;
                }
            }
            if done {
                for i in 0..top {
                    let q = rows[i][c].div_euclid(pivot[c]);
                    for j in 0..d {
                        rows[i][j] -= q * pivot[j];
                    }
                }
                top += 1;
                break;
            }
        }
    }
    rows.truncate(top);
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(a: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(a))
    }

    #[test]
    fn rank_and_nullspace() {
        let rows = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]];
        assert_eq!(rank(rows.clone()), 2);
        let ns = nullspace(rows.clone(), 3);
        assert_eq!(ns.len(), 1);
        for row in &rows {
            let dot: BigRational = row.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn union_find_system() {
        let mut s = HomogeneousSystem::new(5);
        s.add_equation(&[(0, q(1)), (1, q(-1))]);
        s.add_equation(&[(1, q(1)), (2, q(1))]);
        assert_eq!(s.nullity(), 3);
        s.add_equation(&[(0, q(1)), (2, q(1))]);
        assert_eq!(s.nullity(), 3);
        s.add_equation(&[(0, q(1)), (2, q(-1))]);
        assert_eq!(s.nullity(), 2);
        s.add_equation(&[(3, q(2)), (4, q(1)), (0, q(0))]);
        assert_eq!(s.nullity(), 1);
        s.add_equation(&[(4, q(5))]);
        assert_eq!(s.nullity(), 0);
    }

    #[test]
    fn integer_kernel_examples() {
        let k = integer_kernel(&[vec![2], vec![3]]);
        assert_eq!(k.len(), 1);
        assert_eq!(2 * k[0][0] + 3 * k[0][1], 0);
        assert_eq!(k[0][0].abs(), 3);
        let k = integer_kernel(&[vec![1, 0], vec![0, 1]]);
        assert!(k.is_empty());
        let k = integer_kernel(&[vec![0], vec![0]]);
        assert_eq!(lattice_normal_form(&k), vec![vec![1, 0], vec![0, 1]]);
    }

    proptest! {
        #[test]
        fn homogeneous_system_matches_dense_rank(
            eqs in proptest::collection::vec(
                proptest::collection::vec((0usize..6, -2i64..3), 1..4), 0..8)
        ) {
            let mut sys = HomogeneousSystem::new(6);
            let mut dense = vec![];
            for eq in &eqs {
                let terms: Vec<(usize, BigRational)> = eq.iter().map(|(v, c)| (*v, q(*c))).collect();
                sys.add_equation(&terms);
                let mut row = vec![q(0); 6];
                for (v, c) in &terms {
                    row[*v] += c;
                }
                dense.push(row);
            }
            prop_assert_eq!(sys.nullity(), 6 - rank(dense));
        }

        #[test]
        fn integer_kernel_is_exact(
            vecs in proptest::collection::vec(proptest::collection::vec(-6i128..7, 2), 1..5)
        ) {
            let ker = integer_kernel(&vecs);
            for n in &ker {
                for c in 0..2 {
                    let s: i128 = n.iter().zip(&vecs).map(|(a, v)| a * v[c]).sum();
                    prop_assert_eq!(s, 0);
                }
            }
            let rows: Vec<Vec<BigRational>> = (0..2)
                .map(|c| vecs.iter().map(|v| BigRational::from_integer(BigInt::from(v[c] as i64))).collect())
                .collect();
            prop_assert_eq!(ker.len(), vecs.len() - rank(rows));
        }
    }
}
