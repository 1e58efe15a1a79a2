//! Finite subgroup enumeration with full multiplication tables, element
//! orders and abelian invariant factors.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use super::{clifford_product, Mv};
use crate::error::{Error, Result};

/// Default bound on the number of enumerated elements.
pub const CLOSURE_GUARD: usize = 512;

/// Anything with an associative product usable by the closure engine.
pub trait GroupElement: Clone + Eq + Hash + fmt::Debug {
    fn op(&self, other: &Self) -> Self;
}

impl GroupElement for Mv {
    /// Panics on mixed dimensions; [`group_closure`] checks them up front.
    fn op(&self, other: &Self) -> Self {
        clifford_product(self, other).expect("closure elements share a dimension")
    }
}

/// A finitely generated abelian group Z^free + sum of Z_{t} with every t a
/// prime power, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup {
            free_rank: 0,
            torsion: vec![],
        }
    }

    pub fn new(free_rank: usize, torsion: impl IntoIterator<Item = u64>) -> Self {
        let mut t: Vec<u64> = torsion.into_iter().flat_map(primary_parts).collect();
        t.sort_unstable();
        AbelianGroup {
            free_rank,
            torsion: t,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn torsion_order(&self) -> u64 {
        self.torsion.iter().product()
    }

    /// Summands as strings, free part first: ["Z", "Z2", "Z4"].
    pub fn summands(&self) -> Vec<String> {
        std::iter::repeat_n("Z".to_string(), self.free_rank)
            .chain(self.torsion.iter().map(|t| format!("Z{t}")))
            .collect()
    }

    /// Parses the output of `Display` back ("{1}" or "Z+Z2+...").
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "{1}" || s == "1" {
            return Ok(Self::trivial());
        }
        let mut free = 0;
        let mut tors = vec![];
        for part in s.split('+') {
            let part = part.trim();
            if part == "Z" {
                free += 1;
            } else if let Some(t) = part.strip_prefix('Z') {
                tors.push(
                    t.parse::<u64>()
                        .map_err(|_| Error::InvalidParams(format!("bad summand {part}")))?,
                );
            } else {
                return Err(Error::InvalidParams(format!("bad summand {part}")));
            }
        }
        Ok(Self::new(free, tors))
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            write!(f, "{{1}}")
        } else {
            write!(f, "{}", self.summands().join("+"))
        }
    }
}

fn primary_parts(mut t: u64) -> Vec<u64> {
    let mut out = vec![];
    let mut p = 2;
    while t > 1 {
        if t.is_multiple_of(p) {
            let mut q = 1;
            while t.is_multiple_of(p) {
                t /= p;
                q *= p;
            }
            out.push(q);
        }
        p += 1;
    }
    out
}

/// A finite group given by its elements and full multiplication table.
#[derive(Debug, Clone)]
pub struct GroupTable<E> {
    pub elements: Vec<E>,
    /// product[i][j] = index of elements[i] * elements[j].
    pub product: Vec<Vec<usize>>,
    pub orders: Vec<u64>,
    pub identity: usize,
}

/// Closure of multivector generators inside Cl_n, bounded by [`CLOSURE_GUARD`].
pub fn group_closure(gens: &[Mv]) -> Result<GroupTable<Mv>> {
    let n = gens
        .first()
        .map(|g| g.n())
        .ok_or_else(|| Error::InvalidParams("no generators".into()))?;
    if let Some(g) = gens.iter().find(|g| g.n() != n) {
        return Err(Error::DimensionMismatch(n, g.n()));
    }
    group_closure_of(Mv::one(n)?, gens, CLOSURE_GUARD)
}

/// Breadth-first closure of `gens` under right multiplication; the generated
/// monoid of a finite group is the generated group.
pub fn group_closure_of<E: GroupElement>(
    identity: E,
    gens: &[E],
    guard: usize,
) -> Result<GroupTable<E>> {
    let mut elements = vec![identity.clone()];
    let mut index: HashMap<E, usize> = HashMap::from([(identity, 0)]);
    let mut next = 0;
    while next < elements.len() {
        let x = elements[next].clone();
        next += 1;
        for g in gens {
            let y = x.op(g);
            if !index.contains_key(&y) {
                if elements.len() >= guard {
                    return Err(Error::ClosureGuard(guard));
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
            }
        }
    }
    let product: Vec<Vec<usize>> = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| {
                    index
                        .get(&a.op(b))
                        .copied()
                        .ok_or_else(|| Error::Internal("closure not closed".into()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let orders = (0..elements.len())
        .map(|i| {
            let mut k = 1;
            let mut cur = i;
            while cur != 0 {
                cur = product[cur][i];
                k += 1;
            }
            k
        })
        .collect();
    Ok(GroupTable {
        elements,
        product,
        orders,
        identity: 0,
    })
}

impl<E: GroupElement> GroupTable<E> {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, e: &E) -> Option<usize> {
        self.elements.iter().position(|x| x == e)
    }

    pub fn element_order(&self, e: &E) -> Option<u64> {
        self.index_of(e).map(|i| self.orders[i])
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.product[i]
            .iter()
            .position(|&k| k == self.identity)
            .expect("finite group elements are invertible")
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|i| (i + 1..n).all(|j| self.product[i][j] == self.product[j][i]))
    }

    /// Checks closure, identity, inverses and associativity on all triples
    /// (or on a strided sample for large tables).
    pub fn verify_axioms(&self) -> bool {
        let n = self.order();
        let identity_ok = (0..n).all(|i| self.product[self.identity][i] == i && self.product[i][self.identity] == i);
        let unique_identity = (0..n)
            .filter(|&e| (0..n).all(|i| self.product[e][i] == i))
            .count()
            == 1;
        let inverses_ok = (0..n).all(|i| self.product[i].contains(&self.identity));
        let step = (n / 24).max(1);
        let assoc_ok = (0..n).step_by(step).all(|a| {
            (0..n).step_by(step).all(|b| {
                (0..n).step_by(step).all(|c| {
                    self.product[self.product[a][b]][c] == self.product[a][self.product[b][c]]
                })
            })
        });
        identity_ok && unique_identity && inverses_ok && assoc_ok
    }

    /// Primary decomposition read off from element-order counts: for each
    /// prime p, the number of cyclic factors of order at least p^j is
    /// log_p(#{x : x^{p^j} = 1} / #{x : x^{p^{j-1}} = 1}).
    pub fn abelian_invariants(&self) -> Option<AbelianGroup> {
        if !self.is_abelian() {
            return None;
        }
        let n = self.order() as u64;
        let mut torsion = vec![];
        for q in primary_parts(n) {
            let p = smallest_prime_factor(q);
            let count_dividing = |d: u64| self.orders.iter().filter(|&&o| d.is_multiple_of(o)).count() as u64;
            let mut at_least = vec![];
            let mut pj = p;
            while pj <= q {
                let mut ratio = count_dividing(pj) / count_dividing(pj / p);
                let mut k = 0;
                while ratio > 1 {
                    ratio /= p;
                    k += 1;
                }
                if k == 0 {
                    break;
                }
                at_least.push(k);
                pj *= p;
            }
            for (j, &a) in at_least.iter().enumerate() {
                let next = at_least.get(j + 1).copied().unwrap_or(0);
                for _ in 0..(a - next) {
                    torsion.push(p.pow(j as u32 + 1));
                }
            }
        }
        Some(AbelianGroup::new(0, torsion))
    }
}

fn smallest_prime_factor(q: u64) -> u64 {
    (2..=q).find(|p| q.is_multiple_of(*p)).unwrap_or(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blade_algebra::{volume_element, Q};

    #[derive(Debug, Clone, PartialEq, Eq, Hash)]
    struct Zmod(Vec<(u64, u64)>);

    impl GroupElement for Zmod {
        fn op(&self, o: &Self) -> Self {
            Zmod(
                self.0
                    .iter()
                    .zip(&o.0)
                    .map(|((a, n), (b, _))| ((a + b) % n, *n))
                    .collect(),
            )
        }
    }

    fn zmod_group(moduli: &[u64]) -> GroupTable<Zmod> {
        let id = Zmod(moduli.iter().map(|&n| (0, n)).collect());
        let gens: Vec<Zmod> = (0..moduli.len())
            .map(|i| Zmod(moduli.iter().enumerate().map(|(j, &n)| ((i == j) as u64, n)).collect()))
            .collect();
        group_closure_of(id, &gens, 10_000).unwrap()
    }

    #[test]
    fn minus_one_has_order_two() {
        let g = group_closure(&[Mv::scalar(3, Q::from_integer(-1)).unwrap()]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.abelian_invariants().unwrap(), AbelianGroup::new(0, [2]));
    }

    #[test]
    fn vol4_and_minus_one() {
        let g = group_closure(&[volume_element(4).unwrap(), Mv::scalar(4, Q::from_integer(-1)).unwrap()]).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.abelian_invariants().unwrap(), AbelianGroup::new(0, [2, 2]));
        assert!(g.verify_axioms());
    }

    #[test]
    fn vol6_is_cyclic_of_order_four() {
        let g = group_closure(&[volume_element(6).unwrap()]).unwrap();
        assert_eq!(g.order(), 4);
        assert_eq!(g.abelian_invariants().unwrap(), AbelianGroup::new(0, [4]));
    }

    #[test]
    fn guard_trips_on_large_groups() {
        let id = Zmod(vec![(0, 1000)]);
        let g = Zmod(vec![(1, 1000)]);
        assert_eq!(group_closure_of(id, &[g], CLOSURE_GUARD).unwrap_err(), Error::ClosureGuard(512));
    }

    #[test]
    fn invariants_of_products_of_cyclic_groups() {
        for moduli in [&[2u64, 4][..], &[4, 4], &[2, 2, 2], &[6], &[8, 2], &[3, 9], &[12, 2]] {
            let g = zmod_group(moduli);
            assert!(g.verify_axioms());
            assert_eq!(g.abelian_invariants().unwrap(), AbelianGroup::new(0, moduli.iter().copied()));
        }
    }

    #[test]
    fn quaternion_group_is_not_abelian() {
        let n = 3;
        let e12 = Mv::product_of_vectors(n, &[1, 2]).unwrap();
        let e23 = Mv::product_of_vectors(n, &[2, 3]).unwrap();
        let g = group_closure(&[e12, e23]).unwrap();
        assert_eq!(g.order(), 8);
        assert!(!g.is_abelian());
        assert!(g.abelian_invariants().is_none());
        assert!(g.verify_axioms());
    }

    #[test]
    fn display_and_parse_round_trip() {
        for g in [AbelianGroup::trivial(), AbelianGroup::new(2, []), AbelianGroup::new(1, [4, 2])] {
            assert_eq!(AbelianGroup::parse(&g.to_string()).unwrap(), g);
        }
        assert_eq!(AbelianGroup::new(1, [4, 2]).to_string(), "Z+Z2+Z4");
        assert_eq!(AbelianGroup::new(0, [12]).torsion, vec![3, 4]);
    }
}
