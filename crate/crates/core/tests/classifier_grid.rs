//! Kernels and fundamental groups over the desk grid.

use spinlab::clifford_structures::CliffordParams;
use spinlab::group_classifier::{kernel_of_rho, pi1, expected_quotient};

fn grid(max_m: usize) -> Vec<CliffordParams> {
    let mut out = vec![];
    for r in 3..=10 {
        if r % 4 == 0 {
            for a in 0..=max_m {
                for b in 0..=max_m {
                    if let Ok(p) = CliffordParams::pair(r, a, b) {
                        out.push(p);
                    }
                }
            }
        } else {
            for m in 1..=max_m {
                out.push(CliffordParams::new(r, m).unwrap());
            }
        }
    }
    out
}

#[test]
fn kernels_match_case_lists_and_denominators() {
    for p in grid(3) {
        let k = kernel_of_rho(&p).unwrap();
        assert!(k.verified_identity, "{p}");
        assert!(k.discrepancies.is_empty(), "{p}: {:?}", k.discrepancies);
        let (_, denom) = expected_quotient(&p).unwrap();
        assert_eq!(k.order as u64, denom.torsion_order(), "{p}");
    }
}

#[test]
fn fundamental_groups_match_table() {
    let mut mismatches = vec![];
    for p in grid(6) {
        let res = pi1(&p).unwrap();
        if !res.discrepancies.is_empty() {
            mismatches.push(format!("{p}: {} vs {}", res.invariants, res.expected));
        }
    }
    assert!(mismatches.is_empty(), "{mismatches:#?}");
}
