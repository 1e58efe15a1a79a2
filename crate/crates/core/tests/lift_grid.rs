//! Generator loops, windings and lift verdicts over the desk grid.

use spinlab::clifford_structures::CliffordParams;
use spinlab::lift_checker::lift_exists;

fn grid(rmax: usize, max_m: usize) -> Vec<CliffordParams> {
    let mut out = vec![];
    for r in 3..=rmax {
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
fn windings_and_verdicts_on_grid() {
    let mut failures = vec![];
    let mut tensions = vec![];
    for p in grid(12, 4) {
        let v = match lift_exists(&p) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{p}: {e}"));
                continue;
            }
        };
        for w in &v.windings {
            if w.combinatorial != w.matrix || w.combinatorial.abs() != w.closed_form.abs() {
                failures.push(format!("{p}: {w:?}"));
            }
        }
        if v.exists != v.windings.iter().all(|w| w.parity == 0) {
            failures.push(format!("{p}: verdict does not follow parities"));
        }
        match (v.exists == v.expected, v.tension.is_some()) {
            (true, false) => {}
            (false, true) => tensions.push(p),
            _ => failures.push(format!("{p}: {:?}", v.discrepancies)),
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
    for p in &tensions {
        let (m1, m2) = p.pair_values().unwrap();
        assert!(p.r == 8 && m1 % 2 == 1 && m2 % 2 == 1, "{p}");
    }
    assert_eq!(tensions.len(), 4);
}
