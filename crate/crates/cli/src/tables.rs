//! The `tables` command: irreducible modules, centralizers, the r = 0 mod 8
//! fundamental groups and the lift verdict grid.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use spinlab::clifford_structures::{normalizer_data, CliffordParams, LieAlgebra};
use spinlab::group_classifier::{pi1, CLASS_LABELS, R0_TABLE};
use spinlab::lift_checker::{lift_exists, MultiplicityJson};
use spinlab::spin_rep::table1;

use crate::{mult_label, Failure, Grid, Outcome};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table1Json {
    pub r: usize,
    pub r_mod8: usize,
    pub d_r: usize,
    pub algebra: String,
    pub module: String,
    pub v_r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2Json {
    pub r_mod8: String,
    #[serde(rename = "N")]
    pub n: String,
    pub centralizer: String,
    pub normalizer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct R0Grid {
    /// Row labels (m1 class) and column labels (m2 class).
    pub classes: Vec<String>,
    pub table: Vec<Vec<String>>,
    /// pi_1 computed at r = 8 for one representative per class.
    pub computed: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftCell {
    pub r: usize,
    pub m: MultiplicityJson,
    pub lift: bool,
    pub expected: bool,
    pub tension: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TablesJson {
    pub table1: Vec<Table1Json>,
    pub table2: Vec<Table2Json>,
    pub r0_pi1: R0Grid,
    pub lift_grid: String,
    pub lift: Vec<LiftCell>,
}

/// Multiplicity stand-ins used to read the centralizer off symbolically.
const SYM_M: usize = 5;
const SYM_M1: usize = 6;
const SYM_M2: usize = 7;

fn symbolic(a: &LieAlgebra) -> String {
    let name = |m: usize| match m {
        SYM_M => "m",
        SYM_M1 => "m1",
        _ => "m2",
    };
    match *a {
        LieAlgebra::So(m) => format!("so({})", name(m)),
        LieAlgebra::U(m) => format!("u({})", name(m)),
        LieAlgebra::Sp(m) => format!("sp({})", name(m)),
        LieAlgebra::Spin(_) => "spin(r)".into(),
    }
}

pub fn table2() -> Vec<Table2Json> {
    [("0", 8), ("1,7", 9), ("2,6", 10), ("3,5", 11), ("4", 12)]
        .into_iter()
        .map(|(label, r)| {
            let p = if r % 4 == 0 {
                CliffordParams::pair(r, SYM_M1, SYM_M2)
            } else {
                CliffordParams::new(r, SYM_M)
            }
            .expect("representative parameters are valid");
            let d = normalizer_data(&p);
            let join = |v: &[LieAlgebra]| v.iter().map(symbolic).collect::<Vec<_>>().join(" + ");
            Table2Json {
                r_mod8: label.into(),
                n: if r % 4 == 0 { "d_r(m1+m2)" } else { "d_r m" }.into(),
                centralizer: join(&d.centralizer),
                normalizer: join(&d.normalizer),
            }
        })
        .collect()
}

/// One multiplicity from each class of the r = 0 mod 8 table.
const CLASS_REPRESENTATIVES: [usize; 6] = [0, 1, 2, 3, 6, 4];

pub fn r0_grid() -> Result<R0Grid, Failure> {
    let mut computed = vec![];
    for &a in &CLASS_REPRESENTATIVES {
        let mut row = vec![];
        for &b in &CLASS_REPRESENTATIVES {
            row.push(match CliffordParams::pair(8, a, b) {
                Ok(p) => pi1(&p)?.invariants.to_string(),
                Err(_) => String::new(),
            });
        }
        computed.push(row);
    }
    Ok(R0Grid {
        classes: CLASS_LABELS.iter().map(|s| s.to_string()).collect(),
        table: R0_TABLE.iter().map(|row| row.iter().map(|s| s.to_string()).collect()).collect(),
        computed,
    })
}

pub fn lift_cells(grid: &Grid) -> Result<Vec<LiftCell>, Failure> {
    grid.params()
        .iter()
        .map(|p| {
            let v = lift_exists(p)?;
            Ok(LiftCell {
                r: p.r,
                m: p.mult.into(),
                lift: v.exists,
                expected: v.expected,
                tension: v.tension,
            })
        })
        .collect()
}

pub fn build(grid: &Grid) -> Result<TablesJson, Failure> {
    let table1 = (1..=16)
        .map(|r| {
            let row = table1(r)?;
            Ok(Table1Json {
                r,
                r_mod8: row.r_mod8,
                d_r: row.d_r,
                algebra: row.algebra_label(),
                module: row.module_label(),
                v_r: row.v_r,
            })
        })
        .collect::<Result<_, spinlab::Error>>()?;
    Ok(TablesJson {
        table1,
        table2: table2(),
        r0_pi1: r0_grid()?,
        lift_grid: grid.to_string(),
        lift: lift_cells(grid)?,
    })
}

fn mark(c: &LiftCell) -> String {
    let v = if c.lift { "yes" } else { "no" };
    let flag = match (&c.tension, c.lift == c.expected) {
        (Some(_), _) => "*",
        (None, false) => "!",
        _ => "",
    };
    format!("{v}{flag}")
}

pub fn render_text(t: &TablesJson) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Irreducible Cl_r^0 modules");
    let _ = writeln!(out, "{:>3} {:>7} {:>6}  {:<14} {:<8} {:>3}", "r", "r mod 8", "d_r", "Cl_r^0", "module", "v_r");
    for row in &t.table1 {
        let _ = writeln!(
            out,
            "{:>3} {:>7} {:>6}  {:<14} {:<8} {:>3}",
            row.r, row.r_mod8, row.d_r, row.algebra, row.module, row.v_r
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "Centralizer and normalizer of spin(r) in so(N)");
    let _ = writeln!(out, "{:<7} {:<11} {:<17} normalizer", "r mod 8", "N", "centralizer");
    for row in &t.table2 {
        let _ = writeln!(out, "{:<7} {:<11} {:<17} {}", row.r_mod8, row.n, row.centralizer, row.normalizer);
    }
    let _ = writeln!(out);
    let g = &t.r0_pi1;
    let _ = writeln!(out, "pi_1 for r = 0 mod 8 (row: m1 class, column: m2 class)");
    let w = 13;
    let _ = write!(out, "{:<10}", "m1 \\ m2");
    for c in &g.classes {
        let _ = write!(out, "{c:<w$}");
    }
    let _ = writeln!(out);
    for (i, row) in g.table.iter().enumerate() {
        let _ = write!(out, "{:<10}", g.classes[i]);
        for (j, cell) in row.iter().enumerate() {
            let shown = if cell.is_empty() { "-" } else { cell.as_str() };
            let flag = if !cell.is_empty() && normalize(cell) != normalize(&g.computed[i][j]) {
                "!"
            } else {
                ""
            };
            let _ = write!(out, "{:<w$}", format!("{shown}{flag}"));
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Lift to Spin(N) on grid {} (* tension with the tabulated condition, ! disagreement)",
        t.lift_grid
    );
    let mut r = 0;
    for c in &t.lift {
        match c.m {
            MultiplicityJson::Single(m) => {
                if c.r != r {
                    r = c.r;
                    let _ = write!(out, "\nr={r:<3}");
                }
                let _ = write!(out, " m={m}:{:<5}", mark(c));
            }
            MultiplicityJson::Pair([a, b]) => {
                if c.r != r {
                    r = c.r;
                    let _ = write!(out, "\nr={r:<3} (m1 rows, m2 columns from 0)");
                }
                if b == 0 || (a == 0 && b == 1) {
                    let _ = write!(out, "\n  m1={a:<2}");
                    if a == 0 {
                        let _ = write!(out, " {:<6}", "-");
                    }
                }
                let _ = write!(out, " {:<6}", mark(c));
            }
        }
    }
    let _ = writeln!(out);
    for c in t.lift.iter().filter(|c| c.tension.is_some()) {
        let _ = writeln!(out, "* r={} m={}: {}", c.r, mult_label(c.m), c.tension.as_deref().unwrap_or(""));
    }
    out.lines().map(|l| l.trim_end().to_string() + "\n").collect()
}

/// A table entry disagreeing with the computation, or a verdict differing
/// from the tabulated condition.
pub fn has_discrepancy(t: &TablesJson) -> bool {
    let grid_mismatch = t.r0_pi1.table.iter().flatten().zip(t.r0_pi1.computed.iter().flatten()).any(
        |(tab, comp)| !tab.is_empty() && normalize(tab) != normalize(comp),
    );
    grid_mismatch || t.lift.iter().any(|c| c.lift != c.expected)
}

fn normalize(s: &str) -> String {
    spinlab::blade_algebra::AbelianGroup::parse(s).map_or(s.to_string(), |g| g.to_string())
}

pub fn tables(grid: &Grid, json: bool) -> Result<Outcome, Failure> {
    let t = build(grid)?;
    let text = if json {
        serde_json::to_string_pretty(&t).expect("tables serialize") + "\n"
    } else {
        render_text(&t)
    };
    Ok(Outcome {
        text,
        discrepancy: has_discrepancy(&t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_rows_are_symbolic() {
        let rows = table2();
        assert_eq!(rows[0].centralizer, "so(m1) + so(m2)");
        assert_eq!(rows[2].normalizer, "u(m) + spin(r)");
        assert_eq!(rows[4].centralizer, "sp(m1) + sp(m2)");
    }

    #[test]
    fn r0_grid_matches_its_table() {
        let g = r0_grid().unwrap();
        assert_eq!(g.table[4][4], "Z4+Z4");
        for (row, comp) in g.table.iter().zip(&g.computed) {
            for (a, b) in row.iter().zip(comp) {
                assert_eq!(a.is_empty(), b.is_empty());
                if !a.is_empty() {
                    assert_eq!(normalize(a), normalize(b));
                }
            }
        }
    }
}
