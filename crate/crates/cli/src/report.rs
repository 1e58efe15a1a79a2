//! The `classify` report.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use spinlab::clifford_structures::{
    averaging_defects, check_structure, complexify, make_structure, normalizer_data, verify_centralizer,
    CliffordParams, StructureCheck, Summand, COMMUTANT_GUARD_N, FLOAT_GUARD_N, FLOAT_TOL,
};
use spinlab::group_classifier::{pi1_from_kernel, structure_group, Discrepancy, Pi1Summary, QuotientSummary};
use spinlab::lift_checker::{lift_from_pi1, LiftVerdictJson, MultiplicityJson};

use crate::{Failure, Mode, Outcome};

/// Bumped whenever a field of [`Report`] changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

/// Largest N for the exact J_ij checks inside a report.
pub const STRUCTURE_CHECK_N: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub params: ParamsEcho,
    pub decomposition: DecompositionJson,
    pub structure_group: QuotientSummary,
    pub pi1: Pi1Summary,
    pub lift_verdict: LiftVerdictJson,
    pub verification: Verification,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsEcho {
    pub r: usize,
    pub r_mod8: usize,
    pub m: MultiplicityJson,
    pub d_r: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionJson {
    pub complexification: String,
    pub summands: Vec<Summand>,
    pub centralizer: String,
    pub normalizer: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commutant {
    pub computed: usize,
    pub expected: usize,
}

/// Checks run while building the report; `None` means skipped by a guard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub mode: Mode,
    pub structure: Option<StructureCheck>,
    pub commutant: Option<Commutant>,
    pub kernel_images_identity: bool,
    pub pi1_matches_table: bool,
    /// Combinatorial, matrix and closed-form counts agree for every loop;
    /// a disagreement aborts the report with exit code 2 instead.
    pub windings_agree: bool,
    pub lift_matches_table: bool,
    /// Skew defect of the averaged form in float mode.
    pub float_skew_defect: Option<f64>,
}

pub fn build(p: &CliffordParams, mode: Mode) -> Result<Report, Failure> {
    if p.r < 3 {
        return Err(Failure::usage(format!("classification needs r >= 3, got {p}")));
    }
    let q = structure_group(p)?;
    let pi = pi1_from_kernel(p, &q.kernel)?;
    let mut discrepancies = q.discrepancies.clone();
    discrepancies.extend(pi.discrepancies.iter().cloned());

    let verdict = lift_from_pi1(p, &pi)?;
    discrepancies.extend(verdict.discrepancies.iter().cloned());

    let s = make_structure(p)?;
    let mut flag = |context: &str, computed: String, expected: &str| {
        discrepancies.push(Discrepancy {
            context: format!("{context} for {p}"),
            computed,
            expected: expected.into(),
        })
    };
    let structure = if p.n() <= STRUCTURE_CHECK_N {
        let c = check_structure(&s)?;
        if !c.ok() {
            flag("structure relations", format!("{c:?}"), "all hold");
        }
        Some(c)
    } else {
        None
    };
    let commutant = if p.n() <= COMMUTANT_GUARD_N {
        let c = verify_centralizer(p)?;
        if !c.ok() {
            flag("commutant dimension", c.computed.to_string(), &c.expected.to_string());
        }
        Some(Commutant {
            computed: c.computed,
            expected: c.expected,
        })
    } else {
        None
    };
    let float_skew_defect = match mode {
        Mode::Float if p.n() <= FLOAT_GUARD_N => {
            let (_, after) = averaging_defects(&s)?;
            if after > FLOAT_TOL {
                flag("averaged skew defect", after.to_string(), &format!("<= {FLOAT_TOL}"));
            }
            Some(after)
        }
        _ => None,
    };
    if !q.kernel.verified_identity {
        flag("kernel images", "not all Id_N".into(), "Id_N");
    }

    let data = normalizer_data(p);
    let decomposition = complexify(p);
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        params: ParamsEcho {
            r: p.r,
            r_mod8: p.r_mod8(),
            m: p.mult.into(),
            d_r: p.d_r(),
            n: p.n(),
        },
        decomposition: DecompositionJson {
            complexification: decomposition.to_string(),
            summands: decomposition.summands,
            centralizer: data.centralizer_desc(),
            normalizer: data.normalizer_desc(),
        },
        structure_group: q.summary(),
        pi1: pi.summary(),
        verification: Verification {
            mode,
            structure,
            commutant,
            kernel_images_identity: q.kernel.verified_identity,
            pi1_matches_table: pi.invariants == pi.expected,
            windings_agree: true,
            lift_matches_table: verdict.exists == verdict.expected,
            float_skew_defect,
        },
        lift_verdict: verdict.summary(),
        discrepancies,
    })
}

pub fn classify(p: &CliffordParams, mode: Mode, json: bool) -> Result<Outcome, Failure> {
    let report = build(p, mode)?;
    let text = if json { render_json(&report) } else { render_text(&report) };
    Ok(Outcome {
        text,
        discrepancy: !report.discrepancies.is_empty(),
    })
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

pub fn render_text(rep: &Report) -> String {
    let mut out = String::new();
    let p = &rep.params;
    let m = match p.m {
        MultiplicityJson::Single(m) => format!("m={m}"),
        MultiplicityJson::Pair([a, b]) => format!("(m1,m2)=({a},{b})"),
    };
    let _ = writeln!(out, "params          r={}, {m}  (r mod 8 = {}, d_r = {}, N = {})", p.r, p.r_mod8, p.d_r, p.n);
    let d = &rep.decomposition;
    let _ = writeln!(out, "complexified    {}", d.complexification);
    let _ = writeln!(out, "centralizer     {}", d.centralizer);
    let _ = writeln!(out, "normalizer      {}", d.normalizer);
    let g = &rep.structure_group;
    let _ = writeln!(out, "structure group {}  acting on {}", g.group, g.image);
    let _ = writeln!(
        out,
        "kernel          {} = {{{}}}",
        g.kernel.iso_type,
        g.kernel.elements.join(", ")
    );
    let _ = writeln!(out, "pi1             {}  (table: {})", rep.pi1.group, rep.pi1.expected);
    for gen in &rep.pi1.generators {
        let order = gen.order.map_or("inf".to_string(), |o| o.to_string());
        let _ = writeln!(out, "  {:<6} order {:<4} {}", gen.origin, order, gen.element);
    }
    let lv = &rep.lift_verdict;
    let _ = writeln!(out, "lift            {}  (table: {})", lv.lift, lv.expected);
    for w in &lv.generators {
        let _ = writeln!(
            out,
            "  {:<7} count {:<6} parity {}  endpoint {}",
            w.name, w.count, w.parity, w.endpoint
        );
    }
    if let Some(t) = &lv.tension {
        let _ = writeln!(out, "tension         {t}");
    }
    let v = &rep.verification;
    let skipped = "skipped (size guard)".to_string();
    let _ = writeln!(out, "checks ({:?})", v.mode);
    let _ = writeln!(
        out,
        "  structure     {}",
        v.structure.as_ref().map_or(skipped.clone(), |c| yes_no(c.ok()).to_string())
    );
    let _ = writeln!(
        out,
        "  commutant     {}",
        v.commutant
            .as_ref()
            .map_or(skipped.clone(), |c| format!("{} (dim {} vs {})", yes_no(c.computed == c.expected), c.computed, c.expected))
    );
    let _ = writeln!(out, "  kernel images {}", yes_no(v.kernel_images_identity));
    let _ = writeln!(out, "  pi1 vs table  {}", yes_no(v.pi1_matches_table));
    let _ = writeln!(out, "  windings      {}", yes_no(v.windings_agree));
    let _ = writeln!(out, "  lift vs table {}", yes_no(v.lift_matches_table));
    if let Some(x) = v.float_skew_defect {
        let _ = writeln!(out, "  float skew    {} ({x:.2e})", yes_no(x <= FLOAT_TOL));
    }
    if rep.discrepancies.is_empty() {
        let _ = writeln!(out, "discrepancies   none");
    } else {
        let _ = writeln!(out, "discrepancies   {}", rep.discrepancies.len());
        for d in &rep.discrepancies {
            let _ = writeln!(out, "  {d}");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips() {
        for (p, mode) in [
            (CliffordParams::new(3, 2).unwrap(), Mode::Exact),
            (CliffordParams::pair(8, 1, 1).unwrap(), Mode::Exact),
            (CliffordParams::pair(4, 1, 2).unwrap(), Mode::Float),
        ] {
            let rep = build(&p, mode).unwrap();
            let json = render_json(&rep);
            let back: Report = serde_json::from_str(&json).unwrap();
            assert_eq!(back, rep, "{p}");
            assert_eq!(render_json(&back), json);
        }
    }

    #[test]
    fn rank_two_is_a_usage_error() {
        let err = build(&CliffordParams::new(2, 3).unwrap(), Mode::Exact).unwrap_err();
        assert_eq!(err.code, 1);
    }

    #[test]
    fn discrepancies_carry_the_verdict_mismatch() {
        let rep = build(&CliffordParams::pair(8, 1, 1).unwrap(), Mode::Exact).unwrap();
        assert_eq!(rep.discrepancies.len(), 1);
        assert!(!rep.verification.lift_matches_table);
        assert!(rep.lift_verdict.tension.is_some());
    }
}
