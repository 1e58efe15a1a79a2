//! The `verify` identity suite and the winding `oracle`.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use spinlab::clifford_structures::CliffordParams;
use spinlab::lift_checker::{loop_winding, oracle_loops, MultiplicityJson, Winding};
use spinlab::spin_rep::{
    clifford_mult_skew_check, clifford_relations_check, gamma_check, half_spin_check, CheckReport,
};
use spinlab::Error;

use crate::{mult_label, Failure, Outcome};

/// Largest Clifford dimension `verify` accepts.
pub const VERIFY_MAX_N: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedCheck {
    pub name: String,
    #[serde(flatten)]
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifySummary {
    pub max_n: usize,
    pub checks: Vec<NamedCheck>,
    pub all_pass: bool,
}

pub fn verify_suite(max_n: usize) -> Result<VerifySummary, Failure> {
    if max_n == 0 || max_n > VERIFY_MAX_N {
        return Err(Failure::usage(format!(
            "--max-n must lie in 1..={VERIFY_MAX_N}, got {max_n}"
        )));
    }
    let mut checks = vec![];
    for n in 1..=max_n {
        let mut push = |name: &str, report: CheckReport| {
            checks.push(NamedCheck {
                name: name.into(),
                report,
            })
        };
        push("relations", clifford_relations_check(n)?);
        push("skew", clifford_mult_skew_check(n)?);
        push("gamma", gamma_check(n)?);
        if n % 2 == 0 {
            push("half-spin", half_spin_check(n)?);
        }
    }
    let all_pass = checks.iter().all(|c| c.report.ok());
    Ok(VerifySummary {
        max_n,
        checks,
        all_pass,
    })
}

pub fn verify(max_n: usize, json: bool) -> Result<Outcome, Failure> {
    let summary = verify_suite(max_n)?;
    let text = if json {
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"
    } else {
        let mut out = String::new();
        for c in &summary.checks {
            let status = if c.report.ok() { "pass" } else { "FAIL" };
            let _ = writeln!(out, "n={:<3} {:<10} {status}  ({} checked)", c.report.n, c.name, c.report.checked);
            for f in &c.report.failures {
                let _ = writeln!(out, "        {f}");
            }
        }
        let _ = writeln!(out, "{}", if summary.all_pass { "all pass" } else { "FAILURES" });
        out
    };
    Ok(Outcome {
        text,
        discrepancy: !summary.all_pass,
    })
}

/// Oracle results for one parameter set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCase {
    pub r: usize,
    pub m: MultiplicityJson,
    #[serde(rename = "N")]
    pub n: usize,
    pub loops: Vec<Winding>,
    pub mismatches: Vec<String>,
}

pub fn oracle_case(p: &CliffordParams) -> Result<OracleCase, Failure> {
    let mut loops = vec![];
    let mut mismatches = vec![];
    for l in oracle_loops(p)? {
        match loop_winding(p, &l) {
            Ok(w) => loops.push(w),
            Err(e @ Error::OracleDisagreement { .. }) => mismatches.push(e.to_string()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(OracleCase {
        r: p.r,
        m: p.mult.into(),
        n: p.n(),
        loops,
        mismatches,
    })
}

pub fn oracle(ps: &[CliffordParams], json: bool) -> Result<Outcome, Failure> {
    if let Some(p) = ps.iter().find(|p| p.r < 3) {
        return Err(Failure::usage(format!("the oracle needs r >= 3, got {p}")));
    }
    let cases: Vec<OracleCase> = ps.iter().map(oracle_case).collect::<Result<_, _>>()?;
    let discrepancy = cases.iter().any(|c| !c.mismatches.is_empty());
    let text = if json {
        serde_json::to_string_pretty(&cases).expect("cases serialize") + "\n"
    } else {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<4} {:<8} {:<5} {:<7} {:>8} {:>8} {:>8}  {:<6} closed form",
            "r", "m", "N", "loop", "comb", "matrix", "closed", "parity"
        );
        for c in &cases {
            let m = mult_label(c.m);
            for w in &c.loops {
                let _ = writeln!(
                    out,
                    "{:<4} {:<8} {:<5} {:<7} {:>8} {:>8} {:>8}  {:<6} {}",
                    c.r, m, c.n, w.case_id, w.combinatorial, w.matrix, w.closed_form, w.parity, w.closed_form_expr
                );
            }
            for x in &c.mismatches {
                let _ = writeln!(out, "{:<4} {:<8} {:<5} MISMATCH {x}", c.r, m, c.n);
            }
        }
        out
    };
    Ok(Outcome { text, discrepancy })
}
