//! `spinlab`: classification reports, table reproduction, representation
//! self-checks and the three-way winding oracle.
//!
//! Exit codes: 0 success, 1 usage or invalid parameters, 2 a mathematical
//! discrepancy reported by the library.

mod checks;
mod report;
mod tables;

use std::fmt;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use spinlab::clifford_structures::{guard_n, CliffordParams, Multiplicity};
use spinlab::lift_checker::MultiplicityJson;
use spinlab::Error;

#[derive(Parser, Debug)]
#[command(name = "spinlab", version, about = "Even Clifford structures, their normalizers and spin lifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Arithmetic used by the structure checks.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report for one parameter set.
    Classify(ParamArgs),
    /// Exact identity suite for the spinor representation.
    Verify {
        /// Largest Clifford dimension n to check (at most 12).
        #[arg(long, default_value_t = 8)]
        max_n: usize,
    },
    /// Representation tables, the r = 0 mod 8 fundamental-group grid and
    /// the lift verdict grid.
    Tables {
        /// Bounds of the verdict grid as rmin:rmax:mmax.
        #[arg(long, default_value = "3:12:4")]
        grid: Grid,
    },
    /// Winding counts of every generator loop, three ways.
    Oracle {
        #[command(flatten)]
        params: ParamArgs,
        /// Run over a grid rmin:rmax:mmax instead of one parameter set.
        #[arg(long, conflicts_with_all = ["r", "m", "m1", "m2"])]
        grid: Option<Grid>,
    },
}

#[derive(Args, Debug, Clone, Copy)]
struct ParamArgs {
    #[arg(long)]
    r: Option<usize>,
    /// Multiplicity for r not divisible by 4.
    #[arg(long, conflicts_with_all = ["m1", "m2"])]
    m: Option<usize>,
    /// Multiplicities for r divisible by 4; a missing one is 0.
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
}

impl ParamArgs {
    fn resolve(&self) -> Result<CliffordParams, Failure> {
        let r = self.r.ok_or_else(|| Failure::usage("--r is required"))?;
        let mult = match (self.m, self.m1, self.m2) {
            (Some(m), None, None) => Multiplicity::Single(m),
            (None, None, None) => return Err(Failure::usage("give --m, or --m1/--m2 when r = 0 mod 4")),
            (None, a, b) => Multiplicity::Pair(a.unwrap_or(0), b.unwrap_or(0)),
            _ => return Err(Failure::usage("--m cannot be combined with --m1/--m2")),
        };
        let p = CliffordParams::validated(r, mult).map_err(Failure::from)?;
        p.check_guard(guard_n()).map_err(Failure::from)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Grid bounds rmin:rmax:mmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rmin: usize,
    pub rmax: usize,
    pub mmax: usize,
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(':')
            .map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [rmin, rmax, mmax] = parts[..] else {
            return Err(format!("expected rmin:rmax:mmax, got {s:?}"));
        };
        if rmin < 3 || rmin > rmax || rmax > 12 || mmax == 0 {
            return Err(format!("need 3 <= rmin <= rmax <= 12 and mmax >= 1, got {s}"));
        }
        Ok(Grid { rmin, rmax, mmax })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.rmin, self.rmax, self.mmax)
    }
}

impl Grid {
    /// Valid parameter sets in (r, multiplicity) order; pairs (m1, m2)
    /// range over 0..=mmax without (0, 0).
    pub fn params(&self) -> Vec<CliffordParams> {
        let mut out = vec![];
        for r in self.rmin..=self.rmax {
            if r % 4 == 0 {
                for a in 0..=self.mmax {
                    for b in 0..=self.mmax {
                        if let Ok(p) = CliffordParams::pair(r, a, b) {
                            out.push(p);
                        }
                    }
                }
            } else {
                out.extend((1..=self.mmax).filter_map(|m| CliffordParams::new(r, m).ok()));
            }
        }
        out.retain(|p| p.check_guard(guard_n()).is_ok());
        out
    }
}

/// "3" or "(1,2)".
pub fn mult_label(m: MultiplicityJson) -> String {
    match m {
        MultiplicityJson::Single(m) => m.to_string(),
        MultiplicityJson::Pair([a, b]) => format!("({a},{b})"),
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::OracleDisagreement { .. } | Error::Internal(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Rendered output and whether a discrepancy was reported.
pub struct Outcome {
    pub text: String,
    pub discrepancy: bool,
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Classify(args) => report::classify(&args.resolve()?, cli.mode, cli.json),
        Command::Verify { max_n } => checks::verify(*max_n, cli.json),
        Command::Tables { grid } => tables::tables(grid, cli.json),
        Command::Oracle { params, grid } => {
            let ps = match grid {
                Some(g) => g.params(),
                None => vec![params.resolve()?],
            };
            checks::oracle(&ps, cli.json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.discrepancy { 2 } else { 0 })
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!("3:12:4".parse::<Grid>().unwrap(), Grid { rmin: 3, rmax: 12, mmax: 4 });
        assert!("3:13:4".parse::<Grid>().is_err());
        assert!("5:4:1".parse::<Grid>().is_err());
        assert!("3:4".parse::<Grid>().is_err());
        assert!("a:4:1".parse::<Grid>().is_err());
    }

    #[test]
    fn grid_enumeration() {
        let g: Grid = "3:4:2".parse().unwrap();
        let ps = g.params();
        assert_eq!(ps.len(), 2 + 8);
        assert_eq!(ps[0], CliffordParams::new(3, 1).unwrap());
        assert_eq!(ps[2], CliffordParams::pair(4, 0, 1).unwrap());
    }

    #[test]
    fn param_resolution() {
        let a = |r, m, m1, m2| ParamArgs { r, m, m1, m2 };
        assert_eq!(a(Some(3), Some(2), None, None).resolve().unwrap().n(), 8);
        assert_eq!(
            a(Some(8), None, Some(1), None).resolve().unwrap(),
            CliffordParams::pair(8, 1, 0).unwrap()
        );
        assert_eq!(a(None, Some(1), None, None).resolve().unwrap_err().code, 1);
        assert_eq!(a(Some(8), Some(1), None, None).resolve().unwrap_err().code, 1);
        assert_eq!(a(Some(3), None, None, None).resolve().unwrap_err().code, 1);
    }
}
