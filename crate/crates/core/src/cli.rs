//! The `ceres` command line.
//!
//! Exit codes: 0 success or valid, 1 internal or load error, 2 usage,
//! 3 negative verdict.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::clause_sets::{
    clauses_to_json, clauses_to_text, clauses_to_tptp, diff_modulo_renaming, nia_clause_set, normalize_symbols_with,
    tautology_elim, DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::herbrand::{herbrand_cnf, herbrand_sequent, verify_sequent, Axioms};
use crate::lks::{char_term_schema, entry_term, load_fixture, NIA_FIXTURE_JSON};
use crate::math::refute_math;
use crate::nia::{refute_with, Reading};
use crate::resolution::{check_tree, ResolutionTree};
use crate::saturate::{saturate_with, DEFAULT_CLAUSE_BUDGET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ceres", version, about = "Schematic CERES toolchain for the non-injectivity assertion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct NArgs {
    /// Instance parameter.
    #[arg(long)]
    pub n: Option<u64>,
    /// Inclusive range `a..b`; instances run concurrently, output is ordered by n.
    #[arg(long = "n-range", value_parser = parse_range)]
    pub n_range: Option<(u64, u64)>,
}

impl NArgs {
    fn values(&self) -> Vec<u64> {
        match (self.n, self.n_range) {
            (Some(n), _) => vec![n],
            (None, Some((a, b))) => (a..=b).collect(),
            (None, None) => Vec::new(),
        }
    }
}

fn parse_range(s: &str) -> std::result::Result<(u64, u64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected `a..b`, got `{}`", s))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad range start: {}", e))?;
    let b: u64 = b.trim_start_matches('=').trim().parse().map_err(|e| format!("bad range end: {}", e))?;
    if a > b {
        return Err(format!("empty range {}..{}", a, b));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fmt {
    Text,
    Json,
    Tptp,
    Dot,
    Dimacs,
}

impl Fmt {
    fn ext(self) -> &'static str {
        match self {
            Fmt::Text => "txt",
            Fmt::Json => "json",
            Fmt::Tptp => "p",
            Fmt::Dot => "dot",
            Fmt::Dimacs => "cnf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Schema,
    Math,
    Saturate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the clause set C(n).
    Clauseset {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "text")]
        fmt: Fmt,
        /// Write the clause set here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the characteristic clause set from the proof-schema fixture and diff it against C(n).
    Extract {
        #[command(flatten)]
        n: NArgs,
        /// Fixture JSON; the bundled NiA fixture by default.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        fmt: Fmt,
        #[arg(long, env = "CERES_BUDGET", value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
    },
    /// Build a refutation of C(n) and check it.
    Refute {
        #[command(flatten)]
        n: NArgs,
        #[arg(long, value_enum, default_value = "schema")]
        mode: Mode,
        /// Reading of the ρ-table (schema mode).
        #[arg(long, default_value = "repaired")]
        reading: Reading,
        /// Universe depth for saturation; n+1 by default.
        #[arg(long)]
        depth: Option<u64>,
        /// Step budget for unfolding, or the clause budget for saturation.
        #[arg(long, env = "CERES_BUDGET", value_parser = clap::value_parser!(u64).range(1..))]
        budget: Option<u64>,
        /// Format of the verdict on stdout and of the tree written to `--out`.
        #[arg(long, value_enum, default_value = "text")]
        fmt: Fmt,
        /// Write the refutation tree here (a directory when `--n-range` is used).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Herbrand sequent S(n) and decide its validity.
    Herbrand {
        #[command(flatten)]
        n: NArgs,
        #[arg(long)]
        no_order_axioms: bool,
        #[arg(long)]
        no_equality_axioms: bool,
        /// `text` or `json` for the report; `dimacs` writes the CNF instead of the sequent.
        #[arg(long, value_enum, default_value = "text")]
        fmt: Fmt,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// What one instance produced.
#[derive(Debug, Default)]
struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
    artifact: Option<String>,
}

impl Outcome {
    fn error(e: Error) -> Outcome {
        Outcome { code: EXIT_ERROR, stderr: format!("error: {}\n", e), ..Outcome::default() }
    }
}

fn check_fmt(fmt: Fmt, allowed: &[Fmt]) -> std::result::Result<(), String> {
    if allowed.contains(&fmt) {
        Ok(())
    } else {
        let names: Vec<String> =
            allowed.iter().map(|f| f.to_possible_value().expect("no skipped variants").get_name().to_string()).collect();
        Err(format!("--fmt must be one of {}", names.join(", ")))
    }
}

fn clauseset(n: u64, fmt: Fmt) -> Outcome {
    let cs = nia_clause_set(n);
    let text = match fmt {
        Fmt::Json => format!("{}\n", clauses_to_json(&cs)),
        Fmt::Tptp => clauses_to_tptp(&cs),
        _ => clauses_to_text(&cs),
    };
    Outcome { artifact: Some(text), ..Outcome::default() }
}

fn extract(n: u64, fixture: &str, fmt: Fmt, budget: u64) -> Result<Outcome> {
    let f = load_fixture(fixture)?;
    let rules = char_term_schema(&f.schema, &f.configs)?;
    let got = tautology_elim(&normalize_symbols_with(&rules, &entry_term(&f.schema)?, n, budget)?);
    let (extra, missing) = diff_modulo_renaming(&got, &nia_clause_set(n));
    let same = extra.is_empty() && missing.is_empty();
    let stdout = if fmt == Fmt::Json {
        format!(
            "{}\n",
            json!({
                "n": n,
                "extracted": clauses_to_json(&got),
                "only_extracted": clauses_to_json(&extra),
                "only_expected": clauses_to_json(&missing),
                "empty_diff": same,
            })
        )
    } else {
        let mut s = clauses_to_text(&got);
        if same {
            s.push_str("diff: empty\n");
        } else {
            s.push_str("diff:\n");
            s.extend(extra.iter().map(|c| format!("+ {}\n", c)));
            s.extend(missing.iter().map(|c| format!("- {}\n", c)));
        }
        s
    };
    Ok(Outcome { code: if same { EXIT_OK } else { EXIT_NEGATIVE }, stdout, ..Outcome::default() })
}

struct RefuteOpts {
    mode: Mode,
    reading: Reading,
    depth: Option<u64>,
    budget: Option<u64>,
    fmt: Fmt,
}

fn tree_artifact(t: &ResolutionTree, fmt: Fmt) -> String {
    match fmt {
        Fmt::Json => format!("{}\n", t.to_json()),
        Fmt::Dot => t.to_dot(),
        _ => t.to_text(),
    }
}

fn refute(n: u64, o: &RefuteOpts) -> Result<Outcome> {
    let mode = o.mode.to_possible_value().expect("no skipped variants").get_name().to_string();
    let (tree, stats) = match o.mode {
        Mode::Schema => (Some(refute_with(n, o.reading, o.budget.unwrap_or(DEFAULT_BUDGET))?), None),
        Mode::Math => (Some(refute_math(n)?), None),
        Mode::Saturate => {
            let budget = o.budget.map_or(DEFAULT_CLAUSE_BUDGET, |b| b as usize);
            let (t, s) = saturate_with(n, o.depth.unwrap_or(n + 1), budget)?;
            (t, Some(s))
        }
    };
    let verdict = tree.as_ref().map(|t| check_tree(t, &nia_clause_set(n)));
    let ok = verdict.as_ref().is_some_and(|v| v.passes());
    let stdout = if o.fmt == Fmt::Json {
        format!(
            "{}\n",
            json!({
                "n": n,
                "mode": mode,
                "found": tree.is_some(),
                "passes": ok,
                "verdict": verdict.as_ref().map(|v| v.to_json()),
                "stats": stats,
            })
        )
    } else {
        let mut s = format!("n={} mode={}\n", n, mode);
        if let Some(st) = &stats {
            s.push_str(&format!(
                "saturation: depth {}, {} generated, {} kept, {} given{}\n",
                st.depth,
                st.generated,
                st.kept,
                st.given,
                if st.budget_exhausted { ", budget exhausted" } else { "" }
            ));
        }
        match &verdict {
            Some(v) => s.push_str(&v.to_string()),
            None => s.push_str("no refutation found\n"),
        }
        s.push_str(if ok { "PASS\n" } else { "FAIL\n" });
        s
    };
    Ok(Outcome {
        code: if ok { EXIT_OK } else { EXIT_NEGATIVE },
        stdout,
        artifact: tree.map(|t| tree_artifact(&t, o.fmt)),
        ..Outcome::default()
    })
}

fn herbrand(n: u64, axioms: Axioms, fmt: Fmt) -> Result<Outcome> {
    let seq = herbrand_sequent(n);
    let v = verify_sequent(&seq, axioms)?;
    let stdout = if fmt == Fmt::Json {
        format!("{}\n", json!({ "sequent": seq.to_json(), "verdict": v }))
    } else {
        format!("S({}): {}\n{}", n, seq, v)
    };
    let artifact = match fmt {
        Fmt::Dimacs => herbrand_cnf(&seq, axioms)?.to_dimacs(),
        Fmt::Json => format!("{}\n", seq.to_json()),
        _ => format!("{}\n", seq),
    };
    Ok(Outcome {
        code: if v.valid { EXIT_OK } else { EXIT_NEGATIVE },
        stdout,
        artifact: Some(artifact),
        ..Outcome::default()
    })
}

fn artifact_path(out: &Path, ranged: bool, cmd: &str, n: u64, fmt: Fmt) -> PathBuf {
    if ranged {
        out.join(format!("{}-n{}.{}", cmd, n, fmt.ext()))
    } else {
        out.to_path_buf()
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{}", text);
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{}", text);
                EXIT_OK
            };
        }
    };
    let usage = |stderr: &mut dyn Write, msg: String| {
        let _ = writeln!(stderr, "error: {}", msg);
        EXIT_USAGE
    };

    let (ns, cmd, out, fmt): (Vec<u64>, &str, Option<PathBuf>, Fmt) = match &cli.command {
        Command::Clauseset { n, fmt, out } => (n.values(), "clauseset", out.clone(), *fmt),
        Command::Extract { n, fmt, .. } => (n.values(), "extract", None, *fmt),
        Command::Refute { n, fmt, out, .. } => (n.values(), "refute", out.clone(), *fmt),
        Command::Herbrand { n, fmt, out, .. } => (n.values(), "herbrand", out.clone(), *fmt),
    };
    let allowed: &[Fmt] = match cmd {
        "clauseset" => &[Fmt::Text, Fmt::Json, Fmt::Tptp],
        "extract" => &[Fmt::Text, Fmt::Json],
        "refute" => &[Fmt::Text, Fmt::Json, Fmt::Dot],
        _ => &[Fmt::Text, Fmt::Json, Fmt::Dimacs],
    };
    if let Err(msg) = check_fmt(fmt, allowed) {
        return usage(stderr, msg);
    }
    let ranged = ns.len() > 1;
    if let (true, Some(dir)) = (ranged, &out) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            let _ = writeln!(stderr, "error: {}: {}", dir.display(), e);
            return EXIT_ERROR;
        }
    }

    let fixture = match &cli.command {
        Command::Extract { fixture: Some(p), .. } => match std::fs::read_to_string(p) {
            Ok(s) => s,
            Err(e) => {
                let _ = writeln!(stderr, "error: {}: {}", p.display(), e);
                return EXIT_ERROR;
            }
        },
        _ => NIA_FIXTURE_JSON.to_string(),
    };

    let one = |n: u64| -> Outcome {
        let r = match &cli.command {
            Command::Clauseset { fmt, .. } => Ok(clauseset(n, *fmt)),
            Command::Extract { fmt, budget, .. } => extract(n, &fixture, *fmt, budget.unwrap_or(DEFAULT_BUDGET)),
            Command::Refute { mode, reading, depth, budget, fmt, .. } => refute(
                n,
                &RefuteOpts { mode: *mode, reading: *reading, depth: *depth, budget: *budget, fmt: *fmt },
            ),
            Command::Herbrand { no_order_axioms, no_equality_axioms, fmt, .. } => {
                herbrand(n, Axioms { equality: !no_equality_axioms, order: !no_order_axioms }, *fmt)
            }
        };
        r.unwrap_or_else(Outcome::error)
    };
    let outcomes: Vec<Outcome> = std::thread::scope(|s| {
        let handles: Vec<_> = ns.iter().map(|&n| s.spawn(move || one(n))).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Outcome::error(Error::Load("worker panicked".into())))).collect()
    });

    let mut code = EXIT_OK;
    for (&n, o) in ns.iter().zip(outcomes) {
        if ranged && fmt == Fmt::Text {
            let _ = writeln!(stdout, "# n={}", n);
        }
        let _ = write!(stdout, "{}", o.stdout);
        let _ = write!(stderr, "{}", o.stderr);
        if let Some(a) = &o.artifact {
            // clauseset prints its artifact unless told where to put it
            match (&out, cmd) {
                (Some(p), _) => {
                    let path = artifact_path(p, ranged, cmd, n, fmt);
                    if let Err(e) = std::fs::write(&path, a) {
                        let _ = writeln!(stderr, "error: {}: {}", path.display(), e);
                        code = EXIT_ERROR;
                    }
                }
                (None, "clauseset") => {
                    let _ = write!(stdout, "{}", a);
                }
                _ => {}
            }
        }
        code = match (code, o.code) {
            (EXIT_ERROR, _) | (_, EXIT_ERROR) => EXIT_ERROR,
            (EXIT_NEGATIVE, _) | (_, EXIT_NEGATIVE) => EXIT_NEGATIVE,
            _ => EXIT_OK,
        };
    }
    code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("ceres").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn clauseset_counts() {
        let (code, out, _) = call(&["clauseset", "--n", "2", "--fmt", "tptp"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().filter(|l| l.starts_with("cnf(")).count(), 7);
        let (code, out, _) = call(&["clauseset", "--n", "0"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 5);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["clauseset", "--n", "-1"]).0, EXIT_USAGE);
        assert_eq!(call(&["clauseset"]).0, EXIT_USAGE);
        assert_eq!(call(&["clauseset", "--n", "1", "--fmt", "dimacs"]).0, EXIT_USAGE);
        assert_eq!(call(&["refute", "--n", "1", "--budget", "0"]).0, EXIT_USAGE);
        assert_eq!(call(&["refute", "--n", "1", "--mode", "nope"]).0, EXIT_USAGE);
    }

    #[test]
    fn extract_diff() {
        let (code, out, _) = call(&["extract", "--n", "1"]);
        assert_eq!(code, 0, "{}", out);
        assert!(out.contains("diff: empty"));
    }

    #[test]
    fn refute_modes() {
        assert_eq!(call(&["refute", "--n", "2", "--mode", "schema"]).0, 0);
        assert_eq!(call(&["refute", "--n", "2", "--mode", "math"]).0, 0);
        assert_eq!(call(&["refute", "--n", "2", "--mode", "saturate", "--depth", "1"]).0, EXIT_NEGATIVE);
    }

    #[test]
    fn herbrand_codes() {
        assert_eq!(call(&["herbrand", "--n", "0"]).0, 0);
        let (code, out, _) = call(&["herbrand", "--n", "0", "--no-order-axioms"]);
        assert_eq!(code, EXIT_NEGATIVE);
        assert!(out.contains("countermodel"));
    }

    #[test]
    fn range_is_ordered_and_deterministic() {
        let a = call(&["herbrand", "--n-range", "0..3", "--fmt", "json"]);
        let b = call(&["herbrand", "--n-range", "0..3", "--fmt", "json"]);
        assert_eq!(a, b);
        let ns: Vec<u64> = a
            .1
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["sequent"]["n"].as_u64().unwrap())
            .collect();
        assert_eq!(ns, vec![0, 1, 2, 3]);
    }
}
