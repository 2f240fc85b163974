//! `schwartz`: command-line front end.
//!
//! Exit codes: 0 holds/closed, 1 fails/not closed, 2 inconclusive,
//! 3 usage or analysis error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use schwartz_core::closed_range::{decide, Assume, AssumptionSet, CrStatus};
use schwartz_core::corpus;
use schwartz_core::expr::smooth::Compose;
use schwartz_core::expr::{parse, PiecewiseFn, SmoothFn};
use schwartz_core::fdb::compose_derivative;
use schwartz_core::multiplier::{closed_range_multiplier, verify_certificate};
use schwartz_core::norms::grid::Region;
use schwartz_core::norms::{rows_to_csv, seminorm_pi, seminorm_rows, SampleRow, TailStatus};
use schwartz_core::report::Report;
use schwartz_core::symbol::analyze;
use schwartz_core::witness::{build_witness_cond_i, build_witness_cond_ii, lemma1_witness, noncompact_family};
use schwartz_core::{Config, Status, Verdict};

const WORKERS_ENV: &str = "SCHWARTZ_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Violation {
    Lemma1,
    I,
    Ii,
}

#[derive(Parser, Debug)]
#[command(name = "schwartz", version, about = "Composition operators on the Schwartz space")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Write the sample/witness table as CSV (x,j,m,value,log_value).
    #[arg(long, global = true, value_name = "PATH")]
    emit_csv: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key; applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and print an expression.
    Parse {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Symbolic (f∘φ)^(n), optionally evaluated at a point.
    ComposeDeriv {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
    },
    /// Weighted seminorm π_n.
    Seminorm {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "full", allow_hyphen_values = true)]
        region: String,
    },
    /// Is φ a symbol for S? Checks |φ| → ∞ and conditions (i), (ii).
    SymbolCheck {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        max_j: Option<usize>,
    },
    /// Does multiplication by F have closed range on S (or on a region)?
    MultiplierCheck {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long, default_value = "full", allow_hyphen_values = true)]
        region: String,
    },
    /// Closed-range verdict for C_φ with a rule trace.
    ClosedRange {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        /// C^∞ closed range of φ: yes, no or auto.
        #[arg(long, default_value = "auto")]
        cinf: String,
        /// φ′ nonvanishing outside a compact set: yes, no or auto.
        #[arg(long, default_value = "auto")]
        deriv_nonvanishing: String,
        /// Test function for the asterisco rule.
        #[arg(long, allow_hyphen_values = true)]
        f_candidate: Option<String>,
    },
    /// Build an explicit f in S with f∘φ outside S.
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long, value_enum)]
        violation: Violation,
        /// Derivative order for (i); taken from the analyzer when absent.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 8)]
        count: usize,
    },
    /// Bounded family whose images under C_φ have unbounded p-th derivative.
    NoncompactDemo {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        /// `a,b`
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Run the regression corpus against expected verdicts.
    Corpus {
        /// Corpus file; the built-in corpus when absent.
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

struct Outcome {
    report: Report,
    code: u8,
    text: Vec<String>,
    csv: Option<Vec<SampleRow>>,
}

#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

fn verdict_code(v: &Verdict) -> u8 {
    match v.status() {
        Status::Holds => 0,
        Status::Fails => 1,
        Status::Inconclusive => 2,
    }
}

fn witness_rows(v: &Verdict) -> Option<Vec<SampleRow>> {
    let w = v.witness()?;
    Some(
        w.points
            .iter()
            .zip(w.values.iter().chain(std::iter::repeat(&f64::NAN)))
            .map(|(&x, &val)| SampleRow { x, j: 0, m: 0, value: val, log_value: val.abs().ln() })
            .collect(),
    )
}

fn phi_arg(s: &str) -> Result<PiecewiseFn, Failure> {
    parse(s).map_err(|e| Failure(format!("cannot parse '{s}': {e}")))
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = Config::default();
    if let Some(p) = &cli.config {
        let text = std::fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
        cfg.apply_text(&text).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
    }
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &Config) -> Result<Outcome, Failure> {
    match &cli.cmd {
        Cmd::Parse { expr } => {
            let f = phi_arg(expr)?;
            let printed = f.to_string();
            let smooth = f.smoothness_check(cfg.max_order, 1e-9);
            let mut r = Report::new("parse", cfg, json!({"expr": expr}));
            r.section("parse", json!({
                "printed": printed,
                "pieces": f.pieces().len(),
                "breakpoints": f.breakpoints(),
                "polynomial": f.as_polynomial().is_some(),
                "smoothness": smooth,
            }));
            Ok(Outcome { report: r, code: 0, text: vec![printed], csv: None })
        }
        Cmd::ComposeDeriv { f, phi, n, at } => {
            let (fe, pe) = (phi_arg(f)?, phi_arg(phi)?);
            let d = compose_derivative(&fe, &pe, *n)?;
            let mut sec = json!({"derivative": d.to_string()});
            let mut text = vec![format!("(f∘φ)^({n}) = {d}")];
            if let Some(x) = at {
                let symbolic = d.eval(*x)?;
                let jet = Compose { outer: &fe, inner: &pe }.jet(*x, *n)?.derivative(*n);
                sec["at"] = json!({"x": x, "value": symbolic, "jet_value": jet});
                text.push(format!("at x = {x}: {symbolic} (jet: {jet})"));
            }
            let mut r = Report::new("compose-deriv", cfg, json!({"f": f, "phi": phi, "n": n, "at": at}));
            r.section("compose_deriv", sec);
            Ok(Outcome { report: r, code: 0, text, csv: None })
        }
        Cmd::Seminorm { f, n, region } => {
            let fe = phi_arg(f)?;
            let reg = Region::parse(region)?;
            let est = seminorm_pi(&fe, *n, reg, cfg)?;
            let code = match est.tail_status {
                TailStatus::Decaying | TailStatus::Bounded => 0,
                TailStatus::Growing => 1,
                TailStatus::Ambiguous => 2,
            };
            let text = vec![
                format!("pi_{n} = {} (ln {})", est.value, est.log_value),
                format!("attained at x = {}, j = {}; tail {:?}", est.witness_x, est.witness_j, est.tail_status),
            ];
            let csv = if cli.emit_csv.is_some() { Some(seminorm_rows(&fe, *n, reg, cfg)?) } else { None };
            let mut r = Report::new("seminorm", cfg, json!({"f": f, "n": n, "region": reg}));
            r.section("seminorm", &est);
            Ok(Outcome { report: r, code, text, csv })
        }
        Cmd::SymbolCheck { phi, max_j } => {
            let pe = phi_arg(phi)?;
            let rep = analyze(&pe, max_j.unwrap_or(cfg.max_order), cfg)?;
            let mut text = vec![format!("is_symbol: {}", rep.is_symbol.summary())];
            for (k, v) in [("lim |phi| = inf", &rep.lemma1), ("condition (i)", &rep.cond_i), ("condition (ii)", &rep.cond_ii), ("condition (*)", &rep.star), ("O_M", &rep.om), ("surjective", &rep.surjective)] {
                text.push(format!("  {k}: {}", v.summary()));
            }
            if let Some(rg) = &rep.range {
                text.push(format!("  range: {rg}"));
            }
            let code = verdict_code(&rep.is_symbol);
            let csv = witness_rows(&rep.is_symbol);
            let mut r = Report::new("symbol-check", cfg, json!({"phi": phi, "max_j": max_j}));
            r.section("symbol", &rep);
            Ok(Outcome { report: r, code, text, csv })
        }
        Cmd::MultiplierCheck { f, region } => {
            let fe = phi_arg(f)?;
            let reg = Region::parse(region)?;
            let rep = closed_range_multiplier(&fe, reg, cfg)?;
            let mut text = vec![format!("closed range of M_F on {reg}: {}", rep.verdict.summary())];
            if rep.params.is_some() {
                text.push(format!("  certificate re-verified: {}", verify_certificate(&fe, &rep)?));
            }
            let code = verdict_code(&rep.verdict);
            let csv = witness_rows(&rep.verdict);
            let mut r = Report::new("multiplier-check", cfg, json!({"F": f, "region": reg}));
            r.section("multiplier", &rep);
            Ok(Outcome { report: r, code, text, csv })
        }
        Cmd::ClosedRange { phi, cinf, deriv_nonvanishing, f_candidate } => {
            let pe = phi_arg(phi)?;
            let a = AssumptionSet {
                cinf: cinf.parse::<Assume>()?,
                deriv_nonvanishing: deriv_nonvanishing.parse::<Assume>()?,
                f_candidate: f_candidate.clone(),
            };
            let v = decide(&pe, &a, cfg)?;
            let code = match v.status {
                CrStatus::Closed => 0,
                CrStatus::NotClosed => 1,
                CrStatus::Inconclusive => 2,
            };
            let mut text = vec![format!("{:?} (fired: {})", v.status, v.fired.join(", "))];
            for rec in &v.trace {
                text.push(format!(
                    "  {:<12} {:<10} {}{}",
                    rec.rule,
                    rec.kind,
                    if rec.fired { "fired" } else { "-" },
                    rec.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
                ));
            }
            text.extend(v.diagnostics.iter().map(|d| format!("  diagnostic: {d}")));
            text.extend(v.advisory.iter().map(|d| format!("  note: {d}")));
            let mut r = Report::new("closed-range", cfg, json!({"phi": phi, "assumptions": a}));
            r.section("closed_range", &v);
            Ok(Outcome { report: r, code, text, csv: None })
        }
        Cmd::Witness { phi, violation, n, count } => {
            let pe = phi_arg(phi)?;
            let mut r = Report::new("witness", cfg, json!({"phi": phi, "violation": format!("{violation:?}").to_lowercase(), "n": n, "count": count}));
            let (verdict, rows, expr, text_rows) = match violation {
                Violation::Lemma1 => {
                    let (_, rep) = lemma1_witness(&pe, *count, cfg)?;
                    let rows: Vec<SampleRow> = rep
                        .rows
                        .iter()
                        .map(|w| SampleRow { x: w.x, j: w.j, m: 0, value: w.value, log_value: w.value.ln() })
                        .collect();
                    let t = rep.rows.iter().map(|w| format!("  j={:<3} x={:<24} |x f(phi(x))|={}", w.j, w.x, w.value)).collect::<Vec<_>>();
                    r.section("witness", &rep);
                    (rep.verdict.clone(), rows, rep.expression.clone(), t)
                }
                Violation::I | Violation::Ii => {
                    let (_, rep) = if *violation == Violation::I {
                        build_witness_cond_i(&pe, *n, *count, cfg)?
                    } else {
                        build_witness_cond_ii(&pe, *count, cfg)?
                    };
                    let t = rep.rows.iter().map(|w| format!("  j={:<3} x={:<24} value={} bound={}", w.j, w.x, w.value, w.bound)).collect::<Vec<_>>();
                    r.section("witness", &rep);
                    (rep.verdict.clone(), rep.csv_rows(), rep.expression.clone(), t)
                }
            };
            let mut text = vec![format!("witness: {}", verdict.summary())];
            text.extend(text_rows);
            text.push(format!("f = {expr}"));
            Ok(Outcome { report: r, code: verdict_code(&verdict), text, csv: Some(rows) })
        }
        Cmd::NoncompactDemo { phi, interval, p, eps, count } => {
            let pe = phi_arg(phi)?;
            let (a, b) = interval
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)))
                .ok_or_else(|| Failure(format!("--interval expects a,b, got '{interval}'")))?;
            let fam = noncompact_family(&pe, a, b, *p, *eps, *count, cfg)?;
            let mut text = vec![format!(
                "delta = {}, lambda_{p} = {}, image [{}, {}]",
                fam.delta, fam.lambda, fam.image.0, fam.image.1
            )];
            for m in &fam.members {
                text.push(format!(
                    "  j={:<3} omega={:<10} |f|_{}={:.9} sup|(f o phi)^({p})|={}",
                    m.j,
                    m.f.omega,
                    p - 1,
                    m.norm_low,
                    m.composite_sup
                ));
            }
            let csv = Some(fam.csv_rows());
            let mut r = Report::new("noncompact-demo", cfg, json!({"phi": phi, "interval": [a, b], "p": p, "eps": eps, "count": count}));
            r.section("noncompact", &fam);
            Ok(Outcome { report: r, code: 0, text, csv })
        }
        Cmd::Corpus { file } => {
            let entries = match file {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
                    corpus::parse_corpus(&text).map_err(|e| Failure(format!("{}: {e}", p.display())))?
                }
                None => corpus::builtin(),
            };
            let (r, res) = corpus::corpus_report(&entries, cfg);
            let mut text: Vec<String> = res
                .entries
                .iter()
                .map(|e| format!("{} {:<12} {:<18} expected {:<24} got {}", if e.matched { "ok  " } else { "FAIL" }, format!("{:?}", e.kind).to_lowercase(), e.name, e.expected, e.actual))
                .collect();
            text.push(format!("{}/{} matched", res.matched, res.total));
            for m in &res.mismatches {
                eprintln!("mismatch: {m}");
            }
            let code = if res.mismatches.is_empty() { 0 } else { 1 };
            Ok(Outcome { report: r, code, text, csv: None })
        }
    }
}

fn emit(cli: &Cli, out: &Outcome, elapsed: f64) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => out.report.to_json(),
        Format::Text => {
            let mut s = out.text.join("\n");
            s.push_str(&format!("\nelapsed: {elapsed:.3} s\n"));
            s
        }
    };
    match &cli.output {
        Some(p) => std::fs::write(p, body).map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => print!("{body}"),
    }
    if let Some(p) = &cli.emit_csv {
        let rows = out.csv.as_deref().unwrap_or(&[]);
        std::fs::write(p, rows_to_csv(rows)).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn set_workers() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Failure(format!("{WORKERS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Failure(format!("{WORKERS_ENV} must be a positive integer")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let start = Instant::now();
    let result = set_workers()
        .and_then(|_| load_config(&cli))
        .and_then(|cfg| run(&cli, &cfg))
        .and_then(|out| emit(&cli, &out, start.elapsed().as_secs_f64()).map(|_| out.code));
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            if cli.format == Format::Json {
                let v: Value = json!({"error": msg});
                println!("{v}");
            }
            ExitCode::from(3)
        }
    }
}
