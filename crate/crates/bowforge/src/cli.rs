//! The `bowforge` command line. Results go to standard output as JSON, a
//! one-line summary goes to standard error unless `--json` is given.
//!
//! Exit codes: 0 success or true verdict, 1 negative verdict, 2 usage or IO
//! error, 3 no numerical convergence.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use bowforge_core::brane::{check_ledger_susy, coverage, synthesize};
use bowforge_core::hw::{self, enumerate_equivalent, neighbours, separate, separate_unchecked, Outcome};
use bowforge_core::weights::{gyd_membership, stratum_check, stratum_for_diagram, transpose_gyd, StratumMode};
use bowforge_core::{decide_supersymmetry, BowDiagram, NodeId};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::json::{
    log_from_json, log_to_json, CertificateJson, DiagramJson, LedgerJson, MoveJson, NegativeJson, SeparatedJson,
    SolutionJson, WeightJson,
};
use crate::moment::{
    broadcast_lambda, construct_solution, moment_residual, parse_lambda, solve_numeric, stability_check,
    MomentError, Solution, SolveOptions, C64,
};

pub const SEED_VAR: &str = "BOWFORGE_SEED";

#[derive(Parser, Debug)]
#[command(name = "bowforge", version, about = "Supersymmetry of affine type A bow diagrams")]
pub struct Cli {
    /// Machine mode: no summary on standard error.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum ModeArg {
    Finite,
    Affine,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Decide supersymmetry and print the certificate.
    Check { diagram: String },
    /// Gather the x-points into one run by Hanany-Witten moves.
    Separate { diagram: String },
    /// Separate, then bring the gap `v_0 − v_{−w}` into `[0, w)`.
    Normalize { diagram: String },
    /// Apply one move (`--pair LEFT,RIGHT`), replay a move log, or list the legal moves.
    Hw {
        diagram: String,
        #[arg(long)]
        pair: Option<String>,
        /// Move log: a JSON file or inline JSON.
        #[arg(long)]
        replay: Option<String>,
    },
    /// Build a supersymmetric brane ledger.
    Synth {
        diagram: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a stable point of the fibre over `λ`.
    Solve {
        diagram: String,
        /// Comma list, one value per arrow; a single value is used for all. Complex as `re:im`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual and stability report of a stored solution.
    Verify {
        #[arg(long)]
        sol: PathBuf,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Dominant weight κ of the stratum condition, or null.
    Stratum {
        diagram: String,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Transpose of a generalized Young diagram.
    Transpose {
        #[arg(long)]
        gyd: String,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        level: i64,
    },
    /// Swap arrows and x-points.
    Sdual { diagram: String },
    /// Breadth-first sample of the Hanany-Witten class.
    Equiv {
        diagram: String,
        #[arg(long, default_value_t = 4)]
        budget: usize,
    },
}

/// What a verb produced: the JSON document, a summary line and the exit code.
#[derive(Debug)]
pub struct Report {
    pub json: Value,
    pub summary: String,
    pub code: i32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NoConvergence(String, Value),
}

impl From<bowforge_core::Error> for CliError {
    fn from(e: bowforge_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::NoConvergence { best_residual, attempts } => CliError::NoConvergence(
                e.to_string(),
                json!({"error": "no_convergence", "best_residual": best_residual, "attempts": attempts}),
            ),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(format!("json: {e}"))
    }
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

/// Inline text when it starts with a bracket, a file otherwise. Files may
/// hold the text form or the JSON mirror.
pub fn load_diagram(arg: &str) -> Result<BowDiagram, CliError> {
    let t = arg.trim_start();
    if t.starts_with('(') || t.starts_with('[') {
        return Ok(BowDiagram::parse(t)?);
    }
    let path = PathBuf::from(arg);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    if text.trim_start().starts_with('{') {
        let j: DiagramJson = serde_json::from_str(&text)?;
        return BowDiagram::try_from(&j).map_err(CliError::Usage);
    }
    Ok(BowDiagram::parse(&text)?)
}

/// A list of moves, or any object carrying one under `pipeline` or `move_log`.
fn load_log(arg: &str) -> Result<Vec<MoveJson>, CliError> {
    let text = match serde_json::from_str::<Value>(arg) {
        Ok(_) => arg.to_string(),
        Err(_) => {
            let path = PathBuf::from(arg);
            fs::read_to_string(&path).map_err(|e| io_err(&path, e))?
        }
    };
    let v: Value = serde_json::from_str(&text)?;
    let list = match &v {
        Value::Array(_) => v,
        Value::Object(o) => o
            .get("pipeline")
            .or_else(|| o.get("move_log"))
            .or_else(|| o.get("log"))
            .cloned()
            .ok_or_else(|| CliError::Usage("no move list in the log".into()))?,
        _ => return Err(CliError::Usage("a move log is a JSON list".into())),
    };
    Ok(serde_json::from_value(list)?)
}

fn seed_or_env(seed: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = seed {
        return Ok(s);
    }
    match std::env::var(SEED_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_VAR}={v:?} is not an integer"))),
        Err(_) => Ok(0),
    }
}

fn lambda_for(d: &BowDiagram, text: Option<&str>) -> Result<Vec<C64>, CliError> {
    match text {
        None => Ok(Vec::new()),
        Some(t) => Ok(broadcast_lambda(d, parse_lambda(t).map_err(CliError::Usage)?)),
    }
}

fn write_json(path: &std::path::Path, v: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn verdict(b: bool) -> i32 {
    if b {
        0
    } else {
        1
    }
}

fn check(d: &BowDiagram) -> Result<Report, CliError> {
    let cert = decide_supersymmetry(d)?;
    let cj = CertificateJson::from(&cert);
    let summary = match cj.value {
        None => format!("{d}: supersymmetric"),
        Some(v) => format!("{d}: not supersymmetric, witness value {v}"),
    };
    let mut json = serde_json::to_value(&cj)?;
    json["diagram"] = serde_json::to_value(DiagramJson::from(d))?;
    Ok(Report { json, summary, code: verdict(cert.verdict) })
}

fn negative(w: &hw::NegativeWitness, d: &BowDiagram) -> Result<Report, CliError> {
    Ok(Report {
        json: json!({"negative": NegativeJson::from(w)}),
        summary: format!("{d}: negative dimension {} reached", w.value),
        code: 1,
    })
}

fn separate_cmd(d: &BowDiagram, normalize: bool) -> Result<Report, CliError> {
    let (s, mut log) = match separate(d)? {
        Outcome::Done(x) => x,
        Outcome::Negative(w) => return negative(&w, d),
    };
    let s = if normalize && !s.finite && s.n() > 0 && s.w() > 0 {
        match hw::normalize_gap(&s)? {
            Outcome::Done((s2, l2)) => {
                log.extend(&l2);
                s2
            }
            Outcome::Negative(w) => {
                let mut full = log.clone();
                full.extend(&w.move_log);
                let w = hw::NegativeWitness { move_log: full, ..w };
                return negative(&w, d);
            }
        }
    } else {
        s
    };
    let sj = SeparatedJson::from(&s);
    let summary = format!("{d} -> {} after {} moves", s.to_diagram(), log.len());
    Ok(Report { json: json!({"separated": sj, "log": log_to_json(&log)}), summary, code: 0 })
}

fn parse_pair(text: &str) -> Result<(NodeId, NodeId), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let ids: Vec<u32> = parts.iter().filter_map(|p| p.parse().ok()).collect();
    if parts.len() != 2 || ids.len() != 2 {
        return Err(CliError::Usage(format!("--pair wants LEFT,RIGHT node ids, got {text:?}")));
    }
    Ok((NodeId(ids[0]), NodeId(ids[1])))
}

fn hw_cmd(d: &BowDiagram, pair: Option<&str>, replay: Option<&str>) -> Result<Report, CliError> {
    if let Some(r) = replay {
        let log = log_from_json(&load_log(r)?);
        let out = log.replay(d)?;
        let min = out.min_dim();
        let summary = format!("{d} -> {out} after {} moves", log.len());
        return Ok(Report { json: json!({"diagram": DiagramJson::from(&out), "min_dim": min}), summary, code: 0 });
    }
    if let Some(p) = pair {
        let (l, r) = parse_pair(p)?;
        let out = hw::apply_hw(d, l, r)?;
        let summary = format!("{d} -> {out}");
        return Ok(Report { json: json!({"diagram": DiagramJson::from(&out)}), summary, code: 0 });
    }
    let moves: Vec<Value> = neighbours(d)
        .into_iter()
        .map(|(l, r)| {
            let out = hw::apply_hw(d, l, r)?;
            Ok(json!({"left": l.0, "right": r.0, "result": DiagramJson::from(&out)}))
        })
        .collect::<Result<_, CliError>>()?;
    let summary = format!("{d}: {} legal moves", moves.len());
    Ok(Report { json: json!({"moves": moves}), summary, code: 0 })
}

fn synth_cmd(d: &BowDiagram, out: Option<&std::path::Path>) -> Result<Report, CliError> {
    let cert = decide_supersymmetry(d)?;
    if !cert.verdict {
        let v = cert.witness.value();
        return Ok(Report {
            json: json!({"susy": false, "value": v, "ledger": Value::Null}),
            summary: format!("{d}: not supersymmetric, no ledger"),
            code: 1,
        });
    }
    let ledger = synthesize(d)?;
    let lj = LedgerJson::from(&ledger);
    let covered = coverage(&ledger)? == d.dims();
    let susy = check_ledger_susy(&ledger)?.is_none();
    if let Some(p) = out {
        write_json(p, &lj)?;
    }
    let summary = format!("{d}: {} branes, coverage {}", ledger.brane_count(), if covered { "exact" } else { "WRONG" });
    Ok(Report { json: json!({"susy": true, "coverage_ok": covered, "ledger_susy": susy, "ledger": lj}), summary, code: 0 })
}

fn opts_with(tol: Option<f64>) -> SolveOptions {
    let mut o = SolveOptions::default();
    if let Some(t) = tol {
        o.tol = t;
    }
    o
}

fn solve_cmd(
    d: &BowDiagram,
    lambda: Option<&str>,
    seed: Option<u64>,
    tol: Option<f64>,
    out: Option<&std::path::Path>,
) -> Result<Report, CliError> {
    let lambda = lambda_for(d, lambda)?;
    let seed = seed_or_env(seed)?;
    let opts = opts_with(tol);
    let zero = lambda.iter().all(|z| z.norm() == 0.0);
    let susy = decide_supersymmetry(d)?.verdict;
    let (solution, residual, stability, route) = if zero && susy {
        let r = construct_solution(d, seed, &opts)?;
        (r.solution, r.residual, r.stability, serde_json::to_value(r.route)?)
    } else {
        let r = solve_numeric(d, &lambda, seed, &opts)?;
        (r.solution, r.residual, r.stability, json!("numeric"))
    };
    let sj = SolutionJson::from(&solution);
    let mut json = json!({
        "diagram": DiagramJson::from(d),
        "susy": susy,
        "seed": seed,
        "route": route,
        "residual": residual,
        "stable": stability.stable(),
        "stability": stability,
    });
    match out {
        Some(p) => {
            write_json(p, &sj)?;
            json["out"] = json!(p.display().to_string());
        }
        None => json["solution"] = serde_json::to_value(&sj)?,
    }
    let summary = format!("{d}: residual {residual:.3e}, stable, seed {seed}");
    Ok(Report { json, summary, code: 0 })
}

fn verify_cmd(path: &std::path::Path, lambda: Option<&str>, tol: Option<f64>) -> Result<Report, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let sj: SolutionJson = serde_json::from_str(&text)?;
    let s = Solution::try_from(&sj)?;
    let lambda = lambda_for(&s.diagram, lambda)?;
    let opts = opts_with(tol);
    let residual = moment_residual(&s, &lambda)?.total;
    let level = opts.tol * (1.0 + s.norm().powi(2));
    let report = stability_check(&s, opts.rank_tol);
    let ok = residual <= level && report.stable();
    let summary = format!(
        "{}: residual {residual:.3e} (level {level:.1e}), stability {}",
        s.diagram,
        if report.stable() { "true" } else { "false" }
    );
    Ok(Report {
        json: json!({"residual": residual, "level": level, "stable": report.stable(), "accepted": ok, "stability": report}),
        summary,
        code: verdict(ok),
    })
}

fn stratum_cmd(d: &BowDiagram, mode: Option<ModeArg>) -> Result<Report, CliError> {
    let kappa = match mode {
        None => stratum_for_diagram(d)?,
        Some(m) => {
            let (s, _) = separate_unchecked(d)?;
            let mode = match m {
                ModeArg::Finite => StratumMode::Finite,
                ModeArg::Affine => StratumMode::Affine,
            };
            stratum_check(&s, mode)?
        }
    };
    let (json, summary) = match &kappa {
        Some(k) => (serde_json::to_value(WeightJson::from(k))?, format!("{d}: κ = {:?}", k.values)),
        None => (Value::Null, format!("{d}: no κ")),
    };
    Ok(Report { json, summary, code: verdict(kappa.is_some()) })
}

fn transpose_cmd(gyd: &str, rows: Option<usize>, level: i64) -> Result<Report, CliError> {
    let values: Vec<i64> = gyd
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| CliError::Usage(format!("bad entry {t:?} in --gyd"))))
        .collect::<Result<_, _>>()?;
    if let Some(r) = rows {
        if r != values.len() {
            return Err(CliError::Usage(format!("--rows {r} but {} entries", values.len())));
        }
    }
    if !gyd_membership(&values, level) {
        return Err(CliError::Usage(format!("{values:?} is not a diagram of level {level}")));
    }
    let t = transpose_gyd(&values, level)?;
    let summary = format!("{values:?} -> {t:?}");
    Ok(Report { json: json!(t), summary, code: 0 })
}

fn equiv_cmd(d: &BowDiagram, budget: usize) -> Result<Report, CliError> {
    let sample = enumerate_equivalent(d, budget)?;
    let summary = format!("{d}: {} diagrams within {budget} moves, min dim {:?}", sample.members.len(), sample.min_dim);
    Ok(Report {
        json: json!({"budget": budget, "count": sample.members.len(), "min_dim": sample.min_dim, "members": sample.members}),
        summary,
        code: 0,
    })
}

pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    match &cli.cmd {
        Cmd::Check { diagram } => check(&load_diagram(diagram)?),
        Cmd::Separate { diagram } => separate_cmd(&load_diagram(diagram)?, false),
        Cmd::Normalize { diagram } => separate_cmd(&load_diagram(diagram)?, true),
        Cmd::Hw { diagram, pair, replay } => hw_cmd(&load_diagram(diagram)?, pair.as_deref(), replay.as_deref()),
        Cmd::Synth { diagram, out } => synth_cmd(&load_diagram(diagram)?, out.as_deref()),
        Cmd::Solve { diagram, lambda, seed, tol, out } => {
            solve_cmd(&load_diagram(diagram)?, lambda.as_deref(), *seed, *tol, out.as_deref())
        }
        Cmd::Verify { sol, lambda, tol } => verify_cmd(sol, lambda.as_deref(), *tol),
        Cmd::Stratum { diagram, mode } => stratum_cmd(&load_diagram(diagram)?, *mode),
        Cmd::Transpose { gyd, rows, level } => transpose_cmd(gyd, *rows, *level),
        Cmd::Sdual { diagram } => {
            let d = load_diagram(diagram)?;
            let s = d.s_dual();
            Ok(Report { json: serde_json::to_value(DiagramJson::from(&s))?, summary: format!("{d} -> {s}"), code: 0 })
        }
        Cmd::Equiv { diagram, budget } => equiv_cmd(&load_diagram(diagram)?, *budget),
    }
}

/// Parses `args`, runs the verb and writes to the given streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let (json, summary, code) = match execute(&cli) {
        Ok(r) => (r.json, r.summary, r.code),
        Err(CliError::Usage(m)) => (json!({"error": m}), format!("error: {m}"), 2),
        Err(CliError::NoConvergence(m, j)) => (j, format!("error: {m}"), 3),
    };
    let text = serde_json::to_string_pretty(&json).unwrap_or_else(|_| "null".into());
    let _ = writeln!(out, "{text}");
    if !cli.json || code >= 2 {
        let _ = writeln!(err, "{summary}");
    }
    code
}

pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}
