//! `kslab`: verification sweeps, subsequence certificates and triangular
//! bases, each written as a JSON report.
//!
//! Exit status: 0 when every certified check passes, 1 when a mathematical
//! check fails or is undecided, 2 on usage, parse or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use kslab_core::exactnum::{decimal30, format_rational};
use kslab_core::rect::BRUTE_MAX_N;
use kslab_core::schauder::{parse_jsonl, GeneratorCount};
use kslab_core::subseq::FamilyVerdict;
use kslab_core::tensor::{decay_csv, decay_profile};
use kslab_core::{
    build_triangular_basis, certify_bound2, density_check, expand, extract, run_verification,
    strongly_normal_report, sup_rect_bruteforce, sup_rect_fast, verify_stabilization, Bijection,
    Density, Error, GeneratorSet, KsMeasure, PiEnclosure, TensorCombo, Verdict,
    VerifyConfig,
};

#[derive(Parser)]
#[command(name = "kslab", version, about = "Exact checks for the measures mu_n on K_n x L_n")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Total variation, rectangle and tensor bounds for n = 1..=n_max.
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n_max: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a flat CSV of all checks.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Record wall time per check (makes the report non-reproducible).
        #[arg(long)]
        timings: bool,
        /// Use the seeded row permutation instead of the canonical bijection.
        #[arg(long)]
        perm_seed: Option<u64>,
    },
    /// Greedy subsequence with a strongly normal report on a family.
    Subseq {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// JSON array of tensor combinations.
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        stream_start: u64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stream_step: u64,
        /// Prefix length for the report (defaults to n).
        #[arg(long)]
        m: Option<usize>,
    },
    /// Density check, triangular basis and optional expansions.
    Schauder {
        /// JSON lines, one generator per line.
        #[arg(long)]
        generators: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        horizon: usize,
        /// JSON lines of target sequences.
        #[arg(long)]
        target: Option<PathBuf>,
        /// The generators are a prefix of a longer stream.
        #[arg(long)]
        stream_prefix: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rectangle supremum at one n with its bound check.
    Sup {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Exhaustive search instead of the closed form (n <= 4).
        #[arg(long)]
        brute: bool,
        #[arg(long)]
        perm_seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact |mu_n(h)| against 8 ||h|| / sqrt(pi n) on a list of n.
    Decay {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,256,1024")]
        n_list: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn math(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotEvaluable { .. }
            | Error::StreamExhausted { .. }
            | Error::RankDeficient { .. }
            | Error::Degenerate(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &str) -> CmdResult {
    fs::write(path, body).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, v: &Value) -> CmdResult {
    let mut s = serde_json::to_string_pretty(v).expect("plain data");
    s.push('\n');
    write(path, &s)
}

fn bijection(perm_seed: Option<u64>) -> Bijection {
    perm_seed.map_or(Bijection::Canonical, |seed| Bijection::RowPermutation { seed })
}

/// A JSON array of combinations; an empty or blank file is an empty family.
fn read_family(path: &Path) -> Result<Vec<TensorCombo>, Failure> {
    let text = read(path)?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_verify(
    n_max: usize,
    out: &Path,
    csv: Option<&Path>,
    timings: bool,
    perm_seed: Option<u64>,
) -> CmdResult {
    let mut cfg = VerifyConfig::new(n_max);
    cfg.timings = timings;
    cfg.bijection = bijection(perm_seed);
    let run = run_verification(&cfg)?;
    write(out, &run.to_json_string())?;
    if let Some(csv) = csv {
        write(csv, &run.to_csv())?;
    }
    if run.is_pass() {
        Ok(())
    } else {
        Err(Failure::math(format!("failing checks: {}", run.failing.join(", "))))
    }
}

fn cmd_subseq(
    n: usize,
    family: &Path,
    out: &Path,
    start: u64,
    step: u64,
    m: Option<usize>,
) -> CmdResult {
    let family = read_family(family)?;
    let stream = (0u64..).map_while(|i| i.checked_mul(step).and_then(|d| d.checked_add(start)));
    let cert = extract(stream, n)?;
    let m = m.unwrap_or(n);
    if m == 0 || m > n {
        return Err(Failure::usage(format!("--m must lie in 1..={n}")));
    }
    let pi = PiEnclosure::published();
    let report = strongly_normal_report(&cert, &family, m, &pi)?;
    let body = json!({
        "stream": {"start": start, "step": step},
        "certificate": cert.to_json(),
        "certificate_verified": cert.verify(),
        "within_basel": cert.within_basel(&pi),
        "report": report,
    });
    write_json(out, &body)?;
    if !cert.verify() || !cert.within_basel(&pi) {
        return Err(Failure::math("certificate did not verify"));
    }
    match report.verdict {
        FamilyVerdict::Pass | FamilyVerdict::Vacuous => Ok(()),
        FamilyVerdict::Fail => {
            let bad: Vec<String> = report
                .rows
                .iter()
                .filter(|r| r.verdict != Verdict::Pass)
                .map(|r| r.combo.to_string())
                .collect();
            Err(Failure::math(format!("combinations not dominated: {}", bad.join(", "))))
        }
    }
}

fn cmd_schauder(
    generators: &Path,
    n: usize,
    horizon: usize,
    target: Option<&Path>,
    stream_prefix: bool,
    out: &Path,
) -> CmdResult {
    if horizon < n {
        return Err(Failure::usage(format!("--horizon {horizon} is below --n {n}")));
    }
    let gens = parse_jsonl(&read(generators)?)?;
    let targets = match target {
        Some(p) => parse_jsonl(&read(p)?)?,
        None => Vec::new(),
    };
    if let Some(t) = targets.iter().position(|t| t.max_coordinate() > horizon) {
        return Err(Failure::usage(format!("target {} has coordinates beyond the horizon", t + 1)));
    }
    let g = GeneratorSet {
        generators: gens,
        count: if stream_prefix {
            GeneratorCount::Stream
        } else {
            GeneratorCount::Finite
        },
    };
    let density = density_check(&g, n)?;
    if !density.is_dense() {
        write_json(out, &json!({ "density": density, "verdict": Verdict::Fail }))?;
        return Err(match density {
            Density::NotDense { failing, .. } => Failure::math(format!("not dense, F = {failing:?}")),
            _ => Failure::math("inconclusive: more generators needed"),
        });
    }
    let basis = build_triangular_basis(&g, n, horizon)?;
    let mut all_ok = true;
    let mut expansions = Vec::with_capacity(targets.len());
    for t in &targets {
        let y = t.to_dense(horizon);
        let exp = expand(&y, &basis)?;
        let grid = verify_stabilization(&exp, &basis, &y, n);
        all_ok &= grid.all_true;
        let mut v = exp.to_json();
        v["grid"] = json!(grid.grid);
        v["all_true"] = json!(grid.all_true);
        expansions.push(v);
    }
    let verdict = if all_ok { Verdict::Pass } else { Verdict::Fail };
    let body = json!({
        "density": density,
        "basis": basis.to_json(),
        "expansions": expansions,
        "verdict": verdict,
    });
    write_json(out, &body)?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure::math("a stabilization grid has a false entry"))
    }
}

fn cmd_sup(n: usize, brute: bool, perm_seed: Option<u64>, out: &Path) -> CmdResult {
    if brute && n > BRUTE_MAX_N {
        return Err(Failure::usage(format!("--brute supports n <= {BRUTE_MAX_N}")));
    }
    let m = KsMeasure::auto(n, bijection(perm_seed))?;
    let report = if brute {
        sup_rect_bruteforce(&m)?
    } else {
        sup_rect_fast(&m)?
    };
    let verdict = certify_bound2(&report, &PiEnclosure::published());
    let mut body = report.to_json();
    body["bound2"] = json!(verdict);
    body["representation"] = json!(m.representation());
    write_json(out, &body)?;
    match verdict {
        Verdict::Pass => Ok(()),
        other => Err(Failure::math(format!("bound2 at n = {n}: {other:?}"))),
    }
}

fn cmd_decay(family: &Path, n_list: &[usize], out: &Path, csv: Option<&Path>) -> CmdResult {
    if n_list.contains(&0) {
        return Err(Failure::usage("n values must be >= 1"));
    }
    let family = read_family(family)?;
    let pi = PiEnclosure::published();
    let mut rows_json = Vec::with_capacity(family.len());
    let mut csv_body = String::new();
    let mut all_pass = true;
    for (i, h) in family.iter().enumerate() {
        let rows = decay_profile(h, n_list, &pi)?;
        all_pass &= rows.iter().all(|r| r.pass);
        if csv.is_some() {
            let block = decay_csv(&rows);
            if i == 0 {
                csv_body.push_str("combo,");
                csv_body.push_str(block.lines().next().unwrap_or_default());
                csv_body.push('\n');
            }
            for line in block.lines().skip(1) {
                csv_body.push_str(&format!("{i},{line}\n"));
            }
        }
        rows_json.push(json!({
            "combo": i,
            "norm_bound": format_rational(&h.norm_bound()),
            "norm_bound_decimal": decimal30(&h.norm_bound()),
            "rows": rows,
        }));
    }
    write_json(out, &json!({ "profiles": rows_json, "all_pass": all_pass }))?;
    if let Some(csv) = csv {
        write(csv, &csv_body)?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::math("some |mu_n(h)| exceeds its bound"))
    }
}

fn configure_threads() -> CmdResult {
    let Ok(raw) = std::env::var("KSLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| Failure::usage(format!("KSLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn run(cli: Cli) -> CmdResult {
    configure_threads()?;
    // sizes beyond usize are rejected by the guards anyway
    let size = |v: u64| usize::try_from(v).map_err(|_| Failure::usage(format!("{v} is too large")));
    match cli.command {
        Command::Verify {
            n_max,
            out,
            csv,
            timings,
            perm_seed,
        } => cmd_verify(size(n_max)?, &out, csv.as_deref(), timings, perm_seed),
        Command::Subseq {
            n,
            family,
            out,
            stream_start,
            stream_step,
            m,
        } => cmd_subseq(size(n)?, &family, &out, stream_start, stream_step, m),
        Command::Schauder {
            generators,
            n,
            horizon,
            target,
            stream_prefix,
            out,
        } => cmd_schauder(&generators, size(n)?, horizon, target.as_deref(), stream_prefix, &out),
        Command::Sup {
            n,
            brute,
            perm_seed,
            out,
        } => cmd_sup(size(n)?, brute, perm_seed, &out),
        Command::Decay {
            family,
            n_list,
            out,
            csv,
        } => cmd_decay(&family, &n_list, &out, csv.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("kslab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
