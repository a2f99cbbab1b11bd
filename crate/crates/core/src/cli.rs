//! The `soliton-lab` command line.
//!
//! Exit status is 0 on success, 1 on invalid input and 2 when a
//! verification suite finds a nonzero residual or a failed bound.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::boxball::{
    render_history, simulate, ud_limit_check, write_history_csv, BbscState, Carrier, UdField,
};
use crate::lattice::{evolve_gkdv, FieldWarning, LatticeField, SystemParams};
use crate::measure::{
    detect_bbsc_solitons, measure_amplitude, overtake_report, track_troughs, TrackerConfig,
    Trajectory,
};
use crate::rational::Rat;
use crate::soliton::{
    amplitude, check_sign_relation, check_kp_bilinear, check_reduction, sample_field,
    scan_monotonicity, validate, velocity, verify_exactness, KpParams, LatticePoint, Soliton,
    SolitonSpec,
};

pub const THREADS_ENV: &str = "SOLITON_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "soliton-lab", version, about = "Generalized discrete KdV solitons and the box-ball system with carrier")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the exact N-soliton field from the tau functions.
    Exact(ExactArgs),
    /// Step an initial row forward with the lattice map.
    Evolve(EvolveArgs),
    /// Simulate the box-ball system with carrier.
    Bbsc(BbscArgs),
    /// Closed-form and measured velocities and amplitudes side by side.
    Analyze(AnalyzeArgs),
    /// Monotonicity scan of the velocity and amplitude laws.
    Scan(ScanArgs),
    /// Exact verification suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    pub alpha: Rat,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    pub beta: Rat,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Significant digits for decimal output; exact `p/q` when absent.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub precision: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Ascii,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Soliton as `p:gamma`, repeatable.
    #[arg(long = "soliton", value_parser = parse_soliton, allow_hyphen_values = true)]
    pub solitons: Vec<Soliton>,
    /// Space window `n_lo:n_hi`.
    #[arg(long = "n", value_parser = parse_range, allow_hyphen_values = true)]
    pub window: (i64, i64),
    /// Time range `t0:t1`.
    #[arg(long = "t", value_parser = parse_range, allow_hyphen_values = true)]
    pub t_range: (i64, i64),
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Initial row as comma-separated rationals, starting with 1.
    #[arg(long, value_delimiter = ',', value_parser = parse_rat, allow_hyphen_values = true)]
    pub init: Vec<Rat>,
    /// Site index of the first entry of `--init`.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub n_lo: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub t0: i64,
    #[arg(long)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Render {
    Ascii,
    Csv,
}

#[derive(Debug, Args)]
pub struct BbscArgs {
    /// Box capacity.
    #[arg(long)]
    pub cb: u32,
    /// Carrier capacity, an integer or `inf`.
    #[arg(long, value_parser = parse_carrier)]
    pub cc: Carrier,
    /// Initial occupancies as digits, `.` for an empty box.
    #[arg(long)]
    pub init: String,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, value_enum, default_value_t = Render::Ascii)]
    pub render: Render,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long = "soliton", value_parser = parse_soliton, allow_hyphen_values = true)]
    pub solitons: Vec<Soliton>,
    /// Window for the interacting run.
    #[arg(long = "n", value_parser = parse_range, allow_hyphen_values = true)]
    pub window: (i64, i64),
    #[arg(long = "t", value_parser = parse_range, allow_hyphen_values = true)]
    pub t_range: (i64, i64),
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Random `(p, q)` pairs for the sign relation between velocity and
    /// amplitude differences.
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Exactness,
    Kp,
    Reduction,
    Ud,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    pub alpha: Option<Rat>,
    #[arg(long, value_parser = parse_rat, allow_hyphen_values = true)]
    pub beta: Option<Rat>,
    #[arg(long = "soliton", value_parser = parse_soliton, allow_hyphen_values = true)]
    pub solitons: Vec<Soliton>,
    /// Side of the square grid for the exactness suite.
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
    /// Random lattice points per parameter set for the KP suites.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.trim().parse::<Rat>().map_err(|e| e.to_string())
}

fn parse_soliton(s: &str) -> Result<Soliton, String> {
    let (p, gamma) = s.split_once(':').ok_or_else(|| format!("expected p:gamma, got {s:?}"))?;
    Ok(Soliton::new(parse_rat(p)?, parse_rat(gamma)?))
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let err = || format!("expected lo:hi with integers, got {s:?}");
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    let lo: i64 = lo.trim().parse().map_err(|_| err())?;
    let hi: i64 = hi.trim().parse().map_err(|_| err())?;
    if hi < lo {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_carrier(s: &str) -> Result<Carrier, String> {
    match s.trim() {
        "inf" | "infinity" => Ok(Carrier::Infinite),
        other => other
            .parse::<u32>()
            .map(Carrier::Finite)
            .map_err(|_| format!("expected a non-negative integer or inf, got {s:?}")),
    }
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    Invalid(String),
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 1,
            Failure::Verification(_) => 2,
        }
    }
}

fn invalid(context: &str) -> impl Fn(&dyn Display) -> Failure + '_ {
    move |e| Failure::Invalid(format!("{context}: {e}"))
}

fn io_failure(e: io::Error) -> Failure {
    Failure::Invalid(format!("output: {e}"))
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn system(args: &SystemArgs) -> Result<SystemParams, Failure> {
    SystemParams::new(args.alpha.clone(), args.beta.clone()).map_err(|e| invalid("parameters")(&e))
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // A pool may already exist when embedded; the cap is best effort.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    match run(&config) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Invalid(m) => eprintln!("error: {m}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
            }
            f.exit_code()
        }
    }
}

pub fn run(config: &RunConfig) -> Result<(), Failure> {
    match &config.command {
        Command::Exact(a) => run_exact(a),
        Command::Evolve(a) => run_evolve(a),
        Command::Bbsc(a) => run_bbsc(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Scan(a) => run_scan(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn write_field(field: &LatticeField, output: &OutputArgs) -> Result<(), Failure> {
    let precision = output.precision.map(|p| p as usize);
    let mut out = open_output(&output.out)?;
    match output.format {
        Format::Csv => field.write_csv(&mut out, precision).map_err(io_failure)?,
        Format::Json => {
            let fmt = |v: &Rat| match precision {
                None => v.to_string(),
                Some(p) => crate::lattice::format_significant(v.to_f64(), p),
            };
            let rows: Vec<_> = field
                .rows
                .iter()
                .map(|r| json!({"x": r.x.iter().map(fmt).collect::<Vec<_>>(), "y": r.y.iter().map(fmt).collect::<Vec<_>>()}))
                .collect();
            let doc = json!({"n_lo": field.n_lo, "n_hi": field.n_hi, "t0": field.t0, "rows": rows});
            serde_json::to_writer(&mut out, &doc).map_err(|e| io_failure(e.into()))?;
            writeln!(out).map_err(io_failure)?;
        }
        Format::Ascii => return Err(Failure::Invalid("lattice fields support csv or json".into())),
    }
    out.flush().map_err(io_failure)
}

fn run_exact(a: &ExactArgs) -> Result<(), Failure> {
    let params = system(&a.system)?;
    let spec = SolitonSpec::new(a.solitons.clone());
    let field = sample_field(&params, &spec, a.window, a.t_range).map_err(|e| invalid("exact")(&e))?;
    write_field(&field, &a.output)
}

fn run_evolve(a: &EvolveArgs) -> Result<(), Failure> {
    let params = system(&a.system)?;
    let evo = evolve_gkdv(a.init.clone(), a.n_lo, a.t0, a.steps, &params)
        .map_err(|e| invalid("evolve")(&e))?;
    for w in &evo.warnings {
        let FieldWarning::SolitonEscapedWindow { t, deviation } = w;
        eprintln!("warning: right edge deviates from 1 by {deviation:e} at t = {t}");
    }
    write_field(&evo.field, &a.output)
}

fn run_bbsc(a: &BbscArgs) -> Result<(), Failure> {
    let state = BbscState::from_digits(&a.init, a.cb, a.cc).map_err(|e| invalid("bbsc")(&e))?;
    let history = simulate(&state, a.steps).map_err(|e| invalid("bbsc")(&e))?;
    let mut out = open_output(&a.out)?;
    match (a.render, render_history(&history)) {
        (Render::Ascii, Some(text)) => {
            out.write_all(text.as_bytes()).map_err(io_failure)?;
            let tracks = detect_bbsc_solitons(&history).map_err(|e| invalid("bbsc")(&e))?;
            for t in tracks.iter().filter(|t| t.times[0] == 0) {
                let speed = t.speed().map_or_else(|| "-".to_string(), |s| s.to_string());
                writeln!(out, "# cluster of {} balls: speed {speed}", t.amplitude).map_err(io_failure)?;
            }
        }
        (Render::Ascii, None) => {
            return Err(Failure::Invalid("box capacity above 9 cannot be drawn; use --render csv".into()))
        }
        (Render::Csv, _) => write_history_csv(&history, &mut out).map_err(io_failure)?,
    }
    out.flush().map_err(io_failure)
}

#[derive(Serialize)]
struct SolitonAnalysis {
    p: String,
    gamma: String,
    velocity_closed: f64,
    velocity_measured: Option<f64>,
    amplitude_closed: f64,
    amplitude_measured: Option<f64>,
}

fn run_analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let params = system(&a.system)?;
    let spec = SolitonSpec::new(a.solitons.clone());
    let consts = validate(&params, &spec).map_err(|e| invalid("analyze")(&e))?;
    let (t0, t1) = a.t_range;
    let mut rows = Vec::new();
    let mut v_max: f64 = 1.0;
    for (s, k) in spec.solitons.iter().zip(&consts) {
        let v = velocity(&params, &s.p).map_err(|e| invalid("analyze")(&e))?;
        let w = amplitude(&params, &s.p).map_err(|e| invalid("analyze")(&e))?;
        v_max = v_max.max(v.abs());
        // Isolated run on a window that follows the trough.
        let (e0, e1) = (k.extremum_position(t0 as f64), k.extremum_position(t1 as f64));
        let lo = e0.min(e1).floor() as i64 - 20;
        let hi = e0.max(e1).ceil() as i64 + 20;
        let single = SolitonSpec::new(vec![s.clone()]);
        let field = sample_field(&params, &single, (lo, hi), (t0, t1))
            .map_err(|e| invalid("analyze")(&e))?
            .to_float_x();
        let tracks = track_troughs(&field, &TrackerConfig::for_max_speed(v))
            .map_err(|e| invalid("analyze")(&e))?;
        let velocity_measured = tracks.first().and_then(|t| t.speed());
        let amplitude_measured = field
            .rows
            .iter()
            .filter_map(|r| measure_amplitude(r).ok())
            .reduce(f64::max);
        rows.push(SolitonAnalysis {
            p: s.p.to_string(),
            gamma: s.gamma.to_string(),
            velocity_closed: v,
            velocity_measured,
            amplitude_closed: w,
            amplitude_measured,
        });
    }
    let overtake = if spec.len() == 2 {
        let field = sample_field(&params, &spec, a.window, a.t_range)
            .map_err(|e| invalid("analyze")(&e))?
            .to_float_x();
        let tracks = track_troughs(&field, &TrackerConfig::for_max_speed(v_max))
            .map_err(|e| invalid("analyze")(&e))?;
        match overtake_report(&tracks) {
            Ok(r) => serde_json::to_value(r).expect("serializable"),
            Err(e) => json!({"error": e.to_string(), "tracks_found": tracks.len()}),
        }
    } else {
        serde_json::Value::Null
    };
    let doc = json!({
        "alpha": params.alpha().to_string(),
        "beta": params.beta().to_string(),
        "solitons": rows,
        "overtake": overtake,
    });
    let mut out = open_output(&a.out)?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| io_failure(e.into()))?;
    writeln!(out).map_err(io_failure)?;
    out.flush().map_err(io_failure)
}

/// `count` random rational pairs strictly inside `(0, p_max)`.
pub fn random_pairs(p_max: &Rat, count: usize, seed: u64) -> Vec<(Rat, Rat)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || {
        let k: i64 = rng.gen_range(1..10_000);
        p_max * &Rat::new(k, 10_000).expect("nonzero")
    };
    (0..count).map(|_| (point(), point())).collect()
}

fn run_scan(a: &ScanArgs) -> Result<(), Failure> {
    let params = system(&a.system)?;
    let report = scan_monotonicity(&params, a.grid).map_err(|e| invalid("scan")(&e))?;
    let pairs = random_pairs(&params.p_max(), a.pairs, a.rng_seed);
    let sign_relation = check_sign_relation(&params, &pairs).map_err(|e| invalid("scan")(&e))?;
    let doc = json!({"monotonicity": report, "sign_relation": sign_relation});
    let mut out = open_output(&a.out)?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| io_failure(e.into()))?;
    writeln!(out).map_err(io_failure)?;
    out.flush().map_err(io_failure)?;
    if report.is_clean() && sign_relation.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} monotonicity and {} sign violations",
            report.violations.len(),
            sign_relation.violations.len()
        )))
    }
}

/// Seeded random lattice points with coordinates in `[-5, 5]`.
pub fn random_points(rng: &mut impl Rng, count: usize) -> Vec<LatticePoint> {
    (0..count)
        .map(|_| {
            (rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen_range(-5..=5), rng.gen_range(-5..=5))
        })
        .collect()
}

/// Outcome of one verification suite.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn kp_suite(reduced: bool, points: usize, seed: u64) -> Result<SuiteResult, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut total, mut zero) = (0, 0);
    for order in [1, 2] {
        let kp = KpParams::random(&mut rng, order, reduced);
        for point in random_points(&mut rng, points) {
            total += 1;
            let ok = if reduced {
                check_reduction(&kp, point).map_err(|e| invalid("kp")(&e))?.is_zero()
            } else {
                let (r1, r2) = check_kp_bilinear(&kp, point).map_err(|e| invalid("kp")(&e))?;
                r1.is_zero() && r2.is_zero()
            };
            zero += usize::from(ok);
        }
    }
    Ok(SuiteResult {
        name: if reduced { "reduction" } else { "kp" },
        passed: zero == total,
        detail: format!("residual 0 at {zero}/{total} points"),
    })
}

/// Box-ball state `0030001000` with `C_B = 3`, `C_C = 1`, written in the
/// tropical variables `X = U - C_B`, `Y = V - C_C`.
pub fn default_ud_field() -> UdField {
    let (a, b) = (3.0, 1.0);
    let u = [0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    UdField {
        x: u.iter().map(|v| v - a).collect(),
        y: vec![-b; u.len()],
        a,
        b,
    }
}

pub const UD_EPSILONS: [f64; 4] = [1.0, 1e-1, 1e-2, 1e-3];
pub const UD_FINAL_TOLERANCE: f64 = 1e-2;

fn ud_suite() -> Result<SuiteResult, Failure> {
    let rep = ud_limit_check(&default_ud_field(), &UD_EPSILONS).map_err(|e| invalid("ud")(&e))?;
    let last = rep.entries.last().map_or(f64::INFINITY, |e| e.max_deviation);
    let devs: Vec<String> = rep.entries.iter().map(|e| format!("{:e}", e.max_deviation)).collect();
    Ok(SuiteResult {
        name: "ud",
        passed: rep.strictly_decreasing && last < UD_FINAL_TOLERANCE,
        detail: format!("max deviations [{}]", devs.join(", ")),
    })
}

fn exactness_suite(a: &VerifyArgs) -> Result<SuiteResult, Failure> {
    let r = |n, d| Rat::new(n, d).expect("nonzero");
    let alpha = a.alpha.clone().unwrap_or_else(|| r(5, 6));
    let beta = a.beta.clone().unwrap_or_else(|| r(14, 15));
    let params = SystemParams::new(alpha, beta).map_err(|e| invalid("parameters")(&e))?;
    let solitons = if a.solitons.is_empty() {
        vec![Soliton::new(r(2, 15), r(-1, 6)), Soliton::new(r(1, 30), r(-1, 30))]
    } else {
        a.solitons.clone()
    };
    let rep = verify_exactness(&params, &SolitonSpec::new(solitons), a.grid)
        .map_err(|e| invalid("exactness")(&e))?;
    let mut detail = format!("residual 0 at {}/{} points", rep.zero_residual_points, rep.points);
    if let Some((t, n)) = rep.first_failure {
        detail.push_str(&format!(", first failure at t = {t}, n = {n}"));
    }
    Ok(SuiteResult { name: "exactness", passed: rep.is_exact(), detail })
}

fn run_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = match a.suite {
        Suite::All => vec![Suite::Exactness, Suite::Kp, Suite::Reduction, Suite::Ud],
        s => vec![s],
    };
    let mut failed = Vec::new();
    for s in suites {
        let res = match s {
            Suite::Exactness => exactness_suite(a)?,
            Suite::Kp => kp_suite(false, a.points, a.rng_seed)?,
            Suite::Reduction => kp_suite(true, a.points, a.rng_seed)?,
            Suite::Ud => ud_suite()?,
            Suite::All => unreachable!("expanded above"),
        };
        println!("{}: {} ({})", res.name, if res.passed { "ok" } else { "FAILED" }, res.detail);
        if !res.passed {
            failed.push(res.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}
