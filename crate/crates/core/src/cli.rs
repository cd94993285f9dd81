//! Command-line front end: scenario loading, dispatch, reports and exit codes.
//!
//! Exit codes: `0` success, `1` input error, `2` numerical failure,
//! `3` verification mismatch.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cycles::{cycle_census, find_cycles_local, pseudo_hopf_scan, write_scan_csv, CycleError, LimitCycle};
use crate::field::{classify_mts, FieldError, PiecewiseField};
use crate::flow::{geometric_grid, write_delta_csv, FlowError, ReturnMap};
use crate::portrait::build_portrait;
use crate::scenario::{Scenario, ScenarioError};
use crate::unfold::{
    apply_shift, build_perturbation, build_unfolded, lemma1_check, lemma1_exact, lemma1_random,
    local_v2_limit_check, verify_contact_ladder, ShiftConvention, UnfoldError, UnfoldingParams,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

/// Residual gate of `verify-lemma1`.
pub const LEMMA1_TOL: f64 = 1e-8;
/// Number of seeded draws added by `verify-lemma1 --seed`.
pub const LEMMA1_DRAWS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Lyapunov,
    Unfold,
    #[value(name = "verify-ladder")]
    VerifyLadder,
    #[value(name = "verify-lemma1")]
    VerifyLemma1,
    #[value(name = "verify-v2-limit")]
    VerifyV2Limit,
    Cycles,
    Scan,
    #[value(name = "delta-dump")]
    DeltaDump,
    Portrait,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "pseudohopf", version, about = "Pseudo-Hopf analysis of planar Filippov fields")]
pub struct Args {
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Translation of the upper field.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub shift: Option<ShiftConvention>,
    /// Output directory, overriding the scenario's.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the randomized identity check of `verify-lemma1`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the normalized scenario next to the report.
    #[arg(long)]
    pub dump_normalized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Mismatch,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub command: String,
    pub timestamp: String,
    pub version: String,
    pub payload: Value,
    pub status: Status,
    pub diagnostics: Vec<String>,
}

/// A failed run: exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn field_code(e: &FieldError) -> i32 {
    match e {
        FieldError::DivisionResidual { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

fn flow_code(e: &FlowError) -> i32 {
    match e {
        FlowError::InvalidConfig(_) => EXIT_INPUT,
        _ => EXIT_NUMERICAL,
    }
}

fn unfold_code(e: &UnfoldError) -> i32 {
    match e {
        UnfoldError::IllConditioned { .. } => EXIT_NUMERICAL,
        UnfoldError::VerificationMismatch(_) => EXIT_MISMATCH,
        UnfoldError::Field(f) => field_code(f),
        _ => EXIT_INPUT,
    }
}

fn cycle_code(e: &CycleError) -> i32 {
    match e {
        CycleError::Flow(f) => flow_code(f),
        CycleError::Field(f) => field_code(f),
        CycleError::Unfold(u) => unfold_code(u),
        CycleError::Root(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

macro_rules! failure_from {
    ($t:ty, $f:expr) => {
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Self {
                    code: $f(&e),
                    message: e.to_string(),
                }
            }
        }
    };
}

failure_from!(FieldError, field_code);
failure_from!(FlowError, flow_code);
failure_from!(UnfoldError, unfold_code);
failure_from!(CycleError, cycle_code);
failure_from!(ScenarioError, |_: &ScenarioError| EXIT_INPUT);

struct Outcome {
    payload: Value,
    mismatches: Vec<String>,
    artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn payload<T: Serialize>(p: &T) -> Self {
        Self {
            payload: to_value(p),
            mismatches: Vec::new(),
            artifacts: Vec::new(),
        }
    }
}

fn to_value<T: Serialize>(p: &T) -> Value {
    serde_json::to_value(p).expect("report payloads serialize")
}

/// Scenario after applying command-line overrides.
struct Job {
    scenario: Scenario,
    field: PiecewiseField,
    b: f64,
    shift: ShiftConvention,
    seed: Option<u64>,
    b_flag: Option<f64>,
}

impl Job {
    fn new(mut scenario: Scenario, args: &Args) -> Result<Self, Failure> {
        if let Some(u) = scenario.unfold.as_mut() {
            if let Some(b) = args.b {
                u.b = b;
            }
            if let Some(e) = args.epsilon {
                u.epsilon = e;
            }
            if let Some(s) = args.shift {
                u.shift = s;
            }
            u.validate()?;
        } else if args.epsilon.is_some() {
            return Err(Failure::input("--epsilon needs an [unfold] section"));
        }
        let b = args.b.or(scenario.unfold.as_ref().map(|u| u.b)).unwrap_or(0.0);
        let shift = args
            .shift
            .or(scenario.unfold.as_ref().map(|u| u.shift))
            .unwrap_or_default();
        Ok(Self {
            field: scenario.piecewise_field(),
            scenario,
            b,
            shift,
            seed: args.seed,
            b_flag: args.b,
        })
    }

    fn params(&self) -> Result<&UnfoldingParams, Failure> {
        self.scenario
            .unfold
            .as_ref()
            .ok_or_else(|| Failure::input(format!("scenario '{}' has no [unfold] section", self.scenario.name)))
    }

    fn shifted(&self) -> PiecewiseField {
        apply_shift(&self.field, self.b, self.shift)
    }

    fn unfolded(&self) -> Result<PiecewiseField, Failure> {
        let p = self.params()?;
        Ok(build_unfolded(&self.field, &build_perturbation(&self.field, p)?)?)
    }
}

fn execute(cmd: Command, job: &Job) -> Result<Outcome, Failure> {
    let s = &job.scenario;
    let stem = format!("{}.{}", s.name, cmd.name());
    match cmd {
        Command::Classify => {
            let d = classify_mts(&job.field.shift_x(s.window.center))?;
            Ok(Outcome::payload(&d))
        }
        Command::Lyapunov => {
            let map = ReturnMap::new(job.field.clone(), s.window.center, s.integrator)?;
            let est = map.estimate_lyapunov(s.sampling.lyapunov_min, s.sampling.lyapunov_max)?;
            let closed_form = classify_mts(&job.field.shift_x(s.window.center)).ok().map(|d| d.V2);
            Ok(Outcome::payload(&json!({ "estimate": est, "closed_form_v2": closed_form })))
        }
        Command::Unfold => {
            let p = job.params()?;
            let polys = build_perturbation(&job.field, p)?;
            let unfolded = apply_shift(&build_unfolded(&job.field, &polys)?, p.b, p.shift);
            Ok(Outcome::payload(&json!({
                "params": p,
                "perturbation": polys,
                "unfolded": unfolded,
            })))
        }
        Command::VerifyLadder => {
            let r = verify_contact_ladder(&job.unfolded()?, job.params()?)?;
            let mut out = Outcome::payload(&r);
            out.mismatches = r.failures.clone();
            Ok(out)
        }
        Command::VerifyLemma1 => {
            let p = job.params()?;
            let float = lemma1_check(&job.field, p.k, &p.lambda)?;
            let exact = lemma1_exact(&job.field, p.k, &p.lambda)?;
            let batch = job.seed.map(|seed| lemma1_random(seed, LEMMA1_DRAWS)).transpose()?;
            let mut mismatches = Vec::new();
            if !(float.max_residual < LEMMA1_TOL) {
                mismatches.push(format!("max residual {:e} exceeds {LEMMA1_TOL:e}", float.max_residual));
            }
            if let Some(b) = &batch {
                if !(b.max_residual < LEMMA1_TOL) {
                    mismatches.push(format!("seeded draws reach residual {:e}", b.max_residual));
                }
            }
            Ok(Outcome {
                payload: json!({ "report": float, "exact": exact, "seeded": batch }),
                mismatches,
                artifacts: Vec::new(),
            })
        }
        Command::VerifyV2Limit => {
            let r = local_v2_limit_check(&job.field, job.params()?)?;
            let mut out = Outcome::payload(&r);
            if let Err(UnfoldError::VerificationMismatch(m)) = r.ensure() {
                out.mismatches = m;
            }
            Ok(out)
        }
        Command::Cycles => {
            let cfg = s.cycle_config();
            if let Some(p) = &s.unfold {
                let r = cycle_census(&job.field, p, &cfg)?;
                let mut out = Outcome::payload(&r);
                out.mismatches = r.failures.clone();
                Ok(out)
            } else {
                let r = find_cycles_local(&job.shifted(), s.window.center, s.window.radius, job.b, &cfg)?;
                Ok(Outcome::payload(&r))
            }
        }
        Command::Scan => {
            let b_values = match job.b_flag {
                Some(b) => vec![b],
                None if s.scan.b_values.is_empty() => return Err(Failure::input("scan.b_values is empty")),
                None => s.scan.b_values.clone(),
            };
            // the scan works around the origin
            let window_field = job.field.shift_x(s.window.center);
            let table = pseudo_hopf_scan(&window_field, &b_values, job.shift, &s.cycle_config())?;
            let mut csv = Vec::new();
            write_scan_csv(&table, &mut csv).map_err(|e| Failure::input(e.to_string()))?;
            let mut out = Outcome::payload(&table);
            out.artifacts.push((format!("{stem}.csv"), csv));
            Ok(out)
        }
        Command::DeltaDump => {
            let w = s.window;
            let map = ReturnMap::new(job.shifted(), w.center, s.integrator)?
                .with_window(w.center - 1.5 * w.radius, w.center + 1.5 * w.radius);
            let lo = (job.b.abs() * (1.0 + 1e-3)).max(1e-3 * w.radius);
            let xs: Vec<f64> = geometric_grid(lo, w.radius, s.sampling.delta_points)
                .into_iter()
                .map(|d| w.center + d)
                .collect();
            let mut samples = Vec::new();
            let mut skipped = Vec::new();
            for (x, r) in xs.iter().zip(map.sample(&xs)) {
                match r {
                    Ok(v) => samples.push(v),
                    Err(e) => skipped.push(json!({ "x": x, "reason": e.to_string() })),
                }
            }
            if samples.is_empty() {
                return Err(Failure {
                    code: EXIT_NUMERICAL,
                    message: "no point of the window returns to Σ".into(),
                });
            }
            let mut csv = Vec::new();
            write_delta_csv(&samples, &mut csv).map_err(|e| Failure::input(e.to_string()))?;
            let mut out = Outcome::payload(&json!({ "samples": samples, "skipped": skipped }));
            out.artifacts.push((format!("{stem}.csv"), csv));
            Ok(out)
        }
        Command::Portrait => {
            let cfg = s.cycle_config();
            let (field, centers, radius, cycles): (PiecewiseField, Vec<f64>, f64, Vec<LimitCycle>) =
                if let Some(p) = &s.unfold {
                    let z_b = apply_shift(&job.unfolded()?, p.b, p.shift);
                    let radius = (p.epsilon * p.min_gap() / 3.0).min(s.window.radius);
                    let cycles = cycle_census(&job.field, p, &cfg).map(|r| r.cycles).unwrap_or_default();
                    (z_b, p.contact_abscissas(), radius, cycles)
                } else {
                    let z_b = job.shifted();
                    let cycles = find_cycles_local(&z_b, s.window.center, s.window.radius, job.b, &cfg)
                        .map(|r| r.cycles)
                        .unwrap_or_default();
                    (z_b, vec![s.window.center], s.window.radius, cycles)
                };
            let portrait = build_portrait(&field, &centers, radius, &cycles, s.sampling.portrait_orbits, &s.integrator);
            let mut csv = Vec::new();
            portrait.write_csv(&mut csv).map_err(|e| Failure::input(e.to_string()))?;
            let mut out = Outcome::payload(&json!({
                "x_range": portrait.x_range,
                "y_range": portrait.y_range,
                "segments": portrait.segments,
                "folds": portrait.folds,
                "cycles": cycles,
                "curves": portrait.curves.len(),
            }));
            out.artifacts.push((format!("{stem}.svg"), portrait.to_svg().into_bytes()));
            out.artifacts.push((format!("{stem}.csv"), csv));
            Ok(out)
        }
    }
}

fn timestamp() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(dir.join(name), bytes).map_err(|e| Failure::input(format!("cannot write {name}: {e}")))
}

/// Runs one command; returns the exit code. Diagnostics go to stderr.
pub fn run(args: &Args) -> i32 {
    match run_inner(args) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run_inner(args: &Args) -> Result<i32, Failure> {
    let scenario = Scenario::load(&args.config)?;
    let out_dir = args.out.clone().unwrap_or_else(|| scenario.outputs.clone());
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", out_dir.display())))?;
    if args.dump_normalized {
        write_file(&out_dir, &format!("{}.normalized.toml", scenario.name), scenario.to_toml().as_bytes())?;
    }
    let name = scenario.name.clone();
    let command = args.command.name();
    let result = Job::new(scenario, args).and_then(|job| execute(args.command, &job));
    let (status, payload, diagnostics, code) = match result {
        Ok(out) => {
            for (file, bytes) in &out.artifacts {
                write_file(&out_dir, file, bytes)?;
            }
            if out.mismatches.is_empty() {
                (Status::Ok, out.payload, Vec::new(), EXIT_OK)
            } else {
                for m in &out.mismatches {
                    eprintln!("mismatch: {m}");
                }
                (Status::Mismatch, out.payload, out.mismatches, EXIT_MISMATCH)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            (Status::Error, Value::Null, vec![f.message], f.code)
        }
    };
    let report = RunReport {
        scenario: name.clone(),
        command: command.clone(),
        timestamp: timestamp(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        payload,
        status,
        diagnostics,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_file(&out_dir, &format!("{name}.{command}.json"), json.as_bytes())?;
    Ok(code)
}

/// Parses `argv` and runs it. Usage errors exit with the input-error code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(args) => run(&args),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_OK
            }
        }
    }
}
