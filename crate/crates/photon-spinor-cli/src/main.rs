//! `photon-spinor`: identity suites, photon orbits, polarization bases, field synthesis
//! and medium checks from the command line.
//!
//! Exit codes: 0 success, 1 failed check or domain error, 2 usage/config/input error.

mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use photon_spinor::algebra::{algebra_suite, Representation};
use photon_spinor::error::Error;
use photon_spinor::field::{dirac_residual, observables, synthesize_with_dt, Grid, ModeCoefficients};
use photon_spinor::gravity::{
    circular_orbit_isotropic, circular_orbit_standard, classical_orbit, gravity_suite, helicity_split_radii,
    potential_scan, scan_csv, spin_averaged_radius, Chart, OrbitResult, SchwarzschildParams, SplitRadii,
};
use photon_spinor::grid_io::{read_binary, write_binary, write_csv};
use photon_spinor::medium::{medium_connection, medium_suite, profile_checks, MediumProfile};
use photon_spinor::polarization::{circular_basis, linear_basis, mode_spinors, polarization_suite, rotation_phase, WaveVector};
use photon_spinor::report::{checks_csv, complex_vec_json, first_failure, fmt_f64, to_json_string, Check};
use photon_spinor::symmetries::symmetry_suite;
use serde::Serialize;
use serde_json::{json, Value};

use config::{Format, RunConfig};

const THREADS_ENV: &str = "PHOTON_SPINOR_THREADS";

#[derive(Parser, Debug)]
#[command(name = "photon-spinor", version, about = "Six-component photon spinor toolkit")]
struct Cli {
    /// JSON run configuration (seed, tolerances, output_format, output_path).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an identity/property suite; exit 1 if any check fails.
    Check(CheckArgs),
    /// Circular photon orbits and spin-split radii in Schwarzschild spacetime.
    Orbit(OrbitArgs),
    /// Polarization bases and mode spinors for a wave vector.
    Modes(ModesArgs),
    /// Synthesize or inspect spinor grid fields.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Medium connection and operator identities for a profile.
    #[command(subcommand)]
    Medium(MediumCommand),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Algebra,
    Polarization,
    Symmetries,
    Medium,
    Gravity,
    All,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(value_enum)]
    suite: Suite,
    /// Override every tolerance (takes precedence over the config file).
    #[arg(long)]
    tolerance: Option<f64>,
    /// Random inputs per identity for the algebra and polarization suites.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ChartArg {
    Standard,
    Isotropic,
}

impl From<ChartArg> for Chart {
    fn from(c: ChartArg) -> Self {
        match c {
            ChartArg::Standard => Chart::Standard,
            ChartArg::Isotropic => Chart::Isotropic,
        }
    }
}

#[derive(Args, Debug)]
struct OrbitArgs {
    /// Schwarzschild radius r_s.
    #[arg(long, default_value_t = 1.0)]
    rs: f64,
    /// Angular momentum h (also the integer m of the spinor orbit when integral).
    #[arg(long, default_value_t = 2.0)]
    h: f64,
    #[arg(long, value_enum, default_value_t = ChartArg::Isotropic)]
    chart: ChartArg,
    /// Orbit radius (r or ρ in the chosen chart); defaults to the photon sphere.
    #[arg(long)]
    radius: Option<f64>,
    /// Write the split effective potentials as CSV instead of the orbit report.
    #[arg(long)]
    scan_potential: bool,
    /// Scan range in units of r_s.
    #[arg(long, default_value_t = 0.3)]
    rho_min: f64,
    #[arg(long, default_value_t = 5.0)]
    rho_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args, Debug)]
struct ModesArgs {
    /// Wave vector, e.g. `--k 0,0,1`.
    #[arg(long, value_parser = parse_list::<f64, 3>, allow_hyphen_values = true)]
    k: [f64; 3],
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RepArg {
    Chiral,
    Standard,
}

impl From<RepArg> for Representation {
    fn from(r: RepArg) -> Self {
        match r {
            RepArg::Chiral => Representation::Chiral,
            RepArg::Standard => Representation::Standard,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FieldFormat {
    Binary,
    Csv,
}

#[derive(Subcommand, Debug)]
enum FieldCommand {
    /// Build a field from a JSON mode-coefficient file; writes the field to --out
    /// and prints energy/momentum observables.
    Synth {
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long, value_parser = parse_list::<usize, 3>, default_value = "8,8,8")]
        dims: [usize; 3],
        /// Box edge lengths; defaults to 2π on every axis.
        #[arg(long, value_parser = parse_list::<f64, 3>)]
        lengths: Option<[f64; 3]>,
        #[arg(long, value_enum, default_value_t = RepArg::Chiral)]
        rep: RepArg,
        #[arg(long, default_value_t = 0.0)]
        time: f64,
        #[arg(long, value_enum, default_value_t = FieldFormat::Binary)]
        field_format: FieldFormat,
    },
    /// Observables of a binary field file.
    Observe {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum MediumCommand {
    /// Operator identities and spin-orbit terms for a profile JSON {"eps_r": .., "mu_r": ..}.
    Check {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, default_value_t = 6)]
        points: usize,
    },
    /// χ, η and the log-index gradient at a point (t,x1,x2,x3).
    Connection {
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_parser = parse_list::<f64, 4>, allow_hyphen_values = true)]
        at: [f64; 4],
    },
}

/// Comma-separated list of exactly N values, e.g. `0,0,1`.
fn parse_list<T, const N: usize>(s: &str) -> Result<[T; N], String>
where
    T: std::str::FromStr + Copy + Default,
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated values, got {}", parts.len()));
    }
    let mut out = [T::default(); N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|e| format!("'{p}': {e}"))?;
    }
    Ok(out)
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // malformed inputs are configuration errors; everything else is a domain failure
        let code = match e {
            Error::Parse(_) | Error::Io(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer, got 0"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig::load(cli.config.as_deref(), cli.seed, cli.format, cli.out).map_err(Failure::usage)?;
    match cli.command {
        Command::Check(a) => cmd_check(&cfg, a),
        Command::Orbit(a) => cmd_orbit(&cfg, a),
        Command::Modes(a) => cmd_modes(&cfg, a),
        Command::Field(c) => cmd_field(&cfg, c),
        Command::Medium(c) => cmd_medium(&cfg, c),
    }
}

fn emit(cfg: &RunConfig, text: &str) -> CliResult<()> {
    match &cfg.output_path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 1, message: format!("cannot write {}: {e}", p.display()) }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure { code: 1, message: e.to_string() })
        }
    }
}

fn json_text<T: Serialize>(v: &T) -> CliResult<String> {
    Ok(to_json_string(v)? + "\n")
}

fn report_checks(cfg: &RunConfig, label: &str, checks: &[Check]) -> CliResult<()> {
    let text = match cfg.output_format {
        Format::Csv => checks_csv(checks),
        Format::Json => json_text(&json!({
            "suite": label,
            "seed": cfg.seed,
            "passed": first_failure(checks).is_none(),
            "checks": checks,
        }))?,
    };
    emit(cfg, &text)?;
    match first_failure(checks) {
        None => Ok(()),
        Some(c) => Err(Failure {
            code: 1,
            message: format!(
                "check failed: {} deviation {} exceeds tolerance {}",
                c.name,
                fmt_f64(c.deviation),
                fmt_f64(c.tolerance)
            ),
        }),
    }
}

fn suite_checks(suite: Suite, seed: u64, samples: usize) -> CliResult<Vec<Check>> {
    let symmetry_grid = || Grid::periodic_box([2.0 * std::f64::consts::PI; 3], [12, 12, 12]);
    Ok(match suite {
        Suite::Algebra => algebra_suite(seed, samples),
        Suite::Polarization => polarization_suite(seed, samples)?,
        Suite::Symmetries => symmetry_suite(symmetry_grid()?)?,
        Suite::Medium => medium_suite(seed)?,
        Suite::Gravity => gravity_suite(seed)?,
        Suite::All => {
            let mut all = Vec::new();
            for (s, prefix) in [
                (Suite::Algebra, "algebra"),
                (Suite::Polarization, "polarization"),
                (Suite::Symmetries, "symmetries"),
                (Suite::Medium, "medium"),
                (Suite::Gravity, "gravity"),
            ] {
                for c in suite_checks(s, seed, samples)? {
                    let name = format!("{prefix}/{}", c.name);
                    all.push(c.renamed(name));
                }
            }
            all
        }
    })
}

fn cmd_check(cfg: &RunConfig, a: CheckArgs) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if let Some(t) = a.tolerance {
        if !t.is_finite() || t <= 0.0 {
            return Err(Failure::usage(format!("--tolerance must be positive and finite, got {t}")));
        }
        cfg.tolerances.clear();
        cfg.tolerances.insert("default".into(), t);
    }
    let mut checks = suite_checks(a.suite, cfg.seed, a.samples)?;
    cfg.apply_tolerances(&mut checks);
    let label = format!("{:?}", a.suite).to_lowercase();
    report_checks(&cfg, &label, &checks)
}

#[derive(Serialize)]
struct OrbitReport {
    rs: f64,
    h: f64,
    chart: Chart,
    rho_zero: f64,
    rho_zero_closed: f64,
    rho_plus: f64,
    rho_minus: f64,
    spin_averaged_radius: f64,
    spin_averaged_radius_closed: f64,
    classical: OrbitResult,
    /// Present when h is an integer (it is then the orbital quantum number m).
    #[serde(skip_serializing_if = "Option::is_none")]
    circular: Option<OrbitResult>,
    split: SplitRadii,
}

fn cmd_orbit(cfg: &RunConfig, a: OrbitArgs) -> CliResult<()> {
    let chart = Chart::from(a.chart);
    let p = SchwarzschildParams::new(a.rs, chart)?;
    if a.scan_potential {
        let rows = potential_scan(a.rs, a.h, a.rho_min * a.rs, a.rho_max * a.rs, a.points)?;
        if a.h * a.h < 4.0 {
            return Err(Error::InvalidAngularMomentum(a.h).into());
        }
        return emit(cfg, &scan_csv(&rows));
    }
    let split = helicity_split_radii(a.rs, a.h)?;
    let (spin_avg, spin_avg_closed) = spin_averaged_radius(a.rs, a.h)?;
    let classical = classical_orbit(p, a.h)?;
    let circular = if a.h.fract() == 0.0 && a.h.abs() < i64::MAX as f64 {
        let m = a.h as i64;
        Some(match chart {
            Chart::Standard => circular_orbit_standard(p, m, a.radius)?,
            Chart::Isotropic => circular_orbit_isotropic(p, m, a.radius)?,
        })
    } else {
        None
    };
    let report = OrbitReport {
        rs: a.rs,
        h: a.h,
        chart,
        rho_zero: split.rho_zero,
        rho_zero_closed: split.rho_zero_closed,
        rho_plus: split.rho_plus,
        rho_minus: split.rho_minus,
        spin_averaged_radius: spin_avg.root,
        spin_averaged_radius_closed: spin_avg_closed,
        classical,
        circular,
        split,
    };
    let text = match cfg.output_format {
        Format::Json => json_text(&report)?,
        Format::Csv => {
            let mut rows = vec![
                ("rho_zero", report.rho_zero),
                ("rho_plus", report.rho_plus),
                ("rho_minus", report.rho_minus),
                ("spin_averaged_radius", report.spin_averaged_radius),
                ("classical_radius", report.classical.radius),
                ("classical_omega_sq", report.classical.omega_sq_plus),
            ];
            if let Some(c) = &report.circular {
                rows.extend([("radius", c.radius), ("omega_sq_plus", c.omega_sq_plus), ("omega_sq_minus", c.omega_sq_minus)]);
            }
            let mut s = String::from("quantity,value\n");
            for (k, v) in rows {
                s.push_str(&format!("{k},{}\n", fmt_f64(v)));
            }
            s
        }
    };
    emit(cfg, &text)
}

fn cvec(v: &[Complex64]) -> CliResult<Value> {
    Ok(complex_vec_json(v)?)
}

fn cmd_modes(cfg: &RunConfig, a: ModesArgs) -> CliResult<()> {
    let k = WaveVector::new(a.k);
    let lin = linear_basis(&k)?;
    let circ = circular_basis(&k)?;
    let spinors = mode_spinors(&k)?;
    let spinor_json = |rep: Representation| -> CliResult<Value> {
        spinors.get(rep).iter().map(|s| cvec(s.as_slice())).collect::<CliResult<Vec<_>>>().map(Value::Array)
    };
    let phase = rotation_phase(&k);
    let text = match cfg.output_format {
        Format::Json => json_text(&json!({
            "k": k.k,
            "omega": k.omega,
            "axis_degenerate": k.axis_degenerate,
            "linear": lin,
            "e0": lin[2],
            "e_plus": cvec(&circ.e_plus)?,
            "e_minus": cvec(&circ.e_minus)?,
            "rotation_phase": cvec(&[phase])?,
            "mode_spinors": {
                "chiral": spinor_json(Representation::Chiral)?,
                "standard": spinor_json(Representation::Standard)?,
            },
        }))?,
        Format::Csv => {
            let mut s = String::from("vector,component,re,im\n");
            for (i, e) in lin.iter().enumerate() {
                for (c, x) in e.iter().enumerate() {
                    s.push_str(&format!("eps{},{c},{},0\n", i + 1, fmt_f64(*x)));
                }
            }
            for (name, v) in [("e_plus", circ.e_plus), ("e_minus", circ.e_minus), ("e0", circ.e_zero)] {
                for (c, z) in v.iter().enumerate() {
                    s.push_str(&format!("{name},{c},{},{}\n", fmt_f64(z.re), fmt_f64(z.im)));
                }
            }
            s
        }
    };
    emit(cfg, &text)
}

fn observables_json(field: &photon_spinor::field::SpinorGridField) -> Value {
    let o = observables(field);
    json!({
        "nodes": field.values.len(),
        "representation": field.rep.name(),
        "time": field.time,
        "j0": o.j0,
        "j": o.j,
        "j_ang": o.j_ang,
    })
}

fn cmd_field(cfg: &RunConfig, c: FieldCommand) -> CliResult<()> {
    match c {
        FieldCommand::Synth { coeffs, dims, lengths, rep, time, field_format } => {
            let Some(out) = &cfg.output_path else {
                return Err(Failure::usage("field synth needs --out for the field file"));
            };
            let src = std::fs::read_to_string(&coeffs).map_err(|e| Failure::usage(format!("cannot read {}: {e}", coeffs.display())))?;
            let coeffs: ModeCoefficients =
                serde_json::from_str(&src).map_err(|e| Failure::usage(format!("malformed coefficient file {}: {e}", coeffs.display())))?;
            let grid = Grid::periodic_box(lengths.unwrap_or([2.0 * std::f64::consts::PI; 3]), dims)?;
            let (psi, dt) = synthesize_with_dt(&coeffs, rep.into(), grid, time)?;
            let file = std::fs::File::create(out).map_err(|e| Failure { code: 1, message: format!("cannot write {}: {e}", out.display()) })?;
            let w = std::io::BufWriter::new(file);
            match field_format {
                FieldFormat::Binary => write_binary(&psi, w)?,
                FieldFormat::Csv => write_csv(&psi, w)?,
            }
            let mut report = observables_json(&psi);
            report["dirac_residual"] = json!(dirac_residual(&psi, &dt)?);
            report["mode_energy"] = json!(coeffs.energy_momentum(grid.volume()).0);
            println!("{}", to_json_string(&report)?);
            Ok(())
        }
        FieldCommand::Observe { input } => {
            let f = std::fs::File::open(&input).map_err(|e| Failure::usage(format!("cannot read {}: {e}", input.display())))?;
            let field = read_binary(std::io::BufReader::new(f))?;
            emit(cfg, &json_text(&observables_json(&field))?)
        }
    }
}

fn load_profile(path: &PathBuf) -> CliResult<MediumProfile> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    Ok(MediumProfile::from_json(&src)?)
}

fn cmd_medium(cfg: &RunConfig, c: MediumCommand) -> CliResult<()> {
    match c {
        MediumCommand::Check { profile, points } => {
            let p = load_profile(&profile)?;
            let mut checks = profile_checks(&p, cfg.seed, points)?;
            cfg.apply_tolerances(&mut checks);
            report_checks(cfg, "medium", &checks)
        }
        MediumCommand::Connection { profile, at } => {
            let p = load_profile(&profile)?;
            let c = medium_connection(&p, at)?;
            emit(cfg, &json_text(&c)?)
        }
    }
}
