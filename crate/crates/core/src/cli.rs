//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::catalog::{builtin, load_instance, validate_instance, CatalogConfig, PvsInstance, BUILTIN_NAMES};
use crate::characters::identity_suite;
use crate::error::{Error, Result};
use crate::field::{FiniteField, MAX_FIELD_ORDER};
use crate::fourier::{DftMode, DftPlan};
use crate::func_eq::{
    compute_table, cross_extension_check, fit_exponents, run_field, support_scan, FieldData, FitOptions,
    TableOptions, DEFAULT_FIT_TOL, DEFAULT_RATIO_TOL,
};
use crate::grid::{GridShape, DEFAULT_GRID_CAP};
use crate::report::{RunMeta, VerificationReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN: i32 = 3;
pub const EXIT_CAP: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;
pub const EXIT_OTHER: i32 = 6;

const EXIT_CODES: &str = "\
Exit codes:
  0  every check passed
  1  a check failed (verdict fail, failed fit, no dual twist)
  2  usage error
  3  unknown instance or representation
  4  field or grid size cap exceeded
  5  instance validation failure (including characteristic mismatch)
  6  any other error (I/O, parse)

Environment:
  PHVFE_CACHE_DIR  directory for memoized Gauss-sum tables";

#[derive(Parser, Debug)]
#[command(name = "phvfe", version, about = "Verify finite-field functional equations of prehomogeneous vector spaces", after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List the built-in instances.
    Catalog(CatalogArgs),
    /// Run the duality, invariance and homogeneity checks of an instance.
    Validate(RunArgs),
    /// Compute the character-sum table and select the dual twist.
    Verify(RunArgs),
    /// Fit the Gauss-sum product representation to the table.
    Fit(RunArgs),
    /// Compare support vanishing with the fitted exceptional characters.
    Scan(RunArgs),
    /// Check that fits over F_q and F_q2 are related by the norm.
    Cross(CrossArgs),
    /// Run the Gauss-sum identity suite over one field.
    Identities(FieldArgs),
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Field order (a prime power).
    #[arg(long, conflicts_with = "p")]
    pub q: Option<u64>,
    /// Characteristic, with --e.
    #[arg(long)]
    pub p: Option<u32>,
    /// Extension degree (default 1).
    #[arg(long, requires = "p")]
    pub e: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Seed for all sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CatalogArgs {
    /// Only instances available in this characteristic.
    #[arg(long)]
    pub p: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Built-in instance name.
    #[arg(long, required_unless_present = "config", conflicts_with = "config")]
    pub instance: Option<String>,
    /// Instance description file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Representation of the component group.
    #[arg(long, default_value = "trivial")]
    pub rho: String,
    /// Largest number of extra Gauss-sum pairs the fitter may use.
    #[arg(long, default_value_t = 2)]
    pub m_max: usize,
    /// Tolerance for ratio constancy and support vanishing.
    #[arg(long, default_value_t = DEFAULT_RATIO_TOL)]
    pub tol: f64,
    /// Tolerance for the exponent fit.
    #[arg(long, default_value_t = DEFAULT_FIT_TOL)]
    pub fit_tol: f64,
    /// Validation samples per check.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// CSV path for the character-sum table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Use the direct O(q^{2n}) transform.
    #[arg(long)]
    pub naive_dft: bool,
    /// Cap on q^n.
    #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
    pub grid_cap: u64,
}

#[derive(Args, Debug, Clone)]
pub struct CrossArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Order of the larger field.
    #[arg(long)]
    pub q2: u64,
}

/// Maps an error to its documented exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::UnknownInstance(_) | Error::UnknownRho(_) => EXIT_UNKNOWN,
        Error::GridTooLarge { .. } | Error::FieldTooLarge { .. } => EXIT_CAP,
        Error::Validation(_) | Error::Characteristic { .. } => EXIT_VALIDATION,
        Error::Fit(_) | Error::AmbiguousFit(_) | Error::NoDualTwist { .. } => EXIT_FAIL,
        _ => EXIT_OTHER,
    }
}

fn field_from(args: &FieldArgs) -> Result<FiniteField> {
    match (args.q, args.p) {
        (Some(q), _) => {
            if q > MAX_FIELD_ORDER {
                return Err(Error::FieldTooLarge { q, cap: MAX_FIELD_ORDER });
            }
            FiniteField::of_order(q)
        }
        (None, Some(p)) => FiniteField::new(p, args.e.unwrap_or(1), None),
        (None, None) => Err(Error::Parse("give --q or --p".into())),
    }
}

fn meta(command: &str, instance: Option<&str>, field: Option<&FiniteField>, rho: Option<&str>, seed: u64, naive: bool) -> RunMeta {
    RunMeta {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        instance: instance.map(str::to_string),
        p: field.map(|f| f.p()),
        e: field.map(|f| f.e()),
        q: field.map(|f| f.q()),
        rho: rho.map(str::to_string),
        seed,
        dft: if naive { "naive" } else { "fast" }.into(),
    }
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os("PHVFE_CACHE_DIR").map(PathBuf::from)
}

fn instance_for(args: &RunArgs, field: &FiniteField, rng: &mut ChaCha8Rng) -> Result<PvsInstance> {
    let inst = match (&args.instance, &args.config) {
        (Some(name), _) => builtin(name, field.p())?,
        (None, Some(path)) => load_instance(&CatalogConfig::new(std::fs::read_to_string(path)?), field, rng)?,
        (None, None) => return Err(Error::Parse("give --instance or --config".into())),
    };
    GridShape::new(field.q(), inst.n, args.grid_cap)?;
    inst.rho_trace(&args.rho)?;
    Ok(inst)
}

fn write_outputs(report: &VerificationReport, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        std::fs::write(path, report.to_json()?)?;
    }
    print!("{}", report.summary());
    Ok(())
}

fn table_opts(args: &RunArgs) -> TableOptions {
    TableOptions {
        mode: if args.naive_dft { DftMode::Naive } else { DftMode::Fast },
        tol: args.tol,
        cap: args.grid_cap,
    }
}

fn fit_opts(args: &RunArgs) -> FitOptions {
    FitOptions { m_max: args.m_max, tol: args.fit_tol, support_tol: args.tol }
}

fn run_catalog(args: &CatalogArgs) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(meta("catalog", None, None, None, args.common.seed, false));
    let mut rows = Vec::new();
    println!("{:<14} {:>3} {:>3}  {:<16} {:<16} characteristic", "name", "n", "d", "rho", "epsilon");
    for name in BUILTIN_NAMES {
        let probe = args.p.unwrap_or(3);
        let Ok(inst) = builtin(name, probe) else { continue };
        let chars = match inst.characteristic {
            crate::catalog::CharacteristicConstraint::Any => "any",
            crate::catalog::CharacteristicConstraint::Odd => "odd",
        };
        println!(
            "{:<14} {:>3} {:>3}  {:<16} {:<16} {}",
            inst.name,
            inst.n,
            inst.d,
            inst.rho_names().join(","),
            inst.epsilon_candidates.join(","),
            chars
        );
        rows.push(serde_json::json!({
            "name": inst.name,
            "n": inst.n,
            "d": inst.d,
            "rho": inst.rho_names(),
            "epsilon": inst.epsilon_candidates,
            "characteristic": chars,
            "f": inst.f.to_string(),
            "f_dual": inst.f_dual.to_string(),
        }));
    }
    report.add("catalog", &rows)?;
    report.check("catalog_nonempty", !rows.is_empty(), format!("{} instances", rows.len()));
    Ok(report)
}

fn run_identities(args: &FieldArgs) -> Result<VerificationReport> {
    let field = field_from(args)?;
    let mut report = VerificationReport::new(meta("identities", None, Some(&field), None, args.common.seed, false));
    let fd = FieldData::new(field, cache_dir().as_deref())?;
    let checks = identity_suite(&fd.ctx, &fd.gauss);
    for c in &checks {
        report.check(&c.name, c.passed, format!("max residual {:e} (tol {:e})", c.max_residual, c.tolerance));
    }
    report.add("identities", &checks)?;
    Ok(report)
}

fn run_instance(cmd: &str, args: &RunArgs) -> Result<VerificationReport> {
    let field = field_from(&args.field)?;
    let seed = args.field.common.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = instance_for(args, &field, &mut rng)?;
    let mut report =
        VerificationReport::new(meta(cmd, Some(&inst.name), Some(&field), Some(&args.rho), seed, args.naive_dft));

    if cmd == "validate" {
        let v = validate_instance(&inst, &field, args.samples, &mut rng)?;
        for c in &v.checks {
            report.check(&c.name, c.passed(), format!("{} points, {} failures, witness {:?}", c.checked, c.failures, c.witness));
        }
        report.add("validation", &v)?;
        return Ok(report);
    }

    let fd = FieldData::new(field, cache_dir().as_deref())?;
    let plan = DftPlan::standard(fd.field(), &inst.pairing, args.grid_cap)?;
    let table = match compute_table(&inst, &args.rho, &fd, &plan, &table_opts(args)) {
        Ok(t) => t,
        Err(err @ Error::NoDualTwist { .. }) => {
            report.check("dual_twist", false, err.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &args.table {
        std::fs::write(path, table.to_csv())?;
    }
    report.check(
        "ratio_constant",
        table.max_ratio_residual() < args.tol,
        format!("max ratio residual {:e}, twist {}", table.max_ratio_residual(), table.twist),
    );
    report.check(
        "unique_dual_twist",
        table.unique_twist(),
        table.twist_scores.iter().map(|s| format!("{}={:e}", s.name, s.worst_residual)).collect::<Vec<_>>().join(" "),
    );
    report.add("table", &table)?;
    if cmd == "verify" {
        return Ok(report);
    }

    let fit = match fit_exponents(&table, &fd, &fit_opts(args)) {
        Ok(f) => f,
        Err(err @ (Error::Fit(_) | Error::AmbiguousFit(_))) => {
            report.check("fit", false, err.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    add_fit_checks(&mut report, &fit, args.fit_tol);
    report.add("fit", &fit)?;
    if cmd == "fit" {
        return Ok(report);
    }

    let scan = support_scan(&table, &fit, args.tol);
    report.check(
        "support_vanishing",
        scan.max_generic_residual < args.tol,
        format!("max residual off U^∨ for generic characters {:e}", scan.max_generic_residual),
    );
    report.check(
        "exceptional_sets_match",
        scan.sets_match,
        format!("support {:?}, weight {:?}", ks(&scan.support_exceptional), ks(&scan.weight_exceptional)),
    );
    report.add("scan", &scan)?;
    Ok(report)
}

fn ks(cs: &[crate::characters::MultChar]) -> Vec<u32> {
    cs.iter().map(|c| c.k).collect()
}

fn add_fit_checks(report: &mut VerificationReport, fit: &crate::func_eq::FitResult, tol: f64) {
    report.check(
        "fit_residual",
        fit.fit_residual < tol,
        format!(
            "m = {}, Λ = {:?}, M = {:?} over F_{}, residual {:e}",
            fit.m,
            ks(&fit.lambdas),
            ks(&fit.mus),
            fit.k0_q,
            fit.fit_residual
        ),
    );
    report.check("weight_law", fit.weight_residual < tol, format!("max residual {:e}", fit.weight_residual));
    report.check("zeta_unit_modulus", (fit.zeta_abs - 1.0).abs() < tol, format!("|ζ| = {}", fit.zeta_abs));
}

fn run_cross(args: &CrossArgs) -> Result<VerificationReport> {
    let run = &args.run;
    let k1 = field_from(&run.field)?;
    if args.q2 > MAX_FIELD_ORDER {
        return Err(Error::FieldTooLarge { q: args.q2, cap: MAX_FIELD_ORDER });
    }
    let k2 = FiniteField::of_order(args.q2)?;
    let seed = run.field.common.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = instance_for(run, &k1, &mut rng)?;
    inst.check_field(&k2)?;
    GridShape::new(k2.q(), inst.n, run.grid_cap)?;
    let mut report = VerificationReport::new(meta("cross", Some(&inst.name), Some(&k1), Some(&run.rho), seed, run.naive_dft));
    let fd1 = FieldData::new(k1.clone(), cache_dir().as_deref())?;
    let fd2 = FieldData::new(k2.clone(), cache_dir().as_deref())?;
    let runs = [&fd1, &fd2].map(|fd| run_field(&inst, &run.rho, fd, &table_opts(run), &fit_opts(run)));
    let [r1, r2] = runs;
    let (r1, r2) = match (r1, r2) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => match e {
            Error::Fit(_) | Error::AmbiguousFit(_) | Error::NoDualTwist { .. } => {
                report.check("cross_extension", false, e.to_string());
                return Ok(report);
            }
            other => return Err(other),
        },
    };
    let cross = cross_extension_check(&r1.fit, &k1, &r2.fit, &k2, run.fit_tol)?;
    report.check(
        "cross_extension",
        cross.passed,
        format!(
            "Λ match {}, M match {}, |ζ2 - ζ1^{}| = {:e}",
            cross.lambdas_match, cross.mus_match, cross.degree, cross.zeta_residual
        ),
    );
    report.add("cross", &cross)?;
    Ok(report)
}

fn common_of(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Catalog(a) => &a.common,
        Command::Validate(a) | Command::Verify(a) | Command::Fit(a) | Command::Scan(a) => &a.field.common,
        Command::Cross(a) => &a.run.field.common,
        Command::Identities(a) => &a.common,
    }
}

/// Parses `argv`, runs the subcommand, prints a summary and returns the exit
/// code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let common = common_of(&cli.command).clone();
    if let Some(n) = common.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Catalog(a) => run_catalog(a),
        Command::Validate(a) => run_instance("validate", a),
        Command::Verify(a) => run_instance("verify", a),
        Command::Fit(a) => run_instance("fit", a),
        Command::Scan(a) => run_instance("scan", a),
        Command::Cross(a) => run_cross(a),
        Command::Identities(a) => run_identities(a),
    };
    match result.and_then(|r| write_outputs(&r, common.out.as_deref()).map(|_| r)) {
        Ok(r) if r.passed() => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
