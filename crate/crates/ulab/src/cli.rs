//! Command-line interface.  Exit codes: 0 = all checks passed, 1 = at
//! least one verification failed, 2 = usage or configuration error.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, ProgressionSpec, SetSpec};
use crate::experiments::{
    probe_spec, run_bounds_search, run_control_sanity, run_degree_lowering_probe,
    run_tcount_decay, MAX_PET_STEPS,
};
use crate::report::{timed_record, Environment, Report, ReportBundle};
use crate::suites::{identity_suite, inequality_suite};
use ulab_core::counting::{counting_operator, progression_count, structured_count, tcount_gap};
use ulab_core::norms::{box_norm, gowers_norm, DirectionSpec};
use ulab_core::pet::{extract_directions, pet_coefficient_audit, pet_run};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ulab",
    version,
    about = "Box-norm and polynomial-progression verification harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
    /// Write the JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Base seed for all randomized instances.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated prime list overriding the default {3, 5, 7}.
    #[arg(long, global = true, value_delimiter = ',', value_name = "P,..")]
    pub primes: Option<Vec<u64>>,
    /// Override the work-estimate cap (ULAB_COST_CAP).
    #[arg(long = "cost-cap", global = true, value_name = "N")]
    pub cost_cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Compute box/degree-s norms described by a config file.
    Norm {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Symbolic reduction tools.
    Pet {
        #[command(subcommand)]
        sub: PetCmd,
    },
    /// Progression averages: full, structured, and their gap.
    Count {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Count progression instances inside an explicit or seeded set.
    Search {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "PATH")]
        set: PathBuf,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: SuiteName,
    },
}

#[derive(Debug, Subcommand)]
pub enum PetCmd {
    /// Print the reduction trace, directions, audit, and extracted
    /// directions for a progression (default: the reference example).
    Derive {
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Identity,
    Inequality,
    Tcount,
    Control,
    Bounds,
    Probe,
    All,
}

/// Parse `argv` and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(cap) = cli.cost_cap {
        std::env::set_var("ULAB_COST_CAP", cap.to_string());
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn effective_primes(cli: &Cli, config: Option<&ProgressionSpec>) -> Vec<u64> {
    if let Some(ps) = &cli.primes {
        if !ps.is_empty() {
            return ps.clone();
        }
    }
    match config {
        Some(spec) => spec.primes.clone(),
        None => crate::config::default_primes(),
    }
}

fn write_json(path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, text)
            .with_context(|| format!("writing report {}", path.display()))?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.cmd {
        Cmd::Norm { config } => cmd_norm(cli, config),
        Cmd::Pet { sub: PetCmd::Derive { config } } => cmd_pet_derive(cli, config.as_deref()),
        Cmd::Count { config } => cmd_count(cli, config),
        Cmd::Search { config, set } => cmd_search(cli, config, set),
        Cmd::Verify { suite } => cmd_verify(cli, *suite),
    }
}

fn cmd_norm(cli: &Cli, path: &Path) -> Result<i32> {
    let config = ExperimentConfig::from_path(path)?;
    let norm_spec = config
        .norm
        .as_ref()
        .ok_or_else(|| anyhow!("config schema error: missing \"norm\" section"))?;
    if config.functions.is_empty() {
        bail!("config schema error: norm needs at least one function recipe");
    }
    let primes = effective_primes(cli, Some(&config.progression));
    let mut records = Vec::new();
    for &p in &primes {
        let record = timed_record(p, |q, _fails| {
            let cfg = config.progression.field(p)?;
            let f = config.functions[0].build(&cfg, 0)?;
            if !norm_spec.directions.is_empty() {
                let dirs = norm_spec
                    .directions
                    .iter()
                    .map(|row| {
                        Ok(ulab_core::field::Subgroup::cyclic(
                            &cfg,
                            &cfg.reduce_int_vec(row)?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let value = box_norm(&f, &DirectionSpec::new(dirs)?)?;
                println!("p={p} box_norm = {value:.12}");
                q.insert("box_norm".into(), value);
            }
            if let Some(gowers) = &norm_spec.gowers {
                let v = cfg.reduce_int_vec(&gowers.direction)?;
                let value = gowers_norm(&f, &v, gowers.s)?;
                println!("p={p} gowers_norm(s={}) = {value:.12}", gowers.s);
                q.insert("gowers_norm".into(), value);
            }
            Ok(())
        })?;
        records.push(record);
    }
    let report = Report::new("norm", Environment::current(cli.seed, &primes), records);
    write_json(cli.json.as_deref(), &report.to_json()?)?;
    Ok(EXIT_PASS)
}

fn cmd_pet_derive(cli: &Cli, path: Option<&Path>) -> Result<i32> {
    let spec = match path {
        Some(p) => ExperimentConfig::from_path(p)?.progression,
        None => ProgressionSpec::reference(),
    };
    let sym = spec.symbolic()?;
    let run = pet_run(&sym.initial_family()?, MAX_PET_STEPS)?;
    println!("pivot trace: {:?}", run.m_trace);
    println!("shift variables s' = {}", run.s_prime);
    println!("direction count s = {}", run.s);
    println!("final family:");
    println!("{}", run.final_family.pretty());
    println!("directions:");
    for (i, d) in run.directions.iter().enumerate() {
        println!("  d{} = {}", i + 1, d.pretty());
    }
    let audit = pet_coefficient_audit(&run, &sym)?;
    println!("coefficient audit: {}", if audit { "pass" } else { "FAIL" });
    let primes = effective_primes(cli, Some(&spec));
    let cfg = spec.field(primes[0])?;
    let extracted = extract_directions(&cfg, &sym, MAX_PET_STEPS)?;
    println!(
        "extracted directions (p={}): {:?} multiplicity {}",
        primes[0], extracted.int_vectors, extracted.multiplicity
    );
    if let Some(json) = cli.json.as_deref() {
        let record = timed_record(primes[0], |q, fails| {
            q.insert("s".into(), run.s as f64);
            q.insert("s_prime".into(), run.s_prime as f64);
            q.insert("multiplicity".into(), extracted.multiplicity as f64);
            if !audit {
                fails.push("coefficient audit failed".into());
            }
            Ok(())
        })?;
        let report = Report::new(
            "pet_derive",
            Environment::current(cli.seed, &primes),
            vec![record],
        );
        write_json(Some(json), &report.to_json()?)?;
    }
    Ok(if audit { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

fn cmd_count(cli: &Cli, path: &Path) -> Result<i32> {
    let config = ExperimentConfig::from_path(path)?;
    if config.functions.is_empty() {
        bail!("config schema error: count needs one recipe per slot");
    }
    let primes = effective_primes(cli, Some(&config.progression));
    let mut records = Vec::new();
    for &p in &primes {
        let record = timed_record(p, |q, _fails| {
            let pc = config.progression.build(p)?;
            let cfg = config.progression.field(p)?;
            let fs = config.build_functions(&cfg, cli.seed)?;
            let lambda = counting_operator(&pc, &fs)?;
            q.insert("lambda_re".into(), lambda.re);
            q.insert("lambda_im".into(), lambda.im);
            q.insert("lambda_abs".into(), lambda.norm());
            match tcount_gap(&pc, &fs) {
                Ok(rep) => {
                    println!(
                        "p={p} lambda = {:+.9}{:+.9}i structured = {:+.9}{:+.9}i gap = {:.9}",
                        rep.lambda.re,
                        rep.lambda.im,
                        rep.structured.re,
                        rep.structured.im,
                        rep.gap
                    );
                    q.insert("structured_abs".into(), rep.structured.norm());
                    q.insert("gap".into(), rep.gap);
                }
                Err(_) => {
                    let structured = structured_count(&pc, &fs)?;
                    println!(
                        "p={p} lambda = {:+.9}{:+.9}i structured = {:+.9}{:+.9}i",
                        lambda.re, lambda.im, structured.re, structured.im
                    );
                    q.insert("structured_abs".into(), structured.norm());
                }
            }
            Ok(())
        })?;
        records.push(record);
    }
    let report = Report::new("count", Environment::current(cli.seed, &primes), records);
    write_json(cli.json.as_deref(), &report.to_json()?)?;
    Ok(EXIT_PASS)
}

fn cmd_search(cli: &Cli, config_path: &Path, set_path: &Path) -> Result<i32> {
    let config = ExperimentConfig::from_path(config_path)?;
    let set_text = std::fs::read_to_string(set_path)
        .with_context(|| format!("reading set {}", set_path.display()))?;
    let set_spec = SetSpec::from_json(&set_text)?;
    let primes = effective_primes(cli, Some(&config.progression));
    let mut records = Vec::new();
    for &p in &primes {
        let record = timed_record(p, |q, _fails| {
            let pc = config.progression.build(p)?;
            let cfg = config.progression.field(p)?;
            let set = set_spec.indices(&cfg)?;
            let count = progression_count(&pc, &set)?;
            println!("p={p} set size {} instances {count}", set.len());
            let mut member = vec![false; cfg.order()];
            for &i in &set {
                member[i] = true;
            }
            let mut shown = 0;
            'outer: for n in 1..cfg.p() {
                for x in 0..cfg.order() {
                    if member[x]
                        && (1..=pc.len()).all(|j| member[cfg.add_index(x, pc.shift_index(j, n))])
                    {
                        println!("  x = {:?}, n = {n}", cfg.point_of(x).coords());
                        shown += 1;
                        if shown >= 10 {
                            break 'outer;
                        }
                    }
                }
            }
            q.insert("set_size".into(), set.len() as f64);
            q.insert("instances".into(), count as f64);
            Ok(())
        })?;
        records.push(record);
    }
    let report = Report::new("search", Environment::current(cli.seed, &primes), records);
    write_json(cli.json.as_deref(), &report.to_json()?)?;
    Ok(EXIT_PASS)
}

/// Default instance counts for the verification suites.
pub const IDENTITY_INSTANCES: usize = 18;
pub const INEQUALITY_INSTANCES: usize = 10;
pub const TCOUNT_RECIPES: usize = 20;
pub const CONTROL_TRIALS: usize = 6;
pub const BOUNDS_SAMPLES: usize = 20;
pub const PROBE_TRIALS: usize = 4;

fn run_suite(name: SuiteName, primes: &[u64], seed: u64) -> Result<Report> {
    match name {
        SuiteName::Identity => identity_suite(primes, seed, IDENTITY_INSTANCES),
        SuiteName::Inequality => inequality_suite(primes, seed, INEQUALITY_INSTANCES),
        SuiteName::Tcount => run_tcount_decay(
            &ProgressionSpec::reference(),
            None,
            primes,
            seed,
            TCOUNT_RECIPES,
            1,
        ),
        SuiteName::Control => {
            run_control_sanity(&ProgressionSpec::reference(), primes, seed, CONTROL_TRIALS)
        }
        SuiteName::Bounds => run_bounds_search(
            &ProgressionSpec::reference(),
            primes,
            seed,
            &[0.2, 0.4, 0.6, 0.8, 1.0],
            BOUNDS_SAMPLES,
            false,
        ),
        SuiteName::Probe => run_degree_lowering_probe(&probe_spec(), primes, seed, PROBE_TRIALS),
        SuiteName::All => unreachable!("expanded by cmd_verify"),
    }
}

fn cmd_verify(cli: &Cli, suite: SuiteName) -> Result<i32> {
    let primes = effective_primes(cli, None);
    let suites: Vec<SuiteName> = match suite {
        SuiteName::All => vec![
            SuiteName::Identity,
            SuiteName::Inequality,
            SuiteName::Tcount,
            SuiteName::Control,
            SuiteName::Bounds,
            SuiteName::Probe,
        ],
        one => vec![one],
    };
    let mut reports = Vec::new();
    for s in &suites {
        let report = run_suite(*s, &primes, cli.seed)?;
        println!(
            "{}: {}",
            report.experiment,
            if report.pass { "PASS" } else { "FAIL" }
        );
        for rec in &report.records {
            for failure in &rec.failures {
                println!("  p={} {}", rec.prime, failure);
            }
        }
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    let json = if reports.len() == 1 {
        reports[0].to_json()?
    } else {
        ReportBundle::new(reports).to_json()?
    };
    write_json(cli.json.as_deref(), &json)?;
    Ok(if pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_map_pass_fail_and_usage() {
        assert_eq!(EXIT_PASS, 0);
        assert_eq!(EXIT_CHECK_FAILED, 1);
        assert_eq!(EXIT_USAGE, 2);
        // unknown subcommand is a usage error
        assert_eq!(run(["ulab", "frobnicate"]), EXIT_USAGE);
        // missing required option is a usage error
        assert_eq!(run(["ulab", "norm"]), EXIT_USAGE);
        // help is not an error
        assert_eq!(run(["ulab", "--help"]), EXIT_PASS);
    }

    #[test]
    fn primes_flag_overrides_config() {
        let cli = Cli::try_parse_from(["ulab", "--primes", "5,7", "verify", "identity"]).unwrap();
        assert_eq!(effective_primes(&cli, None), vec![5, 7]);
        let cli = Cli::try_parse_from(["ulab", "verify", "identity"]).unwrap();
        assert_eq!(effective_primes(&cli, None), vec![3, 5, 7]);
    }

    #[test]
    fn verify_identity_passes_and_writes_a_report() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.json");
        let code = run([
            "ulab",
            "verify",
            "identity",
            "--primes",
            "3",
            "--seed",
            "4",
            "--json",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_PASS);
        let text = std::fs::read_to_string(&path).unwrap();
        let report: Report = serde_json::from_str(&text).unwrap();
        assert!(report.pass);
        assert_eq!(report.experiment, "identity_suite");
    }

    #[test]
    fn malformed_config_is_a_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{ not json").unwrap();
        let code = run(["ulab", "count", "--config", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_USAGE);
    }
}
