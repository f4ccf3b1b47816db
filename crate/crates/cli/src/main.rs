use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use shnol_cli::config::{builtin_text, parse_config, parse_config_str, ConfigError, ScenarioConfig};
use shnol_cli::report::{emit, run, RunOptions};
use shnol_core::builtin::NAMES;
use shnol_core::operator::{discretize, eigenvalues_tridiagonal};
use shnol_core::shnol::{run_pipeline, scenario_criticality};

#[derive(Parser)]
#[command(name = "shnol", version, about = "Shnol-type spectral certificates for weighted 1D operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline and write CSV, SVG and provenance files.
    Run {
        /// Config file, directory of configs, or built-in name.
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rerun on the halved mesh and append relative-change columns.
        #[arg(long)]
        mesh_halve: bool,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<f64>,
    },
    /// Lowest eigenvalues of the truncated oracle discretization.
    Spectrum {
        config: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        truncation: f64,
    },
    /// Annulus capacities cap(r, R) and the resulting classification.
    Criticality {
        config: String,
        #[arg(long)]
        r: f64,
        #[arg(long = "R-list", value_delimiter = ',', required = true)]
        r_list: Vec<f64>,
    },
    /// List the built-in scenarios.
    Examples,
    /// Admissibility and invariant checks only.
    Check { config: String },
}

/// Configs named by `arg`: a file, every `*.conf` in a directory, or a built-in.
fn load(arg: &str) -> std::result::Result<Vec<ScenarioConfig>, ConfigError> {
    let path = Path::new(arg);
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|source| ConfigError::Io { path: path.into(), source })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "conf"))
            .collect();
        files.sort();
        return files.iter().map(|f| parse_config(f)).collect();
    }
    if !path.exists() {
        if let Some(text) = builtin_text(arg) {
            let cfg = parse_config_str(text).map_err(|errors| ConfigError::Invalid { path: path.into(), errors })?;
            return Ok(vec![cfg]);
        }
    }
    parse_config(path).map(|c| vec![c])
}

fn load_one(arg: &str) -> Result<ScenarioConfig> {
    let mut cfgs = load(arg)?;
    if cfgs.len() != 1 {
        bail!("{arg} names {} configs; this command takes exactly one", cfgs.len());
    }
    Ok(cfgs.remove(0))
}

fn out_dir(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| std::env::var_os("SHNOL_OUT").map(PathBuf::from))
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("shnol-out"))
}

fn run_one(cfg: &ScenarioConfig, dir: &Path, opts: RunOptions) -> Result<(bool, String)> {
    let bundle = run(cfg, opts).with_context(|| format!("scenario {}", cfg.name))?;
    let written = emit(&bundle, dir).with_context(|| format!("writing to {}", dir.display()))?;
    let mut text = String::new();
    for r in &bundle.reports {
        text.push_str(&r.to_string());
        text.push_str(if r.certified() { "  certified: yes\n" } else { "  certified: no\n" });
    }
    for p in written {
        text.push_str(&format!("wrote {}\n", p.display()));
    }
    Ok((bundle.certified(), text))
}

fn cmd_run(config: &str, out: Option<PathBuf>, mesh_halve: bool, lambda: Option<f64>) -> Result<ExitCode> {
    let cfgs = load(config)?;
    let opts = RunOptions { lambda, mesh_halve };
    let nested = Path::new(config).is_dir();
    // Each scenario owns its output directory; nothing else is shared.
    let results: Vec<Result<(bool, String)>> = std::thread::scope(|s| {
        let handles: Vec<_> = cfgs
            .iter()
            .map(|cfg| {
                let base = out_dir(out.clone(), cfg);
                let dir = if nested { base.join(&cfg.name) } else { base };
                s.spawn(move || run_one(cfg, &dir, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    });
    let mut ok = true;
    for r in results {
        match r {
            Ok((certified, text)) => {
                print!("{text}");
                ok &= certified;
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ok = false;
            }
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_spectrum(config: &str, k: usize, truncation: f64) -> Result<ExitCode> {
    let cfg = load_one(config)?;
    let Some(spec) = cfg.oracle_truncated(truncation)? else {
        bail!("{} has no oracle section", cfg.name);
    };
    let est = eigenvalues_tridiagonal(&discretize(&spec)?, k)?;
    println!("{}: {} lowest eigenvalues, X = {}, mesh {:.3e}, {} right end", cfg.name, k, est.truncation, est.mesh, est.boundary);
    for (j, ev) in est.eigenvalues.iter().enumerate() {
        println!("{j:>4} {ev:.11e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_criticality(config: &str, r: f64, r_list: &[f64]) -> Result<ExitCode> {
    let cfg = load_one(config)?;
    let sc = cfg.to_scenario(cfg.lambdas[0])?;
    let rep = scenario_criticality(&sc, r, r_list)?;
    println!("{}: capacities of the annuli between {r} and R", cfg.name);
    for (big_r, c) in &rep.capacities {
        println!("  R = {big_r}: cap = {c:.11e}");
    }
    println!("monotone: {}", rep.monotone);
    println!("verdict: {}", rep.verdict);
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(config: &str) -> Result<ExitCode> {
    let cfg = load_one(config)?;
    let mut ok = true;
    for &lambda in &cfg.lambdas {
        let rep = run_pipeline(&cfg.to_scenario(lambda)?)?;
        let adm = &rep.admissibility;
        println!("{} at lambda = {lambda}", cfg.name);
        if adm.structure_holds() {
            println!("  cut-off structure: exact");
        } else {
            for (n, what) in &adm.structural_failures {
                println!("  cut-off structure: n = {n} violates {what}");
            }
        }
        println!("  weak Hardy constants max/min: {:.4} ({})", adm.hardy_ratio, if adm.passes { "PASS" } else { "FAIL" });
        if let Some(note) = &adm.hardy_note {
            println!("  note: {note}");
        }
        println!("  integration-by-parts defect: {:.3e}", rep.max_identity_defect);
        println!("  reference harmonic defect: {:.3e}", rep.harmonic_defect);
        println!(
            "  Caccioppoli sup: pointwise {:.4e} ({}), L2 {:.4e} ({})",
            rep.caccioppoli_pointwise.sup,
            if rep.caccioppoli_pointwise.bounded { "bounded" } else { "unbounded" },
            rep.caccioppoli_l2.sup,
            if rep.caccioppoli_l2.bounded { "bounded" } else { "unbounded" }
        );
        println!("  |u| <= C h with C = {:.6e}", rep.bp_constant);
        ok &= adm.passes;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, mesh_halve, lambda } => cmd_run(&config, out, mesh_halve, lambda),
        Command::Spectrum { config, k, truncation } => cmd_spectrum(&config, k, truncation),
        Command::Criticality { config, r, r_list } => cmd_criticality(&config, r, &r_list),
        Command::Examples => {
            for name in NAMES {
                println!("{name}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { config } => cmd_check(&config),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
