mod config;
mod presets;
mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use dampwave_core::analysis::{fit_decay, lemma3_check};
use dampwave_core::damping::{
    certify_integrally_positive, classify_structure, criterion_11, DEFAULT_EPSILONS,
    DEFAULT_SCAN_STEP, DEFAULT_TOLERANCE,
};
use dampwave_core::equilibria::{probe_lojasiewicz, solve_equilibrium};
use dampwave_core::io::{read_trajectory_csv, write_field_csv, write_json, SCHEMA_VERSION};
use dampwave_core::{Error, Result};
use serde::Serialize;

use config::{parse_config, parse_damping, ConfigKind, LabConfig};
use scenario::{EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK};

#[derive(Parser)]
#[command(name = "dampwave", version, about = "Damped nonlinear wave equation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write trajectory/summary outputs.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Certify integral positivity of a damping profile, classify its
    /// structure, and evaluate the divergence criterion.
    Certify {
        /// Profile spec, e.g. constant:1, power_law:1,2, onoff:1,1, abs_sin.
        #[arg(long)]
        damping: String,
        #[arg(long, default_value_t = 200.0)]
        horizon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for an equilibrium of -laplacian(u) = f(u) from the configured
    /// initial profile as a guess.
    Equilibrium {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the Lojasiewicz exponent near the equilibrium by randomized
    /// low-mode perturbations.
    ProbeTheta {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit exponential vs polynomial decay to a trajectory CSV column.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// One of: v_l2, residual, e, E, H, grad_v, u_linf, kinetic.
        #[arg(long, default_value = "v_l2")]
        column: String,
        #[arg(long, default_value_t = 0.2)]
        t_min_fraction: f64,
        /// With --c, additionally check v' <= -C v^alpha and its closed-form
        /// decay bound on the series.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset end to end (simulate, equilibrium, probe, report),
    /// or list the available presets.
    Scenario {
        name: Option<String>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long)]
        list: bool,
    },
    /// Run several presets concurrently, each in its own subdirectory.
    Sweep {
        /// Preset names; defaults to all of them.
        names: Vec<String>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidExtent(_)
        | Error::UnsupportedBcDimension(_)
        | Error::UnknownNonlinearity(_)
        | Error::EmptyEpsilonList
        | Error::Malformed(_)
        | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_NUMERIC,
    }
}

fn load_config(path: &Path) -> Result<LabConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

fn mesh_config(lab: &LabConfig) -> Result<&dampwave_core::dynamics::SimConfig> {
    match &lab.kind {
        ConfigKind::Mesh(sim) => Ok(sim),
        ConfigKind::Galerkin(_) => Err(Error::InvalidConfig(
            "this command needs a mesh configuration, not [galerkin]".into(),
        )),
    }
}

/// Run one preset into `dir`; returns the process exit code.
pub(crate) fn run_scenario_named(name: &str, dir: &Path) -> i32 {
    let Some(text) = presets::get(name) else {
        eprintln!("unknown scenario {name:?}; try --list");
        return EXIT_CONFIG;
    };
    let lab = match parse_config(text) {
        Ok(lab) => lab,
        Err(e) => {
            eprintln!("scenario {name}: {e}");
            return exit_code(&e);
        }
    };
    match scenario::run_pipeline(&lab, dir, Some(name)) {
        Ok(outcome) => {
            if let Some(report) = &outcome.report {
                print!("{}", scenario::render_report(report));
            }
            println!("scenario {name}: outputs in {}", dir.display());
            outcome.exit
        }
        Err(e) => {
            eprintln!("scenario {name}: {e}");
            exit_code(&e)
        }
    }
}

fn cmd_certify(spec: &str, horizon: f64, out: Option<&Path>) -> Result<i32> {
    let profile = parse_damping(spec)?;
    let cert = certify_integrally_positive(
        &profile,
        &DEFAULT_EPSILONS,
        horizon,
        DEFAULT_SCAN_STEP,
        DEFAULT_TOLERANCE,
    )?;
    let structure = classify_structure(&profile);
    let crit = criterion_11(&profile, horizon.max(1000.0), DEFAULT_SCAN_STEP)?;

    println!("profile             : {}", profile.label());
    println!("certificate         : {:?}", cert.verdict);
    println!("window infimum      : {} at window start t = {}", cert.achieved, cert.witness.0);
    for scan in &cert.per_epsilon {
        println!(
            "  epsilon = {:<4} infimum = {} (worst window at t = {})",
            scan.epsilon, scan.infimum, scan.witness_t
        );
    }
    if let Some(note) = &cert.analytic_note {
        println!("note                : {note}");
    }
    println!("structure           : {}", structure.name());
    println!("criterion (11)      : {:?}", crit.verdict);
    println!(
        "  outer log-log slope = {}, integrand slope = {}",
        crit.outer_slope, crit.integrand_slope
    );

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        #[derive(Serialize)]
        struct CertifyOutput<'a> {
            schema_version: u32,
            profile: String,
            certificate: &'a dampwave_core::damping::CertificateReport,
            structure: dampwave_core::damping::StructureClass,
            criterion_11: &'a dampwave_core::damping::Criterion11Report,
        }
        write_json(
            &dir.join("certificate.json"),
            &CertifyOutput {
                schema_version: SCHEMA_VERSION,
                profile: profile.label(),
                certificate: &cert,
                structure,
                criterion_11: &crit,
            },
        )?;
    }
    Ok(EXIT_OK)
}

fn cmd_equilibrium(lab: &LabConfig, out: &Path) -> Result<i32> {
    let sim = mesh_config(lab)?;
    fs::create_dir_all(out)?;
    let eq = solve_equilibrium(&sim.mesh, &sim.nonlinearity, &sim.u0, lab.analysis.equilibrium_tol)?;
    write_field_csv(&out.join("equilibrium.csv"), &eq.phi, &sim.mesh)?;
    #[derive(Serialize)]
    struct EqOut {
        schema_version: u32,
        residual: f64,
        boundary_residual: f64,
        iterations: usize,
        stalled: bool,
        sup_norm: f64,
    }
    write_json(
        &out.join("equilibrium.json"),
        &EqOut {
            schema_version: SCHEMA_VERSION,
            residual: eq.residual,
            boundary_residual: eq.boundary_residual,
            iterations: eq.iterations,
            stalled: eq.stalled,
            sup_norm: eq.phi.sup_norm(),
        },
    )?;
    println!(
        "equilibrium: residual = {}, boundary residual = {}, {} iterations{}",
        eq.residual,
        eq.boundary_residual,
        eq.iterations,
        if eq.stalled { " (stalled)" } else { "" }
    );
    Ok(EXIT_OK)
}

fn cmd_probe(lab: &LabConfig, out: &Path) -> Result<i32> {
    let sim = mesh_config(lab)?;
    fs::create_dir_all(out)?;
    let a = &lab.analysis;
    let eq = solve_equilibrium(&sim.mesh, &sim.nonlinearity, &sim.u0, a.equilibrium_tol)?;
    let est = probe_lojasiewicz(
        &eq,
        &sim.nonlinearity,
        &sim.mesh,
        &a.radii,
        a.samples_per_radius,
        a.seed,
    )?;
    write_json(&out.join("probe.json"), &est)?;
    println!(
        "theta = {} (slope {}, R^2 = {}, {} samples per radius, seed {}{})",
        est.theta_hat,
        est.slope,
        est.r_squared,
        est.samples_per_radius,
        est.seed,
        if est.clamped { ", clamped" } else { "" }
    );
    Ok(EXIT_OK)
}

fn cmd_fit(
    input: &Path,
    column: &str,
    t_min_fraction: f64,
    alpha: Option<f64>,
    c: Option<f64>,
    out: Option<&Path>,
) -> Result<i32> {
    let rows = read_trajectory_csv(input)?;
    let pick = |e: &dampwave_core::dynamics::EnergyReport| -> Result<f64> {
        Ok(match column {
            "v_l2" => e.v_l2,
            "residual" => e.residual,
            "e" => e.reduced,
            "E" => e.total,
            "H" => e.lyapunov,
            "grad_v" => e.grad_v,
            "u_linf" => e.u_linf,
            "kinetic" => e.kinetic,
            other => return Err(Error::InvalidConfig(format!("unknown column {other:?}"))),
        })
    };
    let mut series = Vec::with_capacity(rows.len());
    for e in &rows {
        series.push((e.t, pick(e)?));
    }
    let positive: Vec<(f64, f64)> = series.iter().cloned().filter(|&(_, y)| y > 0.0).collect();
    let fit = fit_decay(&positive, t_min_fraction)?;
    println!("column {column}: {:?}", fit.class);
    println!(
        "  window [{}, {}], rms {}, model gap {}, {} samples{}",
        fit.window.0,
        fit.window.1,
        fit.rms_residual,
        fit.score_gap,
        fit.samples_used,
        if fit.oscillatory { ", envelope of oscillatory series" } else { "" }
    );

    let bound = match (alpha, c) {
        (Some(alpha), Some(c)) => {
            let check = lemma3_check(&series, alpha, c)?;
            println!(
                "ode bound alpha = {alpha}, C = {c}: max slack {}, {} slack violations, {} bound violations",
                check.max_slack, check.slack_violations, check.bound_violations
            );
            Some(check)
        }
        (None, None) => None,
        _ => {
            return Err(Error::InvalidConfig("--alpha and --c must be given together".into()))
        }
    };

    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        #[derive(Serialize)]
        struct FitOutput<'a> {
            schema_version: u32,
            column: &'a str,
            fit: &'a dampwave_core::analysis::DecayFit,
            ode_bound: Option<&'a dampwave_core::analysis::OdeBoundCheck>,
        }
        write_json(
            &dir.join("fit.json"),
            &FitOutput {
                schema_version: SCHEMA_VERSION,
                column,
                fit: &fit,
                ode_bound: bound.as_ref(),
            },
        )?;
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli) -> i32 {
    let result: Result<i32> = match &cli.command {
        Command::Simulate { config, out } => load_config(config)
            .and_then(|lab| scenario::simulate(&lab, out, None)),
        Command::Certify { damping, horizon, out } => {
            cmd_certify(damping, *horizon, out.as_deref())
        }
        Command::Equilibrium { config, out } => {
            load_config(config).and_then(|lab| cmd_equilibrium(&lab, out))
        }
        Command::ProbeTheta { config, out } => {
            load_config(config).and_then(|lab| cmd_probe(&lab, out))
        }
        Command::Fit { input, column, t_min_fraction, alpha, c, out } => {
            cmd_fit(input, column, *t_min_fraction, *alpha, *c, out.as_deref())
        }
        Command::Scenario { name, out, list } => {
            if *list {
                for n in presets::names() {
                    println!("{n}");
                }
                return EXIT_OK;
            }
            let Some(name) = name else {
                eprintln!("scenario: give a preset name or --list");
                return EXIT_CONFIG;
            };
            return run_scenario_named(name, &out.join(name));
        }
        Command::Sweep { names, out } => {
            let names: Vec<String> = if names.is_empty() {
                presets::names().iter().map(|s| s.to_string()).collect()
            } else {
                names.clone()
            };
            return scenario::sweep(&names, out);
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(dispatch(cli));
}
