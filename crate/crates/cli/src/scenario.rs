//! End-to-end run pipeline: integrate, locate the limiting equilibrium,
//! probe the Lojasiewicz exponent, and write the hypothesis/conclusion
//! report next to the raw outputs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dampwave_core::analysis::{theorem1_report, DecayClass, PredictedClass, Theorem1Report};
use dampwave_core::dynamics::{run, EpsilonReport, SimConfig, Trajectory};
use dampwave_core::equilibria::{
    probe_lojasiewicz, solve_equilibrium, Equilibrium, LojasiewiczEstimate,
};
use dampwave_core::error::Result;
use dampwave_core::galerkin::{galerkin_run, GalerkinConfig, GalerkinTrajectory};
use dampwave_core::io::{
    write_field_csv, write_json, write_trajectory_csv, SCHEMA_VERSION,
};
use dampwave_core::mesh::BcKind;
use dampwave_core::nonlinearity::SignStatus;
use serde::Serialize;

use crate::config::{AnalysisParams, ConfigKind, LabConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

#[derive(Serialize)]
struct Summary {
    schema_version: u32,
    scenario: Option<String>,
    epsilon: f64,
    epsilon_report: Option<EpsilonReport>,
    blow_up_time: Option<f64>,
    final_t: f64,
    final_v_l2: f64,
    final_u_linf: f64,
    energy_initial: f64,
    energy_final: f64,
    /// Wall-clock time; kept out of the CSVs so those stay bitwise
    /// reproducible.
    wall_seconds: f64,
}

#[derive(Serialize)]
struct EquilibriumSummary {
    schema_version: u32,
    residual: f64,
    boundary_residual: f64,
    iterations: usize,
    stalled: bool,
    sup_norm: f64,
}

fn summarize(traj: &Trajectory, scenario: Option<&str>, wall_seconds: f64) -> Summary {
    let last = traj.energies.last();
    Summary {
        schema_version: SCHEMA_VERSION,
        scenario: scenario.map(str::to_string),
        epsilon: traj.epsilon,
        epsilon_report: traj.epsilon_report.clone(),
        blow_up_time: traj.blow_up_time,
        final_t: last.map_or(f64::NAN, |e| e.t),
        final_v_l2: last.map_or(f64::NAN, |e| e.v_l2),
        final_u_linf: last.map_or(f64::NAN, |e| e.u_linf),
        energy_initial: traj.energies.first().map_or(f64::NAN, |e| e.total),
        energy_final: last.map_or(f64::NAN, |e| e.total),
        wall_seconds,
    }
}

/// Simulate only: trajectory + final fields + summary. Returns the exit code.
pub fn simulate(lab: &LabConfig, outdir: &Path, scenario: Option<&str>) -> Result<i32> {
    fs::create_dir_all(outdir)?;
    fs::write(outdir.join("resolved.cfg"), &lab.resolved)?;
    match &lab.kind {
        ConfigKind::Mesh(sim) => {
            let started = Instant::now();
            let traj = run(sim)?;
            let wall = started.elapsed().as_secs_f64();
            write_mesh_outputs(&traj, sim, outdir, scenario, wall)?;
            Ok(if traj.blow_up_time.is_some() { EXIT_BLOWUP } else { EXIT_OK })
        }
        ConfigKind::Galerkin(g) => {
            let started = Instant::now();
            let traj = galerkin_run(g)?;
            let wall = started.elapsed().as_secs_f64();
            write_galerkin_outputs(&traj, g, outdir, scenario, wall)?;
            Ok(if traj.blow_up_time.is_some() { EXIT_BLOWUP } else { EXIT_OK })
        }
    }
}

fn write_mesh_outputs(
    traj: &Trajectory,
    sim: &SimConfig,
    outdir: &Path,
    scenario: Option<&str>,
    wall: f64,
) -> Result<()> {
    write_trajectory_csv(&outdir.join("trajectory.csv"), traj)?;
    let last = traj.final_state();
    write_field_csv(&outdir.join("final_u.csv"), &last.u, &sim.mesh)?;
    write_field_csv(&outdir.join("final_v.csv"), &last.v, &sim.mesh)?;
    write_json(&outdir.join("summary.json"), &summarize(traj, scenario, wall))?;
    Ok(())
}

fn write_galerkin_outputs(
    traj: &GalerkinTrajectory,
    config: &GalerkinConfig,
    outdir: &Path,
    scenario: Option<&str>,
    wall: f64,
) -> Result<()> {
    let n = config.u0.len();
    let mut w = std::io::BufWriter::new(fs::File::create(outdir.join("trajectory.csv"))?);
    writeln!(w, "# schema_version = {SCHEMA_VERSION}")?;
    let mut header = String::from("t");
    for i in 0..n {
        header.push_str(&format!(",u{}", i + 1));
    }
    for i in 0..n {
        header.push_str(&format!(",v{}", i + 1));
    }
    header.push_str(",kinetic,potential,forcing,E");
    writeln!(w, "{header}")?;
    for s in &traj.samples {
        let mut row = s.t.to_string();
        for x in s.u.iter().chain(s.v.iter()) {
            row.push_str(&format!(",{x}"));
        }
        row.push_str(&format!(",{},{},{},{}", s.kinetic, s.potential, s.forcing, s.total));
        writeln!(w, "{row}")?;
    }
    w.flush()?;

    #[derive(Serialize)]
    struct GalerkinSummary {
        schema_version: u32,
        scenario: Option<String>,
        coercivity: f64,
        blow_up_time: Option<f64>,
        final_t: f64,
        final_energy: f64,
        wall_seconds: f64,
    }
    let last = traj.samples.last();
    write_json(
        &outdir.join("summary.json"),
        &GalerkinSummary {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.map(str::to_string),
            coercivity: traj.coercivity,
            blow_up_time: traj.blow_up_time,
            final_t: last.map_or(f64::NAN, |s| s.t),
            final_energy: last.map_or(f64::NAN, |s| s.total),
            wall_seconds: wall,
        },
    )?;
    Ok(())
}

pub struct PipelineOutcome {
    pub exit: i32,
    pub report: Option<Theorem1Report>,
}

/// Full pipeline: simulate, then (unless the run blew up) solve for the
/// limiting equilibrium from the final profile, probe the exponent, and
/// compare predicted and measured decay.
pub fn run_pipeline(lab: &LabConfig, outdir: &Path, scenario: Option<&str>) -> Result<PipelineOutcome> {
    fs::create_dir_all(outdir)?;
    fs::write(outdir.join("resolved.cfg"), &lab.resolved)?;
    let sim = match &lab.kind {
        ConfigKind::Galerkin(_) => {
            let exit = simulate(lab, outdir, scenario)?;
            return Ok(PipelineOutcome { exit, report: None });
        }
        ConfigKind::Mesh(sim) => sim,
    };
    let analysis = &lab.analysis;
    let started = Instant::now();
    let traj = run(sim)?;
    let wall = started.elapsed().as_secs_f64();
    write_mesh_outputs(&traj, sim, outdir, scenario, wall)?;

    if traj.blow_up_time.is_some() {
        // hypothesis report without equilibrium/probe stages
        let eq = Equilibrium {
            phi: sim.mesh.zero_field(),
            residual: 0.0,
            boundary_residual: 0.0,
            iterations: 0,
            stalled: false,
        };
        let report = theorem1_report(&traj, sim, &eq, None, analysis.velocity_threshold)?;
        write_report(&report, outdir)?;
        return Ok(PipelineOutcome { exit: EXIT_BLOWUP, report: Some(report) });
    }

    let guess = &traj.final_state().u;
    let eq = solve_equilibrium(&sim.mesh, &sim.nonlinearity, guess, analysis.equilibrium_tol)?;
    write_field_csv(&outdir.join("equilibrium.csv"), &eq.phi, &sim.mesh)?;
    write_json(
        &outdir.join("equilibrium.json"),
        &EquilibriumSummary {
            schema_version: SCHEMA_VERSION,
            residual: eq.residual,
            boundary_residual: eq.boundary_residual,
            iterations: eq.iterations,
            stalled: eq.stalled,
            sup_norm: eq.phi.sup_norm(),
        },
    )?;

    let ls = probe(&eq, sim, analysis);
    if let Some(est) = &ls {
        write_json(&outdir.join("probe.json"), est)?;
    }

    let report = theorem1_report(&traj, sim, &eq, ls.as_ref(), analysis.velocity_threshold)?;
    write_report(&report, outdir)?;
    Ok(PipelineOutcome { exit: EXIT_OK, report: Some(report) })
}

fn probe(eq: &Equilibrium, sim: &SimConfig, analysis: &AnalysisParams) -> Option<LojasiewiczEstimate> {
    if sim.mesh.dimension != 1 && sim.mesh.bc == BcKind::Dynamical {
        return None;
    }
    probe_lojasiewicz(
        eq,
        &sim.nonlinearity,
        &sim.mesh,
        &analysis.radii,
        analysis.samples_per_radius,
        analysis.seed,
    )
    .ok()
}

fn write_report(report: &Theorem1Report, outdir: &Path) -> Result<()> {
    write_json(&outdir.join("report.json"), report)?;
    fs::write(outdir.join("report.txt"), render_report(report))?;
    Ok(())
}

pub fn render_report(r: &Theorem1Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("damping certificate : {:?}\n", r.damping_verdict));
    out.push_str(&format!("damping structure   : {}\n", r.damping_structure.name()));
    let sign = match &r.sign_status {
        SignStatus::Satisfied => "satisfied".to_string(),
        SignStatus::Violated { witness } => format!("violated (witness s = {witness})"),
        SignStatus::Unchecked => "unchecked".to_string(),
    };
    out.push_str(&format!("sign condition      : {sign}\n"));
    out.push_str(&format!("converged           : {}\n", r.converged));
    if let Some(t) = r.blow_up_time {
        out.push_str(&format!("blow-up time        : {t}\n"));
    }
    if let Some(theta) = r.theta_hat {
        out.push_str(&format!("theta estimate      : {theta}\n"));
    }
    if let Some(p) = &r.predicted {
        let s = match p {
            PredictedClass::Exponential => "exponential".to_string(),
            PredictedClass::Polynomial { exponent } => format!("polynomial t^-{exponent}"),
        };
        out.push_str(&format!("predicted decay     : {s}\n"));
    }
    if let Some(m) = &r.measured {
        let s = match &m.class {
            DecayClass::Exponential { rate, .. } => format!("exponential, rate {rate}"),
            DecayClass::Polynomial { exponent, .. } => format!("polynomial t^-{exponent}"),
            DecayClass::Inconclusive => "inconclusive".to_string(),
        };
        out.push_str(&format!("measured decay      : {s}\n"));
    }
    if let Some(a) = r.agreement {
        out.push_str(&format!("prediction agrees   : {a}\n"));
    }
    if let Some(v) = &r.velocity_check {
        out.push_str(&format!(
            "velocity check      : {} (|v({})| = {}, threshold {})\n",
            if v.pass { "pass" } else { "fail" },
            v.t_check,
            v.value,
            v.threshold
        ));
    }
    for n in &r.notes {
        out.push_str(&format!("note: {n}\n"));
    }
    out
}

/// Run several scenarios concurrently, each in its own subdirectory.
/// Returns the worst exit code.
pub fn sweep(names: &[String], outdir: &Path) -> i32 {
    let handles: Vec<_> = names
        .iter()
        .map(|name| {
            let name = name.clone();
            let dir: PathBuf = outdir.join(&name);
            std::thread::spawn(move || crate::run_scenario_named(&name, &dir))
        })
        .collect();
    let mut worst = EXIT_OK;
    for h in handles {
        let code = h.join().unwrap_or(EXIT_NUMERIC);
        worst = worst.max(code);
    }
    worst
}
