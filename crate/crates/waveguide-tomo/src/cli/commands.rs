//! Subcommand implementations behind the thin binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{phase_factors, wrap_phase, ThreeQubitAmplitudes, TwoQubitPreparation};
use crate::pulse::ModulationPulse;
use crate::tomography::{self, MeasurementRecord, ReconstructionFlags};
use crate::{analytic, dynamics, C64};

use super::output;
use super::scenario::{self, Preset, Scenario, ScenarioEcho};

const PI: f64 = std::f64::consts::PI;

/// Simulation and two-pulse tomography of a three-qubit chain in an open
/// waveguide.
#[derive(Debug, Parser)]
#[command(name = "waveguide-tomo", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a scenario; write the trajectory CSV and a summary JSON.
    Simulate(RunArgs),
    /// Run the two-pulse protocol on the scenario's state; write a report JSON.
    Reconstruct(RunArgs),
    /// Round-trip the protocol over a grid of true states; write a CSV.
    Sweep(SweepArgs),
    /// Cross-check the closed forms against the integrator; exit 4 on failure.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (JSON); overlays the preset when both are given.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in scenario.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Output path; relative paths honor WAVEGUIDE_TOMO_OUTDIR.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Shots per qubit and run (omit for exact populations).
    #[arg(long)]
    pub shots: Option<u64>,
    /// Seed for the measurement sampler.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the exact post-pulse observable surfaces next to the sweep.
    #[arg(long)]
    pub observables: bool,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Reconstruct(args) => cmd_reconstruct(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Validate(args) => cmd_validate(&args),
    }
}

fn load(args: &RunArgs) -> Result<Scenario> {
    scenario::load(args.config.as_deref(), args.preset, args.shots, args.seed)
}

#[derive(Debug, Clone, Copy, Serialize)]
struct ObservableRow {
    t_gamma: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    d: f64,
    s: f64,
}

fn observable_row(a: &ThreeQubitAmplitudes) -> ObservableRow {
    let [p1, p2, p3] = a.populations();
    ObservableRow {
        t_gamma: a.t_gamma,
        p1,
        p2,
        p3,
        d: a.edge_difference(),
        s: a.edge_sum(),
    }
}

#[derive(Debug, Serialize)]
struct PredictionEcho {
    u_rad: f64,
    leak_exponent: f64,
    d: f64,
    s: f64,
    p2: f64,
}

#[derive(Debug, Serialize)]
struct SimulationSummary {
    config: ScenarioEcho,
    rows: usize,
    #[serde(rename = "final")]
    final_row: ObservableRow,
    /// First stored sample at or after pulse end; absent without a pulse.
    post_pulse: Option<ObservableRow>,
    /// Closed-form post-pulse values; absent unless the pulse sits on the
    /// mirror-symmetric spacing (kd at a multiple of 2π) where they apply.
    prediction: Option<PredictionEcho>,
}

fn prediction_for(sc: &Scenario) -> Option<PredictionEcho> {
    let pulse = sc.pulse.as_ref()?;
    let (e, _) = phase_factors(sc.system.kd());
    if e != C64::new(1.0, 0.0) {
        return None;
    }
    let u = pulse.area(pulse.t_end_gamma());
    let leak = pulse.leak_exponent(pulse.t_end_gamma());
    let obs = analytic::asymptotic_observables(&sc.prep, u, leak);
    Some(PredictionEcho {
        u_rad: u,
        leak_exponent: leak,
        d: obs.d,
        s: obs.s,
        p2: obs.p2,
    })
}

fn cmd_simulate(args: &RunArgs) -> Result<()> {
    let sc = load(args)?;
    let steps = (sc.t_final_gamma / sc.system.dt_gamma()).ceil().max(1.0);
    // aim for ~2000 stored rows regardless of dt
    let sample_every = ((steps / 2000.0).ceil() as usize).max(1);
    let traj = dynamics::propagate(
        &sc.prep,
        sc.pulse.as_ref(),
        &sc.system,
        sc.t_final_gamma,
        sample_every,
    )?;

    let out = output::resolve_out_path(args.out.as_deref().unwrap_or(Path::new("trajectory.csv")));
    output::write_text(&out, &output::trajectory_csv(&traj, &sc.echo))?;

    let final_row = observable_row(traj.final_amplitudes());
    let post_pulse = sc.pulse.as_ref().and_then(|p| {
        traj.samples
            .iter()
            .find(|s| s.t_gamma >= p.t_end_gamma())
            .map(observable_row)
    });
    let summary = SimulationSummary {
        config: sc.echo.clone(),
        rows: traj.samples.len(),
        final_row,
        post_pulse,
        prediction: prediction_for(&sc),
    };
    let summary_out = output::summary_path(&out);
    output::write_text(&summary_out, &output::to_json_text(&summary)?)?;

    println!(
        "wrote {} ({} rows) and {}",
        out.display(),
        summary.rows,
        summary_out.display()
    );
    println!(
        "final t_gamma = {}: d = {:.6}, S = {:.6}, p2 = {:.6}",
        final_row.t_gamma, final_row.d, final_row.s, final_row.p2
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct StateEcho {
    a1: f64,
    a3: f64,
    a1_sq: f64,
    a3_sq: f64,
    dphi_rad: f64,
}

#[derive(Debug, Serialize)]
struct EstimateEcho {
    #[serde(flatten)]
    state: StateEcho,
    sin_est: f64,
    cos_est: f64,
}

#[derive(Debug, Serialize)]
struct ErrorsEcho {
    a1_sq: f64,
    a3_sq: f64,
    /// Wrapped absolute phase error; null when the phase is indeterminate.
    dphi_rad: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RecordsEcho {
    pi: MeasurementRecord,
    half_pi: MeasurementRecord,
}

#[derive(Debug, Serialize)]
struct ReconstructionJson {
    config: ScenarioEcho,
    /// `dphi_rad` fields mean `φ₁ − φ₃`, wrapped to (−π, π].
    phase_convention: &'static str,
    truth: StateEcho,
    estimate: EstimateEcho,
    errors: ErrorsEcho,
    flags: ReconstructionFlags,
    rho_est: crate::model::ReducedDensityMatrix,
    records: RecordsEcho,
}

fn cmd_reconstruct(args: &RunArgs) -> Result<()> {
    let sc = load(args)?;
    let report = tomography::reconstruct(&sc.prep, &sc.protocol, sc.shots, sc.seed)?;
    let dphi_err = if report.flags.phase_indeterminate {
        None
    } else {
        Some(wrap_phase(report.phi_est - sc.prep.dphi()).abs())
    };
    let json = ReconstructionJson {
        config: sc.echo.clone(),
        phase_convention: "phi1_minus_phi3",
        truth: StateEcho {
            a1: sc.prep.a1(),
            a3: sc.prep.a3(),
            a1_sq: sc.prep.a1() * sc.prep.a1(),
            a3_sq: sc.prep.a3() * sc.prep.a3(),
            dphi_rad: sc.prep.dphi(),
        },
        estimate: EstimateEcho {
            state: StateEcho {
                a1: report.a1_est,
                a3: report.a3_est,
                a1_sq: report.a1_est * report.a1_est,
                a3_sq: report.a3_est * report.a3_est,
                dphi_rad: report.phi_est,
            },
            sin_est: report.sin_est,
            cos_est: report.cos_est,
        },
        errors: ErrorsEcho {
            a1_sq: (report.a1_est * report.a1_est - sc.prep.a1() * sc.prep.a1()).abs(),
            a3_sq: (report.a3_est * report.a3_est - sc.prep.a3() * sc.prep.a3()).abs(),
            dphi_rad: dphi_err,
        },
        flags: report.flags,
        rho_est: report.rho_est,
        records: RecordsEcho {
            pi: report.record_pi,
            half_pi: report.record_half_pi,
        },
    };

    let out = output::resolve_out_path(
        args.out
            .as_deref()
            .unwrap_or(Path::new("reconstruction.json")),
    );
    output::write_text(&out, &output::to_json_text(&json)?)?;
    println!("wrote {}", out.display());
    match dphi_err {
        Some(err) => println!(
            "estimate: a1_sq = {:.4} (err {:.4}), dphi = {:.4} rad (err {:.4})",
            json.estimate.state.a1_sq, json.errors.a1_sq, json.estimate.state.dphi_rad, err
        ),
        None => println!(
            "estimate: a1_sq = {:.4} (err {:.4}), phase indeterminate",
            json.estimate.state.a1_sq, json.errors.a1_sq
        ),
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let sc = load(&args.run)?;
    let points = tomography::sweep_reconstruction(&sc.grid, &sc.protocol, sc.shots, sc.seed)?;
    let out = output::resolve_out_path(args.run.out.as_deref().unwrap_or(Path::new("sweep.csv")));
    output::write_text(&out, &output::sweep_csv(&points, &sc.echo))?;

    let max_pop = points.iter().map(|p| p.err_pop).fold(0.0, f64::max);
    let max_phase = points
        .iter()
        .filter(|p| !p.phase_indeterminate)
        .map(|p| p.err_phase)
        .fold(0.0, f64::max);
    println!("wrote {} ({} grid points)", out.display(), points.len());
    println!("max err_pop = {max_pop:.4}, max err_phase = {max_phase:.4} rad");

    if args.observables {
        let surfaces = tomography::sweep_observables(&sc.grid, &sc.protocol)?;
        let surf_out = output::observables_path(&out);
        output::write_text(&surf_out, &output::observables_csv(&surfaces, &sc.echo))?;
        println!("wrote {}", surf_out.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ValidationCheck {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
    pass: bool,
}

impl ValidationCheck {
    fn new(name: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        ValidationCheck {
            name,
            max_deviation,
            tolerance,
            pass: max_deviation <= tolerance,
        }
    }
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    config: ScenarioEcho,
    checks: Vec<ValidationCheck>,
    pass: bool,
}

/// Propagator from the first-order average generator vs the integrator,
/// column by column, constant drives (zero and nonzero) over a spread of
/// spacings. Both routes are exact for a constant generator, so agreement is
/// limited only by step error.
fn check_sylvester_vs_ode(dt_gamma: f64) -> Result<ValidationCheck> {
    let t = 7.0;
    let mut max_dev: f64 = 0.0;
    for kd in [PI / 3.0, PI / 2.0, PI, 2.0 * PI] {
        for f in [0.0, 0.02, 0.05] {
            let pulse = if f == 0.0 {
                None
            } else {
                Some(ModulationPulse::rectangular(f, 0.0, t)?)
            };
            let m = analytic::magnus_m1(pulse.as_ref(), t, kd)?;
            let p = m.exponential();
            for col in 0..3 {
                let mut init = Vector3::zeros();
                init[col] = C64::new(1.0, 0.0);
                let states =
                    dynamics::propagate_state(&init, pulse.as_ref(), kd, dt_gamma, t, usize::MAX)?;
                let (_, y_end) = states.last().expect("propagation yields samples");
                for row in 0..3 {
                    max_dev = max_dev.max((p[(row, col)] - y_end[row]).norm());
                }
            }
        }
    }
    Ok(ValidationCheck::new("sylvester_vs_ode", max_dev, 1e-8))
}

/// Completeness, idempotence, orthogonality, and spectral reconstruction of
/// the Frobenius covariants away from degeneracies.
fn check_covariant_identities() -> Result<ValidationCheck> {
    let t = 7.0;
    let identity = Matrix3::<C64>::identity();
    let mut max_dev: f64 = 0.0;
    for kd in [PI / 3.0, PI / 2.0, 1.1, PI, 2.0 * PI] {
        for f in [0.01, 0.03, 0.05] {
            let pulse = ModulationPulse::rectangular(f, 0.0, t)?;
            let m = analytic::magnus_m1(Some(&pulse), t, kd)?;
            let [l1, l2, l3] = m.sylvester_eigens()?.as_array();
            let b = m.covariants()?;
            max_dev = max_dev.max((b[0] + b[1] + b[2] - identity).norm());
            max_dev = max_dev.max((b[0] * l1 + b[1] * l2 + b[2] * l3 - m.matrix()).norm());
            for i in 0..3 {
                for j in 0..3 {
                    let target = if i == j { b[i] } else { Matrix3::zeros() };
                    max_dev = max_dev.max((b[i] * b[j] - target).norm());
                }
            }
        }
    }
    Ok(ValidationCheck::new("covariant_identities", max_dev, 1e-10))
}

/// Closed-form free evolution vs the integrator at the mirror-symmetric
/// spacing.
fn check_free_evolution_vs_ode(sc: &Scenario) -> Result<ValidationCheck> {
    let t = 20.0;
    let config = crate::model::SystemConfig::new(1.0, 2.0 * PI, sc.system.dt_gamma())?;
    let mut max_dev: f64 = 0.0;
    for (a1_sq, dphi) in [(1.0, 0.0), (0.5, -0.4 * PI), (0.3, 2.0)] {
        let prep = TwoQubitPreparation::from_populations(a1_sq, dphi, 0.0)?;
        let closed = analytic::free_evolution(&prep, t);
        let traj = dynamics::propagate(&prep, None, &config, t, usize::MAX)?;
        let end = traj.final_amplitudes();
        for (c, n) in [(closed.b1, end.b1), (closed.b2, end.b2), (closed.b3, end.b3)] {
            max_dev = max_dev.max((c - n).norm());
        }
    }
    Ok(ValidationCheck::new("free_evolution_vs_ode", max_dev, 1e-8))
}

/// Slow-modulation closed forms for (d, S, p2) vs the integrator across the
/// protocol regime (pulse areas π/2 and π, a spread of states).
fn check_asymptotic_agreement(sc: &Scenario) -> Result<ValidationCheck> {
    let config = crate::model::SystemConfig::new(1.0, 2.0 * PI, sc.system.dt_gamma())?;
    let mut max_dev: f64 = 0.0;
    for u in [PI / 2.0, PI] {
        let pulse = ModulationPulse::design_rectangular(u, 10.0, 141.0)?;
        let leak = pulse.leak_exponent(pulse.t_end_gamma());
        for a1_sq in [0.2, 0.5, 0.8] {
            for dphi in [-0.75 * PI, -0.25 * PI, 0.0, 0.5 * PI, PI] {
                let prep = TwoQubitPreparation::from_populations(a1_sq, dphi, 0.0)?;
                let traj = dynamics::propagate(&prep, Some(&pulse), &config, 200.0, usize::MAX)?;
                let end = observable_row(traj.final_amplitudes());
                let obs = analytic::asymptotic_observables(&prep, u, leak);
                max_dev = max_dev
                    .max((end.d - obs.d).abs())
                    .max((end.s - obs.s).abs())
                    .max((end.p2 - obs.p2).abs());
            }
        }
    }
    Ok(ValidationCheck::new("asymptotic_agreement", max_dev, 1e-2))
}

fn cmd_validate(args: &RunArgs) -> Result<()> {
    let sc = load(args)?;
    let checks = vec![
        check_sylvester_vs_ode(sc.system.dt_gamma())?,
        check_covariant_identities()?,
        check_free_evolution_vs_ode(&sc)?,
        check_asymptotic_agreement(&sc)?,
    ];
    let pass = checks.iter().all(|c| c.pass);
    let report = ValidationReport {
        config: sc.echo.clone(),
        checks,
        pass,
    };
    let text = output::to_json_text(&report)?;

    match &args.out {
        Some(path) => {
            let out = output::resolve_out_path(path);
            output::write_text(&out, &text)?;
            println!("wrote {}", out.display());
            for c in &report.checks {
                println!(
                    "{}: max deviation {:.3e} (tolerance {:.0e}) {}",
                    c.name,
                    c.max_deviation,
                    c.tolerance,
                    if c.pass { "ok" } else { "FAIL" }
                );
            }
        }
        None => print!("{text}"),
    }

    if !pass {
        return Err(Error::ValidationFailed {
            failed: report.checks.iter().filter(|c| !c.pass).count(),
            total: report.checks.len(),
        });
    }
    Ok(())
}
