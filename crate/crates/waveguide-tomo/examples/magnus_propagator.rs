//! Closed-form first-order Magnus propagator: eigenvalues of the averaged
//! generator, Sylvester covariant identities, and the matrix exponential
//! checked column by column against the fixed-step integrator. The last
//! section exercises the degenerate corner (no drive at kd = 2π) where the
//! covariant route fails and a series exponential takes over.

use nalgebra::{Matrix3, Vector3};
use waveguide_tomo::analytic::{magnus_m1, series_exponential};
use waveguide_tomo::dynamics::propagate_state;
use waveguide_tomo::pulse::ModulationPulse;
use waveguide_tomo::C64;

const TAU: f64 = std::f64::consts::TAU;

fn max_abs_diff(a: &Matrix3<C64>, b: &Matrix3<C64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn unit(c: usize) -> Vector3<C64> {
    let mut e = Vector3::from_element(C64::new(0.0, 0.0));
    e[c] = C64::new(1.0, 0.0);
    e
}

fn main() -> waveguide_tomo::Result<()> {
    let t = 7.0;
    let pulse = ModulationPulse::rectangular(0.05, 0.0, t)?;
    let m = magnus_m1(Some(&pulse), t, TAU)?;

    println!("averaged generator at t*Gamma = {t}, kd = 2*pi, f = 0.05 Gamma");
    for (i, l) in m.eigenvalues().iter().enumerate() {
        println!("  lambda_{} = {:+.6}{:+.6}i", i + 1, l.re, l.im);
    }

    let cov = m.covariants()?;
    let sum = cov[0] + cov[1] + cov[2];
    let idem = cov
        .iter()
        .map(|p| max_abs_diff(&(p * p), p))
        .fold(0.0, f64::max);
    println!(
        "covariants: |sum - identity| = {:.3e}, worst |P^2 - P| = {:.3e}",
        max_abs_diff(&sum, &Matrix3::identity()),
        idem
    );

    let exp = m.exponential();
    let mut worst = 0.0_f64;
    for c in 0..3 {
        let traj = propagate_state(&unit(c), Some(&pulse), TAU, 1e-3, t, usize::MAX)?;
        let (_, y) = traj.last().unwrap();
        for r in 0..3 {
            worst = worst.max((y[r] - exp[(r, c)]).norm());
        }
    }
    println!("max |exp(M1) column - integrator| = {worst:.3e}");

    // no drive at kd = 2*pi: two eigenvalues coincide, Sylvester's formula
    // is unusable and the propagator comes from the series route instead
    let m0 = magnus_m1(None, t, TAU)?;
    match m0.sylvester_eigens() {
        Err(e) => println!("\nundriven at kd = 2*pi -> {e}"),
        Ok(_) => println!("\nunexpected: degenerate spectrum resolved"),
    }
    let series = series_exponential(m0.matrix());
    let mut worst0 = 0.0_f64;
    for c in 0..3 {
        let traj = propagate_state(&unit(c), None, TAU, 1e-3, t, usize::MAX)?;
        let (_, y) = traj.last().unwrap();
        for r in 0..3 {
            worst0 = worst0.max((y[r] - series[(r, c)]).norm());
        }
    }
    println!("series exponential vs integrator: {worst0:.3e}");
    Ok(())
}
