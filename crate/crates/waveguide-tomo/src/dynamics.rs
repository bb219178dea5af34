//! Direct numerical integration of the three-amplitude equations of motion:
//! the ground truth every closed-form result is checked against.
//!
//! The effective (non-Hermitian) generator couples the qubits through the
//! waveguide with phase factors `e^{ikd}` per hop, plus the instantaneous
//! detuning `-i f(t)` on the central qubit:
//!
//! ```text
//! dβ₁/dt = -(Γ/2) (β₁           + β₂ e^{ikd} + β₃ e^{2ikd})
//! dβ₂/dt = -i f(t) β₂ - (Γ/2) (β₁ e^{ikd} + β₂ + β₃ e^{ikd})
//! dβ₃/dt = -(Γ/2) (β₁ e^{2ikd} + β₂ e^{ikd} + β₃)
//! ```
//!
//! Integration is classic fixed-step RK4 with steps snapped to pulse
//! breakpoints, so rectangular pulse areas are exact and results are
//! bit-reproducible.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::model::{phase_factors, SystemConfig, ThreeQubitAmplitudes, TwoQubitPreparation};
use crate::pulse::ModulationPulse;
use crate::C64;

/// Stability/accuracy guard: `dt * max(1, |f|/Γ)` must stay below this.
pub const STEP_GUARD: f64 = 0.05;

/// Time-ordered samples of a single propagation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Strictly increasing in `t_gamma`; first sample is the initial state,
    /// last is the final time. Total population is non-increasing along it.
    pub samples: Vec<ThreeQubitAmplitudes>,
    pub config: SystemConfig,
    pub pulse: Option<ModulationPulse>,
}

impl Trajectory {
    pub fn final_amplitudes(&self) -> &ThreeQubitAmplitudes {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Observables derived from one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservablePoint {
    pub t_gamma: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Edge population difference `p1 − p3`.
    pub d: f64,
    /// Edge population sum `p1 + p3`.
    pub s: f64,
}

/// The decay part of the generator; `kd` enters only here.
pub(crate) struct Generator {
    a: Matrix3<C64>,
}

impl Generator {
    pub(crate) fn new(kd: f64, gamma: f64) -> Self {
        let (e, e2) = phase_factors(kd);
        let g = C64::new(-0.5 * gamma, 0.0);
        let a = Matrix3::new(
            g,
            g * e,
            g * e2,
            g * e,
            g,
            g * e,
            g * e2,
            g * e,
            g,
        );
        Self { a }
    }

    #[inline]
    pub(crate) fn apply(&self, y: &Vector3<C64>, f_now: f64) -> Vector3<C64> {
        let mut d = self.a * y;
        d[1] += C64::new(0.0, -f_now) * y[1];
        d
    }
}

/// Instantaneous time derivative of the amplitudes (physical units: `gamma`
/// is the radiative rate, `f_now` the detuning at this instant).
pub fn rhs(state: &ThreeQubitAmplitudes, f_now: f64, kd: f64, gamma: f64) -> (C64, C64, C64) {
    let gen = Generator::new(kd, gamma);
    let d = gen.apply(&Vector3::new(state.b1, state.b2, state.b3), f_now);
    (d[0], d[1], d[2])
}

/// f(t) within one breakpoint-free span: either a known constant or a lookup
/// into a smoothly varying (tabulated) pulse.
enum SpanDrive<'a> {
    Const(f64),
    Varying(&'a ModulationPulse),
}

impl SpanDrive<'_> {
    #[inline]
    fn at(&self, t: f64) -> f64 {
        match self {
            SpanDrive::Const(f) => *f,
            SpanDrive::Varying(p) => p.value_at(t),
        }
    }
}

fn integration_spans(pulse: Option<&ModulationPulse>, t_final: f64) -> Vec<f64> {
    let mut cuts = vec![0.0, t_final];
    if let Some(p) = pulse {
        for b in p.breakpoints() {
            if b > 0.0 && b < t_final {
                cuts.push(b);
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    cuts
}

/// Low-level fixed-step propagation of an arbitrary amplitude vector.
///
/// Returns `(t_gamma, state)` at `t = 0`, every `sample_every`-th step, and
/// the final time. Unlike [`propagate`] the initial vector is not required to
/// be a physical preparation, which is what linearity tests and
/// propagator-column extraction need.
pub fn propagate_state(
    initial: &Vector3<C64>,
    pulse: Option<&ModulationPulse>,
    kd: f64,
    dt_gamma: f64,
    t_final_gamma: f64,
    sample_every: usize,
) -> Result<Vec<(f64, Vector3<C64>)>> {
    if !(t_final_gamma > 0.0) || !t_final_gamma.is_finite() {
        return Err(Error::invalid("t_final_gamma", "must be finite and > 0"));
    }
    if !(dt_gamma > 0.0) || !dt_gamma.is_finite() {
        return Err(Error::invalid("dt_gamma", "must be finite and > 0"));
    }
    if sample_every == 0 {
        return Err(Error::invalid("sample_every", "must be >= 1"));
    }
    let f_max = pulse.map_or(0.0, |p| p.max_abs_amplitude());
    let product = dt_gamma * f_max.max(1.0);
    if product > STEP_GUARD {
        return Err(Error::StepTooLarge {
            product,
            limit: STEP_GUARD,
        });
    }

    let gen = Generator::new(kd, 1.0);
    let cuts = integration_spans(pulse, t_final_gamma);
    let mut y = *initial;
    let mut out = vec![(0.0, y)];
    let mut step: usize = 0;

    for span in cuts.windows(2) {
        let (a, b) = (span[0], span[1]);
        let len = b - a;
        let n = ((len / dt_gamma) - 1e-9).ceil().max(1.0) as usize;
        let h = len / n as f64;
        let drive = match pulse {
            None => SpanDrive::Const(0.0),
            Some(p) => match p.constant_on(a, b) {
                Some(f) => SpanDrive::Const(f),
                None => SpanDrive::Varying(p),
            },
        };
        let h2 = C64::new(0.5 * h, 0.0);
        let h6 = C64::new(h / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        for i in 0..n {
            let t = a + h * i as f64;
            let k1 = gen.apply(&y, drive.at(t));
            let k2 = gen.apply(&(y + k1 * h2), drive.at(t + 0.5 * h));
            let k3 = gen.apply(&(y + k2 * h2), drive.at(t + 0.5 * h));
            let k4 = gen.apply(&(y + k3 * C64::new(h, 0.0)), drive.at(t + h));
            y += (k1 + (k2 + k3) * two + k4) * h6;
            step += 1;
            if step.is_multiple_of(sample_every) {
                let t_now = if i + 1 == n { b } else { a + h * (i + 1) as f64 };
                out.push((t_now, y));
            }
        }
        // make span boundaries exact in the running time regardless of sampling
        if out.last().map(|(t, _)| *t) != Some(b) && (b - t_final_gamma).abs() < 1e-12 {
            out.push((b, y));
        }
    }
    Ok(out)
}

/// Propagates a physical preparation (central qubit empty at `t = 0`) under
/// an optional modulation pulse, sampling every `sample_every` steps.
pub fn propagate(
    prep: &TwoQubitPreparation,
    pulse: Option<&ModulationPulse>,
    config: &SystemConfig,
    t_final_gamma: f64,
    sample_every: usize,
) -> Result<Trajectory> {
    let init = prep.initial_amplitudes();
    let raw = propagate_state(
        &Vector3::new(init.b1, init.b2, init.b3),
        pulse,
        config.kd(),
        config.dt_gamma(),
        t_final_gamma,
        sample_every,
    )?;
    let mut samples = Vec::with_capacity(raw.len());
    for (t, y) in raw {
        samples.push(ThreeQubitAmplitudes::new(y[0], y[1], y[2], t)?);
    }
    Ok(Trajectory {
        samples,
        config: *config,
        pulse: pulse.cloned(),
    })
}

/// Per-sample populations and the edge difference/sum read out by the
/// tomography protocol.
pub fn observables(traj: &Trajectory) -> Vec<ObservablePoint> {
    traj.samples
        .iter()
        .map(|s| {
            let [p1, p2, p3] = s.populations();
            ObservablePoint {
                t_gamma: s.t_gamma,
                p1,
                p2,
                p3,
                d: p1 - p3,
                s: p1 + p3,
            }
        })
        .collect()
}
