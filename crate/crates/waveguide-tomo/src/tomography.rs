//! Two-pulse tomography of the edge-qubit pair.
//!
//! One run with a π-area pulse turns the edge population difference into a
//! population meter (`d(t_π) = −(a1²−a3²)/3`, phases drop out); one run with
//! a π/2-area pulse exposes the phase through `d` (sine) and the edge sum
//! `S` (cosine). Populations are read at pulse end plus a settling time of a
//! few lifetimes so the bright transient is dead; at `kd = 2π` the remaining
//! state is dark and the readout instant is otherwise uncritical.
//!
//! Measurement statistics are modeled as independent per-qubit binomial
//! sampling with a seeded generator; `shots = None` reads exact populations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    density_from_preparation, wrap_phase, ReducedDensityMatrix, SystemConfig, TwoQubitPreparation,
};
use crate::pulse::ModulationPulse;
use crate::{dynamics, C64};

const PI: f64 = std::f64::consts::PI;

/// Which modulation pulse a measurement run applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PulseKind {
    /// Population-revealing pulse, rotation area π.
    Pi,
    /// Phase-revealing pulse, rotation area π/2.
    HalfPi,
    /// No modulation at all (free decay).
    None,
}

/// Timing and estimator settings shared by every run of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    pub config: SystemConfig,
    pub pulse_start_gamma: f64,
    pub pulse_duration_gamma: f64,
    /// Wait after pulse end before reading populations.
    pub settle_gamma: f64,
    /// Below this `a1·a3` product the phase is reported indeterminate.
    pub epsilon_prod: f64,
    /// Deflate the measured `d` by `e^{+Λ}` before the phase formulas.
    pub lambda_correct: bool,
}

impl Default for ProtocolParams {
    /// The figure timing: pulse on `Γt ∈ [10, 151]`, readout 5 lifetimes
    /// after pulse end.
    fn default() -> Self {
        Self {
            config: SystemConfig::default(),
            pulse_start_gamma: 10.0,
            pulse_duration_gamma: 141.0,
            settle_gamma: 5.0,
            epsilon_prod: 0.02,
            lambda_correct: false,
        }
    }
}

impl ProtocolParams {
    fn pulse_for(&self, kind: PulseKind) -> Result<Option<ModulationPulse>> {
        let u_target = match kind {
            PulseKind::Pi => PI,
            PulseKind::HalfPi => PI / 2.0,
            PulseKind::None => return Ok(None),
        };
        ModulationPulse::design_rectangular(u_target, self.pulse_start_gamma, self.pulse_duration_gamma)
            .map(Some)
    }

    pub fn t_readout_gamma(&self) -> f64 {
        self.pulse_start_gamma + self.pulse_duration_gamma + self.settle_gamma
    }

    /// Leak exponent accumulated by the pulse of the given kind at readout
    /// (constant once the pulse has ended... evaluated at pulse end).
    fn leak_exponent(&self, kind: PulseKind) -> Result<f64> {
        Ok(match self.pulse_for(kind)? {
            Some(p) => p.leak_exponent(p.t_end_gamma()),
            None => 0.0,
        })
    }
}

/// Edge populations read out after one run of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub pulse_kind: PulseKind,
    pub p1: f64,
    pub p3: f64,
    pub t_readout_gamma: f64,
    pub shots: Option<u64>,
}

impl MeasurementRecord {
    /// `d = p1 − p3`, recomputed so it can never drift from the populations.
    pub fn d(&self) -> f64 {
        self.p1 - self.p3
    }

    /// `S = p1 + p3`.
    pub fn s(&self) -> f64 {
        self.p1 + self.p3
    }
}

/// Runs one protocol pulse on `prep` and reads the edge populations at
/// `pulse end + settle`. With `shots`, populations become binomial frequency
/// estimates drawn from a generator seeded with `seed` (deterministic).
pub fn measure(
    prep: &TwoQubitPreparation,
    kind: PulseKind,
    params: &ProtocolParams,
    shots: Option<u64>,
    seed: u64,
) -> Result<MeasurementRecord> {
    if !(params.settle_gamma >= 0.0) {
        return Err(Error::invalid("settle_gamma", "must be >= 0"));
    }
    let pulse = params.pulse_for(kind)?;
    let t_readout = params.t_readout_gamma();
    let traj = dynamics::propagate(prep, pulse.as_ref(), &params.config, t_readout, usize::MAX)?;
    let [p1_exact, _, p3_exact] = traj.final_amplitudes().populations();

    let (p1, p3) = match shots {
        None => (p1_exact, p3_exact),
        Some(n) => {
            if n == 0 {
                return Err(Error::invalid("shots", "must be >= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = |p: f64| {
                let dist = Binomial::new(n, p.clamp(0.0, 1.0)).expect("clamped probability");
                dist.sample(&mut rng) as f64 / n as f64
            };
            (draw(p1_exact), draw(p3_exact))
        }
    };

    Ok(MeasurementRecord {
        pulse_kind: kind,
        p1,
        p3,
        t_readout_gamma: t_readout,
        shots,
    })
}

/// Inverts the π-pulse relation `d = −(a1²−a3²)/3` into amplitude estimates:
/// `a1² = (1−3d)/2`, `a3² = (1+3d)/2`, clamped into `[0, 1]` so shot noise
/// can never produce an unphysical state. The clamped pair still sums to 1.
pub fn estimate_populations(rec_pi: &MeasurementRecord) -> (f64, f64) {
    assert!(
        rec_pi.pulse_kind == PulseKind::Pi,
        "population estimation needs a pi-pulse record"
    );
    let d = rec_pi.d();
    let a1_sq = (0.5 * (1.0 - 3.0 * d)).clamp(0.0, 1.0);
    let a3_sq = (0.5 * (1.0 + 3.0 * d)).clamp(0.0, 1.0);
    (a1_sq.sqrt(), a3_sq.sqrt())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ReconstructionFlags {
    /// `a1·a3` below threshold: the coherence is too small for any phase to
    /// be meaningful.
    pub phase_indeterminate: bool,
    /// A raw sine/cosine estimate exceeded 1 by more than the noise allowance
    /// (1.05) before clamping.
    pub trig_out_of_range: bool,
}

/// Phase estimate extracted from a π/2-pulse record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEstimate {
    /// `Δφ = φ₁ − φ₃`, wrapped into `(−π, π]`; 0 when indeterminate.
    pub phi_est: f64,
    /// Raw (unclamped) sine of `φ₃ − φ₁` from `d`; NaN when indeterminate.
    pub sin_est: f64,
    /// Raw cosine of `Δφ` from `S`; NaN when indeterminate.
    pub cos_est: f64,
    pub flags: ReconstructionFlags,
}

/// Inverts the π/2-pulse relations
///
/// ```text
/// sin(φ₃−φ₁) = (3/2)·d / (a1·a3)      cos(φ₁−φ₃) = −(S − 5/9)·9 / (8·a1·a3)
/// ```
///
/// and combines them through `atan2` into the canonical `Δφ = φ₁ − φ₃`.
/// Values are clamped to `[−1, 1]` before `atan2`; excursions beyond 1.05
/// raise the `trig_out_of_range` flag.
pub fn estimate_phase(
    rec_half_pi: &MeasurementRecord,
    a1_est: f64,
    a3_est: f64,
    params: &ProtocolParams,
) -> Result<PhaseEstimate> {
    assert!(
        rec_half_pi.pulse_kind == PulseKind::HalfPi,
        "phase estimation needs a half-pi-pulse record"
    );
    let prod = a1_est * a3_est;
    if prod < params.epsilon_prod {
        return Ok(PhaseEstimate {
            phi_est: 0.0,
            sin_est: f64::NAN,
            cos_est: f64::NAN,
            flags: ReconstructionFlags {
                phase_indeterminate: true,
                trig_out_of_range: false,
            },
        });
    }
    let mut d = rec_half_pi.d();
    if params.lambda_correct {
        d *= params.leak_exponent(PulseKind::HalfPi)?.exp();
    }
    let sin_est = 1.5 * d / prod;
    let cos_est = -(rec_half_pi.s() - 5.0 / 9.0) * 9.0 / (8.0 * prod);
    let trig_out_of_range = sin_est.abs() > 1.05 || cos_est.abs() > 1.05;
    // atan2 of the clamped pair gives φ₃ − φ₁; negate for the canonical Δφ
    let phi_est = wrap_phase(-f64::atan2(
        sin_est.clamp(-1.0, 1.0),
        cos_est.clamp(-1.0, 1.0),
    ));
    Ok(PhaseEstimate {
        phi_est,
        sin_est,
        cos_est,
        flags: ReconstructionFlags {
            phase_indeterminate: false,
            trig_out_of_range,
        },
    })
}

/// Everything the two-run protocol produced, including the raw records.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub a1_est: f64,
    pub a3_est: f64,
    /// Estimated `Δφ = φ₁ − φ₃` in radians.
    pub phi_est: f64,
    pub sin_est: f64,
    pub cos_est: f64,
    pub rho_est: ReducedDensityMatrix,
    pub flags: ReconstructionFlags,
    pub record_pi: MeasurementRecord,
    pub record_half_pi: MeasurementRecord,
}

/// Full protocol: π run → amplitude estimates → π/2 run → phase estimate →
/// density matrix. The π/2 run derives its seed as `seed + 1` so the two
/// runs are statistically independent but jointly reproducible.
pub fn reconstruct(
    prep: &TwoQubitPreparation,
    params: &ProtocolParams,
    shots: Option<u64>,
    seed: u64,
) -> Result<ReconstructionReport> {
    let record_pi = measure(prep, PulseKind::Pi, params, shots, seed)?;
    let (a1_est, a3_est) = estimate_populations(&record_pi);
    let record_half_pi = measure(prep, PulseKind::HalfPi, params, shots, seed.wrapping_add(1))?;
    let phase = estimate_phase(&record_half_pi, a1_est, a3_est, params)?;
    let rho_est = if phase.flags.phase_indeterminate {
        // no phase information: report zero coherence, not an arbitrary one
        ReducedDensityMatrix::new(a1_est * a1_est, a3_est * a3_est, C64::new(0.0, 0.0))?
    } else {
        let prep_est = TwoQubitPreparation::new(a1_est, a3_est, phase.phi_est, 0.0)?;
        density_from_preparation(&prep_est)
    };
    Ok(ReconstructionReport {
        a1_est,
        a3_est,
        phi_est: phase.phi_est,
        sin_est: phase.sin_est,
        cos_est: phase.cos_est,
        rho_est,
        flags: phase.flags,
        record_pi,
        record_half_pi,
    })
}

/// Cartesian grid of true states for sweeps: `a1²` values × `Δφ` values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub a1_sq: Vec<f64>,
    pub dphi: Vec<f64>,
}

impl GridSpec {
    /// 9 populations (`a1² = 0.1 … 0.9`) × 16 phases (`Δφ = −π+π/8 … π`).
    pub fn default_grid() -> Self {
        Self {
            a1_sq: (1..=9).map(|k| k as f64 / 10.0).collect(),
            dphi: (1..=16).map(|k| -PI + PI / 8.0 * k as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.a1_sq.len() * self.dphi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major (a1² outer, Δφ inner) point list.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.len());
        for &a in &self.a1_sq {
            for &p in &self.dphi {
                pts.push((a, p));
            }
        }
        pts
    }
}

/// One reconstruction round trip on a grid point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub a1_sq_true: f64,
    pub dphi_true: f64,
    pub a1_sq_est: f64,
    pub dphi_est: f64,
    /// `|a1²_est − a1²_true|`.
    pub err_pop: f64,
    /// `|Δφ_est − Δφ_true|` modulo 2π; NaN when the phase is indeterminate.
    pub err_phase: f64,
    pub phase_indeterminate: bool,
}

/// Reconstructs every grid state in parallel. Each point uses seeds
/// `seed + 2·index` and `seed + 2·index + 1`; output order is the row-major
/// grid order regardless of scheduling.
pub fn sweep_reconstruction(
    grid: &GridSpec,
    params: &ProtocolParams,
    shots: Option<u64>,
    seed: u64,
) -> Result<Vec<SweepPoint>> {
    grid.points()
        .par_iter()
        .enumerate()
        .map(|(idx, &(a1_sq, dphi))| {
            let prep = TwoQubitPreparation::from_populations(a1_sq, dphi, 0.0)?;
            let report = reconstruct(&prep, params, shots, seed.wrapping_add(2 * idx as u64))?;
            let err_phase = if report.flags.phase_indeterminate {
                f64::NAN
            } else {
                wrap_phase(report.phi_est - dphi).abs()
            };
            Ok(SweepPoint {
                a1_sq_true: a1_sq,
                dphi_true: dphi,
                a1_sq_est: report.a1_est * report.a1_est,
                dphi_est: report.phi_est,
                err_pop: (report.a1_est * report.a1_est - a1_sq).abs(),
                err_phase,
                phase_indeterminate: report.flags.phase_indeterminate,
            })
        })
        .collect()
}

/// Post-pulse observables over the grid, for both protocol pulses: the raw
/// surfaces the estimators invert.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SurfacePoint {
    pub p3_true: f64,
    pub a3_true: f64,
    pub dphi_true: f64,
    pub d_half_pi: f64,
    pub s_half_pi: f64,
    pub d_pi: f64,
    pub s_pi: f64,
}

/// Exact-readout observable surfaces (no shot noise).
pub fn sweep_observables(grid: &GridSpec, params: &ProtocolParams) -> Result<Vec<SurfacePoint>> {
    grid.points()
        .par_iter()
        .map(|&(a1_sq, dphi)| {
            let prep = TwoQubitPreparation::from_populations(a1_sq, dphi, 0.0)?;
            let half = measure(&prep, PulseKind::HalfPi, params, None, 0)?;
            let pi = measure(&prep, PulseKind::Pi, params, None, 0)?;
            Ok(SurfacePoint {
                p3_true: 1.0 - a1_sq,
                a3_true: (1.0 - a1_sq).sqrt(),
                dphi_true: dphi,
                d_half_pi: half.d(),
                s_half_pi: half.s(),
                d_pi: pi.d(),
                s_pi: pi.s(),
            })
        })
        .collect()
}

/// `rho13` implied by a report (kept for examples/tests symmetry).
pub fn rho13_from_report(report: &ReconstructionReport) -> C64 {
    report.rho_est.rho13()
}
