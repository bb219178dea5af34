//! Frequency-modulation pulses applied to the central qubit.
//!
//! A pulse is a bounded real function `f(t)` (units of Γ) with compact
//! support. What the dynamics actually cares about is the running integral
//! `I(t) = ∫₀ᵗ f dτ`: the rotation area is `u(t) = (2/3) I(t)` and the
//! irreversible leak accumulated while rotating is `Λ(t) = u²/(3Γt)`. The
//! protocol formulas assume `Λ ≪ 1`, hence the amplitude caps below.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on `|f|/Γ`; beyond this the slow-modulation expansion underlying
/// every closed-form result is untrustworthy.
pub const AMPLITUDE_HARD_CAP: f64 = 0.2;
/// Above this the closed forms still work but accumulate visible bias; a
/// warning is logged.
pub const AMPLITUDE_SOFT_CAP: f64 = 0.05;

/// One piece of a piecewise-constant pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub duration_gamma: f64,
    pub amplitude_over_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PulseShape {
    /// Constant amplitude on `[t_start, t_end]`.
    Rectangular { amplitude_over_gamma: f64 },
    /// Consecutive constant pieces starting at `t_start`.
    PiecewiseConstant { segments: Vec<PulseSegment> },
    /// Linear interpolation through `(t_gamma, f/Γ)` samples; zero outside.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// A validated modulation pulse: `|f| ≤ 0.2 Γ` everywhere, support
/// `[t_start_gamma, t_end_gamma]` with `0 ≤ t_start < t_end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationPulse {
    shape: PulseShape,
    t_start_gamma: f64,
    t_end_gamma: f64,
}

fn check_amplitude(amp: f64) -> Result<()> {
    if !amp.is_finite() {
        return Err(Error::invalid("amplitude_over_gamma", "must be finite"));
    }
    if amp.abs() > AMPLITUDE_HARD_CAP {
        return Err(Error::invalid(
            "amplitude_over_gamma",
            format!("|f| = {} exceeds the hard cap {AMPLITUDE_HARD_CAP} Gamma", amp.abs()),
        ));
    }
    Ok(())
}

impl ModulationPulse {
    pub fn rectangular(amplitude_over_gamma: f64, t_start_gamma: f64, t_end_gamma: f64) -> Result<Self> {
        check_amplitude(amplitude_over_gamma)?;
        if !(t_start_gamma >= 0.0) || !t_start_gamma.is_finite() {
            return Err(Error::invalid("t_start_gamma", "must be finite and >= 0"));
        }
        if !(t_end_gamma > t_start_gamma) || !t_end_gamma.is_finite() {
            return Err(Error::invalid("t_end_gamma", "must be finite and > t_start_gamma"));
        }
        let pulse = Self {
            shape: PulseShape::Rectangular {
                amplitude_over_gamma,
            },
            t_start_gamma,
            t_end_gamma,
        };
        pulse.warn_if_strong();
        Ok(pulse)
    }

    pub fn piecewise(t_start_gamma: f64, segments: Vec<PulseSegment>) -> Result<Self> {
        if !(t_start_gamma >= 0.0) || !t_start_gamma.is_finite() {
            return Err(Error::invalid("t_start_gamma", "must be finite and >= 0"));
        }
        if segments.is_empty() {
            return Err(Error::invalid("segments", "must be non-empty"));
        }
        let mut t_end = t_start_gamma;
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration_gamma > 0.0) || !seg.duration_gamma.is_finite() {
                return Err(Error::invalid(
                    "segments",
                    format!("segment {i} duration must be > 0"),
                ));
            }
            check_amplitude(seg.amplitude_over_gamma)?;
            t_end += seg.duration_gamma;
        }
        let pulse = Self {
            shape: PulseShape::PiecewiseConstant { segments },
            t_start_gamma,
            t_end_gamma: t_end,
        };
        pulse.warn_if_strong();
        Ok(pulse)
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid("samples", "need at least two samples"));
        }
        if !(samples[0].0 >= 0.0) {
            return Err(Error::invalid("samples", "first sample time must be >= 0"));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::invalid("samples", "sample times must be strictly increasing"));
            }
        }
        for &(t, f) in &samples {
            if !t.is_finite() {
                return Err(Error::invalid("samples", "sample times must be finite"));
            }
            check_amplitude(f)?;
        }
        let t_start_gamma = samples[0].0;
        let t_end_gamma = samples[samples.len() - 1].0;
        let pulse = Self {
            shape: PulseShape::Tabulated { samples },
            t_start_gamma,
            t_end_gamma,
        };
        pulse.warn_if_strong();
        Ok(pulse)
    }

    /// Rectangular pulse sized to reach rotation area `u_target`:
    /// `f/Γ = (3/2) u_target / duration`. Errors when that amplitude exceeds
    /// the hard cap.
    pub fn design_rectangular(u_target: f64, t_start_gamma: f64, duration_gamma: f64) -> Result<Self> {
        if u_target == 0.0 || !u_target.is_finite() {
            return Err(Error::invalid("u_target", "must be nonzero and finite"));
        }
        if !(duration_gamma > 0.0) || !duration_gamma.is_finite() {
            return Err(Error::invalid("duration_gamma", "must be > 0"));
        }
        let amp = 1.5 * u_target / duration_gamma;
        if amp.abs() > AMPLITUDE_HARD_CAP {
            return Err(Error::AmplitudeCapExceeded {
                required_over_gamma: amp.abs(),
                cap_over_gamma: AMPLITUDE_HARD_CAP,
            });
        }
        Self::rectangular(amp, t_start_gamma, t_start_gamma + duration_gamma)
    }

    fn warn_if_strong(&self) {
        if self.exceeds_soft_cap() {
            log::warn!(
                "pulse amplitude |f| = {:.4} Gamma exceeds {AMPLITUDE_SOFT_CAP} Gamma; \
                 closed-form protocol formulas will carry visible bias",
                self.max_abs_amplitude()
            );
        }
    }

    pub fn t_start_gamma(&self) -> f64 {
        self.t_start_gamma
    }

    pub fn t_end_gamma(&self) -> f64 {
        self.t_end_gamma
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn max_abs_amplitude(&self) -> f64 {
        match &self.shape {
            PulseShape::Rectangular {
                amplitude_over_gamma,
            } => amplitude_over_gamma.abs(),
            PulseShape::PiecewiseConstant { segments } => segments
                .iter()
                .map(|s| s.amplitude_over_gamma.abs())
                .fold(0.0, f64::max),
            PulseShape::Tabulated { samples } => {
                samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max)
            }
        }
    }

    pub fn exceeds_soft_cap(&self) -> bool {
        self.max_abs_amplitude() > AMPLITUDE_SOFT_CAP
    }

    /// `f(t)/Γ`. Zero outside the support; tabulated shapes interpolate
    /// linearly between samples.
    pub fn value_at(&self, t_gamma: f64) -> f64 {
        if t_gamma < self.t_start_gamma || t_gamma > self.t_end_gamma {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Rectangular {
                amplitude_over_gamma,
            } => *amplitude_over_gamma,
            PulseShape::PiecewiseConstant { segments } => {
                let mut a = self.t_start_gamma;
                for seg in segments {
                    let b = a + seg.duration_gamma;
                    if t_gamma <= b {
                        return seg.amplitude_over_gamma;
                    }
                    a = b;
                }
                segments.last().map_or(0.0, |s| s.amplitude_over_gamma)
            }
            PulseShape::Tabulated { samples } => {
                match samples.binary_search_by(|s| s.0.partial_cmp(&t_gamma).unwrap()) {
                    Ok(i) => samples[i].1,
                    Err(i) => {
                        // t strictly between samples[i-1] and samples[i]
                        let (t0, f0) = samples[i - 1];
                        let (t1, f1) = samples[i];
                        f0 + (f1 - f0) * (t_gamma - t0) / (t1 - t0)
                    }
                }
            }
        }
    }

    /// Times where `f` can jump or kink; the integrator aligns steps to these
    /// so pulse areas are exact.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            PulseShape::Rectangular { .. } => vec![self.t_start_gamma, self.t_end_gamma],
            PulseShape::PiecewiseConstant { segments } => {
                let mut pts = Vec::with_capacity(segments.len() + 1);
                let mut t = self.t_start_gamma;
                pts.push(t);
                for seg in segments {
                    t += seg.duration_gamma;
                    pts.push(t);
                }
                pts
            }
            PulseShape::Tabulated { samples } => samples.iter().map(|s| s.0).collect(),
        }
    }

    /// `Some(f)` if `f` is constant on the open interval `(a, b)`; `None`
    /// when it varies there (tabulated spans).
    pub(crate) fn constant_on(&self, a: f64, b: f64) -> Option<f64> {
        let mid = 0.5 * (a + b);
        if b <= self.t_start_gamma || a >= self.t_end_gamma {
            return Some(0.0);
        }
        match &self.shape {
            PulseShape::Rectangular { .. } | PulseShape::PiecewiseConstant { .. } => {
                Some(self.value_at(mid))
            }
            PulseShape::Tabulated { .. } => None,
        }
    }

    /// Running integral `I(t) = ∫₀ᵗ f dτ` (dimensionless). Exact for
    /// rectangular/piecewise shapes; trapezoidal (exact for the interpolant)
    /// for tabulated ones. Constant for `t ≥ t_end`.
    pub fn integral_to(&self, t_gamma: f64) -> f64 {
        if t_gamma <= self.t_start_gamma {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Rectangular {
                amplitude_over_gamma,
            } => {
                let upto = t_gamma.min(self.t_end_gamma);
                amplitude_over_gamma * (upto - self.t_start_gamma)
            }
            PulseShape::PiecewiseConstant { segments } => {
                let mut acc = 0.0;
                let mut a = self.t_start_gamma;
                for seg in segments {
                    let b = a + seg.duration_gamma;
                    let upto = t_gamma.min(b);
                    if upto > a {
                        acc += seg.amplitude_over_gamma * (upto - a);
                    }
                    if t_gamma <= b {
                        break;
                    }
                    a = b;
                }
                acc
            }
            PulseShape::Tabulated { samples } => {
                let mut acc = 0.0;
                for w in samples.windows(2) {
                    let (t0, f0) = w[0];
                    let (t1, f1) = w[1];
                    if t_gamma <= t0 {
                        break;
                    }
                    if t_gamma >= t1 {
                        acc += 0.5 * (f0 + f1) * (t1 - t0);
                    } else {
                        let ft = f0 + (f1 - f0) * (t_gamma - t0) / (t1 - t0);
                        acc += 0.5 * (f0 + ft) * (t_gamma - t0);
                        break;
                    }
                }
                acc
            }
        }
    }

    /// Rotation area `u(t) = (2/3) I(t)`: the angle by which the modulation
    /// has rotated the symmetric edge combinations by time `t`.
    pub fn area(&self, t_gamma: f64) -> f64 {
        (2.0 / 3.0) * self.integral_to(t_gamma)
    }

    /// Leak exponent `Λ(t) = u(t)²/(3Γt)`, the accumulated irreversible loss
    /// of the rotating sector. Defined as 0 at `t = 0` (u(0) = 0 and the
    /// ratio limit vanishes for bounded `f`).
    pub fn leak_exponent(&self, t_gamma: f64) -> f64 {
        if t_gamma <= 0.0 {
            return 0.0;
        }
        let u = self.area(t_gamma);
        u * u / (3.0 * t_gamma)
    }
}
