//! Core value types: system parameters, amplitude records, preparations of
//! the edge-qubit pair, and the reduced density matrix targeted by the
//! tomography protocol.
//!
//! Everything is dimensionless: times are `Γt`, modulation amplitudes are
//! `f/Γ`. The physical decay rate enters only through [`SystemConfig`] so a
//! caller can convert at the boundary.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::C64;

/// Slack on the total-population bound of a three-qubit amplitude record.
pub const POPULATION_SLACK: f64 = 1e-9;
/// Slack on the normalization of a two-qubit preparation.
pub const NORMALIZATION_SLACK: f64 = 1e-12;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// `(e^{ikd}, e^{2ikd})`, snapped to exactly `(+-1, 1)` when `kd` is an
/// integer multiple of pi.
///
/// The snap keeps structural zeros exact: at `kd = pi*n` one closed-form
/// eigenvalue of the decay generator is identically zero, and a stray
/// `sin(2*pi) ~ 1e-16` would smear it.
pub(crate) fn phase_factors(kd: f64) -> (C64, C64) {
    let n = kd / PI;
    if (n - n.round()).abs() < 1e-9 {
        let e = if (n.round() as i64).rem_euclid(2) == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        };
        (e, C64::new(1.0, 0.0))
    } else {
        (C64::from_polar(1.0, kd), C64::from_polar(1.0, 2.0 * kd))
    }
}

/// Waveguide/system parameters shared by every simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemConfig {
    gamma: f64,
    kd: f64,
    dt_gamma: f64,
}

impl SystemConfig {
    /// `gamma` is the single-qubit radiative rate (> 0), `kd` the inter-qubit
    /// propagation phase in radians, `dt_gamma` the integrator step in units
    /// of `1/Γ` (must lie in `(0, 0.01]`).
    pub fn new(gamma: f64, kd: f64, dt_gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        if !kd.is_finite() {
            return Err(Error::invalid("kd", "must be finite"));
        }
        if !(dt_gamma > 0.0 && dt_gamma <= 0.01) {
            return Err(Error::invalid(
                "dt_gamma",
                format!("must lie in (0, 0.01], got {dt_gamma}"),
            ));
        }
        Ok(Self { gamma, kd, dt_gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }

    pub fn dt_gamma(&self) -> f64 {
        self.dt_gamma
    }
}

impl Default for SystemConfig {
    /// `gamma = 1`, `kd = 2*pi`, `dt_gamma = 1e-3`.
    fn default() -> Self {
        Self {
            gamma: 1.0,
            kd: TAU,
            dt_gamma: 1e-3,
        }
    }
}

/// Instantaneous excitation amplitudes of the three qubits at time `t_gamma`.
///
/// Invariant: the total population never exceeds 1 (the dynamics only loses
/// excitation to the waveguide), with [`POPULATION_SLACK`] of numerical room.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeQubitAmplitudes {
    pub b1: C64,
    pub b2: C64,
    pub b3: C64,
    pub t_gamma: f64,
}

impl ThreeQubitAmplitudes {
    pub fn new(b1: C64, b2: C64, b3: C64, t_gamma: f64) -> Result<Self> {
        let total = b1.norm_sqr() + b2.norm_sqr() + b3.norm_sqr();
        if total > 1.0 + POPULATION_SLACK {
            return Err(Error::invalid(
                "amplitudes",
                format!("total population {total} exceeds 1"),
            ));
        }
        if !t_gamma.is_finite() || t_gamma < 0.0 {
            return Err(Error::invalid("t_gamma", "must be finite and >= 0"));
        }
        Ok(Self { b1, b2, b3, t_gamma })
    }

    pub fn populations(&self) -> [f64; 3] {
        [self.b1.norm_sqr(), self.b2.norm_sqr(), self.b3.norm_sqr()]
    }

    pub fn total_population(&self) -> f64 {
        self.b1.norm_sqr() + self.b2.norm_sqr() + self.b3.norm_sqr()
    }

    /// Edge population difference `|β₁|² − |β₃|²`.
    pub fn edge_difference(&self) -> f64 {
        self.b1.norm_sqr() - self.b3.norm_sqr()
    }

    /// Edge population sum `|β₁|² + |β₃|²`.
    pub fn edge_sum(&self) -> f64 {
        self.b1.norm_sqr() + self.b3.norm_sqr()
    }
}

/// Initial state of the edge-qubit pair: `a1 e^{iφ₁}` on qubit 1,
/// `a3 e^{iφ₃}` on qubit 3, and the central qubit empty.
///
/// Amplitudes are non-negative with `a1² + a3² = 1`; phases are stored
/// wrapped into `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoQubitPreparation {
    a1: f64,
    a3: f64,
    phi1: f64,
    phi3: f64,
}

impl TwoQubitPreparation {
    pub fn new(a1: f64, a3: f64, phi1: f64, phi3: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a3", a3)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        let norm = a1 * a1 + a3 * a3;
        if (norm - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::invalid(
                "a1,a3",
                format!("a1^2 + a3^2 = {norm}, must equal 1"),
            ));
        }
        if !phi1.is_finite() || !phi3.is_finite() {
            return Err(Error::invalid("phi1,phi3", "phases must be finite"));
        }
        Ok(Self {
            a1,
            a3,
            phi1: wrap_phase(phi1),
            phi3: wrap_phase(phi3),
        })
    }

    /// Convenience: amplitudes from the qubit-1 population `a1²`.
    pub fn from_populations(a1_sq: f64, phi1: f64, phi3: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a1_sq) {
            return Err(Error::invalid(
                "a1_sq",
                format!("must lie in [0, 1], got {a1_sq}"),
            ));
        }
        Self::new(a1_sq.sqrt(), (1.0 - a1_sq).sqrt(), phi1, phi3)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi3(&self) -> f64 {
        self.phi3
    }

    /// Canonical relative phase `Δφ = φ₁ − φ₃`, wrapped into `(-π, π]`.
    pub fn dphi(&self) -> f64 {
        wrap_phase(self.phi1 - self.phi3)
    }

    /// The full three-qubit amplitude record at `t = 0` (central qubit empty).
    pub fn initial_amplitudes(&self) -> ThreeQubitAmplitudes {
        ThreeQubitAmplitudes {
            b1: C64::from_polar(self.a1, self.phi1),
            b2: C64::new(0.0, 0.0),
            b3: C64::from_polar(self.a3, self.phi3),
            t_gamma: 0.0,
        }
    }
}

/// Reduced 2x2 density matrix of the edge-qubit pair within the
/// single-excitation subspace: populations `p11`, `p33` and the coherence
/// `rho13`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedDensityMatrix {
    p11: f64,
    p33: f64,
    rho13_re: f64,
    rho13_im: f64,
}

impl ReducedDensityMatrix {
    pub fn new(p11: f64, p33: f64, rho13: C64) -> Result<Self> {
        if p11 < 0.0 || p33 < 0.0 {
            return Err(Error::invalid("p11,p33", "populations must be >= 0"));
        }
        if (p11 + p33 - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "p11,p33",
                format!("trace {} must equal 1", p11 + p33),
            ));
        }
        if rho13.norm_sqr() > p11 * p33 + 1e-12 {
            return Err(Error::invalid(
                "rho13",
                format!(
                    "|rho13|^2 = {} violates the purity bound p11*p33 = {}",
                    rho13.norm_sqr(),
                    p11 * p33
                ),
            ));
        }
        Ok(Self {
            p11,
            p33,
            rho13_re: rho13.re,
            rho13_im: rho13.im,
        })
    }

    pub fn p11(&self) -> f64 {
        self.p11
    }

    pub fn p33(&self) -> f64 {
        self.p33
    }

    pub fn rho13(&self) -> C64 {
        C64::new(self.rho13_re, self.rho13_im)
    }

    pub fn as_matrix(&self) -> Matrix2<C64> {
        let r = self.rho13();
        Matrix2::new(C64::new(self.p11, 0.0), r, r.conj(), C64::new(self.p33, 0.0))
    }
}

/// Density matrix of a pure preparation: `p11 = a1²`, `p33 = a3²`,
/// `rho13 = a1 a3 e^{i(φ₁−φ₃)}`. Saturates the purity bound by construction.
pub fn density_from_preparation(prep: &TwoQubitPreparation) -> ReducedDensityMatrix {
    let rho13 = C64::from_polar(prep.a1() * prep.a3(), prep.dphi());
    ReducedDensityMatrix {
        p11: prep.a1() * prep.a1(),
        p33: prep.a3() * prep.a3(),
        rho13_re: rho13.re,
        rho13_im: rho13.im,
    }
}

/// Qubit-waveguide coupling implied by a radiative rate: `√(v_g Γ / 2L)`
/// for quantization length `L` and group velocity `v_g`.
///
/// Ties the dimensionless model to its microscopic origin; nothing
/// downstream consumes it.
pub fn coupling_from_decay(gamma: f64, v_g: f64, length: f64) -> Result<f64> {
    for (name, v) in [("gamma", gamma), ("v_g", v_g), ("length", length)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, format!("must be > 0, got {v}")));
        }
    }
    Ok((v_g * gamma / (2.0 * length)).sqrt())
}
