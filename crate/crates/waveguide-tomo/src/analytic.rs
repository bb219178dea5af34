//! Closed-form results: free-evolution amplitudes at `kd = 2π`, the
//! first-Magnus-term propagator for arbitrary `kd` via Sylvester's matrix
//! theorem, and the asymptotic observable formulas behind the tomography
//! protocol.
//!
//! The time-ordered propagator is approximated by `exp(M₁)` with
//! `M₁ = ∫₀ᵗ A(τ) dτ`; for a piecewise-constant drive the integral is exact
//! and the only approximation is dropping the higher Magnus terms (zero when
//! the drive is constant over the whole window). A 3×3 exponential with
//! distinct eigenvalues is evaluated exactly through the Frobenius
//! covariants; at degenerate parameter points the code falls back to a
//! scaling-and-squaring series.

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::model::{phase_factors, ThreeQubitAmplitudes, TwoQubitPreparation};
use crate::pulse::ModulationPulse;
use crate::C64;

/// First Magnus term `M₁(t)` of the effective generator, together with the
/// parameters needed to reuse its closed-form spectrum.
#[derive(Debug, Clone)]
pub struct MagnusMatrix {
    matrix: Matrix3<C64>,
    t_gamma: f64,
    kd: f64,
    /// Running drive integral `I(t) = ∫ f dτ` (the drive enters the matrix
    /// as `F = −iI` on the central diagonal entry).
    drive_integral: f64,
}

/// Pairwise-distinct eigenvalues of `M₁`, ordered as the closed-form
/// quadratic branch writes them (`lambda1`/`lambda2` from the `±` root,
/// `lambda3` the structural root that vanishes at `kd = πn`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinctEigenvalues {
    pub lambda1: C64,
    pub lambda2: C64,
    pub lambda3: C64,
}

impl DistinctEigenvalues {
    pub fn as_array(&self) -> [C64; 3] {
        [self.lambda1, self.lambda2, self.lambda3]
    }
}

/// Builds `M₁(t)`: diagonal `(1, Ω(t), 1)` and `kd`-dependent off-diagonals,
/// everything scaled by `−Γt/2`, with `Ω(t) = 1 − (2/Γt)F(t)`, `F = −iI(t)`.
pub fn magnus_m1(pulse: Option<&ModulationPulse>, t_gamma: f64, kd: f64) -> Result<MagnusMatrix> {
    if !(t_gamma > 0.0) || !t_gamma.is_finite() {
        return Err(Error::invalid("t_gamma", "must be finite and > 0"));
    }
    let drive_integral = pulse.map_or(0.0, |p| p.integral_to(t_gamma));
    let (e, e2) = phase_factors(kd);
    let scale = C64::new(-0.5 * t_gamma, 0.0);
    let omega = C64::new(1.0, 2.0 * drive_integral / t_gamma);
    let matrix = Matrix3::new(
        scale,
        scale * e,
        scale * e2,
        scale * e,
        scale * omega,
        scale * e,
        scale * e2,
        scale * e,
        scale,
    );
    Ok(MagnusMatrix {
        matrix,
        t_gamma,
        kd,
        drive_integral,
    })
}

impl MagnusMatrix {
    pub fn matrix(&self) -> &Matrix3<C64> {
        &self.matrix
    }

    pub fn t_gamma(&self) -> f64 {
        self.t_gamma
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }

    pub fn drive_integral(&self) -> f64 {
        self.drive_integral
    }

    /// `F(t) = −i I(t)`.
    pub fn drive_term(&self) -> C64 {
        C64::new(0.0, -self.drive_integral)
    }

    fn is_kd_multiple_of_pi(&self) -> bool {
        let n = self.kd / std::f64::consts::PI;
        (n - n.round()).abs() < 1e-9
    }

    /// Closed-form eigenvalues (no distinctness check): the quadratic branch
    ///
    /// ```text
    /// λ₁,₂ = −(Γt/2)(1 + e^{2ikd}/2) + F/2
    ///         ± (e^{ikd}/4)·√((8+e^{2ikd})Γ²t² + 4F²e^{−2ikd} + 4FΓt)
    /// ```
    ///
    /// and the structural root `λ₃ = (Γt/2)(e^{2ikd} − 1)`, which is exactly
    /// zero whenever `kd` is an integer multiple of π.
    pub fn eigenvalues(&self) -> [C64; 3] {
        let (e, e2) = phase_factors(self.kd);
        let gt = C64::new(self.t_gamma, 0.0);
        let f = self.drive_term();
        let lambda3 = 0.5 * gt * (e2 - C64::new(1.0, 0.0));
        let radicand =
            (C64::new(8.0, 0.0) + e2) * gt * gt + C64::new(4.0, 0.0) * f * f / e2 + C64::new(4.0, 0.0) * f * gt;
        let root = e * radicand.sqrt() * 0.25;
        let base = -0.5 * gt * (C64::new(1.0, 0.0) + 0.5 * e2) + 0.5 * f;
        [base + root, base - root, lambda3]
    }

    /// Eigenvalues checked pairwise-distinct (gap above
    /// `1e-10·max(1, ‖M₁‖)`); Sylvester's formula is only valid then.
    pub fn sylvester_eigens(&self) -> Result<DistinctEigenvalues> {
        let [l1, l2, l3] = self.eigenvalues();
        let threshold = 1e-10 * self.matrix.norm().max(1.0);
        let gap = (l1 - l2)
            .norm()
            .min((l1 - l3).norm())
            .min((l2 - l3).norm());
        if gap < threshold {
            return Err(Error::DegenerateSpectrum { gap, threshold });
        }
        Ok(DistinctEigenvalues {
            lambda1: l1,
            lambda2: l2,
            lambda3: l3,
        })
    }

    /// Frobenius covariants `Bᵢ = Π_{j≠i} (M₁ − λⱼ)/(λᵢ − λⱼ)`: the spectral
    /// projectors appearing in `e^{M₁} = Σ e^{λᵢ} Bᵢ`.
    ///
    /// At `kd = πn` the structural root vanishes and the specialized
    /// rearrangement below avoids cancellation between `M₁²` and `λ₃ M₁`
    /// terms:
    ///
    /// ```text
    /// B₁ = (M² − λ₂M)/(λ₁(λ₁−λ₂)),  B₂ = (M² − λ₁M)/(λ₂(λ₂−λ₁)),
    /// B₃ = (M² − (λ₁+λ₂)M)/(λ₁λ₂) + 1
    /// ```
    pub fn covariants(&self) -> Result<[Matrix3<C64>; 3]> {
        let eig = self.sylvester_eigens()?;
        let m = &self.matrix;
        let m2 = m * m;
        let id = Matrix3::<C64>::identity();
        let [l1, l2, l3] = eig.as_array();
        if self.is_kd_multiple_of_pi() {
            // λ₃ = 0 exactly
            let b1 = (m2 - m * l2) / (l1 * (l1 - l2));
            let b2 = (m2 - m * l1) / (l2 * (l2 - l1));
            let b3 = (m2 - m * (l1 + l2)) / (l1 * l2) + id;
            Ok([b1, b2, b3])
        } else {
            let cov = |li: C64, lj: C64, lk: C64| {
                (m2 - m * (lj + lk) + id * (lj * lk)) / ((li - lj) * (li - lk))
            };
            Ok([cov(l1, l2, l3), cov(l2, l3, l1), cov(l3, l1, l2)])
        }
    }

    /// The propagator `exp(M₁)`: Sylvester's formula on the covariants when
    /// the spectrum is distinct, otherwise the series fallback. `β(t) = P·β(0)`.
    pub fn exponential(&self) -> Matrix3<C64> {
        match (self.sylvester_eigens(), self.covariants()) {
            (Ok(eig), Ok([b1, b2, b3])) => {
                let [l1, l2, l3] = eig.as_array();
                b1 * l1.exp() + b2 * l2.exp() + b3 * l3.exp()
            }
            _ => series_exponential(&self.matrix),
        }
    }
}

/// Scaling-and-squaring Taylor exponential for a 3×3 complex matrix. Used as
/// the degenerate-spectrum fallback and as an independent route in tests.
pub fn series_exponential(m: &Matrix3<C64>) -> Matrix3<C64> {
    let norm = m.norm();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let x = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut sum = Matrix3::<C64>::identity();
    let mut term = Matrix3::<C64>::identity();
    for k in 1..=24 {
        term = (term * x) / C64::new(k as f64, 0.0);
        sum += term;
    }
    let mut result = sum;
    for _ in 0..squarings {
        result *= result;
    }
    result
}

/// Free evolution (`f = 0`, `kd = 2π`) in closed form: the bright third of
/// the initial edge amplitudes decays at `3Γ/2` while the dark remainder is
/// frozen.
pub fn free_evolution(prep: &TwoQubitPreparation, t_gamma: f64) -> ThreeQubitAmplitudes {
    let init = prep.initial_amplitudes();
    let (b1_0, b3_0) = (init.b1, init.b3);
    let decayed = (b1_0 + b3_0) * C64::new((-1.5 * t_gamma).exp() / 3.0, 0.0);
    let third = C64::new(1.0 / 3.0, 0.0);
    let b1 = decayed + (b1_0 * 2.0 - b3_0) * third;
    let b2 = decayed - (b1_0 + b3_0) * third;
    let b3 = decayed - (b1_0 - b3_0 * 2.0) * third;
    ThreeQubitAmplitudes::new(b1, b2, b3, t_gamma)
        .expect("free evolution preserves the population bound")
}

/// Long-time populations of free evolution:
///
/// ```text
/// p1 = (4a1² + a3²)/9 − (4/9) a1 a3 cos Δφ
/// p2 = (a1² + a3²)/9 + (2/9) a1 a3 cos Δφ
/// p3 = (4a3² + a1²)/9 − (4/9) a1 a3 cos Δφ
/// ```
///
/// with `Δφ = φ₁ − φ₃`. Their difference `p1 − p3 = (a1² − a3²)/3` is
/// phase-independent.
pub fn free_asymptotic_populations(prep: &TwoQubitPreparation) -> [f64; 3] {
    let (a1, a3) = (prep.a1(), prep.a3());
    let cross = a1 * a3 * prep.dphi().cos();
    let p1 = (4.0 * a1 * a1 + a3 * a3) / 9.0 - 4.0 / 9.0 * cross;
    let p2 = (a1 * a1 + a3 * a3) / 9.0 + 2.0 / 9.0 * cross;
    let p3 = (4.0 * a3 * a3 + a1 * a1) / 9.0 - 4.0 / 9.0 * cross;
    [p1, p2, p3]
}

/// Post-pulse observables predicted for a pulse of rotation area `u` and
/// accumulated leak exponent `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticObservables {
    /// Edge population difference `p1 − p3`.
    pub d: f64,
    /// Edge population sum `p1 + p3`.
    pub s: f64,
    /// Central-qubit population.
    pub p2: f64,
}

/// Closed-form post-pulse observables in the slow-modulation regime
/// (`|f| ≪ Γ`, pulse end at `Γt ≫ 1`):
///
/// ```text
/// d  = (e^{−Λ}/3)·[(a1² − a3²) cos u + 2 a1 a3 sin(φ₃ − φ₁) sin u]
/// S  = (e^{−2Λ} + 9)/18 + (a1 a3 cos Δφ/9)·(e^{−2Λ} − 9)
/// p2 = (e^{−2Λ}/9)·(1 + 2 a1 a3 cos Δφ)
/// ```
///
/// The `sin(φ₃ − φ₁)` ordering in `d` is pinned empirically against the
/// integrator (see the regime-agreement tests).
pub fn asymptotic_observables(
    prep: &TwoQubitPreparation,
    u: f64,
    lambda: f64,
) -> AsymptoticObservables {
    let (a1, a3) = (prep.a1(), prep.a3());
    let cos_dphi = prep.dphi().cos();
    let sin_31 = -prep.dphi().sin(); // sin(φ₃ − φ₁)
    let el = (-lambda).exp();
    let e2l = (-2.0 * lambda).exp();
    let d = el / 3.0 * ((a1 * a1 - a3 * a3) * u.cos() + 2.0 * a1 * a3 * sin_31 * u.sin());
    let s = (e2l + 9.0) / 18.0 + a1 * a3 * cos_dphi / 9.0 * (e2l - 9.0);
    let p2 = e2l / 9.0 * (1.0 + 2.0 * a1 * a3 * cos_dphi);
    AsymptoticObservables { d, s, p2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate, propagate_state};
    use crate::model::SystemConfig;
    use nalgebra::Vector3;

    const TAU: f64 = std::f64::consts::TAU;
    const PI: f64 = std::f64::consts::PI;
    const SQ2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn free_evolution_recovers_initial_state() {
        let prep = TwoQubitPreparation::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let s = free_evolution(&prep, 0.0);
        assert!((s.b1 - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s.b2.norm() < 1e-15);
        assert!(s.b3.norm() < 1e-15);
    }

    #[test]
    fn free_evolution_long_time_amplitudes() {
        let prep = TwoQubitPreparation::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let s = free_evolution(&prep, 60.0);
        assert!((s.b1 - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((s.b2 - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((s.b3 - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-12);

        let equal = TwoQubitPreparation::new(SQ2, SQ2, 0.0, 0.0).unwrap();
        let s = free_evolution(&equal, 60.0);
        assert!((s.b1 - C64::new(1.0 / (3.0 * 2.0f64.sqrt()), 0.0)).norm() < 1e-12);
        assert!((s.b1.norm_sqr() - 1.0 / 18.0).abs() < 1e-12);
        assert!((s.b3 - s.b1).norm() < 1e-12);
    }

    #[test]
    fn free_evolution_matches_integrator_pointwise() {
        let prep = TwoQubitPreparation::new(0.6, 0.8, 0.3, -1.1).unwrap();
        let traj = propagate(&prep, None, &SystemConfig::default(), 5.0, 100).unwrap();
        for s in &traj.samples {
            let a = free_evolution(&prep, s.t_gamma);
            assert!(
                (s.b1 - a.b1).norm() < 1e-8
                    && (s.b2 - a.b2).norm() < 1e-8
                    && (s.b3 - a.b3).norm() < 1e-8,
                "mismatch at t = {}",
                s.t_gamma
            );
        }
    }

    #[test]
    fn asymptotic_population_examples() {
        let prep = TwoQubitPreparation::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let [p1, p2, p3] = free_asymptotic_populations(&prep);
        assert!((p1 - 4.0 / 9.0).abs() < 1e-15);
        assert!((p2 - 1.0 / 9.0).abs() < 1e-15);
        assert!((p3 - 1.0 / 9.0).abs() < 1e-15);

        // antisymmetric state is fully dark
        let anti = TwoQubitPreparation::new(SQ2, SQ2, PI, 0.0).unwrap();
        let [p1, p2, p3] = free_asymptotic_populations(&anti);
        assert!((p1 - 0.5).abs() < 1e-15);
        assert!(p2.abs() < 1e-15);
        assert!((p3 - 0.5).abs() < 1e-15);

        let sym = TwoQubitPreparation::new(SQ2, SQ2, 0.0, 0.0).unwrap();
        let [p1, p2, p3] = free_asymptotic_populations(&sym);
        assert!((p1 - 1.0 / 18.0).abs() < 1e-15);
        assert!((p2 - 2.0 / 9.0).abs() < 1e-15);
        assert!((p3 - 1.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn edge_difference_is_phase_independent() {
        for dphi in [0.0, 0.8, -2.2, PI] {
            let prep = TwoQubitPreparation::from_populations(0.3, dphi, 0.0).unwrap();
            let [p1, _, p3] = free_asymptotic_populations(&prep);
            let expect = (prep.a1().powi(2) - prep.a3().powi(2)) / 3.0;
            assert!((p1 - p3 - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn magnus_matrix_examples() {
        // zero pulse, Γt = 2, kd = 2π: every entry is −1
        let m = magnus_m1(None, 2.0, TAU).unwrap();
        for entry in m.matrix().iter() {
            assert!((entry - C64::new(-1.0, 0.0)).norm() < 1e-15);
        }

        // u = π pulse observed at its end: Ω = 1 + i·3π/Γt
        let pulse = ModulationPulse::design_rectangular(PI, 10.0, 141.0).unwrap();
        let m = magnus_m1(Some(&pulse), 151.0, TAU).unwrap();
        let omega = m.matrix()[(1, 1)] / C64::new(-151.0 / 2.0, 0.0);
        assert!((omega - C64::new(1.0, 3.0 * PI / 151.0)).norm() < 1e-12);
        assert!((m.drive_integral() - 1.5 * PI).abs() < 1e-12);

        // kd = π/2 puts ±i on the single-hop couplings
        let m = magnus_m1(None, 3.0, PI / 2.0).unwrap();
        assert!((m.matrix()[(0, 1)] - C64::new(0.0, -1.5)).norm() < 1e-12);

        assert!(magnus_m1(None, 0.0, TAU).is_err());
    }

    #[test]
    fn structural_eigenvalue_vanishes_at_pi_multiples() {
        for kd in [PI, TAU, 2.0 * TAU] {
            let pulse = ModulationPulse::rectangular(0.05, 0.0, 4.0).unwrap();
            let m = magnus_m1(Some(&pulse), 4.0, kd).unwrap();
            let [_, _, l3] = m.eigenvalues();
            assert_eq!(l3, C64::new(0.0, 0.0), "kd = {kd}");
        }
        let m = magnus_m1(None, 4.0, 1.0).unwrap();
        let [_, _, l3] = m.eigenvalues();
        assert!(l3.norm() > 0.1);
    }

    #[test]
    fn superradiant_splitting_without_drive() {
        // kd = 2π, no pulse: spectrum is (0, −3Γt/2, 0)
        let m = magnus_m1(None, 7.0, TAU).unwrap();
        let [l1, l2, l3] = m.eigenvalues();
        assert!(l1.norm() < 1e-12 * 7.0);
        assert!((l2 - C64::new(-10.5, 0.0)).norm() < 1e-10);
        assert_eq!(l3, C64::new(0.0, 0.0));

        // two roots coincide, so the checked accessor must refuse
        match m.sylvester_eigens() {
            Err(Error::DegenerateSpectrum { .. }) => {}
            other => panic!("expected DegenerateSpectrum, got {other:?}"),
        }
    }

    #[test]
    fn eigenvalues_satisfy_characteristic_polynomial() {
        let pulse = ModulationPulse::rectangular(0.04, 0.0, 9.0).unwrap();
        for kd in [PI / 3.0, PI / 2.0, PI, 1.1, TAU] {
            for t in [0.5, 9.0, 151.0] {
                let m = magnus_m1(Some(&pulse), t, kd).unwrap();
                let tol = 1e-10 * m.matrix().norm().max(1.0);
                for l in m.eigenvalues() {
                    let residual = (m.matrix() - Matrix3::<C64>::identity() * l)
                        .determinant()
                        .norm();
                    // determinant scale grows like ‖M₁‖³; normalize before comparing
                    let scale = m.matrix().norm().powi(2).max(1.0);
                    assert!(
                        residual / scale < tol,
                        "kd={kd} t={t}: residual {residual:.3e} scale {scale:.3e}"
                    );
                }
            }
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let pulse = ModulationPulse::rectangular(0.05, 0.0, 20.0).unwrap();
        for kd in [0.7, PI / 2.0, PI, TAU] {
            let m = magnus_m1(Some(&pulse), 20.0, kd).unwrap();
            let [l1, l2, l3] = m.eigenvalues();
            let trace = m.matrix()[(0, 0)] + m.matrix()[(1, 1)] + m.matrix()[(2, 2)];
            assert!(
                (l1 + l2 + l3 - trace).norm() < 1e-9,
                "trace identity violated at kd = {kd}"
            );
        }
    }

    #[test]
    fn drive_dominated_eigenvalue_asymptotics() {
        // λ₁ ≈ (2/3)F + (4/27)F²/Γt for Γt ≫ |F|, with O((F/Γt)³·Γt) remainder
        for f_over in [0.01, 0.03] {
            let t = 100.0;
            let pulse = ModulationPulse::rectangular(f_over, 0.0, t).unwrap();
            let m = magnus_m1(Some(&pulse), t, TAU).unwrap();
            let [l1, _, _] = m.eigenvalues();
            let f = m.drive_term();
            let approx = f * (2.0 / 3.0) + f * f * C64::new(4.0 / (27.0 * t), 0.0);
            let bound = (f.norm() / t).powi(3) * t * 10.0;
            assert!(
                (l1 - approx).norm() < bound,
                "f = {f_over}: err {:.3e} vs bound {:.3e}",
                (l1 - approx).norm(),
                bound
            );
        }
    }

    #[test]
    fn covariants_form_a_spectral_resolution() {
        let pulse = ModulationPulse::rectangular(0.05, 0.0, 10.0).unwrap();
        for kd in [PI / 3.0, PI / 2.0, PI, 3.0 * PI / 2.0, TAU] {
            let m = magnus_m1(Some(&pulse), 10.0, kd).unwrap();
            let [b1, b2, b3] = m.covariants().unwrap();
            let id = Matrix3::<C64>::identity();
            assert!(((b1 + b2 + b3) - id).norm() < 1e-10, "completeness at kd={kd}");
            assert!((b1 * b2).norm() < 1e-10 && (b2 * b3).norm() < 1e-10 && (b1 * b3).norm() < 1e-10);
            assert!((b1 * b1 - b1).norm() < 1e-10);
            assert!((b2 * b2 - b2).norm() < 1e-10);
            assert!((b3 * b3 - b3).norm() < 1e-10);
        }
    }

    #[test]
    fn exponential_is_identity_for_vanishing_matrix() {
        let m = magnus_m1(None, 1e-9, TAU).unwrap();
        let p = m.exponential();
        assert!((p - Matrix3::<C64>::identity()).norm() < 1e-8);
    }

    #[test]
    fn exponential_reproduces_free_asymptotics() {
        // degenerate spectrum here: exercises the series fallback
        let m = magnus_m1(None, 20.0, TAU).unwrap();
        assert!(m.sylvester_eigens().is_err());
        let p = m.exponential();
        let out = p * Vector3::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!((out[0] - C64::new(2.0 / 3.0, 0.0)).norm() < 1e-8);
        assert!((out[1] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-8);
        assert!((out[2] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn exponential_matches_integrator_for_constant_drive() {
        // constant drive from t=0 makes the first Magnus term exact
        for kd in [PI / 3.0, PI / 2.0, PI, 3.0 * PI / 2.0, TAU] {
            for f_over in [0.0, 0.02, 0.05] {
                let t_final = 10.0;
                let pulse = if f_over == 0.0 {
                    None
                } else {
                    Some(ModulationPulse::rectangular(f_over, 0.0, t_final).unwrap())
                };
                let m = magnus_m1(pulse.as_ref(), t_final, kd).unwrap();
                let p = m.exponential();
                for col in 0..3 {
                    let mut e = Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                    e[col] = C64::new(1.0, 0.0);
                    let traj =
                        propagate_state(&e, pulse.as_ref(), kd, 1e-3, t_final, usize::MAX).unwrap();
                    let (_, y) = traj.last().unwrap();
                    for row in 0..3 {
                        assert!(
                            (p[(row, col)] - y[row]).norm() < 1e-8,
                            "kd={kd} f={f_over} entry ({row},{col})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn exponential_near_pulse_end_tracks_integrator() {
        // pulse switched on mid-evolution: only the Magnus truncation differs.
        // The central-qubit column carries the largest truncation residual
        // (~2.7e-3 for the half-pi timing); the edge columns stay below 2e-3.
        let pulse = ModulationPulse::design_rectangular(PI / 2.0, 10.0, 141.0).unwrap();
        let m = magnus_m1(Some(&pulse), 151.0, TAU).unwrap();
        let p = m.exponential();
        let b0 = Vector3::new(
            C64::from_polar(SQ2, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(SQ2, -0.4 * PI),
        );
        let traj = propagate_state(&b0, Some(&pulse), TAU, 1e-3, 151.0, usize::MAX).unwrap();
        let (_, y) = traj.last().unwrap();
        let predicted = p * b0;
        let errs: Vec<f64> = (0..3).map(|i| (predicted[i] - y[i]).norm()).collect();
        assert!(errs[0] < 2e-3 && errs[2] < 2e-3, "edge errors {errs:?}");
        assert!(errs[1] < 3e-3, "central error {errs:?}");
    }

    #[test]
    fn asymptotic_observable_examples() {
        // equal amplitudes, φ₃ − φ₁ = 0.4π, u = π/2
        let prep = TwoQubitPreparation::new(SQ2, SQ2, 0.0, 0.4 * PI).unwrap();
        let lam = (PI / 2.0) * (PI / 2.0) / (3.0 * 151.0);
        let obs = asymptotic_observables(&prep, PI / 2.0, lam);
        assert!((obs.d - (0.4 * PI).sin() / 3.0 * (-lam).exp()).abs() < 1e-12);
        assert!((obs.d - 0.3153).abs() < 1e-4);

        // u = π kills the phase term entirely
        for dphi in [0.0, 1.0, -2.0] {
            let prep = TwoQubitPreparation::from_populations(0.3, dphi, 0.0).unwrap();
            let obs = asymptotic_observables(&prep, PI, 0.01);
            let expect = -(0.3 - 0.7) / 3.0 * (-0.01f64).exp();
            assert!((obs.d - expect).abs() < 1e-12);
        }

        // symmetric state, no leak: p2 = 2/9
        let sym = TwoQubitPreparation::new(SQ2, SQ2, 0.0, 0.0).unwrap();
        let obs = asymptotic_observables(&sym, 1.234, 0.0);
        assert!((obs.p2 - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotics_agree_with_integrator_across_regimes() {
        // |f| ≤ 0.05Γ, pulse end ≥ 100Γt: closed forms within 1e-2 of the ODE
        let config = SystemConfig::default();
        for &u_target in &[PI / 2.0, PI] {
            let pulse = ModulationPulse::design_rectangular(u_target, 10.0, 141.0).unwrap();
            let t_end = pulse.t_end_gamma();
            let lam = pulse.leak_exponent(t_end);
            for &a1_sq in &[0.2, 0.5, 0.8] {
                for &dphi in &[-2.5, -0.8, 0.0, 1.2, PI] {
                    let prep = TwoQubitPreparation::from_populations(a1_sq, dphi, 0.0).unwrap();
                    let traj = propagate(&prep, Some(&pulse), &config, t_end + 5.0, usize::MAX)
                        .unwrap();
                    let [p1, p2, p3] = traj.final_amplitudes().populations();
                    let pred = asymptotic_observables(&prep, u_target, lam);
                    assert!(
                        (p1 - p3 - pred.d).abs() < 1e-2,
                        "d mismatch: u={u_target} a1_sq={a1_sq} dphi={dphi}"
                    );
                    assert!((p1 + p3 - pred.s).abs() < 1e-2, "S mismatch at dphi={dphi}");
                    assert!((p2 - pred.p2).abs() < 1e-2, "p2 mismatch at dphi={dphi}");
                }
            }
        }
    }
}
