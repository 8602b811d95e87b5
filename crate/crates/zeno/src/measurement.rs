//! Discrete-time qubit dynamics under repeated ancilla measurement.
//!
//! The qubit is driven by `H = Ω_s σ_x` and its excited state is probed by a
//! two-level ancilla with coupling `J`. Keeping only the `r = 0` outcome at
//! every step gives a deterministic, normalised update of the density matrix;
//! in the limit `dt → 0` with `α = J² dt` fixed this becomes the drift
//! returned by [`drift_rhs`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::linalg::{Mat2, I};

/// Trace below which post-selection is treated as having annihilated the state.
pub const TRACE_UNDERFLOW: f64 = 1e-15;
/// Tolerance used when validating density-matrix invariants.
pub const STATE_TOL: f64 = 1e-12;
/// Slack allowed on the Bloch norm.
pub const BLOCH_NORM_TOL: f64 = 1e-9;

/// Point on or inside the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochState {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = BlochState { x, y, z };
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(ZenoError::InvalidState(format!(
                "non-finite Bloch vector {b:?}"
            )));
        }
        if b.norm() > 1.0 + BLOCH_NORM_TOL {
            return Err(ZenoError::InvalidState(format!(
                "Bloch norm {} exceeds 1",
                b.norm()
            )));
        }
        Ok(b)
    }

    /// |0⟩, the north pole.
    pub fn ground() -> Self {
        BlochState {
            x: 0.0,
            y: 0.0,
            z: 1.0,
        }
    }

    /// Point in the y–z plane at polar angle `theta`: `y = sin θ`, `z = cos θ`.
    pub fn from_angle(theta: f64) -> Self {
        BlochState {
            x: 0.0,
            y: theta.sin(),
            z: theta.cos(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        BlochState {
            x: v[0],
            y: v[1],
            z: v[2],
        }
    }

    pub fn distance(&self, other: &BlochState) -> f64 {
        let d = [self.x - other.x, self.y - other.y, self.z - other.z];
        (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    }
}

/// Hermitian, unit-trace, positive semidefinite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Mat2);

impl DensityMatrix {
    /// Validates the invariants before wrapping `m`.
    pub fn new(m: Mat2) -> Result<Self> {
        let herm = (m - m.dagger()).max_abs();
        if herm > STATE_TOL {
            return Err(ZenoError::InvalidState(format!(
                "not Hermitian (residual {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(ZenoError::InvalidState(format!("trace {tr} != 1")));
        }
        let rho = DensityMatrix(m);
        let (lo, _) = rho.eigenvalues();
        if lo < -STATE_TOL {
            return Err(ZenoError::InvalidState(format!(
                "negative eigenvalue {lo:e}"
            )));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = &self.0;
        let a = m.get(0, 0).re;
        let d = m.get(1, 1).re;
        let b = m.get(0, 1).norm();
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        (mean - rad, mean + rad)
    }

    /// `ρ = ½[[1+z, x−iy],[x+iy, 1−z]]`.
    pub fn from_bloch(b: &BlochState) -> Result<Self> {
        let b = BlochState::new(b.x, b.y, b.z)?;
        let half = 0.5;
        Ok(DensityMatrix(Mat2::new(
            (half * (1.0 + b.z)).into(),
            num_complex::Complex64::new(half * b.x, -half * b.y),
            num_complex::Complex64::new(half * b.x, half * b.y),
            (half * (1.0 - b.z)).into(),
        )))
    }

    pub fn to_bloch(&self) -> BlochState {
        let m = &self.0;
        let off = m.get(1, 0);
        BlochState {
            x: 2.0 * off.re,
            y: 2.0 * off.im,
            z: (m.get(0, 0) - m.get(1, 1)).re,
        }
    }
}

pub fn bloch_from_density(rho: &DensityMatrix) -> BlochState {
    rho.to_bloch()
}

pub fn density_from_bloch(b: &BlochState) -> Result<DensityMatrix> {
    DensityMatrix::from_bloch(b)
}

/// Kraus operators for the `r = 0` and `r = 1` ancilla outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub m0: Mat2,
    pub m1: Mat2,
}

impl KrausPair {
    /// Largest entry of `m0†m0 + m1†m1 − I`.
    pub fn completeness_residual(&self) -> f64 {
        (self.m0.dagger() * self.m0 + self.m1.dagger() * self.m1 - Mat2::identity()).max_abs()
    }
}

/// `m0 = diag(1, cos J dt)`, `m1 = diag(0, sin J dt)`.
pub fn kraus_pair(j_coupling: f64, dt: f64) -> KrausPair {
    let phase = j_coupling * dt;
    KrausPair {
        m0: Mat2::real_diag(1.0, phase.cos()),
        m1: Mat2::real_diag(0.0, phase.sin()),
    }
}

/// `U = exp(−i Ω_s σ_x dt) = cos(Ω_s dt) I − i sin(Ω_s dt) σ_x`.
///
/// No global phase is stripped, so a quarter turn `Ω_s dt = π/2` gives exactly
/// `−i σ_x`.
pub fn unitary_step(omega_s: f64, dt: f64) -> Mat2 {
    let phi = omega_s * dt;
    let c = phi.cos();
    let s = phi.sin();
    Mat2::identity().scale(c.into()) + Mat2::pauli_x().scale(-I * s)
}

/// Drive, coupling and timing for the repeated-measurement model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementParams {
    pub omega_s: f64,
    pub j_coupling: f64,
    pub dt: f64,
    pub alpha: f64,
    pub lambda: f64,
    /// Detector time; carried for bookkeeping, the post-selected update does not use it.
    pub tau: f64,
}

impl MeasurementParams {
    /// Builds from an explicit coupling `J`; `α = J² dt`.
    pub fn from_coupling(omega_s: f64, j_coupling: f64, dt: f64) -> Result<Self> {
        check_positive("omega_s", omega_s)?;
        check_positive("dt", dt)?;
        if !j_coupling.is_finite() {
            return Err(ZenoError::InvalidParameter(
                "j_coupling must be finite".into(),
            ));
        }
        let alpha = j_coupling * j_coupling * dt;
        Ok(MeasurementParams {
            omega_s,
            j_coupling,
            dt,
            alpha,
            lambda: alpha / (4.0 * omega_s),
            tau: 1.0,
        })
    }

    /// Builds from the continuum rate `α`; `J = √(α/dt)`.
    pub fn from_rate(omega_s: f64, alpha: f64, dt: f64) -> Result<Self> {
        check_positive("omega_s", omega_s)?;
        check_positive("dt", dt)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        Ok(MeasurementParams {
            omega_s,
            j_coupling: (alpha / dt).sqrt(),
            dt,
            alpha,
            lambda: alpha / (4.0 * omega_s),
            tau: 1.0,
        })
    }

    /// Builds from `λ`; `α = 4 Ω_s λ`.
    pub fn from_lambda(omega_s: f64, lambda: f64, dt: f64) -> Result<Self> {
        MeasurementParams::from_rate(omega_s, 4.0 * omega_s * lambda, dt)
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ZenoError::InvalidParameter(format!(
            "{name} must be > 0, got {v}"
        )))
    }
}

/// `ρ ← M⁰ U ρ U† M⁰† / Tr[·]`.
pub fn postselected_step(rho: &DensityMatrix, params: &MeasurementParams) -> Result<DensityMatrix> {
    let op = kraus_pair(params.j_coupling, params.dt).m0 * unitary_step(params.omega_s, params.dt);
    let unnorm = op.sandwich(rho.matrix());
    let trace = unnorm.trace().re;
    if trace <= TRACE_UNDERFLOW {
        return Err(ZenoError::NormalizationUnderflow { trace });
    }
    let m = unnorm.scale((1.0 / trace).into());
    // Enforce exact Hermiticity; the product leaves round-off in the off-diagonals.
    let sym = (m + m.dagger()).scale(0.5.into());
    Ok(DensityMatrix(sym))
}

/// Continuous-time drift of the post-selected dynamics.
///
/// `ẋ = −2Ω_s λ x z`, `ẏ = −2Ω_s z (1 + λ y)`, `ż = 2Ω_s (λ(1 − z²) + y)`.
pub fn drift_rhs(b: &BlochState, omega_s: f64, lambda: f64) -> [f64; 3] {
    let w = 2.0 * omega_s;
    [
        -w * lambda * b.x * b.z,
        -w * b.z * (1.0 + lambda * b.y),
        w * (lambda * (1.0 - b.z * b.z) + b.y),
    ]
}

/// Iterates [`postselected_step`] `n_steps` times. The returned sequence has
/// `n_steps + 1` entries, starting with `b0`.
pub fn mc_zeno_trajectory(
    b0: &BlochState,
    params: &MeasurementParams,
    n_steps: usize,
) -> Result<Vec<BlochState>> {
    if n_steps == 0 {
        return Err(ZenoError::InvalidParameter("n_steps must be >= 1".into()));
    }
    let mut rho = DensityMatrix::from_bloch(b0)?;
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(rho.to_bloch());
    for _ in 0..n_steps {
        rho = postselected_step(&rho, params)?;
        out.push(rho.to_bloch());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn kraus_limits() {
        let k = kraus_pair(2.0, 0.0);
        assert_eq!(k.m0, Mat2::identity());
        assert!(k.m1.max_abs() == 0.0);

        let k = kraus_pair(1.0, FRAC_PI_2);
        assert!((k.m0 - Mat2::real_diag(1.0, 0.0)).max_abs() < 1e-15);
        assert!((k.m1 - Mat2::real_diag(0.0, 1.0)).max_abs() < 1e-15);
    }

    #[test]
    fn kraus_completeness_direct() {
        // J dt = 0.3: cos² + sin² on the lower diagonal.
        let k = kraus_pair(3.0, 0.1);
        let c = 0.3f64.cos();
        let s = 0.3f64.sin();
        let sum = Mat2::real_diag(1.0, c * c + s * s);
        assert!((sum - Mat2::identity()).max_abs() < 1e-12);
        assert!(k.completeness_residual() < 1e-12);
    }

    #[test]
    fn unitary_cases() {
        assert!((unitary_step(0.7, 0.0) - Mat2::identity()).max_abs() < 1e-15);
        let flip = unitary_step(1.0, FRAC_PI_2);
        assert!((flip - Mat2::pauli_x().scale(-I)).max_abs() < 1e-15);
        let u = unitary_step(0.5, 0.1);
        assert!((u.dagger() * u - Mat2::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn bloch_conversions() {
        let rho = DensityMatrix::from_bloch(&BlochState::ground()).unwrap();
        assert_eq!(rho.to_bloch(), BlochState::ground());
        let down = DensityMatrix::from_bloch(&BlochState::new(0.0, 0.0, -1.0).unwrap()).unwrap();
        assert!((*down.matrix() - Mat2::real_diag(0.0, 1.0)).max_abs() < 1e-15);
        assert!(matches!(
            BlochState::new(0.0, 0.8, 0.8),
            Err(ZenoError::InvalidState(_))
        ));
    }

    #[test]
    fn density_rejects_bad_matrices() {
        let not_unit = Mat2::real_diag(1.0, 1.0);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = Mat2::real_diag(1.5, -0.5);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = Mat2::new(ONE.scale(0.5), ONE, ONE.scale(0.0), ONE.scale(0.5));
        assert!(DensityMatrix::new(non_herm).is_err());
    }

    #[test]
    fn ground_state_step_is_valid() {
        let p = MeasurementParams::from_coupling(0.5, 1.0, 1e-2).unwrap();
        let rho = DensityMatrix::from_bloch(&BlochState::ground()).unwrap();
        let next = postselected_step(&rho, &p).unwrap();
        assert!(DensityMatrix::new(*next.matrix()).is_ok());
    }

    #[test]
    fn underflow_on_projective_annihilation() {
        // J dt = π/2 kills |1⟩; Ω_s tiny so U barely mixes.
        let p = MeasurementParams::from_coupling(1e-30, FRAC_PI_2 / 1e-3, 1e-3).unwrap();
        let rho = DensityMatrix::from_bloch(&BlochState::new(0.0, 0.0, -1.0).unwrap()).unwrap();
        assert!(matches!(
            postselected_step(&rho, &p),
            Err(ZenoError::NormalizationUnderflow { .. })
        ));
    }

    #[test]
    fn fixed_point_moves_at_second_order() {
        let lambda = 1.5;
        let fp =
            BlochState::new(0.0, -1.0 / lambda, (1.0 - 1.0 / (lambda * lambda)).sqrt()).unwrap();
        let rho = DensityMatrix::from_bloch(&fp).unwrap();
        let mut moves = Vec::new();
        for dt in [1e-3, 5e-4] {
            let p = MeasurementParams::from_lambda(0.5, lambda, dt).unwrap();
            moves.push(
                postselected_step(&rho, &p)
                    .unwrap()
                    .to_bloch()
                    .distance(&fp),
            );
        }
        assert!(moves[0] < 1e-5, "{moves:?}");
        // Second order: halving dt divides the move by ~4.
        let ratio = moves[0] / moves[1];
        assert!((3.0..5.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn maximally_mixed_matches_first_order_update() {
        let p = MeasurementParams::from_coupling(0.5, 1.0, 1e-3).unwrap();
        let rho = DensityMatrix::from_bloch(&BlochState::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        let got = postselected_step(&rho, &p).unwrap().to_bloch();
        // First-order update at (0,0,0): Δz = 2Ω_s λ dt, Δx = Δy = 0.
        let expected_z = 2.0 * 0.5 * p.lambda * p.dt;
        assert!(got.x.abs() < 1e-12);
        assert!(got.y.abs() < 1e-6);
        assert!((got.z - expected_z).abs() < 1e-6 * 10.0 * p.dt);
    }

    #[test]
    fn drift_examples() {
        assert_eq!(
            drift_rhs(&BlochState::ground(), 0.5, 0.0),
            [-0.0, -1.0, 0.0]
        );
        let lambda = 1.5;
        let fp = BlochState {
            x: 0.0,
            y: -1.0 / lambda,
            z: (1.0 - 1.0 / (lambda * lambda)).sqrt(),
        };
        let d = drift_rhs(&fp, 0.5, lambda);
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn drift_matches_finite_difference_of_step() {
        let b = BlochState {
            x: 0.0,
            y: 0.4,
            z: 0.9165,
        };
        let dt = 1e-6;
        let p = MeasurementParams::from_lambda(0.5, 0.5, dt).unwrap();
        let rho = DensityMatrix::from_bloch(&b).unwrap();
        let next = postselected_step(&rho, &p).unwrap().to_bloch();
        let fd = [
            (next.x - b.x) / dt,
            (next.y - b.y) / dt,
            (next.z - b.z) / dt,
        ];
        let an = drift_rhs(&b, 0.5, 0.5);
        for k in 1..3 {
            assert!(
                (fd[k] - an[k]).abs() <= 1e-5 * an[k].abs(),
                "{k}: {} vs {}",
                fd[k],
                an[k]
            );
        }
        assert!(fd[0].abs() < 1e-9);
    }

    #[test]
    fn half_rabi_period_without_measurement() {
        let omega = 0.5;
        let n = 1000;
        let dt = PI / (2.0 * omega) / n as f64;
        let p = MeasurementParams::from_rate(omega, 0.0, dt).unwrap();
        let traj = mc_zeno_trajectory(&BlochState::ground(), &p, n).unwrap();
        assert_eq!(traj.len(), n + 1);
        let last = traj.last().unwrap();
        assert!((last.z + 1.0).abs() < 1e-9, "{last:?}");
    }

    #[test]
    fn zero_steps_rejected() {
        let p = MeasurementParams::from_rate(0.5, 1.0, 1e-3).unwrap();
        assert!(mc_zeno_trajectory(&BlochState::ground(), &p, 0).is_err());
    }
}
