//! Reduced `(θ, p_θ)` phase space of the post-selected qubit.
//!
//! With `y = sin θ`, `z = cos θ` the drift collapses to
//! `θ̇ = −2Ω_s(1 + λ sin θ)` and the stochastic Hamiltonian is
//! `H = −2Ω_s[p_θ(1 + λ sin θ) + λ(1 − cos θ)]`. Angles are measured on
//! `[−π, π]`, with the unmeasured evolution running from `0` toward `−π`.
//!
//! For `λ > 1` the nullclines `1 + λ sin θ = 0` produce two saddles
//! `P₁ = (θ₁, p_θ₁)` and `P₂ = (θ₂, p_θ₂)`: `θ` contracts at `P₁` and expands
//! at `P₂`, while `p_θ` does the opposite.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::measurement::check_positive;
use crate::rk4;

/// Below this `|1 + λ sin θ|` the energy curve is treated as singular.
pub const CURVE_SINGULAR_TOL: f64 = 1e-12;
/// `‖(θ̇, ṗ_θ)‖` below which a path is reported as stalled.
pub const STALL_TOL: f64 = 1e-10;
/// Distance to a saddle that raises the `near_critical` flag.
pub const NEAR_CRITICAL_TOL: f64 = 1e-6;

/// Maps `theta` onto `[−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = (theta + PI).rem_euclid(TAU) - PI;
    // rem_euclid maps π to −π; keep π itself.
    if w == -PI && theta > 0.0 {
        PI
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub p_theta: f64,
}

impl PhasePoint {
    /// Stores `theta` in its principal range.
    pub fn new(theta: f64, p_theta: f64) -> Self {
        PhasePoint {
            theta: wrap_angle(theta),
            p_theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseParams {
    pub omega_s: f64,
    pub lambda: f64,
}

impl PhaseParams {
    pub fn new(omega_s: f64, lambda: f64) -> Result<Self> {
        check_positive("omega_s", omega_s)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Ok(PhaseParams { omega_s, lambda })
    }
}

/// Scaled energy `E = −H / (2Ω_s)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct EnergyLevel(pub f64);

impl EnergyLevel {
    pub fn of(p: &PhasePoint, lambda: f64) -> Self {
        EnergyLevel(p.p_theta * (1.0 + lambda * p.theta.sin()) + lambda * (1.0 - p.theta.cos()))
    }
}

pub fn cdj_hamiltonian(p: &PhasePoint, params: &PhaseParams) -> f64 {
    -2.0 * params.omega_s * EnergyLevel::of(p, params.lambda).0
}

/// `(∂H/∂p_θ, −∂H/∂θ)`.
pub fn hamilton_rhs(p: &PhasePoint, params: &PhaseParams) -> [f64; 2] {
    let w = 2.0 * params.omega_s;
    let (s, c) = p.theta.sin_cos();
    [
        -w * (1.0 + params.lambda * s),
        w * params.lambda * (p.p_theta * c + s),
    ]
}

/// Jacobian of [`hamilton_rhs`] with rows `(θ̇, ṗ_θ)` and columns `(θ, p_θ)`.
pub fn jacobian(p: &PhasePoint, params: &PhaseParams) -> [[f64; 2]; 2] {
    let w = 2.0 * params.omega_s * params.lambda;
    let (s, c) = p.theta.sin_cos();
    [[-w * c, 0.0], [w * (c - p.p_theta * s), w * c]]
}

/// Momentum on the constant-energy curve `E` at angle `theta`.
pub fn p_theta_curve(theta: f64, lambda: f64, e: EnergyLevel) -> Result<f64> {
    let g = 1.0 + lambda * theta.sin();
    if g.abs() <= CURVE_SINGULAR_TOL {
        return Err(ZenoError::CurveSingularity { theta });
    }
    Ok((e.0 - lambda * (1.0 - theta.cos())) / g)
}

/// The two saddles that exist for `λ > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPointSet {
    pub theta1: f64,
    pub theta2: f64,
    pub p_theta1: f64,
    pub p_theta2: f64,
    /// `+2Ω_s√(λ²−1)`.
    pub exponent_plus: f64,
    /// `−2Ω_s√(λ²−1)`.
    pub exponent_minus: f64,
}

impl CriticalPointSet {
    pub fn p1(&self) -> PhasePoint {
        PhasePoint {
            theta: self.theta1,
            p_theta: self.p_theta1,
        }
    }

    pub fn p2(&self) -> PhasePoint {
        PhasePoint {
            theta: self.theta2,
            p_theta: self.p_theta2,
        }
    }
}

fn require_zeno(lambda: f64) -> Result<()> {
    if lambda > 1.0 {
        Ok(())
    } else {
        Err(ZenoError::NoZenoRegime { lambda })
    }
}

pub fn critical_points(params: &PhaseParams) -> Result<CriticalPointSet> {
    let lambda = params.lambda;
    require_zeno(lambda)?;
    let a = (1.0 / lambda).asin();
    let root = (lambda * lambda - 1.0).sqrt();
    let gamma = 2.0 * params.omega_s * root;
    Ok(CriticalPointSet {
        theta1: -a,
        theta2: a - PI,
        p_theta1: 1.0 / root,
        p_theta2: -1.0 / root,
        exponent_plus: gamma,
        exponent_minus: -gamma,
    })
}

/// Linear growth rates at both saddles, labelled by direction.
///
/// The Jacobian is lower triangular, so each rate belongs to one axis:
/// `θ` contracts at `P₁` and expands at `P₂`; `p_θ` expands at `P₁` and
/// contracts at `P₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityExponents {
    pub theta_at_p1: f64,
    pub p_theta_at_p1: f64,
    pub theta_at_p2: f64,
    pub p_theta_at_p2: f64,
}

impl StabilityExponents {
    /// `(+γ, −γ)` with `γ = 2Ω_s√(λ²−1)`.
    pub fn pair(&self) -> (f64, f64) {
        (self.p_theta_at_p1, self.theta_at_p1)
    }
}

pub fn stability_exponents(params: &PhaseParams) -> Result<StabilityExponents> {
    let cp = critical_points(params)?;
    Ok(StabilityExponents {
        theta_at_p1: cp.exponent_minus,
        p_theta_at_p1: cp.exponent_plus,
        theta_at_p2: cp.exponent_plus,
        p_theta_at_p2: cp.exponent_minus,
    })
}

/// `E = λ ∓ √(λ²−1)`, the energies of the curves through the saddles.
pub fn separatrix_energies(lambda: f64) -> Result<(EnergyLevel, EnergyLevel)> {
    if !(lambda >= 1.0) {
        return Err(ZenoError::NoZenoRegime { lambda });
    }
    let root = (lambda * lambda - 1.0).sqrt();
    Ok((EnergyLevel(lambda - root), EnergyLevel(lambda + root)))
}

/// Reference angle whose sine and cosine are known exactly. Offsets from it
/// keep `1 + λ sin θ` at full relative precision next to a nullcline.
#[derive(Debug, Clone, Copy)]
struct Anchor {
    angle: f64,
    sin: f64,
    cos: f64,
    /// `1 + λ sin(angle)`, exactly zero on a nullcline.
    g0: f64,
    critical: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct AnchorSet {
    lambda: f64,
    // (angle in [−π, π), sin, cos, g0, p at the saddle)
    bases: [(f64, f64, f64, f64, Option<f64>); 2],
    count: usize,
}

impl AnchorSet {
    fn new(lambda: f64) -> Self {
        if lambda >= 1.0 {
            let a = (1.0 / lambda).asin();
            let s = -1.0 / lambda;
            let c = (lambda * lambda - 1.0).sqrt() / lambda;
            let (p1, p2) = if lambda > 1.0 {
                let root = (lambda * lambda - 1.0).sqrt();
                (Some(1.0 / root), Some(-1.0 / root))
            } else {
                (None, None)
            };
            AnchorSet {
                lambda,
                bases: [(-a, s, c, 0.0, p1), (a - PI, s, -c, 0.0, p2)],
                count: if lambda > 1.0 { 2 } else { 1 },
            }
        } else {
            AnchorSet {
                lambda,
                bases: [(0.0, 0.0, 1.0, 1.0, None); 2],
                count: 1,
            }
        }
    }

    /// Anchor closest to `theta` (any branch).
    fn nearest(&self, theta: f64) -> Anchor {
        let mut best: Option<(f64, Anchor)> = None;
        for &(base, sin, cos, g0, critical) in &self.bases[..self.count] {
            let k = ((theta - base) / TAU).round();
            let angle = base + k * TAU;
            let d = (theta - angle).abs();
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((
                    d,
                    Anchor {
                        angle,
                        sin,
                        cos,
                        g0,
                        critical,
                    },
                ));
            }
        }
        best.expect("at least one anchor").1
    }

    fn trig(&self, a: &Anchor, eps: f64) -> (f64, f64, f64) {
        let (se, ce) = eps.sin_cos();
        let half = (0.5 * eps).sin();
        let one_minus_cos_eps = 2.0 * half * half;
        let sin = a.sin * ce + a.cos * se;
        let cos = a.cos * ce - a.sin * se;
        let g = a.g0 + self.lambda * (a.cos * se - a.sin * one_minus_cos_eps);
        (sin, cos, g)
    }

    /// `λ(1 − cos θ)` evaluated from the offset form.
    fn potential(&self, a: &Anchor, eps: f64) -> f64 {
        let (se, _) = eps.sin_cos();
        let half = (0.5 * eps).sin();
        let one_minus_cos_eps = 2.0 * half * half;
        self.lambda * ((1.0 - a.cos) + a.cos * one_minus_cos_eps + a.sin * se)
    }
}

/// One stored point of an integrated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    pub t: f64,
    /// Continuous angle, not wrapped.
    pub theta_unwrapped: f64,
    pub point: PhasePoint,
    /// `−H/(2Ω_s)` evaluated from the integrator's offset representation.
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathEnd {
    Completed,
    /// `‖rhs‖ < 1e-10`: the path is sitting on a fixed point.
    StalledAtFixedPoint {
        t: f64,
    },
    /// The momentum left the representable range.
    Overflow {
        t: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePath {
    pub samples: Vec<PhaseSample>,
    pub end: PathEnd,
    /// Set when the path came within 1e-6 of a saddle.
    pub near_critical: bool,
}

impl PhasePath {
    /// Largest `|H(t) − H(0)| / max(1, |H(0)|)` along the path.
    pub fn max_relative_energy_drift(&self) -> f64 {
        let e0 = self.samples[0].energy;
        let scale = e0.abs().max(1.0);
        self.samples
            .iter()
            .map(|s| (s.energy - e0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Default step `1e-3 / Ω_s`.
pub fn default_step(params: &PhaseParams) -> f64 {
    1e-3 / params.omega_s
}

/// Classic fourth-order Runge–Kutta on Hamilton's equations.
///
/// Internally the angle is carried as an offset from the nearest exact
/// critical angle (or from `0` when `λ < 1`); the ODE is unchanged.
pub fn integrate_phase_path(
    start: &PhasePoint,
    params: &PhaseParams,
    dt: f64,
    t_end: f64,
) -> Result<PhasePath> {
    check_positive("dt", dt)?;
    if !(t_end >= 0.0) {
        return Err(ZenoError::InvalidParameter(format!(
            "t_end must be >= 0, got {t_end}"
        )));
    }
    let anchors = AnchorSet::new(params.lambda);
    let w = 2.0 * params.omega_s;
    let lambda = params.lambda;

    let mut anchor = anchors.nearest(start.theta);
    let mut state = [start.theta - anchor.angle, start.p_theta];
    let n = rk4::step_count(dt, t_end);
    let mut samples = Vec::with_capacity(n + 1);
    let mut near_critical = false;

    let sample = |t: f64, anchor: &Anchor, s: &[f64; 2]| {
        let (_, _, g) = anchors.trig(anchor, s[0]);
        let theta = anchor.angle + s[0];
        PhaseSample {
            t,
            theta_unwrapped: theta,
            point: PhasePoint::new(theta, s[1]),
            energy: s[1] * g + anchors.potential(anchor, s[0]),
        }
    };

    samples.push(sample(0.0, &anchor, &state));
    let mut end = PathEnd::Completed;
    for i in 0..n {
        let t = (i as f64) * dt;
        let h = dt.min(t_end - t);
        let a = anchor;
        let rhs = |s: &[f64; 2]| {
            let (sin, cos, g) = anchors.trig(&a, s[0]);
            [-w * g, w * lambda * (s[1] * cos + sin)]
        };
        let r = rhs(&state);
        if r[0].hypot(r[1]) < STALL_TOL {
            end = PathEnd::StalledAtFixedPoint { t };
            break;
        }
        state = rk4::step(&rhs, &state, h);
        if !state[1].is_finite() || !state[0].is_finite() {
            end = PathEnd::Overflow { t: t + h };
            break;
        }
        let theta = anchor.angle + state[0];
        let next = anchors.nearest(theta);
        if next.angle != anchor.angle {
            state[0] += anchor.angle - next.angle;
            anchor = next;
        }
        if let Some(pc) = anchor.critical {
            if state[0].abs() < NEAR_CRITICAL_TOL && (state[1] - pc).abs() < NEAR_CRITICAL_TOL {
                near_critical = true;
            }
        }
        samples.push(sample(t + h, &anchor, &state));
    }
    Ok(PhasePath {
        samples,
        end,
        near_critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64) -> PhaseParams {
        PhaseParams::new(0.5, lambda).unwrap()
    }

    #[test]
    fn wrap_keeps_principal_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(-1.0), -1.0);
    }

    #[test]
    fn hamiltonian_trivial_cases() {
        let p = params(0.0);
        for theta in [-2.0, 0.3, 1.0] {
            let h = cdj_hamiltonian(&PhasePoint::new(theta, 0.7), &p);
            assert!((h + 2.0 * 0.5 * 0.7).abs() < 1e-15);
        }
        assert_eq!(
            cdj_hamiltonian(&PhasePoint::new(0.0, 0.0), &params(2.3)),
            0.0
        );
    }

    #[test]
    fn energy_at_first_saddle_is_lower_separatrix() {
        let p = params(1.5);
        let cp = critical_points(&p).unwrap();
        let e = -cdj_hamiltonian(&cp.p1(), &p) / (2.0 * p.omega_s);
        let (lo, hi) = separatrix_energies(1.5).unwrap();
        assert!((e - lo.0).abs() < 1e-12);
        assert!((lo.0 - 0.381_966_011_250_105).abs() < 1e-12);
        assert!((hi.0 - 2.618_033_988_749_895).abs() < 1e-12);
        // Rounded reference coordinates land within 1e-3 of the same energy.
        let rounded = -cdj_hamiltonian(&PhasePoint::new(-0.729, 0.894), &p) / (2.0 * p.omega_s);
        assert!((rounded - 0.382).abs() < 1e-3, "{rounded}");
    }

    #[test]
    fn rhs_trivial_and_at_saddles() {
        assert_eq!(
            hamilton_rhs(&PhasePoint::new(1.2, 0.4), &params(0.0)),
            [-1.0, 0.0]
        );
        let p = params(1.5);
        let cp = critical_points(&p).unwrap();
        for pt in [cp.p1(), cp.p2()] {
            let r = hamilton_rhs(&pt, &p);
            assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn curve_examples() {
        for theta in [-2.5, -1.0, 0.4, 2.0] {
            assert_eq!(p_theta_curve(theta, 0.0, EnergyLevel(0.3)).unwrap(), 0.3);
        }
        assert_eq!(p_theta_curve(0.0, 0.8, EnergyLevel(1.7)).unwrap(), 1.7);

        let lambda = 1.5;
        let (lo, _) = separatrix_energies(lambda).unwrap();
        let cp = critical_points(&params(lambda)).unwrap();
        let below = p_theta_curve(cp.theta1 - 1e-3, lambda, lo).unwrap();
        let above = p_theta_curve(cp.theta1 + 1e-3, lambda, lo).unwrap();
        assert!(below.min(above) < cp.p_theta1 && cp.p_theta1 < below.max(above));
        assert!((below - cp.p_theta1).abs() < 1e-2 && (above - cp.p_theta1).abs() < 1e-2);
    }

    #[test]
    fn curve_singular_at_nullcline() {
        let theta = -(1.0f64).asin() * 1.0; // λ = 1: nullcline at −π/2
        assert!(matches!(
            p_theta_curve(theta, 1.0, EnergyLevel(1.0)),
            Err(ZenoError::CurveSingularity { .. })
        ));
    }

    #[test]
    fn critical_point_reference_values() {
        let cp = critical_points(&params(1.5)).unwrap();
        assert!((cp.theta1 + 0.729).abs() < 1e-3);
        assert!((cp.p_theta1 - 0.894).abs() < 1e-3);
        assert!((cp.theta2 + 2.411).abs() < 1e-3);
        assert!((cp.p_theta2 + 0.894).abs() < 1e-3);
        let cp = critical_points(&params(1.2)).unwrap();
        assert!((cp.theta1 + 0.985).abs() < 1e-3);
        assert!((cp.p_theta1 - 1.507).abs() < 1e-3);
        assert!((cp.theta2 + 2.156).abs() < 1e-3);
    }

    #[test]
    fn critical_points_large_lambda_and_errors() {
        let cp = critical_points(&params(1e6)).unwrap();
        assert!(cp.theta1 < 0.0 && cp.theta1 > -1e-5);
        assert!(cp.theta2 > -PI && cp.theta2 < -PI + 1e-5);
        assert!(cp.p_theta1 < 1e-5);
        assert!(matches!(
            critical_points(&params(1.0)),
            Err(ZenoError::NoZenoRegime { .. })
        ));
        assert!(stability_exponents(&params(0.4)).is_err());
        assert!(separatrix_energies(0.99).is_err());
        let (lo, hi) = separatrix_energies(1.0).unwrap();
        assert_eq!((lo.0, hi.0), (1.0, 1.0));
    }

    #[test]
    fn exponents_and_slowing_down() {
        let ex = stability_exponents(&params(1.5)).unwrap();
        assert!((ex.p_theta_at_p1 - 1.118_033_988_749_895).abs() < 1e-12);
        assert_eq!(ex.theta_at_p1, -ex.p_theta_at_p1);
        assert_eq!(ex.theta_at_p2, ex.p_theta_at_p1);
        assert_eq!(ex.p_theta_at_p2, ex.theta_at_p1);
        let near_one = stability_exponents(&params(1.0 + 1e-10)).unwrap();
        assert!(near_one.pair().0 < 1e-4);
    }

    #[test]
    fn uniform_rotation_at_zero_lambda() {
        let p = params(0.0);
        let path = integrate_phase_path(&PhasePoint::new(0.0, 0.5), &p, 1e-2, 3.0).unwrap();
        for s in &path.samples {
            assert!((s.theta_unwrapped + 2.0 * 0.5 * s.t).abs() < 1e-10);
            assert!((s.point.p_theta - 0.5).abs() < 1e-10);
        }
        assert_eq!(path.end, PathEnd::Completed);
    }

    #[test]
    fn stalls_on_fixed_point() {
        let p = params(1.5);
        let cp = critical_points(&p).unwrap();
        let path = integrate_phase_path(&cp.p2(), &p, 1e-3, 1.0).unwrap();
        assert!(matches!(path.end, PathEnd::StalledAtFixedPoint { .. }));
    }

    #[test]
    fn zeno_path_localises_at_theta1() {
        let p = params(1.5);
        let (lo, hi) = separatrix_energies(1.5).unwrap();
        let e = EnergyLevel(0.5 * (lo.0 + hi.0));
        let start = PhasePoint::new(0.0, p_theta_curve(0.0, 1.5, e).unwrap());
        let path = integrate_phase_path(&start, &p, default_step(&p), 40.0).unwrap();
        let cp = critical_points(&p).unwrap();
        let mut prev = f64::INFINITY;
        for s in &path.samples {
            assert!(s.theta_unwrapped <= prev + 1e-15);
            assert!(s.theta_unwrapped >= cp.theta1 - 1e-12);
            prev = s.theta_unwrapped;
        }
        assert!((prev - cp.theta1).abs() < 1e-12);
        assert!(path.max_relative_energy_drift() < 1e-8);
    }

    #[test]
    fn rejects_bad_step() {
        let p = params(0.5);
        assert!(integrate_phase_path(&PhasePoint::new(0.0, 0.0), &p, 0.0, 1.0).is_err());
    }
}
