//! Stochastic action, transition times and final-state densities along the
//! reduced `θ` flow.
//!
//! Along a most-likely path the action is `A = ∫ F dt = ∫ F (dt/dθ) dθ` with
//! `F = −(α/2)(1 − cos θ)` and `θ̇ = −2Ω_s(1 + λ sin θ)`. Because
//! `α = 4Ω_s λ`, the integrand reduces to `λ(1 − cos θ)/(1 + λ sin θ)` and the
//! result depends only on `λ` and the endpoints, never on the energy of the
//! curve being followed.
//!
//! Angles here live on the real line: a path from `θ_i` to `θ_f` is the
//! straight segment between them, so going "the other way round" is expressed
//! by adding `2π` to one endpoint.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::measurement::check_positive;
use crate::quadrature;

/// Distance from a critical angle at which an endpoint counts as singular.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Absolute tolerance handed to the adaptive quadrature.
pub const QUAD_TOL: f64 = 1e-10;
/// Default angular cutoff around the critical angles.
pub const DEFAULT_EPSILON: f64 = 1e-3;
/// Exponent cap applied before normalising densities.
pub const DENSITY_LOG_CAP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ActionValue(pub f64);

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ZenoError::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if lambda == 1.0 {
        return Err(ZenoError::UnsupportedLambda { lambda });
    }
    Ok(())
}

/// Critical angles `θ₁, θ₂` in `[−π, π)` for `λ > 1`.
fn critical_angles(lambda: f64) -> (f64, f64) {
    let a = (1.0 / lambda).asin();
    (-a, a - PI)
}

/// Signed distance from `theta` to the nearest copy of `base`.
fn branch_distance(theta: f64, base: f64) -> f64 {
    let k = ((theta - base) / TAU).round();
    theta - (base + k * TAU)
}

fn check_endpoint(theta: f64, lambda: f64) -> Result<()> {
    if lambda > 1.0 {
        let (t1, t2) = critical_angles(lambda);
        if branch_distance(theta, t1).abs() < ENDPOINT_TOL
            || branch_distance(theta, t2).abs() < ENDPOINT_TOL
        {
            return Err(ZenoError::SingularEndpoint { theta });
        }
    }
    Ok(())
}

/// First nullcline strictly inside or on `[min(a,b), max(a,b)]`, if any.
fn nullcline_between(a: f64, b: f64, lambda: f64) -> Option<f64> {
    if lambda <= 1.0 {
        return None;
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (t1, t2) = critical_angles(lambda);
    [t1, t2]
        .into_iter()
        .filter_map(|base| {
            let k = ((lo - base) / TAU).ceil();
            let c = base + k * TAU;
            (c <= hi).then_some(c)
        })
        .min_by(f64::total_cmp)
}

/// Continuous antiderivative of `1/(1 + λ sin θ)` on any pole-free stretch.
///
/// Uses the half-angle substitution `t = tan(θ/2)`. For `λ < 1` the `atan`
/// branch is advanced by `π` per half-angle period so the result is continuous
/// through `θ = ±π`; for `λ > 1` the logarithmic form is already periodic.
pub fn reciprocal_antiderivative(theta: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return theta;
    }
    if lambda < 1.0 {
        let s = (1.0 - lambda * lambda).sqrt();
        let h = 0.5 * theta;
        let k = (h / PI).round();
        let hp = h - k * PI;
        2.0 / s * (((hp.tan() + lambda) / s).atan() + k * PI)
    } else {
        let s = (lambda * lambda - 1.0).sqrt();
        let t = (0.5 * theta).tan();
        ((t + lambda - s) / (t + lambda + s)).abs().ln() / s
    }
}

/// Closed-form action from `theta_i` to `theta_f`.
///
/// For `λ > 1` an interval that straddles a nullcline returns the finite
/// log-abs continuation of the antiderivative rather than an error; use
/// [`action_quadrature`] when the path must be pole-free.
pub fn action_closed_form(theta_i: f64, theta_f: f64, lambda: f64) -> Result<ActionValue> {
    check_lambda(lambda)?;
    check_endpoint(theta_i, lambda)?;
    check_endpoint(theta_f, lambda)?;
    if lambda == 0.0 || theta_i == theta_f {
        return Ok(ActionValue(0.0));
    }
    let g_i = 1.0 + lambda * theta_i.sin();
    let g_f = 1.0 + lambda * theta_f.sin();
    let arc = lambda
        * (reciprocal_antiderivative(theta_f, lambda) - reciprocal_antiderivative(theta_i, lambda));
    Ok(ActionValue(arc - (g_f / g_i).abs().ln()))
}

/// `F/θ̇` in units where only `λ` matters.
fn action_integrand(theta: f64, lambda: f64) -> f64 {
    lambda * (1.0 - theta.cos()) / (1.0 + lambda * theta.sin())
}

/// Adaptive quadrature of `∫ F (dt/dθ) dθ`; rejects intervals containing a
/// nullcline.
pub fn action_quadrature(theta_i: f64, theta_f: f64, lambda: f64) -> Result<ActionValue> {
    check_lambda(lambda)?;
    if let Some(theta) = nullcline_between(theta_i, theta_f, lambda) {
        return Err(ZenoError::IntegrandSingular { theta });
    }
    let r = quadrature::integrate(
        |t| action_integrand(t, lambda),
        theta_i,
        theta_f,
        QUAD_TOL,
        20_000,
    );
    Ok(ActionValue(r.value))
}

/// Time to go from `θ = 0` to `θ = −π` for `0 ≤ λ < 1`:
/// `T = [π + 2 atan(λ/√(1−λ²))] / (2Ω_s √(1−λ²))`.
pub fn transition_time_sub_zeno(lambda: f64, omega_s: f64) -> Result<f64> {
    check_positive("omega_s", omega_s)?;
    if !(lambda >= 0.0) {
        return Err(ZenoError::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    if lambda >= 1.0 {
        return Err(ZenoError::UnsupportedLambda { lambda });
    }
    let s = (1.0 - lambda * lambda).sqrt();
    Ok((PI + 2.0 * (lambda / s).atan()) / (2.0 * omega_s * s))
}

/// `|∫ dθ/θ̇|` between two angles on a pole-free stretch.
pub fn transit_time(theta_a: f64, theta_b: f64, lambda: f64, omega_s: f64) -> Result<f64> {
    check_positive("omega_s", omega_s)?;
    check_lambda(lambda)?;
    if let Some(theta) = nullcline_between(theta_a, theta_b, lambda) {
        return Err(ZenoError::IntegrandSingular { theta });
    }
    let g = reciprocal_antiderivative(theta_b, lambda) - reciprocal_antiderivative(theta_a, lambda);
    Ok(g.abs() / (2.0 * omega_s))
}

/// Segment frequencies in the Zeno regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZenoFrequencies {
    /// `0 → θ₁ + ε`.
    pub omega1: f64,
    /// `θ₂ + ε → θ₁ − ε`.
    pub omega12: f64,
    /// `θ₂ − ε → −π`.
    pub omega2: f64,
    pub t1: f64,
    pub t12: f64,
    pub t2: f64,
    pub epsilon: f64,
}

/// Largest admissible cutoff: every segment must keep positive length.
pub fn max_epsilon(lambda: f64) -> f64 {
    let a = (1.0 / lambda).asin();
    a.min(0.5 * PI - a)
}

fn check_zeno_epsilon(lambda: f64, epsilon: f64) -> Result<()> {
    check_lambda(lambda)?;
    if lambda <= 1.0 {
        return Err(ZenoError::UnsupportedLambda { lambda });
    }
    let max = max_epsilon(lambda);
    if !(epsilon > 0.0 && epsilon < max) {
        return Err(ZenoError::EpsilonTooLarge { epsilon, max });
    }
    Ok(())
}

pub fn zeno_frequencies(lambda: f64, omega_s: f64, epsilon: f64) -> Result<ZenoFrequencies> {
    check_zeno_epsilon(lambda, epsilon)?;
    let (t1, t2) = critical_angles(lambda);
    let seg1 = transit_time(0.0, t1 + epsilon, lambda, omega_s)?;
    let seg12 = transit_time(t2 + epsilon, t1 - epsilon, lambda, omega_s)?;
    let seg2 = transit_time(t2 - epsilon, -PI, lambda, omega_s)?;
    Ok(ZenoFrequencies {
        omega1: 1.0 / seg1,
        omega12: 1.0 / seg12,
        omega2: 1.0 / seg2,
        t1: seg1,
        t12: seg12,
        t2: seg2,
        epsilon,
    })
}

/// The two action comparisons around the stable angle `θ₁`.
///
/// Both saddle endpoints are pulled back by `ε` onto the arc being traversed:
/// the band arc `(θ₂, θ₁)` ends at `θ₂ + ε`, the outer arc ends at
/// `θ₂ + 2π − ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDiscontinuity {
    /// `θ₁ + ε → θ₂` round the outer arc (increasing `θ`).
    pub outer_from_above: ActionValue,
    /// `θ₁ − ε → θ₂` through the band (decreasing `θ`).
    pub band_from_below: ActionValue,
    /// `θ₂ → θ₁ − ε` through the band (increasing `θ`).
    pub band_toward_theta1: ActionValue,
    /// `θ₁ + ε → θ₂` round the outer arc (increasing `θ`).
    pub outer_same_direction: ActionValue,
}

impl ActionDiscontinuity {
    /// Opposite directions, each following its arc: share a sign.
    pub fn flow_aligned_pair(&self) -> (ActionValue, ActionValue) {
        (self.outer_from_above, self.band_from_below)
    }

    /// Same (increasing) direction on either side of `θ₁`: opposite signs.
    pub fn same_direction_pair(&self) -> (ActionValue, ActionValue) {
        (self.band_toward_theta1, self.outer_same_direction)
    }
}

pub fn action_discontinuity(lambda: f64, epsilon: f64) -> Result<ActionDiscontinuity> {
    check_zeno_epsilon(lambda, epsilon)?;
    let (t1, t2) = critical_angles(lambda);
    let outer = action_closed_form(t1 + epsilon, t2 + TAU - epsilon, lambda)?;
    Ok(ActionDiscontinuity {
        outer_from_above: outer,
        band_from_below: action_closed_form(t1 - epsilon, t2 + epsilon, lambda)?,
        band_toward_theta1: action_closed_form(t2 + epsilon, t1 - epsilon, lambda)?,
        outer_same_direction: outer,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub z_f: f64,
    pub density: f64,
}

/// Relative weight of each final height `z_f`, normalised to unit area.
///
/// Each `z_f` is reached at `θ_f = −arccos z_f`; its weight is
/// `exp A(θ_f → θ_i)`, the exponentiated action read from the final angle
/// back to the start. Exponents are capped at 700 before normalisation, which
/// only matters next to the `λ > 1` peak. Grid points that land on a critical
/// angle take the capped or vanishing limit of their neighbourhood.
pub fn final_state_density(lambda: f64, theta_i: f64, grid: &[f64]) -> Result<Vec<DensityPoint>> {
    check_lambda(lambda)?;
    check_endpoint(theta_i, lambda)?;
    if grid.len() < 2 {
        return Err(ZenoError::InvalidParameter(
            "density grid needs at least 2 points".into(),
        ));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ZenoError::InvalidParameter(
            "density grid must be strictly increasing".into(),
        ));
    }
    if grid.iter().any(|z| !(*z > -1.0 && *z < 1.0)) {
        return Err(ZenoError::InvalidParameter(
            "density grid must lie in (-1, 1)".into(),
        ));
    }
    let log_weight = |z: f64| -> Result<f64> {
        let theta_f = -z.acos();
        let a = match action_closed_form(theta_f, theta_i, lambda) {
            Err(ZenoError::SingularEndpoint { .. }) => {
                action_closed_form(theta_f + 10.0 * ENDPOINT_TOL, theta_i, lambda)?
            }
            other => other?,
        };
        Ok(a.0.min(DENSITY_LOG_CAP))
    };
    let weights = grid
        .iter()
        .map(|&z| log_weight(z).map(f64::exp))
        .collect::<Result<Vec<_>>>()?;
    let area: f64 = grid
        .windows(2)
        .zip(weights.windows(2))
        .map(|(z, w)| 0.5 * (z[1] - z[0]) * (w[0] + w[1]))
        .sum();
    Ok(grid
        .iter()
        .zip(weights)
        .map(|(&z_f, w)| DensityPoint {
            z_f,
            density: w / area,
        })
        .collect())
}

/// `count` equally spaced points on `[start, stop]`.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_actions() {
        assert_eq!(action_closed_form(-0.4, -0.4, 0.7).unwrap().0, 0.0);
        assert_eq!(action_closed_form(0.0, -PI, 0.0).unwrap().0, 0.0);
        assert_eq!(action_quadrature(0.3, 0.3, 1.7).unwrap().0, 0.0);
    }

    #[test]
    fn lambda_one_rejected() {
        assert!(matches!(
            action_closed_form(0.0, -1.0, 1.0),
            Err(ZenoError::UnsupportedLambda { .. })
        ));
        assert!(matches!(
            action_quadrature(0.0, -1.0, 1.0),
            Err(ZenoError::UnsupportedLambda { .. })
        ));
        assert!(matches!(
            transition_time_sub_zeno(1.0, 0.5),
            Err(ZenoError::UnsupportedLambda { .. })
        ));
    }

    #[test]
    fn singular_endpoint_and_integrand() {
        let (t1, t2) = critical_angles(1.5);
        assert!(matches!(
            action_closed_form(t1, 0.0, 1.5),
            Err(ZenoError::SingularEndpoint { .. })
        ));
        assert!(matches!(
            action_closed_form(0.0, t2 + TAU, 1.5),
            Err(ZenoError::SingularEndpoint { .. })
        ));
        assert!(matches!(
            action_quadrature(0.0, -1.0, 1.5),
            Err(ZenoError::IntegrandSingular { .. })
        ));
    }

    #[test]
    fn closed_form_matches_quadrature_half_turn() {
        let a = action_closed_form(0.0, -PI, 0.5).unwrap().0;
        let q = action_quadrature(0.0, -PI, 0.5).unwrap().0;
        assert!((a - q).abs() < 1e-6, "{a} vs {q}");
    }

    #[test]
    fn closed_form_matches_quadrature_in_band() {
        let (t1, t2) = critical_angles(1.5);
        let a = action_closed_form(t2 + 0.1, t1 - 0.1, 1.5).unwrap().0;
        let q = action_quadrature(t2 + 0.1, t1 - 0.1, 1.5).unwrap().0;
        assert!((a - q).abs() < 1e-6, "{a} vs {q}");
    }

    #[test]
    fn antiderivative_continuous_through_pi() {
        for lambda in [0.3, 0.9, 1.5] {
            let l = reciprocal_antiderivative(PI - 1e-9, lambda);
            let r = reciprocal_antiderivative(PI + 1e-9, lambda);
            assert!((l - r).abs() < 1e-7, "{lambda}: {l} {r}");
        }
    }

    #[test]
    fn transition_time_values() {
        assert!((transition_time_sub_zeno(0.0, 0.5).unwrap() - PI).abs() < 1e-12);
        let t = transition_time_sub_zeno(0.423, 0.5).unwrap();
        let q =
            quadrature::integrate(|th| 1.0 / (1.0 + 0.423 * th.sin()), -PI, 0.0, 1e-12, 1000).value;
        assert!((t - q).abs() < 1e-9, "{t} vs {q}");
        assert!(transition_time_sub_zeno(0.9999, 0.5).unwrap() > 100.0 * PI);
        assert!(transition_time_sub_zeno(-0.1, 0.5).is_err());
    }

    #[test]
    fn epsilon_bounds() {
        assert!(matches!(
            zeno_frequencies(1.5, 0.5, 0.9),
            Err(ZenoError::EpsilonTooLarge { .. })
        ));
        assert!(matches!(
            zeno_frequencies(1.5, 0.5, 0.0),
            Err(ZenoError::EpsilonTooLarge { .. })
        ));
        assert!(matches!(
            zeno_frequencies(0.5, 0.5, 1e-3),
            Err(ZenoError::UnsupportedLambda { .. })
        ));
    }

    #[test]
    fn frequencies_diverge_logarithmically_as_epsilon_shrinks() {
        let a = zeno_frequencies(1.5, 0.5, 1e-3).unwrap();
        let b = zeno_frequencies(1.5, 0.5, 1e-6).unwrap();
        let c = zeno_frequencies(1.5, 0.5, 1e-9).unwrap();
        for (x, y, z) in [
            (a.t1, b.t1, c.t1),
            (a.t12, b.t12, c.t12),
            (a.t2, b.t2, c.t2),
        ] {
            assert!(x < y && y < z);
            // Equal increments per decade of ε.
            assert!(((z - y) - (y - x)).abs() < 1e-3 * (y - x));
        }
    }

    #[test]
    fn density_requires_valid_grid() {
        assert!(final_state_density(0.5, 0.0, &[0.1]).is_err());
        assert!(final_state_density(0.5, 0.0, &[-1.0, 0.0]).is_err());
        assert!(final_state_density(0.5, 0.0, &[0.2, 0.1]).is_err());
    }

    #[test]
    fn density_flat_without_measurement() {
        let grid = linspace(-0.99, 0.99, 51);
        let d = final_state_density(0.0, 0.0, &grid).unwrap();
        assert!(d.iter().all(|p| (p.density - 1.0 / 1.98).abs() < 1e-12));
    }

    #[test]
    fn weak_measurement_density_leans_toward_south_pole() {
        let grid = linspace(-0.999, 0.999, 201);
        let d = final_state_density(0.05, 0.0, &grid).unwrap();
        let (argmax, _) = d
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.density.total_cmp(&b.1.density))
            .unwrap();
        assert_eq!(argmax, 0);
        let half = d.len() / 2;
        let lower: f64 = d[..half].iter().map(|p| p.density).sum();
        let upper: f64 = d[half + 1..].iter().map(|p| p.density).sum();
        assert!(lower > upper);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(-1.0, 1.0, 5);
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }
}
