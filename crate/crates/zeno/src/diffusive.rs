//! Diffusive (Gaussian readout) measurement: stochastic trajectory sampling
//! and the six-dimensional most-likely-path system.
//!
//! The readout record follows `r dt = √τ dW`, so the stochastic kick that
//! enters the Bloch equations is `r √(α/τ) dt = √α dW`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::measurement::{check_positive, BlochState};
use crate::phase::{PathEnd, STALL_TOL};
use crate::rk4;

/// Momentum magnitude beyond which a most-likely path is reported as overflowing.
pub const MOMENTUM_OVERFLOW: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusiveParams {
    pub omega_s: f64,
    pub alpha: f64,
    pub tau: f64,
    pub lambda: f64,
}

impl DiffusiveParams {
    pub fn new(omega_s: f64, alpha: f64, tau: f64) -> Result<Self> {
        check_positive("omega_s", omega_s)?;
        check_positive("tau", tau)?;
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!(
                "alpha must be >= 0, got {alpha}"
            )));
        }
        Ok(Self {
            omega_s,
            alpha,
            tau,
            lambda: alpha / (4.0 * omega_s),
        })
    }

    pub fn from_lambda(omega_s: f64, lambda: f64, tau: f64) -> Result<Self> {
        check_positive("omega_s", omega_s)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ZenoError::InvalidParameter(format!(
                "lambda must be >= 0, got {lambda}"
            )));
        }
        Self::new(omega_s, 4.0 * omega_s * lambda, tau)
    }

    /// Whether a run of length `t_end` is long compared with the detector time,
    /// which the weak-coupling picture assumes.
    pub fn weak_coupling_holds(&self, t_end: f64) -> bool {
        t_end >= 10.0 * self.tau
    }
}

/// Conditioned Bloch drift for a given readout `r`.
pub fn sme_rhs(b: &BlochState, r: f64, params: &DiffusiveParams) -> [f64; 3] {
    let kick_rate = r * (params.alpha / params.tau).sqrt();
    drift_with_rate(&b.as_array(), kick_rate, params)
}

fn drift_with_rate(q: &[f64; 3], rate: f64, params: &DiffusiveParams) -> [f64; 3] {
    let [x, y, z] = *q;
    let (a, w) = (params.alpha, 2.0 * params.omega_s);
    [
        -0.5 * a * x * z + rate * y,
        -0.5 * a * y * z - rate * x - w * z,
        0.5 * a * (1.0 - z * z) + w * y,
    ]
}

/// Shape of the Wiener increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    /// `±√dt` with probability ½ each.
    #[default]
    Binary,
    /// `N(0, dt)`.
    Gaussian,
}

/// Seeded, reproducible source of Wiener increments.
#[derive(Debug, Clone)]
pub struct WienerStream {
    seed: u64,
    dt: f64,
    kind: NoiseKind,
    sqrt_dt: f64,
    rng: ChaCha8Rng,
}

impl WienerStream {
    pub fn new(seed: u64, dt: f64) -> Result<Self> {
        Self::with_kind(seed, dt, NoiseKind::Binary)
    }

    pub fn with_kind(seed: u64, dt: f64, kind: NoiseKind) -> Result<Self> {
        check_positive("dt", dt)?;
        Ok(Self {
            seed,
            dt,
            kind,
            sqrt_dt: dt.sqrt(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn next_increment(&mut self) -> f64 {
        match self.kind {
            NoiseKind::Binary => {
                if self.rng.gen::<bool>() {
                    self.sqrt_dt
                } else {
                    -self.sqrt_dt
                }
            }
            NoiseKind::Gaussian => self.sqrt_dt * self.rng.sample::<f64, _>(StandardNormal),
        }
    }
}

impl Iterator for WienerStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_increment())
    }
}

/// SplitMix64 finaliser, used to derive independent per-trajectory seeds.
pub fn split_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One stochastic step with a prescribed kick `√α dW`.
///
/// The measurement drift and Rabi precession are advanced with RK4, the kick
/// rotates about the z axis to first order, and the result is renormalised.
pub fn sme_step(
    b: &BlochState,
    kick: f64,
    params: &DiffusiveParams,
    dt: f64,
) -> Result<BlochState> {
    let q = rk4::step(
        &|q: &[f64; 3]| drift_with_rate(q, 0.0, params),
        &b.as_array(),
        dt,
    );
    let kicked = [q[0] + kick * q[1], q[1] - kick * q[0], q[2]];
    let norm = kicked.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(ZenoError::InvalidState(format!(
            "Bloch vector degenerated to norm {norm}"
        )));
    }
    Ok(BlochState::from_array(kicked.map(|v| v / norm)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: BlochState,
    /// Readout `r = √τ dW/dt` of the step that ended here; zero at `t = 0`.
    pub readout: f64,
}

pub fn sample_trajectory(
    b0: BlochState,
    params: &DiffusiveParams,
    dt: f64,
    t_end: f64,
    stream: &mut WienerStream,
) -> Result<Vec<TrajectoryPoint>> {
    check_positive("dt", dt)?;
    check_positive("t_end", t_end)?;
    let limit = params.tau / 10.0;
    if dt > limit {
        return Err(ZenoError::StepTooLarge { dt, limit });
    }
    if stream.dt() != dt {
        return Err(ZenoError::InvalidParameter(format!(
            "Wiener stream step {} does not match dt {dt}",
            stream.dt()
        )));
    }
    let n = rk4::step_count(dt, t_end);
    let sqrt_alpha = params.alpha.sqrt();
    let sqrt_tau = params.tau.sqrt();
    let mut out = Vec::with_capacity(n + 1);
    out.push(TrajectoryPoint {
        t: 0.0,
        state: b0,
        readout: 0.0,
    });
    let mut b = b0;
    for k in 1..=n {
        let dw = stream.next_increment();
        b = sme_step(&b, sqrt_alpha * dw, params, dt)?;
        out.push(TrajectoryPoint {
            t: k as f64 * dt,
            state: b,
            readout: sqrt_tau * dw / dt,
        });
    }
    Ok(out)
}

/// Bloch coordinates plus conjugate momenta of the most-likely-path system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtendedState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl ExtendedState {
    pub fn new(q: [f64; 3], p: [f64; 3]) -> Self {
        Self {
            x: q[0],
            y: q[1],
            z: q[2],
            p_x: p[0],
            p_y: p[1],
            p_z: p[2],
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.p_x, self.p_y, self.p_z]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            x: v[0],
            y: v[1],
            z: v[2],
            p_x: v[3],
            p_y: v[4],
            p_z: v[5],
        }
    }

    pub fn bloch(&self) -> BlochState {
        BlochState::from_array([self.x, self.y, self.z])
    }

    /// Optimal readout `r = √(ατ)(y p_x − x p_y)`.
    pub fn readout(&self, params: &DiffusiveParams) -> f64 {
        (params.alpha * params.tau).sqrt() * self.cross()
    }

    fn cross(&self) -> f64 {
        self.y * self.p_x - self.x * self.p_y
    }
}

/// Stochastic Hamiltonian `p·(q̇) − (α/2)(r²/(ατ) + 1 − z)` at the optimal readout.
pub fn stochastic_hamiltonian(s: &ExtendedState, params: &DiffusiveParams) -> f64 {
    let rate = params.alpha * s.cross();
    let q = drift_with_rate(&[s.x, s.y, s.z], rate, params);
    let c = s.cross();
    s.p_x * q[0] + s.p_y * q[1] + s.p_z * q[2] - 0.5 * params.alpha * (c * c + 1.0 - s.z)
}

/// Stochastic Hamiltonian for an arbitrary readout `r`; stationary in `r` at
/// [`ExtendedState::readout`].
pub fn stochastic_hamiltonian_at(s: &ExtendedState, r: f64, params: &DiffusiveParams) -> f64 {
    let q = sme_rhs(&s.bloch(), r, params);
    let penalty = if params.alpha > 0.0 {
        r * r / (params.alpha * params.tau)
    } else {
        0.0
    };
    s.p_x * q[0] + s.p_y * q[1] + s.p_z * q[2] - 0.5 * params.alpha * (penalty + 1.0 - s.z)
}

pub fn mlp_rhs(s: &ExtendedState, params: &DiffusiveParams) -> [f64; 6] {
    let (a, w) = (params.alpha, 2.0 * params.omega_s);
    let rate = a * s.cross();
    let [dx, dy, dz] = drift_with_rate(&[s.x, s.y, s.z], rate, params);
    let (x, y, z) = (s.x, s.y, s.z);
    let (px, py, pz) = (s.p_x, s.p_y, s.p_z);
    [
        dx,
        dy,
        dz,
        0.5 * a * z * px + rate * py,
        -rate * px + 0.5 * a * z * py - w * pz,
        0.5 * a * x * px + 0.5 * a * y * py + w * py + a * z * pz - 0.5 * a,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpSample {
    pub t: f64,
    pub state: ExtendedState,
    pub readout: f64,
    pub hamiltonian: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpPath {
    pub samples: Vec<MlpSample>,
    pub end: PathEnd,
}

impl MlpPath {
    pub fn last(&self) -> &MlpSample {
        self.samples.last().expect("paths hold the initial sample")
    }

    /// Largest `|𝓗 − 𝓗₀| / max(|𝓗₀|, 1)` along the path.
    pub fn max_relative_hamiltonian_drift(&self) -> f64 {
        let h0 = self.samples[0].hamiltonian;
        let scale = h0.abs().max(1.0);
        self.samples
            .iter()
            .map(|s| (s.hamiltonian - h0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// RK4 integration of the most-likely-path system.
///
/// Momenta are left free; the path stops early with `Overflow` once they pass
/// [`MOMENTUM_OVERFLOW`] or turn non-finite, and with `StalledAtFixedPoint`
/// when the whole vector field vanishes.
pub fn integrate_mlp(
    s0: ExtendedState,
    params: &DiffusiveParams,
    dt: f64,
    t_end: f64,
) -> Result<MlpPath> {
    check_positive("dt", dt)?;
    check_positive("t_end", t_end)?;
    let n = rk4::step_count(dt, t_end);
    let sample = |t: f64, s: ExtendedState| MlpSample {
        t,
        state: s,
        readout: s.readout(params),
        hamiltonian: stochastic_hamiltonian(&s, params),
    };
    let f = |v: &[f64; 6]| mlp_rhs(&ExtendedState::from_array(*v), params);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(sample(0.0, s0));
    let mut v = s0.as_array();
    for k in 1..=n {
        let t_prev = (k - 1) as f64 * dt;
        let rate = f(&v);
        if rate.iter().map(|d| d.abs()).fold(0.0, f64::max) < STALL_TOL {
            return Ok(MlpPath {
                samples,
                end: PathEnd::StalledAtFixedPoint { t: t_prev },
            });
        }
        let next = rk4::step(&f, &v, dt);
        if next.iter().any(|c| !c.is_finite())
            || next[3..].iter().any(|p| p.abs() > MOMENTUM_OVERFLOW)
        {
            return Ok(MlpPath {
                samples,
                end: PathEnd::Overflow { t: t_prev },
            });
        }
        v = next;
        samples.push(sample(k as f64 * dt, ExtendedState::from_array(v)));
    }
    Ok(MlpPath {
        samples,
        end: PathEnd::Completed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean: Vec<[f64; 3]>,
    /// Unbiased sample variance; zero when `n = 1`.
    pub variance: Vec<[f64; 3]>,
    pub count: usize,
    pub base_seed: u64,
}

impl EnsembleStats {
    /// Standard error of the mean of each coordinate at time index `k`.
    pub fn standard_error(&self, k: usize) -> [f64; 3] {
        self.variance[k].map(|v| (v / self.count as f64).sqrt())
    }
}

const ENSEMBLE_CHUNK: usize = 8;

struct Accumulator {
    count: usize,
    mean: Vec<[f64; 3]>,
    m2: Vec<[f64; 3]>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![[0.0; 3]; len],
            m2: vec![[0.0; 3]; len],
        }
    }

    fn push(&mut self, traj: &[TrajectoryPoint]) {
        self.count += 1;
        let n = self.count as f64;
        for (k, p) in traj.iter().enumerate() {
            let q = p.state.as_array();
            for i in 0..3 {
                let delta = q[i] - self.mean[k][i];
                self.mean[k][i] += delta / n;
                self.m2[k][i] += delta * (q[i] - self.mean[k][i]);
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.count == 0 {
            return;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            for i in 0..3 {
                let delta = other.mean[k][i] - self.mean[k][i];
                self.mean[k][i] += delta * nb / n;
                self.m2[k][i] += other.m2[k][i] + delta * delta * na * nb / n;
            }
        }
        self.count += other.count;
    }
}

/// Per-time mean and variance over `n` trajectories.
///
/// Trajectory `i` uses seed [`split_seed`]`(base_seed, i)`. Work is spread
/// over threads in fixed-size chunks that are merged in index order, so the
/// result does not depend on the number of threads.
pub fn ensemble_stats(
    b0: BlochState,
    params: &DiffusiveParams,
    dt: f64,
    t_end: f64,
    n: usize,
    base_seed: u64,
    kind: NoiseKind,
) -> Result<EnsembleStats> {
    if n == 0 {
        return Err(ZenoError::InvalidParameter(
            "ensemble size must be >= 1".into(),
        ));
    }
    check_positive("dt", dt)?;
    check_positive("t_end", t_end)?;
    let len = rk4::step_count(dt, t_end) + 1;
    let run_chunk = |c: usize| -> Result<Accumulator> {
        let mut acc = Accumulator::new(len);
        for i in c * ENSEMBLE_CHUNK..((c + 1) * ENSEMBLE_CHUNK).min(n) {
            let mut stream = WienerStream::with_kind(split_seed(base_seed, i as u64), dt, kind)?;
            acc.push(&sample_trajectory(b0, params, dt, t_end, &mut stream)?);
        }
        Ok(acc)
    };
    let chunks = n.div_ceil(ENSEMBLE_CHUNK);
    let threads = std::thread::available_parallelism()
        .map_or(1, |t| t.get())
        .min(chunks);
    let mut results: Vec<Option<Result<Accumulator>>> = (0..chunks).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                let run_chunk = &run_chunk;
                scope.spawn(move || {
                    (w..chunks)
                        .step_by(threads)
                        .map(|c| (c, run_chunk(c)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (c, r) in h.join().expect("ensemble worker panicked") {
                results[c] = Some(r);
            }
        }
    });
    let mut total = Accumulator::new(len);
    for r in results {
        total.merge(&r.expect("every chunk ran")?);
    }
    let variance = if n > 1 {
        total
            .m2
            .iter()
            .map(|m| m.map(|v| v / (n - 1) as f64))
            .collect()
    } else {
        vec![[0.0; 3]; len]
    };
    Ok(EnsembleStats {
        times: (0..len).map(|k| k as f64 * dt).collect(),
        mean: total.mean,
        variance,
        count: n,
        base_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat2;
    use crate::measurement::{density_from_bloch, kraus_pair, unitary_step, DensityMatrix};
    use num_complex::Complex64;

    fn params(lambda: f64) -> DiffusiveParams {
        DiffusiveParams::from_lambda(0.5, lambda, 1.0).unwrap()
    }

    #[test]
    fn param_validation() {
        assert!(DiffusiveParams::new(0.0, 1.0, 1.0).is_err());
        assert!(DiffusiveParams::new(0.5, -1.0, 1.0).is_err());
        assert!(DiffusiveParams::new(0.5, 1.0, 0.0).is_err());
        assert!((params(1.5).alpha - 3.0).abs() < 1e-15);
        assert!(params(1.5).weak_coupling_holds(30.0));
        assert!(!params(1.5).weak_coupling_holds(5.0));
    }

    #[test]
    fn rabi_flow_without_measurement() {
        let b = BlochState::from_array([0.3, -0.4, (1.0f64 - 0.25).sqrt()]);
        let d = sme_rhs(&b, 2.0, &params(0.0));
        assert_eq!(d, [0.0, -b.z, b.y]);
    }

    #[test]
    fn drift_vanishes_at_zeno_point() {
        let lambda = 1.5f64;
        let b =
            BlochState::from_array([0.0, -1.0 / lambda, (1.0 - 1.0 / (lambda * lambda)).sqrt()]);
        let d = sme_rhs(&b, 0.0, &params(lambda));
        assert!(d.iter().all(|c| c.abs() < 1e-15), "{d:?}");
    }

    #[test]
    fn binary_increments() {
        let mut s = WienerStream::new(3, 0.01).unwrap();
        assert!((0..1000).all(|_| (s.next_increment().abs() - 0.1).abs() < 1e-15));
    }

    #[test]
    fn gaussian_increment_moments() {
        let s = WienerStream::with_kind(11, 1e-2, NoiseKind::Gaussian).unwrap();
        let n = 200_000;
        let (sum, sq) = s.take(n).fold((0.0, 0.0), |(a, b), w| (a + w, b + w * w));
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 4.0 * (1e-2 / n as f64).sqrt());
        assert!((var - 1e-2).abs() / 1e-2 < 0.02);
    }

    #[test]
    fn split_seeds_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| split_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn step_too_large_and_mismatched_stream() {
        let p = DiffusiveParams::new(0.5, 1.0, 1e-3).unwrap();
        let mut s = WienerStream::new(1, 1e-3).unwrap();
        assert!(matches!(
            sample_trajectory(BlochState::ground(), &p, 1e-3, 1.0, &mut s),
            Err(ZenoError::StepTooLarge { .. })
        ));
        let mut s = WienerStream::new(1, 2e-3).unwrap();
        assert!(sample_trajectory(BlochState::ground(), &params(1.0), 1e-3, 1.0, &mut s).is_err());
    }

    /// Gaussian-readout Kraus step: measurement back-action, readout phase
    /// kick about z, then the drive.
    fn kraus_step(b: &BlochState, kick: f64, p: &DiffusiveParams, dt: f64) -> BlochState {
        let j = (p.alpha / dt).sqrt();
        let m0 = kraus_pair(j, dt).m0;
        let half = 0.5 * kick;
        let zero = Complex64::new(0.0, 0.0);
        let phase = Mat2::new(
            Complex64::from_polar(1.0, half),
            zero,
            zero,
            Complex64::from_polar(1.0, -half),
        );
        let m = m0 * phase * unitary_step(p.omega_s, dt);
        let rho = density_from_bloch(b).unwrap();
        let out = m.sandwich(rho.matrix());
        let tr = out.trace().re;
        DensityMatrix::new(out.scale((1.0 / tr).into()))
            .unwrap()
            .to_bloch()
    }

    #[test]
    fn one_step_matches_kraus_update_to_second_order() {
        let p = params(0.8);
        let b = BlochState::from_array([0.48, -0.6, 0.64]);
        let r = 0.7;
        let err = |dt: f64| {
            let kick = r * (p.alpha / p.tau).sqrt() * dt;
            sme_step(&b, kick, &p, dt)
                .unwrap()
                .distance(&kraus_step(&b, kick, &p, dt))
        };
        let (e1, e2) = (err(1e-3), err(5e-4));
        assert!(e1 < 1e-5, "{e1}");
        let ratio = e1 / e2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn trajectories_stay_pure_and_reproducible() {
        let p = params(1.5);
        let run = |seed| {
            let mut s = WienerStream::new(seed, 1e-3).unwrap();
            sample_trajectory(BlochState::ground(), &p, 1e-3, 2.0, &mut s).unwrap()
        };
        let a = run(9);
        assert_eq!(a.len(), 2001);
        assert!(a.iter().all(|pt| (pt.state.norm() - 1.0).abs() < 1e-12));
        assert!(a[1..]
            .iter()
            .all(|pt| (pt.readout.abs() - 1.0f64 / 1e-3f64.sqrt()).abs() < 1e-9));
        assert_eq!(a, run(9));
        assert_ne!(a, run(10));
    }

    #[test]
    fn hamiltonian_stationary_in_readout() {
        let p = params(1.5);
        let s = ExtendedState::new([0.2, 0.4, 0.894], [0.5, -0.3, 0.2]);
        let r = s.readout(&p);
        let h = 1e-5;
        let d = (stochastic_hamiltonian_at(&s, r + h, &p)
            - stochastic_hamiltonian_at(&s, r - h, &p))
            / (2.0 * h);
        assert!(d.abs() < 1e-8);
        assert!(
            (stochastic_hamiltonian_at(&s, r, &p) - stochastic_hamiltonian(&s, &p)).abs() < 1e-14
        );
    }

    #[test]
    fn mlp_reduces_to_rabi_without_measurement() {
        let s = ExtendedState::new([0.0, 0.0, 1.0], [0.0; 3]);
        let path = integrate_mlp(s, &params(0.0), 1e-3, 3.0).unwrap();
        for smp in path.samples.iter().step_by(100) {
            let t = smp.t;
            assert!((smp.state.y + t.sin()).abs() < 1e-10);
            assert!((smp.state.z - t.cos()).abs() < 1e-10);
            assert_eq!(smp.state.x, 0.0);
            assert_eq!([smp.state.p_x, smp.state.p_y, smp.state.p_z], [0.0; 3]);
        }
    }

    #[test]
    fn mlp_stalls_at_trivial_fixed_point() {
        let s = ExtendedState::new([0.0, 0.0, 1.0], [0.0; 3]);
        let p = DiffusiveParams::new(1e-12, 0.0, 1.0).unwrap();
        let path = integrate_mlp(s, &p, 1e-3, 1.0).unwrap();
        assert!(matches!(path.end, PathEnd::StalledAtFixedPoint { .. }));
    }

    #[test]
    fn ensemble_of_one_matches_single_run() {
        let p = params(1.2);
        let stats =
            ensemble_stats(BlochState::ground(), &p, 1e-3, 0.5, 1, 5, NoiseKind::Binary).unwrap();
        let mut s = WienerStream::new(split_seed(5, 0), 1e-3).unwrap();
        let traj = sample_trajectory(BlochState::ground(), &p, 1e-3, 0.5, &mut s).unwrap();
        for (m, pt) in stats.mean.iter().zip(&traj) {
            assert_eq!(*m, pt.state.as_array());
        }
        assert!(stats.variance.iter().all(|v| *v == [0.0; 3]));
    }

    #[test]
    fn ensemble_without_measurement_is_deterministic() {
        let stats = ensemble_stats(
            BlochState::ground(),
            &params(0.0),
            1e-3,
            1.0,
            20,
            1,
            NoiseKind::Gaussian,
        )
        .unwrap();
        let last = stats.mean.last().unwrap();
        assert!((last[1] + 1f64.sin()).abs() < 1e-10);
        assert!(stats
            .variance
            .iter()
            .all(|v| v.iter().all(|c| c.abs() < 1e-24)));
    }

    #[test]
    fn ensemble_rejects_empty() {
        assert!(ensemble_stats(
            BlochState::ground(),
            &params(1.0),
            1e-3,
            1.0,
            0,
            1,
            NoiseKind::Binary
        )
        .is_err());
    }
}
