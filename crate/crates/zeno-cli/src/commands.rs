use std::f64::consts::PI;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use zeno::action::{self, linspace};
use zeno::diffusive;
use zeno::phase::{self, EnergyLevel, PathEnd, PhaseParams};
use zeno::{BlochState, DiffusiveParams, ExtendedState, NoiseKind, WienerStream, ZenoError};

use crate::output::{Cell, Table};
use crate::CliError;

pub const DEFAULT_OMEGA_S: f64 = 0.5;

fn require_grid(count: usize) -> Result<(), CliError> {
    if count < 2 {
        return Err(CliError::Validation(format!(
            "grid count must be >= 2, got {count}"
        )));
    }
    Ok(())
}

fn require_nonempty(name: &str, v: &[f64]) -> Result<(), CliError> {
    if v.is_empty() {
        return Err(CliError::Validation(format!("{name} list is empty")));
    }
    Ok(())
}

fn require_stride(stride: usize) -> Result<(), CliError> {
    if stride == 0 {
        return Err(CliError::Validation("stride must be >= 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Noise {
    #[default]
    Binary,
    Gaussian,
}

impl From<Noise> for NoiseKind {
    fn from(n: Noise) -> Self {
        match n {
            Noise::Binary => NoiseKind::Binary,
            Noise::Gaussian => NoiseKind::Gaussian,
        }
    }
}

// ---------------------------------------------------------------- portrait

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PortraitArgs {
    /// Drive frequency Ω_s (GHz) [default: 0.5]
    #[arg(long)]
    pub omega_s: Option<f64>,
    /// Measurement strength λ = α/(4Ω_s) [default: 1.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Comma-separated energy levels E = −H/(2Ω_s) [default: separatrices plus a spread]
    #[arg(long, value_delimiter = ',')]
    pub energies: Option<Vec<f64>>,
    /// First θ of the grid (rad) [default: −π]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_start: Option<f64>,
    /// Last θ of the grid (rad) [default: π]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_stop: Option<f64>,
    /// Grid points [default: 401]
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Portrait {
    pub omega_s: f64,
    pub lambda: f64,
    pub energies: Vec<f64>,
    pub theta_start: f64,
    pub theta_stop: f64,
    pub count: usize,
}

impl PortraitArgs {
    pub fn resolve(self) -> Result<Portrait, CliError> {
        let lambda = self.lambda.unwrap_or(1.5);
        let energies = match self.energies {
            Some(e) => e,
            None if lambda >= 1.0 => {
                let (lo, hi) = phase::separatrix_energies(lambda)?;
                vec![-1.0, 0.0, lo.0, 0.5 * (lo.0 + hi.0), hi.0, hi.0 + 1.0]
            }
            None => vec![-1.0, -0.5, 0.0, 0.5, 1.0, 2.0],
        };
        let r = Portrait {
            omega_s: self.omega_s.unwrap_or(DEFAULT_OMEGA_S),
            lambda,
            energies,
            theta_start: self.theta_start.unwrap_or(-PI),
            theta_stop: self.theta_stop.unwrap_or(PI),
            count: self.count.unwrap_or(401),
        };
        require_grid(r.count)?;
        require_nonempty("energies", &r.energies)?;
        PhaseParams::new(r.omega_s, r.lambda)?;
        Ok(r)
    }
}

impl Portrait {
    pub fn run(&self) -> Result<Table, CliError> {
        let mut t = Table::new(&["energy", "theta_rad", "p_theta"]);
        for &e in &self.energies {
            for theta in linspace(self.theta_start, self.theta_stop, self.count) {
                let p = match phase::p_theta_curve(theta, self.lambda, EnergyLevel(e)) {
                    Ok(p) => p,
                    Err(ZenoError::CurveSingularity { .. }) => f64::NAN,
                    Err(other) => return Err(other.into()),
                };
                t.push(vec![e.into(), theta.into(), p.into()]);
            }
        }
        Ok(t)
    }
}

// --------------------------------------------------------- critical-points

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CriticalArgs {
    /// Drive frequency Ω_s (GHz) [default: 0.5]
    #[arg(long)]
    pub omega_s: Option<f64>,
    /// Measurement strength λ, must exceed 1 [default: 1.5]
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Critical {
    pub omega_s: f64,
    pub lambda: f64,
}

impl CriticalArgs {
    pub fn resolve(self) -> Result<Critical, CliError> {
        let r = Critical {
            omega_s: self.omega_s.unwrap_or(DEFAULT_OMEGA_S),
            lambda: self.lambda.unwrap_or(1.5),
        };
        PhaseParams::new(r.omega_s, r.lambda)?;
        Ok(r)
    }
}

impl Critical {
    pub fn run(&self) -> Result<Table, CliError> {
        let params = PhaseParams::new(self.omega_s, self.lambda)?;
        let cp = phase::critical_points(&params)?;
        let ex = phase::stability_exponents(&params)?;
        let mut t = Table::new(&[
            "point",
            "theta_rad",
            "p_theta",
            "energy",
            "rate_theta_per_ns",
            "rate_p_theta_per_ns",
        ]);
        for (name, p, rt, rp) in [
            ("P1", cp.p1(), ex.theta_at_p1, ex.p_theta_at_p1),
            ("P2", cp.p2(), ex.theta_at_p2, ex.p_theta_at_p2),
        ] {
            let e = EnergyLevel::of(&p, self.lambda).0;
            t.push(vec![
                name.into(),
                p.theta.into(),
                p.p_theta.into(),
                e.into(),
                rt.into(),
                rp.into(),
            ]);
        }
        Ok(t)
    }
}

// ------------------------------------------------------------------ action

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ActionArgs {
    /// Measurement strength λ [default: 0.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Initial angle θ_i (rad) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_i: Option<f64>,
    /// First final angle θ_f (rad) [default: −π]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_start: Option<f64>,
    /// Last final angle θ_f (rad) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_stop: Option<f64>,
    /// Grid points [default: 101]
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Action {
    pub lambda: f64,
    pub theta_i: f64,
    pub theta_start: f64,
    pub theta_stop: f64,
    pub count: usize,
}

impl ActionArgs {
    pub fn resolve(self) -> Result<Action, CliError> {
        let r = Action {
            lambda: self.lambda.unwrap_or(0.5),
            theta_i: self.theta_i.unwrap_or(0.0),
            theta_start: self.theta_start.unwrap_or(-PI),
            theta_stop: self.theta_stop.unwrap_or(0.0),
            count: self.count.unwrap_or(101),
        };
        require_grid(r.count)?;
        Ok(r)
    }
}

impl Action {
    pub fn run(&self) -> Result<Table, CliError> {
        let mut t = Table::new(&["theta_f_rad", "action_closed_form", "action_quadrature"]);
        for theta_f in linspace(self.theta_start, self.theta_stop, self.count) {
            let closed = action::action_closed_form(self.theta_i, theta_f, self.lambda)?.0;
            let quad = match action::action_quadrature(self.theta_i, theta_f, self.lambda) {
                Ok(a) => a.0,
                Err(ZenoError::IntegrandSingular { .. }) => f64::NAN,
                Err(other) => return Err(other.into()),
            };
            t.push(vec![theta_f.into(), closed.into(), quad.into()]);
        }
        Ok(t)
    }
}

// --------------------------------------------------------- transition-time

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TransitionArgs {
    /// Drive frequency Ω_s (GHz) [default: 0.5]
    #[arg(long)]
    pub omega_s: Option<f64>,
    /// Comma-separated λ values in [0, 1) [default: 0,0.5]
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Transition {
    pub omega_s: f64,
    pub lambda: Vec<f64>,
}

impl TransitionArgs {
    pub fn resolve(self) -> Result<Transition, CliError> {
        let r = Transition {
            omega_s: self.omega_s.unwrap_or(DEFAULT_OMEGA_S),
            lambda: self.lambda.unwrap_or_else(|| vec![0.0, 0.5]),
        };
        require_nonempty("lambda", &r.lambda)?;
        Ok(r)
    }
}

impl Transition {
    pub fn run(&self) -> Result<Table, CliError> {
        let mut t = Table::new(&["lambda", "transition_time_ns", "frequency_per_ns"]);
        for &l in &self.lambda {
            let time = action::transition_time_sub_zeno(l, self.omega_s)?;
            t.push(vec![l.into(), time.into(), (1.0 / time).into()]);
        }
        Ok(t)
    }
}

// -------------------------------------------------------- zeno-frequencies

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FrequencyArgs {
    /// Drive frequency Ω_s (GHz) [default: 0.5]
    #[arg(long)]
    pub omega_s: Option<f64>,
    /// Comma-separated λ values above 1 [default: 1.2,1.5]
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Angular cutoff ε around the critical angles (rad) [default: 1e-3]
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Frequency {
    pub omega_s: f64,
    pub lambda: Vec<f64>,
    pub epsilon: f64,
}

impl FrequencyArgs {
    pub fn resolve(self) -> Result<Frequency, CliError> {
        let r = Frequency {
            omega_s: self.omega_s.unwrap_or(DEFAULT_OMEGA_S),
            lambda: self.lambda.unwrap_or_else(|| vec![1.2, 1.5]),
            epsilon: self.epsilon.unwrap_or(action::DEFAULT_EPSILON),
        };
        require_nonempty("lambda", &r.lambda)?;
        Ok(r)
    }
}

impl Frequency {
    pub fn run(&self) -> Result<Table, CliError> {
        let mut t = Table::new(&[
            "lambda",
            "epsilon_rad",
            "t1_ns",
            "t12_ns",
            "t2_ns",
            "omega1_per_ns",
            "omega12_per_ns",
            "omega2_per_ns",
        ]);
        for &l in &self.lambda {
            let f = action::zeno_frequencies(l, self.omega_s, self.epsilon)?;
            t.push(vec![
                l.into(),
                f.epsilon.into(),
                f.t1.into(),
                f.t12.into(),
                f.t2.into(),
                f.omega1.into(),
                f.omega12.into(),
                f.omega2.into(),
            ]);
        }
        Ok(t)
    }
}

// ----------------------------------------------------------------- density

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DensityArgs {
    /// Comma-separated λ values [default: 0,0.05,0.5,1.5]
    #[arg(long, value_delimiter = ',')]
    pub lambda: Option<Vec<f64>>,
    /// Initial angle θ_i (rad) [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub theta_i: Option<f64>,
    /// First z_f of the grid [default: −0.999]
    #[arg(long, allow_hyphen_values = true)]
    pub z_start: Option<f64>,
    /// Last z_f of the grid [default: 0.999]
    #[arg(long, allow_hyphen_values = true)]
    pub z_stop: Option<f64>,
    /// Grid points [default: 201]
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Density {
    pub lambda: Vec<f64>,
    pub theta_i: f64,
    pub z_start: f64,
    pub z_stop: f64,
    pub count: usize,
}

impl DensityArgs {
    pub fn resolve(self) -> Result<Density, CliError> {
        let r = Density {
            lambda: self.lambda.unwrap_or_else(|| vec![0.0, 0.05, 0.5, 1.5]),
            theta_i: self.theta_i.unwrap_or(0.0),
            z_start: self.z_start.unwrap_or(-0.999),
            z_stop: self.z_stop.unwrap_or(0.999),
            count: self.count.unwrap_or(201),
        };
        require_grid(r.count)?;
        require_nonempty("lambda", &r.lambda)?;
        Ok(r)
    }
}

impl Density {
    pub fn run(&self) -> Result<Table, CliError> {
        let grid = linspace(self.z_start, self.z_stop, self.count);
        let mut t = Table::new(&["lambda", "z_f", "density"]);
        for &l in &self.lambda {
            for p in action::final_state_density(l, self.theta_i, &grid)? {
                t.push(vec![l.into(), p.z_f.into(), p.density.into()]);
            }
        }
        Ok(t)
    }
}

// ------------------------------------------------ shared diffusive options

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffusiveArgs {
    /// Drive frequency Ω_s (GHz) [default: 0.5]
    #[arg(long)]
    pub omega_s: Option<f64>,
    /// Measurement strength λ; ignored when --alpha is given [default: 1.5]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Measurement rate α (GHz); overrides --lambda
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Detector time τ (ns) [default: 1]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Time step (ns) [default: 1e-3]
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time (ns) [default: 10]
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Write every n-th step [default: 1]
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffusiveResolved {
    pub omega_s: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub tau: f64,
    pub dt: f64,
    pub t_end: f64,
    pub stride: usize,
}

impl DiffusiveArgs {
    fn resolve(self) -> Result<(DiffusiveResolved, DiffusiveParams), CliError> {
        let omega_s = self.omega_s.unwrap_or(DEFAULT_OMEGA_S);
        let tau = self.tau.unwrap_or(1.0);
        let params = match self.alpha {
            Some(a) => DiffusiveParams::new(omega_s, a, tau)?,
            None => DiffusiveParams::from_lambda(omega_s, self.lambda.unwrap_or(1.5), tau)?,
        };
        let r = DiffusiveResolved {
            omega_s,
            lambda: params.lambda,
            alpha: params.alpha,
            tau,
            dt: self.dt.unwrap_or(1e-3),
            t_end: self.t_end.unwrap_or(10.0),
            stride: self.stride.unwrap_or(1),
        };
        require_stride(r.stride)?;
        Ok((r, params))
    }
}

fn initial_bloch(x: f64, y: f64, z: f64) -> Result<BlochState, CliError> {
    let norm = (x * x + y * y + z * z).sqrt();
    if !((norm - 1.0).abs() < 1e-3) {
        return Err(CliError::Validation(format!(
            "initial state must be a pure state (|b| = 1 within 1e-3), got |b| = {norm}"
        )));
    }
    Ok(BlochState::from_array([x / norm, y / norm, z / norm]))
}

// -------------------------------------------------------------- trajectory

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: DiffusiveArgs,
    /// RNG seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Increment distribution [default: binary]
    #[arg(long, value_enum)]
    pub noise: Option<Noise>,
    /// Initial x [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Initial y [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Initial z [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    #[serde(flatten)]
    pub common: DiffusiveResolved,
    pub seed: u64,
    pub noise: Noise,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    #[serde(skip)]
    params: Option<DiffusiveParams>,
}

impl TrajectoryArgs {
    pub fn resolve(self) -> Result<Trajectory, CliError> {
        let (common, params) = self.common.resolve()?;
        let r = Trajectory {
            common,
            seed: self.seed.unwrap_or(7),
            noise: self.noise.unwrap_or_default(),
            x0: self.x0.unwrap_or(0.0),
            y0: self.y0.unwrap_or(0.0),
            z0: self.z0.unwrap_or(1.0),
            params: Some(params),
        };
        initial_bloch(r.x0, r.y0, r.z0)?;
        Ok(r)
    }
}

impl Trajectory {
    pub fn run(&self) -> Result<Table, CliError> {
        let params = self.params.expect("resolved");
        let c = &self.common;
        let mut stream = WienerStream::with_kind(self.seed, c.dt, self.noise.into())?;
        let b0 = initial_bloch(self.x0, self.y0, self.z0)?;
        let traj = diffusive::sample_trajectory(b0, &params, c.dt, c.t_end, &mut stream)?;
        let mut t = Table::new(&["t_ns", "x", "y", "z", "readout"]);
        for p in traj.iter().step_by(c.stride) {
            t.push(vec![
                p.t.into(),
                p.state.x.into(),
                p.state.y.into(),
                p.state.z.into(),
                p.readout.into(),
            ]);
        }
        Ok(t)
    }
}

// --------------------------------------------------------------------- mlp

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MlpArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: DiffusiveArgs,
    /// Initial x [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Initial y [default: 0.4]
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
    /// Initial z [default: 0.916]
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
    /// Initial p_x [default: 0.5]
    #[arg(long, allow_hyphen_values = true)]
    pub px0: Option<f64>,
    /// Initial p_y [default: 0.3]
    #[arg(long, allow_hyphen_values = true)]
    pub py0: Option<f64>,
    /// Initial p_z [default: 0.2]
    #[arg(long, allow_hyphen_values = true)]
    pub pz0: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mlp {
    #[serde(flatten)]
    pub common: DiffusiveResolved,
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub px0: f64,
    pub py0: f64,
    pub pz0: f64,
    #[serde(skip)]
    params: Option<DiffusiveParams>,
}

impl MlpArgs {
    pub fn resolve(self) -> Result<Mlp, CliError> {
        let (common, params) = self.common.resolve()?;
        Ok(Mlp {
            common,
            x0: self.x0.unwrap_or(0.0),
            y0: self.y0.unwrap_or(0.4),
            z0: self.z0.unwrap_or(0.916),
            px0: self.px0.unwrap_or(0.5),
            py0: self.py0.unwrap_or(0.3),
            pz0: self.pz0.unwrap_or(0.2),
            params: Some(params),
        })
    }
}

impl Mlp {
    /// Returns the table and a note on how the path ended.
    pub fn run(&self) -> Result<(Table, String), CliError> {
        let params = self.params.expect("resolved");
        let c = &self.common;
        let s0 = ExtendedState::new([self.x0, self.y0, self.z0], [self.px0, self.py0, self.pz0]);
        let path = diffusive::integrate_mlp(s0, &params, c.dt, c.t_end)?;
        let mut t = Table::new(&[
            "t_ns",
            "x",
            "y",
            "z",
            "p_x",
            "p_y",
            "p_z",
            "readout",
            "stochastic_hamiltonian",
        ]);
        for s in path.samples.iter().step_by(c.stride) {
            let st = &s.state;
            t.push(vec![
                s.t.into(),
                st.x.into(),
                st.y.into(),
                st.z.into(),
                st.p_x.into(),
                st.p_y.into(),
                st.p_z.into(),
                s.readout.into(),
                s.hamiltonian.into(),
            ]);
        }
        let note = match path.end {
            PathEnd::Completed => "path completed".to_string(),
            PathEnd::StalledAtFixedPoint { t } => {
                format!("path stalled at a fixed point at t = {t}")
            }
            PathEnd::Overflow { t } => format!("momenta overflowed at t = {t}; path truncated"),
        };
        Ok((t, note))
    }
}

// ---------------------------------------------------------------- ensemble

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub trajectory: TrajectoryArgs,
    /// Number of trajectories [default: 100]
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ensemble {
    #[serde(flatten)]
    pub trajectory: Trajectory,
    pub n: usize,
}

impl EnsembleArgs {
    pub fn resolve(self) -> Result<Ensemble, CliError> {
        let n = self.n.unwrap_or(100);
        if n == 0 {
            return Err(CliError::Validation("n must be >= 1".into()));
        }
        Ok(Ensemble {
            trajectory: self.trajectory.resolve()?,
            n,
        })
    }
}

impl Ensemble {
    pub fn run(&self) -> Result<Table, CliError> {
        let tr = &self.trajectory;
        let params = tr.params.expect("resolved");
        let c = &tr.common;
        let b0 = initial_bloch(tr.x0, tr.y0, tr.z0)?;
        let stats = diffusive::ensemble_stats(
            b0,
            &params,
            c.dt,
            c.t_end,
            self.n,
            tr.seed,
            tr.noise.into(),
        )?;
        let mut t = Table::new(&[
            "t_ns", "mean_x", "mean_y", "mean_z", "var_x", "var_y", "var_z",
        ]);
        for k in (0..stats.times.len()).step_by(c.stride) {
            let (m, v) = (stats.mean[k], stats.variance[k]);
            let row: Vec<Cell> = [stats.times[k], m[0], m[1], m[2], v[0], v[1], v[2]]
                .into_iter()
                .map(Cell::from)
                .collect();
            t.push(row);
        }
        Ok(t)
    }
}
