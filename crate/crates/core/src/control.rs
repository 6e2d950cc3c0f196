//! GRAPE-style synthesis of piecewise-constant control waveforms driving a
//! lattice model's propagator to a target unitary.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::linalg::{expm_hermitian, hermitian_eig, ComplexMatrix, RngSeed, UnitaryMatrix, C64};

/// Piecewise-constant control schedule: one value per channel per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlWaveform {
    dt: f64,
    channel_names: Vec<String>,
    /// `values[channel][step]`.
    values: Vec<Vec<f64>>,
}

impl ControlWaveform {
    pub fn new(dt: f64, channel_names: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        if dt <= 0.0 {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if channel_names.len() != values.len() || values.is_empty() {
            return Err(Error::ChannelMismatch(format!(
                "{} names for {} channels",
                channel_names.len(),
                values.len()
            )));
        }
        let steps = values[0].len();
        if steps == 0 || values.iter().any(|v| v.len() != steps) {
            return Err(Error::InvalidParameter(
                "every channel needs the same positive step count".into(),
            ));
        }
        Ok(Self {
            dt,
            channel_names,
            values,
        })
    }

    /// Constant waveform over `steps` steps at the model's natural dt.
    pub fn constant(model: &LatticeModel, steps: usize, level: &[f64]) -> Result<Self> {
        if level.len() != model.num_channels() {
            return Err(Error::ChannelMismatch(format!(
                "{} levels for {} channels",
                level.len(),
                model.num_channels()
            )));
        }
        Self::new(
            model.natural_dt(),
            model.channel_names(),
            level.iter().map(|&v| vec![v; steps]).collect(),
        )
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.values[0].len()
    }

    pub fn num_channels(&self) -> usize {
        self.values.len()
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn get(&self, channel: usize, step: usize) -> f64 {
        self.values[channel][step]
    }

    pub fn set(&mut self, channel: usize, step: usize, value: f64) {
        self.values[channel][step] = value;
    }

    /// Control vector (one value per channel) at one step.
    fn step_controls(&self, step: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[step]).collect()
    }

    fn matches(&self, model: &LatticeModel) -> Result<()> {
        if self.num_channels() != model.num_channels() {
            return Err(Error::ChannelMismatch(format!(
                "waveform has {} channels, model needs {}",
                self.num_channels(),
                model.num_channels()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    Analytic,
    FiniteDifference,
}

/// Central-difference step for the finite-difference gradient.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrapeConfig {
    pub max_iterations: usize,
    /// Initial line-search step; grows on acceptance, shrinks by
    /// `backtracking` on rejection.
    pub initial_step: f64,
    pub backtracking: f64,
    pub gradient: GradientMethod,
    /// Stop when an accepted iteration improves fidelity by less than this.
    pub stall_threshold: f64,
    pub target_infidelity: f64,
    /// Seed for the initial-guess perturbation.
    pub seed: RngSeed,
    /// Amplitude of the seeded perturbation around the constant guess, in
    /// natural control units. Zero reproduces the pure constant guess.
    pub perturbation: f64,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            initial_step: 0.1,
            backtracking: 0.5,
            gradient: GradientMethod::Analytic,
            stall_threshold: 1e-14,
            target_infidelity: 1e-4,
            seed: RngSeed(0),
            perturbation: 1e-2,
        }
    }
}

impl GrapeConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be >= 1".into()));
        }
        if self.initial_step <= 0.0
            || !(0.0..1.0).contains(&self.backtracking)
            || self.backtracking == 0.0
        {
            return Err(Error::InvalidParameter(
                "initial_step must be positive and backtracking in (0, 1)".into(),
            ));
        }
        if self.target_infidelity <= 0.0 || self.stall_threshold < 0.0 {
            return Err(Error::InvalidParameter("thresholds must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrapeResult {
    pub waveform: ControlWaveform,
    /// Fidelity after each accepted iteration, starting from the guess.
    pub fidelity_trace: Vec<f64>,
    pub final_infidelity: f64,
    pub achieved: UnitaryMatrix,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// True when the target infidelity was reached.
    pub converged: bool,
}

/// Time-ordered product `U = U_K ... U_2 U_1` of the step propagators.
pub fn propagate(model: &LatticeModel, wf: &ControlWaveform) -> Result<UnitaryMatrix> {
    Ok(step_propagators(model, wf)?
        .into_iter()
        .fold(UnitaryMatrix::identity(model.dim()), |u, s| {
            UnitaryMatrix::try_new(s.matrix().mul(u.matrix())).expect("product of unitaries")
        }))
}

fn step_propagators(model: &LatticeModel, wf: &ControlWaveform) -> Result<Vec<UnitaryMatrix>> {
    wf.matches(model)?;
    (0..wf.steps())
        .map(|k| {
            let h = model
                .control_hamiltonian(&wf.step_controls(k))
                .map_err(|e| at_step(e, k))?;
            expm_hermitian(&h, wf.dt())
        })
        .collect()
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::ControlOutOfBounds { channel, value, .. } => Error::ControlOutOfBounds {
            channel,
            step,
            value,
        },
        other => other,
    }
}

/// `|Tr(U_tar^dag U)|^2 / d^2`.
pub fn fidelity(u: &UnitaryMatrix, u_tar: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != u_tar.dim() {
        return Err(Error::DimensionMismatch {
            left: u.dim(),
            right: u_tar.dim(),
        });
    }
    let d = u.dim() as f64;
    Ok(u_tar.matrix().adjoint().mul(u.matrix()).trace().norm_sqr() / (d * d))
}

/// `dF/dlambda` for every channel value, `[channel][step]`.
pub fn fidelity_gradient(
    model: &LatticeModel,
    wf: &ControlWaveform,
    u_tar: &UnitaryMatrix,
    method: GradientMethod,
) -> Result<Vec<Vec<f64>>> {
    match method {
        GradientMethod::Analytic => analytic_gradient(model, wf, u_tar),
        GradientMethod::FiniteDifference => finite_difference_gradient(model, wf, u_tar),
    }
}

/// Exact gradient via the eigenbasis of each step Hamiltonian:
/// `(dS)_mn = -i dt (dH)_mn e^{-i(w_m+w_n)dt/2} sinc((w_m - w_n)dt/2)`.
fn analytic_gradient(
    model: &LatticeModel,
    wf: &ControlWaveform,
    u_tar: &UnitaryMatrix,
) -> Result<Vec<Vec<f64>>> {
    wf.matches(model)?;
    let d = model.dim();
    if u_tar.dim() != d {
        return Err(Error::DimensionMismatch {
            left: u_tar.dim(),
            right: d,
        });
    }
    let k_steps = wf.steps();
    let dt = wf.dt();

    let mut eigs = Vec::with_capacity(k_steps);
    let mut props = Vec::with_capacity(k_steps);
    for k in 0..k_steps {
        let h = model
            .control_hamiltonian(&wf.step_controls(k))
            .map_err(|e| at_step(e, k))?;
        let (w, v) = hermitian_eig(&h)?;
        let s = ComplexMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|m| v.get(i, m) * C64::new(0.0, -w[m] * dt).exp() * v.get(j, m).conj())
                .sum()
        });
        eigs.push((w, v));
        props.push(s);
    }

    // Forward partial products P_k = S_k ... S_1 (P_0 = I).
    let mut forward = Vec::with_capacity(k_steps + 1);
    forward.push(ComplexMatrix::identity(d));
    for s in &props {
        let last = forward.last().unwrap();
        forward.push(s.mul(last));
    }
    // Backward partial products Q_k = S_K ... S_{k+1} (Q_K = I).
    let mut backward = vec![ComplexMatrix::identity(d); k_steps + 1];
    for k in (0..k_steps).rev() {
        backward[k] = backward[k + 1].mul(&props[k]);
    }

    let z = u_tar.matrix().adjoint().mul(&forward[k_steps]).trace();
    let d2 = (d * d) as f64;
    let mut grad = vec![vec![0.0; k_steps]; wf.num_channels()];
    for k in 0..k_steps {
        let (w, v) = &eigs[k];
        // X_k = P_{k-1} U_tar^dag Q_{k+1}; dz = Tr(X_k dS_k).
        let x = forward[k].mul(&u_tar.matrix().adjoint()).mul(&backward[k + 1]);
        let y = v.matrix().adjoint().mul(&x).mul(v.matrix());
        let phi = |m: usize, n: usize| -> C64 {
            let mean = -(w[m] + w[n]) * dt / 2.0;
            let half = (w[m] - w[n]) * dt / 2.0;
            let sinc = if half.abs() < 1e-8 {
                1.0 - half * half / 6.0
            } else {
                half.sin() / half
            };
            C64::new(0.0, mean).exp() * sinc * C64::new(0.0, -dt)
        };
        let controls = wf.step_controls(k);
        for c in 0..wf.num_channels() {
            let dh = model.control_derivative(&controls, c)?;
            let dh_eig = v.matrix().adjoint().mul(&dh).mul(v.matrix());
            let mut dz = C64::new(0.0, 0.0);
            for m in 0..d {
                for n in 0..d {
                    dz += y.get(n, m) * dh_eig.get(m, n) * phi(m, n);
                }
            }
            grad[c][k] = 2.0 * (z.conj() * dz).re / d2;
        }
    }
    Ok(grad)
}

fn finite_difference_gradient(
    model: &LatticeModel,
    wf: &ControlWaveform,
    u_tar: &UnitaryMatrix,
) -> Result<Vec<Vec<f64>>> {
    wf.matches(model)?;
    let mut grad = vec![vec![0.0; wf.steps()]; wf.num_channels()];
    let mut probe = wf.clone();
    for c in 0..wf.num_channels() {
        for k in 0..wf.steps() {
            let base = wf.get(c, k);
            probe.set(c, k, base + FD_STEP);
            let fp = fidelity(&propagate(model, &probe)?, u_tar)?;
            probe.set(c, k, base - FD_STEP);
            let fm = fidelity(&propagate(model, &probe)?, u_tar)?;
            probe.set(c, k, base);
            grad[c][k] = (fp - fm) / (2.0 * FD_STEP);
        }
    }
    Ok(grad)
}

/// Constant initial guess per family, before perturbation: spinor sits at
/// theta = pi/2 (both hoppings on), microscope at a small uniform bias.
fn initial_level(model: &LatticeModel) -> Vec<f64> {
    match model {
        LatticeModel::Spinor(_) => vec![std::f64::consts::FRAC_PI_2, 0.0],
        LatticeModel::Microscope(m) => vec![0.1 * m.hopping_scale; model.num_channels()],
    }
}

fn clamp_to_bounds(model: &LatticeModel, wf: &mut ControlWaveform) {
    if let LatticeModel::Microscope(m) = model {
        let sites = m.sites;
        for c in 0..wf.num_channels() {
            let (lo, hi) = if c < sites - 1 { m.hx_bounds } else { m.hz_bounds };
            for k in 0..wf.steps() {
                wf.set(c, k, wf.get(c, k).clamp(lo, hi));
            }
        }
    }
}

/// Gradient ascent with a backtracking (Armijo) line search from the
/// family's default initial guess.
pub fn grape_optimize(
    model: &LatticeModel,
    u_tar: &UnitaryMatrix,
    config: &GrapeConfig,
) -> Result<GrapeResult> {
    config.validate()?;
    let wf = initial_waveform(model, config)?;
    grape_optimize_from(model, u_tar, config, wf)
}

/// Default initial guess: constant levels plus the seeded perturbation.
pub fn initial_waveform(model: &LatticeModel, config: &GrapeConfig) -> Result<ControlWaveform> {
    initial_waveform_steps(model, config, model.default_steps())
}

/// Initial guess with an explicit step count.
pub fn initial_waveform_steps(
    model: &LatticeModel,
    config: &GrapeConfig,
    steps: usize,
) -> Result<ControlWaveform> {
    let mut wf = ControlWaveform::constant(model, steps, &initial_level(model))?;
    if config.perturbation > 0.0 {
        let scale = match model {
            LatticeModel::Spinor(_) => config.perturbation,
            LatticeModel::Microscope(m) => config.perturbation * m.hopping_scale,
        };
        let mut rng = config.seed.rng();
        for c in 0..wf.num_channels() {
            for k in 0..wf.steps() {
                let delta: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                wf.set(c, k, wf.get(c, k) + scale * delta);
            }
        }
        clamp_to_bounds(model, &mut wf);
    }
    Ok(wf)
}

/// Gradient ascent from an explicit starting waveform.
pub fn grape_optimize_from(
    model: &LatticeModel,
    u_tar: &UnitaryMatrix,
    config: &GrapeConfig,
    mut wf: ControlWaveform,
) -> Result<GrapeResult> {
    config.validate()?;
    let start = Instant::now();
    const GRAD_NORM_STOP: f64 = 1e-10;
    const ARMIJO: f64 = 1e-4;
    const MAX_BACKTRACKS: usize = 50;

    let mut f = fidelity(&propagate(model, &wf)?, u_tar)?;
    let mut trace = vec![f];
    let mut step = config.initial_step;
    let mut iterations = 0;

    while iterations < config.max_iterations && 1.0 - f > config.target_infidelity {
        if !f.is_finite() {
            return Err(Error::NonFiniteFidelity {
                iteration: iterations,
            });
        }
        let grad = fidelity_gradient(model, &wf, u_tar, config.gradient)?;
        let gnorm_sq: f64 = grad.iter().flatten().map(|g| g * g).sum();
        if gnorm_sq.sqrt() < GRAD_NORM_STOP {
            break;
        }

        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            let mut trial = wf.clone();
            for c in 0..trial.num_channels() {
                for k in 0..trial.steps() {
                    trial.set(c, k, trial.get(c, k) + step * grad[c][k]);
                }
            }
            clamp_to_bounds(model, &mut trial);
            let f_trial = fidelity(&propagate(model, &trial)?, u_tar)?;
            if f_trial >= f + ARMIJO * step * gnorm_sq {
                let gain = f_trial - f;
                wf = trial;
                f = f_trial;
                step *= 1.5;
                accepted = true;
                trace.push(f);
                iterations += 1;
                if gain < config.stall_threshold {
                    accepted = false; // flat region: stop after recording
                }
                break;
            }
            step *= config.backtracking;
        }
        if !accepted {
            break;
        }
    }

    let achieved = propagate(model, &wf)?;
    Ok(GrapeResult {
        final_infidelity: 1.0 - f,
        converged: 1.0 - f <= config.target_infidelity,
        waveform: wf,
        fidelity_trace: trace,
        achieved,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// One row of an infidelity scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanRow {
    pub dim: usize,
    pub targets: usize,
    pub mean_infidelity: f64,
    pub median_infidelity: f64,
    pub min_infidelity: f64,
    pub max_infidelity: f64,
    pub mean_iterations: f64,
}

/// Run `targets_per_dim` Haar targets through GRAPE for each model and
/// summarize the achieved infidelities. Target and guess seeds are derived
/// deterministically from `config.seed`.
pub fn infidelity_scan(
    models: &[LatticeModel],
    targets_per_dim: usize,
    config: &GrapeConfig,
) -> Result<Vec<ScanRow>> {
    if targets_per_dim == 0 {
        return Err(Error::InvalidParameter("need at least one target".into()));
    }
    let mut rows = Vec::with_capacity(models.len());
    for (mi, model) in models.iter().enumerate() {
        let d = model.dim();
        let mut infidelities = Vec::with_capacity(targets_per_dim);
        let mut iteration_sum = 0usize;
        for t in 0..targets_per_dim {
            let tag = (mi as u64) << 32 | t as u64;
            let target = crate::linalg::haar_unitary_seeded(
                d,
                RngSeed(config.seed.0.wrapping_add(0x9e37_79b9).wrapping_mul(tag | 1)),
            );
            let run_config = GrapeConfig {
                seed: RngSeed(config.seed.0 ^ tag.wrapping_mul(0x2545_f491_4f6c_dd1d)),
                ..*config
            };
            let result = grape_optimize(model, &target, &run_config)?;
            iteration_sum += result.iterations;
            infidelities.push(result.final_infidelity);
        }
        infidelities.sort_by(f64::total_cmp);
        let n = infidelities.len();
        let median = if n % 2 == 1 {
            infidelities[n / 2]
        } else {
            (infidelities[n / 2 - 1] + infidelities[n / 2]) / 2.0
        };
        rows.push(ScanRow {
            dim: d,
            targets: n,
            mean_infidelity: infidelities.iter().sum::<f64>() / n as f64,
            median_infidelity: median,
            min_infidelity: infidelities[0],
            max_infidelity: infidelities[n - 1],
            mean_iterations: iteration_sum as f64 / n as f64,
        });
    }
    Ok(rows)
}
