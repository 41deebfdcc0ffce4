//! Stochastic subgradient descent on persistence-based functionals.
//!
//! The step is `x <- x - alpha_i (g + xi)` with `g` a Clarke subgradient
//! surrogate ([`clarke_sample`]), `xi` isotropic Gaussian noise, and the
//! `alpha_i = alpha_0 / (1+i)^gamma` schedule whose exponent is constrained
//! to `(0.5, 1]` so the rates are square-summable but not summable.
//! Boundedness of the iterates is monitored, not enforced: crossing the
//! configured bound raises a warning flag (dispersal is the expected failure
//! mode of the unregularized hole-creation experiment).

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::filtration::PointCloud;
use crate::io::{self, RunConfig};
use crate::lift::{chain_rule, pers_jacobian, total_persistence, total_persistence_gradient, LiftError};
use crate::persistence::{barcode, reduce, Barcode};
use crate::svg;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("schedule exponent gamma must lie in (0.5, 1], got {0}")]
    BadSchedule(f64),
    #[error("functional returned a non-finite value at the current iterate")]
    NonFiniteValue,
    #[error("no differentiable point found near the iterate after {attempts} perturbations")]
    NoStratumFound { attempts: usize },
    #[error("experiment needs at least 4 points, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error("failed to write artifact: {0}")]
    Artifact(#[from] std::io::Error),
}

/// Learning-rate schedule `alpha_i = alpha_0 / (1 + i)^gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    alpha0: f64,
    gamma: f64,
}

impl Schedule {
    pub fn new(alpha0: f64, gamma: f64) -> Result<Self, OptimError> {
        if !(gamma > 0.5 && gamma <= 1.0) || !alpha0.is_finite() || alpha0 <= 0.0 {
            return Err(OptimError::BadSchedule(gamma));
        }
        Ok(Self { alpha0, gamma })
    }

    pub fn rate(&self, step: usize) -> f64 {
        self.alpha0 / (1.0 + step as f64).powf(self.gamma)
    }
}

/// A scalar functional with a subgradient oracle. `subgradient` reports
/// detected non-differentiability so that [`clarke_sample`] can fall back to
/// a nearby stratum.
pub trait Functional {
    fn value(&self, x: &[f64]) -> f64;
    fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>, LiftError>;
    fn describe(&self) -> String;
}

/// One recorded step of a descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub value: f64,
    pub grad_norm: f64,
    pub sup_norm: f64,
}

/// Mutable state of a stochastic subgradient run.
#[derive(Debug, Clone)]
pub struct DescentState {
    pub x: Vec<f64>,
    pub step: usize,
    pub trace: Vec<TraceRow>,
    /// Largest Euclidean norm seen across the iterates.
    pub sup_norm: f64,
    /// Set once `sup_norm` exceeds the configured bound.
    pub bound_warning: bool,
    seed: u64,
    rng: ChaCha8Rng,
}

impl DescentState {
    pub fn new(x0: Vec<f64>, seed: u64) -> Self {
        let sup = norm(&x0);
        Self {
            x: x0,
            step: 0,
            trace: Vec::new(),
            sup_norm: sup,
            bound_warning: false,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A Clarke subdifferential element at `x`: the gradient where the functional
/// is differentiable, and otherwise the gradient at a random perturbation of
/// relative magnitude 1e-9, which lies in an adjacent top-dimensional stratum
/// with probability one (retried a bounded number of times).
pub fn clarke_sample(
    functional: &dyn Functional,
    x: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, OptimError> {
    const ATTEMPTS: usize = 64;
    match functional.subgradient(x) {
        Ok(g) => return Ok(g),
        Err(LiftError::Filtration(crate::filtration::FiltrationError::StratumBoundary)) => {}
        Err(e) => return Err(e.into()),
    }
    let scale = 1e-9 * x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    for _ in 0..ATTEMPTS {
        let perturbed: Vec<f64> = x
            .iter()
            .map(|v| v + scale * (rng.gen::<f64>() * 2.0 - 1.0))
            .collect();
        match functional.subgradient(&perturbed) {
            Ok(g) => return Ok(g),
            Err(LiftError::Filtration(crate::filtration::FiltrationError::StratumBoundary)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Err(OptimError::NoStratumFound { attempts: ATTEMPTS })
}

/// One descent step: evaluates the functional, samples a subgradient, applies
/// the noisy update, and appends to the trace.
pub fn sgd_step(
    state: &mut DescentState,
    functional: &dyn Functional,
    schedule: &Schedule,
    sigma: f64,
) -> Result<(), OptimError> {
    let value = functional.value(&state.x);
    if !value.is_finite() {
        return Err(OptimError::NonFiniteValue);
    }
    let mut rng = state.rng.clone();
    let grad = clarke_sample(functional, &state.x, &mut rng)?;
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(OptimError::NonFiniteValue);
    }
    state.trace.push(TraceRow {
        step: state.step,
        value,
        grad_norm: norm(&grad),
        sup_norm: state.sup_norm,
    });
    let rate = schedule.rate(state.step);
    for (xi, gi) in state.x.iter_mut().zip(&grad) {
        let noise: f64 = rng.sample(StandardNormal);
        *xi -= rate * (gi + sigma * noise);
    }
    state.rng = rng;
    state.step += 1;
    state.sup_norm = state.sup_norm.max(norm(&state.x));
    Ok(())
}

/// Runs `steps` descent steps (or until `stop` fires), monitoring the
/// boundedness assumption: the first time `sup ||x_i||` exceeds `bound`, a
/// warning is printed to stderr and flagged on the state.
pub fn run(
    functional: &dyn Functional,
    x0: Vec<f64>,
    schedule: &Schedule,
    sigma: f64,
    steps: usize,
    seed: u64,
    bound: f64,
    mut stop: impl FnMut(&DescentState) -> bool,
) -> Result<DescentState, OptimError> {
    let mut state = DescentState::new(x0, seed);
    for _ in 0..steps {
        sgd_step(&mut state, functional, schedule, sigma)?;
        if !state.bound_warning && state.sup_norm > bound {
            state.bound_warning = true;
            eprintln!(
                "warning: iterates escaped the bound ({:.3} > {:.3}) at step {}; {}",
                state.sup_norm,
                bound,
                state.step,
                "the objective admits unbounded descent"
            );
        }
        if stop(&state) {
            break;
        }
    }
    Ok(state)
}

/// Soft box constraint `lambda * sum_a max(0, ||a||_inf - 1)` over the points
/// of a planar cloud. The subgradient pushes each escaped point back along
/// its largest-magnitude coordinate (first such coordinate on ties).
pub fn box_regularizer(cloud: &PointCloud, lambda: f64) -> (f64, Vec<f64>) {
    let d = cloud.dim();
    let mut value = 0.0;
    let mut grad = vec![0.0; cloud.len() * d];
    for (i, p) in cloud.points().iter().enumerate() {
        let sup = p.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if sup > 1.0 {
            value += lambda * (sup - 1.0);
            let axis = p
                .iter()
                .position(|v| v.abs() == sup)
                .expect("some coordinate attains the sup norm");
            grad[i * d + axis] = lambda * p[axis].signum();
        }
    }
    (value, grad)
}

/// The hole-creation objective: minus the degree-`degree` total persistence
/// of the Rips filtration, plus the box regularizer.
pub struct HoleFunctional {
    pub dim: usize,
    pub degree: usize,
    pub lambda: f64,
}

impl Functional for HoleFunctional {
    fn value(&self, x: &[f64]) -> f64 {
        let cloud = PointCloud::from_flat(x, self.dim);
        let filtration = crate::filtration::rips_filtration(&cloud, self.degree + 1)
            .expect("flat clouds are always valid");
        let pers = total_persistence(&barcode(&reduce(&filtration, self.degree), self.degree));
        let (reg, _) = box_regularizer(&cloud, self.lambda);
        -pers + reg
    }

    fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>, LiftError> {
        let cloud = PointCloud::from_flat(x, self.dim);
        let (lifted, jacobian) = pers_jacobian(&cloud, self.degree)?;
        let mut grad = chain_rule(&total_persistence_gradient(lifted.k), &jacobian)?;
        for g in &mut grad {
            *g = -*g;
        }
        let (_, reg_grad) = box_regularizer(&cloud, self.lambda);
        for (g, r) in grad.iter_mut().zip(&reg_grad) {
            *g += r;
        }
        Ok(grad)
    }

    fn describe(&self) -> String {
        format!(
            "-(total persistence of H_{} Rips) + {} * box regularizer",
            self.degree, self.lambda
        )
    }
}

/// Everything the hole-creation experiment produces.
pub struct ExperimentResult {
    pub state: DescentState,
    pub initial: PointCloud,
    pub final_cloud: PointCloud,
    pub initial_barcode: Barcode,
    pub final_barcode: Barcode,
    pub config: RunConfig,
}

/// Samples `r` points uniformly in the square, maximizes degree-1 total
/// persistence under the box regularizer, and (optionally) writes the trace,
/// point, barcode, and figure artifacts into `out_dir`.
pub fn experiment_holes(
    config: &RunConfig,
    out_dir: Option<&Path>,
) -> Result<ExperimentResult, OptimError> {
    if config.r < 4 {
        return Err(OptimError::TooFewPoints(config.r));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let points: Vec<Vec<f64>> = (0..config.r)
        .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        .collect();
    let initial = PointCloud::new(points).expect("r >= 4 points");
    let degree = 1usize;
    let functional = HoleFunctional { dim: 2, degree, lambda: config.lambda };

    let alpha0 = if config.alpha0 > 0.0 {
        config.alpha0
    } else {
        0.1 * initial.diameter()
    };
    let schedule = Schedule::new(alpha0, config.gamma)?;
    let m = (2 * config.r) as f64;
    let bound = if config.bound > 0.0 { config.bound } else { 3.0 * m.sqrt() };

    let barcode_of = |cloud: &PointCloud| {
        let filtration = crate::filtration::rips_filtration(cloud, degree + 1)
            .expect("clouds stay valid");
        barcode(&reduce(&filtration, degree), degree)
    };
    let initial_barcode = barcode_of(&initial);

    let state = run(
        &functional,
        initial.to_flat(),
        &schedule,
        config.sigma,
        config.steps,
        config.seed.wrapping_add(1),
        bound,
        |_| false,
    )?;
    let final_cloud = PointCloud::from_flat(&state.x, 2);
    let final_barcode = barcode_of(&final_cloud);

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.csv"), io::trace_to_csv(&state.trace))?;
        std::fs::write(dir.join("points_initial.csv"), io::points_to_csv(&initial))?;
        std::fs::write(dir.join("barcode_initial.json"), io::barcode_to_json(&initial_barcode))?;
        std::fs::write(
            dir.join("barcode_initial.svg"),
            svg::persistence_diagram(&initial_barcode),
        )?;
        std::fs::write(dir.join("points_initial.svg"), svg::cloud_figure(initial.points()))?;
        if config.steps > 0 {
            std::fs::write(dir.join("points_final.csv"), io::points_to_csv(&final_cloud))?;
            std::fs::write(dir.join("barcode_final.json"), io::barcode_to_json(&final_barcode))?;
            std::fs::write(
                dir.join("barcode_final.svg"),
                svg::persistence_diagram(&final_barcode),
            )?;
            std::fs::write(dir.join("points_final.svg"), svg::cloud_figure(final_cloud.points()))?;
        }
    }

    Ok(ExperimentResult {
        state,
        initial,
        final_cloud,
        initial_barcode,
        final_barcode,
        config: config.clone(),
    })
}
