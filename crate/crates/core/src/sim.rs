//! Monte-Carlo simulation of the classical form
//!
//! ```text
//! dU = A₀ U dt + Σ_i A_i U dW^i + Σ_k B_k U dX^k
//! ```
//!
//! by a split step: Euler–Maruyama for drift and diffusion, with the Poisson
//! compensator `−ρ_k B_k dt` folded into the drift, followed by the exact
//! unitary factor `S_k = I + B_k/ρ_k` at every jump of `N^k`.
//!
//! Trajectory `j` draws from the ChaCha8 stream `j` of the configured seed, and
//! partial sums are merged in trajectory order, so estimates do not depend on
//! the number of worker threads.

use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::classify::ClassicalForm;
use crate::lindblad::{from_classical_form, semigroup_apply, LindbladError, LindbladGenerator};
use crate::matrix::{polar, unitarity_defect, ComplexMatrix, Tolerance};

type CM = ComplexMatrix<f64>;

const CHUNK: usize = 256;

/// Slope of the time-step bias allowance in [`compare_with_lindblad`].
pub const BIAS_PER_DT: f64 = 1.0;
/// Smallest acceptance threshold in [`compare_with_lindblad`].
pub const ERROR_FLOOR: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("observable is {found}x{found}, expected {expected}x{expected}")]
    Observable { expected: usize, found: usize },
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    pub n_traj: usize,
    pub seed: u64,
    /// Project onto the unitaries after every step.
    pub reunitarize: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { dt: 1e-3, t_final: 1.0, n_traj: 10_000, seed: 0, reunitarize: false }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok_time = self.dt.is_finite() && self.t_final.is_finite() && self.dt > 0.0 && self.t_final > 0.0;
        if !ok_time {
            return Err(SimError::Config(format!("dt = {} and t_final = {} must be positive", self.dt, self.t_final)));
        }
        if self.dt > self.t_final * (1.0 + 1e-12) {
            return Err(SimError::Config(format!("dt = {} exceeds t_final = {}", self.dt, self.t_final)));
        }
        if self.n_traj == 0 {
            return Err(SimError::Config("n_traj must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps and the step actually used, `t_final / steps`.
    pub fn steps(&self) -> (usize, f64) {
        let steps = ((self.t_final / self.dt).round() as usize).max(1);
        (steps, self.t_final / steps as f64)
    }
}

/// Drift and noise coefficients of one classical form with a Hamiltonian.
#[derive(Debug, Clone)]
pub struct Scheme {
    n: usize,
    /// `A₀ − Σ ρ_k B_k`.
    drift: CM,
    brownian: Vec<CM>,
    /// `(ρ_k², S_k)`.
    jumps: Vec<(f64, CM)>,
}

impl Scheme {
    /// `A₀ = −iH − ½ Σ A_i*A_i − ½ Σ B_k*B_k`.
    pub fn new(cf: &ClassicalForm<f64>, h: &CM) -> Self {
        let n = cf.n;
        let mut drift = h * Complex::new(0.0, -1.0);
        for e in &cf.brownian {
            drift -= e.a.adjoint() * &e.a * Complex::new(0.5, 0.0);
        }
        for e in &cf.poisson {
            drift -= e.b.adjoint() * &e.b * Complex::new(0.5, 0.0);
            drift -= &e.b * Complex::new(e.rho, 0.0);
        }
        Self {
            n,
            drift,
            brownian: cf.brownian.iter().map(|e| e.a.clone()).collect(),
            jumps: cf.poisson.iter().map(|e| (e.intensity, e.s.clone())).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn brownian_count(&self) -> usize {
        self.brownian.len()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// One step of length `dt` with standard normals `xi` (one per Brownian
    /// direction) and jump counts `counts` (one per Poisson direction),
    /// applied in direction order.
    pub fn step(&self, u: &CM, dt: f64, xi: &[f64], counts: &[u64]) -> CM {
        let mut next = u + &self.drift * u * Complex::new(dt, 0.0);
        let sq = dt.sqrt();
        for (a, x) in self.brownian.iter().zip(xi) {
            next += a * u * Complex::new(sq * x, 0.0);
        }
        for ((_, s), &k) in self.jumps.iter().zip(counts) {
            for _ in 0..k {
                next = s * next;
            }
        }
        next
    }
}

fn trajectory_rng(seed: u64, traj: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(traj);
    rng
}

fn reunitarized(u: CM) -> CM {
    match polar(&u) {
        Ok((w, _)) => w,
        Err(_) => u,
    }
}

/// Final `U` and the number of jumps in each Poisson direction.
fn run(scheme: &Scheme, config: &SimConfig, traj: u64) -> (CM, Vec<u64>) {
    let (steps, dt) = config.steps();
    let mut rng = trajectory_rng(config.seed, traj);
    let laws: Vec<Option<Poisson<f64>>> =
        scheme.jumps.iter().map(|(rate, _)| Poisson::new(rate * dt).ok()).collect();
    let mut u = CM::identity(scheme.n, scheme.n);
    let mut xi = vec![0.0; scheme.brownian.len()];
    let mut counts = vec![0u64; scheme.jumps.len()];
    let mut totals = vec![0u64; scheme.jumps.len()];
    for _ in 0..steps {
        for x in xi.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        for (c, law) in counts.iter_mut().zip(&laws) {
            *c = law.as_ref().map_or(0, |p| p.sample(&mut rng) as u64);
        }
        u = scheme.step(&u, dt, &xi, &counts);
        if config.reunitarize {
            u = reunitarized(u);
        }
        for (t, c) in totals.iter_mut().zip(&counts) {
            *t += c;
        }
    }
    (u, totals)
}

/// Final `U_t` of trajectory `traj`; deterministic in `(config.seed, traj)`.
pub fn simulate_trajectory(cf: &ClassicalForm<f64>, h: &CM, config: &SimConfig, traj: u64) -> CM {
    run(&Scheme::new(cf, h), config, traj).0
}

#[derive(Debug, Clone)]
pub struct SemigroupEstimate {
    /// Sample mean of `U_t* X U_t`.
    pub mean: CM,
    /// Largest per-entry standard error of the mean.
    pub stderr: f64,
    /// Mean of `‖U_t*U_t − I‖_F`.
    pub unitarity_defect: f64,
    /// Mean number of jumps per Poisson direction.
    pub mean_jumps: Vec<f64>,
    pub n_traj: usize,
}

#[derive(Clone)]
struct Partial {
    sum: CM,
    sum_sq: Vec<f64>,
    defect: f64,
    jumps: Vec<f64>,
}

impl Partial {
    fn zero(n: usize, k: usize) -> Self {
        Self { sum: CM::zeros(n, n), sum_sq: vec![0.0; n * n], defect: 0.0, jumps: vec![0.0; k] }
    }

    fn merge(mut self, other: &Partial) -> Self {
        self.sum += &other.sum;
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.defect += other.defect;
        for (a, b) in self.jumps.iter_mut().zip(&other.jumps) {
            *a += b;
        }
        self
    }
}

/// Monte-Carlo estimate of `𝒫_t(X) = E[U_t* X U_t]` at `t = config.t_final`.
pub fn estimate_semigroup(
    cf: &ClassicalForm<f64>,
    h: &CM,
    x: &CM,
    config: &SimConfig,
) -> Result<SemigroupEstimate, SimError> {
    config.validate()?;
    let n = cf.n;
    if x.shape() != (n, n) {
        return Err(SimError::Observable { expected: n, found: x.nrows() });
    }
    let scheme = Scheme::new(cf, h);
    let k = scheme.jump_count();
    let chunks: Vec<(usize, usize)> =
        (0..config.n_traj).step_by(CHUNK).map(|s| (s, (s + CHUNK).min(config.n_traj))).collect();
    let partials: Vec<Partial> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut p = Partial::zero(n, k);
            for traj in start..end {
                let (u, jumps) = run(&scheme, config, traj as u64);
                let y = u.adjoint() * x * &u;
                for (s, z) in p.sum_sq.iter_mut().zip(y.iter()) {
                    *s += z.norm_sqr();
                }
                p.sum += &y;
                p.defect += unitarity_defect(&u);
                for (a, j) in p.jumps.iter_mut().zip(jumps) {
                    *a += j as f64;
                }
            }
            p
        })
        .collect();
    let total = partials.iter().fold(Partial::zero(n, k), |acc, p| acc.merge(p));
    let count = config.n_traj as f64;
    let mean = total.sum / Complex::new(count, 0.0);
    let stderr = if config.n_traj > 1 {
        mean.iter()
            .zip(&total.sum_sq)
            .map(|(m, s)| {
                let var = ((s - count * m.norm_sqr()) / (count - 1.0)).max(0.0);
                (var / count).sqrt()
            })
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(SemigroupEstimate {
        mean,
        stderr,
        unitarity_defect: total.defect / count,
        mean_jumps: total.jumps.iter().map(|j| j / count).collect(),
        n_traj: config.n_traj,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub estimate: SemigroupEstimate,
    pub exact: CM,
    pub max_abs_error: f64,
    pub stderr: f64,
    /// `max(3·stderr + BIAS_PER_DT·dt, ERROR_FLOOR)`.
    pub threshold: f64,
    pub unitarity_defect: f64,
    pub pass: bool,
}

/// Compares an estimate with `exp(tℒ)(X)` for an arbitrary generator.
pub fn compare_estimate(estimate: SemigroupEstimate, g: &LindbladGenerator<f64>, x: &CM, config: &SimConfig) -> Comparison {
    let exact = semigroup_apply(g, x, config.t_final);
    let max_abs_error = (&estimate.mean - &exact).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let (_, dt) = config.steps();
    let threshold = (3.0 * estimate.stderr + BIAS_PER_DT * dt).max(ERROR_FLOOR);
    Comparison {
        stderr: estimate.stderr,
        unitarity_defect: estimate.unitarity_defect,
        pass: max_abs_error <= threshold,
        estimate,
        exact,
        max_abs_error,
        threshold,
    }
}

/// Simulates the classical form up to `t` and compares with the Lindblad
/// semigroup of the same form.
pub fn compare_with_lindblad(
    cf: &ClassicalForm<f64>,
    h: &CM,
    x: &CM,
    t: f64,
    config: &SimConfig,
) -> Result<Comparison, SimError> {
    let config = SimConfig { t_final: t, ..*config };
    let g = from_classical_form(cf, h, &Tolerance::default())?;
    let estimate = estimate_semigroup(cf, h, x, &config)?;
    Ok(compare_estimate(estimate, &g, x, &config))
}
