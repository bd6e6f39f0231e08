//! Random-restart hill climbing for pure states of maximal global negativity.
//!
//! Proposals are `normalize(ψ + δη)` with `η` a unit complex Gaussian
//! direction, accepted only when the objective strictly increases. After
//! `stall_window` consecutive rejections the step shrinks by `shrink`; a
//! restart ends when the step falls below `min_step`, after
//! `max_iterations`, or once the objective reaches its upper bound of 1.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entanglement::{enumerate_bipartitions, global_entanglement, pure_global_entanglement, BipartitionFamilies};
use crate::error::{Error, Result};
use crate::linalg::{PureState, C64};
use crate::montecarlo::sample_seed;
use crate::states::{complex_gaussian, haar_random_state, save_state};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub n_qubits: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    pub initial_step: f64,
    pub shrink: f64,
    /// Accepted gains at or below this do not reset the stall counter.
    pub tolerance: f64,
    pub stall_window: usize,
    pub min_step: f64,
    pub seed: u64,
    /// Worker threads for concurrent restarts; 0 uses the global pool.
    pub workers: usize,
}

impl OptimizerConfig {
    pub fn new(n_qubits: usize, seed: u64) -> Self {
        Self {
            n_qubits,
            restarts: 20,
            max_iterations: 4000,
            initial_step: 0.3,
            shrink: 0.5,
            tolerance: 1e-12,
            stall_window: 200,
            min_step: 1e-6,
            seed,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(Error::Config(format!("step size must be positive, got {}", self.initial_step)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config(format!("shrink factor must lie in (0,1), got {}", self.shrink)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.stall_window == 0 {
            return Err(Error::Config("stall window must be at least 1".into()));
        }
        if !(self.min_step > 0.0) {
            return Err(Error::Config(format!("minimum step must be positive, got {}", self.min_step)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartSummary {
    pub index: usize,
    pub seed: u64,
    pub initial_value: f64,
    pub final_value: f64,
    pub iterations: usize,
    pub accepted: usize,
    pub final_step: f64,
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_state: PureState,
    pub best_value: f64,
    /// Best value seen so far after every iteration, restarts in index order.
    pub trace: Vec<f64>,
    pub restarts_summary: Vec<RestartSummary>,
}

impl OptimizationResult {
    pub fn best_restart(&self) -> &RestartSummary {
        self.restarts_summary
            .iter()
            .max_by(|a, b| a.final_value.total_cmp(&b.final_value).then(b.index.cmp(&a.index)))
            .expect("at least one restart")
    }

    /// Writes the best state as a state file and a JSON report next to it.
    pub fn persist(&self, config: &OptimizerConfig, state_path: &Path) -> Result<()> {
        save_state(&self.best_state, state_path)?;
        #[derive(Serialize)]
        struct Report<'a> {
            best_value: f64,
            best_restart: usize,
            iterations: usize,
            config: &'a OptimizerConfig,
            restarts: &'a [RestartSummary],
        }
        let report = Report {
            best_value: self.best_value,
            best_restart: self.best_restart().index,
            iterations: self.trace.len(),
            config,
            restarts: &self.restarts_summary,
        };
        let path = state_path.with_extension("report.json");
        crate::io::atomic_write(&path, serde_json::to_string_pretty(&report)?.as_bytes())
    }
}

/// Global negativity of `|ψ><ψ|`, computed on the dense projector.
pub fn evaluate_candidate(psi: &PureState) -> Result<f64> {
    let fams = enumerate_bipartitions(psi.n_qubits())?;
    Ok(global_entanglement(&psi.projector(), &fams)?.global)
}

struct Run {
    state: PureState,
    value: f64,
    trace: Vec<f64>,
    summary: RestartSummary,
}

fn objective(psi: &PureState, fams: &BipartitionFamilies) -> Result<f64> {
    Ok(pure_global_entanglement(psi, fams)?.global.clamp(0.0, 1.0))
}

fn climb(config: &OptimizerConfig, fams: &BipartitionFamilies, index: usize) -> Result<Run> {
    let seed = sample_seed(config.seed, index as u64);
    let mut state = haar_random_state(config.n_qubits, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let dim = 1usize << config.n_qubits;

    let initial_value = objective(&state, fams)?;
    let mut value = initial_value;
    let mut step = config.initial_step;
    let mut stall = 0;
    let mut accepted = 0;
    let mut trace = Vec::new();
    let mut eta = vec![C64::new(0.0, 0.0); dim];

    while trace.len() < config.max_iterations && step >= config.min_step && value < 1.0 {
        for z in eta.iter_mut() {
            *z = complex_gaussian(&mut rng);
        }
        let scale = step / eta.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let proposal: Vec<C64> = state.amplitudes().iter().zip(&eta).map(|(a, e)| a + e * scale).collect();
        let candidate = PureState::normalized(config.n_qubits, proposal)?;
        let v = objective(&candidate, fams)?;
        if v > value {
            stall = if v - value > config.tolerance { 0 } else { stall + 1 };
            state = candidate;
            value = v;
            accepted += 1;
        } else {
            stall += 1;
        }
        if stall >= config.stall_window {
            step *= config.shrink;
            stall = 0;
        }
        trace.push(value);
    }

    let summary = RestartSummary {
        index,
        seed,
        initial_value,
        final_value: value,
        iterations: trace.len(),
        accepted,
        final_step: step,
    };
    Ok(Run { state, value, trace, summary })
}

pub fn maximize_global_entanglement(config: &OptimizerConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let fams = enumerate_bipartitions(config.n_qubits)?;
    let runs = crate::montecarlo::with_workers(config.workers, || {
        (0..config.restarts).into_par_iter().map(|i| climb(config, &fams, i)).collect::<Result<Vec<_>>>()
    })?;

    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let mut trace = Vec::with_capacity(runs.iter().map(|r| r.trace.len()).sum());
    let mut so_far = f64::NEG_INFINITY;
    for r in &runs {
        for &v in &r.trace {
            so_far = so_far.max(v);
            trace.push(so_far);
        }
    }
    let restarts_summary = runs.iter().map(|r| r.summary.clone()).collect();
    let winner = runs.into_iter().nth(best).expect("at least one restart");
    Ok(OptimizationResult { best_state: winner.state, best_value: winner.value, trace, restarts_summary })
}
