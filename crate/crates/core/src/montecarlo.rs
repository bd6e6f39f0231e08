//! Ensemble evolution: many initial states, one time grid, per-time running
//! statistics of every measure.
//!
//! Determinism contract: sample `i` draws its initial state from
//! [`sample_seed`]`(master, i)`, samples may be evaluated on any number of
//! workers, and results are always folded into the accumulators in
//! ascending sample index. Identical configurations therefore give
//! bit-identical statistics at every worker count.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{apply_channel_sequential, ChannelParams, KrausPair};
use crate::entanglement::{self, enumerate_bipartitions, BipartitionFamilies, MeasureSet, MeasureVector};
use crate::error::{Error, Result};
use crate::linalg::DensityOperator;
use crate::states::{haar_random_state, make_mixed, resolve, StateKind, StateSpec};
use crate::table::Table;

pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_POINTS: usize = 500;
pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_LAMBDA_RATIO: f64 = 0.01;

/// Samples handed to the worker pool per batch; bounds memory for large runs.
const BATCH: usize = 64;

/// Ascending dimensionless times `γ0·t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("time grid is empty".into()));
        }
        if points.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Config("time grid points must be finite and non-negative".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("time grid must be strictly ascending".into()));
        }
        Ok(Self { points })
    }

    /// `count` evenly spaced points on `[0, t_max]`, endpoints included.
    pub fn uniform(t_max: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("time grid needs at least one point".into()));
        }
        if !(t_max.is_finite() && t_max >= 0.0) || (count > 1 && t_max == 0.0) {
            return Err(Error::Config(format!("invalid t_max {t_max}")));
        }
        if count == 1 {
            return Self::new(vec![t_max]);
        }
        let step = t_max / (count - 1) as f64;
        Self::new((0..count).map(|k| if k == count - 1 { t_max } else { k as f64 * step }).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_T_MAX, DEFAULT_POINTS).expect("default grid is valid")
    }
}

/// Welford running mean and second central moment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population dispersion `sqrt(<x²> - <x>²)`, clamped at zero.
    pub fn dispersion(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let var = self.m2 / self.count as f64;
        if var < 0.0 {
            debug_assert!(var > -1e-12, "negative variance {var}");
            0.0
        } else {
            var.sqrt()
        }
    }

    /// Standard error of the mean from the unbiased sample variance.
    pub fn standard_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        (self.m2.max(0.0) / (n - 1.0) / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct PointStats {
    n_global: Accumulator,
    families: Vec<Accumulator>,
    e_mb: Accumulator,
    linear_entropy: Accumulator,
    purity: Accumulator,
}

impl PointStats {
    fn new(families: usize) -> Self {
        Self {
            n_global: Accumulator::default(),
            families: vec![Accumulator::default(); families],
            e_mb: Accumulator::default(),
            linear_entropy: Accumulator::default(),
            purity: Accumulator::default(),
        }
    }

    fn push(&mut self, m: &MeasureVector, set: MeasureSet) {
        self.n_global.push(m.global_negativity);
        for (acc, v) in self.families.iter_mut().zip(&m.family_negativity) {
            acc.push(*v);
        }
        if set.e_mb {
            self.e_mb.push(m.e_mb_global);
        }
        if set.linear_entropy {
            self.linear_entropy.push(m.linear_entropy);
        }
        if set.purity {
            self.purity.push(m.purity);
        }
    }
}

/// Per-time-point statistics of every recorded measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    n_qubits: usize,
    grid: TimeGrid,
    measures: MeasureSet,
    points: Vec<PointStats>,
}

impl EnsembleStats {
    fn new(n_qubits: usize, grid: TimeGrid, measures: MeasureSet) -> Self {
        let points = vec![PointStats::new(n_qubits / 2); grid.len()];
        Self { n_qubits, grid, measures, points }
    }

    fn push_sample(&mut self, series: &[MeasureVector]) {
        for (p, m) in self.points.iter_mut().zip(series) {
            p.push(m, self.measures);
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn measures(&self) -> MeasureSet {
        self.measures
    }

    pub fn n_samples(&self) -> u64 {
        self.points.first().map_or(0, |p| p.n_global.count())
    }

    pub fn n_global(&self) -> Vec<Accumulator> {
        self.points.iter().map(|p| p.n_global).collect()
    }

    pub fn n_mean(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.n_global.mean()).collect()
    }

    pub fn n_dispersion(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.n_global.dispersion()).collect()
    }

    /// `<N^(m)>` along the grid.
    pub fn family_mean(&self, m: usize) -> Vec<f64> {
        self.points.iter().map(|p| p.families[m - 1].mean()).collect()
    }

    pub fn e_mb_mean(&self) -> Option<Vec<f64>> {
        self.measures.e_mb.then(|| self.points.iter().map(|p| p.e_mb.mean()).collect())
    }

    pub fn linear_entropy_mean(&self) -> Option<Vec<f64>> {
        self.measures
            .linear_entropy
            .then(|| self.points.iter().map(|p| p.linear_entropy.mean()).collect())
    }

    pub fn purity_mean(&self) -> Option<Vec<f64>> {
        self.measures.purity.then(|| self.points.iter().map(|p| p.purity.mean()).collect())
    }

    /// Column names of [`EnsembleStats::to_table`].
    pub fn columns(n_qubits: usize, measures: MeasureSet) -> Vec<String> {
        let mut cols = vec!["gamma0_t".to_string(), "N_mean".into(), "N_disp".into()];
        cols.extend((1..=n_qubits / 2).map(|m| format!("{}_mean", entanglement::names::family(m))));
        if measures.e_mb {
            cols.push("EMB_mean".into());
        }
        if measures.linear_entropy {
            cols.push("SL_mean".into());
        }
        if measures.purity {
            cols.push("purity_mean".into());
        }
        cols.push("n_samples".into());
        cols
    }

    /// One row per grid time.
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(Self::columns(self.n_qubits, self.measures));
        for (t, p) in self.grid.points().iter().zip(&self.points) {
            let mut row = vec![*t, p.n_global.mean(), p.n_global.dispersion()];
            row.extend(p.families.iter().map(Accumulator::mean));
            if self.measures.e_mb {
                row.push(p.e_mb.mean());
            }
            if self.measures.linear_entropy {
                row.push(p.linear_entropy.mean());
            }
            if self.measures.purity {
                row.push(p.purity.mean());
            }
            row.push(p.n_global.count() as f64);
            table.push_row(row.into_iter().map(Some).collect());
        }
        table
    }
}

/// Initial condition of every sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    Pure(StateKind),
    /// `x|ψ><ψ| + (1 - x) I / 2^n` for each sample's pure state.
    Mixed { kind: StateKind, x: f64 },
}

impl Initial {
    fn kind(&self) -> &StateKind {
        match self {
            Initial::Pure(k) | Initial::Mixed { kind: k, .. } => k,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_qubits: usize,
    pub initial: Initial,
    /// `λ/γ0`; time is measured in units of `1/γ0`.
    pub lambda_ratio: f64,
    pub grid: TimeGrid,
    pub samples: usize,
    pub master_seed: u64,
    pub measures: MeasureSet,
    /// Where `optimized:<tag>` states live.
    pub state_dir: PathBuf,
    /// Worker threads; 0 uses the ambient rayon pool.
    pub workers: usize,
}

impl RunConfig {
    pub fn haar(n_qubits: usize, samples: usize, master_seed: u64) -> Self {
        Self {
            n_qubits,
            initial: Initial::Pure(StateKind::Haar(None)),
            lambda_ratio: DEFAULT_LAMBDA_RATIO,
            grid: TimeGrid::default(),
            samples,
            master_seed,
            measures: MeasureSet::ALL,
            state_dir: PathBuf::from("states"),
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<ChannelParams> {
        if self.samples < 1 {
            return Err(Error::Config("sample count must be at least 1".into()));
        }
        if !(self.lambda_ratio > 0.0 && self.lambda_ratio < 2.0) {
            return Err(Error::Config(format!(
                "lambda/gamma0 = {} must lie in (0, 2) for non-Markovian dynamics",
                self.lambda_ratio
            )));
        }
        if !(entanglement::MIN_QUBITS..=crate::linalg::MAX_QUBITS).contains(&self.n_qubits) {
            return Err(Error::QubitCount(self.n_qubits, entanglement::MIN_QUBITS, crate::linalg::MAX_QUBITS));
        }
        if let Initial::Mixed { x, .. } = self.initial {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::Config(format!("mixing weight x = {x} outside [0, 1]")));
            }
        }
        StateSpec::new(self.initial.kind().clone(), self.n_qubits)?;
        ChannelParams::with_lambda_ratio(self.lambda_ratio)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of sample `index`: `splitmix64(splitmix64(master) ^ index)`.
pub fn sample_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

/// Measures at every grid time of the state evolved from `initial`. The
/// channel is always applied to the `t = 0` state with `p(t)`.
pub fn evolve_state(
    initial: &DensityOperator,
    params: &ChannelParams,
    grid: &TimeGrid,
    fams: &BipartitionFamilies,
    measures: MeasureSet,
) -> Result<Vec<MeasureVector>> {
    let schedule = Schedule::new(params, grid)?;
    evolve_with_schedule(initial, &schedule, fams, measures)
}

/// Kraus pairs for every grid time, computed once per run.
struct Schedule {
    pairs: Vec<KrausPair>,
}

impl Schedule {
    fn new(params: &ChannelParams, grid: &TimeGrid) -> Result<Self> {
        let pairs = grid
            .points()
            .iter()
            .map(|&t| crate::channel::kraus_pair(params, t))
            .collect::<Result<_>>()?;
        Ok(Self { pairs })
    }
}

fn evolve_with_schedule(
    initial: &DensityOperator,
    schedule: &Schedule,
    fams: &BipartitionFamilies,
    measures: MeasureSet,
) -> Result<Vec<MeasureVector>> {
    schedule
        .pairs
        .iter()
        .map(|pair| {
            let rho = apply_channel_sequential(initial, pair)?;
            entanglement::evaluate(&rho, fams, measures)
        })
        .collect()
}

/// Shared state of one run.
struct Engine<'a> {
    config: &'a RunConfig,
    schedule: Schedule,
    fams: BipartitionFamilies,
}

impl<'a> Engine<'a> {
    fn new(config: &'a RunConfig) -> Result<Self> {
        let params = config.validate()?;
        Ok(Self {
            config,
            schedule: Schedule::new(&params, &config.grid)?,
            fams: enumerate_bipartitions(config.n_qubits)?,
        })
    }

    fn initial_density(&self, index: u64, x: Option<f64>) -> Result<DensityOperator> {
        let c = self.config;
        let psi = match c.initial.kind() {
            StateKind::Haar(None) => haar_random_state(c.n_qubits, sample_seed(c.master_seed, index))?,
            kind => resolve(&StateSpec::new(kind.clone(), c.n_qubits)?, &c.state_dir)?,
        };
        match x {
            Some(x) => make_mixed(&psi, x),
            None => Ok(psi.projector()),
        }
    }

    fn run_sample(&self, index: u64, xs: &[Option<f64>]) -> Result<Vec<Vec<MeasureVector>>> {
        let seed = sample_seed(self.config.master_seed, index);
        let wrap = |e: Error| Error::Sample { index, seed, source: Box::new(e) };
        xs.iter()
            .map(|&x| {
                let rho = self.initial_density(index, x).map_err(wrap)?;
                evolve_with_schedule(&rho, &self.schedule, &self.fams, self.config.measures).map_err(wrap)
            })
            .collect()
    }

    /// Folds samples `0..count` into one accumulator per mixing weight.
    /// `on_sample` sees the statistics after every sample.
    fn accumulate(
        &self,
        xs: &[Option<f64>],
        count: usize,
        mut on_sample: impl FnMut(u64, &[EnsembleStats]),
    ) -> Result<Vec<EnsembleStats>> {
        let c = self.config;
        let mut stats: Vec<EnsembleStats> = xs
            .iter()
            .map(|_| EnsembleStats::new(c.n_qubits, c.grid.clone(), c.measures))
            .collect();

        if !c.initial.kind().is_random() {
            // Every sample is the same state; evaluate it once.
            let series = self.run_sample(0, xs)?;
            for i in 0..count as u64 {
                for (s, v) in stats.iter_mut().zip(&series) {
                    s.push_sample(v);
                }
                on_sample(i + 1, &stats);
            }
            return Ok(stats);
        }

        let mut start = 0u64;
        while start < count as u64 {
            let end = (start + BATCH as u64).min(count as u64);
            let batch: Vec<Result<Vec<Vec<MeasureVector>>>> =
                (start..end).into_par_iter().map(|i| self.run_sample(i, xs)).collect();
            for (offset, result) in batch.into_iter().enumerate() {
                let series = result?;
                for (s, v) in stats.iter_mut().zip(&series) {
                    s.push_sample(v);
                }
                on_sample(start + offset as u64 + 1, &stats);
            }
            start = end;
        }
        Ok(stats)
    }
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if workers == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(f)
}

fn mixing_weight(initial: &Initial) -> Option<f64> {
    match initial {
        Initial::Pure(_) => None,
        Initial::Mixed { x, .. } => Some(*x),
    }
}

pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleStats> {
    with_workers(config.workers, || {
        let engine = Engine::new(config)?;
        let xs = [mixing_weight(&config.initial)];
        Ok(engine.accumulate(&xs, config.samples, |_, _| {})?.remove(0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub samples: usize,
    pub n_mean: f64,
    pub standard_error: f64,
}

/// `<N>` at `probe_time` for growing sample sizes. Samples are nested:
/// the size-`k` estimate uses samples `0..k`, so every larger size extends
/// the smaller ones.
pub fn convergence_study(config: &RunConfig, sizes: &[usize], probe_time: f64) -> Result<Vec<ConvergenceRow>> {
    if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("sample sizes must be positive and strictly ascending".into()));
    }
    let mut probe = config.clone();
    probe.grid = TimeGrid::new(vec![probe_time])?;
    probe.samples = *sizes.last().expect("nonempty");
    with_workers(probe.workers, || {
        let engine = Engine::new(&probe)?;
        let xs = [mixing_weight(&probe.initial)];
        let mut rows = Vec::with_capacity(sizes.len());
        let mut next = sizes.iter().peekable();
        engine.accumulate(&xs, probe.samples, |done, stats| {
            if next.peek().is_some_and(|&&k| k as u64 == done) {
                let acc = stats[0].points[0].n_global;
                rows.push(ConvergenceRow {
                    samples: done as usize,
                    n_mean: acc.mean(),
                    standard_error: acc.standard_error(),
                });
                next.next();
            }
        })?;
        Ok(rows)
    })
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(vec!["samples".into(), "N_mean".into(), "N_stderr".into()]);
    for r in rows {
        t.push_row(vec![Some(r.samples as f64), Some(r.n_mean), Some(r.standard_error)]);
    }
    t
}

/// `<N>(x, t)` for the mixed family; every sample draws one pure state and
/// mixes it at each `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSurface {
    pub x: Vec<f64>,
    pub rows: Vec<EnsembleStats>,
}

impl SweepSurface {
    /// `<N>` at grid index `k` for each `x`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows.iter().map(|s| s.points[k].n_global.mean()).collect()
    }

    /// Long format: `x, gamma0_t, N_mean, N_disp, n_samples`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            ["x", "gamma0_t", "N_mean", "N_disp", "n_samples"].map(String::from).to_vec(),
        );
        for (x, stats) in self.x.iter().zip(&self.rows) {
            for (time, p) in stats.grid.points().iter().zip(&stats.points) {
                t.push_row(vec![
                    Some(*x),
                    Some(*time),
                    Some(p.n_global.mean()),
                    Some(p.n_global.dispersion()),
                    Some(p.n_global.count() as f64),
                ]);
            }
        }
        t
    }
}

pub fn mixed_sweep(base: &RunConfig, x_grid: &[f64]) -> Result<SweepSurface> {
    if x_grid.is_empty() {
        return Err(Error::Config("x grid is empty".into()));
    }
    if let Some(x) = x_grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Config(format!("mixing weight x = {x} outside [0, 1]")));
    }
    let mut config = base.clone();
    config.initial = Initial::Pure(base.initial.kind().clone());
    with_workers(config.workers, || {
        let engine = Engine::new(&config)?;
        let xs: Vec<Option<f64>> = x_grid.iter().map(|&x| Some(x)).collect();
        let rows = engine.accumulate(&xs, config.samples, |_, _| {})?;
        Ok(SweepSurface { x: x_grid.to_vec(), rows })
    })
}
