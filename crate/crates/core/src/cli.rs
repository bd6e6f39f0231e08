//! Command-line front end.
//!
//! Every run option can come from a flag or from a TOML file passed with
//! `--config`; flags win. Worker threads are taken from `ENTDYN_THREADS`
//! (unset or 0 means one per logical CPU). Data files are written
//! atomically and get a `<out>.manifest.json` sidecar.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::entanglement::{enumerate_bipartitions, e_mb_global, global_entanglement, single_qubit_marginal, MeasureSet};
use crate::error::Error;
use crate::io::atomic_write;
use crate::linalg::{purity, DensityOperator};
use crate::montecarlo::{
    convergence_study, convergence_table, mixed_sweep, run_ensemble, Initial, RunConfig, TimeGrid,
    DEFAULT_LAMBDA_RATIO, DEFAULT_POINTS, DEFAULT_SAMPLES, DEFAULT_T_MAX,
};
use crate::optimizer::{maximize_global_entanglement, OptimizerConfig};
use crate::states::{resolve, StateKind, StateSpec};
use crate::table::{Format, Table, Value};

pub const THREADS_ENV: &str = "ENTDYN_THREADS";
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_PROBE_TIME: f64 = 40.0;
pub const DEFAULT_SIZES: [usize; 3] = [100, 1_000, 10_000];

#[derive(Debug, Parser)]
#[command(name = "entdyn", version, about = "Multiqubit entanglement dynamics under non-Markovian amplitude damping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ensemble-averaged measures on a time grid.
    Simulate(Settings),
    /// <N> at one time for growing sample sizes.
    Converge(Settings),
    /// <N>(x, t) for pure states mixed with white noise.
    Sweep(Settings),
    /// Search for a pure state of maximal global negativity.
    Optimize(Settings),
    /// Measures of a single initial state.
    StateInfo(Settings),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Converge(_) => "converge",
            Command::Sweep(_) => "sweep",
            Command::Optimize(_) => "optimize",
            Command::StateInfo(_) => "state-info",
        }
    }
}

/// Options shared by flags and config files. Unset fields fall back to
/// the config file, then to defaults.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// TOML file with any of these options, in snake_case.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Number of qubits.
    #[arg(long)]
    pub n: Option<usize>,
    /// ghz, w, hs, basis:<bits>, haar, haar:<seed>, file:<path>, optimized:<tag>.
    #[arg(long)]
    pub state: Option<String>,
    /// Weight of the pure state in the mixed family.
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated subset of N_global,E_MB,S_L,purity.
    #[arg(long)]
    pub measures: Option<String>,
    /// Figure recipe: fig1a..fig1d, fig2a, fig2b, fig3, fig4, fig5a, fig5b, fig6, fig7a, fig7b, fig8.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
    /// Directory holding optimized:<tag> state files.
    #[arg(long)]
    pub state_dir: Option<PathBuf>,
    /// Convergence sample sizes, ascending.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub probe_time: Option<f64>,
    /// Mixing weights of a sweep.
    #[arg(long, value_delimiter = ',')]
    pub x_grid: Option<Vec<f64>>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Optimizer output tag; defaults to me<n>.
    #[arg(long)]
    pub tag: Option<String>,
}

impl Settings {
    fn or(self, file: Settings) -> Settings {
        Settings {
            config: self.config,
            n: self.n.or(file.n),
            state: self.state.or(file.state),
            x: self.x.or(file.x),
            lambda_ratio: self.lambda_ratio.or(file.lambda_ratio),
            tmax: self.tmax.or(file.tmax),
            points: self.points.or(file.points),
            samples: self.samples.or(file.samples),
            seed: self.seed.or(file.seed),
            measures: self.measures.or(file.measures),
            preset: self.preset.or(file.preset),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            state_dir: self.state_dir.or(file.state_dir),
            sizes: self.sizes.or(file.sizes),
            probe_time: self.probe_time.or(file.probe_time),
            x_grid: self.x_grid.or(file.x_grid),
            restarts: self.restarts.or(file.restarts),
            iterations: self.iterations.or(file.iterations),
            tag: self.tag.or(file.tag),
        }
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn state_dir(&self) -> PathBuf {
        self.state_dir.clone().unwrap_or_else(|| PathBuf::from("states"))
    }
}

/// Failure of a CLI run, split by exit code.
#[derive(Debug)]
enum Failure {
    /// Bad arguments or configuration: exit 2.
    Usage(String),
    /// Failure while computing or writing: exit 1.
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e)
}

fn workers() -> Result<usize, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse().map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count")))
        }
        _ => Ok(0),
    }
}

fn load_settings(flags: Settings) -> Result<Settings, Failure> {
    let Some(path) = flags.config.clone() else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let file: Settings = toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(flags.or(file))
}

/// A unit of work whose result table becomes one series of the output.
#[derive(Debug, Clone)]
enum Job {
    Ensemble(RunConfig),
    Converge { config: RunConfig, sizes: Vec<usize>, probe_time: f64 },
    Sweep { config: RunConfig, x_grid: Vec<f64> },
}

impl Job {
    fn config(&self) -> &RunConfig {
        match self {
            Job::Ensemble(c) | Job::Converge { config: c, .. } | Job::Sweep { config: c, .. } => c,
        }
    }

    fn run(&self) -> crate::Result<Table> {
        match self {
            Job::Ensemble(c) => Ok(run_ensemble(c)?.to_table()),
            Job::Converge { config, sizes, probe_time } => {
                Ok(convergence_table(&convergence_study(config, sizes, *probe_time)?))
            }
            Job::Sweep { config, x_grid } => Ok(mixed_sweep(config, x_grid)?.to_table()),
        }
    }
}

/// A named figure recipe.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: [Preset; 14] = [
    Preset { name: "fig1a", description: "3 qubits: Haar average and dispersion with the GHZ curve" },
    Preset { name: "fig1b", description: "4 qubits: Haar average and dispersion with GHZ and HS curves" },
    Preset { name: "fig1c", description: "5 qubits: Haar average and dispersion with GHZ and optimized me5 curves" },
    Preset { name: "fig1d", description: "6 qubits: Haar average and dispersion with GHZ and optimized me6 curves" },
    Preset { name: "fig2a", description: "GHZ states of 3 and 6 qubits" },
    Preset { name: "fig2b", description: "Haar averages of 3 and 6 qubits" },
    Preset { name: "fig3", description: "Haar averages of 3, 4, 5 and 6 qubits on one grid" },
    Preset { name: "fig4", description: "Most unbalanced and most balanced family averages for 4 and 5 qubits" },
    Preset { name: "fig5a", description: "Negativity and E_MB averages for 4 qubits" },
    Preset { name: "fig5b", description: "Negativity and E_MB averages for 5 qubits" },
    Preset { name: "fig6", description: "Negativity and linear entropy averages for 6 qubits" },
    Preset { name: "fig7a", description: "Mixed-family surface <N>(x, t) for 3 qubits" },
    Preset { name: "fig7b", description: "Mixed-family surface <N>(x, t) for 6 qubits" },
    Preset { name: "fig8", description: "Sample-size convergence of <N> at gamma0 t = 40 for 4 qubits" },
];

/// The documented presets.
pub fn figure_recipes() -> &'static [Preset] {
    &PRESETS
}

/// Desk-scale ensemble sizes; the paper averages 10^4 states throughout.
fn desk_samples(n: usize) -> usize {
    match n {
        0..=4 => 1_000,
        5 => 200,
        _ => 50,
    }
}

fn default_x_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// Expands a preset into labelled jobs; flag overrides apply to every job.
fn expand_preset(name: &str, s: &Settings, workers: usize) -> Result<Vec<(String, Job)>, Failure> {
    if s.n.is_some() || s.state.is_some() || s.x.is_some() {
        return Err(usage("--n, --state and --x cannot be combined with --preset"));
    }
    let measures = match &s.measures {
        Some(m) => Some(MeasureSet::parse(m).map_err(usage)?),
        None => None,
    };
    let ensemble = |n: usize, kind: StateKind, preset_measures: MeasureSet| -> Result<RunConfig, Failure> {
        let random = kind.is_random();
        let base = Settings {
            n: Some(n),
            state: Some(kind.to_string()),
            samples: Some(if random { s.samples.unwrap_or(desk_samples(n)) } else { 1 }),
            ..s.clone()
        };
        let mut c = run_config(&base, workers)?;
        c.measures = measures.unwrap_or(preset_measures);
        Ok(c)
    };
    let haar = || StateKind::Haar(None);
    let neg = MeasureSet::NEGATIVITY_ONLY;
    let with_emb = MeasureSet { e_mb: true, ..neg };
    let with_sl = MeasureSet { linear_entropy: true, ..neg };

    let mut jobs = Vec::new();
    match name {
        "fig1a" | "fig1b" | "fig1c" | "fig1d" => {
            let n = 3 + (name.as_bytes()[4] - b'a') as usize;
            let mut kinds = vec![haar(), StateKind::Ghz];
            match n {
                4 => kinds.push(StateKind::Hs),
                5 | 6 => kinds.push(StateKind::Optimized(format!("me{n}"))),
                _ => {}
            }
            for k in kinds {
                jobs.push((k.to_string(), Job::Ensemble(ensemble(n, k, neg)?)));
            }
        }
        "fig2a" | "fig2b" => {
            let k = if name == "fig2a" { StateKind::Ghz } else { haar() };
            for n in [3, 6] {
                jobs.push((k.to_string(), Job::Ensemble(ensemble(n, k.clone(), neg)?)));
            }
        }
        "fig3" => {
            for n in 3..=6 {
                jobs.push((haar().to_string(), Job::Ensemble(ensemble(n, haar(), neg)?)));
            }
        }
        "fig4" => {
            for n in [4, 5] {
                jobs.push((haar().to_string(), Job::Ensemble(ensemble(n, haar(), neg)?)));
            }
        }
        "fig5a" | "fig5b" => {
            let n = if name == "fig5a" { 4 } else { 5 };
            jobs.push((haar().to_string(), Job::Ensemble(ensemble(n, haar(), with_emb)?)));
        }
        "fig6" => jobs.push((haar().to_string(), Job::Ensemble(ensemble(6, haar(), with_sl)?))),
        "fig7a" | "fig7b" => {
            let n = if name == "fig7a" { 3 } else { 6 };
            let base = Settings {
                points: Some(s.points.unwrap_or(101)),
                samples: Some(s.samples.unwrap_or(if n == 3 { 200 } else { 20 })),
                ..s.clone()
            };
            let mut config = ensemble(n, haar(), neg)?;
            config.grid = grid(&base)?;
            config.samples = base.samples.expect("set above");
            let x_grid = s.x_grid.clone().unwrap_or_else(default_x_grid);
            jobs.push((haar().to_string(), Job::Sweep { config, x_grid }));
        }
        "fig8" => {
            let config = ensemble(4, haar(), neg)?;
            let sizes = s.sizes.clone().unwrap_or(DEFAULT_SIZES.to_vec());
            let probe_time = s.probe_time.unwrap_or(DEFAULT_PROBE_TIME);
            jobs.push((haar().to_string(), Job::Converge { config, sizes, probe_time }));
        }
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
            return Err(usage(format!("unknown preset {other:?}; known presets: {}", names.join(", "))));
        }
    }
    Ok(jobs)
}

fn grid(s: &Settings) -> Result<TimeGrid, Failure> {
    TimeGrid::uniform(s.tmax.unwrap_or(DEFAULT_T_MAX), s.points.unwrap_or(DEFAULT_POINTS)).map_err(usage)
}

fn require_n(s: &Settings, command: &str) -> Result<usize, Failure> {
    s.n.ok_or_else(|| {
        let mut cmd = Cli::command();
        cmd.build();
        let usage_text = cmd
            .find_subcommand_mut(command)
            .map(|c| c.render_usage().to_string())
            .unwrap_or_default();
        usage(format!("missing required option --n\n\n{usage_text}"))
    })
}

fn run_config(s: &Settings, workers: usize) -> Result<RunConfig, Failure> {
    let n = s.n.expect("checked by caller");
    let kind: StateKind = s.state.as_deref().unwrap_or("haar").parse().map_err(usage)?;
    let initial = match s.x {
        Some(x) => Initial::Mixed { kind, x },
        None => Initial::Pure(kind),
    };
    let config = RunConfig {
        n_qubits: n,
        initial,
        lambda_ratio: s.lambda_ratio.unwrap_or(DEFAULT_LAMBDA_RATIO),
        grid: grid(s)?,
        samples: s.samples.unwrap_or(DEFAULT_SAMPLES),
        master_seed: s.seed(),
        measures: match &s.measures {
            Some(m) => MeasureSet::parse(m).map_err(usage)?,
            None => MeasureSet::ALL,
        },
        state_dir: s.state_dir(),
        workers,
    };
    config.validate().map_err(usage)?;
    Ok(config)
}

/// Produces missing `optimized:me<n>` states with the default optimizer
/// settings and the run's seed, so preset runs are self-contained.
fn ensure_optimized(config: &RunConfig) -> crate::Result<()> {
    let kind = match &config.initial {
        Initial::Pure(k) | Initial::Mixed { kind: k, .. } => k,
    };
    let StateKind::Optimized(tag) = kind else {
        return Ok(());
    };
    let path = config.state_dir.join(format!("{tag}.json"));
    if path.exists() {
        return Ok(());
    }
    std::fs::create_dir_all(&config.state_dir)?;
    let opt = OptimizerConfig { workers: config.workers, ..OptimizerConfig::new(config.n_qubits, config.master_seed) };
    maximize_global_entanglement(&opt)?.persist(&opt, &path)
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    settings: &'a Settings,
    series: Vec<String>,
    outputs: Vec<String>,
    created_unix: u64,
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => atomic_write(path, text.as_bytes()).map_err(runtime),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn write_manifest(command: &str, s: &Settings, series: Vec<String>, outputs: Vec<String>) -> Result<(), Failure> {
    let Some(out) = &s.out else {
        return Ok(());
    };
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed: s.seed(),
        settings: s,
        series,
        outputs,
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| runtime(e.into()))?;
    text.push('\n');
    atomic_write(&manifest_path(out), text.as_bytes()).map_err(runtime)
}

fn run_jobs(command: &str, s: &Settings, jobs: Vec<(String, Job)>) -> Result<(), Failure> {
    let mut parts = Vec::with_capacity(jobs.len());
    let mut series = Vec::with_capacity(jobs.len());
    for (label, job) in &jobs {
        ensure_optimized(job.config()).map_err(runtime)?;
        let table = job.run().map_err(runtime)?;
        let n = job.config().n_qubits as f64;
        parts.push(table.with_keys(&[("series", Value::from(label.as_str())), ("n", Value::from(n))]));
        series.push(label.clone());
    }
    let table = Table::concat(parts).move_column_last("n_samples");
    let text = table.encode(s.format.unwrap_or_default()).map_err(runtime)?;
    emit(&text, s.out.as_deref())?;
    let outputs = s.out.iter().map(|p| p.display().to_string()).collect();
    write_manifest(command, s, series, outputs)
}

fn data_command(command: &str, s: Settings, workers: usize) -> Result<(), Failure> {
    if let Some(name) = s.preset.clone() {
        let jobs = expand_preset(&name, &s, workers)?;
        return run_jobs(command, &s, jobs);
    }
    require_n(&s, command)?;
    let config = run_config(&s, workers)?;
    let label = s.state.clone().unwrap_or_else(|| "haar".into());
    let job = match command {
        "converge" => {
            let mut config = config;
            config.measures = MeasureSet::NEGATIVITY_ONLY;
            Job::Converge {
                config,
                sizes: s.sizes.clone().unwrap_or(DEFAULT_SIZES.to_vec()),
                probe_time: s.probe_time.unwrap_or(DEFAULT_PROBE_TIME),
            }
        }
        "sweep" => {
            let mut config = config;
            config.measures = MeasureSet::NEGATIVITY_ONLY;
            Job::Sweep { config, x_grid: s.x_grid.clone().unwrap_or_else(default_x_grid) }
        }
        _ => Job::Ensemble(config),
    };
    // Validation of sizes and x grid happens inside the job; surface those
    // as usage errors rather than runtime ones.
    match &job {
        Job::Converge { sizes, .. } if sizes.is_empty() || sizes[0] == 0 || sizes.windows(2).any(|w| w[1] <= w[0]) => {
            return Err(usage("--sizes must be positive and strictly ascending"));
        }
        Job::Sweep { x_grid, .. } if x_grid.is_empty() || x_grid.iter().any(|x| !(0.0..=1.0).contains(x)) => {
            return Err(usage("--x-grid must be a nonempty list of weights in [0, 1]"));
        }
        _ => {}
    }
    run_jobs(command, &s, vec![(label, job)])
}

fn optimize(s: Settings, workers: usize) -> Result<(), Failure> {
    let n = require_n(&s, "optimize")?;
    let mut config = OptimizerConfig::new(n, s.seed());
    config.workers = workers;
    if let Some(r) = s.restarts {
        config.restarts = r;
    }
    if let Some(i) = s.iterations {
        config.max_iterations = i;
    }
    config.validate().map_err(usage)?;
    enumerate_bipartitions(n).map_err(usage)?;
    let tag = s.tag.clone().unwrap_or_else(|| format!("me{n}"));
    let dir = s.state_dir();
    std::fs::create_dir_all(&dir).map_err(|e| runtime(e.into()))?;
    let path = dir.join(format!("{tag}.json"));

    let result = maximize_global_entanglement(&config).map_err(runtime)?;
    result.persist(&config, &path).map_err(runtime)?;
    let best = result.best_restart();
    eprintln!(
        "best value {:.12} from restart {} after {} iterations; state written to {}",
        result.best_value,
        best.index,
        best.iterations,
        path.display()
    );

    let mut trace = Table::new(vec!["iteration".into(), "best_value".into()]);
    for (i, v) in result.trace.iter().enumerate() {
        trace.push_row(vec![i as f64 + 1.0, *v]);
    }
    let text = trace.encode(s.format.unwrap_or_default()).map_err(runtime)?;
    if s.out.is_some() {
        emit(&text, s.out.as_deref())?;
    }
    let mut outputs: Vec<String> = s.out.iter().map(|p| p.display().to_string()).collect();
    outputs.push(path.display().to_string());
    write_manifest("optimize", &s, vec![tag], outputs)
}

#[derive(Serialize)]
struct StateInfo {
    n: usize,
    state: String,
    x: Option<f64>,
    global_negativity: f64,
    family_negativity: Vec<f64>,
    e_mb: f64,
    purity: f64,
    single_qubit_purity: Vec<f64>,
}

fn state_info(s: Settings) -> Result<(), Failure> {
    let n = require_n(&s, "state-info")?;
    let text = s.state.clone().ok_or_else(|| usage("missing required option --state"))?;
    let kind: StateKind = text.parse().map_err(usage)?;
    if kind.is_random() {
        return Err(usage("state-info needs a fixed state; use haar:<seed>"));
    }
    let spec = StateSpec::new(kind, n).map_err(usage)?;
    let fams = enumerate_bipartitions(n).map_err(usage)?;
    let psi = resolve(&spec, &s.state_dir()).map_err(runtime)?;
    let rho = match s.x {
        Some(x) => crate::states::make_mixed(&psi, x).map_err(usage)?,
        None => DensityOperator::from(&psi),
    };
    let g = global_entanglement(&rho, &fams).map_err(runtime)?;
    let info = StateInfo {
        n,
        state: text,
        x: s.x,
        global_negativity: g.global,
        family_negativity: g.per_family,
        e_mb: e_mb_global(&rho, &fams).map_err(runtime)?,
        purity: purity(&rho),
        single_qubit_purity: (0..n)
            .map(|q| single_qubit_marginal(&psi, q).as_slice().iter().map(|z| z.norm_sqr()).sum())
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&info).map_err(|e| runtime(e.into()))?;
    json.push('\n');
    emit(&json, s.out.as_deref())
}

fn check_out(s: &Settings) -> Result<(), Failure> {
    let Some(out) = &s.out else {
        return Ok(());
    };
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        return Err(usage(format!("output directory {} does not exist", dir.display())));
    }
    if out.is_dir() {
        return Err(usage(format!("output path {} is a directory", out.display())));
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<(), Failure> {
    let name = command.name();
    let workers = workers()?;
    let (Command::Simulate(s) | Command::Converge(s) | Command::Sweep(s) | Command::Optimize(s) | Command::StateInfo(s)) =
        command;
    let s = load_settings(s)?;
    check_out(&s)?;
    match name {
        "optimize" => optimize(s, workers),
        "state-info" => state_info(s),
        _ => data_command(name, s, workers),
    }
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Runtime(e) => eprintln!("error: {e}"),
            }
            f.code()
        }
    }
}
