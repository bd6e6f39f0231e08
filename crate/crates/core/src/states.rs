//! Initial states: named entangled states, Haar-random pure states, the
//! pure/white-noise mixed family and the state-vector file format.
//!
//! State files are UTF-8 JSON documents:
//!
//! ```text
//! {"n": 2, "amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]}
//! ```
//!
//! with `2^n` `[re, im]` pairs in ascending basis-index order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    parse_bitstring, ComplexMatrix, DensityOperator, PureState, C64, MAX_QUBITS, ZERO,
};

/// Loaded amplitudes whose norm is within this of 1 are renormalized;
/// anything further off is rejected.
pub const LOAD_NORM_TOL: f64 = 1e-9;

/// How an initial pure state is produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StateKind {
    Ghz,
    W,
    /// Higuchi–Sudbery four-qubit state.
    Hs,
    Basis(String),
    /// Haar-random; without a seed, one is derived per sample by the caller.
    Haar(Option<u64>),
    File(PathBuf),
    /// Optimizer output stored as `<tag>.json` in the state directory.
    Optimized(String),
}

impl StateKind {
    /// True when every sample of an ensemble draws a fresh state.
    pub fn is_random(&self) -> bool {
        matches!(self, StateKind::Haar(None))
    }
}

impl fmt::Display for StateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateKind::Ghz => f.write_str("ghz"),
            StateKind::W => f.write_str("w"),
            StateKind::Hs => f.write_str("hs"),
            StateKind::Basis(b) => write!(f, "basis:{b}"),
            StateKind::Haar(None) => f.write_str("haar"),
            StateKind::Haar(Some(s)) => write!(f, "haar:{s}"),
            StateKind::File(p) => write!(f, "file:{}", p.display()),
            StateKind::Optimized(t) => write!(f, "optimized:{t}"),
        }
    }
}

impl FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let bad = || Error::Config(format!("unrecognized state {s:?}"));
        Ok(match (head.to_ascii_lowercase().as_str(), arg) {
            ("ghz", None) => StateKind::Ghz,
            ("w", None) => StateKind::W,
            ("hs", None) => StateKind::Hs,
            ("basis", Some(b)) => {
                parse_bitstring(b)?;
                StateKind::Basis(b.to_string())
            }
            ("haar", None) => StateKind::Haar(None),
            ("haar", Some(seed)) => StateKind::Haar(Some(seed.parse().map_err(|_| bad())?)),
            ("file", Some(p)) if !p.is_empty() => StateKind::File(PathBuf::from(p)),
            ("optimized", Some(t)) if !t.is_empty() => StateKind::Optimized(t.to_string()),
            _ => return Err(bad()),
        })
    }
}

impl TryFrom<String> for StateKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateKind> for String {
    fn from(k: StateKind) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpec {
    pub kind: StateKind,
    pub n_qubits: usize,
}

impl StateSpec {
    pub fn new(kind: StateKind, n_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCount(n_qubits, 1, MAX_QUBITS));
        }
        match &kind {
            StateKind::Hs if n_qubits != 4 => {
                return Err(Error::Config(format!("hs is a 4-qubit state, got n = {n_qubits}")))
            }
            StateKind::Basis(b) if b.len() != n_qubits => {
                return Err(Error::Config(format!("bitstring {b:?} does not have {n_qubits} qubits")))
            }
            _ => {}
        }
        Ok(Self { kind, n_qubits })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedFamilySpec {
    pub base: StateSpec,
    pub x: f64,
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Builds the deterministic named states (GHZ, W, HS, basis).
pub fn make_named(spec: &StateSpec) -> Result<PureState> {
    let n = spec.n_qubits;
    let dim = 1usize << n;
    match &spec.kind {
        StateKind::Ghz => {
            let mut a = vec![ZERO; dim];
            a[0] = real(std::f64::consts::FRAC_1_SQRT_2);
            a[dim - 1] = real(std::f64::consts::FRAC_1_SQRT_2);
            PureState::new(n, a)
        }
        StateKind::W => {
            let mut a = vec![ZERO; dim];
            let amp = real(1.0 / (n as f64).sqrt());
            for q in 0..n {
                a[1 << q] = amp;
            }
            PureState::new(n, a)
        }
        StateKind::Hs => {
            if n != 4 {
                return Err(Error::Config(format!("hs is a 4-qubit state, got n = {n}")));
            }
            let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
            let s = 1.0 / 6f64.sqrt();
            let mut a = vec![ZERO; 16];
            a[0b0011] = real(s);
            a[0b1100] = real(s);
            a[0b1010] = omega * s;
            a[0b0101] = omega * s;
            a[0b1001] = omega * omega * s;
            a[0b0110] = omega * omega * s;
            PureState::new(4, a)
        }
        StateKind::Basis(bits) => {
            if bits.len() != n {
                return Err(Error::Config(format!("bitstring {bits:?} does not have {n} qubits")));
            }
            PureState::basis(bits)
        }
        other => Err(Error::Config(format!("{other} is not a named state"))),
    }
}

/// Resolves any state spec. `state_dir` locates `optimized:<tag>` files.
pub fn resolve(spec: &StateSpec, state_dir: &Path) -> Result<PureState> {
    let psi = match &spec.kind {
        StateKind::Haar(Some(seed)) => haar_random_state(spec.n_qubits, *seed)?,
        StateKind::Haar(None) => {
            return Err(Error::Config("haar state without a seed needs an ensemble driver".into()))
        }
        StateKind::File(path) => load_state(path)?,
        StateKind::Optimized(tag) => load_state(&state_dir.join(format!("{tag}.json")))?,
        _ => make_named(spec)?,
    };
    if psi.n_qubits() != spec.n_qubits {
        return Err(Error::DimensionMismatch { expected: spec.n_qubits, got: psi.n_qubits() });
    }
    Ok(psi)
}

/// One standard complex Gaussian with `E|z|² = 1`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix, with each
/// column of Q rotated by the phase of the matching diagonal entry of R.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    // Column-major draw order, so a given seed fixes the matrix column by column.
    let mut ginibre = Mat::<C64>::zeros(dim, dim);
    for j in 0..dim {
        for i in 0..dim {
            ginibre[(i, j)] = complex_gaussian(rng);
        }
    }
    let qr = ginibre.qr();
    let q = qr.compute_Q();
    let r = qr.R();
    let phases: Vec<C64> = (0..dim)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                real(1.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(dim, |i, j| q[(i, j)] * phases[j])
}

/// `U|0...0>` with `U` Haar-distributed, reproducible per seed.
pub fn haar_random_state(n: usize, seed: u64) -> Result<PureState> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n, 2, MAX_QUBITS));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = haar_unitary(1 << n, &mut rng);
    let mut reference = vec![ZERO; 1 << n];
    reference[0] = real(1.0);
    PureState::normalized(n, u.apply(&reference))
}

/// `x|ψ><ψ| + (1 - x) I / 2^n`.
pub fn make_mixed(psi: &PureState, x: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Config(format!("mixing weight x = {x} outside [0, 1]")));
    }
    let n = psi.n_qubits();
    let dim = 1usize << n;
    let mut m = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()).scaled(real(x));
    let noise = (1.0 - x) / dim as f64;
    for i in 0..dim {
        m[(i, i)] += real(noise);
    }
    DensityOperator::new(n, m)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    n: usize,
    amplitudes: Vec<[f64; 2]>,
}

pub fn state_to_json(psi: &PureState) -> Result<String> {
    let file = StateFile {
        n: psi.n_qubits(),
        amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn state_from_json(text: &str, origin: &Path) -> Result<PureState> {
    let bad = |reason: String| Error::StateFile { path: origin.to_path_buf(), reason };
    let file: StateFile = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if !(1..=MAX_QUBITS).contains(&file.n) {
        return Err(bad(format!("n = {} outside 1..={MAX_QUBITS}", file.n)));
    }
    let expected = 1usize << file.n;
    if file.amplitudes.len() != expected {
        return Err(bad(format!(
            "expected {expected} amplitudes for n = {}, found {}",
            file.n,
            file.amplitudes.len()
        )));
    }
    let amps: Vec<C64> = file.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
    if amps.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(bad("non-finite amplitude".into()));
    }
    let norm = crate::linalg::norm_sqr(&amps).sqrt();
    if (norm - 1.0).abs() > LOAD_NORM_TOL {
        return Err(bad(format!("norm {norm} differs from 1 by more than {LOAD_NORM_TOL:e}")));
    }
    match PureState::new(file.n, amps.clone()) {
        Ok(psi) => Ok(psi),
        Err(_) => PureState::normalized(file.n, amps),
    }
}

pub fn save_state(psi: &PureState, path: &Path) -> Result<()> {
    let mut text = state_to_json(psi)?;
    text.push('\n');
    crate::io::atomic_write(path, text.as_bytes())
}

pub fn load_state(path: &Path) -> Result<PureState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::StateFile { path: path.to_path_buf(), reason: e.to_string() })?;
    state_from_json(&text, path)
}
