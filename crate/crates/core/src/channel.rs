//! Non-Markovian amplitude damping: a qubit coupled to a Lorentzian
//! reservoir in the strong-coupling regime keeps its excited population
//! with the oscillating weight
//!
//! ```text
//! p(t) = exp(-λt) [cos(dt/2) + (λ/d) sin(dt/2)]²,   d = sqrt(2γ0λ - λ²)
//! ```
//!
//! Each qubit has its own identical environment, so the register map is the
//! product of single-qubit maps. The map at time `t` is always applied to
//! the initial state; it does not compose as a semigroup.

use crate::error::{Error, Result};
use crate::linalg::{qubit_bit, tensor_product, ComplexMatrix, DensityOperator, C64, ONE, ZERO};

/// Largest register accepted by the literal tensor-product applicator.
pub const FULL_KRAUS_MAX_QUBITS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    gamma0: f64,
    lambda: f64,
    d: f64,
}

impl ChannelParams {
    pub fn new(gamma0: f64, lambda: f64) -> Result<Self> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(Error::Channel(format!("gamma0 must be positive, got {gamma0}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Channel(format!("lambda must be positive, got {lambda}")));
        }
        if gamma0 <= lambda / 2.0 {
            return Err(Error::Channel(format!(
                "gamma0 = {gamma0} <= lambda/2 = {}: Markovian regime is not supported",
                lambda / 2.0
            )));
        }
        let d = (2.0 * gamma0 * lambda - lambda * lambda).sqrt();
        Ok(Self { gamma0, lambda, d })
    }

    /// `γ0 = 1`, so times are the dimensionless product `γ0·t`.
    pub fn with_lambda_ratio(ratio: f64) -> Result<Self> {
        Self::new(1.0, ratio)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Oscillation period of the bracket in `p(t)`; consecutive zeros of
    /// `p` are this far apart.
    pub fn revival_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.d
    }

    /// `cos(dt/2) + (λ/d) sin(dt/2)`; `p(t)` is its square times `exp(-λt)`.
    fn amplitude(&self, t: f64) -> f64 {
        let half = 0.5 * self.d * t;
        half.cos() + (self.lambda / self.d) * half.sin()
    }

    /// Zeros of `p` in `[0, t_max]`, located by scanning for sign changes
    /// of the bracket and bisecting each one to machine precision.
    pub fn schedule_roots(&self, t_max: f64) -> Vec<f64> {
        let steps = ((t_max / self.revival_period()) * 64.0).ceil().max(64.0) as usize;
        let h = t_max / steps as f64;
        let mut roots = Vec::new();
        let mut lo = 0.0;
        let mut f_lo = self.amplitude(lo);
        for k in 1..=steps {
            let hi = k as f64 * h;
            let f_hi = self.amplitude(hi);
            if f_lo == 0.0 {
                roots.push(lo);
            } else if f_lo.signum() != f_hi.signum() && f_hi != 0.0 {
                roots.push(self.bisect(lo, hi, f_lo));
            }
            lo = hi;
            f_lo = f_hi;
        }
        if f_lo == 0.0 {
            roots.push(lo);
        }
        roots
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = self.amplitude(mid);
            if f_mid == 0.0 {
                return mid;
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        if self.amplitude(lo).abs() <= self.amplitude(hi).abs() {
            lo
        } else {
            hi
        }
    }
}

/// `p(t)`: exactly 1 at `t = 0`, bounded by `exp(-λt)(1 + λ/d)²`.
pub fn p_of_t(params: &ChannelParams, t: f64) -> Result<f64> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let a = params.amplitude(t);
    Ok(((-params.lambda * t).exp() * a * a).clamp(0.0, 1.0))
}

/// The two Kraus operators of the single-qubit map at survival weight `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausPair {
    e0: ComplexMatrix,
    e1: ComplexMatrix,
    p: f64,
}

impl KrausPair {
    /// `E0 = |0><0| + sqrt(p)|1><1|`, `E1 = sqrt(1-p)|0><1|`.
    pub fn for_p(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Channel(format!("survival weight {p} outside [0, 1]")));
        }
        let e0 = ComplexMatrix::diagonal(&[ONE, C64::new(p.sqrt(), 0.0)]);
        let mut e1 = ComplexMatrix::zeros(2);
        e1[(0, 1)] = C64::new((1.0 - p).sqrt(), 0.0);
        Ok(Self { e0, e1, p })
    }

    pub fn e0(&self) -> &ComplexMatrix {
        &self.e0
    }

    pub fn e1(&self) -> &ComplexMatrix {
        &self.e1
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn operators(&self) -> [&ComplexMatrix; 2] {
        [&self.e0, &self.e1]
    }
}

pub fn kraus_pair(params: &ChannelParams, t: f64) -> Result<KrausPair> {
    KrausPair::for_p(p_of_t(params, t)?)
}

pub fn apply_single_qubit(rho: &DensityOperator, pair: &KrausPair) -> Result<DensityOperator> {
    if rho.n_qubits() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: rho.n_qubits() });
    }
    apply_channel_sequential(rho, pair)
}

/// Applies the single-qubit map to qubits 0, 1, ..., n-1 in turn. Maps on
/// distinct qubits commute, so this equals the full product-Kraus sum at
/// O(n·4^n) cost.
pub fn apply_channel_sequential(rho: &DensityOperator, pair: &KrausPair) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    let mut m = rho.matrix().clone();
    for q in 0..n {
        apply_on_qubit(&mut m, n, q, pair);
    }
    Ok(DensityOperator::from_matrix_unchecked(n, m))
}

fn apply_on_qubit(m: &mut ComplexMatrix, n: usize, q: usize, pair: &KrausPair) {
    let bit = qubit_bit(n, q);
    let d = m.dim();
    let ops: Vec<[C64; 4]> = pair
        .operators()
        .iter()
        .map(|e| [e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]])
        .collect();
    let data = m.as_mut_slice();
    for i in (0..d).filter(|i| i & bit == 0) {
        for j in (0..d).filter(|j| j & bit == 0) {
            let (i1, j1) = (i | bit, j | bit);
            let b = [data[i * d + j], data[i * d + j1], data[i1 * d + j], data[i1 * d + j1]];
            let mut out = [ZERO; 4];
            for e in &ops {
                // E B E†, with E = [[e0, e1], [e2, e3]]
                let eb = [
                    e[0] * b[0] + e[1] * b[2],
                    e[0] * b[1] + e[1] * b[3],
                    e[2] * b[0] + e[3] * b[2],
                    e[2] * b[1] + e[3] * b[3],
                ];
                out[0] += eb[0] * e[0].conj() + eb[1] * e[1].conj();
                out[1] += eb[0] * e[2].conj() + eb[1] * e[3].conj();
                out[2] += eb[2] * e[0].conj() + eb[3] * e[1].conj();
                out[3] += eb[2] * e[2].conj() + eb[3] * e[3].conj();
            }
            data[i * d + j] = out[0];
            data[i * d + j1] = out[1];
            data[i1 * d + j] = out[2];
            data[i1 * d + j1] = out[3];
        }
    }
}

/// Literal sum over all 2^n Kraus strings `E_a ⊗ ... ⊗ E_z`, each built by
/// explicit tensor products. Exponential in `n`; kept as a reference.
pub fn apply_channel_full_kraus(rho: &DensityOperator, pair: &KrausPair) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    if n > FULL_KRAUS_MAX_QUBITS {
        return Err(Error::QubitCount(n, 1, FULL_KRAUS_MAX_QUBITS));
    }
    let ops = pair.operators();
    let mut out = ComplexMatrix::zeros(rho.dim());
    for string in 0..1usize << n {
        let k = (0..n)
            .map(|q| ops[(string >> (n - 1 - q)) & 1])
            .fold(None, |acc: Option<ComplexMatrix>, e| {
                Some(match acc {
                    None => e.clone(),
                    Some(a) => tensor_product(&a, e),
                })
            })
            .expect("n >= 1");
        let term = k.matmul(rho.matrix()).matmul(&k.dagger());
        out.add_assign_scaled(&term, ONE);
    }
    Ok(DensityOperator::from_matrix_unchecked(n, out))
}
