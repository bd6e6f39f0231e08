//! Dense complex linear algebra for qubit registers.
//!
//! Ordering convention, used everywhere in this crate: qubit 0 is the most
//! significant bit of a computational-basis index. On `n` qubits, qubit `q`
//! therefore owns bit `n - 1 - q`, and `|q0 q1 ... q(n-1)>` has index
//! `q0·2^(n-1) + ... + q(n-1)`.

use std::ops::{Index, IndexMut};

use faer::{MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense representation supports.
pub const MAX_QUBITS: usize = 8;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

const HERMITIAN_INPUT_TOL: f64 = 1e-8;
const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
const DENSITY_TRACE_TOL: f64 = 1e-10;
const DENSITY_PSD_FLOOR: f64 = 1e-9;
const NORM_TOL: f64 = 1e-12;

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n, 1, MAX_QUBITS))
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    /// `|u><v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub(crate) fn as_faer(&self) -> MatRef<'_, C64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * d..(k + 1) * d];
                for (o, b) in out.data[i * d..(i + 1) * d].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self · v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|i| {
                self.data[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: C64) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `max |M - M†|` elementwise.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let d = self.dim;
        let mut out = self.clone();
        for i in 0..d {
            out.data[i * d + i] = C64::new(self.data[i * d + i].re, 0.0);
            for j in i + 1..d {
                let z = (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5;
                out.data[i * d + j] = z;
                out.data[j * d + i] = z.conj();
            }
        }
        out
    }

    /// True when `M + shift·I` admits a Cholesky factorization, i.e. every
    /// eigenvalue of the Hermitian matrix `M` exceeds `-shift`.
    pub fn eigenvalues_exceed(&self, shift: f64) -> bool {
        let mut shifted = self.as_faer().to_owned();
        for i in 0..self.dim {
            shifted[(i, i)] += C64::new(shift, 0.0);
        }
        shifted.llt(Side::Lower).is_ok()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Normalized state vector of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already be normalized to within 1e-12.
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: amplitudes.len() });
        }
        let norm2 = norm_sqr(&amplitudes);
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes onto the unit sphere.
    pub fn normalized(n_qubits: usize, mut amplitudes: Vec<C64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: amplitudes.len() });
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Computational basis state from a bitstring such as `"010"`.
    pub fn basis(bitstring: &str) -> Result<Self> {
        let index = parse_bitstring(bitstring)?;
        let n = bitstring.len();
        check_qubits(n)?;
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        Ok(Self { n_qubits: n, amplitudes: amps })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            n_qubits: self.n_qubits,
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn parse_bitstring(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::InvalidSelection(format!("bitstring {bits:?} has invalid length")));
    }
    bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidSelection(format!("bitstring {bits:?} contains {c:?}"))),
    })
}

/// Hermitian, unit-trace, positive semidefinite operator on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity (1e-10), unit trace (1e-10) and positivity
    /// (minimum eigenvalue above -1e-9).
    pub fn new(n_qubits: usize, matrix: ComplexMatrix) -> Result<Self> {
        check_qubits(n_qubits)?;
        if matrix.dim() != 1 << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, got: matrix.dim() });
        }
        let defect = matrix.hermiticity_defect();
        if defect > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TRACE_TOL || tr.im.abs() > DENSITY_TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        if !matrix.eigenvalues_exceed(DENSITY_PSD_FLOOR) {
            return Err(Error::InvalidDensity("matrix has a negative eigenvalue".into()));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// For outputs of maps that preserve the density-operator invariants.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.dim(), 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let d = 1 << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: ComplexMatrix::identity(d).scaled(C64::new(1.0 / d as f64, 0.0)),
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

impl From<&PureState> for DensityOperator {
    fn from(psi: &PureState) -> Self {
        psi.projector()
    }
}

/// A cut of the register into `block_a` and its complement, `|A| <= n - |A|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n_qubits: usize,
    block_a: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_qubits: usize, block_a: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_qubits(n_qubits)?;
        let mut block: Vec<usize> = block_a.into_iter().collect();
        block.sort_unstable();
        block.dedup();
        if block.is_empty() {
            return Err(Error::InvalidSelection("bipartition block is empty".into()));
        }
        if let Some(&q) = block.iter().find(|&&q| q >= n_qubits) {
            return Err(Error::InvalidSelection(format!("qubit {q} out of range for n = {n_qubits}")));
        }
        if 2 * block.len() > n_qubits {
            return Err(Error::InvalidSelection(format!(
                "block of size {} is larger than its complement (n = {n_qubits})",
                block.len()
            )));
        }
        Ok(Self { n_qubits, block_a: block })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn block_a(&self) -> &[usize] {
        &self.block_a
    }

    pub fn block_b(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|q| !self.block_a.contains(q)).collect()
    }

    /// `|A|`.
    #[inline]
    pub fn m(&self) -> usize {
        self.block_a.len()
    }

    pub fn mask_a(&self) -> usize {
        self.block_a.iter().map(|&q| qubit_bit(self.n_qubits, q)).fold(0, |a, b| a | b)
    }
}

/// Kronecker product; the left factor occupies the more significant index
/// block, so `tensor_product(A, B)` puts `A` on the lower-numbered qubits.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let d = da * db;
    let mut out = ComplexMatrix::zeros(d);
    for ia in 0..da {
        for ja in 0..da {
            let x = a[(ia, ja)];
            if x == ZERO {
                continue;
            }
            for ib in 0..db {
                let row = (ia * db + ib) * d + ja * db;
                for jb in 0..db {
                    out.data[row + jb] = x * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Spreads the bits of `value` (most significant first) over the positions
/// of `qubits` within an `n`-qubit index.
pub(crate) fn scatter_indices(n_qubits: usize, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|v| {
            qubits
                .iter()
                .enumerate()
                .filter(|(r, _)| v >> (k - 1 - r) & 1 == 1)
                .map(|(_, &q)| qubit_bit(n_qubits, q))
                .fold(0, |a, b| a | b)
        })
        .collect()
}

/// Reduced state on `keep`; kept qubits retain their relative order.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let n = rho.n_qubits();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::InvalidSelection("partial trace must keep at least one qubit".into()));
    }
    if let Some(&q) = kept.iter().find(|&&q| q >= n) {
        return Err(Error::InvalidSelection(format!("qubit {q} out of range for n = {n}")));
    }
    let traced: Vec<usize> = (0..n).filter(|q| !kept.contains(q)).collect();
    let kept_idx = scatter_indices(n, &kept);
    let traced_idx = scatter_indices(n, &traced);
    let dk = kept_idx.len();
    let src = rho.matrix();
    let mut out = ComplexMatrix::zeros(dk);
    for (a, &ia) in kept_idx.iter().enumerate() {
        for (b, &ib) in kept_idx.iter().enumerate() {
            out[(a, b)] = traced_idx.iter().map(|&t| src[(ia | t, ib | t)]).sum();
        }
    }
    Ok(DensityOperator::from_matrix_unchecked(kept.len(), out))
}

/// Transpose on the indices of `part.block_a()`.
pub fn partial_transpose(rho: &DensityOperator, part: &Bipartition) -> Result<ComplexMatrix> {
    if part.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), got: part.n_qubits() });
    }
    Ok(partial_transpose_mask(rho.matrix(), part.mask_a()))
}

pub(crate) fn partial_transpose_mask(m: &ComplexMatrix, mask: usize) -> ComplexMatrix {
    let d = m.dim();
    let keep = !mask;
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let src_i = (i & keep) | (j & mask);
            let src_j = (j & keep) | (i & mask);
            out.data[i * d + j] = m.data[src_i * d + src_j];
        }
    }
    out
}

/// Full real spectrum of a Hermitian matrix, ascending.
///
/// The input is symmetrized as `(M + M†)/2`; a defect above 1e-8 is an error.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let sym = m.hermitian_part();
    let mut vals = sym
        .as_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `Tr ρ²`, via the Frobenius norm.
pub fn purity(rho: &DensityOperator) -> f64 {
    rho.matrix().as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `<b|ρ|b>` for a computational basis state given as a bitstring.
pub fn fidelity_with_basis_state(rho: &DensityOperator, bitstring: &str) -> Result<f64> {
    if bitstring.len() != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), got: bitstring.len() });
    }
    let idx = parse_bitstring(bitstring)?;
    Ok(rho.matrix()[(idx, idx)].re)
}
