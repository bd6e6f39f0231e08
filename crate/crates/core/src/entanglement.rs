//! Entanglement and mixedness functionals.
//!
//! Global entanglement is a two-level average over bipartitions: the mean
//! over each family of cuts with `m` qubits on the small side, then the mean
//! over families `m = 1..=n/2`.

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, partial_trace, partial_transpose_mask, purity, scatter_indices,
    Bipartition, ComplexMatrix, DensityOperator, PureState, C64,
};

/// Partial-transpose eigenvalues in `(-NEGATIVITY_FLOOR, 0)` count as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

pub const MIN_QUBITS: usize = 2;

/// Column names shared by every emitted table.
pub mod names {
    pub const N_GLOBAL: &str = "N_global";
    pub const E_MB: &str = "E_MB";
    pub const S_L: &str = "S_L";
    pub const PURITY: &str = "purity";

    pub fn family(m: usize) -> String {
        format!("N_m{m}")
    }
}

/// All non-equivalent bipartitions of an `n`-qubit register, grouped by the
/// size `m` of the smaller block. Balanced cuts of even `n` appear once, as
/// the block that contains qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitionFamilies {
    n_qubits: usize,
    families: Vec<Vec<Bipartition>>,
}

impl BipartitionFamilies {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn family_count(&self) -> usize {
        self.families.len()
    }

    /// Cuts with `m` qubits on the small side, `1 <= m <= n/2`.
    pub fn family(&self, m: usize) -> &[Bipartition] {
        &self.families[m - 1]
    }

    pub fn families(&self) -> impl Iterator<Item = (usize, &[Bipartition])> {
        self.families.iter().enumerate().map(|(i, f)| (i + 1, f.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.families.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn enumerate_bipartitions(n: usize) -> Result<BipartitionFamilies> {
    if !(MIN_QUBITS..=crate::linalg::MAX_QUBITS).contains(&n) {
        return Err(Error::QubitCount(n, MIN_QUBITS, crate::linalg::MAX_QUBITS));
    }
    let mut families = Vec::with_capacity(n / 2);
    for m in 1..=n / 2 {
        let mut family = Vec::new();
        for subset in 0u32..1 << n {
            if subset.count_ones() as usize != m {
                continue;
            }
            let block: Vec<usize> = (0..n).filter(|q| subset >> q & 1 == 1).collect();
            if 2 * m == n && block[0] != 0 {
                continue;
            }
            family.push(Bipartition::new(n, block)?);
        }
        family.sort_by(|a, b| a.block_a().cmp(b.block_a()));
        families.push(family);
    }
    Ok(BipartitionFamilies { n_qubits: n, families })
}

fn normalization(m: usize) -> f64 {
    2.0 / ((1u64 << m) - 1) as f64
}

fn check_part(rho: &DensityOperator, part: &Bipartition) -> Result<()> {
    if rho.n_qubits() != part.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), got: part.n_qubits() });
    }
    Ok(())
}

/// `2/(2^m - 1) · Σ|α_i|` over the negative eigenvalues of the partial
/// transpose on the `m`-qubit block.
pub fn negativity(rho: &DensityOperator, part: &Bipartition) -> Result<f64> {
    check_part(rho, part)?;
    let pt = partial_transpose_mask(rho.matrix(), part.mask_a());
    Ok(normalization(part.m()) * negative_mass(&pt)?)
}

/// `Σ|α|` over eigenvalues below `-NEGATIVITY_FLOOR`.
fn negative_mass(pt: &ComplexMatrix) -> Result<f64> {
    // A Cholesky factorization of pt + floor·I proves every eigenvalue lies
    // above -floor, which is the zero-negativity condition; it costs a
    // fraction of a full eigensolve.
    if pt.eigenvalues_exceed(NEGATIVITY_FLOOR) {
        return Ok(0.0);
    }
    Ok(hermitian_eigenvalues(pt)?
        .into_iter()
        .take_while(|&a| a < 0.0)
        .filter(|&a| a < -NEGATIVITY_FLOOR)
        .map(f64::abs)
        .sum())
}

/// Global negativity with its per-family breakdown.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalNegativity {
    pub global: f64,
    /// Index `m - 1` holds the family mean `E^(m)`.
    pub per_family: Vec<f64>,
}

fn two_level_mean(
    fams: &BipartitionFamilies,
    mut per_cut: impl FnMut(&Bipartition) -> Result<f64>,
) -> Result<GlobalNegativity> {
    let mut per_family = Vec::with_capacity(fams.family_count());
    for (_, family) in fams.families() {
        let mut sum = 0.0;
        for part in family {
            sum += per_cut(part)?;
        }
        per_family.push(sum / family.len() as f64);
    }
    let global = per_family.iter().sum::<f64>() / per_family.len() as f64;
    Ok(GlobalNegativity { global, per_family })
}

fn check_fams(n: usize, fams: &BipartitionFamilies) -> Result<()> {
    if n != fams.n_qubits() {
        return Err(Error::DimensionMismatch { expected: n, got: fams.n_qubits() });
    }
    Ok(())
}

pub fn global_entanglement(rho: &DensityOperator, fams: &BipartitionFamilies) -> Result<GlobalNegativity> {
    check_fams(rho.n_qubits(), fams)?;
    two_level_mean(fams, |part| negativity(rho, part))
}

/// `2 Tr ρ² - Tr ρ_A² - Tr ρ_B²`. Negative values mean the indicator does
/// not detect entanglement.
pub fn e_mb(rho: &DensityOperator, part: &Bipartition) -> Result<f64> {
    check_part(rho, part)?;
    e_mb_with_purity(rho, part, purity(rho))
}

fn e_mb_with_purity(rho: &DensityOperator, part: &Bipartition, total: f64) -> Result<f64> {
    let a = purity(&partial_trace(rho, part.block_a())?);
    let b = purity(&partial_trace(rho, &part.block_b())?);
    Ok(2.0 * total - a - b)
}

/// E_MB averaged over bipartitions with the same two-level scheme as the
/// global negativity.
pub fn e_mb_global(rho: &DensityOperator, fams: &BipartitionFamilies) -> Result<f64> {
    check_fams(rho.n_qubits(), fams)?;
    let total = purity(rho);
    Ok(two_level_mean(fams, |part| e_mb_with_purity(rho, part, total))?.global)
}

/// Reduced state of a pure state on `keep`, built directly from amplitudes.
pub fn reduced_from_pure(psi: &PureState, keep: &[usize]) -> ComplexMatrix {
    let n = psi.n_qubits();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let kept_idx = scatter_indices(n, keep);
    let traced_idx = scatter_indices(n, &traced);
    let amps = psi.amplitudes();
    let dk = kept_idx.len();
    let mut out = ComplexMatrix::zeros(dk);
    for (a, &ia) in kept_idx.iter().enumerate() {
        for (b, &ib) in kept_idx.iter().enumerate().skip(a) {
            let z: C64 = traced_idx.iter().map(|&t| amps[ia | t] * amps[ib | t].conj()).sum();
            out[(a, b)] = z;
            out[(b, a)] = z.conj();
        }
    }
    out
}

fn matrix_purity(m: &ComplexMatrix) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// `sqrt(2 (1 - Tr ρ_A²))` for the marginal on `part.block_a()`.
pub fn concurrence_pure(psi: &PureState, part: &Bipartition) -> Result<f64> {
    if psi.n_qubits() != part.n_qubits() {
        return Err(Error::DimensionMismatch { expected: psi.n_qubits(), got: part.n_qubits() });
    }
    let norm2 = crate::linalg::norm_sqr(psi.amplitudes());
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(norm2));
    }
    let r = matrix_purity(&reduced_from_pure(psi, part.block_a()));
    Ok((2.0 * (1.0 - r)).max(0.0).sqrt())
}

/// Mixedness normalized to `[0, 1]`: `D/(D-1) · (1 - Tr ρ²)`.
pub fn linear_entropy(rho: &DensityOperator) -> f64 {
    let d = rho.dim() as f64;
    (d / (d - 1.0) * (1.0 - purity(rho))).clamp(0.0, 1.0)
}

/// Negativity of a pure state's projector from its Schmidt coefficients:
/// the partial transpose of `|ψ><ψ|` has eigenvalues `s_i` and
/// `±sqrt(s_i s_j)` for `i < j`.
pub fn pure_negativity(psi: &PureState, part: &Bipartition) -> Result<f64> {
    if psi.n_qubits() != part.n_qubits() {
        return Err(Error::DimensionMismatch { expected: psi.n_qubits(), got: part.n_qubits() });
    }
    let schmidt = hermitian_eigenvalues(&reduced_from_pure(psi, part.block_a()))?;
    let roots: Vec<f64> = schmidt.iter().map(|s| s.max(0.0).sqrt()).collect();
    let mut mass = 0.0;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let alpha = roots[i] * roots[j];
            if alpha > NEGATIVITY_FLOOR {
                mass += alpha;
            }
        }
    }
    Ok(normalization(part.m()) * mass)
}

/// Global negativity of a pure state via [`pure_negativity`]; agrees with
/// [`global_entanglement`] on the projector.
pub fn pure_global_entanglement(psi: &PureState, fams: &BipartitionFamilies) -> Result<GlobalNegativity> {
    check_fams(psi.n_qubits(), fams)?;
    two_level_mean(fams, |part| pure_negativity(psi, part))
}

/// Optional measures beyond the negativities, which are always computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasureSet {
    pub e_mb: bool,
    pub linear_entropy: bool,
    pub purity: bool,
}

impl MeasureSet {
    pub const ALL: Self = Self { e_mb: true, linear_entropy: true, purity: true };
    pub const NEGATIVITY_ONLY: Self = Self { e_mb: false, linear_entropy: false, purity: false };

    /// Parses a comma-separated list of measure names. Negativity names are
    /// accepted and ignored since they are always recorded.
    pub fn parse(list: &str) -> Result<Self> {
        let mut set = Self::NEGATIVITY_ONLY;
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                names::E_MB => set.e_mb = true,
                names::S_L => set.linear_entropy = true,
                names::PURITY => set.purity = true,
                names::N_GLOBAL => {}
                other if other.starts_with("N_m") && other[3..].parse::<usize>().is_ok() => {}
                other => return Err(Error::Config(format!("unknown measure {other:?}"))),
            }
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = vec![names::N_GLOBAL];
        if self.e_mb {
            v.push(names::E_MB);
        }
        if self.linear_entropy {
            v.push(names::S_L);
        }
        if self.purity {
            v.push(names::PURITY);
        }
        v
    }
}

impl Default for MeasureSet {
    fn default() -> Self {
        Self::ALL
    }
}

/// Every measure of one state. Unrequested optional measures are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureVector {
    pub global_negativity: f64,
    /// Index `m - 1` holds `N^(m)`.
    pub family_negativity: Vec<f64>,
    pub e_mb_global: f64,
    pub linear_entropy: f64,
    pub purity: f64,
}

pub fn evaluate(rho: &DensityOperator, fams: &BipartitionFamilies, set: MeasureSet) -> Result<MeasureVector> {
    let neg = global_entanglement(rho, fams)?;
    let p = purity(rho);
    Ok(MeasureVector {
        global_negativity: neg.global,
        family_negativity: neg.per_family,
        e_mb_global: if set.e_mb { e_mb_global(rho, fams)? } else { f64::NAN },
        linear_entropy: if set.linear_entropy { linear_entropy(rho) } else { f64::NAN },
        purity: if set.purity { p } else { f64::NAN },
    })
}

/// Tracing out everything but qubit `q` from a pure state.
pub fn single_qubit_marginal(psi: &PureState, q: usize) -> ComplexMatrix {
    reduced_from_pure(psi, &[q])
}
