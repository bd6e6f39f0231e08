//! Independent reference implementations used to cross-check the library.
//! Everything here is written from definitions, with no shared code paths.
#![allow(dead_code)]

use entdyn::linalg::{ComplexMatrix, DensityOperator, PureState, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit vector with i.i.d. complex Gaussian entries, which is Haar
/// distributed on the sphere.
pub fn gaussian_state(n: usize, rng: &mut impl Rng) -> PureState {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let v: Vec<C64> = (0..1usize << n).map(|_| c(normal.sample(rng), normal.sample(rng))).collect();
    PureState::normalized(n, v).unwrap()
}

/// Random density matrix `G G† / Tr(G G†)` with a Ginibre `G`.
pub fn random_density(n: usize, rng: &mut impl Rng) -> DensityOperator {
    let d = 1usize << n;
    let normal = Normal::new(0.0, 1.0).unwrap();
    let g: Vec<C64> = (0..d * d).map(|_| c(normal.sample(rng), normal.sample(rng))).collect();
    let mut m = vec![c(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = (0..d).map(|k| g[i * d + k] * g[j * d + k].conj()).sum();
        }
    }
    let tr: f64 = (0..d).map(|i| m[i * d + i].re).sum();
    let m = ComplexMatrix::from_fn(d, |i, j| {
        let z = (m[i * d + j] + m[j * d + i].conj()) / (2.0 * tr);
        if i == j { c(z.re, 0.0) } else { z }
    });
    DensityOperator::new(n, m).unwrap()
}

/// Haar-random 2×2 unitary from Euler angles.
pub fn random_qubit_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    let u: f64 = rng.random();
    let theta = u.sqrt().asin();
    let (a, b, g): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (alpha, beta, gamma) = (a * tau, b * tau, g * tau);
    let ct = theta.cos();
    let st = theta.sin();
    ComplexMatrix::from_row_major(
        2,
        vec![
            C64::from_polar(ct, alpha),
            C64::from_polar(st, beta),
            -C64::from_polar(st, gamma - beta),
            C64::from_polar(ct, gamma - alpha),
        ],
    )
    .unwrap()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(da * db, |i, j| a[(i / db, j / db)] * b[(i % db, j % db)])
}

pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = factors[0].clone();
    for f in &factors[1..] {
        out = kron(&out, f);
    }
    out
}

/// `U ρ U†` as a plain matrix.
pub fn conjugate(u: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    u.matmul(rho).matmul(&u.dagger())
}

/// Binary digits of `index`, most significant first, so digit `q` is qubit `q`.
fn digits(index: usize, n: usize) -> Vec<usize> {
    (0..n).map(|q| (index >> (n - 1 - q)) & 1).collect()
}

fn undigits(d: &[usize]) -> usize {
    d.iter().fold(0, |acc, &b| (acc << 1) | b)
}

/// Partial transpose on `block` by swapping row and column digits.
pub fn brute_partial_transpose(rho: &ComplexMatrix, n: usize, block: &[usize]) -> ComplexMatrix {
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let (mut di, mut dj) = (digits(i, n), digits(j, n));
            for &q in block {
                std::mem::swap(&mut di[q], &mut dj[q]);
            }
            out[(undigits(&di), undigits(&dj))] = rho[(i, j)];
        }
    }
    out
}

/// Reduced matrix on `keep` (in ascending qubit order) by explicit sums.
pub fn brute_partial_trace(rho: &ComplexMatrix, n: usize, keep: &[usize]) -> ComplexMatrix {
    let d = rho.dim();
    let k = keep.len();
    let mut out = ComplexMatrix::zeros(1 << k);
    for i in 0..d {
        for j in 0..d {
            let (di, dj) = (digits(i, n), digits(j, n));
            let traced_equal = (0..n).filter(|q| !keep.contains(q)).all(|q| di[q] == dj[q]);
            if traced_equal {
                let a = undigits(&keep.iter().map(|&q| di[q]).collect::<Vec<_>>());
                let b = undigits(&keep.iter().map(|&q| dj[q]).collect::<Vec<_>>());
                out[(a, b)] += rho[(i, j)];
            }
        }
    }
    out
}

/// Cyclic Jacobi on the real symmetric embedding `[[A, -B], [B, A]]` of
/// `H = A + iB`; each eigenvalue of `H` appears twice there.
pub fn jacobi_eigenvalues(h: &ComplexMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut a = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = (h[(i, j)] + h[(j, i)].conj()) * 0.5;
            a[i * m + j] = z.re;
            a[(i + n) * m + j + n] = z.re;
            a[i * m + j + n] = -z.im;
            a[(i + n) * m + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * m + j].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..m {
                    let (akp, akq) = (a[k * m + p], a[k * m + q]);
                    a[k * m + p] = cs * akp - sn * akq;
                    a[k * m + q] = sn * akp + cs * akq;
                }
                for k in 0..m {
                    let (apk, aqk) = (a[p * m + k], a[q * m + k]);
                    a[p * m + k] = cs * apk - sn * aqk;
                    a[q * m + k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

/// Negativity from the definition: brute partial transpose, Jacobi
/// spectrum, `2/(2^m - 1)` times the negative mass.
pub fn oracle_negativity(rho: &ComplexMatrix, n: usize, block: &[usize]) -> f64 {
    let pt = brute_partial_transpose(rho, n, block);
    let neg: f64 = jacobi_eigenvalues(&pt).into_iter().filter(|&a| a < -1e-12).map(f64::abs).sum();
    2.0 / ((1u64 << block.len()) as f64 - 1.0) * neg
}

/// Subsets of `0..n` of size `m`.
pub fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    (0usize..1 << n)
        .filter(|s| s.count_ones() as usize == m)
        .map(|s| (0..n).filter(|q| s >> q & 1 == 1).collect())
        .collect()
}

/// Global negativity averaging over every `m`-subset for each `m <= n/2`.
/// Complementary subsets give equal negativities, so counting both sides
/// of a balanced cut leaves the family mean unchanged.
pub fn oracle_global(rho: &ComplexMatrix, n: usize) -> (f64, Vec<f64>) {
    let fams: Vec<f64> = (1..=n / 2)
        .map(|m| {
            let s = subsets(n, m);
            s.iter().map(|b| oracle_negativity(rho, n, b)).sum::<f64>() / s.len() as f64
        })
        .collect();
    (fams.iter().sum::<f64>() / fams.len() as f64, fams)
}

pub fn kraus_matrices(p: f64) -> [ComplexMatrix; 2] {
    let z = c(0.0, 0.0);
    [
        ComplexMatrix::from_row_major(2, vec![c(1.0, 0.0), z, z, c(p.sqrt(), 0.0)]).unwrap(),
        ComplexMatrix::from_row_major(2, vec![z, c((1.0 - p).sqrt(), 0.0), z, z]).unwrap(),
    ]
}

/// Sum over all `2^n` tensor products of single-qubit Kraus operators.
pub fn tensor_kraus_channel(rho: &ComplexMatrix, n: usize, p: f64) -> ComplexMatrix {
    let ks = kraus_matrices(p);
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d);
    for word in 0..1usize << n {
        let factors: Vec<ComplexMatrix> = (0..n).map(|q| ks[(word >> q) & 1].clone()).collect();
        let k = kron_all(&factors);
        out.add_assign_scaled(&conjugate(&k, rho), c(1.0, 0.0));
    }
    out
}

/// Non-Markovian decay parameter written out directly.
pub fn p_direct(t: f64, lambda: f64) -> f64 {
    let d = (2.0 * lambda - lambda * lambda).sqrt();
    let f = (-lambda * t / 2.0).exp() * ((d * t / 2.0).cos() + lambda / d * (d * t / 2.0).sin());
    f * f
}
