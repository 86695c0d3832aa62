//! Eigensolver internals: Hessenberg reduction, shifted QR iteration for the
//! eigenvalues, and inverse iteration for the eigenvectors.
//!
//! Eigenvalues are extracted from the Hessenberg form by explicit shifted QR
//! with the Wilkinson shift and deflation from the bottom; the original
//! matrix never needs accumulated transformations because each eigenvector
//! is recovered by inverse iteration with the converged eigenvalue, followed
//! by one Rayleigh-quotient polish. Clustered eigenvalues get their vectors
//! orthogonalized under the bilinear form when the cluster is non-defective;
//! a defective pair (an exceptional point) keeps its near-parallel vectors
//! and is flagged by the caller's normalization step.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{fix_phase, normalize_vector, ComplexMatrix, EigenSystem, LinalgError};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EPS: f64 = f64::EPSILON;
/// Max QR sweeps per eigenvalue before giving up.
const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 60;
/// Eigenvalues closer than this (relative to the matrix norm) are treated as
/// one cluster for eigenvector orthogonalization.
const CLUSTER_TOL: f64 = 1e-8;

pub(super) fn decompose(m: &ComplexMatrix) -> Result<EigenSystem, LinalgError> {
    let n = m.dim();
    if n == 1 {
        return Ok(EigenSystem {
            values: vec![m.get(0, 0)],
            vectors: vec![vec![Complex64::new(1.0, 0.0)]],
            normalized: vec![true],
            residual: 0.0,
        });
    }

    let mut h = m.raw().to_vec();
    hessenberg_in_place(&mut h, n);
    let values = qr_eigenvalues(&mut h, n)?;
    eigenvectors_by_inverse_iteration(m, values)
}

/// Unitary similarity reduction to upper Hessenberg form via complex
/// Householder reflections. Works in place on a row-major buffer.
fn hessenberg_in_place(h: &mut [Complex64], n: usize) {
    let idx = |i: usize, j: usize| i * n + j;
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n.
        let mut norm_sq = 0.0;
        for i in (k + 1)..n {
            norm_sq += h[idx(i, k)].norm_sqr();
        }
        let x0 = h[idx(k + 1, k)];
        let col_norm = norm_sq.sqrt();
        if col_norm <= EPS * 1e-280 {
            continue;
        }
        // alpha = -exp(i arg(x0)) * ||x||, so v = x - alpha e1 cannot cancel.
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * col_norm;
        let mut v = vec![ZERO; n - k - 1];
        v[0] = x0 - alpha;
        for i in (k + 2)..n {
            v[i - k - 1] = h[idx(i, k)];
        }
        let vnorm_sq: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sq;

        // Left: H <- (I - beta v v^dagger) H on rows k+1.., columns k..n.
        for j in k..n {
            let mut s = ZERO;
            for i in 0..v.len() {
                s += v[i].conj() * h[idx(k + 1 + i, j)];
            }
            s *= beta;
            for i in 0..v.len() {
                h[idx(k + 1 + i, j)] -= s * v[i];
            }
        }
        // Right: H <- H (I - beta v v^dagger) on columns k+1.., all rows.
        for i in 0..n {
            let mut s = ZERO;
            for j in 0..v.len() {
                s += h[idx(i, k + 1 + j)] * v[j];
            }
            s *= beta;
            for j in 0..v.len() {
                h[idx(i, k + 1 + j)] -= s * v[j].conj();
            }
        }
        // Entries below the subdiagonal of column k are now zero.
        h[idx(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[idx(i, k)] = ZERO;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix by explicit shifted QR with
/// complex Givens rotations, deflating from the bottom. Keeps positional
/// order: the eigenvalue deflated at diagonal slot i lands in `values[i]`.
fn qr_eigenvalues(h: &mut [Complex64], n: usize) -> Result<Vec<Complex64>, LinalgError> {
    let idx = |i: usize, j: usize| i * n + j;
    let scale: f64 = (0..n * n).map(|k| h[k].norm()).sum::<f64>().max(1e-300);
    let mut values = vec![ZERO; n];
    let mut active = n;
    let mut total_iters = 0usize;
    let mut stagnation = 0usize;
    let max_iters = MAX_QR_SWEEPS_PER_EIGENVALUE * n;

    while active > 0 {
        // Deflate any negligible subdiagonal inside the active window.
        for i in 1..active {
            let sub = h[idx(i, i - 1)].norm();
            let local = h[idx(i - 1, i - 1)].norm() + h[idx(i, i)].norm();
            let tol = EPS * if local > 0.0 { local } else { scale };
            if sub <= tol {
                h[idx(i, i - 1)] = ZERO;
            }
        }
        if active == 1 || h[idx(active - 1, active - 2)] == ZERO {
            values[active - 1] = h[idx(active - 1, active - 1)];
            active -= 1;
            stagnation = 0;
            continue;
        }
        // Start of the unreduced block ending at active-1.
        let mut lo = active - 1;
        while lo > 0 && h[idx(lo, lo - 1)] != ZERO {
            lo -= 1;
        }

        total_iters += 1;
        stagnation += 1;
        if total_iters > max_iters {
            return Err(LinalgError::ConvergenceFailure { iterations: total_iters });
        }

        // Wilkinson shift from the trailing 2x2, with an occasional ad hoc
        // shift to break symmetry-induced stagnation.
        let a = h[idx(active - 2, active - 2)];
        let b = h[idx(active - 2, active - 1)];
        let c = h[idx(active - 1, active - 2)];
        let d = h[idx(active - 1, active - 1)];
        let mut mu = {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let lam1 = (a + d) * 0.5 + disc;
            let lam2 = (a + d) * 0.5 - disc;
            if (lam1 - d).norm() <= (lam2 - d).norm() { lam1 } else { lam2 }
        };
        if stagnation > 0 && stagnation % 12 == 0 {
            mu += Complex64::new(0.75 * c.norm(), 0.0);
        }

        // Explicit shifted QR step on the block lo..active.
        for i in lo..active {
            h[idx(i, i)] -= mu;
        }
        let mut rotations = Vec::with_capacity(active - lo - 1);
        for k in lo..(active - 1) {
            let x = h[idx(k, k)];
            let y = h[idx(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (ck, sk) = if r == 0.0 {
                (Complex64::new(1.0, 0.0), ZERO)
            } else {
                (x / r, y / r)
            };
            rotations.push((ck, sk));
            for j in k..active {
                let hk = h[idx(k, j)];
                let hk1 = h[idx(k + 1, j)];
                h[idx(k, j)] = ck.conj() * hk + sk.conj() * hk1;
                h[idx(k + 1, j)] = -sk * hk + ck * hk1;
            }
        }
        for (k, &(ck, sk)) in rotations.iter().enumerate() {
            let k = lo + k;
            let top = (k + 2).min(active);
            for i in lo..top {
                let hk = h[idx(i, k)];
                let hk1 = h[idx(i, k + 1)];
                h[idx(i, k)] = ck * hk + sk * hk1;
                h[idx(i, k + 1)] = -sk.conj() * hk + ck.conj() * hk1;
            }
        }
        for i in lo..active {
            h[idx(i, i)] += mu;
        }
    }
    Ok(values)
}

/// LU factorization with partial pivoting; near-zero pivots are replaced by
/// a tiny value so inverse iteration can solve against a singular shift.
struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &ComplexMatrix, shift: Complex64, tiny: f64) -> Self {
        let n = a.dim();
        let mut lu = a.raw().to_vec();
        for i in 0..n {
            lu[i * n + i] -= shift;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_norm = lu[perm[k] * n + k].norm();
            for r in (k + 1)..n {
                let cand = lu[perm[r] * n + k].norm();
                if cand > pivot_norm {
                    pivot_norm = cand;
                    pivot_row = r;
                }
            }
            perm.swap(k, pivot_row);
            let pk = perm[k];
            if lu[pk * n + k].norm() < tiny {
                lu[pk * n + k] = Complex64::new(tiny, 0.0);
            }
            let pivot = lu[pk * n + k];
            for r in (k + 1)..n {
                let pr = perm[r];
                let factor = lu[pr * n + k] / pivot;
                lu[pr * n + k] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[pk * n + j];
                    lu[pr * n + j] -= sub;
                }
            }
        }
        Self { n, lu, perm }
    }

    /// Forward/back substitution for one right-hand side.
    fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y = vec![ZERO; n];
        for i in 0..n {
            let mut s = b[self.perm[i]];
            for j in 0..i {
                s -= self.lu[self.perm[i] * n + j] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![ZERO; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in (i + 1)..n {
                s -= self.lu[self.perm[i] * n + j] * x[j];
            }
            x[i] = s / self.lu[self.perm[i] * n + i];
        }
        x
    }
}

fn eigenvectors_by_inverse_iteration(
    m: &ComplexMatrix,
    mut values: Vec<Complex64>,
) -> Result<EigenSystem, LinalgError> {
    let n = m.dim();
    let anorm = m.inf_norm().max(1e-300);
    let tiny = EPS * anorm;
    let target = 64.0 * EPS * anorm;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0e1f);

    let mut vectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut residual = 0.0_f64;

    for k in 0..n {
        let mut lambda = values[k];
        // Start near the k-th basis vector; the noise guards against a start
        // that happens to be orthogonal to the eigendirection.
        let mut b: Vec<Complex64> = (0..n)
            .map(|i| {
                let base = if i == k { 1.0 } else { 0.0 };
                Complex64::new(
                    base + 1e-2 * rng.gen_range(-1.0..1.0),
                    1e-2 * rng.gen_range(-1.0..1.0),
                )
            })
            .collect();

        let mut lu = Lu::factor(m, lambda, tiny);
        let mut best_vec: Option<Vec<Complex64>> = None;
        let mut best_res = f64::INFINITY;
        for _ in 0..5 {
            let mut x = lu.solve_vec(&b);
            normalize_l2(&mut x);
            let res = eigen_residual(m, lambda, &x);
            if res < best_res {
                best_res = res;
                best_vec = Some(x.clone());
            }
            if res <= target {
                break;
            }
            b = x;
        }
        let mut vec = best_vec.expect("at least one iterate");

        // Rayleigh polish: with the exact eigenvector the quotient recovers
        // the exact eigenvalue even for a defective matrix, where QR only
        // resolves the cluster mean to sqrt(eps).
        let rq = rayleigh(m, &vec);
        let res_rq = eigen_residual(m, rq, &vec);
        if res_rq < best_res {
            lambda = rq;
            best_res = res_rq;
            lu = Lu::factor(m, lambda, tiny);
            let mut x = lu.solve_vec(&vec);
            normalize_l2(&mut x);
            let res = eigen_residual(m, lambda, &x);
            if res < best_res {
                best_res = res;
                vec = x;
            }
            let rq2 = rayleigh(m, &vec);
            let res2 = eigen_residual(m, rq2, &vec);
            if res2 < best_res {
                best_res = res2;
                lambda = rq2;
            }
        }
        values[k] = lambda;

        // Orthogonality inside a degenerate cluster does not come from
        // symmetry alone; enforce it under the bilinear form when possible.
        let cluster_tol = CLUSTER_TOL * anorm;
        let mut candidate = vec.clone();
        let mut changed = false;
        for j in 0..k {
            if (values[j] - lambda).norm() > cluster_tol {
                continue;
            }
            let prev = &vectors[j];
            let prev_bilinear: Complex64 = prev.iter().map(|x| x * x).sum();
            if prev_bilinear.norm() <= 1e-10 {
                continue; // defective partner, nothing to orthogonalize against
            }
            let cross: Complex64 = prev.iter().zip(&candidate).map(|(p, c)| p * c).sum();
            let coeff = cross / prev_bilinear;
            for (ci, pi) in candidate.iter_mut().zip(prev) {
                *ci -= coeff * pi;
            }
            changed = true;
        }
        if changed {
            let norm: f64 = candidate.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-8 {
                for x in candidate.iter_mut() {
                    *x /= norm;
                }
                let res = eigen_residual(m, lambda, &candidate);
                // Accept only if the orthogonalized vector is still an
                // eigenvector; at a defective point it is not.
                if res <= (best_res * 4.0).max(target) {
                    vec = candidate;
                    best_res = res;
                }
            }
        }

        residual = residual.max(best_res);
        vectors.push(vec);
    }

    // Biorthonormalize with a per-vector success flag; failures keep the
    // unit-2-norm vector with the deterministic phase convention.
    let mut normalized = vec![true; n];
    for (i, v) in vectors.iter_mut().enumerate() {
        match normalize_vector(v) {
            Ok(()) => {}
            Err(LinalgError::SelfOrthogonal { .. }) => {
                normalized[i] = false;
                normalize_l2(v);
                fix_phase(v);
            }
            Err(e) => return Err(e),
        }
    }

    Ok(EigenSystem { values, vectors, normalized, residual })
}

fn normalize_l2(v: &mut [Complex64]) {
    let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
}

fn eigen_residual(m: &ComplexMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let mv = m.mul_vec(v);
    mv.iter()
        .zip(v)
        .map(|(a, x)| (a - lambda * x).norm())
        .fold(0.0, f64::max)
}

fn rayleigh(m: &ComplexMatrix, v: &[Complex64]) -> Complex64 {
    let mv = m.mul_vec(v);
    let num: Complex64 = v.iter().zip(&mv).map(|(x, y)| x.conj() * y).sum();
    let den: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    num / den
}
