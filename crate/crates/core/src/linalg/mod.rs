//! Dense complex linear algebra for the model Hamiltonians.
//!
//! The matrices are complex symmetric (not Hermitian), so left eigenvectors
//! are plain transposes of right ones and the natural normalization is
//! bilinear: `Phi_i^T Phi_j = delta_ij`, transpose without conjugation. The
//! bilinear self-product can vanish, which is exactly what happens at an
//! exceptional point; normalization then fails with [`LinalgError::SelfOrthogonal`]
//! instead of attempting Jordan structure.

mod solver;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not symmetric: |m[{row}][{col}] - m[{col}][{row}]| = {deviation:e}")]
    NotSymmetric { row: usize, col: usize, deviation: f64 },
    #[error("QR iteration did not converge within {iterations} steps")]
    ConvergenceFailure { iterations: usize },
    #[error("vector {index} is self-orthogonal (|v^T v| = {norm:e}); eigenvectors coalesce at an exceptional point")]
    SelfOrthogonal { index: usize, norm: f64 },
    #[error("zero vector")]
    ZeroVector,
}

/// Dense square matrix of complex entries, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of dimension `n >= 1`.
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix dimension must be >= 1");
        Self { dim: n, entries: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, LinalgError> {
        let n = rows.len();
        assert!(n >= 1, "matrix dimension must be >= 1");
        let mut m = Self::zeros(n);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), n, "row {i} has wrong length");
            for (j, v) in row.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.entries[i * self.dim + j] = value;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Induced infinity norm: maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    fn check_symmetric(&self) -> Result<(), LinalgError> {
        let tol = 1e-12 * self.inf_norm().max(1.0);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let dev = (self.get(i, j) - self.get(j, i)).norm();
                if dev > tol {
                    return Err(LinalgError::NotSymmetric { row: i, col: j, deviation: dev });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn raw(&self) -> &[Complex64] {
        &self.entries
    }
}

/// Eigenvalues and biorthonormalized right eigenvectors at one parameter
/// value.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Eigenvalues `E_i - (i/2) Gamma_i`, in the solver's positional order.
    pub values: Vec<Complex64>,
    /// Right eigenvectors, one row per eigenvalue. Normalized to
    /// `Phi^T Phi = 1` where possible, else to unit 2-norm.
    pub vectors: Vec<Vec<Complex64>>,
    /// Whether bilinear normalization succeeded per vector; `false` marks an
    /// exceptional-point-adjacent vector whose diagnostics diverge.
    pub normalized: Vec<bool>,
    /// Max over eigenpairs of `||H v - lambda v||_inf` with `||v||_2 = 1`.
    /// (Unit 2-norm keeps the residual meaningful near exceptional points,
    /// where the biorthonormalized vectors blow up.)
    pub residual: f64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Energy of eigenvalue `i`, `E_i = Re(curly E_i)`.
    pub fn energy(&self, i: usize) -> f64 {
        self.values[i].re
    }

    /// Half width of eigenvalue `i`, `Gamma_i/2 = -Im(curly E_i)`.
    pub fn width_half(&self, i: usize) -> f64 {
        -self.values[i].im
    }
}

/// Solve the complex-symmetric eigenproblem.
///
/// Reduction to upper Hessenberg form followed by shifted QR iteration gives
/// the eigenvalues; eigenvectors come from inverse iteration on the original
/// matrix with the converged eigenvalue. Degenerate clusters are
/// orthogonalized under the bilinear form when the matrix is non-defective;
/// exactly at an exceptional point the defective pair stays near-parallel
/// and is flagged instead (see [`EigenSystem::normalized`]).
pub fn eigendecompose(m: &ComplexMatrix) -> Result<EigenSystem, LinalgError> {
    m.check_finite()?;
    m.check_symmetric()?;
    solver::decompose(m)
}

/// Normalize a set of eigenvectors to `Phi_i^T Phi_i = 1`.
///
/// The remaining sign freedom is fixed deterministically: the
/// largest-magnitude component of each vector gets a positive real part
/// (ties broken by lowest index; an exactly zero real part gets a positive
/// imaginary part).
pub fn biorthonormalize(vectors: &mut [Vec<Complex64>]) -> Result<(), LinalgError> {
    for (i, v) in vectors.iter_mut().enumerate() {
        normalize_vector(v).map_err(|e| match e {
            LinalgError::SelfOrthogonal { norm, .. } => LinalgError::SelfOrthogonal { index: i, norm },
            other => other,
        })?;
    }
    Ok(())
}

/// The bilinear self-product is considered zero below this fraction of the
/// Hermitian norm; equivalently, normalization fails when the phase rigidity
/// drops below 1e-12.
pub const SELF_ORTHOGONAL_TOL: f64 = 1e-12;

pub(crate) fn normalize_vector(v: &mut [Complex64]) -> Result<(), LinalgError> {
    let bilinear: Complex64 = v.iter().map(|x| x * x).sum();
    let hermitian: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if hermitian == 0.0 || !hermitian.is_finite() {
        return Err(LinalgError::ZeroVector);
    }
    if bilinear.norm() <= SELF_ORTHOGONAL_TOL * hermitian {
        return Err(LinalgError::SelfOrthogonal { index: 0, norm: bilinear.norm() });
    }
    let scale = bilinear.sqrt();
    for x in v.iter_mut() {
        *x /= scale;
    }
    fix_phase(v);
    Ok(())
}

/// Flip the residual +-1 sign so the largest-magnitude component has a
/// positive real part.
pub(crate) fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, x) in v.iter().enumerate() {
        let n = x.norm_sqr();
        if n > best_norm + 1e-300 && n > best_norm {
            best = i;
            best_norm = n;
        }
    }
    let lead = v[best];
    let flip = lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0);
    if flip {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Phase rigidity `r = |v^T v| / (v^dagger v)`, in [0, 1].
///
/// Equals 1 for any real vector and 0 for a chiral combination like (1, i);
/// for a biorthonormalized eigenvector it is exactly `1/A` with
/// `A = Phi^dagger Phi`.
pub fn phase_rigidity(v: &[Complex64]) -> Result<f64, LinalgError> {
    if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(LinalgError::NonFinite { row: 0, col: 0 });
    }
    let hermitian: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    if hermitian == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    let bilinear: Complex64 = v.iter().map(|x| x * x).sum();
    Ok((bilinear.norm() / hermitian).min(1.0))
}

/// Hermitian overlap `B_i^j = Phi_i^dagger Phi_j` of two biorthonormalized
/// eigenvectors, `i != j`.
///
/// For a complex-symmetric pair the overlap should be purely imaginary; a
/// real part beyond 1e-8 is logged as a diagnostic warning, not an error.
pub fn overlap_offdiag(vi: &[Complex64], vj: &[Complex64]) -> Result<Complex64, LinalgError> {
    for v in [vi, vj] {
        if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return Err(LinalgError::NonFinite { row: 0, col: 0 });
        }
    }
    assert_eq!(vi.len(), vj.len());
    let overlap: Complex64 = vi.iter().zip(vj).map(|(a, b)| a.conj() * b).sum();
    if overlap.re.abs() > 1e-8 {
        log::warn!(
            "off-diagonal overlap has real part {:.3e} (expected purely imaginary)",
            overlap.re
        );
    }
    Ok(overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twolevel::{eigenvalues_closed, TwoLevelInput};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_by_two(eps1: Complex64, eps2: Complex64, omega: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_rows(vec![vec![eps1, omega], vec![omega, eps2]]).unwrap()
    }

    /// Unordered matching distance between two eigenvalue sets.
    fn set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        assert_eq!(a.len(), b.len());
        let mut remaining: Vec<Complex64> = b.to_vec();
        let mut worst = 0.0_f64;
        for &x in a {
            let (k, d) = remaining
                .iter()
                .enumerate()
                .map(|(k, &y)| (k, (x - y).norm()))
                .min_by(|(_, d1), (_, d2)| d1.partial_cmp(d2).unwrap())
                .unwrap();
            worst = worst.max(d);
            remaining.swap_remove(k);
        }
        worst
    }

    #[test]
    fn diagonal_matrix_decomposes_to_unit_basis() {
        let m = ComplexMatrix::diagonal(&[c(0.75, -0.5), c(0.5, -0.5)]);
        let sys = eigendecompose(&m).unwrap();
        let expected = [c(0.75, -0.5), c(0.5, -0.5)];
        assert!(set_distance(&sys.values, &expected) < 1e-14);
        // Vectors are the unit basis, in diagonal order.
        for (i, v) in sys.vectors.iter().enumerate() {
            let idx = if (sys.values[i] - expected[0]).norm() < 1e-12 { 0 } else { 1 };
            assert_abs_diff_eq!((v[idx] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(v[1 - idx].norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn matches_two_level_closed_form() {
        let eps1 = c(0.5, -0.5);
        let eps2 = c(0.8, -0.5);
        let omega = c(0.05, 0.05);
        let sys = eigendecompose(&two_by_two(eps1, eps2, omega)).unwrap();
        let (p, m) = eigenvalues_closed(&TwoLevelInput::new(eps1, eps2, omega));
        assert!(set_distance(&sys.values, &[p, m]) < 1e-10);
    }

    #[test]
    fn degenerate_diagonal_with_imaginary_coupling() {
        // eps1 = eps2 = 1 - 0.5i with omega = 0.05i: equal energies, widths
        // split by +-0.05.
        let eps = c(1.0, -0.5);
        let sys = eigendecompose(&two_by_two(eps, eps, c(0.0, 0.05))).unwrap();
        let mut values = sys.values.clone();
        values.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert_abs_diff_eq!(values[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[0].im, -0.55, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1].im, -0.45, epsilon = 1e-12);
    }

    #[test]
    fn residual_and_trace_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 5, 8] {
            for _ in 0..20 {
                let mut m = ComplexMatrix::zeros(n);
                for i in 0..n {
                    for j in i..n {
                        let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        m.set(i, j, v);
                        m.set(j, i, v);
                    }
                }
                let sys = eigendecompose(&m).unwrap();
                assert!(sys.residual <= 1e-9 * m.inf_norm());
                let sum: Complex64 = sys.values.iter().sum();
                assert!((sum - m.trace()).norm() <= 1e-10 * m.inf_norm());
            }
        }
    }

    #[test]
    fn biorthonormalize_examples() {
        let mut set = vec![vec![c(1.0, 0.0), c(0.0, 0.0)]];
        biorthonormalize(&mut set).unwrap();
        assert_eq!(set[0], vec![c(1.0, 0.0), c(0.0, 0.0)]);

        let mut set = vec![vec![c(2.0, 0.0), c(0.0, 0.0)]];
        biorthonormalize(&mut set).unwrap();
        assert_abs_diff_eq!((set[0][0] - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-15);

        // The chiral combination (1, i) is self-orthogonal: 1^2 + i^2 = 0.
        let mut set = vec![vec![c(1.0, 0.0), c(0.0, 1.0)]];
        let err = biorthonormalize(&mut set).unwrap_err();
        assert!(matches!(err, LinalgError::SelfOrthogonal { .. }));
    }

    #[test]
    fn phase_rigidity_examples() {
        assert_abs_diff_eq!(
            phase_rigidity(&[c(0.3, 0.0), c(-1.2, 0.0), c(0.4, 0.0)]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            phase_rigidity(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            phase_rigidity(&[c(0.0, 0.0)]),
            Err(LinalgError::ZeroVector)
        ));
    }

    #[test]
    fn phase_rigidity_is_scale_invariant() {
        let v = [c(0.4, -0.3), c(1.1, 0.9), c(-0.2, 0.05)];
        let r = phase_rigidity(&v).unwrap();
        for scale in [c(2.0, 0.0), c(0.0, -3.5), c(1.4, 0.7)] {
            let scaled: Vec<Complex64> = v.iter().map(|&x| x * scale).collect();
            assert_abs_diff_eq!(phase_rigidity(&scaled).unwrap(), r, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_of_orthonormal_real_pair_is_zero() {
        let vi = [c(1.0, 0.0), c(0.0, 0.0)];
        let vj = [c(0.0, 0.0), c(1.0, 0.0)];
        assert_abs_diff_eq!(overlap_offdiag(&vi, &vj).unwrap().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn biorthogonality_of_decomposed_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let n = 4;
            let mut m = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let sys = eigendecompose(&m).unwrap();
            if sys.normalized.iter().any(|&ok| !ok) {
                continue; // random defective-adjacent draw
            }
            for i in 0..n {
                for j in 0..n {
                    let prod: Complex64 =
                        sys.vectors[i].iter().zip(&sys.vectors[j]).map(|(a, b)| a * b).sum();
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (prod - expected).norm() <= 1e-8,
                        "bilinear product ({i},{j}) = {prod} off by {:.2e}",
                        (prod - expected).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn reconstruction_from_spectral_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut tested = 0;
        while tested < 30 {
            let n = 3;
            let mut m = ComplexMatrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    m.set(i, j, v);
                    m.set(j, i, v);
                }
            }
            let sys = eigendecompose(&m).unwrap();
            // Skip near-defective draws: the spectral sum only exists for a
            // complete biorthogonal set.
            let mut gap = f64::INFINITY;
            for i in 0..n {
                for j in (i + 1)..n {
                    gap = gap.min((sys.values[i] - sys.values[j]).norm());
                }
            }
            if gap < 0.05 || sys.normalized.iter().any(|&ok| !ok) {
                continue;
            }
            tested += 1;
            for r in 0..n {
                for s in 0..n {
                    let sum: Complex64 = (0..n)
                        .map(|k| sys.values[k] * sys.vectors[k][r] * sys.vectors[k][s])
                        .sum();
                    assert!(
                        (sum - m.get(r, s)).norm() <= 1e-8,
                        "reconstruction off at ({r},{s}) by {:.2e}",
                        (sum - m.get(r, s)).norm()
                    );
                }
            }
        }
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(f64::NAN, 0.0));
        m.set(1, 0, c(f64::NAN, 0.0));
        assert!(matches!(eigendecompose(&m), Err(LinalgError::NonFinite { .. })));
    }

    #[test]
    fn asymmetric_matrices_are_rejected() {
        let mut m = ComplexMatrix::zeros(2);
        m.set(0, 1, c(0.5, 0.0));
        m.set(1, 0, c(-0.5, 0.0));
        assert!(matches!(eigendecompose(&m), Err(LinalgError::NotSymmetric { .. })));
    }
}
