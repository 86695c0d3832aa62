//! Declarative construction of the model Hamiltonian.
//!
//! An N-level model is a list of level trajectories `e_i(a)` with constant
//! half-widths `gamma_i/2`, plus one coupling rule: a complex scalar `omega`,
//! an optional Gaussian damping `omega exp(-(e_i - e_j)^2)`, and a channel
//! mask selecting which levels carry the coupling to the environment. The
//! Hamiltonian at parameter `a` is the complex-symmetric matrix with diagonal
//! `e_i(a) - (i/2) gamma_i` and the masked couplings off the diagonal.

use std::collections::BTreeSet;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model: {what}")]
    Invalid { what: String },
    #[error("shape mismatch: {what}")]
    ShapeMismatch { what: String },
    #[error("domain error: {what}")]
    Domain { what: String },
    #[error("unknown scenario '{name}'; run `scenario --list` for the registry")]
    UnknownScenario { name: String },
}

/// Parameter dependence of a level energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    /// `e(a) = offset + slope * a`.
    Linear { offset: f64, slope: f64 },
    /// `e(a) = scale / (scale + a)`, with a pole at `a = -scale`.
    Hyperbolic { scale: f64 },
}

impl Trajectory {
    pub fn linear(offset: f64, slope: f64) -> Self {
        Trajectory::Linear { offset, slope }
    }

    pub fn hyperbolic(scale: f64) -> Self {
        Trajectory::Hyperbolic { scale }
    }

    /// Level energy at parameter `a`.
    pub fn energy(&self, a: f64) -> f64 {
        match *self {
            Trajectory::Linear { offset, slope } => offset + slope * a,
            Trajectory::Hyperbolic { scale } => scale / (scale + a),
        }
    }

    /// The pole location for hyperbolic trajectories.
    pub fn pole(&self) -> Option<f64> {
        match *self {
            Trajectory::Linear { .. } => None,
            Trajectory::Hyperbolic { scale } => Some(-scale),
        }
    }
}

/// One resonance level: an energy trajectory and a constant half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSpec {
    pub trajectory: Trajectory,
    /// `gamma_i / 2 >= 0`, parameter independent.
    pub gamma_half: f64,
}

impl LevelSpec {
    pub fn new(trajectory: Trajectory, gamma_half: f64) -> Self {
        Self { trajectory, gamma_half }
    }

    /// Complex level energy `eps_i(a) = e_i(a) - (i/2) gamma_i`.
    pub fn eps(&self, a: f64) -> Complex64 {
        Complex64::new(self.trajectory.energy(a), -self.gamma_half)
    }
}

/// Which levels carry coupling to the environment.
///
/// An off-diagonal entry (i, j) is populated only if i or j is in the mask;
/// `All` corresponds to K = N open channels and a full matrix. Diagonal
/// self-energies are never added here: the model folds them into `eps_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelMask {
    All,
    /// 1-based level indices, as in "coupled to only the fourth channel".
    Levels(BTreeSet<usize>),
}

impl ChannelMask {
    pub fn levels<I: IntoIterator<Item = usize>>(idx: I) -> Self {
        ChannelMask::Levels(idx.into_iter().collect())
    }

    /// Number of open channels K implied by the mask (N when `All`).
    pub fn channel_count(&self, n: usize) -> usize {
        match self {
            ChannelMask::All => n,
            ChannelMask::Levels(set) => set.len(),
        }
    }

    /// Whether the (i, j) off-diagonal entry is admitted (0-based indices).
    pub fn admits(&self, i: usize, j: usize) -> bool {
        match self {
            ChannelMask::All => true,
            ChannelMask::Levels(set) => set.contains(&(i + 1)) || set.contains(&(j + 1)),
        }
    }
}

/// The coupling rule shared by all level pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    /// Complex coupling strength, identical for all admitted pairs.
    pub omega: Complex64,
    /// Apply the Gaussian damping `omega exp(-((e_i - e_j)/width)^2)`.
    pub gaussian: bool,
    pub channel_mask: ChannelMask,
    /// Energy scale of the Gaussian; the model units fix it to 1.
    pub gaussian_width: f64,
}

impl CouplingSpec {
    pub fn new(omega: Complex64, gaussian: bool, channel_mask: ChannelMask) -> Self {
        Self { omega, gaussian, channel_mask, gaussian_width: 1.0 }
    }

    /// Coupling between two levels at energies `ei`, `ej` (mask not applied).
    pub fn effective_omega(&self, ei: f64, ej: f64) -> Complex64 {
        if self.gaussian {
            let d = (ei - ej) / self.gaussian_width;
            self.omega * (-d * d).exp()
        } else {
            self.omega
        }
    }
}

/// A complete model: levels plus coupling rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub levels: Vec<LevelSpec>,
    pub coupling: CouplingSpec,
}

impl ModelSpec {
    pub fn new(levels: Vec<LevelSpec>, coupling: CouplingSpec) -> Result<Self, ModelError> {
        if levels.len() < 2 {
            return Err(ModelError::Invalid {
                what: format!("a model needs at least 2 levels, got {}", levels.len()),
            });
        }
        for (i, level) in levels.iter().enumerate() {
            if !(level.gamma_half >= 0.0) || !level.gamma_half.is_finite() {
                return Err(ModelError::Invalid {
                    what: format!("level {}: gamma_half must be finite and >= 0", i + 1),
                });
            }
        }
        if let ChannelMask::Levels(set) = &coupling.channel_mask {
            if set.is_empty() {
                return Err(ModelError::Invalid { what: "channel mask is empty".into() });
            }
            if let Some(&bad) = set.iter().find(|&&k| k == 0 || k > levels.len()) {
                return Err(ModelError::Invalid {
                    what: format!(
                        "channel mask index {bad} out of range 1..={}",
                        levels.len()
                    ),
                });
            }
        }
        if !(coupling.gaussian_width > 0.0) {
            return Err(ModelError::Invalid { what: "gaussian width must be > 0".into() });
        }
        Ok(Self { levels, coupling })
    }

    /// Number of levels N.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Error if any hyperbolic pole falls inside `[a_min, a_max]`.
    pub fn check_domain(&self, a_min: f64, a_max: f64) -> Result<(), ModelError> {
        for (i, level) in self.levels.iter().enumerate() {
            if let Some(pole) = level.trajectory.pole() {
                if pole >= a_min && pole <= a_max {
                    return Err(ModelError::Domain {
                        what: format!(
                            "level {} has a hyperbolic pole at a = {pole} inside [{a_min}, {a_max}]",
                            i + 1
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Unperturbed level energies `e_i(a)`.
    pub fn energies(&self, a: f64) -> Vec<f64> {
        self.levels.iter().map(|l| l.trajectory.energy(a)).collect()
    }

    /// Sum of the constant widths, `sum_i gamma_i`; the sweep conserves it.
    pub fn total_width(&self) -> f64 {
        self.levels.iter().map(|l| 2.0 * l.gamma_half).sum()
    }
}

/// Assemble the Hamiltonian at parameter `a`.
///
/// Diagonal entry i is `e_i(a) - (i/2) gamma_i`; off-diagonal (i, j) is the
/// (optionally Gaussian-damped) coupling when the mask admits the pair, else
/// zero. The result is complex symmetric by construction.
pub fn build_hamiltonian(spec: &ModelSpec, a: f64) -> Result<ComplexMatrix, ModelError> {
    spec.check_domain(a, a)?;
    if !a.is_finite() {
        return Err(ModelError::Domain { what: format!("parameter a = {a} is not finite") });
    }
    let n = spec.len();
    let energies = spec.energies(a);
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, spec.levels[i].eps(a));
        for j in (i + 1)..n {
            if spec.coupling.channel_mask.admits(i, j) {
                let w = spec.coupling.effective_omega(energies[i], energies[j]);
                m.set(i, j, w);
                m.set(j, i, w);
            }
        }
    }
    Ok(m)
}

/// Coupling matrix assembled from explicit channel amplitudes.
#[derive(Debug, Clone)]
pub struct ChannelCoupling {
    /// Off-diagonal coupling matrix W (zero diagonal), complex symmetric.
    pub coupling: ComplexMatrix,
    /// Diagonal of W, reported separately as per-level self-energy shifts.
    pub self_energy: Vec<Complex64>,
}

/// Build the coupling matrix `W_ij = Re_ij - (i/2) sum_c gamma0_ic gamma0_jc`
/// from N x K channel amplitudes and an externally supplied real part.
///
/// The bilinear product realizes the residuum of the system-environment
/// interaction; the real part (a principal-value integral in the underlying
/// theory) is a phenomenological input here. The diagonal is returned as
/// self-energy shifts rather than injected into the matrix.
pub fn coupling_from_vectors(
    gamma0: &[Vec<Complex64>],
    re_part: &[Vec<f64>],
) -> Result<ChannelCoupling, ModelError> {
    let n = gamma0.len();
    if n == 0 {
        return Err(ModelError::ShapeMismatch { what: "gamma0 has no rows".into() });
    }
    let k = gamma0[0].len();
    if k == 0 {
        return Err(ModelError::ShapeMismatch { what: "gamma0 needs K >= 1 channels".into() });
    }
    if gamma0.iter().any(|row| row.len() != k) {
        return Err(ModelError::ShapeMismatch { what: "gamma0 rows have unequal lengths".into() });
    }
    if re_part.len() != n || re_part.iter().any(|row| row.len() != n) {
        return Err(ModelError::ShapeMismatch {
            what: format!("re_part must be {n}x{n} to match gamma0"),
        });
    }
    for i in 0..n {
        if re_part[i][i] != 0.0 {
            return Err(ModelError::ShapeMismatch {
                what: format!("re_part diagonal entry {} must be zero", i + 1),
            });
        }
        for j in 0..n {
            if re_part[i][j] != re_part[j][i] {
                return Err(ModelError::ShapeMismatch {
                    what: format!("re_part is not symmetric at ({}, {})", i + 1, j + 1),
                });
            }
        }
    }

    let half_i = Complex64::new(0.0, 0.5);
    let mut w = ComplexMatrix::zeros(n);
    let mut self_energy = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let residuum: Complex64 = (0..k).map(|c| gamma0[i][c] * gamma0[j][c]).sum();
            let value = Complex64::new(re_part[i][j], 0.0) - half_i * residuum;
            if i == j {
                self_energy[i] = value;
            } else {
                w.set(i, j, value);
            }
        }
    }
    Ok(ChannelCoupling { coupling: w, self_energy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// N=4, K=1 (mask {4}), omega = 0.05i, Gaussian, equal half-widths 0.5.
    fn fig3cd_like() -> ModelSpec {
        ModelSpec::new(
            vec![
                LevelSpec::new(Trajectory::linear(1.0, -0.5), 0.5),
                LevelSpec::new(Trajectory::linear(1.05, -0.5), 0.5),
                LevelSpec::new(Trajectory::linear(1.1, -0.5), 0.5),
                LevelSpec::new(Trajectory::linear(0.0, 1.0), 0.5),
            ],
            CouplingSpec::new(c(0.0, 0.05), true, ChannelMask::levels([4])),
        )
        .unwrap()
    }

    #[test]
    fn mask_zeroes_unadmitted_pairs() {
        let m = build_hamiltonian(&fig3cd_like(), 0.5).unwrap();
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
        assert_eq!(m.get(1, 2), c(0.0, 0.0));
        assert_ne!(m.get(0, 3), c(0.0, 0.0));
    }

    #[test]
    fn gaussian_damped_entry_matches_hand_evaluation() {
        // e1(0.5) = 0.75, e4(0.5) = 0.5: 0.05 exp(-0.0625) = 0.046971 to 5
        // significant digits.
        let m = build_hamiltonian(&fig3cd_like(), 0.5).unwrap();
        let w = m.get(0, 3);
        assert_abs_diff_eq!(w.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w.im, 0.046971, epsilon = 5e-7);
        assert_eq!(m.get(0, 3), m.get(3, 0));
    }

    #[test]
    fn zero_coupling_gives_diagonal_matrix() {
        let spec = ModelSpec::new(
            vec![
                LevelSpec::new(Trajectory::linear(1.0, -0.5), 0.3),
                LevelSpec::new(Trajectory::linear(0.0, 1.0), 0.4),
            ],
            CouplingSpec::new(c(0.0, 0.0), false, ChannelMask::All),
        )
        .unwrap();
        let m = build_hamiltonian(&spec, 0.25).unwrap();
        assert_eq!(m.get(0, 1), c(0.0, 0.0));
        assert_eq!(m.get(1, 0), c(0.0, 0.0));
        assert_abs_diff_eq!((m.get(0, 0) - c(0.875, -0.3)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((m.get(1, 1) - c(0.25, -0.4)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_equals_sum_of_diagonal_rule() {
        let spec = fig3cd_like();
        for &a in &[0.0, 0.3, 0.5, 1.0] {
            let m = build_hamiltonian(&spec, a).unwrap();
            let expected: Complex64 = spec
                .levels
                .iter()
                .map(|l| l.eps(a))
                .sum();
            assert_abs_diff_eq!((m.trace() - expected).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn gaussian_bound_and_equality_at_degeneracy() {
        let spec = fig3cd_like();
        let omega_norm = spec.coupling.omega.norm();
        for &a in &[0.0, 0.5, 2.0 / 3.0, 1.0] {
            let e = spec.energies(a);
            let w14 = spec.coupling.effective_omega(e[0], e[3]);
            assert!(w14.norm() <= omega_norm + 1e-15);
            if (e[0] - e[3]).abs() < 1e-12 {
                assert_abs_diff_eq!(w14.norm(), omega_norm, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_pole_is_a_domain_error() {
        let spec = ModelSpec::new(
            vec![
                LevelSpec::new(Trajectory::linear(1.0, -0.5), 0.5),
                LevelSpec::new(Trajectory::hyperbolic(0.15), 0.5),
            ],
            CouplingSpec::new(c(0.0, 0.07), true, ChannelMask::All),
        )
        .unwrap();
        assert!(build_hamiltonian(&spec, -0.15).is_err());
        assert!(spec.check_domain(-0.5, 0.5).is_err());
        assert!(spec.check_domain(0.0, 3.0).is_ok());
    }

    #[test]
    fn coupling_from_zero_amplitudes_is_the_real_part() {
        let re = vec![vec![0.0, 0.2], vec![0.2, 0.0]];
        let gamma0 = vec![vec![c(0.0, 0.0)], vec![c(0.0, 0.0)]];
        let out = coupling_from_vectors(&gamma0, &re).unwrap();
        assert_eq!(out.coupling.get(0, 1), c(0.2, 0.0));
        assert_eq!(out.self_energy, vec![c(0.0, 0.0); 2]);
    }

    #[test]
    fn single_channel_residuum_is_rank_one() {
        let g = 0.3;
        let re = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        let gamma0 = vec![vec![c(g, 0.0)], vec![c(g, 0.0)]];
        let out = coupling_from_vectors(&gamma0, &re).unwrap();
        assert_abs_diff_eq!(out.coupling.get(0, 1).im, -g * g / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.coupling.get(0, 1).re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn multi_channel_residuum_matches_direct_product() {
        // N=3, K=2 with fixed amplitudes: Im(W) must equal the brute-force
        // -(1/2) gamma0 gamma0^T entrywise.
        let gamma0 = vec![
            vec![c(0.11, 0.0), c(-0.42, 0.0)],
            vec![c(0.57, 0.0), c(0.08, 0.0)],
            vec![c(-0.23, 0.0), c(0.91, 0.0)],
        ];
        let re = vec![
            vec![0.0, 0.05, -0.02],
            vec![0.05, 0.0, 0.13],
            vec![-0.02, 0.13, 0.0],
        ];
        let out = coupling_from_vectors(&gamma0, &re).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let brute: f64 = -(0..2).map(|k| gamma0[i][k].re * gamma0[j][k].re).sum::<f64>() / 2.0;
                if i == j {
                    assert_abs_diff_eq!(out.self_energy[i].im, brute, epsilon = 1e-14);
                } else {
                    assert_abs_diff_eq!(out.coupling.get(i, j).im, brute, epsilon = 1e-14);
                    assert_abs_diff_eq!(out.coupling.get(i, j).re, re[i][j], epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn shape_errors_are_reported() {
        let gamma0 = vec![vec![c(1.0, 0.0)], vec![c(1.0, 0.0)]];
        let bad_re = vec![vec![0.0; 3]; 3];
        assert!(coupling_from_vectors(&gamma0, &bad_re).is_err());
        let asym = vec![vec![0.0, 1.0], vec![0.5, 0.0]];
        assert!(coupling_from_vectors(&gamma0, &asym).is_err());
    }
}
