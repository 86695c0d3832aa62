//! Spectral analysis of complex-symmetric toy Hamiltonians for open quantum
//! systems.
//!
//! The library builds N-level model Hamiltonians whose diagonal carries
//! complex level energies `e_i(a) - (i/2) gamma_i` and whose off-diagonal
//! carries a (possibly Gaussian-damped) coupling through one or more open
//! channels. Sweeping the control parameter `a` and solving the non-Hermitian
//! eigenproblem with biorthogonal normalization yields eigenvalue
//! trajectories, width bifurcation, mixing coefficients, phase rigidity and
//! the location of exceptional points.
//!
//! Module map:
//! - [`linalg`]: dense complex eigendecomposition and biorthogonal
//!   normalization,
//! - [`model`]: declarative Hamiltonian construction,
//! - [`scenario`]: named preset models with default sweep grids,
//! - [`twolevel`]: closed-form N=2 solutions, the verification oracle,
//! - [`sweep`]: grid sweeps, branch matching, diagnostics, event detection,
//! - [`config`]: the text configuration format,
//! - [`output`]: CSV emission and SVG trajectory plots.

pub mod config;
pub mod linalg;
pub mod model;
pub mod output;
pub mod scenario;
pub mod sweep;
pub mod twolevel;

pub use num_complex::Complex64;
