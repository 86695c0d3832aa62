//! Closed-form solutions for two interacting resonance states.
//!
//! For the 2x2 complex-symmetric matrix `[[eps1, omega], [omega, eps2]]` the
//! eigenvalues are `(eps1 + eps2)/2 +- Z` with
//! `Z = sqrt((eps1 - eps2)^2 + 4 omega^2) / 2`. An exceptional point is a
//! parameter value with `Z = 0`: the eigenvalues coalesce and the
//! eigenvectors become linearly dependent. This module is the independent
//! oracle against which the generic solver and the numeric exceptional-point
//! locator are verified.

use num_complex::Complex64;

use crate::model::{ModelError, ModelSpec};

/// Inputs of the closed-form two-level problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelInput {
    /// Complex level energy `eps_1 = e_1 - (i/2) gamma_1`.
    pub eps1: Complex64,
    /// Complex level energy `eps_2 = e_2 - (i/2) gamma_2`.
    pub eps2: Complex64,
    /// Complex coupling between the two levels.
    pub omega: Complex64,
}

impl TwoLevelInput {
    pub fn new(eps1: Complex64, eps2: Complex64, omega: Complex64) -> Self {
        Self { eps1, eps2, omega }
    }

    /// Half the eigenvalue splitting, `Z = sqrt((eps1-eps2)^2 + 4 omega^2)/2`.
    ///
    /// Principal square root: `Re(Z) >= 0`, and `Im(Z) >= 0` on the cut.
    /// That keeps the +- branch labels continuous except across exceptional
    /// points, where the branch exchange is the physical state exchange.
    pub fn half_splitting(&self) -> Complex64 {
        let d = self.eps1 - self.eps2;
        ((d * d + 4.0 * self.omega * self.omega).sqrt()) * 0.5
    }
}

/// Both eigenvalues `(eps1 + eps2)/2 +- Z`, plus branch first.
pub fn eigenvalues_closed(input: &TwoLevelInput) -> (Complex64, Complex64) {
    let mean = (input.eps1 + input.eps2) * 0.5;
    let z = input.half_splitting();
    (mean + z, mean - z)
}

/// Regime of a two-level system with equal widths and imaginary coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|e1 - e2| > 2x`: Z real, the levels repel in energy.
    EnergyRepulsion,
    /// `|e1 - e2| < 2x`: Z imaginary, the widths bifurcate.
    WidthBifurcation,
    /// `e1 - e2 = +-2x` exactly.
    ExceptionalPoint,
}

/// Classification of the equal-width two-level exceptional-point condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpCondition {
    /// Real coupling: `(e1-e2)^2 + 4x^2 > 0` can never vanish, the levels
    /// avoid crossing; an EP exists only under analytic continuation.
    NoRealEp,
    /// Imaginary coupling `omega = ix`: exceptional points sit at
    /// `e1 - e2 = +-2x` (`x > 0` stored here).
    ImaginaryCoupling { x: f64 },
    /// General complex coupling: no closed-form condition, use the numeric
    /// locator ([`ep_parameter_roots`]).
    NotApplicable,
}

impl EpCondition {
    /// Regime classifier for the `ImaginaryCoupling` case.
    pub fn classify(&self, e_diff: f64) -> Option<Regime> {
        match self {
            EpCondition::ImaginaryCoupling { x } => {
                let lhs = e_diff.abs();
                let rhs = 2.0 * x;
                Some(if lhs > rhs {
                    Regime::EnergyRepulsion
                } else if lhs < rhs {
                    Regime::WidthBifurcation
                } else {
                    Regime::ExceptionalPoint
                })
            }
            _ => None,
        }
    }
}

/// Classify the exceptional-point condition for equal widths.
///
/// Only the equal-width case has the closed form; with `gamma_equal = false`
/// or a genuinely complex coupling the caller must fall back to the numeric
/// locator.
pub fn ep_condition(gamma_equal: bool, omega: Complex64) -> EpCondition {
    if !gamma_equal {
        return EpCondition::NotApplicable;
    }
    if omega.im == 0.0 {
        EpCondition::NoRealEp
    } else if omega.re == 0.0 {
        EpCondition::ImaginaryCoupling { x: omega.im.abs() }
    } else {
        EpCondition::NotApplicable
    }
}

/// `f(a) = (eps1(a) - eps2(a))^2 + 4 omega_eff(a)^2`, so `Z = sqrt(f)/2`.
///
/// The Gaussian damping of the coupling is included when the spec enables
/// it, so the roots refer to the swept matrix, not an idealized one.
fn splitting_squared(spec: &ModelSpec, a: f64) -> Complex64 {
    let eps1 = spec.levels[0].eps(a);
    let eps2 = spec.levels[1].eps(a);
    let omega = spec.coupling.effective_omega(
        spec.levels[0].trajectory.energy(a),
        spec.levels[1].trajectory.energy(a),
    );
    let d = eps1 - eps2;
    d * d + 4.0 * omega * omega
}

/// A refined root is accepted when |Z|^2 <= ZSQ_ACCEPT, i.e. |Z| <= 1e-6.
/// A true root leaves |Z| ~ sqrt(|f'| * eps_a) ~ 1e-8 at the nearest f64,
/// while a zero of only one component leaves |Z| ~ 0.1.
const ZSQ_ACCEPT: f64 = 1e-12;

/// Bisection stops when the bracket is narrower than this (absolute in `a`).
const BRACKET_TOL: f64 = 1e-13;

/// All parameter values in `[a_min, a_max]` where the two-level splitting
/// vanishes, `Z(a) = 0`.
///
/// Found by bisecting sign changes of Re f and Im f separately on a fine
/// scan (f = 4Z^2), then keeping refined points where the other component
/// also vanishes. Returns an empty list when no root exists, e.g. for real
/// coupling with equal widths.
pub fn ep_parameter_roots(
    spec: &ModelSpec,
    a_min: f64,
    a_max: f64,
) -> Result<Vec<f64>, ModelError> {
    if spec.len() != 2 {
        return Err(ModelError::ShapeMismatch {
            what: format!("ep_parameter_roots needs a 2-level spec, got {} levels", spec.len()),
        });
    }
    spec.check_domain(a_min, a_max)?;

    const SCAN: usize = 8192;
    let h = (a_max - a_min) / SCAN as f64;
    let f_at = |a: f64| splitting_squared(spec, a);

    let mut roots: Vec<f64> = Vec::new();
    let mut push_root = |a: f64| {
        if f_at(a).norm() <= 4.0 * ZSQ_ACCEPT && !roots.iter().any(|r| (r - a).abs() < 1e-9) {
            roots.push(a);
        }
    };

    let mut prev_a = a_min;
    let mut prev_f = f_at(prev_a);
    push_root(prev_a);
    for k in 1..=SCAN {
        let a = if k == SCAN { a_max } else { a_min + k as f64 * h };
        let f = f_at(a);
        for part in [|c: Complex64| c.re, |c: Complex64| c.im] {
            let (p0, p1) = (part(prev_f), part(f));
            if p0 == 0.0 && p1 == 0.0 {
                continue; // component identically zero on this cell
            }
            if p0 * p1 < 0.0 {
                let mut lo = prev_a;
                let mut hi = a;
                let mut flo = p0;
                while hi - lo > BRACKET_TOL {
                    let mid = 0.5 * (lo + hi);
                    let fmid = part(f_at(mid));
                    if fmid == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fmid < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fmid;
                    }
                }
                push_root(0.5 * (lo + hi));
            }
        }
        push_root(a);
        prev_a = a;
        prev_f = f;
    }

    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(roots)
}
