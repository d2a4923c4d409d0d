//! Von Neumann entropy and the entropy gap
//!
//! ```text
//! G(ρ) = d₂⁻¹·Tr f(d₂ρ) − Tr f(ρ₁)
//! ```
//!
//! together with its second differential
//!
//! ```text
//! d²G(ρ)(h, h) = d₂·Tr h·Df′(d₂ρ)[h] − Tr h₁·Df′(ρ₁)[h₁]
//! ```
//!
//! evaluated spectrally and, independently, by a second-order central
//! difference of `G`. States are general positive definite operators; no
//! trace normalization is assumed.

use crate::bipartite::{reduce, BipartiteSpace};
use crate::calculus::{quad_form, trace_function, ScalarFunction};
use crate::linalg::{check_same_dim, eigh, HermitianMatrix};
use crate::{Error, Result};

/// Default step for [`second_differential_fd_auto`].
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Number of times the finite-difference step may be halved to keep
/// `ρ ± step·h` positive definite.
pub const MAX_STEP_HALVINGS: usize = 10;

/// The pair `(f, d₂)` (plus `d₁`) that parameterizes `G`.
#[derive(Debug, Clone)]
pub struct EntropyGapSpec {
    pub function: ScalarFunction,
    pub space: BipartiteSpace,
}

impl EntropyGapSpec {
    pub fn new(function: ScalarFunction, space: BipartiteSpace) -> Self {
        Self { function, space }
    }
}

/// `S(ρ) = −Σ λ log λ` over the spectrum of `ρ`.
pub fn von_neumann_entropy(rho: &HermitianMatrix) -> Result<f64> {
    let spec = eigh(rho)?;
    spec.require_positive()?;
    Ok(-spec.eigenvalues.iter().map(|&l| l * l.ln()).sum::<f64>())
}

pub fn entropy_gap(rho: &HermitianMatrix, spec: &EntropyGapSpec) -> Result<f64> {
    check_same_dim(spec.space.dim(), rho.dim())?;
    let d2 = spec.space.d2() as f64;
    let full = trace_function(&spec.function, &rho.scaled(d2))?;
    let reduced = trace_function(&spec.function, &reduce(rho, spec.space)?)?;
    Ok(full / d2 - reduced)
}

pub fn second_differential_spectral(
    rho: &HermitianMatrix,
    h: &HermitianMatrix,
    spec: &EntropyGapSpec,
) -> Result<f64> {
    check_same_dim(spec.space.dim(), rho.dim())?;
    check_same_dim(spec.space.dim(), h.dim())?;
    let d2 = spec.space.d2() as f64;
    let full = quad_form(&spec.function, &rho.scaled(d2), h)?;
    let reduced = quad_form(
        &spec.function,
        &reduce(rho, spec.space)?,
        &reduce(h, spec.space)?,
    )?;
    Ok(d2 * full - reduced)
}

/// `(G(ρ+s·h) − 2G(ρ) + G(ρ−s·h))/s²`. Fails with a domain error when
/// either perturbed operator leaves the positive definite cone.
pub fn second_differential_fd(
    rho: &HermitianMatrix,
    h: &HermitianMatrix,
    spec: &EntropyGapSpec,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Input(format!(
            "finite-difference step {step} must be positive"
        )));
    }
    check_same_dim(spec.space.dim(), rho.dim())?;
    check_same_dim(spec.space.dim(), h.dim())?;
    let plus = rho.combine(1.0, h, step)?;
    let minus = rho.combine(1.0, h, -step)?;
    for m in [&plus, &minus] {
        let lo = m.min_eigenvalue()?;
        if !(lo > 0.0) {
            return Err(Error::Domain(format!(
                "ρ ± {step:e}·h is not positive definite (min eigenvalue {lo:e}); reduce the step"
            )));
        }
    }
    let g_plus = entropy_gap(&plus, spec)?;
    let g_mid = entropy_gap(rho, spec)?;
    let g_minus = entropy_gap(&minus, spec)?;
    Ok((g_plus - 2.0 * g_mid + g_minus) / (step * step))
}

/// [`second_differential_fd`] starting from `step`, halving up to
/// [`MAX_STEP_HALVINGS`] times while the perturbation leaves the cone.
/// Returns the value and the step actually used.
pub fn second_differential_fd_auto(
    rho: &HermitianMatrix,
    h: &HermitianMatrix,
    spec: &EntropyGapSpec,
    step: f64,
) -> Result<(f64, f64)> {
    let mut step = step;
    let mut last = None;
    for _ in 0..=MAX_STEP_HALVINGS {
        match second_differential_fd(rho, h, spec, step) {
            Ok(v) => return Ok((v, step)),
            Err(e @ Error::Domain(_)) => {
                last = Some(e);
                step *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("loop ran at least once"))
}
