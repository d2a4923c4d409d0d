//! Spectral functional calculus on Hermitian matrices.
//!
//! For `A = U·diag(λ)·U*` and a scalar function `g`, the Fréchet derivative
//! of `A ↦ g(A)` in direction `H` is the Schur product of the Loewner matrix
//! `K[i][j] = g^[1](λᵢ, λⱼ)` with `H` written in the eigenbasis:
//!
//! ```text
//! Dg(A)[H] = U·(K ∘ (U*HU))·U*
//! ```
//!
//! Left and right multiplication operators never get materialized; the
//! Loewner matrix is their joint functional calculus.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::linalg::{check_same_dim, eigh, HermitianMatrix, SpectralDecomposition};
use crate::{CMatrix, Error, Result};

/// Relative gap below which a divided difference switches to the
/// derivative at the midpoint.
pub const CONFLUENT_THRESHOLD: f64 = 1e-7;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Selects `f` or `f′` of a [`ScalarFunction`] as the function being lifted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    F,
    F1,
}

/// A function on `(0, ∞)` with analytic first and second derivatives.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    params: Vec<f64>,
    f: RealFn,
    f1: RealFn,
    f2: RealFn,
    /// `(a, b)` when `f(t) = a·t + b` exactly; lets traces skip the spectrum.
    affine: Option<(f64, f64)>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl ScalarFunction {
    /// User-supplied function. Derivatives are required and are checked
    /// against central differences at a few probe points.
    pub fn custom<F, F1, F2>(name: impl Into<String>, f: F, f1: F1, f2: F2) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let func = Self::builtin(name.into(), vec![], f, f1, f2, None);
        func.check_consistency()?;
        Ok(func)
    }

    fn builtin<F, F1, F2>(
        name: String,
        params: Vec<f64>,
        f: F,
        f1: F1,
        f2: F2,
        affine: Option<(f64, f64)>,
    ) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name,
            params,
            f: Arc::new(f),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            affine,
        }
    }

    /// `t·log t`.
    pub fn t_log_t() -> Self {
        Self::builtin(
            "t_log_t".into(),
            vec![],
            |t| t * t.ln(),
            |t| t.ln() + 1.0,
            |t| 1.0 / t,
            None,
        )
    }

    /// `t^p` for `p ∈ [1, 2]`, the range where it is a matrix entropy.
    pub fn power(p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::Input(format!("power exponent {p} outside [1, 2]")));
        }
        let affine = (p == 1.0).then_some((1.0, 0.0));
        Ok(Self::builtin(
            "power".into(),
            vec![p],
            move |t| t.powf(p),
            move |t| p * t.powf(p - 1.0),
            move |t| p * (p - 1.0) * t.powf(p - 2.0),
            affine,
        ))
    }

    pub fn log() -> Self {
        Self::builtin(
            "log".into(),
            vec![],
            |t| t.ln(),
            |t| 1.0 / t,
            |t| -1.0 / (t * t),
            None,
        )
    }

    pub fn identity() -> Self {
        Self::builtin(
            "identity".into(),
            vec![],
            |t| t,
            |_| 1.0,
            |_| 0.0,
            Some((1.0, 0.0)),
        )
    }

    pub fn square() -> Self {
        Self::builtin(
            "square".into(),
            vec![],
            |t| t * t,
            |t| 2.0 * t,
            |_| 2.0,
            None,
        )
    }

    /// `t³`. Its second derivative is increasing, so it fails the usual
    /// sufficient condition for matrix entropies; used in falsification runs.
    pub fn cube() -> Self {
        Self::builtin(
            "cube".into(),
            vec![],
            |t| t * t * t,
            |t| 3.0 * t * t,
            |t| 6.0 * t,
            None,
        )
    }

    /// Looks up a built-in by name. `power` takes its exponent from `p`.
    pub fn by_name(name: &str, p: Option<f64>) -> Result<Self> {
        match name {
            "t_log_t" => Ok(Self::t_log_t()),
            "power" => Self::power(
                p.ok_or_else(|| Error::Input("function `power` needs an exponent".into()))?,
            ),
            "log" => Ok(Self::log()),
            "identity" => Ok(Self::identity()),
            "square" => Ok(Self::square()),
            "cube" => Ok(Self::cube()),
            other => Err(Error::Input(format!("unknown function `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    pub fn f1(&self, t: f64) -> f64 {
        (self.f1)(t)
    }

    pub fn f2(&self, t: f64) -> f64 {
        (self.f2)(t)
    }

    pub fn affine(&self) -> Option<(f64, f64)> {
        self.affine
    }

    /// The selected function evaluated at `t`.
    pub fn eval(&self, which: Which, t: f64) -> f64 {
        match which {
            Which::F => self.f(t),
            Which::F1 => self.f1(t),
        }
    }

    /// Derivative of the selected function at `t`.
    pub fn eval_derivative(&self, which: Which, t: f64) -> f64 {
        match which {
            Which::F => self.f1(t),
            Which::F1 => self.f2(t),
        }
    }

    /// Whether this built-in is known to be a matrix entropy: `t·log t`,
    /// `t^p` with `p ∈ [1, 2]` (including the endpoints `t` and `t²`).
    pub fn is_matrix_entropy(&self) -> bool {
        matches!(
            self.name.as_str(),
            "t_log_t" | "power" | "identity" | "square"
        )
    }

    /// Finiteness on `[1e-8, 1e8]` and agreement of `f1`, `f2` with central
    /// differences of `f`, `f1` to `1e-6` relative at `{0.5, 1, 2, 5}`.
    pub fn check_consistency(&self) -> Result<()> {
        for t in [1e-8, 1e-4, 1.0, 1e4, 1e8] {
            if !(self.f(t).is_finite() && self.f1(t).is_finite() && self.f2(t).is_finite()) {
                return Err(Error::Input(format!(
                    "function `{}` is not finite at {t}",
                    self.name
                )));
            }
        }
        for t in [0.5, 1.0, 2.0, 5.0] {
            let step = 1e-4 * t;
            let d1 = (self.f(t + step) - self.f(t - step)) / (2.0 * step);
            let d2 = (self.f1(t + step) - self.f1(t - step)) / (2.0 * step);
            for (label, fd, exact) in [("f1", d1, self.f1(t)), ("f2", d2, self.f2(t))] {
                if (fd - exact).abs() > 1e-6 * exact.abs().max(1.0) {
                    return Err(Error::Input(format!(
                        "`{}`: {label}({t}) = {exact} disagrees with finite difference {fd}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// First divided difference `(g(t) − g(s))/(t − s)`, replaced by
/// `g′((s+t)/2)` when `|t − s| ≤ CONFLUENT_THRESHOLD·max(s, t)`.
pub fn divided_difference(
    g: impl Fn(f64) -> f64,
    dg: impl Fn(f64) -> f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!(
            "divided difference needs positive finite arguments, got ({s}, {t})"
        )));
    }
    if (t - s).abs() > CONFLUENT_THRESHOLD * s.max(t) {
        Ok((g(t) - g(s)) / (t - s))
    } else {
        Ok(dg(0.5 * (s + t)))
    }
}

/// The matrix of divided differences of a function over a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct LoewnerMatrix {
    pub eigenvalues: Vec<f64>,
    pub entries: DMatrix<f64>,
}

impl LoewnerMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }
}

pub fn loewner(
    func: &ScalarFunction,
    which: Which,
    spec: &SpectralDecomposition,
) -> Result<LoewnerMatrix> {
    let lambda = &spec.eigenvalues;
    let n = lambda.len();
    let mut entries = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = divided_difference(
                |t| func.eval(which, t),
                |t| func.eval_derivative(which, t),
                lambda[i],
                lambda[j],
            )?;
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    Ok(LoewnerMatrix {
        eigenvalues: lambda.clone(),
        entries,
    })
}

fn positive_spectrum(a: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let spec = eigh(a)?;
    spec.require_positive()?;
    Ok(spec)
}

/// `g(A) = U·diag(g(λᵢ))·U*` for an arbitrary real function on the
/// spectrum, with no positivity requirement.
pub fn spectral_map(a: &HermitianMatrix, g: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    let spec = eigh(a)?;
    let values: Vec<f64> = spec.eigenvalues.iter().map(|&l| g(l)).collect();
    Ok(spec.reconstruct_with(&values))
}

/// `f(A)` for positive definite `A`.
pub fn matrix_function(func: &ScalarFunction, a: &HermitianMatrix) -> Result<HermitianMatrix> {
    matrix_function_of(func, Which::F, a)
}

/// `f(A)` or `f′(A)` depending on `which`.
pub fn matrix_function_of(
    func: &ScalarFunction,
    which: Which,
    a: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let spec = positive_spectrum(a)?;
    let values: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&l| func.eval(which, l))
        .collect();
    Ok(spec.reconstruct_with(&values))
}

/// `Tr f(A) = Σ f(λᵢ)`. Affine functions read the diagonal directly and
/// skip the eigendecomposition, including its positivity check.
pub fn trace_function(func: &ScalarFunction, a: &HermitianMatrix) -> Result<f64> {
    if let Some((slope, offset)) = func.affine() {
        return Ok(slope * a.trace() + offset * a.dim() as f64);
    }
    let spec = positive_spectrum(a)?;
    Ok(spec.eigenvalues.iter().map(|&l| func.f(l)).sum())
}

/// Fréchet derivative of `A ↦ g(A)` in direction `H`, where `g` is `f` or
/// `f′` of `func` as selected by `which`.
pub fn frechet_derivative(
    func: &ScalarFunction,
    which: Which,
    a: &HermitianMatrix,
    h: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    check_same_dim(a.dim(), h.dim())?;
    let spec = positive_spectrum(a)?;
    frechet_derivative_with(func, which, &spec, h)
}

/// Same as [`frechet_derivative`] with a precomputed spectral decomposition.
pub fn frechet_derivative_with(
    func: &ScalarFunction,
    which: Which,
    spec: &SpectralDecomposition,
    h: &HermitianMatrix,
) -> Result<HermitianMatrix> {
    let k = loewner(func, which, spec)?;
    let hh = spec.to_eigenbasis(h.as_matrix())?;
    let schur = CMatrix::from_fn(hh.nrows(), hh.ncols(), |i, j| {
        hh[(i, j)] * k.entries[(i, j)]
    });
    Ok(HermitianMatrix::symmetrized(spec.from_eigenbasis(&schur)?))
}

/// `Tr h·Df′(x)[h] = Σᵢⱼ |(U*hU)ᵢⱼ|²·f′^[1](λᵢ, λⱼ)`.
pub fn quad_form(func: &ScalarFunction, x: &HermitianMatrix, h: &HermitianMatrix) -> Result<f64> {
    check_same_dim(x.dim(), h.dim())?;
    let spec = positive_spectrum(x)?;
    quad_form_with(func, &spec, h)
}

pub fn quad_form_with(
    func: &ScalarFunction,
    spec: &SpectralDecomposition,
    h: &HermitianMatrix,
) -> Result<f64> {
    let k = loewner(func, Which::F1, spec)?;
    let hh = spec.to_eigenbasis(h.as_matrix())?;
    Ok(hh
        .iter()
        .zip(k.entries.iter())
        .map(|(z, &kij)| z.norm_sqr() * kij)
        .sum())
}
