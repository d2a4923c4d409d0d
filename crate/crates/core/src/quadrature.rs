//! Gauss–Legendre quadrature.
//!
//! Only the verification oracles use this; the calculus itself never
//! integrates. Also home to the two integral representations those oracles
//! evaluate:
//!
//! ```text
//! (log t − log s)/(t − s) = ∫₀¹ (λt + (1−λ)s)⁻¹ dλ
//! Tr h·Dlog(x)[h]         = ∫₀^∞ Tr h(x+λ)⁻¹h(x+λ)⁻¹ dλ
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::{check_same_dim, HermitianMatrix};
use crate::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guess `cos(π(k − 1/4)/(n + 1/2))`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("quadrature needs at least one node".into()));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for k in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[k] = -x;
            nodes[n - 1 - k] = x;
            weights[k] = w;
            weights[n - 1 - k] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Integral of `f` over `[0, ∞)` via `λ = u/(1−u)`, `dλ = du/(1−u)²`.
    pub fn integrate_half_line<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.integrate(0.0, 1.0, |u| {
            let one_minus = 1.0 - u;
            f(u / one_minus) / (one_minus * one_minus)
        })
    }
}

/// `(P_n(x), P_n′(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `∫₀¹ (λt + (1−λ)s)⁻¹ dλ`, the integral form of the logarithmic kernel.
pub fn log_kernel_integral(rule: &GaussLegendre, s: f64, t: f64) -> Result<f64> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!(
            "log kernel needs positive arguments, got ({s}, {t})"
        )));
    }
    Ok(rule.integrate(0.0, 1.0, |l| 1.0 / (l * t + (1.0 - l) * s)))
}

/// `∫₀^∞ Tr h(x+λ)⁻¹h(x+λ)⁻¹ dλ` with each resolvent formed by direct
/// inversion, independently of any spectral machinery.
pub fn log_resolvent_integral(
    rule: &GaussLegendre,
    x: &HermitianMatrix,
    h: &HermitianMatrix,
) -> Result<f64> {
    check_same_dim(x.dim(), h.dim())?;
    let n = x.dim();
    let identity = DMatrix::<Complex64>::identity(n, n);
    let mut failed = false;
    let value = rule.integrate_half_line(|mu| {
        let shifted = x.as_matrix() + &identity * Complex64::new(mu, 0.0);
        match shifted.try_inverse() {
            Some(r) => {
                let hr = h.as_matrix() * r;
                (&hr * &hr).diagonal().iter().map(|z| z.re).sum::<f64>()
            }
            None => {
                failed = true;
                0.0
            }
        }
    });
    if failed || !value.is_finite() {
        return Err(Error::Domain(
            "resolvent is singular; x must be positive definite".into(),
        ));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rules_match_tables() {
        let r = GaussLegendre::new(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
        let r = GaussLegendre::new(3).unwrap();
        assert_eq!(r.nodes()[1], 0.0);
        assert!((r.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
        assert!((r.nodes()[2] - 0.6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_two_and_nodes_ascend() {
        for n in [1, 5, 16, 64, 128] {
            let r = GaussLegendre::new(n).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}: {total}");
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(8).unwrap();
        for k in 0..16 {
            let got = r.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn half_line_integral() {
        let r = GaussLegendre::new(128).unwrap();
        let got = r.integrate_half_line(|l| 1.0 / ((1.0 + l) * (2.0 + l)));
        assert!((got - 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_kernel_integral_closed_form() {
        let r = GaussLegendre::new(64).unwrap();
        let got = log_kernel_integral(&r, 1.0, 3.0).unwrap();
        assert!((got - 3f64.ln() / 2.0).abs() < 1e-14);
        assert!(log_kernel_integral(&r, 0.0, 1.0).is_err());
    }
}
