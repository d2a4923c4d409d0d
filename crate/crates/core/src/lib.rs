//! Matrix functional calculus on complex Hermitian matrices, with the
//! bipartite machinery (partial traces, conditional expectations,
//! mixed-unitary channels) needed to evaluate the entropy-gap functional
//!
//! ```text
//! G(ρ) = d₂⁻¹·Tr f(d₂ρ) − Tr f(ρ₁),   ρ₁ = Tr₂ ρ
//! ```
//!
//! and its second Fréchet differential by two independent routes.
//!
//! Modules:
//!
//! - [`linalg`]: Hermitian matrices, eigendecomposition, Kronecker products,
//!   seeded random sampling.
//! - [`calculus`]: scalar functions with analytic derivatives, divided
//!   differences, Loewner matrices, Fréchet derivatives and the quadratic
//!   form `Tr h·Df′(x)[h]`.
//! - [`quadrature`]: Gauss–Legendre rules used by the independent
//!   integral-representation oracles.
//! - [`bipartite`]: partial traces, embeddings, the conditional expectation
//!   onto the first factor, pinchings and mixed-unitary channels.
//! - [`entropy`]: von Neumann entropy, the entropy gap and its second
//!   differential.

#![forbid(unsafe_code)]

pub mod bipartite;
pub mod calculus;
pub mod entropy;
mod error;
pub mod linalg;
pub mod quadrature;

pub use error::{Error, Result};

/// Dense complex matrix used for everything that is not necessarily Hermitian.
pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;

pub use num_complex::Complex64;
