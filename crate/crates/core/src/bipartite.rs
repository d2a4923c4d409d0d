//! Operators on `H = H₁ ⊗ H₂`: partial traces, the embedding `A ↦ A⊗1`,
//! the conditional expectation `π₁(ρ) = d₂⁻¹·(Tr₂ρ)⊗1`, and channels of the
//! form `Φ(X) = Σ pᵢ·uᵢ*·X·uᵢ`.

use num_complex::Complex64;

use crate::linalg::{
    check_same_dim, frobenius_norm, kron, random_gaussian_matrix, random_unitary, HermitianMatrix,
    RngStream, MAX_DIM,
};
use crate::{CMatrix, Error, Result};

/// Maximum number of blocks in a random pinching; the sign average then
/// has at most `2^7 = 128` terms.
pub const MAX_PINCHING_BLOCKS: usize = 8;

/// Dimensions of the two factors of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BipartiteSpace {
    d1: usize,
    d2: usize,
}

impl BipartiteSpace {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(Error::Input(format!(
                "factor dimensions must be positive, got ({d1}, {d2})"
            )));
        }
        match d1.checked_mul(d2) {
            Some(n) if n <= MAX_DIM => Ok(Self { d1, d2 }),
            _ => Err(Error::Input(format!(
                "composite dimension {d1}x{d2} exceeds the supported maximum {MAX_DIM}"
            ))),
        }
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// Row-major composite index of `(a, i)`.
    pub fn index(&self, a: usize, i: usize) -> usize {
        a * self.d2 + i
    }

    fn check(&self, x: &CMatrix) -> Result<()> {
        if !x.is_square() {
            return Err(Error::Input("operator is not square".into()));
        }
        check_same_dim(self.dim(), x.nrows())
    }
}

/// `Tr₂ X`: `result[a][b] = Σⱼ X[(a,j)][(b,j)]`.
pub fn partial_trace_2(x: &CMatrix, space: BipartiteSpace) -> Result<CMatrix> {
    space.check(x)?;
    let (d1, d2) = (space.d1, space.d2);
    Ok(CMatrix::from_fn(d1, d1, |a, b| {
        (0..d2)
            .map(|j| x[(space.index(a, j), space.index(b, j))])
            .sum()
    }))
}

/// `Tr₁ X`: `result[i][j] = Σₐ X[(a,i)][(a,j)]`.
pub fn partial_trace_1(x: &CMatrix, space: BipartiteSpace) -> Result<CMatrix> {
    space.check(x)?;
    let (d1, d2) = (space.d1, space.d2);
    Ok(CMatrix::from_fn(d2, d2, |i, j| {
        (0..d1)
            .map(|a| x[(space.index(a, i), space.index(a, j))])
            .sum()
    }))
}

/// `A ⊗ 1₂`, the adjoint of [`partial_trace_2`].
pub fn embed_1(a: &CMatrix, space: BipartiteSpace) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Input("operator is not square".into()));
    }
    check_same_dim(space.d1, a.nrows())?;
    kron(a, &CMatrix::identity(space.d2, space.d2))
}

/// The reduced operator `ρ₁ = Tr₂ ρ`, kept Hermitian.
pub fn reduce(rho: &HermitianMatrix, space: BipartiteSpace) -> Result<HermitianMatrix> {
    // Each entry sums the same terms as its mirror, so the result is exactly
    // Hermitian already.
    Ok(HermitianMatrix::symmetrized(partial_trace_2(
        rho.as_matrix(),
        space,
    )?))
}

/// `π₁(ρ) = d₂⁻¹·(Tr₂ ρ) ⊗ 1₂`, so that `ρ₁ ⊗ 1₂ = d₂·π₁(ρ)`.
pub fn pi_1(rho: &HermitianMatrix, space: BipartiteSpace) -> Result<HermitianMatrix> {
    let reduced = partial_trace_2(rho.as_matrix(), space)?;
    let scale = Complex64::new(1.0 / space.d2 as f64, 0.0);
    Ok(HermitianMatrix::symmetrized(
        embed_1(&reduced, space)? * scale,
    ))
}

/// Linear map `X ↦ Σ pᵢ·uᵢ*·X·uᵢ` with convex weights and unitary `uᵢ`.
#[derive(Debug, Clone)]
pub struct MixedUnitaryChannel {
    dim: usize,
    terms: Vec<(f64, CMatrix)>,
    is_conditional_expectation: bool,
}

const WEIGHT_TOLERANCE: f64 = 1e-12;
const UNITARY_TOLERANCE: f64 = 1e-10;
const IDEMPOTENCE_TOLERANCE: f64 = 1e-8;

impl MixedUnitaryChannel {
    /// Validates weights and unitarity, then probes idempotence to set
    /// [`Self::is_conditional_expectation`].
    pub fn new(dim: usize, terms: Vec<(f64, CMatrix)>) -> Result<Self> {
        if dim == 0 || terms.is_empty() {
            return Err(Error::Input(
                "channel needs a positive dimension and at least one term".into(),
            ));
        }
        let mut total = 0.0;
        for (p, u) in &terms {
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::Input(format!(
                    "channel weight {p} is not a probability"
                )));
            }
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.nrows(),
                });
            }
            let gram = u.adjoint() * u - CMatrix::identity(dim, dim);
            if frobenius_norm(&gram) > UNITARY_TOLERANCE {
                return Err(Error::Input("channel term is not unitary".into()));
            }
            total += p;
        }
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::Input(format!(
                "channel weights sum to {total}, not 1"
            )));
        }
        let mut channel = Self {
            dim,
            terms,
            is_conditional_expectation: false,
        };
        channel.is_conditional_expectation =
            channel.idempotence_residual() <= IDEMPOTENCE_TOLERANCE;
        Ok(channel)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(dim, vec![(1.0, CMatrix::identity(dim, dim))])
    }

    /// Pinching in the basis given by the columns of `basis`: entries
    /// `(k, l)` with `block_of[k] != block_of[l]` are zeroed by averaging
    /// over diagonal `±1` sign unitaries (first block's sign fixed to `+1`).
    pub fn pinching(basis: &CMatrix, block_of: &[usize]) -> Result<Self> {
        let dim = block_of.len();
        check_same_dim(dim, basis.nrows())?;
        let blocks = block_of.iter().max().map_or(0, |m| m + 1);
        if blocks == 0 || blocks > MAX_PINCHING_BLOCKS {
            return Err(Error::Input(format!(
                "pinching needs between 1 and {MAX_PINCHING_BLOCKS} blocks, got {blocks}"
            )));
        }
        let count = 1usize << (blocks - 1);
        let weight = 1.0 / count as f64;
        let terms = (0..count)
            .map(|mask| {
                let sign = |b: usize| {
                    if b > 0 && mask & (1 << (b - 1)) != 0 {
                        -1.0
                    } else {
                        1.0
                    }
                };
                let d = CMatrix::from_fn(dim, dim, |i, j| {
                    if i == j {
                        Complex64::new(sign(block_of[i]), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                (weight, basis * d * basis.adjoint())
            })
            .collect();
        Self::new(dim, terms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(f64, CMatrix)] {
        &self.terms
    }

    pub fn is_conditional_expectation(&self) -> bool {
        self.is_conditional_expectation
    }

    /// `Σ pᵢ·uᵢ*·X·uᵢ`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_same_dim(self.dim, x.nrows())?;
        if !x.is_square() {
            return Err(Error::Input("operator is not square".into()));
        }
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (p, u) in &self.terms {
            out += (u.adjoint() * x * u) * Complex64::new(*p, 0.0);
        }
        Ok(out)
    }

    pub fn apply_hermitian(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::symmetrized(self.apply(x.as_matrix())?))
    }

    /// `max ‖Φ(Φ(X)) − Φ(X)‖_F` over a fixed probe set: the identity and two
    /// fixed-seed Gaussian matrices. A nonzero linear map almost surely
    /// moves a generic probe, so this detects non-idempotent channels.
    pub fn idempotence_residual(&self) -> f64 {
        let mut rng = RngStream::new(0x1de0_7e7e, self.dim as u64);
        let probes = [
            CMatrix::identity(self.dim, self.dim),
            random_gaussian_matrix(self.dim, &mut rng, 1.0),
            random_gaussian_matrix(self.dim, &mut rng, 1.0),
        ];
        probes
            .iter()
            .map(|x| {
                let once = self.apply(x).expect("probe has channel dimension");
                let twice = self.apply(&once).expect("probe has channel dimension");
                frobenius_norm(&(twice - &once)) / frobenius_norm(x).max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Clock-and-shift (Weyl) unitaries `X^a·Z^b` on `C^d`, `a, b < d`.
fn weyl_unitaries(d: usize) -> Vec<CMatrix> {
    let omega = |k: usize| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64);
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // (X^a Z^b)[i][j] = ω^{b·j} when i = j + a (mod d).
            out.push(CMatrix::from_fn(d, d, |i, j| {
                if i == (j + a) % d {
                    omega((b * j) % d)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
        }
    }
    out
}

/// `π₁` written as the uniform average of `1 ⊗ W` over the `d₂²`
/// clock-and-shift unitaries `W` on `H₂`.
pub fn pi_1_as_channel(space: BipartiteSpace) -> Result<MixedUnitaryChannel> {
    let d2 = space.d2;
    let weight = 1.0 / (d2 * d2) as f64;
    let id1 = CMatrix::identity(space.d1, space.d1);
    let terms = weyl_unitaries(d2)
        .into_iter()
        .map(|w| Ok((weight, kron(&id1, &w)?)))
        .collect::<Result<Vec<_>>>()?;
    MixedUnitaryChannel::new(space.dim(), terms)
}

/// Pinching onto a random block decomposition in a Haar-random basis.
/// The block count is uniform in `1..=min(dim, 8)`; indices are shuffled
/// and cut into that many non-empty groups.
pub fn random_pinching(dim: usize, rng: &mut RngStream) -> Result<MixedUnitaryChannel> {
    let v = random_unitary(dim, rng)?;
    let blocks = 1 + rng.index(dim.min(MAX_PINCHING_BLOCKS));
    let mut order: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        order.swap(i, rng.index(i + 1));
    }
    // Choose blocks−1 distinct cut points in 1..dim.
    let mut cuts: Vec<usize> = (1..dim).collect();
    for i in 0..(blocks - 1) {
        let j = i + rng.index(cuts.len() - i);
        cuts.swap(i, j);
    }
    let mut cuts: Vec<usize> = cuts[..blocks - 1].to_vec();
    cuts.sort_unstable();
    let mut block_of = vec![0; dim];
    for (pos, &idx) in order.iter().enumerate() {
        block_of[idx] = cuts.iter().filter(|&&c| c <= pos).count();
    }
    MixedUnitaryChannel::pinching(&v, &block_of)
}

/// General mixed-unitary channel with `terms` Haar-random unitaries and
/// weights drawn uniformly then normalized.
pub fn random_mixed_unitary(
    dim: usize,
    terms: usize,
    rng: &mut RngStream,
) -> Result<MixedUnitaryChannel> {
    if terms == 0 {
        return Err(Error::Input("channel needs at least one term".into()));
    }
    let raw: Vec<f64> = (0..terms).map(|_| rng.uniform(0.05, 1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut out = Vec::with_capacity(terms);
    for w in raw {
        out.push((w / total, random_unitary(dim, rng)?));
    }
    MixedUnitaryChannel::new(dim, out)
}
