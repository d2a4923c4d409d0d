//! Campaign runner.
//!
//! Sample `k` of a campaign draws all of its inputs from
//! `RngStream::new(seed, k)`, so samples are independent of one another and
//! of evaluation order. Samples run on a rayon pool; results are collected
//! in sample order.

use std::collections::BTreeMap;
use std::time::Instant;

use entgap_core::bipartite::{
    pi_1_as_channel, random_mixed_unitary, random_pinching, reduce, BipartiteSpace,
    MixedUnitaryChannel,
};
use entgap_core::calculus::{divided_difference, quad_form, ScalarFunction};
use entgap_core::entropy::{
    entropy_gap, second_differential_fd_auto, second_differential_spectral, von_neumann_entropy,
    EntropyGapSpec,
};
use entgap_core::linalg::{
    eigh, random_gaussian_matrix, random_hermitian, random_pd, HermitianMatrix, RngStream,
};
use entgap_core::quadrature::{log_kernel_integral, log_resolvent_integral, GaussLegendre};
use entgap_core::{CMatrix, Error};
use rayon::prelude::*;

use crate::config::{CampaignConfig, CampaignId, ChannelFamily, ToleranceMode};
use crate::error::VerifyError;
use crate::report::{CampaignReport, Exploration, SampleError, Witness};

/// Quadrature sizes for the kernel oracles.
pub const KERNEL_NODES: usize = 64;
pub const RESOLVENT_NODES: usize = 128;

/// C9 local search budget.
pub const DESCENT_STEPS: usize = 200;
pub const DESCENT_INITIAL_STEP: f64 = 1e-2;
pub const DESCENT_MAX_STEP: f64 = 1.0;

/// Stream id reserved for C9's descent, disjoint from any sample index.
const DESCENT_STREAM: u64 = u64::MAX;

struct Context {
    cfg: CampaignConfig,
    function: ScalarFunction,
    space: BipartiteSpace,
    gap: EntropyGapSpec,
    kernel_rule: GaussLegendre,
    resolvent_rule: GaussLegendre,
    pi1_channel: Option<MixedUnitaryChannel>,
}

impl Context {
    fn new(cfg: &CampaignConfig) -> Result<Self, VerifyError> {
        cfg.validate()?;
        let function = cfg.scalar_function()?;
        let space = cfg.space()?;
        let pi1_channel = match cfg.campaign {
            CampaignId::C3 => Some(pi_1_as_channel(space)?),
            _ => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            gap: EntropyGapSpec::new(function.clone(), space),
            function,
            space,
            kernel_rule: GaussLegendre::new(KERNEL_NODES)?,
            resolvent_rule: GaussLegendre::new(RESOLVENT_NODES)?,
            pi1_channel,
        })
    }

    fn dim(&self) -> usize {
        self.space.dim()
    }

    fn state(&self, rng: &mut RngStream) -> Result<HermitianMatrix, Error> {
        let [lo, hi] = self.cfg.eig_range;
        let rho = random_pd(self.dim(), rng, (lo, hi))?;
        Ok(if self.cfg.normalize {
            rho.scaled(1.0 / rho.trace())
        } else {
            rho
        })
    }

    fn direction(&self, rng: &mut RngStream) -> Result<HermitianMatrix, Error> {
        random_hermitian(self.dim(), rng, 1.0)
    }

    fn weights(&self) -> &[f64] {
        &self.cfg.convexity_weights
    }
}

/// Result of one sample before tolerance handling.
struct Sample {
    margin: f64,
    input_norm: f64,
    witness: Witness,
    aux: Vec<(&'static str, f64)>,
}

fn input_norm(ms: &[&HermitianMatrix]) -> f64 {
    ms.iter()
        .map(|m| m.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

fn min_over<F>(weights: &[f64], mut f: F) -> Result<f64, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    let mut worst = f64::INFINITY;
    for &t in weights {
        worst = worst.min(f(t)?);
    }
    Ok(worst)
}

/// `t·A + (1−t)·B`.
fn mix(t: f64, a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix, Error> {
    a.combine(t, b, 1.0 - t)
}

/// Slack of `Q(tx₁+(1−t)x₂, th₁+(1−t)h₂) ≤ t·Q(x₁,h₁) + (1−t)·Q(x₂,h₂)`,
/// minimized over the weights.
fn joint_convexity_margin(
    f: &ScalarFunction,
    weights: &[f64],
    x: [&HermitianMatrix; 2],
    h: [&HermitianMatrix; 2],
) -> Result<f64, Error> {
    let q1 = quad_form(f, x[0], h[0])?;
    let q2 = quad_form(f, x[1], h[1])?;
    min_over(weights, |t| {
        let q = quad_form(f, &mix(t, x[0], x[1])?, &mix(t, h[0], h[1])?)?;
        Ok(t * q1 + (1.0 - t) * q2 - q)
    })
}

fn sample_c1(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let rho = ctx.state(rng)?;
    let sigma = ctx.state(rng)?;
    let g_rho = entropy_gap(&rho, &ctx.gap)?;
    let g_sigma = entropy_gap(&sigma, &ctx.gap)?;
    let margin = min_over(ctx.weights(), |t| {
        let g_mix = entropy_gap(&mix(t, &rho, &sigma)?, &ctx.gap)?;
        Ok(t * g_rho + (1.0 - t) * g_sigma - g_mix)
    })?;
    Ok(Sample {
        margin,
        input_norm: input_norm(&[&rho, &sigma]),
        witness: Witness::new(k)
            .matrix("rho", rho.as_matrix())
            .matrix("sigma", sigma.as_matrix()),
        aux: vec![],
    })
}

fn sample_c2(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let rho = ctx.state(rng)?;
    let h = ctx.direction(rng)?;
    let value = second_differential_spectral(&rho, &h, &ctx.gap)?;
    let (fd, step) = second_differential_fd_auto(&rho, &h, &ctx.gap, ctx.cfg.fd_step)?;
    let route_ratio = (value - fd).abs() / (1e-5f64).max(1e-4 * value.abs());
    Ok(Sample {
        margin: value,
        input_norm: input_norm(&[&rho, &h]),
        witness: Witness::new(k)
            .matrix("rho", rho.as_matrix())
            .matrix("h", h.as_matrix())
            .scalar("finite_difference", fd)
            .scalar("fd_step", step),
        aux: vec![("fd_route_max_ratio", route_ratio)],
    })
}

fn sample_c3(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let n = ctx.dim();
    let family = match ctx.cfg.channel_family {
        Some(f) => f,
        None => ChannelFamily::ALL[rng.index(ChannelFamily::ALL.len())],
    };
    let drawn;
    let channel = match family {
        ChannelFamily::Pinching => {
            drawn = random_pinching(n, rng)?;
            &drawn
        }
        ChannelFamily::Pi1 => ctx.pi1_channel.as_ref().expect("built for C3"),
        ChannelFamily::MixedUnitary => {
            let terms = 2 + rng.index(4);
            drawn = random_mixed_unitary(n, terms, rng)?;
            &drawn
        }
    };
    let x = ctx.state(rng)?;
    let h = ctx.direction(rng)?;
    let before = quad_form(&ctx.function, &x, &h)?;
    let after = quad_form(
        &ctx.function,
        &channel.apply_hermitian(&x)?,
        &channel.apply_hermitian(&h)?,
    )?;
    let label = match family {
        ChannelFamily::Pinching => "pinching",
        ChannelFamily::Pi1 => "pi1",
        ChannelFamily::MixedUnitary => "mixed_unitary",
    };
    Ok(Sample {
        margin: before - after,
        input_norm: input_norm(&[&x, &h]),
        witness: Witness::new(k)
            .matrix("x", x.as_matrix())
            .matrix("h", h.as_matrix())
            .label("channel", label)
            .scalar("channel_terms", channel.terms().len() as f64),
        aux: vec![],
    })
}

fn joint_convexity_sample(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let x1 = ctx.state(rng)?;
    let x2 = ctx.state(rng)?;
    let h1 = ctx.direction(rng)?;
    let h2 = ctx.direction(rng)?;
    let margin = joint_convexity_margin(&ctx.function, ctx.weights(), [&x1, &x2], [&h1, &h2])?;
    Ok(Sample {
        margin,
        input_norm: input_norm(&[&x1, &x2, &h1, &h2]),
        witness: Witness::new(k)
            .matrix("x1", x1.as_matrix())
            .matrix("x2", x2.as_matrix())
            .matrix("h1", h1.as_matrix())
            .matrix("h2", h2.as_matrix()),
        aux: vec![],
    })
}

/// `S(ρ) − S(ρ₁)`.
fn conditional_entropy_gap(rho: &HermitianMatrix, space: BipartiteSpace) -> Result<f64, Error> {
    Ok(von_neumann_entropy(rho)? - von_neumann_entropy(&reduce(rho, space)?)?)
}

fn sample_c5(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let rho = ctx.state(rng)?;
    let sigma = ctx.state(rng)?;
    let phi_rho = conditional_entropy_gap(&rho, ctx.space)?;
    let phi_sigma = conditional_entropy_gap(&sigma, ctx.space)?;
    let margin = min_over(ctx.weights(), |t| {
        let phi_mix = conditional_entropy_gap(&mix(t, &rho, &sigma)?, ctx.space)?;
        Ok(phi_mix - (t * phi_rho + (1.0 - t) * phi_sigma))
    })?;

    // G for t·log t against log(d₂)·Tr ρ − S(ρ) + S(ρ₁).
    let gap = EntropyGapSpec::new(ScalarFunction::t_log_t(), ctx.space);
    let g = entropy_gap(&rho, &gap)?;
    let s_full = von_neumann_entropy(&rho)?;
    let s_reduced = von_neumann_entropy(&reduce(&rho, ctx.space)?)?;
    let linear = (ctx.space.d2() as f64).ln() * rho.trace();
    let closed = linear - s_full + s_reduced;
    let scale = [g, linear, s_full, s_reduced]
        .iter()
        .map(|v| v.abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let residual = (g - closed).abs() / scale;

    Ok(Sample {
        margin,
        input_norm: input_norm(&[&rho, &sigma]),
        witness: Witness::new(k)
            .matrix("rho", rho.as_matrix())
            .matrix("sigma", sigma.as_matrix()),
        aux: vec![("entropy_identity_max_rel_residual", residual)],
    })
}

/// `d₂^(p−1)·Tr ρ^p − Tr ρ₁^p` from the two spectra.
/// `d₂^(p−1)·Tr ρ^p − Tr ρ₁^p` from spectra, with the larger of the two
/// terms as a scale for residuals.
fn power_gap_terms(
    rho: &HermitianMatrix,
    space: BipartiteSpace,
    p: f64,
) -> Result<(f64, f64), Error> {
    let full = eigh(rho)?;
    full.require_positive()?;
    let reduced = eigh(&reduce(rho, space)?)?;
    reduced.require_positive()?;
    let tr_full: f64 = full.eigenvalues.iter().map(|l| l.powf(p)).sum();
    let tr_reduced: f64 = reduced.eigenvalues.iter().map(|l| l.powf(p)).sum();
    let full_term = (space.d2() as f64).powf(p - 1.0) * tr_full;
    Ok((full_term - tr_reduced, full_term.max(tr_reduced)))
}

fn power_gap(rho: &HermitianMatrix, space: BipartiteSpace, p: f64) -> Result<f64, Error> {
    Ok(power_gap_terms(rho, space, p)?.0)
}

fn sample_c6(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let p = ctx.cfg.exponent();
    let rho = ctx.state(rng)?;
    let sigma = ctx.state(rng)?;
    let (phi_rho, scale) = power_gap_terms(&rho, ctx.space, p)?;
    let phi_sigma = power_gap(&sigma, ctx.space, p)?;
    let margin = min_over(ctx.weights(), |t| {
        let phi_mix = power_gap(&mix(t, &rho, &sigma)?, ctx.space, p)?;
        Ok(t * phi_rho + (1.0 - t) * phi_sigma - phi_mix)
    })?;

    let gap = EntropyGapSpec::new(ScalarFunction::power(p)?, ctx.space);
    let g = entropy_gap(&rho, &gap)?;
    // At p = 1 both sides vanish, so compare against the size of the terms.
    let residual = (g - phi_rho).abs() / scale.max(g.abs()).max(f64::MIN_POSITIVE);

    Ok(Sample {
        margin,
        input_norm: input_norm(&[&rho, &sigma]),
        witness: Witness::new(k)
            .matrix("rho", rho.as_matrix())
            .matrix("sigma", sigma.as_matrix())
            .scalar("p", p),
        aux: vec![("closed_form_max_rel_residual", residual)],
    })
}

/// `B*·A⁻¹·B` via a Cholesky solve.
fn quadratic_over_linear(a: &HermitianMatrix, b: &CMatrix) -> Result<HermitianMatrix, Error> {
    let chol = a
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("A is not positive definite".into()))?;
    HermitianMatrix::new(b.adjoint() * chol.solve(b))
}

fn sample_c7(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let n = ctx.dim();
    let [lo, hi] = ctx.cfg.eig_range;
    let a1 = random_pd(n, rng, (lo, hi))?;
    let a2 = random_pd(n, rng, (lo, hi))?;
    let b1 = random_gaussian_matrix(n, rng, 1.0);
    let b2 = random_gaussian_matrix(n, rng, 1.0);
    let psi1 = quadratic_over_linear(&a1, &b1)?;
    let psi2 = quadratic_over_linear(&a2, &b2)?;
    let margin = min_over(ctx.weights(), |t| {
        let b_mix = &b1 * entgap_core::Complex64::new(t, 0.0)
            + &b2 * entgap_core::Complex64::new(1.0 - t, 0.0);
        let psi_mix = quadratic_over_linear(&mix(t, &a1, &a2)?, &b_mix)?;
        let chord = mix(t, &psi1, &psi2)?;
        (&chord - &psi_mix).min_eigenvalue()
    })?;
    let b_norm =
        entgap_core::linalg::frobenius_norm(&b1).hypot(entgap_core::linalg::frobenius_norm(&b2));
    Ok(Sample {
        margin,
        input_norm: input_norm(&[&a1, &a2]).hypot(b_norm),
        witness: Witness::new(k)
            .matrix("a1", a1.as_matrix())
            .matrix("a2", a2.as_matrix())
            .matrix("b1", &b1)
            .matrix("b2", &b2),
        aux: vec![],
    })
}

fn sample_c8(ctx: &Context, rng: &mut RngStream, k: u64) -> Result<Sample, Error> {
    let s = rng.uniform(0.1, 10.0);
    let t = rng.uniform(0.1, 10.0);
    let kernel = divided_difference(f64::ln, |x| 1.0 / x, s, t)?;
    let kernel_oracle = log_kernel_integral(&ctx.kernel_rule, s, t)?;
    let kernel_diff = (kernel - kernel_oracle).abs();

    let x = ctx.state(rng)?;
    let h = ctx.direction(rng)?;
    let q = quad_form(&ScalarFunction::t_log_t(), &x, &h)?;
    let q_oracle = log_resolvent_integral(&ctx.resolvent_rule, &x, &h)?;
    let quad_rel = (q - q_oracle).abs() / q_oracle.abs().max(f64::MIN_POSITIVE);

    Ok(Sample {
        margin: ctx.cfg.tolerance - kernel_diff.max(quad_rel),
        input_norm: input_norm(&[&x, &h]),
        witness: Witness::new(k)
            .matrix("x", x.as_matrix())
            .matrix("h", h.as_matrix())
            .scalar("s", s)
            .scalar("t", t),
        aux: vec![
            ("kernel_max_abs_diff", kernel_diff),
            ("quad_form_max_rel_diff", quad_rel),
        ],
    })
}

fn evaluate(ctx: &Context, k: u64) -> Result<Sample, Error> {
    let mut rng = RngStream::new(ctx.cfg.seed, k);
    match ctx.cfg.campaign {
        CampaignId::C1 => sample_c1(ctx, &mut rng, k),
        CampaignId::C2 => sample_c2(ctx, &mut rng, k),
        CampaignId::C3 => sample_c3(ctx, &mut rng, k),
        CampaignId::C4 | CampaignId::C9 => joint_convexity_sample(ctx, &mut rng, k),
        CampaignId::C5 => sample_c5(ctx, &mut rng, k),
        CampaignId::C6 => sample_c6(ctx, &mut rng, k),
        CampaignId::C7 => sample_c7(ctx, &mut rng, k),
        CampaignId::C8 => sample_c8(ctx, &mut rng, k),
    }
}

fn effective_margin(cfg: &CampaignConfig, margin: f64, norm: f64) -> f64 {
    match cfg.tolerance_mode {
        ToleranceMode::Absolute => margin,
        ToleranceMode::Relative => margin / (1.0 + norm),
    }
}

/// Runs a campaign on rayon's global pool.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignReport, VerifyError> {
    run_campaign_with_threads(cfg, None)
}

/// Runs a campaign, optionally on a dedicated pool of `threads` workers.
pub fn run_campaign_with_threads(
    cfg: &CampaignConfig,
    threads: Option<usize>,
) -> Result<CampaignReport, VerifyError> {
    let started = Instant::now();
    let ctx = Context::new(cfg)?;
    let run = || -> Vec<Result<Sample, Error>> {
        (0..cfg.samples as u64)
            .into_par_iter()
            .map(|k| evaluate(&ctx, k))
            .collect()
    };
    let outcomes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| VerifyError::Usage(format!("cannot build thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut margins = Vec::with_capacity(outcomes.len());
    let mut errors = Vec::new();
    let mut auxiliary: BTreeMap<String, f64> = BTreeMap::new();
    let mut worst: Option<(f64, Witness)> = None;
    for (k, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(sample) => {
                let m = effective_margin(cfg, sample.margin, sample.input_norm);
                margins.push(m);
                for (name, v) in sample.aux {
                    let slot = auxiliary
                        .entry(name.to_string())
                        .or_insert(f64::NEG_INFINITY);
                    *slot = slot.max(v);
                }
                if worst.as_ref().is_none_or(|(w, _)| m < *w) {
                    worst = Some((m, sample.witness.scalar("margin", m)));
                }
            }
            Err(e) => errors.push(SampleError {
                sample: k as u64,
                message: e.to_string(),
            }),
        }
    }

    let violations = margins.iter().filter(|&&m| m < -cfg.tolerance).count();
    let exploration = match (cfg.campaign, &worst) {
        (CampaignId::C9, Some((m, w))) => Some(descend(&ctx, *m, w)?),
        _ => None,
    };
    let (worst_margin, witness) = match worst {
        Some((m, w)) => (Some(m), Some(w)),
        None => (None, None),
    };
    Ok(CampaignReport {
        config: cfg.clone(),
        margins,
        violations,
        worst_margin,
        witness,
        errors,
        auxiliary,
        exploration,
        wall_time: Some(started.elapsed().as_secs_f64()),
    })
}

fn witness_hermitian(w: &Witness, name: &str) -> Result<HermitianMatrix, VerifyError> {
    let m = w
        .matrices
        .get(name)
        .ok_or_else(|| VerifyError::Usage(format!("witness has no matrix `{name}`")))?;
    Ok(HermitianMatrix::new(m.0.clone())?)
}

/// Random-perturbation descent on the joint-convexity margin, starting at
/// the worst random-search sample. A step that does not lower the margin
/// (or leaves the positive definite cone) halves the step size; an accepted
/// step doubles it, up to `DESCENT_MAX_STEP`.
fn descend(ctx: &Context, start: f64, from: &Witness) -> Result<Exploration, VerifyError> {
    let mut x = [
        witness_hermitian(from, "x1")?,
        witness_hermitian(from, "x2")?,
    ];
    let mut h = [
        witness_hermitian(from, "h1")?,
        witness_hermitian(from, "h2")?,
    ];
    let score = |x: &[HermitianMatrix; 2], h: &[HermitianMatrix; 2]| -> Result<f64, Error> {
        let m =
            joint_convexity_margin(&ctx.function, ctx.weights(), [&x[0], &x[1]], [&h[0], &h[1]])?;
        Ok(effective_margin(
            &ctx.cfg,
            m,
            input_norm(&[&x[0], &x[1], &h[0], &h[1]]),
        ))
    };
    let mut rng = RngStream::new(ctx.cfg.seed, DESCENT_STREAM);
    let mut current = start;
    let mut step = DESCENT_INITIAL_STEP;
    let mut accepted = 0;
    for _ in 0..DESCENT_STEPS {
        let mut propose = |m: &HermitianMatrix| -> Result<HermitianMatrix, Error> {
            let d = random_hermitian(m.dim(), &mut rng, 1.0)?;
            m.combine(1.0, &d, step)
        };
        let cx = [propose(&x[0])?, propose(&x[1])?];
        let ch = [propose(&h[0])?, propose(&h[1])?];
        let candidate = match score(&cx, &ch) {
            Ok(v) => Some(v),
            Err(Error::NonPositiveEigenvalue { .. }) | Err(Error::Domain(_)) => None,
            Err(e) => return Err(e.into()),
        };
        match candidate {
            Some(v) if v < current => {
                current = v;
                x = cx;
                h = ch;
                accepted += 1;
                step = (2.0 * step).min(DESCENT_MAX_STEP);
            }
            _ => step *= 0.5,
        }
    }
    let best = current.min(start);
    let verdict = if best < -ctx.cfg.tolerance {
        "witness_found"
    } else {
        "inconclusive"
    };
    let refined_witness = (accepted > 0).then(|| {
        Witness::new(from.sample)
            .matrix("x1", x[0].as_matrix())
            .matrix("x2", x[1].as_matrix())
            .matrix("h1", h[0].as_matrix())
            .matrix("h2", h[1].as_matrix())
            .scalar("margin", current)
            .label("origin", "descent")
    });
    Ok(Exploration {
        verdict: verdict.to_string(),
        descent_steps: DESCENT_STEPS,
        accepted_steps: accepted,
        start_margin: start,
        refined_margin: current,
        refined_witness,
    })
}
