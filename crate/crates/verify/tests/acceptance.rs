//! Acceptance gate. Runs every criterion at its pinned tolerance, prints one
//! PASS/FAIL line per criterion and exits nonzero if any criterion fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use entgap_core::calculus::{
    divided_difference, frechet_derivative, matrix_function, quad_form, ScalarFunction, Which,
};
use entgap_core::linalg::{frobenius_norm, random_hermitian, random_pd, RngStream};
use entgap_core::quadrature::{log_kernel_integral, log_resolvent_integral, GaussLegendre};
use entgap_verify::{run_campaign, CampaignConfig, CampaignId, CampaignReport, ChannelFamily};

const SEED: u64 = 42;
const SAMPLES: usize = 200;
const CAMPAIGN_TOLERANCE: f64 = 1e-8;
const BIPARTITE_DIMS: [(usize, usize); 4] = [(2, 2), (2, 3), (3, 2), (3, 3)];

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(cond: bool, failures: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if !cond {
        failures.push(msg());
    }
}

fn finish(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            passed: true,
            detail: summary,
        }
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Outcome {
            passed: false,
            detail: format!(
                "{summary}; {} failure(s): {}",
                failures.len(),
                shown.join(" | ")
            ),
        }
    }
}

fn campaign(
    id: CampaignId,
    d1: usize,
    d2: usize,
    function: &str,
    p: Option<f64>,
) -> CampaignReport {
    let mut cfg = CampaignConfig::new(id);
    cfg.d1 = d1;
    cfg.d2 = d2;
    cfg.samples = SAMPLES;
    cfg.seed = SEED;
    cfg.tolerance = CAMPAIGN_TOLERANCE;
    cfg.function = function.to_string();
    cfg.p = p;
    run_campaign(&cfg).expect("valid campaign configuration")
}

fn campaign_clean(r: &CampaignReport, failures: &mut Vec<String>) {
    let c = &r.config;
    let tag = format!(
        "{} {}x{} {}{}",
        c.campaign,
        c.d1,
        c.d2,
        c.function,
        c.p.map(|p| format!("({p})")).unwrap_or_default()
    );
    check(r.errors.is_empty(), failures, || {
        format!("{tag}: {} sample errors", r.errors.len())
    });
    check(r.margins.len() == c.samples, failures, || {
        format!("{tag}: missing margins")
    });
    check(r.violations == 0, failures, || {
        format!(
            "{tag}: {} violations, worst {:?}",
            r.violations, r.worst_margin
        )
    });
}

const MATRIX_ENTROPIES: [(&str, Option<f64>); 4] = [
    ("t_log_t", None),
    ("power", Some(1.0)),
    ("power", Some(1.5)),
    ("power", Some(2.0)),
];

/// 1. Fréchet derivative against central differences.
fn frechet_oracle() -> Outcome {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-6;
    let mut failures = vec![];
    let mut worst: f64 = 0.0;
    let functions = [
        ScalarFunction::t_log_t(),
        ScalarFunction::power(1.5).unwrap(),
        ScalarFunction::log(),
    ];
    for (fi, f) in functions.iter().enumerate() {
        for dim in 2..=6 {
            for draw in 0..100u64 {
                let mut rng = RngStream::new(SEED, (fi as u64) << 32 | (dim as u64) << 16 | draw);
                let a = random_pd(dim, &mut rng, (0.1, 3.0)).unwrap();
                let h = random_hermitian(dim, &mut rng, 1.0).unwrap();
                let exact = frechet_derivative(f, Which::F, &a, &h).unwrap();
                let plus = matrix_function(f, &a.combine(1.0, &h, STEP).unwrap()).unwrap();
                let minus = matrix_function(f, &a.combine(1.0, &h, -STEP).unwrap()).unwrap();
                let fd = (plus.as_matrix() - minus.as_matrix())
                    / entgap_core::Complex64::new(2.0 * STEP, 0.0);
                let rel = frobenius_norm(&(exact.as_matrix() - &fd)) / exact.frobenius_norm();
                worst = worst.max(rel);
                check(rel <= TOL, &mut failures, || {
                    format!("{} dim {dim} draw {draw}: rel err {rel:.3e}", f.name())
                });
            }
        }
    }
    finish(
        failures,
        format!("1500 draws, max rel err {worst:.3e} (tol {TOL:e})"),
    )
}

/// 2. Kernel identities against Gauss–Legendre quadrature.
fn kernel_identities() -> Outcome {
    let mut failures = vec![];
    let rule64 = GaussLegendre::new(64).unwrap();
    let rule128 = GaussLegendre::new(128).unwrap();
    let mut rng = RngStream::new(SEED, 0);
    let mut worst_dd: f64 = 0.0;
    for i in 0..1000 {
        let s = rng.uniform(0.1, 10.0);
        let t = rng.uniform(0.1, 10.0);
        let dd = divided_difference(f64::ln, |x| 1.0 / x, s, t).unwrap();
        let q = log_kernel_integral(&rule64, s, t).unwrap();
        let diff = (dd - q).abs();
        worst_dd = worst_dd.max(diff);
        check(diff <= 1e-10, &mut failures, || {
            format!("pair {i} ({s}, {t}): {diff:.3e}")
        });
    }
    let f = ScalarFunction::t_log_t();
    let mut worst_q: f64 = 0.0;
    for draw in 0..100u64 {
        let dim = 1 + (draw as usize % 5);
        let mut rng = RngStream::new(SEED, 1 + draw);
        let x = random_pd(dim, &mut rng, (0.1, 3.0)).unwrap();
        let h = random_hermitian(dim, &mut rng, 1.0).unwrap();
        let q = quad_form(&f, &x, &h).unwrap();
        let oracle = log_resolvent_integral(&rule128, &x, &h).unwrap();
        let rel = (q - oracle).abs() / oracle.abs();
        worst_q = worst_q.max(rel);
        check(rel <= 1e-7, &mut failures, || {
            format!("quad form draw {draw}: rel {rel:.3e}")
        });
    }
    finish(
        failures,
        format!("max |dd − GL64| {worst_dd:.3e} (tol 1e-10), max quad-form rel diff {worst_q:.3e} (tol 1e-7)"),
    )
}

/// 3. Convexity of G (C1) and nonnegativity of d²G (C2), plus route agreement.
fn gap_convexity() -> Outcome {
    let mut failures = vec![];
    let mut worst_ratio: f64 = 0.0;
    let mut worst_c2 = f64::INFINITY;
    for (d1, d2) in BIPARTITE_DIMS {
        for (name, p) in MATRIX_ENTROPIES {
            let c1 = campaign(CampaignId::C1, d1, d2, name, p);
            campaign_clean(&c1, &mut failures);
            let c2 = campaign(CampaignId::C2, d1, d2, name, p);
            campaign_clean(&c2, &mut failures);
            worst_c2 = worst_c2.min(c2.worst_margin.unwrap_or(f64::NAN));
            let ratio = c2.auxiliary["fd_route_max_ratio"];
            worst_ratio = worst_ratio.max(ratio);
            check(ratio <= 1.0, &mut failures, || {
                format!(
                    "C2 {d1}x{d2} {name}: spectral vs fd exceeds max(1e-5, 1e-4|v|) by x{ratio:.3}"
                )
            });
        }
    }
    finish(
        failures,
        format!(
            "32 campaigns x {SAMPLES}; min d²G {worst_c2:.3e}; worst route error / allowance {worst_ratio:.3}"
        ),
    )
}

/// 4. Monotonicity under conditional expectations and mixed-unitary channels (C3).
fn channel_monotonicity() -> Outcome {
    let mut failures = vec![];
    let mut worst = f64::INFINITY;
    for family in ChannelFamily::ALL {
        for (name, p) in [("t_log_t", None), ("power", Some(1.5))] {
            for (d1, d2) in [(2, 2), (2, 3), (3, 3)] {
                let mut cfg = CampaignConfig::new(CampaignId::C3);
                cfg.d1 = d1;
                cfg.d2 = d2;
                cfg.samples = SAMPLES;
                cfg.seed = SEED;
                cfg.function = name.into();
                cfg.p = p;
                cfg.channel_family = Some(family);
                let r = run_campaign(&cfg).unwrap();
                campaign_clean(&r, &mut failures);
                worst = worst.min(r.worst_margin.unwrap_or(f64::NAN));
            }
        }
    }
    finish(
        failures,
        format!("18 campaigns x {SAMPLES}; worst margin {worst:.3e}"),
    )
}

/// 5. Joint convexity (C4), entropy difference concavity (C5) and the power gap (C6).
fn entropy_condition_and_closed_forms() -> Outcome {
    let mut failures = vec![];
    let mut worst_identity: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for (d1, d2) in BIPARTITE_DIMS {
        for (name, p) in MATRIX_ENTROPIES {
            campaign_clean(&campaign(CampaignId::C4, d1, d2, name, p), &mut failures);
        }
        let c5 = campaign(CampaignId::C5, d1, d2, "t_log_t", None);
        campaign_clean(&c5, &mut failures);
        let residual = c5.auxiliary["entropy_identity_max_rel_residual"];
        worst_identity = worst_identity.max(residual);
        check(residual <= 1e-9, &mut failures, || {
            format!("C5 {d1}x{d2}: identity residual {residual:.3e}")
        });
        for p in [1.0, 1.25, 1.5, 1.75, 2.0] {
            let c6 = campaign(CampaignId::C6, d1, d2, "t_log_t", Some(p));
            campaign_clean(&c6, &mut failures);
            let residual = c6.auxiliary["closed_form_max_rel_residual"];
            worst_closed = worst_closed.max(residual);
            check(residual <= 1e-9, &mut failures, || {
                format!("C6 {d1}x{d2} p={p}: closed form residual {residual:.3e}")
            });
        }
    }
    finish(
        failures,
        format!(
            "C4 16 campaigns, C5 4, C6 20 (x {SAMPLES}); entropy identity residual {worst_identity:.3e}; power closed form residual {worst_closed:.3e}"
        ),
    )
}

/// 6. Operator convexity of (A, B) ↦ B*A⁻¹B (C7).
fn operator_convexity() -> Outcome {
    const TOL: f64 = 1e-9;
    let mut failures = vec![];
    let mut worst = f64::INFINITY;
    for n in 1..=6 {
        let mut cfg = CampaignConfig::new(CampaignId::C7);
        cfg.d1 = 1;
        cfg.d2 = n;
        cfg.samples = SAMPLES;
        cfg.seed = SEED;
        cfg.tolerance = TOL;
        cfg.eig_range = [0.1, 3.0];
        let r = run_campaign(&cfg).unwrap();
        campaign_clean(&r, &mut failures);
        let w = r.worst_margin.unwrap_or(f64::NAN);
        worst = worst.min(w);
        check(w >= -TOL, &mut failures, || {
            format!("dim {n}: min eigenvalue {w:.3e}")
        });
    }
    finish(
        failures,
        format!("dims 1–6 x {SAMPLES}; min eigenvalue margin {worst:.3e} (tol −{TOL:e})"),
    )
}

/// 7. Byte-identical suite reports from two CLI runs.
fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_verify");
    let dir = std::env::temp_dir().join(format!("entgap-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str| -> (PathBuf, i32) {
        let out = dir.join(name);
        let status = Command::new(exe)
            .args(["--all", "--seed", "42", "--out"])
            .arg(&out)
            .output()
            .expect("verify binary runs");
        (out, status.status.code().unwrap_or(-1))
    };
    let (a, code_a) = run("first.json");
    let (b, code_b) = run("second.json");
    let bytes_a = std::fs::read(&a).unwrap_or_default();
    let bytes_b = std::fs::read(&b).unwrap_or_default();
    let _ = std::fs::remove_dir_all(&dir);
    let mut failures = vec![];
    check(code_a == 0 && code_b == 0, &mut failures, || {
        format!("exit codes {code_a}, {code_b}")
    });
    check(!bytes_a.is_empty(), &mut failures, || "empty report".into());
    check(bytes_a == bytes_b, &mut failures, || {
        "reports differ".into()
    });
    finish(failures, format!("{} bytes, identical", bytes_a.len()))
}

/// 8. C1 with f = identity has margins identically zero.
fn trivial_function() -> Outcome {
    let mut failures = vec![];
    let mut worst: f64 = 0.0;
    for (d1, d2) in BIPARTITE_DIMS {
        let r = campaign(CampaignId::C1, d1, d2, "identity", None);
        campaign_clean(&r, &mut failures);
        let m = r.margins.iter().fold(0.0f64, |acc, m| acc.max(m.abs()));
        worst = worst.max(m);
        check(m <= 1e-14, &mut failures, || {
            format!("{d1}x{d2}: |margin| {m:.3e}")
        });
    }
    finish(failures, format!("max |margin| {worst:.3e} (tol 1e-14)"))
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 8] = [
        (
            "1 Fréchet derivative vs finite differences",
            frechet_oracle,
            Some(Duration::from_secs(10)),
        ),
        (
            "2 kernel identities vs quadrature",
            kernel_identities,
            Some(Duration::from_secs(10)),
        ),
        (
            "3 convexity of G and d²G ≥ 0 (C1, C2)",
            gap_convexity,
            Some(Duration::from_secs(60)),
        ),
        (
            "4 channel monotonicity (C3)",
            channel_monotonicity,
            Some(Duration::from_secs(30)),
        ),
        (
            "5 joint convexity, entropy and power gaps (C4, C5, C6)",
            entropy_condition_and_closed_forms,
            Some(Duration::from_secs(60)),
        ),
        (
            "6 operator convexity of B*A⁻¹B (C7)",
            operator_convexity,
            Some(Duration::from_secs(10)),
        ),
        ("7 deterministic --all reports", determinism, None),
        ("8 identity function margins vanish", trivial_function, None),
    ];
    let mut all_passed = true;
    for (name, run, budget) in criteria {
        let started = Instant::now();
        let mut outcome = run();
        let elapsed = started.elapsed();
        if let Some(limit) = budget {
            if elapsed > limit {
                outcome.passed = false;
                outcome.detail =
                    format!("{}; exceeded {}s budget", outcome.detail, limit.as_secs());
            }
        }
        all_passed &= outcome.passed;
        println!(
            "[{}] criterion {name}: {} ({:.2}s)",
            if outcome.passed { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
    }
    if !all_passed {
        std::process::exit(1);
    }
}
