use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use entgap_verify::config::ChannelFamily;
use entgap_verify::report::{emit_suite, SuiteReport};
use entgap_verify::{
    emit_report, run_campaign_with_threads, CampaignConfig, CampaignId, CampaignReport,
    ToleranceMode, VerifyError,
};

const EXIT_PASS: u8 = 0;
const EXIT_VIOLATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Seeded randomized verification of matrix-entropy convexity statements.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
#[command(group(ArgGroup::new("mode").required(true).args(["campaign", "all"])))]
struct Cli {
    /// Campaign to run (C1–C9).
    #[arg(long)]
    campaign: Option<CampaignId>,

    /// Run C1–C8 and print a summary table.
    #[arg(long)]
    all: bool,

    #[arg(long, default_value_t = 2)]
    d1: usize,

    #[arg(long, default_value_t = 2)]
    d2: usize,

    #[arg(long, default_value_t = 200)]
    samples: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,

    /// Scale tolerances by 1 + ‖inputs‖_F.
    #[arg(long)]
    relative: bool,

    /// t_log_t, power, log, identity, square or cube. Defaults to t_log_t
    /// (cube for C9).
    #[arg(long)]
    function: Option<String>,

    /// Exponent for `power` and for C6 (default 1.5).
    #[arg(long)]
    p: Option<f64>,

    /// Comma-separated convexity weights in (0, 1).
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.75])]
    weights: Vec<f64>,

    #[arg(long, default_value_t = 1e-4)]
    fd_step: f64,

    /// Spectrum range `lo,hi` for random positive definite draws.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.1, 3.0])]
    eig_range: Vec<f64>,

    /// Rescale random states to unit trace.
    #[arg(long)]
    normalize: bool,

    /// Restrict C3 to one channel family: pinching, pi1 or mixed.
    #[arg(long)]
    channel: Option<ChannelFamily>,

    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for sample evaluation.
    #[arg(long)]
    threads: Option<usize>,

    /// Keep wall-clock times in the JSON report.
    #[arg(long)]
    timing: bool,
}

impl Cli {
    fn config(&self, campaign: CampaignId) -> CampaignConfig {
        let mut cfg = CampaignConfig::new(campaign);
        cfg.d1 = self.d1;
        cfg.d2 = self.d2;
        cfg.samples = self.samples;
        cfg.seed = self.seed;
        cfg.tolerance = self.tolerance;
        cfg.tolerance_mode = if self.relative {
            ToleranceMode::Relative
        } else {
            ToleranceMode::Absolute
        };
        if let Some(f) = &self.function {
            cfg.function = f.clone();
        }
        cfg.p = self.p;
        cfg.convexity_weights = self.weights.clone();
        cfg.fd_step = self.fd_step;
        cfg.eig_range = [self.eig_range[0], self.eig_range[1]];
        cfg.normalize = self.normalize;
        cfg.channel_family = self.channel;
        cfg
    }
}

fn exit_code(reports: &[CampaignReport]) -> u8 {
    if reports.iter().any(|r| !r.errors.is_empty()) {
        EXIT_NUMERIC
    } else if reports.iter().any(|r| !r.passed()) {
        EXIT_VIOLATION
    } else {
        EXIT_PASS
    }
}

fn print_table(reports: &[CampaignReport]) {
    println!(
        "{:<9} {:>8} {:>10} {:>7} {:>14} {:>9}",
        "campaign", "samples", "violations", "errors", "worst margin", "time (s)"
    );
    for r in reports {
        let worst = r
            .worst_margin
            .map_or_else(|| "-".to_string(), |m| format!("{m:.6e}"));
        println!(
            "{:<9} {:>8} {:>10} {:>7} {:>14} {:>9.3}",
            r.config.campaign,
            r.config.samples,
            r.violations,
            r.errors.len(),
            worst,
            r.wall_time.unwrap_or(0.0)
        );
    }
}

fn run(cli: &Cli) -> Result<u8, VerifyError> {
    let campaigns: Vec<CampaignId> = match cli.campaign {
        Some(id) => vec![id],
        None => CampaignId::GATING.to_vec(),
    };
    let mut reports = Vec::with_capacity(campaigns.len());
    for id in campaigns {
        reports.push(run_campaign_with_threads(&cli.config(id), cli.threads)?);
    }
    print_table(&reports);
    if let Some(r) = reports.iter().find_map(|r| r.exploration.as_ref()) {
        println!(
            "exploration: {} (refined margin {:.6e} after {} accepted steps)",
            r.verdict, r.refined_margin, r.accepted_steps
        );
    }
    for r in &reports {
        for e in &r.errors {
            eprintln!("{} sample {}: {}", r.config.campaign, e.sample, e.message);
        }
    }
    let code = exit_code(&reports);

    if let Some(path) = &cli.out {
        if !cli.timing {
            for r in &mut reports {
                r.wall_time = None;
            }
        }
        if cli.all {
            emit_suite(&SuiteReport { reports }, path)?;
        } else {
            emit_report(&reports[0], path)?;
        }
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e @ VerifyError::Usage(_)) => {
            eprintln!("verify: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e @ VerifyError::Io { .. }) => {
            eprintln!("verify: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("verify: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
