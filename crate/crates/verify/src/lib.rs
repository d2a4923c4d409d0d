//! Seeded randomized campaigns that check, sample by sample, the
//! convexity and monotonicity statements behind the entropy-gap functional.
//!
//! Each campaign draws independent inputs from the stream `(seed, sample)`,
//! evaluates a signed margin (the slack of the tested inequality) and
//! collects the margins, in sample order, into a [`CampaignReport`].

pub mod campaign;
pub mod config;
mod error;
pub mod report;

pub use campaign::{run_campaign, run_campaign_with_threads};
pub use config::{CampaignConfig, CampaignId, ChannelFamily, ToleranceMode};
pub use error::VerifyError;
pub use report::{emit_report, CampaignReport, SuiteReport, Witness, WitnessMatrix};
