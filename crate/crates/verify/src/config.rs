use std::fmt;
use std::str::FromStr;

use entgap_core::bipartite::BipartiteSpace;
use entgap_core::calculus::ScalarFunction;
use entgap_core::linalg::MAX_DIM;
use serde::{Deserialize, Serialize};

use crate::error::VerifyError;

/// Verification campaigns. C1–C8 gate; C9 is exploratory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CampaignId {
    /// Segment convexity of the entropy gap `G`.
    C1,
    /// Nonnegativity of `d²G`.
    C2,
    /// Monotonicity of the quadratic form under mixed-unitary channels.
    C3,
    /// Joint convexity of `(x, h) ↦ Tr h·Df′(x)[h]`.
    C4,
    /// Concavity of `ρ ↦ S(ρ) − S(ρ₁)`.
    C5,
    /// Convexity of `ρ ↦ d₂^(p−1)·Tr ρ^p − Tr ρ₁^p`.
    C6,
    /// Operator convexity of `(A, B) ↦ B*A⁻¹B`.
    C7,
    /// Integral representations of the logarithmic kernel.
    C8,
    /// Falsification search on the joint-convexity statement.
    C9,
}

impl CampaignId {
    pub const GATING: [CampaignId; 8] = [
        CampaignId::C1,
        CampaignId::C2,
        CampaignId::C3,
        CampaignId::C4,
        CampaignId::C5,
        CampaignId::C6,
        CampaignId::C7,
        CampaignId::C8,
    ];

    pub fn is_exploratory(self) -> bool {
        self == CampaignId::C9
    }

    /// Default function for campaigns that use the configured one.
    pub fn default_function(self) -> &'static str {
        match self {
            CampaignId::C9 => "cube",
            _ => "t_log_t",
        }
    }
}

impl fmt::Display for CampaignId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("{self:?}"))
    }
}

impl FromStr for CampaignId {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "C1" => CampaignId::C1,
            "C2" => CampaignId::C2,
            "C3" => CampaignId::C3,
            "C4" => CampaignId::C4,
            "C5" => CampaignId::C5,
            "C6" => CampaignId::C6,
            "C7" => CampaignId::C7,
            "C8" => CampaignId::C8,
            "C9" => CampaignId::C9,
            _ => return Err(VerifyError::Usage(format!("unknown campaign `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceMode {
    /// Pass when `margin ≥ −tolerance`.
    Absolute,
    /// Margins are divided by `1 + ‖inputs‖_F` before the comparison.
    Relative,
}

/// Channel family used by C3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelFamily {
    Pinching,
    Pi1,
    MixedUnitary,
}

impl ChannelFamily {
    pub const ALL: [ChannelFamily; 3] = [
        ChannelFamily::Pinching,
        ChannelFamily::Pi1,
        ChannelFamily::MixedUnitary,
    ];
}

impl FromStr for ChannelFamily {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pinching" => Ok(ChannelFamily::Pinching),
            "pi1" | "pi_1" => Ok(ChannelFamily::Pi1),
            "mixed" | "mixed_unitary" => Ok(ChannelFamily::MixedUnitary),
            _ => Err(VerifyError::Usage(format!("unknown channel family `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub campaign: CampaignId,
    pub d1: usize,
    pub d2: usize,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub tolerance_mode: ToleranceMode,
    /// Name of a built-in scalar function.
    pub function: String,
    /// Exponent for `power` and for C6.
    pub p: Option<f64>,
    pub convexity_weights: Vec<f64>,
    pub fd_step: f64,
    /// Spectrum range for random positive definite draws.
    pub eig_range: [f64; 2],
    /// Rescale random states to unit trace.
    pub normalize: bool,
    /// Restrict C3 to one channel family; otherwise drawn per sample.
    pub channel_family: Option<ChannelFamily>,
}

pub const DEFAULT_WEIGHTS: [f64; 3] = [0.5, 0.25, 0.75];
pub const DEFAULT_P: f64 = 1.5;

impl CampaignConfig {
    pub fn new(campaign: CampaignId) -> Self {
        Self {
            campaign,
            d1: 2,
            d2: 2,
            samples: 200,
            seed: 42,
            tolerance: 1e-8,
            tolerance_mode: ToleranceMode::Absolute,
            function: campaign.default_function().to_string(),
            p: None,
            convexity_weights: DEFAULT_WEIGHTS.to_vec(),
            fd_step: entgap_core::entropy::DEFAULT_FD_STEP,
            eig_range: [0.1, 3.0],
            normalize: false,
            channel_family: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn exponent(&self) -> f64 {
        self.p.unwrap_or(DEFAULT_P)
    }

    pub fn space(&self) -> Result<BipartiteSpace, VerifyError> {
        BipartiteSpace::new(self.d1, self.d2).map_err(|e| VerifyError::Usage(e.to_string()))
    }

    /// The configured scalar function. `power` falls back to the default
    /// exponent when none is given.
    pub fn scalar_function(&self) -> Result<ScalarFunction, VerifyError> {
        let p = if self.function == "power" {
            Some(self.exponent())
        } else {
            self.p
        };
        ScalarFunction::by_name(&self.function, p).map_err(|e| VerifyError::Usage(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), VerifyError> {
        let usage = |m: String| Err(VerifyError::Usage(m));
        if self.d1 == 0 || self.d2 == 0 || self.d1 * self.d2 > MAX_DIM {
            return usage(format!(
                "d1·d2 must be between 1 and {MAX_DIM}, got {}x{}",
                self.d1, self.d2
            ));
        }
        if self.samples == 0 {
            return usage("samples must be at least 1".into());
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return usage(format!("tolerance {} must be positive", self.tolerance));
        }
        if self.convexity_weights.is_empty()
            || self
                .convexity_weights
                .iter()
                .any(|&w| !(w > 0.0 && w < 1.0))
        {
            return usage("convexity weights must lie strictly inside (0, 1)".into());
        }
        if !(self.fd_step > 0.0) || !self.fd_step.is_finite() {
            return usage(format!("fd step {} must be positive", self.fd_step));
        }
        let [lo, hi] = self.eig_range;
        if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
            return usage(format!(
                "eigenvalue range [{lo}, {hi}] must satisfy 0 < lo <= hi"
            ));
        }
        if let Some(p) = self.p {
            if !(1.0..=2.0).contains(&p) {
                return usage(format!("exponent p = {p} must lie in [1, 2]"));
            }
        }
        self.scalar_function()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for id in CampaignId::GATING.into_iter().chain([CampaignId::C9]) {
            CampaignConfig::new(id).validate().unwrap();
        }
        assert_eq!(CampaignConfig::new(CampaignId::C9).function, "cube");
    }

    #[test]
    fn rejects_bad_values() {
        let base = CampaignConfig::new(CampaignId::C1);
        let cases: Vec<Box<dyn Fn(&mut CampaignConfig)>> = vec![
            Box::new(|c| c.samples = 0),
            Box::new(|c| c.d1 = 33),
            Box::new(|c| c.tolerance = 0.0),
            Box::new(|c| c.convexity_weights = vec![0.5, 1.0]),
            Box::new(|c| c.convexity_weights.clear()),
            Box::new(|c| c.eig_range = [0.0, 1.0]),
            Box::new(|c| c.function = "sin".into()),
            Box::new(|c| c.p = Some(3.0)),
            Box::new(|c| c.fd_step = -1.0),
        ];
        for mutate in cases {
            let mut c = base.clone();
            mutate(&mut c);
            assert!(matches!(c.validate(), Err(VerifyError::Usage(_))), "{c:?}");
        }
    }

    #[test]
    fn parses_identifiers() {
        assert_eq!("c7".parse::<CampaignId>().unwrap(), CampaignId::C7);
        assert!("C10".parse::<CampaignId>().is_err());
        assert_eq!("pi1".parse::<ChannelFamily>().unwrap(), ChannelFamily::Pi1);
    }
}
