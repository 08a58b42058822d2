//! Run configuration.
//!
//! Every knob has a default, so an empty TOML file (or no file at all) is a
//! valid configuration. CLI flags override whatever the file sets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newton–Raphson settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Largest admissible power mismatch, per unit.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Switch PV buses to PQ when their generators hit a reactive limit.
    pub enforce_q_limits: bool,
    /// When the slack generation is tripped, hand the reference role to the
    /// largest remaining generator instead of declaring the case infeasible.
    pub promote_slack: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 30,
            enforce_q_limits: false,
            promote_slack: false,
        }
    }
}

/// Which branches a branch-tripping relay opens when compromised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchTrip {
    /// Only branches carrying base-case real power out of the substation.
    Exporting,
    /// Every branch the relay can control.
    All,
}

/// Which end of a branch is metered when summing controlled power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowEnd {
    /// The end where real power enters the branch (the larger of the two).
    Sending,
    /// The end where real power leaves the branch.
    Receiving,
    /// The end attached to the relay's own substation.
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelayPolicy {
    pub distance_trip: BranchTrip,
    pub transformer_trip: BranchTrip,
    /// Transformer relays are only in service at substations with local
    /// generation or load; elsewhere they are reported as unavailable.
    pub transformer_requires_injection: bool,
    /// Real power at or below this many MW counts as no flow, both when
    /// deciding whether a branch exports and whether a substation carries
    /// any power at all.
    pub zero_flow_mw: f64,
}

impl Default for RelayPolicy {
    fn default() -> Self {
        Self {
            distance_trip: BranchTrip::Exporting,
            transformer_trip: BranchTrip::Exporting,
            transformer_requires_injection: false,
            zero_flow_mw: 1e-6,
        }
    }
}

impl RelayPolicy {
    /// Every relay trips its whole controllability set.
    pub fn full_disconnection() -> Self {
        Self {
            distance_trip: BranchTrip::All,
            transformer_trip: BranchTrip::All,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessmentConfig {
    pub solver: SolverConfig,
    pub relays: RelayPolicy,
    pub flow_end: FlowEnd,
    /// Master seed for the random probability scheme.
    pub seed: u64,
    /// Number of random draws averaged per substation.
    pub trials: usize,
    /// Worker threads for scenario evaluation; 0 picks the machine default.
    pub workers: usize,
}

impl Default for AssessmentConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            relays: RelayPolicy::default(),
            flow_end: FlowEnd::Sending,
            seed: 42,
            trials: 1,
            workers: 1,
        }
    }
}

impl AssessmentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.solver.tolerance > 0.0 && self.solver.tolerance.is_finite()) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.relays.zero_flow_mw.is_nan() || self.relays.zero_flow_mw < 0.0 {
            return Err(Error::Config("zero-flow threshold must be non-negative".into()));
        }
        Ok(())
    }
}
