//! Cyber-induced risk assessment for substation protective relays.
//!
//! A grid case is solved once, every substation is given its set of relays,
//! each relay's compromise is simulated as an outage of the components it can
//! open, and the resulting power-flow status is turned into a risk index
//! under three probability schemes.
//!
//! ```no_run
//! use relay_risk::{config::AssessmentConfig, report::run_assessment};
//!
//! let report = run_assessment("cases/case30.m", &AssessmentConfig::default())?;
//! for row in report.critical_rows() {
//!     println!("{} {}", row.substation, row.relay_type);
//! }
//! # Ok::<(), relay_risk::Error>(())
//! ```

pub mod case;
pub mod config;
pub mod engine;
pub mod error;
pub mod powerflow;
pub mod relay;
pub mod report;
pub mod risk;

pub use case::{ComponentKind, ComponentRef, Network};
pub use config::AssessmentConfig;
pub use error::{Error, Result};
pub use powerflow::{solve_power_flow, PowerFlowSolution, PowerFlowStatus};
pub use relay::{RelayInstance, RelaySet, RelayType};
pub use report::RiskReport;
