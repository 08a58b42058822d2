use serde::Serialize;

use super::Network;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::powerflow::{solve_power_flow, PowerFlowSolution};

/// System-wide power balance of the solved base case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemTotals {
    /// Solved generation, MW, including the slack unit's actual output.
    pub generation_mw: f64,
    pub load_mw: f64,
    pub losses_mw: f64,
    /// |net real injection| per bus row, MW.
    pub injection_magnitudes: Vec<f64>,
}

impl SystemTotals {
    pub fn from_solution(net: &Network, sol: &PowerFlowSolution) -> Self {
        Self {
            generation_mw: sol.total_generation_mw(net),
            load_mw: net.buses.iter().map(|b| b.load_p).sum(),
            losses_mw: sol.losses_mw(net),
            injection_magnitudes: sol.bus_injections.iter().map(|p| p.abs()).collect(),
        }
    }
}

/// Solves the base case and sums its generation and load.
pub fn system_totals(net: &Network, cfg: &SolverConfig) -> Result<SystemTotals> {
    let sol = solve_power_flow(net, cfg)?;
    if !sol.is_converged() {
        return Err(Error::BaseCaseInfeasible(format!(
            "power flow {} after {} iterations",
            sol.status, sol.iterations
        )));
    }
    Ok(SystemTotals::from_solution(net, &sol))
}
