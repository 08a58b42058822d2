//! Single-relay outage enumeration.
//!
//! Every relay slot of a [`RelaySet`] becomes one scenario: its severe set is
//! switched out of the base network and the remainder is re-solved from a
//! flat start. Unavailable slots pass through as sentinel outcomes.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;

use crate::case::{BusId, ComponentRef, Network};
use crate::config::AssessmentConfig;
use crate::error::{Error, Result};
use crate::powerflow::{apply_outage, solve_power_flow, PowerFlowSolution, PowerFlowStatus};
use crate::relay::{controlled_power_mw, RelayInstance, RelaySet, RelayType};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutageScenario {
    pub substation: BusId,
    pub relay_type: RelayType,
    pub removed: BTreeSet<ComponentRef>,
    pub label: String,
}

impl OutageScenario {
    pub fn for_relay(relay: &RelayInstance) -> Result<Self> {
        if !relay.available {
            return Err(Error::Domain(format!("relay {} is not available", relay.label())));
        }
        Ok(Self {
            substation: relay.substation,
            relay_type: relay.relay_type,
            removed: relay.severe_set.clone(),
            label: relay.label(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioOutcome {
    pub substation: BusId,
    pub relay_type: RelayType,
    pub available: bool,
    /// None for unavailable relays, which are never solved.
    pub status: Option<PowerFlowStatus>,
    /// |P_ik|: base-case MW carried by the removed components.
    pub controlled_power_mw: f64,
    /// |C'_ik|
    pub severe_size: usize,
    pub iterations: usize,
    /// De-energized islands left by the outage.
    pub islands: usize,
}

impl ScenarioOutcome {
    fn sentinel(relay: &RelayInstance) -> Self {
        Self {
            substation: relay.substation,
            relay_type: relay.relay_type,
            available: false,
            status: None,
            controlled_power_mw: relay.controlled_power_mw,
            severe_size: relay.severe_set.len(),
            iterations: 0,
            islands: 0,
        }
    }

    /// Diverged or islanded.
    pub fn is_failure(&self) -> bool {
        self.status.is_some_and(|s| !s.is_converged())
    }
}

/// Removes the scenario's components and re-solves what is left.
pub fn evaluate_scenario(
    net: &Network,
    base: &PowerFlowSolution,
    scenario: &OutageScenario,
    cfg: &AssessmentConfig,
) -> Result<ScenarioOutcome> {
    let (reduced, topo) = apply_outage(net, &scenario.removed, &cfg.solver)?;
    let (status, iterations) = if topo.infeasible {
        (PowerFlowStatus::IslandedInfeasible, 0)
    } else {
        let sol = solve_power_flow(&reduced, &cfg.solver)?;
        (sol.status, sol.iterations)
    };
    Ok(ScenarioOutcome {
        substation: scenario.substation,
        relay_type: scenario.relay_type,
        available: true,
        status: Some(status),
        controlled_power_mw: controlled_power_mw(net, base, &scenario.removed, cfg.flow_end),
        severe_size: scenario.removed.len(),
        iterations,
        islands: topo.islands.len(),
    })
}

/// Called with (completed, total) after each finished scenario.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

/// Evaluates every relay slot, in inventory order, on `cfg.workers` threads.
pub fn enumerate_all(
    net: &Network,
    base: &PowerFlowSolution,
    relays: &RelaySet,
    cfg: &AssessmentConfig,
    progress: Option<Progress<'_>>,
) -> Result<Vec<ScenarioOutcome>> {
    if !base.is_converged() {
        return Err(Error::BaseCaseInfeasible(format!("power flow {}", base.status)));
    }
    let total = relays.len();
    let done = AtomicUsize::new(0);
    let run = |relay: &RelayInstance| -> Result<ScenarioOutcome> {
        let outcome = if relay.available {
            let scenario = OutageScenario::for_relay(relay)?;
            evaluate_scenario(net, base, &scenario, cfg).map_err(|e| e.context(relay.label()))?
        } else {
            ScenarioOutcome::sentinel(relay)
        };
        let n = done.fetch_add(1, Ordering::Relaxed) + 1;
        if let Some(report) = progress {
            report(n, total);
        }
        Ok(outcome)
    };

    if cfg.workers == 1 {
        return relays.relays.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| relays.relays.par_iter().map(run).collect())
}
