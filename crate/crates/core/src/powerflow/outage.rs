//! Component removal and energized-island detection.

use std::collections::{BTreeSet, HashSet};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use crate::case::{BusId, BusKind, ComponentKind, ComponentRef, Network};
use crate::config::SolverConfig;
use crate::error::{Error, Result};

/// A connected group of buses cut off from the slack bus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Island {
    pub buses: Vec<BusId>,
    /// Stranded real demand, MW (negative demand counts with its sign).
    pub load_mw: f64,
    /// Stranded scheduled generation, MW.
    pub generation_mw: f64,
    /// Whether any bus carries load or a producing generator.
    pub stranded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IslandReport {
    /// Energized flag per bus row, i.e. connected to the slack bus.
    pub energized: Vec<bool>,
    /// De-energized islands, ordered by their smallest bus id.
    pub islands: Vec<Island>,
    /// All generation at the reference bus was removed and nothing took over.
    pub slack_lost: bool,
    /// The outage cannot be represented by a steady-state solution.
    pub infeasible: bool,
}

impl IslandReport {
    pub fn is_connected(&self) -> bool {
        self.islands.is_empty()
    }
}

/// Splits the in-service branch graph into the slack island and the rest.
pub fn island_report(net: &Network) -> IslandReport {
    let index = net.bus_index();
    let n = net.buses.len();
    let mut uf = UnionFind::<usize>::new(n);
    for br in net.branches.iter().filter(|b| b.in_service) {
        uf.union(index[&br.from_bus], index[&br.to_bus]);
    }
    let slack_root = uf.find(index[&net.slack_bus().id]);
    let energized: Vec<bool> = (0..n).map(|i| uf.find(i) == slack_root).collect();

    let mut islands: Vec<Island> = Vec::new();
    let mut root_to_island = std::collections::HashMap::new();
    for (i, bus) in net.buses.iter().enumerate() {
        if energized[i] {
            continue;
        }
        let slot = *root_to_island.entry(uf.find(i)).or_insert_with(|| {
            islands.push(Island {
                buses: Vec::new(),
                load_mw: 0.0,
                generation_mw: 0.0,
                stranded: false,
            });
            islands.len() - 1
        });
        let island = &mut islands[slot];
        island.buses.push(bus.id);
        island.load_mw += bus.load_p;
        island.stranded |= bus.has_load();
        for g in net.generators_at(bus.id) {
            island.generation_mw += g.p_out;
            island.stranded |= g.p_out != 0.0;
        }
    }
    for island in &mut islands {
        island.buses.sort_unstable();
    }
    islands.sort_by_key(|isl| isl.buses[0]);

    let infeasible = islands.iter().any(|isl| isl.stranded);
    IslandReport {
        energized,
        islands,
        slack_lost: false,
        infeasible,
    }
}

/// Takes the given components out of service and classifies the resulting
/// topology.
///
/// Removed branches and generators are switched out, removed loads are
/// zeroed. A PV bus left without generators becomes PQ. If the reference
/// bus loses all of its generation the outage is infeasible, unless
/// `promote_slack` is set and another generator can take over.
pub fn apply_outage(
    net: &Network,
    removed: &BTreeSet<ComponentRef>,
    cfg: &SolverConfig,
) -> Result<(Network, IslandReport)> {
    let mut out = net.clone();
    let mut seen = HashSet::new();
    let index = net.bus_index();
    let slack_id = net.slack_bus().id;
    let slack_had_generation = net.generators_at(slack_id).next().is_some();

    for comp in removed {
        comp.check(net)?;
        let entity = match comp.kind {
            ComponentKind::Line | ComponentKind::Transformer => ("branch", comp.entity_id),
            ComponentKind::Generator => ("generator", comp.entity_id),
            ComponentKind::Load => ("load", comp.entity_id),
        };
        if !seen.insert(entity) {
            return Err(Error::Domain(format!(
                "{} {} is removed twice",
                entity.0, entity.1
            )));
        }
        match comp.kind {
            ComponentKind::Line | ComponentKind::Transformer => {
                let br = out
                    .branches
                    .iter_mut()
                    .find(|b| b.id == comp.entity_id)
                    .expect("checked");
                if !br.in_service {
                    return Err(Error::Domain(format!("branch {} is already out of service", br.id)));
                }
                br.in_service = false;
            }
            ComponentKind::Generator => {
                let g = out
                    .generators
                    .iter_mut()
                    .find(|g| g.id == comp.entity_id)
                    .expect("checked");
                if !g.in_service {
                    return Err(Error::Domain(format!("generator {} is already out of service", g.id)));
                }
                g.in_service = false;
            }
            ComponentKind::Load => {
                let bus = &mut out.buses[index[&comp.entity_id]];
                if !bus.has_load() {
                    return Err(Error::Domain(format!("bus {} has no load to remove", bus.id)));
                }
                bus.load_p = 0.0;
                bus.load_q = 0.0;
            }
        }
    }

    let mut slack_lost = false;
    if slack_had_generation && out.generators_at(slack_id).next().is_none() {
        match cfg.promote_slack.then(|| promotion_candidate(&out)).flatten() {
            Some(new_slack) => {
                out.buses[index[&slack_id]].kind = BusKind::PQ;
                out.buses[index[&new_slack]].kind = BusKind::Slack;
            }
            None => slack_lost = true,
        }
    }
    for i in 0..out.buses.len() {
        let id = out.buses[i].id;
        if out.buses[i].kind == BusKind::PV && out.generators_at(id).next().is_none() {
            out.buses[i].kind = BusKind::PQ;
        }
    }

    let mut report = island_report(&out);
    report.slack_lost = slack_lost;
    report.infeasible |= slack_lost;
    Ok((out, report))
}

/// PV bus with the most in-service scheduled generation; lowest id on ties.
fn promotion_candidate(net: &Network) -> Option<BusId> {
    let mut best: Option<(f64, BusId)> = None;
    for bus in net.buses.iter().filter(|b| b.kind == BusKind::PV) {
        let mut gens = net.generators_at(bus.id).peekable();
        if gens.peek().is_none() {
            continue;
        }
        let total: f64 = gens.map(|g| g.p_out).sum();
        if best.is_none_or(|(t, _)| total > t) {
            best = Some((total, bus.id));
        }
    }
    best.map(|(_, id)| id)
}
