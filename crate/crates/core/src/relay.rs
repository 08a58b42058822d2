//! Protective relays per substation and the components each one can open.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::case::{BusId, ComponentKind, ComponentRef, Network};
use crate::config::{BranchTrip, FlowEnd, RelayPolicy};
use crate::error::{Error, Result};
use crate::powerflow::PowerFlowSolution;

/// Relay types, declared in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelayType {
    BusDifferential,
    DirectionalOvercurrent,
    DirectionalDistance,
    UnderFrequency,
    Transformer,
}

impl RelayType {
    pub const ALL: [RelayType; 5] = [
        RelayType::BusDifferential,
        RelayType::DirectionalOvercurrent,
        RelayType::DirectionalDistance,
        RelayType::UnderFrequency,
        RelayType::Transformer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelayType::BusDifferential => "BusDifferential",
            RelayType::DirectionalOvercurrent => "DirectionalOvercurrent",
            RelayType::DirectionalDistance => "DirectionalDistance",
            RelayType::UnderFrequency => "UnderFrequency",
            RelayType::Transformer => "Transformer",
        }
    }

    pub fn abbreviation(self) -> &'static str {
        match self {
            RelayType::BusDifferential => "BD",
            RelayType::DirectionalOvercurrent => "DOC",
            RelayType::DirectionalDistance => "DD",
            RelayType::UnderFrequency => "UF",
            RelayType::Transformer => "TR",
        }
    }
}

impl fmt::Display for RelayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for RelayType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelayType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s) || t.abbreviation().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Domain(format!("unknown relay type {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelayInstance {
    pub substation: BusId,
    pub relay_type: RelayType,
    pub controllability: BTreeSet<ComponentRef>,
    /// What a compromised relay actually opens.
    pub severe_set: BTreeSet<ComponentRef>,
    /// Base-case MW carried by the severe set.
    pub controlled_power_mw: f64,
    pub available: bool,
}

impl RelayInstance {
    pub fn label(&self) -> String {
        format!("{}/{}", self.substation, self.relay_type)
    }
}

/// All relay slots of a network, ordered by substation then relay type.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RelaySet {
    pub relays: Vec<RelayInstance>,
}

impl RelaySet {
    pub fn len(&self) -> usize {
        self.relays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relays.is_empty()
    }

    pub fn available(&self) -> impl Iterator<Item = &RelayInstance> {
        self.relays.iter().filter(|r| r.available)
    }

    /// Relay count K_i per substation, in substation order.
    pub fn per_substation(&self) -> Vec<(BusId, usize)> {
        let mut out: Vec<(BusId, usize)> = Vec::new();
        for r in &self.relays {
            match out.last_mut() {
                Some((bus, k)) if *bus == r.substation => *k += 1,
                _ => out.push((r.substation, 1)),
            }
        }
        out
    }

    pub fn at(&self, substation: BusId) -> impl Iterator<Item = &RelayInstance> {
        self.relays.iter().filter(move |r| r.substation == substation)
    }

    pub fn find(&self, substation: BusId, relay_type: RelayType) -> Option<&RelayInstance> {
        self.at(substation).find(|r| r.relay_type == relay_type)
    }

    pub fn count_by_type(&self, relay_type: RelayType) -> usize {
        self.relays.iter().filter(|r| r.relay_type == relay_type).count()
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Relay types the instantiation rules place at `substation`.
pub fn relay_types_at(net: &Network, substation: BusId) -> Vec<RelayType> {
    let Some(bus) = net.bus(substation) else {
        return Vec::new();
    };
    let branches: Vec<_> = net.incident_branches(substation).collect();
    let has_gen = net.generators_at(substation).next().is_some();
    let has_line = branches.iter().any(|b| !b.is_transformer);
    let has_transformer = branches.iter().any(|b| b.is_transformer);
    let has_load = bus.has_load();

    RelayType::ALL
        .into_iter()
        .filter(|t| match t {
            RelayType::BusDifferential => !branches.is_empty() || has_gen || has_load,
            RelayType::DirectionalOvercurrent => has_gen || has_load,
            RelayType::DirectionalDistance => has_line,
            RelayType::UnderFrequency => has_gen,
            RelayType::Transformer => has_transformer,
        })
        .collect()
}

/// Components relay `relay_type` at `substation` is able to disconnect.
pub fn controllability_set(
    net: &Network,
    substation: BusId,
    relay_type: RelayType,
) -> Result<BTreeSet<ComponentRef>> {
    if !relay_types_at(net, substation).contains(&relay_type) {
        return Err(Error::Domain(format!(
            "no {relay_type} relay at substation {substation}"
        )));
    }
    let branch = |transformer: bool| {
        net.incident_branches(substation)
            .filter(move |b| b.is_transformer == transformer)
            .map(move |b| {
                if transformer {
                    ComponentRef::transformer(b.id, substation)
                } else {
                    ComponentRef::line(b.id, substation)
                }
            })
    };
    let gens = || {
        net.generators_at(substation)
            .map(|g| ComponentRef::generator(g.id, substation))
    };
    let load = || {
        net.bus(substation)
            .filter(|b| b.has_load())
            .map(|_| ComponentRef::load(substation))
    };

    Ok(match relay_type {
        RelayType::BusDifferential => branch(false)
            .chain(branch(true))
            .chain(gens())
            .chain(load())
            .collect(),
        RelayType::DirectionalOvercurrent => gens().chain(load()).collect(),
        RelayType::DirectionalDistance => branch(false).collect(),
        RelayType::UnderFrequency => gens().collect(),
        RelayType::Transformer => branch(true).collect(),
    })
}

/// Base-case real power a component carries, MW, non-negative.
pub fn component_power_mw(
    net: &Network,
    base: &PowerFlowSolution,
    comp: &ComponentRef,
    flow_end: FlowEnd,
) -> f64 {
    match comp.kind {
        ComponentKind::Line | ComponentKind::Transformer => {
            let Some(pos) = net.branches.iter().position(|b| b.id == comp.entity_id) else {
                return 0.0;
            };
            let flow = &base.branch_flows[pos];
            match flow_end {
                FlowEnd::Sending => flow.sending_mw().abs(),
                FlowEnd::Receiving => flow.receiving_mw().abs(),
                FlowEnd::Local => flow
                    .at_bus_mw(comp.substation, net.branches[pos].from_bus)
                    .abs(),
            }
        }
        ComponentKind::Generator => net
            .generators
            .iter()
            .position(|g| g.id == comp.entity_id)
            .map_or(0.0, |i| base.generator_output[i].abs()),
        ComponentKind::Load => net.bus(comp.entity_id).map_or(0.0, |b| b.load_p.abs()),
    }
}

/// Sum of [`component_power_mw`] over a set.
pub fn controlled_power_mw(
    net: &Network,
    base: &PowerFlowSolution,
    set: &BTreeSet<ComponentRef>,
    flow_end: FlowEnd,
) -> f64 {
    set.iter()
        .map(|c| component_power_mw(net, base, c, flow_end))
        .sum()
}

/// Whether a branch carries base-case real power out of `substation`.
fn exports(net: &Network, base: &PowerFlowSolution, comp: &ComponentRef, threshold: f64) -> bool {
    let Some(pos) = net.branches.iter().position(|b| b.id == comp.entity_id) else {
        return false;
    };
    base.branch_flows[pos].at_bus_mw(comp.substation, net.branches[pos].from_bus) > threshold
}

fn severe_set(
    net: &Network,
    base: &PowerFlowSolution,
    relay_type: RelayType,
    controllability: &BTreeSet<ComponentRef>,
    policy: &RelayPolicy,
) -> BTreeSet<ComponentRef> {
    let trip = match relay_type {
        RelayType::DirectionalDistance => policy.distance_trip,
        RelayType::Transformer => policy.transformer_trip,
        _ => BranchTrip::All,
    };
    match trip {
        BranchTrip::All => controllability.clone(),
        BranchTrip::Exporting => controllability
            .iter()
            .filter(|c| exports(net, base, c, policy.zero_flow_mw))
            .copied()
            .collect(),
    }
}

/// Places relays on every substation and resolves their severe sets against
/// the solved base case.
///
/// A relay is unavailable when its severe set is empty, when its substation
/// carries no controlled power at all, or (optionally) when it is a
/// transformer relay at a substation without local injection.
pub fn instantiate_relays(
    net: &Network,
    base: &PowerFlowSolution,
    policy: &RelayPolicy,
    flow_end: FlowEnd,
) -> Result<RelaySet> {
    if !base.is_converged() {
        return Err(Error::BaseCaseInfeasible(format!(
            "power flow {}",
            base.status
        )));
    }
    let mut relays = Vec::new();
    for bus in &net.buses {
        let first = relays.len();
        let has_injection = bus.has_load() || net.generators_at(bus.id).next().is_some();
        for relay_type in relay_types_at(net, bus.id) {
            let controllability = controllability_set(net, bus.id, relay_type)?;
            let severe = severe_set(net, base, relay_type, &controllability, policy);
            let power = controlled_power_mw(net, base, &severe, flow_end);
            let available = !severe.is_empty()
                && !(relay_type == RelayType::Transformer
                    && policy.transformer_requires_injection
                    && !has_injection);
            relays.push(RelayInstance {
                substation: bus.id,
                relay_type,
                controllability,
                severe_set: severe,
                controlled_power_mw: power,
                available,
            });
        }
        let here = &mut relays[first..];
        let total: f64 = here
            .iter()
            .filter(|r| r.available)
            .map(|r| r.controlled_power_mw)
            .sum();
        if total <= policy.zero_flow_mw {
            here.iter_mut().for_each(|r| r.available = false);
        }
    }
    Ok(RelaySet { relays })
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Sizes of the outage spaces a relay inventory spans. Counts serialize as
/// decimal strings since most exceed 64 bits.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioCounts {
    pub substations: usize,
    pub relays: usize,
    /// (substation, K_i, 2^K_i)
    #[serde(serialize_with = "decimal::per_substation")]
    pub per_substation: Vec<(BusId, usize, BigUint)>,
    /// 2^ΣK_i, the product of the per-substation counts.
    #[serde(serialize_with = "decimal::one")]
    pub system: BigUint,
    /// Σ over relays of 2^|C|, the consequences of single-relay compromise.
    /// Unknown when only the inventory shape is given.
    #[serde(serialize_with = "decimal::maybe")]
    pub consequences: Option<BigUint>,
    /// C(relays, k) for k = 1, 2, 3.
    #[serde(serialize_with = "decimal::many")]
    pub relays_choose: [BigUint; 3],
    /// C(substations, k) for k = 1, 2, 3.
    #[serde(serialize_with = "decimal::many")]
    pub substations_choose: [BigUint; 3],
}

mod decimal {
    use num_bigint::BigUint;
    use serde::ser::{SerializeSeq, Serializer};

    use crate::case::BusId;

    pub fn one<S: Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(n)
    }

    pub fn maybe<S: Serializer>(n: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match n {
            Some(n) => s.collect_str(n),
            None => s.serialize_none(),
        }
    }

    pub fn many<S: Serializer>(ns: &[BigUint; 3], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(ns.iter().map(|n| n.to_string()))
    }

    pub fn per_substation<S: Serializer>(rows: &[(BusId, usize, BigUint)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for (bus, k, n) in rows {
            seq.serialize_element(&(bus, k, n.to_string()))?;
        }
        seq.end()
    }
}

/// Scenario-space sizes for an inventory of the given shape.
pub fn counts_for(per_substation: &[(BusId, usize)], controllability_sizes: &[usize]) -> ScenarioCounts {
    let pow2 = |k: usize| BigUint::from(1u32) << k;
    let relays: usize = per_substation.iter().map(|(_, k)| k).sum();
    let s = per_substation.len();
    ScenarioCounts {
        substations: s,
        relays,
        per_substation: per_substation
            .iter()
            .map(|&(bus, k)| (bus, k, pow2(k)))
            .collect(),
        system: pow2(relays),
        consequences: Some(controllability_sizes.iter().map(|&c| pow2(c)).sum()),
        relays_choose: [1, 2, 3].map(|k| binomial(relays, k)),
        substations_choose: [1, 2, 3].map(|k| binomial(s, k)),
    }
}

/// Counts that depend only on how many substations and relays there are.
pub fn counts_for_shape(substations: usize, relays: usize) -> ScenarioCounts {
    ScenarioCounts {
        substations,
        relays,
        per_substation: Vec::new(),
        system: BigUint::from(1u32) << relays,
        consequences: None,
        relays_choose: [1, 2, 3].map(|k| binomial(relays, k)),
        substations_choose: [1, 2, 3].map(|k| binomial(substations, k)),
    }
}

pub fn scenario_counts(relays: &RelaySet) -> ScenarioCounts {
    let sizes: Vec<usize> = relays.relays.iter().map(|r| r.controllability.len()).collect();
    counts_for(&relays.per_substation(), &sizes)
}
