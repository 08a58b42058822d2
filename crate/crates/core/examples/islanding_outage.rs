//! Open both branches of the 300-bus case's 186th bus row. The bus exports
//! power through a negative load, so cutting it off strands that injection.

use std::collections::BTreeSet;

use relay_risk::config::SolverConfig;
use relay_risk::powerflow::apply_outage;
use relay_risk::{solve_power_flow, ComponentRef, Network};

fn main() -> relay_risk::Result<()> {
    let net = Network::load(concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case300.m"))?;
    let bus = net.bus_at_position(186).expect("row exists");
    println!("bus {} carries {} MW of load", bus.id, bus.load_p);

    let removed: BTreeSet<ComponentRef> = net
        .incident_branches(bus.id)
        .map(|br| ComponentRef::branch(&net, br.id, bus.id))
        .collect::<Result<_, _>>()?;
    let cfg = SolverConfig::default();
    let (reduced, topo) = apply_outage(&net, &removed, &cfg)?;
    for island in &topo.islands {
        println!("island {:?}: load {} MW, stranded {}", island.buses, island.load_mw, island.stranded);
    }
    let sol = solve_power_flow(&reduced, &cfg)?;
    println!("outcome: {}", sol.status);
    Ok(())
}
