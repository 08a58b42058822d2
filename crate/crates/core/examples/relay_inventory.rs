//! Instantiate relays at every substation and show one substation in detail.
//!
//! cargo run --example relay_inventory -- cases/case30.m 6

use relay_risk::config::AssessmentConfig;
use relay_risk::relay::{instantiate_relays, RelayType};
use relay_risk::{solve_power_flow, Network};

fn main() -> relay_risk::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m").into());
    let bus: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(6);

    let net = Network::load(&path)?;
    let cfg = AssessmentConfig::default();
    let base = solve_power_flow(&net, &cfg.solver)?;
    let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end)?;

    println!("{} relay slots, {} available", relays.len(), relays.available().count());
    for t in RelayType::ALL {
        println!("  {:<4}{}", t.abbreviation(), relays.count_by_type(t));
    }
    println!("substation {bus}:");
    for r in relays.at(bus) {
        let set = |s: &std::collections::BTreeSet<relay_risk::ComponentRef>| {
            s.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
        };
        println!("  {} ({:.1} MW{})", r.relay_type, r.controlled_power_mw, if r.available { "" } else { ", unavailable" });
        println!("    controls {}", set(&r.controllability));
        println!("    opens    {}", set(&r.severe_set));
    }
    Ok(())
}
