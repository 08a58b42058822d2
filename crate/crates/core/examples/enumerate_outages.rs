//! Simulate every single-relay compromise and tally the power-flow outcomes.

use std::collections::BTreeMap;

use relay_risk::config::AssessmentConfig;
use relay_risk::engine::enumerate_all;
use relay_risk::relay::instantiate_relays;
use relay_risk::{solve_power_flow, Network};

fn main() -> relay_risk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case118.m").into());
    let net = Network::load(&path)?;
    let cfg = AssessmentConfig { workers: 0, ..AssessmentConfig::default() };
    let base = solve_power_flow(&net, &cfg.solver)?;
    let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end)?;

    let start = std::time::Instant::now();
    let outcomes = enumerate_all(&net, &base, &relays, &cfg, None)?;
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &outcomes {
        *tally.entry(o.status.map_or("unavailable", |s| s.as_str())).or_default() += 1;
    }
    println!("{} scenarios in {:.2?}", outcomes.len(), start.elapsed());
    for (status, n) in tally {
        println!("  {status:<12}{n}");
    }
    Ok(())
}
