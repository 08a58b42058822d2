//! How large the outage scenario spaces get.

use relay_risk::config::AssessmentConfig;
use relay_risk::relay::{counts_for_shape, instantiate_relays, scenario_counts};
use relay_risk::{solve_power_flow, Network};

fn main() -> relay_risk::Result<()> {
    let shape = counts_for_shape(30, 106);
    println!(
        "30 substations, 106 relays: {} substation triples, {} relay triples",
        shape.substations_choose[2], shape.relays_choose[2]
    );

    for name in ["case30.m", "case118.m", "case300.m"] {
        let path = format!("{}/cases/{name}", env!("CARGO_MANIFEST_DIR"));
        let net = Network::load(&path)?;
        let cfg = AssessmentConfig::default();
        let base = solve_power_flow(&net, &cfg.solver)?;
        let c = scenario_counts(&instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end)?);
        let digits = c.system.to_string().len();
        println!(
            "{name}: {} relays, 2^{} joint states ({digits} digits), {} relay pairs",
            c.relays, c.relays, c.relays_choose[1]
        );
    }
    Ok(())
}
