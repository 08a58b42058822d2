//! Parse a MATPOWER case and print what it contains.
//!
//! cargo run --example load_case -- cases/case39.m

use relay_risk::Network;

fn main() -> relay_risk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m").into());
    let net = Network::load(&path)?;
    let s = net.summary();
    println!("{path}");
    println!("  buses        {}", s.buses);
    println!("  branches     {} ({} transformers)", s.branches, s.transformers);
    println!("  generators   {} on {} buses", s.generators, s.generator_buses);
    println!("  loads        {}", s.loads);
    println!("  load         {:.1} MW", s.total_load_mw);
    println!("  scheduled    {:.1} MW", s.scheduled_generation_mw);
    println!("  slack bus    {}", net.slack_bus().id);
    Ok(())
}
