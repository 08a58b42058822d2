//! Solve the base case and report totals and the weakest voltages.

use relay_risk::case::SystemTotals;
use relay_risk::config::SolverConfig;
use relay_risk::{solve_power_flow, Network};

fn main() -> relay_risk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case57.m").into());
    let net = Network::load(&path)?;
    let sol = solve_power_flow(&net, &SolverConfig::default())?;
    println!("{} after {} iterations, mismatch {:.2e}", sol.status, sol.iterations, sol.max_mismatch);
    if !sol.is_converged() {
        return Ok(());
    }
    let t = SystemTotals::from_solution(&net, &sol);
    println!("generation {:.2} MW, load {:.2} MW, losses {:.2} MW", t.generation_mw, t.load_mw, t.losses_mw);
    println!("slack unit {:.2} MW", sol.slack_generation_mw);

    let mut low = sol.bus_voltages.clone();
    low.sort_by(|a, b| a.vm.total_cmp(&b.vm));
    for v in low.iter().take(5) {
        println!("  bus {:>4}  {:.4} p.u.  {:>8.3} deg", v.bus, v.vm, v.va.to_degrees());
    }
    Ok(())
}
