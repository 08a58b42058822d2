mod common;

use std::collections::BTreeSet;

use common::{branch_flows_mw, gauss_seidel, load_case, load_fixture};
use num_complex::Complex64;
use proptest::prelude::*;
use relay_risk::case::{ComponentRef, Network};
use relay_risk::config::SolverConfig;
use relay_risk::powerflow::{apply_outage, solve_power_flow, PowerFlowSolution, PowerFlowStatus};

fn assert_matches_oracle(net: &Network, sol: &PowerFlowSolution) {
    let on: Vec<bool> = sol.bus_voltages.iter().map(|v| v.vm > 0.0).collect();
    let v = gauss_seidel(net, &on).expect("oracle settles");
    for (got, want) in sol.bus_voltages.iter().zip(&v) {
        let bus = got.bus;
        let got = Complex64::from_polar(got.vm, got.va);
        assert!((got - want).norm() < 1e-6, "bus {bus}: {got} vs {want}");
    }
    for (got, want) in sol.branch_flows.iter().zip(branch_flows_mw(net, &v)) {
        assert!((got.p_from - want.0).abs() < 1e-4);
        assert!((got.p_to - want.1).abs() < 1e-4);
    }
}

#[test]
fn toy_fixtures_match_gauss_seidel() {
    for name in ["toy3.json", "toy3_feasible.json"] {
        let net = load_fixture(name);
        let sol = solve_power_flow(&net, &SolverConfig::default()).unwrap();
        assert!(sol.is_converged(), "{name}");
        assert_matches_oracle(&net, &sol);
    }
}

#[test]
fn parallel_branch_outage_redistributes() {
    // toy3_feasible has two branches between buses 1 and 3: transformer 1 and line 4
    let net = load_fixture("toy3_feasible.json");
    let cfg = SolverConfig::default();
    let before = solve_power_flow(&net, &cfg).unwrap();
    let removed = BTreeSet::from([ComponentRef::line(4, 1)]);
    let (reduced, topo) = apply_outage(&net, &removed, &cfg).unwrap();
    assert!(topo.is_connected());
    let after = solve_power_flow(&reduced, &cfg).unwrap();
    assert!(after.is_converged());
    assert_eq!(after.branch_flows[3].p_from, 0.0);
    assert!(after.branch_flows[0].p_from > before.branch_flows[0].p_from);
    assert_matches_oracle(&reduced, &after);
}

#[test]
fn ieee30_matches_gauss_seidel() {
    let net = load_case("case30.m");
    let sol = solve_power_flow(&net, &SolverConfig::default()).unwrap();
    assert_matches_oracle(&net, &sol);
}

#[test]
fn base_cases_converge_with_small_mismatch() {
    let cfg = SolverConfig::default();
    for name in common::IEEE {
        let net = load_case(name);
        let sol = solve_power_flow(&net, &cfg).unwrap();
        assert_eq!(sol.status, PowerFlowStatus::Converged, "{name}");
        assert!(sol.max_mismatch <= cfg.tolerance);
        assert!(sol.iterations <= cfg.max_iterations);
    }
}

#[test]
fn injections_reproduce_schedule() {
    let net = load_case("case57.m");
    let cfg = SolverConfig::default();
    let sol = solve_power_flow(&net, &cfg).unwrap();
    let slack = net.slack_bus().id;
    for (i, bus) in net.buses.iter().enumerate() {
        if bus.id == slack {
            continue;
        }
        let scheduled: f64 = net.generators_at(bus.id).map(|g| g.p_out).sum::<f64>() - bus.load_p;
        // recompute from branch flows and shunt draw
        let through: f64 = net
            .branches
            .iter()
            .zip(&sol.branch_flows)
            .filter(|(br, _)| br.connects(bus.id))
            .map(|(br, f)| if br.from_bus == bus.id { f.p_from } else { f.p_to })
            .sum();
        let shunt = bus.shunt_g * sol.bus_voltages[i].vm.powi(2);
        assert!((through + shunt - scheduled).abs() < cfg.tolerance * net.base_power * 10.0, "bus {}", bus.id);
        assert!((sol.bus_injections[i] - scheduled).abs() < cfg.tolerance * net.base_power * 10.0);
    }
}

#[test]
fn repeated_solves_are_bit_identical() {
    let net = load_case("case118.m");
    let a = solve_power_flow(&net, &SolverConfig::default()).unwrap();
    let b = solve_power_flow(&net, &SolverConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ieee300_negative_load_bus_islands() {
    // the 186th bus row, reached by branches from rows 93 and 185
    let net = load_case("case300.m");
    let bus = net.bus_at_position(186).unwrap();
    assert_eq!(bus.load_p, -21.0);
    let a = net.bus_at_position(93).unwrap().id;
    let b = net.bus_at_position(185).unwrap().id;
    let removed: BTreeSet<ComponentRef> = [a, b]
        .into_iter()
        .map(|other| {
            let br = net.find_branch(other, bus.id).unwrap();
            ComponentRef::branch(&net, br.id, bus.id).unwrap()
        })
        .collect();
    assert_eq!(removed.len(), 2);
    let (reduced, topo) = apply_outage(&net, &removed, &SolverConfig::default()).unwrap();
    assert!(topo.infeasible);
    assert_eq!(topo.islands.len(), 1);
    assert_eq!(topo.islands[0].buses, vec![bus.id]);
    assert_eq!(topo.islands[0].load_mw, -21.0);
    let sol = solve_power_flow(&reduced, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, PowerFlowStatus::IslandedInfeasible);
}

#[test]
fn diverged_base_case_reports_status() {
    let net = load_fixture("infeasible.json");
    let sol = solve_power_flow(&net, &SolverConfig::default()).unwrap();
    assert_eq!(sol.status, PowerFlowStatus::Diverged);
}

#[test]
fn q_limit_enforcement_still_converges() {
    let net = load_case("case30.m");
    let cfg = SolverConfig {
        enforce_q_limits: true,
        ..SolverConfig::default()
    };
    let free = solve_power_flow(&net, &SolverConfig::default()).unwrap();
    let limited = solve_power_flow(&net, &cfg).unwrap();
    assert!(limited.is_converged());
    assert!(limited.iterations >= free.iterations);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn isolated_bus_is_deenergized(row in 0usize..30) {
        let net = load_case("case30.m");
        let bus = net.buses[row].id;
        let removed: BTreeSet<ComponentRef> = net
            .incident_branches(bus)
            .map(|br| ComponentRef::branch(&net, br.id, bus).unwrap())
            .collect();
        let (_, topo) = apply_outage(&net, &removed, &SolverConfig::default()).unwrap();
        if bus == net.slack_bus().id {
            prop_assert!(topo.energized[row]);
            prop_assert!(topo.energized.iter().filter(|&&e| e).count() == 1);
        } else {
            prop_assert!(!topo.energized[row]);
        }
    }

    #[test]
    fn converged_outages_conserve_power(branch in 0usize..41) {
        let net = load_case("case30.m");
        let br = &net.branches[branch];
        let removed = BTreeSet::from([ComponentRef::branch(&net, br.id, br.from_bus).unwrap()]);
        let cfg = SolverConfig::default();
        let (reduced, topo) = apply_outage(&net, &removed, &cfg).unwrap();
        let sol = solve_power_flow(&reduced, &cfg).unwrap();
        prop_assert_eq!(topo.infeasible, sol.status == PowerFlowStatus::IslandedInfeasible);
        if sol.is_converged() {
            let load: f64 = reduced.buses.iter().map(|b| b.load_p).sum();
            let gap = sol.total_generation_mw(&reduced) - load - sol.losses_mw(&reduced);
            prop_assert!(gap.abs() < 10.0 * cfg.tolerance * reduced.base_power * 30.0);
        }
    }
}
