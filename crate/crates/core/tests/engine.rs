mod common;

use common::{brute_force, load_case, load_fixture, OracleRow};
use relay_risk::case::{Bus, BusKind, Network};
use relay_risk::config::AssessmentConfig;
use relay_risk::engine::{enumerate_all, evaluate_scenario, OutageScenario};
use relay_risk::powerflow::{solve_power_flow, PowerFlowStatus};
use relay_risk::relay::{instantiate_relays, RelayType};
use relay_risk::report::assess_network;
use relay_risk::risk::RiskRecord;

fn status_name(s: Option<PowerFlowStatus>) -> &'static str {
    s.map_or("", |s| s.as_str())
}

fn compare(rows: &[RiskRecord], oracle: &[OracleRow]) {
    assert_eq!(rows.len(), oracle.len());
    for (r, o) in rows.iter().zip(oracle) {
        let at = format!("{}/{}", r.substation, r.relay_type);
        assert_eq!(r.substation, o.substation, "{at}");
        assert_eq!(RelayType::ALL[o.type_index], r.relay_type, "{at}");
        assert_eq!(r.available, o.available, "{at}");
        assert_eq!(status_name(r.status), o.status, "{at}");
        assert_eq!(r.severe_size, o.severe.len(), "{at}");
        let close = |a: f64, b: f64, what: &str| assert!((a - b).abs() < 1e-6, "{at} {what}: {a} vs {b}");
        close(r.controlled_power_mw, o.controlled_mw, "power");
        close(r.pr_connectivity, o.pr[0], "pr_C");
        close(r.pr_random, o.pr[1], "pr_R");
        close(r.pr_equal, o.pr[2], "pr_E");
        close(r.severity, o.severity, "severity");
        close(r.r_connectivity, o.risk[0], "R_C");
        close(r.r_random, o.risk[1], "R_R");
        close(r.r_equal, o.risk[2], "R_E");
        close(r.r_average, o.r_avg, "R_A");
        close(r.sigma, o.sigma, "sigma");
    }
}

#[test]
fn toy_matches_brute_force() {
    let net = load_fixture("toy3.json");
    let cfg = AssessmentConfig::default();
    let report = assess_network(&net, "toy3", &cfg, None).unwrap();
    compare(&report.rows, &brute_force(&net, cfg.seed, false));
}

#[test]
fn feasible_toy_matches_brute_force() {
    let net = load_fixture("toy3_feasible.json");
    let cfg = AssessmentConfig::from_file(common::fixture_path("toy3_feasible.toml")).unwrap();
    let report = assess_network(&net, "toy3_feasible", &cfg, None).unwrap();
    let oracle = brute_force(&net, cfg.seed, true);
    compare(&report.rows, &oracle);
    assert!(oracle.iter().all(|o| !o.available || o.status == "converged"));
    assert!(report.critical.is_empty());
}

#[test]
fn ieee30_matches_brute_force() {
    let net = load_case("case30.m");
    let cfg = AssessmentConfig { seed: 7, ..AssessmentConfig::default() };
    let report = assess_network(&net, "case30", &cfg, None).unwrap();
    compare(&report.rows, &brute_force(&net, cfg.seed, false));
}

#[test]
fn single_relay_network() {
    // a lone slack bus with a local load holds a bus differential and an
    // overcurrent relay
    let net = Network::new(
        100.0,
        vec![Bus {
            id: 1,
            kind: BusKind::Slack,
            load_p: 5.0,
            load_q: 0.0,
            voltage_setpoint: 1.0,
            shunt_g: 0.0,
            shunt_b: 0.0,
        }],
        vec![],
        vec![],
    )
    .unwrap();
    let cfg = AssessmentConfig::default();
    let base = solve_power_flow(&net, &cfg.solver).unwrap();
    let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end).unwrap();
    assert_eq!(relays.len(), 2);
    let mut only_bd = relays.clone();
    only_bd.relays.truncate(1);
    let out = enumerate_all(&net, &base, &only_bd, &cfg, None).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].status, Some(PowerFlowStatus::Converged));
    assert_eq!(out[0].controlled_power_mw, 5.0);
}

#[test]
fn zero_power_components_still_converge() {
    // the 30-bus stub at bus 11 carries no real power
    let net = load_case("case30.m");
    let cfg = AssessmentConfig::default();
    let base = solve_power_flow(&net, &cfg.solver).unwrap();
    let mut relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end).unwrap();
    let bd = relays
        .relays
        .iter_mut()
        .find(|r| r.substation == 11 && r.relay_type == RelayType::BusDifferential)
        .unwrap();
    assert!(!bd.available);
    bd.available = true;
    let out = evaluate_scenario(&net, &base, &OutageScenario::for_relay(bd).unwrap(), &cfg).unwrap();
    assert!(out.controlled_power_mw < 1e-6);
    assert_eq!(out.status, Some(PowerFlowStatus::Converged));
}

#[test]
fn coverage_and_dominance() {
    for name in common::IEEE {
        let net = load_case(name);
        let cfg = AssessmentConfig::default();
        let base = solve_power_flow(&net, &cfg.solver).unwrap();
        let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end).unwrap();
        let out = enumerate_all(&net, &base, &relays, &cfg, None).unwrap();
        assert_eq!(out.len(), relays.len());
        for (o, r) in out.iter().zip(&relays.relays) {
            assert_eq!((o.substation, o.relay_type, o.available), (r.substation, r.relay_type, r.available));
            assert_eq!(o.status.is_some(), r.available);
        }
        for r in relays.available() {
            let bd = relays.find(r.substation, RelayType::BusDifferential).unwrap();
            assert!(r.severe_set.is_subset(&bd.severe_set));
        }
    }
}

#[test]
fn worker_count_does_not_change_outcomes() {
    let net = load_case("case57.m");
    let cfg = AssessmentConfig::default();
    let base = solve_power_flow(&net, &cfg.solver).unwrap();
    let relays = instantiate_relays(&net, &base, &cfg.relays, cfg.flow_end).unwrap();
    let serial = enumerate_all(&net, &base, &relays, &cfg, None).unwrap();
    for workers in [2, 8] {
        let par = AssessmentConfig { workers, ..cfg.clone() };
        assert_eq!(serial, enumerate_all(&net, &base, &relays, &par, None).unwrap());
    }
}
