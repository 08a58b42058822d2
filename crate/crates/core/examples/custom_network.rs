//! Build a four-bus network in code, save it as JSON and assess it.

use relay_risk::case::{Branch, Bus, BusKind, Generator};
use relay_risk::config::AssessmentConfig;
use relay_risk::report::{assess_network, write_csv};
use relay_risk::Network;

fn bus(id: usize, kind: BusKind, load_p: f64) -> Bus {
    Bus {
        id,
        kind,
        load_p,
        load_q: load_p * 0.3,
        voltage_setpoint: 1.02,
        shunt_g: 0.0,
        shunt_b: 0.0,
    }
}

fn line(id: usize, from_bus: usize, to_bus: usize, x: f64) -> Branch {
    Branch {
        id,
        from_bus,
        to_bus,
        r: x / 8.0,
        x,
        b: 0.02,
        tap: 1.0,
        shift_deg: 0.0,
        is_transformer: false,
        in_service: true,
    }
}

fn main() -> relay_risk::Result<()> {
    let net = Network::new(
        100.0,
        vec![
            bus(1, BusKind::Slack, 0.0),
            bus(2, BusKind::PV, 20.0),
            bus(3, BusKind::PQ, 80.0),
            bus(4, BusKind::PQ, 40.0),
        ],
        vec![line(1, 1, 2, 0.06), line(2, 1, 3, 0.08), line(3, 2, 3, 0.05), line(4, 3, 4, 0.04), line(5, 2, 4, 0.07)],
        vec![
            Generator { id: 1, bus: 1, p_out: 0.0, q_limits: (-100.0, 100.0), in_service: true },
            Generator { id: 2, bus: 2, p_out: 60.0, q_limits: (-40.0, 40.0), in_service: true },
        ],
    )?;
    let path = std::env::temp_dir().join("four_bus.json");
    std::fs::write(&path, net.to_json_string()?).map_err(|e| relay_risk::Error::io(&path, e))?;
    println!("saved {}", path.display());

    let report = assess_network(&net, "four_bus", &AssessmentConfig::default(), None)?;
    write_csv(&report, std::io::stdout().lock())
}
