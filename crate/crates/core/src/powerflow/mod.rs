//! Steady-state AC power flow.
//!
//! [`solve_power_flow`] solves the island that holds the slack bus with a
//! flat-start Newton–Raphson. Buses outside that island are de-energized;
//! if any of them carries load or producing generation the case is reported
//! as [`PowerFlowStatus::IslandedInfeasible`] without iterating.

mod admittance;
mod newton;
mod outage;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::case::{BusId, BusKind, Network};
use crate::config::SolverConfig;
use crate::error::Result;

pub use outage::{apply_outage, island_report, Island, IslandReport};

use admittance::{BranchAdmittance, Ybus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerFlowStatus {
    Converged,
    Diverged,
    #[serde(rename = "islanded")]
    IslandedInfeasible,
}

impl PowerFlowStatus {
    pub fn is_converged(self) -> bool {
        self == PowerFlowStatus::Converged
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PowerFlowStatus::Converged => "converged",
            PowerFlowStatus::Diverged => "diverged",
            PowerFlowStatus::IslandedInfeasible => "islanded",
        }
    }
}

impl fmt::Display for PowerFlowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BusVoltage {
    pub bus: BusId,
    /// Magnitude, p.u.
    pub vm: f64,
    /// Angle, radians.
    pub va: f64,
}

/// Branch end flows in MW / MVAr, positive into the branch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct BranchFlow {
    pub branch: usize,
    pub p_from: f64,
    pub q_from: f64,
    pub p_to: f64,
    pub q_to: f64,
}

impl BranchFlow {
    pub fn losses_mw(&self) -> f64 {
        self.p_from + self.p_to
    }

    /// Real power at the end where it enters the branch.
    pub fn sending_mw(&self) -> f64 {
        self.p_from.max(self.p_to)
    }

    /// Real power at the end where it leaves the branch (negative or zero).
    pub fn receiving_mw(&self) -> f64 {
        self.p_from.min(self.p_to)
    }

    /// Real power entering the branch at `bus`.
    pub fn at_bus_mw(&self, bus: BusId, from_bus: BusId) -> f64 {
        if bus == from_bus {
            self.p_from
        } else {
            self.p_to
        }
    }
}

/// Result of one power-flow run. Vectors are aligned with the network's bus,
/// branch and generator lists; de-energized entries are zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFlowSolution {
    pub status: PowerFlowStatus,
    pub bus_voltages: Vec<BusVoltage>,
    pub branch_flows: Vec<BranchFlow>,
    /// Net real injection per bus (generation minus load), MW.
    pub bus_injections: Vec<f64>,
    /// Real output per generator, MW. The slack units absorb the balance.
    pub generator_output: Vec<f64>,
    /// Total real output at the reference bus, MW, whether or not it hosts
    /// generator records.
    pub slack_generation_mw: f64,
    pub iterations: usize,
    /// Largest remaining mismatch, p.u.
    pub max_mismatch: f64,
}

impl PowerFlowSolution {
    fn not_solved(net: &Network, status: PowerFlowStatus, iterations: usize, max_mismatch: f64) -> Self {
        Self {
            status,
            bus_voltages: net
                .buses
                .iter()
                .map(|b| BusVoltage {
                    bus: b.id,
                    vm: 0.0,
                    va: 0.0,
                })
                .collect(),
            branch_flows: net
                .branches
                .iter()
                .map(|br| BranchFlow {
                    branch: br.id,
                    ..BranchFlow::default()
                })
                .collect(),
            bus_injections: vec![0.0; net.buses.len()],
            generator_output: vec![0.0; net.generators.len()],
            slack_generation_mw: 0.0,
            iterations,
            max_mismatch,
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status.is_converged()
    }

    /// Total real generation, MW, including an unattributed slack source.
    pub fn total_generation_mw(&self, net: &Network) -> f64 {
        let attributed: f64 = self.generator_output.iter().sum();
        let slack = net.slack_bus().id;
        if net.generators_at(slack).next().is_none() {
            attributed + self.slack_generation_mw
        } else {
            attributed
        }
    }

    /// Series and shunt real losses, MW.
    pub fn losses_mw(&self, net: &Network) -> f64 {
        let series: f64 = self.branch_flows.iter().map(BranchFlow::losses_mw).sum();
        let shunt: f64 = net
            .buses
            .iter()
            .zip(&self.bus_voltages)
            .map(|(b, v)| b.shunt_g * v.vm * v.vm)
            .sum();
        series + shunt
    }
}

/// Solves the network as given. Structural problems surface as errors;
/// numerical failure is reported through the status.
pub fn solve_power_flow(net: &Network, cfg: &SolverConfig) -> Result<PowerFlowSolution> {
    net.validate()?;
    let topo = island_report(net);
    if topo.infeasible {
        return Ok(PowerFlowSolution::not_solved(
            net,
            PowerFlowStatus::IslandedInfeasible,
            0,
            f64::INFINITY,
        ));
    }
    Ok(solve_energized(net, &topo.energized, cfg))
}

/// Per-bus data for the energized set, in local (matrix) numbering.
struct Local {
    /// local index per bus row
    local: Vec<Option<usize>>,
    /// bus row per local index
    rows: Vec<usize>,
}

fn solve_energized(net: &Network, energized: &[bool], cfg: &SolverConfig) -> PowerFlowSolution {
    let mut loc = Local {
        local: vec![None; net.buses.len()],
        rows: Vec::new(),
    };
    for (i, &on) in energized.iter().enumerate() {
        if on {
            loc.local[i] = Some(loc.rows.len());
            loc.rows.push(i);
        }
    }
    let n = loc.rows.len();
    let base = net.base_power;
    let ybus = Ybus::build(net, &loc.local, n);

    let mut s_sched = vec![Complex64::new(0.0, 0.0); n];
    let mut v0 = vec![Complex64::new(1.0, 0.0); n];
    let mut kind = vec![BusKind::PQ; n];
    let mut q_limits = vec![(0.0, 0.0); n];
    for (k, &row) in loc.rows.iter().enumerate() {
        let bus = &net.buses[row];
        s_sched[k] = Complex64::new(-bus.load_p, -bus.load_q) / base;
        let mut has_gen = false;
        for g in net.generators_at(bus.id) {
            has_gen = true;
            s_sched[k] += Complex64::new(g.p_out, 0.0) / base;
            q_limits[k].0 += g.q_limits.0;
            q_limits[k].1 += g.q_limits.1;
        }
        kind[k] = match bus.kind {
            BusKind::Slack => BusKind::Slack,
            BusKind::PV if has_gen => BusKind::PV,
            _ => BusKind::PQ,
        };
        if kind[k] != BusKind::PQ {
            v0[k] = Complex64::new(bus.voltage_setpoint, 0.0);
        }
    }

    let mut total_iterations = 0;
    let mut v = v0;
    // PV buses switched to PQ at a reactive limit
    let mut switched = vec![false; n];
    let outcome = loop {
        let pv: Vec<usize> = (0..n).filter(|&k| kind[k] == BusKind::PV).collect();
        let pq: Vec<usize> = (0..n).filter(|&k| kind[k] == BusKind::PQ).collect();
        let out = newton::solve(
            &ybus,
            &s_sched,
            v,
            &pv,
            &pq,
            cfg.tolerance,
            cfg.max_iterations.saturating_sub(total_iterations),
        );
        total_iterations += out.iterations;
        if !out.converged || !cfg.enforce_q_limits {
            break out;
        }
        let current = ybus.mul(&out.v);
        let mut violated = false;
        for &k in &pv {
            let bus = &net.buses[loc.rows[k]];
            let q_gen = (out.v[k] * current[k].conj()).im * base + bus.load_q;
            let (q_min, q_max) = q_limits[k];
            let limit = if q_gen > q_max {
                Some(q_max)
            } else if q_gen < q_min {
                Some(q_min)
            } else {
                None
            };
            if let Some(q) = limit {
                kind[k] = BusKind::PQ;
                switched[k] = true;
                s_sched[k].im = (q - bus.load_q) / base;
                violated = true;
            }
        }
        if !violated {
            break out;
        }
        v = out.v;
    };

    if !outcome.converged {
        return PowerFlowSolution::not_solved(
            net,
            PowerFlowStatus::Diverged,
            total_iterations,
            outcome.max_mismatch,
        );
    }
    assemble(net, &loc, &ybus, &outcome.v, total_iterations, outcome.max_mismatch)
}

fn assemble(
    net: &Network,
    loc: &Local,
    ybus: &Ybus,
    v: &[Complex64],
    iterations: usize,
    max_mismatch: f64,
) -> PowerFlowSolution {
    let base = net.base_power;
    let mut full = vec![Complex64::new(0.0, 0.0); net.buses.len()];
    for (k, &row) in loc.rows.iter().enumerate() {
        full[row] = v[k];
    }
    let current = ybus.mul(v);
    let mut injections = vec![0.0; net.buses.len()];
    for (k, &row) in loc.rows.iter().enumerate() {
        injections[row] = (v[k] * current[k].conj()).re * base;
    }

    let index = net.bus_index();
    let slack = net.slack_bus();
    let slack_row = index[&slack.id];
    let slack_generation = injections[slack_row] + slack.load_p;

    let mut generator_output = vec![0.0; net.generators.len()];
    let mut slack_units = Vec::new();
    for (gi, g) in net.generators.iter().enumerate() {
        if !g.in_service || loc.local[index[&g.bus]].is_none() {
            continue;
        }
        if g.bus == slack.id {
            slack_units.push(gi);
        } else {
            generator_output[gi] = g.p_out;
        }
    }
    if let Some((&first, rest)) = slack_units.split_first() {
        let others: f64 = rest.iter().map(|&gi| net.generators[gi].p_out).sum();
        for &gi in rest {
            generator_output[gi] = net.generators[gi].p_out;
        }
        generator_output[first] = slack_generation - others;
    }

    let branch_flows = net
        .branches
        .iter()
        .map(|br| {
            let f = index[&br.from_bus];
            let t = index[&br.to_bus];
            if !br.in_service || loc.local[f].is_none() {
                return BranchFlow {
                    branch: br.id,
                    ..BranchFlow::default()
                };
            }
            let y = BranchAdmittance::of(br);
            let (vf, vt) = (full[f], full[t]);
            let sf = vf * (y.ff * vf + y.ft * vt).conj() * base;
            let st = vt * (y.tf * vf + y.tt * vt).conj() * base;
            BranchFlow {
                branch: br.id,
                p_from: sf.re,
                q_from: sf.im,
                p_to: st.re,
                q_to: st.im,
            }
        })
        .collect();

    PowerFlowSolution {
        status: PowerFlowStatus::Converged,
        bus_voltages: net
            .buses
            .iter()
            .zip(&full)
            .map(|(b, v)| BusVoltage {
                bus: b.id,
                vm: v.norm(),
                va: if v.norm() == 0.0 { 0.0 } else { v.arg() },
            })
            .collect(),
        branch_flows,
        bus_injections: injections,
        generator_output,
        slack_generation_mw: slack_generation,
        iterations,
        max_mismatch,
    }
}
