//! Test-side oracles, written without touching the library's solver, relay
//! rules or scoring code. Only the `Network` data type is shared.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_risk::case::{BusKind, Network};

pub fn case_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("cases").join(name)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load_case(name: &str) -> Network {
    Network::load(case_path(name)).unwrap()
}

pub fn load_fixture(name: &str) -> Network {
    Network::load(fixture_path(name)).unwrap()
}

pub const IEEE: [&str; 5] = ["case30.m", "case39.m", "case57.m", "case118.m", "case300.m"];

type C = Complex64;

fn dense_ybus(net: &Network, on: &[bool]) -> Vec<Vec<C>> {
    let n = net.buses.len();
    let pos = |id| net.buses.iter().position(|b| b.id == id).unwrap();
    let mut y = vec![vec![C::new(0.0, 0.0); n]; n];
    for br in net.branches.iter().filter(|b| b.in_service) {
        let (f, t) = (pos(br.from_bus), pos(br.to_bus));
        if !on[f] || !on[t] {
            continue;
        }
        let ys = C::new(1.0, 0.0) / C::new(br.r, br.x);
        let half = C::new(0.0, br.b / 2.0);
        let a = C::from_polar(br.tap, br.shift_deg.to_radians());
        y[f][f] += (ys + half) / (a.norm() * a.norm());
        y[f][t] -= ys / a.conj();
        y[t][f] -= ys / a;
        y[t][t] += ys + half;
    }
    for (i, b) in net.buses.iter().enumerate() {
        y[i][i] += C::new(b.shunt_g, b.shunt_b) / net.base_power;
    }
    y
}

/// Voltages from Gauss–Seidel on the given energized buses. `None` when the
/// iteration does not settle.
pub fn gauss_seidel(net: &Network, on: &[bool]) -> Option<Vec<C>> {
    let n = net.buses.len();
    let y = dense_ybus(net, on);
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut pv = vec![false; n];
    for (i, b) in net.buses.iter().enumerate() {
        p[i] -= b.load_p / net.base_power;
        q[i] -= b.load_q / net.base_power;
        for g in net.generators.iter().filter(|g| g.in_service && g.bus == b.id) {
            p[i] += g.p_out / net.base_power;
            pv[i] = b.kind == BusKind::PV;
        }
    }
    let mut v: Vec<C> = net
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if !on[i] {
                C::new(0.0, 0.0)
            } else if b.kind == BusKind::Slack || pv[i] {
                C::new(b.voltage_setpoint, 0.0)
            } else {
                C::new(1.0, 0.0)
            }
        })
        .collect();
    for _ in 0..200_000 {
        let mut change: f64 = 0.0;
        for i in 0..n {
            if !on[i] || net.buses[i].kind == BusKind::Slack {
                continue;
            }
            let others: C = (0..n).filter(|&k| k != i).map(|k| y[i][k] * v[k]).sum();
            let mut qi = q[i];
            if pv[i] {
                qi = -(v[i].conj() * (others + y[i][i] * v[i])).im;
            }
            let s = C::new(p[i], qi);
            let mut next = (s.conj() / v[i].conj() - others) / y[i][i];
            if pv[i] {
                next = next / next.norm() * net.buses[i].voltage_setpoint;
            }
            if !next.re.is_finite() || !next.im.is_finite() {
                return None;
            }
            change = change.max((next - v[i]).norm());
            v[i] = next;
        }
        if change < 1e-14 {
            return Some(v);
        }
    }
    None
}

/// Real power entering each end of every branch, MW.
pub fn branch_flows_mw(net: &Network, v: &[C]) -> Vec<(f64, f64)> {
    let pos = |id| net.buses.iter().position(|b| b.id == id).unwrap();
    net.branches
        .iter()
        .map(|br| {
            if !br.in_service {
                return (0.0, 0.0);
            }
            let (vf, vt) = (v[pos(br.from_bus)], v[pos(br.to_bus)]);
            let ys = C::new(1.0, 0.0) / C::new(br.r, br.x);
            let half = C::new(0.0, br.b / 2.0);
            let a = C::from_polar(br.tap, br.shift_deg.to_radians());
            let i_f = (ys + half) / (a.norm() * a.norm()) * vf - ys / a.conj() * vt;
            let i_t = -ys / a * vf + (ys + half) * vt;
            ((vf * i_f.conj()).re * net.base_power, (vt * i_t.conj()).re * net.base_power)
        })
        .collect()
}

/// Buses reachable from the slack bus over in-service branches.
pub fn energized(net: &Network) -> Vec<bool> {
    let n = net.buses.len();
    let pos = |id| net.buses.iter().position(|b| b.id == id).unwrap();
    let slack = net.buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
    let mut seen = vec![false; n];
    seen[slack] = true;
    let mut queue = VecDeque::from([slack]);
    while let Some(i) = queue.pop_front() {
        let id = net.buses[i].id;
        for br in net.branches.iter().filter(|b| b.in_service) {
            let other = if br.from_bus == id {
                br.to_bus
            } else if br.to_bus == id {
                br.from_bus
            } else {
                continue;
            };
            let k = pos(other);
            if !seen[k] {
                seen[k] = true;
                queue.push_back(k);
            }
        }
    }
    seen
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Part {
    Branch(usize),
    Gen(usize),
    Load(usize),
}

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub substation: usize,
    /// Position in the fixed type order BD, DOC, DD, UF, TR.
    pub type_index: usize,
    pub available: bool,
    /// "converged", "diverged" or "islanded"; empty for unavailable rows.
    pub status: &'static str,
    pub controlled_mw: f64,
    pub severe: Vec<Part>,
    pub pr: [f64; 3],
    pub severity: f64,
    pub risk: [f64; 3],
    pub r_avg: f64,
    pub sigma: f64,
}

/// Outcome of taking `parts` out, classified from scratch.
pub fn classify(net: &Network, parts: &[Part], promote: bool) -> &'static str {
    let mut m = net.clone();
    let slack = m.buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
    let slack_id = m.buses[slack].id;
    let had_slack_gen = m.generators.iter().any(|g| g.in_service && g.bus == slack_id);
    for part in parts {
        match *part {
            Part::Branch(i) => m.branches[i].in_service = false,
            Part::Gen(i) => m.generators[i].in_service = false,
            Part::Load(i) => {
                m.buses[i].load_p = 0.0;
                m.buses[i].load_q = 0.0;
            }
        }
    }
    let gen_total = |m: &Network, id: usize| -> Option<f64> {
        let gs: Vec<f64> = m
            .generators
            .iter()
            .filter(|g| g.in_service && g.bus == id)
            .map(|g| g.p_out)
            .collect();
        (!gs.is_empty()).then(|| gs.iter().sum())
    };
    if had_slack_gen && gen_total(&m, slack_id).is_none() {
        if !promote {
            return "islanded";
        }
        let mut best: Option<(f64, usize)> = None;
        for (i, b) in m.buses.iter().enumerate() {
            if b.kind != BusKind::PV {
                continue;
            }
            if let Some(t) = gen_total(&m, b.id) {
                if best.is_none_or(|(bt, _)| t > bt) {
                    best = Some((t, i));
                }
            }
        }
        let Some((_, i)) = best else {
            return "islanded";
        };
        m.buses[slack].kind = BusKind::PQ;
        m.buses[i].kind = BusKind::Slack;
    }
    for i in 0..m.buses.len() {
        if m.buses[i].kind == BusKind::PV && gen_total(&m, m.buses[i].id).is_none() {
            m.buses[i].kind = BusKind::PQ;
        }
    }
    let on = energized(&m);
    for (i, b) in m.buses.iter().enumerate() {
        let producing = m
            .generators
            .iter()
            .any(|g| g.in_service && g.bus == b.id && g.p_out != 0.0);
        if !on[i] && (b.load_p != 0.0 || b.load_q != 0.0 || producing) {
            return "islanded";
        }
    }
    if gauss_seidel(&m, &on).is_some() {
        "converged"
    } else {
        "diverged"
    }
}

/// Every relay slot of `net`, scored by direct evaluation of the rules and
/// formulas.
pub fn brute_force(net: &Network, seed: u64, promote: bool) -> Vec<OracleRow> {
    let on = vec![true; net.buses.len()];
    let v = gauss_seidel(net, &on).expect("base case settles");
    let flows = branch_flows_mw(net, &v);

    // slack output from its bus balance
    let slack = net.buses.iter().position(|b| b.kind == BusKind::Slack).unwrap();
    let slack_id = net.buses[slack].id;
    let mut slack_p = net.buses[slack].load_p;
    for (k, br) in net.branches.iter().enumerate() {
        if br.from_bus == slack_id {
            slack_p += flows[k].0;
        } else if br.to_bus == slack_id {
            slack_p += flows[k].1;
        }
    }
    slack_p += net.buses[slack].shunt_g * v[slack].norm_sqr();
    let mut gen_out: Vec<f64> = net.generators.iter().map(|g| g.p_out).collect();
    if let Some(first) = net.generators.iter().position(|g| g.in_service && g.bus == slack_id) {
        let others: f64 = net
            .generators
            .iter()
            .enumerate()
            .filter(|(k, g)| *k != first && g.in_service && g.bus == slack_id)
            .map(|(_, g)| g.p_out)
            .sum();
        gen_out[first] = slack_p - others;
    }

    let power = |p: &Part| match *p {
        Part::Branch(k) => flows[k].0.max(flows[k].1).abs(),
        Part::Gen(k) => gen_out[k].abs(),
        Part::Load(i) => net.buses[i].load_p.abs(),
    };

    struct Slot {
        bus: usize,
        t: usize,
        severe: Vec<Part>,
        mw: f64,
        available: bool,
    }
    let mut slots: Vec<Slot> = Vec::new();
    for (i, b) in net.buses.iter().enumerate() {
        let mut lines = Vec::new();
        let mut xfmrs = Vec::new();
        let mut out_lines = Vec::new();
        let mut out_xfmrs = Vec::new();
        for (k, br) in net.branches.iter().enumerate() {
            if !br.in_service || (br.from_bus != b.id && br.to_bus != b.id) {
                continue;
            }
            let local = if br.from_bus == b.id { flows[k].0 } else { flows[k].1 };
            let (all, out) = if br.is_transformer {
                (&mut xfmrs, &mut out_xfmrs)
            } else {
                (&mut lines, &mut out_lines)
            };
            all.push(Part::Branch(k));
            if local > 1e-6 {
                out.push(Part::Branch(k));
            }
        }
        let gens: Vec<Part> = net
            .generators
            .iter()
            .enumerate()
            .filter(|(_, g)| g.in_service && g.bus == b.id)
            .map(|(k, _)| Part::Gen(k))
            .collect();
        let load: Vec<Part> = if b.load_p != 0.0 || b.load_q != 0.0 {
            vec![Part::Load(i)]
        } else {
            vec![]
        };
        let mut candidates: Vec<(usize, Option<Vec<Part>>)> = vec![
            (0, {
                let all: Vec<Part> = [&lines[..], &xfmrs[..], &gens[..], &load[..]].concat();
                (!all.is_empty()).then_some(all)
            }),
            (1, (!gens.is_empty() || !load.is_empty()).then(|| [&gens[..], &load[..]].concat())),
            (2, (!lines.is_empty()).then(|| out_lines.clone())),
            (3, (!gens.is_empty()).then(|| gens.clone())),
            (4, (!xfmrs.is_empty()).then(|| out_xfmrs.clone())),
        ];
        let first = slots.len();
        for (t, severe) in candidates.drain(..) {
            if let Some(severe) = severe {
                let mw = severe.iter().map(power).sum();
                let available = !severe.is_empty();
                slots.push(Slot { bus: i, t, severe, mw, available });
            }
        }
        let total: f64 = slots[first..].iter().filter(|s| s.available).map(|s| s.mw).sum();
        if total <= 1e-6 {
            slots[first..].iter_mut().for_each(|s| s.available = false);
        }
    }

    let sub_sum = |bus: usize| -> f64 {
        slots.iter().filter(|s| s.bus == bus && s.available).map(|s| s.mw).sum()
    };
    let system: f64 = (0..net.buses.len()).map(sub_sum).sum();

    let mut rows = Vec::new();
    for bus in 0..net.buses.len() {
        let here: Vec<&Slot> = slots.iter().filter(|s| s.bus == bus).collect();
        let live: Vec<&&Slot> = here.iter().filter(|s| s.available).collect();
        let size_total: usize = live.iter().map(|s| s.severe.len()).sum();
        let k = live.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(net.buses[bus].id as u64);
        let raw: Vec<f64> = (0..k).map(|_| rng.sample(Open01)).collect();
        let raw_sum: f64 = raw.iter().sum();

        let mut j = 0;
        for s in &here {
            let mut row = OracleRow {
                substation: net.buses[bus].id,
                type_index: s.t,
                available: s.available,
                status: "",
                controlled_mw: s.mw,
                severe: s.severe.clone(),
                pr: [-1.0; 3],
                severity: -1.0,
                risk: [-1.0; 3],
                r_avg: -1.0,
                sigma: -1.0,
            };
            if s.available {
                let status = classify(net, &s.severe, promote);
                let pr = [
                    s.severe.len() as f64 / size_total as f64,
                    raw[j] / raw_sum,
                    1.0 / k as f64,
                ];
                let sum_i = sub_sum(bus);
                let sr = if status == "converged" { s.mw / sum_i } else { system / sum_i };
                let risk = if status == "converged" {
                    pr.map(|p| p * sr)
                } else {
                    [1.0; 3]
                };
                let mean = risk.iter().sum::<f64>() / 3.0;
                let var = risk.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / 3.0;
                row.status = status;
                row.pr = pr;
                row.severity = sr;
                row.risk = risk;
                row.r_avg = mean;
                row.sigma = var.sqrt();
                j += 1;
            }
            rows.push(row);
        }
    }
    rows
}
