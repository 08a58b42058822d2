//! Reader and writer for MATPOWER version-2 case files.
//!
//! Only `mpc.baseMVA`, `mpc.bus`, `mpc.gen` and `mpc.branch` are read; other
//! matrices (`gencost`, `areas`, ...) and cell arrays are skipped.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Branch, Bus, BusKind, Generator, Network};
use crate::error::{Error, Result};

const BUS_MIN_COLS: usize = 9;
const GEN_MIN_COLS: usize = 8;
const BRANCH_MIN_COLS: usize = 11;

struct Row {
    line: usize,
    values: Vec<f64>,
}

/// Strips a `%` comment, ignoring `%` inside single-quoted strings.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    for (i, c) in line.char_indices() {
        match c {
            '\'' => in_str = !in_str,
            '%' if !in_str => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("invalid number '{tok}'"))),
    }
}

/// name -> (line, value)
type Scalars = HashMap<String, (usize, f64)>;

/// Splits a MATPOWER source into its named matrices and scalar assignments.
fn scan(text: &str) -> Result<(Scalars, HashMap<String, Vec<Row>>)> {
    let mut scalars = HashMap::new();
    let mut matrices: HashMap<String, Vec<Row>> = HashMap::new();

    // (name, opening line, rows) of the matrix being read
    let mut open: Option<(String, usize, Vec<Row>)> = None;
    let mut in_cell = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut line = strip_comment(raw).trim();

        if in_cell {
            if line.contains('}') {
                in_cell = false;
            }
            continue;
        }

        if open.is_none() {
            if line.is_empty() || line.starts_with("function") {
                continue;
            }
            let Some((lhs, rhs)) = line.split_once('=') else {
                continue;
            };
            let name = lhs.trim();
            let Some(field) = name.strip_prefix("mpc.") else {
                continue;
            };
            let rhs = rhs.trim();
            if rhs.starts_with('{') {
                in_cell = !rhs.contains('}');
                continue;
            }
            if let Some(rest) = rhs.strip_prefix('[') {
                open = Some((field.to_string(), line_no, Vec::new()));
                line = rest.trim();
            } else {
                let value = rhs.trim_end_matches(';').trim();
                if value.starts_with('\'') {
                    continue;
                }
                scalars.insert(field.to_string(), (line_no, parse_number(value, line_no)?));
                continue;
            }
        }

        let (_, _, rows) = open.as_mut().expect("matrix is open");
        let (body, closed) = match line.find(']') {
            Some(pos) => (&line[..pos], true),
            None => (line, false),
        };
        for chunk in body.split(';') {
            let values = chunk
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| parse_number(t, line_no))
                .collect::<Result<Vec<_>>>()?;
            if !values.is_empty() {
                rows.push(Row {
                    line: line_no,
                    values,
                });
            }
        }
        if closed {
            let (name, _, rows) = open.take().expect("matrix is open");
            matrices.insert(name, rows);
        }
    }

    if let Some((name, line, _)) = open {
        return Err(Error::parse(line, format!("matrix mpc.{name} is never closed")));
    }
    Ok((scalars, matrices))
}

fn as_id(v: f64, line: usize, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < usize::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::parse(line, format!("{what} must be a non-negative integer, got {v}")))
    }
}

fn check_width(row: &Row, min: usize, table: &str) -> Result<()> {
    if row.values.len() < min {
        return Err(Error::parse(
            row.line,
            format!(
                "{table} row has {} columns, expected at least {min}",
                row.values.len()
            ),
        ));
    }
    Ok(())
}

/// Parses MATPOWER case text into a validated [`Network`].
pub fn parse_matpower(text: &str) -> Result<Network> {
    let (scalars, mut matrices) = scan(text)?;

    let base_power = scalars.get("baseMVA").map_or(100.0, |&(_, v)| v);
    let bus_rows = matrices.remove("bus").unwrap_or_default();
    let gen_rows = matrices.remove("gen").unwrap_or_default();
    let branch_rows = matrices.remove("branch").unwrap_or_default();

    let mut generators = Vec::with_capacity(gen_rows.len());
    for (i, row) in gen_rows.iter().enumerate() {
        check_width(row, GEN_MIN_COLS, "gen")?;
        let v = &row.values;
        generators.push(Generator {
            id: i + 1,
            bus: as_id(v[0], row.line, "generator bus")?,
            p_out: v[1],
            q_limits: (v[4], v[3]),
            in_service: v[7] > 0.0,
        });
    }

    // Generator Vg overrides the bus Vm column at PV/slack buses; the first
    // in-service unit at a bus wins, then the first unit of any status.
    let mut gen_vset: HashMap<usize, f64> = HashMap::new();
    for in_service in [true, false] {
        for (g, row) in generators.iter().zip(&gen_rows) {
            if g.in_service == in_service || !in_service {
                gen_vset.entry(g.bus).or_insert(row.values[5]);
            }
        }
    }

    let mut buses = Vec::with_capacity(bus_rows.len());
    for row in &bus_rows {
        check_width(row, BUS_MIN_COLS, "bus")?;
        let v = &row.values;
        let id = as_id(v[0], row.line, "bus id")?;
        let kind = match v[1] as i64 {
            1 => BusKind::PQ,
            2 => BusKind::PV,
            3 => BusKind::Slack,
            4 => {
                return Err(Error::parse(
                    row.line,
                    format!("bus {id} is isolated (type 4), which is not supported"),
                ))
            }
            other => return Err(Error::parse(row.line, format!("unknown bus type {other}"))),
        };
        let voltage_setpoint = match kind {
            BusKind::PQ => v[7],
            _ => gen_vset.get(&id).copied().unwrap_or(v[7]),
        };
        buses.push(Bus {
            id,
            kind,
            load_p: v[2],
            load_q: v[3],
            voltage_setpoint,
            shunt_g: v[4],
            shunt_b: v[5],
        });
    }

    let mut branches = Vec::with_capacity(branch_rows.len());
    for (i, row) in branch_rows.iter().enumerate() {
        check_width(row, BRANCH_MIN_COLS, "branch")?;
        let v = &row.values;
        let ratio = v[8];
        let shift = v[9];
        branches.push(Branch {
            id: i + 1,
            from_bus: as_id(v[0], row.line, "branch from bus")?,
            to_bus: as_id(v[1], row.line, "branch to bus")?,
            r: v[2],
            x: v[3],
            b: v[4],
            tap: if ratio == 0.0 { 1.0 } else { ratio },
            shift_deg: shift,
            is_transformer: ratio != 0.0 || shift != 0.0,
            in_service: v[10] > 0.0,
        });
    }

    Network::new(base_power, buses, branches, generators)
}

/// Serializes a network back to MATPOWER text. Columns the model does not
/// carry (areas, voltage limits, ratings, costs) are written with neutral
/// values.
pub fn to_matpower(net: &Network, name: &str) -> String {
    let kind_code = |k: BusKind| match k {
        BusKind::PQ => 1,
        BusKind::PV => 2,
        BusKind::Slack => 3,
    };
    let vset: HashMap<usize, f64> = net.buses.iter().map(|b| (b.id, b.voltage_setpoint)).collect();

    let mut out = String::new();
    let _ = writeln!(out, "function mpc = {name}");
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {};", net.base_power);
    let _ = writeln!(out, "\n%% bus data");
    let _ = writeln!(out, "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin");
    let _ = writeln!(out, "mpc.bus = [");
    for b in &net.buses {
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t{}\t0\t0\t1\t1.1\t0.9;",
            b.id,
            kind_code(b.kind),
            b.load_p,
            b.load_q,
            b.shunt_g,
            b.shunt_b,
            b.voltage_setpoint
        );
    }
    let _ = writeln!(out, "];\n\n%% generator data");
    let _ = writeln!(out, "%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin");
    let _ = writeln!(out, "mpc.gen = [");
    for g in &net.generators {
        let _ = writeln!(
            out,
            "\t{}\t{}\t0\t{}\t{}\t{}\t{}\t{}\t0\t0;",
            g.bus,
            g.p_out,
            g.q_limits.1,
            g.q_limits.0,
            vset.get(&g.bus).copied().unwrap_or(1.0),
            net.base_power,
            u8::from(g.in_service)
        );
    }
    let _ = writeln!(out, "];\n\n%% branch data");
    let _ = writeln!(out, "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax");
    let _ = writeln!(out, "mpc.branch = [");
    for br in &net.branches {
        let ratio = if br.is_transformer { br.tap } else { 0.0 };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t0\t0\t0\t{}\t{}\t{}\t-360\t360;",
            br.from_bus,
            br.to_bus,
            br.r,
            br.x,
            br.b,
            ratio,
            br.shift_deg,
            u8::from(br.in_service)
        );
    }
    let _ = writeln!(out, "];");
    out
}
