//! Grid case data: buses, branches and generators, plus readers for the
//! MATPOWER tabular format and a native JSON mirror.
//!
//! Each bus stands for one substation. Loads are lumped on buses; a bus has a
//! load component whenever its real or reactive demand is nonzero. Negative
//! demand is kept as-is and behaves as an injection.

mod component;
mod matpower;
mod totals;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use component::{ComponentKind, ComponentRef};
pub use matpower::{parse_matpower, to_matpower};
pub use totals::{system_totals, SystemTotals};

pub type BusId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusKind {
    Slack,
    #[serde(rename = "pv")]
    PV,
    #[serde(rename = "pq")]
    PQ,
}

impl fmt::Display for BusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BusKind::Slack => "slack",
            BusKind::PV => "PV",
            BusKind::PQ => "PQ",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub kind: BusKind,
    /// Real demand, MW.
    pub load_p: f64,
    /// Reactive demand, MVAr.
    pub load_q: f64,
    /// Voltage magnitude setpoint (p.u.) for slack and PV buses.
    pub voltage_setpoint: f64,
    /// Shunt conductance, MW consumed at 1 p.u.
    #[serde(default)]
    pub shunt_g: f64,
    /// Shunt susceptance, MVAr injected at 1 p.u.
    #[serde(default)]
    pub shunt_b: f64,
}

impl Bus {
    pub fn has_load(&self) -> bool {
        self.load_p != 0.0 || self.load_q != 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub id: usize,
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series resistance, p.u.
    pub r: f64,
    /// Series reactance, p.u.
    pub x: f64,
    /// Total line charging susceptance, p.u.
    pub b: f64,
    /// Off-nominal turns ratio at the from end; 1.0 for lines.
    pub tap: f64,
    /// Phase shift, degrees.
    #[serde(default)]
    pub shift_deg: f64,
    pub is_transformer: bool,
    pub in_service: bool,
}

impl Branch {
    pub fn connects(&self, bus: BusId) -> bool {
        self.from_bus == bus || self.to_bus == bus
    }

    /// The bus at the far end from `bus`.
    pub fn other_end(&self, bus: BusId) -> BusId {
        if self.from_bus == bus {
            self.to_bus
        } else {
            self.from_bus
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: usize,
    pub bus: BusId,
    /// Scheduled real output, MW. The slack unit's actual output comes from
    /// the power-flow solution.
    pub p_out: f64,
    /// Reactive limits (min, max), MVAr.
    pub q_limits: (f64, f64),
    pub in_service: bool,
}

/// Component counts and raw setpoint totals, independent of any solution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseSummary {
    pub buses: usize,
    pub branches: usize,
    pub transformers: usize,
    pub generators: usize,
    /// Distinct buses hosting an in-service generator.
    pub generator_buses: usize,
    pub loads: usize,
    pub total_load_mw: f64,
    pub scheduled_generation_mw: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    /// System base, MVA.
    pub base_power: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub generators: Vec<Generator>,
}

impl Network {
    /// Builds a network and checks every structural invariant.
    pub fn new(
        base_power: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        generators: Vec<Generator>,
    ) -> Result<Self> {
        let net = Self {
            base_power,
            buses,
            branches,
            generators,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_power > 0.0 && self.base_power.is_finite()) {
            return Err(Error::Validation(format!(
                "base power must be positive, got {}",
                self.base_power
            )));
        }
        let slack: Vec<_> = self
            .buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .collect();
        match slack.len() {
            0 => return Err(Error::Validation("no slack bus".into())),
            1 => {}
            _ => {
                let ids: Vec<_> = slack.iter().map(|b| b.id.to_string()).collect();
                return Err(Error::Validation(format!(
                    "more than one slack bus: {}",
                    ids.join(", ")
                )));
            }
        }

        let mut seen = HashSet::with_capacity(self.buses.len());
        for bus in &self.buses {
            if !seen.insert(bus.id) {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
            let values = [
                bus.load_p,
                bus.load_q,
                bus.voltage_setpoint,
                bus.shunt_g,
                bus.shunt_b,
            ];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("bus {} has a non-finite value", bus.id)));
            }
            if bus.kind != BusKind::PQ && bus.voltage_setpoint <= 0.0 {
                return Err(Error::Validation(format!(
                    "bus {} ({}) needs a positive voltage setpoint",
                    bus.id, bus.kind
                )));
            }
        }

        let mut branch_ids = HashSet::with_capacity(self.branches.len());
        for br in &self.branches {
            if !branch_ids.insert(br.id) {
                return Err(Error::Validation(format!("duplicate branch id {}", br.id)));
            }
            for end in [br.from_bus, br.to_bus] {
                if !seen.contains(&end) {
                    return Err(Error::Validation(format!(
                        "branch {} references unknown bus {}",
                        br.id, end
                    )));
                }
            }
            if br.from_bus == br.to_bus {
                return Err(Error::Validation(format!(
                    "branch {} connects bus {} to itself",
                    br.id, br.from_bus
                )));
            }
            if [br.r, br.x, br.b, br.tap, br.shift_deg]
                .iter()
                .any(|v| !v.is_finite())
            {
                return Err(Error::Validation(format!("branch {} has a non-finite value", br.id)));
            }
            if br.r == 0.0 && br.x == 0.0 {
                return Err(Error::Validation(format!(
                    "branch {} ({}-{}) has zero series impedance",
                    br.id, br.from_bus, br.to_bus
                )));
            }
            if br.tap <= 0.0 {
                return Err(Error::Validation(format!(
                    "branch {} has non-positive tap ratio {}",
                    br.id, br.tap
                )));
            }
            if (br.tap != 1.0 || br.shift_deg != 0.0) && !br.is_transformer {
                return Err(Error::Validation(format!(
                    "branch {} has an off-nominal ratio but is not flagged as a transformer",
                    br.id
                )));
            }
        }

        let kinds: HashMap<BusId, BusKind> = self.buses.iter().map(|b| (b.id, b.kind)).collect();
        let mut gen_ids = HashSet::with_capacity(self.generators.len());
        for g in &self.generators {
            if !gen_ids.insert(g.id) {
                return Err(Error::Validation(format!("duplicate generator id {}", g.id)));
            }
            let Some(kind) = kinds.get(&g.bus) else {
                return Err(Error::Validation(format!(
                    "generator {} references unknown bus {}",
                    g.id, g.bus
                )));
            };
            if !g.p_out.is_finite() || g.q_limits.0.is_nan() || g.q_limits.1.is_nan() {
                return Err(Error::Validation(format!("generator {} has a non-finite value", g.id)));
            }
            if g.in_service && *kind == BusKind::PQ {
                return Err(Error::Validation(format!(
                    "generator {} is in service at PQ bus {}",
                    g.id, g.bus
                )));
            }
        }
        Ok(())
    }

    pub fn slack_bus(&self) -> &Bus {
        self.buses
            .iter()
            .find(|b| b.kind == BusKind::Slack)
            .expect("validated network has a slack bus")
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    /// Bus at 1-based row position, for cases whose published results number
    /// substations sequentially rather than by bus id.
    pub fn bus_at_position(&self, position: usize) -> Option<&Bus> {
        position.checked_sub(1).and_then(|i| self.buses.get(i))
    }

    pub fn branch(&self, id: usize) -> Option<&Branch> {
        self.branches.iter().find(|b| b.id == id)
    }

    pub fn generator(&self, id: usize) -> Option<&Generator> {
        self.generators.iter().find(|g| g.id == id)
    }

    /// Map from bus id to its row index.
    pub fn bus_index(&self) -> HashMap<BusId, usize> {
        self.buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect()
    }

    /// In-service branches touching `bus`, in file order.
    pub fn incident_branches(&self, bus: BusId) -> impl Iterator<Item = &Branch> {
        self.branches
            .iter()
            .filter(move |br| br.in_service && br.connects(bus))
    }

    /// In-service generators at `bus`, in file order.
    pub fn generators_at(&self, bus: BusId) -> impl Iterator<Item = &Generator> {
        self.generators
            .iter()
            .filter(move |g| g.in_service && g.bus == bus)
    }

    /// First branch (in file order) joining the two buses, either direction.
    pub fn find_branch(&self, a: BusId, b: BusId) -> Option<&Branch> {
        self.branches
            .iter()
            .find(|br| (br.from_bus == a && br.to_bus == b) || (br.from_bus == b && br.to_bus == a))
    }

    pub fn summary(&self) -> CaseSummary {
        let in_service: Vec<_> = self.generators.iter().filter(|g| g.in_service).collect();
        let gen_buses: HashSet<_> = in_service.iter().map(|g| g.bus).collect();
        CaseSummary {
            buses: self.buses.len(),
            branches: self.branches.len(),
            transformers: self.branches.iter().filter(|b| b.is_transformer).count(),
            generators: self.generators.len(),
            generator_buses: gen_buses.len(),
            loads: self.buses.iter().filter(|b| b.has_load()).count(),
            total_load_mw: self.buses.iter().map(|b| b.load_p).sum(),
            scheduled_generation_mw: in_service.iter().map(|g| g.p_out).sum(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let net: Network = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a case file, picking the JSON reader for `.json` files and the
    /// MATPOWER reader for everything else.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            Self::from_json_str(&text)
        } else {
            parse_matpower(&text)
        };
        parsed.map_err(|e| e.context(path.display().to_string()))
    }
}
