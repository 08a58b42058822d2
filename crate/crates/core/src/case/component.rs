use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BusId, Network};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Line,
    Transformer,
    Generator,
    Load,
}

/// A switchable electrical component as seen from one substation.
///
/// `entity_id` is the branch id for lines and transformers, the generator id
/// for generators and the bus id for the lumped load of a bus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentRef {
    pub kind: ComponentKind,
    pub entity_id: usize,
    pub substation: BusId,
}

impl ComponentRef {
    pub fn line(branch: usize, substation: BusId) -> Self {
        Self {
            kind: ComponentKind::Line,
            entity_id: branch,
            substation,
        }
    }

    pub fn transformer(branch: usize, substation: BusId) -> Self {
        Self {
            kind: ComponentKind::Transformer,
            entity_id: branch,
            substation,
        }
    }

    pub fn generator(id: usize, substation: BusId) -> Self {
        Self {
            kind: ComponentKind::Generator,
            entity_id: id,
            substation,
        }
    }

    pub fn load(bus: BusId) -> Self {
        Self {
            kind: ComponentKind::Load,
            entity_id: bus,
            substation: bus,
        }
    }

    /// Reference to a branch, typed by its transformer flag.
    pub fn branch(net: &Network, branch: usize, substation: BusId) -> Result<Self> {
        let br = net
            .branch(branch)
            .ok_or_else(|| Error::Domain(format!("unknown branch {branch}")))?;
        Ok(if br.is_transformer {
            Self::transformer(branch, substation)
        } else {
            Self::line(branch, substation)
        })
    }

    pub fn is_branch(&self) -> bool {
        matches!(self.kind, ComponentKind::Line | ComponentKind::Transformer)
    }

    /// Checks that the referenced entity exists, matches the declared kind
    /// and touches the declared substation.
    pub fn check(&self, net: &Network) -> Result<()> {
        let fail = |why: &str| Err(Error::Domain(format!("{self}: {why}")));
        match self.kind {
            ComponentKind::Line | ComponentKind::Transformer => {
                let Some(br) = net.branch(self.entity_id) else {
                    return fail("no such branch");
                };
                if br.is_transformer != (self.kind == ComponentKind::Transformer) {
                    return fail("kind does not match the branch's transformer flag");
                }
                if !br.connects(self.substation) {
                    return fail("branch does not touch the substation");
                }
            }
            ComponentKind::Generator => {
                let Some(g) = net.generator(self.entity_id) else {
                    return fail("no such generator");
                };
                if g.bus != self.substation {
                    return fail("generator is not at the substation");
                }
            }
            ComponentKind::Load => {
                if net.bus(self.entity_id).is_none() {
                    return fail("no such bus");
                }
                if self.entity_id != self.substation {
                    return fail("load is not at the substation");
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentKind::Line => "line",
            ComponentKind::Transformer => "transformer",
            ComponentKind::Generator => "generator",
            ComponentKind::Load => "load",
        })
    }
}

impl fmt::Display for ComponentRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}@{}", self.kind, self.entity_id, self.substation)
    }
}
