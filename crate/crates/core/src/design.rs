//! Logical designs: hard blocks, weighted connections and cascade chains,
//! grouped into repeating units.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::device::BlockType;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LogicalBlock {
    pub id: u32,
    #[serde(rename = "type")]
    pub block_type: BlockType,
    pub unit: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connection {
    pub src: u32,
    pub dst: u32,
    pub weight: u32,
}

/// Blocks joined by dedicated cascade wiring. `members[k + 1]` sits one
/// cascade stride above `members[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CascadeChain {
    #[serde(rename = "type")]
    pub block_type: BlockType,
    pub members: Vec<u32>,
}

/// A placeable object: a cascade chain, or a lone block as a chain of one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    pub block_type: BlockType,
    pub unit: u32,
    pub members: Vec<u32>,
}

impl Group {
    pub fn len(&self) -> u32 {
        self.members.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
struct DesignFile {
    blocks: Vec<LogicalBlock>,
    connections: Vec<Connection>,
    chains: Vec<CascadeChain>,
}

/// A fully instantiated netlist. Block ids are dense: `blocks[i].id == i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignSpec {
    blocks: Vec<LogicalBlock>,
    connections: Vec<Connection>,
    chains: Vec<CascadeChain>,
    num_units: u32,
    cascade_links: HashSet<(u32, u32)>,
}

/// The repeating tile `C_k`: a single-unit design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSpec(DesignSpec);

impl UnitSpec {
    pub fn design(&self) -> &DesignSpec {
        &self.0
    }

    pub fn block_count(&self) -> usize {
        self.0.blocks.len()
    }

    /// Blocks of each type, indexed by [`BlockType::index`].
    pub fn composition(&self) -> [u32; 3] {
        self.0.type_counts()
    }
}

impl TryFrom<DesignSpec> for UnitSpec {
    type Error = Error;

    fn try_from(design: DesignSpec) -> Result<Self> {
        if design.num_units != 1 {
            return Err(Error::validation(
                "blocks.unit",
                format!(
                    "a unit template must contain exactly one unit, found {}",
                    design.num_units
                ),
            ));
        }
        Ok(UnitSpec(design))
    }
}

impl DesignSpec {
    pub fn new(
        mut blocks: Vec<LogicalBlock>,
        connections: Vec<Connection>,
        chains: Vec<CascadeChain>,
    ) -> Result<Self> {
        blocks.sort_by_key(|b| b.id);
        for (i, b) in blocks.iter().enumerate() {
            if b.id as usize != i {
                return Err(Error::validation(
                    format!("blocks[{i}].id"),
                    format!("ids must be unique and dense from 0, found {}", b.id),
                ));
            }
        }
        let n = blocks.len() as u32;
        for (i, c) in connections.iter().enumerate() {
            if c.src >= n || c.dst >= n {
                return Err(Error::validation(
                    format!("connections[{i}]"),
                    format!("endpoint {}->{} refers to a missing block", c.src, c.dst),
                ));
            }
            if c.src == c.dst {
                return Err(Error::validation(
                    format!("connections[{i}]"),
                    format!("self-connection on block {}", c.src),
                ));
            }
            if c.weight == 0 {
                return Err(Error::validation(
                    format!("connections[{i}].weight"),
                    "must be at least 1",
                ));
            }
        }
        let mut chained = HashSet::new();
        let mut cascade_links = HashSet::new();
        for (i, ch) in chains.iter().enumerate() {
            if ch.members.len() < 2 {
                return Err(Error::validation(
                    format!("chains[{i}].members"),
                    "a chain needs at least two members",
                ));
            }
            let mut unit = None;
            for &m in &ch.members {
                let Some(b) = blocks.get(m as usize) else {
                    return Err(Error::validation(
                        format!("chains[{i}].members"),
                        format!("block {m} does not exist"),
                    ));
                };
                if b.block_type != ch.block_type {
                    return Err(Error::validation(
                        format!("chains[{i}].members"),
                        format!("block {m} is {} in a {} chain", b.block_type, ch.block_type),
                    ));
                }
                if *unit.get_or_insert(b.unit) != b.unit {
                    return Err(Error::validation(
                        format!("chains[{i}].members"),
                        "chain spans more than one unit",
                    ));
                }
                if !chained.insert(m) {
                    return Err(Error::validation(
                        format!("chains[{i}].members"),
                        format!("block {m} appears in more than one chain"),
                    ));
                }
            }
            for w in ch.members.windows(2) {
                cascade_links.insert((w[0], w[1]));
                cascade_links.insert((w[1], w[0]));
            }
        }
        let num_units = blocks.iter().map(|b| b.unit + 1).max().unwrap_or(0);
        Ok(DesignSpec {
            blocks,
            connections,
            chains,
            num_units,
            cascade_links,
        })
    }

    pub fn blocks(&self) -> &[LogicalBlock] {
        &self.blocks
    }

    pub fn connections(&self) -> &[Connection] {
        &self.connections
    }

    pub fn chains(&self) -> &[CascadeChain] {
        &self.chains
    }

    pub fn num_units(&self) -> u32 {
        self.num_units
    }

    pub fn block(&self, id: u32) -> Option<&LogicalBlock> {
        self.blocks.get(id as usize)
    }

    /// Whether a connection runs along a cascade link, i.e. joins two
    /// consecutive members of one chain.
    pub fn is_cascade(&self, c: &Connection) -> bool {
        self.cascade_links.contains(&(c.src, c.dst))
    }

    pub fn type_counts(&self) -> [u32; 3] {
        let mut counts = [0; 3];
        for b in &self.blocks {
            counts[b.block_type.index()] += 1;
        }
        counts
    }

    pub fn block_types(&self) -> Vec<BlockType> {
        let counts = self.type_counts();
        BlockType::ALL
            .into_iter()
            .filter(|t| counts[t.index()] > 0)
            .collect()
    }

    /// Placeable groups: every chain in declaration order, then every
    /// unchained block in id order as a group of one.
    pub fn groups(&self) -> Vec<Group> {
        let mut chained = HashSet::new();
        let mut out = Vec::new();
        for ch in &self.chains {
            chained.extend(ch.members.iter().copied());
            out.push(Group {
                block_type: ch.block_type,
                unit: self.blocks[ch.members[0] as usize].unit,
                members: ch.members.clone(),
            });
        }
        for b in &self.blocks {
            if !chained.contains(&b.id) {
                out.push(Group {
                    block_type: b.block_type,
                    unit: b.unit,
                    members: vec![b.id],
                });
            }
        }
        out
    }

    /// Block ids of every unit, indexed by unit.
    pub fn unit_members(&self) -> Vec<Vec<u32>> {
        let mut units = vec![Vec::new(); self.num_units as usize];
        for b in &self.blocks {
            units[b.unit as usize].push(b.id);
        }
        units
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let file: DesignFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            msg: e.to_string(),
        })?;
        DesignSpec::new(file.blocks, file.connections, file.chains)
    }

    pub fn to_json(&self) -> String {
        let file = DesignFile {
            blocks: self.blocks.clone(),
            connections: self.connections.clone(),
            chains: self.chains.clone(),
        };
        serde_json::to_string_pretty(&file).expect("design serializes")
    }
}

pub fn load_design(path: impl AsRef<Path>) -> Result<DesignSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DesignSpec::from_json_str(&text, &path.display().to_string())
}

pub fn save_design(design: &DesignSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, design.to_json() + "\n").map_err(|e| Error::io(path, e))
}

/// Local block ids inside the builtin convolution unit.
mod conv {
    /// Two 3x3 kernels, each a cascade of nine DSPs.
    pub const DSP_A: std::ops::Range<u32> = 0..9;
    pub const DSP_B: std::ops::Range<u32> = 9..18;
    /// Row-reuse BRAM cascades; each BRAM feeds one DSP triple.
    pub const BRAM_A: [u32; 3] = [18, 19, 20];
    pub const BRAM_B: [u32; 3] = [21, 22, 23];
    /// Output BRAMs fed by the kernel accumulators.
    pub const BRAM_OUT: [u32; 2] = [24, 25];
    pub const URAM: [u32; 2] = [26, 27];

    pub const CASCADE_WEIGHT: u32 = 1;
    pub const BUS_WEIGHT: u32 = 3;
    pub const URAM_LINK_WEIGHT: u32 = 2;
}

/// The convolution tile: 18 DSPs in two 9-long cascades, 8 BRAMs (two
/// row-reuse cascades of three plus a 2-long output cascade) and a 2-long
/// URAM cascade.
///
/// Edge weights: 1 per cascade-adjacent pair, 3 per BRAM-to-DSP-triple bus
/// (to the middle DSP of the triple) and per accumulator-to-output-BRAM bus,
/// 2 per URAM-to-BRAM-cascade-head link.
pub fn builtin_conv_unit() -> UnitSpec {
    use conv::*;

    let mut blocks = Vec::new();
    let mut push = |ids: &[u32], t| {
        for &id in ids {
            blocks.push(LogicalBlock {
                id,
                block_type: t,
                unit: 0,
            })
        }
    };
    let dsp: Vec<u32> = (0..18).collect();
    push(&dsp, BlockType::Dsp);
    push(&BRAM_A, BlockType::Bram);
    push(&BRAM_B, BlockType::Bram);
    push(&BRAM_OUT, BlockType::Bram);
    push(&URAM, BlockType::Uram);

    let a: Vec<u32> = DSP_A.collect();
    let b: Vec<u32> = DSP_B.collect();
    let chains = vec![
        CascadeChain {
            block_type: BlockType::Dsp,
            members: a.clone(),
        },
        CascadeChain {
            block_type: BlockType::Dsp,
            members: b.clone(),
        },
        CascadeChain {
            block_type: BlockType::Bram,
            members: BRAM_A.to_vec(),
        },
        CascadeChain {
            block_type: BlockType::Bram,
            members: BRAM_B.to_vec(),
        },
        CascadeChain {
            block_type: BlockType::Bram,
            members: BRAM_OUT.to_vec(),
        },
        CascadeChain {
            block_type: BlockType::Uram,
            members: URAM.to_vec(),
        },
    ];

    let mut connections = Vec::new();
    for ch in &chains {
        for w in ch.members.windows(2) {
            connections.push(Connection {
                src: w[0],
                dst: w[1],
                weight: CASCADE_WEIGHT,
            });
        }
    }
    for (brams, kernel) in [(BRAM_A, &a), (BRAM_B, &b)] {
        for (j, &bram) in brams.iter().enumerate() {
            connections.push(Connection {
                src: bram,
                dst: kernel[3 * j + 1],
                weight: BUS_WEIGHT,
            });
        }
    }
    connections.push(Connection {
        src: URAM[0],
        dst: BRAM_A[0],
        weight: URAM_LINK_WEIGHT,
    });
    connections.push(Connection {
        src: URAM[1],
        dst: BRAM_B[0],
        weight: URAM_LINK_WEIGHT,
    });
    connections.push(Connection {
        src: *a.last().unwrap(),
        dst: BRAM_OUT[0],
        weight: BUS_WEIGHT,
    });
    connections.push(Connection {
        src: *b.last().unwrap(),
        dst: BRAM_OUT[1],
        weight: BUS_WEIGHT,
    });

    UnitSpec(DesignSpec::new(blocks, connections, chains).expect("builtin unit is valid"))
}

/// Clones `unit` `n` times. Unit `k` owns block ids `k * |unit| ..`; no
/// connections cross units.
pub fn replicate_netlist(unit: &UnitSpec, n: u32) -> Result<DesignSpec> {
    if n == 0 {
        return Err(Error::validation("num_units", "must be at least 1"));
    }
    let u = unit.design();
    let stride = u.blocks.len() as u32;
    let mut blocks = Vec::with_capacity(u.blocks.len() * n as usize);
    let mut connections = Vec::with_capacity(u.connections.len() * n as usize);
    let mut chains = Vec::with_capacity(u.chains.len() * n as usize);
    for k in 0..n {
        let off = k * stride;
        blocks.extend(u.blocks.iter().map(|b| LogicalBlock {
            id: b.id + off,
            block_type: b.block_type,
            unit: k,
        }));
        connections.extend(u.connections.iter().map(|c| Connection {
            src: c.src + off,
            dst: c.dst + off,
            weight: c.weight,
        }));
        chains.extend(u.chains.iter().map(|c| CascadeChain {
            block_type: c.block_type,
            members: c.members.iter().map(|m| m + off).collect(),
        }));
    }
    DesignSpec::new(blocks, connections, chains)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_unit_composition() {
        let u = builtin_conv_unit();
        assert_eq!(u.block_count(), 28);
        let c = u.composition();
        assert_eq!(c[BlockType::Uram.index()], 2);
        assert_eq!(c[BlockType::Dsp.index()], 18);
        assert_eq!(c[BlockType::Bram.index()], 8);
    }

    #[test]
    fn conv_unit_chains() {
        let u = builtin_conv_unit();
        let d = u.design();
        let dsp: Vec<_> = d
            .chains()
            .iter()
            .filter(|c| c.block_type == BlockType::Dsp)
            .collect();
        assert_eq!(dsp.len(), 2);
        assert!(dsp.iter().all(|c| c.members.len() == 9));
        for ch in d.chains() {
            assert!(ch
                .members
                .iter()
                .all(|&m| d.block(m).unwrap().block_type == ch.block_type));
        }
        // no lone blocks in the conv unit
        assert_eq!(d.groups().len(), d.chains().len());
    }

    #[test]
    fn conv_unit_cascade_flags() {
        let d = builtin_conv_unit().design().clone();
        let cascades = d.connections().iter().filter(|c| d.is_cascade(c)).count();
        assert_eq!(cascades, 16 + 5 + 1);
        assert_eq!(d.connections().len(), 32);
    }

    #[test]
    fn replication_counts() {
        let u = builtin_conv_unit();
        let one = replicate_netlist(&u, 1).unwrap();
        assert_eq!(one.blocks().len(), 28);
        let d = replicate_netlist(&u, 80).unwrap();
        assert_eq!(d.blocks().len(), 2240);
        let c = d.type_counts();
        assert_eq!(c[BlockType::Uram.index()], 160);
        assert_eq!(c[BlockType::Dsp.index()], 1440);
        assert_eq!(c[BlockType::Bram.index()], 640);
        assert_eq!(d.num_units(), 80);
        let two = replicate_netlist(&u, 2).unwrap();
        assert_eq!(two.connections().len(), 2 * u.design().connections().len());
        assert!(replicate_netlist(&u, 0).is_err());
    }

    #[test]
    fn replicated_units_are_disjoint() {
        let d = replicate_netlist(&builtin_conv_unit(), 3).unwrap();
        for c in d.connections() {
            assert_eq!(d.block(c.src).unwrap().unit, d.block(c.dst).unwrap().unit);
        }
    }

    #[test]
    fn round_trip_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("unit.json");
        let u = builtin_conv_unit();
        save_design(u.design(), &p).unwrap();
        assert_eq!(&load_design(&p).unwrap(), u.design());
    }

    #[test]
    fn mixed_type_chain_rejected() {
        let text = r#"{"blocks":[{"id":0,"type":"DSP","unit":0},{"id":1,"type":"BRAM","unit":0}],
            "connections":[],"chains":[{"type":"DSP","members":[0,1]}]}"#;
        let err = DesignSpec::from_json_str(text, "x.json").unwrap_err();
        assert!(matches!(err, Error::Validation { ref field, .. } if field == "chains[0].members"));
    }

    #[test]
    fn custom_four_block_design() {
        let text = r#"{"blocks":[{"id":0,"type":"DSP","unit":0},{"id":1,"type":"DSP","unit":0},
            {"id":2,"type":"BRAM","unit":0},{"id":3,"type":"URAM","unit":0}],
            "connections":[{"src":2,"dst":0,"weight":2},{"src":3,"dst":2,"weight":1}],
            "chains":[{"type":"DSP","members":[0,1]}]}"#;
        let d = DesignSpec::from_json_str(text, "x.json").unwrap();
        assert_eq!(d.blocks().len(), 4);
        assert_eq!(d.groups().len(), 3);
        assert!(UnitSpec::try_from(d).is_ok());
    }

    #[test]
    fn dangling_references_rejected() {
        let bad_conn = r#"{"blocks":[{"id":0,"type":"DSP","unit":0}],
            "connections":[{"src":0,"dst":5,"weight":1}],"chains":[]}"#;
        assert!(DesignSpec::from_json_str(bad_conn, "x").is_err());
        let bad_chain = r#"{"blocks":[{"id":0,"type":"DSP","unit":0}],
            "connections":[],"chains":[{"type":"DSP","members":[0,7]}]}"#;
        assert!(DesignSpec::from_json_str(bad_chain, "x").is_err());
        let zero_weight = r#"{"blocks":[{"id":0,"type":"DSP","unit":0},{"id":1,"type":"DSP","unit":0}],
            "connections":[{"src":0,"dst":1,"weight":0}],"chains":[]}"#;
        assert!(DesignSpec::from_json_str(zero_weight, "x").is_err());
    }
}
