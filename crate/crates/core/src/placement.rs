use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::device::{BlockType, Site};
use crate::error::{Error, Result};

/// Block id to site assignment. Index `i` holds the site of block `i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Placement {
    sites: Vec<Option<Site>>,
}

impl Placement {
    pub fn from_sites(sites: Vec<Site>) -> Self {
        Placement {
            sites: sites.into_iter().map(Some).collect(),
        }
    }

    pub fn with_capacity(n: usize) -> Self {
        Placement {
            sites: vec![None; n],
        }
    }

    pub fn assign(&mut self, block: u32, site: Site) {
        let i = block as usize;
        if i >= self.sites.len() {
            self.sites.resize(i + 1, None);
        }
        self.sites[i] = Some(site);
    }

    pub fn site(&self, block: u32) -> Option<Site> {
        self.sites.get(block as usize).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// `(block id, site)` for every assigned block.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Site)> + '_ {
        self.sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|s| (i as u32, s)))
    }

    pub fn is_total_for(&self, design: &DesignSpec) -> bool {
        (0..design.blocks().len() as u32).all(|b| self.site(b).is_some())
    }

    /// Shifts every site; callers keep the result inside the device.
    pub fn translated(&self, dx: i64, dy: i64) -> Placement {
        let shift = |v: u32, d: i64| (v as i64 + d) as u32;
        Placement {
            sites: self
                .sites
                .iter()
                .map(|s| {
                    s.map(|s| Site {
                        block_type: s.block_type,
                        x: shift(s.x, dx),
                        y: shift(s.y, dy),
                    })
                })
                .collect(),
        }
    }

    /// Occupied sites, sorted.
    pub fn occupied(&self) -> Vec<Site> {
        let mut v: Vec<Site> = self.iter().map(|(_, s)| s).collect();
        v.sort();
        v
    }

    pub fn records(&self, design: Option<&DesignSpec>) -> Vec<PlacedBlock> {
        self.iter()
            .map(|(id, s)| PlacedBlock {
                block_id: id,
                block_type: s.block_type,
                x: s.x,
                y: s.y,
                unit: design.and_then(|d| d.block(id)).map(|b| b.unit),
            })
            .collect()
    }

    pub fn from_records(records: &[PlacedBlock]) -> Placement {
        let mut p = Placement::default();
        for r in records {
            p.assign(
                r.block_id,
                Site {
                    block_type: r.block_type,
                    x: r.x,
                    y: r.y,
                },
            );
        }
        p
    }

    /// One line per block: `<type> <block_id> => (<x>,<y>)`.
    pub fn loc_constraints(&self) -> String {
        let mut out = String::new();
        for (id, s) in self.iter() {
            writeln!(out, "{} {} => ({},{})", s.block_type, id, s.x, s.y).unwrap();
        }
        out
    }
}

/// One entry of a placement file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedBlock {
    pub block_id: u32,
    #[serde(rename = "type")]
    pub block_type: BlockType,
    pub x: u32,
    pub y: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<u32>,
}

pub fn placement_to_json(placement: &Placement, design: Option<&DesignSpec>) -> String {
    let records = placement.records(design);
    let mut out = String::from("[\n");
    for (i, r) in records.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        if i + 1 < records.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

pub fn save_placement(
    placement: &Placement,
    design: Option<&DesignSpec>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, placement_to_json(placement, design)).map_err(|e| Error::io(path, e))
}

pub fn load_placement_records(path: impl AsRef<Path>) -> Result<Vec<PlacedBlock>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}
