//! Synthetic columnar FPGA fabrics.
//!
//! A device is a set of typed hard-block columns on an integer grid. Every
//! column spans the full device height; its sites are split evenly over the
//! device's repeatable regions and packed against the bottom row of each
//! region, which lets a column type carry fewer sites per region than the
//! region has rows (URAM vs DSP density on real parts).

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BlockType {
    #[serde(rename = "DSP")]
    Dsp,
    #[serde(rename = "BRAM")]
    Bram,
    #[serde(rename = "URAM")]
    Uram,
}

impl BlockType {
    pub const ALL: [BlockType; 3] = [BlockType::Dsp, BlockType::Bram, BlockType::Uram];

    /// Row distance between cascade-adjacent sites. RAMB18 halves are
    /// interleaved in a BRAM column, so the next cascade site is two rows up.
    pub fn cascade_stride(self) -> u32 {
        match self {
            BlockType::Dsp | BlockType::Uram => 1,
            BlockType::Bram => 2,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockType::Dsp => "DSP",
            BlockType::Bram => "BRAM",
            BlockType::Uram => "URAM",
        }
    }
}

impl fmt::Display for BlockType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BlockType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DSP" => Ok(BlockType::Dsp),
            "BRAM" => Ok(BlockType::Bram),
            "URAM" => Ok(BlockType::Uram),
            _ => Err(Error::validation(
                "type",
                format!("unknown block type `{s}`"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    #[serde(rename = "type")]
    pub block_type: BlockType,
    pub x: u32,
    /// Total sites in the column over the whole device height.
    pub y_sites: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    #[serde(rename = "type")]
    pub block_type: BlockType,
    pub x: u32,
    pub y: u32,
}

/// A full-width horizontal slice of the device, rows `[start, start + rows)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Region {
    pub start: u32,
    pub rows: u32,
}

impl Region {
    pub fn new(start: u32, rows: u32) -> Self {
        Region { start, rows }
    }

    pub fn end(&self) -> u32 {
        self.start + self.rows
    }

    pub fn contains_row(&self, y: u32) -> bool {
        y >= self.start && y < self.end()
    }
}

/// A maximal ladder of cascade-adjacent sites `start, start + s, ...` inside
/// one column and one region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CascadeRun {
    pub start: u32,
    pub len: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnRuns {
    pub x: u32,
    pub runs: Vec<CascadeRun>,
}

impl ColumnRuns {
    pub fn sites(&self) -> u32 {
        self.runs.iter().map(|r| r.len).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Device {
    pub name: String,
    pub xmax: u32,
    pub ymax: u32,
    pub region_height: u32,
    pub slr_count: u32,
    pub columns: Vec<Column>,
}

impl Device {
    /// Builds a device and checks every invariant.
    pub fn new(
        name: impl Into<String>,
        xmax: u32,
        ymax: u32,
        region_height: u32,
        slr_count: u32,
        mut columns: Vec<Column>,
    ) -> Result<Self> {
        columns.sort_by_key(|c| (c.x, c.block_type));
        let device = Device {
            name: name.into(),
            xmax,
            ymax,
            region_height,
            slr_count,
            columns,
        };
        device.validate()?;
        Ok(device)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        if self.xmax == 0 {
            return Err(Error::validation("xmax", "must be positive"));
        }
        if self.region_height == 0 {
            return Err(Error::validation("region_height", "must be positive"));
        }
        if self.slr_count == 0 {
            return Err(Error::validation("slr_count", "must be at least 1"));
        }
        if self.ymax == 0 || !self.ymax.is_multiple_of(self.region_height) {
            return Err(Error::validation(
                "ymax",
                format!(
                    "{} is not a positive multiple of region_height {}",
                    self.ymax, self.region_height
                ),
            ));
        }
        if !self.ymax.is_multiple_of(self.slr_count)
            || !(self.ymax / self.slr_count).is_multiple_of(self.region_height)
        {
            return Err(Error::validation(
                "slr_count",
                format!(
                    "ymax {} does not split into {} SLRs of whole regions",
                    self.ymax, self.slr_count
                ),
            ));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in self.columns.iter().enumerate() {
            if c.x >= self.xmax {
                return Err(Error::validation(
                    format!("columns[{i}].x"),
                    format!("x = {} is outside xmax = {}", c.x, self.xmax),
                ));
            }
            if c.y_sites == 0 {
                return Err(Error::validation(
                    format!("columns[{i}].y_sites"),
                    "must be at least 1",
                ));
            }
            if c.y_sites > self.ymax {
                return Err(Error::validation(
                    format!("columns[{i}].y_sites"),
                    format!("{} exceeds ymax = {}", c.y_sites, self.ymax),
                ));
            }
            if !seen.insert((c.block_type, c.x)) {
                return Err(Error::validation(
                    format!("columns[{i}].x"),
                    format!("duplicate {} column at x = {}", c.block_type, c.x),
                ));
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let mut device: Device = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            msg: e.to_string(),
        })?;
        device.columns.sort_by_key(|c| (c.x, c.block_type));
        device.validate()?;
        Ok(device)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device serializes")
    }

    pub fn region_count(&self) -> u32 {
        self.ymax / self.region_height
    }

    pub fn slr_height(&self) -> u32 {
        self.ymax / self.slr_count
    }

    /// Region `index` as a row slice.
    pub fn region(&self, index: u32) -> Result<Region> {
        if index >= self.region_count() {
            return Err(Error::validation(
                "region_index",
                format!("{index} out of range (device has {})", self.region_count()),
            ));
        }
        Ok(Region::new(index * self.region_height, self.region_height))
    }

    pub fn column(&self, block_type: BlockType, x: u32) -> Option<&Column> {
        self.columns
            .iter()
            .find(|c| c.x == x && c.block_type == block_type)
    }

    pub fn columns_of(&self, block_type: BlockType) -> impl Iterator<Item = &Column> {
        self.columns
            .iter()
            .filter(move |c| c.block_type == block_type)
    }

    pub fn block_types(&self) -> Vec<BlockType> {
        let set: BTreeSet<_> = self.columns.iter().map(|c| c.block_type).collect();
        set.into_iter().collect()
    }

    /// Sites a column holds inside device region `region`.
    fn sites_in_column_region(&self, column: &Column, region: u32) -> u32 {
        let n = self.region_count();
        column.y_sites / n + u32::from(region < column.y_sites % n)
    }

    fn column_has_row(&self, column: &Column, y: u32) -> bool {
        if y >= self.ymax {
            return false;
        }
        let region = y / self.region_height;
        y % self.region_height < self.sites_in_column_region(column, region)
    }

    /// Rows of every site in `column`, ascending.
    pub fn column_rows(&self, column: &Column) -> Vec<u32> {
        (0..self.region_count())
            .flat_map(|r| {
                let base = r * self.region_height;
                (0..self.sites_in_column_region(column, r)).map(move |o| base + o)
            })
            .collect()
    }

    pub fn is_site(&self, block_type: BlockType, x: u32, y: u32) -> bool {
        self.column(block_type, x)
            .is_some_and(|c| self.column_has_row(c, y))
    }

    pub fn site_count(&self, block_type: BlockType) -> u64 {
        self.columns_of(block_type).map(|c| c.y_sites as u64).sum()
    }

    pub fn sites_of_type(&self, block_type: BlockType) -> Vec<Site> {
        self.columns_of(block_type)
            .flat_map(|c| {
                self.column_rows(c).into_iter().map(move |y| Site {
                    block_type,
                    x: c.x,
                    y,
                })
            })
            .collect()
    }

    /// Sites of `block_type` in device region `region_index`, sorted by (x, y).
    pub fn sites_in_region(&self, block_type: BlockType, region_index: u32) -> Result<Vec<Site>> {
        let region = self.region(region_index)?;
        Ok(self.sites_in_rows(block_type, region))
    }

    /// Sites of `block_type` whose rows fall in `region`, sorted by (x, y).
    pub fn sites_in_rows(&self, block_type: BlockType, region: Region) -> Vec<Site> {
        let mut sites: Vec<Site> = self
            .sites_of_type(block_type)
            .into_iter()
            .filter(|s| region.contains_row(s.y))
            .collect();
        sites.sort_by_key(|s| (s.x, s.y));
        sites
    }

    /// Cascade runs of every column of `block_type` inside `region`, columns
    /// ordered by x and runs by start row.
    pub fn cascade_runs(&self, block_type: BlockType, region: Region) -> Vec<ColumnRuns> {
        let stride = block_type.cascade_stride();
        let mut out = Vec::new();
        let mut cols: Vec<&Column> = self.columns_of(block_type).collect();
        cols.sort_by_key(|c| c.x);
        for c in cols {
            let rows: Vec<u32> = self
                .column_rows(c)
                .into_iter()
                .filter(|&y| region.contains_row(y))
                .collect();
            let present: BTreeSet<u32> = rows.iter().copied().collect();
            let mut runs = Vec::new();
            for &y in &rows {
                // run heads: no cascade predecessor inside the region
                let has_pred = y >= stride && present.contains(&(y - stride));
                if has_pred {
                    continue;
                }
                let mut len = 1;
                while present.contains(&(y + len * stride)) {
                    len += 1;
                }
                runs.push(CascadeRun { start: y, len });
            }
            runs.sort_by_key(|r| r.start);
            out.push(ColumnRuns { x: c.x, runs });
        }
        out
    }
}

pub fn load_device(path: impl AsRef<Path>) -> Result<Device> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Device::from_json_str(&text, &path.display().to_string())
}

pub fn save_device(device: &Device, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, device.to_json() + "\n").map_err(|e| Error::io(path, e))
}

/// Parameters for [`synth_device`]. `sites_per_col` is indexed by
/// [`BlockType::index`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthParams {
    pub dsp_cols: u32,
    pub bram_cols: u32,
    pub uram_cols: u32,
    pub sites_per_col: [u32; 3],
    pub region_height: u32,
    pub slr_count: u32,
    pub seed: u64,
}

/// Generates a device whose column x-order is a seeded shuffle of the type
/// sequence. The height is the smallest multiple of `region_height *
/// slr_count` that holds the tallest column.
pub fn synth_device(p: &SynthParams) -> Result<Device> {
    let counts = [p.dsp_cols, p.bram_cols, p.uram_cols];
    for (t, &n) in BlockType::ALL.iter().zip(&counts) {
        if n == 0 {
            return Err(Error::validation(
                format!("{}_cols", t.name().to_lowercase()),
                "must be at least 1",
            ));
        }
        if p.sites_per_col[t.index()] == 0 {
            return Err(Error::validation(
                format!("sites_per_col[{t}]"),
                "must be at least 1",
            ));
        }
    }
    if p.region_height == 0 || p.slr_count == 0 {
        return Err(Error::validation(
            "region_height/slr_count",
            "must be at least 1",
        ));
    }
    let mut types: Vec<BlockType> = BlockType::ALL
        .iter()
        .zip(&counts)
        .flat_map(|(&t, &n)| std::iter::repeat_n(t, n as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    types.shuffle(&mut rng);

    let tallest = *p.sites_per_col.iter().max().unwrap();
    let quantum = p.region_height * p.slr_count;
    let ymax = tallest.div_ceil(quantum) * quantum;
    let columns = types
        .iter()
        .enumerate()
        .map(|(x, &t)| Column {
            block_type: t,
            x: x as u32,
            y_sites: p.sites_per_col[t.index()],
        })
        .collect();
    Device::new(
        format!("synth-{}", p.seed),
        types.len() as u32,
        ymax,
        p.region_height,
        p.slr_count,
        columns,
    )
}

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        /// Names of the device descriptors compiled into the library.
        pub const BUNDLED_DEVICES: &[&str] = &[$($name),*];

        fn bundled_text(name: &str) -> Option<&'static str> {
            match name {
                $($name => Some(include_str!(concat!("../../../devices/", $name, ".json"))),)*
                _ => None,
            }
        }
    };
}

bundled!(
    "tiny4",
    "vu3p-like",
    "vu5p-like",
    "vu7p-like",
    "vu9p-like",
    "vu11p-like",
    "vu13p-like",
);

/// A bundled descriptor by name, with or without the `.json` suffix.
pub fn bundled_device(name: &str) -> Result<Device> {
    let key = name.strip_suffix(".json").unwrap_or(name);
    let text = bundled_text(key)
        .ok_or_else(|| Error::validation("device", format!("no bundled device named `{name}`")))?;
    Device::from_json_str(text, key)
}
