//! Hard-block placement for cascaded systolic designs on columnar FPGA
//! fabrics: device and netlist models, a three-tier genotype, objective
//! evaluation, evolutionary optimizers and a replicate-and-pipeline flow.

pub mod design;
pub mod device;
pub mod error;
pub mod flow;
pub mod genotype;
pub mod objective;
pub mod optimizers;
pub mod placement;
pub mod svg;

pub use design::{builtin_conv_unit, replicate_netlist, DesignSpec, UnitSpec};
pub use device::{BlockType, Device, Region, Site};
pub use error::{Error, Result};
pub use genotype::{Decoder, Genotype};
pub use objective::{evaluate, scalarize, ObjectiveValues};
pub use placement::Placement;
