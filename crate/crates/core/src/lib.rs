#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod formulation;
pub mod network;
pub mod nlp;
pub mod opf;
pub mod oracle;
pub mod phasor;
pub mod power_flow;
pub mod power_quality;
pub mod presets;
pub mod vsc;

pub use error::{Error, Result};
