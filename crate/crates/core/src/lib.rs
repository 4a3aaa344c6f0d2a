//! Exact arithmetic and finite verification for the groups G_w = Z[w, 1/w] ⋊ Z.

pub mod bt_tree;
pub mod certificate;
pub mod cli;
pub mod error;
pub mod fieldspec;
pub mod geometry;
pub mod group;
pub mod intmath;
pub mod numberfield;
pub mod qmat;
pub mod residue;
pub mod valuation;
pub mod verify;
pub mod word;

pub use error::{Error, Result};
