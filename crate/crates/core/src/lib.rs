//! Descendant-level (D-L) views of vessel binary trees.
//!
//! The pipeline runs raw vessel graphs through [`extract`] into binary
//! component trees, lays them out with [`layout`], draws them with
//! [`render`], flags discrepancies with [`detect`], corrects them with
//! [`edit`] and compares corpora with [`stats`]. [`synth`] produces
//! synthetic corpora with known anomalies for validation.

pub mod corpus;
pub mod detect;
pub mod edit;
pub mod error;
pub mod extract;
pub mod ingest;
pub mod layout;
pub mod render;
pub mod stats;
pub mod synth;
pub mod tree;

pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use tree::{
    BinaryNode, BinaryTree, CorpusEntry, NodeRef, RawVesselGraph, Region, SegmentId, Subtree,
    VesselPoint, VesselSegment,
};
