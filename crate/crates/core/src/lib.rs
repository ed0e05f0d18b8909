//! Fusion-tree expressions and the width conversions around them.
//!
//! The crate evaluates fusion-tree expressions (clique-width operations plus
//! bulk vertex creation and the fuse operation), converts tree
//! decompositions and clique-width expressions into them, eliminates fuses
//! again, and counts independent sets by a dynamic program over the
//! expression that is cross-checked against exhaustive enumeration.

pub mod convert;
pub mod expr;
pub mod graph;
pub mod isp;
pub mod par;
pub mod treedec;

pub use expr::{Expression, LabelId, Op};
pub use graph::LabeledGraph;
pub use isp::{LabeledPolynomial, UnivariatePolynomial};
