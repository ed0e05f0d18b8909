//! Labeled independent-set polynomials: exact arithmetic, the dynamic
//! program over expressions, and an enumeration oracle.

mod driver;
mod oracle;
mod poly;
mod rules;

use crate::expr::LabelId;

pub use driver::{labeled_isp, labeled_isp_localized, labeled_isp_trace};
pub use oracle::{brute_force_labeled_isp, brute_force_labeled_isp_sequential, DEFAULT_ORACLE_LIMIT};
pub use poly::{LabelSet, LabeledPolynomial, PolyError, UnivariatePolynomial};
pub use rules::{
    apply_join, apply_relabel, base_polynomial, extract_univariate, merge_after_relabel, merge_after_union,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IspError {
    #[error("vertex count must be at least 1")]
    InvalidCount,
    #[error("operation needs two distinct labels, got {0} twice")]
    EqualLabels(LabelId),
    #[error("merge leaves a term with fewer vertices than labels {labels:?}")]
    DegreeUnderflow { labels: LabelSet },
    #[error("fuse at node {node} merges two adjacent vertices")]
    AdjacentMergeUnsupported { node: usize },
    #[error("fuse at node {node} does not merge exactly one vertex from each side")]
    NotLocalized { node: usize },
    #[error("graph has {n} vertices, enumeration limit is {limit}")]
    TooLarge { n: usize, limit: usize },
}
