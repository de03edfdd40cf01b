use thiserror::Error;

use crate::topology::Element;

#[derive(Debug, Error)]
pub enum Error {
    #[error("group axiom violated: {0}")]
    Axiom(String),

    #[error("invalid instance: {0}")]
    Instance(String),

    #[error("grid missing dyadic anchor {0}")]
    MissingAnchor(String),

    #[error("instance carries no ercs; a locally compact witness is required")]
    NoErcs,

    #[error("no result yet within budget {0}")]
    NotYet(u64),

    #[error("oracle rejected input: {0}")]
    Oracle(String),

    #[error("kernel is not a subgroup: {0:?} fails closure")]
    NotSubgroup(Element),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
