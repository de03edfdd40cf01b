//! Instance files: JSON objects tagged by `kind`.
//!
//! ```json
//! {"kind": "finite", "cyclic": 2}
//! {"kind": "finite", "name": "V4", "table": [[0,1,2,3],[1,0,3,2],[2,3,0,1],[3,2,1,0]]}
//! {"kind": "discrete", "group": "integers"}
//! {"kind": "discrete", "group": "cyclic", "order": 6}
//! {"kind": "discrete", "group": "free-abelian", "rank": 2}
//! {"kind": "cantor"}
//! {"kind": "product", "left": {"kind": "finite", "cyclic": 2}, "right": {"kind": "cantor"}}
//! {"kind": "ce-presented", "prime": 2, "power": 1, "width": 3, "removals": [{"index": 1, "stage": 5}]}
//! {"kind": "inverse-limit", "orders": [2, 2, 2], "events": [{"stage": 4, "kill": 2}]}
//! ```
//!
//! An optional top-level `"grid"` lists radii as `"p/q"` strings.

use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::GroupInstance;
use crate::instances::{
    discrete_from_computable, finite_instance, CantorGroup, CePresented, CollapseEvent, DiscreteKind,
    DiscretePresentation, FiniteGroupTable, InverseSystem, Kernel, ProductGroup, SummandSchedule,
};
use crate::kernel::{parse_rational, Rational};
use crate::topology::Element;

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceSpec {
    Finite(FiniteSpec),
    Discrete(DiscreteSpec),
    Cantor {},
    Product { left: Box<InstanceSpec>, right: Box<InstanceSpec> },
    CePresented(CeSpec),
    InverseLimit(InverseSpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpec {
    pub name: Option<String>,
    pub table: Option<Vec<Vec<usize>>>,
    pub cyclic: Option<usize>,
    pub symmetric: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSpec {
    pub group: String,
    pub order: Option<u64>,
    pub rank: Option<usize>,
    pub moduli: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Removal {
    pub index: usize,
    pub stage: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CeSpec {
    pub prime: u64,
    pub power: u32,
    pub width: usize,
    #[serde(default)]
    pub removals: Vec<Removal>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub stage: u64,
    pub kill: Option<usize>,
    pub kernel: Option<Vec<Vec<i64>>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSpec {
    pub orders: Vec<u64>,
    #[serde(default)]
    pub events: Vec<EventSpec>,
}

#[derive(Clone, Debug, Deserialize)]
pub struct InstanceFile {
    #[serde(flatten)]
    pub spec: InstanceSpec,
    #[serde(default)]
    pub grid: Option<Vec<String>>,
}

/// A constructed instance.
#[derive(Clone, Debug)]
pub enum Loaded {
    Group { group: GroupInstance, kind: &'static str, presentation: Option<DiscretePresentation> },
    Ce(CePresented),
    Inverse(InverseSystem),
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Group { kind, .. } => kind,
            Loaded::Ce(_) => "ce-presented",
            Loaded::Inverse(_) => "inverse-limit",
        }
    }

    /// The topological group, where the kind has one.
    pub fn group(&self) -> Option<&GroupInstance> {
        match self {
            Loaded::Group { group, .. } => Some(group),
            Loaded::Ce(c) => Some(c.group()),
            Loaded::Inverse(_) => None,
        }
    }
}

fn finite_table(spec: &FiniteSpec) -> Result<FiniteGroupTable> {
    match (&spec.table, spec.cyclic, spec.symmetric) {
        (Some(t), None, None) => FiniteGroupTable::new(spec.name.clone().unwrap_or_else(|| "finite".into()), t.clone()),
        (None, Some(n), None) if n > 0 => Ok(FiniteGroupTable::cyclic(n)),
        (None, None, Some(k)) if (1..=3).contains(&k) => Ok(FiniteGroupTable::symmetric(k)),
        (None, None, Some(k)) => Err(Error::Input(format!("symmetric({k}) exceeds the supported order"))),
        _ => Err(Error::Input("finite instance needs exactly one of table, cyclic, symmetric".into())),
    }
}

pub fn build(spec: &InstanceSpec) -> Result<Loaded> {
    Ok(match spec {
        InstanceSpec::Finite(f) => Loaded::Group { group: finite_instance(finite_table(f)?)?, kind: "finite", presentation: None },
        InstanceSpec::Discrete(d) => {
            let kind = match d.group.as_str() {
                "integers" => DiscreteKind::Integers,
                "free-abelian" => DiscreteKind::FreeAbelian(
                    d.rank.ok_or_else(|| Error::Input("free-abelian needs rank".into()))?,
                ),
                "cyclic" => DiscreteKind::Moduli(vec![d.order.ok_or_else(|| Error::Input("cyclic needs order".into()))?]),
                "moduli" => DiscreteKind::Moduli(d.moduli.clone().ok_or_else(|| Error::Input("moduli needs a list".into()))?),
                other => return Err(Error::Input(format!("unknown discrete group {other:?}"))),
            };
            let presentation = DiscretePresentation::new(kind)?;
            let (group, _) = discrete_from_computable(presentation.clone());
            Loaded::Group { group, kind: "discrete", presentation: Some(presentation) }
        }
        InstanceSpec::Cantor {} => Loaded::Group { group: GroupInstance::new(CantorGroup), kind: "cantor", presentation: None },
        InstanceSpec::Product { left, right } => {
            let l = build(left)?.group().cloned().ok_or_else(|| Error::Input("product factor has no topology".into()))?;
            let r = build(right)?.group().cloned().ok_or_else(|| Error::Input("product factor has no topology".into()))?;
            Loaded::Group { group: GroupInstance::new(ProductGroup::new(l, r)), kind: "product", presentation: None }
        }
        InstanceSpec::CePresented(c) => {
            let schedule = SummandSchedule {
                prime: c.prime,
                power: c.power,
                removals: c.removals.iter().map(|r| (r.index, r.stage)).collect(),
            };
            Loaded::Ce(CePresented::new(schedule, c.width)?)
        }
        InstanceSpec::InverseLimit(s) => {
            let events = s
                .events
                .iter()
                .map(|e| {
                    let kernel = match (&e.kill, &e.kernel) {
                        (Some(c), None) => Kernel::KillSummand(*c),
                        (None, Some(k)) => Kernel::Explicit(k.iter().cloned().map(Element).collect()),
                        _ => return Err(Error::Input("event needs exactly one of kill, kernel".into())),
                    };
                    Ok(CollapseEvent { stage: e.stage, kernel })
                })
                .collect::<Result<Vec<_>>>()?;
            Loaded::Inverse(InverseSystem::new(s.orders.clone(), events)?)
        }
    })
}

/// Parsed file, its SHA-256 digest and the constructed instance.
#[derive(Clone, Debug)]
pub struct InstanceSource {
    pub file: InstanceFile,
    pub digest: String,
    pub loaded: Loaded,
}

impl InstanceSource {
    pub fn grid(&self) -> Result<Option<Vec<Rational>>> {
        self.file.grid.as_ref().map(|g| parse_grid_items(g)).transpose()
    }
}

pub fn parse_grid_items(items: &[String]) -> Result<Vec<Rational>> {
    items
        .iter()
        .map(|s| parse_rational(s).ok_or_else(|| Error::Input(format!("bad rational {s:?}; expected \"p/q\""))))
        .collect()
}

pub fn parse_str(text: &str) -> Result<InstanceSource> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Input(format!("instance file does not match the schema: {e}")))?;
    let digest = hex::encode(Sha256::digest(text.as_bytes()));
    let loaded = build(&file.spec)?;
    Ok(InstanceSource { file, digest, loaded })
}

pub fn load(path: &Path) -> Result<InstanceSource> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_parses() {
        for text in [
            r#"{"kind": "finite", "cyclic": 2}"#,
            r#"{"kind": "finite", "symmetric": 3}"#,
            r#"{"kind": "discrete", "group": "integers", "grid": ["1/2", "1", "2"]}"#,
            r#"{"kind": "discrete", "group": "cyclic", "order": 6}"#,
            r#"{"kind": "cantor"}"#,
            r#"{"kind": "product", "left": {"kind": "finite", "cyclic": 2}, "right": {"kind": "cantor"}}"#,
            r#"{"kind": "ce-presented", "prime": 2, "power": 1, "width": 2, "removals": [{"index": 1, "stage": 3}]}"#,
            r#"{"kind": "inverse-limit", "orders": [2, 2, 2], "events": [{"stage": 4, "kill": 2}]}"#,
        ] {
            parse_str(text).unwrap_or_else(|e| panic!("{text}: {e}"));
        }
    }

    #[test]
    fn schema_errors_are_input_errors() {
        assert!(matches!(parse_str(r#"{"kind": "torus"}"#), Err(Error::Input(_))));
        assert!(matches!(parse_str(r#"{"kind": "finite", "cyclic": 2, "extra": 1}"#), Err(Error::Input(_))));
        let src = parse_str(r#"{"kind": "cantor", "grid": ["1/0"]}"#).unwrap();
        assert!(src.grid().is_err());
    }
}
