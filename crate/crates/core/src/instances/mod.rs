//! Executable group instances.

pub mod cantor;
pub mod ce;
pub mod discrete;
pub mod finite;
pub mod product;
pub mod profinite;

use crate::group::GroupInstance;

pub use cantor::CantorGroup;
pub use ce::{check_congruence, CePresented, SummandSchedule};
pub use discrete::{
    discrete_from_computable, recover_presentation, DiscreteGroup, DiscreteKind, DiscreteMetric,
    DiscretePresentation, OperationTables,
};
pub use finite::{FiniteGroup, FiniteGroupTable};
pub use product::ProductGroup;
pub use profinite::{CollapseEvent, InverseSystem, Kernel};

pub fn finite_instance(t: FiniteGroupTable) -> crate::Result<GroupInstance> {
    Ok(GroupInstance::new(FiniteGroup::new(t)?))
}

pub fn c2() -> GroupInstance {
    finite_instance(FiniteGroupTable::cyclic(2)).expect("C2")
}

pub fn z6() -> GroupInstance {
    finite_instance(FiniteGroupTable::cyclic(6)).expect("Z6")
}

pub fn s3() -> GroupInstance {
    finite_instance(FiniteGroupTable::symmetric(3)).expect("S3")
}

/// `Z` with singleton basis in the order `{0}, {1}, {−1}, {2}, …`.
pub fn integers() -> GroupInstance {
    let p = DiscretePresentation::new(DiscreteKind::Integers).expect("Z");
    discrete_from_computable(p).0
}

pub fn cantor_group() -> GroupInstance {
    GroupInstance::new(CantorGroup)
}
