//! A c.e.-presented discrete abelian group: `⊕_{c<width} Z_{p^k}` with
//! equality enumerated from a removal schedule.
//!
//! Removing coordinate `c` at stage `s` declares every element supported on
//! removed coordinates equal to zero from budget `s + 1` on. Operations stay
//! computable on representatives throughout; only the metric changes.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::group::GroupInstance;
use crate::instances::discrete::{discrete_from_computable, DiscreteKind, DiscretePresentation};
use crate::kernel::{Rational, RightCut, Stage};
use crate::topology::Element;

/// Stage-indexed removals "coordinate `index` leaves the support set at `stage`".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummandSchedule {
    pub prime: u64,
    pub power: u32,
    pub removals: Vec<(usize, u64)>,
}

impl SummandSchedule {
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.power)
    }

    /// Earliest removal stage of a coordinate; later repeats are ignored.
    pub fn removed_at(&self, index: usize) -> Option<u64> {
        self.removals.iter().filter(|(i, _)| *i == index).map(|&(_, s)| s).min()
    }
}

#[derive(Clone, Debug)]
pub struct CePresented {
    pub schedule: SummandSchedule,
    pub width: usize,
    group: GroupInstance,
    presentation: DiscretePresentation,
}

impl CePresented {
    pub fn new(schedule: SummandSchedule, width: usize) -> Result<Self> {
        if width == 0 || schedule.prime < 2 || schedule.power == 0 {
            return Err(Error::Instance("width, prime and power must be positive".into()));
        }
        if let Some(&(i, _)) = schedule.removals.iter().find(|(i, _)| *i >= width) {
            return Err(Error::Instance(format!("removal index {i} outside width {width}")));
        }
        let kind = DiscreteKind::Moduli(vec![schedule.modulus(); width]);
        let presentation = DiscretePresentation::new(kind)?;
        let (group, _) = discrete_from_computable(presentation.clone());
        Ok(CePresented { schedule, width, group, presentation })
    }

    /// The group on representatives, with its discrete topology.
    pub fn group(&self) -> &GroupInstance {
        &self.group
    }

    pub fn elements(&self) -> Vec<Element> {
        (0..self.presentation.order().unwrap_or(0)).map(|i| self.presentation.decode(i)).collect()
    }

    /// Have `x` and `y` been declared equal by stage `t`, that is, is every
    /// coordinate where they differ removed at a stage `<= t`?
    pub fn merged_at(&self, x: &Element, y: &Element, t: Stage) -> bool {
        x.0.iter().zip(&y.0).enumerate().all(|(c, (a, b))| {
            a == b || self.schedule.removed_at(c).is_some_and(|s| s <= t.0)
        })
    }

    /// Equality as enumerated by budget `s` (stages `< s`).
    pub fn equal_by(&self, x: &Element, y: &Element, budget: Stage) -> bool {
        budget.0 > 0 && self.merged_at(x, y, Stage(budget.0 - 1))
    }

    /// Right cut of the 0/1 metric of the quotient: `2^{−t}` at stage `t`
    /// once the pair is merged, `1` before.
    pub fn distance(&self, x: &Element, y: &Element) -> RightCut {
        let (me, x, y) = (self.clone(), x.clone(), y.clone());
        RightCut::from_stages(move |t| {
            Some(if me.merged_at(&x, &y, t) {
                Rational::new(BigInt::one(), BigInt::one() << t.0.min(4096))
            } else {
                Rational::one()
            })
        })
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        self.presentation.add(x, y)
    }

    pub fn neg(&self, x: &Element) -> Element {
        self.presentation.neg(x)
    }
}

/// Outcome of the exhaustive congruence check at one budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceReport {
    pub budget: Stage,
    pub equivalence: bool,
    pub compatible: bool,
    pub merges_only: bool,
}

impl CongruenceReport {
    pub fn holds(&self) -> bool {
        self.equivalence && self.compatible && self.merges_only
    }
}

/// Checks that stage-`s` equality is an equivalence, respects `+` and `−`,
/// and contains stage-`(s−1)` equality.
pub fn check_congruence(g: &CePresented, budget: Stage) -> CongruenceReport {
    let xs = g.elements();
    let eq = |a: &Element, b: &Element| a == b || g.equal_by(a, b, budget);
    let mut equivalence = true;
    let mut compatible = true;
    let mut merges_only = true;
    for x in &xs {
        for y in &xs {
            let xy = eq(x, y);
            if xy != eq(y, x) {
                equivalence = false;
            }
            if budget.0 > 0 && (x == y || g.equal_by(x, y, Stage(budget.0 - 1))) && !xy {
                merges_only = false;
            }
            if !xy {
                continue;
            }
            if !eq(&g.neg(x), &g.neg(y)) {
                compatible = false;
            }
            for z in &xs {
                if eq(y, z) && !eq(x, z) {
                    equivalence = false;
                }
                if !eq(&g.add(x, z), &g.add(y, z)) {
                    compatible = false;
                }
            }
        }
    }
    CongruenceReport { budget, equivalence, compatible, merges_only }
}
