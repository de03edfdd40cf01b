use std::collections::BTreeSet;
use std::sync::Arc;

use crate::group::{CompletenessRegime, Group, GroupInstance, ProductSpace};
use crate::topology::{BasisIndex, Element, Ercs, Space};

/// `G × H` with the rectangle basis and componentwise operations.
#[derive(Clone, Debug)]
pub struct ProductGroup {
    space: ProductSpace,
    left: GroupInstance,
    right: GroupInstance,
}

impl std::fmt::Debug for ProductSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

impl ProductGroup {
    pub fn new(left: GroupInstance, right: GroupInstance) -> Self {
        let space = ProductSpace::new(Arc::clone(left.space()), Arc::clone(right.space()));
        ProductGroup { space, left, right }
    }
}

impl Space for ProductGroup {
    fn label(&self) -> String {
        self.space.label()
    }
    fn basis_count(&self) -> Option<usize> {
        self.space.basis_count()
    }
    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex> {
        self.space.meet(i, j)
    }
    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool {
        self.space.within(i, cover)
    }
    fn contains(&self, i: BasisIndex, x: &Element) -> bool {
        self.space.contains(i, x)
    }
    fn witness(&self, i: BasisIndex) -> Element {
        self.space.witness(i)
    }
    fn probe_points(&self, truncation: usize) -> Vec<Element> {
        self.space.probe_points(truncation)
    }
}

impl Group for ProductGroup {
    fn identity(&self) -> Element {
        ProductSpace::join(&self.left.identity(), &self.right.identity())
    }

    fn op(&self, x: &Element, y: &Element) -> Element {
        let ((a, b), (c, d)) = (ProductSpace::split(x), ProductSpace::split(y));
        ProductSpace::join(&self.left.op(&a, &c), &self.right.op(&b, &d))
    }

    fn inv(&self, x: &Element) -> Element {
        let (a, b) = ProductSpace::split(x);
        ProductSpace::join(&self.left.inv(&a), &self.right.inv(&b))
    }

    fn basic_product(&self, i: BasisIndex, j: BasisIndex) -> BasisIndex {
        let ((a, b), (c, d)) = (self.space.unpair(i), self.space.unpair(j));
        self.space.pair(self.left.basic_product(a, c), self.right.basic_product(b, d))
    }

    fn basic_inverse(&self, i: BasisIndex) -> BasisIndex {
        let (a, b) = self.space.unpair(i);
        self.space.pair(self.left.basic_inverse(a), self.right.basic_inverse(b))
    }

    /// Rectangles of compact basics are compact, so the diagonal ercs
    /// applies when both factors carry one with compact basics.
    fn ercs(&self, me: &Arc<dyn Space>) -> Option<Ercs> {
        let compact_basics = |g: &GroupInstance| g.ercs().is_some() && g.regime() != CompletenessRegime::None;
        (compact_basics(&self.left) && compact_basics(&self.right)).then(|| Ercs::diagonal(me))
    }

    fn regime(&self) -> CompletenessRegime {
        use CompletenessRegime::*;
        match (self.left.regime(), self.right.regime()) {
            (Finite, Finite) => Finite,
            (Finite | Discrete, Finite | Discrete) => Discrete,
            (Finite | Compact, Finite | Compact) => Compact,
            (None, _) | (_, None) => None,
            _ => None,
        }
    }
}
