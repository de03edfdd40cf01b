//! Computable topological groups.
//!
//! Multiplication and inverse act on basic sets directly: in every shipped
//! instance `B_i·B_j` and `B_i⁻¹` are again basic, so the preimage operators
//! reduce to one inclusion test per candidate tuple.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::kernel::{CeSet, EnumOperator, Stage};
use crate::topology::{BasisIndex, Element, Ercs, OpenName, PointName, Space, SpacePresentation};

/// Which classical fact, if any, makes the metrics complete.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompletenessRegime {
    Finite,
    Discrete,
    Compact,
    Abelian,
    None,
}

pub trait Group: Space {
    fn identity(&self) -> Element;

    fn op(&self, x: &Element, y: &Element) -> Element;

    fn inv(&self, x: &Element) -> Element;

    /// Index of `B_i · B_j`.
    fn basic_product(&self, i: BasisIndex, j: BasisIndex) -> BasisIndex;

    /// Index of `B_i⁻¹`.
    fn basic_inverse(&self, i: BasisIndex) -> BasisIndex;

    /// An ercs, for locally compact instances. `me` is the instance itself
    /// as a shared space.
    fn ercs(&self, _me: &Arc<dyn Space>) -> Option<Ercs> {
        None
    }

    fn regime(&self) -> CompletenessRegime;
}

/// The composite maps the metric constructions search preimages of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CompositeMap {
    Mul,
    Inv,
    /// `f(x, y) = x·y⁻¹`
    Quotient,
    /// `f*(x, y) = x⁻¹·y`
    LeftQuotient,
    /// `x·(y·z⁻¹)`
    Triple,
}

impl CompositeMap {
    pub const ALL: [CompositeMap; 5] = [
        CompositeMap::Mul,
        CompositeMap::Inv,
        CompositeMap::Quotient,
        CompositeMap::LeftQuotient,
        CompositeMap::Triple,
    ];

    pub fn arity(self) -> usize {
        match self {
            CompositeMap::Inv => 1,
            CompositeMap::Mul | CompositeMap::Quotient | CompositeMap::LeftQuotient => 2,
            CompositeMap::Triple => 3,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            CompositeMap::Mul => "mul",
            CompositeMap::Inv => "inv",
            CompositeMap::Quotient => "quotient",
            CompositeMap::LeftQuotient => "left-quotient",
            CompositeMap::Triple => "triple",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        CompositeMap::ALL.into_iter().find(|m| m.tag() == tag)
    }

    /// Pointwise action, for extensional checks.
    pub fn apply(self, g: &dyn Group, xs: &[Element]) -> Element {
        match self {
            CompositeMap::Mul => g.op(&xs[0], &xs[1]),
            CompositeMap::Inv => g.inv(&xs[0]),
            CompositeMap::Quotient => g.op(&xs[0], &g.inv(&xs[1])),
            CompositeMap::LeftQuotient => g.op(&g.inv(&xs[0]), &xs[1]),
            CompositeMap::Triple => g.op(&xs[0], &g.op(&xs[1], &g.inv(&xs[2]))),
        }
    }
}

/// A group instance shared across constructions.
#[derive(Clone)]
pub struct GroupInstance {
    group: Arc<dyn Group>,
    space: Arc<dyn Space>,
    ercs: Option<Ercs>,
}

impl fmt::Debug for GroupInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupInstance({})", self.group.label())
    }
}

impl Deref for GroupInstance {
    type Target = dyn Group;
    fn deref(&self) -> &Self::Target {
        self.group.as_ref()
    }
}

impl GroupInstance {
    pub fn new<G: Group + 'static>(g: G) -> Self {
        let arc = Arc::new(g);
        let space: Arc<dyn Space> = arc.clone();
        let ercs = arc.ercs(&space);
        GroupInstance { group: arc, space, ercs }
    }

    pub fn space(&self) -> &Arc<dyn Space> {
        &self.space
    }

    pub fn presentation(&self) -> SpacePresentation {
        SpacePresentation::new(Arc::clone(&self.space))
    }

    pub fn ercs(&self) -> Option<&Ercs> {
        self.ercs.as_ref()
    }

    pub fn point_name(&self, x: &Element) -> PointName {
        PointName::of(&self.space, x)
    }

    pub fn identity_name(&self) -> PointName {
        self.point_name(&self.identity())
    }

    pub fn whole(&self) -> OpenName {
        OpenName::whole(&self.space)
    }

    /// Index of the basic image of a tuple under a composite map.
    pub fn image(&self, map: CompositeMap, tuple: &[BasisIndex]) -> BasisIndex {
        let g = self.group.as_ref();
        match map {
            CompositeMap::Mul => g.basic_product(tuple[0], tuple[1]),
            CompositeMap::Inv => g.basic_inverse(tuple[0]),
            CompositeMap::Quotient => g.basic_product(tuple[0], g.basic_inverse(tuple[1])),
            CompositeMap::LeftQuotient => g.basic_product(g.basic_inverse(tuple[0]), tuple[1]),
            CompositeMap::Triple => {
                g.basic_product(tuple[0], g.basic_product(tuple[1], g.basic_inverse(tuple[2])))
            }
        }
    }

    /// Certifies `map(B_tuple) ⊆ ⋃ cover`.
    pub fn image_within(&self, map: CompositeMap, tuple: &[BasisIndex], cover: &BTreeSet<BasisIndex>) -> bool {
        self.group.within(self.image(map, tuple), cover)
    }

    /// `(B_i B_i⁻¹)³`, the image of `B` under the sextuple product.
    pub fn cubed_quotient(&self, i: BasisIndex) -> BasisIndex {
        let q = self.image(CompositeMap::Quotient, &[i, i]);
        self.group.basic_product(self.group.basic_product(q, q), q)
    }

    /// Multiplication preimage: basis pairs whose product lies in the input.
    pub fn mul_preimage(&self) -> EnumOperator<BasisIndex, (BasisIndex, BasisIndex)> {
        let g = self.clone();
        EnumOperator::new(move |target, s| {
            let w = tuple_window(g.visible(s), 2, s);
            let mut out = BTreeSet::new();
            for i in 0..w {
                for j in 0..w {
                    let (i, j) = (BasisIndex(i), BasisIndex(j));
                    if g.image_within(CompositeMap::Mul, &[i, j], target) {
                        out.insert((i, j));
                    }
                }
            }
            out
        })
    }

    /// Inverse preimage: basic sets whose inverse lies in the input.
    pub fn inv_preimage(&self) -> EnumOperator<BasisIndex, BasisIndex> {
        let g = self.clone();
        EnumOperator::new(move |target, s| {
            (0..g.visible(s))
                .map(BasisIndex)
                .filter(|&i| g.image_within(CompositeMap::Inv, &[i], target))
                .collect()
        })
    }
}

/// Side length of the index cube searched for `arity`-tuples at stage `s`:
/// the largest `w` with `w^arity <= s`, capped by the visible indices.
pub fn tuple_window(visible: usize, arity: usize, stage: Stage) -> usize {
    let s = stage.0;
    let mut w: u64 = 0;
    while (w + 1).checked_pow(arity as u32).is_some_and(|p| p <= s) {
        w += 1;
    }
    visible.min(usize::try_from(w).unwrap_or(usize::MAX))
}

/// Tuples whose image under `map` lies inside `target`.
pub fn op_image_pairs(g: &GroupInstance, target: &OpenName, map: CompositeMap) -> CeSet<Vec<BasisIndex>> {
    let (g, target) = (g.clone(), target.clone());
    CeSet::from_cumulative(move |s| {
        let cover = target.at(s);
        let w = tuple_window(g.visible(s), map.arity(), s);
        let mut out = BTreeSet::new();
        let mut tuple = vec![0usize; map.arity()];
        if w == 0 {
            return out;
        }
        loop {
            let t: Vec<BasisIndex> = tuple.iter().copied().map(BasisIndex).collect();
            if g.image_within(map, &t, &cover) {
                out.insert(t);
            }
            // odometer over w^arity
            let mut pos = 0;
            loop {
                if pos == tuple.len() {
                    return out;
                }
                tuple[pos] += 1;
                if tuple[pos] < w {
                    break;
                }
                tuple[pos] = 0;
                pos += 1;
            }
        }
    })
}

/// Name of `U⁻¹`: the inverse preimage of `U`, since `(U⁻¹)⁻¹ = U`.
pub fn open_inverse(g: &GroupInstance, u: &OpenName) -> OpenName {
    OpenName::new(g.inv_preimage().apply(&u.0))
}

/// Name of `U·V`, listing `B_i·B_j` for enumerated `B_i ⊆ U`, `B_j ⊆ V`.
pub fn open_product(g: &GroupInstance, u: &OpenName, v: &OpenName) -> OpenName {
    let (g, u, v) = (g.clone(), u.clone(), v.clone());
    OpenName::new(CeSet::from_cumulative(move |s| {
        let (lu, lv) = (u.at(s), v.at(s));
        let mut out = BTreeSet::new();
        for &i in &lu {
            for &j in &lv {
                out.insert(g.basic_product(i, j));
            }
        }
        out
    }))
}

/// Basis of `X × Y` indexed by pairs.
#[derive(Clone)]
pub struct ProductSpace {
    pub left: Arc<dyn Space>,
    pub right: Arc<dyn Space>,
}

impl ProductSpace {
    pub fn new(left: Arc<dyn Space>, right: Arc<dyn Space>) -> Self {
        ProductSpace { left, right }
    }

    pub fn pair(&self, a: BasisIndex, b: BasisIndex) -> BasisIndex {
        match (self.left.basis_count(), self.right.basis_count()) {
            (Some(na), _) => BasisIndex(a.0 + na * b.0),
            (None, Some(nb)) => BasisIndex(b.0 + nb * a.0),
            (None, None) => BasisIndex(cantor_pair(a.0, b.0)),
        }
    }

    pub fn unpair(&self, n: BasisIndex) -> (BasisIndex, BasisIndex) {
        match (self.left.basis_count(), self.right.basis_count()) {
            (Some(na), _) => (BasisIndex(n.0 % na), BasisIndex(n.0 / na)),
            (None, Some(nb)) => (BasisIndex(n.0 / nb), BasisIndex(n.0 % nb)),
            (None, None) => {
                let (a, b) = cantor_unpair(n.0);
                (BasisIndex(a), BasisIndex(b))
            }
        }
    }

    pub fn join(x: &Element, y: &Element) -> Element {
        let mut v = Vec::with_capacity(x.0.len() + y.0.len() + 1);
        v.push(x.0.len() as i64);
        v.extend_from_slice(&x.0);
        v.extend_from_slice(&y.0);
        Element(v)
    }

    pub fn split(z: &Element) -> (Element, Element) {
        let n = z.0.first().copied().unwrap_or(0) as usize;
        let body = &z.0[1.min(z.0.len())..];
        let n = n.min(body.len());
        (Element(body[..n].to_vec()), Element(body[n..].to_vec()))
    }

    /// Every point of a basic set of a finite space.
    fn points_of(space: &dyn Space, i: BasisIndex) -> Vec<Element> {
        space.probe_points(0).into_iter().filter(|x| space.contains(i, x)).collect()
    }
}

impl Space for ProductSpace {
    fn label(&self) -> String {
        format!("{} x {}", self.left.label(), self.right.label())
    }

    fn basis_count(&self) -> Option<usize> {
        Some(self.left.basis_count()? * self.right.basis_count()?)
    }

    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex> {
        let ((a, b), (c, d)) = (self.unpair(i), self.unpair(j));
        Some(self.pair(self.left.meet(a, c)?, self.right.meet(b, d)?))
    }

    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool {
        let (a, b) = self.unpair(i);
        let single = cover.iter().any(|&c| {
            let (ca, cb) = self.unpair(c);
            self.left.within(a, &BTreeSet::from([ca])) && self.right.within(b, &BTreeSet::from([cb]))
        });
        if single || self.left.basis_count().is_none() || self.right.basis_count().is_none() {
            return single;
        }
        let (xs, ys) = (Self::points_of(self.left.as_ref(), a), Self::points_of(self.right.as_ref(), b));
        xs.iter().all(|x| {
            ys.iter().all(|y| {
                let z = Self::join(x, y);
                cover.iter().any(|&c| self.contains(c, &z))
            })
        })
    }

    fn contains(&self, i: BasisIndex, z: &Element) -> bool {
        let (a, b) = self.unpair(i);
        let (x, y) = Self::split(z);
        self.left.contains(a, &x) && self.right.contains(b, &y)
    }

    fn witness(&self, i: BasisIndex) -> Element {
        let (a, b) = self.unpair(i);
        Self::join(&self.left.witness(a), &self.right.witness(b))
    }

    fn probe_points(&self, truncation: usize) -> Vec<Element> {
        let (xs, ys) = (self.left.probe_points(truncation), self.right.probe_points(truncation));
        xs.iter().flat_map(|x| ys.iter().map(move |y| Self::join(x, y))).collect()
    }
}

pub fn cantor_pair(a: usize, b: usize) -> usize {
    (a + b) * (a + b + 1) / 2 + b
}

pub fn cantor_unpair(n: usize) -> (usize, usize) {
    let mut w = 0usize;
    while (w + 1) * (w + 2) / 2 <= n {
        w += 1;
    }
    let b = n - w * (w + 1) / 2;
    (w - b, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_round_trips() {
        for n in 0..200 {
            let (a, b) = cantor_unpair(n);
            assert_eq!(cantor_pair(a, b), n);
        }
    }

    #[test]
    fn window_grows_with_stage() {
        assert_eq!(tuple_window(100, 2, Stage(0)), 0);
        assert_eq!(tuple_window(100, 2, Stage(9)), 3);
        assert_eq!(tuple_window(100, 3, Stage(27)), 3);
        assert_eq!(tuple_window(2, 2, Stage(1000)), 2);
    }

    #[test]
    fn map_tags_round_trip() {
        for m in CompositeMap::ALL {
            assert_eq!(CompositeMap::from_tag(m.tag()), Some(m));
        }
        assert_eq!(CompositeMap::from_tag("conjugate"), None);
    }
}
