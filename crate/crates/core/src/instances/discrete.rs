//! Discrete groups with singleton bases, their 0/1 metric, and recovery of
//! the operation tables from that metric.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::group::{cantor_pair, cantor_unpair, CompletenessRegime, CompositeMap, Group, GroupInstance};
use crate::kernel::{CeSet, Rational, RightCut, Stage};
use crate::topology::{BasisIndex, Element, Ercs, OpenName, Space};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiscreteKind {
    Integers,
    FreeAbelian(usize),
    /// `Z_{m_0} ⊕ Z_{m_1} ⊕ …`
    Moduli(Vec<u64>),
}

/// Integer codes in the order `0, 1, −1, 2, −2, …`.
pub fn z_from_code(n: usize) -> i64 {
    let n = n as i64;
    if n % 2 == 1 {
        (n + 1) / 2
    } else {
        -(n / 2)
    }
}

pub fn z_to_code(z: i64) -> usize {
    if z > 0 {
        (2 * z - 1) as usize
    } else {
        (-2 * z) as usize
    }
}

/// A discrete presentation: normal forms are coordinate vectors, equality
/// is equality of normal forms, operations are coordinatewise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscretePresentation {
    pub kind: DiscreteKind,
}

impl DiscretePresentation {
    pub fn new(kind: DiscreteKind) -> Result<Self> {
        match &kind {
            DiscreteKind::FreeAbelian(0) => return Err(Error::Instance("rank must be positive".into())),
            DiscreteKind::Moduli(m) if m.is_empty() || m.contains(&0) => {
                return Err(Error::Instance("moduli must be positive and non-empty".into()))
            }
            _ => {}
        }
        Ok(DiscretePresentation { kind })
    }

    pub fn rank(&self) -> usize {
        match &self.kind {
            DiscreteKind::Integers => 1,
            DiscreteKind::FreeAbelian(r) => *r,
            DiscreteKind::Moduli(m) => m.len(),
        }
    }

    pub fn generators(&self) -> Vec<Element> {
        (0..self.rank())
            .map(|c| {
                let mut v = vec![0; self.rank()];
                v[c] = 1;
                self.normalize(&Element(v))
            })
            .collect()
    }

    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            DiscreteKind::Moduli(m) => Some(m.iter().map(|&x| x as usize).product()),
            _ => None,
        }
    }

    pub fn normalize(&self, x: &Element) -> Element {
        match &self.kind {
            DiscreteKind::Moduli(m) => {
                Element(x.0.iter().zip(m).map(|(&v, &q)| v.rem_euclid(q as i64)).collect())
            }
            _ => x.clone(),
        }
    }

    pub fn equal(&self, x: &Element, y: &Element) -> bool {
        self.normalize(x) == self.normalize(y)
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        self.normalize(&Element(x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect()))
    }

    pub fn neg(&self, x: &Element) -> Element {
        self.normalize(&Element(x.0.iter().map(|a| -a).collect()))
    }

    pub fn decode(&self, n: usize) -> Element {
        match &self.kind {
            DiscreteKind::Integers => Element::scalar(z_from_code(n)),
            DiscreteKind::FreeAbelian(r) => {
                let mut out = Vec::with_capacity(*r);
                let mut rest = n;
                for _ in 1..*r {
                    let (a, b) = cantor_unpair(rest);
                    out.push(z_from_code(a));
                    rest = b;
                }
                out.push(z_from_code(rest));
                Element(out)
            }
            DiscreteKind::Moduli(m) => {
                let mut rest = n;
                Element(
                    m.iter()
                        .map(|&q| {
                            let v = rest % q as usize;
                            rest /= q as usize;
                            v as i64
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn encode(&self, x: &Element) -> usize {
        match &self.kind {
            DiscreteKind::Integers => z_to_code(x.0[0]),
            DiscreteKind::FreeAbelian(r) => {
                let mut code = z_to_code(x.0[r - 1]);
                for c in (0..r - 1).rev() {
                    code = cantor_pair(z_to_code(x.0[c]), code);
                }
                code
            }
            DiscreteKind::Moduli(m) => {
                let x = self.normalize(x);
                x.0.iter().zip(m).rev().fold(0usize, |acc, (&v, &q)| acc * q as usize + v as usize)
            }
        }
    }

    /// Multiplication and inverse tables in basis-index order, for finite
    /// kinds.
    pub fn tables(&self) -> Option<OperationTables> {
        let n = self.order()?;
        let elems: Vec<Element> = (0..n).map(|i| self.decode(i)).collect();
        let mul = elems.iter().map(|x| elems.iter().map(|y| self.encode(&self.add(x, y))).collect()).collect();
        let inv = elems.iter().map(|x| self.encode(&self.neg(x))).collect();
        Some(OperationTables { mul, inv, identity: self.encode(&Element(vec![0; self.rank()])) })
    }
}

/// Operation tables over representatives `0..n`, with equality of indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperationTables {
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub identity: usize,
}

/// The group of a [`DiscretePresentation`] with the discrete topology.
#[derive(Clone, Debug)]
pub struct DiscreteGroup {
    presentation: DiscretePresentation,
}

impl DiscreteGroup {
    pub fn presentation(&self) -> &DiscretePresentation {
        &self.presentation
    }
}

impl Space for DiscreteGroup {
    fn label(&self) -> String {
        match &self.presentation.kind {
            DiscreteKind::Integers => "Z".into(),
            DiscreteKind::FreeAbelian(r) => format!("Z^{r}"),
            DiscreteKind::Moduli(m) => {
                m.iter().map(|q| format!("Z{q}")).collect::<Vec<_>>().join("+")
            }
        }
    }

    fn basis_count(&self) -> Option<usize> {
        self.presentation.order()
    }

    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex> {
        (i == j).then_some(i)
    }

    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool {
        cover.contains(&i)
    }

    fn contains(&self, i: BasisIndex, x: &Element) -> bool {
        x.0.len() == self.presentation.rank() && self.presentation.encode(x) == i.0
    }

    fn witness(&self, i: BasisIndex) -> Element {
        self.presentation.decode(i.0)
    }

    /// Integers in `[−2^t, 2^t]`, boxes `[−t, t]^r`, or the whole finite group.
    fn probe_points(&self, truncation: usize) -> Vec<Element> {
        let p = &self.presentation;
        match &p.kind {
            DiscreteKind::Integers => {
                let w = 1i64 << truncation.min(20);
                (-w..=w).map(Element::scalar).collect()
            }
            DiscreteKind::FreeAbelian(r) => {
                let t = truncation as i64;
                let mut pts = vec![Vec::new()];
                for _ in 0..*r {
                    pts = pts.into_iter().flat_map(|v: Vec<i64>| (-t..=t).map(move |z| [v.clone(), vec![z]].concat())).collect();
                }
                pts.into_iter().map(Element).collect()
            }
            DiscreteKind::Moduli(_) => (0..p.order().unwrap_or(0)).map(|i| p.decode(i)).collect(),
        }
    }
}

impl Group for DiscreteGroup {
    fn identity(&self) -> Element {
        Element(vec![0; self.presentation.rank()])
    }

    fn op(&self, x: &Element, y: &Element) -> Element {
        self.presentation.add(x, y)
    }

    fn inv(&self, x: &Element) -> Element {
        self.presentation.neg(x)
    }

    fn basic_product(&self, i: BasisIndex, j: BasisIndex) -> BasisIndex {
        let p = &self.presentation;
        BasisIndex(p.encode(&p.add(&p.decode(i.0), &p.decode(j.0))))
    }

    fn basic_inverse(&self, i: BasisIndex) -> BasisIndex {
        let p = &self.presentation;
        BasisIndex(p.encode(&p.neg(&p.decode(i.0))))
    }

    fn ercs(&self, me: &Arc<dyn Space>) -> Option<Ercs> {
        Some(Ercs::diagonal(me))
    }

    fn regime(&self) -> CompletenessRegime {
        CompletenessRegime::Discrete
    }
}

/// The computable 0/1 metric on the dense sequence `α_i = ` the element of `B_i`.
#[derive(Clone, Debug)]
pub struct DiscreteMetric {
    group: GroupInstance,
}

impl DiscreteMetric {
    pub fn distance(&self, i: usize, j: usize) -> Rational {
        if i == j {
            Rational::zero()
        } else {
            Rational::one()
        }
    }

    /// Right cut of `d(α_i, α_j)`: `2^{−t}` at stage `t` on the diagonal,
    /// the exact value `1` elsewhere.
    pub fn cut(&self, i: usize, j: usize) -> RightCut {
        RightCut::from_stages(move |t| {
            Some(if i == j { Rational::new(1.into(), num_bigint::BigInt::one() << t.0.min(4096)) } else { Rational::one() })
        })
    }

    /// Name of `B_d(α_center, r)`.
    pub fn ball(&self, center: usize, r: Rational) -> OpenName {
        let me = self.clone();
        OpenName::new(CeSet::from_cumulative(move |s| {
            (0..me.group.visible(s)).filter(|&j| me.distance(center, j) < r).map(BasisIndex).collect()
        }))
    }
}

/// The discrete instance of a computable presentation together with its
/// 0/1 metric.
pub fn discrete_from_computable(p: DiscretePresentation) -> (GroupInstance, DiscreteMetric) {
    let g = GroupInstance::new(DiscreteGroup { presentation: p });
    let metric = DiscreteMetric { group: g.clone() };
    (g, metric)
}

/// Reads the operation tables back off the metric. `r` must isolate the
/// identity; it is an input because no uniform procedure can choose it.
///
/// Inverses come from the multiplication preimage of `B_d(e, r)`, products
/// from the preimage of the same ball under `x·(y·z⁻¹)`.
pub fn recover_presentation(
    g: &GroupInstance,
    metric: &DiscreteMetric,
    r: &Rational,
    budget: Stage,
) -> Result<OperationTables> {
    let n = g.basis_count().ok_or_else(|| Error::Instance("recovery needs a finite group".into()))?;
    let e = (0..n)
        .find(|&i| g.contains(BasisIndex(i), &g.identity()))
        .ok_or_else(|| Error::Instance("identity not found".into()))?;
    let ball = metric.ball(e, r.clone()).at(budget);
    let pairs = g.mul_preimage().eval(&ball, budget);
    let mut inv = Vec::with_capacity(n);
    for i in 0..n {
        let j = pairs
            .iter()
            .find(|(a, _)| a.0 == i)
            .map(|(_, b)| b.0)
            .ok_or(Error::NotYet(budget.0))?;
        inv.push(j);
    }
    let mut mul = vec![vec![0; n]; n];
    for (x, row) in mul.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            *cell = (0..n)
                .find(|&z| g.image_within(CompositeMap::Triple, &[BasisIndex(x), BasisIndex(y), BasisIndex(z)], &ball))
                .ok_or(Error::NotYet(budget.0))?;
        }
    }
    Ok(OperationTables { mul, inv, identity: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_codes() {
        let order: Vec<i64> = (0..5).map(z_from_code).collect();
        assert_eq!(order, vec![0, 1, -1, 2, -2]);
        for z in -50..50 {
            assert_eq!(z_from_code(z_to_code(z)), z);
        }
    }

    #[test]
    fn free_abelian_codes_round_trip() {
        let p = DiscretePresentation::new(DiscreteKind::FreeAbelian(2)).unwrap();
        for n in 0..300 {
            assert_eq!(p.encode(&p.decode(n)), n);
        }
    }

    #[test]
    fn z6_product_two_three() {
        let p = DiscretePresentation::new(DiscreteKind::Moduli(vec![6])).unwrap();
        let t = p.tables().unwrap();
        assert_eq!(t.mul[2][3], 5);
        assert_eq!(t.inv[1], 5);
    }
}
