//! An inverse system of finite abelian groups with scheduled collapses.
//!
//! `F_i = Z_{o_0} × … × Z_{o_i}` with coordinate projections as bonding maps,
//! whose limit carries the product ultrametric `d(x, y) = 2^{−m}`, `m` the
//! first coordinate where `x` and `y` differ. A collapse event at stage `s`
//! adds a subgroup to the kernel; from then on the right cuts report the
//! quotient ultrametric, and pairs in one coset get bounds `2^{−t}` at every
//! later stage `t`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::kernel::{Rational, RightCut, Stage};
use crate::topology::Element;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// Every element supported on one coordinate.
    KillSummand(usize),
    /// An explicit finite subgroup, validated on construction.
    Explicit(Vec<Element>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseEvent {
    pub stage: u64,
    pub kernel: Kernel,
}

#[derive(Clone, Debug)]
pub struct InverseSystem {
    orders: Vec<u64>,
    events: Vec<CollapseEvent>,
    elements: Vec<Element>,
    /// Per event, sorted by stage: the cumulative kernel after it.
    kernels: Vec<(u64, BTreeSet<Element>)>,
}

impl InverseSystem {
    pub fn new(orders: Vec<u64>, mut events: Vec<CollapseEvent>) -> Result<Self> {
        if orders.is_empty() || orders.iter().any(|&o| o < 2) {
            return Err(Error::Instance("summand orders must be at least 2".into()));
        }
        if orders.iter().map(|&o| o as usize).product::<usize>() > 1 << 12 {
            return Err(Error::Instance("inverse system too large for exhaustive checks".into()));
        }
        let mut elements = vec![Vec::new()];
        for &o in &orders {
            elements = elements
                .into_iter()
                .flat_map(|v: Vec<i64>| (0..o as i64).map(move |a| [v.clone(), vec![a]].concat()))
                .collect();
        }
        let elements: Vec<Element> = elements.into_iter().map(Element).collect();
        events.sort_by_key(|e| e.stage);
        let mut sys = InverseSystem { orders, events: events.clone(), elements, kernels: Vec::new() };
        sys.check_bonding()?;
        let mut acc: BTreeSet<Element> = BTreeSet::from([sys.zero()]);
        for ev in &events {
            let gens = sys.kernel_elements(&ev.kernel)?;
            acc.extend(gens);
            acc = sys.closure(&acc);
            sys.kernels.push((ev.stage, acc.clone()));
        }
        Ok(sys)
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn events(&self) -> &[CollapseEvent] {
        &self.events
    }

    /// The special points: every eventually-zero sequence, here the whole
    /// finite limit, in mixed-radix order over the coordinates.
    pub fn points(&self) -> &[Element] {
        &self.elements
    }

    pub fn zero(&self) -> Element {
        Element(vec![0; self.orders.len()])
    }

    pub fn add(&self, x: &Element, y: &Element) -> Element {
        Element(x.0.iter().zip(&y.0).zip(&self.orders).map(|((a, b), &o)| (a + b).rem_euclid(o as i64)).collect())
    }

    pub fn neg(&self, x: &Element) -> Element {
        Element(x.0.iter().zip(&self.orders).map(|(a, &o)| (-a).rem_euclid(o as i64)).collect())
    }

    /// The projection `F_{i+1} → F_i` applied to a level-`(i+1)` element.
    pub fn bond(&self, x: &[i64]) -> Vec<i64> {
        x[..x.len() - 1].to_vec()
    }

    fn check_bonding(&self) -> Result<()> {
        for level in 1..self.orders.len() {
            let xs: Vec<Vec<i64>> = self.elements.iter().map(|e| e.0[..=level].to_vec()).collect();
            for x in &xs {
                for y in &xs {
                    let sum: Vec<i64> =
                        x.iter().zip(y).zip(&self.orders).map(|((a, b), &o)| (a + b).rem_euclid(o as i64)).collect();
                    let lhs = self.bond(&sum);
                    let (bx, by) = (self.bond(x), self.bond(y));
                    let rhs: Vec<i64> =
                        bx.iter().zip(&by).zip(&self.orders).map(|((a, b), &o)| (a + b).rem_euclid(o as i64)).collect();
                    if lhs != rhs {
                        return Err(Error::Instance(format!("bonding map at level {level} is not a homomorphism")));
                    }
                }
            }
        }
        Ok(())
    }

    fn kernel_elements(&self, k: &Kernel) -> Result<BTreeSet<Element>> {
        match k {
            Kernel::KillSummand(c) => {
                if *c >= self.orders.len() {
                    return Err(Error::Instance(format!("summand {c} out of range")));
                }
                Ok(self.elements.iter().filter(|x| x.0.iter().enumerate().all(|(i, &v)| i == *c || v == 0)).cloned().collect())
            }
            Kernel::Explicit(list) => {
                let set: BTreeSet<Element> = list.iter().map(|x| self.add(x, &self.zero())).collect();
                if let Some(bad) = list.iter().find(|x| x.0.len() != self.orders.len()) {
                    return Err(Error::NotSubgroup(bad.clone()));
                }
                if !set.contains(&self.zero()) {
                    return Err(Error::NotSubgroup(self.zero()));
                }
                for x in &set {
                    if !set.contains(&self.neg(x)) {
                        return Err(Error::NotSubgroup(x.clone()));
                    }
                    for y in &set {
                        if !set.contains(&self.add(x, y)) {
                            return Err(Error::NotSubgroup(self.add(x, y)));
                        }
                    }
                }
                Ok(set)
            }
        }
    }

    fn closure(&self, gens: &BTreeSet<Element>) -> BTreeSet<Element> {
        let mut set = gens.clone();
        loop {
            let mut next = set.clone();
            for x in &set {
                for y in &set {
                    next.insert(self.add(x, y));
                }
            }
            if next.len() == set.len() {
                return set;
            }
            set = next;
        }
    }

    /// The kernel in force at stage `t`.
    pub fn kernel_at(&self, t: Stage) -> BTreeSet<Element> {
        self.kernels
            .iter()
            .rev()
            .find(|(s, _)| *s <= t.0)
            .map_or_else(|| BTreeSet::from([self.zero()]), |(_, k)| k.clone())
    }

    /// Are `x` and `y` in one coset of the stage-`t` kernel?
    pub fn merged_at(&self, x: &Element, y: &Element, t: Stage) -> bool {
        self.kernel_at(t).contains(&self.add(y, &self.neg(x)))
    }

    /// The product ultrametric value `d(0, z)`.
    pub fn norm(&self, z: &Element) -> Rational {
        match z.0.iter().position(|&v| v != 0) {
            None => Rational::zero(),
            Some(m) => Rational::new(BigInt::one(), BigInt::one() << m),
        }
    }

    /// Quotient ultrametric at stage `t`: `min_{u ∈ U_t} d(0, y − x + u)`.
    pub fn quotient_distance(&self, x: &Element, y: &Element, t: Stage) -> Rational {
        let z = self.add(y, &self.neg(x));
        self.kernel_at(t).iter().map(|u| self.norm(&self.add(&z, u))).min().unwrap_or_else(Rational::zero)
    }

    /// Right cut of the final distance between special points.
    pub fn distance(&self, i: usize, j: usize) -> RightCut {
        let me = self.clone();
        RightCut::from_stages(move |t| {
            let (x, y) = (&me.elements[i], &me.elements[j]);
            let q = me.quotient_distance(x, y, t);
            Some(if q.is_zero() { Rational::new(BigInt::one(), BigInt::one() << t.0.min(4096)) } else { q })
        })
    }

    /// A cover by radius-1 balls, one per value of coordinate 0, each
    /// centred at the first special point with that value.
    pub fn cover(&self) -> Vec<(usize, Rational)> {
        (0..self.orders[0] as i64)
            .filter_map(|v| self.elements.iter().position(|x| x.0[0] == v))
            .map(|c| (c, Rational::one()))
            .collect()
    }

    /// Does every special point have a cover centre with bound `< radius`
    /// by budget `b`?
    pub fn cover_valid_at(&self, cover: &[(usize, Rational)], budget: Stage) -> bool {
        (0..self.elements.len()).all(|y| {
            cover.iter().any(|(c, r)| self.distance(*c, y).best_bound(budget).upper().is_some_and(|u| u < r))
        })
    }

    /// Operations on representatives respect stage-`t` equality.
    pub fn operations_consistent_at(&self, t: Stage) -> bool {
        let k = self.kernel_at(t);
        let same = |a: &Element, b: &Element| k.contains(&self.add(b, &self.neg(a)));
        let els = &self.elements;
        els.iter().all(|x| {
            els.iter().filter(|x2| same(x, x2)).all(|x2| {
                same(&self.neg(x), &self.neg(x2))
                    && els.iter().all(|y| {
                        els.iter().filter(|y2| same(y, y2)).all(|y2| same(&self.add(x, y), &self.add(x2, y2)))
                    })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_subgroup_kernel_rejected() {
        let ev = CollapseEvent { stage: 1, kernel: Kernel::Explicit(vec![Element(vec![0, 0, 0]), Element(vec![0, 1, 0])]) };
        let err = InverseSystem::new(vec![2, 3, 2], vec![ev]).unwrap_err();
        assert!(matches!(err, Error::NotSubgroup(_)));
    }

    #[test]
    fn no_events_is_the_product_ultrametric() {
        let sys = InverseSystem::new(vec![2, 3, 2], vec![]).unwrap();
        let pts = sys.points();
        for (i, x) in pts.iter().enumerate() {
            for (j, y) in pts.iter().enumerate() {
                let z = sys.add(y, &sys.neg(x));
                if i != j {
                    assert_eq!(sys.distance(i, j).best_bound(Stage(50)), crate::kernel::Bound::Upper(sys.norm(&z)));
                }
            }
        }
    }
}
