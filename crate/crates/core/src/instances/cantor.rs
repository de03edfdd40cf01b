//! `Z_2^ω` with the cylinder basis.
//!
//! Index `n` is the cylinder of the binary string obtained from `n + 1` by
//! dropping its leading one: `0 ↦ ""`, `1 ↦ "0"`, `2 ↦ "1"`, `3 ↦ "00"`. A
//! describable point is an eventually-zero sequence stored as its bits up to
//! the last one.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::group::{CompletenessRegime, Group};
use crate::topology::{BasisIndex, Element, Ercs, Space};

pub fn cylinder_bits(i: BasisIndex) -> Vec<u8> {
    let n = i.0 as u64 + 1;
    let len = 63 - n.leading_zeros();
    (0..len).rev().map(|b| (n >> b & 1) as u8).collect()
}

pub fn cylinder_index(bits: &[u8]) -> BasisIndex {
    let n = bits.iter().fold(1u64, |acc, &b| acc << 1 | b as u64);
    BasisIndex((n - 1) as usize)
}

/// The point `bits·0^ω`.
pub fn point(bits: &[u8]) -> Element {
    let mut v: Vec<i64> = bits.iter().map(|&b| b as i64).collect();
    while v.last() == Some(&0) {
        v.pop();
    }
    Element(v)
}

fn bit(x: &Element, k: usize) -> u8 {
    x.0.get(k).copied().unwrap_or(0) as u8
}

#[derive(Clone, Debug, Default)]
pub struct CantorGroup;

impl CantorGroup {
    /// Does the cylinder of `u` lie in the union of the cylinders of `cover`?
    fn covered(u: &[u8], cover: &[Vec<u8>]) -> bool {
        if cover.iter().any(|c| u.starts_with(c)) {
            return true;
        }
        if !cover.iter().any(|c| c.starts_with(u)) {
            return false;
        }
        let mut left = u.to_vec();
        left.push(0);
        let mut right = u.to_vec();
        right.push(1);
        Self::covered(&left, cover) && Self::covered(&right, cover)
    }
}

impl Space for CantorGroup {
    fn label(&self) -> String {
        "Z2^omega".into()
    }

    fn basis_count(&self) -> Option<usize> {
        None
    }

    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex> {
        let (u, v) = (cylinder_bits(i), cylinder_bits(j));
        if u.starts_with(&v) {
            Some(i)
        } else if v.starts_with(&u) {
            Some(j)
        } else {
            None
        }
    }

    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool {
        let cover: Vec<Vec<u8>> = cover.iter().map(|&c| cylinder_bits(c)).collect();
        Self::covered(&cylinder_bits(i), &cover)
    }

    fn contains(&self, i: BasisIndex, x: &Element) -> bool {
        cylinder_bits(i).iter().enumerate().all(|(k, &b)| bit(x, k) == b)
    }

    fn witness(&self, i: BasisIndex) -> Element {
        point(&cylinder_bits(i))
    }

    /// The subgroup of sequences vanishing from position `t` on.
    fn probe_points(&self, truncation: usize) -> Vec<Element> {
        let t = truncation.min(16);
        (0..1u32 << t).map(|n| point(&(0..t).map(|k| (n >> k & 1) as u8).collect::<Vec<_>>())).collect()
    }
}

impl Group for CantorGroup {
    fn identity(&self) -> Element {
        Element(Vec::new())
    }

    fn op(&self, x: &Element, y: &Element) -> Element {
        let n = x.0.len().max(y.0.len());
        point(&(0..n).map(|k| bit(x, k) ^ bit(y, k)).collect::<Vec<_>>())
    }

    fn inv(&self, x: &Element) -> Element {
        x.clone()
    }

    /// `[u] + [v] = [(u ⊕ v) truncated to min(|u|, |v|)]`.
    fn basic_product(&self, i: BasisIndex, j: BasisIndex) -> BasisIndex {
        let (u, v) = (cylinder_bits(i), cylinder_bits(j));
        let w: Vec<u8> = u.iter().zip(&v).map(|(a, b)| a ^ b).collect();
        cylinder_index(&w)
    }

    fn basic_inverse(&self, i: BasisIndex) -> BasisIndex {
        i
    }

    /// Cylinders are compact open: `U_n = K_n = [u_n]` on the diagonal.
    fn ercs(&self, me: &Arc<dyn Space>) -> Option<Ercs> {
        Some(Ercs::diagonal(me))
    }

    fn regime(&self) -> CompletenessRegime {
        CompletenessRegime::Compact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_string_bijection() {
        assert_eq!(cylinder_bits(BasisIndex(0)), Vec::<u8>::new());
        assert_eq!(cylinder_bits(BasisIndex(1)), vec![0]);
        assert_eq!(cylinder_bits(BasisIndex(2)), vec![1]);
        assert_eq!(cylinder_bits(BasisIndex(3)), vec![0, 0]);
        for n in 0..500 {
            assert_eq!(cylinder_index(&cylinder_bits(BasisIndex(n))), BasisIndex(n));
        }
    }

    #[test]
    fn halves_cover_the_group() {
        let g = CantorGroup;
        assert!(g.within(BasisIndex(0), &BTreeSet::from([BasisIndex(1), BasisIndex(2)])));
        assert!(!g.within(BasisIndex(0), &BTreeSet::from([BasisIndex(1)])));
        assert_eq!(g.meet(BasisIndex(1), BasisIndex(2)), None);
        assert_eq!(g.meet(BasisIndex(1), BasisIndex(3)), Some(BasisIndex(3)));
    }
}
