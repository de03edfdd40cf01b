use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::group::{CompletenessRegime, Group};
use crate::topology::{BasisIndex, Element, Ercs, Space};

/// Largest order accepted; the basis has `2^n − 1` members.
pub const MAX_ORDER: usize = 10;

/// A validated multiplication table on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupTable {
    pub name: String,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    identity: usize,
}

impl FiniteGroupTable {
    pub fn new(name: impl Into<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Axiom("empty table".into()));
        }
        if let Some(row) = table.iter().position(|r| r.len() != n || r.iter().any(|&v| v >= n)) {
            return Err(Error::Axiom(format!("row {row} is not a map into 0..{n}")));
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(Error::Axiom(format!("associativity fails at ({x},{y},{z})")));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::Axiom("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for x in 0..n {
            let y = (0..n)
                .find(|&y| table[x][y] == identity && table[y][x] == identity)
                .ok_or_else(|| Error::Axiom(format!("element {x} has no inverse")))?;
            inverse.push(y);
        }
        Ok(FiniteGroupTable { name: name.into(), table, inverse, identity })
    }

    pub fn cyclic(n: usize) -> Self {
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        FiniteGroupTable::new(format!("Z{n}"), table).expect("cyclic table")
    }

    /// `S_k` on permutations listed lexicographically; `(p·q)(i) = p(q(i))`.
    pub fn symmetric(k: usize) -> Self {
        let perms = permutations(k);
        let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let table = perms
            .iter()
            .map(|p| perms.iter().map(|q| index[&q.iter().map(|&i| p[i]).collect::<Vec<_>>()]).collect())
            .collect();
        FiniteGroupTable::new(format!("S{k}"), table).expect("symmetric table")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// Permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..k {
            if !prefix.contains(&v) {
                prefix.push(v);
                go(prefix, k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(k), k, &mut out);
    out
}

/// A finite group with every non-empty subset as a basic set.
///
/// Basis order: the whole group, the singletons, then the remaining subsets
/// by size and lexicographically within a size.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    table: FiniteGroupTable,
    masks: Vec<u64>,
    index_of: HashMap<u64, usize>,
}

impl FiniteGroup {
    pub fn new(table: FiniteGroupTable) -> Result<Self> {
        let n = table.order();
        if n > MAX_ORDER {
            return Err(Error::Instance(format!("order {n} exceeds {MAX_ORDER}")));
        }
        let full = (1u64 << n) - 1;
        let mut masks = vec![full];
        masks.extend((0..n).map(|x| 1u64 << x).filter(|&m| m != full));
        let mut rest: Vec<u64> = (1..=full).filter(|m| m.count_ones() > 1 && *m != full).collect();
        rest.sort_by_key(|&m| (m.count_ones(), elements_of(m)));
        masks.extend(rest);
        let index_of = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        Ok(FiniteGroup { table, masks, index_of })
    }

    pub fn table(&self) -> &FiniteGroupTable {
        &self.table
    }

    pub fn mask(&self, i: BasisIndex) -> u64 {
        self.masks[i.0]
    }

    pub fn index_of_mask(&self, mask: u64) -> Option<BasisIndex> {
        self.index_of.get(&mask).map(|&i| BasisIndex(i))
    }

    /// Index of the singleton `{x}`.
    pub fn singleton(&self, x: usize) -> BasisIndex {
        self.index_of_mask(1 << x).expect("singleton is basic")
    }

    pub fn element(x: usize) -> Element {
        Element::scalar(x as i64)
    }

    pub fn decode(x: &Element) -> usize {
        x.0[0] as usize
    }
}

fn elements_of(mask: u64) -> Vec<usize> {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

impl Space for FiniteGroup {
    fn label(&self) -> String {
        self.table.name.clone()
    }

    fn basis_count(&self) -> Option<usize> {
        Some(self.masks.len())
    }

    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex> {
        self.index_of_mask(self.mask(i) & self.mask(j))
    }

    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool {
        let union = cover.iter().fold(0u64, |acc, &c| acc | self.mask(c));
        self.mask(i) & !union == 0
    }

    fn contains(&self, i: BasisIndex, x: &Element) -> bool {
        let k = Self::decode(x);
        k < self.table.order() && self.mask(i) >> k & 1 == 1
    }

    fn witness(&self, i: BasisIndex) -> Element {
        Self::element(self.mask(i).trailing_zeros() as usize)
    }

    fn probe_points(&self, _truncation: usize) -> Vec<Element> {
        (0..self.table.order()).map(Self::element).collect()
    }
}

impl Group for FiniteGroup {
    fn identity(&self) -> Element {
        Self::element(self.table.identity())
    }

    fn op(&self, x: &Element, y: &Element) -> Element {
        Self::element(self.table.mul(Self::decode(x), Self::decode(y)))
    }

    fn inv(&self, x: &Element) -> Element {
        Self::element(self.table.inv(Self::decode(x)))
    }

    fn basic_product(&self, i: BasisIndex, j: BasisIndex) -> BasisIndex {
        let (a, b) = (elements_of(self.mask(i)), elements_of(self.mask(j)));
        let m = a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).fold(0u64, |acc, (x, y)| {
            acc | 1 << self.table.mul(x, y)
        });
        self.index_of_mask(m).expect("products of non-empty sets are non-empty")
    }

    fn basic_inverse(&self, i: BasisIndex) -> BasisIndex {
        let m = elements_of(self.mask(i)).into_iter().fold(0u64, |acc, x| acc | 1 << self.table.inv(x));
        self.index_of_mask(m).expect("inverse set is non-empty")
    }

    fn ercs(&self, me: &std::sync::Arc<dyn Space>) -> Option<Ercs> {
        Some(Ercs::diagonal(me))
    }

    fn regime(&self) -> CompletenessRegime {
        CompletenessRegime::Finite
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c2_basis_order() {
        let g = FiniteGroup::new(FiniteGroupTable::cyclic(2)).unwrap();
        assert_eq!(g.basis_count(), Some(3));
        assert_eq!(g.mask(BasisIndex(0)), 0b11);
        assert_eq!(g.mask(BasisIndex(1)), 0b01);
        assert_eq!(g.mask(BasisIndex(2)), 0b10);
    }

    #[test]
    fn s3_has_63_basics() {
        let g = FiniteGroup::new(FiniteGroupTable::symmetric(3)).unwrap();
        assert_eq!(g.basis_count(), Some(63));
        assert_eq!(g.table().identity(), 0);
    }

    #[test]
    fn broken_associativity_is_cited() {
        // a commutative loop on three elements that is not a group
        let t = vec![vec![0, 1, 2], vec![1, 0, 0], vec![2, 0, 1]];
        let err = FiniteGroupTable::new("bad", t).unwrap_err().to_string();
        assert!(err.contains("associativity fails at ("), "{err}");
    }

    #[test]
    fn s3_inverse_of_three_cycle() {
        let t = FiniteGroupTable::symmetric(3);
        let perms = permutations(3);
        let cycle = perms.iter().position(|p| p == &vec![1, 2, 0]).unwrap();
        let back = perms.iter().position(|p| p == &vec![2, 0, 1]).unwrap();
        assert_eq!(t.inv(cycle), back);
        let swap = perms.iter().position(|p| p == &vec![1, 0, 2]).unwrap();
        assert_eq!(t.inv(swap), swap);
    }
}
