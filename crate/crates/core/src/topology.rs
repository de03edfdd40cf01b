//! Computable topological spaces: a basis catalogue with a c.e. intersection
//! table, and names of points, open sets and compact sets over it.
//!
//! Names are compared extensionally. Two [`OpenName`]s of the same set need
//! not agree stage by stage, nor even in the limit.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::kernel::{CeSet, Stage};

/// A describable point of an instance. Each instance fixes its own encoding
/// (a group-table index, an integer, a finite bit string, ...).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element(pub Vec<i64>);

impl Element {
    pub fn scalar(v: i64) -> Self {
        Element(vec![v])
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Index of a basic open set `B_i`. Every index denotes a non-empty set.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BasisIndex(pub usize);

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.0)
    }
}

/// The basis algebra of a presented space.
///
/// `meet` realizes the intersection table `W`: in every shipped instance the
/// intersection of two basic sets is empty or again basic, so `W` lists at
/// most one `k` per pair. `within` is the c.e. inclusion relation
/// `B_i ⊆ ⋃ cover` that the enumeration operators use as their certificate.
/// `contains`, `witness` and `probe_points` form the extension probe; the
/// generic constructions never call them, only verification code does.
pub trait Space: Send + Sync {
    fn label(&self) -> String;

    /// `None` for an infinite basis.
    fn basis_count(&self) -> Option<usize>;

    fn meet(&self, i: BasisIndex, j: BasisIndex) -> Option<BasisIndex>;

    fn within(&self, i: BasisIndex, cover: &BTreeSet<BasisIndex>) -> bool;

    fn contains(&self, i: BasisIndex, x: &Element) -> bool;

    /// A point of `B_i`; certifies non-emptiness.
    fn witness(&self, i: BasisIndex) -> Element;

    /// A finite sample of points for extensional checks, exhaustive for
    /// finite spaces and truncation-dependent otherwise.
    fn probe_points(&self, truncation: usize) -> Vec<Element>;

    /// Basic indices enumerated by stage `s`: those below `s`.
    fn visible(&self, stage: Stage) -> usize {
        let s = usize::try_from(stage.0).unwrap_or(usize::MAX);
        self.basis_count().map_or(s, |n| n.min(s))
    }
}

/// A space together with its intersection table, the executable form of a
/// computable topological space.
#[derive(Clone)]
pub struct SpacePresentation {
    space: Arc<dyn Space>,
}

impl SpacePresentation {
    pub fn new(space: Arc<dyn Space>) -> Self {
        SpacePresentation { space }
    }

    pub fn space(&self) -> &Arc<dyn Space> {
        &self.space
    }

    /// The c.e. table of triples `(i, j, k)` with `B_k ⊆ B_i ∩ B_j`.
    pub fn intersection_table(&self) -> CeSet<(BasisIndex, BasisIndex, BasisIndex)> {
        let space = Arc::clone(&self.space);
        CeSet::from_cumulative(move |s| {
            let n = space.visible(s);
            let mut out = BTreeSet::new();
            for i in 0..n {
                for j in 0..n {
                    if let Some(k) = space.meet(BasisIndex(i), BasisIndex(j)) {
                        out.insert((BasisIndex(i), BasisIndex(j), k));
                    }
                }
            }
            out
        })
    }

    /// Name of `B_i ∩ B_j`.
    pub fn intersect(&self, i: BasisIndex, j: BasisIndex) -> OpenName {
        let space = Arc::clone(&self.space);
        OpenName::new(CeSet::from_cumulative(move |s| {
            if s.0 == 0 {
                return BTreeSet::new();
            }
            space.meet(i, j).into_iter().collect()
        }))
    }

    pub fn point_name(&self, x: &Element) -> PointName {
        PointName::of(&self.space, x)
    }
}

/// `N^x`, the set of basic sets containing `x`.
#[derive(Clone, Debug)]
pub struct PointName(pub CeSet<BasisIndex>);

impl PointName {
    /// The canonical name of a describable point, enumerated in index order.
    pub fn of(space: &Arc<dyn Space>, x: &Element) -> Self {
        let space = Arc::clone(space);
        let x = x.clone();
        PointName(CeSet::from_cumulative(move |s| {
            (0..space.visible(s)).map(BasisIndex).filter(|&i| space.contains(i, &x)).collect()
        }))
    }

    pub fn at(&self, stage: Stage) -> BTreeSet<BasisIndex> {
        self.0.at(stage)
    }
}

/// A name of an open set: the union of the enumerated basic sets.
#[derive(Clone, Debug)]
pub struct OpenName(pub CeSet<BasisIndex>);

impl OpenName {
    pub fn new(set: CeSet<BasisIndex>) -> Self {
        OpenName(set)
    }

    pub fn empty() -> Self {
        OpenName(CeSet::empty())
    }

    pub fn basic(i: BasisIndex) -> Self {
        OpenName(CeSet::finite([i]))
    }

    pub fn of_indices(items: impl IntoIterator<Item = BasisIndex>) -> Self {
        OpenName(CeSet::finite(items))
    }

    /// The whole space, named by every basic set.
    pub fn whole(space: &Arc<dyn Space>) -> Self {
        let space = Arc::clone(space);
        OpenName(CeSet::from_cumulative(move |s| (0..space.visible(s)).map(BasisIndex).collect()))
    }

    pub fn at(&self, stage: Stage) -> BTreeSet<BasisIndex> {
        self.0.at(stage)
    }

    /// Points of `sample` lying in the union named by stage `stage`.
    pub fn extension(&self, space: &dyn Space, sample: &[Element], stage: Stage) -> BTreeSet<Element> {
        let names = self.at(stage);
        sample.iter().filter(|x| names.iter().any(|&i| space.contains(i, x))).cloned().collect()
    }

    /// Name of the intersection, built from the intersection table.
    pub fn meet(&self, other: &OpenName, space: &Arc<dyn Space>) -> OpenName {
        let (a, b, space) = (self.clone(), other.clone(), Arc::clone(space));
        OpenName(CeSet::from_cumulative(move |s| {
            let (la, lb) = (a.at(s), b.at(s));
            let mut out = BTreeSet::new();
            for &i in &la {
                for &j in &lb {
                    if let Some(k) = space.meet(i, j) {
                        out.insert(k);
                    }
                }
            }
            out
        }))
    }
}

/// Dovetailed union of finitely many open names.
pub fn union_all(names: &[OpenName]) -> OpenName {
    let tasks: Vec<CeSet<BasisIndex>> = names.iter().map(|n| n.0.clone()).collect();
    OpenName(CeSet::from_cumulative(move |s| crate::kernel::dovetail_union(&tasks, s)))
}

type CoverTest = dyn Fn(&BTreeSet<BasisIndex>, Stage) -> bool + Send + Sync;
type MemberProbe = dyn Fn(&Element) -> bool + Send + Sync;

/// `N^K`: the list of all finite basic covers of a compact set.
///
/// Held as a c.e. certification predicate ("this tuple is enumerated by
/// stage s") plus an enumeration schedule over candidate tuples, together
/// with an extension probe for verification.
#[derive(Clone)]
pub struct CompactName {
    space: Arc<dyn Space>,
    certify: Arc<CoverTest>,
    probe: Arc<MemberProbe>,
    hull: Option<BTreeSet<BasisIndex>>,
}

impl fmt::Debug for CompactName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompactName").field("hull", &self.hull).finish()
    }
}

impl CompactName {
    /// The compact set `⋃ hull`, for basic sets that are themselves compact.
    /// A tuple covers it exactly when every hull member is within the tuple.
    pub fn of_hull(space: &Arc<dyn Space>, hull: impl IntoIterator<Item = BasisIndex>) -> Self {
        let hull: BTreeSet<BasisIndex> = hull.into_iter().collect();
        let hull_c = hull.clone();
        let sp = Arc::clone(space);
        let certify = move |t: &BTreeSet<BasisIndex>, s: Stage| {
            s.0 > 0 && hull_c.iter().all(|&h| sp.within(h, t))
        };
        let hull_p = hull.clone();
        let sp = Arc::clone(space);
        let probe = move |x: &Element| hull_p.iter().any(|&h| sp.contains(h, x));
        CompactName { space: Arc::clone(space), certify: Arc::new(certify), probe: Arc::new(probe), hull: Some(hull) }
    }

    pub fn hull(&self) -> Option<&BTreeSet<BasisIndex>> {
        self.hull.as_ref()
    }

    pub fn space(&self) -> &Arc<dyn Space> {
        &self.space
    }

    /// Is `tuple` enumerated into this name by stage `stage`?
    pub fn certifies(&self, tuple: &BTreeSet<BasisIndex>, stage: Stage) -> bool {
        (self.certify)(tuple, stage)
    }

    pub fn contains_point(&self, x: &Element) -> bool {
        (self.probe)(x)
    }

    pub fn extension(&self, sample: &[Element]) -> BTreeSet<Element> {
        sample.iter().filter(|x| self.contains_point(x)).cloned().collect()
    }

    /// Candidate tuples considered by stage `s`: sets of indices below
    /// `visible(s)` with at most `1 + log2(s)` members. Exponential in the
    /// stage; meant for small finite instances.
    pub fn candidates(space: &dyn Space, stage: Stage) -> Vec<BTreeSet<BasisIndex>> {
        let n = space.visible(stage);
        let max_size = stage.last_tick().map_or(0, |k| k as usize + 1);
        let mut out = vec![BTreeSet::new()];
        let mut frontier: Vec<BTreeSet<BasisIndex>> = vec![BTreeSet::new()];
        for _ in 0..max_size {
            let mut next = Vec::new();
            for t in &frontier {
                let start = t.iter().next_back().map_or(0, |b| b.0 + 1);
                for i in start..n {
                    let mut u = t.clone();
                    u.insert(BasisIndex(i));
                    next.push(u);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    pub fn covers_at(&self, stage: Stage) -> BTreeSet<BTreeSet<BasisIndex>> {
        if stage.0 == 0 {
            return BTreeSet::new();
        }
        CompactName::candidates(self.space.as_ref(), stage)
            .into_iter()
            .filter(|t| self.certifies(t, stage))
            .collect()
    }

    /// The covers as a c.e. set.
    pub fn as_ceset(&self) -> CeSet<BTreeSet<BasisIndex>> {
        let me = self.clone();
        CeSet::from_cumulative(move |s| me.covers_at(s))
    }

    pub fn union(&self, other: &CompactName) -> CompactName {
        let (a, b) = (self.clone(), other.clone());
        let (pa, pb) = (self.clone(), other.clone());
        let hull = match (&self.hull, &other.hull) {
            (Some(x), Some(y)) => Some(x.union(y).copied().collect()),
            _ => None,
        };
        CompactName {
            space: Arc::clone(&self.space),
            certify: Arc::new(move |t, s| a.certifies(t, s) && b.certifies(t, s)),
            probe: Arc::new(move |x| pa.contains_point(x) || pb.contains_point(x)),
            hull,
        }
    }

    /// Replaces the certification predicate and probe; used by the
    /// constructions that derive new compact names.
    pub fn derived(
        space: &Arc<dyn Space>,
        certify: impl Fn(&BTreeSet<BasisIndex>, Stage) -> bool + Send + Sync + 'static,
        probe: impl Fn(&Element) -> bool + Send + Sync + 'static,
        hull: Option<BTreeSet<BasisIndex>>,
    ) -> Self {
        CompactName { space: Arc::clone(space), certify: Arc::new(certify), probe: Arc::new(probe), hull }
    }
}

/// Compact name of `A ∩ K` from a name of the open complement of `A`.
///
/// A tuple `T` is emitted once `T` together with the complement's current
/// prefix forms an enumerated cover of `K`.
pub fn compact_intersect_closed(closed_complement: &OpenName, k: &CompactName) -> CompactName {
    let (comp, kk) = (closed_complement.clone(), k.clone());
    let certify = move |t: &BTreeSet<BasisIndex>, s: Stage| {
        let mut saturated = t.clone();
        saturated.extend(comp.at(s));
        kk.certifies(&saturated, s)
    };
    let (comp_p, kp, space) = (closed_complement.clone(), k.clone(), Arc::clone(k.space()));
    // the probe reads the complement far enough along for desk-scale sets
    let probe = move |x: &Element| {
        let names = comp_p.at(Stage(1 << 12));
        kp.contains_point(x) && !names.iter().any(|&i| space.contains(i, x))
    };
    CompactName::derived(k.space(), certify, probe, None)
}

type OpenIndex = dyn Fn(usize) -> BasisIndex + Send + Sync;
type CompactIndex = dyn Fn(usize) -> CompactName + Send + Sync;

/// A witness of effective local compactness: opens `U_n`, compacts `K_m`
/// and a c.e. relation `R` with `(n, m) ∈ R ⇒ U_n ⊆ K_m`.
///
/// In the shipped instances every `U_n` is a single basic set.
#[derive(Clone)]
pub struct Ercs {
    pub opens: Arc<OpenIndex>,
    pub compacts: Arc<CompactIndex>,
    pub relation: CeSet<(usize, usize)>,
}

impl fmt::Debug for Ercs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Ercs(..)")
    }
}

impl Ercs {
    pub fn open(&self, n: usize) -> BasisIndex {
        (self.opens)(n)
    }

    pub fn compact(&self, m: usize) -> CompactName {
        (self.compacts)(m)
    }

    /// The ercs in which `U_n = K_n = B_n` and `R` is the diagonal, valid
    /// whenever every basic set is compact.
    pub fn diagonal(space: &Arc<dyn Space>) -> Self {
        let sp = Arc::clone(space);
        let sp2 = Arc::clone(space);
        // a finite basis is listed cyclically
        let count = space.basis_count();
        let space_count = move |n: usize| count.map_or(n, |c| n % c);
        Ercs {
            opens: Arc::new(move |n| BasisIndex(space_count(n))),
            compacts: Arc::new(move |m| CompactName::of_hull(&sp, [BasisIndex(space_count(m))])),
            relation: CeSet::from_cumulative(move |s| (0..sp2.visible(s)).map(|n| (n, n)).collect()),
        }
    }
}

/// Finds `V, K` with `x ∈ V ⊆ K ⊆ U` by dovetailing over the ercs relation.
/// Returns `None` ("no result yet") when the budget is too small.
pub fn ercs_neighborhood(
    x: &PointName,
    u: &OpenName,
    ercs: &Ercs,
    budget: Stage,
) -> Option<(OpenName, CompactName)> {
    let xname = x.at(budget);
    let uname = u.at(budget);
    ercs.relation.at(budget).into_iter().find_map(|(n, m)| {
        let open = ercs.open(n);
        if !xname.contains(&open) {
            return None;
        }
        let k = ercs.compact(m);
        k.certifies(&uname, budget).then(|| (OpenName::basic(open), k))
    })
}
