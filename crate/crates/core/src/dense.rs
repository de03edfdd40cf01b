//! Dense points from shrinking sequences, and the metric presentation on
//! them.
//!
//! From each basic set `B_i` a nested sequence `B_{i_0} ⊇ B_{i_1} ⊇ …` is
//! chosen with `B_{i_s}⁻¹ B_{i_s} ⊆ V_s`, so level `s` has diameter at most
//! `2^{−s}`; its limit is the dense point `α_i`. Names of `α_i`, the
//! centring function `φ` and the conversion of basic sets into metric balls
//! are all certified by inclusions of basic images, never by membership.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::One;

use crate::bk::{BallCenter, NeighborhoodScale};
use crate::exec::{self, ExecMode};
use crate::group::{CompositeMap, CompletenessRegime};
use crate::kernel::{CeSet, Dyadic, Rational, RightCut, Stage};
use crate::topology::{BasisIndex, PointName};

/// Certificate for one shrinking step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShrinkStep {
    /// Level produced.
    pub level: usize,
    /// The basic `B` found by the search.
    pub found: BasisIndex,
    /// `B ∩ B_{i_s}`, the new level.
    pub result: BasisIndex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShrinkingSequence {
    pub start: BasisIndex,
    pub levels: Vec<BasisIndex>,
    pub certificates: Vec<ShrinkStep>,
    pub requested: usize,
}

impl ShrinkingSequence {
    pub fn completed(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Searches, for each level, the first `B` with `f*(B, B) ⊆ f*(B_{i_s}, B_{i_s})`,
/// `f*(B, B) ⊆ V_{s+1}` and `B ∩ B_{i_s} ≠ ∅`.
pub fn shrink(i: BasisIndex, scale: &NeighborhoodScale, depth: usize, budget: Stage) -> ShrinkingSequence {
    let g = scale.group();
    let depth = depth.min(scale.completed());
    let mut levels = vec![i];
    let mut certificates = Vec::new();
    for s in 0..depth {
        let cur = levels[s];
        let outer = BTreeSet::from([g.image(CompositeMap::LeftQuotient, &[cur, cur])]);
        let v = scale.v(s + 1).at(budget);
        let step = (0..g.visible(budget)).map(BasisIndex).find_map(|b| {
            let fb = g.image(CompositeMap::LeftQuotient, &[b, b]);
            if !g.within(fb, &outer) || !g.within(fb, &v) {
                return None;
            }
            g.meet(b, cur).map(|m| (b, m))
        });
        let Some((found, result)) = step else { break };
        certificates.push(ShrinkStep { level: s + 1, found, result });
        levels.push(result);
    }
    ShrinkingSequence { start: i, levels, certificates, requested: depth }
}

struct DenseInner {
    index: usize,
    sequence: ShrinkingSequence,
    name: PointName,
    scale: NeighborhoodScale,
    phi_memo: Mutex<HashMap<(usize, Stage), Option<BasisIndex>>>,
}

/// `α_i`, the limit of the shrinking sequence from `B_i`.
#[derive(Clone)]
pub struct DensePoint {
    inner: Arc<DenseInner>,
}

impl fmt::Debug for DensePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensePoint").field("index", &self.inner.index).field("sequence", &self.inner.sequence).finish()
    }
}

/// Builds `α_i`. Its name lists `B_j` once some level `X = B_{i_t}` and some
/// `m` with `t > m + 2` give `X · B_m B_m⁻¹ ⊆ B_j`: then
/// `B_d(α_i, 2^{−t}) ⊆ X · V_{m+1} ⊆ B_j`.
pub fn dense_point(i: usize, scale: &NeighborhoodScale, depth: usize, budget: Stage) -> DensePoint {
    let sequence = shrink(BasisIndex(i), scale, depth, budget);
    let g = scale.group().clone();
    let levels = sequence.levels.clone();
    let top = scale.completed();
    let name = CeSet::from_cumulative(move |s: Stage| {
        let vis = g.visible(s);
        let mut images = BTreeSet::new();
        for m in 0..vis.min(top) {
            let bm = g.image(CompositeMap::Quotient, &[BasisIndex(m), BasisIndex(m)]);
            for x in levels.iter().skip(m + 3) {
                images.insert(g.basic_product(*x, bm));
            }
        }
        (0..vis)
            .map(BasisIndex)
            .filter(|&j| {
                let cover = BTreeSet::from([j]);
                images.iter().any(|&img| g.within(img, &cover))
            })
            .collect()
    })
    .memoized();
    DensePoint {
        inner: Arc::new(DenseInner {
            index: i,
            sequence,
            name: PointName(name),
            scale: scale.clone(),
            phi_memo: Mutex::default(),
        }),
    }
}

impl DensePoint {
    pub fn index(&self) -> usize {
        self.inner.index
    }

    pub fn sequence(&self) -> &ShrinkingSequence {
        &self.inner.sequence
    }

    pub fn name(&self) -> &PointName {
        &self.inner.name
    }

    /// `φ(i, s)`: the first `B_j` in the name with `B_j⁻¹ B_j ⊆ V_s`, so every
    /// `g ∈ B_j` has `d(α_i, g) <= 2^{−s}`.
    pub fn phi(&self, s: usize, budget: Stage) -> Option<BasisIndex> {
        let key = (s, budget);
        if let Some(hit) = self.inner.phi_memo.lock().expect("phi memo poisoned").get(&key) {
            return *hit;
        }
        let scale = &self.inner.scale;
        let found = if s > scale.completed() {
            None
        } else {
            let g = scale.group();
            let v = scale.v(s).at(budget);
            self.inner
                .name
                .at(budget)
                .into_iter()
                .find(|&j| g.within(g.image(CompositeMap::LeftQuotient, &[j, j]), &v))
        };
        self.inner.phi_memo.lock().expect("phi memo poisoned").insert(key, found);
        found
    }

    /// Chain starts for tick `k`: basic sets meeting `B_{φ(i,t)}`, each with
    /// offset `2^{−t}`.
    pub fn chain_start(&self, k: u32) -> Vec<(BasisIndex, Option<u32>)> {
        let scale = &self.inner.scale;
        let graph = scale.graph(k);
        let stage = Stage(1u64 << k.min(62));
        let g = scale.group();
        let top = scale.completed().min(k as usize);
        let mut out = Vec::new();
        for t in 1..=top {
            if let Some(j) = self.phi(t, stage) {
                out.extend((0..graph.nodes()).map(BasisIndex).filter(|&p| g.meet(p, j).is_some()).map(|p| (p, Some(t as u32))));
            }
        }
        out
    }

    pub fn ball_center(&self) -> BallCenter {
        let me = self.clone();
        BallCenter::from_fn(move |k| me.chain_start(k))
    }
}

/// One dense point per basis index below `count`.
pub fn dense_points(
    scale: &NeighborhoodScale,
    count: usize,
    depth: usize,
    budget: Stage,
    mode: ExecMode,
) -> Vec<DensePoint> {
    exec::map_range(mode, count, |i| dense_point(i, scale, depth, budget))
}

/// Right cut of `d(α_i, α_j)`: chains from sets meeting `B_{φ(i,t)}` to
/// sets meeting `B_{φ(j,u)}` contribute `2^{−t} + 2^{−u} + Σ 2^{−n_m}`.
pub fn d_alpha_upper(a: &DensePoint, b: &DensePoint, budget: Stage) -> RightCut {
    let (a, b) = (a.clone(), b.clone());
    let scale = a.inner.scale.clone();
    let bounds = RightCut::from_ticks(move |k| {
        scale.graph(k).best(&a.chain_start(k), &b.chain_start(k)).map(|d| d.to_rational())
    })
    .bounds()
    .clone();
    RightCut::new(CeSet::from_cumulative(move |s| bounds.at(s.min(budget))))
}

/// A metric ball `B_d(α_center, radius)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MetricBall {
    pub center: usize,
    pub radius: Rational,
}

/// Metric balls whose union is `B_j`. Emits `B_d(α_i, 2^{−n−2} − 2^{−t})`
/// when `B_{φ(i,t)} · B_w B_w⁻¹ ⊆ B_j` for the witness `B_w` of `V_{n+1}`
/// and `t > n + 3`, as then the ball lies in `α_i V_{n+2} ⊆ B_j`.
pub fn tau_to_metric(j: BasisIndex, points: &[DensePoint], scale: &NeighborhoodScale) -> CeSet<MetricBall> {
    let (points, scale) = (points.to_vec(), scale.clone());
    CeSet::from_cumulative(move |s| {
        let g = scale.group();
        let top = scale.completed();
        let target = BTreeSet::from([j]);
        let mut out = BTreeSet::new();
        for (i, pt) in points.iter().enumerate() {
            for t in 1..=top {
                let Some(p) = pt.phi(t, s) else { continue };
                for n in 0..t.saturating_sub(3) {
                    let Some(w) = scale.witness(n + 1) else { continue };
                    if g.image_within(CompositeMap::Triple, &[p, w.basic, w.basic], &target) {
                        let r = Dyadic::pow2_neg(n as u32 + 2).to_rational() - Dyadic::pow2_neg(t as u32).to_rational();
                        out.insert(MetricBall { center: i, radius: r });
                    }
                }
            }
        }
        out
    })
}

/// The right-c.e. presentation on the dense sequence.
#[derive(Clone, Debug)]
pub struct DensePresentation {
    pub points: Vec<DensePoint>,
    pub regime: CompletenessRegime,
}

impl DensePresentation {
    pub fn build(scale: &NeighborhoodScale, count: usize, depth: usize, budget: Stage, mode: ExecMode) -> Self {
        DensePresentation {
            points: dense_points(scale, count, depth, budget, mode),
            regime: scale.group().regime(),
        }
    }

    /// Limit-point assertions are meaningful only when the metric is
    /// complete by some known fact.
    pub fn has_limits(&self) -> bool {
        self.regime != CompletenessRegime::None
    }

    /// Best bounds of the distance matrix at `budget`; `1` stands in where
    /// nothing is enumerated yet, which `d <= 1` makes valid.
    pub fn matrix(&self, budget: Stage, mode: ExecMode) -> Vec<Vec<Rational>> {
        let n = self.points.len();
        let flat = exec::map_range(mode, n * n, |ij| {
            let (i, j) = (ij / n, ij % n);
            d_alpha_upper(&self.points[i], &self.points[j], budget)
                .best_bound(budget)
                .upper()
                .cloned()
                .unwrap_or_else(Rational::one)
        });
        flat.chunks(n.max(1)).map(|r| r.to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::build_scale;
    use crate::instances::c2;

    #[test]
    fn c2_shrinks_to_singleton() {
        let g = c2();
        let scale = build_scale(&g, 6, Stage(100));
        let seq = shrink(BasisIndex(0), &scale, 6, Stage(100));
        assert_eq!(seq.levels[..3], [BasisIndex(0), BasisIndex(0), BasisIndex(1)]);
        assert!(seq.levels[2..].iter().all(|&b| b == BasisIndex(1)));
    }

    #[test]
    fn singleton_start_stays_put() {
        let g = c2();
        let scale = build_scale(&g, 6, Stage(100));
        let seq = shrink(BasisIndex(2), &scale, 6, Stage(100));
        assert!(seq.levels.iter().all(|&b| b == BasisIndex(2)));
    }

    #[test]
    fn phi_settles_on_singleton() {
        let g = c2();
        let scale = build_scale(&g, 8, Stage(100));
        let alpha = dense_point(1, &scale, 8, Stage(100));
        assert_eq!(alpha.phi(0, Stage(100)), Some(BasisIndex(0)));
        assert_eq!(alpha.phi(6, Stage(100)), Some(BasisIndex(1)));
    }
}
