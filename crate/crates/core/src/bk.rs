//! The left-invariant metric built from a scale of identity neighbourhoods.
//!
//! `U_0 = G`, `U_{n+1} = U_n ∩ B_n B_n⁻¹`; `V_0 = G` and `V_{n+1}` is
//! `B B⁻¹ ∩ U_{n+1}` for the first basic `B ⊆ V_n` with `(B B⁻¹)³ ⊆ V_n`.
//! Then `ρ(x, y) = inf{2^{−n} : x⁻¹y ∈ V_n}` and `d` is the chain infimum
//! of `ρ`. Upper bounds for `d` come from chains of basic sets
//! `B_{p_m}⁻¹ B_{q_m} ⊆ V_{n_m}` linked by `B_{q_m} ∩ B_{p_{m+1}} ≠ ∅`.
//!
//! Chains are searched by a bounded-hop relaxation re-run at clock ticks
//! `2^k`: nodes below `min(2^k, MAX_CHAIN_NODES)`, levels up to `k`, at most
//! `k + 1` hops, names read at stage `2^k`. Every input grows with `k`, so
//! each tick's bound is at most the previous one.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;

use crate::exec::{self, ExecMode};
use crate::group::{CompositeMap, GroupInstance};
use crate::kernel::{Bound, CeSet, Dyadic, Rational, RightCut, Stage};
use crate::topology::{BasisIndex, Element, OpenName, PointName};

/// Node cap for chain searches over infinite bases.
pub const MAX_CHAIN_NODES: usize = 256;

/// The basic set found for a level, with the sextuple it was certified by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelWitness {
    pub level: usize,
    pub basic: BasisIndex,
    pub sextuple: [BasisIndex; 6],
    pub found_at: Stage,
}

struct ScaleInner {
    group: GroupInstance,
    u: Vec<OpenName>,
    v: Vec<OpenName>,
    witnesses: Vec<LevelWitness>,
    requested: usize,
    graphs: Mutex<HashMap<u32, Arc<ChainGraph>>>,
}

/// The paired sequences `U_n`, `V_n`, possibly only partly built.
#[derive(Clone)]
pub struct NeighborhoodScale {
    inner: Arc<ScaleInner>,
}

impl fmt::Debug for NeighborhoodScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NeighborhoodScale")
            .field("group", &self.inner.group)
            .field("completed", &self.completed())
            .field("witnesses", &self.inner.witnesses)
            .finish()
    }
}

/// Builds levels `0..=depth`, stopping early if a level's search fails at
/// `budget`; [`NeighborhoodScale::completed`] then reports how far it got.
pub fn build_scale(g: &GroupInstance, depth: usize, budget: Stage) -> NeighborhoodScale {
    let whole = g.whole().0.memoized();
    let mut u = vec![OpenName::new(whole.clone())];
    let mut v = vec![OpenName::new(whole)];
    let mut witnesses = Vec::new();
    for n in 0..depth {
        // a finite basis is listed cyclically so that B_n always exists
        let bn = BasisIndex(g.basis_count().map_or(n, |c| n % c));
        let bb = g.image(CompositeMap::Quotient, &[bn, bn]);
        let next_u = OpenName::new(u[n].meet(&OpenName::basic(bb), g.space()).0.memoized());
        let vn = v[n].at(budget);
        let found = (0..g.visible(budget)).map(BasisIndex).find(|&b| {
            g.within(b, &vn) && g.within(g.cubed_quotient(b), &vn)
        });
        let Some(b) = found else { break };
        let bbinv = g.image(CompositeMap::Quotient, &[b, b]);
        let next_v = OpenName::new(OpenName::basic(bbinv).meet(&next_u, g.space()).0.memoized());
        witnesses.push(LevelWitness { level: n + 1, basic: b, sextuple: [b; 6], found_at: budget });
        u.push(next_u);
        v.push(next_v);
    }
    NeighborhoodScale {
        inner: Arc::new(ScaleInner {
            group: g.clone(),
            u,
            v,
            witnesses,
            requested: depth,
            graphs: Mutex::default(),
        }),
    }
}

impl NeighborhoodScale {
    pub fn group(&self) -> &GroupInstance {
        &self.inner.group
    }

    /// Highest level built.
    pub fn completed(&self) -> usize {
        self.inner.v.len() - 1
    }

    pub fn requested(&self) -> usize {
        self.inner.requested
    }

    pub fn is_complete(&self) -> bool {
        self.completed() == self.inner.requested
    }

    pub fn u(&self, n: usize) -> &OpenName {
        &self.inner.u[n]
    }

    pub fn v(&self, n: usize) -> &OpenName {
        &self.inner.v[n]
    }

    pub fn witnesses(&self) -> &[LevelWitness] {
        &self.inner.witnesses
    }

    /// The witness of `V_n` for `n >= 1`.
    pub fn witness(&self, n: usize) -> Option<&LevelWitness> {
        n.checked_sub(1).and_then(|i| self.inner.witnesses.get(i))
    }

    /// Points of `sample` in `V_n`, reading the name at `stage`.
    pub fn v_extension(&self, n: usize, sample: &[Element], stage: Stage) -> BTreeSet<Element> {
        self.v(n).extension(self.group().space().as_ref(), sample, stage)
    }

    pub fn u_extension(&self, n: usize, sample: &[Element], stage: Stage) -> BTreeSet<Element> {
        self.u(n).extension(self.group().space().as_ref(), sample, stage)
    }

    /// The chain graph at tick `k`, cached.
    pub fn graph(&self, k: u32) -> Arc<ChainGraph> {
        if let Some(g) = self.inner.graphs.lock().expect("graph cache poisoned").get(&k) {
            return Arc::clone(g);
        }
        let built = Arc::new(ChainGraph::build(self, k));
        self.inner.graphs.lock().expect("graph cache poisoned").insert(k, Arc::clone(&built));
        built
    }

    /// Fixed-point exponent for chain sums: every weight and offset is a
    /// multiple of `2^{−unit_exponent}`.
    fn unit_exponent(&self) -> u32 {
        self.completed().max(1) as u32
    }
}

/// Link levels and hop relation over the first `nodes` basic sets at one tick.
pub struct ChainGraph {
    tick: u32,
    nodes: usize,
    levels: usize,
    unit: u32,
    v_snap: Vec<BTreeSet<BasisIndex>>,
    link: Vec<Option<u8>>,
    hop: Vec<bool>,
    group: GroupInstance,
}

impl ChainGraph {
    fn build(scale: &NeighborhoodScale, k: u32) -> Self {
        let g = scale.group().clone();
        let stage = Stage(1u64 << k.min(62));
        let nodes = g.basis_count().unwrap_or(usize::MAX).min(1usize << k.min(20)).min(MAX_CHAIN_NODES);
        let levels = scale.completed().min(k as usize);
        let v_snap: Vec<BTreeSet<BasisIndex>> = (0..=levels).map(|n| scale.v(n).at(stage)).collect();
        let mut graph = ChainGraph {
            tick: k,
            nodes,
            levels,
            unit: scale.unit_exponent(),
            v_snap,
            link: vec![None; nodes * nodes],
            hop: vec![false; nodes * nodes],
            group: g,
        };
        // images repeat heavily, so levels are computed once per image
        let mut by_image: HashMap<BasisIndex, Option<u8>> = HashMap::new();
        for p in 0..nodes {
            for q in 0..nodes {
                let img = graph.group.image(CompositeMap::LeftQuotient, &[BasisIndex(p), BasisIndex(q)]);
                let level = *by_image.entry(img).or_insert_with(|| graph.image_level(img));
                graph.link[p * nodes + q] = level;
                graph.hop[p * nodes + q] = graph.group.meet(BasisIndex(p), BasisIndex(q)).is_some();
            }
        }
        graph
    }

    pub fn tick(&self) -> u32 {
        self.tick
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Largest `n` with `B_p⁻¹ B_q ⊆ V_n` certified at this tick.
    pub fn level_of(&self, p: BasisIndex, q: BasisIndex) -> Option<u8> {
        self.image_level(self.group.image(CompositeMap::LeftQuotient, &[p, q]))
    }

    fn image_level(&self, img: BasisIndex) -> Option<u8> {
        (0..=self.levels).rev().find(|&n| self.group.within(img, &self.v_snap[n])).map(|n| n as u8)
    }

    fn link(&self, p: usize, q: usize) -> Option<u8> {
        self.link[p * self.nodes + q]
    }

    fn weight(&self, n: u8) -> u128 {
        1u128 << (self.unit - n as u32)
    }

    fn offset(&self, t: u32) -> u128 {
        1u128 << self.unit.saturating_sub(t)
    }

    /// Least chain sum from any start node (with its offset `2^{−t}`, or no
    /// offset) to each end node `q`, with predecessor links for recovery.
    fn relax(&self, start: &[(BasisIndex, Option<u32>)]) -> (Vec<Option<u128>>, Vec<Option<Pred>>) {
        let n = self.nodes;
        let mut dist: Vec<Option<u128>> = vec![None; n];
        let mut pred: Vec<Option<Pred>> = vec![None; n];
        for &(p, t) in start.iter().filter(|(p, _)| p.0 < n) {
            let off = t.map_or(0, |t| self.offset(t));
            for q in 0..n {
                if let Some(l) = self.link(p.0, q) {
                    let c = off + self.weight(l);
                    if dist[q].is_none_or(|d| c < d) {
                        dist[q] = Some(c);
                        pred[q] = Some(Pred { p: p.0, level: l, from: None });
                    }
                }
            }
        }
        for _ in 0..=self.tick {
            // best arrival at each p through a hop from some q
            let mut reach: Vec<Option<(u128, usize)>> = vec![None; n];
            for q in 0..n {
                let Some(dq) = dist[q] else { continue };
                for (p, slot) in reach.iter_mut().enumerate() {
                    if self.hop[q * n + p] && slot.is_none_or(|(d, _)| dq < d) {
                        *slot = Some((dq, q));
                    }
                }
            }
            let mut changed = false;
            for (p, r) in reach.iter().enumerate() {
                let Some((dp, from)) = *r else { continue };
                for q in 0..n {
                    if let Some(l) = self.link(p, q) {
                        let c = dp + self.weight(l);
                        if dist[q].is_none_or(|d| c < d) {
                            dist[q] = Some(c);
                            pred[q] = Some(Pred { p, level: l, from: Some(from) });
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, pred)
    }

    fn to_dyadic(&self, units: u128) -> Dyadic {
        Dyadic::new(BigInt::from(units), self.unit)
    }

    /// Least bound over end nodes `(q, offset)`.
    pub fn best(&self, start: &[(BasisIndex, Option<u32>)], end: &[(BasisIndex, Option<u32>)]) -> Option<Dyadic> {
        let (dist, _) = self.relax(start);
        end.iter()
            .filter(|(q, _)| q.0 < self.nodes)
            .filter_map(|&(q, t)| dist[q.0].map(|d| d + t.map_or(0, |t| self.offset(t))))
            .min()
            .map(|u| self.to_dyadic(u))
    }

    /// End nodes whose chain bound plus offset is below `radius`.
    pub fn within_radius(&self, start: &[(BasisIndex, Option<u32>)], radius: &Rational) -> BTreeSet<BasisIndex> {
        let (dist, _) = self.relax(start);
        dist.iter()
            .enumerate()
            .filter(|(_, d)| d.is_some_and(|d| &self.to_dyadic(d).to_rational() < radius))
            .map(|(q, _)| BasisIndex(q))
            .collect()
    }

    /// The optimal chain to the best plain end node, if any.
    pub fn witness(&self, start: &[BasisIndex], end: &[BasisIndex]) -> Option<ChainWitness> {
        let start: Vec<_> = start.iter().map(|&p| (p, None)).collect();
        let (dist, pred) = self.relax(&start);
        let q_end = end.iter().filter(|q| q.0 < self.nodes && dist[q.0].is_some()).min_by_key(|q| dist[q.0])?;
        let (mut p, mut q, mut n) = (Vec::new(), Vec::new(), Vec::new());
        let mut cur = Some(q_end.0);
        while let Some(c) = cur {
            let pr = pred[c]?;
            p.push(BasisIndex(pr.p));
            q.push(BasisIndex(c));
            n.push(pr.level as u32);
            cur = pr.from;
            if p.len() > self.nodes * (self.tick as usize + 2) {
                return None;
            }
        }
        p.reverse();
        q.reverse();
        n.reverse();
        let bound = n.iter().map(|&k| Dyadic::pow2_neg(k)).sum();
        Some(ChainWitness { p, q, n, bound })
    }

    /// Rechecks a chain's certificates against this tick's names.
    pub fn certifies(&self, w: &ChainWitness) -> bool {
        let links = w.p.iter().zip(&w.q).zip(&w.n).all(|((&p, &q), &n)| {
            (n as usize) <= self.levels
                && self.group.within(self.group.image(CompositeMap::LeftQuotient, &[p, q]), &self.v_snap[n as usize])
        });
        let hops = w.q.iter().zip(w.p.iter().skip(1)).all(|(&q, &p)| self.group.meet(q, p).is_some());
        links && hops && w.bound == w.n.iter().map(|&k| Dyadic::pow2_neg(k)).sum()
    }
}

#[derive(Clone, Copy, Debug)]
struct Pred {
    p: usize,
    level: u8,
    from: Option<usize>,
}

/// `⟨p_m⟩, ⟨q_m⟩, ⟨n_m⟩` with `bound = Σ 2^{−n_m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainWitness {
    pub p: Vec<BasisIndex>,
    pub q: Vec<BasisIndex>,
    pub n: Vec<u32>,
    pub bound: Dyadic,
}

fn capped(cut: RightCut, budget: Stage) -> RightCut {
    let b = cut.bounds().clone();
    RightCut::new(CeSet::from_cumulative(move |s| b.at(s.min(budget))))
}

fn tick_stage(k: u32) -> Stage {
    Stage(1u64 << k.min(62))
}

fn plain(name: &PointName, k: u32) -> Vec<(BasisIndex, Option<u32>)> {
    name.at(tick_stage(k)).into_iter().map(|p| (p, None)).collect()
}

/// Right cut of `ρ(x, y)`, run no further than `budget`.
pub fn rho_upper(x: &PointName, y: &PointName, scale: &NeighborhoodScale, budget: Stage) -> RightCut {
    let (x, y, scale) = (x.clone(), y.clone(), scale.clone());
    let cut = RightCut::from_ticks(move |k| {
        let graph = scale.graph(k);
        let (nx, ny) = (x.at(tick_stage(k)), y.at(tick_stage(k)));
        nx.iter()
            .flat_map(|&p| ny.iter().map(move |&q| (p, q)))
            .filter_map(|(p, q)| graph.level_of(p, q))
            .max()
            .map(|n| Dyadic::pow2_neg(n as u32).to_rational())
    });
    capped(cut, budget)
}

/// Right cut of `d(x, y)` from chain witnesses, run no further than `budget`.
pub fn d_upper(x: &PointName, y: &PointName, scale: &NeighborhoodScale, budget: Stage) -> RightCut {
    let (x, y, scale) = (x.clone(), y.clone(), scale.clone());
    let cut = RightCut::from_ticks(move |k| {
        let graph = scale.graph(k);
        graph.best(&plain(&x, k), &plain(&y, k)).map(|d| d.to_rational())
    });
    capped(cut, budget)
}

/// The chain behind the best `d` bound at `budget`.
pub fn d_witness(x: &PointName, y: &PointName, scale: &NeighborhoodScale, budget: Stage) -> Option<ChainWitness> {
    let k = budget.last_tick()?;
    let s = tick_stage(k);
    let start: Vec<_> = x.at(s).into_iter().collect();
    let end: Vec<_> = y.at(s).into_iter().collect();
    scale.graph(k).witness(&start, &end)
}

type StartFn = dyn Fn(u32) -> Vec<(BasisIndex, Option<u32>)> + Send + Sync;

/// Where a ball's chains may begin at tick `k`: basic sets with an
/// optional offset `2^{−t}` bounding the distance to the centre.
#[derive(Clone)]
pub struct BallCenter {
    start: Arc<StartFn>,
}

impl BallCenter {
    /// Chains starting at a basic set containing the centre.
    pub fn point(name: &PointName) -> Self {
        let name = name.clone();
        BallCenter { start: Arc::new(move |k| plain(&name, k)) }
    }

    pub fn from_fn(f: impl Fn(u32) -> Vec<(BasisIndex, Option<u32>)> + Send + Sync + 'static) -> Self {
        BallCenter { start: Arc::new(f) }
    }

    pub fn start(&self, k: u32) -> Vec<(BasisIndex, Option<u32>)> {
        (self.start)(k)
    }
}

/// Name of the open ball `B_d(center, radius)`: basic sets reached by a
/// chain whose bound, plus the centre offset, is below `radius`.
pub fn ball_to_open(center: &BallCenter, radius: &Rational, scale: &NeighborhoodScale, budget: Stage) -> OpenName {
    let (center, radius, scale) = (center.clone(), radius.clone(), scale.clone());
    let memo: Arc<Mutex<HashMap<u32, BTreeSet<BasisIndex>>>> = Arc::default();
    OpenName::new(CeSet::from_cumulative(move |s| {
        let s = s.min(budget);
        let mut out = BTreeSet::new();
        for k in s.clock_ticks() {
            if let Some(hit) = memo.lock().expect("ball memo poisoned").get(&k) {
                out.extend(hit.iter().copied());
                continue;
            }
            let found = scale.graph(k).within_radius(&center.start(k), &radius);
            out.extend(found.iter().copied());
            memo.lock().expect("ball memo poisoned").insert(k, found);
        }
        out
    }))
}

/// Best `d` bounds for a batch of point pairs.
pub fn pair_bounds(
    scale: &NeighborhoodScale,
    pairs: &[(Element, Element)],
    budget: Stage,
    mode: ExecMode,
) -> Vec<Bound> {
    let g = scale.group().clone();
    exec::map(mode, pairs, |(x, y)| {
        d_upper(&g.point_name(x), &g.point_name(y), scale, budget).best_bound(budget)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{c2, integers};

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn depth_zero_is_whole_group() {
        let g = c2();
        let scale = build_scale(&g, 0, Stage(100));
        let pts = g.probe_points(0);
        assert_eq!(scale.v_extension(0, &pts, Stage(100)).len(), 2);
        assert_eq!(scale.u_extension(0, &pts, Stage(100)).len(), 2);
    }

    #[test]
    fn c2_scale_values() {
        let g = c2();
        let scale = build_scale(&g, 4, Stage(100));
        assert!(scale.is_complete());
        let pts = g.probe_points(0);
        let e = g.identity();
        let sizes: Vec<usize> = (0..=4).map(|n| scale.v_extension(n, &pts, Stage(100)).len()).collect();
        assert_eq!(sizes, vec![2, 2, 1, 1, 1]);
        assert!(scale.v_extension(2, &pts, Stage(100)).contains(&e));
        for n in 2..=4 {
            assert_eq!(scale.u_extension(n, &pts, Stage(100)), BTreeSet::from([e.clone()]));
        }
    }

    #[test]
    fn c2_rho_and_d() {
        let g = c2();
        let scale = build_scale(&g, 6, Stage(100));
        let (e, a) = (g.identity_name(), g.point_name(&g.witness(BasisIndex(2))));
        assert_eq!(rho_upper(&e, &a, &scale, Stage(2000)).best_bound(Stage(2000)), Bound::Upper(q(1, 2)));
        assert_eq!(d_upper(&e, &a, &scale, Stage(2000)).best_bound(Stage(2000)), Bound::Upper(q(1, 2)));
        assert!(d_upper(&e, &e, &scale, Stage(2000)).best_bound(Stage(2000)).is_at_most(&q(1, 64)));
    }

    #[test]
    fn chain_witness_certifies() {
        let g = c2();
        let scale = build_scale(&g, 4, Stage(100));
        let (e, a) = (g.identity_name(), g.point_name(&g.witness(BasisIndex(2))));
        let w = d_witness(&e, &a, &scale, Stage(1024)).expect("a chain exists");
        assert!(scale.graph(10).certifies(&w));
        assert_eq!(w.bound.to_rational(), q(1, 2));
    }

    #[test]
    fn integers_are_discrete() {
        let g = integers();
        let scale = build_scale(&g, 4, Stage(64));
        let (zero, one) = (g.identity_name(), g.point_name(&Element::scalar(1)));
        assert_eq!(d_upper(&zero, &one, &scale, Stage(1000)).best_bound(Stage(1000)), Bound::Upper(q(1, 1)));
    }

    #[test]
    fn big_ball_is_everything() {
        let g = c2();
        let scale = build_scale(&g, 4, Stage(100));
        let ball = ball_to_open(&BallCenter::point(&g.identity_name()), &q(3, 2), &scale, Stage(1000));
        assert_eq!(ball.extension(g.space().as_ref(), &g.probe_points(0), Stage(1000)).len(), 2);
    }
}
