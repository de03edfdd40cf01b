//! A proper left-invariant metric on a locally compact group.
//!
//! The base metric `δ` is the scale metric multiplied so that its radius-2
//! ball around `e` sits inside a compact neighbourhood `K`. Then
//! `U_r = B_δ(e, r)` for `r < 2`, `U_{2^{n+1}} = W_{2^{n+1}} ∪ U_{2^n}⁴` with
//! `W_{2^{n+1}} = E_n ∪ E_n⁻¹` from the ercs, and the remaining grid levels
//! are unions of products along decompositions `r = Σ t_i`. The metric is
//! `d(x, y) = inf{r : x⁻¹y ∈ U_r}`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::bk::{ball_to_open, d_upper, BallCenter, NeighborhoodScale};
use crate::error::{Error, Result};
use crate::group::{open_product, CompositeMap, GroupInstance};
use crate::kernel::{format_rational, CeSet, Rational, RightCut, Stage};
use crate::topology::{ercs_neighborhood, BasisIndex, CompactName, Element, Ercs, OpenName, PointName};

/// Cap on the decompositions listed for one grid level.
pub const MAX_DECOMPOSITIONS: usize = 4096;

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn pow2(n: u32) -> Rational {
    Rational::from_integer(num_bigint::BigInt::one() << n)
}

/// The scale metric multiplied by `factor`, with the compact anchor `K`.
#[derive(Clone, Debug)]
pub struct ScaledBaseMetric {
    pub scale: NeighborhoodScale,
    pub ercs: Ercs,
    pub factor: Rational,
    /// `r` with `B_d(e, r) ⊆ B`.
    pub radius: Rational,
    /// Level `k` with `V_k ⊆ B`, giving `r = 2^{−k}`.
    pub level: usize,
    pub anchor_open: BasisIndex,
    pub anchor_compact: CompactName,
}

impl ScaledBaseMetric {
    pub fn group(&self) -> &GroupInstance {
        self.scale.group()
    }

    /// Right cut of `δ(x, y)`.
    pub fn delta_upper(&self, x: &PointName, y: &PointName, budget: Stage) -> RightCut {
        let factor = self.factor.clone();
        RightCut::new(d_upper(x, y, &self.scale, budget).bounds().map(move |b| b * &factor))
    }

    /// Name of `B_δ(center, r)`.
    pub fn ball(&self, center: &PointName, r: &Rational, budget: Stage) -> OpenName {
        ball_to_open(&BallCenter::point(center), &(r / &self.factor), &self.scale, budget)
    }
}

/// Finds `e ∈ B ⊆ K` from the ercs, then the first level `k >= 1` whose
/// `V_k` lies in `B`, which holds once `V_k ⊆ B_w B_w⁻¹ ⊆ B` for the level
/// witness `B_w` or `U_k ⊆ B_j B_j⁻¹ ⊆ B` for an earlier `j`. As
/// `B_d(e, 2^{−k}) ⊆ V_k`, scaling by `2^{k+1}` puts `B_δ(e, 2)` in `K`.
pub fn scale_base_metric(scale: &NeighborhoodScale, budget: Stage) -> Result<ScaledBaseMetric> {
    let g = scale.group();
    let ercs = g.ercs().ok_or(Error::NoErcs)?.clone();
    let (open, compact) =
        ercs_neighborhood(&g.identity_name(), &g.whole(), &ercs, budget).ok_or(Error::NotYet(budget.0))?;
    let b = *open.at(budget).iter().next().ok_or(Error::NotYet(budget.0))?;
    let target = BTreeSet::from([b]);
    let listed = |j: usize| g.basis_count().map_or(j, |c| j % c);
    let level = (1..=scale.completed())
        .find(|&k| {
            let by_witness = scale
                .witness(k)
                .is_some_and(|w| g.image_within(CompositeMap::Quotient, &[w.basic, w.basic], &target));
            by_witness
                || (0..k).any(|j| {
                    let bj = BasisIndex(listed(j));
                    g.image_within(CompositeMap::Quotient, &[bj, bj], &target)
                })
        })
        .ok_or(Error::NotYet(budget.0))?;
    let radius = Rational::new(1.into(), num_bigint::BigInt::one() << level);
    let factor = q(2, 1) / &radius;
    Ok(ScaledBaseMetric {
        scale: scale.clone(),
        ercs,
        factor,
        radius,
        level,
        anchor_open: b,
        anchor_compact: compact,
    })
}

/// How a level was built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Ball,
    /// `W_{2^n} ∪ U_{2^{n−1}}⁴`.
    Anchor { n: u32 },
    /// Union of `U_{t_1} ⋯ U_{t_l}` over the listed decompositions.
    Decomposition(Vec<Vec<Rational>>),
}

#[derive(Clone, Debug)]
pub struct Level {
    pub radius: Rational,
    pub name: OpenName,
    pub provenance: Provenance,
}

fn hull_of(c: &CompactName) -> Result<BTreeSet<BasisIndex>> {
    c.hull().cloned().ok_or_else(|| Error::Instance("compact container needs a hull-based name".into()))
}

fn hull_product(g: &GroupInstance, a: &BTreeSet<BasisIndex>, b: &BTreeSet<BasisIndex>) -> BTreeSet<BasisIndex> {
    a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j))).map(|(i, j)| g.basic_product(i, j)).collect()
}

/// The levels `U_r` on a finite grid and their compact containers.
#[derive(Clone, Debug)]
pub struct PropernessScale {
    pub base: ScaledBaseMetric,
    pub grid: Vec<Rational>,
    pub levels: BTreeMap<Rational, Level>,
    budget: Stage,
    containers: Arc<Mutex<Vec<CompactName>>>,
}

/// Dyadic anchors `1, 2, …, 2^n` with `2^n <= max(grid)` are required once
/// the grid reaches 2.
pub fn missing_anchor(grid: &[Rational]) -> Option<Rational> {
    let max = grid.iter().max()?;
    if *max < q(2, 1) {
        return None;
    }
    (0..).map(pow2).take_while(|a| a <= max).find(|a| !grid.contains(a))
}

/// Non-increasing sequences from `parts` summing to `r`.
fn decompositions(r: &Rational, parts: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    fn go(
        rest: &Rational,
        parts: &[Rational],
        prefix: &mut Vec<Rational>,
        out: &mut Vec<Vec<Rational>>,
    ) -> Result<()> {
        if rest.is_zero() {
            if out.len() == MAX_DECOMPOSITIONS {
                return Err(Error::Instance(format!("more than {MAX_DECOMPOSITIONS} decompositions")));
            }
            out.push(prefix.clone());
            return Ok(());
        }
        for (i, p) in parts.iter().enumerate() {
            if p <= rest {
                prefix.push(p.clone());
                go(&(rest - p), &parts[i..], prefix, out)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    let mut sorted = parts.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut out = Vec::new();
    go(r, &sorted, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn is_pow2(r: &Rational) -> bool {
    (0..).map(pow2).take_while(|a| a <= r).any(|a| a == *r)
}

/// Largest `n` with `2^n < r`, for `r > 1`.
fn tier_below(r: &Rational) -> u32 {
    (0..).take_while(|&n| pow2(n) < *r).last().unwrap_or(0)
}

pub fn build_properness_scale(base: &ScaledBaseMetric, grid: &[Rational], budget: Stage) -> Result<PropernessScale> {
    let mut grid: Vec<Rational> = grid.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if let Some(bad) = grid.iter().find(|r| **r <= Rational::zero()) {
        return Err(Error::Input(format!("grid radius {} is not positive", format_rational(bad))));
    }
    if let Some(a) = missing_anchor(&grid) {
        return Err(Error::MissingAnchor(format_rational(&a)));
    }
    grid.sort();
    let g = base.group().clone();
    let e = g.identity_name();
    let mut levels: BTreeMap<Rational, Level> = BTreeMap::new();
    for r in &grid {
        let level = if *r < q(2, 1) {
            Level { radius: r.clone(), name: base.ball(&e, r, budget), provenance: Provenance::Ball }
        } else if is_pow2(r) {
            let n = (r.numer().bits() - 1) as u32;
            let en = base.ercs.open(n as usize - 1);
            let w = OpenName::of_indices([en, g.basic_inverse(en)]);
            let half = &levels[&pow2(n - 1)].name;
            let sq = OpenName::new(open_product(&g, half, half).0.memoized());
            let fourth = open_product(&g, &sq, &sq);
            let name = OpenName::new(w.0.union(&fourth.0).memoized());
            Level { radius: r.clone(), name, provenance: Provenance::Anchor { n } }
        } else {
            let cap = pow2(tier_below(r));
            let parts: Vec<Rational> = grid.iter().filter(|t| **t <= cap).cloned().collect();
            let decs = decompositions(r, &parts)?;
            let mut memo: BTreeMap<Vec<Rational>, OpenName> = BTreeMap::new();
            let mut terms = Vec::new();
            for d in &decs {
                let mut acc = levels[&d[0]].name.clone();
                for k in 1..d.len() {
                    let key = d[..=k].to_vec();
                    acc = match memo.get(&key) {
                        Some(hit) => hit.clone(),
                        None => {
                            let next = OpenName::new(open_product(&g, &acc, &levels[&d[k]].name).0.memoized());
                            memo.insert(key, next.clone());
                            next
                        }
                    };
                }
                terms.push(acc.0);
            }
            let name = OpenName::new(
                CeSet::from_cumulative(move |s| terms.iter().flat_map(|t| t.at(s)).collect()).memoized(),
            );
            Level { radius: r.clone(), name, provenance: Provenance::Decomposition(decs) }
        };
        levels.insert(r.clone(), level);
    }
    Ok(PropernessScale {
        base: base.clone(),
        grid,
        levels,
        budget,
        containers: Arc::new(Mutex::new(vec![base.anchor_compact.clone()])),
    })
}

impl PropernessScale {
    pub fn group(&self) -> &GroupInstance {
        self.base.group()
    }

    pub fn level(&self, r: &Rational) -> Option<&OpenName> {
        self.levels.get(r).map(|l| &l.name)
    }

    /// `U_r` for any `r < 2`, on or off the grid.
    pub fn sub2_level(&self, r: &Rational) -> OpenName {
        self.base.ball(&self.group().identity_name(), r, self.budget)
    }

    /// `C_{2^n}`: `K` for `n = 0`, then `K_m ∪ K_m⁻¹ ∪ C_{2^{n−1}}⁴` with
    /// `(n − 1, m)` in the ercs relation. Built on demand.
    pub fn pow2_container(&self, n: u32) -> Result<CompactName> {
        let mut cs = self.containers.lock().expect("container cache poisoned");
        let g = self.base.group();
        while cs.len() <= n as usize {
            let prev = cs.len() - 1;
            let m = self
                .base
                .ercs
                .relation
                .at(self.budget)
                .into_iter()
                .find(|&(a, _)| a == prev)
                .map(|(_, m)| m)
                .ok_or(Error::NotYet(self.budget.0))?;
            let km = hull_of(&self.base.ercs.compact(m))?;
            let km_inv: BTreeSet<BasisIndex> = km.iter().map(|&i| g.basic_inverse(i)).collect();
            let c = hull_of(&cs[prev])?;
            let c2 = hull_product(g, &c, &c);
            let c4 = hull_product(g, &c2, &c2);
            let hull: BTreeSet<BasisIndex> = km.into_iter().chain(km_inv).chain(c4).collect();
            cs.push(CompactName::of_hull(g.space(), hull));
        }
        Ok(cs[n as usize].clone())
    }

    /// The compact set holding `U_r`: `K` below 2, else `C_{2^n}` for the
    /// least `2^n >= r`.
    pub fn container(&self, r: &Rational) -> Result<CompactName> {
        if *r < q(2, 1) {
            return self.pow2_container(0);
        }
        let n = (0..).find(|&n| pow2(n) >= *r).expect("some power of two is large enough");
        self.pow2_container(n)
    }

    /// Right cut of `d(x, y)`: grid `r` is enumerated once some
    /// `B_p ∋ x`, `B_q ∋ y` have `B_p⁻¹ B_q ⊆ U_r`.
    pub fn d_upper(&self, x: &PointName, y: &PointName, budget: Stage) -> RightCut {
        proper_d_upper(x, y, self, budget)
    }
}

/// The metric `d(x, y) = inf{r : x⁻¹y ∈ U_r}`.
#[derive(Clone, Debug)]
pub struct ProperMetric {
    pub scale: PropernessScale,
}

impl ProperMetric {
    pub fn d_upper(&self, x: &PointName, y: &PointName, budget: Stage) -> RightCut {
        proper_d_upper(x, y, &self.scale, budget)
    }
}

pub fn proper_d_upper(x: &PointName, y: &PointName, scale: &PropernessScale, budget: Stage) -> RightCut {
    let (x, y) = (x.clone(), y.clone());
    let g = scale.group().clone();
    let levels: Vec<(Rational, OpenName)> = scale.levels.iter().map(|(r, l)| (r.clone(), l.name.clone())).collect();
    RightCut::new(
        CeSet::from_cumulative(move |s| {
            let s = s.min(budget);
            let (nx, ny) = (x.at(s), y.at(s));
            let mut out = BTreeSet::new();
            for (r, u) in &levels {
                let cover = u.at(s);
                if nx.iter().any(|&p| ny.iter().any(|&q| g.image_within(CompositeMap::LeftQuotient, &[p, q], &cover))) {
                    out.insert(r.clone());
                }
            }
            out
        })
        .memoized(),
    )
}

/// `d(e, z) = δ` for a claimed `δ < 2`, read off the sub-2 levels:
/// `z ∉ U_δ` (skipped for `δ = 0`) and `z ∈ U_{δ + 2^{−j}}` for
/// `j <= resolution`.
pub fn agrees_below_two(scale: &PropernessScale, z: &Element, delta: &Rational, resolution: u32, stage: Stage) -> bool {
    let g = scale.group();
    let inside = |r: &Rational| !scale.sub2_level(r).extension(g.space().as_ref(), std::slice::from_ref(z), stage).is_empty();
    if !delta.is_zero() && inside(delta) {
        return false;
    }
    (0..=resolution).all(|j| {
        let r = delta + Rational::new(1.into(), num_bigint::BigInt::one() << j);
        r >= q(2, 1) || inside(&r)
    })
}

/// Output of `properness_witness`, with the schedule data used.
#[derive(Clone, Debug)]
pub struct ProperWitness {
    pub compact: CompactName,
    /// `d(α, e)[0]` and the stage it appeared.
    pub first_bound: Rational,
    pub first_stage: Stage,
    pub radius: Rational,
    pub tier: u32,
}

/// A compact name for a closed `A ⊆ B_d(α, q)`: with `r = d(α, e)[0] + q`,
/// `A ⊆ U_r ⊆ U_{2^n} ⊆ C_{2^n}` for `2^n > r`, intersected with `A`.
pub fn properness_witness(
    closed_complement: &OpenName,
    center: &PointName,
    radius: &Rational,
    scale: &PropernessScale,
    budget: Stage,
) -> Result<ProperWitness> {
    let e = scale.group().identity_name();
    let (first, stage) = proper_d_upper(center, &e, scale, budget).first_bound(budget).ok_or(Error::NotYet(budget.0))?;
    let r = &first + radius;
    let tier = (0..).find(|&n| pow2(n) > r).expect("some power of two is large enough");
    let k = scale.pow2_container(tier)?;
    Ok(ProperWitness {
        compact: crate::topology::compact_intersect_closed(closed_complement, &k),
        first_bound: first,
        first_stage: stage,
        radius: r,
        tier,
    })
}

/// Name of the open complement of a finite set: basic sets missing it.
pub fn finite_complement(g: &GroupInstance, points: &[Element]) -> OpenName {
    let (g, pts) = (g.clone(), points.to_vec());
    OpenName::new(CeSet::from_cumulative(move |s| {
        (0..g.visible(s)).map(BasisIndex).filter(|&i| !pts.iter().any(|x| g.contains(i, x))).collect()
    }))
}

/// What `effectively_proper_check` needs from a metric.
pub trait ProperCertifier {
    /// Exact (or finest available) distance; `None` when not bounded.
    fn distance(&self, x: &Element, y: &Element) -> Option<Rational>;
    /// A compact name holding `B^≤(e, r)`.
    fn ball_container(&self, r: &Rational) -> Option<CompactName>;
    /// A compact name for closed `A ⊆ B(center, q)`.
    fn set_name(&self, a: &[Element], center: &Element, q: &Rational) -> Option<CompactName>;
}

/// A closed test set `A` with a ball `B(center, q) ⊇ A`.
#[derive(Clone, Debug)]
pub struct ClosedTest {
    pub set: Vec<Element>,
    pub center: Element,
    pub radius: Rational,
}

#[derive(Clone, Debug)]
pub struct PropernessPlan {
    pub radii: Vec<Rational>,
    pub tests: Vec<ClosedTest>,
    /// Finite sample of the group the extensions are read on.
    pub sample: Vec<Element>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulationOutcome {
    pub formulation: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Checks on a finite sample: (i) compact names `K ⊇ A` for closed
/// bounded `A`; (ii) compact names of `A` itself; (iii) compact names of
/// the closed balls `B^≤(e, r)`. A compact name passes when its extension
/// holds the set's extension.
pub fn effectively_proper_check(
    g: &GroupInstance,
    metric: &dyn ProperCertifier,
    plan: &PropernessPlan,
) -> Vec<FormulationOutcome> {
    let e = g.identity();
    let mut one = Vec::new();
    let mut two = Vec::new();
    for t in &plan.tests {
        let inside = t.set.iter().all(|a| metric.distance(&t.center, a).is_some_and(|d| d < t.radius));
        if !inside {
            one.push(format!("test set not inside B(.., {})", format_rational(&t.radius)));
            continue;
        }
        let Some(k) = metric.set_name(&t.set, &t.center, &t.radius) else {
            one.push("no compact name".into());
            two.push("no compact name".into());
            continue;
        };
        let ext = k.extension(&plan.sample);
        if !t.set.iter().all(|a| ext.contains(a)) {
            one.push(format!("compact name misses part of A ({} points)", ext.len()));
        }
        let exact = compact_intersect_closed_ext(g, &k, &t.set, &plan.sample);
        if exact != t.set.iter().cloned().collect::<BTreeSet<_>>() {
            two.push(format!("intersection has {} points, A has {}", exact.len(), t.set.len()));
        }
    }
    let mut three = Vec::new();
    let norms: Vec<Option<Rational>> = plan.sample.iter().map(|y| metric.distance(&e, y)).collect();
    for r in &plan.radii {
        let ball: BTreeSet<Element> = plan
            .sample
            .iter()
            .zip(&norms)
            .filter(|(_, d)| d.as_ref().is_some_and(|d| d <= r))
            .map(|(y, _)| y.clone())
            .collect();
        match metric.ball_container(r) {
            None => three.push(format!("no compact name for B(e, {}) of {} points", format_rational(r), ball.len())),
            Some(k) => {
                let ext = k.extension(&plan.sample);
                if !ball.is_subset(&ext) {
                    three.push(format!(
                        "B(e, {}) has {} points, its compact name {}",
                        format_rational(r),
                        ball.len(),
                        ext.len()
                    ));
                }
            }
        }
    }
    let outcome = |formulation, fails: Vec<String>| FormulationOutcome {
        formulation,
        pass: fails.is_empty(),
        detail: if fails.is_empty() { "ok".into() } else { fails.join("; ") },
    };
    vec![outcome("i", one), outcome("ii", two), outcome("iii", three)]
}

fn compact_intersect_closed_ext(g: &GroupInstance, k: &CompactName, a: &[Element], pts: &[Element]) -> BTreeSet<Element> {
    crate::topology::compact_intersect_closed(&finite_complement(g, a), k).extension(pts)
}

/// The proper metric as a certifier, reading bounds at `budget`.
pub struct StrubleCertifier<'a> {
    pub scale: &'a PropernessScale,
    pub budget: Stage,
}

impl ProperCertifier for StrubleCertifier<'_> {
    fn distance(&self, x: &Element, y: &Element) -> Option<Rational> {
        let g = self.scale.group();
        proper_d_upper(&g.point_name(x), &g.point_name(y), self.scale, self.budget).best_bound(self.budget).upper().cloned()
    }

    fn ball_container(&self, r: &Rational) -> Option<CompactName> {
        let n = (0..).find(|&n| pow2(n) > *r)?;
        self.scale.pow2_container(n).ok()
    }

    fn set_name(&self, a: &[Element], center: &Element, q: &Rational) -> Option<CompactName> {
        let g = self.scale.group();
        properness_witness(&finite_complement(g, a), &g.point_name(center), q, self.scale, self.budget)
            .ok()
            .map(|w| w.compact)
    }
}

/// The unscaled scale metric: bounded by 1, with `K` as its only compact.
pub struct BoundedCertifier<'a> {
    pub base: &'a ScaledBaseMetric,
    pub budget: Stage,
}

impl ProperCertifier for BoundedCertifier<'_> {
    fn distance(&self, x: &Element, y: &Element) -> Option<Rational> {
        let g = self.base.group();
        d_upper(&g.point_name(x), &g.point_name(y), &self.base.scale, self.budget).best_bound(self.budget).upper().cloned()
    }

    fn ball_container(&self, r: &Rational) -> Option<CompactName> {
        (*r < self.base.radius).then(|| self.base.anchor_compact.clone())
    }

    fn set_name(&self, a: &[Element], center: &Element, q: &Rational) -> Option<CompactName> {
        let g = self.base.group();
        let near = a.iter().all(|x| self.distance(&g.identity(), x).is_some_and(|d| d + q.clone() < self.base.radius))
            && self.distance(&g.identity(), center).is_some();
        near.then(|| crate::topology::compact_intersect_closed(&finite_complement(g, a), &self.base.anchor_compact))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::build_scale;
    use crate::instances::{cantor_group, integers};

    fn canonical_grid() -> Vec<Rational> {
        vec![q(1, 2), q(1, 1), q(2, 1), q(3, 1), q(4, 1), q(8, 1), q(16, 1)]
    }

    fn z_window(scale: &PropernessScale, r: &Rational, w: i64) -> BTreeSet<i64> {
        let g = scale.group();
        let pts: Vec<Element> = (-w..=w).map(Element::scalar).collect();
        scale.level(r).unwrap().extension(g.space().as_ref(), &pts, Stage(4096)).into_iter().map(|x| x.0[0]).collect()
    }

    #[test]
    fn integers_scale_by_four() {
        let g = integers();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        assert_eq!(base.level, 1);
        assert_eq!(base.factor, q(4, 1));
    }

    #[test]
    fn integer_levels() {
        let g = integers();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        let ps = build_properness_scale(&base, &canonical_grid(), Stage(4096)).unwrap();
        assert_eq!(z_window(&ps, &q(2, 1), 20), BTreeSet::from([0]));
        assert_eq!(z_window(&ps, &q(3, 1), 20), BTreeSet::from([0]));
        assert_eq!(z_window(&ps, &q(4, 1), 20), BTreeSet::from([-1, 0, 1]));
        assert_eq!(z_window(&ps, &q(8, 1), 20), (-4..=4).collect());
        assert_eq!(z_window(&ps, &q(16, 1), 20), (-16..=16).collect());
        let d = ps.d_upper(&g.point_name(&Element::scalar(0)), &g.point_name(&Element::scalar(1)), Stage(4096));
        assert_eq!(d.best_bound(Stage(4096)).upper(), Some(&q(4, 1)));
    }

    #[test]
    fn missing_anchor_is_named() {
        let g = integers();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        let err = build_properness_scale(&base, &[q(1, 1), q(4, 1)], Stage(100)).unwrap_err();
        assert_eq!(err.to_string(), "grid missing dyadic anchor 2");
    }

    #[test]
    fn cantor_second_tier_is_everything() {
        let g = cantor_group();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        assert_eq!(base.factor, q(4, 1));
        let ps = build_properness_scale(&base, &[q(1, 1), q(2, 1)], Stage(256)).unwrap();
        let pts = g.probe_points(4);
        assert_eq!(ps.level(&q(2, 1)).unwrap().extension(g.space().as_ref(), &pts, Stage(256)).len(), pts.len());
    }

    #[test]
    fn decompositions_of_three() {
        let parts = [q(1, 2), q(1, 1), q(2, 1)];
        let decs = decompositions(&q(3, 1), &parts).unwrap();
        assert_eq!(decs.len(), 6);
        assert!(decs.contains(&vec![q(2, 1), q(1, 1)]));
    }

    fn z_plan() -> PropernessPlan {
        PropernessPlan {
            radii: canonical_grid(),
            tests: vec![ClosedTest { set: vec![Element::scalar(0), Element::scalar(1)], center: Element::scalar(0), radius: q(5, 1) }],
            sample: (-40..=40).map(Element::scalar).collect(),
        }
    }

    #[test]
    fn integers_pass_all_three_and_bounded_metric_fails_iii() {
        let g = integers();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        let ps = build_properness_scale(&base, &canonical_grid(), Stage(1024)).unwrap();
        let proper = effectively_proper_check(&g, &StrubleCertifier { scale: &ps, budget: Stage(1024) }, &z_plan());
        assert!(proper.iter().all(|o| o.pass), "{proper:?}");
        let bounded = effectively_proper_check(&g, &BoundedCertifier { base: &base, budget: Stage(1024) }, &z_plan());
        assert!(!bounded[2].pass);
    }

    #[test]
    fn cantor_sub2_agreement() {
        let g = cantor_group();
        let scale = build_scale(&g, 6, Stage(200));
        let base = scale_base_metric(&scale, Stage(200)).unwrap();
        let ps = build_properness_scale(&base, &[q(1, 1), q(2, 1)], Stage(256)).unwrap();
        let z = crate::instances::cantor::point(&[0, 1]);
        let delta = base.delta_upper(&g.identity_name(), &g.point_name(&z), Stage(256)).best_bound(Stage(256));
        let delta = delta.upper().unwrap().clone();
        assert!(delta < q(2, 1));
        assert!(agrees_below_two(&ps, &z, &delta, 10, Stage(256)));
    }
}
