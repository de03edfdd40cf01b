//! Verification suites shared by the subcommands.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde_json::json;

use super::report::{anchors, Report};
use crate::bk::{build_scale, d_upper, NeighborhoodScale};
use crate::dense::DensePresentation;
use crate::error::Result;
use crate::exec::{self, ExecMode};
use crate::group::GroupInstance;
use crate::instances::{
    check_congruence, discrete_from_computable, recover_presentation, CePresented, DiscretePresentation, InverseSystem,
};
use crate::kernel::{format_rational, Rational, Stage};
use crate::oracle::{exact_d_shortest_path, exact_rho, exact_struble, ExactMetricTable, LevelExtensions};
use crate::proper::{
    agrees_below_two, build_properness_scale, effectively_proper_check, properness_witness, scale_base_metric,
    ClosedTest, PropernessPlan, PropernessScale, StrubleCertifier,
};
use crate::topology::{BasisIndex, Element, OpenName};

#[derive(Clone, Debug)]
pub struct Options {
    pub depth: usize,
    pub budget: Stage,
    pub truncation: usize,
    pub grid: Vec<Rational>,
    pub mode: ExecMode,
}

pub fn pow2_neg(n: usize) -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::one() << n)
}

fn label(x: &Element) -> String {
    format!("{:?}", x.0)
}

fn lq(g: &GroupInstance, x: &Element, y: &Element) -> Element {
    g.op(&g.inv(x), y)
}

/// Points and a universe holding every `x⁻¹y` between them: the probe set
/// itself when it is a subgroup, else the next smaller probe set. `None`
/// when neither works.
pub fn decidable_window(g: &GroupInstance, truncation: usize) -> Option<(Vec<Element>, Vec<Element>)> {
    let universe = g.probe_points(truncation);
    let set: BTreeSet<Element> = universe.iter().cloned().collect();
    let closed = |pts: &[Element]| pts.iter().all(|x| pts.iter().all(|y| set.contains(&lq(g, x, y))));
    if closed(&universe) {
        return Some((universe.clone(), universe));
    }
    let points = g.probe_points(truncation.saturating_sub(1));
    closed(&points).then_some((points, universe))
}

/// Oracle `d` over `points` from the scale's `V` extensions.
pub fn oracle_d(scale: &NeighborhoodScale, points: &[Element], universe: &[Element], stage: Stage, mode: ExecMode) -> Result<ExactMetricTable> {
    let v = LevelExtensions::of_scale(scale, universe, stage);
    Ok(exact_d_shortest_path(&exact_rho(&**scale.group(), points, &v)?, mode))
}

fn push_v_laws(report: &mut Report, scale: &NeighborhoodScale, universe: &[Element], budget: Stage) {
    let g = scale.group();
    let v = LevelExtensions::of_scale(scale, universe, budget);
    let u = LevelExtensions::of_scale_u(scale, universe, budget);
    let e = g.identity();
    let levels = v.levels.len();
    let sym = (0..levels).find(|&n| v.levels[n].iter().any(|x| !v.levels[n].contains(&g.inv(x))));
    report.push("bk.v-symmetric", anchors::V_SYMMETRIC, sym.is_none(), json!({"levels": levels, "first_bad": sym}), budget.0);
    let cube = (0..levels.saturating_sub(1)).find(|&n| {
        let (next, cur) = (&v.levels[n + 1], &v.levels[n]);
        next.iter().any(|a| next.iter().any(|b| next.iter().any(|c| !cur.contains(&g.op(&g.op(a, b), c)))))
    });
    report.push("bk.v-cube", anchors::V_CUBE, cube.is_none(), json!({"levels": levels, "first_bad": cube}), budget.0);
    let inside = (0..levels).find(|&n| !v.levels[n].is_subset(&u.levels[n]));
    report.push("bk.v-in-u", anchors::V_IN_U, inside.is_none(), json!({"levels": levels, "first_bad": inside}), budget.0);
    let ident = (0..levels).find(|&n| !v.levels[n].contains(&e));
    report.push("bk.v-identity", anchors::V_IDENTITY, ident.is_none(), json!({"levels": levels, "first_bad": ident}), budget.0);
}

/// Chains `g_0, …, g_l` with at most `max_links` links violating
/// `Σ ρ(g_i, g_{i+1}) >= ρ(g_0, g_l) / 2`, counted exhaustively.
pub fn chain_violations(rho: &ExactMetricTable, max_links: usize) -> (u64, u64) {
    let n = rho.len();
    let r = |i: usize, j: usize| rho.get(i, j).cloned().unwrap_or_else(Rational::one);
    let (mut checked, mut bad) = (0u64, 0u64);
    let mut stack: Vec<(Vec<usize>, Rational)> = (0..n).map(|i| (vec![i], Rational::zero())).collect();
    while let Some((chain, sum)) = stack.pop() {
        let last = *chain.last().expect("chains are non-empty");
        if chain.len() > 1 {
            checked += 1;
            if sum.clone() * Rational::from_integer(2.into()) < r(chain[0], last) {
                bad += 1;
            }
        }
        if chain.len() <= max_links {
            for next in 0..n {
                let mut c = chain.clone();
                c.push(next);
                stack.push((c, &sum + r(last, next)));
            }
        }
    }
    (checked, bad)
}

/// Bounds at the clock ticks up to `budget`.
fn trace(x: &Element, y: &Element, scale: &NeighborhoodScale, budget: Stage) -> Vec<(u64, Option<Rational>)> {
    let g = scale.group();
    let cut = d_upper(&g.point_name(x), &g.point_name(y), scale, budget);
    budget.clock_ticks().map(|k| 1u64 << k).map(|s| (s, cut.best_bound(Stage(s)).upper().cloned())).collect()
}

/// One pair of the `d` comparison: every sampled bound at least the
/// oracle, best bound within `tol`.
pub fn push_pair(
    report: &mut Report,
    scale: &NeighborhoodScale,
    x: &Element,
    y: &Element,
    oracle: Option<&Rational>,
    tol: &Rational,
    budget: Stage,
) {
    let tr = trace(x, y, scale, budget);
    let best = tr.iter().filter_map(|(_, b)| b.clone()).min();
    let sound = oracle.is_none_or(|o| tr.iter().filter_map(|(_, b)| b.as_ref()).all(|b| b >= o));
    let close = match (oracle, &best) {
        (Some(o), Some(b)) => b - o <= *tol,
        (None, Some(_)) => true,
        _ => false,
    };
    let witness = json!({
        "x": x.0, "y": y.0,
        "best": best.as_ref().map(format_rational),
        "oracle": oracle.map(format_rational),
        "tolerance": format_rational(tol),
        "trace": tr.iter().map(|(s, b)| json!([s, b.as_ref().map(format_rational)])).collect::<Vec<_>>(),
    });
    report.push(format!("bk.pair({},{})", label(x), label(y)), anchors::D_BOUND, sound && close, witness, budget.0);
}

pub fn bk_tolerance(depth: usize) -> Rational {
    pow2_neg(depth.min(8))
}

/// Which ordered pairs of probe points to compare.
#[derive(Clone, Debug)]
pub enum PairSelection {
    All,
    Listed(Vec<(usize, usize)>),
}

pub fn bk_pairs(report: &mut Report, g: &GroupInstance, opts: &Options, pairs: &PairSelection) -> Result<NeighborhoodScale> {
    let scale = build_scale(g, opts.depth, opts.budget);
    report.push(
        "bk.scale",
        anchors::V_CUBE,
        scale.is_complete(),
        json!({"requested": scale.requested(), "completed": scale.completed(),
               "witnesses": scale.witnesses().iter().map(|w| w.basic.0).collect::<Vec<_>>()}),
        opts.budget.0,
    );
    let window = decidable_window(g, opts.truncation);
    let points = window.as_ref().map_or_else(|| g.probe_points(opts.truncation), |(p, _)| p.clone());
    let oracle = match &window {
        Some((p, u)) => Some(oracle_d(&scale, p, u, opts.budget, opts.mode)?),
        None => None,
    };
    let chosen: Vec<(usize, usize)> = match pairs {
        PairSelection::All => (0..points.len()).flat_map(|i| (0..points.len()).map(move |j| (i, j))).collect(),
        PairSelection::Listed(l) => l.clone(),
    };
    if let Some(&(i, j)) = chosen.iter().find(|(i, j)| *i >= points.len() || *j >= points.len()) {
        return Err(crate::Error::Input(format!("pair ({i},{j}) outside the {} probe points", points.len())));
    }
    let tol = bk_tolerance(opts.depth);
    for (i, j) in chosen {
        let o = oracle.as_ref().and_then(|t| t.get(i, j));
        push_pair(report, &scale, &points[i], &points[j], o, &tol, opts.budget);
    }
    Ok(scale)
}

pub fn bk_suite(report: &mut Report, g: &GroupInstance, opts: &Options) -> Result<()> {
    let scale = build_scale(g, opts.depth, opts.budget);
    let Some((points, universe)) = decidable_window(g, opts.truncation) else {
        report.push("bk.decidable", anchors::D_BOUND, true, json!({"skipped": "probe window not closed under x^-1 y"}), opts.budget.0);
        return Ok(());
    };
    push_v_laws(report, &scale, &universe, opts.budget);
    let v = LevelExtensions::of_scale(&scale, &universe, opts.budget);
    let rho = exact_rho(&**g, &points, &v)?;
    if points.len() <= 8 {
        let (checked, bad) = chain_violations(&rho, 5);
        report.push("bk.chain-inequality", anchors::CHAIN, bad == 0, json!({"chains": checked, "violations": bad}), opts.budget.0);
    }
    let d = exact_d_shortest_path(&rho, opts.mode);
    let axioms = d.check_metric().and_then(|_| d.check_left_invariance(&**g));
    report.push("bk.metric-axioms", anchors::METRIC_AXIOMS, axioms.is_ok(), json!({"error": axioms.err()}), opts.budget.0);
    let sandwich = (0..v.levels.len().min(7)).find(|&n| {
        points.iter().any(|x| {
            points.iter().any(|y| {
                let dxy = d.value(x, y).expect("oracle covers points");
                let in_v = v.levels[n].contains(&lq(g, x, y));
                (*dxy < pow2_neg(n + 1) && !in_v) || (in_v && *dxy > pow2_neg(n))
            })
        })
    });
    report.push("bk.sandwich", anchors::SANDWICH, sandwich.is_none(), json!({"first_bad": sandwich}), opts.budget.0);
    let tol = bk_tolerance(opts.depth);
    let pairs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..points.len()).map(move |j| (i, j))).collect();
    let worst = exec::map(opts.mode, &pairs, |&(i, j)| {
        let tr = trace(&points[i], &points[j], &scale, opts.budget);
        let o = d.get(i, j).expect("oracle covers points");
        let sound = tr.iter().filter_map(|(_, b)| b.as_ref()).all(|b| b >= o);
        let gap = tr.iter().filter_map(|(_, b)| b.clone()).min().map(|b| b - o);
        (sound, gap)
    });
    let unsound = worst.iter().filter(|(s, _)| !s).count();
    let max_gap = worst.iter().map(|(_, g)| g.clone()).max().flatten();
    let converged = worst.iter().all(|(_, g)| g.as_ref().is_some_and(|g| *g <= tol));
    report.push(
        "bk.convergence",
        anchors::D_BOUND,
        unsound == 0 && converged,
        json!({"pairs": pairs.len(), "unsound": unsound, "max_gap": max_gap.as_ref().map(format_rational), "tolerance": format_rational(&tol)}),
        opts.budget.0,
    );
    let names: Vec<OpenName> = (0..=scale.completed()).flat_map(|n| [scale.u(n).clone(), scale.v(n).clone()]).collect();
    let probe = Stage(opts.budget.0.min(1 << 12));
    let grows = names.iter().all(|n| n.0.survives_doubling(probe));
    report.push("kernel.monotone", anchors::MONOTONE, grows, json!({"names": names.len(), "stage": probe.0}), opts.budget.0);
    Ok(())
}

pub fn dense_suite(report: &mut Report, g: &GroupInstance, opts: &Options) -> Result<Option<DensePresentation>> {
    let scale = build_scale(g, opts.depth, opts.budget);
    let Some(count) = g.basis_count() else {
        let pres = DensePresentation::build(&scale, 1 << opts.truncation.min(8), opts.depth, opts.budget, opts.mode);
        let nested = pres.points.iter().all(|p| nests(g, &p.sequence().levels));
        report.push("dense.nested", anchors::SHRINK, nested, json!({"points": pres.points.len()}), opts.budget.0);
        return Ok(Some(pres));
    };
    let pres = DensePresentation::build(&scale, count, opts.depth, opts.budget, opts.mode);
    let (points, universe) = decidable_window(g, opts.truncation).expect("finite groups are closed");
    let d = oracle_d(&scale, &points, &universe, opts.budget, opts.mode)?;
    let limits: Vec<Option<Element>> = pres.points.iter().map(|p| limit_of(g, &p.sequence().levels, &universe)).collect();
    let found: BTreeSet<Element> = limits.iter().flatten().cloned().collect();
    let all: BTreeSet<Element> = universe.iter().cloned().collect();
    report.push("dense.covers-group", anchors::DENSE, found == all && limits.iter().all(Option::is_some), json!({"limits": found.len(), "group": all.len()}), opts.budget.0);
    let nested = pres.points.iter().all(|p| nests(g, &p.sequence().levels));
    let diam_bad = pres.points.iter().find_map(|p| {
        p.sequence().levels.iter().enumerate().find_map(|(s, &b)| {
            let ext: Vec<&Element> = universe.iter().filter(|x| g.contains(b, x)).collect();
            let too_wide = ext.iter().any(|x| ext.iter().any(|y| *d.value(x, y).expect("oracle covers group") > pow2_neg(s)));
            too_wide.then_some((p.index(), s))
        })
    });
    report.push("dense.shrinking", anchors::SHRINK, nested && diam_bad.is_none(), json!({"nested": nested, "first_wide": diam_bad}), opts.budget.0);
    let m = pres.matrix(opts.budget, opts.mode);
    let tol = pow2_neg(8);
    let mut gap = Rational::zero();
    let mut worst = None;
    let mut sound = true;
    for (i, li) in limits.iter().enumerate() {
        for (j, lj) in limits.iter().enumerate() {
            let (Some(a), Some(b)) = (li, lj) else { continue };
            let o = d.value(a, b).expect("oracle covers group");
            sound &= m[i][j] >= *o;
            if &m[i][j] - o > gap {
                gap = &m[i][j] - o;
                worst = Some(json!({"i": i, "j": j, "bound": format_rational(&m[i][j]), "oracle": format_rational(o)}));
            }
        }
    }
    report.push(
        "dense.matrix",
        anchors::DENSE_MATRIX,
        sound && gap <= tol,
        json!({"points": m.len(), "max_gap": format_rational(&gap), "worst": worst, "tolerance": format_rational(&tol), "sound": sound}),
        opts.budget.0,
    );
    Ok(Some(pres))
}

fn nests(g: &GroupInstance, levels: &[BasisIndex]) -> bool {
    levels.windows(2).all(|w| g.within(w[1], &BTreeSet::from([w[0]])))
}

/// The single point of the last level, when the universe shows one.
pub fn limit_of(g: &GroupInstance, levels: &[BasisIndex], universe: &[Element]) -> Option<Element> {
    let last = *levels.last()?;
    let ext: Vec<&Element> = universe.iter().filter(|x| g.contains(last, x)).collect();
    (ext.len() == 1).then(|| ext[0].clone())
}

/// Extensions of every grid level over `universe`.
pub fn level_extensions(ps: &PropernessScale, universe: &[Element], stage: Stage) -> Vec<(Rational, BTreeSet<Element>)> {
    let sp = ps.group().space().clone();
    ps.levels.iter().map(|(r, l)| (r.clone(), l.name.extension(sp.as_ref(), universe, stage))).collect()
}

pub fn proper_suite(report: &mut Report, g: &GroupInstance, opts: &Options) -> Result<PropernessScale> {
    let budget = opts.budget;
    let scale = build_scale(g, opts.depth, budget);
    let base = scale_base_metric(&scale, budget)?;
    let ps = build_properness_scale(&base, &opts.grid, budget)?;
    let Some((points, universe)) = decidable_window(g, opts.truncation) else {
        report.push("proper.decidable", anchors::PROPER_D, true, json!({"skipped": "probe window not closed under x^-1 y"}), budget.0);
        return Ok(ps);
    };
    let e = g.identity();
    let sp = g.space().clone();
    let ball2 = base.ball(&g.identity_name(), &Rational::from_integer(2.into()), budget).extension(sp.as_ref(), &universe, budget);
    let k = base.anchor_compact.extension(&universe);
    report.push(
        "proper.scaling",
        anchors::SCALING,
        ball2.is_subset(&k),
        json!({"factor": format_rational(&base.factor), "level": base.level, "anchor": base.anchor_open.0, "ball": ball2.len(), "compact": k.len()}),
        budget.0,
    );
    let ext = level_extensions(&ps, &universe, budget);
    let uset: BTreeSet<Element> = universe.iter().cloned().collect();
    let sym = ext.iter().find(|(_, x)| x.iter().any(|z| uset.contains(&g.inv(z)) && !x.contains(&g.inv(z))));
    report.push("proper.symmetric", anchors::U_SYMMETRIC, sym.is_none(), json!({"first_bad": sym.map(|(r, _)| format_rational(r))}), budget.0);
    let mut prod_bad = None;
    let mut prod_checked = 0;
    for (r, a) in &ext {
        for (s, b) in &ext {
            let Some((_, c)) = ext.iter().find(|(t, _)| *t == r + s) else { continue };
            prod_checked += 1;
            let fails = a.iter().any(|x| b.iter().any(|y| {
                let xy = g.op(x, y);
                uset.contains(&xy) && !c.contains(&xy)
            }));
            if fails && prod_bad.is_none() {
                prod_bad = Some(format!("{} + {}", format_rational(r), format_rational(s)));
            }
        }
    }
    report.push("proper.product", anchors::U_PRODUCT, prod_bad.is_none(), json!({"pairs": prod_checked, "first_bad": prod_bad}), budget.0);
    let delta = crate::oracle::scaled(&oracle_d(&scale, &points, &universe, budget, opts.mode)?, &base.factor);
    let ei = delta.index_of(&e).expect("window holds e");
    let ball_bad = ext.iter().filter(|(r, _)| *r < Rational::from_integer(2.into())).find(|(r, x)| {
        points.iter().enumerate().any(|(j, z)| (delta.get(ei, j).expect("oracle covers window") < r) != x.contains(z))
    });
    report.push("proper.ball", anchors::U_BALL, ball_bad.is_none(), json!({"first_bad": ball_bad.map(|(r, _)| format_rational(r))}), budget.0);
    let no_e = ext.iter().find(|(_, x)| !x.contains(&e));
    report.push("proper.identity", anchors::U_IDENTITY, no_e.is_none(), json!({"first_bad": no_e.map(|(r, _)| format_rational(r))}), budget.0);
    let vis = g.visible(budget);
    let uncovered = universe.iter().find(|z| {
        !(0..vis).any(|n| {
            let en = base.ercs.open(n);
            g.contains(en, z) || g.contains(g.basic_inverse(en), z)
        })
    });
    report.push("proper.union", anchors::U_UNION, uncovered.is_none(), json!({"universe": universe.len(), "first_uncovered": uncovered.map(|z| z.0.clone())}), budget.0);
    let compact_bad = ext.iter().find(|(r, x)| ps.container(r).map_or(true, |c| !x.is_subset(&c.extension(&universe))));
    report.push("proper.compact", anchors::U_COMPACT, compact_bad.is_none(), json!({"first_bad": compact_bad.map(|(r, _)| format_rational(r))}), budget.0);
    let mono = ext.windows(2).find(|w| !w[0].1.is_subset(&w[1].1));
    report.push("proper.monotone", anchors::U_MONOTONE, mono.is_none(), json!({"first_bad": mono.map(|w| format_rational(&w[0].0))}), budget.0);
    let table = exact_struble(&**g, &points, &ext, &uset)?;
    let near: Vec<Element> = g.probe_points(1).into_iter().filter(|z| table.index_of(z).is_some()).take(5).collect();
    for z in &near {
        let oracle = table.value(&e, z).cloned();
        let got = ps.d_upper(&g.identity_name(), &g.point_name(z), budget).best_bound(budget).upper().cloned();
        report.push(
            format!("proper.d(e,{})", label(z)),
            anchors::PROPER_D,
            got == oracle,
            json!({"z": z.0, "bound": got.as_ref().map(format_rational), "oracle": oracle.as_ref().map(format_rational)}),
            budget.0,
        );
    }
    let two = Rational::from_integer(2.into());
    let resolution = scale.completed() as u32 + 2;
    let id_resolution = scale.completed().saturating_sub(base.level + 2) as u32;
    let mut sub2 = (0usize, None);
    for (j, z) in points.iter().enumerate() {
        let dz = delta.get(ei, j).expect("oracle covers window");
        let proper_lt2 = table.get(ei, j).is_some_and(|p| *p < two);
        if proper_lt2 && *dz >= two {
            sub2.1.get_or_insert(z.0.clone());
        }
        if *dz < two {
            sub2.0 += 1;
            let res = if z == &e { id_resolution } else { resolution };
            if !agrees_below_two(&ps, z, dz, res, budget) {
                sub2.1.get_or_insert(z.0.clone());
            }
        }
    }
    report.push("proper.sub2", anchors::SUB2, sub2.1.is_none(), json!({"tested": sub2.0, "first_bad": sub2.1}), budget.0);
    let second = points.iter().find(|z| **z != e).cloned().unwrap_or_else(|| e.clone());
    let plan = PropernessPlan {
        radii: opts.grid.clone(),
        tests: vec![ClosedTest { set: vec![e.clone(), second], center: e.clone(), radius: Rational::from_integer(5.into()) }],
        sample: universe.clone(),
    };
    for o in effectively_proper_check(g, &StrubleCertifier { scale: &ps, budget }, &plan) {
        report.push(format!("proper.formulation-{}", o.formulation), anchors::PROPER, o.pass, json!({"detail": o.detail}), budget.0);
    }
    let w = properness_witness(&crate::proper::finite_complement(g, std::slice::from_ref(&e)), &g.identity_name(), &pow2_neg(4), &ps, budget)?;
    report.push(
        "proper.witness",
        anchors::PROPER,
        w.compact.contains_point(&e),
        json!({"first_bound": format_rational(&w.first_bound), "first_stage": w.first_stage.0, "radius": format_rational(&w.radius), "tier": w.tier}),
        budget.0,
    );
    Ok(ps)
}

pub fn finite_table_suite(report: &mut Report, g: &GroupInstance) {
    let pts = g.probe_points(0);
    let e = g.identity();
    let assoc = pts.iter().all(|x| pts.iter().all(|y| pts.iter().all(|z| g.op(&g.op(x, y), z) == g.op(x, &g.op(y, z)))));
    let ident = pts.iter().all(|x| g.op(&e, x) == *x && g.op(x, &e) == *x && g.op(x, &g.inv(x)) == e);
    report.push("instances.table", anchors::TABLE_AXIOMS, assoc && ident, json!({"order": pts.len()}), 0);
}

/// Round trip through the metric presentation, for finite discrete groups.
pub fn recovery_suite(report: &mut Report, p: &DiscretePresentation, budget: Stage) -> Result<()> {
    let Some(expected) = p.tables() else { return Ok(()) };
    let (group, metric) = discrete_from_computable(p.clone());
    let recovered = recover_presentation(&group, &metric, &Rational::new(1.into(), 2.into()), budget)?;
    report.push("instances.recovery", anchors::RECOVERY, recovered == expected, json!({"order": expected.inv.len()}), budget.0);
    Ok(())
}

pub fn ce_suite(report: &mut Report, c: &CePresented) {
    let last = c.schedule.removals.iter().map(|r| r.1).max().unwrap_or(0);
    let bad = (0..=last + 2).map(Stage).map(|b| check_congruence(c, b)).find(|r| !r.holds());
    report.push(
        "instances.congruence",
        anchors::CONGRUENCE,
        bad.is_none(),
        json!({"width": c.width, "budgets": last + 3, "first_bad": bad.map(|r| r.budget.0)}),
        last + 2,
    );
}

pub fn inverse_suite(report: &mut Report, sys: &InverseSystem) {
    let pts = sys.points().to_vec();
    let cover = sys.cover();
    for ev in sys.events() {
        let before = Stage(ev.stage);
        let after = Stage(ev.stage.max(11) + 1);
        let limit = pow2_neg(10);
        let mut merged = 0;
        let mut collapse_ok = true;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i == j || !sys.merged_at(&pts[i], &pts[j], Stage(ev.stage)) {
                    continue;
                }
                merged += 1;
                let cut = sys.distance(i, j);
                let late = cut.best_bound(after).upper().is_some_and(|b| *b < limit);
                let early = ev.stage == 0
                    || sys.merged_at(&pts[i], &pts[j], Stage(ev.stage - 1))
                    || cut.best_bound(before).upper().is_some_and(|b| *b >= limit);
                collapse_ok &= late && early;
            }
        }
        report.push(
            format!("instances.collapse@{}", ev.stage),
            anchors::COLLAPSE,
            collapse_ok,
            json!({"merged_pairs": merged, "read_at": after.0}),
            after.0,
        );
        let consistent = sys.operations_consistent_at(before) && sys.operations_consistent_at(after);
        report.push(format!("instances.consistent@{}", ev.stage), anchors::CONSISTENT, consistent, json!({}), after.0);
        let covers = sys.cover_valid_at(&cover, before) && sys.cover_valid_at(&cover, after);
        report.push(format!("instances.cover@{}", ev.stage), anchors::COVER, covers, json!({"balls": cover.len()}), after.0);
    }
}

