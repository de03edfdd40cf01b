//! Brute-force reference values.
//!
//! The oracle takes level extensions from a constructed scale as explicit
//! finite sets and recomputes every distance from membership alone:
//! `ρ` from the `V_n`, `d` by all-pairs shortest paths over `ρ`, and the
//! proper metric as a grid infimum over the `U_r`.

use std::collections::BTreeSet;

use num_traits::{One, Zero};

use crate::bk::NeighborhoodScale;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::group::Group;
use crate::kernel::{Rational, Stage};
use crate::topology::Element;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TableKind {
    Bk,
    Struble,
    Discrete,
    ProfiniteStage(u64),
}

/// Exact distances over a finite point list; `None` marks a pair no level
/// reaches (grid-incomplete).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactMetricTable {
    pub points: Vec<Element>,
    pub values: Vec<Vec<Option<Rational>>>,
    pub kind: TableKind,
}

impl ExactMetricTable {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, x: &Element) -> Option<usize> {
        self.points.iter().position(|p| p == x)
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Rational> {
        self.values[i][j].as_ref()
    }

    pub fn value(&self, x: &Element, y: &Element) -> Option<&Rational> {
        self.get(self.index_of(x)?, self.index_of(y)?)
    }

    pub fn incomplete_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| self.values[i][j].is_none()).collect()
    }

    /// Zero exactly on the diagonal, symmetry, triangle inequality. Returns
    /// the first violation.
    pub fn check_metric(&self) -> std::result::Result<(), String> {
        let n = self.len();
        let v = |i: usize, j: usize| self.get(i, j).ok_or_else(|| format!("pair ({i},{j}) has no value"));
        for i in 0..n {
            for j in 0..n {
                let d = v(i, j)?;
                if (i == j) != d.is_zero() {
                    return Err(format!("d({:?},{:?}) = {d}", self.points[i], self.points[j]));
                }
                if d != v(j, i)? {
                    return Err(format!("asymmetric at ({:?},{:?})", self.points[i], self.points[j]));
                }
                for k in 0..n {
                    if *d > v(i, k)? + v(k, j)? {
                        return Err(format!(
                            "triangle fails through {:?} between {:?} and {:?}",
                            self.points[k], self.points[i], self.points[j]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `d(gx, gy) = d(x, y)` wherever all four points are in the table.
    pub fn check_left_invariance(&self, g: &dyn Group) -> std::result::Result<(), String> {
        for a in &self.points {
            for x in &self.points {
                for y in &self.points {
                    let (ax, ay) = (g.op(a, x), g.op(a, y));
                    let (Some(l), Some(r)) = (self.value(&ax, &ay), self.value(x, y)) else { continue };
                    if l != r {
                        return Err(format!("d({a:?}{x:?}, {a:?}{y:?}) = {l} but d({x:?}, {y:?}) = {r}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Extensions of a nested sequence of sets over a finite universe that
/// contains every `x⁻¹y` the oracle will ask about.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelExtensions {
    pub universe: BTreeSet<Element>,
    pub levels: Vec<BTreeSet<Element>>,
}

impl LevelExtensions {
    /// `V_0, …, V_{completed}` of a scale over `universe` at `stage`.
    pub fn of_scale(scale: &NeighborhoodScale, universe: &[Element], stage: Stage) -> Self {
        LevelExtensions {
            universe: universe.iter().cloned().collect(),
            levels: (0..=scale.completed()).map(|n| scale.v_extension(n, universe, stage)).collect(),
        }
    }

    /// `U_0, …, U_{completed}` likewise.
    pub fn of_scale_u(scale: &NeighborhoodScale, universe: &[Element], stage: Stage) -> Self {
        LevelExtensions {
            universe: universe.iter().cloned().collect(),
            levels: (0..=scale.completed()).map(|n| scale.u_extension(n, universe, stage)).collect(),
        }
    }
}

fn left_quotient(g: &dyn Group, x: &Element, y: &Element) -> Element {
    g.op(&g.inv(x), y)
}

/// `ρ(x, y) = inf{2^{−n} : x⁻¹y ∈ V_n}`, with `ρ(x, x) = 0`.
pub fn exact_rho(g: &dyn Group, points: &[Element], v: &LevelExtensions) -> Result<ExactMetricTable> {
    let e = g.identity();
    for (n, level) in v.levels.iter().enumerate() {
        if !level.contains(&e) {
            return Err(Error::Oracle(format!("identity missing from V_{n}")));
        }
        if n > 0 && !level.is_subset(&v.levels[n - 1]) {
            return Err(Error::Oracle(format!("V_{n} is not inside V_{}", n - 1)));
        }
    }
    if v.levels.first() != Some(&v.universe) {
        return Err(Error::Oracle("V_0 is not the whole universe".into()));
    }
    let mut values = vec![vec![None; points.len()]; points.len()];
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            if x == y {
                values[i][j] = Some(Rational::zero());
                continue;
            }
            let z = left_quotient(g, x, y);
            if !v.universe.contains(&z) {
                return Err(Error::Oracle(format!("{z:?} lies outside the supplied universe")));
            }
            let n = v.levels.iter().rposition(|l| l.contains(&z)).expect("V_0 holds the universe");
            values[i][j] = Some(Rational::new(1.into(), num_bigint::BigInt::one() << n));
        }
    }
    Ok(ExactMetricTable { points: points.to_vec(), values, kind: TableKind::Bk })
}

/// Floyd–Warshall over the premetric. Over a finite set the chain
/// infimum is attained by a simple path, so this is the chain metric.
pub fn exact_d_shortest_path(rho: &ExactMetricTable, mode: ExecMode) -> ExactMetricTable {
    let n = rho.len();
    let mut d = rho.values.clone();
    for k in 0..n {
        let via = d[k].clone();
        let col: Vec<Option<Rational>> = d.iter().map(|row| row[k].clone()).collect();
        d = exec::map_range(mode, n, |i| {
            (0..n)
                .map(|j| match (&d[i][j], &col[i], &via[j]) {
                    (cur, Some(a), Some(b)) => {
                        let alt = a + b;
                        match cur {
                            Some(c) if *c <= alt => Some(c.clone()),
                            _ => Some(alt),
                        }
                    }
                    (cur, _, _) => cur.clone(),
                })
                .collect()
        });
    }
    ExactMetricTable { points: rho.points.clone(), values: d, kind: rho.kind.clone() }
}

/// `inf{r ∈ grid : x⁻¹y ∈ U_r}`; pairs outside every level stay `None`.
pub fn exact_struble(
    g: &dyn Group,
    points: &[Element],
    levels: &[(Rational, BTreeSet<Element>)],
    universe: &BTreeSet<Element>,
) -> Result<ExactMetricTable> {
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut values = vec![vec![None; points.len()]; points.len()];
    for (i, x) in points.iter().enumerate() {
        for (j, y) in points.iter().enumerate() {
            let z = left_quotient(g, x, y);
            if !universe.contains(&z) {
                return Err(Error::Oracle(format!("{z:?} lies outside the supplied universe")));
            }
            values[i][j] = sorted.iter().find(|(_, ext)| ext.contains(&z)).map(|(r, _)| r.clone());
        }
    }
    Ok(ExactMetricTable { points: points.to_vec(), values, kind: TableKind::Struble })
}

/// Shortest-path metric scaled by `factor`.
pub fn scaled(table: &ExactMetricTable, factor: &Rational) -> ExactMetricTable {
    let values = table.values.iter().map(|row| row.iter().map(|v| v.as_ref().map(|v| v * factor)).collect()).collect();
    ExactMetricTable { points: table.points.clone(), values, kind: table.kind.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bk::build_scale;
    use crate::instances::{c2, s3};

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn c2_rho_is_half() {
        let g = c2();
        let pts = g.probe_points(0);
        let scale = build_scale(&g, 6, Stage(200));
        let v = LevelExtensions::of_scale(&scale, &pts, Stage(200));
        assert_eq!(v.levels[1].len(), 2);
        assert_eq!(v.levels[2].len(), 1);
        let rho = exact_rho(&*g, &pts, &v).unwrap();
        assert_eq!(rho.get(0, 1), Some(&q(1, 2)));
        assert_eq!(rho.get(1, 1), Some(&q(0, 1)));
        let d = exact_d_shortest_path(&rho, ExecMode::Sequential);
        assert_eq!(d, rho);
    }

    #[test]
    fn non_nested_levels_are_rejected() {
        let g = c2();
        let pts = g.probe_points(0);
        let all: BTreeSet<Element> = pts.iter().cloned().collect();
        let e = BTreeSet::from([g.identity()]);
        let v = LevelExtensions { universe: all.clone(), levels: vec![all.clone(), e, all] };
        assert!(matches!(exact_rho(&*g, &pts, &v), Err(Error::Oracle(_))));
    }

    #[test]
    fn s3_shortest_path_is_a_metric() {
        let g = s3();
        let pts = g.probe_points(0);
        let scale = build_scale(&g, 6, Stage(500));
        let v = LevelExtensions::of_scale(&scale, &pts, Stage(500));
        let d = exact_d_shortest_path(&exact_rho(&*g, &pts, &v).unwrap(), ExecMode::Parallel);
        d.check_metric().unwrap();
        d.check_left_invariance(&*g).unwrap();
    }
}
