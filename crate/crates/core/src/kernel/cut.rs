use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{CeSet, Stage};

/// Exact rational numbers; no floating point touches metric values.
pub type Rational = num_rational::BigRational;

/// Result of reading a right cut at a finite budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    /// Nothing has been enumerated yet. Not an error: right cuts of large
    /// reals legitimately start late.
    NotYet,
    Upper(Rational),
}

impl Bound {
    pub fn upper(&self) -> Option<&Rational> {
        match self {
            Bound::NotYet => None,
            Bound::Upper(r) => Some(r),
        }
    }

    pub fn is_at_most(&self, r: &Rational) -> bool {
        self.upper().is_some_and(|u| u <= r)
    }
}

/// Upper approximations of a real: a c.e. set of rationals, each at least
/// the represented value.
#[derive(Clone, Debug)]
pub struct RightCut {
    bounds: CeSet<Rational>,
}

impl RightCut {
    pub fn new(bounds: CeSet<Rational>) -> Self {
        RightCut { bounds }
    }

    /// A cut fed by a staged search that is re-run at clock ticks `2^k`.
    /// The search result at tick `k` must be non-increasing in `k`; results
    /// are memoised so repeated reads stay cheap.
    pub fn from_ticks(search: impl Fn(u32) -> Option<Rational> + Send + Sync + 'static) -> Self {
        let memo: Arc<Mutex<HashMap<u32, Option<Rational>>>> = Arc::default();
        let bounds = CeSet::from_cumulative(move |s: Stage| {
            s.clock_ticks()
                .filter_map(|k| {
                    if let Some(hit) = memo.lock().expect("memo poisoned").get(&k) {
                        return hit.clone();
                    }
                    let found = search(k);
                    memo.lock().expect("memo poisoned").insert(k, found.clone());
                    found
                })
                .collect::<BTreeSet<_>>()
        });
        RightCut { bounds }
    }

    /// A cut whose stage-`t` emission is `emit(t)`.
    pub fn from_stages(emit: impl Fn(Stage) -> Option<Rational> + Send + Sync + 'static) -> Self {
        RightCut { bounds: CeSet::from_emitter(move |t| emit(t)) }
    }

    pub fn bounds(&self) -> &CeSet<Rational> {
        &self.bounds
    }

    pub fn best_bound(&self, budget: Stage) -> Bound {
        match self.bounds.at(budget).into_iter().next() {
            Some(r) => Bound::Upper(r),
            None => Bound::NotYet,
        }
    }

    /// The first rational this cut ever enumerates, with the budget at which
    /// it appeared. Used where a construction reads `d(..)[0]`.
    pub fn first_bound(&self, budget: Stage) -> Option<(Rational, Stage)> {
        if self.bounds.at(budget).is_empty() {
            return None;
        }
        // outputs are monotone, so the first non-empty stage bisects
        let (mut lo, mut hi) = (0u64, budget.0);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.bounds.at(Stage(mid)).is_empty() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // ties at one stage resolve to the largest, the weakest claim
        self.bounds.at(Stage(hi)).into_iter().next_back().map(|r| (r, Stage(hi)))
    }
}

/// `best_bound` as a free function.
pub fn best_bound(cut: &RightCut, budget: Stage) -> Bound {
    cut.best_bound(budget)
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim().parse::<BigInt>().ok()?, q.trim().parse::<BigInt>().ok()?),
        None => (text.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if q.is_zero() {
        return None;
    }
    Some(Rational::new(p, q))
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    #[test]
    fn best_of_finite_set() {
        let cut = RightCut::new(CeSet::finite([q(1, 1), q(1, 2), q(3, 4)]));
        assert_eq!(cut.best_bound(Stage(10)), Bound::Upper(q(1, 2)));
    }

    #[test]
    fn empty_cut_has_no_bound_yet() {
        let cut = RightCut::new(CeSet::empty());
        assert_eq!(cut.best_bound(Stage(10)), Bound::NotYet);
    }

    #[test]
    fn tick_cut_is_monotone() {
        let cut = RightCut::from_ticks(|k| Some(q(1, 1 << k.min(20))));
        assert!(cut.bounds().is_monotone_through(Stage(300)));
        assert_eq!(cut.best_bound(Stage(5000)), Bound::Upper(q(1, 4096)));
    }

    #[test]
    fn rational_text_round_trip() {
        assert_eq!(parse_rational("3/6"), Some(q(1, 2)));
        assert_eq!(parse_rational("-4"), Some(q(-4, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(format_rational(&q(6, 4)), "3/2");
        assert_eq!(format_rational(&q(8, 4)), "2");
    }
}
