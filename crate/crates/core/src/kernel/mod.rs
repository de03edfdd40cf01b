//! Deterministic enumeration substrate.
//!
//! Every computably enumerable object in the crate is a [`CeSet`]: a pure
//! function from a [`Stage`] to the finite set of elements enumerated by that
//! stage. Running "with budget `s`" means executing stages `0..s`, so the
//! output at budget `s` is what was emitted strictly before stage `s`.

mod cut;
mod dyadic;

pub use cut::{best_bound, format_rational, parse_rational, Bound, Rational, RightCut};
pub use dyadic::Dyadic;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

/// A step counter for enumerations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stage(pub u64);

impl Stage {
    pub const ZERO: Stage = Stage(0);

    pub fn value(self) -> u64 {
        self.0
    }

    /// Exponents `k` with `2^k <= self`: the clock ticks at which staged
    /// searches take a fresh snapshot.
    pub fn clock_ticks(self) -> impl Iterator<Item = u32> {
        let top = if self.0 == 0 { None } else { Some(63 - self.0.leading_zeros()) };
        (0..).take(top.map_or(0, |t| t as usize + 1))
    }

    /// Largest `k` with `2^k <= self`, if any.
    pub fn last_tick(self) -> Option<u32> {
        self.clock_ticks().last()
    }

    pub fn scaled_down(self, divisor: u64) -> Stage {
        Stage(self.0 / divisor.max(1))
    }

    pub fn doubled(self) -> Stage {
        Stage(self.0.saturating_mul(2))
    }
}

impl From<u64> for Stage {
    fn from(v: u64) -> Self {
        Stage(v)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

type Generator<T> = dyn Fn(Stage) -> BTreeSet<T> + Send + Sync;

/// A computably enumerable set, given as a monotone stage-indexed generator.
///
/// The generator must satisfy `at(s) ⊆ at(s+1)`; the constructors in this
/// module guarantee it, and [`CeSet::is_monotone_through`] checks it for
/// closures supplied from outside.
pub struct CeSet<T> {
    gen: Arc<Generator<T>>,
}

impl<T> Clone for CeSet<T> {
    fn clone(&self) -> Self {
        CeSet { gen: Arc::clone(&self.gen) }
    }
}

impl<T> fmt::Debug for CeSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CeSet(..)")
    }
}

impl<T> CeSet<T>
where
    T: Ord + Clone + Send + Sync + 'static,
{
    /// Wraps a generator that already returns the cumulative output.
    pub fn from_cumulative(f: impl Fn(Stage) -> BTreeSet<T> + Send + Sync + 'static) -> Self {
        CeSet { gen: Arc::new(f) }
    }

    /// Builds a set from a per-stage emitter; stage `s` collects everything
    /// emitted at stages `0..s`.
    pub fn from_emitter<I>(emit: impl Fn(Stage) -> I + Send + Sync + 'static) -> Self
    where
        I: IntoIterator<Item = T>,
    {
        CeSet::from_cumulative(move |s| (0..s.0).flat_map(|t| emit(Stage(t))).collect())
    }

    pub fn empty() -> Self {
        CeSet::from_cumulative(|_| BTreeSet::new())
    }

    /// A set whose elements are all present from stage 1 on.
    pub fn finite(items: impl IntoIterator<Item = T>) -> Self {
        let items: BTreeSet<T> = items.into_iter().collect();
        CeSet::from_cumulative(move |s| if s.0 == 0 { BTreeSet::new() } else { items.clone() })
    }

    pub fn at(&self, stage: Stage) -> BTreeSet<T> {
        (self.gen)(stage)
    }

    pub fn contains_by(&self, item: &T, stage: Stage) -> bool {
        self.at(stage).contains(item)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U + Send + Sync + 'static) -> CeSet<U>
    where
        U: Ord + Clone + Send + Sync + 'static,
    {
        let inner = self.clone();
        CeSet::from_cumulative(move |s| inner.at(s).iter().map(&f).collect())
    }

    pub fn filter_map<U>(&self, f: impl Fn(&T) -> Option<U> + Send + Sync + 'static) -> CeSet<U>
    where
        U: Ord + Clone + Send + Sync + 'static,
    {
        let inner = self.clone();
        CeSet::from_cumulative(move |s| inner.at(s).iter().filter_map(&f).collect())
    }

    pub fn union(&self, other: &CeSet<T>) -> CeSet<T> {
        let (a, b) = (self.clone(), other.clone());
        CeSet::from_cumulative(move |s| {
            let mut out = a.at(s);
            out.extend(b.at(s));
            out
        })
    }

    /// Checks `at(s) ⊆ at(s+1)` for every `s < limit`.
    pub fn is_monotone_through(&self, limit: Stage) -> bool {
        let mut prev = self.at(Stage::ZERO);
        for s in 1..=limit.0 {
            let next = self.at(Stage(s));
            if !prev.is_subset(&next) {
                return false;
            }
            prev = next;
        }
        true
    }

    /// Checks `at(s) ⊆ at(2s)`.
    pub fn survives_doubling(&self, stage: Stage) -> bool {
        self.at(stage).is_subset(&self.at(stage.doubled()))
    }

    /// Caches stage outputs. Worth it for deeply composed names that are
    /// read at the same few stages many times.
    pub fn memoized(&self) -> CeSet<T> {
        let inner = self.clone();
        let memo: Arc<Mutex<HashMap<Stage, BTreeSet<T>>>> = Arc::default();
        CeSet::from_cumulative(move |s| {
            if let Some(hit) = memo.lock().expect("memo poisoned").get(&s) {
                return hit.clone();
            }
            let out = inner.at(s);
            memo.lock().expect("memo poisoned").insert(s, out.clone());
            out
        })
    }
}

type Transformer<A, B> = dyn Fn(&BTreeSet<A>, Stage) -> BTreeSet<B> + Send + Sync;

/// An enumeration operator: turns a finite prefix of an input enumeration
/// into a finite set of outputs, monotonically in both arguments.
pub struct EnumOperator<A, B> {
    transform: Arc<Transformer<A, B>>,
}

impl<A, B> Clone for EnumOperator<A, B> {
    fn clone(&self) -> Self {
        EnumOperator { transform: Arc::clone(&self.transform) }
    }
}

impl<A, B> EnumOperator<A, B>
where
    A: Ord + Clone + Send + Sync + 'static,
    B: Ord + Clone + Send + Sync + 'static,
{
    pub fn new(f: impl Fn(&BTreeSet<A>, Stage) -> BTreeSet<B> + Send + Sync + 'static) -> Self {
        EnumOperator { transform: Arc::new(f) }
    }

    /// Lifts a per-element rule: each input element contributes its own
    /// outputs independently.
    pub fn pointwise<I>(f: impl Fn(&A, Stage) -> I + Send + Sync + 'static) -> Self
    where
        I: IntoIterator<Item = B>,
    {
        EnumOperator::new(move |input, s| input.iter().flat_map(|a| f(a, s)).collect())
    }

    pub fn eval(&self, prefix: &BTreeSet<A>, stage: Stage) -> BTreeSet<B> {
        (self.transform)(prefix, stage)
    }

    /// The output enumeration whose stage-`s` value is `op(input.at(s), s)`.
    pub fn apply(&self, input: &CeSet<A>) -> CeSet<B> {
        let op = self.clone();
        let input = input.clone();
        CeSet::from_cumulative(move |s| op.eval(&input.at(s), s))
    }
}

impl<A> EnumOperator<A, A>
where
    A: Ord + Clone + Send + Sync + 'static,
{
    pub fn identity() -> Self {
        EnumOperator::new(|input, _| input.clone())
    }
}

/// Free-function form of [`EnumOperator::apply`].
pub fn apply_operator<A, B>(op: &EnumOperator<A, B>, input: &CeSet<A>, budget: Stage) -> CeSet<B>
where
    A: Ord + Clone + Send + Sync + 'static,
    B: Ord + Clone + Send + Sync + 'static,
{
    let out = op.apply(input);
    // the budget caps how far the returned set may be run
    CeSet::from_cumulative(move |s| out.at(s.min(budget)))
}

/// Round-robin dovetailing: task `i` is run for `⌊budget/(i+1)⌋` stages.
pub fn dovetail<T>(tasks: &[CeSet<T>], budget: Stage) -> Vec<BTreeSet<T>>
where
    T: Ord + Clone + Send + Sync + 'static,
{
    tasks
        .iter()
        .enumerate()
        .map(|(i, task)| task.at(budget.scaled_down(i as u64 + 1)))
        .collect()
}

/// Union of the dovetailed outputs.
pub fn dovetail_union<T>(tasks: &[CeSet<T>], budget: Stage) -> BTreeSet<T>
where
    T: Ord + Clone + Send + Sync + 'static,
{
    dovetail(tasks, budget).into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counter() -> CeSet<u64> {
        CeSet::from_emitter(|s| [s.0])
    }

    #[test]
    fn dovetail_constant_singletons() {
        let tasks = vec![CeSet::finite([7u64]), CeSet::finite([9u64])];
        let out = dovetail(&tasks, Stage(10));
        assert!(out[0].contains(&7));
        assert!(out[1].contains(&9));
    }

    #[test]
    fn dovetail_identity_schedule_alone() {
        let out = dovetail(&[counter()], Stage(5));
        assert_eq!(out[0], (0..5).collect());
    }

    #[test]
    fn dovetail_quota_shrinks_with_index() {
        let tasks = vec![counter(), counter(), counter()];
        let out = dovetail(&tasks, Stage(12));
        assert_eq!(out[0].len(), 12);
        assert_eq!(out[1].len(), 6);
        assert_eq!(out[2].len(), 4);
    }

    #[test]
    fn identity_and_doubling_operators() {
        let id = EnumOperator::<u64, u64>::identity();
        assert_eq!(id.apply(&CeSet::finite([3, 5])).at(Stage(3)), [3, 5].into());
        let double = EnumOperator::pointwise(|x: &u64, _| [2 * x]);
        assert_eq!(double.apply(&CeSet::finite([1, 2])).at(Stage(3)), [2, 4].into());
    }

    #[test]
    fn stage_zero_is_empty() {
        assert!(CeSet::finite([1u8]).at(Stage::ZERO).is_empty());
        assert!(counter().at(Stage::ZERO).is_empty());
    }

    #[test]
    fn clock_ticks() {
        assert_eq!(Stage(0).clock_ticks().count(), 0);
        assert_eq!(Stage(1).clock_ticks().collect::<Vec<_>>(), vec![0]);
        assert_eq!(Stage(5000).last_tick(), Some(12));
    }

    #[test]
    fn budget_caps_applied_operator() {
        let op = EnumOperator::<u64, u64>::identity();
        let capped = apply_operator(&op, &counter(), Stage(3));
        assert_eq!(capped.at(Stage(100)), (0..3).collect());
    }
}
