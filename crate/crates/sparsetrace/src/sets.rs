//! Storage for sparsity patterns: sets of input indices and symmetric sets of
//! index pairs.
//!
//! Tracers spend almost all of their time taking unions of these sets, so the
//! representation is swappable. Three backends implement [`PatternSet`]:
//!
//! * [`BitSet`]: a fixed-width bit vector. Unions are word-wise ORs.
//! * [`SortedSet`]: a sorted, duplicate-free vector. Unions are merges.
//! * [`DupSet`]: an append-only vector that tolerates duplicates and
//!   deduplicates lazily. Unions are concatenations.
//!
//! All three agree on observable behaviour; pick by workload. Dense patterns
//! favour [`BitSet`], very sparse patterns over wide inputs favour the vector
//! backends. Capacity is fixed at construction and out-of-range indices are
//! rejected rather than grown over.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;

thread_local! {
    static UNION_OPS: Cell<u64> = const { Cell::new(0) };
}

/// Number of set unions performed by this thread since the last
/// [`reset_union_op_count`].
///
/// Every [`PatternSet::union`] and [`PatternSet::union_in_place`] call counts
/// as one union, regardless of backend or operand size. Used to account for
/// the work saved by structure-aware tensor operations.
pub fn union_op_count() -> u64 {
    UNION_OPS.with(|c| c.get())
}

/// Resets this thread's union counter to zero.
pub fn reset_union_op_count() {
    UNION_OPS.with(|c| c.set(0));
}

fn bump_union_counter() {
    UNION_OPS.with(|c| c.set(c.get() + 1));
}

/// Errors from constructing or combining index sets.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    /// The index does not fit the set's fixed capacity.
    #[error("index {index} out of range for capacity {capacity}")]
    IndexOutOfRange { index: usize, capacity: usize },
    /// Two sets with different capacities were combined.
    #[error("capacity mismatch: {left} vs {right}")]
    CapacityMismatch { left: usize, right: usize },
}

/// A set of input indices drawn from `0..capacity`.
///
/// Implementations may store duplicates internally; [`PatternSet::indices`]
/// always reports the normalized (sorted, duplicate-free) view, and
/// [`PatternSet::normalize`] compacts the internal storage in place.
pub trait PatternSet: Clone + fmt::Debug {
    /// The empty set over `0..capacity`.
    fn empty(capacity: usize) -> Self;

    /// The one-element set `{index}` over `0..capacity`.
    fn singleton(index: usize, capacity: usize) -> Result<Self, SetError> {
        let mut s = Self::empty(capacity);
        s.insert(index)?;
        Ok(s)
    }

    /// The fixed capacity chosen at construction.
    fn capacity(&self) -> usize;

    /// Adds one index.
    fn insert(&mut self, index: usize) -> Result<(), SetError>;

    /// The union of two sets of equal capacity.
    fn union(&self, other: &Self) -> Result<Self, SetError>;

    /// Replaces `self` with `self ∪ other`. Counts as one union.
    fn union_in_place(&mut self, other: &Self) -> Result<(), SetError> {
        *self = self.union(other)?;
        Ok(())
    }

    /// Whether `index` is a member.
    fn contains(&self, index: usize) -> bool;

    /// Compacts internal storage to the canonical duplicate-free form.
    fn normalize(&mut self);

    /// Member indices in strictly increasing order.
    fn indices(&self) -> Vec<usize>;

    /// Number of distinct members.
    fn len(&self) -> usize;

    /// Whether the set has no members.
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn check_capacity(left: usize, right: usize) -> Result<(), SetError> {
    if left != right {
        return Err(SetError::CapacityMismatch { left, right });
    }
    Ok(())
}

fn check_index(index: usize, capacity: usize) -> Result<(), SetError> {
    if index >= capacity {
        return Err(SetError::IndexOutOfRange { index, capacity });
    }
    Ok(())
}

/// Fixed-width bit vector backend.
#[derive(Clone, PartialEq, Eq)]
pub struct BitSet {
    nbits: usize,
    words: Vec<u64>,
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitSet")
            .field("capacity", &self.nbits)
            .field("indices", &self.indices())
            .finish()
    }
}

impl PatternSet for BitSet {
    fn empty(capacity: usize) -> Self {
        BitSet {
            nbits: capacity,
            words: vec![0; capacity.div_ceil(64)],
        }
    }

    fn capacity(&self) -> usize {
        self.nbits
    }

    fn insert(&mut self, index: usize) -> Result<(), SetError> {
        check_index(index, self.nbits)?;
        self.words[index / 64] |= 1u64 << (index % 64);
        Ok(())
    }

    fn union(&self, other: &Self) -> Result<Self, SetError> {
        check_capacity(self.nbits, other.nbits)?;
        bump_union_counter();
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Ok(BitSet {
            nbits: self.nbits,
            words,
        })
    }

    fn union_in_place(&mut self, other: &Self) -> Result<(), SetError> {
        check_capacity(self.nbits, other.nbits)?;
        bump_union_counter();
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        Ok(())
    }

    fn contains(&self, index: usize) -> bool {
        index < self.nbits && self.words[index / 64] & (1u64 << (index % 64)) != 0
    }

    fn normalize(&mut self) {}

    fn indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(w * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Sorted duplicate-free vector backend. Kept canonical after every
/// operation, so `normalize` is a no-op.
#[derive(Clone, PartialEq, Eq)]
pub struct SortedSet {
    capacity: usize,
    items: Vec<u32>,
}

impl fmt::Debug for SortedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SortedSet")
            .field("capacity", &self.capacity)
            .field("indices", &self.items)
            .finish()
    }
}

impl PatternSet for SortedSet {
    fn empty(capacity: usize) -> Self {
        assert!(capacity <= u32::MAX as usize, "capacity exceeds u32 range");
        SortedSet {
            capacity,
            items: Vec::new(),
        }
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn insert(&mut self, index: usize) -> Result<(), SetError> {
        check_index(index, self.capacity)?;
        let idx = index as u32;
        if let Err(pos) = self.items.binary_search(&idx) {
            self.items.insert(pos, idx);
        }
        Ok(())
    }

    fn union(&self, other: &Self) -> Result<Self, SetError> {
        check_capacity(self.capacity, other.capacity)?;
        bump_union_counter();
        let mut items = Vec::with_capacity(self.items.len() + other.items.len());
        let (mut i, mut j) = (0, 0);
        while i < self.items.len() && j < other.items.len() {
            let (a, b) = (self.items[i], other.items[j]);
            if a <= b {
                items.push(a);
                i += 1;
                if a == b {
                    j += 1;
                }
            } else {
                items.push(b);
                j += 1;
            }
        }
        items.extend_from_slice(&self.items[i..]);
        items.extend_from_slice(&other.items[j..]);
        Ok(SortedSet {
            capacity: self.capacity,
            items,
        })
    }

    fn contains(&self, index: usize) -> bool {
        index < self.capacity && self.items.binary_search(&(index as u32)).is_ok()
    }

    fn normalize(&mut self) {}

    fn indices(&self) -> Vec<usize> {
        self.items.iter().map(|&i| i as usize).collect()
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

/// Append-only vector backend with lazy deduplication.
///
/// Unions concatenate and inserts push, so the raw storage may hold
/// duplicates until [`PatternSet::normalize`] runs. To bound memory the
/// storage self-compacts once it grows well past the capacity.
#[derive(Clone)]
pub struct DupSet {
    capacity: usize,
    items: Vec<u32>,
}

impl DupSet {
    /// Length of the raw storage, duplicates included.
    pub fn raw_len(&self) -> usize {
        self.items.len()
    }

    fn maybe_compact(&mut self) {
        if self.items.len() > 64 && self.items.len() > 4 * self.capacity {
            self.normalize();
        }
    }
}

impl fmt::Debug for DupSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DupSet")
            .field("capacity", &self.capacity)
            .field("indices", &self.indices())
            .finish()
    }
}

impl PatternSet for DupSet {
    fn empty(capacity: usize) -> Self {
        assert!(capacity <= u32::MAX as usize, "capacity exceeds u32 range");
        DupSet {
            capacity,
            items: Vec::new(),
        }
    }

    fn capacity(&self) -> usize {
        self.capacity
    }

    fn insert(&mut self, index: usize) -> Result<(), SetError> {
        check_index(index, self.capacity)?;
        self.items.push(index as u32);
        Ok(())
    }

    fn union(&self, other: &Self) -> Result<Self, SetError> {
        check_capacity(self.capacity, other.capacity)?;
        bump_union_counter();
        let mut items = Vec::with_capacity(self.items.len() + other.items.len());
        items.extend_from_slice(&self.items);
        items.extend_from_slice(&other.items);
        let mut out = DupSet {
            capacity: self.capacity,
            items,
        };
        out.maybe_compact();
        Ok(out)
    }

    fn union_in_place(&mut self, other: &Self) -> Result<(), SetError> {
        check_capacity(self.capacity, other.capacity)?;
        bump_union_counter();
        self.items.extend_from_slice(&other.items);
        self.maybe_compact();
        Ok(())
    }

    fn contains(&self, index: usize) -> bool {
        index < self.capacity && self.items.contains(&(index as u32))
    }

    fn normalize(&mut self) {
        self.items.sort_unstable();
        self.items.dedup();
    }

    fn indices(&self) -> Vec<usize> {
        let mut items = self.items.clone();
        items.sort_unstable();
        items.dedup();
        items.into_iter().map(|i| i as usize).collect()
    }

    fn len(&self) -> usize {
        self.indices().len()
    }
}

/// A symmetric set of index pairs `(i, j)` with `i, j < capacity`.
///
/// Stored as a map from first index to the [`PatternSet`] of second indices.
/// Symmetry is maintained eagerly: inserting `(i, j)` also inserts `(j, i)`,
/// so the map always describes a symmetric relation.
#[derive(Clone, Debug)]
pub struct PairSet<S: PatternSet> {
    capacity: usize,
    rows: BTreeMap<u32, S>,
}

impl<S: PatternSet> PairSet<S> {
    /// The empty pair set over `0..capacity` per side.
    pub fn empty(capacity: usize) -> Self {
        PairSet {
            capacity,
            rows: BTreeMap::new(),
        }
    }

    /// Per-side capacity.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Inserts `(i, j)` and its mirror `(j, i)`.
    pub fn insert(&mut self, i: usize, j: usize) -> Result<(), SetError> {
        check_index(i, self.capacity)?;
        check_index(j, self.capacity)?;
        self.row_mut(i).insert(j)?;
        if i != j {
            self.row_mut(j).insert(i)?;
        }
        Ok(())
    }

    fn row_mut(&mut self, i: usize) -> &mut S {
        let capacity = self.capacity;
        self.rows
            .entry(i as u32)
            .or_insert_with(|| S::empty(capacity))
    }

    /// The union of two symmetric pair sets.
    pub fn union(&self, other: &Self) -> Result<Self, SetError> {
        check_capacity(self.capacity, other.capacity)?;
        let mut out = self.clone();
        for (&i, row) in &other.rows {
            match out.rows.get_mut(&i) {
                Some(mine) => mine.union_in_place(row)?,
                None => {
                    out.rows.insert(i, row.clone());
                }
            }
        }
        Ok(out)
    }

    /// The symmetric product of two index sets: every `(i, j)` with
    /// `i ∈ a, j ∈ b`, plus the mirrored `(j, i)`.
    pub fn product(a: &S, b: &S) -> Result<Self, SetError> {
        check_capacity(a.capacity(), b.capacity())?;
        let mut out = PairSet::empty(a.capacity());
        if a.is_empty() || b.is_empty() {
            return Ok(out);
        }
        for i in a.indices() {
            out.row_mut(i).union_in_place(b)?;
        }
        for j in b.indices() {
            out.row_mut(j).union_in_place(a)?;
        }
        Ok(out)
    }

    /// Whether `(i, j)` is a member.
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows
            .get(&(i as u32))
            .is_some_and(|row| row.contains(j))
    }

    /// All stored pairs in lexicographic order. Mirrored pairs appear as two
    /// entries; diagonal pairs as one.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (&i, row) in &self.rows {
            for j in row.indices() {
                out.push((i as usize, j));
            }
        }
        out
    }

    /// Number of stored pairs, mirrors counted separately.
    pub fn len(&self) -> usize {
        self.rows.values().map(|r| r.len()).sum()
    }

    /// Whether no pair is stored.
    pub fn is_empty(&self) -> bool {
        self.rows.values().all(|r| r.is_empty())
    }

    /// Checks the symmetry invariant. Holds by construction; exposed for
    /// tests and debugging.
    pub fn is_symmetric(&self) -> bool {
        self.pairs().iter().all(|&(i, j)| self.contains(j, i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_indices<S: PatternSet>(capacity: usize, indices: &[usize]) -> S {
        let mut s = S::empty(capacity);
        for &i in indices {
            s.insert(i).unwrap();
        }
        s
    }

    fn singleton_holds_exactly_one_index<S: PatternSet>() {
        let s = S::singleton(3, 5).unwrap();
        assert_eq!(s.indices(), vec![3]);
        assert_eq!(s.len(), 1);
        assert!(s.contains(3));
        assert!(!s.contains(2));
        assert_eq!(s.capacity(), 5);
    }

    fn singleton_out_of_range_errors<S: PatternSet>() {
        let err = S::singleton(5, 5).unwrap_err();
        assert_eq!(
            err,
            SetError::IndexOutOfRange {
                index: 5,
                capacity: 5
            }
        );
    }

    fn union_merges_members<S: PatternSet>() {
        let a: S = from_indices(6, &[1, 3]);
        let b: S = from_indices(6, &[2, 3]);
        let u = a.union(&b).unwrap();
        assert_eq!(u.indices(), vec![1, 2, 3]);
        assert_eq!(u.len(), 3);
    }

    fn union_capacity_mismatch_errors<S: PatternSet>() {
        let a = S::empty(4);
        let b = S::empty(5);
        assert_eq!(
            a.union(&b).unwrap_err(),
            SetError::CapacityMismatch { left: 4, right: 5 }
        );
    }

    fn empty_set_is_empty<S: PatternSet>() {
        let s = S::empty(17);
        assert!(s.is_empty());
        assert_eq!(s.len(), 0);
        assert_eq!(s.indices(), Vec::<usize>::new());
    }

    macro_rules! backend_tests {
        ($name:ident, $ty:ty) => {
            mod $name {
                use super::*;

                #[test]
                fn singleton_basics() {
                    singleton_holds_exactly_one_index::<$ty>();
                }

                #[test]
                fn singleton_out_of_range() {
                    singleton_out_of_range_errors::<$ty>();
                }

                #[test]
                fn union_merges() {
                    union_merges_members::<$ty>();
                }

                #[test]
                fn union_capacity_mismatch() {
                    union_capacity_mismatch_errors::<$ty>();
                }

                #[test]
                fn empty() {
                    empty_set_is_empty::<$ty>();
                }
            }
        };
    }

    backend_tests!(bitset, BitSet);
    backend_tests!(sorted, SortedSet);
    backend_tests!(dup, DupSet);

    #[test]
    fn dup_backend_keeps_duplicates_until_normalize() {
        let a: DupSet = from_indices(5, &[1, 3]);
        let b: DupSet = from_indices(5, &[3]);
        let mut u = a.union(&b).unwrap();
        assert_eq!(u.raw_len(), 3);
        assert_eq!(u.len(), 2);
        assert_eq!(u.indices(), vec![1, 3]);
        u.normalize();
        assert_eq!(u.raw_len(), 2);
        assert_eq!(u.indices(), vec![1, 3]);
    }

    #[test]
    fn dup_backend_compacts_when_oversized() {
        let mut s = DupSet::empty(4);
        let one = DupSet::singleton(1, 4).unwrap();
        for _ in 0..100 {
            s.union_in_place(&one).unwrap();
        }
        assert!(s.raw_len() < 100);
        assert_eq!(s.indices(), vec![1]);
    }

    #[test]
    fn bitset_indices_cross_word_boundaries() {
        let s: BitSet = from_indices(200, &[0, 63, 64, 127, 128, 199]);
        assert_eq!(s.indices(), vec![0, 63, 64, 127, 128, 199]);
        assert_eq!(s.len(), 6);
    }

    #[test]
    fn union_counter_counts_union_calls() {
        reset_union_op_count();
        let a = BitSet::singleton(0, 8).unwrap();
        let b = BitSet::singleton(1, 8).unwrap();
        let mut c = a.union(&b).unwrap();
        c.union_in_place(&a).unwrap();
        assert_eq!(union_op_count(), 2);
        reset_union_op_count();
        assert_eq!(union_op_count(), 0);
    }

    #[test]
    fn pair_product_of_singletons_is_mirrored_pair() {
        let a = BitSet::singleton(1, 4).unwrap();
        let b = BitSet::singleton(2, 4).unwrap();
        let p = PairSet::product(&a, &b).unwrap();
        assert_eq!(p.pairs(), vec![(1, 2), (2, 1)]);
        assert_eq!(p.len(), 2);
        assert!(p.is_symmetric());
    }

    #[test]
    fn pair_product_diagonal_entry_counts_once() {
        let a = BitSet::singleton(2, 4).unwrap();
        let p = PairSet::product(&a, &a).unwrap();
        assert_eq!(p.pairs(), vec![(2, 2)]);
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn pair_product_with_empty_side_is_empty() {
        let a = BitSet::singleton(1, 4).unwrap();
        let e = BitSet::empty(4);
        assert!(PairSet::product(&a, &e).unwrap().is_empty());
        assert!(PairSet::product(&e, &a).unwrap().is_empty());
    }

    #[test]
    fn pair_insert_mirrors() {
        let mut p: PairSet<SortedSet> = PairSet::empty(5);
        p.insert(0, 3).unwrap();
        p.insert(2, 2).unwrap();
        assert_eq!(p.pairs(), vec![(0, 3), (2, 2), (3, 0)]);
        assert!(p.is_symmetric());
        assert!(p.contains(3, 0));
    }

    #[test]
    fn pair_union_merges_rows() {
        let a = BitSet::singleton(0, 4).unwrap();
        let b = BitSet::singleton(1, 4).unwrap();
        let c = BitSet::singleton(2, 4).unwrap();
        let p = PairSet::product(&a, &b).unwrap();
        let q = PairSet::product(&a, &c).unwrap();
        let u = p.union(&q).unwrap();
        assert_eq!(u.pairs(), vec![(0, 1), (0, 2), (1, 0), (2, 0)]);
        assert!(u.is_symmetric());
    }

    #[test]
    fn pair_capacity_mismatch_errors() {
        let a = BitSet::singleton(0, 4).unwrap();
        let b = BitSet::singleton(0, 5).unwrap();
        assert!(PairSet::product(&a, &b).is_err());
    }

    mod oracle {
        //! Cross-checks every backend against a plain `u128` bit mask.

        use super::*;
        use proptest::prelude::*;

        /// One step of a set-building scenario, applied identically to every
        /// backend and to the reference mask.
        #[derive(Debug, Clone)]
        enum Step {
            Insert(usize),
            UnionSingleton(usize),
            UnionSelf,
            Normalize,
        }

        fn step_strategy(capacity: usize) -> impl Strategy<Value = Step> {
            prop_oneof![
                (0..capacity).prop_map(Step::Insert),
                (0..capacity).prop_map(Step::UnionSingleton),
                Just(Step::UnionSelf),
                Just(Step::Normalize),
            ]
        }

        fn run_steps<S: PatternSet>(capacity: usize, steps: &[Step]) -> S {
            let mut s = S::empty(capacity);
            for step in steps {
                match *step {
                    Step::Insert(i) => s.insert(i).unwrap(),
                    Step::UnionSingleton(i) => {
                        let one = S::singleton(i, capacity).unwrap();
                        s = s.union(&one).unwrap();
                    }
                    Step::UnionSelf => {
                        let copy = s.clone();
                        s.union_in_place(&copy).unwrap();
                    }
                    Step::Normalize => s.normalize(),
                }
            }
            s
        }

        fn mask_of(capacity: usize, steps: &[Step]) -> u128 {
            let mut m = 0u128;
            for step in steps {
                match *step {
                    Step::Insert(i) | Step::UnionSingleton(i) => m |= 1 << i,
                    Step::UnionSelf | Step::Normalize => {}
                }
            }
            debug_assert!(capacity <= 128);
            m
        }

        fn mask_indices(m: u128) -> Vec<usize> {
            (0..128).filter(|&i| m & (1 << i) != 0).collect()
        }

        proptest! {
            #[test]
            fn backends_match_bit_mask_reference(
                capacity in 1usize..=128,
                raw_steps in proptest::collection::vec(step_strategy(128), 0..40),
            ) {
                let steps: Vec<Step> = raw_steps
                    .into_iter()
                    .map(|s| match s {
                        Step::Insert(i) => Step::Insert(i % capacity),
                        Step::UnionSingleton(i) => Step::UnionSingleton(i % capacity),
                        other => other,
                    })
                    .collect();
                let expected = mask_indices(mask_of(capacity, &steps));
                prop_assert_eq!(run_steps::<BitSet>(capacity, &steps).indices(), expected.clone());
                prop_assert_eq!(run_steps::<SortedSet>(capacity, &steps).indices(), expected.clone());
                prop_assert_eq!(run_steps::<DupSet>(capacity, &steps).indices(), expected);
            }

            #[test]
            fn backends_agree_pairwise_up_to_256(
                capacity in 1usize..=256,
                raw_steps in proptest::collection::vec(step_strategy(256), 0..60),
            ) {
                let steps: Vec<Step> = raw_steps
                    .into_iter()
                    .map(|s| match s {
                        Step::Insert(i) => Step::Insert(i % capacity),
                        Step::UnionSingleton(i) => Step::UnionSingleton(i % capacity),
                        other => other,
                    })
                    .collect();
                let bits = run_steps::<BitSet>(capacity, &steps);
                let sorted = run_steps::<SortedSet>(capacity, &steps);
                let dup = run_steps::<DupSet>(capacity, &steps);
                prop_assert_eq!(bits.indices(), sorted.indices());
                prop_assert_eq!(sorted.indices(), dup.indices());
                prop_assert_eq!(bits.len(), dup.len());
            }

            #[test]
            fn union_is_commutative_and_idempotent(
                xs in proptest::collection::vec(0usize..64, 0..20),
                ys in proptest::collection::vec(0usize..64, 0..20),
            ) {
                let a: BitSet = {
                    let mut s = BitSet::empty(64);
                    for &i in &xs { s.insert(i).unwrap(); }
                    s
                };
                let b: BitSet = {
                    let mut s = BitSet::empty(64);
                    for &i in &ys { s.insert(i).unwrap(); }
                    s
                };
                let ab = a.union(&b).unwrap();
                let ba = b.union(&a).unwrap();
                prop_assert_eq!(ab.indices(), ba.indices());
                let aa = a.union(&a).unwrap();
                prop_assert_eq!(aa.indices(), a.indices());
            }

            #[test]
            fn pair_product_matches_nested_loops(
                xs in proptest::collection::vec(0usize..12, 0..6),
                ys in proptest::collection::vec(0usize..12, 0..6),
            ) {
                let mut a = SortedSet::empty(12);
                let mut b = SortedSet::empty(12);
                for &i in &xs { a.insert(i).unwrap(); }
                for &j in &ys { b.insert(j).unwrap(); }
                let p = PairSet::product(&a, &b).unwrap();
                let mut expected = std::collections::BTreeSet::new();
                for &i in &xs {
                    for &j in &ys {
                        expected.insert((i, j));
                        expected.insert((j, i));
                    }
                }
                let got: std::collections::BTreeSet<_> = p.pairs().into_iter().collect();
                prop_assert_eq!(got, expected);
                prop_assert!(p.is_symmetric());
            }
        }
    }
}
