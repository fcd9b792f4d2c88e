//! The bit-sliced index: instead of storing each filter as its own bitmap,
//! slots are packed so word `i` of a slice array holds bit `i` of up to
//! `W` resident filters. A query then needs only the `k` hashed words per
//! array: one AND chain tests `W` filters at once.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::HashFamily;

/// Backing word of a slice array. Production use is `u64`; the narrower
/// widths exist so unit tests can exercise multi-array bookkeeping with a
/// handful of filters.
pub trait SliceWord: Copy + Eq + std::fmt::Debug + 'static {
    const BITS: usize;
    const ZERO: Self;
    fn bit(i: usize) -> Self;
    fn test(self, i: usize) -> bool;
    fn or_assign(&mut self, other: Self);
    fn and(self, other: Self) -> Self;
    fn clear_bit(&mut self, i: usize);
    fn count_ones(self) -> u32;
    fn trailing_zeros(self) -> u32;
    fn not(self) -> Self;
    fn is_zero(self) -> bool {
        self == Self::ZERO
    }
}

macro_rules! impl_slice_word {
    ($($t:ty),*) => {$(
        impl SliceWord for $t {
            const BITS: usize = <$t>::BITS as usize;
            const ZERO: Self = 0;
            fn bit(i: usize) -> Self { 1 << i }
            fn test(self, i: usize) -> bool { self >> i & 1 == 1 }
            fn or_assign(&mut self, other: Self) { *self |= other; }
            fn and(self, other: Self) -> Self { self & other }
            fn clear_bit(&mut self, i: usize) { *self &= !(1 << i); }
            fn count_ones(self) -> u32 { <$t>::count_ones(self) }
            fn trailing_zeros(self) -> u32 { <$t>::trailing_zeros(self) }
            fn not(self) -> Self { !self }
        }
    )*};
}

impl_slice_word!(u8, u16, u32, u64);

/// One transposed block: `m` words, each word holding the corresponding
/// bit of up to `W::BITS` filters.
struct SliceArray<W> {
    words: Vec<W>,
}

impl<W: SliceWord> SliceArray<W> {
    fn new(m: usize) -> Self {
        SliceArray { words: vec![W::ZERO; m] }
    }
}

/// Bit-sliced filter index.
///
/// Slots live in `zeta` slice arrays of `W::BITS` columns each; an
/// availability bitmap tracks which of the `L = zeta * W::BITS` slots hold
/// a live filter, and a hash map plus a slot-indexed id table translate
/// both ways between filter identifiers and slots. Deleting the only
/// occupant of an array drops the whole array and shifts the higher slots
/// down; deleting from a shared array clears the filter's column word by
/// word, since the original bitmap is no longer available to diff against.
pub struct FlatBloofi<W: SliceWord = u64> {
    family: Arc<HashFamily>,
    arrays: Vec<SliceArray<W>>,
    /// One availability word per array; bit `j` marks slot `a * W + j`.
    beta: Vec<W>,
    slot_to_id: Vec<u64>,
    id_to_slot: HashMap<u64, usize>,
    /// Slice-array words fetched by queries, for cost accounting.
    words_read: AtomicU64,
}

impl<W: SliceWord> FlatBloofi<W> {
    pub fn new(family: Arc<HashFamily>) -> Self {
        FlatBloofi {
            family,
            arrays: Vec::new(),
            beta: Vec::new(),
            slot_to_id: Vec::new(),
            id_to_slot: HashMap::new(),
            words_read: AtomicU64::new(0),
        }
    }

    pub fn family(&self) -> &Arc<HashFamily> {
        &self.family
    }

    pub fn len(&self) -> usize {
        self.id_to_slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_slot.is_empty()
    }

    /// Number of slice arrays currently allocated.
    pub fn array_count(&self) -> usize {
        self.arrays.len()
    }

    /// Slot capacity, `zeta * W`.
    pub fn capacity(&self) -> usize {
        self.arrays.len() * W::BITS
    }

    /// Total slice words held, `zeta * m`.
    pub fn word_count(&self) -> usize {
        self.arrays.len() * self.family.m()
    }

    /// Slice words read by queries since the last reset. Each query reads
    /// at most `k` words per array.
    pub fn words_read(&self) -> u64 {
        self.words_read.load(Ordering::Relaxed)
    }

    pub fn reset_words_read(&self) {
        self.words_read.store(0, Ordering::Relaxed);
    }

    pub fn contains_id(&self, id: u64) -> bool {
        self.id_to_slot.contains_key(&id)
    }

    /// Identifiers of all filters matching `element`, ascending. For each
    /// array the `k` hashed words are ANDed together, masked by that
    /// array's availability word, and the surviving columns are mapped
    /// back to identifiers.
    pub fn find_matches(&self, element: u64) -> Vec<u64> {
        let positions = self.family.positions(element);
        let mut out = Vec::new();
        for (a, array) in self.arrays.iter().enumerate() {
            let mut acc = self.beta[a];
            for &p in &positions {
                if acc.is_zero() {
                    break;
                }
                self.words_read.fetch_add(1, Ordering::Relaxed);
                acc = acc.and(array.words[p]);
            }
            let mut rem = acc;
            while !rem.is_zero() {
                let j = rem.trailing_zeros() as usize;
                rem.clear_bit(j);
                out.push(self.slot_to_id[a * W::BITS + j]);
            }
        }
        out.sort_unstable();
        out
    }

    /// Claims the lowest free slot (appending a fresh array when none is
    /// free) and ORs the filter's set bits into that column.
    pub fn insert(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        if self.id_to_slot.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let slot = match self.lowest_free_slot() {
            Some(slot) => slot,
            None => {
                self.arrays.push(SliceArray::new(self.family.m()));
                self.beta.push(W::ZERO);
                self.slot_to_id.extend(std::iter::repeat_n(0u64, W::BITS));
                (self.arrays.len() - 1) * W::BITS
            }
        };
        let (a, j) = (slot / W::BITS, slot % W::BITS);
        self.beta[a].or_assign(W::bit(j));
        self.slot_to_id[slot] = id;
        self.id_to_slot.insert(id, slot);
        let column = W::bit(j);
        for i in filter.bits().ones() {
            self.arrays[a].words[i].or_assign(column);
        }
        Ok(())
    }

    /// Removes the filter. A sole occupant takes its whole array (and the
    /// matching availability and id-table segments) with it, renumbering
    /// every higher slot down by `W`; otherwise the column is cleared
    /// across all `m` words.
    pub fn delete(&mut self, id: u64) -> Result<()> {
        let slot = self.id_to_slot.remove(&id).ok_or(Error::UnknownId(id))?;
        let (a, j) = (slot / W::BITS, slot % W::BITS);
        let was_alone = self.beta[a].count_ones() == 1;
        self.beta[a].clear_bit(j);
        if was_alone {
            self.arrays.remove(a);
            self.beta.remove(a);
            self.slot_to_id.drain(a * W::BITS..(a + 1) * W::BITS);
            for s in self.id_to_slot.values_mut() {
                if *s > slot {
                    *s -= W::BITS;
                }
            }
        } else {
            for word in &mut self.arrays[a].words {
                word.clear_bit(j);
            }
        }
        Ok(())
    }

    /// OR-updates the stored column with `filter`, which must be a superset
    /// of it: with only the transposed column left, a shrinking update
    /// cannot be diffed and is rejected.
    pub fn update(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        let slot = *self.id_to_slot.get(&id).ok_or(Error::UnknownId(id))?;
        let (a, j) = (slot / W::BITS, slot % W::BITS);
        let bits = filter.bits();
        for (i, word) in self.arrays[a].words.iter().enumerate() {
            if word.test(j) && !bits.get(i) {
                return Err(Error::NonMonotonicUpdate(id));
            }
        }
        let column = W::bit(j);
        for i in bits.ones() {
            self.arrays[a].words[i].or_assign(column);
        }
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.id_to_slot.keys().copied()
    }

    pub fn slot_of(&self, id: u64) -> Option<usize> {
        self.id_to_slot.get(&id).copied()
    }

    /// Rebuilds the stored bitmap of one column, for tests and diagnostics.
    pub fn column_bits(&self, id: u64) -> Option<crate::bitvec::BitVector> {
        let slot = self.slot_of(id)?;
        let (a, j) = (slot / W::BITS, slot % W::BITS);
        let mut bits = crate::bitvec::BitVector::new(self.family.m());
        for (i, word) in self.arrays[a].words.iter().enumerate() {
            if word.test(j) {
                bits.set(i);
            }
        }
        Some(bits)
    }

    fn lowest_free_slot(&self) -> Option<usize> {
        for (a, &word) in self.beta.iter().enumerate() {
            let free = word.not();
            if !free.is_zero() {
                return Some(a * W::BITS + free.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Verifies the structural invariants; intended for tests. Checks the
    /// availability popcount, the two-way id mapping, that no array is
    /// empty, and that columns of unoccupied slots are zero everywhere.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.beta.len() != self.arrays.len() {
            return Err("availability words out of step with arrays".into());
        }
        if self.slot_to_id.len() != self.capacity() {
            return Err("id table length is not the slot capacity".into());
        }
        let live: u32 = self.beta.iter().map(|w| w.count_ones()).sum();
        if live as usize != self.id_to_slot.len() {
            return Err(format!(
                "{} availability bits for {} mapped ids",
                live,
                self.id_to_slot.len()
            ));
        }
        for (id, &slot) in &self.id_to_slot {
            if slot >= self.capacity() {
                return Err(format!("id {id} maps to out-of-range slot {slot}"));
            }
            if !self.beta[slot / W::BITS].test(slot % W::BITS) {
                return Err(format!("id {id} maps to an unavailable slot"));
            }
            if self.slot_to_id[slot] != *id {
                return Err(format!("slot {slot} does not map back to id {id}"));
            }
        }
        for (a, array) in self.arrays.iter().enumerate() {
            if self.beta[a].is_zero() {
                return Err(format!("array {a} is empty but was not removed"));
            }
            let dead = self.beta[a].not();
            for (i, &word) in array.words.iter().enumerate() {
                if !word.and(dead).is_zero() {
                    return Err(format!("array {a} word {i} has bits in unoccupied columns"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::BitVector;
    use crate::naive::NaiveIndex;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn mod8_family() -> Arc<HashFamily> {
        Arc::new(HashFamily::with_multipliers(8, vec![1]).unwrap())
    }

    fn single(fam: &Arc<HashFamily>, element: u64) -> BloomFilter {
        let mut f = BloomFilter::new(fam.clone());
        f.add(element);
        f
    }

    #[test]
    fn empty_index_matches_nothing() {
        let idx: FlatBloofi = FlatBloofi::new(mod8_family());
        assert!(idx.find_matches(4).is_empty());
        assert_eq!(idx.array_count(), 0);
    }

    #[test]
    fn two_filters_query_discriminates() {
        let fam = mod8_family();
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        idx.insert(100, &single(&fam, 4)).unwrap();
        idx.insert(200, &single(&fam, 6)).unwrap();
        assert_eq!(idx.find_matches(4), vec![100]);
        assert_eq!(idx.find_matches(6), vec![200]);
        assert!(idx.find_matches(3).is_empty());
        idx.check_invariants().unwrap();
    }

    #[test]
    fn array_grows_at_word_boundaries() {
        let fam = Arc::new(HashFamily::generate(3, 64, 1).unwrap());
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        for id in 0..64u64 {
            idx.insert(id, &single(&fam, id)).unwrap();
        }
        assert_eq!(idx.array_count(), 1);
        idx.insert(64, &single(&fam, 64)).unwrap();
        assert_eq!(idx.array_count(), 2);
        idx.check_invariants().unwrap();
    }

    #[test]
    fn narrow_words_grow_the_same_way() {
        let fam = Arc::new(HashFamily::generate(2, 32, 2).unwrap());
        let mut idx: FlatBloofi<u8> = FlatBloofi::new(fam.clone());
        for id in 0..8u64 {
            idx.insert(id, &single(&fam, id)).unwrap();
        }
        assert_eq!(idx.array_count(), 1);
        idx.insert(8, &single(&fam, 8)).unwrap();
        assert_eq!(idx.array_count(), 2);
        assert_eq!(idx.capacity(), 16);
        idx.check_invariants().unwrap();
    }

    #[test]
    fn freed_slots_are_reused_lowest_first() {
        let fam = mod8_family();
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        idx.insert(10, &single(&fam, 0)).unwrap();
        idx.insert(11, &single(&fam, 1)).unwrap();
        idx.insert(12, &single(&fam, 2)).unwrap();
        let freed = idx.slot_of(11).unwrap();
        idx.delete(11).unwrap();
        idx.insert(13, &single(&fam, 3)).unwrap();
        assert_eq!(idx.slot_of(13), Some(freed));
        idx.check_invariants().unwrap();
    }

    #[test]
    fn delete_from_shared_array_clears_the_column() {
        let fam = mod8_family();
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        idx.insert(1, &single(&fam, 4)).unwrap();
        idx.insert(2, &single(&fam, 6)).unwrap();
        idx.delete(1).unwrap();
        assert_eq!(idx.array_count(), 1);
        assert!(idx.find_matches(4).is_empty());
        assert_eq!(idx.find_matches(6), vec![2]);
        idx.check_invariants().unwrap();
    }

    #[test]
    fn sole_occupant_delete_drops_the_array() {
        let fam = Arc::new(HashFamily::generate(3, 64, 4).unwrap());
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        for id in 0..65u64 {
            idx.insert(id, &single(&fam, id)).unwrap();
        }
        assert_eq!(idx.array_count(), 2);
        idx.delete(64).unwrap();
        assert_eq!(idx.array_count(), 1);
        idx.check_invariants().unwrap();
    }

    #[test]
    fn sole_occupant_delete_renumbers_higher_slots() {
        // Build three u8-width arrays, hollow out the middle one, then
        // delete its last occupant: the third array's ids shift down.
        let fam = Arc::new(HashFamily::generate(2, 32, 5).unwrap());
        let mut idx: FlatBloofi<u8> = FlatBloofi::new(fam.clone());
        let mut oracle = NaiveIndex::new(fam.clone());
        for id in 0..17u64 {
            idx.insert(id, &single(&fam, id)).unwrap();
            oracle.insert(id, &single(&fam, id)).unwrap();
        }
        assert_eq!(idx.array_count(), 3);
        for id in 8..15u64 {
            idx.delete(id).unwrap();
            oracle.delete(id).unwrap();
        }
        assert_eq!(idx.array_count(), 3);
        idx.delete(15).unwrap();
        oracle.delete(15).unwrap();
        assert_eq!(idx.array_count(), 2);
        assert_eq!(idx.slot_of(16), Some(8));
        idx.check_invariants().unwrap();
        for q in 0..40u64 {
            assert_eq!(idx.find_matches(q), oracle.find_matches(q), "query {q}");
        }
    }

    #[test]
    fn update_is_or_only_and_idempotent() {
        let fam = mod8_family();
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        let mut f = single(&fam, 4);
        idx.insert(1, &f).unwrap();
        let before = idx.column_bits(1).unwrap();
        idx.update(1, &f).unwrap();
        assert_eq!(idx.column_bits(1).unwrap(), before);

        f.add(6);
        idx.update(1, &f).unwrap();
        assert_eq!(idx.find_matches(6), vec![1]);
        assert_eq!(idx.find_matches(4), vec![1]);

        // Shrinking update must be rejected.
        let smaller = single(&fam, 6);
        assert!(matches!(idx.update(1, &smaller), Err(Error::NonMonotonicUpdate(1))));
    }

    #[test]
    fn update_sets_at_most_k_new_column_bits() {
        let fam = Arc::new(HashFamily::generate(3, 128, 6).unwrap());
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        let mut f = BloomFilter::new(fam.clone());
        f.add(11);
        idx.insert(1, &f).unwrap();
        let before = idx.column_bits(1).unwrap();
        f.add(99);
        idx.update(1, &f).unwrap();
        let after = idx.column_bits(1).unwrap();
        assert!(before.is_subset_of(&after));
        assert!(after.count_ones() - before.count_ones() <= 3);
    }

    #[test]
    fn duplicate_and_unknown_ids() {
        let fam = mod8_family();
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        idx.insert(5, &single(&fam, 1)).unwrap();
        assert!(matches!(idx.insert(5, &single(&fam, 2)), Err(Error::DuplicateId(5))));
        assert!(matches!(idx.delete(6), Err(Error::UnknownId(6))));
        assert!(matches!(idx.update(6, &single(&fam, 2)), Err(Error::UnknownId(6))));
    }

    #[test]
    fn queries_read_at_most_k_words_per_array() {
        let fam = Arc::new(HashFamily::generate(5, 256, 7).unwrap());
        let mut rng = StdRng::seed_from_u64(7);
        let mut idx: FlatBloofi = FlatBloofi::new(fam.clone());
        for id in 0..130u64 {
            let mut f = BloomFilter::new(fam.clone());
            for _ in 0..5 {
                f.add(rng.gen());
            }
            idx.insert(id, &f).unwrap();
        }
        for _ in 0..50 {
            idx.reset_words_read();
            idx.find_matches(rng.gen());
            assert!(idx.words_read() <= (fam.k() * idx.array_count()) as u64);
        }
    }

    /// Shadow-model fuzz: a map of plain bitmaps must stay equal to the
    /// transposed columns through arbitrary operation interleavings, at
    /// both word widths.
    fn transposition_fuzz<W: SliceWord>(seed: u64) {
        let fam = Arc::new(HashFamily::generate(3, 96, seed).unwrap());
        let mut rng = StdRng::seed_from_u64(seed);
        let mut idx: FlatBloofi<W> = FlatBloofi::new(fam.clone());
        let mut shadow: HashMap<u64, BitVector> = HashMap::new();
        let mut live: Vec<u64> = Vec::new();
        let mut next_id = 0u64;
        for _ in 0..600 {
            match rng.gen_range(0..10) {
                0..=4 => {
                    let mut f = BloomFilter::new(fam.clone());
                    for _ in 0..rng.gen_range(1..6) {
                        f.add(rng.gen());
                    }
                    idx.insert(next_id, &f).unwrap();
                    shadow.insert(next_id, f.bits().clone());
                    live.push(next_id);
                    next_id += 1;
                }
                5..=6 => {
                    if !live.is_empty() {
                        let id = live.swap_remove(rng.gen_range(0..live.len()));
                        idx.delete(id).unwrap();
                        shadow.remove(&id);
                    }
                }
                7..=8 => {
                    if !live.is_empty() {
                        let id = live[rng.gen_range(0..live.len())];
                        let mut bits = shadow[&id].clone();
                        let mut extra = BloomFilter::new(fam.clone());
                        extra.add(rng.gen());
                        bits.union_with(extra.bits());
                        let f = BloomFilter::from_bits(fam.clone(), bits.clone()).unwrap();
                        idx.update(id, &f).unwrap();
                        shadow.insert(id, bits);
                    }
                }
                _ => {
                    let q: u64 = rng.gen();
                    let positions = fam.positions(q);
                    let mut want: Vec<u64> = shadow
                        .iter()
                        .filter(|(_, bits)| positions.iter().all(|&p| bits.get(p)))
                        .map(|(&id, _)| id)
                        .collect();
                    want.sort_unstable();
                    assert_eq!(idx.find_matches(q), want);
                }
            }
            idx.check_invariants().unwrap();
            for (&id, bits) in &shadow {
                assert_eq!(&idx.column_bits(id).unwrap(), bits, "column mismatch for id {id}");
            }
        }
    }

    #[test]
    fn transposition_fidelity_u64() {
        transposition_fuzz::<u64>(1001);
    }

    #[test]
    fn transposition_fidelity_u8() {
        transposition_fuzz::<u8>(1002);
    }
}
