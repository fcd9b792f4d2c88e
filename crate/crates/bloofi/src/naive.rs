use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::filter::BloomFilter;
use crate::hash::HashFamily;

/// The baseline: an unindexed list of filters scanned linearly on every
/// query. Slow by design, but its answers are exact with respect to the
/// stored filters, which makes it the ground truth the other indexes are
/// tested against.
pub struct NaiveIndex {
    family: Arc<HashFamily>,
    entries: Vec<(u64, BloomFilter)>,
    ids: HashSet<u64>,
}

impl NaiveIndex {
    pub fn new(family: Arc<HashFamily>) -> Self {
        NaiveIndex { family, entries: Vec::new(), ids: HashSet::new() }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn family(&self) -> &Arc<HashFamily> {
        &self.family
    }

    /// Identifiers of every filter matching `element`, in ascending order.
    /// Checks each stored filter, so the cost is always the full length.
    pub fn find_matches(&self, element: u64) -> Vec<u64> {
        let positions = self.family.positions(element);
        let mut out: Vec<u64> = self
            .entries
            .iter()
            .filter(|(_, f)| positions.iter().all(|&p| f.bits().get(p)))
            .map(|(id, _)| *id)
            .collect();
        out.sort_unstable();
        out
    }

    pub fn insert(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        if !self.ids.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        self.entries.push((id, filter.clone()));
        Ok(())
    }

    pub fn delete(&mut self, id: u64) -> Result<()> {
        if !self.ids.remove(&id) {
            return Err(Error::UnknownId(id));
        }
        let pos = self.entries.iter().position(|(i, _)| *i == id).expect("id set out of sync");
        self.entries.remove(pos);
        Ok(())
    }

    /// Replaces the stored filter wholesale. Unlike the tree and flat
    /// indexes this is not OR-only: the baseline keeps exact ground truth,
    /// which lets tests exercise the others' monotone-update contract.
    pub fn update(&mut self, id: u64, filter: &BloomFilter) -> Result<()> {
        if filter.family().as_ref() != self.family.as_ref() {
            return Err(Error::FamilyMismatch);
        }
        let entry = self
            .entries
            .iter_mut()
            .find(|(i, _)| *i == id)
            .ok_or(Error::UnknownId(id))?;
        entry.1 = filter.clone();
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|(id, _)| *id)
    }

    pub fn get(&self, id: u64) -> Option<&BloomFilter> {
        self.entries.iter().find(|(i, _)| *i == id).map(|(_, f)| f)
    }
}
