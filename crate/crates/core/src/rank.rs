//! Rank vectors and the shared rank table.
//!
//! A rank vector gives an edge one priority per label matrix; zero is the
//! highest priority and always sits at the edge's own label. The table only
//! stores permutations of `1..L`; the zero is injected when a vector is
//! handed out.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SketchError};

/// Rank byte of a cell nothing has written to yet. Compares lower than
/// every real rank.
pub const UNOCCUPIED: u8 = 255;

/// Largest supported number of labels (ranks must stay below [`UNOCCUPIED`]).
pub const MAX_LABELS: usize = 254;

/// Outcome of comparing an arriving edge's rank with a cell's rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Priority {
    /// The edge outranks the cell: evict and occupy.
    Higher,
    /// Same rank: add to the aggregate.
    Equal,
    /// The cell outranks the edge: leave it alone.
    Lower,
}

#[inline]
pub fn compare_priority(edge_rank: u8, cell_rank: u8) -> Priority {
    debug_assert!(edge_rank != UNOCCUPIED);
    // Numerically smaller is higher priority, and UNOCCUPIED is the largest byte.
    match edge_rank.cmp(&cell_rank) {
        Ordering::Less => Priority::Higher,
        Ordering::Equal => Priority::Equal,
        Ordering::Greater => Priority::Lower,
    }
}

/// A permutation of `0..L` with zero at the owning edge's label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RankVector(Vec<u8>);

impl RankVector {
    /// Builds the vector for an edge of `label` from a stored permutation of
    /// `1..L` by inserting zero at position `label`.
    pub fn with_zero_at(stored: &[u8], label: usize) -> Self {
        let mut ranks = Vec::with_capacity(stored.len() + 1);
        ranks.extend_from_slice(&stored[..label]);
        ranks.push(0);
        ranks.extend_from_slice(&stored[label..]);
        Self(ranks)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.0.len()];
        self.0.iter().all(|&r| {
            let r = r as usize;
            r < seen.len() && !std::mem::replace(&mut seen[r], true)
        })
    }
}

/// Rank of an edge in matrix `matrix`, read straight from the stored
/// permutation without materializing the vector.
#[inline]
pub(crate) fn rank_at(stored: &[u8], label: usize, matrix: usize) -> u8 {
    match matrix.cmp(&label) {
        Ordering::Less => stored[matrix],
        Ordering::Equal => 0,
        Ordering::Greater => stored[matrix - 1],
    }
}

/// `n!`, saturating at `u64::MAX`.
pub fn factorial_saturating(n: usize) -> u64 {
    (2..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k)).unwrap_or(u64::MAX)
}

/// `P_ranks` distinct permutations of `1..L`, stored flat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    width: usize,
    entries: Vec<u8>,
    /// Every full rank vector, entry-major then by label, when that fits
    /// in [`EXPANSION_LIMIT`] bytes; empty otherwise.
    expanded: Vec<u8>,
}

const EXPANSION_LIMIT: usize = 1 << 20;

impl RankTable {
    pub fn validate(num_labels: usize, count: usize) -> Result<()> {
        if count == 0 {
            return Err(SketchError::Config("number of rank vectors must be positive".into()));
        }
        let limit = factorial_saturating(num_labels.saturating_sub(1));
        if count as u64 > limit {
            return Err(SketchError::Config(format!(
                "{count} rank vectors requested but only (L-1)! = {limit} distinct ones exist for L = {num_labels}"
            )));
        }
        Ok(())
    }

    /// Rejection-samples `count` distinct uniform permutations of `1..L`.
    pub fn generate<R: Rng + ?Sized>(num_labels: usize, count: usize, rng: &mut R) -> Result<Self> {
        Self::validate(num_labels, count)?;
        let width = num_labels - 1;
        let mut seen = HashSet::with_capacity(count);
        let mut entries = Vec::with_capacity(count * width);
        let mut perm: Vec<u8> = (1..num_labels as u8).collect();
        while seen.len() < count {
            perm.shuffle(rng);
            if seen.insert(perm.clone()) {
                entries.extend_from_slice(&perm);
            }
        }
        Ok(Self::with_expansion(width, entries))
    }

    fn with_expansion(width: usize, entries: Vec<u8>) -> Self {
        let mut table = Self {
            width,
            entries,
            expanded: Vec::new(),
        };
        let num_labels = width + 1;
        if table.len() * num_labels * num_labels <= EXPANSION_LIMIT {
            let mut expanded = Vec::with_capacity(table.len() * num_labels * num_labels);
            for i in 0..table.len() {
                for label in 0..num_labels {
                    expanded.extend_from_slice(RankVector::with_zero_at(table.stored(i), label).as_slice());
                }
            }
            table.expanded = expanded;
        }
        table
    }

    /// Whether every full rank vector is precomputed.
    #[inline]
    pub(crate) fn is_expanded(&self) -> bool {
        !self.expanded.is_empty()
    }

    /// Offset of entry `index`'s full vector for label `label` in the
    /// expansion.
    #[inline]
    pub(crate) fn expanded_offset(&self, index: usize, label: usize) -> usize {
        let num_labels = self.width + 1;
        (index * num_labels + label) * num_labels
    }

    #[inline(always)]
    pub(crate) fn expanded_at(&self, offset: usize) -> &[u8] {
        &self.expanded[offset..offset + self.width + 1]
    }

    /// Full rank vector of entry `index` for an edge of label `label`,
    /// borrowed from the precomputed expansion or written into `buf`.
    #[inline]
    pub(crate) fn full<'a>(&'a self, index: usize, label: usize, buf: &'a mut [u8; 256]) -> &'a [u8] {
        if self.is_expanded() {
            return self.expanded_at(self.expanded_offset(index, label));
        }
        let num_labels = self.width + 1;
        let stored = self.stored(index);
        buf[..label].copy_from_slice(&stored[..label]);
        buf[label] = 0;
        buf[label + 1..num_labels].copy_from_slice(&stored[label..]);
        &buf[..num_labels]
    }

    pub(crate) fn from_raw(num_labels: usize, entries: Vec<u8>) -> Result<Self> {
        let width = num_labels - 1;
        if width > 0 && entries.len() % width != 0 {
            return Err(SketchError::Snapshot("rank table length mismatch".into()));
        }
        let table = Self::with_expansion(width, entries);
        let mut seen = HashSet::new();
        for i in 0..table.len() {
            let stored = table.stored(i);
            if !RankVector::with_zero_at(stored, 0).is_permutation() || !seen.insert(stored) {
                return Err(SketchError::Snapshot(format!("rank table entry {i} is invalid")));
            }
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        if self.width == 0 {
            // L = 1: a single empty vector.
            1
        } else {
            self.entries.len() / self.width
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn stored(&self, index: usize) -> &[u8] {
        &self.entries[index * self.width..(index + 1) * self.width]
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.entries
    }
}
