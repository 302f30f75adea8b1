//! Sparse circuit storage: a fixed slot array with tombstones, indexed by a
//! complete binary tree of subtree gate counts.
//!
//! The tree lives in an implicit heap layout. Node 1 is the root, node `k`
//! has children `2k` and `2k + 1`, and the leaves occupy
//! `[leaves, 2 * leaves)` where `leaves` is the slot count rounded up to a
//! power of two. Padding leaves always weigh zero.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gate::Gate;

/// Batches smaller than this are applied on the calling thread.
const PAR_THRESHOLD: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Gate(Gate),
    Tombstone,
}

impl Slot {
    pub fn gate(&self) -> Option<&Gate> {
        match self {
            Slot::Gate(g) => Some(g),
            Slot::Tombstone => None,
        }
    }

    pub fn is_tombstone(&self) -> bool {
        matches!(self, Slot::Tombstone)
    }

    fn weight(&self) -> u32 {
        match self {
            Slot::Gate(_) => 1,
            Slot::Tombstone => 0,
        }
    }
}

impl From<Gate> for Slot {
    fn from(g: Gate) -> Self {
        Slot::Gate(g)
    }
}

/// A contiguous run of gates by rank, together with the slots they occupy.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub start_rank: usize,
    pub gates: Vec<Gate>,
    /// `slots[k]` is the slot index holding `gates[k]`.
    pub slots: Vec<usize>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct Circuit {
    slots: Vec<Slot>,
    tree: Vec<u32>,
    leaves: usize,
    num_qubits: u32,
}

impl Circuit {
    /// Build a circuit with every slot holding a gate.
    pub fn create(gates: &[Gate], num_qubits: u32) -> Result<Self> {
        if gates.is_empty() {
            return Err(Error::EmptyCircuit);
        }
        gates.par_iter().try_for_each(|g| g.validate(num_qubits))?;
        let slots: Vec<Slot> = gates.par_iter().map(|&g| Slot::Gate(g)).collect();
        let leaves = slots.len().next_power_of_two();
        let mut tree = vec![0u32; 2 * leaves];
        tree[leaves..leaves + slots.len()]
            .par_iter_mut()
            .zip(slots.par_iter())
            .for_each(|(w, s)| *w = s.weight());
        build_levels(&mut tree, leaves);
        Ok(Self {
            slots,
            tree,
            leaves,
            num_qubits,
        })
    }

    pub fn num_qubits(&self) -> u32 {
        self.num_qubits
    }

    /// Number of slots, gates and tombstones alike. Never changes.
    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    /// Number of live gates (the root weight).
    pub fn len(&self) -> usize {
        self.tree[1] as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of edges on a root-to-leaf path.
    pub fn height(&self) -> usize {
        self.leaves.trailing_zeros() as usize
    }

    pub fn slot(&self, index: usize) -> Option<&Slot> {
        self.slots.get(index)
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    /// Number of gates strictly before slot `index`. `index == capacity()`
    /// is allowed and yields the total gate count.
    pub fn before(&self, index: usize) -> Result<usize> {
        if index > self.slots.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.slots.len(),
            });
        }
        if index == self.leaves {
            return Ok(self.len());
        }
        let mut node = self.leaves + index;
        let mut count = 0u32;
        while node > 1 {
            if node & 1 == 1 {
                count += self.tree[node - 1];
            }
            node >>= 1;
        }
        Ok(count as usize)
    }

    /// Slot index of the gate with the given rank.
    pub fn index_of(&self, rank: usize) -> Result<usize> {
        if rank >= self.len() {
            return Err(Error::RankOutOfRange {
                rank,
                len: self.len(),
            });
        }
        let mut node = 1;
        let mut rank = rank as u32;
        while node < self.leaves {
            let left = self.tree[2 * node];
            if rank < left {
                node *= 2;
            } else {
                rank -= left;
                node = 2 * node + 1;
            }
        }
        Ok(node - self.leaves)
    }

    /// The gate with the given rank, skipping tombstones.
    pub fn get(&self, rank: usize) -> Result<Gate> {
        let index = self.index_of(rank)?;
        match self.slots[index] {
            Slot::Gate(g) => Ok(g),
            Slot::Tombstone => unreachable!("index tree points at a tombstone"),
        }
    }

    /// Live gates in slot order.
    pub fn gates(&self) -> Vec<Gate> {
        self.slots.par_iter().filter_map(|s| s.gate().copied()).collect()
    }

    /// Gates with ranks in `[center - omega, center + omega)`, clamped to the
    /// circuit. `center_rank` may equal `len()`.
    pub fn extract_segment(&self, center_rank: usize, omega: usize) -> Segment {
        let n = self.len();
        let start = center_rank.saturating_sub(omega).min(n);
        let end = center_rank.saturating_add(omega).min(n);
        let mut gates = Vec::with_capacity(end - start);
        let mut slots = Vec::with_capacity(end - start);
        if start < end {
            // Locate the first gate through the tree, then walk the slot
            // array. Each later gate is found by descending from the lowest
            // ancestor with weight to the right, which stays O(lg n) per gate
            // even across long tombstone runs.
            let mut index = self.index_of(start).expect("rank checked above");
            for _ in start..end {
                slots.push(index);
                gates.push(*self.slots[index].gate().expect("live slot"));
                index = self.next_live(index).unwrap_or(usize::MAX);
            }
        }
        Segment {
            start_rank: start,
            gates,
            slots,
        }
    }

    /// First live slot strictly after `index`.
    fn next_live(&self, index: usize) -> Option<usize> {
        if index + 1 < self.slots.len() && !self.slots[index + 1].is_tombstone() {
            return Some(index + 1);
        }
        let mut node = self.leaves + index;
        // climb until there is a right sibling with weight
        loop {
            if node == 1 {
                return None;
            }
            if node & 1 == 0 && self.tree[node + 1] > 0 {
                node += 1;
                break;
            }
            node >>= 1;
        }
        while node < self.leaves {
            node = if self.tree[2 * node] > 0 { 2 * node } else { 2 * node + 1 };
        }
        Some(node - self.leaves)
    }

    fn check_updates(&self, updates: &[(usize, Slot)]) -> Result<Vec<usize>> {
        let mut order: Vec<usize> = (0..updates.len()).collect();
        order.sort_unstable_by_key(|&k| updates[k].0);
        for w in order.windows(2) {
            if updates[w[0]].0 == updates[w[1]].0 {
                return Err(Error::DuplicateIndex {
                    index: updates[w[0]].0,
                });
            }
        }
        if let Some(&last) = order.last() {
            let index = updates[last].0;
            if index >= self.slots.len() {
                return Err(Error::IndexOutOfRange {
                    index,
                    len: self.slots.len(),
                });
            }
        }
        for (_, slot) in updates {
            if let Slot::Gate(g) = slot {
                g.validate(self.num_qubits)?;
            }
        }
        Ok(order)
    }

    /// Replace slots in one batch and repair the index tree level by level,
    /// touching only ancestors of changed leaves.
    pub fn substitute(&mut self, updates: &[(usize, Slot)]) -> Result<()> {
        self.substitute_counted(updates).map(|_| ())
    }

    /// Like [`substitute`](Self::substitute), returning how many internal
    /// weights were rewritten.
    pub(crate) fn substitute_counted(&mut self, updates: &[(usize, Slot)]) -> Result<usize> {
        let order = self.check_updates(updates)?;
        let mut dirty: Vec<usize> = Vec::with_capacity(order.len());
        for &k in &order {
            let (index, slot) = updates[k];
            self.slots[index] = slot;
            let leaf = self.leaves + index;
            self.tree[leaf] = slot.weight();
            let parent = leaf >> 1;
            if parent >= 1 && dirty.last() != Some(&parent) {
                dirty.push(parent);
            }
        }
        let mut touched = 0;
        while !dirty.is_empty() {
            touched += dirty.len();
            let tree = &self.tree;
            let sums: Vec<u32> = if dirty.len() >= PAR_THRESHOLD {
                dirty.par_iter().map(|&p| tree[2 * p] + tree[2 * p + 1]).collect()
            } else {
                dirty.iter().map(|&p| tree[2 * p] + tree[2 * p + 1]).collect()
            };
            for (&p, w) in dirty.iter().zip(sums) {
                self.tree[p] = w;
            }
            if dirty[0] == 1 {
                break;
            }
            let mut next = Vec::with_capacity(dirty.len());
            for &p in &dirty {
                if next.last() != Some(&(p >> 1)) {
                    next.push(p >> 1);
                }
            }
            dirty = next;
        }
        Ok(touched)
    }

    /// Reference implementation of [`substitute`](Self::substitute): one
    /// root path update per slot.
    pub fn substitute_serial(&mut self, updates: &[(usize, Slot)]) -> Result<()> {
        self.check_updates(updates)?;
        for &(index, slot) in updates {
            self.slots[index] = slot;
            let mut node = self.leaves + index;
            self.tree[node] = slot.weight();
            while node > 1 {
                node >>= 1;
                self.tree[node] = self.tree[2 * node] + self.tree[2 * node + 1];
            }
        }
        Ok(())
    }

    /// Full recount from the leaves: every leaf matches its slot and every
    /// internal node equals the sum of its children.
    pub fn audit(&self) -> bool {
        let leaves_ok = (0..self.leaves).all(|i| {
            let expected = self.slots.get(i).map_or(0, Slot::weight);
            self.tree[self.leaves + i] == expected
        });
        leaves_ok && (1..self.leaves).all(|k| self.tree[k] == self.tree[2 * k] + self.tree[2 * k + 1])
    }
}

fn build_levels(tree: &mut [u32], leaves: usize) {
    let mut start = leaves / 2;
    while start >= 1 {
        let (head, tail) = tree.split_at_mut(2 * start);
        let parents = &mut head[start..];
        if parents.len() >= PAR_THRESHOLD {
            parents
                .par_iter_mut()
                .enumerate()
                .for_each(|(k, w)| *w = tail[2 * k] + tail[2 * k + 1]);
        } else {
            for (k, w) in parents.iter_mut().enumerate() {
                *w = tail[2 * k] + tail[2 * k + 1];
            }
        }
        start /= 2;
    }
}
