use rayon::prelude::*;

use crate::circuit::Circuit;

/// Sorted, duplicate-free slot indices marking regions that may still be
/// reducible.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FingerSet(Vec<usize>);

impl FingerSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Panics unless `indices` is strictly increasing.
    pub fn from_sorted(indices: Vec<usize>) -> Self {
        assert!(is_strictly_increasing(&indices), "finger indices must be strictly increasing");
        Self(indices)
    }

    /// One finger at the start of every Ω-block: `0, Ω, 2Ω, …` below `len`.
    pub fn initial(len: usize, omega: usize) -> Self {
        assert!(omega >= 1);
        Self((0..len).step_by(omega).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// True when some finger lies in the inclusive slot range.
    pub fn any_in(&self, first: usize, last: usize) -> bool {
        let k = self.0.partition_point(|&f| f < first);
        self.0.get(k).is_some_and(|&f| f <= last)
    }
}

impl<'a> IntoIterator for &'a FingerSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn is_strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// Sorted union of two strictly increasing lists.
pub fn merge_dedup(a: &[usize], b: &[usize]) -> Vec<usize> {
    assert!(is_strictly_increasing(a), "merge_dedup: left input unsorted");
    assert!(is_strictly_increasing(b), "merge_dedup: right input unsorted");
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Split fingers into a non-interfering selection and the rest.
///
/// Ranks are bucketed into groups of 2Ω gates. The first finger of each
/// group is a candidate; candidates in even groups and in odd groups form
/// two sets, and the larger one is selected (odd wins ties). Selected
/// fingers sit at least 2Ω ranks apart.
pub fn select_fingers(fingers: &FingerSet, circuit: &Circuit, omega: usize) -> (FingerSet, FingerSet) {
    let width = 2 * omega;
    let groups: Vec<usize> = fingers
        .0
        .par_iter()
        .map(|&f| circuit.before(f).expect("finger within slot range") / width)
        .collect();
    // 0 = not first in group, 1 = first in even group, 2 = first in odd group
    let tags: Vec<u8> = (0..groups.len())
        .into_par_iter()
        .map(|i| {
            let first = i == 0 || groups[i] > groups[i - 1];
            match (first, groups[i] % 2) {
                (false, _) => 0,
                (true, 0) => 1,
                (true, _) => 2,
            }
        })
        .collect();
    let evens = tags.iter().filter(|&&t| t == 1).count();
    let odds = tags.iter().filter(|&&t| t == 2).count();
    let pick = if evens > odds { 1 } else { 2 };
    let mut selected = Vec::with_capacity(evens.max(odds));
    let mut remaining = Vec::with_capacity(fingers.len() - evens.max(odds));
    for (&f, &t) in fingers.0.iter().zip(&tags) {
        if t == pick {
            selected.push(f);
        } else {
            remaining.push(f);
        }
    }
    (FingerSet(selected), FingerSet(remaining))
}
