use std::fmt;

/// Fixed-width bit vector over fact ids.
///
/// Bit `i` is set iff fact `i` holds. Widths are rounded up to whole
/// 64-bit words, so membership is a single shift and mask.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateBitset {
    words: Box<[u64]>,
}

impl StateBitset {
    /// All-zero set able to hold ids `0..nbits`.
    pub fn new(nbits: usize) -> Self {
        StateBitset {
            words: vec![0; nbits.div_ceil(64).max(1)].into_boxed_slice(),
        }
    }

    pub fn from_ids(nbits: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(nbits);
        for i in ids {
            s.insert(i);
        }
        s
    }

    /// Number of addressable bits (a multiple of 64).
    pub fn width(&self) -> usize {
        self.words.len() * 64
    }

    #[inline]
    pub fn contains(&self, id: usize) -> bool {
        debug_assert!(id < self.width(), "fact id {id} out of range");
        (self.words[id >> 6] >> (id & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, id: usize) {
        self.words[id >> 6] |= 1 << (id & 63);
    }

    #[inline]
    pub fn remove(&mut self, id: usize) {
        self.words[id >> 6] &= !(1 << (id & 63));
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self ⊆ other`
    pub fn is_subset(&self, other: &StateBitset) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &StateBitset) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// `(self \ del) ∪ add`
    pub fn apply(&self, add: &StateBitset, del: &StateBitset) -> StateBitset {
        let words = self
            .words
            .iter()
            .zip(add.words.iter().zip(del.words.iter()))
            .map(|(s, (a, d))| (s & !d) | a)
            .collect();
        StateBitset { words }
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for StateBitset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.ones()).finish()
    }
}

/// Constant-time membership test; `id` must be below the state's width.
#[inline]
pub fn fact_holds(state: &StateBitset, id: usize) -> bool {
    state.contains(id)
}
