use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;

use crate::ground::TaskRef;

/// An immutable, totally ordered task network.
///
/// Networks are persistent cons lists: decomposing the head shares the
/// tail with the parent, so a child costs O(|method subtasks|) to build.
/// Every cell caches a hash of the sequence it starts, which makes
/// duplicate detection on (state, network) pairs cheap.
#[derive(Clone, Default)]
pub struct Network(Option<Rc<Cell>>);

struct Cell {
    head: TaskRef,
    tail: Network,
    len: usize,
    hash: u64,
}

fn mix(head: TaskRef, tail: u64) -> u64 {
    let tag = match head {
        TaskRef::Primitive(i) => (i as u64) << 1,
        TaskRef::Compound(i) => ((i as u64) << 1) | 1,
    };
    // splitmix64 finalizer over the combined words
    let mut z = tail.rotate_left(5) ^ tag.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Network {
    pub fn empty() -> Self {
        Network(None)
    }

    pub fn from_slice(tasks: &[TaskRef]) -> Self {
        tasks.iter().rev().fold(Network::empty(), |n, &t| n.push(t))
    }

    /// The network with `t` in front of `self`.
    pub fn push(&self, t: TaskRef) -> Self {
        Network(Some(Rc::new(Cell {
            head: t,
            tail: self.clone(),
            len: self.len() + 1,
            hash: mix(t, self.cached_hash()),
        })))
    }

    /// `prefix ++ self`
    pub fn prepend(&self, prefix: &[TaskRef]) -> Self {
        prefix.iter().rev().fold(self.clone(), |n, &t| n.push(t))
    }

    pub fn head(&self) -> Option<TaskRef> {
        self.0.as_ref().map(|c| c.head)
    }

    pub fn tail(&self) -> Network {
        self.0.as_ref().map(|c| c.tail.clone()).unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.0.as_ref().map_or(0, |c| c.len)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_none()
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter(self.0.as_deref())
    }

    pub fn to_vec(&self) -> Vec<TaskRef> {
        self.iter().collect()
    }

    fn cached_hash(&self) -> u64 {
        self.0.as_ref().map_or(0, |c| c.hash)
    }
}

pub struct Iter<'a>(Option<&'a Cell>);

impl Iterator for Iter<'_> {
    type Item = TaskRef;

    fn next(&mut self) -> Option<TaskRef> {
        let c = self.0?;
        self.0 = c.tail.0.as_deref();
        Some(c.head)
    }
}

impl<'a> IntoIterator for &'a Network {
    type Item = TaskRef;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        let (mut a, mut b) = (self.0.as_ref(), other.0.as_ref());
        loop {
            match (a, b) {
                (None, None) => return true,
                (Some(x), Some(y)) => {
                    if Rc::ptr_eq(x, y) {
                        return true;
                    }
                    if x.hash != y.hash || x.len != y.len || x.head != y.head {
                        return false;
                    }
                    a = x.tail.0.as_ref();
                    b = y.tail.0.as_ref();
                }
                _ => return false,
            }
        }
    }
}

impl Eq for Network {}

impl Hash for Network {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.cached_hash());
    }
}

impl Drop for Network {
    // Unlink uniquely owned cells iteratively so long networks cannot
    // overflow the stack.
    fn drop(&mut self) {
        let mut next = self.0.take();
        while let Some(rc) = next {
            match Rc::try_unwrap(rc) {
                Ok(mut cell) => next = cell.tail.0.take(),
                Err(_) => break,
            }
        }
    }
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn task() -> impl Strategy<Value = TaskRef> {
        prop_oneof![
            (0u32..4).prop_map(TaskRef::Primitive),
            (0u32..4).prop_map(TaskRef::Compound)
        ]
    }

    proptest! {
        #[test]
        fn structural_equality(a in proptest::collection::vec(task(), 0..8), b in proptest::collection::vec(task(), 0..8)) {
            let (na, nb) = (Network::from_slice(&a), Network::from_slice(&b));
            prop_assert_eq!(na == nb, a == b);
            prop_assert_eq!(na.to_vec(), a.clone());
            if a == b {
                prop_assert_eq!(na.cached_hash(), nb.cached_hash());
            }
        }

        #[test]
        fn prepend_concatenates(a in proptest::collection::vec(task(), 0..6), b in proptest::collection::vec(task(), 0..6)) {
            let n = Network::from_slice(&b).prepend(&a);
            let mut want = a.clone();
            want.extend(b);
            prop_assert_eq!(n.len(), want.len());
            prop_assert_eq!(n.to_vec(), want);
        }
    }

    #[test]
    fn long_network_drops() {
        let mut n = Network::empty();
        for i in 0..1_000_000 {
            n = n.push(TaskRef::Primitive(i % 7));
        }
        assert_eq!(n.len(), 1_000_000);
    }
}
