use std::collections::{BTreeSet, HashMap};

use crate::octree::morton::{offsets27, MortonKey};
use crate::octree::tree::Octree;

fn covering(set: &BTreeSet<MortonKey>, key: &MortonKey) -> Option<MortonKey> {
    let cand = set.range(..=*key).next_back()?;
    cand.is_ancestor_or_self(key).then_some(*cand)
}

/// Splits leaves until adjacent leaves (26-connectivity, wrapping across
/// faces when `periodic`) differ by at most one level.
///
/// Leaves are visited finest level first; a split can only create leaves
/// coarser than the level being processed, so one sweep suffices. Leaves
/// that survive keep their payload, new ones get `fill(key)`.
pub fn balance_2to1<P>(tree: Octree<P>, periodic: bool, mut fill: impl FnMut(&MortonKey) -> P) -> Octree<P> {
    let (leaves, payload, max_depth) = tree.into_parts();
    let mut set: BTreeSet<MortonKey> = leaves.iter().copied().collect();
    let finest = leaves.iter().map(|k| k.level()).max().unwrap_or(0);

    for level in (2..=finest).rev() {
        let current: Vec<MortonKey> = set.iter().filter(|k| k.level() == level).copied().collect();
        for key in current {
            for off in offsets27() {
                if off == [0, 0, 0] {
                    continue;
                }
                let Some((nb, _)) = key.neighbor(off, periodic) else { continue };
                while let Some(c) = covering(&set, &nb) {
                    if c.level() + 1 >= level {
                        break;
                    }
                    set.remove(&c);
                    set.extend(c.children());
                }
            }
        }
    }

    let mut old: HashMap<MortonKey, P> = leaves.into_iter().zip(payload).collect();
    let keys: Vec<MortonKey> = set.into_iter().collect();
    let payload = keys.iter().map(|k| old.remove(k).unwrap_or_else(|| fill(k))).collect();
    Octree::from_parts(keys, payload, max_depth, Some(periodic))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_tree_unchanged() {
        let tree = Octree::uniform(2, |k| k.level()).unwrap();
        let before = tree.leaves().to_vec();
        let out = balance_2to1(tree, true, |_| 99);
        assert_eq!(out.leaves(), &before[..]);
        assert!(out.payload().iter().all(|&p| p == 2));
    }

    #[test]
    fn deep_corner_splits_coarse_neighbor() {
        // level-3 leaf in the corner of child 0 next to the level-1 child 1
        let root = MortonKey::ROOT;
        let c0 = root.child(0);
        let mut items: Vec<(MortonKey, ())> = root.children()[1..].iter().map(|k| (*k, ())).collect();
        items.extend(c0.children()[..7].iter().map(|k| (*k, ())));
        items.extend(c0.child(7).children().iter().map(|k| (*k, ())));
        let tree = Octree::from_leaves(items, 3).unwrap();
        let n_before = tree.len();
        let mut filled = 0;
        let out = balance_2to1(tree, false, |_| filled += 1);
        // all seven level-1 leaves touch the deep corner
        assert_eq!(filled, 56);
        assert_eq!(out.len(), n_before - 7 + 56);
        assert!(out.leaves().iter().all(|k| k.level() >= 1));
        assert!(out.leaves().iter().any(|k| k.parent() == Some(root.child(1))));
    }
}
