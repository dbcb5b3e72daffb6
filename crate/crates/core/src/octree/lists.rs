use std::collections::{HashMap, HashSet};

use crate::error::{ArenaError, Result};
use crate::octree::morton::{offsets27, touching, MortonKey};
use crate::octree::tree::Octree;

/// One entry of an interaction list: octant `source` translated by `shift`
/// unit cells (always zero in free space).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interaction {
    pub source: usize,
    pub shift: [i32; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ListCounts {
    pub u: usize,
    pub v: usize,
    pub w: usize,
    pub x: usize,
}

/// All octants of a balanced tree (leaves and their ancestors) in Morton
/// order, with the four interaction lists per octant.
///
/// `u` and `w` are only populated for leaves. Entries of `u` and `x` always
/// refer to leaves, entries of `v` and `w` to arbitrary octants.
#[derive(Clone, Debug)]
pub struct InteractionLists {
    pub octants: Vec<MortonKey>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Option<[usize; 8]>>,
    /// Octant index to leaf index in the tree.
    pub leaf: Vec<Option<usize>>,
    /// Leaf index to octant index.
    pub leaf_octant: Vec<usize>,
    pub u: Vec<Vec<Interaction>>,
    pub v: Vec<Vec<Interaction>>,
    pub w: Vec<Vec<Interaction>>,
    pub x: Vec<Vec<Interaction>>,
    pub periodic: bool,
}

impl InteractionLists {
    pub fn counts(&self) -> ListCounts {
        let total = |l: &Vec<Vec<Interaction>>| l.iter().map(Vec::len).sum();
        ListCounts { u: total(&self.u), v: total(&self.v), w: total(&self.w), x: total(&self.x) }
    }

    pub fn index_of(&self, key: &MortonKey) -> Option<usize> {
        self.octants.binary_search(key).ok()
    }

    pub fn is_leaf(&self, octant: usize) -> bool {
        self.leaf[octant].is_some()
    }

    /// Octant indices grouped by level, root first.
    pub fn levels(&self) -> Vec<Vec<usize>> {
        let depth = self.octants.iter().map(|k| k.level()).max().unwrap_or(0) as usize;
        let mut out = vec![Vec::new(); depth + 1];
        for (i, k) in self.octants.iter().enumerate() {
            out[k.level() as usize].push(i);
        }
        out
    }
}

pub fn build_interaction_lists<P>(tree: &Octree<P>, periodic: bool) -> Result<InteractionLists> {
    match tree.balanced_periodic() {
        None => return Err(ArenaError::Precondition("interaction lists need a 2:1-balanced tree".into())),
        Some(false) if periodic => {
            return Err(ArenaError::Precondition(
                "periodic interaction lists need a tree balanced with wraparound".into(),
            ))
        }
        _ => {}
    }

    let mut all: HashSet<MortonKey> = HashSet::new();
    for k in tree.leaves() {
        let mut cur = Some(*k);
        while let Some(c) = cur {
            if !all.insert(c) {
                break;
            }
            cur = c.parent();
        }
    }
    let mut octants: Vec<MortonKey> = all.into_iter().collect();
    octants.sort();
    let index: HashMap<MortonKey, usize> = octants.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let n = octants.len();

    let mut leaf = vec![None; n];
    let mut leaf_octant = Vec::with_capacity(tree.len());
    for (li, k) in tree.leaves().iter().enumerate() {
        leaf[index[k]] = Some(li);
        leaf_octant.push(index[k]);
    }
    let parent: Vec<Option<usize>> = octants.iter().map(|k| k.parent().map(|p| index[&p])).collect();
    let children: Vec<Option<[usize; 8]>> = octants
        .iter()
        .enumerate()
        .map(|(i, k)| leaf[i].is_none().then(|| k.children().map(|c| index[&c])))
        .collect();

    let colleagues = |i: usize| -> Vec<Interaction> {
        offsets27()
            .filter_map(|off| octants[i].neighbor(off, periodic))
            .filter_map(|(key, shift)| index.get(&key).map(|&source| Interaction { source, shift }))
            .collect()
    };

    let mut u = vec![Vec::new(); n];
    let mut v = vec![Vec::new(); n];
    let mut w = vec![Vec::new(); n];

    for i in 0..n {
        let key = octants[i];
        if let Some(p) = parent[i] {
            for pc in colleagues(p) {
                let Some(kids) = children[pc.source] else { continue };
                for c in kids {
                    if !touching(&key, [0; 3], &octants[c], pc.shift) {
                        v[i].push(Interaction { source: c, shift: pc.shift });
                    }
                }
            }
        }
        if leaf[i].is_none() {
            continue;
        }

        let mut seen: HashSet<Interaction> = HashSet::new();
        for off in offsets27() {
            let Some((nb, shift)) = key.neighbor(off, periodic) else { continue };
            if let Some(&j) = index.get(&nb) {
                // same-level neighbor exists: a leaf, or internal with finer
                // leaves some of which touch this one
                let mut stack = vec![j];
                while let Some(o) = stack.pop() {
                    let touches = touching(&key, [0; 3], &octants[o], shift);
                    match children[o] {
                        None if touches => {
                            seen.insert(Interaction { source: o, shift });
                        }
                        None => w[i].push(Interaction { source: o, shift }),
                        Some(kids) if touches => stack.extend(kids),
                        Some(_) => w[i].push(Interaction { source: o, shift }),
                    }
                }
            } else {
                let ci = tree.covering_leaf(&nb).ok_or_else(|| {
                    ArenaError::InternalState(format!("no leaf covers neighbor {nb:?}"))
                })?;
                seen.insert(Interaction { source: leaf_octant[ci], shift });
            }
        }
        let mut list: Vec<Interaction> = seen.into_iter().collect();
        list.sort_by_key(|e| (e.source, e.shift));
        u[i] = list;
        w[i].sort_by_key(|e| (e.source, e.shift));
        w[i].dedup();
    }

    let mut x = vec![Vec::new(); n];
    for t in 0..n {
        for e in &w[t] {
            x[e.source].push(Interaction { source: t, shift: e.shift.map(|s| -s) });
        }
    }
    for l in &mut x {
        l.sort_by_key(|e| (e.source, e.shift));
    }

    Ok(InteractionLists { octants, parent, children, leaf, leaf_octant, u, v, w, x, periodic })
}
