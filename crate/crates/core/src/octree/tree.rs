use std::fmt::Write as _;

use crate::error::{invalid, ArenaError, Result};
use crate::octree::morton::{MortonKey, MAX_DEPTH};

/// Morton-sorted leaves partitioning the unit cube, one payload per leaf.
#[derive(Clone, Debug)]
pub struct Octree<P> {
    leaves: Vec<MortonKey>,
    payload: Vec<P>,
    max_depth: u8,
    /// `Some(periodic)` once 2:1 balance has been enforced.
    balance: Option<bool>,
}

impl<P> Octree<P> {
    /// Checks sortedness and the partition property before accepting leaves.
    pub fn from_leaves(mut items: Vec<(MortonKey, P)>, max_depth: u8) -> Result<Self> {
        if max_depth > MAX_DEPTH {
            return invalid(format!("max depth {max_depth} exceeds {MAX_DEPTH}"));
        }
        items.sort_by_key(|(k, _)| *k);
        let (leaves, payload): (Vec<_>, Vec<_>) = items.into_iter().unzip();
        check_partition(&leaves)?;
        if let Some(k) = leaves.iter().find(|k| k.level() > max_depth) {
            return invalid(format!("leaf {k:?} deeper than max depth {max_depth}"));
        }
        Ok(Octree { leaves, payload, max_depth, balance: None })
    }

    pub fn uniform(level: u8, mut payload: impl FnMut(&MortonKey) -> P) -> Result<Self> {
        if level > MAX_DEPTH {
            return invalid(format!("level {level} exceeds {MAX_DEPTH}"));
        }
        let mut leaves = vec![MortonKey::ROOT];
        for _ in 0..level {
            leaves = leaves.iter().flat_map(|k| k.children()).collect();
        }
        let payload = leaves.iter().map(&mut payload).collect();
        Ok(Octree { leaves, payload, max_depth: level, balance: Some(true) })
    }

    pub(crate) fn from_parts(leaves: Vec<MortonKey>, payload: Vec<P>, max_depth: u8, balance: Option<bool>) -> Self {
        debug_assert_eq!(leaves.len(), payload.len());
        Octree { leaves, payload, max_depth, balance }
    }

    pub(crate) fn into_parts(self) -> (Vec<MortonKey>, Vec<P>, u8) {
        (self.leaves, self.payload, self.max_depth)
    }

    pub fn leaves(&self) -> &[MortonKey] {
        &self.leaves
    }

    pub fn payload(&self) -> &[P] {
        &self.payload
    }

    pub fn payload_mut(&mut self) -> &mut [P] {
        &mut self.payload
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MortonKey, &P)> {
        self.leaves.iter().zip(&self.payload)
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn max_depth(&self) -> u8 {
        self.max_depth
    }

    /// Deepest level actually present.
    pub fn depth(&self) -> u8 {
        self.leaves.iter().map(|k| k.level()).max().unwrap_or(0)
    }

    pub fn is_balanced(&self) -> bool {
        self.balance.is_some()
    }

    /// Whether the tree was balanced with periodic wraparound.
    pub fn balanced_periodic(&self) -> Option<bool> {
        self.balance
    }

    /// Index of the leaf equal to or containing `key`, if any.
    pub fn covering_leaf(&self, key: &MortonKey) -> Option<usize> {
        let pos = self.leaves.partition_point(|k| k <= key);
        if pos == 0 {
            return None;
        }
        let cand = &self.leaves[pos - 1];
        cand.is_ancestor_or_self(key).then_some(pos - 1)
    }

    /// Index of the leaf containing point `p` of the closed unit cube.
    pub fn locate(&self, p: &crate::Point) -> Option<usize> {
        let n = 1u64 << MAX_DEPTH;
        let cell = |x: f64| ((x * n as f64).floor() as i64).clamp(0, n as i64 - 1) as u32;
        let key = MortonKey::new(MAX_DEPTH, [cell(p[0]), cell(p[1]), cell(p[2])]).ok()?;
        self.covering_leaf(&key)
    }

    /// Same leaves and balance state with a new payload.
    pub fn with_payload<Q>(&self, payload: Vec<Q>) -> Result<Octree<Q>> {
        if payload.len() != self.leaves.len() {
            return invalid(format!("{} payload items for {} leaves", payload.len(), self.leaves.len()));
        }
        Ok(Octree { leaves: self.leaves.clone(), payload, max_depth: self.max_depth, balance: self.balance })
    }

    pub fn map<Q>(self, mut f: impl FnMut(&MortonKey, P) -> Q) -> Octree<Q> {
        let payload = self.leaves.iter().zip(self.payload).map(|(k, p)| f(k, p)).collect();
        Octree { leaves: self.leaves, payload, max_depth: self.max_depth, balance: self.balance }
    }

    pub fn try_map<Q>(self, mut f: impl FnMut(&MortonKey, P) -> Result<Q>) -> Result<Octree<Q>> {
        let payload = self
            .leaves
            .iter()
            .zip(self.payload)
            .map(|(k, p)| f(k, p))
            .collect::<Result<_>>()?;
        Ok(Octree { leaves: self.leaves, payload, max_depth: self.max_depth, balance: self.balance })
    }

    /// One line per leaf, `level x y z`, in Morton order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for k in &self.leaves {
            let a = k.anchor();
            writeln!(s, "{} {} {} {}", k.level(), a[0], a[1], a[2]).unwrap();
        }
        s
    }
}

/// Parses the `level x y z` leaf listing. Blank lines and `#` comments are
/// ignored; the leaves must partition the cube.
pub fn parse_tree_text(text: &str) -> Result<Octree<()>> {
    let mut items = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| ArenaError::Parse { line: no + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", fields.len())));
        }
        let level: u8 = fields[0].parse().map_err(|e| err(format!("level: {e}")))?;
        let mut anchor = [0u32; 3];
        for d in 0..3 {
            anchor[d] = fields[d + 1].parse().map_err(|e| err(format!("coordinate: {e}")))?;
        }
        let key = MortonKey::new(level, anchor).map_err(|e| err(e.to_string()))?;
        items.push((key, ()));
    }
    if items.is_empty() {
        return Err(ArenaError::Parse { line: 0, msg: "no leaves".into() });
    }
    let depth = items.iter().map(|(k, _)| k.level()).max().unwrap();
    let mut tree = Octree::from_leaves(items, depth)?;
    tree.max_depth = depth;
    Ok(tree)
}

/// Sorted leaves tile the cube exactly when each leaf starts where the
/// previous one's descendants end and the last one reaches the far corner.
fn check_partition(leaves: &[MortonKey]) -> Result<()> {
    if leaves.is_empty() {
        return invalid("a tree needs at least one leaf");
    }
    let mut next: u128 = 0;
    for w in leaves {
        if w.code() as u128 != next {
            return if (w.code() as u128) < next {
                invalid(format!("leaf {w:?} overlaps an earlier leaf"))
            } else {
                invalid(format!("gap before leaf {w:?}"))
            };
        }
        next = w.last_descendant().code() as u128 + 1;
    }
    if next != 1u128 << (3 * MAX_DEPTH as u32) {
        return invalid("leaves do not cover the whole cube");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut items: Vec<(MortonKey, ())> = MortonKey::ROOT.children().iter().map(|k| (*k, ())).collect();
        let first = items.remove(0).0;
        items.extend(first.children().iter().map(|k| (*k, ())));
        let tree = Octree::from_leaves(items, 2).unwrap();
        let text = tree.to_text();
        assert!(text.starts_with("2 0 0 0\n"));
        let back = parse_tree_text(&text).unwrap();
        assert_eq!(back.leaves(), tree.leaves());
    }

    #[test]
    fn rejects_overlap_and_gaps() {
        let root = MortonKey::ROOT;
        let mut items: Vec<(MortonKey, ())> = root.children().iter().map(|k| (*k, ())).collect();
        items.push((root, ()));
        assert!(Octree::from_leaves(items.clone(), 1).is_err());
        items.truncate(7);
        assert!(Octree::from_leaves(items, 1).is_err());
        assert!(parse_tree_text("1 0 0\n").is_err());
        assert!(parse_tree_text("0 1 0 0\n").is_err());
    }

    #[test]
    fn locate_finds_containing_leaf() {
        let tree = Octree::uniform(2, |_| ()).unwrap();
        let i = tree.locate(&[0.3, 0.9, 0.1]).unwrap();
        assert_eq!(tree.leaves()[i].anchor(), [1, 3, 0]);
        assert!(tree.locate(&[1.0, 1.0, 1.0]).is_some());
    }
}
