use std::fmt;

use crate::error::{invalid, Result};
use crate::Point;

/// Deepest supported level: three 21-bit coordinates fill a 63-bit code.
pub const MAX_DEPTH: u8 = 21;

const COORD_MASK: u64 = (1 << MAX_DEPTH) - 1;

fn spread(v: u64) -> u64 {
    let mut x = v & COORD_MASK;
    x = (x | x << 32) & 0x001f_0000_0000_ffff;
    x = (x | x << 16) & 0x001f_0000_ff00_00ff;
    x = (x | x << 8) & 0x100f_00f0_0f00_f00f;
    x = (x | x << 4) & 0x10c3_0c30_c30c_30c3;
    (x | x << 2) & 0x1249_2492_4924_9249
}

fn compact(v: u64) -> u64 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x | x >> 2) & 0x10c3_0c30_c30c_30c3;
    x = (x | x >> 4) & 0x100f_00f0_0f00_f00f;
    x = (x | x >> 8) & 0x001f_0000_ff00_00ff;
    x = (x | x >> 16) & 0x001f_0000_0000_ffff;
    (x | x >> 32) & COORD_MASK
}

/// An octant of the unit cube.
///
/// The code interleaves the anchor scaled to [`MAX_DEPTH`], x in the lowest
/// bit. Ordering by `(code, level)` puts an octant right before its
/// descendants, which is the depth-first (preorder) Morton order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MortonKey {
    code: u64,
    level: u8,
}

impl fmt::Debug for MortonKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.anchor();
        write!(f, "Key(L{} {} {} {})", self.level, a[0], a[1], a[2])
    }
}

pub fn morton_encode(level: u8, anchor: [u32; 3]) -> Result<MortonKey> {
    if level > MAX_DEPTH {
        return invalid(format!("level {level} exceeds maximum depth {MAX_DEPTH}"));
    }
    let limit = 1u64 << level;
    if anchor.iter().any(|&a| a as u64 >= limit) {
        return invalid(format!("anchor {anchor:?} out of range for level {level}"));
    }
    let shift = MAX_DEPTH - level;
    let s = |a: u32| spread((a as u64) << shift);
    Ok(MortonKey {
        code: s(anchor[0]) | s(anchor[1]) << 1 | s(anchor[2]) << 2,
        level,
    })
}

pub fn morton_decode(key: MortonKey) -> (u8, [u32; 3]) {
    (key.level, key.anchor())
}

impl MortonKey {
    pub const ROOT: MortonKey = MortonKey { code: 0, level: 0 };

    pub fn new(level: u8, anchor: [u32; 3]) -> Result<Self> {
        morton_encode(level, anchor)
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn code(&self) -> u64 {
        self.code
    }

    pub fn anchor(&self) -> [u32; 3] {
        let shift = MAX_DEPTH - self.level;
        let c = |b: u32| (compact(self.code >> b) >> shift) as u32;
        [c(0), c(1), c(2)]
    }

    /// Side length as a fraction of the unit cube.
    pub fn side(&self) -> f64 {
        1.0 / (1u64 << self.level) as f64
    }

    pub fn lower_corner(&self) -> Point {
        let h = self.side();
        self.anchor().map(|a| a as f64 * h)
    }

    pub fn center(&self) -> Point {
        let h = self.side();
        self.anchor().map(|a| (a as f64 + 0.5) * h)
    }

    pub fn parent(&self) -> Option<MortonKey> {
        if self.level == 0 {
            return None;
        }
        Some(self.ancestor(self.level - 1))
    }

    /// Ancestor at `level` (self when the levels match).
    pub fn ancestor(&self, level: u8) -> MortonKey {
        assert!(level <= self.level);
        let drop = 3 * (MAX_DEPTH - level) as u32;
        let mask = if drop >= 64 { 0 } else { !0u64 << drop };
        MortonKey { code: self.code & mask, level }
    }

    /// Child `c`, where bit 0/1/2 of `c` selects the upper half in x/y/z.
    pub fn child(&self, c: usize) -> MortonKey {
        assert!(self.level < MAX_DEPTH && c < 8);
        let level = self.level + 1;
        let shift = 3 * (MAX_DEPTH - level) as u32;
        MortonKey { code: self.code | (c as u64) << shift, level }
    }

    pub fn children(&self) -> [MortonKey; 8] {
        std::array::from_fn(|c| self.child(c))
    }

    /// Which child of its parent this octant is.
    pub fn child_index(&self) -> usize {
        assert!(self.level > 0);
        ((self.code >> (3 * (MAX_DEPTH - self.level) as u32)) & 7) as usize
    }

    pub fn is_ancestor_or_self(&self, other: &MortonKey) -> bool {
        self.level <= other.level && other.ancestor(self.level) == *self
    }

    /// Largest key among the descendants at [`MAX_DEPTH`]; every descendant
    /// `d` satisfies `self <= d <= self.last_descendant()`.
    pub fn last_descendant(&self) -> MortonKey {
        let bits = 3 * (MAX_DEPTH - self.level) as u32;
        let low = if bits >= 64 { !0 } else { (1u64 << bits) - 1 };
        MortonKey { code: self.code | low, level: MAX_DEPTH }
    }

    /// Same-level neighbor at integer `offset`. With `periodic` the anchor
    /// wraps and the returned shift records the unit-cell translation that
    /// carries the wrapped key onto the true neighbor position.
    pub fn neighbor(&self, offset: [i32; 3], periodic: bool) -> Option<(MortonKey, [i32; 3])> {
        let n = 1i64 << self.level;
        let a = self.anchor();
        let mut wrapped = [0u32; 3];
        let mut shift = [0i32; 3];
        for d in 0..3 {
            let raw = a[d] as i64 + offset[d] as i64;
            if !periodic && !(0..n).contains(&raw) {
                return None;
            }
            wrapped[d] = raw.rem_euclid(n) as u32;
            shift[d] = raw.div_euclid(n) as i32;
        }
        let key = MortonKey::new(self.level, wrapped).expect("wrapped anchor is in range");
        Some((key, shift))
    }

    /// Integer box `[lo, hi)` of this octant translated by `shift` unit cells,
    /// in units of the `level` grid (`level >= self.level`).
    pub fn int_box(&self, shift: [i32; 3], level: u8) -> ([i64; 3], [i64; 3]) {
        debug_assert!(level >= self.level);
        let scale = 1i64 << (level - self.level);
        let cells = 1i64 << self.level;
        let a = self.anchor();
        let lo: [i64; 3] = std::array::from_fn(|d| (a[d] as i64 + shift[d] as i64 * cells) * scale);
        (lo, lo.map(|l| l + scale))
    }

    pub fn contains(&self, p: &Point) -> bool {
        let lo = self.lower_corner();
        let h = self.side();
        (0..3).all(|d| p[d] >= lo[d] && p[d] <= lo[d] + h)
    }
}

/// Whether two translated octants share at least a boundary point.
pub fn touching(a: &MortonKey, sa: [i32; 3], b: &MortonKey, sb: [i32; 3]) -> bool {
    let level = a.level.max(b.level);
    let (alo, ahi) = a.int_box(sa, level);
    let (blo, bhi) = b.int_box(sb, level);
    (0..3).all(|d| alo[d] <= bhi[d] && blo[d] <= ahi[d])
}

/// The 27 offsets in `{-1,0,1}³`, x fastest.
pub fn offsets27() -> impl Iterator<Item = [i32; 3]> {
    (0..27).map(|i| [i % 3 - 1, (i / 3) % 3 - 1, i / 9 - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn root_is_minimal() {
        let root = morton_encode(0, [0, 0, 0]).unwrap();
        assert_eq!(root, MortonKey::ROOT);
        for c in MortonKey::ROOT.children() {
            assert!(root < c);
        }
    }

    #[test]
    fn first_two_children_order() {
        let a = morton_encode(1, [0, 0, 0]).unwrap();
        let b = morton_encode(1, [1, 0, 0]).unwrap();
        assert!(a < b);
    }

    #[test]
    fn out_of_range_anchor_rejected() {
        assert!(morton_encode(2, [4, 0, 0]).is_err());
        assert!(morton_encode(22, [0, 0, 0]).is_err());
    }

    #[test]
    fn exhaustive_round_trip_low_levels() {
        for level in 0..=4u8 {
            let n = 1u32 << level;
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let k = morton_encode(level, [x, y, z]).unwrap();
                        assert_eq!(morton_decode(k), (level, [x, y, z]));
                    }
                }
            }
        }
    }

    #[test]
    fn child_and_parent_agree() {
        let k = morton_encode(3, [5, 2, 7]).unwrap();
        for (c, ch) in k.children().iter().enumerate() {
            assert_eq!(ch.parent(), Some(k));
            assert_eq!(ch.child_index(), c);
            let a = ch.anchor();
            assert_eq!(a, [10 + (c as u32 & 1), 4 + (c as u32 >> 1 & 1), 14 + (c as u32 >> 2)]);
        }
    }

    #[test]
    fn periodic_neighbor_wraps() {
        let k = morton_encode(2, [0, 3, 1]).unwrap();
        let (n, s) = k.neighbor([-1, 1, 0], true).unwrap();
        assert_eq!(n.anchor(), [3, 0, 1]);
        assert_eq!(s, [-1, 1, 0]);
        assert!(k.neighbor([-1, 0, 0], false).is_none());
        let (r, s) = MortonKey::ROOT.neighbor([1, -1, 0], true).unwrap();
        assert_eq!((r, s), (MortonKey::ROOT, [1, -1, 0]));
    }

    proptest! {
        #[test]
        fn round_trip_deep(level in 0u8..=MAX_DEPTH, x in any::<u32>(), y in any::<u32>(), z in any::<u32>()) {
            let m = 1u64 << level;
            let a = [x, y, z].map(|v| (v as u64 % m) as u32);
            let k = morton_encode(level, a).unwrap();
            prop_assert_eq!(morton_decode(k), (level, a));
        }

        #[test]
        fn descendants_fall_in_range(level in 0u8..8, x in any::<u32>(), y in any::<u32>(), z in any::<u32>(), extra in 1u8..6, c in 0usize..8) {
            let m = 1u64 << level;
            let k = morton_encode(level, [x, y, z].map(|v| (v as u64 % m) as u32)).unwrap();
            let mut d = k;
            for _ in 0..extra { d = d.child(c); }
            prop_assert!(k < d && d <= k.last_descendant());
            prop_assert!(k.is_ancestor_or_self(&d));
            prop_assert_eq!(d.ancestor(level), k);
        }
    }
}
