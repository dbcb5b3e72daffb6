//! Octant geometry by plain integer boxes.

/// `(level, anchor)`.
pub type Oct = (u8, [u32; 3]);

/// Keys of one level in the order a recursive depth-first expansion visits
/// them, children ordered with x varying fastest.
pub fn dfs_order(level: u8) -> Vec<Oct> {
    fn visit(l: u8, a: [u32; 3], target: u8, out: &mut Vec<Oct>) {
        if l == target {
            out.push((l, a));
            return;
        }
        for z in 0..2 {
            for y in 0..2 {
                for x in 0..2 {
                    visit(l + 1, [2 * a[0] + x, 2 * a[1] + y, 2 * a[2] + z], target, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    visit(0, [0; 3], level, &mut out);
    out
}

fn bounds(o: &Oct, depth: u8) -> ([i64; 3], [i64; 3]) {
    let s = 1i64 << (depth - o.0);
    let lo = o.1.map(|a| a as i64 * s);
    (lo, lo.map(|v| v + s))
}

/// Whether the closed boxes meet, optionally allowing unit-cell translates.
pub fn touching(a: &Oct, b: &Oct, periodic: bool) -> bool {
    let depth = a.0.max(b.0);
    let (alo, ahi) = bounds(a, depth);
    let (blo, bhi) = bounds(b, depth);
    let n = 1i64 << depth;
    let shifts: &[i64] = if periodic { &[-1, 0, 1] } else { &[0] };
    for &sx in shifts {
        for &sy in shifts {
            for &sz in shifts {
                let sh = [sx * n, sy * n, sz * n];
                if (0..3).all(|d| alo[d] <= bhi[d] + sh[d] && blo[d] + sh[d] <= ahi[d]) {
                    return true;
                }
            }
        }
    }
    false
}

pub fn overlap(a: &Oct, b: &Oct) -> bool {
    let depth = a.0.max(b.0);
    let (alo, ahi) = bounds(a, depth);
    let (blo, bhi) = bounds(b, depth);
    (0..3).all(|d| alo[d] < bhi[d] && blo[d] < ahi[d])
}

/// Volume sum is one and no two leaves overlap.
pub fn is_partition(leaves: &[Oct]) -> bool {
    let vol: f64 = leaves.iter().map(|o| 0.125f64.powi(o.0 as i32)).sum();
    if (vol - 1.0).abs() > 1e-12 {
        return false;
    }
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            if overlap(&leaves[i], &leaves[j]) {
                return false;
            }
        }
    }
    true
}

/// Every touching pair differs by at most one level.
pub fn is_balanced(leaves: &[Oct], periodic: bool) -> bool {
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            let (a, b) = (&leaves[i], &leaves[j]);
            if a.0.abs_diff(b.0) > 1 && touching(a, b, periodic) {
                return false;
            }
        }
    }
    true
}

/// Whether `anc` contains `o` (or equals it).
pub fn contains(anc: &Oct, o: &Oct) -> bool {
    if anc.0 > o.0 {
        return false;
    }
    let s = o.0 - anc.0;
    (0..3).all(|d| o.1[d] >> s == anc.1[d])
}
