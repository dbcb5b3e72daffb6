use crate::chebyshev::{cheb_approx, tensor_nodes, ChebCoeffs};
use crate::error::{invalid, Result};
use crate::octree::morton::{MortonKey, MAX_DEPTH};
use crate::octree::tree::Octree;
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tolerance {
    Absolute(f64),
    /// Scaled by the largest `|f|` sampled at the root octant's nodes.
    RelativeToRootMax(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct RefineOptions {
    pub q: usize,
    pub tolerance: Tolerance,
    pub max_depth: u8,
    /// Levels split unconditionally before the estimate is consulted.
    pub min_depth: u8,
}

impl RefineOptions {
    pub fn new(q: usize, tolerance: Tolerance, max_depth: u8) -> Self {
        RefineOptions { q, tolerance, max_depth, min_depth: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Refinement {
    pub tree: Octree<ChebCoeffs>,
    /// Absolute threshold the estimate was compared against.
    pub threshold: f64,
    /// Leaves stopped by `max_depth` with the estimate still above threshold.
    pub saturated: Vec<MortonKey>,
}

impl Refinement {
    pub fn warnings(&self) -> Vec<String> {
        if self.saturated.is_empty() {
            return Vec::new();
        }
        vec![format!(
            "{} leaves reached max depth with truncation estimate above {:e}",
            self.saturated.len(),
            self.threshold
        )]
    }
}

/// Depth-first refinement: an octant is split into its 8 children while its
/// truncation estimate exceeds the threshold and it is above `max_depth`.
pub fn refine_adaptive(f: &dyn Fn(&Point) -> f64, opts: &RefineOptions) -> Result<Refinement> {
    if opts.q < 2 {
        return invalid(format!("refinement needs q >= 2, got {}", opts.q));
    }
    if opts.max_depth > MAX_DEPTH {
        return invalid(format!("max depth {} exceeds {MAX_DEPTH}", opts.max_depth));
    }
    let threshold = match opts.tolerance {
        Tolerance::Absolute(t) if t > 0.0 => t,
        Tolerance::RelativeToRootMax(t) if t > 0.0 => {
            let scale = tensor_nodes(&MortonKey::ROOT, opts.q).iter().map(|p| f(p).abs()).fold(0.0, f64::max);
            if scale > 0.0 { t * scale } else { t }
        }
        other => return invalid(format!("tolerance must be positive, got {other:?}")),
    };

    let mut items = Vec::new();
    let mut saturated = Vec::new();
    let mut stack = vec![MortonKey::ROOT];
    while let Some(key) = stack.pop() {
        let c = cheb_approx(f, key, opts.q)?;
        let forced = key.level() < opts.min_depth.min(opts.max_depth);
        let over = c.truncation_estimate() > threshold;
        if (forced || over) && key.level() < opts.max_depth {
            stack.extend(key.children().iter().rev());
        } else {
            if over {
                saturated.push(key);
            }
            items.push((key, c));
        }
    }
    if !saturated.is_empty() {
        log::warn!("{} leaves saturated at depth {}", saturated.len(), opts.max_depth);
    }
    let tree = Octree::from_leaves(items, opts.max_depth)?;
    Ok(Refinement { tree, threshold, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_gives_root_leaf() {
        for tol in [1e-2, 1e-12] {
            let r = refine_adaptive(&|_| 3.0, &RefineOptions::new(4, Tolerance::RelativeToRootMax(tol), 5)).unwrap();
            assert_eq!(r.tree.len(), 1);
            assert!(r.saturated.is_empty());
        }
    }

    #[test]
    fn saturation_reported_not_failed() {
        let f = |p: &Point| (40.0 * p[0]).sin();
        let r = refine_adaptive(&f, &RefineOptions::new(4, Tolerance::Absolute(1e-12), 1)).unwrap();
        assert_eq!(r.tree.len(), 8);
        assert_eq!(r.saturated.len(), 8);
        assert_eq!(r.warnings().len(), 1);
    }

    #[test]
    fn bad_arguments() {
        assert!(refine_adaptive(&|_| 1.0, &RefineOptions::new(1, Tolerance::Absolute(1e-3), 3)).is_err());
        assert!(refine_adaptive(&|_| 1.0, &RefineOptions::new(4, Tolerance::Absolute(0.0), 3)).is_err());
    }
}
