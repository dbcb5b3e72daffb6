use crate::Point;

/// Which of the four equivalent/check surfaces a point set plays.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceRole {
    UpwardEquivalent,
    UpwardCheck,
    DownwardEquivalent,
    DownwardCheck,
}

/// Regular grid on the surface of a cube: `m` points per edge, so
/// `6(m-1)² + 2` points for `m >= 2`.
#[derive(Clone, Debug)]
pub struct EquivalentSurface {
    m: usize,
    /// Grid indices in `0..m` per axis.
    grid: Vec<[usize; 3]>,
}

impl EquivalentSurface {
    pub fn new(m: usize) -> Self {
        assert!(m >= 2, "surface needs at least 2 points per edge");
        let mut grid = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if [i, j, k].iter().any(|&v| v == 0 || v == m - 1) {
                        grid.push([i, j, k]);
                    }
                }
            }
        }
        EquivalentSurface { m, grid }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn grid(&self) -> &[[usize; 3]] {
        &self.grid
    }

    /// Points on `[-1, 1]³`.
    pub fn reference_points(&self) -> Vec<Point> {
        let h = 2.0 / (self.m - 1) as f64;
        self.grid.iter().map(|g| g.map(|v| -1.0 + h * v as f64)).collect()
    }

    /// Points for an octant with `center` and `side`, at `scale` times the
    /// octant (1.05 puts the surface just outside the octant).
    pub fn points(&self, center: &Point, side: f64, scale: f64) -> Vec<Point> {
        let r = 0.5 * side * scale;
        self.reference_points()
            .iter()
            .map(|p| std::array::from_fn(|d| center[d] + r * p[d]))
            .collect()
    }

    pub fn index_of(&self, g: &[usize; 3]) -> Option<usize> {
        self.grid.binary_search(g).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_counts() {
        for m in 2..12 {
            assert_eq!(EquivalentSurface::new(m).len(), 6 * (m - 1) * (m - 1) + 2);
        }
        assert_eq!(EquivalentSurface::new(10).len(), 488);
    }

    #[test]
    fn reflection_maps_surface_to_itself() {
        let s = EquivalentSurface::new(5);
        for g in s.grid() {
            let r = [4 - g[0], g[2], g[1]];
            assert!(s.index_of(&r).is_some());
        }
    }
}
