use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::Point;

/// Free-space Laplace Green's function `K(x) = -1/(4π|x|)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct LaplaceKernel;

impl LaplaceKernel {
    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if r2 == 0.0 {
            0.0
        } else {
            -1.0 / (4.0 * PI * r2.sqrt())
        }
    }

    #[inline]
    pub fn between(&self, target: &Point, source: &Point) -> f64 {
        self.eval(&[target[0] - source[0], target[1] - source[1], target[2] - source[2]])
    }

    /// `M[i][j] = K(targets[i] - sources[j])`.
    pub fn matrix(&self, targets: &[Point], sources: &[Point]) -> DMatrix<f64> {
        DMatrix::from_fn(targets.len(), sources.len(), |i, j| self.between(&targets[i], &sources[j]))
    }
}
