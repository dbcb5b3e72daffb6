//! FFT-based Poisson solver on a uniform periodic `n³` grid.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{invalid, ArenaError, Result};
use crate::Point;

/// Real samples at `x = (i/n, j/n, k/n)`, stored at `(i*n + j)*n + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    data: Vec<f64>,
}

const MAGIC: &[u8; 8] = b"ARENAGF1";

impl GridField {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return invalid(format!("grid needs n >= 2, got {n}"));
        }
        if n.checked_pow(3) != Some(data.len()) {
            return invalid(format!("grid of size {n} needs {} values, got {}", n.pow(3), data.len()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return invalid("grid values must be finite");
        }
        Ok(GridField { n, data })
    }

    pub fn sample(n: usize, f: impl Fn(&Point) -> f64) -> Result<Self> {
        if n < 2 {
            return invalid(format!("grid needs n >= 2, got {n}"));
        }
        let data = (0..n * n * n).map(|idx| f(&Self::point_of(n, idx))).collect();
        Self::new(n, data)
    }

    fn point_of(n: usize, idx: usize) -> Point {
        let h = 1.0 / n as f64;
        [(idx / (n * n)) as f64 * h, (idx / n % n) as f64 * h, (idx % n) as f64 * h]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn points(&self) -> Vec<Point> {
        (0..self.data.len()).map(|i| Self::point_of(self.n, i)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Binary dump: magic, `n` as little-endian u64, then the values as
    /// little-endian f64 in storage order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| ArenaError::Decode(format!("grid field: {m}"));
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("missing header"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
        let count = n.checked_pow(3).and_then(|c| c.checked_mul(8)).ok_or_else(|| bad("size overflows"))?;
        if (bytes.len() - 16) as u64 != count {
            return Err(bad("payload length does not match n"));
        }
        let data = bytes[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Self::new(n as usize, data).map_err(|e| bad(&e.to_string()))
    }

    /// `x,y,z,value` rows for every `stride`-th grid point per axis.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut s = String::from("x,y,z,value\n");
        let n = self.n;
        for i in (0..n).step_by(stride) {
            for j in (0..n).step_by(stride) {
                for k in (0..n).step_by(stride) {
                    let idx = (i * n + j) * n + k;
                    let p = Self::point_of(n, idx);
                    writeln!(s, "{},{},{},{:e}", p[0], p[1], p[2], self.data[idx]).unwrap();
                }
            }
        }
        s
    }
}

/// Complex spectrum in the same storage order as [`GridField`].
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub n: usize,
    pub data: Vec<Complex64>,
}

/// Signed frequency of index `i` on an `n`-point axis, in `(-n/2, n/2]`.
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Planned 1D transforms for one grid size.
pub struct Dft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Dft3 {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("grid needs n >= 2, got {n}"));
        }
        let mut planner = FftPlanner::new();
        Ok(Dft3 { n, forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized transform along all three axes in place.
    fn transform(&self, data: &mut [Complex64], dir: FftDirection) {
        let n = self.n;
        let fft = match dir {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        let mut plane = vec![Complex64::default(); n * n];
        // j axis: plane of lines for fixed i
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    plane[k * n + j] = data[(i * n + j) * n + k];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for j in 0..n {
                for k in 0..n {
                    data[(i * n + j) * n + k] = plane[k * n + j];
                }
            }
        }
        // i axis: plane of lines for fixed j
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    plane[k * n + i] = data[(i * n + j) * n + k];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for i in 0..n {
                for k in 0..n {
                    data[(i * n + j) * n + k] = plane[k * n + i];
                }
            }
        }
    }

    pub fn forward(&self, g: &GridField) -> Result<Spectrum> {
        if g.n != self.n {
            return invalid(format!("plan for n={} applied to n={}", self.n, g.n));
        }
        let mut data: Vec<Complex64> = g.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, FftDirection::Forward);
        Ok(Spectrum { n: self.n, data })
    }

    /// Normalized inverse; the imaginary part is dropped.
    pub fn inverse(&self, s: &Spectrum) -> Result<GridField> {
        if s.n != self.n {
            return invalid(format!("plan for n={} applied to n={}", self.n, s.n));
        }
        let mut data = s.data.clone();
        self.transform(&mut data, FftDirection::Inverse);
        let scale = 1.0 / (self.n as f64).powi(3);
        GridField::new(self.n, data.iter().map(|c| c.re * scale).collect())
    }

    pub fn inverse_complex(&self, s: &Spectrum) -> Vec<Complex64> {
        let mut data = s.data.clone();
        self.transform(&mut data, FftDirection::Inverse);
        let scale = 1.0 / (self.n as f64).powi(3);
        data.iter_mut().for_each(|c| *c *= scale);
        data
    }
}

pub fn dft3_forward(g: &GridField) -> Result<Spectrum> {
    Dft3::new(g.n)?.forward(g)
}

pub fn dft3_inverse(s: &Spectrum) -> Result<GridField> {
    Dft3::new(s.n)?.inverse(s)
}

#[derive(Clone, Debug)]
pub struct SpectralSolution {
    pub u: GridField,
    /// Mean of `f`, dropped with the zero mode.
    pub removed_mean: f64,
    /// Spectrum of `u`, kept for trigonometric interpolation.
    pub spectrum: Spectrum,
}

impl SpectralSolution {
    /// Trigonometric interpolant of `u` at an arbitrary point.
    pub fn eval(&self, p: &Point) -> f64 {
        let n = self.spectrum.n;
        let phases: Vec<Vec<Complex64>> = (0..3)
            .map(|d| {
                (0..n)
                    .map(|i| {
                        let kf = signed_frequency(i, n) as f64;
                        Complex64::from_polar(1.0, 2.0 * PI * kf * p[d])
                    })
                    .collect()
            })
            .collect();
        let mut total = Complex64::default();
        for i in 0..n {
            for j in 0..n {
                let pij = phases[0][i] * phases[1][j];
                let row = &self.spectrum.data[(i * n + j) * n..(i * n + j + 1) * n];
                let s: Complex64 = row.iter().zip(&phases[2]).map(|(a, b)| a * b).sum();
                total += pij * s;
            }
        }
        total.re / (n as f64).powi(3)
    }
}

/// Solves `-Δu = f - mean(f)` with `û_k = f̂_k / (4π²|k|²)` and `û_0 = 0`.
pub fn poisson_spectral_solve_with(plan: &Dft3, f: &GridField) -> Result<SpectralSolution> {
    let n = plan.n;
    let mut spec = plan.forward(f)?;
    let removed_mean = spec.data[0].re / (n as f64).powi(3);
    for i in 0..n {
        let ki = signed_frequency(i, n) as f64;
        for j in 0..n {
            let kj = signed_frequency(j, n) as f64;
            for k in 0..n {
                let kk = signed_frequency(k, n) as f64;
                let k2 = ki * ki + kj * kj + kk * kk;
                let c = &mut spec.data[(i * n + j) * n + k];
                *c = if k2 == 0.0 { Complex64::default() } else { *c / (4.0 * PI * PI * k2) };
            }
        }
    }
    let u = plan.inverse(&spec)?;
    Ok(SpectralSolution { u, removed_mean, spectrum: spec })
}

pub fn poisson_spectral_solve(f: &GridField) -> Result<SpectralSolution> {
    poisson_spectral_solve_with(&Dft3::new(f.n)?, f)
}

/// Spectral `-Δ` of a grid field (zero mode dropped).
pub fn spectral_neg_laplacian(g: &GridField) -> Result<GridField> {
    let plan = Dft3::new(g.n)?;
    let n = g.n;
    let mut spec = plan.forward(g)?;
    for (idx, c) in spec.data.iter_mut().enumerate() {
        let k: [f64; 3] = [idx / (n * n), idx / n % n, idx % n].map(|i| signed_frequency(i, n) as f64);
        *c *= 4.0 * PI * PI * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    }
    plan.inverse(&spec)
}
