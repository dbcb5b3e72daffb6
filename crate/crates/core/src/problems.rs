//! Manufactured solutions and error metrics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, ArenaError, Result};
use crate::Point;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestCase {
    /// `u = sin(2πk x₁) sin(2πk x₂) sin(2πk x₃)`.
    Oscillatory { k: u32 },
    /// `u = exp(-(r/R)^α)` with `r = |x - center|`.
    Layer { alpha: f64, radius: f64, center: Point },
}

pub const DEFAULT_LAYER_RADIUS: f64 = 0.25;
pub const DEFAULT_LAYER_CENTER: Point = [0.5, 0.5, 0.5];

impl TestCase {
    pub fn oscillatory(k: u32) -> Result<Self> {
        let tc = TestCase::Oscillatory { k };
        tc.validate()?;
        Ok(tc)
    }

    pub fn layer(alpha: f64, radius: f64, center: Point) -> Result<Self> {
        let tc = TestCase::Layer { alpha, radius, center };
        tc.validate()?;
        Ok(tc)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TestCase::Oscillatory { k } if k < 1 => invalid("wavenumber k must be at least 1"),
            TestCase::Layer { alpha, .. } if !(alpha > 2.0) || !alpha.is_finite() => {
                invalid(format!("layer sharpness must exceed 2, got {alpha}"))
            }
            TestCase::Layer { radius, .. } if !(radius > 0.0 && radius < 0.5) => {
                invalid(format!("layer radius must lie in (0, 0.5), got {radius}"))
            }
            TestCase::Layer { center, .. } if center.iter().any(|c| !(0.0..=1.0).contains(c)) => {
                invalid(format!("layer center {center:?} outside the unit cube"))
            }
            _ => Ok(()),
        }
    }

    /// Exact solution, no domain check.
    pub fn u(&self, x: &Point) -> f64 {
        match *self {
            TestCase::Oscillatory { k } => {
                let w = 2.0 * PI * k as f64;
                (w * x[0]).sin() * (w * x[1]).sin() * (w * x[2]).sin()
            }
            TestCase::Layer { alpha, radius, center } => {
                let r = dist(x, &center);
                (-(r / radius).powf(alpha)).exp()
            }
        }
    }

    /// `f = -Δu`, no domain check.
    pub fn f(&self, x: &Point) -> f64 {
        match *self {
            TestCase::Oscillatory { k } => {
                let w = 2.0 * PI * k as f64;
                3.0 * w * w * self.u(x)
            }
            TestCase::Layer { alpha, radius, center } => {
                let r = dist(x, &center);
                if r == 0.0 {
                    return 0.0;
                }
                let s = (r / radius).powf(alpha);
                alpha * s / (r * r) * (alpha + 1.0 - alpha * s) * (-s).exp()
            }
        }
    }
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn check_in_cube(x: &Point) -> Result<()> {
    if x.iter().all(|c| (0.0..=1.0).contains(c)) {
        Ok(())
    } else {
        invalid(format!("point {x:?} outside the unit cube"))
    }
}

pub fn exact_u(tc: &TestCase, x: &Point) -> Result<f64> {
    check_in_cube(x)?;
    Ok(tc.u(x))
}

pub fn exact_f(tc: &TestCase, x: &Point) -> Result<f64> {
    check_in_cube(x)?;
    Ok(tc.f(x))
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestCase::Oscillatory { k } => write!(f, "osc:k={k}"),
            TestCase::Layer { alpha, radius, center } => {
                write!(f, "layer:alpha={alpha}")?;
                if *radius != DEFAULT_LAYER_RADIUS {
                    write!(f, ",R={radius}")?;
                }
                if *center != DEFAULT_LAYER_CENTER {
                    write!(f, ",center={}/{}/{}", center[0], center[1], center[2])?;
                }
                Ok(())
            }
        }
    }
}

/// Accepts `osc:k=8` and `layer:alpha=10[,R=0.25][,center=x/y/z]`.
impl FromStr for TestCase {
    type Err = ArenaError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: String| ArenaError::Config(format!("test case '{s}': {msg}"));
        let (kind, params) = s.trim().split_once(':').ok_or_else(|| bad("expected kind:params".into()))?;
        let mut pairs = Vec::new();
        for p in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, val) = p.split_once('=').ok_or_else(|| bad(format!("'{p}' is not key=value")))?;
            pairs.push((key.trim(), val.trim()));
        }
        let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("'{v}': {e}")));
        let tc = match kind.trim() {
            "osc" => {
                let mut k = None;
                for (key, val) in pairs {
                    match key {
                        "k" => k = Some(val.parse::<u32>().map_err(|e| bad(format!("k: {e}")))?),
                        other => return Err(bad(format!("unknown parameter '{other}'"))),
                    }
                }
                TestCase::Oscillatory { k: k.ok_or_else(|| bad("missing k".into()))? }
            }
            "layer" => {
                let (mut alpha, mut radius, mut center) = (None, DEFAULT_LAYER_RADIUS, DEFAULT_LAYER_CENTER);
                for (key, val) in pairs {
                    match key {
                        "alpha" => alpha = Some(num(val)?),
                        "R" | "r" => radius = num(val)?,
                        "center" => {
                            let parts: Vec<&str> = val.split('/').collect();
                            if parts.len() != 3 {
                                return Err(bad("center needs x/y/z".into()));
                            }
                            for d in 0..3 {
                                center[d] = num(parts[d])?;
                            }
                        }
                        other => return Err(bad(format!("unknown parameter '{other}'"))),
                    }
                }
                TestCase::Layer { alpha: alpha.ok_or_else(|| bad("missing alpha".into()))?, radius, center }
            }
            other => return Err(bad(format!("unknown kind '{other}'"))),
        };
        tc.validate().map_err(|e| bad(e.to_string()))?;
        Ok(tc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub linf_rel: f64,
    /// Constant added to the numerical solution to align sample means.
    pub shift: f64,
}

/// Relative ℓ∞ error after aligning the sample means of the two value sets.
pub fn linf_rel_error_values(numeric: &[f64], exact: &[f64]) -> Result<ErrorReport> {
    if numeric.is_empty() || numeric.len() != exact.len() {
        return invalid("error needs equally many (and at least one) numeric and exact values");
    }
    let n = numeric.len() as f64;
    let shift = exact.iter().zip(numeric).map(|(e, u)| e - u).sum::<f64>() / n;
    let norm = exact.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if !(norm > 0.0) {
        return invalid("exact solution vanishes on the sample set");
    }
    let err = exact.iter().zip(numeric).fold(0.0f64, |m, (e, u)| m.max((u + shift - e).abs()));
    Ok(ErrorReport { linf_rel: err / norm, shift })
}

pub fn linf_rel_error(u_num: impl Fn(&Point) -> f64, tc: &TestCase, samples: &[Point]) -> Result<ErrorReport> {
    let numeric: Vec<f64> = samples.iter().map(&u_num).collect();
    let exact: Vec<f64> = samples.iter().map(|p| tc.u(p)).collect();
    linf_rel_error_values(&numeric, &exact)
}

/// First `n` points of the 3D Halton sequence (bases 2, 3, 5), skipping 0.
pub fn halton_points(n: usize) -> Vec<Point> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let (mut f, mut r) = (1.0, 0.0);
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    (1..=n).map(|i| [radical_inverse(i, 2), radical_inverse(i, 3), radical_inverse(i, 5)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillatory_quarter_point() {
        let tc = TestCase::oscillatory(1).unwrap();
        let x = [0.25; 3];
        assert!((exact_u(&tc, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((exact_f(&tc, &x).unwrap() - 12.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn layer_center_limit() {
        let tc = TestCase::layer(10.0, 0.25, DEFAULT_LAYER_CENTER).unwrap();
        assert_eq!(tc.u(&[0.5; 3]), 1.0);
        assert_eq!(tc.f(&[0.5; 3]), 0.0);
    }

    #[test]
    fn validation() {
        assert!(TestCase::oscillatory(0).is_err());
        assert!(TestCase::layer(2.0, 0.25, DEFAULT_LAYER_CENTER).is_err());
        assert!(TestCase::layer(10.0, 0.5, DEFAULT_LAYER_CENTER).is_err());
        assert!(exact_u(&TestCase::Oscillatory { k: 1 }, &[1.1, 0.0, 0.0]).is_err());
    }

    #[test]
    fn error_metric_basics() {
        let tc = TestCase::oscillatory(1).unwrap();
        let pts = halton_points(500);
        assert_eq!(linf_rel_error(|p| tc.u(p), &tc, &pts).unwrap().linf_rel, 0.0);
        assert!(linf_rel_error(|p| tc.u(p) + 5.0, &tc, &pts).unwrap().linf_rel < 1e-14);
        let zero = linf_rel_error(|_| 0.0, &tc, &pts).unwrap();
        // the sample mean of u is small but not exactly zero
        assert!((zero.linf_rel - 1.0).abs() < 0.02);
        assert!(linf_rel_error(|_| 0.0, &tc, &[[0.0, 0.5, 0.5]]).is_err());
    }

    #[test]
    fn case_strings_round_trip() {
        for s in ["osc:k=8", "layer:alpha=10", "layer:alpha=12.5,R=0.2,center=0.4/0.5/0.6"] {
            let tc: TestCase = s.parse().unwrap();
            assert_eq!(tc.to_string(), s);
        }
        for s in ["osc", "osc:k=0", "layer:alpha=2", "layer:R=0.2", "wave:k=1", "osc:k=1,j=2"] {
            assert!(s.parse::<TestCase>().is_err(), "{s}");
        }
    }
}
