//! Precomputed near-field integrals and their on-disk cache.
//!
//! Every table is defined for a target octant of side 1 centered at the
//! origin and maps source Chebyshev coefficients to potentials at target
//! points. Octants of side `s` use the table times `s²`. Only one offset per
//! orbit of the cube symmetry group is stored (see [`super::symmetry`]).

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::chebyshev::{coeff_indices, n_coeffs};
use crate::error::{ArenaError, Result};
use crate::fmm::quadrature::RefIntegrator;
use crate::fmm::symmetry::stabilizer;
use crate::quadrature::chebyshev_gauss_nodes;
use crate::Point;

/// Relative geometry of a source octant and the target points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TableKind {
    /// Source of the same size as the target, targets at its Chebyshev nodes.
    SameLevel,
    /// Source twice the target's size.
    CoarseSource,
    /// Source half the target's size.
    FineSource,
    /// Source twice the size, targets on the downward check surface.
    XList,
    /// Source is the target octant, targets on the upward check surface.
    UpwardCheck,
}

impl TableKind {
    fn code(self) -> u8 {
        match self {
            TableKind::SameLevel => 0,
            TableKind::CoarseSource => 1,
            TableKind::FineSource => 2,
            TableKind::XList => 3,
            TableKind::UpwardCheck => 4,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        Some(match c {
            0 => TableKind::SameLevel,
            1 => TableKind::CoarseSource,
            2 => TableKind::FineSource,
            3 => TableKind::XList,
            4 => TableKind::UpwardCheck,
            _ => return None,
        })
    }

    /// Source side relative to the target side.
    pub fn source_ratio(self) -> f64 {
        match self {
            TableKind::SameLevel | TableKind::UpwardCheck => 1.0,
            TableKind::CoarseSource | TableKind::XList => 2.0,
            TableKind::FineSource => 0.5,
        }
    }

    /// Canonical offsets `(c_target - c_source) / (half the smaller side)`.
    pub fn classes(self) -> &'static [[i32; 3]] {
        match self {
            TableKind::SameLevel => &[[0, 0, 0], [2, 0, 0], [2, 2, 0], [2, 2, 2]],
            TableKind::CoarseSource | TableKind::FineSource => &[[3, 1, 1], [3, 3, 1], [3, 3, 3]],
            TableKind::XList => &[[5, 1, 1], [5, 3, 1], [5, 3, 3], [5, 5, 1], [5, 5, 3], [5, 5, 5]],
            TableKind::UpwardCheck => &[[0, 0, 0]],
        }
    }

    fn uses_surface(self) -> bool {
        matches!(self, TableKind::XList | TableKind::UpwardCheck)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableSpec {
    pub kind: TableKind,
    pub q: usize,
    /// Surface order; 0 for node-target tables.
    pub m: usize,
    /// Surface scale relative to the target octant; 0 for node targets.
    pub surface_scale: f64,
    pub offset: [i32; 3],
    pub tol: f64,
}

impl fmt::Display for TableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} q={} m={} scale={} offset={:?} tol={:e}",
            self.kind, self.q, self.m, self.surface_scale, self.offset, self.tol
        )
    }
}

impl TableSpec {
    fn key_hash(&self) -> u64 {
        // FNV-1a over the description, stable across runs
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in format!("v1 {self}").bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h
    }

    pub fn file_name(&self) -> String {
        format!("near-{:?}-q{}-m{}-{:016x}.bin", self.kind, self.q, self.m, self.key_hash()).to_lowercase()
    }

    /// Grid index per axis of every target point and the grid size, used
    /// to permute targets under the symmetry group.
    pub fn target_grid(&self) -> (Vec<[usize; 3]>, usize) {
        if self.kind.uses_surface() {
            let s = crate::fmm::EquivalentSurface::new(self.m);
            (s.grid().to_vec(), self.m)
        } else {
            let q = self.q;
            ((0..q * q * q).map(|i| [i / (q * q), i / q % q, i % q]).collect(), q)
        }
    }

    /// Target points relative to the target center (target side 1).
    pub fn target_points(&self) -> Vec<Point> {
        if self.kind.uses_surface() {
            let s = crate::fmm::EquivalentSurface::new(self.m);
            s.points(&[0.0; 3], 1.0, self.surface_scale)
        } else {
            let t = chebyshev_gauss_nodes(self.q);
            self.target_grid().0.iter().map(|g| g.map(|i| 0.5 * t[i])).collect()
        }
    }
}

/// Row-major `rows × cols` matrix: rows are targets, columns coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NearTable {
    pub spec: TableSpec,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

const MAGIC: &[u8; 8] = b"ARNEAR01";

impl NearTable {
    pub fn build(spec: TableSpec) -> Result<Self> {
        let q = spec.q;
        let cols = n_coeffs(q);
        let points = spec.target_points();
        let (grid, gn) = spec.target_grid();
        let rows = points.len();
        let ratio = spec.kind.source_ratio();
        let half = 0.5 * ratio.min(1.0);
        let src_center: Point = spec.offset.map(|o| -(o as f64) * half);
        let src_half = 0.5 * ratio;
        // potential = -(s/2)² ∫_{[-1,1]³} T(ξ) / (4π|ξx - ξ|) dξ
        let prefactor = -src_half * src_half;

        let index: std::collections::HashMap<[usize; 3], usize> =
            grid.iter().enumerate().map(|(i, g)| (*g, i)).collect();
        let stab = stabilizer(spec.offset);
        let cidx = coeff_indices(q);
        let cpos: std::collections::HashMap<[usize; 3], usize> =
            cidx.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let maps: Vec<Vec<(usize, f64)>> = stab
            .iter()
            .map(|g| {
                cidx.iter()
                    .map(|c| {
                        let (c2, s) = g.map_cheb_index(*c);
                        (cpos[&c2], s)
                    })
                    .collect()
            })
            .collect();

        let integ = RefIntegrator::new(q, spec.tol.min(1e-11));
        let mut data = vec![0.0; rows * cols];
        let mut done = vec![false; rows];
        let mut buf = vec![0.0; cols];
        for r in 0..rows {
            if done[r] {
                continue;
            }
            let x: Point = std::array::from_fn(|d| (points[r][d] - src_center[d]) / src_half);
            integ
                .integrate(&x, &mut buf)
                .map_err(|e| ArenaError::Setup(format!("table {spec}: {e}")))?;
            for (g, map) in stab.iter().zip(&maps) {
                let r2 = index[&g.apply_grid(grid[r], gn)];
                if done[r2] {
                    continue;
                }
                // T_c(gξ) = sign T_{c'}(ξ) gives row(gx)[c] = sign * row(x)[c']
                let row = &mut data[r2 * cols..(r2 + 1) * cols];
                for (c, (c2, s)) in map.iter().enumerate() {
                    row[c] = prefactor * s * buf[*c2];
                }
                done[r2] = true;
            }
        }
        Ok(NearTable { spec, rows, cols, data })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(96 + 8 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.push(self.spec.kind.code());
        out.extend_from_slice(&(self.spec.q as u32).to_le_bytes());
        out.extend_from_slice(&(self.spec.m as u32).to_le_bytes());
        out.extend_from_slice(&self.spec.surface_scale.to_le_bytes());
        for o in self.spec.offset {
            out.extend_from_slice(&o.to_le_bytes());
        }
        out.extend_from_slice(&self.spec.tol.to_le_bytes());
        out.extend_from_slice(&(self.rows as u32).to_le_bytes());
        out.extend_from_slice(&(self.cols as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| ArenaError::Decode(format!("near table: {m}"));
        const HEADER: usize = 8 + 1 + 4 + 4 + 8 + 12 + 8 + 4 + 4;
        if bytes.len() < HEADER + 4 || &bytes[..8] != MAGIC {
            return Err(bad("missing header"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        if crc32fast::hash(body) != u32::from_le_bytes(tail.try_into().unwrap()) {
            return Err(bad("checksum mismatch"));
        }
        let mut pos = 8;
        let mut take = |n: usize| {
            let s = &body[pos..pos + n];
            pos += n;
            s
        };
        let kind = TableKind::from_code(take(1)[0]).ok_or_else(|| bad("unknown kind"))?;
        let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap());
        let q = u32_at(take(4)) as usize;
        let m = u32_at(take(4)) as usize;
        let surface_scale = f64::from_le_bytes(take(8).try_into().unwrap());
        let offset: [i32; 3] = std::array::from_fn(|_| i32::from_le_bytes(take(4).try_into().unwrap()));
        let tol = f64::from_le_bytes(take(8).try_into().unwrap());
        let rows = u32_at(take(4)) as usize;
        let cols = u32_at(take(4)) as usize;
        let count = rows.checked_mul(cols).and_then(|c| c.checked_mul(8)).ok_or_else(|| bad("size overflows"))?;
        if body.len() - HEADER != count {
            return Err(bad("payload length does not match shape"));
        }
        if q == 0 || q > 64 || cols != n_coeffs(q) {
            return Err(bad("inconsistent order"));
        }
        let data: Vec<f64> = body[HEADER..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite entry"));
        }
        let spec = TableSpec { kind, q, m, surface_scale, offset, tol };
        Ok(NearTable { spec, rows, cols, data })
    }
}

/// Directory of cached tables; `None` disables caching.
#[derive(Clone, Debug)]
pub struct TableCache {
    dir: Option<PathBuf>,
}

impl TableCache {
    pub fn disabled() -> Self {
        TableCache { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        TableCache { dir: Some(dir.into()) }
    }

    /// `$ARENA_CACHE_DIR`, else a folder in the system temp directory.
    pub fn default_location() -> Self {
        let dir = std::env::var_os("ARENA_CACHE_DIR")
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("poisson-arena-cache"));
        TableCache::at(dir)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Returns the table and whether it came from disk.
    pub fn load_or_build(&self, spec: TableSpec) -> Result<(NearTable, bool)> {
        let Some(dir) = &self.dir else {
            return Ok((NearTable::build(spec)?, false));
        };
        let path = dir.join(spec.file_name());
        if let Ok(bytes) = fs::read(&path) {
            match NearTable::from_bytes(&bytes) {
                Ok(t) if t.spec == spec => return Ok((t, true)),
                Ok(_) => log::warn!("cache file {} holds a different table, rebuilding", path.display()),
                Err(e) => log::warn!("ignoring cache file {}: {e}", path.display()),
            }
        }
        let table = NearTable::build(spec)?;
        if let Err(e) = write_atomic(dir, &path, &table.to_bytes()) {
            log::warn!("could not write table cache {}: {e}", path.display());
        }
        Ok((table, false))
    }
}

fn write_atomic(dir: &Path, path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: TableKind, offset: [i32; 3]) -> TableSpec {
        TableSpec { kind, q: 3, m: 0, surface_scale: 0.0, offset, tol: 1e-10 }
    }

    #[test]
    fn bytes_round_trip_and_corruption() {
        let t = NearTable::build(spec(TableKind::SameLevel, [2, 0, 0])).unwrap();
        let bytes = t.to_bytes();
        assert_eq!(NearTable::from_bytes(&bytes).unwrap(), t);
        let mut bad = bytes.clone();
        bad[40] ^= 1;
        assert!(NearTable::from_bytes(&bad).is_err());
        assert!(NearTable::from_bytes(&bytes[..bytes.len() - 9]).is_err());
    }

    #[test]
    fn symmetric_fill_matches_direct_rows() {
        // every row computed directly agrees with the symmetry-filled one
        for (kind, off) in [(TableKind::SameLevel, [0, 0, 0]), (TableKind::SameLevel, [2, 2, 0]), (TableKind::FineSource, [3, 3, 1])] {
            let s = spec(kind, off);
            let t = NearTable::build(s).unwrap();
            let integ = RefIntegrator::new(3, 1e-11);
            let ratio = kind.source_ratio();
            let half = 0.5 * ratio.min(1.0);
            let mut buf = vec![0.0; t.cols];
            for (r, p) in s.target_points().iter().enumerate() {
                let x: Point = std::array::from_fn(|d| (p[d] + off[d] as f64 * half) / (0.5 * ratio));
                integ.integrate(&x, &mut buf).unwrap();
                for c in 0..t.cols {
                    let want = -0.25 * ratio * ratio * buf[c];
                    assert!((t.data[r * t.cols + c] - want).abs() < 1e-13, "{kind:?} row {r} col {c}");
                }
            }
        }
    }

    #[test]
    fn cache_reuses_file() {
        let dir = tempfile::tempdir().unwrap();
        let cache = TableCache::at(dir.path());
        let s = spec(TableKind::CoarseSource, [3, 1, 1]);
        let (a, loaded) = cache.load_or_build(s).unwrap();
        assert!(!loaded);
        let (b, loaded) = cache.load_or_build(s).unwrap();
        assert!(loaded);
        assert_eq!(a, b);
        std::fs::write(dir.path().join(s.file_name()), b"garbage").unwrap();
        let (c, loaded) = cache.load_or_build(s).unwrap();
        assert!(!loaded);
        assert_eq!(a, c);
    }
}
