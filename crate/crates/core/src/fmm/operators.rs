//! Translation operators and near-field tables, built once per parameter set.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use nalgebra::DMatrix;

use crate::chebyshev::{coeff_indices, n_coeffs, ChebCoeffs};
use crate::error::{invalid, ArenaError, Result};
use crate::fmm::ewald::{far_field_matrix, EwaldParams};
use crate::fmm::quadrature::RefIntegrator;
use crate::fmm::symmetry::{group, SignedPerm};
use crate::fmm::tables::{TableCache, TableKind, TableSpec};
use crate::fmm::{EquivalentSurface, LaplaceKernel, SurfaceRole};
use crate::octree::MortonKey;
use crate::quadrature::chebyshev_gauss_nodes;
use crate::Point;

#[derive(Clone, Debug)]
pub struct FmmParams {
    /// Chebyshev order of sources and potentials.
    pub q: usize,
    /// Surface points per edge.
    pub m: usize,
    pub periodic: bool,
    /// Inner surfaces (upward equivalent, downward check) relative to the octant.
    pub eq_scale: f64,
    /// Outer surfaces (upward check, downward equivalent).
    pub check_scale: f64,
    /// Singular values below `pinv_cutoff * σ_max` are dropped.
    pub pinv_cutoff: f64,
    pub quad_tol: f64,
    pub cache: TableCache,
}

impl FmmParams {
    pub fn new(q: usize, m: usize, periodic: bool) -> Self {
        FmmParams {
            q,
            m,
            periodic,
            eq_scale: 1.05,
            check_scale: 2.95,
            pinv_cutoff: 1e-10,
            quad_tol: 1e-10,
            cache: TableCache::default_location(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 || self.q > 24 {
            return invalid(format!("FMM order q={} outside 2..=24", self.q));
        }
        if self.m < 2 || self.m > 24 {
            return invalid(format!("surface order m={} outside 2..=24", self.m));
        }
        if !(self.eq_scale > 1.0 && self.check_scale > self.eq_scale && self.check_scale < 3.0) {
            return invalid("surface scales must satisfy 1 < eq_scale < check_scale < 3");
        }
        if !(self.pinv_cutoff > 0.0 && self.pinv_cutoff < 1.0 && self.quad_tol > 0.0 && self.quad_tol < 1.0) {
            return invalid("pinv_cutoff and quad_tol must lie in (0, 1)");
        }
        Ok(())
    }

    fn key(&self) -> String {
        format!(
            "{} {} {} {} {} {:e} {:e}",
            self.q, self.m, self.periodic, self.eq_scale, self.check_scale, self.pinv_cutoff, self.quad_tol
        )
    }
}

/// Counters from building an operator set.
#[derive(Clone, Copy, Debug, Default)]
pub struct SetupStats {
    pub seconds: f64,
    pub tables_loaded: usize,
    pub tables_built: usize,
}

pub struct FmmOperators {
    pub params: FmmParams,
    pub surface: EquivalentSurface,
    pub stats: SetupStats,
    n_eq: usize,
    p_u: DMatrix<f64>,
    p_d: DMatrix<f64>,
    m2m: Vec<DMatrix<f64>>,
    l2l: Vec<DMatrix<f64>>,
    /// Canonical same-level offsets in octant sides.
    m2l: HashMap<[i32; 3], DMatrix<f64>>,
    /// Target nodes of a unit leaf from a half-size source's upward surface.
    w: HashMap<[i32; 3], DMatrix<f64>>,
    l2t: DMatrix<f64>,
    s2m: DMatrix<f64>,
    near: HashMap<(TableKind, [i32; 3]), DMatrix<f64>>,
    periodic_far: Option<DMatrix<f64>>,
    surf_perm: Vec<Vec<usize>>,
    node_perm: Vec<Vec<usize>>,
    cheb_perm: Vec<Vec<(usize, f64)>>,
}

fn pinv(a: &DMatrix<f64>, rel: f64) -> Result<DMatrix<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax.is_finite() && smax > 0.0) {
        return Err(ArenaError::Setup("equivalent-density operator is zero or non-finite".into()));
    }
    svd.pseudo_inverse(rel * smax).map_err(|e| ArenaError::Setup(format!("pseudoinverse: {e}")))
}

/// Index in [`group`] of `g`.
fn group_index(g: &SignedPerm) -> usize {
    group().iter().position(|h| h == g).expect("group element")
}

/// Canonical offset and the index of `g` with `g · canonical = offset`.
pub(crate) fn classify(offset: [i32; 3]) -> ([i32; 3], usize) {
    let (c, g) = crate::fmm::symmetry::canonicalize(offset);
    (c, group_index(&g))
}

fn child_center(c: usize) -> Point {
    // child of the unit octant at the origin
    [0, 1, 2].map(|d| if c >> d & 1 == 1 { 0.25 } else { -0.25 })
}

static SHARED: OnceLock<Mutex<HashMap<String, Arc<FmmOperators>>>> = OnceLock::new();

impl FmmOperators {
    /// Returns a process-wide instance for these parameters, building it on
    /// first use.
    pub fn shared(params: &FmmParams) -> Result<Arc<FmmOperators>> {
        let map = SHARED.get_or_init(|| Mutex::new(HashMap::new()));
        let key = params.key();
        if let Some(op) = map.lock().unwrap().get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(FmmOperators::new(params.clone())?);
        map.lock().unwrap().insert(key, op.clone());
        Ok(op)
    }

    pub fn new(params: FmmParams) -> Result<Self> {
        params.validate()?;
        let start = Instant::now();
        let q = params.q;
        let m = params.m;
        let kern = LaplaceKernel;
        let surface = EquivalentSurface::new(m);
        let n_eq = surface.len();
        let origin = [0.0; 3];
        let pts = |role: SurfaceRole, center: &Point, side: f64| {
            let scale = match role {
                SurfaceRole::UpwardEquivalent | SurfaceRole::DownwardCheck => params.eq_scale,
                SurfaceRole::UpwardCheck | SurfaceRole::DownwardEquivalent => params.check_scale,
            };
            surface.points(center, side, scale)
        };
        let ue1 = pts(SurfaceRole::UpwardEquivalent, &origin, 1.0);
        let uc1 = pts(SurfaceRole::UpwardCheck, &origin, 1.0);
        let de1 = pts(SurfaceRole::DownwardEquivalent, &origin, 1.0);
        let dc1 = pts(SurfaceRole::DownwardCheck, &origin, 1.0);

        let p_u = pinv(&kern.matrix(&uc1, &ue1), params.pinv_cutoff)?;
        let p_d = pinv(&kern.matrix(&dc1, &de1), params.pinv_cutoff)?;

        let mut m2m = Vec::with_capacity(8);
        let mut l2l = Vec::with_capacity(8);
        for c in 0..8 {
            let cc = child_center(c);
            let ue_child = pts(SurfaceRole::UpwardEquivalent, &cc, 0.5);
            m2m.push(&p_u * kern.matrix(&uc1, &ue_child));
            let dc_child = pts(SurfaceRole::DownwardCheck, &cc, 0.5);
            l2l.push(0.5 * &p_d * kern.matrix(&dc_child, &de1));
        }

        let mut m2l = HashMap::new();
        for a in 0..=3i32 {
            for b in 0..=a {
                for c in 0..=b {
                    if a < 2 {
                        continue;
                    }
                    let off = [a, b, c];
                    let src = [-(a as f64), -(b as f64), -(c as f64)];
                    m2l.insert(off, kern.matrix(&dc1, &pts(SurfaceRole::UpwardEquivalent, &src, 1.0)));
                }
            }
        }

        let t = chebyshev_gauss_nodes(q);
        let node_grid: Vec<[usize; 3]> = (0..q * q * q).map(|i| [i / (q * q), i / q % q, i % q]).collect();
        let nodes1: Vec<Point> = node_grid.iter().map(|g| g.map(|i| 0.5 * t[i])).collect();
        let mut w = HashMap::new();
        for off in TableKind::XList.classes() {
            // source side 1/2, offset in quarter target sides
            let src = off.map(|o| -(o as f64) * 0.25);
            w.insert(*off, kern.matrix(&nodes1, &pts(SurfaceRole::UpwardEquivalent, &src, 0.5)));
        }
        let l2t = kern.matrix(&nodes1, &de1);

        let mut stats = SetupStats::default();
        let mut near = HashMap::new();
        let load = |spec: TableSpec, stats: &mut SetupStats| -> Result<DMatrix<f64>> {
            let (t, from_disk) = params.cache.load_or_build(spec)?;
            if from_disk {
                stats.tables_loaded += 1;
            } else {
                stats.tables_built += 1;
            }
            Ok(DMatrix::from_row_slice(t.rows, t.cols, &t.data))
        };
        for kind in [TableKind::SameLevel, TableKind::CoarseSource, TableKind::FineSource, TableKind::XList] {
            let (m_, scale) = if kind == TableKind::XList { (m, params.eq_scale) } else { (0, 0.0) };
            for off in kind.classes() {
                let spec = TableSpec { kind, q, m: m_, surface_scale: scale, offset: *off, tol: params.quad_tol };
                near.insert((kind, *off), load(spec, &mut stats)?);
            }
        }
        let uc_spec = TableSpec {
            kind: TableKind::UpwardCheck,
            q,
            m,
            surface_scale: params.check_scale,
            offset: [0, 0, 0],
            tol: params.quad_tol,
        };
        let s2m = &p_u * load(uc_spec, &mut stats)?;

        let periodic_far = if params.periodic {
            // d = x - y with both on the root's inner surfaces
            let lk = -far_field_matrix(&dc1, &ue1, &EwaldParams::default());
            Some(lk)
        } else {
            None
        };

        let surf_perm = group()
            .iter()
            .map(|g| surface.grid().iter().map(|p| surface.index_of(&g.apply_grid(*p, m)).unwrap()).collect())
            .collect();
        let node_perm = group()
            .iter()
            .map(|g| {
                node_grid
                    .iter()
                    .map(|p| {
                        let r = g.apply_grid(*p, q);
                        (r[0] * q + r[1]) * q + r[2]
                    })
                    .collect()
            })
            .collect();
        let cidx = coeff_indices(q);
        let cpos: HashMap<[usize; 3], usize> = cidx.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let cheb_perm = group()
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

        stats.seconds = start.elapsed().as_secs_f64();
        log::info!(
            "FMM operators q={q} m={m}: {:.2}s, {} tables loaded, {} built",
            stats.seconds,
            stats.tables_loaded,
            stats.tables_built
        );
        Ok(FmmOperators {
            params,
            surface,
            stats,
            n_eq,
            p_u,
            p_d,
            m2m,
            l2l,
            m2l,
            w,
            l2t,
            s2m,
            near,
            periodic_far,
            surf_perm,
            node_perm,
            cheb_perm,
        })
    }

    pub fn n_eq(&self) -> usize {
        self.n_eq
    }

    pub fn q(&self) -> usize {
        self.params.q
    }

    /// Upward equivalent density of a leaf's source.
    pub fn s2m(&self, source: &ChebCoeffs) -> Vec<f64> {
        let s = source.octant().side();
        let a = nalgebra::DVectorView::from_slice(source.coeffs(), source.coeffs().len());
        (s * s * s * (&self.s2m * a)).as_slice().to_vec()
    }

    /// Contribution of child `c` to its parent's upward density.
    pub fn m2m(&self, c: usize, child: &[f64]) -> Vec<f64> {
        (&self.m2m[c] * nalgebra::DVectorView::from_slice(child, child.len())).as_slice().to_vec()
    }

    /// Downward density of child `c` inherited from its parent.
    pub fn l2l(&self, c: usize, parent: &[f64]) -> Vec<f64> {
        (&self.l2l[c] * nalgebra::DVectorView::from_slice(parent, parent.len())).as_slice().to_vec()
    }

    /// Downward density from potentials sampled on the downward check surface.
    pub fn local_from_check(&self, side: f64, check: &[f64]) -> Vec<f64> {
        (side * (&self.p_d * nalgebra::DVectorView::from_slice(check, check.len()))).as_slice().to_vec()
    }

    /// Upward density from potentials sampled on the upward check surface.
    pub fn multipole_from_check(&self, side: f64, check: &[f64]) -> Vec<f64> {
        (side * (&self.p_u * nalgebra::DVectorView::from_slice(check, check.len()))).as_slice().to_vec()
    }

    pub fn surface_points(&self, octant: &MortonKey, role: SurfaceRole) -> Vec<Point> {
        let scale = match role {
            SurfaceRole::UpwardEquivalent | SurfaceRole::DownwardCheck => self.params.eq_scale,
            SurfaceRole::UpwardCheck | SurfaceRole::DownwardEquivalent => self.params.check_scale,
        };
        self.surface.points(&octant.center(), octant.side(), scale)
    }

    /// Far potential of an octant's upward density at `x`.
    pub fn eval_multipole(&self, octant: &MortonKey, density: &[f64], x: &Point) -> f64 {
        let k = LaplaceKernel;
        self.surface_points(octant, SurfaceRole::UpwardEquivalent)
            .iter()
            .zip(density)
            .map(|(y, d)| k.between(x, y) * d)
            .sum()
    }

    /// Potential inside an octant represented by its downward density.
    pub fn eval_local(&self, octant: &MortonKey, density: &[f64], x: &Point) -> f64 {
        let k = LaplaceKernel;
        self.surface_points(octant, SurfaceRole::DownwardEquivalent)
            .iter()
            .zip(density)
            .map(|(y, d)| k.between(x, y) * d)
            .sum()
    }

    pub(crate) fn m2l_matrix(&self, canon: &[i32; 3]) -> Option<&DMatrix<f64>> {
        self.m2l.get(canon)
    }

    pub(crate) fn w_matrix(&self, canon: &[i32; 3]) -> Option<&DMatrix<f64>> {
        self.w.get(canon)
    }

    pub(crate) fn near_matrix(&self, kind: TableKind, canon: &[i32; 3]) -> Option<&DMatrix<f64>> {
        self.near.get(&(kind, *canon))
    }

    pub(crate) fn s2m_matrix(&self) -> &DMatrix<f64> {
        &self.s2m
    }

    pub(crate) fn m2m_matrix(&self, c: usize) -> &DMatrix<f64> {
        &self.m2m[c]
    }

    pub(crate) fn l2l_matrix(&self, c: usize) -> &DMatrix<f64> {
        &self.l2l[c]
    }

    pub(crate) fn p_d_matrix(&self) -> &DMatrix<f64> {
        &self.p_d
    }

    pub(crate) fn l2t_matrix(&self) -> &DMatrix<f64> {
        &self.l2t
    }

    pub(crate) fn periodic_far(&self) -> Option<&DMatrix<f64>> {
        self.periodic_far.as_ref()
    }

    pub(crate) fn surf_perm(&self, g: usize) -> &[usize] {
        &self.surf_perm[g]
    }

    pub(crate) fn node_perm(&self, g: usize) -> &[usize] {
        &self.node_perm[g]
    }

    pub(crate) fn cheb_perm(&self, g: usize) -> &[(usize, f64)] {
        &self.cheb_perm[g]
    }

    /// Potential at the Chebyshev nodes of `target` from a touching leaf
    /// `source` translated by `shift` unit cells, through the near tables.
    pub fn near_potential(&self, target: &MortonKey, source: &ChebCoeffs, shift: [i32; 3]) -> Result<Vec<f64>> {
        let (kind, canon, g) = near_class(target, [0; 3], &source.octant(), shift)?;
        let table = self.near_matrix(kind, &canon).ok_or_else(|| {
            ArenaError::InvalidArgument(format!("no near table for {kind:?} offset {canon:?}"))
        })?;
        let mut a = vec![0.0; table.ncols()];
        for (c, (c2, s)) in self.cheb_perm(g).iter().enumerate() {
            a[*c2] = s * source.coeffs()[c];
        }
        let v = table * nalgebra::DVector::from_vec(a);
        let side = target.side();
        let perm = self.node_perm(g);
        let mut out = vec![0.0; v.len()];
        for (i, x) in v.iter().enumerate() {
            out[perm[i]] = side * side * x;
        }
        Ok(out)
    }

    /// Direct quadrature of a leaf source's potential at arbitrary points.
    pub fn direct_potential(&self, source: &ChebCoeffs, points: &[Point]) -> Result<Vec<f64>> {
        let integ = RefIntegrator::new(source.q(), self.params.quad_tol);
        let key = source.octant();
        let c = key.center();
        let h = 0.5 * key.side();
        let mut buf = vec![0.0; n_coeffs(source.q())];
        points
            .iter()
            .map(|p| {
                let x = std::array::from_fn(|d| (p[d] - c[d]) / h);
                integ.integrate(&x, &mut buf)?;
                Ok(-h * h * buf.iter().zip(source.coeffs()).map(|(a, b)| a * b).sum::<f64>())
            })
            .collect()
    }
}

/// Center of `key` translated by `shift` cells, in units of `2^-level`.
pub(crate) fn center_units(key: &MortonKey, shift: [i32; 3], level: u8) -> [i64; 3] {
    let l = key.level();
    debug_assert!(level > l);
    let a = key.anchor();
    let up = level - l;
    std::array::from_fn(|d| ((a[d] as i64) << up) + (1i64 << (up - 1)) + ((shift[d] as i64) << level))
}

/// `(c_target - c_source)` in units of half the smaller octant's side.
pub(crate) fn pair_offset(t: &MortonKey, ts: [i32; 3], s: &MortonKey, ss: [i32; 3]) -> [i32; 3] {
    let level = t.level().max(s.level()) + 1;
    let a = center_units(t, ts, level);
    let b = center_units(s, ss, level);
    std::array::from_fn(|d| (a[d] - b[d]) as i32)
}

pub(crate) fn near_class(t: &MortonKey, ts: [i32; 3], s: &MortonKey, ss: [i32; 3]) -> Result<(TableKind, [i32; 3], usize)> {
    let kind = match s.level() as i32 - t.level() as i32 {
        0 => TableKind::SameLevel,
        -1 => TableKind::CoarseSource,
        1 => TableKind::FineSource,
        d => return Err(ArenaError::Precondition(format!("near pair with level gap {d}"))),
    };
    let (canon, g) = classify(pair_offset(t, ts, s, ss));
    Ok((kind, canon, g))
}
