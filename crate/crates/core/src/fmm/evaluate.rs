use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;

use crate::chebyshev::{to_local, ChebCoeffs};
use crate::error::{invalid, ArenaError, Result};
use crate::fmm::operators::{classify, near_class, pair_offset, FmmOperators, FmmParams};
use crate::fmm::tables::TableKind;
use crate::octree::{build_interaction_lists, InteractionLists, ListCounts, Octree};
use crate::Point;

/// Equivalent densities of one octant after evaluation.
#[derive(Clone, Debug, Default)]
pub struct FmmNodeData {
    pub multipole: Vec<f64>,
    pub local: Vec<f64>,
}

/// Wall-clock seconds per phase.
#[derive(Clone, Copy, Debug, Default)]
pub struct PhaseTimes {
    pub lists: f64,
    pub s2m: f64,
    pub m2m: f64,
    pub v_list: f64,
    pub x_list: f64,
    pub downward: f64,
    pub l2t: f64,
    pub w_list: f64,
    pub u_list: f64,
    pub interpolate: f64,
}

impl PhaseTimes {
    pub fn total(&self) -> f64 {
        self.lists
            + self.s2m
            + self.m2m
            + self.v_list
            + self.x_list
            + self.downward
            + self.l2t
            + self.w_list
            + self.u_list
            + self.interpolate
    }
}

/// Multiply-add counts of the dense translation kernels.
#[derive(Clone, Copy, Debug, Default)]
pub struct FmmWork {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: f64,
}

pub struct FmmResult {
    /// `∫ K(x - y) f(y) dy` per leaf, same leaves as the input tree.
    pub potential: Octree<ChebCoeffs>,
    /// Indexed like `lists.octants`.
    pub nodes: Vec<FmmNodeData>,
    pub lists: InteractionLists,
    pub counts: ListCounts,
    pub times: PhaseTimes,
    pub work: FmmWork,
    /// Mean of the source removed before a periodic evaluation.
    pub source_mean: f64,
    /// Mean of the periodic potential removed afterwards.
    pub output_mean: f64,
}

impl FmmResult {
    pub fn eval(&self, p: &Point) -> Result<f64> {
        let i = p
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
            .then(|| self.potential.locate(p))
            .flatten()
            .ok_or_else(|| ArenaError::InvalidArgument(format!("point {p:?} outside the unit cube")))?;
        let c = &self.potential.payload()[i];
        Ok(c.eval_local(&to_local(&c.octant(), p)))
    }
}

struct Job {
    target: usize,
    source: usize,
    g: usize,
    scale: f64,
}

/// Applies `mat` to many gathered vectors at once, in column blocks.
fn grouped<C>(
    mat: &DMatrix<f64>,
    jobs: &[Job],
    ctx: &mut C,
    gather: impl Fn(&C, &Job, &mut [f64]),
    scatter: impl Fn(&mut C, &Job, &[f64]),
) -> f64 {
    const BLOCK: usize = 128;
    let (r, c) = mat.shape();
    let mut b = DMatrix::zeros(c, 0);
    let mut out = DMatrix::zeros(r, 0);
    for block in jobs.chunks(BLOCK) {
        let n = block.len();
        if b.ncols() != n {
            b = DMatrix::zeros(c, n);
            out = DMatrix::zeros(r, n);
        }
        for (j, job) in block.iter().enumerate() {
            gather(ctx, job, &mut b.as_mut_slice()[j * c..(j + 1) * c]);
        }
        out.gemm(1.0, mat, &b, 0.0);
        for (j, job) in block.iter().enumerate() {
            scatter(ctx, job, &out.as_slice()[j * r..(j + 1) * r]);
        }
    }
    (r * c * jobs.len()) as f64
}

fn missing(what: &str, canon: [i32; 3]) -> ArenaError {
    ArenaError::InternalState(format!("no {what} operator for offset class {canon:?}"))
}

/// Free-space or periodic convolution `∫ K(x - y) f(y) dy` of the
/// piecewise-Chebyshev source carried by a balanced tree.
pub fn fmm_evaluate(tree: &Octree<ChebCoeffs>, params: &FmmParams) -> Result<FmmResult> {
    let ops = FmmOperators::shared(params)?;
    fmm_evaluate_with(&ops, tree)
}

pub fn fmm_evaluate_with(ops: &FmmOperators, tree: &Octree<ChebCoeffs>) -> Result<FmmResult> {
    let q = ops.q();
    let periodic = ops.params.periodic;
    for (key, c) in tree.iter() {
        if c.q() != q || c.octant() != *key {
            return invalid(format!("leaf {key:?} carries order-{} data for {:?}, expected order {q}", c.q(), c.octant()));
        }
    }
    let mut times = PhaseTimes::default();
    let mut work = FmmWork::default();
    let clock = Instant::now();
    let lists = build_interaction_lists(tree, periodic)?;
    times.lists = clock.elapsed().as_secs_f64();

    let n_oct = lists.octants.len();
    let n_eq = ops.n_eq();
    let nn = q * q * q;
    let keys = &lists.octants;
    let levels = lists.levels();

    let mut sources: Vec<ChebCoeffs> = tree.payload().to_vec();
    let source_mean = if periodic {
        let mean: f64 = sources.iter().map(ChebCoeffs::integral).sum();
        for s in &mut sources {
            s.coeffs_mut()[0] -= mean;
        }
        mean
    } else {
        0.0
    };

    let gather_coeffs = |src: &ChebCoeffs, g: usize, col: &mut [f64]| {
        for (c, (c2, s)) in ops.cheb_perm(g).iter().enumerate() {
            col[*c2] = s * src.coeffs()[c];
        }
    };

    // upward pass
    let clock = Instant::now();
    let mut multipole = vec![vec![0.0; n_eq]; n_oct];
    let jobs: Vec<Job> = lists
        .leaf_octant
        .iter()
        .enumerate()
        .map(|(leaf, &o)| Job { target: o, source: leaf, g: 0, scale: keys[o].side().powi(3) })
        .collect();
    {
        let mut ctx = (&sources, &mut multipole);
        grouped(
            ops.s2m_matrix(),
            &jobs,
            &mut ctx,
            |c, job, col| col.copy_from_slice(c.0[job.source].coeffs()),
            |c, job, v| c.1[job.target].iter_mut().zip(v).for_each(|(m, x)| *m += job.scale * x),
        );
    }
    times.s2m = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    for level in levels.iter().skip(1).rev() {
        for c in 0..8 {
            let jobs: Vec<Job> = level
                .iter()
                .filter(|&&o| keys[o].child_index() == c)
                .map(|&o| Job { target: lists.parent[o].unwrap(), source: o, g: 0, scale: 1.0 })
                .collect();
            grouped(
                ops.m2m_matrix(c),
                &jobs,
                &mut multipole,
                |m, job, col| col.copy_from_slice(&m[job.source]),
                |m, job, v| m[job.target].iter_mut().zip(v).for_each(|(a, x)| *a += x),
            );
        }
    }
    times.m2m = clock.elapsed().as_secs_f64();

    // far field into downward check potentials
    let clock = Instant::now();
    let mut check = vec![vec![0.0; n_eq]; n_oct];
    let mut by_class: BTreeMap<[i32; 3], Vec<Job>> = BTreeMap::new();
    for (t, list) in lists.v.iter().enumerate() {
        for it in list {
            let off = pair_offset(&keys[t], [0; 3], &keys[it.source], it.shift).map(|v| v / 2);
            let (canon, g) = classify(off);
            by_class.entry(canon).or_default().push(Job { target: t, source: it.source, g, scale: 1.0 / keys[t].side() });
        }
    }
    for (canon, jobs) in &by_class {
        let mat = ops.m2l_matrix(canon).ok_or_else(|| missing("M2L", *canon))?;
        let mut ctx = (&multipole, &mut check);
        work.v += grouped(
            mat,
            jobs,
            &mut ctx,
            |c, job, col| {
                let src = &c.0[job.source];
                for (j, p) in ops.surf_perm(job.g).iter().enumerate() {
                    col[j] = src[*p];
                }
            },
            |c, job, v| {
                let dst = &mut c.1[job.target];
                for (i, p) in ops.surf_perm(job.g).iter().enumerate() {
                    dst[*p] += job.scale * v[i];
                }
            },
        );
    }
    times.v_list = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut by_class: BTreeMap<[i32; 3], Vec<Job>> = BTreeMap::new();
    for (t, list) in lists.x.iter().enumerate() {
        for it in list {
            let (canon, g) = classify(pair_offset(&keys[t], [0; 3], &keys[it.source], it.shift));
            let leaf = lists.leaf[it.source].ok_or_else(|| ArenaError::InternalState("X-list source is not a leaf".into()))?;
            let s = keys[t].side();
            by_class.entry(canon).or_default().push(Job { target: t, source: leaf, g, scale: s * s });
        }
    }
    for (canon, jobs) in &by_class {
        let mat = ops.near_matrix(TableKind::XList, canon).ok_or_else(|| missing("X-list", *canon))?;
        let mut ctx = (&sources, &mut check);
        work.x += grouped(
            mat,
            jobs,
            &mut ctx,
            |c, job, col| gather_coeffs(&c.0[job.source], job.g, col),
            |c, job, v| {
                let dst = &mut c.1[job.target];
                for (i, p) in ops.surf_perm(job.g).iter().enumerate() {
                    dst[*p] += job.scale * v[i];
                }
            },
        );
    }
    times.x_list = clock.elapsed().as_secs_f64();

    // downward pass
    let clock = Instant::now();
    if let Some(far) = ops.periodic_far() {
        let v = far * nalgebra::DVector::from_column_slice(&multipole[0]);
        check[0].iter_mut().zip(v.iter()).for_each(|(a, x)| *a += x);
    }
    let mut local = vec![vec![0.0; n_eq]; n_oct];
    for level in &levels {
        let jobs: Vec<Job> = level
            .iter()
            .filter(|&&o| check[o].iter().any(|v| *v != 0.0))
            .map(|&o| Job { target: o, source: o, g: 0, scale: keys[o].side() })
            .collect();
        let mut ctx = (&check, &mut local);
        grouped(
            ops.p_d_matrix(),
            &jobs,
            &mut ctx,
            |c, job, col| col.copy_from_slice(&c.0[job.source]),
            |c, job, v| c.1[job.target].iter_mut().zip(v).for_each(|(a, x)| *a += job.scale * x),
        );
        for c in 0..8 {
            let jobs: Vec<Job> = level
                .iter()
                .filter(|&&o| keys[o].level() > 0 && keys[o].child_index() == c)
                .map(|&o| Job { target: o, source: lists.parent[o].unwrap(), g: 0, scale: 1.0 })
                .collect();
            grouped(
                ops.l2l_matrix(c),
                &jobs,
                &mut local,
                |l, job, col| col.copy_from_slice(&l[job.source]),
                |l, job, v| l[job.target].iter_mut().zip(v).for_each(|(a, x)| *a += x),
            );
        }
    }
    times.downward = clock.elapsed().as_secs_f64();

    let n_leaves = tree.len();
    let mut pot = vec![vec![0.0; nn]; n_leaves];
    let clock = Instant::now();
    {
        let jobs: Vec<Job> = lists
            .leaf_octant
            .iter()
            .enumerate()
            .map(|(leaf, &o)| Job { target: leaf, source: o, g: 0, scale: 1.0 / keys[o].side() })
            .collect();
        let mut ctx = (&local, &mut pot);
        grouped(
            ops.l2t_matrix(),
            &jobs,
            &mut ctx,
            |c, job, col| col.copy_from_slice(&c.0[job.source]),
            |c, job, v| c.1[job.target].iter_mut().zip(v).for_each(|(a, x)| *a += job.scale * x),
        );
    }
    times.l2t = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut by_class: BTreeMap<[i32; 3], Vec<Job>> = BTreeMap::new();
    for (t, list) in lists.w.iter().enumerate() {
        let Some(leaf) = lists.leaf[t] else { continue };
        for it in list {
            let (canon, g) = classify(pair_offset(&keys[t], [0; 3], &keys[it.source], it.shift));
            by_class.entry(canon).or_default().push(Job { target: leaf, source: it.source, g, scale: 1.0 / keys[t].side() });
        }
    }
    for (canon, jobs) in &by_class {
        let mat = ops.w_matrix(canon).ok_or_else(|| missing("W-list", *canon))?;
        let mut ctx = (&multipole, &mut pot);
        work.w += grouped(
            mat,
            jobs,
            &mut ctx,
            |c, job, col| {
                let src = &c.0[job.source];
                for (j, p) in ops.surf_perm(job.g).iter().enumerate() {
                    col[j] = src[*p];
                }
            },
            |c, job, v| {
                let dst = &mut c.1[job.target];
                for (i, p) in ops.node_perm(job.g).iter().enumerate() {
                    dst[*p] += job.scale * v[i];
                }
            },
        );
    }
    times.w_list = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut by_class: BTreeMap<(TableKind, [i32; 3]), Vec<Job>> = BTreeMap::new();
    for (t, list) in lists.u.iter().enumerate() {
        let Some(leaf) = lists.leaf[t] else { continue };
        for it in list {
            let (kind, canon, g) = near_class(&keys[t], [0; 3], &keys[it.source], it.shift)?;
            let src = lists.leaf[it.source].ok_or_else(|| ArenaError::InternalState("U-list source is not a leaf".into()))?;
            let s = keys[t].side();
            by_class.entry((kind, canon)).or_default().push(Job { target: leaf, source: src, g, scale: s * s });
        }
    }
    for ((kind, canon), jobs) in &by_class {
        let mat = ops.near_matrix(*kind, canon).ok_or_else(|| missing("near-field", *canon))?;
        let mut ctx = (&sources, &mut pot);
        work.u += grouped(
            mat,
            jobs,
            &mut ctx,
            |c, job, col| gather_coeffs(&c.0[job.source], job.g, col),
            |c, job, v| {
                let dst = &mut c.1[job.target];
                for (i, p) in ops.node_perm(job.g).iter().enumerate() {
                    dst[*p] += job.scale * v[i];
                }
            },
        );
    }
    times.u_list = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut out = Vec::with_capacity(n_leaves);
    for (key, values) in tree.leaves().iter().zip(&pot) {
        out.push(ChebCoeffs::from_node_values(values, *key, q)?);
    }
    let output_mean = if periodic {
        let mean: f64 = out.iter().map(ChebCoeffs::integral).sum();
        for c in &mut out {
            c.coeffs_mut()[0] -= mean;
        }
        mean
    } else {
        0.0
    };
    times.interpolate = clock.elapsed().as_secs_f64();

    let nodes = multipole
        .into_iter()
        .zip(local)
        .map(|(multipole, local)| FmmNodeData { multipole, local })
        .collect();
    let counts = lists.counts();
    let potential = tree.with_payload(out)?;
    Ok(FmmResult { potential, nodes, lists, counts, times, work, source_mean, output_mean })
}
