use arena_core::chebyshev::{cheb_approx, coeff_indices, n_coeffs, tensor_nodes, to_local, ChebCoeffs};
use arena_core::fmm::{fmm_evaluate, FmmOperators, FmmParams, LaplaceKernel, SurfaceRole};
use arena_core::octree::{balance_2to1, MortonKey, Octree};
use arena_core::spectral::{poisson_spectral_solve, GridField};
use arena_core::{ArenaError, Point};
use arena_oracles::cone::UNIT_CUBE_CENTER_POTENTIAL;
use arena_oracles::volume::ChebBox;
use arena_oracles::SplitMix;

fn bump(x: &Point) -> f64 {
    let c = [0.45, 0.55, 0.5];
    let r2: f64 = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum();
    (-r2 / 0.02).exp()
}

fn as_box(c: &ChebCoeffs) -> ChebBox {
    let key = c.octant();
    let lo = key.lower_corner();
    let s = key.side();
    let terms = coeff_indices(c.q()).into_iter().zip(c.coeffs().iter().copied()).collect();
    ChebBox { lo, hi: lo.map(|v| v + s), q: c.q(), terms }
}

/// `∫ K(x - y) f(y) dy` summed leaf by leaf.
fn oracle(sources: &[ChebCoeffs], x: &Point) -> f64 {
    sources.iter().map(|c| -as_box(c).potential(x)).sum()
}

fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = SplitMix(seed);
    (0..n).map(|_| [rng.uniform(), rng.uniform(), rng.uniform()]).collect()
}

fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    got.iter().zip(want).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale
}

/// Random coefficients decaying with total degree.
fn random_coeffs(q: usize, key: MortonKey, seed: u64) -> ChebCoeffs {
    let mut rng = SplitMix(seed);
    let c = coeff_indices(q)
        .iter()
        .map(|[i, j, k]| (2.0 * rng.uniform() - 1.0) * 0.5f64.powi((i + j + k) as i32))
        .collect();
    ChebCoeffs::new(q, c, key).unwrap()
}

fn key(level: u8, a: [u32; 3]) -> MortonKey {
    MortonKey::new(level, a).unwrap()
}

fn ops(q: usize, m: usize, periodic: bool) -> std::sync::Arc<FmmOperators> {
    FmmOperators::shared(&FmmParams::new(q, m, periodic)).unwrap()
}

/// Root split into octants, octant 0 split again, and its child 7 split
/// once more; then balanced. Has nonempty W and X lists.
fn adaptive_tree(q: usize, f: impl Fn(&Point) -> f64) -> Octree<ChebCoeffs> {
    let root = MortonKey::ROOT;
    let mut keys: Vec<MortonKey> = Vec::new();
    for c in root.children() {
        if c.child_index() != 0 {
            keys.push(c);
            continue;
        }
        for g in c.children() {
            if g.child_index() == 7 {
                keys.extend(g.children());
            } else {
                keys.push(g);
            }
        }
    }
    let tree = Octree::from_leaves(keys.into_iter().map(|k| (k, ())).collect(), 8).unwrap();
    let tree = balance_2to1(tree, false, |_| ());
    tree.map(|k, _| cheb_approx(&f, *k, q).unwrap())
}

#[test]
fn near_table_scale_rule_is_exact() {
    let op = ops(6, 4, false);
    let coarse = random_coeffs(6, MortonKey::ROOT, 1);
    let fine_key = key(2, [1, 2, 3]);
    let fine = ChebCoeffs::new(6, coarse.coeffs().to_vec(), fine_key).unwrap();
    let a = op.near_potential(&MortonKey::ROOT, &coarse, [0; 3]).unwrap();
    let b = op.near_potential(&fine_key, &fine, [0; 3]).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x / 16.0, *y);
    }
}

#[test]
fn uniform_cube_center_potential() {
    // odd q puts a node at the center
    let op = ops(7, 4, false);
    let mut c = ChebCoeffs::zeros(7, MortonKey::ROOT);
    c.coeffs_mut()[0] = 1.0;
    let v = op.near_potential(&MortonKey::ROOT, &c, [0; 3]).unwrap();
    let center = (3 * 7 + 3) * 7 + 3;
    assert!((v[center] + UNIT_CUBE_CENTER_POTENTIAL).abs() < 1e-10, "{}", v[center]);
    // odd source in ξ₁
    let mut c = ChebCoeffs::zeros(7, MortonKey::ROOT);
    let pos = coeff_indices(7).iter().position(|i| *i == [1, 0, 0]).unwrap();
    c.coeffs_mut()[pos] = 1.0;
    let v = op.near_potential(&MortonKey::ROOT, &c, [0; 3]).unwrap();
    assert!(v[center].abs() < 1e-15);
}

#[test]
fn near_tables_match_brute_force() {
    let q = 6;
    let op = ops(q, 4, false);
    let cases = [
        (key(2, [1, 1, 1]), key(2, [1, 1, 1]), [0, 0, 0]),
        (key(2, [1, 1, 1]), key(2, [2, 1, 0]), [0, 0, 0]),
        (key(2, [1, 1, 1]), key(2, [2, 2, 2]), [0, 0, 0]),
        (key(2, [1, 1, 1]), key(1, [1, 0, 0]), [0, 0, 0]),
        (key(1, [1, 0, 0]), key(2, [1, 1, 1]), [0, 0, 0]),
        (key(2, [0, 0, 3]), key(2, [3, 0, 0]), [-1, 0, 1]),
    ];
    for (n, (t, s, shift)) in cases.iter().enumerate() {
        let src = random_coeffs(q, *s, 10 + n as u64);
        let got = op.near_potential(t, &src, *shift).unwrap();
        let mut b = as_box(&src);
        for d in 0..3 {
            b.lo[d] += shift[d] as f64;
            b.hi[d] += shift[d] as f64;
        }
        let nodes = tensor_nodes(t, q);
        let picks = [0, 37, 100, q * q * q - 1];
        let want: Vec<f64> = picks.iter().map(|&i| -b.potential(&nodes[i])).collect();
        let got: Vec<f64> = picks.iter().map(|&i| got[i]).collect();
        let err = rel_err(&got, &want);
        assert!(err < 1e-10, "case {n}: {err:e}");
    }
}

fn far_points(center: &Point, dist: f64, n: usize, seed: u64) -> Vec<Point> {
    let mut rng = SplitMix(seed);
    (0..n)
        .map(|_| {
            let v = [rng.uniform() - 0.5, rng.uniform() - 0.5, rng.uniform() - 0.5];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            std::array::from_fn(|d| center[d] + dist * v[d] / r)
        })
        .collect()
}

#[test]
fn multipole_accuracy_by_surface_order() {
    let leaf = key(2, [1, 2, 1]);
    let src = random_coeffs(8, leaf, 3);
    let pts = far_points(&leaf.center(), 3.0 * leaf.side(), 12, 5);
    let want: Vec<f64> = pts.iter().map(|p| -as_box(&src).potential(p)).collect();
    for (m, tol) in [(4, 1e-3), (10, 1e-6)] {
        let op = ops(8, m, false);
        let phi = op.s2m(&src);
        let got: Vec<f64> = pts.iter().map(|p| op.eval_multipole(&leaf, &phi, p)).collect();
        let err = rel_err(&got, &want);
        assert!(err < tol, "m={m}: {err:e}");
        assert!(op.s2m(&ChebCoeffs::zeros(8, leaf)).iter().all(|v| *v == 0.0));
    }
}

#[test]
fn even_source_gives_mirror_symmetric_far_field() {
    let leaf = key(1, [0, 1, 0]);
    let op = ops(6, 6, false);
    let c = leaf.center();
    let src = cheb_approx(|x| (-(0..3).map(|d| (x[d] - c[d]).powi(2)).sum::<f64>() * 20.0).exp(), leaf, 6).unwrap();
    let phi = op.s2m(&src);
    let p = [c[0] + 1.3, c[1] + 0.7, c[2] - 0.9];
    let base = op.eval_multipole(&leaf, &phi, &p);
    for bits in 1..8 {
        let q: Point = std::array::from_fn(|d| if bits >> d & 1 == 1 { 2.0 * c[d] - p[d] } else { p[d] });
        let v = op.eval_multipole(&leaf, &phi, &q);
        assert!((v - base).abs() < 1e-9 * base.abs(), "{bits}: {v} vs {base}");
    }
}

#[test]
fn m2m_reproduces_children() {
    let op = ops(6, 10, false);
    let parent = key(1, [1, 0, 1]);
    let mut total = vec![0.0; op.n_eq()];
    let mut children = Vec::new();
    for (c, child) in parent.children().iter().enumerate() {
        let phi = op.s2m(&random_coeffs(6, *child, 20 + c as u64));
        for (t, v) in total.iter_mut().zip(op.m2m(c, &phi)) {
            *t += v;
        }
        children.push((*child, phi));
    }
    let direct = |p: &Point| children.iter().map(|(k, phi)| op.eval_multipole(k, phi, p)).sum::<f64>();
    // refit the children's summed field on the parent's check surface
    let check: Vec<f64> = op.surface_points(&parent, SurfaceRole::UpwardCheck).iter().map(direct).collect();
    let refit = op.multipole_from_check(parent.side(), &check);
    let far = far_points(&parent.center(), 3.0 * parent.side(), 10, 9);
    let got: Vec<f64> = far.iter().map(|p| op.eval_multipole(&parent, &total, p)).collect();
    let two_path: Vec<f64> = far.iter().map(|p| op.eval_multipole(&parent, &refit, p)).collect();
    // equal up to rounding amplified by the regularized inverse
    assert!(rel_err(&got, &two_path) < 1e-7, "{:e}", rel_err(&got, &two_path));
    let want: Vec<f64> = far.iter().map(direct).collect();
    assert!(rel_err(&got, &want) < 1e-6, "{:e}", rel_err(&got, &want));
    let (a, b) = (&children[2].1, &children[5].1);
    let sum: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let lhs = op.m2m(4, &sum);
    let rhs: Vec<f64> = op.m2m(4, a).iter().zip(op.m2m(4, b)).map(|(x, y)| x + y).collect();
    assert!(rel_err(&lhs, &rhs) < 1e-12);
    let zero = op.m2m(3, &vec![0.0; op.n_eq()]);
    assert!(zero.iter().all(|v| *v == 0.0));
}

#[test]
fn l2l_preserves_interior_field() {
    let op = ops(6, 10, false);
    let kern = LaplaceKernel;
    let parent = key(2, [1, 1, 1]);
    let weights = [1.0, -0.7, 0.4, 0.25];
    let charges = far_points(&parent.center(), 3.0 * parent.side(), 4, 13);
    let field = |p: &Point| charges.iter().zip(weights).map(|(y, w)| w * kern.between(p, y)).sum::<f64>();
    let check: Vec<f64> = op.surface_points(&parent, SurfaceRole::DownwardCheck).iter().map(field).collect();
    let psi = op.local_from_check(parent.side(), &check);
    for (c, child) in parent.children().iter().enumerate() {
        let local = op.l2l(c, &psi);
        let pts: Vec<Point> = tensor_nodes(child, 3);
        let got: Vec<f64> = pts.iter().map(|p| op.eval_local(child, &local, p)).collect();
        let want: Vec<f64> = pts.iter().map(field).collect();
        assert!(rel_err(&got, &want) < 1e-6, "child {c}: {:e}", rel_err(&got, &want));
    }
}

#[test]
fn u_list_matches_table_application() {
    let q = 6;
    let src_key = key(1, [0, 1, 1]);
    let tree = Octree::uniform(1, |k| {
        if *k == src_key {
            random_coeffs(q, *k, 4)
        } else {
            ChebCoeffs::zeros(q, *k)
        }
    })
    .unwrap();
    let params = FmmParams::new(q, 4, false);
    let res = fmm_evaluate(&tree, &params).unwrap();
    let op = ops(q, 4, false);
    for (k, pot) in res.potential.iter() {
        let direct = op.near_potential(k, &tree.payload()[tree.covering_leaf(&src_key).unwrap()], [0; 3]).unwrap();
        let want = ChebCoeffs::from_node_values(&direct, *k, q).unwrap();
        let err = rel_err(pot.coeffs(), want.coeffs());
        assert!(err < 1e-13, "{k:?}: {err:e}");
    }
}

#[test]
fn well_separated_leaves_high_order() {
    let q = 14;
    let src_key = key(2, [0, 0, 0]);
    let c = src_key.center();
    let f = |x: &Point| (-(0..3).map(|d| (x[d] - c[d]).powi(2)).sum::<f64>() * 60.0).exp();
    let tree = Octree::uniform(2, |k| if *k == src_key { cheb_approx(f, *k, q).unwrap() } else { ChebCoeffs::zeros(q, *k) }).unwrap();
    let res = fmm_evaluate(&tree, &FmmParams::new(q, 10, false)).unwrap();
    let src = &tree.payload()[0];
    let target = key(2, [3, 3, 2]);
    let pts: Vec<Point> = tensor_nodes(&target, 3);
    let got: Vec<f64> = pts.iter().map(|p| res.eval(p).unwrap()).collect();
    let want: Vec<f64> = pts.iter().map(|p| -as_box(src).potential(p)).collect();
    assert!(rel_err(&got, &want) < 1e-6, "{:e}", rel_err(&got, &want));
}

#[test]
fn adaptive_tree_with_w_and_x_lists() {
    let q = 6;
    let tree = adaptive_tree(q, bump);
    let res = fmm_evaluate(&tree, &FmmParams::new(q, 6, false)).unwrap();
    assert!(res.counts.w > 0 && res.counts.x > 0);
    let pts = random_points(12, 11);
    let got: Vec<f64> = pts.iter().map(|p| res.eval(p).unwrap()).collect();
    let want: Vec<f64> = pts.iter().map(|p| oracle(tree.payload(), p)).collect();
    let err = rel_err(&got, &want);
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn linear_in_the_source() {
    let q = 6;
    let params = FmmParams::new(q, 4, false);
    let f1 = adaptive_tree(q, bump);
    let f2 = adaptive_tree(q, |x| (3.0 * x[0]).sin() * x[1] + x[2] * x[2]);
    let (a, b) = (1.7, -0.3);
    let mixed = adaptive_tree(q, |x| a * bump(x) + b * ((3.0 * x[0]).sin() * x[1] + x[2] * x[2]));
    let r1 = fmm_evaluate(&f1, &params).unwrap();
    let r2 = fmm_evaluate(&f2, &params).unwrap();
    let rm = fmm_evaluate(&mixed, &params).unwrap();
    for i in 0..f1.len() {
        let want: Vec<f64> = r1.potential.payload()[i]
            .coeffs()
            .iter()
            .zip(r2.potential.payload()[i].coeffs())
            .map(|(x, y)| a * x + b * y)
            .collect();
        let err = rel_err(rm.potential.payload()[i].coeffs(), &want);
        assert!(err < 1e-10, "leaf {i}: {err:e}");
    }
}

#[test]
fn uniform_periodic_counters() {
    let q = 4;
    let tree = Octree::uniform(2, |k| ChebCoeffs::zeros(q, *k)).unwrap();
    let res = fmm_evaluate(&tree, &FmmParams::new(q, 4, true)).unwrap();
    assert_eq!(res.counts.u, 27 * 64);
    assert_eq!(res.counts.v, 189 * (8 + 64));
    assert_eq!((res.counts.w, res.counts.x), (0, 0));
    assert_eq!(res.work.u, (27 * 64 * q * q * q * n_coeffs(q)) as f64);
}

#[test]
fn rejects_unbalanced_tree() {
    let mut keys: Vec<MortonKey> = MortonKey::ROOT.children()[1..].to_vec();
    let first = MortonKey::ROOT.child(0);
    for c in first.children() {
        if c.child_index() == 7 {
            for g in c.children() {
                keys.push(g);
            }
        } else {
            keys.push(c);
        }
    }
    let tree = Octree::from_leaves(keys.into_iter().map(|k| (k, ChebCoeffs::zeros(4, k))).collect(), 8).unwrap();
    let tree = tree.map(|k, _| ChebCoeffs::zeros(4, *k));
    let err = fmm_evaluate(&tree, &FmmParams::new(4, 4, false)).err().unwrap();
    assert!(matches!(err, ArenaError::Precondition(_)), "{err}");
}

#[test]
fn periodic_matches_spectral_solution() {
    let q = 14;
    let f = |x: &Point| {
        use std::f64::consts::PI;
        (2.0 * PI * (x[0] + 2.0 * x[1])).cos() + (4.0 * PI * x[2]).sin() * (2.0 * PI * x[0]).cos() + 0.3
    };
    let tree = Octree::uniform(2, |k| cheb_approx(f, *k, q).unwrap()).unwrap();
    let res = fmm_evaluate(&tree, &FmmParams::new(q, 10, true)).unwrap();
    assert!((res.source_mean - 0.3).abs() < 1e-10);
    let spectral = poisson_spectral_solve(&GridField::sample(16, f).unwrap()).unwrap();
    let pts = random_points(200, 21);
    // the convolution with K solves Δu = f, so the Poisson solution is its negative
    let got: Vec<f64> = pts.iter().map(|p| -res.eval(p).unwrap()).collect();
    let want: Vec<f64> = pts.iter().map(|p| spectral.eval(p)).collect();
    let shift = want.iter().zip(&got).map(|(w, g)| w - g).sum::<f64>() / pts.len() as f64;
    let aligned: Vec<f64> = got.iter().map(|g| g + shift).collect();
    let err = rel_err(&aligned, &want);
    assert!(err < 1e-5, "{err:e}");
}

#[test]
fn periodic_solution_keeps_cube_symmetry() {
    use std::f64::consts::PI;
    let q = 10;
    let f = |x: &Point| (0..3).map(|d| (2.0 * PI * x[d]).cos()).sum::<f64>() + (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).cos() * (2.0 * PI * x[2]).cos();
    let tree = Octree::uniform(2, |k| cheb_approx(f, *k, q).unwrap()).unwrap();
    let res = fmm_evaluate(&tree, &FmmParams::new(q, 6, true)).unwrap();
    let scale = res.potential.payload().iter().map(|c| c.coeffs()[0].abs()).fold(0.0, f64::max);
    for p in random_points(10, 31) {
        let base = res.eval(&p).unwrap();
        for image in [[1.0 - p[0], p[1], p[2]], [p[1], p[0], p[2]], [p[2], 1.0 - p[1], p[0]]] {
            let v = res.eval(&image).unwrap();
            assert!((v - base).abs() < 1e-5 * scale, "{p:?} -> {image:?}: {v} vs {base}");
        }
    }
}

#[test]
fn accuracy_improves_with_surface_order() {
    let q = 8;
    let tree = adaptive_tree(q, bump);
    let pts = random_points(8, 41);
    let want: Vec<f64> = pts.iter().map(|p| oracle(tree.payload(), p)).collect();
    let errs: Vec<f64> = [4, 6, 10]
        .iter()
        .map(|&m| {
            let res = fmm_evaluate(&tree, &FmmParams::new(q, m, false)).unwrap();
            let got: Vec<f64> = pts.iter().map(|p| res.eval(p).unwrap()).collect();
            rel_err(&got, &want)
        })
        .collect();
    assert!(errs[0] * 2.0 >= errs[1] && errs[1] * 2.0 >= errs[2], "{errs:?}");
}

#[test]
fn evaluation_outside_the_cube_is_rejected() {
    let tree = Octree::uniform(1, |k| ChebCoeffs::zeros(4, *k)).unwrap();
    let res = fmm_evaluate(&tree, &FmmParams::new(4, 4, false)).unwrap();
    assert!(res.eval(&[1.5, 0.5, 0.5]).is_err());
    let p = [0.3, 0.6, 0.2];
    let leaf = res.potential.locate(&p).unwrap();
    let c = &res.potential.payload()[leaf];
    assert_eq!(res.eval(&p).unwrap(), c.eval_local(&to_local(&c.octant(), &p)));
}
