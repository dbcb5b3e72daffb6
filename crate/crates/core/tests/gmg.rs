use arena_core::gmg::{gmg_solve, prolong, restrict, GmgParams, MeshLevel, MgHierarchy, NodalField};
use arena_core::problems::TestCase;
use arena_core::ArenaError;
use arena_oracles::fem;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(m: &MeshLevel, seed: u64, mean_free: bool) -> NodalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..m.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if mean_free {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    }
    NodalField::new(m, v).unwrap()
}

fn dense_apply(a: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[test]
fn operator_matches_dense_assembly() {
    for (e, q) in [(2, 1), (2, 2), (1, 3), (2, 3), (4, 1), (1, 5)] {
        let m = MeshLevel::new(e, q).unwrap();
        let a = fem::assemble_stiffness(e, q);
        let scale = max_abs(&a);
        for seed in 0..3 {
            let u = random_field(&m, seed, false);
            let got = m.apply_operator(&u).unwrap();
            let want = dense_apply(&a, u.data());
            let err = got.data().iter().zip(&want).fold(0.0f64, |acc, (g, w)| acc.max((g - w).abs()));
            assert!(err <= 1e-12 * scale * 10.0, "e={e} q={q}: {err:e}");
        }
        let d = m.diagonal();
        for i in 0..m.len() {
            assert!((d.data()[i] - a[i * m.len() + i]).abs() <= 1e-12 * scale, "diag e={e} q={q} node {i}");
        }
    }
}

#[test]
fn trilinear_diagonal_value() {
    // q=1 stiffness diagonal is (8 elements) · (h/2)·(4/9)·... = 8h/3 per node
    let m = MeshLevel::new(2, 1).unwrap();
    let d = m.diagonal();
    assert!(d.data().iter().all(|v| (v - 8.0 * 0.5 / 3.0).abs() < 1e-13));
}

#[test]
fn node_coordinates_match_oracle() {
    for (e, q) in [(2, 4), (4, 3)] {
        let m = MeshLevel::new(e, q).unwrap();
        for g in 0..m.n {
            assert!((m.coordinate(g) - fem::node_coordinate(g, e, q)).abs() < 1e-15);
        }
    }
}

#[test]
fn prolongation_matches_dense_interpolation() {
    for (e, q) in [(1, 2), (2, 1), (1, 4)] {
        let c = MeshLevel::new(e, q).unwrap();
        let f = MeshLevel::new(2 * e, q).unwrap();
        let p = fem::prolongation_dense(e, q);
        let u = random_field(&c, 3, false);
        let got = prolong(&c, &f, &u).unwrap();
        let nc = c.len();
        for i in 0..f.len() {
            let want: f64 = (0..nc).map(|j| p[i * nc + j] * u.data()[j]).sum();
            assert!((got.data()[i] - want).abs() < 1e-12, "e={e} q={q} fine node {i}");
        }
    }
}

#[test]
fn prolongation_reproduces_polynomials() {
    let q = 3;
    let c = MeshLevel::new(2, q).unwrap();
    let f = MeshLevel::new(4, q).unwrap();
    // a polynomial is not periodic, so only coarse elements away from the
    // seam (those in [0, 1/2]^3) hold it exactly
    let poly = |x: &[f64; 3]| 1.5 + x[0] * x[1] - 0.25 * x[2] * x[2] * x[0];
    let uc = c.sample(poly).unwrap();
    let uf = prolong(&c, &f, &uc).unwrap();
    for (i, v) in uf.data().iter().enumerate() {
        let p = f.node_point(i);
        if p.iter().all(|c| *c < 0.5) {
            let want = c.eval(&uc, &p).unwrap();
            assert!((v - want).abs() < 1e-12);
            assert!((v - poly(&p)).abs() < 1e-12, "node {i} at {p:?}");
        }
    }
    let ones = NodalField::new(&c, vec![1.0; c.len()]).unwrap();
    let pf = prolong(&c, &f, &ones).unwrap();
    assert!(pf.data().iter().all(|v| (v - 1.0).abs() < 1e-14));
}

#[test]
fn hat_function_weights() {
    let c = MeshLevel::new(2, 1).unwrap();
    let f = MeshLevel::new(4, 1).unwrap();
    let mut hat = vec![0.0; c.len()];
    hat[(1 * 2 + 1) * 2 + 1] = 1.0; // coarse node at (0.5, 0.5, 0.5)
    let fine = prolong(&c, &f, &NodalField::new(&c, hat).unwrap()).unwrap();
    for i in 0..f.len() {
        let p = f.node_point(i);
        let off: Vec<f64> = p.iter().map(|x| (x - 0.5).abs()).collect();
        let weight = off.iter().map(|o| if *o == 0.0 { 1.0 } else if *o == 0.25 { 0.5 } else { 0.0 }).product::<f64>();
        assert!((fine.data()[i] - weight).abs() < 1e-15, "{p:?}");
    }
    let vals: Vec<f64> = [[0.5, 0.5, 0.5], [0.75, 0.5, 0.5], [0.75, 0.75, 0.5], [0.75, 0.75, 0.75]]
        .iter()
        .map(|p| {
            let i = (0..f.len()).find(|&i| f.node_point(i) == *p).unwrap();
            fine.data()[i]
        })
        .collect();
    assert_eq!(vals, vec![1.0, 0.5, 0.25, 0.125]);
}

#[test]
fn restriction_is_the_adjoint() {
    let c = MeshLevel::new(4, 4).unwrap();
    let f = MeshLevel::new(8, 4).unwrap();
    for seed in 0..3 {
        let v = random_field(&f, 10 + seed, false);
        let w = random_field(&c, 20 + seed, false);
        let lhs = restrict(&f, &c, &v).unwrap().dot(&w);
        let rhs = v.dot(&prolong(&c, &f, &w).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
    assert!(matches!(restrict(&c, &f, &random_field(&c, 1, false)), Err(ArenaError::InvalidArgument(_))));
}

#[test]
fn galerkin_consistency() {
    for (e, q) in [(2, 1), (2, 3), (4, 2)] {
        let c = MeshLevel::new(e, q).unwrap();
        let f = MeshLevel::new(2 * e, q).unwrap();
        let v = random_field(&c, 5, false);
        let w = random_field(&c, 6, false);
        let lhs = c.apply_operator(&v).unwrap().dot(&w);
        let (pv, pw) = (prolong(&c, &f, &v).unwrap(), prolong(&c, &f, &w).unwrap());
        let rhs = f.apply_operator(&pv).unwrap().dot(&pw);
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "e={e} q={q}: {lhs} vs {rhs}");
    }
}

#[test]
fn constants_are_in_the_null_space() {
    for (e, q) in [(2, 1), (4, 3), (2, 6)] {
        let m = MeshLevel::new(e, q).unwrap();
        let au = m.apply_operator(&NodalField::new(&m, vec![3.0; m.len()]).unwrap()).unwrap();
        assert!(max_abs(au.data()) < 1e-11, "e={e} q={q}");
    }
}

#[test]
fn rayleigh_quotient_positive() {
    let m = MeshLevel::new(4, 2).unwrap();
    for seed in 0..100 {
        let u = random_field(&m, 1000 + seed, true);
        assert!(m.apply_operator(&u).unwrap().dot(&u) > 0.0);
    }
}

#[test]
fn hierarchy_layout() {
    let mut p = GmgParams::new(1, 16);
    p.levels = Some(3);
    let h = MgHierarchy::new(p).unwrap();
    let es: Vec<usize> = h.levels.iter().rev().map(|l| l.e).collect();
    assert_eq!(es, vec![16, 8, 4, 2]);
    for k in 0..h.levels.len() {
        assert!(h.inv_diagonal(k).iter().all(|d| *d > 0.0));
    }
}

#[test]
fn jacobi_definition() {
    let h = MgHierarchy::new(GmgParams::new(2, 4)).unwrap();
    let k = h.levels.len() - 1;
    let m = h.finest();
    let f = random_field(m, 7, true);
    let mut u = NodalField::zeros(m);
    h.jacobi_smooth(k, &mut u, &f, 0).unwrap();
    assert!(u.data().iter().all(|v| *v == 0.0));
    h.jacobi_smooth(k, &mut u, &f, 1).unwrap();
    for i in 0..m.len() {
        let want = 2.0 / 3.0 * h.inv_diagonal(k)[i] * f.data()[i];
        assert!((u.data()[i] - want).abs() < 1e-15 * want.abs().max(1.0));
    }
}

#[test]
fn jacobi_damps_the_checkerboard() {
    let mut p = GmgParams::new(1, 8);
    p.levels = Some(0);
    let h = MgHierarchy::new(p).unwrap();
    let m = h.finest();
    // zero right-hand side, so u itself is the error
    let f = NodalField::zeros(m);
    let n = m.n;
    let mut u =
        NodalField::new(m, (0..m.len()).map(|i| if (i / (n * n) + i / n % n + i % n) % 2 == 0 { 1.0 } else { -1.0 }).collect())
            .unwrap();
    let mut last = u.dot(&u).sqrt();
    for _ in 0..5 {
        h.jacobi_smooth(0, &mut u, &f, 1).unwrap();
        let now = u.dot(&u).sqrt();
        assert!(now < last, "{now} !< {last}");
        last = now;
    }
}

#[test]
fn vcycle_trivial_cases() {
    let h = MgHierarchy::new(GmgParams::new(2, 8)).unwrap();
    let m = h.finest();
    let z = NodalField::zeros(m);
    assert!(h.vcycle(&z, &z).unwrap().data().iter().all(|v| *v == 0.0));

    // single level: the V-cycle is the direct solve
    let mut p = GmgParams::new(2, 4);
    p.levels = Some(0);
    let h = MgHierarchy::new(p).unwrap();
    let m = h.finest();
    let f = random_field(m, 9, true);
    let u = h.vcycle(&f, &NodalField::zeros(m)).unwrap();
    let r: Vec<f64> = m.apply_operator(&u).unwrap().data().iter().zip(f.data()).map(|(a, b)| a - b).collect();
    assert!(max_abs(&r) <= 1e-12 * max_abs(f.data()), "{:e}", max_abs(&r));
}

#[test]
fn vcycle_contraction() {
    let mut p = GmgParams::new(1, 16);
    p.levels = Some(3);
    let h = MgHierarchy::new(p).unwrap();
    let m = h.finest();
    let ustar = random_field(m, 11, true);
    let f = m.apply_operator(&ustar).unwrap();
    let mut u = NodalField::zeros(m);
    let err = |u: &NodalField| {
        let mut d: Vec<f64> = u.data().iter().zip(ustar.data()).map(|(a, b)| a - b).collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        d.iter_mut().for_each(|x| *x -= mean);
        d.iter().map(|x| x * x).sum::<f64>().sqrt()
    };
    let mut last = err(&u);
    for cycle in 0..5 {
        u = h.vcycle(&f, &u).unwrap();
        let now = err(&u);
        assert!(now <= 0.5 * last, "cycle {cycle}: factor {}", now / last);
        last = now;
    }
}

#[test]
fn pcg_recovers_manufactured_vector() {
    let mut p = GmgParams::new(2, 8);
    p.rel_tol = 1e-12;
    let h = MgHierarchy::new(p).unwrap();
    let m = h.finest();
    let ustar = random_field(m, 12, true);
    let f = m.apply_operator(&ustar).unwrap();
    let out = h.pcg_solve(&f).unwrap();
    let err: f64 = out.solution.data().iter().zip(ustar.data()).fold(0.0, |a, (x, y)| a.max((x - y).abs()));
    assert!(err < 1e-10, "{err:e}");
    assert!(out.true_residual < 1e-11);
    assert_eq!(out.history.len(), out.iterations + 1);
}

#[test]
fn pcg_removes_mean_and_reports_failure() {
    let h = MgHierarchy::new(GmgParams::new(1, 4)).unwrap();
    let m = h.finest();
    let mut f = random_field(m, 13, true);
    f.data_mut().iter_mut().for_each(|v| *v += 2.0);
    let out = h.pcg_solve(&f).unwrap();
    assert!((out.removed_mean - 2.0).abs() < 1e-12);
    assert!(out.solution.data().iter().sum::<f64>().abs() < 1e-10);

    let mut p = GmgParams::new(1, 8);
    p.max_iter = 1;
    let h = MgHierarchy::new(p).unwrap();
    let f = random_field(h.finest(), 14, true);
    match h.pcg_solve(&f) {
        Err(ArenaError::Convergence { history, iterations, .. }) => {
            assert_eq!(iterations, 1);
            assert_eq!(history.len(), 2);
        }
        other => panic!("expected a convergence failure, got {:?}", other.map(|o| o.iterations)),
    }
}

#[test]
fn pcg_iteration_counts() {
    let solve = |q: usize, e: usize| {
        let h = MgHierarchy::new(GmgParams::new(q, e)).unwrap();
        let m = h.finest();
        let f = random_field(m, 15, true);
        let out = h.pcg_solve(&f).unwrap();
        assert!(out.history.windows(2).filter(|w| w[1] > w[0]).count() <= out.iterations / 4, "{:?}", out.history);
        out.iterations
    };
    let i16 = solve(1, 16);
    let i32 = solve(1, 32);
    assert!(i16.abs_diff(i32) <= 3, "q=1: {i16} vs {i32}");
    let i4 = solve(4, 16);
    assert!(i4 <= 20, "q=4, e=16 took {i4}");
}

#[test]
fn discretization_converges_at_high_order() {
    let tc = TestCase::oscillatory(1).unwrap();
    for (q, es) in [(1, [8, 16, 32]), (2, [4, 8, 16]), (4, [2, 4, 8])] {
        let errs: Vec<f64> = es
            .iter()
            .map(|&e| {
                let h = MgHierarchy::new(GmgParams::new(q, e)).unwrap();
                let sol = gmg_solve(&h, |x| tc.f(x)).unwrap();
                let pts = sol.mesh.node_points();
                let num: Vec<f64> = sol.u.data().to_vec();
                let ex: Vec<f64> = pts.iter().map(|p| tc.u(p)).collect();
                arena_core::problems::linf_rel_error_values(&num, &ex).unwrap().linf_rel
            })
            .collect();
        let bound = 2f64.powf(q as f64 + 0.5);
        for w in errs.windows(2) {
            assert!(w[0] / w[1] >= bound, "q={q}: errors {errs:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operator_is_symmetric(q in 1usize..4, seed in any::<u64>()) {
        let m = MeshLevel::new(2, q).unwrap();
        let u = random_field(&m, seed, false);
        let v = random_field(&m, seed ^ 0x55, false);
        let a = m.apply_operator(&u).unwrap().dot(&v);
        let b = m.apply_operator(&v).unwrap().dot(&u);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn interpolation_is_consistent_at_nodes(q in 1usize..5, seed in any::<u64>()) {
        let m = MeshLevel::new(2, q).unwrap();
        let u = random_field(&m, seed, false);
        let idx = (seed % m.len() as u64) as usize;
        let v = m.eval(&u, &m.node_point(idx)).unwrap();
        prop_assert!((v - u.data()[idx]).abs() < 1e-12);
    }
}
