//! Multigrid hierarchy, damped Jacobi, V-cycle and V-cycle preconditioned CG.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::mesh::{dot, MeshLevel, NodalField, Transfer};
use crate::error::{invalid, ArenaError, Result};
use crate::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct GmgParams {
    pub q: usize,
    pub e_fine: usize,
    /// Number of coarsening steps; `None` picks the coarsest mesh
    /// automatically (e = 2 when it fits under `coarse_max`, else e = 1).
    pub levels: Option<usize>,
    pub nu_pre: usize,
    pub nu_post: usize,
    pub omega: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Largest coarse unknown count accepted for the dense factorization.
    pub coarse_max: usize,
}

impl GmgParams {
    pub fn new(q: usize, e_fine: usize) -> Self {
        GmgParams {
            q,
            e_fine,
            levels: None,
            nu_pre: 2,
            nu_post: 1,
            omega: 2.0 / 3.0,
            rel_tol: 1e-13,
            max_iter: 200,
            coarse_max: 8192,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return invalid(format!("Jacobi weight must lie in (0, 2), got {}", self.omega));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return invalid(format!("rel_tol must lie in (0, 1), got {}", self.rel_tol));
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be positive");
        }
        if self.e_fine == 0 || !self.e_fine.is_power_of_two() {
            return invalid(format!("e_fine must be a power of two, got {}", self.e_fine));
        }
        Ok(())
    }

    fn coarse_e(&self) -> Result<usize> {
        let depth = self.e_fine.trailing_zeros() as usize;
        match self.levels {
            Some(l) if l > depth => Err(ArenaError::Config(format!(
                "{l} coarsenings of e_fine={} leave less than one element",
                self.e_fine
            ))),
            Some(l) => Ok(self.e_fine >> l),
            None => {
                let fits = |e: usize| (e * self.q).pow(3) <= self.coarse_max;
                Ok(if self.e_fine >= 2 && fits(2) { 2 } else { 1 })
            }
        }
    }
}

pub struct MgHierarchy {
    pub params: GmgParams,
    /// Level 0 is the coarsest.
    pub levels: Vec<MeshLevel>,
    inv_diag: Vec<Vec<f64>>,
    /// `transfers[k]` maps level k to level k+1.
    transfers: Vec<Transfer>,
    coarse: Cholesky<f64, Dyn>,
    pub setup_seconds: f64,
}

fn remove_mean(v: &mut [f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
    m
}

impl MgHierarchy {
    pub fn new(params: GmgParams) -> Result<Self> {
        params.validate()?;
        let start = Instant::now();
        let ec = params.coarse_e()?;
        let n0 = (ec * params.q).pow(3);
        if n0 > params.coarse_max {
            return Err(ArenaError::Config(format!(
                "coarse mesh has {n0} unknowns, more than coarse_max = {}",
                params.coarse_max
            )));
        }
        let mut levels = Vec::new();
        let mut e = ec;
        while e <= params.e_fine {
            levels.push(MeshLevel::new(e, params.q)?);
            e *= 2;
        }
        let inv_diag = levels
            .iter()
            .map(|l| {
                let d = l.diagonal();
                if d.data().iter().any(|v| !(*v > 0.0)) {
                    return Err(ArenaError::Setup(format!("non-positive diagonal on mesh e={}", l.e)));
                }
                Ok(d.data().iter().map(|v| 1.0 / v).collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        let transfers = levels.windows(2).map(|w| Transfer::new(&w[0], &w[1])).collect::<Result<Vec<_>>>()?;
        let coarse = factor_coarse(&levels[0])?;
        Ok(MgHierarchy { params, levels, inv_diag, transfers, coarse, setup_seconds: start.elapsed().as_secs_f64() })
    }

    pub fn finest(&self) -> &MeshLevel {
        self.levels.last().expect("hierarchy has a level")
    }

    pub fn unknowns(&self) -> usize {
        self.finest().len()
    }

    pub fn inv_diagonal(&self, k: usize) -> &[f64] {
        &self.inv_diag[k]
    }

    /// `u ← u + ω D⁻¹ (f - A u)`, `steps` times, on level `k`.
    pub fn jacobi_smooth(&self, k: usize, u: &mut NodalField, f: &NodalField, steps: usize) -> Result<()> {
        let lvl = self.level(k)?;
        if u.tag() != (lvl.e, lvl.q) || f.tag() != (lvl.e, lvl.q) {
            return invalid("fields do not live on the smoothing level");
        }
        let mut au = vec![0.0; lvl.len()];
        self.smooth_raw(k, u.data_mut(), f.data(), steps, &mut au);
        Ok(())
    }

    fn level(&self, k: usize) -> Result<&MeshLevel> {
        self.levels.get(k).ok_or_else(|| ArenaError::InvalidArgument(format!("no level {k}")))
    }

    fn smooth_raw(&self, k: usize, u: &mut [f64], f: &[f64], steps: usize, au: &mut [f64]) {
        let w = self.params.omega;
        for _ in 0..steps {
            self.levels[k].apply_raw(u, au);
            for ((ui, (fi, ai)), di) in u.iter_mut().zip(f.iter().zip(au.iter())).zip(&self.inv_diag[k]) {
                *ui += w * di * (fi - ai);
            }
        }
    }

    fn coarse_solve(&self, f: &[f64]) -> Vec<f64> {
        let mut b = DVector::from_column_slice(f);
        self.coarse.solve_mut(&mut b);
        b.as_slice().to_vec()
    }

    fn vcycle_raw(&self, k: usize, f: &[f64], u: &mut [f64]) {
        if k == 0 {
            u.copy_from_slice(&self.coarse_solve(f));
            return;
        }
        let mut au = vec![0.0; f.len()];
        self.smooth_raw(k, u, f, self.params.nu_pre, &mut au);
        self.levels[k].apply_raw(u, &mut au);
        let r: Vec<f64> = f.iter().zip(&au).map(|(a, b)| a - b).collect();
        let t = &self.transfers[k - 1];
        let rc = t.restrict_raw(&r);
        let mut ec = vec![0.0; rc.len()];
        self.vcycle_raw(k - 1, &rc, &mut ec);
        for (ui, ei) in u.iter_mut().zip(t.prolong_raw(&ec)) {
            *ui += ei;
        }
        self.smooth_raw(k, u, f, self.params.nu_post, &mut au);
    }

    /// One V-cycle on the finest level starting from `u`.
    pub fn vcycle(&self, f: &NodalField, u: &NodalField) -> Result<NodalField> {
        let top = self.finest();
        if f.tag() != (top.e, top.q) || u.tag() != (top.e, top.q) {
            return invalid("V-cycle fields must live on the finest level");
        }
        let mut out = u.clone();
        self.vcycle_raw(self.levels.len() - 1, f.data(), out.data_mut());
        Ok(out)
    }

    /// Flexible CG preconditioned by one V-cycle from zero. The mean of `f`
    /// is removed first; the returned solution has zero nodal mean.
    pub fn pcg_solve(&self, f: &NodalField) -> Result<PcgOutcome> {
        let top = self.finest();
        if f.tag() != (top.e, top.q) {
            return invalid("right-hand side must live on the finest level");
        }
        let start = Instant::now();
        let k = self.levels.len() - 1;
        let mut b = f.data().to_vec();
        let removed_mean = remove_mean(&mut b);
        let bnorm = dot(&b, &b).sqrt();
        let nn = b.len();
        let mut x = vec![0.0; nn];
        let mut history = vec![1.0];
        if bnorm == 0.0 {
            return Ok(PcgOutcome {
                solution: NodalField::new(top, x)?,
                iterations: 0,
                history: vec![0.0],
                removed_mean,
                true_residual: 0.0,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
        let precond = |r: &[f64]| {
            let mut z = vec![0.0; nn];
            self.vcycle_raw(k, r, &mut z);
            remove_mean(&mut z);
            z
        };
        let mut r = b.clone();
        let mut z = precond(&r);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; nn];
        for it in 1..=self.params.max_iter {
            top.apply_raw(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(ArenaError::Convergence { iterations: it, residual: *history.last().unwrap(), history });
            }
            let alpha = rz / pap;
            for i in 0..nn {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rel = dot(&r, &r).sqrt() / bnorm;
            history.push(rel);
            if !rel.is_finite() {
                return Err(ArenaError::Convergence { iterations: it, residual: rel, history });
            }
            if rel <= self.params.rel_tol {
                remove_mean(&mut x);
                top.apply_raw(&x, &mut ap);
                let true_res = b.iter().zip(&ap).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() / bnorm;
                return Ok(PcgOutcome {
                    solution: NodalField::new(top, x)?,
                    iterations: it,
                    history,
                    removed_mean,
                    true_residual: true_res,
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
            let z_new = precond(&r);
            let rz_new = dot(&r, &z_new);
            if !(rz_new > 0.0) {
                // preconditioner lost definiteness here: restart along r
                log::warn!("CG restart at iteration {it}: r·z = {rz_new:e}");
                p.copy_from_slice(&r);
                z = r.clone();
                rz = dot(&r, &r);
                continue;
            }
            // Polak-Ribière: tolerates the slightly nonsymmetric V-cycle
            let beta = (rz_new - dot(&r, &z)) / rz;
            let beta = beta.max(0.0);
            for i in 0..nn {
                p[i] = z_new[i] + beta * p[i];
            }
            z = z_new;
            rz = rz_new;
        }
        let residual = *history.last().unwrap();
        Err(ArenaError::Convergence { iterations: self.params.max_iter, residual, history })
    }
}

/// Dense `A₀ + (1/N₀) 1 1ᵀ`, built column by column from the matrix-free
/// operator, then Cholesky-factored.
fn factor_coarse(level: &MeshLevel) -> Result<Cholesky<f64, Dyn>> {
    let n0 = level.len();
    let mut a = DMatrix::zeros(n0, n0);
    let mut e = vec![0.0; n0];
    let mut col = vec![0.0; n0];
    for j in 0..n0 {
        e[j] = 1.0;
        level.apply_raw(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n0 {
            a[(i, j)] = col[i] + 1.0 / n0 as f64;
        }
    }
    let sym = (&a + a.transpose()) * 0.5;
    Cholesky::new(sym).ok_or_else(|| ArenaError::Setup(format!("coarse operator with {n0} unknowns is not positive definite")))
}

#[derive(Clone, Debug)]
pub struct PcgOutcome {
    pub solution: NodalField,
    pub iterations: usize,
    /// Relative residual `‖r‖₂/‖b‖₂` per iteration, starting with 1.
    pub history: Vec<f64>,
    /// Mean subtracted from the right-hand side before solving.
    pub removed_mean: f64,
    /// `‖b - A x‖₂/‖b‖₂` recomputed from the returned solution.
    pub true_residual: f64,
    pub seconds: f64,
}

/// Residual history as `iteration,relative_residual` CSV.
pub fn history_csv(history: &[f64]) -> String {
    let mut s = String::from("iteration,relative_residual\n");
    for (i, r) in history.iter().enumerate() {
        s.push_str(&format!("{i},{r:.6e}\n"));
    }
    s
}

/// Finite-element solution of `-Δu = f` on the finest mesh of a hierarchy.
pub struct GmgSolution {
    pub mesh: MeshLevel,
    pub u: NodalField,
    pub outcome: PcgOutcome,
}

impl GmgSolution {
    pub fn eval(&self, x: &Point) -> Result<f64> {
        self.mesh.eval(&self.u, x)
    }
}

/// Assembles the load vector of `f` and solves with V-cycle PCG.
pub fn gmg_solve(h: &MgHierarchy, f: impl Fn(&Point) -> f64) -> Result<GmgSolution> {
    let mesh = h.finest().clone();
    let b = mesh.load_vector(f)?;
    let outcome = h.pcg_solve(&b)?;
    Ok(GmgSolution { mesh, u: outcome.solution.clone(), outcome })
}
