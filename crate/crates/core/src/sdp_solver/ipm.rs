//! Homogeneous self-dual interior-point iteration.
//!
//! The model `max cᵀx s.t. A_0 + Σ x_j A_j ⪰ 0` is handled in the conic
//! form `min qᵀx s.t. Gx + s = h, s ⪰ 0` with `q = -c`, `Gx = -Σ x_j A_j`
//! and `h = A_0`. The embedding
//!
//! ```text
//! 0 = Gᵀz + qτ,   s = -Gx + hτ,   κ = -qᵀx - hᵀz,   s, z ⪰ 0,  τ, κ ≥ 0
//! ```
//!
//! is followed with Nesterov–Todd scaling and Mehrotra predictor-corrector
//! steps. With only a handful of variables every Newton system collapses
//! to a dense `m × m` Schur complement.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};

use super::{SolveStatus, SolverSettings};

/// One positive semidefinite cone of the scaled problem.
pub(super) struct Cone {
    pub dim: usize,
    /// `A_0` first, then one coefficient matrix per variable.
    pub mats: Vec<DMatrix<f64>>,
}

pub(super) struct ConeProgram {
    pub num_vars: usize,
    pub cones: Vec<Cone>,
    /// Objective to maximize (already scaled).
    pub c: DVector<f64>,
}

pub(super) struct RawSolution {
    pub x: DVector<f64>,
    pub z: Vec<DMatrix<f64>>,
    pub status: SolveStatus,
    pub iterations: usize,
}

/// Nesterov–Todd scaling of one cone: `s = R Λ Rᵀ`, `z = R⁻ᵀ Λ R⁻¹`.
struct Scaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    lambda: DVector<f64>,
}

impl Scaling {
    fn identity(dim: usize) -> Self {
        Self {
            r: DMatrix::identity(dim, dim),
            rinv: DMatrix::identity(dim, dim),
            lambda: DVector::from_element(dim, 1.0),
        }
    }

    fn s(&self) -> DMatrix<f64> {
        &self.r * DMatrix::from_diagonal(&self.lambda) * self.r.transpose()
    }

    fn z(&self) -> DMatrix<f64> {
        self.rinv.transpose() * DMatrix::from_diagonal(&self.lambda) * &self.rinv
    }

    /// `W⁻ᵀ(Y) = R⁻¹ Y R⁻ᵀ`, which also equals `W(Y)` composed back from z-space.
    fn to_scaled(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        symmetric(&(&self.rinv * y * self.rinv.transpose()))
    }

    /// Moves to `s = R(Λ + α ds̃)Rᵀ`, `z = R⁻ᵀ(Λ + α dz̃)R⁻¹` and refactors.
    fn update(&mut self, ds: &DMatrix<f64>, dz: &DMatrix<f64>, alpha: f64) -> bool {
        let lam = DMatrix::from_diagonal(&self.lambda);
        let s_new = symmetric(&(&lam + ds * alpha));
        let z_new = symmetric(&(&lam + dz * alpha));
        let (Some(l1), Some(l2)) = (Cholesky::new(s_new), Cholesky::new(z_new)) else {
            return false;
        };
        let (l1, l2) = (l1.l(), l2.l());
        let svd = SVD::new(l2.transpose() * &l1, true, true);
        let (Some(u), Some(vt)) = (svd.u, svd.v_t) else {
            return false;
        };
        let sv = svd.singular_values;
        if sv.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return false;
        }
        let inv_sqrt = DMatrix::from_diagonal(&sv.map(|v| 1.0 / v.sqrt()));
        self.r = &self.r * &l1 * vt.transpose() * &inv_sqrt;
        self.rinv = &inv_sqrt * u.transpose() * l2.transpose() * &self.rinv;
        if let Some(inv) = self.r.clone().try_inverse() {
            self.rinv = inv;
        }
        self.lambda = sv;
        true
    }
}

fn symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// `X ∘ Y = (XY + YX)/2`.
fn jordan(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    (x * y + y * x) * 0.5
}

/// Solves `Λ ∘ Y = D` for diagonal `Λ`.
fn jordan_div(lambda: &DVector<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
        2.0 * d[(i, j)] / (lambda[i] + lambda[j])
    })
}

/// Largest `α` keeping `Λ + α D ⪰ 0` (infinite when `D ⪰ 0`).
fn max_step(lambda: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let n = lambda.len();
    let scaled = DMatrix::from_fn(n, n, |i, j| d[(i, j)] / (lambda[i] * lambda[j]).sqrt());
    let min = if n == 1 {
        scaled[(0, 0)]
    } else {
        SymmetricEigen::new(symmetric(&scaled))
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    };
    if min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / min
    }
}

fn scalar_step(v: f64, dv: f64) -> f64 {
    if dv >= 0.0 {
        f64::INFINITY
    } else {
        -v / dv
    }
}

struct Direction {
    dx: DVector<f64>,
    dtau: f64,
    dkappa: f64,
    /// `W Δz` per cone.
    dz: Vec<DMatrix<f64>>,
    /// `W⁻ᵀ Δs` per cone.
    ds: Vec<DMatrix<f64>>,
}

struct Workspace<'a> {
    prog: &'a ConeProgram,
    q: DVector<f64>,
    scalings: Vec<Scaling>,
    /// `R⁻¹ A_j R⁻ᵀ`, indexed `[cone][j]` with `j = 0` the constant term.
    scaled: Vec<Vec<DMatrix<f64>>>,
    schur: Option<Cholesky<f64, nalgebra::Dyn>>,
}

impl<'a> Workspace<'a> {
    fn refresh(&mut self) -> bool {
        let m = self.prog.num_vars;
        self.scaled = self
            .prog
            .cones
            .iter()
            .zip(&self.scalings)
            .map(|(cone, w)| cone.mats.iter().map(|a| w.to_scaled(a)).collect())
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for bs in &self.scaled {
            for i in 0..m {
                for j in i..m {
                    let v = inner(&bs[i + 1], &bs[j + 1]);
                    schur[(i, j)] += v;
                    if i != j {
                        schur[(j, i)] += v;
                    }
                }
            }
        }
        let scale = schur.diagonal().iter().fold(0.0f64, |a: f64, v: &f64| a.max(v.abs())).max(1e-300);
        let mut reg = 0.0;
        for _ in 0..8 {
            let mut mat = schur.clone();
            for i in 0..m {
                mat[(i, i)] += reg;
            }
            if let Some(ch) = Cholesky::new(mat) {
                self.schur = Some(ch);
                return true;
            }
            reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
        }
        false
    }

    /// Solves `Gᵀv = a`, `Gu - W^TW v = b` with `b̂ = R⁻¹ b R⁻ᵀ` given;
    /// returns `u` and `W v`.
    fn reduced_solve(&self, a: &DVector<f64>, bhat: &[DMatrix<f64>]) -> (DVector<f64>, Vec<DMatrix<f64>>) {
        let m = self.prog.num_vars;
        let mut rhs = a.clone();
        for (bs, b) in self.scaled.iter().zip(bhat) {
            for j in 0..m {
                rhs[j] -= inner(&bs[j + 1], b);
            }
        }
        let schur = self.schur.as_ref().expect("refreshed");
        let mut u = schur.solve(&rhs);
        let mut wz: Vec<DMatrix<f64>> = self
            .scaled
            .iter()
            .zip(bhat)
            .map(|(bs, b)| {
                let mut acc = -b.clone();
                for j in 0..m {
                    acc -= &bs[j + 1] * u[j];
                }
                acc
            })
            .collect();
        // iterative refinement of Gᵀv = a
        for _ in 0..REFINE_STEPS {
            let mut res = a.clone();
            for (bs, z) in self.scaled.iter().zip(&wz) {
                for j in 0..m {
                    res[j] += inner(&bs[j + 1], z);
                }
            }
            let du = schur.solve(&res);
            u += &du;
            for (bs, z) in self.scaled.iter().zip(wz.iter_mut()) {
                for j in 0..m {
                    *z -= &bs[j + 1] * du[j];
                }
            }
        }
        (u, wz)
    }

    fn h_dot(&self, wz: &[DMatrix<f64>]) -> f64 {
        self.scaled.iter().zip(wz).map(|(bs, z)| inner(&bs[0], z)).sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        dx: &DVector<f64>,
        dz: &[DMatrix<f64>],
        ds: &[DMatrix<f64>],
        dtau: f64,
        dkappa: f64,
        tau: f64,
        kappa: f64,
    ) -> Direction {
        let lam_div: Vec<DMatrix<f64>> = self
            .scalings
            .iter()
            .zip(ds)
            .map(|(w, d)| jordan_div(&w.lambda, d))
            .collect();
        let bhat: Vec<DMatrix<f64>> = self
            .scalings
            .iter()
            .zip(dz)
            .zip(&lam_div)
            .map(|((w, d), l)| w.to_scaled(d) - l)
            .collect();
        let (u0, wz0) = self.reduced_solve(dx, &bhat);
        let hhat: Vec<DMatrix<f64>> = self.scaled.iter().map(|bs| bs[0].clone()).collect();
        let (u1, wz1) = self.reduced_solve(&(-&self.q), &hhat);
        let num = dtau - dkappa / tau - self.q.dot(&u0) - self.h_dot(&wz0);
        let den = self.q.dot(&u1) + self.h_dot(&wz1) - kappa / tau;
        let step_tau = num / den;
        let dx = u0 + u1 * step_tau;
        let dz: Vec<DMatrix<f64>> = wz0
            .into_iter()
            .zip(wz1)
            .map(|(a, b)| symmetric(&(a + b * step_tau)))
            .collect();
        let ds = lam_div
            .into_iter()
            .zip(&dz)
            .map(|(l, z)| symmetric(&(l - z)))
            .collect();
        Direction {
            dx,
            dtau: step_tau,
            dkappa: (dkappa - kappa * step_tau) / tau,
            dz,
            ds,
        }
    }

    fn max_alpha(&self, d: &Direction, tau: f64, kappa: f64) -> f64 {
        let mut alpha = scalar_step(tau, d.dtau).min(scalar_step(kappa, d.dkappa));
        for ((w, ds), dz) in self.scalings.iter().zip(&d.ds).zip(&d.dz) {
            alpha = alpha.min(max_step(&w.lambda, ds)).min(max_step(&w.lambda, dz));
        }
        alpha
    }
}

fn frob(ms: &[DMatrix<f64>]) -> f64 {
    ms.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
}

const REFINE_STEPS: usize = 2;

/// Iterations without improving the best iterate before giving up.
const STALL_ITERS: usize = 12;

const POLISH_ITERS: usize = 3;
const POLISHED: f64 = 1e-3;

pub(super) fn run(prog: &ConeProgram, settings: &SolverSettings) -> RawSolution {
    let m = prog.num_vars;
    let q = -&prog.c;
    let nu: usize = prog.cones.iter().map(|c| c.dim).sum();
    let hnorm = prog.cones.iter().map(|c| c.mats[0].norm_squared()).sum::<f64>().sqrt();
    let resx0 = q.norm().max(1.0);
    let resz0 = hnorm.max(1.0);

    let mut ws = Workspace {
        prog,
        q: q.clone(),
        scalings: prog.cones.iter().map(|c| Scaling::identity(c.dim)).collect(),
        scaled: Vec::new(),
        schur: None,
    };
    let mut x = DVector::zeros(m);
    let mut tau = 1.0;
    let mut kappa = 1.0;
    let mut status = SolveStatus::MaxIterReached;
    let mut iterations = 0;
    // Least-violating iterate so far, returned when the method stalls.
    let mut best: Option<(f64, usize, DVector<f64>, Vec<DMatrix<f64>>)> = None;

    for iter in 0..=settings.max_iter {
        iterations = iter;
        let s: Vec<DMatrix<f64>> = ws.scalings.iter().map(Scaling::s).collect();
        let z: Vec<DMatrix<f64>> = ws.scalings.iter().map(Scaling::z).collect();

        // G^T z = -(<A_j, Z>)_j
        let mut gtz = DVector::zeros(m);
        for (cone, zc) in prog.cones.iter().zip(&z) {
            for j in 0..m {
                gtz[j] -= inner(&cone.mats[j + 1], zc);
            }
        }
        let hz: f64 = prog.cones.iter().zip(&z).map(|(c, zc)| inner(&c.mats[0], zc)).sum();
        let qx = q.dot(&x);
        let gx: Vec<DMatrix<f64>> = prog
            .cones
            .iter()
            .map(|c| {
                let mut acc = DMatrix::zeros(c.dim, c.dim);
                for j in 0..m {
                    acc -= &c.mats[j + 1] * x[j];
                }
                acc
            })
            .collect();
        let rx = &gtz + &q * tau;
        let rz: Vec<DMatrix<f64>> = prog
            .cones
            .iter()
            .zip(&s)
            .zip(&gx)
            .map(|((c, sc), g)| sc + g - &c.mats[0] * tau)
            .collect();
        let rt = kappa + qx + hz;
        let sz: f64 = ws.scalings.iter().map(|w| w.lambda.norm_squared()).sum();
        let mu = (sz + tau * kappa) / (nu as f64 + 1.0);

        let pres = frob(&rz) / tau / resz0;
        let dres = rx.norm() / tau / resx0;
        let pobj = -qx / tau;
        let dobj = hz / tau;
        let gap = (dobj - pobj).abs();
        let merit = (pres / settings.feas_tol)
            .max(dres / settings.feas_tol)
            .max(gap / (settings.gap_tol * (1.0 + pobj.abs())));
        if merit.is_finite() && best.as_ref().is_none_or(|b| merit < b.0) {
            let zs = ws.scalings.iter().map(|w| w.z() / tau).collect();
            best = Some((merit, iter, &x / tau, zs));
        }
        if let Some(b) = &best {
            // Once within tolerance, keep polishing while the merit improves.
            if b.0 <= 1.0 && (b.0 <= POLISHED || iter >= b.1 + POLISH_ITERS) {
                status = SolveStatus::Optimal;
                break;
            }
            if iter >= b.1 + STALL_ITERS {
                break;
            }
        }
        // infeasibility certificates
        if hz < 0.0 {
            let pinf = gtz.norm() / resx0 / (-hz);
            if pinf <= settings.feas_tol {
                status = SolveStatus::Infeasible;
                break;
            }
        }
        if qx < 0.0 {
            let mut r = 0.0;
            for (sc, g) in s.iter().zip(&gx) {
                r += (sc + g).norm_squared();
            }
            let dinf = r.sqrt() / resz0 / (-qx);
            if dinf <= settings.feas_tol {
                status = SolveStatus::Unbounded;
                break;
            }
        }
        if iter == settings.max_iter || !ws.refresh() {
            break;
        }

        // predictor
        let lam_sq: Vec<DMatrix<f64>> = ws
            .scalings
            .iter()
            .map(|w| DMatrix::from_diagonal(&w.lambda.map(|l| -l * l)))
            .collect();
        let neg_rz: Vec<DMatrix<f64>> = rz.iter().map(|r| -r).collect();
        let aff = ws.direction(&(-&rx), &neg_rz, &lam_sq, -rt, -tau * kappa, tau, kappa);
        let alpha_aff = ws.max_alpha(&aff, tau, kappa).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // corrector
        let eta = 1.0 - sigma;
        let ds_comb: Vec<DMatrix<f64>> = ws
            .scalings
            .iter()
            .zip(&aff.ds)
            .zip(&aff.dz)
            .map(|((w, ds), dz)| {
                let mut d = DMatrix::from_diagonal(&w.lambda.map(|l| -l * l));
                d -= jordan(ds, dz);
                for i in 0..w.lambda.len() {
                    d[(i, i)] += sigma * mu;
                }
                d
            })
            .collect();
        let dz_comb: Vec<DMatrix<f64>> = rz.iter().map(|r| r * (-eta)).collect();
        let dkappa = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
        let dir = ws.direction(&(&rx * (-eta)), &dz_comb, &ds_comb, -eta * rt, dkappa, tau, kappa);
        let alpha = (settings.step_fraction * ws.max_alpha(&dir, tau, kappa)).min(1.0);
        if !(alpha > 1e-14) {
            break;
        }

        x += &dir.dx * alpha;
        tau += alpha * dir.dtau;
        kappa += alpha * dir.dkappa;
        let mut ok = true;
        for ((w, ds), dz) in ws.scalings.iter_mut().zip(&dir.ds).zip(&dir.dz) {
            ok &= w.update(ds, dz, alpha);
        }
        if !ok || !(tau > 0.0) || !(kappa > 0.0) {
            break;
        }
    }

    let (x, z) = match (status, best) {
        (SolveStatus::Unbounded | SolveStatus::Infeasible, _) | (_, None) => {
            let z = ws.scalings.iter().map(|w| w.z() / tau).collect();
            let x = if status == SolveStatus::Unbounded { x } else { x / tau };
            (x, z)
        }
        (_, Some((_, _, x, z))) => (x, z),
    };
    RawSolution {
        x,
        z,
        status,
        iterations,
    }
}
