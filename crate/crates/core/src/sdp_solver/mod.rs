//! Dense interior-point solver for small block-diagonal LMI problems.
//!
//! [`solve`] runs a homogeneous self-dual primal-dual method (see
//! [`ipm`](self)) on an equilibrated copy of the problem; [`check_solution`]
//! recomputes every residual from the exact model.

mod ipm;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{from_f64, psd_check, to_f64, Rational, SymMatrixExact, SymMatrixFloat};
use crate::sdp_model::{BlockKind, LinearMatrixProblem};

use ipm::{Cone, ConeProgram};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tol: 1e-8,
            feas_tol: 1e-9,
            max_iter: 200,
            step_fraction: 0.98,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) || !(self.feas_tol > 0.0) {
            return Err(Error::InvalidArgument("solver tolerances must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::InvalidArgument("step_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    MaxIterReached,
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::MaxIterReached => "max_iter_reached",
            Self::Infeasible => "infeasible",
            Self::Unbounded => "unbounded",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpSolution {
    pub x: Vec<f64>,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Dual matrix per block, in the original (unscaled) coordinates.
    pub dual: Vec<SymMatrixFloat>,
}

/// Float copy of the problem with row/column equilibration applied.
struct Scaled {
    prog: ConeProgram,
    /// Variable scale: `x = var_scale ∘ y`.
    var_scale: Vec<f64>,
    /// Congruence scale per cone: the scaled matrices are `D A D`.
    row_scale: Vec<DVector<f64>>,
    /// `(block, row)` for 1×1 cones split off diagonal blocks, `(block, usize::MAX)` otherwise.
    origin: Vec<(usize, usize)>,
}

fn to_dense(m: &SymMatrixExact) -> DMatrix<f64> {
    m.to_float().into_matrix()
}

fn equilibrate(prob: &LinearMatrixProblem, magnitude: Option<&[f64]>) -> Scaled {
    let m = prob.num_vars;
    let mut cones = Vec::new();
    let mut origin = Vec::new();
    for (b, block) in prob.blocks.iter().enumerate() {
        let mats: Vec<DMatrix<f64>> = block.mats.iter().map(to_dense).collect();
        match block.kind {
            BlockKind::DensePsd => {
                cones.push(Cone { dim: block.dim, mats });
                origin.push((b, usize::MAX));
            }
            BlockKind::Diagonal => {
                for i in 0..block.dim {
                    let row = mats.iter().map(|a| DMatrix::from_element(1, 1, a[(i, i)])).collect();
                    cones.push(Cone { dim: 1, mats: row });
                    origin.push((b, i));
                }
            }
        }
    }

    let mut var_scale = magnitude.map_or_else(|| vec![1.0; m], <[f64]>::to_vec);
    for cone in cones.iter_mut() {
        for j in 0..m {
            cone.mats[j + 1] *= var_scale[j];
        }
    }
    let mut row_scale: Vec<DVector<f64>> =
        cones.iter().map(|c| DVector::from_element(c.dim, 1.0)).collect();
    for _ in 0..25 {
        let mut col_max = vec![0.0f64; if magnitude.is_some() { 0 } else { m }];
        for cone in &cones {
            for j in 0..col_max.len() {
                col_max[j] = col_max[j].max(cone.mats[j + 1].amax());
            }
        }
        for j in 0..col_max.len() {
            if col_max[j] > 0.0 {
                let f = 1.0 / col_max[j].sqrt();
                var_scale[j] *= f;
                for cone in cones.iter_mut() {
                    cone.mats[j + 1] *= f;
                }
            }
        }
        for (cone, d) in cones.iter_mut().zip(row_scale.iter_mut()) {
            let mut fac = DVector::from_element(cone.dim, 1.0);
            for i in 0..cone.dim {
                let r = cone.mats.iter().map(|a| a.row(i).amax()).fold(0.0, f64::max);
                if r > 0.0 {
                    fac[i] = 1.0 / r.sqrt();
                }
            }
            for a in cone.mats.iter_mut() {
                for i in 0..cone.dim {
                    for k in 0..cone.dim {
                        a[(i, k)] *= fac[i] * fac[k];
                    }
                }
            }
            d.component_mul_assign(&fac);
        }
    }

    let c = DVector::from_iterator(
        m,
        prob.objective_coeffs.iter().zip(&var_scale).map(|(c, s)| to_f64(c) * s),
    );
    Scaled {
        prog: ConeProgram { num_vars: m, cones, c },
        var_scale,
        row_scale,
        origin,
    }
}

/// Re-solves with variables rescaled by the best iterate's magnitudes.
const RESCALE_PASSES: usize = 3;

/// Maximizes the problem's objective subject to all block constraints.
pub fn solve(prob: &LinearMatrixProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    prob.validate()?;
    settings.validate()?;
    if prob.blocks.is_empty() {
        return Err(Error::MalformedProblem("problem has no blocks".into()));
    }
    let blocks: Vec<Vec<DMatrix<f64>>> =
        prob.blocks.iter().map(|b| b.mats.iter().map(to_dense).collect()).collect();
    let scaled = equilibrate(prob, None);
    let mut sol = finish(prob, settings, &blocks, &scaled, ipm::run(&scaled.prog, settings));
    // The first pass only finds the magnitudes of x; a pass scaled by them is
    // far better conditioned and is preferred whenever it converges.
    for _ in 0..RESCALE_PASSES {
        if !matches!(sol.status, SolveStatus::Optimal | SolveStatus::MaxIterReached) {
            break;
        }
        let top = sol.x.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !(top.is_finite() && top > 0.0) {
            break;
        }
        let hint: Vec<f64> = sol.x.iter().map(|v| v.abs().max(1e-6 * top)).collect();
        let scaled = equilibrate(prob, Some(&hint));
        let next = finish(prob, settings, &blocks, &scaled, ipm::run(&scaled.prog, settings));
        let done = next.status == SolveStatus::Optimal;
        if done || sol.status != SolveStatus::Optimal {
            sol = next;
        }
        if done {
            break;
        }
    }
    Ok(sol)
}

/// Smallest eigenvalue over all blocks of `A_0 + Σ x_j A_j`, each relative
/// to `max(1, ‖A_0‖ + Σ |x_j| ‖A_j‖)`.
fn relative_margin(blocks: &[Vec<DMatrix<f64>>], x: &[f64]) -> f64 {
    blocks
        .iter()
        .map(|mats| {
            let mut f = mats[0].clone();
            let mut size = mats[0].norm();
            for (a, v) in mats[1..].iter().zip(x) {
                f += a * *v;
                size += a.norm() * v.abs();
            }
            f.symmetric_eigenvalues().min() / size.max(1.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest `|⟨A_j, Z⟩ + c_j|` relative to `max(1, |c_j| + Σ_b ‖A_j‖ ‖Z_b‖)`.
fn relative_dual_residual(
    prob: &LinearMatrixProblem,
    blocks: &[Vec<DMatrix<f64>>],
    dual: &[DMatrix<f64>],
) -> f64 {
    (0..prob.num_vars)
        .map(|j| {
            let c = to_f64(&prob.objective_coeffs[j]);
            let (mut dot, mut size) = (c, c.abs());
            for (mats, z) in blocks.iter().zip(dual) {
                dot += mats[j + 1].dot(z);
                size += mats[j + 1].norm() * z.norm();
            }
            dot.abs() / size.max(1.0)
        })
        .fold(0.0, f64::max)
}

fn objective(prob: &LinearMatrixProblem, x: &[f64]) -> f64 {
    to_f64(&prob.objective_constant)
        + prob.objective_coeffs.iter().zip(x).map(|(c, v)| to_f64(c) * v).sum::<f64>()
}

fn finish(
    prob: &LinearMatrixProblem,
    settings: &SolverSettings,
    blocks: &[Vec<DMatrix<f64>>],
    scaled: &Scaled,
    raw: ipm::RawSolution,
) -> SdpSolution {
    let x: Vec<f64> = raw.x.iter().zip(&scaled.var_scale).map(|(y, s)| y * s).collect();
    let mut dual: Vec<DMatrix<f64>> =
        prob.blocks.iter().map(|b| DMatrix::zeros(b.dim, b.dim)).collect();
    for ((z, d), &(b, row)) in raw.z.iter().zip(&scaled.row_scale).zip(&scaled.origin) {
        let zo = DMatrix::from_fn(z.nrows(), z.ncols(), |i, k| z[(i, k)] * d[i] * d[k]);
        if row == usize::MAX {
            dual[b] = zo;
        } else {
            dual[b][(row, row)] = zo[(0, 0)];
        }
    }
    let dual_obj = to_f64(&prob.objective_constant)
        + prob
            .blocks
            .iter()
            .zip(&dual)
            .map(|(b, z)| to_dense(b.constant()).component_mul(z).sum())
            .sum::<f64>();

    let mut status = raw.status;
    if matches!(status, SolveStatus::Optimal | SolveStatus::MaxIterReached) {
        let p = objective(prob, &x);
        status = if relative_dual_residual(prob, blocks, &dual) <= settings.feas_tol
            && relative_margin(blocks, &x) >= -settings.feas_tol
            && (dual_obj - p).abs() <= settings.gap_tol * (1.0 + p.abs())
        {
            SolveStatus::Optimal
        } else {
            SolveStatus::MaxIterReached
        };
    }
    let primal_obj = objective(prob, &x);
    let (primal_obj, dual_obj, gap) = match status {
        SolveStatus::Unbounded => (f64::INFINITY, f64::INFINITY, f64::NAN),
        SolveStatus::Infeasible => (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NAN),
        _ => (primal_obj, dual_obj, (dual_obj - primal_obj).abs()),
    };
    SdpSolution {
        x,
        primal_obj,
        dual_obj,
        gap,
        status,
        iterations: raw.iterations,
        dual: dual.iter().map(SymMatrixFloat::symmetrize).collect(),
    }
}

/// Residual of one constraint: a dense block, or one row of a diagonal block.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockResidual {
    pub label: String,
    pub min_eigenvalue: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub blocks: Vec<BlockResidual>,
    /// `Σ_b ⟨A_0 + Σ x_j A_j, Z_b⟩`.
    pub complementarity: f64,
    /// Objective recomputed from `x` in exact arithmetic.
    pub objective: f64,
    /// `|objective - primal_obj|`.
    pub objective_error: f64,
}

impl ResidualReport {
    pub fn flagged(&self) -> impl Iterator<Item = &BlockResidual> {
        self.blocks.iter().filter(|b| b.flagged)
    }

    pub fn any_flagged(&self) -> bool {
        self.flagged().next().is_some()
    }
}

fn row_label(label: &str, row: usize) -> String {
    match label {
        "nonneg" => format!("nonneg x{}", row + 1),
        _ => format!("{label} k={row}"),
    }
}

/// Recomputes constraint values, complementarity and objective for `sol.x`.
pub fn check_solution(prob: &LinearMatrixProblem, sol: &SdpSolution, tol: f64) -> ResidualReport {
    let x: Vec<Rational> = sol
        .x
        .iter()
        .map(|v| from_f64(*v).unwrap_or_default())
        .collect();
    let mut blocks = Vec::new();
    let mut complementarity = 0.0;
    for (b, block) in prob.blocks.iter().enumerate() {
        let value = prob.block_value(b, &x);
        let fv = value.to_float();
        if let Some(z) = sol.dual.get(b) {
            complementarity += fv.as_matrix().component_mul(z.as_matrix()).sum();
        }
        match block.kind {
            BlockKind::DensePsd => {
                let min = psd_check(&fv, 0.0).min_eigenvalue;
                blocks.push(BlockResidual {
                    label: block.label.clone(),
                    min_eigenvalue: min,
                    flagged: min < -tol,
                });
            }
            BlockKind::Diagonal => {
                for i in 0..block.dim {
                    let v = to_f64(&value.get(i, i));
                    blocks.push(BlockResidual {
                        label: row_label(&block.label, i),
                        min_eigenvalue: v,
                        flagged: v < -tol,
                    });
                }
            }
        }
    }
    let objective = to_f64(&prob.objective_at(&x));
    ResidualReport {
        blocks,
        complementarity,
        objective,
        objective_error: (objective - sol.primal_obj).abs(),
    }
}
