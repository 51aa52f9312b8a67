//! Block-diagonal linear matrix inequality models.
//!
//! A [`LinearMatrixProblem`] asks to maximize
//! `objective_constant + Σ_j objective_coeffs[j]·x_j` subject to
//! `A_0 + Σ_j x_j A_j ⪰ 0` in every block. [`build_equiangular_sdp`]
//! produces the three-point program for equiangular lines with inner
//! products `±a`; [`export_sdpa`] and [`import_sdpa`] move models in and out
//! of the SDPA sparse text format.

mod sdpa;

pub use sdpa::{export_sdpa, import_sdpa};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_eval;
use crate::numerics::{int, rat, Rational, SymMatrixExact};
use crate::threepoint::{s_matrix, TriplePoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    DensePsd,
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sense {
    Maximize,
}

/// One block `A_0 + Σ x_j A_j ⪰ 0` of the constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    pub dim: usize,
    /// `A_0, A_1, ..., A_m`.
    pub mats: Vec<SymMatrixExact>,
    pub label: String,
}

impl Block {
    pub fn constant(&self) -> &SymMatrixExact {
        &self.mats[0]
    }

    pub fn coefficient(&self, var: usize) -> &SymMatrixExact {
        &self.mats[var + 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMatrixProblem {
    pub num_vars: usize,
    pub objective_constant: Rational,
    pub objective_coeffs: Vec<Rational>,
    pub blocks: Vec<Block>,
    pub sense: Sense,
}

impl LinearMatrixProblem {
    /// Checks block shapes and diagonal-kind sparsity.
    pub fn validate(&self) -> Result<()> {
        if self.objective_coeffs.len() != self.num_vars {
            return Err(Error::MalformedProblem(format!(
                "{} objective coefficients for {} variables",
                self.objective_coeffs.len(),
                self.num_vars
            )));
        }
        for (b, block) in self.blocks.iter().enumerate() {
            if block.mats.len() != self.num_vars + 1 {
                return Err(Error::MalformedProblem(format!(
                    "block {b} ({}) has {} matrices, expected {}",
                    block.label,
                    block.mats.len(),
                    self.num_vars + 1
                )));
            }
            if block.mats.iter().any(|m| m.dim() != block.dim) {
                return Err(Error::MalformedProblem(format!(
                    "block {b} ({}) mixes matrix sizes",
                    block.label
                )));
            }
            if block.kind == BlockKind::Diagonal && block.mats.iter().any(|m| !m.is_diagonal()) {
                return Err(Error::MalformedProblem(format!(
                    "diagonal block {b} ({}) has off-diagonal entries",
                    block.label
                )));
            }
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective_coeffs
            .iter()
            .zip(x)
            .fold(self.objective_constant.clone(), |acc, (c, v)| acc + c * v)
    }

    /// `A_0 + Σ x_j A_j` for one block, exactly.
    pub fn block_value(&self, block: usize, x: &[Rational]) -> SymMatrixExact {
        let b = &self.blocks[block];
        x.iter()
            .enumerate()
            .fold(b.constant().clone(), |acc, (j, v)| acc.add(&b.coefficient(j).scale(v)))
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }
}

/// Variables: `x_1, x_2` weigh pairs at inner product `a` and `-a`;
/// `x_3..x_6` weigh triples of types `(a,a,a), (a,a,-a), (a,-a,-a), (-a,-a,-a)`.
pub const NUM_VARS: usize = 6;

/// The three-point program bounding equiangular sets with inner products `±a`.
///
/// Blocks, in order:
/// 1. the 2×2 pair/triple moment block;
/// 2. one dense block `S-block k` of size `p-k+1` for each `k = 0..=p`;
/// 3. a diagonal block with rows `3 + G_k(a) x_1 + G_k(-a) x_2 ≥ 0`, `k = 0..=p`;
/// 4. a diagonal block `x_j ≥ 0`.
pub fn build_equiangular_sdp(n: u32, a: &Rational, p: u32) -> Result<LinearMatrixProblem> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    if *a <= Rational::zero() || *a >= Rational::one() {
        return Err(Error::AngleOutOfRange(a.clone()));
    }
    let one = int(1);
    let neg = -a.clone();
    let mut blocks = Vec::with_capacity(p as usize + 4);

    let pair = SymMatrixExact::from_upper_fn(2, |i, j| match (i, j) {
        (0, 0) => Rational::zero(),
        _ => rat(1, 3),
    });
    let triple = SymMatrixExact::diagonal(vec![Rational::zero(), one.clone()]);
    let mut moment = vec![SymMatrixExact::identity(2), pair.clone(), pair];
    moment.extend(std::iter::repeat_n(triple, 4));
    blocks.push(Block {
        kind: BlockKind::DensePsd,
        dim: 2,
        mats: moment,
        label: "moment".into(),
    });

    let triples = [
        (one.clone(), one.clone(), one.clone()),
        (a.clone(), a.clone(), one.clone()),
        (neg.clone(), neg.clone(), one.clone()),
        (a.clone(), a.clone(), a.clone()),
        (a.clone(), a.clone(), neg.clone()),
        (a.clone(), neg.clone(), neg.clone()),
        (neg.clone(), neg.clone(), neg.clone()),
    ]
    .into_iter()
    .map(|(u, v, t)| TriplePoint::new(u, v, t))
    .collect::<Result<Vec<_>>>()?;
    for k in 0..=p {
        let mats = triples
            .iter()
            .map(|pt| s_matrix(n, p, k, pt).map(|s| s.m))
            .collect::<Result<Vec<_>>>()?;
        blocks.push(Block {
            kind: BlockKind::DensePsd,
            dim: (p - k + 1) as usize,
            mats,
            label: format!("S-block k={k}"),
        });
    }

    let rows = (p + 1) as usize;
    let gk_pos = (0..=p)
        .map(|k| gegenbauer_eval(n, k, a))
        .collect::<Result<Vec<_>>>()?;
    let gk_neg = (0..=p)
        .map(|k| gegenbauer_eval(n, k, &neg))
        .collect::<Result<Vec<_>>>()?;
    let mut linear = vec![
        SymMatrixExact::diagonal(vec![int(3); rows]),
        SymMatrixExact::diagonal(gk_pos),
        SymMatrixExact::diagonal(gk_neg),
    ];
    linear.extend(std::iter::repeat_n(SymMatrixExact::zeros(rows), 4));
    blocks.push(Block {
        kind: BlockKind::Diagonal,
        dim: rows,
        mats: linear,
        label: "linear".into(),
    });

    let mut nonneg = vec![SymMatrixExact::zeros(NUM_VARS)];
    for j in 0..NUM_VARS {
        let mut diag = vec![Rational::zero(); NUM_VARS];
        diag[j] = one.clone();
        nonneg.push(SymMatrixExact::diagonal(diag));
    }
    blocks.push(Block {
        kind: BlockKind::Diagonal,
        dim: NUM_VARS,
        mats: nonneg,
        label: "nonneg".into(),
    });

    let third = rat(1, 3);
    let problem = LinearMatrixProblem {
        num_vars: NUM_VARS,
        objective_constant: one,
        objective_coeffs: vec![
            third.clone(),
            third,
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
            Rational::zero(),
        ],
        blocks,
        sense: Sense::Maximize,
    };
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{psd_check, to_f64};

    #[test]
    fn block_layout() {
        let prob = build_equiangular_sdp(23, &rat(1, 5), 5).unwrap();
        assert_eq!(prob.num_vars, 6);
        assert_eq!(prob.block_dims(), vec![2, 6, 5, 4, 3, 2, 1, 6, 6]);
        let kinds: Vec<_> = prob.blocks.iter().map(|b| b.kind).collect();
        assert_eq!(kinds[..7], [BlockKind::DensePsd; 7]);
        assert_eq!(kinds[7..], [BlockKind::Diagonal; 2]);
        assert_eq!(prob.blocks[3].label, "S-block k=2");
    }

    #[test]
    fn origin_is_feasible_with_unit_objective() {
        for (n, a, p) in [(23, rat(1, 5), 5), (3, rat(1, 2), 2), (60, rat(2, 7), 4)] {
            let prob = build_equiangular_sdp(n, &a, p).unwrap();
            let zero = vec![Rational::zero(); 6];
            assert_eq!(prob.objective_at(&zero), int(1));
            for (b, block) in prob.blocks.iter().enumerate() {
                let c = prob.block_value(b, &zero);
                assert_eq!(&c, block.constant());
                if block.label.starts_with("S-block") && block.label != "S-block k=0" {
                    assert!(c.is_zero());
                }
                assert!(psd_check(&c.to_float(), 1e-12).is_psd, "{}", block.label);
            }
            // the k = 0 S-block is the all-ones matrix: rank one, PSD
            assert!(prob.blocks[1].constant().entries_upper().all(|(_, _, v)| *v == int(1)));
        }
    }

    #[test]
    fn linear_rows_hold_gegenbauer_values() {
        let a = rat(1, 5);
        let prob = build_equiangular_sdp(23, &a, 5).unwrap();
        let lin = &prob.blocks[7];
        // k = 0 row: 3 + x_1 + x_2 >= 0
        assert_eq!(*lin.constant().get(0, 0), int(3));
        assert_eq!(*lin.coefficient(0).get(0, 0), int(1));
        assert_eq!(*lin.coefficient(1).get(0, 0), int(1));
        for k in 0..=5u32 {
            let r = k as usize;
            assert_eq!(*lin.coefficient(0).get(r, r), gegenbauer_eval(23, k, &a).unwrap());
            assert_eq!(*lin.coefficient(1).get(r, r), gegenbauer_eval(23, k, &-a.clone()).unwrap());
            assert!(lin.coefficient(2).is_zero());
        }
    }

    #[test]
    fn s_blocks_match_kernels() {
        for (n, a) in [(23, rat(1, 5)), (60, rat(1, 7)), (3, rat(1, 3))] {
            let prob = build_equiangular_sdp(n, &a, 5).unwrap();
            let neg = -a.clone();
            let one = int(1);
            let triples = [
                (one.clone(), one.clone(), one.clone()),
                (a.clone(), a.clone(), one.clone()),
                (neg.clone(), neg.clone(), one.clone()),
                (a.clone(), a.clone(), a.clone()),
                (a.clone(), a.clone(), neg.clone()),
                (a.clone(), neg.clone(), neg.clone()),
                (neg.clone(), neg.clone(), neg.clone()),
            ];
            for k in 0..=5u32 {
                let block = &prob.blocks[1 + k as usize];
                for (i, (u, v, t)) in triples.iter().enumerate() {
                    let pt = TriplePoint::new(u.clone(), v.clone(), t.clone()).unwrap();
                    assert_eq!(block.mats[i], s_matrix(n, 5, k, &pt).unwrap().m);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(build_equiangular_sdp(2, &rat(1, 5), 5).is_err());
        assert!(build_equiangular_sdp(10, &int(1), 5).is_err());
        assert!(build_equiangular_sdp(10, &int(0), 5).is_err());
    }

    #[test]
    fn moment_block_values() {
        let prob = build_equiangular_sdp(10, &rat(1, 3), 0).unwrap();
        assert_eq!(prob.block_dims(), vec![2, 1, 1, 6]);
        let m = &prob.blocks[0];
        assert_eq!(to_f64(m.coefficient(0).get(0, 1)), 1.0 / 3.0);
        assert_eq!(*m.coefficient(5).get(1, 1), int(1));
        assert!(m.coefficient(5).get(0, 0).is_zero());
    }

    #[test]
    fn validate_catches_shape_errors() {
        let mut prob = build_equiangular_sdp(10, &rat(1, 3), 1).unwrap();
        prob.blocks[2].mats.pop();
        assert!(prob.validate().is_err());
        let mut prob = build_equiangular_sdp(10, &rat(1, 3), 1).unwrap();
        let last = prob.blocks.len() - 1;
        prob.blocks[last].mats[1] = SymMatrixExact::from_upper_fn(6, |_, _| int(1));
        assert!(prob.validate().is_err());
    }
}
