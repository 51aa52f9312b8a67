//! SDPA sparse (`.dat-s`) reader and writer.
//!
//! SDPA minimizes `cᵀx` subject to `Σ x_j F_j - F_0 ⪰ 0`. A maximization
//! model `max k + Σ c_j x_j` s.t. `A_0 + Σ x_j A_j ⪰ 0` is written with
//! `c = -objective`, `F_0 = -A_0` and `F_j = A_j`, so the model optimum is
//! `k - (SDPA optimum)`. The constant `k` and the block labels travel in
//! comment lines.

use std::fmt::Write as _;

use num_traits::Zero;

use super::{Block, BlockKind, LinearMatrixProblem, Sense};
use crate::error::{Error, Result};
use crate::numerics::{format_rational, from_f64, parse_rational, to_f64, Rational, SymMatrixExact};

const CONSTANT_TAG: &str = "* objective_constant = ";
const BLOCK_TAG: &str = "* block ";

fn render(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn objective_text(prob: &LinearMatrixProblem) -> String {
    let terms: Vec<(usize, &Rational)> = prob
        .objective_coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .collect();
    let constant = format_rational(&prob.objective_constant);
    if terms.is_empty() {
        return constant;
    }
    let common = terms[0].1;
    let vars = |ts: &[(usize, &Rational)]| {
        ts.iter()
            .map(|(j, _)| format!("x{}", j + 1))
            .collect::<Vec<_>>()
            .join("+")
    };
    let body = if terms.iter().all(|(_, c)| *c == common) && common.numer() == &1.into() {
        if common.denom() == &1.into() {
            vars(&terms)
        } else {
            format!("({})/{}", vars(&terms), common.denom())
        }
    } else {
        terms
            .iter()
            .map(|(j, c)| format!("({})*x{}", format_rational(c), j + 1))
            .collect::<Vec<_>>()
            .join(" + ")
    };
    format!("{constant} + {body}")
}

/// Serializes `prob` in SDPA sparse format.
pub fn export_sdpa(prob: &LinearMatrixProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "* objective = {} ; maximize", objective_text(prob));
    let _ = writeln!(
        out,
        "* written as: minimize c'x s.t. sum_j x_j F_j - F_0 >= 0 with c = -objective, F_0 = -A_0"
    );
    let _ = writeln!(out, "* bound = objective_constant - (SDPA optimum)");
    let _ = writeln!(out, "{CONSTANT_TAG}{}", format_rational(&prob.objective_constant));
    for (b, block) in prob.blocks.iter().enumerate() {
        let kind = match block.kind {
            BlockKind::DensePsd => "dense",
            BlockKind::Diagonal => "diagonal",
        };
        let _ = writeln!(out, "{BLOCK_TAG}{} {kind} {}", b + 1, block.label);
    }
    let _ = writeln!(out, "{}", prob.num_vars);
    let _ = writeln!(out, "{}", prob.blocks.len());
    let sizes: Vec<String> = prob
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::DensePsd => b.dim.to_string(),
            BlockKind::Diagonal => format!("-{}", b.dim),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let c: Vec<String> = prob
        .objective_coeffs
        .iter()
        .map(|c| render(-to_f64(c)))
        .collect();
    let _ = writeln!(out, "{}", c.join(" "));
    for mat in 0..=prob.num_vars {
        for (b, block) in prob.blocks.iter().enumerate() {
            for (i, j, v) in block.mats[mat].entries_upper() {
                if v.is_zero() {
                    continue;
                }
                let value = if mat == 0 { -to_f64(v) } else { to_f64(v) };
                let _ = writeln!(out, "{mat} {} {} {} {}", b + 1, i + 1, j + 1, render(value));
            }
        }
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::SdpaParse {
        line,
        message: message.into(),
    }
}

fn tokens(text: &str) -> Vec<&str> {
    text.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')'))
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(line, format!("invalid number '{tok}'")))
}

fn parse_usize(tok: &str, line: usize, what: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

/// Parses SDPA sparse text produced by [`export_sdpa`] or any other writer.
pub fn import_sdpa<'a>(text: &'a str) -> Result<LinearMatrixProblem> {
    let mut constant = Rational::zero();
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut data: Vec<(usize, &'a str)> = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix(CONSTANT_TAG.trim_end()) {
            constant = parse_rational(rest)
                .ok_or_else(|| parse_err(line_no, "invalid objective constant"))?;
            continue;
        }
        if let Some(rest) = line.strip_prefix(BLOCK_TAG) {
            let mut parts = rest.splitn(3, ' ');
            if let (Some(b), Some(_kind), Some(label)) = (parts.next(), parts.next(), parts.next()) {
                if let Ok(b) = b.parse::<usize>() {
                    labels.push((b, label.trim().to_string()));
                }
            }
            continue;
        }
        if line.starts_with('*') || line.starts_with('"') {
            continue;
        }
        data.push((line_no, line));
    }
    let mut it = data.into_iter();
    let next = |it: &mut std::vec::IntoIter<(usize, &'a str)>, what: &str| {
        it.next()
            .ok_or_else(|| parse_err(last_line.max(1), format!("missing {what}")))
    };
    let empty_line = if text.trim().is_empty() { 1 } else { last_line };
    let (l, s) = it
        .next()
        .ok_or_else(|| parse_err(empty_line, "missing number of variables"))?;
    let num_vars = parse_usize(tokens(s).first().copied().unwrap_or(""), l, "variable count")?;
    let (l, s) = next(&mut it, "number of blocks")?;
    let num_blocks = parse_usize(tokens(s).first().copied().unwrap_or(""), l, "block count")?;
    let (l, s) = next(&mut it, "block structure")?;
    let sizes = tokens(s)
        .into_iter()
        .take(num_blocks)
        .map(|t| t.parse::<i64>().map_err(|_| parse_err(l, format!("invalid block size '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if sizes.len() != num_blocks {
        return Err(parse_err(l, format!("expected {num_blocks} block sizes, got {}", sizes.len())));
    }
    for (b, &sz) in sizes.iter().enumerate() {
        if sz == 0 {
            return Err(Error::SdpaStructure {
                block: b + 1,
                message: "block size is zero".into(),
            });
        }
    }
    let (l, s) = next(&mut it, "objective vector")?;
    let c = tokens(s)
        .into_iter()
        .take(num_vars)
        .map(|t| parse_f64(t, l))
        .collect::<Result<Vec<_>>>()?;
    if c.len() != num_vars {
        return Err(parse_err(l, format!("expected {num_vars} objective entries, got {}", c.len())));
    }

    let mut entries: Vec<Vec<Vec<(usize, usize, f64)>>> =
        vec![vec![Vec::new(); num_blocks]; num_vars + 1];
    for (l, s) in it {
        let toks = tokens(s);
        if toks.len() < 5 {
            return Err(parse_err(l, "entry needs 'matno blockno i j value'"));
        }
        let mat = parse_usize(toks[0], l, "matrix number")?;
        let block = parse_usize(toks[1], l, "block number")?;
        let i = parse_usize(toks[2], l, "row index")?;
        let j = parse_usize(toks[3], l, "column index")?;
        let v = parse_f64(toks[4], l)?;
        if mat > num_vars {
            return Err(parse_err(l, format!("matrix number {mat} exceeds {num_vars}")));
        }
        if block == 0 || block > num_blocks {
            return Err(Error::SdpaStructure {
                block,
                message: format!("line {l}: block number outside 1..={num_blocks}"),
            });
        }
        let size = sizes[block - 1];
        let dim = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(Error::SdpaStructure {
                block,
                message: format!("line {l}: entry ({i}, {j}) outside a block of size {dim}"),
            });
        }
        if size < 0 && i != j {
            return Err(Error::SdpaStructure {
                block,
                message: format!("line {l}: off-diagonal entry ({i}, {j}) in a diagonal block"),
            });
        }
        let (i, j) = if i <= j { (i - 1, j - 1) } else { (j - 1, i - 1) };
        entries[mat][block - 1].push((i, j, v));
    }

    let mut blocks = Vec::with_capacity(num_blocks);
    for (b, &size) in sizes.iter().enumerate() {
        let dim = size.unsigned_abs() as usize;
        let mats = (0..=num_vars)
            .map(|mat| {
                let mut dense = vec![Rational::zero(); dim * dim];
                for &(i, j, v) in &entries[mat][b] {
                    let v = if mat == 0 { -v } else { v };
                    dense[i * dim + j] = from_f64(v).unwrap_or_else(Rational::zero);
                }
                SymMatrixExact::from_upper_fn(dim, |i, j| dense[i * dim + j].clone())
            })
            .collect();
        let label = labels
            .iter()
            .find(|(idx, _)| *idx == b + 1)
            .map(|(_, l)| l.clone())
            .unwrap_or_else(|| format!("block {}", b + 1));
        blocks.push(Block {
            kind: if size < 0 { BlockKind::Diagonal } else { BlockKind::DensePsd },
            dim,
            mats,
            label,
        });
    }
    let objective_coeffs = c
        .into_iter()
        .map(|v| from_f64(-v).unwrap_or_else(Rational::zero))
        .collect();
    let prob = LinearMatrixProblem {
        num_vars,
        objective_constant: constant,
        objective_coeffs,
        blocks,
        sense: Sense::Maximize,
    };
    prob.validate()?;
    Ok(prob)
}
