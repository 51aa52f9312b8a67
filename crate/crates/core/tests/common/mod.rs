#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use eqlines_core::bounds::relative_bound;
use eqlines_core::gegenbauer::gegenbauer_eval;
use eqlines_core::numerics::{rat, to_f64, Rational};
use eqlines_core::pipeline::{table_scan, RunConfig};
use eqlines_core::sdp_model::{build_equiangular_sdp, export_sdpa, import_sdpa};
use eqlines_core::sdp_solver::{solve, SdpSolution, SolveStatus, SolverSettings};
use eqlines_core::threepoint::positivity_probe;

pub type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_code(rng: &mut ChaCha8Rng, n: usize, size: usize) -> Vec<Vec<f64>> {
    (0..size)
        .map(|_| {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / norm).collect()
        })
        .collect()
}

/// 100 random codes with n in 4..=8, at most 20 points and k <= 6.
pub fn positivity_on_random_codes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.random_range(4..=8usize);
        let size = rng.random_range(1..=20usize);
        let k = rng.random_range(0..=6u32);
        let code = random_code(&mut rng, n, size);
        let r = positivity_probe(n as u32, &code, k, 6).map_err(|e| e.to_string())?;
        let s = size as f64;
        ensure(r.two_point_sum >= -1e-9 * s * s && r.min_eig >= -1e-9 * s * s * s, || {
            format!("n={n} k={k} size={size}: {r:?}")
        })?;
    }
    Ok(())
}

/// `G_k(1) = 1`, parity and `|G_k| <= 1` on a grid of `[-1, 1]`.
pub fn gegenbauer_grid() -> Check {
    let one = rat(1, 1);
    let grid: Vec<Rational> = (-20..=20).map(|i| rat(i, 20)).collect();
    for n in 3..=12 {
        for k in 0..=8 {
            ensure(gegenbauer_eval(n, k, &one).unwrap() == one, || format!("G_{k}({n})(1) != 1"))?;
            for t in &grid {
                let g = gegenbauer_eval(n, k, t).unwrap();
                let mirrored = gegenbauer_eval(n, k, &-t.clone()).unwrap();
                let parity = if k % 2 == 0 { g.clone() } else { -g.clone() };
                ensure(mirrored == parity, || format!("parity fails at n={n} k={k} t={t}"))?;
                ensure(to_f64(&g).abs() <= 1.0, || format!("|G| > 1 at n={n} k={k} t={t}"))?;
            }
        }
    }
    Ok(())
}

pub fn optimum(n: u32, a: &Rational, p: u32) -> Result<SdpSolution, String> {
    let prob = build_equiangular_sdp(n, a, p).map_err(|e| e.to_string())?;
    let sol = solve(&prob, &SolverSettings::default()).map_err(|e| e.to_string())?;
    ensure(sol.status == SolveStatus::Optimal, || format!("n={n} a={a} p={p}: {}", sol.status))?;
    Ok(sol)
}

/// The optimum does not grow as the degree cap rises from 2 to 5.
pub fn monotone_in_p(n: u32, a: &Rational) -> Check {
    let tol = SolverSettings::default().gap_tol;
    let values = (2..=5).map(|p| optimum(n, a, p).map(|s| s.primal_obj)).collect::<Result<Vec<_>, _>>()?;
    for w in values.windows(2) {
        ensure(w[1] <= w[0] + 2.0 * tol * (1.0 + w[0].abs()), || format!("n={n} a={a}: {values:?}"))?;
    }
    Ok(())
}

pub fn relative_bound_dominates() -> Check {
    for (n, a) in [(23, rat(1, 5)), (7, rat(1, 3)), (21, rat(1, 5))] {
        let rel = to_f64(&relative_bound(n, &a).ok_or_else(|| format!("no relative bound at n={n}"))?);
        let sol = optimum(n, &a, 5)?;
        ensure(sol.primal_obj <= rel + 1e-6, || format!("n={n}: {} > {rel}", sol.primal_obj))?;
    }
    Ok(())
}

pub fn weak_duality() -> Check {
    for (n, a) in [(22, rat(1, 5)), (23, rat(1, 5)), (43, rat(1, 7)), (30, rat(1, 9))] {
        let sol = optimum(n, &a, 5)?;
        ensure(sol.dual_obj >= sol.primal_obj - 2.0 * sol.gap, || format!("n={n}: {sol:?}"))?;
    }
    Ok(())
}

pub fn sdpa_round_trip() -> Check {
    let prob = build_equiangular_sdp(23, &rat(1, 5), 5).map_err(|e| e.to_string())?;
    let back = import_sdpa(&export_sdpa(&prob)).map_err(|e| e.to_string())?;
    let settings = SolverSettings::default();
    let a = solve(&prob, &settings).map_err(|e| e.to_string())?;
    let b = solve(&back, &settings).map_err(|e| e.to_string())?;
    ensure(b.status == SolveStatus::Optimal && (a.primal_obj - b.primal_obj).abs() < 1e-6, || {
        format!("{} vs {} ({})", a.primal_obj, b.primal_obj, b.status)
    })
}

pub fn scan_is_byte_identical() -> Check {
    let run = |jobs| -> Result<Vec<u8>, String> {
        let cfg = RunConfig { jobs, ..RunConfig::default() };
        let mut buf = Vec::new();
        table_scan(22, 25, &cfg, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let first = run(1)?;
    ensure(first == run(1)? && first == run(3)?, || "scan output differs between runs".into())
}
