//! The three-point matrix kernels `Y_k^n(u, v, t)` and `S_k^n(u, v, t)`.
//!
//! Entry `(i, j)` of `Y_k^n` is
//!
//! ```text
//! u^i v^j ((1-u²)(1-v²))^{k/2} G_k^{(n-1)}((t - uv) / sqrt((1-u²)(1-v²)))
//! ```
//!
//! Because `G_k` only has monomials `t^m` with `k - m` even, the radical
//! cancels and the entry equals the polynomial
//! `u^i v^j Σ_m g_m (t - uv)^m ((1-u²)(1-v²))^{(k-m)/2}`. That form is used
//! throughout, so triples with `|u| = 1` or `|v| = 1` need no special case.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_poly;
use crate::numerics::{int, pow, psd_check, RatMatrix, Rational, SymMatrixExact, SymMatrixFloat};

/// Arguments `(u, v, t)` of the kernels, each in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TriplePoint {
    u: Rational,
    v: Rational,
    t: Rational,
}

impl TriplePoint {
    pub fn new(u: Rational, v: Rational, t: Rational) -> Result<Self> {
        for (name, value) in [("u", &u), ("v", &v), ("t", &t)] {
            if value.abs() > int(1) {
                return Err(Error::CoordinateOutOfRange {
                    name,
                    value: value.clone(),
                });
            }
        }
        Ok(Self { u, v, t })
    }

    pub fn u(&self) -> &Rational {
        &self.u
    }

    pub fn v(&self) -> &Rational {
        &self.v
    }

    pub fn t(&self) -> &Rational {
        &self.t
    }

    /// The six argument permutations, identity first.
    pub fn permutations(&self) -> [TriplePoint; 6] {
        let (u, v, t) = (&self.u, &self.v, &self.t);
        let mk = |a: &Rational, b: &Rational, c: &Rational| TriplePoint {
            u: a.clone(),
            v: b.clone(),
            t: c.clone(),
        };
        [
            mk(u, v, t),
            mk(u, t, v),
            mk(v, u, t),
            mk(v, t, u),
            mk(t, u, v),
            mk(t, v, u),
        ]
    }
}

fn check_indices(n: u32, p: u32, k: u32) -> Result<()> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    if k > p {
        return Err(Error::IndexExceedsCap { k, p });
    }
    Ok(())
}

/// `((1-u²)(1-v²))^{k/2} G_k^{(n-1)}((t-uv)/sqrt(...))` in its polynomial form.
fn kernel_scalar(n: u32, k: u32, pt: &TriplePoint) -> Result<Rational> {
    let g = gegenbauer_poly(n - 1, k)?;
    let one = int(1);
    let w = (&one - &pt.u * &pt.u) * (&one - &pt.v * &pt.v);
    let d = &pt.t - &pt.u * &pt.v;
    let mut acc = Rational::zero();
    for (m, gm) in g.coeffs().iter().enumerate() {
        if gm.is_zero() {
            continue;
        }
        let half = (k as usize - m) / 2;
        acc += gm * pow(&d, m as u32) * pow(&w, half as u32);
    }
    Ok(acc)
}

/// `Y_k^n(u, v, t)`, a `(p-k+1) × (p-k+1)` matrix; in general not symmetric.
pub fn y_matrix(n: u32, p: u32, k: u32, pt: &TriplePoint) -> Result<RatMatrix> {
    check_indices(n, p, k)?;
    let s = kernel_scalar(n, k, pt)?;
    let dim = (p - k + 1) as usize;
    let upow: Vec<Rational> = (0..dim).map(|i| pow(&pt.u, i as u32)).collect();
    let vpow: Vec<Rational> = (0..dim).map(|j| pow(&pt.v, j as u32)).collect();
    Ok(RatMatrix::from_fn(dim, |i, j| &upow[i] * &vpow[j] * &s))
}

/// The symmetrized kernel `S_k^n` for one triple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SMatrix {
    pub n: u32,
    pub p: u32,
    pub k: u32,
    pub m: SymMatrixExact,
}

/// `S_k^n(u, v, t) = (1/6) Σ_σ Y_k^n(σ(u, v, t))`.
pub fn s_matrix(n: u32, p: u32, k: u32, pt: &TriplePoint) -> Result<SMatrix> {
    check_indices(n, p, k)?;
    let dim = (p - k + 1) as usize;
    let ys = pt
        .permutations()
        .iter()
        .map(|q| y_matrix(n, p, k, q))
        .collect::<Result<Vec<_>>>()?;
    let sixth = Rational::new(1.into(), 6.into());
    let sum = RatMatrix::from_fn(dim, |i, j| {
        ys.iter().fold(Rational::zero(), |acc, y| acc + y.get(i, j)) * &sixth
    });
    Ok(SMatrix {
        n,
        p,
        k,
        m: SymMatrixExact::from_matrix(&sum)?,
    })
}

/// Floating-point mirror of the kernel for one fixed `(n, k)`.
struct FloatKernel {
    coeffs: Vec<f64>,
    k: usize,
    dim: usize,
}

impl FloatKernel {
    fn new(n: u32, p: u32, k: u32) -> Result<Self> {
        check_indices(n, p, k)?;
        let g = gegenbauer_poly(n - 1, k)?;
        Ok(Self {
            coeffs: g.coeffs().iter().map(crate::numerics::to_f64).collect(),
            k: k as usize,
            dim: (p - k + 1) as usize,
        })
    }

    fn scalar(&self, u: f64, v: f64, t: f64) -> f64 {
        let w = (1.0 - u * u) * (1.0 - v * v);
        let d = t - u * v;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| c * d.powi(m as i32) * w.powi(((self.k - m) / 2) as i32))
            .sum()
    }

    /// Adds `S_k(u, v, t)` into `acc`.
    fn accumulate_s(&self, acc: &mut nalgebra::DMatrix<f64>, u: f64, v: f64, t: f64) {
        for (a, b, c) in [(u, v, t), (u, t, v), (v, u, t), (v, t, u), (t, u, v), (t, v, u)] {
            let s = self.scalar(a, b, c) / 6.0;
            let mut ai = 1.0;
            for i in 0..self.dim {
                let mut bj = 1.0;
                for j in 0..self.dim {
                    acc[(i, j)] += ai * bj * s;
                    bj *= b;
                }
                ai *= a;
            }
        }
    }
}

/// Sums checked by [`positivity_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeResult {
    /// `Σ_{(x,y)} G_k^{(n)}(<x, y>)` over ordered pairs.
    pub two_point_sum: f64,
    /// Smallest eigenvalue of `Σ_{(x,y,z)} S_k^n(<x,y>, <x,z>, <y,z>)`.
    pub min_eig: f64,
}

/// Evaluates the two-point and three-point positivity sums for a code.
///
/// Both quantities are non-negative for every finite point set on the
/// sphere; this is a numerical sanity probe, not a proof.
pub fn positivity_probe(n: u32, points: &[Vec<f64>], k: u32, p: u32) -> Result<ProbeResult> {
    let kernel = FloatKernel::new(n, p, k)?;
    for (index, x) in points.iter().enumerate() {
        if x.len() != n as usize {
            return Err(Error::PointDimension {
                index,
                got: x.len(),
                expected: n as usize,
            });
        }
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitVector { index, norm });
        }
    }
    let size = points.len();
    let gram: Vec<f64> = (0..size * size)
        .map(|idx| {
            let (i, j) = (idx / size, idx % size);
            let ip: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            ip.clamp(-1.0, 1.0)
        })
        .collect();
    let gk = gegenbauer_poly(n, k)?;
    let two_point_sum = gram.iter().map(|&t| gk.eval_f64(t)).sum();

    let mut acc = nalgebra::DMatrix::zeros(kernel.dim, kernel.dim);
    for x in 0..size {
        for y in 0..size {
            for z in 0..size {
                kernel.accumulate_s(
                    &mut acc,
                    gram[x * size + y],
                    gram[x * size + z],
                    gram[y * size + z],
                );
            }
        }
    }
    let sym = SymMatrixFloat::symmetrize(&acc);
    let min_eig = if size == 0 {
        0.0
    } else {
        psd_check(&sym, 0.0).min_eigenvalue
    };
    Ok(ProbeResult {
        two_point_sum,
        min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{rat, to_f64};
    use proptest::prelude::*;

    fn tp(u: Rational, v: Rational, t: Rational) -> TriplePoint {
        TriplePoint::new(u, v, t).unwrap()
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(TriplePoint::new(rat(3, 2), int(0), int(0)).is_err());
        assert!(y_matrix(2, 5, 0, &tp(int(0), int(0), int(0))).is_err());
        assert!(matches!(
            y_matrix(10, 3, 4, &tp(int(0), int(0), int(0))),
            Err(Error::IndexExceedsCap { k: 4, p: 3 })
        ));
    }

    #[test]
    fn y_examples() {
        let ones = tp(int(1), int(1), int(1));
        let y = y_matrix(17, 5, 0, &ones).unwrap();
        assert_eq!(y.dim(), 6);
        assert!((0..6).all(|i| (0..6).all(|j| *y.get(i, j) == int(1))));

        let half = tp(rat(1, 2), rat(1, 2), rat(1, 2));
        assert_eq!(*y_matrix(10, 5, 1, &half).unwrap().get(0, 0), rat(1, 4));

        // u = 1 kills the radical; only the top monomial of G_2^{(23)} survives
        let pt = tp(int(1), rat(1, 2), rat(1, 3));
        let y = y_matrix(24, 5, 2, &pt).unwrap();
        let g2 = gegenbauer_poly(23, 2).unwrap();
        let lead = g2.leading().unwrap();
        assert_eq!(*y.get(0, 0), lead * rat(1, 36));
        assert_eq!(*y.get(2, 3), lead * rat(1, 36) * rat(1, 8));
    }

    #[test]
    fn s_at_all_ones() {
        let ones = tp(int(1), int(1), int(1));
        for n in 3..=50 {
            for k in 1..=5 {
                assert!(s_matrix(n, 5, k, &ones).unwrap().m.is_zero(), "n={n} k={k}");
            }
        }
        let s0 = s_matrix(24, 5, 0, &ones).unwrap();
        assert!(s0.m.entries_upper().all(|(_, _, v)| *v == int(1)));
    }

    fn radical_entry(n: u32, k: u32, i: i32, j: i32, u: f64, v: f64, t: f64) -> f64 {
        // direct evaluation of the defining formula, valid for |u|, |v| < 1
        let g = gegenbauer_poly(n - 1, k).unwrap();
        let w = (1.0 - u * u) * (1.0 - v * v);
        u.powi(i) * v.powi(j) * w.powf(k as f64 / 2.0) * g.eval_f64((t - u * v) / w.sqrt())
    }

    proptest! {
        #[test]
        fn swap_symmetry(n in 3u32..30, k in 0u32..6, a in -20i64..=20, b in -20i64..=20, c in -20i64..=20) {
            let pt = tp(rat(a, 20), rat(b, 20), rat(c, 20));
            let swapped = tp(rat(b, 20), rat(a, 20), rat(c, 20));
            prop_assert_eq!(s_matrix(n, 5, k, &pt).unwrap().m, s_matrix(n, 5, k, &swapped).unwrap().m);
        }

        #[test]
        fn polynomial_form_matches_radical(n in 3u32..40, k in 0u32..6, a in -19i64..=19, b in -19i64..=19, c in -20i64..=20) {
            let (u, v, t) = (rat(a, 20), rat(b, 20), rat(c, 20));
            let y = y_matrix(n, 5, k, &tp(u.clone(), v.clone(), t.clone())).unwrap();
            for i in 0..y.dim() {
                for j in 0..y.dim() {
                    let exact = to_f64(y.get(i, j));
                    let radical = radical_entry(n, k, i as i32, j as i32, to_f64(&u), to_f64(&v), to_f64(&t));
                    prop_assert!((exact - radical).abs() <= 1e-12 * (1.0 + exact.abs()),
                        "entry ({}, {}) exact {} radical {}", i, j, exact, radical);
                }
            }
        }
    }

    #[test]
    fn probe_single_point() {
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        for k in 0..=5 {
            let r = positivity_probe(5, &[e1.clone()], k, 5).unwrap();
            assert!((r.two_point_sum - 1.0).abs() < 1e-15);
            if k >= 1 {
                assert!(r.min_eig.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn probe_antipodal_pair() {
        let r = positivity_probe(3, &[vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]], 1, 5).unwrap();
        assert_eq!(r.two_point_sum, 0.0);
    }

    #[test]
    fn probe_rejects_bad_points() {
        assert!(matches!(
            positivity_probe(3, &[vec![1.0, 0.1, 0.0]], 1, 5),
            Err(Error::NotUnitVector { index: 0, .. })
        ));
        assert!(matches!(
            positivity_probe(3, &[vec![1.0, 0.0]], 1, 5),
            Err(Error::PointDimension { .. })
        ));
    }
}
