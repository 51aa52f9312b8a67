//! Gegenbauer polynomials `G_k^{(n)}` normalized so that `G_k^{(n)}(1) = 1`.
//!
//! The family is generated by
//!
//! ```text
//! G_0 = 1,  G_1 = t,
//! G_k = ((2k + n - 4) t G_{k-1} - (k - 1) G_{k-2}) / (k + n - 3),  k >= 2
//! ```
//!
//! All coefficients are exact rationals. Results are memoized in a
//! process-wide cache keyed by `(n, k)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::{int, Rational, UniPoly};

/// Memo table for `G_k^{(n)}`.
///
/// Entries are deterministic, so concurrent inserts of the same key are
/// harmless; the last writer wins.
#[derive(Debug, Default)]
pub struct GegenbauerCache {
    memo: RwLock<HashMap<(u32, u32), Arc<UniPoly>>>,
}

impl GegenbauerCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// The shared cache used by the free functions of this module.
    pub fn global() -> &'static GegenbauerCache {
        static CACHE: OnceLock<GegenbauerCache> = OnceLock::new();
        CACHE.get_or_init(GegenbauerCache::new)
    }

    fn lookup(&self, n: u32, k: u32) -> Option<Arc<UniPoly>> {
        self.memo
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(&(n, k))
            .cloned()
    }

    fn store(&self, n: u32, k: u32, p: Arc<UniPoly>) {
        self.memo
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert((n, k), p);
    }

    pub fn len(&self) -> usize {
        self.memo.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn poly(&self, n: u32, k: u32) -> Result<Arc<UniPoly>> {
        check_dimension(n)?;
        if let Some(p) = self.lookup(n, k) {
            return Ok(p);
        }
        // Walk up from the highest cached pair of predecessors.
        let mut start = k;
        while start >= 2 && (self.lookup(n, start - 1).is_none() || self.lookup(n, start - 2).is_none())
        {
            start -= 1;
        }
        let (mut prev2, mut prev1, from) = if start >= 2 {
            (
                self.lookup(n, start - 2).expect("checked above"),
                self.lookup(n, start - 1).expect("checked above"),
                start,
            )
        } else {
            let g0 = Arc::new(UniPoly::constant(int(1)));
            let g1 = Arc::new(UniPoly::identity());
            self.store(n, 0, g0.clone());
            self.store(n, 1, g1.clone());
            if k == 0 {
                return Ok(g0);
            }
            (g0, g1, 2)
        };
        for j in from..=k {
            let (j64, n64) = (j as i64, n as i64);
            let a = int(2 * j64 + n64 - 4);
            let b = int(j64 - 1);
            let denom = int(j64 + n64 - 3);
            let next = (&prev1.shift(1).scale(&a) - &prev2.scale(&b)).scale(&(int(1) / denom));
            let next = Arc::new(next);
            self.store(n, j, next.clone());
            prev2 = prev1;
            prev1 = next;
        }
        Ok(prev1)
    }
}

fn check_dimension(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    Ok(())
}

/// `G_k^{(n)}` as an exact polynomial.
pub fn gegenbauer_poly(n: u32, k: u32) -> Result<Arc<UniPoly>> {
    GegenbauerCache::global().poly(n, k)
}

/// `G_k^{(n)}(t)`, exactly.
pub fn gegenbauer_eval(n: u32, k: u32, t: &Rational) -> Result<Rational> {
    Ok(gegenbauer_poly(n, k)?.eval(t))
}

/// Coefficients `f_0..f_d` of a polynomial in the Gegenbauer basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GegenbauerExpansion {
    pub n: u32,
    pub coeffs: Vec<Rational>,
}

impl GegenbauerExpansion {
    /// `f_k`, zero past the stored range.
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// `Σ f_k G_k^{(n)}`.
    pub fn reconstruct(&self) -> Result<UniPoly> {
        let mut acc = UniPoly::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = &acc + &gegenbauer_poly(self.n, k as u32)?.scale(c);
            }
        }
        Ok(acc)
    }
}

/// Expands `f` in the basis `G_0^{(n)}, G_1^{(n)}, ...` by repeatedly
/// cancelling the leading term with the Gegenbauer polynomial of the same
/// degree.
pub fn gegenbauer_expand(n: u32, f: &UniPoly) -> Result<GegenbauerExpansion> {
    check_dimension(n)?;
    let Some(deg) = f.degree() else {
        return Ok(GegenbauerExpansion { n, coeffs: Vec::new() });
    };
    let mut coeffs = vec![Rational::zero(); deg + 1];
    let mut rest = f.clone();
    for d in (0..=deg).rev() {
        let c = rest.coeff(d);
        if c.is_zero() {
            continue;
        }
        let g = gegenbauer_poly(n, d as u32)?;
        let lead = g.leading().expect("G_d has degree d").clone();
        let factor = c / lead;
        rest = &rest - &g.scale(&factor);
        coeffs[d] = factor;
    }
    debug_assert!(rest.is_zero());
    Ok(GegenbauerExpansion { n, coeffs })
}

/// Closed form `((n+2)(n+4)t^4 - 6(n+2)t^2 + 3) / (n^2 - 1)` of `G_4^{(n)}`.
pub fn g4_closed_form(n: u32) -> Result<UniPoly> {
    check_dimension(n)?;
    let n = n as i64;
    let denom = int(n * n - 1);
    let c4 = int((n + 2) * (n + 4)) / &denom;
    let c2 = int(-6 * (n + 2)) / &denom;
    let c0 = int(3) / &denom;
    Ok(UniPoly::new(vec![c0, Rational::zero(), c2, Rational::zero(), c4]))
}
