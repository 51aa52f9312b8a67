//! Closed-form and linear-programming bounds, and candidate angles.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{gegenbauer_eval, gegenbauer_expand};
use crate::numerics::{floor, format_rational, int, rat, Rational, UniPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    Gerzon,
    Relative,
    LsThird,
    DelsarteLp,
    Harmonic4,
    GMin,
    Sdp,
}

impl BoundMethod {
    pub fn tag(self) -> &'static str {
        match self {
            Self::Gerzon => "gerzon",
            Self::Relative => "relative",
            Self::LsThird => "ls_third",
            Self::DelsarteLp => "delsarte_lp",
            Self::Harmonic4 => "harmonic4",
            Self::GMin => "g_min",
            Self::Sdp => "sdp",
        }
    }
}

impl std::fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// An upper estimate together with the method that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundValue {
    pub value: Rational,
    pub method: BoundMethod,
}

impl BoundValue {
    pub fn new(value: Rational, method: BoundMethod) -> Result<Self> {
        if value < Rational::one() {
            return Err(Error::InvalidArgument(format!(
                "bound {} from {method} is below 1",
                format_rational(&value)
            )));
        }
        Ok(Self { value, method })
    }
}

/// A possible angle `arccos a` with `a = 1/(2k-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AngleCandidate {
    pub k: u32,
    pub a: Rational,
}

impl AngleCandidate {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("angle index k = {k} must be at least 2")));
        }
        Ok(Self {
            k,
            a: rat(1, 2 * k as i64 - 1),
        })
    }
}

/// `n(n+1)/2`.
pub fn gerzon(n: u32) -> u64 {
    let n = n as u64;
    n * (n + 1) / 2
}

/// `n(1-a²)/(1-na²)` when the denominator is positive.
pub fn relative_bound(n: u32, a: &Rational) -> Option<Rational> {
    let a2 = a * a;
    let denom = Rational::one() - int(n as i64) * &a2;
    if !denom.is_positive() {
        return None;
    }
    Some(int(n as i64) * (Rational::one() - a2) / denom)
}

/// `2(n-1)`, valid for `a = 1/3` and `n ≥ 16`.
pub fn lemmens_seidel_third(n: u32) -> Result<u64> {
    if n < 16 {
        return Err(Error::DimensionTooSmall { n, min: 16 });
    }
    Ok(2 * (n as u64 - 1))
}

/// All `k ≥ 2` with `2k - 1 ≤ √(2n)`, ascending.
pub fn candidate_angles(n: u32) -> Vec<AngleCandidate> {
    let limit = 2 * n as u64;
    (2u32..)
        .take_while(|k| {
            let d = 2 * *k as u64 - 1;
            d * d <= limit
        })
        .map(|k| AngleCandidate::new(k).expect("k >= 2"))
        .collect()
}

/// `⌊f(1)/f_0⌋` after checking the positivity and sign hypotheses exactly.
pub fn lp_delsarte(n: u32, t: &[Rational], f: &UniPoly) -> Result<BigInt> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    let e = gegenbauer_expand(n, f)?;
    let f0 = e.coeff(0);
    if !f0.is_positive() {
        return Err(Error::Hypothesis {
            condition: "f_0 > 0".into(),
            witness: format!("f_0 = {}", format_rational(&f0)),
        });
    }
    if let Some((k, c)) = e.coeffs.iter().enumerate().skip(1).find(|(_, c)| c.is_negative()) {
        return Err(Error::Hypothesis {
            condition: format!("f_{k} >= 0"),
            witness: format!("f_{k} = {}", format_rational(c)),
        });
    }
    for x in t {
        let v = f.eval(x);
        if v.is_positive() {
            return Err(Error::Hypothesis {
                condition: format!("f({}) <= 0", format_rational(x)),
                witness: format!("f({}) = {}", format_rational(x), format_rational(&v)),
            });
        }
    }
    Ok(floor(&(f.eval(&Rational::one()) / f0)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarmonicIndex4 {
    pub n: u32,
    pub a: Rational,
    pub f: UniPoly,
    pub bound: Rational,
}

/// LP bound at `n = 3(2k-1)² - 4`, `a = 1/(2k-1)` with
/// `f(t) = (t² - a²)(t² + (a²n + 4a² - 6)/(n + 4))`.
pub fn harmonic_index4_bound(k: u32) -> Result<HarmonicIndex4> {
    let AngleCandidate { a, .. } = AngleCandidate::new(k)?;
    let d = 2 * k as i64 - 1;
    let n = 3 * d * d - 4;
    let n_u32 = u32::try_from(n).map_err(|_| Error::InvalidArgument(format!("k = {k} is too large")))?;
    let a2 = &a * &a;
    let c = (&a2 * int(n) + int(4) * &a2 - int(6)) / int(n + 4);
    let f = UniPoly::new(vec![-a2, int(0), int(1)]) * UniPoly::new(vec![c, int(0), int(1)]);
    let bound = Rational::from_integer(lp_delsarte(n_u32, &[a.clone(), -a.clone()], &f)?);
    let expected = rat((n + 1) * (n + 2), 6);
    if bound != expected {
        return Err(Error::Internal(format!(
            "harmonic index 4 bound {} differs from (n+1)(n+2)/6 = {} at n = {n}",
            format_rational(&bound),
            format_rational(&expected)
        )));
    }
    Ok(HarmonicIndex4 { n: n_u32, a, f, bound })
}

/// `1 + min 1/|G_k(a)|` over even `k` in `[2, k_max]` with `G_k(a) < 0`,
/// with the smallest minimizing `k`.
pub fn g_bound(n: u32, a: &Rational, k_max: u32) -> Result<(Rational, u32)> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if !a.is_positive() || *a >= Rational::one() {
        return Err(Error::AngleOutOfRange(a.clone()));
    }
    if k_max < 2 || k_max % 2 != 0 {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} must be even and at least 2")));
    }
    let mut best: Option<(Rational, u32)> = None;
    for k in (2..=k_max).step_by(2) {
        let g = gegenbauer_eval(n, k, a)?;
        if !g.is_negative() {
            continue;
        }
        let v = Rational::one() / -g;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, k));
        }
    }
    best.map(|(v, k)| (v + Rational::one(), k))
        .ok_or(Error::NoQualifyingIndex { k_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gegenbauer::gegenbauer_expand;
    use crate::numerics::pow;
    use num_traits::Zero;
    use proptest::prelude::*;

    #[test]
    fn gerzon_examples() {
        assert_eq!(gerzon(23), 276);
        assert_eq!(gerzon(47), 1128);
        assert_eq!(gerzon(2), 3);
    }

    #[test]
    fn relative_examples() {
        assert_eq!(relative_bound(23, &rat(1, 5)), Some(int(276)));
        assert_eq!(relative_bound(7, &rat(1, 3)), Some(int(28)));
        assert_eq!(relative_bound(25, &rat(1, 5)), None);
        assert_eq!(relative_bound(23, &rat(1, 5)).unwrap(), int(gerzon(23) as i64));
    }

    #[test]
    fn lemmens_seidel_examples() {
        assert_eq!(lemmens_seidel_third(16).unwrap(), 30);
        assert_eq!(lemmens_seidel_third(40).unwrap(), 78);
        assert!(matches!(lemmens_seidel_third(15), Err(Error::DimensionTooSmall { .. })));
    }

    #[test]
    fn candidate_examples() {
        let ks = |n| candidate_angles(n).iter().map(|c| c.k).collect::<Vec<_>>();
        assert_eq!(ks(40), vec![2, 3, 4]);
        assert_eq!(ks(23), vec![2, 3]);
        assert_eq!(ks(139), (2..=8).collect::<Vec<_>>());
        assert_eq!(candidate_angles(40)[1].a, rat(1, 5));
        assert_eq!(candidate_angles(139).last().unwrap().a, rat(1, 15));
    }

    #[test]
    fn delsarte_examples() {
        let h = harmonic_index4_bound(3).unwrap();
        assert_eq!(lp_delsarte(71, &[rat(1, 5), rat(-1, 5)], &h.f).unwrap(), BigInt::from(876));
        let h = harmonic_index4_bound(2).unwrap();
        assert_eq!(h.n, 23);
        assert_eq!(lp_delsarte(23, &[rat(1, 3), rat(-1, 3)], &h.f).unwrap(), BigInt::from(100));
        let err = lp_delsarte(10, &[rat(1, 3), rat(-1, 3)], &UniPoly::constant(int(1))).unwrap_err();
        match err {
            Error::Hypothesis { condition, .. } => assert_eq!(condition, "f(1/3) <= 0"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn delsarte_rejects_negative_coefficients() {
        // t² - 1 has a negative constant term in the Gegenbauer basis
        let f = UniPoly::new(vec![int(-1), int(0), int(1)]);
        assert!(matches!(
            lp_delsarte(5, &[], &f),
            Err(Error::Hypothesis { condition, .. }) if condition == "f_0 > 0"
        ));
        // 1 - t has f_1 = -1
        let f = UniPoly::new(vec![int(1), int(-1)]);
        assert!(matches!(
            lp_delsarte(5, &[], &f),
            Err(Error::Hypothesis { condition, .. }) if condition == "f_1 >= 0"
        ));
    }

    #[test]
    fn harmonic_examples() {
        for (k, n, a, bound) in [(3, 71, rat(1, 5), 876), (4, 143, rat(1, 7), 3480), (5, 239, rat(1, 9), 9640)] {
            let h = harmonic_index4_bound(k).unwrap();
            assert_eq!((h.n, h.a, h.bound), (n, a, int(bound)));
        }
    }

    #[test]
    fn harmonic_family() {
        for k in 2..=10i64 {
            let h = harmonic_index4_bound(k as u32).unwrap();
            let n = h.n as i64;
            assert_eq!(h.bound, rat((n + 1) * (n + 2), 6));
            let e = gegenbauer_expand(h.n, &h.f).unwrap();
            let d = 2 * k - 1;
            assert_eq!(
                e.coeff(0),
                rat(8 * k * (k - 1), 1) / (pow(&int(d), 4) * int(12 * k * k - 12 * k + 1))
            );
            assert!((1..=3).all(|j| e.coeff(j).is_zero()));
            let g4 = gegenbauer_eval(h.n, 4, &h.a).unwrap();
            assert!(g4.is_negative());
            assert_eq!(Rational::one() / g4.abs() + int(1), h.bound);
        }
    }

    #[test]
    fn g_bound_examples() {
        assert_eq!(g_bound(71, &rat(1, 5), 100).unwrap(), (int(876), 4));
        assert_eq!(g_bound(23, &rat(1, 3), 100).unwrap(), (int(100), 4));
        assert!(matches!(
            g_bound(71, &rat(1, 5), 2),
            Err(Error::NoQualifyingIndex { k_max: 2 })
        ));
        assert!(g_bound(71, &rat(1, 5), 7).is_err());
    }

    #[test]
    fn bound_value_at_least_one() {
        assert!(BoundValue::new(int(276), BoundMethod::Gerzon).is_ok());
        assert!(BoundValue::new(rat(1, 2), BoundMethod::Sdp).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn g_bound_non_increasing(n in 5u32..60, d in 1i64..6, k1 in 2u32..20, extra in 0u32..10) {
            let a = rat(1, 2 * d + 1);
            let k1 = 2 * k1;
            let k2 = k1 + 2 * extra;
            match (g_bound(n, &a, k1), g_bound(n, &a, k2)) {
                (Ok((b1, _)), Ok((b2, _))) => prop_assert!(b2 <= b1),
                (Err(_), _) => {}
                (Ok(_), Err(e)) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn candidate_range(n in 2u32..5000) {
            let root = (2.0 * n as f64).sqrt();
            for c in candidate_angles(n) {
                let d = (2 * c.k - 1) as f64;
                prop_assert!(d * d <= 2.0 * n as f64 + 2.0 * root + 1.0);
                prop_assert_eq!(c.a.clone(), rat(1, 2 * c.k as i64 - 1));
            }
        }
    }
}
