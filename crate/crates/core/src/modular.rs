//! Hyperbolic density of the twice-punctured plane `C \ {0, 1}` through the
//! elliptic modular function, and the Hempel-type lower bound.
//!
//! Conventions: curvature −1 everywhere, so the upper half-plane carries
//! `|dτ| / Im τ` and the unit disk `2|dz| / (1 − |z|²)`. The elliptic
//! parameter is `m = k²`.
//!
//! The modular function is `λ(τ) = θ₂⁴/θ₃⁴` with nome `q = exp(iπτ)`. It is
//! the universal covering `H → C \ {0, 1}`, so
//! `λ_{C\{0,1}}(λ(τ)) |λ'(τ)| = 1 / Im τ` with `λ' = iπ λ (1 − λ) θ₃⁴`.
//!
//! Inversion uses `τ = i K(1 − w) / K(w)`, which is the principal preimage on
//! the slit plane. It is only evaluated on the good region
//! `G = {|v − 1| ≤ 1, Re v ≤ 1/2}`, a fundamental domain of the six
//! anharmonic maps `v ↦ v, 1 − v, 1/v, 1/(1 − v), v/(v − 1), (v − 1)/v`.
//! On `G` we have `Im τ ≥ √3/2`, so the theta series converge fast. Every
//! other point is moved into `G` by one of those maps and moved back through
//! the matching modular transformation:
//!
//! | map on λ          | map on τ     |
//! |-------------------|--------------|
//! | `A: v ↦ 1 − v`    | `τ ↦ −1/τ`   |
//! | `B: v ↦ v/(v−1)`  | `τ ↦ τ + 1`  |

use std::f64::consts::{FRAC_PI_2, PI, TAU as TWO_PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MetricError, Result};
use crate::geometry::Point;

/// A published rounding of `K` that disagrees with [`constant_k`] in the
/// third decimal; kept for reporting next to the computed value.
pub const PRINTED_K: f64 = 4.3859;

const AGM_MAX_ITER: usize = 64;
const AGM_TOL: f64 = 1e-15;
const SERIES_TOL: f64 = 1e-17;

/// Upper half-plane modulus. `reduced` marks values inside the Γ(2)
/// fundamental domain `{|Re τ| ≤ 1, |τ − 1/2| ≥ 1/2, |τ + 1/2| ≥ 1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tau {
    pub value: Complex64,
    pub reduced: bool,
}

impl Tau {
    pub fn new(value: Complex64) -> Result<Self> {
        if !(value.im > 0.0) || !value.re.is_finite() || !value.im.is_finite() {
            return Err(MetricError::InvalidArgument(format!(
                "tau must lie in the upper half-plane, got {value}"
            )));
        }
        Ok(Tau {
            value,
            reduced: false,
        })
    }

    /// Moves τ into the Γ(2) fundamental domain; λ is unchanged.
    pub fn reduce(self) -> Self {
        Tau {
            value: reduce_gamma2(self.value),
            reduced: true,
        }
    }
}

/// Density per unit Euclidean length, curvature −1 normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityValue {
    pub value: f64,
    pub convention: &'static str,
}

impl DensityValue {
    pub const CONVENTION: &'static str = "curvature -1";

    pub fn new(value: f64) -> Self {
        DensityValue {
            value,
            convention: Self::CONVENTION,
        }
    }
}

/// Arithmetic–geometric mean with the right choice of square root at every
/// step: the root `g` with `|a' − g| ≤ |a' + g|`, where `a'` is the new
/// arithmetic mean. For `Re(b/a) > 0` this is the analytic continuation
/// of the real AGM.
pub fn agm(a: Complex64, b: Complex64) -> Result<Complex64> {
    if a == Complex64::new(0.0, 0.0) || b == Complex64::new(0.0, 0.0) {
        return Err(MetricError::InvalidArgument("agm of zero".into()));
    }
    let r = a / b;
    if r.im == 0.0 && r.re < 0.0 {
        return Err(MetricError::InvalidArgument(
            "agm arguments with negative real ratio".into(),
        ));
    }
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).norm() <= AGM_TOL * a.norm() {
            return Ok(a);
        }
        let an = (a + b) * 0.5;
        let mut g = (a * b).sqrt();
        if (an - g).norm() > (an + g).norm() {
            g = -g;
        }
        a = an;
        b = g;
    }
    Err(MetricError::NonConvergence {
        what: "agm",
        iterations: AGM_MAX_ITER,
    })
}

/// Complete elliptic integral of the first kind in the parameter `m = k²`,
/// principal branch on `C \ [1, ∞)`.
pub fn elliptic_k(m: Complex64) -> Result<Complex64> {
    if m.im == 0.0 && m.re >= 1.0 {
        return Err(MetricError::BranchCut(m));
    }
    let b = (Complex64::new(1.0, 0.0) - m).sqrt();
    Ok(Complex64::new(FRAC_PI_2, 0.0) / agm(Complex64::new(1.0, 0.0), b)?)
}

/// Jacobi theta constants `(θ₂, θ₃, θ₄)` at nome `q = exp(iπτ)`.
pub fn theta_constants(tau: &Tau) -> (Complex64, Complex64, Complex64) {
    let t = tau.value;
    let i_pi = Complex64::new(0.0, PI);
    let q = (i_pi * t).exp();
    let qn = |e: f64| (i_pi * t * e).exp();
    let one = Complex64::new(1.0, 0.0);

    let mut s2 = Complex64::new(0.0, 0.0);
    let mut s3 = one;
    let mut s4 = one;
    let mut n = 0u64;
    loop {
        let e2 = (n * (n + 1)) as f64;
        let term2 = if n == 0 { one } else { qn(e2) };
        s2 += term2;
        if n > 0 {
            let term = qn((n * n) as f64);
            s3 += term * 2.0;
            s4 += if n % 2 == 0 { term * 2.0 } else { -term * 2.0 };
            if term.norm() < SERIES_TOL && term2.norm() < SERIES_TOL {
                break;
            }
        }
        n += 1;
        if q.norm() == 0.0 {
            break;
        }
    }
    let theta2 = (i_pi * t * 0.25).exp() * s2 * 2.0;
    (theta2, s3, s4)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Anharmonic {
    /// `v ↦ 1 − v`, τ ↦ −1/τ.
    A,
    /// `v ↦ v/(v − 1)`, τ ↦ τ + 1.
    B,
}

impl Anharmonic {
    fn apply(self, v: Complex64) -> Complex64 {
        match self {
            Anharmonic::A => Complex64::new(1.0, 0.0) - v,
            Anharmonic::B => v / (v - 1.0),
        }
    }

    /// `|d/dv apply(v)|`.
    fn abs_derivative(self, v: Complex64) -> f64 {
        match self {
            Anharmonic::A => 1.0,
            Anharmonic::B => 1.0 / (v - 1.0).norm_sqr(),
        }
    }

    fn act_on_tau(self, t: Complex64) -> Complex64 {
        match self {
            Anharmonic::A => -t.inv(),
            Anharmonic::B => t + 1.0,
        }
    }
}

/// The six elements of the anharmonic group as words, first letter applied
/// first.
const WORDS: [&[Anharmonic]; 6] = [
    &[],
    &[Anharmonic::A],
    &[Anharmonic::B],
    &[Anharmonic::A, Anharmonic::B],
    &[Anharmonic::B, Anharmonic::A],
    &[Anharmonic::A, Anharmonic::B, Anharmonic::A],
];

fn in_good_region(v: Complex64) -> bool {
    const SLOP: f64 = 1e-12;
    (v - 1.0).norm() <= 1.0 + SLOP && v.re <= 0.5 + SLOP
}

/// Image `v` of `w` in the good region, the word that produced it and
/// `|dv/dw|`.
fn to_good_region(w: Complex64) -> (Complex64, &'static [Anharmonic], f64) {
    let mut best: Option<(Complex64, &'static [Anharmonic], f64)> = None;
    for word in WORDS {
        let mut v = w;
        let mut deriv = 1.0;
        for letter in word {
            deriv *= letter.abs_derivative(v);
            v = letter.apply(v);
        }
        if in_good_region(v) && best.map_or(true, |(b, _, _)| v.norm() < b.norm()) {
            best = Some((v, word, deriv));
        }
    }
    // the six images tile the plane, so one of them always lands in G
    best.expect("anharmonic images cover the good region")
}

fn check_not_puncture(w: Complex64) -> Result<()> {
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(MetricError::InvalidArgument(format!("non-finite point {w}")));
    }
    if w == Complex64::new(0.0, 0.0) || w == Complex64::new(1.0, 0.0) {
        return Err(MetricError::PunctureValue(w));
    }
    Ok(())
}

/// `τ = i K(1 − v) / K(v)` for `v` in the good region.
fn principal_tau(v: Complex64) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    Ok(Complex64::new(0.0, 1.0) * elliptic_k(one - v)? / elliptic_k(v)?)
}

/// Reduction into `{|Re τ| ≤ 1, |τ ± 1/2| ≥ 1/2}` by elements of Γ(2).
pub fn reduce_gamma2(mut t: Complex64) -> Complex64 {
    for _ in 0..10_000 {
        let shift = 2.0 * ((t.re + 1.0) / 2.0).floor();
        t.re -= shift;
        if t.re > 1.0 {
            t.re -= 2.0;
        }
        let half = Complex64::new(0.5, 0.0);
        if (t - half).norm() < 0.5 {
            t = t / (t * -2.0 + 1.0);
        } else if (t + half).norm() < 0.5 {
            t = t / (t * 2.0 + 1.0);
        } else {
            break;
        }
    }
    t
}

/// The modular function `λ(τ) = θ₂⁴/θ₃⁴`. τ is first moved into the standard
/// SL(2, Z) domain so the series are evaluated at `|q| ≤ e^{−π√3/2}`.
pub fn modular_lambda(tau: &Tau) -> Complex64 {
    let mut t = tau.value;
    let mut ops = Vec::new();
    for _ in 0..10_000 {
        let n = t.re.round();
        if n != 0.0 {
            t.re -= n;
            if (n as i64).rem_euclid(2) == 1 {
                ops.push(Anharmonic::B);
            }
        }
        if t.norm_sqr() < 1.0 - 1e-15 {
            t = -t.inv();
            ops.push(Anharmonic::A);
        } else {
            break;
        }
    }
    let (t2, t3, _) = theta_constants(&Tau {
        value: t,
        reduced: false,
    });
    let mut lam = (t2 / t3).powi(4);
    for op in ops.iter().rev() {
        lam = op.apply(lam);
    }
    lam
}

/// A Γ(2)-reduced preimage of `w` under the modular function.
pub fn inverse_lambda(w: Complex64) -> Result<Tau> {
    check_not_puncture(w)?;
    let (v, word, _) = to_good_region(w);
    let mut t = principal_tau(v)?;
    // w = word⁻¹(v); each letter is an involution, so undo in reverse order
    for letter in word.iter().rev() {
        t = letter.act_on_tau(t);
    }
    Ok(Tau {
        value: reduce_gamma2(t),
        reduced: true,
    })
}

/// `1 / (Im τ |λ'(τ)|)` with `λ(τ) = v`, for `v` in the good region.
fn density_good_region(v: Complex64) -> Result<f64> {
    let t = Tau {
        value: principal_tau(v)?,
        reduced: false,
    };
    let (_, t3, _) = theta_constants(&t);
    let deriv = PI * (v * (Complex64::new(1.0, 0.0) - v) * t3.powi(4)).norm();
    Ok(1.0 / (t.value.im * deriv))
}

/// Hyperbolic density of `C \ {0, 1}` at `w`.
pub fn density_c01(w: Complex64) -> Result<DensityValue> {
    check_not_puncture(w)?;
    let (v, _, deriv) = to_good_region(w);
    Ok(DensityValue::new(density_good_region(v)? * deriv))
}

/// Hyperbolic density of `C \ {a, b}` at `w` by affine reduction to `{0, 1}`.
pub fn density_two_punctures(a: Point, b: Point, w: Point) -> Result<DensityValue> {
    if a == b {
        return Err(MetricError::DegeneratePair);
    }
    if w == a || w == b {
        return Err(MetricError::PunctureValue(w));
    }
    let s = b - a;
    Ok(DensityValue::new(density_c01((w - a) / s)?.value / s.norm()))
}

/// `K = Γ(1/4)⁴ / (4π²) = 2π / agm(1, √2)²`, the classical Hempel constant.
/// In curvature −1 it equals `1 / λ_{C\{0,1}}(−1)`.
pub fn constant_k() -> f64 {
    let m = agm(
        Complex64::new(1.0, 0.0),
        Complex64::new(std::f64::consts::SQRT_2, 0.0),
    )
    .expect("agm(1, sqrt 2) converges")
    .re;
    TWO_PI / (m * m)
}

/// `1 / (2|z| (|log|z|| + K))`.
pub fn hempel_lower_bound(z: Complex64) -> Result<f64> {
    check_not_puncture(z)?;
    let r = z.norm();
    Ok(1.0 / (2.0 * r * (r.ln().abs() + constant_k())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::function::gamma::gamma;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Trapezoid rule for `∫₀^{π/2} dθ / √(1 − m sin²θ)`. The integrand is
    /// even and π-periodic, so the rule converges geometrically.
    fn k_quadrature(m: Complex64) -> Complex64 {
        let n = 2000;
        let h = FRAC_PI_2 / n as f64;
        let f = |th: f64| (c(1.0, 0.0) - m * th.sin().powi(2)).sqrt().inv();
        let mut s = (f(0.0) + f(FRAC_PI_2)) * 0.5;
        for k in 1..n {
            s += f(k as f64 * h);
        }
        s * h
    }

    fn gamma_oracle_density_minus_one() -> f64 {
        gamma(0.75).powi(4) / (PI * PI)
    }

    #[test]
    fn agm_examples() {
        assert_eq!(agm(c(1.0, 0.0), c(1.0, 0.0)).unwrap(), c(1.0, 0.0));
        let a = c(2.5, -1.0);
        assert!((agm(a, a).unwrap() - a).norm() < 1e-15);
        let b = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let k = FRAC_PI_2 / agm(c(1.0, 0.0), b).unwrap();
        assert!((k - k_quadrature(c(0.5, 0.0))).norm() < 1e-13);
        assert!(agm(c(1.0, 0.0), c(-1.0, 0.0)).is_err());
        assert!(agm(c(0.0, 0.0), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn elliptic_k_examples() {
        assert!((elliptic_k(c(0.0, 0.0)).unwrap() - c(FRAC_PI_2, 0.0)).norm() < 1e-15);
        for m in [c(0.5, 0.0), c(-1.0, 0.0), c(0.3, 0.4), c(-2.0, -1.5), c(0.9, 0.1)] {
            let got = elliptic_k(m).unwrap();
            let want = k_quadrature(m);
            assert!((got - want).norm() < 1e-12 * want.norm(), "m={m}: {got} vs {want}");
        }
        assert!(matches!(
            elliptic_k(c(1.0, 0.0)),
            Err(MetricError::BranchCut(_))
        ));
        assert!(elliptic_k(c(3.0, 0.0)).is_err());
    }

    #[test]
    fn theta_examples() {
        let t = Tau::new(c(0.0, 1.0)).unwrap();
        let (t2, t3, _) = theta_constants(&t);
        assert!(((t2 / t3).powi(4) - c(0.5, 0.0)).norm() < 1e-12);
        let (t2, t3, t4) = theta_constants(&Tau::new(c(0.3, 40.0)).unwrap());
        assert!((t3 - 1.0).norm() < 1e-15 && (t4 - 1.0).norm() < 1e-15);
        assert!(t2.norm() < 1e-10);
        let a = theta_constants(&Tau::new(c(0.2, 0.7)).unwrap()).1;
        let b = theta_constants(&Tau::new(c(2.2, 0.7)).unwrap()).1;
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn lambda_examples() {
        let l = modular_lambda(&Tau::new(c(0.0, 1.0)).unwrap());
        assert!((l - c(0.5, 0.0)).norm() < 1e-12);
        let l = modular_lambda(&Tau::new(c(1.0, 1.0)).unwrap());
        assert!((l - c(-1.0, 0.0)).norm() < 1e-12);
        let l = modular_lambda(&Tau::new(c(0.0, 2.0)).unwrap());
        assert!(l.im.abs() < 1e-15 && l.re > 0.0 && l.re < 0.5);
        let back = inverse_lambda(l).unwrap();
        assert!((back.value - c(0.0, 2.0)).norm() < 1e-10);
    }

    #[test]
    fn inverse_lambda_examples() {
        let t = inverse_lambda(c(0.5, 0.0)).unwrap();
        assert!((t.value - c(0.0, 1.0)).norm() < 1e-10);
        let t = inverse_lambda(c(-1.0, 0.0)).unwrap();
        assert!(t.reduced);
        assert!((t.value.im - 1.0).abs() < 1e-10);
        assert!(matches!(
            inverse_lambda(c(0.0, 0.0)),
            Err(MetricError::PunctureValue(_))
        ));
        assert!(inverse_lambda(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn density_at_minus_one_matches_gamma_oracle() {
        let want = gamma_oracle_density_minus_one();
        assert!((want - 0.228_473_290_522_231_8).abs() < 1e-14);
        let got = density_c01(c(-1.0, 0.0)).unwrap().value;
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }

    /// Separate path: plain theta series evaluated directly at τ = 1 + i,
    /// where λ = −1, without any reduction.
    #[test]
    fn density_at_minus_one_matches_direct_series() {
        let q = -(-PI).exp();
        let theta3: f64 = 1.0 + 2.0 * (1..30).map(|n| q.powi(n * n)).sum::<f64>();
        // |λ'(τ)| = π |λ (1 − λ)| θ₃⁴ with λ = −1
        let direct = 1.0 / (1.0 * PI * 2.0 * theta3.powi(4));
        let got = density_c01(c(-1.0, 0.0)).unwrap().value;
        assert!((got - direct).abs() < 1e-13, "{got} vs {direct}");
    }

    #[test]
    fn constant_k_matches_gamma_oracle() {
        let want = gamma(0.25).powi(4) / (4.0 * PI * PI);
        let alt = PI * PI / gamma(0.75).powi(4);
        assert!((want - alt).abs() < 1e-12);
        assert!((constant_k() - want).abs() < 1e-12);
        assert!((constant_k() - 4.376_879).abs() < 1e-6);
        assert!((constant_k() * density_c01(c(-1.0, 0.0)).unwrap().value - 1.0).abs() < 1e-12);
        assert!((PRINTED_K - constant_k()).abs() > 5e-3);
    }

    #[test]
    fn hempel_examples() {
        let k = constant_k();
        let h = hempel_lower_bound(c(-1.0, 0.0)).unwrap();
        assert!((h - 1.0 / (2.0 * k)).abs() < 1e-15);
        assert!((h - 0.11424).abs() < 1e-5);
        assert!((2.0 * k * h - 1.0).abs() < 1e-15);
        let h = hempel_lower_bound(c(0.1, 0.0)).unwrap();
        assert!((h - 1.0 / (0.2 * (10f64.ln() + k))).abs() < 1e-14);
        assert!(hempel_lower_bound(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn cusp_asymptotics() {
        // λ ~ 1 / (|w| log(16/|w|)) near 0, hence w |log w| λ → 1
        for r in [1e-3, 1e-4, 1e-5, 1e-6] {
            let lam = density_c01(c(r, 0.0)).unwrap().value;
            let model = 1.0 / (r * (16.0 / r).ln());
            assert!((lam / model - 1.0).abs() < 2.0 * r, "r={r}");
        }
        let r: f64 = 1e-12;
        let scaled = r * r.ln().abs() * density_c01(c(r, 0.0)).unwrap().value;
        assert!((scaled - 1.0).abs() < 0.11);
    }

    #[test]
    fn two_puncture_examples() {
        let d = density_c01(c(-1.0, 0.0)).unwrap().value;
        let v = density_two_punctures(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap().value;
        assert_eq!(v, d);
        let v = density_two_punctures(c(0.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0)).unwrap().value;
        assert!((v - d / 2.0).abs() < 1e-15);
        let v = density_two_punctures(c(0.0, 1.0), c(1.0, 1.0), c(-1.0, 1.0)).unwrap().value;
        assert!((v - d).abs() < 1e-14);
        assert!(matches!(
            density_two_punctures(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Err(MetricError::DegeneratePair)
        ));
        assert!(matches!(
            density_two_punctures(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)),
            Err(MetricError::PunctureValue(_))
        ));
    }

    #[test]
    fn disk_pair_value() {
        // λ_{C\{±1}}(0) = λ_{C\{0,1}}(1/2) / 2 and λ_{C\{0,1}}(1/2) = 4/K
        let v = density_c01(c(0.5, 0.0)).unwrap().value;
        assert!((v - 4.0 / constant_k()).abs() < 1e-12);
    }

    fn sweep_point() -> impl Strategy<Value = Complex64> {
        (0.05f64..20.0, 0.0..TWO_PI)
            .prop_map(|(r, t)| Complex64::from_polar(r, t))
            .prop_filter("away from the punctures", |w| {
                w.norm() >= 0.05 && (w - 1.0).norm() >= 0.05
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn round_trip(w in sweep_point()) {
            let t = inverse_lambda(w).unwrap();
            prop_assert!(t.value.im > 0.0);
            let back = modular_lambda(&t);
            prop_assert!((back - w).norm() < 1e-10 * (1.0 + w.norm()), "{} -> {}", w, back);
        }

        #[test]
        fn jacobi_identity(re in -1.0f64..1.0, im in 0.5f64..5.0) {
            let (t2, t3, t4) = theta_constants(&Tau::new(c(re, im)).unwrap());
            let lhs = t3.powi(4);
            prop_assert!((lhs - t2.powi(4) - t4.powi(4)).norm() < 1e-12 * lhs.norm());
        }

        #[test]
        fn density_symmetries(w in sweep_point()) {
            let d = density_c01(w).unwrap().value;
            let d1 = density_c01(c(1.0, 0.0) - w).unwrap().value;
            let d2 = density_c01(w.conj()).unwrap().value;
            prop_assert!((d - d1).abs() < 1e-10 * d);
            prop_assert!((d - d2).abs() < 1e-10 * d);
        }

        #[test]
        fn density_is_conformally_invariant(w in sweep_point()) {
            // w ↦ w/(w − 1) swaps 0 with itself and 1 with ∞
            let g = w / (w - 1.0);
            prop_assume!(g.norm() < 1e6);
            let lhs = density_c01(w).unwrap().value;
            let rhs = density_c01(g).unwrap().value / (w - 1.0).norm_sqr();
            prop_assert!((lhs - rhs).abs() < 1e-10 * lhs);
        }

        #[test]
        fn affine_covariance_two_paths(
            ar in -3.0f64..3.0, ai in -3.0f64..3.0,
            br in -3.0f64..3.0, bi in -3.0f64..3.0,
            w in sweep_point()
        ) {
            let (a, b) = (c(ar, ai), c(br, bi));
            prop_assume!((a - b).norm() > 0.1);
            let z = a + (b - a) * w;
            let v = density_two_punctures(a, b, z).unwrap().value;
            let direct = density_c01((z - a) / (b - a)).unwrap().value;
            prop_assert!((v * (b - a).norm() - direct).abs() <= 1e-15 * direct);
            let swapped = density_two_punctures(b, a, z).unwrap().value;
            prop_assert!((v - swapped).abs() < 1e-12 * v.max(1.0));
        }

        #[test]
        fn hempel_bound_holds(w in sweep_point()) {
            prop_assert!(density_c01(w).unwrap().value >= hempel_lower_bound(w).unwrap());
        }

        #[test]
        fn below_quasihyperbolic(w in sweep_point()) {
            let delta = w.norm().min((w - 1.0).norm());
            prop_assert!(density_c01(w).unwrap().value <= 2.0 / delta);
        }
    }
}
