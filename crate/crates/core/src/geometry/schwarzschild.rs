//! Closed-form maps of the Schwarzschild patch near spacelike infinity.

use super::{causal_type, schwarzschild_rescaled_metric, CausalType, Point, Vector};
use crate::error::{Error, Result};

/// Tortoise coordinate `r* = r + 2m ln(r/2m - 1)`, normalised by r*(4m) = 4m.
pub fn tortoise(r: f64, m: f64) -> Result<f64> {
    if m < 0.0 {
        return Err(Error::Parameter(format!("negative mass {m}")));
    }
    if m == 0.0 {
        return Ok(r);
    }
    if !(r > 2.0 * m) {
        return Err(Error::Domain(format!("tortoise needs r > 2m, got r = {r}, m = {m}")));
    }
    Ok(r + 2.0 * m * (r / (2.0 * m) - 1.0).ln())
}

/// Areal radius with `tortoise(r, m) = rstar`.
pub fn inverse_tortoise(rstar: f64, m: f64) -> Result<f64> {
    if m == 0.0 {
        return Ok(rstar);
    }
    if m < 0.0 || !rstar.is_finite() {
        return Err(Error::Parameter(format!("bad inverse tortoise input r* = {rstar}, m = {m}")));
    }
    let f = |r: f64| r + 2.0 * m * (r / (2.0 * m) - 1.0).ln() - rstar;
    let mut lo = 2.0 * m;
    let mut hi = (rstar.abs() + 4.0 * m).max(4.0 * m);
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    // Newton with bisection fallback; f is increasing and concave.
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let val = f(r);
        if val > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let deriv = 1.0 / (1.0 - 2.0 * m / r);
        let mut next = r - val / deriv;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-15 * r.abs().max(1.0) {
            return Ok(next);
        }
        r = next;
    }
    Ok(r)
}

/// `u²∂_u - 2(1+uR)∂_R` in (u, R).
pub fn morawetz_field(u: f64, big_r: f64) -> Result<Vector> {
    if !(big_r >= 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("({u}, {big_r}) outside the (u, R) chart")));
    }
    Ok([u * u, -2.0 * (1.0 + u * big_r)])
}

/// Approximate Morawetz multiplier `u∂_u + v∂_v` (v = t + r*) written in (u, R):
/// `u∂_u - (1-2mR)R² r* ∂_R`.
pub fn proof_multiplier_field(u: f64, big_r: f64, m: f64) -> Result<Vector> {
    if !(big_r > 0.0) {
        return Err(Error::Domain("multiplier undefined on scri (R = 0)".into()));
    }
    let rstar = tortoise(1.0 / big_r, m)?;
    Ok([u, -(1.0 - 2.0 * m * big_r) * big_r * big_r * rstar])
}

/// Sampled u-range of the audit is `[LEMMA_U_SPAN · u0, u0]`.
pub const LEMMA_U_SPAN: f64 = 10.0;

const INEQUALITY_NAMES: [&str; 6] = [
    "r < r* < (1+eps) r",
    "1 < R r* < 1+eps",
    "0 < R|u| < 1+eps",
    "1-eps < 1-2mR < 1",
    "0 < s = |u|/r* < 1",
    "Morawetz field timelike",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub m: f64,
    pub u0: f64,
    pub epsilon: f64,
    pub names: [&'static str; 6],
    /// Worst margin per inequality (positive means satisfied everywhere).
    pub worst_margin: [f64; 6],
    pub pass: bool,
    /// First sample (u, R) violating some inequality.
    pub violation: Option<(usize, Point)>,
    /// Smallest |u0| found by bisection for which every check passes.
    pub smallest_u0: Option<f64>,
}

fn sample_margins(m: f64, u0: f64, eps: f64, n: usize) -> Result<([f64; 6], Option<(usize, Point)>)> {
    let metric = schwarzschild_rescaled_metric(m, 0.0)?;
    let mut worst = [f64::INFINITY; 6];
    let mut violation = None;
    for i in 0..n {
        let frac = i as f64 / (n - 1).max(1) as f64;
        let u = u0 * LEMMA_U_SPAN.powf(frac);
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            let rstar = u.abs() / s;
            let r = inverse_tortoise(rstar, m)?;
            let big_r = 1.0 / r;
            let two_m_r = 2.0 * m * big_r;
            let margins = [
                (rstar - r).min((1.0 + eps) * r - rstar) / r,
                (big_r * rstar - 1.0).min(1.0 + eps - big_r * rstar),
                (big_r * u.abs()).min(1.0 + eps - big_r * u.abs()),
                if m == 0.0 {
                    // 1 - 2mR ≡ 1: the lower bound holds with margin eps.
                    eps
                } else {
                    (eps - two_m_r).min(two_m_r)
                },
                s.min(1.0 - s),
                {
                    let t = morawetz_field(u, big_r)?;
                    let q = metric.norm2([u, big_r], t)?;
                    let ok = causal_type(&metric, [u, big_r], t)? == CausalType::Timelike;
                    if ok { -q / (u * u) } else { -q.abs() / (u * u) - f64::MIN_POSITIVE }
                },
            ];
            for (w, mg) in worst.iter_mut().zip(margins) {
                *w = w.min(mg);
            }
            if violation.is_none() {
                if let Some(j) = margins.iter().position(|&mg| !(mg > 0.0)) {
                    violation = Some((j, [u, big_r]));
                }
            }
        }
    }
    Ok((worst, violation))
}

/// Audits the decay inequalities and Morawetz timelikeness over `[10·u0, u0] × s ∈ (0,1)`
/// on an `n × n` grid, then bisects for the smallest passing |u0| in [1, 10⁴].
pub fn lemma_audit(m: f64, u0: f64, epsilon: f64, n: usize) -> Result<LemmaReport> {
    if m < 0.0 || !(epsilon > 0.0) || !(u0 < 0.0) || n < 2 {
        return Err(Error::Parameter(format!(
            "lemma audit needs m >= 0, eps > 0, u0 < 0, n >= 2 (m={m}, eps={epsilon}, u0={u0}, n={n})"
        )));
    }
    let (worst, violation) = sample_margins(m, u0, epsilon, n)?;
    let all = |u: f64| -> Result<bool> {
        let (w, _) = sample_margins(m, u, epsilon, n)?;
        Ok(w.iter().all(|&x| x > 0.0))
    };
    let smallest_u0 = {
        let (mut lo, mut hi) = (1.0f64, 1e4f64);
        if all(-lo)? {
            Some(lo)
        } else if !all(-hi)? {
            None
        } else {
            for _ in 0..40 {
                let mid = (lo * hi).sqrt();
                if all(-mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            Some(hi)
        }
    };
    Ok(LemmaReport {
        m,
        u0,
        epsilon,
        names: INEQUALITY_NAMES,
        worst_margin: worst,
        pass: worst.iter().all(|&x| x > 0.0),
        violation,
        smallest_u0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tortoise_values() {
        assert_eq!(tortoise(3.7, 0.0).unwrap(), 3.7);
        assert!((tortoise(4.0, 1.0).unwrap() - 4.0).abs() < 1e-15);
        assert!(tortoise(2.0, 1.0).is_err());
        assert!(tortoise(1.0, 1.0).is_err());
    }

    #[test]
    fn tortoise_matches_quadrature_oracle() {
        // Composite Simpson of (1-2m/r)^{-1} from the anchor r = 4m.
        let m = 1.0;
        let n = 2000;
        let (a, b) = (4.0, 6.0);
        let h = (b - a) / n as f64;
        let f = |r: f64| 1.0 / (1.0 - 2.0 * m / r);
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        let oracle = 4.0 + acc * h / 3.0;
        assert!((oracle - 7.386_294_361_119_89).abs() < 1e-9);
        assert!((tortoise(6.0, m).unwrap() - oracle).abs() < 1e-9);
    }

    #[test]
    fn tortoise_derivative_is_second_order() {
        let (m, r) = (1.0, 5.0);
        let exact = 1.0 / (1.0 - 2.0 * m / r);
        let err = |h: f64| {
            ((tortoise(r + h, m).unwrap() - tortoise(r - h, m).unwrap()) / (2.0 * h) - exact).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn inverse_tortoise_roundtrip() {
        for &m in &[0.5, 1.0, 3.0] {
            for &r in &[2.0 * m + 1e-6, 2.5 * m, 4.0 * m, 17.0, 1e4] {
                let back = inverse_tortoise(tortoise(r, m).unwrap(), m).unwrap();
                assert!((back - r).abs() < 1e-10 * r, "m={m} r={r} back={back}");
            }
        }
    }

    #[test]
    fn morawetz_examples() {
        assert_eq!(morawetz_field(-1.0, 0.0).unwrap(), [1.0, -2.0]);
        let v = morawetz_field(-10.0, 0.1).unwrap();
        assert_eq!(v[0], 100.0);
        assert!(v[1].abs() < 1e-15);
    }

    #[test]
    fn lemma_flat_and_tight_cases() {
        let flat = lemma_audit(0.0, -5.0, 0.1, 20).unwrap();
        assert!(flat.worst_margin[3] > 0.0);
        let tight = lemma_audit(1.0, -3.0, 0.01, 40).unwrap();
        assert!(!tight.pass);
        assert!(tight.violation.is_some());
    }

    #[test]
    fn lemma_pass_is_monotone_in_cutoff() {
        let mut passed = false;
        for u0 in [-3.0, -10.0, -30.0, -100.0, -1000.0] {
            let rep = lemma_audit(1.0, u0, 0.1, 30).unwrap();
            assert!(!passed || rep.pass, "audit regressed at u0 = {u0}");
            passed |= rep.pass;
        }
        assert!(passed);
        let rep = lemma_audit(1.0, -1000.0, 0.1, 30).unwrap();
        let found = rep.smallest_u0.unwrap();
        assert!(found > 3.0 && found < 1000.0);
        assert!(lemma_audit(1.0, -found * 1.001, 0.1, 30).unwrap().pass);
    }
}
