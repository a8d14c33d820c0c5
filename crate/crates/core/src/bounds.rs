//! Closed-form tail, moment and norm bounds.
//!
//! Pure scalar functions. Values above 1 are returned as is; callers compare
//! against them without clamping.

use crate::error::{Error, Result};

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be positive and finite")))
    }
}

fn require_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} = {v} must be nonnegative and finite")))
    }
}

fn require_nonnegative_all(name: &str, values: &[f64]) -> Result<()> {
    values.iter().try_for_each(|&v| require_nonnegative(name, v))
}

fn require_same_len(name: &str, values: &[f64], n: usize) -> Result<()> {
    if values.len() == n {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} has {} entries, expected {n}",
            values.len()
        )))
    }
}

/// `h(s) = 2 sum_{k>=2} s^{k-2} / k! = 2 (e^s - 1 - s) / s^2`.
pub fn h_eval(s: f64) -> f64 {
    if s.abs() < 0.5 {
        // 2 sum_{m>=0} s^m / (m+2)!; the closed form cancels badly near 0.
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 1..20 {
            term *= s / (m as f64 + 2.0);
            sum += term;
        }
        sum
    } else {
        2.0 * (s.exp_m1() - s) / (s * s)
    }
}

/// `2 exp(-lambda^2 / (2 sum c_j^2))`.
pub fn azuma_bound(lambda: f64, c: &[f64]) -> Result<f64> {
    require_positive("lambda", lambda)?;
    if c.is_empty() {
        return Err(Error::Parameter("c must have at least one entry".into()));
    }
    c.iter().try_for_each(|&v| require_positive("c_j", v))?;
    let sum_sq: f64 = c.iter().map(|v| v * v).sum();
    Ok(2.0 * (-lambda * lambda / (2.0 * sum_sq)).exp())
}

/// Same closed form as [`azuma_bound`], with `c_j` bounding the independent
/// summands.
pub fn hoeffding_bound(t: f64, c: &[f64]) -> Result<f64> {
    azuma_bound(t, c)
}

/// `2 exp(-t^2 / (2n))`.
pub fn scalar_chernoff_bound(t: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    require_nonnegative("t", t)?;
    Ok(2.0 * (-t * t / (2.0 * n as f64)).exp())
}

/// `sum_j (sigma_j^2 + D b_j + a_j^2) + M lambda / 3`.
pub fn supermartingale_denominator(
    lambda: f64,
    sigma_sq: &[f64],
    a: &[f64],
    b: &[f64],
    m: f64,
    d: f64,
) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("M", m)?;
    require_nonnegative_all("sigma_j^2", sigma_sq)?;
    require_same_len("a", a, sigma_sq.len())?;
    require_same_len("b", b, sigma_sq.len())?;
    require_nonnegative_all("a_j", a)?;
    require_nonnegative_all("b_j", b)?;
    if !d.is_finite() {
        return Err(Error::Parameter(format!("D = {d} must be finite")));
    }
    let sum: f64 = sigma_sq
        .iter()
        .zip(a)
        .zip(b)
        .map(|((s, a), b)| s + d * b + a * a)
        .sum();
    Ok(sum + m * lambda / 3.0)
}

/// One-sided supermartingale bound
/// `exp(-lambda^2 / (2 (sum_j (sigma_j^2 + D b_j + a_j^2) + M lambda / 3)))`.
///
/// Returns [`Error::Degenerate`] when the denominator is not positive.
pub fn supermartingale_bound(
    lambda: f64,
    sigma_sq: &[f64],
    a: &[f64],
    b: &[f64],
    m: f64,
    d: f64,
) -> Result<f64> {
    let denom = supermartingale_denominator(lambda, sigma_sq, a, b, m, d)?;
    if denom <= 0.0 {
        return Err(Error::Degenerate(denom));
    }
    Ok((-lambda * lambda / (2.0 * denom)).exp())
}

/// Two-sided (factor 2) form of [`supermartingale_bound`].
pub fn supermartingale_two_sided_bound(
    lambda: f64,
    sigma_sq: &[f64],
    a: &[f64],
    b: &[f64],
    m: f64,
    d: f64,
) -> Result<f64> {
    Ok(2.0 * supermartingale_bound(lambda, sigma_sq, a, b, m, d)?)
}

/// `2 exp(-lambda^2 / (2 (sum_j (sigma_j^2 + a_j^2) + M lambda / 3)))`.
pub fn martingale_variance_bound(lambda: f64, sigma_sq: &[f64], a: &[f64], m: f64) -> Result<f64> {
    let zeros = vec![0.0; sigma_sq.len()];
    supermartingale_two_sided_bound(lambda, sigma_sq, a, &zeros, m, 0.0)
}

/// `exp(lambda^2 K^2 / (2 (1 - lambda M / 3)))` for `0 <= lambda < 3 / M`.
pub fn mgf_bound(lambda: f64, k_sq: f64, m: f64) -> Result<f64> {
    require_positive("M", m)?;
    require_nonnegative("K^2", k_sq)?;
    require_nonnegative("lambda", lambda)?;
    let limit = 3.0 / m;
    if lambda >= limit {
        return Err(Error::Range(format!("lambda = {lambda} must be below 3/M = {limit}")));
    }
    Ok((lambda * lambda * k_sq / (2.0 * (1.0 - lambda * m / 3.0))).exp())
}

/// `2 exp(-3 t^2 / (6 sum_j sigma_j^2 + 2 t M))`.
pub fn cor34_tail_bound(t: f64, sigma_sq: &[f64], m: f64) -> Result<f64> {
    require_positive("t", t)?;
    require_positive("M", m)?;
    require_nonnegative_all("sigma_j^2", sigma_sq)?;
    let k_sq: f64 = sigma_sq.iter().sum();
    Ok(2.0 * (-3.0 * t * t / (6.0 * k_sq + 2.0 * t * m)).exp())
}

/// `sqrt(3p) K + sqrt(8) p M_max` for `p >= 2`.
pub fn lp_norm_bound(p: f64, k: f64, m_max: f64) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::Range(format!("p = {p} must be finite and >= 2")));
    }
    require_nonnegative("K", k)?;
    require_nonnegative("M_max", m_max)?;
    Ok((3.0 * p).sqrt() * k + 8f64.sqrt() * p * m_max)
}

/// `exp(-lambda^2 / (2 b^2 + (2/3) lambda M))`.
pub fn bernstein_bound(lambda: f64, b_total_sq: f64, m: f64) -> Result<f64> {
    require_nonnegative("lambda", lambda)?;
    require_nonnegative("b^2", b_total_sq)?;
    require_positive("M", m)?;
    if lambda == 0.0 {
        return Ok(1.0);
    }
    Ok((-lambda * lambda / (2.0 * b_total_sq + 2.0 / 3.0 * lambda * m)).exp())
}

/// Per-step slack `a_j = max(M_j - M, 0)`.
pub fn cor36_slack(m_steps: &[f64], m: f64) -> Vec<f64> {
    m_steps.iter().map(|&mj| if mj <= m { 0.0 } else { mj - m }).collect()
}

/// Variance bound with the slack `a_j` chosen from per-step maxima `M_j`:
/// `2 exp(-lambda^2 / (2 (sum_j (sigma_j^2 + a_j^2) + M lambda / 3)))`.
pub fn cor36_bound(lambda: f64, sigma_sq: &[f64], m_steps: &[f64], m: f64) -> Result<f64> {
    require_same_len("M_steps", m_steps, sigma_sq.len())?;
    if m_steps.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("M_j must be finite".into()));
    }
    martingale_variance_bound(lambda, sigma_sq, &cor36_slack(m_steps, m), m)
}

/// The per-step form as usually displayed,
/// `2 exp(-lambda^2 / (2 sum_j sigma_j^2 + sum_{M_j > M} (M_j - M)^2 + M lambda / 3))`.
///
/// Its denominator is smaller than that of [`cor36_bound`] whenever some
/// `M_j > M` or `lambda > 0`, so it is a strictly stronger claim than the
/// variance bound it is obtained from. The checkers evaluate it alongside
/// [`cor36_bound`] without using it for the verdict.
pub fn cor36_display_bound(lambda: f64, sigma_sq: &[f64], m_steps: &[f64], m: f64) -> Result<f64> {
    require_positive("lambda", lambda)?;
    require_positive("M", m)?;
    require_nonnegative_all("sigma_j^2", sigma_sq)?;
    require_same_len("M_steps", m_steps, sigma_sq.len())?;
    if m_steps.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("M_j must be finite".into()));
    }
    let variance: f64 = sigma_sq.iter().sum();
    let slack: f64 = cor36_slack(m_steps, m).iter().map(|a| a * a).sum();
    Ok(2.0 * (-lambda * lambda / (2.0 * variance + slack + m * lambda / 3.0)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    /// Direct partial sums of `2 sum_{k>=2} s^{k-2}/k!`.
    fn h_series(s: f64, terms: usize) -> f64 {
        let mut term = 0.5; // s^0 / 2!
        let mut sum = term;
        for k in 3..terms + 2 {
            term *= s / k as f64;
            sum += term;
        }
        2.0 * sum
    }

    #[test]
    fn h_basic() {
        assert_eq!(h_eval(0.0), 1.0);
        assert!(h_eval(-5.0) <= 1.0);
        for &s in &[0.1, 1.0, 2.0, 2.9] {
            assert!(h_eval(s) <= 1.0 / (1.0 - s / 3.0));
        }
        assert!(close(h_eval(1e-7), 1.0 + 1e-7 / 3.0, 1e-15));
    }

    #[test]
    fn h_matches_series() {
        let mut s = -10.0;
        while s <= 2.99 {
            let direct = h_series(s, 200);
            assert!(close(h_eval(s), direct, 1e-12), "s = {s}: {} vs {direct}", h_eval(s));
            s += 0.01;
        }
        for &s in &[-1e-3, -5e-4, 1e-9, 0.499, 0.501, -0.501] {
            assert!(close(h_eval(s), h_series(s, 200), 1e-14));
        }
    }

    #[test]
    fn h_is_monotone_on_positive_axis() {
        let mut prev = h_eval(0.0);
        for i in 1..2000 {
            let v = h_eval(i as f64 * 0.005);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn azuma_examples() {
        assert!(close(azuma_bound(1e-12, &[1.0]).unwrap(), 2.0, 1e-15));
        assert!(close(azuma_bound(1.0, &[1.0]).unwrap(), 2.0 * (-0.5f64).exp(), 1e-15));
        assert!(close(azuma_bound(1.0, &[1.0]).unwrap(), 1.2130613, 1e-7));
        assert!(close(azuma_bound(2.0, &[1.0, 1.0]).unwrap(), 2.0 * (-1f64).exp(), 1e-15));
        assert!(close(azuma_bound(2.0, &[1.0, 1.0]).unwrap(), 0.7357589, 1e-7));
        assert!(azuma_bound(1.0, &[]).is_err());
        assert!(azuma_bound(1.0, &[1.0, 0.0]).is_err());
        assert!(azuma_bound(0.0, &[1.0]).is_err());
        assert_eq!(hoeffding_bound(2.0, &[1.0, 1.0]), azuma_bound(2.0, &[1.0, 1.0]));
    }

    #[test]
    fn chernoff_examples() {
        assert_eq!(scalar_chernoff_bound(0.0, 3).unwrap(), 2.0);
        assert!(close(scalar_chernoff_bound(1.0, 1).unwrap(), 2.0 * (-0.5f64).exp(), 1e-15));
        assert!(scalar_chernoff_bound(1.0, 0).is_err());
        for n in 1..8 {
            for &t in &[0.5, 1.0, 3.0] {
                let a = azuma_bound(t, &vec![1.0; n]).unwrap();
                assert!(close(scalar_chernoff_bound(t, n).unwrap(), a, 1e-14));
            }
        }
    }

    #[test]
    fn supermartingale_examples() {
        let v = supermartingale_bound(1.0, &[1.0], &[0.0], &[0.0], 3.0, 7.0).unwrap();
        assert!(close(v, (-0.25f64).exp(), 1e-15));
        assert!(close(v, 0.7788008, 1e-7));
        let r = supermartingale_bound(1.0, &[0.5], &[0.0], &[2.0], 0.3, -1.0);
        assert!(matches!(r, Err(Error::Degenerate(d)) if d <= 0.0));
        let s = [0.4, 0.9];
        let reduced = supermartingale_bound(1.3, &s, &[0.0, 0.0], &[0.0, 0.0], 2.0, -4.0).unwrap();
        assert!(close(reduced, (-1.69f64 / (2.0 * (1.3 + 2.0 * 1.3 / 3.0))).exp(), 1e-14));
        assert!(supermartingale_bound(1.0, &[1.0], &[0.0, 1.0], &[0.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn variance_bound_examples() {
        assert!(close(martingale_variance_bound(1e-12, &[1.0], &[0.0], 1.0).unwrap(), 2.0, 1e-12));
        assert!(close(martingale_variance_bound(1.0, &[1.0], &[0.0], 3.0).unwrap(), 2.0 * (-0.25f64).exp(), 1e-15));
        let (s, a) = ([0.3, 1.1, 0.2], [0.5, 0.0, 0.25]);
        for &d in &[-3.0, 0.0, 5.0] {
            let two = martingale_variance_bound(0.8, &s, &a, 1.7).unwrap();
            let one = supermartingale_bound(0.8, &s, &a, &[0.0; 3], 1.7, d).unwrap();
            assert!(close(two, 2.0 * one, 1e-14));
        }
    }

    #[test]
    fn mgf_examples() {
        assert!(close(mgf_bound(1e-9, 1.0, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(mgf_bound(1.0, 1.0, 1.5).unwrap(), 1f64.exp(), 1e-15));
        assert!(matches!(mgf_bound(1.0, 1.0, 3.0), Err(Error::Range(_))));
        assert!(matches!(mgf_bound(2.0, 1.0, 3.0), Err(Error::Range(_))));
    }

    #[test]
    fn cor34_examples() {
        assert!(close(cor34_tail_bound(1e-12, &[1.0], 1.0).unwrap(), 2.0, 1e-15));
        let v = cor34_tail_bound(1.0, &[1.0], 3.0).unwrap();
        assert!(close(v, 2.0 * (-0.25f64).exp(), 1e-15));
        assert!(close(v, martingale_variance_bound(1.0, &[1.0], &[0.0], 3.0).unwrap(), 1e-14));
        assert!(close(cor34_tail_bound(2.0, &[0.0], 1.0).unwrap(), 2.0 * (-3f64).exp(), 1e-15));
    }

    #[test]
    fn lp_examples() {
        assert_eq!(lp_norm_bound(4.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(close(lp_norm_bound(2.0, 1.0, 0.0).unwrap(), 6f64.sqrt(), 1e-15));
        assert!(close(lp_norm_bound(2.0, 1.0, 0.0).unwrap(), 2.4494897, 1e-7));
        assert!(close(lp_norm_bound(3.0, 0.0, 1.0).unwrap(), 3.0 * 8f64.sqrt(), 1e-15));
        assert!(close(lp_norm_bound(3.0, 0.0, 1.0).unwrap(), 8.4852814, 1e-7));
        assert!(matches!(lp_norm_bound(1.5, 1.0, 1.0), Err(Error::Range(_))));
    }

    #[test]
    fn bernstein_examples() {
        assert_eq!(bernstein_bound(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(close(bernstein_bound(1.0, 1.0, 3.0).unwrap(), (-0.25f64).exp(), 1e-15));
        assert!(close(bernstein_bound(2.0, 0.0, 3.0).unwrap(), (-1f64).exp(), 1e-15));
    }

    #[test]
    fn cor36_examples() {
        let s = [0.5, 0.2];
        assert_eq!(
            cor36_bound(1.0, &s, &[0.3, 0.9], 1.0).unwrap(),
            martingale_variance_bound(1.0, &s, &[0.0, 0.0], 1.0).unwrap()
        );
        assert_eq!(cor36_slack(&[2.0, 0.5, 1.0], 1.0), vec![1.0, 0.0, 0.0]);
        // a = (1): 2 exp(-1 / (2 (1 + 1 + 1/3)))
        let v = cor36_bound(1.0, &[1.0], &[2.0], 1.0).unwrap();
        assert!(close(v, 2.0 * (-3.0f64 / 14.0).exp(), 1e-15));
        // 2 exp(-1 / (2 + 1 + 1/3))
        let display = cor36_display_bound(1.0, &[1.0], &[2.0], 1.0).unwrap();
        assert!(close(display, 2.0 * (-3.0f64 / 10.0).exp(), 1e-15));
        assert!(display < v);
        let big = cor36_bound(1.0, &[1.0], &[2.0], 1e12).unwrap();
        assert!(close(big, martingale_variance_bound(1.0, &[1.0], &[0.0], 1e12).unwrap(), 1e-14));
    }

    #[test]
    fn monotonicity() {
        let lambdas: Vec<f64> = (1..60).map(|i| i as f64 * 0.1).collect();
        for w in lambdas.windows(2) {
            let (l0, l1) = (w[0], w[1]);
            assert!(azuma_bound(l1, &[1.0, 0.5]).unwrap() < azuma_bound(l0, &[1.0, 0.5]).unwrap());
            assert!(martingale_variance_bound(l1, &[0.5], &[0.2], 1.0).unwrap() < martingale_variance_bound(l0, &[0.5], &[0.2], 1.0).unwrap());
            assert!(supermartingale_bound(l1, &[0.5], &[0.2], &[0.1], 1.0, 0.5).unwrap() < supermartingale_bound(l0, &[0.5], &[0.2], &[0.1], 1.0, 0.5).unwrap());
            assert!(cor34_tail_bound(l1, &[0.5], 1.0).unwrap() < cor34_tail_bound(l0, &[0.5], 1.0).unwrap());
            assert!(bernstein_bound(l1, 0.5, 1.0).unwrap() < bernstein_bound(l0, 0.5, 1.0).unwrap());
            assert!(cor36_bound(l1, &[0.5], &[2.0], 1.0).unwrap() < cor36_bound(l0, &[0.5], &[2.0], 1.0).unwrap());
            assert!(scalar_chernoff_bound(l1, 3).unwrap() < scalar_chernoff_bound(l0, 3).unwrap());
        }
        let params: Vec<f64> = (0..40).map(|i| i as f64 * 0.25).collect();
        for w in params.windows(2) {
            let (p0, p1) = (w[0], w[1]);
            assert!(azuma_bound(1.0, &[p1 + 0.1]).unwrap() >= azuma_bound(1.0, &[p0 + 0.1]).unwrap());
            assert!(martingale_variance_bound(1.0, &[p1], &[0.1], 1.0).unwrap() >= martingale_variance_bound(1.0, &[p0], &[0.1], 1.0).unwrap());
            assert!(martingale_variance_bound(1.0, &[0.1], &[p1], 1.0).unwrap() >= martingale_variance_bound(1.0, &[0.1], &[p0], 1.0).unwrap());
            assert!(martingale_variance_bound(1.0, &[0.1], &[0.1], p1 + 0.1).unwrap() >= martingale_variance_bound(1.0, &[0.1], &[0.1], p0 + 0.1).unwrap());
            assert!(bernstein_bound(1.0, p1, 1.0).unwrap() >= bernstein_bound(1.0, p0, 1.0).unwrap());
            assert!(bernstein_bound(1.0, 1.0, p1 + 0.1).unwrap() >= bernstein_bound(1.0, 1.0, p0 + 0.1).unwrap());
            assert!(supermartingale_bound(1.0, &[0.1], &[0.1], &[p1], 1.0, 0.5).unwrap() >= supermartingale_bound(1.0, &[0.1], &[0.1], &[p0], 1.0, 0.5).unwrap());
            assert!(mgf_bound(0.1, p1, 1.0).unwrap() >= mgf_bound(0.1, p0, 1.0).unwrap());
            assert!(lp_norm_bound(2.0 + p1, 1.0, 1.0).unwrap() >= lp_norm_bound(2.0 + p0, 1.0, 1.0).unwrap());
        }
    }

    #[test]
    fn scale_covariance() {
        for &alpha in &[0.1, 0.5, 3.0, 17.0] {
            let (l, c) = (1.3, [0.4, 1.2]);
            let cs: Vec<f64> = c.iter().map(|v| v * alpha).collect();
            assert!(close(azuma_bound(alpha * l, &cs).unwrap(), azuma_bound(l, &c).unwrap(), 1e-13));

            let (s, a, m) = ([0.3, 0.8], [0.1, 0.2], 0.7);
            let s2: Vec<f64> = s.iter().map(|v| v * alpha * alpha).collect();
            let a2: Vec<f64> = a.iter().map(|v| v * alpha).collect();
            assert!(close(
                martingale_variance_bound(alpha * l, &s2, &a2, alpha * m).unwrap(),
                martingale_variance_bound(l, &s, &a, m).unwrap(),
                1e-13
            ));
            assert!(close(
                cor34_tail_bound(alpha * l, &s2, alpha * m).unwrap(),
                cor34_tail_bound(l, &s, m).unwrap(),
                1e-13
            ));
            assert!(close(
                bernstein_bound(alpha * l, alpha * alpha * 0.6, alpha * m).unwrap(),
                bernstein_bound(l, 0.6, m).unwrap(),
                1e-13
            ));
            // b_j scales like x (D b_j ~ sigma^2), D like x
            assert!(close(
                supermartingale_bound(alpha * l, &s2, &a2, &[alpha * 0.2, alpha * 0.1], alpha * m, alpha * 0.5).unwrap(),
                supermartingale_bound(l, &s, &a, &[0.2, 0.1], m, 0.5).unwrap(),
                1e-13
            ));
            // MGF: lambda -> lambda / alpha, K -> alpha K, M -> alpha M
            assert!(close(
                mgf_bound(0.4 / alpha, alpha * alpha * 0.9, alpha * m).unwrap(),
                mgf_bound(0.4, 0.9, m).unwrap(),
                1e-13
            ));
            assert!(close(
                lp_norm_bound(3.0, alpha * 0.9, alpha * 0.2).unwrap(),
                alpha * lp_norm_bound(3.0, 0.9, 0.2).unwrap(),
                1e-13
            ));
        }
    }
}
