//! Numerical checks of the trace inequalities and identities every tail
//! bound rests on.

use super::{exp, spectral_decompose, tail_probability, trace_state, HermitianElement};
use crate::checkers::{CheckResult, TheoremId, Tolerance};
use crate::error::{Error, Result};

/// Golden–Thompson in both forms:
/// `tau(e^{y1+y2}) <= tau(e^{y1/2} e^{y2} e^{y1/2})` and
/// `tau(e^{y1+y2}) <= Re tau(e^{y1} e^{y2})`.
///
/// `rhs` is the smaller of the two right-hand sides, so `holds` requires both.
pub fn check_golden_thompson(
    y1: &HermitianElement,
    y2: &HermitianElement,
    tol: Tolerance,
) -> Result<CheckResult> {
    y1.check_dim(y2)?;
    let lhs = trace_state(&exp(&(y1 + y2))?);
    let half = exp(&y1.scale(0.5))?;
    let e2 = exp(y2)?;
    let symmetric = trace_state(&e2.sandwich(&half)?);
    let e1 = exp(y1)?;
    let product = (e1.matrix() * e2.matrix()).trace().re / y1.dim() as f64;

    let mut result = CheckResult::compare(TheoremId::Gt, lhs, symmetric.min(product), tol);
    result.dims = vec![y1.dim()];
    result.extras.insert("rhs_symmetric".into(), symmetric);
    result.extras.insert("rhs_product".into(), product);
    Ok(result)
}

/// `Prob(x >= t) <= e^{-t} tau(e^x)`.
pub fn check_exp_chebyshev(x: &HermitianElement, t: f64, tol: Tolerance) -> Result<CheckResult> {
    let lhs = tail_probability(x, t)?;
    let rhs = (-t).exp() * trace_state(&exp(x)?);
    let mut result = CheckResult::compare(TheoremId::Cheb, lhs, rhs, tol);
    result.dims = vec![x.dim()];
    result.extras.insert("t".into(), t);
    Ok(result)
}

/// `||x||_p^p = int_0^inf p t^{p-1} Prob(x >= t) dt` for positive `x`.
///
/// The integrand is a step function of `t` that drops by `1/d` at every
/// eigenvalue, so the integral is evaluated exactly as a sum over the jumps:
/// on `[lambda_(k-1), lambda_(k))` the tail equals `(d - k + 1) / d` and
/// `int p t^{p-1} dt = lambda_(k)^p - lambda_(k-1)^p`. The right-hand side is
/// `tau(x^p)` through the functional calculus.
pub fn check_lp_integral_identity(x: &HermitianElement, p: f64, tol: Tolerance) -> Result<CheckResult> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("exponent p = {p} must be finite and >= 1")));
    }
    let sd = spectral_decompose(x)?;
    let scale = sd.spectral_radius().max(1.0);
    if sd.min_eigenvalue() < -1e-10 * scale {
        return Err(Error::Precondition(format!(
            "element is not positive (min eigenvalue {})",
            sd.min_eigenvalue()
        )));
    }
    let d = sd.dim();
    let mut integral = 0.0;
    let mut previous = 0.0f64;
    for (k, &lambda) in sd.eigenvalues().iter().enumerate() {
        let lambda = lambda.max(0.0);
        let level = (d - k) as f64 / d as f64;
        integral += level * (lambda.powf(p) - previous.powf(p));
        previous = lambda;
    }
    let moment = trace_state(&sd.map(|v| v.max(0.0).powf(p))?);

    let rel = (integral - moment).abs() / moment.abs().max(f64::MIN_POSITIVE);
    let mut result = CheckResult::compare(TheoremId::Lpid, rel, 1e-9, tol);
    result.label = format!("p={p}");
    result.dims = vec![d];
    result.extras.insert("integral".into(), integral);
    result.extras.insert("moment".into(), moment);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleStream;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn golden_thompson_commuting_is_equality() {
        let y1 = HermitianElement::diagonal(&[0.3, -1.0, 2.0]);
        let y2 = HermitianElement::diagonal(&[1.0, 0.5, -0.7]);
        let r = check_golden_thompson(&y1, &y2, tol()).unwrap();
        assert!(r.holds);
        assert!((r.lhs - r.extras["rhs_symmetric"]).abs() < 1e-10 * r.lhs);
        assert!((r.lhs - r.extras["rhs_product"]).abs() < 1e-10 * r.lhs);
    }

    #[test]
    fn golden_thompson_with_zero() {
        let mut rng = SampleStream::new(2);
        let y1 = HermitianElement::from_matrix(rng.gue(4)).unwrap();
        let r = check_golden_thompson(&y1, &HermitianElement::zeros(4), tol()).unwrap();
        let reference = trace_state(&exp(&y1).unwrap());
        assert!((r.lhs - reference).abs() < 1e-12 * reference);
        assert!((r.rhs - reference).abs() < 1e-12 * reference);
    }

    #[test]
    fn golden_thompson_random_pair_seed_7() {
        let mut rng = SampleStream::new(7);
        let y1 = HermitianElement::from_matrix(rng.gue(4)).unwrap();
        let y2 = HermitianElement::from_matrix(rng.gue(4)).unwrap();
        let r = check_golden_thompson(&y1, &y2, tol()).unwrap();
        assert!(r.holds);
        assert!(r.ratio <= 1.0);
        assert!(check_golden_thompson(&y1, &HermitianElement::zeros(3), tol()).is_err());
    }

    #[test]
    fn exp_chebyshev_examples() {
        let r = check_exp_chebyshev(&HermitianElement::zeros(2), 1.0, tol()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!((r.rhs - (-1f64).exp()).abs() < 1e-15);
        assert!(r.holds);

        let r = check_exp_chebyshev(&HermitianElement::diagonal(&[2.0, 0.0]), 2.0, tol()).unwrap();
        assert_eq!(r.lhs, 0.5);
        let expected = (-2f64).exp() * (2f64.exp() + 1.0) / 2.0;
        assert!((r.rhs - expected).abs() < 1e-14);
        assert!((r.rhs - 0.5677).abs() < 1e-4);

        let x = HermitianElement::from_matrix(SampleStream::new(3).gue(5)).unwrap();
        let t = x.min_eigenvalue().unwrap();
        let r = check_exp_chebyshev(&x, t, tol()).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.holds);
    }

    #[test]
    fn lp_identity_examples() {
        let r = check_lp_integral_identity(&HermitianElement::identity(3), 2.0, tol()).unwrap();
        assert!((r.extras["integral"] - 1.0).abs() < 1e-15 && (r.extras["moment"] - 1.0).abs() < 1e-15);
        let r = check_lp_integral_identity(&HermitianElement::diagonal(&[2.0, 0.0]), 1.0, tol()).unwrap();
        assert!((r.extras["integral"] - 1.0).abs() < 1e-15 && (r.extras["moment"] - 1.0).abs() < 1e-15);

        let g = SampleStream::new(5).ginibre(5);
        let x = HermitianElement::from_matrix(&g * g.adjoint()).unwrap();
        let r = check_lp_integral_identity(&x, 3.0, tol()).unwrap();
        assert!(r.holds, "{r:?}");

        assert!(matches!(
            check_lp_integral_identity(&HermitianElement::diagonal(&[1.0, -1.0]), 2.0, tol()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn lp_identity_against_quadrature() {
        // Riemann sum of p t^{p-1} Prob(x >= t) on a fine grid.
        let x = HermitianElement::diagonal(&[0.5, 1.25, 2.0]);
        let p = 2.5;
        let n = 400_000;
        let top = 2.0;
        let h = top / n as f64;
        let quad: f64 = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                p * t.powf(p - 1.0) * tail_probability(&x, t).unwrap() * h
            })
            .sum();
        let r = check_lp_integral_identity(&x, p, tol()).unwrap();
        assert!((quad - r.extras["integral"]).abs() < 1e-4);
    }
}
