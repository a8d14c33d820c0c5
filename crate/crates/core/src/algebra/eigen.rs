//! Cyclic Jacobi eigensolver for complex Hermitian matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CMatrix, HermitianElement};
use crate::error::{Error, Result};

/// Off-diagonal Frobenius norm at convergence, relative to the full norm.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-13;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order with one orthonormal eigenvector per column.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_radius(&self) -> f64 {
        self.min_eigenvalue().abs().max(self.max_eigenvalue().abs())
    }

    /// Rank-one projection onto the `i`-th eigenvector.
    pub fn projection(&self, i: usize) -> CMatrix {
        let v = self.eigenvectors.column(i);
        &v * v.adjoint()
    }

    /// Spectral projections grouped by distinct eigenvalue. Eigenvalues closer
    /// than `tol` to the running group representative share a projection.
    pub fn grouped_projections(&self, tol: f64) -> Vec<(f64, usize, CMatrix)> {
        let mut groups: Vec<(f64, usize, CMatrix)> = Vec::new();
        for (i, &lambda) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some((rep, count, proj)) if (lambda - *rep).abs() <= tol => {
                    *proj += self.projection(i);
                    *count += 1;
                }
                _ => groups.push((lambda, 1, self.projection(i))),
            }
        }
        groups
    }

    /// `sum_i f(lambda_i) P_i`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<HermitianElement> {
        let mut values = Vec::with_capacity(self.dim());
        for &lambda in &self.eigenvalues {
            let v = f(lambda);
            if !v.is_finite() {
                return Err(Error::Domain(lambda));
            }
            values.push(v);
        }
        Ok(self.synthesize(&values))
    }

    pub fn reconstruct(&self) -> HermitianElement {
        self.synthesize(&self.eigenvalues)
    }

    fn synthesize(&self, values: &[f64]) -> HermitianElement {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &w) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        HermitianElement::from_matrix_unchecked(scaled * v.adjoint())
    }
}

pub fn spectral_decompose(x: &HermitianElement) -> Result<SpectralDecomposition> {
    let (eigenvalues, eigenvectors) = jacobi(x.matrix(), true)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: eigenvectors.expect("requested"),
    })
}

/// Ascending eigenvalues without accumulating eigenvectors.
pub(crate) fn eigenvalues(x: &HermitianElement) -> Result<Vec<f64>> {
    Ok(jacobi(x.matrix(), false)?.0)
}

fn off_diagonal_norm_sq(a: &CMatrix) -> f64 {
    let d = a.nrows();
    let mut s = 0.0;
    for q in 0..d {
        for p in 0..d {
            if p != q {
                s += a[(p, q)].norm_sqr();
            }
        }
    }
    s
}

fn jacobi(input: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let d = input.nrows();
    let mut a = input.clone();
    let mut v: Option<CMatrix> = want_vectors.then(|| DMatrix::identity(d, d));
    let total = a.norm_squared();
    let threshold_sq = (CONVERGENCE_THRESHOLD * CONVERGENCE_THRESHOLD) * total;

    let mut converged = d <= 1 || total == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm_sq(&a) <= threshold_sq {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..d - 1 {
            for q in p + 1..d {
                rotate(&mut a, v.as_mut(), p, q);
            }
        }
    }
    if !converged {
        return Err(Error::SolverFailure {
            sweeps,
            off: off_diagonal_norm_sq(&a).sqrt(),
        });
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<f64> = (0..d).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = v.map(|v| DMatrix::from_fn(d, d, |r, c| v[(r, order[c])]));
    Ok((eigenvalues, eigenvectors))
}

/// Annihilate `a[(p, q)]` with the unitary `U = diag(1, e^{-i phi}) R(theta)`
/// acting on coordinates `p, q`, replacing `a` by `U^* a U` and `v` by `v U`.
fn rotate(a: &mut CMatrix, v: Option<&mut CMatrix>, p: usize, q: usize) {
    let g = a[(p, q)];
    let r = g.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if r < 1e-300 || r <= f64::EPSILON * 1e-6 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = g / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let upp = Complex64::new(c, 0.0);
    let upq = Complex64::new(s, 0.0);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    let d = a.nrows();
    for k in 0..d {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * upp + akq * uqp;
        a[(k, q)] = akp * upq + akq * uqq;
    }
    // Rows p, q of U^* (a U): outside the 2x2 block the result is Hermitian,
    // so they are the conjugates of the updated columns.
    for k in [p, q] {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
        a[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
    }
    for k in 0..d {
        if k != p && k != q {
            a[(p, k)] = a[(k, p)].conj();
            a[(q, k)] = a[(k, q)].conj();
        }
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    let Some(v) = v else { return };
    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * upp + vkq * uqp;
        v[(k, q)] = vkp * upq + vkq * uqq;
    }
}
