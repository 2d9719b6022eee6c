//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for the
//! eigenvalues and inverse iteration for the eigenvectors.

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix stored by its diagonal and first
/// off-diagonal (`off[i]` couples rows `i` and `i + 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1), "off-diagonal length mismatch");
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester inertia of `T - x`).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.scale().max(1.0);
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        lo -= 1e-3 * span;
        hi += 1e-3 * span;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Largest eigenvalue.
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalue(self.len() - 1)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }

    /// Eigenvectors for the given (sorted, simple) eigenvalues by inverse
    /// iteration, orthonormalized against each other.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Result<Vec<Vec<f64>>> {
        const MAX_ITER: usize = 8;
        let n = self.len();
        let scale = self.scale();
        let tol = 64.0 * n as f64 * f64::EPSILON * scale;
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        let mut work = vec![0.0; n];

        for (which, &lambda) in eigenvalues.iter().enumerate() {
            let lu = ShiftedLu::factor(self, lambda, scale);
            // Deterministic start vector with components along every eigenvector.
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75 + which as f64).sin())
                .collect();
            normalize(&mut x);
            let mut residual = f64::INFINITY;
            let mut iterations = 0;
            while iterations < MAX_ITER {
                iterations += 1;
                lu.solve(&mut x);
                orthogonalize(&mut x, &vectors);
                orthogonalize(&mut x, &vectors);
                if normalize(&mut x) == 0.0 {
                    return Err(Error::numerical(
                        format!("inverse iteration collapsed for eigenvalue {lambda:.6e}"),
                        iterations,
                        f64::NAN,
                    ));
                }
                self.matvec(&x, &mut work);
                residual = work
                    .iter()
                    .zip(&x)
                    .map(|(ax, xi)| (ax - lambda * xi).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if residual <= tol && iterations >= 2 {
                    break;
                }
            }
            if !(residual <= tol * 1e3) {
                return Err(Error::numerical(
                    format!("inverse iteration did not converge for eigenvalue {lambda:.6e}"),
                    iterations,
                    residual,
                ));
            }
            vectors.push(x);
        }
        Ok(vectors)
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(b).for_each(|(a, b)| *a -= dot * b);
    }
}

/// LU factorization with partial pivoting of `T - sigma I`.
struct ShiftedLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(t: &SymTridiagonal, sigma: f64, scale: f64) -> Self {
        let n = t.len();
        let tiny = f64::EPSILON * scale;
        let mut dl = t.off.clone();
        let mut du = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - sigma).collect();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        // Exactly singular pivots are common when sigma is an eigenvalue to
        // machine precision; perturb them so the solve stays finite.
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        // Keep the iterate representable when the shift is (nearly) exact.
        let peak = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if peak > 1e200 {
            b.iter_mut().for_each(|v| *v /= peak);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(t: &SymTridiagonal) -> DMatrix<f64> {
        let n = t.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = t.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = t.off[i];
                m[(i + 1, i)] = t.off[i];
            }
        }
        m
    }

    fn sample() -> SymTridiagonal {
        let n = 40;
        let diag = (0..n).map(|i| 2.0 + 0.3 * (i as f64).sin()).collect();
        let off = (0..n - 1).map(|i| -1.0 + 0.1 * (i as f64 * 0.7).cos()).collect();
        SymTridiagonal::new(diag, off)
    }

    #[test]
    fn bisection_matches_dense_eigensolver() {
        let t = sample();
        let mut reference: Vec<f64> = dense(&t).symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (i, want) in reference.iter().enumerate() {
            let got = t.eigenvalue(i);
            assert!((got - want).abs() < 1e-12, "eigenvalue {i}: {got} vs {want}");
        }
    }

    #[test]
    fn inverse_iteration_gives_orthonormal_eigenvectors() {
        let t = sample();
        let values: Vec<f64> = (0..10).map(|i| t.eigenvalue(i)).collect();
        let vectors = t.eigenvectors(&values).unwrap();
        let mut y = vec![0.0; t.len()];
        for (i, v) in vectors.iter().enumerate() {
            t.matvec(v, &mut y);
            let res: f64 = y.iter().zip(v).map(|(a, b)| (a - values[i] * b).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-12, "residual {res}");
            for (j, w) in vectors.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn count_below_brackets_spectrum() {
        let t = sample();
        let (lo, hi) = t.gershgorin();
        assert_eq!(t.count_below(lo - 1.0), 0);
        assert_eq!(t.count_below(hi + 1.0), t.len());
    }
}
