//! Symmetric tridiagonal matrices: products, LDLᵀ solves and Sturm counts.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal<T> {
    pub diag: Vec<T>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<T>,
}

impl<T: Real> SymTridiagonal<T> {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![T::zero(); n], off: vec![T::zero(); n.saturating_sub(1)] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        assert_eq!(x.len(), n);
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y = y + self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y = y + self.off[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn quadratic_form(&self, x: &[T]) -> T {
        self.mul_vec(x).iter().zip(x).fold(T::zero(), |s, (&a, &b)| s + a * b)
    }

    /// Solves `A x = b` by LDLᵀ. Returns `None` unless every pivot is positive,
    /// so success certifies positive definiteness.
    pub fn solve_spd(&self, rhs: &[T]) -> Option<Vec<T>> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        if n == 0 {
            return Some(Vec::new());
        }
        let mut pivots = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        let mut p = self.diag[0];
        if !(p > T::zero()) {
            return None;
        }
        pivots.push(p);
        y.push(rhs[0]);
        for i in 1..n {
            let l = self.off[i - 1] / p;
            p = self.diag[i] - l * self.off[i - 1];
            if !(p > T::zero()) || !p.is_finite() {
                return None;
            }
            pivots.push(p);
            y.push(rhs[i] - l * y[i - 1]);
        }
        let mut x = vec![T::zero(); n];
        x[n - 1] = y[n - 1] / pivots[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (y[i] - self.off[i] * x[i + 1]) / pivots[i];
        }
        Some(x)
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn sturm_count(&self, sigma: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.len() {
            let coupling = if i == 0 { T::zero() } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - sigma - coupling;
            if q == T::zero() {
                q = -tiny;
            }
            if q < T::zero() {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (T, T) {
        let n = self.len();
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for i in 0..n {
            let mut r = T::zero();
            if i > 0 {
                r = r + self.off[i - 1].abs();
            }
            if i + 1 < n {
                r = r + self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// Removes row and column `k`, decoupling its neighbours.
    pub fn without_index(&self, k: usize) -> Self {
        let n = self.len();
        let mut diag = self.diag.clone();
        diag.remove(k);
        let mut off = Vec::with_capacity(n.saturating_sub(2));
        for i in 0..n - 1 {
            if i + 1 == k {
                if k + 1 < n && k > 0 {
                    off.push(T::zero());
                }
            } else if i != k {
                off.push(self.off[i]);
            }
        }
        Self { diag, off }
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymTridiagonal<f64> {
        SymTridiagonal { diag: vec![2.0, 3.0, 4.0, 5.0], off: vec![1.0, 1.0, 1.0] }
    }

    #[test]
    fn solve_matches_product() {
        let a = sample();
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b = a.mul_vec(&x);
        let y = a.solve_spd(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = SymTridiagonal { diag: vec![1.0, 1.0], off: vec![2.0] };
        assert!(a.solve_spd(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn sturm_counts_bracket_known_spectrum() {
        // eigenvalues of tridiag(-1, 2, -1) of size n: 2 - 2cos(kπ/(n+1))
        let n = 7;
        let a = SymTridiagonal { diag: vec![2.0; n], off: vec![-1.0; n - 1] };
        for k in 1..=n {
            let lambda = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert_eq!(a.sturm_count(lambda - 1e-9), k - 1);
            assert_eq!(a.sturm_count(lambda + 1e-9), k);
        }
    }

    #[test]
    fn removing_an_index() {
        let a = sample();
        let b = a.without_index(1);
        assert_eq!(b.diag, vec![2.0, 4.0, 5.0]);
        assert_eq!(b.off, vec![0.0, 1.0]);
        let c = a.without_index(0);
        assert_eq!(c.diag, vec![3.0, 4.0, 5.0]);
        assert_eq!(c.off, vec![1.0, 1.0]);
        let d = a.without_index(3);
        assert_eq!(d.off, vec![1.0, 1.0]);
    }
}
