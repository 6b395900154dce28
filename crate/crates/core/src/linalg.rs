//! Dense complex decompositions.
//!
//! Matrices are stored as nalgebra types throughout the crate; singular value
//! decompositions are computed with faer in double precision and converted
//! back to the working scalar type.

use faer::{c64, Mat};
use nalgebra::{Complex, DMatrix, DVector};

use crate::scalar::Real;

fn to_faer<T: Real>(a: &DMatrix<Complex<T>>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        let z = a[(i, j)];
        c64::new(z.re.as_f64(), z.im.as_f64())
    })
}

fn from_faer<T: Real>(m: faer::MatRef<'_, c64>) -> DMatrix<Complex<T>> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        Complex::new(T::lit(z.re), T::lit(z.im))
    })
}

/// Thin singular value decomposition `A = U diag(s) V^*`.
#[derive(Debug, Clone)]
pub struct Svd<T: Real> {
    /// Non-increasing.
    pub singular_values: Vec<T>,
    pub u: DMatrix<Complex<T>>,
    pub v: DMatrix<Complex<T>>,
}

/// Thin SVD of `a`. Falls back to an empty decomposition (all singular
/// values zero) only when the iteration fails to converge.
pub fn svd<T: Real>(a: &DMatrix<Complex<T>>) -> Svd<T> {
    let (n, p) = a.shape();
    let k = n.min(p);
    match to_faer(a).thin_svd() {
        Ok(dec) => {
            let s = dec.S().column_vector();
            Svd {
                singular_values: (0..k).map(|i| T::lit(s[i].re)).collect(),
                u: from_faer(dec.U()),
                v: from_faer(dec.V()),
            }
        }
        Err(_) => Svd {
            singular_values: vec![T::zero(); k],
            u: DMatrix::identity(n, k),
            v: DMatrix::identity(p, k),
        },
    }
}

/// Full set of left singular vectors (`n x n`) together with the singular values.
pub fn left_singular<T: Real>(a: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    let (n, p) = a.shape();
    let k = n.min(p);
    match to_faer(a).svd() {
        Ok(dec) => {
            let s = dec.S().column_vector();
            ((0..k).map(|i| T::lit(s[i].re)).collect(), from_faer(dec.U()))
        }
        Err(_) => (vec![T::zero(); k], DMatrix::identity(n, n)),
    }
}

impl<T: Real> Svd<T> {
    /// `sigma_min / sigma_max`, zero for a zero matrix.
    pub fn rcond(&self) -> T {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if hi > T::zero() => lo / hi,
            _ => T::zero(),
        }
    }

    /// Least-norm solution of `A x = b`, discarding singular values at or
    /// below `cutoff`.
    pub fn solve(&self, b: &DVector<Complex<T>>, cutoff: T) -> DVector<Complex<T>> {
        let mut coeffs = self.u.adjoint() * b;
        for (c, &s) in coeffs.iter_mut().zip(&self.singular_values) {
            *c = if s > cutoff { *c / s } else { Complex::new(T::zero(), T::zero()) };
        }
        &self.v * coeffs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_all_ones() {
        for n in [3usize, 5, 11, 12] {
            let a = DMatrix::from_element(n, n, Complex::new(1.0f64, 0.0));
            let dec = svd(&a);
            assert!((dec.singular_values[0] - n as f64).abs() < 1e-12);
            assert!(dec.singular_values[1] < 1e-12);
            let (s, u) = left_singular(&a);
            assert_eq!(u.shape(), (n, n));
            assert!((s[0] - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn recomposes_and_solves() {
        let a = DMatrix::from_fn(6, 4, |i, j| Complex::new((i * 4 + j) as f64 * 0.3, ((i + 2 * j) as f64).sin()));
        let dec = svd(&a);
        let s = DMatrix::from_diagonal(&DVector::from_iterator(4, dec.singular_values.iter().map(|&x| Complex::new(x, 0.0))));
        let rec = &dec.u * s * dec.v.adjoint();
        assert!((rec - &a).norm() < 1e-12);
        assert!(dec.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let x = DVector::from_fn(4, |i, _| Complex::new(i as f64, 1.0));
        let b = &a * &x;
        assert!((dec.solve(&b, 1e-12) - x).norm() < 1e-10);
    }

    #[test]
    fn single_precision_path() {
        let a = DMatrix::from_element(5, 5, Complex::new(1.0f32, 0.0));
        let dec = svd(&a);
        assert!((dec.singular_values[0] - 5.0).abs() < 1e-5);
    }
}
