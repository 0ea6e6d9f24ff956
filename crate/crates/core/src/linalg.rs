//! Small helpers over 3x3 complex matrices.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::Matrix3;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Mat3 = Matrix3<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn commutator(a: &Mat3, b: &Mat3) -> Mat3 {
    a * b - b * a
}

/// Frobenius norm.
pub fn fro_norm(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &Mat3) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn trace_defect(m: &Mat3) -> f64 {
    m.trace().norm()
}

pub fn unitarity_defect(m: &Mat3) -> f64 {
    max_abs(&(m * m.adjoint() - Mat3::identity()))
}

/// exp(-i t H) for Hermitian `h`, via eigendecomposition.
///
/// Exact up to the eigensolver, which is all the piecewise-constant
/// propagation needs at this dimension.
pub fn exp_neg_i_ht(h: &Mat3, t: f64) -> Mat3 {
    let eig = SymmetricEigen::new(*h);
    let mut d = Mat3::zeros();
    for k in 0..3 {
        d[(k, k)] = (-C64::i() * eig.eigenvalues[k] * t).exp();
    }
    eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let u = exp_neg_i_ht(&Mat3::zeros(), 1.7);
        assert!(max_abs(&(u - Mat3::identity())) < 1e-14);
    }

    #[test]
    fn exp_of_diagonal_matches_scalar_phases() {
        let h = Mat3::from_diagonal(&nalgebra::Vector3::new(cr(1.0), cr(-2.0), cr(0.5)));
        let t = 0.3;
        let u = exp_neg_i_ht(&h, t);
        for k in 0..3 {
            let expected = (-C64::i() * h[(k, k)].re * t).exp();
            assert_abs_diff_eq!(u[(k, k)].re, expected.re, epsilon = 1e-14);
            assert_abs_diff_eq!(u[(k, k)].im, expected.im, epsilon = 1e-14);
        }
    }

    #[test]
    fn exp_of_hermitian_is_unitary() {
        let h = Mat3::new(
            cr(1.0),
            c(0.3, 0.7),
            c(-0.2, 0.1),
            c(0.3, -0.7),
            cr(-0.5),
            c(0.0, 1.1),
            c(-0.2, -0.1),
            c(0.0, -1.1),
            cr(2.0),
        );
        let u = exp_neg_i_ht(&h, 2.1);
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn exp_handles_degenerate_eigenvalues() {
        // Quadrupolar-shaped spectrum: two equal eigenvalues.
        let h = Mat3::from_diagonal(&nalgebra::Vector3::new(cr(1.0), cr(-2.0), cr(1.0)));
        let u = exp_neg_i_ht(&h, 0.9);
        assert!(unitarity_defect(&u) < 1e-12);
        assert!((u[(0, 0)] - u[(2, 2)]).norm() < 1e-14);
    }
}
