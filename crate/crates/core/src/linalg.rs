//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a thin layer over `nalgebra`; the functions exist so the
//! rest of the crate speaks in terms of operator norms, HS inner products and
//! numerical ranks rather than raw decompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest singular value. Zero for empty matrices.
pub fn op_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, s| acc.max(*s))
}

/// Hilbert-Schmidt inner product `tr(a* b)`, linear in the second slot.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &CMat) -> f64 {
    a.norm()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn vec_max_abs(v: &CVec) -> f64 {
    v.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Eigenvalues of the Hermitian part `(m + m*)/2`, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * real(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Square root and inverse square root of a Hermitian positive definite matrix.
///
/// Returns `None` when the smallest eigenvalue is not above `floor`.
pub fn hermitian_sqrt_pair(m: &CMat, floor: f64) -> Option<(CMat, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Some((CMat::zeros(0, 0), CMat::zeros(0, 0)));
    }
    let h = (m + m.adjoint()) * real(0.5);
    let eig = SymmetricEigen::new(h);
    if eig.eigenvalues.iter().any(|&l| l <= floor) {
        return None;
    }
    let q = &eig.eigenvectors;
    let sqrt_d = CMat::from_diagonal(&eig.eigenvalues.map(|l| real(l.sqrt())));
    let isqrt_d = CMat::from_diagonal(&eig.eigenvalues.map(|l| real(1.0 / l.sqrt())));
    Some((q * sqrt_d * q.adjoint(), q * isqrt_d * q.adjoint()))
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `rel * largest`.
pub fn numerical_rank(m: &CMat, rel: f64) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => sv.iter().filter(|&&s| s > rel * top).count(),
    }
}

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| random_complex(rng))
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phases of
/// the R diagonal folded back into Q.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| random_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `vec` of a matrix in column-major order.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.iter().copied())
}

/// Format a complex number with 17 significant digits per component.
pub fn format_complex(z: C64) -> String {
    format!("({}, {})", format_real(z.re), format_real(z.im))
}

/// 17 significant digits, scientific notation; `-0` is normalised to `0`.
pub fn format_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn op_norm_of_diagonal() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![real(2.0), c(0.0, -3.0)]));
        assert!((op_norm(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(&mut rng, 3);
        let defect = max_abs(&(u.adjoint() * &u - CMat::identity(3, 3)));
        assert!(defect < 1e-12);
    }

    #[test]
    fn sqrt_pair_inverts() {
        let m = CMat::from_row_slice(2, 2, &[real(2.0), c(0.0, 1.0), c(0.0, -1.0), real(3.0)]);
        let (s, si) = hermitian_sqrt_pair(&m, 1e-12).unwrap();
        assert!(max_abs(&(&s * &s - &m)) < 1e-12);
        assert!(max_abs(&(&s * &si - CMat::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn rank_detects_dependence() {
        let m = CMat::from_row_slice(2, 3, &[ONE, real(2.0), ZERO, real(2.0), real(4.0), ZERO]);
        assert_eq!(numerical_rank(&m, 1e-8), 1);
    }

    #[test]
    fn real_formatting_is_fixed_width() {
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        assert_eq!(format_real(-0.0), "0.0000000000000000e0");
        assert_eq!(format_complex(c(0.5, -2.0)), "(5.0000000000000000e-1, -2.0000000000000000e0)");
    }
}
