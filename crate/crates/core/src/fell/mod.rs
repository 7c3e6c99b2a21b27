//! Finite-dimensional Fell bundles over finite groupoids.
//!
//! A bundle exposes each fiber through a fixed basis; elements are
//! coordinate vectors in that basis tagged with their arrow. The operations
//! of the [`FellBundle`] trait work on raw coordinates and the
//! [`BundleExt`] extension adds checked, element-level wrappers.

mod hom;
mod matrix;
mod pullback;
mod validate;

pub use hom::{check_bundle_hom, BundleHom};
pub use matrix::{full_matrix_bundle, line_bundle, ConcreteMatrixBundle};
pub use pullback::PullbackBundle;
pub use validate::{validate_fell_bundle, FellOptions};

use std::fmt;

use crate::error::{Error, Result};
use crate::gpd::{ArrowId, FiniteGroupoid, UnitId};
use crate::linalg::{CMat, CVec, C64};

/// An element of the fiber over `arrow`, in that fiber's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleElement {
    pub arrow: ArrowId,
    pub coeffs: CVec,
}

impl BundleElement {
    pub fn new(arrow: ArrowId, coeffs: CVec) -> Self {
        BundleElement { arrow, coeffs }
    }

    pub fn scale(&self, z: C64) -> Self {
        BundleElement::new(self.arrow, &self.coeffs * z)
    }
}

/// The capability interface every bundle implementation provides.
///
/// Coordinates passed in must have the length of the relevant fiber; the
/// `*_raw` methods do not check composability.
pub trait FellBundle: Send + Sync + fmt::Debug {
    fn groupoid(&self) -> &FiniteGroupoid;

    fn fiber_dim(&self, x: ArrowId) -> usize;

    /// Coordinates of `bc` in the fiber over `xy`.
    fn mul_raw(&self, x: ArrowId, b: &CVec, y: ArrowId, c: &CVec) -> CVec;

    /// Coordinates of `b*` in the fiber over `x⁻¹`.
    fn star_raw(&self, x: ArrowId, b: &CVec) -> CVec;

    fn norm_raw(&self, x: ArrowId, b: &CVec) -> f64;

    /// For `b` in the unit fiber over `u`: the distance of `b` from its
    /// Hermitian part and the smallest eigenvalue of that part.
    fn spectrum_raw(&self, u: UnitId, b: &CVec) -> (f64, f64);

    /// Coordinates of the unit of the C*-algebra over `u`, if it has one.
    fn unit_raw(&self, u: UnitId) -> Option<CVec>;

    /// A faithful positive trace on the unit fiber over `u`.
    fn trace_raw(&self, u: UnitId, b: &CVec) -> C64;

    /// How far the true product of these elements lies outside the fiber
    /// over `xy`. Zero for bundles that are closed by construction.
    fn closure_defect(&self, _x: ArrowId, _b: &CVec, _y: ArrowId, _c: &CVec) -> f64 {
        0.0
    }

    /// How far the true adjoint lies outside the fiber over `x⁻¹`.
    fn star_defect(&self, _x: ArrowId, _b: &CVec) -> f64 {
        0.0
    }

    /// Matrices realizing the fiber basis over `x`, when the bundle is a
    /// concrete matrix bundle with the usual product and adjoint.
    fn matrix_basis(&self, _x: ArrowId) -> Option<Vec<CMat>> {
        None
    }

    fn describe(&self) -> String;
}

/// Checked element-level operations, available on every bundle.
pub trait BundleExt: FellBundle {
    fn zero(&self, x: ArrowId) -> BundleElement {
        BundleElement::new(x, CVec::zeros(self.fiber_dim(x)))
    }

    fn basis_element(&self, x: ArrowId, i: usize) -> BundleElement {
        let mut v = CVec::zeros(self.fiber_dim(x));
        v[i] = C64::new(1.0, 0.0);
        BundleElement::new(x, v)
    }

    fn check_element(&self, b: &BundleElement) -> Result<()> {
        let g = self.groupoid();
        if b.arrow.0 >= g.n_arrows() {
            return Err(Error::structural(format!("element over dangling arrow {}", b.arrow)));
        }
        if b.coeffs.len() != self.fiber_dim(b.arrow) {
            return Err(Error::structural(format!(
                "element over {} has {} coordinates, fiber has dimension {}",
                g.label(b.arrow),
                b.coeffs.len(),
                self.fiber_dim(b.arrow)
            )));
        }
        Ok(())
    }

    fn mul(&self, b: &BundleElement, c: &BundleElement) -> Result<BundleElement> {
        self.check_element(b)?;
        self.check_element(c)?;
        let xy = self.groupoid().compose(b.arrow, c.arrow)?;
        Ok(BundleElement::new(
            xy,
            self.mul_raw(b.arrow, &b.coeffs, c.arrow, &c.coeffs),
        ))
    }

    fn star(&self, b: &BundleElement) -> BundleElement {
        let xi = self.groupoid().invert(b.arrow);
        BundleElement::new(xi, self.star_raw(b.arrow, &b.coeffs))
    }

    fn norm(&self, b: &BundleElement) -> f64 {
        self.norm_raw(b.arrow, &b.coeffs)
    }

    fn unit_element(&self, u: UnitId) -> Option<BundleElement> {
        let e = self.groupoid().unit_arrow(u);
        self.unit_raw(u).map(|v| BundleElement::new(e, v))
    }

    fn is_unital(&self) -> bool {
        self.groupoid().unit_ids().all(|u| self.unit_raw(u).is_some())
    }

    /// Positivity in a unit fiber: Hermitian with smallest eigenvalue at
    /// least `-tol` (both relative to `max(1, ‖b‖)`).
    fn is_positive(&self, b: &BundleElement, tol: f64) -> Result<bool> {
        let u = self.groupoid().unit_of(b.arrow).ok_or_else(|| {
            Error::precondition(format!(
                "positivity asked of {} outside a unit fiber",
                self.groupoid().label(b.arrow)
            ))
        })?;
        let scale = self.norm(b).max(1.0);
        let (herm, min) = self.spectrum_raw(u, &b.coeffs);
        Ok(herm <= tol * scale && min >= -tol * scale)
    }

    fn trace(&self, b: &BundleElement) -> Result<C64> {
        let u = self.groupoid().unit_of(b.arrow).ok_or_else(|| {
            Error::precondition("trace is only defined on unit fibers")
        })?;
        Ok(self.trace_raw(u, &b.coeffs))
    }

    /// Total dimension of the section space.
    fn total_dim(&self) -> usize {
        self.groupoid().arrow_ids().map(|x| self.fiber_dim(x)).sum()
    }
}

impl<T: FellBundle + ?Sized> BundleExt for T {}
