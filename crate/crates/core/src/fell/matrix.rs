//! Bundles whose fibers are subspaces of rectangular complex matrices.

use super::FellBundle;
use crate::error::{Error, Result};
use crate::gpd::{ArrowId, FiniteGroupoid, UnitId};
use crate::linalg::{hermitian_eigenvalues, hs_inner, max_abs, op_norm, CMat, CVec, C64, ONE, ZERO};

/// Fiber over `x` is the span of `basis[x]`, a set of `dim(r(x)) × dim(s(x))`
/// matrices, orthonormal for the Hilbert–Schmidt inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcreteMatrixBundle {
    groupoid: FiniteGroupoid,
    dims: Vec<usize>,
    basis: Vec<Vec<CMat>>,
    units: Vec<Option<CVec>>,
}

const GS_FLOOR: f64 = 1e-10;

impl ConcreteMatrixBundle {
    /// Orthonormalizes each fiber's spanning set. Fails if a spanning set is
    /// rank-deficient or a matrix has the wrong shape.
    pub fn new(groupoid: FiniteGroupoid, dims: Vec<usize>, spans: Vec<Vec<CMat>>) -> Result<Self> {
        if dims.len() != groupoid.n_units() {
            return Err(Error::structural("one dimension per unit is required"));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::structural("unit dimensions must be positive"));
        }
        if spans.len() != groupoid.n_arrows() {
            return Err(Error::structural("one spanning set per arrow is required"));
        }
        let mut basis = Vec::with_capacity(spans.len());
        for (i, span) in spans.into_iter().enumerate() {
            let x = ArrowId(i);
            let shape = (dims[groupoid.rng(x).0], dims[groupoid.src(x).0]);
            let mut ortho: Vec<CMat> = Vec::new();
            for m in span {
                if m.shape() != shape {
                    return Err(Error::structural(format!(
                        "fiber matrix over {} has shape {:?}, expected {:?}",
                        groupoid.label(x),
                        m.shape(),
                        shape
                    )));
                }
                if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                    return Err(Error::structural("non-finite matrix entry"));
                }
                let mut v = m.clone();
                // two passes of modified Gram–Schmidt
                for _ in 0..2 {
                    for q in &ortho {
                        let p = hs_inner(q, &v);
                        v -= q * p;
                    }
                }
                let n = v.norm();
                if n <= GS_FLOOR * m.norm().max(1.0) {
                    return Err(Error::structural(format!(
                        "spanning set over {} is rank-deficient",
                        groupoid.label(x)
                    )));
                }
                ortho.push(v / C64::new(n, 0.0));
            }
            basis.push(ortho);
        }
        let mut b = ConcreteMatrixBundle { groupoid, dims, basis, units: Vec::new() };
        b.units = b
            .groupoid
            .unit_ids()
            .map(|u| {
                let e = b.groupoid.unit_arrow(u);
                let id = CMat::identity(b.dims[u.0], b.dims[u.0]);
                let coords = b.coords(e, &id);
                let back = b.matrix(e, &coords);
                (max_abs(&(back - id)) <= 1e-10).then_some(coords)
            })
            .collect();
        Ok(b)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn basis(&self, x: ArrowId) -> &[CMat] {
        &self.basis[x.0]
    }

    fn shape(&self, x: ArrowId) -> (usize, usize) {
        (self.dims[self.groupoid.rng(x).0], self.dims[self.groupoid.src(x).0])
    }

    /// The matrix with coordinates `b` over `x`.
    pub fn matrix(&self, x: ArrowId, b: &CVec) -> CMat {
        let (r, c) = self.shape(x);
        let mut m = CMat::zeros(r, c);
        for (q, z) in self.basis[x.0].iter().zip(b.iter()) {
            m += q * *z;
        }
        m
    }

    /// HS projection coordinates of `m` onto the fiber over `x`.
    pub fn coords(&self, x: ArrowId, m: &CMat) -> CVec {
        CVec::from_iterator(
            self.basis[x.0].len(),
            self.basis[x.0].iter().map(|q| hs_inner(q, m)),
        )
    }

    fn projection_defect(&self, x: ArrowId, m: &CMat) -> f64 {
        let back = self.matrix(x, &self.coords(x, m));
        (m - back).norm() / m.norm().max(1.0)
    }
}

impl FellBundle for ConcreteMatrixBundle {
    fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    fn fiber_dim(&self, x: ArrowId) -> usize {
        self.basis[x.0].len()
    }

    fn mul_raw(&self, x: ArrowId, b: &CVec, y: ArrowId, c: &CVec) -> CVec {
        let xy = self.groupoid.product(x, y).expect("composable arrows");
        self.coords(xy, &(self.matrix(x, b) * self.matrix(y, c)))
    }

    fn star_raw(&self, x: ArrowId, b: &CVec) -> CVec {
        self.coords(self.groupoid.invert(x), &self.matrix(x, b).adjoint())
    }

    fn norm_raw(&self, x: ArrowId, b: &CVec) -> f64 {
        op_norm(&self.matrix(x, b))
    }

    fn spectrum_raw(&self, u: UnitId, b: &CVec) -> (f64, f64) {
        let m = self.matrix(self.groupoid.unit_arrow(u), b);
        let herm = max_abs(&(&m - m.adjoint())) * 0.5;
        let min = hermitian_eigenvalues(&m).first().copied().unwrap_or(0.0);
        (herm, min)
    }

    fn unit_raw(&self, u: UnitId) -> Option<CVec> {
        self.units[u.0].clone()
    }

    fn trace_raw(&self, u: UnitId, b: &CVec) -> C64 {
        self.matrix(self.groupoid.unit_arrow(u), b).trace()
    }

    fn closure_defect(&self, x: ArrowId, b: &CVec, y: ArrowId, c: &CVec) -> f64 {
        let xy = self.groupoid.product(x, y).expect("composable arrows");
        self.projection_defect(xy, &(self.matrix(x, b) * self.matrix(y, c)))
    }

    fn matrix_basis(&self, x: ArrowId) -> Option<Vec<CMat>> {
        Some(self.basis[x.0].clone())
    }

    fn star_defect(&self, x: ArrowId, b: &CVec) -> f64 {
        self.projection_defect(self.groupoid.invert(x), &self.matrix(x, b).adjoint())
    }

    fn describe(&self) -> String {
        format!(
            "matrix bundle over {} arrows, unit dimensions {:?}",
            self.groupoid.n_arrows(),
            self.dims
        )
    }
}

/// `ℂ × G`: every fiber is spanned by the 1×1 identity.
pub fn line_bundle(g: &FiniteGroupoid) -> ConcreteMatrixBundle {
    let one = CMat::from_element(1, 1, ONE);
    ConcreteMatrixBundle::new(
        g.clone(),
        vec![1; g.n_units()],
        vec![vec![one]; g.n_arrows()],
    )
    .expect("line bundle")
}

/// Every fiber is the full `d × d` matrix space, spanned by matrix units.
pub fn full_matrix_bundle(g: &FiniteGroupoid, d: usize) -> ConcreteMatrixBundle {
    let units: Vec<CMat> = (0..d)
        .flat_map(|i| {
            (0..d).map(move |j| {
                let mut m = CMat::from_element(d, d, ZERO);
                m[(i, j)] = ONE;
                m
            })
        })
        .collect();
    ConcreteMatrixBundle::new(g.clone(), vec![d; g.n_units()], vec![units; g.n_arrows()])
        .expect("full matrix bundle")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::cyclic_group;
    use crate::linalg::real;

    #[test]
    fn rank_deficient_span_is_rejected() {
        let g = cyclic_group(1, "e");
        let m = CMat::identity(2, 2);
        let err = ConcreteMatrixBundle::new(g, vec![2], vec![vec![m.clone(), m * real(2.0)]]);
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn shape_mismatch_is_structural() {
        let g = cyclic_group(1, "e");
        let err = ConcreteMatrixBundle::new(g, vec![2], vec![vec![CMat::identity(3, 3)]]);
        assert!(matches!(err, Err(Error::Structural(_))));
    }

    #[test]
    fn diagonal_fiber_without_identity_is_not_unital() {
        let g = cyclic_group(1, "e");
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = ONE;
        let b = ConcreteMatrixBundle::new(g, vec![2], vec![vec![m]]).unwrap();
        assert!(b.unit_raw(UnitId(0)).is_none());
    }
}
