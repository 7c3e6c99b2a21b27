use std::sync::Arc;

use super::FellBundle;
use crate::error::{Error, Result};
use crate::gpd::{check_homomorphism, ArrowId, FiniteGroupoid, UnitId};
use crate::linalg::{CMat, CVec, C64};

/// The bundle over `G` whose fiber at `x` is the fiber of `base` at `f(x)`.
#[derive(Clone, Debug)]
pub struct PullbackBundle {
    base: Arc<dyn FellBundle>,
    groupoid: FiniteGroupoid,
    map: Vec<ArrowId>,
    unit_map: Vec<UnitId>,
}

impl PullbackBundle {
    /// `map[x]` is the image of arrow `x`; it must be a groupoid homomorphism.
    pub fn new(base: Arc<dyn FellBundle>, groupoid: FiniteGroupoid, map: Vec<ArrowId>) -> Result<Self> {
        let report = check_homomorphism(&groupoid, base.groupoid(), &map, false);
        if !report.passed() {
            return Err(Error::precondition(format!(
                "pullback map is not a homomorphism: {}",
                report.failed_ids().join(", ")
            )));
        }
        let k = base.groupoid();
        let unit_map = groupoid
            .unit_ids()
            .map(|u| k.unit_of(map[groupoid.unit_arrow(u).0]).expect("units map to units"))
            .collect();
        Ok(PullbackBundle { base, groupoid, map, unit_map })
    }

    pub fn base(&self) -> &Arc<dyn FellBundle> {
        &self.base
    }

    pub fn map(&self) -> &[ArrowId] {
        &self.map
    }
}

impl FellBundle for PullbackBundle {
    fn groupoid(&self) -> &FiniteGroupoid {
        &self.groupoid
    }

    fn fiber_dim(&self, x: ArrowId) -> usize {
        self.base.fiber_dim(self.map[x.0])
    }

    fn mul_raw(&self, x: ArrowId, b: &CVec, y: ArrowId, c: &CVec) -> CVec {
        self.base.mul_raw(self.map[x.0], b, self.map[y.0], c)
    }

    fn star_raw(&self, x: ArrowId, b: &CVec) -> CVec {
        self.base.star_raw(self.map[x.0], b)
    }

    fn norm_raw(&self, x: ArrowId, b: &CVec) -> f64 {
        self.base.norm_raw(self.map[x.0], b)
    }

    fn spectrum_raw(&self, u: UnitId, b: &CVec) -> (f64, f64) {
        self.base.spectrum_raw(self.unit_map[u.0], b)
    }

    fn unit_raw(&self, u: UnitId) -> Option<CVec> {
        self.base.unit_raw(self.unit_map[u.0])
    }

    fn trace_raw(&self, u: UnitId, b: &CVec) -> C64 {
        self.base.trace_raw(self.unit_map[u.0], b)
    }

    fn matrix_basis(&self, x: ArrowId) -> Option<Vec<CMat>> {
        self.base.matrix_basis(self.map[x.0])
    }

    fn closure_defect(&self, x: ArrowId, b: &CVec, y: ArrowId, c: &CVec) -> f64 {
        self.base.closure_defect(self.map[x.0], b, self.map[y.0], c)
    }

    fn star_defect(&self, x: ArrowId, b: &CVec) -> f64 {
        self.base.star_defect(self.map[x.0], b)
    }

    fn describe(&self) -> String {
        format!("pullback of ({}) along a homomorphism", self.base.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::{full_matrix_bundle, validate_fell_bundle, BundleExt, FellOptions};
    use crate::gpd::{discrete, pair_groupoid, symmetric_group};

    #[test]
    fn identity_pullback_is_the_same_bundle() {
        let g = symmetric_group(3);
        let base: Arc<dyn FellBundle> = Arc::new(full_matrix_bundle(&g, 2));
        let pb = PullbackBundle::new(base.clone(), g.clone(), g.arrow_ids().collect()).unwrap();
        for x in g.arrow_ids() {
            let e = pb.basis_element(x, 1);
            let y = g.invert(x);
            let f = pb.basis_element(y, 2);
            assert_eq!(pb.mul(&e, &f).unwrap(), base.mul(&e, &f).unwrap());
        }
        assert!(validate_fell_bundle(&pb, &FellOptions::default()).passed());
    }

    #[test]
    fn unit_space_pullback_is_a_union_of_unit_fibers() {
        let k = pair_groupoid(&["a", "b"]);
        let base: Arc<dyn FellBundle> = Arc::new(full_matrix_bundle(&k, 2));
        let d = discrete(&["a", "b"]);
        let map = d.unit_ids().map(|u| k.unit_arrow(u)).collect();
        let pb = PullbackBundle::new(base, d.clone(), map).unwrap();
        assert_eq!(pb.total_dim(), 8);
        assert!(pb.is_unital());
        assert!(validate_fell_bundle(&pb, &FellOptions::default()).passed());
    }

    #[test]
    fn non_homomorphism_is_rejected() {
        let k = pair_groupoid(&["a", "b"]);
        let base: Arc<dyn FellBundle> = Arc::new(full_matrix_bundle(&k, 1));
        let d = discrete(&["a", "b"]);
        let off = k.find_arrow("(a,b)").unwrap();
        let err = PullbackBundle::new(base, d, vec![off, off]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}
