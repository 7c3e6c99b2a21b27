use std::sync::Arc;

use super::action::{validate_action, CompatibleAction};
use crate::error::{Error, Result};
use crate::fell::{line_bundle, BundleElement, BundleHom, FellBundle};
use crate::gpd::{zs_groupoid, ArrowId, FiniteGroupoid, UnitId, ZsGroupoid};
use crate::linalg::{CMat, CVec, C64};

/// The Fell bundle over `G ⋈ H` whose fiber over `(x, h)` is the base
/// fiber over `x`. Operations are the twisted formulas
/// `(a,g)(b,h) = (a β_g(b), g|_{p(b)} h)` and
/// `(b,h)* = (β_{h⁻¹}(b*), h⁻¹|_{p(b)⁻¹})`, with `‖(b,h)‖ = ‖b‖`.
#[derive(Clone, Debug)]
pub struct ZsProductBundle {
    action: CompatibleAction,
    zs: ZsGroupoid,
}

impl ZsProductBundle {
    /// Build the product bundle; the action must pass [`validate_action`].
    pub fn new(action: CompatibleAction, tol: f64) -> Result<Self> {
        let report = validate_action(&action, tol, 0);
        if !report.passed() {
            let mut failed = report.failed_ids().join(", ");
            if failed.is_empty() {
                failed = report.structural.join("; ");
            }
            return Err(Error::precondition(format!("action is not compatible: {failed}")));
        }
        let zs = zs_groupoid(action.pair())?;
        Ok(ZsProductBundle { action, zs })
    }

    pub fn action(&self) -> &CompatibleAction {
        &self.action
    }

    pub fn zs(&self) -> &ZsGroupoid {
        &self.zs
    }

    pub fn base(&self) -> &Arc<dyn FellBundle> {
        self.action.base()
    }

    /// `Φ(b) = (b, s(b))`.
    pub fn phi(&self, b: &BundleElement) -> BundleElement {
        BundleElement::new(self.zs.embed_g(b.arrow), b.coeffs.clone())
    }

    /// `Ψ(z, h) = (z 1_{r(h)}, h)`; needs a unital base.
    pub fn psi(&self, z: C64, h: ArrowId) -> Result<BundleElement> {
        let u = self.zs.pair.h().rng(h);
        let one = self.base().unit_raw(u).ok_or_else(|| {
            Error::precondition(format!(
                "the unit fiber over {} has no unit",
                self.zs.pair.g().unit_label(u)
            ))
        })?;
        Ok(BundleElement::new(self.zs.embed_h(h), one * z))
    }

    /// `Φ` as a bundle homomorphism from the base.
    pub fn phi_hom(&self) -> BundleHom {
        let g = self.zs.pair.g();
        BundleHom {
            arrow_map: g.arrow_ids().map(|x| self.zs.embed_g(x)).collect(),
            maps: g
                .arrow_ids()
                .map(|x| {
                    let d = self.base().fiber_dim(x);
                    CMat::identity(d, d)
                })
                .collect(),
        }
    }

    /// `Ψ` as a bundle homomorphism from the line bundle over `H`, together
    /// with that line bundle.
    pub fn psi_hom(&self) -> Result<(crate::fell::ConcreteMatrixBundle, BundleHom)> {
        let h = self.zs.pair.h();
        let mut maps = Vec::with_capacity(h.n_arrows());
        for hh in h.arrow_ids() {
            let v = self.psi(C64::new(1.0, 0.0), hh)?.coeffs;
            maps.push(CMat::from_column_slice(v.len(), 1, v.as_slice()));
        }
        let hom = BundleHom {
            arrow_map: h.arrow_ids().map(|hh| self.zs.embed_h(hh)).collect(),
            maps,
        };
        Ok((line_bundle(h), hom))
    }
}

impl FellBundle for ZsProductBundle {
    fn groupoid(&self) -> &FiniteGroupoid {
        &self.zs.groupoid
    }

    fn fiber_dim(&self, k: ArrowId) -> usize {
        self.base().fiber_dim(self.zs.pair_of(k).0)
    }

    fn mul_raw(&self, k1: ArrowId, a: &CVec, k2: ArrowId, b: &CVec) -> CVec {
        let (x, g) = self.zs.pair_of(k1);
        let (y, _) = self.zs.pair_of(k2);
        let p = self.action.pair();
        let bb = self.action.apply_raw(g, y, b);
        self.base().mul_raw(x, a, p.act(g, y), &bb)
    }

    fn star_raw(&self, k: ArrowId, b: &CVec) -> CVec {
        let (x, h) = self.zs.pair_of(k);
        let hi = self.zs.pair.h().invert(h);
        let xi = self.zs.pair.g().invert(x);
        self.action.apply_raw(hi, xi, &self.base().star_raw(x, b))
    }

    fn norm_raw(&self, k: ArrowId, b: &CVec) -> f64 {
        self.base().norm_raw(self.zs.pair_of(k).0, b)
    }

    fn spectrum_raw(&self, u: UnitId, b: &CVec) -> (f64, f64) {
        self.base().spectrum_raw(u, b)
    }

    fn unit_raw(&self, u: UnitId) -> Option<CVec> {
        self.base().unit_raw(u)
    }

    fn trace_raw(&self, u: UnitId, b: &CVec) -> C64 {
        self.base().trace_raw(u, b)
    }

    fn closure_defect(&self, k1: ArrowId, a: &CVec, k2: ArrowId, b: &CVec) -> f64 {
        let (x, g) = self.zs.pair_of(k1);
        let (y, _) = self.zs.pair_of(k2);
        let bb = self.action.apply_raw(g, y, b);
        self.base().closure_defect(x, a, self.action.pair().act(g, y), &bb)
    }

    fn star_defect(&self, k: ArrowId, b: &CVec) -> f64 {
        self.base().star_defect(self.zs.pair_of(k).0, b)
    }

    fn describe(&self) -> String {
        format!(
            "Zappa-Szep product of ({}) by {} arrows",
            self.base().describe(),
            self.zs.pair.h().n_arrows()
        )
    }
}
