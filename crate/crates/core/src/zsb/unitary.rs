//! Unitary families in a bundle over a Zappa–Szép product, the action they
//! induce on the pulled-back base, and the isomorphism `Θ(a, h) = a u_h`.

use std::sync::Arc;

use super::action::CompatibleAction;
use super::bundle::ZsProductBundle;
use crate::error::{Error, Result};
use crate::fell::{check_bundle_hom, BundleHom, ConcreteMatrixBundle, FellBundle, PullbackBundle};
use crate::gpd::{ArrowId, ZsGroupoid};
use crate::linalg::{CMat, CVec};
use crate::report::{Check, ValidationReport};

/// `u_h` in the fiber over `(r(h), h)` for every arrow `h` of `H`.
#[derive(Clone, Debug)]
pub struct UnitaryFamily {
    bundle: Arc<dyn FellBundle>,
    zs: ZsGroupoid,
    u: Vec<CVec>,
}

impl UnitaryFamily {
    /// `bundle` must live over `zs.groupoid`; `u[h]` are coordinates in the
    /// fiber over `zs.embed_h(h)`.
    pub fn new(bundle: Arc<dyn FellBundle>, zs: ZsGroupoid, u: Vec<CVec>) -> Result<Self> {
        if bundle.groupoid() != &zs.groupoid {
            return Err(Error::structural(
                "the bundle does not live over the Zappa-Szep groupoid",
            ));
        }
        let h = zs.pair.h();
        if u.len() != h.n_arrows() {
            return Err(Error::structural("one unitary per arrow of H is required"));
        }
        for hh in h.arrow_ids() {
            if u[hh.0].len() != bundle.fiber_dim(zs.embed_h(hh)) {
                return Err(Error::structural(format!(
                    "u_{} is not in the fiber over (r(h), h)",
                    h.label(hh)
                )));
            }
        }
        Ok(UnitaryFamily { bundle, zs, u })
    }

    /// From explicit matrices in a matrix bundle; each must lie in its fiber.
    pub fn from_matrices(
        bundle: Arc<ConcreteMatrixBundle>,
        zs: ZsGroupoid,
        mats: &[CMat],
    ) -> Result<Self> {
        let h = zs.pair.h();
        if mats.len() != h.n_arrows() {
            return Err(Error::structural("one unitary per arrow of H is required"));
        }
        let mut u = Vec::with_capacity(mats.len());
        for hh in h.arrow_ids() {
            let k = zs.embed_h(hh);
            let m = &mats[hh.0];
            let coords = bundle.coords(k, m);
            let back = bundle.matrix(k, &coords);
            if back.shape() != m.shape() || (&back - m).norm() > 1e-9 * m.norm().max(1.0) {
                return Err(Error::structural(format!(
                    "u_{} is not in the fiber over (r(h), h)",
                    h.label(hh)
                )));
            }
            u.push(coords);
        }
        Self::new(bundle, zs, u)
    }

    pub fn bundle(&self) -> &Arc<dyn FellBundle> {
        &self.bundle
    }

    pub fn zs(&self) -> &ZsGroupoid {
        &self.zs
    }

    pub fn u(&self, h: ArrowId) -> &CVec {
        &self.u[h.0]
    }
}

/// Check U1 (`u_h u_k = u_{hk}`, `u_h* = u_{h⁻¹}`), U2 (`u_v = 1_v`) and
/// the consequence `u_h u_h* = 1_{r(h)}`, `u_h* u_h = 1_{s(h)}`.
pub fn validate_unitary_family(f: &UnitaryFamily, tol: f64) -> ValidationReport {
    let (c, zs) = (&f.bundle, &f.zs);
    let h = zs.pair.h();
    let k = &zs.groupoid;
    let mut report = ValidationReport::new(format!("unitary family in ({})", c.describe()));
    let rel = |r: f64, s: f64| r / s.max(1.0);
    let mut u1 = Check::within("U1", tol);
    let mut u1s = Check::within("U1.STAR", tol);
    let mut u2 = Check::within("U2", tol);
    let mut uu = Check::within("UNITARY", tol);

    for (a, b) in h.composable_pairs() {
        let ab = h.product(a, b).expect("composable");
        let lhs = c.mul_raw(zs.embed_h(a), f.u(a), zs.embed_h(b), f.u(b));
        let rhs = f.u(ab);
        u1.observe(rel((&lhs - rhs).norm(), rhs.norm()), || {
            format!("(h={}, k={})", h.label(a), h.label(b))
        });
    }
    for a in h.arrow_ids() {
        let ka = zs.embed_h(a);
        let st = c.star_raw(ka, f.u(a));
        let inv = f.u(h.invert(a));
        u1s.observe(rel((&st - inv).norm(), inv.norm()), || h.label(a).to_string());
        let ones = [
            (h.rng(a), c.mul_raw(ka, f.u(a), k.invert(ka), &st)),
            (h.src(a), c.mul_raw(k.invert(ka), &st, ka, f.u(a))),
        ];
        for (v, prod) in ones {
            match c.unit_raw(v) {
                Some(one) => uu.observe((prod - one).norm(), || h.label(a).to_string()),
                None => uu.holds(false, || format!("no unit over {}", h.unit_label(v))),
            }
        }
    }
    for v in h.unit_ids() {
        let a = h.unit_arrow(v);
        match c.unit_raw(v) {
            Some(one) => u2.observe((f.u(a) - one).norm(), || h.unit_label(v).to_string()),
            None => u2.holds(false, || format!("no unit over {}", h.unit_label(v))),
        }
    }
    for ch in [u1, u1s, u2, uu] {
        report.push(ch);
    }
    report
}

/// The base bundle `ι*(C)` along `ι(x) = (x, s(x))` and the action
/// `β_h(a) = u_h a u_{h|x}*` on it.
pub fn action_from_unitary_family(
    f: &UnitaryFamily,
    tol: f64,
) -> Result<(Arc<PullbackBundle>, CompatibleAction)> {
    let report = validate_unitary_family(f, tol);
    if !report.passed() {
        return Err(Error::precondition(format!(
            "not a unitary family: {}",
            report.failed_ids().join(", ")
        )));
    }
    let (c, zs) = (&f.bundle, &f.zs);
    let p = &zs.pair;
    let (g, k) = (p.g(), &zs.groupoid);
    let iota: Vec<ArrowId> = g.arrow_ids().map(|x| zs.embed_g(x)).collect();
    let base = Arc::new(PullbackBundle::new(c.clone(), g.clone(), iota.clone())?);

    let mut entries = Vec::new();
    for (h, x) in p.domain() {
        let r = p.res(h, x);
        let (kh, kx, kr) = (zs.embed_h(h), iota[x.0], zs.embed_h(r));
        let left = k.compose(kh, kx)?;
        let target = k.compose(left, k.invert(kr))?;
        if target != iota[p.act(h, x).0] {
            return Err(Error::structural(
                "u_h a u_{h|x}* does not land over (h·x, s(h·x))",
            ));
        }
        let ur_star = c.star_raw(kr, f.u(r));
        let d = c.fiber_dim(kx);
        let mut m = CMat::zeros(c.fiber_dim(target), d);
        for i in 0..d {
            let mut e = CVec::zeros(d);
            e[i] = crate::linalg::ONE;
            let ua = c.mul_raw(kh, f.u(h), kx, &e);
            m.set_column(i, &c.mul_raw(left, &ua, k.invert(kr), &ur_star));
        }
        entries.push((h, x, m));
    }
    let base_dyn: Arc<dyn FellBundle> = base.clone();
    let action = CompatibleAction::from_matrices(p.clone(), base_dyn, entries)?;
    Ok((base, action))
}

/// `Θ(a, h) = a u_h` from the product bundle to `C`, with every
/// homomorphism property, isometry, bijectivity and the round trip
/// `c = Θ(c u_h*, h)` checked.
pub fn theta_iso(f: &UnitaryFamily, product: &ZsProductBundle, tol: f64, seed: u64) -> ValidationReport {
    let (c, zs) = (&f.bundle, &f.zs);
    let k = &zs.groupoid;
    let mut report = ValidationReport::new("theta isomorphism");
    if product.groupoid() != k {
        report.structural("the product bundle is not over the family's groupoid");
        return report;
    }
    let theta_raw = |kk: ArrowId, a: &CVec| {
        let (x, h) = zs.pair_of(kk);
        c.mul_raw(zs.embed_g(x), a, zs.embed_h(h), f.u(h))
    };
    let hom = BundleHom::from_fn(product, k.arrow_ids().collect(), |x| c.fiber_dim(x), theta_raw);
    report.absorb("", check_bundle_hom(product, c.as_ref(), &hom, tol, seed, true, true));

    let mut round = Check::within("ROUNDTRIP", tol);
    for kk in k.arrow_ids() {
        let (x, h) = zs.pair_of(kk);
        let kh = zs.embed_h(h);
        let ustar = c.star_raw(kh, f.u(h));
        for i in 0..c.fiber_dim(kk) {
            let mut e = CVec::zeros(c.fiber_dim(kk));
            e[i] = crate::linalg::ONE;
            let a = c.mul_raw(kk, &e, k.invert(kh), &ustar);
            debug_assert_eq!(k.product(kk, k.invert(kh)), Some(zs.embed_g(x)));
            let back = theta_raw(kk, &a);
            round.observe((back - &e).norm(), || format!("{}[{}]", k.label(kk), i));
        }
    }
    report.push(round);
    report.note("unique factorization c = b u_h is checked on fiber bases only");
    report
}
