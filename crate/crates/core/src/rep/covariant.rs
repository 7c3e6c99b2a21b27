use std::sync::Arc;

use super::strict::{validate_strict_rep, StrictRep};
use super::{BlockOperator, FiniteHilbertBundle, UnitMeasure};
use crate::alg::{convolve, i_norm, same_bundle, star_section, Section};
use crate::error::{Error, Result};
use crate::fell::FellBundle;
use crate::gpd::ArrowId;
use crate::linalg::{CMat, CVec, ONE, ZERO};
use crate::report::{Check, ValidationReport};
use crate::zsb::{CompatibleAction, ZsProductBundle};

/// A strict representation `π` of the base bundle on a Hilbert bundle over
/// the units, unitaries `M_h : H(s(h)) → H(r(h))` for the arrows of `H`, and
/// a measure on the units.
#[derive(Clone, Debug)]
pub struct CovariantRep {
    pub mu: UnitMeasure,
    pub pi: StrictRep,
    pub m: Vec<CMat>,
}

impl CovariantRep {
    pub fn hb(&self) -> &FiniteHilbertBundle {
        self.pi.hb()
    }
}

/// `π` is a strict representation (`PI.*`), `M` is a unitary groupoid
/// homomorphism (`M.HOM`, `M.UNIT`, `M.UNITARY`) and
/// `M_h π(b) = π(β_h(b)) M_{h|p(b)}` (`COV`).
pub fn validate_covariant_rep(rep: &CovariantRep, action: &CompatibleAction, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new("covariant representation");
    let p = action.pair();
    let (g, h) = (p.g(), p.h());
    let hb = rep.hb();
    if !same_bundle(rep.pi.bundle(), action.base()) {
        report.structural("pi does not represent the action's base bundle");
        return report;
    }
    if rep.mu.weights().len() != g.n_units() {
        report.structural("the measure needs one weight per unit");
        return report;
    }
    if rep.m.len() != h.n_arrows() {
        report.structural("one operator M_h per arrow of H is required");
        return report;
    }
    for a in h.arrow_ids() {
        let shape = (hb.dim(h.rng(a)), hb.dim(h.src(a)));
        if rep.m[a.0].shape() != shape {
            report.structural(format!("M_{} has the wrong shape", h.label(a)));
        }
    }
    if !report.structural.is_empty() {
        return report;
    }
    report.absorb("", validate_strict_rep(&rep.pi, tol, "PI"));

    let mut hom = Check::within("M.HOM", tol);
    let mut unit = Check::within("M.UNIT", tol);
    let mut unitary = Check::within("M.UNITARY", tol);
    let mut cov = Check::within("COV", tol);
    for (a, b) in h.composable_pairs() {
        let ab = h.product(a, b).expect("composable");
        hom.observe((&rep.m[a.0] * &rep.m[b.0] - &rep.m[ab.0]).norm(), || {
            format!("(h={}, k={})", h.label(a), h.label(b))
        });
    }
    for v in h.unit_ids() {
        let d = hb.dim(v);
        unit.observe((&rep.m[h.unit_arrow(v).0] - CMat::identity(d, d)).norm(), || {
            h.unit_label(v).to_string()
        });
    }
    for a in h.arrow_ids() {
        let m = &rep.m[a.0];
        let (dr, ds) = m.shape();
        let r = (m.adjoint() * m - CMat::identity(ds, ds))
            .norm()
            .max((m * m.adjoint() - CMat::identity(dr, dr)).norm());
        unitary.observe(r, || h.label(a).to_string());
    }
    let base = action.base();
    for (a, x) in p.domain() {
        let r = p.res(a, x);
        for i in 0..base.fiber_dim(x) {
            let mut e = CVec::zeros(base.fiber_dim(x));
            e[i] = ONE;
            let pe = rep.pi.apply(x, &e);
            let lhs = &rep.m[a.0] * &pe;
            let rhs = rep.pi.apply(p.act(a, x), &action.apply_raw(a, x, &e)) * &rep.m[r.0];
            cov.observe((lhs - rhs).norm() / pe.norm().max(1.0), || {
                format!("(h={}, x={}, i={})", h.label(a), g.label(x), i)
            });
        }
    }
    for ch in [hom, unit, unitary, cov] {
        report.push(ch);
    }
    report
}

fn product_dyn(product: &Arc<ZsProductBundle>) -> Arc<dyn FellBundle> {
    product.clone()
}

fn is_zero(v: &CVec) -> bool {
    v.iter().all(|z| *z == ZERO)
}

/// `L(σ)ξ(v) = Σ_{r(ε) = v} π(σ_B(ε)) M_h ξ(s(ε)) Δ(ε)^{-1/2}` where
/// `ε = (x, h)` and `σ_B(ε)` is the value of `σ` in the base fiber over `x`.
pub fn integrate(rep: &CovariantRep, product: &Arc<ZsProductBundle>, s: &Section) -> Result<BlockOperator> {
    if !same_bundle(s.bundle(), &product_dyn(product)) {
        return Err(Error::precondition("section is not over the product bundle"));
    }
    if !same_bundle(rep.pi.bundle(), product.base()) {
        return Err(Error::precondition("pi does not represent the product's base bundle"));
    }
    let zs = product.zs();
    let k = &zs.groupoid;
    let mut out = BlockOperator::zeros(rep.hb().clone(), rep.mu.clone());
    for e in k.arrow_ids() {
        let v = s.get(e);
        if is_zero(v) {
            continue;
        }
        let (x, h) = zs.pair_of(e);
        let w = rep.mu.modular(k, e).powf(-0.5);
        let blk = rep.pi.apply(x, v) * &rep.m[h.0] * crate::linalg::real(w);
        out.add_block(k.rng(e), k.src(e), &blk);
    }
    Ok(out)
}

/// `L_ψ(σ)ξ(v) = Σ_{r(ε) = v} ψ(σ(ε)) ξ(s(ε)) Δ(ε)^{-1/2}` for a strict
/// representation of any bundle.
pub fn integrate_strict(psi: &StrictRep, mu: &UnitMeasure, s: &Section) -> Result<BlockOperator> {
    if !same_bundle(s.bundle(), psi.bundle()) {
        return Err(Error::precondition("section is not over the represented bundle"));
    }
    let k = psi.bundle().groupoid();
    let mut out = BlockOperator::zeros(psi.hb().clone(), mu.clone());
    for e in k.arrow_ids() {
        let v = s.get(e);
        if is_zero(v) {
            continue;
        }
        let w = mu.modular(k, e).powf(-0.5);
        out.add_block(k.rng(e), k.src(e), &(psi.apply(e, v) * crate::linalg::real(w)));
    }
    Ok(out)
}

/// `π(b) = ψ(b, s(b))` and `M_h = ψ(1_{r(h)}, h)`; needs unital unit fibers.
pub fn disintegrate(psi: &StrictRep, product: &Arc<ZsProductBundle>, mu: UnitMeasure) -> Result<CovariantRep> {
    if !same_bundle(psi.bundle(), &product_dyn(product)) {
        return Err(Error::precondition("psi does not represent the product bundle"));
    }
    let zs = product.zs();
    let base = product.base().clone();
    let h = zs.pair.h();
    let pi = StrictRep::from_fn(base.clone(), psi.hb().clone(), |x, i| {
        psi.basis_op(zs.embed_g(x), i).clone()
    })?;
    let mut m = Vec::with_capacity(h.n_arrows());
    for a in h.arrow_ids() {
        let one = base.unit_raw(h.rng(a)).ok_or_else(|| {
            Error::precondition(format!(
                "the unit fiber over {} has no unit",
                h.unit_label(h.rng(a))
            ))
        })?;
        m.push(psi.apply(zs.embed_h(a), &one));
    }
    Ok(CovariantRep { mu, pi, m })
}

/// The strict representation `ψ(b, h) = π(b) M_h` of the product bundle.
pub fn compose_strict(rep: &CovariantRep, product: &Arc<ZsProductBundle>) -> Result<StrictRep> {
    if !same_bundle(rep.pi.bundle(), product.base()) {
        return Err(Error::precondition("pi does not represent the product's base bundle"));
    }
    let zs = product.zs().clone();
    StrictRep::from_fn(product_dyn(product), rep.hb().clone(), |e: ArrowId, i| {
        let (x, h) = zs.pair_of(e);
        rep.pi.basis_op(x, i) * &rep.m[h.0]
    })
}

/// `L(σ□τ) = L(σ)L(τ)` on consecutive pairs (`L.MUL`), `L(σ*) = L(σ)♯`
/// (`L.STAR`) and `‖L(σ)‖ ≤ ‖σ‖_I` (`L.INORM`, tolerance `norm_tol`
/// relative to `max(1, ‖σ‖_I)`).
pub fn check_integrated_form(
    rep: &CovariantRep,
    product: &Arc<ZsProductBundle>,
    sections: &[Section],
    tol: f64,
    norm_tol: f64,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::new("integrated form");
    let mut mul = Check::within("L.MUL", tol);
    let mut star = Check::within("L.STAR", tol);
    let mut inorm = Check::within("L.INORM", norm_tol);
    let mut ls = Vec::with_capacity(sections.len());
    for s in sections {
        ls.push(integrate(rep, product, s)?);
    }
    let mut worst_ratio: f64 = 0.0;
    for (n, (s, l)) in sections.iter().zip(&ls).enumerate() {
        let ln = l.norm();
        let inn = i_norm(s);
        inorm.observe((ln - inn).max(0.0) / inn.max(1.0), || format!("sample {n}"));
        if inn > 0.0 {
            worst_ratio = worst_ratio.max(ln / inn);
        }
        let lstar = integrate(rep, product, &star_section(s))?;
        star.observe((lstar.mat - l.adjoint().mat).norm() / ln.max(1.0), || format!("sample {n}"));
        if n + 1 < sections.len() {
            let l2 = &ls[n + 1];
            let lp = integrate(rep, product, &convolve(s, &sections[n + 1])?)?;
            let scale = (ln * l2.norm()).max(1.0);
            mul.observe((lp.mat - &l.mat * &l2.mat).norm() / scale, || format!("samples {n}, {}", n + 1));
        }
    }
    report.push(mul);
    report.push(star);
    report.push(inorm);
    report.metric("samples", sections.len());
    report.metric_real("max_norm_ratio", worst_ratio);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{cyclic_group, pair_groupoid, MatchedPair};
    use crate::rep::regular_strict_rep;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z3z2() -> Arc<ZsProductBundle> {
        let p = MatchedPair::trivial(cyclic_group(3, "a"), cyclic_group(2, "b")).unwrap();
        Arc::new(ZsProductBundle::new(CompatibleAction::line_canonical(p).unwrap(), 1e-9).unwrap())
    }

    // the pair groupoid on two units, acted on by its unit space
    fn pair_two() -> Arc<ZsProductBundle> {
        let g = pair_groupoid(&["u", "v"]);
        let h = crate::gpd::discrete(&["u", "v"]);
        let p = MatchedPair::from_fn(g.clone(), h.clone(), |_, x| (x, h.unit_arrow(g.src(x)))).unwrap();
        Arc::new(ZsProductBundle::new(CompatibleAction::line_canonical(p).unwrap(), 1e-9).unwrap())
    }

    #[test]
    fn disintegration_of_regular_rep_is_covariant() {
        let prod = z3z2();
        let psi = regular_strict_rep(prod.clone()).unwrap();
        let rep = disintegrate(&psi, &prod, UnitMeasure::uniform(1)).unwrap();
        let r = validate_covariant_rep(&rep, prod.action(), 1e-12);
        assert!(r.passed(), "{}", r.render_human());
        let back = compose_strict(&rep, &prod).unwrap();
        for e in prod.groupoid().arrow_ids() {
            assert!((back.basis_op(e, 0) - psi.basis_op(e, 0)).norm() < 1e-12);
        }
    }

    #[test]
    fn integrated_form_with_weighted_measure() {
        let prod = pair_two();
        let psi = regular_strict_rep(prod.clone()).unwrap();
        let mu = UnitMeasure::new(vec![1.0, 3.0]).unwrap();
        let rep = disintegrate(&psi, &prod, mu.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let secs: Vec<Section> = (0..6).map(|_| Section::random(product_dyn(&prod), &mut rng)).collect();
        let r = check_integrated_form(&rep, &prod, &secs, 1e-9, 1e-8).unwrap();
        assert!(r.passed(), "{}", r.render_human());
        for s in &secs {
            let a = integrate(&rep, &prod, s).unwrap();
            let b = integrate_strict(&psi, &mu, s).unwrap();
            assert!((a.mat - b.mat).norm() < 1e-12);
        }
    }

    #[test]
    fn sections_over_other_bundles_are_rejected() {
        let prod = z3z2();
        let other = z3z2();
        let psi = regular_strict_rep(prod.clone()).unwrap();
        let rep = disintegrate(&psi, &prod, UnitMeasure::uniform(1)).unwrap();
        let s = Section::zero(product_dyn(&other));
        assert!(matches!(integrate(&rep, &prod, &s), Err(Error::Precondition(_))));
    }
}
