use std::sync::Arc;

use super::covariant::{integrate, validate_covariant_rep, CovariantRep};
use super::strict::{regular_strict_rep, StrictRep};
use super::{FiniteHilbertBundle, UnitMeasure};
use crate::alg::{convolve, hom_i, same_bundle, star_section, Section};
use crate::error::{Error, Result};
use crate::gpd::{zs_groupoid, UnitId};
use crate::linalg::{CMat, CVec, ONE};
use crate::report::{Check, ValidationReport};
use crate::zsb::{CompatibleAction, ZsProductBundle};

/// Amplify a representation `π` of the base on `H₀` to `ℓ²(G⋈H) ⊗ H₀`:
///
/// `Π(b)(δ_{(x,h)} ⊗ ξ) = δ_{(p(b)x, h)} ⊗ π(β_{h⁻¹|(p(b)x)⁻¹}(b)) ξ`,
/// `M_k(δ_{(x,h)} ⊗ ξ) = δ_{(k·x, k|_x h)} ⊗ ξ`.
///
/// Only for groups; groupoids with several units give `Unsupported`.
pub fn twisted_amplification(action: &CompatibleAction, pi: &StrictRep) -> Result<CovariantRep> {
    let p = action.pair();
    let (g, h) = (p.g(), p.h());
    if g.n_units() != 1 || h.n_units() != 1 {
        return Err(Error::Unsupported(
            "twisted amplification is implemented for matched pairs of groups only".into(),
        ));
    }
    if !same_bundle(pi.bundle(), action.base()) {
        return Err(Error::precondition("pi does not represent the action's base bundle"));
    }
    let zs = zs_groupoid(p)?;
    let k = &zs.groupoid;
    let n = pi.hb().dim(UnitId(0));
    let total = k.n_arrows() * n;
    let hb = FiniteHilbertBundle::new(vec![total]);
    let base = action.base().clone();

    let big_pi = StrictRep::from_fn(base.clone(), hb.clone(), |y, i| {
        let mut e = CVec::zeros(base.fiber_dim(y));
        e[i] = ONE;
        let mut m = CMat::zeros(total, total);
        for kk in k.arrow_ids() {
            let (x, a) = zs.pair_of(kk);
            let yx = g.product(y, x).expect("groups compose");
            let twist = p.res(h.invert(a), g.invert(yx));
            let blk = pi.apply(p.act(twist, y), &action.apply_raw(twist, y, &e));
            let to = zs.arrow_of(yx, a).expect("every pair is an arrow");
            m.view_mut((to.0 * n, kk.0 * n), (n, n)).copy_from(&blk);
        }
        m
    })?;

    let mut ms = Vec::with_capacity(h.n_arrows());
    for c in h.arrow_ids() {
        let mut m = CMat::zeros(total, total);
        for kk in k.arrow_ids() {
            let (x, a) = zs.pair_of(kk);
            let to = zs
                .arrow_of(p.act(c, x), h.product(p.res(c, x), a).expect("groups compose"))
                .expect("every pair is an arrow");
            m.view_mut((to.0 * n, kk.0 * n), (n, n)).copy_from(&CMat::identity(n, n));
        }
        ms.push(m);
    }
    Ok(CovariantRep { mu: UnitMeasure::uniform(1), pi: big_pi, m: ms })
}

/// Amplify the regular representation of the base and, for each `σ`,
/// compare `‖L(i(σ□σ*))‖` with `‖Σ_x σ(x)σ(x)*‖`. The compression of
/// `L(i(τ))` to `δ_{(e,e)} ⊗ H₀` equals `π(τ(e))`, which forces the bound.
///
/// Checks: covariance of the amplification, `INJ.COMPRESS`, `INJ.BOUND`
/// (absolute tolerance `norm_tol`) and `INJ.NONZERO`.
pub fn injectivity_check(
    product: &Arc<ZsProductBundle>,
    sections: &[Section],
    tol: f64,
    norm_tol: f64,
) -> Result<ValidationReport> {
    let base = product.base().clone();
    let g = base.groupoid();
    let pi = regular_strict_rep(base.clone())?;
    let amp = twisted_amplification(product.action(), &pi)?;
    let mut report = ValidationReport::new("injectivity of the twisted amplification");
    report.absorb("", validate_covariant_rep(&amp, product.action(), tol));

    let n = pi.hb().dim(UnitId(0));
    let e = g.unit_arrow(UnitId(0));
    let k0 = product.zs().embed_g(e);
    let mut compress = Check::within("INJ.COMPRESS", tol);
    let mut bound = Check::within("INJ.BOUND", norm_tol);
    let mut nonzero = Check::exact("INJ.NONZERO");
    let mut min_gap = f64::INFINITY;
    for (idx, s) in sections.iter().enumerate() {
        let tau = convolve(s, &star_section(s))?;
        let te = tau.get(e);
        let l = integrate(&amp, product, &hom_i(product, &tau)?)?;
        let ln = l.norm();
        let tn = base.norm_raw(e, te);
        let corner = l.mat.view((k0.0 * n, k0.0 * n), (n, n)).into_owned();
        compress.observe((corner - pi.apply(e, te)).norm() / tn.max(1.0), || format!("sample {idx}"));
        bound.observe((tn - ln).max(0.0), || format!("sample {idx}"));
        nonzero.holds(s.is_zero() || ln > 0.0, || format!("sample {idx}"));
        min_gap = min_gap.min(ln - tn);
    }
    report.push(compress);
    report.push(bound);
    report.push(nonzero);
    report.metric("samples", sections.len());
    if !sections.is_empty() {
        report.metric_real("min_gap", min_gap);
    }
    report.note("the universal representation is replaced by the regular representation of the base");
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::FellBundle;
    use crate::gpd::{internal_factorization, pair_groupoid, symmetric_group, MatchedPair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s3_swapped() -> Arc<ZsProductBundle> {
        let s3 = symmetric_group(3);
        let t = vec![s3.find_arrow("123").unwrap(), s3.find_arrow("213").unwrap()];
        let r = vec![s3.find_arrow("123").unwrap(), s3.find_arrow("231").unwrap(), s3.find_arrow("312").unwrap()];
        let f = internal_factorization(&s3, &t, &r).unwrap();
        Arc::new(ZsProductBundle::new(CompatibleAction::line_canonical(f.pair).unwrap(), 1e-9).unwrap())
    }

    #[test]
    fn amplification_is_covariant_with_nontrivial_restriction() {
        let prod = s3_swapped();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base: Arc<dyn FellBundle> = prod.base().clone();
        let secs: Vec<Section> = (0..10).map(|_| Section::random(base.clone(), &mut rng)).collect();
        let r = injectivity_check(&prod, &secs, 1e-12, 1e-8).unwrap();
        assert!(r.passed(), "{}", r.render_human());
    }

    #[test]
    fn groupoids_are_unsupported() {
        let g = pair_groupoid(&["u", "v"]);
        let h = crate::gpd::discrete(&["u", "v"]);
        let p = MatchedPair::from_fn(g.clone(), h.clone(), |_, x| (x, h.unit_arrow(g.src(x)))).unwrap();
        let a = CompatibleAction::line_canonical(p).unwrap();
        let pi = regular_strict_rep(a.base().clone()).unwrap();
        assert!(matches!(twisted_amplification(&a, &pi), Err(Error::Unsupported(_))));
    }
}
