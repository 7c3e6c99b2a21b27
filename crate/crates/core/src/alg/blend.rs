use std::sync::Arc;

use super::{convolve, same_bundle, Section};
use crate::error::{Error, Result};
use crate::fell::FellBundle;
use crate::linalg::{numerical_rank, CMat, CVec, C64};
use crate::zsb::ZsProductBundle;

fn product_dyn(product: &Arc<ZsProductBundle>) -> Arc<dyn FellBundle> {
    product.clone()
}

/// `i(σ)(x, h) = σ(x)` when `h` is a unit, zero otherwise.
pub fn hom_i(product: &Arc<ZsProductBundle>, s: &Section) -> Result<Section> {
    if !same_bundle(s.bundle(), product.base()) {
        return Err(Error::precondition("section is not over the product's base bundle"));
    }
    let zs = product.zs();
    let mut out = Section::zero(product_dyn(product));
    for x in zs.pair.g().arrow_ids() {
        out.set(zs.embed_g(x), s.get(x).clone());
    }
    Ok(out)
}

/// `j(f)(x, h) = f(h) 1_{r(h)}` when `x = r(h)`, zero otherwise. `f` is a
/// section of a line bundle over `H`; every unit fiber must be unital.
pub fn hom_j(product: &Arc<ZsProductBundle>, f: &Section) -> Result<Section> {
    let zs = product.zs();
    let h = zs.pair.h();
    if f.bundle().groupoid() != h || h.arrow_ids().any(|a| f.bundle().fiber_dim(a) != 1) {
        return Err(Error::precondition("j expects a scalar function on the arrows of H"));
    }
    let mut out = Section::zero(product_dyn(product));
    for a in h.arrow_ids() {
        let one = product.base().unit_raw(h.rng(a)).ok_or_else(|| {
            Error::precondition("j needs every unit fiber to be unital")
        })?;
        out.set(zs.embed_h(a), one * f.get(a)[0]);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlendReport {
    /// Rank of the span of `i(σ)□j(f)`.
    pub rank_ij: usize,
    /// Rank of the span of `j(f)□i(σ)`.
    pub rank_ji: usize,
    pub full_dim: usize,
    /// Ranks of `i` and `j` themselves; full rank means injective.
    pub rank_i: usize,
    pub rank_j: usize,
    pub dim_base: usize,
    pub dim_h: usize,
}

impl BlendReport {
    pub fn is_blend(&self) -> bool {
        self.rank_ij == self.full_dim && self.rank_ji == self.full_dim
    }
}

/// Span ranks of `i ⊙ j` and `j ⊙ i` over the full bases: `i` over every
/// basis section of the base, `j` over every delta function on `H`.
pub fn blend_rank(product: &Arc<ZsProductBundle>, h_line: Arc<dyn FellBundle>) -> Result<BlendReport> {
    let zs = product.zs();
    let base = product.base().clone();
    let bg = base.groupoid();
    let mut is = Vec::new();
    for x in bg.arrow_ids() {
        for k in 0..base.fiber_dim(x) {
            let mut v = CVec::zeros(base.fiber_dim(x));
            v[k] = C64::new(1.0, 0.0);
            is.push(hom_i(product, &Section::delta(base.clone(), x, v))?);
        }
    }
    let mut js = Vec::new();
    for a in zs.pair.h().arrow_ids() {
        js.push(hom_j(product, &Section::delta(h_line.clone(), a, CVec::from_element(1, C64::new(1.0, 0.0))))?);
    }
    let full_dim = zs
        .groupoid
        .arrow_ids()
        .map(|k| product.fiber_dim(k))
        .sum::<usize>();
    let columns = |secs: Vec<Section>| {
        let mut m = CMat::zeros(full_dim, secs.len());
        for (c, s) in secs.iter().enumerate() {
            m.set_column(c, &s.to_global());
        }
        m
    };
    let mut ij = Vec::with_capacity(is.len() * js.len());
    let mut ji = Vec::with_capacity(ij.capacity());
    for si in &is {
        for sj in &js {
            ij.push(convolve(si, sj)?);
            ji.push(convolve(sj, si)?);
        }
    }
    let rank = |m: &CMat| numerical_rank(m, 1e-8);
    Ok(BlendReport {
        rank_ij: rank(&columns(ij)),
        rank_ji: rank(&columns(ji)),
        full_dim,
        rank_i: rank(&columns(is.clone())),
        rank_j: rank(&columns(js.clone())),
        dim_base: is.len(),
        dim_h: js.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alg::{cstar_norm, i_norm, star_section};
    use crate::fell::line_bundle;
    use crate::gpd::{cyclic_group, ArrowId, MatchedPair};
    use crate::linalg::ONE;
    use crate::zsb::CompatibleAction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z2z2() -> Arc<ZsProductBundle> {
        let p = MatchedPair::trivial(cyclic_group(2, "a"), cyclic_group(2, "b")).unwrap();
        Arc::new(ZsProductBundle::new(CompatibleAction::line_canonical(p).unwrap(), 1e-9).unwrap())
    }

    #[test]
    fn z2z2_blend_is_full() {
        let prod = z2z2();
        let hl: Arc<dyn FellBundle> = Arc::new(line_bundle(prod.zs().pair.h()));
        let r = blend_rank(&prod, hl).unwrap();
        assert_eq!((r.rank_ij, r.rank_ji, r.full_dim), (4, 4, 4));
        assert_eq!((r.rank_i, r.rank_j), (2, 2));
    }

    #[test]
    fn i_and_j_are_star_homomorphisms() {
        let prod = z2z2();
        let base = prod.base().clone();
        let hl: Arc<dyn FellBundle> = Arc::new(line_bundle(prod.zs().pair.h()));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (s, t) = (Section::random(base.clone(), &mut rng), Section::random(base, &mut rng));
        let lhs = hom_i(&prod, &convolve(&s, &t).unwrap()).unwrap();
        let rhs = convolve(&hom_i(&prod, &s).unwrap(), &hom_i(&prod, &t).unwrap()).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        assert!(i_norm(&hom_i(&prod, &s).unwrap()) <= i_norm(&s) + 1e-12);
        assert!(cstar_norm(&hom_i(&prod, &s).unwrap()).unwrap() <= cstar_norm(&s).unwrap() + 1e-8);

        let (f1, f2) = (Section::random(hl.clone(), &mut rng), Section::random(hl.clone(), &mut rng));
        let lhs = hom_j(&prod, &convolve(&f1, &f2).unwrap()).unwrap();
        let rhs = convolve(&hom_j(&prod, &f1).unwrap(), &hom_j(&prod, &f2).unwrap()).unwrap();
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        let lhs = hom_j(&prod, &star_section(&f1)).unwrap();
        let rhs = star_section(&hom_j(&prod, &f1).unwrap());
        assert!(lhs.distance(&rhs).unwrap() < 1e-12);
        let unit = Section::delta(hl, ArrowId(0), CVec::from_element(1, ONE));
        let ju = hom_j(&prod, &unit).unwrap();
        assert!(convolve(&ju, &ju).unwrap().distance(&ju).unwrap() < 1e-15);
    }
}
