//! Matched pairs read off from unique factorizations `K = A B`.

use super::build::subgroupoid;
use super::{ArrowId, FiniteGroupoid, MatchedPair, ZsGroupoid};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub pair: MatchedPair,
    /// Inclusion of the arrows of `pair.g()` into `K`.
    pub g_embed: Vec<ArrowId>,
    /// Inclusion of the arrows of `pair.h()` into `K`.
    pub h_embed: Vec<ArrowId>,
}

impl Factorization {
    /// The multiplication map `(a, b) ↦ ab` from `G ⋈ H` to `K`.
    pub fn product_map(&self, k: &FiniteGroupoid, zs: &ZsGroupoid) -> Vec<ArrowId> {
        zs.pairs
            .iter()
            .map(|&(a, b)| {
                k.compose(self.g_embed[a.0], self.h_embed[b.0])
                    .expect("factor pairs are composable")
            })
            .collect()
    }
}

/// Factor every arrow of `k` uniquely as `ab` with `a ∈ A`, `b ∈ B`, and
/// read the action and restriction off `h y = (h·y)(h|y)`.
pub fn internal_factorization(
    k: &FiniteGroupoid,
    a: &[ArrowId],
    b: &[ArrowId],
) -> Result<Factorization> {
    let (g, g_embed) = subgroupoid(k, a)?;
    let (h, h_embed) = subgroupoid(k, b)?;
    // factor[z] = (index in g, index in h)
    let mut factor: Vec<Option<(ArrowId, ArrowId)>> = vec![None; k.n_arrows()];
    for (i, &x) in g_embed.iter().enumerate() {
        for (j, &y) in h_embed.iter().enumerate() {
            if !k.composable(x, y) {
                continue;
            }
            let z = k.compose(x, y)?;
            if factor[z.0].is_some() {
                return Err(Error::Factorization {
                    arrow: k.label(z).to_string(),
                    reason: "more than one factorization".into(),
                });
            }
            factor[z.0] = Some((ArrowId(i), ArrowId(j)));
        }
    }
    if let Some(z) = factor.iter().position(Option::is_none) {
        return Err(Error::Factorization {
            arrow: k.label(ArrowId(z)).to_string(),
            reason: "no factorization".into(),
        });
    }
    let pair = MatchedPair::from_fn(g, h, |hh, x| {
        let z = k
            .compose(h_embed[hh.0], g_embed[x.0])
            .expect("domain pairs are composable");
        factor[z.0].expect("every arrow factors")
    })?;
    Ok(Factorization { pair, g_embed, h_embed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{check_homomorphism, check_matched_pair, symmetric_group, zs_groupoid};

    fn ids(k: &FiniteGroupoid, labels: &[&str]) -> Vec<ArrowId> {
        labels.iter().map(|l| k.find_arrow(l).unwrap()).collect()
    }

    #[test]
    fn s3_factors_through_rotations_and_a_transposition() {
        let k = symmetric_group(3);
        let f = internal_factorization(&k, &ids(&k, &["123", "231", "312"]), &ids(&k, &["123", "213"]))
            .unwrap();
        assert!(check_matched_pair(&f.pair).passed());
        let zs = zs_groupoid(&f.pair).unwrap();
        let map = f.product_map(&k, &zs);
        assert!(check_homomorphism(&zs.groupoid, &k, &map, true).passed());
        // rotations are normal, so only the action is twisted
        assert!(f.pair.domain().any(|(h, x)| f.pair.act(h, x) != x));
        assert!(f.pair.domain().all(|(h, x)| f.pair.res(h, x) == h));
    }

    #[test]
    fn swapped_order_has_nontrivial_restriction() {
        let k = symmetric_group(3);
        let f = internal_factorization(&k, &ids(&k, &["123", "213"]), &ids(&k, &["123", "231", "312"]))
            .unwrap();
        assert!(check_matched_pair(&f.pair).passed());
        assert!(f.pair.domain().any(|(h, x)| f.pair.res(h, x) != h));
    }

    #[test]
    fn two_transposition_subgroups_do_not_factor_s3() {
        let k = symmetric_group(3);
        let err = internal_factorization(&k, &ids(&k, &["123", "213"]), &ids(&k, &["123", "321"]))
            .unwrap_err();
        assert!(matches!(err, Error::Factorization { .. }));
    }
}
