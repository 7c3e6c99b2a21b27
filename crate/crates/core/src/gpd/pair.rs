//! Matched pairs of groupoids and their Zappa–Szép products.

use std::collections::HashMap;

use super::{validate_groupoid, Arrow, ArrowId, FiniteGroupoid};
use crate::error::{Error, Result};
use crate::report::{Check, ValidationReport};

/// Two groupoids on the same units, with an action `h·x` of `H` on `G` and a
/// restriction `h|x` of `H` along `G`, both defined iff `s_H(h) = r_G(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedPair {
    g: FiniteGroupoid,
    h: FiniteGroupoid,
    act: Vec<Option<ArrowId>>,
    res: Vec<Option<ArrowId>>,
}

impl MatchedPair {
    /// Entries are `(h, x, h·x, h|x)`. Every pair with `s_H(h) = r_G(x)`
    /// must appear exactly once and no other pair may appear.
    pub fn from_tables(
        g: FiniteGroupoid,
        h: FiniteGroupoid,
        entries: &[(ArrowId, ArrowId, ArrowId, ArrowId)],
    ) -> Result<Self> {
        if g.units() != h.units() {
            return Err(Error::structural("the two groupoids have different unit sets"));
        }
        let (ng, nh) = (g.n_arrows(), h.n_arrows());
        let mut act = vec![None; ng * nh];
        let mut res = vec![None; ng * nh];
        for &(hh, x, y, k) in entries {
            if hh.0 >= nh || x.0 >= ng || y.0 >= ng || k.0 >= nh {
                return Err(Error::structural("action table refers to a dangling arrow"));
            }
            if h.src(hh) != g.rng(x) {
                return Err(Error::structural(format!(
                    "action defined off its domain at ({}, {})",
                    h.label(hh),
                    g.label(x)
                )));
            }
            let i = hh.0 * ng + x.0;
            if act[i].is_some() {
                return Err(Error::structural(format!(
                    "action given twice at ({}, {})",
                    h.label(hh),
                    g.label(x)
                )));
            }
            act[i] = Some(y);
            res[i] = Some(k);
        }
        for hh in h.arrow_ids() {
            for x in g.arrow_ids() {
                if h.src(hh) == g.rng(x) && act[hh.0 * ng + x.0].is_none() {
                    return Err(Error::structural(format!(
                        "action missing at ({}, {})",
                        h.label(hh),
                        g.label(x)
                    )));
                }
            }
        }
        Ok(MatchedPair { g, h, act, res })
    }

    /// Tabulate `f(h, x) = (h·x, h|x)` over the domain.
    pub fn from_fn(
        g: FiniteGroupoid,
        h: FiniteGroupoid,
        f: impl Fn(ArrowId, ArrowId) -> (ArrowId, ArrowId),
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for hh in h.arrow_ids() {
            for x in g.arrow_ids() {
                if h.src(hh) == g.rng(x) {
                    let (y, k) = f(hh, x);
                    entries.push((hh, x, y, k));
                }
            }
        }
        Self::from_tables(g, h, &entries)
    }

    /// Trivial action and restriction: `h·x = x`, `h|x = h`. Only a matched
    /// pair when every `h` is a loop (e.g. for groups).
    pub fn trivial(g: FiniteGroupoid, h: FiniteGroupoid) -> Result<Self> {
        Self::from_fn(g, h, |hh, x| (x, hh))
    }

    pub fn g(&self) -> &FiniteGroupoid {
        &self.g
    }

    pub fn h(&self) -> &FiniteGroupoid {
        &self.h
    }

    pub fn defined(&self, h: ArrowId, x: ArrowId) -> bool {
        self.h.src(h) == self.g.rng(x)
    }

    pub fn try_act(&self, h: ArrowId, x: ArrowId) -> Option<ArrowId> {
        self.act[h.0 * self.g.n_arrows() + x.0]
    }

    pub fn try_res(&self, h: ArrowId, x: ArrowId) -> Option<ArrowId> {
        self.res[h.0 * self.g.n_arrows() + x.0]
    }

    /// `h·x`. Panics off the domain `s_H(h) = r_G(x)`.
    pub fn act(&self, h: ArrowId, x: ArrowId) -> ArrowId {
        self.try_act(h, x).unwrap_or_else(|| self.off_domain(h, x))
    }

    /// `h|x`. Panics off the domain `s_H(h) = r_G(x)`.
    pub fn res(&self, h: ArrowId, x: ArrowId) -> ArrowId {
        self.try_res(h, x).unwrap_or_else(|| self.off_domain(h, x))
    }

    fn off_domain(&self, h: ArrowId, x: ArrowId) -> ! {
        panic!(
            "action queried off its domain at ({}, {})",
            self.h.label(h),
            self.g.label(x)
        )
    }

    /// Domain pairs `(h, x)` in a fixed order.
    pub fn domain(&self) -> impl Iterator<Item = (ArrowId, ArrowId)> + '_ {
        self.h.arrow_ids().flat_map(move |h| {
            self.g
                .arrow_ids()
                .filter(move |&x| self.defined(h, x))
                .map(move |x| (h, x))
        })
    }
}

/// Check ZS1–ZS9 and the derived identities ZS10–ZS13 exhaustively.
pub fn check_matched_pair(p: &MatchedPair) -> ValidationReport {
    let (g, h) = (&p.g, &p.h);
    let mut report = ValidationReport::new(format!(
        "matched pair, |G| = {}, |H| = {}, {} units",
        g.n_arrows(),
        h.n_arrows(),
        g.n_units()
    ));
    let gr = validate_groupoid(g);
    let hr = validate_groupoid(h);
    if !gr.passed() {
        report.absorb("G", gr);
    }
    if !hr.passed() {
        report.absorb("H", hr);
    }

    let act = |hh: ArrowId, x: ArrowId| p.try_act(hh, x);
    let res = |hh: ArrowId, x: ArrowId| p.try_res(hh, x);
    let gmul = |a: ArrowId, b: ArrowId| g.product(a, b).filter(|_| g.composable(a, b));
    let hmul = |a: ArrowId, b: ArrowId| h.product(a, b).filter(|_| h.composable(a, b));
    let hl = |a: ArrowId| h.label(a).to_string();
    let gl = |a: ArrowId| g.label(a).to_string();
    let hx = |a, b| format!("(h={}, x={})", hl(a), gl(b));

    let mut zs = (1..=13)
        .map(|i| Check::exact(format!("ZS{i}")))
        .collect::<Vec<_>>();

    for (hh, x) in p.domain() {
        let hx_ = act(hh, x);
        let hr_ = res(hh, x);

        // ZS2, ZS5, ZS7
        zs[1].holds(hx_.map(|y| g.rng(y)) == Some(h.rng(hh)), || hx(hh, x));
        zs[4].holds(hr_.map(|k| h.src(k)) == Some(g.src(x)), || hx(hh, x));
        zs[6].holds(
            matches!((hx_, hr_), (Some(y), Some(k)) if g.src(y) == h.rng(k)),
            || hx(hh, x),
        );

        // ZS12: (h·x)^-1 = h|x · x^-1
        let lhs = hx_.map(|y| g.invert(y));
        let rhs = hr_.and_then(|k| act(k, g.invert(x)));
        zs[11].holds(lhs.is_some() && lhs == rhs, || hx(hh, x));

        // ZS13: (h|x)^-1 = h^-1 | (h·x)
        let lhs = hr_.map(|k| h.invert(k));
        let rhs = hx_.and_then(|y| res(h.invert(hh), y));
        zs[12].holds(lhs.is_some() && lhs == rhs, || hx(hh, x));

        // ZS1 and ZS9 range over h1 with s(h1) = r(h2).
        for h1 in h.arrow_ids().filter(|&h1| h.composable(h1, hh)) {
            let h12 = hmul(h1, hh);
            let lhs = h12.and_then(|k| act(k, x));
            let rhs = hx_.and_then(|y| act(h1, y));
            zs[0].holds(lhs.is_some() && lhs == rhs, || {
                format!("(h1={}, h2={}, x={})", hl(h1), hl(hh), gl(x))
            });
            let lhs = h12.and_then(|k| res(k, x));
            let rhs = match (hx_.and_then(|y| res(h1, y)), hr_) {
                (Some(a), Some(b)) => hmul(a, b),
                _ => None,
            };
            zs[8].holds(lhs.is_some() && lhs == rhs, || {
                format!("(h1={}, h2={}, x={})", hl(h1), hl(hh), gl(x))
            });
        }

        // ZS4 and ZS8 range over y with s(x) = r(y).
        for y in g.arrow_ids().filter(|&y| g.composable(x, y)) {
            let xy = gmul(x, y);
            let lhs = xy.and_then(|xy| res(hh, xy));
            let rhs = hr_.and_then(|k| res(k, y));
            zs[3].holds(lhs.is_some() && lhs == rhs, || {
                format!("(h={}, x={}, y={})", hl(hh), gl(x), gl(y))
            });
            let lhs = xy.and_then(|xy| act(hh, xy));
            let rhs = match (hx_, hr_.and_then(|k| act(k, y))) {
                (Some(a), Some(b)) => gmul(a, b),
                _ => None,
            };
            zs[7].holds(lhs.is_some() && lhs == rhs, || {
                format!("(h={}, x={}, y={})", hl(hh), gl(x), gl(y))
            });
        }
    }

    for u in g.unit_ids() {
        let (ge, he) = (g.unit_arrow(u), h.unit_arrow(u));
        // ZS3: r_G(x)·x = x
        for x in g.arrows_to(u) {
            zs[2].holds(act(he, x) == Some(x), || format!("(x={})", gl(x)));
            // ZS11: r_G(x)|x = s_G(x)
            zs[10].holds(res(he, x) == Some(h.unit_arrow(g.src(x))), || {
                format!("(x={})", gl(x))
            });
        }
        for hh in h.arrows_from(u) {
            // ZS6: h|_{s(h)} = h
            zs[5].holds(res(hh, ge) == Some(hh), || format!("(h={})", hl(hh)));
            // ZS10: h·s(h) = r(h)
            zs[9].holds(act(hh, ge) == Some(g.unit_arrow(h.rng(hh))), || {
                format!("(h={})", hl(hh))
            });
        }
    }

    for c in zs {
        report.push(c);
    }
    report
}

/// The Zappa–Szép product groupoid together with its pair labelling.
#[derive(Clone, Debug, PartialEq)]
pub struct ZsGroupoid {
    pub groupoid: FiniteGroupoid,
    pub pair: MatchedPair,
    /// `pairs[k] = (x, h)` for the product arrow `k`.
    pub pairs: Vec<(ArrowId, ArrowId)>,
    index: HashMap<(ArrowId, ArrowId), ArrowId>,
}

impl ZsGroupoid {
    pub fn pair_of(&self, k: ArrowId) -> (ArrowId, ArrowId) {
        self.pairs[k.0]
    }

    pub fn arrow_of(&self, x: ArrowId, h: ArrowId) -> Option<ArrowId> {
        self.index.get(&(x, h)).copied()
    }

    /// `x ↦ (x, s(x))`.
    pub fn embed_g(&self, x: ArrowId) -> ArrowId {
        let g = self.pair.g();
        let u = self.pair.h().unit_arrow(g.src(x));
        self.index[&(x, u)]
    }

    /// `h ↦ (r(h), h)`.
    pub fn embed_h(&self, h: ArrowId) -> ArrowId {
        let e = self.pair.g().unit_arrow(self.pair.h().rng(h));
        self.index[&(e, h)]
    }
}

/// Build `G ⋈ H`. Fails unless the pair passes [`check_matched_pair`].
pub fn zs_groupoid(p: &MatchedPair) -> Result<ZsGroupoid> {
    let report = check_matched_pair(p);
    if !report.passed() {
        let failed = report.failed_ids().join(", ");
        return Err(Error::precondition(format!("not a matched pair: {failed}")));
    }
    let (g, h) = (p.g(), p.h());
    let mut pairs = Vec::new();
    for x in g.arrow_ids() {
        for hh in h.arrow_ids() {
            if g.src(x) == h.rng(hh) {
                pairs.push((x, hh));
            }
        }
    }
    let index: HashMap<_, _> = pairs
        .iter()
        .enumerate()
        .map(|(i, &xh)| (xh, ArrowId(i)))
        .collect();
    let arrows = pairs
        .iter()
        .map(|&(x, hh)| Arrow {
            label: format!("({},{})", g.label(x), h.label(hh)),
            src: h.src(hh),
            rng: g.rng(x),
        })
        .collect();
    let lookup = |x: ArrowId, hh: ArrowId| {
        index
            .get(&(x, hh))
            .copied()
            .ok_or_else(|| Error::structural("product left the fibered product"))
    };

    let n = pairs.len();
    let mut comp = Vec::new();
    for a in 0..n {
        let (x, hh) = pairs[a];
        for b in 0..n {
            let (y, k) = pairs[b];
            if h.src(hh) != g.rng(y) {
                continue;
            }
            let xy = g.compose(x, p.act(hh, y))?;
            let hk = h.compose(p.res(hh, y), k)?;
            comp.push((ArrowId(a), ArrowId(b), lookup(xy, hk)?));
        }
    }
    let mut inv = Vec::with_capacity(n);
    for &(x, hh) in &pairs {
        let hi = h.invert(hh);
        let xi = g.invert(x);
        inv.push(lookup(p.act(hi, xi), p.res(hi, xi))?);
    }
    let mut unit_arrow = Vec::new();
    for u in g.unit_ids() {
        unit_arrow.push(lookup(g.unit_arrow(u), h.unit_arrow(u))?);
    }
    let groupoid = FiniteGroupoid::from_tables(g.units().to_vec(), arrows, &comp, inv, unit_arrow)?;
    Ok(ZsGroupoid { groupoid, pair: p.clone(), pairs, index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{cyclic_group, validate_groupoid};

    #[test]
    fn trivial_pair_of_groups_is_direct_product() {
        let p = MatchedPair::trivial(cyclic_group(3, "a"), cyclic_group(2, "b")).unwrap();
        let r = check_matched_pair(&p);
        assert!(r.passed(), "{}", r.render_human());
        assert_eq!(r.checks.len(), 13);
        let zs = zs_groupoid(&p).unwrap();
        assert_eq!(zs.groupoid.n_arrows(), 6);
        assert!(validate_groupoid(&zs.groupoid).passed());
        // direct product: componentwise
        let x = zs.arrow_of(ArrowId(1), ArrowId(1)).unwrap();
        let y = zs.arrow_of(ArrowId(2), ArrowId(1)).unwrap();
        let xy = zs.groupoid.compose(x, y).unwrap();
        assert_eq!(zs.pair_of(xy), (ArrowId(0), ArrowId(0)));
    }

    #[test]
    fn off_domain_entry_is_structural() {
        let g = crate::gpd::pair_groupoid(&["a", "b"]);
        let h = crate::gpd::discrete(&["a", "b"]);
        // h = unit at a, x = (b,a) has range b: off domain
        let err = MatchedPair::from_tables(
            g.clone(),
            h,
            &[(ArrowId(0), ArrowId(2), ArrowId(2), ArrowId(0))],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn broken_restriction_fails_zs9_or_related() {
        let g = cyclic_group(3, "a");
        let h = cyclic_group(2, "b");
        // restriction collapses to the identity: violates ZS6 at h = b1
        let p = MatchedPair::from_fn(g, h, |_, x| (x, ArrowId(0))).unwrap();
        let r = check_matched_pair(&p);
        assert!(!r.check("ZS6").unwrap().passed);
        assert_eq!(r.check("ZS6").unwrap().witness.as_deref(), Some("(h=b1)"));
        assert!(zs_groupoid(&p).is_err());
    }
}
