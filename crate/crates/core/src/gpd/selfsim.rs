//! Self-similar actions of a finite group on a finite groupoid, and the
//! matched pair they induce with the transformation groupoid.

use super::{Arrow, ArrowId, FiniteGroupoid, MatchedPair, UnitId, ZsGroupoid};
use crate::error::{Error, Result};
use crate::report::{Check, ValidationReport};

/// A group `H` acting on `G` by `h ∗ x`, with cocycle `h • x` in `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfSimilarAction {
    g: FiniteGroupoid,
    h: FiniteGroupoid,
    ast: Vec<ArrowId>,
    bullet: Vec<ArrowId>,
}

impl SelfSimilarAction {
    /// Tabulate `f(h, x) = (h ∗ x, h • x)` for every pair.
    pub fn from_fn(
        g: FiniteGroupoid,
        h: FiniteGroupoid,
        f: impl Fn(ArrowId, ArrowId) -> (ArrowId, ArrowId),
    ) -> Result<Self> {
        if !h.is_group() {
            return Err(Error::structural("the acting groupoid must have a single unit"));
        }
        let mut ast = Vec::with_capacity(h.n_arrows() * g.n_arrows());
        let mut bullet = Vec::with_capacity(ast.capacity());
        for hh in h.arrow_ids() {
            for x in g.arrow_ids() {
                let (y, k) = f(hh, x);
                if y.0 >= g.n_arrows() || k.0 >= h.n_arrows() {
                    return Err(Error::structural("self-similar table refers to a dangling arrow"));
                }
                ast.push(y);
                bullet.push(k);
            }
        }
        Ok(SelfSimilarAction { g, h, ast, bullet })
    }

    pub fn g(&self) -> &FiniteGroupoid {
        &self.g
    }

    pub fn h(&self) -> &FiniteGroupoid {
        &self.h
    }

    pub fn ast(&self, h: ArrowId, x: ArrowId) -> ArrowId {
        self.ast[h.0 * self.g.n_arrows() + x.0]
    }

    pub fn bullet(&self, h: ArrowId, x: ArrowId) -> ArrowId {
        self.bullet[h.0 * self.g.n_arrows() + x.0]
    }

    /// `h ∗ u` on units, if `h ∗` sends the unit arrow of `u` to a unit arrow.
    pub fn act_unit(&self, h: ArrowId, u: UnitId) -> Option<UnitId> {
        self.g.unit_of(self.ast(h, self.g.unit_arrow(u)))
    }

    fn identity(&self) -> ArrowId {
        self.h.unit_arrow(UnitId(0))
    }
}

/// Check that `∗` is a group action and that properties (1)–(4) hold.
///
/// Whether `h ∗` preserves units is reported as a note, not a check.
pub fn check_self_similar(s: &SelfSimilarAction) -> ValidationReport {
    let (g, h) = (&s.g, &s.h);
    let mut report = ValidationReport::new(format!(
        "self-similar action, |G| = {}, |H| = {}",
        g.n_arrows(),
        h.n_arrows()
    ));
    let e = s.identity();
    let gl = |a: ArrowId| g.label(a).to_string();
    let hl = |a: ArrowId| h.label(a).to_string();
    let gmul = |a: ArrowId, b: ArrowId| g.product(a, b).filter(|_| g.composable(a, b));

    let mut action = Check::exact("SS.ACTION");
    let mut p1 = Check::exact("SS1");
    let mut p2 = Check::exact("SS2");
    let mut p3 = Check::exact("SS3");
    let mut p4 = Check::exact("SS4");

    for x in g.arrow_ids() {
        action.holds(s.ast(e, x) == x, || format!("(e, x={})", gl(x)));
        p1.holds(s.bullet(e, x) == e, || format!("(e, x={})", gl(x)));
    }
    for hh in h.arrow_ids() {
        for &v in g.unit_arrows() {
            p1.holds(s.bullet(hh, v) == hh, || format!("(h={}, v={})", hl(hh), gl(v)));
            if !g.is_unit_arrow(s.ast(hh, v)) {
                report.note(format!(
                    "{} * {} is not a unit arrow",
                    hl(hh),
                    gl(v)
                ));
            }
        }
        for k in h.arrow_ids() {
            let hk = h.compose(hh, k).expect("group");
            for x in g.arrow_ids() {
                let w = || format!("(g={}, h={}, x={})", hl(hh), hl(k), gl(x));
                action.holds(s.ast(hk, x) == s.ast(hh, s.ast(k, x)), w);
                let rhs = h.compose(s.bullet(hh, s.ast(k, x)), s.bullet(k, x)).expect("group");
                p4.holds(s.bullet(hk, x) == rhs, w);
            }
        }
        for (x, y) in g.composable_pairs() {
            let xy = g.compose(x, y).expect("composable");
            let w = || format!("(h={}, x={}, y={})", hl(hh), gl(x), gl(y));
            p2.holds(s.bullet(hh, xy) == s.bullet(s.bullet(hh, x), y), w);
            let rhs = gmul(s.ast(hh, x), s.ast(s.bullet(hh, x), y));
            p3.holds(rhs == Some(s.ast(hh, xy)), w);
        }
    }
    for c in [action, p1, p2, p3, p4] {
        report.push(c);
    }
    report
}

/// Index of the transformation-groupoid arrow `(u, h)`.
fn t_index(s: &SelfSimilarAction, u: UnitId, h: ArrowId) -> ArrowId {
    ArrowId(u.0 * s.h.n_arrows() + h.0)
}

/// The matched pair `(G, G⁽⁰⁾ ⋊ H)` with `(u,h)·x = h ∗ x` and
/// `(u,h)|x = (h ∗ s(x), h • x)`.
pub fn transformation_matched_pair(s: &SelfSimilarAction) -> Result<MatchedPair> {
    let report = check_self_similar(s);
    if !report.passed() {
        let c = report.checks.iter().find(|c| !c.passed).expect("a failing check");
        return Err(Error::structural(format!(
            "{} fails at {}",
            c.id,
            c.witness.as_deref().unwrap_or("?")
        )));
    }
    let (g, h) = (&s.g, &s.h);
    let unit_act = |hh: ArrowId, u: UnitId| {
        s.act_unit(hh, u).ok_or_else(|| {
            Error::structural(format!(
                "{} does not map the unit {} to a unit",
                h.label(hh),
                g.unit_label(u)
            ))
        })
    };
    let mut arrows = Vec::new();
    let mut inv = Vec::new();
    for u in g.unit_ids() {
        for hh in h.arrow_ids() {
            let hi = h.invert(hh);
            let src = unit_act(hi, u)?;
            arrows.push(Arrow {
                label: format!("({},{})", g.unit_label(u), h.label(hh)),
                src,
                rng: u,
            });
            inv.push(t_index(s, src, hi));
        }
    }
    let nh = h.n_arrows();
    let mut comp = Vec::new();
    for a in 0..arrows.len() {
        let (u, hh) = (UnitId(a / nh), ArrowId(a % nh));
        for k in h.arrow_ids() {
            let v = arrows[a].src;
            let b = t_index(s, v, k);
            comp.push((ArrowId(a), b, t_index(s, u, h.compose(hh, k)?)));
        }
    }
    let e = s.identity();
    let unit_arrow = g.unit_ids().map(|u| t_index(s, u, e)).collect();
    let t = FiniteGroupoid::from_tables(g.units().to_vec(), arrows, &comp, inv, unit_arrow)?;

    let gg = g.clone();
    MatchedPair::from_fn(gg, t, |uh, x| {
        let hh = ArrowId(uh.0 % nh);
        let y = s.ast(hh, x);
        let su = s.act_unit(hh, g.src(x)).expect("units preserved");
        (y, t_index(s, su, s.bullet(hh, x)))
    })
}

/// The self-similar groupoid on pairs `(x, h)`, with
/// `(x,h)(y,k) = (x(h∗y), (h•y)k)` whenever `h ∗ r(y) = s(x)`.
pub fn self_similar_groupoid(s: &SelfSimilarAction) -> Result<FiniteGroupoid> {
    let (g, h) = (&s.g, &s.h);
    let nh = h.n_arrows();
    let idx = |x: ArrowId, hh: ArrowId| ArrowId(x.0 * nh + hh.0);
    let unit_act = |hh: ArrowId, u: UnitId| {
        s.act_unit(hh, u)
            .ok_or_else(|| Error::structural("action does not preserve units"))
    };
    let mut arrows = Vec::new();
    let mut inv = Vec::new();
    for x in g.arrow_ids() {
        for hh in h.arrow_ids() {
            let hi = h.invert(hh);
            arrows.push(Arrow {
                label: format!("({},{})", g.label(x), h.label(hh)),
                src: unit_act(hi, g.src(x))?,
                rng: g.rng(x),
            });
            let xi = g.invert(x);
            inv.push(idx(s.ast(hi, xi), s.bullet(hi, xi)));
        }
    }
    let mut comp = Vec::new();
    for a in 0..arrows.len() {
        let (x, hh) = (ArrowId(a / nh), ArrowId(a % nh));
        for y in g.arrows_to(arrows[a].src) {
            for k in h.arrow_ids() {
                let xy = g.compose(x, s.ast(hh, y))?;
                let hk = h.compose(s.bullet(hh, y), k)?;
                comp.push((ArrowId(a), idx(y, k), idx(xy, hk)));
            }
        }
    }
    let e = s.identity();
    let unit_arrow = g.unit_ids().map(|u| idx(g.unit_arrow(u), e)).collect();
    FiniteGroupoid::from_tables(g.units().to_vec(), arrows, &comp, inv, unit_arrow)
}

/// Map from the arrows of `zs_groupoid(transformation_matched_pair(s))` to
/// the arrows of [`self_similar_groupoid`]: `(x, (u, h)) ↦ (x, h)`.
pub fn self_similar_correspondence(s: &SelfSimilarAction, zs: &ZsGroupoid) -> Vec<ArrowId> {
    let nh = s.h.n_arrows();
    zs.pairs
        .iter()
        .map(|&(x, uh)| ArrowId(x.0 * nh + uh.0 % nh))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{
        check_homomorphism, check_matched_pair, cyclic_group, discrete, validate_groupoid,
        zs_groupoid,
    };

    fn flip() -> SelfSimilarAction {
        let g = discrete(&["a", "b"]);
        SelfSimilarAction::from_fn(g, cyclic_group(2, "t"), |h, x| {
            (ArrowId((x.0 + h.0) % 2), h)
        })
        .unwrap()
    }

    #[test]
    fn flip_gives_four_arrow_transformation_groupoid() {
        let s = flip();
        assert!(check_self_similar(&s).passed());
        let p = transformation_matched_pair(&s).unwrap();
        assert_eq!(p.h().n_arrows(), 4);
        assert!(validate_groupoid(p.h()).passed());
        assert!(check_matched_pair(&p).passed());
        let zs = zs_groupoid(&p).unwrap();
        let ss = self_similar_groupoid(&s).unwrap();
        let f = self_similar_correspondence(&s, &zs);
        let r = check_homomorphism(&zs.groupoid, &ss, &f, true);
        assert!(r.passed(), "{}", r.render_human());
    }

    #[test]
    fn non_action_is_reported() {
        let g = discrete(&["a", "b"]);
        let s = SelfSimilarAction::from_fn(g, cyclic_group(2, "t"), |_, x| (x, ArrowId(1)))
            .unwrap();
        let r = check_self_similar(&s);
        assert!(!r.check("SS1").unwrap().passed);
        assert!(matches!(transformation_matched_pair(&s), Err(Error::Structural(_))));
    }
}
