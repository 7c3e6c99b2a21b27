//! Finite groupoids stored as explicit composition and inversion tables.
//!
//! Arrows and units are addressed by dense indices (`ArrowId`, `UnitId`);
//! labels are kept alongside for reporting and serialization. Every law
//! check is an exhaustive scan over the tables.

mod build;
mod factor;
mod pair;
mod selfsim;

pub use factor::{internal_factorization, Factorization};
pub use pair::{check_matched_pair, zs_groupoid, MatchedPair, ZsGroupoid};
pub use selfsim::{
    check_self_similar, self_similar_correspondence, self_similar_groupoid,
    transformation_matched_pair, SelfSimilarAction,
};

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::report::{Check, ValidationReport};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArrowId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitId(pub usize);

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub label: String,
    pub src: UnitId,
    pub rng: UnitId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroupoid {
    units: Vec<String>,
    arrows: Vec<Arrow>,
    /// Row-major `n x n` partial table, `comp[a * n + b] = ab`.
    comp: Vec<Option<ArrowId>>,
    inv: Vec<ArrowId>,
    unit_arrow: Vec<ArrowId>,
    arrow_index: HashMap<String, ArrowId>,
}

impl FiniteGroupoid {
    /// Assemble a groupoid from raw tables.
    ///
    /// Only structural problems (empty unit set, duplicate labels, dangling
    /// ids, conflicting table entries) are rejected here; the groupoid laws
    /// are left to [`validate_groupoid`].
    pub fn from_tables(
        units: Vec<String>,
        arrows: Vec<Arrow>,
        comp: &[(ArrowId, ArrowId, ArrowId)],
        inv: Vec<ArrowId>,
        unit_arrow: Vec<ArrowId>,
    ) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::structural("a groupoid needs at least one unit"));
        }
        let mut seen = HashMap::new();
        for (i, u) in units.iter().enumerate() {
            if seen.insert(u.clone(), i).is_some() {
                return Err(Error::structural(format!("duplicate unit `{u}`")));
            }
        }
        let n = arrows.len();
        let mut arrow_index = HashMap::new();
        for (i, a) in arrows.iter().enumerate() {
            if a.src.0 >= units.len() || a.rng.0 >= units.len() {
                return Err(Error::structural(format!(
                    "arrow `{}` refers to an undeclared unit",
                    a.label
                )));
            }
            if arrow_index.insert(a.label.clone(), ArrowId(i)).is_some() {
                return Err(Error::structural(format!("duplicate arrow `{}`", a.label)));
            }
        }
        let check_id = |x: ArrowId, what: &str| {
            if x.0 >= n {
                Err(Error::structural(format!("{what} refers to dangling arrow {x}")))
            } else {
                Ok(())
            }
        };
        let mut table = vec![None; n * n];
        for &(a, b, ab) in comp {
            check_id(a, "composition table")?;
            check_id(b, "composition table")?;
            check_id(ab, "composition table")?;
            let slot = &mut table[a.0 * n + b.0];
            match slot {
                Some(prev) if *prev != ab => {
                    return Err(Error::structural(format!(
                        "conflicting products for ({}, {})",
                        arrows[a.0].label, arrows[b.0].label
                    )))
                }
                _ => *slot = Some(ab),
            }
        }
        if inv.len() != n {
            return Err(Error::structural(format!(
                "inverse table has {} entries for {} arrows",
                inv.len(),
                n
            )));
        }
        for &x in &inv {
            check_id(x, "inverse table")?;
        }
        if unit_arrow.len() != units.len() {
            return Err(Error::structural("unit arrow table does not cover every unit"));
        }
        for &x in &unit_arrow {
            check_id(x, "unit arrow table")?;
        }
        Ok(FiniteGroupoid {
            units,
            arrows,
            comp: table,
            inv,
            unit_arrow,
            arrow_index,
        })
    }

    /// Build from closures; `compose` is only consulted on pairs with
    /// `src(a) == rng(b)`.
    pub fn from_fn(
        units: Vec<String>,
        arrows: Vec<Arrow>,
        compose: impl Fn(ArrowId, ArrowId) -> ArrowId,
        inverse: impl Fn(ArrowId) -> ArrowId,
        unit_arrow: Vec<ArrowId>,
    ) -> Result<Self> {
        let n = arrows.len();
        let mut comp = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if arrows[a].src == arrows[b].rng {
                    comp.push((ArrowId(a), ArrowId(b), compose(ArrowId(a), ArrowId(b))));
                }
            }
        }
        let inv = (0..n).map(|a| inverse(ArrowId(a))).collect();
        Self::from_tables(units, arrows, &comp, inv, unit_arrow)
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> + '_ {
        (0..self.arrows.len()).map(ArrowId)
    }

    pub fn unit_ids(&self) -> impl Iterator<Item = UnitId> + '_ {
        (0..self.units.len()).map(UnitId)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn label(&self, a: ArrowId) -> &str {
        &self.arrows[a.0].label
    }

    pub fn unit_label(&self, u: UnitId) -> &str {
        &self.units[u.0]
    }

    pub fn src(&self, a: ArrowId) -> UnitId {
        self.arrows[a.0].src
    }

    pub fn rng(&self, a: ArrowId) -> UnitId {
        self.arrows[a.0].rng
    }

    pub fn unit_arrow(&self, u: UnitId) -> ArrowId {
        self.unit_arrow[u.0]
    }

    pub fn unit_arrows(&self) -> &[ArrowId] {
        &self.unit_arrow
    }

    /// The unit whose unit arrow is `a`, if any.
    pub fn unit_of(&self, a: ArrowId) -> Option<UnitId> {
        self.unit_arrow.iter().position(|&x| x == a).map(UnitId)
    }

    pub fn is_unit_arrow(&self, a: ArrowId) -> bool {
        self.unit_of(a).is_some()
    }

    pub fn find_arrow(&self, label: &str) -> Option<ArrowId> {
        self.arrow_index.get(label).copied()
    }

    pub fn find_unit(&self, label: &str) -> Option<UnitId> {
        self.units.iter().position(|u| u == label).map(UnitId)
    }

    /// Raw table lookup, without the domain check.
    pub fn product(&self, a: ArrowId, b: ArrowId) -> Option<ArrowId> {
        self.comp[a.0 * self.arrows.len() + b.0]
    }

    pub fn composable(&self, a: ArrowId, b: ArrowId) -> bool {
        self.src(a) == self.rng(b)
    }

    pub fn compose(&self, a: ArrowId, b: ArrowId) -> Result<ArrowId> {
        if !self.composable(a, b) {
            return Err(self.not_composable(a, b));
        }
        self.product(a, b).ok_or_else(|| self.not_composable(a, b))
    }

    pub fn invert(&self, a: ArrowId) -> ArrowId {
        self.inv[a.0]
    }

    pub(crate) fn not_composable(&self, a: ArrowId, b: ArrowId) -> Error {
        Error::NotComposable {
            left: self.label(a).to_string(),
            right: self.label(b).to_string(),
        }
    }

    /// Arrows with range `u` (the set written `G^u`).
    pub fn arrows_to(&self, u: UnitId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.rng(a) == u)
    }

    /// Arrows with source `u` (the set written `G_u`).
    pub fn arrows_from(&self, u: UnitId) -> impl Iterator<Item = ArrowId> + '_ {
        self.arrow_ids().filter(move |&a| self.src(a) == u)
    }

    pub fn composable_pairs(&self) -> impl Iterator<Item = (ArrowId, ArrowId)> + '_ {
        self.arrow_ids().flat_map(move |a| {
            self.arrow_ids()
                .filter(move |&b| self.composable(a, b))
                .map(move |b| (a, b))
        })
    }

    /// A groupoid with a single unit.
    pub fn is_group(&self) -> bool {
        self.units.len() == 1
    }

    /// The full composition table as label triples, in arrow order.
    pub fn table_entries(&self) -> Vec<(ArrowId, ArrowId, ArrowId)> {
        let n = self.arrows.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if let Some(ab) = self.comp[a * n + b] {
                    out.push((ArrowId(a), ArrowId(b), ab));
                }
            }
        }
        out
    }
}

/// Check every groupoid law on the tables of `g`.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let mut report = ValidationReport::new(format!(
        "groupoid with {} units and {} arrows",
        g.n_units(),
        g.n_arrows()
    ));
    let l = |a: ArrowId| g.label(a).to_string();

    let mut domain = Check::exact("GPD.DOMAIN");
    let mut ends = Check::exact("GPD.ENDPOINTS");
    for a in g.arrow_ids() {
        for b in g.arrow_ids() {
            let defined = g.product(a, b);
            domain.holds(defined.is_some() == g.composable(a, b), || {
                format!("({}, {})", l(a), l(b))
            });
            if let (true, Some(ab)) = (g.composable(a, b), defined) {
                ends.holds(g.src(ab) == g.src(b) && g.rng(ab) == g.rng(a), || {
                    format!("({}, {}) -> {}", l(a), l(b), l(ab))
                });
            }
        }
    }

    let mut unit = Check::exact("GPD.UNIT");
    for u in g.unit_ids() {
        let e = g.unit_arrow(u);
        unit.holds(g.src(e) == u && g.rng(e) == u, || {
            format!("unit arrow {} of {}", l(e), g.unit_label(u))
        });
    }
    for a in g.arrow_ids() {
        let left = g.product(g.unit_arrow(g.rng(a)), a);
        let right = g.product(a, g.unit_arrow(g.src(a)));
        unit.holds(left == Some(a) && right == Some(a), || format!("({})", l(a)));
    }

    let mut assoc = Check::exact("GPD.ASSOC");
    for (a, b) in g.composable_pairs() {
        for c in g.arrows_to(g.src(b)) {
            let lhs = g.product(a, b).and_then(|ab| g.product(ab, c));
            let rhs = g.product(b, c).and_then(|bc| g.product(a, bc));
            assoc.holds(lhs.is_some() && lhs == rhs, || {
                format!("({}, {}, {})", l(a), l(b), l(c))
            });
        }
    }

    let mut inv = Check::exact("GPD.INV");
    for a in g.arrow_ids() {
        let ai = g.invert(a);
        let ok = g.src(ai) == g.rng(a)
            && g.rng(ai) == g.src(a)
            && g.product(a, ai) == Some(g.unit_arrow(g.rng(a)))
            && g.product(ai, a) == Some(g.unit_arrow(g.src(a)));
        inv.holds(ok, || format!("({})", l(a)));
    }

    for c in [domain, ends, unit, assoc, inv] {
        report.push(c);
    }
    report
}

/// Check that `f` (indexed by arrows of `g`) is a groupoid homomorphism
/// `g -> k`; with `bijective`, also that it is an isomorphism.
pub fn check_homomorphism(
    g: &FiniteGroupoid,
    k: &FiniteGroupoid,
    f: &[ArrowId],
    bijective: bool,
) -> ValidationReport {
    let mut report = ValidationReport::new("groupoid homomorphism");
    if f.len() != g.n_arrows() || f.iter().any(|x| x.0 >= k.n_arrows()) {
        report.structural("arrow map does not match the groupoids");
        return report;
    }
    let mut mul = Check::exact("HOM.MUL");
    for (a, b) in g.composable_pairs() {
        let lhs = g.product(a, b).map(|ab| f[ab.0]);
        let rhs = k.product(f[a.0], f[b.0]);
        mul.holds(lhs.is_some() && lhs == rhs, || {
            format!("({}, {})", g.label(a), g.label(b))
        });
    }
    let mut inv = Check::exact("HOM.INV");
    for a in g.arrow_ids() {
        inv.holds(f[g.invert(a).0] == k.invert(f[a.0]), || g.label(a).to_string());
    }
    let mut units = Check::exact("HOM.UNIT");
    for u in g.unit_ids() {
        units.holds(k.is_unit_arrow(f[g.unit_arrow(u).0]), || g.unit_label(u).to_string());
    }
    report.push(mul);
    report.push(inv);
    report.push(units);
    if bijective {
        let mut bij = Check::exact("HOM.BIJECTIVE");
        let mut hit = vec![false; k.n_arrows()];
        for &x in f {
            hit[x.0] = true;
        }
        let ok = g.n_arrows() == k.n_arrows() && hit.iter().all(|&h| h);
        bij.holds(ok, || format!("{} -> {} arrows", g.n_arrows(), k.n_arrows()));
        report.push(bij);
    }
    report
}

pub use build::{cyclic_group, discrete, group_from_table, pair_groupoid, symmetric_group};

#[cfg(test)]
mod tests {
    use super::*;

    fn z2_tables(gg: usize) -> FiniteGroupoid {
        let arrows = vec![
            Arrow { label: "e".into(), src: UnitId(0), rng: UnitId(0) },
            Arrow { label: "g".into(), src: UnitId(0), rng: UnitId(0) },
        ];
        let (e, g) = (ArrowId(0), ArrowId(1));
        FiniteGroupoid::from_tables(
            vec!["o".into()],
            arrows,
            &[(e, e, e), (e, g, g), (g, e, g), (g, g, ArrowId(gg))],
            vec![e, g],
            vec![e],
        )
        .unwrap()
    }

    #[test]
    fn z2_is_a_groupoid() {
        let r = validate_groupoid(&z2_tables(0));
        assert!(r.passed(), "{}", r.render_human());
    }

    #[test]
    fn broken_z2_violates_inverse_law_at_g() {
        let r = validate_groupoid(&z2_tables(1));
        let inv = r.check("GPD.INV").unwrap();
        assert!(!inv.passed);
        assert_eq!(inv.witness.as_deref(), Some("(g)"));
        assert!(r.structural.is_empty());
    }

    #[test]
    fn discrete_groupoid_is_valid() {
        let g = discrete(&["a", "b", "c"]);
        assert_eq!(g.n_arrows(), 3);
        assert!(validate_groupoid(&g).passed());
    }

    #[test]
    fn dangling_ids_are_structural() {
        let arrows = vec![Arrow { label: "e".into(), src: UnitId(0), rng: UnitId(0) }];
        let err = FiniteGroupoid::from_tables(
            vec!["o".into()],
            arrows,
            &[(ArrowId(0), ArrowId(0), ArrowId(3))],
            vec![ArrowId(0)],
            vec![ArrowId(0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn empty_groupoid_rejected() {
        let err = FiniteGroupoid::from_tables(vec![], vec![], &[], vec![], vec![]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn compose_with_unit_and_double_inverse() {
        let g = symmetric_group(3);
        for a in g.arrow_ids() {
            assert_eq!(g.compose(a, g.unit_arrow(g.src(a))).unwrap(), a);
            assert_eq!(g.invert(g.invert(a)), a);
        }
    }

    #[test]
    fn non_composable_pair_is_a_domain_error() {
        let g = pair_groupoid(&["a", "b"]);
        let ab = g.find_arrow("(a,b)").unwrap();
        let err = g.compose(ab, ab).unwrap_err();
        assert_eq!(
            err,
            Error::NotComposable { left: "(a,b)".into(), right: "(a,b)".into() }
        );
    }
}
