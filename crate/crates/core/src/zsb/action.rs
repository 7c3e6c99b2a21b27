use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fell::{line_bundle, BundleElement, BundleExt, FellBundle};
use crate::gpd::{check_matched_pair, ArrowId, MatchedPair};
use crate::linalg::{max_abs, numerical_rank, random_vector, CMat, CVec, C64};
use crate::report::{Check, ValidationReport};

/// An action of `H` on a bundle over `G`: for each `(h, x)` with
/// `s(h) = r(x)`, a linear map from the fiber over `x` to the fiber over
/// `h·x`, stored as a matrix in the fiber bases.
#[derive(Clone, Debug)]
pub struct CompatibleAction {
    pair: MatchedPair,
    base: Arc<dyn FellBundle>,
    beta: Vec<Option<CMat>>,
}

impl CompatibleAction {
    /// Entries are `(h, x, matrix)`; every domain pair must appear once.
    pub fn from_matrices(
        pair: MatchedPair,
        base: Arc<dyn FellBundle>,
        entries: Vec<(ArrowId, ArrowId, CMat)>,
    ) -> Result<Self> {
        if base.groupoid() != pair.g() {
            return Err(Error::structural("the bundle does not live over the pair's G"));
        }
        let (ng, nh) = (pair.g().n_arrows(), pair.h().n_arrows());
        let mut beta = vec![None; ng * nh];
        for (h, x, m) in entries {
            if h.0 >= nh || x.0 >= ng {
                return Err(Error::structural("action matrix over a dangling arrow"));
            }
            if !pair.defined(h, x) {
                return Err(Error::structural(format!(
                    "action matrix given off its domain at ({}, {})",
                    pair.h().label(h),
                    pair.g().label(x)
                )));
            }
            let shape = (base.fiber_dim(pair.act(h, x)), base.fiber_dim(x));
            if m.shape() != shape {
                return Err(Error::structural(format!(
                    "action matrix at ({}, {}) has shape {:?}, expected {:?}",
                    pair.h().label(h),
                    pair.g().label(x),
                    m.shape(),
                    shape
                )));
            }
            let slot = &mut beta[h.0 * ng + x.0];
            if slot.is_some() {
                return Err(Error::structural("action matrix given twice"));
            }
            *slot = Some(m);
        }
        for (h, x) in pair.domain() {
            if beta[h.0 * ng + x.0].is_none() {
                return Err(Error::structural(format!(
                    "action matrix missing at ({}, {})",
                    pair.h().label(h),
                    pair.g().label(x)
                )));
            }
        }
        Ok(CompatibleAction { pair, base, beta })
    }

    /// Tabulate `f(h, x, b)` on basis vectors `b` of the fiber over `x`.
    pub fn from_fn(
        pair: MatchedPair,
        base: Arc<dyn FellBundle>,
        f: impl Fn(ArrowId, ArrowId, &CVec) -> CVec,
    ) -> Result<Self> {
        if base.groupoid() != pair.g() {
            return Err(Error::structural("the bundle does not live over the pair's G"));
        }
        let mut entries = Vec::new();
        for (h, x) in pair.domain() {
            let d = base.fiber_dim(x);
            let mut m = CMat::zeros(base.fiber_dim(pair.act(h, x)), d);
            for i in 0..d {
                let image = f(h, x, &base.basis_element(x, i).coeffs);
                if image.len() != m.nrows() {
                    return Err(Error::structural("action image has the wrong length"));
                }
                m.set_column(i, &image);
            }
            entries.push((h, x, m));
        }
        Self::from_matrices(pair, base, entries)
    }

    /// `β(h, (z, x)) = (z, h·x)` on the line bundle over `G`.
    pub fn line_canonical(pair: MatchedPair) -> Result<Self> {
        let base: Arc<dyn FellBundle> = Arc::new(line_bundle(pair.g()));
        Self::from_fn(pair, base, |_, _, b| b.clone())
    }

    pub fn pair(&self) -> &MatchedPair {
        &self.pair
    }

    pub fn base(&self) -> &Arc<dyn FellBundle> {
        &self.base
    }

    /// The matrix of `β_h` on the fiber over `x`.
    pub fn matrix(&self, h: ArrowId, x: ArrowId) -> &CMat {
        self.beta[h.0 * self.pair.g().n_arrows() + x.0]
            .as_ref()
            .expect("action queried off its domain")
    }

    pub fn apply_raw(&self, h: ArrowId, x: ArrowId, b: &CVec) -> CVec {
        self.matrix(h, x) * b
    }

    pub fn apply(&self, h: ArrowId, b: &BundleElement) -> Result<BundleElement> {
        if !self.pair.defined(h, b.arrow) {
            return Err(Error::NotComposable {
                left: self.pair.h().label(h).to_string(),
                right: self.pair.g().label(b.arrow).to_string(),
            });
        }
        Ok(BundleElement::new(
            self.pair.act(h, b.arrow),
            self.apply_raw(h, b.arrow, &b.coeffs),
        ))
    }
}

fn unit_vec(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Check A1–A5, the unit-fiber *-isomorphism property, isometry, and
/// `β_{h⁻¹} β_h = id`, on all basis elements and composable tuples.
pub fn validate_action(a: &CompatibleAction, tol: f64, seed: u64) -> ValidationReport {
    let (p, base) = (&a.pair, &a.base);
    let (g, h) = (p.g(), p.h());
    let mut report = ValidationReport::new(format!(
        "compatible action on ({}), |H| = {}",
        base.describe(),
        h.n_arrows()
    ));
    if !check_matched_pair(p).passed() {
        report.structural("the underlying data is not a matched pair");
        return report;
    }
    let rel = |r: f64, s: f64| r / s.max(1.0);
    let hx = |hh: ArrowId, x: ArrowId| format!("(h={}, x={})", h.label(hh), g.label(x));

    let mut a1 = Check::exact("A1");
    let mut a2 = Check::within("A2", tol);
    let mut a3 = Check::within("A3", tol);
    let mut a4 = Check::within("A4", tol);
    let mut a5 = Check::within("A5", tol);
    let mut unit_iso = Check::within("UNIT_ISO", tol);
    let mut isometry = Check::within("ISOMETRY", tol);
    let mut inverse = Check::within("INVERSE", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for (hh, x) in p.domain() {
        let m = a.matrix(hh, x);
        let y = p.act(hh, x);
        let (dx, dy) = (base.fiber_dim(x), base.fiber_dim(y));
        a1.holds(m.shape() == (dy, dx), || hx(hh, x));

        // A2 over every k with s(k) = r(h)
        for k in h.arrow_ids().filter(|&k| h.composable(k, hh)) {
            let kh = h.product(k, hh).expect("composable");
            let lhs = a.matrix(kh, x);
            let rhs = a.matrix(k, y) * m;
            a2.observe(rel(max_abs(&(lhs - rhs)), max_abs(lhs)), || {
                format!("(g={}, h={}, x={})", h.label(k), h.label(hh), g.label(x))
            });
        }
        if h.is_unit_arrow(hh) {
            let id = CMat::identity(dx, dx);
            a3.observe(if m.shape() == id.shape() { max_abs(&(m - id)) } else { 1.0 }, || {
                hx(hh, x)
            });
        }

        // A4 over basis pairs b ∈ B_x, c ∈ B_z
        let r = p.res(hh, x);
        for z in g.arrows_to(g.src(x)) {
            let xz = g.product(x, z).expect("composable");
            let rz = p.act(r, z);
            for i in 0..dx {
                let bi = unit_vec(dx, i);
                let bb = m * &bi;
                for j in 0..base.fiber_dim(z) {
                    let cj = unit_vec(base.fiber_dim(z), j);
                    let lhs = a.apply_raw(hh, xz, &base.mul_raw(x, &bi, z, &cj));
                    let rhs = base.mul_raw(y, &bb, rz, &a.apply_raw(r, z, &cj));
                    a4.observe(rel((&lhs - &rhs).norm(), lhs.norm()), || {
                        format!("(h={}, b={}[{}], c={}[{}])", h.label(hh), g.label(x), i, g.label(z), j)
                    });
                }
            }
        }

        // A5, isometry and the inverse law on basis and random elements
        let xi = g.invert(x);
        let hinv = h.invert(hh);
        let mut elems: Vec<CVec> = (0..dx).map(|i| unit_vec(dx, i)).collect();
        elems.extend((0..2).map(|_| random_vector(&mut rng, dx)));
        for (n, b) in elems.iter().enumerate() {
            let wit = || {
                if n < dx {
                    format!("(h={}, b={}[{}])", h.label(hh), g.label(x), n)
                } else {
                    format!("(h={}, random over {})", h.label(hh), g.label(x))
                }
            };
            let bb = m * b;
            let lhs = base.star_raw(y, &bb);
            let rhs = a.apply_raw(r, xi, &base.star_raw(x, b));
            a5.observe(rel((&lhs - &rhs).norm(), lhs.norm()), wit);
            let (n0, n1) = (base.norm_raw(x, b), base.norm_raw(y, &bb));
            isometry.observe(rel((n0 - n1).abs(), n0), wit);
            let back = a.apply_raw(hinv, y, &bb);
            inverse.observe(rel((&back - b).norm(), b.norm()), wit);
        }

        // on unit fibers β_h is a unital *-isomorphism
        if g.unit_of(x).is_some() {
            let full = m.nrows() == m.ncols() && numerical_rank(m, 1e-8) == m.ncols();
            unit_iso.observe(if full { 0.0 } else { 1.0 }, || format!("{} not bijective", hx(hh, x)));
            let (u, v) = (g.unit_of(x).expect("unit"), g.unit_of(y));
            match (base.unit_raw(u), v.and_then(|v| base.unit_raw(v))) {
                (Some(one), Some(one_y)) => {
                    unit_iso.observe(rel((m * one - one_y).norm(), 1.0), || {
                        format!("{} not unital", hx(hh, x))
                    });
                }
                (Some(_), None) => unit_iso.holds(false, || format!("{} leaves the units", hx(hh, x))),
                _ => {}
            }
        }
    }
    for c in [a1, a2, a3, a4, a5, unit_iso, isometry, inverse] {
        report.push(c);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{cyclic_group, MatchedPair};
    use crate::linalg::real;

    fn z3z2_line() -> CompatibleAction {
        let p = MatchedPair::trivial(cyclic_group(3, "a"), cyclic_group(2, "b")).unwrap();
        CompatibleAction::line_canonical(p).unwrap()
    }

    #[test]
    fn canonical_line_action_passes() {
        let r = validate_action(&z3z2_line(), 1e-9, 0);
        assert!(r.passed(), "{}", r.render_human());
    }

    #[test]
    fn scaled_fiber_breaks_the_action() {
        let a = z3z2_line();
        let p = a.pair().clone();
        let base = a.base().clone();
        let scaled = CompatibleAction::from_fn(p, base, |h, x, b| {
            if h.0 == 1 && x.0 == 1 { b * real(2.0) } else { b.clone() }
        })
        .unwrap();
        let r = validate_action(&scaled, 1e-9, 0);
        assert!(!r.passed());
        assert!(!r.check("ISOMETRY").unwrap().passed);
        assert!(!r.check("A2").unwrap().passed);
    }

    #[test]
    fn wrong_shape_is_structural() {
        let a = z3z2_line();
        let p = a.pair().clone();
        let err = CompatibleAction::from_matrices(
            p,
            a.base().clone(),
            vec![(ArrowId(0), ArrowId(0), CMat::zeros(2, 2))],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }
}
