//! Homomorphisms between Fell bundles, given as fiberwise matrices.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FellBundle;
use crate::gpd::{check_homomorphism, ArrowId};
use crate::linalg::{numerical_rank, random_vector, CMat, CVec, C64};
use crate::report::{Check, ValidationReport};

/// A map of bundles covering `arrow_map`; `maps[x]` sends coordinates over
/// `x` to coordinates over `arrow_map[x]`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleHom {
    pub arrow_map: Vec<ArrowId>,
    pub maps: Vec<CMat>,
}

impl BundleHom {
    /// Tabulate a fiberwise linear map from its values on basis vectors.
    pub fn from_fn<A: FellBundle + ?Sized>(
        a: &A,
        arrow_map: Vec<ArrowId>,
        target_dims: impl Fn(ArrowId) -> usize,
        f: impl Fn(ArrowId, &CVec) -> CVec,
    ) -> Self {
        let g = a.groupoid();
        let maps = g
            .arrow_ids()
            .map(|x| {
                let d = a.fiber_dim(x);
                let mut m = CMat::zeros(target_dims(arrow_map[x.0]), d);
                for i in 0..d {
                    let mut e = CVec::zeros(d);
                    e[i] = C64::new(1.0, 0.0);
                    m.set_column(i, &f(x, &e));
                }
                m
            })
            .collect();
        BundleHom { arrow_map, maps }
    }

    pub fn apply(&self, x: ArrowId, b: &CVec) -> CVec {
        &self.maps[x.0] * b
    }
}

/// Check H1 (fiber-preserving and linear, over a groupoid homomorphism),
/// H2 (multiplicative), H3 (*-preserving), and optionally isometry and
/// bijectivity. Every law is checked on basis tuples; isometry also on
/// `samples` seeded random combinations per fiber.
pub fn check_bundle_hom<A: FellBundle + ?Sized, B: FellBundle + ?Sized>(
    a: &A,
    b: &B,
    hom: &BundleHom,
    tol: f64,
    seed: u64,
    isometric: bool,
    bijective: bool,
) -> ValidationReport {
    let (g, k) = (a.groupoid(), b.groupoid());
    let mut report = ValidationReport::new("Fell bundle homomorphism");
    let mut h1 = Check::exact("H1");
    let arrows = check_homomorphism(g, k, &hom.arrow_map, bijective);
    for c in &arrows.checks {
        h1.holds(c.passed, || format!("arrow map fails {}", c.id));
    }
    if !arrows.structural.is_empty() || hom.maps.len() != g.n_arrows() {
        report.structural("homomorphism does not match the bundles");
        return report;
    }
    for x in g.arrow_ids() {
        let fx = hom.arrow_map[x.0];
        let shape = (b.fiber_dim(fx), a.fiber_dim(x));
        if hom.maps[x.0].shape() != shape {
            report.structural(format!("fiber map over {} has the wrong shape", g.label(x)));
            return report;
        }
    }
    report.push(h1);

    let rel = |r: f64, s: f64| r / s.max(1.0);
    let unit = |n: usize, i: usize| {
        let mut v = CVec::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    };
    let lab = |x: ArrowId, i: usize| format!("{}[{}]", g.label(x), i);

    let mut h2 = Check::within("H2", tol);
    for (x, y) in g.composable_pairs() {
        let xy = g.product(x, y).expect("composable");
        let (fx, fy) = (hom.arrow_map[x.0], hom.arrow_map[y.0]);
        if !k.composable(fx, fy) {
            continue;
        }
        for i in 0..a.fiber_dim(x) {
            let ei = unit(a.fiber_dim(x), i);
            for j in 0..a.fiber_dim(y) {
                let ej = unit(a.fiber_dim(y), j);
                let lhs = hom.apply(xy, &a.mul_raw(x, &ei, y, &ej));
                let rhs = b.mul_raw(fx, &hom.apply(x, &ei), fy, &hom.apply(y, &ej));
                h2.observe(rel((&lhs - &rhs).norm(), lhs.norm()), || {
                    format!("({}, {})", lab(x, i), lab(y, j))
                });
            }
        }
    }
    report.push(h2);

    let mut h3 = Check::within("H3", tol);
    let mut iso = Check::within("ISOMETRIC", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in g.arrow_ids() {
        let d = a.fiber_dim(x);
        let fx = hom.arrow_map[x.0];
        for i in 0..d {
            let e = unit(d, i);
            let lhs = hom.apply(g.invert(x), &a.star_raw(x, &e));
            let rhs = b.star_raw(fx, &hom.apply(x, &e));
            h3.observe(rel((&lhs - &rhs).norm(), lhs.norm()), || lab(x, i));
        }
        if isometric {
            let mut vs: Vec<CVec> = (0..d).map(|i| unit(d, i)).collect();
            vs.extend((0..3).map(|_| random_vector(&mut rng, d)));
            for (n, v) in vs.iter().enumerate() {
                let na = a.norm_raw(x, v);
                let nb = b.norm_raw(fx, &hom.apply(x, v));
                iso.observe(rel((na - nb).abs(), na), || {
                    if n < d { lab(x, n) } else { format!("random over {}", g.label(x)) }
                });
            }
        }
    }
    report.push(h3);
    if isometric {
        report.push(iso);
    }
    if bijective {
        let mut bij = Check::exact("BIJECTIVE");
        for x in g.arrow_ids() {
            let m = &hom.maps[x.0];
            let ok = m.nrows() == m.ncols() && numerical_rank(m, 1e-8) == m.ncols();
            bij.holds(ok, || format!("fiber map over {}", g.label(x)));
        }
        report.push(bij);
        report.metric(
            "total_rank",
            hom.maps.iter().map(|m| numerical_rank(m, 1e-8)).sum::<usize>(),
        );
    }
    report.metric_real("max_residual", report.max_residual());
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fell::{full_matrix_bundle, line_bundle};
    use crate::gpd::symmetric_group;
    use crate::linalg::real;

    #[test]
    fn identity_is_an_isometric_isomorphism() {
        let g = symmetric_group(3);
        let b = full_matrix_bundle(&g, 2);
        let hom = BundleHom::from_fn(&b, g.arrow_ids().collect(), |x| b.fiber_dim(x), |_, v| v.clone());
        let r = check_bundle_hom(&b, &b, &hom, 1e-9, 0, true, true);
        assert!(r.passed(), "{}", r.render_human());
    }

    #[test]
    fn scaling_breaks_multiplicativity_and_isometry() {
        let g = symmetric_group(3);
        let b = line_bundle(&g);
        let hom = BundleHom::from_fn(&b, g.arrow_ids().collect(), |_| 1, |_, v| v * real(2.0));
        let r = check_bundle_hom(&b, &b, &hom, 1e-9, 0, true, true);
        assert!(!r.check("H2").unwrap().passed);
        assert!(!r.check("ISOMETRIC").unwrap().passed);
        assert!(r.check("H3").unwrap().passed);
    }
}
