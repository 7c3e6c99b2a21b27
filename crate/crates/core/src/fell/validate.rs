//! The F1–F10 checker, run against any [`FellBundle`] implementation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FellBundle;
use crate::gpd::ArrowId;
use crate::linalg::{random_complex, random_vector, CMat, CVec, C64};
use crate::report::{Check, ValidationReport};

#[derive(Clone, Debug)]
pub struct FellOptions {
    pub tol: f64,
    pub seed: u64,
    /// Random combinations drawn per arrow or per composable pair.
    pub samples: usize,
}

impl Default for FellOptions {
    fn default() -> Self {
        FellOptions { tol: 1e-9, seed: 0, samples: 2 }
    }
}

fn unit_vec(n: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(n);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Check every Fell bundle axiom.
///
/// Algebraic laws are checked on all basis tuples; norm laws on basis
/// elements and on seeded random combinations scaled to unit norm.
/// Residuals are relative to `max(1, operand norms)`.
pub fn validate_fell_bundle<B: FellBundle + ?Sized>(b: &B, opts: &FellOptions) -> ValidationReport {
    let g = b.groupoid();
    let mut report = ValidationReport::new(format!("Fell bundle: {}", b.describe()));
    let tol = opts.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let lab = |x: ArrowId| g.label(x).to_string();
    let dim = |x: ArrowId| b.fiber_dim(x);

    // shapes first: every later check relies on them
    for x in g.arrow_ids() {
        let xi = g.invert(x);
        for i in 0..dim(x) {
            let s = b.star_raw(x, &unit_vec(dim(x), i));
            if s.len() != dim(xi) {
                report.structural(format!("star over {} has the wrong length", lab(x)));
                return report;
            }
        }
    }
    // products[(x,y)] = dim(xy) × (dim x · dim y), column i * dim y + j
    let n = g.n_arrows();
    let mut products: Vec<Option<CMat>> = vec![None; n * n];
    for (x, y) in g.composable_pairs() {
        let xy = g.product(x, y).expect("composable");
        let mut m = CMat::zeros(dim(xy), dim(x) * dim(y));
        for i in 0..dim(x) {
            for j in 0..dim(y) {
                let p = b.mul_raw(x, &unit_vec(dim(x), i), y, &unit_vec(dim(y), j));
                if p.len() != dim(xy) {
                    report.structural(format!(
                        "product over ({}, {}) has the wrong length",
                        lab(x),
                        lab(y)
                    ));
                    return report;
                }
                m.set_column(i * dim(y) + j, &p);
            }
        }
        products[x.0 * n + y.0] = Some(m);
    }
    let prod = |x: ArrowId, y: ArrowId| products[x.0 * n + y.0].as_ref().expect("composable");

    let mut f1 = Check::within("F1", tol);
    let mut f2 = Check::within("F2", tol);
    let mut f3 = Check::within("F3", tol);
    let mut f4 = Check::within("F4", tol);
    let mut f5 = Check::within("F5", tol);
    let mut f6 = Check::within("F6", tol);
    let mut f7 = Check::within("F7", tol);
    let mut f8 = Check::within("F8", tol);
    let mut f9 = Check::within("F9", tol);
    let mut f10 = Check::within("F10", tol);
    let mut unit = Check::within("UNIT", tol);

    let norm = |x: ArrowId, v: &CVec| b.norm_raw(x, v);
    let rel = |r: f64, scale: f64| r / scale.max(1.0);

    for (x, y) in g.composable_pairs() {
        let (dx, dy) = (dim(x), dim(y));
        let xy = g.product(x, y).expect("composable");
        let w = |i: usize, j: usize| format!("({}[{}], {}[{}])", lab(x), i, lab(y), j);
        for i in 0..dx {
            let ei = unit_vec(dx, i);
            for j in 0..dy {
                let ej = unit_vec(dy, j);
                f1.observe(b.closure_defect(x, &ei, y, &ej), || w(i, j));
                let p = prod(x, y).column(i * dy + j).into_owned();
                // F4 on basis pairs
                let (nb, nc) = (norm(x, &ei), norm(y, &ej));
                let excess = (norm(xy, &p) - nb * nc).max(0.0);
                f4.observe(rel(excess, nb * nc), || w(i, j));
                // F7: (bc)* = c* b*
                let lhs = b.star_raw(xy, &p);
                let rhs = b.mul_raw(g.invert(y), &b.star_raw(y, &ej), g.invert(x), &b.star_raw(x, &ei));
                f7.observe(rel((lhs - rhs).norm(), p.norm()), || w(i, j));
            }
        }
        for _ in 0..opts.samples {
            let (b1, b2, c1) = (random_vector(&mut rng, dx), random_vector(&mut rng, dx), random_vector(&mut rng, dy));
            let c2 = random_vector(&mut rng, dy);
            let a = random_complex(&mut rng);
            let m = |u: &CVec, v: &CVec| b.mul_raw(x, u, y, v);
            let left = m(&(&b1 * a + &b2), &c1) - (m(&b1, &c1) * a + m(&b2, &c1));
            let right = m(&b1, &(&c1 * a + &c2)) - (m(&b1, &c1) * a + m(&b1, &c2));
            let scale = (a.norm() + 1.0) * (b1.norm() + b2.norm()) * (c1.norm() + c2.norm());
            f2.observe(rel(left.norm().max(right.norm()), scale), || {
                format!("random pair over ({}, {})", lab(x), lab(y))
            });
            // F4 on unit-norm combinations
            let (nb, nc) = (norm(x, &b1), norm(y, &c1));
            if nb > 0.0 && nc > 0.0 {
                let (bu, cu) = (&b1 / C64::new(nb, 0.0), &c1 / C64::new(nc, 0.0));
                let excess = (norm(xy, &m(&bu, &cu)) - 1.0).max(0.0);
                f4.observe(excess, || format!("random pair over ({}, {})", lab(x), lab(y)));
            }
        }
    }

    // F3 through the structure constants
    for (x, y) in g.composable_pairs() {
        let xy = g.product(x, y).expect("composable");
        let pxy = prod(x, y);
        for z in g.arrows_to(g.src(y)) {
            let yz = g.product(y, z).expect("composable");
            let (pxy_z, pyz, px_yz) = (prod(xy, z), prod(y, z), prod(x, yz));
            let (dx, dy, dz) = (dim(x), dim(y), dim(z));
            for i in 0..dx {
                for j in 0..dy {
                    let v = pxy.column(i * dy + j);
                    for k in 0..dz {
                        let w = pyz.column(j * dz + k);
                        let mut left = CVec::zeros(pxy_z.nrows());
                        for (l, vl) in v.iter().enumerate() {
                            left += pxy_z.column(l * dz + k) * *vl;
                        }
                        let mut right = CVec::zeros(px_yz.nrows());
                        for (l, wl) in w.iter().enumerate() {
                            right += px_yz.column(i * dim(yz) + l) * *wl;
                        }
                        f3.observe(rel((&left - &right).norm(), left.norm()), || {
                            format!(
                                "({}[{}], {}[{}], {}[{}])",
                                lab(x), i, lab(y), j, lab(z), k
                            )
                        });
                    }
                }
            }
        }
    }

    for x in g.arrow_ids() {
        let dx = dim(x);
        let xi = g.invert(x);
        let s = g.src(x);
        let se = g.unit_arrow(s);
        let mut elems: Vec<(CVec, String)> =
            (0..dx).map(|i| (unit_vec(dx, i), format!("{}[{}]", lab(x), i))).collect();
        for k in 0..opts.samples {
            let v = random_vector(&mut rng, dx);
            let nv = norm(x, &v);
            if nv > 0.0 {
                elems.push((v / C64::new(nv, 0.0), format!("random #{k} over {}", lab(x))));
            }
        }
        for (i, (e, wit)) in elems.iter().enumerate() {
            let st = b.star_raw(x, e);
            if i < dx {
                f5.observe(b.star_defect(x, e), || wit.clone());
                // F8: b** = b
                let back = b.star_raw(xi, &st);
                f8.observe(rel((back - e).norm(), e.norm()), || wit.clone());
            }
            // F9: ‖b*b‖ = ‖b‖² = ‖b*‖²
            let ss = b.mul_raw(xi, &st, x, e);
            let nb = norm(x, e);
            let r = (norm(se, &ss) - nb * nb)
                .abs()
                .max((norm(xi, &st).powi(2) - nb * nb).abs());
            f9.observe(rel(r, nb * nb), || wit.clone());
            // F10: b*b ≥ 0
            let (herm, min) = b.spectrum_raw(s, &ss);
            f10.observe(rel(herm.max(-min), nb * nb), || wit.clone());
        }
        // F6: (a b + c)* = conj(a) b* + c*
        for _ in 0..opts.samples {
            let (v, w) = (random_vector(&mut rng, dx), random_vector(&mut rng, dx));
            let a = random_complex(&mut rng);
            let lhs = b.star_raw(x, &(&v * a + &w));
            let rhs = b.star_raw(x, &v) * a.conj() + b.star_raw(x, &w);
            let scale = (a.norm() + 1.0) * (v.norm() + w.norm());
            f6.observe(rel((lhs - rhs).norm(), scale), || format!("random over {}", lab(x)));
        }
        // unit elements, where present
        for (u, side) in [(g.rng(x), "left"), (s, "right")] {
            if let Some(one) = b.unit_raw(u) {
                let ue = g.unit_arrow(u);
                for i in 0..dx {
                    let e = unit_vec(dx, i);
                    let p = if side == "left" {
                        b.mul_raw(ue, &one, x, &e)
                    } else {
                        b.mul_raw(x, &e, ue, &one)
                    };
                    unit.observe((p - &e).norm(), || format!("{side} unit on {}[{}]", lab(x), i));
                }
            }
        }
    }

    let checks = [f1, f2, f3, f4, f5, f6, f7, f8, f9, f10];
    for c in checks {
        report.push(c);
    }
    if g.unit_ids().any(|u| b.unit_raw(u).is_some()) {
        report.push(unit);
    }
    report.note("fiber coordinates are Hilbert-Schmidt orthonormal; norm axioms use operator norms");
    report
}
