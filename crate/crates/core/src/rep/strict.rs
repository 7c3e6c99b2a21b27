use std::sync::Arc;

use super::FiniteHilbertBundle;
use crate::alg::fiber_gram_sqrt;
use crate::error::{Error, Result};
use crate::fell::FellBundle;
use crate::gpd::ArrowId;
use crate::linalg::{numerical_rank, vectorize, CMat, CVec, ONE};
use crate::report::{Check, ValidationReport};

/// A linear map `b ↦ ψ(b)` from each fiber over `x` to operators
/// `H(s(x)) → H(r(x))`, stored on the fiber basis.
#[derive(Clone, Debug)]
pub struct StrictRep {
    bundle: Arc<dyn FellBundle>,
    hb: FiniteHilbertBundle,
    psi: Vec<Vec<CMat>>,
}

impl StrictRep {
    pub fn new(bundle: Arc<dyn FellBundle>, hb: FiniteHilbertBundle, psi: Vec<Vec<CMat>>) -> Result<Self> {
        let g = bundle.groupoid();
        if hb.dims().len() != g.n_units() {
            return Err(Error::structural("the Hilbert bundle needs one dimension per unit"));
        }
        if psi.len() != g.n_arrows() {
            return Err(Error::structural("a strict representation needs operators for every arrow"));
        }
        for x in g.arrow_ids() {
            if psi[x.0].len() != bundle.fiber_dim(x) {
                return Err(Error::structural(format!(
                    "need one operator per basis element over {}",
                    g.label(x)
                )));
            }
            let shape = (hb.dim(g.rng(x)), hb.dim(g.src(x)));
            if let Some(m) = psi[x.0].iter().find(|m| m.shape() != shape) {
                return Err(Error::structural(format!(
                    "operator over {} has shape {:?}, expected {:?}",
                    g.label(x),
                    m.shape(),
                    shape
                )));
            }
        }
        Ok(StrictRep { bundle, hb, psi })
    }

    /// Tabulate `f(x, i)`, the image of the `i`-th basis element over `x`.
    pub fn from_fn(
        bundle: Arc<dyn FellBundle>,
        hb: FiniteHilbertBundle,
        mut f: impl FnMut(ArrowId, usize) -> CMat,
    ) -> Result<Self> {
        let psi = bundle
            .groupoid()
            .arrow_ids()
            .map(|x| (0..bundle.fiber_dim(x)).map(|i| f(x, i)).collect())
            .collect();
        Self::new(bundle, hb, psi)
    }

    pub fn bundle(&self) -> &Arc<dyn FellBundle> {
        &self.bundle
    }

    pub fn hb(&self) -> &FiniteHilbertBundle {
        &self.hb
    }

    pub fn basis_op(&self, x: ArrowId, i: usize) -> &CMat {
        &self.psi[x.0][i]
    }

    /// `ψ(b)` for `b` with coordinates `coeffs` over `x`.
    pub fn apply(&self, x: ArrowId, coeffs: &CVec) -> CMat {
        let g = self.bundle.groupoid();
        let mut out = CMat::zeros(self.hb.dim(g.rng(x)), self.hb.dim(g.src(x)));
        for (m, z) in self.psi[x.0].iter().zip(coeffs.iter()) {
            out += m * *z;
        }
        out
    }
}

fn basis(d: usize, i: usize) -> CVec {
    let mut e = CVec::zeros(d);
    e[i] = ONE;
    e
}

/// Checks `{prefix}.MUL`, `{prefix}.STAR` and, over unital unit fibers,
/// `{prefix}.UNIT` (`ψ(1_u)` is the identity on `H(u)`). Records whether
/// `ψ` is injective on every fiber.
pub fn validate_strict_rep(rep: &StrictRep, tol: f64, prefix: &str) -> ValidationReport {
    let b = &rep.bundle;
    let g = b.groupoid();
    let mut report = ValidationReport::new(format!("strict representation of ({})", b.describe()));
    let id = |s: &str| format!("{prefix}.{s}");
    let mut mul = Check::within(id("MUL"), tol);
    let mut star = Check::within(id("STAR"), tol);
    let mut unit = Check::within(id("UNIT"), tol);
    let mut any_unit = false;

    for (x, y) in g.composable_pairs() {
        let xy = g.product(x, y).expect("composable");
        for i in 0..b.fiber_dim(x) {
            for j in 0..b.fiber_dim(y) {
                let lhs = rep.apply(xy, &b.mul_raw(x, &basis(b.fiber_dim(x), i), y, &basis(b.fiber_dim(y), j)));
                let (p, q) = (&rep.psi[x.0][i], &rep.psi[y.0][j]);
                let scale = (p.norm() * q.norm()).max(1.0);
                mul.observe((lhs - p * q).norm() / scale, || {
                    format!("({}[{}], {}[{}])", g.label(x), i, g.label(y), j)
                });
            }
        }
    }
    let mut faithful = true;
    for x in g.arrow_ids() {
        let d = b.fiber_dim(x);
        let xi = g.invert(x);
        let mut cols = CMat::zeros(self_size(rep, x), d);
        for i in 0..d {
            let p = &rep.psi[x.0][i];
            let lhs = rep.apply(xi, &b.star_raw(x, &basis(d, i)));
            star.observe((lhs - p.adjoint()).norm() / p.norm().max(1.0), || {
                format!("{}[{}]", g.label(x), i)
            });
            cols.set_column(i, &vectorize(p));
        }
        if d > 0 && numerical_rank(&cols, 1e-9) < d {
            faithful = false;
        }
    }
    for u in g.unit_ids() {
        if let Some(one) = b.unit_raw(u) {
            any_unit = true;
            let m = rep.hb.dim(u);
            let lhs = rep.apply(g.unit_arrow(u), &one);
            unit.observe((lhs - CMat::identity(m, m)).norm(), || g.unit_label(u).to_string());
        }
    }
    report.push(mul);
    report.push(star);
    if any_unit {
        report.push(unit);
    }
    report.metric("faithful", faithful);
    report
}

fn self_size(rep: &StrictRep, x: ArrowId) -> usize {
    let g = rep.bundle.groupoid();
    rep.hb.dim(g.rng(x)) * rep.hb.dim(g.src(x))
}

/// Left multiplication on `H(v) = ⊕_{r(ε) = v} B_ε`, in coordinates that are
/// orthonormal for `⟨a, b⟩ = tr(a* b)`. Faithful whenever the trace is.
pub fn regular_strict_rep(bundle: Arc<dyn FellBundle>) -> Result<StrictRep> {
    let g = bundle.groupoid().clone();
    // position of each fiber inside H(r(ε))
    let mut pos = vec![0usize; g.n_arrows()];
    let mut dims = Vec::with_capacity(g.n_units());
    for v in g.unit_ids() {
        let mut at = 0;
        for e in g.arrows_to(v) {
            pos[e.0] = at;
            at += bundle.fiber_dim(e);
        }
        dims.push(at);
    }
    let hb = FiniteHilbertBundle::new(dims);
    let mut sq = Vec::with_capacity(g.n_arrows());
    let mut isq = Vec::with_capacity(g.n_arrows());
    for e in g.arrow_ids() {
        let (a, b) = fiber_gram_sqrt(bundle.as_ref(), e)?;
        sq.push(a);
        isq.push(b);
    }
    let b = bundle.clone();
    StrictRep::from_fn(bundle, hb.clone(), |x, i| {
        let dx = b.fiber_dim(x);
        let ex = basis(dx, i);
        let mut m = CMat::zeros(hb.dim(g.rng(x)), hb.dim(g.src(x)));
        for e in g.arrows_to(g.src(x)) {
            let xe = g.product(x, e).expect("composable");
            let de = b.fiber_dim(e);
            let mut left = CMat::zeros(b.fiber_dim(xe), de);
            for j in 0..de {
                left.set_column(j, &b.mul_raw(x, &ex, e, &basis(de, j)));
            }
            let blk = &sq[xe.0] * left * &isq[e.0];
            m.view_mut((pos[xe.0], pos[e.0]), blk.shape()).copy_from(&blk);
        }
        m
    })
}
