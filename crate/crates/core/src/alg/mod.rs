//! The convolution *-algebra of sections of a Fell bundle, its I-norm and
//! C*-norm, and the maps `i`, `j` into the algebra of a product bundle.

mod blend;

pub use blend::{blend_rank, hom_i, hom_j, BlendReport};

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::fell::FellBundle;
use crate::gpd::ArrowId;
use crate::linalg::{hermitian_sqrt_pair, op_norm, random_vector, CMat, CVec, C64, ZERO};

/// A section: one coordinate vector per arrow, in the fiber bases.
#[derive(Clone, Debug)]
pub struct Section {
    bundle: Arc<dyn FellBundle>,
    coeffs: Vec<CVec>,
}

pub(crate) fn same_bundle(a: &Arc<dyn FellBundle>, b: &Arc<dyn FellBundle>) -> bool {
    std::ptr::eq(Arc::as_ptr(a) as *const (), Arc::as_ptr(b) as *const ())
}

impl Section {
    pub fn zero(bundle: Arc<dyn FellBundle>) -> Self {
        let coeffs = bundle
            .groupoid()
            .arrow_ids()
            .map(|x| CVec::zeros(bundle.fiber_dim(x)))
            .collect();
        Section { bundle, coeffs }
    }

    /// Fails if a vector has the wrong length or a non-finite entry.
    pub fn from_coeffs(bundle: Arc<dyn FellBundle>, coeffs: Vec<CVec>) -> Result<Self> {
        let g = bundle.groupoid();
        if coeffs.len() != g.n_arrows() {
            return Err(Error::structural("a section needs one vector per arrow"));
        }
        for x in g.arrow_ids() {
            let v = &coeffs[x.0];
            if v.len() != bundle.fiber_dim(x) {
                return Err(Error::structural(format!(
                    "section value over {} has the wrong length",
                    g.label(x)
                )));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::structural("non-finite section coefficient"));
            }
        }
        Ok(Section { bundle, coeffs })
    }

    /// The section supported on `x` with value `v`.
    pub fn delta(bundle: Arc<dyn FellBundle>, x: ArrowId, v: CVec) -> Self {
        let mut s = Section::zero(bundle);
        assert_eq!(v.len(), s.coeffs[x.0].len(), "delta value has the wrong length");
        s.coeffs[x.0] = v;
        s
    }

    /// A seeded section with standard complex Gaussian coordinates.
    pub fn random<R: Rng + ?Sized>(bundle: Arc<dyn FellBundle>, rng: &mut R) -> Self {
        let coeffs = bundle
            .groupoid()
            .arrow_ids()
            .map(|x| random_vector(rng, bundle.fiber_dim(x)))
            .collect();
        Section { bundle, coeffs }
    }

    pub fn bundle(&self) -> &Arc<dyn FellBundle> {
        &self.bundle
    }

    pub fn get(&self, x: ArrowId) -> &CVec {
        &self.coeffs[x.0]
    }

    pub fn coeffs(&self) -> &[CVec] {
        &self.coeffs
    }

    pub fn set(&mut self, x: ArrowId, v: CVec) {
        assert_eq!(v.len(), self.coeffs[x.0].len(), "section value has the wrong length");
        self.coeffs[x.0] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|v| v.iter().all(|z| *z == ZERO))
    }

    pub fn scale(&self, z: C64) -> Self {
        Section {
            bundle: self.bundle.clone(),
            coeffs: self.coeffs.iter().map(|v| v * z).collect(),
        }
    }

    pub fn add(&self, other: &Section) -> Result<Self> {
        self.same(other)?;
        Ok(Section {
            bundle: self.bundle.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Section) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Coordinates concatenated in arrow order.
    pub fn to_global(&self) -> CVec {
        let n: usize = self.coeffs.iter().map(|v| v.len()).sum();
        CVec::from_iterator(n, self.coeffs.iter().flat_map(|v| v.iter().copied()))
    }

    pub fn from_global(bundle: Arc<dyn FellBundle>, v: &CVec) -> Result<Self> {
        let mut coeffs = Vec::new();
        let mut at = 0;
        for x in bundle.groupoid().arrow_ids() {
            let d = bundle.fiber_dim(x);
            if at + d > v.len() {
                return Err(Error::structural("global vector is too short"));
            }
            coeffs.push(v.rows(at, d).into_owned());
            at += d;
        }
        if at != v.len() {
            return Err(Error::structural("global vector is too long"));
        }
        Ok(Section { bundle, coeffs })
    }

    /// Largest coordinate difference to `other`.
    pub fn distance(&self, other: &Section) -> Result<f64> {
        self.same(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn same(&self, other: &Section) -> Result<()> {
        if same_bundle(&self.bundle, &other.bundle) {
            Ok(())
        } else {
            Err(Error::precondition("sections over different bundles"))
        }
    }
}

/// `(σ□τ)(x) = Σ_{r(y) = r(x)} σ(y) τ(y⁻¹x)`.
pub fn convolve(s: &Section, t: &Section) -> Result<Section> {
    s.same(t)?;
    let b = &s.bundle;
    let g = b.groupoid();
    let mut out = Section::zero(b.clone());
    let nonzero = |v: &CVec| v.iter().any(|z| *z != ZERO);
    for y in g.arrow_ids().filter(|&y| nonzero(&s.coeffs[y.0])) {
        for z in g.arrows_to(g.src(y)) {
            if !nonzero(&t.coeffs[z.0]) {
                continue;
            }
            let yz = g.product(y, z).expect("composable");
            out.coeffs[yz.0] += b.mul_raw(y, &s.coeffs[y.0], z, &t.coeffs[z.0]);
        }
    }
    Ok(out)
}

/// `σ*(x) = σ(x⁻¹)*`.
pub fn star_section(s: &Section) -> Section {
    let b = &s.bundle;
    let g = b.groupoid();
    let mut out = Section::zero(b.clone());
    for x in g.arrow_ids() {
        out.coeffs[g.invert(x).0] = b.star_raw(x, &s.coeffs[x.0]);
    }
    out
}

/// `sup_u Σ_{r(x) = u} ‖σ(x)‖`.
pub fn i_norm_r(s: &Section) -> f64 {
    let g = s.bundle.groupoid();
    g.unit_ids()
        .map(|u| g.arrows_to(u).map(|x| s.bundle.norm_raw(x, &s.coeffs[x.0])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `sup_u Σ_{s(x) = u} ‖σ(x)‖`.
pub fn i_norm_s(s: &Section) -> f64 {
    let g = s.bundle.groupoid();
    g.unit_ids()
        .map(|u| g.arrows_from(u).map(|x| s.bundle.norm_raw(x, &s.coeffs[x.0])).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn i_norm(s: &Section) -> f64 {
    i_norm_r(s).max(i_norm_s(s))
}

/// The canonical trace `φ(σ) = Σ_u tr(σ(u))`.
pub fn trace(s: &Section) -> C64 {
    let g = s.bundle.groupoid();
    g.unit_ids()
        .map(|u| s.bundle.trace_raw(u, &s.coeffs[g.unit_arrow(u).0]))
        .sum()
}

/// Square root and inverse square root of the trace Gram matrix
/// `G[i, j] = tr(e_i* e_j)` on the fiber over `x`.
pub(crate) fn fiber_gram_sqrt(bundle: &dyn FellBundle, x: ArrowId) -> Result<(CMat, CMat)> {
    let g = bundle.groupoid();
    let d = bundle.fiber_dim(x);
    let (xi, s) = (g.invert(x), g.src(x));
    let basis: Vec<CVec> = (0..d)
        .map(|i| {
            let mut e = CVec::zeros(d);
            e[i] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let mut gm = CMat::zeros(d, d);
    for i in 0..d {
        let st = bundle.star_raw(x, &basis[i]);
        for j in 0..d {
            gm[(i, j)] = bundle.trace_raw(s, &bundle.mul_raw(xi, &st, x, &basis[j]));
        }
    }
    hermitian_sqrt_pair(&gm, 1e-12).ok_or_else(|| {
        Error::precondition(format!("the trace is not faithful on the fiber over {}", g.label(x)))
    })
}

/// Precomputed data for the GNS representation of the canonical trace.
///
/// The inner product `⟨σ, τ⟩ = φ(τ*□σ)` is block diagonal over arrows; its
/// Gram matrix on the fiber bases and the square roots are kept here.
#[derive(Clone, Debug)]
pub struct SectionAlgebra {
    bundle: Arc<dyn FellBundle>,
    offsets: Vec<usize>,
    dim: usize,
    gram_sqrt: CMat,
    gram_isqrt: CMat,
}

impl SectionAlgebra {
    pub fn new(bundle: Arc<dyn FellBundle>) -> Result<Self> {
        let g = bundle.groupoid();
        let mut offsets = Vec::with_capacity(g.n_arrows());
        let mut dim = 0;
        for x in g.arrow_ids() {
            offsets.push(dim);
            dim += bundle.fiber_dim(x);
        }
        let mut gram_sqrt = CMat::zeros(dim, dim);
        let mut gram_isqrt = CMat::zeros(dim, dim);
        for x in g.arrow_ids() {
            let d = bundle.fiber_dim(x);
            let (sq, isq) = fiber_gram_sqrt(bundle.as_ref(), x)?;
            let o = offsets[x.0];
            gram_sqrt.view_mut((o, o), (d, d)).copy_from(&sq);
            gram_isqrt.view_mut((o, o), (d, d)).copy_from(&isq);
        }
        Ok(SectionAlgebra { bundle, offsets, dim, gram_sqrt, gram_isqrt })
    }

    pub fn bundle(&self) -> &Arc<dyn FellBundle> {
        &self.bundle
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offset(&self, x: ArrowId) -> usize {
        self.offsets[x.0]
    }

    /// Matrix of `τ ↦ σ□τ` on global coordinates.
    pub fn left_matrix(&self, s: &Section) -> Result<CMat> {
        if !same_bundle(&self.bundle, s.bundle()) {
            return Err(Error::precondition("section is not over this algebra's bundle"));
        }
        let b = &self.bundle;
        let g = b.groupoid();
        let mut m = CMat::zeros(self.dim, self.dim);
        for z in g.arrow_ids() {
            for j in 0..b.fiber_dim(z) {
                let mut e = CVec::zeros(b.fiber_dim(z));
                e[j] = C64::new(1.0, 0.0);
                let col = self.offsets[z.0] + j;
                for y in g.arrow_ids().filter(|&y| g.src(y) == g.rng(z)) {
                    let yz = g.product(y, z).expect("composable");
                    let v = b.mul_raw(y, s.get(y), z, &e);
                    let o = self.offsets[yz.0];
                    for (r, val) in v.iter().enumerate() {
                        m[(o + r, col)] += *val;
                    }
                }
            }
        }
        Ok(m)
    }

    /// Operator norm of left convolution in the GNS space of the trace.
    pub fn cstar_norm(&self, s: &Section) -> Result<f64> {
        let a = self.left_matrix(s)?;
        Ok(op_norm(&(&self.gram_sqrt * a * &self.gram_isqrt)))
    }

    /// `⟨σ, τ⟩ = φ(τ*□σ)`, computed from the Gram matrix.
    pub fn inner(&self, s: &Section, t: &Section) -> C64 {
        let (x, y) = (&self.gram_sqrt * s.to_global(), &self.gram_sqrt * t.to_global());
        y.dotc(&x)
    }
}

/// One-shot C*-norm; builds the GNS data each call.
pub fn cstar_norm(s: &Section) -> Result<f64> {
    SectionAlgebra::new(s.bundle.clone())?.cstar_norm(s)
}
