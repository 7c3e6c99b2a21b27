//! Representations on finite Hilbert bundles: strict representations of a
//! bundle, covariant representations of an action, their integrated forms,
//! and the twisted amplification used for the injectivity argument.

mod amplify;
mod covariant;
mod strict;

pub use amplify::{injectivity_check, twisted_amplification};
pub use covariant::{
    check_integrated_form, compose_strict, disintegrate, integrate, integrate_strict,
    validate_covariant_rep, CovariantRep,
};
pub use strict::{regular_strict_rep, validate_strict_rep, StrictRep};

use crate::error::{Error, Result};
use crate::gpd::{ArrowId, FiniteGroupoid, UnitId};
use crate::linalg::{op_norm, real, CMat};

/// A strictly positive weight on each unit.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitMeasure {
    weights: Vec<f64>,
}

impl UnitMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::structural("unit weights must be positive and finite"));
        }
        Ok(UnitMeasure { weights })
    }

    pub fn uniform(n: usize) -> Self {
        UnitMeasure { weights: vec![1.0; n] }
    }

    pub fn weight(&self, u: UnitId) -> f64 {
        self.weights[u.0]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Δ(ε) = μ(r(ε)) / μ(s(ε))`.
    pub fn modular(&self, g: &FiniteGroupoid, e: ArrowId) -> f64 {
        self.weight(g.rng(e)) / self.weight(g.src(e))
    }
}

/// Fiber dimensions `m(v)` of a Hilbert bundle over the units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteHilbertBundle {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl FiniteHilbertBundle {
    pub fn new(dims: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut at = 0;
        for &d in &dims {
            offsets.push(at);
            at += d;
        }
        FiniteHilbertBundle { dims, offsets }
    }

    pub fn dim(&self, u: UnitId) -> usize {
        self.dims[u.0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn offset(&self, u: UnitId) -> usize {
        self.offsets[u.0]
    }

    pub fn total(&self) -> usize {
        self.dims.iter().sum()
    }
}

/// An operator on `⊕_v ℂ^{m(v)}` with inner product `Σ_v μ(v)⟨ξ(v), η(v)⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperator {
    pub hb: FiniteHilbertBundle,
    pub mu: UnitMeasure,
    pub mat: CMat,
}

impl BlockOperator {
    pub fn zeros(hb: FiniteHilbertBundle, mu: UnitMeasure) -> Self {
        let n = hb.total();
        BlockOperator { hb, mu, mat: CMat::zeros(n, n) }
    }

    fn weights(&self, power: f64) -> CMat {
        let mut w = CMat::zeros(self.mat.nrows(), self.mat.ncols());
        for (u, &d) in self.hb.dims.iter().enumerate() {
            let o = self.hb.offsets[u];
            for i in 0..d {
                w[(o + i, o + i)] = real(self.mu.weights[u].powf(power));
            }
        }
        w
    }

    /// Operator norm for the weighted inner product.
    pub fn norm(&self) -> f64 {
        op_norm(&(self.weights(0.5) * &self.mat * self.weights(-0.5)))
    }

    /// Adjoint for the weighted inner product, `W⁻¹ A† W`.
    pub fn adjoint(&self) -> BlockOperator {
        BlockOperator {
            hb: self.hb.clone(),
            mu: self.mu.clone(),
            mat: self.weights(-1.0) * self.mat.adjoint() * self.weights(1.0),
        }
    }

    pub fn block(&self, r: UnitId, s: UnitId) -> CMat {
        self.mat
            .view((self.hb.offset(r), self.hb.offset(s)), (self.hb.dim(r), self.hb.dim(s)))
            .into_owned()
    }

    pub(crate) fn add_block(&mut self, r: UnitId, s: UnitId, m: &CMat) {
        let (ro, so) = (self.hb.offset(r), self.hb.offset(s));
        let mut v = self.mat.view_mut((ro, so), m.shape());
        v += m;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::pair_groupoid;
    use crate::linalg::{c, max_abs};

    #[test]
    fn modular_cocycle_is_multiplicative() {
        let g = pair_groupoid(&["a", "b", "c"]);
        let mu = UnitMeasure::new(vec![1.0, 2.5, 0.3]).unwrap();
        for (x, y) in g.composable_pairs() {
            let xy = g.compose(x, y).unwrap();
            let lhs = mu.modular(&g, xy);
            let rhs = mu.modular(&g, x) * mu.modular(&g, y);
            assert!((lhs - rhs).abs() <= 1e-15 * lhs);
        }
        let uni = UnitMeasure::uniform(3);
        assert!(g.arrow_ids().all(|x| uni.modular(&g, x) == 1.0));
    }

    #[test]
    fn weighted_adjoint_is_an_adjoint() {
        let hb = FiniteHilbertBundle::new(vec![1, 2]);
        let mu = UnitMeasure::new(vec![1.0, 4.0]).unwrap();
        let mut a = BlockOperator::zeros(hb.clone(), mu.clone());
        a.mat = CMat::from_fn(3, 3, |i, j| c(i as f64 + 1.0, j as f64 - 1.0));
        let w = CMat::from_diagonal(&crate::linalg::CVec::from_vec(vec![real(1.0), real(4.0), real(4.0)]));
        // ⟨Aξ, η⟩_μ = ⟨ξ, A♯η⟩_μ for all ξ, η ⟺ A† W = W A♯
        let ad = a.adjoint();
        assert!(max_abs(&(a.mat.adjoint() * &w - &w * &ad.mat)) < 1e-12);
        assert!((ad.norm() - a.norm()).abs() < 1e-10);
    }

    #[test]
    fn non_positive_weights_are_rejected() {
        assert!(UnitMeasure::new(vec![1.0, 0.0]).is_err());
        assert!(UnitMeasure::new(vec![]).is_err());
    }
}
