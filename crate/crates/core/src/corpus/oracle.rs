//! Naive re-derivations. Nothing here calls into the composition, checking
//! or linear algebra code of the other modules; objects are first flattened
//! into label tables and then examined by exhaustive loops.

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::{CorpusEntry, Payload};
use crate::gpd::{FiniteGroupoid, MatchedPair};
use crate::report::{Check, ValidationReport};

/// A groupoid as plain label tables.
#[derive(Clone, Debug, Default)]
pub struct NaiveGroupoid {
    pub arrows: Vec<String>,
    pub src: BTreeMap<String, String>,
    pub rng: BTreeMap<String, String>,
    pub mul: BTreeMap<(String, String), String>,
}

impl NaiveGroupoid {
    /// Copy out the tables; no structure is computed here.
    pub fn flatten(g: &FiniteGroupoid) -> Self {
        let mut n = NaiveGroupoid::default();
        for x in g.arrow_ids() {
            let l = g.label(x).to_string();
            n.src.insert(l.clone(), g.unit_label(g.src(x)).to_string());
            n.rng.insert(l.clone(), g.unit_label(g.rng(x)).to_string());
            n.arrows.push(l);
        }
        for (a, b, ab) in g.table_entries() {
            n.mul.insert((g.label(a).into(), g.label(b).into()), g.label(ab).into());
        }
        n
    }

    fn units(&self) -> BTreeSet<String> {
        self.src.values().chain(self.rng.values()).cloned().collect()
    }

    /// The arrow that is a two-sided identity at `u`.
    fn identity(&self, u: &str) -> Option<String> {
        self.arrows
            .iter()
            .find(|e| {
                self.src[*e] == u
                    && self.rng[*e] == u
                    && self.arrows.iter().all(|x| {
                        (self.src[x] != u || self.mul.get(&(x.clone(), (*e).clone())) == Some(x))
                            && (self.rng[x] != u || self.mul.get(&((*e).clone(), x.clone())) == Some(x))
                    })
            })
            .cloned()
    }

    fn inverse(&self, x: &str) -> Option<String> {
        let er = self.identity(&self.rng[x])?;
        let es = self.identity(&self.src[x])?;
        self.arrows
            .iter()
            .find(|y| {
                self.mul.get(&(x.to_string(), (*y).clone())) == Some(&er)
                    && self.mul.get(&((*y).clone(), x.to_string())) == Some(&es)
            })
            .cloned()
    }

    fn m(&self, a: &str, b: &str) -> Option<&String> {
        self.mul.get(&(a.to_string(), b.to_string()))
    }

    /// Groupoid laws by exhaustive enumeration; returns the violations.
    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for a in &self.arrows {
            for b in &self.arrows {
                let composable = self.src[a] == self.rng[b];
                match (composable, self.m(a, b)) {
                    (true, None) => bad.push(format!("missing product {a}{b}")),
                    (false, Some(_)) => bad.push(format!("product {a}{b} off domain")),
                    (true, Some(ab)) => {
                        if self.rng[ab] != self.rng[a] || self.src[ab] != self.src[b] {
                            bad.push(format!("endpoints of {a}{b}"));
                        }
                        for c in &self.arrows {
                            if self.src[b] != self.rng[c] {
                                continue;
                            }
                            let l = self.m(ab, c);
                            let r = self.m(b, c).and_then(|bc| self.m(a, bc));
                            if l != r {
                                bad.push(format!("associativity at {a},{b},{c}"));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for u in self.units() {
            if self.identity(&u).is_none() {
                bad.push(format!("no identity at {u}"));
            }
        }
        for x in &self.arrows {
            if self.inverse(x).is_none() {
                bad.push(format!("no inverse for {x}"));
            }
        }
        bad
    }
}

/// A matched pair as label tables.
#[derive(Clone, Debug)]
pub struct NaivePair {
    pub g: NaiveGroupoid,
    pub h: NaiveGroupoid,
    pub act: BTreeMap<(String, String), String>,
    pub res: BTreeMap<(String, String), String>,
}

impl NaivePair {
    pub fn flatten(p: &MatchedPair) -> Self {
        let mut act = BTreeMap::new();
        let mut res = BTreeMap::new();
        for (h, x) in p.domain() {
            let key = (p.h().label(h).to_string(), p.g().label(x).to_string());
            act.insert(key.clone(), p.g().label(p.act(h, x)).to_string());
            res.insert(key, p.h().label(p.res(h, x)).to_string());
        }
        NaivePair { g: NaiveGroupoid::flatten(p.g()), h: NaiveGroupoid::flatten(p.h()), act, res }
    }

    fn a(&self, h: &str, x: &str) -> Option<&String> {
        self.act.get(&(h.to_string(), x.to_string()))
    }

    fn r(&self, h: &str, x: &str) -> Option<&String> {
        self.res.get(&(h.to_string(), x.to_string()))
    }

    /// The thirteen matched-pair identities, each tried on every tuple.
    pub fn violations(&self) -> Vec<String> {
        let (g, h) = (&self.g, &self.h);
        let mut bad = Vec::new();
        let mut fail = |id: &str, w: String| bad.push(format!("{id} {w}"));
        for hh in &h.arrows {
            for x in &g.arrows {
                if h.src[hh] != g.rng[x] {
                    continue;
                }
                let (Some(hx), Some(hr)) = (self.a(hh, x), self.r(hh, x)) else {
                    fail("DOMAIN", format!("({hh},{x})"));
                    continue;
                };
                if g.rng[hx] != h.rng[hh] {
                    fail("ZS2", format!("({hh},{x})"));
                }
                if h.src[hr] != g.src[x] {
                    fail("ZS5", format!("({hh},{x})"));
                }
                if g.src[hx] != h.rng[hr] {
                    fail("ZS7", format!("({hh},{x})"));
                }
                // ZS12: (h·x)⁻¹ = h|x · x⁻¹, ZS13: (h|x)⁻¹ = h⁻¹|_{h·x}
                let xi = g.inverse(x).unwrap_or_default();
                if g.inverse(hx).as_ref() != self.a(hr, &xi) {
                    fail("ZS12", format!("({hh},{x})"));
                }
                let hi = h.inverse(hh).unwrap_or_default();
                if h.inverse(hr).as_ref() != self.r(&hi, hx) {
                    fail("ZS13", format!("({hh},{x})"));
                }
                for k in &h.arrows {
                    if h.src[k] != h.rng[hh] {
                        continue;
                    }
                    // ZS1 and ZS9
                    let kh = &h.mul[&(k.clone(), hh.clone())];
                    if self.a(kh, x) != self.a(k, hx) {
                        fail("ZS1", format!("({k},{hh},{x})"));
                    }
                    let rhs = self.r(k, hx).and_then(|a| h.m(a, hr));
                    if self.r(kh, x) != rhs {
                        fail("ZS9", format!("({k},{hh},{x})"));
                    }
                }
                for y in &g.arrows {
                    if g.src[x] != g.rng[y] {
                        continue;
                    }
                    let xy = &g.mul[&(x.clone(), y.clone())];
                    // ZS4 and ZS8
                    if self.r(hh, xy) != self.r(hr, y) {
                        fail("ZS4", format!("({hh},{x},{y})"));
                    }
                    let rhs = self.a(hr, y).and_then(|b| g.m(hx, b));
                    if self.a(hh, xy) != rhs {
                        fail("ZS8", format!("({hh},{x},{y})"));
                    }
                }
            }
        }
        for u in g.units() {
            let (Some(eg), Some(eh)) = (g.identity(&u), h.identity(&u)) else {
                fail("UNITS", u.clone());
                continue;
            };
            for x in &g.arrows {
                // ZS3 and ZS11
                if g.rng[x] == u && (self.a(&eh, x) != Some(x) || self.r(&eh, x) != h.identity(&g.src[x]).as_ref()) {
                    fail("ZS3/ZS11", x.clone());
                }
            }
            for hh in &h.arrows {
                // ZS6 and ZS10
                if h.src[hh] == u && (self.r(hh, &eg) != Some(hh) || self.a(hh, &eg) != g.identity(&h.rng[hh]).as_ref()) {
                    fail("ZS6/ZS10", hh.clone());
                }
            }
        }
        bad
    }

    /// Arrows `(x, h)` with `s(x) = r(h)` and the product
    /// `(x, h)(y, k) = (x (h·y), h|y k)`, keyed by `"(x,h)"` labels.
    pub fn product_table(&self) -> (Vec<String>, BTreeMap<(String, String), String>) {
        let (g, h) = (&self.g, &self.h);
        let mut arrows = Vec::new();
        let mut pairs = Vec::new();
        for x in &g.arrows {
            for hh in &h.arrows {
                if g.src[x] == h.rng[hh] {
                    arrows.push(format!("({x},{hh})"));
                    pairs.push((x.clone(), hh.clone()));
                }
            }
        }
        let mut mul = BTreeMap::new();
        for (x, a) in &pairs {
            for (y, b) in &pairs {
                if h.src[a] != g.rng[y] {
                    continue;
                }
                let (Some(ay), Some(ar)) = (self.a(a, y), self.r(a, y)) else { continue };
                if let (Some(xy), Some(rb)) = (g.m(x, ay), h.m(ar, b)) {
                    mul.insert((format!("({x},{a})"), format!("({y},{b})")), format!("({xy},{rb})"));
                }
            }
        }
        (arrows, mul)
    }

    /// Span rank of `i(δ_x)□j(δ_h)` and of `j(δ_h)□i(δ_x)` for the line
    /// bundle with the canonical action, where every product of deltas is
    /// a single delta with coefficient one.
    pub fn line_blend_ranks(&self) -> (usize, usize, usize) {
        let (arrows, mul) = self.product_table();
        let index: BTreeMap<&String, usize> = arrows.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let (g, h) = (&self.g, &self.h);
        let mut ij = Vec::new();
        let mut ji = Vec::new();
        for x in &g.arrows {
            let Some(es) = h.identity(&g.src[x]) else { continue };
            let ix = format!("({x},{es})");
            for hh in &h.arrows {
                let Some(er) = g.identity(&h.rng[hh]) else { continue };
                let jh = format!("({er},{hh})");
                for (l, r, out) in [(&ix, &jh, &mut ij), (&jh, &ix, &mut ji)] {
                    let mut v = vec![Complex64::new(0.0, 0.0); arrows.len()];
                    if let Some(p) = mul.get(&(l.clone(), r.clone())) {
                        v[index[p]] = Complex64::new(1.0, 0.0);
                    }
                    out.push(v);
                }
            }
        }
        (naive_rank(ij), naive_rank(ji), arrows.len())
    }
}

/// Rank by Gaussian elimination with partial pivoting.
pub fn naive_rank(mut rows: Vec<Vec<Complex64>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].norm().total_cmp(&rows[b][c].norm())) else {
            break;
        };
        if rows[p][c].norm() < 1e-9 {
            continue;
        }
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank {
                let f = rows[r][c] / rows[rank][c];
                for k in c..cols {
                    let v = rows[rank][k];
                    rows[r][k] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Roots of `λ² − (a + d)λ + (ad − bc)`.
pub fn eigenvalues_2x2(a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

/// Largest eigenvalue of a real symmetric positive semidefinite matrix by
/// power iteration from the all-ones vector.
pub fn power_iteration(m: &[Vec<f64>], iters: usize) -> f64 {
    let n = m.len();
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| m[i][j] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda
}

/// The multiplication table of `S₃` in one-line notation with
/// `(pq)(i) = p(q(i))`, as `(p, q, pq)` label triples.
pub fn s3_table() -> Vec<(String, String, String)> {
    let perms: [[usize; 3]; 6] = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
    let label = |p: &[usize; 3]| p.iter().map(|d| d.to_string()).collect::<String>();
    let mut out = Vec::new();
    for p in &perms {
        for q in &perms {
            let pq = [p[q[0] - 1], p[q[1] - 1], p[q[2] - 1]];
            out.push((label(p), label(q), label(&pq)));
        }
    }
    out
}

/// Every `(h, x)` with `hx = x'h'` factored by search over `A × B`; errors
/// name an element with zero or several factorizations.
pub fn brute_factorization(
    k: &NaiveGroupoid,
    a: &[String],
    b: &[String],
) -> Result<BTreeMap<(String, String), (String, String)>, String> {
    let mut out = BTreeMap::new();
    for z in &k.arrows {
        let hits: Vec<_> = a
            .iter()
            .flat_map(|x| b.iter().map(move |h| (x, h)))
            .filter(|(x, h)| k.m(x, h) == Some(z))
            .collect();
        if hits.len() != 1 {
            return Err(format!("{z} has {} factorizations", hits.len()));
        }
    }
    for h in b {
        for x in a {
            let Some(hx) = k.m(h, x) else { continue };
            for x2 in a {
                for h2 in b {
                    if k.m(x2, h2) == Some(hx) {
                        out.insert((h.clone(), x.clone()), (x2.clone(), h2.clone()));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn pair_checks(report: &mut ValidationReport, p: &MatchedPair, zs_arrows: usize, zs_table: Vec<(String, String, String)>) {
    let np = NaivePair::flatten(p);
    let mut gp = Check::exact("ORACLE.GROUPOIDS");
    for v in np.g.violations().into_iter().chain(np.h.violations()) {
        gp.holds(false, || v);
    }
    report.push(gp);
    let mut zs = Check::exact("ORACLE.ZS");
    for v in np.violations() {
        zs.holds(false, || v);
    }
    report.push(zs);
    let (arrows, mul) = np.product_table();
    let mut size = Check::exact("ORACLE.ZS_SIZE");
    size.holds(arrows.len() == zs_arrows, || format!("oracle {} vs {}", arrows.len(), zs_arrows));
    report.push(size);
    let mut table = Check::exact("ORACLE.ZS_TABLE");
    table.holds(zs_table.len() == mul.len(), || "table sizes differ".to_string());
    for (a, b, ab) in zs_table {
        let ok = mul.get(&(a.clone(), b.clone())) == Some(&ab);
        table.holds(ok, || format!("({a}, {b})"));
    }
    report.push(table);
    report.metric("oracle_zs_size", arrows.len());
}

fn zs_table_of(g: &FiniteGroupoid) -> Vec<(String, String, String)> {
    g.table_entries()
        .into_iter()
        .map(|(a, b, ab)| (g.label(a).into(), g.label(b).into(), g.label(ab).into()))
        .collect()
}

fn is_line(b: &dyn crate::fell::FellBundle) -> bool {
    b.groupoid().arrow_ids().all(|x| b.fiber_dim(x) == 1)
}

/// Re-derive the checkable facts about a corpus payload by brute force.
pub fn oracle_scan(entry: &CorpusEntry) -> ValidationReport {
    let mut report = ValidationReport::new(format!("oracle scan of {}", entry.name));
    let (pair, line) = match &entry.payload {
        Payload::Pair(p) => (p.clone(), false),
        Payload::Action(a) => (a.pair().clone(), is_line(a.base().as_ref())),
        Payload::Family(f) => (f.zs().pair.clone(), false),
        Payload::Section { product, .. } | Payload::StrictRep { product, .. } => {
            (product.zs().pair.clone(), is_line(product.base().as_ref()))
        }
    };
    match crate::gpd::zs_groupoid(&pair) {
        Ok(zs) => pair_checks(&mut report, &pair, zs.groupoid.n_arrows(), zs_table_of(&zs.groupoid)),
        Err(e) => report.structural(e.to_string()),
    }
    if line {
        let (ij, ji, dim) = NaivePair::flatten(&pair).line_blend_ranks();
        report.metric("oracle_blend_rank_ij", ij);
        report.metric("oracle_blend_rank_ji", ji);
        report.metric("oracle_blend_dim", dim);
    }
    // the reference group used by the factorized examples
    let s3 = crate::gpd::symmetric_group(3);
    let mut t = Check::exact("ORACLE.S3_TABLE");
    let ours: BTreeSet<_> = zs_table_of(&s3).into_iter().collect();
    let theirs: BTreeSet<_> = s3_table().into_iter().collect();
    t.holds(ours == theirs && theirs.len() == 36, || "S3 tables differ".into());
    report.push(t);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_and_power_iteration() {
        assert_eq!(eigenvalues_2x2(1.0, 1.0, 1.0, 1.0), (2.0, 0.0));
        let ones = vec![vec![1.0; 6]; 6];
        assert!((power_iteration(&ones, 5) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn s3_has_36_products_and_a_factorization() {
        let t = s3_table();
        assert_eq!(t.len(), 36);
        let mut k = NaiveGroupoid::default();
        for (p, q, pq) in &t {
            for l in [p, q] {
                k.src.insert(l.clone(), "o".into());
                k.rng.insert(l.clone(), "o".into());
            }
            k.mul.insert((p.clone(), q.clone()), pq.clone());
        }
        k.arrows = k.src.keys().cloned().collect();
        assert!(k.violations().is_empty());
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let f = brute_factorization(&k, &s(&["123", "231", "312"]), &s(&["123", "213"])).unwrap();
        assert_eq!(f.len(), 6);
        assert!(brute_factorization(&k, &s(&["123", "213"]), &s(&["123", "321"])).is_err());
    }

    #[test]
    fn naive_rank_of_dependent_rows() {
        let o = Complex64::new(1.0, 0.0);
        let z = Complex64::new(0.0, 0.0);
        assert_eq!(naive_rank(vec![vec![o, o], vec![o + o, o + o], vec![z, o]]), 2);
    }
}
