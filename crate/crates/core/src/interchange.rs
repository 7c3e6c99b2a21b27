//! The text interchange format: JSON documents tagged by `kind`, with
//! objects referring to arrows and units by label. Complex numbers are
//! strings `"(re, im)"` and reals are strings, both with 17 significant
//! digits, so a document printed from parsed data is canonical.
//!
//! Fiber bases are orthonormalized on load; coordinates (action matrices,
//! section values, representation operators) refer to that orthonormal
//! basis. Exported bases are already orthonormal.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alg::Section;
use crate::corpus::{CorpusEntry, Payload};
use crate::error::{Error, Result};
use crate::fell::{ConcreteMatrixBundle, FellBundle};
use crate::gpd::{Arrow, ArrowId, FiniteGroupoid, MatchedPair, UnitId};
use crate::linalg::{format_complex, format_real, CMat, CVec, C64};
use crate::rep::{BlockOperator, CovariantRep, FiniteHilbertBundle, StrictRep, UnitMeasure};
use crate::zsb::{CompatibleAction, UnitaryFamily, ZsProductBundle};

pub type MatrixDoc = Vec<Vec<String>>;

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Groupoid(GroupoidDoc),
    MatchedPair(PairDoc),
    Bundle(BundleDoc),
    Action(ActionDoc),
    UnitaryFamily(FamilyDoc),
    Section(SectionDoc),
    StrictRep(StrictRepDoc),
    CovariantRep(CovariantDoc),
    Measure(MeasureDoc),
    Operator(OperatorDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Groupoid(_) => "groupoid",
            Document::MatchedPair(_) => "matched_pair",
            Document::Bundle(_) => "bundle",
            Document::Action(_) => "action",
            Document::UnitaryFamily(_) => "unitary_family",
            Document::Section(_) => "section",
            Document::StrictRep(_) => "strict_rep",
            Document::CovariantRep(_) => "covariant_rep",
            Document::Measure(_) => "measure",
            Document::Operator(_) => "operator",
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ArrowDoc {
    pub label: String,
    pub src: String,
    pub rng: String,
}

/// Units, arrows and the full multiplication table as `[a, b, ab]`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupoidDoc {
    pub units: Vec<String>,
    pub arrows: Vec<ArrowDoc>,
    pub products: Vec<[String; 3]>,
}

/// `table` rows are `[h, x, h·x, h|x]`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    pub g: GroupoidDoc,
    pub h: GroupoidDoc,
    pub table: Vec<[String; 4]>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FiberDoc {
    pub arrow: String,
    pub basis: Vec<MatrixDoc>,
}

/// A concrete matrix bundle: unit dimensions and a spanning set per arrow.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BundleDoc {
    pub groupoid: GroupoidDoc,
    pub dims: BTreeMap<String, usize>,
    pub fibers: Vec<FiberDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BetaDoc {
    pub h: String,
    pub x: String,
    pub matrix: MatrixDoc,
}

/// A compatible action on a matrix bundle over the pair's `G`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ActionDoc {
    pub pair: PairDoc,
    pub dims: BTreeMap<String, usize>,
    pub fibers: Vec<FiberDoc>,
    pub beta: Vec<BetaDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ArrowMatrixDoc {
    pub arrow: String,
    pub matrix: MatrixDoc,
}

/// A unitary family in a matrix bundle over `G ⋈ H`, whose arrows are
/// labelled `(x,h)`; `u` is keyed by arrows of `H`.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub pair: PairDoc,
    pub dims: BTreeMap<String, usize>,
    pub fibers: Vec<FiberDoc>,
    pub u: Vec<ArrowMatrixDoc>,
}

/// Which bundle of an action a section or representation lives on.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Base,
    Product,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ValueDoc {
    pub arrow: String,
    pub coeffs: Vec<String>,
}

/// Arrows without a value are zero.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SectionDoc {
    pub action: ActionDoc,
    pub space: Space,
    pub values: Vec<ValueDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OpsDoc {
    pub arrow: String,
    pub ops: Vec<MatrixDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StrictRepDoc {
    pub action: ActionDoc,
    pub space: Space,
    pub dims: BTreeMap<String, usize>,
    pub psi: Vec<OpsDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CovariantDoc {
    pub action: ActionDoc,
    pub weights: BTreeMap<String, String>,
    pub dims: BTreeMap<String, usize>,
    pub pi: Vec<OpsDoc>,
    pub m: Vec<ArrowMatrixDoc>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MeasureDoc {
    pub weights: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OperatorDoc {
    pub dims: BTreeMap<String, usize>,
    pub weights: BTreeMap<String, String>,
    pub matrix: MatrixDoc,
}

// ---- text ----

/// Parse a document; syntax and schema errors carry line and column.
pub fn parse(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn render(doc: &Document) -> String {
    // round-trip through Value so that map keys come out sorted
    let value = serde_json::to_value(doc).expect("documents serialize");
    let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
    s.push('\n');
    s
}

/// Parse then print; numbers are re-rendered with 17 significant digits.
pub fn canonicalize(text: &str) -> Result<String> {
    let doc = parse(text)?;
    Ok(render(&normalize(doc)?))
}

fn parse_err(message: impl Into<String>) -> Error {
    Error::Parse { line: 0, column: 0, message: message.into() }
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| parse_err(format!("not a real number: {s:?}")))
}

/// `"(re, im)"`, or a bare real.
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let mut it = inner.split(',');
        let (Some(re), Some(im), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(format!("not a complex number: {s:?}")));
        };
        Ok(C64::new(parse_real(re)?, parse_real(im)?))
    } else {
        Ok(C64::new(parse_real(t)?, 0.0))
    }
}

fn norm_c(s: &str) -> Result<String> {
    Ok(format_complex(parse_complex(s)?))
}

fn norm_r(s: &str) -> Result<String> {
    Ok(format_real(parse_real(s)?))
}

fn norm_m(m: &MatrixDoc) -> Result<MatrixDoc> {
    m.iter().map(|r| r.iter().map(|z| norm_c(z)).collect()).collect()
}

fn norm_ms(ms: &[MatrixDoc]) -> Result<Vec<MatrixDoc>> {
    ms.iter().map(norm_m).collect()
}

fn norm_fibers(f: &[FiberDoc]) -> Result<Vec<FiberDoc>> {
    f.iter()
        .map(|f| Ok(FiberDoc { arrow: f.arrow.clone(), basis: norm_ms(&f.basis)? }))
        .collect()
}

fn norm_weights(w: &BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
    w.iter().map(|(k, v)| Ok((k.clone(), norm_r(v)?))).collect()
}

fn norm_ops(o: &[OpsDoc]) -> Result<Vec<OpsDoc>> {
    o.iter()
        .map(|o| Ok(OpsDoc { arrow: o.arrow.clone(), ops: norm_ms(&o.ops)? }))
        .collect()
}

fn norm_am(v: &[ArrowMatrixDoc]) -> Result<Vec<ArrowMatrixDoc>> {
    v.iter()
        .map(|a| Ok(ArrowMatrixDoc { arrow: a.arrow.clone(), matrix: norm_m(&a.matrix)? }))
        .collect()
}

fn norm_action(a: &ActionDoc) -> Result<ActionDoc> {
    Ok(ActionDoc {
        pair: a.pair.clone(),
        dims: a.dims.clone(),
        fibers: norm_fibers(&a.fibers)?,
        beta: a
            .beta
            .iter()
            .map(|b| Ok(BetaDoc { h: b.h.clone(), x: b.x.clone(), matrix: norm_m(&b.matrix)? }))
            .collect::<Result<_>>()?,
    })
}

/// Rewrite every number in canonical form.
pub fn normalize(doc: Document) -> Result<Document> {
    Ok(match doc {
        Document::Groupoid(_) | Document::MatchedPair(_) => doc,
        Document::Bundle(b) => Document::Bundle(BundleDoc { fibers: norm_fibers(&b.fibers)?, ..b }),
        Document::Action(a) => Document::Action(norm_action(&a)?),
        Document::UnitaryFamily(f) => Document::UnitaryFamily(FamilyDoc {
            fibers: norm_fibers(&f.fibers)?,
            u: norm_am(&f.u)?,
            ..f
        }),
        Document::Section(s) => Document::Section(SectionDoc {
            action: norm_action(&s.action)?,
            space: s.space,
            values: s
                .values
                .iter()
                .map(|v| {
                    Ok(ValueDoc {
                        arrow: v.arrow.clone(),
                        coeffs: v.coeffs.iter().map(|z| norm_c(z)).collect::<Result<_>>()?,
                    })
                })
                .collect::<Result<_>>()?,
        }),
        Document::StrictRep(r) => Document::StrictRep(StrictRepDoc {
            action: norm_action(&r.action)?,
            psi: norm_ops(&r.psi)?,
            ..r
        }),
        Document::CovariantRep(r) => Document::CovariantRep(CovariantDoc {
            action: norm_action(&r.action)?,
            weights: norm_weights(&r.weights)?,
            dims: r.dims.clone(),
            pi: norm_ops(&r.pi)?,
            m: norm_am(&r.m)?,
        }),
        Document::Measure(m) => Document::Measure(MeasureDoc { weights: norm_weights(&m.weights)? }),
        Document::Operator(o) => Document::Operator(OperatorDoc {
            dims: o.dims,
            weights: norm_weights(&o.weights)?,
            matrix: norm_m(&o.matrix)?,
        }),
    })
}

// ---- export ----

pub fn matrix_doc(m: &CMat) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect())
        .collect()
}

pub fn groupoid_doc(g: &FiniteGroupoid) -> GroupoidDoc {
    GroupoidDoc {
        units: g.unit_ids().map(|u| g.unit_label(u).to_string()).collect(),
        arrows: g
            .arrow_ids()
            .map(|x| ArrowDoc {
                label: g.label(x).into(),
                src: g.unit_label(g.src(x)).into(),
                rng: g.unit_label(g.rng(x)).into(),
            })
            .collect(),
        products: g
            .table_entries()
            .into_iter()
            .map(|(a, b, ab)| [g.label(a).into(), g.label(b).into(), g.label(ab).into()])
            .collect(),
    }
}

pub fn pair_doc(p: &MatchedPair) -> PairDoc {
    PairDoc {
        g: groupoid_doc(p.g()),
        h: groupoid_doc(p.h()),
        table: p
            .domain()
            .map(|(h, x)| {
                [
                    p.h().label(h).into(),
                    p.g().label(x).into(),
                    p.g().label(p.act(h, x)).into(),
                    p.h().label(p.res(h, x)).into(),
                ]
            })
            .collect(),
    }
}

fn fibers_of(b: &dyn FellBundle) -> Result<(BTreeMap<String, usize>, Vec<FiberDoc>)> {
    let g = b.groupoid();
    let mut dims = BTreeMap::new();
    let mut fibers = Vec::new();
    for x in g.arrow_ids() {
        let basis = b.matrix_basis(x).ok_or_else(|| {
            Error::Unsupported(format!("bundle has no matrix realization: {}", b.describe()))
        })?;
        if let Some(m) = basis.first() {
            dims.insert(g.unit_label(g.rng(x)).to_string(), m.nrows());
            dims.insert(g.unit_label(g.src(x)).to_string(), m.ncols());
        }
        fibers.push(FiberDoc { arrow: g.label(x).into(), basis: basis.iter().map(matrix_doc).collect() });
    }
    if dims.len() != g.n_units() {
        return Err(Error::Unsupported("cannot infer every unit dimension".into()));
    }
    Ok((dims, fibers))
}

pub fn bundle_doc(b: &dyn FellBundle) -> Result<BundleDoc> {
    let (dims, fibers) = fibers_of(b)?;
    Ok(BundleDoc { groupoid: groupoid_doc(b.groupoid()), dims, fibers })
}

pub fn action_doc(a: &CompatibleAction) -> Result<ActionDoc> {
    let p = a.pair();
    let (dims, fibers) = fibers_of(a.base().as_ref())?;
    Ok(ActionDoc {
        pair: pair_doc(p),
        dims,
        fibers,
        beta: p
            .domain()
            .map(|(h, x)| BetaDoc {
                h: p.h().label(h).into(),
                x: p.g().label(x).into(),
                matrix: matrix_doc(a.matrix(h, x)),
            })
            .collect(),
    })
}

pub fn family_doc(f: &UnitaryFamily) -> Result<FamilyDoc> {
    let zs = f.zs();
    let c = f.bundle();
    let (dims, fibers) = fibers_of(c.as_ref())?;
    let h = zs.pair.h();
    let mut u = Vec::new();
    for a in h.arrow_ids() {
        let k = zs.embed_h(a);
        let basis = c.matrix_basis(k).expect("checked above");
        let mut m = CMat::zeros(basis[0].nrows(), basis[0].ncols());
        for (e, z) in basis.iter().zip(f.u(a).iter()) {
            m += e * *z;
        }
        u.push(ArrowMatrixDoc { arrow: h.label(a).into(), matrix: matrix_doc(&m) });
    }
    Ok(FamilyDoc { pair: pair_doc(&zs.pair), dims, fibers, u })
}

fn values_doc(s: &Section) -> Vec<ValueDoc> {
    let g = s.bundle().groupoid();
    g.arrow_ids()
        .filter(|&x| s.get(x).iter().any(|z| z.norm() != 0.0))
        .map(|x| ValueDoc {
            arrow: g.label(x).into(),
            coeffs: s.get(x).iter().map(|z| format_complex(*z)).collect(),
        })
        .collect()
}

pub fn section_doc(action: &CompatibleAction, space: Space, s: &Section) -> Result<SectionDoc> {
    Ok(SectionDoc { action: action_doc(action)?, space, values: values_doc(s) })
}

fn dims_doc(g: &FiniteGroupoid, hb: &FiniteHilbertBundle) -> BTreeMap<String, usize> {
    g.unit_ids().map(|u| (g.unit_label(u).to_string(), hb.dim(u))).collect()
}

fn weights_doc(g: &FiniteGroupoid, mu: &UnitMeasure) -> BTreeMap<String, String> {
    g.unit_ids().map(|u| (g.unit_label(u).to_string(), format_real(mu.weight(u)))).collect()
}

fn ops_doc(rep: &StrictRep) -> Vec<OpsDoc> {
    let b = rep.bundle();
    let g = b.groupoid();
    g.arrow_ids()
        .map(|x| OpsDoc {
            arrow: g.label(x).into(),
            ops: (0..b.fiber_dim(x)).map(|i| matrix_doc(rep.basis_op(x, i))).collect(),
        })
        .collect()
}

pub fn strict_rep_doc(action: &CompatibleAction, space: Space, rep: &StrictRep) -> Result<StrictRepDoc> {
    Ok(StrictRepDoc {
        action: action_doc(action)?,
        space,
        dims: dims_doc(rep.bundle().groupoid(), rep.hb()),
        psi: ops_doc(rep),
    })
}

pub fn covariant_doc(action: &CompatibleAction, rep: &CovariantRep) -> Result<CovariantDoc> {
    let g = action.pair().g();
    let h = action.pair().h();
    Ok(CovariantDoc {
        action: action_doc(action)?,
        weights: weights_doc(g, &rep.mu),
        dims: dims_doc(g, rep.hb()),
        pi: ops_doc(&rep.pi),
        m: h
            .arrow_ids()
            .map(|a| ArrowMatrixDoc { arrow: h.label(a).into(), matrix: matrix_doc(&rep.m[a.0]) })
            .collect(),
    })
}

pub fn operator_doc(g: &FiniteGroupoid, op: &BlockOperator) -> OperatorDoc {
    OperatorDoc {
        dims: dims_doc(g, &op.hb),
        weights: weights_doc(g, &op.mu),
        matrix: matrix_doc(&op.mat),
    }
}

/// The interchange form of a corpus entry.
pub fn entry_document(e: &CorpusEntry) -> Result<Document> {
    Ok(match &e.payload {
        Payload::Pair(p) => Document::MatchedPair(pair_doc(p)),
        Payload::Action(a) => Document::Action(action_doc(a)?),
        Payload::Family(f) => Document::UnitaryFamily(family_doc(f)?),
        Payload::Section { product, section } => {
            Document::Section(section_doc(product.action(), Space::Product, section)?)
        }
        Payload::StrictRep { product, rep } => {
            Document::StrictRep(strict_rep_doc(product.action(), Space::Product, rep)?)
        }
    })
}

// ---- import ----

fn lookup<'a>(map: &'a BTreeMap<String, usize>, key: &str, what: &str) -> Result<&'a usize> {
    map.get(key).ok_or_else(|| Error::structural(format!("unknown {what} `{key}`")))
}

pub fn build_groupoid(d: &GroupoidDoc) -> Result<FiniteGroupoid> {
    let units: BTreeMap<String, usize> = d.units.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
    let arrows: BTreeMap<String, usize> =
        d.arrows.iter().enumerate().map(|(i, a)| (a.label.clone(), i)).collect();
    if units.len() != d.units.len() || arrows.len() != d.arrows.len() {
        return Err(Error::structural("duplicate unit or arrow label"));
    }
    let mut list = Vec::with_capacity(d.arrows.len());
    for a in &d.arrows {
        list.push(Arrow {
            label: a.label.clone(),
            src: UnitId(*lookup(&units, &a.src, "unit")?),
            rng: UnitId(*lookup(&units, &a.rng, "unit")?),
        });
    }
    let mut comp = Vec::with_capacity(d.products.len());
    for [a, b, ab] in &d.products {
        comp.push((
            ArrowId(*lookup(&arrows, a, "arrow")?),
            ArrowId(*lookup(&arrows, b, "arrow")?),
            ArrowId(*lookup(&arrows, ab, "arrow")?),
        ));
    }
    let table: BTreeMap<(usize, usize), usize> = comp.iter().map(|(a, b, c)| ((a.0, b.0), c.0)).collect();
    // unit arrows are the idempotent loops; inverses are read off the table
    let mut unit_arrow = Vec::with_capacity(units.len());
    for u in 0..d.units.len() {
        let e = (0..list.len())
            .find(|&e| list[e].src.0 == u && list[e].rng.0 == u && table.get(&(e, e)) == Some(&e))
            .ok_or_else(|| Error::structural(format!("no identity arrow at unit `{}`", d.units[u])))?;
        unit_arrow.push(ArrowId(e));
    }
    let mut inv = Vec::with_capacity(list.len());
    for x in 0..list.len() {
        let er = unit_arrow[list[x].rng.0].0;
        let y = (0..list.len())
            .find(|&y| table.get(&(x, y)) == Some(&er))
            .ok_or_else(|| Error::structural(format!("no inverse for `{}`", list[x].label)))?;
        inv.push(ArrowId(y));
    }
    FiniteGroupoid::from_tables(d.units.clone(), list, &comp, inv, unit_arrow)
}

fn arrow_of(g: &FiniteGroupoid, label: &str) -> Result<ArrowId> {
    g.find_arrow(label).ok_or_else(|| Error::structural(format!("unknown arrow `{label}`")))
}

pub fn build_pair(d: &PairDoc) -> Result<MatchedPair> {
    let (g, h) = (build_groupoid(&d.g)?, build_groupoid(&d.h)?);
    let mut entries = Vec::with_capacity(d.table.len());
    for [hh, x, hx, r] in &d.table {
        entries.push((arrow_of(&h, hh)?, arrow_of(&g, x)?, arrow_of(&g, hx)?, arrow_of(&h, r)?));
    }
    MatchedPair::from_tables(g, h, &entries)
}

pub fn build_matrix(m: &MatrixDoc, rows: usize, cols: usize) -> Result<CMat> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::structural(format!("expected a {rows}x{cols} matrix")));
    }
    let mut out = CMat::zeros(rows, cols);
    for (i, r) in m.iter().enumerate() {
        for (j, z) in r.iter().enumerate() {
            out[(i, j)] = parse_complex(z)?;
        }
    }
    Ok(out)
}

fn unit_dims(g: &FiniteGroupoid, dims: &BTreeMap<String, usize>) -> Result<Vec<usize>> {
    if dims.len() != g.n_units() {
        return Err(Error::structural("one dimension per unit is required"));
    }
    g.unit_ids().map(|u| lookup(dims, g.unit_label(u), "unit").copied()).collect()
}

fn build_bundle_parts(
    g: &FiniteGroupoid,
    dims: &BTreeMap<String, usize>,
    fibers: &[FiberDoc],
) -> Result<ConcreteMatrixBundle> {
    let dv = unit_dims(g, dims)?;
    let mut spans: Vec<Option<Vec<CMat>>> = vec![None; g.n_arrows()];
    for f in fibers {
        let x = arrow_of(g, &f.arrow)?;
        let (r, c) = (dv[g.rng(x).0], dv[g.src(x).0]);
        let ms = f.basis.iter().map(|m| build_matrix(m, r, c)).collect::<Result<Vec<_>>>()?;
        if spans[x.0].replace(ms).is_some() {
            return Err(Error::structural(format!("fiber over `{}` given twice", f.arrow)));
        }
    }
    let spans = spans.into_iter().map(|s| s.unwrap_or_default()).collect();
    ConcreteMatrixBundle::new(g.clone(), dv, spans)
}

pub fn build_bundle(d: &BundleDoc) -> Result<ConcreteMatrixBundle> {
    build_bundle_parts(&build_groupoid(&d.groupoid)?, &d.dims, &d.fibers)
}

pub fn build_action(d: &ActionDoc) -> Result<CompatibleAction> {
    let pair = build_pair(&d.pair)?;
    let base: Arc<dyn FellBundle> = Arc::new(build_bundle_parts(pair.g(), &d.dims, &d.fibers)?);
    let mut entries = Vec::with_capacity(d.beta.len());
    for b in &d.beta {
        let (h, x) = (arrow_of(pair.h(), &b.h)?, arrow_of(pair.g(), &b.x)?);
        let Some(hx) = pair.try_act(h, x) else {
            return Err(Error::structural(format!("action matrix off its domain at ({}, {})", b.h, b.x)));
        };
        entries.push((h, x, build_matrix(&b.matrix, base.fiber_dim(hx), base.fiber_dim(x))?));
    }
    CompatibleAction::from_matrices(pair, base, entries)
}

pub fn build_family(d: &FamilyDoc) -> Result<UnitaryFamily> {
    let pair = build_pair(&d.pair)?;
    let zs = crate::gpd::zs_groupoid(&pair)?;
    let bundle = Arc::new(build_bundle_parts(&zs.groupoid, &d.dims, &d.fibers)?);
    let h = pair.h();
    let dv = bundle.dims().to_vec();
    let mut mats: Vec<Option<CMat>> = vec![None; h.n_arrows()];
    for u in &d.u {
        let a = arrow_of(h, &u.arrow)?;
        mats[a.0] = Some(build_matrix(&u.matrix, dv[h.rng(a).0], dv[h.src(a).0])?);
    }
    let mats = mats
        .into_iter()
        .enumerate()
        .map(|(i, m)| m.ok_or_else(|| Error::structural(format!("u_{} missing", h.label(ArrowId(i))))))
        .collect::<Result<Vec<_>>>()?;
    UnitaryFamily::from_matrices(bundle, zs, &mats)
}

/// The product bundle of an action document, with the tolerance used to
/// validate the action.
pub fn build_product(d: &ActionDoc, tol: f64) -> Result<Arc<ZsProductBundle>> {
    Ok(Arc::new(ZsProductBundle::new(build_action(d)?, tol)?))
}

fn space_bundle(product: &Arc<ZsProductBundle>, space: Space) -> Arc<dyn FellBundle> {
    match space {
        Space::Base => product.base().clone(),
        Space::Product => product.clone(),
    }
}

/// Values of a section document placed on `bundle`.
pub fn build_values(bundle: Arc<dyn FellBundle>, values: &[ValueDoc]) -> Result<Section> {
    let g = bundle.groupoid().clone();
    let mut coeffs: Vec<CVec> = g.arrow_ids().map(|x| CVec::zeros(bundle.fiber_dim(x))).collect();
    let mut seen = vec![false; g.n_arrows()];
    for v in values {
        let x = arrow_of(&g, &v.arrow)?;
        if std::mem::replace(&mut seen[x.0], true) {
            return Err(Error::structural(format!("value over `{}` given twice", v.arrow)));
        }
        let zs = v.coeffs.iter().map(|z| parse_complex(z)).collect::<Result<Vec<_>>>()?;
        coeffs[x.0] = CVec::from_vec(zs);
    }
    Section::from_coeffs(bundle, coeffs)
}

pub fn build_section(d: &SectionDoc, tol: f64) -> Result<(Arc<ZsProductBundle>, Section)> {
    let product = build_product(&d.action, tol)?;
    let s = build_values(space_bundle(&product, d.space), &d.values)?;
    Ok((product, s))
}

fn build_ops(bundle: Arc<dyn FellBundle>, dims: &BTreeMap<String, usize>, ops: &[OpsDoc]) -> Result<StrictRep> {
    let g = bundle.groupoid().clone();
    let hb = FiniteHilbertBundle::new(unit_dims(&g, dims)?);
    let mut psi: Vec<Option<Vec<CMat>>> = vec![None; g.n_arrows()];
    for o in ops {
        let x = arrow_of(&g, &o.arrow)?;
        let (r, c) = (hb.dim(g.rng(x)), hb.dim(g.src(x)));
        let ms = o.ops.iter().map(|m| build_matrix(m, r, c)).collect::<Result<Vec<_>>>()?;
        if psi[x.0].replace(ms).is_some() {
            return Err(Error::structural(format!("operators over `{}` given twice", o.arrow)));
        }
    }
    let psi = psi
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| Error::structural(format!("operators over `{}` missing", g.label(ArrowId(i))))))
        .collect::<Result<Vec<_>>>()?;
    StrictRep::new(bundle, hb, psi)
}

pub fn build_strict_rep(d: &StrictRepDoc, tol: f64) -> Result<(Arc<ZsProductBundle>, StrictRep)> {
    let product = build_product(&d.action, tol)?;
    let rep = build_ops(space_bundle(&product, d.space), &d.dims, &d.psi)?;
    Ok((product, rep))
}

pub fn build_measure(g: &FiniteGroupoid, weights: &BTreeMap<String, String>) -> Result<UnitMeasure> {
    if weights.len() != g.n_units() {
        return Err(Error::structural("one weight per unit is required"));
    }
    let mut w = Vec::with_capacity(g.n_units());
    for u in g.unit_ids() {
        let s = weights
            .get(g.unit_label(u))
            .ok_or_else(|| Error::structural(format!("no weight for unit `{}`", g.unit_label(u))))?;
        w.push(parse_real(s)?);
    }
    UnitMeasure::new(w)
}

pub fn build_covariant(d: &CovariantDoc, tol: f64) -> Result<(Arc<ZsProductBundle>, CovariantRep)> {
    let product = build_product(&d.action, tol)?;
    let g = product.zs().pair.g().clone();
    let h = product.zs().pair.h().clone();
    let mu = build_measure(&g, &d.weights)?;
    let pi = build_ops(product.base().clone(), &d.dims, &d.pi)?;
    let hb = pi.hb().clone();
    let mut m: Vec<Option<CMat>> = vec![None; h.n_arrows()];
    for a in &d.m {
        let x = arrow_of(&h, &a.arrow)?;
        m[x.0] = Some(build_matrix(&a.matrix, hb.dim(h.rng(x)), hb.dim(h.src(x)))?);
    }
    let m = m
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| Error::structural(format!("M_{} missing", h.label(ArrowId(i))))))
        .collect::<Result<Vec<_>>>()?;
    Ok((product, CovariantRep { mu, pi, m }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{builtin, random_instance, RandomKind};

    #[test]
    fn complex_numbers_round_trip() {
        for z in [C64::new(0.1, -2.5e-17), C64::new(-0.0, 1.0 / 3.0)] {
            assert_eq!(parse_complex(&format_complex(z)).unwrap(), C64::new(z.re + 0.0, z.im));
        }
        assert_eq!(parse_complex(" 2 ").unwrap(), C64::new(2.0, 0.0));
        assert!(parse_complex("(1, 2, 3)").is_err());
    }

    #[test]
    fn corpus_entries_survive_export_and_import() {
        for name in ["s3_factorized", "semidirect_matrix", "unitary_family_matrix:2", "line_canonical:h_units"] {
            let doc = entry_document(&builtin(name).unwrap()).unwrap();
            let text = render(&doc);
            assert_eq!(canonicalize(&text).unwrap(), text, "{name}");
            match parse(&text).unwrap() {
                Document::MatchedPair(p) => assert_eq!(build_pair(&p).unwrap(), crate::corpus::matched_pair(name).unwrap()),
                Document::Action(a) => {
                    let b = build_action(&a).unwrap();
                    assert!(crate::zsb::validate_action(&b, 1e-9, 0).passed());
                }
                Document::UnitaryFamily(f) => {
                    assert!(crate::zsb::validate_unitary_family(&build_family(&f).unwrap(), 1e-9).passed());
                }
                other => panic!("unexpected {}", other.kind()),
            }
        }
    }

    #[test]
    fn sections_keep_their_values() {
        let e = random_instance(RandomKind::Section, 3).unwrap();
        let Payload::Section { section, .. } = &e.payload else { panic!() };
        let text = render(&entry_document(&e).unwrap());
        let Document::Section(d) = parse(&text).unwrap() else { panic!() };
        let (_, s) = build_section(&d, 1e-9).unwrap();
        assert_eq!(s.to_global(), section.to_global());
    }

    #[test]
    fn syntax_errors_have_locations() {
        let err = parse("{\n  \"kind\": \"groupoid\",\n  \"units\": [1,\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3.., .. }), "{err:?}");
        assert!(matches!(parse("{\"kind\": \"nope\"}"), Err(Error::Parse { .. })));
    }
}
