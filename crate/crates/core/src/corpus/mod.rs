//! Named example instances, seeded generators and the brute-force oracles
//! that back expected values in tests.

pub mod oracle;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alg::Section;
use crate::error::{Error, Result};
use crate::fell::{full_matrix_bundle, ConcreteMatrixBundle, FellBundle};
use crate::gpd::{
    cyclic_group, discrete, internal_factorization, pair_groupoid, symmetric_group,
    transformation_matched_pair, zs_groupoid, ArrowId, FiniteGroupoid, MatchedPair,
    SelfSimilarAction,
};
use crate::linalg::{random_unitary, CMat, C64, ONE, ZERO};
use crate::rep::{regular_strict_rep, StrictRep};
use crate::zsb::{action_from_unitary_family, CompatibleAction, UnitaryFamily, ZsProductBundle};

pub use oracle::oracle_scan;

/// Matched pairs available by name.
pub const PAIR_NAMES: &[&str] = &[
    "trivial_pair",
    "z2z2_trivial",
    "s3_factorized",
    "s3_swapped",
    "selfsim_flip",
    "semidirect",
    "semidirect_pair_groupoid",
    "h_units",
];

/// Matched pairs of groups; unitary families are built over these.
pub const GROUP_PAIR_NAMES: &[&str] =
    &["trivial_pair", "z2z2_trivial", "s3_factorized", "s3_swapped", "semidirect"];

/// Every builtin name without parameters.
pub const BUILTIN_NAMES: &[&str] = &[
    "trivial_pair",
    "z2z2_trivial",
    "s3_factorized",
    "s3_swapped",
    "selfsim_flip",
    "semidirect",
    "semidirect_pair_groupoid",
    "h_units",
    "line_canonical",
    "semidirect_matrix",
    "unitary_family_matrix",
];

#[derive(Clone, Debug)]
pub enum Payload {
    Pair(MatchedPair),
    Action(CompatibleAction),
    Family(UnitaryFamily),
    Section { product: Arc<ZsProductBundle>, section: Section },
    StrictRep { product: Arc<ZsProductBundle>, rep: StrictRep },
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub payload: Payload,
    pub notes: Vec<String>,
}

impl CorpusEntry {
    fn new(name: impl Into<String>, payload: Payload, note: impl Into<String>) -> Self {
        CorpusEntry { name: name.into(), payload, notes: vec![note.into()] }
    }
}

/// Instance kinds for [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomKind {
    Section,
    UnitaryFamily,
    StrictRep,
}

impl std::str::FromStr for RandomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "section" => Ok(RandomKind::Section),
            "unitary_family" => Ok(RandomKind::UnitaryFamily),
            "strict_rep" => Ok(RandomKind::StrictRep),
            other => Err(Error::UnknownEntry(other.to_string())),
        }
    }
}

fn ids(g: &FiniteGroupoid, labels: &[&str]) -> Vec<ArrowId> {
    labels.iter().map(|l| g.find_arrow(l).expect("known label")).collect()
}

fn flip_action(g: FiniteGroupoid, swap: impl Fn(&str) -> String) -> Result<MatchedPair> {
    let h = cyclic_group(2, "b");
    let s = SelfSimilarAction::from_fn(g.clone(), h, |a, x| {
        let y = if a.0 == 0 { x } else { g.find_arrow(&swap(g.label(x))).expect("swap closes") };
        (y, a)
    })?;
    transformation_matched_pair(&s)
}

/// A matched pair by name; see [`PAIR_NAMES`].
pub fn matched_pair(name: &str) -> Result<MatchedPair> {
    match name {
        "trivial_pair" => MatchedPair::trivial(cyclic_group(3, "a"), cyclic_group(2, "b")),
        "z2z2_trivial" => MatchedPair::trivial(cyclic_group(2, "a"), cyclic_group(2, "b")),
        "s3_factorized" | "s3_swapped" => {
            let k = symmetric_group(3);
            let rot = ids(&k, &["123", "231", "312"]);
            let tr = ids(&k, &["123", "213"]);
            let (a, b) = if name == "s3_factorized" { (rot, tr) } else { (tr, rot) };
            Ok(internal_factorization(&k, &a, &b)?.pair)
        }
        "selfsim_flip" => flip_action(discrete(&["0", "1"]), |l| if l == "0" { "1".into() } else { "0".into() }),
        "semidirect_pair_groupoid" => flip_action(pair_groupoid(&["0", "1"]), |l| {
            let t: String = l
                .chars()
                .map(|c| match c {
                    '0' => '1',
                    '1' => '0',
                    c => c,
                })
                .collect();
            t
        }),
        "semidirect" => {
            let (g, h) = (cyclic_group(3, "a"), cyclic_group(2, "b"));
            let gi = g.clone();
            MatchedPair::from_fn(g, h, move |a, x| (if a.0 == 0 { x } else { gi.invert(x) }, a))
        }
        "h_units" => {
            let g = pair_groupoid(&["0", "1"]);
            let h = discrete(&["0", "1"]);
            let (gc, hc) = (g.clone(), h.clone());
            MatchedPair::from_fn(g, h, move |_, x| (x, hc.unit_arrow(gc.src(x))))
        }
        other => Err(Error::UnknownEntry(other.to_string())),
    }
}

/// The canonical action on the line bundle over `G`.
pub fn line_action(pair_name: &str) -> Result<CompatibleAction> {
    CompatibleAction::line_canonical(matched_pair(pair_name)?)
}

/// `M₂` over `ℤ/3`, with `ℤ/2` acting by inversion on arrows and by
/// conjugation with the Pauli `X` on fibers.
pub fn semidirect_matrix() -> Result<CompatibleAction> {
    let pair = matched_pair("semidirect")?;
    let base = Arc::new(full_matrix_bundle(pair.g(), 2));
    let x = CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
    let b = base.clone();
    let p = pair.clone();
    let dynb: Arc<dyn FellBundle> = base;
    CompatibleAction::from_fn(pair, dynb, move |h, y, v| {
        if h.0 == 0 {
            v.clone()
        } else {
            b.coords(p.act(h, y), &(&x * b.matrix(y, v) * &x))
        }
    })
}

/// One-dimensional characters of a finite group, found by enumerating
/// assignments of roots of unity to a generating set.
pub fn characters(h: &FiniteGroupoid) -> Result<Vec<Vec<C64>>> {
    if !h.is_group() {
        return Err(Error::Unsupported("characters are computed for groups only".into()));
    }
    let n = h.n_arrows();
    let e = h.unit_arrow(crate::gpd::UnitId(0));
    let closure = |gens: &[ArrowId]| {
        let mut seen = vec![false; n];
        seen[e.0] = true;
        let mut stack = vec![e];
        while let Some(y) = stack.pop() {
            for &g in gens {
                let z = h.product(y, g).expect("group");
                if !seen[z.0] {
                    seen[z.0] = true;
                    stack.push(z);
                }
            }
        }
        seen
    };
    let mut gens = Vec::new();
    let mut covered = closure(&gens);
    for a in h.arrow_ids() {
        if !covered[a.0] {
            gens.push(a);
            covered = closure(&gens);
        }
    }
    let roots: Vec<C64> = (0..n)
        .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let mut out = Vec::new();
    let total = n.pow(gens.len() as u32);
    'assign: for code in 0..total {
        let mut val: Vec<Option<C64>> = vec![None; n];
        val[e.0] = Some(ONE);
        let mut c = code;
        let gv: Vec<C64> = gens
            .iter()
            .map(|_| {
                let r = roots[c % n];
                c /= n;
                r
            })
            .collect();
        let mut stack = vec![e];
        while let Some(y) = stack.pop() {
            for (g, v) in gens.iter().zip(&gv) {
                let z = h.product(y, *g).expect("group");
                let w = val[y.0].expect("visited") * v;
                match val[z.0] {
                    None => {
                        val[z.0] = Some(w);
                        stack.push(z);
                    }
                    Some(old) if (old - w).norm() > 1e-9 => continue 'assign,
                    Some(_) => {}
                }
            }
        }
        let chi: Vec<C64> = val.into_iter().map(|v| v.expect("generated")).collect();
        let hom = h.arrow_ids().all(|a| {
            h.arrow_ids()
                .all(|b| (chi[a.0] * chi[b.0] - chi[h.product(a, b).unwrap().0]).norm() < 1e-9)
        });
        if hom {
            out.push(chi);
        }
    }
    Ok(out)
}

/// `u_h = V diag(χ₁(h), …, χ_d(h)) V*` in the full `M_d` bundle over
/// `G ⋈ H`, with `V` and the characters drawn from `seed`. `H` must be a group.
pub fn unitary_family(pair_name: &str, d: usize, seed: u64) -> Result<UnitaryFamily> {
    let pair = matched_pair(pair_name)?;
    let chars = characters(pair.h())?;
    let zs = zs_groupoid(&pair)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_unitary(&mut rng, d);
    let picks: Vec<usize> = (0..d).map(|_| rng.gen_range(0..chars.len())).collect();
    let mats: Vec<CMat> = pair
        .h()
        .arrow_ids()
        .map(|a| {
            let diag = crate::linalg::CVec::from_iterator(d, picks.iter().map(|&k| chars[k][a.0]));
            &v * CMat::from_diagonal(&diag) * v.adjoint()
        })
        .collect();
    let bundle: Arc<ConcreteMatrixBundle> = Arc::new(full_matrix_bundle(&zs.groupoid, d));
    UnitaryFamily::from_matrices(bundle, zs, &mats)
}

/// The product bundle of an action.
pub fn product(action: CompatibleAction) -> Result<Arc<ZsProductBundle>> {
    Ok(Arc::new(ZsProductBundle::new(action, 1e-9)?))
}

/// The action induced by a unitary family on the pulled-back base.
pub fn family_action(f: &UnitaryFamily) -> Result<CompatibleAction> {
    Ok(action_from_unitary_family(f, 1e-9)?.1)
}

fn parse_dim(s: &str) -> Result<usize> {
    match s.parse::<usize>() {
        Ok(d) if (1..=4).contains(&d) => Ok(d),
        _ => Err(Error::UnknownEntry(format!("unitary_family_matrix:{s}"))),
    }
}

/// A deterministic builtin instance. Accepts the names in [`BUILTIN_NAMES`]
/// and the parameterized forms `line_canonical:<pair>` and
/// `unitary_family_matrix:<d>[:<pair>]`.
pub fn builtin(name: &str) -> Result<CorpusEntry> {
    let mut parts = name.split(':');
    let head = parts.next().unwrap_or_default();
    let rest: Vec<&str> = parts.collect();
    match (head, rest.as_slice()) {
        (p, []) if PAIR_NAMES.contains(&p) => Ok(CorpusEntry::new(
            name,
            Payload::Pair(matched_pair(p)?),
            "matched pair",
        )),
        ("line_canonical", []) => Ok(CorpusEntry::new(
            name,
            Payload::Action(line_action("s3_factorized")?),
            "canonical line action over s3_factorized",
        )),
        ("line_canonical", [p]) => Ok(CorpusEntry::new(
            name,
            Payload::Action(line_action(p)?),
            format!("canonical line action over {p}"),
        )),
        ("semidirect_matrix", []) => Ok(CorpusEntry::new(
            name,
            Payload::Action(semidirect_matrix()?),
            "M_2 over Z/3, Z/2 acting by inversion and Ad(X)",
        )),
        ("unitary_family_matrix", []) => Ok(CorpusEntry::new(
            name,
            Payload::Family(unitary_family("s3_factorized", 2, 0)?),
            "d = 2 over s3_factorized, seed 0",
        )),
        ("unitary_family_matrix", [d]) => Ok(CorpusEntry::new(
            name,
            Payload::Family(unitary_family("s3_factorized", parse_dim(d)?, 0)?),
            format!("d = {d} over s3_factorized, seed 0"),
        )),
        ("unitary_family_matrix", [d, p]) => Ok(CorpusEntry::new(
            name,
            Payload::Family(unitary_family(p, parse_dim(d)?, 0)?),
            format!("d = {d} over {p}, seed 0"),
        )),
        _ => Err(Error::UnknownEntry(name.to_string())),
    }
}

/// Seeded instances. Sections live over the line product of
/// `s3_factorized`; unitary families cycle through [`GROUP_PAIR_NAMES`] with
/// `d ∈ {2, 3}`; strict representations are regular representations of
/// line products, cycling through [`PAIR_NAMES`].
pub fn random_instance(kind: RandomKind, seed: u64) -> Result<CorpusEntry> {
    match kind {
        RandomKind::Section => {
            let prod = product(line_action("s3_factorized")?)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dynp: Arc<dyn FellBundle> = prod.clone();
            let section = Section::random(dynp, &mut rng);
            Ok(CorpusEntry::new(
                format!("random_section:{seed}"),
                Payload::Section { product: prod, section },
                "Gaussian coordinates over the line product of s3_factorized",
            ))
        }
        RandomKind::UnitaryFamily => {
            let n = GROUP_PAIR_NAMES.len() as u64;
            let pair = GROUP_PAIR_NAMES[(seed % n) as usize];
            let d = 2 + ((seed / n) % 2) as usize;
            Ok(CorpusEntry::new(
                format!("random_unitary_family:{seed}"),
                Payload::Family(unitary_family(pair, d, seed)?),
                format!("d = {d} over {pair}"),
            ))
        }
        RandomKind::StrictRep => {
            let pair = PAIR_NAMES[(seed % PAIR_NAMES.len() as u64) as usize];
            let prod = product(line_action(pair)?)?;
            let dynp: Arc<dyn FellBundle> = prod.clone();
            let rep = regular_strict_rep(dynp)?;
            Ok(CorpusEntry::new(
                format!("random_strict_rep:{seed}"),
                Payload::StrictRep { product: prod, rep },
                format!("regular representation of the line product over {pair}"),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpd::{check_matched_pair, validate_groupoid};
    use crate::zsb::{validate_action, validate_unitary_family};

    #[test]
    fn every_pair_is_a_matched_pair() {
        for name in PAIR_NAMES {
            let p = matched_pair(name).unwrap();
            let r = check_matched_pair(&p);
            assert!(r.passed(), "{name}: {}", r.render_human());
            assert!(validate_groupoid(&zs_groupoid(&p).unwrap().groupoid).passed());
        }
    }

    #[test]
    fn sizes_of_named_products() {
        let size = |n: &str| zs_groupoid(&matched_pair(n).unwrap()).unwrap().groupoid.n_arrows();
        assert_eq!(size("s3_factorized"), 6);
        assert_eq!(size("selfsim_flip"), 4);
        assert_eq!(size("z2z2_trivial"), 4);
        assert_eq!(size("semidirect_pair_groupoid"), 8);
    }

    #[test]
    fn characters_of_small_groups() {
        assert_eq!(characters(&cyclic_group(3, "a")).unwrap().len(), 3);
        // S3 has only the trivial and sign characters
        assert_eq!(characters(&symmetric_group(3)).unwrap().len(), 2);
    }

    #[test]
    fn actions_and_families_validate() {
        assert!(validate_action(&semidirect_matrix().unwrap(), 1e-9, 0).passed());
        for name in PAIR_NAMES {
            assert!(validate_action(&line_action(name).unwrap(), 1e-9, 0).passed());
        }
        for seed in 0..4 {
            let e = random_instance(RandomKind::UnitaryFamily, seed).unwrap();
            let Payload::Family(f) = e.payload else { panic!() };
            assert!(validate_unitary_family(&f, 1e-9).passed());
        }
    }

    #[test]
    fn random_sections_are_reproducible() {
        let a = random_instance(RandomKind::Section, 7).unwrap();
        let b = random_instance(RandomKind::Section, 7).unwrap();
        let (Payload::Section { section: s, .. }, Payload::Section { section: t, .. }) = (a.payload, b.payload)
        else {
            panic!()
        };
        assert_eq!(s.to_global(), t.to_global());
    }

    #[test]
    fn unknown_names_are_errors() {
        assert!(matches!(builtin("no_such_pair"), Err(Error::UnknownEntry(_))));
        assert!(matches!(builtin("unitary_family_matrix:9"), Err(Error::UnknownEntry(_))));
        assert!(matches!(builtin("line_canonical:nope"), Err(Error::UnknownEntry(_))));
    }
}
