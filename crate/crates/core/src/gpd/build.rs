//! Constructors for common finite groupoids.

use super::{Arrow, ArrowId, FiniteGroupoid, UnitId};
use crate::error::{Error, Result};

/// A group on one unit `o` from labels and a multiplication on indices.
///
/// The identity and inverses are found by search; if the table has no
/// identity or some element has no inverse, the result is an error.
pub fn group_from_table(
    labels: &[String],
    mul: impl Fn(usize, usize) -> usize,
) -> Result<FiniteGroupoid> {
    let n = labels.len();
    let e = (0..n)
        .find(|&e| (0..n).all(|x| mul(e, x) == x && mul(x, e) == x))
        .ok_or_else(|| Error::structural("multiplication table has no identity"))?;
    let mut inv = Vec::with_capacity(n);
    for x in 0..n {
        let y = (0..n)
            .find(|&y| mul(x, y) == e)
            .ok_or_else(|| Error::structural(format!("`{}` has no inverse", labels[x])))?;
        inv.push(ArrowId(y));
    }
    let arrows = labels
        .iter()
        .map(|l| Arrow { label: l.clone(), src: UnitId(0), rng: UnitId(0) })
        .collect();
    FiniteGroupoid::from_fn(
        vec!["o".into()],
        arrows,
        |a, b| ArrowId(mul(a.0, b.0)),
        |a| inv[a.0],
        vec![ArrowId(e)],
    )
}

/// The cyclic group of order `n`, elements labelled `{prefix}{k}`.
pub fn cyclic_group(n: usize, prefix: &str) -> FiniteGroupoid {
    assert!(n > 0, "cyclic group of order zero");
    let labels: Vec<String> = (0..n).map(|k| format!("{prefix}{k}")).collect();
    group_from_table(&labels, |a, b| (a + b) % n).expect("cyclic table is a group")
}

/// The symmetric group on `{1..n}`; elements are labelled by the one-line
/// notation of the permutation (`"213"` swaps 1 and 2). Composition is
/// `(p q)(i) = p(q(i))`.
pub fn symmetric_group(n: usize) -> FiniteGroupoid {
    assert!((1..=9).contains(&n), "symmetric group size out of range");
    let perms = permutations(n);
    let labels: Vec<String> = perms.iter().map(|p| perm_label(p)).collect();
    let index = |p: &[usize]| perms.iter().position(|q| q == p).unwrap();
    group_from_table(&labels, |a, b| {
        let comp: Vec<usize> = (0..n).map(|i| perms[a][perms[b][i]]).collect();
        index(&comp)
    })
    .expect("permutation table is a group")
}

pub(crate) fn perm_label(p: &[usize]) -> String {
    p.iter().map(|&i| char::from(b'1' + i as u8)).collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q: Vec<usize> = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Only unit arrows; arrow labels equal unit labels.
pub fn discrete(units: &[&str]) -> FiniteGroupoid {
    let arrows = units
        .iter()
        .enumerate()
        .map(|(i, u)| Arrow { label: u.to_string(), src: UnitId(i), rng: UnitId(i) })
        .collect();
    FiniteGroupoid::from_fn(
        units.iter().map(|u| u.to_string()).collect(),
        arrows,
        |a, _| a,
        |a| a,
        (0..units.len()).map(ArrowId).collect(),
    )
    .expect("discrete groupoid")
}

/// The pair groupoid: one arrow `(i,j)` from `j` to `i` for every pair.
pub fn pair_groupoid(units: &[&str]) -> FiniteGroupoid {
    let n = units.len();
    let mut arrows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            arrows.push(Arrow {
                label: format!("({},{})", units[i], units[j]),
                src: UnitId(j),
                rng: UnitId(i),
            });
        }
    }
    let id = |i: usize, j: usize| ArrowId(i * n + j);
    FiniteGroupoid::from_fn(
        units.iter().map(|u| u.to_string()).collect(),
        arrows,
        |a, b| id(a.0 / n, b.0 % n),
        |a| id(a.0 % n, a.0 / n),
        (0..n).map(|i| id(i, i)).collect(),
    )
    .expect("pair groupoid")
}

/// The subgroupoid on the arrow subset `keep`, with all units of `k`.
///
/// Returns the subgroupoid and the inclusion map. Fails with a precondition
/// error unless `keep` contains every unit arrow and is closed under
/// composition and inversion.
pub(crate) fn subgroupoid(
    k: &FiniteGroupoid,
    keep: &[ArrowId],
) -> Result<(FiniteGroupoid, Vec<ArrowId>)> {
    let mut embed: Vec<ArrowId> = keep.to_vec();
    embed.sort();
    embed.dedup();
    let mut local = vec![None; k.n_arrows()];
    for (i, a) in embed.iter().enumerate() {
        if a.0 >= k.n_arrows() {
            return Err(Error::precondition(format!("arrow {a} is not in the groupoid")));
        }
        local[a.0] = Some(ArrowId(i));
    }
    for u in k.unit_ids() {
        if local[k.unit_arrow(u).0].is_none() {
            return Err(Error::precondition(format!(
                "subset misses the unit arrow of `{}`",
                k.unit_label(u)
            )));
        }
    }
    for &a in &embed {
        if local[k.invert(a).0].is_none() {
            return Err(Error::precondition(format!(
                "subset is not closed under inverting `{}`",
                k.label(a)
            )));
        }
        for &b in &embed {
            if k.composable(a, b) && local[k.compose(a, b)?.0].is_none() {
                return Err(Error::precondition(format!(
                    "subset is not closed under ({}, {})",
                    k.label(a),
                    k.label(b)
                )));
            }
        }
    }
    let arrows = embed.iter().map(|&a| k.arrows()[a.0].clone()).collect();
    let loc = |a: ArrowId| local[a.0].expect("closed");
    let sub = FiniteGroupoid::from_fn(
        k.units().to_vec(),
        arrows,
        |a, b| loc(k.product(embed[a.0], embed[b.0]).expect("composable")),
        |a| loc(k.invert(embed[a.0])),
        k.unit_arrows().iter().map(|&e| loc(e)).collect(),
    )?;
    Ok((sub, embed))
}
