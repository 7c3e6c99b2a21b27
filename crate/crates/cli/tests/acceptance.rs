//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! fails. Expected numbers are recomputed here by the brute-force routines in
//! `zsfell::corpus::oracle` rather than trusted from the library under test.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zsfell::alg::{blend_rank, convolve, cstar_norm, star_section, Section};
use zsfell::corpus::oracle::{eigenvalues_2x2, power_iteration, NaiveGroupoid, NaivePair};
use zsfell::corpus::{
    family_action, line_action, matched_pair, product, semidirect_matrix, unitary_family, GROUP_PAIR_NAMES,
    PAIR_NAMES,
};
use zsfell::fell::{check_bundle_hom, line_bundle, validate_fell_bundle, BundleHom, FellBundle, FellOptions};
use zsfell::gpd::{check_matched_pair, cyclic_group, symmetric_group, validate_groupoid, zs_groupoid};
use zsfell::linalg::{CMat, CVec, ONE};
use zsfell::rep::{
    check_integrated_form, disintegrate, injectivity_check, integrate, integrate_strict, regular_strict_rep,
    twisted_amplification, validate_covariant_rep, UnitMeasure,
};
use zsfell::report::ValidationReport;
use zsfell::zsb::{theta_iso, UnitaryFamily, ZsProductBundle};
use zsfell::Result;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn dynb(p: &Arc<ZsProductBundle>) -> Arc<dyn FellBundle> {
    p.clone()
}

fn failures(r: &ValidationReport) -> String {
    let mut ids: Vec<String> = r.failed_ids().into_iter().map(String::from).collect();
    ids.extend(r.structural.iter().cloned());
    ids.join(",")
}

/// Line actions over every corpus pair, the matrix semidirect action, and the
/// unitary-family actions below; all of them unital.
fn unital_products() -> Result<Vec<(String, Arc<ZsProductBundle>)>> {
    let mut out = Vec::new();
    for p in PAIR_NAMES {
        out.push((format!("line:{p}"), product(line_action(p)?)?));
    }
    out.push(("semidirect_matrix".into(), product(semidirect_matrix()?)?));
    for (name, f) in families()? {
        out.push((name, product(family_action(&f)?)?));
    }
    Ok(out)
}

fn families() -> Result<Vec<(String, UnitaryFamily)>> {
    let mut out = Vec::new();
    for (i, p) in GROUP_PAIR_NAMES.iter().enumerate() {
        for d in [1, 2, 3] {
            let seed = 17 * i as u64 + d as u64;
            out.push((format!("family:{p}:d{d}:s{seed}"), unitary_family(p, d, seed)?));
        }
    }
    Ok(out)
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut bad = Vec::new();
    for name in PAIR_NAMES {
        let p = matched_pair(name)?;
        let laws = check_matched_pair(&p);
        let zs = zs_groupoid(&p)?;
        let gpd = validate_groupoid(&zs.groupoid);
        let exact = ["ZS10", "ZS11", "ZS12", "ZS13"]
            .iter()
            .all(|id| laws.check(id).is_some_and(|c| c.passed && c.residual == 0.0));
        // the same laws, re-derived from label tables
        let naive_pair = NaivePair::flatten(&p).violations();
        let naive_k = NaiveGroupoid::flatten(&zs.groupoid).violations();
        let size = NaivePair::flatten(&p).product_table().0.len();
        if !(laws.passed() && gpd.passed() && exact && naive_pair.is_empty() && naive_k.is_empty())
            || size != zs.groupoid.n_arrows()
        {
            bad.push(name.to_string());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let required = ["s3_factorized", "selfsim_flip", "semidirect"].iter().all(|r| PAIR_NAMES.contains(r));
    Ok(Outcome::new(
        bad.is_empty() && PAIR_NAMES.len() >= 6 && required && secs < 1.0,
        format!("{} pairs, failures [{}], {secs:.3} s", PAIR_NAMES.len(), bad.join(",")),
    ))
}

fn criterion_2() -> Result<Outcome> {
    let start = Instant::now();
    let opts = FellOptions::default();
    let mut count = 0;
    let mut families = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (name, p) in unital_products()? {
        let r = validate_fell_bundle(p.as_ref(), &opts);
        worst = worst.max(r.max_residual());
        count += 1;
        if name.starts_with("family:") {
            let d = p.base().fiber_dim(p.zs().pair.g().arrow_ids().next().unwrap());
            if d <= 9 && p.groupoid().n_arrows() <= 36 {
                families += 1;
            }
        }
        if !r.passed() || r.max_residual() > 1e-9 {
            bad.push(format!("{name}({})", failures(&r)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(Outcome::new(
        bad.is_empty() && count >= 10 && families >= 5 && secs < 30.0,
        format!("{count} actions ({families} unitary-family), max residual {worst:.2e}, failures [{}], {secs:.2} s", bad.join(",")),
    ))
}

fn criterion_3() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let fams = families()?;
    for (i, (name, f)) in fams.iter().enumerate() {
        let p = ZsProductBundle::new(family_action(f)?, 1e-9)?;
        let r = theta_iso(f, &p, 1e-9, i as u64);
        worst = worst.max(r.max_residual());
        if !r.passed() || r.max_residual() > 1e-9 {
            bad.push(format!("{name}({})", failures(&r)));
        }
    }
    Ok(Outcome::new(
        bad.is_empty(),
        format!("{} families, max residual {worst:.2e}, failures [{}]", fams.len(), bad.join(",")),
    ))
}

fn criterion_4() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut sampled = 0;
    for name in PAIR_NAMES {
        let prod = product(line_action(name)?)?;
        let k = prod.groupoid().clone();
        let direct: Arc<dyn FellBundle> = Arc::new(line_bundle(&k));
        let hom = BundleHom { arrow_map: k.arrow_ids().collect(), maps: vec![CMat::identity(1, 1); k.n_arrows()] };
        let r = check_bundle_hom(prod.as_ref(), direct.as_ref(), &hom, 1e-9, 4, true, true);
        if !r.passed() {
            bad.push(format!("{name}({})", failures(&r)));
        }
        // 50 sections split over the pairs, at least 7 each
        for _ in 0..7 {
            let s = Section::random(dynb(&prod), &mut rng);
            let t = Section::from_coeffs(direct.clone(), s.coeffs().to_vec())?;
            worst = worst.max((cstar_norm(&s)? - cstar_norm(&t)?).abs());
            sampled += 1;
        }
    }
    Ok(Outcome::new(
        bad.is_empty() && sampled >= 50 && worst <= 1e-8,
        format!("{} pairs, {sampled} sections, max norm gap {worst:.2e}, failures [{}]", PAIR_NAMES.len(), bad.join(",")),
    ))
}

fn criterion_5() -> Result<Outcome> {
    let mut bad = Vec::new();
    let mut specific = Vec::new();
    for (name, p) in unital_products()? {
        let h_line: Arc<dyn FellBundle> = Arc::new(line_bundle(p.zs().pair.h()));
        let b = blend_rank(&p, h_line)?;
        // oracle: total dimension counted fiber by fiber
        let dim: usize = p.groupoid().arrow_ids().map(|k| p.fiber_dim(k)).sum();
        if !(b.rank_ij == dim && b.rank_ji == dim && b.full_dim == dim) {
            bad.push(format!("{name}({}/{}/{dim})", b.rank_ij, b.rank_ji));
        }
        if let Some(pair) = name.strip_prefix("line:") {
            let (ij, ji, odim) = NaivePair::flatten(&matched_pair(pair)?).line_blend_ranks();
            if (ij, ji, odim) != (b.rank_ij, b.rank_ji, b.full_dim) {
                bad.push(format!("{name}(oracle {ij}/{ji}/{odim})"));
            }
            if pair == "z2z2_trivial" || pair == "s3_factorized" {
                specific.push((pair.to_string(), b.rank_ij, odim));
            }
        }
    }
    let expected = [("z2z2_trivial", 4), ("s3_factorized", 6)];
    let spec_ok = expected
        .iter()
        .all(|(n, v)| specific.iter().any(|(m, r, d)| m == n && r == v && d == v));
    let shown: Vec<String> = specific.iter().map(|(n, r, d)| format!("{n} rank={r} dim={d}")).collect();
    Ok(Outcome::new(bad.is_empty() && spec_ok, format!("{}; failures [{}]", shown.join(", "), bad.join(","))))
}

fn criterion_6() -> Result<Outcome> {
    // Δ ≠ 1 needs arrows between distinct units of G
    let cases: Vec<(&str, Vec<f64>)> = vec![
        ("s3_factorized", vec![1.0]),
        ("semidirect", vec![1.0]),
        ("semidirect_pair_groupoid", vec![1.0, 1.0]),
        ("semidirect_pair_groupoid", vec![1.0, 3.0]),
        ("semidirect_pair_groupoid", vec![0.2, 5.0]),
        ("h_units", vec![1.0, 1.0]),
        ("h_units", vec![2.0, 0.5]),
        ("h_units", vec![7.0, 1.0]),
    ];
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut ratio = 0.0f64;
    for (i, (pair, w)) in cases.iter().enumerate() {
        let prod = product(line_action(pair)?)?;
        let psi = regular_strict_rep(dynb(&prod))?;
        let cov = disintegrate(&psi, &prod, UnitMeasure::new(w.clone())?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(600 + i as u64);
        let secs: Vec<Section> = (0..100).map(|_| Section::random(dynb(&prod), &mut rng)).collect();
        let mut r = validate_covariant_rep(&cov, prod.action(), 1e-9);
        r.absorb("", check_integrated_form(&cov, &prod, &secs, 1e-9, 1e-9)?);
        worst = worst.max(r.max_residual());
        if let Some((_, v)) = r.metrics.iter().find(|(k, _)| k == "max_norm_ratio") {
            ratio = ratio.max(v.parse().unwrap_or(f64::INFINITY));
        }
        if !r.passed() {
            bad.push(format!("{pair}{w:?}({})", failures(&r)));
        }
    }
    Ok(Outcome::new(
        bad.is_empty(),
        format!("{} (pair, mu) cases x 100 sections, max residual {worst:.2e}, max |L|/|s|_I {ratio:.4}, failures [{}]", cases.len(), bad.join(",")),
    ))
}

fn criterion_7() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut n = 0;
    let mut count = 0;
    for (_, prod) in unital_products()? {
        let psi = regular_strict_rep(dynb(&prod))?;
        let mu = UnitMeasure::uniform(prod.zs().pair.g().n_units());
        let cov = disintegrate(&psi, &prod, mu.clone())?;
        for k in prod.groupoid().arrow_ids() {
            for i in 0..prod.fiber_dim(k) {
                let mut v = CVec::zeros(prod.fiber_dim(k));
                v[i] = ONE;
                let s = Section::delta(dynb(&prod), k, v);
                let a = integrate(&cov, &prod, &s)?;
                let b = integrate_strict(&psi, &mu, &s)?;
                worst = worst.max((a.mat - b.mat).norm());
                n += 1;
            }
        }
        count += 1;
    }
    Ok(Outcome::new(worst <= 1e-9, format!("{count} instances, {n} basis sections, max gap {worst:.2e}")))
}

fn criterion_8() -> Result<Outcome> {
    let mut cov_worst = 0.0f64;
    let mut bad = Vec::new();
    let mut count = 0;
    for (name, prod) in unital_products()? {
        let p = prod.zs().pair.clone();
        if p.g().n_units() != 1 || p.h().n_units() != 1 {
            continue;
        }
        let pi = regular_strict_rep(prod.base().clone())?;
        let amp = twisted_amplification(prod.action(), &pi)?;
        let r = validate_covariant_rep(&amp, prod.action(), 1e-12);
        cov_worst = cov_worst.max(r.check("COV").map_or(f64::INFINITY, |c| c.residual));
        if !r.passed() {
            bad.push(format!("{name}({})", failures(&r)));
        }
        count += 1;
    }
    let mut gap = f64::INFINITY;
    for (i, pair) in ["z2z2_trivial", "s3_factorized"].iter().enumerate() {
        let prod = product(line_action(pair)?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(800 + i as u64);
        let mut secs = Vec::new();
        while secs.len() < 100 {
            let s = Section::random(prod.base().clone(), &mut rng);
            if !s.is_zero() {
                secs.push(s);
            }
        }
        let r = injectivity_check(&prod, &secs, 1e-9, 1e-8)?;
        if let Some((_, v)) = r.metrics.iter().find(|(k, _)| k == "min_gap") {
            gap = gap.min(v.parse().unwrap_or(f64::NEG_INFINITY));
        }
        if !r.passed() {
            bad.push(format!("inject:{pair}({})", failures(&r)));
        }
    }
    Ok(Outcome::new(
        bad.is_empty() && cov_worst <= 1e-12 && count >= 5,
        format!("{count} group instances, covariance residual {cov_worst:.2e}, min injectivity gap {gap:.3e}, failures [{}]", bad.join(",")),
    ))
}

fn criterion_9() -> Result<Outcome> {
    let z2: Arc<dyn FellBundle> = Arc::new(line_bundle(&cyclic_group(2, "a")));
    let s3: Arc<dyn FellBundle> = Arc::new(line_bundle(&symmetric_group(3)));
    let ones = |b: &Arc<dyn FellBundle>| {
        let v = vec![CVec::from_element(1, ONE); b.groupoid().n_arrows()];
        Section::from_coeffs(b.clone(), v)
    };
    let n2 = cstar_norm(&ones(&z2)?)?;
    let n6 = cstar_norm(&ones(&s3)?)?;
    // oracles: left regular matrices of the all-ones element
    let o2 = eigenvalues_2x2(1.0, 1.0, 1.0, 1.0).0.abs().max(eigenvalues_2x2(1.0, 1.0, 1.0, 1.0).1.abs());
    let o6 = power_iteration(&vec![vec![1.0; 6]; 6], 200);
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bundles: Vec<Arc<dyn FellBundle>> = vec![
        s3.clone(),
        dynb(&product(line_action("semidirect_pair_groupoid")?)?),
        dynb(&product(semidirect_matrix()?)?),
        dynb(&product(family_action(&unitary_family("s3_factorized", 2, 9)?)?)?),
    ];
    for i in 0..100 {
        let s = Section::random(bundles[i % bundles.len()].clone(), &mut rng);
        let n = cstar_norm(&s)?;
        let ss = cstar_norm(&convolve(&star_section(&s), &s)?)?;
        worst = worst.max((ss - n * n).abs() / (n * n).max(1.0));
    }
    let pass = (n2 - 2.0).abs() <= 1e-10
        && (o2 - 2.0).abs() <= 1e-10
        && (n6 - 6.0).abs() <= 1e-8
        && (o6 - 6.0).abs() <= 1e-8
        && worst <= 1e-8;
    Ok(Outcome::new(
        pass,
        format!("Z/2: {n2:.12} (oracle {o2:.12}), S3: {n6:.12} (oracle {o6:.12}), C*-identity relative gap {worst:.2e}"),
    ))
}

fn criterion_10() -> Result<Outcome> {
    let bin = env!("CARGO_BIN_EXE_zsfell");
    let dir = tempfile::tempdir().expect("temp dir");
    let rep = dir.path().join("rep.json");
    let out = Command::new(bin).args(["corpus", "random_strict_rep", "--seed", "6"]).output().expect("run");
    std::fs::write(&rep, &out.stdout).expect("write");
    let rep = rep.to_string_lossy().to_string();
    let runs: Vec<Vec<&str>> = vec![
        vec!["zs-bundle", "corpus:semidirect_matrix", "--seed", "3"],
        vec!["validate", "corpus:unitary_family_matrix:3", "--seed", "5"],
        vec!["blend", "corpus:line_canonical:s3_factorized"],
        vec!["inject", "corpus:line_canonical:s3_factorized", "--samples", "10", "--seed", "2"],
        vec!["disintegrate", &rep],
        vec!["oracle", "corpus:semidirect_pair_groupoid"],
    ];
    let mut bad = Vec::new();
    for args in &runs {
        let go = || {
            Command::new(bin).args(args.iter()).args(["--format", "machine"]).output().expect("run zsfell")
        };
        let (a, b) = (go(), go());
        if a.stdout != b.stdout || a.stdout.is_empty() || !a.status.success() {
            bad.push(args[0].to_string());
        }
    }
    Ok(Outcome::new(bad.is_empty(), format!("{} commands run twice, mismatches [{}]", runs.len(), bad.join(","))))
}

fn main() {
    let criteria: [fn() -> Result<Outcome>; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut all = true;
    for (i, c) in criteria.iter().enumerate() {
        let o = c().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        all &= o.pass;
        println!("criterion {}: {} {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if !all {
        std::process::exit(1);
    }
}
