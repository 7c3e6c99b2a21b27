//! The `zsfell` command line. [`run`] is the whole program; `main` only
//! forwards the process arguments and exit status.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zsfell::alg::{blend_rank, convolve, cstar_norm, i_norm, i_norm_r, i_norm_s, star_section, Section};
use zsfell::corpus::{builtin, oracle_scan, random_instance, CorpusEntry, Payload, RandomKind};
use zsfell::fell::{line_bundle, validate_fell_bundle, FellBundle, FellOptions};
use zsfell::gpd::{check_matched_pair, validate_groupoid, zs_groupoid};
use zsfell::interchange::{self as ix, Document, Space};
use zsfell::rep::{
    check_integrated_form, disintegrate, regular_strict_rep, injectivity_check, integrate, integrate_strict,
    twisted_amplification, validate_covariant_rep, validate_strict_rep, UnitMeasure,
};
use zsfell::report::{Check, Format, ValidationReport};
use zsfell::zsb::{action_from_unitary_family, theta_iso, validate_action, validate_unitary_family, ZsProductBundle};
use zsfell::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "zsfell", version, about = "Check Zappa-Szep products of groupoids and Fell bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tolerance for algebraic residuals.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for sampled checks and random corpus instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// `uniform`, or a measure document.
    #[arg(long, global = true, default_value = "uniform")]
    mu: String,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the document produced by the command (groupoid, operator,
    /// representation) here.
    #[arg(long, global = true)]
    export: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Human,
    Machine,
}

/// Inputs are document paths, or `corpus:<name>` for a builtin entry.
#[derive(Subcommand, Debug)]
enum Command {
    /// Run the validator matching the document kind.
    Validate { file: String },
    /// Matched-pair laws and the groupoid laws of `G ⋈ H`.
    ZsGroupoid { pair: String },
    /// Fell bundle laws of the product bundle of an action.
    ZsBundle { action: String },
    /// I-norms, C*-norm and the C*-identity of a section.
    Norms { section: String },
    /// Span ranks of `i ⊙ j` and `j ⊙ i`.
    Blend { action: String },
    /// Integrated form of a covariant representation on a section.
    Integrate { rep: String, section: String },
    /// Covariant representation of a strict representation of the product.
    Disintegrate { rep: String },
    /// Twisted amplification of a representation of the base (groups only).
    /// Given an action, the regular representation of the base is used.
    Amplify { rep: String },
    /// Injectivity bound for a section of the base (groups only). Given an
    /// action, only the `--samples` random sections are checked.
    Inject {
        section: String,
        /// Additional seeded random sections.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Print a corpus entry: a builtin name, or `random_section`,
    /// `random_unitary_family`, `random_strict_rep` with `--seed`.
    Corpus { name: String },
    /// Brute-force re-derivation of the checkable facts of a document.
    Oracle { file: String },
}

/// Command outcome before rendering.
enum Outcome {
    Report(ValidationReport),
    Text(String),
}

const NORM_TOL: f64 = 1e-8;

/// Run the program on `args` (including the program name). Returns the exit
/// status: 0 when every check passes, 1 on check failures or invalid input,
/// 2 on parse and usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let format = match cli.format {
        FormatArg::Human => Format::Human,
        FormatArg::Machine => Format::Machine,
    };
    match execute(&cli) {
        Ok(Outcome::Report(r)) => {
            let text = r.render(format);
            if let Err(e) = emit(&cli.out, &text, out) {
                let _ = writeln!(err, "error: {e}");
                return 1;
            }
            if r.passed() {
                0
            } else {
                1
            }
        }
        Ok(Outcome::Text(t)) => match emit(&cli.out, &t, out) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                1
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parse { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse { line: 0, column: 0, message: format!("{}: {e}", path.display()) })
}

fn load(input: &str) -> Result<Document> {
    match input.strip_prefix("corpus:") {
        Some(name) => ix::entry_document(&builtin(name)?),
        None => ix::parse(&read(Path::new(input))?),
    }
}

fn wrong_kind(doc: &Document, want: &str) -> Error {
    Error::Parse { line: 0, column: 0, message: format!("expected a {want} document, found {}", doc.kind()) }
}

fn export(cli: &Cli, doc: &Document) -> Result<()> {
    if let Some(p) = &cli.export {
        fs::write(p, ix::render(doc))
            .map_err(|e| Error::Structural(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(())
}

fn measure(cli: &Cli, product: &ZsProductBundle) -> Result<UnitMeasure> {
    let g = product.zs().pair.g();
    if cli.mu == "uniform" {
        return Ok(UnitMeasure::uniform(g.n_units()));
    }
    match ix::parse(&read(Path::new(&cli.mu))?)? {
        Document::Measure(m) => ix::build_measure(g, &m.weights),
        other => Err(wrong_kind(&other, "measure")),
    }
}

fn fell_options(cli: &Cli) -> FellOptions {
    FellOptions { tol: cli.tol, seed: cli.seed, ..FellOptions::default() }
}

fn as_dyn(p: &Arc<ZsProductBundle>) -> Arc<dyn FellBundle> {
    p.clone()
}

fn action_of(doc: Document) -> Result<ix::ActionDoc> {
    match doc {
        Document::Action(a) => Ok(a),
        other => Err(wrong_kind(&other, "action")),
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = cli.tol;
    let report = match &cli.command {
        Command::Validate { file } => validate(cli, load(file)?)?,
        Command::ZsGroupoid { pair } => {
            let p = match load(pair)? {
                Document::MatchedPair(p) => ix::build_pair(&p)?,
                Document::Action(a) => ix::build_pair(&a.pair)?,
                other => return Err(wrong_kind(&other, "matched_pair")),
            };
            let mut r = check_matched_pair(&p);
            if r.passed() {
                let zs = zs_groupoid(&p)?;
                r.absorb("K", validate_groupoid(&zs.groupoid));
                r.metric("zs_arrows", zs.groupoid.n_arrows());
                export(cli, &Document::Groupoid(ix::groupoid_doc(&zs.groupoid)))?;
            }
            r
        }
        Command::ZsBundle { action } => {
            let product = ix::build_product(&action_of(load(action)?)?, tol)?;
            let mut r = validate_fell_bundle(product.as_ref(), &fell_options(cli));
            r.metric("zs_arrows", product.groupoid().n_arrows());
            r
        }
        Command::Norms { section } => {
            let Document::Section(d) = load(section)? else {
                return Err(Error::Parse { line: 0, column: 0, message: "expected a section document".into() });
            };
            let (_, s) = ix::build_section(&d, tol)?;
            norms(&s)?
        }
        Command::Blend { action } => {
            let product = ix::build_product(&action_of(load(action)?)?, tol)?;
            let h_line: Arc<dyn FellBundle> = Arc::new(line_bundle(product.zs().pair.h()));
            let b = blend_rank(&product, h_line)?;
            let mut r = ValidationReport::new("blend of i and j");
            let mut c = Check::exact("BLEND");
            c.holds(b.rank_ij == b.full_dim, || format!("rank(i.j) = {}", b.rank_ij));
            c.holds(b.rank_ji == b.full_dim, || format!("rank(j.i) = {}", b.rank_ji));
            r.push(c);
            r.metric("rank", b.rank_ij);
            r.metric("rank_ji", b.rank_ji);
            r.metric("dim", b.full_dim);
            r.metric("rank_i", b.rank_i);
            r.metric("rank_j", b.rank_j);
            r
        }
        Command::Integrate { rep, section } => {
            let Document::CovariantRep(rd) = load(rep)? else {
                return Err(Error::Parse { line: 0, column: 0, message: "expected a covariant_rep document".into() });
            };
            let Document::Section(sd) = load(section)? else {
                return Err(Error::Parse { line: 0, column: 0, message: "expected a section document".into() });
            };
            if sd.space != Space::Product || sd.action != rd.action {
                return Err(Error::Structural(
                    "the section must live on the product bundle of the representation's action".into(),
                ));
            }
            let (product, cov) = ix::build_covariant(&rd, tol)?;
            let s = ix::build_values(as_dyn(&product), &sd.values)?;
            let mut r = validate_covariant_rep(&cov, product.action(), tol);
            r.absorb("", check_integrated_form(&cov, &product, &[s.clone(), s.clone()], tol, NORM_TOL)?);
            let l = integrate(&cov, &product, &s)?;
            r.metric_real("operator_norm", l.norm());
            r.metric_real("i_norm", i_norm(&s));
            export(cli, &Document::Operator(ix::operator_doc(product.zs().pair.g(), &l)))?;
            r
        }
        Command::Disintegrate { rep } => {
            let Document::StrictRep(d) = load(rep)? else {
                return Err(Error::Parse { line: 0, column: 0, message: "expected a strict_rep document".into() });
            };
            if d.space != Space::Product {
                return Err(Error::Structural("disintegrate needs a representation of the product bundle".into()));
            }
            let (product, psi) = ix::build_strict_rep(&d, tol)?;
            let mu = measure(cli, &product)?;
            let cov = disintegrate(&psi, &product, mu.clone())?;
            let mut r = validate_strict_rep(&psi, tol, "PSI");
            r.absorb("", validate_covariant_rep(&cov, product.action(), tol));
            r.push(round_trip(&product, &psi, &cov, &mu, tol)?);
            export(cli, &Document::CovariantRep(ix::covariant_doc(product.action(), &cov)?))?;
            r
        }
        Command::Amplify { rep } => {
            let (product, pi) = match load(rep)? {
                Document::StrictRep(d) if d.space == Space::Base => ix::build_strict_rep(&d, tol)?,
                Document::StrictRep(_) => {
                    return Err(Error::Structural("amplify needs a representation of the base bundle".into()))
                }
                // no representation given: use the regular one of the base
                Document::Action(a) => {
                    let product = ix::build_product(&a, tol)?;
                    let pi = regular_strict_rep(product.base().clone())?;
                    (product, pi)
                }
                other => return Err(wrong_kind(&other, "strict_rep")),
            };
            let amp = twisted_amplification(product.action(), &pi)?;
            let r = validate_covariant_rep(&amp, product.action(), tol);
            export(cli, &Document::CovariantRep(ix::covariant_doc(product.action(), &amp)?))?;
            r
        }
        Command::Inject { section, samples } => {
            let (product, mut secs) = match load(section)? {
                Document::Section(d) if d.space == Space::Base => {
                    let (product, s) = ix::build_section(&d, tol)?;
                    (product, vec![s])
                }
                Document::Section(_) => {
                    return Err(Error::Structural("inject needs a section of the base bundle".into()))
                }
                // sampled sections only
                Document::Action(a) => (ix::build_product(&a, tol)?, Vec::new()),
                other => return Err(wrong_kind(&other, "section")),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            for _ in 0..*samples {
                secs.push(Section::random(product.base().clone(), &mut rng));
            }
            injectivity_check(&product, &secs, tol, NORM_TOL)?
        }
        Command::Corpus { name } => {
            let entry = corpus_entry(name, cli.seed)?;
            return Ok(Outcome::Text(ix::render(&ix::entry_document(&entry)?)));
        }
        Command::Oracle { file } => {
            let doc = load(file)?;
            let entry = entry_of(file, doc, tol)?;
            oracle_scan(&entry)
        }
    };
    Ok(Outcome::Report(report))
}

fn corpus_entry(name: &str, seed: u64) -> Result<CorpusEntry> {
    match name.strip_prefix("random_") {
        Some(kind) => random_instance(kind.parse::<RandomKind>()?, seed),
        None => builtin(name),
    }
}

fn entry_of(name: &str, doc: Document, tol: f64) -> Result<CorpusEntry> {
    let payload = match doc {
        Document::MatchedPair(p) => Payload::Pair(ix::build_pair(&p)?),
        Document::Action(a) => Payload::Action(ix::build_action(&a)?),
        Document::UnitaryFamily(f) => Payload::Family(ix::build_family(&f)?),
        Document::Section(s) => {
            let (product, section) = ix::build_section(&s, tol)?;
            Payload::Section { product, section }
        }
        Document::StrictRep(s) => {
            let (product, rep) = ix::build_strict_rep(&s, tol)?;
            Payload::StrictRep { product, rep }
        }
        other => return Err(Error::Unsupported(format!("no oracle for {} documents", other.kind()))),
    };
    Ok(CorpusEntry { name: name.to_string(), payload, notes: Vec::new() })
}

fn validate(cli: &Cli, doc: Document) -> Result<ValidationReport> {
    let tol = cli.tol;
    Ok(match doc {
        Document::Groupoid(g) => validate_groupoid(&ix::build_groupoid(&g)?),
        Document::MatchedPair(p) => check_matched_pair(&ix::build_pair(&p)?),
        Document::Bundle(b) => validate_fell_bundle(&ix::build_bundle(&b)?, &fell_options(cli)),
        Document::Action(a) => validate_action(&ix::build_action(&a)?, tol, cli.seed),
        Document::UnitaryFamily(f) => {
            let fam = ix::build_family(&f)?;
            let mut r = validate_unitary_family(&fam, tol);
            if r.passed() {
                let (_, action) = action_from_unitary_family(&fam, tol)?;
                let product = ZsProductBundle::new(action, tol)?;
                r.absorb("THETA", theta_iso(&fam, &product, tol, cli.seed));
            }
            r
        }
        Document::Section(s) => {
            let (_, sec) = ix::build_section(&s, tol)?;
            let mut r = ValidationReport::new("section");
            r.metric("arrows", sec.coeffs().len());
            r.metric_real("i_norm", i_norm(&sec));
            r
        }
        Document::StrictRep(s) => {
            let (_, rep) = ix::build_strict_rep(&s, tol)?;
            validate_strict_rep(&rep, tol, "PSI")
        }
        Document::CovariantRep(c) => {
            let (product, rep) = ix::build_covariant(&c, tol)?;
            validate_covariant_rep(&rep, product.action(), tol)
        }
        Document::Measure(m) => {
            let mut r = ValidationReport::new("measure");
            let mut c = Check::exact("MU.POSITIVE");
            for (u, w) in &m.weights {
                let w = ix::parse_real(w)?;
                c.holds(w > 0.0 && w.is_finite(), || u.clone());
            }
            r.push(c);
            r
        }
        Document::Operator(o) => {
            let n: usize = o.dims.values().sum();
            let mut r = ValidationReport::new("operator");
            let mut c = Check::exact("OP.SHAPE");
            c.holds(o.matrix.len() == n && o.matrix.iter().all(|row| row.len() == n), || {
                format!("expected {n}x{n}")
            });
            r.push(c);
            r
        }
    })
}

fn norms(s: &Section) -> Result<ValidationReport> {
    let mut r = ValidationReport::new(format!("norms of a section of ({})", s.bundle().describe()));
    let n = cstar_norm(s)?;
    let inn = i_norm(s);
    let mut order = Check::within("NORM.ORDER", NORM_TOL);
    order.observe((n - inn).max(0.0) / inn.max(1.0), || "cstar > I".into());
    let mut ident = Check::within("CSTAR.IDENTITY", NORM_TOL);
    let ss = cstar_norm(&convolve(&star_section(s), s)?)?;
    ident.observe((ss - n * n).abs() / (n * n).max(1.0), || "|s*s| != |s|^2".into());
    r.push(order);
    r.push(ident);
    r.metric_real("cstar_norm", n);
    r.metric_real("i_norm", inn);
    r.metric_real("i_norm_r", i_norm_r(s));
    r.metric_real("i_norm_s", i_norm_s(s));
    r.note("C*-norm of the trace representation; full and reduced norms are assumed equal");
    Ok(r)
}

/// `integrate(disintegrate(ψ))` against direct integration on every basis
/// section.
fn round_trip(
    product: &Arc<ZsProductBundle>,
    psi: &zsfell::rep::StrictRep,
    cov: &zsfell::rep::CovariantRep,
    mu: &UnitMeasure,
    tol: f64,
) -> Result<zsfell::report::Check> {
    let mut c = Check::within("ROUNDTRIP", tol);
    let k = product.groupoid();
    for e in k.arrow_ids() {
        for i in 0..product.fiber_dim(e) {
            let mut v = zsfell::linalg::CVec::zeros(product.fiber_dim(e));
            v[i] = zsfell::linalg::ONE;
            let s = Section::delta(as_dyn(product), e, v);
            let a = integrate(cov, product, &s)?;
            let b = integrate_strict(psi, mu, &s)?;
            c.observe((a.mat - b.mat).norm(), || format!("{}[{}]", k.label(e), i));
        }
    }
    Ok(c)
}
