//! `ezop`: batch front end for the operad, transfer, Čech and conformal checks.
//!
//! Every run produces a [`RunReport`]; the exit status is 0 when all checks pass, 1 when
//! some check fails and 2 when the input cannot be used.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ezop::cech::{CechAlgebra, Fiber, FiberKind, IssueKind, NerveSheaf};
use ezop::conformal::{
    borcherds_sweep, check_conformal_jacobi, check_skew, secondary_check, ConformalAlgebra, DgProducts, Homog, IdentityReport, SecondaryKind,
    SecondaryOps, SecondaryTable, Witness, ZeroOps,
};
use ezop::cosimp::{hom_from_z, moore, yoneda_identification, CosimplicialModule, Degree0, Truncation};
use ezop::input::{parse_ops, read_input, write_ops, Input};
use ezop::operad::{augment, aw_cocycle, check_concentration, lie_dim, y_permute, JacobiForm, LieElement};
use ezop::report::{Check, RunReport, StructureCertificate};
use ezop::transfer::{check_homotopy_jacobi, cohomology_algebra, AlgebraType, TransferredDg, TransferredStructure};
use ezop::{q, Error};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "ezop", version, about = "Exact Eilenberg-Zilber operad computations and identity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Report format on stdout and in --out.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Also write the report to this file (defaults to a file under $EZOP_OUT_DIR when set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time in the report (makes the output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Eilenberg-Zilber and Lie operads.
    #[command(subcommand)]
    Operad(OperadCmd),
    /// Transfer of brackets along the Eilenberg-Zilber operad.
    #[command(subcommand)]
    Transfer(TransferCmd),
    /// Čech covers.
    #[command(subcommand)]
    Cech(CechCmd),
    /// Conformal and vertex algebras.
    #[command(subcommand)]
    Conformal(ConformalCmd),
}

#[derive(Subcommand)]
enum OperadCmd {
    /// Cohomology of the arity-n component in a window of degrees.
    Concentration {
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        max_degree: usize,
        /// Degrees LO:HI, inside [2 - max_degree, 0].
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: (i64, i64),
    },
    /// Dimension of the arity-n Lie operad component.
    LieDim {
        #[arg(long)]
        arity: usize,
    },
    /// Compares Hom(Z, A) with the Moore complex on random truncated modules.
    KeyLemma {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_degree: usize,
        #[arg(long, default_value_t = 4)]
        max_dim: usize,
    },
    /// Checks the bracket cocycle and prints it as a certificate.
    Cocycle {
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Subcommand)]
enum TransferCmd {
    /// Transferred bracket or product on the cohomology of a cover.
    Bracket {
        #[command(flatten)]
        common: TransferArgs,
        /// Recompute at truncation D + 1 and compare.
        #[arg(long)]
        stability: bool,
    },
    /// Homotopy Jacobi identity for the transferred bracket.
    Jacobi {
        #[command(flatten)]
        common: TransferArgs,
        #[arg(long, value_enum, default_value_t = FormArg::Cyclic)]
        form: FormArg,
        /// Reuse c, j, j' from a previous JSON report instead of constructing them.
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
}

#[derive(Args)]
struct TransferArgs {
    #[arg(long)]
    input: PathBuf,
    /// Truncation D; results are reported in degrees up to D - 2.
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Cyclic,
    Derivation,
}

impl From<FormArg> for JacobiForm {
    fn from(f: FormArg) -> Self {
        match f {
            FormArg::Cyclic => JacobiForm::Cyclic,
            FormArg::Derivation => JacobiForm::Derivation,
        }
    }
}

#[derive(Subcommand)]
enum CechCmd {
    /// Completeness, functoriality, morphism and axiom checks for a cover.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Skew,
    Jacobi,
    Borcherds,
}

#[derive(Subcommand)]
enum ConformalCmd {
    /// Skew symmetry, the commutator formula or the Borcherds identity.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        /// Index bounds: M:N for jacobi (0..=M, 0..=N), P:Q:R for borcherds (|p| <= P, ...).
        #[arg(long, value_parser = parse_range)]
        range: Option<Range>,
    },
    /// Secondary identities for a dg algebra or for the transferred structure of a cover.
    Secondary {
        #[arg(long)]
        input: PathBuf,
        /// Secondary operations table (as written by --emit-ops).
        #[arg(long, conflicts_with = "derive", required_unless_present = "derive")]
        ops: Option<PathBuf>,
        /// Use the operations produced by transfer (zero for a single algebra).
        #[arg(long)]
        derive: bool,
        /// Truncation used for covers.
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
        /// Conformal index bounds M:N.
        #[arg(long, value_parser = parse_range)]
        range: Option<Range>,
        /// Vertex index grid, e.g. "0,0,0;-1,0,-1".
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// Write the operations that were checked to this file.
        #[arg(long)]
        emit_ops: Option<PathBuf>,
    },
    /// Generating-function vs coefficient forms of Jacobi on random finite structures.
    Sweep {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        generators: usize,
        #[arg(long, default_value_t = 3)]
        locality: u32,
    },
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or("expected LO:HI")?;
    Ok((a.trim().parse().map_err(|_| "bad LO")?, b.trim().parse().map_err(|_| "bad HI")?))
}

/// Colon-separated index bounds.
#[derive(Clone, Debug)]
struct Range(Vec<i64>);

fn parse_range(s: &str) -> Result<Range, String> {
    s.split(':').map(|x| x.trim().parse::<i64>().map_err(|_| format!("bad range component `{x}`"))).collect::<Result<_, _>>().map(Range)
}

fn parse_grid(s: &str) -> Result<Vec<(i64, i64, i64)>, Error> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let v: Vec<i64> = t.split(',').map(|x| x.trim().parse::<i64>()).collect::<Result<_, _>>().map_err(|_| Error::Input(format!("bad grid point `{t}`")))?;
            match v.as_slice() {
                [p, q, r] => Ok((*p, *q, *r)),
                _ => Err(Error::Input(format!("grid point `{t}` needs three indices"))),
            }
        })
        .collect()
}

const DEFAULT_GRID: [(i64, i64, i64); 7] = [(0, 0, 0), (-1, 0, -1), (0, -1, -1), (-1, -1, -1), (1, -2, 0), (-2, 1, -1), (0, 0, -2)];

fn witnesses(ws: &[Witness]) -> Vec<String> {
    ws.iter().map(|w| format!("inputs ({}) at {:?}: residual {}", w.inputs.join(", "), w.indices, w.residual)).collect()
}

fn identity_check(r: &IdentityReport) -> Check {
    Check::new(r.identity.clone(), r.checked, witnesses(&r.failures))
}

fn sheaf_of(path: &Path) -> ezop::Result<NerveSheaf> {
    match read_input(path)? {
        Input::Sheaf(s) => Ok(s),
        Input::Algebra(f) => Ok(NerveSheaf::single(f)),
    }
}

fn valid_cech(sheaf: NerveSheaf, levels: usize) -> ezop::Result<CechAlgebra> {
    if let Some(issue) = sheaf.validate().first() {
        return Err(Error::Invariant(format!("cover is not valid: {}: {}", issue.subject, issue.message)));
    }
    CechAlgebra::new(sheaf, levels)
}

fn window_for(d: usize) -> Option<(i64, i64)> {
    Some((0, d as i64 - 2))
}

fn run(cmd: Command, g: &Global) -> ezop::Result<RunReport> {
    match cmd {
        Command::Operad(c) => operad(c, g),
        Command::Transfer(c) => transfer(c),
        Command::Cech(CechCmd::Validate { input }) => cech_validate(&input),
        Command::Conformal(c) => conformal(c, g),
    }
}

fn operad(cmd: OperadCmd, g: &Global) -> ezop::Result<RunReport> {
    match cmd {
        OperadCmd::Concentration { arity, max_degree, window } => {
            let mut r = RunReport::new("operad concentration");
            r.arg("arity", arity).arg("window", format!("{}:{}", window.0, window.1));
            r.truncation = Some(max_degree);
            r.stable_window = Some((2 - max_degree as i64, 0));
            let rep = check_concentration(arity, max_degree, window)?;
            let bad: Vec<String> =
                rep.ranks.iter().filter(|&&(d, k)| k != usize::from(d == 0)).map(|(d, k)| format!("rank {k} in degree {d}")).collect();
            r.value("ranks", rep.ranks.iter().map(|x| x.1).collect::<Vec<_>>());
            r.value("degrees", rep.ranks.iter().map(|x| x.0).collect::<Vec<_>>());
            r.value("levels", rep.levels);
            r.push(Check::new("cohomology is k in degree 0 and zero elsewhere", rep.ranks.len(), bad));
            Ok(r)
        }
        OperadCmd::LieDim { arity } => {
            let mut r = RunReport::new("operad lie-dim");
            r.arg("arity", arity);
            let d = lie_dim(arity)?;
            let expected: usize = (1..arity).product();
            r.value("dimension", d);
            r.push(Check::flag("dimension equals (n-1)!", d == expected, format!("rank {d}, expected {expected}")));
            Ok(r)
        }
        OperadCmd::KeyLemma { count, max_degree, max_dim } => {
            let mut r = RunReport::new("operad key-lemma");
            r.arg("count", count).arg("max_dim", max_dim);
            r.truncation = Some(max_degree);
            r.seed = Some(g.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let mut bad = Vec::new();
            for k in 0..count {
                let a = CosimplicialModule::random_small(&mut rng, max_degree, max_dim);
                let h = hom_from_z(&Degree0(&a), Truncation::new(max_degree, 0))?.complex;
                let m = moore(&a)?;
                let y = yoneda_identification(&a);
                for p in 0..=max_degree {
                    if h.dim(p as i64) != m.dim(p as i64) {
                        bad.push(format!("module {k} {:?}: dimension in degree {p}", a.dims()));
                    } else if p < max_degree && m.d(p as i64).mul(&y[p])? != y[p + 1].mul(&h.d(p as i64))? {
                        bad.push(format!("module {k} {:?}: differential in degree {p}", a.dims()));
                    }
                }
            }
            r.push(Check::new("Hom(Z, A) equals the Moore complex under the Yoneda identification", count, bad));
            Ok(r)
        }
        OperadCmd::Cocycle { levels } => {
            let mut r = RunReport::new("operad cocycle");
            r.truncation = Some(levels);
            let c = aw_cocycle(levels);
            r.push(Check::flag("d c = 0", c.diff().is_zero(), format!("{} nonzero terms in d c", c.diff().len())));
            let eps = augment(&c)?;
            r.push(Check::flag("augmentation of c is [e1, e2]", eps == LieElement::bracket_of_letters(), format!("{eps:?}")));
            let t = y_permute(&c, &[1, 0])?;
            r.push(Check::flag("transposition acts on c by -1", t == c.scaled(&q(-1)), "τ·c ≠ -c"));
            r.value("terms", c.len());
            r.value("c", ezop::report::SerializedOp::from_element(&c));
            Ok(r)
        }
    }
}

fn transfer(cmd: TransferCmd) -> ezop::Result<RunReport> {
    match cmd {
        TransferCmd::Bracket { common, stability } => {
            let d = common.max_degree;
            let sheaf = sheaf_of(&common.input)?;
            let alg = match sheaf.kind {
                FiberKind::Lie => AlgebraType::Lie,
                FiberKind::Commutative => AlgebraType::Commutative,
                k => return Err(Error::Input(format!("transfer bracket needs a lie or commutative cover, got {k:?}; use `conformal secondary`"))),
            };
            if d < 2 {
                return Err(Error::Truncation("max degree must be at least 2".into()));
            }
            let mut r = RunReport::new("transfer bracket");
            r.arg("input", common.input.display());
            r.truncation = Some(d);
            r.stable_window = window_for(d);
            let b = valid_cech(sheaf.clone(), d)?;
            let h = cohomology_algebra(&b, alg, d - 2)?;
            r.value("ranks", &h.ranks);
            r.push(Check::flag("operation descends to cohomology", h.well_defined, h.witnesses.join("; ")));
            let name = if alg == AlgebraType::Lie { "graded skew symmetry and Jacobi on cohomology" } else { "graded commutativity and associativity on cohomology" };
            r.push(Check::new(name, h.constants.len(), if h.identities_hold { vec![] } else { h.witnesses.clone() }));
            if stability {
                let b1 = valid_cech(sheaf, d + 1)?;
                let h1 = cohomology_algebra(&b1, alg, d - 2)?;
                let mut bad = Vec::new();
                if h1.ranks != h.ranks {
                    bad.push(format!("ranks {:?} at D + 1", h1.ranks));
                }
                if h1.constants != h.constants {
                    bad.push("structure constants change at D + 1".into());
                }
                r.push(Check::new("ranks and structure constants unchanged at D + 1", h.ranks.len() + h.constants.len(), bad));
            }
            r.certificates.constants = h.constants;
            Ok(r)
        }
        TransferCmd::Jacobi { common, form, certificate } => {
            let d = common.max_degree;
            let sheaf = sheaf_of(&common.input)?;
            if sheaf.kind != FiberKind::Lie {
                return Err(Error::Input(format!("transfer jacobi needs a lie cover, got {:?}", sheaf.kind)));
            }
            if d < 2 {
                return Err(Error::Truncation("max degree must be at least 2".into()));
            }
            let mut r = RunReport::new("transfer jacobi");
            r.arg("input", common.input.display());
            r.truncation = Some(d);
            r.stable_window = window_for(d);
            let ts = match &certificate {
                Some(path) => {
                    r.arg("certificate", path.display());
                    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
                    let old = RunReport::from_json(&text)?;
                    let cert = old.certificates.structure.ok_or_else(|| Error::Input(format!("{} carries no structure certificate", path.display())))?;
                    cert.load()?
                }
                None => TransferredStructure::new(d, form.into())?,
            };
            r.arg("form", format!("{:?}", ts.form).to_lowercase());
            if ts.levels < d {
                return Err(Error::Truncation(format!("certificate covers {} levels, {d} requested", ts.levels)));
            }
            let cert = ts.certificate();
            r.push(Check::flag("d c = 0", cert.dc_zero, "bracket cocycle is not closed"));
            r.push(Check::flag("d j = 0", cert.dj_zero, "jacobiator is not closed"));
            r.push(Check::flag("augmentation of j is 0", cert.augmentation_of_j_zero, "jacobiator augments to a nonzero element"));
            r.push(Check::flag("d j' = j", cert.solve_verified, "homotopy does not bound the jacobiator"));
            let b = valid_cech(sheaf, d)?;
            let rep = check_homotopy_jacobi(&b, &ts, d - 2)?;
            r.push(Check::new("F(j) is the Jacobi combination of the transferred bracket", rep.triples, witnesses(&rep.jacobiator_failures)));
            r.push(Check::new("d J' + J' d equals the Jacobi combination", rep.triples, witnesses(&rep.homotopy_failures)));
            r.certificates.summary = Some(cert);
            r.certificates.structure = Some(StructureCertificate::new(&ts));
            Ok(r)
        }
    }
}

fn cech_validate(input: &Path) -> ezop::Result<RunReport> {
    let sheaf = sheaf_of(input)?;
    let mut r = RunReport::new("cech validate");
    r.arg("input", input.display());
    r.value("opens", &sheaf.opens);
    let issues = sheaf.validate();
    for (kind, name) in [
        (IssueKind::Completeness, "every intersection has a fiber and every inclusion a restriction"),
        (IssueKind::Shape, "fibers and restrictions have matching kinds and shapes"),
        (IssueKind::Axioms, "fibers satisfy their axioms"),
        (IssueKind::Morphism, "restrictions preserve the operations"),
        (IssueKind::Functoriality, "restrictions compose"),
    ] {
        let ws: Vec<String> = issues.iter().filter(|i| i.check == kind).map(|i| format!("{}: {}", i.subject, i.message)).collect();
        r.push(Check::new(name, 1, ws));
    }
    if issues.is_empty() {
        let b = CechAlgebra::new(sheaf, 2)?;
        r.value("level_dims", (0..=2).map(|p| ezop::transfer::CosimplicialAlgebra::dim(&b, p)).collect::<Vec<_>>());
    }
    Ok(r)
}

fn conformal(cmd: ConformalCmd, g: &Global) -> ezop::Result<RunReport> {
    match cmd {
        ConformalCmd::Check { input, which, range } => {
            let fiber = match read_input(&input)? {
                Input::Algebra(f) => f,
                Input::Sheaf(_) => return Err(Error::Input("conformal check takes a single algebra, not a cover".into())),
            };
            let mut r = RunReport::new("conformal check");
            r.arg("input", input.display()).arg("which", ["skew", "jacobi", "borcherds"][which as usize]);
            match (which, fiber) {
                (Which::Skew, Fiber::Conformal(v)) => {
                    let s = check_skew(&v);
                    r.push(identity_check(&s.polyop));
                    r.push(identity_check(&s.derived));
                    r.value("derived_formula", &s.derived_formula);
                    r.value("alternate_formula_holds", s.alternate.pass());
                }
                (Which::Jacobi, Fiber::Conformal(v)) => {
                    let (m, n) = match range.as_ref().map(|r| r.0.as_slice()) {
                        None => (4, 4),
                        Some([m, n]) if *m >= 0 && *n >= 0 => (*m as u32, *n as u32),
                        Some(_) => return Err(Error::Input("--range for jacobi is M:N with M, N >= 0".into())),
                    };
                    r.arg("range", format!("{m}:{n}"));
                    let j = check_conformal_jacobi(&v, m, n);
                    r.push(identity_check(&j.coefficients));
                    r.push(Check::new("generating function matches every coefficient", j.coefficients.checked, witnesses(&j.disagreements)));
                }
                (Which::Borcherds, Fiber::Vertex(w)) => {
                    let (p, q_, rr) = match range.as_ref().map(|r| r.0.as_slice()) {
                        None => (3, 3, 3),
                        Some([p, q_, rr]) if *p >= 0 && *q_ >= 0 && *rr >= 0 => (*p, *q_, *rr),
                        Some(_) => return Err(Error::Input("--range for borcherds is P:Q:R with P, Q, R >= 0".into())),
                    };
                    r.arg("range", format!("{p}:{q_}:{rr}"));
                    let rep = borcherds_sweep(&w, (p, q_, rr))?;
                    r.push(identity_check(&rep.corrected));
                    r.value("alternate_last_sum_holds", rep.alternate.pass());
                }
                (Which::Borcherds, _) => return Err(Error::Input("borcherds needs a vertex algebra input".into())),
                (_, _) => return Err(Error::Input("skew and jacobi need a conformal algebra input".into())),
            }
            Ok(r)
        }
        ConformalCmd::Secondary { input, ops, derive, max_degree, range, grid, emit_ops } => {
            let mut r = RunReport::new("conformal secondary");
            r.arg("input", input.display());
            let table = match &ops {
                Some(p) => {
                    r.arg("ops", p.display());
                    let text = std::fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
                    Some(parse_ops(&text, &p.display().to_string())?)
                }
                None => {
                    r.arg("ops", "derived");
                    None
                }
            };
            let _ = derive;
            let conformal_kind = |range: &Option<Range>| -> ezop::Result<SecondaryKind> {
                match range.as_ref().map(|r| r.0.as_slice()) {
                    None => Ok(SecondaryKind::Conformal { max_m: 3, max_n: 3 }),
                    Some([m, n]) if *m >= 0 && *n >= 0 => Ok(SecondaryKind::Conformal { max_m: *m as u32, max_n: *n as u32 }),
                    Some(_) => Err(Error::Input("--range is M:N with M, N >= 0".into())),
                }
            };
            let vertex_kind = |grid: &Option<String>| -> ezop::Result<SecondaryKind> {
                Ok(SecondaryKind::Vertex { grid: match grid { Some(s) => parse_grid(s)?, None => DEFAULT_GRID.to_vec() } })
            };
            match read_input(&input)? {
                Input::Sheaf(sheaf) => {
                    let chiral = match sheaf.kind {
                        FiberKind::Conformal => false,
                        FiberKind::Vertex => true,
                        k => return Err(Error::Input(format!("secondary identities need a conformal or vertex cover, got {k:?}"))),
                    };
                    if max_degree < 3 {
                        return Err(Error::Truncation("covers need max degree at least 3".into()));
                    }
                    r.truncation = Some(max_degree);
                    let support = sheaf.support();
                    let b = valid_cech(sheaf, max_degree)?;
                    let ts = TransferredStructure::new(max_degree, JacobiForm::Derivation)?;
                    let x = TransferredDg { b: &b, ts: &ts, chiral, max_level: max_degree - 2, support };
                    let kind = if chiral { vertex_kind(&grid)? } else { conformal_kind(&range)? };
                    r.push(derivation_check(&x, max_degree as i64 - 1));
                    let s: &dyn SecondaryOps = match &table {
                        Some(t) => t,
                        None => &x,
                    };
                    finish_secondary(&mut r, &x, s, &kind, max_degree as i64 - 2, emit_ops.as_deref())?;
                }
                Input::Algebra(f) => {
                    let (x, chiral): (Box<dyn DgProducts>, bool) = match f {
                        Fiber::Conformal(v) => (Box::new(v), false),
                        Fiber::Vertex(w) => (Box::new(w), true),
                        _ => return Err(Error::Input("secondary identities need a conformal or vertex algebra".into())),
                    };
                    let kind = if chiral { vertex_kind(&grid)? } else { conformal_kind(&range)? };
                    // every triple of generators is checked
                    let max_total = x.test_basis().iter().map(|h| 3 * h.degree.abs()).max().unwrap_or(0);
                    r.push(derivation_check(x.as_ref(), i64::MAX / 2));
                    let zero = ZeroOps;
                    let s: &dyn SecondaryOps = match &table {
                        Some(t) => t,
                        None => &zero,
                    };
                    finish_secondary(&mut r, x.as_ref(), s, &kind, max_total, emit_ops.as_deref())?;
                }
            }
            Ok(r)
        }
        ConformalCmd::Sweep { count, generators, locality } => {
            let mut r = RunReport::new("conformal sweep");
            r.arg("count", count).arg("generators", generators).arg("locality", locality);
            r.seed = Some(g.seed);
            let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
            let mut bad = Vec::new();
            let mut jacobi = 0;
            for k in 0..count {
                let v = ConformalAlgebra::random(&mut rng, generators.max(1), locality, k % 3 == 0, k % 2 == 0);
                let c = check_conformal_jacobi(&v, locality, locality);
                if !c.generating_function_agrees {
                    bad.extend(witnesses(&c.disagreements).into_iter().map(|w| format!("structure {k}: {w}")));
                }
                jacobi += usize::from(c.coefficients.pass());
            }
            r.value("structures_satisfying_jacobi", jacobi);
            r.push(Check::new("generating-function and coefficient forms of Jacobi agree", count, bad));
            Ok(r)
        }
    }
}

/// `d(x_(n)y) = (dx)_(n)y + (-1)^{|x|} x_(n)(dy)` on test elements whose products stay at or
/// below `max_degree`.
fn derivation_check(x: &dyn DgProducts, max_degree: i64) -> Check {
    let basis = x.test_basis();
    let (lo, hi) = x.support();
    let mut bad = Vec::new();
    let mut checked = 0;
    for a in &basis {
        for b in &basis {
            if a.degree + b.degree + 1 > max_degree {
                continue;
            }
            for n in lo..hi {
                checked += 1;
                let lhs = x.d(&x.product(a, b, n)).vec;
                let mut rhs = x.product(&x.d(a), b, n).vec;
                rhs.add_scaled(&x.product(a, &x.d(b), n).vec, &ezop::exactlin::sign(a.degree));
                if lhs != rhs {
                    bad.push(format!("d is not a derivation of {}_({n}){}", x.name(a), x.name(b)));
                }
            }
        }
    }
    Check::new("d is a derivation of the products", checked, bad)
}

fn finish_secondary(
    r: &mut RunReport,
    x: &dyn DgProducts,
    s: &dyn SecondaryOps,
    kind: &SecondaryKind,
    max_total: i64,
    emit: Option<&Path>,
) -> ezop::Result<()> {
    let rep = secondary_check(x, s, kind, max_total)?;
    r.push(identity_check(&rep));
    if let Some(path) = emit {
        let table = tabulate(x, s, kind, max_total)?;
        std::fs::write(path, write_ops(&table)?).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Records `S` on every basis triple (and its differentials) the check touches.
fn tabulate(x: &dyn DgProducts, s: &dyn SecondaryOps, kind: &SecondaryKind, max_total: i64) -> ezop::Result<SecondaryTable> {
    let mut basis = x.test_basis();
    let extra: Vec<Homog> = basis
        .iter()
        .flat_map(|h| {
            let d = x.d(h);
            d.vec.keys().map(|&i| Homog::new(d.degree, ezop::SparseVec::basis(i))).collect::<Vec<_>>()
        })
        .collect();
    for h in extra {
        if !basis.contains(&h) {
            basis.push(h);
        }
    }
    let indices: Vec<Vec<i64>> = match kind {
        SecondaryKind::Conformal { max_m, max_n } => (0..=*max_m as i64).flat_map(|m| (0..=*max_n as i64).map(move |n| vec![m, n])).collect(),
        SecondaryKind::Vertex { grid } => grid.iter().map(|&(p, q_, r)| vec![p, q_, r]).collect(),
    };
    let key = |h: &Homog| (h.degree, *h.vec.keys().next().expect("basis element"));
    let mut t = SecondaryTable::default();
    for a in &basis {
        for b in &basis {
            for c in &basis {
                if a.degree + b.degree + c.degree > max_total + 1 {
                    continue;
                }
                for idx in &indices {
                    let v = s.eval(a, b, c, idx)?.vec;
                    if !v.is_zero() {
                        t.entries.insert((key(a), key(b), key(c), idx.clone()), v);
                    }
                }
            }
        }
    }
    Ok(t)
}

fn emit(report: &RunReport, g: &Global) -> std::io::Result<()> {
    let text = match g.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    let target = match &g.out {
        Some(p) => Some(p.clone()),
        None => std::env::var_os("EZOP_OUT_DIR").map(|dir| {
            let ext = if g.format == Format::Json { "json" } else { "txt" };
            PathBuf::from(dir).join(format!("{}.{ext}", report.command.replace(' ', "-")))
        }),
    };
    if let Some(path) = target {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &text)?;
    }
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(cli.command, &cli.global) {
        Ok(mut report) => {
            if cli.global.timing {
                report.timing_ms = Some(start.elapsed().as_millis() as u64);
            }
            if let Err(e) = emit(&report, &cli.global) {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(2);
            }
            if report.pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
