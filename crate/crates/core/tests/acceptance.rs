//! Acceptance suite: one line per criterion, nonzero exit status if any fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ezop::cech::examples::*;
use ezop::cech::{BilinearTable, CechAlgebra, Fiber, FiberKind, NerveSheaf};
use ezop::conformal::{borcherds_sweep, check_conformal_jacobi, check_skew, secondary_check, ConformalAlgebra, Homog, SecondaryKind, SecondaryOps, VertexAlgebraData};
use ezop::cosimp::{hom_from_z, moore, yoneda_identification, CosimplicialModule, Degree0, Truncation};
use ezop::input::{read_input, Input};
use ezop::operad::*;
use ezop::transfer::*;
use ezop::{q, SparseVec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Debug>(x: E) -> String {
    format!("{x:?}")
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Hom(Z, A) and the Moore complex of A agree under f ↦ (-1)^{m(m+1)/2} f_m.
fn key_lemma() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let top = 5;
    let mut nontrivial = 0;
    for k in 0..20 {
        let a = CosimplicialModule::random_small(&mut rng, top, 4);
        ensure(a.dims().iter().all(|&d| d <= 4), || format!("module {k}: dims {:?}", a.dims()))?;
        let h = hom_from_z(&Degree0(&a), Truncation::new(top, 0)).map_err(e)?.complex;
        let m = moore(&a).map_err(e)?;
        let y = yoneda_identification(&a);
        for p in 0..=top as i64 {
            ensure(h.dim(p) == m.dim(p), || format!("module {k}: dim in degree {p}: {} vs {}", h.dim(p), m.dim(p)))?;
        }
        for p in 0..top {
            let lhs = m.d(p as i64).mul(&y[p]).map_err(e)?;
            let rhs = y[p + 1].mul(&h.d(p as i64)).map_err(e)?;
            ensure(lhs == rhs, || format!("module {k}: differential in degree {p}"))?;
            if !lhs.is_zero() {
                nontrivial += 1;
            }
        }
    }
    Ok(format!("20 modules, {nontrivial} nonzero differentials compared"))
}

fn concentration() -> Outcome {
    let mut ranks = Vec::new();
    for (n, d, lo) in [(1, 5, -3), (2, 5, -3), (3, 4, -2)] {
        let r = check_concentration(n, d, (lo, 0)).map_err(e)?;
        let rs: Vec<usize> = r.ranks.iter().map(|x| x.1).collect();
        ensure(r.pass, || format!("arity {n}: ranks {rs:?}"))?;
        ranks.push(format!("n={n}: {rs:?}"));
    }
    Ok(ranks.join("; "))
}

fn lie_operad() -> Outcome {
    let dims = (1..=6).map(lie_dim).collect::<ezop::Result<Vec<_>>>().map_err(e)?;
    ensure(dims.iter().enumerate().all(|(i, &d)| d == factorial(i)), || format!("dims {dims:?}"))?;
    for form in [JacobiForm::Cyclic, JacobiForm::Derivation] {
        let mut acc = LieElement::zero(3);
        for (t, c) in form.monomials() {
            acc = acc.add(&lie_expand(&t, 3).map_err(e)?.scaled(&c));
        }
        ensure(acc.is_zero(), || format!("{form:?} Jacobi expansion is nonzero"))?;
    }
    for n in 2..=4 {
        for t in all_bracket_monomials(n) {
            if let BracketTree::Bracket(l, r) = &t {
                let swapped = BracketTree::Bracket(r.clone(), l.clone());
                let sum = lie_expand(&t, n).map_err(e)?.add(&lie_expand(&swapped, n).map_err(e)?);
                ensure(sum.is_zero(), || format!("antisymmetry fails on {t:?}"))?;
            }
        }
    }
    Ok(format!("dims {dims:?}"))
}

fn cocycle() -> Outcome {
    for levels in 1..=5 {
        let c = aw_cocycle(levels);
        ensure(c.diff().is_zero(), || format!("d c ≠ 0 at {levels} levels"))?;
        ensure(augment(&c).map_err(e)? == LieElement::bracket_of_letters(), || "ε(c) ≠ [e1,e2]".into())?;
        let t = y_permute(&c, &[1, 0]).map_err(e)?;
        ensure(t == c.scaled(&q(-1)), || "τ·c ≠ -c".into())?;
    }
    Ok("levels 1..5: dc = 0, ε(c) = [e1,e2], τ·c = -c".into())
}

fn jacobiator_pipeline() -> Outcome {
    let b = CechAlgebra::new(sl2_three_opens(), 4).map_err(e)?;
    let mut out = Vec::new();
    for form in [JacobiForm::Cyclic, JacobiForm::Derivation] {
        let ts = TransferredStructure::new(4, form).map_err(e)?;
        let cert = ts.certificate();
        ensure(cert.dj_zero && cert.augmentation_of_j_zero && cert.solve_verified, || format!("{cert:?}"))?;
        let rep = check_homotopy_jacobi(&b, &ts, 2).map_err(e)?;
        ensure(rep.pass(), || format!("{form:?}: {:?}", rep.jacobiator_failures.first().or(rep.homotopy_failures.first())))?;
        out.push(format!("{form:?}: {} triples", rep.triples));
    }
    Ok(out.join(", "))
}

fn cohomology_algebra_check() -> Outcome {
    let t = BilinearTable::sl2();
    let b = CechAlgebra::new(two_opens(Fiber::Lie(t.clone())), 3).map_err(e)?;
    let h = cohomology_algebra(&b, AlgebraType::Lie, 1).map_err(e)?;
    ensure(h.rank(0) == 3 && h.rank(1) == 0, || format!("ranks {:?}", h.ranks))?;
    ensure(h.pass(), || format!("{:?}", h.witnesses))?;
    // g → H⁰, x ↦ (x, x), is a Lie map onto the cocycles
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).map_err(e)?;
    let diag = |v: &SparseVec| -> SparseVec {
        let mut out = SparseVec::zero();
        for (g, c) in v.iter() {
            for i in 0..2 {
                out.add_term(b.basis_index(0, &[i], *g).unwrap(), c.clone());
            }
        }
        out
    };
    for x in 0..3 {
        for y in 0..3 {
            let got = ts.bracket(&b, &Homog::new(0, diag(&SparseVec::basis(x))), &Homog::new(0, diag(&SparseVec::basis(y))), &Probe::Plain).map_err(e)?;
            ensure(got.vec == diag(&t.table[x][y]), || format!("[{}, {}] on H⁰", t.names[x], t.names[y]))?;
        }
    }
    let mut accepted = 0;
    for (name, sheaf) in [("sl2 three opens", sl2_three_opens()), ("sl2 two opens", two_opens(Fiber::Lie(t.clone())))] {
        let b = CechAlgebra::new(sheaf, 4).map_err(e)?;
        let h = cohomology_algebra(&b, AlgebraType::Lie, 2).map_err(e)?;
        ensure(h.pass(), || format!("{name}: {:?}", h.witnesses))?;
        accepted += 1;
    }
    Ok(format!("H⁰ ≅ sl2, H¹ = 0; Jacobi on H• in {accepted} further runs"))
}

fn conformal_identities() -> Outcome {
    let vir = ConformalAlgebra::virasoro(q(1));
    let skew = check_skew(&vir);
    ensure(skew.polyop.pass() && skew.derived.pass(), || format!("{:?}", skew.polyop.failures.first().or(skew.derived.failures.first())))?;
    let jac = check_conformal_jacobi(&vir, 4, 4);
    ensure(jac.pass(), || format!("{:?}", jac.coefficients.failures.first().or(jac.disagreements.first())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut jacobi = 0;
    for k in 0..20 {
        let v = ConformalAlgebra::random(&mut rng, 2 + k % 2, 3, k % 3 == 0, k % 2 == 0);
        let c = check_conformal_jacobi(&v, 3, 3);
        ensure(c.generating_function_agrees, || format!("structure {k}: {:?}", c.disagreements.first()))?;
        // the two forms agree: the Jacobi polynomial vanishes iff all coefficients do
        let all_zero = c.coefficients.pass();
        ensure(all_zero == c.pass(), || format!("structure {k}: status mismatch"))?;
        jacobi += usize::from(all_zero);
    }
    Ok(format!("Virasoro: skew and Jacobi for m, n ≤ 4; 20 random structures agree ({jacobi} satisfy Jacobi)"))
}

fn borcherds() -> Outcome {
    let w = VertexAlgebraData::truncated_polynomials(5);
    let rep = borcherds_sweep(&w, (3, 3, 3)).map_err(e)?;
    ensure(rep.corrected.pass(), || format!("{:?}", rep.corrected.failures.first()))?;
    Ok(format!("{} instances", rep.corrected.checked))
}

struct Mutated<'a> {
    inner: &'a dyn SecondaryOps,
}

impl SecondaryOps for Mutated<'_> {
    fn eval(&self, a: &Homog, b: &Homog, c: &Homog, indices: &[i64]) -> ezop::Result<Homog> {
        let mut v = self.inner.eval(a, b, c, indices)?;
        if a.degree == 1 && b.degree == 0 && c.degree == 0 && indices == [1, 0] && !(a.vec.is_zero() || b.vec.is_zero() || c.vec.is_zero()) {
            v.vec.add_term(0, q(1));
        }
        Ok(v)
    }
}

fn secondary() -> Outcome {
    let ts = TransferredStructure::new(3, JacobiForm::Derivation).map_err(e)?;
    let mut checked = 0;
    for sheaf in [current_two_opens(), virasoro_two_opens(q(1))] {
        let b = CechAlgebra::new(sheaf, 3).map_err(e)?;
        let x = TransferredDg { b: &b, ts: &ts, chiral: false, max_level: 1, support: b.sheaf().support() };
        let rep = secondary_check(&x, &x, &SecondaryKind::Conformal { max_m: 3, max_n: 3 }, 1).map_err(e)?;
        ensure(rep.pass(), || format!("conformal: {:?}", rep.failures.first()))?;
        checked += rep.checked;
    }
    let b = CechAlgebra::new(polynomial_vertex_two_opens(3, 2), 3).map_err(e)?;
    let x = TransferredDg { b: &b, ts: &ts, chiral: true, max_level: 1, support: b.sheaf().support() };
    let grid = vec![(0, 0, 0), (-1, 0, -1), (0, -1, -1), (-1, -1, -1), (1, -2, 0), (-2, 1, -1), (0, 0, -2)];
    let rep = secondary_check(&x, &x, &SecondaryKind::Vertex { grid }, 1).map_err(e)?;
    ensure(rep.pass(), || format!("vertex: {:?}", rep.failures.first()))?;
    checked += rep.checked;
    let b = CechAlgebra::new(current_two_opens(), 3).map_err(e)?;
    let x = TransferredDg { b: &b, ts: &ts, chiral: false, max_level: 1, support: b.sheaf().support() };
    let rep = secondary_check(&x, &Mutated { inner: &x }, &SecondaryKind::Conformal { max_m: 1, max_n: 1 }, 1).map_err(e)?;
    let w = rep.failures.first().ok_or("mutated operations were accepted")?;
    Ok(format!("{checked} instances; mutation rejected at {:?} {:?}", w.inputs, w.indices))
}

fn suite_inputs() -> Vec<(String, NerveSheaf)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../inputs");
    let mut names: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|f| f.unwrap().path()).filter(|p| p.extension().is_some_and(|x| x == "toml")).collect();
    names.sort();
    names
        .into_iter()
        .filter_map(|p| match read_input(&p) {
            Ok(Input::Sheaf(s)) if s.validate().is_empty() => Some((p.file_name().unwrap().to_string_lossy().into_owned(), s)),
            _ => None,
        })
        .collect()
}

/// Probes at which the binary operation is compared.
fn binary_probes(kind: FiberKind, support: (i64, i64)) -> Vec<Probe> {
    match kind {
        FiberKind::Lie | FiberKind::Commutative => vec![Probe::Plain],
        FiberKind::Conformal => (0..support.1.max(1)).map(|n| Probe::Conformal(vec![n as u32])).collect(),
        FiberKind::Vertex => (support.0..support.1).map(|n| Probe::Chiral(vec![n])).collect(),
    }
}

fn truncation_stability() -> Outcome {
    let (d, d1) = (3usize, 4usize);
    let window = d - 2;
    let mut compared = 0;
    let inputs = suite_inputs();
    let (ts, ts1) = (TransferredStructure::new(d, JacobiForm::Cyclic).map_err(e)?, TransferredStructure::new(d1, JacobiForm::Cyclic).map_err(e)?);
    for (name, sheaf) in &inputs {
        let kind = sheaf.kind;
        let (b, b1) = (CechAlgebra::new(sheaf.clone(), d).map_err(e)?, CechAlgebra::new(sheaf.clone(), d1).map_err(e)?);
        for probe in binary_probes(kind, sheaf.support()) {
            for pa in 0..=window {
                for pb in 0..=window - pa {
                    for x in level_basis(&b, pa) {
                        for y in level_basis(&b, pb) {
                            let (u, v) = if kind == FiberKind::Commutative {
                                (transferred_product(&b, &x, &y).map_err(e)?, transferred_product(&b1, &x, &y).map_err(e)?)
                            } else {
                                (ts.bracket(&b, &x, &y, &probe).map_err(e)?, ts1.bracket(&b1, &x, &y, &probe).map_err(e)?)
                            };
                            ensure(u == v, || format!("{name}: operation on {x:?}, {y:?} at {probe:?}"))?;
                            compared += 1;
                        }
                    }
                }
            }
        }
        if matches!(kind, FiberKind::Lie | FiberKind::Commutative) {
            let alg = if kind == FiberKind::Lie { AlgebraType::Lie } else { AlgebraType::Commutative };
            let (h, h1) = (cohomology_algebra(&b, alg, window).map_err(e)?, cohomology_algebra(&b1, alg, window).map_err(e)?);
            for p in 0..=window as i64 {
                ensure(h.rank(p) == h1.rank(p), || format!("{name}: rank in degree {p}"))?;
            }
            ensure(h.constants == h1.constants, || format!("{name}: structure constants"))?;
        } else {
            let (c, c1) = (moore_complex(&b).map_err(e)?, moore_complex(&b1).map_err(e)?);
            for p in 0..=window as i64 {
                ensure(c.cohomology_at(p).0 == c1.cohomology_at(p).0, || format!("{name}: rank in degree {p}"))?;
            }
        }
    }
    Ok(format!("{} inputs, {compared} operation values, D = {d} vs {d1}", inputs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 10] = [
        ("1 key lemma", key_lemma, Some(Duration::from_secs(10))),
        ("2 concentration", concentration, Some(Duration::from_secs(300))),
        ("3 Lie operad", lie_operad, Some(Duration::from_secs(10))),
        ("4 bracket cocycle", cocycle, None),
        ("5 jacobiator pipeline", jacobiator_pipeline, Some(Duration::from_secs(600))),
        ("6 cohomology algebra", cohomology_algebra_check, None),
        ("7 conformal identities", conformal_identities, None),
        ("8 Borcherds identity", borcherds, Some(Duration::from_secs(60))),
        ("9 secondary identities", secondary, None),
        ("10 truncation stability", truncation_stability, None),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, limit) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.starts_with(&format!("{o} "))) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(l)) if took > l => Err(format!("took {took:.1?}, limit {l:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{took:.1?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{took:.1?}]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
