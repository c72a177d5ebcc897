//! Homotopy transfer of operations from a cosimplicial algebra to its Moore complex.
//!
//! An element `y ∈ 𝒴(n)^d` acts on `MB` as follows. A term at level `m` with tuple
//! `(p_1, …, p_n)`, `p_i : [m_i] → [m]`, and Lie word part `ψ` sends inputs
//! `b_i ∈ B^{m_i}` to `±ψ_m(B(p_1)b_1, …, B(p_n)b_n) ∈ B^m`; inputs of other levels give 0.
//! The sign is `(-1)^s` with
//! `s = Σ_{i<j} m_i m_j + Σ_i m_i(m_i+1)/2 + m(m+1)/2 + d Σ_i m_i`,
//! which makes `y ↦ F(y)` a chain map: `F(dy) = d∘F(y) - (-1)^d Σ_i (-1)^{m_1+…+m_{i-1}} F(y)(…, d b_i, …)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conformal::{fmt_vec, DgProducts, Homog, SecondaryOps, Witness};
use crate::cosimp::{moore, CosimplicialModule};
use crate::error::{Error, Result};
use crate::exactlin::{fmt_q, sign, CohomologyBasis, FiniteComplex, LinComb, QMatrix, SparseVec, Q};
use crate::operad::{
    aw, aw_cocycle, contract_cocycle, jacobiator, level_zero_part, lie_is_zero, tensor_lie, JacobiForm, LieElement, Tuple, Word,
    YElement,
};
use crate::simplexcat::{face, MonotoneMap};

/// How an operation value is read off in a level algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Probe {
    /// Ordinary multilinear operation.
    Plain,
    /// Coefficient of a polynomial-valued operation at `Π (-∂_i)^{k_i}/k_i!`.
    Conformal(Vec<u32>),
    /// Chiral coefficient of a vertex-algebra operation at integer indices.
    Chiral(Vec<i64>),
}

/// A cosimplicial algebra truncated at level `levels()`.
///
/// Elements of level `p` are sparse vectors; the carrier may be a module over `k[∂]`, in
/// which case `dim(p)` counts generators and `apply` acts on every `∂`-power alike.
pub trait CosimplicialAlgebra {
    fn levels(&self) -> usize;
    fn dim(&self, p: usize) -> usize;
    /// `B(f)` for `f : [p] → [q]`.
    fn apply(&self, f: &MonotoneMap, x: &SparseVec) -> SparseVec;
    /// Value of a word combination (interpreted by the level algebra) on inputs of level `m`.
    fn operate(&self, m: usize, words: &LinComb<Word>, inputs: &[&SparseVec], probe: &Probe) -> Result<SparseVec>;
    fn basis_name(&self, p: usize, idx: usize) -> String;
}

/// Moore differential `d x = Σ_i (-1)^i B(δ_i) x`.
pub fn moore_d(b: &dyn CosimplicialAlgebra, x: &Homog) -> Result<Homog> {
    let p = usize::try_from(x.degree).map_err(|_| Error::Input(format!("negative Moore degree {}", x.degree)))?;
    if p + 1 > b.levels() {
        return Err(Error::Truncation(format!("differential out of degree {p} needs level {}", p + 1)));
    }
    let mut out = SparseVec::zero();
    for i in 0..=p + 1 {
        out.add_scaled(&b.apply(&face(p + 1, i)?, &x.vec), &sign(i as i64));
    }
    Ok(Homog::new(x.degree + 1, out))
}

/// The underlying cosimplicial module on generators.
pub fn to_module(b: &dyn CosimplicialAlgebra) -> Result<CosimplicialModule> {
    let dims: Vec<usize> = (0..=b.levels()).map(|p| b.dim(p)).collect();
    CosimplicialModule::from_generators(dims.clone(), |f| {
        let cols = (0..dims[f.source()]).map(|j| b.apply(f, &SparseVec::basis(j))).collect();
        QMatrix::from_columns(dims[f.target()], cols).expect("apply stays in the target level")
    })
}

/// Moore complex of the underlying module.
pub fn moore_complex(b: &dyn CosimplicialAlgebra) -> Result<FiniteComplex> {
    moore(&to_module(b)?)
}

/// An element of `𝒴(n)` indexed by output level and input levels for fast evaluation.
#[derive(Clone, Debug)]
pub struct IndexedOp {
    pub arity: usize,
    pub degree: i64,
    pub levels: usize,
    groups: BTreeMap<(usize, Vec<usize>), Vec<(Tuple, LinComb<Word>)>>,
}

impl IndexedOp {
    pub fn new(y: &YElement) -> Self {
        let mut by_tuple: BTreeMap<(usize, Tuple), LinComb<Word>> = BTreeMap::new();
        for ((m, t, w), c) in y.terms.iter() {
            by_tuple.entry((*m, t.clone())).or_default().add_term(w.clone(), c.clone());
        }
        let mut groups: BTreeMap<(usize, Vec<usize>), Vec<(Tuple, LinComb<Word>)>> = BTreeMap::new();
        for ((m, t), words) in by_tuple {
            if words.is_zero() {
                continue;
            }
            let ms = t.iter().map(|p| p.source()).collect();
            groups.entry((m, ms)).or_default().push((t, words));
        }
        IndexedOp { arity: y.arity, degree: y.degree, levels: y.levels, groups }
    }
}

/// Koszul sign exponent of the transfer formula.
fn transfer_sign(ms: &[usize], m: usize, d: i64) -> Q {
    let total: usize = ms.iter().sum();
    let mut s: i64 = 0;
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            s += (ms[i] * ms[j]) as i64;
        }
        s += (ms[i] * (ms[i] + 1) / 2) as i64;
    }
    s += (m * (m + 1) / 2) as i64 + d * total as i64;
    sign(s)
}

/// `F(y)(b_1, …, b_n)`.
pub fn f_apply(b: &dyn CosimplicialAlgebra, op: &IndexedOp, inputs: &[&Homog], probe: &Probe) -> Result<Homog> {
    if inputs.len() != op.arity {
        return Err(Error::Input(format!("operation of arity {} applied to {} inputs", op.arity, inputs.len())));
    }
    let mut ms = Vec::with_capacity(inputs.len());
    for x in inputs {
        ms.push(usize::try_from(x.degree).map_err(|_| Error::Input(format!("negative input degree {}", x.degree)))?);
    }
    let out_degree = ms.iter().sum::<usize>() as i64 + op.degree;
    if out_degree < 0 {
        return Ok(Homog::new(out_degree, SparseVec::zero()));
    }
    let m = out_degree as usize;
    if m > b.levels() || m > op.levels {
        return Err(Error::Truncation(format!("output level {m} exceeds the truncation {}", b.levels().min(op.levels))));
    }
    let mut out = SparseVec::zero();
    if let Some(group) = op.groups.get(&(m, ms.clone())) {
        for (tuple, words) in group {
            let mut qs = Vec::with_capacity(tuple.len());
            for (p, x) in tuple.iter().zip(inputs) {
                let v = if p.is_identity() { x.vec.clone() } else { b.apply(p, &x.vec) };
                if v.is_zero() {
                    break;
                }
                qs.push(v);
            }
            if qs.len() < tuple.len() {
                continue;
            }
            let refs: Vec<&SparseVec> = qs.iter().collect();
            out.add_assign(&b.operate(m, words, &refs, probe)?);
        }
    }
    Ok(Homog::new(out_degree, out.scaled(&transfer_sign(&ms, m, op.degree))))
}

/// The product cocycle `AW ⊗ e_1 e_2` for commutative backends.
pub fn cup_cocycle(levels: usize) -> YElement {
    tensor_lie(&aw(levels), &LieElement { arity: 2, terms: LinComb::basis(vec![0, 1]) })
}

/// `F(AW ⊗ e_1 e_2)(x, y)` on a commutative backend.
pub fn transferred_product(b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog) -> Result<Homog> {
    let op = IndexedOp::new(&cup_cocycle(b.levels()));
    f_apply(b, &op, &[x, y], &Probe::Plain)
}

/// Counts recorded when building a transferred structure; `solve_verified` is the post-hoc
/// check `d j' = j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferCertificate {
    pub levels: usize,
    pub form: JacobiForm,
    pub c_terms: usize,
    pub j_terms: usize,
    pub j_prime_terms: usize,
    pub dc_zero: bool,
    pub dj_zero: bool,
    pub augmentation_of_j_zero: bool,
    pub solve_verified: bool,
}

/// The bracket `c`, jacobiator `j` and homotopy `j'` with `d j' = j`, ready to act on any
/// cosimplicial algebra truncated at `levels`.
#[derive(Clone, Debug)]
pub struct TransferredStructure {
    pub levels: usize,
    pub form: JacobiForm,
    pub c: YElement,
    pub j: YElement,
    pub j_prime: YElement,
    c_op: IndexedOp,
    j_op: IndexedOp,
    jp_op: IndexedOp,
}

impl TransferredStructure {
    pub fn new(levels: usize, form: JacobiForm) -> Result<Self> {
        let c = aw_cocycle(levels);
        if !c.diff().is_zero() {
            return Err(Error::Invariant("bracket cocycle is not closed".into()));
        }
        let j = jacobiator(&c, form)?;
        if !j.diff().is_zero() {
            return Err(Error::Invariant("jacobiator is not closed".into()));
        }
        if !lie_is_zero(&level_zero_part(&j)) {
            return Err(Error::Invariant("jacobiator has nonzero augmentation".into()));
        }
        let j_prime = contract_cocycle(&j)?;
        Self::from_parts(c, j, j_prime, form)
    }

    /// Reassembles a structure from stored elements, re-verifying `d j' = j`.
    pub fn from_parts(c: YElement, j: YElement, j_prime: YElement, form: JacobiForm) -> Result<Self> {
        if j_prime.diff().terms != j.terms {
            return Err(Error::Invariant("stored homotopy does not satisfy d j' = j".into()));
        }
        let levels = c.levels.min(j.levels).min(j_prime.levels);
        Ok(TransferredStructure { levels, form, c_op: IndexedOp::new(&c), j_op: IndexedOp::new(&j), jp_op: IndexedOp::new(&j_prime), c, j, j_prime })
    }

    pub fn certificate(&self) -> TransferCertificate {
        TransferCertificate {
            levels: self.levels,
            form: self.form,
            c_terms: self.c.terms.len(),
            j_terms: self.j.terms.len(),
            j_prime_terms: self.j_prime.terms.len(),
            dc_zero: self.c.diff().is_zero(),
            dj_zero: self.j.diff().is_zero(),
            augmentation_of_j_zero: lie_is_zero(&level_zero_part(&self.j)),
            solve_verified: self.j_prime.diff().terms == self.j.terms,
        }
    }

    pub fn bracket(&self, b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog, probe: &Probe) -> Result<Homog> {
        f_apply(b, &self.c_op, &[x, y], probe)
    }

    /// `J = F(j)`.
    pub fn jacobiator_op(&self, b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog, z: &Homog, probe: &Probe) -> Result<Homog> {
        f_apply(b, &self.j_op, &[x, y, z], probe)
    }

    /// `J' = F(j')`.
    pub fn homotopy_op(&self, b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog, z: &Homog, probe: &Probe) -> Result<Homog> {
        f_apply(b, &self.jp_op, &[x, y, z], probe)
    }

    /// Graded Jacobi combination of the transferred bracket, in this structure's form.
    pub fn jacobi_combination(&self, b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog, z: &Homog) -> Result<SparseVec> {
        let p = &Probe::Plain;
        let br = |u: &Homog, v: &Homog| self.bracket(b, u, v, p);
        let (da, db, dc) = (x.degree, y.degree, z.degree);
        let mut out = br(x, &br(y, z)?)?.vec;
        match self.form {
            JacobiForm::Cyclic => {
                out.add_scaled(&br(y, &br(z, x)?)?.vec, &sign(da * (db + dc)));
                out.add_scaled(&br(z, &br(x, y)?)?.vec, &sign(dc * (da + db)));
            }
            JacobiForm::Derivation => {
                out.add_scaled(&br(y, &br(x, z)?)?.vec, &-sign(da * db));
                out.sub_assign(&br(&br(x, y)?, z)?.vec);
            }
        }
        Ok(out)
    }

    /// `d J'(a,b,c) + J'(da,b,c) + (-1)^{|a|} J'(a,db,c) + (-1)^{|a|+|b|} J'(a,b,dc)`.
    pub fn homotopy_boundary(&self, b: &dyn CosimplicialAlgebra, x: &Homog, y: &Homog, z: &Homog, probe: &Probe) -> Result<SparseVec> {
        let mut out = SparseVec::zero();
        let jp = self.homotopy_op(b, x, y, z, probe)?;
        if jp.degree >= 0 {
            out.add_assign(&moore_d(b, &jp)?.vec);
        }
        out.add_assign(&self.homotopy_op(b, &moore_d(b, x)?, y, z, probe)?.vec);
        out.add_scaled(&self.homotopy_op(b, x, &moore_d(b, y)?, z, probe)?.vec, &sign(x.degree));
        out.add_scaled(&self.homotopy_op(b, x, y, &moore_d(b, z)?, probe)?.vec, &sign(x.degree + y.degree));
        Ok(out)
    }
}

/// Basis vectors of level `p` as homogeneous elements.
pub fn level_basis(b: &dyn CosimplicialAlgebra, p: usize) -> Vec<Homog> {
    (0..b.dim(p)).map(|i| Homog::new(p as i64, SparseVec::basis(i))).collect()
}

/// Outcome of the homotopy Jacobi verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomotopyJacobiReport {
    pub form: JacobiForm,
    pub max_total_degree: usize,
    pub triples: usize,
    /// `F(j)` differs from the Jacobi combination of the bracket.
    pub jacobiator_failures: Vec<Witness>,
    /// The homotopy identity fails.
    pub homotopy_failures: Vec<Witness>,
}

impl HomotopyJacobiReport {
    pub fn pass(&self) -> bool {
        self.jacobiator_failures.is_empty() && self.homotopy_failures.is_empty()
    }
}

fn names3(b: &dyn CosimplicialAlgebra, xs: [&Homog; 3]) -> Vec<String> {
    xs.iter().map(|x| fmt_vec(&x.vec, |i| b.basis_name(x.degree as usize, i))).collect()
}

/// Checks `dJ' + J'd = Jac` and `F(j) = Jac` on all basis triples with total degree at most
/// `max_total_degree`, which must leave room for one differential below the truncation.
pub fn check_homotopy_jacobi(b: &dyn CosimplicialAlgebra, ts: &TransferredStructure, max_total_degree: usize) -> Result<HomotopyJacobiReport> {
    let top = b.levels().min(ts.levels);
    if max_total_degree + 2 > top {
        return Err(Error::Truncation(format!("total degree {max_total_degree} is outside the stable window of truncation {top}")));
    }
    let bases: Vec<Vec<Homog>> = (0..=max_total_degree).map(|p| level_basis(b, p)).collect();
    let mut rep = HomotopyJacobiReport {
        form: ts.form,
        max_total_degree,
        triples: 0,
        jacobiator_failures: Vec::new(),
        homotopy_failures: Vec::new(),
    };
    let name = |p: i64| move |i: usize| b.basis_name(p as usize, i);
    for pa in 0..=max_total_degree {
        for pb in 0..=max_total_degree - pa {
            for pc in 0..=max_total_degree - pa - pb {
                for x in &bases[pa] {
                    for y in &bases[pb] {
                        for z in &bases[pc] {
                            rep.triples += 1;
                            let jac = ts.jacobi_combination(b, x, y, z)?;
                            let big_j = ts.jacobiator_op(b, x, y, z, &Probe::Plain)?.vec;
                            let deg = (pa + pb + pc) as i64;
                            if big_j != jac {
                                rep.jacobiator_failures.push(Witness {
                                    inputs: names3(b, [x, y, z]),
                                    indices: vec![pa as i64, pb as i64, pc as i64],
                                    residual: fmt_vec(&big_j.diff(&jac), name(deg)),
                                });
                            }
                            let lhs = ts.homotopy_boundary(b, x, y, z, &Probe::Plain)?;
                            if lhs != jac {
                                rep.homotopy_failures.push(Witness {
                                    inputs: names3(b, [x, y, z]),
                                    indices: vec![pa as i64, pb as i64, pc as i64],
                                    residual: fmt_vec(&lhs.diff(&jac), name(deg)),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Which binary operation is transferred to cohomology.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraType {
    Lie,
    Commutative,
}

/// One structure constant `[h_i, h_j] = Σ_k c_k h_k` (or the product) on cohomology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub left: (i64, usize),
    pub right: (i64, usize),
    pub degree: i64,
    pub coordinates: Vec<String>,
}

/// The algebra induced on `H^•(MB)` in degrees up to `max_degree`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyAlgebra {
    pub algebra: AlgebraType,
    pub max_degree: usize,
    pub ranks: Vec<(i64, usize)>,
    pub constants: Vec<StructureConstant>,
    pub well_defined: bool,
    /// Jacobi and graded skew symmetry (Lie), or associativity and graded commutativity.
    pub identities_hold: bool,
    pub witnesses: Vec<String>,
    #[serde(skip)]
    coords: BTreeMap<((i64, usize), (i64, usize)), Vec<Q>>,
}

impl CohomologyAlgebra {
    pub fn pass(&self) -> bool {
        self.well_defined && self.identities_hold
    }

    pub fn rank(&self, p: i64) -> usize {
        self.ranks.iter().find(|(q, _)| *q == p).map_or(0, |(_, r)| *r)
    }

    /// Coordinates of the operation on two basis classes.
    pub fn constant(&self, left: (i64, usize), right: (i64, usize)) -> Option<&[Q]> {
        self.coords.get(&(left, right)).map(|v| v.as_slice())
    }
}

/// Computes the cohomology algebra in degrees `≤ max_degree` (which must be at most
/// `levels - 2`), verifying that the operation descends and satisfies its identities.
pub fn cohomology_algebra(b: &dyn CosimplicialAlgebra, algebra: AlgebraType, max_degree: usize) -> Result<CohomologyAlgebra> {
    if max_degree + 2 > b.levels() {
        return Err(Error::Truncation(format!("degree {max_degree} is outside the stable window of truncation {}", b.levels())));
    }
    let complex = moore_complex(b)?;
    let bases: Vec<CohomologyBasis> = (0..=max_degree).map(|p| CohomologyBasis::new(&complex, p as i64)).collect();
    let ts = match algebra {
        AlgebraType::Lie => Some(TransferredStructure::new_bracket_only(b.levels())),
        AlgebraType::Commutative => None,
    };
    let cup = IndexedOp::new(&cup_cocycle(b.levels()));
    let op = |x: &Homog, y: &Homog| -> Result<Homog> {
        match &ts {
            Some(t) => t.bracket(b, x, y, &Probe::Plain),
            None => f_apply(b, &cup, &[x, y], &Probe::Plain),
        }
    };
    let mut witnesses = Vec::new();
    let reps: Vec<Vec<Homog>> = bases.iter().enumerate().map(|(p, cb)| cb.reps.iter().map(|v| Homog::new(p as i64, v.clone())).collect()).collect();

    // well-definedness: op(dw, z) and op(z, dw) are coboundaries
    let mut well_defined = true;
    for p in 1..=max_degree {
        for w in level_basis(b, p - 1) {
            let dw = moore_d(b, &w)?;
            for (q_deg, zs) in reps.iter().enumerate() {
                if p + q_deg > max_degree {
                    continue;
                }
                for z in zs {
                    for v in [op(&dw, z)?, op(z, &dw)?] {
                        if !bases[p + q_deg].is_coboundary(&v.vec)? {
                            well_defined = false;
                            witnesses.push(format!("operation with the coboundary of basis vector {} in degree {} is not exact", w.vec.keys().next().unwrap_or(&0), p - 1));
                        }
                    }
                }
            }
        }
    }

    let mut coords = BTreeMap::new();
    let mut constants = Vec::new();
    for (p, xs) in reps.iter().enumerate() {
        for (q_deg, ys) in reps.iter().enumerate() {
            if p + q_deg > max_degree {
                continue;
            }
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    let v = op(x, y)?;
                    let cls = bases[p + q_deg].class_of(&v.vec)?;
                    constants.push(StructureConstant {
                        left: (p as i64, i),
                        right: (q_deg as i64, j),
                        degree: (p + q_deg) as i64,
                        coordinates: cls.iter().map(fmt_q).collect(),
                    });
                    coords.insert(((p as i64, i), (q_deg as i64, j)), cls);
                }
            }
        }
    }

    // identities, evaluated on representatives and compared in cohomology
    let mut identities_hold = true;
    let class_zero = |v: &SparseVec, deg: usize| -> Result<bool> { Ok(bases[deg].class_of(v)?.iter().all(|c| c == &Q::from_integer(0.into()))) };
    for (p, xs) in reps.iter().enumerate() {
        for (q_deg, ys) in reps.iter().enumerate() {
            if p + q_deg > max_degree {
                continue;
            }
            for x in xs {
                for y in ys {
                    let (dx, dy) = (x.degree, y.degree);
                    let koszul = sign(dx * dy);
                    let mut s = op(y, x)?.vec;
                    match algebra {
                        AlgebraType::Lie => s.add_scaled(&op(x, y)?.vec, &koszul),
                        AlgebraType::Commutative => s.add_scaled(&op(x, y)?.vec, &-koszul),
                    }
                    if !class_zero(&s, p + q_deg)? {
                        identities_hold = false;
                        witnesses.push(format!("graded symmetry fails on classes in degrees {p}, {q_deg}"));
                    }
                    for (r, zs) in reps.iter().enumerate() {
                        if p + q_deg + r > max_degree {
                            continue;
                        }
                        for z in zs {
                            let v = match algebra {
                                AlgebraType::Lie => {
                                    let t = ts.as_ref().expect("Lie structure");
                                    t.jacobi_combination(b, x, y, z)?
                                }
                                AlgebraType::Commutative => op(&op(x, y)?, z)?.vec.diff(&op(x, &op(y, z)?)?.vec),
                            };
                            if !class_zero(&v, p + q_deg + r)? {
                                identities_hold = false;
                                witnesses.push(format!("{} fails on classes in degrees {p}, {q_deg}, {r}", match algebra {
                                    AlgebraType::Lie => "Jacobi",
                                    AlgebraType::Commutative => "associativity",
                                }));
                            }
                        }
                    }
                }
            }
        }
    }
    let ranks = bases.iter().enumerate().map(|(p, cb)| (p as i64, cb.rank())).collect();
    Ok(CohomologyAlgebra { algebra, max_degree, ranks, constants, well_defined, identities_hold, witnesses, coords })
}

impl TransferredStructure {
    /// Bracket only (the jacobiator and homotopy are left empty and unverified).
    fn new_bracket_only(levels: usize) -> Self {
        let c = aw_cocycle(levels);
        let empty = YElement::zero(3, 0, levels);
        let empty_p = YElement::zero(3, -1, levels);
        TransferredStructure {
            levels,
            form: JacobiForm::Cyclic,
            c_op: IndexedOp::new(&c),
            j_op: IndexedOp::new(&empty),
            jp_op: IndexedOp::new(&empty_p),
            c,
            j: empty,
            j_prime: empty_p,
        }
    }
}

/// The Moore complex of a conformal or vertex cosimplicial algebra as a dg space with
/// transferred `(n)`-products, and `J'` as its secondary operations.
pub struct TransferredDg<'a> {
    pub b: &'a dyn CosimplicialAlgebra,
    pub ts: &'a TransferredStructure,
    pub chiral: bool,
    pub max_level: usize,
    pub support: (i64, i64),
}

impl TransferredDg<'_> {
    fn probe(&self, idx: &[i64]) -> Option<Probe> {
        if self.chiral {
            Some(Probe::Chiral(idx.to_vec()))
        } else if idx.iter().all(|&k| k >= 0) {
            Some(Probe::Conformal(idx.iter().map(|&k| k as u32).collect()))
        } else {
            None
        }
    }
}

impl DgProducts for TransferredDg<'_> {
    fn test_basis(&self) -> Vec<Homog> {
        (0..=self.max_level).flat_map(|p| level_basis(self.b, p)).collect()
    }

    fn d(&self, x: &Homog) -> Homog {
        if x.degree < 0 {
            return Homog::new(x.degree + 1, SparseVec::zero());
        }
        moore_d(self.b, x).expect("test degrees stay below the truncation")
    }

    fn product(&self, x: &Homog, y: &Homog, n: i64) -> Homog {
        match self.probe(&[n]) {
            Some(p) => self.ts.bracket(self.b, x, y, &p).expect("test degrees stay below the truncation"),
            None => Homog::new(x.degree + y.degree, SparseVec::zero()),
        }
    }

    fn support(&self) -> (i64, i64) {
        self.support
    }

    fn name(&self, x: &Homog) -> String {
        fmt_vec(&x.vec, |i| self.b.basis_name(x.degree as usize, i))
    }
}

impl SecondaryOps for TransferredDg<'_> {
    fn eval(&self, a: &Homog, b: &Homog, c: &Homog, indices: &[i64]) -> Result<Homog> {
        match self.probe(indices) {
            Some(p) => self.ts.homotopy_op(self.b, a, b, c, &p),
            None => Ok(Homog::new(a.degree + b.degree + c.degree - 1, SparseVec::zero())),
        }
    }
}

/// Left-normed evaluation of a word combination in a Lie algebra given by a bracket.
pub fn eval_lie_words(words: &LinComb<Word>, inputs: &[&SparseVec], bracket: &dyn Fn(&SparseVec, &SparseVec) -> SparseVec) -> SparseVec {
    let mut out = SparseVec::zero();
    for (w, c) in words.iter() {
        if w.first() != Some(&0) {
            continue;
        }
        let mut acc = inputs[0].clone();
        for &k in &w[1..] {
            if acc.is_zero() {
                break;
            }
            acc = bracket(&acc, inputs[k as usize]);
        }
        out.add_scaled(&acc, c);
    }
    out
}

/// Evaluates every word as an ordered product (commutative associative backends).
pub fn eval_product_words(words: &LinComb<Word>, inputs: &[&SparseVec], mul: &dyn Fn(&SparseVec, &SparseVec) -> SparseVec) -> SparseVec {
    let mut out = SparseVec::zero();
    for (w, c) in words.iter() {
        let mut acc = inputs[w[0] as usize].clone();
        for &k in &w[1..] {
            if acc.is_zero() {
                break;
            }
            acc = mul(&acc, inputs[k as usize]);
        }
        out.add_scaled(&acc, c);
    }
    out
}
