//! Čech cosimplicial algebras of finite covers.
//!
//! A cover is given combinatorially: an index set `I`, an algebra `L_S` for every nonempty
//! `S ⊆ I`, and restrictions `ρ_{S,T} : L_S → L_T` for `S ⊆ T`. Level `p` of the Čech
//! object is `⊕_{u : [p] → I} L_{im u}` over all functions (repeats allowed), and a
//! monotone map `f : [p] → [q]` sends the `u`-component to every `v` with `v ∘ f = u`,
//! restricted along `im u ⊆ im v`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::conformal::{borcherds_sweep, check_conformal_jacobi, check_skew, ConformalAlgebra, VertexAlgebraData};
use crate::error::{Error, Result};
use crate::exactlin::{q, LinComb, QMatrix, SparseVec};
use crate::operad::Word;
use crate::simplexcat::MonotoneMap;
use crate::transfer::{eval_lie_words, eval_product_words, CosimplicialAlgebra, Probe};

/// The kind of algebra sitting over each intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberKind {
    Lie,
    Commutative,
    Conformal,
    Vertex,
}

/// Finite-dimensional algebra given by a bilinear multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearTable {
    pub names: Vec<String>,
    /// `table[i][j] = e_i · e_j`.
    pub table: Vec<Vec<SparseVec>>,
}

impl BilinearTable {
    pub fn new(names: Vec<String>, table: Vec<Vec<SparseVec>>) -> Result<Self> {
        let n = names.len();
        if table.len() != n || table.iter().any(|r| r.len() != n) {
            return Err(Error::Input("multiplication table does not match the basis".into()));
        }
        if table.iter().flatten().any(|v| v.keys().any(|&k| k >= n)) {
            return Err(Error::Input("multiplication table leaves the basis".into()));
        }
        Ok(BilinearTable { names, table })
    }

    pub fn zero(n: usize) -> Self {
        BilinearTable { names: (0..n).map(|i| format!("e{i}")).collect(), table: vec![vec![SparseVec::zero(); n]; n] }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn mul(&self, x: &SparseVec, y: &SparseVec) -> SparseVec {
        let mut out = SparseVec::zero();
        for (i, a) in x.iter() {
            for (j, b) in y.iter() {
                out.add_scaled(&self.table[*i][*j], &(a * b));
            }
        }
        out
    }

    /// `sl_2` with basis `e, h, f`.
    pub fn sl2() -> Self {
        let mut t = vec![vec![SparseVec::zero(); 3]; 3];
        t[1][0] = SparseVec::term(0, q(2));
        t[0][1] = SparseVec::term(0, q(-2));
        t[1][2] = SparseVec::term(2, q(-2));
        t[2][1] = SparseVec::term(2, q(2));
        t[0][2] = SparseVec::basis(1);
        t[2][0] = SparseVec::term(1, q(-1));
        BilinearTable { names: vec!["e".into(), "h".into(), "f".into()], table: t }
    }
}

/// An algebra over one intersection of the cover.
#[derive(Clone, Debug, PartialEq)]
pub enum Fiber {
    Lie(BilinearTable),
    Commutative(BilinearTable),
    Conformal(ConformalAlgebra),
    Vertex(VertexAlgebraData),
}

impl Fiber {
    pub fn zero(kind: FiberKind) -> Self {
        match kind {
            FiberKind::Lie => Fiber::Lie(BilinearTable::zero(0)),
            FiberKind::Commutative => Fiber::Commutative(BilinearTable::zero(0)),
            FiberKind::Conformal => Fiber::Conformal(ConformalAlgebra::abelian(0)),
            FiberKind::Vertex => Fiber::Vertex(VertexAlgebraData::new(vec![], BTreeMap::new()).unwrap()),
        }
    }

    pub fn kind(&self) -> FiberKind {
        match self {
            Fiber::Lie(_) => FiberKind::Lie,
            Fiber::Commutative(_) => FiberKind::Commutative,
            Fiber::Conformal(_) => FiberKind::Conformal,
            Fiber::Vertex(_) => FiberKind::Vertex,
        }
    }

    /// Number of generators (basis vectors, or `k[∂]`-generators in the conformal case).
    pub fn dim(&self) -> usize {
        match self {
            Fiber::Lie(t) | Fiber::Commutative(t) => t.dim(),
            Fiber::Conformal(v) => v.dim(),
            Fiber::Vertex(w) => w.dim(),
        }
    }

    pub fn names(&self) -> &[String] {
        match self {
            Fiber::Lie(t) | Fiber::Commutative(t) => &t.names,
            Fiber::Conformal(v) => v.names(),
            Fiber::Vertex(w) => w.names(),
        }
    }

    /// `[lo, hi)` of possibly nonzero product indices.
    pub fn support(&self) -> (i64, i64) {
        match self {
            Fiber::Conformal(v) => (0, v.table().values().map(|r| r.len() as i64).max().unwrap_or(0)),
            Fiber::Vertex(w) => w.support(),
            _ => (0, 0),
        }
    }

    /// Failed algebra axioms, with witnesses.
    pub fn axiom_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Fiber::Lie(t) => {
                let n = t.dim();
                for (a, b) in itertools::iproduct!(0..n, 0..n) {
                    if t.table[a][b] != t.table[b][a].neg() {
                        out.push(format!("bracket not antisymmetric on ({}, {})", t.names[a], t.names[b]));
                    }
                }
                for (a, b, c) in itertools::iproduct!(0..n, 0..n, 0..n) {
                    let (x, y, z) = (SparseVec::basis(a), SparseVec::basis(b), SparseVec::basis(c));
                    let mut j = t.mul(&x, &t.mul(&y, &z));
                    j.add_assign(&t.mul(&y, &t.mul(&z, &x)));
                    j.add_assign(&t.mul(&z, &t.mul(&x, &y)));
                    if !j.is_zero() {
                        out.push(format!("Jacobi fails on ({}, {}, {})", t.names[a], t.names[b], t.names[c]));
                    }
                }
            }
            Fiber::Commutative(t) => {
                let n = t.dim();
                for (a, b) in itertools::iproduct!(0..n, 0..n) {
                    if t.table[a][b] != t.table[b][a] {
                        out.push(format!("product not commutative on ({}, {})", t.names[a], t.names[b]));
                    }
                }
                for (a, b, c) in itertools::iproduct!(0..n, 0..n, 0..n) {
                    let (x, y, z) = (SparseVec::basis(a), SparseVec::basis(b), SparseVec::basis(c));
                    if t.mul(&t.mul(&x, &y), &z) != t.mul(&x, &t.mul(&y, &z)) {
                        out.push(format!("product not associative on ({}, {}, {})", t.names[a], t.names[b], t.names[c]));
                    }
                }
            }
            Fiber::Conformal(v) => {
                let skew = check_skew(v);
                out.extend(skew.polyop.failures.iter().chain(&skew.derived.failures).map(|w| format!("skew symmetry fails on {:?}", w.inputs)));
                let top = self.support().1.max(1) as u32;
                let jac = check_conformal_jacobi(v, top, top);
                out.extend(jac.coefficients.failures.iter().map(|w| format!("commutator formula fails on {:?} at {:?}", w.inputs, w.indices)));
                if !jac.generating_function_agrees {
                    out.push("generating-function and coefficient forms of Jacobi disagree".into());
                }
            }
            Fiber::Vertex(w) => {
                let (lo, hi) = w.support();
                let r = lo.abs().max(hi.abs()).min(3);
                match borcherds_sweep(w, (r, r, r)) {
                    Ok(rep) => out.extend(rep.corrected.failures.iter().map(|f| format!("Borcherds identity fails on {:?} at {:?}", f.inputs, f.indices))),
                    Err(e) => out.push(e.to_string()),
                }
            }
        }
        out
    }

    /// Applies a generator matrix (powerwise for conformal fibers).
    pub fn apply_matrix(&self, m: &QMatrix, target: &Fiber, x: &SparseVec) -> SparseVec {
        match (self, target) {
            (Fiber::Conformal(s), Fiber::Conformal(t)) => t.normalize(&ConformalAlgebra::apply_powerwise(m, x, s.dim(), t.dim())),
            _ => m.mul_vec(x).expect("restriction shape checked"),
        }
    }

    /// Witness that `m : self → target` fails to preserve the operations, if any.
    pub fn morphism_violation(&self, target: &Fiber, m: &QMatrix) -> Option<String> {
        if m.rows() != target.dim() || m.cols() != self.dim() {
            return Some(format!("matrix is {}x{}, expected {}x{}", m.rows(), m.cols(), target.dim(), self.dim()));
        }
        let names = self.names();
        let n = self.dim();
        let img = |i: usize| m.column(i).clone();
        match (self, target) {
            (Fiber::Lie(s), Fiber::Lie(t)) | (Fiber::Commutative(s), Fiber::Commutative(t)) => {
                for (a, b) in itertools::iproduct!(0..n, 0..n) {
                    if m.mul_vec(&s.table[a][b]).unwrap() != t.mul(&img(a), &img(b)) {
                        return Some(format!("operation not preserved on ({}, {})", names[a], names[b]));
                    }
                }
            }
            (Fiber::Conformal(s), Fiber::Conformal(t)) => {
                for g in 0..n {
                    if s.is_central(g) && img(g).keys().any(|&k| !t.is_central(k)) {
                        return Some(format!("central generator {} is sent outside the center", names[g]));
                    }
                }
                for (a, b) in itertools::iproduct!(0..n, 0..n) {
                    let (x, y) = (s.gen(a), s.gen(b));
                    let (fx, fy) = (self.apply_matrix(m, target, &x), self.apply_matrix(m, target, &y));
                    let bound = s.bound(&x, &y).max(t.bound(&fx, &fy));
                    for k in 0..bound {
                        if self.apply_matrix(m, target, &s.product(&x, &y, k)) != t.product(&fx, &fy, k) {
                            return Some(format!("({k})-product not preserved on ({}, {})", names[a], names[b]));
                        }
                    }
                }
            }
            (Fiber::Vertex(s), Fiber::Vertex(t)) => {
                let (lo, hi) = (s.support().0.min(t.support().0), s.support().1.max(t.support().1));
                for (a, b) in itertools::iproduct!(0..n, 0..n) {
                    let (x, y) = (SparseVec::basis(a), SparseVec::basis(b));
                    for k in lo..hi {
                        if m.mul_vec(&s.product(&x, &y, k)).unwrap() != t.product(&img(a), &img(b), k) {
                            return Some(format!("({k})-product not preserved on ({}, {})", names[a], names[b]));
                        }
                    }
                }
            }
            _ => return Some("restriction between fibers of different kinds".into()),
        }
        None
    }

    /// Value of a word combination on inputs, as read through `probe`.
    pub fn operate(&self, words: &LinComb<Word>, inputs: &[&SparseVec], probe: &Probe) -> Result<SparseVec> {
        match (self, probe) {
            (Fiber::Lie(t), Probe::Plain) => Ok(eval_lie_words(words, inputs, &|x, y| t.mul(x, y))),
            (Fiber::Commutative(t), Probe::Plain) => Ok(eval_product_words(words, inputs, &|x, y| t.mul(x, y))),
            (Fiber::Conformal(v), Probe::Conformal(ks)) => {
                if ks.len() + 1 != inputs.len() {
                    return Err(Error::Input(format!("conformal probe of length {} for arity {}", ks.len(), inputs.len())));
                }
                Ok(v.eval_lie(words, inputs).coefficient(ks))
            }
            (Fiber::Vertex(w), Probe::Chiral(ps)) => w.eval_lie(words, inputs, ps),
            (f, p) => Err(Error::Input(format!("probe {p:?} does not apply to {:?} fibers", f.kind()))),
        }
    }
}

/// One problem found by [`NerveSheaf::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    pub check: IssueKind,
    pub subject: String,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueKind {
    Completeness,
    Shape,
    Functoriality,
    Morphism,
    Axioms,
}

/// Sheaf of algebras on the nerve of a finite cover.
#[derive(Clone, Debug, PartialEq)]
pub struct NerveSheaf {
    pub opens: Vec<String>,
    pub kind: FiberKind,
    /// Fibers keyed by sorted subsets.
    pub fibers: BTreeMap<Vec<usize>, Fiber>,
    /// Explicitly given restrictions.
    pub restrictions: BTreeMap<(Vec<usize>, Vec<usize>), QMatrix>,
    /// Missing restrictions between fibers of equal dimension default to the identity.
    pub identity_default: bool,
}

impl NerveSheaf {
    /// One open with fiber `l`: the Čech object is constant.
    pub fn single(fiber: Fiber) -> Self {
        let kind = fiber.kind();
        NerveSheaf {
            opens: vec!["U0".into()],
            kind,
            fibers: [(vec![0], fiber)].into_iter().collect(),
            restrictions: BTreeMap::new(),
            identity_default: true,
        }
    }

    /// Every intersection carries `fiber` and every restriction is the identity.
    pub fn uniform(opens: usize, fiber: Fiber) -> Self {
        let kind = fiber.kind();
        NerveSheaf {
            opens: (0..opens).map(|i| format!("U{i}")).collect(),
            kind,
            fibers: nonempty_subsets(opens).into_iter().map(|s| (s, fiber.clone())).collect(),
            restrictions: BTreeMap::new(),
            identity_default: true,
        }
    }

    pub fn subset_name(&self, s: &[usize]) -> String {
        format!("{{{}}}", s.iter().map(|&i| self.opens[i].as_str()).join(","))
    }

    pub fn fiber(&self, s: &[usize]) -> Result<&Fiber> {
        self.fibers.get(s).ok_or_else(|| Error::Input(format!("no fiber over {}", self.subset_name(s))))
    }

    /// `ρ_{S,T}`: given, defaulted, or composed along `S ⊂ S ∪ {t} ⊆ T` with `t` the
    /// smallest element of `T \ S`.
    pub fn restriction(&self, s: &[usize], t: &[usize]) -> Result<QMatrix> {
        let (fs, ft) = (self.fiber(s)?, self.fiber(t)?);
        if s == t {
            return Ok(QMatrix::identity(fs.dim()));
        }
        if !s.iter().all(|i| t.contains(i)) {
            return Err(Error::Input(format!("{} is not contained in {}", self.subset_name(s), self.subset_name(t))));
        }
        if let Some(m) = self.restrictions.get(&(s.to_vec(), t.to_vec())) {
            return Ok(m.clone());
        }
        if fs.dim() == 0 || ft.dim() == 0 {
            return Ok(QMatrix::zero(ft.dim(), fs.dim()));
        }
        if t.len() == s.len() + 1 {
            if self.identity_default && fs.dim() == ft.dim() {
                return Ok(QMatrix::identity(fs.dim()));
            }
            return Err(Error::Input(format!("missing restriction {} → {}", self.subset_name(s), self.subset_name(t))));
        }
        let extra = *t.iter().find(|i| !s.contains(i)).unwrap();
        let mid: Vec<usize> = s.iter().copied().chain([extra]).sorted().collect();
        self.restriction(&mid, t)?.mul(&self.restriction(s, &mid)?)
    }

    /// Checks completeness, shapes, functoriality, morphism property and fiber axioms.
    pub fn validate(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let subsets = nonempty_subsets(self.opens.len());
        for s in &subsets {
            match self.fibers.get(s) {
                None => issues.push(Issue { check: IssueKind::Completeness, subject: self.subset_name(s), message: "missing fiber".into() }),
                Some(f) if f.kind() != self.kind => issues.push(Issue {
                    check: IssueKind::Shape,
                    subject: self.subset_name(s),
                    message: format!("fiber of kind {:?} in a {:?} sheaf", f.kind(), self.kind),
                }),
                Some(f) => {
                    for v in f.axiom_violations() {
                        issues.push(Issue { check: IssueKind::Axioms, subject: self.subset_name(s), message: v });
                    }
                }
            }
        }
        for key in self.fibers.keys() {
            if !subsets.contains(key) {
                issues.push(Issue { check: IssueKind::Shape, subject: format!("{key:?}"), message: "fiber over an invalid subset".into() });
            }
        }
        if !issues.is_empty() {
            return issues;
        }
        let pairs: Vec<(&Vec<usize>, &Vec<usize>)> =
            subsets.iter().cartesian_product(&subsets).filter(|(s, t)| s.len() < t.len() && s.iter().all(|i| t.contains(i))).collect();
        let mut resolved = BTreeMap::new();
        for (s, t) in &pairs {
            let subject = format!("{} → {}", self.subset_name(s), self.subset_name(t));
            match self.restriction(s, t) {
                Err(e) => issues.push(Issue { check: IssueKind::Completeness, subject, message: e.to_string() }),
                Ok(m) => {
                    let (fs, ft) = (&self.fibers[*s], &self.fibers[*t]);
                    if let Some(w) = fs.morphism_violation(ft, &m) {
                        let check = if w.starts_with("matrix is") { IssueKind::Shape } else { IssueKind::Morphism };
                        issues.push(Issue { check, subject, message: w });
                    } else {
                        resolved.insert(((*s).clone(), (*t).clone()), m);
                    }
                }
            }
        }
        for (s, u) in &pairs {
            for t in &subsets {
                if t.len() <= s.len() || t.len() >= u.len() || !s.iter().all(|i| t.contains(i)) || !t.iter().all(|i| u.contains(i)) {
                    continue;
                }
                let (Some(a), Some(b), Some(c)) =
                    (resolved.get(&((*s).clone(), t.clone())), resolved.get(&(t.clone(), (*u).clone())), resolved.get(&((*s).clone(), (*u).clone())))
                else {
                    continue;
                };
                if &b.mul(a).expect("shapes checked") != c {
                    issues.push(Issue {
                        check: IssueKind::Functoriality,
                        subject: format!("{} ⊂ {} ⊂ {}", self.subset_name(s), self.subset_name(t), self.subset_name(u)),
                        message: "restriction through the middle set differs from the direct restriction".into(),
                    });
                }
            }
        }
        issues
    }

    /// Union of the fibers' product supports.
    pub fn support(&self) -> (i64, i64) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for f in self.fibers.values() {
            let (l, h) = f.support();
            if h > l {
                lo = lo.min(l);
                hi = hi.max(h);
            }
        }
        if lo > hi {
            (0, 0)
        } else {
            (lo, hi)
        }
    }
}

/// All nonempty subsets of `0..n`, each sorted, smallest first.
pub fn nonempty_subsets(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (1..=n).flat_map(|k| (0..n).combinations(k)).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Index of one cosimplicial level.
#[derive(Clone, Debug)]
struct Level {
    funcs: Vec<Vec<usize>>,
    images: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    dims: Vec<usize>,
    dim: usize,
    position: HashMap<Vec<usize>, usize>,
}

/// The Čech cosimplicial algebra of a [`NerveSheaf`], truncated at `levels`.
pub struct CechAlgebra {
    sheaf: NerveSheaf,
    levels: usize,
    index: Vec<Level>,
    restrictions: BTreeMap<(Vec<usize>, Vec<usize>), QMatrix>,
    preimages: Mutex<HashMap<MonotoneMap, Arc<Vec<Vec<usize>>>>>,
}

impl std::fmt::Debug for CechAlgebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CechAlgebra").field("opens", &self.sheaf.opens).field("levels", &self.levels).finish()
    }
}

impl CechAlgebra {
    /// Builds the Čech object after validating the sheaf.
    pub fn new(sheaf: NerveSheaf, levels: usize) -> Result<Self> {
        if let Some(issue) = sheaf.validate().into_iter().next() {
            let msg = format!("{}: {}", issue.subject, issue.message);
            return Err(match issue.check {
                IssueKind::Completeness | IssueKind::Shape => Error::Input(msg),
                _ => Error::Invariant(msg),
            });
        }
        let k = sheaf.opens.len();
        let mut index = Vec::with_capacity(levels + 1);
        for p in 0..=levels {
            let funcs: Vec<Vec<usize>> = (0..=p).map(|_| 0..k).multi_cartesian_product().collect();
            let images: Vec<Vec<usize>> = funcs.iter().map(|u| u.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()).collect();
            let dims: Vec<usize> = images.iter().map(|s| sheaf.fibers[s].dim()).collect();
            let mut offsets = Vec::with_capacity(funcs.len());
            let mut acc = 0;
            for d in &dims {
                offsets.push(acc);
                acc += d;
            }
            let position = funcs.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect();
            index.push(Level { funcs, images, offsets, dims, dim: acc, position });
        }
        let mut restrictions = BTreeMap::new();
        for s in nonempty_subsets(k) {
            for t in nonempty_subsets(k) {
                if s.iter().all(|i| t.contains(i)) {
                    let m = sheaf.restriction(&s, &t)?;
                    restrictions.insert((s.clone(), t), m);
                }
            }
        }
        Ok(CechAlgebra { sheaf, levels, index, restrictions, preimages: Mutex::new(HashMap::new()) })
    }

    pub fn sheaf(&self) -> &NerveSheaf {
        &self.sheaf
    }

    /// Functions `[p] → I` indexing the summands of level `p`.
    pub fn functions(&self, p: usize) -> &[Vec<usize>] {
        &self.index[p].funcs
    }

    /// Basis index of generator `g` of the summand `u` at level `p`.
    pub fn basis_index(&self, p: usize, u: &[usize], g: usize) -> Option<usize> {
        let lv = &self.index[p];
        let k = *lv.position.get(u)?;
        (g < lv.dims[k]).then(|| lv.offsets[k] + g)
    }

    /// `(summand, generator, ∂-power)` of a basis index.
    fn locate(&self, p: usize, idx: usize) -> (usize, usize, usize) {
        let lv = &self.index[p];
        let (power, pos) = (idx / lv.dim, idx % lv.dim);
        // the last summand starting at or before `pos` is the nonempty one containing it
        let k = lv.offsets.partition_point(|&o| o <= pos) - 1;
        (k, pos - lv.offsets[k], power)
    }

    fn preimages(&self, f: &MonotoneMap) -> Arc<Vec<Vec<usize>>> {
        if let Some(v) = self.preimages.lock().unwrap().get(f) {
            return v.clone();
        }
        let (src, tgt) = (&self.index[f.source()], &self.index[f.target()]);
        let mut out = vec![Vec::new(); src.funcs.len()];
        for (vi, v) in tgt.funcs.iter().enumerate() {
            let u: Vec<usize> = f.values().map(|i| v[i]).collect();
            out[src.position[&u]].push(vi);
        }
        let arc = Arc::new(out);
        self.preimages.lock().unwrap().insert(f.clone(), arc.clone());
        arc
    }

    /// Splits a level-`p` vector into summand components in local fiber encoding.
    fn components(&self, p: usize, x: &SparseVec) -> BTreeMap<usize, SparseVec> {
        let mut out: BTreeMap<usize, SparseVec> = BTreeMap::new();
        for (idx, c) in x.iter() {
            let (k, g, power) = self.locate(p, *idx);
            let d = self.index[p].dims[k];
            out.entry(k).or_default().add_term(power * d + g, c.clone());
        }
        out
    }

    fn embed(&self, p: usize, k: usize, local: &SparseVec, out: &mut SparseVec) {
        let lv = &self.index[p];
        let d = lv.dims[k];
        for (li, c) in local.iter() {
            let (power, g) = (li / d, li % d);
            out.add_term(power * lv.dim + lv.offsets[k] + g, c.clone());
        }
    }
}

impl CosimplicialAlgebra for CechAlgebra {
    fn levels(&self) -> usize {
        self.levels
    }

    fn dim(&self, p: usize) -> usize {
        self.index[p].dim
    }

    fn apply(&self, f: &MonotoneMap, x: &SparseVec) -> SparseVec {
        let (p, q) = (f.source(), f.target());
        let mut out = SparseVec::zero();
        if x.is_zero() {
            return out;
        }
        let pre = self.preimages(f);
        let (src, tgt) = (&self.index[p], &self.index[q]);
        for (k, local) in self.components(p, x) {
            let s = &src.images[k];
            let fs = &self.sheaf.fibers[s];
            for &vi in &pre[k] {
                let t = &tgt.images[vi];
                let ft = &self.sheaf.fibers[t];
                if ft.dim() == 0 {
                    continue;
                }
                let m = &self.restrictions[&(s.clone(), t.clone())];
                let img = fs.apply_matrix(m, ft, &local);
                self.embed(q, vi, &img, &mut out);
            }
        }
        out
    }

    fn operate(&self, m: usize, words: &LinComb<Word>, inputs: &[&SparseVec], probe: &Probe) -> Result<SparseVec> {
        let comps: Vec<BTreeMap<usize, SparseVec>> = inputs.iter().map(|x| self.components(m, x)).collect();
        let mut out = SparseVec::zero();
        let Some(first) = comps.first() else {
            return Ok(out);
        };
        for k in first.keys() {
            let locals: Option<Vec<&SparseVec>> = comps.iter().map(|c| c.get(k)).collect();
            let Some(locals) = locals else { continue };
            let fiber = &self.sheaf.fibers[&self.index[m].images[*k]];
            let v = fiber.operate(words, &locals, probe)?;
            self.embed(m, *k, &v, &mut out);
        }
        Ok(out)
    }

    fn basis_name(&self, p: usize, idx: usize) -> String {
        let (k, g, power) = self.locate(p, idx);
        let lv = &self.index[p];
        let fiber = &self.sheaf.fibers[&lv.images[k]];
        let u = lv.funcs[k].iter().map(|&i| self.sheaf.opens[i].as_str()).join(",");
        let d = match power {
            0 => String::new(),
            1 => "∂".into(),
            n => format!("∂^{n}"),
        };
        format!("{d}{}@({u})", fiber.names()[g])
    }
}

/// Classical Čech differential on alternating-free cochains, coded directly: for
/// `a = (a_u)` over `u : [p] → I`, `(da)_v = Σ_i (-1)^i ρ(a_{v∘δ_i})`.
pub fn classical_cech_differential(b: &CechAlgebra, p: usize, a: &SparseVec) -> Result<SparseVec> {
    if p + 1 > b.levels {
        return Err(Error::Truncation(format!("degree {} is beyond the truncation", p + 1)));
    }
    let comps = b.components(p, a);
    let mut out = SparseVec::zero();
    let tgt = &b.index[p + 1];
    for (vi, v) in tgt.funcs.iter().enumerate() {
        let ft = &b.sheaf.fibers[&tgt.images[vi]];
        if ft.dim() == 0 {
            continue;
        }
        for i in 0..=p + 1 {
            let mut u = v.clone();
            u.remove(i);
            let k = b.index[p].position[&u];
            if let Some(local) = comps.get(&k) {
                let s = &b.index[p].images[k];
                let m = &b.restrictions[&(s.clone(), tgt.images[vi].clone())];
                let img = b.sheaf.fibers[s].apply_matrix(m, ft, local);
                let mut piece = SparseVec::zero();
                b.embed(p + 1, vi, &img, &mut piece);
                out.add_scaled(&piece, &crate::exactlin::sign(i as i64));
            }
        }
    }
    Ok(out)
}

/// Ready-made covers used by the examples and tests.
pub mod examples {
    use super::*;

    fn twist(diag: &[crate::exactlin::Q]) -> QMatrix {
        QMatrix::from_triplets(diag.len(), diag.len(), diag.iter().enumerate().map(|(i, c)| (i, i, c.clone()))).unwrap()
    }

    /// Three opens with `sl_2` on every single and double intersection, zero on the triple
    /// intersection, and the restriction `{U2} → {U0,U2}` twisted by `e ↦ 2e, f ↦ f/2`.
    pub fn sl2_three_opens() -> NerveSheaf {
        let mut sheaf = NerveSheaf::uniform(3, Fiber::Lie(BilinearTable::sl2()));
        sheaf.fibers.insert(vec![0, 1, 2], Fiber::zero(FiberKind::Lie));
        sheaf.restrictions.insert((vec![2], vec![0, 2]), twist(&[q(2), q(1), crate::exactlin::qf(1, 2)]));
        sheaf
    }

    /// Two opens, identity restrictions, fiber `g`.
    pub fn two_opens(fiber: Fiber) -> NerveSheaf {
        NerveSheaf::uniform(2, fiber)
    }

    /// The `sl_2` current algebra on two opens, with the restriction `{U1} → {U0,U1}`
    /// twisted by `e ↦ 2e, f ↦ f/2`.
    pub fn current_two_opens() -> NerveSheaf {
        let t = BilinearTable::sl2();
        let form = QMatrix::from_triplets(3, 3, [(0, 2, q(1)), (2, 0, q(1)), (1, 1, q(2))]).unwrap();
        let v = ConformalAlgebra::current(&["e", "h", "f"], &t.table, &form).unwrap();
        let mut sheaf = NerveSheaf::uniform(2, Fiber::Conformal(v));
        sheaf.restrictions.insert((vec![1], vec![0, 1]), twist(&[q(2), q(1), crate::exactlin::qf(1, 2), q(1)]));
        sheaf
    }

    /// Virasoro on two opens with identity restrictions.
    pub fn virasoro_two_opens(c: crate::exactlin::Q) -> NerveSheaf {
        NerveSheaf::uniform(2, Fiber::Conformal(ConformalAlgebra::virasoro(c)))
    }

    /// Truncated polynomial vertex algebras `k[x]/(x^{a+1})` on two opens, restricting to
    /// `k[x]/(x^{b+1})` on the intersection.
    pub fn polynomial_vertex_two_opens(a: usize, b: usize) -> NerveSheaf {
        let big = VertexAlgebraData::truncated_polynomials(a);
        let small = VertexAlgebraData::truncated_polynomials(b);
        let proj = QMatrix::from_triplets(b + 1, a + 1, (0..=b).map(|i| (i, i, q(1)))).unwrap();
        let mut sheaf = NerveSheaf::uniform(2, Fiber::Vertex(big));
        sheaf.fibers.insert(vec![0, 1], Fiber::Vertex(small));
        sheaf.restrictions.insert((vec![0], vec![0, 1]), proj.clone());
        sheaf.restrictions.insert((vec![1], vec![0, 1]), proj);
        sheaf
    }
}
