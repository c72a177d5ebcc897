//! The Eilenberg–Zilber operad `𝒵(n) = Hom(Z, Z^{⊗n})`, the Lie operad in its
//! associative-word model, and the Lie EZ operad `𝒴 = 𝒵 ⊗ Lie`.
//!
//! An element of `𝒵(n)` of degree `d` is a family of components `f_m ∈ Z^{⊗n}([m])` of
//! degree `d - m`, written as combinations of tuples `(p_1, ..., p_n)` with
//! `p_i: [l_i] → [m]` and `Σ l_i = m - d`. Components are kept for `m ≤ levels`.
//!
//! Koszul convention: moving something of degree `a` past something of degree `b`
//! costs `(-1)^{ab}`; the factor `p_i` has degree `-l_i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_traits::{One, Zero};

use crate::cosimp::{hom_from_z, TensorPower, Truncation, ZComplex};
use crate::error::{Error, Result};
use crate::exactlin::{q, qf, sign, Echelon, FiniteComplex, LinComb, QMatrix, SparseVec, Q};
use crate::simplexcat::{face, MonotoneMap};

/// Factors `p_1, ..., p_n` of one basis tensor, all with the same target `[m]`.
pub type Tuple = Vec<MonotoneMap>;

/// A multilinear associative word in the letters `0..n` (letter `i` stands for `e_{i+1}`).
pub type Word = Vec<u8>;

/// Basis key: component level `m`, the tuple, and a label (`()` for `𝒵`, a word for `𝒴`).
pub type OpKey<L> = (usize, Tuple, L);

/// Element of `𝒵(n)` (label `()`) or `𝒴(n)` (label [`Word`]).
#[derive(Clone, PartialEq, Eq)]
pub struct OpElement<L: Ord + Clone> {
    pub arity: usize,
    pub degree: i64,
    pub levels: usize,
    pub terms: LinComb<OpKey<L>>,
}

/// Element of the Eilenberg–Zilber operad.
pub type ZElement = OpElement<()>;
/// Element of the Lie EZ operad `𝒵 ⊗ Lie`.
pub type YElement = OpElement<Word>;

impl<L: Ord + Clone + fmt::Debug> fmt::Debug for OpElement<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OpElement(arity {}, degree {}, levels {}): {:?}", self.arity, self.degree, self.levels, self.terms)
    }
}

/// Sum of `l_i` over a tuple.
pub fn tuple_weight(t: &[MonotoneMap]) -> usize {
    t.iter().map(|p| p.source()).sum()
}

impl<L: Ord + Clone> OpElement<L> {
    pub fn zero(arity: usize, degree: i64, levels: usize) -> Self {
        OpElement { arity, degree, levels, terms: LinComb::zero() }
    }

    /// Checked constructor.
    pub fn from_terms(arity: usize, degree: i64, levels: usize, terms: LinComb<OpKey<L>>) -> Result<Self> {
        let x = OpElement { arity, degree, levels, terms };
        x.validate()?;
        Ok(x)
    }

    /// Checks the shape constraint `Σ l_i = m - d` and the targets.
    pub fn validate(&self) -> Result<()> {
        for ((m, t, _), _) in self.terms.iter() {
            if *m > self.levels {
                return Err(Error::Input(format!("component at level {m} beyond levels {}", self.levels)));
            }
            if t.len() != self.arity {
                return Err(Error::Input(format!("tuple of length {} in arity {}", t.len(), self.arity)));
            }
            if t.iter().any(|p| p.target() != *m) {
                return Err(Error::Input(format!("tuple {t:?} does not land in [{m}]")));
            }
            if tuple_weight(t) as i64 != *m as i64 - self.degree {
                return Err(Error::Input(format!("tuple {t:?} at level {m} has the wrong degree for {}", self.degree)));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The component at level `m`.
    pub fn component(&self, m: usize) -> LinComb<(Tuple, L)> {
        self.terms.iter().filter(|((mm, _, _), _)| *mm == m).map(|((_, t, l), c)| ((t.clone(), l.clone()), c.clone())).collect()
    }

    /// Drops components above `levels`.
    pub fn truncated(&self, levels: usize) -> Self {
        OpElement {
            arity: self.arity,
            degree: self.degree,
            levels: levels.min(self.levels),
            terms: self.terms.filter(|(m, _, _)| *m <= levels),
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.arity != other.arity || self.degree != other.degree {
            return Err(Error::Input(format!(
                "shape mismatch: arity {} degree {} vs arity {} degree {}",
                self.arity, self.degree, other.arity, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(OpElement { levels: self.levels.min(other.levels), terms: self.terms.sum(&other.terms), ..self.clone() }.truncated(self.levels.min(other.levels)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(&-Q::one()))
    }

    pub fn scaled(&self, c: &Q) -> Self {
        OpElement { terms: self.terms.scaled(c), ..self.clone() }
    }

    /// The differential `(df)_m = d_T(f_m) + (-1)^{d+1} Σ_i (-1)^i δ_i f_{m-1}`.
    pub fn diff(&self) -> Self {
        let mut out = LinComb::zero();
        let outer = sign(self.degree + 1);
        for ((m, t, l), c) in self.terms.iter() {
            // Internal differential, Koszul-signed by the degrees of earlier factors.
            let mut before = 0usize;
            for i in 0..t.len() {
                let li = t[i].source();
                if li > 0 {
                    let sg = sign(before as i64);
                    for s in 0..=li {
                        let mut t2 = t.clone();
                        t2[i] = t[i].after(&face(li, s).unwrap());
                        out.add_term((*m, t2, l.clone()), c * &sg * sign(s as i64));
                    }
                }
                before += li;
            }
            // Cosimplicial part.
            if *m < self.levels {
                for i in 0..=m + 1 {
                    let d = face(m + 1, i).unwrap();
                    let t2: Tuple = t.iter().map(|p| d.after(p)).collect();
                    out.add_term((m + 1, t2, l.clone()), c * &outer * sign(i as i64));
                }
            }
        }
        OpElement { arity: self.arity, degree: self.degree + 1, levels: self.levels, terms: out }
    }

    /// Right action of a permutation `ρ` (given by images `ρ(0), ..., ρ(n-1)`): factor `i`
    /// moves to slot `ρ(i)` with its Koszul sign; labels are relabeled by `relabel`.
    pub fn permuted(&self, rho: &[usize], mut relabel: impl FnMut(&L) -> L) -> Result<Self> {
        check_permutation(rho, self.arity)?;
        let mut out = LinComb::zero();
        for ((m, t, l), c) in self.terms.iter() {
            let mut t2 = t.clone();
            let mut odd = 0usize;
            for i in 0..t.len() {
                t2[rho[i]] = t[i].clone();
                for j in i + 1..t.len() {
                    if rho[i] > rho[j] {
                        odd += t[i].source() * t[j].source();
                    }
                }
            }
            out.add_term((*m, t2, relabel(l)), c * sign(odd as i64));
        }
        Ok(OpElement { terms: out, ..self.clone() })
    }
}

fn check_permutation(rho: &[usize], n: usize) -> Result<()> {
    let set: BTreeSet<usize> = rho.iter().copied().collect();
    if rho.len() != n || set.len() != n || set.iter().any(|&r| r >= n) {
        return Err(Error::Input(format!("{rho:?} is not a permutation of {n} letters")));
    }
    Ok(())
}

/// Operadic composition `γ(f; g_1, ..., g_n) = (g_1 ⊗ ... ⊗ g_n) ∘ f`.
///
/// Each term `(p_1, ..., p_n)` of `f_m` is replaced by `⊗_i Z^{⊗k_i}(p_i)((g_i)_{l_i})`,
/// with sign `(-1)^{Σ_{i<j} deg(g_j) l_i}`. Labels are combined by `combine`.
pub fn compose_with<L: Ord + Clone, M: Ord + Clone, R: Ord + Clone>(
    f: &OpElement<L>,
    gs: &[&OpElement<M>],
    mut combine: impl FnMut(&L, &[&M]) -> LinComb<R>,
) -> Result<OpElement<R>> {
    if gs.len() != f.arity {
        return Err(Error::Input(format!("composition of arity {} with {} inputs", f.arity, gs.len())));
    }
    let levels = gs.iter().fold(f.levels, |a, g| a.min(g.levels));
    let arity: usize = gs.iter().map(|g| g.arity).sum();
    let degree = f.degree + gs.iter().map(|g| g.degree).sum::<i64>();
    // Components of each g_i indexed by level.
    let comps: Vec<BTreeMap<usize, Vec<(&Tuple, &M, &Q)>>> = gs
        .iter()
        .map(|g| {
            let mut by: BTreeMap<usize, Vec<(&Tuple, &M, &Q)>> = BTreeMap::new();
            for ((m, t, l), c) in g.terms.iter() {
                by.entry(*m).or_default().push((t, l, c));
            }
            by
        })
        .collect();
    let mut out = LinComb::zero();
    for ((m, t, lf), cf) in f.terms.iter() {
        if *m > levels {
            continue;
        }
        let mut sg_odd = 0i64;
        for j in 0..gs.len() {
            for i in 0..j {
                sg_odd += gs[j].degree * t[i].source() as i64;
            }
        }
        let lists: Vec<&Vec<(&Tuple, &M, &Q)>> = match (0..gs.len()).map(|i| comps[i].get(&t[i].source())).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => continue,
        };
        let base = cf * sign(sg_odd);
        for choice in lists.iter().map(|v| v.iter()).multi_cartesian_product() {
            let mut tuple = Vec::with_capacity(arity);
            let mut coef = base.clone();
            let mut labels = Vec::with_capacity(gs.len());
            for (i, (tg, lg, cg)) in choice.iter().enumerate() {
                for q in tg.iter() {
                    tuple.push(t[i].after(q));
                }
                coef *= *cg;
                labels.push(*lg);
            }
            for (r, c) in combine(lf, &labels).iter() {
                out.add_term((*m, tuple.clone(), r.clone()), &coef * c);
            }
        }
    }
    Ok(OpElement { arity, degree, levels, terms: out })
}

/// Composition in `𝒵`.
pub fn z_compose(f: &ZElement, gs: &[&ZElement]) -> Result<ZElement> {
    compose_with(f, gs, |_, _| LinComb::basis(()))
}

/// Composition in `𝒴`: Z-parts by [`z_compose`], words by substitution.
pub fn y_compose(f: &YElement, gs: &[&YElement]) -> Result<YElement> {
    let arities: Vec<usize> = gs.iter().map(|g| g.arity).collect();
    compose_with(f, gs, |w, us| LinComb::basis(substitute_word(w, us, &arities)))
}

/// Substitutes word `us[k]` (shifted by the arities before `k`) for letter `k` of `w`.
pub fn substitute_word(w: &[u8], us: &[&Word], arities: &[usize]) -> Word {
    let offsets: Vec<usize> = arities.iter().scan(0, |acc, &a| {
        let o = *acc;
        *acc += a;
        Some(o)
    }).collect();
    let mut out = Vec::new();
    for &k in w {
        let k = k as usize;
        out.extend(us[k].iter().map(|&x| (x as usize + offsets[k]) as u8));
    }
    out
}

/// The unit `ι ∈ 𝒵(1)`: the identity tuple at every level.
pub fn z_unit(levels: usize) -> ZElement {
    let terms = (0..=levels).map(|m| ((m, vec![MonotoneMap::identity(m)], ()), Q::one())).collect();
    OpElement { arity: 1, degree: 0, levels, terms }
}

/// The unit of `𝒴(1)`: `ι ⊗ e_1`.
pub fn y_unit(levels: usize) -> YElement {
    tensor_lie(&z_unit(levels), &LieElement::letter())
}

/// Alexander–Whitney cocycle: `AW_m = Σ_i (0..i) ⊗ (i..m)`.
pub fn aw(levels: usize) -> ZElement {
    let mut terms = LinComb::zero();
    for m in 0..=levels {
        for i in 0..=m {
            terms.add_term((m, vec![MonotoneMap::front(i, m), MonotoneMap::back(i, m)], ()), Q::one());
        }
    }
    OpElement { arity: 2, degree: 0, levels, terms }
}

/// `x ⊗ ψ` for a Z-element and a Lie element of the same arity.
pub fn tensor_lie(x: &ZElement, psi: &LieElement) -> YElement {
    let mut terms = LinComb::zero();
    for ((m, t, _), c) in x.terms.iter() {
        for (w, d) in psi.terms.iter() {
            terms.add_term((*m, t.clone(), w.clone()), c * d);
        }
    }
    OpElement { arity: x.arity, degree: x.degree, levels: x.levels, terms }
}

/// Right action of a permutation on `𝒴`: Z-factors move with Koszul signs and every
/// letter `k` becomes `ρ(k)`.
pub fn y_permute(x: &YElement, rho: &[usize]) -> Result<YElement> {
    x.permuted(rho, |w| w.iter().map(|&k| rho[k as usize] as u8).collect())
}

/// The bracket cocycle `c = ½(AW ⊗ [e₁,e₂] − τ·(AW ⊗ [e₁,e₂]))`, so that `τ·c = −c`.
pub fn aw_cocycle(levels: usize) -> YElement {
    let raw = aw_cocycle_unsymmetrized(levels);
    let swapped = y_permute(&raw, &[1, 0]).expect("transposition");
    raw.add(&swapped.scaled(&q(-1))).unwrap().scaled(&qf(1, 2))
}

/// `AW ⊗ [e₁,e₂]` before symmetrization.
pub fn aw_cocycle_unsymmetrized(levels: usize) -> YElement {
    tensor_lie(&aw(levels), &LieElement::bracket_of_letters())
}

/// Augmentation: the level-0 coefficient times the Lie part.
pub fn augment(x: &YElement) -> Result<LieElement> {
    if x.degree != 0 {
        return Err(Error::Input(format!("augmentation needs degree 0, got {}", x.degree)));
    }
    if !x.diff().is_zero() {
        return Err(Error::Input("augmentation needs a cocycle".into()));
    }
    Ok(level_zero_part(x))
}

/// The level-0 coefficient of any element, without the cocycle check.
pub fn level_zero_part(x: &YElement) -> LieElement {
    let terms = x.terms.iter().filter(|((m, _, _), _)| *m == 0).map(|((_, _, w), c)| (w.clone(), c.clone())).collect();
    LieElement { arity: x.arity, terms }
}

/// Right-normed or left-normed Lie monomials as binary trees on letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BracketTree {
    Letter(u8),
    Bracket(Box<BracketTree>, Box<BracketTree>),
}

impl BracketTree {
    pub fn br(a: BracketTree, b: BracketTree) -> Self {
        BracketTree::Bracket(Box::new(a), Box::new(b))
    }

    pub fn letter(k: usize) -> Self {
        BracketTree::Letter(k as u8)
    }

    /// `[[…[x_{o_0}, x_{o_1}], …], x_{o_{n-1}}]`.
    pub fn left_normed(order: &[usize]) -> Self {
        let mut t = BracketTree::letter(order[0]);
        for &k in &order[1..] {
            t = BracketTree::br(t, BracketTree::letter(k));
        }
        t
    }

    /// Letters in left-to-right order.
    pub fn leaves(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.letters(&mut out);
        out
    }

    fn letters(&self, out: &mut Vec<u8>) {
        match self {
            BracketTree::Letter(k) => out.push(*k),
            BracketTree::Bracket(a, b) => {
                a.letters(out);
                b.letters(out);
            }
        }
    }

    fn expand_raw(&self) -> LinComb<Word> {
        match self {
            BracketTree::Letter(k) => LinComb::basis(vec![*k]),
            BracketTree::Bracket(a, b) => {
                let (x, y) = (a.expand_raw(), b.expand_raw());
                let mut out = LinComb::zero();
                for (u, c) in x.iter() {
                    for (v, d) in y.iter() {
                        let mut uv = u.clone();
                        uv.extend(v);
                        out.add_term(uv, c * d);
                        let mut vu = v.clone();
                        vu.extend(u);
                        out.add_term(vu, -(c * d));
                    }
                }
                out
            }
        }
    }
}

/// Element of `Lie(n)` embedded in the multilinear part of the free associative algebra.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LieElement {
    pub arity: usize,
    pub terms: LinComb<Word>,
}

impl LieElement {
    pub fn zero(arity: usize) -> Self {
        LieElement { arity, terms: LinComb::zero() }
    }

    /// `e_1 ∈ Lie(1)`.
    pub fn letter() -> Self {
        LieElement { arity: 1, terms: LinComb::basis(vec![0]) }
    }

    /// `[e_1, e_2]`.
    pub fn bracket_of_letters() -> Self {
        lie_expand(&BracketTree::br(BracketTree::letter(0), BracketTree::letter(1)), 2).unwrap()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        LieElement { arity: self.arity, terms: self.terms.sum(&other.terms) }
    }

    pub fn scaled(&self, c: &Q) -> Self {
        LieElement { arity: self.arity, terms: self.terms.scaled(c) }
    }

    /// Coordinates in the left-normed basis `[[…[e_1, e_{σ2}], …], e_{σn}]`: the
    /// coefficient of `σ` is the coefficient of the word `0 σ2 … σn`.
    pub fn left_normed_coords(&self) -> Vec<(Vec<usize>, Q)> {
        self.terms
            .iter()
            .filter(|(w, _)| w.first() == Some(&0))
            .map(|(w, c)| (w.iter().map(|&x| x as usize).collect(), c.clone()))
            .collect()
    }

    /// True when the word combination is a Lie element (equals its left-normed rewrite).
    pub fn is_lie(&self) -> bool {
        if self.arity == 0 {
            return self.terms.is_zero();
        }
        let mut rebuilt = LinComb::zero();
        for (order, c) in self.left_normed_coords() {
            rebuilt.add_scaled(&BracketTree::left_normed(&order).expand_raw(), &c);
        }
        rebuilt == self.terms
    }

    /// Permutes letters: `k ↦ ρ(k)`.
    pub fn relabeled(&self, rho: &[usize]) -> Self {
        LieElement { arity: self.arity, terms: self.terms.map_keys(|w| w.iter().map(|&k| rho[k as usize] as u8).collect()) }
    }
}

/// Expands a bracket monomial in which each letter `0..n` occurs exactly once.
pub fn lie_expand(tree: &BracketTree, n: usize) -> Result<LieElement> {
    let mut ls = Vec::new();
    tree.letters(&mut ls);
    let mut sorted = ls.clone();
    sorted.sort();
    if sorted != (0..n as u8).collect::<Vec<_>>() {
        return Err(Error::Input(format!("bracket monomial must use each of {n} letters once, got {ls:?}")));
    }
    Ok(LieElement { arity: n, terms: tree.expand_raw() })
}

/// Operadic composition in `Lie` by word substitution.
pub fn lie_compose(psi: &LieElement, chis: &[&LieElement]) -> Result<LieElement> {
    if chis.len() != psi.arity {
        return Err(Error::Input(format!("Lie composition of arity {} with {} inputs", psi.arity, chis.len())));
    }
    let arities: Vec<usize> = chis.iter().map(|c| c.arity).collect();
    let mut out = LinComb::zero();
    for (w, c) in psi.terms.iter() {
        let lists: Vec<Vec<(&Word, &Q)>> = chis.iter().map(|x| x.terms.iter().collect()).collect();
        for choice in lists.iter().map(|v| v.iter()).multi_cartesian_product() {
            let us: Vec<&Word> = choice.iter().map(|(u, _)| *u).collect();
            let coef = choice.iter().fold(c.clone(), |acc, (_, d)| acc * *d);
            out.add_term(substitute_word(w, &us, &arities), coef);
        }
    }
    Ok(LieElement { arity: arities.iter().sum(), terms: out })
}

/// All full binary bracketings of all orderings of `n` letters.
pub fn all_bracket_monomials(n: usize) -> Vec<BracketTree> {
    fn trees(letters: &[usize]) -> Vec<BracketTree> {
        if letters.len() == 1 {
            return vec![BracketTree::letter(letters[0])];
        }
        let mut out = Vec::new();
        for split in 1..letters.len() {
            for l in trees(&letters[..split]) {
                for r in trees(&letters[split..]) {
                    out.push(BracketTree::br(l.clone(), r));
                }
            }
        }
        out
    }
    let mut out = Vec::new();
    for perm in (0..n).permutations(n) {
        out.extend(trees(&perm));
    }
    out
}

/// `dim Lie(n)`, computed as the rank of the expansions of all bracket monomials.
pub fn lie_dim(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Input("arity must be at least 1".into()));
    }
    let words: Vec<Word> = (0..n as u8).permutations(n).collect();
    let index: BTreeMap<&Word, usize> = words.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let mut e = Echelon::new(false);
    for t in all_bracket_monomials(n) {
        let v: SparseVec = lie_expand(&t, n)?.terms.iter().map(|(w, c)| (index[w], c.clone())).collect();
        e.insert(&v);
    }
    Ok(e.rank())
}

/// Jacobiator, in one of the two bracket conventions for the Jacobi identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JacobiForm {
    /// `[e₁,[e₂,e₃]] + [e₂,[e₃,e₁]] + [e₃,[e₁,e₂]]`.
    Cyclic,
    /// `[e₁,[e₂,e₃]] − [e₂,[e₁,e₃]] − [[e₁,e₂],e₃]`.
    Derivation,
}

impl JacobiForm {
    /// The corresponding element of `Lie(3)` (zero by the Jacobi identity) as a sum of
    /// signed bracket monomials.
    pub fn monomials(&self) -> Vec<(BracketTree, Q)> {
        use BracketTree as T;
        let l = T::letter;
        match self {
            JacobiForm::Cyclic => vec![
                (T::br(l(0), T::br(l(1), l(2))), Q::one()),
                (T::br(l(1), T::br(l(2), l(0))), Q::one()),
                (T::br(l(2), T::br(l(0), l(1))), Q::one()),
            ],
            JacobiForm::Derivation => vec![
                (T::br(l(0), T::br(l(1), l(2))), Q::one()),
                (T::br(l(1), T::br(l(0), l(2))), -Q::one()),
                (T::br(T::br(l(0), l(1)), l(2)), -Q::one()),
            ],
        }
    }
}

/// The jacobiator `j ∈ 𝒴(3)^0` built from the cocycle `c` by operadic composition.
pub fn jacobiator(c: &YElement, form: JacobiForm) -> Result<YElement> {
    let unit = y_unit(c.levels);
    let inner_right = y_compose(c, &[&unit, c])?; // [e1,[e2,e3]]
    match form {
        JacobiForm::Cyclic => {
            let r1 = y_permute(&inner_right, &[1, 2, 0])?;
            let r2 = y_permute(&r1, &[1, 2, 0])?;
            inner_right.add(&r1)?.add(&r2)
        }
        JacobiForm::Derivation => {
            let swapped = y_permute(&inner_right, &[1, 0, 2])?; // [e2,[e1,e3]]
            let inner_left = y_compose(c, &[c, &unit])?; // [[e1,e2],e3]
            inner_right.sub(&swapped)?.sub(&inner_left)
        }
    }
}

/// Cone contraction of `Z([m])` towards vertex 0: `(v_0..v_l) ↦ (0, v_0..v_l)`.
fn cone(p: &MonotoneMap) -> MonotoneMap {
    let mut vals = vec![0usize];
    vals.extend(p.values());
    MonotoneMap::new(p.target(), vals).expect("cone of a monotone map is monotone")
}

/// Contracting homotopy `H` of `Z^{⊗n}([m])` with `dH + Hd = 1 - π`, where `π` sends every
/// tuple of vertices to the tuple of vertex 0 and kills everything else.
pub fn tensor_contraction(t: &[MonotoneMap]) -> Vec<Tuple> {
    let mut out = Vec::new();
    let m = t[0].target();
    let zero = MonotoneMap::vertex(m, 0);
    for i in 0..t.len() {
        let mut t2: Tuple = Vec::with_capacity(t.len());
        t2.extend(std::iter::repeat_n(zero.clone(), i));
        t2.push(cone(&t[i]));
        t2.extend(t[i + 1..].iter().cloned());
        out.push(t2);
        if t[i].source() > 0 {
            break;
        }
    }
    out
}

/// Solves `d j' = j` for a degree-0 cocycle `j` with vanishing augmentation, level by
/// level using the contraction of `Z^{⊗n}([m])`.
pub fn contract_cocycle<L: Ord + Clone>(j: &OpElement<L>) -> Result<OpElement<L>> {
    if j.degree != 0 {
        return Err(Error::Input(format!("contraction solver expects degree 0, got {}", j.degree)));
    }
    let mut jp: OpElement<L> = OpElement::zero(j.arity, -1, j.levels);
    let mut by_level: BTreeMap<usize, LinComb<(Tuple, L)>> = BTreeMap::new();
    for ((m, t, l), c) in j.terms.iter() {
        by_level.entry(*m).or_default().add_term((t.clone(), l.clone()), c.clone());
    }
    let mut prev: LinComb<(Tuple, L)> = LinComb::zero();
    for m in 0..=j.levels {
        let mut r = by_level.remove(&m).unwrap_or_default();
        if m > 0 {
            // subtract Σ_i (-1)^i δ_i j'_{m-1}
            for ((t, l), c) in prev.iter() {
                for i in 0..=m {
                    let d = face(m, i).unwrap();
                    let t2: Tuple = t.iter().map(|p| d.after(p)).collect();
                    r.add_term((t2, l.clone()), -(c * sign(i as i64)));
                }
            }
        }
        let mut cur = LinComb::zero();
        for ((t, l), c) in r.iter() {
            for t2 in tensor_contraction(t) {
                cur.add_term((t2, l.clone()), c.clone());
            }
        }
        for ((t, l), c) in cur.iter() {
            jp.terms.add_term((m, t.clone(), l.clone()), c.clone());
        }
        prev = cur;
    }
    let check = jp.diff();
    if check.terms != j.terms {
        return Err(Error::Truncation("contraction did not produce a primitive; the cocycle has nonzero augmentation".into()));
    }
    Ok(jp)
}

/// Smart truncation `τ≤0`: degrees below 0 unchanged, degree 0 replaced by the cocycles.
pub fn truncate0(c: &FiniteComplex) -> Result<FiniteComplex> {
    if c.lo() > 0 {
        return Err(Error::Input("complex has no nonpositive degrees".into()));
    }
    let mut dims = Vec::new();
    let mut diffs = Vec::new();
    let kernel = c.d(0).kernel();
    for p in c.lo()..=0 {
        dims.push(if p == 0 { kernel.len() } else { c.dim(p) });
    }
    for p in c.lo()..0 {
        if p == -1 {
            // Express d^{-1} in the kernel basis.
            let mut e = Echelon::new(true);
            for (i, z) in kernel.iter().enumerate() {
                e.insert_tagged(z, SparseVec::basis(i));
            }
            let d = c.d(-1);
            let cols = d
                .columns()
                .iter()
                .map(|col| e.express(col).ok_or_else(|| Error::Invariant("coboundary outside cocycles".into())))
                .collect::<Result<Vec<_>>>()?;
            diffs.push(QMatrix::from_columns(kernel.len(), cols)?);
        } else {
            diffs.push(c.d(p));
        }
    }
    FiniteComplex::new(c.lo(), dims, diffs)
}

/// Membership in `τ≤0 𝒴(n)`.
pub fn in_truncation0(x: &YElement) -> bool {
    x.degree < 0 || (x.degree == 0 && x.diff().is_zero())
}

/// The complex `𝒵(n)` over a given truncation.
pub fn z_operad_complex(n: usize, trunc: Truncation) -> Result<FiniteComplex> {
    let z = ZComplex::new(trunc.levels, trunc.depth);
    let t = TensorPower::new(&z, n, trunc.depth)?;
    Ok(hom_from_z(&t, trunc)?.complex)
}

/// Cohomology ranks of `𝒵(n)` in a window.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ConcentrationReport {
    pub arity: usize,
    pub max_degree: usize,
    pub window: (i64, i64),
    pub levels: usize,
    pub depth: usize,
    /// `(degree, rank)` in increasing degree.
    pub ranks: Vec<(i64, usize)>,
    pub pass: bool,
}

/// Computes `H^d(𝒵(n))` for `d` in `window ⊆ [-(D-2), 0]`.
///
/// The truncation keeps tensor degrees down to `-D` and components up to level
/// `D + lo - 1`, which makes every degree of the window exact.
pub fn check_concentration(n: usize, max_degree: usize, window: (i64, i64)) -> Result<ConcentrationReport> {
    let (lo, hi) = window;
    if n == 0 {
        return Err(Error::Input("arity must be at least 1".into()));
    }
    if lo > hi || hi > 0 || lo < 2 - max_degree as i64 {
        return Err(Error::Input(format!("window {lo}..{hi} outside the stable range [{}, 0]", 2 - max_degree as i64)));
    }
    let trunc = Truncation::for_window(max_degree, lo)?;
    let c = z_operad_complex(n, trunc)?;
    let ranks: Vec<(i64, usize)> = (lo..=hi).map(|d| (d, c.cohomology_at(d).0)).collect();
    let pass = ranks.iter().all(|&(d, r)| if d == 0 { r == 1 } else { r == 0 });
    Ok(ConcentrationReport { arity: n, max_degree, window, levels: trunc.levels, depth: trunc.depth, ranks, pass })
}

/// `ε(γ(x; ys))` vs `γ(ε(x); ε(ys))` helper: augmentation of a composite.
pub fn augment_unchecked(x: &YElement) -> LieElement {
    level_zero_part(x)
}

/// Zero check on a Lie element used by callers that only need a boolean.
pub fn lie_is_zero(x: &LieElement) -> bool {
    x.terms.iter().all(|(_, c)| c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_expansion() {
        let b = LieElement::bracket_of_letters();
        assert_eq!(b.terms, [(vec![0, 1], Q::one()), (vec![1, 0], -Q::one())].into_iter().collect());
    }

    #[test]
    fn jacobi_expansions_vanish() {
        for form in [JacobiForm::Cyclic, JacobiForm::Derivation] {
            let mut acc = LieElement::zero(3);
            for (t, c) in form.monomials() {
                acc = acc.add(&lie_expand(&t, 3).unwrap().scaled(&c));
            }
            assert!(acc.is_zero(), "{form:?}");
        }
    }

    #[test]
    fn repeated_letter_rejected() {
        let t = BracketTree::br(BracketTree::letter(0), BracketTree::letter(0));
        assert!(lie_expand(&t, 2).is_err());
    }

    #[test]
    fn aw_level_one() {
        let x = aw(1);
        let c1 = x.component(1);
        let a = (vec![MonotoneMap::new(1, vec![0]).unwrap(), MonotoneMap::identity(1)], ());
        let b = (vec![MonotoneMap::identity(1), MonotoneMap::new(1, vec![1]).unwrap()], ());
        assert_eq!(c1, [(a, Q::one()), (b, Q::one())].into_iter().collect());
    }

    #[test]
    fn unit_and_aw_are_cocycles() {
        assert!(z_unit(5).diff().is_zero());
        assert!(aw(5).diff().is_zero());
        assert!(aw_cocycle(5).diff().is_zero());
    }

    #[test]
    fn augmentation_of_cocycle() {
        assert_eq!(augment(&aw_cocycle(3)).unwrap(), LieElement::bracket_of_letters());
        assert_eq!(augment(&y_unit(3)).unwrap(), LieElement::letter());
    }

    #[test]
    fn small_lie_dims() {
        assert_eq!(lie_dim(1).unwrap(), 1);
        assert_eq!(lie_dim(3).unwrap(), 2);
        assert_eq!(lie_dim(4).unwrap(), 6);
    }

    #[test]
    fn window_outside_stable_range_is_rejected() {
        assert!(check_concentration(1, 5, (-4, 0)).is_err());
        assert!(check_concentration(1, 5, (-3, 1)).is_err());
    }
}

