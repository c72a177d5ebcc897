//! Translation-invariant coefficient calculus: conformal algebras with `(n)`-products,
//! polynomial-valued `*`-operations, vertex algebra `(p)`-products, the Jacobi, skew and
//! Borcherds identities, and their secondary (homotopy) versions.
//!
//! Conventions. Elements of a conformal algebra are combinations of `∂^k g` for
//! generators `g`, encoded as index `k * dim + g`. Products follow
//! `(∂a)_(n)b = -n a_(n-1)b` and `a_(n)∂b = ∂(a_(n)b) + n a_(n-1)b`.
//! A `*`-operation in `n` slots takes values in `V ⊗ k[∂_0, ..., ∂_{n-2}]`; the last slot
//! variable is eliminated by `x ⊗ ∂_{n-1} = ∂x ⊗ 1 - Σ_{j<n-1} x ⊗ ∂_j`. The bracket is
//! encoded as `{a, b} = Σ_n a_(n)b ⊗ (-∂_0)^n / n!`, and coefficients are always read off
//! at the divided powers `(-∂_0)^m/m! (-∂_1)^n/n!`.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin::{binom, q, sign, LinComb, QMatrix, SparseVec, Q};
use crate::operad::{BracketTree, Word};

/// `n!` as a rational.
pub fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(Q::one(), |acc, k| acc * q(k))
}

/// Falling factorial `n (n-1) ... (n-k+1)`.
fn falling(n: u32, k: u32) -> Q {
    (0..k).fold(Q::one(), |acc, i| acc * q(n as i64 - i as i64))
}

/// Human-readable form of a vector, with names for basis indices.
pub fn fmt_vec(v: &SparseVec, name: impl Fn(usize) -> String) -> String {
    if v.is_zero() {
        return "0".into();
    }
    v.iter().map(|(i, c)| format!("{}*{}", crate::exactlin::fmt_q(c), name(*i))).join(" + ")
}

/// Conformal algebra generated over `k[∂]` by finitely many generators, some of them
/// central (annihilated by `∂` and by all products).
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalAlgebra {
    names: Vec<String>,
    central: Vec<bool>,
    degrees: Vec<i64>,
    /// `g_(n)h` for `n = 0..len`, values in the encoded basis.
    table: BTreeMap<(usize, usize), Vec<SparseVec>>,
    differential: Option<QMatrix>,
}

impl ConformalAlgebra {
    /// Builds an algebra from its generator products; trailing zero products are dropped.
    pub fn new(names: Vec<String>, central: Vec<bool>, table: BTreeMap<(usize, usize), Vec<SparseVec>>) -> Result<Self> {
        let n = names.len();
        if central.len() != n {
            return Err(Error::Input("central flags do not match generators".into()));
        }
        let mut alg = ConformalAlgebra { names, central, degrees: vec![0; n], table: BTreeMap::new(), differential: None };
        for ((a, b), mut vals) in table {
            if a >= n || b >= n {
                return Err(Error::Input(format!("product ({a}, {b}) refers to a missing generator")));
            }
            for v in vals.iter_mut() {
                *v = alg.normalize(v);
            }
            while vals.last().is_some_and(|v| v.is_zero()) {
                vals.pop();
            }
            if vals.is_empty() {
                continue;
            }
            if alg.central[a] || alg.central[b] {
                return Err(Error::Invariant(format!(
                    "central generator {} has a nonzero product with {}",
                    if alg.central[a] { &alg.names[a] } else { &alg.names[b] },
                    if alg.central[a] { &alg.names[b] } else { &alg.names[a] }
                )));
            }
            alg.table.insert((a, b), vals);
        }
        Ok(alg)
    }

    /// Adds a grading and a differential on generators (extended `∂`-linearly).
    pub fn with_differential(mut self, degrees: Vec<i64>, d: QMatrix) -> Result<Self> {
        if degrees.len() != self.dim() || d.rows() != self.dim() || d.cols() != self.dim() {
            return Err(Error::Input("differential or degrees do not match generators".into()));
        }
        for (j, col) in d.columns().iter().enumerate() {
            for (i, _) in col.iter() {
                if degrees[*i] != degrees[j] + 1 {
                    return Err(Error::Input(format!("differential sends {} to {} against the grading", self.names[j], self.names[*i])));
                }
            }
        }
        if !d.mul(&d)?.is_zero() {
            return Err(Error::Invariant("differential does not square to zero".into()));
        }
        self.degrees = degrees;
        self.differential = Some(d);
        if let Some(w) = self.derivation_violation() {
            return Err(Error::Invariant(w));
        }
        Ok(self)
    }

    /// Abelian algebra on `n` generators.
    pub fn abelian(n: usize) -> Self {
        ConformalAlgebra::new((0..n).map(|i| format!("a{i}")).collect(), vec![false; n], BTreeMap::new()).unwrap()
    }

    /// Virasoro algebra `L, C` with `L_(0)L = ∂L`, `L_(1)L = 2L`, `L_(3)L = (c/2) C`.
    pub fn virasoro(c: Q) -> Self {
        let l = SparseVec::basis(0);
        let del_l = SparseVec::basis(2); // ∂L with dim 2
        let vals = vec![del_l, l.scaled(&q(2)), SparseVec::zero(), SparseVec::basis(1).scaled(&(c / q(2)))];
        ConformalAlgebra::new(vec!["L".into(), "C".into()], vec![false, true], [((0, 0), vals)].into_iter().collect()).unwrap()
    }

    /// Current algebra of a Lie algebra with an invariant symmetric form, with central `C`:
    /// `a_(0)b = [a, b]`, `a_(1)b = (a|b) C`.
    pub fn current(names: &[&str], bracket: &[Vec<SparseVec>], form: &QMatrix) -> Result<Self> {
        let n = names.len();
        let mut all: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        all.push("C".into());
        let mut table = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                let p0 = bracket[a][b].clone();
                let p1 = SparseVec::term(n, form.get(a, b));
                table.insert((a, b), vec![p0, p1]);
            }
        }
        let mut central = vec![false; n];
        central.push(true);
        Self::new(all, central, table)
    }

    /// Fills in `b_(n)a = -Σ_j (-1)^{n+j} ∂^j/j! (a_(n+j)b)` for every pair given in one
    /// order only.
    pub fn complete_by_skew(self) -> Result<Self> {
        let mut table = self.table.clone();
        for (&(a, b), row) in &self.table {
            if a == b || self.table.contains_key(&(b, a)) {
                continue;
            }
            let (x, y) = (self.gen(a), self.gen(b));
            let len = row.len() as u32;
            let vals = (0..len)
                .map(|n| {
                    let mut out = SparseVec::zero();
                    for j in 0..len - n {
                        out.add_scaled(&self.partial(&self.product(&x, &y, n + j), j), &(-sign((n + j) as i64) / factorial(j)));
                    }
                    out
                })
                .collect();
            table.insert((b, a), vals);
        }
        let out = ConformalAlgebra::new(self.names.clone(), self.central.clone(), table)?;
        match self.differential {
            Some(d) => out.with_differential(self.degrees, d),
            None => Ok(out),
        }
    }

    /// Random finite conformal data: `gens` generators (the last one central when
    /// `with_central`), products `a_(n)b` for `n < max_locality` with small integer
    /// coefficients on `∂^k g`, `k ≤ 1`. With `skew`, only one order of each pair is drawn
    /// and the other is completed by skew symmetry; otherwise all pairs are independent.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, gens: usize, max_locality: u32, with_central: bool, skew: bool) -> Self {
        let names: Vec<String> = (0..gens).map(|i| format!("g{i}")).collect();
        let mut central = vec![false; gens];
        if with_central && gens > 1 {
            central[gens - 1] = true;
        }
        let free: Vec<usize> = (0..gens).filter(|&g| !central[g]).collect();
        let mut table = BTreeMap::new();
        for &a in &free {
            for &b in &free {
                if skew && b < a {
                    continue;
                }
                let len = rng.gen_range(0..=max_locality);
                let row: Vec<SparseVec> = (0..len)
                    .map(|_| {
                        let mut v = SparseVec::zero();
                        for g in 0..gens {
                            for k in 0..=usize::from(!central[g]) {
                                if rng.gen_bool(0.4) {
                                    v.add_term(k * gens + g, q(rng.gen_range(-2i64..=2)));
                                }
                            }
                        }
                        v
                    })
                    .collect();
                table.insert((a, b), row);
            }
        }
        let v = ConformalAlgebra::new(names, central, table).expect("random data is well formed");
        if skew {
            v.complete_by_skew().expect("completion keeps the data well formed")
        } else {
            v
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn is_central(&self, g: usize) -> bool {
        self.central[g]
    }

    pub fn degree(&self, g: usize) -> i64 {
        self.degrees[g]
    }

    pub fn differential(&self) -> Option<&QMatrix> {
        self.differential.as_ref()
    }

    pub fn table(&self) -> &BTreeMap<(usize, usize), Vec<SparseVec>> {
        &self.table
    }

    pub fn encode(&self, power: u32, g: usize) -> usize {
        power as usize * self.dim() + g
    }

    pub fn decode(&self, idx: usize) -> (u32, usize) {
        ((idx / self.dim()) as u32, idx % self.dim())
    }

    pub fn gen(&self, g: usize) -> SparseVec {
        SparseVec::basis(g)
    }

    pub fn name_of(&self, idx: usize) -> String {
        let (p, g) = self.decode(idx);
        match p {
            0 => self.names[g].clone(),
            1 => format!("∂{}", self.names[g]),
            _ => format!("∂^{p}{}", self.names[g]),
        }
    }

    /// Drops `∂`-multiples of central generators.
    pub fn normalize(&self, v: &SparseVec) -> SparseVec {
        v.filter(|&i| {
            let (p, g) = self.decode(i);
            p == 0 || !self.central[g]
        })
    }

    /// `∂^k x`.
    pub fn partial(&self, x: &SparseVec, k: u32) -> SparseVec {
        let shifted = x.map_keys(|&i| i + k as usize * self.dim());
        self.normalize(&shifted)
    }

    /// Applies a matrix on generators to every `∂`-power separately.
    pub fn apply_powerwise(m: &QMatrix, x: &SparseVec, src_dim: usize, dst_dim: usize) -> SparseVec {
        let mut out = SparseVec::zero();
        for (i, c) in x.iter() {
            let (p, g) = (i / src_dim, i % src_dim);
            for (r, v) in m.column(g).iter() {
                out.add_term(p * dst_dim + r, c * v);
            }
        }
        out
    }

    /// Number of `n` with `g_(n)h` possibly nonzero.
    pub fn locality(&self, a: usize, b: usize) -> u32 {
        self.table.get(&(a, b)).map_or(0, |v| v.len() as u32)
    }

    pub fn gen_product(&self, a: usize, b: usize, n: u32) -> SparseVec {
        self.table.get(&(a, b)).and_then(|v| v.get(n as usize)).cloned().unwrap_or_default()
    }

    /// `x_(n) y` for arbitrary elements, via the `∂`-rules.
    pub fn product(&self, x: &SparseVec, y: &SparseVec, n: u32) -> SparseVec {
        let mut out = SparseVec::zero();
        for (ix, cx) in x.iter() {
            let (i, a) = self.decode(*ix);
            if i > n {
                continue;
            }
            let f1 = sign(i as i64) * falling(n, i);
            let n1 = n - i;
            for (iy, cy) in y.iter() {
                let (k, b) = self.decode(*iy);
                for j in 0..=k.min(n1) {
                    let z = self.gen_product(a, b, n1 - j);
                    if z.is_zero() {
                        continue;
                    }
                    let coef = cx * cy * &f1 * binom(k as i64, j) * falling(n1, j);
                    out.add_scaled(&self.partial(&z, k - j), &coef);
                }
            }
        }
        out
    }

    /// All products `x_(n) y` vanish for `n >= bound(x, y)`.
    pub fn bound(&self, x: &SparseVec, y: &SparseVec) -> u32 {
        let mut b = 0;
        for (ix, _) in x.iter() {
            let (i, a) = self.decode(*ix);
            for (iy, _) in y.iter() {
                let (k, g) = self.decode(*iy);
                let l = self.locality(a, g);
                if l > 0 {
                    b = b.max(l + i + k);
                }
            }
        }
        b
    }

    /// Applies the differential (zero if there is none).
    pub fn d(&self, x: &SparseVec) -> SparseVec {
        match &self.differential {
            Some(m) => Self::apply_powerwise(m, x, self.dim(), self.dim()),
            None => SparseVec::zero(),
        }
    }

    /// Witness for `d(a_(n)b) ≠ (da)_(n)b + (-1)^{|a|} a_(n)(db)`, if any.
    pub fn derivation_violation(&self) -> Option<String> {
        self.differential.as_ref()?;
        for a in 0..self.dim() {
            for b in 0..self.dim() {
                let (x, y) = (self.gen(a), self.gen(b));
                let (dx, dy) = (self.d(&x), self.d(&y));
                let bound = self.bound(&x, &y).max(self.bound(&dx, &y)).max(self.bound(&x, &dy));
                for n in 0..bound {
                    let lhs = self.d(&self.product(&x, &y, n));
                    let mut rhs = self.product(&dx, &y, n);
                    rhs.add_scaled(&self.product(&x, &dy, n), &sign(self.degrees[a]));
                    if lhs != rhs {
                        return Some(format!("d is not a derivation of {}_({n}){}", self.names[a], self.names[b]));
                    }
                }
            }
        }
        None
    }

    /// Raw value of a bracket monomial, one slot per letter and no variable eliminated.
    pub fn eval_tree(&self, tree: &BracketTree, inputs: &[&SparseVec]) -> LinComb<(Vec<u32>, usize)> {
        let slots = inputs.len();
        match tree {
            BracketTree::Letter(k) => inputs[*k as usize].iter().map(|(i, c)| ((vec![0; slots], *i), c.clone())).collect(),
            BracketTree::Bracket(l, r) => {
                let left_slots: Vec<usize> = l.leaves().into_iter().map(|x| x as usize).collect();
                let (rx, ry) = (self.eval_tree(l, inputs), self.eval_tree(r, inputs));
                let mut out = LinComb::zero();
                let mut powers: BTreeMap<u32, Vec<(Vec<u32>, Q)>> = BTreeMap::new();
                for ((p, xi), cx) in rx.iter() {
                    let xv = SparseVec::basis(*xi);
                    for ((pq, yi), cy) in ry.iter() {
                        let yv = SparseVec::basis(*yi);
                        for n in 0..self.bound(&xv, &yv) {
                            let z = self.product(&xv, &yv, n);
                            if z.is_zero() {
                                continue;
                            }
                            let expansion = powers.entry(n).or_insert_with(|| sum_power(&left_slots, n, slots, true));
                            for (alpha, ca) in expansion.iter() {
                                let exps: Vec<u32> = (0..slots).map(|s| p[s] + pq[s] + alpha[s]).collect();
                                let coef = cx * cy * ca;
                                for (zi, zc) in z.iter() {
                                    out.add_term((exps.clone(), *zi), &coef * zc);
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Eliminates the last slot variable, giving the canonical form.
    pub fn normalize_raw(&self, raw: &LinComb<(Vec<u32>, usize)>, arity: usize) -> PolyOp {
        let last = arity - 1;
        let others: Vec<usize> = (0..last).collect();
        let mut terms = LinComb::zero();
        for ((e, idx), c) in raw.iter() {
            let el = e[last];
            let head: Vec<u32> = e[..last].to_vec();
            if el == 0 {
                terms.add_term((head, *idx), c.clone());
                continue;
            }
            for k in 0..=el {
                let v = self.partial(&SparseVec::basis(*idx), k);
                if v.is_zero() {
                    continue;
                }
                let rest = el - k;
                let coef = c * binom(el as i64, k) * factorial(rest);
                for (alpha, ca) in sum_power(&others, rest, last, true) {
                    let exps: Vec<u32> = (0..last).map(|s| head[s] + alpha[s]).collect();
                    for (vi, vc) in v.iter() {
                        terms.add_term((exps.clone(), *vi), &coef * &ca * vc);
                    }
                }
            }
        }
        PolyOp { arity, terms }
    }

    /// `{a, b}`.
    pub fn star_bracket(&self, a: &SparseVec, b: &SparseVec) -> PolyOp {
        let t = BracketTree::br(BracketTree::letter(0), BracketTree::letter(1));
        self.normalize_raw(&self.eval_tree(&t, &[a, b]), 2)
    }

    /// One of the three composites of the bracket with itself in three slots.
    pub fn double_bracket(&self, a: &SparseVec, b: &SparseVec, c: &SparseVec, shape: Shape) -> PolyOp {
        let l = BracketTree::letter;
        let t = match shape {
            Shape::ABC => BracketTree::br(l(0), BracketTree::br(l(1), l(2))),
            Shape::BAC => BracketTree::br(l(1), BracketTree::br(l(0), l(2))),
            Shape::ABThenC => BracketTree::br(BracketTree::br(l(0), l(1)), l(2)),
        };
        self.normalize_raw(&self.eval_tree(&t, &[a, b, c]), 3)
    }

    /// Value of a Lie element (left-normed extraction) as a canonical polynomial operation.
    pub fn eval_lie(&self, lie: &LinComb<Word>, inputs: &[&SparseVec]) -> PolyOp {
        let n = inputs.len();
        let mut raw = LinComb::zero();
        for (w, c) in lie.iter() {
            if w.first() != Some(&0) {
                continue;
            }
            let order: Vec<usize> = w.iter().map(|&x| x as usize).collect();
            raw.add_scaled(&self.eval_tree(&BracketTree::left_normed(&order), inputs), c);
        }
        self.normalize_raw(&raw, n)
    }
}

/// Shapes of the double bracket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Shape {
    /// `a{b{c}}`
    ABC,
    /// `b{a{c}}`
    BAC,
    /// `{ab}{c}`
    ABThenC,
}

/// `(±Σ_{j ∈ slots} ∂_j)^n / n!` as a list of exponent vectors over `nslots` variables.
fn sum_power(slots: &[usize], n: u32, nslots: usize, negate: bool) -> Vec<(Vec<u32>, Q)> {
    let mut out = Vec::new();
    let sg = if negate { sign(n as i64) } else { Q::one() };
    if slots.is_empty() {
        if n == 0 {
            out.push((vec![0; nslots], Q::one()));
        }
        return out;
    }
    fn rec(slots: &[usize], left: u32, cur: &mut Vec<u32>, denom: Q, sg: &Q, out: &mut Vec<(Vec<u32>, Q)>) {
        if slots.len() == 1 {
            cur[slots[0]] = left;
            out.push((cur.clone(), sg / (denom * factorial(left))));
            cur[slots[0]] = 0;
            return;
        }
        for k in 0..=left {
            cur[slots[0]] = k;
            rec(&slots[1..], left - k, cur, &denom * factorial(k), sg, out);
        }
        cur[slots[0]] = 0;
    }
    let mut cur = vec![0; nslots];
    rec(slots, n, &mut cur, Q::one(), &sg, &mut out);
    out
}

/// Canonical polynomial-valued operation: `Σ x ⊗ ∂^α` with `α` over the first
/// `arity - 1` slots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyOp {
    pub arity: usize,
    pub terms: LinComb<(Vec<u32>, usize)>,
}

impl PolyOp {
    pub fn zero(arity: usize) -> Self {
        PolyOp { arity, terms: LinComb::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    pub fn add(&self, other: &PolyOp) -> PolyOp {
        PolyOp { arity: self.arity, terms: self.terms.sum(&other.terms) }
    }

    pub fn scaled(&self, c: &Q) -> PolyOp {
        PolyOp { arity: self.arity, terms: self.terms.scaled(c) }
    }

    /// Highest exponent of any slot variable.
    pub fn max_exponent(&self) -> u32 {
        self.terms.keys().flat_map(|(e, _)| e.iter().copied()).max().unwrap_or(0)
    }

    /// Coefficient at `Π (-∂_i)^{k_i} / k_i!`.
    pub fn coefficient(&self, ks: &[u32]) -> SparseVec {
        assert_eq!(ks.len() + 1, self.arity, "probe length must be arity - 1");
        let scale = ks.iter().fold(Q::one(), |acc, &k| acc * factorial(k) * sign(k as i64));
        let mut out = SparseVec::zero();
        for ((e, idx), c) in self.terms.iter() {
            if e.as_slice() == ks {
                out.add_term(*idx, c * &scale);
            }
        }
        out
    }

    /// Moves the variable of slot `i` to slot `rho[i]` and re-eliminates the last slot.
    pub fn permute_slots(&self, alg: &ConformalAlgebra, rho: &[usize]) -> PolyOp {
        let n = self.arity;
        let mut raw = LinComb::zero();
        for ((e, idx), c) in self.terms.iter() {
            let mut ne = vec![0; n];
            for (i, &x) in e.iter().enumerate() {
                ne[rho[i]] = x;
            }
            raw.add_term((ne, *idx), c.clone());
        }
        alg.normalize_raw(&raw, n)
    }
}

/// Composition of polynomial operations: the outer operation is applied to the values of
/// the inner ones, and its slot variable `∂_i` becomes the sum of the variables of the
/// slots feeding input `i`.
pub fn compose_polyops(alg: &ConformalAlgebra, outer: &dyn Fn(&[&SparseVec]) -> PolyOp, inners: &[PolyOp]) -> PolyOp {
    let arities: Vec<usize> = inners.iter().map(|p| p.arity).collect();
    let total: usize = arities.iter().sum();
    let offsets: Vec<usize> = arities.iter().scan(0, |acc, &a| {
        let o = *acc;
        *acc += a;
        Some(o)
    }).collect();
    let mut raw = LinComb::zero();
    let lists: Vec<Vec<(&(Vec<u32>, usize), &Q)>> = inners.iter().map(|p| p.terms.iter().collect()).collect();
    for choice in lists.iter().map(|v| v.iter()).multi_cartesian_product() {
        let xs: Vec<SparseVec> = choice.iter().map(|((_, idx), _)| SparseVec::basis(*idx)).collect();
        let refs: Vec<&SparseVec> = xs.iter().collect();
        let mut base = vec![0u32; total];
        let mut coef = Q::one();
        for (i, ((e, _), c)) in choice.iter().enumerate() {
            for (s, &x) in e.iter().enumerate() {
                base[offsets[i] + s] += x;
            }
            coef *= *c;
        }
        let val = outer(&refs);
        for ((r, z), cz) in val.terms.iter() {
            // substitute ∂_i -> Σ_{j in block i} ∂_j, i.e. r_i! * (Σ ∂_j)^{r_i}/r_i!
            let mut polys: Vec<(Vec<u32>, Q)> = vec![(base.clone(), &coef * cz)];
            for (i, &ri) in r.iter().enumerate() {
                if ri == 0 {
                    continue;
                }
                let block: Vec<usize> = (offsets[i]..offsets[i] + arities[i]).collect();
                let expansion = sum_power(&block, ri, total, false);
                let f = factorial(ri);
                let mut next = Vec::new();
                for (e, c) in &polys {
                    for (a, ca) in &expansion {
                        let ne: Vec<u32> = e.iter().zip(a).map(|(x, y)| x + y).collect();
                        next.push((ne, c * ca * &f));
                    }
                }
                polys = next;
            }
            for (e, c) in polys {
                raw.add_term((e, *z), c);
            }
        }
    }
    alg.normalize_raw(&raw, total)
}

/// One failed identity instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub inputs: Vec<String>,
    pub indices: Vec<i64>,
    pub residual: String,
}

/// Outcome of a family of identity checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub checked: usize,
    pub failures: Vec<Witness>,
}

impl IdentityReport {
    fn new(identity: &str) -> Self {
        IdentityReport { identity: identity.into(), checked: 0, failures: Vec::new() }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, inputs: Vec<String>, indices: Vec<i64>, residual: &SparseVec, name: &dyn Fn(usize) -> String) {
        self.checked += 1;
        if !residual.is_zero() {
            self.failures.push(Witness { inputs, indices, residual: fmt_vec(residual, name) });
        }
    }
}

/// `[a_(m), b_(n)]c - Σ_j C(m,j) (a_(j)b)_(m+n-j) c`.
pub fn jacobi_residual(v: &ConformalAlgebra, a: &SparseVec, b: &SparseVec, c: &SparseVec, m: u32, n: u32) -> SparseVec {
    let mut r = v.product(a, &v.product(b, c, n), m);
    r.sub_assign(&v.product(b, &v.product(a, c, m), n));
    for j in 0..=m {
        let ab = v.product(a, b, j);
        if !ab.is_zero() {
            r.add_scaled(&v.product(&ab, c, m + n - j), &-binom(m as i64, j));
        }
    }
    r
}

/// The generating-function form of Jacobi: `a{b{c}} - b{a{c}} - {ab}{c}`.
pub fn jacobi_polyop(v: &ConformalAlgebra, a: &SparseVec, b: &SparseVec, c: &SparseVec) -> PolyOp {
    v.double_bracket(a, b, c, Shape::ABC)
        .add(&v.double_bracket(a, b, c, Shape::BAC).scaled(&-Q::one()))
        .add(&v.double_bracket(a, b, c, Shape::ABThenC).scaled(&-Q::one()))
}

/// Result of the Jacobi check: coefficient residuals and the agreement of the
/// generating-function form with them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobiCheck {
    pub coefficients: IdentityReport,
    pub generating_function_agrees: bool,
    pub disagreements: Vec<Witness>,
}

impl JacobiCheck {
    pub fn pass(&self) -> bool {
        self.coefficients.pass() && self.generating_function_agrees
    }
}

/// Checks the commutator formula for all generator triples and `0 <= m <= max_m`,
/// `0 <= n <= max_n`, and compares every coefficient of the Jacobi polynomial operation
/// with the corresponding residual.
pub fn check_conformal_jacobi(v: &ConformalAlgebra, max_m: u32, max_n: u32) -> JacobiCheck {
    let mut rep = IdentityReport::new("commutator formula");
    let mut disagreements = Vec::new();
    let name = |i: usize| v.name_of(i);
    for (a, b, c) in itertools::iproduct!(0..v.dim(), 0..v.dim(), 0..v.dim()) {
        let (x, y, z) = (v.gen(a), v.gen(b), v.gen(c));
        let inputs = vec![v.names[a].clone(), v.names[b].clone(), v.names[c].clone()];
        let poly = jacobi_polyop(v, &x, &y, &z);
        let top = poly.max_exponent().max(max_m).max(max_n);
        for (m, n) in itertools::iproduct!(0..=top, 0..=top) {
            let r = jacobi_residual(v, &x, &y, &z, m, n);
            if m <= max_m && n <= max_n {
                rep.record(inputs.clone(), vec![m as i64, n as i64], &r, &name);
            }
            let coeff = poly.coefficient(&[m, n]);
            if coeff != r {
                disagreements.push(Witness { inputs: inputs.clone(), indices: vec![m as i64, n as i64], residual: fmt_vec(&coeff.diff(&r), name) });
            }
        }
    }
    JacobiCheck { coefficients: rep, generating_function_agrees: disagreements.is_empty(), disagreements }
}

/// Outcome of the skew-symmetry check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkewCheck {
    /// `{b, a} = -σ{a, b}` at the level of polynomial operations.
    pub polyop: IdentityReport,
    /// `a_(n)b = -Σ_j (-1)^{n+j} ∂^j/j! (b_(n+j)a)`, the identity induced by the above.
    pub derived: IdentityReport,
    /// `a_(n)b = (-1)^{n+1} Σ_j ∂^j/j! (b_(n+j)a)`, compared for reference.
    pub alternate: IdentityReport,
    pub derived_formula: String,
}

impl SkewCheck {
    pub fn pass(&self) -> bool {
        self.polyop.pass() && self.derived.pass()
    }
}

/// Right-hand side `Σ_j s(n, j) ∂^j/j! (b_(n+j)a)` used by both skew formulas.
fn skew_sum(v: &ConformalAlgebra, a: &SparseVec, b: &SparseVec, n: u32, with_j_sign: bool) -> SparseVec {
    let mut out = SparseVec::zero();
    let bound = v.bound(b, a);
    for j in 0..bound.saturating_sub(n) {
        let t = v.product(b, a, n + j);
        let s = if with_j_sign { sign(j as i64) } else { Q::one() };
        out.add_scaled(&v.partial(&t, j), &(s / factorial(j)));
    }
    out
}

/// Checks skew symmetry on all generator pairs.
pub fn check_skew(v: &ConformalAlgebra) -> SkewCheck {
    let mut polyop = IdentityReport::new("{b,a} = -σ{a,b}");
    let mut derived = IdentityReport::new("a_(n)b = -Σ_j (-1)^(n+j) ∂^(j)(b_(n+j)a)");
    let mut alternate = IdentityReport::new("a_(n)b = (-1)^(n+1) Σ_j ∂^(j)(b_(n+j)a)");
    let name = |i: usize| v.name_of(i);
    for (a, b) in itertools::iproduct!(0..v.dim(), 0..v.dim()) {
        let (x, y) = (v.gen(a), v.gen(b));
        let inputs = vec![v.names[a].clone(), v.names[b].clone()];
        let ba = v.star_bracket(&y, &x).permute_slots(v, &[1, 0]);
        let ab = v.star_bracket(&x, &y);
        let res = ba.add(&ab);
        polyop.checked += 1;
        if !res.is_zero() {
            polyop.failures.push(Witness { inputs: inputs.clone(), indices: vec![], residual: format!("{} terms", res.terms.len()) });
        }
        let bound = v.bound(&x, &y).max(v.bound(&y, &x));
        for n in 0..bound.max(1) {
            let lhs = v.product(&x, &y, n);
            let mut d = lhs.clone();
            d.add_scaled(&skew_sum(v, &x, &y, n, true), &sign(n as i64));
            derived.record(inputs.clone(), vec![n as i64], &d, &name);
            let mut p = lhs;
            p.add_scaled(&skew_sum(v, &x, &y, n, false), &-sign(n as i64 + 1));
            alternate.record(inputs.clone(), vec![n as i64], &p, &name);
        }
    }
    SkewCheck { polyop, derived, alternate, derived_formula: "a_(n)b = -Σ_j (-1)^(n+j) ∂^j/j! (b_(n+j)a)".into() }
}

/// Vertex algebra data: finitely many basis vectors and finitely supported `(p)`-products.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexAlgebraData {
    names: Vec<String>,
    degrees: Vec<i64>,
    table: BTreeMap<(usize, usize), BTreeMap<i64, SparseVec>>,
    differential: Option<QMatrix>,
}

impl VertexAlgebraData {
    pub fn new(names: Vec<String>, table: BTreeMap<(usize, usize), BTreeMap<i64, SparseVec>>) -> Result<Self> {
        let n = names.len();
        let mut clean = BTreeMap::new();
        for ((a, b), row) in table {
            if a >= n || b >= n {
                return Err(Error::Input(format!("product ({a}, {b}) refers to a missing basis vector")));
            }
            let row: BTreeMap<i64, SparseVec> = row.into_iter().filter(|(_, v)| !v.is_zero()).collect();
            if row.values().any(|v| v.keys().any(|&i| i >= n)) {
                return Err(Error::Input(format!("product ({a}, {b}) leaves the carrier")));
            }
            if !row.is_empty() {
                clean.insert((a, b), row);
            }
        }
        Ok(VertexAlgebraData { names, degrees: vec![0; n], table: clean, differential: None })
    }

    /// Commutative vertex algebra of a commutative algebra with a nilpotent derivation:
    /// `a_(-1-k) b = (∂^k a / k!) b` and `a_(n) b = 0` for `n >= 0`.
    pub fn from_commutative(names: Vec<String>, mult: &[Vec<SparseVec>], derivation: &QMatrix) -> Result<Self> {
        let n = names.len();
        let prod = |x: &SparseVec, y: &SparseVec| {
            let mut out = SparseVec::zero();
            for (i, a) in x.iter() {
                for (j, b) in y.iter() {
                    out.add_scaled(&mult[*i][*j], &(a * b));
                }
            }
            out
        };
        for (i, j) in itertools::iproduct!(0..n, 0..n) {
            if mult[i][j] != mult[j][i] {
                return Err(Error::Invariant(format!("multiplication not commutative on ({}, {})", names[i], names[j])));
            }
            let (ei, ej) = (SparseVec::basis(i), SparseVec::basis(j));
            let lhs = derivation.mul_vec(&mult[i][j])?;
            let rhs = prod(&derivation.mul_vec(&ei)?, &ej).sum(&prod(&ei, &derivation.mul_vec(&ej)?));
            if lhs != rhs {
                return Err(Error::Invariant(format!("∂ is not a derivation on ({}, {})", names[i], names[j])));
            }
            for k in 0..n {
                let ek = SparseVec::basis(k);
                if prod(&prod(&ei, &ej), &ek) != prod(&ei, &prod(&ej, &ek)) {
                    return Err(Error::Invariant(format!("multiplication not associative on ({}, {}, {})", names[i], names[j], names[k])));
                }
            }
        }
        let mut table: BTreeMap<(usize, usize), BTreeMap<i64, SparseVec>> = BTreeMap::new();
        let mut power = QMatrix::identity(n);
        let mut k = 0u32;
        while !power.is_zero() {
            if k as usize > n {
                return Err(Error::Input("derivation is not nilpotent".into()));
            }
            let f = factorial(k);
            for (a, b) in itertools::iproduct!(0..n, 0..n) {
                let da = power.column(a).scaled(&(Q::one() / &f));
                let v = prod(&da, &SparseVec::basis(b));
                if !v.is_zero() {
                    table.entry((a, b)).or_default().insert(-1 - k as i64, v);
                }
            }
            power = derivation.mul(&power)?;
            k += 1;
        }
        Self::new(names, table)
    }

    /// `k[x]/(x^{deg+1})` with `∂x^k = k x^{k+1}`.
    pub fn truncated_polynomials(deg: usize) -> Self {
        let n = deg + 1;
        let names = (0..n).map(|k| format!("x^{k}")).collect();
        let mult: Vec<Vec<SparseVec>> =
            (0..n).map(|i| (0..n).map(|j| if i + j < n { SparseVec::basis(i + j) } else { SparseVec::zero() }).collect()).collect();
        let d = QMatrix::from_triplets(n, n, (1..n - 1).map(|k| (k + 1, k, q(k as i64)))).unwrap();
        Self::from_commutative(names, &mult, &d).expect("truncated polynomial model is valid")
    }

    pub fn with_differential(mut self, degrees: Vec<i64>, d: QMatrix) -> Result<Self> {
        if degrees.len() != self.dim() || d.rows() != self.dim() || d.cols() != self.dim() {
            return Err(Error::Input("differential or degrees do not match the carrier".into()));
        }
        if !d.mul(&d)?.is_zero() {
            return Err(Error::Invariant("differential does not square to zero".into()));
        }
        self.degrees = degrees;
        self.differential = Some(d);
        let (lo, hi) = self.support();
        for (a, b) in itertools::iproduct!(0..self.dim(), 0..self.dim()) {
            let (x, y) = (SparseVec::basis(a), SparseVec::basis(b));
            for n in lo..hi {
                let lhs = self.d(&self.product(&x, &y, n));
                let mut rhs = self.product(&self.d(&x), &y, n);
                rhs.add_scaled(&self.product(&x, &self.d(&y), n), &sign(self.degrees[a]));
                if lhs != rhs {
                    return Err(Error::Invariant(format!("d is not a derivation of {}_({n}){}", self.names[a], self.names[b])));
                }
            }
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.degrees[i]
    }

    pub fn table(&self) -> &BTreeMap<(usize, usize), BTreeMap<i64, SparseVec>> {
        &self.table
    }

    pub fn d(&self, x: &SparseVec) -> SparseVec {
        match &self.differential {
            Some(m) => m.mul_vec(x).expect("shape checked"),
            None => SparseVec::zero(),
        }
    }

    /// `[lo, hi)` containing every `n` with a nonzero stored product.
    pub fn support(&self) -> (i64, i64) {
        let lo = self.table.values().filter_map(|r| r.keys().next().copied()).min();
        let hi = self.table.values().filter_map(|r| r.keys().next_back().copied()).max();
        match (lo, hi) {
            (Some(l), Some(h)) => (l, h + 1),
            _ => (0, 0),
        }
    }

    pub fn product(&self, x: &SparseVec, y: &SparseVec, n: i64) -> SparseVec {
        let mut out = SparseVec::zero();
        for (a, ca) in x.iter() {
            for (b, cb) in y.iter() {
                if let Some(v) = self.table.get(&(*a, *b)).and_then(|r| r.get(&n)) {
                    out.add_scaled(v, &(ca * cb));
                }
            }
        }
        out
    }

    /// Value of a Lie element at a chiral probe (see [`chiral_eval`]).
    pub fn eval_lie(&self, lie: &LinComb<Word>, inputs: &[&SparseVec], probe: &[i64]) -> Result<SparseVec> {
        chiral_eval(&|x, y, n| self.product(x, y, n), self.support(), lie, inputs, probe)
    }
}

/// Evaluates a Lie element, through its left-normed coordinates, on a chiral probe.
///
/// Arity 2, probe `[p]`: `[x_0, x_1]` gives `x_0 (p) x_1`. Arity 3, probe `[p, q, r]` standing
/// for `(t_0-t_1)^p (t_0-t_2)^q (t_1-t_2)^r`, with modes read at the position of `x_2`:
/// `[[x_0, x_1], x_2]` is `Σ_j C(q, j) (x_0 (p+j) x_1) (q+r-j) x_2`, and `[[x_0, x_2], x_1]`,
/// rewritten as `-[x_1, [x_0, x_2]]`, is `-(-1)^p Σ_j C(p, j) (-1)^j x_1 (p+r-j) (x_0 (q+j) x_2)`.
pub fn chiral_eval(
    prod: &dyn Fn(&SparseVec, &SparseVec, i64) -> SparseVec,
    support: (i64, i64),
    lie: &LinComb<Word>,
    inputs: &[&SparseVec],
    probe: &[i64],
) -> Result<SparseVec> {
    let mut out = SparseVec::zero();
    match (inputs.len(), probe) {
        (1, []) => {
            out.add_scaled(inputs[0], &lie.coeff(&vec![0]));
        }
        (2, [p]) => {
            let c = lie.coeff(&vec![0, 1]);
            if !c.is_zero() {
                out.add_scaled(&prod(inputs[0], inputs[1], *p), &c);
            }
        }
        (3, [p, q, r]) => {
            for (w, c) in lie.iter() {
                let v = match w.as_slice() {
                    [0, 1, 2] => left_normed3(prod, support, inputs[0], inputs[1], inputs[2], *p, *q, *r),
                    [0, 2, 1] => right_nested3(prod, support, inputs[1], inputs[0], inputs[2], *p, *r, *q).scaled(&-sign(*p)),
                    _ => continue,
                };
                out.add_scaled(&v, c);
            }
        }
        (n, pr) => return Err(Error::Input(format!("no chiral probe of length {} for arity {n}", pr.len()))),
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn left_normed3(
    prod: &dyn Fn(&SparseVec, &SparseVec, i64) -> SparseVec,
    (lo, hi): (i64, i64),
    x: &SparseVec,
    y: &SparseVec,
    z: &SparseVec,
    p: i64,
    q_: i64,
    r: i64,
) -> SparseVec {
    let mut out = SparseVec::zero();
    // X_(p+j)Y vanishes once p + j >= hi; the outer product once q + r - j < lo.
    let mut jmax = (hi - 1 - p).min(q_ + r - lo);
    if q_ >= 0 {
        jmax = jmax.min(q_);
    }
    for j in 0..=jmax.max(-1) {
        let xy = prod(x, y, p + j);
        if xy.is_zero() {
            continue;
        }
        out.add_scaled(&prod(&xy, z, q_ + r - j), &binom(q_, j as u32));
    }
    out
}

/// `Σ_j C(p, j) (-1)^j X_(p+q-j)(Y_(r+j) Z)`.
#[allow(clippy::too_many_arguments)]
fn right_nested3(
    prod: &dyn Fn(&SparseVec, &SparseVec, i64) -> SparseVec,
    (lo, hi): (i64, i64),
    x: &SparseVec,
    y: &SparseVec,
    z: &SparseVec,
    p: i64,
    q_: i64,
    r: i64,
) -> SparseVec {
    let mut out = SparseVec::zero();
    let mut jmax = (hi - 1 - r).min(p + q_ - lo);
    if p >= 0 {
        jmax = jmax.min(p);
    }
    for j in 0..=jmax.max(-1) {
        let yz = prod(y, z, r + j);
        if yz.is_zero() {
            continue;
        }
        out.add_scaled(&prod(x, &yz, p + q_ - j), &(binom(p, j as u32) * sign(j)));
    }
    out
}

/// Residuals of the Borcherds identity in the corrected form and in the alternate form
/// whose last sum is `Σ_j C(q, j)(a_(p+q-j)b)_(r+j)c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorcherdsResidual {
    pub corrected: SparseVec,
    pub alternate: SparseVec,
}

/// Borcherds identity on homogeneous elements; the Koszul sign of swapping `a` and `b`
/// enters the middle sum.
pub fn borcherds_residual(
    prod: &dyn Fn(&Homog, &Homog, i64) -> Homog,
    (lo, hi): (i64, i64),
    (a, b, c): (&Homog, &Homog, &Homog),
    (p, q_, r): (i64, i64, i64),
) -> BorcherdsResidual {
    let mut left = SparseVec::zero();
    let mut corrected = SparseVec::zero();
    let mut alternate = SparseVec::zero();
    if hi > lo {
        let cap = |bound: i64, k: i64| if k >= 0 { bound.min(k) } else { bound };
        // (-1)^j a_(p+q-j)(b_(r+j)c)
        for j in 0..=cap((hi - 1 - r).min(p + q_ - lo), p).max(-1) {
            let bc = prod(b, c, r + j);
            if !bc.vec.is_zero() {
                left.add_scaled(&prod(a, &bc, p + q_ - j).vec, &(binom(p, j as u32) * sign(j)));
            }
        }
        // -(-1)^{j+p+|a||b|} b_(r+p-j)(a_(q+j)c)
        for j in 0..=cap((hi - 1 - q_).min(r + p - lo), p).max(-1) {
            let ac = prod(a, c, q_ + j);
            if !ac.vec.is_zero() {
                left.add_scaled(&prod(b, &ac, r + p - j).vec, &(-binom(p, j as u32) * sign(j + p + a.degree * b.degree)));
            }
        }
        corrected = left.clone();
        alternate = left;
        for j in 0..=cap((hi - 1 - p).min(q_ + r - lo), q_).max(-1) {
            let ab = prod(a, b, p + j);
            if !ab.vec.is_zero() {
                corrected.add_scaled(&prod(&ab, c, q_ + r - j).vec, &-binom(q_, j as u32));
            }
        }
        for j in 0..=cap((hi - 1 - r).min(p + q_ - lo), q_).max(-1) {
            let ab = prod(a, b, p + q_ - j);
            if !ab.vec.is_zero() {
                alternate.add_scaled(&prod(&ab, c, r + j).vec, &-binom(q_, j as u32));
            }
        }
    }
    BorcherdsResidual { corrected, alternate }
}

/// Borcherds identity for basis vectors `a, b, c` of `w` at `(p, q, r)`.
pub fn vertex_borcherds_check(w: &VertexAlgebraData, a: usize, b: usize, c: usize, p: i64, q_: i64, r: i64) -> Result<BorcherdsResidual> {
    if a >= w.dim() || b >= w.dim() || c >= w.dim() {
        return Err(Error::Input("basis index out of range".into()));
    }
    let prod = |x: &Homog, y: &Homog, n: i64| DgProducts::product(w, x, y, n);
    let h = |i: usize| Homog::new(w.degrees[i], SparseVec::basis(i));
    Ok(borcherds_residual(&prod, w.support(), (&h(a), &h(b), &h(c)), (p, q_, r)))
}

/// Report of a Borcherds sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BorcherdsReport {
    pub corrected: IdentityReport,
    /// The alternate last sum, kept for comparison; it differs when `q < 0`.
    pub alternate: IdentityReport,
}

/// Sweeps all basis triples and `p, q, r` in `[-range, range]`.
pub fn borcherds_sweep(w: &VertexAlgebraData, range: (i64, i64, i64)) -> Result<BorcherdsReport> {
    let mut corrected = IdentityReport::new("Borcherds identity");
    let mut alternate = IdentityReport::new("Borcherds identity, alternate last sum");
    let name = |i: usize| w.names[i].clone();
    for (a, b, c) in itertools::iproduct!(0..w.dim(), 0..w.dim(), 0..w.dim()) {
        let inputs = vec![w.names[a].clone(), w.names[b].clone(), w.names[c].clone()];
        for (p, q_, r) in itertools::iproduct!(-range.0..=range.0, -range.1..=range.1, -range.2..=range.2) {
            let res = vertex_borcherds_check(w, a, b, c, p, q_, r)?;
            corrected.record(inputs.clone(), vec![p, q_, r], &res.corrected, &name);
            alternate.record(inputs.clone(), vec![p, q_, r], &res.alternate, &name);
        }
    }
    Ok(BorcherdsReport { corrected, alternate })
}

/// Homogeneous element of a graded space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homog {
    pub degree: i64,
    pub vec: SparseVec,
}

impl Homog {
    pub fn new(degree: i64, vec: SparseVec) -> Self {
        Homog { degree, vec }
    }
}

/// A dg space with `(n)`-products, the data the secondary identities are stated on.
pub trait DgProducts {
    /// Basis of homogeneous test elements.
    fn test_basis(&self) -> Vec<Homog>;
    fn d(&self, x: &Homog) -> Homog;
    fn product(&self, x: &Homog, y: &Homog, n: i64) -> Homog;
    /// `[lo, hi)` outside of which all products vanish.
    fn support(&self) -> (i64, i64);
    fn name(&self, x: &Homog) -> String;
}

/// Degree `-1` ternary operations with integer indices: `(m, n)` in the conformal case,
/// `(p, q, r)` in the vertex case.
pub trait SecondaryOps {
    fn eval(&self, a: &Homog, b: &Homog, c: &Homog, indices: &[i64]) -> Result<Homog>;
}

/// The zero family of secondary operations.
pub struct ZeroOps;

impl SecondaryOps for ZeroOps {
    fn eval(&self, a: &Homog, b: &Homog, c: &Homog, _: &[i64]) -> Result<Homog> {
        Ok(Homog::new(a.degree + b.degree + c.degree - 1, SparseVec::zero()))
    }
}

/// Secondary operations stored on basis triples, extended trilinearly. Keys are
/// `(degree, index)` of each argument.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SecondaryTable {
    pub entries: BTreeMap<((i64, usize), (i64, usize), (i64, usize), Vec<i64>), SparseVec>,
}

impl SecondaryOps for SecondaryTable {
    fn eval(&self, a: &Homog, b: &Homog, c: &Homog, indices: &[i64]) -> Result<Homog> {
        let mut out = SparseVec::zero();
        for (i, ca) in a.vec.iter() {
            for (j, cb) in b.vec.iter() {
                for (k, cc) in c.vec.iter() {
                    let key = ((a.degree, *i), (b.degree, *j), (c.degree, *k), indices.to_vec());
                    if let Some(v) = self.entries.get(&key) {
                        out.add_scaled(v, &(ca * cb * cc));
                    }
                }
            }
        }
        Ok(Homog::new(a.degree + b.degree + c.degree - 1, out))
    }
}

/// Which secondary identity family to check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SecondaryKind {
    /// `(m, n)` with `0 <= m <= max_m`, `0 <= n <= max_n`.
    Conformal { max_m: u32, max_n: u32 },
    /// Explicit `(p, q, r)` grid.
    Vertex { grid: Vec<(i64, i64, i64)> },
}

/// Left side `d S + S d` of a secondary identity.
fn secondary_lhs(x: &dyn DgProducts, s: &dyn SecondaryOps, a: &Homog, b: &Homog, c: &Homog, idx: &[i64]) -> Result<SparseVec> {
    let mut lhs = x.d(&s.eval(a, b, c, idx)?).vec;
    lhs.add_assign(&s.eval(&x.d(a), b, c, idx)?.vec);
    lhs.add_scaled(&s.eval(a, &x.d(b), c, idx)?.vec, &sign(a.degree));
    lhs.add_scaled(&s.eval(a, b, &x.d(c), idx)?.vec, &sign(a.degree + b.degree));
    Ok(lhs)
}

/// Checks the secondary identities on all basis triples with `deg a + deg b + deg c`
/// at most `max_total_degree`.
pub fn secondary_check(x: &dyn DgProducts, s: &dyn SecondaryOps, kind: &SecondaryKind, max_total_degree: i64) -> Result<IdentityReport> {
    let basis = x.test_basis();
    let mut rep = IdentityReport::new(match kind {
        SecondaryKind::Conformal { .. } => "secondary commutator identity",
        SecondaryKind::Vertex { .. } => "secondary Borcherds identity",
    });
    for a in &basis {
        for b in &basis {
            for c in &basis {
                if a.degree + b.degree + c.degree > max_total_degree {
                    continue;
                }
                let inputs = vec![x.name(a), x.name(b), x.name(c)];
                let koszul = a.degree * b.degree;
                let indices: Vec<Vec<i64>> = match kind {
                    SecondaryKind::Conformal { max_m, max_n } => {
                        itertools::iproduct!(0..=*max_m as i64, 0..=*max_n as i64).map(|(m, n)| vec![m, n]).collect()
                    }
                    SecondaryKind::Vertex { grid } => grid.iter().map(|&(p, q_, r)| vec![p, q_, r]).collect(),
                };
                for idx in indices {
                    let lhs = secondary_lhs(x, s, a, b, c, &idx)?;
                    let rhs = match kind {
                        SecondaryKind::Conformal { .. } => {
                            let (m, n) = (idx[0], idx[1]);
                            let bc = x.product(b, c, n);
                            let ac = x.product(a, c, m);
                            let mut r = x.product(a, &bc, m).vec;
                            r.add_scaled(&x.product(b, &ac, n).vec, &-sign(koszul));
                            for j in 0..=m {
                                let ab = x.product(a, b, j);
                                if !ab.vec.is_zero() {
                                    r.add_scaled(&x.product(&ab, c, m + n - j).vec, &-binom(m, j as u32));
                                }
                            }
                            r
                        }
                        SecondaryKind::Vertex { .. } => {
                            let pr = |u: &Homog, v: &Homog, n: i64| x.product(u, v, n);
                            borcherds_residual(&pr, x.support(), (a, b, c), (idx[0], idx[1], idx[2])).corrected
                        }
                    };
                    let res = lhs.diff(&rhs);
                    rep.checked += 1;
                    if !res.is_zero() {
                        rep.failures.push(Witness { inputs: inputs.clone(), indices: idx.clone(), residual: fmt_vec(&res, |i| format!("e{i}")) });
                    }
                }
            }
        }
    }
    Ok(rep)
}

impl DgProducts for ConformalAlgebra {
    fn test_basis(&self) -> Vec<Homog> {
        (0..self.dim()).map(|g| Homog::new(self.degrees[g], self.gen(g))).collect()
    }
    fn d(&self, x: &Homog) -> Homog {
        Homog::new(x.degree + 1, ConformalAlgebra::d(self, &x.vec))
    }
    fn product(&self, x: &Homog, y: &Homog, n: i64) -> Homog {
        let v = if n < 0 { SparseVec::zero() } else { ConformalAlgebra::product(self, &x.vec, &y.vec, n as u32) };
        Homog::new(x.degree + y.degree, v)
    }
    fn support(&self) -> (i64, i64) {
        (0, self.table.values().map(|v| v.len() as i64).max().unwrap_or(0))
    }
    fn name(&self, x: &Homog) -> String {
        fmt_vec(&x.vec, |i| self.name_of(i))
    }
}

impl DgProducts for VertexAlgebraData {
    fn test_basis(&self) -> Vec<Homog> {
        (0..self.dim()).map(|g| Homog::new(self.degrees[g], SparseVec::basis(g))).collect()
    }
    fn d(&self, x: &Homog) -> Homog {
        Homog::new(x.degree + 1, VertexAlgebraData::d(self, &x.vec))
    }
    fn product(&self, x: &Homog, y: &Homog, n: i64) -> Homog {
        Homog::new(x.degree + y.degree, VertexAlgebraData::product(self, &x.vec, &y.vec, n))
    }
    fn support(&self) -> (i64, i64) {
        VertexAlgebraData::support(self)
    }
    fn name(&self, x: &Homog) -> String {
        fmt_vec(&x.vec, |i| self.names[i].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn virasoro_bracket_polyop() {
        let v = ConformalAlgebra::virasoro(q(1));
        let l = v.gen(0);
        let p = v.star_bracket(&l, &l);
        // ∂L - 2 L ∂_0 - (1/12) C ∂_0^3
        let expected: LinComb<(Vec<u32>, usize)> =
            [((vec![0], 2), q(1)), ((vec![1], 0), q(-2)), ((vec![3], 1), crate::exactlin::qf(-1, 12))].into_iter().collect();
        assert_eq!(p.terms, expected);
        assert_eq!(p.coefficient(&[1]), l.scaled(&q(2)));
    }

    #[test]
    fn kac_rules() {
        let v = ConformalAlgebra::virasoro(q(0));
        let l = v.gen(0);
        let dl = v.partial(&l, 1);
        // (∂L)_(1)L = -L_(0)L = -∂L
        assert_eq!(v.product(&dl, &l, 1), dl.scaled(&q(-1)));
        // L_(1)∂L = ∂(L_(1)L) + L_(0)L = 2∂L + ∂L
        assert_eq!(v.product(&l, &dl, 1), dl.scaled(&q(3)));
    }

    #[test]
    fn central_elements_are_killed_by_partial() {
        let v = ConformalAlgebra::virasoro(q(2));
        assert!(v.partial(&v.gen(1), 1).is_zero());
    }

    #[test]
    fn sum_power_counts() {
        let e = sum_power(&[0, 1], 2, 3, true);
        assert_eq!(e.len(), 3);
        assert_eq!(e[1], (vec![1, 1, 0], q(1)));
    }

    #[test]
    fn alternate_skew_fails_on_virasoro() {
        let v = ConformalAlgebra::virasoro(q(1));
        let s = check_skew(&v);
        assert!(s.pass());
        assert!(!s.alternate.pass());
    }
}
