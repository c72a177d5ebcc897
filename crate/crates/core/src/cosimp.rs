//! Truncated cosimplicial modules, Moore complexes, the cosimplicial complex `Z` of
//! standard simplices, its tensor powers, and the complexes `Hom(Z, T)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use num_traits::One;

use crate::error::{Error, Result};
use crate::exactlin::{sign, FiniteComplex, QMatrix, SparseVec, Q};
use crate::simplexcat::{degeneracy, enumerate, face, MonotoneMap};

/// Where the infinite product defining `Hom(Z, T)` is cut off.
///
/// `levels` bounds the simplicial level `m` of components, `depth` bounds the
/// (negative) degree of `T`. The region `m ≤ levels`, `degree ≥ -depth` reproduces the
/// cohomology of the untruncated complex in degrees `levels - depth + 1 ..= levels - 1`;
/// degree `levels - depth` picks up boundary classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Truncation {
    pub levels: usize,
    pub depth: usize,
}

impl Truncation {
    pub fn new(levels: usize, depth: usize) -> Self {
        Truncation { levels, depth }
    }

    /// Smallest truncation with depth `max_degree` whose exact range contains `[lo, 0]`.
    pub fn for_window(max_degree: usize, lo: i64) -> Result<Self> {
        let d = max_degree as i64;
        if lo > 0 || lo < 2 - d {
            return Err(Error::Input(format!(
                "window starting at {lo} is outside the stable range [{}, 0] for truncation {max_degree}",
                2 - d
            )));
        }
        Ok(Truncation { levels: (d + lo - 1) as usize, depth: max_degree })
    }

    /// Degrees in which cohomology is exact for this truncation.
    pub fn exact_range(&self) -> (i64, i64) {
        (self.levels as i64 - self.depth as i64 + 1, self.levels as i64 - 1)
    }
}

/// Cosimplicial vector space truncated at level `D`, with explicit coface and
/// codegeneracy matrices.
#[derive(Clone, Debug)]
pub struct CosimplicialModule {
    dims: Vec<usize>,
    /// `cofaces[p][i]`: level `p-1` → level `p` (empty for `p = 0`).
    cofaces: Vec<Vec<QMatrix>>,
    /// `codegens[p][i]`: level `p+1` → level `p` (empty for `p = D`).
    codegens: Vec<Vec<QMatrix>>,
}

impl CosimplicialModule {
    /// Checked constructor; verifies shapes and all cosimplicial identities.
    pub fn new(dims: Vec<usize>, cofaces: Vec<Vec<QMatrix>>, codegens: Vec<Vec<QMatrix>>) -> Result<Self> {
        let a = CosimplicialModule { dims, cofaces, codegens };
        a.check_shapes()?;
        a.check_identities()?;
        Ok(a)
    }

    /// Builds a module from a function giving the matrix of every generating map.
    pub fn from_generators(dims: Vec<usize>, mut gen: impl FnMut(&MonotoneMap) -> QMatrix) -> Result<Self> {
        let top = dims.len() - 1;
        let cofaces = (0..=top).map(|p| if p == 0 { vec![] } else { (0..=p).map(|i| gen(&face(p, i).unwrap())).collect() }).collect();
        let codegens = (0..=top).map(|p| if p == top { vec![] } else { (0..=p).map(|i| gen(&degeneracy(p, i).unwrap())).collect() }).collect();
        Self::new(dims, cofaces, codegens)
    }

    /// The constant module: every level is `k^dim` and every map is the identity.
    pub fn constant(dim: usize, top: usize) -> Self {
        Self::from_generators(vec![dim; top + 1], |_| QMatrix::identity(dim)).expect("constant module is valid")
    }

    /// `kΔ_m`: level `n` has basis `Hom([m],[n])`, maps act by postcomposition.
    pub fn representable(m: usize, top: usize) -> Self {
        let dims = (0..=top).map(|n| enumerate(m, n).len()).collect();
        Self::from_generators(dims, |f| postcompose_matrix(m, f)).expect("representable module is valid")
    }

    /// `k^dim` at level `top`, zero below, every map zero.
    pub fn top_level(dim: usize, top: usize) -> Self {
        let mut dims = vec![0; top + 1];
        dims[top] = dim;
        let d = dims.clone();
        Self::from_generators(dims, |f| QMatrix::zero(d[f.target()], d[f.source()])).expect("top-level module is valid")
    }

    /// Levelwise direct sum.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.top() != other.top() {
            return Err(Error::Input("direct sum of modules with different truncations".into()));
        }
        let dims = self.dims.iter().zip(&other.dims).map(|(a, b)| a + b).collect();
        let block = |x: &QMatrix, y: &QMatrix| {
            let shifted = y.triplets().into_iter().map(|(r, c, v)| (r + x.rows(), c + x.cols(), v));
            QMatrix::from_triplets(x.rows() + y.rows(), x.cols() + y.cols(), x.triplets().into_iter().chain(shifted))
        };
        let pair = |a: &[Vec<QMatrix>], b: &[Vec<QMatrix>]| -> Result<Vec<Vec<QMatrix>>> {
            a.iter().zip(b).map(|(xs, ys)| xs.iter().zip(ys).map(|(x, y)| block(x, y)).collect()).collect()
        };
        Self::new(dims, pair(&self.cofaces, &other.cofaces)?, pair(&self.codegens, &other.codegens)?)
    }

    /// A random module truncated at `top` with every level of dimension at most `max_dim`.
    ///
    /// When `max_dim < top`, a normalized summand in any level `1 ≤ k < top` would
    /// contribute `C(top, k) > max_dim` dimensions to level `top`, so up to isomorphism such
    /// a module is a constant module plus a summand concentrated in level `top`. The
    /// isomorphism type is drawn at random and then conjugated by random invertible
    /// matrices on every level.
    pub fn random_small<R: rand::Rng + ?Sized>(rng: &mut R, top: usize, max_dim: usize) -> Self {
        let a = rng.gen_range(0..=max_dim);
        let b = if top > 0 { rng.gen_range(0..=max_dim - a) } else { 0 };
        let base = Self::constant(a, top).direct_sum(&Self::top_level(b, top)).expect("same truncation");
        let (p, p_inv): (Vec<QMatrix>, Vec<QMatrix>) = base.dims.iter().map(|&n| random_invertible(rng, n)).unzip();
        base.change_basis(&p, &p_inv).expect("conjugate of a valid module")
    }

    fn check_shapes(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::Input("cosimplicial module needs level 0".into()));
        }
        let top = self.top();
        if self.cofaces.len() != top + 1 || self.codegens.len() != top + 1 {
            return Err(Error::Input("one coface and codegeneracy list per level expected".into()));
        }
        for p in 0..=top {
            let nf = if p == 0 { 0 } else { p + 1 };
            let ns = if p == top { 0 } else { p + 1 };
            if self.cofaces[p].len() != nf || self.codegens[p].len() != ns {
                return Err(Error::Input(format!("level {p} needs {nf} cofaces and {ns} codegeneracies")));
            }
            for (i, m) in self.cofaces[p].iter().enumerate() {
                if m.rows() != self.dims[p] || m.cols() != self.dims[p - 1] {
                    return Err(Error::Input(format!("coface δ_{i} into level {p} has wrong shape")));
                }
            }
            for (i, m) in self.codegens[p].iter().enumerate() {
                if m.rows() != self.dims[p] || m.cols() != self.dims[p + 1] {
                    return Err(Error::Input(format!("codegeneracy σ_{i} onto level {p} has wrong shape")));
                }
            }
        }
        Ok(())
    }

    /// Every relation `g∘f = g'∘f'` between pairs of generators (and `g∘f = id`) that holds
    /// in the simplex category must hold for the matrices.
    fn check_identities(&self) -> Result<()> {
        let top = self.top();
        let mut gens: Vec<MonotoneMap> = Vec::new();
        for p in 1..=top {
            for i in 0..=p {
                gens.push(face(p, i)?);
            }
        }
        for p in 0..top {
            for i in 0..=p {
                gens.push(degeneracy(p, i)?);
            }
        }
        let mut by_composite: HashMap<MonotoneMap, Vec<(usize, usize)>> = HashMap::new();
        for (a, g) in gens.iter().enumerate() {
            for (b, f) in gens.iter().enumerate() {
                if f.target() == g.source() {
                    by_composite.entry(g.after(f)).or_default().push((a, b));
                }
            }
        }
        for (h, pairs) in by_composite.iter().sorted_by(|x, y| x.0.cmp(y.0)) {
            let first = self.map(&gens[pairs[0].0])?.mul(&self.map(&gens[pairs[0].1])?)?;
            if h.is_identity() && first != QMatrix::identity(self.dims[h.source()]) {
                return Err(Error::Invariant(format!("{:?}∘{:?} is not the identity", gens[pairs[0].0], gens[pairs[0].1])));
            }
            for &(a, b) in &pairs[1..] {
                let other = self.map(&gens[a])?.mul(&self.map(&gens[b])?)?;
                if other != first {
                    return Err(Error::Invariant(format!(
                        "cosimplicial identity fails: {:?}∘{:?} vs {:?}∘{:?}",
                        gens[pairs[0].0], gens[pairs[0].1], gens[a], gens[b]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn top(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, p: usize) -> usize {
        self.dims[p]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn coface(&self, p: usize, i: usize) -> &QMatrix {
        &self.cofaces[p][i]
    }

    pub fn codegeneracy(&self, p: usize, i: usize) -> &QMatrix {
        &self.codegens[p][i]
    }

    /// The matrix of `A(f)` for any monotone map within the truncation.
    pub fn map(&self, f: &MonotoneMap) -> Result<QMatrix> {
        if f.source() > self.top() || f.target() > self.top() {
            return Err(Error::Input(format!("{f:?} leaves the truncation {}", self.top())));
        }
        let (faces, degens) = f.face_degeneracy_word();
        let mut level = f.source();
        let mut acc = QMatrix::identity(self.dims[level]);
        for &j in degens.iter().rev() {
            acc = self.codegens[level - 1][j].mul(&acc)?;
            level -= 1;
        }
        for &i in faces.iter().rev() {
            acc = self.cofaces[level + 1][i].mul(&acc)?;
            level += 1;
        }
        Ok(acc)
    }

    /// Conjugates every level by an invertible matrix `P_p` (new basis = `P_p^{-1}` old).
    pub fn change_basis(&self, p: &[QMatrix], p_inv: &[QMatrix]) -> Result<Self> {
        let top = self.top();
        let cofaces = (0..=top)
            .map(|l| self.cofaces[l].iter().map(|m| p_inv[l].mul(m)?.mul(&p[l - 1])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let codegens = (0..=top)
            .map(|l| self.codegens[l].iter().map(|m| p_inv[l].mul(m)?.mul(&p[l + 1])).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.dims.clone(), cofaces, codegens)
    }
}

/// A random invertible `n×n` matrix `L·U` (unitriangular factors with a random diagonal)
/// together with its inverse.
pub fn random_invertible<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> (QMatrix, QMatrix) {
    let mut l = Vec::new();
    let mut u = Vec::new();
    for i in 0..n {
        l.push((i, i, Q::one()));
        let d = loop {
            let d = rng.gen_range(-3i64..=3);
            if d != 0 {
                break d;
            }
        };
        u.push((i, i, Q::from_integer(d.into())));
        for j in 0..i {
            l.push((i, j, Q::from_integer(rng.gen_range(-2i64..=2).into())));
            u.push((j, i, Q::from_integer(rng.gen_range(-2i64..=2).into())));
        }
    }
    let p = QMatrix::from_triplets(n, n, l).unwrap().mul(&QMatrix::from_triplets(n, n, u).unwrap()).unwrap();
    let cols = (0..n).map(|j| crate::exactlin::solve(&p, &SparseVec::basis(j)).unwrap().expect("invertible")).collect();
    (p, QMatrix::from_columns(n, cols).unwrap())
}

/// Matrix of postcomposition with `f: [a]→[b]` from `k Hom([m],[a])` to `k Hom([m],[b])`.
pub fn postcompose_matrix(m: usize, f: &MonotoneMap) -> QMatrix {
    let src = enumerate(m, f.source());
    let dst = enumerate(m, f.target());
    let index: HashMap<&MonotoneMap, usize> = dst.iter().enumerate().map(|(i, g)| (g, i)).collect();
    let cols = src.iter().map(|g| SparseVec::basis(index[&f.after(g)])).collect();
    QMatrix::from_columns(dst.len(), cols).expect("postcomposition columns fit")
}

/// The Moore complex: `(MA)^p = A^p` with `d = Σ (-1)^i δ_i`.
pub fn moore(a: &CosimplicialModule) -> Result<FiniteComplex> {
    let top = a.top();
    let mut diffs = Vec::with_capacity(top);
    for p in 0..top {
        let mut d = QMatrix::zero(a.dim(p + 1), a.dim(p));
        for i in 0..=p + 1 {
            d = d.add_scaled(a.coface(p + 1, i), &sign(i as i64))?;
        }
        diffs.push(d);
    }
    FiniteComplex::new(0, a.dims.clone(), diffs)
}

/// Levelwise complexes of cosimplicial vector spaces in degrees `[-depth, 0]`, given by
/// their structure matrices.
pub trait GradedCosimplicial {
    /// Highest cosimplicial level available.
    fn max_level(&self) -> usize;
    /// The piece lives in degrees `-depth ..= 0`.
    fn depth(&self) -> usize;
    /// Dimension at cosimplicial level `level` and complex degree `-s`.
    fn dim(&self, level: usize, s: usize) -> usize;
    /// Differential from degree `-s` to `-s+1` at a level (`s ≥ 1`).
    fn differential(&self, level: usize, s: usize) -> QMatrix;
    /// The action of `f` in degree `-s`.
    fn structure_map(&self, f: &MonotoneMap, s: usize) -> QMatrix;
}

/// A cosimplicial module placed in complex degree 0.
pub struct Degree0<'a>(pub &'a CosimplicialModule);

impl GradedCosimplicial for Degree0<'_> {
    fn max_level(&self) -> usize {
        self.0.top()
    }
    fn depth(&self) -> usize {
        0
    }
    fn dim(&self, level: usize, s: usize) -> usize {
        if s == 0 {
            self.0.dim(level)
        } else {
            0
        }
    }
    fn differential(&self, level: usize, s: usize) -> QMatrix {
        QMatrix::zero(self.dim(level, s - 1), self.dim(level, s))
    }
    fn structure_map(&self, f: &MonotoneMap, s: usize) -> QMatrix {
        if s == 0 {
            self.0.map(f).expect("map within truncation")
        } else {
            QMatrix::zero(0, 0)
        }
    }
}

/// `Z([n]) = C_•(Δⁿ)` placed in nonpositive degrees: degree `-m` at level `n` has basis
/// `Hom([m],[n])`.
pub struct ZComplex {
    levels: usize,
    depth: usize,
    bases: Mutex<HashMap<(usize, usize), Arc<Basis<MonotoneMap>>>>,
}

/// Ordered basis with reverse lookup.
pub struct Basis<T> {
    pub items: Vec<T>,
    pub index: HashMap<T, usize>,
}

impl<T: Clone + Eq + std::hash::Hash> Basis<T> {
    pub fn new(items: Vec<T>) -> Self {
        let index = items.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Basis { items, index }
    }
}

impl ZComplex {
    /// `Z` up to level `levels` and degree `-depth`.
    pub fn new(levels: usize, depth: usize) -> Self {
        ZComplex { levels, depth, bases: Mutex::new(HashMap::new()) }
    }

    /// Basis `Hom([m],[n])` in lexicographic order.
    pub fn basis(&self, n: usize, m: usize) -> Arc<Basis<MonotoneMap>> {
        let mut cache = self.bases.lock().unwrap();
        cache.entry((n, m)).or_insert_with(|| Arc::new(Basis::new(enumerate(m, n)))).clone()
    }
}

/// `Σ (-1)^i f∘δ_i` for `f: [m]→[n]`, `m ≥ 1`.
pub fn simplex_boundary(f: &MonotoneMap) -> Vec<(MonotoneMap, Q)> {
    let m = f.source();
    (0..=m).map(|i| (f.after(&face(m, i).unwrap()), sign(i as i64))).collect()
}

impl GradedCosimplicial for ZComplex {
    fn max_level(&self) -> usize {
        self.levels
    }
    fn depth(&self) -> usize {
        self.depth
    }
    fn dim(&self, level: usize, s: usize) -> usize {
        if s > self.depth {
            0
        } else {
            self.basis(level, s).items.len()
        }
    }
    fn differential(&self, level: usize, s: usize) -> QMatrix {
        let src = self.basis(level, s);
        let dst = self.basis(level, s - 1);
        let cols = src
            .items
            .iter()
            .map(|f| simplex_boundary(f).into_iter().map(|(g, c)| (dst.index[&g], c)).collect())
            .collect();
        QMatrix::from_columns(dst.items.len(), cols).unwrap()
    }
    fn structure_map(&self, f: &MonotoneMap, s: usize) -> QMatrix {
        let src = self.basis(f.source(), s);
        let dst = self.basis(f.target(), s);
        let cols = src.items.iter().map(|g| SparseVec::basis(dst.index[&f.after(g)])).collect();
        QMatrix::from_columns(dst.items.len(), cols).unwrap()
    }
}

/// Basis element of a tensor power: one `(degree s_i, index)` pair per factor.
pub type TensorKey = Vec<(usize, usize)>;

/// `X^{⊗n}` with the Koszul-signed differential, truncated at total degree `-depth`.
pub struct TensorPower<'a, X: GradedCosimplicial> {
    x: &'a X,
    n: usize,
    depth: usize,
    bases: Mutex<HashMap<(usize, usize), Arc<Basis<TensorKey>>>>,
}

impl<'a, X: GradedCosimplicial> TensorPower<'a, X> {
    pub fn new(x: &'a X, n: usize, depth: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("tensor power needs n ≥ 1".into()));
        }
        Ok(TensorPower { x, n, depth, bases: Mutex::new(HashMap::new()) })
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    /// Basis at a level and total degree `-s`: degree compositions in lexicographic
    /// order, then index tuples in lexicographic order.
    pub fn basis(&self, level: usize, s: usize) -> Arc<Basis<TensorKey>> {
        if let Some(b) = self.bases.lock().unwrap().get(&(level, s)) {
            return b.clone();
        }
        let mut items = Vec::new();
        for comp in compositions(s, self.n) {
            if comp.iter().any(|&si| si > self.x.depth()) {
                continue;
            }
            let ranges: Vec<_> = comp.iter().map(|&si| 0..self.x.dim(level, si)).collect();
            for idx in ranges.into_iter().multi_cartesian_product_or_unit() {
                items.push(comp.iter().copied().zip(idx).collect());
            }
        }
        let b = Arc::new(Basis::new(items));
        self.bases.lock().unwrap().insert((level, s), b.clone());
        b
    }
}

/// All `n`-tuples of nonnegative integers summing to `s`, lexicographically.
pub fn compositions(s: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![s]];
    }
    let mut out = Vec::new();
    for first in 0..=s {
        for mut rest in compositions(s - first, n - 1) {
            let mut v = vec![first];
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

trait CartesianOrUnit: Iterator + Sized {
    fn multi_cartesian_product_or_unit(self) -> Vec<Vec<usize>>;
}

impl<I: Iterator<Item = std::ops::Range<usize>>> CartesianOrUnit for I {
    fn multi_cartesian_product_or_unit(self) -> Vec<Vec<usize>> {
        let ranges: Vec<_> = self.collect();
        if ranges.is_empty() {
            return vec![vec![]];
        }
        ranges.into_iter().multi_cartesian_product().collect()
    }
}

impl<X: GradedCosimplicial> GradedCosimplicial for TensorPower<'_, X> {
    fn max_level(&self) -> usize {
        self.x.max_level()
    }
    fn depth(&self) -> usize {
        self.depth
    }
    fn dim(&self, level: usize, s: usize) -> usize {
        if s > self.depth {
            0
        } else {
            self.basis(level, s).items.len()
        }
    }
    fn differential(&self, level: usize, s: usize) -> QMatrix {
        let src = self.basis(level, s);
        let dst = self.basis(level, s - 1);
        let mut factor_d: HashMap<usize, QMatrix> = HashMap::new();
        let mut cols = Vec::with_capacity(src.items.len());
        for key in &src.items {
            let mut col = SparseVec::zero();
            let mut before: usize = 0;
            for (i, &(si, idx)) in key.iter().enumerate() {
                if si > 0 {
                    let d = factor_d.entry(si).or_insert_with(|| self.x.differential(level, si));
                    // Koszul sign: the differential passes factors of total degree -before.
                    let sg = sign(before as i64);
                    for (j, c) in d.column(idx).iter() {
                        let mut k = key.clone();
                        k[i] = (si - 1, *j);
                        col.add_term(dst.index[&k], c * &sg);
                    }
                }
                before += si;
            }
            cols.push(col);
        }
        QMatrix::from_columns(dst.items.len(), cols).unwrap()
    }
    fn structure_map(&self, f: &MonotoneMap, s: usize) -> QMatrix {
        let src = self.basis(f.source(), s);
        let dst = self.basis(f.target(), s);
        let mut factor: HashMap<usize, QMatrix> = HashMap::new();
        let mut cols = Vec::with_capacity(src.items.len());
        for key in &src.items {
            let mut partial: Vec<(TensorKey, Q)> = vec![(Vec::new(), Q::one())];
            for &(si, idx) in key {
                let m = factor.entry(si).or_insert_with(|| self.x.structure_map(f, si));
                let mut next = Vec::new();
                for (k, c) in &partial {
                    for (j, v) in m.column(idx).iter() {
                        let mut k2 = k.clone();
                        k2.push((si, *j));
                        next.push((k2, c * v));
                    }
                }
                partial = next;
            }
            cols.push(partial.into_iter().map(|(k, c)| (dst.index[&k], c)).collect());
        }
        QMatrix::from_columns(dst.items.len(), cols).unwrap()
    }
}

/// `Hom(Z, T)` truncated to components `m ≤ levels` and `T`-degrees `≥ -depth`.
///
/// The degree-`d` component is `Π_m T^{d-m}([m])`; coordinates are ordered by `m`, then
/// by the basis of `T^{d-m}([m])`. The differential is
/// `(df)_m = d_T(f_m) + (-1)^{d+1} Σ_i (-1)^i T(δ_i)(f_{m-1})`.
pub fn hom_from_z<T: GradedCosimplicial>(t: &T, trunc: Truncation) -> Result<HomFromZ> {
    if trunc.levels > t.max_level() {
        return Err(Error::Truncation(format!("components up to level {} need T up to that level", trunc.levels)));
    }
    let depth = trunc.depth.min(t.depth());
    let lo = -(depth as i64);
    let hi = trunc.levels as i64;
    // blocks[d - lo] = list of (m, offset, size)
    let mut blocks: Vec<Vec<(usize, usize, usize)>> = Vec::new();
    let mut dims = Vec::new();
    for d in lo..=hi {
        let mut off = 0;
        let mut bl = Vec::new();
        for m in 0..=trunc.levels {
            let s = m as i64 - d;
            if s < 0 || s > depth as i64 {
                continue;
            }
            let size = t.dim(m, s as usize);
            bl.push((m, off, size));
            off += size;
        }
        blocks.push(bl);
        dims.push(off);
    }
    let mut diffs = Vec::new();
    for d in lo..hi {
        let k = (d - lo) as usize;
        let mut trip = Vec::new();
        for &(m, off, size) in &blocks[k] {
            if size == 0 {
                continue;
            }
            let s = (m as i64 - d) as usize;
            // d_T: same m, degree s -> s-1.
            if s >= 1 {
                if let Some(&(_, off2, _)) = blocks[k + 1].iter().find(|b| b.0 == m) {
                    for (r, c, v) in t.differential(m, s).triplets() {
                        trip.push((off2 + r, off + c, v));
                    }
                }
            }
            // Cofaces: m -> m+1, same T-degree s.
            if m < trunc.levels {
                if let Some(&(_, off2, _)) = blocks[k + 1].iter().find(|b| b.0 == m + 1) {
                    let outer = sign(d + 1);
                    for i in 0..=m + 1 {
                        let c0 = &outer * sign(i as i64);
                        for (r, c, v) in t.structure_map(&face(m + 1, i)?, s).triplets() {
                            trip.push((off2 + r, off + c, v * &c0));
                        }
                    }
                }
            }
        }
        diffs.push(QMatrix::from_triplets(dims[k + 1], dims[k], trip)?);
    }
    Ok(HomFromZ { complex: FiniteComplex::new(lo, dims, diffs)?, blocks, lo })
}

/// The complex `Hom(Z, T)` together with its block layout.
pub struct HomFromZ {
    pub complex: FiniteComplex,
    blocks: Vec<Vec<(usize, usize, usize)>>,
    lo: i64,
}

impl HomFromZ {
    /// `(m, offset, size)` of each component in degree `d`.
    pub fn blocks(&self, d: i64) -> &[(usize, usize, usize)] {
        &self.blocks[(d - self.lo) as usize]
    }
}

/// Sign `(-1)^{m(m+1)/2}` relating `Hom(Z, A)` to the Moore complex of `A`.
pub fn yoneda_sign(m: usize) -> Q {
    sign((m * (m + 1) / 2) as i64)
}

/// The chain isomorphism `Hom(Z, A) → M(A)` for `A` in degree 0: `f ↦ (-1)^{m(m+1)/2} f_m`.
pub fn yoneda_identification(a: &CosimplicialModule) -> Vec<QMatrix> {
    (0..=a.top()).map(|m| QMatrix::identity(a.dim(m)).scaled(&yoneda_sign(m))).collect()
}

/// The morphism `kΔ_m → A` sending `f: [m]→[n]` to `A(f)(a)`, one matrix per level.
pub fn yoneda_morphism(a: &CosimplicialModule, m: usize, elem: &SparseVec) -> Result<Vec<QMatrix>> {
    if m > a.top() {
        return Err(Error::Input(format!("level {m} outside truncation {}", a.top())));
    }
    (0..=a.top())
        .map(|n| {
            let cols = enumerate(m, n).iter().map(|f| a.map(f)?.mul_vec(elem)).collect::<Result<Vec<_>>>()?;
            QMatrix::from_columns(a.dim(n), cols)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_module_moore() {
        let a = CosimplicialModule::constant(2, 4);
        let c = moore(&a).unwrap();
        assert!(c.d(0).is_zero());
        assert_eq!(c.d(1), QMatrix::identity(2));
        assert_eq!(c.cohomology_at(0).0, 2);
        for p in 1..4 {
            assert_eq!(c.cohomology_at(p).0, 0);
        }
    }

    #[test]
    fn level_zero_module() {
        let a = CosimplicialModule::constant(3, 0);
        let c = moore(&a).unwrap();
        assert_eq!(c.cohomology_at(0).0, 3);
    }

    #[test]
    fn z_dimensions_at_level_one() {
        let z = ZComplex::new(4, 3);
        let dims: Vec<usize> = (0..=3).map(|s| z.dim(1, s)).collect();
        assert_eq!(dims, vec![2, 3, 4, 5]);
    }

    #[test]
    fn truncation_for_window() {
        assert_eq!(Truncation::for_window(5, -3).unwrap(), Truncation::new(1, 5));
        assert!(Truncation::for_window(5, -4).is_err());
        assert!(Truncation::for_window(5, 1).is_err());
    }

    #[test]
    fn yoneda_unit() {
        let a = CosimplicialModule::representable(0, 3);
        let e = SparseVec::basis(1);
        let y = yoneda_morphism(&a, 1, &e).unwrap();
        let id_index = enumerate(1, 1).iter().position(|f| f.is_identity()).unwrap();
        assert_eq!(y[1].column(id_index), &e);
        let zero = yoneda_morphism(&a, 1, &SparseVec::zero()).unwrap();
        assert!(zero.iter().all(|m| m.is_zero()));
    }
}
