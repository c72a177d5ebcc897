//! Exact linear algebra over the rationals.
//!
//! Matrices are stored column-wise as sparse lists. Elimination is fraction-free:
//! reduced vectors are kept as primitive integer vectors and the pivot of a column is
//! its first nonzero row after reduction, so bases come out the same on every run.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Q = BigRational;

/// Integer as a rational.
pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// The fraction `n/d`.
pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `(-1)^k` as a rational.
pub fn sign(k: i64) -> Q {
    if k.rem_euclid(2) == 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

/// Parses `a`, `-a` or `a/b` with integer `a`, `b`.
pub fn parse_q(s: &str) -> std::result::Result<Q, String> {
    let t = s.trim();
    let bad = || format!("not an exact rational: {s:?}");
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = t.parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

/// Canonical text form: `a` or `a/b` in lowest terms.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Generalized binomial coefficient `C(p, j)` for integer `p` and `j >= 0`.
pub fn binom(p: i64, j: u32) -> Q {
    let mut r = Q::one();
    for i in 0..j as i64 {
        r = r * q(p - i) / q(i + 1);
    }
    r
}

/// Finite formal linear combination of keys with rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinComb<K: Ord> {
    terms: BTreeMap<K, Q>,
}

impl<K: Ord> Default for LinComb<K> {
    fn default() -> Self {
        LinComb { terms: BTreeMap::new() }
    }
}

impl<K: Ord + fmt::Debug> fmt::Debug for LinComb<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({})·{:?}", fmt_q(c), k)?;
        }
        Ok(())
    }
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(k: K) -> Self {
        Self::term(k, Q::one())
    }

    pub fn term(k: K, c: Q) -> Self {
        let mut v = Self::zero();
        v.add_term(k, c);
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (&K, &Q)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl DoubleEndedIterator<Item = &K> {
        self.terms.keys()
    }

    pub fn coeff(&self, k: &K) -> Q {
        self.terms.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, k: K, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v * c);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), v.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (k, v) in &other.terms {
            self.add_term(k.clone(), -v.clone());
        }
    }

    pub fn scaled(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn neg(&self) -> Self {
        self.scaled(&-Q::one())
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(other);
        r
    }

    pub fn diff(&self, other: &Self) -> Self {
        let mut r = self.clone();
        r.sub_assign(other);
        r
    }

    /// Applies a linear map given on keys.
    pub fn map_linear<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> LinComb<L>) -> LinComb<L> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_scaled(&f(k), c);
        }
        out
    }

    /// Relabels keys; colliding keys are summed.
    pub fn map_keys<L: Ord + Clone>(&self, mut f: impl FnMut(&K) -> L) -> LinComb<L> {
        let mut out = LinComb::zero();
        for (k, c) in &self.terms {
            out.add_term(f(k), c.clone());
        }
        out
    }

    pub fn filter(&self, mut keep: impl FnMut(&K) -> bool) -> Self {
        LinComb { terms: self.terms.iter().filter(|(k, _)| keep(k)).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    pub fn into_iter_terms(self) -> impl Iterator<Item = (K, Q)> {
        self.terms.into_iter()
    }
}

impl<K: Ord + Clone> FromIterator<(K, Q)> for LinComb<K> {
    fn from_iter<T: IntoIterator<Item = (K, Q)>>(iter: T) -> Self {
        let mut v = Self::zero();
        for (k, c) in iter {
            v.add_term(k, c);
        }
        v
    }
}

/// Sparse column vector indexed by position.
pub type SparseVec = LinComb<usize>;

/// Dense rational column from a sparse one.
pub fn to_dense(v: &SparseVec, len: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); len];
    for (i, c) in v.iter() {
        out[*i] = c.clone();
    }
    out
}

/// Sparse vector from a dense column.
pub fn from_dense(v: &[Q]) -> SparseVec {
    v.iter().enumerate().map(|(i, c)| (i, c.clone())).collect()
}

/// Sparse rational matrix, stored by columns.
#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<SparseVec>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| fmt_q(&self.get(r, c))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl QMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![SparseVec::zero(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        QMatrix { rows: n, cols: n, data: (0..n).map(SparseVec::basis).collect() }
    }

    /// Builds a matrix from `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, Q)>) -> Result<Self> {
        let mut m = Self::zero(rows, cols);
        for (r, c, v) in entries {
            if r >= rows || c >= cols {
                return Err(Error::Input(format!("entry ({r}, {c}) outside a {rows}x{cols} matrix")));
            }
            m.data[c].add_term(r, v);
        }
        Ok(m)
    }

    /// Builds a matrix from its columns.
    pub fn from_columns(rows: usize, cols: Vec<SparseVec>) -> Result<Self> {
        for (j, c) in cols.iter().enumerate() {
            if let Some(r) = c.keys().next_back() {
                if *r >= rows {
                    return Err(Error::Input(format!("column {j} has entry in row {r} >= {rows}")));
                }
            }
        }
        Ok(QMatrix { rows, cols: cols.len(), data: cols })
    }

    /// Builds a matrix from dense rows.
    pub fn from_rows(rows: &[Vec<Q>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::Input("ragged matrix rows".into()));
        }
        Self::from_triplets(r, c, rows.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, v.clone()))))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &SparseVec {
        &self.data[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        self.data[c].coeff(&r)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    /// Nonzero entries as `(row, col, value)` in column-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, Q)> {
        let mut out = Vec::with_capacity(self.nnz());
        for (j, col) in self.data.iter().enumerate() {
            for (i, v) in col.iter() {
                out.push((*i, j, v.clone()));
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for (j, col) in self.data.iter().enumerate() {
            for (i, v) in col.iter() {
                t.data[*i].add_term(j, v.clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &SparseVec) -> Result<SparseVec> {
        if let Some(j) = x.keys().next_back() {
            if *j >= self.cols {
                return Err(Error::Input(format!("vector index {j} exceeds {} columns", self.cols)));
            }
        }
        let mut out = SparseVec::zero();
        for (j, c) in x.iter() {
            out.add_scaled(&self.data[*j], c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &QMatrix) -> Result<QMatrix> {
        if self.cols != other.rows {
            return Err(Error::Input(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = other.data.iter().map(|c| self.mul_vec(c)).collect::<Result<Vec<_>>>()?;
        Ok(QMatrix { rows: self.rows, cols: other.cols, data })
    }

    pub fn add(&self, other: &QMatrix) -> Result<QMatrix> {
        self.add_scaled(other, &Q::one())
    }

    pub fn add_scaled(&self, other: &QMatrix, c: &Q) -> Result<QMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Input("matrix shape mismatch in sum".into()));
        }
        let mut m = self.clone();
        for (a, b) in m.data.iter_mut().zip(&other.data) {
            a.add_scaled(b, c);
        }
        Ok(m)
    }

    pub fn scaled(&self, c: &Q) -> QMatrix {
        QMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.scaled(c)).collect() }
    }

    pub fn rank(&self) -> usize {
        let mut e = Echelon::new(false);
        for c in &self.data {
            e.insert(c);
        }
        e.rank()
    }

    /// Basis of the null space, one vector per non-pivot column.
    pub fn kernel(&self) -> Vec<SparseVec> {
        let mut e = Echelon::new(true);
        let mut out = Vec::new();
        for (j, c) in self.data.iter().enumerate() {
            if let Insert::Dependent(tag) = e.insert_tagged(c, SparseVec::basis(j)) {
                out.push(tag);
            }
        }
        out
    }

    /// Indices of the pivot columns; these columns form a basis of the image.
    pub fn pivot_columns(&self) -> Vec<usize> {
        let mut e = Echelon::new(false);
        let mut out = Vec::new();
        for (j, c) in self.data.iter().enumerate() {
            if matches!(e.insert(c), Insert::Pivot) {
                out.push(j);
            }
        }
        out
    }
}

/// Returns `x` with `A x = b`, or `None` when `b` is outside the column space.
pub fn solve(a: &QMatrix, b: &SparseVec) -> Result<Option<SparseVec>> {
    if let Some(r) = b.keys().next_back() {
        if *r >= a.rows() {
            return Err(Error::Input(format!("right-hand side has index {r} but the matrix has {} rows", a.rows())));
        }
    }
    let mut e = Echelon::new(true);
    for (j, c) in a.columns().iter().enumerate() {
        e.insert_tagged(c, SparseVec::basis(j));
    }
    Ok(e.express(b))
}

/// Same as [`solve`] but takes a dense right-hand side of length `A.rows`.
pub fn solve_dense(a: &QMatrix, b: &[Q]) -> Result<Option<Vec<Q>>> {
    if b.len() != a.rows() {
        return Err(Error::Input(format!("right-hand side has length {} but the matrix has {} rows", b.len(), a.rows())));
    }
    Ok(solve(a, &from_dense(b))?.map(|x| to_dense(&x, a.cols())))
}

/// Result of inserting a vector into an [`Echelon`].
pub enum Insert {
    /// The vector became a new pivot.
    Pivot,
    /// The vector was dependent; carries `t` with `Σ t_j v_j = 0` when tags are tracked.
    Dependent(SparseVec),
}

#[derive(Clone)]
struct IntVec {
    entries: Vec<(usize, BigInt)>,
}

impl IntVec {
    /// Primitive integer multiple of a rational vector; returns it with the factor used.
    fn from_rational(v: &SparseVec) -> (IntVec, Q) {
        let mut den = BigInt::one();
        for (_, c) in v.iter() {
            den = den.lcm(c.denom());
        }
        let mut entries: Vec<(usize, BigInt)> =
            v.iter().map(|(i, c)| (*i, c.numer() * (&den / c.denom()))).collect();
        let g = content(&entries);
        if !g.is_one() && !g.is_zero() {
            for e in entries.iter_mut() {
                e.1 = &e.1 / &g;
            }
        }
        let factor = if g.is_zero() { Q::one() } else { Q::new(den, g) };
        (IntVec { entries }, factor)
    }

    fn lead(&self) -> Option<(usize, &BigInt)> {
        self.entries.first().map(|(i, c)| (*i, c))
    }
}

fn content(entries: &[(usize, BigInt)]) -> BigInt {
    let mut g = BigInt::zero();
    for (_, c) in entries {
        g = g.gcd(c);
        if g.is_one() {
            break;
        }
    }
    g
}

/// `a*x - b*y` for sorted sparse integer vectors.
fn comb(a: &BigInt, x: &[(usize, BigInt)], b: &BigInt, y: &[(usize, BigInt)]) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j >= y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i >= x.len() || (j < y.len() && y[j].0 < x[i].0);
        if take_x {
            out.push((x[i].0, a * &x[i].1));
            i += 1;
        } else if take_y {
            out.push((y[j].0, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((x[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Incremental fraction-free row echelon structure over a stream of vectors.
///
/// Each stored pivot vector `w` satisfies `w = Σ tag_j v_j` in terms of the inserted
/// vectors when tags are tracked.
pub struct Echelon {
    track: bool,
    pivots: BTreeMap<usize, usize>,
    vecs: Vec<IntVec>,
    tags: Vec<SparseVec>,
}

impl Echelon {
    pub fn new(track_tags: bool) -> Self {
        Echelon { track: track_tags, pivots: BTreeMap::new(), vecs: Vec::new(), tags: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.vecs.len()
    }

    pub fn insert(&mut self, v: &SparseVec) -> Insert {
        self.insert_tagged(v, SparseVec::zero())
    }

    /// Inserts `v`, whose tag (its expression in the caller's basis) is `tag`.
    pub fn insert_tagged(&mut self, v: &SparseVec, tag: SparseVec) -> Insert {
        let (mut w, f) = IntVec::from_rational(v);
        let mut t = if self.track { tag.scaled(&f) } else { SparseVec::zero() };
        loop {
            let Some((lead, coef)) = w.lead() else {
                return Insert::Dependent(t);
            };
            let Some(&pi) = self.pivots.get(&lead) else {
                break;
            };
            let p = &self.vecs[pi];
            let a = p.entries[0].1.clone();
            let b = coef.clone();
            let g = a.gcd(&b);
            let (a, b) = (&a / &g, &b / &g);
            let mut entries = comb(&a, &w.entries, &b, &p.entries);
            let c = content(&entries);
            if self.track {
                t = t.scaled(&Q::from_integer(a.clone()));
                t.add_scaled(&self.tags[pi], &Q::from_integer(-b.clone()));
            }
            if !c.is_zero() && !c.is_one() {
                for e in entries.iter_mut() {
                    e.1 = &e.1 / &c;
                }
                if self.track {
                    t = t.scaled(&Q::new(BigInt::one(), c));
                }
            }
            w = IntVec { entries };
        }
        let lead = w.entries[0].0;
        self.pivots.insert(lead, self.vecs.len());
        self.vecs.push(w);
        self.tags.push(t);
        Insert::Pivot
    }

    /// Writes `b` as a combination of inserted vectors (by tag), if possible.
    pub fn express(&self, b: &SparseVec) -> Option<SparseVec> {
        if b.is_zero() {
            return Some(SparseVec::zero());
        }
        let mut w: Vec<(usize, Q)> = b.iter().map(|(i, c)| (*i, c.clone())).collect();
        let mut x = SparseVec::zero();
        while let Some((lead, coef)) = w.first().cloned() {
            let &pi = self.pivots.get(&lead)?;
            let p = &self.vecs[pi];
            let f = coef / Q::from_integer(p.entries[0].1.clone());
            let mut acc: BTreeMap<usize, Q> = w.into_iter().collect();
            for (i, c) in &p.entries {
                let e = acc.entry(*i).or_insert_with(Q::zero);
                *e -= &f * Q::from_integer(c.clone());
                if e.is_zero() {
                    acc.remove(i);
                }
            }
            w = acc.into_iter().collect();
            if self.track {
                x.add_scaled(&self.tags[pi], &f);
            }
        }
        Some(x)
    }

    /// True when `b` lies in the span of the inserted vectors.
    pub fn contains(&self, b: &SparseVec) -> bool {
        self.express(b).is_some()
    }
}

/// Finite cochain complex `C^lo -> ... -> C^hi` with differentials of degree +1.
#[derive(Clone, Debug)]
pub struct FiniteComplex {
    lo: i64,
    dims: Vec<usize>,
    diffs: Vec<QMatrix>,
}

impl FiniteComplex {
    /// `dims[k]` is the dimension in degree `lo + k`; `diffs[k]` maps degree `lo + k` to `lo + k + 1`.
    pub fn new(lo: i64, dims: Vec<usize>, diffs: Vec<QMatrix>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Input("complex needs at least one degree".into()));
        }
        if diffs.len() + 1 != dims.len() {
            return Err(Error::Input(format!("{} degrees need {} differentials, got {}", dims.len(), dims.len() - 1, diffs.len())));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.cols() != dims[k] || d.rows() != dims[k + 1] {
                return Err(Error::Input(format!(
                    "differential in degree {} is {}x{}, expected {}x{}",
                    lo + k as i64,
                    d.rows(),
                    d.cols(),
                    dims[k + 1],
                    dims[k]
                )));
            }
        }
        for k in 0..diffs.len().saturating_sub(1) {
            if !diffs[k + 1].mul(&diffs[k])?.is_zero() {
                return Err(Error::Invariant(format!("d∘d != 0 starting in degree {}", lo + k as i64)));
            }
        }
        Ok(FiniteComplex { lo, dims, diffs })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }

    pub fn dim(&self, p: i64) -> usize {
        if p < self.lo || p > self.hi() {
            0
        } else {
            self.dims[(p - self.lo) as usize]
        }
    }

    /// The differential out of degree `p` (zero map outside the stored range).
    pub fn d(&self, p: i64) -> QMatrix {
        if p >= self.lo && p < self.hi() {
            self.diffs[(p - self.lo) as usize].clone()
        } else {
            QMatrix::zero(self.dim(p + 1), self.dim(p))
        }
    }

    /// Rank of `H^p` and cocycle representatives of a basis.
    pub fn cohomology_at(&self, p: i64) -> (usize, Vec<SparseVec>) {
        let basis = CohomologyBasis::new(self, p);
        (basis.reps.len(), basis.reps.clone())
    }
}

/// Cocycle representatives for `H^p` together with a decomposer for classes.
pub struct CohomologyBasis {
    pub degree: i64,
    pub reps: Vec<SparseVec>,
    image_dim: usize,
    echelon: Echelon,
    d_out: QMatrix,
}

impl CohomologyBasis {
    pub fn new(c: &FiniteComplex, p: i64) -> Self {
        let d_in = c.d(p - 1);
        let d_out = c.d(p);
        let mut echelon = Echelon::new(true);
        let mut image_dim = 0;
        for col in d_in.columns() {
            if matches!(echelon.insert_tagged(col, SparseVec::zero()), Insert::Pivot) {
                image_dim += 1;
            }
        }
        let mut reps = Vec::new();
        for z in d_out.kernel() {
            let idx = reps.len();
            if matches!(echelon.insert_tagged(&z, SparseVec::basis(idx)), Insert::Pivot) {
                reps.push(z);
            }
        }
        CohomologyBasis { degree: p, reps, image_dim, echelon, d_out }
    }

    pub fn rank(&self) -> usize {
        self.reps.len()
    }

    pub fn image_dim(&self) -> usize {
        self.image_dim
    }

    /// Coordinates of the class of the cocycle `z` in the representative basis.
    pub fn class_of(&self, z: &SparseVec) -> Result<Vec<Q>> {
        if !self.d_out.mul_vec(z)?.is_zero() {
            return Err(Error::Invariant(format!("vector in degree {} is not a cocycle", self.degree)));
        }
        let x = self
            .echelon
            .express(z)
            .ok_or_else(|| Error::Invariant(format!("cocycle in degree {} not spanned by representatives and coboundaries", self.degree)))?;
        Ok(to_dense(&x, self.reps.len()))
    }

    /// True when `z` is a coboundary.
    pub fn is_coboundary(&self, z: &SparseVec) -> Result<bool> {
        Ok(self.class_of(z)?.iter().all(|c| c.is_zero()))
    }
}

/// Sign helper: `-x` if `negate`, else `x`.
pub fn signed(x: Q, negate: bool) -> Q {
    if negate {
        -x
    } else {
        x
    }
}

/// True when `x` is a nonnegative integer-valued rational.
pub fn is_nonneg_integer(x: &Q) -> bool {
    x.is_integer() && !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn parse_and_format_rationals() {
        assert_eq!(parse_q("3/6").unwrap(), qf(1, 2));
        assert_eq!(parse_q(" -7 ").unwrap(), q(-7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("1.5").is_err());
        assert_eq!(fmt_q(&qf(-4, 6)), "-2/3");
        assert_eq!(fmt_q(&q(5)), "5");
    }

    #[test]
    fn generalized_binomials() {
        assert_eq!(binom(5, 2), q(10));
        assert_eq!(binom(2, 3), q(0));
        assert_eq!(binom(-1, 3), q(-1));
        assert_eq!(binom(-2, 2), q(3));
        assert_eq!(binom(7, 0), q(1));
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let b = from_dense(&[q(3), qf(-1, 2), q(0), q(7)]);
        assert_eq!(solve(&QMatrix::identity(4), &b).unwrap(), Some(b));
    }

    #[test]
    fn inconsistent_system_has_no_solution() {
        let a = QMatrix::zero(1, 1);
        assert_eq!(solve(&a, &SparseVec::basis(0)).unwrap(), None);
    }

    #[test]
    fn solve_rejects_dimension_mismatch() {
        assert!(solve_dense(&QMatrix::identity(2), &[q(1)]).is_err());
    }

    #[test]
    fn kernel_and_rank_of_small_matrix() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(a.rank(), 1);
        let k = a.kernel();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).unwrap().is_zero());
        }
    }

    #[test]
    fn zero_differentials_give_full_cohomology() {
        let c = FiniteComplex::new(0, vec![3], vec![]).unwrap();
        assert_eq!(c.cohomology_at(0).0, 3);
    }

    #[test]
    fn identity_differential_kills_cohomology() {
        let c = FiniteComplex::new(0, vec![2, 2], vec![QMatrix::identity(2)]).unwrap();
        assert_eq!(c.cohomology_at(1).0, 0);
        assert_eq!(c.cohomology_at(0).0, 0);
    }

    #[test]
    fn complex_rejects_nonzero_square() {
        let d = QMatrix::identity(1);
        assert!(matches!(FiniteComplex::new(0, vec![1, 1, 1], vec![d.clone(), d]), Err(Error::Invariant(_))));
    }

    #[test]
    fn simplicial_circle() {
        // Cochains of the boundary of a triangle: vertices 0,1,2 and edges 01, 02, 12.
        let d = m(&[&[-1, 1, 0], &[-1, 0, 1], &[0, -1, 1]]);
        let c = FiniteComplex::new(0, vec![3, 3], vec![d]).unwrap();
        assert_eq!(c.cohomology_at(0).0, 1);
        assert_eq!(c.cohomology_at(1).0, 1);
    }

    #[test]
    fn class_decomposition_ignores_coboundaries() {
        let d = m(&[&[-1, 1, 0], &[-1, 0, 1], &[0, -1, 1]]);
        let c = FiniteComplex::new(0, vec![3, 3], vec![d.clone()]).unwrap();
        let h = CohomologyBasis::new(&c, 1);
        let rep = h.reps[0].clone();
        let mut z = rep.scaled(&q(3));
        z.add_assign(&d.mul_vec(&from_dense(&[q(1), q(5), q(-2)])).unwrap());
        assert_eq!(h.class_of(&z).unwrap(), vec![q(3)]);
    }
}
