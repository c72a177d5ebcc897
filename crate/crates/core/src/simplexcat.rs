//! The simplex category: monotone maps `[m] -> [n]`, faces, degeneracies, composition
//! and lexicographic enumeration of Hom-sets.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Weakly increasing map `[m] -> [n]` stored by its values `f(0), ..., f(m)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotoneMap {
    target: u8,
    values: Vec<u8>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]→[{}]:(", self.source(), self.target)?;
        write!(f, "{}", self.values.iter().join(","))?;
        write!(f, ")")
    }
}

impl MonotoneMap {
    /// Checked constructor.
    pub fn new(target: usize, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("a monotone map needs at least one value".into()));
        }
        if target > u8::MAX as usize {
            return Err(Error::Input(format!("target [{target}] too large")));
        }
        if values.iter().any(|&v| v > target) {
            return Err(Error::Input(format!("values {values:?} leave [{target}]")));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Input(format!("values {values:?} are not weakly increasing")));
        }
        Ok(MonotoneMap { target: target as u8, values: values.into_iter().map(|v| v as u8).collect() })
    }

    fn raw(target: usize, values: Vec<u8>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        debug_assert!(values.iter().all(|&v| v as usize <= target));
        MonotoneMap { target: target as u8, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::raw(n, (0..=n as u8).collect())
    }

    /// The vertex `[0] -> [n]` with value `v`.
    pub fn vertex(n: usize, v: usize) -> Self {
        Self::raw(n, vec![v as u8])
    }

    /// The front face `0..i` as a map `[i] -> [m]`.
    pub fn front(i: usize, m: usize) -> Self {
        Self::raw(m, (0..=i as u8).collect())
    }

    /// The back face `i..m` as a map `[m-i] -> [m]`.
    pub fn back(i: usize, m: usize) -> Self {
        Self::raw(m, (i as u8..=m as u8).collect())
    }

    pub fn source(&self) -> usize {
        self.values.len() - 1
    }

    pub fn target(&self) -> usize {
        self.target as usize
    }

    pub fn values(&self) -> impl Iterator<Item = usize> + '_ {
        self.values.iter().map(|&v| v as usize)
    }

    pub fn at(&self, i: usize) -> usize {
        self.values[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.target() == self.source() && self.values.iter().enumerate().all(|(i, &v)| i == v as usize)
    }

    pub fn is_injective(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_surjective(&self) -> bool {
        self.values[0] == 0 && *self.values.last().unwrap() == self.target && self.values.windows(2).all(|w| w[1] - w[0] <= 1)
    }

    /// Sorted distinct values.
    pub fn image(&self) -> Vec<usize> {
        self.values.iter().dedup().map(|&v| v as usize).collect()
    }

    /// `g ∘ f`.
    pub fn compose(g: &MonotoneMap, f: &MonotoneMap) -> Result<MonotoneMap> {
        if f.target() != g.source() {
            return Err(Error::Input(format!("cannot compose {g:?} after {f:?}")));
        }
        Ok(Self::raw(g.target(), f.values.iter().map(|&v| g.values[v as usize]).collect()))
    }

    /// `self ∘ f`, panicking on mismatched endpoints (internal use).
    pub fn after(&self, f: &MonotoneMap) -> MonotoneMap {
        assert_eq!(f.target(), self.source(), "mismatched composition {self:?} ∘ {f:?}");
        Self::raw(self.target(), f.values.iter().map(|&v| self.values[v as usize]).collect())
    }

    /// Factors `self` as an injection after a surjection: `self = mono ∘ epi`.
    pub fn epi_mono(&self) -> (MonotoneMap, MonotoneMap) {
        let img = self.image();
        let epi = Self::raw(img.len() - 1, self.values.iter().map(|v| img.iter().position(|w| *w == *v as usize).unwrap() as u8).collect());
        let mono = Self::raw(self.target(), img.into_iter().map(|v| v as u8).collect());
        (epi, mono)
    }

    /// Writes `self = δ_{a_1} ∘ … ∘ δ_{a_r} ∘ σ_{b_1} ∘ … ∘ σ_{b_s}` and returns `(a, b)`.
    pub fn face_degeneracy_word(&self) -> (Vec<usize>, Vec<usize>) {
        let (epi, mono) = self.epi_mono();
        let img: Vec<usize> = mono.values().collect();
        let omitted: Vec<usize> = (0..=self.target()).filter(|v| !img.contains(v)).collect();
        // δ_{o_r} ∘ … ∘ δ_{o_1}: the outermost face omits the largest value.
        let faces: Vec<usize> = omitted.into_iter().rev().collect();
        // Peel the first repeated position: epi = epi' ∘ σ_j, so σ_j is innermost.
        let mut inner_first = Vec::new();
        let mut vals: Vec<usize> = epi.values().collect();
        while let Some(j) = (0..vals.len() - 1).find(|&j| vals[j] == vals[j + 1]) {
            inner_first.push(j);
            vals.remove(j + 1);
        }
        inner_first.reverse();
        (faces, inner_first)
    }
}

/// The coface `δ_i: [n-1] -> [n]` omitting `i`.
pub fn face(n: usize, i: usize) -> Result<MonotoneMap> {
    if n == 0 || i > n {
        return Err(Error::Input(format!("face δ_{i} undefined at level {n}")));
    }
    Ok(MonotoneMap::raw(n, (0..n as u8).map(|k| if (k as usize) < i { k } else { k + 1 }).collect()))
}

/// The codegeneracy `σ_i: [n+1] -> [n]` hitting `i` twice.
pub fn degeneracy(n: usize, i: usize) -> Result<MonotoneMap> {
    if i > n {
        return Err(Error::Input(format!("degeneracy σ_{i} undefined at level {n}")));
    }
    Ok(MonotoneMap::raw(n, (0..=n as u8 + 1).map(|k| if (k as usize) <= i { k } else { k - 1 }).collect()))
}

/// All monotone maps `[m] -> [n]` in lexicographic order of value sequences.
pub fn enumerate(m: usize, n: usize) -> Vec<MonotoneMap> {
    (0..=n as u8)
        .combinations_with_replacement(m + 1)
        .map(|v| MonotoneMap::raw(n, v))
        .collect()
}

/// `|Hom([m],[n])| = C(m+n+1, m+1)`.
pub fn hom_count(m: usize, n: usize) -> usize {
    let (a, b) = (m + n + 1, m + 1);
    let mut r: u128 = 1;
    for i in 0..b {
        r = r * (a - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm(target: usize, v: &[usize]) -> MonotoneMap {
        MonotoneMap::new(target, v.to_vec()).unwrap()
    }

    #[test]
    fn faces_and_degeneracies() {
        assert_eq!(face(1, 0).unwrap(), mm(1, &[1]));
        assert_eq!(face(1, 1).unwrap(), mm(1, &[0]));
        assert_eq!(degeneracy(1, 0).unwrap(), mm(1, &[0, 0, 1]));
        assert!(face(2, 3).is_err());
        assert!(degeneracy(1, 2).is_err());
    }

    #[test]
    fn composition_examples() {
        let d0 = face(1, 0).unwrap();
        let d1 = face(2, 1).unwrap();
        assert_eq!(MonotoneMap::compose(&d1, &d0).unwrap(), mm(2, &[2]));
        let s0 = degeneracy(0, 0).unwrap();
        assert!(MonotoneMap::compose(&s0, &d0).unwrap().is_identity());
        let f = mm(3, &[0, 2, 2]);
        assert_eq!(MonotoneMap::compose(&MonotoneMap::identity(3), &f).unwrap(), f);
        assert!(MonotoneMap::compose(&f, &f).is_err());
    }

    #[test]
    fn constructor_validates() {
        assert!(MonotoneMap::new(2, vec![1, 0]).is_err());
        assert!(MonotoneMap::new(2, vec![0, 3]).is_err());
        assert!(MonotoneMap::new(2, vec![]).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate(4, 0).len(), 1);
        assert_eq!(enumerate(0, 5).len(), 6);
        assert_eq!(enumerate(1, 1), vec![mm(1, &[0, 0]), mm(1, &[0, 1]), mm(1, &[1, 1])]);
    }

    #[test]
    fn front_and_back_faces() {
        assert_eq!(MonotoneMap::front(1, 3), mm(3, &[0, 1]));
        assert_eq!(MonotoneMap::back(1, 3), mm(3, &[1, 2, 3]));
    }
}
