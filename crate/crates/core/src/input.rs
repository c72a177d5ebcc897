//! TOML input files for covers, single algebras and secondary operation tables.
//!
//! A cover file names its opens and gives a fiber per intersection plus restrictions:
//!
//! ```toml
//! kind = "lie"
//! opens = ["U", "V"]
//!
//! [default_fiber]
//! preset = "sl2"
//!
//! [[restriction]]
//! from = ["V"]
//! to = ["U", "V"]
//! images = ["2*e", "h", "1/2*f"]
//! ```
//!
//! A file without `opens` describes one algebra, with the fiber fields at top level.
//! Elements are written as sums like `2*e - 1/2*d^2(L)`, where `d^k(x)` is `∂^k x`.

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::cech::{nonempty_subsets, BilinearTable, Fiber, FiberKind, NerveSheaf};
use crate::conformal::{ConformalAlgebra, SecondaryTable, VertexAlgebraData};
use crate::error::{Error, Result};
use crate::exactlin::{fmt_q, parse_q, q, QMatrix, SparseVec, Q};

/// A parsed input file.
#[derive(Clone, Debug, PartialEq)]
pub enum Input {
    Sheaf(NerveSheaf),
    Algebra(Fiber),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InputFile {
    kind: Spanned<String>,
    opens: Option<Vec<Spanned<String>>>,
    identity_default: Option<bool>,
    default_fiber: Option<FiberSpec>,
    #[serde(default)]
    fiber: Vec<FiberSpec>,
    #[serde(default)]
    restriction: Vec<RestrictionSpec>,
    preset: Option<Spanned<String>>,
    dim: Option<usize>,
    degree: Option<usize>,
    central_charge: Option<Spanned<String>>,
    names: Option<Vec<Spanned<String>>>,
    #[serde(default)]
    central: Vec<Spanned<String>>,
    #[serde(default)]
    products: Vec<ProductSpec>,
    degrees: Option<Vec<i64>>,
    #[serde(default)]
    differential: Vec<DiffSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberSpec {
    over: Option<Spanned<Vec<Spanned<String>>>>,
    preset: Option<Spanned<String>>,
    dim: Option<usize>,
    degree: Option<usize>,
    central_charge: Option<Spanned<String>>,
    names: Option<Vec<Spanned<String>>>,
    #[serde(default)]
    central: Vec<Spanned<String>>,
    #[serde(default)]
    products: Vec<ProductSpec>,
    degrees: Option<Vec<i64>>,
    #[serde(default)]
    differential: Vec<DiffSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductSpec {
    a: Spanned<String>,
    b: Spanned<String>,
    n: Option<i64>,
    value: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiffSpec {
    from: Spanned<String>,
    value: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RestrictionSpec {
    from: Spanned<Vec<Spanned<String>>>,
    to: Spanned<Vec<Spanned<String>>>,
    images: Spanned<Vec<Spanned<String>>>,
}

/// Source text plus file name, for positioned errors.
struct Src<'a> {
    text: &'a str,
    file: &'a str,
}

impl Src<'_> {
    fn err(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let before = &self.text[..span.start.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Parse { file: self.file.into(), line, column, message: message.into() }
    }
}

pub fn read_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    parse_input(&text, &path.display().to_string())
}

pub fn parse_input(text: &str, file: &str) -> Result<Input> {
    let src = Src { text, file };
    let raw: InputFile = toml::from_str(text).map_err(|e| src.err(e.span().unwrap_or(0..0), e.message().to_string()))?;
    let kind = parse_kind(&src, &raw.kind)?;
    match raw.opens {
        Some(opens) => {
            let top_level = raw.preset.is_some() || raw.names.is_some() || !raw.products.is_empty();
            if top_level {
                return Err(src.err(raw.kind.span(), "a cover file gives its algebras in [default_fiber] or [[fiber]] tables"));
            }
            let sheaf = build_sheaf(&src, kind, opens, raw.identity_default.unwrap_or(true), raw.default_fiber, raw.fiber, raw.restriction)?;
            Ok(Input::Sheaf(sheaf))
        }
        None => {
            if raw.default_fiber.is_some() || !raw.fiber.is_empty() || !raw.restriction.is_empty() {
                return Err(src.err(raw.kind.span(), "fiber and restriction tables need a list of opens"));
            }
            let spec = FiberSpec {
                over: None,
                preset: raw.preset,
                dim: raw.dim,
                degree: raw.degree,
                central_charge: raw.central_charge,
                names: raw.names,
                central: raw.central,
                products: raw.products,
                degrees: raw.degrees,
                differential: raw.differential,
            };
            Ok(Input::Algebra(build_fiber(&src, kind, &spec, raw.kind.span())?))
        }
    }
}

pub fn parse_sheaf(text: &str, file: &str) -> Result<NerveSheaf> {
    match parse_input(text, file)? {
        Input::Sheaf(s) => Ok(s),
        Input::Algebra(f) => Ok(NerveSheaf::single(f)),
    }
}

fn parse_kind(src: &Src, k: &Spanned<String>) -> Result<FiberKind> {
    match k.get_ref().as_str() {
        "lie" => Ok(FiberKind::Lie),
        "commutative" => Ok(FiberKind::Commutative),
        "conformal" => Ok(FiberKind::Conformal),
        "vertex" => Ok(FiberKind::Vertex),
        other => Err(src.err(k.span(), format!("unknown kind `{other}` (expected lie, commutative, conformal or vertex)"))),
    }
}

fn build_sheaf(
    src: &Src,
    kind: FiberKind,
    opens: Vec<Spanned<String>>,
    identity_default: bool,
    default_fiber: Option<FiberSpec>,
    fibers: Vec<FiberSpec>,
    restrictions: Vec<RestrictionSpec>,
) -> Result<NerveSheaf> {
    let names: Vec<String> = opens.iter().map(|o| o.get_ref().clone()).collect();
    for (i, o) in opens.iter().enumerate() {
        if names[..i].contains(o.get_ref()) {
            return Err(src.err(o.span(), format!("open `{}` is listed twice", o.get_ref())));
        }
    }
    if names.is_empty() {
        return Err(Error::Input(format!("{}: a cover needs at least one open", src.file)));
    }
    let subset = |s: &Spanned<Vec<Spanned<String>>>| -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for o in s.get_ref() {
            let i = names.iter().position(|n| n == o.get_ref()).ok_or_else(|| src.err(o.span(), format!("unknown open `{}`", o.get_ref())))?;
            out.push(i);
        }
        out.sort_unstable();
        out.dedup();
        if out.is_empty() {
            return Err(src.err(s.span(), "empty intersection"));
        }
        Ok(out)
    };
    let mut sheaf = NerveSheaf { opens: names.clone(), kind, fibers: BTreeMap::new(), restrictions: BTreeMap::new(), identity_default };
    if let Some(spec) = &default_fiber {
        if let Some(o) = &spec.over {
            return Err(src.err(o.span(), "the default fiber applies to every intersection and takes no `over`"));
        }
        let f = build_fiber(src, kind, spec, 0..0)?;
        for s in nonempty_subsets(names.len()) {
            sheaf.fibers.insert(s, f.clone());
        }
    }
    for spec in &fibers {
        let over = spec.over.as_ref().ok_or_else(|| Error::Input(format!("{}: every [[fiber]] needs `over`", src.file)))?;
        let s = subset(over)?;
        sheaf.fibers.insert(s, build_fiber(src, kind, spec, over.span())?);
    }
    for r in &restrictions {
        let (s, t) = (subset(&r.from)?, subset(&r.to)?);
        if !s.iter().all(|i| t.contains(i)) || s == t {
            return Err(src.err(r.to.span(), "restrictions go from an intersection to a strictly smaller one"));
        }
        let fs = sheaf.fibers.get(&s).ok_or_else(|| src.err(r.from.span(), "no fiber given over this intersection"))?;
        let ft = sheaf.fibers.get(&t).ok_or_else(|| src.err(r.to.span(), "no fiber given over this intersection"))?;
        if r.images.get_ref().len() != fs.dim() {
            return Err(src.err(r.images.span(), format!("expected {} images, one per generator of the source", fs.dim())));
        }
        let cols = r
            .images
            .get_ref()
            .iter()
            .map(|im| parse_element(im.get_ref(), ft.names(), None).map_err(|m| src.err(im.span(), m)))
            .collect::<Result<Vec<_>>>()?;
        sheaf.restrictions.insert((s, t), QMatrix::from_columns(ft.dim(), cols)?);
    }
    Ok(sheaf)
}

fn build_fiber(src: &Src, kind: FiberKind, spec: &FiberSpec, at: Range<usize>) -> Result<Fiber> {
    if let Some(p) = &spec.preset {
        let explicit = spec.names.is_some() || !spec.products.is_empty() || !spec.central.is_empty();
        if explicit {
            return Err(src.err(p.span(), "a preset cannot be combined with names, products or central elements"));
        }
        let f = preset(src, kind, p, spec)?;
        return with_differential(src, f, spec);
    }
    let names_sp = spec.names.as_ref().ok_or_else(|| src.err(at.clone(), "a fiber needs either `preset` or `names`"))?;
    let names: Vec<String> = names_sp.iter().map(|n| n.get_ref().clone()).collect();
    for (i, n) in names_sp.iter().enumerate() {
        if names[..i].contains(n.get_ref()) {
            return Err(src.err(n.span(), format!("generator `{}` is listed twice", n.get_ref())));
        }
    }
    let dim = names.len();
    let index = |s: &Spanned<String>| names.iter().position(|n| n == s.get_ref()).ok_or_else(|| src.err(s.span(), format!("unknown generator `{}`", s.get_ref())));
    let fiber = match kind {
        FiberKind::Lie | FiberKind::Commutative => {
            if let Some(c) = spec.central.first() {
                return Err(src.err(c.span(), "central flags apply to conformal algebras only"));
            }
            let mut given: BTreeMap<(usize, usize), SparseVec> = BTreeMap::new();
            for p in &spec.products {
                if p.n.is_some() {
                    return Err(src.err(p.a.span(), "products of a Lie or commutative algebra take no index `n`"));
                }
                let key = (index(&p.a)?, index(&p.b)?);
                let v = parse_element(p.value.get_ref(), &names, None).map_err(|m| src.err(p.value.span(), m))?;
                if given.insert(key, v).is_some() {
                    return Err(src.err(p.a.span(), "product given twice"));
                }
            }
            let mut table = vec![vec![SparseVec::zero(); dim]; dim];
            let flip = if kind == FiberKind::Lie { q(-1) } else { q(1) };
            for ((a, b), v) in &given {
                table[*a][*b] = v.clone();
                if !given.contains_key(&(*b, *a)) {
                    table[*b][*a] = v.scaled(&flip);
                }
            }
            let t = BilinearTable::new(names.clone(), table)?;
            if kind == FiberKind::Lie {
                Fiber::Lie(t)
            } else {
                Fiber::Commutative(t)
            }
        }
        FiberKind::Conformal => {
            let mut central = vec![false; dim];
            for c in &spec.central {
                central[index(c)?] = true;
            }
            let mut table: BTreeMap<(usize, usize), Vec<SparseVec>> = BTreeMap::new();
            for p in &spec.products {
                let n = p.n.ok_or_else(|| src.err(p.a.span(), "conformal products need an index `n`"))?;
                if n < 0 {
                    return Err(src.err(p.a.span(), "conformal products have n >= 0"));
                }
                let key = (index(&p.a)?, index(&p.b)?);
                let v = parse_element(p.value.get_ref(), &names, Some(dim)).map_err(|m| src.err(p.value.span(), m))?;
                let row = table.entry(key).or_default();
                if row.len() <= n as usize {
                    row.resize(n as usize + 1, SparseVec::zero());
                }
                if !row[n as usize].is_zero() {
                    return Err(src.err(p.a.span(), "product given twice"));
                }
                row[n as usize] = v;
            }
            Fiber::Conformal(ConformalAlgebra::new(names.clone(), central, table)?.complete_by_skew()?)
        }
        FiberKind::Vertex => {
            if let Some(c) = spec.central.first() {
                return Err(src.err(c.span(), "central flags apply to conformal algebras only"));
            }
            let mut table: BTreeMap<(usize, usize), BTreeMap<i64, SparseVec>> = BTreeMap::new();
            for p in &spec.products {
                let n = p.n.ok_or_else(|| src.err(p.a.span(), "vertex products need an index `n`"))?;
                let key = (index(&p.a)?, index(&p.b)?);
                let v = parse_element(p.value.get_ref(), &names, None).map_err(|m| src.err(p.value.span(), m))?;
                if table.entry(key).or_default().insert(n, v).is_some() {
                    return Err(src.err(p.a.span(), "product given twice"));
                }
            }
            Fiber::Vertex(VertexAlgebraData::new(names.clone(), table)?)
        }
    };
    with_differential(src, fiber, spec)
}

fn preset(src: &Src, kind: FiberKind, p: &Spanned<String>, spec: &FiberSpec) -> Result<Fiber> {
    let need_dim = || spec.dim.ok_or_else(|| src.err(p.span(), "preset `abelian` needs `dim`"));
    let need_degree = || spec.degree.ok_or_else(|| src.err(p.span(), "preset `truncated-polynomials` needs `degree`"));
    let f = match (kind, p.get_ref().as_str()) {
        (_, "zero") => Fiber::zero(kind),
        (FiberKind::Lie, "sl2") => Fiber::Lie(BilinearTable::sl2()),
        (FiberKind::Lie, "abelian") => Fiber::Lie(BilinearTable::zero(need_dim()?)),
        (FiberKind::Commutative, "abelian") => Fiber::Commutative(BilinearTable::zero(need_dim()?)),
        (FiberKind::Commutative, "truncated-polynomials") => {
            let n = need_degree()? + 1;
            let names = (0..n).map(|k| format!("x^{k}")).collect();
            let table = (0..n).map(|i| (0..n).map(|j| if i + j < n { SparseVec::basis(i + j) } else { SparseVec::zero() }).collect()).collect();
            Fiber::Commutative(BilinearTable::new(names, table)?)
        }
        (FiberKind::Conformal, "abelian") => Fiber::Conformal(ConformalAlgebra::abelian(need_dim()?)),
        (FiberKind::Conformal, "virasoro") => {
            let c = match &spec.central_charge {
                Some(c) => parse_q(c.get_ref()).map_err(|m| src.err(c.span(), m))?,
                None => return Err(src.err(p.span(), "preset `virasoro` needs `central_charge`")),
            };
            Fiber::Conformal(ConformalAlgebra::virasoro(c))
        }
        (FiberKind::Conformal, "sl2-current") => {
            let t = BilinearTable::sl2();
            let form = QMatrix::from_triplets(3, 3, [(0, 2, q(1)), (2, 0, q(1)), (1, 1, q(2))])?;
            Fiber::Conformal(ConformalAlgebra::current(&["e", "h", "f"], &t.table, &form)?)
        }
        (FiberKind::Vertex, "truncated-polynomials") => Fiber::Vertex(VertexAlgebraData::truncated_polynomials(need_degree()?)),
        (_, other) => return Err(src.err(p.span(), format!("preset `{other}` is not available for {kind:?} algebras"))),
    };
    Ok(f)
}

fn with_differential(src: &Src, f: Fiber, spec: &FiberSpec) -> Result<Fiber> {
    if spec.differential.is_empty() && spec.degrees.is_none() {
        return Ok(f);
    }
    let dim = f.dim();
    let names = f.names().to_vec();
    let degrees = spec.degrees.clone().unwrap_or_else(|| vec![0; dim]);
    let mut cols = vec![SparseVec::zero(); dim];
    for e in &spec.differential {
        let g = names.iter().position(|n| n == e.from.get_ref()).ok_or_else(|| src.err(e.from.span(), format!("unknown generator `{}`", e.from.get_ref())))?;
        cols[g] = parse_element(e.value.get_ref(), &names, None).map_err(|m| src.err(e.value.span(), m))?;
    }
    let d = QMatrix::from_columns(dim, cols)?;
    match f {
        Fiber::Conformal(v) => Ok(Fiber::Conformal(v.with_differential(degrees, d)?)),
        Fiber::Vertex(w) => Ok(Fiber::Vertex(w.with_differential(degrees, d)?)),
        _ => Err(Error::Input(format!("{}: differentials are supported on conformal and vertex algebras", src.file))),
    }
}

/// Parses `2*a - 1/3*d^2(b) + c`. With `stride = Some(n)`, `d^k(g)` is the basis index
/// `k·n + g`; otherwise derivatives are rejected.
pub fn parse_element(s: &str, names: &[String], stride: Option<usize>) -> std::result::Result<SparseVec, String> {
    let mut out = SparseVec::zero();
    let s = s.trim();
    if s == "0" {
        return Ok(out);
    }
    let mut terms: Vec<(bool, String)> = Vec::new();
    let (mut depth, mut cur, mut neg) = (0i32, String::new(), false);
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && (ch == '+' || ch == '-') {
            if !cur.trim().is_empty() {
                terms.push((neg, std::mem::take(&mut cur)));
                neg = false;
            }
            if ch == '-' {
                neg = !neg;
            }
            continue;
        }
        cur.push(ch);
    }
    if depth != 0 {
        return Err(format!("unbalanced parentheses in `{s}`"));
    }
    if cur.trim().is_empty() {
        return Err(format!("`{s}` ends without a term"));
    }
    terms.push((neg, cur));
    for (neg, t) in terms {
        let t = t.trim();
        let (coef, atom) = match t.split_once('*') {
            Some((c, a)) => (parse_q(c.trim())?, a.trim()),
            None => (q(1), t),
        };
        let (power, name) = split_derivative(atom)?;
        let g = names.iter().position(|n| n == name).ok_or_else(|| format!("unknown generator `{name}`"))?;
        let idx = match (power, stride) {
            (0, _) => g,
            (k, Some(n)) => k as usize * n + g,
            (_, None) => return Err(format!("`{atom}`: derivatives are only allowed in conformal products")),
        };
        out.add_term(idx, if neg { -coef } else { coef });
    }
    Ok(out)
}

fn split_derivative(atom: &str) -> std::result::Result<(u32, &str), String> {
    let Some(rest) = atom.strip_prefix('d') else { return Ok((0, atom)) };
    let (k, inner) = if let Some(r) = rest.strip_prefix('^') {
        match r.split_once('(') {
            Some((k, inner)) => (k.trim().parse::<u32>().map_err(|_| format!("bad derivative order in `{atom}`"))?, inner),
            None => return Ok((0, atom)),
        }
    } else if let Some(inner) = rest.strip_prefix('(') {
        (1, inner)
    } else {
        return Ok((0, atom));
    };
    let inner = inner.strip_suffix(')').ok_or_else(|| format!("missing `)` in `{atom}`"))?;
    Ok((k, inner.trim()))
}

/// Formats an element in the syntax accepted by [`parse_element`].
pub fn format_element(v: &SparseVec, names: &[String], stride: Option<usize>) -> String {
    if v.is_zero() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, c) in v.iter() {
        let (k, g) = match stride {
            Some(n) => (i / n, i % n),
            None => (0, *i),
        };
        let atom = match k {
            0 => names[g].clone(),
            1 => format!("d({})", names[g]),
            _ => format!("d^{k}({})", names[g]),
        };
        let neg = c < &Q::from_integer(0.into());
        let mag = if neg { -c.clone() } else { c.clone() };
        if s.is_empty() {
            s.push_str(if neg { "-" } else { "" });
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        if mag != q(1) {
            s.push_str(&fmt_q(&mag));
            s.push('*');
        }
        s.push_str(&atom);
    }
    s
}

/// One stored secondary operation value `S(a, b, c)_(indices)`; arguments are
/// `[degree, basis index]` pairs and the value is a list of `[index, coefficient]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsEntry {
    pub a: (i64, usize),
    pub b: (i64, usize),
    pub c: (i64, usize),
    pub indices: Vec<i64>,
    pub value: Vec<(usize, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpsFile {
    #[serde(default)]
    pub entry: Vec<OpsEntry>,
}

impl OpsFile {
    pub fn from_table(t: &SecondaryTable) -> Self {
        let entry = t
            .entries
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((a, b, c, idx), v)| OpsEntry { a: *a, b: *b, c: *c, indices: idx.clone(), value: v.iter().map(|(i, x)| (*i, fmt_q(x))).collect() })
            .collect();
        OpsFile { entry }
    }

    pub fn to_table(&self) -> Result<SecondaryTable> {
        let mut t = SecondaryTable::default();
        for e in &self.entry {
            let mut v = SparseVec::zero();
            for (i, x) in &e.value {
                v.add_term(*i, parse_q(x).map_err(Error::Input)?);
            }
            t.entries.insert((e.a, e.b, e.c, e.indices.clone()), v);
        }
        Ok(t)
    }
}

pub fn parse_ops(text: &str, file: &str) -> Result<SecondaryTable> {
    let src = Src { text, file };
    let f: OpsFile = toml::from_str(text).map_err(|e| src.err(e.span().unwrap_or(0..0), e.message().to_string()))?;
    f.to_table()
}

pub fn write_ops(t: &SecondaryTable) -> Result<String> {
    toml::to_string(&OpsFile::from_table(t)).map_err(|e| Error::Input(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn element_syntax() {
        let n = names(&["L", "C"]);
        let v = parse_element("2*L - 1/2*d^2(L) + C", &n, Some(2)).unwrap();
        assert_eq!(v, [(0, q(2)), (4, crate::exactlin::qf(-1, 2)), (1, q(1))].into_iter().collect());
        assert_eq!(parse_element(&format_element(&v, &n, Some(2)), &n, Some(2)).unwrap(), v);
        assert_eq!(parse_element("d(L)", &n, Some(2)).unwrap(), SparseVec::basis(2));
        assert!(parse_element("d(L)", &n, None).is_err());
        assert!(parse_element("M", &n, None).is_err());
        assert_eq!(parse_element("0", &n, None).unwrap(), SparseVec::zero());
        let x = names(&["x^0", "x^1"]);
        assert_eq!(parse_element("-x^1", &x, None).unwrap(), SparseVec::term(1, q(-1)));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let text = "kind = \"lie\"\nopens = [\"U\"]\n\n[default_fiber]\npreset = \"sl3\"\n";
        match parse_input(text, "in.toml") {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (5, 10)),
            other => panic!("{other:?}"),
        }
        match parse_input("kind = \"lie\"\nopens = [\n", "in.toml") {
            Err(Error::Parse { line, .. }) => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }
}
