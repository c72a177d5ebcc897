use std::collections::BTreeMap;

use ezop::conformal::*;
use ezop::exactlin::{binom, q, qf, QMatrix, SparseVec, Q};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn sl2_current() -> ConformalAlgebra {
    // e, h, f with [h,e] = 2e, [h,f] = -2f, [e,f] = h and trace form.
    let mut br = vec![vec![SparseVec::zero(); 3]; 3];
    br[1][0] = SparseVec::term(0, q(2));
    br[0][1] = SparseVec::term(0, q(-2));
    br[1][2] = SparseVec::term(2, q(-2));
    br[2][1] = SparseVec::term(2, q(2));
    br[0][2] = SparseVec::basis(1);
    br[2][0] = SparseVec::term(1, q(-1));
    let form = QMatrix::from_triplets(3, 3, [(0, 2, q(1)), (2, 0, q(1)), (1, 1, q(2))]).unwrap();
    ConformalAlgebra::current(&["e", "h", "f"], &br, &form).unwrap()
}

/// λ-bracket oracle: `[∂^i a_λ ∂^k b] = (-λ)^i (λ + ∂)^k [a_λ b]`, returned as the list of
/// `n`-th products `n! · coeff(λ^n)`.
fn lambda_oracle(v: &ConformalAlgebra, i: u32, a: usize, k: u32, b: usize) -> Vec<SparseVec> {
    // [a_λ b] = Σ_n λ^n/n! a_(n)b, as λ-polynomial with vector coefficients
    let mut poly: Vec<SparseVec> = (0..v.locality(a, b)).map(|n| v.gen_product(a, b, n).scaled(&(Q::one() / factorial(n)))).collect();
    for _ in 0..k {
        // multiply by (λ + ∂)
        let mut next = vec![SparseVec::zero(); poly.len() + 1];
        for (n, c) in poly.iter().enumerate() {
            next[n + 1].add_assign(c);
            next[n].add_assign(&v.partial(c, 1));
        }
        poly = next;
    }
    let mut shifted = vec![SparseVec::zero(); poly.len() + i as usize];
    for (n, c) in poly.iter().enumerate() {
        shifted[n + i as usize] = c.scaled(&ezop::exactlin::sign(i as i64));
    }
    shifted.iter().enumerate().map(|(n, c)| c.scaled(&factorial(n as u32))).collect()
}

#[test]
fn virasoro_products() {
    let v = ConformalAlgebra::virasoro(q(3));
    let l = v.gen(0);
    assert_eq!(v.product(&l, &l, 0), v.partial(&l, 1));
    assert_eq!(v.product(&l, &l, 1), l.scaled(&q(2)));
    assert!(v.product(&l, &l, 2).is_zero());
    assert_eq!(v.product(&l, &l, 3), v.gen(1).scaled(&qf(3, 2)));
}

#[test]
fn virasoro_jacobi_and_generating_function() {
    for c in [q(0), q(1), qf(-22, 5)] {
        let v = ConformalAlgebra::virasoro(c);
        let r = check_conformal_jacobi(&v, 5, 5);
        assert!(r.pass(), "{:?}", r.coefficients.failures.first());
        assert!(r.coefficients.checked > 0);
    }
}

#[test]
fn current_algebra_jacobi_and_skew() {
    let v = sl2_current();
    let r = check_conformal_jacobi(&v, 3, 3);
    assert!(r.pass(), "{:?} {:?}", r.coefficients.failures.first(), r.disagreements.first());
    assert!(check_skew(&v).pass());
}

#[test]
fn broken_bracket_is_detected() {
    // perturb [e, f] in the current algebra
    let v = sl2_current();
    let mut table = v.table().clone();
    table.get_mut(&(0, 2)).unwrap()[0] = SparseVec::term(1, q(2));
    table.get_mut(&(2, 0)).unwrap()[0] = SparseVec::term(1, q(-2));
    let w = ConformalAlgebra::new(v.names().to_vec(), vec![false, false, false, true], table).unwrap();
    let r = check_conformal_jacobi(&w, 2, 2);
    assert!(!r.coefficients.pass());
    assert!(r.generating_function_agrees);
}

#[test]
fn skew_certificate_on_virasoro() {
    let v = ConformalAlgebra::virasoro(q(1));
    let s = check_skew(&v);
    assert!(s.polyop.pass() && s.derived.pass());
    // the induced identity at n = 0 gives L_(0)L = ∂L
    let l = v.gen(0);
    let mut rhs = SparseVec::zero();
    for j in 0..4u32 {
        let t = v.product(&l, &l, j);
        rhs.add_scaled(&v.partial(&t, j), &(-ezop::exactlin::sign(j as i64) / factorial(j)));
    }
    assert_eq!(rhs, v.partial(&l, 1));
    assert!(!s.alternate.pass());
}

#[test]
fn double_brackets_are_composites() {
    let v = ConformalAlgebra::virasoro(q(2));
    let l = v.gen(0);
    let dl = v.partial(&l, 1);
    let unit = |x: &SparseVec| PolyOp { arity: 1, terms: x.map_keys(|&i| (vec![], i)) };
    let br = |xs: &[&SparseVec]| v.star_bracket(xs[0], xs[1]);
    let (a, b, c) = (&l, &dl, &l);
    let abc = compose_polyops(&v, &br, &[unit(a), v.star_bracket(b, c)]);
    assert_eq!(abc, v.double_bracket(a, b, c, Shape::ABC));
    let ab_c = compose_polyops(&v, &br, &[v.star_bracket(a, b), unit(c)]);
    assert_eq!(ab_c, v.double_bracket(a, b, c, Shape::ABThenC));
    let bac = compose_polyops(&v, &br, &[unit(b), v.star_bracket(a, c)]).permute_slots(&v, &[1, 0, 2]);
    assert_eq!(bac, v.double_bracket(a, b, c, Shape::BAC));
}

#[test]
fn central_generator_with_products_is_rejected() {
    let table: BTreeMap<_, _> = [((1, 0), vec![SparseVec::basis(0)])].into_iter().collect();
    assert!(ConformalAlgebra::new(vec!["L".into(), "C".into()], vec![false, true], table).is_err());
}

#[test]
fn borcherds_on_truncated_polynomials() {
    let w = VertexAlgebraData::truncated_polynomials(5);
    let rep = borcherds_sweep(&w, (3, 3, 3)).unwrap();
    assert!(rep.corrected.pass(), "{:?}", rep.corrected.failures.first());
    assert!(!rep.alternate.pass());
    assert!(rep.alternate.failures.iter().all(|f| f.indices[1] < 0));
}

#[test]
fn commutative_vertex_products() {
    let w = VertexAlgebraData::truncated_polynomials(5);
    let x = SparseVec::basis(1);
    // x_(-1)x = x^2, x_(-2)x = (∂x) x = x^3, x_(-3)x = (∂^2 x / 2) x = x^4
    assert_eq!(w.product(&x, &x, -1), SparseVec::basis(2));
    assert_eq!(w.product(&x, &x, -2), SparseVec::basis(3));
    assert_eq!(w.product(&x, &x, -3), SparseVec::basis(4));
    assert!(w.product(&x, &x, 0).is_zero());
}

#[test]
fn chiral_evaluation_of_brackets() {
    let w = VertexAlgebraData::truncated_polynomials(5);
    let x = SparseVec::basis(1);
    let lie: ezop::LinComb<Vec<u8>> = [(vec![0u8, 1], q(1)), (vec![1u8, 0], q(-1))].into_iter().collect();
    assert_eq!(w.eval_lie(&lie, &[&x, &x], &[-2]).unwrap(), SparseVec::basis(3));
}

/// Direct mode expansions of the three bracket shapes on a vertex algebra, summed over a
/// generous range (all products vanish outside `[-8, 8)` for `k[x]/(x^6)`).
fn shape_oracle(w: &VertexAlgebraData, shape: usize, a: &SparseVec, b: &SparseVec, c: &SparseVec, (p, q_, r): (i64, i64, i64)) -> SparseVec {
    let mut out = SparseVec::zero();
    for j in 0..24i64 {
        if p >= 0 && j > p && shape != 2 || q_ >= 0 && j > q_ && shape == 2 {
            break;
        }
        let t = match shape {
            0 => w.product(a, &w.product(b, c, r + j), p + q_ - j).scaled(&(binom(p, j as u32) * ezop::exactlin::sign(j))),
            1 => w.product(b, &w.product(a, c, q_ + j), p + r - j).scaled(&(binom(p, j as u32) * ezop::exactlin::sign(j + p))),
            _ => w.product(&w.product(a, b, p + j), c, q_ + r - j).scaled(&binom(q_, j as u32)),
        };
        out.add_assign(&t);
    }
    out
}

#[test]
fn chiral_shapes_match_mode_expansions() {
    use ezop::operad::{lie_expand, BracketTree as T};
    let w = VertexAlgebraData::truncated_polynomials(5);
    let shapes = [
        T::br(T::letter(0), T::br(T::letter(1), T::letter(2))),
        T::br(T::letter(1), T::br(T::letter(0), T::letter(2))),
        T::br(T::br(T::letter(0), T::letter(1)), T::letter(2)),
    ];
    let (a, b) = (SparseVec::basis(1), SparseVec::basis(1));
    let c: SparseVec = [(0, q(1)), (1, q(1))].into_iter().collect();
    for p in -3..=2 {
        for q_ in -3..=2 {
            for r in -3..=2 {
                for (k, s) in shapes.iter().enumerate() {
                    let lie = lie_expand(s, 3).unwrap();
                    let got = w.eval_lie(&lie.terms, &[&a, &b, &c], &[p, q_, r]).unwrap();
                    assert_eq!(got, shape_oracle(&w, k, &a, &b, &c, (p, q_, r)), "shape {k} at {:?}", (p, q_, r));
                }
            }
        }
    }
}

fn dg_pair() -> ConformalAlgebra {
    let d = QMatrix::from_triplets(2, 2, [(1, 0, q(1))]).unwrap();
    ConformalAlgebra::abelian(2).with_differential(vec![-1, 0], d).unwrap()
}

#[test]
fn secondary_zero_ops_on_abelian() {
    let x = dg_pair();
    let kind = SecondaryKind::Conformal { max_m: 2, max_n: 2 };
    assert!(secondary_check(&x, &ZeroOps, &kind, 10).unwrap().pass());
}

#[test]
fn secondary_mutation_is_detected() {
    let x = dg_pair();
    let mut s = SecondaryTable::default();
    s.entries.insert(((0, 1), (0, 1), (0, 1), vec![0, 0]), SparseVec::basis(0));
    let kind = SecondaryKind::Conformal { max_m: 1, max_n: 1 };
    let rep = secondary_check(&x, &s, &kind, 10).unwrap();
    assert!(!rep.pass());
    assert_eq!(rep.failures[0].indices, vec![0, 0]);
}

#[test]
fn vertex_differential_must_be_derivation() {
    let w = VertexAlgebraData::truncated_polynomials(2);
    let d = QMatrix::from_triplets(3, 3, [(2, 0, q(1))]).unwrap();
    assert!(w.with_differential(vec![0, 0, 1], d).is_err());
}

proptest! {
    #[test]
    fn partial_rules_match_lambda_bracket(i in 0u32..4, k in 0u32..4, c in -5i64..5) {
        let v = ConformalAlgebra::virasoro(q(c));
        let x = v.partial(&v.gen(0), i);
        let y = v.partial(&v.gen(0), k);
        let oracle = lambda_oracle(&v, i, 0, k, 0);
        let bound = v.bound(&x, &y) as usize;
        for n in 0..bound.max(oracle.len()) {
            let expected = oracle.get(n).cloned().unwrap_or_default();
            prop_assert_eq!(v.product(&x, &y, n as u32), expected);
        }
    }

    #[test]
    fn current_products_match_lambda_bracket(a in 0usize..3, b in 0usize..3, i in 0u32..3, k in 0u32..3) {
        let v = sl2_current();
        let oracle = lambda_oracle(&v, i, a, k, b);
        let (x, y) = (v.partial(&v.gen(a), i), v.partial(&v.gen(b), k));
        for n in 0..oracle.len() + 2 {
            let expected = oracle.get(n).cloned().unwrap_or_default();
            prop_assert_eq!(v.product(&x, &y, n as u32), expected);
        }
    }

    #[test]
    fn polyop_coefficients_are_products(i in 0u32..3, k in 0u32..3) {
        let v = ConformalAlgebra::virasoro(q(1));
        let (x, y) = (v.partial(&v.gen(0), i), v.partial(&v.gen(0), k));
        let p = v.star_bracket(&x, &y);
        for n in 0..8u32 {
            prop_assert_eq!(p.coefficient(&[n]), v.product(&x, &y, n));
        }
    }

    #[test]
    fn binomial_symmetry(p in 0i64..12, j in 0u32..12) {
        prop_assume!(j as i64 <= p);
        prop_assert_eq!(binom(p, j), binom(p, p as u32 - j));
        prop_assert!(!binom(p, j).is_zero());
    }
}
