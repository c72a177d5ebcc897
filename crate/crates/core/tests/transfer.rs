use ezop::cech::examples::*;
use ezop::cech::{BilinearTable, CechAlgebra, Fiber, NerveSheaf};
use ezop::conformal::Homog;
use ezop::exactlin::{q, qf, SparseVec};
use ezop::operad::{JacobiForm, OpElement, YElement};
use ezop::simplexcat::{enumerate, MonotoneMap};
use ezop::transfer::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sl2() -> Fiber {
    Fiber::Lie(BilinearTable::sl2())
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize) -> SparseVec {
    let mut v = SparseVec::zero();
    for i in 0..dim {
        if rng.gen_bool(0.5) {
            v.add_term(i, q(rng.gen_range(-3..=3)));
        }
    }
    v
}

/// Random element of `𝒴(n)^d` with a handful of terms per level.
fn random_y(rng: &mut ChaCha8Rng, n: usize, d: i64, levels: usize) -> YElement {
    let mut terms = ezop::LinComb::zero();
    let words: Vec<Vec<u8>> = if n == 2 { vec![vec![0, 1], vec![1, 0]] } else { vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2]] };
    for m in 0..=levels {
        for _ in 0..4 {
            let total = m as i64 - d;
            if total < 0 {
                continue;
            }
            let mut ls = vec![0usize; n];
            for _ in 0..total {
                ls[rng.gen_range(0..n)] += 1;
            }
            if ls.iter().any(|&l| l > m) {
                continue;
            }
            let tuple: Vec<MonotoneMap> = ls
                .iter()
                .map(|&l| {
                    let all = enumerate(l, m);
                    all[rng.gen_range(0..all.len())].clone()
                })
                .collect();
            let w = words[rng.gen_range(0..words.len())].clone();
            terms.add_term((m, tuple, w), q(rng.gen_range(-2..=2)));
        }
    }
    OpElement::from_terms(n, d, levels, terms).unwrap()
}

#[test]
fn constant_algebra_bracket_is_fiber_bracket() {
    let b = CechAlgebra::new(NerveSheaf::single(sl2()), 3).unwrap();
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).unwrap();
    let t = BilinearTable::sl2();
    for i in 0..3 {
        for j in 0..3 {
            let (x, y) = (Homog::new(0, SparseVec::basis(i)), Homog::new(0, SparseVec::basis(j)));
            assert_eq!(ts.bracket(&b, &x, &y, &Probe::Plain).unwrap().vec, t.table[i][j]);
        }
    }
}

#[test]
fn constant_algebra_cohomology_is_the_fiber() {
    let b = CechAlgebra::new(NerveSheaf::single(sl2()), 3).unwrap();
    let h = cohomology_algebra(&b, AlgebraType::Lie, 1).unwrap();
    assert_eq!(h.rank(0), 3);
    assert_eq!(h.rank(1), 0);
    assert!(h.pass());
}

#[test]
fn chain_map_property_on_random_elements() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b = CechAlgebra::new(sl2_three_opens(), 3).unwrap();
    for (n, d) in [(2, 0), (2, -1), (3, 0), (3, -1)] {
        let y = random_y(&mut rng, n, d, 3);
        let (f, fd) = (IndexedOp::new(&y), IndexedOp::new(&y.diff()));
        for _ in 0..6 {
            let ms: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();
            let total: i64 = ms.iter().sum::<usize>() as i64 + d;
            if total < 0 || total + 1 > 3 {
                continue;
            }
            let xs: Vec<Homog> = ms.iter().map(|&p| Homog::new(p as i64, random_vec(&mut rng, b.dim(p)))).collect();
            let refs: Vec<&Homog> = xs.iter().collect();
            let lhs = f_apply(&b, &fd, &refs, &Probe::Plain).unwrap().vec;
            let mut rhs = SparseVec::zero();
            let fy = f_apply(&b, &f, &refs, &Probe::Plain).unwrap();
            if fy.degree >= 0 {
                rhs.add_assign(&moore_d(&b, &fy).unwrap().vec);
            }
            let mut before = 0;
            for i in 0..n {
                let mut ys = xs.clone();
                ys[i] = moore_d(&b, &xs[i]).unwrap();
                let r: Vec<&Homog> = ys.iter().collect();
                let s = -ezop::exactlin::sign(d) * ezop::exactlin::sign(before);
                rhs.add_scaled(&f_apply(&b, &f, &r, &Probe::Plain).unwrap().vec, &s);
                before += ms[i] as i64;
            }
            assert_eq!(lhs, rhs, "arity {n}, degree {d}, levels {ms:?}");
        }
    }
}

#[test]
fn mismatched_levels_give_zero() {
    let b = CechAlgebra::new(two_opens(sl2()), 2).unwrap();
    let ts = TransferredStructure::new(2, JacobiForm::Cyclic).unwrap();
    // the bracket of a degree-2 and a degree-1 element lands in degree 3, beyond the truncation
    let x = Homog::new(2, SparseVec::basis(0));
    let y = Homog::new(1, SparseVec::basis(0));
    assert!(ts.bracket(&b, &x, &y, &Probe::Plain).is_err());
    assert!(f_apply(&b, &IndexedOp::new(&ts.c), &[&x], &Probe::Plain).is_err());
}

#[test]
fn aw_bracket_is_front_back_bracket() {
    // on the 2-open identity cover with x = e on (U0,U1) and y = f on (U1,U0), the front/back
    // term lands on u = (0,1,0) and its transposed partner on u = (1,0,1)
    let b = CechAlgebra::new(two_opens(sl2()), 3).unwrap();
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).unwrap();
    let x = Homog::new(1, SparseVec::basis(b.basis_index(1, &[0, 1], 0).unwrap()));
    let y = Homog::new(1, SparseVec::basis(b.basis_index(1, &[1, 0], 2).unwrap()));
    let v = ts.bracket(&b, &x, &y, &Probe::Plain).unwrap();
    assert_eq!(v.degree, 2);
    assert_eq!(v.vec.len(), 2);
    let front = v.vec.coeff(&b.basis_index(2, &[0, 1, 0], 1).unwrap());
    let back = v.vec.coeff(&b.basis_index(2, &[1, 0, 1], 1).unwrap());
    assert_eq!(front.clone() * &front, qf(1, 4));
    assert_eq!(back, -front);
}

#[test]
fn bracket_is_graded_skew_and_d_is_a_derivation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = CechAlgebra::new(sl2_three_opens(), 3).unwrap();
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).unwrap();
    for _ in 0..10 {
        let (pa, pb) = (rng.gen_range(0..2usize), rng.gen_range(0..2usize));
        if pa + pb + 1 > 3 {
            continue;
        }
        let x = Homog::new(pa as i64, random_vec(&mut rng, b.dim(pa)));
        let y = Homog::new(pb as i64, random_vec(&mut rng, b.dim(pb)));
        let xy = ts.bracket(&b, &x, &y, &Probe::Plain).unwrap();
        let yx = ts.bracket(&b, &y, &x, &Probe::Plain).unwrap();
        assert_eq!(yx.vec, xy.vec.scaled(&-ezop::exactlin::sign((pa * pb) as i64)));
        let lhs = moore_d(&b, &xy).unwrap().vec;
        let mut rhs = ts.bracket(&b, &moore_d(&b, &x).unwrap(), &y, &Probe::Plain).unwrap().vec;
        rhs.add_scaled(&ts.bracket(&b, &x, &moore_d(&b, &y).unwrap(), &Probe::Plain).unwrap().vec, &ezop::exactlin::sign(pa as i64));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn constant_algebra_homotopy_jacobi() {
    let b = CechAlgebra::new(NerveSheaf::single(sl2()), 3).unwrap();
    let ts = TransferredStructure::new(3, JacobiForm::Cyclic).unwrap();
    let rep = check_homotopy_jacobi(&b, &ts, 1).unwrap();
    assert!(rep.pass(), "{:?}", rep.homotopy_failures.first());
}

#[test]
fn homotopy_jacobi_on_three_open_sl2() {
    let b = CechAlgebra::new(sl2_three_opens(), 4).unwrap();
    for form in [JacobiForm::Cyclic, JacobiForm::Derivation] {
        let ts = TransferredStructure::new(4, form).unwrap();
        let cert = ts.certificate();
        assert!(cert.dj_zero && cert.augmentation_of_j_zero && cert.solve_verified);
        let rep = check_homotopy_jacobi(&b, &ts, 2).unwrap();
        assert!(rep.triples > 0);
        assert!(rep.pass(), "{form:?}: {:?} {:?}", rep.jacobiator_failures.first(), rep.homotopy_failures.first());
    }
}

#[test]
fn two_open_identity_cover_cohomology() {
    let b = CechAlgebra::new(two_opens(sl2()), 3).unwrap();
    let h = cohomology_algebra(&b, AlgebraType::Lie, 1).unwrap();
    assert_eq!((h.rank(0), h.rank(1)), (3, 0));
    assert!(h.pass());
    let t = BilinearTable::sl2();
    // representatives of H^0 are global sections; compare the bracket through coordinates
    let ranks_ok = h.constants.iter().filter(|c| c.degree == 0).count();
    assert_eq!(ranks_ok, 9);
    let _ = t;
}

#[test]
fn commutative_product_on_cohomology_is_associative() {
    let mut table = BilinearTable::zero(2);
    table.names = vec!["1".into(), "x".into()];
    table.table[0][0] = SparseVec::basis(0);
    table.table[0][1] = SparseVec::basis(1);
    table.table[1][0] = SparseVec::basis(1);
    let b = CechAlgebra::new(two_opens(Fiber::Commutative(table.clone())), 3).unwrap();
    let h = cohomology_algebra(&b, AlgebraType::Commutative, 1).unwrap();
    assert!(h.pass());
    assert_eq!(h.rank(0), 2);
    // constant cosimplicial algebra: degree-0 product is the original one
    let c = CechAlgebra::new(NerveSheaf::single(Fiber::Commutative(table.clone())), 2).unwrap();
    let x = Homog::new(0, SparseVec::basis(1));
    let one = Homog::new(0, SparseVec::basis(0));
    assert_eq!(transferred_product(&c, &one, &x).unwrap().vec, SparseVec::basis(1));
    // Leibniz rule
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let x = Homog::new(1, random_vec(&mut rng, b.dim(1)));
        let y = Homog::new(0, random_vec(&mut rng, b.dim(0)));
        let lhs = moore_d(&b, &transferred_product(&b, &x, &y).unwrap()).unwrap().vec;
        let mut rhs = transferred_product(&b, &moore_d(&b, &x).unwrap(), &y).unwrap().vec;
        rhs.add_scaled(&transferred_product(&b, &x, &moore_d(&b, &y).unwrap()).unwrap().vec, &q(-1));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn chain_map_property_on_single_terms_with_degenerate_maps() {
    // arity-1 monomials p: [l] → [m] cover codegeneracies, cofaces and their composites
    let b = CechAlgebra::new(two_opens(sl2()), 3).unwrap();
    for m in 0..=2usize {
        for l in 0..=2usize {
            for p in enumerate(l, m) {
                let d = m as i64 - l as i64;
                let mut terms = ezop::LinComb::zero();
                terms.add_term((m, vec![p.clone()], vec![0u8]), q(1));
                let y = OpElement::from_terms(1, d, 3, terms).unwrap();
                let (f, fd) = (IndexedOp::new(&y), IndexedOp::new(&y.diff()));
                for lev in 0..=1usize {
                    let out = lev as i64 + d + 1;
                    if !(0..=3).contains(&out) {
                        continue;
                    }
                    for i in 0..b.dim(lev) {
                        let x = Homog::new(lev as i64, SparseVec::basis(i));
                        let lhs = f_apply(&b, &fd, &[&x], &Probe::Plain).unwrap().vec;
                        let fy = f_apply(&b, &f, &[&x], &Probe::Plain).unwrap();
                        let mut rhs = if fy.degree >= 0 { moore_d(&b, &fy).unwrap().vec } else { SparseVec::zero() };
                        let dx = moore_d(&b, &x).unwrap();
                        rhs.add_scaled(&f_apply(&b, &f, &[&dx], &Probe::Plain).unwrap().vec, &-ezop::exactlin::sign(d));
                        assert_eq!(lhs, rhs, "p = {p:?}, input {i} at level {lev}");
                    }
                }
            }
        }
    }
}
