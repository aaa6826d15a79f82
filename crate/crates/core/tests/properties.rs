use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semireg::algebroid::{check_algebroid, derham_complex, derham_differential, wedge, Connection, Form, LieAlgebroidSpec};
use semireg::atiyah::{spec_from_entries, AtiyahProblem};
use semireg::catalog;
use semireg::deform::{from_degree_coords, tau_k, ArtinRing, Deformations, ModuleProblem, ObstructionClass};
use semireg::dg::{cohomology, koszul_sign};
use semireg::exact::{q, rank_kernel_image, solve, Matrix, Quotient, Subspace, Q};
use semireg::liepair::LiePair;
use semireg::tot::{elementary_section, whitney_integrate, CechObject, P1DeRham, ScalarTot, SimplexForm, SimplexKey, TwoChartModel};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    (0..n).map(|_| q(r.gen_range(-3..=3))).collect()
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_rows((0..rows).map(|_| random_vec(r, cols)).collect())
}

fn random_form(r: &mut ChaCha8Rng, rank: usize, degree: usize) -> Form<Q> {
    let mut f = Form::zero(rank);
    for m in 0u32..1 << rank {
        if m.count_ones() as usize == degree && r.gen_bool(0.6) {
            f.add_term(m, &q(r.gen_range(-3..=3)));
        }
    }
    f
}

fn random_simplex_form(r: &mut ChaCha8Rng, n: usize, degree: u32) -> SimplexForm<Q> {
    let mut x = SimplexForm::zero(n);
    for _ in 0..4 {
        let dts = loop {
            let m = r.gen_range(0u32..1 << n);
            if m.count_ones() == degree {
                break m;
            }
        };
        let key = SimplexKey { exps: (0..n).map(|_| r.gen_range(0..3)).collect(), dts };
        x.add_term(key, &q(r.gen_range(-3..=3)));
    }
    x
}

fn sign(p: usize) -> Q {
    if p % 2 == 0 {
        q(1)
    } else {
        q(-1)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_specs_square_to_zero(seed in any::<u64>()) {
        let mut r = rng(seed);
        let dim = r.gen_range(2..=4);
        let entries: Vec<(usize, usize, usize, i64)> = (0..r.gen_range(1..=3))
            .map(|_| {
                let i = r.gen_range(0..dim - 1);
                (i, r.gen_range(i + 1..dim), r.gen_range(0..dim), r.gen_range(-2..=2))
            })
            .collect();
        let spec = spec_from_entries(dim, &entries);
        if check_algebroid(&spec).is_ok() {
            let c = derham_complex(&spec);
            for n in 0..dim as i32 {
                prop_assert!(c.d(n + 1).mul(&c.d(n)).is_zero());
            }
        }
    }

    #[test]
    fn wedge_is_graded_commutative_and_associative(seed in any::<u64>(), p in 0usize..=2, s in 0usize..=2, t in 0usize..=1) {
        let mut r = rng(seed);
        let (a, b, c) = (random_form(&mut r, 5, p), random_form(&mut r, 5, s), random_form(&mut r, 5, t));
        prop_assert_eq!(wedge(&a, &b), wedge(&b, &a).scale(&sign(p * s)));
        prop_assert_eq!(wedge(&wedge(&a, &b), &c), wedge(&a, &wedge(&b, &c)));
    }

    #[test]
    fn derham_differential_is_a_derivation(seed in any::<u64>(), p in 0usize..=2, s in 0usize..=1, which in 0usize..3) {
        let spec = [catalog::sl2(), catalog::heisenberg(), catalog::aff1()][which].clone();
        let mut r = rng(seed);
        let (a, b) = (random_form(&mut r, spec.rank(), p), random_form(&mut r, spec.rank(), s));
        let lhs = derham_differential(&spec, &wedge(&a, &b));
        let rhs = wedge(&derham_differential(&spec, &a), &b).add(&wedge(&a, &derham_differential(&spec, &b)).scale(&sign(p)));
        prop_assert_eq!(lhs, rhs);
        prop_assert!(derham_differential(&spec, &derham_differential(&spec, &a)).is_zero());
    }

    #[test]
    fn koszul_sign_matches_adjacent_swaps(perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle(), degrees in prop::collection::vec(0i32..3, 5)) {
        let mut p = perm.clone();
        let mut s = 1;
        for i in 0..p.len() {
            for j in 0..p.len() - 1 - i {
                if p[j] > p[j + 1] {
                    if degrees[p[j]] % 2 == 1 && degrees[p[j + 1]] % 2 == 1 {
                        s = -s;
                    }
                    p.swap(j, j + 1);
                }
            }
        }
        prop_assert_eq!(koszul_sign(&perm, &degrees), s);
    }

    #[test]
    fn rank_nullity_and_solve(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let mut r = rng(seed);
        let m = random_matrix(&mut r, rows, cols);
        let rki = rank_kernel_image(&m);
        prop_assert_eq!(rki.rank + rki.kernel.len(), cols);
        prop_assert_eq!(rki.rank, m.rank());
        for k in &rki.kernel {
            prop_assert!(m.mul_vec(k).iter().all(Zero::is_zero));
        }
        let x = random_vec(&mut r, cols);
        let b = m.mul_vec(&x);
        let y = solve(&m, &b).unwrap().expect("consistent system");
        prop_assert_eq!(m.mul_vec(&y), b);
    }

    #[test]
    fn subspace_and_quotient_coordinates(seed in any::<u64>(), ambient in 1usize..6, count in 0usize..4) {
        let mut r = rng(seed);
        let vs: Vec<Vec<Q>> = (0..count).map(|_| random_vec(&mut r, ambient)).collect();
        let sub = Subspace::span(ambient, vs.clone());
        for v in &vs {
            prop_assert!(sub.contains(v));
            let c = sub.coords(v);
            let mut back = vec![Q::zero(); ambient];
            for (ci, b) in c.iter().zip(sub.basis()) {
                for (x, y) in back.iter_mut().zip(b) {
                    *x += ci.clone() * y.clone();
                }
            }
            prop_assert_eq!(&back, v);
        }
        let quot = Quotient::new(sub.clone());
        prop_assert_eq!(quot.dim() + sub.dim(), ambient);
        let v = random_vec(&mut r, ambient);
        let c = quot.coords(&v);
        prop_assert_eq!(quot.coords(&quot.lift(&c)), c.clone());
        let diff: Vec<Q> = v.iter().zip(quot.lift(&c)).map(|(a, b)| a - b).collect();
        prop_assert!(sub.contains(&diff));
    }

    #[test]
    fn gauge_action_preserves_maurer_cartan(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pair = LiePair::new(catalog::abelian(2), &[0, 1]).unwrap();
        let mp = ModuleProblem::new(AtiyahProblem::new(pair, Connection::trivial(2, 2)).unwrap()).unwrap();
        let ring = ArtinRing::truncated("u", 3);
        let ctx = Deformations::new(&mp.dgla, &ring).unwrap();
        let diag = |r: &mut ChaCha8Rng| {
            let mut m = Matrix::zeros(2, 2);
            m.set(0, 0, q(r.gen_range(-3..=3)));
            m.set(1, 1, q(r.gen_range(-3..=3)));
            m
        };
        let mut f = Form::zero(2);
        f.add_term(0b01, &diag(&mut r));
        f.add_term(0b10, &diag(&mut r));
        let x = ctx.monomial(&[1], &mp.element(&f));
        prop_assert!(ctx.is_maurer_cartan(&x));
        let zeros = mp.dgla.basis_of_degree(0);
        let mut a = ctx.zero();
        for e in 1..=2u32 {
            let mut v = vec![Q::zero(); mp.dgla.dim()];
            for &i in &zeros {
                v[i] = q(r.gen_range(-2..=2));
            }
            a = a.add(&ctx.monomial(&[e], &v));
        }
        prop_assert!(ctx.is_maurer_cartan(&ctx.gauge_act(&a, &x)));
    }

    #[test]
    fn tau_is_linear_and_class_level(seed in any::<u64>(), k in 0usize..=1) {
        let mut r = rng(seed);
        let mp = ModuleProblem::new(catalog::nonvanishing_fixture()).unwrap();
        let h = cohomology(&mp.complex().unwrap()).unwrap();
        let cocycles = h.group(2).cocycles().basis().to_vec();
        let pick = |r: &mut ChaCha8Rng| {
            let mut c = vec![Q::zero(); mp.complex().unwrap().dim(2)];
            for z in &cocycles {
                let s = q(r.gen_range(-2..=2));
                for (x, y) in c.iter_mut().zip(z) {
                    *x += s.clone() * y.clone();
                }
            }
            from_degree_coords(&mp.dgla, &c, 2)
        };
        let (h1, h2) = (pick(&mut r), pick(&mut r));
        let lam = q(r.gen_range(-3..=3));
        let combo: Vec<Q> = h1.iter().zip(&h2).map(|(a, b)| a.clone() + lam.clone() * b.clone()).collect();
        let tau = |v: Vec<Q>| tau_k(&mp, &ObstructionClass::exploratory(&mp.dgla, v).unwrap(), k).unwrap();
        let (t1, t2, t12) = (tau(h1.clone()), tau(h2), tau(combo));
        let expected: Vec<Q> = t1.class.iter().zip(&t2.class).map(|(a, b)| a.clone() + lam.clone() * b.clone()).collect();
        prop_assert_eq!(&t12.class, &expected);

        let y = from_degree_coords(&mp.dgla, &random_vec(&mut r, mp.complex().unwrap().dim(1)), 1);
        let shifted: Vec<Q> = h1.iter().zip(mp.dgla.apply_d(&y)).map(|(a, b)| a + b).collect();
        prop_assert_eq!(tau(shifted).class, t1.class);
    }

    #[test]
    fn cosimplicial_identities_and_stokes(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let deg = r.gen_range(0..=n as u32);
        let x = random_simplex_form(&mut r, n, deg);
        let ydeg = r.gen_range(0..=n as u32);
        let y = random_simplex_form(&mut r, n, ydeg);
        prop_assert!(x.d().d().is_zero());
        let lhs = x.mul(&y).d();
        let rhs = x.d().mul(&y).add(&x.mul(&y.d()).scale(&sign(deg as usize)));
        prop_assert_eq!(lhs, rhs);
        for j in 0..=n {
            prop_assert_eq!(x.d().pullback(j).unwrap(), x.pullback(j).unwrap().d());
            for i in 0..j {
                if n >= 2 {
                    prop_assert_eq!(x.pullback(j).unwrap().pullback(i).unwrap(), x.pullback(i).unwrap().pullback(j - 1).unwrap());
                }
            }
        }
        let w = random_simplex_form(&mut r, n, n as u32 - 1);
        let boundary = (0..=n).fold(Q::zero(), |acc, k| acc + sign(k) * w.pullback(k).unwrap().integrate().unwrap_or_else(Q::zero));
        prop_assert_eq!(w.d().integrate().unwrap_or_else(Q::zero), boundary);
    }

    #[test]
    fn tot_differential_squares_to_zero_and_integration_is_a_chain_map(seed in any::<u64>(), which in 0usize..3) {
        let mut r = rng(seed);
        let co = match which {
            0 => CechObject::new(&P1DeRham::new((-2, 2)), 2).unwrap(),
            1 => CechObject::new(&TwoChartModel::line_bundle(-1, (-3, 3)), 2).unwrap(),
            _ => CechObject::new(&TwoChartModel::line_bundle(2, (-2, 3)), 2).unwrap(),
        };
        let lambda = ScalarTot::whitney(co.opens, co.n_max(), &random_vec(&mut r, co.opens));
        let x = elementary_section(&co, &random_vec(&mut r, co.cech.dim()))
            .add(&lambda.act(&co, &elementary_section(&co, &random_vec(&mut r, co.cech.dim()))))
            .add(&lambda.d().act(&co, &elementary_section(&co, &random_vec(&mut r, co.cech.dim()))));
        prop_assert!(x.check_compatible(&co.object).is_ok());
        let dx = x.d_tot(&co.object);
        prop_assert!(dx.check_compatible(&co.object).is_ok());
        prop_assert!(dx.d_tot(&co.object).is_zero());
        prop_assert_eq!(whitney_integrate(&co, &dx), co.cech.apply(&whitney_integrate(&co, &x)));
    }
}

#[test]
fn point_spec_rejects_broken_jacobi() {
    let spec = LieAlgebroidSpec::point(
        &["x", "y", "z"],
        &[(0, 1, vec![(2, q(1))]), (1, 2, vec![(0, q(1))]), (0, 2, vec![(0, q(-1))])],
    );
    assert!(check_algebroid(&spec).is_err());
}
