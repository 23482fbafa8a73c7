use num::{BigRational, One, Zero};
use proptest::prelude::*;
use quasipoly::parampoly::{count_points, ParamPolyhedron};
use quasipoly::qpoly::{rat, Poly, RationalFunction, ResidueClass};
use quasipoly::ratgen::*;
use quasipoly::Error;

fn ev(v: &[i64]) -> ExponentVector {
    ExponentVector::constant(v)
}

/// The triangle generating function with `⌊t/2⌋ = t/2` (even class).
fn triangle_even() -> GenFun {
    let h1 = Poly::new(vec![rat(1), BigRational::new(1.into(), 2.into())]);
    let h2 = &h1 + &Poly::one();
    let z = Poly::zero();
    let terms = vec![
        GenFunTerm::new(rat(1), ev(&[0, 0]), vec![ev(&[1, 0]), ev(&[1, 1])]),
        GenFunTerm::new(rat(-1), ExponentVector::new(vec![h1.clone(), z]), vec![ev(&[1, 0]), ev(&[0, 1])]),
        GenFunTerm::new(rat(1), ExponentVector::new(vec![h1, h2]), vec![ev(&[0, 1]), ev(&[1, 1])]),
    ];
    GenFun::new(2, ResidueClass::new(2, 0), 0, terms).unwrap()
}

fn triangle() -> ParamPolyhedron {
    ParamPolyhedron::dilation(&[vec![0, -1], vec![-1, 1], vec![2, 0]], &[0, 0, 1], false).unwrap()
}

#[test]
fn triangle_closed_form_expands_to_its_points() {
    let g = triangle_even();
    let e = expand_box(&g, 4, &[(0, 2), (0, 2)]).unwrap();
    let pts: Vec<Vec<i64>> = e.keys().cloned().collect();
    assert_eq!(pts, vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 0], vec![2, 1], vec![2, 2]]);
    assert!(e.values().all(|c| *c == rat(1)));
    assert_eq!(specialize_count(&g, 6).unwrap(), Count::Finite(rat(10)));
}

#[test]
fn triangle_closed_form_symbolic_count() {
    let s = specialize_symbolic(&triangle_even(), &[0, 1]).unwrap();
    // (t + 2)(t + 4)/8
    let want = Poly::new(vec![rat(1), BigRational::new(3.into(), 4.into()), BigRational::new(1.into(), 8.into())]);
    assert_eq!(s.value, SymbolicValue::Finite(RationalFunction::from_poly(want)));
    let s2 = specialize_symbolic(&triangle_even(), &[1, 0]).unwrap();
    assert_eq!(s2.value, s.value);
}

#[test]
fn triangle_by_brion() {
    let g = brion_polytope_genfun(&triangle(), 6).unwrap();
    assert_eq!(g.terms.len(), 3);
    assert_eq!(specialize_count(&g, 0).unwrap(), Count::Finite(rat(10)));
    let e = expand_box(&g, 0, &[(0, 3), (0, 3)]).unwrap();
    assert_eq!(e.len(), 10);
}

#[test]
fn ex_negs_cone_and_normalization() {
    let g = cone_genfun_at(&[rat(0), rat(1000)], &[vec![1, -1]]).unwrap();
    assert_eq!(g.to_string(), "y^1000/((1 - x*y^-1))");
    let flip = GenFun::new(2, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[1000, 0]), vec![ev(&[-1, 1])])]).unwrap();
    assert_eq!(flip.normalize_lex_positive().unwrap().to_string(), "-x^1001*y^-1/((1 - x*y^-1))");
}

#[test]
fn flip_in_second_coordinate_box_agreement() {
    // {(3, k) : 0 <= k <= 9} written with the lex-negative factor (0, -1)
    let raw = GenFun::new(
        2,
        ResidueClass::ALL,
        0,
        vec![
            GenFunTerm::new(rat(1), ev(&[3, 9]), vec![ev(&[0, -1])]),
            GenFunTerm::new(rat(-1), ev(&[3, -1]), vec![ev(&[0, -1])]),
        ],
    )
    .unwrap();
    let n = raw.normalize_lex_positive().unwrap();
    assert!(n.terms.iter().all(|t| t.dens == vec![ev(&[0, 1])]));
    let e = expand_box(&n, 0, &[(0, 9), (0, 9)]).unwrap();
    let want: Vec<(Vec<i64>, BigRational)> = (0..=9).map(|k| (vec![3, k], rat(1))).collect();
    assert_eq!(e.into_iter().collect::<Vec<_>>(), want);
}

#[test]
fn lexmin_of_parity_class() {
    // x^(t+1)/(1-x) - x^((5t-3)/4 + 1)/(1-x) on t ≡ 3 mod 4
    let lo = Poly::from_ints(&[1, 1]);
    let hi = Poly::new(vec![BigRational::new(1.into(), 4.into()), BigRational::new(5.into(), 4.into())]);
    let g = GenFun::new(
        1,
        ResidueClass::new(4, 3),
        7,
        vec![
            GenFunTerm::new(rat(1), ExponentVector::new(vec![lo.clone()]), vec![ev(&[1])]),
            GenFunTerm::new(rat(-1), ExponentVector::new(vec![hi.clone()]), vec![ev(&[1])]),
        ],
    )
    .unwrap();
    assert_eq!(lexmin_term(&g).unwrap().exponent, vec![lo]);
    // φ with c = 1 negates: the lex-min becomes -(top element)
    let h = transform_exponents(&g, &phi_matrix(&[1])).unwrap().normalize_lex_positive().unwrap();
    let m = lexmin_term(&h).unwrap();
    assert_eq!(m.exponent, vec![-&(&hi - &Poly::one())]);
}

#[test]
fn hadamard_with_complement_is_empty() {
    // S = [3, 8], R = [9, ∞)
    let s = GenFun::new(
        1,
        ResidueClass::ALL,
        0,
        vec![GenFunTerm::new(rat(1), ev(&[3]), vec![ev(&[1])]), GenFunTerm::new(rat(-1), ev(&[9]), vec![ev(&[1])])],
    )
    .unwrap();
    let r = GenFun::new(1, ResidueClass::ALL, 0, vec![GenFunTerm::new(rat(1), ev(&[9]), vec![ev(&[1])])]).unwrap();
    assert!(hadamard_box(&s, &r, 0, &[(0, 40)]).unwrap().is_empty());
    assert_eq!(hadamard_box(&s, &s, 0, &[(0, 40)]).unwrap(), expand_box(&s, 0, &[(0, 40)]).unwrap());
}

#[test]
fn json_round_trip_triangle() {
    let g = triangle_even();
    let s = serde_json::to_string(&g).unwrap();
    let back: GenFun = serde_json::from_str(&s).unwrap();
    assert_eq!(back, g);
}

#[test]
fn vpf_single_generator() {
    let g = vpf_genfun(&[vec![1]]).unwrap();
    let e = expand_box(&g, 0, &[(0, 20)]).unwrap();
    assert_eq!(e.len(), 21);
    assert_eq!(specialize_count(&g, 0).unwrap(), Count::Infinite);
}

#[test]
fn volume_cap() {
    let r = cone_genfun_at(&[rat(0), rat(0)], &[vec![1, 0], vec![3, 2_000_000]]);
    assert!(matches!(r, Err(Error::VolumeCap { .. })));
}

fn poly2(rows: &[(i64, i64, i64, i64)]) -> String {
    let mut s = String::from("vars: x, y\nnonneg\n");
    for &(a, b, c0, c1) in rows {
        s.push_str(&format!("{a}*x + {b}*y <= {c0} + {c1}*t\n"));
    }
    s
}

/// Knapsack count of `λ` with `Σ λ_i a_i = s`.
fn partitions(gens: &[Vec<u64>], s: &[u64]) -> u64 {
    match gens.split_first() {
        None => u64::from(s.iter().all(|&c| c == 0)),
        Some((a, rest)) => {
            let mut total = 0;
            let mut cur = s.to_vec();
            loop {
                total += partitions(rest, &cur);
                if a.iter().zip(&cur).any(|(&x, &c)| x > c) {
                    break;
                }
                for (c, &x) in cur.iter_mut().zip(a) {
                    *c -= x;
                }
            }
            total
        }
    }
}

fn in_cone(apex: &[BigRational], u: &[Vec<i64>], s: &[i64]) -> bool {
    // λ = U^{-1}(s - v) by Cramer
    let (a, b, c, d) = (rat(u[0][0]), rat(u[1][0]), rat(u[0][1]), rat(u[1][1]));
    let det = &a * &d - &b * &c;
    let w0 = rat(s[0]) - &apex[0];
    let w1 = rat(s[1]) - &apex[1];
    let l0 = (&d * &w0 - &b * &w1) / &det;
    let l1 = (&a * &w1 - &c * &w0) / &det;
    l0 >= BigRational::zero() && l1 >= BigRational::zero()
}

fn random_numeric_gf() -> impl Strategy<Value = GenFun> {
    let den = prop::collection::vec(-3i64..=3, 2).prop_filter("lex-positive", |b| b.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0));
    let term = (-3i64..=3, prop::collection::vec(-3i64..=3, 2), prop::collection::vec(den, 1..=2));
    prop::collection::vec(term, 1..=3).prop_map(|ts| {
        let terms = ts
            .into_iter()
            .map(|(c, q, ds)| GenFunTerm::new(rat(c), ev(&q), ds.iter().map(|b| ev(b)).collect()))
            .collect();
        GenFun::new(2, ResidueClass::ALL, 0, terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_preserves_expansion(g in random_numeric_gf(), mask in prop::collection::vec(any::<bool>(), 6)) {
        // undo the rewrite on some factors, then normalize back
        let mut k = 0;
        let terms = g.terms.iter().map(|t| {
            let mut coeff = t.coeff.clone();
            let mut num = t.num.clone();
            let mut dens = Vec::new();
            for b in &t.dens {
                if mask[k % mask.len()] {
                    coeff = -coeff;
                    num = num.sub(b);
                    dens.push(b.neg());
                } else {
                    dens.push(b.clone());
                }
                k += 1;
            }
            GenFunTerm::new(coeff, num, dens)
        }).collect();
        let raw = GenFun::new(2, ResidueClass::ALL, 0, terms).unwrap();
        let n = raw.normalize_lex_positive().unwrap();
        let bx = [(-6, 6), (-6, 6)];
        prop_assert_eq!(expand_box(&n, 0, &bx).unwrap(), expand_box(&g, 0, &bx).unwrap());
    }

    #[test]
    fn brion_count_matches_enumeration(
        rows in prop::collection::vec((-3i64..=3, -3i64..=3, 0i64..=4, 0i64..=2), 1..=3),
    ) {
        let p = ParamPolyhedron::parse(&poly2(&rows)).unwrap();
        for t in 0..20u64 {
            let g = match brion_polytope_genfun(&p, t) {
                Ok(g) => g,
                Err(Error::Unbounded) => return Ok(()),
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            };
            let n = count_points(&p, t).unwrap();
            prop_assert_eq!(specialize_count(&g, 0).unwrap(), Count::Finite(rat(n as i64)));
            prop_assert_eq!(specialize_count_with(&g, 0, &[1, 0]).unwrap(), Count::Finite(rat(n as i64)));
            if t % 5 == 0 {
                let bx = p.at(t).unwrap().integer_box().unwrap();
                if let Some(bx) = bx {
                    let bx: Vec<(i64, i64)> = bx.iter().map(|(l, h)| (i64::try_from(l).unwrap() - 1, i64::try_from(h).unwrap() + 1)).collect();
                    let e = expand_box(&g, 0, &bx).unwrap();
                    prop_assert!(e.values().all(|c| c.is_one()));
                    prop_assert_eq!(e.len() as u64, n);
                    for s in e.keys() {
                        let big: Vec<num::BigInt> = s.iter().map(|&c| c.into()).collect();
                        prop_assert!(p.at(t).unwrap().contains_int(&big));
                    }
                }
            }
        }
    }

    #[test]
    fn cone_expansion_matches_membership(
        u in prop::collection::vec(prop::collection::vec(-3i64..=3, 2), 2),
        v in prop::collection::vec((-4i64..=4, 1i64..=3), 2),
    ) {
        let lexpos = |b: &Vec<i64>| b.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0);
        prop_assume!(u[0][0] * u[1][1] - u[0][1] * u[1][0] != 0);
        prop_assume!(u.iter().all(lexpos));
        let apex: Vec<BigRational> = v.iter().map(|&(n, d)| BigRational::new(n.into(), d.into())).collect();
        let g = cone_genfun_at(&apex, &u).unwrap();
        let e = expand_box(&g, 0, &[(-8, 8), (-8, 8)]).unwrap();
        for x in -8..=8i64 {
            for y in -8..=8i64 {
                let c = e.get(&vec![x, y]).cloned().unwrap_or_else(BigRational::zero);
                let want = if in_cone(&apex, &u, &[x, y]) { rat(1) } else { rat(0) };
                prop_assert_eq!(c, want, "({}, {})", x, y);
            }
        }
    }

    #[test]
    fn transform_composes(
        m1 in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 2),
        m2 in prop::collection::vec(prop::collection::vec(-2i64..=2, 2), 2),
        g in random_numeric_gf(),
    ) {
        let prod: Vec<Vec<i64>> = (0..2).map(|i| (0..2).map(|j| (0..2).map(|k| m1[i][k] * m2[k][j]).sum()).collect()).collect();
        let direct = transform_exponents(&g, &prod);
        let nested = transform_exponents(&g, &m2).and_then(|h| transform_exponents(&h, &m1));
        match (direct, nested) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a, b),
            // a singular product can kill a denominator that the inner map kept
            (Err(Error::MixedSign), _) | (_, Err(Error::MixedSign)) => {}
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn vpf_matches_knapsack(gens in prop::collection::vec(prop::collection::vec(0u64..=3, 2), 1..=3)) {
        prop_assume!(gens.iter().all(|a| a.iter().any(|&c| c > 0)));
        let g = vpf_genfun(&gens).unwrap();
        let e = expand_box(&g, 0, &[(0, 6), (0, 6)]).unwrap();
        for x in 0..=6u64 {
            for y in 0..=6u64 {
                let want = partitions(&gens, &[x, y]);
                let got = e.get(&vec![x as i64, y as i64]).cloned().unwrap_or_else(BigRational::zero);
                prop_assert_eq!(got, rat(want as i64));
            }
        }
    }
}
