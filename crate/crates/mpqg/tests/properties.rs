//! Randomized invariants across the layers, driven by seeds.

use mpqg::cartan::{
    cocycle_realization, make_standard_realization, random_cocycle, random_mp_matrix, random_twist, twist_realization, CartanDatum,
};
use mpqg::linalg::s_agrees;
use mpqg::liebialg::{build_mplba, check_bialgebra, lie_cocycle_deform, lie_twist_deform};
use mpqg::quea::{UContext, UOptions};
use mpqg::semiclassical::LimitContext;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn datum(k: usize) -> CartanDatum {
    [CartanDatum::a1(), CartanDatum::a1xa1(), CartanDatum::a2(), CartanDatum::b2()][k].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realizations_reproduce_p(k in 0usize..4, seed in any::<u64>()) {
        let c = datum(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_mp_matrix(&mut rng, &c, 5, true);
        let r = make_standard_realization(&p);
        prop_assert!(r.satisfies_axioms(&p, 5).is_ok());
        let phi = random_twist(&mut rng, r.t, 5, true);
        let (pt, rt) = twist_realization(&p, &r, &phi).unwrap();
        prop_assert!(rt.satisfies_axioms(&pt, 5).is_ok());
        // twisting twice by Φ and −Φ returns to P
        let (pb, _) = twist_realization(&pt, &rt, &phi.neg()).unwrap();
        prop_assert!(s_agrees(&pb.p, &p.p, 5));
        let chi = random_cocycle(&mut rng, &r, 5, true);
        let (pc, rc) = cocycle_realization(&p, &r, &chi).unwrap();
        prop_assert!(rc.satisfies_axioms(&pc, 5).is_ok());
    }

    #[test]
    fn deformed_lie_bialgebras_stay_lie_bialgebras(k in 0usize..4, seed in any::<u64>()) {
        let c = datum(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_mp_matrix(&mut rng, &c, 3, true);
        let r = make_standard_realization(&p);
        let g = build_mplba(&c, &p.reduce(), &r.reduce(), c.default_bound()).unwrap();
        prop_assert!(check_bialgebra(&g).is_empty());
        let theta = random_twist(&mut rng, r.t, 3, true).reduce();
        prop_assert!(check_bialgebra(&lie_twist_deform(&g, &theta)).is_empty());
        let chi = random_cocycle(&mut rng, &r, 3, true).reduce();
        prop_assert!(check_bialgebra(&lie_cocycle_deform(&g, &chi)).is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn product_is_associative(k in 0usize..4, seed in any::<u64>()) {
        let c = datum(k);
        let p = random_mp_matrix(&mut ChaCha8Rng::seed_from_u64(seed), &c, 5, true);
        let u = UContext::new(&p, &make_standard_realization(&p), UOptions::new(2)).unwrap();
        let rep = u.associativity_check(10, 3, seed);
        prop_assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn semiclassical_cobrackets_are_antisymmetric(k in 0usize..4, seed in any::<u64>()) {
        let c = datum(k);
        let p = random_mp_matrix(&mut ChaCha8Rng::seed_from_u64(seed), &c, 5, true);
        let u = UContext::new(&p, &make_standard_realization(&p), UOptions::new(2)).unwrap();
        let lc = LimitContext::new(&u).unwrap();
        for x in &lc.iota {
            let t = lc.semiclassical_cobracket(x).unwrap();
            for ((a, b), v) in &t {
                prop_assert_eq!(t.get(&(*b, *a)).cloned(), Some(-v.clone()));
            }
        }
        let rep = lc.check_limit();
        prop_assert!(rep.passed(), "{}", rep.to_text());
    }

    #[test]
    fn json_export_round_trips(seed in any::<u64>()) {
        let c = CartanDatum::a2();
        let p = random_mp_matrix(&mut ChaCha8Rng::seed_from_u64(seed), &c, 5, true);
        let u = UContext::new(&p, &make_standard_realization(&p), UOptions::new(2)).unwrap();
        let x = u.eval_str("E1*F2*T+1 - 1/3*hbar*F1*E2*E1 + exp(hbar*T-2)*E2").unwrap();
        let back = u.elem_from_json(&x.to_json()).unwrap();
        prop_assert_eq!(back, x);
    }
}
