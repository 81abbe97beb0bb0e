use lcalg::poly::{parse_poly, rat, Context, Monomial};
use lcalg::{Basis, LinearForm, ModElem, Poly, Substitution, Var};
use proptest::prelude::*;

fn var_strategy() -> impl Strategy<Value = Var> {
    prop_oneof![
        Just(Var::D),
        Just(Var::L),
        Just(Var::M),
        Just(Var::N),
        Just(Var::param("a")),
        Just(Var::param("k1")),
    ]
}

fn monomial() -> impl Strategy<Value = Monomial> {
    prop::collection::vec((var_strategy(), 0u32..4), 0..3).prop_map(Monomial::from_pairs)
}

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((monomial(), -5i64..=5, 1i64..=3), 0..5).prop_map(|terms| {
        let mut p = Poly::zero();
        for (m, n, d) in terms {
            p += &Poly::term(rat(n) / rat(d), m);
        }
        p
    })
}

fn spectral_poly() -> impl Strategy<Value = Poly> {
    poly().prop_map(|p| {
        p.specialize(&[("a".to_string(), rat(2)), ("k1".to_string(), rat(-1))].into())
    })
}

fn form() -> impl Strategy<Value = LinearForm> {
    (-2i64..=2, -2i64..=2, -2i64..=2)
        .prop_map(|(a, b, c)| LinearForm::combo(&[(Var::L, a), (Var::M, b), (Var::D, c)]))
}

fn ctx() -> Context {
    Context::with_params(["a", "k1"]).unwrap()
}

fn basis() -> Basis {
    Basis::new(["L", "W", "x"]).unwrap()
}

fn elem() -> impl Strategy<Value = ModElem> {
    prop::collection::vec(poly(), 3).prop_map(|ps| {
        let mut e = ModElem::zero();
        for (p, n) in ps.iter().zip(["L", "W", "x"]) {
            e += &ModElem::term(p.clone(), n);
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn poly_display_round_trips(p in poly()) {
        let text = p.to_string();
        prop_assert_eq!(parse_poly(&text, &ctx()).unwrap(), p);
    }

    #[test]
    fn elem_display_round_trips(e in elem()) {
        let text = e.to_string();
        let params = vec!["a".to_string(), "k1".to_string()];
        prop_assert_eq!(ModElem::parse(&text, &basis(), &params).unwrap(), e);
    }

    #[test]
    fn ring_laws(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn substitution_is_a_ring_map(p in spectral_poly(), q in spectral_poly(), f in form(), g in form()) {
        let s = Substitution::new().bind(Var::L, f).unwrap().bind(Var::D, g).unwrap();
        prop_assert_eq!((&p * &q).substitute(&s), &p.substitute(&s) * &q.substitute(&s));
        prop_assert_eq!((&p + &q).substitute(&s), &p.substitute(&s) + &q.substitute(&s));
    }
}
