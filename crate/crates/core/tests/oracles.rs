mod common;

use std::time::Instant;

use common::*;
use lcalg::conformal::{check_leibniz, check_lie};
use lcalg::corpus;
use lcalg::extend::{build_unified, check_extending_structure};
use lcalg::flag::{
    build_fc, check_crossed_flag, check_flag, flag_equiv, transport_flag, FlagDatum,
};
use lcalg::poly::rat;
use lcalg::{Basis, ConformalAlgebra, LinearForm, ModElem, Poly, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn oracle_agrees_on_builtin_algebras() {
    for name in corpus::names(corpus::Category::Algebra) {
        let alg = corpus::load_algebra(name).unwrap();
        assert_eq!(check_leibniz(&alg).passed(), oracle_leibniz(&alg), "{name}");
    }
    let mut broken = corpus::ex1_lw();
    broken.set("W", "L", ModElem::term(Poly::d(), "W")).unwrap();
    assert!(!oracle_leibniz(&broken));
    assert!(!check_leibniz(&broken).passed());
}

#[test]
fn skew_residual_matches_oracle() {
    let alg = corpus::ex1_lw();
    let rep = check_lie(&alg);
    let first = rep.first_failure().unwrap();
    assert_eq!(first.args, vec!["W".to_string(), "L".to_string()]);
    assert_eq!(first.residual.to_string(), "-(d + 2*l)*W");
    let want = skew_defect(&alg, "W", "L");
    assert_eq!(want.len(), 1);
    assert_eq!(want["W"], -(&Poly::d() + &Poly::l().scale(&rat(2))));
}

#[test]
fn flag_conditions_match_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let (mut pass, mut fail) = (0, 0);
    for i in 0..300 {
        let mut fd = rand_valid_flag(&mut rng);
        let mutated = rng.gen_bool(0.5);
        if mutated {
            mutate_flag(&mut rng, &mut fd);
        }
        let listed = check_flag(&fd).unwrap();
        let fc = build_fc(&fd).unwrap();
        let direct = check_leibniz(&fc).passed();
        let oracle = oracle_leibniz(&fc);
        assert_eq!(
            direct, oracle,
            "case {i}: checker and oracle disagree on {fc:?}"
        );
        assert_eq!(
            listed.passed(),
            oracle,
            "case {i}: flag conditions disagree with the oracle, failing {:?}\n{fd:?}",
            listed.failing_conditions()
        );
        if !mutated {
            assert!(
                oracle,
                "case {i}: generator produced an invalid datum {fd:?}"
            );
        }
        if oracle {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    assert!(pass > 50 && fail > 50, "pass {pass}, fail {fail}");
}

#[test]
fn transported_flags_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let fd_prime = rand_valid_flag(&mut rng);
        let u0 = rand_elem(&mut rng, &fd_prime.r.basis, &[Var::D], 2);
        let c = Poly::int(rand_coeff(&mut rng));
        let fd = transport_flag(&fd_prime, &u0, &c).unwrap();
        let rep = flag_equiv(&fd, &fd_prime, &u0, &c).unwrap();
        assert!(rep.passed(), "{:?}", rep.failing_conditions());
        let mut other = fd.clone();
        other.p = &other.p + &Poly::one();
        assert!(!flag_equiv(&other, &fd_prime, &u0, &c).unwrap().passed());
    }
}

#[test]
fn extending_structures_match_leibniz() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let (mut pass, mut fail) = (0, 0);
    for i in 0..150 {
        let mut ext = rand_valid_datum(&mut rng);
        let mutated = rng.gen_bool(0.5);
        if mutated {
            mutate_datum(&mut rng, &mut ext);
        }
        let listed = check_extending_structure(&ext).passed();
        let e = build_unified(&ext).unwrap();
        let oracle = oracle_leibniz(&e);
        assert_eq!(listed, oracle, "case {i}: {ext:?}");
        if !mutated {
            assert!(
                oracle,
                "case {i}: generator produced an invalid datum {ext:?}"
            );
        }
        if oracle {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    assert!(pass > 30 && fail > 30, "pass {pass}, fail {fail}");
    assert!(start.elapsed().as_secs() < 60);
}

fn sum_of_virasoros() -> ConformalAlgebra {
    let mut r = ConformalAlgebra::new("vir2", Basis::new(["x1", "x2"]).unwrap(), Vec::new());
    for n in ["x1", "x2"] {
        r.set(n, n, ModElem::term(module_poly(2, 0), n)).unwrap();
    }
    r
}

#[test]
fn crossed_flags_over_trivial_center_have_d_plus_t_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let refl = LinearForm::combo(&[(Var::L, -1), (Var::D, -1)]);
    for _ in 0..40 {
        let r = if rng.gen_bool(0.5) {
            corpus::virasoro()
        } else {
            sum_of_virasoros()
        };
        let mut base = FlagDatum::zero(r);
        base.q_name = "y".into();
        if rng.gen_bool(0.5) {
            base.p = module_poly(2, 0);
        }
        let u0 = rand_elem(&mut rng, &base.r.basis, &[Var::D], 2);
        let c = Poly::int(rand_coeff(&mut rng));
        let fd = transport_flag(&base, &u0, &c).unwrap();
        let rep = check_crossed_flag(&fd).unwrap();
        assert!(rep.passed(), "{:?}", rep.failing_conditions());
        assert!(oracle_leibniz(&build_fc(&fd).unwrap()));
        for a in fd.r.basis.iter() {
            let e = ModElem::basis(a);
            let dt = &fd.d.apply(&e, &refl) + &fd.t.apply(&e, &LinearForm::var(Var::L));
            assert!(dt.is_zero(), "{a}: {dt}");
        }
    }
}
