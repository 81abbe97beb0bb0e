//! Test-side oracle and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use lcalg::corpus;
use lcalg::extend::{ExtendingDatum, MapKind, Morphism};
use lcalg::flag::{FlagDatum, FlagKind};
use lcalg::poly::{rat, Monomial};
use lcalg::{Basis, ConformalAlgebra, LinearForm, ModElem, Poly, Substitution, Var};
use rand::seq::SliceRandom;
use rand::Rng;

/// A free `C[d]`-module element as a plain map from basis names to
/// coefficients.
pub type Vector = BTreeMap<String, Poly>;

fn axpy(out: &mut Vector, name: &str, p: &Poly) {
    let e = out.entry(name.to_string()).or_insert_with(Poly::zero);
    *e += p;
    if e.is_zero() {
        out.remove(name);
    }
}

fn subst(p: &Poly, pairs: &[(Var, LinearForm)]) -> Poly {
    let mut s = Substitution::new();
    for (v, f) in pairs {
        s = s.bind(v.clone(), f.clone()).unwrap();
    }
    p.substitute(&s)
}

pub fn vector(e: &ModElem) -> Vector {
    e.components()
        .map(|(n, p)| (n.to_string(), p.clone()))
        .collect()
}

/// `[a_s b]` computed straight from sesquilinearity:
/// `[f(d)u _s g(d)v] = f(-s) g(s + d) [u_s v]`.
pub fn bracket(alg: &ConformalAlgebra, a: &Vector, b: &Vector, s: &LinearForm) -> Vector {
    let d = LinearForm::var(Var::D);
    let mut out = Vector::new();
    for (u, f) in a {
        let fa = subst(f, &[(Var::D, -s.clone())]);
        for (v, g) in b {
            let gb = subst(g, &[(Var::D, s.clone() + d.clone())]);
            let coeff = &fa * &gb;
            for (w, t) in alg.entry(u, v).components() {
                let tt = subst(t, &[(Var::L, s.clone())]);
                axpy(&mut out, w, &(&coeff * &tt));
            }
        }
    }
    out
}

fn sub(a: &Vector, b: &Vector) -> Vector {
    let mut out = a.clone();
    for (n, p) in b {
        axpy(&mut out, n, &-p);
    }
    out
}

/// `[a_l [b_m c]] - [[a_l b]_{l+m} c] - [b_m [a_l c]]` on basis triples.
pub fn jacobi_defect(alg: &ConformalAlgebra, a: &str, b: &str, c: &str) -> Vector {
    let l = LinearForm::var(Var::L);
    let m = LinearForm::var(Var::M);
    let unit = |n: &str| Vector::from([(n.to_string(), Poly::one())]);
    let (ua, ub, uc) = (unit(a), unit(b), unit(c));
    let t1 = bracket(alg, &ua, &bracket(alg, &ub, &uc, &m), &l);
    let t2 = bracket(
        alg,
        &bracket(alg, &ua, &ub, &l),
        &uc,
        &(l.clone() + m.clone()),
    );
    let t3 = bracket(alg, &ub, &bracket(alg, &ua, &uc, &l), &m);
    sub(&sub(&t1, &t2), &t3)
}

/// True iff the left Jacobi identity holds on every basis triple.
pub fn oracle_leibniz(alg: &ConformalAlgebra) -> bool {
    let names = alg.basis.names();
    names.iter().all(|a| {
        names
            .iter()
            .all(|b| names.iter().all(|c| jacobi_defect(alg, a, b, c).is_empty()))
    })
}

/// `[a_l b] + [b_{-l-d} a]` for basis elements.
pub fn skew_defect(alg: &ConformalAlgebra, a: &str, b: &str) -> Vector {
    let l = LinearForm::var(Var::L);
    let refl = LinearForm::combo(&[(Var::L, -1), (Var::D, -1)]);
    let unit = |n: &str| Vector::from([(n.to_string(), Poly::one())]);
    let mut out = bracket(alg, &unit(a), &unit(b), &l);
    for (n, p) in bracket(alg, &unit(b), &unit(a), &refl) {
        axpy(&mut out, &n, &p);
    }
    out
}

// ---------------------------------------------------------------------------
// Random generation

pub fn rand_coeff<R: Rng>(rng: &mut R) -> i64 {
    *[-2, -1, 1, 2].choose(rng).unwrap()
}

/// Random polynomial in `vars` with total degree at most `deg` and at most
/// `terms` monomials.
pub fn rand_poly<R: Rng>(rng: &mut R, vars: &[Var], deg: u32, terms: usize) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(1..=terms) {
        let mut pairs = Vec::new();
        let mut budget = rng.gen_range(0..=deg);
        for v in vars {
            if budget == 0 {
                break;
            }
            let e = rng.gen_range(0..=budget);
            budget -= e;
            if e > 0 {
                pairs.push((v.clone(), e));
            }
        }
        p += &Poly::term(rat(rand_coeff(rng)), Monomial::from_pairs(pairs));
    }
    p
}

pub fn rand_elem<R: Rng>(rng: &mut R, basis: &Basis, vars: &[Var], deg: u32) -> ModElem {
    let mut e = ModElem::zero();
    for n in basis.iter() {
        if rng.gen_bool(0.6) {
            e += &ModElem::term(rand_poly(rng, vars, deg, 2), n);
        }
    }
    e
}

fn int(n: i64) -> Poly {
    Poly::int(n)
}

/// `d + a l + b` as a polynomial.
pub fn module_poly(a: i64, b: i64) -> Poly {
    &(&Poly::d() + &Poly::l().scale(&rat(a))) + &int(b)
}

fn virasoro_on(name: &str) -> ConformalAlgebra {
    let mut v = ConformalAlgebra::new(name, Basis::new([name]).unwrap(), Vec::new());
    let two_l = Poly::l().scale(&rat(2));
    v.set(name, name, ModElem::term(&Poly::d() + &two_l, name))
        .unwrap();
    v
}

fn direct_sum(a: &ConformalAlgebra, b: &ConformalAlgebra) -> ConformalAlgebra {
    let basis = a.basis.concat(&b.basis).unwrap();
    let mut s = ConformalAlgebra::new("sum", basis, Vec::new());
    for alg in [a, b] {
        for (k, v) in &alg.table {
            s.set(&k.0, &k.1, v.clone()).unwrap();
        }
    }
    s
}

/// Small Leibniz algebras used as `R`.
pub fn rand_r<R: Rng>(rng: &mut R) -> ConformalAlgebra {
    match rng.gen_range(0..4) {
        0 => corpus::abelian(1),
        1 => corpus::abelian(2),
        2 => corpus::virasoro(),
        _ => corpus::ex1_lw(),
    }
}

/// A rank one or two `Q` with its bracket.
fn rand_q<R: Rng>(rng: &mut R) -> ConformalAlgebra {
    match rng.gen_range(0..4) {
        0 => corpus::abelian_named(&["y"]),
        1 => virasoro_on("y"),
        2 => corpus::abelian_named(&["y", "z"]),
        _ => direct_sum(&virasoro_on("y"), &corpus::abelian_named(&["z"])),
    }
}

/// Random valid extending datum: a direct sum, a semidirect product over the
/// Virasoro algebra, or a flag datum, possibly transported by a random
/// morphism.
pub fn rand_valid_datum<R: Rng>(rng: &mut R) -> ExtendingDatum {
    let base = match rng.gen_range(0..3) {
        0 => {
            let r = rand_r(rng);
            let q = rand_q(rng);
            let mut ext = ExtendingDatum::new(r, q.basis.clone()).unwrap();
            for (k, v) in &q.table {
                ext.set(MapKind::Qbr, &k.0, &k.1, v.clone()).unwrap();
            }
            ext
        }
        1 => {
            let r = corpus::virasoro();
            let q = corpus::abelian_named(&["y", "z"]);
            let n = rng.gen_range(1..=2);
            let names = &q.basis.names()[..n];
            let mut ext = ExtendingDatum::new(r, Basis::new(names.to_vec()).unwrap()).unwrap();
            for y in names {
                let h = module_poly(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
                ext.set(MapKind::Rharpoon, "x", y, ModElem::term(h, y))
                    .unwrap();
            }
            ext
        }
        _ => rand_valid_flag(rng).to_extending_datum().unwrap(),
    };
    if rng.gen_bool(0.5) {
        let phi = rand_morphism(rng, &base.r.basis, &base.q);
        lcalg::extend::transport(&base, &phi).unwrap()
    } else {
        base
    }
}

/// `u` with degree-one coefficients; `v` a scaled identity or a unimodular
/// triangular map.
pub fn rand_morphism<R: Rng>(rng: &mut R, r: &Basis, q: &Basis) -> Morphism {
    let mut phi = Morphism::identity(q);
    for x in q.iter() {
        if rng.gen_bool(0.7) {
            let u = rand_elem(rng, r, &[Var::D], 1);
            if !u.is_zero() {
                phi.u.insert(x.to_string(), u);
            }
        }
    }
    let names = q.names();
    if names.len() == 2 && rng.gen_bool(0.5) {
        let p = rand_poly(rng, &[Var::D], 1, 2);
        let v = &ModElem::basis(&names[0]) + &ModElem::term(p, &names[1]);
        phi.v.insert(names[0].clone(), v);
    } else if rng.gen_bool(0.5) {
        let c = rand_coeff(rng);
        for x in names {
            phi.v.insert(x.clone(), ModElem::term(int(c), x));
        }
    }
    phi
}

/// Adds a random term to one entry of one of the six maps.
pub fn mutate_datum<R: Rng>(rng: &mut R, ext: &mut ExtendingDatum) {
    let kind = *MapKind::ALL.choose(rng).unwrap();
    let (r, q) = (ext.r.basis.clone(), ext.q.clone());
    let pick = |rng: &mut R, b: &Basis| b.names().choose(rng).unwrap().clone();
    let (a, b, target) = match kind {
        MapKind::Lharpoon => (pick(rng, &r), pick(rng, &q), &r),
        MapKind::Rharpoon => (pick(rng, &r), pick(rng, &q), &q),
        MapKind::Ltri => (pick(rng, &q), pick(rng, &r), &q),
        MapKind::Rtri => (pick(rng, &q), pick(rng, &r), &r),
        MapKind::F => (pick(rng, &q), pick(rng, &q), &r),
        MapKind::Qbr => (pick(rng, &q), pick(rng, &q), &q),
    };
    let w = pick(rng, target);
    let extra = ModElem::term(rand_poly(rng, &[Var::D, Var::L], 2, 2), &w);
    let value = &ext.get(kind, &a, &b) + &extra;
    ext.set(kind, &a, &b, value).unwrap();
}

/// Valid flag datums over ex1-LW from the built-in families, sometimes
/// transported.
pub fn rand_valid_flag<R: Rng>(rng: &mut R) -> FlagDatum {
    let base = match rng.gen_range(0..5) {
        0 => FlagDatum::zero(corpus::ex1_lw()),
        1 => {
            let mut fd = corpus::load_flag("a1-generic").unwrap();
            let values = BTreeMap::from([
                ("alpha".to_string(), rat(rng.gen_range(-3..=3))),
                ("beta".to_string(), rat(rng.gen_range(-3..=3))),
            ]);
            fd = fd.specialize(&values);
            fd.r.params.clear();
            fd
        }
        2 => corpus::b1_flag(&int(rng.gen_range(-3..=3)), &int(rng.gen_range(-3..=3))),
        3 => corpus::crossed_flag(module_poly(2, 0)),
        _ => {
            let mut fd = FlagDatum::zero(corpus::virasoro());
            fd.q_name = "y".into();
            fd.h.set(
                "x",
                module_poly(rng.gen_range(-2..=2), rng.gen_range(-2..=2)),
            );
            if rng.gen_bool(0.5) {
                fd.kind = FlagKind::Second;
            }
            fd
        }
    };
    if rng.gen_bool(0.5) {
        let u0 = rand_elem(rng, &base.r.basis, &[Var::D], 1);
        let c = int(rand_coeff(rng));
        lcalg::flag::transport_flag(&base, &u0, &c).unwrap()
    } else {
        base
    }
}

/// Adds a random term to one of `h`, `D`, `T`, `Q0`, `P`.
pub fn mutate_flag<R: Rng>(rng: &mut R, fd: &mut FlagDatum) {
    let b = fd.r.basis.clone();
    let a = b.names().choose(rng).unwrap().clone();
    let poly = |rng: &mut R| rand_poly(rng, &[Var::D, Var::L], 2, 2);
    match rng.gen_range(0..5) {
        0 => {
            let v = &fd.h.get(&a) + &poly(rng);
            fd.h.set(&a, v);
        }
        1 => {
            let w = b.names().choose(rng).unwrap().clone();
            let v = &fd.d.get(&a) + &ModElem::term(poly(rng), &w);
            fd.d.set(&a, v);
        }
        2 => {
            let w = b.names().choose(rng).unwrap().clone();
            let v = &fd.t.get(&a) + &ModElem::term(poly(rng), &w);
            fd.t.set(&a, v);
        }
        3 => {
            let w = b.names().choose(rng).unwrap().clone();
            fd.q0 = &fd.q0 + &ModElem::term(poly(rng), &w);
        }
        _ => fd.p = &fd.p + &poly(rng),
    }
    if fd.kind == FlagKind::Second && fd.h.is_zero() {
        fd.kind = FlagKind::First;
    }
}
