//! Flag datums: rank-one extending structures `R + C[d]x` encoded by
//! `(h, D, T, Q0, P)`.

use std::collections::BTreeMap;

use crate::conformal::{
    lm, push_jacobi, reflect, slot, Basis, CMap, Chirality, ConformalAlgebra, ModElem, ScalarCMap,
};
use crate::error::{Error, Result};
use crate::extend::{ExtendingDatum, MapKind};
use crate::poly::{LinearForm, Poly, Rational, Substitution, Var};
use crate::report::Report;
use crate::solver::{self, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlagKind {
    /// `x <| a = 0`
    First,
    /// `x <|_l a = -h_{-l-d}(a, d) x`
    Second,
}

impl FlagKind {
    pub fn number(self) -> u8 {
        match self {
            FlagKind::First => 1,
            FlagKind::Second => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagDatum {
    pub r: ConformalAlgebra,
    /// Left map `R -> C[l, d]`.
    pub h: ScalarCMap,
    /// Left map `R -> R[l]`.
    pub d: CMap,
    /// Right map `R -> R[l]`.
    pub t: CMap,
    pub q0: ModElem,
    pub p: Poly,
    pub kind: FlagKind,
    /// Name of the generator of `Q` in the product.
    pub q_name: String,
}

fn lf(parts: &[(Var, i64)]) -> LinearForm {
    LinearForm::combo(parts)
}

impl FlagDatum {
    /// The zero datum of the first kind.
    pub fn zero(r: ConformalAlgebra) -> Self {
        FlagDatum {
            r,
            h: ScalarCMap::zero(Chirality::Left),
            d: CMap::zero(Chirality::Left),
            t: CMap::zero(Chirality::Right),
            q0: ModElem::zero(),
            p: Poly::zero(),
            kind: FlagKind::First,
            q_name: "x".into(),
        }
    }

    /// Shape checks: chiralities, domains, codomains and the kind constraint.
    pub fn validate(&self) -> Result<()> {
        let b = &self.r.basis;
        if self.h.chirality != Chirality::Left || self.d.chirality != Chirality::Left {
            return Err(Error::Flag("h and D must be left conformal maps".into()));
        }
        if self.t.chirality != Chirality::Right {
            return Err(Error::Flag("T must be a right conformal map".into()));
        }
        let keys = self
            .h
            .table
            .keys()
            .chain(self.d.table.keys())
            .chain(self.t.table.keys());
        if let Some(k) = keys.into_iter().find(|k| !b.contains(k)) {
            return Err(Error::UnknownBasis(k.clone()));
        }
        let values = self.d.table.values().chain(self.t.table.values());
        for v in values.chain(std::iter::once(&self.q0)) {
            if let Some(n) = v.support().find(|n| !b.contains(n)) {
                return Err(Error::UnknownBasis(n.to_string()));
            }
        }
        let spectral = |p: &Poly| p.mentions(&Var::M) || p.mentions(&Var::N);
        if self.h.table.values().any(spectral)
            || spectral(&self.p)
            || [&self.q0]
                .into_iter()
                .chain(self.d.table.values())
                .chain(self.t.table.values())
                .any(|e| e.mentions(&Var::M) || e.mentions(&Var::N))
        {
            return Err(Error::Flag(
                "flag datum entries may only use l and d".into(),
            ));
        }
        if self.kind == FlagKind::Second && self.h.is_zero() {
            return Err(Error::Flag(
                "a flag datum of the second kind needs h != 0".into(),
            ));
        }
        if b.contains(&self.q_name) {
            return Err(Error::NameCollision(self.q_name.clone()));
        }
        Ok(())
    }

    /// The implicit map `g` with `x <|_l a = g_l(a, d) x`.
    pub fn g(&self) -> ScalarCMap {
        let mut g = ScalarCMap::zero(Chirality::Right);
        if self.kind == FlagKind::Second {
            let flip = Substitution::of([(Var::L, reflect(&slot(Var::L)))]);
            for (k, v) in &self.h.table {
                g.set(k, -v.substitute(&flip));
            }
        }
        g
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> FlagDatum {
        FlagDatum {
            r: self.r.specialize(values),
            h: self.h.specialize(values),
            d: self.d.specialize(values),
            t: self.t.specialize(values),
            q0: self.q0.specialize(values),
            p: self.p.specialize(values),
            kind: self.kind,
            q_name: self.q_name.clone(),
        }
    }

    /// The extending datum with `Q = C[d]x` that this flag datum encodes.
    pub fn to_extending_datum(&self) -> Result<ExtendingDatum> {
        self.validate()?;
        let x = self.q_name.as_str();
        let mut ext = ExtendingDatum::new(self.r.clone(), Basis::new([x])?)?;
        let g = self.g();
        for a in self.r.basis.iter() {
            ext.set(MapKind::Rharpoon, a, x, ModElem::term(self.h.get(a), x))?;
            ext.set(MapKind::Lharpoon, a, x, self.d.get(a))?;
            ext.set(MapKind::Ltri, x, a, ModElem::term(g.get(a), x))?;
            ext.set(MapKind::Rtri, x, a, self.t.get(a))?;
        }
        ext.set(MapKind::F, x, x, self.q0.clone())?;
        ext.set(MapKind::Qbr, x, x, ModElem::term(self.p.clone(), x))?;
        Ok(ext)
    }
}

/// `FC_1` or `FC_2` according to the kind.
pub fn build_fc(fd: &FlagDatum) -> Result<ConformalAlgebra> {
    let mut e = crate::extend::build_unified(&fd.to_extending_datum()?)?;
    e.name = format!("FC{}({})", fd.kind.number(), fd.r.name);
    Ok(e)
}

/// Read `(h, D, T, Q0, P)` off a datum with a rank-one `Q` and classify the
/// kind from `g`.
pub fn extract_flag(ext: &ExtendingDatum) -> Result<FlagDatum> {
    if ext.q.len() != 1 {
        return Err(Error::Flag(format!(
            "Q must have rank one, found {}",
            ext.q.len()
        )));
    }
    let x = ext.q.names()[0].clone();
    let mut fd = FlagDatum::zero(ext.r.clone());
    fd.q_name = x.clone();
    let mut g = ScalarCMap::zero(Chirality::Right);
    for a in ext.r.basis.iter() {
        fd.h.set(a, ext.get(MapKind::Rharpoon, a, &x).component(&x));
        fd.d.set(a, ext.get(MapKind::Lharpoon, a, &x));
        g.set(a, ext.get(MapKind::Ltri, &x, a).component(&x));
        fd.t.set(a, ext.get(MapKind::Rtri, &x, a));
    }
    fd.q0 = ext.get(MapKind::F, &x, &x);
    fd.p = ext.get(MapKind::Qbr, &x, &x).component(&x);
    if g.is_zero() {
        fd.kind = FlagKind::First;
        return Ok(fd);
    }
    fd.kind = FlagKind::Second;
    if fd.g() != g {
        return Err(Error::Flag(
            "x <| a is neither zero nor -h_{-l-d}(a, d) x".into(),
        ));
    }
    Ok(fd)
}

/// Evaluation helpers shared by the condition lists.
struct Ev<'a> {
    fd: &'a FlagDatum,
}

impl Ev<'_> {
    fn br(&self, a: &ModElem, b: &ModElem, s: &LinearForm) -> ModElem {
        self.fd.r.bracket(a, b, s)
    }
    fn h(&self, e: &ModElem, s: &LinearForm, dslot: &LinearForm) -> Poly {
        self.fd.h.apply_at(e, s, dslot)
    }
    fn dm(&self, e: &ModElem, s: &LinearForm) -> ModElem {
        self.fd.d.apply(e, s)
    }
    fn tm(&self, e: &ModElem, s: &LinearForm) -> ModElem {
        self.fd.t.apply(e, s)
    }
    fn p(&self, s: &LinearForm, dslot: &LinearForm) -> Poly {
        self.fd.p.substitute(&Substitution::of([
            (Var::L, s.clone()),
            (Var::D, dslot.clone()),
        ]))
    }
    fn q0(&self, s: &LinearForm) -> ModElem {
        self.fd
            .q0
            .substitute(&Substitution::of([(Var::L, s.clone())]))
    }
}

fn esum(parts: &[(i32, ModElem)]) -> ModElem {
    let mut out = ModElem::zero();
    for (s, e) in parts {
        if *s > 0 {
            out += e;
        } else {
            out -= e;
        }
    }
    out
}

fn psum(parts: &[(i32, Poly)]) -> Poly {
    let mut out = Poly::zero();
    for (s, p) in parts {
        if *s > 0 {
            out += p;
        } else {
            out -= p;
        }
    }
    out
}

/// Slots used by the condition lists.
struct Slots {
    l: LinearForm,
    m: LinearForm,
    lm: LinearForm,
    d: LinearForm,
    /// `l + d`
    ld: LinearForm,
    /// `m + d`
    md: LinearForm,
    /// `-l - m`
    nlm: LinearForm,
    /// `-l - m - d`
    nlmd: LinearForm,
    /// `-l - d`
    nld: LinearForm,
    /// `-m - d`
    nmd: LinearForm,
}

fn slots() -> Slots {
    Slots {
        l: slot(Var::L),
        m: slot(Var::M),
        lm: lm(),
        d: slot(Var::D),
        ld: lf(&[(Var::L, 1), (Var::D, 1)]),
        md: lf(&[(Var::M, 1), (Var::D, 1)]),
        nlm: lf(&[(Var::L, -1), (Var::M, -1)]),
        nlmd: lf(&[(Var::L, -1), (Var::M, -1), (Var::D, -1)]),
        nld: lf(&[(Var::L, -1), (Var::D, -1)]),
        nmd: lf(&[(Var::M, -1), (Var::D, -1)]),
    }
}

fn units(b: &Basis) -> Vec<(String, ModElem)> {
    b.iter()
        .map(|n| (n.to_string(), ModElem::basis(n)))
        .collect()
}

/// (fg1)-(fg11) for the first kind; (fg1), (fg2), (fg6), (fg10) and
/// (fgg11)-(fg18) for the second. The Jacobi identity of `R` is reported
/// under `R`.
pub fn check_flag(fd: &FlagDatum) -> Result<Report> {
    fd.validate()?;
    let ev = Ev { fd };
    let s = slots();
    let mut rep = Report::new(match fd.kind {
        FlagKind::First => "flag-1",
        FlagKind::Second => "flag-2",
    });
    push_jacobi(&mut rep, &fd.r, "R");
    let first = fd.kind == FlagKind::First;
    let rs = units(&fd.r.basis);

    for (an, a) in &rs {
        for (bn, b) in &rs {
            let args = [an.as_str(), bn.as_str()];
            let ab = ev.br(a, b, &s.l);
            let fg1 = psum(&[
                (1, ev.h(&ab, &s.lm, &s.d)),
                (-1, &ev.h(b, &s.m, &s.ld) * &ev.h(a, &s.l, &s.d)),
                (1, &ev.h(a, &s.l, &s.md) * &ev.h(b, &s.m, &s.d)),
            ]);
            rep.push_scalar("fg1", &args, fg1);
            let fg2 = esum(&[
                (1, ev.dm(&ab, &s.lm)),
                (-1, ev.br(a, &ev.dm(b, &s.m), &s.l)),
                (-1, ev.dm(a, &s.l).scale(&ev.h(b, &s.m, &s.ld))),
                (1, ev.br(b, &ev.dm(a, &s.l), &s.m)),
                (1, ev.dm(b, &s.m).scale(&ev.h(a, &s.l, &s.md))),
            ]);
            rep.push_elem("fg2", &args, fg2);
            if first {
                let fg3 = esum(&[
                    (1, ev.tm(&ab, &s.m)),
                    (-1, ev.br(a, &ev.tm(b, &s.m), &s.l)),
                    (1, ev.br(&ev.dm(a, &s.l), b, &s.lm)),
                    (1, ev.tm(b, &s.lm).scale(&ev.h(a, &s.l, &s.nlm))),
                ]);
                let fg4 = esum(&[
                    (1, ev.tm(&ab, &s.m)),
                    (-1, ev.br(a, &ev.tm(b, &s.m), &s.l)),
                    (-1, ev.br(&ev.tm(a, &s.m), b, &s.lm)),
                ]);
                rep.push_elem("fg3", &args, fg3);
                rep.push_elem("fg4", &args, fg4);
            } else {
                let fgg11 = esum(&[
                    (1, ev.tm(&ab, &s.m)),
                    (-1, ev.br(a, &ev.tm(b, &s.m), &s.l)),
                    (1, ev.dm(a, &s.l).scale(&ev.h(b, &s.nlmd, &s.ld))),
                    (1, ev.br(&ev.dm(a, &s.l), b, &s.lm)),
                    (1, ev.tm(b, &s.lm).scale(&ev.h(a, &s.l, &s.nlm))),
                ]);
                let fg12 = esum(&[
                    (1, ev.br(&ev.tm(a, &s.m), b, &s.lm)),
                    (1, ev.br(&ev.dm(a, &s.l), b, &s.lm)),
                ]);
                rep.push_elem("fgg11", &args, fgg11);
                rep.push_elem("fg12", &args, fg12);
            }
        }
    }

    for (an, a) in &rs {
        let args = [an.as_str()];
        let da = ev.dm(a, &s.l);
        let ta_m = ev.tm(a, &s.m);
        let fg6 = esum(&[
            (1, da.scale(&ev.p(&s.m, &s.ld))),
            (-1, ev.dm(&da, &s.lm)),
            (-1, ev.q0(&s.lm).scale(&ev.h(a, &s.l, &s.nlm))),
            (-1, ev.tm(&da, &s.m)),
            (-1, ev.q0(&s.m).scale(&ev.h(a, &s.l, &s.md))),
            (1, ev.br(a, &ev.q0(&s.m), &s.l)),
        ]);
        if first {
            let fg5 = psum(&[
                (1, &ev.p(&s.m, &s.ld) * &ev.h(a, &s.l, &s.d)),
                (-1, &ev.h(a, &s.l, &s.nlm) * &ev.p(&s.lm, &s.d)),
                (-1, &ev.h(a, &s.l, &s.md) * &ev.p(&s.m, &s.d)),
                (-1, ev.h(&da, &s.lm, &s.d)),
            ]);
            rep.push_scalar("fg5", &args, fg5);
            rep.push_elem("fg6", &args, fg6);
            let fg7 = esum(&[
                (1, ev.dm(&ta_m, &s.lm)),
                (1, ev.dm(&da, &s.lm)),
                (1, ev.q0(&s.lm).scale(&ev.h(a, &s.l, &s.nlm))),
            ]);
            rep.push_elem("fg7", &args, fg7);
            let fg8 = psum(&[
                (1, &ev.h(a, &s.l, &s.nlm) * &ev.p(&s.lm, &s.d)),
                (1, ev.h(&da, &s.lm, &s.d)),
                (1, ev.h(&ta_m, &s.lm, &s.d)),
            ]);
            rep.push_scalar("fg8", &args, fg8);
            let fg9 = esum(&[
                (1, ev.tm(a, &s.lm).scale(&ev.p(&s.l, &s.nlm))),
                (-1, ev.tm(&ta_m, &s.l)),
                (1, ev.br(&ev.q0(&s.l), a, &s.lm)),
                (1, ev.tm(&ev.tm(a, &s.l), &s.m)),
            ]);
            rep.push_elem("fg9", &args, fg9);
        } else {
            rep.push_elem("fg6", &args, fg6);
            let fg13 = psum(&[
                (1, &ev.p(&s.m, &s.ld) * &ev.h(a, &s.l, &s.d)),
                (-1, &ev.h(a, &s.l, &s.nlm) * &ev.p(&s.lm, &s.d)),
                (1, ev.h(&da, &s.nmd, &s.d)),
                (-1, &ev.h(a, &s.l, &s.md) * &ev.p(&s.m, &s.d)),
                (-1, ev.h(&da, &s.lm, &s.d)),
            ]);
            rep.push_scalar("fg13", &args, fg13);
            let fg14 = esum(&[(1, ev.dm(&ta_m, &s.lm)), (1, ev.dm(&da, &s.lm))]);
            rep.push_elem("fg14", &args, fg14);
            let fg15 = psum(&[(1, ev.h(&da, &s.lm, &s.d)), (1, ev.h(&ta_m, &s.lm, &s.d))]);
            rep.push_scalar("fg15", &args, fg15);
            let fg16 = esum(&[
                (1, ev.tm(a, &s.lm).scale(&ev.p(&s.l, &s.nlm))),
                (-1, ev.tm(&ta_m, &s.l)),
                (1, ev.q0(&s.l).scale(&ev.h(a, &s.nlmd, &s.ld))),
                (1, ev.br(&ev.q0(&s.l), a, &s.lm)),
                (1, ev.tm(&ev.tm(a, &s.l), &s.m)),
                (-1, ev.q0(&s.m).scale(&ev.h(a, &s.nlmd, &s.md))),
            ]);
            rep.push_elem("fg16", &args, fg16);
            let fg17 = psum(&[
                (1, &ev.p(&s.l, &s.nlm) * &ev.h(a, &s.nlmd, &s.d)),
                (-1, ev.h(&ta_m, &s.nld, &s.d)),
                (-1, &ev.h(a, &s.nlmd, &s.ld) * &ev.p(&s.l, &s.d)),
                (1, ev.h(&ev.tm(a, &s.l), &s.nmd, &s.d)),
                (1, &ev.h(a, &s.nlmd, &s.md) * &ev.p(&s.m, &s.d)),
            ]);
            rep.push_scalar("fg17", &args, fg17);
        }
    }

    let fg10 = esum(&[
        (1, ev.tm(&ev.q0(&s.m), &s.l)),
        (-1, ev.dm(&ev.q0(&s.l), &s.lm)),
        (-1, ev.q0(&s.lm).scale(&ev.p(&s.l, &s.nlm))),
        (-1, ev.tm(&ev.q0(&s.l), &s.m)),
        (-1, ev.q0(&s.m).scale(&ev.p(&s.l, &s.md))),
        (1, ev.q0(&s.l).scale(&ev.p(&s.m, &s.ld))),
    ]);
    rep.push_elem("fg10", &[], fg10);
    let pp = psum(&[
        (1, &ev.p(&s.l, &s.nlm) * &ev.p(&s.lm, &s.d)),
        (1, &ev.p(&s.l, &s.md) * &ev.p(&s.m, &s.d)),
        (-1, &ev.p(&s.m, &s.ld) * &ev.p(&s.l, &s.d)),
    ]);
    if first {
        rep.push_scalar("fg11", &[], &ev.h(&ev.q0(&s.l), &s.lm, &s.d) + &pp);
    } else {
        let fg18 = psum(&[
            (-1, ev.h(&ev.q0(&s.m), &s.nld, &s.d)),
            (-1, ev.h(&ev.q0(&s.l), &s.lm, &s.d)),
            (1, ev.h(&ev.q0(&s.l), &s.nmd, &s.d)),
            (-1, pp),
        ]);
        rep.push_scalar("fg18", &[], fg18);
    }
    Ok(rep)
}

/// Pick a kind for a datum given without one: the first kind when its
/// conditions hold, else the second when `h != 0` and its conditions hold,
/// else the first.
pub fn resolve_auto(fd: FlagDatum) -> Result<FlagDatum> {
    let first = FlagDatum {
        kind: FlagKind::First,
        ..fd
    };
    if check_flag(&first)?.passed() || first.h.is_zero() {
        return Ok(first);
    }
    let second = FlagDatum {
        kind: FlagKind::Second,
        ..first.clone()
    };
    if check_flag(&second)?.passed() {
        return Ok(second);
    }
    Ok(first)
}

/// The datum obtained from `fd_prime` through `u(x) = u0`, `v(x) = c x`:
/// the unique `fd` with `flag_equiv(fd, fd_prime, u0, c)` passing.
pub fn transport_flag(fd_prime: &FlagDatum, u0: &ModElem, c: &Poly) -> Result<FlagDatum> {
    fd_prime.validate()?;
    if c.is_zero() {
        return Err(Error::Flag("the scalar c must be nonzero".into()));
    }
    let s = slots();
    let second = fd_prime.kind == FlagKind::Second;
    let evp = Ev { fd: fd_prime };
    let mut fd = fd_prime.clone();
    for (an, a) in units(&fd_prime.r.basis) {
        let d = esum(&[
            (1, evp.br(&a, u0, &s.l)),
            (1, evp.dm(&a, &s.l).scale(c)),
            (-1, u0.scale(&evp.h(&a, &s.l, &s.d))),
        ]);
        let mut t = &evp.br(u0, &a, &s.l) + &evp.tm(&a, &s.l).scale(c);
        if second {
            t += &u0.scale(&evp.h(&a, &s.nld, &s.d));
        }
        fd.d.set(&an, d);
        fd.t.set(&an, t);
    }
    fd.p = &evp.h(u0, &s.l, &s.d) + &(c * &fd_prime.p);
    if second {
        fd.p -= &evp.h(u0, &s.nld, &s.d);
    }
    fd.q0 = esum(&[
        (1, evp.br(u0, u0, &s.l)),
        (1, evp.dm(u0, &s.l).scale(c)),
        (1, evp.tm(u0, &s.l).scale(c)),
        (1, fd_prime.q0.scale(&(c * c))),
        (-1, u0.scale(&fd.p)),
    ]);
    Ok(fd)
}

/// Check that `fd` is obtained from `fd_prime` through `u(x) = u0` and
/// `v(x) = c x`, with the (tt) equations for the first kind and the (ttt)
/// equations for the second.
pub fn flag_equiv(fd: &FlagDatum, fd_prime: &FlagDatum, u0: &ModElem, c: &Poly) -> Result<Report> {
    fd.validate()?;
    fd_prime.validate()?;
    if fd.kind != fd_prime.kind {
        return Err(Error::Flag("flag datums of different kinds".into()));
    }
    if c.is_zero() {
        return Err(Error::Flag("the scalar c must be nonzero".into()));
    }
    if c.vars().iter().any(|v| !v.is_param()) {
        return Err(Error::Flag("the scalar c must be a constant".into()));
    }
    if !u0.is_over(&fd.r.basis) {
        return Err(Error::UnknownBasis(
            u0.support()
                .find(|n| !fd.r.basis.contains(n))
                .unwrap_or_default()
                .to_string(),
        ));
    }
    if u0.mentions(&Var::L) || u0.mentions(&Var::M) || u0.mentions(&Var::N) {
        return Err(Error::Element(
            "u0 must not involve spectral variables".into(),
        ));
    }
    let s = slots();
    let second = fd.kind == FlagKind::Second;
    let ev = Ev { fd };
    let evp = Ev { fd: fd_prime };
    let mut rep = Report::new(if second { "equiv-2" } else { "equiv-1" });
    for (an, a) in units(&fd.r.basis) {
        let args = [an.as_str()];
        rep.push_scalar("h", &args, &fd.h.get(&an) - &fd_prime.h.get(&an));
        let d_res = esum(&[
            (1, ev.dm(&a, &s.l)),
            (-1, ev.br(&a, u0, &s.l)),
            (-1, evp.dm(&a, &s.l).scale(c)),
            (1, u0.scale(&ev.h(&a, &s.l, &s.d))),
        ]);
        rep.push_elem("D", &args, d_res);
        let mut t_res = esum(&[
            (1, ev.tm(&a, &s.l)),
            (-1, ev.br(u0, &a, &s.l)),
            (-1, evp.tm(&a, &s.l).scale(c)),
        ]);
        if second {
            t_res -= &u0.scale(&ev.h(&a, &s.nld, &s.d));
        }
        rep.push_elem("T", &args, t_res);
    }
    let mut p_expect = &evp.h(u0, &s.l, &s.d) + &(c * &fd_prime.p);
    if second {
        p_expect -= &evp.h(u0, &s.nld, &s.d);
    }
    rep.push_scalar("P", &[], &fd.p - &p_expect);
    let q_res = esum(&[
        (1, fd.q0.clone()),
        (-1, ev.br(u0, u0, &s.l)),
        (-1, evp.dm(u0, &s.l).scale(c)),
        (-1, evp.tm(u0, &s.l).scale(c)),
        (-1, fd_prime.q0.scale(&(c * c))),
        (1, u0.scale(&fd.p)),
    ]);
    rep.push_elem("Q0", &[], q_res);
    Ok(rep)
}

/// (fg9), (fg10) and (fc1)-(fc6) for a datum with `h = 0`. When the left
/// center of `R` is trivial at degree 3 the item `dt` carries
/// `D_{-l-d}(a) + T_l(a)`.
pub fn check_crossed_flag(fd: &FlagDatum) -> Result<Report> {
    fd.validate()?;
    if !fd.h.is_zero() {
        return Err(Error::Shape("a crossed flag datum needs h = 0".into()));
    }
    let ev = Ev { fd };
    let s = slots();
    let mut rep = Report::new("crossed-flag");
    push_jacobi(&mut rep, &fd.r, "R");
    let rs = units(&fd.r.basis);
    for (an, a) in &rs {
        let ta_m = ev.tm(a, &s.m);
        let fg9 = esum(&[
            (1, ev.tm(a, &s.lm).scale(&ev.p(&s.l, &s.nlm))),
            (-1, ev.tm(&ta_m, &s.l)),
            (1, ev.br(&ev.q0(&s.l), a, &s.lm)),
            (1, ev.tm(&ev.tm(a, &s.l), &s.m)),
        ]);
        rep.push_elem("fg9", &[an], fg9);
    }
    let fg10 = esum(&[
        (1, ev.tm(&ev.q0(&s.m), &s.l)),
        (-1, ev.dm(&ev.q0(&s.l), &s.lm)),
        (-1, ev.q0(&s.lm).scale(&ev.p(&s.l, &s.nlm))),
        (-1, ev.tm(&ev.q0(&s.l), &s.m)),
        (-1, ev.q0(&s.m).scale(&ev.p(&s.l, &s.md))),
        (1, ev.q0(&s.l).scale(&ev.p(&s.m, &s.ld))),
    ]);
    rep.push_elem("fg10", &[], fg10);
    for (an, a) in &rs {
        for (bn, b) in &rs {
            let args = [an.as_str(), bn.as_str()];
            let ab = ev.br(a, b, &s.l);
            let fc1 = esum(&[
                (1, ev.dm(&ab, &s.lm)),
                (-1, ev.br(a, &ev.dm(b, &s.m), &s.l)),
                (1, ev.br(b, &ev.dm(a, &s.l), &s.m)),
            ]);
            let fc2 = esum(&[
                (1, ev.tm(&ab, &s.m)),
                (-1, ev.br(a, &ev.tm(b, &s.m), &s.l)),
                (1, ev.br(&ev.dm(a, &s.l), b, &s.lm)),
            ]);
            let fc3 = esum(&[
                (1, ev.tm(&ab, &s.m)),
                (-1, ev.br(a, &ev.tm(b, &s.m), &s.l)),
                (-1, ev.br(&ev.tm(a, &s.m), b, &s.lm)),
            ]);
            rep.push_elem("fc1", &args, fc1);
            rep.push_elem("fc2", &args, fc2);
            rep.push_elem("fc3", &args, fc3);
        }
    }
    for (an, a) in &rs {
        let da = ev.dm(a, &s.l);
        let fc4 = esum(&[
            (1, da.scale(&ev.p(&s.m, &s.ld))),
            (-1, ev.dm(&da, &s.lm)),
            (-1, ev.tm(&da, &s.m)),
            (1, ev.br(a, &ev.q0(&s.m), &s.l)),
        ]);
        let fc5 = esum(&[(1, ev.dm(&ev.tm(a, &s.m), &s.lm)), (1, ev.dm(&da, &s.lm))]);
        rep.push_elem("fc4", &[an], fc4);
        rep.push_elem("fc5", &[an], fc5);
    }
    let fc6 = psum(&[
        (1, &ev.p(&s.l, &s.nlm) * &ev.p(&s.lm, &s.d)),
        (1, &ev.p(&s.l, &s.md) * &ev.p(&s.m, &s.d)),
        (-1, &ev.p(&s.m, &s.ld) * &ev.p(&s.l, &s.d)),
    ]);
    rep.push_scalar("fc6", &[], fc6);
    if left_center_trivial(&fd.r) {
        push_dt(&mut rep, fd);
    }
    Ok(rep)
}

fn left_center_trivial(r: &ConformalAlgebra) -> bool {
    matches!(solver::center_basis(r, Side::Left, 3), Ok(sp) if sp.dimension() == 0)
}

/// `D_{-l-d}(a) + T_l(a)` for every basis element.
pub fn push_dt(rep: &mut Report, fd: &FlagDatum) {
    let s = slots();
    for (an, a) in units(&fd.r.basis) {
        let r = &fd.d.apply(&a, &s.nld) + &fd.t.apply(&a, &s.l);
        rep.push_elem("dt", &[&an], r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::check_leibniz;
    use crate::corpus;
    use crate::poly::{parse_poly, rat, Context};

    fn poly(s: &str) -> Poly {
        parse_poly(s, &Context::new()).unwrap()
    }

    fn b1(k1: i64, k2: i64) -> FlagDatum {
        corpus::b1_flag(&Poly::int(k1), &Poly::int(k2))
    }

    #[test]
    fn b1_fc2_table() {
        let fd = b1(1, 0);
        assert!(check_flag(&fd).unwrap().passed());
        let e = build_fc(&fd).unwrap();
        assert_eq!(e.entry("x", "L"), ModElem::term(Poly::l(), "x"));
        assert_eq!(e.entry("x", "W"), ModElem::basis("W"));
        assert_eq!(e.entry("L", "x"), ModElem::term(poly("d + l"), "x"));
        assert!(check_leibniz(&e).passed());
    }

    #[test]
    fn extract_round_trip() {
        for fd in [
            b1(1, 1),
            corpus::a1_flag(),
            FlagDatum::zero(corpus::ex1_lw()),
        ] {
            let e = build_fc(&fd).unwrap();
            let mut ext = crate::extend::split_extending_datum(&e, &["L", "W"]).unwrap();
            ext.r.name = fd.r.name.clone();
            assert_eq!(extract_flag(&ext).unwrap(), fd);
        }
    }

    #[test]
    fn bad_g_is_rejected() {
        let fd = b1(1, 0);
        let mut ext = fd.to_extending_datum().unwrap();
        ext.set(MapKind::Ltri, "x", "L", ModElem::term(Poly::l(), "x"))
            .unwrap();
        ext.set(MapKind::Ltri, "x", "W", ModElem::term(Poly::l(), "x"))
            .unwrap();
        assert!(matches!(extract_flag(&ext), Err(Error::Flag(_))));
    }

    #[test]
    fn kind_two_needs_h() {
        let mut fd = FlagDatum::zero(corpus::ex1_lw());
        fd.kind = FlagKind::Second;
        assert!(matches!(check_flag(&fd), Err(Error::Flag(_))));
    }

    #[test]
    fn name_collision() {
        let fd = FlagDatum::zero(corpus::virasoro());
        assert!(matches!(build_fc(&fd), Err(Error::NameCollision(_))));
    }

    #[test]
    fn equivalences() {
        let a1 = corpus::a1_flag();
        let mut target = a1.clone();
        target.d = CMap::zero(Chirality::Left);
        assert!(check_flag(&a1).unwrap().passed());
        let rep = flag_equiv(&a1, &target, &-ModElem::basis("W"), &Poly::one()).unwrap();
        assert!(rep.passed(), "{rep}");
        let rep = flag_equiv(&a1, &a1, &ModElem::zero(), &Poly::one()).unwrap();
        assert!(rep.passed());
        let rep = flag_equiv(&b1(2, 2), &b1(1, 1), &ModElem::zero(), &Poly::int(2)).unwrap();
        assert!(rep.passed(), "{rep}");
        let rep = flag_equiv(&b1(2, 2), &b1(1, 1), &ModElem::zero(), &Poly::int(3)).unwrap();
        assert!(!rep.passed());
        assert!(flag_equiv(&a1, &a1, &ModElem::zero(), &Poly::zero()).is_err());
        let _ = rat(1);
    }

    #[test]
    fn crossed_flag_virasoro_quotient() {
        let mut fd = FlagDatum::zero(corpus::ex1_lw());
        fd.p = poly("d + 2*l");
        let rep = check_crossed_flag(&fd).unwrap();
        assert!(rep.passed(), "{rep}");
        assert!(check_leibniz(&build_fc(&fd).unwrap()).passed());
        fd.p = poly("d + 3*l");
        let rep = check_crossed_flag(&fd).unwrap();
        assert_eq!(rep.failing_conditions(), vec!["fc6".to_string()]);
    }
}
