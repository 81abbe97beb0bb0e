//! Extending datums of a Leibniz conformal algebra `R` by a free module `Q`,
//! the unified product on `R + Q` and the condition systems that decide
//! when it is Leibniz.

use std::collections::BTreeMap;

use crate::conformal::{
    apply_bilinear, check_leibniz, lm, lookup, pair, push_jacobi, slot, Basis, ConformalAlgebra,
    ModElem, PairTable,
};
use crate::error::{Error, Result};
use crate::poly::{LinearForm, Poly, Rational, Var};
use crate::report::Report;

/// The six bilinear maps of an extending datum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MapKind {
    /// `a <- x`, valued in R
    Lharpoon,
    /// `a -> x`, valued in Q
    Rharpoon,
    /// `x <| a`, valued in Q
    Ltri,
    /// `x |> a`, valued in R
    Rtri,
    /// `f(x, y)`, valued in R
    F,
    /// `{x y}`, valued in Q
    Qbr,
}

impl MapKind {
    pub const ALL: [MapKind; 6] = [
        MapKind::Lharpoon,
        MapKind::Rharpoon,
        MapKind::Ltri,
        MapKind::Rtri,
        MapKind::F,
        MapKind::Qbr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Lharpoon => "lharpoon",
            MapKind::Rharpoon => "rharpoon",
            MapKind::Ltri => "ltri",
            MapKind::Rtri => "rtri",
            MapKind::F => "f",
            MapKind::Qbr => "qbr",
        }
    }

    pub fn from_name(name: &str) -> Option<MapKind> {
        MapKind::ALL.into_iter().find(|k| k.name() == name)
    }

    /// (first argument in R, second argument in R, value in R)
    fn shape(self) -> (bool, bool, bool) {
        match self {
            MapKind::Lharpoon => (true, false, true),
            MapKind::Rharpoon => (true, false, false),
            MapKind::Ltri => (false, true, false),
            MapKind::Rtri => (false, true, true),
            MapKind::F => (false, false, true),
            MapKind::Qbr => (false, false, false),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendingDatum {
    pub r: ConformalAlgebra,
    pub q: Basis,
    pub lharpoon: PairTable,
    pub rharpoon: PairTable,
    pub ltri: PairTable,
    pub rtri: PairTable,
    pub f: PairTable,
    pub qbr: PairTable,
}

impl ExtendingDatum {
    /// The zero datum.
    pub fn new(r: ConformalAlgebra, q: Basis) -> Result<Self> {
        r.basis.concat(&q)?;
        Ok(ExtendingDatum {
            r,
            q,
            lharpoon: PairTable::new(),
            rharpoon: PairTable::new(),
            ltri: PairTable::new(),
            rtri: PairTable::new(),
            f: PairTable::new(),
            qbr: PairTable::new(),
        })
    }

    pub fn table(&self, kind: MapKind) -> &PairTable {
        match kind {
            MapKind::Lharpoon => &self.lharpoon,
            MapKind::Rharpoon => &self.rharpoon,
            MapKind::Ltri => &self.ltri,
            MapKind::Rtri => &self.rtri,
            MapKind::F => &self.f,
            MapKind::Qbr => &self.qbr,
        }
    }

    fn table_mut(&mut self, kind: MapKind) -> &mut PairTable {
        match kind {
            MapKind::Lharpoon => &mut self.lharpoon,
            MapKind::Rharpoon => &mut self.rharpoon,
            MapKind::Ltri => &mut self.ltri,
            MapKind::Rtri => &mut self.rtri,
            MapKind::F => &mut self.f,
            MapKind::Qbr => &mut self.qbr,
        }
    }

    pub fn set(&mut self, kind: MapKind, a: &str, b: &str, value: ModElem) -> Result<()> {
        let (ra, rb, rv) = kind.shape();
        let side = |in_r: bool| if in_r { &self.r.basis } else { &self.q };
        for (name, in_r) in [(a, ra), (b, rb)] {
            if !side(in_r).contains(name) {
                return Err(Error::UnknownBasis(format!("{name} (in {})", kind.name())));
            }
        }
        if let Some(n) = value.support().find(|n| !side(rv).contains(n)) {
            return Err(Error::UnknownBasis(format!(
                "{n} (value of {} must lie in {})",
                kind.name(),
                if rv { "R" } else { "Q" }
            )));
        }
        if value.mentions(&Var::M) || value.mentions(&Var::N) {
            return Err(Error::Element(format!(
                "{}[{a},{b}] may only use l and d",
                kind.name()
            )));
        }
        let t = self.table_mut(kind);
        if value.is_zero() {
            t.remove(&pair(a, b));
        } else {
            t.insert(pair(a, b), value);
        }
        Ok(())
    }

    pub fn get(&self, kind: MapKind, a: &str, b: &str) -> ModElem {
        self.table(kind)
            .get(&pair(a, b))
            .cloned()
            .unwrap_or_default()
    }

    pub fn is_zero_map(&self, kind: MapKind) -> bool {
        self.table(kind).values().all(ModElem::is_zero)
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> ExtendingDatum {
        let mut out = self.clone();
        out.r = self.r.specialize(values);
        for k in MapKind::ALL {
            let t = crate::conformal::specialize_table(self.table(k), values);
            *out.table_mut(k) = t;
        }
        out
    }

    /// `Q` with the bracket `{x y}` as a conformal algebra.
    pub fn q_algebra(&self) -> ConformalAlgebra {
        let mut q = ConformalAlgebra::new("Q", self.q.clone(), self.r.params.clone());
        q.table = self.qbr.clone();
        q
    }

    fn ops(&self) -> Ops<'_> {
        Ops { d: self }
    }
}

/// Bilinear evaluation helpers with arbitrary arguments and slots.
struct Ops<'a> {
    d: &'a ExtendingDatum,
}

impl Ops<'_> {
    fn br(&self, a: &ModElem, b: &ModElem, s: &LinearForm) -> ModElem {
        self.d.r.bracket(a, b, s)
    }
    fn lh(&self, a: &ModElem, x: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.lharpoon), a, x, s)
    }
    fn rh(&self, a: &ModElem, x: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.rharpoon), a, x, s)
    }
    fn lt(&self, x: &ModElem, a: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.ltri), x, a, s)
    }
    fn rt(&self, x: &ModElem, a: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.rtri), x, a, s)
    }
    fn f(&self, x: &ModElem, y: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.f), x, y, s)
    }
    fn qb(&self, x: &ModElem, y: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.d.qbr), x, y, s)
    }
}

fn sum(parts: &[(i32, ModElem)]) -> ModElem {
    let mut out = ModElem::zero();
    for (sign, e) in parts {
        if *sign > 0 {
            out += e;
        } else {
            out -= e;
        }
    }
    out
}

fn slots() -> (LinearForm, LinearForm, LinearForm) {
    (slot(Var::L), slot(Var::M), lm())
}

fn units(b: &Basis) -> Vec<(String, ModElem)> {
    b.iter()
        .map(|n| (n.to_string(), ModElem::basis(n)))
        .collect()
}

/// Module axioms of `(Q, ->, <|)` over `R`.
pub fn check_module_axioms(datum: &ExtendingDatum) -> Report {
    let mut rep = Report::new("module");
    push_module_axioms(&mut rep, datum);
    rep
}

fn push_module_axioms(rep: &mut Report, datum: &ExtendingDatum) {
    let o = datum.ops();
    let (l, m, lpm) = slots();
    let rs = units(&datum.r.basis);
    let qs = units(&datum.q);
    for (an, a) in &rs {
        for (bn, b) in &rs {
            for (xn, x) in &qs {
                let args = [an.as_str(), bn.as_str(), xn.as_str()];
                let m1 = sum(&[
                    (1, o.rh(a, &o.rh(b, x, &m), &l)),
                    (-1, o.rh(&o.br(a, b, &l), x, &lpm)),
                    (-1, o.rh(b, &o.rh(a, x, &l), &m)),
                ]);
                let m2 = sum(&[
                    (1, o.rh(a, &o.lt(x, b, &m), &l)),
                    (-1, o.lt(&o.rh(a, x, &l), b, &lpm)),
                    (-1, o.lt(x, &o.br(a, b, &l), &m)),
                ]);
                let m3 = sum(&[
                    (1, o.lt(x, &o.br(a, b, &m), &l)),
                    (-1, o.lt(&o.lt(x, a, &l), b, &lpm)),
                    (-1, o.rh(a, &o.lt(x, b, &l), &m)),
                ]);
                rep.push_elem("M1", &args, m1);
                rep.push_elem("M2", &args, m2);
                rep.push_elem("M3", &args, m3);
            }
        }
    }
}

/// Module axioms of `(R, <-, |>)` over `(Q, {})`.
fn push_q_module_axioms(rep: &mut Report, datum: &ExtendingDatum) {
    let o = datum.ops();
    let (l, m, lpm) = slots();
    let rs = units(&datum.r.basis);
    let qs = units(&datum.q);
    for (xn, x) in &qs {
        for (yn, y) in &qs {
            for (an, a) in &rs {
                let args = [xn.as_str(), yn.as_str(), an.as_str()];
                let n1 = sum(&[
                    (1, o.rt(x, &o.rt(y, a, &m), &l)),
                    (-1, o.rt(&o.qb(x, y, &l), a, &lpm)),
                    (-1, o.rt(y, &o.rt(x, a, &l), &m)),
                ]);
                let n2 = sum(&[
                    (1, o.rt(x, &o.lh(a, y, &m), &l)),
                    (-1, o.lh(&o.rt(x, a, &l), y, &lpm)),
                    (-1, o.lh(a, &o.qb(x, y, &l), &m)),
                ]);
                let n3 = sum(&[
                    (1, o.lh(a, &o.qb(x, y, &m), &l)),
                    (-1, o.lh(&o.lh(a, x, &l), y, &lpm)),
                    (-1, o.rt(x, &o.lh(a, y, &l), &m)),
                ]);
                rep.push_elem("N1", &args, n1);
                rep.push_elem("N2", &args, n2);
                rep.push_elem("N3", &args, n3);
            }
        }
    }
}

/// Residuals of (L1)-(L14) restricted to `which`.
fn push_l_conditions(rep: &mut Report, datum: &ExtendingDatum, which: &[u8]) {
    let o = datum.ops();
    let (l, m, lpm) = slots();
    let rs = units(&datum.r.basis);
    let qs = units(&datum.q);
    let want = |k: u8| which.contains(&k);

    if want(1) || want(2) || want(3) || want(4) || want(5) || want(6) {
        for (an, a) in &rs {
            for (bn, b) in &rs {
                for (xn, x) in &qs {
                    let args = [an.as_str(), bn.as_str(), xn.as_str()];
                    let ab = o.br(a, b, &l);
                    if want(1) {
                        let r = sum(&[
                            (1, o.rh(&ab, x, &lpm)),
                            (-1, o.rh(a, &o.rh(b, x, &m), &l)),
                            (1, o.rh(b, &o.rh(a, x, &l), &m)),
                        ]);
                        rep.push_elem("L1", &args, r);
                    }
                    if want(2) {
                        let r = sum(&[
                            (1, o.lh(&ab, x, &lpm)),
                            (-1, o.br(a, &o.lh(b, x, &m), &l)),
                            (-1, o.lh(a, &o.rh(b, x, &m), &l)),
                            (1, o.br(b, &o.lh(a, x, &l), &m)),
                            (1, o.lh(b, &o.rh(a, x, &l), &m)),
                        ]);
                        rep.push_elem("L2", &args, r);
                    }
                    if want(3) {
                        let r = sum(&[
                            (1, o.lt(x, &ab, &m)),
                            (-1, o.rh(a, &o.lt(x, b, &m), &l)),
                            (1, o.lt(&o.rh(a, x, &l), b, &lpm)),
                        ]);
                        rep.push_elem("L3", &args, r);
                    }
                    if want(4) {
                        let r = sum(&[
                            (1, o.rt(x, &ab, &m)),
                            (-1, o.br(a, &o.rt(x, b, &m), &l)),
                            (-1, o.lh(a, &o.lt(x, b, &m), &l)),
                            (1, o.br(&o.lh(a, x, &l), b, &lpm)),
                            (1, o.rt(&o.rh(a, x, &l), b, &lpm)),
                        ]);
                        rep.push_elem("L4", &args, r);
                    }
                    if want(5) {
                        let r = sum(&[
                            (1, o.br(&o.rt(x, a, &m), b, &lpm)),
                            (1, o.rt(&o.lt(x, a, &m), b, &lpm)),
                            (1, o.br(&o.lh(a, x, &l), b, &lpm)),
                            (1, o.rt(&o.rh(a, x, &l), b, &lpm)),
                        ]);
                        rep.push_elem("L5", &args, r);
                    }
                    if want(6) {
                        let r = sum(&[
                            (1, o.lt(&o.lt(x, a, &m), b, &lpm)),
                            (1, o.lt(&o.rh(a, x, &l), b, &lpm)),
                        ]);
                        rep.push_elem("L6", &args, r);
                    }
                }
            }
        }
    }

    if want(7) || want(8) || want(9) || want(10) {
        for (an, a) in &rs {
            for (xn, x) in &qs {
                for (yn, y) in &qs {
                    let args = [an.as_str(), xn.as_str(), yn.as_str()];
                    if want(7) {
                        let r = sum(&[
                            (1, o.rh(a, &o.qb(x, y, &m), &l)),
                            (-1, o.qb(&o.rh(a, x, &l), y, &lpm)),
                            (-1, o.lt(x, &o.lh(a, y, &l), &m)),
                            (-1, o.qb(x, &o.rh(a, y, &l), &m)),
                            (-1, o.rh(&o.lh(a, x, &l), y, &lpm)),
                        ]);
                        rep.push_elem("L7", &args, r);
                    }
                    if want(8) {
                        let r = sum(&[
                            (1, o.lh(a, &o.qb(x, y, &m), &l)),
                            (-1, o.lh(&o.lh(a, x, &l), y, &lpm)),
                            (-1, o.f(&o.rh(a, x, &l), y, &lpm)),
                            (-1, o.rt(x, &o.lh(a, y, &l), &m)),
                            (-1, o.f(x, &o.rh(a, y, &l), &m)),
                            (1, o.br(a, &o.f(x, y, &m), &l)),
                        ]);
                        rep.push_elem("L8", &args, r);
                    }
                    if want(9) {
                        let r = sum(&[
                            (1, o.lh(&o.rt(x, a, &m), y, &lpm)),
                            (1, o.f(&o.lt(x, a, &m), y, &lpm)),
                            (1, o.lh(&o.lh(a, x, &l), y, &lpm)),
                            (1, o.f(&o.rh(a, x, &l), y, &lpm)),
                        ]);
                        rep.push_elem("L9", &args, r);
                    }
                    if want(10) {
                        let r = sum(&[
                            (1, o.qb(&o.rh(a, x, &l), y, &lpm)),
                            (1, o.rh(&o.lh(a, x, &l), y, &lpm)),
                            (1, o.rh(&o.rt(x, a, &m), y, &lpm)),
                            (1, o.qb(&o.lt(x, a, &m), y, &lpm)),
                        ]);
                        rep.push_elem("L10", &args, r);
                    }
                }
            }
        }
    }

    if want(11) || want(12) {
        for (xn, x) in &qs {
            for (yn, y) in &qs {
                for (an, a) in &rs {
                    let args = [xn.as_str(), yn.as_str(), an.as_str()];
                    let xy = o.qb(x, y, &l);
                    if want(11) {
                        let r = sum(&[
                            (1, o.rt(&xy, a, &lpm)),
                            (-1, o.rt(x, &o.rt(y, a, &m), &l)),
                            (-1, o.f(x, &o.lt(y, a, &m), &l)),
                            (1, o.br(&o.f(x, y, &l), a, &lpm)),
                            (1, o.rt(y, &o.rt(x, a, &l), &m)),
                            (1, o.f(y, &o.lt(x, a, &l), &m)),
                        ]);
                        rep.push_elem("L11", &args, r);
                    }
                    if want(12) {
                        let r = sum(&[
                            (1, o.lt(&xy, a, &lpm)),
                            (-1, o.lt(x, &o.rt(y, a, &m), &l)),
                            (-1, o.qb(x, &o.lt(y, a, &m), &l)),
                            (1, o.lt(y, &o.rt(x, a, &l), &m)),
                            (1, o.qb(y, &o.lt(x, a, &l), &m)),
                        ]);
                        rep.push_elem("L12", &args, r);
                    }
                }
            }
        }
    }

    if want(13) || want(14) {
        for (xn, x) in &qs {
            for (yn, y) in &qs {
                for (zn, z) in &qs {
                    let args = [xn.as_str(), yn.as_str(), zn.as_str()];
                    if want(13) {
                        let r = sum(&[
                            (1, o.rt(x, &o.f(y, z, &m), &l)),
                            (-1, o.lh(&o.f(x, y, &l), z, &lpm)),
                            (-1, o.f(&o.qb(x, y, &l), z, &lpm)),
                            (-1, o.rt(y, &o.f(x, z, &l), &m)),
                            (-1, o.f(y, &o.qb(x, z, &l), &m)),
                            (1, o.f(x, &o.qb(y, z, &m), &l)),
                        ]);
                        rep.push_elem("L13", &args, r);
                    }
                    if want(14) {
                        let r = sum(&[
                            (1, o.lt(x, &o.f(y, z, &m), &l)),
                            (-1, o.rh(&o.f(x, y, &l), z, &lpm)),
                            (-1, o.lt(y, &o.f(x, z, &l), &m)),
                            (-1, o.qb(&o.qb(x, y, &l), z, &lpm)),
                            (-1, o.qb(y, &o.qb(x, z, &l), &m)),
                            (1, o.qb(x, &o.qb(y, z, &m), &l)),
                        ]);
                        rep.push_elem("L14", &args, r);
                    }
                }
            }
        }
    }
}

/// (L1)-(L14) together with the Jacobi identity of `R` itself. The verdict
/// is decided by these conditions; the Jacobi identity of the unified
/// product is evaluated alongside and a disagreement is recorded in
/// `suspect`.
pub fn check_extending_structure(datum: &ExtendingDatum) -> Report {
    let mut rep = Report::new("extending-structure");
    push_jacobi(&mut rep, &datum.r, "R");
    let all: Vec<u8> = (1..=14).collect();
    push_l_conditions(&mut rep, datum, &all);
    cross_check(&mut rep, datum);
    rep
}

fn cross_check(rep: &mut Report, datum: &ExtendingDatum) {
    match build_unified(datum) {
        Ok(e) => {
            let oracle = check_leibniz(&e);
            if oracle.passed() != rep.passed() {
                rep.suspect = Some(format!(
                    "condition list says {}, Jacobi identity of the unified product says {}",
                    rep.verdict(),
                    oracle.verdict()
                ));
            }
        }
        Err(e) => rep.suspect = Some(e.to_string()),
    }
}

/// The algebra on `R + Q` with bracket
/// `[(a,x) (b,y)] = ([a b] + a<-y + x|>b + f(x,y), a->y + x<|b + {x y})`.
pub fn build_unified(datum: &ExtendingDatum) -> Result<ConformalAlgebra> {
    let basis = datum.r.basis.concat(&datum.q)?;
    let mut e = ConformalAlgebra::new(
        &format!("{}+Q", datum.r.name),
        basis,
        datum.r.params.clone(),
    );
    let mut table = datum.r.table.clone();
    for (r_part, q_part) in [
        (&datum.lharpoon, &datum.rharpoon),
        (&datum.rtri, &datum.ltri),
        (&datum.f, &datum.qbr),
    ] {
        for (k, v) in r_part.iter().chain(q_part.iter()) {
            let slot = table.entry(k.clone()).or_default();
            *slot += v;
        }
    }
    table.retain(|_, v| !v.is_zero());
    e.table = table;
    Ok(e)
}

/// Read the six maps off an algebra on `R + Q` in which `r_names` span a
/// subalgebra.
pub fn split_extending_datum(e: &ConformalAlgebra, r_names: &[&str]) -> Result<ExtendingDatum> {
    for n in r_names {
        if !e.basis.contains(n) {
            return Err(Error::UnknownBasis(n.to_string()));
        }
    }
    let r_basis = Basis::new(e.basis.iter().filter(|n| r_names.contains(n)))?;
    let q_basis = Basis::new(e.basis.iter().filter(|n| !r_names.contains(n)))?;
    let mut r = ConformalAlgebra::new(&e.name, r_basis.clone(), e.params.clone());
    for a in r_basis.iter() {
        for b in r_basis.iter() {
            let v = e.entry(a, b);
            if let Some(out) = v.support().find(|n| !r_basis.contains(n)) {
                return Err(Error::NotSubalgebra {
                    a: a.to_string(),
                    b: b.to_string(),
                    outside: out.to_string(),
                });
            }
            r.set(a, b, v)?;
        }
    }
    let mut d = ExtendingDatum::new(r, q_basis.clone())?;
    for a in e.basis.iter() {
        for b in e.basis.iter() {
            let v = e.entry(a, b);
            let (rv, qv) = (v.project(&r_basis), v.project(&q_basis));
            match (r_basis.contains(a), r_basis.contains(b)) {
                (true, true) => {}
                (true, false) => {
                    d.set(MapKind::Lharpoon, a, b, rv)?;
                    d.set(MapKind::Rharpoon, a, b, qv)?;
                }
                (false, true) => {
                    d.set(MapKind::Rtri, a, b, rv)?;
                    d.set(MapKind::Ltri, a, b, qv)?;
                }
                (false, false) => {
                    d.set(MapKind::F, a, b, rv)?;
                    d.set(MapKind::Qbr, a, b, qv)?;
                }
            }
        }
    }
    Ok(d)
}

/// `phi(a, x) = (a + u(x), v(x))` with `u: Q -> R` and `v: Q -> Q`
/// both `C[d]`-linear and given on the basis of `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub u: BTreeMap<String, ModElem>,
    pub v: BTreeMap<String, ModElem>,
}

impl Morphism {
    pub fn identity(q: &Basis) -> Self {
        Morphism {
            u: BTreeMap::new(),
            v: q.iter()
                .map(|n| (n.to_string(), ModElem::basis(n)))
                .collect(),
        }
    }

    pub fn u_of(&self, x: &str) -> ModElem {
        self.u.get(x).cloned().unwrap_or_default()
    }

    pub fn v_of(&self, x: &str) -> ModElem {
        self.v.get(x).cloned().unwrap_or_default()
    }

    /// True iff `v` is the identity on `q`.
    pub fn co_stabilizing(&self, q: &Basis) -> bool {
        q.iter().all(|x| self.v_of(x) == ModElem::basis(x))
    }

    pub fn check_shape(&self, r: &Basis, q: &Basis) -> Result<()> {
        for (x, img, target) in self
            .u
            .iter()
            .map(|(k, v)| (k, v, r))
            .chain(self.v.iter().map(|(k, v)| (k, v, q)))
        {
            if !q.contains(x) {
                return Err(Error::UnknownBasis(x.clone()));
            }
            if let Some(n) = img.support().find(|n| !target.contains(n)) {
                return Err(Error::UnknownBasis(n.to_string()));
            }
            if img.mentions(&Var::L) || img.mentions(&Var::M) || img.mentions(&Var::N) {
                return Err(Error::Element(format!(
                    "image of {x} must not involve spectral variables"
                )));
            }
        }
        Ok(())
    }
}

/// Apply a `C[d]`-linear map given on basis elements; names outside the
/// domain pass through when `keep` is set, and vanish otherwise.
fn linear(map: &BTreeMap<String, ModElem>, e: &ModElem, keep: bool) -> ModElem {
    let mut out = ModElem::zero();
    for (n, p) in e.components() {
        match map.get(n) {
            Some(img) => out += &img.scale(p),
            None if keep => out.add_component(n, p),
            None => {}
        }
    }
    out
}

/// Square matrix over `Q[d, params]`, column `j` holding `v(e_j)`.
fn matrix_of(v: &BTreeMap<String, ModElem>, q: &Basis) -> Vec<Vec<Poly>> {
    q.iter()
        .map(|row| {
            q.iter()
                .map(|col| v.get(col).map(|e| e.component(row)).unwrap_or_default())
                .collect()
        })
        .collect()
}

fn determinant(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one();
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly::zero();
    for (j, top) in m[0].iter().enumerate() {
        if top.is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = top * &determinant(&minor);
        if j % 2 == 0 {
            det += &term;
        } else {
            det -= &term;
        }
    }
    det
}

/// `v^{-1}` as adjugate over determinant; the determinant must be a nonzero
/// rational constant.
pub fn invert_q_map(v: &BTreeMap<String, ModElem>, q: &Basis) -> Result<BTreeMap<String, ModElem>> {
    let m = matrix_of(v, q);
    let det = determinant(&m);
    if !det.is_constant() || det.is_zero() {
        return Err(Error::NotInvertible(format!("determinant {det}")));
    }
    let inv_det = Poly::constant(num_traits::Inv::inv(det.constant_term()));
    let n = q.len();
    let names: Vec<&str> = q.iter().collect();
    let mut out = BTreeMap::new();
    for (j, col) in names.iter().enumerate() {
        let mut img = ModElem::zero();
        for (i, row) in names.iter().enumerate() {
            // adj[i][j] = (-1)^{i+j} det(minor without row j, column i)
            let minor: Vec<Vec<Poly>> = (0..n)
                .filter(|r| *r != j)
                .map(|r| {
                    (0..n)
                        .filter(|c| *c != i)
                        .map(|c| m[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = determinant(&minor);
            if (i + j) % 2 == 1 {
                cof = -cof;
            }
            img.add_component(row, &(&cof * &inv_det));
        }
        out.insert(col.to_string(), img);
    }
    Ok(out)
}

/// The datum obtained from `target` through `phi`. Its unified product maps
/// onto the unified product of `target` by `phi`.
pub fn transport(target: &ExtendingDatum, phi: &Morphism) -> Result<ExtendingDatum> {
    phi.check_shape(&target.r.basis, &target.q)?;
    let vinv_map = invert_q_map(&phi.v, &target.q)?;
    let u = |e: &ModElem| linear(&phi.u, e, false);
    let v = |e: &ModElem| linear(&phi.v, e, false);
    let vinv = |e: &ModElem| linear(&vinv_map, e, false);
    let o = target.ops();
    let l = slot(Var::L);
    let rs = units(&target.r.basis);
    let qs = units(&target.q);

    let mut out = ExtendingDatum::new(target.r.clone(), target.q.clone())?;
    for (an, a) in &rs {
        for (xn, x) in &qs {
            let rh = vinv(&o.rh(a, &v(x), &l));
            let lh = sum(&[
                (1, o.br(a, &u(x), &l)),
                (1, o.lh(a, &v(x), &l)),
                (-1, u(&rh)),
            ]);
            let lt = vinv(&o.lt(&v(x), a, &l));
            let rt = sum(&[
                (1, o.br(&u(x), a, &l)),
                (1, o.rt(&v(x), a, &l)),
                (-1, u(&lt)),
            ]);
            out.set(MapKind::Rharpoon, an, xn, rh)?;
            out.set(MapKind::Lharpoon, an, xn, lh)?;
            out.set(MapKind::Ltri, xn, an, lt)?;
            out.set(MapKind::Rtri, xn, an, rt)?;
        }
    }
    for (xn, x) in &qs {
        for (yn, y) in &qs {
            let qb = vinv(&sum(&[
                (1, o.rh(&u(x), &v(y), &l)),
                (1, o.lt(&v(x), &u(y), &l)),
                (1, o.qb(&v(x), &v(y), &l)),
            ]));
            let f = sum(&[
                (1, o.br(&u(x), &u(y), &l)),
                (1, o.lh(&u(x), &v(y), &l)),
                (1, o.rt(&v(x), &u(y), &l)),
                (1, o.f(&v(x), &v(y), &l)),
                (-1, u(&qb)),
            ]);
            out.set(MapKind::Qbr, xn, yn, qb)?;
            out.set(MapKind::F, xn, yn, f)?;
        }
    }
    Ok(out)
}

/// The morphism undoing `phi`: `(a, x) -> (a - u(v^{-1} x), v^{-1} x)`.
pub fn inverse_morphism(phi: &Morphism, q: &Basis) -> Result<Morphism> {
    let vinv = invert_q_map(&phi.v, q)?;
    let mut u = BTreeMap::new();
    for x in q.iter() {
        let w = vinv.get(x).cloned().unwrap_or_default();
        let img = -linear(&phi.u, &w, false);
        if !img.is_zero() {
            u.insert(x.to_string(), img);
        }
    }
    Ok(Morphism { u, v: vinv })
}

/// Residuals `phi([p q]_E) - [phi(p) phi(q)]_{E'}` over basis pairs of `E`.
pub fn check_morphism(
    e: &ConformalAlgebra,
    e_target: &ConformalAlgebra,
    q: &Basis,
    phi: &Morphism,
) -> Result<Report> {
    let r = Basis::new(e.basis.iter().filter(|n| !q.contains(n)))?;
    phi.check_shape(&r, q)?;
    if e.basis != e_target.basis {
        return Err(Error::InvalidBasis(
            "source and target of a morphism must share the basis".into(),
        ));
    }
    let mut map = BTreeMap::new();
    for x in q.iter() {
        map.insert(x.to_string(), &phi.u_of(x) + &phi.v_of(x));
    }
    let apply = |el: &ModElem| linear(&map, el, true);
    let mut rep = Report::new("morphism");
    let l = slot(Var::L);
    for p in e.basis.iter() {
        for qn in e.basis.iter() {
            let (pe, qe) = (ModElem::basis(p), ModElem::basis(qn));
            let lhs = apply(&e.bracket(&pe, &qe, &l));
            let rhs = e_target.bracket(&apply(&pe), &apply(&qe), &l);
            rep.push_elem("hom", &[p, qn], &lhs - &rhs);
        }
    }
    Ok(rep)
}

fn require_zero(datum: &ExtendingDatum, kinds: &[MapKind], what: &str) -> Result<()> {
    for k in kinds {
        if !datum.is_zero_map(*k) {
            return Err(Error::Shape(format!("{what} needs {} = 0", k.name())));
        }
    }
    Ok(())
}

/// (ts1)-(ts2) for `f` over `R` and the Leibniz algebra `Q`.
pub fn check_twisted(r: &ConformalAlgebra, q: &ConformalAlgebra, f: &PairTable) -> Result<Report> {
    let mut datum = ExtendingDatum::new(r.clone(), q.basis.clone())?;
    datum.qbr = q.table.clone();
    for ((x, y), v) in f {
        datum.set(MapKind::F, x, y, v.clone())?;
    }
    let o = datum.ops();
    let (l, m, lpm) = slots();
    let mut rep = Report::new("twisted");
    push_jacobi(&mut rep, r, "R");
    push_jacobi(&mut rep, q, "Q");
    let rs = units(&r.basis);
    let qs = units(&q.basis);
    for (xn, x) in &qs {
        for (yn, y) in &qs {
            for (an, a) in &rs {
                let args = [xn.as_str(), yn.as_str(), an.as_str()];
                rep.push_elem("ts1a", &args, o.br(a, &o.f(x, y, &m), &l));
                rep.push_elem("ts1b", &args, o.br(&o.f(x, y, &l), a, &lpm));
            }
        }
    }
    for (xn, x) in &qs {
        for (yn, y) in &qs {
            for (zn, z) in &qs {
                let r = sum(&[
                    (1, o.f(&o.qb(x, y, &l), z, &lpm)),
                    (1, o.f(y, &o.qb(x, z, &l), &m)),
                    (-1, o.f(x, &o.qb(y, z, &m), &l)),
                ]);
                rep.push_elem("ts2", &[xn, yn, zn], r);
            }
        }
    }
    Ok(rep)
}

/// (C1)-(C7) for a datum with `-> = <| = 0`.
pub fn check_crossed(datum: &ExtendingDatum) -> Result<Report> {
    require_zero(
        datum,
        &[MapKind::Rharpoon, MapKind::Ltri],
        "a crossed product",
    )?;
    let o = datum.ops();
    let (l, m, lpm) = slots();
    let mut rep = Report::new("crossed");
    push_jacobi(&mut rep, &datum.r, "R");
    push_jacobi(&mut rep, &datum.q_algebra(), "Q");
    let rs = units(&datum.r.basis);
    let qs = units(&datum.q);
    for (an, a) in &rs {
        for (bn, b) in &rs {
            for (xn, x) in &qs {
                let args = [an.as_str(), bn.as_str(), xn.as_str()];
                let ab = o.br(a, b, &l);
                let c1 = sum(&[
                    (1, o.lh(&ab, x, &lpm)),
                    (-1, o.br(a, &o.lh(b, x, &m), &l)),
                    (1, o.br(b, &o.lh(a, x, &l), &m)),
                ]);
                let c2 = sum(&[
                    (1, o.rt(x, &ab, &m)),
                    (-1, o.br(a, &o.rt(x, b, &m), &l)),
                    (1, o.br(&o.lh(a, x, &l), b, &lpm)),
                ]);
                let c3 = sum(&[
                    (1, o.br(&o.rt(x, a, &m), b, &lpm)),
                    (1, o.br(&o.lh(a, x, &l), b, &lpm)),
                ]);
                rep.push_elem("C1", &args, c1);
                rep.push_elem("C2", &args, c2);
                rep.push_elem("C3", &args, c3);
            }
        }
    }
    for (an, a) in &rs {
        for (xn, x) in &qs {
            for (yn, y) in &qs {
                let args = [an.as_str(), xn.as_str(), yn.as_str()];
                let c4 = sum(&[
                    (1, o.lh(a, &o.qb(x, y, &m), &l)),
                    (-1, o.lh(&o.lh(a, x, &l), y, &lpm)),
                    (-1, o.rt(x, &o.lh(a, y, &l), &m)),
                    (1, o.br(a, &o.f(x, y, &m), &l)),
                ]);
                let c5 = sum(&[
                    (1, o.lh(&o.rt(x, a, &m), y, &lpm)),
                    (1, o.lh(&o.lh(a, x, &l), y, &lpm)),
                ]);
                rep.push_elem("C4", &args, c4);
                rep.push_elem("C5", &args, c5);
            }
        }
    }
    for (xn, x) in &qs {
        for (yn, y) in &qs {
            for (an, a) in &rs {
                let c6 = sum(&[
                    (1, o.rt(&o.qb(x, y, &l), a, &lpm)),
                    (-1, o.rt(x, &o.rt(y, a, &m), &l)),
                    (1, o.br(&o.f(x, y, &l), a, &lpm)),
                    (1, o.rt(y, &o.rt(x, a, &l), &m)),
                ]);
                rep.push_elem("C6", &[xn, yn, an], c6);
            }
        }
    }
    push_l_conditions(&mut rep, datum, &[13]);
    for it in rep.items.iter_mut().filter(|i| i.condition == "L13") {
        it.condition = "C7".into();
    }
    Ok(rep)
}

/// Bicrossed product conditions for a datum with `f = 0`.
///
/// Besides both module structures and (L2), (L4), (L5), (L10), (L12), the
/// `Q`-component of the Jacobi identity on `(a, x, y)`, which is (L7), is not
/// implied by the others and is checked as well.
pub fn check_bicrossed(datum: &ExtendingDatum) -> Result<Report> {
    require_zero(datum, &[MapKind::F], "a bicrossed product")?;
    let mut rep = Report::new("bicrossed");
    push_jacobi(&mut rep, &datum.r, "R");
    push_jacobi(&mut rep, &datum.q_algebra(), "Q");
    push_module_axioms(&mut rep, datum);
    push_q_module_axioms(&mut rep, datum);
    push_l_conditions(&mut rep, datum, &[2, 4, 5, 7, 10, 12]);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::poly::{parse_poly, Context};

    fn poly(s: &str) -> Poly {
        parse_poly(s, &Context::with_params(["a", "b"]).unwrap()).unwrap()
    }

    fn semidirect() -> ExtendingDatum {
        let mut d = ExtendingDatum::new(corpus::virasoro(), Basis::new(["y"]).unwrap()).unwrap();
        d.r.params = vec!["a".into(), "b".into()];
        d.set(
            MapKind::Rharpoon,
            "x",
            "y",
            ModElem::term(poly("d + a*l + b"), "y"),
        )
        .unwrap();
        d
    }

    #[test]
    fn semidirect_sum_is_a_structure() {
        let d = semidirect();
        assert!(check_module_axioms(&d).passed());
        let rep = check_extending_structure(&d);
        assert!(rep.passed(), "{rep}");
        assert!(rep.suspect.is_none());
        let e = build_unified(&d).unwrap();
        assert_eq!(e.entry("x", "y"), ModElem::term(poly("d + a*l + b"), "y"));
    }

    #[test]
    fn non_module_fails() {
        let mut d = ExtendingDatum::new(corpus::virasoro(), Basis::new(["y"]).unwrap()).unwrap();
        d.set(MapKind::Rharpoon, "x", "y", ModElem::term(poly("l^2"), "y"))
            .unwrap();
        assert!(!check_module_axioms(&d).passed());
        let rep = check_extending_structure(&d);
        assert!(!rep.passed());
        assert!(rep.suspect.is_none());
    }

    #[test]
    fn split_round_trip() {
        let d = semidirect();
        let e = build_unified(&d).unwrap();
        let back = split_extending_datum(&e, &["x"]).unwrap();
        assert_eq!(back.rharpoon, d.rharpoon);
        assert_eq!(build_unified(&back).unwrap().table, e.table);
        assert!(split_extending_datum(&e, &["y"]).is_ok());
        let b1 = build_unified(&corpus::load_extend("bicrossed-ex1-b1").unwrap()).unwrap();
        assert!(matches!(
            split_extending_datum(&b1, &["L", "x"]),
            Err(Error::NotSubalgebra { .. })
        ));
    }

    #[test]
    fn transport_by_inner_shift() {
        let target = ExtendingDatum::new(corpus::virasoro(), Basis::new(["y"]).unwrap()).unwrap();
        let mut phi = Morphism::identity(&target.q);
        phi.u.insert("y".into(), ModElem::basis("x"));
        let d = transport(&target, &phi).unwrap();
        assert_eq!(
            d.get(MapKind::Lharpoon, "x", "y"),
            ModElem::term(poly("d + 2*l"), "x")
        );
        assert_eq!(
            d.get(MapKind::Rtri, "y", "x"),
            ModElem::term(poly("d + 2*l"), "x")
        );
        assert_eq!(
            d.get(MapKind::F, "y", "y"),
            ModElem::term(poly("d + 2*l"), "x")
        );
        assert!(d.is_zero_map(MapKind::Rharpoon) && d.is_zero_map(MapKind::Qbr));
        let rep = check_morphism(
            &build_unified(&d).unwrap(),
            &build_unified(&target).unwrap(),
            &target.q,
            &phi,
        )
        .unwrap();
        assert!(rep.passed(), "{rep}");
        let inv = inverse_morphism(&phi, &target.q).unwrap();
        assert_eq!(transport(&d, &inv).unwrap(), target);
        let id = Morphism::identity(&target.q);
        assert_eq!(transport(&target, &id).unwrap(), target);
    }

    #[test]
    fn singular_v_is_rejected() {
        let target = ExtendingDatum::new(corpus::virasoro(), Basis::new(["y"]).unwrap()).unwrap();
        let mut phi = Morphism::identity(&target.q);
        phi.v.insert("y".into(), ModElem::term(Poly::d(), "y"));
        assert!(matches!(
            transport(&target, &phi),
            Err(Error::NotInvertible(_))
        ));
    }

    #[test]
    fn twisted_examples() {
        let r = corpus::abelian(1);
        let q = corpus::abelian_named(&["y"]);
        assert!(check_twisted(&r, &q, &PairTable::new()).unwrap().passed());
        let e1 = corpus::ex1_lw();
        let mut f = PairTable::new();
        f.insert(pair("y", "y"), ModElem::basis("W"));
        let rep = check_twisted(&e1, &q, &f).unwrap();
        assert_eq!(rep.failing_conditions(), vec!["ts1a".to_string()]);
    }

    #[test]
    fn shape_errors() {
        let d = semidirect();
        assert!(matches!(check_crossed(&d), Err(Error::Shape(_))));
        let mut d2 = ExtendingDatum::new(corpus::abelian(1), Basis::new(["y"]).unwrap()).unwrap();
        d2.set(MapKind::F, "y", "y", ModElem::basis("e1")).unwrap();
        assert!(matches!(check_bicrossed(&d2), Err(Error::Shape(_))));
    }
}
