//! Conformal algebras given by structure tables over a free `C[d]`-module.
//!
//! Brackets are stored on basis pairs only. Every other bracket is produced
//! on demand by conformal sesquilinearity:
//!
//! `[f(d) e_i _s g(d) e_j] = f(-s) g(s + d) [e_i _l e_j]|_{l -> s}`.
//!
//! Checkers always put the outer slot in `l` and the inner slot in `m`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::poly::{
    check_identifier, parse_combination, Context, LinearForm, Poly, Rational, Substitution, Var,
    VarKind,
};
use crate::report::{Report, Residual};

/// Ordered list of free generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Basis {
    names: Vec<String>,
}

impl Basis {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            check_identifier(n)?;
            if Var::reserved(n).is_some() {
                return Err(Error::InvalidBasis(format!("`{n}` is a reserved variable")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidBasis(format!("duplicate basis name `{n}`")));
            }
        }
        Ok(Basis { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Concatenation; fails on a shared name.
    pub fn concat(&self, other: &Basis) -> Result<Basis> {
        if let Some(n) = other.names.iter().find(|n| self.contains(n)) {
            return Err(Error::NameCollision(n.clone()));
        }
        let mut names = self.names.clone();
        names.extend(other.names.iter().cloned());
        Ok(Basis { names })
    }
}

/// Finite sum `sum_i p_i * e_i` with polynomial coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ModElem {
    comps: BTreeMap<String, Poly>,
}

impl ModElem {
    pub fn zero() -> Self {
        ModElem::default()
    }

    pub fn basis(name: &str) -> Self {
        ModElem::term(Poly::one(), name)
    }

    pub fn term(p: Poly, name: &str) -> Self {
        let mut comps = BTreeMap::new();
        if !p.is_zero() {
            comps.insert(name.to_string(), p);
        }
        ModElem { comps }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, name: &str) -> Poly {
        self.comps.get(name).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (&str, &Poly)> {
        self.comps.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn support(&self) -> impl Iterator<Item = &str> {
        self.comps.keys().map(String::as_str)
    }

    pub fn add_component(&mut self, name: &str, p: &Poly) {
        if p.is_zero() {
            return;
        }
        let e = self.comps.entry(name.to_string()).or_default();
        *e += p;
        if e.is_zero() {
            self.comps.remove(name);
        }
    }

    pub fn scale(&self, p: &Poly) -> ModElem {
        let mut out = ModElem::zero();
        for (k, v) in &self.comps {
            out.add_component(k, &(p * v));
        }
        out
    }

    pub fn scale_rational(&self, c: &Rational) -> ModElem {
        self.scale(&Poly::constant(c.clone()))
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> ModElem {
        let mut out = ModElem::zero();
        for (k, v) in &self.comps {
            out.add_component(k, &f(v));
        }
        out
    }

    pub fn substitute(&self, s: &Substitution) -> ModElem {
        self.map_coeffs(|p| p.substitute(s))
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> ModElem {
        self.map_coeffs(|p| p.specialize(values))
    }

    /// Keep only the components along `basis`.
    pub fn project(&self, basis: &Basis) -> ModElem {
        ModElem {
            comps: self
                .comps
                .iter()
                .filter(|(k, _)| basis.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    pub fn is_over(&self, basis: &Basis) -> bool {
        self.comps.keys().all(|k| basis.contains(k))
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.comps.values().any(|p| p.mentions(v))
    }

    pub fn parse(text: &str, basis: &Basis, params: &[String]) -> Result<ModElem> {
        let mut ctx = Context::with_params(params)?;
        for b in basis.iter() {
            ctx.declare_basis(b)?;
        }
        ModElem::parse_in(text, &ctx)
    }

    pub fn parse_in(text: &str, ctx: &Context) -> Result<ModElem> {
        let c = parse_combination(text, ctx)?;
        if !c.scalar.is_zero() {
            return Err(Error::parse(
                0,
                format!("scalar term `{}` in element position", c.scalar),
            ));
        }
        let mut out = ModElem::zero();
        for (k, v) in &c.elems {
            out.add_component(k, v);
        }
        Ok(out)
    }
}

impl fmt::Display for ModElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comps.is_empty() {
            return f.write_str("0");
        }
        for (k, (name, p)) in self.comps.iter().enumerate() {
            let lead_neg = p
                .leading_coefficient()
                .map(|c| c.is_negative())
                .unwrap_or(false);
            let (neg, body) = if lead_neg {
                (true, -p)
            } else {
                (false, p.clone())
            };
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if body == Poly::one() {
                write!(f, "{name}")?;
            } else if body.len() == 1 {
                write!(f, "{body}*{name}")?;
            } else {
                write!(f, "({body})*{name}")?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&ModElem> for ModElem {
    fn add_assign(&mut self, rhs: &ModElem) {
        for (k, v) in &rhs.comps {
            self.add_component(k, v);
        }
    }
}

impl SubAssign<&ModElem> for ModElem {
    fn sub_assign(&mut self, rhs: &ModElem) {
        for (k, v) in &rhs.comps {
            self.add_component(k, &-v);
        }
    }
}

impl Add<&ModElem> for &ModElem {
    type Output = ModElem;
    fn add(self, rhs: &ModElem) -> ModElem {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&ModElem> for &ModElem {
    type Output = ModElem;
    fn sub(self, rhs: &ModElem) -> ModElem {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for ModElem {
    type Output = ModElem;
    fn add(self, rhs: ModElem) -> ModElem {
        &self + &rhs
    }
}

impl Sub for ModElem {
    type Output = ModElem;
    fn sub(self, rhs: ModElem) -> ModElem {
        &self - &rhs
    }
}

impl Neg for &ModElem {
    type Output = ModElem;
    fn neg(self) -> ModElem {
        self.map_coeffs(|p| -p)
    }
}

impl Neg for ModElem {
    type Output = ModElem;
    fn neg(self) -> ModElem {
        -&self
    }
}

/// Values stored on basis pairs of a conformal bilinear map, in `(l, d)`.
pub type PairTable = BTreeMap<(String, String), ModElem>;

pub(crate) fn pair(a: &str, b: &str) -> (String, String) {
    (a.to_string(), b.to_string())
}

/// `-s`
pub(crate) fn neg_slot(s: &LinearForm) -> LinearForm {
    -s.clone()
}

/// `s + d`
pub(crate) fn shift_slot(s: &LinearForm) -> LinearForm {
    s.clone() + LinearForm::var(Var::D)
}

pub fn slot(v: Var) -> LinearForm {
    LinearForm::var(v)
}

/// `l + m`
pub fn lm() -> LinearForm {
    LinearForm::combo(&[(Var::L, 1), (Var::M, 1)])
}

/// `-s - d`
pub fn reflect(s: &LinearForm) -> LinearForm {
    -(s.clone() + LinearForm::var(Var::D))
}

/// Evaluate a conformal bilinear map given on basis pairs at arbitrary
/// arguments and slot `s`.
pub fn apply_bilinear<'t>(
    entry: impl Fn(&str, &str) -> Option<&'t ModElem>,
    a: &ModElem,
    b: &ModElem,
    s: &LinearForm,
) -> ModElem {
    let left = Substitution::of([(Var::D, neg_slot(s))]);
    let right = Substitution::of([(Var::D, shift_slot(s))]);
    let relabel = Substitution::of([(Var::L, s.clone())]);
    let mut out = ModElem::zero();
    for (i, pa) in a.components() {
        let mut fa: Option<Poly> = None;
        for (j, pb) in b.components() {
            let Some(val) = entry(i, j) else { continue };
            if val.is_zero() {
                continue;
            }
            let fa = fa.get_or_insert_with(|| pa.substitute(&left));
            if fa.is_zero() {
                continue;
            }
            let coeff = &*fa * &pb.substitute(&right);
            out += &val.substitute(&relabel).scale(&coeff);
        }
    }
    out
}

pub(crate) fn lookup<'t>(table: &'t PairTable) -> impl Fn(&str, &str) -> Option<&'t ModElem> {
    move |a: &str, b: &str| table.get(&(a.to_string(), b.to_string()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConformalAlgebra {
    pub name: String,
    pub basis: Basis,
    pub params: Vec<String>,
    pub table: PairTable,
}

impl ConformalAlgebra {
    pub fn new(name: &str, basis: Basis, params: Vec<String>) -> Self {
        ConformalAlgebra {
            name: name.to_string(),
            basis,
            params,
            table: PairTable::new(),
        }
    }

    /// Set `[a _l b]`; the value may only use `l`, `d` and parameters.
    pub fn set(&mut self, a: &str, b: &str, value: ModElem) -> Result<()> {
        for n in [a, b] {
            if !self.basis.contains(n) {
                return Err(Error::UnknownBasis(n.to_string()));
            }
        }
        if let Some(n) = value.support().find(|n| !self.basis.contains(n)) {
            return Err(Error::UnknownBasis(n.to_string()));
        }
        if value.mentions(&Var::M) || value.mentions(&Var::N) {
            return Err(Error::Element(format!(
                "bracket [{a} l {b}] may only use l and d"
            )));
        }
        if value.is_zero() {
            self.table.remove(&pair(a, b));
        } else {
            self.table.insert(pair(a, b), value);
        }
        Ok(())
    }

    pub fn entry(&self, a: &str, b: &str) -> ModElem {
        self.table.get(&pair(a, b)).cloned().unwrap_or_default()
    }

    pub fn context(&self) -> Result<Context> {
        let mut ctx = Context::with_params(&self.params)?;
        for b in self.basis.iter() {
            ctx.declare_basis(b)?;
        }
        Ok(ctx)
    }

    pub fn parse_elem(&self, text: &str) -> Result<ModElem> {
        ModElem::parse_in(text, &self.context()?)
    }

    /// Bracket without argument validation.
    pub fn bracket(&self, a: &ModElem, b: &ModElem, s: &LinearForm) -> ModElem {
        apply_bilinear(lookup(&self.table), a, b, s)
    }

    /// Sesquilinear extension of the table: `[a _s b]`.
    pub fn extend_bracket(&self, a: &ModElem, b: &ModElem, s: &Var) -> Result<ModElem> {
        if s.kind() != VarKind::Spectral {
            return Err(Error::NotSpectral(s.name().to_string()));
        }
        for e in [a, b] {
            if let Some(n) = e.support().find(|n| !self.basis.contains(n)) {
                return Err(Error::UnknownBasis(n.to_string()));
            }
        }
        Ok(self.bracket(a, b, &slot(s.clone())))
    }

    pub fn is_abelian(&self) -> bool {
        self.table.values().all(ModElem::is_zero)
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> ConformalAlgebra {
        let mut out = self.clone();
        out.table = specialize_table(&self.table, values);
        out.params.retain(|p| !values.contains_key(p));
        out
    }

    fn unit(&self, i: &str) -> ModElem {
        ModElem::basis(i)
    }
}

pub(crate) fn specialize_table(t: &PairTable, values: &BTreeMap<String, Rational>) -> PairTable {
    t.iter()
        .map(|(k, v)| (k.clone(), v.specialize(values)))
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

/// `[a _l [b _m c]] - [[a _l b] _{l+m} c] - [b _m [a _l c]]`
pub fn jacobiator(alg: &ConformalAlgebra, a: &ModElem, b: &ModElem, c: &ModElem) -> ModElem {
    let l = slot(Var::L);
    let m = slot(Var::M);
    let lhs = alg.bracket(a, &alg.bracket(b, c, &m), &l);
    let mid = alg.bracket(&alg.bracket(a, b, &l), c, &lm());
    let right = alg.bracket(b, &alg.bracket(a, c, &l), &m);
    &(&lhs - &mid) - &right
}

pub fn check_leibniz(alg: &ConformalAlgebra) -> Report {
    let mut rep = Report::new("leibniz");
    push_jacobi(&mut rep, alg, "jacobi");
    rep
}

pub(crate) fn push_jacobi(rep: &mut Report, alg: &ConformalAlgebra, label: &str) {
    for i in alg.basis.iter() {
        for j in alg.basis.iter() {
            for k in alg.basis.iter() {
                let r = jacobiator(alg, &alg.unit(i), &alg.unit(j), &alg.unit(k));
                rep.push(label, &[i, j, k], Residual::Elem(r));
            }
        }
    }
}

/// `[e_i _l e_j] + [e_j _m e_i]|_{m -> -l-d}` for `j <= i`; the condition
/// for `(e_j, e_i)` is the one for `(e_i, e_j)` after `l -> -l-d`.
pub fn check_skew(alg: &ConformalAlgebra) -> Report {
    let mut rep = Report::new("skew");
    let flip = Substitution::of([(Var::M, reflect(&slot(Var::L)))]);
    let names = alg.basis.names();
    for (k, i) in names.iter().enumerate() {
        for j in &names[..=k] {
            let (i, j) = (i.as_str(), j.as_str());
            let a = alg.unit(i);
            let b = alg.unit(j);
            let fwd = alg.bracket(&a, &b, &slot(Var::L));
            let back = alg.bracket(&b, &a, &slot(Var::M)).substitute(&flip);
            rep.push("skew", &[i, j], Residual::Elem(&fwd + &back));
        }
    }
    rep
}

pub fn check_lie(alg: &ConformalAlgebra) -> Report {
    let mut rep = check_skew(alg);
    rep.title = "lie".into();
    push_jacobi(&mut rep, alg, "jacobi");
    rep
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Chirality {
    /// `M_s(d u) = -s M_s(u)`
    Left,
    /// `M_s(d u) = (d + s) M_s(u)`
    Right,
}

/// Conformal linear map given on basis elements as values in `(l, d)`,
/// where `l` is the slot variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CMap {
    pub chirality: Chirality,
    pub table: BTreeMap<String, ModElem>,
}

/// Conformal linear map with values in `C[l, d]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarCMap {
    pub chirality: Chirality,
    pub table: BTreeMap<String, Poly>,
}

impl CMap {
    pub fn zero(chirality: Chirality) -> Self {
        CMap {
            chirality,
            table: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: ModElem) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: ModElem) {
        if value.is_zero() {
            self.table.remove(name);
        } else {
            self.table.insert(name.to_string(), value);
        }
    }

    pub fn get(&self, name: &str) -> ModElem {
        self.table.get(name).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.table.values().all(ModElem::is_zero)
    }

    /// `M_s(e)` with the table's `d` replaced by `dslot`.
    pub fn apply_at(&self, e: &ModElem, s: &LinearForm, dslot: &LinearForm) -> ModElem {
        let mut out = ModElem::zero();
        let relabel = Substitution::of([(Var::L, s.clone()), (Var::D, dslot.clone())]);
        for (name, coeff) in e.components() {
            let Some(val) = self.table.get(name) else {
                continue;
            };
            let c = chiral_coeff(self.chirality, coeff, s, dslot);
            if c.is_zero() {
                continue;
            }
            out += &val.substitute(&relabel).scale(&c);
        }
        out
    }

    pub fn apply(&self, e: &ModElem, s: &LinearForm) -> ModElem {
        self.apply_at(e, s, &slot(Var::D))
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> CMap {
        let mut out = CMap::zero(self.chirality);
        for (k, v) in &self.table {
            out.set(k, v.specialize(values));
        }
        out
    }
}

impl ScalarCMap {
    pub fn zero(chirality: Chirality) -> Self {
        ScalarCMap {
            chirality,
            table: BTreeMap::new(),
        }
    }

    pub fn with(mut self, name: &str, value: Poly) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: Poly) {
        if value.is_zero() {
            self.table.remove(name);
        } else {
            self.table.insert(name.to_string(), value);
        }
    }

    pub fn get(&self, name: &str) -> Poly {
        self.table.get(name).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.table.values().all(Poly::is_zero)
    }

    pub fn apply_at(&self, e: &ModElem, s: &LinearForm, dslot: &LinearForm) -> Poly {
        let mut out = Poly::zero();
        let relabel = Substitution::of([(Var::L, s.clone()), (Var::D, dslot.clone())]);
        for (name, coeff) in e.components() {
            let Some(val) = self.table.get(name) else {
                continue;
            };
            let c = chiral_coeff(self.chirality, coeff, s, dslot);
            if c.is_zero() {
                continue;
            }
            out += &(&val.substitute(&relabel) * &c);
        }
        out
    }

    pub fn apply(&self, e: &ModElem, s: &LinearForm) -> Poly {
        self.apply_at(e, s, &slot(Var::D))
    }

    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> ScalarCMap {
        let mut out = ScalarCMap::zero(self.chirality);
        for (k, v) in &self.table {
            out.set(k, v.specialize(values));
        }
        out
    }
}

/// Coefficient rule: `f(d) -> f(-s)` (left) or `f(d) -> f(s + dslot)` (right).
fn chiral_coeff(ch: Chirality, coeff: &Poly, s: &LinearForm, dslot: &LinearForm) -> Poly {
    let sub = match ch {
        Chirality::Left => Substitution::of([(Var::D, neg_slot(s))]),
        Chirality::Right => Substitution::of([(Var::D, s.clone() + dslot.clone())]),
    };
    coeff.substitute(&sub)
}

/// Either flavour of conformal map, for [`apply_cmap`].
pub enum AnyCMap<'a> {
    Elem(&'a CMap),
    Scalar(&'a ScalarCMap),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MapValue {
    Elem(ModElem),
    Scalar(Poly),
}

/// Evaluate a map on `e` at slot `s`, with the table's `d` replaced by
/// `dslot`. Coefficients of `e` are handled first by the chirality rule,
/// then the slot variables of the table entries are substituted.
pub fn apply_cmap(
    map: AnyCMap<'_>,
    domain: &Basis,
    e: &ModElem,
    s: &LinearForm,
    dslot: &LinearForm,
) -> Result<MapValue> {
    if let Some(n) = e.support().find(|n| !domain.contains(n)) {
        return Err(Error::UnknownBasis(n.to_string()));
    }
    Ok(match map {
        AnyCMap::Elem(m) => MapValue::Elem(m.apply_at(e, s, dslot)),
        AnyCMap::Scalar(m) => MapValue::Scalar(m.apply_at(e, s, dslot)),
    })
}

/// `D_l([a _m b]) - [(D_l a) _{l+m} b] - [a _m (D_l b)]`
pub fn check_derivation(alg: &ConformalAlgebra, map: &CMap) -> Report {
    let mut rep = Report::new("derivation");
    let (l, m) = (slot(Var::L), slot(Var::M));
    for i in alg.basis.iter() {
        for j in alg.basis.iter() {
            let (a, b) = (alg.unit(i), alg.unit(j));
            let lhs = map.apply(&alg.bracket(&a, &b, &m), &l);
            let r1 = alg.bracket(&map.apply(&a, &l), &b, &lm());
            let r2 = alg.bracket(&a, &map.apply(&b, &l), &m);
            rep.push("derivation", &[i, j], Residual::Elem(&(&lhs - &r1) - &r2));
        }
    }
    rep
}

/// `D_{l+m}([a _l b]) - [a _l (D_m b)] + [b _m (D_l a)]`
pub fn check_anti_derivation(alg: &ConformalAlgebra, map: &CMap) -> Report {
    let mut rep = Report::new("anti-derivation");
    let (l, m) = (slot(Var::L), slot(Var::M));
    for i in alg.basis.iter() {
        for j in alg.basis.iter() {
            let (a, b) = (alg.unit(i), alg.unit(j));
            let lhs = map.apply(&alg.bracket(&a, &b, &l), &lm());
            let r1 = alg.bracket(&a, &map.apply(&b, &m), &l);
            let r2 = alg.bracket(&b, &map.apply(&a, &l), &m);
            rep.push(
                "anti-derivation",
                &[i, j],
                Residual::Elem(&(&lhs - &r1) + &r2),
            );
        }
    }
    rep
}

fn require_constant_in_slots(a: &ModElem) -> Result<()> {
    if a.mentions(&Var::L) || a.mentions(&Var::M) || a.mentions(&Var::N) {
        return Err(Error::Element(format!(
            "`{a}` must not involve spectral variables"
        )));
    }
    Ok(())
}

/// `ad_a`: `b -> [a _l b]`, a right conformal map.
pub fn inner_derivation(alg: &ConformalAlgebra, a: &ModElem) -> Result<CMap> {
    require_constant_in_slots(a)?;
    let mut map = CMap::zero(Chirality::Right);
    for j in alg.basis.iter() {
        map.set(j, alg.bracket(a, &alg.unit(j), &slot(Var::L)));
    }
    Ok(map)
}

/// `Ad_a`: `b -> [b _l a]`, a left conformal map.
pub fn inner_anti_derivation(alg: &ConformalAlgebra, a: &ModElem) -> Result<CMap> {
    require_constant_in_slots(a)?;
    let mut map = CMap::zero(Chirality::Left);
    for j in alg.basis.iter() {
        map.set(j, alg.bracket(&alg.unit(j), a, &slot(Var::L)));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::poly::{parse_poly, rat};

    fn virasoro() -> ConformalAlgebra {
        corpus::virasoro()
    }

    fn ex1() -> ConformalAlgebra {
        corpus::ex1_lw()
    }

    fn poly(s: &str) -> Poly {
        parse_poly(s, &Context::new()).unwrap()
    }

    #[test]
    fn extend_bracket_examples() {
        let v = virasoro();
        let x = ModElem::basis("x");
        assert_eq!(
            v.extend_bracket(&x, &x, &Var::L).unwrap(),
            ModElem::term(poly("d + 2*l"), "x")
        );
        let dx = ModElem::term(Poly::d(), "x");
        assert_eq!(
            v.extend_bracket(&dx, &x, &Var::L).unwrap(),
            ModElem::term(poly("-l*(d + 2*l)"), "x")
        );
        let e = ex1();
        assert!(e
            .extend_bracket(&ModElem::basis("W"), &ModElem::basis("L"), &Var::L)
            .unwrap()
            .is_zero());
        assert!(matches!(
            v.extend_bracket(&x, &x, &Var::D),
            Err(Error::NotSpectral(_))
        ));
        assert!(matches!(
            v.extend_bracket(&ModElem::basis("y"), &x, &Var::L),
            Err(Error::UnknownBasis(_))
        ));
    }

    #[test]
    fn jacobiator_of_rank_one_family() {
        let v = virasoro();
        let x = ModElem::basis("x");
        assert!(jacobiator(&v, &x, &x, &x).is_zero());

        let mut bad = ConformalAlgebra::new("p3", Basis::new(["x"]).unwrap(), vec![]);
        bad.set("x", "x", ModElem::term(poly("d + 3*l"), "x"))
            .unwrap();
        let expect = &(&(&poly("l + d + 3*m") * &poly("d + 3*l"))
            - &(&poly("2*l - m") * &poly("d + 3*l + 3*m")))
            - &(&poly("m + d + 3*l") * &poly("d + 3*m"));
        assert!(!expect.is_zero());
        assert_eq!(jacobiator(&bad, &x, &x, &x), ModElem::term(expect, "x"));
        assert!(!check_leibniz(&bad).passed());
    }

    #[test]
    fn axiom_checks_on_reference_algebras() {
        assert!(check_lie(&virasoro()).passed());
        let e = ex1();
        assert!(check_leibniz(&e).passed());
        let skew = check_skew(&e);
        assert!(!skew.passed());
        let first = skew.first_failure().unwrap();
        assert_eq!(first.args, vec!["W".to_string(), "L".to_string()]);
        assert_eq!(
            first.residual,
            Residual::Elem(ModElem::term(poly("-d - 2*l"), "W"))
        );
        let empty = ConformalAlgebra::new("zero", Basis::default(), vec![]);
        assert!(check_lie(&empty).passed());
        assert!(check_lie(&corpus::abelian(2)).passed());
    }

    #[test]
    fn cmap_chirality_laws() {
        let g1 = poly("1 - l + d*l");
        let d = CMap::zero(Chirality::Left).with("L", ModElem::term(g1.clone(), "W"));
        let dl = ModElem::term(Poly::d(), "L");
        assert_eq!(
            d.apply(&dl, &slot(Var::L)),
            ModElem::term(&poly("-l") * &g1, "W")
        );
        let t = CMap::zero(Chirality::Right).with("L", ModElem::term(g1.clone(), "W"));
        assert_eq!(
            t.apply(&dl, &slot(Var::L)),
            ModElem::term(&poly("d + l") * &g1, "W")
        );
        let h = ScalarCMap::zero(Chirality::Left).with("L", poly("d + l"));
        let v = h.apply_at(&ModElem::basis("L"), &reflect(&slot(Var::L)), &slot(Var::D));
        assert_eq!(v, poly("-l"));
        let basis = Basis::new(["L", "W"]).unwrap();
        assert!(apply_cmap(
            AnyCMap::Scalar(&h),
            &basis,
            &ModElem::basis("Z"),
            &slot(Var::L),
            &slot(Var::D)
        )
        .is_err());
    }

    #[test]
    fn inner_maps_pass_their_checkers() {
        for alg in [virasoro(), ex1(), corpus::abelian(2)] {
            for b in alg.basis.iter() {
                let a = ModElem::term(poly("d^2 - 3"), b);
                let ad = inner_derivation(&alg, &a).unwrap();
                assert!(check_derivation(&alg, &ad).passed(), "ad_{b}");
                let big = inner_anti_derivation(&alg, &a).unwrap();
                assert!(check_anti_derivation(&alg, &big).passed(), "Ad_{b}");
            }
        }
        let v = virasoro();
        let ad = inner_derivation(&v, &ModElem::basis("x")).unwrap();
        assert_eq!(ad.get("x"), ModElem::term(poly("d + 2*l"), "x"));
        let e = ex1();
        assert!(inner_derivation(&e, &ModElem::basis("W"))
            .unwrap()
            .is_zero());
        assert!(inner_derivation(&e, &ModElem::term(Poly::l(), "W")).is_err());
        let zero = CMap::zero(Chirality::Right);
        assert!(check_derivation(&e, &zero).passed());
        assert!(check_anti_derivation(&e, &CMap::zero(Chirality::Left)).passed());
    }

    #[test]
    fn format_mod_elem() {
        let e = ModElem::term(poly("-d - 2*l"), "W") + ModElem::basis("L");
        assert_eq!(e.to_string(), "L - (d + 2*l)*W");
        assert_eq!(
            ModElem::term(poly("-d - 2*l"), "W").to_string(),
            "-(d + 2*l)*W"
        );
        assert_eq!(ModElem::term(Poly::int(3), "W").to_string(), "3*W");
        let basis = Basis::new(["L", "W"]).unwrap();
        let back = ModElem::parse(&e.to_string(), &basis, &[]).unwrap();
        assert_eq!(back, e);
        assert!(ModElem::parse("1 + L", &basis, &[]).is_err());
        assert!(ModElem::parse("0", &basis, &[]).unwrap().is_zero());
        let _ = rat(0);
    }
}
