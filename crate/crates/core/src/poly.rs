//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] lives in `Q[d, l, m, n, params...]`: `d` is the translation
//! operator, `l`, `m`, `n` are spectral variables and every other identifier
//! is a declared parameter. Parameters are ordinary commuting indeterminates,
//! so "zero" always means "zero for every value of the parameters".

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational scalar.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Render a rational as `a` or `a/b`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `a` or `a/b` (optionally signed) into a rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::parse(0, format!("`{t}` is not a rational number"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::parse(0, "zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// The translation operator, rendered `d`.
    D,
    /// First spectral variable, rendered `l`.
    L,
    /// Second spectral variable, rendered `m`.
    M,
    /// Third spectral variable, rendered `n`.
    N,
    Param(Arc<str>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Translation,
    Spectral,
    Parameter,
}

pub const RESERVED: [&str; 4] = ["d", "l", "m", "n"];

impl Var {
    pub fn param(name: &str) -> Var {
        Var::Param(Arc::from(name))
    }

    pub fn kind(&self) -> VarKind {
        match self {
            Var::D => VarKind::Translation,
            Var::L | Var::M | Var::N => VarKind::Spectral,
            Var::Param(_) => VarKind::Parameter,
        }
    }

    pub fn is_param(&self) -> bool {
        matches!(self, Var::Param(_))
    }

    pub fn name(&self) -> &str {
        match self {
            Var::D => "d",
            Var::L => "l",
            Var::M => "m",
            Var::N => "n",
            Var::Param(p) => p,
        }
    }

    pub fn reserved(name: &str) -> Option<Var> {
        match name {
            "d" => Some(Var::D),
            "l" => Some(Var::L),
            "m" => Some(Var::M),
            "n" => Some(Var::N),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A power product, stored as `(variable, exponent)` pairs sorted by
/// variable with strictly positive exponents.
///
/// The `Ord` impl is the display order: higher total degree first, ties
/// broken lexicographically with `d > l > m > n > parameters`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Self {
        pairs.retain(|(_, e)| *e > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Var, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &Var) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0.clone(), a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Split into the factors satisfying `pred` and the rest.
    pub fn partition(&self, pred: impl Fn(&Var) -> bool) -> (Monomial, Monomial) {
        let (yes, no): (Vec<_>, Vec<_>) = self.0.iter().cloned().partition(|(v, _)| pred(v));
        (Monomial(yes), Monomial(no))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match other.degree().cmp(&self.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (x, y) in self.0.iter().zip(other.0.iter()) {
            match x.0.cmp(&y.0) {
                Ordering::Equal => match y.1.cmp(&x.1) {
                    Ordering::Equal => continue,
                    o => return o,
                },
                o => return o,
            }
        }
        other.0.len().cmp(&self.0.len())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Rational::one(), Monomial::var(v))
    }

    pub fn d() -> Self {
        Poly::var(Var::D)
    }

    pub fn l() -> Self {
        Poly::var(Var::L)
    }

    pub fn m() -> Self {
        Poly::var(Var::M)
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// The constant coefficient.
    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(v, _)| v.clone()))
            .collect()
    }

    pub fn params(&self) -> BTreeSet<String> {
        self.vars()
            .into_iter()
            .filter_map(|v| match v {
                Var::Param(p) => Some(p.to_string()),
                _ => None,
            })
            .collect()
    }

    pub fn mentions(&self, v: &Var) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Simultaneous affine substitution.
    pub fn substitute(&self, s: &Substitution) -> Poly {
        if s.is_empty() || self.is_zero() {
            return self.clone();
        }
        let mut cache: HashMap<(usize, u32), Poly> = HashMap::new();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut rest = Vec::new();
            let mut bound = Vec::new();
            for (v, e) in &m.0 {
                match s.index_of(v) {
                    Some(i) => bound.push((i, *e)),
                    None => rest.push((v.clone(), *e)),
                }
            }
            if bound.is_empty() {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let mut prod = Poly::term(c.clone(), Monomial(rest));
            for (i, e) in bound {
                let p = cache
                    .entry((i, e))
                    .or_insert_with(|| s.binds[i].1.to_poly().pow(e));
                prod = &prod * &*p;
            }
            out += &prod;
        }
        out
    }

    /// Replace parameters by rational values.
    pub fn specialize(&self, values: &BTreeMap<String, Rational>) -> Poly {
        if values.is_empty() {
            return self.clone();
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for (v, e) in &m.0 {
                match v {
                    Var::Param(p) if values.contains_key(&**p) => {
                        let base = &values[&**p];
                        coeff *= num_traits::pow::pow(base.clone(), *e as usize);
                    }
                    _ => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Collect coefficients with respect to the variables selected by
    /// `pred`: returns a map from selected monomial to the cofactor.
    pub fn collect_by(&self, pred: impl Fn(&Var) -> bool) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (sel, rest) = m.partition(&pred);
            out.entry(sel).or_default().add_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// Interpret a degree-one polynomial as a linear form.
    pub fn to_linear_form(&self) -> Option<LinearForm> {
        let mut lf = LinearForm::zero();
        for (m, c) in &self.terms {
            match m.0.as_slice() {
                [] => lf.constant = c.clone(),
                [(v, 1)] => {
                    lf.coeffs.insert(v.clone(), c.clone());
                }
                _ => return None,
            }
        }
        Some(lf)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                f.write_str(&format_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rational(&a))?;
            }
        }
        Ok(())
    }
}

impl From<Var> for Poly {
    fn from(v: Var) -> Self {
        Poly::var(v)
    }
}

impl From<i64> for Poly {
    fn from(n: i64) -> Self {
        Poly::int(n)
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly { (&self).$f(&rhs) }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly { (&self).$f(rhs) }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly { self.$f(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// Affine-linear combination of variables: `sum c_v * v + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearForm {
    pub coeffs: BTreeMap<Var, Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn zero() -> Self {
        LinearForm::default()
    }

    pub fn var(v: Var) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinearForm {
            coeffs,
            constant: Rational::zero(),
        }
    }

    /// Integer combination of variables, e.g. `combo(&[(Var::L, -1), (Var::D, -1)])`.
    pub fn combo(parts: &[(Var, i64)]) -> Self {
        let mut lf = LinearForm::zero();
        for (v, c) in parts {
            lf = lf + LinearForm::var(v.clone()).scale(&rat(*c));
        }
        lf
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = LinearForm {
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, k)| (v.clone(), k * c))
                .collect(),
            constant: &self.constant * c,
        };
        out.coeffs.retain(|_, k| !k.is_zero());
        out
    }

    pub fn to_poly(&self) -> Poly {
        let mut p = Poly::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            p.add_term(Monomial::var(v.clone()), c.clone());
        }
        p
    }
}

impl From<Var> for LinearForm {
    fn from(v: Var) -> Self {
        LinearForm::var(v)
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(mut self, rhs: LinearForm) -> LinearForm {
        for (v, c) in rhs.coeffs {
            *self.coeffs.entry(v).or_insert_with(Rational::zero) += c;
        }
        self.coeffs.retain(|_, k| !k.is_zero());
        self.constant += rhs.constant;
        self
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: LinearForm) -> LinearForm {
        self + (-rhs)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scale(&rat(-1))
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

/// A simultaneous substitution `v -> form` over translation and spectral
/// variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    binds: Vec<(Var, LinearForm)>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    pub fn bind(mut self, v: Var, form: impl Into<LinearForm>) -> Result<Self> {
        if v.is_param() {
            return Err(Error::ParamBinding(v.name().to_string()));
        }
        let form = form.into();
        match self.binds.iter_mut().find(|(w, _)| *w == v) {
            Some(slot) => slot.1 = form,
            None => self.binds.push((v, form)),
        }
        Ok(self)
    }

    /// Build from bindings that are known to target non-parameters.
    pub(crate) fn of<const N: usize>(pairs: [(Var, LinearForm); N]) -> Self {
        let mut s = Substitution::new();
        for (v, f) in pairs {
            s = s
                .bind(v, f)
                .expect("internal substitution binds a parameter");
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.binds.is_empty()
    }

    fn index_of(&self, v: &Var) -> Option<usize> {
        self.binds.iter().position(|(w, _)| w == v)
    }
}

/// Identifiers in scope while parsing.
#[derive(Clone, Debug, Default)]
pub struct Context {
    params: BTreeSet<String>,
    basis: BTreeSet<String>,
}

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn with_params<S: AsRef<str>>(params: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut ctx = Context::new();
        for p in params {
            ctx.declare_param(p.as_ref())?;
        }
        Ok(ctx)
    }

    pub fn declare_param(&mut self, name: &str) -> Result<()> {
        check_identifier(name)?;
        if Var::reserved(name).is_some() {
            return Err(Error::InvalidBasis(format!(
                "`{name}` is reserved and cannot be a parameter"
            )));
        }
        if self.basis.contains(name) {
            return Err(Error::InvalidBasis(format!(
                "`{name}` is declared as both basis element and parameter"
            )));
        }
        self.params.insert(name.to_string());
        Ok(())
    }

    pub fn declare_basis(&mut self, name: &str) -> Result<()> {
        check_identifier(name)?;
        if Var::reserved(name).is_some() || self.params.contains(name) {
            return Err(Error::InvalidBasis(format!(
                "basis name `{name}` collides with a variable"
            )));
        }
        self.basis.insert(name.to_string());
        Ok(())
    }

    pub fn params(&self) -> &BTreeSet<String> {
        &self.params
    }

    pub fn is_basis(&self, name: &str) -> bool {
        self.basis.contains(name)
    }
}

pub(crate) fn check_identifier(name: &str) -> Result<()> {
    let mut chars = name.chars();
    let ok = match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidBasis(format!(
            "`{name}` is not an identifier"
        )))
    }
}

pub fn parse_poly(text: &str, ctx: &Context) -> Result<Poly> {
    let v = parse_combination(text, ctx)?;
    if let Some(b) = v.elems.keys().next() {
        return Err(Error::parse(
            0,
            format!("basis element `{b}` in scalar position"),
        ));
    }
    Ok(v.scalar)
}

/// Result of parsing a sum that may mention basis symbols:
/// `scalar + sum_b elems[b] * b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Combination {
    pub scalar: Poly,
    pub elems: BTreeMap<String, Poly>,
}

impl Combination {
    fn scalar(p: Poly) -> Self {
        Combination {
            scalar: p,
            elems: BTreeMap::new(),
        }
    }

    fn is_scalar(&self) -> bool {
        self.elems.is_empty()
    }

    fn add(mut self, rhs: Combination, sign: i64) -> Combination {
        let s = rat(sign);
        self.scalar += &rhs.scalar.scale(&s);
        for (b, p) in rhs.elems {
            let e = self.elems.entry(b).or_default();
            *e += &p.scale(&s);
        }
        self.elems.retain(|_, p| !p.is_zero());
        self
    }

    fn mul(self, rhs: Combination, pos: usize) -> Result<Combination> {
        if !self.is_scalar() && !rhs.is_scalar() {
            return Err(Error::parse(pos, "product of two basis elements"));
        }
        let (s, other) = if self.is_scalar() {
            (self.scalar, rhs)
        } else {
            (rhs.scalar, self)
        };
        let mut out = Combination::scalar(&s * &other.scalar);
        for (b, p) in other.elems {
            let q = &s * &p;
            if !q.is_zero() {
                out.elems.insert(b, q);
            }
        }
        Ok(out)
    }
}

/// Parse an expression in which basis names declared in `ctx` may occur
/// linearly.
pub fn parse_combination(text: &str, ctx: &Context) -> Result<Combination> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        end: text.len(),
    };
    let v = p.expr()?;
    if let Some((tok, at)) = p.tokens.get(p.pos) {
        return Err(Error::parse(*at, format!("unexpected {tok}")));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "number `{n}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                out.push((Tok::Int(text[start..i].parse().unwrap()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::parse(
                    start,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push((tok, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    ctx: &'a Context,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, p)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Combination> {
        let mut acc = self.term()?;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => 1,
                Some(Tok::Minus) => -1,
                _ => return Ok(acc),
            };
            self.bump();
            let rhs = self.term()?;
            acc = acc.add(rhs, sign);
        }
    }

    fn term(&mut self) -> Result<Combination> {
        let mut acc = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let at = self.here();
            let rhs = self.factor()?;
            acc = acc.mul(rhs, at)?;
        }
        Ok(acc)
    }

    // Unary minus binds looser than `^`, so `-l^2` is `-(l^2)`.
    fn factor(&mut self) -> Result<Combination> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.factor()?;
            return Ok(Combination::default().add(inner, -1));
        }
        let at = self.here();
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let epos = self.here();
            let e = match self.bump() {
                Some(Tok::Int(n)) => n,
                Some(Tok::Minus) => {
                    return Err(Error::parse(epos, "negative exponent"));
                }
                _ => return Err(Error::parse(epos, "exponent must be a nonnegative integer")),
            };
            if let Some(Tok::Slash) = self.peek() {
                return Err(Error::parse(self.here(), "non-integer exponent"));
            }
            let e: u32 = u32::try_from(&e).map_err(|_| Error::parse(epos, "exponent too large"))?;
            if !base.is_scalar() {
                if e == 1 {
                    return Ok(base);
                }
                return Err(Error::parse(at, "power of a basis element"));
            }
            return Ok(Combination::scalar(base.scalar.pow(e)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Combination> {
        let at = self.here();
        match self.bump() {
            Some(Tok::Ident(name)) => {
                if let Some(v) = Var::reserved(&name) {
                    Ok(Combination::scalar(Poly::var(v)))
                } else if self.ctx.params.contains(&name) {
                    Ok(Combination::scalar(Poly::var(Var::param(&name))))
                } else if self.ctx.basis.contains(&name) {
                    let mut elems = BTreeMap::new();
                    elems.insert(name, Poly::one());
                    Ok(Combination {
                        scalar: Poly::zero(),
                        elems,
                    })
                } else {
                    Err(Error::parse(at, format!("undeclared identifier `{name}`")))
                }
            }
            Some(Tok::Int(n)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    let dpos = self.here();
                    match self.bump() {
                        Some(Tok::Int(d)) if !d.is_zero() => {
                            Ok(Combination::scalar(Poly::constant(BigRational::new(n, d))))
                        }
                        Some(Tok::Int(_)) => Err(Error::parse(dpos, "zero denominator")),
                        _ => Err(Error::parse(dpos, "expected denominator")),
                    }
                } else {
                    Ok(Combination::scalar(Poly::constant(
                        BigRational::from_integer(n),
                    )))
                }
            }
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(Error::parse(self.here().min(self.end), "expected `)`")),
                }
            }
            Some(tok) => Err(Error::parse(at, format!("unexpected {tok}"))),
            None => Err(Error::parse(self.end, "unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        parse_poly(s, &Context::with_params(["a", "b"]).unwrap()).unwrap()
    }

    #[test]
    fn parses_basic_expressions() {
        assert_eq!(p("d + 2*l"), &Poly::d() + &Poly::l().scale(&rat(2)));
        assert!(p("0").is_zero());
        let expect = &(&Poly::d() + &(&Poly::var(Var::param("a")) * &Poly::l()))
            + &Poly::var(Var::param("b"));
        assert_eq!(p("(d+a*l+b)"), expect);
        assert_eq!(p("1/2*l - -l"), Poly::l().scale(&ratio(3, 2)));
        assert_eq!(p("-l^2"), -Poly::l().pow(2));
    }

    #[test]
    fn parse_errors_report_position() {
        let ctx = Context::new();
        match parse_poly("d + q", &ctx) {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 4);
                assert!(msg.contains("undeclared"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_poly("l^-1", &ctx),
            Err(Error::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_poly("l^1/2", &ctx),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_poly("(d + l", &ctx),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_poly("d +", &ctx),
            Err(Error::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            parse_poly("d $ l", &ctx),
            Err(Error::Parse { pos: 2, .. })
        ));
    }

    #[test]
    fn basis_names_rejected_in_scalar_position() {
        let mut ctx = Context::new();
        ctx.declare_basis("L").unwrap();
        assert!(parse_poly("d*L", &ctx).is_err());
        let c = parse_combination("(d+2*l)*L + 3", &ctx).unwrap();
        assert_eq!(c.scalar, Poly::int(3));
        assert!(parse_combination("L*L", &ctx).is_err());
    }

    #[test]
    fn arithmetic_examples() {
        let a = p("d + 2*l");
        assert!((&a + &(-&a)).is_zero());
        let prod = &p("l - m") * &p("d + 2*l + 2*m");
        assert_eq!(prod, p("l*d + 2*l^2 - m*d - 2*m^2"));
        assert_eq!(Poly::d().pow(3), p("d^3"));
        assert_eq!(Poly::d().pow(0), Poly::one());
    }

    #[test]
    fn substitution_examples() {
        let s = Substitution::new()
            .bind(Var::L, LinearForm::combo(&[(Var::L, -1), (Var::D, -1)]))
            .unwrap();
        assert_eq!(p("d + 2*l").substitute(&s), p("-d - 2*l"));
        assert_eq!(p("d + 2*l").substitute(&Substitution::new()), p("d + 2*l"));
        let shift = Substitution::new()
            .bind(Var::D, LinearForm::combo(&[(Var::D, 1), (Var::M, 1)]))
            .unwrap();
        assert_eq!(p("d + 2*l").substitute(&shift), p("d + m + 2*l"));
        let swap = Substitution::new()
            .bind(Var::L, Var::M)
            .unwrap()
            .bind(Var::M, Var::L)
            .unwrap();
        assert_eq!(p("l + 2*m^2").substitute(&swap), p("m + 2*l^2"));
        assert!(matches!(
            Substitution::new().bind(Var::param("a"), Var::L),
            Err(Error::ParamBinding(_))
        ));
    }

    #[test]
    fn zero_test_is_polynomial_identity() {
        assert!(p("0").is_zero());
        assert!(!p("a*l").is_zero());
        let jac = &(&(&p("l + d + 2*m") * &p("d + 2*l")) - &(&p("l - m") * &p("d + 2*l + 2*m")))
            - &(&p("m + d + 2*l") * &p("d + 2*m"));
        assert!(jac.is_zero());
    }

    #[test]
    fn canonical_format() {
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(p("2*l + d").to_string(), "d + 2*l");
        assert_eq!(p("1 - l^2 + 1/2*d*l").to_string(), "1/2*d*l - l^2 + 1");
        assert_eq!(p("-1/3").to_string(), "-1/3");
        assert_eq!(p("a*l + d + b").to_string(), "l*a + d + b");
    }

    #[test]
    fn specialize_parameters() {
        let mut vals = BTreeMap::new();
        vals.insert("a".to_string(), rat(2));
        assert_eq!(p("a^2*l + b").specialize(&vals), p("4*l + b"));
    }
}
