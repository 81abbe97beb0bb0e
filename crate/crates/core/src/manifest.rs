//! TOML manifests for algebras, extending datums, flag datums, morphisms
//! and map tables. References to other objects are builtin names or paths
//! relative to the referring file; builtins win.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::conformal::{Basis, CMap, Chirality, ConformalAlgebra, ModElem, ScalarCMap};
use crate::corpus;
use crate::error::{Error, Result};
use crate::extend::{ExtendingDatum, MapKind, Morphism};
use crate::flag::{FlagDatum, FlagKind};
use crate::poly::{parse_poly, parse_rational, Context, Poly, Rational};

type Nested = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub algebra: AlgebraHeader,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bracket: Nested,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraHeader {
    pub name: String,
    pub basis: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
}

/// A builtin name, a path, or an inline manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref<T> {
    Name(String),
    Inline(Box<T>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSpec {
    Basis(Vec<String>),
    Algebra(Ref<AlgebraFile>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendFile {
    pub extend: ExtendHeader,
    /// `maps.<kind>.<first>.<second> = "<elem>"`
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub maps: BTreeMap<String, Nested>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendHeader {
    #[serde(rename = "R")]
    pub r: Ref<AlgebraFile>,
    /// A basis list, or an algebra whose bracket becomes `{x l y}`.
    #[serde(rename = "Q")]
    pub q: QSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KindSpec {
    Number(u8),
    Word(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagFile {
    pub flag: FlagHeader,
    #[serde(default)]
    pub maps: FlagMaps,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagHeader {
    #[serde(rename = "R")]
    pub r: Ref<AlgebraFile>,
    #[serde(default = "auto_kind")]
    pub kind: KindSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_name: Option<String>,
}

fn auto_kind() -> KindSpec {
    KindSpec::Word("auto".into())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagMaps {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub h: BTreeMap<String, String>,
    #[serde(default, rename = "D", skip_serializing_if = "BTreeMap::is_empty")]
    pub d: BTreeMap<String, String>,
    #[serde(default, rename = "T", skip_serializing_if = "BTreeMap::is_empty")]
    pub t: BTreeMap<String, String>,
    #[serde(default, rename = "Q0", skip_serializing_if = "Option::is_none")]
    pub q0: Option<String>,
    #[serde(default, rename = "P", skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismFile {
    pub morphism: MorphismHeader,
    #[serde(default)]
    pub u: BTreeMap<String, String>,
    #[serde(default)]
    pub v: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismHeader {
    /// The datum `Omega'` that is transported.
    pub datum: Ref<ExtendFile>,
}

/// A conformal map table, as printed by the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub map: MapHeader,
    #[serde(default)]
    pub table: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapHeader {
    pub algebra: Ref<AlgebraFile>,
    pub chirality: String,
}

/// Flag kind as requested in a manifest or on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindChoice {
    Fixed(FlagKind),
    Auto,
}

impl KindChoice {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "1" => Ok(KindChoice::Fixed(FlagKind::First)),
            "2" => Ok(KindChoice::Fixed(FlagKind::Second)),
            "auto" => Ok(KindChoice::Auto),
            other => Err(Error::Manifest(format!(
                "kind must be 1, 2 or auto, got `{other}`"
            ))),
        }
    }

    fn from_spec(k: &KindSpec) -> Result<Self> {
        match k {
            KindSpec::Number(n) => KindChoice::parse(&n.to_string()),
            KindSpec::Word(w) => KindChoice::parse(w),
        }
    }
}

fn toml_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Manifest(format!("{}: {e}", path.display()))
}

pub fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str, origin: &Path) -> Result<T> {
    toml::from_str(text).map_err(|e| toml_err(origin, e))
}

pub fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string(value).map_err(|e| Error::Manifest(e.to_string()))
}

/// Resolves references relative to a base directory.
#[derive(Clone, Debug)]
pub struct Loader {
    pub base: PathBuf,
}

impl Loader {
    pub fn new(base: impl Into<PathBuf>) -> Self {
        Loader { base: base.into() }
    }

    /// A loader rooted at the directory of `path`.
    pub fn beside(path: &Path) -> Self {
        Loader::new(path.parent().map(Path::to_path_buf).unwrap_or_default())
    }

    fn read(&self, name: &str) -> Result<(String, PathBuf)> {
        let path = self.base.join(name);
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        Ok((text, path))
    }

    pub fn algebra(&self, r: &Ref<AlgebraFile>) -> Result<ConformalAlgebra> {
        match r {
            Ref::Inline(f) => algebra_from_file(f),
            Ref::Name(n) => {
                if let Some(text) = corpus::builtin_text(n, corpus::Category::Algebra) {
                    return algebra_from_file(&parse_toml(text, Path::new(n))?);
                }
                let (text, path) = self.read(n)?;
                algebra_from_file(&parse_toml(&text, &path)?)
            }
        }
    }

    pub fn extend(&self, r: &Ref<ExtendFile>) -> Result<ExtendingDatum> {
        match r {
            Ref::Inline(f) => self.extend_from_file(f),
            Ref::Name(n) => {
                if let Some(text) = corpus::builtin_text(n, corpus::Category::Extend) {
                    return corpus::loader().extend_from_file(&parse_toml(text, Path::new(n))?);
                }
                let (text, path) = self.read(n)?;
                Loader::beside(&path).extend_from_file(&parse_toml(&text, &path)?)
            }
        }
    }

    pub fn flag(&self, r: &Ref<FlagFile>) -> Result<(FlagDatum, KindChoice)> {
        match r {
            Ref::Inline(f) => self.flag_from_file(f),
            Ref::Name(n) => {
                if let Some(text) = corpus::builtin_text(n, corpus::Category::Flag) {
                    return corpus::loader().flag_from_file(&parse_toml(text, Path::new(n))?);
                }
                let (text, path) = self.read(n)?;
                Loader::beside(&path).flag_from_file(&parse_toml(&text, &path)?)
            }
        }
    }

    pub fn morphism(&self, f: &MorphismFile) -> Result<(ExtendingDatum, Morphism)> {
        let datum = self.extend(&f.morphism.datum)?;
        let ctx = datum.r.context()?;
        let mut phi = Morphism::identity(&datum.q);
        for (x, e) in &f.u {
            phi.u.insert(x.clone(), ModElem::parse_in(e, &ctx)?);
        }
        let mut qctx = Context::with_params(&datum.r.params)?;
        for x in datum.q.iter() {
            qctx.declare_basis(x)?;
        }
        for (x, e) in &f.v {
            phi.v.insert(x.clone(), ModElem::parse_in(e, &qctx)?);
        }
        phi.check_shape(&datum.r.basis, &datum.q)?;
        Ok((datum, phi))
    }

    pub fn map(&self, f: &MapFile) -> Result<(ConformalAlgebra, CMap)> {
        let alg = self.algebra(&f.map.algebra)?;
        let ch = match f.map.chirality.as_str() {
            "left" => Chirality::Left,
            "right" => Chirality::Right,
            other => {
                return Err(Error::Manifest(format!(
                    "chirality must be left or right, got `{other}`"
                )))
            }
        };
        let ctx = alg.context()?;
        let mut map = CMap::zero(ch);
        for (a, e) in &f.table {
            if !alg.basis.contains(a) {
                return Err(Error::UnknownBasis(a.clone()));
            }
            map.set(a, ModElem::parse_in(e, &ctx)?);
        }
        Ok((alg, map))
    }

    pub fn extend_from_file(&self, f: &ExtendFile) -> Result<ExtendingDatum> {
        let mut r = self.algebra(&f.extend.r)?;
        add_params(&mut r, &f.extend.params);
        let (q, qbr) = match &f.extend.q {
            QSpec::Basis(names) => (Basis::new(names.iter().cloned())?, None),
            QSpec::Algebra(a) => {
                let qa = self.algebra(a)?;
                add_params(&mut r, &qa.params);
                (qa.basis.clone(), Some(qa.table))
            }
        };
        let mut datum = ExtendingDatum::new(r, q)?;
        if let Some(t) = qbr {
            for ((x, y), v) in t {
                datum.set(MapKind::Qbr, &x, &y, v)?;
            }
        }
        let mut ctx = datum.r.context()?;
        for x in datum.q.iter() {
            ctx.declare_basis(x)?;
        }
        for (kind, table) in &f.maps {
            let k = MapKind::from_name(kind)
                .ok_or_else(|| Error::Manifest(format!("unknown map `{kind}`")))?;
            for (a, row) in table {
                for (b, text) in row {
                    datum.set(k, a, b, ModElem::parse_in(text, &ctx)?)?;
                }
            }
        }
        Ok(datum)
    }

    pub fn flag_from_file(&self, f: &FlagFile) -> Result<(FlagDatum, KindChoice)> {
        let mut r = self.algebra(&f.flag.r)?;
        add_params(&mut r, &f.flag.params);
        let choice = KindChoice::from_spec(&f.flag.kind)?;
        let ctx = r.context()?;
        let pctx = Context::with_params(&r.params)?;
        let mut fd = FlagDatum::zero(r);
        if let Some(q) = &f.flag.q_name {
            fd.q_name = q.clone();
        }
        for (a, p) in &f.maps.h {
            fd.h.set(a, parse_poly(p, &pctx)?);
        }
        for (a, e) in &f.maps.d {
            fd.d.set(a, ModElem::parse_in(e, &ctx)?);
        }
        for (a, e) in &f.maps.t {
            fd.t.set(a, ModElem::parse_in(e, &ctx)?);
        }
        if let Some(q0) = &f.maps.q0 {
            fd.q0 = ModElem::parse_in(q0, &ctx)?;
        }
        if let Some(p) = &f.maps.p {
            fd.p = parse_poly(p, &pctx)?;
        }
        if let KindChoice::Fixed(k) = choice {
            fd.kind = k;
        }
        Ok((fd, choice))
    }
}

fn add_params(r: &mut ConformalAlgebra, extra: &[String]) {
    for p in extra {
        if !r.params.contains(p) {
            r.params.push(p.clone());
        }
    }
}

pub fn algebra_from_file(f: &AlgebraFile) -> Result<ConformalAlgebra> {
    let basis = Basis::new(f.algebra.basis.iter().cloned())?;
    let mut alg = ConformalAlgebra::new(&f.algebra.name, basis, f.algebra.params.clone());
    let ctx = alg.context()?;
    for (a, row) in &f.bracket {
        for (b, text) in row {
            let v = ModElem::parse_in(text, &ctx)?;
            alg.set(a, b, v)?;
        }
    }
    Ok(alg)
}

pub fn algebra_to_file(alg: &ConformalAlgebra) -> AlgebraFile {
    let mut bracket = Nested::new();
    for ((a, b), v) in &alg.table {
        bracket
            .entry(a.clone())
            .or_default()
            .insert(b.clone(), v.to_string());
    }
    AlgebraFile {
        algebra: AlgebraHeader {
            name: alg.name.clone(),
            basis: alg.basis.names().to_vec(),
            params: alg.params.clone(),
        },
        bracket,
    }
}

pub fn extend_to_file(d: &ExtendingDatum) -> ExtendFile {
    let mut maps = BTreeMap::new();
    for kind in MapKind::ALL {
        let mut t = Nested::new();
        for ((a, b), v) in d.table(kind) {
            if !v.is_zero() {
                t.entry(a.clone())
                    .or_default()
                    .insert(b.clone(), v.to_string());
            }
        }
        if !t.is_empty() {
            maps.insert(kind.name().to_string(), t);
        }
    }
    ExtendFile {
        extend: ExtendHeader {
            r: Ref::Inline(Box::new(algebra_to_file(&d.r))),
            q: QSpec::Basis(d.q.names().to_vec()),
            params: Vec::new(),
        },
        maps,
    }
}

pub fn flag_to_file(fd: &FlagDatum) -> FlagFile {
    let elems = |m: &CMap| {
        m.table
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect()
    };
    let scalars = |m: &ScalarCMap| {
        m.table
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect()
    };
    FlagFile {
        flag: FlagHeader {
            r: Ref::Inline(Box::new(algebra_to_file(&fd.r))),
            kind: KindSpec::Number(fd.kind.number()),
            params: Vec::new(),
            q_name: (fd.q_name != "x").then(|| fd.q_name.clone()),
        },
        maps: FlagMaps {
            h: scalars(&fd.h),
            d: elems(&fd.d),
            t: elems(&fd.t),
            q0: (!fd.q0.is_zero()).then(|| fd.q0.to_string()),
            p: (!fd.p.is_zero()).then(|| fd.p.to_string()),
        },
    }
}

pub fn map_to_file(alg: &ConformalAlgebra, map: &CMap) -> MapFile {
    MapFile {
        map: MapHeader {
            algebra: Ref::Inline(Box::new(algebra_to_file(alg))),
            chirality: match map.chirality {
                Chirality::Left => "left".into(),
                Chirality::Right => "right".into(),
            },
        },
        table: map
            .table
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect(),
    }
}

/// Parse `name=rational` parameter bindings.
pub fn parse_binding(text: &str) -> Result<(String, Rational)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Error::Manifest(format!("expected name=value, got `{text}`")))?;
    Ok((name.trim().to_string(), parse_rational(value.trim())?))
}

/// A constant or parameter scalar such as the `c` of an equivalence.
pub fn parse_scalar(text: &str, params: &[String]) -> Result<Poly> {
    parse_poly(text, &Context::with_params(params)?)
}
