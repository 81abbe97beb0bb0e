//! Builtin algebras, datums, flag datums and scenarios.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conformal::{
    check_leibniz, check_lie, check_skew, Basis, ConformalAlgebra, ModElem, PairTable,
};
use crate::error::{Error, Result};
use crate::extend::{
    build_unified, check_bicrossed, check_crossed, check_extending_structure, check_twisted,
    split_extending_datum, ExtendingDatum, MapKind,
};
use crate::flag::{self, FlagDatum, FlagKind};
use crate::manifest::{
    parse_scalar, parse_toml, AlgebraFile, ExtendFile, FlagFile, KindChoice, Loader, Ref,
};
use crate::poly::{parse_rational, Poly, Rational};
use crate::report::Report;
use crate::solver::{self, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Algebra,
    Extend,
    Flag,
    Scenario,
}

macro_rules! builtin {
    ($cat:ident, $name:literal, $path:literal) => {
        (
            $name,
            Category::$cat,
            include_str!(concat!("../corpus/", $path)),
        )
    };
}

static BUILTINS: &[(&str, Category, &str)] = &[
    builtin!(Algebra, "virasoro", "algebras/virasoro.toml"),
    builtin!(Algebra, "abelian-1", "algebras/abelian-1.toml"),
    builtin!(Algebra, "abelian-2", "algebras/abelian-2.toml"),
    builtin!(Algebra, "ex1-LW", "algebras/ex1-LW.toml"),
    builtin!(Extend, "semidirect-vir", "datums/semidirect-vir.toml"),
    builtin!(Extend, "crossed-ex1-vir", "datums/crossed-ex1-vir.toml"),
    builtin!(Extend, "bicrossed-ex1-b1", "datums/bicrossed-ex1-b1.toml"),
    builtin!(Flag, "a1", "flags/a1.toml"),
    builtin!(Flag, "a1-h", "flags/a1-h.toml"),
    builtin!(Flag, "a1-generic", "flags/a1-generic.toml"),
    builtin!(Flag, "b1", "flags/b1.toml"),
    builtin!(Flag, "b1-2", "flags/b1-2.toml"),
    builtin!(Flag, "crossed-ex1", "flags/crossed-ex1.toml"),
    builtin!(Flag, "crossed-ex1-bad", "flags/crossed-ex1-bad.toml"),
    builtin!(Scenario, "virasoro-lie", "scenarios/virasoro-lie.toml"),
    builtin!(Scenario, "abelian-2-lie", "scenarios/abelian-2-lie.toml"),
    builtin!(Scenario, "ex1-leibniz", "scenarios/ex1-leibniz.toml"),
    builtin!(Scenario, "ex1-skew", "scenarios/ex1-skew.toml"),
    builtin!(Scenario, "semidirect-vir", "scenarios/semidirect-vir.toml"),
    builtin!(
        Scenario,
        "crossed-ex1-vir",
        "scenarios/crossed-ex1-vir.toml"
    ),
    builtin!(
        Scenario,
        "bicrossed-ex1-b1",
        "scenarios/bicrossed-ex1-b1.toml"
    ),
    builtin!(
        Scenario,
        "round-trip-semidirect",
        "scenarios/round-trip-semidirect.toml"
    ),
    builtin!(
        Scenario,
        "round-trip-bicrossed",
        "scenarios/round-trip-bicrossed.toml"
    ),
    builtin!(Scenario, "a1-flag", "scenarios/a1-flag.toml"),
    builtin!(
        Scenario,
        "a1-generic-flag",
        "scenarios/a1-generic-flag.toml"
    ),
    builtin!(Scenario, "a1-equiv", "scenarios/a1-equiv.toml"),
    builtin!(Scenario, "b1-flag", "scenarios/b1-flag.toml"),
    builtin!(Scenario, "b1-fc2-leibniz", "scenarios/b1-fc2-leibniz.toml"),
    builtin!(Scenario, "b1-equiv", "scenarios/b1-equiv.toml"),
    builtin!(
        Scenario,
        "b1-equiv-wrong-c",
        "scenarios/b1-equiv-wrong-c.toml"
    ),
    builtin!(
        Scenario,
        "crossed-flag-ex1",
        "scenarios/crossed-flag-ex1.toml"
    ),
    builtin!(
        Scenario,
        "crossed-flag-ex1-fc",
        "scenarios/crossed-flag-ex1-fc.toml"
    ),
    builtin!(
        Scenario,
        "crossed-flag-ex1-bad",
        "scenarios/crossed-flag-ex1-bad.toml"
    ),
    builtin!(
        Scenario,
        "ex1-left-center",
        "scenarios/ex1-left-center.toml"
    ),
    builtin!(
        Scenario,
        "ex1-right-center",
        "scenarios/ex1-right-center.toml"
    ),
    builtin!(Scenario, "ex1-outer", "scenarios/ex1-outer.toml"),
    builtin!(Scenario, "ex1-anti-outer", "scenarios/ex1-anti-outer.toml"),
    builtin!(
        Scenario,
        "virasoro-left-center",
        "scenarios/virasoro-left-center.toml"
    ),
    builtin!(Scenario, "virasoro-outer", "scenarios/virasoro-outer.toml"),
    builtin!(
        Scenario,
        "abelian-1-outer",
        "scenarios/abelian-1-outer.toml"
    ),
    builtin!(
        Scenario,
        "virasoro-twisted",
        "scenarios/virasoro-twisted.toml"
    ),
];

pub fn builtin_text(name: &str, cat: Category) -> Option<&'static str> {
    BUILTINS
        .iter()
        .find(|(n, c, _)| *n == name && *c == cat)
        .map(|(_, _, t)| *t)
}

pub fn names(cat: Category) -> Vec<&'static str> {
    BUILTINS
        .iter()
        .filter(|(_, c, _)| *c == cat)
        .map(|(n, _, _)| *n)
        .collect()
}

/// Loader for references inside builtin manifests.
pub fn loader() -> Loader {
    Loader::new(".")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    Algebra(ConformalAlgebra),
    Extend(ExtendingDatum),
    Flag(FlagDatum),
}

pub fn load_builtin(name: &str) -> Result<Builtin> {
    if builtin_text(name, Category::Algebra).is_some() {
        return load_algebra(name).map(Builtin::Algebra);
    }
    if builtin_text(name, Category::Extend).is_some() {
        return load_extend(name).map(Builtin::Extend);
    }
    if builtin_text(name, Category::Flag).is_some() {
        return load_flag(name).map(Builtin::Flag);
    }
    Err(Error::UnknownBuiltin(name.to_string()))
}

fn builtin_or_err(name: &str, cat: Category) -> Result<&'static str> {
    builtin_text(name, cat).ok_or_else(|| Error::UnknownBuiltin(name.to_string()))
}

pub fn load_algebra(name: &str) -> Result<ConformalAlgebra> {
    builtin_or_err(name, Category::Algebra)?;
    loader().algebra(&Ref::Name(name.to_string()))
}

pub fn load_extend(name: &str) -> Result<ExtendingDatum> {
    builtin_or_err(name, Category::Extend)?;
    loader().extend(&Ref::Name(name.to_string()))
}

pub fn load_flag(name: &str) -> Result<FlagDatum> {
    builtin_or_err(name, Category::Flag)?;
    let (fd, _) = loader().flag(&Ref::Name(name.to_string()))?;
    Ok(fd)
}

fn builtin_algebra(name: &str) -> ConformalAlgebra {
    load_algebra(name).expect("builtin manifests parse")
}

/// `[x l x] = (d + 2l) x`
pub fn virasoro() -> ConformalAlgebra {
    builtin_algebra("virasoro")
}

/// `[L l L] = (d + 2l) L`, `[L l W] = (d + 2l) W`, `[W l L] = [W l W] = 0`
pub fn ex1_lw() -> ConformalAlgebra {
    builtin_algebra("ex1-LW")
}

/// Zero bracket on `e1, ..., en`.
pub fn abelian(n: usize) -> ConformalAlgebra {
    let names: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let mut a = abelian_named(&names);
    a.name = format!("abelian-{n}");
    a
}

pub fn abelian_named<S: AsRef<str>>(names: &[S]) -> ConformalAlgebra {
    let basis = Basis::new(names.iter().map(|s| s.as_ref().to_string())).expect("valid names");
    ConformalAlgebra::new("abelian", basis, Vec::new())
}

/// First kind, `h(L) = d + l + 1`, `D(L) = (1 - l) W`.
pub fn a1_flag() -> FlagDatum {
    load_flag("a1").expect("builtin manifests parse")
}

/// Second kind, `h(L) = d + l`, `T(L) = k2 W`, `T(W) = k1 W`.
pub fn b1_flag(k1: &Poly, k2: &Poly) -> FlagDatum {
    let mut fd = FlagDatum::zero(ex1_lw());
    for p in k1.params().into_iter().chain(k2.params()) {
        if !fd.r.params.contains(&p) {
            fd.r.params.push(p);
        }
    }
    fd.kind = FlagKind::Second;
    fd.h.set("L", &Poly::d() + &Poly::l());
    fd.t.set("L", ModElem::term(k2.clone(), "W"));
    fd.t.set("W", ModElem::term(k1.clone(), "W"));
    fd
}

/// `(0, 0, 0, 0, P)` over ex1-LW.
pub fn crossed_flag(p: Poly) -> FlagDatum {
    let mut fd = FlagDatum::zero(ex1_lw());
    fd.p = p;
    fd
}

// ---------------------------------------------------------------------------
// Scenarios

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scenario: ScenarioHeader,
    pub expect: Expect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioHeader {
    pub name: String,
    pub check: String,
    pub target: toml::Value,
    #[serde(default)]
    pub other: Option<toml::Value>,
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub side: Option<String>,
    #[serde(default)]
    pub max_deg: Option<u32>,
    #[serde(default)]
    pub u0: Option<String>,
    #[serde(default)]
    pub c: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// "published", "derived" or "trivial"
    pub provenance: String,
    #[serde(default)]
    pub verdict: Option<String>,
    #[serde(default)]
    pub failing: Option<Vec<String>>,
    #[serde(default)]
    pub first: Option<ExpectItem>,
    #[serde(default)]
    pub dimension: Option<usize>,
    #[serde(default)]
    pub basis: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectItem {
    pub condition: String,
    pub args: Vec<String>,
    pub residual: String,
}

/// What a scenario run produced.
#[derive(Clone, Debug)]
pub enum Observed {
    Report(Report),
    Dimension {
        dimension: usize,
        basis: Vec<String>,
    },
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub observed: Observed,
    pub mismatches: Vec<String>,
}

impl Outcome {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let s: Scenario = parse_toml(text, origin)?;
    if !["published", "derived", "trivial"].contains(&s.expect.provenance.as_str()) {
        return Err(Error::Manifest(format!(
            "{}: provenance must be published, derived or trivial",
            s.scenario.name
        )));
    }
    Ok(s)
}

pub fn builtin_scenarios() -> Result<Vec<Scenario>> {
    names(Category::Scenario)
        .into_iter()
        .map(|n| parse_scenario(builtin_or_err(n, Category::Scenario)?, Path::new(n)))
        .collect()
}

fn value_ref<T: for<'de> Deserialize<'de>>(v: &toml::Value) -> Result<Ref<T>> {
    match v {
        toml::Value::String(s) => Ok(Ref::Name(s.clone())),
        other => other
            .clone()
            .try_into::<T>()
            .map(|t| Ref::Inline(Box::new(t)))
            .map_err(|e| Error::Manifest(e.to_string())),
    }
}

fn bindings(h: &ScenarioHeader) -> Result<BTreeMap<String, Rational>> {
    h.params
        .iter()
        .map(|(k, v)| Ok((k.clone(), parse_rational(v)?)))
        .collect()
}

fn field<'a, T>(v: &'a Option<T>, what: &str, name: &str) -> Result<&'a T> {
    v.as_ref()
        .ok_or_else(|| Error::Manifest(format!("scenario {name} needs `{what}`")))
}

/// Resolve `auto` by trying the first kind, then the second.
pub fn resolve_kind(fd: FlagDatum, choice: KindChoice) -> Result<FlagDatum> {
    match choice {
        KindChoice::Fixed(k) => Ok(FlagDatum { kind: k, ..fd }),
        KindChoice::Auto => flag::resolve_auto(fd),
    }
}

/// Run one scenario. References resolve through `loader`.
pub fn run_scenario(s: &Scenario, loader: &Loader) -> Result<Outcome> {
    let h = &s.scenario;
    let name = h.name.as_str();
    let vals = bindings(h)?;
    let algebra = |v: &toml::Value| -> Result<ConformalAlgebra> {
        Ok(loader
            .algebra(&value_ref::<AlgebraFile>(v)?)?
            .specialize(&vals))
    };
    let extend = |v: &toml::Value| -> Result<ExtendingDatum> {
        Ok(loader
            .extend(&value_ref::<ExtendFile>(v)?)?
            .specialize(&vals))
    };
    let flagd = |v: &toml::Value| -> Result<FlagDatum> {
        let (fd, choice) = loader.flag(&value_ref::<FlagFile>(v)?)?;
        let choice = match &h.kind {
            Some(k) => KindChoice::parse(k)?,
            None => choice,
        };
        resolve_kind(fd.specialize(&vals), choice)
    };
    let max_deg = h.max_deg.unwrap_or(3);
    let observed = match h.check.as_str() {
        "algebra" => {
            let a = algebra(&h.target)?;
            Observed::Report(match h.mode.as_deref().unwrap_or("leibniz") {
                "leibniz" => check_leibniz(&a),
                "lie" => check_lie(&a),
                "skew" => check_skew(&a),
                m => return Err(Error::Manifest(format!("unknown mode `{m}`"))),
            })
        }
        "extend" => Observed::Report(check_extending_structure(&extend(&h.target)?)),
        "unified-leibniz" => Observed::Report(check_leibniz(&build_unified(&extend(&h.target)?)?)),
        "twisted" => {
            let d = extend(&h.target)?;
            Observed::Report(check_twisted_datum(&d)?)
        }
        "crossed" => Observed::Report(check_crossed(&extend(&h.target)?)?),
        "bicrossed" => Observed::Report(check_bicrossed(&extend(&h.target)?)?),
        "round-trip" => Observed::Report(round_trip_report(&extend(&h.target)?)?),
        "flag" => Observed::Report(flag::check_flag(&flagd(&h.target)?)?),
        "fc-leibniz" => Observed::Report(check_leibniz(&flag::build_fc(&flagd(&h.target)?)?)),
        "crossed-flag" => Observed::Report(flag::check_crossed_flag(&flagd(&h.target)?)?),
        "equiv-flag" => {
            let a = flagd(&h.target)?;
            let b = flagd(field(&h.other, "other", name)?)?;
            let u0 = a.r.parse_elem(h.u0.as_deref().unwrap_or("0"))?;
            let c = parse_scalar(h.c.as_deref().unwrap_or("1"), &a.r.params)?;
            Observed::Report(flag::flag_equiv(&a, &b, &u0, &c)?)
        }
        "center" => {
            let a = algebra(&h.target)?;
            let side = match field(&h.side, "side", name)?.as_str() {
                "left" => Side::Left,
                "right" => Side::Right,
                other => return Err(Error::Manifest(format!("unknown side `{other}`"))),
            };
            let sp = solver::center_basis(&a, side, max_deg)?;
            Observed::Dimension {
                dimension: sp.dimension(),
                basis: sp.basis.iter().map(ToString::to_string).collect(),
            }
        }
        "derivations" | "anti-derivations" => {
            let a = algebra(&h.target)?;
            let sp = if h.check == "derivations" {
                solver::derivations_basis(&a, max_deg)?
            } else {
                solver::anti_derivations_basis(&a, max_deg)?
            };
            Observed::Dimension {
                dimension: sp.dimension(),
                basis: Vec::new(),
            }
        }
        "outer" | "anti-outer" => {
            let a = algebra(&h.target)?;
            Observed::Dimension {
                dimension: solver::outer_dimension(&a, max_deg, h.check == "anti-outer")?,
                basis: Vec::new(),
            }
        }
        "twisted-solve" => {
            let r = algebra(&h.target)?;
            let q = algebra(field(&h.other, "other", name)?)?;
            let sp = solver::twisted_cocycles(&r, &q, max_deg, false)?;
            Observed::Dimension {
                dimension: sp.dimension(),
                basis: Vec::new(),
            }
        }
        other => return Err(Error::Manifest(format!("unknown check `{other}`"))),
    };
    let mismatches = compare(&s.expect, &observed);
    Ok(Outcome {
        name: name.to_string(),
        observed,
        mismatches,
    })
}

/// (ts1)-(ts2) for a datum whose only nonzero maps are `f` and `{x y}`.
pub fn check_twisted_datum(d: &ExtendingDatum) -> Result<Report> {
    for k in [
        MapKind::Lharpoon,
        MapKind::Rharpoon,
        MapKind::Ltri,
        MapKind::Rtri,
    ] {
        if !d.is_zero_map(k) {
            return Err(Error::Shape(format!(
                "a twisted product needs {} = 0",
                k.name()
            )));
        }
    }
    let f: PairTable = d.table(MapKind::F).clone();
    check_twisted(&d.r, &d.q_algebra(), &f)
}

/// Items `table` and `datum` compare build/split round trips.
pub fn round_trip_report(d: &ExtendingDatum) -> Result<Report> {
    let mut rep = Report::new("round-trip");
    let e = build_unified(d)?;
    let names: Vec<&str> = d.r.basis.iter().collect();
    let back = split_extending_datum(&e, &names)?;
    let e2 = build_unified(&back)?;
    for a in e.basis.iter() {
        for b in e.basis.iter() {
            rep.push_elem("table", &[a, b], &e.entry(a, b) - &e2.entry(a, b));
        }
    }
    for kind in MapKind::ALL {
        let keys: std::collections::BTreeSet<_> = d
            .table(kind)
            .keys()
            .chain(back.table(kind).keys())
            .cloned()
            .collect();
        for (a, b) in keys {
            let r = &d.get(kind, &a, &b) - &back.get(kind, &a, &b);
            rep.push_elem("datum", &[kind.name(), &a, &b], r);
        }
    }
    if back.r.basis != d.r.basis || back.q != d.q {
        return Err(Error::Manifest("split changed the bases".into()));
    }
    for a in d.r.basis.iter() {
        for b in d.r.basis.iter() {
            let r = &d.r.entry(a, b) - &back.r.entry(a, b);
            rep.push_elem("datum", &["R", a, b], r);
        }
    }
    Ok(rep)
}

fn compare(expect: &Expect, observed: &Observed) -> Vec<String> {
    let mut out = Vec::new();
    match observed {
        Observed::Report(rep) => {
            if let Some(v) = &expect.verdict {
                if v != rep.verdict() {
                    out.push(format!("verdict {} (expected {v})", rep.verdict()));
                }
            }
            if let Some(f) = &expect.failing {
                let got = rep.failing_conditions();
                if &got != f {
                    out.push(format!("failing {got:?} (expected {f:?})"));
                }
            }
            if let Some(first) = &expect.first {
                match rep.first_failure() {
                    None => out.push("no failing item".into()),
                    Some(item) => {
                        let got = (
                            item.condition.clone(),
                            item.args.clone(),
                            item.residual.to_string(),
                        );
                        let want = (
                            first.condition.clone(),
                            first.args.clone(),
                            first.residual.clone(),
                        );
                        if got != want {
                            out.push(format!("first failure {got:?} (expected {want:?})"));
                        }
                    }
                }
            }
            if expect.dimension.is_some() || expect.basis.is_some() {
                out.push("dimension expected from a checker scenario".into());
            }
        }
        Observed::Dimension { dimension, basis } => {
            if let Some(d) = expect.dimension {
                if d != *dimension {
                    out.push(format!("dimension {dimension} (expected {d})"));
                }
            }
            if let Some(b) = &expect.basis {
                if b != basis {
                    out.push(format!("basis {basis:?} (expected {b:?})"));
                }
            }
            if expect.verdict.is_some() || expect.failing.is_some() || expect.first.is_some() {
                out.push("verdict expected from a solver scenario".into());
            }
        }
    }
    out
}

/// Run every builtin scenario.
pub fn run_builtin_scenarios() -> Result<Vec<Outcome>> {
    builtin_scenarios()?
        .iter()
        .map(|s| run_scenario(s, &loader()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        for cat in [Category::Algebra, Category::Extend, Category::Flag] {
            for n in names(cat) {
                load_builtin(n).unwrap_or_else(|e| panic!("{n}: {e}"));
            }
        }
        assert!(matches!(
            load_builtin("nope"),
            Err(Error::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn generated_abelian_matches_manifests() {
        assert_eq!(abelian(1), load_algebra("abelian-1").unwrap());
        assert_eq!(abelian(2), load_algebra("abelian-2").unwrap());
    }

    #[test]
    fn b1_constructor_matches_manifest() {
        let fd = load_flag("b1").unwrap();
        let k1 = Poly::var(crate::poly::Var::param("k1"));
        let k2 = Poly::var(crate::poly::Var::param("k2"));
        assert_eq!(b1_flag(&k1, &k2), fd);
    }

    #[test]
    fn every_scenario_holds() {
        for o in run_builtin_scenarios().unwrap() {
            assert!(o.ok(), "{}: {:?}", o.name, o.mismatches);
        }
    }

    #[test]
    fn scenario_files_are_registered() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus/scenarios");
        let mut on_disk: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .collect();
        on_disk.sort();
        let mut registered: Vec<String> = names(Category::Scenario)
            .into_iter()
            .map(String::from)
            .collect();
        registered.sort();
        assert_eq!(on_disk, registered);
    }
}
