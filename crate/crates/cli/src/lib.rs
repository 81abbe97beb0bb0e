//! Command-line front end for the lcalg engine.

pub mod json;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use lcalg::conformal::{
    check_anti_derivation, check_derivation, check_leibniz, check_lie, check_skew,
};
use lcalg::corpus::{self, Category};
use lcalg::extend::{self, ExtendingDatum};
use lcalg::flag::{self, FlagDatum};
use lcalg::manifest::{self, KindChoice, Loader, MapFile, MorphismFile, Ref};
use lcalg::solver::{self, Side};
use lcalg::{ConformalAlgebra, Error, Rational, Report};

use json::{JsonItem, JsonReport, Verdict};

#[derive(Parser, Debug)]
#[command(
    name = "lcalg",
    version,
    about = "Exact lambda-bracket checks, constructions and solvers"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Emit a machine-readable report.
    #[arg(long, global = true)]
    json: bool,
    /// Specialize a parameter, e.g. `--param k1=1/2`.
    #[arg(long = "param", global = true, value_name = "NAME=RATIONAL")]
    params: Vec<String>,
    /// Write the produced manifest (or solution basis) here.
    #[arg(short = 'o', global = true, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Verify axioms or condition lists.
    #[command(subcommand)]
    Check(CheckCmd),
    /// Build an algebra from a datum.
    #[command(subcommand)]
    Build(BuildCmd),
    /// Split an algebra along a subalgebra spanned by some basis names.
    Split {
        algebra: String,
        #[arg(required = true)]
        r_names: Vec<String>,
    },
    /// Transport a datum: a morphism manifest, or a flag with `--u0` and `--c`.
    Transport {
        target: String,
        #[command(flatten)]
        eq: EquivArgs,
    },
    /// Equivalence checks.
    #[command(subcommand)]
    Equiv(EquivCmd),
    /// Bounded-degree linear solvers.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Built-in scenarios.
    #[command(subcommand)]
    Corpus(CorpusCmd),
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").args(["lie", "leibniz", "skew"])))]
struct ModeArgs {
    /// Jacobi identity and skew-symmetry.
    #[arg(long)]
    lie: bool,
    /// Jacobi identity only (default).
    #[arg(long)]
    leibniz: bool,
    /// Skew-symmetry only.
    #[arg(long)]
    skew: bool,
}

#[derive(Args, Debug)]
struct KindArg {
    /// Flag kind: 1, 2 or auto. Overrides the manifest.
    #[arg(long)]
    kind: Option<String>,
}

#[derive(Args, Debug)]
struct EquivArgs {
    /// The element `u0` of `R`.
    #[arg(long, allow_hyphen_values = true)]
    u0: Option<String>,
    /// The nonzero scalar `c`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
}

#[derive(Subcommand, Debug)]
enum CheckCmd {
    Algebra {
        target: String,
        #[command(flatten)]
        mode: ModeArgs,
    },
    Extend {
        target: String,
    },
    Flag {
        target: String,
        #[command(flatten)]
        kind: KindArg,
    },
    Twisted {
        target: String,
    },
    /// Crossed product of an extending datum, or crossed flag datum.
    Crossed {
        target: String,
    },
    Bicrossed {
        target: String,
    },
    /// A conformal map manifest as a derivation or anti-derivation.
    Map {
        target: String,
        #[arg(long)]
        anti: bool,
    },
}

#[derive(Subcommand, Debug)]
enum BuildCmd {
    Unified {
        target: String,
    },
    Fc {
        target: String,
        #[command(flatten)]
        kind: KindArg,
    },
}

#[derive(Subcommand, Debug)]
enum EquivCmd {
    Flag {
        fd: String,
        fd_prime: String,
        #[command(flatten)]
        eq: EquivArgs,
        /// Fix `c = 1`.
        #[arg(long)]
        cohomologous: bool,
        #[command(flatten)]
        kind: KindArg,
    },
}

#[derive(Args, Debug)]
struct DegArg {
    #[arg(long = "max-deg", default_value_t = 3)]
    max_deg: u32,
}

#[derive(Subcommand, Debug)]
enum SolveCmd {
    Derivations {
        target: String,
        #[command(flatten)]
        deg: DegArg,
    },
    AntiDerivations {
        target: String,
        #[command(flatten)]
        deg: DegArg,
    },
    Center {
        target: String,
        #[arg(long, value_parser = ["left", "right"])]
        side: String,
        #[command(flatten)]
        deg: DegArg,
    },
    Outer {
        target: String,
        /// Anti-derivations modulo inner ones.
        #[arg(long)]
        anti: bool,
        #[command(flatten)]
        deg: DegArg,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusCmd {
    /// Run every built-in scenario, or one by name or path.
    Run { name: Option<String> },
}

/// What a target resolves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Algebra,
    Extend,
    Flag,
    Morphism,
    Map,
    Scenario,
}

/// Result of a command before rendering.
struct Outcome {
    json: JsonReport,
    text: String,
}

impl Outcome {
    fn pass(&self) -> bool {
        self.json.verdict == Verdict::Pass
    }
}

struct Ctx {
    loader: Loader,
    params: BTreeMap<String, Rational>,
    output: Option<PathBuf>,
}

fn read_file(path: &str) -> lcalg::Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Manifest(format!("{path}: {e}")))
}

fn kind_of(target: &str) -> lcalg::Result<Kind> {
    for (cat, kind) in [
        (Category::Algebra, Kind::Algebra),
        (Category::Extend, Kind::Extend),
        (Category::Flag, Kind::Flag),
        (Category::Scenario, Kind::Scenario),
    ] {
        if corpus::builtin_text(target, cat).is_some() {
            return Ok(kind);
        }
    }
    let text = read_file(target)?;
    let table: toml::Table = manifest::parse_toml(&text, Path::new(target))?;
    for (key, kind) in [
        ("map", Kind::Map),
        ("algebra", Kind::Algebra),
        ("extend", Kind::Extend),
        ("flag", Kind::Flag),
        ("morphism", Kind::Morphism),
        ("scenario", Kind::Scenario),
    ] {
        if table.contains_key(key) {
            return Ok(kind);
        }
    }
    Err(Error::Manifest(format!("{target}: unrecognized manifest")))
}

fn expect_kind(target: &str, want: &[Kind]) -> lcalg::Result<Kind> {
    let k = kind_of(target)?;
    if want.contains(&k) {
        Ok(k)
    } else {
        Err(Error::Manifest(format!(
            "{target}: expected {want:?} manifest, found {k:?}"
        )))
    }
}

impl Ctx {
    fn algebra(&self, target: &str) -> lcalg::Result<ConformalAlgebra> {
        expect_kind(target, &[Kind::Algebra])?;
        let a = self.loader.algebra(&Ref::Name(target.to_string()))?;
        Ok(a.specialize(&self.params))
    }

    fn extend(&self, target: &str) -> lcalg::Result<ExtendingDatum> {
        expect_kind(target, &[Kind::Extend])?;
        let d = self.loader.extend(&Ref::Name(target.to_string()))?;
        Ok(d.specialize(&self.params))
    }

    fn flag(&self, target: &str, kind: &KindArg) -> lcalg::Result<FlagDatum> {
        expect_kind(target, &[Kind::Flag])?;
        let (fd, choice) = self.loader.flag(&Ref::Name(target.to_string()))?;
        let choice = match &kind.kind {
            Some(k) => KindChoice::parse(k)?,
            None => choice,
        };
        corpus::resolve_kind(fd.specialize(&self.params), choice)
    }

    fn morphism(&self, target: &str) -> lcalg::Result<(ExtendingDatum, extend::Morphism)> {
        let text = read_file(target)?;
        let f: MorphismFile = manifest::parse_toml(&text, Path::new(target))?;
        let (d, mut phi) = Loader::beside(Path::new(target)).morphism(&f)?;
        for e in phi.u.values_mut().chain(phi.v.values_mut()) {
            *e = e.specialize(&self.params);
        }
        Ok((d.specialize(&self.params), phi))
    }

    /// Write `text` to `-o` if given; otherwise it becomes the human output.
    fn emit(&self, text: String, out: &mut Outcome) -> lcalg::Result<()> {
        match &self.output {
            Some(p) => {
                fs::write(p, &text)
                    .map_err(|e| Error::Manifest(format!("{}: {e}", p.display())))?;
                writeln!(out.text, "wrote {}", p.display()).unwrap();
            }
            None => out.text.push_str(&text),
        }
        out.json.manifest = Some(text);
        Ok(())
    }
}

fn render_report(rep: &Report) -> String {
    let mut s = rep.to_string();
    for item in rep.failures().skip(1) {
        writeln!(
            s,
            "also failing: {} ({}) residual: {}",
            item.condition,
            item.args.join(","),
            item.residual
        )
        .unwrap();
    }
    s
}

fn report_outcome(command: &str, inputs: &[String], rep: &Report) -> Outcome {
    Outcome {
        json: JsonReport::from_report(command, inputs, rep),
        text: render_report(rep),
    }
}

fn built(command: &str, inputs: &[String]) -> Outcome {
    Outcome {
        json: JsonReport::new(command, inputs),
        text: String::new(),
    }
}

fn toml_text<T: serde::Serialize>(v: &T) -> lcalg::Result<String> {
    manifest::to_toml(v)
}

fn scalar(text: Option<&str>, default: &str, params: &[String]) -> lcalg::Result<lcalg::Poly> {
    manifest::parse_scalar(text.unwrap_or(default), params)
}

fn dispatch(cli: &Cli, ctx: &Ctx) -> lcalg::Result<Outcome> {
    let s = |t: &str| vec![t.to_string()];
    match &cli.cmd {
        Cmd::Check(c) => match c {
            CheckCmd::Algebra { target, mode } => {
                let a = ctx.algebra(target)?;
                let rep = if mode.lie {
                    check_lie(&a)
                } else if mode.skew {
                    check_skew(&a)
                } else {
                    check_leibniz(&a)
                };
                Ok(report_outcome("check algebra", &s(target), &rep))
            }
            CheckCmd::Extend { target } => {
                let rep = extend::check_extending_structure(&ctx.extend(target)?);
                Ok(report_outcome("check extend", &s(target), &rep))
            }
            CheckCmd::Flag { target, kind } => {
                let rep = flag::check_flag(&ctx.flag(target, kind)?)?;
                Ok(report_outcome("check flag", &s(target), &rep))
            }
            CheckCmd::Twisted { target } => {
                let rep = corpus::check_twisted_datum(&ctx.extend(target)?)?;
                Ok(report_outcome("check twisted", &s(target), &rep))
            }
            CheckCmd::Crossed { target } => {
                let rep = match expect_kind(target, &[Kind::Extend, Kind::Flag])? {
                    Kind::Flag => {
                        let fd = ctx.flag(
                            target,
                            &KindArg {
                                kind: Some("1".into()),
                            },
                        )?;
                        flag::check_crossed_flag(&fd)?
                    }
                    _ => extend::check_crossed(&ctx.extend(target)?)?,
                };
                Ok(report_outcome("check crossed", &s(target), &rep))
            }
            CheckCmd::Bicrossed { target } => {
                let rep = extend::check_bicrossed(&ctx.extend(target)?)?;
                Ok(report_outcome("check bicrossed", &s(target), &rep))
            }
            CheckCmd::Map { target, anti } => {
                let text = read_file(target)?;
                let f: MapFile = manifest::parse_toml(&text, Path::new(target))?;
                let (alg, map) = Loader::beside(Path::new(target)).map(&f)?;
                let (alg, map) = (alg.specialize(&ctx.params), map.specialize(&ctx.params));
                let rep = if *anti {
                    check_anti_derivation(&alg, &map)
                } else {
                    check_derivation(&alg, &map)
                };
                Ok(report_outcome("check map", &s(target), &rep))
            }
        },
        Cmd::Build(b) => match b {
            BuildCmd::Unified { target } => {
                let e = extend::build_unified(&ctx.extend(target)?)?;
                let mut out = built("build unified", &s(target));
                ctx.emit(toml_text(&manifest::algebra_to_file(&e))?, &mut out)?;
                Ok(out)
            }
            BuildCmd::Fc { target, kind } => {
                let e = flag::build_fc(&ctx.flag(target, kind)?)?;
                let mut out = built("build fc", &s(target));
                ctx.emit(toml_text(&manifest::algebra_to_file(&e))?, &mut out)?;
                Ok(out)
            }
        },
        Cmd::Split { algebra, r_names } => {
            let e = ctx.algebra(algebra)?;
            let names: Vec<&str> = r_names.iter().map(String::as_str).collect();
            let d = extend::split_extending_datum(&e, &names)?;
            let mut inputs = s(algebra);
            inputs.extend(r_names.iter().cloned());
            let mut out = built("split", &inputs);
            ctx.emit(toml_text(&manifest::extend_to_file(&d))?, &mut out)?;
            Ok(out)
        }
        Cmd::Transport { target, eq } => {
            let mut out = built("transport", &s(target));
            match expect_kind(target, &[Kind::Morphism, Kind::Flag])? {
                Kind::Flag => {
                    let fd = ctx.flag(target, &KindArg { kind: None })?;
                    let u0 = fd.r.parse_elem(eq.u0.as_deref().unwrap_or("0"))?;
                    let c = scalar(eq.c.as_deref(), "1", &fd.r.params)?;
                    let t = flag::transport_flag(&fd, &u0, &c)?;
                    ctx.emit(toml_text(&manifest::flag_to_file(&t))?, &mut out)?;
                }
                _ => {
                    if eq.u0.is_some() || eq.c.is_some() {
                        return Err(Error::Manifest(
                            "--u0 and --c apply to flag datums only".into(),
                        ));
                    }
                    let (d, phi) = ctx.morphism(target)?;
                    let t = extend::transport(&d, &phi)?;
                    ctx.emit(toml_text(&manifest::extend_to_file(&t))?, &mut out)?;
                }
            }
            Ok(out)
        }
        Cmd::Equiv(EquivCmd::Flag {
            fd,
            fd_prime,
            eq,
            cohomologous,
            kind,
        }) => {
            let a = ctx.flag(fd, kind)?;
            let b = ctx.flag(fd_prime, kind)?;
            let u0 = a.r.parse_elem(eq.u0.as_deref().unwrap_or("0"))?;
            let c = scalar(eq.c.as_deref(), "1", &a.r.params)?;
            if *cohomologous && c != lcalg::Poly::one() {
                return Err(Error::Manifest("--cohomologous fixes c = 1".into()));
            }
            let rep = flag::flag_equiv(&a, &b, &u0, &c)?;
            Ok(report_outcome(
                "equiv flag",
                &[fd.clone(), fd_prime.clone()],
                &rep,
            ))
        }
        Cmd::Solve(sv) => solve(sv, ctx),
        Cmd::Corpus(CorpusCmd::Run { name }) => corpus_run(name.as_deref()),
    }
}

fn solve(sv: &SolveCmd, ctx: &Ctx) -> lcalg::Result<Outcome> {
    let (command, target, dmax) = match sv {
        SolveCmd::Derivations { target, deg } => ("solve derivations", target, deg.max_deg),
        SolveCmd::AntiDerivations { target, deg } => {
            ("solve anti-derivations", target, deg.max_deg)
        }
        SolveCmd::Center { target, deg, .. } => ("solve center", target, deg.max_deg),
        SolveCmd::Outer { target, deg, .. } => ("solve outer", target, deg.max_deg),
    };
    let alg = ctx.algebra(target)?;
    let mut out = built(command, std::slice::from_ref(target));
    let (dimension, basis, manifests) = match sv {
        SolveCmd::Derivations { .. } | SolveCmd::AntiDerivations { .. } => {
            let sp = if matches!(sv, SolveCmd::Derivations { .. }) {
                solver::derivations_basis(&alg, dmax)?
            } else {
                solver::anti_derivations_basis(&alg, dmax)?
            };
            let mut manifests = Vec::new();
            let mut basis = Vec::new();
            for m in &sp.basis {
                let f = manifest::map_to_file(&alg, m);
                basis.push(
                    f.table
                        .iter()
                        .map(|(k, v)| format!("{k} -> {v}"))
                        .collect::<Vec<_>>()
                        .join("; "),
                );
                manifests.push(toml_text(&f)?);
            }
            (sp.dimension(), basis, manifests)
        }
        SolveCmd::Center { side, .. } => {
            let side = if side == "left" {
                Side::Left
            } else {
                Side::Right
            };
            let sp = solver::center_basis(&alg, side, dmax)?;
            (
                sp.dimension(),
                sp.basis.iter().map(ToString::to_string).collect(),
                Vec::new(),
            )
        }
        SolveCmd::Outer { anti, .. } => (
            solver::outer_dimension(&alg, dmax, *anti)?,
            Vec::new(),
            Vec::new(),
        ),
    };
    writeln!(
        out.text,
        "{command} {target}: dimension {dimension} at degree <= {dmax}"
    )
    .unwrap();
    for b in &basis {
        writeln!(out.text, "  {b}").unwrap();
    }
    if let Some(dir) = &ctx.output {
        fs::create_dir_all(dir).map_err(|e| Error::Manifest(format!("{}: {e}", dir.display())))?;
        let files: Vec<(String, String)> = if manifests.is_empty() {
            vec![(
                "basis.txt".into(),
                basis.iter().map(|b| format!("{b}\n")).collect(),
            )]
        } else {
            manifests
                .into_iter()
                .enumerate()
                .map(|(i, t)| (format!("basis-{}.toml", i + 1), t))
                .collect()
        };
        for (name, t) in files {
            let p = dir.join(name);
            fs::write(&p, t).map_err(|e| Error::Manifest(format!("{}: {e}", p.display())))?;
            writeln!(out.text, "wrote {}", p.display()).unwrap();
        }
    }
    out.json.dimension = Some(dimension);
    out.json.basis = Some(basis);
    Ok(out)
}

fn corpus_run(name: Option<&str>) -> lcalg::Result<Outcome> {
    let scenarios = match name {
        None => corpus::builtin_scenarios()?
            .into_iter()
            .map(|s| (s, corpus::loader()))
            .collect::<Vec<_>>(),
        Some(n) => {
            if let Some(text) = corpus::builtin_text(n, Category::Scenario) {
                vec![(
                    corpus::parse_scenario(text, Path::new(n))?,
                    corpus::loader(),
                )]
            } else {
                let text = read_file(n)?;
                vec![(
                    corpus::parse_scenario(&text, Path::new(n))?,
                    Loader::beside(Path::new(n)),
                )]
            }
        }
    };
    let inputs: Vec<String> = name.map(|n| vec![n.to_string()]).unwrap_or_default();
    let mut out = built("corpus run", &inputs);
    for (s, loader) in &scenarios {
        let o = corpus::run_scenario(s, loader)?;
        let residual = if o.ok() {
            "0".to_string()
        } else {
            o.mismatches.join("; ")
        };
        writeln!(
            out.text,
            "{} {} [{}]{}",
            if o.ok() { "PASS" } else { "FAIL" },
            o.name,
            s.expect.provenance,
            if o.ok() {
                String::new()
            } else {
                format!(": {residual}")
            }
        )
        .unwrap();
        out.json.items.push(JsonItem {
            condition: o.name.clone(),
            args: Vec::new(),
            residual,
            pass: o.ok(),
        });
    }
    out.json.verdict = Verdict::of(out.json.items.iter().all(|i| i.pass));
    Ok(out)
}

fn bindings(params: &[String]) -> lcalg::Result<BTreeMap<String, Rational>> {
    params.iter().map(|p| manifest::parse_binding(p)).collect()
}

/// Run the command line `argv` (including the program name). Returns the
/// exit code: 0 when every check passes, 1 when one fails, 2 on input errors.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = bindings(&cli.params).and_then(|params| {
        let ctx = Ctx {
            loader: Loader::new("."),
            params,
            output: cli.output.clone(),
        };
        dispatch(&cli, &ctx)
    });
    match result {
        Ok(o) => {
            let text = if cli.json {
                format!("{}\n", o.json.to_json())
            } else {
                o.text.clone()
            };
            let _ = out.write_all(text.as_bytes());
            if o.pass() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
