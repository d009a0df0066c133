//! Command-line front end: argument definitions, subcommand runners and the
//! mapping of failures to exit codes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use reticular_core::caustic::{
    full_caustic, oracle_agreement, oracle_grid, residual_check, CausticGeometry, CausticOptions, Stratum, Window,
};
use reticular_core::classify::{canonical_label, catalog, classify_germ, NormalFormEntry};
use reticular_core::localalg::{check_infinitesimal_versality, codimension, default_jet_order, CodimValue, Relation};
use reticular_core::orbit::{
    build_system_for_target, catalog_case, parse_control, tangency_report, CaseId, SolutionSet, TangencyReport,
};
use reticular_core::poly::{fmt_rat, VarSpace};
use reticular_core::render::{self, catalog_figure, csv_field};
use reticular_core::{parse_expression, Error, GeneratingFamily, Germ, Rational};

/// Success.
pub const EXIT_OK: i32 = 0;
/// Computation or I/O failure.
pub const EXIT_FAILURE: i32 = 1;
/// Unparsable input or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
/// A codimension could not be bounded within the jet cap.
pub const EXIT_BOUND: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "reticular", version, about = "Codimensions, normal forms, caustics and orbit-tangency checks for germs on a corner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Export the normal-form catalog.
    Catalog(CatalogArgs),
    /// Recognise a germ against the normal-form tables.
    Classify(GermArgs),
    /// Codimension of a germ under one of the equivalences.
    Codim(CodimArgs),
    /// Infinitesimal versality of a generating family.
    Versal(VersalArgs),
    /// Fold and quasi-caustics of a generating family.
    Caustic(CausticArgs),
    /// Orbit-tangency verdict for a modal family.
    Tangency(TangencyArgs),
    /// Compare brute-force critical-point counts with the computed caustic.
    Oracle(OracleArgs),
    /// Render every catalog entry: SVG for two parameters, PLY for three.
    Figures(FiguresArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Svg,
    Ply,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Svg => "svg",
            Format::Ply => "ply",
        }
    }
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Keep entries whose label, or label stem before `^`, matches.
    #[arg(long)]
    pub label: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GermArgs {
    /// Germ expression in x1.., y1.. (or x, y when there is one of each).
    #[arg(long, allow_hyphen_values = true)]
    pub germ: String,
    /// Corner and fibre dimensions `r,k`.
    #[arg(long, default_value = "2,0")]
    pub space: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CodimArgs {
    #[command(flatten)]
    pub germ: GermArgs,
    /// Equivalence: r, r+ or c.
    #[arg(long, default_value = "c")]
    pub relation: String,
    /// Starting jet order (raised until the value stabilises).
    #[arg(long)]
    pub jet: Option<u32>,
}

#[derive(Args, Debug)]
pub struct FamilySource {
    /// Family expression in x.., y.. and q...
    #[arg(long, allow_hyphen_values = true, conflicts_with = "entry")]
    pub family: Option<String>,
    /// Dimensions `r,k,n`.
    #[arg(long, default_value = "2,0,2")]
    pub space: String,
    /// Take the generating family of a catalog entry instead.
    #[arg(long)]
    pub entry: Option<String>,
    /// Fix parameters, e.g. `q3=-1` (repeatable or comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub fix: Vec<String>,
}

#[derive(Args, Debug)]
pub struct VersalArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub family: String,
    #[arg(long, default_value = "2,0,2")]
    pub space: String,
    #[arg(long)]
    pub jet: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CausticArgs {
    #[command(flatten)]
    pub source: FamilySource,
    /// Parameter window `lo:hi,...`; defaults to [-2,2] on every axis.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long, default_value_t = 120)]
    pub resolution: usize,
    /// Residual tolerance every emitted point must meet.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
    /// Bound of the witness box (default: max(3, window bound)).
    #[arg(long)]
    pub witness_bound: Option<f64>,
    /// Quasi-caustics as half-lines (sign condition on the shared stratum).
    #[arg(long)]
    pub half_lines: bool,
    /// csv, svg or ply; default svg for two parameters and ply for three.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; for svg/ply a CSV point dump is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TangencyArgs {
    #[arg(long)]
    pub case: String,
    /// Modulus value, an exact rational such as `3/10`.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub a: String,
    /// Positive control `h0=...,h1=...`: decide the target these generate.
    #[arg(long, allow_hyphen_values = true)]
    pub control: Option<String>,
    /// Use the ideal degree as printed instead of the verdict degree.
    #[arg(long)]
    pub printed_degree: bool,
    /// Write the augmented matrix as CSV.
    #[arg(long)]
    pub system_csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub source: FamilySource,
    /// Parameter window `lo:hi,lo:hi`; defaults to [-2,2]^2.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Oracle cells per axis.
    #[arg(long, default_value_t = 100)]
    pub grid: usize,
    /// Sweep resolution of the computed caustic.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Witness box for sweep and oracle.
    #[arg(long, default_value_t = 4.0)]
    pub bound: f64,
    /// Newton starts per axis.
    #[arg(long, default_value_t = 6)]
    pub starts: usize,
    /// Allowed distance in cells.
    #[arg(long, default_value_t = 2)]
    pub tolerance: usize,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FiguresArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Half-width of the parameter cube.
    #[arg(long, default_value_t = 2.0)]
    pub bound: f64,
    /// Resolution for two-parameter families.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    /// Resolution for three-parameter families.
    #[arg(long, default_value_t = 32)]
    pub mesh_resolution: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        use reticular_core::error::{CausticError, OrbitError};
        let code = match &e {
            Error::Io(_) => EXIT_FAILURE,
            Error::Caustic(CausticError::Degenerate(_)) => EXIT_FAILURE,
            Error::Orbit(OrbitError::IdentityFailed(_) | OrbitError::NotFinitelyBranched) => EXIT_FAILURE,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

macro_rules! impl_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}
impl_from!(
    reticular_core::ParseError,
    reticular_core::GermError,
    reticular_core::error::ClassifyError,
    reticular_core::error::CausticError,
    reticular_core::error::OrbitError,
    std::io::Error
);

/// What a run produced: text for stdout, notes for stderr and an exit code.
#[derive(Debug, Default)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn run(cli: Cli) -> Result<Output, Failure> {
    match cli.command {
        Command::Catalog(a) => cmd_catalog(&a),
        Command::Classify(a) => cmd_classify(&a),
        Command::Codim(a) => cmd_codim(&a),
        Command::Versal(a) => cmd_versal(&a),
        Command::Caustic(a) => cmd_caustic(&a),
        Command::Tangency(a) => cmd_tangency(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::Figures(a) => cmd_figures(&a),
    }
}

fn parse_dims(s: &str, want: usize) -> Result<Vec<usize>, Failure> {
    let dims: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::config(format!("--space `{s}` must be {want} comma-separated integers")))?;
    if dims.len() != want {
        return Err(Failure::config(format!("--space `{s}` must have {want} entries")));
    }
    Ok(dims)
}

/// Parses an exact rational such as `3/10`, `-2` or `1/2+1/4`.
pub fn parse_rational(s: &str) -> Result<Rational, Failure> {
    let p = parse_expression(s, &VarSpace::named::<&str>(&[])).map_err(|e| Failure::config(format!("`{s}`: {e}")))?;
    Ok(p.constant_term())
}

fn write_or_print(out: &Option<PathBuf>, text: String, result: &mut Output) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, &text)?;
            let _ = writeln!(result.stderr, "wrote {}", path.display());
        }
        None => result.stdout.push_str(&text),
    }
    Ok(())
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialise");
    s.push('\n');
    s
}

/// Label with every sign slot replaced by `±`, naming the label group.
pub fn group_label(e: &NormalFormEntry) -> String {
    let Some((stem, sup)) = e.label.split_once("^{") else { return e.label.clone() };
    let sup = sup.trim_end_matches('}');
    let parts: Vec<String> = sup
        .split(',')
        .enumerate()
        .map(|(i, p)| if i < e.group.sign_count() { "±".to_string() } else { p.to_string() })
        .collect();
    format!("{stem}^{{{}}}", parts.join(","))
}

fn label_matches(e: &NormalFormEntry, filter: &str) -> bool {
    let filter = canonical_label(filter.trim());
    if filter.contains('^') {
        e.label == filter || group_label(e) == filter
    } else {
        e.label.split('^').next() == Some(filter.as_str())
    }
}

fn entry_json(e: &NormalFormEntry) -> Value {
    json!({
        "label": e.label,
        "r": e.r(),
        "k": e.k(),
        "n": e.n(),
        "germ": e.representative.to_string(),
        "family": e.family.to_string(),
        "codim_caustic": e.codim_caustic,
        "codim_weak": e.codim_weak,
        "modulus_count": e.modulus_count,
        "regime": e.regime.to_string(),
        "figure": e.figure,
    })
}

pub fn cmd_catalog(a: &CatalogArgs) -> Result<Output, Failure> {
    let entries: Vec<&NormalFormEntry> =
        catalog().iter().filter(|e| a.label.as_deref().map_or(true, |l| label_matches(e, l))).collect();
    if entries.is_empty() {
        return Err(Failure::config(format!("no catalog entry matches `{}`", a.label.as_deref().unwrap_or(""))));
    }
    let text = match a.format {
        Format::Json => {
            let mut groups: Vec<(String, String)> = Vec::new();
            for e in &entries {
                let g = (e.regime.to_string(), group_label(e));
                if !groups.contains(&g) {
                    groups.push(g);
                }
            }
            let pick = |regime: &str| -> Vec<&String> { groups.iter().filter(|g| g.0 == regime).map(|g| &g.1).collect() };
            json_text(&json!({
                "groups": {
                    "weakly-caustic-stable": pick("weakly-caustic-stable"),
                    "caustic-stable": pick("caustic-stable"),
                },
                "entries": entries.iter().map(|e| entry_json(e)).collect::<Vec<_>>(),
            }))
        }
        Format::Csv => {
            let mut s = String::from("label,r,k,n,germ,family,codim_caustic,codim_weak,modulus_count,regime,figure\n");
            for e in &entries {
                let fields = [
                    e.label.clone(),
                    e.r().to_string(),
                    e.k().to_string(),
                    e.n().to_string(),
                    e.representative.to_string(),
                    e.family.to_string(),
                    e.codim_caustic.to_string(),
                    e.codim_weak.to_string(),
                    e.modulus_count.to_string(),
                    e.regime.to_string(),
                    e.figure.clone().unwrap_or_default(),
                ];
                let row: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
        other => return Err(Failure::config(format!("catalog supports json or csv, not {}", other.name()))),
    };
    let mut out = Output::default();
    write_or_print(&a.out, text, &mut out)?;
    Ok(out)
}

fn read_germ(a: &GermArgs) -> Result<Germ, Failure> {
    let d = parse_dims(&a.space, 2)?;
    Ok(Germ::parse(&a.germ, d[0], d[1])?)
}

fn monomials(ms: &[reticular_core::Monomial], sp: &VarSpace) -> Vec<String> {
    ms.iter().map(|m| m.to_string_in(sp)).collect()
}

pub fn cmd_classify(a: &GermArgs) -> Result<Output, Failure> {
    let g = read_germ(a)?;
    let rep = classify_germ(&g)?;
    let value = json!({
        "germ": g.to_string(),
        "label": rep.label,
        "weak_label": rep.weak_label,
        "modulus": rep.modulus.as_ref().map(fmt_rat),
        "codim_caustic": rep.codim_caustic.to_string(),
        "codim_weak": rep.codim_weak,
        "modulus_count": rep.modulus_count,
        "reduced": rep.reduced.to_string(),
        "split_squares": rep.split_squares.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "quadratic_rank": rep.quadratic_rank,
        "mu": rep.mu.as_ref().map(fmt_rat),
        "quasihomogeneous_weights": rep.quasihomogeneous_weights.as_ref().map(|w| w.iter().map(fmt_rat).collect::<Vec<_>>()),
    });
    let mut out = Output::default();
    out.stdout = match a.format {
        Format::Json => json_text(&value),
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "germ: {g}");
            let _ = writeln!(s, "label: {}", rep.label.as_deref().unwrap_or("unclassified"));
            if let Some(w) = &rep.weak_label {
                let _ = writeln!(s, "weak label: {w}");
            }
            if let Some(m) = &rep.modulus {
                let _ = writeln!(s, "modulus a: {}", fmt_rat(m));
            }
            let _ = writeln!(s, "codim (caustic): {}", rep.codim_caustic);
            if let Some(w) = rep.codim_weak {
                let _ = writeln!(s, "codim (weak): {w}");
            }
            let _ = writeln!(s, "reduced germ: {}", rep.reduced);
            let _ = writeln!(s, "quadratic rank: {}", rep.quadratic_rank);
            if let Some(w) = &rep.quasihomogeneous_weights {
                let ws: Vec<String> = w.iter().map(fmt_rat).collect();
                let _ = writeln!(s, "quasihomogeneous weights: {}", ws.join(", "));
            }
            s
        }
    };
    if rep.codim_caustic == CodimValue::ExceedsBound {
        out.code = EXIT_BOUND;
    }
    Ok(out)
}

pub fn cmd_codim(a: &CodimArgs) -> Result<Output, Failure> {
    let g = read_germ(&a.germ)?;
    let relation: Relation = a.relation.parse().map_err(Failure::config)?;
    let jet = a.jet.unwrap_or_else(|| default_jet_order(g.nvars()));
    let c = codimension(&g, relation, jet);
    let cobasis = monomials(&c.cobasis, g.space());
    let mut out = Output::default();
    out.stdout = match a.germ.format {
        Format::Json => json_text(&json!({
            "germ": g.to_string(),
            "relation": relation.name(),
            "codim": c.value.finite(),
            "exceeds_bound": c.value == CodimValue::ExceedsBound,
            "jet_order": c.jet_order,
            "stabilized": c.stabilized,
            "cobasis": cobasis,
        })),
        _ => format!(
            "{}\nrelation {} at jet order {}{}\ncobasis {{{}}}\n",
            c.value,
            relation,
            c.jet_order,
            if c.stabilized { ", stable" } else { "" },
            cobasis.join(", ")
        ),
    };
    if c.value == CodimValue::ExceedsBound {
        out.code = EXIT_BOUND;
    }
    Ok(out)
}

pub fn cmd_versal(a: &VersalArgs) -> Result<Output, Failure> {
    let d = parse_dims(&a.space, 3)?;
    let f = GeneratingFamily::parse(&a.family, d[0], d[1], d[2])?;
    let jet = a.jet.unwrap_or_else(|| default_jet_order(d[0] + d[1]));
    let v = check_infinitesimal_versality(&f, jet);
    let missing = monomials(&v.missing, f.core().space());
    let mut out = Output::default();
    out.stdout = match a.format {
        Format::Json => json_text(&json!({
            "family": f.to_string(),
            "versal": v.versal,
            "jet_order": v.jet_order,
            "missing": missing,
        })),
        _ => format!("versal: {}\njet order {}\nmissing {{{}}}\n", v.versal, v.jet_order, missing.join(", ")),
    };
    Ok(out)
}

/// Resolves `--family/--space`, `--entry` and `--fix` into one family.
fn read_family(s: &FamilySource) -> Result<GeneratingFamily, Failure> {
    let mut family = match (&s.family, &s.entry) {
        (Some(text), None) => {
            let d = parse_dims(&s.space, 3)?;
            GeneratingFamily::parse(text, d[0], d[1], d[2])?
        }
        (None, Some(label)) => {
            let label = canonical_label(label);
            let e = catalog()
                .iter()
                .find(|e| e.label == label)
                .ok_or_else(|| Failure::config(format!("no catalog entry `{label}`")))?;
            e.family.clone()
        }
        _ => return Err(Failure::config("give either --family or --entry")),
    };
    let mut fixes: Vec<(usize, Rational)> = Vec::new();
    for f in &s.fix {
        let (name, value) =
            f.split_once('=').ok_or_else(|| Failure::config(format!("--fix `{f}` must look like q3=-1")))?;
        let name = name.trim();
        let (r, k, n) = family.rkn();
        let j = (0..n)
            .find(|&j| family.space().name(r + k + j) == name)
            .ok_or_else(|| Failure::config(format!("`{name}` is not a parameter of the family")))?;
        fixes.push((j, parse_rational(value)?));
    }
    // Highest index first so earlier indices stay valid.
    fixes.sort_by(|a, b| b.0.cmp(&a.0));
    for (j, v) in fixes {
        family = family.slice(j, &v)?;
    }
    Ok(family)
}

fn read_window(text: &Option<String>, n: usize) -> Result<Window, Failure> {
    match text {
        Some(t) => Ok(Window::parse(t)?),
        None => Ok(Window::cube(n, -2.0, 2.0)?),
    }
}

fn summary_text(geom: &CausticGeometry) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "family: {}", geom.family);
    let _ = writeln!(s, "window: {}  resolution: {}", geom.window, geom.resolution);
    for (label, points, segments, triangles, res) in render::summary(geom) {
        let _ = writeln!(s, "{label}: {points} points, {segments} segments, {triangles} triangles, max residual {res:.1e}");
    }
    if geom.components.is_empty() {
        s.push_str("no components in window\n");
    }
    s
}

pub fn cmd_caustic(a: &CausticArgs) -> Result<Output, Failure> {
    if a.resolution < 8 {
        return Err(Failure::config("--resolution must be at least 8"));
    }
    if !(a.eps > 0.0) {
        return Err(Failure::config("--eps must be positive"));
    }
    let family = read_family(&a.source)?;
    let n = family.rkn().2;
    let window = read_window(&a.window, n)?;
    let options = CausticOptions { witness_bound: a.witness_bound, half_lines: a.half_lines, ..Default::default() };
    let geom = full_caustic(&family, &window, a.resolution, &options)?;
    if !residual_check(&geom, &family, a.eps) {
        return Err(Failure::failed(format!("residual check failed at eps {:e}", a.eps)));
    }
    let format = a.format.unwrap_or(if n == 2 { Format::Svg } else { Format::Ply });
    let title = a.source.entry.clone().unwrap_or_else(|| family.to_string());
    let text = match format {
        Format::Csv => render::geometry_csv(&geom),
        Format::Svg if n == 2 => render::svg(&geom, &title),
        Format::Ply => render::ply(&geom, &title),
        Format::Svg => return Err(Failure::config("svg output needs two parameters; use ply or csv")),
        other => return Err(Failure::config(format!("caustic supports csv, svg or ply, not {}", other.name()))),
    };
    let mut out = Output::default();
    out.stderr.push_str(&summary_text(&geom));
    write_or_print(&a.out, text, &mut out)?;
    if let (Some(path), Format::Svg | Format::Ply) = (&a.out, format) {
        let csv = path.with_extension("csv");
        std::fs::write(&csv, render::geometry_csv(&geom))?;
        let _ = writeln!(out.stderr, "wrote {}", csv.display());
    }
    Ok(out)
}

fn solution_text(s: &SolutionSet) -> String {
    s.to_string()
}

fn tangency_text(r: &TangencyReport, designated_names: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case {} ({}) at a = {}", r.case, r.case.class_label(), fmt_rat(&r.a));
    let _ = writeln!(s, "S_a = ({})", r.map.components.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s, "dS_a/da = X_f o S_a = ({})", r.direction.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "));
    let _ = writeln!(s, "reduced f o S_a = {}", r.target);
    let _ = writeln!(s, "{} unknowns, {} rows", r.system.unknowns.len(), r.system.rows.len());
    for row in &r.system.rows {
        let _ = writeln!(s, "  {}", r.system.row_equation(row));
    }
    let _ = writeln!(s, "rank {} augmented rank {}", r.rank, r.augmented_rank);
    if let Some(d) = &r.designated {
        let _ = writeln!(s, "subsystem in {}: {}", designated_names.join(", "), solution_text(d));
    }
    let _ = writeln!(s, "{}", if r.tangent { "tangent" } else { "not tangent" });
    s
}

pub fn cmd_tangency(a: &TangencyArgs) -> Result<Output, Failure> {
    let id: CaseId = a.case.parse().map_err(|_| Failure::config(format!("unknown case `{}`", a.case)))?;
    let mut case = catalog_case(id);
    if a.printed_degree {
        case = case.printed_degree();
    }
    let value = parse_rational(&a.a)?;
    let mut out = Output::default();
    if let Some(control) = &a.control {
        let h = parse_control(&case, control)?;
        let target = case.representable_target(&value, &h)?;
        let sys = build_system_for_target(&case, &value, &target)?;
        let tangent = sys.is_solvable();
        if let Some(p) = &a.system_csv {
            std::fs::write(p, sys.to_csv())?;
        }
        out.stdout = match a.format {
            Format::Json => json_text(&json!({
                "case": id.name(),
                "a": fmt_rat(&value),
                "control": control,
                "target": target.to_string(),
                "rank": sys.rank(),
                "augmented_rank": sys.augmented_rank(),
                "tangent": tangent,
            })),
            _ => format!(
                "case {id} at a = {} with control {control}\ntarget {target}\nrank {} augmented rank {}\n{}\n",
                fmt_rat(&value),
                sys.rank(),
                sys.augmented_rank(),
                if tangent { "tangent" } else { "not tangent" }
            ),
        };
        return Ok(out);
    }
    let report = tangency_report(&case, &value)?;
    let (sp, _) = reticular_core::orbit::designated_equations(&case, &value)?;
    let names: Vec<String> = sp.names().to_vec();
    if let Some(p) = &a.system_csv {
        std::fs::write(p, report.system.to_csv())?;
    }
    out.stdout = match a.format {
        Format::Json => json_text(&json!({
            "case": id.name(),
            "class": id.class_label(),
            "a": fmt_rat(&value),
            "ideal_degree": case.ideal_degree,
            "map": report.map.components.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "direction": report.direction.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            "target": report.target.to_string(),
            "unknowns": report.system.unknowns.iter().map(|u| u.name.clone()).collect::<Vec<_>>(),
            "rows": report.system.rows.iter().map(|r| report.system.row_equation(r)).collect::<Vec<_>>(),
            "rank": report.rank,
            "augmented_rank": report.augmented_rank,
            "tangent": report.tangent,
            "subsystem_unknowns": names,
            "subsystem": report.designated.as_ref().map(|d| d.branches.iter().map(|b| b.to_string()).collect::<Vec<_>>()),
        })),
        _ => tangency_text(&report, &names),
    };
    Ok(out)
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<Output, Failure> {
    let family = read_family(&a.source)?;
    let n = family.rkn().2;
    if n != 2 {
        return Err(Failure::config(format!("oracle needs two parameters (got {n}); fix the others with --fix")));
    }
    if a.grid < 2 || a.resolution < 8 {
        return Err(Failure::config("--grid must be at least 2 and --resolution at least 8"));
    }
    let window = read_window(&a.window, 2)?;
    let options = CausticOptions { witness_bound: Some(a.bound), ..Default::default() };
    let geom = full_caustic(&family, &window, a.resolution, &options)?;
    let oracle = oracle_grid(&family, &window, a.grid, a.bound, a.starts)?;
    let report = oracle_agreement(&oracle, &geom, a.tolerance);
    let strata: Vec<String> = Stratum::all(family.rkn().0).iter().map(|s| format!("C_{s}")).collect();
    let mut distinct: Vec<&Vec<usize>> = oracle.counts.iter().collect();
    distinct.sort();
    distinct.dedup();
    let mut out = Output::default();
    out.stdout = match a.format {
        Format::Json => json_text(&json!({
            "family": family.to_string(),
            "window": window.to_string(),
            "grid": a.grid,
            "strata": strata,
            "count_vectors": distinct,
            "agreement": report,
            "holds": report.holds(),
        })),
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "family: {family}");
            let _ = writeln!(s, "window: {window}  grid: {}x{}", a.grid, a.grid);
            let _ = writeln!(s, "strata: {}", strata.join(", "));
            let vs: Vec<String> = distinct.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "count vectors: {}", vs.join(" "));
            let _ = writeln!(s, "change cells: {}", report.change_cells);
            let _ = writeln!(
                s,
                "computed points within {} cells of a change: {}/{} (max distance {})",
                report.tolerance,
                report.points - report.unmatched_points,
                report.points,
                report.max_point_distance
            );
            let _ = writeln!(
                s,
                "change cells within {} cells of a computed point: {}/{} (max distance {})",
                report.tolerance,
                report.change_cells - report.unmatched_cells,
                report.change_cells,
                report.max_cell_distance
            );
            let _ = writeln!(s, "agreement: {}", if report.holds() { "yes" } else { "no" });
            s
        }
    };
    Ok(out)
}

pub fn cmd_figures(a: &FiguresArgs) -> Result<Output, Failure> {
    std::fs::create_dir_all(&a.out)?;
    let mut out = Output::default();
    for e in catalog() {
        let res = if e.n() == 2 { a.resolution } else { a.mesh_resolution };
        let fig = catalog_figure(e, a.bound, res)?;
        let family = match fig.sliced {
            Some(j) => e.family.slice(j, &Rational::from_integer(0.into()))?,
            None => e.family.clone(),
        };
        if !residual_check(&fig.geometry, &family, a.eps) {
            return Err(Failure::failed(format!("{}: residual check failed", e.label)));
        }
        let path: &Path = &a.out.join(&fig.file_name);
        std::fs::write(path, &fig.contents)?;
        let _ = writeln!(
            out.stdout,
            "{}\t{}\t{} components\t{} points",
            e.label,
            path.display(),
            fig.geometry.components.len(),
            fig.geometry.point_count()
        );
    }
    Ok(out)
}
