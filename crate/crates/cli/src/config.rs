//! Line-oriented scenario files: `section.key = value`, `#` comments.
//!
//! Every problem in a file is collected before reporting, so one pass over a
//! broken config lists all of them with line and column.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use shnol_core::cutoff::SchedulePolicy;
use shnol_core::grid::{make_breakpoint_grid, make_graded_grid, Grading, Grid};
use shnol_core::operator::{LeftBoundary, OperatorSpec};
use shnol_core::profile::{parse_profile, Profile, VALID_TAGS};
use shnol_core::shnol::{Eigenfunction, Reference, Scenario};

pub const KEYS: &[&str] = &[
    "name",
    "lambda",
    "operator.interval",
    "operator.weight",
    "operator.coefficient",
    "operator.potential",
    "operator.shift",
    "operator.left",
    "operator.mirrored",
    "eigenfunction",
    "eigenfunction.step",
    "reference",
    "schedule.policy",
    "schedule.n_max",
    "evans.scale",
    "evans.offset",
    "evans.base",
    "grid.cells",
    "grid.grading",
    "oracle.interval",
    "oracle.mesh",
    "oracle.weight",
    "oracle.coefficient",
    "oracle.potential",
    "oracle.left",
    "outputs.directory",
];

const LEFT_TAGS: &[&str] = &["dirichlet", "natural", "regular", "robin(beta)", "robin-from-reference"];
const POLICY_TAGS: &[&str] =
    &["double-exponential", "geometric(base, spread, scale)", "intrinsic(b)", "explicit(r1, R1; r2, R2; ...)"];
const GRADING_TAGS: &[&str] = &["uniform", "geometric(ratio)", "breakpoints(fine, halo, growth, max_cell)"];
const EIGEN_TAGS: &[&str] = &["shooting(u0)", "shooting(u0, du0)", "closed(expr)"];
const REFERENCE_TAGS: &[&str] = &["one", "auto", "supplied(expr)"];

/// One problem in a config file. Line 0 marks a key that is missing altogether.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub line: usize,
    pub column: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.key, self.message)
        } else {
            write!(f, "line {}, column {}: {}: {}", self.line, self.column, self.key, self.message)
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io { path: PathBuf, source: std::io::Error },
    Invalid { path: PathBuf, errors: Vec<FieldError> },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io { path, .. } => write!(f, "cannot read {}", path.display()),
            Self::Invalid { path, errors } => {
                write!(f, "{} has {} error(s):", path.display(), errors.len())?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Self::Io { source, .. } => Some(source),
            Self::Invalid { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridGrading {
    Uniform,
    Geometric(f64),
    /// Fine spacing around the nominal schedule levels, read as coordinates.
    Breakpoints { fine: f64, halo: f64, growth: f64, max_cell: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub interval: (f64, f64),
    pub mesh: f64,
    pub weight: Option<Profile>,
    pub coefficient: Option<Profile>,
    pub potential: Option<Profile>,
    pub left: Option<LeftBoundary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub interval: (f64, f64),
    pub weight: Profile,
    pub coefficient: Profile,
    pub potential: Profile,
    pub shift: Option<Profile>,
    pub left: LeftBoundary,
    pub robin_from_reference: bool,
    pub mirrored: bool,
    pub lambdas: Vec<f64>,
    pub eigenfunction: Eigenfunction,
    pub reference: Reference,
    pub policy: SchedulePolicy,
    pub n_max: usize,
    pub evans_scale: f64,
    pub evans_offset: f64,
    pub base: Option<f64>,
    pub cells: Option<usize>,
    pub grading: GridGrading,
    pub oracle: Option<OracleConfig>,
    pub output: Option<PathBuf>,
    /// `(key, value)` pairs as written, for the provenance echo.
    pub echo: Vec<(String, String)>,
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_config_str(&text).map_err(|errors| ConfigError::Invalid { path: path.into(), errors })
}

struct Entry {
    line: usize,
    column: usize,
    value: String,
}

struct Ctx {
    errors: Vec<FieldError>,
}

impl Ctx {
    fn push(&mut self, key: &str, e: &Entry, offset: usize, message: String) {
        self.errors.push(FieldError { line: e.line, column: e.column + offset, key: key.into(), message });
    }
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, Vec<FieldError>> {
    let mut ctx = Ctx { errors: Vec::new() };
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut echo = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let column = content.len() - content.trim_start().len() + 1;
            ctx.errors.push(FieldError { line, column, key: content.trim().into(), message: "expected `key = value`".into() });
            continue;
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let column = eq + 2 + lead;
        let value = after.trim();
        let key_column = content.len() - content.trim_start().len() + 1;
        if !KEYS.contains(&key) {
            ctx.errors.push(FieldError {
                line,
                column: key_column,
                key: key.into(),
                message: format!("unknown key; valid keys: {}", KEYS.join(", ")),
            });
            continue;
        }
        if let Some(prev) = entries.get(key) {
            ctx.errors.push(FieldError {
                line,
                column: key_column,
                key: key.into(),
                message: format!("duplicate key, first set on line {}", prev.line),
            });
            continue;
        }
        echo.push((key.to_string(), value.to_string()));
        entries.insert(key.into(), Entry { line, column, value: value.into() });
    }

    let cfg = build(&mut ctx, &entries, echo);
    if ctx.errors.is_empty() {
        Ok(cfg.expect("a config without errors is complete"))
    } else {
        Err(ctx.errors)
    }
}

fn missing(ctx: &mut Ctx, key: &str) {
    ctx.errors.push(FieldError { line: 0, column: 0, key: key.into(), message: "missing required key".into() });
}

/// `name(args)` split into name and the raw argument text.
fn call(value: &str) -> Option<(&str, &str)> {
    let open = value.find('(')?;
    let inner = value[open + 1..].strip_suffix(')')?;
    Some((value[..open].trim(), inner))
}

/// A number or a constant expression such as `2*pi`.
fn number(ctx: &mut Ctx, key: &str, e: &Entry, offset: usize, text: &str) -> Option<f64> {
    let lead = text.len() - text.trim_start().len();
    let text = text.trim();
    if let Ok(v) = text.parse::<f64>() {
        return Some(v);
    }
    let (negate, body) = match text.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, text),
    };
    match parse_profile(body).ok().and_then(|p| constant(&p)) {
        Some(c) => Some(negate * c),
        None => {
            ctx.push(key, e, offset + lead, format!("expected a number, found '{text}'"));
            None
        }
    }
}

fn constant(p: &Profile) -> Option<f64> {
    match p {
        Profile::Const(c) => Some(*c),
        Profile::Product(fs) => fs.iter().map(constant).product(),
        Profile::Sum(fs) => fs.iter().map(constant).sum(),
        _ => None,
    }
}

/// Comma-separated numbers with their offsets inside `text`.
fn numbers(ctx: &mut Ctx, key: &str, e: &Entry, offset: usize, text: &str) -> Option<Vec<f64>> {
    let mut out = Vec::new();
    let mut pos = 0;
    let mut ok = true;
    for part in text.split(',') {
        match number(ctx, key, e, offset + pos, part) {
            Some(v) => out.push(v),
            None => ok = false,
        }
        pos += part.len() + 1;
    }
    ok.then_some(out)
}

fn finite_numbers(ctx: &mut Ctx, key: &str, e: &Entry, offset: usize, text: &str, count: usize) -> Option<Vec<f64>> {
    let v = numbers(ctx, key, e, offset, text)?;
    if v.len() != count {
        ctx.push(key, e, offset, format!("expected {count} comma-separated numbers, found {}", v.len()));
        return None;
    }
    if v.iter().any(|x| !x.is_finite()) {
        ctx.push(key, e, offset, "values must be finite".into());
        return None;
    }
    Some(v)
}

fn profile(ctx: &mut Ctx, key: &str, e: &Entry, offset: usize, text: &str) -> Option<Profile> {
    match parse_profile(text) {
        Ok(p) => Some(p),
        Err(err) => {
            let message = match &err.unknown {
                Some(name) => format!("unknown tag '{name}'; valid tags: {}", VALID_TAGS.join(", ")),
                None => err.message.clone(),
            };
            ctx.push(key, e, offset + err.column - 1, message);
            None
        }
    }
}

fn unknown_tag(ctx: &mut Ctx, key: &str, e: &Entry, valid: &[&str]) {
    let name = call(&e.value).map_or(e.value.as_str(), |(n, _)| n);
    ctx.push(key, e, 0, format!("unknown tag '{name}'; valid tags: {}", valid.join(", ")));
}

fn interval(ctx: &mut Ctx, key: &str, e: &Entry) -> Option<(f64, f64)> {
    let v = finite_numbers(ctx, key, e, 0, &e.value, 2)?;
    if v[0] >= v[1] {
        ctx.push(key, e, 0, format!("range violation: lower end {} must be below upper end {}", v[0], v[1]));
        return None;
    }
    Some((v[0], v[1]))
}

fn left(ctx: &mut Ctx, key: &str, e: &Entry) -> Option<(LeftBoundary, bool)> {
    match e.value.as_str() {
        "dirichlet" => Some((LeftBoundary::Dirichlet, false)),
        "natural" => Some((LeftBoundary::Natural, false)),
        "regular" => Some((LeftBoundary::Regular, false)),
        "robin-from-reference" => Some((LeftBoundary::Natural, true)),
        v => match call(v) {
            Some(("robin", args)) => {
                let b = finite_numbers(ctx, key, e, "robin(".len(), args, 1)?;
                Some((LeftBoundary::Robin(b[0]), false))
            }
            _ => {
                unknown_tag(ctx, key, e, LEFT_TAGS);
                None
            }
        },
    }
}

fn positive(ctx: &mut Ctx, key: &str, e: &Entry, v: f64) -> Option<f64> {
    if v > 0.0 && v.is_finite() {
        Some(v)
    } else {
        ctx.push(key, e, 0, format!("range violation: must be positive and finite, got {v}"));
        None
    }
}

fn policy(ctx: &mut Ctx, key: &str, e: &Entry) -> Option<SchedulePolicy> {
    if e.value == "double-exponential" {
        return Some(SchedulePolicy::DoubleExponential);
    }
    let Some((name, args)) = call(&e.value) else {
        unknown_tag(ctx, key, e, POLICY_TAGS);
        return None;
    };
    let offset = name.len() + 1;
    match name {
        "geometric" => {
            let v = finite_numbers(ctx, key, e, offset, args, 3)?;
            if v[0] <= 1.0 || v[1] <= 1.0 || v[2] <= 0.0 {
                ctx.push(key, e, offset, "range violation: need base > 1, spread > 1, scale > 0".into());
                return None;
            }
            Some(SchedulePolicy::Geometric { base: v[0], spread: v[1], scale: v[2] })
        }
        "intrinsic" => {
            let v = finite_numbers(ctx, key, e, offset, args, 1)?;
            positive(ctx, key, e, v[0]).map(|b| SchedulePolicy::Intrinsic { b })
        }
        "explicit" => {
            let mut pairs = Vec::new();
            let mut pos = offset;
            for part in args.split(';') {
                let v = finite_numbers(ctx, key, e, pos, part, 2)?;
                pairs.push((v[0], v[1]));
                pos += part.len() + 1;
            }
            Some(SchedulePolicy::Explicit(pairs))
        }
        _ => {
            unknown_tag(ctx, key, e, POLICY_TAGS);
            None
        }
    }
}

fn grading(ctx: &mut Ctx, key: &str, e: &Entry) -> Option<GridGrading> {
    if e.value == "uniform" {
        return Some(GridGrading::Uniform);
    }
    match call(&e.value) {
        Some(("geometric", args)) => {
            let v = finite_numbers(ctx, key, e, "geometric(".len(), args, 1)?;
            positive(ctx, key, e, v[0]).map(GridGrading::Geometric)
        }
        Some(("breakpoints", args)) => {
            let v = finite_numbers(ctx, key, e, "breakpoints(".len(), args, 4)?;
            if !(v[0] > 0.0 && v[1] >= 0.0 && v[2] >= 0.0 && v[3] >= v[0]) {
                ctx.push(key, e, 0, "range violation: need fine > 0, halo >= 0, growth >= 0, max_cell >= fine".into());
                return None;
            }
            Some(GridGrading::Breakpoints { fine: v[0], halo: v[1], growth: v[2], max_cell: v[3] })
        }
        _ => {
            unknown_tag(ctx, key, e, GRADING_TAGS);
            None
        }
    }
}

fn eigenfunction(ctx: &mut Ctx, key: &str, e: &Entry, step: f64) -> Option<Eigenfunction> {
    match call(&e.value) {
        Some(("shooting", args)) => {
            let v = numbers(ctx, key, e, "shooting(".len(), args)?;
            if v.is_empty() || v.len() > 2 || v.iter().any(|x| !x.is_finite()) {
                ctx.push(key, e, 0, "shooting takes u0 and an optional du0, both finite".into());
                return None;
            }
            Some(Eigenfunction::Shooting { u0: v[0], du0: v.get(1).copied(), step })
        }
        Some(("closed", args)) => profile(ctx, key, e, "closed(".len(), args).map(Eigenfunction::ClosedForm),
        _ => {
            unknown_tag(ctx, key, e, EIGEN_TAGS);
            None
        }
    }
}

fn reference(ctx: &mut Ctx, key: &str, e: &Entry) -> Option<Reference> {
    match e.value.as_str() {
        "one" => Some(Reference::One),
        "auto" => Some(Reference::Auto),
        v => match call(v) {
            Some(("supplied", args)) => profile(ctx, key, e, "supplied(".len(), args).map(Reference::Supplied),
            _ => {
                unknown_tag(ctx, key, e, REFERENCE_TAGS);
                None
            }
        },
    }
}

fn build(ctx: &mut Ctx, m: &BTreeMap<String, Entry>, echo: Vec<(String, String)>) -> Option<ScenarioConfig> {
    let get = |k: &str| m.get(k);
    let required = ["name", "lambda", "operator.interval", "eigenfunction", "schedule.policy", "schedule.n_max"];
    for k in required {
        if get(k).is_none() {
            missing(ctx, k);
        }
    }

    let name = get("name").map(|e| e.value.clone());
    if let Some(e) = get("name") {
        if e.value.is_empty() || e.value.contains(['/', '\\']) {
            ctx.push("name", e, 0, "name must be non-empty and contain no path separators".into());
        }
    }
    let interval_v = get("operator.interval").and_then(|e| interval(ctx, "operator.interval", e));
    let tag = |ctx: &mut Ctx, k: &str, default: Profile| match get(k) {
        Some(e) => profile(ctx, k, e, 0, &e.value),
        None => Some(default),
    };
    let weight = tag(ctx, "operator.weight", Profile::one());
    let coefficient = tag(ctx, "operator.coefficient", Profile::one());
    let potential = tag(ctx, "operator.potential", Profile::Const(0.0));
    let shift = match get("operator.shift") {
        Some(e) => profile(ctx, "operator.shift", e, 0, &e.value).map(Some),
        None => Some(None),
    };
    let left_v = match get("operator.left") {
        Some(e) => left(ctx, "operator.left", e),
        None => Some((LeftBoundary::Dirichlet, false)),
    };
    let boolean = |ctx: &mut Ctx, k: &str| match get(k) {
        None => Some(false),
        Some(e) => match e.value.as_str() {
            "true" => Some(true),
            "false" => Some(false),
            _ => {
                ctx.push(k, e, 0, format!("expected true or false, found '{}'", e.value));
                None
            }
        },
    };
    let mirrored = boolean(ctx, "operator.mirrored");

    let lambdas = get("lambda").and_then(|e| {
        let v = numbers(ctx, "lambda", e, 0, &e.value)?;
        if v.iter().any(|x| !x.is_finite()) {
            ctx.push("lambda", e, 0, "range violation: lambda must be finite".into());
            return None;
        }
        Some(v)
    });

    let num = |ctx: &mut Ctx, k: &str| get(k).map(|e| finite_numbers(ctx, k, e, 0, &e.value, 1).map(|v| v[0]));
    let step = match num(ctx, "eigenfunction.step") {
        Some(Some(s)) => positive(ctx, "eigenfunction.step", get("eigenfunction.step")?, s),
        Some(None) => None,
        None => Some(1e-3),
    };
    let eigen = match (get("eigenfunction"), step) {
        (Some(e), Some(step)) => eigenfunction(ctx, "eigenfunction", e, step),
        _ => None,
    };
    let reference_v = match get("reference") {
        Some(e) => reference(ctx, "reference", e),
        None => Some(Reference::One),
    };
    let policy_v = get("schedule.policy").and_then(|e| policy(ctx, "schedule.policy", e));
    let n_max = get("schedule.n_max").and_then(|e| match e.value.parse::<usize>() {
        Ok(n) if n >= 3 => Some(n),
        Ok(n) => {
            ctx.push("schedule.n_max", e, 0, format!("range violation: n_max must be at least 3, got {n}"));
            None
        }
        Err(_) => {
            ctx.push("schedule.n_max", e, 0, format!("expected a non-negative integer, found '{}'", e.value));
            None
        }
    });
    if let (Some(SchedulePolicy::Intrinsic { .. }), Some(r)) = (&policy_v, &reference_v) {
        if *r != Reference::One {
            let e = get("reference").expect("a non-default reference was written");
            ctx.push("reference", e, 0, "intrinsic cut-offs need reference = one".into());
        }
    }

    let evans_scale = match num(ctx, "evans.scale") {
        Some(Some(s)) => positive(ctx, "evans.scale", get("evans.scale")?, s),
        Some(None) => None,
        None => Some(1.0),
    };
    let evans_offset = num(ctx, "evans.offset").unwrap_or(Some(0.0));
    let base = match num(ctx, "evans.base") {
        Some(b) => b.map(Some),
        None => Some(None),
    };

    let grading_v = match get("grid.grading") {
        Some(e) => grading(ctx, "grid.grading", e),
        None => Some(GridGrading::Uniform),
    };
    let cells = match get("grid.cells") {
        Some(e) => match e.value.parse::<usize>() {
            Ok(c) if c >= 10 => Some(Some(c)),
            _ => {
                ctx.push("grid.cells", e, 0, format!("range violation: need an integer of at least 10, got '{}'", e.value));
                None
            }
        },
        None if matches!(grading_v, Some(GridGrading::Breakpoints { .. })) => Some(None),
        None => {
            missing(ctx, "grid.cells");
            None
        }
    };

    let oracle = match get("oracle.interval") {
        None => {
            for k in ["oracle.mesh", "oracle.weight", "oracle.coefficient", "oracle.potential", "oracle.left"] {
                if let Some(e) = get(k) {
                    ctx.push(k, e, 0, "oracle keys need oracle.interval".into());
                }
            }
            Some(None)
        }
        Some(e) => {
            let iv = interval(ctx, "oracle.interval", e);
            let mesh = match num(ctx, "oracle.mesh") {
                Some(Some(h)) => positive(ctx, "oracle.mesh", get("oracle.mesh")?, h),
                Some(None) => None,
                None => {
                    missing(ctx, "oracle.mesh");
                    None
                }
            };
            let opt = |ctx: &mut Ctx, k: &str| match get(k) {
                Some(e) => profile(ctx, k, e, 0, &e.value).map(Some),
                None => Some(None),
            };
            let w = opt(ctx, "oracle.weight");
            let c = opt(ctx, "oracle.coefficient");
            let p = opt(ctx, "oracle.potential");
            let l = match get("oracle.left") {
                Some(e) => left(ctx, "oracle.left", e).map(|(b, _)| Some(b)),
                None => Some(None),
            };
            match (iv, mesh, w, c, p, l) {
                (Some(interval), Some(mesh), Some(weight), Some(coefficient), Some(potential), Some(left)) => {
                    Some(Some(OracleConfig { interval, mesh, weight, coefficient, potential, left }))
                }
                _ => None,
            }
        }
    };
    let output = get("outputs.directory").map(|e| PathBuf::from(&e.value));

    let (left, robin_from_reference) = left_v?;
    Some(ScenarioConfig {
        name: name?,
        interval: interval_v?,
        weight: weight?,
        coefficient: coefficient?,
        potential: potential?,
        shift: shift?,
        left,
        robin_from_reference,
        mirrored: mirrored?,
        lambdas: lambdas?,
        eigenfunction: eigen?,
        reference: reference_v?,
        policy: policy_v?,
        n_max: n_max?,
        evans_scale: evans_scale?,
        evans_offset: evans_offset?,
        base: base?,
        cells: cells?,
        grading: grading_v?,
        oracle: oracle?,
        output,
        echo,
    })
}

impl ScenarioConfig {
    pub fn grid(&self) -> shnol_core::Result<Grid> {
        let (lo, hi) = self.interval;
        match self.grading {
            GridGrading::Uniform => make_graded_grid(lo, hi, self.cells.unwrap_or(1000), Grading::Uniform),
            GridGrading::Geometric(r) => make_graded_grid(lo, hi, self.cells.unwrap_or(1000), Grading::Geometric(r)),
            GridGrading::Breakpoints { fine, halo, growth, max_cell } => {
                let breaks: Vec<f64> =
                    (1..=self.n_max).filter_map(|n| self.policy.nominal(n)).flat_map(|(r, big_r)| [r, big_r]).collect();
                make_breakpoint_grid(lo, hi, &breaks, fine, halo, growth, max_cell)
            }
        }
    }

    fn oracle_spec(&self) -> shnol_core::Result<Option<OperatorSpec>> {
        let Some(o) = &self.oracle else { return Ok(None) };
        let (lo, hi) = o.interval;
        let grid = make_graded_grid(lo, hi, ((hi - lo) / o.mesh).round().max(2.0) as usize, Grading::Uniform)?;
        let spec = OperatorSpec::builder(&grid)
            .weight(o.weight.clone().unwrap_or_else(|| self.weight.clone()))
            .coefficient(o.coefficient.clone().unwrap_or_else(|| self.coefficient.clone()))
            .potential(o.potential.clone().unwrap_or_else(|| self.potential.clone()))
            .left(o.left.unwrap_or(self.left))
            .build()?;
        Ok(Some(spec))
    }

    /// The oracle operator truncated at `x_hi` with its configured mesh.
    pub fn oracle_truncated(&self, x_hi: f64) -> shnol_core::Result<Option<OperatorSpec>> {
        let Some(spec) = self.oracle_spec()? else { return Ok(None) };
        let lo = spec.x_lo();
        let mesh = self.oracle.as_ref().map_or(1e-2, |o| o.mesh);
        let grid = make_graded_grid(lo, x_hi, ((x_hi - lo) / mesh).round().max(2.0) as usize, Grading::Uniform)?;
        spec.on_grid(&grid).map(Some)
    }

    pub fn to_scenario(&self, lambda: f64) -> shnol_core::Result<Scenario> {
        let spec = OperatorSpec::builder(&self.grid()?)
            .weight(self.weight.clone())
            .coefficient(self.coefficient.clone())
            .potential(self.potential.clone())
            .shift(self.shift.clone())
            .left(self.left)
            .mirrored(self.mirrored)
            .build()?;
        Ok(Scenario {
            name: self.name.clone(),
            spec,
            lambda,
            eigenfunction: self.eigenfunction.clone(),
            reference: self.reference.clone(),
            robin_from_reference: self.robin_from_reference,
            evans_scale: self.evans_scale,
            evans_offset: self.evans_offset,
            base: self.base,
            policy: self.policy.clone(),
            n_max: self.n_max,
            oracle: self.oracle_spec()?,
        })
    }
}

/// The shipped config of a built-in scenario.
pub fn builtin_text(name: &str) -> Option<&'static str> {
    match name {
        "r2-parabolic" => Some(include_str!("../scenarios/r2-parabolic.conf")),
        "bessel-4d" => Some(include_str!("../scenarios/bessel-4d.conf")),
        "hyperbolic" => Some(include_str!("../scenarios/hyperbolic.conf")),
        "flat-shnol" => Some(include_str!("../scenarios/flat-shnol.conf")),
        _ => None,
    }
}
