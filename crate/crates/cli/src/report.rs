//! Report bundles and their CSV, SVG and provenance renderings.
//!
//! Byte output depends only on the config and the crate version.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use shnol_core::grid::LogQuantity;
use shnol_core::shnol::{refinement_changes, run_pipeline, ShnolRecord, ShnolReport};

use crate::config::ScenarioConfig;

pub const CSV_HEADER: [&str; 12] = [
    "n", "r_n", "R_n", "energy_a", "log_norm", "max_ratio", "cond_i", "cond_ii", "gen_weyl", "residual", "l2_u_An",
    "grad_terms",
];

/// Ratio columns compared under `--mesh-halve`, in the order of
/// [`refinement_changes`].
pub const CHANGE_COLUMNS: [&str; 5] = ["rel_cond_i", "rel_cond_ii", "rel_gen_weyl", "rel_max_ratio", "rel_residual"];

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub lambda: Option<f64>,
    pub mesh_halve: bool,
}

#[derive(Debug, Clone)]
pub struct MeshInfo {
    pub nodes: usize,
    pub min_width: f64,
    pub max_width: f64,
}

#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub config: ScenarioConfig,
    pub mesh: MeshInfo,
    pub reports: Vec<ShnolReport>,
    /// Reports on the halved mesh, index-aligned with `reports`.
    pub refined: Option<Vec<ShnolReport>>,
}

impl ReportBundle {
    pub fn certified(&self) -> bool {
        self.reports.iter().all(ShnolReport::certified)
    }

    /// Output file stem for the report at `index`.
    pub fn stem(&self, index: usize) -> String {
        if self.reports.len() == 1 {
            self.config.name.clone()
        } else {
            format!("{}_lambda_{}", self.config.name, self.reports[index].lambda)
        }
    }
}

pub fn run(config: &ScenarioConfig, opts: RunOptions) -> shnol_core::Result<ReportBundle> {
    let lambdas = opts.lambda.map_or_else(|| config.lambdas.clone(), |l| vec![l]);
    let grid = config.grid()?;
    let widths = grid.nodes().windows(2).map(|w| w[1] - w[0]);
    let mesh = MeshInfo {
        nodes: grid.len(),
        min_width: widths.clone().fold(f64::INFINITY, f64::min),
        max_width: widths.fold(0.0, f64::max),
    };
    let mut reports = Vec::with_capacity(lambdas.len());
    let mut refined = opts.mesh_halve.then(Vec::new);
    for &lambda in &lambdas {
        let sc = config.to_scenario(lambda)?;
        reports.push(run_pipeline(&sc)?);
        if let Some(r) = refined.as_mut() {
            r.push(run_pipeline(&sc.refined()?)?);
        }
    }
    Ok(ReportBundle { config: config.clone(), mesh, reports, refined })
}

/// Twelve significant digits. Magnitudes beyond the f64 range are written
/// from the logarithm so nothing overflows.
pub fn fmt_log(q: LogQuantity) -> String {
    if q.is_zero() {
        return fmt_f64(0.0);
    }
    let ln = q.ln();
    if ln.abs() < 700.0 || !ln.is_finite() {
        return fmt_f64(q.value());
    }
    let sign = if q.sign < 0 { "-" } else { "" };
    let l10 = ln / std::f64::consts::LN_10;
    let e10 = l10.floor();
    let text = format!("{:.11e}", 10f64.powf(l10 - e10));
    let (mantissa, exp) = text.split_once('e').expect("exponent form");
    let exp: i64 = exp.parse().expect("integer exponent");
    format!("{sign}{mantissa}e{}", exp + e10 as i64)
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.11e}")
}

/// A CSV number split into mantissa and decimal exponent, so values beyond
/// the f64 range survive a round trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decimal {
    pub mantissa: f64,
    pub exp10: i64,
}

impl Decimal {
    pub fn parse(s: &str) -> Option<Self> {
        match s.split_once(['e', 'E']) {
            Some((m, e)) => Some(Decimal { mantissa: m.parse().ok()?, exp10: e.parse().ok()? }),
            None => Some(Decimal { mantissa: s.parse().ok()?, exp10: 0 }),
        }
    }

    pub fn ln(self) -> f64 {
        self.mantissa.abs().ln() + self.exp10 as f64 * std::f64::consts::LN_10
    }

    pub fn to_f64(self) -> f64 {
        format!("{}e{}", self.mantissa, self.exp10).parse().unwrap_or(f64::NAN)
    }

    pub fn format(self) -> String {
        format!("{:.11e}", self.mantissa).split_once('e').map_or_else(String::new, |(m, e)| {
            let e: i64 = e.parse().unwrap_or(0);
            format!("{m}e{}", e + self.exp10)
        })
    }
}

fn row(r: &ShnolRecord) -> Vec<String> {
    vec![
        r.n.to_string(),
        fmt_f64(r.r_n),
        fmt_f64(r.big_r_n),
        fmt_log(r.energy_a),
        fmt_f64(r.norm.ln()),
        fmt_f64(r.max_ratio),
        fmt_log(r.cond_i),
        fmt_log(r.cond_ii),
        fmt_log(r.gen_weyl),
        fmt_f64(r.residual),
        fmt_log(r.l2_u_an()),
        fmt_log(r.grad_terms),
    ]
}

/// Per-record relative changes on the halved mesh, in [`CHANGE_COLUMNS`] order.
fn changes(coarse: &ShnolRecord, fine: &ShnolReport) -> Vec<String> {
    let columns: [fn(&ShnolRecord) -> f64; 5] =
        [|r| r.cond_i.ln(), |r| r.cond_ii.ln(), |r| r.gen_weyl.ln(), |r| r.max_ratio.ln(), |r| r.residual.ln()];
    let other = fine.records.iter().find(|b| b.n == coarse.n);
    columns
        .iter()
        .map(|f| match other {
            Some(b) => fmt_f64((f(b) - f(coarse)).exp_m1().abs()),
            None => fmt_f64(f64::NAN),
        })
        .collect()
}

pub fn csv_text(report: &ShnolReport, refined: Option<&ShnolReport>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if refined.is_some() {
        header.extend(CHANGE_COLUMNS);
    }
    w.write_record(&header).expect("in-memory write");
    for r in &report.records {
        let mut fields = row(r);
        if let Some(fine) = refined {
            fields.extend(changes(r, fine));
        }
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Header and rows of an emitted CSV.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<Decimal>>), String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let row = rec
            .iter()
            .map(|s| if s == "NaN" { Some(Decimal { mantissa: f64::NAN, exp10: 0 }) } else { Decimal::parse(s) })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| format!("non-numeric field in {rec:?}"))?;
        rows.push(row);
    }
    Ok((header, rows))
}

const SERIES: [(&str, &str); 4] =
    [("log cond_i", "#1f77b4"), ("log cond_ii", "#d62728"), ("log gen_weyl", "#2ca02c"), ("log residual", "#9467bd")];

/// Line plot of the four decay diagnostics against n.
pub fn svg_text(report: &ShnolReport) -> String {
    let data: Vec<Vec<(f64, f64)>> = [
        |r: &ShnolRecord| r.cond_i.ln(),
        |r: &ShnolRecord| r.cond_ii.ln(),
        |r: &ShnolRecord| r.gen_weyl.ln(),
        |r: &ShnolRecord| r.residual.ln(),
    ]
    .iter()
    .map(|f| report.records.iter().map(|r| (r.n as f64, f(r))).collect())
    .collect();
    let pts = data.iter().flatten().filter(|p| p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        (y0, y1) = (y0 - 0.5, y1 + 0.5);
    }
    let (w, h, left, right, top, bottom) = (720.0, 480.0, 80.0, 170.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{} at lambda = {}</text>"#,
        left + pw / 2.0,
        report.name,
        report.lambda
    );
    let _ = writeln!(
        s,
        r#"<path d="M{left} {top} V{} H{}" fill="none" stroke="black"/>"#,
        top + ph,
        left + pw
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">{xv:.1}</text>"#,
            sx(xv),
            top + ph + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{yv:.3}</text>"#,
            left - 6.0,
            sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">n</text>"#,
        left + pw / 2.0,
        h - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 18 {:.2})">natural log</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, ((label, color), series)) in SERIES.iter().zip(&data).enumerate() {
        // Non-finite values break the line rather than being dropped silently.
        let mut d = String::new();
        let mut pen_down = false;
        for &(x, y) in series {
            if y.is_finite() {
                let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, sx(x), sy(y));
                pen_down = true;
            } else {
                pen_down = false;
            }
        }
        if !d.is_empty() {
            let _ = writeln!(
                s,
                r#"<path class="series" data-label="{label}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                d.trim_end()
            );
        }
        let ly = top + 16.0 * k as f64 + 8.0;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<path d="M{lx} {ly} h20" stroke="{color}" stroke-width="2"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">{label}</text>"#,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Config echo, mesh, versions and the verdict table.
pub fn provenance_text(bundle: &ReportBundle, index: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "shnol {} (shnol-core {})", env!("CARGO_PKG_VERSION"), shnol_core::VERSION);
    let _ = writeln!(s, "config:");
    for (k, v) in &bundle.config.echo {
        let _ = writeln!(s, "  {k} = {v}");
    }
    let m = &bundle.mesh;
    let _ = writeln!(s, "mesh: {} nodes, cell widths {:.6e} to {:.6e}", m.nodes, m.min_width, m.max_width);
    let report = &bundle.reports[index];
    let _ = write!(s, "{report}");
    if let Some(fine) = bundle.refined.as_ref().map(|f| &f[index]) {
        let _ = writeln!(s, "mesh halving, largest relative change per column:");
        for (name, change) in refinement_changes(report, fine) {
            let _ = writeln!(s, "  {name}: {change:.3e}");
        }
    }
    s
}

/// Write `<stem>.csv`, `<stem>.svg` and `<stem>.txt` for every report.
pub fn emit(bundle: &ReportBundle, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (i, report) in bundle.reports.iter().enumerate() {
        let stem = bundle.stem(i);
        let refined = bundle.refined.as_ref().map(|f| &f[i]);
        for (ext, text) in
            [("csv", csv_text(report, refined)), ("svg", svg_text(report)), ("txt", provenance_text(bundle, i))]
        {
            let path = dir.join(format!("{stem}.{ext}"));
            std::fs::write(&path, text)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn emit_csv(bundle: &ReportBundle, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, csv_text(&bundle.reports[0], bundle.refined.as_ref().map(|f| &f[0])))
}

pub fn emit_svg(bundle: &ReportBundle, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, svg_text(&bundle.reports[0]))
}
