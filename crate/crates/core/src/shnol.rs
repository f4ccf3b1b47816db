//! Shnol-type diagnostics along a cut-off sequence.
//!
//! Every quantity is computed window by window: for each record index n the
//! cut-offs ψ_{n−1}, ψ_n, ψ_{n+1} of a [`CutoffSequence`] cut the candidate
//! eigenfunction u, and the growth conditions compare what lives on the
//! window A_n = [r_{n−1}, R_{n+1}] with the mass ‖ψ_n u‖. Norms are kept in
//! log form throughout so parabolic weights like e^{2t} never overflow.
//!
//! With a positive reference h the sequence carries φ_n = ψ_n h, so
//! φ_n u/h = ψ_n u and the energy of ψ_n is measured in the transformed
//! measure μ = h² m.

use std::fmt;
use std::thread;

use crate::cutoff::{
    check_admissibility, criticality_test, evans_from_field, form_energy_log, generate_schedule,
    intrinsic_cutoffs, AdmissibilityReport, CriticalityReport, Cutoff, CutoffSequence, EvansPotential, SchedulePolicy,
};
use crate::error::{Error, Result};
use crate::grid::{cells_for_levels, integrate_split, lerp, Field, GridFunction, LogQuantity};
use crate::operator::{
    discretize, ground_state_transform_field, harmonic_defect, DiscreteOperator, LeftBoundary, OperatorSpec,
};
use crate::profile::Profile;
use crate::special::{minimal_growth, shoot, ShootingConfig};

/// Relative tolerance of the integration-by-parts cross-check.
pub const IDENTITY_TOLERANCE: f64 = 1e-6;
/// Slope threshold separating decaying and growing trends from bounded ones.
pub const TREND_THRESHOLD: f64 = 0.1;
/// Largest tail growth rate ρ still classified as subexponential.
pub const SUBEXPONENTIAL_RATE: f64 = 0.05;

// ---------------------------------------------------------------- records

/// All per-window quantities for one record index n.
#[derive(Debug, Clone, PartialEq)]
pub struct ShnolRecord {
    pub n: usize,
    pub r_n: f64,
    pub big_r_n: f64,
    /// ∫ a ψ_n′² dμ.
    pub energy_a: LogQuantity,
    /// ‖ψ_n u‖ in L²(m).
    pub norm: LogQuantity,
    /// max over the window nodes of |u/h|.
    pub max_ratio: f64,
    /// ‖u‖ in L²(A_n, m), squared.
    pub l2_u_an_sq: LogQuantity,
    /// ∫ u² a (ψ′_{n−1}² + ψ′_n² + ψ′_{n+1}²) m.
    pub grad_terms: LogQuantity,
    /// ∫ u² a ψ_n′² m.
    pub grad_n: LogQuantity,
    pub cond_i: LogQuantity,
    pub cond_ii: LogQuantity,
    pub gen_weyl: LogQuantity,
    /// Dual-norm Weyl residual of ψ_n u/‖ψ_n u‖; NaN when no discretization exists.
    pub residual: f64,
    /// |Q(ψ_n u) − λ‖ψ_n u‖² − ∫ u² a ψ_n′² m| relative to the largest term.
    pub ibp_defect: f64,
}

impl ShnolRecord {
    pub fn l2_u_an(&self) -> LogQuantity {
        self.l2_u_an_sq.sqrt()
    }

    /// Relative disagreement between the stored ratios and their recomputation
    /// from the stored ingredients.
    pub fn consistency_defect(&self) -> f64 {
        let cond_i = LogQuantity::from_f64(self.max_ratio).div(self.norm).mul(self.energy_a.sqrt());
        let cond_ii = self.l2_u_an().add(self.grad_terms.sqrt()).div(self.norm);
        let gen_weyl = self.grad_n.div(self.norm.mul(self.norm));
        [(cond_i, self.cond_i), (cond_ii, self.cond_ii), (gen_weyl, self.gen_weyl)]
            .iter()
            .map(|(a, b)| if a.is_zero() && b.is_zero() { 0.0 } else { (a.ln() - b.ln()).abs() })
            .fold(0.0, f64::max)
    }
}

struct Inputs<'a> {
    spec: &'a OperatorSpec,
    spec_mu: &'a OperatorSpec,
    seq: &'a CutoffSequence,
    u: &'a Field,
    lambda: f64,
    op: Option<&'a DiscreteOperator>,
}

/// Cubic Hermite value and derivative inside cell i.
#[inline]
fn hermite(v: &[f64], d: &[f64], x: &[f64], i: usize, t: f64) -> (f64, f64) {
    if t == 0.0 {
        return (v[i], d[i]);
    }
    if t == 1.0 {
        return (v[i + 1], d[i + 1]);
    }
    let h = x[i + 1] - x[i];
    let (t2, t3) = (t * t, t * t * t);
    let value = (2.0 * t3 - 3.0 * t2 + 1.0) * v[i]
        + (t3 - 2.0 * t2 + t) * h * d[i]
        + (-2.0 * t3 + 3.0 * t2) * v[i + 1]
        + (t3 - t2) * h * d[i + 1];
    let slope = (6.0 * t2 - 6.0 * t) * (v[i] - v[i + 1]) / h + (3.0 * t2 - 4.0 * t + 1.0) * d[i] + (3.0 * t2 - 2.0 * t) * d[i + 1];
    (value, slope)
}

fn potential_in_cell(spec: &OperatorSpec, i: usize, t: f64) -> f64 {
    let x = spec.grid().nodes();
    if t == 0.0 {
        spec.total_potential(i)
    } else if t == 1.0 {
        spec.total_potential(i + 1)
    } else {
        spec.potential_at(x[i] + t * (x[i + 1] - x[i]))
    }
}

/// Largest |f/g| over a node range.
fn max_quotient(f: &[f64], g: &[f64], nodes: std::ops::Range<usize>) -> f64 {
    nodes.map(|k| (f[k] / g[k]).abs()).fold(0.0, f64::max)
}

fn window_cells(seq: &CutoffSequence, n: usize) -> (std::ops::Range<usize>, (f64, f64)) {
    let (lo, hi) = seq.annulus_levels(n);
    (cells_for_levels(seq.evans().levels(), lo, hi), (lo, hi))
}

fn sorted_cuts(psis: &[&Cutoff]) -> Vec<f64> {
    let mut cuts: Vec<f64> = psis.iter().flat_map(|p| [p.pair.r, p.pair.big_r]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts
}

/// ‖ψ_n u‖² in L²(m), log form.
fn cut_norm_sq(spec: &OperatorSpec, psi: &Cutoff, u: &Field) -> LogQuantity {
    let ev = psi.evans();
    let (g, lv) = (ev.grid(), ev.levels());
    let x = g.nodes();
    let (uv, du) = (u.value.values(), u.slope.values());
    integrate_split(g, psi.support_cells(), lv, &[psi.pair.r, psi.pair.big_r], spec.ln_m(), |i, t, _| {
        let v = hermite(uv, du, x, i, t).0 * psi.value_at_level(lerp(lv, i, t));
        v * v
    })
    .scale(spec.multiplicity())
}

fn record(inp: &Inputs<'_>, n: usize) -> Result<ShnolRecord> {
    let (spec, seq, u) = (inp.spec, inp.seq, inp.u);
    let ev = seq.evans();
    let g = ev.grid();
    let x = g.nodes();
    let (lv, ls) = (ev.levels(), ev.level_slope());
    let (uv, du) = (u.value.values(), u.slope.values());
    let mult = spec.multiplicity();
    let (prev, psi, next) = (seq.cutoff(n - 1), seq.cutoff(n), seq.cutoff(n + 1));
    let cuts_n = [psi.pair.r, psi.pair.big_r];

    let norm_sq = cut_norm_sq(spec, &psi, u);
    let grad_n = integrate_split(g, psi.annulus_cells(), lv, &cuts_n, spec.ln_p(), |i, t, mid| {
        (psi.dpsi_de(mid) * lerp(ls, i, t) * hermite(uv, du, x, i, t).0).powi(2)
    })
    .scale(mult);

    // Q(ψ_n u, ψ_n u) with the product rule applied to exact gradients.
    let support = psi.support_cells();
    let kinetic = integrate_split(g, support.clone(), lv, &cuts_n, spec.ln_p(), |i, t, mid| {
        let (v, d) = hermite(uv, du, x, i, t);
        let w = psi.dpsi_de(mid) * lerp(ls, i, t) * v + psi.value_at_level(lerp(lv, i, t)) * d;
        w * w
    });
    let potential = integrate_split(g, support, lv, &cuts_n, spec.ln_m(), |i, t, _| {
        let v = hermite(uv, du, x, i, t).0 * psi.value_at_level(lerp(lv, i, t));
        potential_in_cell(spec, i, t) * v * v
    });
    let boundary = LogQuantity::from_f64(spec.robin() * (psi.value(0) * uv[0]).powi(2));
    let q = kinetic.add(potential).add(boundary).scale(mult);
    let lam = norm_sq.scale(inp.lambda);
    let defect = q.sub(lam).sub(grad_n);
    let scale = [q, lam, grad_n].iter().map(|v| v.ln()).fold(f64::NEG_INFINITY, f64::max);
    let ibp_defect = if defect.is_zero() { 0.0 } else { (defect.ln() - scale).exp() };

    let energy_a = form_energy_log(inp.spec_mu, &psi)?;
    let h = seq.reference().value.values();
    let max_ratio = max_quotient(uv, h, seq.annulus_nodes(n));

    let (cells, (lo, hi)) = window_cells(seq, n);
    let l2_u_an_sq = integrate_split(g, cells.clone(), lv, &[lo, hi], spec.ln_m(), |i, t, mid| {
        if mid >= lo && mid <= hi {
            hermite(uv, du, x, i, t).0.powi(2)
        } else {
            0.0
        }
    })
    .scale(mult);
    let cuts = sorted_cuts(&[&prev, &psi, &next]);
    let grad_terms = integrate_split(g, cells, lv, &cuts, spec.ln_p(), |i, t, mid| {
        let s = lerp(ls, i, t);
        let sum: f64 = [&prev, &psi, &next].iter().map(|p| (p.dpsi_de(mid) * s).powi(2)).sum();
        hermite(uv, du, x, i, t).0.powi(2) * sum
    })
    .scale(mult);

    let norm = norm_sq.sqrt();
    let cond_i = LogQuantity::from_f64(max_ratio).div(norm).mul(energy_a.sqrt());
    let cond_ii = l2_u_an_sq.sqrt().add(grad_terms.sqrt()).div(norm);
    let gen_weyl = grad_n.div(norm_sq);

    let residual = match inp.op {
        Some(op) => {
            let w: Vec<f64> = (0..x.len()).map(|k| psi.value(k) * uv[k]).collect();
            op.weyl_residual(&GridFunction::new(g.clone(), w)?, inp.lambda)?
        }
        None => f64::NAN,
    };

    Ok(ShnolRecord {
        n,
        r_n: psi.pair.r,
        big_r_n: psi.pair.big_r,
        energy_a,
        norm,
        max_ratio,
        l2_u_an_sq,
        grad_terms,
        grad_n,
        cond_i,
        cond_ii,
        gen_weyl,
        residual,
        ibp_defect,
    })
}

/// Runs `f` over `items` on scoped worker threads; results keep item order.
fn par_map<T: Send, F: Fn(usize) -> T + Sync>(items: &[usize], f: F) -> Vec<T> {
    let workers = thread::available_parallelism().map_or(1, |k| k.get()).min(items.len()).max(1);
    if workers == 1 {
        return items.iter().map(|&k| f(k)).collect();
    }
    let mut out: Vec<Option<T>> = (0..items.len()).map(|_| None).collect();
    thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let f = &f;
                s.spawn(move || {
                    items.iter().enumerate().skip(w).step_by(workers).map(|(j, &k)| (j, f(k))).collect::<Vec<_>>()
                })
            })
            .collect();
        for handle in handles {
            for (j, v) in handle.join().expect("record worker panicked") {
                out[j] = Some(v);
            }
        }
    });
    out.into_iter().map(|v| v.expect("every record computed")).collect()
}

fn check_inputs(spec: &OperatorSpec, spec_mu: &OperatorSpec, seq: &CutoffSequence, u: &Field) -> Result<()> {
    let g = seq.evans().grid();
    if !spec.grid().same(g) || !spec_mu.grid().same(g) || !u.grid().same(g) {
        return Err(Error::GridMismatch);
    }
    if seq.len() < 3 {
        return Err(Error::RangeExhausted { feasible: seq.len() });
    }
    Ok(())
}

/// Records for every n with both neighbours present, in order of n.
///
/// `spec_mu` is the ground-state transform of `spec` by the sequence's
/// reference (or `spec` itself when the reference is 1). `op`, when given,
/// is the discretization of `spec` used for the residuals.
pub fn shnol_records(
    spec: &OperatorSpec,
    spec_mu: &OperatorSpec,
    seq: &CutoffSequence,
    u: &Field,
    lambda: f64,
    op: Option<&DiscreteOperator>,
) -> Result<Vec<ShnolRecord>> {
    check_inputs(spec, spec_mu, seq, u)?;
    let inp = Inputs { spec, spec_mu, seq, u, lambda, op };
    let ns: Vec<usize> = seq.record_indices().collect();
    par_map(&ns, |n| record(&inp, n)).into_iter().collect()
}

/// Condition (i) series with its verdict.
pub fn condition_i_series(
    spec: &OperatorSpec,
    spec_mu: &OperatorSpec,
    seq: &CutoffSequence,
    u: &Field,
) -> Result<(Vec<ShnolRecord>, Verdict)> {
    let records = shnol_records(spec, spec_mu, seq, u, 0.0, None)?;
    let verdict = growth_verdict(Condition::GrowthI, &records, |r| r.cond_i);
    Ok((records, verdict))
}

/// Condition (ii) series; the sequence must carry the reference 1.
pub fn condition_ii_series(spec: &OperatorSpec, seq: &CutoffSequence, u: &Field) -> Result<(Vec<ShnolRecord>, Verdict)> {
    let one = seq.reference().value.values().iter().all(|&v| v == 1.0);
    if !one {
        return Err(Error::InvalidParameter("condition (ii) needs the reference 1".into()));
    }
    let records = shnol_records(spec, spec, seq, u, 0.0, None)?;
    let verdict = growth_verdict(Condition::GrowthII, &records, |r| r.cond_ii);
    Ok((records, verdict))
}

/// ∫ u² a ψ_n′² m / ‖ψ_n u‖² per record, after confirming the
/// integration-by-parts identity at λ for every n.
pub fn gen_weyl_ratio(spec: &OperatorSpec, seq: &CutoffSequence, u: &Field, lambda: f64) -> Result<Vec<(usize, f64)>> {
    let records = shnol_records(spec, spec, seq, u, lambda, None)?;
    check_identity(&records)?;
    Ok(records.iter().map(|r| (r.n, r.gen_weyl.value())).collect())
}

/// Fails on the first record whose integration-by-parts defect exceeds the tolerance.
pub fn check_identity(records: &[ShnolRecord]) -> Result<()> {
    match records.iter().find(|r| !(r.ibp_defect <= IDENTITY_TOLERANCE)) {
        Some(r) => Err(Error::IdentityViolation { n: r.n, defect: r.ibp_defect, scale: 1.0 }),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------- trends and verdicts

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    GrowthI,
    GrowthII,
    GenWeylNecessary,
    HarnackEquivalence,
    Subexponential,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::GrowthI => "condition (i)",
            Self::GrowthII => "condition (ii)",
            Self::GenWeylNecessary => "gen-weyl-necessary",
            Self::HarnackEquivalence => "harnack-equivalence",
            Self::Subexponential => "subexponential",
        })
    }
}

/// Tail behaviour of a positive series. `rate` is the slope of ln y against
/// n and `power` the slope against ln n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trend {
    Decaying { rate: f64, power: f64 },
    Bounded,
    Growing,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Decaying { rate, power } => write!(f, "decaying(rate {rate:.4}, power {power:.4})"),
            Self::Bounded => write!(f, "bounded"),
            Self::Growing => write!(f, "growing"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub condition: Condition,
    pub trend: Option<Trend>,
    pub pass: bool,
    pub applicable: bool,
    pub note: String,
}

impl Verdict {
    fn inapplicable(condition: Condition, note: impl Into<String>) -> Self {
        Self { condition, trend: None, pass: false, applicable: false, note: note.into() }
    }

    pub fn label(&self) -> &'static str {
        match (self.applicable, self.pass) {
            (false, _) => "INAPPLICABLE",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.condition, self.label())?;
        if let Some(t) = self.trend {
            write!(f, " [{t}]")?;
        }
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// Least-squares slope of ys against xs.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len().min(ys.len()) as f64;
    if k < 2.0 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Classifies ln y over the tail half of the indices (at least three points).
/// An exact zero at the end counts as decaying with infinite rate.
pub fn fit_trend(ns: &[usize], ln_y: &[f64]) -> Option<Trend> {
    let len = ns.len().min(ln_y.len());
    if len < 3 {
        return None;
    }
    let k = len.div_ceil(2).max(3);
    let (ns, ln_y) = (&ns[len - k..len], &ln_y[len - k..len]);
    if ln_y[k - 1] == f64::NEG_INFINITY {
        return Some(Trend::Decaying { rate: f64::NEG_INFINITY, power: f64::NEG_INFINITY });
    }
    if ln_y.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let rate = log_slope(&xs, ln_y);
    let power = log_slope(&lx, ln_y);
    Some(if rate < -TREND_THRESHOLD || power < -TREND_THRESHOLD {
        Trend::Decaying { rate, power }
    } else if rate > TREND_THRESHOLD || power > TREND_THRESHOLD {
        Trend::Growing
    } else {
        Trend::Bounded
    })
}

fn series_trend(records: &[ShnolRecord], f: impl Fn(&ShnolRecord) -> f64) -> Option<Trend> {
    let ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    let ys: Vec<f64> = records.iter().map(f).collect();
    fit_trend(&ns, &ys)
}

/// PASS iff the tail of the selected ratio decays.
pub fn growth_verdict(condition: Condition, records: &[ShnolRecord], f: impl Fn(&ShnolRecord) -> LogQuantity) -> Verdict {
    match series_trend(records, |r| f(r).ln()) {
        Some(t) => Verdict {
            condition,
            trend: Some(t),
            pass: matches!(t, Trend::Decaying { .. }),
            applicable: true,
            note: String::new(),
        },
        None => Verdict::inapplicable(condition, format!("{} records, need three finite tail values", records.len())),
    }
}

// ---------------------------------------------------------------- Caccioppoli

/// Test functions for the pointwise Caccioppoli check, each normalized to unit
/// Q-norm before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// η_n = ψ_{n+1}(1 − ψ_{n−1}) itself.
    WindowBump,
    /// Gaussian centred on A_n with a quarter of its coordinate width.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaccioppoliReport {
    pub constants: Vec<(usize, f64)>,
    pub sup: f64,
    pub bounded: bool,
}

impl CaccioppoliReport {
    fn from_constants(constants: Vec<(usize, f64)>) -> Self {
        let sup = constants.iter().map(|c| c.1).fold(0.0, f64::max);
        let bounded = constants.iter().all(|c| c.1.is_finite());
        Self { constants, sup, bounded }
    }

    /// Growth of the supremum on a finer mesh stays below 5%.
    pub fn stable_under_refinement(&self, finer: &Self) -> bool {
        finer.bounded && self.bounded && finer.sup <= 1.05 * self.sup + 1e-300
    }
}

/// u/h with its derivative, the candidate in the transformed measure.
pub fn transformed_eigenfunction(u: &Field, h: &Field) -> Result<Field> {
    let (uv, du) = (u.value.values(), u.slope.values());
    let (hv, dh) = (h.value.values(), h.slope.values());
    let v: Vec<f64> = uv.iter().zip(hv).map(|(u, h)| u / h).collect();
    let d: Vec<f64> = (0..uv.len()).map(|k| (du[k] * hv[k] - uv[k] * dh[k]) / (hv[k] * hv[k])).collect();
    Field::new(GridFunction::new(u.grid().clone(), v)?, GridFunction::new(u.grid().clone(), d)?)
}

/// η_n = ψ_{n+1}(1 − ψ_{n−1}) at a level, with the branch selected by `mid`.
#[inline]
fn eta(prev: &Cutoff, next: &Cutoff, e: f64) -> f64 {
    next.value_at_level(e) * (1.0 - prev.value_at_level(e))
}

fn bump_field(seq: &CutoffSequence, n: usize) -> Result<Field> {
    let (prev, next) = (seq.cutoff(n - 1), seq.cutoff(n + 1));
    let g = seq.evans().grid();
    let lv = seq.evans().levels();
    let v: Vec<f64> = lv.iter().map(|&e| eta(&prev, &next, e)).collect();
    let d: Vec<f64> = (0..g.len())
        .map(|k| next.slope(k) * (1.0 - prev.value(k)) - next.value(k) * prev.slope(k))
        .collect();
    Field::new(GridFunction::new(g.clone(), v)?, GridFunction::new(g.clone(), d)?)
}

fn gaussian_field(seq: &CutoffSequence, n: usize) -> Result<(Field, f64, f64)> {
    let ev = seq.evans();
    let (lo, hi) = seq.annulus_levels(n);
    let (xa, xb) = (ev.x_at_level(lo)?, ev.x_at_level(hi)?);
    let (c, s) = (0.5 * (xa + xb), 0.25 * (xb - xa));
    let g = ev.grid();
    let v = GridFunction::from_fn(g, |x| (-0.5 * ((x - c) / s).powi(2)).exp())?;
    let d = GridFunction::from_fn(g, |x| -(x - c) / (s * s) * (-0.5 * ((x - c) / s).powi(2)).exp())?;
    Ok((Field::new(v, d)?, c, s))
}

/// ‖v‖²_Q for v supported in `cells`, in log form.
fn q_norm_sq_on(spec: &OperatorSpec, v: &Field, cells: std::ops::Range<usize>) -> Result<LogQuantity> {
    let g = spec.grid();
    let (vv, dv) = (v.value.values(), v.slope.values());
    let c = 1.0 + spec.semibound();
    let grad = integrate_split(g, cells.clone(), g.nodes(), &[], spec.ln_p(), |i, t, _| lerp(dv, i, t).powi(2));
    let mass = integrate_split(g, cells.clone(), g.nodes(), &[], spec.ln_m(), |i, t, _| {
        (potential_in_cell(spec, i, t) + c) * lerp(vv, i, t).powi(2)
    });
    let boundary = if cells.start == 0 { spec.robin() * vv[0] * vv[0] } else { 0.0 };
    let s = grad.add(mass).add(LogQuantity::from_f64(boundary)).scale(spec.multiplicity());
    if s.sign < 0 {
        return Err(Error::NegativeRadicand(s.value()));
    }
    Ok(s)
}

/// ∫ η_n² v² a u′² dμ with v given per cell position.
fn eta_energy(spec_mu: &OperatorSpec, seq: &CutoffSequence, n: usize, u: &Field, v: impl Fn(usize, f64) -> f64) -> LogQuantity {
    let ev = seq.evans();
    let (g, lv) = (ev.grid(), ev.levels());
    let x = g.nodes();
    let (prev, next) = (seq.cutoff(n - 1), seq.cutoff(n + 1));
    let (cells, _) = window_cells(seq, n);
    let cuts = sorted_cuts(&[&prev, &next]);
    let (uv, du) = (u.value.values(), u.slope.values());
    integrate_split(g, cells, lv, &cuts, spec_mu.ln_p(), |i, t, _| {
        let e = eta(&prev, &next, lerp(lv, i, t));
        let d = hermite(uv, du, x, i, t).1;
        (e * v(i, t) * d).powi(2)
    })
    .scale(spec_mu.multiplicity())
}

/// C(n) = ∫ η_n² v² a u′² dμ / ((2 + √(|λ| + ‖W‖))² max_{A_n} u²), maximized
/// over the test family with every v normalized to unit Q-norm.
pub fn caccioppoli_pointwise_check(
    spec_mu: &OperatorSpec,
    seq: &CutoffSequence,
    u_mu: &Field,
    lambda: f64,
    w_sup: f64,
    tests: &[TestFunction],
) -> Result<CaccioppoliReport> {
    check_inputs(spec_mu, spec_mu, seq, u_mu)?;
    let k = (2.0 + (lambda.abs() + w_sup).sqrt()).powi(2);
    let x = seq.evans().grid().nodes();
    let ns: Vec<usize> = seq.record_indices().collect();
    let constants = par_map(&ns, |n| -> Result<(usize, f64)> {
        let max_u = seq.annulus_nodes(n).map(|j| u_mu.value.values()[j].abs()).fold(0.0, f64::max);
        if max_u == 0.0 {
            return Ok((n, 0.0));
        }
        let mut best = f64::NEG_INFINITY;
        for test in tests {
            let (lhs, qn) = match test {
                TestFunction::WindowBump => {
                    let (prev, next) = (seq.cutoff(n - 1), seq.cutoff(n + 1));
                    let lv = seq.evans().levels();
                    let lhs = eta_energy(spec_mu, seq, n, u_mu, |i, t| eta(&prev, &next, lerp(lv, i, t)));
                    (lhs, q_norm_sq_on(spec_mu, &bump_field(seq, n)?, window_cells(seq, n).0)?)
                }
                TestFunction::Gaussian => {
                    let (field, c, s) = gaussian_field(seq, n)?;
                    let lhs = eta_energy(spec_mu, seq, n, u_mu, |i, t| {
                        let y = x[i] + t * (x[i + 1] - x[i]);
                        (-0.5 * ((y - c) / s).powi(2)).exp()
                    });
                    let nodes = seq.evans().grid().node_range(c - 40.0 * s, c + 40.0 * s);
                    let cells = nodes.start.saturating_sub(1)..nodes.end.min(x.len() - 1);
                    (lhs, q_norm_sq_on(spec_mu, &field, cells)?)
                }
            };
            if !lhs.is_zero() {
                best = best.max(lhs.ln() - qn.ln() - k.ln() - 2.0 * max_u.ln());
            }
        }
        Ok((n, best.exp()))
    });
    Ok(CaccioppoliReport::from_constants(constants.into_iter().collect::<Result<_>>()?))
}

/// ∫ η_n² a u′² dμ / (‖u‖_{L²(A_n, μ)} + (∫ u² (ψ′_{n−1}² + ψ′_{n+1}²) a dμ)^{1/2}).
pub fn caccioppoli_l2_check(spec_mu: &OperatorSpec, seq: &CutoffSequence, u_mu: &Field) -> Result<CaccioppoliReport> {
    check_inputs(spec_mu, spec_mu, seq, u_mu)?;
    let ev = seq.evans();
    let (g, lv, ls) = (ev.grid(), ev.levels(), ev.level_slope());
    let x = g.nodes();
    let (uv, du) = (u_mu.value.values(), u_mu.slope.values());
    let mult = spec_mu.multiplicity();
    let ns: Vec<usize> = seq.record_indices().collect();
    let constants = par_map(&ns, |n| {
        let (prev, next) = (seq.cutoff(n - 1), seq.cutoff(n + 1));
        let lhs = eta_energy(spec_mu, seq, n, u_mu, |_, _| 1.0);
        let (cells, (lo, hi)) = window_cells(seq, n);
        let mass = integrate_split(g, cells.clone(), lv, &[lo, hi], spec_mu.ln_m(), |i, t, mid| {
            if mid >= lo && mid <= hi {
                hermite(uv, du, x, i, t).0.powi(2)
            } else {
                0.0
            }
        })
        .scale(mult);
        let cuts = sorted_cuts(&[&prev, &next]);
        let grad = integrate_split(g, cells, lv, &cuts, spec_mu.ln_p(), |i, t, mid| {
            let s = lerp(ls, i, t);
            let w = (prev.dpsi_de(mid) * s).powi(2) + (next.dpsi_de(mid) * s).powi(2);
            hermite(uv, du, x, i, t).0.powi(2) * w
        })
        .scale(mult);
        let denom = mass.sqrt().add(grad.sqrt());
        (n, if lhs.is_zero() { 0.0 } else { lhs.div(denom).value() })
    });
    Ok(CaccioppoliReport::from_constants(constants))
}

// ---------------------------------------------------------------- Harnack

#[derive(Debug, Clone, PartialEq)]
pub struct HarnackReport {
    /// sup/inf of |u| on A_n.
    pub ratios: Vec<(usize, f64)>,
    pub verdict: Verdict,
}

/// Harnack ratios on the windows and the co-occurrence of small residuals
/// with small gen-Weyl ratios, judged by their fitted trends.
pub fn harnack_equivalence(seq: &CutoffSequence, u: &GridFunction, records: &[ShnolRecord]) -> HarnackReport {
    let c = Condition::HarnackEquivalence;
    let uv = u.values();
    let mut ratios = Vec::with_capacity(records.len());
    for r in records {
        let nodes = seq.annulus_nodes(r.n);
        let w = &uv[nodes.clone()];
        let positive = w.iter().all(|&v| v > 0.0);
        let negative = w.iter().all(|&v| v < 0.0);
        if w.is_empty() || !(positive || negative) {
            return HarnackReport {
                ratios,
                verdict: Verdict::inapplicable(c, format!("u vanishes or changes sign on A_{}", r.n)),
            };
        }
        let sup = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let inf = w.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        ratios.push((r.n, sup / inf));
    }
    if records.iter().any(|r| !r.residual.is_finite()) {
        return HarnackReport { ratios, verdict: Verdict::inapplicable(c, "dual-norm residual unavailable on this grid") };
    }
    let weyl = series_trend(records, |r| r.gen_weyl.ln());
    let res = series_trend(records, |r| r.residual.ln());
    let verdict = match (weyl, res) {
        (Some(a), Some(b)) => {
            let decays = |t: Trend| matches!(t, Trend::Decaying { .. });
            let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
            Verdict {
                condition: c,
                trend: Some(a),
                pass: decays(a) == decays(b),
                applicable: true,
                note: format!("residual trend {b}, max Harnack ratio {max_ratio:.4}"),
            }
        }
        _ => Verdict::inapplicable(c, "too few records for a trend"),
    };
    HarnackReport { ratios, verdict }
}

// ---------------------------------------------------------------- subexponential growth

#[derive(Debug, Clone, PartialEq)]
pub struct SubexponentialReport {
    /// max over the tail half of ln J(n)/n.
    pub rho: f64,
    /// min over the tail of J(n+3)/J(n−1).
    pub min_tail_ratio: f64,
    pub subexponential: bool,
}

impl SubexponentialReport {
    pub fn verdict(&self) -> Verdict {
        Verdict {
            condition: Condition::Subexponential,
            trend: None,
            pass: self.subexponential,
            applicable: true,
            note: format!("rho {:.4}, min J(n+3)/J(n-1) {:.4}", self.rho, self.min_tail_ratio),
        }
    }
}

pub fn subexponential_diagnostic(j: &[f64]) -> Result<SubexponentialReport> {
    if let Some(k) = j.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(if j[k].is_finite() { Error::NonPositive(k) } else { Error::NonFinite(k) });
    }
    let ln: Vec<f64> = j.iter().map(|v| v.ln()).collect();
    subexponential_diagnostic_log(&ln)
}

/// The same diagnostic for a sequence given by ln J(1), ln J(2), ….
pub fn subexponential_diagnostic_log(ln_j: &[f64]) -> Result<SubexponentialReport> {
    let len = ln_j.len();
    if len < 8 {
        return Err(Error::TooShort(len));
    }
    if let Some(k) = ln_j.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(k));
    }
    let start = len / 2 + 1;
    let rho = (start..=len).map(|n| ln_j[n - 1] / n as f64).fold(f64::NEG_INFINITY, f64::max);
    let min_tail_ratio =
        (start.max(2)..=len - 3).map(|n| (ln_j[n + 2] - ln_j[n - 2]).exp()).fold(f64::INFINITY, f64::min);
    Ok(SubexponentialReport { rho, min_tail_ratio, subexponential: rho <= SUBEXPONENTIAL_RATE })
}

// ---------------------------------------------------------------- scenarios

#[derive(Debug, Clone, PartialEq)]
pub enum Eigenfunction {
    /// Shoot from the left edge at λ; `du0 = None` matches the reference's
    /// logarithmic derivative.
    Shooting { u0: f64, du0: Option<f64>, step: f64 },
    ClosedForm(Profile),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    One,
    /// Minimal-growth solution at λ = 0.
    Auto,
    Supplied(Profile),
}

/// Everything a pipeline run needs.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: OperatorSpec,
    pub lambda: f64,
    pub eigenfunction: Eigenfunction,
    pub reference: Reference,
    /// Replace the left boundary by the Robin condition the reference satisfies.
    pub robin_from_reference: bool,
    pub evans_scale: f64,
    pub evans_offset: f64,
    /// Base cut of the Evans potential (or centre of the intrinsic distance);
    /// the left edge when absent.
    pub base: Option<f64>,
    pub policy: SchedulePolicy,
    pub n_max: usize,
    pub oracle: Option<OperatorSpec>,
}

impl Scenario {
    /// The same scenario on the uniformly halved mesh with half the shooting step.
    pub fn refined(&self) -> Result<Scenario> {
        let mut out = self.clone();
        out.spec = self.spec.on_grid(&self.spec.grid().halved())?;
        if let Eigenfunction::Shooting { step, .. } = &mut out.eigenfunction {
            *step *= 0.5;
        }
        Ok(out)
    }

    pub fn with_lambda(&self, lambda: f64) -> Scenario {
        Scenario { lambda, ..self.clone() }
    }
}

fn profile_field(p: &Profile, spec: &OperatorSpec) -> Result<Field> {
    let g = spec.grid();
    Field::new(GridFunction::from_fn(g, |x| p.eval(x))?, GridFunction::from_fn(g, |x| p.deriv(x))?)
}

fn build_reference(sc: &Scenario) -> Result<Field> {
    let spec = &sc.spec;
    let g = spec.grid();
    match &sc.reference {
        Reference::One => Ok(Field::constant(g, 1.0)),
        Reference::Supplied(p) => profile_field(p, spec),
        Reference::Auto => {
            let far = g.hi() + 0.25 * (g.hi() - g.lo());
            minimal_growth(spec, 0.0, far, g, g.max_width().min(1e-2))?.field()
        }
    }
}

/// Distance from λ to the discrete spectrum of the oracle and the local
/// eigenvalue spacing that bounds what the oracle can resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleDistance {
    pub truncation: f64,
    pub mesh: f64,
    pub nearest: f64,
    pub distance: f64,
    pub resolution: f64,
}

impl OracleDistance {
    pub fn within_resolution(&self) -> bool {
        self.distance <= self.resolution
    }
}

/// Nearest eigenvalue of the discretized oracle and the larger of the gaps to
/// its two neighbours.
pub fn oracle_distance(oracle: &OperatorSpec, lambda: f64) -> Result<OracleDistance> {
    let op = discretize(oracle)?;
    let j = op.count_below(lambda);
    let dim = op.dim();
    let (below, above) = op.bracket(lambda);
    let (idx, nearest) = match (below, above) {
        (Some(a), Some(b)) if lambda - a <= b - lambda => (j - 1, a),
        (_, Some(b)) => (j, b),
        (Some(a), None) => (j - 1, a),
        (None, None) => return Err(Error::InvalidParameter("oracle has no unknowns".into())),
    };
    let mut gap: f64 = 0.0;
    if idx > 0 {
        gap = gap.max(nearest - op.eigenvalue(idx - 1));
    }
    if idx + 1 < dim {
        gap = gap.max(op.eigenvalue(idx + 1) - nearest);
    }
    let g = oracle.grid();
    Ok(OracleDistance { truncation: g.hi(), mesh: g.max_width(), nearest, distance: (nearest - lambda).abs(), resolution: gap })
}

/// Everything a pipeline run produces.
#[derive(Debug, Clone)]
pub struct ShnolReport {
    pub name: String,
    pub lambda: f64,
    pub policy: String,
    pub pairs: Vec<(f64, f64)>,
    pub truncated: bool,
    pub requested: usize,
    pub records: Vec<ShnolRecord>,
    /// ln ‖ψ_n u‖ for every cut-off n = 1..N.
    pub ln_j: Vec<f64>,
    pub admissibility: AdmissibilityReport,
    pub cond_i: Verdict,
    pub cond_ii: Verdict,
    pub gen_weyl: Verdict,
    pub harnack: HarnackReport,
    pub subexponential: std::result::Result<SubexponentialReport, String>,
    pub caccioppoli_pointwise: CaccioppoliReport,
    pub caccioppoli_l2: CaccioppoliReport,
    /// Empirical constant C in |u| ≤ C h from the base cut on.
    pub bp_constant: f64,
    pub harmonic_defect: f64,
    pub max_identity_defect: f64,
    pub oracle: Option<OracleDistance>,
    pub notes: Vec<String>,
}

impl ShnolReport {
    /// Whether either growth condition certifies λ.
    pub fn certified(&self) -> bool {
        self.cond_i.pass || self.cond_ii.pass
    }

    /// Certified verdicts must agree with the oracle.
    pub fn sound(&self) -> bool {
        !self.certified() || self.oracle.as_ref().map_or(true, OracleDistance::within_resolution)
    }
}

impl fmt::Display for ShnolReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {} at lambda = {}", self.name, self.lambda)?;
        writeln!(
            f,
            "schedule {}: {} of {} pairs{}",
            self.policy,
            self.pairs.len(),
            self.requested,
            if self.truncated { " (truncated)" } else { "" }
        )?;
        for v in [&self.cond_i, &self.cond_ii, &self.gen_weyl, &self.harnack.verdict] {
            writeln!(f, "  {v}")?;
        }
        match &self.subexponential {
            Ok(s) => writeln!(f, "  {}", s.verdict())?,
            Err(e) => writeln!(f, "  subexponential: INAPPLICABLE ({e})")?,
        }
        writeln!(
            f,
            "  admissibility: {} (structure {}, Hardy max/min {:.4})",
            if self.admissibility.passes { "PASS" } else { "FAIL" },
            if self.admissibility.structure_holds() { "exact" } else { "violated" },
            self.admissibility.hardy_ratio
        )?;
        writeln!(f, "  Caccioppoli sup: pointwise {:.4e}, L2 {:.4e}", self.caccioppoli_pointwise.sup, self.caccioppoli_l2.sup)?;
        writeln!(f, "  |u| <= C h with C = {:.6e}", self.bp_constant)?;
        writeln!(f, "  max integration-by-parts defect {:.3e}", self.max_identity_defect)?;
        if let Some(o) = &self.oracle {
            writeln!(
                f,
                "  oracle (X = {}, mesh {:.3e}): nearest {:.6}, distance {:.3e}, resolution {:.3e}",
                o.truncation, o.mesh, o.nearest, o.distance, o.resolution
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

/// Builds u, the reference, the Evans potential and the schedule, then every
/// diagnostic. Component failures propagate as errors.
pub fn run_pipeline(sc: &Scenario) -> Result<ShnolReport> {
    if !sc.lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be finite, got {}", sc.lambda)));
    }
    let mut notes = Vec::new();
    let h = build_reference(sc)?;
    let spec = if sc.robin_from_reference {
        let (h0, dh0) = (h.value.values()[0], h.slope.values()[0]);
        let beta = sc.spec.ln_p()[0].exp() * dh0 / h0;
        sc.spec.to_builder().left(LeftBoundary::Robin(beta)).build()?
    } else {
        sc.spec.clone()
    };
    let g = spec.grid();
    let u = match &sc.eigenfunction {
        Eigenfunction::ClosedForm(p) => profile_field(p, &spec)?,
        Eigenfunction::Shooting { u0, du0, step } => {
            let du0 = du0.unwrap_or(u0 * h.slope.values()[0] / h.value.values()[0]);
            shoot(&spec, sc.lambda, &ShootingConfig::new(g.lo(), *u0, du0, *step)?, g)?
        }
    };
    let harmonic = harmonic_defect(&spec, &h.value)?;
    if harmonic > 1e-3 {
        notes.push(format!("reference harmonic defect {harmonic:.3e} exceeds 1e-3"));
    }
    let is_one = matches!(sc.reference, Reference::One);
    let spec_mu = if is_one { spec.clone() } else { ground_state_transform_field(&spec, &h)? };
    let base = sc.base.unwrap_or(g.lo());

    let seq = match &sc.policy {
        SchedulePolicy::Intrinsic { b } => {
            if !is_one {
                return Err(Error::InvalidParameter("intrinsic cut-offs need the reference 1".into()));
            }
            intrinsic_cutoffs(&spec, base, *b, sc.n_max)?
        }
        policy => {
            let evans = evans_from_field(&spec, &h, base)?.affine(sc.evans_scale, sc.evans_offset)?;
            generate_schedule(&evans, &spec_mu, sc.n_max, policy)?.with_reference(h.clone())?
        }
    };
    if seq.truncated {
        notes.push(format!("schedule truncated to {} of {} pairs by the modeled range", seq.len(), seq.requested));
    }

    let op = match discretize(&spec) {
        Ok(op) => Some(op),
        Err(e) => {
            notes.push(format!("dual-norm residuals unavailable: {e}"));
            None
        }
    };
    let records = shnol_records(&spec, &spec_mu, &seq, &u, sc.lambda, op.as_ref())?;
    check_identity(&records)?;
    let max_identity_defect = records.iter().map(|r| r.ibp_defect).fold(0.0, f64::max);

    let cond_i = growth_verdict(Condition::GrowthI, &records, |r| r.cond_i);
    let mut cond_ii = growth_verdict(Condition::GrowthII, &records, |r| r.cond_ii);
    if !is_one {
        cond_ii = Verdict::inapplicable(Condition::GrowthII, "the reference is not constant");
    }
    let gen_weyl = growth_verdict(Condition::GenWeylNecessary, &records, |r| r.gen_weyl);
    let harnack = harnack_equivalence(&seq, &u.value, &records);

    let ln_j: Vec<f64> = (1..=seq.len()).map(|n| 0.5 * cut_norm_sq(&spec, &seq.cutoff(n), &u).ln()).collect();
    let subexponential = subexponential_diagnostic_log(&ln_j).map_err(|e| e.to_string());

    let u_mu = if is_one { u.clone() } else { transformed_eigenfunction(&u, &h)? };
    let tests = [TestFunction::WindowBump, TestFunction::Gaussian];
    let caccioppoli_pointwise = caccioppoli_pointwise_check(&spec_mu, &seq, &u_mu, sc.lambda, spec.sup_shift(), &tests)?;
    let caccioppoli_l2 = caccioppoli_l2_check(&spec_mu, &seq, &u_mu)?;

    let admissibility = check_admissibility(&seq, &spec_mu);
    if let Some(n) = &admissibility.hardy_note {
        notes.push(n.clone());
    }
    let b = seq.evans().base_index();
    let bp_constant = max_quotient(u.value.values(), h.value.values(), b..g.len());
    let oracle = sc.oracle.as_ref().map(|o| oracle_distance(o, sc.lambda)).transpose()?;

    Ok(ShnolReport {
        name: sc.name.clone(),
        lambda: sc.lambda,
        policy: seq.policy.as_ref().map_or_else(|| "explicit".into(), |p| p.to_string()),
        pairs: seq.pairs().iter().map(|p| (p.r, p.big_r)).collect(),
        truncated: seq.truncated,
        requested: seq.requested,
        records,
        ln_j,
        admissibility,
        cond_i,
        cond_ii,
        gen_weyl,
        harnack,
        subexponential,
        caccioppoli_pointwise,
        caccioppoli_l2,
        bp_constant,
        harmonic_defect: harmonic,
        max_identity_defect,
        oracle,
        notes,
    })
}

/// Largest relative change of each ratio column between two runs, over the
/// record indices both share.
pub fn refinement_changes(coarse: &ShnolReport, fine: &ShnolReport) -> Vec<(&'static str, f64)> {
    let columns: [(&'static str, fn(&ShnolRecord) -> f64); 5] = [
        ("cond_i", |r| r.cond_i.ln()),
        ("cond_ii", |r| r.cond_ii.ln()),
        ("gen_weyl", |r| r.gen_weyl.ln()),
        ("max_ratio", |r| r.max_ratio.ln()),
        ("residual", |r| r.residual.ln()),
    ];
    columns
        .iter()
        .map(|(name, f)| {
            let worst = coarse
                .records
                .iter()
                .filter_map(|a| fine.records.iter().find(|b| b.n == a.n).map(|b| (f(a), f(b))))
                .filter(|(a, b)| a.is_finite() && b.is_finite())
                .map(|(a, b)| (b - a).exp_m1().abs())
                .fold(0.0, f64::max);
            (*name, worst)
        })
        .collect()
}

/// Capacities of the annuli between `r` and each entry of `r_list`, all in
/// the scenario's coordinate, for the untransformed operator. The capacitary
/// potential is linear in the harmonic coordinate of h ≡ 1; boundary terms at
/// the left end play no part, so a Robin end is replaced by a natural one.
pub fn scenario_criticality(sc: &Scenario, r: f64, r_list: &[f64]) -> Result<CriticalityReport> {
    let spec = match sc.spec.left() {
        LeftBoundary::Robin(_) => sc.spec.to_builder().left(LeftBoundary::Natural).build()?,
        _ => sc.spec.clone(),
    };
    let g = spec.grid();
    let evans = EvansPotential::harmonic_coordinate(&spec, &Field::constant(g, 1.0), sc.base.unwrap_or(g.lo()))?;
    let levels: Vec<f64> = r_list.iter().map(|&x| evans.level_at(x)).collect();
    let mut rep = criticality_test(&spec, &evans, evans.level_at(r), &levels)?;
    for (c, &x) in rep.capacities.iter_mut().zip(r_list) {
        c.0 = x;
    }
    Ok(rep)
}
