//! Evans potentials, the cut-off family ψ_{r,R}, schedules, admissibility,
//! capacities and Hardy constants.
//!
//! Levels are always given in the *display* normalization of an
//! [`EvansPotential`], an affine image `αE + β` of the canonical potential
//! with `E = 1/2` on the base cut. Cut-offs, energies and every downstream
//! quantity are invariant under the choice of α > 0 and β.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{cells_for_levels, derivative, integrate_split, lerp, Field, Grid, GridFunction, LogQuantity};
use crate::operator::{discretize, LeftBoundary, OperatorSpec};

#[derive(Debug, Clone)]
pub struct EvansPotential {
    grid: Grid,
    canonical: Arc<Vec<f64>>,
    slope: Arc<Vec<f64>>,
    levels: Arc<Vec<f64>>,
    level_slope: Arc<Vec<f64>>,
    base_index: usize,
    scale: f64,
    offset: f64,
    symmetric: bool,
}

impl EvansPotential {
    /// E = 1/2 + ∫_base^x ds/(a m h²), with the integrand's midpoint values
    /// taken from the coefficient profiles and a cubic Hermite h.
    /// No divergence requirement; see [`evans_potential_1d`].
    pub fn harmonic_coordinate(spec: &OperatorSpec, h: &Field, base: f64) -> Result<Self> {
        let grid = spec.grid();
        if !grid.same(h.grid()) {
            return Err(Error::GridMismatch);
        }
        let x = grid.nodes();
        let (hv, dh) = (h.value.values(), h.slope.values());
        if let Some(i) = hv.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::NonPositive(i));
        }
        if !(base >= grid.lo() && base < grid.hi()) {
            return Err(Error::OutOfRange { level: base, lo: grid.lo(), hi: grid.hi() });
        }
        let b = x.partition_point(|&t| t < base - 1e-12 * base.abs().max(1.0));
        let ln_f = |i: usize| -spec.ln_p()[i] - 2.0 * hv[i].ln();
        if !spec.ln_p()[b].is_finite() {
            return Err(Error::InvalidParameter(format!("a·m vanishes at the base cut x = {}", x[b])));
        }
        let n = x.len();
        let mut e = vec![0.5; n];
        let mut slope = vec![0.0; n];
        slope[b] = ln_f(b).exp();
        for i in b..n - 1 {
            let d = x[i + 1] - x[i];
            let mid = x[i] + 0.5 * d;
            let h_mid = 0.5 * (hv[i] + hv[i + 1]) + d * (dh[i] - dh[i + 1]) / 8.0;
            let f_mid = (-spec.coefficient().ln_abs(mid) - spec.weight().ln_abs(mid) - 2.0 * h_mid.ln()).exp();
            let f1 = ln_f(i + 1).exp();
            e[i + 1] = e[i] + d / 6.0 * (slope[i] + 4.0 * f_mid + f1);
            slope[i + 1] = f1;
        }
        if let Some(i) = e.iter().chain(&slope).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i % n));
        }
        let e = Arc::new(e);
        let slope = Arc::new(slope);
        Ok(Self {
            grid: grid.clone(),
            levels: e.clone(),
            level_slope: slope.clone(),
            canonical: e,
            slope,
            base_index: b,
            scale: 1.0,
            offset: 0.0,
            symmetric: spec.mirrored(),
        })
    }

    /// Potential with prescribed canonical values and slopes (used for the
    /// intrinsic-distance exhaustion).
    pub fn from_values(grid: &Grid, canonical: Vec<f64>, slope: Vec<f64>, symmetric: bool) -> Result<Self> {
        if canonical.len() != grid.len() || slope.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: canonical.len().min(slope.len()) });
        }
        if canonical.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidParameter("Evans potential must be nondecreasing".into()));
        }
        let b = canonical.partition_point(|&v| v <= 0.5).saturating_sub(1);
        let e = Arc::new(canonical);
        let s = Arc::new(slope);
        Ok(Self {
            grid: grid.clone(),
            levels: e.clone(),
            level_slope: s.clone(),
            canonical: e,
            slope: s,
            base_index: b,
            scale: 1.0,
            offset: 0.0,
            symmetric,
        })
    }

    /// Same potential displayed as α·E + β.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("affine Evans map needs alpha > 0, got {alpha}")));
        }
        let levels: Vec<f64> = self.canonical.iter().map(|e| alpha * e + beta).collect();
        let level_slope: Vec<f64> = self.slope.iter().map(|s| alpha * s).collect();
        Ok(Self {
            levels: Arc::new(levels),
            level_slope: Arc::new(level_slope),
            scale: alpha,
            offset: beta,
            ..self.clone()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn canonical(&self) -> &[f64] {
        &self.canonical
    }
    pub fn canonical_slope(&self) -> &[f64] {
        &self.slope
    }
    /// Display values αE + β at the nodes.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }
    /// Display slope αE′ at the nodes.
    pub fn level_slope(&self) -> &[f64] {
        &self.level_slope
    }
    pub fn base_cut(&self) -> f64 {
        self.grid.nodes()[self.base_index]
    }
    pub fn base_index(&self) -> usize {
        self.base_index
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }
    pub fn min_level(&self) -> f64 {
        self.levels[self.base_index]
    }
    pub fn max_level(&self) -> f64 {
        *self.levels.last().unwrap()
    }
    /// Display level at x by cubic Hermite interpolation.
    pub fn level_at(&self, x: f64) -> f64 {
        let i = self.grid.locate(x);
        let d = self.grid.width(i);
        let t = ((x - self.grid.nodes()[i]) / d).clamp(0.0, 1.0);
        let (l, s) = (&self.levels, &self.level_slope);
        let (h00, h10, h01, h11) =
            (2.0 * t.powi(3) - 3.0 * t * t + 1.0, t.powi(3) - 2.0 * t * t + t, -2.0 * t.powi(3) + 3.0 * t * t, t.powi(3) - t * t);
        h00 * l[i] + h10 * d * s[i] + h01 * l[i + 1] + h11 * d * s[i + 1]
    }
    /// Coordinate at which the display level is reached.
    pub fn x_at_level(&self, level: f64) -> Result<f64> {
        let l = &self.levels;
        if !(level >= self.min_level() && level <= self.max_level()) {
            return Err(Error::OutOfRange { level, lo: self.min_level(), hi: self.max_level() });
        }
        let x = self.grid.nodes();
        let k = l.partition_point(|&v| v < level).clamp(1, l.len() - 1);
        let t = if l[k] > l[k - 1] { (level - l[k - 1]) / (l[k] - l[k - 1]) } else { 0.0 };
        Ok(x[k - 1] + t * (x[k] - x[k - 1]))
    }
    fn canonical_to_display(&self, e: f64) -> f64 {
        self.scale * e + self.offset
    }
}

/// Evans potential for `spec` relative to the reference h, requiring the
/// canonical value to reach at least 1 at the right edge.
pub fn evans_potential_1d(spec: &OperatorSpec, h: &GridFunction, base: f64) -> Result<EvansPotential> {
    evans_from_field(spec, &Field::from_values(h.clone()), base)
}

pub fn evans_from_field(spec: &OperatorSpec, h: &Field, base: f64) -> Result<EvansPotential> {
    let e = EvansPotential::harmonic_coordinate(spec, h, base)?;
    let top = *e.canonical.last().unwrap();
    if top < 1.0 {
        return Err(Error::DivergenceTooSlow(top));
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffPair {
    pub r: f64,
    pub big_r: f64,
}

impl CutoffPair {
    pub fn new(r: f64, big_r: f64) -> Result<Self> {
        if !(r < big_r) || !r.is_finite() || !big_r.is_finite() {
            return Err(Error::InvalidParameter(format!("cut-off pair needs r < R, got ({r}, {big_r})")));
        }
        Ok(Self { r, big_r })
    }
    pub fn width(&self) -> f64 {
        self.big_r - self.r
    }
}

impl fmt::Display for CutoffPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.r, self.big_r)
    }
}

/// ψ_{r,R} = clamp((R − E)/(R − r), 0, 1) over an Evans potential, with the
/// analytic gradient dψ/dE · E′.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub pair: CutoffPair,
    evans: EvansPotential,
}

impl Cutoff {
    #[inline]
    pub fn value_at_level(&self, e: f64) -> f64 {
        ((self.pair.big_r - e) / self.pair.width()).clamp(0.0, 1.0)
    }
    /// dψ/dE, zero off the open annulus.
    #[inline]
    pub fn dpsi_de(&self, e: f64) -> f64 {
        if e > self.pair.r && e < self.pair.big_r {
            -1.0 / self.pair.width()
        } else {
            0.0
        }
    }
    pub fn evans(&self) -> &EvansPotential {
        &self.evans
    }
    pub fn value(&self, i: usize) -> f64 {
        self.value_at_level(self.evans.levels[i])
    }
    pub fn slope(&self, i: usize) -> f64 {
        self.dpsi_de(self.evans.levels[i]) * self.evans.level_slope[i]
    }
    pub fn values(&self) -> Result<GridFunction> {
        let v = self.evans.levels.iter().map(|&e| self.value_at_level(e)).collect();
        GridFunction::new(self.evans.grid.clone(), v)
    }
    pub fn field(&self) -> Result<Field> {
        let s = (0..self.evans.grid.len()).map(|i| self.slope(i)).collect();
        Field::new(self.values()?, GridFunction::new(self.evans.grid.clone(), s)?)
    }
    /// Cells meeting the annulus r ≤ E ≤ R.
    pub fn annulus_cells(&self) -> Range<usize> {
        cells_for_levels(&self.evans.levels, self.pair.r, self.pair.big_r)
    }
    /// Cells meeting the support E ≤ R.
    pub fn support_cells(&self) -> Range<usize> {
        let end = cells_for_levels(&self.evans.levels, self.pair.big_r, self.pair.big_r).end;
        0..end.max(cells_for_levels(&self.evans.levels, self.pair.r, self.pair.big_r).end)
    }
}

pub fn build_psi(evans: &EvansPotential, pair: CutoffPair) -> Result<Cutoff> {
    if pair.big_r > evans.max_level() || pair.r <= evans.min_level() {
        let bad = if pair.big_r > evans.max_level() { pair.big_r } else { pair.r };
        return Err(Error::OutOfRange { level: bad, lo: evans.min_level(), hi: evans.max_level() });
    }
    Ok(Cutoff { pair, evans: evans.clone() })
}

/// a(ψ, ψ) = ∫ a ψ′² dμ with dμ the weight of `spec_mu`, in log form.
pub fn form_energy_log(spec_mu: &OperatorSpec, psi: &Cutoff) -> Result<LogQuantity> {
    let ev = &psi.evans;
    if !spec_mu.grid().same(&ev.grid) {
        return Err(Error::GridMismatch);
    }
    let cuts = [psi.pair.r, psi.pair.big_r];
    let ls = ev.level_slope();
    let q = integrate_split(&ev.grid, psi.annulus_cells(), ev.levels(), &cuts, spec_mu.ln_p(), |i, t, mid| {
        let d = psi.dpsi_de(mid) * lerp(ls, i, t);
        d * d
    });
    Ok(q.scale(spec_mu.multiplicity()))
}

pub fn form_energy(spec_mu: &OperatorSpec, psi: &Cutoff) -> Result<f64> {
    Ok(form_energy_log(spec_mu, psi)?.value())
}

/// Per-node lumped masses of the gradient weight a ψ′² m: each cell's
/// contribution splits at its midpoint between the two end nodes.
pub fn lumped_gradient_weight(spec: &OperatorSpec, psi: &Cutoff, ln_shift: f64) -> Result<Vec<f64>> {
    let ev = &psi.evans;
    if !spec.grid().same(&ev.grid) {
        return Err(Error::GridMismatch);
    }
    let x = ev.grid.nodes();
    let (l, ls, lw) = (ev.levels(), ev.level_slope(), spec.ln_p());
    let mut d = vec![0.0; x.len()];
    for i in psi.annulus_cells() {
        let (l0, l1) = (l[i], l[i + 1]);
        let mut thetas = vec![0.0, 0.5, 1.0];
        for c in [psi.pair.r, psi.pair.big_r] {
            if c > l0 && c < l1 {
                thetas.push((c - l0) / (l1 - l0));
            }
        }
        thetas.sort_by(f64::total_cmp);
        let h = x[i + 1] - x[i];
        for p in thetas.windows(2) {
            let (ta, tb) = (p[0], p[1]);
            if tb <= ta {
                continue;
            }
            let mid = l0 + 0.5 * (ta + tb) * (l1 - l0);
            let g = psi.dpsi_de(mid);
            let fa = (g * lerp(ls, i, ta)).powi(2) * (lerp(lw, i, ta) - ln_shift).exp();
            let fb = (g * lerp(ls, i, tb)).powi(2) * (lerp(lw, i, tb) - ln_shift).exp();
            let piece = 0.5 * h * (tb - ta) * (fa + fb);
            if 0.5 * (ta + tb) < 0.5 {
                d[i] += piece;
            } else {
                d[i + 1] += piece;
            }
        }
    }
    let mult = spec.multiplicity();
    d.iter_mut().for_each(|v| *v *= mult);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchedulePolicy {
    /// r_n = scale·baseⁿ, R_n = spread·r_n.
    Geometric { base: f64, spread: f64, scale: f64 },
    /// r_n = e^{2n}, R_n = e^{2n+1}.
    DoubleExponential,
    Explicit(Vec<(f64, f64)>),
    /// Intrinsic-distance exhaustion: r_n = n, R_n = n + b. Not a null
    /// sequence, so only the ordering conditions are enforced.
    Intrinsic { b: f64 },
}

impl fmt::Display for SchedulePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric { base, spread, scale } => write!(f, "geometric({base}, {spread}, {scale})"),
            Self::DoubleExponential => write!(f, "double-exponential"),
            Self::Explicit(p) => {
                write!(f, "explicit(")?;
                for (k, (a, b)) in p.iter().enumerate() {
                    if k > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{a}, {b}")?;
                }
                write!(f, ")")
            }
            Self::Intrinsic { b } => write!(f, "intrinsic({b})"),
        }
    }
}

impl SchedulePolicy {
    /// The pair requested at index n before feasibility checks.
    pub fn nominal(&self, n: usize) -> Option<(f64, f64)> {
        let k = n as f64;
        match self {
            Self::Geometric { base, spread, scale } => {
                let r = scale * base.powf(k);
                Some((r, spread * r))
            }
            Self::DoubleExponential => Some(((2.0 * k).exp(), (2.0 * k + 1.0).exp())),
            Self::Explicit(p) => p.get(n - 1).copied(),
            Self::Intrinsic { b } => Some((k, k + b)),
        }
    }
}

pub const SEPARATION: &str = "separation r_{n+1} > R_n";
pub const ORDER: &str = "order R_n > r_n";
pub const WIDTH: &str = "width 1/(R_n - r_n) <= 2/R_n";
pub const SMALL_ENERGY: &str = "energy a(psi_n) < 1/n";

/// An ordered family of cut-offs over one Evans potential and a reference φ.
#[derive(Debug, Clone)]
pub struct CutoffSequence {
    evans: EvansPotential,
    pairs: Vec<CutoffPair>,
    reference: Field,
    pub truncated: bool,
    pub requested: usize,
    pub policy: Option<SchedulePolicy>,
    /// Whether the width and small-energy conditions were enforced.
    pub null_sequence: bool,
}

impl CutoffSequence {
    /// Unchecked sequence; use [`check_admissibility`] to audit it.
    pub fn from_pairs(evans: &EvansPotential, pairs: Vec<CutoffPair>) -> Result<Self> {
        for p in &pairs {
            build_psi(evans, *p)?;
        }
        Ok(Self {
            evans: evans.clone(),
            reference: Field::constant(evans.grid(), 1.0),
            requested: pairs.len(),
            pairs,
            truncated: false,
            policy: None,
            null_sequence: false,
        })
    }

    pub fn with_reference(mut self, reference: Field) -> Result<Self> {
        if !reference.grid().same(self.evans.grid()) {
            return Err(Error::GridMismatch);
        }
        self.reference = reference;
        Ok(self)
    }

    pub fn with_evans(mut self, evans: EvansPotential) -> Result<Self> {
        if !evans.grid().same(self.evans.grid()) {
            return Err(Error::GridMismatch);
        }
        // Pairs transform with the affine map between the two displays.
        let a = evans.scale / self.evans.scale;
        let b = evans.offset - a * self.evans.offset;
        self.pairs = self.pairs.iter().map(|p| CutoffPair { r: a * p.r + b, big_r: a * p.big_r + b }).collect();
        self.evans = evans;
        Ok(self)
    }

    pub fn evans(&self) -> &EvansPotential {
        &self.evans
    }
    pub fn reference(&self) -> &Field {
        &self.reference
    }
    pub fn pairs(&self) -> &[CutoffPair] {
        &self.pairs
    }
    pub fn len(&self) -> usize {
        self.pairs.len()
    }
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
    /// ψ_n for 1 ≤ n ≤ len.
    pub fn cutoff(&self, n: usize) -> Cutoff {
        Cutoff { pair: self.pairs[n - 1], evans: self.evans.clone() }
    }
    /// Indices n with both neighbours present.
    pub fn record_indices(&self) -> Range<usize> {
        2..self.len()
    }
    /// A_n = supp ψ_{n+1}(1 − ψ_{n−1}) in display levels: [r_{n−1}, R_{n+1}].
    pub fn annulus_levels(&self, n: usize) -> (f64, f64) {
        (self.pairs[n - 2].r, self.pairs[n].big_r)
    }
    /// Node indices of the closed window A_n.
    pub fn annulus_nodes(&self, n: usize) -> Range<usize> {
        let (lo, hi) = self.annulus_levels(n);
        let l = self.evans.levels();
        l.partition_point(|&v| v < lo)..l.partition_point(|&v| v <= hi)
    }
}

/// Pairs for `policy` enforcing the separation, order, width and small-energy
/// conditions. R_n is doubled (in display units) until the energy falls below
/// 1/n; running out of range truncates the sequence when at least three pairs
/// fit.
pub fn generate_schedule(
    evans: &EvansPotential,
    spec_mu: &OperatorSpec,
    n_max: usize,
    policy: &SchedulePolicy,
) -> Result<CutoffSequence> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let null = !matches!(policy, SchedulePolicy::Intrinsic { .. });
    let mut pairs: Vec<CutoffPair> = Vec::with_capacity(n_max);
    let mut carry: Option<f64> = None;
    let mut truncated = false;
    for n in 1..=n_max {
        let Some((mut r, mut big_r)) = policy.nominal(n) else {
            return Err(Error::InvalidParameter(format!("explicit schedule has no pair for n = {n}")));
        };
        if let (Some(min_r), SchedulePolicy::Geometric { base, spread, .. }) = (carry, policy) {
            if r <= min_r {
                r = min_r * base / spread;
                big_r = spread * r;
            }
        }
        if !(big_r > r) {
            return Err(Error::ScheduleViolation { condition: ORDER, n });
        }
        if let Some(prev) = pairs.last() {
            if !(r > prev.big_r) {
                return Err(Error::ScheduleViolation { condition: SEPARATION, n });
            }
        }
        if null && !(1.0 / (big_r - r) <= 2.0 / big_r) {
            return Err(Error::ScheduleViolation { condition: WIDTH, n });
        }
        if r <= evans.min_level() || big_r > evans.max_level() {
            truncated = true;
            break;
        }
        if null {
            loop {
                let psi = build_psi(evans, CutoffPair::new(r, big_r)?)?;
                if form_energy(spec_mu, &psi)? < 1.0 / n as f64 {
                    break;
                }
                big_r *= 2.0;
                if big_r > evans.max_level() {
                    truncated = true;
                    break;
                }
            }
            if truncated {
                break;
            }
        }
        carry = Some(big_r);
        pairs.push(CutoffPair::new(r, big_r)?);
    }
    if truncated && pairs.len() < 3 {
        return Err(Error::RangeExhausted { feasible: pairs.len() });
    }
    let mut seq = CutoffSequence::from_pairs(evans, pairs)?;
    seq.truncated = truncated;
    seq.requested = n_max;
    seq.policy = Some(policy.clone());
    seq.null_sequence = null;
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// (n, violated property) for every structural failure.
    pub structural_failures: Vec<(usize, &'static str)>,
    /// Weak Hardy constant per n; NaN where the discretization is unavailable.
    pub hardy: Vec<(usize, f64)>,
    pub hardy_ratio: f64,
    pub hardy_note: Option<String>,
    pub passes: bool,
}

impl AdmissibilityReport {
    pub fn structure_holds(&self) -> bool {
        self.structural_failures.is_empty()
    }
}

pub const BOUNDS: &str = "0 <= psi_n <= 1";
pub const NESTED: &str = "psi_{n+1} = 1 on supp psi_n";
pub const DISJOINT: &str = "gradients of psi_{n-1} and psi_{n+1} disjoint";
pub const WINDOW_IDENTITY: &str = "psi_{n+1}(1 - psi_{n-1}) = 1 on supp grad psi_n";

/// Node-wise structural audit of the sequence.
pub fn structural_failures(seq: &CutoffSequence) -> Vec<(usize, &'static str)> {
    let mut out = Vec::new();
    let levels = seq.evans.levels();
    let n_pairs = seq.len();
    for n in 1..=n_pairs {
        let psi = seq.cutoff(n);
        if levels.iter().any(|&e| !(0.0..=1.0).contains(&psi.value_at_level(e))) {
            out.push((n, BOUNDS));
        }
        if n < n_pairs {
            let next = seq.cutoff(n + 1);
            if levels.iter().any(|&e| psi.value_at_level(e) > 0.0 && next.value_at_level(e) != 1.0) {
                out.push((n, NESTED));
            }
        }
        if n >= 2 && n < n_pairs {
            let (prev, next) = (seq.cutoff(n - 1), seq.cutoff(n + 1));
            if levels.iter().any(|&e| prev.dpsi_de(e) != 0.0 && next.dpsi_de(e) != 0.0) {
                out.push((n, DISJOINT));
            }
            if levels
                .iter()
                .any(|&e| psi.dpsi_de(e) != 0.0 && next.value_at_level(e) * (1.0 - prev.value_at_level(e)) != 1.0)
            {
                out.push((n, WINDOW_IDENTITY));
            }
        }
    }
    out
}

/// Structure plus weak Hardy constants of a ψ_n′² against the Q-norm of
/// `spec`; passes iff the structure is exact and max/min of the constants is
/// at most 10.
pub fn check_admissibility(seq: &CutoffSequence, spec: &OperatorSpec) -> AdmissibilityReport {
    let structural_failures = structural_failures(seq);
    let mut hardy = Vec::new();
    let mut note = None;
    match discretize(spec) {
        Ok(op) => {
            for n in 1..=seq.len() {
                let c = lumped_gradient_weight(spec, &seq.cutoff(n), op.ln_shift())
                    .and_then(|d| op.largest_generalized_eigenvalue(&d[op.first()..op.first() + op.dim()]))
                    .unwrap_or(f64::NAN);
                hardy.push((n, c));
            }
        }
        Err(e) => {
            note = Some(format!("weak Hardy constants unavailable: {e}"));
            hardy.extend((1..=seq.len()).map(|n| (n, f64::NAN)));
        }
    }
    let finite: Vec<f64> = hardy.iter().map(|h| h.1).filter(|c| c.is_finite()).collect();
    let hardy_ratio = if finite.len() == hardy.len() && !finite.is_empty() {
        let max = finite.iter().copied().fold(0.0, f64::max);
        let min = finite.iter().copied().fold(f64::INFINITY, f64::min);
        if min > 0.0 {
            max / min
        } else {
            f64::INFINITY
        }
    } else {
        f64::NAN
    };
    let passes = structural_failures.is_empty() && hardy_ratio <= 10.0;
    AdmissibilityReport { structural_failures, hardy, hardy_ratio, hardy_note: note, passes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardyReport {
    pub ratios: Vec<f64>,
    pub passes: bool,
}

/// ∫ w² a E′²/(4E²) dμ ≤ ∫ a w′² dμ for test functions vanishing on the base
/// region, with E the canonical potential.
pub fn universal_hardy_check(spec_mu: &OperatorSpec, evans: &EvansPotential, tests: &[GridFunction]) -> Result<HardyReport> {
    let g = evans.grid();
    if !spec_mu.grid().same(g) {
        return Err(Error::GridMismatch);
    }
    let b = evans.base_index();
    let (e, es) = (evans.canonical(), evans.canonical_slope());
    let mut ratios = Vec::with_capacity(tests.len());
    for w in tests {
        if !w.grid().same(g) {
            return Err(Error::GridMismatch);
        }
        let wv = w.values();
        if wv[..=b].iter().any(|&v| v != 0.0) {
            return Err(Error::SupportViolation);
        }
        let dw = derivative(w);
        let dwv = dw.values();
        let cells = b..g.len() - 1;
        let lhs = integrate_split(g, cells.clone(), g.nodes(), &[], spec_mu.ln_p(), |i, t, _| {
            let q = lerp(wv, i, t) * lerp(es, i, t) / (2.0 * lerp(e, i, t));
            q * q
        });
        let rhs = integrate_split(g, cells, g.nodes(), &[], spec_mu.ln_p(), |i, t, _| lerp(dwv, i, t).powi(2));
        ratios.push(lhs.div(rhs).value());
    }
    let passes = ratios.iter().all(|&r| r <= 1.0 + 1e-3);
    Ok(HardyReport { ratios, passes })
}

pub fn capacity(spec_mu: &OperatorSpec, evans: &EvansPotential, pair: CutoffPair) -> Result<f64> {
    form_energy(spec_mu, &build_psi(evans, pair)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Criticality {
    Critical,
    Subcritical { floor: f64 },
    Inconclusive,
}

impl fmt::Display for Criticality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Critical => write!(f, "CRITICAL"),
            Self::Subcritical { floor } => write!(f, "SUBCRITICAL (capacity floor {floor:.6e})"),
            Self::Inconclusive => write!(f, "INCONCLUSIVE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalityReport {
    pub capacities: Vec<(f64, f64)>,
    pub monotone: bool,
    pub verdict: Criticality,
}

/// Capacities cap(r, R) along increasing R: CRITICAL if they fall
/// monotonically below 1e−3, SUBCRITICAL if the last two agree within 5%
/// above that threshold.
pub fn criticality_test(spec_mu: &OperatorSpec, evans: &EvansPotential, r: f64, r_list: &[f64]) -> Result<CriticalityReport> {
    let mut list = r_list.to_vec();
    list.sort_by(f64::total_cmp);
    let mut capacities = Vec::with_capacity(list.len());
    for &big_r in &list {
        capacities.push((big_r, capacity(spec_mu, evans, CutoffPair::new(r, big_r)?)?));
    }
    let monotone = capacities.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    let verdict = match capacities.as_slice() {
        [.., (_, last)] if monotone && *last < 1e-3 => Criticality::Critical,
        [.., (_, a), (_, b)] if *b >= 1e-3 && (a - b).abs() <= 0.05 * b => Criticality::Subcritical { floor: *b },
        _ => Criticality::Inconclusive,
    };
    Ok(CriticalityReport { capacities, monotone, verdict })
}

/// d_A(x, y) = |∫_x^y dt/√a|, by composite Simpson on the coefficient profile.
pub fn intrinsic_distance(spec: &OperatorSpec, x: f64, y: f64) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if lo == hi {
        return 0.0;
    }
    let panels = 2 * ((hi - lo) / 1e-3).ceil().clamp(1.0, 1e6) as usize;
    let h = (hi - lo) / panels as f64;
    let f = |t: f64| (-0.5 * spec.coefficient().ln_abs(t)).exp();
    let mut s = f(lo) + f(hi);
    for k in 1..panels {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(lo + k as f64 * h);
    }
    s * h / 3.0
}

/// Cut-offs over the distance to p, with pairs (n, n + b).
pub fn intrinsic_cutoffs(spec: &OperatorSpec, p: f64, b: f64, n_max: usize) -> Result<CutoffSequence> {
    if !(b > 0.0 && b < 1.0) {
        return Err(Error::InvalidParameter(format!("intrinsic width b must lie in (0, 1), got {b}")));
    }
    let g = spec.grid();
    let x = g.nodes();
    let k = g.nearest(p);
    let mut d = vec![0.0; x.len()];
    for i in k + 1..x.len() {
        d[i] = d[i - 1] + intrinsic_distance(spec, x[i - 1], x[i]);
    }
    let canonical: Vec<f64> = d.iter().map(|v| 0.5 + v).collect();
    let slope: Vec<f64> =
        x.iter().enumerate().map(|(i, &t)| if i >= k { (-0.5 * spec.coefficient().ln_abs(t)).exp() } else { 0.0 }).collect();
    let evans = EvansPotential::from_values(g, canonical, slope, spec.mirrored())?.affine(1.0, -0.5)?;
    generate_schedule(&evans, spec, n_max, &SchedulePolicy::Intrinsic { b })
}

/// Canonical-to-display conversion of a level, exposed for reports.
pub fn display_level(evans: &EvansPotential, canonical: f64) -> f64 {
    evans.canonical_to_display(canonical)
}

/// Whether a spec's left end is compatible with cut-offs equal to 1 there.
pub fn left_end_is_free(spec: &OperatorSpec) -> bool {
    spec.left() != LeftBoundary::Dirichlet
}
