//! Weighted Sturm–Liouville operators `H = −(1/m)(a m u′)′ + (V + W)u`,
//! their quadratic forms, the ground-state transform and a symmetric
//! three-point discretization used as a brute-force spectral oracle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{derivative, integrate_split, lerp, Field, Grid, GridFunction, LogQuantity};
use crate::profile::{Profile, Sampled};

/// Condition at the left end of the interval. The right end is always Dirichlet
/// for the discretization; forms ignore it because test functions vanish there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftBoundary {
    Dirichlet,
    Natural,
    /// Flux condition `a m u′ = β u`; contributes `β u(x_lo)²` to the form.
    Robin(f64),
    /// Radial origin: regular solutions with `u′(0) = 0`.
    Regular,
}

#[derive(Debug, Clone)]
pub struct OperatorSpec {
    grid: Grid,
    weight: Profile,
    coefficient: Profile,
    potential: Profile,
    shift: Option<Profile>,
    left: LeftBoundary,
    mirrored: bool,
    semibound: f64,
    ln_m: Arc<Vec<f64>>,
    ln_a: Arc<Vec<f64>>,
    ln_p: Arc<Vec<f64>>,
    v: Arc<Vec<f64>>,
    w: Arc<Vec<f64>>,
}

/// Builder for [`OperatorSpec`]; defaults are m = a = 1, V = 0, no shift,
/// Dirichlet left end, one-sided domain and the default semibound.
#[derive(Debug, Clone)]
pub struct SpecBuilder {
    grid: Grid,
    weight: Profile,
    coefficient: Profile,
    potential: Profile,
    shift: Option<Profile>,
    left: LeftBoundary,
    mirrored: bool,
    semibound: Option<f64>,
}

impl SpecBuilder {
    pub fn weight(mut self, p: Profile) -> Self {
        self.weight = p;
        self
    }
    pub fn coefficient(mut self, p: Profile) -> Self {
        self.coefficient = p;
        self
    }
    pub fn potential(mut self, p: Profile) -> Self {
        self.potential = p;
        self
    }
    pub fn shift(mut self, p: Option<Profile>) -> Self {
        self.shift = p;
        self
    }
    pub fn left(mut self, b: LeftBoundary) -> Self {
        self.left = b;
        self
    }
    pub fn mirrored(mut self, yes: bool) -> Self {
        self.mirrored = yes;
        self
    }
    pub fn semibound(mut self, c: f64) -> Self {
        self.semibound = Some(c);
        self
    }

    pub fn build(self) -> Result<OperatorSpec> {
        let x = self.grid.nodes();
        let n = x.len();
        let mut ln_m = Vec::with_capacity(n);
        let mut ln_a = Vec::with_capacity(n);
        for (i, &xi) in x.iter().enumerate() {
            let lm = self.weight.ln_abs(xi);
            let la = self.coefficient.ln_abs(xi);
            let origin = i == 0 && self.left == LeftBoundary::Regular;
            // Sign from the profile, magnitude from its log (values may underflow).
            let (wm, wa) = (self.weight.eval(xi), self.coefficient.eval(xi));
            if !origin && (wm < 0.0 || wm.is_nan() || !lm.is_finite()) {
                return Err(if lm.is_nan() { Error::NonFinite(i) } else { Error::NonPositive(i) });
            }
            if origin && !(lm.is_finite() || lm == f64::NEG_INFINITY) {
                return Err(Error::NonFinite(i));
            }
            if wa < 0.0 || wa.is_nan() || !la.is_finite() {
                return Err(Error::InvalidParameter(format!("coefficient a not positive at node {i}")));
            }
            ln_m.push(lm);
            ln_a.push(la);
        }
        let ln_p: Vec<f64> = ln_m.iter().zip(&ln_a).map(|(m, a)| m + a).collect();
        let v: Vec<f64> = x.iter().map(|&t| self.potential.eval(t)).collect();
        let w: Vec<f64> = match &self.shift {
            Some(p) => x.iter().map(|&t| p.eval(t)).collect(),
            None => vec![0.0; n],
        };
        if let Some(i) = v.iter().chain(&w).position(|t| !t.is_finite()) {
            return Err(Error::NonFinite(i % n));
        }
        let min_v = v.iter().copied().fold(f64::INFINITY, f64::min);
        let min_w = w.iter().copied().fold(f64::INFINITY, f64::min);
        let semibound = self.semibound.unwrap_or((-min_v - min_w).max(0.0));
        if !(semibound >= 0.0) {
            return Err(Error::InvalidParameter(format!("semibound c = {semibound} must be nonnegative")));
        }
        Ok(OperatorSpec {
            grid: self.grid,
            weight: self.weight,
            coefficient: self.coefficient,
            potential: self.potential,
            shift: self.shift,
            left: self.left,
            mirrored: self.mirrored,
            semibound,
            ln_m: Arc::new(ln_m),
            ln_a: Arc::new(ln_a),
            ln_p: Arc::new(ln_p),
            v: Arc::new(v),
            w: Arc::new(w),
        })
    }
}

impl OperatorSpec {
    pub fn builder(grid: &Grid) -> SpecBuilder {
        SpecBuilder {
            grid: grid.clone(),
            weight: Profile::one(),
            coefficient: Profile::one(),
            potential: Profile::Const(0.0),
            shift: None,
            left: LeftBoundary::Dirichlet,
            mirrored: false,
            semibound: None,
        }
    }

    /// Same coefficients resampled on another grid.
    pub fn on_grid(&self, grid: &Grid) -> Result<OperatorSpec> {
        let mut b = self.to_builder();
        b.grid = grid.clone();
        b.build()
    }

    /// Restriction to the nodes in `range`; a window that does not start at
    /// the left edge gets a Dirichlet condition there.
    pub fn window(&self, range: std::ops::Range<usize>) -> Result<OperatorSpec> {
        let start = range.start;
        let grid = Grid::new(self.grid.nodes()[range].to_vec())?;
        let mut b = self.to_builder();
        b.grid = grid;
        if start > 0 {
            b.left = LeftBoundary::Dirichlet;
        }
        b.build()
    }

    pub fn to_builder(&self) -> SpecBuilder {
        SpecBuilder {
            grid: self.grid.clone(),
            weight: self.weight.clone(),
            coefficient: self.coefficient.clone(),
            potential: self.potential.clone(),
            shift: self.shift.clone(),
            left: self.left,
            mirrored: self.mirrored,
            semibound: Some(self.semibound),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn x_lo(&self) -> f64 {
        self.grid.lo()
    }
    pub fn x_hi(&self) -> f64 {
        self.grid.hi()
    }
    pub fn singular_lo(&self) -> bool {
        self.left == LeftBoundary::Regular
    }
    pub fn left(&self) -> LeftBoundary {
        self.left
    }
    pub fn mirrored(&self) -> bool {
        self.mirrored
    }
    /// Integral multiplicity: two-sided domains count every integral twice.
    pub fn multiplicity(&self) -> f64 {
        if self.mirrored {
            2.0
        } else {
            1.0
        }
    }
    pub fn semibound(&self) -> f64 {
        self.semibound
    }
    pub fn weight(&self) -> &Profile {
        &self.weight
    }
    pub fn coefficient(&self) -> &Profile {
        &self.coefficient
    }
    pub fn potential(&self) -> &Profile {
        &self.potential
    }
    pub fn shift(&self) -> Option<&Profile> {
        self.shift.as_ref()
    }
    pub fn ln_m(&self) -> &[f64] {
        &self.ln_m
    }
    pub fn ln_a(&self) -> &[f64] {
        &self.ln_a
    }
    /// ln(a·m), the log of the flux coefficient.
    pub fn ln_p(&self) -> &[f64] {
        &self.ln_p
    }
    pub fn v(&self) -> &[f64] {
        &self.v
    }
    pub fn w(&self) -> &[f64] {
        &self.w
    }
    /// V + W at node i.
    pub fn total_potential(&self, i: usize) -> f64 {
        self.v[i] + self.w[i]
    }
    /// Recorded ellipticity constant ε = min a over the nodes.
    pub fn ellipticity(&self) -> f64 {
        self.ln_a.iter().copied().fold(f64::INFINITY, f64::min).exp()
    }
    pub fn sup_shift(&self) -> f64 {
        self.w.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
    pub fn robin(&self) -> f64 {
        match self.left {
            LeftBoundary::Robin(b) => b,
            _ => 0.0,
        }
    }
    /// a(x)·m(x) evaluated off the grid.
    pub fn flux_coefficient(&self, x: f64) -> f64 {
        (self.coefficient.ln_abs(x) + self.weight.ln_abs(x)).exp()
    }
    pub fn potential_at(&self, x: f64) -> f64 {
        self.potential.eval(x) + self.shift.as_ref().map_or(0.0, |w| w.eval(x))
    }
    /// Spread of ln m and ln(a m) over the grid; beyond about 600 the
    /// discretization cannot hold all entries in f64.
    pub fn ln_weight_span(&self) -> f64 {
        let (lo, hi) = self
            .ln_m
            .iter()
            .chain(self.ln_p.iter())
            .filter(|t| t.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        hi - lo
    }
}

fn check_grid(spec: &OperatorSpec, f: &GridFunction) -> Result<()> {
    if spec.grid.same(f.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn all_cells(spec: &OperatorSpec) -> std::ops::Range<usize> {
    0..spec.grid.len() - 1
}

/// Q(u, v) = ∫ a u′ v′ m dx + ∫ (V + W) u v m dx, plus the Robin boundary term.
pub fn assemble_form(spec: &OperatorSpec, u: &GridFunction, v: &GridFunction) -> Result<f64> {
    check_grid(spec, u)?;
    check_grid(spec, v)?;
    let fu = Field::from_values(u.clone());
    let fv = Field::from_values(v.clone());
    Ok(form_of_fields(spec, &fu, &fv).value())
}

/// Q(u, v) for functions carrying their own derivatives, in log form.
pub fn form_of_fields(spec: &OperatorSpec, u: &Field, v: &Field) -> LogQuantity {
    let g = &spec.grid;
    let (du, dv) = (u.slope.values(), v.slope.values());
    let (uu, vv) = (u.value.values(), v.value.values());
    let grad = integrate_split(g, all_cells(spec), g.nodes(), &[], spec.ln_p(), |i, t, _| {
        lerp(du, i, t) * lerp(dv, i, t)
    });
    let pot = integrate_split(g, all_cells(spec), g.nodes(), &[], spec.ln_m(), |i, t, _| {
        let v = spec.total_potential(i) + t * (spec.total_potential(i + 1) - spec.total_potential(i));
        v * lerp(uu, i, t) * lerp(vv, i, t)
    });
    let bdry = LogQuantity::from_f64(spec.robin() * uu[0] * vv[0]);
    grad.add(pot).add(bdry).scale(spec.multiplicity())
}

/// ‖v‖²_{2,m} in log form.
pub fn l2_norm_sq(spec: &OperatorSpec, v: &GridFunction) -> Result<LogQuantity> {
    check_grid(spec, v)?;
    let vv = v.values();
    let g = &spec.grid;
    Ok(integrate_split(g, all_cells(spec), g.nodes(), &[], spec.ln_m(), |i, t, _| {
        let v = lerp(vv, i, t);
        v * v
    })
    .scale(spec.multiplicity()))
}

/// ‖v‖_Q = √(Q(v,v) + (1+c)‖v‖²).
pub fn q_norm(spec: &OperatorSpec, v: &GridFunction) -> Result<f64> {
    check_grid(spec, v)?;
    q_norm_field(spec, &Field::from_values(v.clone()))
}

pub fn q_norm_field(spec: &OperatorSpec, v: &Field) -> Result<f64> {
    let q = form_of_fields(spec, v, v);
    let m = l2_norm_sq(spec, &v.value)?.scale(1.0 + spec.semibound);
    let s = q.add(m);
    if s.sign < 0 {
        return Err(Error::NegativeRadicand(s.value()));
    }
    Ok(s.sqrt().value())
}

/// The transformed spec with weight m·h², potential −W and no shift.
pub fn ground_state_transform(spec: &OperatorSpec, h: &GridFunction) -> Result<OperatorSpec> {
    check_grid(spec, h)?;
    ground_state_transform_field(spec, &Field::from_values(h.clone()))
}

pub fn ground_state_transform_field(spec: &OperatorSpec, h: &Field) -> Result<OperatorSpec> {
    check_grid(spec, &h.value)?;
    if let Some(i) = h.value.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositive(i));
    }
    let hv = h.value.values();
    let ln_h2: Vec<f64> = hv.iter().map(|v| 2.0 * v.ln()).collect();
    let d_h2: Vec<f64> = hv.iter().zip(h.slope.values()).map(|(v, d)| 2.0 * v * d).collect();
    let sampled = Sampled::from_log(spec.grid.nodes().to_vec(), ln_h2, d_h2);
    let weight = Profile::Product(vec![spec.weight.clone(), Profile::Sampled(Arc::new(sampled))]);
    let potential = match &spec.shift {
        Some(w) => Profile::Product(vec![Profile::Const(-1.0), w.clone()]),
        None => Profile::Const(0.0),
    };
    let left = match spec.left {
        LeftBoundary::Dirichlet => LeftBoundary::Dirichlet,
        LeftBoundary::Regular => LeftBoundary::Regular,
        b => {
            let beta = if let LeftBoundary::Robin(beta) = b { beta } else { 0.0 };
            let p0 = spec.ln_p[0].exp();
            let (h0, dh0) = (hv[0], h.slope.values()[0]);
            LeftBoundary::Robin(h0 * h0 * (beta - p0 * dh0 / h0))
        }
    };
    let mut b = OperatorSpec::builder(&spec.grid)
        .weight(weight)
        .coefficient(spec.coefficient.clone())
        .potential(potential)
        .left(left)
        .mirrored(spec.mirrored);
    b.semibound = None;
    b.build()
}

/// Largest relative row defect of the discrete operator applied to h,
/// a check that h is (H + W)-harmonic away from the right edge.
pub fn harmonic_defect(spec: &OperatorSpec, h: &GridFunction) -> Result<f64> {
    check_grid(spec, h)?;
    let x = spec.grid.nodes();
    let hv = h.values();
    let n = x.len();
    let pm: Vec<f64> = (0..n - 1).map(|i| spec.flux_coefficient(0.5 * (x[i] + x[i + 1]))).collect();
    let mut worst: f64 = 0.0;
    let first = if spec.left == LeftBoundary::Dirichlet { 1 } else { 0 };
    for i in first..n - 1 {
        let right = pm[i] * (hv[i + 1] - hv[i]) / (x[i + 1] - x[i]);
        let (left, len) = if i == 0 {
            (spec.robin() * hv[0], 0.5 * (x[1] - x[0]))
        } else {
            (pm[i - 1] * (hv[i] - hv[i - 1]) / (x[i] - x[i - 1]), 0.5 * (x[i + 1] - x[i - 1]))
        };
        let mass = spec.ln_m[i].exp() * len;
        let pot = spec.total_potential(i) * mass * hv[i];
        let r = -(right - left) + pot;
        let scale = right.abs() + left.abs() + pot.abs();
        if scale > 0.0 && scale.is_finite() {
            worst = worst.max(r.abs() / scale);
        }
    }
    Ok(worst)
}

/// Symmetric tridiagonal realization of H with lumped mass. Unknowns are the
/// nodes `first..first + mass.len()`; the last node is a Dirichlet node.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: Grid,
    first: usize,
    k_diag: Vec<f64>,
    k_off: Vec<f64>,
    mass: Vec<f64>,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    semibound: f64,
    ln_shift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    pub eigenvalues: Vec<f64>,
    pub truncation: f64,
    pub mesh: f64,
    pub boundary: &'static str,
}

pub fn discretize(spec: &OperatorSpec) -> Result<DiscreteOperator> {
    let x = spec.grid.nodes();
    let n = x.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!("discretization needs at least 10 nodes, got {n}")));
    }
    let first = if spec.left == LeftBoundary::Dirichlet { 1 } else { 0 };
    let last = n - 1;
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    // Every entry carries the common factor e^{−shift}; spectra, residual
    // ratios and Hardy constants are invariant under it.
    let shift = spec.ln_m.iter().chain(spec.ln_p.iter()).copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    let ln_flux = |t: f64| spec.coefficient.ln_abs(t) + spec.weight.ln_abs(t) - shift;
    let pm: Vec<f64> = (0..n - 1).map(|i| ln_flux(0.5 * (x[i] + x[i + 1])).exp()).collect();
    let mult = spec.multiplicity();
    let mut k_diag = Vec::with_capacity(last - first);
    let mut mass = Vec::with_capacity(last - first);
    for i in first..last {
        let m = if i == 0 {
            if spec.singular_lo() {
                (spec.weight.ln_abs(x[0] + 0.25 * h[0]) - shift).exp() * 0.5 * h[0]
            } else {
                (spec.ln_m[0] - shift).exp() * 0.5 * h[0]
            }
        } else {
            (spec.ln_m[i] - shift).exp() * 0.5 * (h[i - 1] + h[i])
        };
        let mut k = pm[i] / h[i] + spec.total_potential(i) * m;
        if i > 0 {
            k += pm[i - 1] / h[i - 1];
        } else {
            k += spec.robin() * (-shift).exp();
        }
        k_diag.push(mult * k);
        mass.push(mult * m);
    }
    let k_off: Vec<f64> = (first..last - 1).map(|i| -mult * pm[i] / h[i]).collect();
    if let Some(i) = mass.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
        if spec.ln_weight_span() > 600.0 {
            return Err(Error::InvalidParameter(format!(
                "weight spans e^{:.0} on the grid; the discretization needs a narrower window",
                spec.ln_weight_span()
            )));
        }
        return Err(Error::NonPositive(i + first));
    }
    let diag: Vec<f64> = k_diag.iter().zip(&mass).map(|(k, m)| k / m).collect();
    let offdiag: Vec<f64> =
        k_off.iter().enumerate().map(|(j, e)| e / (mass[j].sqrt() * mass[j + 1].sqrt())).collect();
    Ok(DiscreteOperator {
        grid: spec.grid.clone(),
        first,
        k_diag,
        k_off,
        mass,
        diag,
        offdiag,
        semibound: spec.semibound,
        ln_shift: shift,
    })
}

/// Number of negative pivots in the LDLᵀ factorization of the symmetric
/// tridiagonal matrix with diagonal `d(i)` and off-diagonal `e`.
pub fn negative_pivots(n: usize, d: impl Fn(usize) -> f64, e: &[f64]) -> usize {
    let mut count = 0;
    let mut piv = 0.0;
    for i in 0..n {
        let mut q = d(i);
        if i > 0 {
            q -= e[i - 1] * e[i - 1] / piv;
        }
        if q == 0.0 {
            q = f64::EPSILON * (d(i).abs() + 1e-300);
        }
        if q < 0.0 {
            count += 1;
        }
        piv = q;
    }
    count
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn first(&self) -> usize {
        self.first
    }
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }
    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
    pub fn semibound(&self) -> f64 {
        self.semibound
    }
    /// Stiffness and mass entries carry the factor e^{−ln_shift}.
    pub fn ln_shift(&self) -> f64 {
        self.ln_shift
    }

    /// Build directly from a symmetric tridiagonal matrix with unit mass.
    pub fn from_matrix(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n < 1 || offdiag.len() + 1 != n {
            return Err(Error::LengthMismatch { expected: n.saturating_sub(1), got: offdiag.len() });
        }
        let grid = Grid::uniform(0.0, 1.0, n.max(2) + 1)?;
        Ok(Self {
            grid,
            first: 1,
            k_diag: diag.clone(),
            k_off: offdiag.clone(),
            mass: vec![1.0; n],
            diag,
            offdiag,
            semibound: 0.0,
            ln_shift: 0.0,
        })
    }

    pub fn restrict(&self, f: &GridFunction) -> Result<Vec<f64>> {
        if !self.grid.same(f.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(f.values()[self.first..self.first + self.dim()].to_vec())
    }

    pub fn extend(&self, y: &[f64]) -> Result<GridFunction> {
        let mut v = vec![0.0; self.grid.len()];
        v[self.first..self.first + y.len()].copy_from_slice(y);
        GridFunction::new(self.grid.clone(), v)
    }

    /// K·u for the stiffness matrix on the unknowns.
    pub fn apply_stiffness(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.k_diag[i] * u[i];
                if i > 0 {
                    s += self.k_off[i - 1] * u[i - 1];
                }
                if i + 1 < n {
                    s += self.k_off[i] * u[i + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below σ.
    pub fn count_below(&self, sigma: f64) -> usize {
        negative_pivots(self.dim(), |i| self.diag[i] - sigma, &self.offdiag)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The j-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (lo, hi) = self.gershgorin();
        self.bisect(j, lo, hi)
    }

    fn bisect(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        let span = hi - lo;
        lo -= 1e-12 * span.max(1.0);
        hi += 1e-12 * span.max(1.0);
        for _ in 0..200 {
            let tol = 1e-12f64.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
            if hi - lo <= tol {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalues nearest to λ from below and above (either may be absent).
    pub fn bracket(&self, lambda: f64) -> (Option<f64>, Option<f64>) {
        let j = self.count_below(lambda);
        let (lo, hi) = self.gershgorin();
        let below = (j > 0).then(|| self.bisect(j - 1, lo, lambda.min(hi)));
        let above = (j < self.dim()).then(|| self.bisect(j, lambda.max(lo), hi));
        (below, above)
    }

    pub fn nearest_eigenvalue(&self, lambda: f64) -> f64 {
        match self.bracket(lambda) {
            (Some(a), Some(b)) => {
                if lambda - a <= b - lambda {
                    a
                } else {
                    b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => b,
            (None, None) => f64::NAN,
        }
    }

    /// Eigenpair by inverse iteration; the vector holds function values
    /// normalized to unit mass norm, zero at Dirichlet nodes.
    pub fn eigenpair(&self, j: usize) -> Result<(f64, GridFunction)> {
        let mu = self.eigenvalue(j);
        let n = self.dim();
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
        for _ in 0..4 {
            let sub = self.offdiag.clone();
            let sup = self.offdiag.clone();
            let d: Vec<f64> = self.diag.iter().map(|v| v - mu).collect();
            solve_tridiag_pivot(sub, d, sup, &mut y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
        }
        let u: Vec<f64> = y.iter().zip(&self.mass).map(|(v, m)| v / m.sqrt()).collect();
        Ok((mu, self.extend(&u)?))
    }

    /// Solve (K + s M) u = rhs_vec for a vector on the unknowns.
    fn solve_spd(&self, s: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let d: Vec<f64> = (0..n).map(|i| self.k_diag[i] + s * self.mass[i]).collect();
        thomas(&self.k_off, &d, rhs)
    }

    /// Solve (H_d + shift) u = rhs in the function sense.
    pub fn solve_shifted(&self, shift: f64, rhs: &GridFunction) -> Result<GridFunction> {
        let neg = self.count_below(-shift);
        if neg > 0 {
            return Err(Error::NotPositiveDefinite { negative: neg });
        }
        let f = self.restrict(rhs)?;
        let b: Vec<f64> = f.iter().zip(&self.mass).map(|(v, m)| v * m).collect();
        self.extend(&self.solve_spd(shift, &b))
    }

    /// Dual-norm Weyl residual of the normalized w at λ.
    pub fn weyl_residual(&self, w: &GridFunction, lambda: f64) -> Result<f64> {
        let wv = self.restrict(w)?;
        let kw = self.apply_stiffness(&wv);
        let r: Vec<f64> = kw.iter().zip(&wv).zip(&self.mass).map(|((k, w), m)| k - lambda * m * w).collect();
        let norm_sq: f64 = wv.iter().zip(&self.mass).map(|(w, m)| w * w * m).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::InvalidParameter("w has zero norm".into()));
        }
        let shift = 1.0 + self.semibound;
        let neg = self.count_below(-shift);
        if neg > 0 {
            return Err(Error::NotPositiveDefinite { negative: neg });
        }
        let z = self.solve_spd(shift, &r);
        let rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        Ok((rz.max(0.0) / norm_sq).sqrt())
    }

    /// Largest μ with D v = μ (K + (1+c)M) v for the diagonal D ≥ 0.
    pub fn largest_generalized_eigenvalue(&self, d: &[f64]) -> Result<f64> {
        let n = self.dim();
        if d.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: d.len() });
        }
        if d.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        let shift = 1.0 + self.semibound;
        let neg = self.count_below(-shift);
        if neg > 0 {
            return Err(Error::NotPositiveDefinite { negative: neg });
        }
        // The maximizer decays like e^{−Σ κ} away from supp D with the local
        // rate κ = √(shift·m/k) per cell; 25 decay lengths lose nothing in f64.
        let first = d.iter().position(|&v| v > 0.0).unwrap_or(0);
        let last = d.iter().rposition(|&v| v > 0.0).unwrap_or(n - 1);
        let rate = |i: usize| (shift * self.mass[i] / self.k_off[i].abs()).sqrt();
        let (mut lo, mut acc) = (first, 0.0);
        while lo > 0 && acc < 25.0 {
            lo -= 1;
            acc += rate(lo);
        }
        let (mut hi, mut acc) = (last, 0.0);
        while hi + 1 < n && acc < 25.0 {
            acc += rate(hi);
            hi += 1;
        }
        let window = DiscreteOperator {
            grid: self.grid.clone(),
            first: self.first + lo,
            diag: self.diag[lo..=hi].to_vec(),
            offdiag: self.offdiag[lo..hi].to_vec(),
            mass: self.mass[lo..=hi].to_vec(),
            k_diag: self.k_diag[lo..=hi].to_vec(),
            k_off: self.k_off[lo..hi].to_vec(),
            semibound: self.semibound,
            ln_shift: self.ln_shift,
        };
        window.generalized_on_window(&d[lo..=hi], shift)
    }

    fn generalized_on_window(&self, d: &[f64], shift: f64) -> Result<f64> {
        let n = self.dim();
        let b_diag: Vec<f64> = (0..n).map(|i| self.k_diag[i] + shift * self.mass[i]).collect();
        // Inverse power iteration gives a Rayleigh-quotient lower bound.
        let mut y: Vec<f64> = d.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        let mut mu = 0.0;
        for _ in 0..40 {
            let t: Vec<f64> = y.iter().zip(d).map(|(a, b)| a * b).collect();
            y = thomas(&self.k_off, &b_diag, &t);
            let by = {
                let mut s = 0.0;
                for i in 0..n {
                    let mut r = b_diag[i] * y[i];
                    if i > 0 {
                        r += self.k_off[i - 1] * y[i - 1];
                    }
                    if i + 1 < n {
                        r += self.k_off[i] * y[i + 1];
                    }
                    s += r * y[i];
                }
                s
            };
            let dy: f64 = y.iter().zip(d).map(|(a, b)| a * a * b).sum();
            let next = dy / by;
            let norm = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            y.iter_mut().for_each(|v| *v /= norm);
            let done = (next - mu).abs() <= 1e-10 * next.abs();
            mu = next;
            if done {
                break;
            }
        }
        // Sylvester inertia of B − D/t counts eigenvalues above t; refine by bisection.
        let above = |t: f64| negative_pivots(n, |i| b_diag[i] - d[i] / t, &self.k_off);
        let mut lo = mu * (1.0 - 1e-9);
        if above(lo) == 0 {
            return Ok(mu);
        }
        let mut hi = d.iter().zip(&self.mass).map(|(a, m)| a / m).fold(0.0, f64::max) * 1.01;
        while above(hi) > 0 {
            hi *= 2.0;
        }
        while hi - lo > 1e-9 * hi {
            let mid = 0.5 * (lo + hi);
            if above(mid) > 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Thomas algorithm for symmetric tridiagonal systems (no pivoting).
fn thomas(off: &[f64], diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut denom = diag[0];
    y[0] = rhs[0] / denom;
    for i in 1..n {
        c[i - 1] = off[i - 1] / denom;
        denom = diag[i] - off[i - 1] * c[i - 1];
        y[i] = (rhs[i] - off[i - 1] * y[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

/// Gaussian elimination with partial pivoting for a general tridiagonal
/// system; `b` is overwritten with the solution. Zero pivots are nudged,
/// which is what inverse iteration wants.
pub fn solve_tridiag_pivot(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>, b: &mut [f64]) {
    let n = d.len();
    let tiny = f64::EPSILON * d.iter().fold(1e-300, |m: f64, v| m.max(v.abs()));
    if n == 1 {
        b[0] /= if d[0] == 0.0 { tiny } else { d[0] };
        return;
    }
    let mut du2 = vec![0.0; n];
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let tb = b[i];
            b[i] = b[i + 1];
            b[i + 1] = tb - fact * b[i + 1];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = tiny;
    }
    b[n - 1] /= d[n - 1];
    b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

pub fn eigenvalues_tridiagonal(op: &DiscreteOperator, k: usize) -> Result<SpectrumEstimate> {
    if k > op.dim() {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds matrix dimension {}", op.dim())));
    }
    let (lo, hi) = op.gershgorin();
    let mut out = Vec::with_capacity(k);
    let mut floor = lo;
    for j in 0..k {
        let ev = op.bisect(j, floor, hi);
        floor = ev.min(hi);
        out.push(ev);
    }
    Ok(SpectrumEstimate { eigenvalues: out, truncation: op.grid.hi(), mesh: op.grid.max_width(), boundary: "dirichlet" })
}

pub fn solve_shifted(op: &DiscreteOperator, shift: f64, rhs: &GridFunction) -> Result<GridFunction> {
    op.solve_shifted(shift, rhs)
}

pub fn weyl_residual_dual_norm(spec: &OperatorSpec, w: &GridFunction, lambda: f64) -> Result<f64> {
    check_grid(spec, w)?;
    discretize(spec)?.weyl_residual(w, lambda)
}

/// Best constant C in ∫ |v|² weight dm ≤ C ‖v‖²_Q over the discretization.
pub fn weak_hardy_constant(spec: &OperatorSpec, weight_fn: &GridFunction) -> Result<f64> {
    check_grid(spec, weight_fn)?;
    let op = discretize(spec)?;
    let wf = op.restrict(weight_fn)?;
    let d: Vec<f64> = wf.iter().zip(op.mass()).map(|(w, m)| w * m).collect();
    op.largest_generalized_eigenvalue(&d)
}

/// Convenience for closed-form functions on the spec grid.
pub fn sample(spec: &OperatorSpec, f: impl Fn(f64) -> f64) -> Result<GridFunction> {
    GridFunction::from_fn(&spec.grid, f)
}

/// Finite-difference derivative helper re-exported for callers of this module.
pub fn slope_of(f: &GridFunction) -> GridFunction {
    derivative(f)
}
