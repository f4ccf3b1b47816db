//! ODE shooting for `(a m u′)′ = m(V + W − λ)u`, Bessel functions of order
//! 0 and 1, minimal-growth solutions and one-dimensional Green functions.

use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid, GridFunction};
use crate::operator::{LeftBoundary, OperatorSpec};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Initial data `u(x_start) = u0`, `u′(x_start) = du0` for a fixed-step RK4 march.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    pub x_start: f64,
    pub u0: f64,
    pub du0: f64,
    pub step: f64,
}

impl ShootingConfig {
    pub fn new(x_start: f64, u0: f64, du0: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!("shooting step must be positive, got {step}")));
        }
        if u0 == 0.0 && du0 == 0.0 {
            return Err(Error::InvalidParameter("shooting data (u0, du0) must not both vanish".into()));
        }
        Ok(Self { x_start, u0, du0, step })
    }
}

/// Solution path in the variables (u, P = a m u′) with a running log-scale.
#[derive(Debug, Clone)]
pub(crate) struct Path {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub ln_scale: Vec<f64>,
}

struct Coefficients<'a> {
    spec: &'a OperatorSpec,
    lambda: f64,
}

impl Coefficients<'_> {
    #[inline]
    fn rhs(&self, x: f64, u: f64, p: f64) -> (f64, f64) {
        let flux = self.spec.flux_coefficient(x);
        let du = if flux > 0.0 { p / flux } else { 0.0 };
        let m = self.spec.weight().eval(x);
        (du, m * (self.spec.potential_at(x) - self.lambda) * u)
    }

    fn step(&self, x: f64, h: f64, u: f64, p: f64) -> (f64, f64) {
        let (k1u, k1p) = self.rhs(x, u, p);
        let (k2u, k2p) = self.rhs(x + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p);
        let (k3u, k3p) = self.rhs(x + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p);
        let (k4u, k4p) = self.rhs(x + h, u + h * k3u, p + h * k3p);
        (u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u), p + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p))
    }
}

/// March from `(x0, u, P)` through the increasing `nodes` (all ≥ x0), with
/// at most `step` per substep, renormalizing whenever the state gets large.
pub(crate) fn march(spec: &OperatorSpec, lambda: f64, x0: f64, u: f64, p: f64, nodes: &[f64], step: f64) -> Result<Path> {
    let c = Coefficients { spec, lambda };
    let n = nodes.len();
    let mut path = Path { u: Vec::with_capacity(n), p: Vec::with_capacity(n), ln_scale: Vec::with_capacity(n) };
    let (mut x, mut u, mut p, mut scale) = (x0, u, p, 0.0);
    for &target in nodes {
        let span = target - x;
        if span < 0.0 {
            return Err(Error::InvalidParameter(format!("node {target} lies before the shooting start {x}")));
        }
        if span > 0.0 {
            let subs = (span / step - 1e-9).ceil().max(1.0) as usize;
            let h = span / subs as f64;
            for k in 0..subs {
                (u, p) = c.step(x + k as f64 * h, h, u, p);
            }
        }
        x = target;
        if !u.is_finite() || !p.is_finite() {
            return Err(Error::Overflow(x));
        }
        let size = u.abs().max(p.abs());
        if size > 1e100 || (size < 1e-100 && size > 0.0) {
            u /= size;
            p /= size;
            scale += size.ln();
        }
        path.u.push(u);
        path.p.push(p);
        path.ln_scale.push(scale);
    }
    Ok(path)
}

/// Generalized eigenfunction by shooting, with its derivative.
pub fn shoot(spec: &OperatorSpec, lambda: f64, cfg: &ShootingConfig, grid: &Grid) -> Result<Field> {
    if cfg.x_start > grid.lo() {
        return Err(Error::InvalidParameter(format!(
            "shooting starts at {} but the grid begins at {}",
            cfg.x_start,
            grid.lo()
        )));
    }
    let p0 = spec.flux_coefficient(cfg.x_start) * cfg.du0;
    let path = march(spec, lambda, cfg.x_start, cfg.u0, p0, grid.nodes(), cfg.step)?;
    let mut u = Vec::with_capacity(grid.len());
    let mut du = Vec::with_capacity(grid.len());
    for (i, &x) in grid.nodes().iter().enumerate() {
        let s = path.ln_scale[i].exp();
        let v = path.u[i] * s;
        if !v.is_finite() || v.abs() > 1e300 {
            return Err(Error::Overflow(x));
        }
        let flux = spec.flux_coefficient(x);
        u.push(v);
        du.push(if flux > 0.0 { path.p[i] * s / flux } else { 0.0 });
    }
    Ok(Field::new(GridFunction::new(grid.clone(), u)?, GridFunction::new(grid.clone(), du)?)?)
}

pub fn integrate_ode_sl(spec: &OperatorSpec, lambda: f64, cfg: &ShootingConfig, grid: &Grid) -> Result<GridFunction> {
    Ok(shoot(spec, lambda, cfg, grid)?.value)
}

// ---------------------------------------------------------------- Bessel

fn series_j(n: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(n as i32);
    let mut sum = term;
    for k in 1..60 {
        term *= -q / (k as f64 * (k + n as usize) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn series_y0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for k in 1..60 {
        term *= -q / (k as f64 * k as f64);
        harmonic += 1.0 / k as f64;
        let t = -term * harmonic;
        sum += t;
        if t.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    2.0 / PI * ((0.5 * x).ln() + EULER_GAMMA) * series_j(0, x) + 2.0 / PI * sum
}

fn series_y1(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // ψ(k+1) + ψ(k+2) with ψ(k+1) = −γ + H_k.
    let mut harmonic = 0.0;
    let mut term = 1.0;
    let mut sum = -2.0 * EULER_GAMMA + 1.0;
    for k in 1..60 {
        term *= -q / (k as f64 * (k + 1) as f64);
        harmonic += 1.0 / k as f64;
        let t = term * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1) as f64);
        sum += t;
        if t.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -2.0 / (PI * x) + 2.0 / PI * (0.5 * x).ln() * series_j(1, x) - 0.5 * x / PI * sum
}

/// J0, J1, Y0, Y1 on the middle range by Miller's backward recurrence and
/// the Neumann series for Y0; Y1 = −Y0′ uses J_{2k}′ = (J_{2k−1} − J_{2k+1})/2.
fn miller(x: f64) -> [f64; 4] {
    let top = (x as usize + 40) & !1;
    let mut j = vec![0.0; top + 2];
    j[top] = 1e-30;
    for k in (1..=top).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
    }
    let mut norm = j[0];
    for k in (2..=top).step_by(2) {
        norm += 2.0 * j[k];
    }
    j.iter_mut().for_each(|v| *v /= norm);
    let lg = (0.5 * x).ln() + EULER_GAMMA;
    let mut s = 0.0;
    let mut ds = 0.0;
    for k in 1..=top / 2 - 1 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * j[2 * k] / k as f64;
        ds += sign * 0.5 * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
    }
    let y0 = 2.0 / PI * lg * j[0] - 4.0 / PI * s;
    let dy0 = 2.0 / PI * (j[0] / x - lg * j[1]) - 4.0 / PI * ds;
    [j[0], j[1], y0, -dy0]
}

/// Hankel asymptotic expansion; returns (J_ν, Y_ν) for ν ∈ {0, 1}.
fn hankel(nu: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() > last || a.abs() < 1e-17 {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    // χ = x − (ν/2 + 1/4)π, expanded to keep the argument reduction exact.
    let (s, c) = x.sin_cos();
    let phase = (nu as f64 * 0.5 + 0.25) * PI;
    let (sp, cp) = phase.sin_cos();
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * cos_chi - q * sin_chi), amp * (p * sin_chi + q * cos_chi))
}

const SERIES_LIMIT: f64 = 8.0;
const HANKEL_LIMIT: f64 = 25.0;

fn bessel_all(x: f64) -> [f64; 4] {
    if x < SERIES_LIMIT {
        [series_j(0, x), series_j(1, x), series_y0(x), series_y1(x)]
    } else if x < HANKEL_LIMIT {
        miller(x)
    } else {
        let (j0, y0) = hankel(0, x);
        let (j1, y1) = hankel(1, x);
        [j0, j1, y0, y1]
    }
}

pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        series_j(0, ax)
    } else {
        bessel_all(ax)[0]
    }
}

pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT { series_j(1, ax) } else { bessel_all(ax)[1] };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn bessel_y0(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("Y0 needs x > 0, got {x}")));
    }
    Ok(bessel_all(x)[2])
}

pub fn bessel_y1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("Y1 needs x > 0, got {x}")));
    }
    Ok(bessel_all(x)[3])
}

/// (J1, J1′, Y1, Y1′) at x > 0.
pub fn bessel_1_with_derivatives(x: f64) -> Result<[f64; 4]> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("Bessel derivatives need x > 0, got {x}")));
    }
    let [j0, j1, y0, y1] = bessel_all(x);
    Ok([j1, j0 - j1 / x, y1, y0 - y1 / x])
}

/// u(x) = (1/x)(A J_{−1}(√λ x) + B Y_{−1}(√λ x)) solving −u″ − (3/x)u′ = λu.
pub fn bessel_eigenfunction_oracle(a: f64, b: f64, lambda: f64, x: f64) -> f64 {
    bessel_oracle_with_derivative(a, b, lambda, x).0
}

/// The oracle value and its x-derivative.
pub fn bessel_oracle_with_derivative(a: f64, b: f64, lambda: f64, x: f64) -> (f64, f64) {
    let k = lambda.sqrt();
    let Ok([j, dj, y, dy]) = bessel_1_with_derivatives(k * x) else {
        return (f64::NAN, f64::NAN);
    };
    let s = a * j + b * y;
    let ds = k * (a * dj + b * dy);
    (-s / x, -ds / x + s / (x * x))
}

/// Coefficients (A, B) of the oracle matching u(x0) = u0, u′(x0) = du0.
pub fn bessel_coefficients(lambda: f64, x0: f64, u0: f64, du0: f64) -> Result<(f64, f64)> {
    if !(lambda > 0.0) || !(x0 > 0.0) {
        return Err(Error::InvalidParameter(format!("Bessel oracle needs lambda > 0 and x0 > 0, got {lambda}, {x0}")));
    }
    let (ua, dua) = bessel_oracle_with_derivative(1.0, 0.0, lambda, x0);
    let (ub, dub) = bessel_oracle_with_derivative(0.0, 1.0, lambda, x0);
    let det = ua * dub - ub * dua;
    Ok(((u0 * dub - ub * du0) / det, (ua * du0 - u0 * dua) / det))
}

// ---------------------------------------------------------------- minimal growth

/// Positive solution of minimal growth at the right end, kept in log form.
#[derive(Debug, Clone)]
pub struct MinimalGrowth {
    grid: Grid,
    ln_value: Vec<f64>,
    log_slope: Vec<f64>,
    critical: bool,
}

impl MinimalGrowth {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    pub fn ln_value(&self) -> &[f64] {
        &self.ln_value
    }
    /// u′/u at every node.
    pub fn log_slope(&self) -> &[f64] {
        &self.log_slope
    }
    /// True when ∫ dx/(p u²) diverges: no decaying partner exists.
    pub fn critical(&self) -> bool {
        self.critical
    }
    pub fn values(&self) -> Result<GridFunction> {
        GridFunction::new(self.grid.clone(), self.ln_value.iter().map(|v| v.exp()).collect())
    }
    pub fn field(&self) -> Result<Field> {
        let v = self.values()?;
        let s: Vec<f64> = v.values().iter().zip(&self.log_slope).map(|(a, b)| a * b).collect();
        Field::new(v, GridFunction::new(self.grid.clone(), s)?)
    }
}

fn lse(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else if m == f64::INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

/// Minimal-growth solution by reduction of order: with u1 the solution of
/// Neumann data at the left edge, u = u1 ∫_x^∞ ds/(p u1²), normalized to 1 at
/// the left edge. The tail beyond `x_far` follows a local power law.
pub fn minimal_growth(spec: &OperatorSpec, lambda: f64, x_far: f64, grid: &Grid, step: f64) -> Result<MinimalGrowth> {
    let span = grid.hi() - grid.lo();
    if !(x_far >= grid.hi() + 0.2 * span) {
        return Err(Error::InvalidParameter(format!(
            "x_far = {x_far} must exceed the grid end {} by 20% of the span",
            grid.hi()
        )));
    }
    let mut nodes = grid.nodes().to_vec();
    let mut h = grid.width(grid.len() - 2);
    while *nodes.last().unwrap() < x_far {
        h *= 1.05;
        let next = (nodes.last().unwrap() + h).min(x_far);
        nodes.push(next);
    }
    let path = march(spec, lambda, grid.lo(), 1.0, 0.0, &nodes, step)?;
    for (i, &u) in path.u.iter().enumerate() {
        if !(u > 0.0) {
            return Err(Error::SignChange(nodes[i]));
        }
    }
    let n = nodes.len();
    let ln_u1: Vec<f64> = (0..n).map(|i| path.u[i].ln() + path.ln_scale[i]).collect();
    let ln_p: Vec<f64> = nodes.iter().map(|&x| spec.coefficient().ln_abs(x) + spec.weight().ln_abs(x)).collect();
    let ln_f: Vec<f64> = (0..n).map(|i| -ln_p[i] - 2.0 * ln_u1[i]).collect();
    let u1_log_slope: Vec<f64> = (0..n)
        .map(|i| if ln_p[i].is_finite() { path.p[i] / path.u[i] / ln_p[i].exp() } else { 0.0 })
        .collect();

    // Local decay of f at the far end decides convergence of the tail.
    let back = (n - 1).saturating_sub((n / 10).max(2));
    let (xa, xb) = (nodes[back], nodes[n - 1]);
    let drop = ln_f[back] - ln_f[n - 1];
    let tail = if xa > 0.0 {
        let q = drop / (xb / xa).ln();
        (q > 1.05).then(|| ln_f[n - 1] + xb.ln() - (q - 1.0).ln())
    } else {
        let s = drop / (xb - xa);
        (s > 1e-3).then(|| ln_f[n - 1] - s.ln())
    };
    let m = grid.len();
    let Some(tail) = tail else {
        let ln_value: Vec<f64> = ln_u1[..m].iter().map(|v| v - ln_u1[0]).collect();
        return Ok(MinimalGrowth { grid: grid.clone(), ln_value, log_slope: u1_log_slope[..m].to_vec(), critical: true });
    };
    let mut ln_i = vec![0.0; n];
    ln_i[n - 1] = tail;
    for i in (0..n - 1).rev() {
        let piece = (0.5 * (nodes[i + 1] - nodes[i])).ln() + lse(ln_f[i], ln_f[i + 1]);
        ln_i[i] = lse(ln_i[i + 1], piece);
    }
    let anchor = (0..m).find(|&i| (ln_u1[i] + ln_i[i]).is_finite()).ok_or(Error::NonFinite(0))?;
    let ln0 = ln_u1[anchor] + ln_i[anchor];
    let ln_value: Vec<f64> = (0..m).map(|i| ln_u1[i] + ln_i[i] - ln0).collect();
    let log_slope: Vec<f64> = (0..m).map(|i| u1_log_slope[i] - (ln_f[i] - ln_i[i]).exp()).collect();
    Ok(MinimalGrowth { grid: grid.clone(), ln_value, log_slope, critical: false })
}

pub fn minimal_growth_solution(spec: &OperatorSpec, lambda: f64, x_far: f64, grid: &Grid) -> Result<GridFunction> {
    let step = grid.max_width().min(1e-2);
    minimal_growth(spec, lambda, x_far, grid, step)?.values()
}

// ---------------------------------------------------------------- Green function

#[derive(Debug, Clone)]
pub struct GreenFunction {
    pub pole: f64,
    /// Solution satisfying the left boundary condition, on nodes up to the
    /// pole; absent when the pole is the left edge.
    pub left_solution: Option<GridFunction>,
    /// Minimal solution at infinity, on nodes from the pole on.
    pub right_solution: GridFunction,
    /// 1/(a m W) with both solutions equal to 1 at the pole.
    pub normalization: f64,
}

impl GreenFunction {
    /// G(x, pole).
    pub fn eval(&self, x: f64) -> f64 {
        match &self.left_solution {
            Some(left) if x < self.pole => self.normalization * left.eval(x),
            _ => self.normalization * self.right_solution.eval(x),
        }
    }
}

pub fn green_function(spec: &OperatorSpec, pole: f64) -> Result<GreenFunction> {
    let grid = spec.grid();
    if !(pole >= grid.lo() && pole < grid.hi()) {
        return Err(Error::OutOfRange { level: pole, lo: grid.lo(), hi: grid.hi() });
    }
    let k = grid.nearest(pole);
    let pole = grid.nodes()[k];
    let step = grid.max_width().min(1e-2);
    let right_grid = grid.suffix(k)?;
    let far = right_grid.hi() + 0.25 * (right_grid.hi() - right_grid.lo());
    let right = minimal_growth(spec, 0.0, far, &right_grid, step)?;
    let (u_r, flux_r) = (1.0, right.log_slope()[0] * spec.flux_coefficient(pole));

    let lo = grid.lo();
    let (u0, p0) = match spec.left() {
        LeftBoundary::Dirichlet => (0.0, 1.0),
        LeftBoundary::Natural | LeftBoundary::Regular => (1.0, 0.0),
        LeftBoundary::Robin(beta) => (1.0, beta),
    };
    let path = march(spec, 0.0, lo, u0, p0, &grid.nodes()[..=k], step)?;
    let ln_end = path.ln_scale[k];
    let u_pole = path.u[k];
    if !(u_pole > 0.0) {
        return Err(Error::SignChange(pole));
    }
    let left_values: Vec<f64> = (0..=k).map(|i| path.u[i] / u_pole * (path.ln_scale[i] - ln_end).exp()).collect();
    let flux_l = path.p[k] / u_pole;
    let wronskian = (u_r * flux_l - flux_r * 1.0).abs();
    if wronskian < 1e-10 {
        return Err(Error::CriticalOperator(wronskian));
    }
    Ok(GreenFunction {
        pole,
        left_solution: if k >= 2 { Some(GridFunction::new(grid.prefix(k + 1)?, left_values)?) } else { None },
        right_solution: right.values()?,
        normalization: 1.0 / wronskian,
    })
}

/// Leading large-x term √(2/(πx))·cos(x − 3π/4) of J1.
pub fn bessel_j1_leading(x: f64) -> f64 {
    (2.0 / (PI * x)).sqrt() * (x - 3.0 * FRAC_PI_4).cos()
}
