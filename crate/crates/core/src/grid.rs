//! Nonuniform grids, grid functions and trapezoid quadrature.
//!
//! Integrals whose weights span hundreds of orders of magnitude (the planar
//! example lives at scales like `e^{e^{2n}}`) are accumulated against a
//! shifted log-weight and returned as a [`LogQuantity`].

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Strictly increasing node set, shared cheaply between grid functions.
#[derive(Debug, Clone)]
pub struct Grid {
    nodes: Arc<Vec<f64>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.nodes, &other.nodes) || self.nodes == other.nodes
    }
}

impl Grid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 3 nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "nodes not strictly increasing at index {i}"
            )));
        }
        Ok(Self { nodes: Arc::new(nodes) })
    }

    pub fn uniform(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        make_graded_grid(lo, hi, cells, Grading::Uniform)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lo(&self) -> f64 {
        self.nodes[0]
    }

    pub fn hi(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn width(&self, cell: usize) -> f64 {
        self.nodes[cell + 1] - self.nodes[cell]
    }

    pub fn max_width(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn same(&self, other: &Grid) -> bool {
        self == other
    }

    /// Index of the cell containing `x`, clamped to the grid.
    pub fn locate(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&t| t <= x);
        k.clamp(1, self.nodes.len() - 1) - 1
    }

    /// Index of the node nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.locate(x);
        if (x - self.nodes[i]).abs() <= (self.nodes[i + 1] - x).abs() {
            i
        } else {
            i + 1
        }
    }

    /// Nodes inside the closed window `[lo, hi]`.
    pub fn node_range(&self, lo: f64, hi: f64) -> Range<usize> {
        let a = self.nodes.partition_point(|&t| t < lo);
        let b = self.nodes.partition_point(|&t| t <= hi);
        a..b.max(a)
    }

    /// Same span with every cell bisected.
    pub fn halved(&self) -> Grid {
        let mut out = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(self.hi());
        Grid { nodes: Arc::new(out) }
    }

    /// The first `count` nodes as a new grid.
    pub fn prefix(&self, count: usize) -> Result<Grid> {
        Grid::new(self.nodes[..count].to_vec())
    }

    /// Nodes from `start` on as a new grid.
    pub fn suffix(&self, start: usize) -> Result<Grid> {
        Grid::new(self.nodes[start..].to_vec())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading {
    Uniform,
    /// Successive cell widths grow by `ratio`; ratio > 1 concentrates nodes near `x_lo`.
    Geometric(f64),
}

pub fn make_graded_grid(lo: f64, hi: f64, cells: usize, grading: Grading) -> Result<Grid> {
    if !(lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    if cells < 2 {
        return Err(Error::InvalidParameter(format!("n_cells = {cells} < 2")));
    }
    let span = hi - lo;
    let mut nodes = Vec::with_capacity(cells + 1);
    match grading {
        Grading::Uniform => {
            for i in 0..=cells {
                nodes.push(lo + span * i as f64 / cells as f64);
            }
        }
        Grading::Geometric(ratio) => {
            if !(ratio > 0.0) || !ratio.is_finite() {
                return Err(Error::InvalidParameter(format!("grading ratio {ratio} must be positive")));
            }
            let total: f64 = (0..cells).map(|k| ratio.powi(k as i32)).sum();
            let first = span / total;
            let mut x = lo;
            let mut w = first;
            nodes.push(lo);
            for _ in 0..cells {
                x += w;
                nodes.push(x);
                w *= ratio;
            }
        }
    }
    nodes[cells] = hi;
    Grid::new(nodes)
}

/// Grid with uniform spacing `fine` within `halo` of every breakpoint and
/// spacing growing linearly with distance elsewhere, capped at `max_cell`.
pub fn make_breakpoint_grid(
    lo: f64,
    hi: f64,
    breakpoints: &[f64],
    fine: f64,
    halo: f64,
    growth: f64,
    max_cell: f64,
) -> Result<Grid> {
    if !(lo < hi) {
        return Err(Error::InvalidRange { lo, hi });
    }
    if !(fine > 0.0 && halo >= 0.0 && growth >= 0.0 && max_cell >= fine) {
        return Err(Error::InvalidParameter("breakpoint grid parameters".into()));
    }
    let mut bps: Vec<f64> = breakpoints.iter().copied().filter(|b| b.is_finite()).collect();
    bps.sort_by(f64::total_cmp);
    let spacing = |x: f64| {
        let d = bps.iter().map(|b| (x - b).abs()).fold(f64::INFINITY, f64::min);
        let d = if d.is_finite() { d } else { hi - lo };
        (fine * (1.0 + growth * (d - halo).max(0.0))).min(max_cell)
    };
    let mut nodes = vec![lo];
    let mut x = lo;
    while x < hi {
        // Step with the smaller of the spacings at both ends so cells never straddle a halo.
        let s = spacing(x);
        let s = s.min(spacing(x + s));
        x += s;
        if hi - x < 0.5 * s {
            break;
        }
        nodes.push(x);
    }
    nodes.push(hi);
    Grid::new(nodes)
}

/// Node values of a function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.grid.same(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self::new(self.grid.clone(), values)
    }

    /// Piecewise-linear interpolation, clamped at the ends.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.grid.locate(x);
        let n = self.grid.nodes();
        let t = ((x - n[i]) / (n[i + 1] - n[i])).clamp(0.0, 1.0);
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

/// A grid function together with its derivative, both sampled on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub value: GridFunction,
    pub slope: GridFunction,
}

impl Field {
    pub fn new(value: GridFunction, slope: GridFunction) -> Result<Self> {
        check_same(value.grid(), slope.grid())?;
        Ok(Self { value, slope })
    }

    /// Derivative estimated by finite differences.
    pub fn from_values(value: GridFunction) -> Self {
        let slope = derivative(&value);
        Self { value, slope }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self { value: GridFunction::constant(grid, c), slope: GridFunction::constant(grid, 0.0) }
    }

    pub fn grid(&self) -> &Grid {
        self.value.grid()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            value: GridFunction { grid: self.value.grid.clone(), values: self.value.values.iter().map(|v| c * v).collect() },
            slope: GridFunction { grid: self.slope.grid.clone(), values: self.slope.values.iter().map(|v| c * v).collect() },
        }
    }
}

/// Signed number stored as `sign · exp(log_magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogQuantity {
    pub sign: i8,
    pub log_magnitude: f64,
}

impl LogQuantity {
    pub const ZERO: LogQuantity = LogQuantity { sign: 0, log_magnitude: f64::NEG_INFINITY };
    pub const ONE: LogQuantity = LogQuantity { sign: 1, log_magnitude: 0.0 };

    pub fn new(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self { sign: sign.signum(), log_magnitude }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// Plain value; overflows to ±inf and underflows to 0 when out of range.
    pub fn value(self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            self.sign as f64 * self.log_magnitude.exp()
        }
    }

    pub fn ln(self) -> f64 {
        self.log_magnitude
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        Self::new(self.sign.abs(), self.log_magnitude)
    }

    pub fn mul(self, o: Self) -> Self {
        Self::new(self.sign * o.sign, self.log_magnitude + o.log_magnitude)
    }

    pub fn div(self, o: Self) -> Self {
        if o.sign == 0 {
            return Self::new(self.sign, f64::INFINITY);
        }
        Self::new(self.sign * o.sign, self.log_magnitude - o.log_magnitude)
    }

    pub fn scale(self, c: f64) -> Self {
        self.mul(Self::from_f64(c))
    }

    /// Square root of a nonnegative quantity; negative inputs yield NaN magnitude.
    pub fn sqrt(self) -> Self {
        match self.sign {
            0 => Self::ZERO,
            1 => Self::new(1, 0.5 * self.log_magnitude),
            _ => Self { sign: 1, log_magnitude: f64::NAN },
        }
    }

    pub fn add(self, o: Self) -> Self {
        if self.sign == 0 {
            return o;
        }
        if o.sign == 0 {
            return self;
        }
        let (big, small) = if self.log_magnitude >= o.log_magnitude { (self, o) } else { (o, self) };
        let d = (small.log_magnitude - big.log_magnitude).exp();
        if big.sign == small.sign {
            Self::new(big.sign, big.log_magnitude + d.ln_1p())
        } else if d == 1.0 {
            Self::ZERO
        } else {
            Self::new(big.sign, big.log_magnitude + (-d).ln_1p())
        }
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(Self::new(-o.sign, o.log_magnitude))
    }
}

fn check_same(a: &Grid, b: &Grid) -> Result<()> {
    if a.same(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Composite trapezoid value of ∫ f·weight dx.
pub fn integrate(f: &GridFunction, weight: &GridFunction) -> Result<f64> {
    check_same(&f.grid, &weight.grid)?;
    let x = f.grid.nodes();
    let g = |i: usize| f.values[i] * weight.values[i];
    Ok((0..x.len() - 1).map(|i| 0.5 * (x[i + 1] - x[i]) * (g(i) + g(i + 1))).sum())
}

/// Trapezoid sum of log-domain samples with per-cell widths `dx`.
pub fn integrate_log(f_log: &[LogQuantity], dx: &[f64]) -> Result<LogQuantity> {
    if f_log.len() != dx.len() + 1 {
        return Err(Error::LengthMismatch { expected: dx.len() + 1, got: f_log.len() });
    }
    let shift = f_log
        .iter()
        .filter(|q| q.sign != 0)
        .map(|q| q.log_magnitude)
        .fold(f64::NEG_INFINITY, f64::max);
    if shift == f64::NEG_INFINITY {
        return Ok(LogQuantity::ZERO);
    }
    let plain = |q: &LogQuantity| q.sign as f64 * (q.log_magnitude - shift).exp();
    let sum: f64 = dx
        .iter()
        .enumerate()
        .map(|(i, &h)| 0.5 * h * (plain(&f_log[i]) + plain(&f_log[i + 1])))
        .sum();
    Ok(LogQuantity::from_f64(sum).mul(LogQuantity::new(1, shift)))
}

/// Centered nonuniform three-point differences, one-sided second order at the ends.
pub fn derivative(f: &GridFunction) -> GridFunction {
    let x = f.grid.nodes();
    let v = &f.values;
    let n = x.len();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let h1 = x[i] - x[i - 1];
        let h2 = x[i + 1] - x[i];
        d[i] = -h2 / (h1 * (h1 + h2)) * v[i - 1] + (h2 - h1) / (h1 * h2) * v[i]
            + h1 / (h2 * (h1 + h2)) * v[i + 1];
    }
    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
    d[0] = -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * v[0] + (h1 + h2) / (h1 * h2) * v[1]
        - h1 / (h2 * (h1 + h2)) * v[2];
    let (h1, h2) = (x[n - 1] - x[n - 2], x[n - 2] - x[n - 3]);
    d[n - 1] = (2.0 * h1 + h2) / (h1 * (h1 + h2)) * v[n - 1] - (h1 + h2) / (h1 * h2) * v[n - 2]
        + h1 / (h2 * (h1 + h2)) * v[n - 3];
    GridFunction { grid: f.grid.clone(), values: d }
}

fn window_values(f: &GridFunction, lo: f64, hi: f64) -> Result<&[f64]> {
    let r = f.grid.node_range(lo, hi);
    if r.is_empty() {
        return Err(Error::EmptyWindow { lo, hi });
    }
    Ok(&f.values[r])
}

pub fn sup_abs_on(f: &GridFunction, lo: f64, hi: f64) -> Result<f64> {
    Ok(window_values(f, lo, hi)?.iter().fold(0.0, |m, v| m.max(v.abs())))
}

pub fn inf_abs_on(f: &GridFunction, lo: f64, hi: f64) -> Result<f64> {
    Ok(window_values(f, lo, hi)?.iter().fold(f64::INFINITY, |m, v| m.min(v.abs())))
}

/// Weights (g_0, g_m, g_1) with ∫_0^1 g(s) e^{l_a + s(l_b − l_a)} ds
/// = g_0 g(0) + g_m g(1/2) + g_1 g(1) for every quadratic g. Written in terms
/// of the endpoint weights so large slopes cannot overflow.
pub fn exp_quadratic_weights(la: f64, lb: f64) -> (f64, f64, f64) {
    let c = lb - la;
    let wa = la.exp();
    // Moments ∫ s^k e^{c s} ds, k = 0, 1, 2, scaled by e^{l_a}.
    let (m0, m1, m2) = if c.abs() < 1.0 {
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        let mut term = 1.0;
        for j in 0..28 {
            let k = j as f64;
            m0 += term / (k + 1.0);
            m1 += term / (k + 2.0);
            m2 += term / (k + 3.0);
            term *= c / (k + 1.0);
            if term.abs() < 1e-18 {
                break;
            }
        }
        (wa * m0, wa * m1, wa * m2)
    } else {
        let wb = lb.exp();
        let c2 = c * c;
        ((wb - wa) / c, (wb * (c - 1.0) + wa) / c2, (wb * (c2 - 2.0 * c + 2.0) - 2.0 * wa) / (c2 * c))
    };
    (2.0 * m2 - 3.0 * m1 + m0, 4.0 * (m1 - m2), 2.0 * m2 - m1)
}

/// Second derivative of `ln_w` at node i from its neighbours; 0 at the ends
/// and wherever the weight is not finite.
fn log_curvature(x: &[f64], ln_w: &[f64], i: usize) -> Option<f64> {
    if i == 0 || i + 1 >= x.len() {
        return None;
    }
    let (h1, h2) = (x[i] - x[i - 1], x[i + 1] - x[i]);
    let k = 2.0 * ((ln_w[i + 1] - ln_w[i]) / h2 - (ln_w[i] - ln_w[i - 1]) / h1) / (h1 + h2);
    k.is_finite().then_some(k)
}

/// Cells whose level interval meets `[lo, hi]`, for nondecreasing `levels`.
pub fn cells_for_levels(levels: &[f64], lo: f64, hi: f64) -> Range<usize> {
    let a = levels.partition_point(|&l| l <= lo).saturating_sub(1);
    let b = levels.partition_point(|&l| l < hi).min(levels.len() - 1);
    a..b.max(a)
}

/// Integral of `f · exp(ln_w)` over `cells`, with every cell split where the
/// nondecreasing node `levels` cross one of the sorted `cuts`.
///
/// `f(i, θ, mid)` is evaluated at the local coordinate θ ∈ [0, 1] of cell `i`;
/// `mid` is the level at the middle of the current piece and selects the
/// branch of piecewise formulas. Each piece uses a three-point rule exact for
/// quadratic `f` against the log-linear interpolant of the weight, corrected
/// by the curvature of `ln_w`; exponential weights are integrated exactly.
pub fn integrate_split<F>(
    grid: &Grid,
    cells: Range<usize>,
    levels: &[f64],
    cuts: &[f64],
    ln_w: &[f64],
    f: F,
) -> LogQuantity
where
    F: Fn(usize, f64, f64) -> f64,
{
    if cells.is_empty() {
        return LogQuantity::ZERO;
    }
    let shift = ln_w[cells.start..=cells.end].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return LogQuantity::ZERO;
    }
    let x = grid.nodes();
    let mut k = cuts.partition_point(|&c| c <= levels[cells.start]);
    let mut thetas: Vec<f64> = Vec::with_capacity(8);
    let mut sum = 0.0;
    for i in cells {
        let (l0, l1) = (levels[i], levels[i + 1]);
        while k < cuts.len() && cuts[k] <= l0 {
            k += 1;
        }
        thetas.clear();
        thetas.push(0.0);
        let mut j = k;
        while j < cuts.len() && cuts[j] < l1 {
            thetas.push((cuts[j] - l0) / (l1 - l0));
            j += 1;
        }
        thetas.push(1.0);
        let h = x[i + 1] - x[i];
        let (w0, w1) = (ln_w[i] - shift, ln_w[i + 1] - shift);
        let curvature = match (log_curvature(x, ln_w, i), log_curvature(x, ln_w, i + 1)) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => 0.0,
        };
        let bend = |t: f64| if curvature == 0.0 { 1.0 } else { (-0.5 * t * (1.0 - t) * h * h * curvature).exp() };
        for p in thetas.windows(2) {
            let (ta, tb) = (p[0], p[1]);
            if tb <= ta {
                continue;
            }
            let tm = 0.5 * (ta + tb);
            let mid = l0 + tm * (l1 - l0);
            let (g0, gm, g1) = exp_quadratic_weights(w0 + ta * (w1 - w0), w0 + tb * (w1 - w0));
            let piece = f(i, ta, mid) * bend(ta) * g0 + f(i, tm, mid) * bend(tm) * gm + f(i, tb, mid) * bend(tb) * g1;
            sum += h * (tb - ta) * piece;
        }
    }
    LogQuantity::from_f64(sum).mul(LogQuantity::new(1, shift))
}

#[inline]
pub fn lerp(v: &[f64], i: usize, t: f64) -> f64 {
    if t == 0.0 {
        v[i]
    } else if t == 1.0 {
        v[i + 1]
    } else {
        v[i] + t * (v[i + 1] - v[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn graded_grid_examples() {
        let g = make_graded_grid(0.0, 1.0, 2, Grading::Uniform).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.5, 1.0]);
        let g = make_graded_grid(1.0, 4.0, 2, Grading::Geometric(2.0)).unwrap();
        assert_eq!(g.nodes(), &[1.0, 2.0, 4.0]);
        let g = make_graded_grid(0.0, 10.0, 1000, Grading::Uniform).unwrap();
        assert_eq!(g.len(), 1001);
        assert_relative_eq!(g.width(17), 0.01, max_relative = 1e-12);
        assert!(matches!(make_graded_grid(1.0, 1.0, 4, Grading::Uniform), Err(Error::InvalidRange { .. })));
        assert!(make_graded_grid(0.0, 1.0, 1, Grading::Uniform).is_err());
        assert!(make_graded_grid(0.0, 1.0, 4, Grading::Geometric(0.0)).is_err());
    }

    #[test]
    fn trapezoid_examples() {
        let g = Grid::uniform(0.0, 1.0, 2).unwrap();
        let one = GridFunction::constant(&g, 1.0);
        assert_eq!(integrate(&one, &one).unwrap(), 1.0);
        let g = Grid::uniform(0.0, 1.0, 10).unwrap();
        let x = GridFunction::from_fn(&g, |x| x).unwrap();
        assert_relative_eq!(integrate(&x, &GridFunction::constant(&g, 1.0)).unwrap(), 0.5, max_relative = 1e-14);
        let g = Grid::uniform(0.0, 1.0, 1000).unwrap();
        let x2 = GridFunction::from_fn(&g, |x| x * x).unwrap();
        assert!((integrate(&x2, &GridFunction::constant(&g, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn log_integration_examples() {
        let e100 = LogQuantity::new(1, 100.0);
        let r = integrate_log(&[e100, e100, e100], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(r.ln(), 100.0 + 2f64.ln(), max_relative = 1e-14);
        let r = integrate_log(&[LogQuantity::new(1, -50.0); 2], &[1.0]).unwrap();
        assert_relative_eq!(r.ln(), -50.0, max_relative = 1e-14);
        let r = integrate_log(
            &[LogQuantity::new(1, 1000.0 + 2f64.ln()), LogQuantity::ZERO, LogQuantity::new(1, 10.0)],
            &[1.0, 1.0],
        )
        .unwrap();
        assert!((r.ln() - 1000.0).abs() < 1e-12);
        assert!(integrate_log(&[e100], &[1.0]).is_err());
    }

    #[test]
    fn log_quantity_arithmetic() {
        let a = LogQuantity::from_f64(3.0);
        let b = LogQuantity::from_f64(-5.0);
        assert_relative_eq!(a.add(b).value(), -2.0, max_relative = 1e-14);
        assert_relative_eq!(a.sub(b).value(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(a.mul(b).value(), -15.0, max_relative = 1e-14);
        assert_relative_eq!(b.div(a).value(), -5.0 / 3.0, max_relative = 1e-14);
        assert!(a.sub(a).is_zero());
        assert_relative_eq!(LogQuantity::from_f64(16.0).sqrt().value(), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn derivative_examples() {
        let g = make_graded_grid(0.0, 2.0, 40, Grading::Geometric(1.05)).unwrap();
        let d = derivative(&GridFunction::from_fn(&g, |x| x).unwrap());
        assert!(d.values().iter().all(|v| (v - 1.0).abs() < 1e-12));
        let g = Grid::uniform(0.0, 1.0, 100).unwrap();
        let d = derivative(&GridFunction::from_fn(&g, |x| x * x).unwrap());
        for (x, v) in g.nodes().iter().zip(d.values()).skip(1).take(99) {
            assert!((v - 2.0 * x).abs() < 1e-12);
        }
        let g = Grid::uniform(0.0, 3.0, 3000).unwrap();
        let d = derivative(&GridFunction::from_fn(&g, f64::sin).unwrap());
        for (x, v) in g.nodes().iter().zip(d.values()) {
            assert!((v - x.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn window_extrema() {
        let g = Grid::uniform(0.0, 1.0, 10).unwrap();
        let f = GridFunction::from_fn(&g, |x| x).unwrap();
        assert_relative_eq!(sup_abs_on(&f, 0.2, 0.7).unwrap(), 0.7, max_relative = 1e-12);
        assert_relative_eq!(inf_abs_on(&f, 0.2, 0.7).unwrap(), 0.2, max_relative = 1e-12);
        let c = GridFunction::constant(&g, -3.0);
        assert_eq!(sup_abs_on(&c, 0.0, 1.0).unwrap(), 3.0);
        assert_eq!(inf_abs_on(&c, 0.0, 1.0).unwrap(), 3.0);
        assert!(matches!(sup_abs_on(&f, 0.21, 0.29), Err(Error::EmptyWindow { .. })));
        let g = Grid::uniform(0.0, std::f64::consts::PI, 40000).unwrap();
        let s = GridFunction::from_fn(&g, f64::sin).unwrap();
        assert!((sup_abs_on(&s, 0.0, std::f64::consts::PI).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn split_integration_is_exact_on_kinks() {
        // ∫_0^3 clamp(2 - x, 0, 1) dx = 1 + 1/2, kink at x = 1 and x = 2 inside cells.
        let g = Grid::uniform(0.0, 3.0, 7).unwrap();
        let levels: Vec<f64> = g.nodes().to_vec();
        let ln_w = vec![0.0; g.len()];
        let x = g.nodes().to_vec();
        let r = integrate_split(&g, 0..7, &levels, &[1.0, 2.0], &ln_w, |i, t, _| {
            (2.0 - lerp(&x, i, t)).clamp(0.0, 1.0)
        });
        assert_relative_eq!(r.value(), 1.5, max_relative = 1e-14);
        // Exponential weight e^{2x} is integrated through its log.
        let g = Grid::uniform(0.0, 3.0, 300).unwrap();
        let ln_w: Vec<f64> = g.nodes().iter().map(|x| 2.0 * x).collect();
        let r = integrate_split(&g, 0..300, g.nodes(), &[], &ln_w, |_, _, _| 1.0);
        let exact = (6f64.exp() - 1.0) / 2.0;
        assert!((r.value() / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn breakpoint_grid_refines_near_breakpoints() {
        let g = make_breakpoint_grid(0.0, 1000.0, &[100.0, 500.0], 0.01, 5.0, 0.1, 50.0).unwrap();
        let near = g.locate(100.0);
        assert!(g.width(near) <= 0.01 + 1e-12);
        assert!(g.max_width() <= 50.0 + 1e-9);
        assert!(g.len() < 20000);
        assert_eq!(g.hi(), 1000.0);
    }
}
