//! The four built-in scenarios, constructed programmatically. The CLI ships
//! equivalent config files; tests compare the two.

use crate::cutoff::SchedulePolicy;
use crate::error::Result;
use crate::grid::{make_breakpoint_grid, make_graded_grid, Grading, Grid};
use crate::operator::{LeftBoundary, OperatorSpec};
use crate::profile::Profile;
use crate::shnol::{Eigenfunction, Reference, Scenario};

pub const NAMES: [&str; 4] = ["r2-parabolic", "bessel-4d", "hyperbolic", "flat-shnol"];

pub fn by_name(name: &str) -> Option<Result<Scenario>> {
    match name {
        "r2-parabolic" => Some(r2_parabolic()),
        "bessel-4d" => Some(bessel_4d(1.0)),
        "hyperbolic" => Some(hyperbolic(3, 1.0)),
        "flat-shnol" => Some(flat_shnol(1.0)),
        _ => None,
    }
}

fn uniform(lo: f64, hi: f64, spacing: f64) -> Result<Grid> {
    make_graded_grid(lo, hi, ((hi - lo) / spacing).round() as usize, Grading::Uniform)
}

/// The plane in logarithmic radius t = ln ρ: dm = 2π e^{2t} dt, a = e^{−2t},
/// with u ≡ 1 at λ = 0 and the double-exponential schedule in t.
pub fn r2_parabolic() -> Result<Scenario> {
    let n_max = 6;
    let breaks: Vec<f64> = (1..=n_max).flat_map(|n| [(2.0 * n as f64).exp(), (2.0 * n as f64 + 1.0).exp()]).collect();
    let grid = make_breakpoint_grid(0.0, 4.5e5, &breaks, 0.01, 30.0, 0.1, 1000.0)?;
    let weight = Profile::Product(vec![Profile::Const(2.0 * std::f64::consts::PI), Profile::Exp(2.0)]);
    let spec = OperatorSpec::builder(&grid).weight(weight).coefficient(Profile::Exp(-2.0)).left(LeftBoundary::Natural).build()?;
    let disk = uniform(0.0, 200.0, 0.01)?;
    let oracle = OperatorSpec::builder(&disk)
        .weight(Profile::Product(vec![Profile::Const(2.0 * std::f64::consts::PI), Profile::Pow(1.0)]))
        .left(LeftBoundary::Regular)
        .build()?;
    Ok(Scenario {
        name: "r2-parabolic".into(),
        spec,
        lambda: 0.0,
        eigenfunction: Eigenfunction::ClosedForm(Profile::Const(1.0)),
        reference: Reference::One,
        robin_from_reference: false,
        evans_scale: 2.0 * std::f64::consts::PI,
        evans_offset: -std::f64::consts::PI,
        base: None,
        policy: SchedulePolicy::DoubleExponential,
        n_max,
        oracle: Some(oracle),
    })
}

/// Radial Laplacian of R⁴ outside the unit ball on a two-sided line,
/// dm = |x|³ dx, with the harmonic reference h = x⁻² and its Robin condition.
pub fn bessel_4d(lambda: f64) -> Result<Scenario> {
    let grid = uniform(1.0, 1850.0, 2e-3)?;
    let left = LeftBoundary::Robin(-2.0);
    let spec = OperatorSpec::builder(&grid).weight(Profile::AbsPow(3.0)).left(left).mirrored(true).build()?;
    let oracle = OperatorSpec::builder(&uniform(1.0, 200.0, 0.01)?).weight(Profile::AbsPow(3.0)).left(left).build()?;
    Ok(Scenario {
        name: "bessel-4d".into(),
        spec,
        lambda,
        eigenfunction: Eigenfunction::Shooting { u0: 1.0, du0: Some(-2.0), step: 2e-3 },
        reference: Reference::Supplied(Profile::AbsPow(-2.0)),
        robin_from_reference: false,
        evans_scale: 2.0,
        evans_offset: 0.0,
        base: None,
        policy: SchedulePolicy::DoubleExponential,
        n_max: 7,
        oracle: Some(oracle),
    })
}

/// Radial Laplacian of hyperbolic space of dimension `dim` outside the ball of
/// radius 1/2, shifted by the bottom of the spectrum ((dim − 1)/2)², with the
/// minimal-growth reference and its Robin condition.
pub fn hyperbolic(dim: u32, lambda: f64) -> Result<Scenario> {
    let k = (dim - 1) as f64;
    let (r0, hi) = (0.5, 240.0);
    let potential = Profile::Const(-0.25 * k * k);
    let spec = OperatorSpec::builder(&uniform(r0, hi, 2e-3)?)
        .weight(Profile::SinhPow(k))
        .potential(potential.clone())
        .left(LeftBoundary::Natural)
        .build()?;
    let oracle = OperatorSpec::builder(&uniform(r0, 60.0, 0.01)?)
        .weight(Profile::SinhPow(k))
        .potential(potential)
        .left(LeftBoundary::Natural)
        .build()?;
    // With h ∝ sinh^{−k/2}-type decay the canonical potential grows like
    // (r − r0)/sinh^k(r0); this display makes levels read as radii.
    let alpha = r0.sinh().powf(k);
    Ok(Scenario {
        name: if dim == 3 { "hyperbolic".into() } else { format!("hyperbolic-{dim}d") },
        spec,
        lambda,
        eigenfunction: Eigenfunction::Shooting { u0: 1.0, du0: None, step: 2e-3 },
        reference: Reference::Auto,
        robin_from_reference: true,
        evans_scale: alpha,
        evans_offset: r0 - 0.5 * alpha,
        base: None,
        policy: SchedulePolicy::Geometric { base: 2.2, spread: 2.0, scale: 1.0 },
        n_max: 8,
        oracle: Some(oracle),
    })
}

/// Free Laplacian on the line, u = cos(√λ x) by shooting, intrinsic
/// cut-offs (n, n + 1/2) around the origin.
pub fn flat_shnol(lambda: f64) -> Result<Scenario> {
    let spec = OperatorSpec::builder(&uniform(0.0, 302.0, 5e-3)?).left(LeftBoundary::Natural).mirrored(true).build()?;
    let oracle = OperatorSpec::builder(&uniform(0.0, 200.0, 0.01)?).left(LeftBoundary::Natural).build()?;
    Ok(Scenario {
        name: "flat-shnol".into(),
        spec,
        lambda,
        eigenfunction: Eigenfunction::Shooting { u0: 1.0, du0: Some(0.0), step: 5e-3 },
        reference: Reference::One,
        robin_from_reference: false,
        evans_scale: 1.0,
        evans_offset: -0.5,
        base: None,
        policy: SchedulePolicy::Intrinsic { b: 0.5 },
        n_max: 300,
        oracle: Some(oracle),
    })
}
