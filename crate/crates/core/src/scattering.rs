//! Trace operators to null infinity, their inverses and the scattering map on
//! the Einstein cylinder.

use crate::characteristic::{solve_hoermander, HoermanderRun, LambdaSchedule, Tolerances};
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_on_slowed, EvolutionConfig, Nonlinearity};
use crate::fields::{cone_h1_norm, cone_l2_norm, restrict_to_surface, Boundary, CauchyData, CharacteristicData, Grid1D, ScalarFieldGrid};
use crate::geometry::{einstein_cylinder_metric, NullKind, NullSurface};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    ScriPlus,
    ScriMinus,
}

/// Trace of φ = ψ/sinχ on scri± over s ∈ [-π/2, π/2]; s = π/2 - χ on scri+
/// and s = χ - π/2 on scri-.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationProfile {
    pub kind: ProfileKind,
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub h1_norm: f64,
}

/// Grid over s matching a cylinder grid with `cells` cells.
pub fn profile_grid(cells: usize) -> Result<Grid1D> {
    Grid1D::spanning("s", -PI / 2.0, PI / 2.0, cells, [Boundary::Open; 2])
}

impl RadiationProfile {
    pub fn new(kind: ProfileKind, grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid(format!("{} values for {} nodes", values.len(), grid.n)));
        }
        if (grid.lo + PI / 2.0).abs() > 1e-12 || (grid.hi() - PI / 2.0).abs() > 1e-9 {
            return Err(Error::Grid("profile grid must span [-π/2, π/2]".into()));
        }
        let mut p = Self { kind, grid, values, h1_norm: 0.0 };
        p.h1_norm = cone_h1_norm(&p.to_characteristic()?)?;
        Ok(p)
    }

    pub fn from_fn(kind: ProfileKind, cells: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let grid = profile_grid(cells)?;
        let values = grid.nodes().into_iter().map(f).collect();
        Self::new(kind, grid, values)
    }

    pub fn zeros(kind: ProfileKind, cells: usize) -> Result<Self> {
        Self::from_fn(kind, cells, |_| 0.0)
    }

    pub fn from_characteristic(d: &CharacteristicData) -> Result<Self> {
        let cells = d.grid.n - 1;
        let kind = match d.surface.kind {
            NullKind::ScriPlus => ProfileKind::ScriPlus,
            NullKind::ScriMinus => ProfileKind::ScriMinus,
            _ => return Err(Error::Config("radiation profiles live on scri".into())),
        };
        let values = match kind {
            ProfileKind::ScriPlus => d.values.iter().rev().cloned().collect(),
            ProfileKind::ScriMinus => d.values.clone(),
        };
        Self::new(kind, profile_grid(cells)?, values)
    }

    pub fn to_characteristic(&self) -> Result<CharacteristicData> {
        let grid = Grid1D::cylinder(self.grid.n - 1)?;
        let (surface, values) = match self.kind {
            ProfileKind::ScriPlus => (NullSurface::cylinder_scri_plus(), self.values.iter().rev().cloned().collect()),
            ProfileKind::ScriMinus => (NullSurface::cylinder_scri_minus(), self.values.clone()),
        };
        Ok(CharacteristicData { surface, grid, values })
    }

    /// The same values read as a profile on the other component of scri.
    pub fn relabel(&self, kind: ProfileKind) -> Result<Self> {
        Self::new(kind, self.grid.clone(), self.values.clone())
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(self.kind, self.grid.clone(), self.values.iter().map(|v| alpha * v).collect())
    }

    pub fn combine(&self, other: &Self, a: f64, b: f64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::Grid("profiles on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self::new(self.kind, self.grid.clone(), values)
    }

    pub fn l2_norm(&self) -> Result<f64> {
        cone_l2_norm(&self.to_characteristic()?)
    }
}

/// Numerical parameters of the trace operators.
#[derive(Debug, Clone)]
pub struct ScatteringParams {
    pub cfl: f64,
    pub nonlinearity: Nonlinearity,
    pub schedule: LambdaSchedule,
    pub tol: Tolerances,
}

impl ScatteringParams {
    pub fn new(cfl: f64, nonlinearity: Nonlinearity, schedule: LambdaSchedule) -> Self {
        Self { cfl, nonlinearity, schedule, tol: Tolerances::default() }
    }

    pub fn lambda_max(&self) -> f64 {
        *self.schedule.values().last().expect("non-empty schedule")
    }
}

fn trace(d0: &CauchyData, t_end: f64, surface: NullSurface, cfl: f64, nl: Nonlinearity) -> Result<RadiationProfile> {
    if d0.stamp() != 0.0 {
        return Err(Error::Config("trace operators start from T = 0".into()));
    }
    let hist = evolve(&einstein_cylinder_metric(), d0, &EvolutionConfig::new(t_end, cfl, nl))?;
    if hist.frames.iter().any(|f| f.position.values.iter().any(|v| !v.is_finite())) {
        return Err(Error::BlowUp { stamp: hist.last().stamp(), detail: "non-finite values in the history".into() });
    }
    let grid = Grid1D::cylinder(d0.grid().n - 1)?;
    RadiationProfile::from_characteristic(&restrict_to_surface(&hist, &surface, &grid)?)
}

/// Future radiation profile of the solution with data d0 on T = 0.
pub fn trace_forward(d0: &CauchyData, cfl: f64, nl: Nonlinearity) -> Result<RadiationProfile> {
    trace(d0, PI, NullSurface::cylinder_scri_plus(), cfl, nl)
}

/// Past radiation profile of the solution with data d0 on T = 0.
pub fn trace_backward(d0: &CauchyData, cfl: f64, nl: Nonlinearity) -> Result<RadiationProfile> {
    trace(d0, -PI, NullSurface::cylinder_scri_minus(), cfl, nl)
}

/// Linear future trace.
pub fn linear_trace_operator(d0: &CauchyData, cfl: f64) -> Result<RadiationProfile> {
    trace_forward(d0, cfl, Nonlinearity::Linear)
}

fn reflect_to_plus(theta: &RadiationProfile) -> Result<CharacteristicData> {
    let plus = match theta.kind {
        ProfileKind::ScriPlus => theta.clone(),
        ProfileKind::ScriMinus => {
            let chi_order: Vec<f64> = theta.values.iter().rev().cloned().collect();
            RadiationProfile::new(ProfileKind::ScriPlus, theta.grid.clone(), chi_order)?
        }
    };
    let raw = plus.to_characteristic()?;
    CharacteristicData::new(raw.surface, raw.grid, raw.values)
}

fn reflect_back(kind: ProfileKind, d: CauchyData) -> CauchyData {
    match kind {
        ProfileKind::ScriPlus => d,
        ProfileKind::ScriMinus => CauchyData {
            velocity: ScalarFieldGrid { values: d.velocity.values.iter().map(|v| -v).collect(), ..d.velocity },
            ..d
        },
    }
}

fn cubic_flag(nl: Nonlinearity) -> Result<bool> {
    match nl {
        Nonlinearity::CubicDefocusing => Ok(true),
        Nonlinearity::Linear => Ok(false),
        Nonlinearity::Potential => Err(Error::Config("trace operators support the linear and cubic equations".into())),
    }
}

/// Data on T = 0 whose trace on scri± is θ, with vanishing transversal
/// derivative on scri, together with the full slowdown run. Past profiles are
/// handled by the time reflection T → -T, which maps scri- onto scri+ at
/// equal χ.
pub fn inverse_trace(theta: &RadiationProfile, p: &ScatteringParams) -> Result<(CauchyData, HoermanderRun)> {
    let data = reflect_to_plus(theta)?;
    let cfg = EvolutionConfig::new(PI, p.cfl, p.nonlinearity);
    let run = solve_hoermander(&einstein_cylinder_metric(), &data.surface, &data, &p.schedule, &cfg, &p.tol)?;
    let d = run.per_lambda.last().expect("non-empty schedule").clone();
    Ok((reflect_back(theta.kind, d), run))
}

/// The data of `inverse_trace` computed from the largest λ of the schedule
/// alone.
pub fn inverse_trace_data(theta: &RadiationProfile, p: &ScatteringParams) -> Result<CauchyData> {
    let data = reflect_to_plus(theta)?;
    let run = evolve_on_slowed(p.lambda_max(), &data, &data.grid, p.cfl, cubic_flag(p.nonlinearity)?)?;
    Ok(reflect_back(theta.kind, run.sigma0))
}

/// 𝔖 applied to a past profile, returning the future profile only.
pub fn scatter_profile(theta_minus: &RadiationProfile, p: &ScatteringParams) -> Result<RadiationProfile> {
    if theta_minus.kind != ProfileKind::ScriMinus {
        return Err(Error::Config("the scattering map takes a profile on scri-".into()));
    }
    trace_forward(&inverse_trace_data(theta_minus, p)?, p.cfl, p.nonlinearity)
}

#[derive(Debug, Clone)]
pub struct ScatteringReport {
    pub input: RadiationProfile,
    pub output: RadiationProfile,
    pub data: CauchyData,
    pub input_h1: f64,
    pub output_h1: f64,
    /// ‖output + input‖_{L²} / ‖input‖_{L²}.
    pub linear_reference_deviation: f64,
    /// ‖trace_backward(data) - input‖_{H¹} / ‖input‖_{H¹}.
    pub round_trip_error: f64,
    pub lambda_max: f64,
    pub runtime_secs: f64,
}

/// 𝔖 = 𝔗⁺∘(𝔗⁻)⁻¹ applied to a past profile.
pub fn scattering_map(theta_minus: &RadiationProfile, p: &ScatteringParams) -> Result<ScatteringReport> {
    if theta_minus.kind != ProfileKind::ScriMinus {
        return Err(Error::Config("the scattering map takes a profile on scri-".into()));
    }
    let start = Instant::now();
    let data = inverse_trace_data(theta_minus, p)?;
    let output = trace_forward(&data, p.cfl, p.nonlinearity)?;
    let back = trace_backward(&data, p.cfl, p.nonlinearity)?;
    let ratio = |num: f64, den: f64| if den == 0.0 { num } else { num / den };
    let lin = output.combine(&theta_minus.relabel(ProfileKind::ScriPlus)?, 1.0, 1.0)?;
    let rt = back.combine(theta_minus, 1.0, -1.0)?;
    Ok(ScatteringReport {
        linear_reference_deviation: ratio(lin.l2_norm()?, theta_minus.l2_norm()?),
        round_trip_error: ratio(rt.h1_norm, theta_minus.h1_norm),
        input_h1: theta_minus.h1_norm,
        output_h1: output.h1_norm,
        input: theta_minus.clone(),
        output,
        data,
        lambda_max: p.lambda_max(),
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}

/// Sampled ratios ‖op(θ) - op(ξ)‖_{H¹} / ‖θ - ξ‖_{H¹}.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioStats {
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    /// Counts over ten equal bins spanning [min, max].
    pub histogram: [usize; 10],
}

impl RatioStats {
    fn from_ratios(ratios: Vec<f64>) -> Self {
        let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut histogram = [0usize; 10];
        for r in &ratios {
            let k = if max > min { (((r - min) / (max - min)) * 10.0) as usize } else { 0 };
            histogram[k.min(9)] += 1;
        }
        Self { ratios, min, max, histogram }
    }
}

/// Profile in the H¹ ball of given radius around `center`: a band-limited
/// perturbation Σ_{k<modes} c_k sin(kπz) tapered to a window inside
/// (-π/2, π/2), with uniform coefficients rescaled to a uniform radius.
pub fn random_profile(center: &RadiationProfile, radius: f64, modes: usize, rng: &mut ChaCha8Rng) -> Result<RadiationProfile> {
    let coeffs: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let target = radius * rng.gen_range(0.0f64..1.0).sqrt();
    let shape = RadiationProfile::new(
        center.kind,
        center.grid.clone(),
        center
            .grid
            .nodes()
            .iter()
            .map(|&s| {
                let z = (s + 0.9) / 1.8;
                let w = if z > 0.0 && z < 1.0 { (1.0 - (2.0 * z - 1.0).powi(2)).powi(4) } else { 0.0 };
                w * coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * z).sin()).sum::<f64>()
            })
            .collect(),
    )?;
    if shape.h1_norm == 0.0 {
        return Ok(center.clone());
    }
    center.combine(&shape, 1.0, target / shape.h1_norm)
}

/// Draws `n_pairs` profile pairs in the H¹ ball and evaluates the Lipschitz
/// ratios of `op`; pairs are drawn sequentially from the seed and evaluated in
/// parallel. Coincident pairs are redrawn.
pub fn lipschitz_sample<F>(op: F, center: &RadiationProfile, radius: f64, n_pairs: usize, seed: u64) -> Result<RatioStats>
where
    F: Fn(&RadiationProfile) -> Result<RadiationProfile> + Sync,
{
    if !(radius > 0.0) || n_pairs < 2 {
        return Err(Error::Parameter("radius must be positive and at least two pairs drawn".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n_pairs);
    while pairs.len() < n_pairs {
        let a = random_profile(center, radius, 6, &mut rng)?;
        let b = random_profile(center, radius, 6, &mut rng)?;
        if a.combine(&b, 1.0, -1.0)?.h1_norm > 0.0 {
            pairs.push((a, b));
        }
    }
    let ratios = pairs
        .par_iter()
        .map(|(a, b)| {
            let num = op(a)?.combine(&op(b)?, 1.0, -1.0)?.h1_norm;
            Ok(num / a.combine(b, 1.0, -1.0)?.h1_norm)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioStats::from_ratios(ratios))
}

/// Sampled operator norm and inverse norm of the linear trace operator over
/// random Cauchy data: max and 1/min of ‖𝔗d‖_{H¹} / E_lin(d)^{1/2}.
pub fn linear_trace_bicontinuity(cells: usize, cfl: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let grid = Grid1D::cylinder(cells)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<CauchyData> = (0..samples)
        .map(|_| {
            let cp: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let cv: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = |c: &[f64], x: f64| {
                let w = crate::harness::fixtures::bump(x, PI / 2.0, 1.2);
                w * x.sin() * c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * x).cos()).sum::<f64>()
            };
            CauchyData::new(
                ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| 0.1 * f(&cp, x))?,
                ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| 0.1 * f(&cv, x))?,
            )
        })
        .collect::<Result<_>>()?;
    let ratios = data
        .par_iter()
        .map(|d| {
            let e = crate::energy::cylinder_slice_energy(d, false)?;
            Ok(linear_trace_operator(d, cfl)?.h1_norm / e.sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max = ratios.iter().cloned().fold(0.0f64, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((max, 1.0 / min))
}

/// `scattering_report.csv` row.
pub fn report_row(case: &str, amplitude: f64, h: f64, r: &ScatteringReport, lip: Option<&RatioStats>) -> String {
    let (lo, hi) = lip.map_or((f64::NAN, f64::NAN), |s| (s.min, s.max));
    format!(
        "{case},{amplitude},{h},{},{},{},{lo},{hi}",
        r.lambda_max, r.round_trip_error, r.linear_reference_deviation
    )
}

pub const REPORT_HEADER: &str = "case,amplitude,h,lambda_max,rt_error,lin_dev,lip_min,lip_max";
