use super::Tolerances;
use crate::energy::cylinder_slice_energy;
use crate::error::{Error, Result};
use crate::evolution::{evolve, evolve_on_slowed, EvolutionConfig, Nonlinearity};
use crate::fields::{cone_h1_norm, restrict_to_surface, CauchyData, CharacteristicData, ScalarFieldGrid};
use crate::geometry::{causal_type, slow_metric, CausalType, MetricKind, ModelMetric, NullKind, NullSurface};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Increasing slowdown factors in [1/2, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSchedule {
    values: Vec<f64>,
}

impl LambdaSchedule {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Config("a λ schedule needs at least two entries".into()));
        }
        if values[0] < 0.5 || values.iter().any(|l| !(*l < 1.0)) {
            return Err(Error::Config("λ values must lie in [1/2, 1)".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("λ schedule must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// λ_n = 1 - 2^{-n-1} for n = 0..count.
    pub fn geometric(count: usize) -> Result<Self> {
        Self::new((0..count).map(|n| 1.0 - 0.5f64.powi(n as i32 + 1)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct HoermanderRun {
    pub schedule: LambdaSchedule,
    /// Data on Σ₀ = {T = 0} for each λ.
    pub per_lambda: Vec<CauchyData>,
    /// Full energy of each Σ₀ datum.
    pub energies: Vec<f64>,
    /// Linear energy of consecutive differences (entry k compares k+1 with k).
    pub differences: Vec<f64>,
    /// Richardson extrapolation in 1-λ of the last two data.
    pub extrapolated: CauchyData,
    /// Cone H¹ distance between the data and the future null trace of the
    /// solution evolved forward from the slice of the largest λ.
    pub trace_check: f64,
    /// Cone H¹ norm of the data.
    pub theta_norm: f64,
    pub converged: bool,
    pub tol_rel: f64,
}

/// Convergence rule: the last three differences decrease and the final one is
/// at most `tol_rel` times the first.
pub(crate) fn differences_converged(d: &[f64], tol_rel: f64) -> bool {
    if d.iter().all(|v| *v == 0.0) {
        return true;
    }
    let n = d.len();
    let tail = if n >= 3 { d[n - 3] > d[n - 2] && d[n - 2] > d[n - 1] } else { d.windows(2).all(|w| w[1] < w[0]) };
    tail && d[n - 1] <= tol_rel * d[0]
}

/// Solves the backward characteristic problem with data θ on the future null
/// boundary of the cylinder by slowing the propagation speed down.
pub fn solve_hoermander(
    g: &ModelMetric,
    cone: &NullSurface,
    theta: &CharacteristicData,
    sched: &LambdaSchedule,
    cfg: &EvolutionConfig,
    tol: &Tolerances,
) -> Result<HoermanderRun> {
    if g.kind != MetricKind::EinsteinCylinder || cone.kind != NullKind::ScriPlus || theta.surface != *cone {
        return Err(Error::Config("slowdown solver runs on the cylinder with data on scri+".into()));
    }
    for &l in sched.values() {
        let gl = slow_metric(g, l)?;
        if causal_type(&gl, cone.locus(PI / 2.0), cone.tangent(PI / 2.0))? != CausalType::Spacelike {
            return Err(Error::Domain(format!("cone is not spacelike for λ = {l}")));
        }
    }
    let grid = theta.grid.clone();
    let cubic = match cfg.nonlinearity {
        Nonlinearity::CubicDefocusing => true,
        Nonlinearity::Linear => false,
        Nonlinearity::Potential => return Err(Error::Config("slowdown solver supports the linear and cubic equations".into())),
    };
    let per_lambda = sched
        .values()
        .par_iter()
        .map(|&l| evolve_on_slowed(l, theta, &grid, cfg.cfl, cubic).map(|r| r.sigma0))
        .collect::<Result<Vec<_>>>()?;
    let energies = per_lambda
        .iter()
        .map(|d| cylinder_slice_energy(d, cubic))
        .collect::<Result<Vec<_>>>()?;
    let differences = per_lambda
        .windows(2)
        .map(|w| cylinder_slice_energy(&w[1].sub(&w[0])?, false))
        .collect::<Result<Vec<_>>>()?;
    let n = per_lambda.len();
    let extrapolated = per_lambda[n - 1].scaled(2.0).sub(&per_lambda[n - 2])?;
    let theta_norm = cone_h1_norm(theta)?;
    let trace = forward_trace(g, &per_lambda[n - 1], cone, theta, cfg)?;
    let diff = CharacteristicData {
        surface: cone.clone(),
        grid: grid.clone(),
        values: trace.values.iter().zip(&theta.values).map(|(a, b)| a - b).collect(),
    };
    let trace_check = cone_h1_norm(&diff)?;
    let converged = differences_converged(&differences, tol.tol_rel);
    Ok(HoermanderRun {
        schedule: sched.clone(),
        per_lambda,
        energies,
        differences,
        extrapolated,
        trace_check,
        theta_norm,
        converged,
        tol_rel: tol.tol_rel,
    })
}

/// Future null trace of the unslowed solution through a T = 0 slice.
pub(crate) fn forward_trace(
    g: &ModelMetric,
    d: &CauchyData,
    cone: &NullSurface,
    theta: &CharacteristicData,
    cfg: &EvolutionConfig,
) -> Result<CharacteristicData> {
    let mut fwd = cfg.clone();
    fwd.t_end = PI;
    fwd.direction = crate::evolution::Direction::Forward;
    let start = CauchyData {
        position: ScalarFieldGrid { stamp: 0.0, ..d.position.clone() },
        velocity: ScalarFieldGrid { stamp: 0.0, ..d.velocity.clone() },
    };
    let hist = evolve(g, &start, &fwd)?;
    restrict_to_surface(&hist, cone, &theta.grid)
}
