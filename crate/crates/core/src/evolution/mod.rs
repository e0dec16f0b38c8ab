//! Cauchy evolution of the reduced conformal cubic wave equation.
//!
//! On the Einstein cylinder the field is stored as ψ = φ·sinχ, which obeys
//! `∂_T²ψ = λ²(∂_χ²ψ - ψ³/sin²χ) - Vψ + S` with Dirichlet ends. The physical
//! Minkowski model stores ξ = r·φ̂ with `∂_t²ξ = ∂_r²ξ - ξ³/r²`; under the
//! compactification ξ and ψ coincide because Ω·r = sinχ.

mod slowed;
mod verify;

pub use slowed::{evolve_on_slowed, SlowedRun};
pub use verify::{
    conformal_identity_residual, evolve_difference, manufactured_residual, CylinderWindow,
    DifferenceRun, ManufacturedSource,
};

use crate::error::{Error, Result};
use crate::fields::{slice_norms, trapezoid, Boundary, CauchyData, Grid1D, LeafMeasure, ScalarFieldGrid};
use crate::geometry::{MetricKind, ModelMetric};
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Nonlinearity {
    CubicDefocusing,
    Linear,
    /// Linear equation with the multiplier field of [`EvolutionConfig::potential`].
    Potential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Forcing term of the reduced equation, `(stamp, node) ↦ value`.
pub type SourceFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;
/// Indicator of the region where the potential acts, `(stamp, coordinate) ↦ bool`.
pub type MaskFn = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct EvolutionConfig {
    /// Requested step; `None` uses `cfl·h/c`. The actual step divides the run evenly.
    pub dt: Option<f64>,
    /// Final stamp.
    pub t_end: f64,
    pub cfl: f64,
    pub nonlinearity: Nonlinearity,
    /// Per-step multiplier V of the reduced field (one vector per level).
    pub potential: Option<Arc<Vec<Vec<f64>>>>,
    pub mask: Option<MaskFn>,
    pub source: Option<SourceFn>,
    pub direction: Direction,
}

impl fmt::Debug for EvolutionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EvolutionConfig")
            .field("dt", &self.dt)
            .field("t_end", &self.t_end)
            .field("cfl", &self.cfl)
            .field("nonlinearity", &self.nonlinearity)
            .field("potential", &self.potential.as_ref().map(|p| p.len()))
            .field("mask", &self.mask.is_some())
            .field("source", &self.source.is_some())
            .field("direction", &self.direction)
            .finish()
    }
}

impl EvolutionConfig {
    pub fn new(t_end: f64, cfl: f64, nonlinearity: Nonlinearity) -> Self {
        let direction = if t_end >= 0.0 { Direction::Forward } else { Direction::Backward };
        Self { dt: None, t_end, cfl, nonlinearity, potential: None, mask: None, source: None, direction }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    /// Signed step and number of steps from `t0` to `t_end`.
    pub(crate) fn schedule(&self, t0: f64, h: f64, speed: f64) -> Result<(f64, usize)> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::Config(format!("cfl {} outside (0, 1)", self.cfl)));
        }
        let span = self.t_end - t0;
        let sign = match self.direction {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        };
        if span * sign < 0.0 {
            return Err(Error::Config(format!(
                "t_end {} lies against the {:?} direction from {t0}",
                self.t_end, self.direction
            )));
        }
        let limit = self.cfl * h / speed;
        let dt = match self.dt {
            Some(dt) if dt > limit * (1.0 + 1e-12) => {
                return Err(Error::Config(format!("dt = {dt} violates CFL bound {limit}")));
            }
            Some(dt) if dt > 0.0 => dt,
            Some(dt) => return Err(Error::Config(format!("non-positive dt {dt}"))),
            None => limit,
        };
        let steps = ((span.abs() / dt) - 1e-9).ceil().max(0.0) as usize;
        if steps == 0 {
            return Ok((sign * dt, 0));
        }
        Ok((span / steps as f64, steps))
    }
}

/// Energies of one frame (reduced form, without the 4π of the sphere).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub stamp: f64,
    /// ½∫(∂_tψ)² + ½∫(∂_xψ)² from the centred velocity.
    pub e_lin: f64,
    /// Discrete leapfrog energy including ¼∫ψ⁴/a²; exactly conserved in the linear case.
    pub e_full: f64,
    pub l2: f64,
    pub h1: f64,
    pub l4_4: f64,
    pub max_abs: f64,
}

/// Reduced 1+1 wave operator of a model metric (axis weights, speed, measure).
#[derive(Debug, Clone)]
pub struct ReducedModel {
    /// 1/a² per node, zero where the node is a Dirichlet end.
    inv_a2: Vec<f64>,
    speed2: f64,
    h: f64,
    measure: LeafMeasure,
}

impl ReducedModel {
    pub fn new(g: &ModelMetric, grid: &Grid1D) -> Result<Self> {
        if grid.boundary != [Boundary::DirichletZero; 2] {
            return Err(Error::Grid("reduced evolutions need Dirichlet ends".into()));
        }
        let nodes = grid.nodes();
        let inv_a2: Vec<f64> = match g.kind {
            MetricKind::EinsteinCylinder => {
                if grid.lo.abs() > 1e-12 || (grid.hi() - PI).abs() > 1e-9 {
                    return Err(Error::Grid("cylinder grid must span [0, π]".into()));
                }
                nodes.iter().map(|x| 1.0 / x.sin().powi(2)).collect()
            }
            MetricKind::Minkowski => {
                if grid.lo.abs() > 1e-12 {
                    return Err(Error::Grid("radial grid must start at r = 0".into()));
                }
                nodes.iter().map(|x| 1.0 / (x * x)).collect()
            }
            _ => {
                return Err(Error::Config(format!(
                    "Cauchy evolution is not available on chart {}",
                    g.chart.name
                )))
            }
        };
        let mut inv_a2 = inv_a2;
        inv_a2[0] = 0.0;
        let n = inv_a2.len();
        inv_a2[n - 1] = 0.0;
        let measure = match g.kind {
            MetricKind::EinsteinCylinder => LeafMeasure::CylinderRadial,
            _ => LeafMeasure::Weighted {
                volume: nodes.iter().map(|r| 4.0 * PI * r * r).collect(),
                inverse_metric: vec![1.0; n],
            },
        };
        Ok(Self { inv_a2, speed2: g.slowdown * g.slowdown, h: grid.h, measure })
    }

    pub(crate) fn speed(&self) -> f64 {
        self.speed2.sqrt()
    }
}

/// Right-hand side of the reduced equation for one level.
pub(crate) struct Rhs<'a> {
    pub model: &'a ReducedModel,
    pub cubic: bool,
    pub potential: Option<&'a [Vec<f64>]>,
    pub mask: Option<&'a MaskFn>,
    pub source: Option<&'a SourceFn>,
    pub nodes: &'a [f64],
}

impl Rhs<'_> {
    pub(crate) fn eval(&self, psi: &[f64], level: usize, t: f64, out: &mut [f64]) {
        let n = psi.len();
        let m = self.model;
        let h2 = m.h * m.h;
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for j in 1..n - 1 {
            let mut acc = (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / h2;
            if self.cubic {
                acc -= psi[j] * psi[j] * psi[j] * m.inv_a2[j];
            }
            acc *= m.speed2;
            if let Some(pot) = self.potential {
                let active = self.mask.map_or(true, |f| f(t, self.nodes[j]));
                if active {
                    acc -= pot[level.min(pot.len() - 1)][j] * psi[j];
                }
            }
            if let Some(src) = self.source {
                acc += src(t, j);
            }
            out[j] = acc;
        }
    }
}

/// Time-ordered frames of one evolution plus the leapfrog levels just outside
/// the stored range (used for exact continuation and reversal).
#[derive(Debug, Clone)]
pub struct SolutionHistory {
    pub frames: Vec<CauchyData>,
    pub metric: ModelMetric,
    pub config: EvolutionConfig,
    pub diagnostics: Vec<EnergyRecord>,
    /// Signed step between frames.
    pub dt: f64,
    pub(crate) after: Vec<f64>,
}

impl SolutionHistory {
    pub fn grid(&self) -> &Grid1D {
        self.frames[0].grid()
    }

    pub fn stamps(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.stamp()).collect()
    }

    pub fn first(&self) -> &CauchyData {
        &self.frames[0]
    }

    pub fn last(&self) -> &CauchyData {
        self.frames.last().expect("history has at least one frame")
    }

    /// Bilinear interpolation of the stored field at (stamp, coordinate).
    pub fn sample(&self, t: f64, x: f64) -> Result<f64> {
        let (k, a) = self.locate_stamp(t)?;
        let (j, b) = self
            .grid()
            .locate(x)
            .ok_or_else(|| Error::Coverage(format!("coordinate {x} outside the history grid")))?;
        let v = |kk: usize, jj: usize| self.frames[kk].position.values[jj];
        let k1 = (k + 1).min(self.frames.len() - 1);
        Ok((1.0 - a) * ((1.0 - b) * v(k, j) + b * v(k, j + 1)) + a * ((1.0 - b) * v(k1, j) + b * v(k1, j + 1)))
    }

    /// The field φ = ψ/a at (stamp, coordinate), with the derivative limit at the
    /// axis where a = sinχ or a = r vanishes.
    pub fn sample_field(&self, t: f64, x: f64) -> Result<f64> {
        let g = self.grid();
        let h = g.h;
        let a = |x: f64| match self.metric.kind {
            MetricKind::EinsteinCylinder => x.sin(),
            _ => x,
        };
        let near_lo = (x - g.lo).abs() < 1e-9 * h.max(1.0);
        let near_hi = (x - g.hi()).abs() < 1e-9 * h.max(1.0) && self.metric.kind == MetricKind::EinsteinCylinder;
        if near_lo || near_hi {
            let (x0, dir) = if near_lo { (g.lo, 1.0) } else { (g.hi(), -1.0) };
            let f1 = self.sample(t, x0 + dir * h)?;
            let f2 = self.sample(t, x0 + dir * 2.0 * h)?;
            let f0 = self.sample(t, x0)?;
            return Ok((-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h));
        }
        Ok(self.sample(t, x)? / a(x))
    }

    pub(crate) fn locate_stamp(&self, t: f64) -> Result<(usize, f64)> {
        let t0 = self.frames[0].stamp();
        let last = self.frames.len() - 1;
        if last == 0 {
            return if (t - t0).abs() < 1e-12 { Ok((0, 0.0)) } else { Err(self.coverage_err(t)) };
        }
        let pos = (t - t0) / self.dt;
        if pos < -1e-9 || pos > last as f64 + 1e-9 {
            return Err(self.coverage_err(t));
        }
        let pos = pos.clamp(0.0, last as f64);
        let k = (pos.floor() as usize).min(last - 1);
        Ok((k, pos - k as f64))
    }

    fn coverage_err(&self, t: f64) -> Error {
        Error::Coverage(format!(
            "stamp {t} outside history [{}, {}]",
            self.frames[0].stamp(),
            self.last().stamp()
        ))
    }

    /// Runs the leapfrog recursion backwards from the last two levels and returns
    /// the recovered levels in frame order (frame 0 first, last frame included).
    pub fn reversed_levels(&self, nonlinearity: Nonlinearity) -> Result<Vec<Vec<f64>>> {
        let steps = self.frames.len() - 1;
        let mut out = continue_levels(
            &self.metric,
            self.grid(),
            &self.after,
            &self.last().position.values,
            self.last().stamp(),
            -self.dt,
            steps,
            nonlinearity,
        )?;
        out.reverse();
        out.push(self.last().position.values.clone());
        Ok(out)
    }

    /// Continues the run past its first frame, against the original direction.
    pub fn extend_before(&self, steps: usize, nonlinearity: Nonlinearity) -> Result<Vec<Vec<f64>>> {
        let next = self.frames.get(1).map_or(&self.after, |f| &f.position.values);
        continue_levels(
            &self.metric,
            self.grid(),
            next,
            &self.first().position.values,
            self.first().stamp(),
            -self.dt,
            steps,
            nonlinearity,
        )
    }

    /// Frame index whose stamp is closest to `t`.
    pub fn nearest_frame(&self, t: f64) -> Result<usize> {
        let (k, a) = self.locate_stamp(t)?;
        Ok(if a > 0.5 { k + 1 } else { k })
    }

    /// Tabulates a closed-form reduced field `f(t, x)` on the history layout of
    /// a run from `t0` with signed step `dt` over `steps` steps.
    pub fn tabulate(
        metric: ModelMetric,
        grid: &Grid1D,
        t0: f64,
        dt: f64,
        steps: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let nodes = grid.nodes();
        let level = |k: isize| -> Vec<f64> {
            let t = t0 + dt * k as f64;
            let mut v: Vec<f64> = nodes.iter().map(|&x| f(t, x)).collect();
            let n = v.len();
            v[0] = 0.0;
            v[n - 1] = 0.0;
            v
        };
        let levels: Vec<Vec<f64>> = (-1..=steps as isize + 1).map(level).collect();
        let config = EvolutionConfig::new(t0 + dt * steps as f64, 0.5, Nonlinearity::CubicDefocusing)
            .with_direction(if dt >= 0.0 { Direction::Forward } else { Direction::Backward });
        let model = ReducedModel::new(&metric, grid)?;
        assemble_history(metric, config, grid, &model, t0, dt, levels, true)
    }
}

/// Second-order leapfrog evolution of the reduced equation on a model metric.
pub fn evolve(g: &ModelMetric, d0: &CauchyData, cfg: &EvolutionConfig) -> Result<SolutionHistory> {
    let grid = d0.grid().clone();
    let model = ReducedModel::new(g, &grid)?;
    let t0 = d0.stamp();
    let (dt, steps) = cfg.schedule(t0, grid.h, model.speed())?;
    let cubic = cfg.nonlinearity == Nonlinearity::CubicDefocusing;
    if cfg.nonlinearity == Nonlinearity::Potential && cfg.potential.is_none() {
        return Err(Error::Config("potential nonlinearity without a potential field".into()));
    }
    let nodes = grid.nodes();
    let potential = match cfg.nonlinearity {
        Nonlinearity::Potential => cfg.potential.as_deref().map(|v| v.as_slice()),
        _ => None,
    };
    let rhs = Rhs {
        model: &model,
        cubic,
        potential,
        mask: cfg.mask.as_ref(),
        source: cfg.source.as_ref(),
        nodes: &nodes,
    };
    let n = grid.n;
    let psi0 = d0.position.values.clone();
    let mut acc = vec![0.0; n];
    rhs.eval(&psi0, 0, t0, &mut acc);
    let psi1: Vec<f64> = (0..n)
        .map(|j| psi0[j] + dt * d0.velocity.values[j] + 0.5 * dt * dt * acc[j])
        .collect();
    // Level -1 from the same leapfrog relation run backwards.
    let before: Vec<f64> = (0..n).map(|j| 2.0 * psi0[j] - psi1[j] + dt * dt * acc[j]).collect();
    let mut levels = Vec::with_capacity(steps + 3);
    levels.push(before);
    levels.push(psi0);
    levels.push(psi1);
    for step in 1..=steps {
        let t = t0 + dt * step as f64;
        let (cur, prev) = (&levels[step + 1], &levels[step]);
        rhs.eval(cur, step, t, &mut acc);
        let next: Vec<f64> = (0..n).map(|j| 2.0 * cur[j] - prev[j] + dt * dt * acc[j]).collect();
        if let Some(j) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp { stamp: t + dt, detail: format!("non-finite value at node {j}") });
        }
        levels.push(next);
    }
    let mut hist = assemble_history(g.clone(), cfg.clone(), &grid, &model, t0, dt, levels, cubic)?;
    if steps > 0 {
        let last = hist.frames.len() - 1;
        hist.frames[last].position.stamp = cfg.t_end;
        hist.frames[last].velocity.stamp = cfg.t_end;
        hist.diagnostics[last].stamp = cfg.t_end;
    }
    Ok(hist)
}

/// Builds frames and diagnostics from leapfrog levels `-1 ..= steps+1`.
#[allow(clippy::too_many_arguments)]
pub fn assemble_history(
    metric: ModelMetric,
    config: EvolutionConfig,
    grid: &Grid1D,
    model: &ReducedModel,
    t0: f64,
    dt: f64,
    mut levels: Vec<Vec<f64>>,
    cubic: bool,
) -> Result<SolutionHistory> {
    let steps = levels.len() - 3;
    let stamp_of = |k: usize| t0 + dt * k as f64;
    let h = grid.h;
    let n = grid.n;
    // Half-step energies E^{k+1/2} between levels k and k+1 (k = -1 ..= steps).
    let half: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let kin: f64 = (0..n).map(|j| ((b[j] - a[j]) / dt).powi(2)).sum::<f64>() * h;
            let grad: f64 = (0..n - 1).map(|j| (a[j + 1] - a[j]) * (b[j + 1] - b[j])).sum::<f64>() / h;
            let quart = if cubic {
                (0..n)
                    .map(|j| 0.5 * (a[j].powi(4) + b[j].powi(4)) * model.inv_a2[j])
                    .sum::<f64>()
                    * h
            } else {
                0.0
            };
            0.5 * kin + model.speed2 * (0.5 * grad + 0.25 * quart)
        })
        .collect();
    let after = levels.pop().expect("post level");
    let mut frames = Vec::with_capacity(steps + 1);
    let mut diagnostics = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let stamp = stamp_of(k);
        let cur = &levels[k + 1];
        let prev = &levels[k];
        let next = if k == steps { &after } else { &levels[k + 2] };
        let vel: Vec<f64> = (0..n).map(|j| (next[j] - prev[j]) / (2.0 * dt)).collect();
        let data = CauchyData {
            position: ScalarFieldGrid { grid: grid.clone(), values: cur.clone(), stamp },
            velocity: ScalarFieldGrid { grid: grid.clone(), values: vel, stamp },
        };
        let norms = slice_norms(&data, &model.measure)?;
        let e_lin = 0.5 * trapezoid(data.velocity.values.iter().map(|v| v * v), h)
            + 0.5 * cur.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
        diagnostics.push(EnergyRecord {
            stamp,
            e_lin,
            e_full: 0.5 * (half[k] + half[k + 1]),
            l2: norms.l2,
            h1: norms.h1,
            l4_4: norms.l4_4,
            max_abs: data.position.max_abs(),
        });
        frames.push(data);
    }
    Ok(SolutionHistory { frames, metric, config, diagnostics, dt, after })
}

/// Continues a leapfrog run from two consecutive levels for `steps` steps of
/// signed size `dt`; returns the new levels (excluding the two inputs).
#[allow(clippy::too_many_arguments)]
pub fn continue_levels(
    g: &ModelMetric,
    grid: &Grid1D,
    prev: &[f64],
    cur: &[f64],
    t_cur: f64,
    dt: f64,
    steps: usize,
    nonlinearity: Nonlinearity,
) -> Result<Vec<Vec<f64>>> {
    let model = ReducedModel::new(g, grid)?;
    let nodes = grid.nodes();
    let rhs = Rhs {
        model: &model,
        cubic: nonlinearity == Nonlinearity::CubicDefocusing,
        potential: None,
        mask: None,
        source: None,
        nodes: &nodes,
    };
    let n = grid.n;
    let mut acc = vec![0.0; n];
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let (mut a, mut b) = (prev.to_vec(), cur.to_vec());
    for step in 0..steps {
        rhs.eval(&b, step, t_cur + dt * step as f64, &mut acc);
        let next: Vec<f64> = (0..n).map(|j| 2.0 * b[j] - a[j] + dt * dt * acc[j]).collect();
        out.push(next.clone());
        a = std::mem::replace(&mut b, next);
    }
    Ok(out)
}

/// Writes the per-frame diagnostics CSV.
pub fn diagnostics_csv(hist: &SolutionHistory) -> String {
    let mut s = String::from("stamp,E_lin,E_full,L2,H1,L4^4,max_abs\n");
    for d in &hist.diagnostics {
        s.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            d.stamp, d.e_lin, d.e_full, d.l2, d.h1, d.l4_4, d.max_abs
        ));
    }
    s
}

/// Maximum relative deviation of `E_full` from its first value.
pub fn energy_drift(hist: &SolutionHistory) -> f64 {
    let e0 = hist.diagnostics[0].e_full;
    if e0 == 0.0 {
        return hist.diagnostics.iter().fold(0.0, |a, d| a.max(d.e_full.abs()));
    }
    hist.diagnostics.iter().fold(0.0f64, |a, d| a.max((d.e_full - e0).abs() / e0.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{einstein_cylinder_metric, minkowski_metric};

    fn bump(c: f64, w: f64, amp: f64) -> impl Fn(f64) -> f64 {
        move |x: f64| {
            let z = (x - c) / w;
            if z.abs() < 1.0 {
                amp * (1.0 - z * z).powi(4)
            } else {
                0.0
            }
        }
    }

    fn cylinder_data(cells: usize, amp: f64) -> CauchyData {
        let grid = Grid1D::cylinder(cells).unwrap();
        let f = bump(PI / 2.0, 0.8, amp);
        let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| f(x) * x.sin()).unwrap();
        CauchyData::new(pos, ScalarFieldGrid::zeros(grid, 0.0)).unwrap()
    }

    #[test]
    fn linear_energy_is_conserved_to_rounding() {
        let d = cylinder_data(200, 1.0);
        let cfg = EvolutionConfig::new(PI, 0.25, Nonlinearity::Linear);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        assert!(energy_drift(&hist) < 1e-12, "{}", energy_drift(&hist));
    }

    #[test]
    fn cubic_energy_drift_is_small() {
        let d = cylinder_data(400, 1.0);
        let cfg = EvolutionConfig::new(PI, 0.25, Nonlinearity::CubicDefocusing);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        assert!(energy_drift(&hist) < 1e-4, "{}", energy_drift(&hist));
        assert_eq!(hist.last().stamp(), PI);
        assert_eq!(hist.frames.len(), 1601);
    }

    #[test]
    fn mode_is_reproduced_at_second_order() {
        let cells = 100;
        let grid = Grid1D::cylinder(cells).unwrap();
        let h = grid.h;
        let n = 3.0;
        let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| (n * x).sin()).unwrap();
        let d = CauchyData::new(pos, ScalarFieldGrid::zeros(grid.clone(), 0.0)).unwrap();
        let cfg = EvolutionConfig::new(PI, 0.25, Nonlinearity::Linear);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        let mut worst = 0.0f64;
        for f in &hist.frames {
            for (j, v) in f.position.values.iter().enumerate() {
                let x = grid.node(j);
                worst = worst.max((v - (n * x).sin() * (n * f.stamp()).cos()).abs());
            }
        }
        assert!(worst <= 5.0 * h * h, "{worst} vs {}", 5.0 * h * h);
    }

    #[test]
    fn reversal_recovers_initial_levels() {
        let d = cylinder_data(200, 2.0);
        let cfg = EvolutionConfig::new(2.0, 0.25, Nonlinearity::CubicDefocusing);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        let back = hist.reversed_levels(Nonlinearity::CubicDefocusing).unwrap();
        assert_eq!(back.len(), hist.frames.len());
        let gap = back[0]
            .iter()
            .zip(&hist.frames[0].position.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(gap < 1e-10, "{gap}");
    }

    #[test]
    fn backward_direction_runs_to_negative_stamps() {
        let d = cylinder_data(100, 1.0);
        let cfg = EvolutionConfig::new(-1.0, 0.25, Nonlinearity::CubicDefocusing);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        assert!(hist.dt < 0.0);
        assert!((hist.last().stamp() + 1.0).abs() < 1e-12);
        let bad = EvolutionConfig::new(-1.0, 0.25, Nonlinearity::Linear).with_direction(Direction::Forward);
        assert!(matches!(evolve(&einstein_cylinder_metric(), &d, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let d = cylinder_data(100, 1.0);
        let h = d.grid().h;
        let cfg = EvolutionConfig::new(1.0, 0.25, Nonlinearity::Linear).with_dt(0.5 * h);
        assert!(matches!(evolve(&einstein_cylinder_metric(), &d, &cfg), Err(Error::Config(_))));
        let cfg = EvolutionConfig::new(1.0, 1.5, Nonlinearity::Linear);
        assert!(evolve(&einstein_cylinder_metric(), &d, &cfg).is_err());
    }

    #[test]
    fn sample_is_bilinear_and_bounded() {
        let d = cylinder_data(100, 1.0);
        let cfg = EvolutionConfig::new(0.5, 0.25, Nonlinearity::Linear);
        let hist = evolve(&einstein_cylinder_metric(), &d, &cfg).unwrap();
        let g = hist.grid().clone();
        let t1 = hist.frames[3].stamp();
        assert_eq!(hist.sample(t1, g.node(7)).unwrap(), hist.frames[3].position.values[7]);
        let mid = hist.sample(t1, 0.5 * (g.node(7) + g.node(8))).unwrap();
        let v = &hist.frames[3].position.values;
        assert!((mid - 0.5 * (v[7] + v[8])).abs() < 1e-15);
        assert!(matches!(hist.sample(0.6, 1.0), Err(Error::Coverage(_))));
    }

    #[test]
    fn manufactured_solution_converges_at_second_order() {
        let g = einstein_cylinder_metric();
        let f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync> =
            Arc::new(|t: f64, x: f64| 0.5 * (1.0 + 0.3 * t).cos() * (2.0 * x).cos() + 0.2);
        let error = |cells: usize| -> f64 {
            let grid = Grid1D::cylinder(cells).unwrap();
            let src = ManufacturedSource::new(&g, f.clone(), &grid).unwrap();
            let ff = f.clone();
            let e = 1e-5;
            let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| ff(0.0, x) * x.sin()).unwrap();
            let vel = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| (ff(e, x) - ff(-e, x)) / (2.0 * e) * x.sin())
                .unwrap();
            let d = CauchyData::new(pos, vel).unwrap();
            let cfg = EvolutionConfig::new(1.0, 0.25, Nonlinearity::CubicDefocusing).with_source(src.into_source());
            let hist = evolve(&g, &d, &cfg).unwrap();
            let last = hist.last();
            (0..grid.n).fold(0.0f64, |m, j| {
                let x = grid.node(j);
                m.max((last.position.values[j] - ff(last.stamp(), x) * x.sin()).abs())
            })
        };
        let (e1, e2) = (error(40), error(80));
        let order = (e1 / e2).log2();
        assert!(order > 1.8 && order < 2.3, "order {order} ({e1}, {e2})");
    }

    #[test]
    fn difference_equation_matches_direct_difference() {
        let g = einstein_cylinder_metric();
        let cfg = EvolutionConfig::new(1.5, 0.25, Nonlinearity::CubicDefocusing);
        let u = evolve(&g, &cylinder_data(100, 1.5), &cfg).unwrap();
        let v = evolve(&g, &cylinder_data(100, 1.0), &cfg).unwrap();
        let run = evolve_difference(&u, &v, None).unwrap();
        assert!(run.max_gap < 1e-10, "{}", run.max_gap);
    }

    #[test]
    fn minkowski_radial_evolution_conserves_linear_energy() {
        let grid = Grid1D::spanning("r", 0.0, 6.0, 240, [Boundary::DirichletZero; 2]).unwrap();
        let f = bump(2.0, 1.0, 1.0);
        let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |r| r * f(r)).unwrap();
        let d = CauchyData::new(pos, ScalarFieldGrid::zeros(grid, 0.0)).unwrap();
        let cfg = EvolutionConfig::new(1.0, 0.25, Nonlinearity::Linear);
        let hist = evolve(&minkowski_metric(), &d, &cfg).unwrap();
        assert!(energy_drift(&hist) < 1e-12);
        assert!(diagnostics_csv(&hist).starts_with("stamp,E_lin,E_full,L2,H1,L4^4,max_abs\n"));
    }

    #[test]
    fn tabulated_history_matches_closed_form() {
        let grid = Grid1D::cylinder(50).unwrap();
        let hist = SolutionHistory::tabulate(einstein_cylinder_metric(), &grid, 0.0, 0.01, 10, |t, x| t * x.sin())
            .unwrap();
        assert_eq!(hist.frames.len(), 11);
        let v = hist.frames[10].velocity.values[25];
        assert!((v - grid.node(25).sin()).abs() < 1e-12);
    }
}
