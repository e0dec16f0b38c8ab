//! Consistency checks built on the evolution: manufactured forcing, the
//! conformal identity between physical and rescaled solutions, and the
//! linear equation satisfied by the difference of two solutions.

use super::{evolve, Direction, EvolutionConfig, MaskFn, Nonlinearity, SolutionHistory, SourceFn};
use crate::error::{Error, Result};
use crate::fields::{CauchyData, Grid1D, ScalarFieldGrid};
use crate::geometry::{inverse_block, det_block, ConformalPair, MetricKind, ModelMetric, Point};
use std::sync::Arc;

/// Relative finite-difference step for derivatives of closed forms.
const FD_STEP: f64 = 1e-4;

/// `□_g f` by nested central differences of the flux `A√|b| b^{ab} ∂_b f`.
fn box_operator(g: &ModelMetric, f: &dyn Fn(f64, f64) -> f64, x: Point) -> Result<f64> {
    let e = FD_STEP * (1.0 + x[0].abs().max(x[1].abs()));
    let grad = |y: Point| -> [f64; 2] {
        [
            (f(y[0] + e, y[1]) - f(y[0] - e, y[1])) / (2.0 * e),
            (f(y[0], y[1] + e) - f(y[0], y[1] - e)) / (2.0 * e),
        ]
    };
    let flux = |y: Point| -> Result<[f64; 2]> {
        let b = g.block(y)?;
        let inv = inverse_block(&b);
        let w = g.areal(y)? * det_block(&b).abs().sqrt();
        let d = grad(y);
        Ok([
            w * (inv[0][0] * d[0] + inv[0][1] * d[1]),
            w * (inv[1][0] * d[0] + inv[1][1] * d[1]),
        ])
    };
    let div = (flux([x[0] + e, x[1]])?[0] - flux([x[0] - e, x[1]])?[0]) / (2.0 * e)
        + (flux([x[0], x[1] + e])?[1] - flux([x[0], x[1] - e])?[1]) / (2.0 * e);
    let b = g.block(x)?;
    Ok(div / (g.areal(x)? * det_block(&b).abs().sqrt()))
}

/// `-□_g f + (Scal/6) f + f³` for a closed-form field on a slice.
pub fn manufactured_residual(
    g: &ModelMetric,
    f: &dyn Fn(f64, f64) -> f64,
    grid: &Grid1D,
    stamp: f64,
) -> Result<ScalarFieldGrid> {
    let nodes = grid.nodes();
    let at = |x: f64| -> Result<f64> {
        let p = [stamp, x];
        let v = f(stamp, x);
        Ok(-box_operator(g, f, p)? + g.scalar_curvature(p)? / 6.0 * v + v * v * v)
    };
    let mut values: Vec<Option<f64>> = nodes
        .iter()
        .map(|&x| match at(x) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    // Nodes on the axis of symmetry: quadratic extrapolation from the interior.
    let n = values.len();
    let first = values.iter().position(|v| v.is_some());
    let last = values.iter().rposition(|v| v.is_some());
    let (Some(first), Some(last)) = (first, last) else {
        return Err(Error::Domain("no grid node lies inside the chart".into()));
    };
    if last < first + 2 || values[first..=last].iter().any(|v| v.is_none()) {
        return Err(Error::Domain("chart does not cover the grid interior".into()));
    }
    for j in 0..first {
        let k = (first - j) as f64;
        let (a, b, c) = (values[first].unwrap(), values[first + 1].unwrap(), values[first + 2].unwrap());
        values[j] = Some(a + k * (a - b) + 0.5 * k * (k + 1.0) * (a - 2.0 * b + c));
    }
    for j in last + 1..n {
        let k = (j - last) as f64;
        let (a, b, c) = (values[last].unwrap(), values[last - 1].unwrap(), values[last - 2].unwrap());
        values[j] = Some(a + k * (a - b) + 0.5 * k * (k + 1.0) * (a - 2.0 * b + c));
    }
    let values = values.into_iter().map(|v| v.unwrap_or(0.0)).collect();
    ScalarFieldGrid::new(grid.clone(), values, stamp)
}

/// Forcing that makes a closed-form φ an exact solution, in reduced form
/// (multiplied by sinχ on the cylinder, by r on Minkowski). The curvature of
/// the static model metrics is tabulated once per node.
#[derive(Clone)]
pub struct ManufacturedSource {
    metric: ModelMetric,
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    nodes: Vec<f64>,
    scal: Vec<f64>,
}

impl ManufacturedSource {
    pub fn new(g: &ModelMetric, f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>, grid: &Grid1D) -> Result<Self> {
        if !matches!(g.kind, MetricKind::EinsteinCylinder | MetricKind::Minkowski) {
            return Err(Error::Config("manufactured forcing needs a reduced Cauchy model".into()));
        }
        let nodes = grid.nodes();
        let last = nodes.len() - 1;
        let scal = nodes
            .iter()
            .enumerate()
            .map(|(j, &x)| if j == 0 || j == last { Ok(0.0) } else { g.scalar_curvature([0.0, x]) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { metric: g.clone(), f, nodes, scal })
    }

    /// Reduced forcing at (stamp, node index); zero on the Dirichlet ends.
    pub fn value(&self, t: f64, j: usize) -> f64 {
        if j == 0 || j + 1 == self.nodes.len() {
            return 0.0;
        }
        let x = self.nodes[j];
        let f = &*self.f;
        let v = f(t, x);
        let bx = box_operator(&self.metric, f, [t, x]).unwrap_or(f64::NAN);
        let a = match self.metric.kind {
            MetricKind::EinsteinCylinder => x.sin(),
            _ => x,
        };
        a * (-bx + self.scal[j] / 6.0 * v + v * v * v)
    }

    pub fn into_source(self) -> SourceFn {
        Arc::new(move |t, j| self.value(t, j))
    }
}

/// Rectangle of cylinder points with uniform spacing on which the conformal
/// identity is checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderWindow {
    pub t: [f64; 2],
    pub chi: [f64; 2],
    pub spacing: f64,
}

/// Four-point Lagrange weights for the fractional offset `a` from node 1 of
/// nodes {0, 1, 2, 3}.
fn lagrange4(a: f64) -> [f64; 4] {
    let x = a + 1.0;
    [
        -(x - 1.0) * (x - 2.0) * (x - 3.0) / 6.0,
        x * (x - 2.0) * (x - 3.0) / 2.0,
        -x * (x - 1.0) * (x - 3.0) / 2.0,
        x * (x - 1.0) * (x - 2.0) / 6.0,
    ]
}

/// Bicubic interpolation of a radial Minkowski history, odd across r = 0.
fn bicubic(hist: &SolutionHistory, t: f64, r: f64) -> Result<f64> {
    let (k, a) = hist.locate_stamp(t)?;
    let last = hist.frames.len() - 1;
    if last < 3 {
        return Err(Error::Coverage("history too short for cubic interpolation".into()));
    }
    let k0 = (k as isize - 1).clamp(0, last as isize - 3) as usize;
    let a = a + (k as f64 - k0 as f64) - 1.0;
    let g = hist.grid();
    if r > g.hi() || r < g.lo {
        return Err(Error::Coverage(format!("radius {r} outside the history grid")));
    }
    let pos = (r - g.lo) / g.h;
    let j = (pos.floor() as isize).min(g.n as isize - 3);
    let b = pos - j as f64;
    let wt = lagrange4(a);
    let wr = lagrange4(b);
    let val = |kk: usize, jj: isize| -> f64 {
        let vals = &hist.frames[kk].position.values;
        if jj < 0 {
            -vals[(-jj) as usize]
        } else {
            vals[(jj as usize).min(g.n - 1)]
        }
    };
    let mut acc = 0.0;
    for (di, wti) in wt.iter().enumerate() {
        for (dj, wrj) in wr.iter().enumerate() {
            acc += wti * wrj * val(k0 + di, j - 1 + dj as isize);
        }
    }
    Ok(acc)
}

/// Maximum over a cylinder window of the residual `□_g φ - φ - φ³` of the
/// transported physical solution, computed by finite differences with the
/// window spacing.
pub fn conformal_identity_residual(
    pair: &ConformalPair,
    physical: &SolutionHistory,
    window: &CylinderWindow,
) -> Result<f64> {
    if physical.metric.kind != MetricKind::Minkowski {
        return Err(Error::Config("conformal identity check needs a Minkowski history".into()));
    }
    let hh = window.spacing;
    let nt = ((window.t[1] - window.t[0]) / hh).round() as usize;
    let nc = ((window.chi[1] - window.chi[0]) / hh).round() as usize;
    if nt < 2 || nc < 2 {
        return Err(Error::Grid("window needs at least three nodes per direction".into()));
    }
    let mut psi = vec![vec![0.0; nc + 1]; nt + 1];
    for (a, row) in psi.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let y = [window.t[0] + a as f64 * hh, window.chi[0] + b as f64 * hh];
            let x = pair.pullback_point(y)?;
            if x[1] <= 0.0 {
                return Err(Error::Domain("window touches the axis".into()));
            }
            let phys = bicubic(physical, x[0], x[1])? / x[1];
            *cell = y[1].sin() * phys / pair.omega(x)?;
        }
    }
    let mut worst = 0.0f64;
    for a in 1..nt {
        for b in 1..nc {
            let chi = window.chi[0] + b as f64 * hh;
            let p = psi[a][b];
            let tt = (psi[a + 1][b] - 2.0 * p + psi[a - 1][b]) / (hh * hh);
            let cc = (psi[a][b + 1] - 2.0 * p + psi[a][b - 1]) / (hh * hh);
            let res = (-tt + cc - p * p * p / chi.sin().powi(2)) / chi.sin();
            worst = worst.max(res.abs());
        }
    }
    Ok(worst)
}

/// Difference of two solutions evolved through its own linear equation, next
/// to the pointwise difference of the two histories.
#[derive(Debug, Clone)]
pub struct DifferenceRun {
    pub solved: SolutionHistory,
    /// Largest |solved - (u - v)| over all frames and nodes.
    pub max_gap: f64,
}

/// Evolves δ = u - v under `∂²δ = ∂_x²δ - (u²+uv+v²)δ/a²`, optionally only
/// where `mask` holds.
pub fn evolve_difference(
    u: &SolutionHistory,
    v: &SolutionHistory,
    mask: Option<MaskFn>,
) -> Result<DifferenceRun> {
    if u.metric != v.metric || !u.grid().same_as(v.grid()) || u.frames.len() != v.frames.len() {
        return Err(Error::Grid("histories do not share a layout".into()));
    }
    if (u.dt - v.dt).abs() > 1e-14 * u.dt.abs() {
        return Err(Error::Grid("histories use different steps".into()));
    }
    let model = super::ReducedModel::new(&u.metric, u.grid())?;
    let potential: Vec<Vec<f64>> = u
        .frames
        .iter()
        .zip(&v.frames)
        .map(|(fu, fv)| {
            fu.position
                .values
                .iter()
                .zip(&fv.position.values)
                .zip(&model.inv_a2)
                .map(|((a, b), w)| model.speed2 * (a * a + a * b + b * b) * w)
                .collect()
        })
        .collect();
    let d0: CauchyData = u.first().sub(v.first())?;
    let direction = if u.dt >= 0.0 { Direction::Forward } else { Direction::Backward };
    let mut cfg = EvolutionConfig::new(u.last().stamp(), u.config.cfl, Nonlinearity::Potential)
        .with_dt(u.dt.abs())
        .with_direction(direction);
    cfg.potential = Some(Arc::new(potential));
    cfg.mask = mask;
    let solved = evolve(&u.metric, &d0, &cfg)?;
    let mut max_gap = 0.0f64;
    for ((s, a), b) in solved.frames.iter().zip(&u.frames).zip(&v.frames) {
        for ((x, y), z) in s.position.values.iter().zip(&a.position.values).zip(&b.position.values) {
            max_gap = max_gap.max((x - (y - z)).abs());
        }
    }
    Ok(DifferenceRun { solved, max_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::einstein_cylinder_metric;

    #[test]
    fn zero_field_has_zero_source() {
        let grid = Grid1D::cylinder(20).unwrap();
        let s = manufactured_residual(&einstein_cylinder_metric(), &|_, _| 0.0, &grid, 0.3).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn linear_mode_leaves_only_the_cubic_term() {
        let grid = Grid1D::spanning("chi", 0.3, 2.8, 25, [crate::fields::Boundary::Open; 2]).unwrap();
        let f = |t: f64, x: f64| 0.4 * (3.0 * t).cos() * (3.0 * x).sin() / x.sin();
        let s = manufactured_residual(&einstein_cylinder_metric(), &f, &grid, 0.7).unwrap();
        for (j, v) in s.values.iter().enumerate() {
            let p = f(0.7, grid.node(j));
            assert!((v - p * p * p).abs() < 1e-5, "{v} vs {}", p * p * p);
        }
    }
}
