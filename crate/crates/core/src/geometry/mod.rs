//! Charts, model metrics and conformal pairs for the two model spacetimes:
//! the Einstein cylinder compactification of Minkowski space and the
//! conformally rescaled Schwarzschild patch near spacelike infinity.
//!
//! All metrics use the (-+++) signature. Every model is spherically
//! symmetric and reduced to a 1+1 chart; the suppressed angular part is
//! `areal(x) * dω²` on the unit round sphere.

mod curvature;
mod schwarzschild;
mod surfaces;

pub use curvature::scalar_curvature;
pub use schwarzschild::{
    inverse_tortoise, lemma_audit, morawetz_field, proof_multiplier_field, tortoise, LemmaReport,
    LEMMA_U_SPAN,
};
pub use surfaces::{hs_foliation, hs_radius, CausalType, Foliation, FoliationKind, NullKind, NullSurface};

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Point in a 1+1 chart.
pub type Point = [f64; 2];
/// Tangent vector in a 1+1 chart (angular components vanish).
pub type Vector = [f64; 2];
/// Symmetric 2×2 block of the metric on the active coordinates.
pub type Block = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Parameter(format!("degenerate interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Signature convention tag. Only one is used internally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    MostlyPlus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub name: &'static str,
    pub coords: [&'static str; 2],
    pub ranges: [Interval; 2],
    /// Angular directions are suppressed (spherical symmetry).
    pub spherical_reduction: bool,
}

impl Chart {
    fn check(&self, x: Point) -> Result<()> {
        for k in 0..2 {
            if !self.ranges[k].contains(x[k]) {
                return Err(Error::Domain(format!(
                    "{} = {} outside chart {} range [{}, {}]",
                    self.coords[k], x[k], self.name, self.ranges[k].lo, self.ranges[k].hi
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    /// `-dT² + dχ² + sin²χ dω²` on ℝ × S³.
    EinsteinCylinder,
    /// `-dt² + dr² + r² dω²`.
    Minkowski,
    /// Schwarzschild in outgoing coordinates (u, r): `-(1-2m/r)du² - 2du dr + r² dω²`.
    SchwarzschildPhysical { m: f64 },
    /// Rescaled Schwarzschild in (u, R = 1/r): `-R²(1-2mR)du² + 2du dR + dω²`.
    SchwarzschildRescaled { m: f64 },
}

/// Metric of a reduced model spacetime, optionally slowed down by a factor λ
/// acting on the time-time component of its lapse/shift split.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetric {
    pub kind: MetricKind,
    pub chart: Chart,
    pub slowdown: f64,
    pub signature: Signature,
}

impl ModelMetric {
    fn new(kind: MetricKind, chart: Chart) -> Self {
        Self { kind, chart, slowdown: 1.0, signature: Signature::MostlyPlus }
    }

    /// Whether the chart's first coordinate is a time function with the
    /// split `g = -N² dt² + h`.
    pub fn has_time_split(&self) -> bool {
        matches!(self.kind, MetricKind::EinsteinCylinder | MetricKind::Minkowski)
    }

    fn check_point(&self, x: Point) -> Result<()> {
        self.chart.check(x)?;
        match self.kind {
            MetricKind::SchwarzschildPhysical { m } if x[1] <= 2.0 * m => {
                Err(Error::Domain(format!("r = {} inside horizon r = 2m = {}", x[1], 2.0 * m)))
            }
            MetricKind::SchwarzschildRescaled { m } if m > 0.0 && x[1] >= 1.0 / (2.0 * m) => {
                Err(Error::Domain(format!("R = {} at or beyond 1/(2m)", x[1])))
            }
            _ => Ok(()),
        }
    }

    /// Active 2×2 block of the metric at `x`.
    pub fn block(&self, x: Point) -> Result<Block> {
        self.check_point(x)?;
        Ok(self.block_unchecked(x))
    }

    pub(crate) fn block_unchecked(&self, x: Point) -> Block {
        let lam2 = self.slowdown * self.slowdown;
        match self.kind {
            MetricKind::EinsteinCylinder | MetricKind::Minkowski => [[-lam2, 0.0], [0.0, 1.0]],
            MetricKind::SchwarzschildPhysical { m } => {
                [[-(1.0 - 2.0 * m / x[1]), -1.0], [-1.0, 0.0]]
            }
            MetricKind::SchwarzschildRescaled { m } => {
                let r = x[1];
                [[-r * r * (1.0 - 2.0 * m * r), 1.0], [1.0, 0.0]]
            }
        }
    }

    /// Factor multiplying the unit round-sphere metric.
    pub fn areal(&self, x: Point) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.areal_unchecked(x))
    }

    pub(crate) fn areal_unchecked(&self, x: Point) -> f64 {
        match self.kind {
            MetricKind::EinsteinCylinder => x[1].sin().powi(2),
            MetricKind::Minkowski | MetricKind::SchwarzschildPhysical { .. } => x[1] * x[1],
            MetricKind::SchwarzschildRescaled { .. } => 1.0,
        }
    }

    /// Lapse N of the unslowed split; `None` without a time function.
    pub fn lapse(&self, x: Point) -> Result<Option<f64>> {
        self.check_point(x)?;
        Ok(self.has_time_split().then_some(1.0))
    }

    /// Induced metric on time slices (the radial component; the angular part
    /// is `areal`). `None` without a time function.
    pub fn spatial(&self, x: Point) -> Result<Option<f64>> {
        self.check_point(x)?;
        Ok(self.has_time_split().then_some(1.0))
    }

    pub fn scalar_curvature(&self, x: Point) -> Result<f64> {
        scalar_curvature(self, x)
    }

    /// `g(v, v)` for a vector with vanishing angular components.
    pub fn norm2(&self, x: Point, v: Vector) -> Result<f64> {
        let b = self.block(x)?;
        Ok(quad(&b, v, v))
    }
}

pub fn quad(b: &Block, v: Vector, w: Vector) -> f64 {
    b[0][0] * v[0] * w[0] + b[0][1] * (v[0] * w[1] + v[1] * w[0]) + b[1][1] * v[1] * w[1]
}

pub(crate) fn inverse_block(b: &Block) -> Block {
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    [[b[1][1] / det, -b[0][1] / det], [-b[1][0] / det, b[0][0] / det]]
}

pub(crate) fn det_block(b: &Block) -> f64 {
    b[0][0] * b[1][1] - b[0][1] * b[1][0]
}

/// Reduced Einstein cylinder `-dT² + dχ² + sin²χ dω²`, T ∈ [-π, π], χ ∈ [0, π].
pub fn einstein_cylinder_metric() -> ModelMetric {
    ModelMetric::new(
        MetricKind::EinsteinCylinder,
        Chart {
            name: "einstein_cylinder",
            coords: ["T", "chi"],
            ranges: [Interval { lo: -PI, hi: PI }, Interval { lo: 0.0, hi: PI }],
            spherical_reduction: true,
        },
    )
}

/// Reduced Minkowski metric in (t, r).
pub fn minkowski_metric() -> ModelMetric {
    ModelMetric::new(
        MetricKind::Minkowski,
        Chart {
            name: "minkowski",
            coords: ["t", "r"],
            ranges: [
                Interval { lo: -f64::MAX, hi: f64::MAX },
                Interval { lo: 0.0, hi: f64::MAX },
            ],
            spherical_reduction: true,
        },
    )
}

/// Metric with the time-time component scaled by λ²; spatial part unchanged.
pub fn slow_metric(g: &ModelMetric, lambda: f64) -> Result<ModelMetric> {
    if !(0.5..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("slowdown factor {lambda} outside [1/2, 1]")));
    }
    if !g.has_time_split() {
        return Err(Error::Parameter(format!(
            "metric {} has no declared lapse/spatial split",
            g.chart.name
        )));
    }
    let mut slowed = g.clone();
    slowed.slowdown = g.slowdown * lambda;
    Ok(slowed)
}

/// Classification of `v` at `x` by the sign of `g(v, v)`.
pub fn causal_type(g: &ModelMetric, x: Point, v: Vector) -> Result<CausalType> {
    let scale = v[0] * v[0] + v[1] * v[1];
    if scale == 0.0 {
        return Err(Error::Argument("zero vector has no causal type".into()));
    }
    let q = g.norm2(x, v)?;
    let b = g.block_unchecked(x);
    let gscale = b.iter().flatten().fold(0.0f64, |a, c| a.max(c.abs())).max(1.0);
    let tol = NULL_TOLERANCE * scale * gscale;
    Ok(if q < -tol {
        CausalType::Timelike
    } else if q > tol {
        CausalType::Spacelike
    } else {
        CausalType::Null
    })
}

/// Relative band around zero classified as null.
pub const NULL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateMap {
    /// (t, r) ↦ (T, χ) with T = atan(t+r) + atan(t-r), χ = atan(t+r) - atan(t-r).
    Penrose,
    /// (u, r) ↦ (u, R = 1/r).
    InverseRadius,
}

/// Physical metric ĝ, rescaled metric g = Ω²ĝ and the coordinate map between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalPair {
    pub physical: ModelMetric,
    pub rescaled: ModelMetric,
    pub map: CoordinateMap,
}

impl ConformalPair {
    fn check_physical(&self, x: Point) -> Result<()> {
        if x[1] < 0.0 {
            return Err(Error::Domain(format!("negative radius r = {}", x[1])));
        }
        self.physical.check_point(x)
    }

    pub fn omega(&self, x: Point) -> Result<f64> {
        self.check_physical(x)?;
        Ok(match self.map {
            CoordinateMap::Penrose => 2.0 * (x[0] - x[1]).atan().cos() * (x[0] + x[1]).atan().cos(),
            CoordinateMap::InverseRadius => 1.0 / x[1],
        })
    }

    pub fn transport(&self, x: Point) -> Result<Point> {
        self.check_physical(x)?;
        Ok(match self.map {
            CoordinateMap::Penrose => {
                let p = (x[0] + x[1]).atan();
                let q = (x[0] - x[1]).atan();
                [p + q, p - q]
            }
            CoordinateMap::InverseRadius => [x[0], 1.0 / x[1]],
        })
    }

    /// Inverse of [`transport`](Self::transport).
    pub fn pullback_point(&self, y: Point) -> Result<Point> {
        let x = match self.map {
            CoordinateMap::Penrose => {
                let p = 0.5 * (y[0] + y[1]);
                let q = 0.5 * (y[0] - y[1]);
                if p.abs() >= PI / 2.0 || q.abs() >= PI / 2.0 {
                    return Err(Error::Domain(format!(
                        "cylinder point ({}, {}) is not in the image of Minkowski space",
                        y[0], y[1]
                    )));
                }
                let (a, b) = (p.tan(), q.tan());
                [0.5 * (a + b), 0.5 * (a - b)]
            }
            CoordinateMap::InverseRadius => {
                if y[1] <= 0.0 {
                    return Err(Error::Domain("R = 0 lies on scri".into()));
                }
                [y[0], 1.0 / y[1]]
            }
        };
        Ok(x)
    }

    /// Jacobian ∂(rescaled coords)/∂(physical coords) at a physical point.
    pub fn jacobian(&self, x: Point) -> Result<Block> {
        self.check_physical(x)?;
        Ok(match self.map {
            CoordinateMap::Penrose => {
                let a = 1.0 / (1.0 + (x[0] + x[1]).powi(2));
                let b = 1.0 / (1.0 + (x[0] - x[1]).powi(2));
                [[a + b, a - b], [a - b, a + b]]
            }
            CoordinateMap::InverseRadius => [[1.0, 0.0], [0.0, -1.0 / (x[1] * x[1])]],
        })
    }

    /// Max componentwise |J^T g J - Ω² ĝ| at a physical point, including the
    /// areal factor.
    pub fn conformal_defect(&self, x: Point) -> Result<f64> {
        let y = self.transport(x)?;
        let j = self.jacobian(x)?;
        let g = self.rescaled.block(y)?;
        let gh = self.physical.block(x)?;
        let om2 = self.omega(x)?.powi(2);
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                let mut pulled = 0.0;
                for c in 0..2 {
                    for d in 0..2 {
                        pulled += j[c][a] * g[c][d] * j[d][b];
                    }
                }
                worst = worst.max((pulled - om2 * gh[a][b]).abs());
            }
        }
        let areal = (self.rescaled.areal(y)? - om2 * self.physical.areal(x)?).abs();
        Ok(worst.max(areal))
    }
}

/// Minkowski space and its Einstein cylinder compactification.
pub fn minkowski_compactification() -> ConformalPair {
    ConformalPair {
        physical: minkowski_metric(),
        rescaled: einstein_cylinder_metric(),
        map: CoordinateMap::Penrose,
    }
}

/// Schwarzschild of mass `m` in (u, r) and its rescaling by Ω = 1/r in (u, R).
pub fn schwarzschild_rescaled_pair(m: f64, u0: f64) -> Result<ConformalPair> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::Parameter(format!("mass must be positive, got {m}")));
    }
    if !(u0 < 0.0) {
        return Err(Error::Parameter(format!("cutoff u0 must be negative, got {u0}")));
    }
    let u_range = Interval { lo: -f64::MAX, hi: u0 };
    let physical = ModelMetric::new(
        MetricKind::SchwarzschildPhysical { m },
        Chart {
            name: "schwarzschild_outgoing",
            coords: ["u", "r"],
            ranges: [u_range, Interval { lo: 2.0 * m, hi: f64::MAX }],
            spherical_reduction: true,
        },
    );
    let rescaled = schwarzschild_rescaled_metric(m, u0)?;
    Ok(ConformalPair { physical, rescaled, map: CoordinateMap::InverseRadius })
}

/// Rescaled Schwarzschild metric alone; `m = 0` gives the flat double-null limit.
pub fn schwarzschild_rescaled_metric(m: f64, u0: f64) -> Result<ModelMetric> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::Parameter(format!("mass must be non-negative, got {m}")));
    }
    let r_hi = if m > 0.0 { 1.0 / (2.0 * m) } else { f64::MAX };
    Ok(ModelMetric::new(
        MetricKind::SchwarzschildRescaled { m },
        Chart {
            name: "schwarzschild_rescaled",
            coords: ["u", "R"],
            ranges: [Interval { lo: -f64::MAX, hi: u0 }, Interval { lo: 0.0, hi: r_hi }],
            spherical_reduction: true,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_components() {
        let g = einstein_cylinder_metric();
        for &x in &[[0.0, 0.3], [1.0, 2.0], [-2.0, 1.5]] {
            assert_eq!(g.block(x).unwrap(), [[-1.0, 0.0], [0.0, 1.0]]);
            assert_eq!(g.lapse(x).unwrap(), Some(1.0));
        }
    }

    #[test]
    fn penrose_map_examples() {
        let p = minkowski_compactification();
        let y = p.transport([0.0, 0.0]).unwrap();
        assert_eq!(y, [0.0, 0.0]);
        assert!((p.omega([0.0, 0.0]).unwrap() - 2.0).abs() < 1e-15);
        let y = p.transport([0.0, 1.0]).unwrap();
        assert!(y[0].abs() < 1e-15 && (y[1] - PI / 2.0).abs() < 1e-15);
        assert!((p.omega([0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(p.conformal_defect([0.0, 1.0]).unwrap() < 1e-12);
        for t in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(p.transport([t, 0.0]).unwrap()[1], 0.0);
        }
        assert!(p.omega([0.0, -1.0]).is_err());
    }

    #[test]
    fn penrose_inverse_roundtrip() {
        let p = minkowski_compactification();
        let x = [0.4, 1.3];
        let back = p.pullback_point(p.transport(x).unwrap()).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-13 && (back[1] - x[1]).abs() < 1e-13);
    }

    #[test]
    fn schwarzschild_pair_examples() {
        let flat = schwarzschild_rescaled_metric(0.0, -1.0).unwrap();
        assert_eq!(flat.block([-5.0, 0.3]).unwrap(), [[-0.09, 1.0], [1.0, 0.0]]);
        let m0 = schwarzschild_rescaled_metric(0.0, -1.0).unwrap();
        // Paper's display is mostly-minus: R²(1-2mR)du² - 2du dR; here the sign is flipped.
        let b = m0.block([-3.0, 0.0]).unwrap();
        assert_eq!(b, [[0.0, 1.0], [1.0, 0.0]]);
        let pair = schwarzschild_rescaled_pair(1.0, -10.0).unwrap();
        let b = pair.rescaled.block([-20.0, 0.1]).unwrap();
        assert!((-b[0][0] - 0.008).abs() < 1e-15);
        assert!((pair.omega([-20.0, 4.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!(schwarzschild_rescaled_pair(0.0, -10.0).is_err());
        assert!(schwarzschild_rescaled_pair(-1.0, -10.0).is_err());
        assert!(pair.omega([-20.0, 1.5]).is_err());
    }

    #[test]
    fn slow_metric_rules() {
        let g = einstein_cylinder_metric();
        let s = slow_metric(&g, 0.5).unwrap();
        assert_eq!(s.block([0.0, 1.0]).unwrap()[0][0], -0.25);
        assert!(slow_metric(&g, 0.4).is_err());
        assert!(slow_metric(&g, 1.01).is_err());
        let l = [1.0, 1.0];
        let q = s.norm2([0.0, 1.0], l).unwrap();
        assert!((q - 0.75).abs() < 1e-15);
        let sch = schwarzschild_rescaled_metric(1.0, -10.0).unwrap();
        assert!(slow_metric(&sch, 0.7).is_err());
    }

    #[test]
    fn causal_types() {
        let g = einstein_cylinder_metric();
        let x = [0.0, 1.0];
        assert_eq!(causal_type(&g, x, [1.0, 0.0]).unwrap(), CausalType::Timelike);
        assert_eq!(causal_type(&g, x, [1.0, 1.0]).unwrap(), CausalType::Null);
        let s = slow_metric(&g, 0.9).unwrap();
        assert_eq!(causal_type(&s, x, [1.0, 1.0]).unwrap(), CausalType::Spacelike);
        assert!(causal_type(&g, x, [0.0, 0.0]).is_err());
    }
}
