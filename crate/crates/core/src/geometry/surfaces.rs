//! Foliations by spacelike leaves and null surfaces (cones, scri portions).

use super::{
    det_block, einstein_cylinder_metric, inverse_tortoise, quad, schwarzschild_rescaled_metric,
    Interval, ModelMetric, Point, Vector,
};
use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalType {
    Timelike,
    Null,
    Spacelike,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FoliationKind {
    /// Leaves {T = t} of the Einstein cylinder, leaf coordinate χ ∈ [0, π].
    CylinderSlices,
    /// Leaves H_s = {u = -s r*} of the rescaled Schwarzschild patch, leaf coordinate u.
    Hs { m: f64, u0: f64, u_min: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Foliation {
    pub kind: FoliationKind,
    pub parameter: &'static str,
    pub range: Interval,
    pub leaf_coordinate: Interval,
    pub metric: ModelMetric,
}

impl Foliation {
    pub fn cylinder_slices(t_lo: f64, t_hi: f64) -> Result<Self> {
        Ok(Self {
            kind: FoliationKind::CylinderSlices,
            parameter: "T",
            range: Interval::new(t_lo, t_hi)?,
            leaf_coordinate: Interval { lo: 0.0, hi: PI },
            metric: einstein_cylinder_metric(),
        })
    }

    fn check(&self, p: f64) -> Result<()> {
        if !self.range.contains(p) {
            return Err(Error::Parameter(format!(
                "{} = {p} outside [{}, {}]",
                self.parameter, self.range.lo, self.range.hi
            )));
        }
        Ok(())
    }

    /// Point of the leaf `p` at leaf coordinate `q`.
    pub fn leaf_point(&self, p: f64, q: f64) -> Result<Point> {
        self.check(p)?;
        match self.kind {
            FoliationKind::CylinderSlices => Ok([p, q]),
            FoliationKind::Hs { m, .. } => Ok([q, hs_radius(m, p, q)?]),
        }
    }

    /// The leaf `p` sampled at `n` uniformly spaced leaf coordinates.
    pub fn leaf(&self, p: f64, n: usize) -> Result<Vec<Point>> {
        let iv = self.leaf_coordinate;
        (0..n)
            .map(|i| self.leaf_point(p, iv.lo + iv.width() * i as f64 / (n - 1).max(1) as f64))
            .collect()
    }

    /// Future unit normal at the leaf point with coordinate `q`.
    pub fn normal(&self, p: f64, q: f64) -> Result<Vector> {
        self.check(p)?;
        match self.kind {
            FoliationKind::CylinderSlices => Ok([1.0, 0.0]),
            FoliationKind::Hs { m, .. } => {
                if p == 0.0 {
                    return Err(Error::Domain("the s = 0 leaf is null (scri)".into()));
                }
                let r = hs_radius(m, p, q)?;
                let f = 1.0 - 2.0 * m * r;
                // Gradient of u + s r*(1/R), raised with g^{-1} = [[0,1],[1,F]].
                let phi_r = -p / (f * r * r);
                let n = [phi_r, 1.0 + r * r * f * phi_r];
                let norm2 = (p * p - 2.0 * p) / (f * r * r);
                let scale = 1.0 / (-norm2).sqrt();
                Ok([-n[0] * scale, -n[1] * scale])
            }
        }
    }

    /// Induced volume density of the leaf with respect to its coordinate,
    /// including the areal factor (the 4π of the sphere is not included).
    pub fn volume(&self, p: f64, q: f64) -> Result<f64> {
        self.check(p)?;
        match self.kind {
            FoliationKind::CylinderSlices => Ok(q.sin().powi(2)),
            FoliationKind::Hs { m, .. } => {
                let r = hs_radius(m, p, q)?;
                if p == 0.0 {
                    return Ok(0.0);
                }
                let f = 1.0 - 2.0 * m * r;
                Ok((f * r * r * (2.0 / p - 1.0)).sqrt())
            }
        }
    }

    /// Reparametrisation τ(s) = -2(√s - 1) of the H_s family.
    pub fn tau(&self, s: f64) -> Result<f64> {
        self.check(s)?;
        Ok(-2.0 * (s.sqrt() - 1.0))
    }
}

/// R on the leaf H_s at retarded time u; zero on scri (s = 0).
/// R coordinate of the leaf H_s at retarded time u (s = 0 is scri).
pub fn hs_radius(m: f64, s: f64, u: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    if !(u < 0.0) {
        return Err(Error::Domain(format!("H_s leaves need u < 0, got {u}")));
    }
    Ok(1.0 / inverse_tortoise(u.abs() / s, m)?)
}

/// The H_s foliation of the patch, s ∈ [0, 1], leaf coordinate u ∈ [u_min, u0].
pub fn hs_foliation(m: f64, u0: f64, u_min: f64) -> Result<Foliation> {
    if !(u_min < u0) || !(u0 < 0.0) {
        return Err(Error::Parameter(format!("need u_min < u0 < 0, got [{u_min}, {u0}]")));
    }
    Ok(Foliation {
        kind: FoliationKind::Hs { m, u0, u_min },
        parameter: "s",
        range: Interval { lo: 0.0, hi: 1.0 },
        leaf_coordinate: Interval::new(u_min, u0)?,
        metric: schwarzschild_rescaled_metric(m, 0.0)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullKind {
    Cone,
    ScriPlus,
    ScriMinus,
    TransverseNull,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SurfaceModel {
    /// χ ↦ (π - χ, χ).
    CylinderScriPlus,
    /// χ ↦ (χ - π, χ).
    CylinderScriMinus,
    /// u ↦ (u, 0).
    PatchScri,
    /// R ↦ (u0, R).
    PatchOutgoing { u0: f64 },
}

/// Null hypersurface of a reduced model with generator l and transversal n,
/// normalised so that T = ½(l + n) is a future unit timelike vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSurface {
    pub kind: NullKind,
    pub vertex: Option<Point>,
    pub parameter: &'static str,
    pub range: Interval,
    pub metric: ModelMetric,
    model: SurfaceModel,
}

impl NullSurface {
    /// Future null infinity of the cylinder, i.e. the past cone of i⁺ = (π, 0).
    pub fn cylinder_scri_plus() -> Self {
        Self {
            kind: NullKind::ScriPlus,
            vertex: Some([PI, 0.0]),
            parameter: "chi",
            range: Interval { lo: 0.0, hi: PI },
            metric: einstein_cylinder_metric(),
            model: SurfaceModel::CylinderScriPlus,
        }
    }

    /// Past null infinity of the cylinder, the future cone of i⁻ = (-π, 0).
    pub fn cylinder_scri_minus() -> Self {
        Self {
            kind: NullKind::ScriMinus,
            vertex: Some([-PI, 0.0]),
            parameter: "chi",
            range: Interval { lo: 0.0, hi: PI },
            metric: einstein_cylinder_metric(),
            model: SurfaceModel::CylinderScriMinus,
        }
    }

    /// Scri⁺ portion {R = 0, u_min ≤ u ≤ u0} of the patch.
    pub fn patch_scri(m: f64, u_min: f64, u0: f64) -> Result<Self> {
        Ok(Self {
            kind: NullKind::ScriPlus,
            vertex: None,
            parameter: "u",
            range: Interval::new(u_min, u0)?,
            metric: schwarzschild_rescaled_metric(m, 0.0)?,
            model: SurfaceModel::PatchScri,
        })
    }

    /// Transverse null surface S_{u0} = {u = u0, 0 ≤ R ≤ r_max}.
    pub fn patch_outgoing(m: f64, u0: f64, r_max: f64) -> Result<Self> {
        Ok(Self {
            kind: NullKind::TransverseNull,
            vertex: None,
            parameter: "R",
            range: Interval::new(0.0, r_max)?,
            metric: schwarzschild_rescaled_metric(m, 0.0)?,
            model: SurfaceModel::PatchOutgoing { u0 },
        })
    }

    pub fn locus(&self, p: f64) -> Point {
        match self.model {
            SurfaceModel::CylinderScriPlus => [PI - p, p],
            SurfaceModel::CylinderScriMinus => [p - PI, p],
            SurfaceModel::PatchScri => [p, 0.0],
            SurfaceModel::PatchOutgoing { u0 } => [u0, p],
        }
    }

    /// dx/dp along the surface.
    pub fn tangent(&self, _p: f64) -> Vector {
        match self.model {
            SurfaceModel::CylinderScriPlus => [-1.0, 1.0],
            SurfaceModel::CylinderScriMinus => [1.0, 1.0],
            SurfaceModel::PatchScri => [1.0, 0.0],
            SurfaceModel::PatchOutgoing { .. } => [0.0, 1.0],
        }
    }

    pub fn generator(&self, _p: f64) -> Vector {
        match self.model {
            SurfaceModel::CylinderScriPlus => [1.0, -1.0],
            SurfaceModel::CylinderScriMinus => [1.0, 1.0],
            SurfaceModel::PatchScri => [1.0, 0.0],
            SurfaceModel::PatchOutgoing { .. } => [0.0, -1.0],
        }
    }

    pub fn transversal(&self, p: f64) -> Vector {
        match self.model {
            SurfaceModel::CylinderScriPlus => [1.0, 1.0],
            SurfaceModel::CylinderScriMinus => [1.0, -1.0],
            SurfaceModel::PatchScri => [0.0, -2.0],
            SurfaceModel::PatchOutgoing { .. } => {
                let x = self.locus(p);
                let f = -self.metric.block_unchecked(x)[0][0];
                [2.0, f]
            }
        }
    }

    /// Ratio c with dx/dp = c·l, so ∇_l f = (df/dp)/c.
    pub fn param_per_generator(&self) -> f64 {
        let t = self.tangent(0.0);
        let l = self.generator(0.0);
        if l[0] != 0.0 { t[0] / l[0] } else { t[1] / l[1] }
    }

    /// Density of n⌟dμ pulled back to the surface parameter, times the 4π of the sphere.
    pub fn contracted_measure(&self, p: f64) -> f64 {
        let x = self.locus(p);
        let n = self.transversal(p);
        let t = self.tangent(p);
        let b = self.metric.block_unchecked(x);
        let sqrt_det = det_block(&b).abs().sqrt();
        (n[0] * t[1] - n[1] * t[0]).abs() * sqrt_det * self.metric.areal_unchecked(x) * 4.0 * PI
    }

    /// g(v, w) at the surface point p.
    pub fn inner(&self, p: f64, v: Vector, w: Vector) -> f64 {
        quad(&self.metric.block_unchecked(self.locus(p)), v, w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::causal_type;

    #[test]
    fn tau_values() {
        let f = hs_foliation(1.0, -60.0, -120.0).unwrap();
        assert_eq!(f.tau(1.0).unwrap(), 0.0);
        assert_eq!(f.tau(0.0).unwrap(), 2.0);
        assert_eq!(f.tau(0.25).unwrap(), 1.0);
        assert!(f.tau(1.5).is_err());
    }

    #[test]
    fn hs_leaves_are_nested_and_timelike_normals() {
        let f = hs_foliation(1.0, -60.0, -120.0).unwrap();
        let s_values = [0.0, 0.1, 0.3, 0.6, 1.0];
        for w in s_values.windows(2) {
            let a = f.leaf(w[0], 25).unwrap();
            let b = f.leaf(w[1], 25).unwrap();
            for (pa, pb) in a.iter().zip(&b) {
                assert!(pa[1] < pb[1], "leaf {} not closer to scri than {}", w[0], w[1]);
            }
        }
        for &s in &s_values[1..] {
            for p in f.leaf(s, 25).unwrap() {
                let n = f.normal(s, p[0]).unwrap();
                assert_eq!(causal_type(&f.metric, p, n).unwrap(), CausalType::Timelike);
                assert!((f.metric.norm2(p, n).unwrap() + 1.0).abs() < 1e-9);
            }
        }
        // s = 1 is the t = 0 slice: u + r* = 0.
        let p = f.leaf_point(1.0, -80.0).unwrap();
        let rstar = crate::geometry::tortoise(1.0 / p[1], 1.0).unwrap();
        assert!((p[0] + rstar).abs() < 1e-9);
    }

    #[test]
    fn null_surfaces_are_null_and_split_t() {
        let surfaces = [
            NullSurface::cylinder_scri_plus(),
            NullSurface::cylinder_scri_minus(),
            NullSurface::patch_scri(1.0, -100.0, -50.0).unwrap(),
            NullSurface::patch_outgoing(1.0, -50.0, 0.02).unwrap(),
        ];
        for s in &surfaces {
            for k in 1..10 {
                let p = s.range.lo + s.range.width() * k as f64 / 10.0;
                let l = s.generator(p);
                let n = s.transversal(p);
                assert!(s.inner(p, l, l).abs() < 1e-14);
                assert!(s.inner(p, n, n).abs() < 1e-14);
                let t = [0.5 * (l[0] + n[0]), 0.5 * (l[1] + n[1])];
                assert!((s.inner(p, t, t) + 1.0).abs() < 1e-12);
                assert!(s.contracted_measure(p) >= 0.0);
            }
        }
    }
}
