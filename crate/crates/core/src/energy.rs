//! Energy functionals and the audits of the energy estimates.

use crate::error::{Error, Result};
use crate::fields::{trapezoid, CauchyData};
use std::f64::consts::PI;

/// Conformal energy of a cylinder slice storing ψ = φ·sinχ:
/// `4π ∫ ½(∂_Tψ)² + ½(∂_χψ)² + ¼ψ⁴/sin²χ dχ` (quartic term only if `cubic`).
pub fn cylinder_slice_energy(d: &CauchyData, cubic: bool) -> Result<f64> {
    let g = d.grid();
    if g.lo.abs() > 1e-12 || (g.hi() - PI).abs() > 1e-9 {
        return Err(Error::Grid("cylinder slice must span [0, π]".into()));
    }
    let h = g.h;
    let psi = &d.position.values;
    let kin = trapezoid(d.velocity.values.iter().map(|v| v * v), h);
    let grad = psi.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
    let quart = if cubic {
        let last = psi.len() - 1;
        trapezoid(
            psi.iter().enumerate().map(|(j, p)| {
                if j == 0 || j == last { 0.0 } else { p.powi(4) / g.node(j).sin().powi(2) }
            }),
            h,
        )
    } else {
        0.0
    };
    Ok(4.0 * PI * (0.5 * kin + 0.5 * grad + 0.25 * quart))
}

use crate::characteristic::PatchSolution;
use crate::evolution::SolutionHistory;
use crate::fields::{cone_h1_norm, cone_l4_4, restrict_to_surface, CharacteristicData, Grid1D, ScalarFieldGrid};
use crate::geometry::{inverse_block, quad, Block, Foliation, FoliationKind, MetricKind, ModelMetric, NullSurface, Point, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyForm {
    Linear,
    WithQuartic,
}

/// Stress-energy of the conformal field at one point:
/// `T_ab = ∂_aφ∂_bφ - g_ab(½∇φ·∇φ + ½φ² [+ ¼φ⁴])` on the reduced block.
#[derive(Debug, Clone, PartialEq)]
pub struct StressEnergyEval {
    pub metric: ModelMetric,
    pub form: EnergyForm,
}

impl StressEnergyEval {
    pub fn new(metric: ModelMetric, form: EnergyForm) -> Self {
        Self { metric, form }
    }

    pub fn tensor(&self, x: Point, grad: Vector, phi: f64) -> Result<Block> {
        let g = self.metric.block(x)?;
        let inv = inverse_block(&g);
        let norm = quad(&inv, grad, grad);
        let pot = 0.5 * phi * phi + if self.form == EnergyForm::WithQuartic { 0.25 * phi.powi(4) } else { 0.0 };
        let mut t = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                t[a][b] = grad[a] * grad[b] - g[a][b] * (0.5 * norm + pot);
            }
        }
        Ok(t)
    }

    /// `T_ab v^a w^b`.
    pub fn contract(&self, x: Point, grad: Vector, phi: f64, v: Vector, w: Vector) -> Result<f64> {
        Ok(quad(&self.tensor(x, grad, phi)?, v, w))
    }
}

/// Energies along a family of leaves with their components.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnergyCurve {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub kinetic: Vec<f64>,
    pub gradient: Vec<f64>,
    pub mass: Vec<f64>,
    pub quartic: Vec<f64>,
}

impl EnergyCurve {
    fn push(&mut self, p: f64, kinetic: f64, gradient: f64, mass: f64, quartic: f64) {
        self.params.push(p);
        self.kinetic.push(kinetic);
        self.gradient.push(gradient);
        self.mass.push(mass);
        self.quartic.push(quartic);
        self.values.push(kinetic + gradient + mass + quartic);
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Components of the conformal energy of a cylinder slice (kinetic, gradient,
/// mass, quartic), each including the 4π of the sphere. In the reduced
/// variable ψ = φ·sinχ the conformal mass term is part of ½∫ψ_χ², which is
/// reported as the gradient; the mass component is zero.
pub fn cylinder_components(d: &CauchyData, form: EnergyForm) -> Result<[f64; 4]> {
    let total_lin = cylinder_slice_energy(d, false)?;
    let h = d.grid().h;
    let kin = 4.0 * PI * 0.5 * trapezoid(d.velocity.values.iter().map(|v| v * v), h);
    let quartic = match form {
        EnergyForm::Linear => 0.0,
        EnergyForm::WithQuartic => cylinder_slice_energy(d, true)? - total_lin,
    };
    Ok([kin, total_lin - kin, 0.0, quartic.max(0.0)])
}

/// Half-step energy pieces between two leapfrog levels (kinetic, interleaved
/// gradient, quartic), without the 4π.
fn half_step(a: &[f64], b: &[f64], dt: f64, h: f64, inv_a2: &[f64]) -> [f64; 3] {
    let n = a.len();
    let kin = (0..n).map(|j| ((b[j] - a[j]) / dt).powi(2)).sum::<f64>() * h;
    let grad = (0..n - 1).map(|j| (a[j + 1] - a[j]) * (b[j + 1] - b[j])).sum::<f64>() / h;
    let quart = (0..n).map(|j| 0.5 * (a[j].powi(4) + b[j].powi(4)) * inv_a2[j]).sum::<f64>() * h;
    [0.5 * kin, 0.5 * grad, 0.25 * quart]
}

/// Per-leaf energies of a cylinder history over the slices of `fol` that the
/// history contains. Each value is the energy conserved by the leapfrog
/// scheme (average of the two adjacent half-step energies); the levels
/// outside the stored frames are recovered from the centred velocities.
pub fn slice_energy_curve(hist: &SolutionHistory, fol: &Foliation, form: EnergyForm) -> Result<EnergyCurve> {
    if fol.kind != FoliationKind::CylinderSlices || hist.metric.kind != MetricKind::EinsteinCylinder {
        return Err(Error::Config("slice energy curves are defined for cylinder histories".into()));
    }
    let (lo, hi) = (hist.first().stamp().min(hist.last().stamp()), hist.first().stamp().max(hist.last().stamp()));
    if fol.range.lo < lo - 1e-9 || fol.range.hi > hi + 1e-9 {
        return Err(Error::Coverage(format!(
            "history [{lo}, {hi}] does not cover foliation [{}, {}]",
            fol.range.lo, fol.range.hi
        )));
    }
    let frames = &hist.frames;
    let s = frames.len() - 1;
    let mut curve = EnergyCurve::default();
    if s == 0 {
        let [k, g, m, q] = cylinder_components(&frames[0], form)?;
        curve.push(frames[0].stamp(), k, g, m, q);
        return Ok(curve);
    }
    let grid = hist.grid();
    let (h, n, dt) = (grid.h, grid.n, hist.dt);
    let inv_a2: Vec<f64> = (0..n)
        .map(|j| if j == 0 || j == n - 1 { 0.0 } else { 1.0 / grid.node(j).sin().powi(2) })
        .collect();
    let level = |k: isize| -> Vec<f64> {
        if k < 0 {
            let (p, v) = (&frames[1].position.values, &frames[0].velocity.values);
            p.iter().zip(v).map(|(a, b)| a - 2.0 * dt * b).collect()
        } else if k as usize > s {
            let (p, v) = (&frames[s - 1].position.values, &frames[s].velocity.values);
            p.iter().zip(v).map(|(a, b)| a + 2.0 * dt * b).collect()
        } else {
            frames[k as usize].position.values.clone()
        }
    };
    let c = 4.0 * PI;
    for (k, f) in frames.iter().enumerate() {
        let t = f.stamp();
        if t < fol.range.lo - 1e-9 || t > fol.range.hi + 1e-9 {
            continue;
        }
        let ki = k as isize;
        let (prev, cur, next) = (level(ki - 1), level(ki), level(ki + 1));
        let lo = half_step(&prev, &cur, dt, h, &inv_a2);
        let up = half_step(&cur, &next, dt, h, &inv_a2);
        let kin = c * 0.5 * (lo[0] + up[0]);
        let grad = c * 0.5 * (lo[1] + up[1]);
        let quartic = match form {
            EnergyForm::Linear => 0.0,
            EnergyForm::WithQuartic => c * 0.5 * (lo[2] + up[2]),
        };
        curve.push(t, kin, grad, 0.0, quartic);
    }
    Ok(curve)
}

/// Breakdown of an H_s leaf energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafEnergy {
    pub total: f64,
    /// ∫ u²(∂_uφ)².
    pub transversal: f64,
    /// ∫ (R/|u|)(∂_Rφ)².
    pub radial: f64,
    pub mass: f64,
    pub quartic: f64,
}

/// Energy of the leaf H_s of a patch solution (4π du measure; the R/|u|
/// weight uses the floor |u| ≥ |u0|·1e-12).
pub fn hs_energy(sol: &PatchSolution, s: f64, u0: f64, form: EnergyForm) -> Result<LeafEnergy> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Parameter(format!("leaf parameter {s} outside [0, 1]")));
    }
    let floor = u0.abs() * 1e-12;
    let samples = sol.leaf(s)?;
    let h = sol.u.h;
    let c = 4.0 * PI;
    let tr = c * trapezoid(samples.iter().map(|p| p.u * p.u * p.phi_u * p.phi_u), h);
    let rad = c * trapezoid(samples.iter().map(|p| p.r / p.u.abs().max(floor) * p.phi_r * p.phi_r), h);
    let mass = c * trapezoid(samples.iter().map(|p| 0.5 * p.phi * p.phi), h);
    let quartic = match form {
        EnergyForm::Linear => 0.0,
        EnergyForm::WithQuartic => c * trapezoid(samples.iter().map(|p| 0.25 * p.phi.powi(4)), h),
    };
    Ok(LeafEnergy { total: tr + rad + mass + quartic, transversal: tr, radial: rad, mass, quartic })
}

/// Flux energy through the outgoing surface u = u0 of a patch solution:
/// `4π ∫ ½u0²(Fφ_R² + φ²) + 2|1 + u0R|φ_R² [+ ¼u0²φ⁴] dR` with F = R²(1-2mR).
pub fn outgoing_energy(sol: &PatchSolution, form: EnergyForm) -> Result<f64> {
    let i = sol.u.n - 1;
    let u0 = sol.u.node(i);
    let row = &sol.phi[i];
    let h = sol.r.h;
    let n = row.len();
    let vals = (0..n).map(|j| {
        let r = sol.r.node(j);
        let d = if j == 0 {
            (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h)
        } else if j == n - 1 {
            (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h)
        } else {
            (row[j + 1] - row[j - 1]) / (2.0 * h)
        };
        let f = r * r * (1.0 - 2.0 * sol.m * r);
        let q = if form == EnergyForm::WithQuartic { 0.25 * u0 * u0 * row[j].powi(4) } else { 0.0 };
        0.5 * u0 * u0 * (f * d * d + row[j] * row[j]) + 2.0 * (1.0 + u0 * r).abs() * d * d + q
    });
    Ok(4.0 * PI * trapezoid(vals, h))
}

/// Cone energy: squared cone H¹ norm plus ½∫φ⁴ on the cone.
pub fn cone_energy(d: &CharacteristicData, form: EnergyForm) -> Result<f64> {
    let h1 = cone_h1_norm(d)?;
    let q = if form == EnergyForm::WithQuartic { 0.5 * cone_l4_4(d) } else { 0.0 };
    Ok(h1 * h1 + q)
}

/// Ratios E(Σ_τ)/E(cone) over the slices of `fol`: (min, max); quartic terms
/// are included for cubic histories.
pub fn cone_vs_slice_equivalence(hist: &SolutionHistory, cone: &NullSurface, fol: &Foliation) -> Result<(f64, f64)> {
    let grid = Grid1D::cylinder(hist.grid().n - 1)?;
    let trace = restrict_to_surface(hist, cone, &grid)?;
    let form = match hist.config.nonlinearity {
        crate::evolution::Nonlinearity::CubicDefocusing => EnergyForm::WithQuartic,
        _ => EnergyForm::Linear,
    };
    let e_cone = cone_energy(&trace, form)?;
    if e_cone == 0.0 {
        return Err(Error::Domain("zero solution: the energy ratio is undefined".into()));
    }
    let curve = slice_energy_curve(hist, fol, form)?;
    Ok((curve.min() / e_cone, curve.max() / e_cone))
}

/// Pointwise u² + uv + v².
pub fn difference_envelope(u: &ScalarFieldGrid, v: &ScalarFieldGrid) -> Result<ScalarFieldGrid> {
    if !u.grid.same_as(&v.grid) {
        return Err(Error::Grid("frames on different grids".into()));
    }
    let values = u.values.iter().zip(&v.values).map(|(a, b)| a * a + a * b + b * b).collect();
    ScalarFieldGrid::new(u.grid.clone(), values, u.stamp)
}

/// Smallest C with |E(t) - E(s)| ≤ C ∫_s^t (E + source) over all parameter pairs.
pub fn groenwall_audit(curve: &EnergyCurve, source: &EnergyCurve) -> Result<f64> {
    let n = curve.values.len();
    if source.values.len() != n || source.params.iter().zip(&curve.params).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::Grid("curves on different parameter grids".into()));
    }
    let mut cum = vec![0.0; n];
    for k in 1..n {
        let w = (curve.params[k] - curve.params[k - 1]).abs();
        let f = |i: usize| curve.values[i] + source.values[i];
        cum[k] = cum[k - 1] + 0.5 * w * (f(k) + f(k - 1));
    }
    let mut c = 0.0f64;
    for s in 0..n {
        for t in s + 1..n {
            let num = (curve.values[t] - curve.values[s]).abs();
            let den = cum[t] - cum[s];
            if num > 0.0 {
                c = c.max(if den > 0.0 { num / den } else { f64::INFINITY });
            }
        }
    }
    Ok(c)
}

/// Constants of the two-sided Lipschitz estimate between two solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzAudit {
    /// ‖θ - ξ‖²_{H¹(cone)}.
    pub cone_distance: f64,
    /// max over slices of ‖u - v‖²_{H¹} + ‖T(u - v)‖²_{L²}.
    pub slice_max: f64,
    pub slice_min: f64,
    /// slice_max / cone_distance.
    pub forward_constant: f64,
    /// cone_distance / slice_min.
    pub inverse_constant: f64,
}

/// Compares slice and cone distances of two cylinder solutions.
pub fn lipschitz_difference_audit(u: &SolutionHistory, v: &SolutionHistory, cone: &NullSurface) -> Result<LipschitzAudit> {
    if u.frames.len() != v.frames.len() || !u.grid().same_as(v.grid()) {
        return Err(Error::Grid("histories do not share a layout".into()));
    }
    let grid = Grid1D::cylinder(u.grid().n - 1)?;
    let tu = restrict_to_surface(u, cone, &grid)?;
    let tv = restrict_to_surface(v, cone, &grid)?;
    let diff = CharacteristicData {
        surface: cone.clone(),
        grid,
        values: tu.values.iter().zip(&tv.values).map(|(a, b)| a - b).collect(),
    };
    let cone_distance = cone_h1_norm(&diff)?.powi(2);
    let mut slice_max = 0.0f64;
    let mut slice_min = f64::INFINITY;
    for (a, b) in u.frames.iter().zip(&v.frames) {
        let e = 2.0 * cylinder_slice_energy(&a.sub(b)?, false)?;
        slice_max = slice_max.max(e);
        slice_min = slice_min.min(e);
    }
    let ratio = |a: f64, b: f64| if a == 0.0 && b == 0.0 { 0.0 } else { a / b };
    Ok(LipschitzAudit {
        cone_distance,
        slice_max,
        slice_min,
        forward_constant: ratio(slice_max, cone_distance),
        inverse_constant: ratio(cone_distance, slice_min),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityReport {
    /// max |E(t) - E(s)| / |t - s| over frame pairs.
    pub modulus: f64,
    pub sup_energy: f64,
    /// modulus / sup E.
    pub fitted_constant: f64,
}

/// Lipschitz modulus of the per-frame energy (consecutive pairs realise the
/// maximum over all pairs).
pub fn energy_continuity_probe(hist: &SolutionHistory) -> ContinuityReport {
    let d = &hist.diagnostics;
    let modulus = d
        .windows(2)
        .map(|w| (w[1].e_full - w[0].e_full).abs() / (w[1].stamp - w[0].stamp).abs())
        .fold(0.0f64, f64::max);
    let sup_energy = d.iter().map(|r| r.e_full).fold(0.0f64, f64::max);
    let fitted_constant = if sup_energy > 0.0 { modulus / sup_energy } else { 0.0 };
    ContinuityReport { modulus, sup_energy, fitted_constant }
}

/// Linear energy curve of δ = u - v on the frames of two cylinder histories,
/// and the source curve `4π ∫ H⁴δ² sin²χ dχ` with H² = u² + uv + v² in the
/// field φ = ψ/sinχ.
pub fn difference_energy_curves(u: &SolutionHistory, v: &SolutionHistory) -> Result<(EnergyCurve, EnergyCurve)> {
    if u.frames.len() != v.frames.len() || !u.grid().same_as(v.grid()) {
        return Err(Error::Grid("histories do not share a layout".into()));
    }
    let g = u.grid();
    let last = g.n - 1;
    let mut energy = EnergyCurve::default();
    let mut source = EnergyCurve::default();
    for (a, b) in u.frames.iter().zip(&v.frames) {
        let d = a.sub(b)?;
        let [k, gr, m, _] = cylinder_components(&d, EnergyForm::Linear)?;
        energy.push(a.stamp(), k, gr, m, 0.0);
        let env = difference_envelope(&a.position, &b.position)?;
        let vals = (0..g.n).map(|j| {
            if j == 0 || j == last {
                0.0
            } else {
                let s2 = g.node(j).sin().powi(2);
                env.values[j].powi(2) * d.position.values[j].powi(2) / (s2 * s2)
            }
        });
        source.push(a.stamp(), 0.0, 0.0, 0.0, 4.0 * PI * trapezoid(vals, g.h));
    }
    Ok((energy, source))
}
