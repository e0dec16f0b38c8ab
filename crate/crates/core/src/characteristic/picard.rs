use super::Tolerances;
use crate::error::{Error, Result};
use crate::evolution::EvolutionConfig;
use crate::fields::{trapezoid, CharacteristicData, Grid1D};
use crate::geometry::{hs_radius, ConformalPair, MetricKind, NullKind};
use std::f64::consts::PI;

/// Field on the patch rectangle u ∈ [u_min, u0], R ∈ [0, R_top], stored by
/// rows of constant u.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSolution {
    pub m: f64,
    pub u: Grid1D,
    pub r: Grid1D,
    /// `phi[i][j]` at (u_i, R_j).
    pub phi: Vec<Vec<f64>>,
}

/// One point of a leaf: coordinates, value and partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafSample {
    pub u: f64,
    pub r: f64,
    pub phi: f64,
    pub phi_u: f64,
    pub phi_r: f64,
}

impl PatchSolution {
    pub fn zeros(m: f64, u: Grid1D, r: Grid1D) -> Self {
        let phi = vec![vec![0.0; r.n]; u.n];
        Self { m, u, r, phi }
    }

    /// Linear interpolation in R along row `i`.
    fn row_value(&self, i: usize, rr: f64) -> Result<f64> {
        let (j, b) = self
            .r
            .locate(rr)
            .ok_or_else(|| Error::Coverage(format!("R = {rr} outside the patch")))?;
        let row = &self.phi[i];
        Ok((1.0 - b) * row[j] + b * row[(j + 1).min(self.r.n - 1)])
    }

    /// ∂_Rφ along row `i` at R, from the centred node derivatives.
    fn row_slope(&self, i: usize, rr: f64) -> Result<f64> {
        let (j, b) = self
            .r
            .locate(rr)
            .ok_or_else(|| Error::Coverage(format!("R = {rr} outside the patch")))?;
        let row = &self.phi[i];
        let h = self.r.h;
        let n = self.r.n;
        let d = |k: usize| -> f64 {
            if k == 0 {
                (-3.0 * row[0] + 4.0 * row[1] - row[2]) / (2.0 * h)
            } else if k == n - 1 {
                (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) / (2.0 * h)
            } else {
                (row[k + 1] - row[k - 1]) / (2.0 * h)
            }
        };
        Ok((1.0 - b) * d(j) + b * d((j + 1).min(n - 1)))
    }

    /// Samples of the leaf H_s at the u nodes of the patch.
    pub fn leaf(&self, s: f64) -> Result<Vec<LeafSample>> {
        let nu = self.u.n;
        let du = self.u.h;
        (0..nu)
            .map(|i| {
                let u = self.u.node(i);
                let rr = hs_radius(self.m, s, u)?;
                let phi = self.row_value(i, rr)?;
                let phi_r = self.row_slope(i, rr)?;
                let phi_u = if i == 0 {
                    (-3.0 * phi + 4.0 * self.row_value(1, rr)? - self.row_value(2, rr)?) / (2.0 * du)
                } else if i == nu - 1 {
                    (3.0 * phi - 4.0 * self.row_value(nu - 2, rr)? + self.row_value(nu - 3, rr)?) / (2.0 * du)
                } else {
                    (self.row_value(i + 1, rr)? - self.row_value(i - 1, rr)?) / (2.0 * du)
                };
                Ok(LeafSample { u, r: rr, phi, phi_u, phi_r })
            })
            .collect()
    }

    pub fn sub(&self, other: &PatchSolution) -> Result<PatchSolution> {
        if !self.u.same_as(&other.u) || !self.r.same_as(&other.r) {
            return Err(Error::Grid("patch solutions on different grids".into()));
        }
        let phi = self
            .phi
            .iter()
            .zip(&other.phi)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        Ok(PatchSolution { m: self.m, u: self.u.clone(), r: self.r.clone(), phi })
    }

    pub fn max_abs(&self) -> f64 {
        self.phi.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Energy of H_s from the leaf integrand
/// `u²(∂_uφ)² + (R/|u|)(∂_Rφ)² + φ²/2 (+ φ⁴/4)` with measure 4π du.
pub fn leaf_energy(sol: &PatchSolution, s: f64, quartic: bool, u0: f64) -> Result<f64> {
    let floor = u0.abs() * 1e-12;
    let samples = sol.leaf(s)?;
    let vals = samples.iter().map(|p| {
        let w = p.r / p.u.abs().max(floor);
        let q = if quartic { 0.25 * p.phi.powi(4) } else { 0.0 };
        p.u * p.u * p.phi_u * p.phi_u + w * p.phi_r * p.phi_r + 0.5 * p.phi * p.phi + q
    });
    Ok(4.0 * PI * trapezoid(vals, sol.u.h))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub eps: f64,
    pub n_max: usize,
    /// Number of leaves s ∈ [0, eps] used for the sup over s.
    pub leaves: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { eps: 0.2, n_max: 8, leaves: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct PicardRun {
    pub iterates: Vec<PatchSolution>,
    /// sup over s of the linear H_s energy of φ_n - φ_{n-1} (entry n-1 for n ≥ 1).
    pub diff_energies: Vec<f64>,
    pub converged: bool,
    /// First iterate whose difference energy grew, if any.
    pub diverged_at: Option<usize>,
    /// Fitted super-geometric envelope A·q^{3ⁿ} at each recorded difference.
    pub bound_curve: Vec<f64>,
    pub eps: f64,
    pub tol_abs: f64,
}

impl PicardRun {
    /// The divergence as an error, if the iteration diverged.
    pub fn check(&self) -> Result<()> {
        match self.diverged_at {
            Some(n) => Err(Error::Divergence {
                iterate: n,
                detail: format!("difference energy grew to {:e}", self.diff_energies[n - 1]),
            }),
            None => Ok(()),
        }
    }

    pub fn last(&self) -> &PatchSolution {
        self.iterates.last().expect("at least one iterate")
    }
}

/// Picard iteration for the characteristic problem on the rescaled
/// Schwarzschild patch with data θ on scri (u ∈ [u_min, u0]) and θ⁰ on the
/// outgoing null surface u = u0 (R ∈ [0, R_top]).
pub fn solve_picard(
    pair: &ConformalPair,
    theta_scri: &CharacteristicData,
    theta_s: &CharacteristicData,
    pc: &PicardConfig,
    cfg: &EvolutionConfig,
    tol: &Tolerances,
) -> Result<PicardRun> {
    let m = match pair.rescaled.kind {
        MetricKind::SchwarzschildRescaled { m } => m,
        _ => return Err(Error::Config("Picard iteration runs on the rescaled Schwarzschild patch".into())),
    };
    if theta_scri.surface.kind != NullKind::ScriPlus || theta_s.surface.kind != NullKind::TransverseNull {
        return Err(Error::Config("data must sit on scri and on the outgoing surface u = u0".into()));
    }
    if !(pc.eps > 0.0 && pc.eps <= 1.0) {
        return Err(Error::Parameter(format!("foliation depth {} outside (0, 1]", pc.eps)));
    }
    let ug = theta_scri.grid.clone();
    let rg = theta_s.grid.clone();
    let u0 = ug.hi();
    if (theta_s.surface.locus(0.0)[0] - u0).abs() > 1e-9 * u0.abs() {
        return Err(Error::Grid("outgoing surface does not meet scri at the end of the u grid".into()));
    }
    let r_eps = hs_radius(m, pc.eps, u0)?;
    if rg.lo != 0.0 || rg.hi() < r_eps * (1.0 - 1e-9) {
        return Err(Error::Coverage(format!("R grid [{}, {}] does not reach R_eps(u0) = {r_eps}", rg.lo, rg.hi())));
    }
    let corner = (theta_scri.values[ug.n - 1] - theta_s.values[0]).abs();
    if corner > 1e-12 {
        return Err(Error::Domain(format!("data disagree at the corner by {corner:e}")));
    }
    let leaves: Vec<f64> = (0..=pc.leaves).map(|l| pc.eps * l as f64 / pc.leaves as f64).collect();
    let march = Marcher::new(m, &ug, &rg, theta_scri, theta_s, cfg.cfl)?;

    let mut iterates = vec![march.solve(None)?];
    let mut diff_energies = Vec::new();
    let mut converged = false;
    let mut diverged_at = None;
    if iterates[0].max_abs() == 0.0 {
        converged = true;
    }
    let mut n = 1;
    while !converged && n <= pc.n_max {
        let next = march.solve(Some(&iterates[n - 1]))?;
        let diff = next.sub(&iterates[n - 1])?;
        let mut sup = 0.0f64;
        for &s in &leaves {
            sup = sup.max(leaf_energy(&diff, s, false, u0)?);
        }
        iterates.push(next);
        diff_energies.push(sup);
        if !sup.is_finite() || (diff_energies.len() >= 2 && sup > diff_energies[diff_energies.len() - 2]) {
            diverged_at = Some(n);
            break;
        }
        if sup < tol.tol_abs {
            converged = true;
        }
        n += 1;
    }
    let bound_curve = fit_envelope(&diff_energies);
    Ok(PicardRun { iterates, diff_energies, converged, diverged_at, bound_curve, eps: pc.eps, tol_abs: tol.tol_abs })
}

/// Envelope A·q^{3ⁿ} through the first two differences (n = 1, 2).
fn fit_envelope(d: &[f64]) -> Vec<f64> {
    if d.len() < 2 || d[0] <= 0.0 || d[1] <= 0.0 {
        return d.to_vec();
    }
    let (l1, l2) = (d[0].ln(), d[1].ln());
    let log_q = (l2 - l1) / 6.0;
    let log_a = l1 - 3.0 * log_q;
    (1..=d.len()).map(|n| (log_a + 3f64.powi(n as i32) * log_q).exp()).collect()
}

/// Marches ζ = ∂_Rφ downward in u for the linear problem with a cubic source.
struct Marcher<'a> {
    m: f64,
    ug: &'a Grid1D,
    rg: &'a Grid1D,
    theta: Vec<f64>,
    zeta0: Vec<f64>,
    substeps: usize,
    flux_coeff: Vec<f64>,
}

impl<'a> Marcher<'a> {
    fn new(
        m: f64,
        ug: &'a Grid1D,
        rg: &'a Grid1D,
        theta_scri: &CharacteristicData,
        theta_s: &CharacteristicData,
        cfl: f64,
    ) -> Result<Self> {
        let h = rg.h;
        let n = rg.n;
        let v = &theta_s.values;
        let zeta0: Vec<f64> = (0..n)
            .map(|j| {
                if j == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[j + 1] - v[j - 1]) / (2.0 * h)
                }
            })
            .collect();
        let flux_coeff: Vec<f64> = rg.nodes().iter().map(|r| r * r * (1.0 - 2.0 * m * r)).collect();
        let speed = flux_coeff.iter().fold(0.0f64, |a, f| a.max(f.abs())) * 0.5 + m * rg.hi() * rg.hi();
        let substeps = ((ug.h * speed / (cfl * h)).ceil() as usize).max(1);
        Ok(Self { m, ug, rg, theta: theta_scri.values.clone(), zeta0, substeps, flux_coeff })
    }

    /// φ from ζ: θ(u) plus the cumulative trapezoid in R.
    fn integrate(&self, theta: f64, zeta: &[f64], out: &mut [f64]) {
        let h = self.rg.h;
        out[0] = theta;
        for j in 1..zeta.len() {
            out[j] = out[j - 1] + 0.5 * h * (zeta[j] + zeta[j - 1]);
        }
    }

    /// ∂_uζ = -½∂_R(Fζ) + mRφ + ½S.
    fn rate(&self, theta: f64, zeta: &[f64], source: &[f64], phi: &mut [f64], out: &mut [f64]) {
        self.integrate(theta, zeta, phi);
        let n = zeta.len();
        let h = self.rg.h;
        let g = |j: usize| self.flux_coeff[j] * zeta[j];
        for j in 0..n {
            let d = if j == 0 {
                (-3.0 * g(0) + 4.0 * g(1) - g(2)) / (2.0 * h)
            } else if j == n - 1 {
                (3.0 * g(n - 1) - 4.0 * g(n - 2) + g(n - 3)) / (2.0 * h)
            } else {
                (g(j + 1) - g(j - 1)) / (2.0 * h)
            };
            out[j] = -0.5 * d + self.m * self.rg.node(j) * phi[j] + 0.5 * source[j];
        }
    }

    fn solve(&self, previous: Option<&PatchSolution>) -> Result<PatchSolution> {
        let nu = self.ug.n;
        let n = self.rg.n;
        let mut sol = PatchSolution::zeros(self.m, self.ug.clone(), self.rg.clone());
        let cube_row = |i: usize| -> Vec<f64> {
            previous.map_or(vec![0.0; n], |p| p.phi[i].iter().map(|v| v * v * v).collect())
        };
        let mut zeta = self.zeta0.clone();
        let mut phi = vec![0.0; n];
        self.integrate(self.theta[nu - 1], &zeta, &mut phi);
        sol.phi[nu - 1] = phi.clone();
        let k = self.substeps;
        let step = -self.ug.h / k as f64;
        let (mut k1, mut k2, mut tmp, mut src) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
        for i in (1..nu).rev() {
            let (s_hi, s_lo) = (cube_row(i), cube_row(i - 1));
            let (t_hi, t_lo) = (self.theta[i], self.theta[i - 1]);
            for sub in 0..k {
                let a0 = sub as f64 / k as f64;
                let a1 = (sub + 1) as f64 / k as f64;
                let lerp = |a: f64, x: f64, y: f64| (1.0 - a) * x + a * y;
                for j in 0..n {
                    src[j] = lerp(a0, s_hi[j], s_lo[j]);
                }
                self.rate(lerp(a0, t_hi, t_lo), &zeta, &src, &mut phi, &mut k1);
                for j in 0..n {
                    tmp[j] = zeta[j] + step * k1[j];
                    src[j] = lerp(a1, s_hi[j], s_lo[j]);
                }
                self.rate(lerp(a1, t_hi, t_lo), &tmp, &src, &mut phi, &mut k2);
                for j in 0..n {
                    zeta[j] += 0.5 * step * (k1[j] + k2[j]);
                }
            }
            self.integrate(t_lo, &zeta, &mut phi);
            if let Some(j) = phi.iter().position(|v| !v.is_finite()) {
                return Err(Error::BlowUp { stamp: self.ug.node(i - 1), detail: format!("non-finite value at R node {j}") });
            }
            sol.phi[i - 1] = phi.clone();
        }
        Ok(sol)
    }
}
