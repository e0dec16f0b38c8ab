//! Standard data sets shared by the suites and the tests.

use super::oracles::Profile;
use crate::error::{Error, Result};
use crate::fields::{Boundary, CauchyData, CharacteristicData, Grid1D, ScalarFieldGrid};
use crate::geometry::{hs_radius, lemma_audit, schwarzschild_rescaled_pair, ConformalPair, NullSurface};
use std::f64::consts::PI;
use std::sync::Arc;

/// a·(1 - z²)⁴ with z = (x - c)/w inside |z| < 1, zero outside.
pub fn bump(x: f64, c: f64, w: f64) -> f64 {
    let z = (x - c) / w;
    if z.abs() < 1.0 {
        (1.0 - z * z).powi(4)
    } else {
        0.0
    }
}

fn bump_slope(x: f64, c: f64, w: f64) -> f64 {
    let z = (x - c) / w;
    if z.abs() < 1.0 {
        -8.0 * z * (1.0 - z * z).powi(3) / w
    } else {
        0.0
    }
}

pub fn bump_profile(amp: f64, c: f64, w: f64) -> Profile {
    Arc::new(move |x| amp * bump(x, c, w))
}

pub fn bump_derivative(amp: f64, c: f64, w: f64) -> Profile {
    Arc::new(move |x| amp * bump_slope(x, c, w))
}

/// Smooth data on scri+ of the cylinder: a bump in χ centred at π/2 of half
/// width 0.9, vanishing near the vertex.
pub fn scri_bump(grid: &Grid1D, amp: f64) -> Result<CharacteristicData> {
    let vals = grid.nodes().iter().map(|&x| amp * bump(x, PI / 2.0, 0.9).powf(1.5)).collect();
    CharacteristicData::new(NullSurface::cylinder_scri_plus(), grid.clone(), vals)
}

/// Smooth data on scri+ from a coefficient vector: Σ c_k sin(kπz) on the
/// window |χ - π/2| < 0.9 tapered by the bump.
pub fn scri_band(grid: &Grid1D, coeffs: &[f64]) -> Result<CharacteristicData> {
    let vals = grid
        .nodes()
        .iter()
        .map(|&x| {
            let z = (x - (PI / 2.0 - 0.9)) / 1.8;
            let s: f64 = coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * PI * z).sin()).sum();
            s * bump(x, PI / 2.0, 0.9)
        })
        .collect();
    CharacteristicData::new(NullSurface::cylinder_scri_plus(), grid.clone(), vals)
}

/// Reduced Cauchy data ψ = a·sinχ·b(χ), ∂_Tψ = 0 on the cylinder slice T = 0.
pub fn cylinder_bump(grid: &Grid1D, amp: f64) -> Result<CauchyData> {
    let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |x| amp * x.sin() * bump(x, PI / 2.0, 1.2))?;
    CauchyData::new(pos, ScalarFieldGrid::zeros(grid.clone(), 0.0))
}

/// Characteristic setting on the rescaled Schwarzschild patch.
#[derive(Debug, Clone)]
pub struct PatchSetup {
    pub m: f64,
    pub u0: f64,
    pub u_min: f64,
    pub r_top: f64,
    pub pair: ConformalPair,
    pub scri: CharacteristicData,
    pub outgoing: CharacteristicData,
}

/// Smallest u0 (rounded outward to an integer) for which the lemma audit
/// passes at ε = 0.1.
pub fn patch_u0(m: f64) -> Result<f64> {
    let rep = lemma_audit(m, -100.0, 0.1, 50)?;
    let u = rep.smallest_u0.ok_or_else(|| Error::Domain("no admissible u0 found".into()))?;
    Ok(-u.abs().ceil())
}

/// Bump data on scri (u ∈ [2u0, u0]) and on the outgoing surface
/// (R ∈ [0, R_eps(u0)]), vanishing at the corner.
pub fn patch_setup(m: f64, u0: f64, eps: f64, amp: f64, cells: usize) -> Result<PatchSetup> {
    let u_min = 2.0 * u0;
    let pair = schwarzschild_rescaled_pair(m, u0)?;
    let r_top = hs_radius(m, eps, u0)?;
    let ug = Grid1D::spanning("u", u_min, u0, cells, [Boundary::Open; 2])?;
    let rg = Grid1D::spanning("R", 0.0, r_top, (cells / 2).max(4), [Boundary::Open; 2])?;
    let ts = ug.nodes().iter().map(|&u| amp * bump(u, 1.5 * u0, 0.3 * u0.abs())).collect();
    let tr = rg.nodes().iter().map(|&r| amp * bump(r, 0.5 * r_top, 0.4 * r_top)).collect();
    Ok(PatchSetup {
        m,
        u0,
        u_min,
        r_top,
        pair,
        scri: CharacteristicData::new(NullSurface::patch_scri(m, u_min, u0)?, ug, ts)?,
        outgoing: CharacteristicData::new(NullSurface::patch_outgoing(m, u0, r_top)?, rg, tr)?,
    })
}
