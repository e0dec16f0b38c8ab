//! Backward solve from the future null boundary on a slowed cylinder.
//!
//! With σ = T - (π - χ) the slowed reduced equation reads
//! `(1-λ²)ψ_σσ - 2λ²ψ_σχ - λ²ψ_χχ = -λ²ψ³/sin²χ`, and the surface σ = 0 is
//! spacelike for λ < 1. Data `ψ = θ·sinχ`, `∂_σψ = 0` are marched down to the
//! slice T = 0, which sits at σ = χ - π.

use crate::error::{Error, Result};
use crate::fields::{CauchyData, CharacteristicData, Grid1D, ScalarFieldGrid};
use crate::geometry::{causal_type, einstein_cylinder_metric, slow_metric, CausalType};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct SlowedRun {
    pub lambda: f64,
    /// Field ψ and ∂_Tψ on the slice T = 0.
    pub sigma0: CauchyData,
    /// Number of σ-steps per grid cell.
    pub substeps: usize,
    pub max_abs: f64,
}

/// Linear interpolation of cone data onto an arbitrary parameter value.
pub(crate) fn cone_value(theta: &CharacteristicData, p: f64) -> f64 {
    let g = &theta.grid;
    match g.locate(p) {
        Some((j, b)) => (1.0 - b) * theta.values[j] + b * theta.values[(j + 1).min(g.n - 1)],
        None => 0.0,
    }
}

/// Solves the slowed problem with data θ on the future null boundary; the
/// cubic term is dropped when `cubic` is false.
pub fn evolve_on_slowed(lambda: f64, theta: &CharacteristicData, grid: &Grid1D, cfl: f64, cubic: bool) -> Result<SlowedRun> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::Parameter(format!("slowdown λ = {lambda} must lie in (0, 1)")));
    }
    if !(cfl > 0.0 && cfl < 1.0) {
        return Err(Error::Config(format!("cfl {cfl} outside (0, 1)")));
    }
    let g = slow_metric(&einstein_cylinder_metric(), lambda)?;
    if causal_type(&g, [PI / 2.0, PI / 2.0], [-1.0, 1.0])? != CausalType::Spacelike {
        return Err(Error::Domain(format!("data surface is not spacelike for λ = {lambda}")));
    }
    if (grid.lo).abs() > 1e-12 || (grid.hi() - PI).abs() > 1e-9 {
        return Err(Error::Grid("slowed solve needs a cylinder grid on [0, π]".into()));
    }
    let n = grid.n;
    let cells = n - 1;
    let h = grid.h;
    let (a, b, c) = (1.0 - lambda * lambda, lambda * lambda, lambda * lambda);
    let k = (lambda / (cfl * a.sqrt())).ceil().max(1.0) as usize;
    // Signed σ step: the march runs towards the past.
    let s = -h / k as f64;
    let nodes = grid.nodes();
    let inv_a2: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(j, x)| if !cubic || j == 0 || j == cells { 0.0 } else { 1.0 / x.sin().powi(2) })
        .collect();

    let spatial = |psi: &[f64], j: usize| -> f64 {
        c * ((psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (h * h) - psi[j].powi(3) * inv_a2[j])
    };

    // Constant tridiagonal (A/s²)I - (B/s)D0 on interior nodes, factorised once.
    let diag = a / (s * s);
    let up = -b / (2.0 * h * s);
    let lo = -up;
    let m = cells - 1;
    let mut piv = vec![0.0; m];
    piv[0] = diag;
    for i in 1..m {
        piv[i] = diag - lo * up / piv[i - 1];
    }
    let solve = |rhs: &mut [f64]| {
        for i in 1..m {
            rhs[i] -= lo / piv[i - 1] * rhs[i - 1];
        }
        rhs[m - 1] /= piv[m - 1];
        for i in (0..m - 1).rev() {
            rhs[i] = (rhs[i] - up * rhs[i + 1]) / piv[i];
        }
    };

    let mut prev: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(j, x)| if j == 0 || j == cells { 0.0 } else { cone_value(theta, *x) * x.sin() })
        .collect();
    let mut cur = prev.clone();
    for j in 1..cells {
        cur[j] = prev[j] + s * s / (2.0 * a) * spatial(&prev, j);
    }

    let mut pos = vec![0.0; n];
    let mut vel = vec![0.0; n];
    let mut max_abs = prev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let total = cells * k;
    let mut rhs = vec![0.0; m];
    // At the top of the loop `prev` is level l-1 and `cur` is level l.
    for l in 1..=total {
        for j in 1..cells {
            let d0 = (prev[j + 1] - prev[j - 1]) / (2.0 * h);
            rhs[j - 1] = a * (2.0 * cur[j] - prev[j]) / (s * s) - b / s * d0 + spatial(&cur, j);
        }
        solve(&mut rhs);
        let mut next = vec![0.0; n];
        next[1..cells].copy_from_slice(&rhs);
        if let Some(j) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp { stamp: (l + 1) as f64 * s, detail: format!("non-finite value at node {j}") });
        }
        max_abs = next.iter().fold(max_abs, |m, v| m.max(v.abs()));
        if l % k == 0 {
            let i = cells - l / k;
            pos[i] = cur[i];
            vel[i] = (next[i] - prev[i]) / (2.0 * s);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    pos[0] = 0.0;
    vel[0] = 0.0;
    let sigma0 = CauchyData::new(
        ScalarFieldGrid::new(grid.clone(), pos, 0.0)?,
        ScalarFieldGrid::new(grid.clone(), vel, 0.0)?,
    )?;
    Ok(SlowedRun { lambda, sigma0, substeps: k, max_abs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::NullSurface;

    fn profile(cells: usize, amp: f64) -> (Grid1D, CharacteristicData) {
        let grid = Grid1D::cylinder(cells).unwrap();
        let values = grid
            .nodes()
            .iter()
            .map(|x| {
                let z = (x - PI / 2.0) / 0.9;
                if z.abs() < 1.0 { amp * (1.0 - z * z).powi(6) } else { 0.0 }
            })
            .collect();
        let theta = CharacteristicData::new(NullSurface::cylinder_scri_plus(), grid.clone(), values).unwrap();
        (grid, theta)
    }

    #[test]
    fn rejects_unslowed_and_bad_parameters() {
        let (grid, theta) = profile(40, 0.1);
        assert!(matches!(evolve_on_slowed(1.0, &theta, &grid, 0.5, true), Err(Error::Parameter(_))));
        assert!(matches!(evolve_on_slowed(0.5, &theta, &grid, 1.5, true), Err(Error::Config(_))));
    }

    #[test]
    fn zero_data_gives_zero_slice() {
        let (grid, mut theta) = profile(40, 0.1);
        theta.values.iter_mut().for_each(|v| *v = 0.0);
        let run = evolve_on_slowed(0.75, &theta, &grid, 0.5, true).unwrap();
        assert_eq!(run.sigma0.position.max_abs(), 0.0);
        assert_eq!(run.sigma0.velocity.max_abs(), 0.0);
    }

    #[test]
    fn slice_converges_at_second_order() {
        let sample = |cells: usize| {
            let (grid, theta) = profile(cells, 0.5);
            let run = evolve_on_slowed(0.75, &theta, &grid, 0.5, true).unwrap();
            let stride = cells / 40;
            (0..=40).map(|i| run.sigma0.position.values[i * stride]).collect::<Vec<_>>()
        };
        let (a, b, c) = (sample(80), sample(160), sample(320));
        let gap = |x: &[f64], y: &[f64]| x.iter().zip(y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        let ratio = gap(&a, &b) / gap(&b, &c);
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
    }

    #[test]
    fn substeps_grow_as_lambda_approaches_one() {
        let (grid, theta) = profile(40, 0.1);
        let lo = evolve_on_slowed(0.5, &theta, &grid, 0.5, true).unwrap().substeps;
        let hi = evolve_on_slowed(0.99, &theta, &grid, 0.5, true).unwrap().substeps;
        assert!(hi > lo);
    }
}
