//! Scalar curvature of the full 4-metric `block ⊕ areal·dω²` by finite-difference
//! Christoffel symbols, evaluated on the equator θ = π/2.

use super::{MetricKind, ModelMetric, Point};
use crate::error::{Error, Result};

type M4 = [[f64; 4]; 4];
type Gamma = [[[f64; 4]; 4]; 4];

/// Relative stencil width of the curvature pipeline.
pub const CURVATURE_STENCIL: f64 = 1e-4;

/// Scalar curvature at `x`: Richardson combination of the stencil widths
/// [`CURVATURE_STENCIL`] and twice that, which cancels the O(h²) term.
pub fn scalar_curvature(g: &ModelMetric, x: Point) -> Result<f64> {
    let fine = scalar_curvature_with_step(g, x, CURVATURE_STENCIL)?;
    let coarse = scalar_curvature_with_step(g, x, 2.0 * CURVATURE_STENCIL)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Scalar curvature with an explicit relative stencil width.
pub fn scalar_curvature_with_step(g: &ModelMetric, x: Point, rel_step: f64) -> Result<f64> {
    g.block(x)?;
    let h = [rel_step * x[0].abs().max(1.0), rel_step * x[1].abs().max(1.0)];
    let margin = 40.0 * h[1].max(h[0]);
    match g.kind {
        MetricKind::EinsteinCylinder => {
            if x[1].sin().abs() < margin {
                return Err(Error::Domain(format!("chi = {} too close to a pole", x[1])));
            }
        }
        MetricKind::Minkowski => {
            if x[1] < margin {
                return Err(Error::Domain(format!("r = {} too close to the axis", x[1])));
            }
        }
        MetricKind::SchwarzschildPhysical { m } => {
            if x[1] - 2.0 * m < margin {
                return Err(Error::Domain(format!("r = {} too close to r = 2m", x[1])));
            }
        }
        MetricKind::SchwarzschildRescaled { m } => {
            if m > 0.0 && 1.0 / (2.0 * m) - x[1] < margin {
                return Err(Error::Domain(format!("R = {} too close to r = 2m", x[1])));
            }
        }
    }
    let steps = [h[0], h[1], rel_step, rel_step];
    let y = [x[0], x[1], std::f64::consts::FRAC_PI_2, 0.0];
    let metric = |p: [f64; 4]| metric4(g, p);
    let ginv = invert4(&metric(y))?;
    let gamma0 = christoffel(&metric, y, &steps)?;
    // ∂_σ Γ^ρ_{μν}
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for s in 0..4 {
        let mut yp = y;
        let mut ym = y;
        yp[s] += steps[s];
        ym[s] -= steps[s];
        let gp = christoffel(&metric, yp, &steps)?;
        let gm = christoffel(&metric, ym, &steps)?;
        for r in 0..4 {
            for m in 0..4 {
                for n in 0..4 {
                    dgamma[s][r][m][n] = (gp[r][m][n] - gm[r][m][n]) / (2.0 * steps[s]);
                }
            }
        }
    }
    let mut scal = 0.0;
    for m in 0..4 {
        for n in 0..4 {
            if ginv[m][n] == 0.0 {
                continue;
            }
            let mut ric = 0.0;
            for r in 0..4 {
                ric += dgamma[r][r][m][n] - dgamma[n][r][m][r];
                for l in 0..4 {
                    ric += gamma0[r][r][l] * gamma0[l][m][n] - gamma0[r][n][l] * gamma0[l][m][r];
                }
            }
            scal += ginv[m][n] * ric;
        }
    }
    Ok(scal)
}

fn metric4(g: &ModelMetric, p: [f64; 4]) -> M4 {
    let b = g.block_unchecked([p[0], p[1]]);
    let a = g.areal_unchecked([p[0], p[1]]);
    let mut out = [[0.0; 4]; 4];
    out[0][0] = b[0][0];
    out[0][1] = b[0][1];
    out[1][0] = b[1][0];
    out[1][1] = b[1][1];
    out[2][2] = a;
    out[3][3] = a * p[2].sin().powi(2);
    out
}

fn christoffel(metric: &impl Fn([f64; 4]) -> M4, y: [f64; 4], steps: &[f64; 4]) -> Result<Gamma> {
    let g = metric(y);
    let ginv = invert4(&g)?;
    let mut dg = [[[0.0; 4]; 4]; 4];
    for s in 0..4 {
        let mut yp = y;
        let mut ym = y;
        yp[s] += steps[s];
        ym[s] -= steps[s];
        let gp = metric(yp);
        let gm = metric(ym);
        for a in 0..4 {
            for b in 0..4 {
                dg[s][a][b] = (gp[a][b] - gm[a][b]) / (2.0 * steps[s]);
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for r in 0..4 {
        for m in 0..4 {
            for n in 0..4 {
                let mut acc = 0.0;
                for l in 0..4 {
                    acc += ginv[r][l] * (dg[m][l][n] + dg[n][l][m] - dg[l][m][n]);
                }
                gamma[r][m][n] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

fn invert4(a: &M4) -> Result<M4> {
    let mut m = *a;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::Domain("degenerate metric".into()));
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = m[col][col];
        for k in 0..4 {
            m[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for k in 0..4 {
                        m[r][k] -= f * m[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        einstein_cylinder_metric, minkowski_metric, schwarzschild_rescaled_metric, slow_metric,
    };

    #[test]
    fn minkowski_is_flat() {
        let g = minkowski_metric();
        for x in [[0.0, 1.0], [2.0, 0.5], [-1.0, 7.0]] {
            let s = scalar_curvature(&g, x).unwrap(); assert!(s.abs() < 1e-7, "{s}");
        }
    }

    #[test]
    fn unit_cylinder_has_scal_six() {
        // -dT² + dΩ₃² : Ricci scalar of the unit 3-sphere is 3·2 = 6.
        let g = einstein_cylinder_metric();
        for x in [[0.0, 0.5], [1.2, 1.5], [-2.0, 2.8]] {
            let s = scalar_curvature(&g, x).unwrap(); assert!((s - 6.0).abs() < 1e-6, "{s}");
        }
        let slowed = slow_metric(&g, 0.6).unwrap();
        assert!((scalar_curvature(&slowed, [0.3, 1.0]).unwrap() - 6.0).abs() < 1e-6);
        assert!(scalar_curvature(&g, [0.0, 0.0]).is_err());
    }

    #[test]
    fn rescaled_schwarzschild_two_stencils() {
        let g = schwarzschild_rescaled_metric(1.0, -5.0).unwrap();
        let x = [-20.0, 0.05];
        let a = scalar_curvature(&g, x).unwrap();
        let b = scalar_curvature_with_step(&g, x, 1e-4).unwrap();
        assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        // Closed form 12 m R for -R²(1-2mR)du² + 2du dR + dω².
        assert!((a - 0.6).abs() < 1e-5, "{a}");
    }
}
