//! Closed-form reference solutions.

use crate::error::{Error, Result};
use crate::fields::{CauchyData, Grid1D, ScalarFieldGrid};
use std::f64::consts::PI;
use std::sync::Arc;

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Evaluator = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Dalembert,
    CylinderMode,
    Manufactured,
}

/// A closed-form solution with the rectangle of (time, radius) on which it is
/// valid.
#[derive(Clone)]
pub struct OracleSolution {
    pub kind: OracleKind,
    pub eval: Evaluator,
    pub time: [f64; 2],
    pub space: [f64; 2],
}

impl std::fmt::Debug for OracleSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleSolution")
            .field("kind", &self.kind)
            .field("time", &self.time)
            .field("space", &self.space)
            .finish()
    }
}

impl OracleSolution {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.eval)(t, x)
    }

    /// Largest |ξ_tt - ξ_xx| of the centred five-point stencil with spacing `h`
    /// over interior sample points of the validity rectangle.
    pub fn wave_residual(&self, h: f64, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        for a in 1..samples {
            for b in 1..samples {
                let t = self.time[0] + (self.time[1] - self.time[0]) * a as f64 / samples as f64;
                let x = self.space[0] + (self.space[1] - self.space[0]) * b as f64 / samples as f64;
                if t - h < self.time[0] || t + h > self.time[1] || x - h < self.space[0] || x + h > self.space[1] {
                    continue;
                }
                let c = self.value(t, x);
                let tt = self.value(t + h, x) - 2.0 * c + self.value(t - h, x);
                let xx = self.value(t, x + h) - 2.0 * c + self.value(t, x - h);
                worst = worst.max(((tt - xx) / (h * h)).abs());
            }
        }
        worst
    }
}

/// Spherically symmetric free wave ξ = rφ̂ = h(t - r) - h(t + r) built from a
/// profile supported in (0, ∞).
#[derive(Clone)]
pub struct DalembertOracle {
    pub profile: Profile,
    pub derivative: Profile,
    pub support: [f64; 2],
}

pub fn dalembert_oracle(profile: Profile, derivative: Profile, support: [f64; 2]) -> Result<DalembertOracle> {
    if !(support[0] > 0.0 && support[1] > support[0]) {
        return Err(Error::Domain(format!("profile support [{}, {}] must lie in (0, ∞)", support[0], support[1])));
    }
    Ok(DalembertOracle { profile, derivative, support })
}

impl DalembertOracle {
    fn h(&self, x: f64) -> f64 {
        if x <= self.support[0] || x >= self.support[1] {
            0.0
        } else {
            (self.profile)(x)
        }
    }

    fn dh(&self, x: f64) -> f64 {
        if x <= self.support[0] || x >= self.support[1] {
            0.0
        } else {
            (self.derivative)(x)
        }
    }

    pub fn xi(&self, t: f64, r: f64) -> f64 {
        self.h(t - r) - self.h(t + r)
    }

    pub fn solution(&self) -> OracleSolution {
        let me = self.clone();
        OracleSolution {
            kind: OracleKind::Dalembert,
            eval: Arc::new(move |t, r| me.xi(t, r)),
            time: [-10.0, 10.0],
            space: [0.0, 10.0],
        }
    }

    /// Future radiation field as a function of retarded time u.
    pub fn theta_plus(&self, u: f64) -> f64 {
        self.h(u)
    }

    /// Past radiation field as a function of advanced time v.
    pub fn theta_minus(&self, v: f64) -> f64 {
        -self.h(v)
    }

    /// Compactified future profile of φ = ψ/sinχ at scri parameter s.
    pub fn compact_plus(&self, s: f64) -> f64 {
        if s.abs() >= PI / 2.0 {
            return 0.0;
        }
        self.theta_plus(s.tan()) / s.cos()
    }

    /// Compactified past profile of φ = ψ/sinχ at scri parameter s.
    pub fn compact_minus(&self, s: f64) -> f64 {
        if s.abs() >= PI / 2.0 {
            return 0.0;
        }
        self.theta_minus(s.tan()) / s.cos()
    }

    /// Reduced data ψ = ξ, ∂_Tψ on the slice T = 0 of the cylinder.
    pub fn cylinder_data(&self, grid: &Grid1D) -> Result<CauchyData> {
        let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |chi| {
            if chi >= PI {
                0.0
            } else {
                self.xi(0.0, (chi / 2.0).tan())
            }
        })?;
        let vel = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |chi| {
            if chi >= PI {
                return 0.0;
            }
            let r = (chi / 2.0).tan();
            (self.dh(-r) - self.dh(r)) * 0.5 * (1.0 + r * r)
        })?;
        CauchyData::new(pos, vel)
    }

    /// Data ξ, ∂_tξ at t = 0 on a radial grid.
    pub fn minkowski_data(&self, grid: &Grid1D) -> Result<CauchyData> {
        let pos = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |r| self.xi(0.0, r))?;
        let vel = ScalarFieldGrid::from_fn(grid.clone(), 0.0, |r| self.dh(-r) - self.dh(r))?;
        CauchyData::new(pos, vel)
    }
}

/// Standing wave ψ = cos((n+1)T)·sin((n+1)χ) of the linear reduced cylinder
/// equation.
pub fn cylinder_mode(n: usize) -> OracleSolution {
    let k = (n + 1) as f64;
    OracleSolution {
        kind: OracleKind::CylinderMode,
        eval: Arc::new(move |t, chi| (k * t).cos() * (k * chi).sin()),
        time: [f64::NEG_INFINITY, f64::INFINITY],
        space: [0.0, PI],
    }
}

/// Frame of an oracle as Cauchy data at time `t` with a centred-difference
/// velocity of spacing 1e-6.
pub fn oracle_data(o: &OracleSolution, grid: &Grid1D, t: f64) -> Result<CauchyData> {
    let d = 1e-6;
    let pos = ScalarFieldGrid::from_fn(grid.clone(), t, |x| o.value(t, x))?;
    let vel = ScalarFieldGrid::from_fn(grid.clone(), t, |x| (o.value(t + d, x) - o.value(t - d, x)) / (2.0 * d))?;
    CauchyData::new(pos, vel)
}

/// Manufactured oracle wrapping an arbitrary smooth evaluator.
pub fn manufactured_oracle(eval: Evaluator, time: [f64; 2], space: [f64; 2]) -> OracleSolution {
    OracleSolution { kind: OracleKind::Manufactured, eval, time, space }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures::{bump_profile, bump_derivative};

    fn oracle(amp: f64) -> DalembertOracle {
        dalembert_oracle(bump_profile(amp, 1.0, 0.8), bump_derivative(amp, 1.0, 0.8), [0.2, 1.8]).unwrap()
    }

    #[test]
    fn zero_profile_gives_zero_solution() {
        let o = oracle(0.0);
        assert_eq!(o.xi(0.3, 0.7), 0.0);
        assert_eq!(o.compact_plus(0.5), 0.0);
    }

    #[test]
    fn support_touching_origin_is_rejected() {
        let p = bump_profile(1.0, 0.5, 0.5);
        assert!(dalembert_oracle(p.clone(), p, [0.0, 1.0]).is_err());
    }

    #[test]
    fn free_wave_residual_vanishes() {
        let o = oracle(1.0).solution();
        let sol = OracleSolution { time: [-2.0, 2.0], space: [0.0, 3.0], ..o };
        for h in [0.04, 0.02, 0.01] {
            let r = sol.wave_residual(h, 40);
            assert!(r < 1e-8, "{h} {r}");
        }
    }

    #[test]
    fn radiation_fields_are_antisymmetric() {
        let o = oracle(0.7);
        for k in 0..100 {
            let s = -1.5 + 3.0 * k as f64 / 100.0;
            assert_eq!(o.compact_plus(s), -o.compact_minus(s));
        }
        assert!(o.compact_plus(0.7) != 0.0);
    }

    #[test]
    fn mode_closed_forms() {
        let m0 = cylinder_mode(0);
        assert_eq!(m0.value(0.3, 0.4), 0.3f64.cos() * 0.4f64.sin());
        let m1 = cylinder_mode(1);
        for k in 0..10 {
            let chi = 0.3 * k as f64;
            assert!((m1.value(PI / 2.0, chi) + (2.0 * chi).sin()).abs() < 1e-15);
        }
        for n in 0..4 {
            let m = cylinder_mode(n);
            for k in 0..10 {
                let chi = 0.3 * k as f64;
                assert!((m.value(2.0 * PI, chi) - m.value(0.0, chi)).abs() < 1e-13);
            }
        }
    }
}
