//! Discrete fields on 1+1 charts: grids, finite differences, slice and cone
//! norms, restriction of solution histories to null surfaces, and the field
//! snapshot file format.

use crate::error::{Error, Result};
use crate::evolution::SolutionHistory;
use crate::geometry::NullSurface;
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    DirichletZero,
    ParityEven,
    ParityOdd,
    Open,
}

impl Boundary {
    pub fn tag(self) -> &'static str {
        match self {
            Boundary::DirichletZero => "dirichlet_zero",
            Boundary::ParityEven => "parity_even",
            Boundary::ParityOdd => "parity_odd",
            Boundary::Open => "open",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Ok(match tag {
            "dirichlet_zero" => Boundary::DirichletZero,
            "parity_even" => Boundary::ParityEven,
            "parity_odd" => Boundary::ParityOdd,
            "open" => Boundary::Open,
            other => return Err(Error::Format(format!("unknown boundary tag {other:?}"))),
        })
    }
}

/// Uniform grid `lo + i·h`, `i = 0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub coord: String,
    pub lo: f64,
    pub h: f64,
    pub n: usize,
    pub boundary: [Boundary; 2],
}

pub const MIN_NODES: usize = 8;

impl Grid1D {
    pub fn new(coord: &str, lo: f64, h: f64, n: usize, boundary: [Boundary; 2]) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::Grid(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(h > 0.0) || !h.is_finite() || !lo.is_finite() {
            return Err(Error::Grid(format!("bad spacing h = {h} or origin {lo}")));
        }
        Ok(Self { coord: coord.to_string(), lo, h, n, boundary })
    }

    /// `cells` uniform cells over `[lo, hi]`.
    pub fn spanning(coord: &str, lo: f64, hi: f64, cells: usize, boundary: [Boundary; 2]) -> Result<Self> {
        Self::new(coord, lo, (hi - lo) / cells as f64, cells + 1, boundary)
    }

    /// Cylinder grid χ ∈ [0, π] with `cells` cells and Dirichlet ends.
    pub fn cylinder(cells: usize) -> Result<Self> {
        Self::spanning("chi", 0.0, PI, cells, [Boundary::DirichletZero; 2])
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + self.h * i as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn hi(&self) -> f64 {
        self.node(self.n - 1)
    }

    pub fn same_as(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.lo - other.lo).abs() <= 1e-12 * self.h
            && (self.h - other.h).abs() <= 1e-12 * self.h
    }

    /// Cell index and fractional offset of `x`, clamped to the grid.
    pub(crate) fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let t = (x - self.lo) / self.h;
        let tol = 1e-9;
        if t < -tol || t > (self.n - 1) as f64 + tol {
            return None;
        }
        let t = t.clamp(0.0, (self.n - 1) as f64);
        let i = (t.floor() as usize).min(self.n - 2);
        Some((i, t - i as f64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFieldGrid {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub stamp: f64,
}

impl ScalarFieldGrid {
    pub fn new(grid: Grid1D, values: Vec<f64>, stamp: f64) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid(format!("{} values on a {}-node grid", values.len(), grid.n)));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::BlowUp { stamp, detail: format!("non-finite value at node {i}") });
        }
        for (end, idx) in [(0usize, 0usize), (1, grid.n - 1)] {
            if grid.boundary[end] == Boundary::DirichletZero && values[idx] != 0.0 {
                return Err(Error::Grid(format!(
                    "Dirichlet end {idx} carries non-zero value {}",
                    values[idx]
                )));
            }
        }
        Ok(Self { grid, values, stamp })
    }

    pub fn from_fn(grid: Grid1D, stamp: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        for (end, idx) in [(0usize, 0usize), (1, grid.n - 1)] {
            if grid.boundary[end] == Boundary::DirichletZero {
                values[idx] = 0.0;
            }
        }
        Self::new(grid, values, stamp)
    }

    pub fn zeros(grid: Grid1D, stamp: f64) -> Self {
        let n = grid.n;
        Self { grid, values: vec![0.0; n], stamp }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Position φ and normal derivative on one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub position: ScalarFieldGrid,
    pub velocity: ScalarFieldGrid,
}

impl CauchyData {
    pub fn new(position: ScalarFieldGrid, velocity: ScalarFieldGrid) -> Result<Self> {
        if !position.grid.same_as(&velocity.grid) {
            return Err(Error::Grid("position and velocity grids differ".into()));
        }
        if position.stamp != velocity.stamp {
            return Err(Error::Grid("position and velocity stamps differ".into()));
        }
        Ok(Self { position, velocity })
    }

    pub fn zeros(grid: Grid1D, stamp: f64) -> Self {
        Self {
            position: ScalarFieldGrid::zeros(grid.clone(), stamp),
            velocity: ScalarFieldGrid::zeros(grid, stamp),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.position.grid
    }

    pub fn stamp(&self) -> f64 {
        self.position.stamp
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.position.values.iter_mut().for_each(|v| *v *= alpha);
        out.velocity.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    pub fn sub(&self, other: &CauchyData) -> Result<Self> {
        if !self.grid().same_as(other.grid()) {
            return Err(Error::Grid("cannot subtract data on different grids".into()));
        }
        let mut out = self.clone();
        for (a, b) in out.position.values.iter_mut().zip(&other.position.values) {
            *a -= b;
        }
        for (a, b) in out.velocity.values.iter_mut().zip(&other.velocity.values) {
            *a -= b;
        }
        Ok(out)
    }
}

/// Field values on a null surface, sampled along its parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicData {
    pub surface: NullSurface,
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl CharacteristicData {
    pub fn new(surface: NullSurface, grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid(format!("{} values on a {}-node grid", values.len(), grid.n)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("characteristic data must be finite".into()));
        }
        if let Some(vertex) = surface.vertex {
            // Compact support away from the tip: the node at the vertex must vanish.
            for (i, v) in values.iter().enumerate() {
                if *v != 0.0 && surface.locus(grid.node(i)) == vertex {
                    return Err(Error::Domain("cone data must vanish at the vertex".into()));
                }
            }
        }
        Ok(Self { surface, grid, values })
    }
}

/// First or second derivative with centred second-order stencils.
pub fn derivative(f: &ScalarFieldGrid, order: u8) -> Result<ScalarFieldGrid> {
    let g = &f.grid;
    let need = 2 * order as usize + 1;
    if !(order == 1 || order == 2) {
        return Err(Error::Argument(format!("derivative order {order} not in {{1, 2}}")));
    }
    if g.n < need.max(4) {
        return Err(Error::Grid(format!("{} nodes too few for order {order}", g.n)));
    }
    let v = &f.values;
    let n = g.n;
    let h = g.h;
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = if order == 1 {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        } else {
            (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h)
        };
    }
    for (end, idx, inner, inner2, inner3, sign) in
        [(0usize, 0usize, 1usize, 2usize, 3usize, 1.0), (1, n - 1, n - 2, n - 3, n - 4, -1.0)]
    {
        out[idx] = match (g.boundary[end], order) {
            (Boundary::DirichletZero | Boundary::ParityOdd, 1) => {
                // Odd reflection about the end node.
                sign * (v[inner] - (2.0 * v[idx] - v[inner])) / (2.0 * h)
            }
            (Boundary::DirichletZero | Boundary::ParityOdd, _) => {
                (v[inner] - 2.0 * v[idx] + (2.0 * v[idx] - v[inner])) / (h * h)
            }
            (Boundary::ParityEven, 1) => 0.0,
            (Boundary::ParityEven, _) => 2.0 * (v[inner] - v[idx]) / (h * h),
            (Boundary::Open, 1) => sign * (-3.0 * v[idx] + 4.0 * v[inner] - v[inner2]) / (2.0 * h),
            (Boundary::Open, _) => {
                (2.0 * v[idx] - 5.0 * v[inner] + 4.0 * v[inner2] - v[inner3]) / (h * h)
            }
        };
    }
    Ok(ScalarFieldGrid { grid: g.clone(), values: out, stamp: f.stamp })
}

/// Trapezoidal rule over uniformly spaced samples.
pub fn trapezoid(values: impl IntoIterator<Item = f64>, h: f64) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    if v.len() < 2 {
        return 0.0;
    }
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    h * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

/// `ψ / sin χ` with the one-sided limits `±∂_χψ` at the poles.
pub fn regularized_quotient(psi: &[f64], grid: &Grid1D) -> Vec<f64> {
    let n = psi.len();
    let h = grid.h;
    (0..n)
        .map(|i| {
            let x = grid.node(i);
            let s = x.sin();
            if i == 0 && x.abs() < 1e-12 {
                (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * h)
            } else if i == n - 1 && (x - PI).abs() < 1e-9 {
                (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * h) * -1.0
            } else {
                psi[i] / s
            }
        })
        .collect()
}

/// How a slice stores its field and which measure its norms use.
#[derive(Debug, Clone, PartialEq)]
pub enum LeafMeasure {
    /// Cylinder slice storing ψ = φ·sinχ with Dirichlet ends; the measure is
    /// 4π sin²χ dχ on S³ and ‖φ‖²_{H¹} = 4π∫(∂_χψ)² dχ.
    CylinderRadial,
    /// φ stored directly; per-node induced volume density (including 4π)
    /// and inverse induced metric along the leaf coordinate.
    Weighted { volume: Vec<f64>, inverse_metric: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceNorms {
    pub h1: f64,
    pub l2: f64,
    pub l4_4: f64,
    pub l6_6: f64,
    pub velocity_l2: f64,
    /// ‖φ‖²_{H¹} + ‖velocity‖²_{L²}.
    pub energy: f64,
}

pub fn slice_norms(d: &CauchyData, leaf: &LeafMeasure) -> Result<SliceNorms> {
    let g = d.grid();
    let h = g.h;
    let psi = &d.position.values;
    let vel = &d.velocity.values;
    let four_pi = 4.0 * PI;
    let (h1_sq, l2_sq, l4, l6, v2) = match leaf {
        LeafMeasure::CylinderRadial => {
            if g.boundary != [Boundary::DirichletZero; 2] {
                return Err(Error::Grid("cylinder slices need Dirichlet ends".into()));
            }
            let grad: f64 = psi.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / h;
            let phi = regularized_quotient(psi, g);
            (
                four_pi * grad,
                four_pi * trapezoid(psi.iter().map(|p| p * p), h),
                four_pi * trapezoid(psi.iter().zip(&phi).map(|(p, q)| p * p * q * q), h),
                four_pi * trapezoid(psi.iter().zip(&phi).map(|(p, q)| p * p * q.powi(4)), h),
                four_pi * trapezoid(vel.iter().map(|v| v * v), h),
            )
        }
        LeafMeasure::Weighted { volume, inverse_metric } => {
            if volume.len() != g.n || inverse_metric.len() != g.n {
                return Err(Error::Grid("leaf weights do not match the data grid".into()));
            }
            let mut open = d.position.clone();
            open.grid.boundary = [Boundary::Open; 2];
            let dphi = derivative(&open, 1)?;
            let w = |i: usize| volume[i];
            let idx = 0..g.n;
            (
                trapezoid(idx.clone().map(|i| w(i) * (inverse_metric[i] * dphi.values[i].powi(2) + psi[i].powi(2))), h),
                trapezoid(idx.clone().map(|i| w(i) * psi[i].powi(2)), h),
                trapezoid(idx.clone().map(|i| w(i) * psi[i].powi(4)), h),
                trapezoid(idx.clone().map(|i| w(i) * psi[i].powi(6)), h),
                trapezoid(idx.map(|i| w(i) * vel[i].powi(2)), h),
            )
        }
    };
    Ok(SliceNorms {
        h1: h1_sq.sqrt(),
        l2: l2_sq.sqrt(),
        l4_4: l4,
        l6_6: l6,
        velocity_l2: v2.sqrt(),
        energy: h1_sq + v2,
    })
}

/// Squared-norm integrands of the cone norm along the surface parameter.
fn cone_integrands(d: &CharacteristicData) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut open = d.grid.clone();
    open.boundary = [Boundary::Open; 2];
    let f = ScalarFieldGrid { grid: open, values: d.values.clone(), stamp: 0.0 };
    let df = derivative(&f, 1)?;
    let c = d.surface.param_per_generator();
    let mut grad = Vec::with_capacity(d.grid.n);
    let mut mass = Vec::with_capacity(d.grid.n);
    for i in 0..d.grid.n {
        let w = d.surface.contracted_measure(d.grid.node(i));
        grad.push(w * (df.values[i] / c).powi(2));
        mass.push(w * d.values[i].powi(2));
    }
    Ok((grad, mass))
}

/// `(∫ (∇_lφ)² + φ² n⌟dμ)^{1/2}` along the surface.
pub fn cone_h1_norm(d: &CharacteristicData) -> Result<f64> {
    let (grad, mass) = cone_integrands(d)?;
    let h = d.grid.h;
    Ok((trapezoid(grad, h) + trapezoid(mass, h)).sqrt())
}

/// `(∫ φ² n⌟dμ)^{1/2}` along the surface.
pub fn cone_l2_norm(d: &CharacteristicData) -> Result<f64> {
    let (_, mass) = cone_integrands(d)?;
    Ok(trapezoid(mass, d.grid.h).sqrt())
}

/// `∫ φ⁴ n⌟dμ` along the surface.
pub fn cone_l4_4(d: &CharacteristicData) -> f64 {
    trapezoid(
        (0..d.grid.n).map(|i| d.surface.contracted_measure(d.grid.node(i)) * d.values[i].powi(4)),
        d.grid.h,
    )
}

/// The physical-weight field φ of a history on the surface locus, sampled at
/// the nodes of `grid` (the surface parameter).
pub fn restrict_to_surface(hist: &SolutionHistory, surface: &NullSurface, grid: &Grid1D) -> Result<CharacteristicData> {
    let values = (0..grid.n)
        .map(|i| {
            let x = surface.locus(grid.node(i));
            hist.sample_field(x[0], x[1])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CharacteristicData { surface: surface.clone(), grid: grid.clone(), values })
}

/// Writes a field snapshot: a header line followed by `node value` pairs.
pub fn write_snapshot(f: &ScalarFieldGrid) -> String {
    let g = &f.grid;
    let mut s = format!(
        "# coord={} stamp={:.16e} n={} h={:.16e} boundary={},{}\n",
        g.coord,
        f.stamp,
        g.n,
        g.h,
        g.boundary[0].tag(),
        g.boundary[1].tag()
    );
    for (i, v) in f.values.iter().enumerate() {
        let _ = writeln!(s, "{:.16e} {:.16e}", g.node(i), v);
    }
    s
}

pub fn read_snapshot(text: &str) -> Result<ScalarFieldGrid> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty snapshot".into()))?;
    let header = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Format("snapshot header must start with '# '".into()))?;
    let (mut coord, mut stamp, mut n, mut h, mut boundary) = (None, None, None, None, None);
    for kv in header.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field {kv:?}")))?;
        let num = |v: &str| v.parse::<f64>().map_err(|e| Error::Format(format!("{k}: {e}")));
        match k {
            "coord" => coord = Some(v.to_string()),
            "stamp" => stamp = Some(num(v)?),
            "n" => n = Some(v.parse::<usize>().map_err(|e| Error::Format(format!("n: {e}")))?),
            "h" => h = Some(num(v)?),
            "boundary" => {
                let (a, b) = v
                    .split_once(',')
                    .ok_or_else(|| Error::Format("boundary needs two tags".into()))?;
                boundary = Some([Boundary::from_tag(a)?, Boundary::from_tag(b)?]);
            }
            other => return Err(Error::Format(format!("unknown header key {other:?}"))),
        }
    }
    let missing = |name: &str| Error::Format(format!("header lacks {name}"));
    let (coord, stamp, n, h, boundary) = (
        coord.ok_or_else(|| missing("coord"))?,
        stamp.ok_or_else(|| missing("stamp"))?,
        n.ok_or_else(|| missing("n"))?,
        h.ok_or_else(|| missing("h"))?,
        boundary.ok_or_else(|| missing("boundary"))?,
    );
    let mut lo = None;
    let mut values = Vec::with_capacity(n);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let (x, v) = match (it.next(), it.next(), it.next()) {
            (Some(x), Some(v), None) => (x, v),
            _ => return Err(Error::Format(format!("bad data line {line:?}"))),
        };
        let x: f64 = x.parse().map_err(|e| Error::Format(format!("node: {e}")))?;
        lo.get_or_insert(x);
        values.push(v.parse::<f64>().map_err(|e| Error::Format(format!("value: {e}")))?);
    }
    if values.len() != n {
        return Err(Error::Format(format!("header says n={n}, found {} lines", values.len())));
    }
    let grid = Grid1D::new(&coord, lo.unwrap_or(0.0), h, n, boundary)?;
    Ok(ScalarFieldGrid { grid, values, stamp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = Grid1D::spanning("x", 0.0, 1.0, 20, [Boundary::Open; 2]).unwrap();
        let f = ScalarFieldGrid::from_fn(g, 0.0, |_| 3.5).unwrap();
        for order in [1, 2] {
            assert!(derivative(&f, order).unwrap().max_abs() < 1e-10);
        }
        assert!(derivative(&f, 3).is_err());
    }

    #[test]
    fn sine_derivative_at_midpoint() {
        let g = Grid1D::cylinder(64).unwrap();
        let f = ScalarFieldGrid::from_fn(g, 0.0, f64::sin).unwrap();
        let d = derivative(&f, 1).unwrap();
        assert!(d.values[32].abs() < 1e-12);
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let err = |cells: usize| {
            let g = Grid1D::cylinder(cells).unwrap();
            let f = ScalarFieldGrid::from_fn(g.clone(), 0.0, |x| (3.0 * x).sin()).unwrap();
            let d = derivative(&f, 2).unwrap();
            g.nodes()
                .iter()
                .zip(&d.values)
                .map(|(x, v)| (v + 9.0 * (3.0 * x).sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(50) / err(100);
        assert!((ratio - 4.0).abs() < 0.3, "{ratio}");
    }

    #[test]
    fn too_few_nodes_rejected() {
        assert!(Grid1D::new("x", 0.0, 0.1, 5, [Boundary::Open; 2]).is_err());
    }

    #[test]
    fn unit_field_on_three_sphere() {
        let g = Grid1D::cylinder(400).unwrap();
        let pos = ScalarFieldGrid::from_fn(g.clone(), 0.0, f64::sin).unwrap();
        let d = CauchyData::new(pos, ScalarFieldGrid::zeros(g, 0.0)).unwrap();
        let n = slice_norms(&d, &LeafMeasure::CylinderRadial).unwrap();
        let vol = 2.0 * PI * PI;
        assert!((n.l2 * n.l2 - vol).abs() < 1e-9);
        assert!((n.h1 * n.h1 - vol).abs() < 1e-3);
        assert!((n.l4_4 - vol).abs() < 1e-9);
    }

    #[test]
    fn zero_data_has_zero_norms() {
        let g = Grid1D::cylinder(64).unwrap();
        let n = slice_norms(&CauchyData::zeros(g, 0.0), &LeafMeasure::CylinderRadial).unwrap();
        assert_eq!([n.h1, n.l2, n.l4_4, n.l6_6, n.energy], [0.0; 5]);
    }

    #[test]
    fn constant_cone_data() {
        let s = NullSurface::cylinder_scri_plus();
        let g = Grid1D::spanning("chi", 0.5, 2.5, 400, [Boundary::Open; 2]).unwrap();
        let d = CharacteristicData::new(s, g, vec![1.5; 401]).unwrap();
        // n⌟dμ on scri⁺ is 2 sin²χ dχ · 4π; ∫_{0.5}^{2.5} sin² = 1 - (sin 5 - sin 1)/4.
        let vol = 8.0 * PI * (1.0 - ((5.0f64).sin() - (1.0f64).sin()) / 4.0);
        let norm = cone_h1_norm(&d).unwrap();
        assert!((norm * norm - 2.25 * vol).abs() < 1e-4 * vol);
    }

    #[test]
    fn cone_norm_rejects_vertex_support() {
        let s = NullSurface::cylinder_scri_plus();
        let g = Grid1D::cylinder(16).unwrap();
        assert!(CharacteristicData::new(s, g, vec![1.0; 17]).is_err());
    }

    #[test]
    fn snapshot_roundtrip_is_bit_exact() {
        let g = Grid1D::cylinder(37).unwrap();
        let f = ScalarFieldGrid::from_fn(g, 0.123456789, |x| (x * 7.1).sin() / 3.0 + 1e-300).unwrap();
        let back = read_snapshot(&write_snapshot(&f)).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.stamp, f.stamp);
        assert_eq!(back.grid.h, f.grid.h);
        assert_eq!(back.grid.boundary, f.grid.boundary);
        assert!(read_snapshot("coord=x\n1 2").is_err());
    }

    fn random_field(coeffs: &[f64], cells: usize) -> CauchyData {
        let g = Grid1D::cylinder(cells).unwrap();
        let pos = ScalarFieldGrid::from_fn(g.clone(), 0.0, |x| {
            coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * x).sin()).sum()
        })
        .unwrap();
        let vel = ScalarFieldGrid::from_fn(g, 0.0, |x| {
            coeffs.iter().enumerate().map(|(k, c)| c * ((k + 2) as f64 * x).sin()).sum()
        })
        .unwrap();
        CauchyData::new(pos, vel).unwrap()
    }

    proptest! {
        #[test]
        fn norms_are_homogeneous(coeffs in prop::collection::vec(-1.0f64..1.0, 1..5), alpha in -3.0f64..3.0) {
            let d = random_field(&coeffs, 64);
            let a = slice_norms(&d, &LeafMeasure::CylinderRadial).unwrap();
            let b = slice_norms(&d.scaled(alpha), &LeafMeasure::CylinderRadial).unwrap();
            let tol = 1e-12;
            prop_assert!((b.h1 - alpha.abs() * a.h1).abs() <= tol * (1.0 + a.h1));
            prop_assert!((b.l2 - alpha.abs() * a.l2).abs() <= tol * (1.0 + a.l2));
            prop_assert!((b.l4_4 - alpha.powi(4) * a.l4_4).abs() <= tol * (1.0 + a.l4_4 * alpha.powi(4)));
        }

        #[test]
        fn triangle_inequality(c1 in prop::collection::vec(-1.0f64..1.0, 3), c2 in prop::collection::vec(-1.0f64..1.0, 3)) {
            let a = random_field(&c1, 64);
            let b = random_field(&c2, 64);
            let sum = b.sub(&a.scaled(-1.0)).unwrap();
            let na = slice_norms(&a, &LeafMeasure::CylinderRadial).unwrap();
            let nb = slice_norms(&b, &LeafMeasure::CylinderRadial).unwrap();
            let ns = slice_norms(&sum, &LeafMeasure::CylinderRadial).unwrap();
            prop_assert!(ns.h1 <= na.h1 + nb.h1 + 1e-12);
            prop_assert!(ns.l2 <= na.l2 + nb.l2 + 1e-12);
        }
    }
}
