use super::Tolerances;
use crate::error::{Error, Result};
use crate::evolution::{assemble_history, continue_levels, EvolutionConfig, Nonlinearity, SolutionHistory};
use std::f64::consts::PI;

/// Outcome of the interface check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlueReport {
    pub interface: f64,
    pub split: f64,
    /// L² mismatch of the two pieces over the overlap band (worst of the two levels).
    pub mismatch: f64,
    pub tolerance: f64,
}

/// Assembles the two leapfrog levels at the interface stamp: `a` below
/// `split`, `b` above. Returns (previous level, interface level, report).
pub fn glue_levels(
    a: &SolutionHistory,
    b: &SolutionHistory,
    interface: f64,
    split: f64,
    overlap: f64,
    tol: &Tolerances,
) -> Result<(Vec<f64>, Vec<f64>, GlueReport)> {
    if a.metric != b.metric || !a.grid().same_as(b.grid()) || (a.dt - b.dt).abs() > 1e-14 * a.dt.abs() {
        return Err(Error::Grid("pieces do not share grid, metric and step".into()));
    }
    let ka = a.nearest_frame(interface)?;
    let kb = b.nearest_frame(interface)?;
    if ka == 0 || kb == 0 {
        return Err(Error::Coverage("pieces must cover one step before the interface".into()));
    }
    let tol_t = 1e-9 * (1.0 + interface.abs());
    if (a.frames[ka].stamp() - interface).abs() > tol_t || (b.frames[kb].stamp() - interface).abs() > tol_t {
        return Err(Error::Coverage(format!("interface stamp {interface} is not a frame of both pieces")));
    }
    let grid = a.grid();
    let band: Vec<usize> = (0..grid.n).filter(|&j| (grid.node(j) - split).abs() <= overlap).collect();
    if band.len() < 2 {
        return Err(Error::Grid("overlap band holds fewer than two nodes".into()));
    }
    let mut mismatch = 0.0f64;
    let mut levels = Vec::with_capacity(2);
    for (fa, fb) in [(ka - 1, kb - 1), (ka, kb)] {
        let va = &a.frames[fa].position.values;
        let vb = &b.frames[fb].position.values;
        let sq: f64 = band.windows(2).map(|w| 0.5 * ((va[w[0]] - vb[w[0]]).powi(2) + (va[w[1]] - vb[w[1]]).powi(2))).sum();
        mismatch = mismatch.max((4.0 * PI * sq * grid.h).sqrt());
        levels.push((0..grid.n).map(|j| if grid.node(j) < split { va[j] } else { vb[j] }).collect::<Vec<f64>>());
    }
    let report = GlueReport { interface, split, mismatch, tolerance: tol.tol_glue };
    if mismatch > tol.tol_glue {
        return Err(Error::Glue { measured: mismatch, tolerance: tol.tol_glue });
    }
    let cur = levels.pop().expect("two levels");
    let prev = levels.pop().expect("two levels");
    Ok((prev, cur, report))
}

/// Glues two local solutions along the slice `interface` and continues the
/// glued data to `t_end` with the same step.
pub fn glue(
    a: &SolutionHistory,
    b: &SolutionHistory,
    interface: f64,
    split: f64,
    overlap: f64,
    t_end: f64,
    tol: &Tolerances,
) -> Result<(SolutionHistory, GlueReport)> {
    let (prev, cur, report) = glue_levels(a, b, interface, split, overlap, tol)?;
    let dt = a.dt;
    let span = t_end - interface;
    if span * dt < 0.0 {
        return Err(Error::Config("t_end lies behind the interface".into()));
    }
    let steps = (span / dt).round() as usize;
    if ((steps as f64) * dt - span).abs() > 1e-9 * (1.0 + span.abs()) {
        return Err(Error::Config("t_end is not a whole number of steps from the interface".into()));
    }
    let nonlinearity = a.config.nonlinearity;
    let more = continue_levels(&a.metric, a.grid(), &prev, &cur, interface, dt, steps + 1, nonlinearity)?;
    let mut levels = Vec::with_capacity(steps + 3);
    levels.push(prev);
    levels.push(cur);
    levels.extend(more);
    let mut config: EvolutionConfig = a.config.clone();
    config.t_end = t_end;
    let model = crate::evolution::ReducedModel::new(&a.metric, a.grid())?;
    let hist = assemble_history(
        a.metric.clone(),
        config,
        a.grid(),
        &model,
        interface,
        dt,
        levels,
        nonlinearity == Nonlinearity::CubicDefocusing,
    )?;
    Ok((hist, report))
}
