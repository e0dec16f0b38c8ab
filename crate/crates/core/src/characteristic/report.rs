use super::{HoermanderRun, PicardRun};

#[derive(Debug, Clone, Copy)]
pub enum RunRef<'a> {
    Hoermander(&'a HoermanderRun),
    Picard(&'a PicardRun),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub status: String,
    /// Hoermander: least-squares decay slope of ln(difference) per schedule step
    /// (positive means decaying). Picard: smallest successive ratio
    /// ln d_{n+1} / ln d_n.
    pub fitted_rate: f64,
    pub pass: bool,
    pub csv: String,
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        sxy += (i as f64 - mx) * (y - my);
        sxx += (i as f64 - mx).powi(2);
    }
    sxy / sxx
}

/// Successive ratios ln d_{n+1} / ln d_n of the Picard difference energies.
pub fn log_ratios(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| w[1].ln() / w[0].ln()).collect()
}

pub fn convergence_report(run: RunRef<'_>) -> ConvergenceReport {
    match run {
        RunRef::Hoermander(r) => {
            let mut csv = String::from("lambda,E_sigma0,diff_prev\n");
            for (k, (l, e)) in r.schedule.values().iter().zip(&r.energies).enumerate() {
                let d = if k == 0 { String::new() } else { format!("{:.16e}", r.differences[k - 1]) };
                csv.push_str(&format!("{l:.16e},{e:.16e},{d}\n"));
            }
            if r.differences.iter().all(|d| *d == 0.0) {
                return ConvergenceReport { status: "trivially converged".into(), fitted_rate: 0.0, pass: true, csv };
            }
            let logs: Vec<f64> = r.differences.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
            let rate = -slope(&logs);
            let status = if r.converged { "converged" } else { "not converged" };
            ConvergenceReport { status: status.into(), fitted_rate: rate, pass: r.converged, csv }
        }
        RunRef::Picard(r) => {
            let mut csv = String::from("n,sup_diff_energy,envelope\n");
            for (k, (d, e)) in r.diff_energies.iter().zip(&r.bound_curve).enumerate() {
                csv.push_str(&format!("{},{d:.16e},{e:.16e}\n", k + 1));
            }
            if let Some(n) = r.diverged_at {
                return ConvergenceReport {
                    status: format!("diverged at n={n}"),
                    fitted_rate: f64::NAN,
                    pass: false,
                    csv,
                };
            }
            if r.diff_energies.is_empty() {
                return ConvergenceReport { status: "trivially converged".into(), fitted_rate: 0.0, pass: true, csv };
            }
            let ratios = log_ratios(&r.diff_energies);
            let rate = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            let status = if r.converged { "converged" } else { "not converged" };
            ConvergenceReport { status: status.into(), fitted_rate: rate, pass: r.converged, csv }
        }
    }
}
