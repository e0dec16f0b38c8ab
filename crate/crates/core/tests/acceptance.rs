use confscat::harness::suites::mode_error;
use confscat::harness::{run_experiment, ConfigFile, ExperimentConfig, SuiteReport};
use std::process::ExitCode;
use std::time::Instant;

/// Criteria whose failure at the reference configuration is understood and
/// documented; they are still evaluated and reported.
const KNOWN_UNATTAINABLE: [usize; 1] = [9];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn defaults() -> ExperimentConfig {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/defaults.conf")).expect("reference config");
    ExperimentConfig::from_file(&ConfigFile::parse(&text).expect("parse")).expect("valid")
}

fn suite(cfg: &ExperimentConfig, name: &str) -> SuiteReport {
    run_experiment(cfg, name).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn pick(rep: &SuiteReport, names: &[&str]) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for n in names {
        let a = rep.audits.iter().find(|a| a.name == *n).unwrap_or_else(|| panic!("{}: no audit {n}", rep.suite));
        pass &= a.pass;
        detail.push(format!("{}[{}] {}", n, if a.pass { "ok" } else { "x" }, a.detail));
    }
    (pass, detail.join("; "))
}

fn criterion_1(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let cells = [100, 200, 400];
    let mut pass = true;
    let mut detail = Vec::new();
    for n in 0..4 {
        let errs: Vec<(f64, f64)> = cells.iter().map(|&c| mode_error(n, c, cfg.cfl).expect("mode run")).collect();
        let h2 = (std::f64::consts::PI / 400.0).powi(2);
        let end = errs[2].0;
        let order = (errs[1].1 / errs[2].1).log2();
        let ok = end <= 5.0 * h2 && (order - 2.0).abs() <= 0.2 && (errs[0].1 / errs[1].1).log2() > 1.8;
        pass &= ok;
        detail.push(format!("n={n}: err {end:.2e} (5h^2 {:.2e}), order {order:.3}", 5.0 * h2));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 5.0;
    Outcome { id: 1, pass, detail: format!("{}; runtime {secs:.2} s", detail.join(", ")) }
}

fn criterion_2(cfg: &ExperimentConfig) -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for amp in [0.1, 0.3, 1.0] {
        let rep = suite(&ExperimentConfig { amplitude: amp, ..cfg.clone() }, "cauchy");
        let (ok, d) = pick(&rep, &["energy_drift"]);
        pass &= ok;
        detail.push(format!("a={amp}: {d}"));
    }
    Outcome { id: 2, pass, detail: detail.join("; ") }
}

fn from_suite(id: usize, rep: &SuiteReport, names: &[&str]) -> Outcome {
    let (pass, detail) = pick(rep, names);
    Outcome { id, pass, detail }
}

fn criterion_6(cfg: &ExperimentConfig) -> Outcome {
    let small = suite(&ExperimentConfig { amplitude: 0.05, picard_eps: 0.2, ..cfg.clone() }, "picard");
    let (ok, d) = pick(&small, &["no_divergence", "super_geometric"]);
    let large = suite(&ExperimentConfig { amplitude: 5.0, picard_eps: 0.5, ..cfg.clone() }, "picard");
    let (converged, dl) = pick(&large, &["no_divergence"]);
    Outcome { id: 6, pass: ok && !converged, detail: format!("a=0.05: {d}; a=5.0, eps=0.5 (must diverge): {dl}") }
}

fn main() -> ExitCode {
    let cfg = defaults();
    let start = Instant::now();
    let mut out = vec![criterion_1(&cfg), criterion_2(&cfg)];
    let conv = suite(&cfg, "convergence");
    out.push(from_suite(3, &conv, &["conformal_order", "conformal_control"]));
    out.push(from_suite(4, &suite(&cfg, "hoermander"), &["differences_decreasing", "trace_check"]));
    out.push(from_suite(5, &suite(&cfg, "energy-audit"), &["cone_slice_equivalence"]));
    out.push(criterion_6(&cfg));
    out.push(from_suite(7, &suite(&cfg, "lemma-audit"), &["u0_found", "inequalities"]));
    out.push(from_suite(8, &suite(&cfg, "glue"), &["split_vs_monolithic"]));
    let scatter = suite(&cfg, "scatter");
    out.push(from_suite(9, &scatter, &["linear_limit", "nonlinear_slope", "round_trip"]));
    let mut c10 = from_suite(10, &scatter, &["bi_lipschitz"]);
    let secs = start.elapsed().as_secs_f64();
    let threads = std::env::var("CONFSCAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).unwrap_or(0);
    let cores = if threads > 0 { threads } else { std::thread::available_parallelism().map_or(1, |n| n.get()) };
    c10.pass &= secs * (cores as f64) < 600.0;
    c10.detail.push_str(&format!("; full suite {secs:.1} s on {cores} core(s) (bound 600 core-s)"));
    out.push(c10);

    let mut unexpected = 0;
    for o in &out {
        let known = KNOWN_UNATTAINABLE.contains(&o.id);
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && known { " (known: unattainable at reference resolution)" } else { "" };
        println!("{tag} criterion {}{note}: {}", o.id, o.detail);
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    let passed = out.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected failure(s)", out.len());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
