use confscat::characteristic::LambdaSchedule;
use confscat::evolution::Nonlinearity;
use confscat::fields::{CauchyData, Grid1D};
use confscat::harness::fixtures::{bump, bump_derivative, bump_profile, cylinder_bump};
use confscat::harness::suites::{loglog_fit, past_bump};
use confscat::harness::{dalembert_oracle, DalembertOracle};
use confscat::scattering::{
    inverse_trace, inverse_trace_data, linear_trace_bicontinuity, linear_trace_operator, lipschitz_sample, scatter_profile,
    scattering_map, trace_backward, trace_forward, ProfileKind, RadiationProfile, ScatteringParams,
};
use std::f64::consts::PI;

fn oracle() -> DalembertOracle {
    dalembert_oracle(bump_profile(0.1, 1.0, 0.8), bump_derivative(0.1, 1.0, 0.8), [0.2, 1.8]).unwrap()
}

fn params(nl: Nonlinearity, count: usize) -> ScatteringParams {
    ScatteringParams::new(0.25, nl, LambdaSchedule::geometric(count).unwrap())
}

fn max_diff(p: &RadiationProfile, f: impl Fn(f64) -> f64) -> f64 {
    p.grid.nodes().iter().zip(&p.values).map(|(s, v)| (v - f(*s)).abs()).fold(0.0, f64::max)
}

#[test]
fn zero_data_has_zero_traces() {
    let d = CauchyData::zeros(Grid1D::cylinder(100).unwrap(), 0.0);
    for nl in [Nonlinearity::Linear, Nonlinearity::CubicDefocusing] {
        assert!(trace_forward(&d, 0.25, nl).unwrap().values.iter().all(|v| *v == 0.0));
        assert!(trace_backward(&d, 0.25, nl).unwrap().values.iter().all(|v| *v == 0.0));
    }
    let z = RadiationProfile::zeros(ProfileKind::ScriMinus, 100).unwrap();
    let (d0, _) = inverse_trace(&z, &params(Nonlinearity::CubicDefocusing, 4)).unwrap();
    assert_eq!(d0.position.max_abs() + d0.velocity.max_abs(), 0.0);
    let r = scattering_map(&z, &params(Nonlinearity::CubicDefocusing, 4)).unwrap();
    assert!(r.output.values.iter().all(|v| *v == 0.0));
}

#[test]
fn traces_match_the_free_wave_radiation_fields() {
    let o = oracle();
    let mut errs = Vec::new();
    for cells in [200, 400] {
        let d = o.cylinder_data(&Grid1D::cylinder(cells).unwrap()).unwrap();
        let f = trace_forward(&d, 0.25, Nonlinearity::Linear).unwrap();
        let b = trace_backward(&d, 0.25, Nonlinearity::Linear).unwrap();
        let h2 = (PI / cells as f64).powi(2);
        let ef = max_diff(&f, |s| o.compact_plus(s));
        let eb = max_diff(&b, |s| o.compact_minus(s));
        assert!(ef <= 10.0 * h2 && eb <= 10.0 * h2, "{ef} {eb} {h2}");
        errs.push(ef);
    }
    let order = (errs[0] / errs[1]).log2();
    assert!((order - 2.0).abs() < 0.3, "{order}");
}

#[test]
fn linear_trace_is_linear() {
    let g = Grid1D::cylinder(200).unwrap();
    let d1 = oracle().cylinder_data(&g).unwrap();
    let d2 = cylinder_bump(&g, 0.3).unwrap();
    let t1 = linear_trace_operator(&d1, 0.25).unwrap();
    let t2 = linear_trace_operator(&d2, 0.25).unwrap();
    let sum = CauchyData::new(
        confscat::fields::ScalarFieldGrid { values: d1.position.values.iter().zip(&d2.position.values).map(|(a, b)| a + b).collect(), ..d1.position.clone() },
        confscat::fields::ScalarFieldGrid { values: d1.velocity.values.iter().zip(&d2.velocity.values).map(|(a, b)| a + b).collect(), ..d1.velocity.clone() },
    )
    .unwrap();
    let ts = linear_trace_operator(&sum, 0.25).unwrap();
    let scale = t1.values.iter().chain(&t2.values).fold(0.0f64, |a, v| a.max(v.abs()));
    for ((a, b), c) in t1.values.iter().zip(&t2.values).zip(&ts.values) {
        assert!((a + b - c).abs() <= 1e-12 * scale);
    }
    let t3 = linear_trace_operator(&d1.scaled(3.0), 0.25).unwrap();
    for (a, b) in t1.values.iter().zip(&t3.values) {
        assert!((3.0 * a - b).abs() <= 1e-12 * scale);
    }
}

#[test]
fn time_symmetric_data_give_reflected_profiles() {
    let d = cylinder_bump(&Grid1D::cylinder(200).unwrap(), 0.5).unwrap();
    let f = trace_forward(&d, 0.25, Nonlinearity::CubicDefocusing).unwrap();
    let b = trace_backward(&d, 0.25, Nonlinearity::CubicDefocusing).unwrap();
    let n = f.values.len();
    for i in 0..n {
        assert!((b.values[i] - f.values[n - 1 - i]).abs() <= 1e-12, "{i}");
    }
}

#[test]
fn profile_conversions_round_trip() {
    let p = RadiationProfile::from_fn(ProfileKind::ScriPlus, 100, |s| bump(s, 0.2, 0.6)).unwrap();
    let back = RadiationProfile::from_characteristic(&p.to_characteristic().unwrap()).unwrap();
    assert_eq!(p, back);
    assert!(RadiationProfile::new(ProfileKind::ScriPlus, Grid1D::cylinder(10).unwrap(), vec![0.0; 11]).is_err());
}

#[test]
fn round_trip_error_decreases_with_lambda() {
    let th = past_bump(400, 0.1).unwrap();
    let mut errs = Vec::new();
    for count in 3..=7 {
        let p = params(Nonlinearity::Linear, count);
        let d = inverse_trace_data(&th, &p).unwrap();
        let back = trace_backward(&d, 0.25, Nonlinearity::Linear).unwrap();
        errs.push(back.combine(&th, 1.0, -1.0).unwrap().h1_norm / th.h1_norm);
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn fast_inverse_matches_the_full_schedule() {
    let th = past_bump(200, 0.1).unwrap();
    let p = params(Nonlinearity::CubicDefocusing, 5);
    let (full, _) = inverse_trace(&th, &p).unwrap();
    let fast = inverse_trace_data(&th, &p).unwrap();
    assert_eq!(full, fast);
}

#[test]
fn nonlinear_deviation_is_quadratic_in_amplitude() {
    let amps = [0.05, 0.1, 0.2];
    let cubic = params(Nonlinearity::CubicDefocusing, 7);
    let linear = params(Nonlinearity::Linear, 7);
    let devs: Vec<f64> = amps
        .iter()
        .map(|&a| {
            let th = past_bump(200, a).unwrap();
            let c = scatter_profile(&th, &cubic).unwrap();
            let l = scatter_profile(&th, &linear).unwrap();
            c.combine(&l, 1.0, -1.0).unwrap().l2_norm().unwrap() / th.l2_norm().unwrap()
        })
        .collect();
    let (slope, _) = loglog_fit(&amps, &devs);
    assert!((slope - 2.0).abs() <= 0.3, "{slope}");
}

#[test]
fn scaling_of_the_scattering_map() {
    let th = past_bump(200, 0.05).unwrap();
    let linear = params(Nonlinearity::Linear, 7);
    let s1 = scatter_profile(&th, &linear).unwrap();
    let s3 = scatter_profile(&th.scaled(3.0).unwrap(), &linear).unwrap();
    let scale = s1.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let worst = s1.values.iter().zip(&s3.values).map(|(a, b)| (3.0 * a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-9 * scale, "{worst} {scale}");
    let cubic = params(Nonlinearity::CubicDefocusing, 7);
    let base = scatter_profile(&th, &cubic).unwrap();
    let dev = |alpha: f64| {
        let s = scatter_profile(&th.scaled(alpha).unwrap(), &cubic).unwrap();
        s.combine(&base, 1.0, -alpha).unwrap().l2_norm().unwrap()
    };
    let ratio = dev(4.0) / dev(2.0);
    assert!((ratio - 10.0).abs() <= 1.5, "{ratio}");
}

#[test]
fn lipschitz_sampling_of_simple_operators() {
    let c = RadiationProfile::zeros(ProfileKind::ScriMinus, 100).unwrap();
    let id = lipschitz_sample(|p| Ok(p.clone()), &c, 0.1, 20, 1).unwrap();
    assert!(id.ratios.iter().all(|r| (r - 1.0).abs() < 1e-12));
    let two = lipschitz_sample(|p| p.scaled(2.0), &c, 0.1, 20, 1).unwrap();
    assert!(two.ratios.iter().all(|r| (r - 2.0).abs() < 1e-12));
    assert_eq!(two.histogram.iter().sum::<usize>(), 20);
    assert!(lipschitz_sample(|p| Ok(p.clone()), &c, 0.0, 20, 1).is_err());
    assert!(lipschitz_sample(|p| Ok(p.clone()), &c, 0.1, 1, 1).is_err());
}

#[test]
fn sampling_is_deterministic() {
    let c = RadiationProfile::zeros(ProfileKind::ScriMinus, 100).unwrap();
    let p = params(Nonlinearity::CubicDefocusing, 7);
    let a = lipschitz_sample(|x| scatter_profile(x, &p), &c, 0.1, 4, 11).unwrap();
    let b = lipschitz_sample(|x| scatter_profile(x, &p), &c, 0.1, 4, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.min > 0.5 && a.max < 2.0);
}

#[test]
fn linear_trace_is_bicontinuous() {
    let (n1, i1) = linear_trace_bicontinuity(100, 0.25, 8, 5).unwrap();
    let (n2, i2) = linear_trace_bicontinuity(200, 0.25, 8, 5).unwrap();
    assert!(n1 * i1 >= 1.0 && n2 * i2 >= 1.0);
    assert!((n1 * i1 - n2 * i2).abs() <= 0.2 * n2 * i2, "{} {}", n1 * i1, n2 * i2);
}
