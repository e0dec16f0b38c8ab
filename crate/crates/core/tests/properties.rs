use confscat::energy::{cylinder_slice_energy, difference_envelope, EnergyForm, StressEnergyEval};
use confscat::evolution::Nonlinearity;
use confscat::fields::{CauchyData, Grid1D, ScalarFieldGrid};
use confscat::geometry::einstein_cylinder_metric;
use confscat::harness::{ConfigFile, ExperimentConfig};
use confscat::scattering::{trace_forward, ProfileKind, RadiationProfile};
use proptest::prelude::*;

fn field(cells: usize, coeffs: &[f64]) -> ScalarFieldGrid {
    let g = Grid1D::cylinder(cells).unwrap();
    let mut values: Vec<f64> = g
        .nodes()
        .iter()
        .map(|x| coeffs.iter().enumerate().map(|(k, c)| c * ((k + 1) as f64 * x).sin()).sum())
        .collect();
    values[0] = 0.0;
    values[cells] = 0.0;
    ScalarFieldGrid::new(g, values, 0.0).unwrap()
}

fn data(cells: usize, p: &[f64], v: &[f64]) -> CauchyData {
    CauchyData::new(field(cells, p), field(cells, v)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn envelope_dominates_both_squares(u in prop::collection::vec(-10.0f64..10.0, 41), v in prop::collection::vec(-10.0f64..10.0, 41)) {
        let g = Grid1D::cylinder(40).unwrap();
        let (mut u, mut v) = (u, v);
        u[0] = 0.0; u[40] = 0.0; v[0] = 0.0; v[40] = 0.0;
        let a = ScalarFieldGrid::new(g.clone(), u.clone(), 0.0).unwrap();
        let b = ScalarFieldGrid::new(g, v.clone(), 0.0).unwrap();
        let e = difference_envelope(&a, &b).unwrap();
        for ((h, x), y) in e.values.iter().zip(&u).zip(&v) {
            prop_assert!(*h >= 0.0);
            prop_assert!(*h >= 0.75 * x * x - 1e-12 && *h >= 0.75 * y * y - 1e-12);
        }
    }

    #[test]
    fn linear_energy_is_quadratic(p in prop::collection::vec(-1.0f64..1.0, 4), v in prop::collection::vec(-1.0f64..1.0, 4), alpha in -5.0f64..5.0) {
        let d = data(60, &p, &v);
        let e = cylinder_slice_energy(&d, false).unwrap();
        let ea = cylinder_slice_energy(&d.scaled(alpha), false).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((ea - alpha * alpha * e).abs() <= 1e-10 * (1.0 + ea.abs()));
        prop_assert!(cylinder_slice_energy(&d, true).unwrap() >= e);
    }

    #[test]
    fn stress_energy_is_dominant(t in -3.0f64..3.0, chi in 0.1f64..3.0, gt in -5.0f64..5.0, gx in -5.0f64..5.0, phi in -2.0f64..2.0,
                                 a in -1.0f64..1.0, b in -1.0f64..1.0, quartic in any::<bool>()) {
        let form = if quartic { EnergyForm::WithQuartic } else { EnergyForm::Linear };
        let s = StressEnergyEval::new(einstein_cylinder_metric(), form);
        let val = s.contract([t, chi], [gt, gx], phi, [1.0, a], [1.0, b]).unwrap();
        prop_assert!(val >= -1e-12);
    }

    #[test]
    fn linear_trace_is_homogeneous(p in prop::collection::vec(-1.0f64..1.0, 3), alpha in -3.0f64..3.0) {
        let d = data(40, &p, &[0.0]);
        let t = trace_forward(&d, 0.25, Nonlinearity::Linear).unwrap();
        let ta = trace_forward(&d.scaled(alpha), 0.25, Nonlinearity::Linear).unwrap();
        let scale = t.values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (x, y) in t.values.iter().zip(&ta.values) {
            prop_assert!((alpha * x - y).abs() <= 1e-9 * scale * (1.0 + alpha.abs()));
        }
    }

    #[test]
    fn profile_norms_scale(c in prop::collection::vec(-1.0f64..1.0, 3), alpha in -4.0f64..4.0) {
        let p = RadiationProfile::from_fn(ProfileKind::ScriMinus, 64, |s| {
            c.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * 2.0 * s).cos() * s.cos()).sum()
        }).unwrap();
        let q = p.scaled(alpha).unwrap();
        prop_assert!((q.h1_norm - alpha.abs() * p.h1_norm).abs() <= 1e-10 * (1.0 + q.h1_norm));
        prop_assert!(p.combine(&p, 1.0, -1.0).unwrap().h1_norm == 0.0);
    }

    #[test]
    fn config_round_trips(half in 8usize..1000, cfl in 0.05f64..1.0, amp in 0.0f64..1.0, seed in any::<u64>(), pairs in 2usize..500) {
        let n = 2 * half;
        let text = format!(
            "[run]\nseed = {seed}\nout = results\n[grid]\nn = {n}\ncfl = {cfl}\n[data]\namplitude = {amp}\n[scatter]\nlipschitz_pairs = {pairs}\n"
        );
        let cfg = ExperimentConfig::from_file(&ConfigFile::parse(&text).unwrap()).unwrap();
        prop_assert_eq!(cfg.n, n);
        prop_assert_eq!(cfg.cfl, cfl);
        prop_assert_eq!(cfg.amplitude, amp);
        prop_assert_eq!(cfg.seed, seed);
        prop_assert_eq!(cfg.lipschitz_pairs, pairs);
        prop_assert_eq!(cfg.out.to_str(), Some("results"));
    }
}
