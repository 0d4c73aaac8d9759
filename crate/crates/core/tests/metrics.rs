use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tms_core::metrics::{
    check_front, comfort_temperature, first_crossing, pareto_front, performance_objective, total_energy, trapezoid,
};
use tms_core::thermalsim::SimOutput;

/// Pairwise dominance scan.
fn oracle(points: &[(f64, f64)]) -> Vec<bool> {
    points.iter().map(|&p| !points.iter().any(|&q| q.0 <= p.0 && q.1 <= p.1 && (q.0 < p.0 || q.1 < p.1))).collect()
}

fn powered(time: Vec<f64>, comp: Vec<f64>) -> SimOutput {
    let zeros = vec![0.0; time.len()];
    SimOutput {
        p_pump: [zeros.clone(), zeros.clone(), zeros.clone(), zeros],
        p_compressor: comp,
        time,
        ..SimOutput::default()
    }
}

#[test]
fn ramp_integral_is_exact() {
    for (n, a, b) in [(2usize, 3.0, 1.5), (1001, 0.25, -40.0), (18001, 1200.0, 7.0)] {
        let h = 1800.0 / (n - 1) as f64;
        let time: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        let values: Vec<f64> = time.iter().map(|t| a * t + b).collect();
        let tf = time[n - 1];
        let exact = 0.5 * a * tf * tf + b * tf;
        let got = trapezoid(&time, &values).unwrap();
        assert!((got - exact).abs() <= 1e-9 * exact.abs(), "{got} vs {exact}");
    }
}

#[test]
fn pareto_matches_dominance_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut members = 0;
    for _ in 0..1000 {
        // Integer complexities and a coarse performance grid give plenty of ties.
        let pts: Vec<(f64, f64)> =
            (0..200).map(|_| (rng.gen_range(0..40) as f64, rng.gen_range(0..60) as f64 / 20.0)).collect();
        let got = pareto_front(&pts);
        assert_eq!(got, oracle(&pts));
        check_front(&pts, &got).unwrap();
        members += got.iter().filter(|&&m| m).count();
    }
    assert!(members > 1000);
}

#[test]
fn edge_fronts() {
    assert_eq!(pareto_front(&[]), Vec::<bool>::new());
    assert_eq!(pareto_front(&[(4.0, 1.0)]), vec![true]);
    assert_eq!(pareto_front(&[(1.0, 2.0), (2.0, 1.0), (2.0, 2.0)]), vec![true, true, false]);
    assert_eq!(pareto_front(&[(1.0, 1.0), (1.0, 1.0), (1.0, 1.5)]), vec![true, true, false]);
    assert!(check_front(&[(1.0, 1.0), (2.0, 2.0)], &[true, true]).is_err());
}

#[test]
fn comfort_and_objective_values() {
    assert!((comfort_temperature(293.0, 273.0) - 291.0).abs() < 1e-12);
    let v = performance_objective(&[(5.0, Some(300.0)), (2.0, Some(100.0)), (1.0, Some(600.0))]).unwrap();
    assert!((v[1] - (0.4 + 1.0 / 6.0)).abs() < 1e-12);
    let v = performance_objective(&[(5.0, Some(600.0)), (2.0, Some(100.0))]).unwrap();
    assert_eq!(v[0], 2.0);
    let err = performance_objective(&[(5.0, Some(600.0)), (2.0, None)]).unwrap_err();
    assert!(err.to_string().contains("[1]"));
}

fn objective_points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1.0f64..1e7, 1.0f64..1800.0), 1..30)
}

proptest! {
    #[test]
    fn objective_ignores_energy_units(pts in objective_points(), k in 1e-3f64..1e3, cx in prop::collection::vec(0usize..40, 30)) {
        let base: Vec<_> = pts.iter().map(|&(e, h)| (e, Some(h))).collect();
        let scaled: Vec<_> = pts.iter().map(|&(e, h)| (e * k, Some(h))).collect();
        let a = performance_objective(&base).unwrap();
        let b = performance_objective(&scaled).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        // Fronts computed from either agree, up to rounding of equal values.
        let fa: Vec<_> = a.iter().zip(&cx).map(|(p, &c)| (c as f64, (p * 1e9).round())).collect();
        let fb: Vec<_> = b.iter().zip(&cx).map(|(p, &c)| (c as f64, (p * 1e9).round())).collect();
        prop_assert_eq!(pareto_front(&fa), pareto_front(&fb));
    }

    #[test]
    fn heat_time_grows_with_threshold(temps in prop::collection::vec(270.0f64..300.0, 2..60), lo in 270.0f64..300.0, step in 0.0f64..10.0) {
        let time: Vec<f64> = (0..temps.len()).map(|k| k as f64 * 0.5).collect();
        let a = first_crossing(&time, &temps, lo);
        let b = first_crossing(&time, &temps, lo + step);
        if let Some(b) = b {
            prop_assert!(a.unwrap() <= b + 1e-9);
        }
    }

    #[test]
    fn energy_adds_over_a_shared_sample(p in prop::collection::vec(0.0f64..5000.0, 3..80), cut in 1usize..79) {
        let cut = cut.min(p.len() - 2);
        let time: Vec<f64> = (0..p.len()).map(|k| k as f64 * 0.1).collect();
        let whole = total_energy(&powered(time.clone(), p.clone())).unwrap();
        let first = total_energy(&powered(time[..=cut].to_vec(), p[..=cut].to_vec())).unwrap();
        let second = total_energy(&powered(time[cut..].to_vec(), p[cut..].to_vec())).unwrap();
        prop_assert!((whole - first - second).abs() <= 1e-9 * whole.max(1.0));
    }
}
