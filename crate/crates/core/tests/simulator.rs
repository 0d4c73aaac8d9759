mod common;

use proptest::prelude::*;
use tms_core::assess::assess_all;
use tms_core::batch::{simulate_batch, RunKey, SimSettings};
use tms_core::domain::{ComponentId, ModeCatalog};
use tms_core::exec::Exec;
use tms_core::metrics::total_energy;
use tms_core::preprocess::DirectedArch;
use tms_core::thermalsim::{
    heat_loads, run_dynamic_test, run_fixed_test, simulate, step, DriveCycle, PlantParams, Scenario, StepInputs,
    ThermalState, Wiring,
};

fn archs() -> Vec<&'static DirectedArch> {
    common::reference().architectures.iter().map(|a| &a.directed).collect()
}

#[test]
fn every_run_conserves_energy() {
    let catalog = ModeCatalog::standard();
    let params = PlantParams::default();
    let cycle = DriveCycle::bundled(1);
    let s = SimSettings { catalog: &catalog, params: &params, cycle: &cycle, repeats: 3, dt: 0.1 };
    for (runs, a) in simulate_batch(&archs(), &RunKey::protocol(), &s, Exec::Parallel).iter().zip(archs()) {
        assert_eq!(runs.len(), 13);
        for (key, out) in runs {
            let out = out.as_ref().unwrap_or_else(|e| panic!("{key:?}: {e}"));
            assert!(out.energy_residual() <= 0.01, "{key:?} residual {}", out.energy_residual());
            let n = out.len() - 1;
            assert!(out.p_compressor.iter().chain(out.p_pump.iter().flatten()).all(|&p| p >= 0.0));
            assert_eq!(out.time[n], if *key == RunKey::Dynamic { 1800.0 } else { 600.0 });
        }
        let _ = a;
    }
}

/// Heat bookkeeping against a run at a quarter of the step.
#[test]
fn stored_energy_matches_fine_reference() {
    let catalog = ModeCatalog::standard();
    let d = archs()[0];
    let wiring = Wiring::from_directed(d, &assess_all(d, &catalog).unwrap());
    let params = PlantParams::default();
    let coarse = simulate(&wiring, &catalog, &params, &Scenario::fixed(1, DriveCycle::bundled(1)).unwrap()).unwrap();
    let fine =
        simulate(&wiring, &catalog, &params, &Scenario::fixed(1, DriveCycle::bundled(1)).unwrap().with_dt(0.025))
            .unwrap();
    let gain = |o: &tms_core::thermalsim::SimOutput| o.stored.last().unwrap() - o.stored[0];
    let net_fine = fine.energy_in.last().unwrap() - fine.energy_out.last().unwrap();
    let throughput = fine.energy_in.last().unwrap() + fine.energy_out.last().unwrap();
    assert!((gain(&coarse) - net_fine).abs() <= 0.01 * throughput);
}

#[test]
fn halving_the_step_barely_moves_the_drive() {
    let catalog = ModeCatalog::standard();
    let params = PlantParams::default();
    for d in archs() {
        let wiring = Wiring::from_directed(d, &assess_all(d, &catalog).unwrap());
        let sc = Scenario::dynamic(DriveCycle::bundled(3));
        let a = simulate(&wiring, &catalog, &params, &sc).unwrap();
        let b = simulate(&wiring, &catalog, &params, &sc.clone().with_dt(0.05)).unwrap();
        let (n, m) = (a.len() - 1, b.len() - 1);
        for (x, y) in [(a.t_cabin[n], b.t_cabin[m]), (a.t_battery[n], b.t_battery[m]), (a.t_dt[n], b.t_dt[m])] {
            assert!((x - y).abs() < 0.05, "{x} vs {y}");
        }
    }
}

#[test]
fn reruns_are_bit_identical() {
    let catalog = ModeCatalog::standard();
    let params = PlantParams::default();
    let cycle = DriveCycle::bundled(1);
    let s = SimSettings { catalog: &catalog, params: &params, cycle: &cycle, repeats: 3, dt: 0.1 };
    let some: Vec<_> = archs().into_iter().take(3).collect();
    let a = simulate_batch(&some, &RunKey::protocol(), &s, Exec::Sequential);
    let b = simulate_batch(&some, &RunKey::protocol(), &s, Exec::Parallel);
    for (x, y) in a.iter().zip(&b) {
        for (k, out) in x {
            assert_eq!(out.as_ref().unwrap(), y[k].as_ref().unwrap());
        }
    }
}

#[test]
fn cold_start_follows_the_heating_sequence() {
    let catalog = ModeCatalog::standard();
    let params = PlantParams::default();
    for d in archs() {
        let out = run_dynamic_test(d, &catalog, &params, &DriveCycle::bundled(3)).unwrap();
        assert_eq!(out.mode_trace(), vec![1, 2, 6]);
        assert!(out.t_cabin.iter().any(|&t| t > 291.0));
        let switches = out.switch_times();
        assert!(switches.windows(2).all(|w| w[1] - w[0] >= params.dwell_time));
        assert!(switches[0] >= params.dwell_time);
    }
}

#[test]
fn fixed_protocol_edges() {
    let catalog = ModeCatalog::standard();
    let d = archs()[0];
    let err = run_fixed_test(d, 7, &catalog, &PlantParams::default(), &DriveCycle::bundled(1)).unwrap_err();
    assert!(err.to_string().contains("mode 7"));
    let out = run_fixed_test(d, 8, &catalog, &PlantParams::default(), &DriveCycle::bundled(1)).unwrap();
    assert!((out.t_dt[0] - 324.15).abs() < 1e-9);
    assert!(out.mode.iter().all(|&m| m == 8));
}

#[test]
fn dead_branches_cost_energy_only_when_they_leak() {
    let catalog = ModeCatalog::standard();
    let cycle = DriveCycle::bundled(1);
    for d in archs() {
        let v = common::lcc_bypass(d, &catalog);
        assert!(assess_all(&v, &catalog).unwrap().all_pass());
        assert!(common::lcc_dead_junctions(&v, &catalog) > common::lcc_dead_junctions(d, &catalog));
        for (leak, strict) in [(0.02, true), (0.0, false)] {
            let p = PlantParams { junction_leak: leak, ..PlantParams::default() };
            let base = total_energy(&run_fixed_test(d, 2, &catalog, &p, &cycle).unwrap()).unwrap();
            let more = total_energy(&run_fixed_test(&v, 2, &catalog, &p, &cycle).unwrap()).unwrap();
            if strict {
                assert!(more >= base, "{more} < {base}");
            } else {
                assert!((more - base).abs() <= 1e-9 * base);
            }
        }
    }
}

#[test]
fn leak_never_helps_a_heating_test() {
    let catalog = ModeCatalog::standard();
    let cycle = DriveCycle::bundled(1);
    let params = PlantParams::default();
    for mode in [1, 2, 3, 4, 5, 6] {
        let mut prev = 0.0;
        for extra in 0..5 {
            let mut w = Wiring::ideal(&catalog);
            for l in &mut w.modes.get_mut(&mode).unwrap().loops {
                if l.components.contains(&ComponentId::Lcc) {
                    l.unused_junctions = extra;
                }
            }
            let sc = Scenario::fixed(mode, cycle.clone()).unwrap();
            let e = total_energy(&simulate(&w, &catalog, &params, &sc).unwrap()).unwrap();
            assert!(e >= prev, "mode {mode}: {extra} dead branches use {e} < {prev}");
            prev = e;
        }
    }
}

fn uniform(t: f64, mode: u8) -> ThermalState {
    ThermalState {
        time: 0.0,
        t_cabin: t,
        t_battery: t,
        t_dt: t,
        coolant: [t; 7],
        integral: 0.0,
        mode,
        mode_since: 0.0,
        energy_in: 0.0,
        energy_out: 0.0,
    }
}

proptest! {
    #[test]
    fn idle_uniform_plant_stays_put(t in 240.0f64..330.0, mode in prop::sample::select(vec![1u8, 2, 3, 4, 5, 6, 8, 9, 10, 11, 12, 13])) {
        let catalog = ModeCatalog::standard();
        let w = Wiring::ideal(&catalog);
        let p = PlantParams { passenger_load: 0.0, ..PlantParams::default() };
        let zero = |_: f64| (0.0, 0.0);
        let inp = StepInputs { ambient: t, p_compressor: 0.0, loads: &zero };
        let mut s = uniform(t, mode);
        for _ in 0..50 {
            s = step(&s, 0.1, w.mode(mode).unwrap(), &p, &inp);
        }
        prop_assert!((s.t_cabin - t).abs() < 1e-9 && (s.t_battery - t).abs() < 1e-9 && (s.t_dt - t).abs() < 1e-9);
    }

    #[test]
    fn loads_scale_with_speed_squared(k in 1.0f64..3.0, at in 0.0f64..600.0) {
        let p = PlantParams::default();
        let slow = DriveCycle::new(vec![0.0, 600.0], vec![5.0, 10.0], 1).unwrap();
        let fast = DriveCycle::new(vec![0.0, 600.0], vec![5.0 * k, 10.0 * k], 1).unwrap();
        let (b1, d1) = heat_loads(&slow, at, &p, false);
        let (b2, d2) = heat_loads(&fast, at, &p, false);
        prop_assert!((b2 / b1 - k * k).abs() < 1e-9);
        prop_assert!((d2 / d1 - k * k).abs() < 1e-9);
    }
}
