//! Pass/fail report for the nine acceptance criteria at their pinned
//! tolerances. Exits nonzero when any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use pfc_sync::netsim::{assemble, assemble_feedback, run, simulate, zgs_invariant, zgs_optimum, Compensator, SimSettings};
use pfc_sync::passivity::{check_positive_real, estimate_ifp_index, FrequencyGrid, GridSpec};
use pfc_sync::pfc_design::{design_pfc, design_siso_pfc};
use pfc_sync::scenarios::{
    example1_config, example1_storage, example2_plant, example2_verdict, example4_config, example4_laplacian,
    pd_config, zgs_config, zgs_objectives, ScenarioOptions,
};
use pfc_sync::signed_graph::{compute_ofp_radius, ofp_certificate};
use pfc_sync::testkit::{random_balanced_signed_digraph, random_stable_siso, random_symmetric_mimo, seeded_rng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn criterion_1() -> Outcome {
    let report = design_siso_pfc(&example2_plant(), 0.0).expect("design");
    let a = report.gains[0].gain;
    let spec = GridSpec::default();
    let below = example2_verdict(1.999, &spec).expect("verdict");
    let above = example2_verdict(2.001, &spec).expect("verdict");
    let a_ok = (a - 2.0).abs() < 1e-12;
    let below_ok = !below.is_positive_real && below.margin < -1e-4;
    let above_ok = above.is_positive_real && above.margin > -1e-9;
    outcome(
        a_ok && below_ok && above_ok,
        format!(
            "a = {a:.15}; a=1.999: positive_real={} margin={:.4e} (need < -1e-4); a=2.001: positive_real={} margin={:.4e}",
            below.is_positive_real, below.margin, above.is_positive_real, above.margin
        ),
    )
}

fn criterion_2() -> Outcome {
    let plant = example2_plant();
    let grid = FrequencyGrid::for_system(&plant, &GridSpec::default()).expect("grid");
    let nu = estimate_ifp_index(&plant, &grid).expect("index");
    let worst = check_positive_real(&plant, &grid).expect("verdict").worst_frequency;
    let (oracle_nu, oracle_w) = common::siso_real_part_min(&plant, 5.0, 500_001);
    let target_w = 0.75f64.sqrt();
    let ok = (nu + 0.5).abs() <= 0.01 && ((worst - target_w) / target_w).abs() <= 0.02 && (nu - oracle_nu).abs() <= 0.01;
    outcome(
        ok,
        format!("nu = {nu:.6} (oracle {oracle_nu:.6}); worst omega = {worst:.5} (oracle {oracle_w:.5}, sqrt(0.75) = {target_w:.5})"),
    )
}

fn criterion_3() -> Outcome {
    let l = example4_laplacian();
    let r = compute_ofp_radius(&l).expect("radius");
    let cert = ofp_certificate(&l, r);
    let below = ofp_certificate(&l, r - 1e-4);
    let ok = (r - 0.5).abs() <= 1e-6 && cert >= -1e-9 && below < -1e-9;
    outcome(ok, format!("r = {r:.12}; certificate at r: {cert:.3e}; at r - 1e-4: {below:.3e}"))
}

fn criterion_4() -> Outcome {
    let settings = SimSettings::default();
    let (log0, m0) = simulate(&example4_config(Vec::new(), settings).expect("config")).expect("run");
    let initial = m0.sync_error[0];
    let grew = log0.diverged || m0.final_sync_error > 10.0 * initial;
    let identity = vec![Compensator::Static(DMatrix::identity(1, 1)); 4];
    let (log1, m1) = simulate(&example4_config(identity, settings).expect("config")).expect("run");
    let synced = !log1.diverged && m1.final_sync_error < 1e-2;
    outcome(
        grew && synced,
        format!(
            "C=0: diverged={} final sync error {:.3e} (initial {:.3e}) at t={:.2}; C=I: final sync error {:.3e}",
            log0.diverged,
            m0.final_sync_error,
            initial,
            log0.times.last().unwrap(),
            m1.final_sync_error
        ),
    )
}

fn criterion_5() -> Outcome {
    let settings = SimSettings::default();
    let with = assemble_feedback(&example1_config(true, settings).expect("config")).expect("assemble");
    let log = run(&with, &settings).expect("run");
    let norm = log.final_state().unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
    let without = assemble_feedback(&example1_config(false, settings).expect("config")).expect("assemble");
    let log0 = run(&without, &settings).expect("run");
    let audit = pfc_sync::netsim::energy_audit(&log0, Some(&example1_storage(&without)));
    let drift = audit.values.iter().map(|v| (v - audit.values[0]).abs()).fold(0.0, f64::max);
    let ok = norm < 1e-3 && drift < 1e-6;
    outcome(
        ok,
        format!("with PFC: final state norm {norm:.4e} at T=50 (need < 1e-3); without PFC: max storage drift {drift:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let fns = zgs_objectives();
    let oracle = {
        let q: f64 = fns.iter().map(|f| f.curvature).sum();
        fns.iter().map(|f| f.curvature * f.offset).sum::<f64>() / q
    };
    let mut ok = (zgs_optimum(&fns) - oracle).abs() < 1e-14 && (oracle - 10.0 / 7.0).abs() < 1e-14;
    let mut parts = Vec::new();
    for sigma in [0.1, 1.0, 10.0] {
        let cfg = zgs_config(sigma, &ScenarioOptions::default()).expect("config");
        let (log, m) = simulate(&cfg).expect("run");
        let drift = zgs_invariant(&log, &fns).expect("invariant");
        let value = log.y1.last().unwrap().iter().sum::<f64>() / 3.0;
        ok &= drift < 1e-8 && (value - oracle).abs() <= 1e-4 && m.final_sync_error <= 1e-4;
        parts.push(format!("sigma={sigma}: drift {drift:.2e}, consensus {value:.8}"));
    }
    outcome(ok, format!("{} (oracle {oracle:.8})", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let cfg = pd_config(1.0, None, SimSettings::default()).expect("config");
    let well_posed = assemble(&cfg);
    let cond = well_posed.as_ref().map(|s| s.loop_condition()).unwrap_or(f64::INFINITY);
    let (log, m) = simulate(&cfg).expect("run");
    let ok = well_posed.is_ok() && !log.diverged && m.final_sync_error < 1e-3;
    outcome(ok, format!("loop condition number {cond:.3}; final sync error {:.3e}", m.final_sync_error))
}

fn criterion_8() -> Outcome {
    let mut rng = seeded_rng();
    let spec = GridSpec::default();
    let mut worst: f64 = f64::INFINITY;
    let mut failures = 0;
    let mut plants: Vec<_> = (0..200).map(|_| random_stable_siso(&mut rng)).collect();
    plants.extend((0..50).map(|_| random_symmetric_mimo(&mut rng)));
    for plant in &plants {
        let report = design_pfc(plant, 1e-6).expect("design");
        let sum = plant.parallel(&report.total_compensator().expect("total")).expect("sum");
        let grid = FrequencyGrid::for_system(&sum, &spec).expect("grid");
        let margin = check_positive_real(&sum, &grid).expect("verdict").margin;
        worst = worst.min(margin);
        if margin < -1e-6 {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{} plants; worst compensated margin {worst:.3e}; {failures} below -1e-6", plants.len()))
}

fn criterion_9() -> Outcome {
    let mut rng = seeded_rng();
    let mut failures = 0;
    let mut max_gap: f64 = 0.0;
    let mut negative_edges = 0;
    for i in 0..100 {
        let n = 3 + i % 5;
        let g = random_balanced_signed_digraph(&mut rng, n);
        negative_edges += g.has_negative_edges() as usize;
        let l = g.laplacian();
        let r = compute_ofp_radius(&l).expect("radius");
        let feasible = common::radius_feasible(&l, r + 1e-9);
        let minimal = !common::radius_feasible(&l, r - 1e-4);
        let gap = (common::bisect_radius(&l) - r).abs();
        max_gap = max_gap.max(gap);
        if !(feasible && minimal && gap <= 1e-4) {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("100 graphs ({negative_edges} with negative edges); max |r - bisection| {max_gap:.2e}; {failures} failures"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome, u64); 9] = [
        (1, "second-order plant bound and boundary verdicts", criterion_1, 1),
        (2, "IFP index of the second-order plant", criterion_2, 1),
        (3, "OFP radius of the signed four-node Laplacian", criterion_3, 1),
        (4, "oscillator network with and without compensator", criterion_4, 30),
        (5, "cubic lossless loop with first-order compensator", criterion_5, 10),
        (6, "zero-gradient-sum flow consensus", criterion_6, 10),
        (7, "PD consensus on the signed graph", criterion_7, 10),
        (8, "randomized compensator soundness", criterion_8, 60),
        (9, "randomized OFP radius certificates", criterion_9, 30),
    ];
    let mut failed = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let passed = result.passed && in_time;
        failed += !passed as usize;
        println!(
            "criterion {id} {}: {name} ({:.2}s of {limit}s{}): {}",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", over time" },
            result.detail
        );
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
