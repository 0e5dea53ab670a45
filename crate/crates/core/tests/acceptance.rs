//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use grp_core::dynamics::{
    accelerations, integrate_step, total_energy, JointTorques, LegParams, LegState,
};
use grp_core::experiment::{
    evaluate, evaluate_policy, sample_tasks, train, EvalReport, TargetPolicy, Trajectory,
};
use grp_core::io::{write_model, write_report, RunConfig};
use grp_core::mulnet::gradient_check_suite;
use grp_core::{responsibility_reference, GrpConfig, GrpModel, NetworkInput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{oracle_accelerations, rel_err};

const DEMO_AVG_DEG: f64 = 4.0;
const DEMO_MAX_DEG: f64 = 8.0;
const DEMO_BUDGET: Duration = Duration::from_secs(10);
const LEARNED_AVG_DEG: f64 = 7.0;
const LEARNED_MAX_DEG: f64 = 12.0;
const LEARNED_BUDGET: Duration = Duration::from_secs(15 * 60);
const HIP_PI: f64 = 0.9;
const HIP_STEP_FRACTION: f64 = 0.95;
const KNEE_PI: f64 = 0.5;
const KNEE_MIN_LAYERS: usize = 2;
const IDENTITY_TOL: f64 = 1e-12;
const SOFTMAX_TOL: f64 = 1e-12;
const GRAD_TOL: f64 = 1e-6;
const GRAD_BUDGET: Duration = Duration::from_secs(5);
const DRIFT_TOL: f64 = 1e-6;
const ORACLE_TOL: f64 = 1e-6;

struct Outcome {
    passed: usize,
    failed: Vec<u32>,
}

impl Outcome {
    fn record(&mut self, id: u32, ok: bool, line: String) {
        println!(
            "criterion {id:>2} {} {line}",
            if ok { "PASS" } else { "FAIL" }
        );
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id);
        }
    }

    fn info(&self, id: u32, line: String) {
        println!("criterion {id:>2} INFO {line}");
    }
}

struct Trained {
    hip: GrpModel,
    knee: GrpModel,
    report: EvalReport,
    trajs: Vec<Trajectory>,
    elapsed: Duration,
}

fn train_and_evaluate(cfg: &RunConfig) -> Trained {
    let start = Instant::now();
    let demos = sample_tasks(
        &cfg.ranges,
        cfg.training.demo_count,
        cfg.seeds.demo,
        &cfg.sim.params,
    )
    .expect("demo tasks");
    let mut hip = GrpModel::init(cfg.hip_config()).expect("hip model");
    let mut knee = GrpModel::init(cfg.knee_config()).expect("knee model");
    train(&mut hip, &mut knee, &demos, cfg.training.episodes, &cfg.sim).expect("training");
    let tasks = sample_tasks(
        &cfg.ranges,
        cfg.evaluation.trajectories,
        cfg.seeds.eval,
        &cfg.sim.params,
    )
    .expect("eval tasks");
    let (report, trajs) = evaluate(
        &hip,
        &knee,
        &tasks,
        &cfg.sim,
        cfg.evaluation.activity_threshold,
    )
    .expect("evaluation");
    Trained {
        hip,
        knee,
        report,
        trajs,
        elapsed: start.elapsed(),
    }
}

fn demo_fidelity(out: &mut Outcome) {
    let cfg = RunConfig::default();
    let start = Instant::now();
    let tasks = sample_tasks(&cfg.ranges, 20, cfg.seeds.demo, &cfg.sim.params).expect("tasks");
    let (results, _) = evaluate_policy(&tasks, &cfg.sim, TargetPolicy::default).expect("demo");
    let elapsed = start.elapsed();
    let report = EvalReport::from_results(results, cfg.evaluation.activity_threshold, vec![]);
    let ok = report.average_error_deg <= DEMO_AVG_DEG
        && report.max_error_deg <= DEMO_MAX_DEG
        && report.timeouts == 0
        && elapsed < DEMO_BUDGET;
    out.record(
        1,
        ok,
        format!(
            "demonstrator landing error avg {:.3} deg (<= {DEMO_AVG_DEG}), max {:.3} deg (<= {DEMO_MAX_DEG}), {} timeouts, {:.2?} (< {:?})",
            report.average_error_deg, report.max_error_deg, report.timeouts, elapsed, DEMO_BUDGET
        ),
    );
}

fn learned_fidelity(out: &mut Outcome, run: &Trained) {
    let r = &run.report;
    let ok = r.average_error_deg <= LEARNED_AVG_DEG
        && r.max_error_deg <= LEARNED_MAX_DEG
        && run.elapsed < LEARNED_BUDGET;
    out.record(
        2,
        ok,
        format!(
            "learned landing error avg {:.3} deg (<= {LEARNED_AVG_DEG}), max {:.3} deg (<= {LEARNED_MAX_DEG}), {} timeouts, {} diverged, {:.1?} (< {:?})",
            r.average_error_deg, r.max_error_deg, r.timeouts, r.diverged, run.elapsed, LEARNED_BUDGET
        ),
    );
}

/// Runaway swings end at astronomically large angles; keep them readable.
fn short(v: f64) -> String {
    if v.abs() < 1e4 {
        format!("{v:.1}")
    } else {
        format!("{v:.1e}")
    }
}

/// Learned fidelity over alternative seed sets; reported only, the asserted
/// result is the default seeds above.
fn seed_robustness(out: &mut Outcome) {
    let mut within = 0;
    let mut cells = Vec::new();
    for set in 1..=8u64 {
        let mut cfg = RunConfig::default();
        cfg.seeds.demo = set;
        cfg.seeds.init = set * 10 + 1;
        cfg.seeds.eval = set + 100;
        let r = train_and_evaluate(&cfg).report;
        if r.average_error_deg <= LEARNED_AVG_DEG && r.max_error_deg <= LEARNED_MAX_DEG {
            within += 1;
        }
        cells.push(format!(
            "{}/{}",
            short(r.average_error_deg),
            short(r.max_error_deg)
        ));
    }
    out.info(
        2,
        format!(
            "alternative seed sets within tolerance: {within}/8 (avg/max deg: {})",
            cells.join(" ")
        ),
    );
}

fn hip_fraction(traj: &Trajectory) -> f64 {
    let above = traj
        .rows
        .iter()
        .filter(|row| row.layers[0].pi[0] > HIP_PI)
        .count();
    above as f64 / traj.rows.len().max(1) as f64
}

fn hip_responsibility(out: &mut Outcome, run: &Trained) {
    let first = hip_fraction(&run.trajs[0]);
    let worst = run.trajs.iter().map(hip_fraction).fold(1.0, f64::min);
    out.record(
        3,
        first >= HIP_STEP_FRACTION,
        format!(
            "hip pi > {HIP_PI} on {:.1}% of steps of test swing 0 (>= {:.0}%); worst over {} swings {:.1}%",
            100.0 * first,
            100.0 * HIP_STEP_FRACTION,
            run.trajs.len(),
            100.0 * worst
        ),
    );
}

fn knee_layers_above(traj: &Trajectory) -> Vec<usize> {
    let m = traj.models[1].m;
    (0..m)
        .filter(|&k| traj.rows.iter().any(|row| row.layers[1].pi[k] > KNEE_PI))
        .map(|k| k + 1)
        .collect()
}

fn knee_switching(out: &mut Outcome, run: &Trained) {
    let first = knee_layers_above(&run.trajs[0]);
    let swings_ok = run
        .trajs
        .iter()
        .filter(|t| knee_layers_above(t).len() >= KNEE_MIN_LAYERS)
        .count();
    out.record(
        4,
        first.len() >= KNEE_MIN_LAYERS,
        format!(
            "knee layers reaching pi > {KNEE_PI} in test swing 0: {first:?} (need >= {KNEE_MIN_LAYERS}); {swings_ok}/{} swings switch",
            run.trajs.len()
        ),
    );
}

fn automatic_selection(out: &mut Outcome) {
    for m in [5, 7] {
        let mut cfg = RunConfig::default();
        cfg.knee.m = m;
        let run = train_and_evaluate(&cfg);
        let knee = &run.report.models[1];
        let peaks: Vec<String> = knee
            .peak_responsibility
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect();
        out.info(
            5,
            format!(
                "knee m = {m}: {} active generators (peak pi > {}), peaks [{}], landing avg {:.3} deg max {:.3} deg, {:.1?}",
                knee.active_generators,
                run.report.activity_threshold,
                peaks.join(", "),
                run.report.average_error_deg,
                run.report.max_error_deg,
                run.elapsed
            ),
        );
    }
}

fn output_identity(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for trial in 0..1000 {
        let mut model = GrpModel::init(GrpConfig {
            m: rng.gen_range(1..=7),
            init_scale: rng.gen_range(0.01..1.0),
            seed: trial,
            ..GrpConfig::default()
        })
        .expect("model");
        model.gamma = 10f64.powf(rng.gen_range(-3.0..6.0));
        let x = NetworkInput(std::array::from_fn(|_| rng.gen_range(0.0..3.0)));
        let r_g = rng.gen_range(-200.0..200.0);
        worst = worst.max((model.total_output_identity(&x, r_g) - r_g).abs());
    }
    out.record(
        6,
        worst < IDENTITY_TOL,
        format!("|G_total - r_G| max {worst:.3e} over 1000 triples (< {IDENTITY_TOL:e})"),
    );
}

fn softmax_properties(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_sum = 0.0f64;
    let mut argmin_ok = true;
    let mut worst_tie = 0.0f64;
    for _ in 0..2000 {
        let m = rng.gen_range(1..=7);
        let errors: Vec<f64> = (0..m).map(|_| rng.gen_range(-300.0..300.0)).collect();
        let gamma = 10f64.powf(rng.gen_range(-6.0..300.0));
        let r = responsibility_reference(&errors, gamma);
        worst_sum = worst_sum.max((r.iter().sum::<f64>() - 1.0).abs());
        let best = (0..m)
            .min_by(|&a, &b| errors[a].abs().total_cmp(&errors[b].abs()))
            .unwrap();
        argmin_ok &= r.iter().all(|v| *v <= r[best]);

        let e = rng.gen_range(-100.0..100.0);
        let tied: Vec<f64> = (0..m).map(|k| if k % 2 == 0 { e } else { -e }).collect();
        for v in responsibility_reference(&tied, gamma) {
            worst_tie = worst_tie.max((v - 1.0 / m as f64).abs());
        }
    }
    out.record(
        7,
        worst_sum < SOFTMAX_TOL && worst_tie < SOFTMAX_TOL && argmin_ok,
        format!(
            "softmax sum error {worst_sum:.3e}, tie deviation {worst_tie:.3e} (< {SOFTMAX_TOL:e}), argmin gets max: {argmin_ok}"
        ),
    );
}

fn gradient_exactness(out: &mut Outcome) {
    let start = Instant::now();
    let worst = gradient_check_suite(100, 8, 1e-6);
    let elapsed = start.elapsed();
    out.record(
        8,
        worst < GRAD_TOL && elapsed < GRAD_BUDGET,
        format!(
            "gradient vs central differences max relative error {worst:.3e} over 100 instances (< {GRAD_TOL:e}), {elapsed:.2?} (< {GRAD_BUDGET:?})"
        ),
    );
}

fn dynamics_oracles(out: &mut Outcome) {
    let p = LegParams::default();
    let start = LegState {
        phi_h: 220f64.to_radians(),
        phi_k: 175f64.to_radians(),
        phi_h_dot: -2.0,
        phi_k_dot: -4.0,
        t: 0.0,
    };
    let e0 = total_energy(&start, &p);
    let mut s = start;
    let mut drift = 0.0f64;
    for _ in 0..2000 {
        s = integrate_step(&s, &JointTorques::ZERO, &p, 1e-3).expect("step");
        drift = drift.max((total_energy(&s, &p) - e0).abs() / e0.abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = LegState {
            phi_h: rng.gen_range(2.0..4.8),
            phi_k: rng.gen_range(0.3..PI),
            phi_h_dot: rng.gen_range(-10.0..10.0),
            phi_k_dot: rng.gen_range(-25.0..25.0),
            t: 0.0,
        };
        let tau = JointTorques::new(rng.gen_range(-150.0..150.0), rng.gen_range(-100.0..100.0));
        let (ah, ak) = accelerations(&s, &tau, &p).expect("accelerations");
        let (oh, ok) = oracle_accelerations(&s, &tau, &p);
        worst = worst.max(rel_err(ah, oh)).max(rel_err(ak, ok));
    }

    let (eh, ek) =
        accelerations(&LegState::at_rest(PI, PI), &JointTorques::ZERO, &p).expect("rest");
    let horizontal = accelerations(&LegState::at_rest(FRAC_PI_2, PI), &JointTorques::ZERO, &p)
        .expect("horizontal");
    out.record(
        9,
        drift < DRIFT_TOL && worst < ORACLE_TOL && eh == 0.0 && ek == 0.0 && horizontal.0 != 0.0,
        format!(
            "passive energy drift {drift:.3e} over 2 s (< {DRIFT_TOL:e}), oracle relative error {worst:.3e} on 100 states (< {ORACLE_TOL:e}), hanging accelerations ({eh:e}, {ek:e})"
        ),
    );
}

fn serialized(run: &Trained) -> Vec<Vec<u8>> {
    let dir = tempfile::tempdir().expect("tempdir");
    write_model(&dir.path().join("hip.json"), &run.hip).expect("hip");
    write_model(&dir.path().join("knee.json"), &run.knee).expect("knee");
    write_report(&dir.path().join("report.json"), &run.report).expect("report");
    ["hip.json", "knee.json", "report.json"]
        .iter()
        .map(|name| std::fs::read(dir.path().join(name)).expect("read back"))
        .collect()
}

fn determinism(out: &mut Outcome, first: &Trained) {
    let second = train_and_evaluate(&RunConfig::default());
    let a = serialized(first);
    let b = serialized(&second);
    let same = a == b;
    let bytes: usize = a.iter().map(Vec::len).sum();
    out.record(
        10,
        same,
        format!("two default runs give byte-identical hip.json, knee.json and report.json ({bytes} bytes): {same}"),
    );
}

fn main() {
    // `cargo test -- --list` and similar harness probes expect no work
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut out = Outcome {
        passed: 0,
        failed: Vec::new(),
    };
    demo_fidelity(&mut out);
    let run = train_and_evaluate(&RunConfig::default());
    learned_fidelity(&mut out, &run);
    seed_robustness(&mut out);
    hip_responsibility(&mut out, &run);
    knee_switching(&mut out, &run);
    automatic_selection(&mut out);
    output_identity(&mut out);
    softmax_properties(&mut out);
    gradient_exactness(&mut out);
    dynamics_oracles(&mut out);
    determinism(&mut out, &run);
    println!(
        "acceptance: {} passed, {} failed {:?}",
        out.passed,
        out.failed.len(),
        out.failed
    );
    if !out.failed.is_empty() {
        std::process::exit(1);
    }
}
