//! Demonstrations, online training and reference-free evaluation.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{control_step, ControllerGains, ControllerState, Phase, SwingTask};
use crate::dynamics::{
    kinematics, plant_step, JointTorques, KinematicSnapshot, LegParams, LegState,
};
use crate::error::{Error, Result};
use crate::grp::{responsibility_reference, GrpModel};
use crate::mulnet::{split_input, NetworkInput, SensoryInput, WeightMatrix};

/// Ranges for the randomised part of each swing, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleRanges {
    pub alpha_tgt: [f64; 2],
    pub phi_h_dot0: [f64; 2],
    pub phi_k_dot0: [f64; 2],
    pub phi_h0: f64,
    pub phi_k0: f64,
}

impl Default for SampleRanges {
    fn default() -> Self {
        Self {
            alpha_tgt: [50f64.to_radians(), 85f64.to_radians()],
            phi_h_dot0: [-4.0, 0.0],
            phi_k_dot0: [-7.0, -1.0],
            phi_h0: 220f64.to_radians(),
            phi_k0: 175f64.to_radians(),
        }
    }
}

impl SampleRanges {
    pub fn validate(&self) -> Result<()> {
        for (key, [lo, hi]) in [
            ("alpha_tgt", self.alpha_tgt),
            ("phi_h_dot0", self.phi_h_dot0),
            ("phi_k_dot0", self.phi_k_dot0),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(key, "range must be finite and ordered"));
            }
        }
        if !(self.phi_k0 > 0.0 && self.phi_k0 <= std::f64::consts::PI) {
            return Err(Error::config("phi_k0", "knee angle must lie in (0, pi]"));
        }
        if !self.phi_h0.is_finite() {
            return Err(Error::config("phi_h0", "must be finite"));
        }
        Ok(())
    }
}

/// Plant and episode settings shared by every rollout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub params: LegParams,
    pub gains: ControllerGains,
    pub dt: f64,
    pub timeout: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: LegParams::default(),
            gains: ControllerGains::default(),
            dt: 1e-3,
            timeout: 2.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.gains.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("dt", "must be strictly positive"));
        }
        if !(self.timeout.is_finite() && self.timeout > self.dt) {
            return Err(Error::config("timeout", "must exceed dt"));
        }
        Ok(())
    }

    fn max_steps(&self) -> usize {
        (self.timeout / self.dt).round() as usize
    }
}

/// One swing: the task and the state it starts from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemoTask {
    pub task: SwingTask,
    pub init: LegState,
}

pub fn sample_tasks(
    ranges: &SampleRanges,
    n: usize,
    seed: u64,
    params: &LegParams,
) -> Result<Vec<DemoTask>> {
    if n == 0 {
        return Err(Error::config("n", "need at least one task"));
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = Uniform::new_inclusive(ranges.alpha_tgt[0], ranges.alpha_tgt[1]);
    let hip = Uniform::new_inclusive(ranges.phi_h_dot0[0], ranges.phi_h_dot0[1]);
    let knee = Uniform::new_inclusive(ranges.phi_k_dot0[0], ranges.phi_k_dot0[1]);
    Ok((0..n)
        .map(|_| {
            let alpha_tgt = target.sample(&mut rng);
            let init = LegState {
                phi_h: ranges.phi_h0,
                phi_k: ranges.phi_k0,
                phi_h_dot: hip.sample(&mut rng),
                phi_k_dot: knee.sample(&mut rng),
                t: 0.0,
            };
            // ground level is the foot height of the starting pose
            let ground_y = kinematics(&init, params).foot_y;
            DemoTask {
                task: SwingTask::new(alpha_tgt, ground_y),
                init,
            }
        })
        .collect())
}

pub fn sensory_input(state: &LegState, kin: &KinematicSnapshot, task: &SwingTask) -> SensoryInput {
    SensoryInput {
        alpha_err: kin.alpha - task.alpha_tgt,
        phi_h: state.phi_h,
        phi_h_dot: state.phi_h_dot,
        phi_k: state.phi_k,
        phi_k_dot: state.phi_k_dot,
    }
}

/// Per-layer values of one model at one step.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerTrace {
    pub g: Vec<f64>,
    pub pi: Vec<f64>,
    pub r: Vec<f64>,
}

impl LayerTrace {
    pub fn m(&self) -> usize {
        self.g.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub state: LegState,
    pub kin: KinematicSnapshot,
    pub torques: JointTorques,
    pub phase: Phase,
    pub contact: bool,
    /// One entry per model listed in `Trajectory::models`.
    pub layers: Vec<LayerTrace>,
}

/// Name and layer count of a model whose per-layer values are recorded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelColumns {
    pub name: String,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub models: Vec<ModelColumns>,
    pub rows: Vec<TrajectoryRow>,
    /// The plant failed to integrate after the last row.
    pub diverged: bool,
}

impl Trajectory {
    pub fn last(&self) -> Option<&TrajectoryRow> {
        self.rows.last()
    }

    pub fn alpha_end(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.kin.alpha)
    }

    pub fn contact(&self) -> bool {
        self.rows.last().is_some_and(|r| r.contact)
    }

    pub fn phases(&self) -> Vec<Phase> {
        let mut seen: Vec<Phase> = Vec::new();
        for row in &self.rows {
            if seen.last() != Some(&row.phase) {
                seen.push(row.phase);
            }
        }
        seen
    }
}

/// Something that produces joint torques from the plant state.
pub trait Policy {
    /// Layer columns this policy records, if any.
    fn models(&self) -> Vec<ModelColumns> {
        Vec::new()
    }

    fn act(&mut self, state: &LegState, task: &SwingTask, sim: &SimConfig) -> Action;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub torques: JointTorques,
    pub kin: KinematicSnapshot,
    pub ctrl: ControllerState,
    pub layers: Vec<LayerTrace>,
}

/// The demonstration controller.
#[derive(Debug, Clone, Default)]
pub struct TargetPolicy {
    ctrl: ControllerState,
}

impl Policy for TargetPolicy {
    fn act(&mut self, state: &LegState, task: &SwingTask, sim: &SimConfig) -> Action {
        let out = control_step(state, self.ctrl, task, &sim.gains, &sim.params);
        self.ctrl = out.ctrl;
        Action {
            torques: out.torques,
            kin: out.kin,
            ctrl: out.ctrl,
            layers: Vec::new(),
        }
    }
}

/// Drives the plant with the learned outputs only.
///
/// The demonstration controller still runs alongside as an observer: its
/// phase logic decides contact, and its torques are used to fill the
/// reference-responsibility columns. Its torques never reach the plant.
#[derive(Debug, Clone)]
pub struct GrpPolicy<'a> {
    hip: &'a GrpModel,
    knee: &'a GrpModel,
    observer: ControllerState,
}

impl<'a> GrpPolicy<'a> {
    pub fn new(hip: &'a GrpModel, knee: &'a GrpModel) -> Self {
        Self {
            hip,
            knee,
            observer: ControllerState::default(),
        }
    }
}

fn trace_against(model: &GrpModel, x: &NetworkInput, reference: f64) -> (f64, LayerTrace) {
    let fwd = model.forward(x);
    let e_g: Vec<f64> = fwd.g.iter().map(|g| reference - g).collect();
    let r = responsibility_reference(&e_g, model.gamma);
    (
        fwd.tau_out,
        LayerTrace {
            g: fwd.g,
            pi: fwd.pi,
            r,
        },
    )
}

impl Policy for GrpPolicy<'_> {
    fn models(&self) -> Vec<ModelColumns> {
        vec![
            ModelColumns {
                name: "hip".into(),
                m: self.hip.m(),
            },
            ModelColumns {
                name: "knee".into(),
                m: self.knee.m(),
            },
        ]
    }

    fn act(&mut self, state: &LegState, task: &SwingTask, sim: &SimConfig) -> Action {
        let reference = control_step(state, self.observer, task, &sim.gains, &sim.params);
        self.observer = reference.ctrl;
        let x = split_input(&sensory_input(state, &reference.kin, task));
        let (tau_h, hip) = trace_against(self.hip, &x, reference.torques.tau_h);
        let (tau_k, knee) = trace_against(self.knee, &x, reference.torques.tau_k);
        Action {
            torques: JointTorques::new(tau_h, tau_k),
            kin: reference.kin,
            ctrl: reference.ctrl,
            layers: vec![hip, knee],
        }
    }
}

/// Rolls the plant under `policy` until contact or timeout. `observe` sees
/// every recorded row before the plant advances.
pub fn simulate<P, F>(
    demo: &DemoTask,
    sim: &SimConfig,
    policy: &mut P,
    mut observe: F,
) -> Result<Trajectory>
where
    P: Policy + ?Sized,
    F: FnMut(&TrajectoryRow) -> Result<()>,
{
    let mut traj = Trajectory {
        models: policy.models(),
        rows: Vec::with_capacity(sim.max_steps() + 1),
        diverged: false,
    };
    let mut state = demo.init;
    for step in 0..=sim.max_steps() {
        let action = policy.act(&state, &demo.task, sim);
        let row = TrajectoryRow {
            state,
            kin: action.kin,
            torques: action.torques,
            phase: action.ctrl.phase,
            contact: action.ctrl.contact,
            layers: action.layers,
        };
        observe(&row)?;
        let done = row.contact || step == sim.max_steps();
        traj.rows.push(row);
        if done {
            break;
        }
        state = match plant_step(&state, &action.torques, &sim.params, sim.dt) {
            Ok(next) => next,
            Err(Error::Integration(_) | Error::Internal(_)) => {
                traj.diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        // keep the clock on the integer grid so row times never drift
        state.t = (step + 1) as f64 * sim.dt;
    }
    Ok(traj)
}

pub fn run_demo_episode(demo: &DemoTask, sim: &SimConfig) -> Result<Trajectory> {
    let traj = simulate(demo, sim, &mut TargetPolicy::default(), |_| Ok(()))?;
    if traj.diverged {
        return Err(Error::Integration(format!(
            "demonstration diverged at t = {}",
            traj.last().map_or(0.0, |r| r.state.t)
        )));
    }
    Ok(traj)
}

/// Mean |e_G| per layer over one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: u64,
    pub hip_mean_abs_error: Vec<f64>,
    pub knee_mean_abs_error: Vec<f64>,
    /// Mean |r_G − τ_out| over the episode, per model.
    pub hip_output_error: f64,
    pub knee_output_error: f64,
    pub clamped: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeLog>,
}

/// Online training from demonstrations, cycling through `demos`.
///
/// The plant is driven by the demonstration controller, which is what the
/// combined training-time output reduces to. Every control step updates both
/// models once; `end_episode` runs after each swing.
pub fn train(
    hip: &mut GrpModel,
    knee: &mut GrpModel,
    demos: &[DemoTask],
    episodes: usize,
    sim: &SimConfig,
) -> Result<TrainingLog> {
    train_with(hip, knee, demos, episodes, sim, |_, _| {})
}

/// As [`train`], also handing each finished episode's trace to `on_episode`.
pub fn train_with<F>(
    hip: &mut GrpModel,
    knee: &mut GrpModel,
    demos: &[DemoTask],
    episodes: usize,
    sim: &SimConfig,
    mut on_episode: F,
) -> Result<TrainingLog>
where
    F: FnMut(&EpisodeLog, &Trajectory),
{
    if episodes == 0 {
        return Err(Error::config("episodes", "need at least one episode"));
    }
    if demos.is_empty() {
        return Err(Error::config(
            "demo_count",
            "need at least one demonstration",
        ));
    }
    let mut log = TrainingLog::default();
    for episode in 0..episodes {
        let demo = &demos[episode % demos.len()];
        let mut hip_err = vec![0.0; hip.m()];
        let mut knee_err = vec![0.0; knee.m()];
        let mut hip_out = 0.0;
        let mut knee_out = 0.0;
        let mut clamped = 0u64;
        let mut steps = 0usize;
        let mut layer_rows: Vec<Vec<LayerTrace>> = Vec::new();

        let mut traj = simulate(demo, sim, &mut TargetPolicy::default(), |row| {
            let x = split_input(&sensory_input(&row.state, &row.kin, &demo.task));
            let h = hip.learn_step(&x, row.torques.tau_h)?;
            let k = knee.learn_step(&x, row.torques.tau_k)?;
            for (acc, e) in hip_err.iter_mut().zip(&h.e_g) {
                *acc += e.abs();
            }
            for (acc, e) in knee_err.iter_mut().zip(&k.e_g) {
                *acc += e.abs();
            }
            hip_out += (h.r_g - h.tau_out).abs();
            knee_out += (k.r_g - k.tau_out).abs();
            clamped += u64::from(h.clamped + k.clamped);
            steps += 1;
            layer_rows.push(vec![
                LayerTrace {
                    g: h.g,
                    pi: h.pi,
                    r: h.r_rp,
                },
                LayerTrace {
                    g: k.g,
                    pi: k.pi,
                    r: k.r_rp,
                },
            ]);
            Ok(())
        })
        .map_err(|e| match e {
            Error::Divergence(msg) => Error::Divergence(format!("episode {episode}: {msg}")),
            other => other,
        })?;

        traj.models = vec![
            ModelColumns {
                name: "hip".into(),
                m: hip.m(),
            },
            ModelColumns {
                name: "knee".into(),
                m: knee.m(),
            },
        ];
        for (row, layers) in traj.rows.iter_mut().zip(layer_rows) {
            row.layers = layers;
        }

        hip.end_episode();
        knee.end_episode();

        let n = steps as f64;
        let entry = EpisodeLog {
            episode: episode as u64,
            hip_mean_abs_error: hip_err.into_iter().map(|e| e / n).collect(),
            knee_mean_abs_error: knee_err.into_iter().map(|e| e / n).collect(),
            hip_output_error: hip_out / n,
            knee_output_error: knee_out / n,
            clamped,
        };
        on_episode(&entry, &traj);
        log.episodes.push(entry);
    }
    Ok(log)
}

/// Outcome of one evaluated swing; angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub index: usize,
    pub alpha_tgt_deg: f64,
    pub alpha_end_deg: f64,
    pub error_deg: f64,
    pub contact: bool,
    pub timed_out: bool,
    #[serde(default)]
    pub diverged: bool,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelActivity {
    pub name: String,
    pub active_generators: usize,
    pub peak_responsibility: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub trajectories: Vec<TrajectoryResult>,
    pub average_error_deg: f64,
    pub max_error_deg: f64,
    pub timeouts: usize,
    pub diverged: usize,
    pub activity_threshold: f64,
    pub models: Vec<ModelActivity>,
}

impl EvalReport {
    pub fn from_results(
        trajectories: Vec<TrajectoryResult>,
        activity_threshold: f64,
        models: Vec<ModelActivity>,
    ) -> Self {
        let n = trajectories.len().max(1) as f64;
        let average_error_deg = trajectories.iter().map(|t| t.error_deg).sum::<f64>() / n;
        let max_error_deg = trajectories
            .iter()
            .fold(0.0, |m, t| f64::max(m, t.error_deg));
        let timeouts = trajectories.iter().filter(|t| t.timed_out).count();
        let diverged = trajectories.iter().filter(|t| t.diverged).count();
        Self {
            trajectories,
            average_error_deg,
            max_error_deg,
            timeouts,
            diverged,
            activity_threshold,
            models,
        }
    }
}

pub fn trajectory_result(index: usize, demo: &DemoTask, traj: &Trajectory) -> TrajectoryResult {
    let alpha_end = traj.alpha_end();
    let contact = traj.contact();
    TrajectoryResult {
        index,
        alpha_tgt_deg: demo.task.alpha_tgt.to_degrees(),
        alpha_end_deg: alpha_end.to_degrees(),
        error_deg: (demo.task.alpha_tgt - alpha_end).abs().to_degrees(),
        contact,
        timed_out: !contact && !traj.diverged,
        diverged: traj.diverged,
        duration: traj.last().map_or(0.0, |r| r.state.t),
    }
}

/// Runs every task under the policy built by `make_policy`.
pub fn evaluate_policy<'p, P, F>(
    tasks: &[DemoTask],
    sim: &SimConfig,
    mut make_policy: F,
) -> Result<(Vec<TrajectoryResult>, Vec<Trajectory>)>
where
    P: Policy + 'p,
    F: FnMut() -> P,
{
    let mut results = Vec::with_capacity(tasks.len());
    let mut trajs = Vec::with_capacity(tasks.len());
    for (i, demo) in tasks.iter().enumerate() {
        let traj = simulate(demo, sim, &mut make_policy(), |_| Ok(()))?;
        results.push(trajectory_result(i, demo, &traj));
        trajs.push(traj);
    }
    Ok((results, trajs))
}

/// Reference-free evaluation: the plant only ever sees `τ_out` of each model.
pub fn evaluate(
    hip: &GrpModel,
    knee: &GrpModel,
    tasks: &[DemoTask],
    sim: &SimConfig,
    activity_threshold: f64,
) -> Result<(EvalReport, Vec<Trajectory>)> {
    let (results, trajs) = evaluate_policy(tasks, sim, || GrpPolicy::new(hip, knee))?;
    let models = model_activity(&trajs, activity_threshold)?;
    Ok((
        EvalReport::from_results(results, activity_threshold, models),
        trajs,
    ))
}

/// Highest predicted responsibility of every layer, per recorded model.
pub fn peak_responsibility(trajs: &[Trajectory]) -> Vec<Vec<f64>> {
    let Some(first) = trajs.first() else {
        return Vec::new();
    };
    let mut peaks: Vec<Vec<f64>> = first.models.iter().map(|m| vec![0.0; m.m]).collect();
    for row in trajs.iter().flat_map(|t| &t.rows) {
        for (peak, layer) in peaks.iter_mut().zip(&row.layers) {
            for (p, pi) in peak.iter_mut().zip(&layer.pi) {
                *p = p.max(*pi);
            }
        }
    }
    peaks
}

/// Number of layers per model whose predicted responsibility exceeds
/// `threshold` at some recorded step.
pub fn active_generator_count(trajs: &[Trajectory], threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::config("activity_threshold", "must lie in (0, 1]"));
    }
    Ok(peak_responsibility(trajs)
        .iter()
        .map(|peaks| peaks.iter().filter(|&&p| p > threshold).count())
        .collect())
}

pub fn model_activity(trajs: &[Trajectory], threshold: f64) -> Result<Vec<ModelActivity>> {
    let counts = active_generator_count(trajs, threshold)?;
    let peaks = peak_responsibility(trajs);
    let names = trajs.first().map(|t| t.models.clone()).unwrap_or_default();
    Ok(names
        .into_iter()
        .zip(counts.into_iter().zip(peaks))
        .map(
            |(m, (active_generators, peak_responsibility))| ModelActivity {
                name: m.name,
                active_generators,
                peak_responsibility,
            },
        )
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub layer: usize,
    pub generator_norm: f64,
    pub predictor_norm: f64,
    pub generator_max_abs: f64,
    pub predictor_max_abs: f64,
    pub generator: WeightMatrix,
    pub predictor: WeightMatrix,
}

/// Per-layer weight norms and full matrices, for identifying passive
/// (near-zero) generators.
pub fn weight_summary(model: &GrpModel) -> Vec<LayerWeights> {
    model
        .layers
        .iter()
        .enumerate()
        .map(|(k, l)| LayerWeights {
            layer: k + 1,
            generator_norm: l.w.frobenius_norm(),
            predictor_norm: l.r.frobenius_norm(),
            generator_max_abs: l.w.max_abs(),
            predictor_max_abs: l.r.max_abs(),
            generator: l.w,
            predictor: l.r,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grp::GrpConfig;

    #[test]
    fn tasks_respect_ranges() {
        let ranges = SampleRanges::default();
        let tasks = sample_tasks(&ranges, 40, 1, &LegParams::default()).unwrap();
        assert_eq!(tasks.len(), 40);
        for t in &tasks {
            assert_eq!(t.init.phi_h, 220f64.to_radians());
            assert_eq!(t.init.phi_k, 175f64.to_radians());
            let deg = t.task.alpha_tgt.to_degrees();
            assert!((50.0..=85.0).contains(&deg));
            assert!((-4.0..=0.0).contains(&t.init.phi_h_dot));
            assert!((-7.0..=-1.0).contains(&t.init.phi_k_dot));
        }
        assert_eq!(
            tasks,
            sample_tasks(&ranges, 40, 1, &LegParams::default()).unwrap()
        );
        assert!(sample_tasks(&ranges, 0, 1, &LegParams::default()).is_err());
    }

    #[test]
    fn demo_rows_on_time_grid() {
        let sim = SimConfig::default();
        let tasks = sample_tasks(&SampleRanges::default(), 3, 7, &sim.params).unwrap();
        for demo in &tasks {
            let traj = run_demo_episode(demo, &sim).unwrap();
            assert_eq!(
                traj.phases(),
                vec![Phase::Flexion, Phase::Hold, Phase::StopExtend]
            );
            for (i, row) in traj.rows.iter().enumerate() {
                assert_eq!(row.state.t, i as f64 * sim.dt);
            }
            assert!(traj.contact());
        }
    }

    #[test]
    fn threshold_one_counts_nothing() {
        let sim = SimConfig::default();
        let tasks = sample_tasks(&SampleRanges::default(), 1, 3, &sim.params).unwrap();
        let hip = GrpModel::init(GrpConfig::default()).unwrap();
        let knee = GrpModel::init(GrpConfig {
            m: 3,
            ..GrpConfig::default()
        })
        .unwrap();
        let (_, trajs) = evaluate(&hip, &knee, &tasks, &sim, 0.1).unwrap();
        assert_eq!(active_generator_count(&trajs, 1.0).unwrap(), vec![0, 0]);
        assert!(active_generator_count(&trajs, 0.0).is_err());
    }

    #[test]
    fn zero_layer_has_zero_norm() {
        let mut model = GrpModel::init(GrpConfig::default()).unwrap();
        model.layers[0].w = WeightMatrix::zeros();
        let summary = weight_summary(&model);
        assert_eq!(summary[0].generator_norm, 0.0);
        assert!(summary[0].predictor_norm > 0.0);
    }

    #[test]
    fn report_aggregates() {
        let mk = |i, e: f64, timed_out: bool| TrajectoryResult {
            index: i,
            alpha_tgt_deg: 60.0,
            alpha_end_deg: 60.0 + e,
            error_deg: e,
            contact: !timed_out,
            timed_out,
            diverged: false,
            duration: 0.3,
        };
        let r = EvalReport::from_results(vec![mk(0, 2.0, false), mk(1, 4.0, true)], 0.1, vec![]);
        assert_eq!(r.average_error_deg, 3.0);
        assert_eq!(r.max_error_deg, 4.0);
        assert_eq!(r.timeouts, 1);
    }
}
