//! Modular online imitation learning for a planar swing leg.
//!
//! A three-phase swing controller drives a double-pendulum leg; stacks of
//! multiplicative networks (Generator plus Responsibility Predictor per
//! layer) learn to reproduce its hip and knee torques online and are then
//! evaluated with the reference removed.

pub mod controller;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod grp;
pub mod io;
pub mod mulnet;

pub use controller::{
    control_step, ControlOutput, ControllerGains, ControllerState, Phase, SwingTask,
};
pub use dynamics::{
    accelerations, integrate_step, kinematics, plant_step, total_energy, JointTorques,
    KinematicSnapshot, LegParams, LegState,
};
pub use error::{Error, Result};
pub use experiment::{
    evaluate, run_demo_episode, sample_tasks, train, DemoTask, EvalReport, SampleRanges, SimConfig,
    TrainingLog, Trajectory,
};
pub use grp::{responsibility_reference, GrpConfig, GrpLayer, GrpModel, StepRecord};
pub use io::{ModelFile, RunConfig};
pub use mulnet::{
    finite_difference_check, net_forward, net_gradient, sigmoid_head, split_input, NetworkInput,
    SensoryInput, WeightMatrix,
};
