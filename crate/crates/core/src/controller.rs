//! Demonstration swing-leg controller.
//!
//! One hip policy (leg-angle PD servo plus a compensation term) and three
//! knee policies run in sequence: flexion to clear the ground, holding the
//! knee while the hip advances the leg, then stopping the swing and
//! extending the leg until contact.

use serde::{Deserialize, Serialize};

use crate::dynamics::{kinematics, JointTorques, KinematicSnapshot, LegParams, LegState};
use crate::error::{Error, Result};

/// Hip and knee gains. Every angular gain acts on radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerGains {
    pub k_p_alpha: f64,
    pub k_d_alpha: f64,
    pub k_i: f64,
    pub k_ii: f64,
    pub k_stp: f64,
    pub k_ext: f64,
    /// rad/s
    pub alpha_dot_max: f64,
    /// rad
    pub delta_alpha_thr: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            k_p_alpha: 110.0,
            k_d_alpha: 8.5,
            k_i: 23.0,
            k_ii: 4.0,
            k_stp: 250.0,
            k_ext: 200.0,
            alpha_dot_max: 10.0,
            delta_alpha_thr: 8f64.to_radians(),
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("k_p_alpha", self.k_p_alpha),
            ("k_d_alpha", self.k_d_alpha),
            ("k_i", self.k_i),
            ("k_ii", self.k_ii),
            ("k_stp", self.k_stp),
            ("k_ext", self.k_ext),
            ("delta_alpha_thr", self.delta_alpha_thr),
        ];
        for (key, v) in all {
            if !v.is_finite() {
                return Err(Error::config(key, "must be finite"));
            }
        }
        if !(self.alpha_dot_max.is_finite() && self.alpha_dot_max > 0.0) {
            return Err(Error::config("alpha_dot_max", "must be strictly positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwingTask {
    pub alpha_tgt: f64,
    /// Required leg shortening before the knee switches to holding.
    pub l_clr: f64,
    pub ground_y: f64,
}

pub const DEFAULT_L_CLR: f64 = 0.05;

impl SwingTask {
    pub fn new(alpha_tgt: f64, ground_y: f64) -> Self {
        Self {
            alpha_tgt,
            l_clr: DEFAULT_L_CLR,
            ground_y,
        }
    }

    pub fn alpha_thr(&self, gains: &ControllerGains) -> f64 {
        self.alpha_tgt + gains.delta_alpha_thr
    }
}

/// Knee policy currently in charge. Numbered 1..=3 on file boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    Flexion,
    Hold,
    StopExtend,
}

impl Phase {
    pub fn number(self) -> u8 {
        match self {
            Phase::Flexion => 1,
            Phase::Hold => 2,
            Phase::StopExtend => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Phase::Flexion),
            2 => Some(Phase::Hold),
            3 => Some(Phase::StopExtend),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControllerState {
    pub phase: Phase,
    pub extension_latched: bool,
    pub contact: bool,
}

impl Default for ControllerState {
    fn default() -> Self {
        Self {
            phase: Phase::Flexion,
            extension_latched: false,
            contact: false,
        }
    }
}

pub fn hip_torque(
    kin: &KinematicSnapshot,
    task: &SwingTask,
    gains: &ControllerGains,
    tau_add: f64,
) -> f64 {
    gains.k_p_alpha * (task.alpha_tgt - kin.alpha) - gains.k_d_alpha * kin.alpha_dot + tau_add
}

/// Adaptive flexion: assist knee flexion only while the leg swings forward.
pub fn knee_phase1(kin: &KinematicSnapshot, gains: &ControllerGains) -> f64 {
    if kin.alpha_dot <= 0.0 {
        gains.k_i * kin.alpha_dot
    } else {
        0.0
    }
}

/// Knee hold: damp flexion. While the knee extends more slowly than the leg
/// advances, the extension is modulated by the remaining swing angle.
pub fn knee_phase2(
    kin: &KinematicSnapshot,
    phi_k_dot: f64,
    task: &SwingTask,
    gains: &ControllerGains,
) -> f64 {
    if phi_k_dot <= 0.0 {
        -gains.k_ii * phi_k_dot
    } else if phi_k_dot < -kin.alpha_dot {
        -gains.k_ii * phi_k_dot * (kin.alpha - task.alpha_tgt) * (phi_k_dot + kin.alpha_dot)
    } else {
        0.0
    }
}

/// Stopping torque of the last knee policy, before extension.
pub fn stopping_torque(kin: &KinematicSnapshot, task: &SwingTask, gains: &ControllerGains) -> f64 {
    let alpha_thr = task.alpha_thr(gains);
    if kin.alpha <= alpha_thr && kin.alpha_dot < gains.alpha_dot_max {
        -gains.k_stp * (alpha_thr - kin.alpha) * (1.0 - kin.alpha_dot / gains.alpha_dot_max)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase3Output {
    pub tau_k: f64,
    pub tau_add_h: f64,
    pub ctrl: ControllerState,
}

pub fn knee_phase3(
    kin: &KinematicSnapshot,
    ctrl: ControllerState,
    task: &SwingTask,
    gains: &ControllerGains,
    params: &LegParams,
) -> Phase3Output {
    let tau_stop = stopping_torque(kin, task, gains);
    let mut ctrl = ctrl;
    if kin.alpha_dot >= 0.0 {
        ctrl.extension_latched = true;
    }
    let tau_k = if ctrl.extension_latched {
        tau_stop + gains.k_ext * (params.l_0 - kin.l)
    } else {
        tau_stop
    };
    Phase3Output {
        tau_k,
        tau_add_h: -2.0 * tau_stop,
        ctrl,
    }
}

/// One-way phase transitions; both may fire in the same call.
pub fn update_phase(
    ctrl: ControllerState,
    kin: &KinematicSnapshot,
    task: &SwingTask,
    gains: &ControllerGains,
    params: &LegParams,
) -> ControllerState {
    let mut next = ctrl;
    if next.phase == Phase::Flexion && kin.l <= params.l_0 - task.l_clr {
        next.phase = Phase::Hold;
    }
    if next.phase == Phase::Hold && kin.alpha <= task.alpha_thr(gains) {
        next.phase = Phase::StopExtend;
    }
    next
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub torques: JointTorques,
    pub ctrl: ControllerState,
    pub kin: KinematicSnapshot,
}

pub fn control_step(
    state: &LegState,
    ctrl: ControllerState,
    task: &SwingTask,
    gains: &ControllerGains,
    params: &LegParams,
) -> ControlOutput {
    let kin = kinematics(state, params);
    let mut ctrl = update_phase(ctrl, &kin, task, gains, params);
    let (tau_k, tau_add) = match ctrl.phase {
        Phase::Flexion => (knee_phase1(&kin, gains), 0.0),
        Phase::Hold => (knee_phase2(&kin, state.phi_k_dot, task, gains), 0.0),
        Phase::StopExtend => {
            let out = knee_phase3(&kin, ctrl, task, gains, params);
            ctrl = out.ctrl;
            (out.tau_k, out.tau_add_h)
        }
    };
    if ctrl.phase == Phase::StopExtend && ctrl.extension_latched && kin.foot_y <= task.ground_y {
        ctrl.contact = true;
    }
    ControlOutput {
        torques: JointTorques::new(hip_torque(&kin, task, gains, tau_add), tau_k),
        ctrl,
        kin,
    }
}
