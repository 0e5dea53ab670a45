//! Planar double-pendulum swing leg with the hip pinned at the origin.
//!
//! Generalized coordinates are the hip angle `phi_h` and the interior knee
//! angle `phi_k` (π = fully extended). The world frame has x forward and
//! y up. Absolute segment angles are measured from the forward horizontal,
//! positive sweeping downward, so a segment at angle θ points along
//! `(cos θ, −sin θ)`:
//!
//! ```text
//! θ_thigh = phi_h − π/2
//! θ_shank = θ_thigh + π − phi_k
//! ```
//!
//! Point masses sit at the midpoint of each segment.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Segment lengths, point masses and gravity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LegParams {
    pub l_t: f64,
    pub l_s: f64,
    pub m_t: f64,
    pub m_s: f64,
    pub g: f64,
    pub l_0: f64,
}

impl Default for LegParams {
    fn default() -> Self {
        Self {
            l_t: 0.5,
            l_s: 0.5,
            m_t: 7.3,
            m_s: 4.3,
            g: 9.81,
            l_0: 1.0,
        }
    }
}

impl LegParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l_t", self.l_t),
            ("l_s", self.l_s),
            ("m_t", self.m_t),
            ("m_s", self.m_s),
            ("g", self.g),
            ("l_0", self.l_0),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(key, "must be finite and strictly positive"));
            }
        }
        if (self.l_0 - (self.l_t + self.l_s)).abs() > 1e-12 {
            return Err(Error::config("l_0", "must equal l_t + l_s"));
        }
        Ok(())
    }
}

/// Joint angles, rates and simulation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegState {
    pub phi_h: f64,
    pub phi_k: f64,
    pub phi_h_dot: f64,
    pub phi_k_dot: f64,
    pub t: f64,
}

impl LegState {
    pub fn at_rest(phi_h: f64, phi_k: f64) -> Self {
        Self {
            phi_h,
            phi_k,
            phi_h_dot: 0.0,
            phi_k_dot: 0.0,
            t: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.phi_h.is_finite()
            && self.phi_k.is_finite()
            && self.phi_h_dot.is_finite()
            && self.phi_k_dot.is_finite()
            && self.t.is_finite()
    }
}

/// Torques conjugate to `phi_h` and `phi_k`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct JointTorques {
    pub tau_h: f64,
    pub tau_k: f64,
}

impl JointTorques {
    pub const ZERO: Self = Self {
        tau_h: 0.0,
        tau_k: 0.0,
    };

    pub fn new(tau_h: f64, tau_k: f64) -> Self {
        Self { tau_h, tau_k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicSnapshot {
    /// Leg-axis angle from the forward horizontal, positive downward.
    pub alpha: f64,
    pub alpha_dot: f64,
    /// Hip-to-foot distance.
    pub l: f64,
    pub foot_x: f64,
    pub foot_y: f64,
    pub knee_x: f64,
    pub knee_y: f64,
}

#[inline]
fn thigh_angle(phi_h: f64) -> f64 {
    phi_h - FRAC_PI_2
}

#[inline]
fn shank_angle(phi_h: f64, phi_k: f64) -> f64 {
    thigh_angle(phi_h) + PI - phi_k
}

pub fn kinematics(state: &LegState, params: &LegParams) -> KinematicSnapshot {
    let th_t = thigh_angle(state.phi_h);
    let th_s = shank_angle(state.phi_h, state.phi_k);
    let knee_x = params.l_t * th_t.cos();
    let knee_y = -params.l_t * th_t.sin();
    let foot_x = knee_x + params.l_s * th_s.cos();
    let foot_y = knee_y - params.l_s * th_s.sin();

    let alpha = state.phi_h - 0.5 * state.phi_k;
    let alpha_dot = state.phi_h_dot - 0.5 * state.phi_k_dot;
    // law of cosines; reduces to 2·l_t·sin(phi_k/2) for equal segments
    let l = if params.l_t == params.l_s {
        2.0 * params.l_t * (0.5 * state.phi_k).sin()
    } else {
        (params.l_t * params.l_t + params.l_s * params.l_s
            - 2.0 * params.l_t * params.l_s * state.phi_k.cos())
        .sqrt()
    };

    KinematicSnapshot {
        alpha,
        alpha_dot,
        l,
        foot_x,
        foot_y,
        knee_x,
        knee_y,
    }
}

/// Mass matrix, velocity-product terms and gravity terms in absolute angles.
struct AbsoluteModel {
    m11: f64,
    m12: f64,
    m22: f64,
    rhs_t: f64,
    rhs_s: f64,
}

fn absolute_model(state: &LegState, torques: &JointTorques, p: &LegParams) -> AbsoluteModel {
    let a = 0.5 * p.l_t;
    let b = 0.5 * p.l_s;
    // segment angles from straight down, so the hanging pose evaluates exactly
    let psi_t = state.phi_h - PI;
    let psi_s = state.phi_h - state.phi_k;
    let w_t = state.phi_h_dot;
    let w_s = state.phi_h_dot - state.phi_k_dot;

    // θ_t − θ_s = phi_k − π
    let (s, c) = (state.phi_k - PI).sin_cos();
    let coupling = p.m_s * p.l_t * b;

    // generalized forces from virtual work: phi_h = θ_t + π/2, phi_k = θ_t − θ_s + π
    let q_t = torques.tau_h + torques.tau_k;
    let q_s = -torques.tau_k;

    // cos θ = −sin ψ
    AbsoluteModel {
        m11: p.m_t * a * a + p.m_s * p.l_t * p.l_t,
        m12: coupling * c,
        m22: p.m_s * b * b,
        rhs_t: q_t - coupling * s * w_s * w_s - p.g * (p.m_t * a + p.m_s * p.l_t) * psi_t.sin(),
        rhs_s: q_s + coupling * s * w_t * w_t - p.g * p.m_s * b * psi_s.sin(),
    }
}

/// Joint accelerations `(phi_h_ddot, phi_k_ddot)`.
pub fn accelerations(
    state: &LegState,
    torques: &JointTorques,
    params: &LegParams,
) -> Result<(f64, f64)> {
    let m = absolute_model(state, torques, params);
    let det = m.m11 * m.m22 - m.m12 * m.m12;
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::Internal(format!(
            "singular mass matrix (det = {det}) at phi_h = {}, phi_k = {}",
            state.phi_h, state.phi_k
        )));
    }
    let acc_t = (m.m22 * m.rhs_t - m.m12 * m.rhs_s) / det;
    let acc_s = (m.m11 * m.rhs_s - m.m12 * m.rhs_t) / det;
    Ok((acc_t, acc_t - acc_s))
}

fn derivative(state: &LegState, torques: &JointTorques, params: &LegParams) -> Result<[f64; 4]> {
    let (ah, ak) = accelerations(state, torques, params)?;
    Ok([state.phi_h_dot, state.phi_k_dot, ah, ak])
}

fn offset(state: &LegState, k: &[f64; 4], h: f64) -> LegState {
    LegState {
        phi_h: state.phi_h + h * k[0],
        phi_k: state.phi_k + h * k[1],
        phi_h_dot: state.phi_h_dot + h * k[2],
        phi_k_dot: state.phi_k_dot + h * k[3],
        t: state.t + h,
    }
}

/// One classical RK4 step with the torques held for the whole step.
pub fn integrate_step(
    state: &LegState,
    torques: &JointTorques,
    params: &LegParams,
    dt: f64,
) -> Result<LegState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Integration(format!("invalid step size {dt}")));
    }
    let k1 = derivative(state, torques, params)?;
    let k2 = derivative(&offset(state, &k1, 0.5 * dt), torques, params)?;
    let k3 = derivative(&offset(state, &k2, 0.5 * dt), torques, params)?;
    let k4 = derivative(&offset(state, &k3, dt), torques, params)?;

    let w = dt / 6.0;
    let next = LegState {
        phi_h: state.phi_h + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        phi_k: state.phi_k + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        phi_h_dot: state.phi_h_dot + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        phi_k_dot: state.phi_k_dot + w * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
        t: state.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::Integration(format!(
            "non-finite state after step from t = {}",
            state.t
        )));
    }
    Ok(next)
}

/// Mass matrix in the joint coordinates `(phi_h, phi_k)`.
pub fn mass_matrix(state: &LegState, p: &LegParams) -> [[f64; 2]; 2] {
    let m = absolute_model(state, &JointTorques::ZERO, p);
    // θ̇ = A·q̇ with A = [[1, 0], [1, −1]]; M_q = Aᵀ·M_θ·A
    [
        [m.m11 + 2.0 * m.m12 + m.m22, -(m.m12 + m.m22)],
        [-(m.m12 + m.m22), m.m22],
    ]
}

/// Inelastic knee stop at full extension.
///
/// A state that has crossed `phi_k = π` is put back on the stop and receives
/// the joint-space impulse that removes its extension rate, which conserves
/// angular momentum about the hip and dissipates the knee's approach energy.
pub fn knee_stop(state: &LegState, p: &LegParams) -> LegState {
    if state.phi_k <= PI {
        return *state;
    }
    let mut next = *state;
    next.phi_k = PI;
    if next.phi_k_dot > 0.0 {
        let m = mass_matrix(&next, p);
        let det = m[0][0] * m[1][1] - m[0][1] * m[0][1];
        let inv_kk = m[0][0] / det;
        let inv_hk = -m[0][1] / det;
        let impulse = -next.phi_k_dot / inv_kk;
        next.phi_h_dot += inv_hk * impulse;
        next.phi_k_dot = 0.0;
    }
    next
}

/// Integration step followed by the knee stop; the plant used for rollouts.
pub fn plant_step(
    state: &LegState,
    torques: &JointTorques,
    params: &LegParams,
    dt: f64,
) -> Result<LegState> {
    integrate_step(state, torques, params, dt).map(|s| knee_stop(&s, params))
}

/// Kinetic plus potential energy; potential is zero at hip height.
pub fn total_energy(state: &LegState, p: &LegParams) -> f64 {
    let a = 0.5 * p.l_t;
    let b = 0.5 * p.l_s;
    let th_t = thigh_angle(state.phi_h);
    let th_s = shank_angle(state.phi_h, state.phi_k);
    let w_t = state.phi_h_dot;
    let w_s = state.phi_h_dot - state.phi_k_dot;

    let kinetic = 0.5 * p.m_t * a * a * w_t * w_t
        + 0.5
            * p.m_s
            * (p.l_t * p.l_t * w_t * w_t
                + b * b * w_s * w_s
                + 2.0 * p.l_t * b * (th_t - th_s).cos() * w_t * w_s);
    let y_t = -a * th_t.sin();
    let y_s = -p.l_t * th_t.sin() - b * th_s.sin();
    let potential = p.g * (p.m_t * y_t + p.m_s * y_s);
    kinetic + potential
}
