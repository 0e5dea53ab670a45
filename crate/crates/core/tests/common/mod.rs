//! Independent Euler–Lagrange oracle shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use grp_core::dynamics::{JointTorques, LegParams, LegState};

/// Lagrangian of two point masses at the segment midpoints, written in
/// Cartesian coordinates.
fn lagrangian(q: [f64; 2], qd: [f64; 2], p: &LegParams) -> f64 {
    let (a, b) = (0.5 * p.l_t, 0.5 * p.l_s);
    let th_t = q[0] - FRAC_PI_2;
    let th_s = th_t + PI - q[1];
    let w_t = qd[0];
    let w_s = qd[0] - qd[1];
    // heights and velocities of the two mass points
    let yt = -a * th_t.sin();
    let ys = -p.l_t * th_t.sin() - b * th_s.sin();
    let (vxt, vyt) = (-a * th_t.sin() * w_t, -a * th_t.cos() * w_t);
    let (vxk, vyk) = (-p.l_t * th_t.sin() * w_t, -p.l_t * th_t.cos() * w_t);
    let (vxs, vys) = (vxk - b * th_s.sin() * w_s, vyk - b * th_s.cos() * w_s);
    let kinetic = 0.5 * p.m_t * (vxt * vxt + vyt * vyt) + 0.5 * p.m_s * (vxs * vxs + vys * vys);
    let potential = p.g * (p.m_t * yt + p.m_s * ys);
    kinetic - potential
}

const HV: f64 = 1e-2;
const HQ: f64 = 1e-3;

fn bump(v: [f64; 2], i: usize, h: f64) -> [f64; 2] {
    let mut out = v;
    out[i] += h;
    out
}

/// ∂L/∂q̇_i; exact up to rounding because L is quadratic in q̇.
fn momentum(q: [f64; 2], qd: [f64; 2], i: usize, p: &LegParams) -> f64 {
    (lagrangian(q, bump(qd, i, HV), p) - lagrangian(q, bump(qd, i, -HV), p)) / (2.0 * HV)
}

/// Central difference in q with one Richardson step.
fn d_dq(f: impl Fn([f64; 2]) -> f64, q: [f64; 2], j: usize) -> f64 {
    let cd = |h: f64| (f(bump(q, j, h)) - f(bump(q, j, -h))) / (2.0 * h);
    (4.0 * cd(0.5 * HQ) - cd(HQ)) / 3.0
}

/// Joint accelerations from the Euler–Lagrange equations evaluated with
/// finite differences of the Lagrangian.
pub fn oracle_accelerations(s: &LegState, tau: &JointTorques, p: &LegParams) -> (f64, f64) {
    let q = [s.phi_h, s.phi_k];
    let qd = [s.phi_h_dot, s.phi_k_dot];
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = (momentum(q, bump(qd, j, HV), i, p) - momentum(q, bump(qd, j, -HV), i, p))
                / (2.0 * HV);
        }
    }
    let forces = [tau.tau_h, tau.tau_k];
    let mut rhs = [0.0; 2];
    for i in 0..2 {
        let dl_dq = d_dq(|qq| lagrangian(qq, qd, p), q, i);
        let mut mixed = 0.0;
        for j in 0..2 {
            mixed += d_dq(|qq| momentum(qq, qd, i, p), q, j) * qd[j];
        }
        rhs[i] = forces[i] + dl_dq - mixed;
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    (
        (m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det,
        (m[0][0] * rhs[1] - m[1][0] * rhs[0]) / det,
    )
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
