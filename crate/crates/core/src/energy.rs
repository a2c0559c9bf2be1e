//! Mechanical energy of the arm from link Jacobians.
//!
//! Shares no code with the Newton–Euler recursion: kinetic energy comes from
//! the joint-space mass matrix `M(q) = Σ Jᵢᵀ Gᵢ Jᵢ` built from body
//! Jacobians, potential energy from the world-frame centres of mass.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::robot::RobotModel;
use crate::spatial::LINEAR;

/// Spatial Jacobian of every link frame (6×n each; columns past the link are zero).
fn link_spatial_jacobians(model: &RobotModel, q: &DVector<f64>) -> (Vec<DMatrix<f64>>, Vec<crate::spatial::Transform>) {
    let n = model.dof();
    let kin = model.forward_kinematics(q);
    let mut full = DMatrix::zeros(6, n);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let col = kin.frames[i].adjoint() * model.joints[i].screw.to_vector();
        full.set_column(i, &col);
        let mut j = DMatrix::zeros(6, n);
        j.columns_mut(0, i + 1).copy_from(&full.columns(0, i + 1));
        out.push(j);
    }
    (out, kin.frames)
}

pub fn mass_matrix(model: &RobotModel, q: &DVector<f64>) -> DMatrix<f64> {
    let n = model.dof();
    let (jacobians, frames) = link_spatial_jacobians(model, q);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let body = frames[i].inverse().adjoint();
        let jb = DMatrix::from_iterator(6, 6, body.iter().copied()) * &jacobians[i];
        let g = model.link_inertia(i).to_matrix();
        let g = DMatrix::from_iterator(6, 6, g.iter().copied());
        m += jb.transpose() * g * jb;
    }
    m
}

pub fn kinetic_energy(model: &RobotModel, q: &DVector<f64>, qdot: &DVector<f64>) -> f64 {
    0.5 * qdot.dot(&(mass_matrix(model, q) * qdot))
}

/// Gravitational potential energy, zero at the base frame origin.
pub fn potential_energy(model: &RobotModel, q: &DVector<f64>) -> f64 {
    let kin = model.forward_kinematics(q);
    (0..model.dof())
        .map(|i| {
            let inertia = model.link_inertia(i);
            let com = kin.frames[i].transform_point(&inertia.center_of_mass);
            -inertia.mass * model.gravity.dot(&com)
        })
        .sum()
}

/// Time derivatives `(dT/dt, dU/dt)` along the motion `(q, q̇, q̈)`.
///
/// `Ṁ` is taken by a central difference of `M(q)` along `q̇`.
pub fn energy_rates(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    qddot: &DVector<f64>,
) -> (f64, f64) {
    let m = mass_matrix(model, q);
    let speed = qdot.amax();
    let m_dot = if speed > 0.0 {
        let h = 1e-5 / speed;
        (mass_matrix(model, &(q + qdot * h)) - mass_matrix(model, &(q - qdot * h))) / (2.0 * h)
    } else {
        DMatrix::zeros(model.dof(), model.dof())
    };
    let kinetic = qdot.dot(&(&m * qddot)) + 0.5 * qdot.dot(&(m_dot * qdot));

    let (jacobians, frames) = link_spatial_jacobians(model, q);
    let potential = (0..model.dof())
        .map(|i| {
            let inertia = model.link_inertia(i);
            let com = frames[i].transform_point(&inertia.center_of_mass);
            let twist = &jacobians[i] * qdot;
            let w = Vector3::new(twist[0], twist[1], twist[2]);
            let v = twist.fixed_rows::<3>(LINEAR.start).into_owned();
            let com_velocity = v + w.cross(&com);
            -inertia.mass * model.gravity.dot(&com_velocity)
        })
        .sum();
    (kinetic, potential)
}
