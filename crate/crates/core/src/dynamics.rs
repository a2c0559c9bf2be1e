//! Recursive Newton–Euler inverse dynamics in link-body coordinates.
//!
//! Gravity enters as an upward acceleration of the base, so the outward
//! pass already carries it and no separate gravity term is needed.

use nalgebra::{DVector, Vector6};

use crate::error::Result;
use crate::robot::RobotModel;
use crate::spatial::{ad_bracket, Twist, LINEAR};
use crate::transmission::Transmission;

/// Load-side state of every actuator at one instant.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActuatorState {
    /// Actuator length, or joint coordinate for direct drives (m).
    pub x: Vec<f64>,
    pub v_x: Vec<f64>,
    pub a_x: Vec<f64>,
    pub f_x: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct InverseDynamics {
    /// Joint torques (N·m) or forces (N).
    pub efforts: DVector<f64>,
    pub actuators: ActuatorState,
}

/// Joint efforts only; no transmission mapping.
pub fn joint_efforts(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    qddot: &DVector<f64>,
) -> DVector<f64> {
    let n = model.dof();
    let mut xforms = Vec::with_capacity(n);
    let mut twists: Vec<Vector6<f64>> = Vec::with_capacity(n);
    let mut wrenches: Vec<Vector6<f64>> = Vec::with_capacity(n);

    let mut base_acc = Vector6::zeros();
    base_acc.fixed_rows_mut::<3>(LINEAR.start).copy_from(&(-model.gravity));
    let mut v_prev = Vector6::zeros();
    let mut a_prev = base_acc;

    for i in 0..n {
        let s = model.joints[i].screw;
        let sv = s.to_vector();
        // twists of link i-1 expressed in link i
        let x = model.joint_transform(i, q[i]).inverse().adjoint();
        let v = x * v_prev + sv * qdot[i];
        let a = x * a_prev + ad_bracket(&Twist::from_vector(&v)) * sv * qdot[i] + sv * qddot[i];
        let g = model.link_inertia(i).to_matrix();
        let w = g * a - ad_bracket(&Twist::from_vector(&v)).transpose() * (g * v);
        xforms.push(x);
        twists.push(v);
        wrenches.push(w);
        v_prev = v;
        a_prev = a;
    }

    let mut efforts = DVector::zeros(n);
    for i in (0..n).rev() {
        if i + 1 < n {
            let child = xforms[i + 1].transpose() * wrenches[i + 1];
            wrenches[i] += child;
        }
        efforts[i] = model.joints[i].screw.to_vector().dot(&wrenches[i]);
    }
    efforts
}

/// Actuator acceleration along its axis, `ẍ = (dx/dθ) θ̈ + (d²x/dθ²) θ̇²`.
pub fn actuator_acceleration(t: &Transmission, theta: f64, theta_dot: f64, theta_ddot: f64) -> f64 {
    match t {
        Transmission::Direct => theta_ddot,
        Transmission::Crank(c) => {
            let x = c.length(theta);
            let gain = c.gain(theta);
            let phi = theta + c.angle_offset;
            let curvature = (c.anchor_a * c.anchor_b * phi.cos() - gain * gain) / x;
            gain * theta_ddot + curvature * theta_dot * theta_dot
        }
    }
}

/// Inverse dynamics followed by the joint-to-actuator mapping.
pub fn rnea(
    model: &RobotModel,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    qddot: &DVector<f64>,
) -> Result<InverseDynamics> {
    let efforts = joint_efforts(model, q, qdot, qddot);
    let n = model.dof();
    let mut actuators = ActuatorState {
        x: Vec::with_capacity(n),
        v_x: Vec::with_capacity(n),
        a_x: Vec::with_capacity(n),
        f_x: Vec::with_capacity(n),
    };
    for (i, joint) in model.joints.iter().enumerate() {
        let k = joint.transmission.map(q[i], qdot[i], efforts[i])?;
        actuators.x.push(k.x);
        actuators.v_x.push(k.x_dot);
        actuators
            .a_x
            .push(actuator_acceleration(&joint.transmission, q[i], qdot[i], qddot[i]));
        actuators.f_x.push(k.force);
    }
    Ok(InverseDynamics { efforts, actuators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::load_model;
    use crate::transmission::CrankTransmission;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn slider(axis: [f64; 3], mass: f64) -> RobotModel {
        let text = format!(
            r#"{{"robot": {{
                "joints": [{{"kind": "prismatic", "screw": {{"angular": [0,0,0], "linear": {axis:?}}}, "limits": [-5, 5]}}],
                "link_inertias": [{{"mass": {mass}, "center_of_mass": [0,0,0], "rotational_inertia": [[0,0,0],[0,0,0],[0,0,0]]}}],
                "parent_transforms": [{{}}]
            }}}}"#
        );
        load_model(&text).unwrap()
    }

    fn one(v: f64) -> DVector<f64> {
        DVector::from_element(1, v)
    }

    #[test]
    fn vertical_slider_accelerating() {
        let m = slider([0.0, 0.0, 1.0], 10.0);
        let d = rnea(&m, &one(0.3), &one(0.5), &one(2.0)).unwrap();
        assert_relative_eq!(d.actuators.f_x[0], 118.1, epsilon = 1e-9);
    }

    #[test]
    fn vertical_slider_holding() {
        let m = slider([0.0, 0.0, 1.0], 10.0);
        let d = rnea(&m, &one(0.3), &one(0.0), &one(0.0)).unwrap();
        assert_relative_eq!(d.actuators.f_x[0], 98.1, epsilon = 1e-9);
    }

    #[test]
    fn horizontal_slider_ignores_gravity() {
        let m = slider([1.0, 0.0, 0.0], 10.0);
        let d = rnea(&m, &one(0.3), &one(0.5), &one(2.0)).unwrap();
        assert_relative_eq!(d.actuators.f_x[0], 20.0, epsilon = 1e-9);
    }

    #[test]
    fn payload_adds_to_slider_mass() {
        let m = slider([0.0, 0.0, 1.0], 10.0).with_payload(5.0).unwrap();
        let d = rnea(&m, &one(0.0), &one(0.0), &one(1.0)).unwrap();
        assert_relative_eq!(d.actuators.f_x[0], 15.0 * 10.81, epsilon = 1e-9);
    }

    #[test]
    fn pendulum_gravity_torque() {
        // Rod pivoting about -y with a point mass 2 kg at 1.5 m along x.
        let text = r#"{"robot": {
            "joints": [{"kind": "revolute", "screw": {"angular": [0,-1,0], "linear": [0,0,0]}, "limits": [-3, 3]}],
            "link_inertias": [{"mass": 2, "center_of_mass": [1.5,0,0], "rotational_inertia": [[0,0,0],[0,4.5,0],[0,0,4.5]]}],
            "parent_transforms": [{}]
        }}"#;
        let m = load_model(text).unwrap();
        let q = 0.4;
        let d = rnea(&m, &one(q), &one(0.0), &one(0.0)).unwrap();
        assert_relative_eq!(d.efforts[0], 2.0 * 9.81 * 1.5 * q.cos(), epsilon = 1e-9);
        // and with angular acceleration: τ = I α + m g l cos q
        let d = rnea(&m, &one(q), &one(0.0), &one(2.0)).unwrap();
        assert_relative_eq!(d.efforts[0], 4.5 * 2.0 + 2.0 * 9.81 * 1.5 * q.cos(), epsilon = 1e-9);
    }

    #[test]
    fn zero_gravity_at_rest_is_exactly_zero() {
        let mut m = slider([0.0, 0.0, 1.0], 10.0);
        m.gravity = Vector3::zeros();
        let d = rnea(&m, &one(0.7), &one(0.0), &one(0.0)).unwrap();
        assert_eq!(d.efforts[0], 0.0);
    }

    proptest! {
        #[test]
        fn crank_acceleration_matches_finite_difference(
            theta in -0.3..0.3f64, rate in -1.0..1.0f64, acc in -2.0..2.0f64,
        ) {
            let t = Transmission::Crank(CrankTransmission { anchor_a: 0.8, anchor_b: 1.3, angle_offset: 1.2 });
            // x(t) along θ(t) = θ + rate·t + acc·t²/2
            let h = 1e-4;
            let x = |s: f64| t.length(theta + rate * s + 0.5 * acc * s * s);
            let fd = (x(h) - 2.0 * x(0.0) + x(-h)) / (h * h);
            prop_assert!((fd - actuator_acceleration(&t, theta, rate, acc)).abs() < 1e-5);
        }
    }
}
