//! Second-order inverse differential kinematics.
//!
//! The spatial Jacobian and its time derivative are built column by column
//! from the joint screws and the adjoint of each link frame; the TCP
//! Jacobian then selects the linear velocity of the TCP point. Joint rates
//! and accelerations follow from the pseudoinverse of that 3×n Jacobian.

use log::warn;
use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3};

use crate::error::{Error, Result};
use crate::robot::RobotModel;
use crate::spatial::{ad_bracket, skew, ANGULAR, LINEAR};
use crate::trajectory::{Reference, TrajectorySpec};

/// Relative singular-value cutoff for the undamped pseudoinverse.
pub const SVD_CUTOFF: f64 = 1e-10;
/// Smallest singular value below which damping engages.
pub const SINGULARITY_THRESHOLD: f64 = 1e-6;
/// Damping used near singularities.
pub const SINGULARITY_DAMPING: f64 = 1e-4;
/// Tracking error at which a run is aborted (m).
pub const DIVERGENCE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct JacobianPair {
    /// 3×n TCP linear-velocity Jacobian.
    pub task: DMatrix<f64>,
    pub task_dot: DMatrix<f64>,
    /// 6×n spatial Jacobian, rows in (angular, linear) order.
    pub spatial: DMatrix<f64>,
    pub spatial_dot: DMatrix<f64>,
    pub tcp_position: Vector3<f64>,
}

/// `[−[r]×  I]`: picks the velocity of point `r` out of a spatial twist.
fn point_velocity_map(r: &Vector3<f64>) -> nalgebra::Matrix3x6<f64> {
    let mut m = nalgebra::Matrix3x6::zeros();
    m.fixed_view_mut::<3, 3>(0, ANGULAR.start).copy_from(&(-skew(r)));
    m.fixed_view_mut::<3, 3>(0, LINEAR.start).copy_from(&Matrix3::identity());
    m
}

pub fn get_jacobian(model: &RobotModel, q: &DVector<f64>, qdot: &DVector<f64>) -> JacobianPair {
    let n = model.dof();
    let kin = model.forward_kinematics(q);
    let mut spatial = DMatrix::zeros(6, n);
    let mut spatial_dot = DMatrix::zeros(6, n);
    let mut ad_dot = Matrix6::zeros();
    for i in 0..n {
        let s = model.joints[i].screw;
        let sv = s.to_vector();
        let ad = kin.frames[i].adjoint();
        spatial.set_column(i, &(ad * sv));
        ad_dot = ad_dot * kin.local[i].adjoint() + ad * ad_bracket(&s) * qdot[i];
        spatial_dot.set_column(i, &(ad_dot * sv));
    }
    let r = kin.tcp.translation;
    let select = point_velocity_map(&r);
    let task = select * &spatial;
    let r_dot: Vector3<f64> = &task * qdot;
    let mut select_dot = nalgebra::Matrix3x6::zeros();
    select_dot
        .fixed_view_mut::<3, 3>(0, ANGULAR.start)
        .copy_from(&(-skew(&r_dot)));
    let task_dot = select_dot * &spatial + select * &spatial_dot;
    JacobianPair {
        task: DMatrix::from_iterator(3, n, task.iter().copied()),
        task_dot: DMatrix::from_iterator(3, n, task_dot.iter().copied()),
        spatial,
        spatial_dot,
        tcp_position: r,
    }
}

/// Moore–Penrose pseudoinverse for `damping == 0`, damped least squares
/// `Jᵀ(JJᵀ + λ²I)⁻¹` otherwise.
pub fn pseudoinverse(j: &DMatrix<f64>, damping: f64) -> DMatrix<f64> {
    let (rows, cols) = j.shape();
    if damping > 0.0 {
        let jjt = j * j.transpose() + DMatrix::identity(rows, rows) * (damping * damping);
        let inv = jjt
            .cholesky()
            .map(|c| c.inverse())
            .expect("JJᵀ + λ²I is positive definite");
        return j.transpose() * inv;
    }
    let svd = j.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let mut out = DMatrix::zeros(cols, rows);
    if !(sigma_max > 0.0) {
        return out;
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    for (k, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma > SVD_CUTOFF * sigma_max {
            out += v_t.row(k).transpose() * u.column(k).transpose() / sigma;
        }
    }
    out
}

pub fn smallest_singular_value(j: &DMatrix<f64>) -> f64 {
    j.singular_values().min()
}

/// Result of one differential-kinematics step.
#[derive(Debug, Clone)]
pub struct IkStep {
    /// Joint rates at the current sample, `J⁺ ẋ_r`.
    pub qdot: DVector<f64>,
    /// Joint accelerations at the current sample, `J⁺(ẍ_r − J̇ q̇)`.
    pub qddot: DVector<f64>,
    pub q_next: DVector<f64>,
    pub qdot_next: DVector<f64>,
    /// True when the Jacobian was near-singular and damping was applied.
    pub damped: bool,
    pub tcp_position: Vector3<f64>,
}

pub fn ik_step(model: &RobotModel, q: &DVector<f64>, reference: &Reference, dt: f64) -> IkStep {
    let n = model.dof();
    let zero = DVector::zeros(n);
    let j = get_jacobian(model, q, &zero);
    let sigma_min = smallest_singular_value(&j.task);
    let damped = sigma_min < SINGULARITY_THRESHOLD;
    let damping = if damped {
        warn!("near-singular Jacobian (σ_min = {sigma_min:e}); damping with λ = {SINGULARITY_DAMPING}");
        SINGULARITY_DAMPING
    } else {
        0.0
    };
    let j_pinv = pseudoinverse(&j.task, damping);
    let qdot = &j_pinv * reference.velocity;
    let j = get_jacobian(model, q, &qdot);
    let qddot = &j_pinv * (reference.acceleration - &j.task_dot * &qdot);
    let q_next = q + &qdot * dt;
    let qdot_next = &qdot + &qddot * dt;
    IkStep {
        qdot,
        qddot,
        q_next,
        qdot_next,
        damped,
        tcp_position: j.tcp_position,
    }
}

/// Joint-space motion sampled on a fixed time grid.
#[derive(Debug, Clone)]
pub struct Motion {
    pub dt: f64,
    pub time: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qdot: Vec<DVector<f64>>,
    pub qddot: Vec<DVector<f64>>,
    /// ‖TCP − x_r‖ at each sample (m).
    pub tracking_error: Vec<f64>,
    pub damped_steps: usize,
}

impl Motion {
    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn max_tracking_error(&self) -> f64 {
        self.tracking_error.iter().copied().fold(0.0, f64::max)
    }
}

/// Number of samples `t_k = kΔt` with `t_k ≤ span`.
pub fn sample_count(span: f64, dt: f64) -> usize {
    (span / dt + 1e-9).floor() as usize + 1
}

/// Newton iterations on the TCP position starting from `seed`.
pub fn solve_initial_configuration(
    model: &RobotModel,
    seed: &DVector<f64>,
    target: &Vector3<f64>,
) -> Result<DVector<f64>> {
    let mut q = seed.clone();
    for _ in 0..100 {
        let err = target - model.tcp_position(&q);
        if err.norm() < 1e-12 {
            return Ok(q);
        }
        let j = get_jacobian(model, &q, &DVector::zeros(model.dof()));
        let damping = if smallest_singular_value(&j.task) < SINGULARITY_THRESHOLD {
            SINGULARITY_DAMPING
        } else {
            0.0
        };
        q += pseudoinverse(&j.task, damping) * err;
    }
    let residual = (target - model.tcp_position(&q)).norm();
    if residual < 1e-9 {
        Ok(q)
    } else {
        Err(Error::validation(
            "initial_q",
            format!("cannot place the TCP on the trajectory start (residual {residual:e} m)"),
        ))
    }
}

/// Runs the differential-kinematics loop over the whole trajectory.
///
/// `seed` is refined so the TCP starts on `x_r(0)`; each sample stores the
/// state `(q, q̇, q̈)` used for that instant.
pub fn run_trajectory(
    model: &RobotModel,
    trajectory: &TrajectorySpec,
    dt: f64,
    seed: &DVector<f64>,
) -> Result<Motion> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation("dt", "must be finite and > 0"));
    }
    if seed.len() != model.dof() {
        return Err(Error::validation(
            "initial_q",
            format!("expected {} values, found {}", model.dof(), seed.len()),
        ));
    }
    trajectory.validate()?;
    let span = trajectory.total_time();
    let count = sample_count(span, dt);
    let start = trajectory.evaluate(0.0)?;
    let mut q = solve_initial_configuration(model, seed, &start.position)?;

    let mut motion = Motion {
        dt,
        time: Vec::with_capacity(count),
        q: Vec::with_capacity(count),
        qdot: Vec::with_capacity(count),
        qddot: Vec::with_capacity(count),
        tracking_error: Vec::with_capacity(count),
        damped_steps: 0,
    };
    let mut warned = vec![false; model.dof()];
    for k in 0..count {
        let t = (k as f64 * dt).min(span);
        let reference = trajectory.evaluate(t)?;
        for i in model.limit_violations(&q) {
            if !warned[i] {
                warn!("joint `{}` left its limits at t = {t:.3} s (q = {})", model.joints[i].name, q[i]);
                warned[i] = true;
            }
        }
        let step = ik_step(model, &q, &reference, dt);
        let error = (step.tcp_position - reference.position).norm();
        if !(error <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                time: t,
                error,
                limit: DIVERGENCE_LIMIT,
            });
        }
        motion.damped_steps += usize::from(step.damped);
        motion.time.push(t);
        motion.tracking_error.push(error);
        motion.q.push(q);
        motion.qdot.push(step.qdot);
        motion.qddot.push(step.qddot);
        q = step.q_next;
    }
    Ok(motion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::robot::load_model;
    use crate::trajectory::TrajectorySpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PRISMATIC_Z: &str = r#"{"robot": {
        "joints": [{"kind": "prismatic", "screw": {"angular": [0,0,0], "linear": [0,0,1]}, "limits": [-5, 5]}],
        "link_inertias": [{"mass": 5, "center_of_mass": [0,0,0], "rotational_inertia": [[0,0,0],[0,0,0],[0,0,0]]}],
        "parent_transforms": [{}]
    }}"#;

    fn dm(rows: usize, cols: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(rows, cols, v)
    }

    #[test]
    fn prismatic_jacobian_is_constant() {
        let m = load_model(PRISMATIC_Z).unwrap();
        for (q, qd) in [(0.0, 0.0), (0.7, 1.3), (-2.0, -0.4)] {
            let j = get_jacobian(&m, &DVector::from_element(1, q), &DVector::from_element(1, qd));
            assert_eq!(j.task, dm(3, 1, &[0.0, 0.0, 1.0]));
            assert_eq!(j.task_dot, DMatrix::zeros(3, 1));
        }
    }

    #[test]
    fn invertible_pseudoinverse() {
        let j = dm(3, 3, &[2.0, 1.0, 0.0, 0.0, 3.0, 1.0, 1.0, 0.0, 4.0]);
        let inv = j.clone().try_inverse().unwrap();
        assert!((pseudoinverse(&j, 0.0) - inv).amax() < 1e-10);
    }

    #[test]
    fn row_vector_minimum_norm() {
        let p = pseudoinverse(&dm(1, 2, &[1.0, 0.0]), 0.0);
        assert_eq!(p, dm(2, 1, &[1.0, 0.0]));
    }

    #[test]
    fn zero_matrix_pseudoinverse() {
        assert_eq!(pseudoinverse(&DMatrix::zeros(3, 2), 0.0), DMatrix::zeros(2, 3));
    }

    #[test]
    fn damped_form_is_total() {
        let p = pseudoinverse(&DMatrix::zeros(3, 2), 1e-4);
        assert_eq!(p, DMatrix::zeros(2, 3));
    }

    #[test]
    fn prismatic_step() {
        let m = load_model(PRISMATIC_Z).unwrap();
        let r = Reference {
            position: Vector3::zeros(),
            velocity: Vector3::new(0.0, 0.0, 0.1),
            acceleration: Vector3::new(0.0, 0.0, 0.3),
        };
        let s = ik_step(&m, &DVector::zeros(1), &r, 1e-3);
        assert_relative_eq!(s.qdot[0], 0.1);
        assert_relative_eq!(s.qddot[0], 0.3);
        assert_relative_eq!(s.q_next[0], 1e-4);
    }

    #[test]
    fn rest_step() {
        let m = load_model(PRISMATIC_Z).unwrap();
        let r = Reference {
            position: Vector3::zeros(),
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
        };
        let q = DVector::from_element(1, 0.4);
        let s = ik_step(&m, &q, &r, 1e-3);
        assert_eq!(s.q_next, q);
        assert_eq!(s.qddot[0], 0.0);
    }

    #[test]
    fn zero_duration_gives_single_sample() {
        let m = load_model(PRISMATIC_Z).unwrap();
        let traj = TrajectorySpec::constant([0.0, 0.0, 0.2], 0.0);
        let motion = run_trajectory(&m, &traj, 1e-3, &DVector::zeros(1)).unwrap();
        assert_eq!(motion.len(), 1);
        assert_relative_eq!(motion.q[0][0], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn sample_count_for_eight_pi() {
        assert_eq!(sample_count(8.0 * std::f64::consts::PI, 1e-3), 25_133);
        assert_eq!(sample_count(1.0, 0.25), 5);
    }

    #[test]
    fn bad_seed_length_rejected() {
        let m = load_model(PRISMATIC_Z).unwrap();
        let traj = TrajectorySpec::constant([0.0, 0.0, 0.2], 1.0);
        assert!(run_trajectory(&m, &traj, 1e-3, &DVector::zeros(2)).is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = DMatrix<f64>> {
        (1usize..4, prop::collection::vec(-3.0..3.0f64, 12))
            .prop_map(|(n, v)| DMatrix::from_row_slice(3, n, &v[..3 * n]))
    }

    proptest! {
        #[test]
        fn penrose_conditions(j in arb_matrix()) {
            let p = pseudoinverse(&j, 0.0);
            prop_assert!((&j * &p * &j - &j).amax() < 1e-9);
            prop_assert!((&p * &j * &p - &p).amax() < 1e-9);
        }
    }
}
