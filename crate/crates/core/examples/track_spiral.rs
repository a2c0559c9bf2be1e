//! Tracks a conical spiral with the shipped 3-DoF boom and prints the error.
//!
//! `cargo run -p emla-core --example track_spiral -- configs/hdmm_3dof.robot.json 1e-3`

use std::f64::consts::PI;

use emla_core::kinematics::{get_jacobian, smallest_singular_value};
use emla_core::{load_model, run_trajectory, TrajectorySpec};
use nalgebra::DVector;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "configs/hdmm_3dof.robot.json".into());
    let dt: f64 = args.next().map_or(Ok(1e-3), |s| s.parse())?;
    let model = load_model(&std::fs::read_to_string(path)?)?;
    let mut spiral = TrajectorySpec::spiral([4.2, 0.0, 1.2], 0.4, 0.02, 0.02);
    spiral.hold = 1.0;
    let motion = run_trajectory(&model, &spiral, dt, &DVector::from_vec(vec![0.0, 0.0, 1.0]))?;
    let sigma = motion
        .q
        .iter()
        .map(|q| smallest_singular_value(&get_jacobian(&model, q, &DVector::zeros(3)).task))
        .fold(f64::INFINITY, f64::min);
    let range = |i: usize| {
        let v = motion.q.iter().map(|q| q[i]);
        (v.clone().fold(f64::INFINITY, f64::min), v.fold(f64::NEG_INFINITY, f64::max))
    };
    println!("samples {}  span {:.4} s (8π = {:.4})", motion.len(), spiral.total_time(), 8.0 * PI);
    println!("max tracking error {:.3e} m", motion.max_tracking_error());
    println!("smallest singular value {sigma:.3e}, damped steps {}", motion.damped_steps);
    for (i, j) in model.joints.iter().enumerate() {
        let (lo, hi) = range(i);
        println!("{:10} [{lo:+.3}, {hi:+.3}] limits [{:+.2}, {:+.2}]", j.name, j.limits.0, j.limits.1);
    }
    Ok(())
}
