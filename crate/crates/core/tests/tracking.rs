use std::f64::consts::PI;

use emla_core::actuator::Emla;
use emla_core::sensitivity::metrics_for_payload;
use emla_core::{load_model, run_trajectory, RobotModel, TrajectorySpec};
use nalgebra::DVector;

fn boom() -> RobotModel {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hdmm_3dof.robot.json");
    load_model(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn actuators() -> Vec<Emla> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hdmm_3dof.json");
    let config: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    serde_json::from_value(config["actuators"].clone()).unwrap()
}

fn spiral() -> TrajectorySpec {
    let mut s = TrajectorySpec::spiral([4.2, 0.0, 1.2], 0.4, 0.02, 0.02);
    s.hold = 1.0;
    s
}

#[test]
fn spiral_error_is_first_order() {
    let m = boom();
    let seed = DVector::from_vec(vec![0.0, 0.0, 1.0]);
    let mut s = spiral();
    s.duration = PI;
    let coarse = run_trajectory(&m, &s, 2e-3, &seed).unwrap().max_tracking_error();
    let fine = run_trajectory(&m, &s, 1e-3, &seed).unwrap().max_tracking_error();
    let ratio = coarse / fine;
    assert!((1.8..2.2).contains(&ratio), "ratio {ratio}");
}

#[test]
fn full_spiral_within_a_millimetre() {
    let m = boom();
    let motion = run_trajectory(&m, &spiral(), 1e-3, &DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    assert_eq!(motion.len(), 26_133);
    assert!(motion.max_tracking_error() <= 1e-3);
    assert_eq!(motion.damped_steps, 0);
    assert!(motion.q.iter().all(|q| m.limit_violations(q).is_empty()));
}

#[test]
fn hold_segment_is_static_and_efficiency_bounded() {
    let m = boom();
    let mut s = spiral();
    s.duration = 2.0;
    let motion = run_trajectory(&m, &s, 1e-3, &DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    for k in 0..1000 {
        assert_eq!(motion.qdot[k].amax(), 0.0);
        assert_eq!(motion.q[k], motion.q[0]);
    }
    let series = metrics_for_payload(&m, &motion, &actuators(), 120.0).unwrap();
    for a in &series.actuators {
        for (p, eta) in a.psi1.iter().zip(&a.psi4) {
            if *p > 0.0 {
                let eta = eta.unwrap();
                assert!(eta > 0.0 && eta < 1.0, "{} {eta}", a.name);
            }
        }
        // no power, no energy during the hold
        assert_eq!(a.psi3[999], 0.0);
    }
}
