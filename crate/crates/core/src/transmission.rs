//! Joint-to-actuator transmissions.
//!
//! A boom joint driven by a linear actuator forms a triangle: the actuator
//! is pinned at distance `anchor_a` from the joint on one link and at
//! `anchor_b` on the other, so its length follows the law of cosines in the
//! joint angle. Prismatic joints (and any joint without a linkage) map
//! one-to-one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this `|dx/dθ|` the actuator force is treated as unbounded.
pub const SINGULAR_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrankTransmission {
    /// Joint-to-pin distance on the proximal link (m).
    pub anchor_a: f64,
    /// Joint-to-pin distance on the distal link (m).
    pub anchor_b: f64,
    /// Triangle angle at zero joint angle (rad).
    pub angle_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Transmission {
    /// Actuator coordinate equals the joint coordinate.
    #[default]
    Direct,
    Crank(CrankTransmission),
}

/// Load-side actuator quantities for one joint state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuatorKinematics {
    /// Actuator length (m), or the joint coordinate for direct drives.
    pub x: f64,
    pub x_dot: f64,
    /// dx/dθ (m/rad, or 1 for direct drives).
    pub gain: f64,
    /// Force along the actuator axis (N).
    pub force: f64,
}

impl CrankTransmission {
    pub fn length(&self, theta: f64) -> f64 {
        let (a, b) = (self.anchor_a, self.anchor_b);
        (a * a + b * b - 2.0 * a * b * (theta + self.angle_offset).cos()).sqrt()
    }

    pub fn gain(&self, theta: f64) -> f64 {
        self.anchor_a * self.anchor_b * (theta + self.angle_offset).sin() / self.length(theta)
    }

    /// Shortest actuator length reachable for joint angles in `[lo, hi]`.
    pub fn min_length(&self, lo: f64, hi: f64) -> f64 {
        use std::f64::consts::TAU;
        let (start, end) = (lo + self.angle_offset, hi + self.angle_offset);
        // cos peaks at multiples of 2π; if one lies inside the interval the
        // triangle collapses to |a − b| there.
        let k = (start / TAU).ceil();
        if k * TAU <= end {
            (self.anchor_a - self.anchor_b).abs()
        } else {
            self.length(lo).min(self.length(hi))
        }
    }

    pub fn validate(&self, field: &str, limits: (f64, f64)) -> Result<()> {
        if !(self.anchor_a > 0.0) {
            return Err(Error::validation(format!("{field}.anchor_a"), "must be > 0"));
        }
        if !(self.anchor_b > 0.0) {
            return Err(Error::validation(format!("{field}.anchor_b"), "must be > 0"));
        }
        if !self.angle_offset.is_finite() {
            return Err(Error::validation(format!("{field}.angle_offset"), "must be finite"));
        }
        if !(self.min_length(limits.0, limits.1) > 0.0) {
            return Err(Error::validation(
                field.to_string(),
                "actuator length reaches zero within the joint limits",
            ));
        }
        Ok(())
    }
}

impl Transmission {
    pub fn length(&self, theta: f64) -> f64 {
        match self {
            Transmission::Direct => theta,
            Transmission::Crank(c) => c.length(theta),
        }
    }

    /// Maps joint angle, rate and effort to actuator length, speed and force.
    ///
    /// Force follows from power conservation, `f_x ẋ = τ θ̇`.
    pub fn map(&self, theta: f64, theta_dot: f64, effort: f64) -> Result<ActuatorKinematics> {
        match self {
            Transmission::Direct => Ok(ActuatorKinematics {
                x: theta,
                x_dot: theta_dot,
                gain: 1.0,
                force: effort,
            }),
            Transmission::Crank(c) => {
                let gain = c.gain(theta);
                if gain.abs() < SINGULAR_GAIN || !gain.is_finite() {
                    return Err(Error::SingularTransmission { theta, gain });
                }
                Ok(ActuatorKinematics {
                    x: c.length(theta),
                    x_dot: gain * theta_dot,
                    gain,
                    force: effort / gain,
                })
            }
        }
    }
}

/// Free-function form of [`Transmission::map`].
pub fn transmission_map(
    t: &Transmission,
    theta: f64,
    theta_dot: f64,
    effort: f64,
) -> Result<ActuatorKinematics> {
    t.map(theta, theta_dot, effort)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn right_angle_triangle() {
        let c = Transmission::Crank(CrankTransmission {
            anchor_a: 1.0,
            anchor_b: 1.0,
            angle_offset: FRAC_PI_2,
        });
        let k = c.map(0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(k.x, std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(k.gain, 0.707_106_781_186_547_5, epsilon = 1e-12);
    }

    #[test]
    fn direct_is_identity() {
        let k = Transmission::Direct.map(0.3, 0.2, 55.0).unwrap();
        assert_eq!((k.x, k.x_dot, k.gain, k.force), (0.3, 0.2, 1.0, 55.0));
    }

    #[test]
    fn force_from_gain() {
        let c = CrankTransmission {
            anchor_a: 1.0,
            anchor_b: 1.0,
            angle_offset: 2.0 * 0.5f64.acos(),
        };
        // a = b = 1 gives dx/dθ = cos(θ₀/2).
        let k = Transmission::Crank(c).map(0.0, 0.7, 100.0).unwrap();
        assert_relative_eq!(k.gain, 0.5, epsilon = 1e-12);
        assert_relative_eq!(k.force, 200.0, epsilon = 1e-9);
        assert_relative_eq!(k.force * k.x_dot, 100.0 * 0.7, epsilon = 1e-9);
    }

    #[test]
    fn singular_gain_is_reported() {
        let c = Transmission::Crank(CrankTransmission {
            anchor_a: 1.0,
            anchor_b: 2.0,
            angle_offset: std::f64::consts::PI,
        });
        assert!(matches!(
            c.map(0.0, 1.0, 10.0),
            Err(Error::SingularTransmission { .. })
        ));
    }

    #[test]
    fn collapsing_linkage_is_rejected() {
        let c = CrankTransmission {
            anchor_a: 1.0,
            anchor_b: 1.0,
            angle_offset: -0.2,
        };
        assert!(c.validate("t", (0.0, 1.0)).is_err());
        assert!(c.validate("t", (0.5, 1.0)).is_ok());
    }

    proptest! {
        #[test]
        fn power_is_conserved(
            a in 0.2..2.0f64, b in 0.2..2.0f64, off in 0.2..2.9f64,
            theta in -0.15..0.15f64, rate in -2.0..2.0f64, tau in -1e4..1e4f64,
        ) {
            let t = Transmission::Crank(CrankTransmission { anchor_a: a, anchor_b: b, angle_offset: off });
            let k = t.map(theta, rate, tau).unwrap();
            let p = tau * rate;
            prop_assert!((k.force * k.x_dot - p).abs() <= 1e-10 * p.abs().max(1e-300));
        }

        #[test]
        fn gain_matches_length_derivative(
            a in 0.2..2.0f64, b in 0.2..2.0f64, off in 0.3..2.8f64, theta in -0.2..0.2f64,
        ) {
            let c = CrankTransmission { anchor_a: a, anchor_b: b, angle_offset: off };
            let h = 1e-6;
            let fd = (c.length(theta + h) - c.length(theta - h)) / (2.0 * h);
            prop_assert!((fd - c.gain(theta)).abs() < 1e-7);
        }
    }
}
