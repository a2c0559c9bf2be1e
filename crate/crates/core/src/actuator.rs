//! Electromechanical linear actuator: PMSM, planetary and spur gear stages,
//! and a screw converting motor rotation to piston travel.
//!
//! The drivetrain is lumped into equivalent load-side mass, damping and
//! stiffness. The motor is field-oriented with `i_d = 0`, so the torque
//! equation fixes `i_q` and the steady dq voltage equations give the
//! terminal voltage, current and power factor.
//!
//! Losses are copper (`1.5 R_s i_q²`), iron (`c_h|ω| + c_e ω²`) and
//! mechanical (`F_c|v| + b v²` at the screw, where `b` is the drivetrain
//! viscous coefficient `b_eq` plus any extra screw viscosity in
//! [`LossModel`]). Iron and mechanical losses appear to the motor as drag
//! torque, so the steady electrical input power equals the delivered power
//! plus all three losses.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// PMSM electrical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmsmParams {
    /// Stator resistance R_s (Ω). Zero models an ideal copper-free winding.
    pub resistance: f64,
    /// d-axis inductance (H).
    pub l_d: f64,
    /// q-axis inductance (H).
    pub l_q: f64,
    pub pole_pairs: u32,
    /// Permanent-magnet flux linkage Ψ_PM (Wb).
    pub flux_linkage: f64,
}

/// Series stiffness of each drivetrain stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesStiffness {
    /// Motor–planetary coupling (N·m/rad).
    pub motor_planetary: f64,
    /// Planetary–gear coupling (N·m/rad).
    pub planetary_gear: f64,
    /// Gear–screw coupling (N·m/rad).
    pub gear_screw: f64,
    /// Screw–load coupling, already expressed on the rotational side (N·m/rad).
    pub load: f64,
}

/// Mechanical drivetrain from motor shaft to piston.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Drivetrain {
    /// Screw lead ρ (m/rev).
    pub lead: f64,
    /// Translating screw/piston mass (kg).
    pub screw_mass: f64,
    pub motor_inertia: f64,
    pub planetary_inertia: f64,
    pub gear_inertia: f64,
    /// Spur gear ratio N_g.
    pub gear_ratio: f64,
    /// Planetary ratio N_p.
    pub planetary_ratio: f64,
    /// Screw viscous coefficient b_s (N·s/m).
    #[serde(default)]
    pub screw_damping: f64,
    /// Motor viscous coefficient b_m (N·m·s/rad).
    #[serde(default)]
    pub motor_damping: f64,
    /// `None` treats the drivetrain as rigid.
    #[serde(default)]
    pub stiffness: Option<SeriesStiffness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossModel {
    /// Hysteresis coefficient c_h (W·s/rad).
    #[serde(default)]
    pub hysteresis: f64,
    /// Eddy-current coefficient c_e (W·s²/rad²).
    #[serde(default)]
    pub eddy: f64,
    /// Coulomb friction at the screw F_c (N).
    #[serde(default)]
    pub coulomb: f64,
    /// Screw viscous friction on top of the drivetrain's b_eq (N·s/m).
    #[serde(default)]
    pub viscous: f64,
}

/// One actuator: motor, drivetrain and losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Emla {
    #[serde(default)]
    pub name: String,
    pub pmsm: PmsmParams,
    pub mechanics: Drivetrain,
    #[serde(default)]
    pub loss: LossModel,
}

/// Lumped load-side drivetrain coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentCoefficients {
    /// Equivalent mass a_eq (kg).
    pub mass: f64,
    /// Equivalent damping b_eq (N·s/m).
    pub damping: f64,
    /// Equivalent stiffness c_eq (N/m); zero for a rigid drivetrain.
    pub stiffness: f64,
    /// Screw conversion α = 2π/ρ (rad/m).
    pub alpha: f64,
}

impl EquivalentCoefficients {
    /// Motor angle per unit piston travel, α N_g N_p (rad/m).
    pub fn reduction(&self, d: &Drivetrain) -> f64 {
        self.alpha * d.gear_ratio * d.planetary_ratio
    }
}

/// Steady dq operating point of the motor.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ElectricalState {
    pub i_d: f64,
    pub i_q: f64,
    pub v_d: f64,
    pub v_q: f64,
    /// Line-to-line RMS voltage (V).
    pub v_ll: f64,
    /// Line RMS current (A).
    pub i_ll: f64,
    pub power_factor: f64,
    /// Mechanical rotor speed (rad/s).
    pub omega_m: f64,
}

impl ElectricalState {
    /// Three-phase input power `√3 V_LL I_LL cos φ` (W).
    pub fn power(&self) -> f64 {
        SQRT_3 * self.v_ll * self.i_ll * self.power_factor
    }
}

/// Efficiency at one load-side operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Efficiency {
    /// Power flows from the supply to the load: `P_mech / P_elec`.
    Motoring(f64),
    /// The load back-drives the actuator: `P_elec / P_mech`. Values ≤ 0
    /// mean the losses exceed the absorbed power and nothing is returned.
    Regenerating(f64),
    /// No mechanical power; efficiency is undefined.
    NoPower,
}

impl Efficiency {
    /// Integrand of the energy metric: `P/η` motoring, `P·η` regenerating.
    pub fn input_power(&self, mechanical_power: f64) -> f64 {
        match *self {
            Efficiency::Motoring(eta) => mechanical_power / eta,
            Efficiency::Regenerating(eta) => mechanical_power * eta,
            Efficiency::NoPower => 0.0,
        }
    }

    /// Efficiency in (0, 1], if defined.
    pub fn value(&self) -> Option<f64> {
        match *self {
            Efficiency::Motoring(eta) => Some(eta),
            Efficiency::Regenerating(eta) if eta > 0.0 => Some(eta),
            _ => None,
        }
    }
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl PmsmParams {
    pub fn validate(&self, field: &str) -> Result<()> {
        let check = |name: &str, v: f64, strict: bool| {
            let ok = v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(Error::validation(
                    format!("{field}.{name}"),
                    if strict { "must be > 0" } else { "must be ≥ 0" },
                ))
            }
        };
        check("resistance", self.resistance, false)?;
        check("l_d", self.l_d, true)?;
        check("l_q", self.l_q, true)?;
        check("flux_linkage", self.flux_linkage, true)?;
        if self.pole_pairs == 0 {
            return Err(Error::validation(format!("{field}.pole_pairs"), "must be ≥ 1"));
        }
        Ok(())
    }

    fn n_p(&self) -> f64 {
        f64::from(self.pole_pairs)
    }

    /// `τ = 3/2 n_p [i_q(i_d L_d + Ψ) − i_d i_q L_q]`.
    pub fn electromagnetic_torque(&self, i_d: f64, i_q: f64) -> f64 {
        1.5 * self.n_p() * (i_q * (i_d * self.l_d + self.flux_linkage) - i_d * i_q * self.l_q)
    }

    /// Steady dq operating point for torque `tau` at rotor speed `omega_m`.
    pub fn steady_state(&self, tau: f64, omega_m: f64) -> ElectricalState {
        let n_p = self.n_p();
        let i_d = 0.0;
        let i_q = tau / (1.5 * n_p * self.flux_linkage);
        let electrical_speed = n_p * omega_m;
        let v_d = self.resistance * i_d - electrical_speed * self.l_q * i_q;
        let v_q = self.resistance * i_q + electrical_speed * (i_d * self.l_d + self.flux_linkage);
        let v_peak = v_d.hypot(v_q);
        let i_peak = i_d.hypot(i_q);
        let power_factor = if v_peak > 0.0 && i_peak > 0.0 {
            ((v_d * i_d + v_q * i_q) / (v_peak * i_peak)).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        ElectricalState {
            i_d,
            i_q,
            v_d,
            v_q,
            v_ll: SQRT_3 * v_peak / SQRT_2,
            i_ll: i_peak / SQRT_2,
            power_factor,
            omega_m,
        }
    }
}

/// Free-function form of [`PmsmParams::steady_state`].
pub fn steady_state_electrical(m: &PmsmParams, tau_m: f64, omega_m: f64) -> ElectricalState {
    m.steady_state(tau_m, omega_m)
}

impl Drivetrain {
    pub fn validate(&self, field: &str) -> Result<()> {
        let nonneg = [
            ("screw_mass", self.screw_mass),
            ("motor_inertia", self.motor_inertia),
            ("planetary_inertia", self.planetary_inertia),
            ("gear_inertia", self.gear_inertia),
            ("screw_damping", self.screw_damping),
            ("motor_damping", self.motor_damping),
        ];
        if !(self.lead > 0.0 && self.lead.is_finite()) {
            return Err(Error::validation(format!("{field}.lead"), "must be > 0"));
        }
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{field}.{name}"), "must be ≥ 0"));
            }
        }
        for (name, v) in [("gear_ratio", self.gear_ratio), ("planetary_ratio", self.planetary_ratio)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::validation(format!("{field}.{name}"), "must be ≥ 1"));
            }
        }
        if let Some(k) = &self.stiffness {
            for (name, v) in [
                ("motor_planetary", k.motor_planetary),
                ("planetary_gear", k.planetary_gear),
                ("gear_screw", k.gear_screw),
                ("load", k.load),
            ] {
                if !(v > 0.0) {
                    return Err(Error::validation(format!("{field}.stiffness.{name}"), "must be > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn equivalent_coefficients(&self) -> Result<EquivalentCoefficients> {
        if !(self.lead > 0.0) {
            return Err(Error::validation("mechanics.lead", "screw lead must be > 0"));
        }
        let alpha = 2.0 * PI / self.lead;
        let (ng, np) = (self.gear_ratio, self.planetary_ratio);
        let mass = alpha
            * alpha
            * (self.screw_mass / (alpha * alpha)
                + self.gear_inertia
                + ng * ng * self.planetary_inertia
                + (ng * np).powi(2) * self.motor_inertia);
        let damping = self.screw_damping + (alpha * ng * np).powi(2) * self.motor_damping;
        let stiffness = match &self.stiffness {
            None => 0.0,
            Some(k) => {
                let compliance = 1.0 / ((np * ng).powi(2) * k.motor_planetary)
                    + 1.0 / (ng * ng * k.planetary_gear)
                    + 1.0 / k.gear_screw
                    + 1.0 / k.load;
                alpha * alpha / compliance
            }
        };
        Ok(EquivalentCoefficients {
            mass,
            damping,
            stiffness,
            alpha,
        })
    }
}

/// Free-function form of [`Drivetrain::equivalent_coefficients`].
pub fn equivalent_coefficients(p: &Drivetrain) -> Result<EquivalentCoefficients> {
    p.equivalent_coefficients()
}

impl LossModel {
    pub fn validate(&self, field: &str) -> Result<()> {
        for (name, v) in [
            ("hysteresis", self.hysteresis),
            ("eddy", self.eddy),
            ("coulomb", self.coulomb),
            ("viscous", self.viscous),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{field}.{name}"), "must be ≥ 0"));
            }
        }
        Ok(())
    }

    /// Iron loss seen as drag torque on the rotor (N·m).
    pub fn iron_torque(&self, omega_m: f64) -> f64 {
        self.hysteresis * signum0(omega_m) + self.eddy * omega_m
    }
}

/// Breakdown of steady losses at one operating point (W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBalance {
    pub mechanical: f64,
    pub copper: f64,
    pub iron: f64,
    pub friction: f64,
    pub electrical: ElectricalState,
}

impl PowerBalance {
    pub fn losses(&self) -> f64 {
        self.copper + self.iron + self.friction
    }
}

impl Emla {
    pub fn validate(&self, field: &str) -> Result<()> {
        self.pmsm.validate(&format!("{field}.pmsm"))?;
        self.mechanics.validate(&format!("{field}.mechanics"))?;
        self.loss.validate(&format!("{field}.loss"))
    }

    pub fn coefficients(&self) -> EquivalentCoefficients {
        self.mechanics
            .equivalent_coefficients()
            .expect("validated drivetrain has a positive lead")
    }

    /// Motor angle per unit piston travel (rad/m).
    pub fn reduction(&self) -> f64 {
        self.coefficients().reduction(&self.mechanics)
    }

    /// Required motor torque for load kinematics and load force `f_load`.
    ///
    /// The lumped equation `a_eq ẍ + b_eq ẋ + c_eq x + F_l` is a load-side
    /// force; dividing by α N_g N_p reflects it to the motor shaft. `x` is
    /// the piston displacement against the series compliance.
    pub fn motor_torque(&self, x: f64, x_dot: f64, x_ddot: f64, f_load: f64) -> f64 {
        let c = self.coefficients();
        let force = c.mass * x_ddot + c.damping * x_dot + c.stiffness * x + f_load;
        force / c.reduction(&self.mechanics)
    }

    /// Motor speed for piston speed `x_dot` (rad/s).
    pub fn motor_speed(&self, x_dot: f64) -> f64 {
        self.reduction() * x_dot
    }

    /// Steady operating point delivering force `f` at speed `v`.
    ///
    /// Friction and iron drag are added to the reflected load torque before
    /// solving for the stator current.
    pub fn operating_point(&self, f: f64, v: f64) -> PowerBalance {
        let c = self.coefficients();
        let k = c.reduction(&self.mechanics);
        let viscous = c.damping + self.loss.viscous;
        let friction_force = self.loss.coulomb * signum0(v) + viscous * v;
        let omega = k * v;
        let tau = (f + friction_force) / k + self.loss.iron_torque(omega);
        let electrical = self.pmsm.steady_state(tau, omega);
        PowerBalance {
            mechanical: f * v,
            copper: 1.5 * self.pmsm.resistance * electrical.i_q * electrical.i_q,
            iron: self.loss.iron_torque(omega) * omega,
            friction: friction_force * v,
            electrical,
        }
    }

    /// Loss-model efficiency at load force `f` and speed `v`.
    pub fn efficiency(&self, f: f64, v: f64) -> Efficiency {
        let balance = self.operating_point(f, v);
        let p = balance.mechanical;
        if p == 0.0 || !p.is_finite() {
            return Efficiency::NoPower;
        }
        let input = p + balance.losses();
        if p > 0.0 {
            Efficiency::Motoring(p / input)
        } else {
            Efficiency::Regenerating(input / p)
        }
    }

    /// Ratio of delivered to electrical power using `√3 V_LL I_LL cos φ`.
    pub fn electrical_efficiency(&self, f: f64, v: f64) -> Efficiency {
        let balance = self.operating_point(f, v);
        let p = balance.mechanical;
        let p_elec = balance.electrical.power();
        if p == 0.0 || !p.is_finite() {
            Efficiency::NoPower
        } else if p > 0.0 {
            if p_elec > 0.0 {
                Efficiency::Motoring(p / p_elec)
            } else {
                Efficiency::NoPower
            }
        } else {
            Efficiency::Regenerating(p_elec / p)
        }
    }

    /// Efficiency sampled on an `n_f × n_v` force/velocity grid.
    pub fn efficiency_map(
        &self,
        f_range: (f64, f64),
        v_range: (f64, f64),
        n_f: usize,
        n_v: usize,
    ) -> Result<EfficiencyMap> {
        if n_f == 0 || n_v == 0 {
            return Err(Error::validation("grid", "point counts must be positive"));
        }
        let forces = linspace(f_range, n_f);
        let velocities = linspace(v_range, n_v);
        let eta = DMatrix::from_fn(n_f, n_v, |i, j| match self.efficiency(forces[i], velocities[j]) {
            Efficiency::NoPower => f64::NAN,
            Efficiency::Motoring(e) | Efficiency::Regenerating(e) => e,
        });
        Ok(EfficiencyMap {
            forces,
            velocities,
            eta,
        })
    }
}

/// Efficiency over a force × velocity grid. Undefined points are NaN.
#[derive(Debug, Clone)]
pub struct EfficiencyMap {
    pub forces: Vec<f64>,
    pub velocities: Vec<f64>,
    /// Rows follow `forces`, columns follow `velocities`.
    pub eta: DMatrix<f64>,
}

fn linspace((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Free-function form of [`Emla::efficiency`].
pub fn efficiency(actuator: &Emla, f_x: f64, v_x: f64) -> Efficiency {
    actuator.efficiency(f_x, v_x)
}

/// Free-function form of [`Emla::efficiency_map`].
pub fn efficiency_map_grid(
    actuator: &Emla,
    f_range: (f64, f64),
    v_range: (f64, f64),
    n_f: usize,
    n_v: usize,
) -> Result<EfficiencyMap> {
    actuator.efficiency_map(f_range, v_range, n_f, n_v)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn lossless() -> Emla {
        Emla {
            name: "ideal".into(),
            pmsm: PmsmParams {
                resistance: 0.0,
                l_d: 1e-3,
                l_q: 1e-3,
                pole_pairs: 4,
                flux_linkage: 0.1,
            },
            mechanics: Drivetrain {
                lead: 0.01,
                screw_mass: 2.0,
                motor_inertia: 0.0,
                planetary_inertia: 0.0,
                gear_inertia: 0.0,
                gear_ratio: 1.0,
                planetary_ratio: 5.0,
                screw_damping: 0.0,
                motor_damping: 0.0,
                stiffness: None,
            },
            loss: LossModel::default(),
        }
    }

    pub(crate) fn lossy() -> Emla {
        let mut e = lossless();
        e.pmsm.resistance = 0.05;
        e.mechanics.motor_damping = 1e-5;
        e.loss = LossModel {
            hysteresis: 0.05,
            eddy: 2e-4,
            coulomb: 80.0,
            viscous: 500.0,
        };
        e
    }

    #[test]
    fn inertia_free_drivetrain() {
        let mut d = lossless().mechanics;
        d.screw_damping = 12.0;
        let c = d.equivalent_coefficients().unwrap();
        assert_relative_eq!(c.mass, 2.0, epsilon = 1e-12);
        assert_eq!(c.damping, 12.0);
    }

    #[test]
    fn alpha_from_lead() {
        let c = lossless().mechanics.equivalent_coefficients().unwrap();
        assert_relative_eq!(c.alpha, 628.318_530_717_958_6, epsilon = 1e-9);
    }

    #[test]
    fn series_stiffness() {
        let mut d = lossless().mechanics;
        d.lead = 2.0 * PI;
        d.planetary_ratio = 1.0;
        d.stiffness = Some(SeriesStiffness {
            motor_planetary: 4.0,
            planetary_gear: 4.0,
            gear_screw: 4.0,
            load: 4.0,
        });
        let c = d.equivalent_coefficients().unwrap();
        assert_relative_eq!(c.alpha, 1.0);
        assert_relative_eq!(c.stiffness, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_lead_rejected() {
        let mut d = lossless().mechanics;
        d.lead = 0.0;
        assert!(d.equivalent_coefficients().is_err());
        assert!(d.validate("m").is_err());
    }

    #[test]
    fn reflected_load_force() {
        let mut e = lossless();
        e.mechanics.screw_mass = 0.0;
        // α N_g N_p = 1000 rad/m
        e.mechanics.lead = 2.0 * PI / 200.0;
        assert_relative_eq!(e.reduction(), 1000.0, epsilon = 1e-9);
        assert_relative_eq!(e.motor_torque(0.0, 0.3, 1.0, 500.0), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn static_hold_reflects_load_only() {
        let e = lossy();
        let tau = e.motor_torque(0.0, 0.0, 0.0, 2000.0);
        assert_relative_eq!(tau, 2000.0 / e.reduction(), epsilon = 1e-12);
        assert_eq!(lossless().motor_torque(0.0, 0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn equal_inductances_cancel_reluctance_torque() {
        let m = lossless().pmsm;
        let tau = m.electromagnetic_torque(3.0, 10.0);
        assert_relative_eq!(tau, 1.5 * 4.0 * 0.1 * 10.0, epsilon = 1e-12);
    }

    #[test]
    fn current_from_torque() {
        let s = lossless().pmsm.steady_state(6.0, 0.0);
        assert_relative_eq!(s.i_q, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn standstill_voltage() {
        let mut m = lossless().pmsm;
        m.resistance = 0.5;
        let s = m.steady_state(6.0, 0.0);
        assert_eq!(s.v_d, 0.0);
        assert_relative_eq!(s.v_q, 5.0, epsilon = 1e-12);
        assert_relative_eq!(s.power_factor, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn idle_is_all_zero() {
        let s = lossy().pmsm.steady_state(0.0, 0.0);
        assert_eq!(s, ElectricalState::default());
    }

    #[test]
    fn lossless_is_unity() {
        let e = lossless();
        assert_eq!(e.efficiency(1000.0, 0.1), Efficiency::Motoring(1.0));
        match e.electrical_efficiency(1000.0, 0.1) {
            Efficiency::Motoring(eta) => assert_relative_eq!(eta, 1.0, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_definition() {
        // 100 W delivered, 25 W lost, all in Coulomb friction.
        let mut e = lossless();
        e.loss.coulomb = 250.0;
        match e.efficiency(1000.0, 0.1) {
            Efficiency::Motoring(eta) => assert_relative_eq!(eta, 0.8, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_power_has_no_efficiency() {
        assert_eq!(lossy().efficiency(1500.0, 0.0), Efficiency::NoPower);
        assert_eq!(lossy().efficiency(0.0, 0.2), Efficiency::NoPower);
    }

    #[test]
    fn single_point_lossless_map() {
        let map = lossless().efficiency_map((500.0, 900.0), (0.1, 0.2), 1, 1).unwrap();
        assert_eq!(map.eta.shape(), (1, 1));
        assert_eq!(map.eta[(0, 0)], 1.0);
    }

    #[test]
    fn map_shape() {
        let map = lossy().efficiency_map((-5e3, 5e3), (-0.2, 0.2), 7, 4).unwrap();
        assert_eq!(map.eta.shape(), (7, 4));
        assert!(lossy().efficiency_map((0.0, 1.0), (0.0, 1.0), 0, 3).is_err());
    }

    #[test]
    fn more_copper_means_lower_efficiency() {
        let mut e = lossy();
        let mut last = f64::INFINITY;
        for r in [0.0, 0.01, 0.05, 0.2, 1.0] {
            e.pmsm.resistance = r;
            let map = e.efficiency_map((3000.0, 3000.0), (0.15, 0.15), 1, 1).unwrap();
            assert!(map.eta[(0, 0)] < last);
            last = map.eta[(0, 0)];
        }
    }

    fn grid() -> impl Strategy<Value = (f64, f64)> {
        (-2e4..2e4f64, -0.3..0.3f64).prop_filter("nonzero power", |(f, v)| (f * v).abs() > 1e-3)
    }

    proptest! {
        #[test]
        fn torque_round_trip(tau in -50.0..50.0f64, omega in -400.0..400.0f64) {
            let m = lossy().pmsm;
            let s = m.steady_state(tau, omega);
            prop_assert!((m.electromagnetic_torque(s.i_d, s.i_q) - tau).abs() <= 1e-10);
        }

        #[test]
        fn lossy_efficiency_below_one((f, v) in grid()) {
            if f * v > 0.0 {
                match lossy().efficiency(f, v) {
                    Efficiency::Motoring(eta) => prop_assert!(eta > 0.0 && eta < 1.0),
                    other => prop_assert!(false, "{:?}", other),
                }
            }
        }

        #[test]
        fn electrical_power_covers_losses((f, v) in grid()) {
            let b = lossy().operating_point(f, v);
            if b.mechanical > 0.0 {
                prop_assert!(b.electrical.power() >= b.mechanical - 1e-9);
            }
            // both efficiency routes agree at steady state
            let input = b.mechanical + b.losses();
            prop_assert!((b.electrical.power() - input).abs() <= 1e-9 * input.abs().max(1.0));
        }

        #[test]
        fn efficiency_decreases_in_every_loss((f, v) in grid(), bump in 1e-3..1.0f64) {
            prop_assume!(f * v > 0.0);
            let base = lossy();
            let eta0 = base.efficiency(f, v).value().unwrap();
            let mut variants = vec![base.clone(); 5];
            variants[0].pmsm.resistance *= 1.0 + bump;
            variants[1].loss.hysteresis *= 1.0 + bump;
            variants[2].loss.eddy *= 1.0 + bump;
            variants[3].loss.coulomb *= 1.0 + bump;
            variants[4].loss.viscous *= 1.0 + bump;
            for e in variants {
                prop_assert!(e.efficiency(f, v).value().unwrap() < eta0);
            }
        }
    }
}
