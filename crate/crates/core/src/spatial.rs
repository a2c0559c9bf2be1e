//! Rigid-body transforms and 6-D spatial vectors.
//!
//! Every 6-vector in this crate is stored angular part first, linear part
//! second: twists are `(ω, v)` and wrenches are `(n, f)`. [`ANGULAR`] and
//! [`LINEAR`] name the two halves; use them instead of literal index ranges.

use std::ops::{Add, Range};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

/// Index range of the angular half of a twist or wrench.
pub const ANGULAR: Range<usize> = 0..3;
/// Index range of the linear half of a twist or wrench.
pub const LINEAR: Range<usize> = 3..6;

/// Orthonormality residual above which [`Transform::compose`] re-projects
/// the rotation onto SO(3).
pub const REORTHONORMALIZE_THRESHOLD: f64 = 1e-10;

/// Skew-symmetric cross-product matrix: `skew(a) * b == a × b`.
pub fn skew(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Homogeneous transform in SE(3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    /// Rotation of `angle` radians about the unit vector `axis` (Rodrigues).
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let k = skew(axis);
        let rotation = Matrix3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos());
        Self::new(rotation, Vector3::zeros())
    }

    /// Largest entry of `RᵀR − I`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).amax()
    }

    /// True when the rotation is orthonormal with unit determinant (1e-12).
    pub fn is_valid(&self) -> bool {
        self.orthonormality_error() <= 1e-12
            && (self.rotation.determinant() - 1.0).abs() <= 1e-12
            && self.translation.iter().all(|v| v.is_finite())
    }

    /// `self` followed by `other`: `R = R_a R_b`, `t = R_a t_b + t_a`.
    ///
    /// The rotation is re-orthonormalized whenever accumulated rounding
    /// pushes it past [`REORTHONORMALIZE_THRESHOLD`].
    pub fn compose(&self, other: &Transform) -> Transform {
        let mut out = Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        };
        if out.orthonormality_error() > REORTHONORMALIZE_THRESHOLD {
            out.reorthonormalize();
        }
        out
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Projects the rotation back onto SO(3) with Gram-Schmidt on its columns.
    pub fn reorthonormalize(&mut self) {
        let c0 = self.rotation.column(0).normalize();
        let c1 = self.rotation.column(1);
        let c1 = (c1 - c0 * c0.dot(&c1)).normalize();
        let c2 = c0.cross(&c1);
        self.rotation = Matrix3::from_columns(&[c0, c1, c2]);
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// 6×6 adjoint `[[R, 0], [[t]× R, R]]`, mapping twists expressed in the
    /// child frame to the parent frame.
    pub fn adjoint(&self) -> Matrix6<f64> {
        let r = self.rotation;
        let mut ad = Matrix6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
        ad.fixed_view_mut::<3, 3>(3, 0)
            .copy_from(&(skew(&self.translation) * r));
        ad
    }

    /// Matrix exponential of a unit screw scaled by `theta`.
    ///
    /// Accepts revolute screws (`‖ω‖ = 1`) and prismatic screws
    /// (`ω = 0`, `‖v‖ = 1`).
    pub fn exp(screw: &Twist, theta: f64) -> Transform {
        let w = screw.angular;
        let v = screw.linear;
        if w.norm_squared() == 0.0 {
            return Transform::from_translation(v * theta);
        }
        let k = skew(&w);
        let k2 = k * k;
        let (s, c) = theta.sin_cos();
        let rotation = Matrix3::identity() + k * s + k2 * (1.0 - c);
        let g = Matrix3::identity() * theta + k * (1.0 - c) + k2 * (theta - s);
        Transform::new(rotation, g * v)
    }
}

/// Spatial velocity, angular part first.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Twist {
    pub angular: Vector3<f64>,
    pub linear: Vector3<f64>,
}

impl Twist {
    pub fn new(angular: Vector3<f64>, linear: Vector3<f64>) -> Self {
        Self { angular, linear }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut out = Vector6::zeros();
        out.rows_mut(ANGULAR.start, 3).copy_from(&self.angular);
        out.rows_mut(LINEAR.start, 3).copy_from(&self.linear);
        out
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            angular: v.fixed_rows::<3>(ANGULAR.start).into_owned(),
            linear: v.fixed_rows::<3>(LINEAR.start).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.angular.iter().chain(self.linear.iter()).all(|v| v.is_finite())
    }
}

/// Force/moment pair, moment first.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Wrench {
    pub moment: Vector3<f64>,
    pub force: Vector3<f64>,
}

impl Wrench {
    pub fn new(moment: Vector3<f64>, force: Vector3<f64>) -> Self {
        Self { moment, force }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut out = Vector6::zeros();
        out.rows_mut(ANGULAR.start, 3).copy_from(&self.moment);
        out.rows_mut(LINEAR.start, 3).copy_from(&self.force);
        out
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            moment: v.fixed_rows::<3>(ANGULAR.start).into_owned(),
            force: v.fixed_rows::<3>(LINEAR.start).into_owned(),
        }
    }

    /// Power delivered by this wrench acting on `twist`.
    pub fn power(&self, twist: &Twist) -> f64 {
        self.moment.dot(&twist.angular) + self.force.dot(&twist.linear)
    }
}

/// Lie bracket operator `ad_s = [[ [ω]×, 0 ], [ [v]×, [ω]× ]]`.
pub fn ad_bracket(s: &Twist) -> Matrix6<f64> {
    let w = skew(&s.angular);
    let mut ad = Matrix6::zeros();
    ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&w);
    ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&w);
    ad.fixed_view_mut::<3, 3>(3, 0).copy_from(&skew(&s.linear));
    ad
}

/// Mass properties of a rigid link, expressed in the link frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialInertia {
    pub mass: f64,
    pub center_of_mass: Vector3<f64>,
    /// Rotational inertia about the link frame origin (not the COM).
    pub rotational_inertia: Matrix3<f64>,
}

impl Default for SpatialInertia {
    fn default() -> Self {
        Self::zero()
    }
}

impl SpatialInertia {
    pub fn zero() -> Self {
        Self {
            mass: 0.0,
            center_of_mass: Vector3::zeros(),
            rotational_inertia: Matrix3::zeros(),
        }
    }

    /// Point mass located at `position` in the link frame.
    pub fn point_mass(mass: f64, position: Vector3<f64>) -> Self {
        let rotational_inertia =
            (Matrix3::identity() * position.norm_squared() - position * position.transpose())
                * mass;
        Self {
            mass,
            center_of_mass: position,
            rotational_inertia,
        }
    }

    /// Builds the inertia from COM-centred inertia via the parallel-axis theorem.
    pub fn from_com_inertia(mass: f64, center_of_mass: Vector3<f64>, com_inertia: Matrix3<f64>) -> Self {
        let shift = Self::point_mass(mass, center_of_mass);
        Self {
            mass,
            center_of_mass,
            rotational_inertia: com_inertia + shift.rotational_inertia,
        }
    }

    pub fn first_moment(&self) -> Vector3<f64> {
        self.center_of_mass * self.mass
    }

    /// 6×6 matrix `[[I_o, m[c]×], [m[c]×ᵀ, m·1]]` in (angular, linear) order.
    pub fn to_matrix(&self) -> Matrix6<f64> {
        let mc = skew(&self.first_moment());
        let mut g = Matrix6::zeros();
        g.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotational_inertia);
        g.fixed_view_mut::<3, 3>(0, 3).copy_from(&mc);
        g.fixed_view_mut::<3, 3>(3, 0).copy_from(&mc.transpose());
        g.fixed_view_mut::<3, 3>(3, 3)
            .copy_from(&(Matrix3::identity() * self.mass));
        g
    }

    /// Checks mass ≥ 0, symmetry (1e-12) and positive semidefiniteness.
    pub fn is_valid(&self) -> bool {
        let i = &self.rotational_inertia;
        if !(self.mass >= 0.0) || (i - i.transpose()).amax() > 1e-12 {
            return false;
        }
        let eig = i.symmetric_eigenvalues();
        let scale = i.amax().max(1.0);
        eig.iter().all(|&e| e >= -1e-12 * scale)
    }
}

impl Add for SpatialInertia {
    type Output = SpatialInertia;

    fn add(self, rhs: SpatialInertia) -> SpatialInertia {
        let mass = self.mass + rhs.mass;
        let first = self.first_moment() + rhs.first_moment();
        let center_of_mass = if mass > 0.0 { first / mass } else { Vector3::zeros() };
        SpatialInertia {
            mass,
            center_of_mass,
            rotational_inertia: self.rotational_inertia + rhs.rotational_inertia,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn arb_unit() -> impl Strategy<Value = Vector3<f64>> {
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("non-degenerate", |(x, y, z)| x * x + y * y + z * z > 1e-2)
            .prop_map(|(x, y, z)| Vector3::new(x, y, z).normalize())
    }

    fn arb_transform() -> impl Strategy<Value = Transform> {
        (arb_unit(), -3.0..3.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(
            |(axis, angle, x, y, z)| {
                let mut t = Transform::from_axis_angle(&axis, angle);
                t.translation = Vector3::new(x, y, z);
                t
            },
        )
    }

    fn arb_twist() -> impl Strategy<Value = Twist> {
        prop::array::uniform6(-5.0..5.0f64)
            .prop_map(|a| Twist::from_vector(&Vector6::from_row_slice(&a)))
    }

    #[test]
    fn compose_identity() {
        let id = Transform::identity();
        assert_eq!(id.compose(&id), id);
    }

    #[test]
    fn compose_pure_translations_add() {
        let a = Transform::from_translation(Vector3::new(1.0, 0.0, 0.0));
        let b = Transform::from_translation(Vector3::new(0.0, 2.0, 0.0));
        let c = a.compose(&b);
        assert_eq!(c.rotation, Matrix3::identity());
        assert_eq!(c.translation, Vector3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn adjoint_of_identity_is_identity() {
        assert_eq!(Transform::identity().adjoint(), Matrix6::identity());
    }

    #[test]
    fn adjoint_moves_rotation_axis() {
        let g = Transform::from_translation(Vector3::new(1.0, 0.0, 0.0));
        let s = Twist::new(Vector3::z(), Vector3::zeros());
        let out = Twist::from_vector(&(g.adjoint() * s.to_vector()));
        assert_relative_eq!(out.angular, Vector3::z());
        assert_relative_eq!(out.linear, Vector3::new(0.0, -1.0, 0.0));
    }

    #[test]
    fn bracket_of_zero_is_zero() {
        assert_eq!(ad_bracket(&Twist::zero()), Matrix6::zeros());
    }

    #[test]
    fn bracket_cross_product() {
        let s = Twist::new(Vector3::z(), Vector3::zeros());
        let x = Twist::new(Vector3::zeros(), Vector3::x());
        let out = Twist::from_vector(&(ad_bracket(&s) * x.to_vector()));
        assert_relative_eq!(out.angular, Vector3::zeros());
        assert_relative_eq!(out.linear, Vector3::y());
    }

    #[test]
    fn long_composition_chain_stays_orthonormal() {
        let step = Transform::from_axis_angle(&Vector3::new(1.0, 2.0, 3.0).normalize(), 0.1234567);
        let mut g = Transform::identity();
        for _ in 0..1_000_000 {
            g = g.compose(&step);
        }
        assert!(g.orthonormality_error() < 1e-9);
        assert!((g.rotation.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exp_matches_pure_rotation_about_offset_axis() {
        // Axis along z through (1, 0, 0): v = -ω × p.
        let p = Vector3::new(1.0, 0.0, 0.0);
        let s = Twist::new(Vector3::z(), -Vector3::z().cross(&p));
        let g = Transform::exp(&s, std::f64::consts::PI);
        assert_relative_eq!(g.transform_point(&Vector3::zeros()), Vector3::new(2.0, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn point_mass_parallel_axis() {
        let pm = SpatialInertia::point_mass(10.0, Vector3::new(0.0, 0.0, 1.0));
        assert_relative_eq!(pm.rotational_inertia, Matrix3::from_diagonal(&Vector3::new(10.0, 10.0, 0.0)));
    }

    proptest! {
        #[test]
        fn compose_with_inverse_is_identity(g in arb_transform()) {
            let id = g.compose(&g.inverse());
            prop_assert!((id.rotation - Matrix3::identity()).amax() < 1e-12);
            prop_assert!(id.translation.amax() < 1e-12);
        }

        #[test]
        fn adjoint_is_homomorphism(a in arb_transform(), b in arb_transform()) {
            let lhs = a.compose(&b).adjoint();
            let rhs = a.adjoint() * b.adjoint();
            prop_assert!((lhs - rhs).amax() < 1e-10);
        }

        #[test]
        fn adjoint_of_inverse_is_inverse(g in arb_transform()) {
            let prod = g.inverse().adjoint() * g.adjoint();
            prop_assert!((prod - Matrix6::identity()).amax() < 1e-10);
        }

        #[test]
        fn bracket_annihilates_own_twist(s in arb_twist()) {
            let out = ad_bracket(&s) * s.to_vector();
            prop_assert!(out.amax() < 1e-12);
        }

        #[test]
        fn composed_transforms_stay_valid(a in arb_transform(), b in arb_transform()) {
            prop_assert!(a.compose(&b).is_valid());
        }
    }
}
