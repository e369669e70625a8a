//! Rigid-body algebra: rotations, poses, the two subtraction rules used by the
//! action representations, the 6D rotation encoding, and path error metrics.
//!
//! Conventions: translations in millimeters, angles in radians. A [`Pose`]
//! `g = (p, R)` maps body-frame coordinates `x` to parent-frame coordinates
//! `R x + p`.

use nalgebra::{Matrix3, Vector3};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// 3-vector of f64, millimeters for translations.
pub type Vec3 = Vector3<f64>;

/// Max elementwise |RᵀR − I| (and |det R − 1|) accepted without repair.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Drift above [`ORTHONORMAL_TOL`] up to this bound is repaired by
/// Gram-Schmidt; anything beyond is rejected.
pub const REORTHONORMALIZE_TOL: f64 = 1e-6;
/// Gram-Schmidt normalization denominators at or below this are degenerate.
pub const DEGENERATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Se3Error {
    /// A 6D encoding column vanished or the two columns are collinear.
    #[error("DegenerateInput: 6d rotation encoding is degenerate (denominator {denominator:.3e})")]
    DegenerateInput { denominator: f64 },
    /// A matrix is too far from orthonormal to accept or repair.
    #[error("NotOrthonormal: deviation {deviation:.3e} exceeds repair bound {REORTHONORMALIZE_TOL:.0e}")]
    NotOrthonormal { deviation: f64 },
    #[error("NonFinite: {context} contains a non-finite component")]
    NonFinite { context: &'static str },
    #[error("LengthMismatch: paths have {left} and {right} points")]
    LengthMismatch { left: usize, right: usize },
    #[error("EmptyPath: rmse requires at least one point per path")]
    EmptyPath,
}

/// Rotation matrix in SO(3), stored as a full 3×3 matrix.
///
/// The wrapped matrix is guaranteed orthonormal with determinant +1; every
/// constructor either validates or produces such a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3(Matrix3<f64>);

/// Max elementwise |RᵀR − I|, combined with |det R − 1|.
pub fn orthonormality_deviation(m: &Matrix3<f64>) -> f64 {
    let gram = m.transpose() * m - Matrix3::identity();
    let max_off = gram.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    max_off.max((m.determinant() - 1.0).abs())
}

fn gram_schmidt_columns(c1_raw: Vec3, c2_raw: Vec3) -> Result<Matrix3<f64>, Se3Error> {
    let n1 = c1_raw.norm();
    if n1 <= DEGENERATE_TOL {
        return Err(Se3Error::DegenerateInput { denominator: n1 });
    }
    let c1 = c1_raw / n1;
    let u2 = c2_raw - c1 * c1.dot(&c2_raw);
    let n2 = u2.norm();
    if n2 <= DEGENERATE_TOL {
        return Err(Se3Error::DegenerateInput { denominator: n2 });
    }
    let c2 = u2 / n2;
    let c3 = c1.cross(&c2);
    Ok(Matrix3::from_columns(&[c1, c2, c3]))
}

impl Rotation3 {
    pub fn identity() -> Self {
        Rotation3(Matrix3::identity())
    }

    /// Validates `m` against the orthonormality tolerance; drift between
    /// [`ORTHONORMAL_TOL`] and [`REORTHONORMALIZE_TOL`] is repaired by
    /// Gram-Schmidt on the first two columns.
    pub fn from_matrix(m: Matrix3<f64>) -> Result<Self, Se3Error> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Se3Error::NonFinite {
                context: "rotation matrix",
            });
        }
        let deviation = orthonormality_deviation(&m);
        if deviation <= ORTHONORMAL_TOL {
            Ok(Rotation3(m))
        } else if deviation <= REORTHONORMALIZE_TOL {
            let repaired = gram_schmidt_columns(m.column(0).into(), m.column(1).into())?;
            Ok(Rotation3(repaired))
        } else {
            Err(Se3Error::NotOrthonormal { deviation })
        }
    }

    /// For internal products of already-valid rotations.
    pub(crate) fn from_matrix_unchecked(m: Matrix3<f64>) -> Self {
        Rotation3(m)
    }

    /// Rotation by `angle` radians about `axis` (normalized internally).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let unit = nalgebra::Unit::new_normalize(*axis);
        Rotation3(nalgebra::Rotation3::from_axis_angle(&unit, angle).into_inner())
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::z(), angle)
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation3(self.0.transpose())
    }

    /// Geodesic angle in radians between `self` and `other`.
    pub fn angle_to(&self, other: &Rotation3) -> f64 {
        let rel = self.0.transpose() * other.0;
        // atan2 of (|skew part|, trace part) stays well-conditioned at both
        // ends of [0, π], unlike plain acos.
        let sin = Vec3::new(
            rel[(2, 1)] - rel[(1, 2)],
            rel[(0, 2)] - rel[(2, 0)],
            rel[(1, 0)] - rel[(0, 1)],
        )
        .norm()
            / 2.0;
        let cos = (rel.trace() - 1.0) / 2.0;
        sin.atan2(cos)
    }

    /// First two columns of the matrix, the 6D rotation encoding.
    pub fn to_six_d(&self) -> Rot6D {
        let c1 = self.0.column(0);
        let c2 = self.0.column(1);
        Rot6D([c1[0], c1[1], c1[2], c2[0], c2[1], c2[2]])
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0 * v
    }
}

impl std::ops::Mul for Rotation3 {
    type Output = Rotation3;

    fn mul(self, rhs: Rotation3) -> Rotation3 {
        Rotation3(self.0 * rhs.0)
    }
}

impl Serialize for Rotation3 {
    fn serialize<S>(&self, serializer: S) -> Result<S::Ok, S::Error>
    where
        S: Serializer,
    {
        let m = &self.0;
        let rows: [[f64; 3]; 3] = [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ];
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Rotation3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = <[[f64; 3]; 3]>::deserialize(deserializer)?;
        let m = Matrix3::from_rows(&[
            Vector3::from(rows[0]).transpose(),
            Vector3::from(rows[1]).transpose(),
            Vector3::from(rows[2]).transpose(),
        ]);
        Rotation3::from_matrix(m).map_err(D::Error::custom)
    }
}

/// Six scalars: column one then column two of a rotation matrix.
///
/// Deliberately unvalidated; decoding via [`Rot6D::to_rotation`] tolerates
/// non-orthonormal inputs the way a network-output decoder must.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rot6D(pub [f64; 6]);

impl Rot6D {
    /// Gram-Schmidt the two encoded columns, then cross-product for the third.
    pub fn to_rotation(&self) -> Result<Rotation3, Se3Error> {
        let v = &self.0;
        let c1 = Vec3::new(v[0], v[1], v[2]);
        let c2 = Vec3::new(v[3], v[4], v[5]);
        gram_schmidt_columns(c1, c2).map(Rotation3)
    }
}

/// Rigid transform `g = (p, R)`: rotation then translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    /// Translation, millimeters, parent frame.
    pub position: Vec3,
    pub rotation: Rotation3,
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            position: Vec3::zeros(),
            rotation: Rotation3::identity(),
        }
    }

    pub fn new(position: Vec3, rotation: Rotation3) -> Result<Self, Se3Error> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Se3Error::NonFinite {
                context: "pose translation",
            });
        }
        Ok(Pose { position, rotation })
    }

    /// Pure translation.
    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Pose {
            position: Vec3::new(x, y, z),
            rotation: Rotation3::identity(),
        }
    }

    /// Pure rotation.
    pub fn from_rotation(rotation: Rotation3) -> Self {
        Pose {
            position: Vec3::zeros(),
            rotation,
        }
    }

    /// Group product: `self` then `other` in `self`'s body frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.rotation.rotate(&other.position),
            rotation: Rotation3::from_matrix_unchecked(
                self.rotation.matrix() * other.rotation.matrix(),
            ),
        }
    }

    /// Rigid inverse `(Rᵀ, −Rᵀp)`.
    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            position: -rt.rotate(&self.position),
            rotation: rt,
        }
    }

    pub fn transform_point(&self, point: &Vec3) -> Vec3 {
        self.rotation.rotate(point) + self.position
    }
}

/// Mixed-frame pose difference: translation delta in the shared parent
/// (camera) frame, rotation delta in the current body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridDelta {
    /// `p̂ − p`, parent frame, millimeters.
    pub translation: Vec3,
    /// `Rᵀ R̂`, current body frame.
    pub rotation: Rotation3,
}

impl HybridDelta {
    pub fn identity() -> Self {
        HybridDelta {
            translation: Vec3::zeros(),
            rotation: Rotation3::identity(),
        }
    }
}

/// Relative pose `Δ = current⁻¹ ∘ desired`, so `current ∘ Δ = desired`.
///
/// Both poses must be expressed in the same parent frame; the delta is then
/// independent of that frame.
pub fn subtract_se3(current: &Pose, desired: &Pose) -> Pose {
    current.inverse().compose(desired)
}

/// Mixed-frame difference `(p̂ − p, Rᵀ R̂)` of two same-parent poses.
pub fn subtract_hybrid(current: &Pose, desired: &Pose) -> HybridDelta {
    HybridDelta {
        translation: desired.position - current.position,
        rotation: Rotation3::from_matrix_unchecked(
            current.rotation.transpose().matrix() * desired.rotation.matrix(),
        ),
    }
}

/// Inverse of [`subtract_hybrid`]: `(p + dp, R·dR)`.
pub fn apply_hybrid(current: &Pose, delta: &HybridDelta) -> Pose {
    Pose {
        position: current.position + delta.translation,
        rotation: Rotation3::from_matrix_unchecked(
            current.rotation.matrix() * delta.rotation.matrix(),
        ),
    }
}

/// Root-mean-square Euclidean distance between corresponding points, mm.
pub fn rmse(path_a: &[Vec3], path_b: &[Vec3]) -> Result<f64, Se3Error> {
    if path_a.len() != path_b.len() {
        return Err(Se3Error::LengthMismatch {
            left: path_a.len(),
            right: path_b.len(),
        });
    }
    if path_a.is_empty() {
        return Err(Se3Error::EmptyPath);
    }
    let sum_sq: f64 = path_a
        .iter()
        .zip(path_b)
        .map(|(a, b)| (a - b).norm_squared())
        .sum();
    Ok((sum_sq / path_a.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use rand_distr::StandardNormal;

    fn sample_rotation(rng: &mut ChaCha12Rng) -> Rotation3 {
        let axis = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let angle: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        Rotation3::from_axis_angle(&axis, angle)
    }

    fn sample_pose(rng: &mut ChaCha12Rng) -> Pose {
        Pose {
            position: Vec3::new(
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
            ),
            rotation: sample_rotation(rng),
        }
    }

    fn pose_distance(a: &Pose, b: &Pose) -> f64 {
        let dp = (a.position - b.position).norm();
        let dr = (a.rotation.matrix() - b.rotation.matrix()).abs().max();
        dp.max(dr)
    }

    #[test]
    fn compose_identity_neutral() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let g = sample_pose(&mut rng);
        let id = Pose::identity();
        assert!(pose_distance(&id.compose(&g), &g) < 1e-15);
        assert!(pose_distance(&g.compose(&id), &g) < 1e-15);
    }

    #[test]
    fn compose_inverse_law() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let g = sample_pose(&mut rng);
            let left = g.compose(&g.inverse());
            let right = g.inverse().compose(&g);
            assert!(pose_distance(&left, &Pose::identity()) < 1e-9);
            assert!(pose_distance(&right, &Pose::identity()) < 1e-9);
        }
    }

    #[test]
    fn compose_pure_translations_add() {
        let a = Pose::from_translation(1.0, 0.0, 0.0);
        let b = Pose::from_translation(2.0, 0.0, 0.0);
        let c = a.compose(&b);
        // Tx(1mm) ∘ Tx(2mm) = Tx(3mm), computed by hand.
        assert_abs_diff_eq!(c.position.x, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.position.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.position.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn compose_associative() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b, c) = (
                sample_pose(&mut rng),
                sample_pose(&mut rng),
                sample_pose(&mut rng),
            );
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            assert!(pose_distance(&left, &right) < 1e-9);
        }
    }

    #[test]
    fn inverse_of_rot_z_is_negative_angle() {
        let quarter = std::f64::consts::FRAC_PI_2;
        let inv = Pose::from_rotation(Rotation3::rot_z(quarter)).inverse();
        let expected = Pose::from_rotation(Rotation3::rot_z(-quarter));
        assert!(pose_distance(&inv, &expected) < 1e-15);
    }

    #[test]
    fn subtract_se3_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let g = sample_pose(&mut rng);
            let desired = sample_pose(&mut rng);
            let delta = subtract_se3(&g, &desired);
            assert!(pose_distance(&g.compose(&delta), &desired) < 1e-9);
        }
        let g = sample_pose(&mut rng);
        assert!(pose_distance(&subtract_se3(&g, &g), &Pose::identity()) < 1e-9);
        assert!(pose_distance(&subtract_se3(&Pose::identity(), &g), &g) < 1e-15);
    }

    #[test]
    fn subtract_se3_left_invariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..500 {
            let t = sample_pose(&mut rng);
            let g = sample_pose(&mut rng);
            let d = sample_pose(&mut rng);
            let plain = subtract_se3(&g, &d);
            let moved = subtract_se3(&t.compose(&g), &t.compose(&d));
            assert!(pose_distance(&plain, &moved) < 1e-9);
        }
    }

    #[test]
    fn subtract_hybrid_identities() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let g = sample_pose(&mut rng);
        let d = subtract_hybrid(&g, &g);
        assert!(d.translation.norm() < 1e-15);
        assert!(d.rotation.angle_to(&Rotation3::identity()) < 1e-9);

        let t = Pose::from_translation(3.0, -1.0, 2.0);
        let d = subtract_hybrid(&Pose::identity(), &t);
        assert_abs_diff_eq!(d.translation.x, 3.0, epsilon = 1e-15);
        assert!(d.rotation.angle_to(&Rotation3::identity()) < 1e-15);
    }

    #[test]
    fn hybrid_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let g = sample_pose(&mut rng);
            let desired = sample_pose(&mut rng);
            let delta = subtract_hybrid(&g, &desired);
            assert!(pose_distance(&apply_hybrid(&g, &delta), &desired) < 1e-9);
        }
        let g = sample_pose(&mut rng);
        assert!(pose_distance(&apply_hybrid(&g, &HybridDelta::identity()), &g) < 1e-15);
    }

    #[test]
    fn hybrid_rotation_left_invariant_translation_equivariant() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..500 {
            let t = sample_pose(&mut rng);
            let g = sample_pose(&mut rng);
            let d = sample_pose(&mut rng);
            let plain = subtract_hybrid(&g, &d);
            let moved = subtract_hybrid(&t.compose(&g), &t.compose(&d));
            // dR is invariant; dp rotates with T's rotation.
            assert!(plain.rotation.angle_to(&moved.rotation) < 1e-9);
            let rotated = t.rotation.rotate(&plain.translation);
            assert!((rotated - moved.translation).norm() < 1e-9);
        }
    }

    #[test]
    fn six_d_of_identity() {
        let v = Rotation3::identity().to_six_d();
        assert_eq!(v.0, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn six_d_of_rot_z_quarter_turn() {
        // Rz(90°) columns: (0,1,0) and (−1,0,0), by hand.
        let v = Rotation3::rot_z(std::f64::consts::FRAC_PI_2).to_six_d();
        let expected = [0.0, 1.0, 0.0, -1.0, 0.0, 0.0];
        for (got, want) in v.0.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn six_d_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let r = sample_rotation(&mut rng);
            let back = r.to_six_d().to_rotation().unwrap();
            assert!(r.angle_to(&back) < 1e-9);
        }
    }

    #[test]
    fn six_d_decode_normalizes_scale() {
        let r = Rot6D([2.0, 0.0, 0.0, 0.0, 3.0, 0.0]).to_rotation().unwrap();
        assert!(r.angle_to(&Rotation3::identity()) < 1e-15);
        let r = Rot6D([1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).to_rotation().unwrap();
        assert!(r.angle_to(&Rotation3::identity()) < 1e-15);
    }

    #[test]
    fn six_d_decode_of_noisy_encoding_is_orthonormal() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..1000 {
            let mut v = sample_rotation(&mut rng).to_six_d();
            for x in v.0.iter_mut() {
                *x += rng.random_range(-1e-3..1e-3);
            }
            let r = v.to_rotation().unwrap();
            assert!(orthonormality_deviation(r.matrix()) < 1e-12);
        }
    }

    #[test]
    fn six_d_degenerate_inputs_error() {
        let zero = Rot6D([0.0; 6]);
        assert!(matches!(
            zero.to_rotation(),
            Err(Se3Error::DegenerateInput { .. })
        ));
        let collinear = Rot6D([1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            collinear.to_rotation(),
            Err(Se3Error::DegenerateInput { .. })
        ));
    }

    #[test]
    fn rotation_constructor_validates_and_repairs() {
        // Clean matrix passes through untouched.
        let clean = Rotation3::rot_y(0.3);
        let again = Rotation3::from_matrix(*clean.matrix()).unwrap();
        assert_eq!(clean.matrix(), again.matrix());

        // Drift inside the repair band is re-orthonormalized.
        let mut drifted = *clean.matrix();
        drifted[(0, 0)] += 5e-8;
        let repaired = Rotation3::from_matrix(drifted).unwrap();
        assert!(orthonormality_deviation(repaired.matrix()) < 1e-12);

        // Beyond the repair band is rejected.
        let mut broken = *clean.matrix();
        broken[(0, 0)] += 0.1;
        assert!(matches!(
            Rotation3::from_matrix(broken),
            Err(Se3Error::NotOrthonormal { .. })
        ));

        // Reflections (det −1) are rejected, not repaired.
        let mut reflect = Matrix3::identity();
        reflect[(2, 2)] = -1.0;
        assert!(matches!(
            Rotation3::from_matrix(reflect),
            Err(Se3Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn rmse_hand_values() {
        let origin = vec![Vec3::zeros()];
        let offset = vec![Vec3::new(3.0, 4.0, 0.0)];
        // 3-4-5 triangle.
        assert_abs_diff_eq!(rmse(&origin, &offset).unwrap(), 5.0, epsilon = 1e-12);

        let a = vec![Vec3::zeros(), Vec3::zeros()];
        let b = vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(7.0, 0.0, 0.0)];
        // sqrt((1 + 49) / 2) = 5.
        assert_abs_diff_eq!(rmse(&a, &b).unwrap(), 5.0, epsilon = 1e-12);

        assert_abs_diff_eq!(rmse(&a, &a).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rmse_symmetric_and_errors() {
        let a = vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 2.0)];
        let b = vec![Vec3::new(0.0, 1.0, 3.5), Vec3::new(2.0, -1.0, 0.0)];
        assert_abs_diff_eq!(
            rmse(&a, &b).unwrap(),
            rmse(&b, &a).unwrap(),
            epsilon = 1e-15
        );
        assert!(matches!(
            rmse(&a, &b[..1]),
            Err(Se3Error::LengthMismatch { left: 2, right: 1 })
        ));
        assert!(matches!(rmse(&[], &[]), Err(Se3Error::EmptyPath)));
    }

    #[test]
    fn pose_rejects_non_finite_translation() {
        let bad = Pose::new(
            Vec3::new(f64::NAN, 0.0, 0.0),
            Rotation3::identity(),
        );
        assert!(matches!(bad, Err(Se3Error::NonFinite { .. })));
    }

    #[test]
    fn rotation_serde_round_trip_validates() {
        let r = Rotation3::rot_x(1.1) * Rotation3::rot_z(-0.4);
        let json = serde_json::to_string(&r).unwrap();
        let back: Rotation3 = serde_json::from_str(&json).unwrap();
        assert_eq!(r.matrix(), back.matrix());

        let bad = "[[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.5,1.0]]";
        assert!(serde_json::from_str::<Rotation3>(bad).is_err());
    }
}
