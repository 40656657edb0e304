use super::{Landmarks, Result, TriMesh};
use crate::{Mat3, Vec3};

/// Rigid motion `x -> rotation * x + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Canonical face frame: eye midpoint at the origin, left→right eye along +x,
/// nose tip in the x–z half-plane with positive z.
pub fn alignment_transform(mesh: &TriMesh, lm: &Landmarks) -> Result<RigidTransform> {
    let v = mesh.vertices();
    lm.validate(v)?;
    let (nose, left, right) = (v[lm.nose_tip], v[lm.left_eye], v[lm.right_eye]);
    let mid = (left + right) / 2.0;
    let x = (right - left).normalize();
    let to_nose = nose - mid;
    let z = (to_nose - x * to_nose.dot(&x)).normalize();
    let y = z.cross(&x);
    let rotation = Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
    Ok(RigidTransform { rotation, translation: -(rotation * mid) })
}

/// Rigidly moves the mesh into the canonical landmark frame.
pub fn landmark_align(mesh: &TriMesh, lm: &Landmarks) -> Result<TriMesh> {
    let t = alignment_transform(mesh, lm)?;
    Ok(mesh.transformed(&t.rotation, &t.translation))
}
