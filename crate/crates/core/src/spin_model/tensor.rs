use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bohr magneton over Planck's constant, in Hz per Gauss (13.996 GHz/T).
pub const BOHR_MAGNETON_HZ_PER_GAUSS: f64 = 1.399_624_5e6;

const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric, positive-definite Zeeman response tensor of one doublet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GTensorSpec", into = "GTensorSpec")]
pub struct GTensor {
    matrix: Matrix3<f64>,
    principal_values: [f64; 3],
}

/// File representation: either principal values plus ZYZ Euler angles in
/// degrees, or the full matrix in the crystal frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GTensorSpec {
    Principal {
        principal_values: [f64; 3],
        #[serde(default)]
        euler_deg: [f64; 3],
    },
    Matrix {
        matrix: [[f64; 3]; 3],
    },
}

impl TryFrom<GTensorSpec> for GTensor {
    type Error = Error;

    fn try_from(spec: GTensorSpec) -> Result<Self> {
        match spec {
            GTensorSpec::Principal {
                principal_values,
                euler_deg,
            } => GTensor::from_principal(principal_values, euler_deg.map(f64::to_radians)),
            GTensorSpec::Matrix { matrix } => GTensor::from_matrix(matrix),
        }
    }
}

impl From<GTensor> for GTensorSpec {
    fn from(g: GTensor) -> Self {
        let m = g.matrix;
        GTensorSpec::Matrix {
            matrix: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
        }
    }
}

/// Rotation `Rz(alpha) Ry(beta) Rz(gamma)`.
fn euler_zyz(angles: [f64; 3]) -> Matrix3<f64> {
    let rz = |a: f64| {
        let (s, c) = a.sin_cos();
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    };
    let (s, c) = angles[1].sin_cos();
    let ry = Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c);
    rz(angles[0]) * ry * rz(angles[2])
}

fn sorted(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(f64::total_cmp);
    v
}

impl GTensor {
    /// Builds `R diag(principal_values) Rᵀ` with `R` the ZYZ rotation given
    /// by `euler_rad`.
    pub fn from_principal(principal_values: [f64; 3], euler_rad: [f64; 3]) -> Result<Self> {
        if principal_values.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(Error::invalid(
                "g-tensor",
                format!("principal values must be positive, got {principal_values:?}"),
            ));
        }
        let r = euler_zyz(euler_rad);
        let d = Matrix3::from_diagonal(&Vector3::from(principal_values));
        let mut matrix = r * d * r.transpose();
        // exact symmetry
        matrix = (matrix + matrix.transpose()) * 0.5;
        Ok(Self {
            matrix,
            principal_values: sorted(principal_values),
        })
    }

    pub fn from_matrix(rows: [[f64; 3]; 3]) -> Result<Self> {
        let matrix = Matrix3::from_fn(|i, j| rows[i][j]);
        let scale = matrix.abs().max().max(1.0);
        if (matrix - matrix.transpose()).abs().max() > SYMMETRY_TOL * scale {
            return Err(Error::invalid("g-tensor", "matrix is not symmetric"));
        }
        let matrix = (matrix + matrix.transpose()) * 0.5;
        let eig = SymmetricEigen::new(matrix);
        let values = sorted([eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]]);
        if values[0] <= 0.0 || !values.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(
                "g-tensor",
                format!("principal values must be positive, got {values:?}"),
            ));
        }
        Ok(Self {
            matrix,
            principal_values: values,
        })
    }

    pub fn isotropic(g: f64) -> Result<Self> {
        Self::from_principal([g; 3], [0.0; 3])
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    /// Principal values in ascending order.
    pub fn principal_values(&self) -> [f64; 3] {
        self.principal_values
    }

    /// Effective field `g·b` seen by the spin for a field along `b`.
    pub fn effective_field(&self, b: &Vector3<f64>) -> Vector3<f64> {
        self.matrix * b
    }

    /// Zeeman splitting in Hz for `field`.
    pub fn splitting(&self, field: &FieldOrientation) -> f64 {
        BOHR_MAGNETON_HZ_PER_GAUSS
            * field.magnitude_gauss
            * self.effective_field(&field.direction()).norm()
    }
}

/// Magnetic field direction and strength. `phi` is the azimuth in the
/// crystal x-y plane, `theta` the polar angle from z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOrientation")]
pub struct FieldOrientation {
    pub phi_deg: f64,
    pub theta_deg: f64,
    #[serde(default)]
    pub magnitude_gauss: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrientation {
    phi_deg: f64,
    theta_deg: f64,
    #[serde(default = "unit_field")]
    magnitude_gauss: f64,
}

fn unit_field() -> f64 {
    1.0
}

impl TryFrom<RawOrientation> for FieldOrientation {
    type Error = Error;

    fn try_from(raw: RawOrientation) -> Result<Self> {
        FieldOrientation::new(raw.phi_deg, raw.theta_deg, raw.magnitude_gauss)
    }
}

impl FieldOrientation {
    /// Normalizes the angles to `phi ∈ [0, 360)`, `theta ∈ [0, 180]`.
    pub fn new(phi_deg: f64, theta_deg: f64, magnitude_gauss: f64) -> Result<Self> {
        if !(phi_deg.is_finite() && theta_deg.is_finite()) {
            return Err(Error::invalid("orientation", "angles must be finite"));
        }
        if !(magnitude_gauss.is_finite() && magnitude_gauss >= 0.0) {
            return Err(Error::invalid(
                "orientation",
                format!("field magnitude must be >= 0, got {magnitude_gauss}"),
            ));
        }
        let mut theta = theta_deg.rem_euclid(360.0);
        let mut phi = phi_deg;
        if theta > 180.0 {
            theta = 360.0 - theta;
            phi += 180.0;
        }
        let mut phi = phi.rem_euclid(360.0);
        if phi >= 360.0 {
            phi = 0.0;
        }
        Ok(Self {
            phi_deg: phi,
            theta_deg: theta,
            magnitude_gauss,
        })
    }

    /// Unit-magnitude orientation, for quantities that only depend on the
    /// field direction.
    pub fn angles(phi_deg: f64, theta_deg: f64) -> Result<Self> {
        Self::new(phi_deg, theta_deg, 1.0)
    }

    pub fn with_magnitude(self, magnitude_gauss: f64) -> Result<Self> {
        Self::new(self.phi_deg, self.theta_deg, magnitude_gauss)
    }

    pub fn direction(&self) -> Vector3<f64> {
        let (sp, cp) = self.phi_deg.to_radians().sin_cos();
        let (st, ct) = self.theta_deg.to_radians().sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Angle between the two field directions, in degrees.
    pub fn angle_to(&self, other: &FieldOrientation) -> f64 {
        self.direction()
            .dot(&other.direction())
            .clamp(-1.0, 1.0)
            .acos()
            .to_degrees()
    }
}

/// Ground and excited doublet tensors of one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorPair {
    pub ground: GTensor,
    pub excited: GTensor,
}

/// Optical lines between the Zeeman-split doublets. A (↑g↔↑e) and
/// B (↓g↔↓e) conserve the spin; C (↓g↔↑e) and D (↑g↔↓e) flip it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionFrequencies {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

pub fn transition_frequencies(
    g_ground: &GTensor,
    g_excited: &GTensor,
    field: &FieldOrientation,
    f0: f64,
) -> TransitionFrequencies {
    let dg = g_ground.splitting(field);
    let de = g_excited.splitting(field);
    TransitionFrequencies {
        a: f0 + 0.5 * (de - dg),
        b: f0 - 0.5 * (de - dg),
        c: f0 + 0.5 * (de + dg),
        d: f0 - 0.5 * (de + dg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn principal_construction_has_requested_eigenvalues() {
        let g = GTensor::from_principal([14.65, 1.80, 0.56], [0.3, 1.1, -0.7]).unwrap();
        let m = g.matrix();
        assert!((m - m.transpose()).abs().max() < 1e-12);
        let eig = SymmetricEigen::new(*m);
        let vals = sorted([eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]]);
        for (a, b) in vals.iter().zip([0.56, 1.80, 14.65]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_nonpositive_and_asymmetric() {
        assert!(GTensor::from_principal([1.0, 0.0, 2.0], [0.0; 3]).is_err());
        assert!(GTensor::from_matrix([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }

    #[test]
    fn orientation_normalization() {
        let o = FieldOrientation::new(-90.0, 200.0, 5.0).unwrap();
        assert!((o.theta_deg - 160.0).abs() < 1e-12);
        assert!((o.phi_deg - 90.0).abs() < 1e-12);
        let raw = FieldOrientation::new(-90.0, 200.0, 5.0)
            .unwrap()
            .direction();
        let (sp, cp) = (-90f64).to_radians().sin_cos();
        let (st, ct) = 200f64.to_radians().sin_cos();
        let expected = Vector3::new(st * cp, st * sp, ct);
        assert!((raw - expected).norm() < 1e-12);
        assert!(FieldOrientation::new(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn zero_field_lines_are_degenerate() {
        let g = GTensor::from_principal([3.0, 2.0, 1.0], [0.1, 0.2, 0.3]).unwrap();
        let e = GTensor::isotropic(2.0).unwrap();
        let f = FieldOrientation::new(30.0, 40.0, 0.0).unwrap();
        let t = transition_frequencies(&g, &e, &f, 195e12);
        assert_eq!([t.a, t.b, t.c, t.d], [195e12; 4]);
    }

    #[test]
    fn doubling_field_doubles_offsets() {
        let g = GTensor::from_principal([3.0, 2.0, 1.0], [0.1, 0.2, 0.3]).unwrap();
        let e = GTensor::from_principal([5.0, 1.0, 0.5], [0.4, 0.2, 0.3]).unwrap();
        let f0 = 1.0e9;
        let f1 = FieldOrientation::new(30.0, 40.0, 10.0).unwrap();
        let f2 = f1.with_magnitude(20.0).unwrap();
        let t1 = transition_frequencies(&g, &e, &f1, f0);
        let t2 = transition_frequencies(&g, &e, &f2, f0);
        for (x1, x2) in [(t1.a, t2.a), (t1.b, t2.b), (t1.c, t2.c), (t1.d, t2.d)] {
            assert!(((x2 - f0) - 2.0 * (x1 - f0)).abs() < 1e-6);
        }
    }

    #[test]
    fn spec_roundtrip_json() {
        let g = GTensor::from_principal([12.97, 0.85, 0.25], [0.0, 0.0, 0.26]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: GTensor = serde_json::from_str(&s).unwrap();
        assert!((back.matrix() - g.matrix()).abs().max() < 1e-12);
        let p: GTensor =
            serde_json::from_str(r#"{"principal_values":[1.0,2.0,3.0],"euler_deg":[0,90,0]}"#)
                .unwrap();
        assert_eq!(p.principal_values(), [1.0, 2.0, 3.0]);
    }
}
