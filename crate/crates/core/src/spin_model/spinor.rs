use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tensor::{FieldOrientation, GTensor};
use crate::error::{Error, Result};

const ZERO_AMPLITUDE: f64 = 1e-12;

/// Effective spin-1/2 state in the fixed `{|+z⟩, |−z⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spinor {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl Spinor {
    pub fn new(plus: Complex64, minus: Complex64) -> Self {
        Self { plus, minus }
    }

    pub fn norm(&self) -> f64 {
        (self.plus.norm_sqr() + self.minus.norm_sqr()).sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Spinor) -> Complex64 {
        self.plus.conj() * other.plus + self.minus.conj() * other.minus
    }

    /// Time-reversal partner, `Θ(a, b) = (−b*, a*)`, so that `Θ|↑⟩ = |↓⟩`
    /// and `Θ|↓⟩ = −|↑⟩`.
    pub fn time_reversed(&self) -> Spinor {
        Spinor::new(-self.minus.conj(), self.plus.conj())
    }

    /// Normalized copy whose first non-negligible amplitude is real positive.
    fn canonical(self) -> Spinor {
        let n = self.norm();
        if self.plus.norm() > ZERO_AMPLITUDE * n {
            let phase = self.plus.conj() / (self.plus.norm() * n);
            Spinor::new(
                Complex64::new(self.plus.norm() / n, 0.0),
                self.minus * phase,
            )
        } else {
            let phase = self.minus.conj() / (self.minus.norm() * n);
            Spinor::new(
                self.plus * phase,
                Complex64::new(self.minus.norm() / n, 0.0),
            )
        }
    }
}

/// Eigenpairs of `H = μ_B B·g·σ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeemanEigensystem {
    /// `E_up − E_down` in Hz.
    pub splitting_hz: f64,
    pub up: Spinor,
    /// Time-reversal partner of `up`.
    pub down: Spinor,
}

/// Upper eigenvector of `n·σ` for the unit vector `n`.
fn aligned_spinor(n: [f64; 3]) -> Spinor {
    let [x, y, z] = n;
    if z > -0.5 {
        Spinor::new(Complex64::new(1.0 + z, 0.0), Complex64::new(x, y))
    } else {
        Spinor::new(Complex64::new(x, -y), Complex64::new(1.0 - z, 0.0))
    }
    .canonical()
}

/// Up state (first amplitude real positive) and its Kramers partner for a
/// field along `direction`. Independent of the field magnitude.
pub(crate) fn kramers_basis(g: &GTensor, direction: &nalgebra::Vector3<f64>) -> (Spinor, Spinor) {
    let h = g.effective_field(direction);
    let n = h / h.norm();
    let up = aligned_spinor([n.x, n.y, n.z]);
    (up, up.time_reversed())
}

pub fn zeeman_eigensystem(g: &GTensor, field: &FieldOrientation) -> Result<ZeemanEigensystem> {
    if field.magnitude_gauss <= 0.0 {
        return Err(Error::DegenerateDoublet);
    }
    let (up, down) = kramers_basis(g, &field.direction());
    Ok(ZeemanEigensystem {
        splitting_hz: g.splitting(field),
        up,
        down,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_model::BOHR_MAGNETON_HZ_PER_GAUSS;
    use nalgebra::{Matrix2, SymmetricEigen, Vector2};

    type C = Complex64;

    /// Explicit 2×2 Zeeman Hamiltonian in Hz.
    fn hamiltonian(g: &GTensor, f: &FieldOrientation) -> Matrix2<C> {
        let h = g.effective_field(&f.direction()) * f.magnitude_gauss;
        let k = 0.5 * BOHR_MAGNETON_HZ_PER_GAUSS;
        Matrix2::new(
            C::new(k * h.z, 0.0),
            C::new(k * h.x, -k * h.y),
            C::new(k * h.x, k * h.y),
            C::new(-k * h.z, 0.0),
        )
    }

    fn vec(s: &Spinor) -> Vector2<C> {
        Vector2::new(s.plus, s.minus)
    }

    #[test]
    fn isotropic_z_field() {
        let g = GTensor::isotropic(2.0).unwrap();
        let f = FieldOrientation::new(0.0, 0.0, 100.0).unwrap();
        let z = zeeman_eigensystem(&g, &f).unwrap();
        assert!((z.splitting_hz - 279.9249e6).abs() < 1e3);
        assert!((z.up.plus - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(z.up.minus.norm() < 1e-15);
        assert!((z.down.minus - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn isotropic_splitting_is_orientation_free() {
        let g = GTensor::isotropic(2.0).unwrap();
        for (phi, theta) in [(0.0, 90.0), (33.0, 71.0), (250.0, 170.0), (10.0, 180.0)] {
            let f = FieldOrientation::new(phi, theta, 100.0).unwrap();
            let z = zeeman_eigensystem(&g, &f).unwrap();
            assert!((z.splitting_hz - 2.0 * 100.0 * BOHR_MAGNETON_HZ_PER_GAUSS).abs() < 1e-3);
        }
    }

    #[test]
    fn matches_direct_diagonalization() {
        // ground tensor, field along its largest principal axis (z here)
        let g = GTensor::from_principal([0.56, 1.80, 14.65], [0.0; 3]).unwrap();
        let f = FieldOrientation::new(0.0, 0.0, 100.0).unwrap();
        let z = zeeman_eigensystem(&g, &f).unwrap();
        let eig = SymmetricEigen::new(hamiltonian(&g, &f));
        let gap = (eig.eigenvalues[0] - eig.eigenvalues[1]).abs();
        assert!((z.splitting_hz - gap).abs() < 1e-6 * gap);
        assert!((z.splitting_hz - 14.65 * 100.0 * BOHR_MAGNETON_HZ_PER_GAUSS).abs() < 1.0);

        let g = GTensor::from_principal([14.65, 1.80, 0.56], [0.4, 1.2, 2.2]).unwrap();
        for (phi, theta) in [(12.0, 34.0), (100.0, 90.0), (271.0, 160.0), (0.0, 180.0)] {
            let f = FieldOrientation::new(phi, theta, 37.0).unwrap();
            let z = zeeman_eigensystem(&g, &f).unwrap();
            let h = hamiltonian(&g, &f);
            let e_up = 0.5 * z.splitting_hz;
            let r_up = h * vec(&z.up) - vec(&z.up) * C::new(e_up, 0.0);
            let r_dn = h * vec(&z.down) + vec(&z.down) * C::new(e_up, 0.0);
            assert!(r_up.norm() < 1e-6 * e_up, "{phi} {theta}");
            assert!(r_dn.norm() < 1e-6 * e_up, "{phi} {theta}");
            assert!(z.up.inner(&z.down).norm() < 1e-12);
            assert!((z.up.norm() - 1.0).abs() < 1e-12);
            assert!((z.down.norm() - 1.0).abs() < 1e-12);
            assert!(z.up.plus.im == 0.0 && z.up.plus.re >= 0.0);
        }
    }

    #[test]
    fn zero_field_is_an_error() {
        let g = GTensor::isotropic(2.0).unwrap();
        let f = FieldOrientation::new(0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            zeeman_eigensystem(&g, &f),
            Err(Error::DegenerateDoublet)
        ));
    }

    #[test]
    fn time_reversal_squares_to_minus_one() {
        let s = Spinor::new(C::new(0.6, 0.0), C::new(0.0, 0.8));
        let t = s.time_reversed().time_reversed();
        assert!((t.plus + s.plus).norm() < 1e-15 && (t.minus + s.minus).norm() < 1e-15);
    }
}
