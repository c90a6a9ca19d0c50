use nalgebra::{Matrix2, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spinor::{kramers_basis, Spinor};
use super::tensor::{FieldOrientation, GTensor};
use crate::error::{Error, Result};

/// Cavity coupling of the ground/excited doublets at a reference field
/// orientation. Time reversal fixes the full 2×2 block (rows ↓g, ↑g;
/// columns ↓e, ↑e) to `[[g_par, g_perp], [−g_perp*, g_par*]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CouplingSpec", into = "CouplingSpec")]
pub struct CouplingMatrix {
    pub g_par: Complex64,
    pub g_perp: Complex64,
    /// Only the angles are meaningful.
    pub reference: FieldOrientation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingSpec {
    g_par_abs: f64,
    g_par_phase_rad: f64,
    g_perp_abs: f64,
    g_perp_phase_rad: f64,
    reference: FieldOrientation,
}

impl TryFrom<CouplingSpec> for CouplingMatrix {
    type Error = Error;

    fn try_from(s: CouplingSpec) -> Result<Self> {
        CouplingMatrix::new(
            Complex64::from_polar(s.g_par_abs, s.g_par_phase_rad),
            Complex64::from_polar(s.g_perp_abs, s.g_perp_phase_rad),
            s.reference,
        )
    }
}

impl From<CouplingMatrix> for CouplingSpec {
    fn from(m: CouplingMatrix) -> Self {
        CouplingSpec {
            g_par_abs: m.g_par.norm(),
            g_par_phase_rad: m.g_par.arg(),
            g_perp_abs: m.g_perp.norm(),
            g_perp_phase_rad: m.g_perp.arg(),
            reference: m.reference,
        }
    }
}

impl CouplingMatrix {
    pub fn new(g_par: Complex64, g_perp: Complex64, reference: FieldOrientation) -> Result<Self> {
        let total = g_par.norm_sqr() + g_perp.norm_sqr();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::invalid(
                "coupling matrix",
                "|g_par|² + |g_perp|² must be positive and finite",
            ));
        }
        Ok(Self {
            g_par,
            g_perp,
            reference,
        })
    }

    /// Polar form with `|g_par|` fixed to one.
    pub fn from_polar(
        g_par_phase: f64,
        g_perp_abs: f64,
        g_perp_phase: f64,
        reference: FieldOrientation,
    ) -> Result<Self> {
        Self::new(
            Complex64::from_polar(1.0, g_par_phase),
            Complex64::from_polar(g_perp_abs, g_perp_phase),
            reference,
        )
    }

    /// `|g_par|² + |g_perp|²`; invariant under any change of Kramers basis.
    pub fn total_rate(&self) -> f64 {
        self.g_par.norm_sqr() + self.g_perp.norm_sqr()
    }

    pub fn block(&self) -> Matrix2<Complex64> {
        Matrix2::new(
            self.g_par,
            self.g_perp,
            -self.g_perp.conj(),
            self.g_par.conj(),
        )
    }
}

/// Columns `(|↓⟩, |↑⟩)` in the fixed spin basis.
fn basis_matrix(g: &GTensor, direction: &Vector3<f64>) -> Matrix2<Complex64> {
    let (up, down) = kramers_basis(g, direction);
    Matrix2::new(down.plus, up.plus, down.minus, up.minus)
}

/// Coupling block expressed in the Kramers bases of a new field direction.
pub(crate) fn block_for_direction(
    m: &CouplingMatrix,
    g_ground: &GTensor,
    g_excited: &GTensor,
    direction: &Vector3<f64>,
) -> Matrix2<Complex64> {
    let reference = m.reference.direction();
    let ug_ref = basis_matrix(g_ground, &reference);
    let ue_ref = basis_matrix(g_excited, &reference);
    let operator = ug_ref * m.block() * ue_ref.adjoint();
    let ug = basis_matrix(g_ground, direction);
    let ue = basis_matrix(g_excited, direction);
    ug.adjoint() * operator * ue
}

/// Full transformed 2×2 coupling block at `orientation`.
pub fn coupling_block_at(
    m: &CouplingMatrix,
    g_ground: &GTensor,
    g_excited: &GTensor,
    orientation: &FieldOrientation,
) -> Result<Matrix2<Complex64>> {
    if orientation.magnitude_gauss <= 0.0 {
        return Err(Error::DegenerateDoublet);
    }
    Ok(block_for_direction(
        m,
        g_ground,
        g_excited,
        &orientation.direction(),
    ))
}

/// Coupling matrix re-expressed at `orientation` (which becomes the new
/// reference): `g_par' = ⟨↓g'|M|↓e'⟩`, `g_perp' = ⟨↓g'|M|↑e'⟩`.
pub fn coupling_at(
    m: &CouplingMatrix,
    g_ground: &GTensor,
    g_excited: &GTensor,
    orientation: &FieldOrientation,
) -> Result<CouplingMatrix> {
    let block = coupling_block_at(m, g_ground, g_excited, orientation)?;
    CouplingMatrix::new(
        block[(0, 0)],
        block[(0, 1)],
        orientation.with_magnitude(1.0)?,
    )
}

/// `(α, β)` with `|↑(to)⟩ = α|↑(from)⟩ + β|↓(from)⟩`.
pub fn overlap_coefficients(
    g: &GTensor,
    from: &FieldOrientation,
    to: &FieldOrientation,
) -> Result<(Complex64, Complex64)> {
    if from.magnitude_gauss <= 0.0 || to.magnitude_gauss <= 0.0 {
        return Err(Error::DegenerateDoublet);
    }
    let (up_from, down_from): (Spinor, Spinor) = kramers_basis(g, &from.direction());
    let (up_to, _) = kramers_basis(g, &to.direction());
    Ok((up_from.inner(&up_to), down_from.inner(&up_to)))
}
