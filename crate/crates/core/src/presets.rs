//! Measured device parameters and g-tensor presets.

use serde::{Deserialize, Serialize};

use crate::spin_model::{CouplingMatrix, FieldOrientation, GTensor, IonCavityParams, TensorPair};

/// Speed of light, m/s.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Zero-field optical transition wavelength, m.
pub const TRANSITION_WAVELENGTH_M: f64 = 1536.48e-9;

/// Zero-field optical transition frequency, Hz.
pub fn transition_frequency_hz() -> f64 {
    SPEED_OF_LIGHT / TRANSITION_WAVELENGTH_M
}

/// Free-space excited-state lifetime, s.
pub const FREE_SPACE_LIFETIME_S: f64 = 11.4e-3;

/// Pulse repetition period of the alternating A/B sequence, s.
pub const DEFAULT_T_REP_S: f64 = 60e-6;

/// Saturated excitation probability per pulse.
pub const DEFAULT_P_EX: f64 = 0.5;

/// Ground-state principal g-values.
pub const GROUND_PRINCIPAL: [f64; 3] = [14.65, 1.80, 0.56];

/// Excited-state principal g-values.
pub const EXCITED_PRINCIPAL: [f64; 3] = [12.97, 0.85, 0.25];

/// Stand-in tensors: ground principal axes along the crystal axes, excited
/// axes rotated by 15° about the shared third (smallest-g) axis.
pub fn rotated_standin() -> TensorPair {
    TensorPair {
        ground: GTensor::from_principal(GROUND_PRINCIPAL, [0.0; 3]).expect("valid preset"),
        excited: GTensor::from_principal(EXCITED_PRINCIPAL, [15f64.to_radians(), 0.0, 0.0])
            .expect("valid preset"),
    }
}

/// Er³⁺:Y₂SiO₅ site-1 tensors in the (D1, D2, b) frame from EPR
/// (Sun et al., PRB 77, 085124 (2008)). Principal values come out as
/// (14.66, 1.80, 0.56) and (12.98, 0.84, 0.25).
pub fn er_yso_site1() -> TensorPair {
    TensorPair {
        ground: GTensor::from_matrix([
            [3.07, -3.12, 3.40],
            [-3.12, 8.16, -5.76],
            [3.40, -5.76, 5.79],
        ])
        .expect("valid preset"),
        excited: GTensor::from_matrix([
            [1.95, -2.21, 3.58],
            [-2.21, 4.23, -4.99],
            [3.58, -4.99, 7.89],
        ])
        .expect("valid preset"),
    }
}

/// Reference orientation of the fitted coupling, `(φ, θ) = (100°, 90°)`.
pub fn reference_orientation() -> FieldOrientation {
    FieldOrientation::angles(100.0, 90.0).expect("valid preset")
}

/// Coupling fitted to the ion-1 angular scan: `g_par = e^{-1.15i}`,
/// `g_perp = 0.024 e^{-1.476i}` at (100°, 90°).
pub fn fitted_coupling() -> CouplingMatrix {
    CouplingMatrix::from_polar(-1.15, 0.024, -1.476, reference_orientation()).expect("valid preset")
}

/// One row of the measured-ion table plus the quantities the simulator needs.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonPreset {
    pub key: String,
    pub params: IonCavityParams,
    /// Largest measured cyclicity.
    pub c_max: f64,
    pub quality_factor: f64,
    /// Average single-shot fidelity reported by the ML readout, if measured.
    pub ml_fidelity: Option<f64>,
    /// Intrinsic spin relaxation time used for simulations, s.
    pub t1_dark_s: f64,
}

#[allow(clippy::too_many_arguments)]
fn ion(
    key: &str,
    purcell: f64,
    c_max: f64,
    q: f64,
    eta_cav: f64,
    eta: f64,
    ml_fidelity: Option<f64>,
    snr: f64,
    c0: f64,
    t1_dark_s: f64,
) -> IonPreset {
    IonPreset {
        key: key.to_string(),
        params: IonCavityParams {
            purcell_max: purcell,
            kappa_hz: transition_frequency_hz() / q,
            cavity_detuning_hz: 0.0,
            c0,
            eta,
            eta_cav,
            snr,
            gamma0_hz: 1.0 / FREE_SPACE_LIFETIME_S,
        },
        c_max,
        quality_factor: q,
        ml_fidelity,
        t1_dark_s,
    }
}

/// All measured ions. Bare cyclicity defaults to the detuning-series fit
/// (`C₀ = 2`); ion 1 relaxes four times faster than ion 2.
pub fn ion_presets() -> Vec<IonPreset> {
    vec![
        ion(
            "ion1",
            703.0,
            1500.0,
            6.6e4,
            0.063,
            0.028,
            Some(0.946),
            14.0,
            2.0,
            3.05,
        ),
        ion(
            "ion1_fig2",
            463.0,
            1260.0,
            4.3e4,
            0.045,
            0.020,
            None,
            14.0,
            2.0,
            3.05,
        ),
        ion(
            "ion2",
            189.0,
            390.0,
            7.3e4,
            0.088,
            0.037,
            Some(0.83),
            20.0,
            2.0,
            12.2,
        ),
        ion(
            "ion3",
            536.0,
            620.0,
            4.8e4,
            0.159,
            0.038,
            Some(0.968),
            20.0,
            2.0,
            12.2,
        ),
    ]
}

pub fn ion_preset(key: &str) -> Option<IonPreset> {
    ion_presets().into_iter().find(|p| p.key == key)
}

/// Efficiency stack of a projected device.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EfficiencyStack {
    /// Fraction of cavity decay leaving through the waveguide,
    /// `κ_wg / (κ_wg + κ_int)`.
    pub eta_cav: f64,
    /// Fiber-waveguide coupling, component losses and detector efficiency.
    pub eta_downstream: f64,
}

impl EfficiencyStack {
    pub fn total(&self) -> f64 {
        self.eta_cav * self.eta_downstream
    }
}

/// Projected device: critically coupled cavity (`η_cav = 1/2`) with
/// `Q_int = 10⁶`, the measured downstream efficiency (≈0.4), the
/// demonstrated cyclicity and π-pulse excitation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceProjection {
    pub efficiency: EfficiencyStack,
    pub cyclicity: f64,
    pub p_ex: f64,
    pub snr: f64,
    /// Repetition period; the shorter excited-state lifetime of the
    /// higher-Q cavity allows ~5 µs.
    pub t_rep_s: f64,
}

pub fn improved_device() -> DeviceProjection {
    DeviceProjection {
        efficiency: EfficiencyStack {
            eta_cav: 0.5,
            eta_downstream: 0.4,
        },
        cyclicity: 1500.0,
        p_ex: 1.0,
        snr: 20.0,
        t_rep_s: 5e-6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literature_tensors_have_expected_principal_values() {
        let t = er_yso_site1();
        let g = t.ground.principal_values();
        let e = t.excited.principal_values();
        for (a, b) in g.iter().zip([0.56, 1.80, 14.65]) {
            assert!((a - b).abs() < 0.015, "{g:?}");
        }
        for (a, b) in e.iter().zip([0.25, 0.85, 12.97]) {
            assert!((a - b).abs() < 0.015, "{e:?}");
        }
    }

    #[test]
    fn presets_are_valid() {
        for p in ion_presets() {
            p.params.validate().unwrap();
        }
        assert!(ion_preset("ion1").is_some());
        assert!(ion_preset("ion9").is_none());
        let k = ion_preset("ion1").unwrap().params.kappa_hz;
        assert!((k - 2.956e9).abs() < 0.01e9);
    }
}
