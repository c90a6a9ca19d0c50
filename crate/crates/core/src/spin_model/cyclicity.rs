use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coupling::{block_for_direction, CouplingMatrix};
use super::tensor::{transition_frequencies, FieldOrientation, TensorPair};
use crate::error::{Error, Result};

/// Returned in place of an infinite cyclicity (vanishing spin-flip coupling).
pub const CYCLICITY_SENTINEL: f64 = 1e12;

/// Emitter/cavity parameters. Rates and frequencies in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonCavityParams {
    /// Purcell factor on resonance.
    pub purcell_max: f64,
    /// Cavity linewidth (FWHM).
    pub kappa_hz: f64,
    /// Cavity frequency minus the zero-field optical transition frequency.
    #[serde(default)]
    pub cavity_detuning_hz: f64,
    /// Cyclicity without the cavity.
    pub c0: f64,
    /// Total detection efficiency per emitted photon.
    pub eta: f64,
    /// Waveguide fraction of the cavity decay.
    pub eta_cav: f64,
    /// Bright-window signal over background.
    pub snr: f64,
    /// Free-space decay rate of the excited state.
    pub gamma0_hz: f64,
}

impl IonCavityParams {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("purcell_max", self.purcell_max),
            ("kappa_hz", self.kappa_hz),
            ("eta", self.eta),
            ("eta_cav", self.eta_cav),
            ("snr", self.snr),
            ("gamma0_hz", self.gamma0_hz),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if !self.cavity_detuning_hz.is_finite() {
            return Err(Error::invalid("cavity_detuning_hz", "must be finite"));
        }
        if self.eta > 1.0 || self.eta_cav > 1.0 {
            return Err(Error::invalid("eta", "efficiencies must not exceed 1"));
        }
        if !(self.c0 >= 1.0) {
            return Err(Error::invalid(
                "c0",
                format!("must be >= 1, got {}", self.c0),
            ));
        }
        Ok(())
    }
}

/// `C = 1 + |g_par|²/|g_perp|²`, saturating at [`CYCLICITY_SENTINEL`].
pub fn ideal_cyclicity(g_par: Complex64, g_perp: Complex64) -> Result<f64> {
    let par = g_par.norm_sqr();
    let perp = g_perp.norm_sqr();
    if par == 0.0 && perp == 0.0 {
        return Err(Error::invalid("coupling", "g_par and g_perp are both zero"));
    }
    if perp == 0.0 {
        return Ok(CYCLICITY_SENTINEL);
    }
    Ok((1.0 + par / perp).min(CYCLICITY_SENTINEL))
}

/// Cyclicity including free-space decay:
/// `C = 1 + (1 − 1/c0 + p_par) / (1/c0 + p_perp)`.
pub fn corrected_cyclicity(p_par: f64, p_perp: f64, c0: f64) -> Result<f64> {
    if !(c0 >= 1.0) {
        return Err(Error::invalid("c0", format!("must be >= 1, got {c0}")));
    }
    if !(p_par >= 0.0 && p_perp >= 0.0) {
        return Err(Error::invalid(
            "purcell factor",
            format!("components must be >= 0, got ({p_par}, {p_perp})"),
        ));
    }
    if p_perp.is_infinite() {
        return Ok(1.0);
    }
    if p_par == 0.0 && p_perp == 0.0 {
        // Algebraically c0; returned directly to avoid rounding.
        return Ok(c0);
    }
    let inv = 1.0 / c0;
    Ok((1.0 + (1.0 - inv + p_par) / (inv + p_perp)).min(CYCLICITY_SENTINEL))
}

/// Lorentzian Purcell factor `p_max / (1 + (2Δ/κ)²)`.
///
/// # Panics
/// If `kappa` is not positive.
pub fn detuned_purcell(p_max: f64, delta: f64, kappa: f64) -> f64 {
    assert!(kappa > 0.0, "cavity linewidth must be positive");
    let x = 2.0 * delta / kappa;
    p_max / (1.0 + x * x)
}

/// Splits the total Purcell factor between the spin-conserving and
/// spin-flipping channels in proportion to `|g_par|²` and `|g_perp|²`.
pub fn purcell_components(p_max: f64, coupling: &CouplingMatrix) -> (f64, f64) {
    let total = coupling.total_rate();
    (
        p_max * coupling.g_par.norm_sqr() / total,
        p_max * coupling.g_perp.norm_sqr() / total,
    )
}

/// How the two excited states are combined once the cavity is detuned and
/// their decay rates differ.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExcitedStateAverage {
    /// Arithmetic mean of the per-state cyclicities.
    #[default]
    Cyclicity,
    /// Arithmetic mean of the per-state branching ratios `1/C`.
    BranchingRatio,
}

/// Cyclicity model of one emitter in one cavity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CyclicityModel {
    pub coupling: CouplingMatrix,
    pub tensors: TensorPair,
    pub purcell_max: f64,
    pub kappa_hz: f64,
    pub c0: f64,
    #[serde(default)]
    pub average: ExcitedStateAverage,
}

impl CyclicityModel {
    pub fn new(coupling: CouplingMatrix, tensors: TensorPair, params: &IonCavityParams) -> Self {
        Self {
            coupling,
            tensors,
            purcell_max: params.purcell_max,
            kappa_hz: params.kappa_hz,
            c0: params.c0,
            average: ExcitedStateAverage::default(),
        }
    }

    /// Resonant cavity, Zeeman detunings neglected.
    pub fn resonant(&self, orientation: &FieldOrientation) -> Result<f64> {
        let block = block_for_direction(
            &self.coupling,
            &self.tensors.ground,
            &self.tensors.excited,
            &orientation.direction(),
        );
        let total = self.coupling.total_rate();
        let p_par = self.purcell_max * block[(0, 0)].norm_sqr() / total;
        let p_perp = self.purcell_max * block[(0, 1)].norm_sqr() / total;
        corrected_cyclicity(p_par, p_perp, self.c0)
    }

    /// Per-excited-state Lorentzian weighting of each decay line at the
    /// given cavity detuning; `orientation.magnitude_gauss` sets the Zeeman
    /// shifts.
    pub fn detuned(&self, orientation: &FieldOrientation, cavity_detuning_hz: f64) -> Result<f64> {
        let [(pa, pc), (pb, pd)] = self.detuned_components(orientation, cavity_detuning_hz);
        let c_up = corrected_cyclicity(pa, pc, self.c0)?;
        let c_down = corrected_cyclicity(pb, pd, self.c0)?;
        Ok(self.average.combine(c_up, c_down))
    }

    /// `(P_conserving, P_flipping)` for |↑e⟩ and |↓e⟩.
    pub(crate) fn detuned_components(
        &self,
        orientation: &FieldOrientation,
        cavity_detuning_hz: f64,
    ) -> [(f64, f64); 2] {
        let block = block_for_direction(
            &self.coupling,
            &self.tensors.ground,
            &self.tensors.excited,
            &orientation.direction(),
        );
        let total = self.coupling.total_rate();
        let lines = transition_frequencies(
            &self.tensors.ground,
            &self.tensors.excited,
            orientation,
            0.0,
        );
        let p = |amp: Complex64, line: f64| {
            detuned_purcell(self.purcell_max, line - cavity_detuning_hz, self.kappa_hz)
                * amp.norm_sqr()
                / total
        };
        [
            // |↑e⟩: conserving line A (↑g), flipping line C (↓g)
            (p(block[(1, 1)], lines.a), p(block[(0, 1)], lines.c)),
            // |↓e⟩: conserving line B (↓g), flipping line D (↑g)
            (p(block[(0, 0)], lines.b), p(block[(1, 0)], lines.d)),
        ]
    }
}

impl ExcitedStateAverage {
    pub(crate) fn combine(self, c_up: f64, c_down: f64) -> f64 {
        match self {
            ExcitedStateAverage::Cyclicity => 0.5 * (c_up + c_down),
            ExcitedStateAverage::BranchingRatio => 2.0 / (1.0 / c_up + 1.0 / c_down),
        }
    }
}

/// Cyclicity at `params.cavity_detuning_hz`, averaged over the two excited
/// states.
pub fn cyclicity_vs_detuning(
    params: &IonCavityParams,
    m: &CouplingMatrix,
    tensors: &TensorPair,
    orientation: &FieldOrientation,
) -> Result<f64> {
    params.validate()?;
    CyclicityModel::new(*m, tensors.clone(), params).detuned(orientation, params.cavity_detuning_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn ideal_cases() {
        assert_eq!(ideal_cyclicity(c(0.3, 0.4), c(0.0, 0.5)).unwrap(), 2.0);
        let v = ideal_cyclicity(c(1.0, 0.0), c(0.024, 0.0)).unwrap();
        assert!((v - (1.0 + 1.0 / 0.024f64.powi(2))).abs() < 1e-9);
        assert!((v - 1737.11).abs() < 0.01);
        assert_eq!(ideal_cyclicity(c(0.0, 0.0), c(0.2, 0.0)).unwrap(), 1.0);
        assert_eq!(
            ideal_cyclicity(c(1.0, 0.0), c(0.0, 0.0)).unwrap(),
            CYCLICITY_SENTINEL
        );
        assert!(ideal_cyclicity(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn corrected_cases() {
        assert_eq!(corrected_cyclicity(0.0, 0.0, 7.5).unwrap(), 7.5);
        assert!((corrected_cyclicity(700.0, 0.0, 2.0).unwrap() - 1402.0).abs() < 1e-9);
        assert!((corrected_cyclicity(5.0, 1e12, 2.0).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(corrected_cyclicity(5.0, f64::INFINITY, 2.0).unwrap(), 1.0);
        assert!(corrected_cyclicity(1.0, 1.0, 0.5).is_err());
        assert!(corrected_cyclicity(-1.0, 1.0, 2.0).is_err());
    }

    #[test]
    fn lorentzian_cases() {
        assert_eq!(detuned_purcell(703.0, 0.0, 3e9), 703.0);
        assert_eq!(detuned_purcell(703.0, 1.5e9, 3e9), 351.5);
        assert!((detuned_purcell(703.0, 3e9, 3e9) - 140.6).abs() < 1e-12);
    }

    #[test]
    fn resonant_zero_field_matches_corrected() {
        let ion = presets::ion_preset("ion2").unwrap();
        let t = presets::er_yso_site1();
        let m = presets::fitted_coupling();
        let o = FieldOrientation::new(100.0, 90.0, 0.0).unwrap();
        let got = cyclicity_vs_detuning(&ion.params, &m, &t, &o).unwrap();
        let (pp, pq) = purcell_components(ion.params.purcell_max, &m);
        let want = corrected_cyclicity(pp, pq, ion.params.c0).unwrap();
        assert!((got - want).abs() < 1e-9 * want);
    }

    #[test]
    fn far_detuned_limit_is_bare() {
        let mut params = presets::ion_preset("ion2").unwrap().params;
        params.cavity_detuning_hz = 1e15;
        let t = presets::er_yso_site1();
        let m = presets::fitted_coupling();
        let o = FieldOrientation::new(100.0, 90.0, 112.0).unwrap();
        let got = cyclicity_vs_detuning(&params, &m, &t, &o).unwrap();
        assert!((got - params.c0).abs() < 1e-6);
    }

    #[test]
    fn branching_average_is_harmonic() {
        let ion = presets::ion_preset("ion2").unwrap();
        let mut model = CyclicityModel::new(
            presets::fitted_coupling(),
            presets::er_yso_site1(),
            &ion.params,
        );
        let o = FieldOrientation::new(100.0, 90.0, 112.0).unwrap();
        let arith = model.detuned(&o, 2e9).unwrap();
        model.average = ExcitedStateAverage::BranchingRatio;
        let harm = model.detuned(&o, 2e9).unwrap();
        assert!(harm <= arith + 1e-9);
    }
}
