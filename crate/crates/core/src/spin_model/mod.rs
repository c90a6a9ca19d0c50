//! Zeeman structure of the ground and excited Kramers doublets, the
//! orientation dependence of the cavity coupling, and the cyclicity models
//! built on top of it.

mod coupling;
mod cyclicity;
mod search;
mod spinor;
mod tensor;

pub use coupling::{coupling_at, coupling_block_at, overlap_coefficients, CouplingMatrix};
pub use cyclicity::{
    corrected_cyclicity, cyclicity_vs_detuning, detuned_purcell, ideal_cyclicity,
    purcell_components, CyclicityModel, ExcitedStateAverage, IonCavityParams, CYCLICITY_SENTINEL,
};
pub use search::{max_cyclicity_search, SearchResult};
pub use spinor::{zeeman_eigensystem, Spinor, ZeemanEigensystem};
pub use tensor::{
    transition_frequencies, FieldOrientation, GTensor, TensorPair, TransitionFrequencies,
    BOHR_MAGNETON_HZ_PER_GAUSS,
};
