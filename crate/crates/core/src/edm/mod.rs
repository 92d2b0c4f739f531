//! Einstein–Dirac–Maxwell residuals, the associated action functional and
//! its first variation, initial-data constraints, the wave-gauge vector and
//! numerical principal symbols.
//!
//! Conventions: `T¹(X, Y) = ½ Re⟨X·∇_Y ψ + Y·∇_X ψ, ψ⟩` with the gauged
//! connection `∇^{g,qA} = ∇^g + iqA`, `T² = F_ac F_b^c − ¼ F_cd F^cd g`, and
//! `g(F, F) = F_cd F^cd` is the full tensor contraction.

mod constraints;
mod fields;
mod symbol;
mod variation;

pub use constraints::{constraint_residual, wave_gauge_residual, ConstraintResidual, InitialData, SpacetimeOneForm};
pub use fields::{
    dirac_current, einstein_tensor, energy_momentum, lagrangian, lagrangian_density, maxwell_stress, spinor_stress,
    edm_residual, ComplexOneForm, EdmFields, EdmParams, EdmResidual,
};
pub use symbol::{clifford_symbol, principal_symbol, pullback_symbol_report, QuadraticForm, SymbolReport};
pub use variation::{
    variation_terms, varied_lagrangian, Derivative, CALIBRATION_DIRECTIONS, CALIBRATION_GRID, CALIBRATION_SEED,
    calibrate, calibration, el_consistency, first_variation, lagrangian_derivative, pairing_terms, Calibration,
    Direction, ElReport,
};
