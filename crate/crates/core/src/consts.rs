//! Physical constants (CODATA 2018 exact values).

/// Elementary charge in coulombs.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602_176_634e-19;

/// Boltzmann constant in J/K.
pub const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;

/// Operating temperature of the first cryocooler stage.
pub const STAGE_TEMP_K: f64 = 3.0;
