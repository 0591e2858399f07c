//! Physical constants (CODATA 2018, exact SI values where defined).

use std::f64::consts::PI;

/// Planck constant [J s].
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant [J s].
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge [C].
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Magnetic flux quantum h/2e [Wb].
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;
/// Resistance quantum h/4e² [Ω].
pub const RESISTANCE_QUANTUM: f64 = PLANCK / (4.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE);

/// Name/value pairs, emitted in result metadata.
pub fn table() -> Vec<(&'static str, f64)> {
    vec![
        ("planck_j_s", PLANCK),
        ("hbar_j_s", HBAR),
        ("elementary_charge_c", ELEMENTARY_CHARGE),
        ("boltzmann_j_per_k", BOLTZMANN),
        ("flux_quantum_wb", FLUX_QUANTUM),
        ("resistance_quantum_ohm", RESISTANCE_QUANTUM),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_is_h_over_2e() {
        let derived = PLANCK / (2.0 * ELEMENTARY_CHARGE);
        assert!((derived - FLUX_QUANTUM).abs() / FLUX_QUANTUM < 1e-9);
    }

    #[test]
    fn resistance_quantum_value() {
        assert!((RESISTANCE_QUANTUM - 6453.2).abs() < 0.1);
    }
}
