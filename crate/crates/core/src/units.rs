//! Physical constants and the Hz <-> rad/s boundary.
//!
//! Every rate inside the crate is an angular frequency in rad/s. Config files
//! and CSV output use Hz; conversions happen only through these helpers.

use std::f64::consts::TAU;

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s (exact).
pub const C_LIGHT: f64 = 299_792_458.0;

#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    f * TAU
}

#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TAU
}

/// Angular optical frequency of light with vacuum wavelength `lambda` (m).
pub fn optical_angular_frequency(lambda: f64) -> f64 {
    TAU * C_LIGHT / lambda
}

/// High-temperature thermal occupancy `k_B T / (hbar omega)`.
pub fn thermal_occupancy(temperature: f64, omega: f64) -> f64 {
    K_B * temperature / (HBAR * omega)
}

/// Bose-Einstein occupancy `1 / (exp(hbar omega / k_B T) - 1)`.
pub fn bose_einstein(temperature: f64, omega: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hz_round_trip_is_exact_two_pi() {
        for f in [0.0, 1.44, 226_764.581, 119e3, 2.818e14] {
            assert_eq!(hz_to_rad(f), f * TAU);
            let back = rad_to_hz(hz_to_rad(f));
            assert!((back - f).abs() <= f * f64::EPSILON);
        }
    }

    #[test]
    fn room_temperature_occupancy_matches_bose_einstein() {
        let w = hz_to_rad(226.76e3);
        let n = thermal_occupancy(300.0, w);
        assert!((n / 2.75e7 - 1.0).abs() < 0.01, "n = {n}");
        let be = bose_einstein(300.0, w);
        // 1/x vs 1/(e^x - 1) differ by ~1/2, i.e. 1/(2n) relative.
        assert!(((n - be) / be).abs() < 1e-7);
    }
}
