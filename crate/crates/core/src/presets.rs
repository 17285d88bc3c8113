//! Reference parameter sets for the experiment (pump at 1064 nm, room
//! temperature membranes, 119 kHz cavity linewidth).

use crate::model::{
    CouplingMatrix, LaserNoise, MechanicalMode, NoiseSpec, OpticalMode, SystemParams, PUMP,
};
use crate::units::{hz_to_rad, optical_angular_frequency};

pub const WAVELENGTH: f64 = 1064e-9;
pub const PROBE_POWER: f64 = 3.8e-6;
pub const PUMP_POWER: f64 = 67e-6;
pub const KAPPA_HZ: f64 = 119e3;
pub const DETUNING_HZ: f64 = 240e3;
pub const MASS_EFF: f64 = 174e-12;
pub const TEMPERATURE: f64 = 300.0;

pub const FUNDAMENTAL_HZ: [f64; 2] = [226_764.581, 231_887.32];
pub const FUNDAMENTAL_DAMPING_HZ: [f64; 2] = [1.44, 8.8];
pub const EXCITED_HZ: [f64; 2] = [366_852.5, 367_338.9];
pub const EXCITED_DAMPING_HZ: [f64; 2] = [11.9, 8.6];

/// Membrane-to-pump couplings fitted on the amplitude-noise data (Hz).
pub const AMPLITUDE_G0_HZ: [f64; 2] = [0.13, 0.39];
/// Membrane-to-pump couplings fitted on the phase-noise data (Hz).
pub const PHASE_G0_HZ: [f64; 2] = [0.42, 0.51];

/// Flat amplitude-noise level `2 Γ_ε` from the calibration.
pub const AMPLITUDE_WHITE_LEVEL: f64 = 6.7e12;
/// Flat frequency-noise level `2 Γ_L` from the calibration.
pub const PHASE_WHITE_LEVEL: f64 = 3.1e10;
/// Bandwidth used to make the injected Lorentzian noise flat over the band.
pub const WHITE_NOISE_BANDWIDTH_HZ: f64 = 10e6;
/// Measurement bandwidth of each spectrum point, Hz.
pub const MEASUREMENT_BW_HZ: f64 = 10.0;

/// Couplings assumed for the excited modes, which are not reported (Hz).
pub const EXCITED_G0_HZ: f64 = 0.2;

fn lasers(probe_power: f64, pump_power: f64) -> [OpticalMode; 2] {
    let wl = optical_angular_frequency(WAVELENGTH);
    let kappa = hz_to_rad(KAPPA_HZ);
    [
        OpticalMode::with_total_kappa(wl, 0.0, kappa, probe_power),
        OpticalMode::with_total_kappa(wl, hz_to_rad(DETUNING_HZ), kappa, pump_power),
    ]
}

fn membranes(freq_hz: [f64; 2], damping_hz: [f64; 2]) -> [MechanicalMode; 2] {
    std::array::from_fn(|j| {
        MechanicalMode::from_temperature(hz_to_rad(freq_hz[j]), hz_to_rad(damping_hz[j]), MASS_EFF, TEMPERATURE)
    })
}

/// Couplings in Hz -> rad/s, with the probe seeing the same couplings as the pump.
fn couplings_same_for_both_modes(g_hz: [f64; 2]) -> CouplingMatrix {
    CouplingMatrix::new(std::array::from_fn(|j| [hz_to_rad(g_hz[j]), hz_to_rad(g_hz[j])]))
}

/// Reference cavity and fundamental modes, amplitude-noise couplings, no injected noise.
pub fn table1() -> SystemParams {
    SystemParams {
        optical: lasers(PROBE_POWER, PUMP_POWER),
        mechanical: membranes(FUNDAMENTAL_HZ, FUNDAMENTAL_DAMPING_HZ),
        couplings: couplings_same_for_both_modes(AMPLITUDE_G0_HZ),
        noise: NoiseSpec::default(),
        lo_phase: 0.0,
        include_loss_port: false,
    }
}

/// Flat, calibrated amplitude noise on the pump (transmission dips).
pub fn fig4c() -> SystemParams {
    let mut p = table1();
    p.noise.lasers[PUMP] = white_amplitude_noise(AMPLITUDE_WHITE_LEVEL);
    p
}

/// Flat, calibrated frequency noise on the pump with the phase-data couplings.
pub fn fig5() -> SystemParams {
    let mut p = table1();
    p.couplings = couplings_same_for_both_modes(PHASE_G0_HZ);
    p.noise.lasers[PUMP] = LaserNoise::phase(PHASE_WHITE_LEVEL / 2.0, hz_to_rad(WHITE_NOISE_BANDWIDTH_HZ));
    p
}

/// Two close excited modes read through the probe, with pump amplitude noise
/// of strength `eps_m_sq` (photons/s) spread over the measurement bandwidth.
pub fn cancellation(eps_m_sq: f64) -> SystemParams {
    let mut p = table1();
    p.mechanical = membranes(EXCITED_HZ, EXCITED_DAMPING_HZ);
    p.couplings = couplings_same_for_both_modes([EXCITED_G0_HZ; 2]);
    p.noise.lasers[PUMP] = white_amplitude_noise(eps_m_sq / MEASUREMENT_BW_HZ);
    p
}

/// Lorentzian amplitude noise whose low-frequency level is `white_level` (= 2 Γ_ε).
pub fn white_amplitude_noise(white_level: f64) -> LaserNoise {
    LaserNoise::amplitude(white_level / 2.0, hz_to_rad(WHITE_NOISE_BANDWIDTH_HZ))
}
