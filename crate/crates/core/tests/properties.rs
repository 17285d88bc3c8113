use proptest::prelude::*;
use tmnoise::config::RunConfig;
use tmnoise::model::{chi_m_dressed, solve_steady_state, PUMP};
use tmnoise::noise::{amplitude_noise_psd, phase_noise_psd, Ordering};
use tmnoise::presets;
use tmnoise::spectra::solver::FullSolver;
use tmnoise::spectra::{QuadratureSelector, Sidedness, SpectrumEngine};
use tmnoise::units::{hz_to_rad, rad_to_hz};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 48,
        ..ProptestConfig::default()
    }
}

fn selector(transmission: bool, lo: f64) -> QuadratureSelector {
    if transmission {
        QuadratureSelector::transmission_x(lo)
    } else {
        QuadratureSelector::reflection_y(lo)
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn quantum_spectrum_is_positive(
        g0 in 0.0f64..0.6, g1 in 0.0f64..0.6, pump in 1e-6f64..2e-4,
        offset in -300.0f64..300.0, transmission: bool, lo in 0.0f64..std::f64::consts::TAU,
    ) {
        let mut p = presets::fig4c().with_couplings([[hz_to_rad(g0); 2], [hz_to_rad(g1); 2]]);
        p.optical[PUMP].power = pump;
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap();
        let w = p.mechanical[1].omega_m + hz_to_rad(offset);
        let s = eng.point(&selector(transmission, lo), w).unwrap();
        prop_assert!(s.re > 0.0);
        prop_assert!(s.im.abs() <= 1e-9 * s.re);
    }

    #[test]
    fn symmetrized_spectrum_is_even(
        g0 in 0.0f64..0.6, g1 in 0.0f64..0.6, f in 1e3f64..5e5, transmission: bool,
    ) {
        let p = presets::fig5().with_couplings([[hz_to_rad(g0); 2], [hz_to_rad(g1); 2]]);
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap().ordering(Ordering::Symmetrized);
        let sel = selector(transmission, 0.0);
        let w = hz_to_rad(f);
        let (a, b) = (eng.point(&sel, w).unwrap().re, eng.point(&sel, -w).unwrap().re);
        prop_assert!((a / b - 1.0).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn one_sided_is_twice_two_sided(offset in -50.0f64..50.0) {
        let p = presets::fig4c();
        let eng = SpectrumEngine::new(&p, &FullSolver).unwrap().ordering(Ordering::Symmetrized);
        let w = [p.mechanical[0].omega_m + hz_to_rad(offset)];
        let sel = QuadratureSelector::transmission_x(0.0);
        let two = eng.psd(&sel, &w, Sidedness::TwoSided).unwrap().values[0];
        let one = eng.psd(&sel, &w, Sidedness::OneSided).unwrap().values[0];
        prop_assert!((one / (2.0 * two) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_membranes_keep_bare_susceptibility(offset in -20.0f64..20.0, j in 0usize..2) {
        let p = presets::table1().with_couplings([[0.0; 2]; 2]);
        let ss = solve_steady_state(&p).unwrap();
        let m = p.mechanical[j];
        let w = m.omega_m + offset * m.gamma_m;
        let bare = m.chi(w);
        prop_assert!((chi_m_dressed(j, &ss, &p, w).unwrap() - bare).norm() <= 1e-12 * bare.norm());
    }

    #[test]
    fn spectrum_is_affine_in_amplitude_noise(scale in 0.0f64..5.0, offset in -100.0f64..100.0) {
        let base = presets::fig4c();
        let sel = QuadratureSelector::transmission_x(0.0);
        let w = [base.mechanical[1].omega_m + hz_to_rad(offset)];
        let at = |k: f64| {
            let mut p = base.clone();
            p.noise.lasers[PUMP].gamma_eps *= k;
            SpectrumEngine::new(&p, &FullSolver).unwrap().psd(&sel, &w, Sidedness::TwoSided).unwrap().values[0]
        };
        let (s0, s1, sk) = (at(0.0), at(1.0), at(scale));
        let predicted = s0 + scale * (s1 - s0);
        prop_assert!((sk - predicted).abs() <= 1e-9 * sk.abs().max(s1.abs()));
    }

    #[test]
    fn steady_state_residuals_vanish(
        pump in 1e-7f64..5e-4, probe in 1e-7f64..1e-4, det in -1e6f64..1e6,
    ) {
        let mut p = presets::table1();
        p.optical[PUMP].power = pump;
        p.optical[0].power = probe;
        p.optical[PUMP].detuning0 = hz_to_rad(det);
        let ss = solve_steady_state(&p).unwrap();
        for r in ss.residuals(&p) {
            prop_assert!(r < 1e-10, "{r}");
        }
    }

    #[test]
    fn lorentzians_are_even_and_decreasing(strength in 0.0f64..1e14, bw in 1.0f64..1e8, w in 0.0f64..1e9) {
        let n = tmnoise::model::LaserNoise { gamma_eps: strength, gamma_eps_bw: bw, gamma_l: strength, gamma_phi_bw: bw };
        prop_assert_eq!(amplitude_noise_psd(&n, w), amplitude_noise_psd(&n, -w));
        prop_assert!(amplitude_noise_psd(&n, w) <= amplitude_noise_psd(&n, 0.0));
        prop_assert!(phase_noise_psd(&n, w) >= 0.0);
    }

    #[test]
    fn hz_round_trip(f in -1e15f64..1e15) {
        let back = rad_to_hz(hz_to_rad(f));
        prop_assert!((back - f).abs() <= 2.0 * f64::EPSILON * f.abs());
    }

    #[test]
    fn config_round_trips(power in 1e-7f64..1e-3, det in -1e6f64..1e6, points in 2usize..10_000) {
        let text = format!(
            "schema_version = 1\npreset = \"fig4c\"\n[pump]\npower_w = {power:e}\ndetuning_hz = {det:e}\n[grid]\npoints = {points}\n"
        );
        let cfg = RunConfig::from_toml_str(&text).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.system_params().unwrap(), again.system_params().unwrap());
    }
}
