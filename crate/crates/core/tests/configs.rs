use std::path::Path;

use tmnoise::config::RunConfig;
use tmnoise::presets;

fn load(name: &str) -> RunConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    let cfg = RunConfig::load(&path).unwrap();
    cfg.validate().unwrap();
    cfg.grid().unwrap();
    cfg.sim_config().unwrap();
    cfg
}

#[test]
fn bundled_configs_match_presets() {
    assert_eq!(load("fig4c.toml").system_params().unwrap(), presets::fig4c());
    assert_eq!(load("fig5.toml").system_params().unwrap(), presets::fig5());
    let c = load("cancellation.toml");
    assert_eq!(c.system_params().unwrap(), presets::cancellation(6.7e13));
    assert_eq!(c.cancellation_levels().unwrap(), vec![6.7e13, 1.1e14]);
}

#[test]
fn bundled_configs_round_trip() {
    for name in ["fig4c.toml", "fig5.toml", "cancellation.toml"] {
        let cfg = load(name);
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg, "{name}");
    }
}
