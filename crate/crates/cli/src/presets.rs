//! Built-in scenario presets, compiled into the binary so runs are
//! reproducible without shipping config files around.

pub const PRESETS: &[(&str, &str)] = &[
    ("pulse-power-law", include_str!("../presets/pulse-power-law.cfg")),
    ("constant-cubic", include_str!("../presets/constant-cubic.cfg")),
    ("onoff-cubic", include_str!("../presets/onoff-cubic.cfg")),
    ("abs-sin-cubic", include_str!("../presets/abs-sin-cubic.cfg")),
    ("neumann-cosine", include_str!("../presets/neumann-cosine.cfg")),
    ("dynamical-boundary", include_str!("../presets/dynamical-boundary.cfg")),
    ("blowup-cubic", include_str!("../presets/blowup-cubic.cfg")),
    ("modal-galerkin", include_str!("../presets/modal-galerkin.cfg")),
    ("nonlinear-velocity", include_str!("../presets/nonlinear-velocity.cfg")),
    ("undamped-control", include_str!("../presets/undamped-control.cfg")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_preset_parses() {
        assert_eq!(PRESETS.len(), 10);
        for (name, text) in PRESETS {
            parse_config(text).unwrap_or_else(|e| panic!("preset {name}: {e}"));
        }
    }
}
