//! Flat `key = value` settings shared by every subcommand.

use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use dlview::detect::DetectorConfig;
use dlview::layout::LayoutConfig;
use dlview::render::RenderOptions;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub detector: DetectorConfig,
    pub layout: LayoutConfig,
    pub render: RenderOptions,
}

pub const KEYS: [&str; 9] = [
    "epsilon_mm",
    "misconnection_min_subtree",
    "startpoint_thick_mm",
    "startpoint_min_chain",
    "jitter_amplitude",
    "jitter_threshold",
    "jitter_seed_salt",
    "width",
    "height",
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| anyhow!("bad value `{raw}` for `{key}`"))
}

impl Settings {
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "epsilon_mm" => self.detector.epsilon_mm = value(key, raw)?,
            "misconnection_min_subtree" => self.detector.misconnection_min_subtree = value(key, raw)?,
            "startpoint_thick_mm" => self.detector.startpoint_thick_mm = value(key, raw)?,
            "startpoint_min_chain" => self.detector.startpoint_min_chain = value(key, raw)?,
            "jitter_amplitude" => self.layout.jitter_amplitude = value(key, raw)?,
            "jitter_threshold" => self.layout.jitter_threshold = value(key, raw)?,
            "jitter_seed_salt" => self.layout.jitter_salt = value(key, raw)?,
            "width" => self.render.width = value(key, raw)?,
            "height" => self.render.height = value(key, raw)?,
            other => bail!("unknown key `{other}` (expected one of {})", KEYS.join(", ")),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text`. Blank lines and lines
    /// starting with `#` are ignored; values may be quoted.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", i + 1))?;
            let v = v.trim().trim_matches('"');
            self.set(k.trim(), v).with_context(|| format!("line {}", i + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        self.render.validate().map_err(|e| anyhow!(e))?;
        let l = &self.layout;
        if !(l.jitter_amplitude >= 0.0 && l.jitter_amplitude.is_finite() && l.jitter_threshold.is_finite()) {
            bail!("jitter settings must be finite and non-negative");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let mut s = Settings::default();
        s.apply_text("# detector\nepsilon_mm = 0.5\n\nwidth=1200\njitter_seed_salt = \"7\"\n").unwrap();
        assert_eq!(s.detector.epsilon_mm, 0.5);
        assert_eq!(s.render.width, 1200);
        assert_eq!(s.layout.jitter_salt, 7);
        s.set("epsilon_mm", "0.2").unwrap();
        assert_eq!(s.detector.epsilon_mm, 0.2);
    }

    #[test]
    fn rejects_bad_lines() {
        let mut s = Settings::default();
        let e = s.apply_text("epsilon_mm = 0.3\ncolour = red\n").unwrap_err();
        assert!(format!("{e:#}").contains("line 2"));
        assert!(s.apply_text("width\n").is_err());
        assert!(s.apply_text("height = tall\n").is_err());
    }

    #[test]
    fn validation() {
        let mut s = Settings::default();
        assert!(s.validate().is_ok());
        s.set("epsilon_mm", "0").unwrap();
        assert!(s.validate().is_err());
    }
}
