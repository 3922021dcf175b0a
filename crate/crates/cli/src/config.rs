//! Run configuration: one JSON document, schema-validated, with presets.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use drim_core::analog::{AnalogEngine, AnalogParams};
use drim_core::geometry::Geometry;
use drim_core::perf::{CostModel, CostParams};
use drim_core::reliability::VariationSpec;

/// On-disk shape; every field optional, unknown fields rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ConfigFile {
    preset: Option<String>,
    geometry: Option<Geometry>,
    analog: Option<AnalogParams>,
    cost: Option<CostParams>,
    variation: Option<VariationSpec>,
    seed: Option<u64>,
    parallelism: Option<usize>,
}

/// Fully resolved configuration every command runs against.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub analog: AnalogParams,
    pub cost: CostParams,
    pub variation: VariationSpec,
    pub seed: u64,
    pub parallelism: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            geometry: Geometry::default(),
            analog: AnalogParams::default(),
            cost: CostParams::default(),
            variation: VariationSpec::default(),
            seed: 42,
            parallelism: 0,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let file: ConfigFile = serde_json::from_str(&text)
            .map_err(|e| format!("config {}: {e}", path.display()))?;

        let mut cfg = RunConfig::default();
        if let Some(preset) = &file.preset {
            cfg.geometry = match preset.as_str() {
                "drim-r" => Geometry::drim_r(),
                "drim-s" => Geometry::drim_s(),
                other => return Err(format!("unknown preset `{other}` (drim-r, drim-s)")),
            };
        }
        if let Some(g) = file.geometry {
            cfg.geometry = g;
        }
        if let Some(a) = file.analog {
            cfg.analog = a;
        }
        if let Some(c) = file.cost {
            cfg.cost = c;
        }
        if let Some(v) = file.variation {
            cfg.variation = v;
        }
        if let Some(s) = file.seed {
            cfg.seed = s;
            cfg.variation.seed = s;
        }
        if let Some(p) = file.parallelism {
            cfg.parallelism = p;
        }

        cfg.geometry.validate().map_err(|e| e.to_string())?;
        cfg.analog.validate().map_err(|e| e.to_string())?;
        if !(0.0..=0.3).contains(&cfg.variation.level) {
            return Err("variation level must be within [0, 0.3]".into());
        }
        if cfg.variation.trials == 0 {
            return Err("variation trials must be at least 1".into());
        }
        Ok(cfg)
    }

    pub fn engine(&self) -> AnalogEngine {
        AnalogEngine::new(self.analog.clone()).expect("validated parameters")
    }

    pub fn cost_model(&self) -> CostModel {
        CostModel {
            params: self.cost.clone(),
            geometry: self.geometry.clone(),
            parallel_subarrays: self.geometry.subarray_count(),
        }
    }

    /// Worker threads: the flag, else the config, else all cores.
    pub fn effective_parallelism(&self, flag: Option<usize>) -> usize {
        match flag.or(Some(self.parallelism)) {
            Some(0) | None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Some(n) => n,
        }
    }
}
