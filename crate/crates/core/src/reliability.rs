//! Seeded Monte-Carlo harness for process-variation analysis: samples
//! per-trial perturbations at levels from 0% to 30%, pushes random input
//! patterns through dual- and triple-row sensing, and tallies how often the
//! resolved logic value differs from the nominal one.
//!
//! Determinism: every trial draws from a stream keyed by (sweep seed, trial
//! index) only. Keying out the level and the mechanism gives common random
//! numbers across both, which is what makes the dominance (DRA <= TRA) and
//! monotonicity-in-level properties hold per run and also makes sharding
//! across workers irrelevant to the result.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analog::{resolve_with_variation, AnalogParams, Mechanism, VariationSample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    /// Uniform(-level, +level): the literal reading of "±X%".
    #[default]
    Uniform,
    /// Truncated Gaussian, sigma = level/3, cut at ±level.
    Gaussian,
}

/// Which perturbation sources vary; all on by default, individually
/// disableable for ablation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComponentFlags {
    pub cell_cap: bool,
    pub bl_cap: bool,
    pub cell_v: bool,
    pub thresholds: bool,
}

impl Default for ComponentFlags {
    fn default() -> Self {
        ComponentFlags {
            cell_cap: true,
            bl_cap: true,
            cell_v: true,
            thresholds: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VariationSpec {
    /// Relative deviation bound λ (0.10 means ±10%). Threshold shifts are
    /// bounded by λ in units of vdd.
    pub level: f64,
    pub distribution: Distribution,
    pub trials: u32,
    pub seed: u64,
    /// Amplitude of the additive zero-mean line-noise term, in volts.
    pub noise_amp: f64,
    pub components: ComponentFlags,
}

impl Default for VariationSpec {
    fn default() -> Self {
        VariationSpec {
            level: 0.0,
            distribution: Distribution::Uniform,
            trials: 10_000,
            seed: 42,
            noise_amp: 0.0,
            components: ComponentFlags::default(),
        }
    }
}

impl VariationSpec {
    pub fn at_level(&self, level: f64) -> VariationSpec {
        VariationSpec {
            level,
            ..self.clone()
        }
    }
}

/// One deviation value in [-level, +level]. Uniform consumes one draw;
/// Gaussian consumes Box-Muller pairs and rejects past the bound, so only
/// the uniform mode has exact common-random-numbers alignment across
/// levels (it scales one unit draw linearly).
fn draw(spec: &VariationSpec, rng: &mut impl Rng) -> f64 {
    if spec.level == 0.0 {
        // Keep the stream aligned with nonzero levels.
        let _ = rng.gen::<f64>();
        return 0.0;
    }
    match spec.distribution {
        Distribution::Uniform => spec.level * (2.0 * rng.gen::<f64>() - 1.0),
        Distribution::Gaussian => {
            let sigma = spec.level / 3.0;
            loop {
                let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.gen();
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                let v = sigma * z;
                if v.abs() <= spec.level {
                    return v;
                }
            }
        }
    }
}

/// Draws one independent perturbation of every component, scaled by the
/// spec's level. Field order is fixed so equal seeds give equal samples.
pub fn sample(spec: &VariationSpec, rng: &mut impl Rng) -> VariationSample {
    let mut s = VariationSample::default();
    let gate = |on: bool, v: f64| if on { v } else { 0.0 };
    for i in 0..3 {
        s.d_cell_cap[i] = gate(spec.components.cell_cap, draw(spec, rng));
    }
    for i in 0..3 {
        s.d_cell_v[i] = gate(spec.components.cell_v, draw(spec, rng));
    }
    s.d_bl_cap = gate(spec.components.bl_cap, draw(spec, rng));
    s.d_vs_low = gate(spec.components.thresholds, draw(spec, rng));
    s.d_vs_high = gate(spec.components.thresholds, draw(spec, rng));
    s.d_vs_mid = gate(spec.components.thresholds, draw(spec, rng));
    if spec.noise_amp > 0.0 {
        s.d_v_noise = spec.noise_amp * (2.0 * rng.gen::<f64>() - 1.0);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub level: f64,
    pub mechanism: Mechanism,
    pub trials: u32,
    pub failures: u32,
    pub failure_pct: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,mechanism,trials,failures,failure_pct,seed\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.4},{}\n",
                r.level, r.mechanism, r.trials, r.failures, r.failure_pct, r.seed
            ));
        }
        out
    }
}

fn mix(mut h: u64, v: u64) -> u64 {
    // splitmix64 step over the running hash.
    h = h.wrapping_add(v).wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = h;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(mix(seed, trial as u64))
}

/// Did this trial resolve differently from the nominal value?
fn trial_fails(
    spec: &VariationSpec,
    mechanism: Mechanism,
    params: &AnalogParams,
    trial: u32,
) -> bool {
    let mut rng = trial_rng(spec.seed, trial);
    let var = sample(spec, &mut rng);
    let pattern = rng.next_u32();
    let n = mechanism.cell_count();
    let bits: Vec<bool> = (0..n).map(|i| pattern >> i & 1 == 1).collect();
    let (_, failed) = resolve_with_variation(&bits, mechanism, params, &var)
        .expect("mechanism arity matches bits");
    failed
}

/// Runs the full sweep: every (level, mechanism) cell with `spec.trials`
/// trials. `parallelism > 1` shards trials over that many threads; the
/// tally is a commutative sum so the result is identical at any degree.
pub fn run_sweep(
    levels: &[f64],
    mechanisms: &[Mechanism],
    spec: &VariationSpec,
    params: &AnalogParams,
    parallelism: usize,
) -> SweepResult {
    let count_failures = |level_spec: &VariationSpec, mech: Mechanism| -> u32 {
        if parallelism > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .expect("thread pool");
            pool.install(|| {
                (0..level_spec.trials)
                    .into_par_iter()
                    .filter(|&t| trial_fails(level_spec, mech, params, t))
                    .count() as u32
            })
        } else {
            (0..level_spec.trials)
                .filter(|&t| trial_fails(level_spec, mech, params, t))
                .count() as u32
        }
    };

    let mut rows = Vec::new();
    for &level in levels {
        for &mech in mechanisms {
            let level_spec = spec.at_level(level);
            let failures = count_failures(&level_spec, mech);
            rows.push(SweepRow {
                level,
                mechanism: mech,
                trials: spec.trials,
                failures,
                failure_pct: failures as f64 * 100.0 / spec.trials as f64,
                seed: spec.seed,
            });
        }
    }
    SweepResult { rows }
}

pub const STANDARD_LEVELS: [f64; 6] = [0.0, 0.05, 0.10, 0.15, 0.20, 0.30];
