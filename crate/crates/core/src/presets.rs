//! Scenario preset registry.
//!
//! Holds the fitted model constants for every environment/scenario/speed
//! combination: 12 path loss records (two speeds), 6 multipath records, and
//! 6 small-scale fading records. The registry is built once, calibrated, and
//! immutable afterwards.
//!
//! Two constants of the cluster model are derived rather than tabulated:
//!
//! * `env_coeff` is solved so that the rounded, clamped cluster-count draw
//!   `max(1, round(env_coeff / h + noise))` has the tabulated mean count at
//!   the reference height of 8 m;
//! * the decay scaling used by the generator is anchored the same way (see
//!   [`crate::svgen`]).
//!
//! Defaults for the untabulated shape constants: `delay_coeff = 2`,
//! `height_coeff = 2`, noise sigmas at 10% of the decay constant and mean
//! count respectively. All of them are plain struct fields and can be
//! overridden on a copy of the preset.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::types::{
    EnvironmentClass, NakagamiParams, PathLossParams, ScenarioId, ScenarioPreset, SvParams,
};

/// UAV height at which the cluster statistics are anchored, m.
pub const REFERENCE_HEIGHT_M: f64 = 8.0;
/// Center frequency of the sounded band, Hz.
pub const CENTER_FREQ_HZ: f64 = 4.3e9;
/// Lower edge of the sounded band, Hz.
pub const BAND_START_HZ: f64 = 3.1e9;
/// Upper edge of the sounded band, Hz.
pub const BAND_STOP_HZ: f64 = 5.3e9;
/// Pulse repetition frequency of the sounder, Hz (metadata only).
pub const PULSE_REPETITION_HZ: f64 = 10.1e6;
/// Maximum transmit power of the sounder, dBm (metadata only).
pub const MAX_TX_POWER_DBM: f64 = -14.5;
/// Distance range the path loss fits cover, m.
pub const FIT_DISTANCE_RANGE_M: (f64, f64) = (5.6, 16.5);

/// Default frequency exponent of the Doppler term.
const DEFAULT_FREQ_EXPONENT: f64 = 2.0;

// ---------------------------------------------------------------------------
// Tabulated constants
// ---------------------------------------------------------------------------

// (env, scenario, v_mph, alpha, pl0_db, sigma_db)
const PATH_LOSS_ROWS: [(EnvironmentClass, ScenarioId, u32, f64, f64, f64); 12] = [
    (EnvironmentClass::Open, ScenarioId::S1Foliage, 0, 2.6471, 34.905, 3.37),
    (EnvironmentClass::Open, ScenarioId::S2Ground1m5, 0, 2.5418, 24.9965, 3.06),
    (EnvironmentClass::Open, ScenarioId::S3Ground7cm, 0, 2.9442, 25.8091, 2.799),
    (EnvironmentClass::Open, ScenarioId::S1Foliage, 20, 2.6533, 34.906, 4.02),
    (EnvironmentClass::Open, ScenarioId::S2Ground1m5, 20, 2.6621, 24.996, 3.91),
    (EnvironmentClass::Open, ScenarioId::S3Ground7cm, 20, 2.9423, 25.809, 3.44),
    (EnvironmentClass::SubUrban, ScenarioId::S1Foliage, 0, 2.7601, 30.4459, 4.8739),
    (EnvironmentClass::SubUrban, ScenarioId::S2Ground1m5, 0, 2.606, 24.747, 4.31),
    (EnvironmentClass::SubUrban, ScenarioId::S3Ground7cm, 0, 3.0374, 21.96, 4.897),
    (EnvironmentClass::SubUrban, ScenarioId::S1Foliage, 20, 2.8350, 30.446, 5.3),
    (EnvironmentClass::SubUrban, ScenarioId::S2Ground1m5, 20, 2.667, 24.833, 4.96),
    (EnvironmentClass::SubUrban, ScenarioId::S3Ground7cm, 20, 2.961, 22.73, 4.71),
];

// (env, scenario, mean_clusters, cluster_rate, ray_rate, inter_decay_ns, intra_decay_ns)
const PDP_ROWS: [(EnvironmentClass, ScenarioId, f64, f64, f64, f64, f64); 6] = [
    (EnvironmentClass::Open, ScenarioId::S1Foliage, 2.33, 0.15, 4.34, 2.5, 0.5),
    (EnvironmentClass::Open, ScenarioId::S2Ground1m5, 2.33, 0.09, 2.210, 2.91, 0.9069),
    (EnvironmentClass::Open, ScenarioId::S3Ground7cm, 1.0, 0.0498, 0.532, 4.42, 1.21),
    (EnvironmentClass::SubUrban, ScenarioId::S1Foliage, 2.66, 0.789, 0.827, 2.63, 0.9),
    (EnvironmentClass::SubUrban, ScenarioId::S2Ground1m5, 2.66, 0.0498, 0.717, 2.77, 1.4),
    (EnvironmentClass::SubUrban, ScenarioId::S3Ground7cm, 2.66, 0.06, 0.615, 3.03, 1.6),
];

// (env, scenario, m_mean_db, m_std_db)
const SMALL_SCALE_ROWS: [(EnvironmentClass, ScenarioId, f64, f64); 6] = [
    (EnvironmentClass::Open, ScenarioId::S1Foliage, 1.36, 2.19),
    (EnvironmentClass::Open, ScenarioId::S2Ground1m5, 1.67, 0.64),
    (EnvironmentClass::Open, ScenarioId::S3Ground7cm, 1.45, 0.79),
    (EnvironmentClass::SubUrban, ScenarioId::S1Foliage, 1.12, 2.705),
    (EnvironmentClass::SubUrban, ScenarioId::S2Ground1m5, 1.58, 1.55),
    (EnvironmentClass::SubUrban, ScenarioId::S3Ground7cm, 1.34, 1.471),
];

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Mean of `max(1, round(theta + N(0, sigma^2)))`.
fn clamped_round_mean(theta: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return theta.round().max(1.0);
    }
    // Everything below 1.5 rounds/clamps to 1.
    let mut mean = normal_cdf((1.5 - theta) / sigma);
    let mut k: u64 = 2;
    loop {
        let lo = (k as f64 - 0.5 - theta) / sigma;
        let hi = (k as f64 + 0.5 - theta) / sigma;
        mean += k as f64 * (normal_cdf(hi) - normal_cdf(lo));
        if lo > 8.0 {
            return mean;
        }
        k += 1;
    }
}

/// Solve for the pre-round location `theta` whose clamped rounded mean equals
/// the target count. The mean is >= 1 for any location, so targets at or
/// below 1 return the target itself (the clamp then pins the mean to 1).
fn calibrate_count_location(mean_clusters: f64, sigma: f64) -> f64 {
    if mean_clusters <= 1.0 {
        return mean_clusters;
    }
    let mut lo = 0.0;
    let mut hi = mean_clusters + 6.0 * sigma + 1.0;
    if clamped_round_mean(lo, sigma) >= mean_clusters {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if clamped_round_mean(mid, sigma) < mean_clusters {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Unclamped lognormal moments of the m-factor under the dB mapping.
fn lognormal_m_moments(mean_db: f64, std_db: f64) -> (f64, f64) {
    let ln10_over10 = std::f64::consts::LN_10 / 10.0;
    let mu = mean_db * ln10_over10;
    let s2 = (std_db * ln10_over10).powi(2);
    let mean = (mu + s2 / 2.0).exp();
    let var = (s2.exp() - 1.0) * (2.0 * mu + s2).exp();
    (mean, var)
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

fn build_sv(env: EnvironmentClass, scenario: ScenarioId) -> SvParams {
    let row = PDP_ROWS
        .iter()
        .find(|r| r.0 == env && r.1 == scenario)
        .expect("pdp table covers all env/scenario pairs");
    let (_, _, mean_clusters, cluster_rate, ray_rate, inter_decay, intra_decay) = *row;
    let count_sigma = 0.1 * mean_clusters;
    let theta = calibrate_count_location(mean_clusters, count_sigma);
    SvParams {
        cluster_rate,
        ray_rate,
        inter_decay_ns: inter_decay,
        intra_decay_ns: intra_decay,
        mean_clusters,
        delay_coeff: 2.0,
        height_coeff: 2.0,
        env_coeff: theta * REFERENCE_HEIGHT_M,
        decay_sigma_ns: 0.1 * inter_decay,
        count_sigma,
    }
}

fn build_nak(env: EnvironmentClass, scenario: ScenarioId) -> NakagamiParams {
    let row = SMALL_SCALE_ROWS
        .iter()
        .find(|r| r.0 == env && r.1 == scenario)
        .expect("small-scale table covers all env/scenario pairs");
    let (_, _, mean_db, std_db) = *row;
    let (first_m_mean, first_m_var) = lognormal_m_moments(mean_db, std_db);
    NakagamiParams {
        m_mean_db: mean_db,
        m_std_db: std_db,
        first_m_mean,
        first_m_var,
    }
}

fn build_registry() -> Vec<ScenarioPreset> {
    PATH_LOSS_ROWS
        .iter()
        .map(|&(env, scenario, v_mph, alpha, pl0, sigma)| {
            let constant_loss_db = 0.0; // folded into pl0 by the fits
            let pl = PathLossParams {
                exponent: alpha,
                ref_loss_db: pl0,
                shadow_sigma_db: sigma,
                constant_loss_db,
                freq_exponent: DEFAULT_FREQ_EXPONENT,
                center_freq_hz: CENTER_FREQ_HZ,
            };
            ScenarioPreset {
                env,
                scenario,
                v_mph,
                pl,
                sv: build_sv(env, scenario),
                nak: build_nak(env, scenario),
            }
        })
        .collect()
}

fn registry() -> &'static [ScenarioPreset] {
    static REGISTRY: OnceLock<Vec<ScenarioPreset>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

/// Look up the full preset for an environment, scenario, and speed label.
pub fn preset_lookup(
    env: EnvironmentClass,
    scenario: ScenarioId,
    v_mph: u32,
) -> Result<&'static ScenarioPreset> {
    registry()
        .iter()
        .find(|p| p.env == env && p.scenario == scenario && p.v_mph == v_mph)
        .ok_or(Error::PresetNotFound {
            env,
            scenario,
            v_mph,
        })
}

/// All presets, ordered as tabulated (open then sub-urban, v=0 then v=20).
pub fn all_presets() -> &'static [ScenarioPreset] {
    registry()
}

/// The six distinct (env, scenario) pairs, open environment first.
pub fn env_scenario_pairs() -> impl Iterator<Item = (EnvironmentClass, ScenarioId)> {
    PDP_ROWS.iter().map(|r| (r.0, r.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn lookup_matches_tabulated_path_loss() {
        let p = preset_lookup(EnvironmentClass::Open, ScenarioId::S2Ground1m5, 0).unwrap();
        assert_eq!(p.pl.exponent, 2.5418);
        assert_eq!(p.pl.ref_loss_db, 24.9965);
        assert_eq!(p.pl.shadow_sigma_db, 3.06);

        let p = preset_lookup(EnvironmentClass::SubUrban, ScenarioId::S3Ground7cm, 20).unwrap();
        assert_eq!(p.pl.exponent, 2.961);
        assert_eq!(p.pl.ref_loss_db, 22.73);
        assert_eq!(p.pl.shadow_sigma_db, 4.71);

        let p = preset_lookup(EnvironmentClass::Open, ScenarioId::S1Foliage, 0).unwrap();
        assert_eq!(p.pl.exponent, 2.6471);
        assert_eq!(p.pl.ref_loss_db, 34.905);
        assert_eq!(p.pl.shadow_sigma_db, 3.37);
    }

    #[test]
    fn lookup_matches_tabulated_multipath() {
        let p = preset_lookup(EnvironmentClass::Open, ScenarioId::S2Ground1m5, 0).unwrap();
        assert_eq!(p.sv.cluster_rate, 0.09);
        assert_eq!(p.sv.ray_rate, 2.210);
        assert_eq!(p.sv.inter_decay_ns, 2.91);
        assert_eq!(p.sv.intra_decay_ns, 0.9069);
        assert_eq!(p.sv.mean_clusters, 2.33);

        let p = preset_lookup(EnvironmentClass::SubUrban, ScenarioId::S1Foliage, 0).unwrap();
        assert_eq!(p.sv.cluster_rate, 0.789);
        assert_eq!(p.sv.ray_rate, 0.827);
        assert_eq!(p.sv.inter_decay_ns, 2.63);
        assert_eq!(p.sv.intra_decay_ns, 0.9);
    }

    #[test]
    fn lookup_matches_tabulated_small_scale() {
        let p = preset_lookup(EnvironmentClass::Open, ScenarioId::S2Ground1m5, 0).unwrap();
        assert_eq!(p.nak.m_mean_db, 1.67);
        assert_eq!(p.nak.m_std_db, 0.64);
        let p = preset_lookup(EnvironmentClass::SubUrban, ScenarioId::S2Ground1m5, 20).unwrap();
        assert_eq!(p.nak.m_mean_db, 1.58);
        assert_eq!(p.nak.m_std_db, 1.55);
    }

    #[test]
    fn unknown_combination_is_an_error() {
        let err = preset_lookup(EnvironmentClass::Open, ScenarioId::S2Ground1m5, 10);
        assert!(matches!(err, Err(Error::PresetNotFound { .. })));
    }

    #[test]
    fn registry_is_total_and_valid() {
        assert_eq!(all_presets().len(), 12);
        for p in all_presets() {
            p.pl.validate().unwrap();
            p.sv.validate().unwrap();
            p.nak.validate().unwrap();
        }
        // sv/nak shared across speeds of the same (env, scenario)
        for (env, sc) in env_scenario_pairs() {
            let a = preset_lookup(env, sc, 0).unwrap();
            let b = preset_lookup(env, sc, 20).unwrap();
            assert_eq!(a.sv, b.sv);
            assert_eq!(a.nak, b.nak);
        }
    }

    #[test]
    fn count_calibration_reproduces_mean_at_reference_height() {
        // Monte Carlo against the analytic calibration target.
        for (env, sc) in env_scenario_pairs() {
            let sv = preset_lookup(env, sc, 0).unwrap().sv;
            let theta = sv.env_coeff / REFERENCE_HEIGHT_M;
            let mut rng = RandomSource::new(99, 0);
            let noise = Normal::new(0.0, sv.count_sigma).unwrap();
            let n = 100_000;
            let mean = (0..n)
                .map(|_| (theta + noise.sample(&mut rng)).round().max(1.0))
                .sum::<f64>()
                / n as f64;
            assert!(
                (mean - sv.mean_clusters).abs() < 0.05,
                "{env}/{sc}: mean {mean} vs target {}",
                sv.mean_clusters
            );
        }
    }

    #[test]
    fn first_component_moments_match_lognormal() {
        // eta = 0 dB, xi = 0 is the degenerate m = 1 case.
        let (mean, var) = lognormal_m_moments(0.0, 0.0);
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(var.abs() < 1e-12);
    }

    #[test]
    fn characteristic_delay() {
        let sv = preset_lookup(EnvironmentClass::Open, ScenarioId::S2Ground1m5, 0)
            .unwrap()
            .sv;
        // (2.33 - 1) / (2 * 0.09)
        assert!((sv.characteristic_cluster_delay_ns() - 7.388888888888889).abs() < 1e-12);
        let s3 = preset_lookup(EnvironmentClass::Open, ScenarioId::S3Ground7cm, 0)
            .unwrap()
            .sv;
        assert_eq!(s3.characteristic_cluster_delay_ns(), 0.0);
    }
}
