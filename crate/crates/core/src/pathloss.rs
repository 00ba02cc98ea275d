//! Large-scale path loss: deterministic and Doppler-corrected evaluation,
//! extraction of measured loss from scan sets, and linear model fitting.
//!
//! The distance law is
//! `PL = PL0 + 10 a log10(d/d0) - 10 log10(dh/h_opt) + C_p + S`
//! with `dh = |h_gnd - h_opt|`. Note the sign of the height term: as
//! written, loss grows without bound as the receiver approaches the optimum
//! height, so the ratio is clamped below at [`MIN_HEIGHT_RATIO`], capping
//! the term at +20 dB and keeping the model total.

use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimation::{clean_deconvolve, CleanConfig};
use crate::rng::RandomSource;
use crate::types::{
    EnvironmentClass, Geometry, PathLossParams, ScanSet, ScenarioId, ScenarioPreset,
    SPEED_OF_LIGHT_M_S,
};

/// Lower clamp on `dh / h_opt` in the height term.
pub const MIN_HEIGHT_RATIO: f64 = 1e-2;

/// One measured or synthesized path loss observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossSample {
    pub env: EnvironmentClass,
    pub scenario: ScenarioId,
    pub v_mph: u32,
    pub distance_m: f64,
    pub path_loss_db: f64,
}

/// Result of a least-squares fit of the distance law.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossFit {
    /// Fitted path loss exponent.
    pub exponent: f64,
    /// Fitted reference loss, dB. Height and constant-loss terms are
    /// absorbed here; the fit recovers the true reference loss only when
    /// those terms are zero.
    pub ref_loss_db: f64,
    /// Sample standard deviation of the residuals, dB.
    pub shadow_sigma_db: f64,
    /// Per-sample residuals, dB.
    pub residuals: Vec<f64>,
}

/// Static path loss in dB. `shadowing_db` is added as-is; `None` means 0.
pub fn path_loss_static(
    geom: &Geometry,
    params: &PathLossParams,
    shadowing_db: Option<f64>,
) -> f64 {
    let height_ratio =
        ((geom.ground_height_m - geom.optimum_height_m).abs() / geom.optimum_height_m)
            .max(MIN_HEIGHT_RATIO);
    params.ref_loss_db
        + 10.0 * params.exponent * (geom.distance_m / geom.ref_distance_m).log10()
        - 10.0 * height_ratio.log10()
        + params.constant_loss_db
        + shadowing_db.unwrap_or(0.0)
}

/// Path loss with the Doppler frequency-dependence term
/// `10 x log10((f_e + df)/f_e)`, `df = (v/c) f_e`. At zero speed this is
/// bitwise identical to [`path_loss_static`].
pub fn path_loss_doppler(
    geom: &Geometry,
    params: &PathLossParams,
    shadowing_db: Option<f64>,
) -> f64 {
    let delta_f = geom.speed_m_s / SPEED_OF_LIGHT_M_S * params.center_freq_hz;
    let doppler_db = 10.0
        * params.freq_exponent
        * ((params.center_freq_hz + delta_f) / params.center_freq_hz).log10();
    path_loss_static(geom, params, shadowing_db) + doppler_db
}

/// Draw one shadowing value, dB: zero-mean Gaussian with the preset sigma.
pub fn draw_shadowing(params: &PathLossParams, rng: &mut RandomSource) -> f64 {
    if params.shadow_sigma_db == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, params.shadow_sigma_db)
        .expect("validated sigma")
        .sample(rng)
}

/// Measured average path loss at distance `d` from scan sets at the
/// reference distance and at `d`:
/// `PL(d) = pl_ref_db + 10 log10(E_ref / E_d)`, where each energy is the
/// scan-averaged energy of the deconvolved impulse responses.
pub fn measured_path_loss(
    reference: &ScanSet,
    at_distance: &ScanSet,
    pl_ref_db: f64,
    clean: &CleanConfig,
) -> Result<f64> {
    reference.validate()?;
    at_distance.validate()?;
    if reference.t_s_ns != at_distance.t_s_ns
        || reference.scans[0].len() != at_distance.scans[0].len()
    {
        return Err(Error::validation(
            "scan sets must share sample period and window",
        ));
    }
    let e_ref = mean_cir_energy(reference, clean)?;
    let e_at = mean_cir_energy(at_distance, clean)?;
    if e_ref <= 0.0 {
        return Err(Error::degenerate("reference scan set has zero energy"));
    }
    if e_at <= 0.0 {
        return Err(Error::degenerate("scan set at distance has zero energy"));
    }
    Ok(pl_ref_db + 10.0 * (e_ref / e_at).log10())
}

/// Average deconvolved-CIR energy per scan; the sum over time of the
/// scan-averaged power profile.
fn mean_cir_energy(set: &ScanSet, clean: &CleanConfig) -> Result<f64> {
    let mut total = 0.0;
    for scan in &set.scans {
        let outcome = clean_deconvolve(scan, &set.template, set.t_s_ns, clean)?;
        total += outcome.cir.energy();
    }
    Ok(total / set.scans.len() as f64)
}

/// Ordinary least squares of path loss on `10 log10(d/d0)`.
pub fn fit_path_loss(samples: &[PathLossSample], d0_m: f64) -> Result<PathLossFit> {
    if !(d0_m > 0.0) {
        return Err(Error::validation("reference distance must be > 0"));
    }
    if samples.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "path loss fit needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut distinct = samples
        .iter()
        .map(|s| s.distance_m)
        .collect::<Vec<_>>();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(Error::RankDeficient(
            "all samples share one distance; the exponent is unidentifiable".into(),
        ));
    }
    for s in samples {
        if !(s.distance_m > 0.0) || !s.path_loss_db.is_finite() {
            return Err(Error::validation("samples must have d > 0 and finite loss"));
        }
    }

    let n = samples.len() as f64;
    let xs: Vec<f64> = samples
        .iter()
        .map(|s| 10.0 * (s.distance_m / d0_m).log10())
        .collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = samples.iter().map(|s| s.path_loss_db).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, s) in xs.iter().zip(samples) {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (s.path_loss_db - y_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let residuals: Vec<f64> = xs
        .iter()
        .zip(samples)
        .map(|(x, s)| s.path_loss_db - (intercept + slope * x))
        .collect();
    let dof = (samples.len() - 2).max(1) as f64;
    let sigma = (residuals.iter().map(|r| r * r).sum::<f64>() / dof).sqrt();

    Ok(PathLossFit {
        exponent: slope,
        ref_loss_db: intercept,
        shadow_sigma_db: sigma,
        residuals,
    })
}

/// Synthesize path loss samples for a preset from the distance law at the
/// given distances, optionally with one shadowing draw per sample. Used by
/// the round-trip checks and the CLI sweep.
pub fn synthesize_samples(
    preset: &ScenarioPreset,
    geometry: &Geometry,
    distances_m: &[f64],
    shadowed: bool,
    rng: &mut RandomSource,
) -> Vec<PathLossSample> {
    distances_m
        .iter()
        .map(|&d| {
            let geom = Geometry {
                distance_m: d,
                ..*geometry
            };
            let s = if shadowed {
                Some(draw_shadowing(&preset.pl, rng))
            } else {
                None
            };
            PathLossSample {
                env: preset.env,
                scenario: preset.scenario,
                v_mph: preset.v_mph,
                distance_m: d,
                path_loss_db: path_loss_doppler(&geom, &preset.pl, s),
            }
        })
        .collect()
}
