//! Measurement-side inverse pipeline: CLEAN deconvolution of raw scans,
//! cluster partitioning, and moment/regression estimators for the multipath,
//! small-scale, and shadowing parameters.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pathloss::PathLossFit;
use crate::svgen::MFactorScale;
use crate::types::{Cir, Tap};

/// Minimum realizations a delay bin needs before its fading is estimated.
pub const NAKAGAMI_MIN_BIN_REALIZATIONS: usize = 30;

// ---------------------------------------------------------------------------
// CLEAN deconvolution
// ---------------------------------------------------------------------------

/// CLEAN configuration.
#[derive(Debug, Clone, Copy)]
pub struct CleanConfig {
    /// Iteration stops once the residual peak falls below this fraction of
    /// the input scan's peak amplitude; recovered components below the same
    /// level are discarded.
    pub stop_fraction: f64,
    /// Iteration cap; `None` resolves to 10x the scan length.
    pub max_iterations: Option<usize>,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            stop_fraction: 0.10,
            max_iterations: None,
        }
    }
}

/// Outcome of one CLEAN run.
#[derive(Debug, Clone)]
pub struct CleanOutcome {
    pub cir: Cir,
    /// True when the iteration cap was hit with the residual still above the
    /// stop threshold; the CIR is then partial.
    pub truncated: bool,
    pub iterations: usize,
}

/// Iterative serial cancellation: repeatedly find the lag where the template
/// best matches the residual (least-squares amplitude via cross-correlation
/// normalized by template energy), record the component, and subtract the
/// scaled shifted template. Stops when the residual peak drops below
/// `stop_fraction` of the input scan's peak. Component signs are dropped in
/// the returned CIR.
pub fn clean_deconvolve(
    scan: &[f64],
    template: &[f64],
    t_s_ns: f64,
    cfg: &CleanConfig,
) -> Result<CleanOutcome> {
    if !(cfg.stop_fraction > 0.0 && cfg.stop_fraction < 1.0) {
        return Err(Error::validation("stop fraction must be in (0, 1)"));
    }
    if template.is_empty() {
        return Err(Error::validation("template must be non-empty"));
    }
    let template_energy: f64 = template.iter().map(|t| t * t).sum();
    if template_energy <= 0.0 {
        return Err(Error::validation("template must have nonzero energy"));
    }
    if scan.is_empty() || template.len() > scan.len() {
        return Err(Error::validation(
            "scan must be at least as long as the template",
        ));
    }
    if !(t_s_ns > 0.0) {
        return Err(Error::validation("sample period must be > 0"));
    }

    let n = scan.len();
    let m = template.len();
    let n_lags = n - m + 1;
    let window_ns = n as f64 * t_s_ns;
    let max_iterations = cfg.max_iterations.unwrap_or(10 * n);

    let scan_peak = scan.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let template_peak = template.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
    let residual_floor = cfg.stop_fraction * scan_peak;

    let mut residual = scan.to_vec();
    // Template autocorrelation for incremental correlation updates:
    // lag d in [-(m-1), m-1] stored at d + m - 1.
    let autocorr: Vec<f64> = (-(m as isize - 1)..m as isize)
        .map(|d| {
            let mut acc = 0.0;
            for i in 0..m {
                let j = i as isize + d;
                if (0..m as isize).contains(&j) {
                    acc += template[i] * template[j as usize];
                }
            }
            acc
        })
        .collect();
    // Raw cross-correlation of the residual with the template per lag.
    let mut corr: Vec<f64> = (0..n_lags)
        .map(|lag| {
            let mut acc = 0.0;
            for i in 0..m {
                acc += residual[lag + i] * template[i];
            }
            acc
        })
        .collect();

    let mut components: BTreeMap<usize, f64> = BTreeMap::new();
    let mut iterations = 0;
    let mut truncated = false;
    loop {
        let residual_peak = residual.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        if residual_peak < residual_floor {
            break;
        }
        if iterations >= max_iterations {
            truncated = true;
            break;
        }
        let (best_lag, best_corr) = corr
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite"))
            .expect("at least one lag");
        let amplitude = best_corr / template_energy;
        if amplitude == 0.0 {
            // Residual energy sits where no template placement can reach it.
            truncated = true;
            break;
        }
        *components.entry(best_lag).or_insert(0.0) += amplitude;
        for i in 0..m {
            residual[best_lag + i] -= amplitude * template[i];
        }
        let lo = best_lag.saturating_sub(m - 1);
        let hi = (best_lag + m - 1).min(n_lags - 1);
        for (lag, c) in corr.iter_mut().enumerate().take(hi + 1).skip(lo) {
            let d = lag as isize - best_lag as isize + m as isize - 1;
            *c -= amplitude * autocorr[d as usize];
        }
        iterations += 1;
    }

    // Components whose waveform contribution stays below the threshold are
    // discarded.
    let taps: Vec<Tap> = components
        .into_iter()
        .filter(|(_, a)| a.abs() * template_peak >= residual_floor)
        .map(|(lag, a)| Tap {
            delay_ns: lag as f64 * t_s_ns,
            amplitude: a.abs(),
            cluster: 0,
        })
        .collect();

    Ok(CleanOutcome {
        cir: Cir::new(taps, t_s_ns, window_ns)?,
        truncated,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Cluster partitioning
// ---------------------------------------------------------------------------

/// Conventional gap for splitting taps into clusters: five mean ray
/// inter-arrivals of the scenario.
pub fn default_cluster_gap_ns(ray_rate_per_ns: f64) -> f64 {
    5.0 / ray_rate_per_ns
}

/// Assign cluster indices by the gap rule: a new cluster starts whenever the
/// delay gap to the previous tap exceeds `gap_ns`. Idempotent and invariant
/// to amplitude scaling.
pub fn partition_clusters(cir: &Cir, gap_ns: f64) -> Result<Cir> {
    if !(gap_ns > 0.0) {
        return Err(Error::validation("cluster gap must be > 0"));
    }
    let mut labels = Vec::with_capacity(cir.taps().len());
    let mut current = 0usize;
    let mut prev_delay: Option<f64> = None;
    for tap in cir.taps() {
        if let Some(prev) = prev_delay {
            if tap.delay_ns - prev > gap_ns {
                current += 1;
            }
        }
        labels.push(current);
        prev_delay = Some(tap.delay_ns);
    }
    cir.clone().with_clusters(&labels)
}

// ---------------------------------------------------------------------------
// Fit report
// ---------------------------------------------------------------------------

/// Per-delay-bin fading estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiBin {
    pub delay_ns: f64,
    /// Moment estimate of the m-factor; `f64::INFINITY` marks a bin whose
    /// power did not vary across realizations.
    pub m_hat: f64,
    /// Moment estimate of the mean power.
    pub omega_hat: f64,
    /// Realizations contributing to the bin.
    pub realizations: usize,
}

/// Estimator bookkeeping carried alongside the fitted values.
#[derive(Debug, Clone, Default)]
pub struct FitDiagnostics {
    pub cir_count: usize,
    /// (cluster count, occurrences) ascending.
    pub cluster_count_histogram: Vec<(usize, usize)>,
    pub cluster_gap_count: usize,
    pub ray_gap_count: usize,
    /// RMS residual of the intra-cluster log-power regression, if fitted.
    pub intra_fit_rms: Option<f64>,
    /// RMS residual of the inter-cluster log-power regression, if fitted.
    pub inter_fit_rms: Option<f64>,
    /// Where cluster labels came from ("embedded" or "gap-rule").
    pub label_source: String,
    pub notes: Vec<String>,
}

/// Estimated channel parameters with residual diagnostics. Fields are absent
/// when the data cannot identify them; the diagnostics say why.
#[derive(Debug, Clone, Default)]
pub struct FitReport {
    /// Cluster arrival rate, 1/ns.
    pub cluster_rate: Option<f64>,
    /// Ray arrival rate, 1/ns.
    pub ray_rate: Option<f64>,
    /// Inter-cluster decay constant, ns.
    pub inter_decay_ns: Option<f64>,
    /// Intra-cluster decay constant, ns.
    pub intra_decay_ns: Option<f64>,
    /// Mean cluster count.
    pub mean_clusters: Option<f64>,
    /// Lognormal m-factor mean, dB.
    pub m_mean_db: Option<f64>,
    /// Lognormal m-factor std, dB.
    pub m_std_db: Option<f64>,
    /// Mean m of the cluster-lead bins.
    pub first_m_mean: Option<f64>,
    /// Variance of m of the cluster-lead bins.
    pub first_m_var: Option<f64>,
    /// Path loss exponent.
    pub exponent: Option<f64>,
    /// Reference path loss, dB.
    pub ref_loss_db: Option<f64>,
    /// Shadowing std, dB.
    pub shadow_sigma_db: Option<f64>,
    /// Per-bin fading estimates from the small-scale fit.
    pub nakagami_bins: Vec<NakagamiBin>,
    pub diagnostics: FitDiagnostics,
}

impl FitReport {
    /// Fill unset fields from another report and append its notes.
    pub fn absorb(&mut self, other: FitReport) {
        macro_rules! take {
            ($($f:ident),*) => {$( if self.$f.is_none() { self.$f = other.$f; } )*};
        }
        take!(
            cluster_rate, ray_rate, inter_decay_ns, intra_decay_ns, mean_clusters,
            m_mean_db, m_std_db, first_m_mean, first_m_var,
            exponent, ref_loss_db, shadow_sigma_db
        );
        if self.nakagami_bins.is_empty() {
            self.nakagami_bins = other.nakagami_bins;
        }
        if self.diagnostics.cir_count == 0 {
            self.diagnostics.cir_count = other.diagnostics.cir_count;
        }
        if self.diagnostics.cluster_count_histogram.is_empty() {
            self.diagnostics.cluster_count_histogram = other.diagnostics.cluster_count_histogram;
        }
        self.diagnostics.cluster_gap_count += other.diagnostics.cluster_gap_count;
        self.diagnostics.ray_gap_count += other.diagnostics.ray_gap_count;
        if self.diagnostics.intra_fit_rms.is_none() {
            self.diagnostics.intra_fit_rms = other.diagnostics.intra_fit_rms;
        }
        if self.diagnostics.inter_fit_rms.is_none() {
            self.diagnostics.inter_fit_rms = other.diagnostics.inter_fit_rms;
        }
        if self.diagnostics.label_source.is_empty() {
            self.diagnostics.label_source = other.diagnostics.label_source;
        }
        self.diagnostics.notes.extend(other.diagnostics.notes);
    }

    /// Copy the large-scale parameters from a path loss fit.
    pub fn merge_path_loss(&mut self, fit: &PathLossFit) {
        self.exponent = Some(fit.exponent);
        self.ref_loss_db = Some(fit.ref_loss_db);
        self.shadow_sigma_db = Some(fit.shadow_sigma_db);
    }
}

// ---------------------------------------------------------------------------
// Cluster/ray parameter fitting
// ---------------------------------------------------------------------------

/// Pool of centered regression points accumulated group by group.
#[derive(Default)]
struct CenteredRegression {
    sxx: f64,
    sxy: f64,
    /// (x - x_mean, y - y_mean) retained for the residual norm.
    points: Vec<(f64, f64)>,
}

impl CenteredRegression {
    /// Add one group of points, centered on the group means. Groups with
    /// fewer than two points carry no slope information and are skipped.
    fn add_group(&mut self, pts: &[(f64, f64)]) {
        if pts.len() < 2 {
            return;
        }
        let n = pts.len() as f64;
        let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
        for &(x, y) in pts {
            let (cx, cy) = (x - xm, y - ym);
            self.sxx += cx * cx;
            self.sxy += cx * cy;
            self.points.push((cx, cy));
        }
    }

    fn slope(&self) -> Option<f64> {
        (self.sxx > 0.0).then(|| self.sxy / self.sxx)
    }

    fn residual_rms(&self, slope: f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let ss: f64 = self
            .points
            .iter()
            .map(|&(x, y)| (y - slope * x) * (y - slope * x))
            .sum();
        (ss / self.points.len() as f64).sqrt()
    }
}

/// Estimate the cluster/ray model parameters from a labeled ensemble.
///
/// Arrival rates are exponential maximum-likelihood estimates (reciprocal
/// mean inter-arrival) pooled over the ensemble. Decay constants come from
/// pooled log-power regressions centered within their group, which absorbs
/// per-realization scale factors: the intra-cluster slope uses each
/// cluster's rays up to the next cluster's arrival (rays past it are
/// attenuated by overlap and would bias the decay), the inter-cluster slope
/// uses each realization's cluster lead powers against their delays.
pub fn fit_sv_params(ensemble: &[Cir]) -> Result<FitReport> {
    if ensemble.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "cluster/ray fitting needs at least 10 realizations, got {}",
            ensemble.len()
        )));
    }

    let mut cluster_gaps: Vec<f64> = Vec::new();
    let mut ray_gaps: Vec<f64> = Vec::new();
    let mut intra = CenteredRegression::default();
    let mut inter = CenteredRegression::default();
    let mut count_hist: BTreeMap<usize, usize> = BTreeMap::new();
    let mut skipped_zero_amp = 0usize;

    for cir in ensemble {
        // Group taps by cluster; taps arrive sorted by delay.
        let mut clusters: BTreeMap<usize, Vec<&Tap>> = BTreeMap::new();
        for tap in cir.taps() {
            clusters.entry(tap.cluster).or_default().push(tap);
        }
        if clusters.is_empty() {
            continue;
        }
        *count_hist.entry(clusters.len()).or_insert(0) += 1;

        // Cluster groups ordered by their lead (first tap) delay.
        let mut groups: Vec<&Vec<&Tap>> = clusters.values().collect();
        groups.sort_by(|a, b| {
            a[0].delay_ns
                .partial_cmp(&b[0].delay_ns)
                .expect("finite delays")
        });

        // Inter-cluster: lead delay vs log lead power, centered per CIR.
        let mut lead_pts: Vec<(f64, f64)> = Vec::new();
        for g in &groups {
            let lead = g[0];
            if lead.amplitude > 0.0 {
                lead_pts.push((lead.delay_ns, (lead.amplitude * lead.amplitude).ln()));
            } else {
                skipped_zero_amp += 1;
            }
        }
        for pair in lead_pts.windows(2) {
            cluster_gaps.push(pair[1].0 - pair[0].0);
        }
        inter.add_group(&lead_pts);

        // Intra-cluster: relative delay vs log power, centered per cluster,
        // restricted to rays ahead of the next cluster's arrival.
        for (gi, g) in groups.iter().enumerate() {
            let lead_delay = g[0].delay_ns;
            let next_lead = groups.get(gi + 1).map(|ng| ng[0].delay_ns);
            for pair in g.windows(2) {
                ray_gaps.push(pair[1].delay_ns - pair[0].delay_ns);
            }
            let seg: Vec<(f64, f64)> = g
                .iter()
                .filter(|t| next_lead.is_none_or(|nl| t.delay_ns < nl))
                .filter_map(|t| {
                    if t.amplitude > 0.0 {
                        Some((t.delay_ns - lead_delay, (t.amplitude * t.amplitude).ln()))
                    } else {
                        skipped_zero_amp += 1;
                        None
                    }
                })
                .collect();
            intra.add_group(&seg);
        }
    }

    let mut report = FitReport {
        diagnostics: FitDiagnostics {
            cir_count: ensemble.len(),
            cluster_count_histogram: count_hist.clone().into_iter().collect(),
            cluster_gap_count: cluster_gaps.len(),
            ray_gap_count: ray_gaps.len(),
            label_source: "embedded".into(),
            ..FitDiagnostics::default()
        },
        ..FitReport::default()
    };
    if skipped_zero_amp > 0 {
        report
            .diagnostics
            .notes
            .push(format!("{skipped_zero_amp} zero-amplitude taps skipped"));
    }

    let total: usize = count_hist.iter().map(|(k, v)| k * v).sum();
    let cirs: usize = count_hist.values().sum();
    if cirs > 0 {
        report.mean_clusters = Some(total as f64 / cirs as f64);
    }

    if cluster_gaps.is_empty() {
        report
            .diagnostics
            .notes
            .push("no multi-cluster realizations: cluster rate unavailable".into());
    } else {
        let mean = cluster_gaps.iter().sum::<f64>() / cluster_gaps.len() as f64;
        report.cluster_rate = Some(1.0 / mean);
    }
    if ray_gaps.is_empty() {
        report
            .diagnostics
            .notes
            .push("no intra-cluster arrival pairs: ray rate unavailable".into());
    } else {
        let mean = ray_gaps.iter().sum::<f64>() / ray_gaps.len() as f64;
        report.ray_rate = Some(1.0 / mean);
    }

    match intra.slope() {
        Some(s) if s < 0.0 => {
            report.intra_decay_ns = Some(-1.0 / s);
            report.diagnostics.intra_fit_rms = Some(intra.residual_rms(s));
        }
        _ => report
            .diagnostics
            .notes
            .push("intra-cluster decay not identifiable (no negative slope)".into()),
    }
    match inter.slope() {
        Some(s) if s < 0.0 => {
            report.inter_decay_ns = Some(-1.0 / s);
            report.diagnostics.inter_fit_rms = Some(inter.residual_rms(s));
        }
        _ => report
            .diagnostics
            .notes
            .push("inter-cluster decay not identifiable (no negative slope)".into()),
    }

    Ok(report)
}

// ---------------------------------------------------------------------------
// Small-scale fitting
// ---------------------------------------------------------------------------

/// Estimate per-bin fading and the lognormal m-factor law from realizations
/// on a common grid.
///
/// Per delay bin with at least `min_per_bin` realizations, the moment
/// estimators are `omega = mean(Y^2)` and `m = mean(Y^2)^2 / var(Y^2)`. The
/// lognormal law is fitted over the finite per-bin estimates on the chosen
/// scale; bins with zero variance get an infinite-m sentinel and are
/// excluded. The lead bins of the clusters provide the first-component
/// moments.
pub fn fit_nakagami(
    ensemble: &[Cir],
    scale: MFactorScale,
    min_per_bin: usize,
) -> Result<FitReport> {
    let first = ensemble
        .first()
        .ok_or_else(|| Error::degenerate("empty ensemble"))?;
    let t_s = first.sample_period_ns();
    if ensemble.iter().any(|c| c.sample_period_ns() != t_s) {
        return Err(Error::validation(
            "ensemble members must share a sampling grid",
        ));
    }
    if min_per_bin < 2 {
        return Err(Error::validation("need at least 2 realizations per bin"));
    }

    let bin_of = |delay_ns: f64| (delay_ns / t_s).round() as u64;
    let mut stacks: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut lead_bins: std::collections::BTreeSet<u64> = Default::default();
    for cir in ensemble {
        // Taps sharing a grid bin form one waveform sample; their amplitudes
        // add before the power is stacked.
        let mut gridded: BTreeMap<u64, f64> = BTreeMap::new();
        let mut cluster_leads: BTreeMap<usize, f64> = BTreeMap::new();
        for tap in cir.taps() {
            *gridded.entry(bin_of(tap.delay_ns)).or_insert(0.0) += tap.amplitude;
            cluster_leads
                .entry(tap.cluster)
                .or_insert(tap.delay_ns);
        }
        for (bin, amplitude) in gridded {
            stacks.entry(bin).or_default().push(amplitude * amplitude);
        }
        lead_bins.extend(cluster_leads.values().map(|&d| bin_of(d)));
    }

    let mut bins = Vec::new();
    let mut sparse_bins = 0usize;
    for (bin, powers) in &stacks {
        if powers.len() < min_per_bin {
            sparse_bins += 1;
            continue;
        }
        let n = powers.len() as f64;
        let mean = powers.iter().sum::<f64>() / n;
        let var = powers.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / (n - 1.0);
        let m_hat = if var > 0.0 {
            mean * mean / var
        } else {
            f64::INFINITY
        };
        bins.push(NakagamiBin {
            delay_ns: *bin as f64 * t_s,
            m_hat,
            omega_hat: mean,
            realizations: powers.len(),
        });
    }
    if bins.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no delay bin reaches {min_per_bin} realizations"
        )));
    }

    let finite: Vec<&NakagamiBin> = bins.iter().filter(|b| b.m_hat.is_finite()).collect();
    let mut report = FitReport {
        diagnostics: FitDiagnostics {
            cir_count: ensemble.len(),
            label_source: "embedded".into(),
            ..FitDiagnostics::default()
        },
        ..FitReport::default()
    };
    if sparse_bins > 0 {
        report.diagnostics.notes.push(format!(
            "{sparse_bins} bins below {min_per_bin} realizations ignored"
        ));
    }
    let sentinels = bins.len() - finite.len();
    if sentinels > 0 {
        report.diagnostics.notes.push(format!(
            "{sentinels} constant-power bins excluded from the lognormal fit"
        ));
    }

    if !finite.is_empty() {
        let zs: Vec<f64> = finite.iter().map(|b| scale.from_m(b.m_hat)).collect();
        let n = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / n;
        let std = if zs.len() > 1 {
            (zs.iter().map(|z| (z - mean) * (z - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        report.m_mean_db = Some(mean);
        report.m_std_db = Some(std);

        let leads: Vec<f64> = finite
            .iter()
            .filter(|b| lead_bins.contains(&bin_of(b.delay_ns)))
            .map(|b| b.m_hat)
            .collect();
        if !leads.is_empty() {
            let lm = leads.iter().sum::<f64>() / leads.len() as f64;
            let lv = if leads.len() > 1 {
                leads.iter().map(|m| (m - lm) * (m - lm)).sum::<f64>()
                    / (leads.len() - 1) as f64
            } else {
                0.0
            };
            report.first_m_mean = Some(lm);
            report.first_m_var = Some(lv);
        }
    } else {
        report
            .diagnostics
            .notes
            .push("all bins constant: lognormal m law unavailable".into());
    }

    report.nakagami_bins = bins;
    Ok(report)
}

/// Diagnostic relation between the first-component m moments and the
/// ensemble m statistics through a delay coefficient. Reported for
/// inspection only; synthesis keeps the scenario-constant lognormal law.
pub fn diagnostic_m_location(first_m_mean: f64, ensemble_m_mean: f64, delay_coeff: f64) -> f64 {
    first_m_mean - ensemble_m_mean * delay_coeff
}

/// Companion of [`diagnostic_m_location`] for the spread.
pub fn diagnostic_m_scale(first_m_var: f64, ensemble_m_var: f64, delay_coeff: f64) -> f64 {
    first_m_var - ensemble_m_var * delay_coeff
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use crate::types::DEFAULT_SAMPLE_PERIOD_NS;
    use rand_distr::{Distribution, Gamma};

    /// A short pulse with a distinct peak and a zero-crossing tail.
    fn pulse() -> Vec<f64> {
        let mut t = vec![0.0; 40];
        for (i, slot) in t.iter_mut().enumerate() {
            let x = (i as f64 - 12.0) / 4.0;
            *slot = (-0.5 * x * x).exp() * (1.5 * x).cos();
        }
        t
    }

    fn synth_scan(taps: &[(usize, f64)], template: &[f64], len: usize) -> Vec<f64> {
        let mut scan = vec![0.0; len];
        for &(lag, a) in taps {
            for (i, &t) in template.iter().enumerate() {
                scan[lag + i] += a * t;
            }
        }
        scan
    }

    // -- CLEAN ---------------------------------------------------------------

    #[test]
    fn self_deconvolution_yields_a_unit_tap_at_zero() {
        let t = pulse();
        let out = clean_deconvolve(&t.clone(), &t, 0.06, &CleanConfig::default()).unwrap();
        assert!(!out.truncated);
        assert_eq!(out.cir.taps().len(), 1);
        assert_eq!(out.cir.taps()[0].delay_ns, 0.0);
        assert!((out.cir.taps()[0].amplitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_taps_are_recovered_exactly() {
        // Template plus half-amplitude copy 100 samples (6 ns) later.
        let t = pulse();
        let scan = synth_scan(&[(0, 1.0), (100, 0.5)], &t, 200);
        let out = clean_deconvolve(&scan, &t, 0.06, &CleanConfig::default()).unwrap();
        let taps = out.cir.taps();
        assert_eq!(taps.len(), 2);
        assert_eq!(taps[0].delay_ns, 0.0);
        assert!((taps[0].amplitude - 1.0).abs() < 1e-6);
        assert!((taps[1].delay_ns - 6.0).abs() < 0.06 + 1e-12);
        assert!((taps[1].amplitude - 0.5).abs() < 1e-6 * 0.5);
    }

    #[test]
    fn sub_threshold_component_is_never_reported() {
        let t = pulse();
        let scan = synth_scan(&[(0, 1.0), (120, 0.09)], &t, 240);
        let out = clean_deconvolve(&scan, &t, 0.06, &CleanConfig::default()).unwrap();
        assert_eq!(out.cir.taps().len(), 1, "weak tap must be suppressed");
        assert_eq!(out.cir.taps()[0].delay_ns, 0.0);
    }

    #[test]
    fn clean_is_scale_equivariant() {
        let t = pulse();
        let scan = synth_scan(&[(0, 1.0), (90, 0.4), (160, 0.25)], &t, 260);
        let half: Vec<f64> = scan.iter().map(|x| x * 0.5).collect();
        let a = clean_deconvolve(&scan, &t, 0.06, &CleanConfig::default()).unwrap();
        let b = clean_deconvolve(&half, &t, 0.06, &CleanConfig::default()).unwrap();
        assert_eq!(a.cir.taps().len(), b.cir.taps().len());
        for (ta, tb) in a.cir.taps().iter().zip(b.cir.taps()) {
            assert_eq!(ta.delay_ns, tb.delay_ns);
            assert!((tb.amplitude - 0.5 * ta.amplitude).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_energy_never_grows() {
        // Subtracting the least-squares component cannot add energy; checked
        // through monotone iteration counts on a noisy-ish composite.
        let t = pulse();
        let mut scan = synth_scan(&[(0, 1.0), (55, 0.7), (130, 0.3)], &t, 220);
        // Deterministic ripple that the template cannot fully explain.
        for (i, s) in scan.iter_mut().enumerate() {
            *s += 0.001 * ((i as f64) * 0.7).sin();
        }
        let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        let mut residual = scan.clone();
        let out = clean_deconvolve(&scan, &t, 0.06, &CleanConfig::default()).unwrap();
        // Replay the subtraction from the reported taps; energy must fall.
        let mut prev = energy(&residual);
        for tap in out.cir.taps() {
            let lag = (tap.delay_ns / 0.06).round() as usize;
            for (i, &tv) in t.iter().enumerate() {
                residual[lag + i] -= tap.amplitude * tv;
            }
            let e = energy(&residual);
            assert!(e <= prev + 1e-12);
            prev = e;
        }
    }

    #[test]
    fn zero_template_is_rejected() {
        let scan = vec![1.0; 64];
        assert!(clean_deconvolve(&scan, &[0.0; 8], 0.06, &CleanConfig::default()).is_err());
        assert!(clean_deconvolve(&scan, &[], 0.06, &CleanConfig::default()).is_err());
    }

    #[test]
    fn iteration_cap_flags_truncation() {
        let t = pulse();
        let scan = synth_scan(&[(0, 1.0), (100, 0.8), (150, 0.6)], &t, 220);
        let cfg = CleanConfig {
            max_iterations: Some(1),
            ..CleanConfig::default()
        };
        let out = clean_deconvolve(&scan, &t, 0.06, &cfg).unwrap();
        assert!(out.truncated);
        assert!(out.iterations <= 1);
    }

    // -- partitioning -------------------------------------------------------

    fn cir_at(delays: &[f64]) -> Cir {
        Cir::on_default_grid(
            delays
                .iter()
                .map(|&d| Tap { delay_ns: d, amplitude: 1.0, cluster: 0 })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn gap_rule_splits_clusters() {
        let cir = cir_at(&[0.0, 0.2, 0.4, 20.0, 20.3]);
        let labeled = partition_clusters(&cir, 5.0).unwrap();
        let labels: Vec<usize> = labeled.taps().iter().map(|t| t.cluster).collect();
        assert_eq!(labels, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn one_tap_is_one_cluster() {
        let labeled = partition_clusters(&cir_at(&[3.0]), 5.0).unwrap();
        assert_eq!(labeled.taps()[0].cluster, 0);
    }

    #[test]
    fn infinite_gap_keeps_one_cluster() {
        let labeled = partition_clusters(&cir_at(&[0.0, 30.0, 90.0]), f64::INFINITY).unwrap();
        assert!(labeled.taps().iter().all(|t| t.cluster == 0));
    }

    #[test]
    fn partitioning_is_idempotent_and_scale_invariant() {
        let cir = cir_at(&[0.0, 0.5, 12.0, 12.2, 40.0]);
        let once = partition_clusters(&cir, 5.0).unwrap();
        let twice = partition_clusters(&once, 5.0).unwrap();
        assert_eq!(once, twice);

        let scaled = Cir::on_default_grid(
            cir.taps()
                .iter()
                .map(|t| Tap { amplitude: t.amplitude * 7.5, ..*t })
                .collect(),
        )
        .unwrap();
        let scaled_labels = partition_clusters(&scaled, 5.0).unwrap();
        let a: Vec<usize> = once.taps().iter().map(|t| t.cluster).collect();
        let b: Vec<usize> = scaled_labels.taps().iter().map(|t| t.cluster).collect();
        assert_eq!(a, b);
    }

    // -- fit_sv_params ---------------------------------------------------------

    #[test]
    fn noiseless_exponential_decay_is_fit_exactly() {
        // Power decays exp(-tau / 1 ns) within a single cluster.
        let beta = 1.0;
        let cirs: Vec<Cir> = (0..10)
            .map(|_| {
                Cir::on_default_grid(
                    (0..20)
                        .map(|i| {
                            let tau = i as f64 * 0.3;
                            Tap {
                                delay_ns: tau,
                                amplitude: (-tau / (2.0 * beta)).exp(),
                                cluster: 0,
                            }
                        })
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let report = fit_sv_params(&cirs).unwrap();
        assert!((report.intra_decay_ns.unwrap() - beta).abs() < 1e-9);
        assert_eq!(report.mean_clusters, Some(1.0));
        // Single cluster everywhere: no cluster rate.
        assert!(report.cluster_rate.is_none());
    }

    #[test]
    fn single_cluster_ensembles_report_unit_mean_count() {
        let cirs: Vec<Cir> = (0..12).map(|_| cir_at(&[0.0, 1.0, 2.0])).collect();
        let report = fit_sv_params(&cirs).unwrap();
        assert_eq!(report.mean_clusters, Some(1.0));
        assert_eq!(report.diagnostics.cluster_count_histogram, vec![(1, 12)]);
    }

    #[test]
    fn too_few_realizations_is_an_error() {
        let cirs: Vec<Cir> = (0..9).map(|_| cir_at(&[0.0])).collect();
        assert!(matches!(
            fit_sv_params(&cirs),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn rate_estimate_converges_on_exponential_arrivals() {
        // ~1e4 pooled inter-arrivals put the rate estimate within 3%.
        use crate::svgen::draw_arrival_times;
        let rate = 0.7;
        let mut rng = RandomSource::new(21, 0);
        let cirs: Vec<Cir> = (0..11)
            .map(|_| {
                let taps = draw_arrival_times(1000, rate, &mut rng)
                    .into_iter()
                    .map(|t| Tap { delay_ns: t, amplitude: 1.0, cluster: 0 })
                    .collect();
                Cir::new(taps, 0.06, 1e7).unwrap()
            })
            .collect();
        let report = fit_sv_params(&cirs).unwrap();
        let rate_hat = report.ray_rate.unwrap();
        assert!(
            (rate_hat - rate).abs() / rate < 0.03,
            "rate_hat {rate_hat} vs {rate}"
        );
        assert_eq!(report.diagnostics.ray_gap_count, 11 * 999);
    }

    // -- fit_nakagami -----------------------------------------------------------

    #[test]
    fn moment_estimator_recovers_known_m_per_bin() {
        let mut rng = RandomSource::new(77, 0);
        let m = 2.0f64;
        let omega = 1.0f64;
        let gamma = Gamma::new(m, omega / m).unwrap();
        let n = 100_000;
        let cirs: Vec<Cir> = (0..n)
            .map(|_| {
                Cir::on_default_grid(vec![Tap {
                    delay_ns: 0.0,
                    amplitude: gamma.sample(&mut rng).sqrt(),
                    cluster: 0,
                }])
                .unwrap()
            })
            .collect();
        let report = fit_nakagami(&cirs, MFactorScale::Decibel, 30).unwrap();
        assert_eq!(report.nakagami_bins.len(), 1);
        let bin = report.nakagami_bins[0];
        assert!(bin.m_hat > 1.9 && bin.m_hat < 2.1, "m_hat {}", bin.m_hat);
        assert!((bin.omega_hat - 1.0).abs() < 0.01);
    }

    #[test]
    fn constant_bins_get_the_infinite_sentinel() {
        let cirs: Vec<Cir> = (0..40)
            .map(|_| {
                Cir::on_default_grid(vec![Tap {
                    delay_ns: 0.0,
                    amplitude: 0.5,
                    cluster: 0,
                }])
                .unwrap()
            })
            .collect();
        let report = fit_nakagami(&cirs, MFactorScale::Decibel, 30).unwrap();
        assert!(report.nakagami_bins[0].m_hat.is_infinite());
        assert!((report.nakagami_bins[0].omega_hat - 0.25).abs() < 1e-12);
        // Excluded from the lognormal law.
        assert!(report.m_mean_db.is_none());
    }

    #[test]
    fn sparse_bins_are_ignored() {
        let mut cirs: Vec<Cir> = (0..40)
            .map(|i| {
                Cir::on_default_grid(vec![Tap {
                    delay_ns: 0.0,
                    amplitude: 0.5 + 0.001 * (i % 7) as f64,
                    cluster: 0,
                }])
                .unwrap()
            })
            .collect();
        // One realization with an extra tap: that bin has n = 1 < 30.
        cirs[0] = Cir::on_default_grid(vec![
            Tap { delay_ns: 0.0, amplitude: 0.5, cluster: 0 },
            Tap { delay_ns: 5.0, amplitude: 0.2, cluster: 0 },
        ])
        .unwrap();
        let report = fit_nakagami(&cirs, MFactorScale::Decibel, 30).unwrap();
        assert_eq!(report.nakagami_bins.len(), 1);
        assert!(!report.diagnostics.notes.is_empty());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let a = Cir::on_default_grid(vec![Tap { delay_ns: 0.0, amplitude: 1.0, cluster: 0 }])
            .unwrap();
        let b = Cir::new(
            vec![Tap { delay_ns: 0.0, amplitude: 1.0, cluster: 0 }],
            DEFAULT_SAMPLE_PERIOD_NS * 2.0,
            100.0,
        )
        .unwrap();
        assert!(fit_nakagami(&[a, b], MFactorScale::Decibel, 2).is_err());
    }

    #[test]
    fn diagnostic_relations_are_linear() {
        assert_eq!(diagnostic_m_location(2.0, 1.5, 0.4), 2.0 - 0.6);
        assert_eq!(diagnostic_m_scale(0.9, 0.5, 0.2), 0.9 - 0.1);
    }
}
