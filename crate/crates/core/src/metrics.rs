//! Delay- and frequency-domain channel statistics: PDP averaging, mean
//! excess delay, RMS delay spread, coherence bandwidth, frequency responses,
//! and sub-band power statistics.

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::types::{Cir, Pdp, PdpBin};

/// Multipath selection threshold relative to the strongest component, dB.
/// The reference level of the measurement campaign is not recorded, so the
/// threshold is applied relative to the per-profile peak.
pub const MPC_THRESHOLD_DB: f64 = -32.5;

/// Zero-padding factor applied to frequency responses for display smoothness.
pub const CFR_PAD_FACTOR: usize = 4;

/// Delay statistics of one power delay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats {
    /// Mean excess delay, ns.
    pub t_mean_ns: f64,
    /// RMS delay spread, ns.
    pub t_rms_ns: f64,
    /// Second raw moment, ns^2.
    pub t_sq_ns2: f64,
    /// Coherence bandwidth `1 / (5 t_rms)`, Hz; infinite for a point mass.
    pub cb_hz: f64,
}

/// Channel frequency response magnitude on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfr {
    /// Frequency grid, Hz, spanning `[0, 1/t_s)`.
    pub freqs_hz: Vec<f64>,
    /// Magnitude per bin, dB.
    pub mag_db: Vec<f64>,
}

/// Mean and variance of integrated band power across an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbandStat {
    pub center_hz: f64,
    pub mean_db: f64,
    pub var_db2: f64,
}

// ---------------------------------------------------------------------------
// PDP
// ---------------------------------------------------------------------------

fn check_common_grid(cirs: &[Cir]) -> Result<(f64, f64, usize)> {
    let first = cirs
        .first()
        .ok_or_else(|| Error::degenerate("empty ensemble"))?;
    let (t_s, window) = (first.sample_period_ns(), first.window_ns());
    if cirs
        .iter()
        .any(|c| c.sample_period_ns() != t_s || c.window_ns() != window)
    {
        return Err(Error::validation(
            "ensemble members must share sample period and window",
        ));
    }
    Ok((t_s, window, first.grid_len()))
}

/// Grid one CIR: amplitudes summed into their nearest grid bin.
fn grid_amplitudes(cir: &Cir, bins: usize) -> Vec<f64> {
    let mut grid = vec![0.0; bins];
    let t_s = cir.sample_period_ns();
    for tap in cir.taps() {
        let idx = ((tap.delay_ns / t_s).round() as usize).min(bins - 1);
        grid[idx] += tap.amplitude;
    }
    grid
}

/// Average power delay profile of an ensemble on its common sampling grid:
/// per grid index, the mean over realizations of the squared gridded CIR.
/// Only bins with nonzero power are emitted.
pub fn average_pdp(cirs: &[Cir]) -> Result<Pdp> {
    let (t_s, _, bins) = check_common_grid(cirs)?;
    let mut acc = vec![0.0; bins];
    for cir in cirs {
        for (slot, a) in acc.iter_mut().zip(grid_amplitudes(cir, bins)) {
            *slot += a * a;
        }
    }
    let n = cirs.len() as f64;
    Pdp::new(
        acc.iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, &p)| PdpBin {
                delay_ns: i as f64 * t_s,
                power: p / n,
            })
            .collect(),
    )
}

/// Keep only bins within `rel_db` (negative) of the strongest bin.
pub fn apply_mpc_threshold(pdp: &Pdp, rel_db: f64) -> Result<Pdp> {
    let peak = pdp.peak_power();
    if peak <= 0.0 {
        return Err(Error::degenerate("profile has no power"));
    }
    let floor = peak * 10f64.powf(rel_db / 10.0);
    Pdp::new(
        pdp.bins()
            .iter()
            .copied()
            .filter(|b| b.power >= floor)
            .collect(),
    )
}

/// Taps within `rel_db` (negative, amplitude dB) of the strongest tap.
pub fn threshold_taps(cir: &Cir, rel_db: f64) -> Vec<crate::types::Tap> {
    let peak = cir.peak_amplitude();
    let floor = peak * 10f64.powf(rel_db / 20.0);
    cir.taps()
        .iter()
        .copied()
        .filter(|t| t.amplitude >= floor)
        .collect()
}

// ---------------------------------------------------------------------------
// Delay statistics
// ---------------------------------------------------------------------------

/// Mean excess delay, RMS delay spread, and coherence bandwidth of a profile.
/// Physical bin delays are used directly, so sparse and gridded profiles
/// evaluate identically.
pub fn delay_stats(pdp: &Pdp) -> Result<DelayStats> {
    let total = pdp.total_power();
    if !(total > 0.0) {
        return Err(Error::degenerate("profile has no power"));
    }
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for b in pdp.bins() {
        m1 += b.delay_ns * b.power;
        m2 += b.delay_ns * b.delay_ns * b.power;
    }
    let t_mean = m1 / total;
    let t_sq = m2 / total;
    let t_rms = (t_sq - t_mean * t_mean).max(0.0).sqrt();
    let cb_hz = if t_rms > 0.0 {
        1.0 / (5.0 * t_rms * 1e-9)
    } else {
        f64::INFINITY
    };
    Ok(DelayStats {
        t_mean_ns: t_mean,
        t_rms_ns: t_rms,
        t_sq_ns2: t_sq,
        cb_hz,
    })
}

// ---------------------------------------------------------------------------
// Frequency domain
// ---------------------------------------------------------------------------

fn fft_magnitude_sq(grid: &[f64], dft_size: usize) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = grid
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(dft_size)
        .collect();
    FftPlanner::new().plan_fft_forward(dft_size).process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Frequency response of one CIR: DFT of the gridded taps, magnitude in dB,
/// frequency axis `[0, 1/t_s)`. `dft_size` must cover the grid; zero padding
/// beyond it only smooths the display.
pub fn cfr(cir: &Cir, dft_size: usize) -> Result<Cfr> {
    let bins = cir.grid_len();
    if dft_size < bins {
        return Err(Error::validation(format!(
            "dft size {dft_size} smaller than the {bins}-bin grid"
        )));
    }
    if cir.is_empty() {
        return Err(Error::degenerate("empty impulse response"));
    }
    let grid = grid_amplitudes(cir, bins);
    let mag2 = fft_magnitude_sq(&grid, dft_size);
    let df = 1.0 / (dft_size as f64 * cir.sample_period_ns() * 1e-9);
    Ok(Cfr {
        freqs_hz: (0..dft_size).map(|k| k as f64 * df).collect(),
        mag_db: mag2
            .iter()
            .map(|&p| 10.0 * p.max(1e-300).log10())
            .collect(),
    })
}

/// Ensemble-average magnitude response: mean of `|H|^2` across realizations,
/// in dB.
pub fn average_cfr(cirs: &[Cir], dft_size: usize) -> Result<Cfr> {
    let (t_s, _, bins) = check_common_grid(cirs)?;
    if dft_size < bins {
        return Err(Error::validation(format!(
            "dft size {dft_size} smaller than the {bins}-bin grid"
        )));
    }
    let spectra: Vec<Vec<f64>> = cirs
        .par_iter()
        .map(|cir| fft_magnitude_sq(&grid_amplitudes(cir, bins), dft_size))
        .collect();
    let n = cirs.len() as f64;
    let mut acc = vec![0.0; dft_size];
    for s in &spectra {
        for (slot, &p) in acc.iter_mut().zip(s) {
            *slot += p;
        }
    }
    let df = 1.0 / (dft_size as f64 * t_s * 1e-9);
    Ok(Cfr {
        freqs_hz: (0..dft_size).map(|k| k as f64 * df).collect(),
        mag_db: acc
            .iter()
            .map(|&p| 10.0 * (p / n).max(1e-300).log10())
            .collect(),
    })
}

/// Per sub-band statistics of integrated spectrum power across an ensemble:
/// `n_bands` contiguous bands of `band_width_hz` starting at `band_start_hz`
/// on the baseband frequency axis. Bands must stay below the grid's Nyquist
/// frequency.
pub fn subband_power_stats(
    cirs: &[Cir],
    band_start_hz: f64,
    band_width_hz: f64,
    n_bands: usize,
    dft_size: usize,
) -> Result<Vec<SubbandStat>> {
    let (t_s, _, bins) = check_common_grid(cirs)?;
    if !(band_width_hz > 0.0) || n_bands == 0 {
        return Err(Error::validation("band width and count must be positive"));
    }
    if dft_size < bins {
        return Err(Error::validation(format!(
            "dft size {dft_size} smaller than the {bins}-bin grid"
        )));
    }
    let nyquist = 1.0 / (2.0 * t_s * 1e-9);
    let band_end = band_start_hz + n_bands as f64 * band_width_hz;
    if band_start_hz < 0.0 || band_end > nyquist {
        return Err(Error::validation(format!(
            "bands [{band_start_hz:.3e}, {band_end:.3e}] Hz outside the representable [0, {nyquist:.3e}] Hz"
        )));
    }

    let df = 1.0 / (dft_size as f64 * t_s * 1e-9);
    let band_index = |k: usize| -> Option<usize> {
        let f = k as f64 * df;
        if f < band_start_hz || f >= band_end {
            return None;
        }
        let b = ((f - band_start_hz) / band_width_hz) as usize;
        Some(b.min(n_bands - 1))
    };

    // Per realization, integrated power per band; computed in parallel, then
    // reduced sequentially so the result does not depend on scheduling.
    let per_cir: Vec<Vec<f64>> = cirs
        .par_iter()
        .map(|cir| {
            let mag2 = fft_magnitude_sq(&grid_amplitudes(cir, bins), dft_size);
            let mut bands = vec![0.0; n_bands];
            for (k, &p) in mag2.iter().enumerate() {
                if let Some(b) = band_index(k) {
                    bands[b] += p;
                }
            }
            bands
        })
        .collect();

    if per_cir.iter().any(|bands| bands.iter().any(|&p| p <= 0.0)) {
        // A band with no spectral lines (or an all-zero realization) has no
        // dB representation.
        if (band_width_hz / df) < 1.0 {
            return Err(Error::validation(
                "band width below the spectral resolution of the DFT",
            ));
        }
    }

    let n = cirs.len() as f64;
    let mut out = Vec::with_capacity(n_bands);
    for b in 0..n_bands {
        let dbs: Vec<f64> = per_cir
            .iter()
            .map(|bands| 10.0 * bands[b].max(1e-300).log10())
            .collect();
        let mean = dbs.iter().sum::<f64>() / n;
        let var = if dbs.len() > 1 {
            dbs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        out.push(SubbandStat {
            center_hz: band_start_hz + (b as f64 + 0.5) * band_width_hz,
            mean_db: mean,
            var_db2: var,
        });
    }
    Ok(out)
}

/// Pooled empirical CDF of thresholded multipath arrival times.
pub fn toa_cdf(cirs: &[Cir], rel_threshold_db: f64) -> Result<Vec<(f64, f64)>> {
    if cirs.is_empty() {
        return Err(Error::degenerate("empty ensemble"));
    }
    let mut arrivals: Vec<f64> = cirs
        .iter()
        .flat_map(|c| threshold_taps(c, rel_threshold_db))
        .map(|t| t.delay_ns)
        .collect();
    if arrivals.is_empty() {
        return Err(Error::degenerate("no taps above the threshold"));
    }
    arrivals.sort_by(|a, b| a.partial_cmp(b).expect("finite delays"));
    let n = arrivals.len() as f64;
    Ok(arrivals
        .into_iter()
        .enumerate()
        .map(|(i, t)| (t, (i + 1) as f64 / n))
        .collect())
}
