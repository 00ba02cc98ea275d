use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args as ClapArgs;

use uwbchan::estimation::{clean_deconvolve, CleanConfig};
use uwbchan::fileio::{
    read_cir, read_manifest, read_scanset, write_cfr, write_delay_stats, write_pdp,
    write_subband_stats, write_toa_cdf, StatsRow,
};
use uwbchan::metrics::{
    apply_mpc_threshold, average_cfr, average_pdp, delay_stats, subband_power_stats, toa_cdf,
    MPC_THRESHOLD_DB,
};
use uwbchan::types::Cir;

use super::{write_file, Context};

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Ensemble directories (with a manifest) or single CIR files; one
    /// statistics row is emitted per input, so a height sweep is a list of
    /// inputs.
    #[arg(long, required_unless_present = "scanset")]
    pub input: Vec<PathBuf>,
    /// Raw scan set file; each scan is deconvolved with the embedded
    /// template before analysis.
    #[arg(long)]
    pub scanset: Option<PathBuf>,
    /// Multipath selection threshold relative to the strongest component, dB.
    #[arg(long, default_value_t = MPC_THRESHOLD_DB)]
    pub threshold_db: f64,
    /// DFT size for frequency-domain products.
    #[arg(long, default_value_t = 8192)]
    pub dft: usize,
    /// First sub-band edge on the baseband axis, Hz.
    #[arg(long, default_value_t = 0.0)]
    pub band_start: f64,
    /// Sub-band width, Hz. The default tiles the 2.2 GHz sounded span into
    /// the requested number of bands.
    #[arg(long)]
    pub band_width: Option<f64>,
    /// Number of sub-bands.
    #[arg(long, default_value_t = 15)]
    pub subbands: usize,
    /// CLEAN stop threshold for scan sets, fraction of the scan peak.
    #[arg(long, default_value_t = 0.10)]
    pub clean_stop: f64,
}

struct LoadedEnsemble {
    name: String,
    height_m: f64,
    scenario: String,
    cirs: Vec<Cir>,
}

fn load_dir(dir: &Path) -> Result<LoadedEnsemble> {
    let manifest_path = dir.join("manifest.csv");
    let text = std::fs::read_to_string(&manifest_path)
        .with_context(|| format!("reading {}", manifest_path.display()))?;
    let manifest = read_manifest(&text)?;
    let mut cirs = Vec::with_capacity(manifest.entries.len());
    for (_, _, file) in &manifest.entries {
        let path = dir.join(file);
        let text =
            std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        cirs.push(read_cir(&text)?);
    }
    if cirs.is_empty() {
        bail!("manifest in {} lists no realizations", dir.display());
    }
    Ok(LoadedEnsemble {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "ensemble".into()),
        height_m: manifest.geometry.uav_height_m,
        scenario: manifest.scenario.to_string(),
        cirs,
    })
}

fn load_file(path: &Path) -> Result<LoadedEnsemble> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cir = read_cir(&text)?;
    Ok(LoadedEnsemble {
        name: path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "cir".into()),
        height_m: f64::NAN,
        scenario: "unknown".into(),
        cirs: vec![cir],
    })
}

fn load_scanset(path: &Path, clean_stop: f64) -> Result<LoadedEnsemble> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let set = read_scanset(&text)?;
    let cfg = CleanConfig {
        stop_fraction: clean_stop,
        ..CleanConfig::default()
    };
    let mut cirs = Vec::with_capacity(set.scans.len());
    for scan in &set.scans {
        let outcome = clean_deconvolve(scan, &set.template, set.t_s_ns, &cfg)?;
        cirs.push(outcome.cir);
    }
    Ok(LoadedEnsemble {
        name: path
            .file_stem()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scanset".into()),
        height_m: set.geometry.uav_height_m,
        scenario: set.scenario.to_string(),
        cirs,
    })
}

pub fn run(ctx: &Context, args: Args) -> Result<Vec<PathBuf>> {
    let mut ensembles = Vec::new();
    for input in &args.input {
        if input.is_dir() {
            ensembles.push(load_dir(input)?);
        } else {
            ensembles.push(load_file(input)?);
        }
    }
    if let Some(scanset) = &args.scanset {
        ensembles.push(load_scanset(scanset, args.clean_stop)?);
    }
    if ensembles.is_empty() {
        bail!("nothing to analyze: pass --input and/or --scanset");
    }
    // Disambiguate duplicate names: later entries get an index suffix.
    for i in 0..ensembles.len() {
        let name = ensembles[i].name.clone();
        if ensembles[..i].iter().any(|e| e.name == name) {
            ensembles[i].name = format!("{name}_{i}");
        }
    }

    ctx.ensure_out()?;
    let mut written = Vec::new();
    let mut stats_rows = Vec::new();

    let band_width = args
        .band_width
        .unwrap_or(2.2e9 / args.subbands.max(1) as f64);

    for e in &ensembles {
        let sub = ctx.out.join(&e.name);
        std::fs::create_dir_all(&sub)
            .with_context(|| format!("creating {}", sub.display()))?;

        let raw_pdp = average_pdp(&e.cirs)?;
        written.push(write_file(&sub.join("pdp.csv"), |w| {
            write_pdp(w, &raw_pdp, &[("source", e.name.clone())])
        })?);

        // The multipath threshold is applied before delay statistics; the
        // emitted PDP stays unthresholded.
        let cut = apply_mpc_threshold(&raw_pdp, args.threshold_db)?;
        stats_rows.push(StatsRow {
            height_m: e.height_m,
            scenario: e.scenario.clone(),
            stats: delay_stats(&cut)?,
        });

        let spectrum = average_cfr(&e.cirs, args.dft)?;
        written.push(write_file(&sub.join("cfr.csv"), |w| {
            write_cfr(w, &spectrum, &[("source", e.name.clone())])
        })?);

        let cdf = toa_cdf(&e.cirs, args.threshold_db)?;
        written.push(write_file(&sub.join("toa_cdf.csv"), |w| {
            write_toa_cdf(w, &cdf)
        })?);

        let bands = subband_power_stats(
            &e.cirs,
            args.band_start,
            band_width,
            args.subbands,
            args.dft,
        )?;
        written.push(write_file(&sub.join("subband_stats.csv"), |w| {
            write_subband_stats(w, &bands)
        })?);
    }

    written.push(write_file(&ctx.out.join("delay_stats.csv"), |w| {
        write_delay_stats(w, &stats_rows)
    })?);
    Ok(written)
}
