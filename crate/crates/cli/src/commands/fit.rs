use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::{Args as ClapArgs, ValueEnum};

use uwbchan::estimation::{
    default_cluster_gap_ns, fit_nakagami, fit_sv_params, partition_clusters, FitReport,
    NAKAGAMI_MIN_BIN_REALIZATIONS,
};
use uwbchan::fileio::{
    read_cir, read_manifest, write_fit_report_csv, write_fit_report_text, write_nakagami_bins,
};
use uwbchan::svgen::MFactorScale;
use uwbchan::types::Cir;
use uwbchan::Error;

use super::{parse_preset_key, write_file, Context};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LabelSource {
    /// Trust the cluster indices stored in the CIR files (ground truth for
    /// generated ensembles).
    Embedded,
    /// Re-partition taps with the inter-tap gap rule.
    Gap,
}

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Ensemble directory holding a manifest and its CIR files.
    #[arg(long)]
    pub input: PathBuf,
    /// Preset key (for example open:s2:v0) to compare against; adds truth
    /// and error columns.
    #[arg(long)]
    pub truth: Option<String>,
    /// Where cluster labels come from.
    #[arg(long, value_enum, default_value_t = LabelSource::Embedded)]
    pub labels: LabelSource,
    /// Gap for the gap-rule labeling, ns. Default: five mean ray
    /// inter-arrivals of the truth preset.
    #[arg(long)]
    pub gap_ns: Option<f64>,
    /// Minimum realizations per delay bin for the small-scale fit.
    #[arg(long, default_value_t = NAKAGAMI_MIN_BIN_REALIZATIONS)]
    pub min_bin: usize,
    /// Also fit the per-delay-bin fading law. Meaningful only for ensembles
    /// where each bin fades around one stable law across realizations
    /// (repeated scans of one channel, or frozen-fading synthetic sets);
    /// independent channel realizations mix different laws per bin.
    #[arg(long)]
    pub smallscale: bool,
}

fn load_ensemble(dir: &Path) -> Result<Vec<Cir>> {
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
    Ok(cirs)
}

pub fn run(ctx: &Context, args: Args) -> Result<Vec<PathBuf>> {
    let truth = args.truth.as_deref().map(parse_preset_key).transpose()?;
    let mut cirs = load_ensemble(&args.input)?;
    if cirs.is_empty() {
        bail!("{} holds no realizations", args.input.display());
    }

    let label_source = match args.labels {
        LabelSource::Embedded => "embedded".to_string(),
        LabelSource::Gap => {
            let gap = match (args.gap_ns, truth) {
                (Some(g), _) => g,
                (None, Some(p)) => default_cluster_gap_ns(p.sv.ray_rate),
                (None, None) => bail!("--labels gap needs --gap-ns or --truth"),
            };
            cirs = cirs
                .iter()
                .map(|c| partition_clusters(c, gap))
                .collect::<uwbchan::Result<_>>()?;
            format!("gap-rule({gap} ns)")
        }
    };

    // A partial report with diagnostics is still written when the data is
    // too thin, but the run exits nonzero.
    let (mut report, insufficient) = match fit_sv_params(&cirs) {
        Ok(r) => (r, None),
        Err(Error::InsufficientData(msg)) => {
            let mut r = FitReport::default();
            r.diagnostics.cir_count = cirs.len();
            r.diagnostics.notes.push(format!("cluster/ray fit skipped: {msg}"));
            (r, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    if args.smallscale {
        match fit_nakagami(&cirs, MFactorScale::Decibel, args.min_bin) {
            Ok(r) => report.absorb(r),
            Err(e) => report
                .diagnostics
                .notes
                .push(format!("small-scale fit skipped: {e}")),
        }
    }
    report.diagnostics.label_source = label_source;

    ctx.ensure_out()?;
    let mut written = Vec::new();
    written.push(write_file(&ctx.out.join("fit_report.csv"), |w| {
        write_fit_report_csv(w, &report, truth)
    })?);
    written.push(write_file(&ctx.out.join("fit_report.txt"), |w| {
        write_fit_report_text(w, &report, truth)
    })?);
    if !report.nakagami_bins.is_empty() {
        written.push(write_file(&ctx.out.join("nakagami_bins.csv"), |w| {
            write_nakagami_bins(w, &report.nakagami_bins)
        })?);
    }

    if let Some(msg) = insufficient {
        for f in &written {
            eprintln!("wrote {}", f.display());
        }
        bail!("insufficient data: {msg}");
    }
    Ok(written)
}
