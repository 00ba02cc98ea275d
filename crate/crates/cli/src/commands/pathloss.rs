use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::{Args as ClapArgs, ValueEnum};

use uwbchan::estimation::FitReport;
use uwbchan::fileio::{write_fit_report_csv, write_pl_samples};
use uwbchan::pathloss::{fit_path_loss, synthesize_samples};
use uwbchan::RandomSource;

use super::{write_file, Context, GeometryArgs, PresetKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    pub preset: PresetKey,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Sweep start distance, m.
    #[arg(long, default_value_t = 5.6)]
    pub d_start: f64,
    /// Sweep stop distance, m.
    #[arg(long, default_value_t = 16.5)]
    pub d_stop: f64,
    /// Number of sweep points.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Distance spacing of the sweep.
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    pub spacing: Spacing,
    /// Add one Gaussian shadowing draw per sample.
    #[arg(long)]
    pub shadow: bool,
    /// Fit the distance law to the emitted samples and write the report.
    #[arg(long)]
    pub fit: bool,
}

pub fn run(ctx: &Context, args: Args) -> Result<Vec<PathBuf>> {
    ensure!(args.n >= 1, "sweep needs at least one point");
    ensure!(
        args.d_start > 0.0 && args.d_stop >= args.d_start,
        "sweep range must satisfy 0 < start <= stop"
    );
    let preset = args.preset.lookup()?;
    let geometry = args.geometry.to_geometry()?;

    let distances: Vec<f64> = if args.n == 1 {
        vec![args.d_start]
    } else {
        (0..args.n)
            .map(|i| {
                let frac = i as f64 / (args.n - 1) as f64;
                match args.spacing {
                    Spacing::Linear => args.d_start + (args.d_stop - args.d_start) * frac,
                    Spacing::Log => {
                        (args.d_start.ln() + (args.d_stop / args.d_start).ln() * frac).exp()
                    }
                }
            })
            .collect()
    };

    let mut rng = RandomSource::new(ctx.seed, 0);
    let samples = synthesize_samples(preset, &geometry, &distances, args.shadow, &mut rng);

    ctx.ensure_out()?;
    let meta = [
        ("seed", ctx.seed.to_string()),
        ("preset", preset.key()),
        ("shadowing", args.shadow.to_string()),
    ];
    let mut written = vec![write_file(&ctx.out.join("pathloss_samples.csv"), |w| {
        write_pl_samples(w, &samples, &meta)
    })?];

    if args.fit {
        let fit = fit_path_loss(&samples, geometry.ref_distance_m)?;
        let mut report = FitReport::default();
        report.merge_path_loss(&fit);
        report.diagnostics.cir_count = samples.len();
        report.diagnostics.label_source = "pathloss-sweep".into();
        written.push(write_file(&ctx.out.join("pathloss_fit.csv"), |w| {
            write_fit_report_csv(w, &report, Some(preset))
        })?);
    }
    Ok(written)
}
