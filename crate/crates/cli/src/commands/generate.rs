use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::Args as ClapArgs;

use uwbchan::fileio::{write_cir, write_manifest, EnsembleManifest};
use uwbchan::svgen::{generate_ensemble, GenConfig};

use super::{write_file, Context, GeometryArgs, PresetKey};

#[derive(Debug, ClapArgs)]
pub struct Args {
    #[command(flatten)]
    pub preset: PresetKey,
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Number of realizations.
    #[arg(long, default_value_t = 25)]
    pub n: usize,
    /// Sample period of the output grid, ns.
    #[arg(long, default_value_t = 0.06)]
    pub t_s: f64,
    /// Observation window, ns.
    #[arg(long, default_value_t = 100.0)]
    pub window: f64,
    /// Floor on the drawn cluster count (2 keeps cluster-rate statistics
    /// defined for fitting runs on single-cluster scenarios).
    #[arg(long, default_value_t = 1)]
    pub min_clusters: usize,
}

pub fn run(ctx: &Context, args: Args) -> Result<Vec<PathBuf>> {
    ensure!(args.n > 0, "realization count must be at least 1");
    let preset = args.preset.lookup()?;
    let geometry = args.geometry.to_geometry()?;
    let cfg = GenConfig {
        t_s_ns: args.t_s,
        t_window_ns: args.window,
        min_clusters: args.min_clusters,
        ..GenConfig::default()
    };

    let cirs = generate_ensemble(&cfg, preset, &geometry, args.n, ctx.seed)?;
    ctx.ensure_out()?;

    let mut written = Vec::with_capacity(cirs.len() + 1);
    let mut entries = Vec::with_capacity(cirs.len());
    for (i, cir) in cirs.iter().enumerate() {
        let name = format!("cir_{i:05}.csv");
        let meta = [
            ("seed", ctx.seed.to_string()),
            ("stream", i.to_string()),
            ("preset", preset.key()),
        ];
        written.push(write_file(&ctx.out.join(&name), |w| {
            write_cir(w, cir, &meta)
        })?);
        entries.push((i, i as u64, name));
    }

    let manifest = EnsembleManifest {
        seed: ctx.seed,
        env: preset.env,
        scenario: preset.scenario,
        v_mph: preset.v_mph,
        geometry,
        t_s_ns: args.t_s,
        t_window_ns: args.window,
        min_clusters: args.min_clusters,
        entries,
    };
    written.push(write_file(&ctx.out.join("manifest.csv"), |w| {
        write_manifest(w, &manifest)
    })?);
    Ok(written)
}
