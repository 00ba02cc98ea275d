use std::path::PathBuf;

use anyhow::Result;
use clap::Args as ClapArgs;

use uwbchan::fileio::write_presets_csv;

use super::{write_file, Context};

#[derive(Debug, ClapArgs)]
pub struct Args {
    /// Also write the table to this file under the output directory
    /// (the table always goes to stdout).
    #[arg(long)]
    pub file: Option<String>,
}

pub fn run(ctx: &Context, args: Args) -> Result<Vec<PathBuf>> {
    let mut stdout = std::io::stdout().lock();
    write_presets_csv(&mut stdout)?;
    let mut written = Vec::new();
    if let Some(name) = args.file {
        ctx.ensure_out()?;
        written.push(write_file(&ctx.out.join(name), write_presets_csv)?);
    }
    Ok(written)
}
