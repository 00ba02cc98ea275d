pub mod analyze;
pub mod fit;
pub mod generate;
pub mod pathloss;
pub mod presets;

use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use clap::Args as ClapArgs;

use uwbchan::types::{EnvironmentClass, Geometry, ScenarioId};

/// Global run context from the top-level flags.
pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
}

impl Context {
    pub fn ensure_out(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))
    }
}

/// Preset selector shared by several commands.
#[derive(Debug, Clone, ClapArgs)]
pub struct PresetKey {
    /// Environment: open or suburban.
    #[arg(long)]
    pub env: EnvironmentClassArg,
    /// Scenario: 1 (foliage), 2 (1.5 m receiver), or 3 (7 cm receiver).
    #[arg(long)]
    pub scenario: u32,
    /// Preset speed label in mph (0 or 20).
    #[arg(long, default_value_t = 0)]
    pub v: u32,
}

impl PresetKey {
    pub fn lookup(&self) -> Result<&'static uwbchan::ScenarioPreset> {
        let scenario = ScenarioId::from_number(self.scenario)?;
        Ok(uwbchan::presets::preset_lookup(self.env.0, scenario, self.v)?)
    }
}

/// Parse a `env:sN:vM` key such as `open:s2:v0` (as written in manifests).
pub fn parse_preset_key(key: &str) -> Result<&'static uwbchan::ScenarioPreset> {
    let parts: Vec<&str> = key.split(':').collect();
    anyhow::ensure!(
        parts.len() == 3,
        "preset key must look like open:s2:v0, got {key:?}"
    );
    let env: EnvironmentClass = parts[0].parse()?;
    let scenario: ScenarioId = parts[1].parse()?;
    let v: u32 = parts[2]
        .strip_prefix('v')
        .unwrap_or(parts[2])
        .parse()
        .with_context(|| format!("bad speed label {:?}", parts[2]))?;
    Ok(uwbchan::presets::preset_lookup(env, scenario, v)?)
}

/// Clap-friendly wrapper for the environment enum.
#[derive(Debug, Clone, Copy)]
pub struct EnvironmentClassArg(pub EnvironmentClass);

impl std::str::FromStr for EnvironmentClassArg {
    type Err = uwbchan::Error;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(EnvironmentClassArg(s.parse()?))
    }
}

/// Link geometry flags shared by generate and pathloss.
#[derive(Debug, Clone, ClapArgs)]
pub struct GeometryArgs {
    /// Link distance, m.
    #[arg(long, default_value_t = 10.0)]
    pub d: f64,
    /// Reference distance of the path loss law, m.
    #[arg(long, default_value_t = 1.0)]
    pub d0: f64,
    /// UAV height above ground, m.
    #[arg(long, default_value_t = 8.0)]
    pub h: f64,
    /// Receiver height above ground, m.
    #[arg(long, default_value_t = 3.0)]
    pub h_gnd: f64,
    /// Receiver height of minimum loss, m. The default receiver height of
    /// 3.0 m makes |h_gnd - h_opt| / h_opt = 1, zeroing the height term.
    #[arg(long, default_value_t = 1.5)]
    pub h_opt: f64,
    /// UAV speed relative to the receiver, m/s.
    #[arg(long, default_value_t = 0.0)]
    pub speed: f64,
}

impl GeometryArgs {
    pub fn to_geometry(&self) -> Result<Geometry> {
        let geom = Geometry {
            distance_m: self.d,
            ref_distance_m: self.d0,
            uav_height_m: self.h,
            ground_height_m: self.h_gnd,
            optimum_height_m: self.h_opt,
            speed_m_s: self.speed,
        };
        geom.validate()?;
        Ok(geom)
    }
}

/// Write a file through a closure, reporting the path on success.
pub fn write_file<F>(path: &Path, writer: F) -> Result<PathBuf>
where
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> uwbchan::Result<()>,
{
    let file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut buf = std::io::BufWriter::new(file);
    writer(&mut buf).with_context(|| format!("writing {}", path.display()))?;
    use std::io::Write;
    buf.flush()?;
    Ok(path.to_path_buf())
}
