//! Domain types shared by every module: environments, scenarios, geometry,
//! model parameter records, and the channel data carriers (CIR, scan set,
//! power delay profile).
//!
//! Unit discipline: delays in nanoseconds, frequencies in hertz, powers and
//! amplitudes in linear units. Decibels appear only at API boundaries
//! (path loss values, shadowing, thresholds) and are suffixed `_db`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default sample period of a scan, in ns.
pub const DEFAULT_SAMPLE_PERIOD_NS: f64 = 0.06;
/// Default observation window of a scan, in ns.
pub const DEFAULT_WINDOW_NS: f64 = 100.0;
/// Samples per scan at the defaults: floor(100 / 0.06).
pub const DEFAULT_SAMPLES_PER_SCAN: usize = 1666;
/// Default number of scans per measurement set.
pub const DEFAULT_SCAN_COUNT: usize = 25;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

// ---------------------------------------------------------------------------
// Environment and scenario
// ---------------------------------------------------------------------------

/// Measurement environment class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvironmentClass {
    Open,
    SubUrban,
}

impl EnvironmentClass {
    pub const ALL: [EnvironmentClass; 2] = [EnvironmentClass::Open, EnvironmentClass::SubUrban];

    /// Serialized name, lowercase ASCII.
    pub fn name(self) -> &'static str {
        match self {
            EnvironmentClass::Open => "open",
            EnvironmentClass::SubUrban => "suburban",
        }
    }
}

impl fmt::Display for EnvironmentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvironmentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(EnvironmentClass::Open),
            "suburban" => Ok(EnvironmentClass::SubUrban),
            other => Err(Error::validation(format!(
                "unknown environment {other:?} (expected \"open\" or \"suburban\")"
            ))),
        }
    }
}

/// Measurement scenario.
///
/// Scenario 1 places the receiver at 1.5 m inside foliage, scenario 2 at
/// 1.5 m in the clear, scenario 3 at 7 cm above ground.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    S1Foliage,
    S2Ground1m5,
    S3Ground7cm,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 3] = [
        ScenarioId::S1Foliage,
        ScenarioId::S2Ground1m5,
        ScenarioId::S3Ground7cm,
    ];

    /// 1-based scenario number.
    pub fn number(self) -> u32 {
        match self {
            ScenarioId::S1Foliage => 1,
            ScenarioId::S2Ground1m5 => 2,
            ScenarioId::S3Ground7cm => 3,
        }
    }

    pub fn from_number(n: u32) -> Result<Self> {
        match n {
            1 => Ok(ScenarioId::S1Foliage),
            2 => Ok(ScenarioId::S2Ground1m5),
            3 => Ok(ScenarioId::S3Ground7cm),
            other => Err(Error::validation(format!(
                "unknown scenario {other} (expected 1, 2, or 3)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::S1Foliage => "s1",
            ScenarioId::S2Ground1m5 => "s2",
            ScenarioId::S3Ground7cm => "s3",
        }
    }

    /// Whether the receiver sits in foliage.
    pub fn is_foliage(self) -> bool {
        matches!(self, ScenarioId::S1Foliage)
    }

    /// Receiver height above ground implied by the scenario, in metres.
    pub fn receiver_height_m(self) -> f64 {
        match self {
            ScenarioId::S1Foliage | ScenarioId::S2Ground1m5 => 1.5,
            ScenarioId::S3Ground7cm => 0.07,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "s1" | "1" => Ok(ScenarioId::S1Foliage),
            "s2" | "2" => Ok(ScenarioId::S2Ground1m5),
            "s3" | "3" => Ok(ScenarioId::S3Ground7cm),
            other => Err(Error::validation(format!(
                "unknown scenario {other:?} (expected s1, s2, or s3)"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Link geometry for one transmitter/receiver placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    /// Link distance, m.
    pub distance_m: f64,
    /// Reference distance for the path loss law, m.
    pub ref_distance_m: f64,
    /// UAV height above ground, m.
    pub uav_height_m: f64,
    /// Receiver height above ground, m.
    pub ground_height_m: f64,
    /// Receiver height of minimum loss, m. Not a measured constant; it is a
    /// configuration choice (default 1.5 m).
    pub optimum_height_m: f64,
    /// UAV speed relative to the receiver, m/s.
    pub speed_m_s: f64,
}

impl Geometry {
    /// Geometry at the given distance and UAV height, receiver at 1.5 m,
    /// reference distance 1 m, static.
    pub fn new(distance_m: f64, uav_height_m: f64) -> Self {
        Geometry {
            distance_m,
            ref_distance_m: 1.0,
            uav_height_m,
            ground_height_m: 1.5,
            optimum_height_m: 1.5,
            speed_m_s: 0.0,
        }
    }

    pub fn with_ground_height(mut self, h: f64) -> Self {
        self.ground_height_m = h;
        self
    }

    pub fn with_speed(mut self, v: f64) -> Self {
        self.speed_m_s = v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_m > 0.0) {
            return Err(Error::validation("distance must be > 0"));
        }
        if !(self.ref_distance_m > 0.0) {
            return Err(Error::validation("reference distance must be > 0"));
        }
        if !(self.uav_height_m > 0.0) {
            return Err(Error::validation("UAV height must be > 0"));
        }
        if !(self.ground_height_m >= 0.0) {
            return Err(Error::validation("receiver height must be >= 0"));
        }
        if !(self.optimum_height_m > 0.0) {
            return Err(Error::validation("optimum height must be > 0"));
        }
        if !(self.speed_m_s >= 0.0) {
            return Err(Error::validation("speed must be >= 0"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Model parameter records
// ---------------------------------------------------------------------------

/// Large-scale path loss parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Path loss exponent.
    pub exponent: f64,
    /// Reference path loss at the reference distance, dB.
    pub ref_loss_db: f64,
    /// Shadowing standard deviation, dB.
    pub shadow_sigma_db: f64,
    /// Constant loss factor (foliage, antenna orientation), dB, >= 0.
    pub constant_loss_db: f64,
    /// Frequency dependence factor of the Doppler term.
    pub freq_exponent: f64,
    /// Emitted center frequency, Hz.
    pub center_freq_hz: f64,
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.exponent > 0.0) {
            return Err(Error::validation("path loss exponent must be > 0"));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::validation("shadowing sigma must be >= 0"));
        }
        if !(self.constant_loss_db >= 0.0) {
            return Err(Error::validation("constant loss must be >= 0"));
        }
        if !(self.center_freq_hz > 0.0) {
            return Err(Error::validation("center frequency must be > 0"));
        }
        Ok(())
    }
}

/// Cluster/ray multipath parameters.
///
/// `env_coeff`, `delay_coeff`, and `height_coeff` shape the height and delay
/// dependence of the cluster structure; the registry calibrates `env_coeff`
/// and the decay scaling so that ensembles at the reference height reproduce
/// `mean_clusters` and `inter_decay_ns`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvParams {
    /// Cluster arrival rate, 1/ns.
    pub cluster_rate: f64,
    /// Ray arrival rate within a cluster, 1/ns.
    pub ray_rate: f64,
    /// Inter-cluster decay constant, ns.
    pub inter_decay_ns: f64,
    /// Intra-cluster decay constant, ns.
    pub intra_decay_ns: f64,
    /// Mean number of clusters.
    pub mean_clusters: f64,
    /// Cluster-delay coefficient of the decay law (> 1).
    pub delay_coeff: f64,
    /// Height coefficient of the decay law (> 1).
    pub height_coeff: f64,
    /// Environment coefficient of the cluster count law (> 1).
    pub env_coeff: f64,
    /// Std of the decay-constant noise, ns.
    pub decay_sigma_ns: f64,
    /// Std of the cluster-count noise.
    pub count_sigma: f64,
}

impl SvParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cluster rate", self.cluster_rate),
            ("ray rate", self.ray_rate),
            ("inter-cluster decay", self.inter_decay_ns),
            ("intra-cluster decay", self.intra_decay_ns),
            ("mean cluster count", self.mean_clusters),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("{name} must be > 0")));
            }
        }
        for (name, v) in [
            ("delay coefficient", self.delay_coeff),
            ("height coefficient", self.height_coeff),
            ("environment coefficient", self.env_coeff),
        ] {
            if !(v > 1.0) {
                return Err(Error::validation(format!("{name} must be > 1")));
            }
        }
        if !(self.decay_sigma_ns >= 0.0) || !(self.count_sigma >= 0.0) {
            return Err(Error::validation("noise sigmas must be >= 0"));
        }
        Ok(())
    }

    /// Mean cluster delay implied by the mean count and arrival rate, ns.
    ///
    /// With the first cluster anchored at zero and `c` clusters on average,
    /// the expected mean of the cluster delays is `(c - 1) / (2 rate)`.
    pub fn characteristic_cluster_delay_ns(&self) -> f64 {
        (self.mean_clusters - 1.0).max(0.0) / (2.0 * self.cluster_rate)
    }
}

/// Small-scale fading parameters: a lognormal Nakagami m-factor.
///
/// `m_mean_db` and `m_std_db` are the mean and standard deviation of
/// `10 log10(m)`; see [`crate::svgen::MFactorScale`] for the mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiParams {
    /// Mean of the m-factor in dB.
    pub m_mean_db: f64,
    /// Standard deviation of the m-factor in dB.
    pub m_std_db: f64,
    /// Mean m of the first cluster component (linear, unclamped moment).
    pub first_m_mean: f64,
    /// Variance of m of the first cluster component (linear, unclamped).
    pub first_m_var: f64,
}

impl NakagamiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m_std_db >= 0.0) {
            return Err(Error::validation("m-factor std must be >= 0"));
        }
        Ok(())
    }
}

/// One scenario's complete parameter record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPreset {
    pub env: EnvironmentClass,
    pub scenario: ScenarioId,
    /// Preset speed label, mph (0 or 20).
    pub v_mph: u32,
    pub pl: PathLossParams,
    pub sv: SvParams,
    pub nak: NakagamiParams,
}

impl ScenarioPreset {
    /// Compact key used in file headers, e.g. `open:s2:v0`.
    pub fn key(&self) -> String {
        format!("{}:{}:v{}", self.env, self.scenario, self.v_mph)
    }
}

// ---------------------------------------------------------------------------
// Channel data carriers
// ---------------------------------------------------------------------------

/// One multipath tap of a channel impulse response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Absolute excess delay, ns.
    pub delay_ns: f64,
    /// Linear amplitude (phase is dropped), >= 0.
    pub amplitude: f64,
    /// Index of the cluster the tap belongs to.
    pub cluster: usize,
}

/// Sparse channel impulse response: ordered taps plus sampling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    taps: Vec<Tap>,
    t_s_ns: f64,
    t_window_ns: f64,
}

impl Cir {
    /// Build a CIR, enforcing the shared invariants: taps strictly ascending
    /// in delay, delays inside `[0, t_window)`, non-negative amplitudes.
    pub fn new(taps: Vec<Tap>, t_s_ns: f64, t_window_ns: f64) -> Result<Self> {
        if !(t_s_ns > 0.0) || !(t_window_ns > 0.0) {
            return Err(Error::validation("sample period and window must be > 0"));
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, tap) in taps.iter().enumerate() {
            if !tap.delay_ns.is_finite() || tap.delay_ns < 0.0 || tap.delay_ns >= t_window_ns {
                return Err(Error::validation(format!(
                    "tap {i}: delay {} outside [0, {t_window_ns})",
                    tap.delay_ns
                )));
            }
            if tap.delay_ns <= prev {
                return Err(Error::validation(format!(
                    "tap {i}: delays must be strictly ascending"
                )));
            }
            if !(tap.amplitude >= 0.0) || !tap.amplitude.is_finite() {
                return Err(Error::validation(format!(
                    "tap {i}: amplitude must be finite and >= 0"
                )));
            }
            prev = tap.delay_ns;
        }
        Ok(Cir {
            taps,
            t_s_ns,
            t_window_ns,
        })
    }

    /// A CIR on the default 0.06 ns / 100 ns grid.
    pub fn on_default_grid(taps: Vec<Tap>) -> Result<Self> {
        Cir::new(taps, DEFAULT_SAMPLE_PERIOD_NS, DEFAULT_WINDOW_NS)
    }

    pub fn taps(&self) -> &[Tap] {
        &self.taps
    }

    pub fn sample_period_ns(&self) -> f64 {
        self.t_s_ns
    }

    pub fn window_ns(&self) -> f64 {
        self.t_window_ns
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Number of grid bins covered by the window: floor(window / period).
    pub fn grid_len(&self) -> usize {
        (self.t_window_ns / self.t_s_ns).floor() as usize
    }

    /// Total tap energy, linear.
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.amplitude * t.amplitude).sum()
    }

    /// Largest tap amplitude, 0 for an empty CIR.
    pub fn peak_amplitude(&self) -> f64 {
        self.taps.iter().fold(0.0, |m, t| m.max(t.amplitude))
    }

    /// Replace all cluster indices, e.g. after re-partitioning.
    pub fn with_clusters(mut self, clusters: &[usize]) -> Result<Self> {
        if clusters.len() != self.taps.len() {
            return Err(Error::validation("cluster label count != tap count"));
        }
        for (tap, &c) in self.taps.iter_mut().zip(clusters) {
            tap.cluster = c;
        }
        Ok(self)
    }
}

/// A set of raw sampled waveforms plus the template pulse and geometry
/// context: the unit of measurement ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSet {
    pub scans: Vec<Vec<f64>>,
    pub template: Vec<f64>,
    pub t_s_ns: f64,
    pub geometry: Geometry,
    pub env: EnvironmentClass,
    pub scenario: ScenarioId,
}

impl ScanSet {
    pub fn validate(&self) -> Result<()> {
        if self.scans.is_empty() {
            return Err(Error::validation("scan set must hold at least one scan"));
        }
        let len = self.scans[0].len();
        if len == 0 {
            return Err(Error::validation("scans must be non-empty"));
        }
        if self.scans.iter().any(|s| s.len() != len) {
            return Err(Error::validation("all scans must have equal length"));
        }
        if self.template.is_empty() || self.template.iter().all(|&x| x == 0.0) {
            return Err(Error::validation("template must be nonzero"));
        }
        if !(self.t_s_ns > 0.0) {
            return Err(Error::validation("sample period must be > 0"));
        }
        self.geometry.validate()
    }

    pub fn scan_count(&self) -> usize {
        self.scans.len()
    }

    /// Observation window spanned by one scan, ns.
    pub fn window_ns(&self) -> f64 {
        self.scans[0].len() as f64 * self.t_s_ns
    }
}

/// One bin of a power delay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdpBin {
    /// Excess delay, ns.
    pub delay_ns: f64,
    /// Linear power.
    pub power: f64,
}

/// Power versus delay, sorted ascending in delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Pdp {
    bins: Vec<PdpBin>,
    total_power: f64,
}

impl Pdp {
    /// Build a profile, enforcing sorted delays and non-negative powers.
    pub fn new(bins: Vec<PdpBin>) -> Result<Self> {
        let mut prev = f64::NEG_INFINITY;
        for (i, b) in bins.iter().enumerate() {
            if !b.delay_ns.is_finite() || b.delay_ns < prev {
                return Err(Error::validation(format!(
                    "bin {i}: delays must be finite and ascending"
                )));
            }
            if !(b.power >= 0.0) || !b.power.is_finite() {
                return Err(Error::validation(format!(
                    "bin {i}: power must be finite and >= 0"
                )));
            }
            prev = b.delay_ns;
        }
        let total_power = bins.iter().map(|b| b.power).sum();
        Ok(Pdp { bins, total_power })
    }

    pub fn bins(&self) -> &[PdpBin] {
        &self.bins
    }

    /// Sum of bin powers, linear.
    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn peak_power(&self) -> f64 {
        self.bins.iter().fold(0.0, |m, b| m.max(b.power))
    }

    /// Scale every bin power by a positive factor.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::validation("scale factor must be finite and > 0"));
        }
        for b in &mut self.bins {
            b.power *= factor;
        }
        self.total_power *= factor;
        Ok(self)
    }
}
