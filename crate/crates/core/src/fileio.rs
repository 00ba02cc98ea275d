//! Plain-text file formats.
//!
//! Every file is CSV with a `#`-prefixed header block carrying the format
//! version and run metadata, then one column-name line, then rows. Floats
//! are written with nine significant digits, which round-trip losslessly
//! through the readers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use crate::error::{Error, Result};
use crate::estimation::{FitReport, NakagamiBin};
use crate::metrics::{Cfr, DelayStats, SubbandStat};
use crate::pathloss::PathLossSample;
use crate::presets::{
    all_presets, env_scenario_pairs, preset_lookup, BAND_START_HZ, BAND_STOP_HZ, CENTER_FREQ_HZ,
    MAX_TX_POWER_DBM, PULSE_REPETITION_HZ,
};
use crate::types::{Cir, EnvironmentClass, Geometry, Pdp, ScanSet, ScenarioId, ScenarioPreset, Tap};

/// Version tag written into every file header.
pub const FORMAT_VERSION: u32 = 1;

/// Nine-significant-digit float formatting used for all data fields.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.8e}")
}

fn write_header<W: Write>(
    w: &mut W,
    kind: &str,
    version: u32,
    meta: &[(&str, String)],
) -> Result<()> {
    writeln!(w, "# uwbchan {kind} format={version}")?;
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn radio_metadata() -> Vec<(&'static str, String)> {
    // Sounder characteristics carried for documentation; never used in
    // computation.
    vec![
        ("band_hz", format!("{BAND_START_HZ:e}-{BAND_STOP_HZ:e}")),
        ("center_freq_hz", format!("{CENTER_FREQ_HZ:e}")),
        ("pulse_repetition_hz", format!("{PULSE_REPETITION_HZ:e}")),
        ("max_tx_power_dbm", MAX_TX_POWER_DBM.to_string()),
    ]
}

// ---------------------------------------------------------------------------
// Parsing scaffold
// ---------------------------------------------------------------------------

/// A parsed CSV document: header metadata, column names, and raw rows with
/// their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct CsvDoc {
    pub kind: String,
    pub version: u32,
    pub meta: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl CsvDoc {
    pub fn parse(text: &str) -> Result<CsvDoc> {
        let mut kind = String::new();
        let mut version = 0;
        let mut meta = BTreeMap::new();
        let mut columns: Vec<String> = Vec::new();
        let mut rows = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(tag) = rest.strip_prefix("uwbchan ") {
                    // "<kind> format=<version>"
                    let mut parts = tag.split_whitespace();
                    kind = parts.next().unwrap_or_default().to_string();
                    if let Some(v) = parts.next().and_then(|p| p.strip_prefix("format=")) {
                        version = v.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            column: 1,
                            msg: format!("bad format version {v:?}"),
                        })?;
                    }
                } else if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
            if columns.is_empty() {
                columns = fields;
            } else {
                rows.push((line_no, fields));
            }
        }
        if columns.is_empty() {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                msg: "no column header found".into(),
            });
        }
        Ok(CsvDoc {
            kind,
            version,
            meta,
            columns,
            rows,
        })
    }

    pub fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Parse {
                line: 1,
                column: 1,
                msg: format!("expected a {kind:?} file, found {:?}", self.kind),
            });
        }
        Ok(())
    }

    pub fn meta_value(&self, key: &str) -> Result<&str> {
        self.meta.get(key).map(String::as_str).ok_or_else(|| Error::Parse {
            line: 1,
            column: 1,
            msg: format!("missing header field {key:?}"),
        })
    }

    pub fn meta_f64(&self, key: &str) -> Result<f64> {
        self.meta_value(key)?.parse().map_err(|_| Error::Parse {
            line: 1,
            column: 1,
            msg: format!("header field {key:?} is not a number"),
        })
    }
}

fn field<T: std::str::FromStr>(line: usize, column: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        column: column + 1,
        msg: format!("cannot parse field {s:?}"),
    })
}

fn expect_width(line: usize, fields: &[String], want: usize) -> Result<()> {
    if fields.len() != want {
        return Err(Error::Parse {
            line,
            column: fields.len().min(want) + 1,
            msg: format!("expected {want} fields, found {}", fields.len()),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CIR files
// ---------------------------------------------------------------------------

/// Write one impulse response. Extra metadata pairs land in the header.
pub fn write_cir<W: Write>(w: &mut W, cir: &Cir, extra_meta: &[(&str, String)]) -> Result<()> {
    let mut meta = vec![
        ("units", "tau:ns amplitude:linear".to_string()),
        ("t_s_ns", fmt_f64(cir.sample_period_ns())),
        ("t_window_ns", fmt_f64(cir.window_ns())),
    ];
    meta.extend_from_slice(extra_meta);
    meta.extend(radio_metadata());
    write_header(w, "cir", FORMAT_VERSION, &meta)?;
    writeln!(w, "tau_ns,amplitude,cluster")?;
    for tap in cir.taps() {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(tap.delay_ns),
            fmt_f64(tap.amplitude),
            tap.cluster
        )?;
    }
    Ok(())
}

pub fn read_cir(text: &str) -> Result<Cir> {
    let doc = CsvDoc::parse(text)?;
    doc.expect_kind("cir")?;
    let t_s = doc.meta_f64("t_s_ns")?;
    let window = doc.meta_f64("t_window_ns")?;
    let mut taps = Vec::with_capacity(doc.rows.len());
    for (line, fields) in &doc.rows {
        expect_width(*line, fields, 3)?;
        taps.push(Tap {
            delay_ns: field(*line, 0, &fields[0])?,
            amplitude: field(*line, 1, &fields[1])?,
            cluster: field(*line, 2, &fields[2])?,
        });
    }
    Cir::new(taps, t_s, window)
}

// ---------------------------------------------------------------------------
// Ensemble manifest
// ---------------------------------------------------------------------------

/// Everything needed to regenerate an ensemble bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleManifest {
    pub seed: u64,
    pub env: EnvironmentClass,
    pub scenario: ScenarioId,
    pub v_mph: u32,
    pub geometry: Geometry,
    pub t_s_ns: f64,
    pub t_window_ns: f64,
    pub min_clusters: usize,
    /// (realization index, rng stream, file name)
    pub entries: Vec<(usize, u64, String)>,
}

pub fn write_manifest<W: Write>(w: &mut W, m: &EnsembleManifest) -> Result<()> {
    let mut meta = vec![
        ("seed", m.seed.to_string()),
        ("preset", format!("{}:{}:v{}", m.env, m.scenario, m.v_mph)),
        ("env", m.env.to_string()),
        ("scenario", m.scenario.to_string()),
        ("v_mph", m.v_mph.to_string()),
        ("d_m", fmt_f64(m.geometry.distance_m)),
        ("d0_m", fmt_f64(m.geometry.ref_distance_m)),
        ("h_uav_m", fmt_f64(m.geometry.uav_height_m)),
        ("h_gnd_m", fmt_f64(m.geometry.ground_height_m)),
        ("h_opt_m", fmt_f64(m.geometry.optimum_height_m)),
        ("v_m_s", fmt_f64(m.geometry.speed_m_s)),
        ("t_s_ns", fmt_f64(m.t_s_ns)),
        ("t_window_ns", fmt_f64(m.t_window_ns)),
        ("min_clusters", m.min_clusters.to_string()),
        ("count", m.entries.len().to_string()),
    ];
    meta.extend(radio_metadata());
    write_header(w, "manifest", FORMAT_VERSION, &meta)?;
    writeln!(w, "index,stream,file")?;
    for (index, stream, file) in &m.entries {
        writeln!(w, "{index},{stream},{file}")?;
    }
    Ok(())
}

pub fn read_manifest(text: &str) -> Result<EnsembleManifest> {
    let doc = CsvDoc::parse(text)?;
    doc.expect_kind("manifest")?;
    let geometry = Geometry {
        distance_m: doc.meta_f64("d_m")?,
        ref_distance_m: doc.meta_f64("d0_m")?,
        uav_height_m: doc.meta_f64("h_uav_m")?,
        ground_height_m: doc.meta_f64("h_gnd_m")?,
        optimum_height_m: doc.meta_f64("h_opt_m")?,
        speed_m_s: doc.meta_f64("v_m_s")?,
    };
    let mut entries = Vec::with_capacity(doc.rows.len());
    for (line, fields) in &doc.rows {
        expect_width(*line, fields, 3)?;
        entries.push((
            field(*line, 0, &fields[0])?,
            field(*line, 1, &fields[1])?,
            fields[2].clone(),
        ));
    }
    Ok(EnsembleManifest {
        seed: field(1, 0, doc.meta_value("seed")?)?,
        env: doc.meta_value("env")?.parse()?,
        scenario: doc.meta_value("scenario")?.parse()?,
        v_mph: field(1, 0, doc.meta_value("v_mph")?)?,
        geometry,
        t_s_ns: doc.meta_f64("t_s_ns")?,
        t_window_ns: doc.meta_f64("t_window_ns")?,
        min_clusters: field(1, 0, doc.meta_value("min_clusters")?)?,
        entries,
    })
}

// ---------------------------------------------------------------------------
// Scan sets
// ---------------------------------------------------------------------------

/// Scan set layout: one `template` row, then one `scan` row per waveform;
/// each row is `role,index,s0,s1,...`.
pub fn write_scanset<W: Write>(w: &mut W, set: &ScanSet) -> Result<()> {
    set.validate()?;
    let meta = vec![
        ("t_s_ns", fmt_f64(set.t_s_ns)),
        ("env", set.env.to_string()),
        ("scenario", set.scenario.to_string()),
        ("n_scans", set.scans.len().to_string()),
        ("d_m", fmt_f64(set.geometry.distance_m)),
        ("d0_m", fmt_f64(set.geometry.ref_distance_m)),
        ("h_uav_m", fmt_f64(set.geometry.uav_height_m)),
        ("h_gnd_m", fmt_f64(set.geometry.ground_height_m)),
        ("h_opt_m", fmt_f64(set.geometry.optimum_height_m)),
        ("v_m_s", fmt_f64(set.geometry.speed_m_s)),
    ];
    write_header(w, "scanset", FORMAT_VERSION, &meta)?;
    writeln!(w, "role,index,samples")?;
    let mut row = String::new();
    row.push_str("template,0");
    for s in &set.template {
        let _ = write!(row, ",{}", fmt_f64(*s));
    }
    writeln!(w, "{row}")?;
    for (i, scan) in set.scans.iter().enumerate() {
        row.clear();
        let _ = write!(row, "scan,{i}");
        for s in scan {
            let _ = write!(row, ",{}", fmt_f64(*s));
        }
        writeln!(w, "{row}")?;
    }
    Ok(())
}

pub fn read_scanset(text: &str) -> Result<ScanSet> {
    let doc = CsvDoc::parse(text)?;
    doc.expect_kind("scanset")?;
    let geometry = Geometry {
        distance_m: doc.meta_f64("d_m")?,
        ref_distance_m: doc.meta_f64("d0_m")?,
        uav_height_m: doc.meta_f64("h_uav_m")?,
        ground_height_m: doc.meta_f64("h_gnd_m")?,
        optimum_height_m: doc.meta_f64("h_opt_m")?,
        speed_m_s: doc.meta_f64("v_m_s")?,
    };
    let mut template = Vec::new();
    let mut scans = Vec::new();
    for (line, fields) in &doc.rows {
        if fields.len() < 3 {
            return Err(Error::Parse {
                line: *line,
                column: fields.len() + 1,
                msg: "scan rows need role, index, and samples".into(),
            });
        }
        let samples: Vec<f64> = fields[2..]
            .iter()
            .enumerate()
            .map(|(i, s)| field(*line, i + 2, s))
            .collect::<Result<_>>()?;
        match fields[0].as_str() {
            "template" => template = samples,
            "scan" => scans.push(samples),
            other => {
                return Err(Error::Parse {
                    line: *line,
                    column: 1,
                    msg: format!("unknown row role {other:?}"),
                })
            }
        }
    }
    let set = ScanSet {
        scans,
        template,
        t_s_ns: doc.meta_f64("t_s_ns")?,
        geometry,
        env: doc.meta_value("env")?.parse()?,
        scenario: doc.meta_value("scenario")?.parse()?,
    };
    set.validate()?;
    Ok(set)
}

// ---------------------------------------------------------------------------
// Analysis products
// ---------------------------------------------------------------------------

pub fn write_pdp<W: Write>(w: &mut W, pdp: &Pdp, extra_meta: &[(&str, String)]) -> Result<()> {
    let mut meta = vec![("units", "delay:ns power:linear".to_string())];
    meta.extend_from_slice(extra_meta);
    write_header(w, "pdp", FORMAT_VERSION, &meta)?;
    writeln!(w, "delay_ns,power")?;
    for b in pdp.bins() {
        writeln!(w, "{},{}", fmt_f64(b.delay_ns), fmt_f64(b.power))?;
    }
    Ok(())
}

pub fn write_cfr<W: Write>(w: &mut W, cfr: &Cfr, extra_meta: &[(&str, String)]) -> Result<()> {
    let mut meta = vec![("units", "freq:hz mag:db".to_string())];
    meta.extend_from_slice(extra_meta);
    meta.extend(radio_metadata());
    write_header(w, "cfr", FORMAT_VERSION, &meta)?;
    writeln!(w, "freq_hz,mag_db")?;
    for (f, m) in cfr.freqs_hz.iter().zip(&cfr.mag_db) {
        writeln!(w, "{},{}", fmt_f64(*f), fmt_f64(*m))?;
    }
    Ok(())
}

/// One row of the per-ensemble delay statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub height_m: f64,
    pub scenario: String,
    pub stats: DelayStats,
}

pub fn write_delay_stats<W: Write>(w: &mut W, rows: &[StatsRow]) -> Result<()> {
    write_header(w, "delay-stats", FORMAT_VERSION, &[])?;
    writeln!(w, "height_m,scenario,t_mean_ns,t_rms_ns,cb_hz")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_f64(r.height_m),
            r.scenario,
            fmt_f64(r.stats.t_mean_ns),
            fmt_f64(r.stats.t_rms_ns),
            fmt_f64(r.stats.cb_hz),
        )?;
    }
    Ok(())
}

pub fn write_toa_cdf<W: Write>(w: &mut W, cdf: &[(f64, f64)]) -> Result<()> {
    write_header(w, "toa-cdf", FORMAT_VERSION, &[])?;
    writeln!(w, "toa_ns,cdf")?;
    for (t, p) in cdf {
        writeln!(w, "{},{}", fmt_f64(*t), fmt_f64(*p))?;
    }
    Ok(())
}

pub fn write_subband_stats<W: Write>(w: &mut W, stats: &[SubbandStat]) -> Result<()> {
    write_header(w, "subband-stats", FORMAT_VERSION, &[])?;
    writeln!(w, "center_hz,mean_db,var_db2")?;
    for s in stats {
        writeln!(
            w,
            "{},{},{}",
            fmt_f64(s.center_hz),
            fmt_f64(s.mean_db),
            fmt_f64(s.var_db2)
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Path loss samples
// ---------------------------------------------------------------------------

pub fn write_pl_samples<W: Write>(
    w: &mut W,
    samples: &[PathLossSample],
    extra_meta: &[(&str, String)],
) -> Result<()> {
    write_header(w, "pathloss-samples", FORMAT_VERSION, extra_meta)?;
    writeln!(w, "env,scenario,v_mph,d_m,pl_db")?;
    for s in samples {
        writeln!(
            w,
            "{},{},{},{},{}",
            s.env,
            s.scenario,
            s.v_mph,
            fmt_f64(s.distance_m),
            fmt_f64(s.path_loss_db)
        )?;
    }
    Ok(())
}

pub fn read_pl_samples(text: &str) -> Result<Vec<PathLossSample>> {
    let doc = CsvDoc::parse(text)?;
    doc.expect_kind("pathloss-samples")?;
    let mut out = Vec::with_capacity(doc.rows.len());
    for (line, fields) in &doc.rows {
        expect_width(*line, fields, 5)?;
        out.push(PathLossSample {
            env: fields[0].parse().map_err(|_| Error::Parse {
                line: *line,
                column: 1,
                msg: format!("bad environment {:?}", fields[0]),
            })?,
            scenario: fields[1].parse().map_err(|_| Error::Parse {
                line: *line,
                column: 2,
                msg: format!("bad scenario {:?}", fields[1]),
            })?,
            v_mph: field(*line, 2, &fields[2])?,
            distance_m: field(*line, 3, &fields[3])?,
            path_loss_db: field(*line, 4, &fields[4])?,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Preset registry dump
// ---------------------------------------------------------------------------

/// Dump the registry: 12 path loss rows, then 6 multipath rows, then 6
/// small-scale rows. Values are printed with shortest-round-trip formatting
/// so the tabulated constants appear verbatim.
pub fn write_presets_csv<W: Write>(w: &mut W) -> Result<()> {
    write_header(w, "presets", FORMAT_VERSION, &radio_metadata())?;
    writeln!(
        w,
        "kind,env,scenario,v_mph,alpha,pl0_db,sigma_db,cluster_rate_per_ns,ray_rate_per_ns,mu_ns,beta_ns,c_bar,eta_db,xi"
    )?;
    for p in all_presets() {
        writeln!(
            w,
            "pathloss,{},{},{},{},{},{},,,,,,,",
            p.env, p.scenario, p.v_mph, p.pl.exponent, p.pl.ref_loss_db, p.pl.shadow_sigma_db
        )?;
    }
    for (env, sc) in env_scenario_pairs() {
        let p = preset_lookup(env, sc, 0).expect("registry is total");
        writeln!(
            w,
            "pdp,{},{},,,,,{},{},{},{},{},,",
            env,
            sc,
            p.sv.cluster_rate,
            p.sv.ray_rate,
            p.sv.inter_decay_ns,
            p.sv.intra_decay_ns,
            p.sv.mean_clusters
        )?;
    }
    for (env, sc) in env_scenario_pairs() {
        let p = preset_lookup(env, sc, 0).expect("registry is total");
        writeln!(
            w,
            "smallscale,{},{},,,,,,,,,,{},{}",
            env, sc, p.nak.m_mean_db, p.nak.m_std_db
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Fit reports
// ---------------------------------------------------------------------------

struct ReportRow {
    csv_name: &'static str,
    text_name: &'static str,
    value: Option<f64>,
    truth: Option<f64>,
}

fn report_rows(report: &FitReport, truth: Option<&ScenarioPreset>) -> Vec<ReportRow> {
    let t = truth;
    vec![
        ReportRow {
            csv_name: "c_bar",
            text_name: "C_bar",
            value: report.mean_clusters,
            truth: t.map(|p| p.sv.mean_clusters),
        },
        ReportRow {
            csv_name: "cluster_rate_per_ns",
            text_name: "Lambda (1/ns)",
            value: report.cluster_rate,
            truth: t.map(|p| p.sv.cluster_rate),
        },
        ReportRow {
            csv_name: "ray_rate_per_ns",
            text_name: "lambda (1/ns)",
            value: report.ray_rate,
            truth: t.map(|p| p.sv.ray_rate),
        },
        ReportRow {
            csv_name: "mu_ns",
            text_name: "mu (ns)",
            value: report.inter_decay_ns,
            truth: t.map(|p| p.sv.inter_decay_ns),
        },
        ReportRow {
            csv_name: "beta_ns",
            text_name: "beta (ns)",
            value: report.intra_decay_ns,
            truth: t.map(|p| p.sv.intra_decay_ns),
        },
        ReportRow {
            csv_name: "eta_db",
            text_name: "eta (dB)",
            value: report.m_mean_db,
            truth: t.map(|p| p.nak.m_mean_db),
        },
        ReportRow {
            csv_name: "xi",
            text_name: "xi",
            value: report.m_std_db,
            truth: t.map(|p| p.nak.m_std_db),
        },
        ReportRow {
            csv_name: "m0",
            text_name: "m0",
            value: report.first_m_mean,
            truth: t.map(|p| p.nak.first_m_mean),
        },
        ReportRow {
            csv_name: "v0",
            text_name: "v0",
            value: report.first_m_var,
            truth: t.map(|p| p.nak.first_m_var),
        },
        ReportRow {
            csv_name: "alpha",
            text_name: "alpha",
            value: report.exponent,
            truth: t.map(|p| p.pl.exponent),
        },
        ReportRow {
            csv_name: "pl0_db",
            text_name: "PL0 (dB)",
            value: report.ref_loss_db,
            truth: t.map(|p| p.pl.ref_loss_db),
        },
        ReportRow {
            csv_name: "sigma_db",
            text_name: "sigma (dB)",
            value: report.shadow_sigma_db,
            truth: t.map(|p| p.pl.shadow_sigma_db),
        },
    ]
}

pub fn write_fit_report_csv<W: Write>(
    w: &mut W,
    report: &FitReport,
    truth: Option<&ScenarioPreset>,
) -> Result<()> {
    let mut meta = vec![
        ("label_source", report.diagnostics.label_source.clone()),
        ("cirs", report.diagnostics.cir_count.to_string()),
        (
            "cluster_gaps",
            report.diagnostics.cluster_gap_count.to_string(),
        ),
        ("ray_gaps", report.diagnostics.ray_gap_count.to_string()),
    ];
    if let Some(t) = truth {
        meta.push(("truth_preset", t.key()));
    }
    for note in &report.diagnostics.notes {
        meta.push(("note", note.clone()));
    }
    write_header(w, "fit-report", FORMAT_VERSION, &meta)?;
    writeln!(w, "param,value,truth,abs_err,rel_err")?;
    for row in report_rows(report, truth) {
        let value = row.value.map(fmt_f64).unwrap_or_default();
        let (truth_s, abs_s, rel_s) = match (row.value, row.truth) {
            (Some(v), Some(t)) => (
                fmt_f64(t),
                fmt_f64(v - t),
                if t != 0.0 {
                    fmt_f64((v - t) / t)
                } else {
                    String::new()
                },
            ),
            (None, Some(t)) => (fmt_f64(t), String::new(), String::new()),
            _ => (String::new(), String::new(), String::new()),
        };
        writeln!(w, "{},{value},{truth_s},{abs_s},{rel_s}", row.csv_name)?;
    }
    Ok(())
}

/// Human-readable fit table for visual comparison against reference tables.
pub fn write_fit_report_text<W: Write>(
    w: &mut W,
    report: &FitReport,
    truth: Option<&ScenarioPreset>,
) -> Result<()> {
    writeln!(w, "{:<16} {:>12} {:>12} {:>9}", "Parameter", "Value", "Truth", "Error")?;
    writeln!(w, "{}", "-".repeat(52))?;
    for row in report_rows(report, truth) {
        let value = row
            .value
            .map(|v| format!("{v:.4}"))
            .unwrap_or_else(|| "-".into());
        let truth_s = row
            .truth
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "-".into());
        let err = match (row.value, row.truth) {
            (Some(v), Some(t)) if t != 0.0 => format!("{:+.1}%", (v - t) / t * 100.0),
            _ => "-".into(),
        };
        writeln!(w, "{:<16} {:>12} {:>12} {:>9}", row.text_name, value, truth_s, err)?;
    }
    writeln!(w)?;
    writeln!(w, "labels: {}", report.diagnostics.label_source)?;
    writeln!(
        w,
        "realizations: {}, cluster gaps: {}, ray gaps: {}",
        report.diagnostics.cir_count,
        report.diagnostics.cluster_gap_count,
        report.diagnostics.ray_gap_count
    )?;
    if !report.diagnostics.cluster_count_histogram.is_empty() {
        let hist = report
            .diagnostics
            .cluster_count_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(" ");
        writeln!(w, "cluster count histogram: {hist}")?;
    }
    for note in &report.diagnostics.notes {
        writeln!(w, "note: {note}")?;
    }
    Ok(())
}

pub fn write_nakagami_bins<W: Write>(w: &mut W, bins: &[NakagamiBin]) -> Result<()> {
    write_header(w, "nakagami-bins", FORMAT_VERSION, &[])?;
    writeln!(w, "delay_ns,m_hat,omega_hat,realizations")?;
    for b in bins {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(b.delay_ns),
            fmt_f64(b.m_hat),
            fmt_f64(b.omega_hat),
            b.realizations
        )?;
    }
    Ok(())
}
