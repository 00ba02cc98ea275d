//! End-to-end tests driving the built binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uwbchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uwbchan"))
        .args(args)
        .env_remove("UWBCHAN_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Sorted (name, bytes) snapshot of a directory.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn presets_prints_the_full_registry() {
    let out = uwbchan(&["presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("kind,") && !l.is_empty())
        .collect();
    assert_eq!(rows.len(), 24, "12 pathloss + 6 pdp + 6 smallscale rows");
    assert!(text.contains("pathloss,open,s1,0,2.6471,34.905,3.37"));
    assert!(text.contains("pathloss,suburban,s3,20,2.961,22.73,4.71"));
    assert!(text.contains("pdp,suburban,s1,,,,,0.789,0.827,2.63,0.9,2.66"));
    assert!(text.contains("pdp,open,s2,,,,,0.09,2.21,2.91,0.9069,2.33"));
    assert!(text.contains("smallscale,open,s1,,,,,,,,,,1.36,2.19"));
}

#[test]
fn generate_writes_files_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let dir_a = tmp.path().join("a");
    let dir_b = tmp.path().join("b");
    let args = |out: &Path| {
        vec![
            "--seed".into(),
            "7".to_string(),
            "--out".into(),
            out.to_string_lossy().into_owned(),
            "generate".into(),
            "--env".into(),
            "open".into(),
            "--scenario".into(),
            "2".into(),
            "--v".into(),
            "0".into(),
            "--h".into(),
            "8".into(),
            "--d".into(),
            "10".into(),
            "--n".into(),
            "25".into(),
        ]
    };
    let run = |out: &Path| {
        let args = args(out);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert!(uwbchan(&args).status.success());
    };
    run(&dir_a);
    run(&dir_b);

    let a = snapshot(&dir_a);
    assert_eq!(a.len(), 26, "25 realizations plus the manifest");
    assert!(a.iter().any(|(n, _)| n == "manifest.csv"));
    assert_eq!(a, snapshot(&dir_b), "same seed must give identical bytes");

    let manifest = read(&dir_a.join("manifest.csv"));
    assert!(manifest.contains("# seed=7"));
    assert!(manifest.contains("# preset=open:s2:v0"));
}

#[test]
fn generate_rejects_zero_realizations() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uwbchan(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "generate",
        "--env",
        "open",
        "--scenario",
        "2",
        "--n",
        "0",
    ]);
    assert!(!out.status.success());
}

#[test]
fn unknown_preset_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = uwbchan(&[
        "--out",
        tmp.path().to_str().unwrap(),
        "generate",
        "--env",
        "open",
        "--scenario",
        "2",
        "--v",
        "10",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no preset"));
}

#[test]
fn analyze_emits_stats_and_per_input_products() {
    let tmp = tempfile::tempdir().unwrap();
    let ens = tmp.path().join("ens");
    assert!(uwbchan(&[
        "--seed",
        "3",
        "--out",
        ens.to_str().unwrap(),
        "generate",
        "--env",
        "suburban",
        "--scenario",
        "1",
        "--n",
        "25",
    ])
    .status
    .success());

    let an = tmp.path().join("an");
    let out = uwbchan(&[
        "--out",
        an.to_str().unwrap(),
        "analyze",
        "--input",
        ens.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for f in ["pdp.csv", "cfr.csv", "toa_cdf.csv", "subband_stats.csv"] {
        assert!(an.join("ens").join(f).exists(), "missing {f}");
    }
    let stats = read(&an.join("delay_stats.csv"));
    assert!(stats.contains("height_m,scenario,t_mean_ns,t_rms_ns,cb_hz"));
    let row = stats.lines().last().unwrap();
    assert!(row.starts_with("8.00000000e0,s1,"));
}

#[test]
fn analyze_single_tap_cir_has_zero_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let cir_path = tmp.path().join("one_tap.csv");
    {
        use uwbchan::types::{Cir, Tap};
        let cir = Cir::on_default_grid(vec![Tap {
            delay_ns: 4.2,
            amplitude: 0.5,
            cluster: 0,
        }])
        .unwrap();
        let mut buf = Vec::new();
        uwbchan::fileio::write_cir(&mut buf, &cir, &[]).unwrap();
        fs::write(&cir_path, buf).unwrap();
    }
    let an = tmp.path().join("an");
    let out = uwbchan(&[
        "--out",
        an.to_str().unwrap(),
        "analyze",
        "--input",
        cir_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stats = read(&an.join("delay_stats.csv"));
    let row = stats.lines().last().unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0, "t_rms must be 0");
    assert!(fields[4].parse::<f64>().unwrap().is_infinite());
}

#[test]
fn analyze_scanset_cleans_before_averaging() {
    let tmp = tempfile::tempdir().unwrap();
    let scanset_path = tmp.path().join("scans.csv");
    {
        use uwbchan::types::{EnvironmentClass, Geometry, ScanSet, ScenarioId};
        // Pulse template and 25 identical two-path scans.
        let template: Vec<f64> = (0..40)
            .map(|i| {
                let x = (i as f64 - 12.0) / 4.0;
                (-0.5 * x * x).exp() * (1.5 * x).cos()
            })
            .collect();
        let mut scan = vec![0.0; 400];
        for (i, &t) in template.iter().enumerate() {
            scan[i] += t;
            scan[i + 200] += 0.5 * t;
        }
        let set = ScanSet {
            scans: vec![scan; 25],
            template,
            t_s_ns: 0.06,
            geometry: Geometry::new(10.0, 8.0),
            env: EnvironmentClass::Open,
            scenario: ScenarioId::S2Ground1m5,
        };
        let mut buf = Vec::new();
        uwbchan::fileio::write_scanset(&mut buf, &set).unwrap();
        fs::write(&scanset_path, buf).unwrap();
    }
    let an = tmp.path().join("an");
    let out = uwbchan(&[
        "--out",
        an.to_str().unwrap(),
        "analyze",
        "--scanset",
        scanset_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // Two deconvolved taps 12 ns apart with power ratio 1/4:
    // t_mean = 12 * 0.2 = 2.4 ns, t_rms = 12 * 0.4 = 4.8 ns.
    let stats = read(&an.join("delay_stats.csv"));
    let fields: Vec<&str> = stats.lines().last().unwrap().split(',').collect();
    let t_mean: f64 = fields[2].parse().unwrap();
    let t_rms: f64 = fields[3].parse().unwrap();
    assert!((t_mean - 2.4).abs() < 1e-6, "t_mean {t_mean}");
    assert!((t_rms - 4.8).abs() < 1e-6, "t_rms {t_rms}");
}

#[test]
fn fit_round_trips_generated_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    let ens = tmp.path().join("ens");
    assert!(uwbchan(&[
        "--seed",
        "11",
        "--out",
        ens.to_str().unwrap(),
        "generate",
        "--env",
        "open",
        "--scenario",
        "2",
        "--n",
        "400",
        "--min-clusters",
        "2",
    ])
    .status
    .success());

    let fit = tmp.path().join("fit");
    let out = uwbchan(&[
        "--out",
        fit.to_str().unwrap(),
        "fit",
        "--input",
        ens.to_str().unwrap(),
        "--truth",
        "open:s2:v0",
    ]);
    assert!(out.status.success());
    let csv = read(&fit.join("fit_report.csv"));
    assert!(csv.contains("truth_preset=open:s2:v0"));
    let rel_err = |param: &str| -> f64 {
        let row = csv
            .lines()
            .find(|l| l.starts_with(&format!("{param},")))
            .unwrap_or_else(|| panic!("row {param} present"));
        row.split(',').nth(4).unwrap().parse::<f64>().unwrap().abs()
    };
    assert!(rel_err("cluster_rate_per_ns") < 0.10);
    assert!(rel_err("ray_rate_per_ns") < 0.10);
    assert!(rel_err("mu_ns") < 0.15);
    assert!(rel_err("beta_ns") < 0.15);
    assert!(read(&fit.join("fit_report.txt")).contains("labels: embedded"));
}

#[test]
fn fit_with_gap_labels_notes_the_source() {
    let tmp = tempfile::tempdir().unwrap();
    let ens = tmp.path().join("ens");
    assert!(uwbchan(&[
        "--seed",
        "5",
        "--out",
        ens.to_str().unwrap(),
        "generate",
        "--env",
        "open",
        "--scenario",
        "3",
        "--n",
        "40",
    ])
    .status
    .success());
    let fit = tmp.path().join("fit");
    let out = uwbchan(&[
        "--out",
        fit.to_str().unwrap(),
        "fit",
        "--input",
        ens.to_str().unwrap(),
        "--labels",
        "gap",
        "--gap-ns",
        "9.4",
    ]);
    assert!(out.status.success());
    assert!(read(&fit.join("fit_report.txt")).contains("labels: gap-rule(9.4 ns)"));
}

#[test]
fn fit_on_empty_directory_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    fs::create_dir_all(&empty).unwrap();
    let fit_out = tmp.path().join("fit");
    let out = uwbchan(&[
        "--out",
        fit_out.to_str().unwrap(),
        "fit",
        "--input",
        empty.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!fit_out.join("fit_report.csv").exists());
}

#[test]
fn fit_with_too_few_realizations_writes_partial_report_and_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let ens = tmp.path().join("ens");
    assert!(uwbchan(&[
        "--out",
        ens.to_str().unwrap(),
        "generate",
        "--env",
        "open",
        "--scenario",
        "2",
        "--n",
        "3",
    ])
    .status
    .success());
    let fit = tmp.path().join("fit");
    let out = uwbchan(&[
        "--out",
        fit.to_str().unwrap(),
        "fit",
        "--input",
        ens.to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "3 realizations are insufficient");
    let csv = read(&fit.join("fit_report.csv"));
    assert!(csv.contains("cluster/ray fit skipped"));
}

#[test]
fn pathloss_sweep_without_noise_fits_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path();
    let out = uwbchan(&[
        "--out",
        out_dir.to_str().unwrap(),
        "pathloss",
        "--env",
        "suburban",
        "--scenario",
        "3",
        "--v",
        "20",
        "--n",
        "50",
        "--fit",
    ]);
    assert!(out.status.success());
    let samples = read(&out_dir.join("pathloss_samples.csv"));
    assert_eq!(
        samples
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with("env,") && !l.is_empty())
            .count(),
        50
    );
    let fit = read(&out_dir.join("pathloss_fit.csv"));
    // Noiseless sweep: alpha and PL0 recovered to printing precision.
    let row = fit.lines().find(|l| l.starts_with("alpha,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let alpha: f64 = fields[1].parse().unwrap();
    assert!((alpha - 2.961).abs() < 1e-8);
    let row = fit.lines().find(|l| l.starts_with("sigma_db,")).unwrap();
    let sigma: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!(sigma < 1e-8);
}

#[test]
fn out_dir_env_variable_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_uwbchan"))
        .args(["presets", "--file", "presets.csv"])
        .env("UWBCHAN_OUT", tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(tmp.path().join("presets.csv").exists());
}

#[test]
fn unsupported_format_version_is_rejected() {
    let out = uwbchan(&["--format-version", "2", "presets"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unsupported format version"));
}

#[test]
fn manifest_regenerates_the_ensemble_bitwise() {
    // Generating again from the manifest's recorded seed and parameters
    // reproduces every file.
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    assert!(uwbchan(&[
        "--seed",
        "99",
        "--out",
        first.to_str().unwrap(),
        "generate",
        "--env",
        "suburban",
        "--scenario",
        "2",
        "--v",
        "20",
        "--h",
        "12",
        "--d",
        "14",
        "--n",
        "8",
    ])
    .status
    .success());

    let manifest = uwbchan::fileio::read_manifest(&read(&first.join("manifest.csv"))).unwrap();
    let second = tmp.path().join("second");
    assert!(uwbchan(&[
        "--seed",
        &manifest.seed.to_string(),
        "--out",
        second.to_str().unwrap(),
        "generate",
        "--env",
        &manifest.env.to_string(),
        "--scenario",
        &manifest.scenario.number().to_string(),
        "--v",
        &manifest.v_mph.to_string(),
        "--h",
        &manifest.geometry.uav_height_m.to_string(),
        "--d",
        &manifest.geometry.distance_m.to_string(),
        "--n",
        &manifest.entries.len().to_string(),
        "--min-clusters",
        &manifest.min_clusters.to_string(),
    ])
    .status
    .success());
    assert_eq!(snapshot(&first), snapshot(&second));
}
