//! Shared fixtures for the benchmarks.

use uwbchan::estimation::{clean_deconvolve, CleanConfig};
use uwbchan::presets::preset_lookup;
use uwbchan::svgen::{generate_cir, generate_ensemble, GenConfig};
use uwbchan::types::{Cir, EnvironmentClass, Geometry, ScenarioId};
use uwbchan::RandomSource;

/// The densest preset (foliage: highest cluster and ray rates).
pub fn dense_preset() -> &'static uwbchan::ScenarioPreset {
    preset_lookup(EnvironmentClass::Open, ScenarioId::S1Foliage, 0).unwrap()
}

pub fn reference_geometry() -> Geometry {
    Geometry::new(10.0, 8.0)
}

pub fn one_cir(seed: u64) -> Cir {
    let mut rng = RandomSource::new(seed, 0);
    generate_cir(dense_preset(), &reference_geometry(), &mut rng).unwrap()
}

pub fn ensemble(count: usize, seed: u64) -> Vec<Cir> {
    generate_ensemble(
        &GenConfig::default(),
        dense_preset(),
        &reference_geometry(),
        count,
        seed,
    )
    .unwrap()
}

/// A synthetic scan with five template copies, plus its template.
pub fn scan_fixture() -> (Vec<f64>, Vec<f64>) {
    let template: Vec<f64> = (0..40)
        .map(|i| {
            let x = (i as f64 - 12.0) / 4.0;
            (-0.5 * x * x).exp() * (1.5 * x).cos()
        })
        .collect();
    let mut scan = vec![0.0; 1666];
    for (lag, a) in [(0, 1.0), (90, 0.7), (300, 0.5), (700, 0.3), (1200, 0.15)] {
        for (i, &t) in template.iter().enumerate() {
            scan[lag + i] += a * t;
        }
    }
    (scan, template)
}

pub fn run_clean(scan: &[f64], template: &[f64]) -> Cir {
    clean_deconvolve(scan, template, 0.06, &CleanConfig::default())
        .unwrap()
        .cir
}
