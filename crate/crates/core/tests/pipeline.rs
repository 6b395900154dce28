use std::f64::consts::PI;

use dmusic_core::bench::sorted_deviation;
use dmusic_core::io::{read_measurement_csv, write_measurement_csv, InstanceFile};
use dmusic_core::model::Placement;
use dmusic_core::{music, random_instance, run, synthesize, InstanceSpec, MusicOptions, PipelineConfig, Source, SourceMeasure};

#[test]
fn recovers_well_separated_pairs() {
    let spec = InstanceSpec::new(2, 4, 12.0 * PI, PI, 1.0)
        .sources_per_cluster(1, 2)
        .placement(Placement::Chain { spacing: 1.5, jitter: 0.1 })
        .amplitude_range(0.8, 1.2);
    for seed in 0..6u64 {
        let (mu, _) = random_instance(&spec, seed).unwrap();
        let truth = mu.sorted_locations();
        let y = synthesize(&mu, 1000, 1.0, 1e-3, Some(seed)).unwrap();
        let extent = truth.iter().fold(0.0f64, |a, t| a.max(t.abs()));
        let config = PipelineConfig { d_init: Some(extent + 2.0 * PI), ..PipelineConfig::new(1e-3) };
        let report = run(&y, &config).unwrap();
        assert!(report.decouple_success, "seed {seed}: {:?}", report.warnings);
        assert!(!report.fallback);
        let dev = sorted_deviation(&report.locations, &truth);
        assert!(dev < 0.2, "seed {seed}: {:?} vs {truth:?}", report.locations);

        // Both algorithms agree where both succeed.
        let plain = music(&y, 1e-3, -extent - 2.0 * PI, extent + 2.0 * PI, config.tps_source, &MusicOptions::default()).unwrap();
        assert!(sorted_deviation(&plain.locations, &truth) < 0.2);
        assert!(report.stage_times.contains_key("local_music"));
    }
}

#[test]
fn single_precision_pipeline_runs() {
    let mu = SourceMeasure::<f32>::new(vec![Source::real(-20.0, 1.0), Source::real(20.0, 1.0)]).unwrap();
    let y = synthesize(&mu, 600, 1.0, 1e-3, Some(4)).unwrap();
    let config = PipelineConfig::<f32> { d_init: Some(30.0), ..PipelineConfig::new(1e-3) };
    let report = run(&y, &config).unwrap();
    assert_eq!(report.locations.len(), 2, "{report:?}");
    for (got, want) in report.locations.iter().zip([-20.0f32, 20.0]) {
        assert!((got - want).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn files_round_trip_through_the_pipeline() {
    let spec = InstanceSpec::new(2, 2, 14.0 * PI, 0.5, 1.0).sources_per_cluster(1, 1);
    let (mu, region) = random_instance(&spec, 3).unwrap();
    let mut inst = Vec::new();
    InstanceFile::from_instance(&mu, &region, 1e-3).write(&mut inst).unwrap();
    let (mu2, _) = InstanceFile::read(inst.as_slice()).unwrap().to_instance().unwrap();
    assert_eq!(mu2.sorted_locations(), mu.sorted_locations());

    let y = synthesize(&mu2, 1000, 1.0, 1e-3, Some(3)).unwrap();
    let mut csv = Vec::new();
    write_measurement_csv(&mut csv, &y).unwrap();
    let back = read_measurement_csv(csv.as_slice(), 1.0, 1e-3).unwrap();
    let extent = mu.sorted_locations().iter().fold(0.0f64, |a, t| a.max(t.abs()));
    let config = PipelineConfig { d_init: Some(extent + 2.0 * PI), ..PipelineConfig::new(1e-3) };
    assert_eq!(back, y);
    assert_eq!(run(&y, &config).unwrap().locations, run(&back, &config).unwrap().locations);
}

#[test]
fn report_serializes_without_diagnostics() {
    let mu = SourceMeasure::new(vec![Source::real(3.0, 1.0)]).unwrap();
    let y = synthesize(&mu, 400, 1.0, 1e-3, Some(1)).unwrap();
    let report = run(&y, &PipelineConfig { d_init: Some(10.0), ..PipelineConfig::new(1e-3) }).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert!(json.get("locations").is_some());
    assert!(json.get("decoupling").is_none());
}

