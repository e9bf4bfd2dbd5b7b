use std::fs;

use modelsched::harness::output::{read_schedule, staircase_svg, write_schedule};
use modelsched::harness::smooth::DEFAULT_SPAN;
use modelsched::harness::{
    emit_outputs, load_dataset_csv, read_dataset, run_experiment, ExperimentConfig, ExperimentResult, Method,
};
use modelsched::synth::{sample_mixture, MixtureSpec};
use modelsched::{compress, Cost, Error, ModelRecord, Source, VarSet};

fn small_config(runs: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        runs,
        seed: 77,
        ..ExperimentConfig::default()
    };
    c.msb.forest.n_trees = 15;
    c.msb.path.n_lambda = 30;
    c
}

#[test]
fn experiment_points_are_normalized() {
    let data = sample_mixture(&MixtureSpec::new(0.3, 800, 3)).unwrap();
    let result = run_experiment(&data, &small_config(2)).unwrap();
    assert!(result.failures.is_empty());
    assert_eq!(result.runs.len(), 2);
    let points = result.points();
    assert!(points.iter().all(|p| p.normalized_cost > 0.0 && p.normalized_cost <= 1.0));
    for run in &result.runs {
        let full = run.msb.schedule.records().iter().find(|r| r.variables.len() == 8);
        if let Some(full) = full {
            assert_eq!(full.cost, run.profile.full_cost());
        }
        assert!(points
            .iter()
            .any(|p| p.run == run.run && p.method == Method::LogitB && p.normalized_cost == 1.0));
    }
    let again = run_experiment(&data, &small_config(2)).unwrap();
    assert_eq!(points, again.points());
}

#[test]
fn emitted_files_reload_and_validate() {
    let data = sample_mixture(&MixtureSpec::new(0.3, 600, 4)).unwrap();
    let result = run_experiment(&data, &small_config(1)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_outputs(&result, dir.path()).unwrap();
    assert!(written.iter().all(|p| p.exists()));
    let msb = read_schedule(&dir.path().join("run001_msb.csv")).unwrap();
    assert_eq!(msb, result.runs[0].msb.schedule);
    let scatter = fs::read_to_string(dir.path().join("scatter.csv")).unwrap();
    assert!(scatter.starts_with("normalized_cost,accuracy,method,run\n"));
    let curves = fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    // a method with fewer than five points gets no curve
    let smoothable = [Method::Msb, Method::LogitB]
        .into_iter()
        .filter(|&m| result.points().iter().filter(|p| p.method == m).count() >= 5)
        .count();
    assert_eq!(curves.lines().count(), 1 + 100 * smoothable);
    for kind in ["cost", "importance", "sampling", "l1path"] {
        assert!(dir.path().join(format!("run001_trace_{kind}.csv")).exists());
    }
}

#[test]
fn empty_result_writes_headers_only() {
    let result = ExperimentResult {
        runs: Vec::new(),
        failures: Vec::new(),
        span: DEFAULT_SPAN,
    };
    let dir = tempfile::tempdir().unwrap();
    emit_outputs(&result, dir.path()).unwrap();
    let read = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap();
    assert_eq!(read("scatter.csv"), "normalized_cost,accuracy,method,run\n");
    assert_eq!(read("curves.csv"), "normalized_cost,smoothed_accuracy,method\n");
    assert_eq!(read("failures.csv"), "run,error\n");
}

#[test]
fn zero_runs_is_a_config_error() {
    let data = sample_mixture(&MixtureSpec::new(0.3, 100, 4)).unwrap();
    assert!(matches!(
        run_experiment(&data, &small_config(0)),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn listing_staircase_has_six_steps_and_round_trips() {
    let rows: [(f64, f64, &[usize]); 6] = [
        (417.0, 0.9907834, &[4, 5, 8, 11, 13, 14, 15]),
        (385.0, 0.9874319, &[4, 5, 11, 13, 14, 15]),
        (340.0, 0.9773775, &[4, 11, 13, 14, 15]),
        (248.0, 0.9706745, &[11, 13, 14, 15]),
        (171.0, 0.9400922, &[11, 14, 15]),
        (119.0, 0.8504399, &[11, 14]),
    ];
    let records: Vec<ModelRecord> = rows
        .iter()
        .map(|(c, a, v)| ModelRecord::new(VarSet::new(v.to_vec()), Cost::from_units(*c), *a, Source::ByImportance))
        .collect();
    let schedule = compress(&records);
    let svg = staircase_svg(&schedule, "listing");
    assert_eq!(svg.matches(r#"class="step""#).count(), 6);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_schedule(&path, &schedule).unwrap();
    assert_eq!(read_schedule(&path).unwrap(), schedule);
}

#[test]
fn loader_codes_labels_by_first_appearance() {
    let text = "f1,label,f2\n1,a,2\n3,b,4\n5,a,6\n";
    let loaded = read_dataset(text.as_bytes(), "label").unwrap();
    assert_eq!(loaded.data.y, vec![1, 2, 1]);
    assert_eq!(loaded.feature_names, vec!["f1", "f2"]);
    assert_eq!(loaded.data.x.row(1), &[3.0, 4.0]);
    assert!(matches!(
        read_dataset("".as_bytes(), "label"),
        Err(Error::EmptyDataset)
    ));
    assert!(matches!(
        load_dataset_csv(std::path::Path::new("/nonexistent/x.csv"), "label"),
        Err(Error::Io { .. })
    ));
}
