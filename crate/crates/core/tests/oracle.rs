use modelsched::harness::split_dataset;
use modelsched::oracle::{coverage_fraction, exhaustive_schedule, frontier, SolutionSpace};
use modelsched::synth::{sample_mixture, MixtureSpec};
use modelsched::{msb, Cost, CostProfile, Error, MsbConfig, SplitData, VarSet};

fn four_variable_split() -> SplitData {
    let data = sample_mixture(&MixtureSpec::new(0.3, 1200, 12)).unwrap();
    let keep = VarSet::new(vec![1, 4, 5, 8]);
    split_dataset(data.n(), 13).unwrap().apply(&data.subset_vars(&keep))
}

fn config() -> MsbConfig {
    let mut c = MsbConfig {
        seed: 21,
        ..MsbConfig::default()
    };
    c.forest.n_trees = 25;
    c
}

#[test]
fn exhaustive_frontier_bounds_msb_everywhere() {
    let split = four_variable_split();
    let profile = CostProfile::from_units(&[92.0, 23.0, 23.0, 5.0]).unwrap();
    let config = config();
    let result = msb(&split, &profile, &config).unwrap();
    let (exhaustive, space) = exhaustive_schedule(&split, &profile, &config.engine_params()).unwrap();
    assert_eq!(space.len(), 11);
    exhaustive.validate().unwrap();

    // both sides train identical forests for a shared subset
    for r in result.schedule.records() {
        let pt = space.points.iter().find(|pt| pt.subset == r.variables).unwrap();
        assert_eq!(pt.val_accuracy, r.val_accuracy);
    }
    for cents in (0..=14_300).step_by(100) {
        let b = Cost::from_cents(cents);
        match (result.schedule.best_under_budget(b), exhaustive.best_under_budget(b)) {
            (Ok(m), Ok(e)) => assert!(e.val_accuracy >= m.val_accuracy),
            (Err(_), _) => {}
            (Ok(_), Err(e)) => panic!("exhaustive infeasible at {b}: {e}"),
        }
    }
    let visited = result.visited_subsets();
    let cov = coverage_fraction(&space, &visited);
    assert!(cov > 0.0 && cov <= 1.0);
    assert_eq!(cov, visited.len() as f64 / 11.0);
}

#[test]
fn frontier_ignores_the_order_of_the_space() {
    let split = four_variable_split();
    let profile = CostProfile::from_units(&[1.0, 1.0, 1.0, 1.0]).unwrap();
    let (schedule, space) = exhaustive_schedule(&split, &profile, &config().engine_params()).unwrap();
    let mut reversed = space.points.clone();
    reversed.reverse();
    assert_eq!(frontier(&SolutionSpace { points: reversed }), schedule);
}

#[test]
fn space_dump_has_one_line_per_subset() {
    let split = four_variable_split();
    let profile = CostProfile::from_units(&[2.0, 3.0, 5.0, 7.0]).unwrap();
    let (_, space) = exhaustive_schedule(&split, &profile, &config().engine_params()).unwrap();
    let mut buf = Vec::new();
    space.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "subset;cost;val_accuracy");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].starts_with("1 2;5.00;"));
}

#[test]
fn exhaustive_checks_dimensions() {
    let split = four_variable_split();
    let profile = CostProfile::from_units(&[1.0, 2.0]).unwrap();
    assert!(matches!(
        exhaustive_schedule(&split, &profile, &config().engine_params()),
        Err(Error::DimensionMismatch { .. })
    ));
}
