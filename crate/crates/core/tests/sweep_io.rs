mod common;

use common::dims;
use rand::Rng;
use sepscope::states::{
    horodecki_3x3, load_state, load_state_unchecked, random_density, random_separable, save_state, werner,
    LabeledState, RngSeed,
};
use sepscope::sweep::{
    emit, find_threshold, read_csv, read_json, run_sweep, run_sweep_with_threads, summarize, Axis, Detector, Family,
    GridSpec, OutputFormat, CSV_HEADER,
};
use sepscope::{evaluate, Error, GptOpSet, ReductionParams};

fn werner_grid(a: f64, b_axis: Axis) -> GridSpec {
    GridSpec {
        family: Family::Werner { d: 3 },
        a,
        b_axis,
        param_axis: Axis::new(-1.0, 1.0, 0.05).unwrap(),
        yset: GptOpSet::REALIGN,
    }
}

#[test]
fn sweep_records_match_direct_evaluation() {
    let spec = GridSpec::default_for(Family::Horodecki, 0.0);
    let records = run_sweep(&spec).unwrap();
    let params = spec.param_axis.points();
    let bs = spec.b_axis.points();
    assert_eq!(records.len(), params.len() * bs.len());
    let mut g = common::rng(9);
    for _ in 0..10 {
        let (pi, bi) = (g.random_range(0..params.len()), g.random_range(0..bs.len()));
        let r = &records[pi * bs.len() + bi];
        let state = horodecki_3x3(params[pi]).unwrap().state;
        let v = evaluate(&state, ReductionParams::real(0.0, bs[bi]), GptOpSet::REALIGN).unwrap();
        assert_eq!((r.family_param, r.b), (params[pi], bs[bi]));
        assert_eq!((r.statistic, r.bound, r.violation), (v.statistic, v.bound, v.violation));
        assert_eq!(r.yset, "cA,rB");
    }
}

#[test]
fn sweep_independent_of_thread_count() {
    let spec = GridSpec::default_for(Family::Werner { d: 3 }, 1.0);
    let serial = run_sweep_with_threads(&spec, 1).unwrap();
    let parallel = run_sweep_with_threads(&spec, 4).unwrap();
    assert_eq!(serial, parallel);
}

#[test]
fn werner_violation_columns() {
    let f_axis = Axis::new(-1.0, 1.0, 0.5).unwrap();
    let spec = GridSpec {
        param_axis: f_axis,
        ..werner_grid(0.0, Axis::single(0.0))
    };
    let got: Vec<f64> = run_sweep(&spec).unwrap().iter().map(|r| r.violation).collect();
    let expected = [2.0 / 3.0, 1.0 / 6.0, 0.0, 0.0, 0.0];
    assert!(got.iter().zip(expected).all(|(x, y)| (x - y).abs() < 1e-12), "{got:?}");

    let spec = GridSpec {
        param_axis: f_axis,
        ..werner_grid(1.0, Axis::new(-1.0 / 3.0, 1.0, 4.0 / 3.0).unwrap())
    };
    let records = run_sweep(&spec).unwrap();
    for pair in records.chunks(2) {
        assert!((pair[0].b + 1.0 / 3.0).abs() < 1e-15 && pair[1].b == 1.0);
        assert!((pair[0].violation - pair[1].violation).abs() < 1e-12);
    }
}

#[test]
fn werner_symmetric_b_columns() {
    let zero = run_sweep(&werner_grid(0.0, Axis::single(0.0))).unwrap();
    let two_thirds = run_sweep(&werner_grid(0.0, Axis::single(2.0 / 3.0))).unwrap();
    for (x, y) in zero.iter().zip(&two_thirds) {
        assert!((x.violation - y.violation).abs() <= 1e-9);
    }
}

#[test]
fn horodecki_b_zero_column_positive() {
    let spec = GridSpec {
        family: Family::Horodecki,
        a: 0.0,
        b_axis: Axis::single(0.0),
        param_axis: Axis::new(0.1, 0.9, 0.1).unwrap(),
        yset: GptOpSet::REALIGN,
    };
    let records = run_sweep(&spec).unwrap();
    assert_eq!(records.len(), 9);
    assert!(records.iter().all(|r| r.violation > 0.0));
}

#[test]
fn summary_reports_first_maximum() {
    let records = run_sweep(&GridSpec::default_for(Family::Werner { d: 3 }, 0.0)).unwrap();
    let s = summarize(&records).unwrap();
    assert_eq!(s.points, 41 * 41);
    assert!((s.max_violation - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(s.argmax.0, -1.0);
    assert!(s.argmax.1.abs() < 1e-12);
    assert!(summarize(&[]).is_none());
}

#[test]
fn thresholds() {
    let family = Family::Werner { d: 3 };
    let realign = find_threshold(&family, &Detector::Realignment, -1.0, 0.0).unwrap();
    assert!((realign + 1.0 / 3.0).abs() <= 1e-6);
    let grc = Detector::Grc {
        a: 0.0,
        b: 0.0,
        yset: GptOpSet::REALIGN,
    };
    assert!((find_threshold(&family, &grc, -1.0, 0.0).unwrap() + 1.0 / 3.0).abs() <= 1e-6);
    assert!(find_threshold(&family, &Detector::Ppt, -1.0, 1.0).unwrap().abs() <= 1e-6);
    assert!(matches!(
        find_threshold(&family, &Detector::Reduction, -1.0, 1.0),
        Err(Error::NoSignChange { .. })
    ));
}

#[test]
fn range_violations_rejected() {
    let bad_f = GridSpec {
        param_axis: Axis {
            start: -1.5,
            stop: 1.0,
            step: 0.1,
        },
        ..werner_grid(0.0, Axis::single(0.0))
    };
    assert!(matches!(run_sweep(&bad_f), Err(Error::ParamOutOfRange(_))));
    let bad_c = GridSpec {
        param_axis: Axis {
            start: 0.0,
            stop: 0.5,
            step: 0.1,
        },
        ..GridSpec::default_for(Family::Horodecki, 0.0)
    };
    assert!(matches!(run_sweep(&bad_c), Err(Error::ParamOutOfRange(_))));
    assert!(Axis::new(0.0, 1.0, 0.0).is_err());
    assert!(Axis::new(1.0, 0.0, 0.1).is_err());
}

#[test]
fn csv_and_json_round_trip() {
    let records = run_sweep(&GridSpec {
        param_axis: Axis::new(-1.0, 1.0, 0.25).unwrap(),
        ..werner_grid(0.0, Axis::new(0.0, 1.0, 0.3).unwrap())
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();

    let csv_path = dir.path().join("grid.csv");
    emit(&records, OutputFormat::Csv, &csv_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(text.lines().count(), records.len() + 1);
    let back = read_csv(std::fs::File::open(&csv_path).unwrap()).unwrap();
    assert_eq!(back, records);

    let json_path = dir.path().join("grid.json");
    emit(&records, OutputFormat::Json, &json_path).unwrap();
    assert_eq!(read_json(std::fs::File::open(&json_path).unwrap()).unwrap(), records);

    assert!(matches!(
        emit(&[], OutputFormat::Csv, dir.path().join("e.csv")),
        Err(Error::EmptyRecords)
    ));
}

#[test]
fn state_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let states: Vec<LabeledState> = vec![
        werner(3, -0.5).unwrap(),
        horodecki_3x3(0.3).unwrap(),
        random_separable(dims(2, 3), 5, RngSeed(4)).unwrap(),
        LabeledState::new("random", &[], random_density(dims(3, 2), RngSeed(8)).unwrap()),
    ];
    for (k, s) in states.iter().enumerate() {
        let path = dir.path().join(format!("s{k}.json"));
        save_state(s, &path).unwrap();
        let back = load_state(&path).unwrap();
        assert_eq!(back.state.dims(), s.state.dims());
        assert!(back.state.matrix().max_abs_diff(s.state.matrix()) <= 1e-15);
        assert_eq!(back.name, s.name);
        assert_eq!(back.params, s.params);
    }
}

#[test]
fn state_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let low_trace = dir.path().join("trace.json");
    std::fs::write(
        &low_trace,
        r#"{"m":1,"n":2,"re":[[0.45,0],[0,0.45]],"im":[[0,0],[0,0]]}"#,
    )
    .unwrap();
    assert!(matches!(load_state(&low_trace), Err(Error::InvariantViolation(_))));
    assert!(load_state_unchecked(&low_trace).is_ok());

    let wrong_size = dir.path().join("size.json");
    std::fs::write(&wrong_size, r#"{"m":2,"n":2,"re":[[1,0],[0,0]],"im":[[0,0],[0,0]]}"#).unwrap();
    assert!(matches!(load_state(&wrong_size), Err(Error::Parse { .. })));

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"m\": 2,\n \"n\": }").unwrap();
    match load_state(&broken) {
        Err(Error::Parse { location, .. }) => assert!(location.contains("line 2"), "{location}"),
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn generators_are_deterministic() {
    let a = random_separable(dims(3, 3), 20, RngSeed(7)).unwrap();
    let b = random_separable(dims(3, 3), 20, RngSeed(7)).unwrap();
    assert_eq!(a, b);
    let c = random_separable(dims(3, 3), 20, RngSeed(8)).unwrap();
    assert_ne!(a.state, c.state);
}
