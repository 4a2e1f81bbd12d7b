use degenfem::study::{run_study, Family, StudyConfig, StudyResult, CSV_HEADER};
use degenfem::Error;

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        StudyConfig::with_ns(Family::Uniform, &[16, 8], 1.0),
        StudyConfig::with_ns(Family::BabuskaAziz, &[8, 16], 0.5),
        StudyConfig::new(Family::Uniform, vec![0.3], 1.0),
        StudyConfig::new(Family::Uniform, vec![], 1.0),
    ];
    for cfg in bad {
        assert!(matches!(run_study(&cfg), Err(Error::Config(_))), "{cfg:?}");
    }
}

#[test]
fn family_names() {
    for (name, family) in [
        ("uniform", Family::Uniform),
        ("ba", Family::BabuskaAziz),
        ("babuska_aziz", Family::BabuskaAziz),
        ("band", Family::SingleBand),
        ("subdivided", Family::SubdividedBand),
        ("cluster", Family::Cluster),
    ] {
        assert_eq!(name.parse::<Family>().unwrap(), family);
    }
    assert!("hexagonal".parse::<Family>().is_err());
}

#[test]
fn json_round_trip_keeps_non_finite_entries() {
    let res = run_study(&StudyConfig::with_ns(Family::SingleBand, &[8, 16], 3.0)).unwrap();
    assert!(res.levels[0].rate_running.is_nan());
    let json = serde_json::to_string(&res).unwrap();
    let back: StudyResult = serde_json::from_str(&json).unwrap();
    assert_eq!(back.to_csv(), res.to_csv());
    assert!(back.levels[0].rate_running.is_nan());
    assert_eq!(back.levels[1].necessary, res.levels[1].necessary);
}

#[test]
fn csv_layout() {
    let res = run_study(&StudyConfig::with_ns(Family::Uniform, &[4, 8], 1.0)).unwrap();
    let csv = res.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), CSV_HEADER.split(',').count());
        let h: f64 = cells[0].parse().unwrap();
        assert!(h == 0.25 || h == 0.125);
    }
}
