use phasefield_lab::report::{records_csv, records_json};
use phasefield_lab::{emit_report, ReportFormat, SweepRecord};

fn record(k: f64, epsilon: f64, energy: f64, oscillations: usize) -> SweepRecord {
    SweepRecord {
        k,
        epsilon,
        total_energy: energy,
        potential_term: 0.1 + energy.abs(),
        gradient_term: 1.0 / 3.0,
        curvature_term: 2e-17,
        transitions: 1,
        oscillations,
        converged: true,
        minimizer: None,
    }
}

#[test]
fn csv_has_declared_columns() {
    let csv = records_csv(&[record(0.05, 0.02, 0.7, 0)]).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "k,epsilon,total_energy,potential_term,gradient_term,curvature_term,transitions,oscillations,converged"
    );
    assert_eq!(lines.count(), 1);
}

#[test]
fn json_round_trips_bit_exactly() {
    let recs = vec![
        record(0.05, 0.02, 0.699_914_777_930_332, 0),
        record(1.2, 0.02, -23.621_845_638_767_64, 12),
    ];
    let back: Vec<SweepRecord> = serde_json::from_str(&records_json(&recs).unwrap()).unwrap();
    for (a, b) in recs.iter().zip(&back) {
        assert_eq!(a.total_energy.to_bits(), b.total_energy.to_bits());
        assert_eq!(a.gradient_term.to_bits(), b.gradient_term.to_bits());
        assert_eq!(a.curvature_term.to_bits(), b.curvature_term.to_bits());
    }
}

#[test]
fn svg_is_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let recs = vec![
        record(0.05, 0.05, 0.7, 0),
        record(0.05, 0.02, 0.69, 0),
        record(1.2, 0.05, -15.0, 4),
        record(1.2, 0.02, -23.0, 12),
    ];
    let path = emit_report(&recs, ReportFormat::Svg, dir.path(), "grid").unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let single = emit_report(&recs[..1], ReportFormat::Svg, dir.path(), "single").unwrap();
    roxmltree::Document::parse(&std::fs::read_to_string(single).unwrap()).unwrap();
}

#[test]
fn empty_and_unwritable_reports_fail() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_report(&[], ReportFormat::Csv, dir.path(), "x").is_err());
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    assert!(emit_report(
        &[record(0.0, 0.1, 1.0, 0)],
        ReportFormat::Csv,
        &blocker.join("sub"),
        "x"
    )
    .is_err());
}
