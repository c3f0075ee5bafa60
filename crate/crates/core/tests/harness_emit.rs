use std::f64::consts::FRAC_PI_2;

use quick_xml::events::Event;
use quick_xml::Reader;
use robin_tunneling::harness::{emit, run_sweep, to_csv, Format, Manifest, RunConfig, CSV_HEADER};

fn small_config(dir: &std::path::Path) -> RunConfig {
    let mut cfg = RunConfig::new(FRAC_PI_2, 1.0, vec![1.5, 1.75, 2.0], vec![2, 3, 4]);
    cfg.truncation_tol = 1e-4;
    cfg.outputs = dir.to_path_buf();
    cfg
}

/// Element names in document order; panics on malformed XML.
fn xml_elements(text: &str) -> Vec<String> {
    let mut reader = Reader::from_str(text);
    let mut names = Vec::new();
    let mut depth = 0i32;
    loop {
        match reader.read_event().expect("well-formed XML") {
            Event::Start(e) => {
                depth += 1;
                names.push(e.name().into_inner().to_string());
            }
            Event::Empty(e) => names.push(e.name().into_inner().to_string()),
            Event::End(_) => depth -= 1,
            Event::Eof => break,
            _ => {}
        }
    }
    assert_eq!(depth, 0);
    names
}

#[test]
fn emitted_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let manifest = run_sweep(&cfg).unwrap();
    assert!(manifest.failures().is_empty(), "{:?}", manifest.failures());
    let files = emit(&manifest, dir.path(), &[Format::Csv, Format::Json, Format::Svg]).unwrap();
    assert_eq!(files.len(), 3);

    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 1 + 3 * 3);

    let svg = std::fs::read_to_string(dir.path().join("splitting.svg")).unwrap();
    let names = xml_elements(&svg);
    assert_eq!(names[0], "svg");
    // FEM, leading order, quasimode and 1D
    assert_eq!(names.iter().filter(|n| *n == "polyline").count(), 4);

    let json = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let back: Manifest = serde_json::from_str(&json).unwrap();
    assert_eq!(back.config, cfg);
    assert_eq!(back.config_hash, cfg.hash());
    let rerun = run_sweep(&back.config).unwrap();
    assert_eq!(to_csv(&rerun.rows), csv);
}

#[test]
fn config_file_round_trip_and_empty_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, cfg.to_text()).unwrap();
    assert_eq!(RunConfig::from_file(&path).unwrap(), cfg);

    let mut empty = cfg.clone();
    empty.l_values.clear();
    let m = run_sweep(&empty).unwrap();
    assert!(m.rows.is_empty());
    assert_eq!(to_csv(&m.rows).trim_end(), CSV_HEADER);
}
