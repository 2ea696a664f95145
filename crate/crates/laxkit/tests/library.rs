use laxkit::cm::{self, CmParams, TRUNCATION_MARKER};
use laxkit::config::{required, resolve_seed, FileConfig};
use laxkit::involution::validate_powers;
use laxkit::report::{Check, Report};
use laxkit::{case_rng, exit_code_for, parse_complex, parse_powers, simulation_lattice, LaxkitError};
use laxkit_core::calogero::CmFamily;
use laxkit_core::elliptic::C;
use rand::Rng;
use serde_json::json;

#[test]
fn complex_and_power_arguments() {
    assert_eq!(parse_complex("0.3,1.2").unwrap(), C::new(0.3, 1.2));
    assert_eq!(parse_complex(" 2 ").unwrap(), C::new(2.0, 0.0));
    assert_eq!(parse_complex("i").unwrap(), C::new(0.0, 1.0));
    assert!(matches!(parse_complex("1+i"), Err(LaxkitError::Usage(_))));
    assert_eq!(parse_powers("2,3,4").unwrap(), vec![2, 3, 4]);
    assert_eq!(parse_powers("2..5").unwrap(), vec![2, 3, 4, 5]);
    assert!(parse_powers("2..x").is_err());
    assert!(parse_powers("4..2").unwrap().is_empty());
}

#[test]
fn power_validation() {
    assert!(validate_powers(CmFamily::A, &[2, 3, 4]).is_ok());
    assert!(validate_powers(CmFamily::D, &[2, 4]).is_ok());
    assert!(validate_powers(CmFamily::C, &[2, 3]).is_err());
    assert!(validate_powers(CmFamily::A, &[]).is_err());
    assert!(validate_powers(CmFamily::A, &[0, 2]).is_err());
    assert!(validate_powers(CmFamily::A, &[2, 2]).is_err());
}

#[test]
fn lattice_arguments() {
    assert!(simulation_lattice(2.0, C::new(0.3, 1.2)).is_ok());
    assert!(simulation_lattice(-1.0, C::new(0.0, 1.0)).is_err());
    assert!(simulation_lattice(f64::NAN, C::new(0.0, 1.0)).is_err());
    assert!(simulation_lattice(1.0, C::new(0.5, -1.0)).is_err());
}

#[test]
fn case_streams_are_independent_and_reproducible() {
    let draw = |seed, idx| case_rng(seed, idx).gen::<u64>();
    assert_eq!(draw(5, 0), draw(5, 0));
    assert_ne!(draw(5, 0), draw(5, 1));
    assert_ne!(draw(5, 0), draw(6, 0));
}

#[test]
fn checks_and_reports() {
    assert!(Check::below("x", 1e-12, 1e-9, 1).passed);
    assert!(!Check::below("x", 1e-3, 1e-9, 1).passed);
    assert!(!Check::below("x", f64::NAN, 1e-9, 1).passed);
    let r = Report::new("verify", 9, vec![Check::new("a", true, 2), Check::new("b", false, 1)]).with("suite", json!("dims"));
    assert!(!r.passed);
    assert_eq!(r.failed_checks().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["b"]);
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["suite"], "dims");
    assert_eq!(v["checks"][0]["count"], 2);
    assert!(v["checks"][0].get("measured").is_none());
    assert_eq!((exit_code_for(true), exit_code_for(false)), (0, 1));
    assert_eq!(LaxkitError::Usage("x".into()).exit_code(), 2);
    assert_eq!(LaxkitError::Runtime("x".into()).exit_code(), 3);
}

#[test]
fn config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"seed": 4, "T": 2.5, "tau": [0.3, 1.2], "powers": [2, 4]}"#).unwrap();
    let c = FileConfig::load(&p).unwrap();
    assert_eq!((c.seed, c.t, c.tau, c.powers.clone()), (Some(4), Some(2.5), Some([0.3, 1.2]), Some(vec![2, 4])));
    assert_eq!(resolve_seed(Some(1), c.seed).unwrap(), 1);
    assert_eq!(resolve_seed(None, c.seed).unwrap(), 4);
    assert_eq!(required(None, Some(3), "n").unwrap(), 3);
    assert!(matches!(required::<u32>(None, None, "n"), Err(LaxkitError::Usage(_))));
    std::fs::write(&p, "{not json").unwrap();
    assert!(matches!(FileConfig::load(&p), Err(LaxkitError::Usage(_))));
}

#[test]
fn truncated_csv_ends_with_marker() {
    let mut p = CmParams::new(CmFamily::A, 2);
    p.t_end = 0.05;
    p.dt = 0.01;
    p.sample_every = 1;
    let mut run = cm::simulate(&p).unwrap();
    assert_eq!(run.samples.len(), 6);
    run.trajectory.abort = Some(laxkit_core::Error::Collision("q_i = q_j"));
    let mut buf = Vec::new();
    cm::write_csv(&run, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let last = text.lines().last().unwrap();
    assert!(last.starts_with(TRUNCATION_MARKER), "{last}");
    assert_eq!(text.lines().count(), 1 + 6 + 1);
    let header = cm::csv_header(&run);
    assert_eq!(header.len(), 1 + 2 + 2 + 1 + 3 * 3 * 2);
    assert!(header.contains(&"inv_p3_z2_im".to_string()));
}

#[test]
fn conservation_report_fields() {
    let mut p = CmParams::new(CmFamily::D, 2);
    p.t_end = 0.5;
    p.seed = 3;
    let run = cm::simulate(&p).unwrap();
    let v: serde_json::Value = serde_json::from_str(&run.report.to_json()).unwrap();
    for key in ["family", "n", "dt", "T", "scheme", "tau", "omega1", "z0", "initial_state", "max_H_drift", "max_spec_drift", "bracket_table"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["bracket_table"].as_array().unwrap().len(), 1);
    assert!(run.report.passed, "{}", run.report.to_json());
    assert_eq!(cm::invariant_powers(CmFamily::A), vec![2, 3, 4]);
    assert_eq!(cm::invariant_powers(CmFamily::C), vec![2, 4]);
}
