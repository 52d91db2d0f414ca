use std::fs;

use mhd_core::estimates::CalibrationStore;
use mhd_verify::report::{write_summary, SUMMARY_COLUMNS};
use mhd_verify::scenarios::{scenario, Amplitude, SCENARIO_IDS};
use mhd_verify::{run_experiment, ExperimentParams, ExperimentReport, Sense};
use proptest::prelude::*;
use tempfile::TempDir;

fn amplitude() -> impl Strategy<Value = Amplitude> {
    prop_oneof![
        (-2.0f64..2.0).prop_map(Amplitude::Constant),
        (-2.0f64..2.0, 0.1f64..3.0).prop_map(|(amplitude, frequency)| Amplitude::Sine {
            amplitude,
            frequency
        }),
        (-2.0f64..2.0, 0.1f64..10.0)
            .prop_map(|(amplitude, rate)| Amplitude::Ramp { amplitude, rate }),
        (-1.0f64..1.0, -1.0f64..1.0, 0.1f64..3.0).prop_map(|(mean, amplitude, frequency)| {
            Amplitude::Pulsed {
                mean,
                amplitude,
                frequency,
            }
        }),
    ]
}

proptest! {
    #[test]
    fn pass_iff_margin_nonpositive(measured in -1e3f64..1e3, tol in -1e3f64..1e3, upper in any::<bool>()) {
        let mut r = ExperimentReport::new("x", "inputs");
        let sense = if upper { Sense::AtMost } else { Sense::AtLeast };
        let ok = r.check("a", "ref", measured, tol, sense);
        let a = &r.assertions[0];
        prop_assert_eq!(ok, a.pass);
        prop_assert_eq!(a.pass, a.margin <= 0.0);
        prop_assert_eq!(a.pass, if upper { measured <= tol } else { measured >= tol });
    }

    #[test]
    fn non_finite_measurements_fail(tol in -1e3f64..1e3) {
        let mut r = ExperimentReport::new("x", "inputs");
        prop_assert!(!r.at_most("nan", "ref", f64::NAN, tol));
        prop_assert!(!r.at_least("inf", "ref", f64::INFINITY, tol) || tol.is_finite());
        prop_assert!(!r.passed());
    }

    #[test]
    fn amplitude_derivative_matches_differences(a in amplitude(), t in 0.0f64..2.0) {
        let h = 1e-5;
        let fd = (a.eval(t + h) - a.eval(t - h)) / (2.0 * h);
        prop_assert!((fd - a.derivative(t)).abs() <= 1e-5 * (1.0 + fd.abs()));
    }
}

#[test]
fn summary_has_one_row_per_assertion() {
    let mut a = ExperimentReport::new("first", "p=1");
    a.at_most("small", "ref", 0.5, 1.0);
    a.at_least("big", "ref", 0.5, 1.0);
    let mut b = ExperimentReport::new("second", "p=2");
    b.holds("flag", "ref", true);
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("summary.csv");
    write_summary(&[a.clone(), b], &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_COLUMNS.join(","));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("first,big,") && rows[1].ends_with(",false"));

    a.write(dir.path()).unwrap();
    let own = fs::read_to_string(dir.path().join("first.csv")).unwrap();
    assert!(own.starts_with(&format!("# inputs_digest={}\n", a.inputs_digest)));
    assert!(!dir.path().join("first.csv.tmp").exists());
}

#[test]
fn registered_scenarios_build_at_small_resolution() {
    for id in SCENARIO_IDS {
        let sc = scenario(id, 8, 0.01, 0.02).unwrap();
        assert_eq!(sc.id, id);
        assert!(sc.u0.is_finite() && sc.b0.is_finite());
    }
    assert!(scenario("nope", 8, 0.01, 0.02).is_err());
}

#[test]
fn experiment_reports_repeat_exactly() {
    let mut p = ExperimentParams::default();
    p.brezis_gallouet.fields = 10;
    p.brezis_gallouet.resolutions = vec![16, 24];
    let store = CalibrationStore::default();
    let a = run_experiment("brezis_gallouet", &p, &store).unwrap();
    let b = run_experiment("brezis_gallouet", &p, &store).unwrap();
    assert_eq!(a.assertions_csv().unwrap(), b.assertions_csv().unwrap());
    assert_eq!(a.inputs_digest, b.inputs_digest);
    p.brezis_gallouet.seed += 1;
    let c = run_experiment("brezis_gallouet", &p, &store).unwrap();
    assert_ne!(a.inputs_digest, c.inputs_digest);
}

#[test]
fn calibrated_experiments_require_their_constants() {
    let p = ExperimentParams::default();
    assert!(run_experiment("gronwall", &p, &CalibrationStore::default()).is_err());
}
