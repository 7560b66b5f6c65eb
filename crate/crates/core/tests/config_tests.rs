//! Config-format contract: dotted keys, defaults, overrides, and errors
//! naming key and line.

use cnse_core::config::{parse_config_str, parse_with_overrides};
use cnse_core::nonlinear::FormKind;
use cnse_core::timestepper::{DtSpec, ForcingSpec, InitialSpec};
use cnse_core::CalmingKind;
use cnse_core::Error;
use std::io::Write;

#[test]
fn full_config_parses() {
    let text = "\
# demo config
grid.n = 32
grid.dims = 3
nu = 0.5
form = advective
calming.kind = smooth_trunc
calming.epsilon = 0.25
t_end = 2.0
dt = 0.001
cfl = 0.5
save_every = 0.1
m_cutoff = 64.0
forcing.kind = single_mode
forcing.k = 1,0,0
forcing.amplitude = 0.0,0.5,0.0
initial.kind = random_band
initial.k_min = 1
initial.k_max = 2.5
initial.energy = 1.5
seed = 42
ladder = 0.2, 0.1, 0.05, 0.025
out.csv = traj.csv
out.checkpoint = final.bin
";
    let spec = parse_config_str(text).unwrap();
    let s = &spec.solver;
    assert_eq!(s.grid.n(), 32);
    assert_eq!(s.grid.dims(), 3);
    assert_eq!(s.nu, 0.5);
    assert_eq!(s.nonlinear.form, FormKind::Advective);
    let z = s.nonlinear.calming.unwrap();
    assert_eq!(z.kind(), CalmingKind::SmoothTruncation);
    assert_eq!(z.epsilon(), 0.25);
    assert_eq!(s.dt, DtSpec::Fixed(0.001));
    assert_eq!(s.m_cutoff, Some(64.0));
    assert!(matches!(s.forcing, ForcingSpec::SingleMode { k: [1, 0, 0], .. }));
    assert!(matches!(s.initial, InitialSpec::RandomBand { seed: 42, .. }));
    assert_eq!(spec.ladder.as_deref(), Some(&[0.2, 0.1, 0.05, 0.025][..]));
    assert_eq!(spec.seed, Some(42));
    assert_eq!(spec.out_csv.as_deref().unwrap().to_str().unwrap(), "traj.csv");
}

#[test]
fn defaults_give_a_runnable_config() {
    let spec = parse_config_str("").unwrap();
    assert_eq!(spec.solver.grid.n(), 32);
    assert_eq!(spec.solver.nonlinear.form, FormKind::Rotational);
    assert!(spec.solver.nonlinear.calming.is_some());
    assert_eq!(spec.solver.dt, DtSpec::Auto);
}

#[test]
fn calming_none_means_identity() {
    let spec = parse_config_str("calming.kind = none\n").unwrap();
    assert!(spec.solver.nonlinear.calming.is_none());
}

#[test]
fn errors_cite_key_and_line() {
    let err = parse_config_str("nu = 0.5\ngrid.n = -4\n").unwrap_err();
    match err {
        Error::Config { line, ref key, .. } => {
            assert_eq!(line, 2);
            assert_eq!(key, "grid.n");
        }
        other => panic!("unexpected error {other:?}"),
    }

    let err = parse_config_str("grid.m = 16\n").unwrap_err();
    match err {
        Error::Config { line, ref key, ref message } => {
            assert_eq!(line, 1);
            assert_eq!(key, "grid.m");
            assert!(message.contains("unknown"));
        }
        other => panic!("unexpected error {other:?}"),
    }

    // odd n rejected through validation
    assert!(parse_config_str("grid.n = 17\n").is_err());
    // nonpositive epsilon rejected
    assert!(parse_config_str("calming.epsilon = 0\n").is_err());
    // increasing ladder rejected
    assert!(parse_config_str("ladder = 0.1, 0.2\n").is_err());
    // random initial data without a seed rejected
    let err = parse_config_str("initial.kind = random_band\n").unwrap_err();
    match err {
        Error::Config { ref key, .. } => assert_eq!(key, "seed"),
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn overrides_take_precedence() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "nu = 0.5\ngrid.n = 16\ngrid.dims = 2").unwrap();
    let spec = parse_with_overrides(
        Some(file.path()),
        &["nu=1.25".to_string(), "form=advective".to_string()],
    )
    .unwrap();
    assert_eq!(spec.solver.nu, 1.25);
    assert_eq!(spec.solver.grid.n(), 16);
    assert_eq!(spec.solver.nonlinear.form, FormKind::Advective);

    // bad override cites line 0
    let err = parse_with_overrides(Some(file.path()), &["grid.n=-4".to_string()]).unwrap_err();
    match err {
        Error::Config { line, ref key, .. } => {
            assert_eq!(line, 0);
            assert_eq!(key, "grid.n");
        }
        other => panic!("unexpected error {other:?}"),
    }
}
