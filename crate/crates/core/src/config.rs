//! Flat key-value config files with dotted keys.
//!
//! One `key = value` pair per line; `#` starts a comment. Unknown keys are
//! rejected, and every error cites the offending key and line. CLI overrides
//! reuse the same key names (reported as line 0).

use crate::calming::{CalmingFunction, CalmingKind};
use crate::error::{Error, Result};
use crate::nonlinear::{FormKind, NonlinearForm};
use crate::spectral::Grid;
use crate::timestepper::{DtSpec, ForcingSpec, InitialSpec, SolverConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

/// A parsed config: the solver setup plus harness-level extras.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub solver: SolverConfig,
    pub out_csv: Option<PathBuf>,
    pub out_checkpoint: Option<PathBuf>,
    /// epsilon ladder for the converge/cauchy experiments
    pub ladder: Option<Vec<f64>>,
    pub seed: Option<u64>,
}

const KNOWN_KEYS: &[&str] = &[
    "grid.n",
    "grid.dims",
    "nu",
    "form",
    "calming.kind",
    "calming.epsilon",
    "t_end",
    "dt",
    "cfl",
    "save_every",
    "m_cutoff",
    "forcing.kind",
    "forcing.k",
    "forcing.amplitude",
    "forcing.path",
    "initial.kind",
    "initial.amplitude",
    "initial.k_min",
    "initial.k_max",
    "initial.energy",
    "initial.path",
    "seed",
    "ladder",
    "out.csv",
    "out.checkpoint",
];

struct Entry {
    value: String,
    line: usize,
}

pub fn parse_config_str(text: &str) -> Result<RunSpec> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let stripped = stripped.trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Config {
            line,
            key: stripped.to_string(),
            message: "expected `key = value`".into(),
        })?;
        insert_pair(&mut map, key.trim(), value.trim(), line)?;
    }
    build_spec(&map)
}

pub fn parse_config_file(path: &std::path::Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text)
}

/// Parses a config file (when given) and applies `key=value` overrides.
pub fn parse_with_overrides(path: Option<&std::path::Path>, overrides: &[String]) -> Result<RunSpec> {
    let mut map = BTreeMap::new();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let stripped = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let stripped = stripped.trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or_else(|| Error::Config {
                line,
                key: stripped.to_string(),
                message: "expected `key = value`".into(),
            })?;
            insert_pair(&mut map, key.trim(), value.trim(), line)?;
        }
    }
    for ov in overrides {
        let (key, value) = ov.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            key: ov.clone(),
            message: "override must be key=value".into(),
        })?;
        insert_pair(&mut map, key.trim(), value.trim(), 0)?;
    }
    build_spec(&map)
}

fn insert_pair(map: &mut BTreeMap<String, Entry>, key: &str, value: &str, line: usize) -> Result<()> {
    if !KNOWN_KEYS.contains(&key) {
        return Err(Error::Config {
            line,
            key: key.to_string(),
            message: "unknown key".into(),
        });
    }
    map.insert(key.to_string(), Entry { value: value.to_string(), line });
    Ok(())
}

fn build_spec(map: &BTreeMap<String, Entry>) -> Result<RunSpec> {
    let get = |key: &str| map.get(key);
    let bad = |key: &str, entry: &Entry, msg: &str| Error::Config {
        line: entry.line,
        key: key.to_string(),
        message: format!("{msg} (got `{}`)", entry.value),
    };

    let parse_f64 = |key: &str| -> Result<Option<f64>> {
        match get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| bad(key, e, "expected a number")),
        }
    };
    let parse_usize = |key: &str| -> Result<Option<usize>> {
        match get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<usize>()
                .map(Some)
                .map_err(|_| bad(key, e, "expected a nonnegative integer")),
        }
    };

    let n = parse_usize("grid.n")?.unwrap_or(32);
    let dims = parse_usize("grid.dims")?.unwrap_or(3);
    let grid = Grid::new(n, dims).map_err(|e| Error::Config {
        line: get("grid.n").map(|e| e.line).unwrap_or(0),
        key: "grid.n".into(),
        message: e.to_string(),
    })?;

    let nu = parse_f64("nu")?.unwrap_or(0.5);

    let form = match get("form") {
        None => FormKind::Rotational,
        Some(e) => match e.value.as_str() {
            "advective" => FormKind::Advective,
            "rotational" => FormKind::Rotational,
            _ => return Err(bad("form", e, "expected advective|rotational")),
        },
    };

    let calming = match get("calming.kind").map(|e| e.value.as_str()) {
        None | Some("rational1") => Some(CalmingKind::Rational1),
        Some("rational2") => Some(CalmingKind::Rational2),
        Some("arctan") => Some(CalmingKind::Arctan),
        Some("smooth_trunc") => Some(CalmingKind::SmoothTruncation),
        Some("none") => None,
        Some(_) => {
            let e = get("calming.kind").unwrap();
            return Err(bad(
                "calming.kind",
                e,
                "expected rational1|rational2|arctan|smooth_trunc|none",
            ));
        }
    };
    let calming = match calming {
        None => None,
        Some(kind) => {
            let eps = parse_f64("calming.epsilon")?.unwrap_or(0.1);
            let f = CalmingFunction::new(kind, eps).map_err(|e| Error::Config {
                line: get("calming.epsilon").map(|e| e.line).unwrap_or(0),
                key: "calming.epsilon".into(),
                message: e.to_string(),
            })?;
            Some(f)
        }
    };

    let dt = match get("dt") {
        None => DtSpec::Auto,
        Some(e) if e.value == "auto" => DtSpec::Auto,
        Some(e) => DtSpec::Fixed(
            e.value
                .parse::<f64>()
                .map_err(|_| bad("dt", e, "expected a number or `auto`"))?,
        ),
    };

    let m_cutoff = match get("m_cutoff") {
        None => None,
        Some(e) if e.value == "none" => None,
        Some(e) => Some(
            e.value
                .parse::<f64>()
                .map_err(|_| bad("m_cutoff", e, "expected a number or `none`"))?,
        ),
    };

    let seed = match get("seed") {
        None => None,
        Some(e) => Some(
            e.value
                .parse::<u64>()
                .map_err(|_| bad("seed", e, "expected an unsigned integer"))?,
        ),
    };

    let forcing = match get("forcing.kind").map(|e| e.value.as_str()) {
        None | Some("zero") => ForcingSpec::Zero,
        Some("single_mode") => {
            let k = parse_triple_i64(map, "forcing.k")?.unwrap_or([1, 0, 0]);
            let amplitude = parse_triple_f64(map, "forcing.amplitude")?.unwrap_or([0.0, 1.0, 0.0]);
            ForcingSpec::SingleMode { k, amplitude }
        }
        Some("from_checkpoint") => {
            let e = get("forcing.path").ok_or_else(|| Error::Config {
                line: get("forcing.kind").unwrap().line,
                key: "forcing.path".into(),
                message: "required for forcing.kind = from_checkpoint".into(),
            })?;
            ForcingSpec::FromCheckpoint(PathBuf::from(&e.value))
        }
        Some(_) => {
            let e = get("forcing.kind").unwrap();
            return Err(bad("forcing.kind", e, "expected zero|single_mode|from_checkpoint"));
        }
    };

    let initial = match get("initial.kind").map(|e| e.value.as_str()) {
        None | Some("taylor_green") => InitialSpec::TaylorGreen {
            amplitude: parse_f64("initial.amplitude")?.unwrap_or(1.0),
        },
        Some("random_band") => {
            let seed = seed.ok_or_else(|| Error::Config {
                line: get("initial.kind").unwrap().line,
                key: "seed".into(),
                message: "seed is mandatory for random initial data".into(),
            })?;
            InitialSpec::RandomBand {
                k_min: parse_f64("initial.k_min")?.unwrap_or(1.0),
                k_max: parse_f64("initial.k_max")?.unwrap_or(2.0),
                energy: parse_f64("initial.energy")?.unwrap_or(1.0),
                seed,
            }
        }
        Some("from_checkpoint") => {
            let e = get("initial.path").ok_or_else(|| Error::Config {
                line: get("initial.kind").unwrap().line,
                key: "initial.path".into(),
                message: "required for initial.kind = from_checkpoint".into(),
            })?;
            InitialSpec::FromCheckpoint(PathBuf::from(&e.value))
        }
        Some(_) => {
            let e = get("initial.kind").unwrap();
            return Err(bad(
                "initial.kind",
                e,
                "expected taylor_green|random_band|from_checkpoint",
            ));
        }
    };

    let ladder = match get("ladder") {
        None => None,
        Some(e) => {
            let vals: std::result::Result<Vec<f64>, _> =
                e.value.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|_| bad("ladder", e, "expected comma-separated numbers"))?;
            if vals.windows(2).any(|w| w[1] >= w[0]) {
                return Err(bad("ladder", e, "ladder must be strictly decreasing"));
            }
            Some(vals)
        }
    };

    let mut solver = SolverConfig::new(grid, nu, NonlinearForm::new(form, calming));
    solver.t_end = parse_f64("t_end")?.unwrap_or(1.0);
    solver.dt = dt;
    solver.cfl = parse_f64("cfl")?.unwrap_or(0.4);
    solver.save_every = parse_f64("save_every")?.unwrap_or(0.05);
    solver.forcing = forcing;
    solver.initial = initial;
    solver.m_cutoff = m_cutoff;
    solver.validate().map_err(|e| Error::Config {
        line: 0,
        key: "(validation)".into(),
        message: e.to_string(),
    })?;

    Ok(RunSpec {
        solver,
        out_csv: get("out.csv").map(|e| PathBuf::from(&e.value)),
        out_checkpoint: get("out.checkpoint").map(|e| PathBuf::from(&e.value)),
        ladder,
        seed,
    })
}

fn parse_triple_i64(map: &BTreeMap<String, Entry>, key: &str) -> Result<Option<[i64; 3]>> {
    let Some(e) = map.get(key) else { return Ok(None) };
    let parts: Vec<&str> = e.value.split(',').map(|s| s.trim()).collect();
    if parts.len() != 3 {
        return Err(Error::Config {
            line: e.line,
            key: key.to_string(),
            message: format!("expected three comma-separated integers (got `{}`)", e.value),
        });
    }
    let mut out = [0i64; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.parse::<i64>().map_err(|_| Error::Config {
            line: e.line,
            key: key.to_string(),
            message: format!("expected three comma-separated integers (got `{}`)", e.value),
        })?;
    }
    Ok(Some(out))
}

fn parse_triple_f64(map: &BTreeMap<String, Entry>, key: &str) -> Result<Option<[f64; 3]>> {
    let Some(e) = map.get(key) else { return Ok(None) };
    let parts: Vec<&str> = e.value.split(',').map(|s| s.trim()).collect();
    if parts.len() != 3 {
        return Err(Error::Config {
            line: e.line,
            key: key.to_string(),
            message: format!("expected three comma-separated numbers (got `{}`)", e.value),
        });
    }
    let mut out = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p.parse::<f64>().map_err(|_| Error::Config {
            line: e.line,
            key: key.to_string(),
            message: format!("expected three comma-separated numbers (got `{}`)", e.value),
        })?;
    }
    Ok(Some(out))
}
