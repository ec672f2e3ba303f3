//! Flat key-value configuration files for the `equivalence` subcommand.
//! Lines are `key = value`; `#` starts a comment. Keys mirror the norm
//! command's flags plus the family and sampling controls.

use std::collections::BTreeMap;
use std::path::Path;

use varspace::family::Family;
use varspace::harness::{ExperimentConfig, SpaceSpec};
use varspace::{Error, Flavor, Grid, Result, SmoothnessFunction, VariableExponent};

use crate::expr::parse_expression;

const KNOWN_KEYS: &[&str] = &[
    "label", "flavor", "family", "gamma", "beta", "x0", "width", "level", "decay", "s", "weights",
    "p", "q", "M", "J", "a", "k_lo", "k_hi", "n", "dim", "period", "samples", "seed",
    "ratio_bound",
];

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("config line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "config line {}: unknown key '{key}'",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|e| Error::InvalidConfig(format!("key '{key}': {e}"))),
    }
}

fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<u64>()
            .map(Some)
            .map_err(|e| Error::InvalidConfig(format!("key '{key}': {e}"))),
    }
}

fn get_i32(map: &BTreeMap<String, String>, key: &str) -> Result<Option<i32>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<i32>()
            .map(Some)
            .map_err(|e| Error::InvalidConfig(format!("key '{key}': {e}"))),
    }
}

/// Sample values for an exponent argument: either an expression in the
/// mini-language or `@path.csv` loading a sampled array on the same grid.
fn samples_from_arg(text: &str, grid: Grid, what: &str) -> Result<Vec<f64>> {
    if let Some(path) = text.strip_prefix('@') {
        let f = varspace::grid::read_csv_with_period(Path::new(path), grid.period())?;
        if f.grid() != &grid {
            return Err(Error::InvalidConfig(format!(
                "{what}: sampled array in {path} does not match the input grid"
            )));
        }
        if f.values().iter().any(|v| v.im != 0.0) {
            return Err(Error::InvalidConfig(format!("{what}: exponent samples must be real")));
        }
        return Ok(f.values().iter().map(|v| v.re).collect());
    }
    let expr = parse_expression(text)
        .map_err(|e| Error::InvalidConfig(format!("{what} expression: {e}")))?;
    expr.evaluate_on_grid(&grid)
        .map_err(|e| Error::InvalidConfig(format!("{what} expression: {e}")))
}

/// Evaluate an exponent argument on a grid into a `VariableExponent`.
pub fn exponent_from_expr(text: &str, grid: Grid, what: &str) -> Result<VariableExponent> {
    let samples = samples_from_arg(text, grid, what)?;
    VariableExponent::new(grid, samples)
        .map_err(|e| Error::InvalidConfig(format!("{what} expression: {e}")))
}

/// Evaluate a smoothness argument on a grid.
pub fn smoothness_from_expr(text: &str, grid: Grid) -> Result<SmoothnessFunction> {
    let samples = samples_from_arg(text, grid, "--s")?;
    SmoothnessFunction::new(grid, samples)
        .map_err(|e| Error::InvalidConfig(format!("--s expression: {e}")))
}

/// Parse the `2ml:<s>,<s'>,<x0>` weight specification.
pub fn parse_weight_spec(text: &str) -> Result<(f64, f64, f64)> {
    let rest = text
        .strip_prefix("2ml:")
        .ok_or_else(|| Error::InvalidConfig("--weights must look like 2ml:<s>,<s'>,<x0>".into()))?;
    let parts: Vec<&str> = rest.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidConfig("--weights needs exactly three values".into()));
    }
    let mut vals = [0.0f64; 3];
    for (i, p) in parts.iter().enumerate() {
        vals[i] = p
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::InvalidConfig(format!("--weights value '{p}': {e}")))?;
    }
    Ok((vals[0], vals[1], vals[2]))
}

/// Build an `ExperimentConfig` from a config file.
pub fn experiment_from_file(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let map = parse_config_text(&text)?;

    let dim = get_u64(&map, "dim")?.unwrap_or(1) as usize;
    let n = get_u64(&map, "n")?
        .ok_or_else(|| Error::InvalidConfig("config needs key 'n'".into()))? as usize;
    let period = get_f64(&map, "period")?.unwrap_or(2.0 * std::f64::consts::PI);
    let grid = Grid::new(dim, n, period)?;

    let flavor: Flavor = map
        .get("flavor")
        .ok_or_else(|| Error::InvalidConfig("config needs key 'flavor'".into()))?
        .parse()?;

    let j_levels = match get_u64(&map, "J")? {
        Some(j) => j as usize,
        None => varspace::frequency::default_top_level(&grid),
    };

    let space = match (map.get("s"), map.get("weights")) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidConfig("give either 's' or 'weights', not both".into()))
        }
        (Some(s_text), None) => SpaceSpec::Smoothness(smoothness_from_expr(s_text, grid)?),
        (None, Some(w_text)) => {
            let (s, sprime, x0) = parse_weight_spec(w_text)?;
            SpaceSpec::TwoMicrolocal { s, sprime, x0: [x0, x0] }
        }
        (None, None) => {
            return Err(Error::InvalidConfig("config needs 's' or 'weights'".into()))
        }
    };

    let p = exponent_from_expr(
        map.get("p").ok_or_else(|| Error::InvalidConfig("config needs key 'p'".into()))?,
        grid,
        "p",
    )?;
    let q = exponent_from_expr(
        map.get("q").ok_or_else(|| Error::InvalidConfig("config needs key 'q'".into()))?,
        grid,
        "q",
    )?;
    if flavor == Flavor::TriebelLizorkin && (p.has_infinity() || q.has_infinity()) {
        return Err(Error::InvalidConfig(
            "the tl flavor requires finite p and q everywhere".into(),
        ));
    }

    let family = match map.get("family").map(|s| s.as_str()) {
        None | Some("band_limited_random") => Family::BandLimitedRandom {
            level: get_u64(&map, "level")?.map(|v| v as usize).unwrap_or(j_levels),
            decay: get_f64(&map, "decay")?.unwrap_or(1.5),
        },
        Some("gaussian_bump") => {
            Family::GaussianBump { width: get_f64(&map, "width")?.unwrap_or(period / 16.0) }
        }
        Some("cusp") => Family::Cusp {
            gamma: get_f64(&map, "gamma")?
                .ok_or_else(|| Error::InvalidConfig("cusp family needs 'gamma'".into()))?,
            x0: {
                let x0 = get_f64(&map, "x0")?.unwrap_or(period / 2.0);
                [x0, x0]
            },
        },
        Some("chirp") => Family::Chirp {
            gamma: get_f64(&map, "gamma")?
                .ok_or_else(|| Error::InvalidConfig("chirp family needs 'gamma'".into()))?,
            beta: get_f64(&map, "beta")?
                .ok_or_else(|| Error::InvalidConfig("chirp family needs 'beta'".into()))?,
            x0: {
                let x0 = get_f64(&map, "x0")?.unwrap_or(period / 2.0);
                [x0, x0]
            },
        },
        Some("zero") => Family::Zero,
        Some(other) => {
            return Err(Error::InvalidConfig(format!("unknown family '{other}'")));
        }
    };

    let a = match map.get("a").map(|s| s.as_str()) {
        None | Some("auto") => None,
        Some(v) => Some(
            v.parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("key 'a': {e}")))?,
        ),
    };

    let k_range = match (get_i32(&map, "k_lo")?, get_i32(&map, "k_hi")?) {
        (None, None) => None,
        (lo, hi) => Some((
            lo.unwrap_or(-(j_levels as i32)),
            hi.unwrap_or(j_levels as i32),
        )),
    };

    Ok(ExperimentConfig {
        label: map.get("label").cloned().unwrap_or_else(|| "equivalence".into()),
        flavor,
        grid,
        space,
        p,
        q,
        m: get_u64(&map, "M")?.unwrap_or(2) as u32,
        j_levels,
        a,
        k_range,
        family,
        sample_count: get_u64(&map, "samples")?.unwrap_or(20) as usize,
        seed: get_u64(&map, "seed")?.unwrap_or(1),
        ratio_bound: get_f64(&map, "ratio_bound")?.unwrap_or(10.0),
    })
}
