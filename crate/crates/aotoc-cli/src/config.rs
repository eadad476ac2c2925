//! Flat `key = value` sweep configs with `#` comments.

use aotoc_core::circuit::{EnsembleKind, DEFAULT_MAX_DENSE_L};
use aotoc_core::sweep::{NoiseFamily, SweepConfig, SweepMode};
use aotoc_core::Error;
use std::collections::BTreeMap;

pub fn max_dense_l_from_env() -> usize {
    std::env::var("AOTOC_MAX_L")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_MAX_DENSE_L)
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig, Error> {
    let mut kv: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got '{}'", lineno + 1, line.trim()))
        })?;
        kv.insert(key.trim().to_string(), (value.trim().to_string(), lineno + 1));
    }

    let get = |key: &str| kv.get(key).map(|(v, _)| v.as_str());
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    };
    fn parse<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T, Error> {
        v.parse::<T>()
            .map_err(|_| Error::Config(format!("line {line}: cannot parse {key} = '{v}'")))
    }
    let parse_num = |key: &str| -> Result<f64, Error> {
        let (v, line) = kv.get(key).unwrap();
        parse::<f64>(key, v, *line)
    };
    let parse_list = |v: &str, key: &str| -> Result<Vec<f64>, Error> {
        v.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number '{}' in {key}", tok.trim())))
            })
            .collect()
    };

    let family = match require("family")? {
        "depolarizing" => NoiseFamily::Depolarizing,
        "rotation" => NoiseFamily::Rotation,
        other => return Err(Error::Config(format!("unknown family '{other}'"))),
    };

    let ensemble = match require("ensemble")? {
        "global-haar" => EnsembleKind::GlobalHaar,
        "brickwork-haar" => EnsembleKind::BrickworkHaar,
        "brickwork-clifford" => EnsembleKind::BrickworkClifford,
        "brickwork-dual-unitary" => {
            let j = if kv.contains_key("j") { parse_num("j")? } else { 0.0 };
            EnsembleKind::BrickworkDualUnitary { j }
        }
        other => return Err(Error::Config(format!("unknown ensemble '{other}'"))),
    };

    let mode_key = get("mode").unwrap_or("noise");
    let mode = match mode_key {
        "noise" => {
            let params = if let Some(p) = get("params") {
                parse_list(p, "params")?
            } else {
                let lo = parse_num("param_min")
                    .map_err(|_| Error::Config("need `params` or `param_min`/`param_max`/`n_points`".into()))?;
                let hi = parse_num("param_max")?;
                let n = parse_num("n_points")? as usize;
                if n < 2 {
                    return Err(Error::Config("n_points must be >= 2".into()));
                }
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            };
            SweepMode::Noise { params }
        }
        "ep-deviation" => {
            let j_values = parse_list(require("j_values")?, "j_values")?;
            let param = if kv.contains_key("fixed_param") { Some(parse_num("fixed_param")?) } else { None };
            SweepMode::EpDeviation { j_values, param }
        }
        other => return Err(Error::Config(format!("unknown mode '{other}'"))),
    };

    let req_usize = |key: &str| -> Result<usize, Error> {
        let (v, line) = kv
            .get(key)
            .ok_or_else(|| Error::Config(format!("missing required key '{key}'")))?;
        parse::<usize>(key, v, *line)
    };

    let cfg = SweepConfig {
        ensemble,
        l: req_usize("L")?,
        k: req_usize("k")?,
        depth: if kv.contains_key("depth") { Some(req_usize("depth")?) } else { None },
        family,
        mode,
        n_circuits: req_usize("n_circuits")?,
        n_states: req_usize("n_states")?,
        seed: req_usize("seed")? as u64,
        max_l: max_dense_l_from_env(),
        output: get("output").map(str::to_string),
    };
    cfg.validate()?;
    Ok(cfg)
}
