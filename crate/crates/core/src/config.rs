//! `key = value` configuration files with `#` comments.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("config line {}: expected key = value", idx + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::invalid(format!("config line {}: empty key", idx + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::invalid(format!(
                "config line {}: duplicate key {key:?}",
                idx + 1
            )));
        }
    }
    Ok(out)
}

/// Parses `5,10,20` or a range `start:stop:step` (inclusive stop), or a mix
/// of both separated by commas.
pub fn parse_k_grid(s: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let nums: Vec<&str> = part.split(':').collect();
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("invalid k value {t:?}")))
        };
        match nums.as_slice() {
            [single] => out.push(parse(single)?),
            [start, stop, step] => {
                let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
                if step == 0 {
                    return Err(Error::invalid("k grid step must be positive"));
                }
                out.extend((start..=stop).step_by(step));
            }
            _ => return Err(Error::invalid(format!("invalid k grid element {part:?}"))),
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("empty k grid"));
    }
    if out.contains(&0) {
        return Err(Error::invalid("k values must be positive"));
    }
    Ok(out)
}

pub fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(Error::invalid(format!("not a boolean: {other:?}"))),
    }
}
