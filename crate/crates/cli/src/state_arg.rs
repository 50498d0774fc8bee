//! `key=value` background-state and vector arguments.

use abi_core::ConstantState;
use anyhow::{bail, Context, Result};

/// `x,y,z`, or a single number repeated on all three axes.
pub fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().with_context(|| format!("bad number {p:?} in {s:?}")))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [x] => Ok([*x; 3]),
        [x, y, z] => Ok([*x, *y, *z]),
        _ => bail!("expected 1 or 3 comma-separated numbers, got {s:?}"),
    }
}

/// Items `tau0=..`, `v0=..`, `b0=..`, `d0=..` applied on top of the
/// isotropic state with `tau0 = 1`.
pub fn parse_state(items: &[String]) -> Result<ConstantState> {
    let mut s = ConstantState::isotropic(1.0);
    for item in items {
        let (k, v) = item.split_once('=').with_context(|| format!("state item {item:?} is not key=value"))?;
        match k.trim() {
            "tau0" => s.tau0 = v.trim().parse().with_context(|| format!("bad tau0 {v:?}"))?,
            "v0" => s.v0 = parse_vec3(v)?,
            "b0" => s.b0 = parse_vec3(v)?,
            "d0" => s.d0 = parse_vec3(v)?,
            other => bail!("unknown state key {other:?} (expected tau0, v0, b0, d0)"),
        }
    }
    s.validate()?;
    Ok(s)
}
