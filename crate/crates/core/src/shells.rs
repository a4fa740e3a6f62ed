//! Closed-shell electron configurations.
//!
//! Shell n holds 2 n^2 electrons, so the admissible electron counts are the
//! cumulative sums 2, 10, 28, 60, 110, ...  Only these are accepted: the
//! tabulated potential sums below assume every (n, l) subshell filled.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subshell {
    pub n: u32,
    pub l: u32,
    /// 2 (2 l + 1) electrons when filled.
    pub occupancy: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellConfig {
    pub electron_count: u32,
    pub n_max: u32,
    pub subshells: Vec<Subshell>,
}

fn shell_capacity_through(n: u32) -> u32 {
    // 2 (1^2 + 2^2 + ... + n^2)
    n * (n + 1) * (2 * n + 1) / 3
}

/// Resolve an electron count into filled shells, rejecting open-shell counts.
pub fn closed_shell_config(electron_count: u32) -> Result<ShellConfig> {
    if electron_count == 0 {
        return Err(Error::InvalidInput {
            detail: "electron count must be positive".into(),
        });
    }
    let mut n = 1;
    while shell_capacity_through(n) < electron_count {
        n += 1;
    }
    if shell_capacity_through(n) != electron_count {
        return Err(Error::NotClosedShell {
            z: electron_count,
            below: shell_capacity_through(n - 1),
            above: shell_capacity_through(n),
        });
    }
    let mut subshells = Vec::new();
    for shell in 1..=n {
        for l in 0..shell {
            subshells.push(Subshell {
                n: shell,
                l,
                occupancy: 2 * (2 * l + 1),
            });
        }
    }
    Ok(ShellConfig {
        electron_count,
        n_max: n,
        subshells,
    })
}
