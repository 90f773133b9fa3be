//! Per-character lists of positive zero ordinates: file ingestion, validation,
//! and synthetic generation. Every zero-sum computation downstream draws on
//! this as its single source of truth.
//!
//! Wire format (UTF-8 text): line `modulus <q>`, then repeated blocks of
//! `chi <conrey_index>` followed by one positive decimal ordinate per line,
//! strictly increasing. `#` starts a comment, blank lines are ignored.

use std::fmt::Write as _;

use crate::arith::is_unit;
use crate::characters::CharacterTable;
use crate::error::{RaceError, Result};
use crate::rng::CounterRng;

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    RealData,
    Synthetic { seed: u64, count_per_char: usize },
}

#[derive(Clone, Debug)]
pub struct ZeroBlock {
    pub conrey_index: u64,
    pub gammas: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub modulus: u64,
    pub blocks: Vec<ZeroBlock>,
    pub provenance: Provenance,
}

/// Local mean zero spacing at height gamma for modulus q.
///
/// The log factor is clamped below so tiny moduli (where q*2 < 2*pi) still get
/// a positive finite spacing.
fn mean_spacing(q: u64, gamma: f64) -> f64 {
    let log = (q as f64 * (gamma + 2.0) / std::f64::consts::TAU).ln().max(0.5);
    std::f64::consts::TAU / log
}

impl ZeroSet {
    pub fn parse(text: &str) -> Result<ZeroSet> {
        let mut modulus: Option<u64> = None;
        let mut blocks: Vec<ZeroBlock> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if modulus.is_none() {
                let q = line
                    .strip_prefix("modulus")
                    .map(str::trim)
                    .and_then(|s| s.parse::<u64>().ok())
                    .ok_or_else(|| RaceError::Parse {
                        line: line_no,
                        message: format!("expected `modulus <q>`, got `{line}`"),
                    })?;
                if q < 3 {
                    return Err(RaceError::ModulusTooSmall(q));
                }
                modulus = Some(q);
                continue;
            }
            let q = modulus.unwrap();
            if let Some(rest) = line.strip_prefix("chi") {
                let idx = rest.trim().parse::<u64>().map_err(|_| RaceError::Parse {
                    line: line_no,
                    message: format!("bad conrey index `{}`", rest.trim()),
                })?;
                if idx % q == 1 % q || !is_unit(idx, q) {
                    return Err(RaceError::Validation(format!(
                        "line {line_no}: conrey index {idx} not a non-principal unit mod {q}"
                    )));
                }
                if blocks.iter().any(|b| b.conrey_index == idx) {
                    return Err(RaceError::Validation(format!(
                        "line {line_no}: duplicate block for conrey index {idx}"
                    )));
                }
                blocks.push(ZeroBlock {
                    conrey_index: idx,
                    gammas: Vec::new(),
                });
            } else {
                let gamma = line.parse::<f64>().map_err(|_| RaceError::Parse {
                    line: line_no,
                    message: format!("bad ordinate `{line}`"),
                })?;
                let block = blocks.last_mut().ok_or_else(|| RaceError::Parse {
                    line: line_no,
                    message: "ordinate before any `chi` header".into(),
                })?;
                if gamma <= 0.0 || !gamma.is_finite() {
                    return Err(RaceError::Validation(format!(
                        "line {line_no}: ordinate must be positive, got {gamma}"
                    )));
                }
                if block.gammas.last().is_some_and(|&last| gamma <= last) {
                    return Err(RaceError::Validation(format!(
                        "line {line_no}: gammas not increasing"
                    )));
                }
                block.gammas.push(gamma);
            }
        }
        let modulus = modulus.ok_or_else(|| RaceError::Parse {
            line: 1,
            message: "missing `modulus` header".into(),
        })?;
        if let Some(b) = blocks.iter().find(|b| b.gammas.is_empty()) {
            return Err(RaceError::Validation(format!(
                "empty block for conrey index {}",
                b.conrey_index
            )));
        }
        Ok(ZeroSet {
            modulus,
            blocks,
            provenance: Provenance::RealData,
        })
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "modulus {}", self.modulus).unwrap();
        for b in &self.blocks {
            writeln!(out, "chi {}", b.conrey_index).unwrap();
            for &g in &b.gammas {
                // 17 significant digits: f64 round-trips exactly
                writeln!(out, "{g:.17e}").unwrap();
            }
        }
        out
    }

    /// Sequential-spacing synthetic ordinates, one block per non-principal
    /// character, deterministic given (q, count, seed).
    pub fn synthesize(table: &CharacterTable, count_per_char: usize, seed: u64) -> Result<ZeroSet> {
        if count_per_char < 1 {
            return Err(RaceError::Domain(
                "count_per_char must be at least 1".into(),
            ));
        }
        let q = table.modulus();
        let mut blocks = Vec::new();
        for &idx in table.conrey_indices() {
            if idx == 1 {
                continue;
            }
            let mut rng = CounterRng::new(seed, idx);
            let mut gammas = Vec::with_capacity(count_per_char);
            // gamma_0 uniform on (0, m]; subsequent gaps uniform on [0.5m, 1.5m]
            let mut gamma = (1.0 - rng.uniform()) * mean_spacing(q, 0.0);
            gammas.push(gamma);
            for _ in 1..count_per_char {
                gamma += (0.5 + rng.uniform()) * mean_spacing(q, gamma);
                gammas.push(gamma);
            }
            blocks.push(ZeroBlock {
                conrey_index: idx,
                gammas,
            });
        }
        Ok(ZeroSet {
            modulus: q,
            blocks,
            provenance: Provenance::Synthetic {
                seed,
                count_per_char,
            },
        })
    }

    /// True when every non-principal character has a block.
    pub fn is_complete(&self, table: &CharacterTable) -> bool {
        self.blocks.len() as u64 == table.phi() - 1
    }

    pub fn block(&self, conrey_index: u64) -> Option<&ZeroBlock> {
        self.blocks.iter().find(|b| b.conrey_index == conrey_index)
    }

    pub fn total_zeros(&self) -> usize {
        self.blocks.iter().map(|b| b.gammas.len()).sum()
    }
}
