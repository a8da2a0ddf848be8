//! Sweep configuration (TOML) and CSV output.
//!
//! ```toml
//! placements = ["bottom", "topleft"]
//! stride = 1
//!
//! [[attack]]
//! kind = "noise"
//! sigma = [0.0, 0.01, 0.05]
//! seed = [1, 2, 3]
//!
//! [[attack]]
//! kind = "crop"
//! rect = [200, 200, 40, 40]
//! fill = "mean"
//!
//! [[attack]]
//! kind = "compress"
//! quality = [90, 50]
//! ```
//!
//! Lists expand to their cartesian product.

use std::fmt::Write as _;

use nptmark_core::attacks::{AttackKind, AttackSpec, CropFill};
use nptmark_core::embed::{PlacementKind, Region};
use nptmark_core::sweep::RobustnessRow;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttackEntry {
    Noise {
        sigma: OneOrMany<f64>,
        seed: Option<OneOrMany<u64>>,
    },
    Crop {
        rect: [usize; 4],
        fill: Option<String>,
    },
    Compress {
        quality: OneOrMany<u8>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub placements: Vec<String>,
    pub stride: Option<usize>,
    #[serde(default, rename = "attack")]
    pub attacks: Vec<AttackEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub placements: Vec<PlacementKind>,
    pub stride: Option<usize>,
    pub attacks: Vec<AttackSpec>,
}

pub fn parse_fill(text: &str) -> Result<CropFill> {
    match text {
        "zero" => Ok(CropFill::Zero),
        "mean" => Ok(CropFill::Mean),
        other => Err(Error::Usage(format!("unknown crop fill '{other}' (zero|mean)"))),
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format(format!("sweep config: {e}")))
    }

    pub fn plan(&self) -> Result<SweepPlan> {
        let placements = self
            .placements
            .iter()
            .map(|p| {
                PlacementKind::parse(p)
                    .ok_or_else(|| Error::Usage(format!("unknown placement '{p}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        if placements.is_empty() {
            return Err(Error::Usage("sweep config lists no placements".into()));
        }
        let mut attacks = Vec::new();
        for entry in &self.attacks {
            match entry {
                AttackEntry::Noise { sigma, seed } => {
                    let seeds = seed.as_ref().map_or(vec![0], OneOrMany::to_vec);
                    for s in sigma.to_vec() {
                        if !(s >= 0.0 && s.is_finite()) {
                            return Err(Error::Usage(format!("noise sigma {s} must be >= 0")));
                        }
                        for &seed in &seeds {
                            attacks.push(AttackSpec {
                                kind: AttackKind::GaussianNoise { sigma: s },
                                seed,
                            });
                        }
                    }
                }
                AttackEntry::Crop { rect, fill } => {
                    let [row, col, rows, cols] = *rect;
                    attacks.push(AttackSpec {
                        kind: AttackKind::Crop {
                            rect: Region {
                                row,
                                col,
                                rows,
                                cols,
                            },
                            fill: parse_fill(fill.as_deref().unwrap_or("zero"))?,
                        },
                        seed: 0,
                    });
                }
                AttackEntry::Compress { quality } => {
                    for q in quality.to_vec() {
                        if !(1..=100).contains(&q) {
                            return Err(Error::Usage(format!("quality {q} outside 1..=100")));
                        }
                        attacks.push(AttackSpec {
                            kind: AttackKind::Compress { quality: q },
                            seed: 0,
                        });
                    }
                }
            }
        }
        Ok(SweepPlan {
            placements,
            stride: self.stride,
            attacks,
        })
    }
}

/// `printf("%g")`-style formatting with 6 significant digits.
pub fn format_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_HEADER: &str = "placement,attack,param,seed,ncorr,psnr_db";

fn attack_columns(spec: &Option<AttackSpec>) -> (String, String, u64) {
    match spec {
        None => ("none".into(), String::new(), 0),
        Some(spec) => {
            let param = match spec.kind {
                AttackKind::GaussianNoise { sigma } => format_g(sigma),
                AttackKind::Crop { rect, fill } => format!(
                    "{}:{}:{}:{}:{}",
                    rect.row,
                    rect.col,
                    rect.rows,
                    rect.cols,
                    fill.name()
                ),
                AttackKind::Compress { quality } => quality.to_string(),
            };
            (spec.kind.name().into(), param, spec.seed)
        }
    }
}

/// One line per row, LF endings. Failed rows carry `error` in both metric
/// columns.
pub fn rows_to_csv(rows: &[RobustnessRow]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let (attack, param, seed) = attack_columns(&row.attack);
        let (ncorr, psnr) = match &row.outcome {
            Ok(m) => (format_g(m.ncorr), format_g(m.psnr_db)),
            Err(_) => ("error".into(), "error".into()),
        };
        let _ = writeln!(
            out,
            "{},{attack},{param},{seed},{ncorr},{psnr}",
            row.placement.name()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (39.318123, "39.3181"),
            (123456.0, "123456"),
            (1234567.0, "1.23457e+06"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (0.999999999, "1"),
            (99.0, "99"),
            (999999.5, "1e+06"),
        ];
        for (x, s) in cases {
            assert_eq!(format_g(x), s, "{x}");
        }
    }

    #[test]
    fn config_expands_lists() {
        let cfg = SweepConfig::parse(
            r#"
            placements = ["topleft"]
            [[attack]]
            kind = "noise"
            sigma = [0.01, 0.05]
            seed = [1, 2]
            [[attack]]
            kind = "compress"
            quality = 90
            [[attack]]
            kind = "crop"
            rect = [1, 2, 3, 4]
            "#,
        )
        .unwrap();
        let plan = cfg.plan().unwrap();
        assert_eq!(plan.placements, [PlacementKind::TopLeft]);
        assert_eq!(plan.attacks.len(), 6);
        assert!(SweepConfig::parse("placements = []\nbogus = 1").is_err());
        let bad = SweepConfig::parse("placements = [\"diagonal\"]").unwrap();
        assert!(bad.plan().is_err());
    }
}
