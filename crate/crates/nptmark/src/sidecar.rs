//! Line-oriented `key=value` text: the embed metadata sidecar and the
//! extraction report.

use std::fmt::Write as _;

use nptmark_core::embed::{Placement, PlacementKind, Region};
use nptmark_core::extract::ExtractionReport;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedMeta {
    pub placement: Placement,
    pub alpha: f64,
    pub order: usize,
    pub host_digest: [u8; 32],
    pub known_row_indices: Option<Vec<usize>>,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(2 * bytes.len()), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn unhex(text: &str) -> Option<[u8; 32]> {
    if text.len() != 64 || !text.is_ascii() {
        return None;
    }
    let mut out = [0u8; 32];
    for (k, byte) in out.iter_mut().enumerate() {
        *byte = u8::from_str_radix(&text[2 * k..2 * k + 2], 16).ok()?;
    }
    Some(out)
}

pub fn format_region(r: &Region) -> String {
    format!("{},{},{},{}", r.row, r.col, r.rows, r.cols)
}

pub fn parse_list(text: &str) -> Result<Vec<usize>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(format!("bad integer '{t}' in '{text}'")))
        })
        .collect()
}

pub fn parse_region(text: &str) -> Result<Region> {
    match parse_list(text)?[..] {
        [row, col, rows, cols] => Ok(Region {
            row,
            col,
            rows,
            cols,
        }),
        _ => Err(Error::format(format!("region needs row,col,rows,cols, got '{text}'"))),
    }
}

fn join(values: &[usize]) -> String {
    values
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl EmbedMeta {
    pub fn to_text(&self) -> String {
        let p = &self.placement;
        let mut out = String::new();
        let _ = writeln!(out, "placement={}", p.kind.name());
        let _ = writeln!(out, "alpha={}", self.alpha);
        let _ = writeln!(out, "order={}", self.order);
        let _ = writeln!(out, "logo_rows={}", p.logo_rows);
        let _ = writeln!(out, "logo_cols={}", p.logo_cols);
        let _ = writeln!(out, "region={}", format_region(&p.region));
        let _ = writeln!(out, "host_digest={}", hex(&self.host_digest));
        if let Some(idx) = &self.known_row_indices {
            let _ = writeln!(out, "known_row_indices={}", join(idx));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind = None;
        let mut alpha = None;
        let mut order = None;
        let mut logo_rows = None;
        let mut logo_cols = None;
        let mut region = None;
        let mut digest = None;
        let mut known = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(format!("meta line {}: expected key=value", lineno + 1)))?;
            let bad = || Error::format(format!("meta line {}: bad value for {key}", lineno + 1));
            match key {
                "placement" => kind = Some(PlacementKind::parse(value).ok_or_else(bad)?),
                "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad())?),
                "order" => order = Some(value.parse::<usize>().map_err(|_| bad())?),
                "logo_rows" => logo_rows = Some(value.parse::<usize>().map_err(|_| bad())?),
                "logo_cols" => logo_cols = Some(value.parse::<usize>().map_err(|_| bad())?),
                "region" => region = Some(parse_region(value)?),
                "host_digest" => digest = Some(unhex(value).ok_or_else(bad)?),
                "known_row_indices" => known = Some(parse_list(value)?),
                other => return Err(Error::format(format!("meta: unknown key '{other}'"))),
            }
        }
        let missing = |k: &str| Error::format(format!("meta: missing '{k}'"));
        Ok(EmbedMeta {
            placement: Placement {
                kind: kind.ok_or_else(|| missing("placement"))?,
                region: region.ok_or_else(|| missing("region"))?,
                logo_rows: logo_rows.ok_or_else(|| missing("logo_rows"))?,
                logo_cols: logo_cols.ok_or_else(|| missing("logo_cols"))?,
            },
            alpha: alpha.ok_or_else(|| missing("alpha"))?,
            order: order.ok_or_else(|| missing("order"))?,
            host_digest: digest.ok_or_else(|| missing("host_digest"))?,
            known_row_indices: known,
        })
    }
}

/// Report keys, always in this order: mode, placement, alpha, logo_rows,
/// logo_cols, region, ncorr, psnr_db, solver_residual, degenerate.
pub fn report_text(report: &ExtractionReport, alpha: f64) -> String {
    let p = &report.placement;
    let ncorr = report
        .ncorr
        .map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"));
    let mut out = String::new();
    let _ = writeln!(out, "mode={}", report.mode.name());
    let _ = writeln!(out, "placement={}", p.kind.name());
    let _ = writeln!(out, "alpha={alpha}");
    let _ = writeln!(out, "logo_rows={}", p.logo_rows);
    let _ = writeln!(out, "logo_cols={}", p.logo_cols);
    let _ = writeln!(out, "region={}", format_region(&p.region));
    let _ = writeln!(out, "ncorr={ncorr}");
    let _ = writeln!(out, "psnr_db={:.6}", report.psnr_db);
    let _ = writeln!(out, "solver_residual={:.6e}", report.solver_residual);
    let _ = writeln!(out, "degenerate={}", report.degenerate);
    out
}
