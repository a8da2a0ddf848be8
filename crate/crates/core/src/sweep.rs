//! Robustness sweep: embed once per placement, then attack and extract
//! non-blind for every attack spec.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::attacks::AttackSpec;
use crate::embed::{embed, Logo, PlacementKind};
use crate::extract::extract_nonblind;
use crate::metrics::{ncorr, psnr};
use crate::transforms::NptOperator;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub ncorr: f64,
    /// PSNR between the host and the attacked watermarked image.
    pub psnr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRow {
    pub placement: PlacementKind,
    /// `None` marks the clean baseline.
    pub attack: Option<AttackSpec>,
    pub outcome: Result<Measurement>,
}

fn placement_rank(kind: PlacementKind) -> u8 {
    match kind {
        PlacementKind::Bottom => 0,
        PlacementKind::TopLeft => 1,
        PlacementKind::Optimum => 2,
    }
}

fn row_order(a: &RobustnessRow, b: &RobustnessRow) -> Ordering {
    let key = |r: &RobustnessRow| match r.attack {
        None => (0u8, 0.0f64, 0u64),
        Some(spec) => (spec.kind.family_rank(), spec.kind.intensity(), spec.seed),
    };
    let (fa, ia, sa) = key(a);
    let (fb, ib, sb) = key(b);
    placement_rank(a.placement)
        .cmp(&placement_rank(b.placement))
        .then(fa.cmp(&fb))
        .then(ia.total_cmp(&ib))
        .then(sa.cmp(&sb))
}

fn measure(
    watermarked: &Matrix,
    attack: Option<&AttackSpec>,
    host: &Matrix,
    logo: &Logo,
    placement: &crate::embed::Placement,
    op: &NptOperator,
) -> Result<Measurement> {
    let attacked = match attack {
        Some(spec) => spec.apply(watermarked)?,
        None => watermarked.clone(),
    };
    let report = extract_nonblind(&attacked, placement, host, op)?;
    Ok(Measurement {
        ncorr: ncorr(logo.pixels(), report.logo.pixels())?,
        psnr_db: psnr(host, &attacked)?,
    })
}

/// One baseline row plus one row per attack for every placement. Failures are
/// recorded per row; the sweep itself only fails on an empty placement list.
pub fn robustness_sweep(
    host: &Matrix,
    logo: &Logo,
    op: &NptOperator,
    placements: &[PlacementKind],
    attacks: &[AttackSpec],
    stride: usize,
) -> Result<Vec<RobustnessRow>> {
    if placements.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one placement".into()));
    }
    let mut rows = Vec::with_capacity(placements.len() * (attacks.len() + 1));
    for &kind in placements {
        let embedded = embed(host, logo, op, kind, stride);
        let trials = core::iter::once(None).chain(attacks.iter().map(Some));
        for attack in trials {
            let outcome = match &embedded {
                Ok(wm) => measure(&wm.data, attack, host, logo, &wm.placement, op),
                Err(e) => Err(e.clone()),
            };
            rows.push(RobustnessRow {
                placement: kind,
                attack: attack.copied(),
                outcome,
            });
        }
    }
    rows.sort_by(row_order);
    Ok(rows)
}
