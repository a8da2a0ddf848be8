//! Watermark extraction.
//!
//! With `S0` the host with the placement region zeroed, the watermarked image
//! satisfies, outside the region,
//!
//! ```text
//! A_pm - psi S0 psi = R p C^T,   R = psi[:, region rows],  C = psi[:, region cols]
//! ```
//!
//! so the payload `p` enters linearly. The non-blind extractor solves that
//! system band by band with Householder least squares. The quasi-blind
//! extractor (bottom placement only) does not know the host: it projects out
//! the payload with a basis `L` of the complement of `range(psi12)` and pins
//! the remaining `r` free values per column with `r` known host rows.

use alloc::vec::Vec;

use crate::embed::{Logo, Placement, PlacementKind, Region, WatermarkedImage};
use crate::linalg::{least_squares, solve, Qr, RANK_TOLERANCE};
use crate::metrics::{ncorr, psnr};
use crate::transforms::NptOperator;
use crate::{Error, Matrix, Result};

/// `psi` split at `N - k`: `psi11` is `(N-k) x (N-k)`, `psi22` is `k x k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiPartition {
    pub psi11: Matrix,
    pub psi12: Matrix,
    pub psi21: Matrix,
    pub psi22: Matrix,
}

impl PsiPartition {
    pub fn new(op: &NptOperator, k: usize) -> Result<Self> {
        let n = op.order();
        if k > n {
            return Err(Error::InvalidArgument(alloc::format!(
                "cannot split order {n} at {k} trailing rows"
            )));
        }
        let psi = op.psi();
        let s = n - k;
        Ok(PsiPartition {
            psi11: psi.block(0, 0, s, s),
            psi12: psi.block(0, s, s, k),
            psi21: psi.block(s, 0, k, s),
            psi22: psi.block(s, s, k, k),
        })
    }

    pub fn reassemble(&self) -> Matrix {
        let s = self.psi11.rows();
        let n = s + self.psi22.rows();
        let mut psi = Matrix::zeros(n, n);
        psi.set_block(0, 0, &self.psi11);
        psi.set_block(0, s, &self.psi12);
        psi.set_block(s, 0, &self.psi21);
        psi.set_block(s, s, &self.psi22);
        psi
    }
}

/// Orthonormal columns spanning the complement of `range(psi12)` in
/// `R^(N-r)`; `L^T psi12 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullProjector {
    basis: Matrix,
}

impl NullProjector {
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        if self.basis.cols() == 0 {
            return 0;
        }
        Qr::new(&self.basis).rank(RANK_TOLERANCE)
    }
}

pub fn build_null_projector(partition: &PsiPartition) -> Result<NullProjector> {
    let psi12 = &partition.psi12;
    let (s, r) = psi12.shape();
    if r == 0 {
        return Ok(NullProjector {
            basis: Matrix::identity(s),
        });
    }
    if s <= r {
        return Err(Error::Shape(alloc::format!(
            "split leaves {s} rows for {r} payload rows; need N - 2r > 0"
        )));
    }
    let qr = Qr::new(psi12);
    let rank = qr.rank(RANK_TOLERANCE);
    if rank < r {
        return Err(Error::RankDeficient {
            expected: r,
            found: rank,
        });
    }
    Ok(NullProjector {
        basis: qr.complement_basis(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMode {
    NonBlind,
    QuasiBlind,
}

impl ExtractionMode {
    pub fn name(self) -> &'static str {
        match self {
            ExtractionMode::NonBlind => "nonblind",
            ExtractionMode::QuasiBlind => "quasiblind",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub mode: ExtractionMode,
    pub placement: Placement,
    /// Recovered logo, clamped to `[0, 1]`.
    pub logo: Logo,
    /// Unclamped least-squares payload in region shape.
    pub raw_payload: Matrix,
    /// Quasi-blind only: the recovered hidden host rows `S1`.
    pub recovered_host_region: Option<Matrix>,
    /// Set by [`ExtractionReport::with_reference`].
    pub ncorr: Option<f64>,
    /// Non-blind: host vs watermarked. Quasi-blind: reconstructed host vs
    /// watermarked.
    pub psnr_db: f64,
    pub solver_residual: f64,
    /// `alpha = 1`: the image carries no watermark.
    pub degenerate: bool,
}

impl ExtractionReport {
    pub fn with_reference(mut self, original: &Logo) -> Result<Self> {
        self.ncorr = Some(ncorr(original.pixels(), self.logo.pixels())?);
        Ok(self)
    }
}

fn complement(range: core::ops::Range<usize>, n: usize) -> Vec<usize> {
    (0..n).filter(|i| !range.contains(i)).collect()
}

fn payload_to_logo(payload: &Matrix, placement: &Placement) -> Result<Logo> {
    let (m, n) = (placement.logo_rows, placement.logo_cols);
    let pixels = match placement.kind {
        PlacementKind::Bottom => {
            if m * n != payload.rows() * payload.cols() {
                return Err(Error::Shape(alloc::format!(
                    "{m}x{n} logo does not match a {}x{} payload",
                    payload.rows(),
                    payload.cols()
                )));
            }
            Matrix::from_vec(m, n, payload.as_slice().to_vec())?
        }
        PlacementKind::TopLeft | PlacementKind::Optimum => {
            if m > payload.rows() || n > payload.cols() {
                return Err(Error::Shape("logo larger than the payload block".into()));
            }
            payload.block(0, 0, m, n)
        }
    };
    Logo::new(pixels.clamp(0.0, 1.0))
}

fn check_geometry(watermarked: &Matrix, placement: &Placement, op: &NptOperator) -> Result<()> {
    let n = op.order();
    watermarked.ensure_shape(n, n)?;
    let region = placement.region;
    if region.rows == 0 || region.cols == 0 || !region.fits(n, n) {
        return Err(Error::InvalidArgument("placement region outside image".into()));
    }
    Ok(())
}

/// Non-blind extraction for any placement, given the exact host.
pub fn extract_nonblind(
    watermarked: &Matrix,
    placement: &Placement,
    host: &Matrix,
    op: &NptOperator,
) -> Result<ExtractionReport> {
    check_geometry(watermarked, placement, op)?;
    let n = op.order();
    host.ensure_shape(n, n)?;
    let Region {
        row: r0,
        col: c0,
        rows: h,
        cols: w,
    } = placement.region;
    let psnr_db = psnr(host, watermarked)?;

    if op.alpha() == 1.0 {
        let raw = watermarked.block(r0, c0, h, w);
        return Ok(ExtractionReport {
            mode: ExtractionMode::NonBlind,
            placement: *placement,
            logo: payload_to_logo(&raw, placement)?,
            raw_payload: raw,
            recovered_host_region: None,
            ncorr: None,
            psnr_db,
            solver_residual: 0.0,
            degenerate: true,
        });
    }

    let mut zeroed = host.clone();
    zeroed.set_block(r0, c0, &Matrix::zeros(h, w));
    let diff = watermarked.sub(&op.apply(&zeroed));
    let psi = op.psi();
    let in_rows: Vec<usize> = (r0..r0 + h).collect();
    let in_cols: Vec<usize> = (c0..c0 + w).collect();
    let out_rows = complement(r0..r0 + h, n);
    let out_cols = complement(c0..c0 + w, n);

    let mut estimates = Vec::new();
    let mut residual_sq = 0.0;
    // Row band: diff[out_rows, in_cols] = psi[out_rows, in_rows] p psi[in_cols, in_cols].
    if !out_rows.is_empty() && out_rows.len() >= h {
        let ls = least_squares(&psi.select(&out_rows, &in_rows), &diff.select(&out_rows, &in_cols))?;
        let core = psi.select(&in_cols, &in_cols);
        estimates.push(solve(&core, &ls.solution.transpose())?.transpose());
        residual_sq += ls.residual * ls.residual;
    }
    // Column band: diff[in_rows, out_cols]^T = psi[out_cols, in_cols] (p^T psi[in_rows, in_rows]).
    if !out_cols.is_empty() && out_cols.len() >= w {
        let ls = least_squares(
            &psi.select(&out_cols, &in_cols),
            &diff.select(&in_rows, &out_cols).transpose(),
        )?;
        let core = psi.select(&in_rows, &in_rows);
        estimates.push(solve(&core, &ls.solution.transpose())?);
        residual_sq += ls.residual * ls.residual;
    }
    if estimates.is_empty() {
        return Err(Error::SizeRestriction {
            side: h.min(w),
            order: n,
        });
    }
    let count = estimates.len() as f64;
    let mut payload = estimates.pop().expect("non-empty");
    for e in &estimates {
        payload = payload.add(e);
    }
    let payload = payload.scaled(1.0 / count);

    Ok(ExtractionReport {
        mode: ExtractionMode::NonBlind,
        placement: *placement,
        logo: payload_to_logo(&payload, placement)?,
        raw_payload: payload,
        recovered_host_region: None,
        ncorr: None,
        psnr_db,
        solver_residual: libm::sqrt(residual_sq),
        degenerate: false,
    })
}

fn check_alpha(wm: &WatermarkedImage, op: &NptOperator) -> Result<()> {
    if wm.alpha != op.alpha() {
        return Err(Error::InvalidArgument(alloc::format!(
            "image was embedded with alpha {} but the operator uses {}",
            wm.alpha,
            op.alpha()
        )));
    }
    Ok(())
}

pub fn extract_nonblind_topleft(
    wm: &WatermarkedImage,
    host: &Matrix,
    op: &NptOperator,
) -> Result<ExtractionReport> {
    check_alpha(wm, op)?;
    if wm.placement.kind == PlacementKind::Bottom {
        return Err(Error::InvalidArgument("image uses bottom placement".into()));
    }
    extract_nonblind(&wm.data, &wm.placement, host, op)
}

pub fn extract_nonblind_bottom(
    wm: &WatermarkedImage,
    host: &Matrix,
    op: &NptOperator,
) -> Result<ExtractionReport> {
    check_alpha(wm, op)?;
    if wm.placement.kind != PlacementKind::Bottom {
        return Err(Error::InvalidArgument("image does not use bottom placement".into()));
    }
    extract_nonblind(&wm.data, &wm.placement, host, op)
}

/// Host rows known to the quasi-blind extractor. `indices` address rows of
/// the hidden region (`< N - r`), one per row of `rows`.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownRows {
    pub indices: Vec<usize>,
    pub rows: Matrix,
}

impl KnownRows {
    pub fn from_host(host: &Matrix, indices: Vec<usize>) -> Self {
        let all: Vec<usize> = (0..host.cols()).collect();
        let rows = host.select(&indices, &all);
        KnownRows { indices, rows }
    }
}

/// `r` rows spread evenly over the `N - r` hidden rows. Evenly spaced rows
/// keep the pinning system well conditioned; adjacent rows do not.
pub fn default_known_row_indices(order: usize, r: usize) -> Vec<usize> {
    let hidden = order.saturating_sub(r);
    (0..r).map(|k| (2 * k + 1) * hidden / (2 * r)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiBlindOptions {
    /// Allowed distance of the recovered pixels from `[0, 1]`, relative to
    /// `max(||known rows||_F, 1)`.
    pub tamper_tolerance: f64,
}

impl Default for QuasiBlindOptions {
    fn default() -> Self {
        QuasiBlindOptions {
            tamper_tolerance: 1e-3,
        }
    }
}

fn box_violation(m: &Matrix) -> f64 {
    m.as_slice()
        .iter()
        .map(|&v| {
            let d = v - v.clamp(0.0, 1.0);
            d * d
        })
        .sum()
}

/// Quasi-blind extraction for bottom placement: recovers the hidden host rows
/// `S1` and the logo from the watermarked image, `alpha` and `r` known host
/// rows.
pub fn extract_quasiblind_bottom(
    watermarked: &Matrix,
    placement: &Placement,
    known: &KnownRows,
    op: &NptOperator,
    options: QuasiBlindOptions,
) -> Result<ExtractionReport> {
    if placement.kind != PlacementKind::Bottom {
        return Err(Error::InvalidArgument(
            "quasi-blind extraction supports bottom placement only".into(),
        ));
    }
    let n = op.order();
    let r = placement.region.rows;
    if r == 0 {
        return Err(Error::NothingEmbedded);
    }
    check_geometry(watermarked, placement, op)?;
    if placement.region.row != n - r || placement.region.cols != n {
        return Err(Error::InvalidArgument("bottom region must span the last rows".into()));
    }
    if 2 * r >= n {
        return Err(Error::Shape(alloc::format!(
            "quasi-blind extraction needs 2r < N (r = {r}, N = {n})"
        )));
    }
    if op.alpha() == 1.0 {
        return Err(Error::Degenerate);
    }
    let s = n - r;
    known.rows.ensure_shape(r, n)?;
    if known.indices.len() != r {
        return Err(Error::InvalidArgument(alloc::format!(
            "need exactly {r} known row indices, got {}",
            known.indices.len()
        )));
    }
    let mut sorted = known.indices.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != r || sorted.iter().any(|&i| i >= s) {
        return Err(Error::InvalidArgument(
            "known row indices must be distinct and inside the hidden region".into(),
        ));
    }

    let top = watermarked.block(0, 0, s, n);
    let y = top.matmul(&op.inverse_matrix());
    let part = PsiPartition::new(op, r)?;
    let projector = build_null_projector(&part)?;
    let lt = projector.basis().transpose();
    let g = lt.matmul(&part.psi11);
    let lty = lt.matmul(&y);

    let unknown: Vec<usize> = (0..s).filter(|i| !known.indices.contains(i)).collect();
    let all_rows: Vec<usize> = (0..g.rows()).collect();
    let g_unknown = g.select(&all_rows, &unknown);
    let g_known = g.select(&all_rows, &known.indices);
    let rhs = lty.sub(&g_known.matmul(&known.rows));
    let solved = solve(&g_unknown, &rhs)?;

    let mut hidden = Matrix::zeros(s, n);
    for (k, &i) in unknown.iter().enumerate() {
        hidden.row_mut(i).copy_from_slice(solved.row(k));
    }
    for (k, &i) in known.indices.iter().enumerate() {
        hidden.row_mut(i).copy_from_slice(known.rows.row(k));
    }

    let ls = least_squares(&part.psi12, &y.sub(&part.psi11.matmul(&hidden)))?;
    let payload = ls.solution;

    let violation = libm::sqrt(box_violation(&hidden) + box_violation(&payload));
    let threshold = options.tamper_tolerance * known.rows.frobenius_norm().max(1.0);
    if !(violation <= threshold) {
        return Err(Error::TamperSuspected {
            residual: violation,
            threshold,
        });
    }

    let mut reconstructed = watermarked.clone();
    reconstructed.set_block(0, 0, &hidden);
    let psnr_db = psnr(&reconstructed, watermarked)?;

    Ok(ExtractionReport {
        mode: ExtractionMode::QuasiBlind,
        placement: *placement,
        logo: payload_to_logo(&payload, placement)?,
        raw_payload: payload,
        recovered_host_region: Some(hidden),
        ncorr: None,
        psnr_db,
        solver_residual: ls.residual,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectedRegion {
    Bottom { rows: usize },
    Block(Region),
}

/// Smallest side accepted for a detected block; smaller exact matches are
/// treated as coincidence.
const MIN_BLOCK_SIDE: usize = 2;

/// Locate the restored (bit-identical) region between a watermarked image
/// and its host: trailing full rows for bottom placement, else the largest
/// exact-match rectangle.
pub fn estimate_logo_size(watermarked: &Matrix, host: &Matrix) -> Result<DetectedRegion> {
    host.ensure_shape(watermarked.rows(), watermarked.cols())?;
    let (rows, cols) = watermarked.shape();
    let equal = |i: usize, j: usize| watermarked[(i, j)] == host[(i, j)];
    if (0..rows).all(|i| (0..cols).all(|j| equal(i, j))) {
        return Err(Error::Degenerate);
    }
    let trailing = (0..rows)
        .rev()
        .take_while(|&i| (0..cols).all(|j| equal(i, j)))
        .count();
    if trailing > 0 {
        return Ok(DetectedRegion::Bottom { rows: trailing });
    }

    // Largest all-equal rectangle via per-row histograms and a monotone stack.
    let mut heights = alloc::vec![0usize; cols];
    let mut best: Option<Region> = None;
    for i in 0..rows {
        for (j, h) in heights.iter_mut().enumerate() {
            *h = if equal(i, j) { *h + 1 } else { 0 };
        }
        let mut stack: Vec<usize> = Vec::new();
        for j in 0..=cols {
            let cur = if j < cols { heights[j] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] <= cur {
                    break;
                }
                stack.pop();
                let height = heights[top];
                let left = stack.last().map_or(0, |&l| l + 1);
                let width = j - left;
                let candidate = Region {
                    row: i + 1 - height,
                    col: left,
                    rows: height,
                    cols: width,
                };
                if best.is_none_or(|b| candidate.area() > b.area()) {
                    best = Some(candidate);
                }
            }
            stack.push(j);
        }
    }
    match best {
        Some(region) if region.rows >= MIN_BLOCK_SIDE && region.cols >= MIN_BLOCK_SIDE => {
            Ok(DetectedRegion::Block(region))
        }
        _ => Err(Error::DetectionFailure),
    }
}
