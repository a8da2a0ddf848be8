//! Logo embedding: replace part of the host with the logo, apply the NPT,
//! then copy the original host pixels back over the replaced part so the
//! logo survives only in its spread-out footprint.
//!
//! Three placements are supported:
//!
//! - **bottom**: the logo is flattened row-major into `r = m n / N` rows of
//!   width `N` that replace the last `r` host rows;
//! - **top-left**: a square `m x m` block replaces the top-left corner;
//! - **optimum**: like top-left, but at the block offset whose host content
//!   is closest (Frobenius distance) to the logo.

use alloc::vec::Vec;

use sha2::{Digest, Sha256};

use crate::transforms::NptOperator;
use crate::{Error, Matrix, Result};

/// Fill value used to square up rectangular logos for block placements.
pub const PAD_VALUE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Logo {
    pixels: Matrix,
}

impl Logo {
    pub fn new(pixels: Matrix) -> Result<Self> {
        if pixels.rows() == 0 || pixels.cols() == 0 {
            return Err(Error::InvalidArgument("empty logo".into()));
        }
        if pixels.as_slice().iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "logo pixels must be finite and within [0, 1]".into(),
            ));
        }
        Ok(Logo { pixels })
    }

    pub fn rows(&self) -> usize {
        self.pixels.rows()
    }

    pub fn cols(&self) -> usize {
        self.pixels.cols()
    }

    pub fn pixels(&self) -> &Matrix {
        &self.pixels
    }

    /// Square `s x s` block, `s = max(rows, cols)`, logo in the top-left and
    /// [`PAD_VALUE`] elsewhere.
    pub fn square_block(&self) -> Matrix {
        let side = self.rows().max(self.cols());
        let mut block = Matrix::filled(side, side, PAD_VALUE);
        block.set_block(0, 0, &self.pixels);
        block
    }
}

/// Logo pixels packed row-major into `r` rows of width `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReshapedLogoBlock {
    block: Matrix,
}

impl ReshapedLogoBlock {
    pub fn rows(&self) -> usize {
        self.block.rows()
    }

    pub fn block(&self) -> &Matrix {
        &self.block
    }

    pub fn unreshape(&self, rows: usize, cols: usize) -> Result<Logo> {
        Logo::new(Matrix::from_vec(rows, cols, self.block.as_slice().to_vec())?)
    }
}

pub fn reshape_logo(logo: &Logo, host_order: usize) -> Result<ReshapedLogoBlock> {
    let total = logo.rows() * logo.cols();
    if host_order == 0 || !total.is_multiple_of(host_order) {
        return Err(Error::Shape(alloc::format!(
            "{}x{} logo does not fill whole rows of width {host_order}",
            logo.rows(),
            logo.cols()
        )));
    }
    let r = total / host_order;
    if r >= host_order {
        return Err(Error::LogoTooLarge {
            rows: r,
            order: host_order,
        });
    }
    Ok(ReshapedLogoBlock {
        block: Matrix::from_vec(r, host_order, logo.pixels.as_slice().to_vec())?,
    })
}

/// Axis-aligned rectangle in image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Region {
    pub row: usize,
    pub col: usize,
    pub rows: usize,
    pub cols: usize,
}

impl Region {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.row && i < self.row + self.rows && j >= self.col && j < self.col + self.cols
    }

    pub fn fits(&self, rows: usize, cols: usize) -> bool {
        self.row + self.rows <= rows && self.col + self.cols <= cols
    }

    pub fn area(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlacementKind {
    Bottom,
    TopLeft,
    Optimum,
}

impl PlacementKind {
    pub fn name(self) -> &'static str {
        match self {
            PlacementKind::Bottom => "bottom",
            PlacementKind::TopLeft => "topleft",
            PlacementKind::Optimum => "optimum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bottom" => Some(PlacementKind::Bottom),
            "topleft" => Some(PlacementKind::TopLeft),
            "optimum" => Some(PlacementKind::Optimum),
            _ => None,
        }
    }
}

/// Where a logo went and what shape it had before packing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub kind: PlacementKind,
    /// Replaced (and later restored) host region.
    pub region: Region,
    pub logo_rows: usize,
    pub logo_cols: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WatermarkedImage {
    pub data: Matrix,
    pub placement: Placement,
    pub alpha: f64,
    pub host_digest: [u8; 32],
}

/// SHA-256 over the dimensions and the little-endian `f64` pixel bits.
pub fn host_digest(host: &Matrix) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update((host.rows() as u64).to_le_bytes());
    hasher.update((host.cols() as u64).to_le_bytes());
    for v in host.as_slice() {
        hasher.update(v.to_le_bytes());
    }
    hasher.finalize().into()
}

fn check_host(host: &Matrix, op: &NptOperator) -> Result<()> {
    host.ensure_shape(op.order(), op.order())
}

/// Replace `region` with `payload`, transform, restore `region` from the host.
pub fn embed_region(
    host: &Matrix,
    payload: &Matrix,
    region: Region,
    op: &NptOperator,
) -> Result<Matrix> {
    check_host(host, op)?;
    payload.ensure_shape(region.rows, region.cols)?;
    if !region.fits(host.rows(), host.cols()) {
        return Err(Error::InvalidArgument("placement region outside host".into()));
    }
    let mut marked = host.clone();
    marked.set_block(region.row, region.col, payload);
    let mut out = op.apply(&marked);
    let original = host.block(region.row, region.col, region.rows, region.cols);
    out.set_block(region.row, region.col, &original);
    Ok(out)
}

fn finish(host: &Matrix, data: Matrix, placement: Placement, op: &NptOperator) -> WatermarkedImage {
    WatermarkedImage {
        data,
        placement,
        alpha: op.alpha(),
        host_digest: host_digest(host),
    }
}

pub fn embed_bottom(host: &Matrix, logo: &Logo, op: &NptOperator) -> Result<WatermarkedImage> {
    check_host(host, op)?;
    let n = op.order();
    let reshaped = reshape_logo(logo, n)?;
    let r = reshaped.rows();
    let region = Region {
        row: n - r,
        col: 0,
        rows: r,
        cols: n,
    };
    let data = embed_region(host, reshaped.block(), region, op)?;
    let placement = Placement {
        kind: PlacementKind::Bottom,
        region,
        logo_rows: logo.rows(),
        logo_cols: logo.cols(),
    };
    Ok(finish(host, data, placement, op))
}

fn block_side(logo: &Logo, order: usize) -> Result<usize> {
    let side = logo.rows().max(logo.cols());
    if 2 * side > order {
        return Err(Error::SizeRestriction { side, order });
    }
    Ok(side)
}

fn embed_block(
    host: &Matrix,
    logo: &Logo,
    op: &NptOperator,
    kind: PlacementKind,
    row: usize,
    col: usize,
) -> Result<WatermarkedImage> {
    let block = logo.square_block();
    let side = block.rows();
    let region = Region {
        row,
        col,
        rows: side,
        cols: side,
    };
    let data = embed_region(host, &block, region, op)?;
    let placement = Placement {
        kind,
        region,
        logo_rows: logo.rows(),
        logo_cols: logo.cols(),
    };
    Ok(finish(host, data, placement, op))
}

pub fn embed_topleft(host: &Matrix, logo: &Logo, op: &NptOperator) -> Result<WatermarkedImage> {
    check_host(host, op)?;
    block_side(logo, op.order())?;
    embed_block(host, logo, op, PlacementKind::TopLeft, 0, 0)
}

/// Scan stride used when none is given: exhaustive up to 128 pixels.
pub fn default_stride(order: usize) -> usize {
    if order <= 128 {
        1
    } else {
        4
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumBlock {
    pub region: Region,
    pub distance: f64,
}

/// Offset (multiples of `stride`) minimizing `||S_k - block||_F`; ties go to
/// the smallest `(row, col)`.
pub fn find_optimum_block(host: &Matrix, block: &Matrix, stride: usize) -> Result<OptimumBlock> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be >= 1".into()));
    }
    let (bh, bw) = block.shape();
    if bh == 0 || bw == 0 || bh > host.rows() || bw > host.cols() {
        return Err(Error::InvalidArgument("block does not fit in host".into()));
    }
    let offsets = |len: usize, side: usize| -> Vec<usize> { (0..=len - side).step_by(stride).collect() };
    let mut best: Option<OptimumBlock> = None;
    for &row in &offsets(host.rows(), bh) {
        for &col in &offsets(host.cols(), bw) {
            let mut sq = 0.0;
            for i in 0..bh {
                let host_row = &host.row(row + i)[col..col + bw];
                for (a, b) in host_row.iter().zip(block.row(i)) {
                    sq += (a - b) * (a - b);
                }
            }
            let distance = libm::sqrt(sq);
            if best.is_none_or(|b| distance < b.distance) {
                best = Some(OptimumBlock {
                    region: Region {
                        row,
                        col,
                        rows: bh,
                        cols: bw,
                    },
                    distance,
                });
            }
        }
    }
    Ok(best.expect("search space is non-empty"))
}

pub fn embed_optimum(
    host: &Matrix,
    logo: &Logo,
    op: &NptOperator,
    stride: usize,
) -> Result<WatermarkedImage> {
    check_host(host, op)?;
    block_side(logo, op.order())?;
    let found = find_optimum_block(host, &logo.square_block(), stride)?;
    embed_block(
        host,
        logo,
        op,
        PlacementKind::Optimum,
        found.region.row,
        found.region.col,
    )
}

/// Dispatch on placement kind.
pub fn embed(
    host: &Matrix,
    logo: &Logo,
    op: &NptOperator,
    kind: PlacementKind,
    stride: usize,
) -> Result<WatermarkedImage> {
    match kind {
        PlacementKind::Bottom => embed_bottom(host, logo, op),
        PlacementKind::TopLeft => embed_topleft(host, logo, op),
        PlacementKind::Optimum => embed_optimum(host, logo, op, stride),
    }
}
