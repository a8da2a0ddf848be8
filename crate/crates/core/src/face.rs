//! Face matching on fractional Hartley coefficients.
//!
//! Images are resized to 128x128, transformed two-sidedly, and the four
//! `s x s` corner squares (top-left, top-right, bottom-left, bottom-right,
//! each row-major) form the feature. Queries go to the gallery entry at the
//! smallest Euclidean distance.

use alloc::string::String;
use alloc::vec::Vec;

use crate::transforms::{HartleyMatrix, NptOperator};
use crate::{Error, Matrix, Result};

pub const FACE_SIDE: usize = 128;

/// Bilinear resize with pixel-centre alignment: output pixel `i` samples the
/// input at `(i + 0.5) * in / out - 0.5`, clamped to the valid range.
pub fn resize_bilinear(image: &Matrix, rows: usize, cols: usize) -> Result<Matrix> {
    let (in_rows, in_cols) = image.shape();
    if in_rows == 0 || in_cols == 0 || rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("cannot resize an empty image".into()));
    }
    let axis = |out: usize, len: usize| -> Vec<(usize, usize, f64)> {
        let scale = len as f64 / out as f64;
        (0..out)
            .map(|i| {
                let x = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
                let lo = libm::floor(x) as usize;
                let hi = (lo + 1).min(len - 1);
                (lo, hi, x - lo as f64)
            })
            .collect()
    };
    let ys = axis(rows, in_rows);
    let xs = axis(cols, in_cols);
    Ok(Matrix::from_fn(rows, cols, |i, j| {
        let (y0, y1, fy) = ys[i];
        let (x0, x1, fx) = xs[j];
        let top = image[(y0, x0)] * (1.0 - fx) + image[(y0, x1)] * fx;
        let bottom = image[(y1, x0)] * (1.0 - fx) + image[(y1, x1)] * fx;
        top * (1.0 - fy) + bottom * fy
    }))
}

pub fn preprocess(image: &Matrix) -> Result<Matrix> {
    if image.shape() == (FACE_SIDE, FACE_SIDE) {
        return Ok(image.clone());
    }
    Ok(resize_bilinear(image, FACE_SIDE, FACE_SIDE)?.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureTransform {
    Hartley(HartleyMatrix),
    /// Substitutes `psi(alpha)` for `H`.
    Npt(NptOperator),
}

impl FeatureTransform {
    pub fn hartley(order: usize) -> Result<Self> {
        Ok(FeatureTransform::Hartley(HartleyMatrix::new(order)?))
    }

    pub fn order(&self) -> usize {
        match self {
            FeatureTransform::Hartley(h) => h.order(),
            FeatureTransform::Npt(op) => op.order(),
        }
    }

    pub fn apply(&self, image: &Matrix) -> Result<Matrix> {
        let n = self.order();
        image.ensure_shape(n, n)?;
        Ok(match self {
            FeatureTransform::Hartley(h) => h.matrix().matmul(image).matmul(h.matrix()),
            FeatureTransform::Npt(op) => op.apply(image),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceFeature {
    corner_size: usize,
    vector: Vec<f64>,
}

impl FaceFeature {
    pub fn from_vec(corner_size: usize, vector: Vec<f64>) -> Result<Self> {
        if corner_size == 0 || vector.len() != 4 * corner_size * corner_size {
            return Err(Error::Shape(alloc::format!(
                "feature of length {} does not match corner size {corner_size}",
                vector.len()
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("feature has non-finite values".into()));
        }
        Ok(FaceFeature {
            corner_size,
            vector,
        })
    }

    pub fn corner_size(&self) -> usize {
        self.corner_size
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.vector
    }
}

/// Concatenate the four `s x s` corners of a transformed image.
pub fn corner_feature(transformed: &Matrix, s: usize) -> Result<FaceFeature> {
    let n = transformed.rows();
    if !transformed.is_square() || s == 0 || 2 * s > n {
        return Err(Error::InvalidArgument(alloc::format!(
            "corner size must lie in 1..={}, got {s}",
            n / 2
        )));
    }
    let far = n - s;
    let mut vector = Vec::with_capacity(4 * s * s);
    for (r0, c0) in [(0, 0), (0, far), (far, 0), (far, far)] {
        for i in r0..r0 + s {
            vector.extend_from_slice(&transformed.row(i)[c0..c0 + s]);
        }
    }
    FaceFeature::from_vec(s, vector)
}

pub fn extract_features_with(
    image: &Matrix,
    s: usize,
    transform: &FeatureTransform,
) -> Result<FaceFeature> {
    corner_feature(&transform.apply(image)?, s)
}

/// Hartley features of a 128x128 image.
pub fn extract_features(image: &Matrix, s: usize) -> Result<FaceFeature> {
    image.ensure_shape(FACE_SIDE, FACE_SIDE)?;
    extract_features_with(image, s, &FeatureTransform::hartley(FACE_SIDE)?)
}

pub fn euclidean_distance(a: &FaceFeature, b: &FaceFeature) -> Result<f64> {
    if a.corner_size != b.corner_size {
        return Err(Error::InvalidArgument(alloc::format!(
            "corner sizes differ: {} vs {}",
            a.corner_size,
            b.corner_size
        )));
    }
    let sq: f64 = a
        .vector
        .iter()
        .zip(&b.vector)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok(libm::sqrt(sq))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match<'a> {
    pub label: &'a str,
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gallery {
    corner_size: usize,
    entries: Vec<(String, FaceFeature)>,
}

impl Gallery {
    pub fn new(corner_size: usize) -> Self {
        Gallery {
            corner_size,
            entries: Vec::new(),
        }
    }

    pub fn corner_size(&self) -> usize {
        self.corner_size
    }

    pub fn entries(&self) -> &[(String, FaceFeature)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn enroll(&mut self, label: impl Into<String>, feature: FaceFeature) -> Result<()> {
        if feature.corner_size != self.corner_size {
            return Err(Error::InvalidArgument(alloc::format!(
                "gallery uses corner size {}, feature has {}",
                self.corner_size,
                feature.corner_size
            )));
        }
        self.entries.push((label.into(), feature));
        Ok(())
    }

    /// Nearest entry; the earliest enrolled wins ties.
    pub fn best_match(&self, query: &FaceFeature) -> Result<Match<'_>> {
        let mut best: Option<Match<'_>> = None;
        for (index, (label, feature)) in self.entries.iter().enumerate() {
            let distance = euclidean_distance(query, feature)?;
            if best.as_ref().is_none_or(|b| distance < b.distance) {
                best = Some(Match {
                    label,
                    index,
                    distance,
                });
            }
        }
        best.ok_or(Error::EmptyGallery)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImage {
    pub label: String,
    pub image: Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRole {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyRow {
    pub corner_size: usize,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Rank-1 accuracy for each corner size. `roles[i]` assigns `dataset[i]`.
pub fn evaluate_split(
    dataset: &[LabeledImage],
    roles: &[SplitRole],
    corner_sizes: &[usize],
    transform: &FeatureTransform,
) -> Result<Vec<AccuracyRow>> {
    if roles.len() != dataset.len() {
        return Err(Error::Config(alloc::format!(
            "split assigns {} images but the dataset has {}",
            roles.len(),
            dataset.len()
        )));
    }
    let has_train = |label: &str| {
        dataset
            .iter()
            .zip(roles)
            .any(|(d, r)| *r == SplitRole::Train && d.label == label)
    };
    let mut tests = 0;
    for (item, role) in dataset.iter().zip(roles) {
        if *role == SplitRole::Test {
            tests += 1;
            if !has_train(&item.label) {
                return Err(Error::Config(alloc::format!(
                    "test identity '{}' has no trainee image",
                    item.label
                )));
            }
        }
    }
    if tests == 0 {
        return Err(Error::Config("split has no test images".into()));
    }

    let transformed = dataset
        .iter()
        .map(|d| transform.apply(&preprocess(&d.image)?))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Vec::with_capacity(corner_sizes.len());
    for &s in corner_sizes {
        let mut gallery = Gallery::new(s);
        let mut queries = Vec::new();
        for ((item, role), t) in dataset.iter().zip(roles).zip(&transformed) {
            let feature = corner_feature(t, s)?;
            match role {
                SplitRole::Train => gallery.enroll(item.label.clone(), feature)?,
                SplitRole::Test => queries.push((item.label.as_str(), feature)),
            }
        }
        let mut correct = 0;
        for (label, feature) in &queries {
            if gallery.best_match(feature)?.label == *label {
                correct += 1;
            }
        }
        table.push(AccuracyRow {
            corner_size: s,
            correct,
            total: queries.len(),
            accuracy: correct as f64 / queries.len() as f64,
        });
    }
    Ok(table)
}
