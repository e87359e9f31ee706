//! Flatten, standardize, PCA bottleneck and angular rescale.
//!
//! Every transform here is fitted from a training matrix and then applied
//! unchanged to any other rows.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::products::RadarProduct;
use crate::{par, Error, Result};

/// Floor on the standardization scale so constant columns map to zero.
pub const SCALE_FLOOR: f64 = 1e-12;

/// Rows are samples, columns are features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub labels: Vec<usize>,
}

impl FeatureMatrix {
    pub fn new(values: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != values.nrows() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} labels", values.nrows()),
                got: format!("{} labels", labels.len()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("feature matrix holds non-finite values".into()));
        }
        Ok(FeatureMatrix { values, labels })
    }

    /// Row-major flattening of each product into one row.
    pub fn from_products<'a>(products: impl IntoIterator<Item = &'a RadarProduct>) -> Result<Self> {
        let products: Vec<&RadarProduct> = products.into_iter().collect();
        let Some(first) = products.first() else {
            return Ok(FeatureMatrix {
                values: Array2::zeros((0, 0)),
                labels: Vec::new(),
            });
        };
        let shape = first.shape();
        let cols = shape.0 * shape.1;
        let mut values = Array2::<f64>::zeros((products.len(), cols));
        for (mut row, p) in values.outer_iter_mut().zip(&products) {
            if p.shape() != shape {
                return Err(Error::ShapeMismatch {
                    expected: format!("{shape:?}"),
                    got: format!("{:?}", p.shape()),
                });
            }
            for (dst, &v) in row.iter_mut().zip(p.values.iter()) {
                *dst = f64::from(v);
            }
        }
        FeatureMatrix::new(values, products.iter().map(|p| p.label).collect())
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    /// First `d` columns.
    pub fn leading(&self, d: usize) -> FeatureMatrix {
        FeatureMatrix {
            values: self.values.slice(s![.., ..d]).to_owned(),
            labels: self.labels.clone(),
        }
    }
}

fn for_each_row_mut(values: &mut Array2<f64>, f: impl Fn(&mut [f64]) + Sync + Send) {
    let cols = values.ncols();
    if cols == 0 {
        return;
    }
    let data = values.as_slice_mut().expect("standard layout");
    par::for_each_chunk_mut(data, cols, |_, row| f(row));
}

fn column_means(values: &ArrayView2<f64>) -> Array1<f64> {
    let mut mean = Array1::<f64>::zeros(values.ncols());
    for row in values.outer_iter() {
        mean += &row;
    }
    mean / values.nrows() as f64
}

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Array1<f64>,
    pub scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let mean = column_means(&train.values.view());
        let mut var = Array1::<f64>::zeros(train.cols());
        for row in train.values.outer_iter() {
            for ((v, &x), &m) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
                *v += (x - m) * (x - m);
            }
        }
        let n = train.rows() as f64;
        let scale = var.mapv(|v| (v / n).sqrt().max(SCALE_FLOOR));
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let mut out = x.clone();
        self.apply_in_place(&mut out)?;
        Ok(out)
    }

    pub fn apply_in_place(&self, x: &mut FeatureMatrix) -> Result<()> {
        if x.cols() != self.mean.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features", self.mean.len()),
                got: format!("{} features", x.cols()),
            });
        }
        let (mean, scale) = (self.mean.as_slice().unwrap(), self.scale.as_slice().unwrap());
        for_each_row_mut(&mut x.values, |row| {
            for ((v, m), s) in row.iter_mut().zip(mean).zip(scale) {
                *v = (*v - m) / s;
            }
        });
        Ok(())
    }
}

pub fn fit_standardizer(train: &FeatureMatrix) -> Result<Standardizer> {
    Standardizer::fit(train)
}

pub fn apply_standardizer(s: &Standardizer, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    s.apply(x)
}

/// Principal axes of a centred training matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Orthonormal rows, `[d, D]`, by descending variance.
    pub components: Array2<f64>,
    pub center: Array1<f64>,
    /// Population variance captured by each component.
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
}

const GRAM_BLOCK: usize = 32;

/// `x x^T`, computed in fixed row blocks so the result is identical whether
/// the blocks run serially or in parallel.
fn gram_rows(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let blocks = n.div_ceil(GRAM_BLOCK);
    let xt = x.t();
    let parts = par::map_range(blocks, |b| {
        let lo = b * GRAM_BLOCK;
        let hi = (lo + GRAM_BLOCK).min(n);
        x.slice(s![lo..hi, ..]).dot(&xt)
    });
    let mut g = Array2::<f64>::zeros((n, n));
    for (b, part) in parts.into_iter().enumerate() {
        let lo = b * GRAM_BLOCK;
        g.slice_mut(s![lo..lo + part.nrows(), ..]).assign(&part);
    }
    let sym = (&g + &g.t()) * 0.5;
    sym
}

/// Eigenpairs of a symmetric matrix, eigenvalues descending.
fn sorted_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let eig = SymmetricEigen::new(dm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Modified Gram-Schmidt on the rows of `basis`.
fn orthonormalize_rows(basis: &mut Array2<f64>) {
    for i in 0..basis.nrows() {
        for j in 0..i {
            let proj = basis.row(i).dot(&basis.row(j));
            let bj = basis.row(j).to_owned();
            basis.row_mut(i).scaled_add(-proj, &bj);
        }
        let norm = basis.row(i).dot(&basis.row(i)).sqrt();
        basis.row_mut(i).mapv_inplace(|v| v / norm);
    }
}

/// Flips each component so its largest-magnitude coordinate is positive.
fn fix_signs(basis: &mut Array2<f64>) {
    for mut row in basis.outer_iter_mut() {
        let pivot = row
            .iter()
            .fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            row.mapv_inplace(|v| -v);
        }
    }
}

impl PcaModel {
    pub fn fit(train: &FeatureMatrix, d: usize) -> Result<Self> {
        let (n, cols) = (train.rows(), train.cols());
        if n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        if d == 0 || d > cols || d + 1 > n {
            return Err(Error::PcaDimension { d, rows: n, cols });
        }
        let center = column_means(&train.values.view());
        let mut xc = train.values.clone();
        let c = center.as_slice().unwrap().to_vec();
        for_each_row_mut(&mut xc, |row| row.iter_mut().zip(&c).for_each(|(v, m)| *v -= m));
        let total_variance = xc.iter().map(|v| v * v).sum::<f64>() / n as f64;

        let (eigenvalues, mut components) = if cols <= n {
            let cov = xc.t().dot(&xc);
            let cov = (&cov + &cov.t()) * 0.5;
            let (vals, vecs) = sorted_eigen(&cov);
            (vals, vecs.slice(s![.., ..d]).t().to_owned())
        } else {
            let (vals, u) = sorted_eigen(&gram_rows(&xc));
            let top = u.slice(s![.., ..d]);
            let mut v = top.t().dot(&xc);
            for (k, mut row) in v.outer_iter_mut().enumerate() {
                let s = vals[k].max(0.0).sqrt();
                row.mapv_inplace(|x| x / s);
            }
            (vals, v)
        };
        let lead = eigenvalues[0].max(0.0);
        for (k, &ev) in eigenvalues.iter().take(d).enumerate() {
            if !(ev > lead * 1e-20) || lead == 0.0 {
                return Err(Error::RankDeficient { index: k });
            }
        }
        orthonormalize_rows(&mut components);
        fix_signs(&mut components);
        Ok(PcaModel {
            components,
            center,
            explained_variance: eigenvalues.iter().take(d).map(|ev| ev / n as f64).collect(),
            total_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.nrows()
    }

    /// Model restricted to the leading `d` components.
    pub fn truncate(&self, d: usize) -> PcaModel {
        let d = d.min(self.dim());
        PcaModel {
            components: self.components.slice(s![..d, ..]).to_owned(),
            center: self.center.clone(),
            explained_variance: self.explained_variance[..d].to_vec(),
            total_variance: self.total_variance,
        }
    }

    pub fn explained_variance_ratio(&self) -> f64 {
        if self.total_variance == 0.0 {
            return 0.0;
        }
        self.explained_variance.iter().sum::<f64>() / self.total_variance
    }

    pub fn project(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.cols() != self.center.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features", self.center.len()),
                got: format!("{} features", x.cols()),
            });
        }
        let mut xc = x.values.clone();
        let c = self.center.as_slice().unwrap().to_vec();
        for_each_row_mut(&mut xc, |row| row.iter_mut().zip(&c).for_each(|(v, m)| *v -= m));
        Ok(FeatureMatrix {
            values: xc.dot(&self.components.t()),
            labels: x.labels.clone(),
        })
    }
}

pub fn fit_pca(train: &FeatureMatrix, d: usize) -> Result<PcaModel> {
    PcaModel::fit(train, d)
}

pub fn project(p: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    p.project(x)
}

/// Per-feature min-max map onto `[0, pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularScaler {
    pub min: Array1<f64>,
    pub max: Array1<f64>,
}

impl AngularScaler {
    pub fn fit(train: &FeatureMatrix) -> Result<Self> {
        if train.rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let min = train.values.fold_axis(Axis(0), f64::INFINITY, |a, &b| a.min(b));
        let max = train.values.fold_axis(Axis(0), f64::NEG_INFINITY, |a, &b| a.max(b));
        Ok(AngularScaler { min, max })
    }

    /// Maps train min to 0 and train max to pi, clipping anything outside.
    /// Zero-span features map to 0.
    pub fn apply(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.cols() != self.min.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} features", self.min.len()),
                got: format!("{} features", x.cols()),
            });
        }
        let mut values = x.values.clone();
        for mut row in values.outer_iter_mut() {
            for ((v, &lo), &hi) in row.iter_mut().zip(&self.min).zip(&self.max) {
                let span = hi - lo;
                *v = if span > 0.0 {
                    ((*v - lo) / span * PI).clamp(0.0, PI)
                } else {
                    0.0
                };
            }
        }
        Ok(FeatureMatrix {
            values,
            labels: x.labels.clone(),
        })
    }
}

pub fn fit_angular(train: &FeatureMatrix) -> Result<AngularScaler> {
    AngularScaler::fit(train)
}

pub fn apply_angular(a: &AngularScaler, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    a.apply(x)
}

/// Standardizer plus PCA basis, both fitted from training rows only.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePipeline {
    pub standardizer: Standardizer,
    pub pca: PcaModel,
}

impl FeaturePipeline {
    /// Fits on `train` and returns the pipeline with the projected training rows.
    pub fn fit(mut train: FeatureMatrix, d: usize) -> Result<(Self, FeatureMatrix)> {
        let standardizer = Standardizer::fit(&train)?;
        standardizer.apply_in_place(&mut train)?;
        let pca = PcaModel::fit(&train, d)?;
        let projected = pca.project(&train)?;
        Ok((FeaturePipeline { standardizer, pca }, projected))
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.pca.project(&self.standardizer.apply(x)?)
    }
}
