//! Principal component analysis of an embedding matrix.
//!
//! The model is fitted through a thin SVD of the mean-centered data. The SVD is obtained from
//! whichever Gram matrix is smaller: `Xc·Xcᵀ` (n×n) when there are fewer rows than columns,
//! `Xcᵀ·Xc` (d×d) otherwise. For 25,088-wide CNN features this avoids ever forming a d×d
//! matrix. All arithmetic is 64-bit even though inputs are stored as `f32`.

use alloc::vec;
use alloc::vec::Vec;
use libm::{fabs, sqrt};

use crate::corpus::{CorpusError, EmbeddingMatrix};
use crate::linalg::symmetric_eigen;

/// Default number of retained components.
pub const DEFAULT_COMPONENTS: usize = 50;

/// Maximum absolute deviation of `components·componentsᵀ` from the identity.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-6;

/// Rows are centered in blocks of this many when forming the row Gram matrix.
const GRAM_BLOCK: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PcaError {
    #[error("PCA needs at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("PCA needs at least one column")]
    NoColumns,
    #[error("number of components must be positive")]
    ZeroComponents,
    #[error("non-finite input value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("dimension mismatch: model expects {expected} columns, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("component rows are not orthonormal (max deviation {0:e})")]
    NotOrthonormal(f64),
    #[error(transparent)]
    Shape(#[from] CorpusError),
}

/// A fitted projection: mean vector, `k x d` orthonormal components, explained variances.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    d: usize,
    k: usize,
    mean: Vec<f64>,
    components: Vec<f64>,
    explained_variance: Vec<f64>,
    explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    /// Reassembles a model from stored parts, checking every model invariant.
    pub fn from_parts(
        d: usize,
        k: usize,
        mean: Vec<f64>,
        components: Vec<f64>,
        explained_variance: Vec<f64>,
        explained_variance_ratio: Vec<f64>,
    ) -> Result<Self, PcaError> {
        if d == 0 || k == 0 || k > d {
            return Err(PcaError::InvalidModel("component count must be in 1..=d"));
        }
        if mean.len() != d
            || Some(components.len()) != k.checked_mul(d)
            || explained_variance.len() != k
            || explained_variance_ratio.len() != k
        {
            return Err(PcaError::InvalidModel("field lengths do not match d and k"));
        }
        let all = mean.iter().chain(&components).chain(&explained_variance).chain(&explained_variance_ratio);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(PcaError::InvalidModel("non-finite value"));
        }
        if explained_variance.iter().any(|&v| v < 0.0) {
            return Err(PcaError::InvalidModel("negative explained variance"));
        }
        if explained_variance.windows(2).any(|w| w[1] > w[0]) {
            return Err(PcaError::InvalidModel("explained variance is not non-increasing"));
        }
        if explained_variance_ratio.iter().any(|&r| !(0.0..=1.0).contains(&r)) {
            return Err(PcaError::InvalidModel("explained variance ratio outside [0, 1]"));
        }
        if explained_variance_ratio.iter().sum::<f64>() > 1.0 + 1e-9 {
            return Err(PcaError::InvalidModel("explained variance ratios sum above 1"));
        }
        let model = Self { d, k, mean, components, explained_variance, explained_variance_ratio };
        let deviation = model.orthonormality_deviation();
        if deviation.is_nan() || deviation >= ORTHONORMALITY_TOLERANCE {
            return Err(PcaError::NotOrthonormal(deviation));
        }
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn n_components(&self) -> usize {
        self.k
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Row-major `k x d`.
    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j * self.d..(j + 1) * self.d]
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn explained_variance_ratio(&self) -> &[f64] {
        &self.explained_variance_ratio
    }

    /// Largest `|components·componentsᵀ − I|` entry.
    pub fn orthonormality_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in i..self.k {
                let dot = dot(self.component(i), self.component(j));
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(fabs(dot - target));
            }
        }
        worst
    }

    /// Projects one raw row onto the components, in full precision.
    pub fn project(&self, row: &[f32]) -> Result<Vec<f64>, PcaError> {
        if row.len() != self.d {
            return Err(PcaError::DimensionMismatch { expected: self.d, actual: row.len() });
        }
        let centered: Vec<f64> = row.iter().zip(&self.mean).map(|(&x, m)| f64::from(x) - m).collect();
        Ok((0..self.k).map(|j| dot(&centered, self.component(j))).collect())
    }

    /// Maps reduced coordinates back to the input space: `mean + Σ yⱼ·componentⱼ`.
    pub fn reconstruct(&self, coords: &[f64]) -> Result<Vec<f64>, PcaError> {
        if coords.len() != self.k {
            return Err(PcaError::DimensionMismatch { expected: self.k, actual: coords.len() });
        }
        let mut out = self.mean.clone();
        for (j, &y) in coords.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.component(j)) {
                *o += y * c;
            }
        }
        Ok(out)
    }

    /// Projects every row; the result is stored as `f32` like any other embedding matrix.
    pub fn transform(&self, matrix: &EmbeddingMatrix) -> Result<EmbeddingMatrix, PcaError> {
        if matrix.d() != self.d {
            return Err(PcaError::DimensionMismatch { expected: self.d, actual: matrix.d() });
        }
        let mut values = Vec::with_capacity(matrix.n() * self.k);
        for row in matrix.rows() {
            values.extend(self.project(row)?.into_iter().map(|y| y as f32));
        }
        Ok(EmbeddingMatrix::new(matrix.n(), self.k, values)?)
    }
}

/// Fits a `k`-component model. `k` is clamped to `min(k, n − 1, d)`.
pub fn fit(matrix: &EmbeddingMatrix, k: usize) -> Result<PcaModel, PcaError> {
    let (n, d) = (matrix.n(), matrix.d());
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    if d == 0 {
        return Err(PcaError::NoColumns);
    }
    if k == 0 {
        return Err(PcaError::ZeroComponents);
    }
    if let Some((row, column)) = matrix.first_non_finite() {
        return Err(PcaError::NonFinite { row, column });
    }
    let k_eff = k.min(n - 1).min(d);
    if k_eff < k {
        log::info!("clamping PCA components from {k} to {k_eff} (n = {n}, d = {d})");
    }

    let mean = column_mean(matrix);
    let total_ss: f64 = matrix.rows().map(|row| centered(row, &mean).iter().map(|x| x * x).sum::<f64>()).sum();

    let (sq_singular, mut basis) = if n <= d {
        row_gram_route(matrix, &mean, k_eff)
    } else {
        column_gram_route(matrix, &mean, k_eff)
    };

    orthonormalize(&mut basis, d);
    for component in basis.iter_mut() {
        apply_sign_convention(component);
    }

    let dof = (n - 1) as f64;
    let explained_variance: Vec<f64> = sq_singular.iter().map(|&s| s.max(0.0) / dof).collect();
    let total_variance = total_ss / dof;
    let explained_variance_ratio = explained_variance
        .iter()
        .map(|&v| if total_variance > 0.0 { (v / total_variance).clamp(0.0, 1.0) } else { 0.0 })
        .collect();

    let components = basis.into_iter().flatten().collect();
    Ok(PcaModel { d, k: k_eff, mean, components, explained_variance, explained_variance_ratio })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn column_mean(matrix: &EmbeddingMatrix) -> Vec<f64> {
    let mut mean = vec![0.0; matrix.d()];
    for row in matrix.rows() {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += f64::from(x);
        }
    }
    let n = matrix.n() as f64;
    for m in &mut mean {
        *m /= n;
    }
    mean
}

fn centered(row: &[f32], mean: &[f64]) -> Vec<f64> {
    row.iter().zip(mean).map(|(&x, m)| f64::from(x) - m).collect()
}

/// n ≤ d: eigendecompose `Xc·Xcᵀ`, then `vⱼ = Xcᵀ·uⱼ / σⱼ`.
fn row_gram_route(matrix: &EmbeddingMatrix, mean: &[f64], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (matrix.n(), matrix.d());
    let mut gram = vec![0.0; n * n];
    for bi in (0..n).step_by(GRAM_BLOCK) {
        let bi_end = (bi + GRAM_BLOCK).min(n);
        let block_i: Vec<Vec<f64>> = (bi..bi_end).map(|r| centered(matrix.row(r), mean)).collect();
        for bj in (0..=bi).step_by(GRAM_BLOCK) {
            let bj_end = (bj + GRAM_BLOCK).min(n);
            let block_j: Vec<Vec<f64>> = if bj == bi {
                block_i.clone()
            } else {
                (bj..bj_end).map(|r| centered(matrix.row(r), mean)).collect()
            };
            for (ii, row_i) in block_i.iter().enumerate() {
                for (jj, row_j) in block_j.iter().enumerate() {
                    let (r, c) = (bi + ii, bj + jj);
                    if c > r {
                        continue;
                    }
                    let g = dot(row_i, row_j);
                    gram[r * n + c] = g;
                    gram[c * n + r] = g;
                }
            }
        }
    }
    let eig = symmetric_eigen(gram, n);
    let lambda_max = eig.values.first().copied().unwrap_or(0.0).max(0.0);
    // Directions whose squared singular value is lost in round-off of the Gram matrix are
    // not recoverable from it; they are left empty and completed in `orthonormalize`.
    let floor = lambda_max * (n as f64) * f64::EPSILON * 1e3;

    let mut basis = vec![vec![0.0; d]; k];
    let mut sq_singular = Vec::with_capacity(k);
    for (j, v) in basis.iter_mut().enumerate() {
        let lambda = eig.values[j];
        sq_singular.push(lambda);
        if lambda <= floor || lambda <= 0.0 {
            continue;
        }
        let sigma = sqrt(lambda);
        let u = eig.vector(j);
        for (r, &ur) in u.iter().enumerate() {
            if ur == 0.0 {
                continue;
            }
            let w = ur / sigma;
            for (vc, (&x, m)) in v.iter_mut().zip(matrix.row(r).iter().zip(mean)) {
                *vc += w * (f64::from(x) - m);
            }
        }
    }
    (sq_singular, basis)
}

/// n > d: eigendecompose `Xcᵀ·Xc`; its eigenvectors are the right singular vectors.
fn column_gram_route(matrix: &EmbeddingMatrix, mean: &[f64], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = matrix.d();
    let mut scatter = vec![0.0; d * d];
    for row in matrix.rows() {
        let x = centered(row, mean);
        for (r, &xr) in x.iter().enumerate() {
            let dst = &mut scatter[r * d..r * d + r + 1];
            for (s, &xc) in dst.iter_mut().zip(&x) {
                *s += xr * xc;
            }
        }
    }
    for r in 0..d {
        for c in 0..r {
            scatter[c * d + r] = scatter[r * d + c];
        }
    }
    let eig = symmetric_eigen(scatter, d);
    let sq_singular = eig.values[..k].to_vec();
    let basis = (0..k).map(|j| eig.vector(j).to_vec()).collect();
    (sq_singular, basis)
}

/// Re-orthonormalizes the basis in order with two passes of modified Gram–Schmidt. Empty or
/// degenerate vectors are replaced by the first standard basis vector that is independent of
/// the ones already accepted.
fn orthonormalize(basis: &mut [Vec<f64>], d: usize) {
    let mut next_candidate = 0usize;
    for j in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(j);
        let v = &mut rest[0];
        if !reduce_against(v, done) {
            loop {
                assert!(next_candidate < d, "cannot complete an orthonormal basis of size {} in {d} dimensions", j + 1);
                v.iter_mut().for_each(|x| *x = 0.0);
                v[next_candidate] = 1.0;
                next_candidate += 1;
                if reduce_against(v, done) {
                    break;
                }
            }
        }
    }
}

/// Orthogonalizes `v` against `done` and normalizes it. Returns false if nothing of `v`
/// survives the projection.
fn reduce_against(v: &mut [f64], done: &[Vec<f64>]) -> bool {
    let start = sqrt(dot(v, v));
    if start == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for q in done {
            let proj = dot(v, q);
            for (x, qx) in v.iter_mut().zip(q) {
                *x -= proj * qx;
            }
        }
    }
    let norm = sqrt(dot(v, v));
    if norm <= start * 1e-6 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    true
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
fn apply_sign_convention(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if fabs(*x) > fabs(v[best]) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f32]]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rank_one_line() {
        let m = matrix(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        let model = fit(&m, 1).unwrap();
        assert_eq!(model.n_components(), 1);
        assert!((model.explained_variance_ratio()[0] - 1.0).abs() < 1e-9);
        let s5 = 5f64.sqrt();
        assert!((model.component(0)[0] - 1.0 / s5).abs() < 1e-12);
        assert!((model.component(0)[1] - 2.0 / s5).abs() < 1e-12);
        // sample variance of the projection: coordinates are -√5, 0, √5
        assert!((model.explained_variance()[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_line_projection_is_isometric() {
        let m = matrix(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]]);
        let model = fit(&m, 1).unwrap();
        let y: Vec<f64> = m.rows().map(|r| model.project(r).unwrap()[0]).collect();
        let orig = |a: usize, b: usize| {
            let (p, q) = (m.row(a), m.row(b));
            (((p[0] - q[0]) as f64).powi(2) + ((p[1] - q[1]) as f64).powi(2)).sqrt()
        };
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(((y[a] - y[b]).abs() - orig(a, b)).abs() < 1e-12);
        }
        let t = model.transform(&m).unwrap();
        assert_eq!(t.d(), 1);
    }

    #[test]
    fn isotropic_cross_has_equal_variances() {
        let m = matrix(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        let model = fit(&m, 2).unwrap();
        let ev = model.explained_variance();
        assert!((ev[0] - ev[1]).abs() < 1e-12);
        assert!((ev[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!(model.orthonormality_deviation() < 1e-12);
    }

    #[test]
    fn mean_row_maps_to_origin() {
        let m = matrix(&[&[1.0, 0.0, 2.0], &[3.0, 2.0, 2.0], &[2.0, 4.0, 8.0], &[2.0, 2.0, 4.0]]);
        let model = fit(&m, 3).unwrap();
        let mean_row: Vec<f32> = model.mean().iter().map(|&x| x as f32).collect();
        assert_eq!(mean_row, [2.0, 2.0, 4.0]);
        assert!(model.project(&mean_row).unwrap().iter().all(|&y| y == 0.0));
        assert!(model.transform(&m).unwrap().row(3).iter().all(|&y| y == 0.0));
    }

    #[test]
    fn clamps_component_count() {
        let m = matrix(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(fit(&m, 50).unwrap().n_components(), 2);
    }

    #[test]
    fn rank_deficient_basis_is_completed() {
        // five rows on a line in 8 dimensions: one real direction, the rest completed
        let rows: Vec<Vec<f32>> = (0..5).map(|i| (0..8).map(|c| (i * (c + 1)) as f32).collect()).collect();
        let m = EmbeddingMatrix::from_rows(&rows).unwrap();
        let model = fit(&m, 4).unwrap();
        assert_eq!(model.n_components(), 4);
        assert!(model.orthonormality_deviation() < 1e-9);
        assert!((model.explained_variance_ratio()[0] - 1.0).abs() < 1e-9);
        assert!(model.explained_variance()[1..].iter().all(|&v| v < 1e-9));
    }

    #[test]
    fn identical_rows() {
        let m = matrix(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let model = fit(&m, 2).unwrap();
        assert!(model.explained_variance().iter().all(|&v| v == 0.0));
        assert!(model.explained_variance_ratio().iter().all(|&v| v == 0.0));
        assert!(model.orthonormality_deviation() < 1e-12);
    }

    #[test]
    fn error_paths() {
        assert_eq!(fit(&matrix(&[&[1.0, 2.0]]), 1), Err(PcaError::TooFewRows(1)));
        assert_eq!(fit(&matrix(&[&[1.0], &[2.0]]), 0), Err(PcaError::ZeroComponents));
        assert_eq!(fit(&matrix(&[&[1.0], &[f32::INFINITY]]), 1), Err(PcaError::NonFinite { row: 1, column: 0 }));
        let model = fit(&matrix(&[&[1.0, 2.0], &[2.0, 1.0]]), 1).unwrap();
        assert_eq!(
            model.transform(&matrix(&[&[1.0, 2.0, 3.0]])),
            Err(PcaError::DimensionMismatch { expected: 2, actual: 3 })
        );
    }

    #[test]
    fn from_parts_rejects_skewed_components() {
        let good = fit(&matrix(&[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 1.0]]), 2).unwrap();
        let rebuilt = PcaModel::from_parts(
            2,
            2,
            good.mean().to_vec(),
            good.components().to_vec(),
            good.explained_variance().to_vec(),
            good.explained_variance_ratio().to_vec(),
        )
        .unwrap();
        assert_eq!(rebuilt, good);
        let mut skewed = good.components().to_vec();
        skewed[0] *= 1.01;
        let err = PcaModel::from_parts(
            2,
            2,
            good.mean().to_vec(),
            skewed,
            good.explained_variance().to_vec(),
            good.explained_variance_ratio().to_vec(),
        )
        .unwrap_err();
        assert!(matches!(err, PcaError::NotOrthonormal(_)));
    }

    #[test]
    fn sign_convention_makes_largest_entry_positive() {
        let mut v = vec![0.1, -0.9, 0.3];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }
}
