use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vlink_core::pca::{fit, PcaModel};
use vlink_core::EmbeddingMatrix;

fn random_matrix(rng: &mut StdRng, n: usize, d: usize) -> EmbeddingMatrix {
    let values = (0..n * d).map(|_| rng.random_range(-3.0f32..3.0)).collect();
    EmbeddingMatrix::new(n, d, values).unwrap()
}

/// Eigenpairs of the sample covariance, sorted descending.
fn covariance_oracle(m: &EmbeddingMatrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (m.n(), m.d());
    let x = DMatrix::from_fn(n, d, |r, c| f64::from(m.row(r)[c]));
    let mean = x.row_mean();
    let centered = DMatrix::from_fn(n, d, |r, c| x[(r, c)] - mean[c]);
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    (values, vectors)
}

fn sign_agnostic_gap(a: &[f64], b: &[f64]) -> f64 {
    let plus = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let minus = a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max);
    plus.min(minus)
}

fn check_against_oracle(m: &EmbeddingMatrix, model: &PcaModel) {
    let (values, vectors) = covariance_oracle(m);
    for j in 0..model.n_components() {
        let rel = (model.explained_variance()[j] - values[j]).abs() / values[j].abs().max(1e-300);
        assert!(rel < 1e-8, "variance {j}: {} vs {} (rel {rel:e})", model.explained_variance()[j], values[j]);
        let gap = sign_agnostic_gap(model.component(j), &vectors[j]);
        assert!(gap < 1e-6, "component {j} differs by {gap:e}");
    }
    assert!(model.orthonormality_deviation() < 1e-6);
}

#[test]
fn matches_covariance_eigendecomposition_20x8() {
    let mut rng = StdRng::seed_from_u64(20);
    let m = random_matrix(&mut rng, 20, 8);
    let model = fit(&m, 8).unwrap();
    assert_eq!(model.n_components(), 8);
    check_against_oracle(&m, &model);
}

#[test]
fn matches_oracle_when_rows_are_fewer_than_columns() {
    let mut rng = StdRng::seed_from_u64(21);
    let m = random_matrix(&mut rng, 12, 40);
    let model = fit(&m, 50).unwrap();
    assert_eq!(model.n_components(), 11);
    check_against_oracle(&m, &model);
}

#[test]
fn fit_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(22);
    let m = random_matrix(&mut rng, 30, 70);
    assert_eq!(fit(&m, 10).unwrap(), fit(&m, 10).unwrap());
}

#[test]
fn full_projection_preserves_centered_distances() {
    let mut rng = StdRng::seed_from_u64(23);
    for (n, d) in [(25, 6), (8, 30)] {
        let m = random_matrix(&mut rng, n, d);
        let model = fit(&m, n.min(d)).unwrap();
        let projected: Vec<Vec<f64>> = m.rows().map(|r| model.project(r).unwrap()).collect();
        for a in 0..n {
            for b in 0..a {
                let orig: f64 = m
                    .row(a)
                    .iter()
                    .zip(m.row(b))
                    .map(|(x, y)| (f64::from(*x) - f64::from(*y)).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let red: f64 = projected[a].iter().zip(&projected[b]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                assert!((orig - red).abs() < 1e-6, "{n}x{d} pair ({a},{b}): {orig} vs {red}");
            }
        }
    }
}

#[test]
fn reconstructs_rank_k_data() {
    // rank-3 data in 12 dimensions built from integer-valued factors
    let mut rng = StdRng::seed_from_u64(24);
    let basis: Vec<Vec<f32>> = (0..3).map(|_| (0..12).map(|_| rng.random_range(-4..=4) as f32).collect()).collect();
    let rows: Vec<Vec<f32>> = (0..30)
        .map(|_| {
            let w: Vec<f32> = (0..3).map(|_| rng.random_range(-3..=3) as f32).collect();
            (0..12).map(|c| (0..3).map(|i| w[i] * basis[i][c]).sum()).collect()
        })
        .collect();
    let m = EmbeddingMatrix::from_rows(&rows).unwrap();
    let model = fit(&m, 3).unwrap();
    let ratio: f64 = model.explained_variance_ratio().iter().sum();
    assert!((ratio - 1.0).abs() < 1e-9);
    for row in m.rows() {
        let back = model.reconstruct(&model.project(row).unwrap()).unwrap();
        for (x, y) in row.iter().zip(back) {
            assert!((f64::from(*x) - y).abs() < 1e-5);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn model_invariants(seed in any::<u64>(), n in 2usize..30, d in 1usize..20, k in 1usize..25) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, d);
        let model = fit(&m, k).unwrap();
        prop_assert_eq!(model.n_components(), k.min(n - 1).min(d));
        prop_assert!(model.orthonormality_deviation() < 1e-6);
        prop_assert!(model.explained_variance().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(model.explained_variance_ratio().iter().sum::<f64>() <= 1.0 + 1e-9);
        for c in 0..model.n_components() {
            let v = model.component(c);
            let (imax, _) = v.iter().enumerate().fold((0, 0.0f64), |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b });
            prop_assert!(v[imax] > 0.0);
        }
    }

    #[test]
    fn full_rank_fit_captures_total_variance(seed in any::<u64>(), n in 3usize..25, d in 1usize..20) {
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, n, d);
        let model = fit(&m, n.max(d)).unwrap();
        let mean: Vec<f64> = (0..d).map(|c| m.rows().map(|r| f64::from(r[c])).sum::<f64>() / n as f64).collect();
        let total: f64 = m.rows()
            .map(|r| r.iter().zip(&mean).map(|(x, mu)| (f64::from(*x) - mu).powi(2)).sum::<f64>())
            .sum::<f64>() / (n as f64 - 1.0);
        let captured: f64 = model.explained_variance().iter().sum();
        prop_assert!((captured - total).abs() <= 1e-6 * total);
    }
}
