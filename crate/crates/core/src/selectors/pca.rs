use super::{AffineProjection, Reducer};
use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// Top-`k` principal axes of the sample covariance.
pub fn pca_fit(features: &FeatureMatrix, k: usize) -> Result<Reducer> {
    let (n, d) = (features.n_samples(), features.n_features());
    if k == 0 || k > n.min(d) {
        return Err(Error::InvalidConfig(format!("pca needs 1 <= k <= {}, got {k}", n.min(d))));
    }
    let mut mean = vec![0.0; d];
    for row in features.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in features.rows() {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *c = v - m;
        }
        for a in 0..d {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            let out = &mut cov[a * d..a * d + a + 1];
            for (o, cb) in out.iter_mut().zip(&centered) {
                *o += ca * cb;
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for a in 0..d {
        for b in 0..=a {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }

    let eig = symmetric_eigen(&cov, d);
    Ok(Reducer::Projection(AffineProjection {
        mean,
        components: eig.vectors.into_iter().take(k).collect(),
        eigenvalues: eig.values.into_iter().take(k).collect(),
    }))
}

/// `(X - mean) · Pᵀ`.
pub fn pca_transform(reducer: &Reducer, features: &FeatureMatrix) -> Result<FeatureMatrix> {
    let Reducer::Projection(p) = reducer else {
        return Err(Error::InvalidConfig("pca_transform needs a projection reducer".into()));
    };
    let d = p.mean.len();
    if features.n_features() != d {
        return Err(Error::DimensionMismatch { expected: d, got: features.n_features() });
    }
    let k = p.components.len();
    let mut values = Vec::with_capacity(features.n_samples() * k);
    let mut centered = vec![0.0; d];
    for row in features.rows() {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&p.mean)) {
            *c = v - m;
        }
        values.extend(p.components.iter().map(|comp| comp.iter().zip(&centered).map(|(a, b)| a * b).sum::<f64>()));
    }
    FeatureMatrix::new(features.n_samples(), k, values, features.ids().to_vec())
}
