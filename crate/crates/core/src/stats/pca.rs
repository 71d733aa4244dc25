use serde::{Deserialize, Serialize};

use super::normalize::{fit_skew_normalize, noisiness_offset, Exponents, SkewNormalizeParams};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Principal axes of a 2-D point cloud. Rows of `components` are PC1 and
/// PC2 in (noisiness, inharmonicity) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Pca2<T> {
    pub mean: [T; 2],
    pub components: [[T; 2]; 2],
    /// Sample variance along PC1 and PC2.
    pub variances: [T; 2],
}

/// Closed-form PCA of a 2-D cloud.
///
/// Points are sorted before accumulation, so the fit is bit-identical for
/// any ordering of the input. PC1 points into the (1, 1) half plane and PC2
/// into the (-1, 1) half plane.
pub fn fit_pca2<T: Scalar>(points: &[[T; 2]]) -> Result<Pca2<T>> {
    if points.len() < 3 {
        return Err(Error::DegenerateCovariance(format!("{} points; at least 3 are needed", points.len())));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateCovariance("non-finite coordinates".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));

    let n = T::from_len(sorted.len());
    let mean = [sorted.iter().map(|p| p[0]).sum::<T>() / n, sorted.iter().map(|p| p[1]).sum::<T>() / n];
    let dof = n - T::one();
    let (mut a, mut b, mut c) = (T::zero(), T::zero(), T::zero());
    for p in &sorted {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        a = a + dx * dx;
        b = b + dx * dy;
        c = c + dy * dy;
    }
    let (a, b, c) = (a / dof, b / dof, c / dof);
    if !(a + c > T::zero()) {
        return Err(Error::DegenerateCovariance("all points coincide".into()));
    }

    let (cos, sin) = if a == c {
        // Equal axis variances: the eigenvectors are the diagonals (or any
        // basis when b is zero too).
        let h = T::FRAC_1_SQRT_2();
        if b >= T::zero() {
            (h, h)
        } else {
            (h, -h)
        }
    } else {
        let theta = T::lit(0.5) * (T::lit(2.0) * b).atan2(a - c);
        (theta.cos(), theta.sin())
    };
    let mut pc1 = [cos, sin];
    let mut pc2 = [-sin, cos];
    let along = |v: [T; 2]| a * v[0] * v[0] + T::lit(2.0) * b * v[0] * v[1] + c * v[1] * v[1];
    let (mut v1, mut v2) = (along(pc1), along(pc2));
    if v2 > v1 {
        std::mem::swap(&mut pc1, &mut pc2);
        std::mem::swap(&mut v1, &mut v2);
    }
    if pc1[0] + pc1[1] < T::zero() {
        pc1 = [-pc1[0], -pc1[1]];
    }
    if pc2[1] - pc2[0] < T::zero() {
        pc2 = [-pc2[0], -pc2[1]];
    }
    Ok(Pca2 { mean, components: [pc1, pc2], variances: [v1.max(T::zero()), v2.max(T::zero())] })
}

impl<T: Scalar> Pca2<T> {
    pub fn project(&self, p: [T; 2]) -> [T; 2] {
        let d = [p[0] - self.mean[0], p[1] - self.mean[1]];
        let [r1, r2] = self.components;
        [r1[0] * d[0] + r1[1] * d[1], r2[0] * d[0] + r2[1] * d[1]]
    }

    pub fn unproject(&self, pc: [T; 2]) -> [T; 2] {
        let [r1, r2] = self.components;
        [self.mean[0] + r1[0] * pc[0] + r2[0] * pc[1], self.mean[1] + r1[1] * pc[0] + r2[1] * pc[1]]
    }
}

/// Normalization of both feature axes followed by a 2-D PCA. Serialized as
/// the portable projection document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Projection<T> {
    /// Noisiness axis.
    pub x_params: SkewNormalizeParams<T>,
    /// HR-inharmonicity axis.
    pub y_params: SkewNormalizeParams<T>,
    pub pca: Pca2<T>,
}

/// Fits the noisiness offset, both skew normalizations and the PCA.
pub fn fit_projection<T: Scalar>(noisiness: &[T], inharmonicity: &[T], exponents: Exponents) -> Result<Projection<T>> {
    if noisiness.len() != inharmonicity.len() {
        return Err(Error::InvalidParameter("feature columns differ in length".into()));
    }
    let x_params = fit_skew_normalize(noisiness, T::lit(exponents.noisiness), noisiness_offset(noisiness))?;
    let y_params = fit_skew_normalize(inharmonicity, T::lit(exponents.inharmonicity), T::zero())?;
    let points: Vec<[T; 2]> = noisiness.iter().zip(inharmonicity).map(|(&x, &y)| [x_params.apply(x), y_params.apply(y)]).collect();
    Ok(Projection { x_params, y_params, pca: fit_pca2(&points)? })
}

impl<T: Scalar> Projection<T> {
    pub fn normalize(&self, noisiness: T, inharmonicity: T) -> [T; 2] {
        [self.x_params.apply(noisiness), self.y_params.apply(inharmonicity)]
    }

    /// `(pc1, pc2)` of a raw feature pair.
    pub fn project(&self, noisiness: T, inharmonicity: T) -> [T; 2] {
        self.pca.project(self.normalize(noisiness, inharmonicity))
    }

    /// Raw `(noisiness, inharmonicity)` for a PC pair.
    pub fn unproject(&self, pc: [T; 2]) -> [T; 2] {
        let n = self.pca.unproject(pc);
        [self.x_params.invert(n[0]), self.y_params.invert(n[1])]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn cloud(seed: u64, n: usize, sx: f64, sy: f64, angle: f64) -> Vec<[f64; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Normal::new(0.0f64, 1.0).unwrap();
        let (s, c) = angle.sin_cos();
        (0..n)
            .map(|_| {
                let u = d.sample(&mut rng) * sx;
                let v = d.sample(&mut rng) * sy;
                [1.0 + c * u - s * v, -2.0 + s * u + c * v]
            })
            .collect()
    }

    #[test]
    fn diagonal_line() {
        let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, i as f64]).collect();
        let p = fit_pca2(&pts).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(p.components[0], [h, h]);
        assert_eq!(p.variances[1], 0.0);
    }

    #[test]
    fn orthonormal_and_signed() {
        for (seed, angle) in [(1, 0.3), (2, 2.0), (3, -1.0), (4, 0.0)] {
            let p = fit_pca2(&cloud(seed, 500, 2.0, 0.5, angle)).unwrap();
            let [r1, r2] = p.components;
            assert!((r1[0] * r1[0] + r1[1] * r1[1] - 1.0).abs() < 1e-12);
            assert!((r2[0] * r2[0] + r2[1] * r2[1] - 1.0).abs() < 1e-12);
            assert!((r1[0] * r2[0] + r1[1] * r2[1]).abs() < 1e-12);
            assert!(r1[0] + r1[1] >= 0.0 && r2[1] - r2[0] >= 0.0);
            assert!(p.variances[0] >= p.variances[1]);
        }
    }

    #[test]
    fn elongated_cloud_along_the_diagonal() {
        let p = fit_pca2(&cloud(5, 2000, 3.0, 1.0, std::f64::consts::FRAC_PI_4 + 0.2)).unwrap();
        let cos = (p.components[0][0] + p.components[0][1]) / 2f64.sqrt();
        assert!(cos.acos().to_degrees() < 30.0);
    }

    #[test]
    fn projection_properties() {
        let pts = cloud(6, 400, 1.0, 1.0, 0.0);
        let p = fit_pca2(&pts).unwrap();
        let pcs: Vec<[f64; 2]> = pts.iter().map(|&q| p.project(q)).collect();
        let n = pcs.len() as f64;
        let m1 = pcs.iter().map(|v| v[0]).sum::<f64>() / n;
        let m2 = pcs.iter().map(|v| v[1]).sum::<f64>() / n;
        let cov = pcs.iter().map(|v| (v[0] - m1) * (v[1] - m2)).sum::<f64>() / (n - 1.0);
        assert!(cov.abs() < 1e-9);
        for q in &pts {
            let back = p.unproject(p.project(*q));
            assert!((back[0] - q[0]).abs() < 1e-9 && (back[1] - q[1]).abs() < 1e-9);
        }
        let origin = p.project(p.mean);
        assert!(origin[0].abs() < 1e-15 && origin[1].abs() < 1e-15);
        let d = 0.7;
        let moved = [p.mean[0] + d * p.components[0][0], p.mean[1] + d * p.components[0][1]];
        let pc = p.project(moved);
        assert!((pc[0] - d).abs() < 1e-12 && pc[1].abs() < 1e-12);
    }

    #[test]
    fn fit_is_permutation_stable() {
        let pts = cloud(7, 300, 2.0, 1.0, 1.0);
        let mut rev = pts.clone();
        rev.reverse();
        rev.rotate_left(17);
        assert_eq!(fit_pca2(&pts).unwrap(), fit_pca2(&rev).unwrap());
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_pca2(&[[0.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(fit_pca2(&[[2.0, 3.0]; 5]).is_err());
        assert!(fit_pca2(&[[0.0, f64::NAN], [1.0, 1.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn full_projection_round_trip_and_json() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = Normal::new(0.0f64, 1.0).unwrap();
        let noisiness: Vec<f64> = (0..300).map(|_| -d.sample(&mut rng).abs() * 1e-8).collect();
        let inharm: Vec<f64> = (0..300).map(|_| 0.3 + 0.1 * d.sample(&mut rng).abs()).collect();
        let proj = fit_projection(&noisiness, &inharm, Exponents::RAW).unwrap();
        for (&x, &y) in noisiness.iter().zip(&inharm) {
            let back = proj.unproject(proj.project(x, y));
            assert!((back[0] - x).abs() < 1e-9 && (back[1] - y).abs() < 1e-9);
        }
        let json = serde_json::to_string(&proj).unwrap();
        let loaded: Projection<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(loaded, proj);
    }
}
