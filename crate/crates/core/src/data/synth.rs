//! Seeded two-view linear-Gaussian data with a latent-sign label.
//!
//! ```text
//! z ~ N(0, I_k)
//! x = A z + noise_x · ε      A: dim_x × k, unit-norm columns
//! y = B z + noise_y · ε′     B: dim_y × k, unit-norm columns
//! label = [wᵀz > 0]          w: unit vector
//! ```

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::BimodalDataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n: usize,
    pub latent_dim: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub noise_x: f64,
    pub noise_y: f64,
    pub seed: u64,
}

impl SynthConfig {
    /// The benchmark setting: the source view is informative, the binary view
    /// is heavily corrupted.
    pub fn benchmark() -> Self {
        SynthConfig {
            n: 5000,
            latent_dim: 8,
            dim_x: 40,
            dim_y: 30,
            noise_x: 0.5,
            noise_y: 3.0,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 {
            return Err(Error::Config("latent_dim must be at least 1".into()));
        }
        if self.latent_dim > self.dim_x.min(self.dim_y) {
            return Err(Error::Config(format!(
                "latent_dim {} exceeds min(dim_x, dim_y) = {}",
                self.latent_dim,
                self.dim_x.min(self.dim_y)
            )));
        }
        if !(self.noise_x >= 0.0 && self.noise_y >= 0.0 && self.noise_x.is_finite() && self.noise_y.is_finite()) {
            return Err(Error::Config("noise levels must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// The hidden quantities behind a generated dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthTruth {
    pub a: Matrix,
    pub b: Matrix,
    pub w: Vec<f64>,
    /// `n × k`
    pub latent: Matrix,
}

fn unit_columns(mut m: Matrix) -> Matrix {
    for c in 0..m.cols() {
        let norm = m.column(c).iter().map(|v| v * v).sum::<f64>().sqrt();
        for r in 0..m.rows() {
            m.set(r, c, m.get(r, c) / norm);
        }
    }
    m
}

pub fn gen_synthetic(cfg: &SynthConfig) -> Result<BimodalDataset> {
    Ok(gen_synthetic_with_truth(cfg)?.0)
}

pub fn gen_synthetic_with_truth(cfg: &SynthConfig) -> Result<(BimodalDataset, SynthTruth)> {
    cfg.validate()?;
    let k = cfg.latent_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let a = unit_columns(Matrix::random_normal(cfg.dim_x, k, &mut rng));
    let b = unit_columns(Matrix::random_normal(cfg.dim_y, k, &mut rng));
    let w = unit_columns(Matrix::random_normal(k, 1, &mut rng)).into_vec();
    let z = Matrix::random_normal(cfg.n, k, &mut rng);
    let mut ex = Matrix::random_normal(cfg.n, cfg.dim_x, &mut rng);
    let mut ey = Matrix::random_normal(cfg.n, cfg.dim_y, &mut rng);
    ex.scale(cfg.noise_x);
    ey.scale(cfg.noise_y);
    let x = Matrix::gemm(&z, false, &a, true)?.add(&ex)?;
    let y = Matrix::gemm(&z, false, &b, true)?.add(&ey)?;
    let labels = (0..cfg.n)
        .map(|r| u8::from(z.row(r).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() > 0.0))
        .collect();
    let ids = (0..cfg.n).map(|i| format!("syn{i}")).collect();
    let ds = BimodalDataset::new(ids, x, y, labels)?;
    Ok((ds, SynthTruth { a, b, w, latent: z }))
}

/// Posterior mean of `wᵀz` given observed `x` and `y` under the true
/// generative model. Its sign is the Bayes-optimal label prediction, which
/// bounds what any learned classifier can reach. Pass a zero `y` block with
/// `use_y = false` to condition on `x` only.
pub fn bayes_scores(cfg: &SynthConfig, truth: &SynthTruth, x: &Matrix, y: &Matrix, use_y: bool) -> Result<Vec<f64>> {
    let k = cfg.latent_dim;
    let var_x = (cfg.noise_x * cfg.noise_x).max(1e-12);
    let var_y = (cfg.noise_y * cfg.noise_y).max(1e-12);
    // precision = I + AᵀA/σx² + BᵀB/σy²
    let mut precision = Matrix::identity(k);
    let mut ata = Matrix::gemm(&truth.a, true, &truth.a, false)?;
    ata.scale(1.0 / var_x);
    precision.add_assign(&ata)?;
    let mut rhs = Matrix::gemm(x, false, &truth.a, false)?;
    rhs.scale(1.0 / var_x);
    if use_y {
        let mut btb = Matrix::gemm(&truth.b, true, &truth.b, false)?;
        btb.scale(1.0 / var_y);
        precision.add_assign(&btb)?;
        let mut yb = Matrix::gemm(y, false, &truth.b, false)?;
        yb.scale(1.0 / var_y);
        rhs.add_assign(&yb)?;
    }
    // posterior means, k × n
    let means = precision.solve(&rhs.transpose())?;
    Ok((0..x.rows())
        .map(|r| (0..k).map(|i| truth.w[i] * means.get(i, r)).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::metrics::balanced_accuracy;

    fn small(noise: f64) -> SynthConfig {
        SynthConfig {
            n: 2000,
            latent_dim: 4,
            dim_x: 10,
            dim_y: 8,
            noise_x: noise,
            noise_y: noise,
            seed: 3,
        }
    }

    #[test]
    fn balanced_labels() {
        let cfg = SynthConfig::benchmark();
        let ds = gen_synthetic(&cfg).unwrap();
        let frac = ds.label_counts()[1] as f64 / ds.len() as f64;
        assert!((frac - 0.5).abs() <= 0.03, "{frac}");
    }

    #[test]
    fn deterministic() {
        let cfg = small(0.3);
        assert_eq!(gen_synthetic(&cfg).unwrap(), gen_synthetic(&cfg).unwrap());
        let other = SynthConfig { seed: 4, ..cfg.clone() };
        assert_ne!(gen_synthetic(&other).unwrap().x, gen_synthetic(&cfg).unwrap().x);
    }

    #[test]
    fn columns_are_unit_norm() {
        let (_, t) = gen_synthetic_with_truth(&small(0.1)).unwrap();
        for c in 0..4 {
            let n: f64 = t.a.column(c).iter().map(|v| v * v).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
        assert!((t.w.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_x_is_linearly_separable() {
        // least-squares recovery z = (AᵀA)⁻¹Aᵀx makes sign(wᵀz) a linear rule on x
        let cfg = small(0.0);
        let (ds, t) = gen_synthetic_with_truth(&cfg).unwrap();
        let ata = Matrix::gemm(&t.a, true, &t.a, false).unwrap();
        let z_hat = ata.solve(&Matrix::gemm(&t.a, true, &ds.x, true).unwrap()).unwrap();
        let preds: Vec<u8> = (0..ds.len())
            .map(|r| u8::from((0..4).map(|i| t.w[i] * z_hat.get(i, r)).sum::<f64>() > 0.0))
            .collect();
        assert!(balanced_accuracy(&preds, &ds.labels).unwrap() >= 0.99);
    }

    #[test]
    fn bayes_oracle_orders_views() {
        let cfg = SynthConfig::benchmark();
        let (ds, t) = gen_synthetic_with_truth(&cfg).unwrap();
        let ba = |s: Vec<f64>| {
            let p: Vec<u8> = s.iter().map(|&v| u8::from(v > 0.0)).collect();
            balanced_accuracy(&p, &ds.labels).unwrap()
        };
        let both = ba(bayes_scores(&cfg, &t, &ds.x, &ds.y, true).unwrap());
        let x_only = ba(bayes_scores(&cfg, &t, &ds.x, &ds.y, false).unwrap());
        assert!(both >= x_only - 0.01);
        assert!(x_only > 0.8 && both < 1.0, "{x_only} {both}");
    }

    #[test]
    fn latent_dim_bound() {
        let cfg = SynthConfig {
            latent_dim: 9,
            ..small(0.1)
        };
        assert!(matches!(gen_synthetic(&cfg), Err(Error::Config(_))));
    }
}
