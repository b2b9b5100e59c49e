use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    /// `exp(-gamma * |x - z|^2)`
    Rbf { gamma: f64 },
    /// `(scale * <x, z> + coef0)^degree`
    Polynomial { degree: u32, coef0: f64, scale: f64 },
}

impl Kernel {
    /// Polynomial kernel whose scale defaults to
    /// `1 / (feature_count * var(X))` over all entries of `rows`.
    pub fn polynomial_auto(degree: u32, coef0: f64, rows: &[Vec<f64>]) -> Kernel {
        let n = rows.iter().map(Vec::len).sum::<usize>() as f64;
        let width = rows.first().map_or(1, Vec::len) as f64;
        let mean = rows.iter().flatten().sum::<f64>() / n;
        let var = rows.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let scale = if var > 0.0 && n > 0.0 {
            1.0 / (width * var)
        } else {
            1.0
        };
        Kernel::Polynomial {
            degree,
            coef0,
            scale,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], z: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf { gamma } => {
                let d2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                (-gamma * d2).exp()
            }
            Kernel::Polynomial {
                degree,
                coef0,
                scale,
            } => {
                let dot: f64 = x.iter().zip(z).map(|(a, b)| a * b).sum();
                (scale * dot + coef0).powi(degree as i32)
            }
        }
    }

    /// Dense Gram matrix, rows computed in parallel.
    pub fn gram(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        use rayon::prelude::*;
        (0..rows.len())
            .into_par_iter()
            .map(|i| rows.iter().map(|z| self.eval(&rows[i], z)).collect())
            .collect()
    }
}
