//! Streaming batch-means estimator.
//!
//! A stream of `total` vector samples is split into `floor(sqrt(total))`
//! consecutive batches. The standard error of the overall mean is the sample
//! standard deviation of the batch means divided by the square root of the
//! batch count, which stays valid for autocorrelated Markov chain output.

#[derive(Debug, Clone)]
pub struct BatchMeans {
    dim: usize,
    batch_size: usize,
    n_batches: usize,
    count: usize,
    sum: Vec<f64>,
    current: Vec<f64>,
    current_fill: usize,
    batch_means: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub count: usize,
    pub batches: usize,
}

impl BatchMeans {
    /// Estimator sized for a stream of exactly `total` samples of length `dim`.
    pub fn for_total(total: usize, dim: usize) -> Self {
        let n_batches = ((total as f64).sqrt().floor() as usize).max(1);
        let batch_size = (total / n_batches).max(1);
        Self {
            dim,
            batch_size,
            n_batches,
            count: 0,
            sum: vec![0.0; dim],
            current: vec![0.0; dim],
            current_fill: 0,
            batch_means: Vec::with_capacity(n_batches),
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        self.count += 1;
        for (s, v) in self.sum.iter_mut().zip(x) {
            *s += v;
        }
        // samples past n_batches * batch_size only enter the overall mean
        if self.batch_means.len() < self.n_batches {
            for (c, v) in self.current.iter_mut().zip(x) {
                *c += v;
            }
            self.current_fill += 1;
            if self.current_fill == self.batch_size {
                let b = self.batch_size as f64;
                self.batch_means.push(self.current.iter().map(|c| c / b).collect());
                self.current.iter_mut().for_each(|c| *c = 0.0);
                self.current_fill = 0;
            }
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Overall mean and batch-means standard error.
    ///
    /// With fewer than two complete batches the standard error is reported
    /// as zero.
    pub fn finish(&self) -> BatchSummary {
        let n = self.count.max(1) as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let k = self.batch_means.len();
        let std_error = if k < 2 {
            vec![0.0; self.dim]
        } else {
            (0..self.dim)
                .map(|d| {
                    let m = self.batch_means.iter().map(|b| b[d]).sum::<f64>() / k as f64;
                    let var = self
                        .batch_means
                        .iter()
                        .map(|b| (b[d] - m).powi(2))
                        .sum::<f64>()
                        / (k - 1) as f64;
                    (var / k as f64).sqrt()
                })
                .collect()
        };
        BatchSummary {
            mean,
            std_error,
            count: self.count,
            batches: k,
        }
    }
}

/// Median of a slice; NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}
