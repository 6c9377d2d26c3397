//! Order-stable accumulation helpers shared by quadrature and the simulator.

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

impl Estimate {
    /// Two-pass estimate over the samples in the given order.
    pub fn from_samples<I>(samples: I) -> Self
    where
        I: IntoIterator<Item = f64>,
        I::IntoIter: Clone,
    {
        let it = samples.into_iter();
        let mut sum = NeumaierSum::default();
        let mut n = 0usize;
        for x in it.clone() {
            sum.add(x);
            n += 1;
        }
        if n == 0 {
            return Estimate {
                mean: f64::NAN,
                std_error: f64::NAN,
                count: 0,
            };
        }
        let mean = sum.total() / n as f64;
        let mut ss = NeumaierSum::default();
        for x in it {
            ss.add((x - mean) * (x - mean));
        }
        let std_error = if n > 1 {
            (ss.total() / (n as f64 - 1.0) / n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean,
            std_error,
            count: n,
        }
    }

    /// Whether `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}
