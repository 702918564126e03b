use serde::Serialize;

/// Sample mean with its standard error. `stderr` is absent for a single
/// sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: Option<f64>,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let trials = samples.len();
        let mean = mean(samples);
        let stderr = (trials > 1).then(|| sample_std(samples) / (trials as f64).sqrt());
        Estimate { mean, stderr, trials }
    }

    /// `|mean - target| <= k * stderr`. A missing stderr only matches an
    /// exact hit.
    pub fn within(&self, target: f64, k: f64) -> bool {
        let tol = self.stderr.map_or(0.0, |s| k * s);
        (self.mean - target).abs() <= tol
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation; zero for fewer than two samples.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_basics() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.stderr.unwrap() - sd / 2.0).abs() < 1e-12);
        let single = Estimate::from_samples(&[5.0]);
        assert_eq!(single.stderr, None);
        assert!(single.within(5.0, 3.0));
        assert!(!single.within(5.1, 3.0));
    }
}
