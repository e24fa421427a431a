use statrs::distribution::{ContinuousCDF, StudentsT};

/// Sample mean and the half-width of its two-sided 95% Student-t interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ci95 {
    pub mean: f64,
    /// `None` for a single sample.
    pub half_width: Option<f64>,
    pub n: usize,
}

/// `t(0.975, df)`.
pub fn t_975(df: usize) -> f64 {
    assert!(df >= 1);
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("valid Student-t parameters")
        .inverse_cdf(0.975)
}

pub fn aggregate_ci95(values: &[f64]) -> Ci95 {
    assert!(!values.is_empty(), "confidence interval of no samples");
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Ci95 {
            mean,
            half_width: None,
            n,
        };
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = if var == 0.0 {
        0.0
    } else {
        t_975(n - 1) * var.sqrt() / (n as f64).sqrt()
    };
    Ci95 {
        mean,
        half_width: Some(half),
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance() {
        let ci = aggregate_ci95(&[5.0, 5.0, 5.0]);
        assert_eq!(ci.mean, 5.0);
        assert_eq!(ci.half_width, Some(0.0));
    }

    #[test]
    fn two_samples_use_df_one() {
        let ci = aggregate_ci95(&[1.0, 3.0]);
        assert_eq!(ci.mean, 2.0);
        // t(0.975, 1) = 12.706; s = sqrt(2), n = 2
        assert!((ci.half_width.unwrap() - 12.706).abs() < 1e-3, "{ci:?}");
    }

    #[test]
    fn table_values() {
        // standard t-table entries
        assert!((t_975(1) - 12.7062).abs() < 1e-3);
        assert!((t_975(9) - 2.2622).abs() < 1e-3);
        assert!((t_975(49) - 2.0096).abs() < 1e-3);
    }

    #[test]
    fn single_sample_has_no_interval() {
        let ci = aggregate_ci95(&[7.5]);
        assert_eq!(ci.mean, 7.5);
        assert_eq!(ci.half_width, None);
    }
}
