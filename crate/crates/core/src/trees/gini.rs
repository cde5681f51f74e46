use crate::error::{Error, Result};

/// Gini impurity `1 - Σ (c_i / n)^2` of class counts.
pub fn gini(class_counts: &[u64]) -> Result<f64> {
    let n: u64 = class_counts.iter().sum();
    if n == 0 {
        return Err(Error::Impurity("all class counts are zero".into()));
    }
    let n = n as f64;
    Ok(1.0 - class_counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>())
}

/// Two-class Gini for the hot split-search loop; `n` must be positive.
#[inline]
pub(crate) fn gini2(c0: f64, c1: f64) -> f64 {
    let n = c0 + c1;
    1.0 - (c0 * c0 + c1 * c1) / (n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(gini(&[10, 0]).unwrap(), 0.0);
        assert_eq!(gini(&[5, 5]).unwrap(), 0.5);
        assert!((gini(&[3, 1]).unwrap() - 0.375).abs() < 1e-15);
        assert!(gini(&[0, 0]).is_err());
        assert_eq!(gini2(3.0, 1.0), gini(&[3, 1]).unwrap());
    }
}
