use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassWeighting {
    Balanced,
    None,
}

/// `w_c = n / (2 * n_c)` for classes 0 and 1.
pub fn balanced_weights(labels: &[u8]) -> Result<[f64; 2]> {
    let n1 = labels.iter().filter(|&&l| l == 1).count();
    let n0 = labels.len() - n1;
    if n0 == 0 || n1 == 0 {
        return Err(Error::Weighting(format!(
            "balanced weights need both classes, got counts ({n0}, {n1})"
        )));
    }
    let n = labels.len() as f64;
    Ok([n / (2.0 * n0 as f64), n / (2.0 * n1 as f64)])
}

pub fn class_weights(labels: &[u8], weighting: ClassWeighting) -> Result<[f64; 2]> {
    match weighting {
        ClassWeighting::Balanced => balanced_weights(labels),
        ClassWeighting::None => Ok([1.0, 1.0]),
    }
}
