use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// `exp(-gamma * |x - z|^2)`.
pub fn rbf_kernel(x: ArrayView1<f64>, z: ArrayView1<f64>, gamma: f64) -> Result<f64> {
    if x.len() != z.len() {
        return Err(Error::Kernel(x.len(), z.len()));
    }
    Ok(rbf_unchecked(x, z, gamma))
}

#[inline]
pub(crate) fn rbf_unchecked(x: ArrayView1<f64>, z: ArrayView1<f64>, gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Kernel matrix access for the solver: precomputed when the problem is
/// small enough, otherwise evaluated on demand.
pub(crate) enum KernelCache<'a> {
    Full { n: usize, values: Vec<f64> },
    OnDemand { x: &'a Array2<f64>, gamma: f64 },
}

pub(crate) const FULL_CACHE_LIMIT: usize = 4000;

impl<'a> KernelCache<'a> {
    pub fn new(x: &'a Array2<f64>, gamma: f64) -> Self {
        let n = x.nrows();
        if n > FULL_CACHE_LIMIT {
            return KernelCache::OnDemand { x, gamma };
        }
        let mut values = vec![0.0; n * n];
        values.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = rbf_unchecked(x.row(i), x.row(j), gamma);
            }
        });
        KernelCache::Full { n, values }
    }

    /// Row `i` of the kernel matrix (equal to column `i`).
    pub fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        match self {
            KernelCache::Full { n, values } => std::borrow::Cow::Borrowed(&values[i * n..(i + 1) * n]),
            KernelCache::OnDemand { x, gamma } => std::borrow::Cow::Owned(
                x.rows().into_iter().map(|r| rbf_unchecked(x.row(i), r, *gamma)).collect(),
            ),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            KernelCache::Full { n, values } => values[i * n + j],
            KernelCache::OnDemand { x, gamma } => rbf_unchecked(x.row(i), x.row(j), *gamma),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn identity_and_known_value() {
        let x = array![1.0, 2.0];
        assert_eq!(rbf_kernel(x.view(), x.view(), 0.1).unwrap(), 1.0);
        let z = array![1.0, 0.0];
        // |x - z|^2 = 4
        assert!((rbf_kernel(x.view(), z.view(), 0.1).unwrap() - (-0.4f64).exp()).abs() < 1e-15);
        assert!((rbf_kernel(x.view(), z.view(), 0.1).unwrap() - 0.67032).abs() < 1e-5);
    }

    #[test]
    fn dimension_mismatch() {
        assert_eq!(rbf_kernel(array![1.0].view(), array![1.0, 2.0].view(), 0.1), Err(Error::Kernel(1, 2)));
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in prop::collection::vec(-10.0f64..10.0, 3), b in prop::collection::vec(-10.0f64..10.0, 3), g in 0.001f64..5.0) {
            let (a, b) = (ndarray::Array1::from(a), ndarray::Array1::from(b));
            let k1 = rbf_kernel(a.view(), b.view(), g).unwrap();
            let k2 = rbf_kernel(b.view(), a.view(), g).unwrap();
            prop_assert_eq!(k1, k2);
            prop_assert!(k1 > 0.0 || k1 == 0.0 && g > 0.0);
            prop_assert!(k1 <= 1.0);
        }
    }
}
