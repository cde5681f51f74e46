//! Sequential minimal optimization for the soft-margin dual
//! `max sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij`, `0 <= a_i <= C_i`,
//! `sum(a_i y_i) = 0`, with decision function `f = sum a_j y_j K_j + b`.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::Stream;
use crate::svm::kernel::KernelCache;

/// Steps smaller than this (relative) count as no progress.
const STEP_EPS: f64 = 1e-10;

pub(crate) struct SmoOutput {
    pub alpha: Vec<f64>,
    pub b: f64,
    pub passes: usize,
    pub converged: bool,
}

pub(crate) struct Solver<'a> {
    k: KernelCache<'a>,
    y: &'a [f64],
    c: &'a [f64],
    alpha: Vec<f64>,
    /// g_i = sum_j a_j y_j K_ij
    g: Vec<f64>,
    b: f64,
    tol: f64,
    stream: Stream,
    /// Dual objective after every accepted step (tests only).
    pub trace: Option<Vec<f64>>,
}

impl<'a> Solver<'a> {
    pub fn new(x: &'a Array2<f64>, y: &'a [f64], c: &'a [f64], gamma: f64, tol: f64, stream: Stream) -> Self {
        let n = y.len();
        Self {
            k: KernelCache::new(x, gamma),
            y,
            c,
            alpha: vec![0.0; n],
            g: vec![0.0; n],
            b: 0.0,
            tol,
            stream,
            trace: None,
        }
    }

    #[inline]
    fn err(&self, i: usize) -> f64 {
        self.g[i] + self.b - self.y[i]
    }

    #[inline]
    fn is_free(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c[i]
    }

    fn violates(&self, i: usize, tol: f64) -> bool {
        let r = self.err(i) * self.y[i];
        (r < -tol && self.alpha[i] < self.c[i]) || (r > tol && self.alpha[i] > 0.0)
    }

    pub fn dual_objective(&self) -> f64 {
        let n = self.y.len();
        let mut quad = 0.0;
        for i in 0..n {
            if self.alpha[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if self.alpha[j] != 0.0 {
                    quad += self.alpha[i] * self.alpha[j] * self.y[i] * self.y[j] * self.k.get(i, j);
                }
            }
        }
        self.alpha.iter().sum::<f64>() - 0.5 * quad
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (c1, c2) = (self.c[i1], self.c[i2]);
        let (e1, e2) = (self.err(i1), self.err(i2));
        let s = y1 * y2;
        let (lo, hi) = if s < 0.0 {
            ((a2 - a1).max(0.0), c2.min(c1 + a2 - a1))
        } else {
            ((a1 + a2 - c1).max(0.0), c2.min(a1 + a2))
        };
        if lo >= hi {
            return false;
        }
        let (k11, k12, k22) = (self.k.get(i1, i1), self.k.get(i1, i2), self.k.get(i2, i2));
        let eta = k11 + k22 - 2.0 * k12;
        // Dual gain of moving a2 by t along the constraint line.
        let gain = |t: f64| t * y2 * (e1 - e2) - 0.5 * eta * t * t;
        let mut a2n = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(lo, hi)
        } else {
            let (gl, gh) = (gain(lo - a2), gain(hi - a2));
            if gl > gh + STEP_EPS {
                lo
            } else if gh > gl + STEP_EPS {
                hi
            } else {
                return false;
            }
        };
        if (a2n - a2).abs() < STEP_EPS * (a2n + a2 + STEP_EPS) {
            return false;
        }
        debug_assert!(
            gain(a2n - a2) >= -1e-9 * (1.0 + a2n.abs()),
            "dual objective decreased: {}",
            gain(a2n - a2)
        );
        let mut a1n = a1 + s * (a2 - a2n);
        // Snap round-off onto the box.
        if a1n < 1e-12 * c1 {
            a1n = 0.0;
        } else if a1n > c1 * (1.0 - 1e-12) {
            a1n = c1;
        }
        if a2n < 1e-12 * c2 {
            a2n = 0.0;
        } else if a2n > c2 * (1.0 - 1e-12) {
            a2n = c2;
        }

        let d1 = y1 * (a1n - a1);
        let d2 = y2 * (a2n - a2);
        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let free1 = a1n > 0.0 && a1n < c1;
        let free2 = a2n > 0.0 && a2n < c2;
        self.b = match (free1, free2) {
            (true, false) => b1,
            (false, true) => b2,
            _ => 0.5 * (b1 + b2),
        };
        self.alpha[i1] = a1n;
        self.alpha[i2] = a2n;
        let (r1, r2) = (self.k.row(i1), self.k.row(i2));
        for ((g, k1), k2) in self.g.iter_mut().zip(r1.iter()).zip(r2.iter()) {
            *g += d1 * k1 + d2 * k2;
        }
        if self.trace.is_some() {
            let w = self.dual_objective();
            self.trace.as_mut().unwrap().push(w);
        }
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        if !self.violates(i2, self.tol) {
            return false;
        }
        let n = self.y.len();
        let e2 = self.err(i2);
        let mut best: Option<(f64, usize)> = None;
        for i in 0..n {
            if self.is_free(i) {
                let d = (self.err(i) - e2).abs();
                if best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        let start = self.stream.random_range(0..n);
        for k in 0..n {
            let i1 = (start + k) % n;
            if self.is_free(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        let start = self.stream.random_range(0..n);
        for k in 0..n {
            let i1 = (start + k) % n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn recompute_g(&mut self) {
        let n = self.y.len();
        let coef: Vec<(usize, f64)> = (0..n)
            .filter(|&j| self.alpha[j] != 0.0)
            .map(|j| (j, self.alpha[j] * self.y[j]))
            .collect();
        self.g.iter_mut().for_each(|g| *g = 0.0);
        for &(j, c) in &coef {
            let row = self.k.row(j);
            for (g, k) in self.g.iter_mut().zip(row.iter()) {
                *g += c * k;
            }
        }
    }

    /// Alternates full sweeps and sweeps over free multipliers, each in a
    /// fresh random order, until a full sweep changes nothing and the
    /// exactly recomputed KKT conditions hold, or `max_passes` is reached.
    pub fn run(mut self, max_passes: usize) -> (SmoOutput, Option<Vec<f64>>) {
        let n = self.y.len();
        let mut order: Vec<usize> = (0..n).collect();
        let mut examine_all = true;
        let mut passes = 0;
        let mut converged = false;
        while passes < max_passes {
            order.shuffle(&mut self.stream);
            let mut changed = 0;
            for k in 0..n {
                let i = order[k];
                if (examine_all || self.is_free(i)) && self.examine(i) {
                    changed += 1;
                }
            }
            passes += 1;
            if examine_all && changed == 0 {
                self.recompute_g();
                if (0..n).all(|i| !self.violates(i, self.tol)) {
                    converged = true;
                    break;
                }
                continue;
            }
            if examine_all {
                examine_all = false;
            } else if changed == 0 {
                examine_all = true;
            }
        }
        if !converged {
            self.recompute_g();
        }
        let trace = self.trace.take();
        (
            SmoOutput {
                alpha: self.alpha,
                b: self.b,
                passes,
                converged,
            },
            trace,
        )
    }
}
