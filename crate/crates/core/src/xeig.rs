//! Eigendecomposition of the truncated position operator.
//!
//! In the number basis x is the symmetric tridiagonal Jacobi matrix with
//! zero diagonal and off-diagonals `b_j = sqrt((j+1)/2)`. Every gate the
//! simulator needs is `e^{i t x}` conjugated by diagonal number-operator
//! phases, so one eigendecomposition per truncation size N serves all gates:
//!
//! * eigenvalues by Sturm-count bisection (they are the Gauss-Hermite
//!   nodes, symmetric about zero and well separated);
//! * eigenvectors by the scaled three-term recurrence at each root.
//!
//! Both steps are O(N^2), which keeps N in the thousands affordable where a
//! dense O(N^3) solver would dominate the entire test suite.

use num_complex::Complex64;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub(crate) struct XEig {
    n: usize,
    /// Ascending eigenvalues.
    lambda: Vec<f64>,
    /// Row k = components of eigenvector k (i.e. V^T stored row-major).
    vt: Vec<f64>,
}

fn offdiag(j: usize) -> f64 {
    ((j + 1) as f64 / 2.0).sqrt()
}

/// Number of eigenvalues strictly below `t` (Sturm count via the shifted
/// LDL^T recurrence).
fn sturm_count(n: usize, t: f64) -> usize {
    let mut count = 0;
    let mut d = -t;
    if d < 0.0 {
        count += 1;
    }
    for j in 1..n {
        let b = offdiag(j - 1);
        let mut prev = d;
        if prev == 0.0 {
            prev = f64::MIN_POSITIVE;
        }
        d = -t - b * b / prev;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(n: usize, k: usize, radius: f64) -> f64 {
    let mut lo = -radius;
    let mut hi = radius;
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if sturm_count(n, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvector components by forward recurrence with overflow rescaling;
/// returns the normalized vector.
fn eigenvector(n: usize, lambda: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    if n > 1 {
        v[1] = lambda / offdiag(0);
    }
    for j in 1..n - 1 {
        v[j + 1] = (lambda * v[j] - offdiag(j - 1) * v[j - 1]) / offdiag(j);
        if v[j + 1].abs() > 1e120 {
            for x in v[..=j + 1].iter_mut() {
                *x *= 1e-120;
            }
        }
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

impl XEig {
    pub(crate) fn new(n: usize) -> Self {
        assert!(n >= 1);
        let radius = 2.0 * offdiag(n.saturating_sub(2)) + 1.0;
        let mut lambda = vec![0.0; n];
        let mut vt = vec![0.0; n * n];
        // Spectrum is symmetric: compute the lower half, mirror the rest.
        let half = n / 2;
        for (k, l) in lambda.iter_mut().enumerate().take(half) {
            *l = bisect_eigenvalue(n, k, radius);
        }
        if n % 2 == 1 {
            lambda[half] = 0.0;
        }
        for k in 0..half {
            lambda[n - 1 - k] = -lambda[k];
        }
        let distinct = if n % 2 == 1 { half + 1 } else { half };
        for k in 0..distinct {
            let v = eigenvector(n, lambda[k]);
            // Mirror rule: v_j(-l) = (-1)^j v_j(l).
            let mk = n - 1 - k;
            for j in 0..n {
                vt[k * n + j] = v[j];
                if mk != k {
                    vt[mk * n + j] = if j % 2 == 0 { v[j] } else { -v[j] };
                }
            }
        }
        Self { n, lambda, vt }
    }

    /// `psi_c <- e^{i t_c x} psi_c` for each column `c` (column-major
    /// storage, one phase per column). Columns are independent and run on
    /// the worker pool.
    pub(crate) fn apply_phases_of_x(&self, ts: &[f64], psi: &mut [Complex64], cols: usize) {
        let n = self.n;
        debug_assert_eq!(psi.len(), n * cols);
        debug_assert_eq!(ts.len(), cols);
        let run = |(col, t): (&mut [Complex64], &f64)| {
            let mut u = vec![Complex64::ZERO; n];
            for (k, uk) in u.iter_mut().enumerate() {
                let row = &self.vt[k * n..(k + 1) * n];
                let mut acc = Complex64::ZERO;
                for (cj, rj) in col.iter().zip(row) {
                    acc += cj * rj;
                }
                *uk = acc * Complex64::from_polar(1.0, t * self.lambda[k]);
            }
            for x in col.iter_mut() {
                *x = Complex64::ZERO;
            }
            for (k, &uk) in u.iter().enumerate() {
                if uk == Complex64::ZERO {
                    continue;
                }
                let row = &self.vt[k * n..(k + 1) * n];
                for (cj, rj) in col.iter_mut().zip(row) {
                    *cj += uk * rj;
                }
            }
        };
        if cols == 1 {
            run((psi, &ts[0]));
        } else {
            use rayon::prelude::*;
            crate::pool().install(|| {
                psi.par_chunks_mut(n).zip(ts.par_iter()).for_each(run);
            });
        }
    }

    /// Single-column convenience form.
    pub(crate) fn apply_phase_of_x(&self, t: f64, psi: &mut [Complex64], cols: usize) {
        let ts = vec![t; cols];
        self.apply_phases_of_x(&ts, psi, cols);
    }
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<XEig>>>> = OnceLock::new();

/// Budget for cached decompositions (bytes of eigenvector storage).
const CACHE_BYTES: usize = 700 * 1024 * 1024;

pub(crate) fn cached(n: usize) -> Arc<XEig> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    {
        let map = cache.lock().unwrap();
        if let Some(e) = map.get(&n) {
            return Arc::clone(e);
        }
    }
    let fresh = Arc::new(XEig::new(n));
    let mut map = cache.lock().unwrap();
    let mut total: usize = map.keys().map(|&m| m * m * 8).sum();
    if total + n * n * 8 > CACHE_BYTES {
        // Drop smaller entries first; the largest are the costliest to redo.
        let mut sizes: Vec<usize> = map.keys().cloned().collect();
        sizes.sort_unstable();
        for m in sizes {
            if total + n * n * 8 <= CACHE_BYTES {
                break;
            }
            map.remove(&m);
            total -= m * m * 8;
        }
    }
    map.entry(n).or_insert_with(|| Arc::clone(&fresh));
    fresh
}
