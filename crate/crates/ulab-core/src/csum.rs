//! Compensated (Kahan–Neumaier) summation for complex accumulators.
//!
//! The identity checks in this crate compare averages of up to ~10^9 terms
//! against 1e-9 tolerances; naive f64 accumulation would eat most of that
//! budget, compensated summation keeps the error near machine epsilon.

use num_complex::Complex64;

#[derive(Clone, Copy, Debug, Default)]
pub struct CSum {
    sum_re: f64,
    sum_im: f64,
    c_re: f64,
    c_im: f64,
    count: u64,
}

impl CSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.sum_re = neumaier(self.sum_re, z.re, &mut self.c_re);
        self.sum_im = neumaier(self.sum_im, z.im, &mut self.c_im);
        self.count += 1;
    }

    #[inline]
    pub fn add_real(&mut self, x: f64) {
        self.sum_re = neumaier(self.sum_re, x, &mut self.c_re);
        self.count += 1;
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.sum_re + self.c_re, self.sum_im + self.c_im)
    }

    /// Mean over the number of `add` calls.
    pub fn mean(&self) -> Complex64 {
        if self.count == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            self.total() / self.count as f64
        }
    }

}

#[inline]
fn neumaier(sum: f64, x: f64, comp: &mut f64) -> f64 {
    let t = sum + x;
    if sum.abs() >= x.abs() {
        *comp += (sum - t) + x;
    } else {
        *comp += (x - t) + sum;
    }
    t
}
