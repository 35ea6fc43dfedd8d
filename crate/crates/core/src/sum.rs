//! Compensated (error-tracking) floating-point summation.
//!
//! All means computed by the indicator kernel go through [`NeumaierSum`] so
//! that long series do not lose low-order bits to naive accumulation. The
//! correction term handles the case where the incoming value is larger in
//! magnitude than the running sum, which plain Kahan summation does not.

/// Neumaier variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Sum an iterator of values in order.
    pub fn sum_iter<I: IntoIterator<Item = f64>>(values: I) -> f64 {
        let mut acc = Self::new();
        for v in values {
            acc.add(v);
        }
        acc.value()
    }
}

/// Compensated arithmetic mean of a non-empty slice.
///
/// Every mean in the kernel funnels through here so that a full-length
/// rolling window and the global macrostate parameter agree bit-for-bit.
pub fn compensated_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut acc = NeumaierSum::new();
    let mut n = 0usize;
    for v in values {
        acc.add(v);
        n += 1;
    }
    if n == 0 {
        None
    } else {
        Some(acc.value() / n as f64)
    }
}
