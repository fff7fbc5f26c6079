//! Low-level numeric helpers: stable log-domain accumulation and exact
//! log-multinomials.

/// ln(e^a + e^b) without intermediate overflow or underflow.
#[inline]
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// ln Σ e^{x_i} over a slice; NEG_INFINITY for an empty slice.
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}

/// Streaming accumulator for ln Σ e^{x_i} over a sequence of log-domain terms.
///
/// Keeps a running maximum and a shifted sum, so sums of terms as small as
/// e^{-10^5} accumulate without underflowing to zero.
#[derive(Clone, Copy, Debug)]
pub struct LogSumAcc {
    max: f64,
    sum: f64,
}

impl Default for LogSumAcc {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumAcc {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    /// Add a term given as its natural log.
    pub fn add_log(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// Merge another accumulator (same result as adding its terms, up to
    /// rounding; used for fixed-order chunk reduction).
    pub fn merge(&mut self, other: &LogSumAcc) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if self.max == f64::NEG_INFINITY {
            *self = *other;
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    /// ln of the accumulated total.
    pub fn log_total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY || self.sum <= 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    /// The accumulated total in probability domain.
    pub fn total(&self) -> f64 {
        self.log_total().exp()
    }
}

/// Neumaier compensated summation with a fixed input order.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// ln C(n; k_1..k_m) = ln(n! / Π k_i!), exact through u128 arithmetic when the
/// coefficient fits, falling back to Σ ln otherwise.
pub fn ln_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if let Some(exact) = multinomial_u128(counts) {
        return (exact as f64).ln();
    }
    let mut acc = 0.0;
    for k in 2..=n {
        acc += (k as f64).ln();
    }
    for &c in counts {
        for k in 2..=c {
            acc -= (k as f64).ln();
        }
    }
    acc
}

/// The multinomial coefficient as an exact u128, or None on overflow.
pub fn multinomial_u128(counts: &[usize]) -> Option<u128> {
    let mut result: u128 = 1;
    let mut seen: usize = 0;
    for &c in counts {
        for i in 1..=c {
            seen += 1;
            // C(seen, i) built incrementally stays integral at every step.
            result = result.checked_mul(seen as u128)? / i as u128;
        }
    }
    Some(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp2_matches_direct() {
        let got = logsumexp2(0.5, 2.0);
        let want = (0.5f64.exp() + 2.0f64.exp()).ln();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn logsumexp2_handles_extremes() {
        assert!((logsumexp2(1234.0, 1232.0) - 1234.126928011043).abs() < 1e-9);
        assert_eq!(logsumexp2(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(logsumexp2(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn streaming_acc_matches_batch() {
        let xs = [-700.0, -699.5, -701.2, -698.0, -705.0];
        let mut acc = LogSumAcc::new();
        for &x in &xs {
            acc.add_log(x);
        }
        assert!((acc.log_total() - logsumexp(&xs)).abs() < 1e-12);
    }

    #[test]
    fn acc_merge_matches_sequential() {
        let xs: Vec<f64> = (0..40).map(|i| -0.37 * i as f64 - 2.0).collect();
        let mut all = LogSumAcc::new();
        for &x in &xs {
            all.add_log(x);
        }
        let (mut left, mut right) = (LogSumAcc::new(), LogSumAcc::new());
        for &x in &xs[..17] {
            left.add_log(x);
        }
        for &x in &xs[17..] {
            right.add_log(x);
        }
        left.merge(&right);
        assert!((left.log_total() - all.log_total()).abs() < 1e-12);
    }

    #[test]
    fn multinomial_small_values() {
        assert_eq!(multinomial_u128(&[2, 2]), Some(6));
        assert_eq!(multinomial_u128(&[3, 3, 3]), Some(1680));
        assert_eq!(multinomial_u128(&[4, 0]), Some(1));
        assert!((ln_multinomial(&[2, 2]) - 6f64.ln()).abs() < 1e-12);
        assert!((ln_multinomial(&[3, 3, 3]) - 1680f64.ln()).abs() < 1e-12);
        assert_eq!(ln_multinomial(&[5, 0]), 0.0);
    }

    #[test]
    fn multinomial_overflow_fallback_consistent() {
        // 400 choose 200 overflows u128; the ln fallback must stay close to
        // Stirling-free summation of logs.
        let counts = [200usize, 200];
        assert_eq!(multinomial_u128(&counts), None);
        let direct: f64 = (2..=400).map(|k| (k as f64).ln()).sum::<f64>()
            - 2.0 * (2..=200).map(|k| (k as f64).ln()).sum::<f64>();
        assert!((ln_multinomial(&counts) - direct).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..1_000_000 {
            s.add(1e-18);
        }
        assert!((s.total() - (1.0 + 1e-12)).abs() < 1e-14);
    }
}
