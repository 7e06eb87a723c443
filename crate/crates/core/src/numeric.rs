//! Small numerical helpers shared by the exact and Monte Carlo modules.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `(y + ln(1 - y)) / y^2` for `y` in `[0, 1)`.
///
/// Every closed form for `k = 2` is a combination of `ln(1 - y) / y`, and
/// `ln(1 - y) / y = y * log_ratio(y) - 1`. Writing the formulas in terms of
/// this function removes the cancellation between `r` and
/// `r^2 ln(1 - p/r) / p` for large `r`. Near zero the power series
/// `-(1/2 + y/3 + y^2/4 + ...)` is used.
pub fn log_ratio(y: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&y), "log_ratio domain is [0, 1), got {y}");
    if y < 0.1 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for n in 2..40 {
            let term = pow / n as f64;
            acc += term;
            if term < 1e-18 * acc {
                break;
            }
            pow *= y;
        }
        -acc
    } else {
        (y + (-y).ln_1p()) / (y * y)
    }
}

/// Binomial coefficient as a float, exact while the result fits in 53 bits.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for j in 0..k {
        acc = acc * (n - j) as f64 / (j + 1) as f64;
    }
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}
