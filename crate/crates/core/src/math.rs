//! Small numeric helpers shared by the closed-form models.

use std::sync::OnceLock;

const LN_FACT_TABLE: usize = 4096;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACT_TABLE);
        let mut acc = 0.0f64;
        t.push(0.0);
        for i in 1..LN_FACT_TABLE {
            acc += (i as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`, tabulated for small `n` and summed beyond the table.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let mut acc = table[table.len() - 1];
    for i in table.len() as u64..=n {
        acc += (i as f64).ln();
    }
    acc
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(n, k)` as a float (may be `inf` for very large arguments).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 60 {
        // exact in u128 for this range
        let mut acc: u128 = 1;
        for i in 0..k as u128 {
            acc = acc * (n as u128 - i) / (i + 1);
        }
        return acc as f64;
    }
    ln_binomial(n, k).exp()
}

/// `2^-x` for integer `x`, exact down to the subnormal range.
#[inline]
pub fn pow2_neg(x: u64) -> f64 {
    (-(x as f64)).exp2()
}

/// `4^-x`.
#[inline]
pub fn pow4_neg(x: u64) -> f64 {
    (-2.0 * x as f64).exp2()
}

/// `1 - (1 - b)^(1/k)` without cancellation for tiny `b`.
pub fn per_pair_infidelity(block_infidelity: f64, k: u64) -> f64 {
    if block_infidelity >= 1.0 {
        return 1.0;
    }
    if block_infidelity <= 0.0 {
        return 0.0;
    }
    -((-block_infidelity).ln_1p() / k as f64).exp_m1()
}

/// Ceiling that forgives representation error just above an integer.
pub(crate) fn ceil_tolerant(x: f64) -> f64 {
    (x - 1e-9 * x.abs().max(1.0)).ceil()
}
