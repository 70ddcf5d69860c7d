//! Small internal helpers: deterministic seed derivation and running stats.

/// One round of splitmix64. Good enough to decorrelate derived seeds.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child stream seed from a master seed and a path of indices.
///
/// Deterministic and stable: the same `(master, parts)` always yields the
/// same stream, independent of scheduling or parallelism.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

/// Mean and standard error of the mean of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Standard error of a binomial proportion estimate.
pub fn proportion_se(p_hat: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    // Floor the variance at one observation's worth so zero counts keep slack.
    let var = (p_hat * (1.0 - p_hat)).max(1.0 / n as f64);
    (var / n as f64).sqrt()
}
