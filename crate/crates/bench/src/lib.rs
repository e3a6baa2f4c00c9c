//! Shared fixtures for the criterion benches.

/// `n` positive peakons spaced 1.5 apart with amplitudes cycling in `[0.5, 0.9]`.
pub fn spread(n: usize) -> (Vec<f64>, Vec<f64>) {
    let alphas = (0..n).map(|i| 0.5 + 0.1 * (i % 5) as f64).collect();
    let betas = (0..n).map(|i| 1.5 * i as f64).collect();
    (alphas, betas)
}
