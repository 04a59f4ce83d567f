//! Floating-point accumulation helpers.

/// Slices up to this length are summed left to right; longer ones are split
/// in half recursively.
pub const PAIRWISE_BLOCK: usize = 1024;

/// Pairwise (tree) summation.
///
/// For `values.len() <= PAIRWISE_BLOCK` this is the plain sequential sum, so
/// small inputs give exactly the same bits as a naive loop. Above the block
/// size the rounding error grows as `O(log n)` instead of `O(n)`.
pub fn sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        values.iter().fold(0.0, |acc, v| acc + v)
    } else {
        let mid = values.len() / 2;
        sum(&values[..mid]) + sum(&values[mid..])
    }
}

/// Arithmetic mean via [`sum`]. Returns `NaN` for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    sum(values) / values.len() as f64
}

/// Median of a slice (mean of the two middle values for even lengths).
/// Returns `None` if the slice is empty or holds a NaN.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both are zero.
/// `a * b - c * d` with one rounding error at most, via fused multiply-add.
pub fn difference_of_products(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let cd = c * d;
    let err = c.mul_add(-d, cd);
    a.mul_add(b, -cd) + err
}

pub fn relative_difference(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
