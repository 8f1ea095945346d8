//! Least-squares trends used to judge growth and decay of sampled sequences.

/// Least-squares slope of `ys` against `xs`. Returns 0 for fewer than two points.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return 0.0;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Growth exponent of positive samples `(log2 scale, value)`: the slope of
/// log2 of block maxima against block position. Blocks have `block` samples.
pub fn block_growth(samples: &[(f64, f64)], block: usize) -> f64 {
    let block = block.max(1);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for chunk in samples.chunks(block) {
        let best = chunk.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        if best > 0.0 && best.is_finite() {
            xs.push(chunk.iter().map(|s| s.0).sum::<f64>() / chunk.len() as f64);
            ys.push(best.log2());
        } else if best.is_infinite() {
            return f64::INFINITY;
        }
    }
    slope(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        assert!((slope(&xs, &ys) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn oscillation_has_no_growth() {
        let s: Vec<(f64, f64)> = (0..80)
            .map(|i| {
                let x = i as f64 * 0.25;
                (x, 2.0 + (x * 1.7).sin())
            })
            .collect();
        assert!(block_growth(&s, 10).abs() < 0.05);
    }

    #[test]
    fn power_growth_detected() {
        let s: Vec<(f64, f64)> = (0..80).map(|i| (i as f64 * 0.25, 2f64.powf(i as f64 * 0.125))).collect();
        assert!((block_growth(&s, 10) - 0.5).abs() < 1e-9);
    }
}
