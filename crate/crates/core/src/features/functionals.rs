//! Statistics that collapse a framewise contour into one value.
//! Empty input yields 0 everywhere so feature vectors stay finite.

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population standard deviation.
pub fn std(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn min(x: &[f64]) -> f64 {
    x.iter().cloned().reduce(f64::min).unwrap_or(0.0)
}

pub fn max(x: &[f64]) -> f64 {
    x.iter().cloned().reduce(f64::max).unwrap_or(0.0)
}

pub fn median(x: &[f64]) -> f64 {
    percentile(x, 50.0)
}

/// Linear-interpolated percentile, `p` in [0, 100].
pub fn percentile(x: &[f64], p: f64) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 100.0) / 100.0 * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// Population skewness; 0 for constant input.
pub fn skewness(x: &[f64]) -> f64 {
    let sd = std(x);
    if sd <= 1e-12 * mean(x).abs().max(1e-300) || sd == 0.0 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| ((v - m) / sd).powi(3)).sum::<f64>() / x.len() as f64
}

/// Coefficient of variation `std / |mean|`; 0 when the mean is 0.
pub fn stddev_norm(x: &[f64]) -> f64 {
    let m = mean(x);
    if m == 0.0 {
        return 0.0;
    }
    std(x) / m.abs()
}

/// Rates of change per second split into rising and falling parts, computed
/// within contiguous segments only.
pub fn slopes(segments: &[Vec<f64>], frame_rate: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rising = Vec::new();
    let mut falling = Vec::new();
    for seg in segments {
        for w in seg.windows(2) {
            let d = (w[1] - w[0]) * frame_rate;
            if d > 0.0 {
                rising.push(d);
            } else if d < 0.0 {
                falling.push(-d);
            }
        }
    }
    (rising, falling)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_statistics() {
        let x = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&x), 5.0);
        assert_eq!(std(&x), 2.0);
        assert_eq!(median(&x), 4.5);
        assert_eq!(min(&x), 2.0);
        assert_eq!(max(&x), 9.0);
        assert_eq!(stddev_norm(&x), 0.4);
        assert!((percentile(&[1.0, 2.0, 3.0, 4.0, 5.0], 20.0) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn skewness_sign_and_constants() {
        assert_eq!(skewness(&[3.0; 5]), 0.0);
        assert!(skewness(&[0.0, 0.0, 0.0, 10.0]) > 0.0);
        assert!((skewness(&[1.0, 2.0, 3.0])).abs() < 1e-12);
    }

    #[test]
    fn empty_is_zero() {
        for f in [mean, std, min, max, median, skewness, stddev_norm] {
            assert_eq!(f(&[]), 0.0);
        }
    }

    #[test]
    fn slopes_stay_inside_segments() {
        let (r, f) = slopes(&[vec![1.0, 2.0, 1.5], vec![10.0, 10.5]], 100.0);
        assert_eq!(r, vec![100.0, 50.0]);
        assert_eq!(f, vec![50.0]);
    }
}
