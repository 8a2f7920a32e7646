//! Small shared statistics helpers: Pearson correlation, interpolated
//! quantiles and fixed-width histograms.

/// Pearson correlation coefficient; `None` when fewer than two points or
/// either series has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Quantile with linear interpolation between order statistics
/// (the h = (n-1)q convention). Input must be sorted ascending.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&q) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Interquartile range Q3 - Q1 of an unsorted sample; `None` below 4 points.
pub fn iqr(values: &[f64]) -> Option<f64> {
    if values.len() < 4 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(quantile_sorted(&sorted, 0.75)? - quantile_sorted(&sorted, 0.25)?)
}

/// Fixed-width histogram over [0, 1]; values of exactly 1 land in the last
/// bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(bin_width: f64) -> Histogram {
        assert!(bin_width > 0.0 && bin_width <= 1.0);
        let bins = (1.0 / bin_width).ceil() as usize;
        Histogram {
            bin_width,
            counts: vec![0; bins],
            total: 0,
        }
    }

    pub fn add(&mut self, x: f64) {
        debug_assert!((0.0..=1.0).contains(&x));
        let bin = ((x / self.bin_width) as usize).min(self.counts.len() - 1);
        self.counts[bin] += 1;
        self.total += 1;
    }

    pub fn bin_bounds(&self, bin: usize) -> (f64, f64) {
        (bin as f64 * self.bin_width, ((bin + 1) as f64 * self.bin_width).min(1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_perfect_and_affine() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((pearson(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_degenerate() {
        assert!(pearson(&[1.0], &[2.0]).is_none());
        assert!(pearson(&[1.0, 1.0], &[2.0, 3.0]).is_none());
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.5), Some(2.5));
        assert_eq!(quantile_sorted(&xs, 0.25), Some(1.75));
        assert_eq!(quantile_sorted(&xs, 0.0), Some(1.0));
        assert_eq!(quantile_sorted(&xs, 1.0), Some(4.0));
    }

    #[test]
    fn iqr_matches_quartiles() {
        let xs = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(iqr(&xs), Some(3.25 - 1.75));
        assert_eq!(iqr(&[1.0, 2.0, 3.0]), None);
    }

    #[test]
    fn histogram_edges() {
        let mut h = Histogram::new(0.1);
        h.add(0.0);
        h.add(0.05);
        h.add(0.1);
        h.add(1.0);
        assert_eq!(h.counts[0], 2);
        assert_eq!(h.counts[1], 1);
        assert_eq!(h.counts[9], 1);
        assert_eq!(h.total, 4);
    }
}
