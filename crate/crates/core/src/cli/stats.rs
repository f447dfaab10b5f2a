//! Small statistics helpers.

use super::{CliError, Result};

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(CliError::Stats(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(CliError::Stats("need at least 2 points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CliError::Stats("zero variance input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_linear_relations() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 3.0).collect();
        assert!((pearson_r(&xs, &ys).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixture_matches_two_pass_covariance_oracle() {
        let xs = [0.3, 1.7, 2.2, 3.9, 4.1, 5.5, 6.0, 7.7, 8.2, 9.9];
        let ys = [1.1, 0.4, 2.9, 3.5, 3.2, 6.1, 5.8, 7.0, 9.3, 8.8];
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
        let vx = xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>() / n;
        let vy = ys.iter().map(|y| (y - my) * (y - my)).sum::<f64>() / n;
        let oracle = cov / (vx * vy).sqrt();
        assert!((pearson_r(&xs, &ys).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_error() {
        assert!(pearson_r(&[1.0], &[2.0]).is_err());
        assert!(pearson_r(&[1.0, 1.0], &[2.0, 3.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[3.0]).is_err());
    }
}
