//! Agreement and correlation statistics.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::Float;

use crate::error::{Error, Result};

/// Cohen's kappa of two label arrays. When chance agreement is certain the
/// value is 1 for identical arrays and 0 otherwise.
pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            what: "annotation arrays",
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidInput("kappa needs at least one item".into()));
    }
    let n = a.len() as f64;
    let p_o = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ma: HashMap<&T, usize> = HashMap::new();
    let mut mb: HashMap<&T, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1;
        *mb.entry(y).or_default() += 1;
    }
    let p_e: f64 = ma
        .iter()
        .map(|(k, &ca)| ca as f64 * mb.get(k).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(if a == b { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Pearson product-moment correlation.
pub fn pearson<F: Float>(x: &[F], y: &[F]) -> Result<F> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "correlation inputs",
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidInput("correlation needs at least two points".into()));
    }
    let n = F::from(x.len()).unwrap();
    let mx = x.iter().fold(F::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(F::zero(), |s, &v| s + v) / n;
    let (mut sxy, mut sxx, mut syy) = (F::zero(), F::zero(), F::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx <= F::zero() {
        return Err(Error::ZeroVariance("x"));
    }
    if syy <= F::zero() {
        return Err(Error::ZeroVariance("y"));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-F::one()).min(F::one()))
}

/// Mean and sample standard deviation (0 for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_values() {
        assert!(cohens_kappa(&[1, 0, 1, 1], &[1, 1, 1, 1]).unwrap().abs() < 1e-12);
        assert_eq!(cohens_kappa(&["a", "b", "a"], &["a", "b", "a"]).unwrap(), 1.0);
        assert_eq!(cohens_kappa(&[1, 1], &[1, 1]).unwrap(), 1.0);
        assert!(cohens_kappa(&[1], &[1, 2]).is_err());
        let empty: [u8; 0] = [];
        assert!(cohens_kappa(&empty, &empty).is_err());
    }

    #[test]
    fn pearson_values() {
        // sxy = 3.5, sxx = 5, syy = 4.75
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 5.0, 4.0]).unwrap();
        assert!((r - 3.5 / (5.0f64 * 4.75).sqrt()).abs() < 1e-12);
        assert_eq!(pearson(&[1.0f32, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(matches!(
            pearson(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::ZeroVariance("x"))
        ));
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
    }
}
