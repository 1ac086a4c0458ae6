use alloc::vec::Vec;

use super::TraitError;

/// Sample variance and mean.
fn sample_var(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    (xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0), mean)
}

/// Cronbach's alpha of a users x items score matrix, with sample variances.
pub fn cronbach_alpha(rows: &[Vec<f64>]) -> Result<f64, TraitError> {
    let items = rows.first().map_or(0, Vec::len);
    if rows.len() < 2 || items < 2 {
        return Err(TraitError::TooFewForAlpha { users: rows.len(), items });
    }
    let item_var: f64 = (0..items).map(|j| sample_var(rows.iter().map(move |r| r[j])).0).sum();
    let (total_var, mean) = sample_var(rows.iter().map(|r| r.iter().sum::<f64>()));
    // identical totals can leave rounding residue in the variance
    if !(total_var > 1e-24 * mean * mean) || !total_var.is_finite() {
        return Err(TraitError::UndefinedAlpha);
    }
    let k = items as f64;
    Ok(k / (k - 1.0) * (1.0 - item_var / total_var))
}
