use super::{normalize_rows, validate_stochastic, Matrix};
use crate::error::{check_positive, check_range, Error, Result};

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { what, expected, got });
    }
    Ok(())
}

/// Scale the off-diagonal entries of row `s` by `1 + lambda * eps_bar(s)` and
/// renormalize. A row-wide scale would cancel under renormalization, so only
/// transitions away from `s` are amplified.
pub fn entropy_modulated_mutation(base: &Matrix, eps_bar: &[f64], lambda: f64) -> Result<Matrix> {
    let n = base.len();
    validate_stochastic(base, n)?;
    check_len("mean entropies", n, eps_bar.len())?;
    check_positive("lambda", lambda)?;
    for &e in eps_bar {
        check_range("mean entropy", e, 0.0, 1.0, "[0, 1]")?;
    }
    let mut out = base.clone();
    for (s, row) in out.iter_mut().enumerate() {
        if eps_bar[s] == 0.0 {
            continue;
        }
        let factor = 1.0 + lambda * eps_bar[s];
        for (t, x) in row.iter_mut().enumerate() {
            if t != s {
                *x *= factor;
            }
        }
    }
    // untouched rows keep their exact entries
    for (s, row) in out.iter_mut().enumerate() {
        if eps_bar[s] != 0.0 {
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= sum);
        }
    }
    Ok(out)
}

/// Scale entry `(s, t)` by `exp(-gamma * (O(s) - O(t)))` and renormalize rows.
pub fn ownership_modulated_mutation(base: &Matrix, ownership: &[f64], gamma: f64) -> Result<Matrix> {
    let n = base.len();
    validate_stochastic(base, n)?;
    check_len("mean ownership", n, ownership.len())?;
    check_positive("entrenchment", gamma)?;
    for &o in ownership {
        check_range("mean ownership", o, 0.0, 1.0, "[0, 1]")?;
    }
    let mut out: Matrix = base
        .iter()
        .enumerate()
        .map(|(s, row)| {
            row.iter()
                .enumerate()
                .map(|(t, m)| m * (-gamma * (ownership[s] - ownership[t])).exp())
                .collect()
        })
        .collect();
    normalize_rows(&mut out);
    Ok(out)
}
