use crate::error::{Error, Result};

/// `E_eps sup_k (1/n) sum_i eps_i v_k[i]` over all `2^n` sign vectors, for a
/// finite family of value vectors `v_k` on a fixed sample of size `n <= 24`.
pub fn exact_rademacher(values: &[Vec<f64>]) -> Result<f64> {
    let n = values.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::invalid("need at least one function and one sample point"));
    }
    if n > 24 {
        return Err(Error::invalid(format!("{n} points is too many for full enumeration")));
    }
    if values.iter().any(|v| v.len() != n) {
        return Err(Error::structural("value vectors differ in length"));
    }
    let patterns = 1u64 << n;
    let mut total = 0.0;
    for mask in 0..patterns {
        let best = values
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, x)| if mask >> i & 1 == 1 { *x } else { -*x })
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        total += best;
    }
    Ok(total / (patterns as f64 * n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_function_averages_to_zero() {
        let r = exact_rademacher(&[vec![0.3, 0.9, 0.1]]).unwrap();
        assert!(r.abs() < 1e-15);
    }

    #[test]
    fn plus_minus_pair() {
        // sup over {v, -v} is |sum eps_i| / n; for n = 2, E|eps_1 + eps_2| = 1.
        let r = exact_rademacher(&[vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
    }
}
