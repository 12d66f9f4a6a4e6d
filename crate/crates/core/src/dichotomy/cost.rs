use super::DichotomyError;

fn check(p: usize, params: [f64; 4]) -> Result<f64, DichotomyError> {
    if p < 2 {
        return Err(DichotomyError::Domain(format!("cost models need p >= 2, got {p}")));
    }
    if params.iter().any(|v| !(*v >= 0.0)) {
        return Err(DichotomyError::Domain("model parameters must be non-negative".into()));
    }
    Ok((p as f64).log2())
}

/// Modelled dichotomy time for `p` ranks and a series of `l` systems:
/// `α (log₂p + 1) log₂p + 2 l (log₂p − (p−1)/p)(γ + β/2)`, with `α` the
/// message latency, `β` the per-scalar transfer time and `γ` the time of one
/// addition.
pub fn predict_time_dichotomy(p: usize, l: f64, alpha: f64, beta: f64, gamma: f64) -> Result<f64, DichotomyError> {
    let lg = check(p, [l, alpha, beta, gamma])?;
    let pf = p as f64;
    Ok(alpha * (lg + 1.0) * lg + 2.0 * l * (lg - (pf - 1.0) / pf) * (gamma + beta / 2.0))
}

/// Modelled cyclic-reduction time: `2 log₂p (α + l β + l γ)`.
pub fn predict_time_cyclic(p: usize, l: f64, alpha: f64, beta: f64, gamma: f64) -> Result<f64, DichotomyError> {
    let lg = check(p, [l, alpha, beta, gamma])?;
    Ok(2.0 * lg * (alpha + l * beta + l * gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plug_ins() {
        assert!((predict_time_dichotomy(2, 1.0, 0.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((predict_time_cyclic(4, 1.0, 1.0, 1.0, 1.0).unwrap() - 12.0).abs() < 1e-15);
    }

    #[test]
    fn bandwidth_bound_ratio_at_sixteen() {
        let l = 1e12;
        let r = predict_time_dichotomy(16, l, 0.0, 1.0, 1.0).unwrap() / predict_time_cyclic(16, l, 0.0, 1.0, 1.0).unwrap();
        let expect = (4.0 - 15.0 / 16.0) / 4.0 * 1.5 / 2.0;
        assert!((r - expect).abs() < 1e-12);
        assert!((expect - 0.57421875).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_worlds_and_negative_parameters() {
        assert!(predict_time_dichotomy(1, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(predict_time_cyclic(0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(predict_time_cyclic(4, 1.0, -1.0, 1.0, 1.0).is_err());
    }
}
