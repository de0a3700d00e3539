use super::special::student_t_two_sided;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

/// Two-sided Welch t-test with Welch–Satterthwaite degrees of freedom.
///
/// Two constant samples with equal means give `t = 0, p = 1`; with
/// different means the test is undefined and an error is returned.
pub fn welch_test(a: &[f64], b: &[f64]) -> Result<WelchResult, EvalError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(EvalError::SampleTooSmall(a.len(), b.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / na, vb / nb);
    let se2 = sa + sb;
    if se2 == 0.0 {
        if ma == mb {
            return Ok(WelchResult {
                t: 0.0,
                df: na + nb - 2.0,
                p_two_sided: 1.0,
            });
        }
        return Err(EvalError::ZeroVariance);
    }
    let t = (ma - mb) / libm::sqrt(se2);
    let df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(WelchResult {
        t,
        df,
        p_two_sided: student_t_two_sided(t, df),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let a = [1.0, 2.0, 4.0, 8.0];
        let r = welch_test(&a, &a).unwrap();
        assert_eq!((r.t, r.p_two_sided), (0.0, 1.0));
        let c = [0.9, 0.9, 0.9];
        assert_eq!(welch_test(&c, &c).unwrap().p_two_sided, 1.0);
        assert_eq!(welch_test(&c, &[1.0, 1.0]), Err(EvalError::ZeroVariance));
        assert_eq!(welch_test(&[1.0], &c), Err(EvalError::SampleTooSmall(1, 3)));
    }

    #[test]
    fn hand_computed_fixture() {
        // a: mean 2, var 1, n 3; b: mean 5, var 20/3, n 4.
        let r = welch_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0, 8.0]).unwrap();
        let (mb, vb) = mean_var(&[2.0, 4.0, 6.0, 8.0]);
        assert_eq!(mb, 5.0);
        let se2 = 1.0 / 3.0 + vb / 4.0;
        assert!((r.t - (-3.0 / libm::sqrt(se2))).abs() < 1e-14);
        let df = se2 * se2 / ((1.0f64 / 9.0) / 2.0 + (vb / 4.0) * (vb / 4.0) / 3.0);
        assert!((r.df - df).abs() < 1e-12);
        assert!(r.p_two_sided > 0.0 && r.p_two_sided < 1.0);
    }

    #[test]
    fn swap_negates_t_only() {
        let a = [0.3, 0.5, 0.9, 1.1, 0.2];
        let b = [1.3, 0.8, 1.9, 1.4];
        let ab = welch_test(&a, &b).unwrap();
        let ba = welch_test(&b, &a).unwrap();
        assert_eq!(ab.t, -ba.t);
        assert_eq!(ab.df, ba.df);
        assert_eq!(ab.p_two_sided, ba.p_two_sided);
    }

    #[test]
    fn affine_rescaling_keeps_p() {
        let a = [0.3, 0.5, 0.9, 1.1, 0.2];
        let b = [1.3, 0.8, 1.9, 1.4];
        let p = welch_test(&a, &b).unwrap().p_two_sided;
        let f = |v: &f64| 7.5 * v - 3.0;
        let a2: alloc::vec::Vec<f64> = a.iter().map(f).collect();
        let b2: alloc::vec::Vec<f64> = b.iter().map(f).collect();
        assert!((welch_test(&a2, &b2).unwrap().p_two_sided - p).abs() < 1e-12);
    }
}
