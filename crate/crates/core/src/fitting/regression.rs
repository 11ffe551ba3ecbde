//! Simple linear regression slope with a two-sided t test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeTest {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
    pub n: usize,
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn two_sided_p_value(t_value: f64, df: f64) -> f64 {
    if t_value.is_nan() {
        return f64::NAN;
    }
    if t_value.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    // sf on the upper tail keeps precision for large |t|
    (2.0 * dist.sf(t_value.abs())).min(1.0)
}

/// OLS fit of `y = a + slope * x` and the t test of `slope = 0`.
pub fn slope_test(x: &[f64], y: &[f64]) -> Result<SlopeTest> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    if n < 3 {
        return Err(Error::InsufficientData(format!(
            "slope test needs at least 3 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateDesign("regressor has no variation".into()));
    }
    let df = nf - 2.0;
    if y.iter().all(|v| *v == y[0]) {
        return Ok(SlopeTest {
            slope: 0.0,
            intercept: y[0],
            std_error: 0.0,
            t_value: 0.0,
            p_value: 1.0,
            n,
        });
    }
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mean_x) * (b - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let std_error = (sse / df / sxx).sqrt();
    let t_value = if std_error > 0.0 {
        slope / std_error
    } else if slope == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(slope)
    };
    Ok(SlopeTest {
        slope,
        intercept,
        std_error,
        t_value,
        p_value: two_sided_p_value(t_value, df),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let s = slope_test(&x, &y).unwrap();
        assert_abs_diff_eq!(s.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.intercept, 1.0, epsilon = 1e-12);
        assert!(s.p_value < 1e-10);
    }

    #[test]
    fn known_t_statistic() {
        // x = 1..5, y = (2, 4, 5, 4, 5): slope 0.6, se = sqrt(2.4 / 3 / 10)
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 4.0, 5.0, 4.0, 5.0];
        let s = slope_test(&x, &y).unwrap();
        assert_abs_diff_eq!(s.slope, 0.6, epsilon = 1e-12);
        let se = (2.4f64 / 3.0 / 10.0).sqrt();
        assert_abs_diff_eq!(s.std_error, se, epsilon = 1e-12);
        // t = 2.1213 on 3 df: two-sided p = 0.12402 (R: 2*pt(-2.1213, 3))
        assert_abs_diff_eq!(s.p_value, 0.124, epsilon = 5e-4);
    }

    #[test]
    fn flat_response_has_unit_p_value() {
        let s = slope_test(&[0.1, 0.5, 0.9, 0.2], &[0.3; 4]).unwrap();
        assert_eq!(s.slope, 0.0);
        assert_eq!(s.p_value, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(slope_test(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(matches!(
            slope_test(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateDesign(_))
        ));
    }
}
