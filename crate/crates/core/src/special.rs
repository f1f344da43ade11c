//! Elementary functions shared by the constants, barrier and ABP modules.

use crate::error::{LabError, Result};

/// `t coth t`, with value 1 at the origin.
pub fn cal_h(t: f64) -> Result<f64> {
    check_arg(t)?;
    Ok(cal_h_unchecked(t))
}

/// `sinh t / t`, with value 1 at the origin.
pub fn cal_s(t: f64) -> Result<f64> {
    check_arg(t)?;
    Ok(cal_s_unchecked(t))
}

fn check_arg(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(LabError::InvalidParam(format!("negative argument {t}")));
    }
    Ok(())
}

pub(crate) fn cal_h_unchecked(t: f64) -> f64 {
    if t < 1e-4 {
        let t2 = t * t;
        1.0 + t2 / 3.0 - t2 * t2 / 45.0
    } else {
        t / t.tanh()
    }
}

pub(crate) fn cal_s_unchecked(t: f64) -> f64 {
    if t < 1e-4 {
        let t2 = t * t;
        1.0 + t2 / 6.0 + t2 * t2 / 120.0
    } else {
        t.sinh() / t
    }
}

/// `ln(sinh t / t)` without overflow.
pub fn ln_cal_s(t: f64) -> f64 {
    if t < 1e-4 {
        let t2 = t * t;
        t2 / 6.0 - t2 * t2 / 180.0
    } else if t < 20.0 {
        (t.sinh() / t).ln()
    } else {
        t - std::f64::consts::LN_2 + (-(-2.0 * t).exp()).ln_1p() - t.ln()
    }
}

/// `ln cosh t` without overflow.
pub fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `x cot x`, the transverse Hessian factor on the sphere.
pub fn x_cot_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 - x2 * x2 / 45.0
    } else {
        x / x.tan()
    }
}

/// `sin x / x`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Natural log of `exp(a) + exp(b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits_at_zero() {
        assert_eq!(cal_h(0.0).unwrap(), 1.0);
        assert_eq!(cal_s(0.0).unwrap(), 1.0);
        assert!(cal_h(-1.0).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        for &t in &[9.9e-5, 1e-4, 1.01e-4] {
            assert!((cal_h_unchecked(t) - t / t.tanh()).abs() < 1e-14);
            assert!((cal_s_unchecked(t) - t.sinh() / t).abs() < 1e-14);
            assert!((x_cot_x(t) - t / t.tan()).abs() < 1e-14);
        }
    }

    #[test]
    fn log_forms_match_direct() {
        for &t in &[1e-6, 0.3, 5.0, 19.9, 25.0] {
            assert!((ln_cal_s(t) - (t.sinh() / t).ln()).abs() < 1e-12 * (1.0 + t));
            assert!((ln_cosh(t) - t.cosh().ln()).abs() < 1e-12 * (1.0 + t));
        }
        assert!((ln_cosh(1000.0) - (1000.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }
}
