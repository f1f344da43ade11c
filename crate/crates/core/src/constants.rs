//! Curvature parameters and the constants ledger.
//!
//! The constants span hundreds of orders of magnitude (`mu` reaches `1e-296`
//! on modest parameters and `C_2` is a double exponential), so every constant
//! is carried in log form and the plain value is `exp` of it, possibly `0` or
//! `inf`.

use crate::error::{LabError, Result};
use crate::report::{float_repr, CheckReport};
use crate::special::{cal_h_unchecked, cal_s_unchecked, ln_cal_s, ln_cosh, log_add_exp};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;

/// Effective dimension `N` in `[2, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffDim {
    Finite(f64),
    Infinite,
}

impl EffDim {
    pub fn is_finite(&self) -> bool {
        matches!(self, EffDim::Finite(_))
    }

    pub fn value(&self) -> f64 {
        match *self {
            EffDim::Finite(n) => n,
            EffDim::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Result<f64> {
        match *self {
            EffDim::Finite(n) => Ok(n),
            EffDim::Infinite => Err(LabError::Unsupported("requires finite N".into())),
        }
    }
}

impl fmt::Display for EffDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EffDim::Finite(n) => write!(f, "{n}"),
            EffDim::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for EffDim {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(EffDim::Infinite),
            t => {
                let n: f64 = t.parse().map_err(|_| LabError::InvalidParam(format!("bad N: {s}")))?;
                if n.is_infinite() && n > 0.0 {
                    Ok(EffDim::Infinite)
                } else if n >= 2.0 {
                    Ok(EffDim::Finite(n))
                } else {
                    Err(LabError::InvalidParam(format!("N = {s} must be >= 2")))
                }
            }
        }
    }
}

impl Serialize for EffDim {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EffDim::Finite(n) => s.serialize_f64(*n),
            EffDim::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for EffDim {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(n) => n.to_string().parse::<EffDim>(),
            Raw::Str(s) => s.parse::<EffDim>(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// `(K, N, R)`: Ricci lower-bound magnitude, effective dimension, reference radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureParams {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "N")]
    pub n: EffDim,
    #[serde(rename = "R")]
    pub r: f64,
}

impl CurvatureParams {
    pub fn new(k: f64, n: EffDim, r: f64) -> Result<Self> {
        let p = CurvatureParams { k, n, r };
        p.validate()?;
        Ok(p)
    }

    pub fn finite(k: f64, n: f64, r: f64) -> Result<Self> {
        Self::new(k, EffDim::Finite(n), r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0 && self.k.is_finite()) {
            return Err(LabError::InvalidParam(format!("K = {} must be >= 0", self.k)));
        }
        if let EffDim::Finite(n) = self.n {
            if !(n >= 2.0 && n.is_finite()) {
                return Err(LabError::InvalidParam(format!("N = {n} must be >= 2")));
            }
        }
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(LabError::InvalidParam(format!("R = {} must be > 0", self.r)));
        }
        Ok(())
    }

    /// `sqrt(K) R`, the only combination the ledger depends on.
    pub fn scale(&self) -> f64 {
        self.k.sqrt() * self.r
    }
}

/// `omega_{K,N} = 2 sqrt(K/N)`.
pub fn omega(k: f64, n: f64) -> f64 {
    2.0 * (k / n).sqrt()
}

/// `ln D_{K,N,r} = N ln 2 + 4 r sqrt(NK)`.
pub fn ln_doubling(k: f64, n: f64, r: f64) -> f64 {
    n * LN_2 + 4.0 * r * (n * k).sqrt()
}

/// Doubling constant `D_{K,N,r} = 2^N exp(4 r sqrt(NK))`.
pub fn doubling(k: f64, n: f64, r: f64) -> f64 {
    ln_doubling(k, n, r).exp()
}

/// `eta_{K,N,r} = log2(D_{K,N,r}) / N`.
pub fn eta(k: f64, n: f64, r: f64) -> f64 {
    1.0 + 4.0 * r * (n * k).sqrt() / (n * LN_2)
}

/// `alpha = N H(omega R)`.
pub fn alpha(k: f64, n: f64, r: f64) -> f64 {
    n * cal_h_unchecked(omega(k, n) * r)
}

/// `ln(-ln(1 - y))` for `y` in `(0, 1)`, accurate for tiny `y`.
fn ln_neg_ln1m(ln_y: f64) -> f64 {
    let y = ln_y.exp();
    if y < 1e-8 {
        // -ln(1-y) = y (1 + y/2 + y^2/3 + ...)
        ln_y + (y / 2.0 + y * y / 3.0).ln_1p()
    } else {
        (-(-y).ln_1p()).ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsLedger {
    pub params: CurvatureParams,
    pub omega: f64,
    /// `D_{K,N,r}` at `r = R, 2R, 4R`.
    pub doubling: [f64; 3],
    pub eta: f64,
    pub alpha: f64,
    #[serde(with = "float_repr")]
    pub mu: f64,
    pub ln_mu: f64,
    pub big_m: f64,
    pub ln_big_m: f64,
    pub delta0: f64,
    #[serde(with = "float_repr")]
    pub c3: f64,
    pub ln_ln_c3: f64,
    #[serde(with = "float_repr")]
    pub p0: f64,
    pub ln_p0: f64,
    #[serde(with = "float_repr")]
    pub p1: f64,
    pub ln_p1: f64,
    #[serde(with = "float_repr")]
    pub c0: f64,
    #[serde(with = "float_repr")]
    pub ln_c0: f64,
    #[serde(with = "float_repr")]
    pub c1_p0: f64,
    #[serde(with = "float_repr")]
    pub c2: f64,
    pub ln_ln_c2: f64,
}

impl ConstantsLedger {
    pub fn n(&self) -> f64 {
        self.params.n.value()
    }

    /// `ln C_3`, possibly `inf`.
    pub fn ln_c3(&self) -> f64 {
        self.ln_ln_c3.exp()
    }

    /// `ln C_2 = ln C_1(p0)`, possibly `inf`.
    pub fn ln_c2(&self) -> f64 {
        self.ln_ln_c2.exp()
    }

    /// `N eta`, the integrability exponent of the right-hand side.
    pub fn n_eta(&self) -> f64 {
        self.n() * self.eta
    }
}

pub fn build_ledger(params: CurvatureParams) -> Result<ConstantsLedger> {
    params.validate()?;
    let n = params.n.finite()?;
    let (k, r) = (params.k, params.r);
    let w = omega(k, n);
    let wr = w * r;
    let a = alpha(k, n, r);
    let ln18 = 18f64.ln();
    let ln_d = [ln_doubling(k, n, r), ln_doubling(k, n, 2.0 * r), ln_doubling(k, n, 4.0 * r)];
    let et = eta(k, n, 2.0 * r);

    let ln_mu = -n * (3.0 * ln18 + 2.0 * a.ln() + a * ln18 + ln_cosh(wr)) - 4.0 * ln_d[2];
    let ln_big_m = 2f64.ln() + 2.0 * a.ln() + a * ln18;
    let ln_delta0 = -(2f64.ln() + 4.0 / n * ln_d[1] + ln_cal_s(wr));

    // p0 ln M = -ln(1 - y), y = (e-1) mu / e
    let ln_y = (E - 1.0).ln() - 1.0 + ln_mu;
    let ln_p0 = ln_neg_ln1m(ln_y) - ln_big_m.ln();
    let p0 = ln_p0.exp();
    let ln_c0 = 2.0 / p0;
    let ln_p1 = ln_p0 - (n * et).ln();

    let ln_ln_c3 = log_add_exp(
        log_add_exp((LN_2 + ln_d[1]).ln(), ln_big_m.ln() - ln_p0 - n.ln()),
        (-ln_mu).ln() - n.ln(),
    );

    // Sigma = sum_k (1 + 1/M)^(-k p1) = 1 / (1 - exp(-x))
    let ln_x = ln_p1 + (1.0 / ln_big_m.exp()).ln_1p().ln();
    let x = ln_x.exp();
    let ln_sigma = if x < 1e-8 { -ln_x + x / 2.0 } else { -(-(-x).exp_m1()).ln() };
    let ln_a = log_add_exp(log_add_exp(3f64.ln().ln(), ln_ln_c3), ln_sigma.ln());
    let a_big = ln_a.exp();
    let corr = ((-ln_delta0).ln() + ln_p1 - ln_a).exp();
    let ln_ln_c2 = ln_a - ln_p1 + if a_big.is_finite() { corr.ln_1p() } else { 0.0 };
    let c2 = ln_ln_c2.exp().exp();

    Ok(ConstantsLedger {
        params,
        omega: w,
        doubling: ln_d.map(f64::exp),
        eta: et,
        alpha: a,
        mu: ln_mu.exp(),
        ln_mu,
        big_m: ln_big_m.exp(),
        ln_big_m,
        delta0: ln_delta0.exp(),
        c3: ln_ln_c3.exp().exp(),
        ln_ln_c3,
        p0,
        ln_p0,
        p1: ln_p1.exp(),
        ln_p1,
        c0: ln_c0.exp(),
        ln_c0,
        c1_p0: c2,
        c2,
        ln_ln_c2,
    })
}

/// Checks the four items of the constants lemma, plus the `C_3` estimate.
///
/// Item ii) is checked as `e^{1/p0} delta0 >= 1`, i.e. `-ln delta0 <= 1/p0`.
pub fn verify_ledger(l: &ConstantsLedger) -> Result<Vec<CheckReport>> {
    let n = l.params.n.finite()?;
    let anchor = "constants estimate";
    let mut out = Vec::with_capacity(5);

    // i) 1 + (q - 1) sum_k (q (1 - mu))^k = e with q = M^{p0}
    let i = if l.mu >= f64::MIN_POSITIVE {
        let qm1 = (l.p0 * l.ln_big_m).exp_m1();
        // 1 - q (1 - mu), which rounds to 0 if formed directly
        let denom = (1.0 + qm1) * l.mu - qm1;
        if !(denom > 0.0) {
            return Err(LabError::DivergentSeries { ratio: 1.0 - denom });
        }
        let residual = (1.0 + qm1 / denom - E).abs();
        CheckReport::identity("constants.geometric_sum", anchor, residual, 1e-10)
            .diag_f64("one_minus_ratio", denom)
            .diag_f64("q_minus_1", qm1)
    } else {
        CheckReport::premise_failure("constants.geometric_sum", anchor, "mu below normal f64 range")
            .diag_f64("ln_mu", l.ln_mu)
    };
    out.push(i);

    out.push(
        CheckReport::inequality("constants.delta0_vs_p0", anchor, -l.delta0.ln(), 1.0 / l.p0)
            .diag_f64("delta0", l.delta0)
            .diag("form", "exp(1/p0) * delta0 >= 1"),
    );

    let lower = l.ln_mu - 4f64.ln() - l.ln_big_m.ln();
    out.push(
        CheckReport::inequality("constants.p0_lower_bound", anchor, lower, l.ln_p0)
            .diag("form", "ln(mu / (4 ln M)) <= ln p0"),
    );

    out.push(
        CheckReport::inequality("constants.c2_finite", anchor, l.ln_ln_c2, f64::MAX)
            .diag_f64("ln_c2", l.ln_c2())
            .diag("form", "ln ln C2 finite, so C2 is a finite positive real"),
    );
    let c2_ok = l.ln_ln_c2.is_finite();
    if let Some(last) = out.last_mut() {
        last.pass &= c2_ok;
    }

    // D_{2R} M mu^{-1/p0} C3^{-N eta / p0} < 1, compared as ln P < ln Q
    let ln_d2 = l.doubling[1].ln();
    let ln_p = log_add_exp((ln_d2 + l.ln_big_m).ln(), (-l.ln_mu).ln() - l.ln_p0);
    let ln_q = (n * l.eta).ln() - l.ln_p0 + l.ln_ln_c3;
    let c3 = CheckReport::inequality("constants.c3_estimate", "C3 estimate", ln_p, ln_q)
        .diag("form", "ln(ln D2R + ln M - ln mu / p0) < ln(N eta ln C3 / p0)");
    let strict = ln_p < ln_q;
    let mut c3 = c3;
    c3.pass = strict;
    out.push(c3);
    Ok(out)
}

/// `H` and `S` identities on a sample: `S H = cosh`, `H(t) <= 1 + t`.
pub fn special_function_checks(ts: &[f64]) -> Vec<CheckReport> {
    let mut prod = 0.0f64;
    let mut lin = f64::NEG_INFINITY;
    for &t in ts {
        let (h, s) = (cal_h_unchecked(t), cal_s_unchecked(t));
        prod = prod.max((s * h - t.cosh()).abs() / t.cosh());
        lin = lin.max(h - 1.0 - t);
    }
    vec![
        CheckReport::identity("special.s_times_h", "tc, st", prod, 1e-14),
        CheckReport::inequality("special.h_linear_bound", "linear tc", lin, 0.0),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flat_ledger() {
        let l = build_ledger(CurvatureParams::finite(0.0, 2.0, 1.0).unwrap()).unwrap();
        assert_eq!(l.omega, 0.0);
        assert_relative_eq!(l.doubling[0], 4.0, max_relative = 1e-15);
        assert_relative_eq!(l.eta, 1.0);
        assert_relative_eq!(l.alpha, 2.0);
        assert_relative_eq!(l.big_m, 2592.0, max_relative = 1e-14);
        assert_relative_eq!(l.delta0, 1.0 / 32.0, max_relative = 1e-14);
        assert!(verify_ledger(&l).unwrap().iter().all(|r| r.pass));
    }

    #[test]
    fn curved_alpha() {
        let l = build_ledger(CurvatureParams::finite(1.0, 2.0, 1.0).unwrap()).unwrap();
        let s2 = 2f64.sqrt();
        assert_relative_eq!(l.alpha, 2.0 * s2 / s2.tanh(), max_relative = 1e-14);
        assert_relative_eq!(l.alpha, 3.1837833110409747, max_relative = 1e-14);
    }

    #[test]
    fn infinite_dimension_is_unsupported() {
        let p = CurvatureParams::new(0.0, EffDim::Infinite, 1.0).unwrap();
        assert!(matches!(build_ledger(p), Err(LabError::Unsupported(_))));
    }

    #[test]
    fn eff_dim_parsing() {
        assert_eq!("inf".parse::<EffDim>().unwrap(), EffDim::Infinite);
        assert_eq!("3".parse::<EffDim>().unwrap(), EffDim::Finite(3.0));
        assert!("1.5".parse::<EffDim>().is_err());
        let v: EffDim = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(v, EffDim::Infinite);
        let v: EffDim = serde_json::from_str("4").unwrap();
        assert_eq!(v, EffDim::Finite(4.0));
        assert_eq!(serde_json::to_string(&EffDim::Infinite).unwrap(), "\"inf\"");
    }
}
