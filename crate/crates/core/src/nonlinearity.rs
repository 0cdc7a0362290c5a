//! Analytic nonlinearities f with derivatives and primitive, plus the
//! sign-condition and boundedness checks the convergence theory needs.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Validation grid density for sign and boundedness sampling.
pub const VALIDATION_SAMPLES: usize = 10_001;
const SIGN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SignStatus {
    Satisfied,
    Violated { witness: f64 },
    Unchecked,
}

type Eval = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Nonlinearity {
    pub name: String,
    f: Eval,
    f_prime: Eval,
    f_second: Eval,
    big_f: Eval,
    pub status: SignStatus,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(fm, "Nonlinearity({}, {:?})", self.name, self.status)
    }
}

impl Nonlinearity {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        f_second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        big_f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        status: SignStatus,
    ) -> Self {
        Nonlinearity {
            name: name.into(),
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            f_second: Arc::new(f_second),
            big_f: Arc::new(big_f),
            status,
        }
    }

    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        (self.f_prime)(s)
    }

    pub fn f_second(&self, s: f64) -> f64 {
        (self.f_second)(s)
    }

    /// Primitive F(s) = int_0^s f, with F(0) = 0.
    pub fn big_f(&self, s: f64) -> f64 {
        (self.big_f)(s)
    }
}

/// Named builtin nonlinearities. `linear` takes lambda >= 0 as f = -lambda s.
pub fn builtin(name: &str) -> Result<Nonlinearity> {
    builtin_with_param(name, None)
}

pub fn builtin_with_param(name: &str, param: Option<f64>) -> Result<Nonlinearity> {
    match name {
        "zero" => Ok(Nonlinearity::new(
            "zero",
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            |_| 0.0,
            SignStatus::Satisfied,
        )),
        "linear" => {
            let lam = param.unwrap_or(1.0);
            if lam < 0.0 {
                return Err(Error::InvalidConfig(format!("linear nonlinearity needs lambda >= 0, got {lam}")));
            }
            Ok(Nonlinearity::new(
                format!("linear({lam})"),
                move |s| -lam * s,
                move |_| -lam,
                |_| 0.0,
                move |s| -0.5 * lam * s * s,
                SignStatus::Satisfied,
            ))
        }
        "cubic_stable" => Ok(Nonlinearity::new(
            "cubic_stable",
            |s| -s * s * s,
            |s| -3.0 * s * s,
            |s| -6.0 * s,
            |s| -0.25 * s * s * s * s,
            SignStatus::Satisfied,
        )),
        "cubic_unstable" => Ok(Nonlinearity::new(
            "cubic_unstable",
            |s| s * s * s,
            |s| 3.0 * s * s,
            |s| 6.0 * s,
            |s| 0.25 * s * s * s * s,
            SignStatus::Violated { witness: 1.0 },
        )),
        "saturating" => Ok(Nonlinearity::new(
            "saturating",
            |s| -s * s * s / (1.0 + s * s),
            |s| -(s.powi(4) + 3.0 * s * s) / (1.0 + s * s).powi(2),
            |s| -2.0 * s * (3.0 - s * s) / (1.0 + s * s).powi(3),
            |s| -0.5 * s * s + 0.5 * (1.0 + s * s).ln(),
            SignStatus::Satisfied,
        )),
        other => Err(Error::UnknownNonlinearity(other.to_string())),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SignReport {
    pub status: SignStatus,
    pub range: f64,
    /// Worst sampled value of s*f(s).
    pub worst: f64,
    pub witness: Option<f64>,
}

/// Sample s*f(s) and F(s) on a uniform grid over [-beta, beta].
pub fn validate_sign(nl: &Nonlinearity, beta: f64, n_samples: usize) -> SignReport {
    let n = n_samples.max(3);
    let mut worst = f64::NEG_INFINITY;
    let mut witness = None;
    for k in 0..n {
        let s = -beta + 2.0 * beta * k as f64 / (n - 1) as f64;
        let sf = s * nl.f(s);
        if sf > worst {
            worst = sf;
            if sf > SIGN_TOL {
                witness = Some(s);
            }
        }
        if nl.big_f(s) > SIGN_TOL && witness.is_none() {
            witness = Some(s);
        }
    }
    let status = match witness {
        Some(w) => SignStatus::Violated { witness: w },
        None => SignStatus::Satisfied,
    };
    SignReport { status, range: beta, worst, witness }
}

/// Sampled suprema of |f|, |f'|, |f''| over [-beta, beta].
pub fn bounds_on(nl: &Nonlinearity, beta: f64) -> (f64, f64, f64) {
    let n = VALIDATION_SAMPLES;
    let mut b = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..n {
        let s = -beta + 2.0 * beta * k as f64 / (n - 1) as f64;
        b.0 = b.0.max(nl.f(s).abs());
        b.1 = b.1.max(nl.f_prime(s).abs());
        b.2 = b.2.max(nl.f_second(s).abs());
    }
    b
}
