//! Post-hoc checks on trajectories: differential-inequality bounds, decay
//! rate fitting with model selection, the rate-dichotomy report, and the
//! velocity decay check.

use serde::Serialize;

use crate::damping::{
    certify_integrally_positive, classify_structure, CertVerdict, StructureClass,
    DEFAULT_EPSILONS, DEFAULT_SCAN_STEP, DEFAULT_TOLERANCE,
};
use crate::dynamics::{SimConfig, Trajectory};
use crate::equilibria::{distance_to, Equilibrium, LojasiewiczEstimate};
use crate::error::{Error, Result};
use crate::fitutil::linear_fit;
use crate::nonlinearity::{validate_sign, SignStatus, VALIDATION_SAMPLES};

/// Relative floor below the series maximum past which samples are treated as
/// round-off noise and dropped before rate fitting.
const NOISE_FLOOR_REL: f64 = 1e-12;
const VALUE_FLOOR: f64 = 1e-300;
/// Minimum sample count after transient/noise trimming.
const MIN_FIT_SAMPLES: usize = 20;
/// Relative RMS gap required to prefer one decay model over the other.
const MODEL_GAP: f64 = 0.10;
/// Sign changes of d log y needed to classify a series as oscillatory.
const OSCILLATION_SIGN_CHANGES: usize = 5;

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum DecayClass {
    /// y ~ prefactor * exp(-rate t)
    Exponential { rate: f64, prefactor: f64 },
    /// y ~ prefactor * t^(-exponent)
    Polynomial { exponent: f64, prefactor: f64 },
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub class: DecayClass,
    pub window: (f64, f64),
    /// RMS residual (log space) of the selected model, or of the better
    /// model when inconclusive.
    pub rms_residual: f64,
    /// Relative RMS gap between the two candidate models.
    pub score_gap: f64,
    pub oscillatory: bool,
    pub samples_used: usize,
}

/// Replace an oscillatory series by its running maximum over a trailing
/// window of one period, estimated from the spacing of sign changes of
/// d log y (two per period).
fn envelope(series: &[(f64, f64)]) -> (Vec<(f64, f64)>, bool) {
    let mut change_times = Vec::new();
    let mut prev_sign = 0.0f64;
    for w in series.windows(2) {
        let d = w[1].1.ln() - w[0].1.ln();
        let s = if d > 0.0 {
            1.0
        } else if d < 0.0 {
            -1.0
        } else {
            prev_sign
        };
        if prev_sign != 0.0 && s != 0.0 && s != prev_sign {
            change_times.push(0.5 * (w[0].0 + w[1].0));
        }
        if s != 0.0 {
            prev_sign = s;
        }
    }
    if change_times.len() < OSCILLATION_SIGN_CHANGES {
        return (series.to_vec(), false);
    }
    let span = change_times.last().unwrap() - change_times.first().unwrap();
    let period = 2.0 * span / (change_times.len() - 1) as f64;
    let mut out = Vec::with_capacity(series.len());
    let mut lo = 0usize;
    for (i, &(t, _)) in series.iter().enumerate() {
        while series[lo].0 < t - period {
            lo += 1;
        }
        let m = series[lo..=i].iter().map(|&(_, y)| y).fold(f64::MIN, f64::max);
        out.push((t, m));
    }
    (out, true)
}

/// Fit exponential vs polynomial decay to a positive series and select the
/// better model when its log-space RMS is at least 10% lower; requires at
/// least 20 samples after dropping the initial transient fraction and
/// trailing round-off noise.
pub fn fit_decay(series: &[(f64, f64)], t_min_fraction: f64) -> Result<DecayFit> {
    if series.iter().any(|&(_, y)| y <= 0.0 || !y.is_finite()) {
        return Err(Error::NegativeSample(
            "decay fitting needs strictly positive finite samples".into(),
        ));
    }
    if series.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidConfig("series times must be strictly increasing".into()));
    }
    let mut data: Vec<(f64, f64)> =
        series.iter().map(|&(t, y)| (t, y.max(VALUE_FLOOR))).collect();

    // drop trailing samples that have hit the round-off noise floor
    let y_max = data.iter().map(|&(_, y)| y).fold(0.0f64, f64::max);
    let cutoff = y_max * NOISE_FLOOR_REL;
    while data.len() > 1 && data.last().unwrap().1 <= cutoff {
        data.pop();
    }

    // drop the initial transient fraction of the remaining time span
    let (t0, t1) = (data[0].0, data.last().unwrap().0);
    let t_start = t0 + t_min_fraction.clamp(0.0, 0.9) * (t1 - t0);
    data.retain(|&(t, _)| t >= t_start);
    if data.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { need: MIN_FIT_SAMPLES, have: data.len() });
    }

    let (data, oscillatory) = envelope(&data);

    // restrict both fits to t > 0 so the polynomial model is defined
    let pts: Vec<(f64, f64)> = data.iter().cloned().filter(|&(t, _)| t > 0.0).collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::TooFewSamples { need: MIN_FIT_SAMPLES, have: pts.len() });
    }
    let ts: Vec<f64> = pts.iter().map(|&(t, _)| t).collect();
    let log_ts: Vec<f64> = ts.iter().map(|&t| t.ln()).collect();
    let log_ys: Vec<f64> = pts.iter().map(|&(_, y)| y.ln()).collect();

    let (slope_e, icpt_e, _, rms_e) = linear_fit(&ts, &log_ys);
    let (slope_p, icpt_p, _, rms_p) = linear_fit(&log_ts, &log_ys);
    let window = (ts[0], *ts.last().unwrap());
    let samples_used = pts.len();

    let (rms_lo, rms_hi) = (rms_e.min(rms_p), rms_e.max(rms_p));
    let score_gap = if rms_hi > 0.0 { (rms_hi - rms_lo) / rms_hi } else { 0.0 };
    let exp_better = rms_e <= rms_p;
    let class = if score_gap > MODEL_GAP {
        if exp_better && slope_e < 0.0 {
            DecayClass::Exponential { rate: -slope_e, prefactor: icpt_e.exp() }
        } else if !exp_better && slope_p < 0.0 {
            DecayClass::Polynomial { exponent: -slope_p, prefactor: icpt_p.exp() }
        } else {
            DecayClass::Inconclusive
        }
    } else {
        DecayClass::Inconclusive
    };
    Ok(DecayFit { class, window, rms_residual: rms_lo, score_gap, oscillatory, samples_used })
}

#[derive(Debug, Clone, Serialize)]
pub struct OdeBoundCheck {
    pub alpha: f64,
    pub c: f64,
    /// Polynomial bound parameters (alpha > 1 only): v <= c_prime t^-beta.
    pub beta: Option<f64>,
    pub c_prime: Option<f64>,
    /// Worst of v' + C v^alpha over the interior samples.
    pub max_slack: f64,
    pub slack_violations: usize,
    pub bound_violations: usize,
}

/// Verify v' <= -C v^alpha by centered differences and check the implied
/// closed-form bound: v <= [C(alpha-1)]^(-1/(alpha-1)) t^(-1/(alpha-1)) for
/// alpha > 1, or v <= v(0) exp(-C t) for alpha = 1.
pub fn lemma3_check(samples: &[(f64, f64)], alpha: f64, c: f64) -> Result<OdeBoundCheck> {
    if !(alpha >= 1.0) || !(c > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "need alpha >= 1 and C > 0, got alpha = {alpha}, C = {c}"
        )));
    }
    if samples.len() < 3 {
        return Err(Error::TooFewSamples { need: 3, have: samples.len() });
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidConfig("samples must be time-sorted".into()));
    }
    if let Some(&(t, v)) = samples.iter().find(|&&(_, v)| v < 0.0) {
        return Err(Error::NegativeSample(format!("v({t}) = {v} < 0")));
    }

    let mut max_slack = f64::NEG_INFINITY;
    let mut slack_violations = 0usize;
    for i in 1..samples.len() - 1 {
        let (tm, vm) = samples[i - 1];
        let (_, vi) = samples[i];
        let (tp, vp) = samples[i + 1];
        let deriv = (vp - vm) / (tp - tm);
        let slack = deriv + c * vi.powf(alpha);
        max_slack = max_slack.max(slack);
        let tol = 1e-9 + 1e-5 * c * vi.powf(alpha);
        if slack > tol {
            slack_violations += 1;
        }
    }

    let (beta, c_prime) = if alpha > 1.0 {
        let b = 1.0 / (alpha - 1.0);
        (Some(b), Some((c * (alpha - 1.0)).powf(-b)))
    } else {
        (None, None)
    };
    let v0 = samples[0].1;
    let t0 = samples[0].0;
    let mut bound_violations = 0usize;
    for &(t, v) in samples {
        let bound = match (beta, c_prime) {
            (Some(b), Some(cp)) => {
                if t <= 0.0 {
                    continue;
                }
                cp * t.powf(-b)
            }
            _ => v0 * (-c * (t - t0)).exp(),
        };
        if v > bound * (1.0 + 1e-9) + 1e-300 {
            bound_violations += 1;
        }
    }
    Ok(OdeBoundCheck { alpha, c, beta, c_prime, max_slack, slack_violations, bound_violations })
}

#[derive(Debug, Clone, Serialize, PartialEq)]
#[serde(rename_all = "snake_case", tag = "class")]
pub enum PredictedClass {
    Exponential,
    Polynomial { exponent: f64 },
}

/// Exponent estimates at or above this value predict the exponential branch.
pub const EXPONENTIAL_THETA_CUTOFF: f64 = 0.45;

/// Predicted rate class from a Lojasiewicz exponent estimate: theta = 1/2
/// gives exponential decay, theta < 1/2 gives t^(-theta/(1-2 theta)).
pub fn predicted_class(theta_hat: f64) -> PredictedClass {
    if theta_hat >= EXPONENTIAL_THETA_CUTOFF {
        PredictedClass::Exponential
    } else {
        PredictedClass::Polynomial { exponent: theta_hat / (1.0 - 2.0 * theta_hat) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityCheck {
    pub pass: bool,
    pub value: f64,
    pub running_max_tail: f64,
    pub threshold: f64,
    pub t_check: f64,
}

/// Pass iff the velocity L2 norm at t_check is at or below the threshold and
/// its running maximum over the last 10% of the run stays within twice the
/// threshold.
pub fn velocity_decay_check(
    traj: &Trajectory,
    threshold: f64,
    t_check: f64,
) -> Result<VelocityCheck> {
    let series = traj.v_l2_series();
    let t_last = series.last().map(|&(t, _)| t).unwrap_or(0.0);
    if traj.blow_up_time.is_some() || t_last + 1e-9 < t_check {
        let value = series.last().map(|&(_, v)| v).unwrap_or(f64::NAN);
        return Ok(VelocityCheck {
            pass: false,
            value,
            running_max_tail: value,
            threshold,
            t_check,
        });
    }
    let value = series
        .iter()
        .min_by(|a, b| {
            (a.0 - t_check).abs().partial_cmp(&(b.0 - t_check).abs()).unwrap()
        })
        .map(|&(_, v)| v)
        .unwrap_or(f64::NAN);
    let tail_start = t_last - 0.1 * (t_last - series[0].0);
    let running_max_tail = series
        .iter()
        .filter(|&&(t, _)| t >= tail_start)
        .map(|&(_, v)| v)
        .fold(0.0f64, f64::max);
    let pass = value <= threshold && running_max_tail <= 2.0 * threshold;
    Ok(VelocityCheck { pass, value, running_max_tail, threshold, t_check })
}

#[derive(Debug, Clone, Serialize)]
pub struct Theorem1Report {
    pub damping_verdict: CertVerdict,
    pub damping_structure: StructureClass,
    pub sign_status: SignStatus,
    pub converged: bool,
    pub blow_up_time: Option<f64>,
    pub theta_hat: Option<f64>,
    pub predicted: Option<PredictedClass>,
    pub measured: Option<DecayFit>,
    /// Class match (and, for the polynomial branch, exponent within 25%).
    pub agreement: Option<bool>,
    pub velocity_check: Option<VelocityCheck>,
    pub notes: Vec<String>,
}

/// Agreement tolerance on the polynomial exponent.
const EXPONENT_REL_TOL: f64 = 0.25;

/// Assemble hypothesis verdicts, the predicted rate class from the exponent
/// probe, and the measured decay fit of |u - phi|_H1 + |v|_L2, and compare.
pub fn theorem1_report(
    traj: &Trajectory,
    config: &SimConfig,
    eq: &Equilibrium,
    ls: Option<&LojasiewiczEstimate>,
    velocity_threshold: f64,
) -> Result<Theorem1Report> {
    let cert = certify_integrally_positive(
        &config.damping,
        &DEFAULT_EPSILONS,
        config.t_end.max(50.0),
        DEFAULT_SCAN_STEP,
        DEFAULT_TOLERANCE,
    )?;
    let structure = classify_structure(&config.damping);
    let sup_u = traj
        .energies
        .iter()
        .map(|e| e.u_linf)
        .filter(|x| x.is_finite())
        .fold(0.0f64, f64::max);
    let sign = validate_sign(&config.nonlinearity, sup_u.max(1.0), VALIDATION_SAMPLES);
    let mut notes = Vec::new();
    notes.push(
        "distance norm: discrete H1 + velocity L2 (a W^{2,p}-norm surrogate; the residual \
         |laplacian(u)+f(u)| is reported alongside)"
            .to_string(),
    );

    if let Some(t_blow) = traj.blow_up_time {
        if matches!(sign.status, SignStatus::Violated { .. }) {
            notes.push(format!(
                "sign condition violated and solution blew up at t = {t_blow}; no rate fit"
            ));
        } else {
            notes.push(format!("solution blew up at t = {t_blow}; no rate fit"));
        }
        return Ok(Theorem1Report {
            damping_verdict: cert.verdict,
            damping_structure: structure,
            sign_status: sign.status,
            converged: false,
            blow_up_time: Some(t_blow),
            theta_hat: None,
            predicted: None,
            measured: None,
            agreement: None,
            velocity_check: None,
            notes,
        });
    }

    // distance series to the equilibrium
    let mut series = Vec::with_capacity(traj.states.len());
    for state in &traj.states {
        let (h1, vn) = distance_to(state, eq, &config.mesh)?;
        series.push((state.t, h1 + vn));
    }
    let max_d = series.iter().map(|&(_, d)| d).fold(0.0f64, f64::max);
    let final_d = series.last().map(|&(_, d)| d).unwrap_or(f64::NAN);
    let max_v = traj.energies.iter().map(|e| e.v_l2).fold(0.0f64, f64::max);
    let final_v = traj.energies.last().map(|e| e.v_l2).unwrap_or(f64::NAN);
    let converged = max_d > 0.0
        && final_d <= 0.1 * max_d
        && (max_v == 0.0 || final_v <= 0.1 * max_v);
    if !converged {
        notes.push("not converged: final distance/velocity fell less than 10x from their maxima".into());
    }

    let theta_hat = ls.map(|e| e.theta_hat);
    let predicted = theta_hat.map(predicted_class);
    let measured = if converged {
        let positive: Vec<(f64, f64)> =
            series.iter().cloned().filter(|&(_, d)| d > 0.0).collect();
        fit_decay(&positive, 0.2).ok()
    } else {
        None
    };

    let agreement = match (&predicted, &measured) {
        (Some(p), Some(m)) => Some(match (&p, &m.class) {
            (PredictedClass::Exponential, DecayClass::Exponential { .. }) => true,
            (
                PredictedClass::Polynomial { exponent: pe },
                DecayClass::Polynomial { exponent: me, .. },
            ) => (pe - me).abs() <= EXPONENT_REL_TOL * pe.abs().max(f64::MIN_POSITIVE),
            _ => false,
        }),
        _ => None,
    };

    let velocity_check = Some(velocity_decay_check(traj, velocity_threshold, config.t_end)?);

    let hypotheses_failed = cert.verdict != CertVerdict::CertifiedUpToHorizon
        || matches!(sign.status, SignStatus::Violated { .. });
    if hypotheses_failed && converged {
        notes.push("conclusion observed despite refuted hypothesis".into());
    }

    Ok(Theorem1Report {
        damping_verdict: cert.verdict,
        damping_structure: structure,
        sign_status: sign.status,
        converged,
        blow_up_time: None,
        theta_hat,
        predicted,
        measured,
        agreement,
        velocity_check,
        notes,
    })
}
