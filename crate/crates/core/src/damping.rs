//! Time-dependent damping coefficients h(t): representation, integral
//! positivity certification, structural classification, and nonlinear
//! velocity dampings g(s) with their sandwich bounds.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitutil::{linear_fit, log_add_exp};

pub const DEFAULT_EPSILONS: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
pub const DEFAULT_HORIZON: f64 = 200.0;
pub const DEFAULT_SCAN_STEP: f64 = 0.01;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Smallest window mass still counted as a positive certificate.
pub const DELTA_MIN: f64 = 1e-6;

/// One structural interval of a piecewise damping, open on the right.
#[derive(Debug, Clone, Serialize)]
pub struct OnOffInterval {
    pub a: f64,
    pub b: f64,
    /// Lower bound m_n of h on (a, b).
    pub lower: f64,
    /// Upper bound M_n of h on (a, b).
    pub upper: f64,
    /// Constant value taken on the open interval.
    pub value: f64,
}

#[derive(Clone)]
pub enum ProfileKind {
    Constant { h0: f64 },
    /// h0 / (1 + t)^alpha
    PowerLaw { h0: f64, alpha: f64 },
    OnOff {
        intervals: Vec<OnOffInterval>,
        /// Periodic extension beyond the listed intervals.
        period: Option<f64>,
        /// h(b_n) = 0 at the junction points.
        junction_zero: bool,
    },
    Tabulated { times: Vec<f64>, values: Vec<f64> },
    Expression {
        func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        label: String,
    },
}

impl fmt::Debug for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileKind::Constant { h0 } => write!(f, "Constant({h0})"),
            ProfileKind::PowerLaw { h0, alpha } => write!(f, "PowerLaw({h0}, {alpha})"),
            ProfileKind::OnOff { intervals, period, junction_zero } => write!(
                f,
                "OnOff({} intervals, period {:?}, junction_zero {})",
                intervals.len(),
                period,
                junction_zero
            ),
            ProfileKind::Tabulated { times, .. } => write!(f, "Tabulated({} samples)", times.len()),
            ProfileKind::Expression { label, .. } => write!(f, "Expression({label})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DampingProfile {
    pub kind: ProfileKind,
    pub nonnegative: bool,
}

impl DampingProfile {
    pub fn constant(h0: f64) -> Self {
        DampingProfile { kind: ProfileKind::Constant { h0 }, nonnegative: h0 >= 0.0 }
    }

    pub fn power_law(h0: f64, alpha: f64) -> Self {
        DampingProfile {
            kind: ProfileKind::PowerLaw { h0, alpha },
            nonnegative: h0 >= 0.0,
        }
    }

    /// Periodic on/off damping: value `on_value` for `on_len`, then zero for
    /// `off_len`, repeating from t = 0.
    pub fn on_off_unit(on_len: f64, off_len: f64, on_value: f64) -> Self {
        let intervals = vec![
            OnOffInterval { a: 0.0, b: on_len, lower: on_value, upper: on_value, value: on_value },
            OnOffInterval {
                a: on_len,
                b: on_len + off_len,
                lower: 0.0,
                upper: 0.0,
                value: 0.0,
            },
        ];
        DampingProfile {
            kind: ProfileKind::OnOff {
                intervals,
                period: Some(on_len + off_len),
                junction_zero: true,
            },
            nonnegative: on_value >= 0.0,
        }
    }

    pub fn on_off(intervals: Vec<OnOffInterval>, period: Option<f64>, junction_zero: bool) -> Self {
        let nonnegative = intervals.iter().all(|iv| iv.value >= 0.0);
        DampingProfile {
            kind: ProfileKind::OnOff { intervals, period, junction_zero },
            nonnegative,
        }
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Self {
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        DampingProfile { kind: ProfileKind::Tabulated { times, values }, nonnegative }
    }

    pub fn expression(
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
        label: impl Into<String>,
    ) -> Self {
        DampingProfile {
            kind: ProfileKind::Expression { func: Arc::new(func), label: label.into() },
            nonnegative: true,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::Constant { h0 } => format!("constant({h0})"),
            ProfileKind::PowerLaw { h0, alpha } => format!("power_law({h0}, {alpha})"),
            ProfileKind::OnOff { .. } => "on_off".to_string(),
            ProfileKind::Tabulated { .. } => "tabulated".to_string(),
            ProfileKind::Expression { label, .. } => label.clone(),
        }
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { h0 } => *h0,
            ProfileKind::PowerLaw { h0, alpha } => h0 / (1.0 + t).powf(*alpha),
            ProfileKind::OnOff { intervals, period, junction_zero } => {
                let span_end = intervals.last().map_or(0.0, |iv| iv.b);
                let tau = match period {
                    Some(p) if *p > 0.0 => t % p,
                    _ => t,
                };
                if tau >= span_end {
                    return 0.0;
                }
                for iv in intervals {
                    if tau >= iv.a && tau < iv.b {
                        if *junction_zero && tau == iv.a {
                            return 0.0;
                        }
                        return iv.value;
                    }
                }
                0.0
            }
            ProfileKind::Tabulated { times, values } => {
                if times.is_empty() {
                    return 0.0;
                }
                if t <= times[0] {
                    return values[0];
                }
                if t >= *times.last().unwrap() {
                    return *values.last().unwrap();
                }
                let idx = times.partition_point(|&s| s <= t);
                let (t0, t1) = (times[idx - 1], times[idx]);
                let (v0, v1) = (values[idx - 1], values[idx]);
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
            ProfileKind::Expression { func, .. } => func(t),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertVerdict {
    CertifiedUpToHorizon,
    Refuted,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonScan {
    pub epsilon: f64,
    /// Infimum of the window integral over the scanned grid.
    pub infimum: f64,
    /// Left endpoint of the window attaining the infimum.
    pub witness_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateReport {
    pub verdict: CertVerdict,
    pub per_epsilon: Vec<EpsilonScan>,
    /// Global infimum over all scanned epsilons.
    pub achieved: f64,
    /// (window start, window length) of the worst window.
    pub witness: (f64, f64),
    pub horizon: f64,
    pub tolerance: f64,
    /// Set when the profile's closed form settles the verdict beyond the horizon.
    pub analytic_note: Option<String>,
}

impl CertificateReport {
    /// Infimum over epsilons of the mean window density, used as a damping
    /// floor estimate by the Lyapunov epsilon heuristic.
    pub fn window_mean_floor(&self) -> f64 {
        self.per_epsilon
            .iter()
            .map(|s| s.infimum / s.epsilon)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Scan window integrals of h over [0, horizon] for each probe epsilon.
///
/// A finite scan cannot prove the universally quantified definition, so the
/// verdict vocabulary is certified-up-to-horizon / refuted / inconclusive.
/// Power-law decay is refuted analytically: its window mass tends to zero.
pub fn certify_integrally_positive(
    profile: &DampingProfile,
    epsilons: &[f64],
    horizon: f64,
    scan_step: f64,
    tolerance: f64,
) -> Result<CertificateReport> {
    if epsilons.is_empty() {
        return Err(Error::EmptyEpsilonList);
    }
    let n = (horizon / scan_step).round() as usize;
    let mut cum = Vec::with_capacity(n + 1);
    cum.push(0.0);
    let mut prev = profile.evaluate(0.0)?;
    for k in 1..=n {
        let h = profile.eval_unchecked(k as f64 * scan_step);
        let last = *cum.last().unwrap();
        cum.push(last + scan_step * 0.5 * (prev + h));
        prev = h;
    }

    let mut per_epsilon = Vec::new();
    for &eps in epsilons {
        let m = (eps / scan_step).round().max(1.0) as usize;
        if m >= n {
            continue;
        }
        let mut inf = f64::INFINITY;
        let mut witness_t = 0.0;
        for k in 0..=(n - m) {
            let w = cum[k + m] - cum[k];
            if w < inf {
                inf = w;
                witness_t = k as f64 * scan_step;
            }
        }
        per_epsilon.push(EpsilonScan { epsilon: eps, infimum: inf, witness_t });
    }
    if per_epsilon.is_empty() {
        return Err(Error::InvalidConfig("horizon too short for every probe epsilon".into()));
    }

    let worst = per_epsilon
        .iter()
        .min_by(|a, b| a.infimum.total_cmp(&b.infimum))
        .unwrap()
        .clone();

    let mut analytic_note = None;
    let mut verdict = if worst.infimum < tolerance {
        CertVerdict::Refuted
    } else if worst.infimum >= DELTA_MIN {
        CertVerdict::CertifiedUpToHorizon
    } else {
        CertVerdict::Inconclusive
    };

    if let ProfileKind::PowerLaw { h0, alpha } = profile.kind {
        if alpha > 0.0 && h0 > 0.0 {
            verdict = CertVerdict::Refuted;
            let eps = worst.epsilon;
            analytic_note = Some(format!(
                "power_law window mass h0*[(1+t)^(1-a) - (1+t+e)^(1-a)]/(a-1) \
                 tends to 0 as t grows, so no single delta works for epsilon = {eps}"
            ));
        }
    }

    Ok(CertificateReport {
        verdict,
        achieved: worst.infimum,
        witness: (worst.witness_t, worst.epsilon),
        per_epsilon,
        horizon,
        tolerance,
        analytic_note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StructureClass {
    PositiveNegative,
    OnOff,
    Neither,
    Unknown,
}

impl StructureClass {
    pub fn name(&self) -> &'static str {
        match self {
            StructureClass::PositiveNegative => "positive-negative",
            StructureClass::OnOff => "on-off",
            StructureClass::Neither => "neither",
            StructureClass::Unknown => "unknown",
        }
    }
}

/// Classify the interval structure from the stored metadata.
///
/// Intervals with value identically zero are read as off-gaps between the
/// active intervals, not as members of the positive family.
pub fn classify_structure(profile: &DampingProfile) -> StructureClass {
    match &profile.kind {
        ProfileKind::Constant { h0 } => {
            if *h0 > 0.0 {
                StructureClass::PositiveNegative
            } else {
                StructureClass::Neither
            }
        }
        ProfileKind::OnOff { intervals, junction_zero, .. } => {
            let active: Vec<_> = intervals.iter().filter(|iv| iv.value != 0.0).collect();
            let gaps = intervals.len() - active.len();
            if active.is_empty() || active.iter().any(|iv| iv.lower <= 0.0) {
                return StructureClass::Neither;
            }
            if *junction_zero || gaps > 0 {
                StructureClass::OnOff
            } else {
                StructureClass::PositiveNegative
            }
        }
        _ => StructureClass::Unknown,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion11Verdict {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion11Report {
    pub verdict: Criterion11Verdict,
    /// Sampled partial values of the outer integral I(T).
    pub partial: Vec<(f64, f64)>,
    /// Fitted log-log slope of I(T) over the last decade.
    pub outer_slope: f64,
    /// Fitted slope of log integrand vs log t over the last decade.
    pub integrand_slope: f64,
}

/// Evaluate the convergence criterion
/// `int_0^inf exp(-H(t)) int_0^t exp(H(s)) ds dt = +inf`, H(t) = int_0^t h.
///
/// The inner integral is accumulated in log space with an exponential
/// quadrature rule per step (exact for locally linear H), so rapidly growing
/// dampings such as h = e^t do not overflow or bias the integrand.
pub fn criterion_11(
    profile: &DampingProfile,
    horizon: f64,
    quadrature_step: f64,
) -> Result<Criterion11Report> {
    if horizon <= 0.0 || quadrature_step <= 0.0 {
        return Err(Error::InvalidConfig("criterion_11 needs positive horizon and step".into()));
    }
    let n = (horizon / quadrature_step).round() as usize;
    let step = quadrature_step;
    let mut prev_h = profile.evaluate(0.0)?;
    // glog tracks log g(t) with g(t) = exp(-H(t)) int_0^t exp(H(s)) ds
    // directly, so that huge H never enters a difference of large logs.
    let mut glog = f64::NEG_INFINITY;
    let mut outer = 0.0f64;
    let mut prev_g = 0.0f64;
    let stride = (n / 400).max(1);
    let mut partial = Vec::new();
    let mut glog_samples = Vec::new();
    for k in 1..=n {
        let t = k as f64 * step;
        let h = profile.eval_unchecked(t);
        let delta = step * 0.5 * (prev_h + h);
        // log of exp(-H(t_k)) int_{t_{k-1}}^{t_k} exp(H(s)) ds,
        // assuming H linear in the step
        let inc_centered = if delta > 1e-12 {
            (-(-delta).exp_m1()).ln() + (step / delta).ln()
        } else {
            step.ln() - 0.5 * delta
        };
        glog = log_add_exp(glog - delta, inc_centered);
        let g = glog.exp();
        outer += step * 0.5 * (prev_g + g);
        if k % stride == 0 || k == n {
            partial.push((t, outer));
            glog_samples.push((t, glog));
        }
        prev_h = h;
        prev_g = g;
    }

    // classify on the last decade of T
    let t_lo = horizon / 10.0;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &(t, i) in &partial {
        if t >= t_lo && i > 0.0 {
            xs.push(t.ln());
            ys.push(i.ln());
        }
    }
    let (outer_slope, ..) = if xs.len() >= 2 {
        linear_fit(&xs, &ys)
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };

    let (mut gx, mut gy) = (Vec::new(), Vec::new());
    for &(t, gl) in &glog_samples {
        if t >= t_lo && gl.is_finite() {
            gx.push(t.ln());
            gy.push(gl);
        }
    }
    let (integrand_slope, ..) = if gx.len() >= 2 {
        linear_fit(&gx, &gy)
    } else {
        (0.0, 0.0, 0.0, 0.0)
    };

    const MARGIN: f64 = 0.2;
    let verdict = if outer_slope >= 1.0 - MARGIN {
        Criterion11Verdict::Diverges
    } else if integrand_slope < -1.0 - MARGIN {
        Criterion11Verdict::Converges
    } else {
        Criterion11Verdict::Inconclusive
    };

    Ok(Criterion11Report { verdict, partial, outer_slope, integrand_slope })
}

/// Nonlinear velocity damping g with declared derivative bounds.
#[derive(Clone)]
pub struct VelocityDamping {
    kind: VdKind,
    pub m1: f64,
    pub m2: f64,
}

#[derive(Clone)]
enum VdKind {
    Identity,
    Custom {
        g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        g_prime: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        name: String,
    },
}

impl fmt::Debug for VelocityDamping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VelocityDamping({}, m1={}, m2={})", self.name(), self.m1, self.m2)
    }
}

impl VelocityDamping {
    pub fn identity() -> Self {
        VelocityDamping { kind: VdKind::Identity, m1: 1.0, m2: 1.0 }
    }

    pub fn custom(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
        m1: f64,
        m2: f64,
        name: impl Into<String>,
    ) -> Self {
        VelocityDamping {
            kind: VdKind::Custom { g: Arc::new(g), g_prime: Arc::new(g_prime), name: name.into() },
            m1,
            m2,
        }
    }

    /// g(s) = s + a tanh(s); g' = 1 + a sech^2(s) in [1, 1 + a] for a >= 0.
    pub fn tanh_blend(a: f64) -> Self {
        Self::custom(
            move |s: f64| s + a * s.tanh(),
            move |s: f64| 1.0 + a / s.cosh().powi(2),
            1.0,
            1.0 + a,
            format!("tanh_blend({a})"),
        )
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, VdKind::Identity)
    }

    pub fn name(&self) -> String {
        match &self.kind {
            VdKind::Identity => "identity".into(),
            VdKind::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match &self.kind {
            VdKind::Identity => s,
            VdKind::Custom { g, .. } => g(s),
        }
    }

    pub fn eval_prime(&self, s: f64) -> f64 {
        match &self.kind {
            VdKind::Identity => 1.0,
            VdKind::Custom { g_prime, .. } => g_prime(s),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityDampingViolation {
    pub s: f64,
    pub what: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VelocityDampingReport {
    pub valid: bool,
    pub g_at_zero: f64,
    pub gp_min: f64,
    pub gp_max: f64,
    pub violations: Vec<VelocityDampingViolation>,
}

/// Sample-check (g-1)/(g-2): g(0) = 0, m1 <= g' <= m2, and the resulting
/// sandwich m1 s^2 <= g(s) s <= m2 s^2. Violations are report content.
pub fn validate_velocity_damping(
    g: &VelocityDamping,
    sample_range: f64,
    n_samples: usize,
) -> VelocityDampingReport {
    const TOL: f64 = 1e-9;
    let mut violations = Vec::new();
    let g0 = g.eval(0.0);
    if g0.abs() > TOL {
        violations.push(VelocityDampingViolation { s: 0.0, what: format!("g(0) = {g0} != 0") });
    }
    let mut gp_min = f64::INFINITY;
    let mut gp_max = f64::NEG_INFINITY;
    let n = n_samples.max(2);
    for k in 0..n {
        let s = -sample_range + 2.0 * sample_range * k as f64 / (n - 1) as f64;
        let gp = g.eval_prime(s);
        gp_min = gp_min.min(gp);
        gp_max = gp_max.max(gp);
        if gp < g.m1 - TOL {
            violations.push(VelocityDampingViolation {
                s,
                what: format!("g'({s}) = {gp} < m1 = {}", g.m1),
            });
        }
        if gp > g.m2 + TOL {
            violations.push(VelocityDampingViolation {
                s,
                what: format!("g'({s}) = {gp} > m2 = {}", g.m2),
            });
        }
        let gs = g.eval(s) * s;
        let s2 = s * s;
        if gs < g.m1 * s2 - TOL || gs > g.m2 * s2 + TOL {
            violations.push(VelocityDampingViolation {
                s,
                what: format!("sandwich m1 s^2 <= g(s) s <= m2 s^2 fails: g(s)s = {gs}"),
            });
        }
    }
    VelocityDampingReport { valid: violations.is_empty(), g_at_zero: g0, gp_min, gp_max, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_examples() {
        let c = DampingProfile::constant(2.0);
        assert_eq!(c.evaluate(7.0).unwrap(), 2.0);

        let p = DampingProfile::power_law(1.0, 2.0);
        assert!((p.evaluate(1.0).unwrap() - 0.25).abs() < 1e-15);

        let oo = DampingProfile::on_off_unit(1.0, 1.0, 1.0);
        assert_eq!(oo.evaluate(1.5).unwrap(), 0.0);
        assert_eq!(oo.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(oo.evaluate(2.5).unwrap(), 1.0);

        assert!(c.evaluate(-0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_extrapolates_constant() {
        let p = DampingProfile::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 2.0]);
        assert_eq!(p.evaluate(0.5).unwrap(), 1.0);
        assert_eq!(p.evaluate(10.0).unwrap(), 2.0);
    }

    #[test]
    fn certify_constant_one() {
        let p = DampingProfile::constant(1.0);
        let rep = certify_integrally_positive(&p, &[1.0], 100.0, 0.01, 1e-9).unwrap();
        assert_eq!(rep.verdict, CertVerdict::CertifiedUpToHorizon);
        assert!((rep.achieved - 1.0).abs() < 1e-10);
    }

    #[test]
    fn certify_abs_sin() {
        let p = DampingProfile::expression(|t: f64| t.sin().abs(), "|sin t|");
        let rep = certify_integrally_positive(&p, &[1.0], 50.0, 0.01, 1e-9).unwrap();
        assert_eq!(rep.verdict, CertVerdict::CertifiedUpToHorizon);
        let expected = 2.0 * (1.0 - 0.5f64.cos());
        assert!(
            (rep.achieved - expected).abs() / expected < 0.02,
            "achieved {} vs {expected}",
            rep.achieved
        );
    }

    #[test]
    fn power_law_refuted_analytically() {
        let p = DampingProfile::power_law(1.0, 2.0);
        let rep =
            certify_integrally_positive(&p, &DEFAULT_EPSILONS, 200.0, 0.01, 1e-9).unwrap();
        assert_eq!(rep.verdict, CertVerdict::Refuted);
        assert!(rep.analytic_note.is_some());
    }

    #[test]
    fn on_off_gap_refuted_with_witness() {
        // off-gaps of length 0.5, probe epsilon 0.4 fits inside a gap
        let p = DampingProfile::on_off_unit(0.5, 0.5, 1.0);
        let rep = certify_integrally_positive(&p, &[0.4], 20.0, 0.01, 1e-9).unwrap();
        assert_eq!(rep.verdict, CertVerdict::Refuted);
        assert!(rep.achieved.abs() < 1e-12);
        // witness window lies inside an off interval
        let (t, eps) = rep.witness;
        let tau = t % 1.0;
        assert!(tau >= 0.5 - 1e-9 && tau + eps <= 1.0 + 1e-9, "witness at {t}");
    }

    #[test]
    fn monotone_in_epsilon() {
        let p = DampingProfile::expression(|t: f64| t.sin().abs(), "|sin t|");
        let rep =
            certify_integrally_positive(&p, &[0.1, 0.5, 1.0, 2.0], 60.0, 0.01, 1e-9).unwrap();
        for w in rep.per_epsilon.windows(2) {
            assert!(w[1].infimum >= w[0].infimum - 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_structure(&DampingProfile::constant(3.0)),
            StructureClass::PositiveNegative
        );
        assert_eq!(
            classify_structure(&DampingProfile::on_off_unit(1.0, 1.0, 1.0)),
            StructureClass::OnOff
        );
        let pn = DampingProfile::on_off(
            vec![
                OnOffInterval { a: 0.0, b: 1.0, lower: 1.0, upper: 1.0, value: 1.0 },
                OnOffInterval { a: 1.0, b: 2.0, lower: 0.5, upper: 0.5, value: 0.5 },
            ],
            Some(2.0),
            false,
        );
        assert_eq!(classify_structure(&pn), StructureClass::PositiveNegative);
        let oo = DampingProfile::on_off(
            vec![
                OnOffInterval { a: 0.0, b: 1.0, lower: 1.0, upper: 1.0, value: 1.0 },
                OnOffInterval { a: 1.0, b: 2.0, lower: 0.5, upper: 0.5, value: 0.5 },
            ],
            Some(2.0),
            true,
        );
        assert_eq!(classify_structure(&oo), StructureClass::OnOff);
        assert_eq!(
            classify_structure(&DampingProfile::tabulated(vec![0.0, 1.0], vec![1.0, 1.0])),
            StructureClass::Unknown
        );
    }

    #[test]
    fn criterion_11_examples() {
        let c = DampingProfile::constant(1.0);
        let rep = criterion_11(&c, 200.0, 0.01).unwrap();
        assert_eq!(rep.verdict, Criterion11Verdict::Diverges);

        let e = DampingProfile::expression(|t: f64| t.exp(), "e^t");
        let rep = criterion_11(&e, 60.0, 0.005).unwrap();
        assert_eq!(rep.verdict, Criterion11Verdict::Converges);

        let p = DampingProfile::power_law(1.0, 2.0);
        let rep = criterion_11(&p, 200.0, 0.01).unwrap();
        assert_eq!(rep.verdict, Criterion11Verdict::Diverges);
    }

    #[test]
    fn criterion_11_constant_any_c() {
        for c in [0.2, 1.0, 5.0, 25.0] {
            let rep = criterion_11(&DampingProfile::constant(c), 200.0, 0.01).unwrap();
            assert_eq!(rep.verdict, Criterion11Verdict::Diverges, "c = {c}");
        }
    }

    #[test]
    fn velocity_damping_examples() {
        let id = VelocityDamping::identity();
        assert!(validate_velocity_damping(&id, 5.0, 1001).valid);

        let tb = VelocityDamping::tanh_blend(0.5);
        let rep = validate_velocity_damping(&tb, 5.0, 10_001);
        assert!(rep.valid, "{:?}", rep.violations.first());
        assert!(rep.gp_min >= 1.0 - 1e-9 && rep.gp_max <= 1.5 + 1e-9);

        let sq = VelocityDamping::custom(|s| s * s, |s| 2.0 * s, 0.1, 10.0, "s^2");
        let rep = validate_velocity_damping(&sq, 1.0, 101);
        assert!(!rep.valid);
        assert!(rep.violations.iter().any(|v| v.s.abs() < 0.1));
    }
}
