//! Finite-dimensional evolution problem u'' + h(t) B u' + A u = f(u) with a
//! symmetric positive definite stiffness matrix A and a coercive damping
//! operator B. Shares the time-stepping scheme with the mesh-based solver;
//! the damping sub-step becomes an n-by-n linear solve.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

type VecFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum GalerkinForce {
    /// f applied entrywise; the potential is the sum of the scalar primitive.
    Componentwise(Nonlinearity),
    /// Explicit gradient of a declared scalar potential.
    Gradient { grad: VecFn, potential: ScalarFn, name: String },
}

impl fmt::Debug for GalerkinForce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GalerkinForce::Componentwise(nl) => write!(f, "Componentwise({})", nl.name),
            GalerkinForce::Gradient { name, .. } => write!(f, "Gradient({name})"),
        }
    }
}

impl GalerkinForce {
    fn eval(&self, u: &DVector<f64>) -> DVector<f64> {
        match self {
            GalerkinForce::Componentwise(nl) => u.map(|s| nl.f(s)),
            GalerkinForce::Gradient { grad, .. } => grad(u),
        }
    }

    fn potential(&self, u: &DVector<f64>) -> f64 {
        match self {
            GalerkinForce::Componentwise(nl) => u.iter().map(|&s| nl.big_f(s)).sum(),
            GalerkinForce::Gradient { potential, .. } => potential(u),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub force: GalerkinForce,
}

const SYM_TOL: f64 = 1e-12;

impl GalerkinSystem {
    pub fn dimension(&self) -> usize {
        self.a.nrows()
    }

    /// Checks A symmetric with positive eigenvalues and B coercive:
    /// returns the coercivity constant a = lambda_min of (B + B^T)/2,
    /// cross-checked on random unit vectors.
    pub fn validate(&self, seed: u64) -> Result<f64> {
        let n = self.dimension();
        if self.a.ncols() != n || self.b.nrows() != n || self.b.ncols() != n {
            return Err(Error::InvalidConfig("A and B must be square of equal size".into()));
        }
        let scale = self.a.amax().max(1.0);
        if (&self.a - self.a.transpose()).amax() > SYM_TOL * scale {
            return Err(Error::NotSpd("A is not symmetric".into()));
        }
        let eig_a = self.a.clone().symmetric_eigen().eigenvalues;
        let min_a = eig_a.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_a <= 0.0 {
            return Err(Error::NotSpd(format!("A has eigenvalue {min_a} <= 0")));
        }
        let b_sym = (&self.b + self.b.transpose()) * 0.5;
        let eig_b = b_sym.symmetric_eigen().eigenvalues;
        let coercivity = eig_b.iter().cloned().fold(f64::INFINITY, f64::min);
        if coercivity <= 0.0 {
            return Err(Error::NotCoercive(format!(
                "symmetric part of B has eigenvalue {coercivity} <= 0"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..64 {
            let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let nsq = w.norm_squared();
            if nsq == 0.0 {
                continue;
            }
            let quad = w.dot(&(&self.b * &w));
            if quad < coercivity * nsq * (1.0 - 1e-9) {
                return Err(Error::NotCoercive(format!(
                    "sampled <Bw,w> = {quad} below a |w|^2 = {}",
                    coercivity * nsq
                )));
            }
        }
        Ok(coercivity)
    }
}

#[derive(Debug, Clone)]
pub struct GalerkinConfig {
    pub system: GalerkinSystem,
    pub damping: DampingProfile,
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
    pub m_blow: f64,
    pub u0: DVector<f64>,
    pub v0: DVector<f64>,
}

#[derive(Debug, Clone)]
pub struct GalerkinSample {
    pub t: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub kinetic: f64,
    pub potential: f64,
    pub forcing: f64,
    pub total: f64,
}

#[derive(Debug, Clone)]
pub struct GalerkinTrajectory {
    pub samples: Vec<GalerkinSample>,
    pub coercivity: f64,
    pub blow_up_time: Option<f64>,
}

fn sample(t: f64, u: &DVector<f64>, v: &DVector<f64>, sys: &GalerkinSystem) -> GalerkinSample {
    let kinetic = 0.5 * v.norm_squared();
    let potential = 0.5 * u.dot(&(&sys.a * u));
    let forcing = -sys.force.potential(u);
    GalerkinSample {
        t,
        u: u.clone(),
        v: v.clone(),
        kinetic,
        potential,
        forcing,
        total: kinetic + potential + forcing,
    }
}

/// Integrate the n-dimensional system with the same midpoint-damped
/// velocity-Verlet scheme as the mesh solver. E' = -h(t) <Bv, v>.
pub fn galerkin_run(config: &GalerkinConfig) -> Result<GalerkinTrajectory> {
    let sys = &config.system;
    let coercivity = sys.validate(0)?;
    let n = sys.dimension();
    if config.u0.len() != n || config.v0.len() != n {
        return Err(Error::InvalidConfig("initial data dimension mismatch".into()));
    }
    if !(config.dt > 0.0) || config.t_end < 0.0 || config.sample_stride == 0 {
        return Err(Error::InvalidConfig("need dt > 0, t_end >= 0, stride >= 1".into()));
    }

    let accel = |u: &DVector<f64>| -(&sys.a * u) + sys.force.eval(u);
    let identity = DMatrix::<f64>::identity(n, n);

    let mut t = 0.0;
    let mut u = config.u0.clone();
    let mut v = config.v0.clone();
    let n_steps = (config.t_end / config.dt).round() as usize;
    let mut samples = vec![sample(t, &u, &v, sys)];
    let mut blow_up_time = None;

    for k in 1..=n_steps {
        let dt = config.dt;
        let h_mid = config.damping.evaluate(t + 0.5 * dt)?;
        let c = 0.5 * dt * h_mid;

        let a0 = accel(&u);
        let rhs = &v + &a0 * (0.5 * dt);
        // (I + c B) w = v + (dt/2) a(u)
        let m = &identity + &sys.b * c;
        let w = m
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularJacobian("damping sub-step matrix".into()))?;

        let u1 = &u + &w * dt;
        let a1 = accel(&u1);
        let v1 = &w + &a1 * (0.5 * dt) - (&sys.b * &w) * c;

        t += dt;
        u = u1;
        v = v1;
        let sup = u.amax();
        if !sup.is_finite() || sup > config.m_blow || !v.amax().is_finite() {
            blow_up_time = Some(t);
            samples.push(sample(t, &u, &v, sys));
            break;
        }
        if k % config.sample_stride == 0 || k == n_steps {
            samples.push(sample(t, &u, &v, sys));
        }
    }

    Ok(GalerkinTrajectory { samples, coercivity, blow_up_time })
}
