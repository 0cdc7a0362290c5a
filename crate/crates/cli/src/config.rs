//! Flat INI-style run configuration: sections of key = value lines, with
//! unknown sections and keys rejected. Every run echoes its fully resolved
//! configuration next to its outputs.

use std::collections::BTreeSet;

use dampwave_core::damping::{DampingProfile, VelocityDamping};
use dampwave_core::dynamics::{EpsilonChoice, SimConfig};
use dampwave_core::error::{Error, Result};
use dampwave_core::galerkin::{GalerkinConfig, GalerkinForce, GalerkinSystem};
use dampwave_core::io::read_damping_csv;
use dampwave_core::mesh::{BcKind, Field, Mesh};
use dampwave_core::nonlinearity::builtin_with_param;
use nalgebra::{DMatrix, DVector};

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

#[derive(Debug, Clone)]
pub struct AnalysisParams {
    pub velocity_threshold: f64,
    pub seed: u64,
    pub radii: Vec<f64>,
    pub samples_per_radius: usize,
    pub equilibrium_tol: f64,
    pub t_min_fraction: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        AnalysisParams {
            velocity_threshold: 1e-3,
            seed: 2024,
            radii: vec![1e-1, 1e-2, 1e-3],
            samples_per_radius: 32,
            equilibrium_tol: 1e-10,
            t_min_fraction: 0.2,
        }
    }
}

pub enum ConfigKind {
    Mesh(SimConfig),
    Galerkin(GalerkinConfig),
}

pub struct LabConfig {
    pub kind: ConfigKind,
    pub analysis: AnalysisParams,
    /// Canonical INI text of the fully resolved configuration.
    pub resolved: String,
}

struct Ini {
    /// (section, key, value) triples in file order.
    entries: Vec<(String, String, String)>,
}

impl Ini {
    fn parse(text: &str) -> Result<Ini> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| bad(format!("line {}: unterminated section", lineno + 1)))?;
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            if section.is_empty() {
                return Err(bad(format!("line {}: key outside any section", lineno + 1)));
            }
            entries.push((section.clone(), k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Ini { entries })
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
    }

    fn has_section(&self, section: &str) -> bool {
        self.entries.iter().any(|(s, _, _)| s == section)
    }

    fn check_known(&self, allowed: &[(&str, &[&str])]) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (s, k, _) in &self.entries {
            let sect = allowed
                .iter()
                .find(|(name, _)| name == s)
                .ok_or_else(|| bad(format!("unknown section [{s}]")))?;
            if !sect.1.contains(&k.as_str()) {
                return Err(bad(format!("unknown key {k:?} in section [{s}]")));
            }
            if !seen.insert((s.clone(), k.clone())) {
                return Err(bad(format!("duplicate key {k:?} in section [{s}]")));
            }
        }
        Ok(())
    }
}

fn parse_num(ini: &Ini, section: &str, key: &str) -> Result<Option<f64>> {
    match ini.get(section, key) {
        None => Ok(None),
        Some(v) => v
            .parse::<f64>()
            .map(Some)
            .map_err(|_| bad(format!("[{section}] {key} = {v:?} is not a number"))),
    }
}

fn parse_usize(ini: &Ini, section: &str, key: &str) -> Result<Option<usize>> {
    match ini.get(section, key) {
        None => Ok(None),
        Some(v) => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| bad(format!("[{section}] {key} = {v:?} is not an integer"))),
    }
}

fn parse_list(v: &str, what: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("{what}: {s:?} is not a number")))
        })
        .collect()
}

/// Damping profile specs: constant:c, power_law:h0,alpha,
/// onoff:on,off[,value], abs_sin, zero.
pub fn parse_damping(spec: &str) -> Result<DampingProfile> {
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), Some(a)),
        None => (spec.trim(), None),
    };
    let nums = |expect: std::ops::RangeInclusive<usize>| -> Result<Vec<f64>> {
        let v = parse_list(args.unwrap_or(""), spec)?;
        if !expect.contains(&v.len()) {
            return Err(bad(format!("damping spec {spec:?} has wrong arity")));
        }
        Ok(v)
    };
    match name {
        "zero" => Ok(DampingProfile::constant(0.0)),
        "constant" => {
            let v = nums(1..=1)?;
            Ok(DampingProfile::constant(v[0]))
        }
        "power_law" => {
            let v = nums(2..=2)?;
            Ok(DampingProfile::power_law(v[0], v[1]))
        }
        "onoff" => {
            let v = nums(2..=3)?;
            let value = v.get(2).copied().unwrap_or(1.0);
            Ok(DampingProfile::on_off_unit(v[0], v[1], value))
        }
        "abs_sin" => Ok(DampingProfile::expression(|t: f64| t.sin().abs(), "|sin t|")),
        "table" => {
            let path = args.ok_or_else(|| bad("table: needs a csv path"))?.trim();
            let (times, values) = read_damping_csv(std::path::Path::new(path))?;
            Ok(DampingProfile::tabulated(times, values))
        }
        other => Err(bad(format!("unknown damping profile {other:?}"))),
    }
}

/// Velocity damping specs: identity, tanh_blend:a.
pub fn parse_velocity_damping(spec: &str) -> Result<VelocityDamping> {
    match spec.split_once(':') {
        None if spec.trim() == "identity" => Ok(VelocityDamping::identity()),
        Some((n, a)) if n.trim() == "tanh_blend" => {
            let x = a
                .trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("tanh_blend parameter {a:?} is not a number")))?;
            if x < 0.0 {
                return Err(bad("tanh_blend parameter must be nonnegative"));
            }
            Ok(VelocityDamping::tanh_blend(x))
        }
        _ => Err(bad(format!("unknown velocity damping {spec:?}"))),
    }
}

/// Initial field shapes: zero, sin:amp,k, cos:amp,k, bump:center,width,amp
/// (compactly supported), polybump:amp (boundary-compatible quartic).
pub fn parse_shape(spec: &str, mesh: &Mesh) -> Result<Field> {
    if mesh.dimension != 1 {
        return Err(bad("initial shapes are defined for 1D meshes"));
    }
    let lx = mesh.lx;
    let (name, args) = match spec.split_once(':') {
        Some((n, a)) => (n.trim(), parse_list(a, spec)?),
        None => (spec.trim(), Vec::new()),
    };
    let arity = |n: usize| -> Result<()> {
        if args.len() != n {
            return Err(bad(format!("shape {spec:?}: expected {n} parameters")));
        }
        Ok(())
    };
    match name {
        "zero" => Ok(mesh.zero_field()),
        "sin" => {
            arity(2)?;
            let (amp, k) = (args[0], args[1]);
            Ok(mesh.field_from_fn(|x, _| amp * (k * std::f64::consts::PI * x / lx).sin()))
        }
        "cos" => {
            arity(2)?;
            let (amp, k) = (args[0], args[1]);
            Ok(mesh.field_from_fn(|x, _| amp * (k * std::f64::consts::PI * x / lx).cos()))
        }
        "bump" => {
            arity(3)?;
            let (center, width, amp) = (args[0], args[1], args[2]);
            if width <= 0.0 {
                return Err(bad("bump width must be positive"));
            }
            Ok(mesh.field_from_fn(|x, _| {
                let s = (x - center) / width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    // normalized so the peak value is amp
                    amp * (1.0 - 1.0 / (1.0 - s * s)).exp()
                }
            }))
        }
        "polybump" => {
            arity(1)?;
            let amp = args[0];
            Ok(mesh.field_from_fn(|x, _| amp * (x * (lx - x) / lx).powi(2) * (4.0 / lx).powi(2)))
        }
        other => Err(bad(format!("unknown initial shape {other:?}"))),
    }
}

fn parse_bc(s: &str) -> Result<BcKind> {
    match s {
        "dirichlet" => Ok(BcKind::Dirichlet),
        "neumann" => Ok(BcKind::Neumann),
        "dynamical" => Ok(BcKind::Dynamical),
        other => Err(bad(format!("unknown boundary condition {other:?}"))),
    }
}

fn bc_name(bc: BcKind) -> &'static str {
    match bc {
        BcKind::Dirichlet => "dirichlet",
        BcKind::Neumann => "neumann",
        BcKind::Dynamical => "dynamical",
    }
}

const MESH_KEYS: (&str, &[&str]) =
    ("mesh", &["dimension", "lx", "ly", "nx", "ny", "bc"]);
const DAMPING_KEYS: (&str, &[&str]) = ("damping", &["profile", "velocity"]);
const NONLINEARITY_KEYS: (&str, &[&str]) = ("nonlinearity", &["name", "param"]);
const INITIAL_KEYS: (&str, &[&str]) = ("initial", &["u0", "u1"]);
const INTEGRATOR_KEYS: (&str, &[&str]) = (
    "integrator",
    &["cfl", "dt", "t_end", "sample_stride", "m_blow", "epsilon"],
);
const ANALYSIS_KEYS: (&str, &[&str]) = (
    "analysis",
    &[
        "velocity_threshold",
        "seed",
        "radii",
        "samples_per_radius",
        "equilibrium_tol",
        "t_min_fraction",
    ],
);
const GALERKIN_KEYS: (&str, &[&str]) = (
    "galerkin",
    &[
        "a_diag",
        "b_tridiag",
        "nonlinearity",
        "param",
        "u0",
        "v0",
        "dt",
        "t_end",
        "sample_stride",
        "m_blow",
    ],
);

fn parse_analysis(ini: &Ini) -> Result<AnalysisParams> {
    let mut a = AnalysisParams::default();
    if let Some(v) = parse_num(ini, "analysis", "velocity_threshold")? {
        a.velocity_threshold = v;
    }
    if let Some(v) = ini.get("analysis", "seed") {
        a.seed = v
            .parse::<u64>()
            .map_err(|_| bad(format!("[analysis] seed = {v:?} is not an integer")))?;
    }
    if let Some(v) = ini.get("analysis", "radii") {
        a.radii = parse_list(v, "radii")?;
    }
    if let Some(v) = parse_usize(ini, "analysis", "samples_per_radius")? {
        a.samples_per_radius = v;
    }
    if let Some(v) = parse_num(ini, "analysis", "equilibrium_tol")? {
        a.equilibrium_tol = v;
    }
    if let Some(v) = parse_num(ini, "analysis", "t_min_fraction")? {
        a.t_min_fraction = v;
    }
    Ok(a)
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn parse_config(text: &str) -> Result<LabConfig> {
    let ini = Ini::parse(text)?;
    ini.check_known(&[
        MESH_KEYS,
        DAMPING_KEYS,
        NONLINEARITY_KEYS,
        INITIAL_KEYS,
        INTEGRATOR_KEYS,
        ANALYSIS_KEYS,
        GALERKIN_KEYS,
    ])?;
    let analysis = parse_analysis(&ini)?;
    if ini.has_section("galerkin") {
        if ini.has_section("mesh") || ini.has_section("integrator") {
            return Err(bad("[galerkin] cannot be combined with [mesh]/[integrator]"));
        }
        let (config, resolved) = parse_galerkin(&ini, &analysis)?;
        return Ok(LabConfig { kind: ConfigKind::Galerkin(config), analysis, resolved });
    }
    let (config, resolved) = parse_mesh_config(&ini, &analysis)?;
    Ok(LabConfig { kind: ConfigKind::Mesh(config), analysis, resolved })
}

fn parse_mesh_config(ini: &Ini, analysis: &AnalysisParams) -> Result<(SimConfig, String)> {
    let dimension = parse_usize(ini, "mesh", "dimension")?.unwrap_or(1);
    let lx = parse_num(ini, "mesh", "lx")?.ok_or_else(|| bad("[mesh] lx is required"))?;
    let nx = parse_usize(ini, "mesh", "nx")?.ok_or_else(|| bad("[mesh] nx is required"))?;
    let bc = parse_bc(ini.get("mesh", "bc").unwrap_or("dirichlet"))?;
    let mesh = match dimension {
        1 => Mesh::new_1d(lx, nx, bc)?,
        2 => {
            let ly = parse_num(ini, "mesh", "ly")?.unwrap_or(lx);
            let ny = parse_usize(ini, "mesh", "ny")?.unwrap_or(nx);
            Mesh::new_2d(lx, ly, nx, ny, bc)?
        }
        d => return Err(bad(format!("dimension {d} not supported"))),
    };

    let damping_spec = ini.get("damping", "profile").unwrap_or("constant:1").to_string();
    let damping = parse_damping(&damping_spec)?;
    let velocity_spec = ini.get("damping", "velocity").unwrap_or("identity").to_string();
    let velocity_damping = parse_velocity_damping(&velocity_spec)?;

    let nl_name = ini.get("nonlinearity", "name").unwrap_or("zero").to_string();
    let nl_param = parse_num(ini, "nonlinearity", "param")?;
    let nonlinearity = builtin_with_param(&nl_name, nl_param)?;

    let u0_spec = ini.get("initial", "u0").unwrap_or("zero").to_string();
    let u1_spec = ini.get("initial", "u1").unwrap_or("zero").to_string();
    let u0 = parse_shape(&u0_spec, &mesh)?;
    let u1 = parse_shape(&u1_spec, &mesh)?;

    let t_end = parse_num(ini, "integrator", "t_end")?
        .ok_or_else(|| bad("[integrator] t_end is required"))?;
    let cfl = parse_num(ini, "integrator", "cfl")?.unwrap_or(0.5);
    let dt = match parse_num(ini, "integrator", "dt")? {
        Some(dt) => dt,
        None => cfl * mesh.min_spacing(),
    };
    let sample_stride = parse_usize(ini, "integrator", "sample_stride")?.unwrap_or(20);
    let m_blow = parse_num(ini, "integrator", "m_blow")?.unwrap_or(1e6);
    let epsilon = match ini.get("integrator", "epsilon") {
        None | Some("auto") => EpsilonChoice::Auto,
        Some(v) => EpsilonChoice::Fixed(
            v.parse::<f64>()
                .map_err(|_| bad(format!("[integrator] epsilon = {v:?}")))?,
        ),
    };

    let config = SimConfig {
        mesh,
        damping,
        velocity_damping,
        nonlinearity,
        dt,
        t_end,
        sample_stride,
        epsilon,
        m_blow,
        u0,
        u1,
    };
    config.validate()?;

    let mut resolved = String::new();
    resolved.push_str("[mesh]\n");
    resolved.push_str(&format!("dimension = {}\n", config.mesh.dimension));
    resolved.push_str(&format!("lx = {}\n", config.mesh.lx));
    if config.mesh.dimension == 2 {
        resolved.push_str(&format!("ly = {}\n", config.mesh.ly));
    }
    resolved.push_str(&format!("nx = {}\n", config.mesh.nx));
    if config.mesh.dimension == 2 {
        resolved.push_str(&format!("ny = {}\n", config.mesh.ny));
    }
    resolved.push_str(&format!("bc = {}\n\n", bc_name(config.mesh.bc)));
    resolved.push_str("[damping]\n");
    resolved.push_str(&format!("profile = {damping_spec}\n"));
    resolved.push_str(&format!("velocity = {velocity_spec}\n\n"));
    resolved.push_str("[nonlinearity]\n");
    resolved.push_str(&format!("name = {nl_name}\n"));
    if let Some(p) = nl_param {
        resolved.push_str(&format!("param = {p}\n"));
    }
    resolved.push('\n');
    resolved.push_str("[initial]\n");
    resolved.push_str(&format!("u0 = {u0_spec}\n"));
    resolved.push_str(&format!("u1 = {u1_spec}\n\n"));
    resolved.push_str("[integrator]\n");
    resolved.push_str(&format!("dt = {}\n", config.dt));
    resolved.push_str(&format!("t_end = {}\n", config.t_end));
    resolved.push_str(&format!("sample_stride = {}\n", config.sample_stride));
    resolved.push_str(&format!("m_blow = {}\n", config.m_blow));
    match config.epsilon {
        EpsilonChoice::Auto => resolved.push_str("epsilon = auto\n\n"),
        EpsilonChoice::Fixed(e) => resolved.push_str(&format!("epsilon = {e}\n\n")),
    }
    resolved.push_str(&analysis_block(analysis));
    Ok((config, resolved))
}

fn analysis_block(a: &AnalysisParams) -> String {
    format!(
        "[analysis]\nvelocity_threshold = {}\nseed = {}\nradii = {}\nsamples_per_radius = {}\nequilibrium_tol = {}\nt_min_fraction = {}\n",
        a.velocity_threshold,
        a.seed,
        fmt_list(&a.radii),
        a.samples_per_radius,
        a.equilibrium_tol,
        a.t_min_fraction,
    )
}

fn parse_galerkin(ini: &Ini, analysis: &AnalysisParams) -> Result<(GalerkinConfig, String)> {
    let a_diag = parse_list(
        ini.get("galerkin", "a_diag")
            .ok_or_else(|| bad("[galerkin] a_diag is required"))?,
        "a_diag",
    )?;
    let n = a_diag.len();
    if n == 0 {
        return Err(bad("[galerkin] a_diag must be nonempty"));
    }
    let tri = parse_list(
        ini.get("galerkin", "b_tridiag").unwrap_or("0,1,0"),
        "b_tridiag",
    )?;
    if tri.len() != 3 {
        return Err(bad("[galerkin] b_tridiag needs exactly three numbers: sub,diag,super"));
    }
    let mut b = DMatrix::from_element(n, n, 0.0);
    for i in 0..n {
        b[(i, i)] = tri[1];
        if i + 1 < n {
            b[(i + 1, i)] = tri[0];
            b[(i, i + 1)] = tri[2];
        }
    }
    let nl_name = ini.get("galerkin", "nonlinearity").unwrap_or("zero").to_string();
    let nl_param = parse_num(ini, "galerkin", "param")?;
    let force =
        GalerkinForce::Componentwise(builtin_with_param(&nl_name, nl_param)?);

    let parse_vec = |key: &str| -> Result<DVector<f64>> {
        match ini.get("galerkin", key) {
            None => Ok(DVector::from_element(n, 0.0)),
            Some(v) => {
                let vals = parse_list(v, key)?;
                if vals.len() != n {
                    return Err(bad(format!("[galerkin] {key} must have {n} entries")));
                }
                Ok(DVector::from_vec(vals))
            }
        }
    };
    let u0 = parse_vec("u0")?;
    let v0 = parse_vec("v0")?;

    let damping_spec = ini.get("damping", "profile").unwrap_or("constant:1").to_string();
    let damping = parse_damping(&damping_spec)?;
    let dt = parse_num(ini, "galerkin", "dt")?.unwrap_or(1e-3);
    let t_end = parse_num(ini, "galerkin", "t_end")?
        .ok_or_else(|| bad("[galerkin] t_end is required"))?;
    let sample_stride = parse_usize(ini, "galerkin", "sample_stride")?.unwrap_or(100);
    let m_blow = parse_num(ini, "galerkin", "m_blow")?.unwrap_or(1e6);

    let config = GalerkinConfig {
        system: GalerkinSystem {
            a: DMatrix::from_diagonal(&DVector::from_vec(a_diag.clone())),
            b,
            force,
        },
        damping,
        dt,
        t_end,
        sample_stride,
        m_blow,
        u0: u0.clone(),
        v0: v0.clone(),
    };

    let mut resolved = String::new();
    resolved.push_str("[galerkin]\n");
    resolved.push_str(&format!("a_diag = {}\n", fmt_list(&a_diag)));
    resolved.push_str(&format!("b_tridiag = {}\n", fmt_list(&tri)));
    resolved.push_str(&format!("nonlinearity = {nl_name}\n"));
    if let Some(p) = nl_param {
        resolved.push_str(&format!("param = {p}\n"));
    }
    resolved.push_str(&format!("u0 = {}\n", fmt_list(u0.as_slice())));
    resolved.push_str(&format!("v0 = {}\n", fmt_list(v0.as_slice())));
    resolved.push_str(&format!("dt = {dt}\n"));
    resolved.push_str(&format!("t_end = {t_end}\n"));
    resolved.push_str(&format!("sample_stride = {sample_stride}\n"));
    resolved.push_str(&format!("m_blow = {m_blow}\n\n"));
    resolved.push_str("[damping]\n");
    resolved.push_str(&format!("profile = {damping_spec}\n\n"));
    resolved.push_str(&analysis_block(analysis));
    Ok((config, resolved))
}
