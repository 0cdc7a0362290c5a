//! Uniform tensor meshes on an interval or rectangle, with the discrete
//! Laplacian, boundary-condition closures and trapezoidal quadrature.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

static MESH_COUNTER: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    /// u = 0 on the boundary.
    Dirichlet,
    /// Homogeneous normal derivative, mirrored ghost nodes.
    Neumann,
    /// Robin-with-velocity closure: normal derivative + u + u_t = 0 (1D only).
    Dynamical,
}

impl BcKind {
    pub fn name(&self) -> &'static str {
        match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
            BcKind::Dynamical => "dynamical",
        }
    }
}

/// Uniform mesh. In 1D `ny == 1` and the y extent is unused.
/// Nodes are ordered x-major: `index = j * nx + i`.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub dimension: usize,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub bc: BcKind,
    id: u64,
}

impl Mesh {
    pub fn new_1d(lx: f64, nx: usize, bc: BcKind) -> Result<Self> {
        if !(lx > 0.0) {
            return Err(Error::InvalidExtent(format!("lx = {lx}")));
        }
        if nx < 3 {
            return Err(Error::InvalidExtent(format!("nx = {nx} < 3")));
        }
        Ok(Mesh {
            dimension: 1,
            lx,
            ly: 0.0,
            nx,
            ny: 1,
            dx: lx / (nx - 1) as f64,
            dy: 0.0,
            bc,
            id: MESH_COUNTER.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn new_2d(lx: f64, ly: f64, nx: usize, ny: usize, bc: BcKind) -> Result<Self> {
        if !(lx > 0.0 && ly > 0.0) {
            return Err(Error::InvalidExtent(format!("lx = {lx}, ly = {ly}")));
        }
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidExtent(format!("nx = {nx}, ny = {ny}; need >= 3")));
        }
        if bc == BcKind::Dynamical {
            return Err(Error::UnsupportedBcDimension(
                "dynamical boundary condition is only available in 1D".into(),
            ));
        }
        Ok(Mesh {
            dimension: 2,
            lx,
            ly,
            nx,
            ny,
            dx: lx / (nx - 1) as f64,
            dy: ly / (ny - 1) as f64,
            bc,
            id: MESH_COUNTER.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn node_count(&self) -> usize {
        self.nx * self.ny
    }

    pub fn min_spacing(&self) -> f64 {
        if self.dimension == 1 {
            self.dx
        } else {
            self.dx.min(self.dy)
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    /// x coordinate of node i (1D) or column i (2D).
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    /// Trapezoidal quadrature weight of a node.
    fn weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 * self.dx } else { self.dx };
        if self.dimension == 1 {
            wx
        } else {
            let wy = if j == 0 || j == self.ny - 1 { 0.5 * self.dy } else { self.dy };
            wx * wy
        }
    }

    pub fn zero_field(&self) -> Field {
        Field {
            values: vec![0.0; self.node_count()],
            mesh_id: self.id,
        }
    }

    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let mut values = Vec::with_capacity(self.node_count());
        for j in 0..self.ny {
            for i in 0..self.nx {
                values.push(f(self.x(i), self.y(j)));
            }
        }
        Field { values, mesh_id: self.id }
    }
}

/// Nodal values on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
    mesh_id: u64,
}

impl Field {
    pub fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.mesh_id != mesh.id || self.values.len() != mesh.node_count() {
            return Err(Error::MeshMismatch);
        }
        Ok(())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            values: self.values.iter().map(|&v| f(v)).collect(),
            mesh_id: self.mesh_id,
        }
    }

    pub fn axpy(&mut self, alpha: f64, other: &Field) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in self.values.iter_mut() {
            *a *= alpha;
        }
    }
}

/// Convenience constructor used by mesh-level helpers and tests.
pub fn build_mesh(
    dimension: usize,
    extents: (f64, f64),
    node_counts: (usize, usize),
    bc: BcKind,
) -> Result<Mesh> {
    match dimension {
        1 => Mesh::new_1d(extents.0, node_counts.0, bc),
        2 => Mesh::new_2d(extents.0, extents.1, node_counts.0, node_counts.1, bc),
        d => Err(Error::InvalidExtent(format!("dimension {d} not supported"))),
    }
}

/// Second-order discrete Laplacian with the mesh's boundary closure.
///
/// Dirichlet rows are zeroed (boundary nodes are pinned at u = 0).
/// Neumann and dynamical boundaries use second-order ghost nodes; the
/// dynamical closure needs the velocity field for its ghost relation
/// (pass `None` to get the stationary Robin closure `du/dn + u = 0`).
pub fn laplacian(u: &Field, mesh: &Mesh, velocity: Option<&Field>) -> Result<Field> {
    u.check_mesh(mesh)?;
    if let Some(v) = velocity {
        v.check_mesh(mesh)?;
    }
    let mut out = mesh.zero_field();
    match mesh.dimension {
        1 => laplacian_1d(u, mesh, velocity, &mut out),
        _ => laplacian_2d(u, mesh, &mut out),
    }
    Ok(out)
}

fn laplacian_1d(u: &Field, mesh: &Mesh, velocity: Option<&Field>, out: &mut Field) {
    let n = mesh.nx;
    let dx = mesh.dx;
    let inv = 1.0 / (dx * dx);
    let uv = &u.values;
    for i in 1..n - 1 {
        out.values[i] = (uv[i + 1] - 2.0 * uv[i] + uv[i - 1]) * inv;
    }
    match mesh.bc {
        BcKind::Dirichlet => {
            out.values[0] = 0.0;
            out.values[n - 1] = 0.0;
        }
        BcKind::Neumann => {
            // mirrored ghosts: u[-1] = u[1], u[n] = u[n-2]
            out.values[0] = 2.0 * (uv[1] - uv[0]) * inv;
            out.values[n - 1] = 2.0 * (uv[n - 2] - uv[n - 1]) * inv;
        }
        BcKind::Dynamical => {
            // du/dn = -(u + v) with outward normal; central ghost elimination.
            let v0 = velocity.map_or(0.0, |v| v.values[0]);
            let vn = velocity.map_or(0.0, |v| v.values[n - 1]);
            out.values[0] = (2.0 * uv[1] - 2.0 * uv[0] - 2.0 * dx * (uv[0] + v0)) * inv;
            out.values[n - 1] =
                (2.0 * uv[n - 2] - 2.0 * uv[n - 1] - 2.0 * dx * (uv[n - 1] + vn)) * inv;
        }
    }
}

fn laplacian_2d(u: &Field, mesh: &Mesh, out: &mut Field) {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let invx = 1.0 / (mesh.dx * mesh.dx);
    let invy = 1.0 / (mesh.dy * mesh.dy);
    let uv = &u.values;
    let at = |i: usize, j: usize| uv[j * nx + i];
    for j in 0..ny {
        for i in 0..nx {
            let on_boundary = i == 0 || i == nx - 1 || j == 0 || j == ny - 1;
            if on_boundary && mesh.bc == BcKind::Dirichlet {
                out.values[j * nx + i] = 0.0;
                continue;
            }
            // Neumann: mirror ghosts in each direction independently.
            let left = if i == 0 { at(1, j) } else { at(i - 1, j) };
            let right = if i == nx - 1 { at(nx - 2, j) } else { at(i + 1, j) };
            let down = if j == 0 { at(i, 1) } else { at(i, j - 1) };
            let up = if j == ny - 1 { at(i, ny - 2) } else { at(i, j + 1) };
            let c = at(i, j);
            out.values[j * nx + i] =
                (left + right - 2.0 * c) * invx + (down + up - 2.0 * c) * invy;
        }
    }
}

/// Trapezoidal quadrature of a field over the domain.
pub fn integrate(u: &Field, mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            s += mesh.weight(i, j) * u.values[j * mesh.nx + i];
        }
    }
    s
}

/// Trapezoidal inner product of two fields.
pub fn inner(a: &Field, b: &Field, mesh: &Mesh) -> f64 {
    let mut s = 0.0;
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let k = j * mesh.nx + i;
            s += mesh.weight(i, j) * a.values[k] * b.values[k];
        }
    }
    s
}

/// Discrete L2 norm.
pub fn l2_norm(u: &Field, mesh: &Mesh) -> f64 {
    inner(u, u, mesh).max(0.0).sqrt()
}

/// Quadrature of |grad u|^2 by cell-midpoint differences.
///
/// Chosen so that for the Dirichlet/Neumann closures the summation-by-parts
/// identity <-laplacian(u), u> = grad_norm_sq(u) holds to round-off, which
/// keeps the discrete energy identity exact at the semidiscrete level.
pub fn grad_norm_sq(u: &Field, mesh: &Mesh) -> f64 {
    let uv = &u.values;
    let nx = mesh.nx;
    if mesh.dimension == 1 {
        let mut s = 0.0;
        for i in 0..nx - 1 {
            let d = (uv[i + 1] - uv[i]) / mesh.dx;
            s += d * d * mesh.dx;
        }
        return s;
    }
    let ny = mesh.ny;
    let mut s = 0.0;
    for j in 0..ny {
        let wy = if j == 0 || j == ny - 1 { 0.5 * mesh.dy } else { mesh.dy };
        for i in 0..nx - 1 {
            let d = (uv[j * nx + i + 1] - uv[j * nx + i]) / mesh.dx;
            s += d * d * mesh.dx * wy;
        }
    }
    for i in 0..nx {
        let wx = if i == 0 || i == nx - 1 { 0.5 * mesh.dx } else { mesh.dx };
        for j in 0..ny - 1 {
            let d = (uv[(j + 1) * nx + i] - uv[j * nx + i]) / mesh.dy;
            s += d * d * mesh.dy * wx;
        }
    }
    s
}

/// Sum of squared boundary values; the 1D surface measure is counting
/// measure on the two endpoints.
pub fn boundary_integral(u: &Field, mesh: &Mesh) -> Result<f64> {
    u.check_mesh(mesh)?;
    if mesh.dimension != 1 {
        return Err(Error::UnsupportedBcDimension(
            "boundary_integral is only defined on 1D meshes".into(),
        ));
    }
    let a = u.values[0];
    let b = u.values[mesh.nx - 1];
    Ok(a * a + b * b)
}

/// Indices of boundary nodes (1D: the two endpoints).
pub fn boundary_nodes(mesh: &Mesh) -> Vec<usize> {
    if mesh.dimension == 1 {
        vec![0, mesh.nx - 1]
    } else {
        let (nx, ny) = (mesh.nx, mesh.ny);
        let mut idx = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if i == 0 || i == nx - 1 || j == 0 || j == ny - 1 {
                    idx.push(j * nx + i);
                }
            }
        }
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn spacing_is_exact() {
        let m = Mesh::new_1d(PI, 101, BcKind::Dirichlet).unwrap();
        assert_eq!(m.dx, PI / 100.0);
    }

    #[test]
    fn nine_node_square() {
        let m = Mesh::new_2d(1.0, 1.0, 3, 3, BcKind::Neumann).unwrap();
        assert_eq!(m.node_count(), 9);
        assert_eq!(m.dx, 0.5);
        assert_eq!(m.dy, 0.5);
    }

    #[test]
    fn dynamical_rejected_in_2d() {
        let err = Mesh::new_2d(1.0, 1.0, 3, 3, BcKind::Dynamical).unwrap_err();
        assert!(matches!(err, Error::UnsupportedBcDimension(_)));
    }

    #[test]
    fn rejects_small_meshes_and_bad_extents() {
        assert!(Mesh::new_1d(0.0, 11, BcKind::Dirichlet).is_err());
        assert!(Mesh::new_1d(1.0, 2, BcKind::Dirichlet).is_err());
        assert!(Mesh::new_2d(1.0, -1.0, 5, 5, BcKind::Dirichlet).is_err());
    }

    #[test]
    fn laplacian_of_sine_truncation_bound() {
        let m = Mesh::new_1d(PI, 201, BcKind::Dirichlet).unwrap();
        let u = m.field_from_fn(|x, _| x.sin());
        let lu = laplacian(&u, &m, None).unwrap();
        // |error| <= dx^2/12 * max|u''''| = dx^2/12 for sin, interior nodes.
        let bound = m.dx * m.dx / 12.0 * 1.01;
        for i in 1..m.nx - 1 {
            let err = (lu.values[i] + m.x(i).sin()).abs();
            assert!(err <= bound, "node {i}: err {err} > bound {bound}");
        }
    }

    #[test]
    fn neumann_annihilates_constants() {
        let m = Mesh::new_1d(2.0, 41, BcKind::Neumann).unwrap();
        let u = m.field_from_fn(|_, _| 3.25);
        let lu = laplacian(&u, &m, None).unwrap();
        assert!(lu.values.iter().all(|&v| v.abs() < 1e-12));

        let m2 = Mesh::new_2d(1.0, 1.0, 9, 9, BcKind::Neumann).unwrap();
        let u2 = m2.field_from_fn(|_, _| -1.5);
        let lu2 = laplacian(&u2, &m2, None).unwrap();
        assert!(lu2.values.iter().all(|&v| v.abs() < 1e-11));
    }

    #[test]
    fn five_point_kills_harmonic_xy() {
        let m = Mesh::new_2d(1.0, 1.0, 11, 11, BcKind::Dirichlet).unwrap();
        let u = m.field_from_fn(|x, y| x * y);
        let lu = laplacian(&u, &m, None).unwrap();
        for j in 1..m.ny - 1 {
            for i in 1..m.nx - 1 {
                assert!(lu.values[j * m.nx + i].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let m = Mesh::new_1d(PI, 201, BcKind::Dirichlet).unwrap();
        let one = m.field_from_fn(|_, _| 1.0);
        assert_relative_eq!(integrate(&one, &m), PI, max_relative = 1e-12);

        let s2 = m.field_from_fn(|x, _| x.sin().powi(2));
        assert!((integrate(&s2, &m) - PI / 2.0).abs() < 1e-4);

        let m2 = Mesh::new_2d(1.0, 1.0, 7, 9, BcKind::Neumann).unwrap();
        let two = m2.field_from_fn(|_, _| 2.0);
        assert_relative_eq!(integrate(&two, &m2), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn boundary_integral_examples() {
        let m = Mesh::new_1d(1.0, 11, BcKind::Dynamical).unwrap();
        let mut u = m.zero_field();
        u.values[0] = 1.0;
        u.values[10] = -2.0;
        assert_eq!(boundary_integral(&u, &m).unwrap(), 5.0);
        assert_eq!(boundary_integral(&m.zero_field(), &m).unwrap(), 0.0);
        let lin = m.field_from_fn(|x, _| x);
        assert_eq!(boundary_integral(&lin, &m).unwrap(), 1.0);

        let m2 = Mesh::new_2d(1.0, 1.0, 3, 3, BcKind::Neumann).unwrap();
        assert!(boundary_integral(&m2.zero_field(), &m2).is_err());
    }

    #[test]
    fn laplacian_symmetric_negative_dirichlet() {
        let m = Mesh::new_1d(PI, 41, BcKind::Dirichlet).unwrap();
        let a = m.field_from_fn(|x, _| (x).sin() + 0.3 * (3.0 * x).sin());
        let b = m.field_from_fn(|x, _| (2.0 * x).sin() - 0.7 * (x).sin());
        let la = laplacian(&a, &m, None).unwrap();
        let lb = laplacian(&b, &m, None).unwrap();
        let s1 = inner(&la, &b, &m);
        let s2 = inner(&a, &lb, &m);
        assert_relative_eq!(s1, s2, max_relative = 1e-12);
        assert!(inner(&la, &a, &m) <= 0.0);
        // summation-by-parts: <-Lu, u> == grad_norm_sq(u)
        assert_relative_eq!(-inner(&la, &a, &m), grad_norm_sq(&a, &m), max_relative = 1e-12);
    }

    #[test]
    fn dirichlet_eigenvalue_second_order() {
        let exact = |k: f64, l: f64| (k * PI / l) * (k * PI / l);
        let rayleigh = |nx: usize| {
            let m = Mesh::new_1d(PI, nx, BcKind::Dirichlet).unwrap();
            let u = m.field_from_fn(|x, _| (2.0 * x).sin());
            let lu = laplacian(&u, &m, None).unwrap();
            -inner(&lu, &u, &m) / inner(&u, &u, &m)
        };
        let e1 = (rayleigh(51) - exact(2.0, PI)).abs();
        let e2 = (rayleigh(101) - exact(2.0, PI)).abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.9, "observed order {order}");
    }

    #[test]
    fn mesh_mismatch_detected() {
        let m1 = Mesh::new_1d(1.0, 11, BcKind::Dirichlet).unwrap();
        let m2 = Mesh::new_1d(1.0, 11, BcKind::Dirichlet).unwrap();
        let u = m1.zero_field();
        assert!(laplacian(&u, &m2, None).is_err());
    }
}
