//! Finite-volume discretization of `div(a grad u)` on a tensor grid and the
//! sparse Cholesky solve of the resulting SPD systems.

use std::sync::Once;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use crate::{Error, Result};

use super::grid::Grid;
use super::region::{Material, RegionMap};

/// Relative residual every solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Materials sampled at cell centers plus the node-to-conductor map.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub cells: Vec<Material>,
    /// Conductor id of each node (periodic duplicates mirror column 0).
    pub node_conductor: Vec<Option<usize>>,
}

impl Layout {
    pub fn new(map: &RegionMap, grid: &Grid) -> Result<Self> {
        if map.periodic_x != grid.periodic_x {
            return Err(Error::GridMismatch("periodicity differs between map and grid".into()));
        }
        let b = &map.bounds;
        let tol = 1e-9 * (b.x1 - b.x0).max(b.y1 - b.y0);
        let (x0, x1) = (grid.xs[0], grid.xs[grid.nx() - 1]);
        let (y0, y1) = (grid.ys[0], grid.ys[grid.ny() - 1]);
        if (x0 - b.x0).abs() > tol || (x1 - b.x1).abs() > tol || (y0 - b.y0).abs() > tol || (y1 - b.y1).abs() > tol {
            return Err(Error::GridMismatch("grid does not span the region box".into()));
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut cells = Vec::with_capacity(grid.cell_count());
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                let (x, y) = grid.cell_center(i, j);
                cells.push(map.material_at(x, y));
            }
        }
        let mut node_conductor = vec![None; grid.node_count()];
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                let Some(id) = cells[grid.cell(i, j)].conductor() else {
                    continue;
                };
                for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                    let a = wrap(grid, a);
                    let slot = &mut node_conductor[grid.node(a, b)];
                    match *slot {
                        Some(other) if other != id => {
                            return Err(Error::InvalidGeometry(format!(
                                "conductors {other} and {id} share grid nodes"
                            )))
                        }
                        _ => *slot = Some(id),
                    }
                }
            }
        }
        if grid.periodic_x {
            for j in 0..ny {
                node_conductor[grid.node(nx - 1, j)] = node_conductor[grid.node(0, j)];
            }
        }
        Ok(Self { cells, node_conductor })
    }

    pub fn permittivity(&self) -> Vec<f64> {
        self.cells.iter().map(Material::permittivity).collect()
    }
}

/// Column index with the periodic seam folded onto column 0.
pub(crate) fn wrap(grid: &Grid, i: usize) -> usize {
    if grid.periodic_x && i == grid.nx() - 1 {
        0
    } else {
        i
    }
}

/// Edge conductances of the five-point finite-volume stencil.
#[derive(Debug, Clone)]
pub(crate) struct Stencil {
    /// Edge `(i, j)-(i+1, j)`, index `i * ny + j`.
    pub gx: Vec<f64>,
    /// Edge `(i, j)-(i, j+1)`, index `i * (ny - 1) + j`.
    pub gy: Vec<f64>,
}

impl Stencil {
    /// Each cell contributes `a * (h_perp / 2) / h` to its four edges.
    pub fn new(grid: &Grid, coeff: &[f64]) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let mut gx = vec![0.0; (nx - 1) * ny];
        let mut gy = vec![0.0; nx * (ny - 1)];
        for i in 0..nx - 1 {
            let hx = grid.hx(i);
            for j in 0..ny - 1 {
                let hy = grid.hy(j);
                let a = coeff[grid.cell(i, j)];
                let cx = a * 0.5 * hy / hx;
                let cy = a * 0.5 * hx / hy;
                gx[i * ny + j] += cx;
                gx[i * ny + j + 1] += cx;
                gy[i * (ny - 1) + j] += cy;
                gy[(i + 1) * (ny - 1) + j] += cy;
            }
        }
        Self { gx, gy }
    }

    /// Visit every edge as `(node_a, node_b, conductance)` with periodic
    /// folding applied.
    pub fn for_each_edge(&self, grid: &Grid, mut f: impl FnMut(usize, usize, f64)) {
        let (nx, ny) = (grid.nx(), grid.ny());
        for i in 0..nx - 1 {
            for j in 0..ny {
                let a = grid.node(i, j);
                let b = grid.node(wrap(grid, i + 1), j);
                f(a, b, self.gx[i * ny + j]);
            }
        }
        let cols = if grid.periodic_x { nx - 1 } else { nx };
        for i in 0..cols {
            for j in 0..ny - 1 {
                let mut g = self.gy[i * (ny - 1) + j];
                if grid.periodic_x && i == 0 {
                    g += self.gy[(nx - 1) * (ny - 1) + j];
                }
                f(grid.node(i, j), grid.node(i, j + 1), g);
            }
        }
    }

    /// Net outflow `sum_b g (u_a - u_b)` at every node.
    pub fn apply(&self, grid: &Grid, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.for_each_edge(grid, |a, b, g| {
            let flux = g * (u[a] - u[b]);
            out[a] += flux;
            out[b] -= flux;
        });
        out
    }

    /// `sum g (u_a - u_b)^2 / 2` over all edges.
    pub fn energy(&self, grid: &Grid, u: &[f64]) -> f64 {
        let mut e = 0.0;
        self.for_each_edge(grid, |a, b, g| e += g * (u[a] - u[b]).powi(2));
        0.5 * e
    }
}

/// Whether a node's value is prescribed: conductor nodes and the grounded
/// outer box (the periodic sides excepted).
pub(crate) fn fixed_nodes(grid: &Grid, layout: &Layout) -> Vec<bool> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut fixed = vec![false; grid.node_count()];
    for i in 0..nx {
        for j in 0..ny {
            let boundary = j == 0 || j == ny - 1 || (!grid.periodic_x && (i == 0 || i == nx - 1));
            fixed[grid.node(i, j)] = boundary || layout.node_conductor[grid.node(i, j)].is_some();
        }
    }
    if grid.periodic_x {
        for j in 0..ny {
            fixed[grid.node(nx - 1, j)] = true;
        }
    }
    fixed
}

/// Reduced system over the free nodes: `(K + diag(m)) u_free = rhs`.
pub(crate) struct System {
    pub free_nodes: Vec<usize>,
    solver: SpdSolver,
}

impl System {
    pub fn new(grid: &Grid, stencil: &Stencil, fixed: &[bool], mass: Option<&[f64]>) -> Result<Self> {
        let mut free_index = vec![None; fixed.len()];
        let mut free_nodes = Vec::new();
        for (k, &f) in fixed.iter().enumerate() {
            if !f {
                free_index[k] = Some(free_nodes.len());
                free_nodes.push(k);
            }
        }
        let n = free_nodes.len();
        if n == 0 {
            return Err(Error::Solver("no free nodes".into()));
        }
        let mut diag = vec![0.0; n];
        let mut off = Vec::new();
        stencil.for_each_edge(grid, |a, b, g| {
            if a == b {
                return;
            }
            if let Some(fa) = free_index[a] {
                diag[fa] += g;
            }
            if let Some(fb) = free_index[b] {
                diag[fb] += g;
            }
            if let (Some(fa), Some(fb)) = (free_index[a], free_index[b]) {
                off.push((fa.max(fb), fa.min(fb), -g));
            }
        });
        if let Some(m) = mass {
            for (f, &node) in free_nodes.iter().enumerate() {
                diag[f] += m[node];
            }
        }
        let solver = SpdSolver::new(n, &diag, &off)?;
        Ok(Self { free_nodes, solver })
    }

    /// Solve with prescribed values at fixed nodes (`u_fixed`, zero at free
    /// nodes) plus a source at free nodes. Returns the full node vector and
    /// the relative residual.
    pub fn solve(&self, grid: &Grid, stencil: &Stencil, u_fixed: &[f64], source: Option<&[f64]>) -> Result<(Vec<f64>, f64)> {
        let lifted = stencil.apply(grid, u_fixed);
        let mut rhs: Vec<f64> = self.free_nodes.iter().map(|&k| -lifted[k]).collect();
        if let Some(s) = source {
            for (f, &k) in self.free_nodes.iter().enumerate() {
                rhs[f] += s[k];
            }
        }
        let (x, residual) = self.solver.solve(&rhs)?;
        let mut u = u_fixed.to_vec();
        for (f, &k) in self.free_nodes.iter().enumerate() {
            u[k] = x[f];
        }
        if grid.periodic_x {
            let nx = grid.nx();
            for j in 0..grid.ny() {
                u[grid.node(nx - 1, j)] = u[grid.node(0, j)];
            }
        }
        Ok((u, residual))
    }
}

/// Sparse SPD matrix with its Cholesky factor.
pub(crate) struct SpdSolver {
    mat: SparseColMat<usize, f64>,
    llt: Llt<usize, f64>,
}

static SEQUENTIAL: Once = Once::new();

impl SpdSolver {
    /// `off` holds strictly-lower entries `(row, col, value)`; the matrix is
    /// symmetric.
    pub fn new(n: usize, diag: &[f64], off: &[(usize, usize, f64)]) -> Result<Self> {
        // Deterministic factorization order keeps repeated runs bitwise equal;
        // parallelism is spent across sweep points instead.
        SEQUENTIAL.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
        let mut trip = Vec::with_capacity(n + 2 * off.len());
        trip.extend(diag.iter().enumerate().map(|(i, &v)| Triplet::new(i, i, v)));
        for &(r, c, v) in off {
            trip.push(Triplet::new(r, c, v));
            trip.push(Triplet::new(c, r, v));
        }
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Solver(format!("matrix assembly: {e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Solver(format!("Cholesky factorization failed: {e:?}")))?;
        Ok(Self { mat, llt })
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let sym = self.mat.symbolic();
        let (ptr, rows, vals) = (sym.col_ptr(), sym.row_idx(), self.mat.val());
        let mut r = b.to_vec();
        for c in 0..x.len() {
            for k in ptr[c]..ptr[c + 1] {
                r[rows[k]] -= vals[k] * x[c];
            }
        }
        r
    }

    /// Solve with up to three steps of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let norm_b = norm(b).max(f64::MIN_POSITIVE);
        let mut x = self.backsolve(b);
        let mut rel = norm(&self.residual(&x, b)) / norm_b;
        for _ in 0..3 {
            if rel <= RESIDUAL_TOL {
                break;
            }
            let r = self.residual(&x, b);
            let dx = self.backsolve(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            rel = norm(&self.residual(&x, b)) / norm_b;
        }
        if !rel.is_finite() || rel > RESIDUAL_TOL {
            return Err(Error::NotConverged {
                residual: rel,
                tolerance: RESIDUAL_TOL,
            });
        }
        Ok((x, rel))
    }

    fn backsolve(&self, b: &[f64]) -> Vec<f64> {
        let col = Col::<f64>::from_fn(b.len(), |i| b[i]);
        let x = self.llt.solve(&col);
        (0..b.len()).map(|i| x[i]).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
