use serde::{Deserialize, Serialize};

use super::raster::{Cell, DomainGrid};
use super::{CurrentError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    /// Red-black SOR, switching to conjugate gradient if SOR has not
    /// converged after half the iteration budget.
    #[default]
    Auto,
    Sor,
    Cg,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub method: SolverMethod,
    /// Defaults to `200 * max(nx, ny)`.
    pub max_iterations: Option<usize>,
    /// Fixed relaxation factor; estimated from the Jacobi spectral radius
    /// when absent.
    pub omega: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { method: SolverMethod::Auto, max_iterations: None, omega: None }
    }
}

/// Solved stream function and sheet current density on the grid.
#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub grid: DomainGrid,
    /// Stream function per cell; bank cells hold their boundary value and
    /// barrier cells NaN.
    pub psi: Vec<f64>,
    pub jx: Vec<f64>,
    pub jy: Vec<f64>,
    /// Final relative residual `|b - A psi| / |b|`.
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub method: SolverMethod,
    pub omega: f64,
}

impl FieldGrid {
    pub fn j_mag(&self, k: usize) -> f64 {
        self.jx[k].hypot(self.jy[k])
    }
}

/// Five-point finite-volume system on the wire cells. All off-diagonal
/// couplings are -1; Dirichlet faces at sub-cell distance `d` add `h/d`
/// to the diagonal.
pub(crate) struct System {
    pub unknown_of: Vec<usize>,
    pub nb: Vec<[u32; 4]>,
    pub diag: Vec<f64>,
    pub rhs: Vec<f64>,
    pub red: Vec<u32>,
    pub black: Vec<u32>,
}

const NONE: u32 = u32::MAX;

impl System {
    pub fn assemble(grid: &DomainGrid) -> System {
        let n_cells = grid.cells.len();
        let mut unknown_of = vec![usize::MAX; n_cells];
        let mut cell_of = Vec::new();
        for k in 0..n_cells {
            if grid.is_wire(k) {
                unknown_of[k] = cell_of.len();
                cell_of.push(k);
            }
        }
        let n = cell_of.len();
        let mut nb = vec![[NONE; 4]; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut red = Vec::with_capacity(n / 2 + 1);
        let mut black = Vec::with_capacity(n / 2 + 1);
        let h = grid.cell_size;
        for (u, &k) in cell_of.iter().enumerate() {
            for dir in 0..4 {
                let Some(m) = grid.neighbor(k, dir) else { continue };
                match grid.cells[m] {
                    Cell::Wire => {
                        nb[u][dir] = unknown_of[m] as u32;
                        diag[u] += 1.0;
                    }
                    Cell::Bank(b) => {
                        let c = h / grid.face_dist[k][dir];
                        diag[u] += c;
                        rhs[u] += c * b as f64;
                    }
                    Cell::Barrier => {}
                }
            }
            let (i, j) = grid.coords(k);
            if (i + j) % 2 == 0 {
                red.push(u as u32);
            } else {
                black.push(u as u32);
            }
        }
        System { unknown_of, nb, diag, rhs, red, black }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    fn neighbor_sum(&self, x: &[f64], u: usize) -> f64 {
        let mut s = 0.0;
        for &m in &self.nb[u] {
            if m != NONE {
                s += x[m as usize];
            }
        }
        s
    }

    /// y = A x
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for u in 0..self.len() {
            y[u] = self.diag[u] * x[u] - self.neighbor_sum(x, u);
        }
    }

    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut rr = 0.0;
        let mut bb = 0.0;
        for u in 0..self.len() {
            let r = self.rhs[u] + self.neighbor_sum(x, u) - self.diag[u] * x[u];
            rr += r * r;
            bb += self.rhs[u] * self.rhs[u];
        }
        if bb == 0.0 {
            rr.sqrt()
        } else {
            (rr / bb).sqrt()
        }
    }

    /// Spectral radius of the Jacobi iteration matrix by power iteration on
    /// the symmetrically scaled operator. The spectrum is symmetric for a
    /// red-black grid, so the estimate uses two applications per step.
    fn jacobi_radius(&self, iterations: usize) -> f64 {
        let n = self.len();
        let inv_sqrt: Vec<f64> = self.diag.iter().map(|d| 1.0 / d.sqrt()).collect();
        let mut x: Vec<f64> = self.diag.iter().map(|d| d.sqrt()).collect();
        let mut tmp = vec![0.0; n];
        let mut y = vec![0.0; n];
        let apply = |src: &[f64], dst: &mut [f64]| {
            for u in 0..n {
                let mut s = 0.0;
                for &m in &self.nb[u] {
                    if m != NONE {
                        s += src[m as usize] * inv_sqrt[m as usize];
                    }
                }
                dst[u] = s * inv_sqrt[u];
            }
        };
        let mut rho2 = 0.0;
        for _ in 0..iterations {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            apply(&x, &mut tmp);
            apply(&tmp, &mut y);
            rho2 = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            std::mem::swap(&mut x, &mut y);
        }
        rho2.max(0.0).sqrt().min(1.0 - 1e-12)
    }

    fn sor_sweep(&self, x: &mut [f64], omega: f64) {
        for color in [&self.red, &self.black] {
            for &u in color.iter() {
                let u = u as usize;
                let target = (self.rhs[u] + self.neighbor_sum(x, u)) / self.diag[u];
                x[u] += omega * (target - x[u]);
            }
        }
    }
}

fn check_every(n: usize) -> usize {
    (n / 50).clamp(5, 50)
}

fn run_sor(
    sys: &System,
    x: &mut [f64],
    omega: f64,
    tol: f64,
    budget: usize,
    history: &mut Vec<f64>,
) -> (bool, usize) {
    let every = check_every(budget);
    let mut it = 0;
    while it < budget {
        let steps = every.min(budget - it);
        for _ in 0..steps {
            sys.sor_sweep(x, omega);
        }
        it += steps;
        let r = sys.relative_residual(x);
        history.push(r);
        if r <= tol {
            return (true, it);
        }
        if !r.is_finite() {
            return (false, it);
        }
    }
    (false, it)
}

/// Jacobi-preconditioned conjugate gradient starting from `x`.
fn run_cg(sys: &System, x: &mut [f64], tol: f64, budget: usize, history: &mut Vec<f64>) -> (bool, usize) {
    let n = sys.len();
    let bnorm = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut ax = vec![0.0; n];
    sys.apply(x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|u| sys.rhs[u] - ax[u]).collect();
    let mut z: Vec<f64> = (0..n).map(|u| r[u] / sys.diag[u]).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut q = vec![0.0; n];
    let every = check_every(budget);
    for it in 1..=budget {
        sys.apply(&p, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
        if pq <= 0.0 {
            return (false, it);
        }
        let alpha = rz / pq;
        for u in 0..n {
            x[u] += alpha * p[u];
            r[u] -= alpha * q[u];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if it % every == 0 {
            history.push(rnorm);
        }
        if rnorm <= tol {
            // confirm against the true residual to guard against drift
            let true_r = sys.relative_residual(x);
            if true_r <= tol {
                history.push(true_r);
                return (true, it);
            }
        }
        for u in 0..n {
            z[u] = r[u] / sys.diag[u];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for u in 0..n {
            p[u] = z[u] + beta * p[u];
        }
    }
    (false, budget)
}

pub fn solve_stream(grid: &DomainGrid, tol: f64) -> Result<FieldGrid> {
    solve_stream_with(grid, tol, SolverOptions::default())
}

pub fn solve_stream_with(grid: &DomainGrid, tol: f64, opts: SolverOptions) -> Result<FieldGrid> {
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(CurrentError::Tolerance(tol));
    }
    let sys = System::assemble(grid);
    let cap = opts.max_iterations.unwrap_or(200 * grid.nx.max(grid.ny));
    // start from the mean of the bank values
    let mut x = vec![0.5; sys.len()];
    let mut history = Vec::new();
    let omega = opts.omega.unwrap_or_else(|| {
        let rho = sys.jacobi_radius(60);
        2.0 / (1.0 + (1.0 - rho * rho).sqrt())
    });
    let (converged, iterations, method) = match opts.method {
        SolverMethod::Sor => {
            let (ok, it) = run_sor(&sys, &mut x, omega, tol, cap, &mut history);
            (ok, it, SolverMethod::Sor)
        }
        SolverMethod::Cg => {
            let (ok, it) = run_cg(&sys, &mut x, tol, cap, &mut history);
            (ok, it, SolverMethod::Cg)
        }
        SolverMethod::Auto => {
            let half = cap / 2;
            let (ok, it) = run_sor(&sys, &mut x, omega, tol, half, &mut history);
            if ok {
                (true, it, SolverMethod::Sor)
            } else {
                if !x.iter().all(|v| v.is_finite()) {
                    x.iter_mut().for_each(|v| *v = 0.5);
                }
                let (ok2, it2) = run_cg(&sys, &mut x, tol, cap - it, &mut history);
                (ok2, it + it2, SolverMethod::Cg)
            }
        }
    };
    let residual = sys.relative_residual(&x);
    if !converged {
        return Err(CurrentError::NonConvergence { residual, iterations, history });
    }

    let n_cells = grid.cells.len();
    let mut psi = vec![f64::NAN; n_cells];
    for k in 0..n_cells {
        match grid.cells[k] {
            Cell::Wire => psi[k] = x[sys.unknown_of[k]],
            Cell::Bank(b) => psi[k] = b as f64,
            Cell::Barrier => {}
        }
    }
    let (jx, jy) = current_density(grid, &psi);
    Ok(FieldGrid {
        grid: grid.clone(),
        psi,
        jx,
        jy,
        residual,
        residual_history: history,
        iterations,
        method,
        omega,
    })
}

/// Current density from the stream-function gradient. Interior cells use
/// centred differences. Cells touching the wire edge use a weighted
/// least-squares plane through the neighbouring wire centres and the
/// boundary points, with weights `1 / max(r, h/2)^2`; a pure one-sided
/// difference over a tiny boundary distance would amplify the discretization
/// error of the cell value.
fn current_density(grid: &DomainGrid, psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = grid.cells.len();
    let h = grid.cell_size;
    let mut jx = vec![0.0; n];
    let mut jy = vec![0.0; n];
    for k in 0..n {
        if !grid.is_wire(k) {
            continue;
        }
        let nbs: [Option<usize>; 4] = std::array::from_fn(|d| grid.neighbor(k, d));
        let interior = nbs.iter().all(|m| m.is_some_and(|m| grid.is_wire(m)));
        let (dpdx, dpdy) = if interior {
            let v = |d: usize| psi[nbs[d].unwrap()];
            ((v(1) - v(0)) / (2.0 * h), (v(3) - v(2)) / (2.0 * h))
        } else {
            edge_gradient(grid, psi, k)
        };
        jx[k] = dpdy;
        jy[k] = -dpdx;
    }
    (jx, jy)
}

fn edge_gradient(grid: &DomainGrid, psi: &[f64], k: usize) -> (f64, f64) {
    let h = grid.cell_size;
    let (i, j) = grid.coords(k);
    let pc = psi[k];
    // normal equations of the 2x2 weighted fit
    let (mut sxx, mut sxy, mut syy, mut bx, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut add = |dx: f64, dy: f64, dv: f64| {
        let r2 = (dx * dx + dy * dy).max(0.25 * h * h);
        let w = 1.0 / r2;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
        bx += w * dx * dv;
        by += w * dy * dv;
    };
    for dir in 0..4 {
        let Some(m) = grid.neighbor(k, dir) else { continue };
        let (ux, uy) = super::raster::DIRS[dir];
        match grid.cells[m] {
            Cell::Wire => add(ux as f64 * h, uy as f64 * h, psi[m] - pc),
            Cell::Bank(b) => {
                let d = grid.face_dist[k][dir];
                add(ux as f64 * d, uy as f64 * d, b as f64 - pc);
            }
            Cell::Barrier => {}
        }
    }
    for (di, dj) in [(-1i64, -1i64), (1, -1), (-1, 1), (1, 1)] {
        let ni = i as i64 + di;
        let nj = j as i64 + dj;
        if ni < 0 || nj < 0 || ni >= grid.nx as i64 || nj >= grid.ny as i64 {
            continue;
        }
        let m = grid.idx(ni as usize, nj as usize);
        if grid.is_wire(m) {
            add(di as f64 * h, dj as f64 * h, psi[m] - pc);
        }
    }
    let det = sxx * syy - sxy * sxy;
    if det.abs() <= 1e-12 * (sxx * syy).max(f64::MIN_POSITIVE) {
        // degenerate stencil: fall back to whichever axis is determined
        let gx = if sxx > 0.0 { bx / sxx } else { 0.0 };
        let gy = if syy > 0.0 { by / syy } else { 0.0 };
        return (gx, gy);
    }
    ((syy * bx - sxy * by) / det, (sxx * by - sxy * bx) / det)
}
