//! Linear-system solution: sparse LU for small systems, Jacobi-preconditioned
//! BiCGSTAB above a configurable unknown-count threshold.
//!
//! Both paths are deterministic: the factorization is single-threaded and the
//! Krylov recurrences use fixed serial reduction order, so repeated runs with
//! the same configuration produce bitwise-identical fields.

use super::operator::LinearOperator;
use super::source::SourceSpec;
use super::{FieldSolution, SolverError};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative residual target, within [1e-10, 1e-3].
    pub tol: f64,
    /// Iteration cap for the Krylov path.
    pub max_iterations: usize,
    /// At or below this unknown count a direct factorization is used.
    pub direct_threshold: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iterations: 20_000, direct_threshold: 300_000 }
    }
}

impl SolveOptions {
    fn validate(&self) -> Result<(), SolverError> {
        if !(1e-10..=1e-3).contains(&self.tol) {
            return Err(SolverError::InvalidTolerance(self.tol));
        }
        Ok(())
    }
}

/// A solver bound to one operator; the factorization (or preconditioner) is
/// reused across right-hand sides.
pub enum PreparedSolver<'a> {
    Direct { op: &'a LinearOperator, lu: faer::sparse::linalg::solvers::Lu<usize, Complex64> },
    Iterative { op: &'a LinearOperator, inv_diag: Vec<Complex64> },
}

/// Chooses and prepares the solution path for an operator.
pub fn prepare<'a>(
    op: &'a LinearOperator,
    opts: &SolveOptions,
) -> Result<PreparedSolver<'a>, SolverError> {
    opts.validate()?;
    let n = op.dof_count();
    if n <= opts.direct_threshold {
        let m = &op.matrix;
        let mut trips = Vec::with_capacity(m.nnz());
        for r in 0..m.n_rows {
            for idx in m.row_ptr[r]..m.row_ptr[r + 1] {
                trips.push(Triplet::new(r, m.col_idx[idx] as usize, m.values[idx]));
            }
        }
        let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trips)
            .map_err(|e| SolverError::Assembly(format!("sparse conversion: {e:?}")))?;
        let lu = a
            .as_ref()
            .sp_lu()
            .map_err(|e| SolverError::Assembly(format!("LU factorization failed: {e:?}")))?;
        Ok(PreparedSolver::Direct { op, lu })
    } else {
        let inv_diag = op
            .diagonal()
            .iter()
            .map(|&d| {
                if d.norm() > 0.0 { Complex64::new(1.0, 0.0) / d } else { Complex64::new(1.0, 0.0) }
            })
            .collect();
        Ok(PreparedSolver::Iterative { op, inv_diag })
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // Unconjugated product: BiCGSTAB shadow products for complex-symmetric
    // systems behave better this way and the recurrences stay valid.
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual_norm(op: &LinearOperator, x: &[Complex64], b: &[Complex64]) -> f64 {
    let mut r = op.apply(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    norm(&r)
}

fn solution(op: &LinearOperator, e: Vec<Complex64>, residual: f64, iterations: usize) -> FieldSolution {
    FieldSolution { e, residual, iterations, stag: op.stag, frequency: op.frequency }
}

/// Solves for one right-hand side with a prepared solver.
pub fn solve_prepared(
    ps: &PreparedSolver,
    b: &[Complex64],
    opts: &SolveOptions,
) -> Result<FieldSolution, SolverError> {
    opts.validate()?;
    let b_norm = norm(b);
    let op = match ps {
        PreparedSolver::Direct { op, .. } => op,
        PreparedSolver::Iterative { op, .. } => op,
    };
    if b_norm == 0.0 {
        return Ok(solution(op, vec![Complex64::new(0.0, 0.0); b.len()], 0.0, 0));
    }
    match ps {
        PreparedSolver::Direct { op, lu } => {
            let n = b.len();
            let rhs = faer::Mat::<Complex64>::from_fn(n, 1, |i, _| b[i]);
            let sol = lu.solve(rhs.as_ref());
            let mut x: Vec<Complex64> = (0..n).map(|i| sol[(i, 0)]).collect();
            let mut rel = residual_norm(op, &x, b) / b_norm;
            // A couple of refinement sweeps if the factorization was sloppy.
            let mut refinements = 0;
            while rel > opts.tol && refinements < 3 {
                let mut r = op.apply(&x);
                for (ri, bi) in r.iter_mut().zip(b) {
                    *ri = bi - *ri;
                }
                let rm = faer::Mat::<Complex64>::from_fn(n, 1, |i, _| r[i]);
                let dx = lu.solve(rm.as_ref());
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi += dx[(i, 0)];
                }
                rel = residual_norm(op, &x, b) / b_norm;
                refinements += 1;
            }
            if rel > opts.tol {
                return Err(SolverError::Convergence {
                    residual: rel,
                    iterations: refinements,
                    history: vec![rel],
                });
            }
            Ok(solution(op, x, rel, 0))
        }
        PreparedSolver::Iterative { op, inv_diag } => {
            bicgstab(op, inv_diag, b, b_norm, opts)
        }
    }
}

/// Jacobi-preconditioned BiCGSTAB with true-residual verification and
/// breakdown restarts.
fn bicgstab(
    op: &LinearOperator,
    inv_diag: &[Complex64],
    b: &[Complex64],
    b_norm: f64,
    opts: &SolveOptions,
) -> Result<FieldSolution, SolverError> {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut x = vec![zero; n];
    let mut r: Vec<Complex64> = b.to_vec();
    let mut r_hat = r.clone();
    let mut p = vec![zero; n];
    let mut v = vec![zero; n];
    let mut s = vec![zero; n];
    let mut t = vec![zero; n];
    let mut p_hat = vec![zero; n];
    let mut s_hat = vec![zero; n];
    let mut rho = one;
    let mut alpha = one;
    let mut omega = one;
    let mut history = Vec::new();
    let mut total_iters = 0usize;
    let breakdown = 1e-290;

    while total_iters < opts.max_iterations {
        let rho_new = dot(&r_hat, &r);
        if rho_new.norm() < breakdown || omega.norm() < breakdown {
            // Restart from the current iterate with a fresh shadow residual.
            let mut rr = op.apply(&x);
            for (ri, bi) in rr.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            r = rr;
            r_hat = r.clone();
            p.iter_mut().for_each(|z| *z = zero);
            v.iter_mut().for_each(|z| *z = zero);
            rho = one;
            alpha = one;
            omega = one;
            total_iters += 1;
            if norm(&r) / b_norm <= opts.tol {
                break;
            }
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        for i in 0..n {
            p_hat[i] = inv_diag[i] * p[i];
        }
        op.apply_into(&p_hat, &mut v);
        let denom = dot(&r_hat, &v);
        if denom.norm() < breakdown {
            omega = zero; // trigger restart next loop
            total_iters += 1;
            continue;
        }
        alpha = rho / denom;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= opts.tol {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            total_iters += 1;
            let rel = residual_norm(op, &x, b) / b_norm;
            history.push(rel);
            if rel <= opts.tol {
                return Ok(solution(op, x, rel, total_iters));
            }
            r = op.apply(&x);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
            continue;
        }
        for i in 0..n {
            s_hat[i] = inv_diag[i] * s[i];
        }
        op.apply_into(&s_hat, &mut t);
        let tt = dot(&t, &t);
        if tt.norm() < breakdown {
            omega = zero;
            total_iters += 1;
            continue;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
        }
        for i in 0..n {
            r[i] = s[i] - omega * t[i];
        }
        total_iters += 1;
        let rel = norm(&r) / b_norm;
        history.push(rel);
        if rel <= opts.tol {
            // Verify against the true residual before declaring victory.
            let true_rel = residual_norm(op, &x, b) / b_norm;
            if true_rel <= opts.tol {
                return Ok(solution(op, x, true_rel, total_iters));
            }
            r = op.apply(&x);
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri = bi - *ri;
            }
        }
    }
    let final_rel = residual_norm(op, &x, b) / b_norm;
    if final_rel <= opts.tol {
        return Ok(solution(op, x, final_rel, total_iters));
    }
    Err(SolverError::Convergence { residual: final_rel, iterations: total_iters, history })
}

/// One-shot convenience: build the right-hand side from a source and solve.
pub fn solve(
    op: &LinearOperator,
    src: &SourceSpec,
    opts: &SolveOptions,
) -> Result<FieldSolution, SolverError> {
    let b = src.rhs(op)?;
    let ps = prepare(op, opts)?;
    solve_prepared(&ps, &b, opts)
}
