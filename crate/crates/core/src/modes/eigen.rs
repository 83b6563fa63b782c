//! Shift-and-invert Arnoldi iteration with explicit restarts for a few
//! eigenvalues of a real sparse matrix closest to a real shift.

use std::sync::Mutex;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use thiserror::Error;

use super::sparse::Csr;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("operator shifted by {shift} is singular or could not be factorized")]
    Factorization { shift: f64 },
    #[error("eigensolver did not converge after {restarts} restarts (residual {residual:.3e})")]
    NotConverged { restarts: usize, residual: f64 },
    #[error("operator of dimension {0} too small for the requested subspace")]
    TooSmall(usize),
}

/// Settings for [`shift_invert`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftInvert {
    pub shift: f64,
    pub krylov_dim: usize,
    pub n_wanted: usize,
    /// Relative residual ‖Ax − λx‖ / (|λ|‖x‖) required for every wanted pair.
    pub tol: f64,
    pub max_restarts: usize,
}

impl ShiftInvert {
    pub fn new(shift: f64) -> Self {
        Self {
            shift,
            krylov_dim: 40,
            n_wanted: 3,
            tol: 1e-10,
            max_restarts: 30,
        }
    }
}

/// A converged real eigenpair with unit-norm eigenvector.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Symbolic LU analyses of recently seen sparsity patterns. Sweeps over
/// wavelength reuse one mesh, so only the numeric factorization is redone.
static SYMBOLIC: Mutex<Vec<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>> = Mutex::new(Vec::new());
const SYMBOLIC_SLOTS: usize = 4;

fn factorize(mat: &SparseColMat<usize, f64>) -> Option<Lu<usize, f64>> {
    let sym = mat.symbolic();
    let (ptr, idx) = (sym.col_ptr(), sym.row_idx());
    let cached = {
        let slots = SYMBOLIC.lock().unwrap_or_else(|e| e.into_inner());
        slots.iter().find(|(p, i, _)| p == ptr && i == idx).map(|(_, _, s)| s.clone())
    };
    let symbolic = match cached {
        Some(s) => s,
        None => {
            let s = SymbolicLu::try_new(sym).ok()?;
            let mut slots = SYMBOLIC.lock().unwrap_or_else(|e| e.into_inner());
            if slots.len() == SYMBOLIC_SLOTS {
                slots.remove(0);
            }
            slots.push((ptr.to_vec(), idx.to_vec(), s.clone()));
            s
        }
    };
    Lu::try_new_with_symbolic(symbolic, mat.as_ref()).ok()
}

/// Real eigenpairs of `a` whose eigenvalues lie nearest `opts.shift`, sorted
/// by decreasing eigenvalue. Fully deterministic for fixed inputs.
pub fn shift_invert(a: &Csr, opts: &ShiftInvert) -> Result<Vec<EigenPair>, EigenError> {
    let n = a.nrows();
    if n < 2 || opts.n_wanted == 0 {
        return Err(EigenError::TooSmall(n));
    }
    let m = opts.krylov_dim.min(n - 1).max(opts.n_wanted + 1);
    if m >= n {
        return Err(EigenError::TooSmall(n));
    }

    let mut trip: Vec<_> = a.triplets().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
    trip.extend((0..n).map(|i| Triplet::new(i, i, -opts.shift)));
    let fact_err = || EigenError::Factorization { shift: opts.shift };
    let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|_| fact_err())?;
    let lu = factorize(&shifted).ok_or_else(fact_err)?;

    let apply = |v: &[f64]| -> Result<Vec<f64>, EigenError> {
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| v[i]);
        lu.solve_in_place(rhs.as_mut());
        let out: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
        if out.iter().all(|x| x.is_finite()) {
            Ok(out)
        } else {
            Err(fact_err())
        }
    };

    // Deterministic, non-symmetric start vector.
    let golden = 0.618_033_988_749_895;
    let mut start: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.25 * ((i as f64 * golden).fract() - 0.5))
        .collect();
    let mut worst = f64::INFINITY;

    for restart in 0..=opts.max_restarts {
        let s = norm(&start);
        let mut basis = vec![start.iter().map(|x| x / s).collect::<Vec<f64>>()];
        let mut h = Mat::<f64>::zeros(m + 1, m);
        let mut dim = m;
        for j in 0..m {
            let mut w = apply(&basis[j])?;
            // Classical Gram–Schmidt with one reorthogonalization pass.
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    h[(i, j)] += c;
                    w.iter_mut().zip(q).for_each(|(wk, qk)| *wk -= c * qk);
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = hn;
            if hn <= 1e-14 * h[(j, j)].abs().max(1.0) {
                dim = j + 1;
                break;
            }
            w.iter_mut().for_each(|x| *x /= hn);
            basis.push(w);
        }

        let hm = Mat::<f64>::from_fn(dim, dim, |i, j| h[(i, j)]);
        let eig = hm
            .eigen()
            .map_err(|_| EigenError::NotConverged { restarts: 0, residual: f64::NAN })?;
        let (u, s) = (eig.U(), eig.S());
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&p, &q| {
            let (tp, tq) = (s[p], s[q]);
            (tq.re.hypot(tq.im)).total_cmp(&tp.re.hypot(tp.im)).then(p.cmp(&q))
        });

        let mut pairs = Vec::new();
        for &k in &order {
            if pairs.len() == opts.n_wanted {
                break;
            }
            let theta = s[k];
            let mag = theta.re.hypot(theta.im);
            if mag == 0.0 || theta.im.abs() > 1e-8 * mag {
                continue;
            }
            // Rotate the complex Ritz coefficients onto the real axis.
            let piv = (0..dim)
                .max_by(|&p, &q| u[(p, k)].norm().total_cmp(&u[(q, k)].norm()))
                .expect("nonempty");
            let phase = u[(piv, k)].conj() / u[(piv, k)].norm();
            let y: Vec<f64> = (0..dim).map(|i| (u[(i, k)] * phase).re).collect();
            let mut x = vec![0.0; n];
            for (yi, q) in y.iter().zip(&basis) {
                x.iter_mut().zip(q).for_each(|(xk, qk)| *xk += yi * qk);
            }
            let xn = norm(&x);
            x.iter_mut().for_each(|v| *v /= xn);
            let value = opts.shift + 1.0 / theta.re;
            let ax = a.matvec(&x);
            let r: Vec<f64> = ax.iter().zip(&x).map(|(p, q)| p - value * q).collect();
            let residual = norm(&r) / value.abs().max(f64::MIN_POSITIVE);
            pairs.push(EigenPair { value, vector: x, residual });
        }
        if pairs.is_empty() {
            return Err(EigenError::NotConverged { restarts: 0, residual: f64::NAN });
        }
        worst = pairs.iter().map(|p| p.residual).fold(0.0, f64::max);
        if worst <= opts.tol || dim < m {
            pairs.sort_by(|p, q| q.value.total_cmp(&p.value));
            if worst > opts.tol {
                return Err(EigenError::NotConverged { restarts: restart, residual: worst });
            }
            return Ok(pairs);
        }
        start = vec![0.0; n];
        for p in &pairs {
            start.iter_mut().zip(&p.vector).for_each(|(s, v)| *s += v);
        }
    }
    Err(EigenError::NotConverged { restarts: opts.max_restarts, residual: worst })
}
