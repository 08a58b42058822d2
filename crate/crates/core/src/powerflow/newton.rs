//! Full Newton–Raphson in polar coordinates with a sparse Jacobian.

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par};
use num_complex::Complex64;

use super::admittance::Ybus;

pub(crate) struct NewtonOutcome {
    pub v: Vec<Complex64>,
    pub converged: bool,
    pub iterations: usize,
    pub max_mismatch: f64,
}

struct Unknowns {
    /// column of the angle unknown for each bus
    angle: Vec<Option<usize>>,
    /// column of the magnitude unknown for each bus
    magnitude: Vec<Option<usize>>,
    dim: usize,
}

impl Unknowns {
    fn new(n: usize, pv: &[usize], pq: &[usize]) -> Self {
        let mut angle = vec![None; n];
        let mut magnitude = vec![None; n];
        let mut next = 0;
        for &i in pv.iter().chain(pq) {
            angle[i] = Some(next);
            next += 1;
        }
        for &i in pq {
            magnitude[i] = Some(next);
            next += 1;
        }
        Self {
            angle,
            magnitude,
            dim: next,
        }
    }
}

fn mismatch(y: &Ybus, v: &[Complex64], s: &[Complex64], x: &Unknowns, out: &mut [f64]) -> f64 {
    let current = y.mul(v);
    let mut worst: f64 = 0.0;
    for (i, ((vi, ii), si)) in v.iter().zip(&current).zip(s).enumerate() {
        let mis = vi * ii.conj() - si;
        if let Some(k) = x.angle[i] {
            out[k] = mis.re;
            worst = worst.max(mis.re.abs());
        }
        if let Some(k) = x.magnitude[i] {
            out[k] = mis.im;
            worst = worst.max(mis.im.abs());
        }
    }
    worst
}

/// Partial derivatives of complex injections with respect to angle and
/// magnitude, scattered straight into Jacobian triplets.
fn jacobian(y: &Ybus, v: &[Complex64], x: &Unknowns, trip: &mut Vec<Triplet<usize, usize, f64>>) {
    trip.clear();
    let current = y.mul(v);
    let j = Complex64::new(0.0, 1.0);
    for i in 0..y.len() {
        let (p_row, q_row) = (x.angle[i], x.magnitude[i]);
        if p_row.is_none() {
            continue;
        }
        let vi = v[i];
        for &(k, yik) in y.row(i) {
            let vk = v[k];
            let unit_k = vk / vk.norm();
            let (d_ang, d_mag) = if k == i {
                (
                    j * vi * (current[i] - yik * vi).conj(),
                    vi * (yik * unit_k).conj() + current[i].conj() * unit_k,
                )
            } else {
                (-j * vi * (yik * vk).conj(), vi * (yik * unit_k).conj())
            };
            if let Some(col) = x.angle[k] {
                if let Some(r) = p_row {
                    trip.push(Triplet::new(r, col, d_ang.re));
                }
                if let Some(r) = q_row {
                    trip.push(Triplet::new(r, col, d_ang.im));
                }
            }
            if let Some(col) = x.magnitude[k] {
                if let Some(r) = p_row {
                    trip.push(Triplet::new(r, col, d_mag.re));
                }
                if let Some(r) = q_row {
                    trip.push(Triplet::new(r, col, d_mag.im));
                }
            }
        }
    }
}

/// Runs Newton iterations from `v0`. The reference bus is whichever bus is
/// in neither `pv` nor `pq`. A singular or non-finite step ends the run as
/// not converged.
pub(crate) fn solve(
    y: &Ybus,
    s_sched: &[Complex64],
    v0: Vec<Complex64>,
    pv: &[usize],
    pq: &[usize],
    tolerance: f64,
    max_iterations: usize,
) -> NewtonOutcome {
    // sequential kernels keep results bit-identical whatever the caller's threading
    faer::set_global_parallelism(Par::Seq);

    let x = Unknowns::new(y.len(), pv, pq);
    let mut v = v0;
    let mut f = vec![0.0; x.dim];
    let mut worst = mismatch(y, &v, s_sched, &x, &mut f);
    let mut iterations = 0;
    let mut trip = Vec::new();
    let mut symbolic: Option<SymbolicLu<usize>> = None;

    let done = |worst: f64| worst.is_finite() && worst <= tolerance;
    while !done(worst) && iterations < max_iterations && worst.is_finite() {
        iterations += 1;
        jacobian(y, &v, &x, &mut trip);
        let Ok(jac) = SparseColMat::<usize, f64>::try_new_from_triplets(x.dim, x.dim, &trip) else {
            break;
        };
        let sym = match &symbolic {
            Some(s) => s.clone(),
            None => match SymbolicLu::try_new(jac.symbolic()) {
                Ok(s) => {
                    symbolic = Some(s.clone());
                    s
                }
                Err(_) => break,
            },
        };
        let Ok(lu) = Lu::try_new_with_symbolic(sym, jac.as_ref()) else {
            break;
        };
        let mut dx = Mat::<f64>::from_fn(x.dim, 1, |r, _| -f[r]);
        lu.solve_in_place(dx.as_mut());
        if (0..x.dim).any(|r| !dx[(r, 0)].is_finite()) {
            break;
        }

        for (i, vi) in v.iter_mut().enumerate() {
            let (mut vm, mut va) = (vi.norm(), vi.arg());
            if let Some(k) = x.angle[i] {
                va += dx[(k, 0)];
            }
            if let Some(k) = x.magnitude[i] {
                vm += dx[(k, 0)];
            }
            *vi = Complex64::from_polar(vm, va);
        }
        worst = mismatch(y, &v, s_sched, &x, &mut f);
    }

    NewtonOutcome {
        converged: done(worst),
        v,
        iterations,
        max_mismatch: worst,
    }
}
