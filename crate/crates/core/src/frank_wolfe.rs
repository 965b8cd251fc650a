//! Minimization of `wᵀKw` over the probability simplex.
//!
//! Frank–Wolfe with away steps and exact line search, followed by an
//! optional active-set polish that solves the KKT system on the support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, to_f64, Real};

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn from_fn<F: Fn(usize, usize) -> T + Sync>(n: usize, f: F) -> Self {
        use rayon::prelude::*;
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| (0..n).map(|j| if j >= i { f(i, j) } else { T::zero() }).collect())
            .collect();
        let mut data: Vec<T> = rows.into_iter().flatten().collect();
        for i in 0..n {
            for j in 0..i {
                data[i * n + j] = data[j * n + i];
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn mul_vec(&self, w: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(w).fold(T::zero(), |a, (&k, &x)| a + k * x))
            .collect()
    }

    pub fn quadratic_form(&self, w: &[T]) -> T {
        dot(w, &self.mul_vec(w))
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Stop once the Frank–Wolfe gap drops below this.
    pub tolerance: f64,
    /// Run the KKT polish when the active set is at most this large.
    pub polish_max_active: usize,
    /// Keep every energy value in the trace (otherwise only the final one).
    pub record_trace: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { max_iterations: 20_000, tolerance: 1e-6, polish_max_active: 600, record_trace: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SolverOutcome<T> {
    pub weights: Vec<T>,
    pub energy: T,
    /// `2(wᵀKw − min_i (Kw)_i)`, an upper bound on `energy − min`.
    pub fw_gap: T,
    /// `max_{w_i>0} (Kw)_i − min_i (Kw)_i`.
    pub spread: T,
    pub iterations: usize,
    pub converged: bool,
    pub polished: bool,
    pub trace: Vec<T>,
}

impl<T: Real> SolverOutcome<T> {
    /// True when the recorded energies never increase (up to rounding).
    pub fn trace_nonincreasing(&self) -> bool {
        self.trace.windows(2).all(|w| {
            let slack = lit::<T>(1e-13) * (T::one() + w[0].abs());
            w[1] <= w[0] + slack
        })
    }
}

struct State<'a, T> {
    k: &'a SymMatrix<T>,
    w: Vec<T>,
    kw: Vec<T>,
}

impl<T: Real> State<'_, T> {
    fn energy(&self) -> T {
        dot(&self.w, &self.kw)
    }

    fn refresh(&mut self) {
        self.kw = self.k.mul_vec(&self.w);
    }

    fn extremes(&self) -> (usize, usize, T, T) {
        let (mut s, mut v) = (0usize, usize::MAX);
        let mut vmax = T::neg_infinity();
        for i in 0..self.w.len() {
            if self.kw[i] < self.kw[s] {
                s = i;
            }
            if self.w[i] > T::zero() && self.kw[i] > vmax {
                vmax = self.kw[i];
                v = i;
            }
        }
        (s, v, self.kw[s], vmax)
    }
}

/// Minimizes `wᵀKw` over the simplex, starting from the uniform vector.
pub fn minimize_on_simplex<T: Real>(k: &SymMatrix<T>, params: &SolverParams) -> Result<SolverOutcome<T>> {
    let n = k.len();
    if n == 0 {
        return Err(Error::input("empty support"));
    }
    if (0..n).any(|i| k.row(i).iter().any(|x| !x.is_finite())) {
        return Err(Error::input("kernel matrix has non-finite entries"));
    }
    let mut st = State { k, w: vec![T::one() / from_usize(n); n], kw: Vec::new() };
    st.refresh();
    let tol = lit::<T>(params.tolerance);
    let two = lit::<T>(2.0);
    let mut energy = st.energy();
    let mut trace = vec![energy];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iterations {
        let (s, v, kmin, kmax) = st.extremes();
        let fw_gap = two * (energy - kmin);
        if fw_gap <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        let fw_descent = energy - kmin;
        let away_descent = kmax - energy;
        if fw_descent >= away_descent || v == usize::MAX {
            // d = e_s − w
            let slope = kmin - energy;
            let curv = k.get(s, s) - two * kmin + energy;
            let gamma = step(slope, curv, T::one());
            for i in 0..n {
                st.w[i] = st.w[i] * (T::one() - gamma);
                st.kw[i] = st.kw[i] * (T::one() - gamma) + gamma * k.get(i, s);
            }
            st.w[s] += gamma;
        } else {
            // d = w − e_v
            let wv = st.w[v];
            let gamma_max = wv / (T::one() - wv);
            let slope = energy - kmax;
            let curv = energy - two * kmax + k.get(v, v);
            let gamma = step(slope, curv, gamma_max);
            for i in 0..n {
                st.w[i] = st.w[i] * (T::one() + gamma);
                st.kw[i] = st.kw[i] * (T::one() + gamma) - gamma * k.get(i, v);
            }
            st.w[v] -= gamma;
            if gamma >= gamma_max || st.w[v] < T::zero() {
                st.w[v] = T::zero();
            }
        }
        if iterations % 256 == 0 {
            st.refresh();
        }
        energy = st.energy();
        if params.record_trace {
            trace.push(energy);
        }
    }

    st.refresh();
    energy = st.energy();
    let mut polished = false;
    let active = st.w.iter().filter(|&&x| x > T::zero()).count();
    if active <= params.polish_max_active {
        if let Some(w) = polish(k, &st.w) {
            let kw = k.mul_vec(&w);
            let e = dot(&w, &kw);
            if e <= energy {
                st.w = w;
                st.kw = kw;
                energy = e;
                polished = true;
            }
        }
    }
    if !params.record_trace {
        trace.clear();
    }
    trace.push(energy);
    let (_, _, kmin, kmax) = st.extremes();
    let fw_gap = (two * (energy - kmin)).max(T::zero());
    converged = converged || fw_gap <= tol;
    Ok(SolverOutcome {
        weights: st.w,
        energy,
        fw_gap,
        spread: (kmax - kmin).max(T::zero()),
        iterations,
        converged,
        polished,
        trace,
    })
}

/// Exact line search for `f(γ) = f(0) + 2γ·slope + γ²·curv` on `[0, γ_max]`.
fn step<T: Real>(slope: T, curv: T, gamma_max: T) -> T {
    if slope >= T::zero() {
        return T::zero();
    }
    if curv <= T::zero() {
        return gamma_max;
    }
    (-slope / curv).min(gamma_max)
}

/// Primal active-set refinement: solve the equality-constrained problem on a
/// working set, drop negative weights, add KKT violators, repeat.
fn polish<T: Real>(k: &SymMatrix<T>, w0: &[T]) -> Option<Vec<T>> {
    let n = k.len();
    let mut active: Vec<usize> = (0..n).filter(|&i| w0[i] > T::zero()).collect();
    for _ in 0..64 {
        if active.is_empty() {
            return None;
        }
        let m = active.len();
        // [K_AA 1; 1ᵀ 0] [x; λ] = [0; 1]
        let dim = m + 1;
        let mut a = vec![T::zero(); dim * dim];
        let mut b = vec![T::zero(); dim];
        for (r, &i) in active.iter().enumerate() {
            for (c, &j) in active.iter().enumerate() {
                a[r * dim + c] = k.get(i, j);
            }
            a[r * dim + m] = T::one();
            a[m * dim + r] = T::one();
        }
        b[m] = T::one();
        let x = lu_solve(&mut a, &mut b, dim)?;
        if let Some((pos, _)) = x[..m]
            .iter()
            .enumerate()
            .filter(|(_, &v)| v <= T::zero())
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
        {
            active.remove(pos);
            continue;
        }
        let mut w = vec![T::zero(); n];
        for (r, &i) in active.iter().enumerate() {
            w[i] = x[r];
        }
        let kw = k.mul_vec(&w);
        let e = dot(&w, &kw);
        let slack = lit::<T>(1e-12) * (T::one() + e.abs());
        let violators: Vec<usize> = (0..n).filter(|&j| w[j] == T::zero() && kw[j] < e - slack).collect();
        if violators.is_empty() {
            return Some(w);
        }
        active.extend(violators);
        active.sort_unstable();
    }
    None
}

/// Gaussian elimination with partial pivoting; `a` is `dim × dim` row-major.
fn lu_solve<T: Real>(a: &mut [T], b: &mut [T], dim: usize) -> Option<Vec<T>> {
    for col in 0..dim {
        let piv = (col..dim)
            .max_by(|&i, &j| a[i * dim + col].abs().partial_cmp(&a[j * dim + col].abs()).expect("finite"))?;
        if a[piv * dim + col].abs() <= T::min_positive_value() {
            return None;
        }
        if piv != col {
            for c in 0..dim {
                a.swap(piv * dim + c, col * dim + c);
            }
            b.swap(piv, col);
        }
        let p = a[col * dim + col];
        for r in col + 1..dim {
            let f = a[r * dim + col] / p;
            if f == T::zero() {
                continue;
            }
            for c in col..dim {
                let v = a[col * dim + c];
                a[r * dim + c] -= f * v;
            }
            let bc = b[col];
            b[r] -= f * bc;
        }
    }
    let mut x = vec![T::zero(); dim];
    for r in (0..dim).rev() {
        let mut s = b[r];
        for c in r + 1..dim {
            s -= a[r * dim + c] * x[c];
        }
        x[r] = s / a[r * dim + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Convenience: `to_f64` view of a weight vector.
pub fn weights_f64<T: Real>(w: &[T]) -> Vec<f64> {
    w.iter().map(|&x| to_f64(x)).collect()
}
