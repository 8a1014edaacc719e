//! Collocation discretizations of the tangent and secant transfer operators
//! on Chebyshev-Lobatto nodes, with the infinite Gauss branch family summed
//! exactly past a cutoff through Hurwitz zeta values.

use crate::dynamical::{IntervalSystem, Mobius, SystemKind};
use crate::error::{Error, Result};
use crate::numeric::{cheb_deriv_at_zero, cheb_nodes, cheb_t, cheb_values_to_coeffs, hurwitz_zeta};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

pub const DEFAULT_ORDER: usize = 24;
pub const REFINED_ORDER: usize = 32;
/// Gauss branches summed explicitly before the zeta tail takes over.
pub const GAUSS_EXPLICIT_BRANCHES: usize = 256;
const TAIL_ORDER: usize = 6;
const POLE_NORM: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Tangent,
    Secant,
}

/// Discretized operator acting on values at the collocation nodes
/// (tensor nodes, index a*(N+1)+b, for the secant operator).
#[derive(Debug, Clone)]
pub struct Discretization {
    pub s: C64,
    pub order: usize,
    pub which: Which,
    pub nodes: Vec<f64>,
    pub matrix: DMatrix<C64>,
}

fn cpow(x: f64, s: C64) -> C64 {
    (s * x.ln()).exp()
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Chebyshev machinery on an interval [lo, hi].
struct Basis {
    n: usize,
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
}

impl Basis {
    fn new(n: usize, lo: f64, hi: f64) -> Self {
        let nodes = cheb_nodes(n).iter().map(|x| lo + (hi - lo) * x).collect();
        Basis {
            n,
            lo,
            hi,
            nodes,
            coeffs: cheb_values_to_coeffs(n),
        }
    }

    /// Lagrange weights: f(y) = sum_j L_j(y) f(x_j).
    fn lagrange(&self, y: f64) -> Vec<f64> {
        let m = self.n + 1;
        let t = cheb_t(self.n, (y - self.lo) / (self.hi - self.lo));
        (0..m)
            .map(|j| (0..m).map(|k| t[k] * self.coeffs[k * m + j]).sum())
            .collect()
    }

    /// Functionals giving the q-th Taylor coefficient at the left endpoint.
    fn taylor_at_lo(&self, q: usize) -> Vec<f64> {
        let m = self.n + 1;
        let scale = (self.hi - self.lo).powi(-(q as i32));
        let fact: f64 = (1..=q).map(|i| i as f64).product();
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|k| cheb_deriv_at_zero(k, q) * self.coeffs[k * m + j])
                    .sum::<f64>()
                    * scale
                    / fact
            })
            .collect()
    }

    /// Differentiation matrix at the nodes.
    fn diff_matrix(&self) -> DMatrix<f64> {
        let m = self.n + 1;
        let width = self.hi - self.lo;
        let mut dt = DMatrix::zeros(m, m);
        for (i, &x) in self.nodes.iter().enumerate() {
            let t = 2.0 * (x - self.lo) / width - 1.0;
            let tv = cheb_t(self.n, (x - self.lo) / width);
            let mut d = vec![0.0; m];
            if m > 1 {
                d[1] = 1.0;
            }
            for k in 2..m {
                d[k] = 2.0 * tv[k - 1] + 2.0 * t * d[k - 1] - d[k - 2];
            }
            for j in 0..m {
                dt[(i, j)] = (0..m).map(|k| d[k] * self.coeffs[k * m + j]).sum::<f64>() * 2.0 / width;
            }
        }
        dt
    }
}

/// Branch family used by the discretization: explicit maps, plus the Gauss
/// tail m > M when `gauss_tail` is set.
struct Family {
    maps: Vec<Mobius>,
    gauss_tail: Option<usize>,
}

fn family(system: &IntervalSystem, s: C64) -> Result<Family> {
    match system.kind() {
        SystemKind::Gauss => {
            if s.re <= 0.5 {
                return Err(Error::DivergentSeries(s));
            }
            let m = GAUSS_EXPLICIT_BRANCHES;
            Ok(Family {
                maps: (1..=m).map(|k| system.branch_map(k)).collect(),
                gauss_tail: Some(m),
            })
        }
        _ => Ok(Family {
            maps: system.branches().to_vec(),
            gauss_tail: None,
        }),
    }
}

/// One-dimensional weighted composition operator
/// f -> sum_h |h'(x)|^s f(h(x)) on [lo, hi].
fn tangent_matrix(fam: &Family, s: C64, basis: &Basis) -> DMatrix<C64> {
    let m = basis.n + 1;
    let mut a = DMatrix::<C64>::zeros(m, m);
    let taylor: Vec<Vec<f64>> = (0..=TAIL_ORDER).map(|q| basis.taylor_at_lo(q)).collect();
    for (i, &x) in basis.nodes.iter().enumerate() {
        for h in &fam.maps {
            let w = cpow(h.deriv(x).abs(), s);
            let l = basis.lagrange(h.eval(x));
            for j in 0..m {
                a[(i, j)] += w * l[j];
            }
        }
        if let Some(cut) = fam.gauss_tail {
            for (q, t) in taylor.iter().enumerate() {
                let z = hurwitz_zeta(2.0 * s + q as f64, cut as f64 + 1.0 + x);
                for j in 0..m {
                    a[(i, j)] += z * t[j];
                }
            }
        }
    }
    a
}

/// Coefficients of u^0..u^q of (1 + e u)^(-i).
fn inv_binomial_series(e: f64, i: usize, q: usize) -> Vec<f64> {
    let mut out = vec![0.0; q + 1];
    out[0] = 1.0;
    for p in 1..=q {
        // (-1)^p C(i+p-1, p) e^p
        out[p] = out[p - 1] * -(e) * (i + p - 1) as f64 / p as f64;
    }
    out
}

fn mul_series(a: &[C64], b: &[C64]) -> Vec<C64> {
    let q = a.len();
    let mut out = vec![C64::new(0.0, 0.0); q];
    for i in 0..q {
        for j in 0..q - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

fn secant_matrix(fam: &Family, s: C64, basis: &Basis) -> DMatrix<C64> {
    let m = basis.n + 1;
    let dim = m * m;
    let nodes = &basis.nodes;
    // Lagrange vectors of h(x_a) and the factor |c x_a + d|^(-s).
    let lag: Vec<Vec<Vec<f64>>> = fam
        .maps
        .iter()
        .map(|h| nodes.iter().map(|&x| basis.lagrange(h.eval(x))).collect())
        .collect();
    let half: Vec<Vec<C64>> = fam
        .maps
        .iter()
        .map(|h| nodes.iter().map(|&x| cpow((h.c * x + h.d).abs(), -s)).collect())
        .collect();
    let dets: Vec<C64> = fam.maps.iter().map(|h| cpow(h.det().abs(), s)).collect();
    let taylor: Vec<Vec<f64>> = (0..=TAIL_ORDER).map(|q| basis.taylor_at_lo(q)).collect();
    let rows: Vec<Vec<C64>> = (0..dim)
        .into_par_iter()
        .map(|row| {
            let (ia, ib) = (row / m, row % m);
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for (k, _) in fam.maps.iter().enumerate() {
                let w = dets[k] * half[k][ia] * half[k][ib];
                let la = &lag[k][ia];
                let lb = &lag[k][ib];
                for j in 0..m {
                    let alpha = w * la[j];
                    let dst = &mut out[j * m..(j + 1) * m];
                    for (d, &l) in dst.iter_mut().zip(lb) {
                        *d += alpha * l;
                    }
                }
            }
            if let Some(cut) = fam.gauss_tail {
                let (x, y) = (nodes[ia], nodes[ib]);
                let c = 0.5 * (x + y);
                let delta = 0.5 * (x - y);
                let q = TAIL_ORDER;
                let zetas: Vec<C64> = (0..=q)
                    .map(|k| hurwitz_zeta(2.0 * s + k as f64, cut as f64 + 1.0 + c))
                    .collect();
                // (1 - delta^2 u^2)^(-s)
                let mut sq = vec![C64::new(0.0, 0.0); q + 1];
                let mut coef = C64::new(1.0, 0.0);
                for r in 0..=q / 2 {
                    sq[2 * r] = coef;
                    coef *= (s + r as f64) / (r as f64 + 1.0) * delta * delta;
                }
                for i in 0..=q {
                    let pa: Vec<C64> = inv_binomial_series(delta, i, q).into_iter().map(re).collect();
                    for j in 0..=q - i {
                        let pb: Vec<C64> = inv_binomial_series(-delta, j, q).into_iter().map(re).collect();
                        let p = mul_series(&mul_series(&pa, &pb), &sq);
                        let kcoef: C64 = (i + j..=q).map(|qq| zetas[qq] * p[qq - i - j]).sum();
                        if kcoef.norm() == 0.0 {
                            continue;
                        }
                        let (ti, tj) = (&taylor[i], &taylor[j]);
                        for u in 0..m {
                            let alpha = kcoef * ti[u];
                            for v in 0..m {
                                out[u * m + v] += alpha * tj[v];
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    DMatrix::from_fn(dim, dim, |r, c| rows[r][c])
}

pub fn discretize(system: &IntervalSystem, s: C64, order: usize, which: Which) -> Result<Discretization> {
    if order < 4 {
        return Err(Error::InvalidConfig("collocation order must be at least 4".into()));
    }
    let fam = family(system, s)?;
    let basis = Basis::new(order, 0.0, 1.0);
    let matrix = match which {
        Which::Tangent => tangent_matrix(&fam, s, &basis),
        Which::Secant => secant_matrix(&fam, s, &basis),
    };
    Ok(Discretization {
        s,
        order,
        which,
        nodes: basis.nodes,
        matrix,
    })
}

fn norm(v: &DVector<C64>) -> f64 {
    v.norm()
}

/// Power iteration; returns (eigenvalue, unit eigenvector).
fn power_iteration(a: &DMatrix<C64>, max_iter: usize) -> Option<(C64, DVector<C64>)> {
    let n = a.nrows();
    let mut v = DVector::from_fn(n, |i, _| C64::new(1.0 + 0.01 * i as f64, 0.0));
    v /= re(norm(&v));
    let mut lam = C64::new(0.0, 0.0);
    let mut stable = 0;
    for _ in 0..max_iter {
        let w = a * &v;
        let nl = v.dotc(&w);
        let nw = norm(&w);
        if nw == 0.0 {
            return None;
        }
        v = w / re(nw);
        if (nl - lam).norm() <= 1e-15 * nl.norm().max(1e-300) {
            stable += 1;
            if stable >= 3 {
                return Some((nl, v));
            }
        } else {
            stable = 0;
        }
        lam = nl;
    }
    // accept slow convergence when the last steps agree to 1e-12
    let w = a * &v;
    let nl = v.dotc(&w);
    ((nl - lam).norm() <= 1e-12 * nl.norm()).then_some((nl, v))
}

/// Modulus of the second eigenvalue by power iteration on the deflated
/// matrix A - lambda v u^H / (u^H v).
fn second_modulus(a: &DMatrix<C64>, lam: C64, v: &DVector<C64>) -> f64 {
    let ah = a.adjoint();
    let Some((_, u)) = power_iteration(&ah, 5000) else {
        return f64::NAN;
    };
    let scale = u.dotc(v);
    let n = a.nrows();
    let mut x = DVector::from_fn(n, |i, _| C64::new(((i * 7919) % 13) as f64 - 6.0, 1.0));
    let mut log_growth = Vec::new();
    for _ in 0..400 {
        let y = a * &x - v * (lam * u.dotc(&x) / scale);
        let ny = norm(&y);
        let nx = norm(&x);
        if ny == 0.0 || nx == 0.0 {
            return 0.0;
        }
        log_growth.push((ny / nx).ln());
        x = y / re(ny);
    }
    let tail = &log_growth[log_growth.len() - 100..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub s: C64,
    pub order: usize,
    pub lambda: C64,
    /// ln lambda(s)
    pub pressure: C64,
    pub second_modulus: f64,
    pub error_estimate: f64,
    /// Eigenfunction values at the nodes, normalized to 1 at x = 0.
    pub eigenfunction: Vec<C64>,
}

fn dominant_at(system: &IntervalSystem, s: C64, order: usize) -> Result<(C64, f64, DVector<C64>)> {
    let d = discretize(system, s, order, Which::Tangent)?;
    let (lam, v) = power_iteration(&d.matrix, 20_000).ok_or(Error::NoSpectralGap {
        first: f64::NAN,
        second: f64::NAN,
    })?;
    let second = second_modulus(&d.matrix, lam, &v);
    if second.is_nan() || second >= (1.0 - 1e-6) * lam.norm() {
        return Err(Error::NoSpectralGap {
            first: lam.norm(),
            second,
        });
    }
    Ok((lam, second, v))
}

/// Dominant eigenvalue of the tangent operator, with an error estimate from
/// the order-(N+8) discretization.
pub fn dominant_eigenvalue(system: &IntervalSystem, s: C64, order: usize) -> Result<Spectrum> {
    let (lam, second, v) = dominant_at(system, s, order)?;
    let (lam2, _, _) = dominant_at(system, s, order + 8)?;
    let v0 = v[0];
    Ok(Spectrum {
        s,
        order,
        lambda: lam,
        pressure: lam.ln(),
        second_modulus: second,
        error_estimate: (lam - lam2).norm(),
        eigenfunction: v.iter().map(|x| x / v0).collect(),
    })
}

/// Dominant eigenvalue of the secant operator.
pub fn secant_dominant_eigenvalue(system: &IntervalSystem, s: C64, order: usize) -> Result<C64> {
    let d = discretize(system, s, order, Which::Secant)?;
    power_iteration(&d.matrix, 20_000)
        .map(|(l, _)| l)
        .ok_or(Error::NoSpectralGap {
            first: f64::NAN,
            second: f64::NAN,
        })
}

/// lambda(s) only, without the refinement check.
pub fn lambda_dominant(system: &IntervalSystem, s: C64, order: usize) -> Result<C64> {
    let d = discretize(system, s, order, Which::Tangent)?;
    power_iteration(&d.matrix, 20_000)
        .map(|(l, _)| l)
        .ok_or(Error::NoSpectralGap {
            first: f64::NAN,
            second: f64::NAN,
        })
}

/// -lambda'(1) by central differences with step 1e-6 and Richardson
/// extrapolation.
pub fn operator_entropy(system: &IntervalSystem, order: usize) -> Result<f64> {
    let h = 1e-6;
    let lam = |s: f64| lambda_dominant(system, re(s), order).map(|l| l.re);
    let d1 = (lam(1.0 + h)? - lam(1.0 - h)?) / (2.0 * h);
    let d2 = (lam(1.0 + 2.0 * h)? - lam(1.0 - 2.0 * h)?) / (4.0 * h);
    Ok(-(4.0 * d1 - d2) / 3.0)
}

struct Quasi {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Quasi {
    fn new(a: &DMatrix<C64>, s: C64) -> Result<Self> {
        let n = a.nrows();
        let lu = (DMatrix::<C64>::identity(n, n) - a).lu();
        // inverse iteration for ||(I - A)^{-1}||
        let mut x = DVector::from_fn(n, |i, _| C64::new(1.0, 0.1 * ((i % 5) as f64)));
        let mut growth = 0.0;
        for _ in 0..3 {
            let nx = norm(&x);
            let y = lu.solve(&x).ok_or(Error::QuasiInversePole(s))?;
            let ny = norm(&y);
            if !ny.is_finite() {
                return Err(Error::QuasiInversePole(s));
            }
            growth = ny / nx;
            x = y / re(ny);
        }
        if growth > POLE_NORM {
            return Err(Error::QuasiInversePole(s));
        }
        Ok(Quasi { lu })
    }

    fn solve(&self, b: &DVector<C64>) -> DVector<C64> {
        self.lu.solve(b).expect("checked nonsingular")
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OperatorValue {
    pub value: C64,
    pub order: usize,
    pub error_estimate: f64,
}

fn quasi_inverse_at(system: &IntervalSystem, s: C64, order: usize) -> Result<C64> {
    let d = discretize(system, s, order, Which::Secant)?;
    let q = Quasi::new(&d.matrix, s)?;
    let m = order + 1;
    let ones = DVector::from_element(m * m, C64::new(1.0, 0.0));
    let v = q.solve(&ones);
    // node (x, y) = (0, 1)
    Ok(v[order])
}

/// Lambda(s) = ((I - H_s)^{-1} 1)(0, 1) for uniform initial distribution,
/// with an error estimate from the order-(N+8) solve.
pub fn lambda_via_operator(system: &IntervalSystem, s: C64, order: usize) -> Result<OperatorValue> {
    let v = quasi_inverse_at(system, s, order)?;
    let v2 = quasi_inverse_at(system, s, order + 8)?;
    Ok(OperatorValue {
        value: v,
        order,
        error_estimate: (v - v2).norm(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeValue {
    pub t: f64,
    pub order: usize,
    pub norm: f64,
}

/// Proxy for ||(I - H_{1+it})^{-1}|| in the norm sup|u| + sup|grad u|/|t|,
/// maximized over the discretized space by power iteration on the Gram
/// problem. Numeric evidence, not a certified norm.
pub fn resolvent_norm_probe(system: &IntervalSystem, t: f64, order: usize) -> Result<ProbeValue> {
    if t == 0.0 {
        return Err(Error::InvalidConfig("probe needs t != 0".into()));
    }
    let s = C64::new(1.0, t);
    let d = discretize(system, s, order, Which::Secant)?;
    let q = Quasi::new(&d.matrix, s)?;
    let m = order + 1;
    let dim = m * m;
    let basis = Basis::new(order, 0.0, 1.0);
    let d1 = basis.diff_matrix();
    let eye = DMatrix::<f64>::identity(m, m);
    let dx = d1.kronecker(&eye) / t.abs();
    let dy = eye.kronecker(&d1) / t.abs();
    let gram = DMatrix::<f64>::identity(dim, dim) + dx.transpose() * &dx + dy.transpose() * &dy;
    let gram_c = gram.map(re);
    let gram_lu = gram_c.clone().lu();
    let inv = q.lu.try_inverse().ok_or(Error::QuasiInversePole(s))?;
    let inv_h = inv.adjoint();
    let mut v = DVector::from_fn(dim, |i, _| C64::new(1.0 + ((i * 31) % 7) as f64, 0.0));
    let mut mu = 0.0;
    for _ in 0..200 {
        let rv = &inv * &v;
        let w = gram_lu
            .solve(&(&inv_h * (&gram_c * &rv)))
            .expect("Gram matrix is positive definite");
        let num = rv.dotc(&(&gram_c * &rv)).re;
        let den = v.dotc(&(&gram_c * &v)).re;
        let new_mu = num / den;
        let nw = norm(&w);
        v = w / re(nw);
        if (new_mu - mu).abs() <= 1e-10 * new_mu {
            mu = new_mu;
            break;
        }
        mu = new_mu;
    }
    Ok(ProbeValue {
        t,
        order,
        norm: mu.sqrt(),
    })
}

/// Smallest interval containing 0 and mapped into itself by the transposed
/// branches gamma -> (a gamma + c) / (b gamma + d).
fn dual_interval(maps: &[Mobius]) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (mut nlo, mut nhi) = (0.0f64, 0.0f64);
        for h in maps {
            for g in [lo, hi] {
                let den = h.b * g + h.d;
                if den == 0.0 {
                    return None;
                }
                let v = (h.a * g + h.c) / den;
                nlo = nlo.min(v);
                nhi = nhi.max(v);
            }
        }
        if (nlo - lo).abs() < 1e-15 && (nhi - hi).abs() < 1e-15 {
            break;
        }
        lo = nlo;
        hi = nhi;
    }
    let pad = 0.05 * (hi - lo).max(0.1);
    let (lo, hi) = (lo - pad, hi + pad);
    for h in maps {
        let (q0, q1) = (h.b * lo + h.d, h.b * hi + h.d);
        if q0 == 0.0 || q0.signum() != q1.signum() {
            return None;
        }
    }
    (1.0 + lo > 0.0).then_some((lo, hi))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesValue {
    pub value: C64,
    pub levels: usize,
    pub error_estimate: f64,
}

const SERIES_ORDER: usize = 32;
const SERIES_MAX_LEVELS: usize = 100_000;

fn dual_series_at(system: &IntervalSystem, s: C64, order: usize, tol: f64) -> Result<SeriesValue> {
    let fam = family(system, s)?;
    let dual: Vec<Mobius> = fam.maps.iter().map(|h| Mobius::new(h.a, h.c, h.b, h.d)).collect();
    let (lo, hi) = if fam.gauss_tail.is_some() {
        (0.0, 1.0)
    } else {
        dual_interval(&dual)
            .ok_or_else(|| Error::UnsupportedSource("no invariant interval for the level recursion".into()))?
    };
    let basis = Basis::new(order, lo, hi);
    let dual_fam = Family {
        maps: dual,
        gauss_tail: fam.gauss_tail,
    };
    let a = tangent_matrix(&dual_fam, s, &basis);
    let zero_weights: Vec<C64> = basis.lagrange(0.0).into_iter().map(re).collect();
    let at_zero = |v: &DVector<C64>| -> C64 { zero_weights.iter().zip(v.iter()).map(|(w, x)| w * x).sum() };
    let mut v = DVector::from_iterator(basis.n + 1, basis.nodes.iter().map(|&g| cpow(1.0 + g, -s)));
    let mut total = at_zero(&v);
    let mut prev = total;
    for level in 1..SERIES_MAX_LEVELS {
        v = &a * v;
        let term = at_zero(&v);
        total += term;
        let ratio = (term.norm() / prev.norm()).min(1.0);
        prev = term;
        if level > 3 && ratio < 1.0 {
            let tail = term.norm() * ratio / (1.0 - ratio);
            if tail < tol {
                let tail_est = term * (ratio / (1.0 - ratio));
                return Ok(SeriesValue {
                    value: total + tail_est,
                    levels: level,
                    error_estimate: tail,
                });
            }
        }
        if !total.re.is_finite() {
            break;
        }
    }
    Err(Error::DivergentSeries(s))
}

/// Lambda(s) = sum_k Lambda_(k)(s) through the level recursion
/// Phi_k(g) = sum_h |det h|^s |d + g b|^(-2s) Phi_{k-1}((c + g a)/(d + g b)),
/// Phi_0(g) = (1 + g)^(-s), Lambda_(k)(s) = Phi_k(0), discretized on an
/// invariant interval. Requires Re s > 1.
pub fn lambda_series_levels(system: &IntervalSystem, s: C64, tol: f64) -> Result<SeriesValue> {
    if s.re <= 1.0 {
        return Err(Error::DivergentSeries(s));
    }
    let a = dual_series_at(system, s, SERIES_ORDER, tol * 0.1)?;
    let b = dual_series_at(system, s, SERIES_ORDER + 8, tol * 0.1)?;
    Ok(SeriesValue {
        value: a.value,
        levels: a.levels,
        error_estimate: a.error_estimate + (a.value - b.value).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rary_eigenvalues_are_exact() {
        for r in [2usize, 3] {
            let sys = IntervalSystem::rary(r).unwrap();
            for s in [1.1, 2.0, 3.0] {
                let l = lambda_dominant(&sys, re(s), 12).unwrap();
                assert!((l.re - (r as f64).powf(1.0 - s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gauss_eigenvalue_at_one() {
        let g = IntervalSystem::gauss();
        let sp = dominant_eigenvalue(&g, re(1.0), DEFAULT_ORDER).unwrap();
        assert!((sp.lambda.re - 1.0).abs() < 1e-9, "{}", sp.lambda);
        assert!(
            (sp.second_modulus - 0.3036630028987).abs() < 1e-6,
            "{}",
            sp.second_modulus
        );
        // eigenfunction is proportional to 1/(1+x)
        for (x, f) in sp.eigenfunction.iter().enumerate() {
            let node = 0.5 * (1.0 - (PI * x as f64 / DEFAULT_ORDER as f64).cos());
            assert!((f.re - 1.0 / (1.0 + node)).abs() < 1e-9);
        }
    }

    #[test]
    fn gauss_entropy_from_operator() {
        let h = operator_entropy(&IntervalSystem::gauss(), DEFAULT_ORDER).unwrap();
        assert!((h - PI * PI / (6.0 * 2f64.ln())).abs() < 1e-6, "{h}");
    }

    #[test]
    fn quasi_inverse_matches_level_series() {
        let g = IntervalSystem::gauss();
        for s in [1.5, 2.0, 3.0] {
            let a = lambda_via_operator(&g, re(s), 16).unwrap();
            let b = lambda_series_levels(&g, re(s), 1e-12).unwrap();
            assert!((a.value - b.value).norm() < 1e-8, "s={s}: {} vs {}", a.value, b.value);
        }
        let b = IntervalSystem::binary_shift();
        let v = lambda_via_operator(&b, re(2.0), 8).unwrap();
        assert!((v.value.re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_pole_is_detected() {
        let s = C64::new(1.0, 2.0 * PI / 2f64.ln());
        let b = IntervalSystem::binary_shift();
        assert!(matches!(lambda_via_operator(&b, s, 8), Err(Error::QuasiInversePole(_))));
        assert!(lambda_via_operator(&IntervalSystem::gauss(), s, 12).is_ok());
    }

    #[test]
    fn secant_diagonal_reproduces_tangent() {
        let g = IntervalSystem::gauss();
        let n = 10;
        let s = re(1.7);
        let sec = discretize(&g, s, n, Which::Secant).unwrap();
        let tan = discretize(&g, s, n, Which::Tangent).unwrap();
        let m = n + 1;
        let f = |x: f64, y: f64| (x * y + 0.3 * x - y * y).exp();
        let vals = DVector::from_fn(m * m, |r, _| re(f(sec.nodes[r / m], sec.nodes[r % m])));
        let diag = DVector::from_fn(m, |i, _| re(f(sec.nodes[i], sec.nodes[i])));
        let a = &sec.matrix * vals;
        let b = &tan.matrix * diag;
        for i in 0..m {
            assert!((a[i * m + i] - b[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn probe_is_symmetric_and_flags_pole() {
        let g = IntervalSystem::gauss();
        let a = resolvent_norm_probe(&g, 4.0, 8).unwrap();
        let b = resolvent_norm_probe(&g, -4.0, 8).unwrap();
        assert!((a.norm - b.norm).abs() < 1e-6 * a.norm);
        let bs = IntervalSystem::binary_shift();
        assert!(matches!(
            resolvent_norm_probe(&bs, 2.0 * PI / 2f64.ln(), 6),
            Err(Error::QuasiInversePole(_))
        ));
    }
}
