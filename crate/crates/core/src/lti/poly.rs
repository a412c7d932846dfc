//! Real polynomials stored with ascending powers of `s`.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

/// Drops trailing (highest-power) zero coefficients, keeping at least one.
pub fn trim(p: &[f64]) -> Vec<f64> {
    let mut v = p.to_vec();
    while v.len() > 1 && *v.last().unwrap() == 0.0 {
        v.pop();
    }
    if v.is_empty() {
        v.push(0.0);
    }
    v
}

pub fn degree(p: &[f64]) -> usize {
    trim(p).len() - 1
}

pub fn is_zero(p: &[f64]) -> bool {
    p.iter().all(|c| *c == 0.0)
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    trim(&out)
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let out: Vec<f64> = (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0))
        .collect();
    trim(&out)
}

pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    trim(&a.iter().map(|c| c * k).collect::<Vec<_>>())
}

/// Horner evaluation at a complex point.
pub fn eval(p: &[f64], s: Complex64) -> Complex64 {
    p.iter()
        .rev()
        .fold(Complex64::zero(), |acc, &c| acc * s + Complex64::new(c, 0.0))
}

/// Sum of coefficient magnitudes weighted by |s|^k; the scale against which
/// a "numerically zero" value is judged.
pub fn eval_scale(p: &[f64], s_abs: f64) -> f64 {
    let mut w = 1.0;
    let mut acc = 0.0;
    for c in p {
        acc += c.abs() * w;
        w *= s_abs;
    }
    acc
}

/// All complex roots of `p`.
///
/// Exact zeros at the origin are split off first; the remaining polynomial
/// is rescaled so its roots have unit geometric mean, solved through the
/// companion matrix and then polished with Newton steps on the original
/// coefficients.
pub fn roots(p: &[f64]) -> Vec<Complex64> {
    let p = trim(p);
    let mut out = Vec::new();
    let lead_zeros = p.iter().take_while(|c| **c == 0.0).count();
    if lead_zeros == p.len() {
        return out;
    }
    out.extend(core::iter::repeat_n(Complex64::zero(), lead_zeros));
    let q = &p[lead_zeros..];
    let n = q.len() - 1;
    if n == 0 {
        return out;
    }
    let w = (q[0].abs() / q[n].abs()).powf(1.0 / n as f64);
    // Coefficients of q(w·σ) normalized to monic.
    let scaled: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(k, c)| c * w.powi(k as i32))
        .collect();
    let lead = scaled[n];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        companion[(i, n - 1)] = -scaled[i] / lead;
    }
    let eig = companion.complex_eigenvalues();
    for z in eig.iter() {
        let r = polish(q, *z * w);
        out.push(r);
    }
    // Enforce exact conjugate symmetry for nearly-real polynomials.
    for r in out.iter_mut() {
        if r.im.abs() <= 1e-12 * r.norm().max(1e-300) {
            r.im = 0.0;
        }
    }
    out
}

fn polish(p: &[f64], mut z: Complex64) -> Complex64 {
    let dp: Vec<f64> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    let mut best = eval(p, z).norm();
    for _ in 0..8 {
        let d = eval(&dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - eval(p, z) / d;
        let val = eval(p, cand).norm();
        if !(val < best) {
            break;
        }
        best = val;
        z = cand;
    }
    z
}

/// Polynomial with the given roots and unit value at `s = 0`; roots at the
/// origin contribute a plain factor `s`. Conjugate pairs are assumed
/// complete, so the result is real.
pub fn from_roots_dc_normalized(roots: &[Complex64]) -> Vec<f64> {
    let mut acc = vec![1.0];
    let mut i = 0;
    let sorted = sort_conjugates(roots);
    while i < sorted.len() {
        let r = sorted[i];
        if r.norm() == 0.0 {
            acc = mul(&acc, &[0.0, 1.0]);
            i += 1;
        } else if r.im == 0.0 {
            acc = mul(&acc, &[1.0, -1.0 / r.re]);
            i += 1;
        } else {
            let m2 = r.norm_sqr();
            acc = mul(&acc, &[1.0, -2.0 * r.re / m2, 1.0 / m2]);
            i += 2;
        }
    }
    acc
}

/// Orders roots so each complex root with positive imaginary part is
/// directly followed by its partner.
fn sort_conjugates(roots: &[Complex64]) -> Vec<Complex64> {
    let mut reals: Vec<Complex64> = roots.iter().copied().filter(|r| r.im == 0.0).collect();
    let mut upper: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > 0.0).collect();
    reals.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(core::cmp::Ordering::Equal));
    upper.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(core::cmp::Ordering::Equal));
    let mut out = reals;
    for u in upper {
        out.push(u);
        out.push(u.conj());
    }
    out
}
