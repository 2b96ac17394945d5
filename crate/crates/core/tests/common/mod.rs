//! Test oracles that do not go through the library's linear algebra or sheaf code.
#![allow(dead_code)]

use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::Rng;

/// Rank by Gaussian elimination over Q, or over F_p when `p > 0`.
pub fn rank(mut m: Vec<Vec<i64>>, p: i64) -> usize {
    if p > 0 {
        for row in &mut m {
            for x in row.iter_mut() {
                *x = x.rem_euclid(p);
            }
        }
        let inv = |a: i64| (1..p).find(|b| a * b % p == 1).expect("unit");
        let (mut r, cols) = (0, m.first().map_or(0, Vec::len));
        for c in 0..cols {
            let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, piv);
            let s = inv(m[r][c]);
            for i in 0..m.len() {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c] * s % p;
                    for j in 0..cols {
                        m[i][j] = (m[i][j] - f * m[r][j]).rem_euclid(p);
                    }
                }
            }
            r += 1;
        }
        return r;
    }
    let mut q: Vec<Vec<Rational64>> = m.into_iter().map(|row| row.into_iter().map(Rational64::from).collect()).collect();
    let (mut r, cols) = (0, q.first().map_or(0, Vec::len));
    for c in 0..cols {
        let Some(piv) = (r..q.len()).find(|&i| !q[i][c].is_zero()) else { continue };
        q.swap(r, piv);
        let s = Rational64::one() / q[r][c];
        for i in 0..q.len() {
            if i != r && !q[i][c].is_zero() {
                let f = q[i][c] * s;
                for j in 0..cols {
                    let v = q[r][j];
                    q[i][j] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Simplicial cohomology of a complex given by its simplices (sorted vertex lists),
/// with trailing zeros dropped. `p = 0` means Q.
pub fn simplicial_cohomology(simplices: &[Vec<usize>], p: i64) -> Vec<usize> {
    let top = simplices.iter().map(|s| s.len() - 1).max().unwrap_or(0);
    let by_dim: Vec<Vec<&Vec<usize>>> = (0..=top).map(|k| simplices.iter().filter(|s| s.len() == k + 1).collect()).collect();
    // δ_k : C^k -> C^{k+1}, (δf)(τ) = Σ_i (-1)^i f(τ without vertex i).
    let delta = |k: usize| -> Vec<Vec<i64>> {
        by_dim[k + 1]
            .iter()
            .map(|t| {
                by_dim[k]
                    .iter()
                    .map(|s| {
                        (0..t.len())
                            .find(|&i| {
                                let mut f = (*t).clone();
                                f.remove(i);
                                &f == *s
                            })
                            .map_or(0, |i| if i % 2 == 0 { 1 } else { -1 })
                    })
                    .collect()
            })
            .collect()
    };
    let ranks: Vec<usize> = (0..top).map(|k| rank(delta(k), p)).collect();
    let mut h: Vec<usize> = (0..=top)
        .map(|k| {
            let out = if k < top { ranks[k] } else { 0 };
            let inc = if k > 0 { ranks[k - 1] } else { 0 };
            by_dim[k].len() - out - inc
        })
        .collect();
    while h.len() > 1 && h.last() == Some(&0) {
        h.pop();
    }
    h
}

/// A random order-preserving map between posets given by `leq` tables, built by
/// rejection from uniformly random assignments; falls back to a constant map.
pub fn random_monotone<R: Rng>(rng: &mut R, src_leq: &dyn Fn(usize, usize) -> bool, n: usize, tgt_leq: &dyn Fn(usize, usize) -> bool, m: usize) -> Vec<usize> {
    for _ in 0..200 {
        let f: Vec<usize> = (0..n).map(|_| rng.gen_range(0..m)).collect();
        if (0..n).all(|a| (0..n).all(|b| !src_leq(a, b) || tgt_leq(f[a], f[b]))) {
            return f;
        }
    }
    vec![0; n]
}
