//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

/// Euclidean projection onto `{x : ‖x‖₁ ≤ r}` by enumerating faces.
///
/// Every face of the ball is `{x : x_i = 0 off S, Σ_S σ_i x_i = r,
/// σ_i x_i ≥ 0}` for a support `S` and signs `σ`. The projection onto the
/// affine hull of a face is closed form; keeping the feasible candidates and
/// taking the nearest one gives the exact projection.
pub fn brute_l1_projection(v: &[f64], r: f64) -> Vec<f64> {
    if v.iter().map(|x| x.abs()).sum::<f64>() <= r {
        return v.to_vec();
    }
    let p = v.len();
    let mut best = vec![0.0; p];
    let mut best_dist = f64::INFINITY;
    for mask in 1u32..(1 << p) {
        let support: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        for signs in 0u32..(1 << support.len()) {
            let sigma: Vec<f64> = (0..support.len())
                .map(|j| if signs & (1 << j) != 0 { -1.0 } else { 1.0 })
                .collect();
            let excess: f64 = support.iter().zip(&sigma).map(|(&i, s)| s * v[i]).sum::<f64>() - r;
            let shift = excess / support.len() as f64;
            let mut x = vec![0.0; p];
            let mut feasible = true;
            for (&i, s) in support.iter().zip(&sigma) {
                x[i] = v[i] - s * shift;
                if s * x[i] < -1e-14 {
                    feasible = false;
                }
            }
            if !feasible {
                continue;
            }
            let d: f64 = x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
            if d < best_dist {
                best_dist = d;
                best = x;
            }
        }
    }
    best
}

/// Projection onto `s`-sparse vectors by trying every support of size `s`.
pub fn brute_sparse_projection(v: &[f64], s: usize) -> Vec<f64> {
    let p = v.len();
    let s = s.min(p);
    let mut best = vec![0.0; p];
    let mut best_dist = f64::INFINITY;
    for mask in 0u32..(1 << p) {
        if mask.count_ones() as usize != s {
            continue;
        }
        let dropped: f64 = (0..p).filter(|i| mask & (1 << i) == 0).map(|i| v[i] * v[i]).sum();
        if dropped < best_dist {
            best_dist = dropped;
            best = (0..p).map(|i| if mask & (1 << i) != 0 { v[i] } else { 0.0 }).collect();
        }
    }
    best
}

/// Projection onto the tangent cone of the ℓ1 norm at `theta` by Dykstra's
/// alternating projections over its `2^{p−|S|}` defining half-spaces
/// `⟨a_σ, h⟩ ≤ 0`, `a_σ = sign(θ)` on the support and `σ` off it.
pub fn dykstra_l1_cone(theta: &[f64], z: &[f64], cycles: usize) -> Vec<f64> {
    let p = z.len();
    let off: Vec<usize> = (0..p).filter(|&i| theta[i] == 0.0).collect();
    let normals: Vec<Vec<f64>> = (0u32..(1 << off.len()))
        .map(|bits| {
            let mut a: Vec<f64> = theta.iter().map(|t| if *t == 0.0 { 0.0 } else { t.signum() }).collect();
            for (j, &i) in off.iter().enumerate() {
                a[i] = if bits & (1 << j) != 0 { -1.0 } else { 1.0 };
            }
            a
        })
        .collect();
    let mut x = z.to_vec();
    let mut corrections = vec![vec![0.0; p]; normals.len()];
    for _ in 0..cycles {
        for (a, c) in normals.iter().zip(corrections.iter_mut()) {
            let y: Vec<f64> = x.iter().zip(c.iter()).map(|(xi, ci)| xi + ci).collect();
            let dot: f64 = a.iter().zip(&y).map(|(ai, yi)| ai * yi).sum();
            let norm_sq: f64 = a.iter().map(|ai| ai * ai).sum();
            let scale = dot.max(0.0) / norm_sq;
            let next: Vec<f64> = y.iter().zip(a).map(|(yi, ai)| yi - scale * ai).collect();
            for i in 0..p {
                c[i] = y[i] - next[i];
            }
            x = next;
        }
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
