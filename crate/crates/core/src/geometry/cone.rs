use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::gaussian::standard_normal_vec;

/// Tangent cone of the ℓ1 norm at a point `θ`,
/// `C = {h : Σ_{i∈S} sign(θ_i) h_i + Σ_{i∉S} |h_i| ≤ 0}` with `S = supp(θ)`.
///
/// Its polar is the cone generated by `∂‖θ‖₁`, so projections onto `C`
/// follow from the Moreau decomposition `z = P_C(z) + P_{C°}(z)` and
/// `‖P_C(z)‖ = dist(z, C°) = min_{λ≥0} dist(z, λ∂‖θ‖₁)`.
#[derive(Clone, Debug)]
pub struct L1TangentCone {
    dim: usize,
    support: Vec<usize>,
    signs: Vec<f64>,
    off_support: Vec<usize>,
}

impl L1TangentCone {
    pub fn at(theta: ArrayView1<f64>) -> Self {
        let mut support = Vec::new();
        let mut signs = Vec::new();
        let mut off_support = Vec::new();
        for (i, &v) in theta.iter().enumerate() {
            if v != 0.0 {
                support.push(i);
                signs.push(v.signum());
            } else {
                off_support.push(i);
            }
        }
        L1TangentCone {
            dim: theta.len(),
            support,
            signs,
            off_support,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Optimal scale `λ*` of the subdifferential in `min_λ dist(z, λ∂‖θ‖₁)`.
    ///
    /// The objective is a convex piecewise quadratic whose derivative
    /// `|S|λ − Σ_S s_i z_i − Σ_{i∉S} (|z_i| − λ)₊` is solved exactly over
    /// the breakpoints `|z_i|`.
    pub fn polar_scale(&self, z: ArrayView1<f64>) -> f64 {
        let mut mags: Vec<f64> = self.off_support.iter().map(|&i| z[i].abs()).collect();
        mags.sort_unstable_by(|a, b| b.total_cmp(a));
        if self.support.is_empty() {
            return mags.first().copied().unwrap_or(0.0);
        }
        let aligned: f64 = self.support.iter().zip(&self.signs).map(|(&i, s)| s * z[i]).sum();
        let s = self.support.len() as f64;
        let mut partial = 0.0;
        for k in 0..=mags.len() {
            let lambda = (aligned + partial) / (s + k as f64);
            let next = mags.get(k).copied().unwrap_or(f64::NEG_INFINITY);
            if lambda >= next {
                return lambda.max(0.0);
            }
            partial += mags[k];
        }
        unreachable!("derivative is increasing and eventually positive")
    }

    /// Projection of `z` onto the polar cone `C°`.
    pub fn project_polar(&self, z: ArrayView1<f64>) -> Array1<f64> {
        let lambda = self.polar_scale(z);
        let mut q = Array1::zeros(self.dim);
        for (&i, s) in self.support.iter().zip(&self.signs) {
            q[i] = lambda * s;
        }
        for &i in &self.off_support {
            q[i] = z[i].clamp(-lambda, lambda);
        }
        q
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, z: ArrayView1<f64>) -> Array1<f64> {
        &z - &self.project_polar(z)
    }

    /// `‖P_C(z)‖`, equal to `sup_{u ∈ C, ‖u‖ ≤ 1} ⟨u, z⟩`.
    pub fn projection_norm(&self, z: ArrayView1<f64>) -> f64 {
        let h = self.project(z);
        h.dot(&h).sqrt()
    }

    /// Membership test with slack `tol·‖h‖`.
    pub fn contains(&self, h: ArrayView1<f64>, tol: f64) -> bool {
        let aligned: f64 = self.support.iter().zip(&self.signs).map(|(&i, s)| s * h[i]).sum();
        let off: f64 = self.off_support.iter().map(|&i| h[i].abs()).sum();
        aligned + off <= tol * h.dot(&h).sqrt()
    }

    /// Unit vectors in the cone, mixing three families: projected
    /// Gaussians, sparse sign-consistent directions, and convex
    /// combinations of earlier draws.
    pub fn sample_directions<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Array1<f64>> {
        let mut out: Vec<Array1<f64>> = Vec::with_capacity(count);
        while out.len() < count {
            let candidate = match out.len() % 3 {
                0 => self.project(Array1::from(standard_normal_vec(self.dim, rng)).view()),
                1 => self.sparse_direction(rng),
                _ => {
                    let a = &out[rng.random_range(0..out.len())];
                    let b = &out[rng.random_range(0..out.len())];
                    let w: f64 = rng.random();
                    a * w + b * (1.0 - w)
                }
            };
            let norm = candidate.dot(&candidate).sqrt();
            if norm > 1e-12 {
                out.push(candidate / norm);
            }
        }
        out
    }

    fn sparse_direction<R: Rng + ?Sized>(&self, rng: &mut R) -> Array1<f64> {
        let mut h = Array1::zeros(self.dim);
        if self.support.is_empty() {
            return h;
        }
        let max_k = self.support.len().min(self.off_support.len());
        let k = rng.random_range(0..=max_k);
        let mut off_mass = 0.0;
        for _ in 0..k {
            let i = self.off_support[rng.random_range(0..self.off_support.len())];
            let g: f64 = StandardNormal.sample(rng);
            off_mass -= h[i].abs();
            h[i] = g;
            off_mass += g.abs();
        }
        // Aligned part pays for the off-support mass with some slack.
        let weights: Vec<f64> = (0..self.support.len()).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let budget = off_mass * (1.0 + rng.random::<f64>()) + rng.random::<f64>();
        // Component orthogonal to the sign vector leaves the constraint unchanged.
        let free: Vec<f64> = standard_normal_vec(self.support.len(), rng);
        let along: f64 = free.iter().zip(&self.signs).map(|(f, s)| f * s).sum::<f64>() / self.support.len() as f64;
        for (j, (&i, s)) in self.support.iter().zip(&self.signs).enumerate() {
            h[i] = -s * budget * weights[j] / total + (free[j] - along * s);
        }
        h
    }
}
