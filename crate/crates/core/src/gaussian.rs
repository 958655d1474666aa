//! Seeded randomness, Gaussian designs and the Gamma-ratio constant `b_n`.
//!
//! `b_n = E‖g‖₂` for `g ~ N(0, I_n)` equals `√2·Γ((n+1)/2)/Γ(n/2)`. It sets
//! the step size `1/b_n²` of every solver and, through its inverse, the
//! minimal sample counts. Evaluating the ratio naively overflows for
//! `n ≳ 340`, and differencing two `lnΓ` values loses about `log10(n)`
//! digits, so the ratio is computed from an asymptotic series after
//! shifting the argument upward with the functional equation.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seed of a ChaCha8 stream. The same seed yields the same stream on
/// every platform; [`RngSeed::stream`] derives independent sub-streams
/// so parallel trials do not depend on scheduling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Generator for sub-stream `id` of this seed.
    pub fn stream(self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(id);
        rng
    }

    /// A new seed derived from this one and `salt`, for handing whole
    /// seeds to nested components.
    pub fn derive(self, salt: u64) -> RngSeed {
        // splitmix64 finalizer
        let mut z = self.0 ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

impl From<u64> for RngSeed {
    fn from(seed: u64) -> Self {
        RngSeed(seed)
    }
}

/// An `n × p` feature matrix whose rows are the feature vectors `x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix(Array2<f64>);

impl DesignMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Domain(format!(
                "design matrix must be non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(DesignMatrix(entries))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// Draw an `n × p` matrix of i.i.d. standard normals.
pub fn sample_design(n: usize, p: usize, seed: RngSeed) -> Result<DesignMatrix> {
    sample_design_with(n, p, &mut seed.rng())
}

/// Same as [`sample_design`] but drawing from a caller-owned generator.
pub fn sample_design_with<R: rand::Rng + ?Sized>(
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<DesignMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::Domain(format!("design needs n, p >= 1, got n={n}, p={p}")));
    }
    let len = n
        .checked_mul(p)
        .ok_or_else(|| Error::Resource(format!("{n}x{p} design overflows usize")))?;
    let mut entries: Vec<f64> = Vec::new();
    entries
        .try_reserve_exact(len)
        .map_err(|e| Error::Resource(format!("cannot allocate {n}x{p} design: {e}")))?;
    entries.extend((0..len).map(|_| -> f64 { StandardNormal.sample(rng) }));
    let entries = Array2::from_shape_vec((n, p), entries).expect("length matches shape");
    Ok(DesignMatrix(entries))
}

/// Fill a vector with i.i.d. standard normals.
pub fn standard_normal_vec<R: rand::Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| -> f64 { StandardNormal.sample(rng) }).collect()
}

// Coefficients of ln(Γ(x+½)/Γ(x)) − ½·ln x in powers 1/x, 1/x³, ..., 1/x⁹.
const RATIO_SERIES: [f64; 5] = [
    -1.0 / 8.0,
    1.0 / 192.0,
    -1.0 / 640.0,
    17.0 / 14336.0,
    -31.0 / 18432.0,
];

// Below this argument the series is not accurate to full precision.
const SERIES_FLOOR: f64 = 20.0;

/// `ln(Γ(x+½)/Γ(x))` for real `x > 0`.
fn ln_half_ratio(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut log_prefactor = 0.0;
    // Γ(x+½)/Γ(x) = Γ(x+1+½)/Γ(x+1) · x/(x+½)
    while x + shift < SERIES_FLOOR {
        let y = x + shift;
        log_prefactor += (y / (y + 0.5)).ln();
        shift += 1.0;
    }
    let y = x + shift;
    let inv = 1.0 / y;
    let inv_sq = inv * inv;
    let mut term = inv;
    let mut tail = 0.0;
    for c in RATIO_SERIES {
        tail += c * term;
        term *= inv_sq;
    }
    log_prefactor + 0.5 * y.ln() + tail
}

/// `φ(t) = √2·Γ((t+1)/2)/Γ(t/2)` for real `t > 0`; equals `b_t` at integers.
pub fn phi(t: f64) -> f64 {
    std::f64::consts::SQRT_2 * ln_half_ratio(0.5 * t).exp()
}

/// `b_n = E‖g‖₂` for an `n`-dimensional standard Gaussian.
pub fn gamma_mean_norm(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("b_n is undefined for n = 0".into()));
    }
    Ok(phi(n as f64))
}

/// Inverse of [`phi`] on `(0, ∞)`.
///
/// The result is a real number; sample-count callers round it up
/// themselves. For `x ≥ b_1 = √(2/π)` the result is at least one.
pub fn phi_inverse(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("phi_inverse needs a finite x > 0, got {x}")));
    }
    // φ(t) ~ √(t − ½), so x² + ½ starts us close; bracket then bisect in
    // log-space and finish with Newton on ln φ.
    let target = x.ln();
    let f = |t: f64| phi(t).ln() - target;
    let guess = x * x + 0.5;
    let mut lo = guess * 0.5;
    while f(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(lo);
        }
    }
    let mut hi = guess * 2.0 + 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo) <= 1e-6 * hi {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..20 {
        let h = 1e-6 * t.max(1e-6);
        let slope = (f(t + h) - f(t - h)) / (2.0 * h);
        if slope <= 0.0 || !slope.is_finite() {
            break;
        }
        let next = (t - f(t) / slope).clamp(lo, hi);
        let done = (next - t).abs() <= 1e-15 * t;
        t = next;
        if done {
            break;
        }
    }
    Ok(t)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}
