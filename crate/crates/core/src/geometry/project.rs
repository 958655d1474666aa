use ndarray::{Array1, ArrayView1};

/// Euclidean projection onto `{x : ‖x‖₁ ≤ radius}`.
///
/// Sort-based thresholding, `O(p log p)`. Vectors already inside the
/// ball are returned unchanged.
pub fn project_l1_ball(v: ArrayView1<f64>, radius: f64) -> Array1<f64> {
    let radius = radius.max(0.0);
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_owned();
    }
    if radius == 0.0 {
        return Array1::zeros(v.len());
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumulative += m;
        let candidate = (cumulative - radius) / (j + 1) as f64;
        if m > candidate {
            threshold = candidate;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - threshold).max(0.0))
}

/// Hard thresholding: keep the `s` largest-magnitude entries.
///
/// This is the Euclidean projection onto the `s`-sparse vectors. Ties
/// in magnitude go to the lower index.
pub fn project_sparse(v: ArrayView1<f64>, s: usize) -> Array1<f64> {
    if s >= v.len() {
        return v.to_owned();
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    // stable: equal magnitudes keep ascending index order
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    let mut out = Array1::zeros(v.len());
    for &i in &order[..s] {
        out[i] = v[i];
    }
    out
}

pub fn project_l2_ball(v: ArrayView1<f64>, radius: f64) -> Array1<f64> {
    let radius = radius.max(0.0);
    let norm = v.dot(&v).sqrt();
    if norm <= radius {
        v.to_owned()
    } else {
        v.mapv(|x| x * radius / norm)
    }
}

/// Soft thresholding, the prox of `lam·‖·‖₁`.
pub fn prox_l1(v: ArrayView1<f64>, lam: f64) -> Array1<f64> {
    let lam = lam.max(0.0);
    v.mapv(|x| x.signum() * (x.abs() - lam).max(0.0))
}
