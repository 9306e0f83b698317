//! Shared numerical kernels: deterministic summation, quadrature and small fits.
//!
//! Every quadrature in the crate funnels through [`pairwise_sum`] so that a
//! result never depends on thread schedule: parallel code always collects
//! terms in lattice order first and reduces them here.

/// Pairwise (cascade) summation over a slice, fixed order.
///
/// Error grows like O(log n) in the term count instead of O(n) for the naive
/// running sum, and the result is a pure function of the slice contents.
pub fn pairwise_sum(terms: &[f64]) -> f64 {
    const LINEAR_CUTOFF: usize = 32;
    if terms.len() <= LINEAR_CUTOFF {
        let mut acc = 0.0;
        for &t in terms {
            acc += t;
        }
        return acc;
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}

/// Pairwise summation of an indexed term generator without materialising
/// the whole slice. `f(i)` must be pure.
pub fn pairwise_sum_by<F: Fn(usize) -> f64>(len: usize, f: &F) -> f64 {
    const LINEAR_CUTOFF: usize = 32;
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, f: &F) -> f64 {
        if hi - lo <= LINEAR_CUTOFF {
            let mut acc = 0.0;
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    if len == 0 {
        return 0.0;
    }
    rec(0, len, f)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence. Good to machine precision for n up to a few hundred.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_n'(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integral of `v` over the Euclidean ball B(center, r) in R^3 by a spherical
/// product rule: Gauss-Legendre in the radius and in cos(theta), uniform in
/// phi. Exact for smooth integrands well below the node counts.
pub fn ball_integral_3d<F: Fn(&[f64; 3]) -> f64>(
    v: &F,
    center: &[f64; 3],
    r: f64,
    radial_nodes: usize,
    theta_nodes: usize,
    phi_nodes: usize,
) -> f64 {
    let (sn, sw) = gauss_legendre(radial_nodes);
    let (un, uw) = gauss_legendre(theta_nodes);
    let dphi = 2.0 * std::f64::consts::PI / phi_nodes as f64;
    let mut terms = Vec::with_capacity(radial_nodes * theta_nodes * phi_nodes);
    for (si, &sx) in sn.iter().enumerate() {
        let s = 0.5 * r * (sx + 1.0); // radius in [0, r]
        let ws = 0.5 * r * sw[si] * s * s;
        for (ui, &u) in un.iter().enumerate() {
            let sint = (1.0 - u * u).max(0.0).sqrt();
            let wu = uw[ui];
            for pk in 0..phi_nodes {
                let phi = dphi * (pk as f64 + 0.5);
                let p = [
                    center[0] + s * sint * phi.cos(),
                    center[1] + s * sint * phi.sin(),
                    center[2] + s * u,
                ];
                terms.push(ws * wu * dphi * v(&p));
            }
        }
    }
    pairwise_sum(&terms)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = pairwise_sum(&lx) / n;
    let my = pairwise_sum(&ly) / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..xs.len() {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Bisection for the smallest root of `g(r) = 0` given a bracket with
/// g(lo) < 0 < g(hi). Stops when the bracket is below `xtol` or |g| below
/// `gtol` at the midpoint.
pub fn bisect<F: Fn(f64) -> f64>(g: &F, mut lo: f64, mut hi: f64, xtol: f64, gtol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() <= gtol || (hi - lo) <= xtol {
            return mid;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
