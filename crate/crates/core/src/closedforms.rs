//! Closed forms that bypass the optimizer: unitary channel pairs reduce to
//! plane geometry on the spectrum of W = U^dag V, Gaussian displacement noise
//! to an arithmetic-geometric mean ratio, random-unitary mixtures to a
//! Bhattacharyya sum, and first-order Lindblad dynamics to a ground-state
//! variance problem.

use num_complex::Complex64;

use crate::channels::{ChannelKind, KrausChannel, UNITAL_TOL};
use crate::error::{Error, Result};
use crate::linalg::{
    complex_eigenvalues, hermitian_eig, inner, operator_norm, ComplexMatrix,
};
use crate::optimize::{minimize_over_pure_states, OptConfig};

/// Spectrum of W = U^dag V together with its convex hull and the Euclidean
/// distance from the hull to the origin. For unitary inputs every eigenvalue
/// sits on the unit circle, so the hull is a polygon inscribed in it and the
/// origin distance lies in [0, 1].
#[derive(Clone, Debug)]
pub struct SpectrumHull {
    /// Eigenvalues of W, unordered.
    pub eigenvalues: Vec<Complex64>,
    /// Hull vertices (re, im) in counterclockwise order; collinear and
    /// duplicate spectrum points are dropped.
    pub hull_vertices: Vec<(f64, f64)>,
    /// Distance from the origin to the hull; 0 when the hull contains it.
    pub origin_distance: f64,
}

fn require_unitary(u: &ComplexMatrix) -> Result<()> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be square, got {} x {}",
            u.rows(),
            u.cols()
        )));
    }
    let dev = (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.cols())).frobenius_norm();
    if dev > UNITAL_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

/// Signed area of the triangle (o, a, b); positive for a left turn.
fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Andrew's monotone chain. Returns the hull counterclockwise; strict turn
/// tests drop collinear points, so segments and single points come back as
/// 2- and 1-element lists.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Distance from the origin to the segment [a, b].
fn segment_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = b.0 - a.0;
    let dy = b.1 - a.1;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return a.0.hypot(a.1);
    }
    let t = (-(a.0 * dx + a.1 * dy) / len2).clamp(0.0, 1.0);
    (a.0 + t * dx).hypot(a.1 + t * dy)
}

/// Distance from the origin to a convex polygon given counterclockwise;
/// 0 when the polygon contains the origin.
fn origin_distance(hull: &[(f64, f64)]) -> f64 {
    match hull.len() {
        0 => 0.0,
        1 => hull[0].0.hypot(hull[0].1),
        2 => segment_distance(hull[0], hull[1]),
        _ => {
            let inside = (0..hull.len()).all(|i| {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                cross(a, b, (0.0, 0.0)) >= 0.0
            });
            if inside {
                return 0.0;
            }
            (0..hull.len())
                .map(|i| segment_distance(hull[i], hull[(i + 1) % hull.len()]))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Minimax fidelity between the unitary channels of U and V: the distance
/// from the origin to the convex hull of the spectrum of W = U^dag V. Equals
/// 1 exactly when W is a phase times the identity (the hull degenerates to a
/// single point on the circle) and 0 when the hull straddles the origin.
pub fn unitary_minimax_fidelity(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<(f64, SpectrumHull)> {
    require_unitary(u)?;
    require_unitary(v)?;
    if u.rows() != v.rows() {
        return Err(Error::DimensionMismatch(format!(
            "unitaries act on different spaces: {} vs {}",
            u.rows(),
            v.rows()
        )));
    }
    let w = &u.adjoint() * v;
    let eigenvalues = complex_eigenvalues(&w)?;
    let circle_dev = eigenvalues
        .iter()
        .fold(0.0f64, |m, z| m.max((z.norm() - 1.0).abs()));
    if circle_dev > 1e-8 {
        return Err(Error::NotUnitary {
            deviation: circle_dev,
        });
    }
    let hull_vertices = convex_hull(eigenvalues.iter().map(|z| (z.re, z.im)).collect());
    let dist = origin_distance(&hull_vertices).min(1.0);
    Ok((
        dist,
        SpectrumHull {
            eigenvalues,
            hull_vertices,
            origin_distance: dist,
        },
    ))
}

/// CB-norm distance between unitary channels: sqrt(1 - d^2) with d the hull
/// distance of `unitary_minimax_fidelity`.
pub fn unitary_cb_distance(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    let (d, _) = unitary_minimax_fidelity(u, v)?;
    Ok((1.0 - d * d).max(0.0).sqrt())
}

/// Minimax fidelity between two Gaussian displacement-noise channels with
/// noise parameters mu and nu: sqrt(mu nu) / ((mu + nu) / 2). Lies in (0, 1]
/// and equals 1 exactly at mu = nu.
pub fn gaussian_noise_fidelity(mu: f64, nu: f64) -> Result<f64> {
    if !(mu > 0.0) || !(nu > 0.0) {
        return Err(Error::NonPositiveParameter(format!(
            "noise parameters must be positive, got mu = {mu}, nu = {nu}"
        )));
    }
    Ok((mu * nu).sqrt() / (0.5 * (mu + nu)))
}

fn require_probability_vector(p: &[f64], name: &str) -> Result<()> {
    if let Some(&w) = p.iter().find(|&&w| !(w >= 0.0)) {
        return Err(Error::BadWeights(format!("{name} has entry {w}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::BadWeights(format!("{name} sums to {total}")));
    }
    Ok(())
}

/// Lower bound on the minimax fidelity between the random-unitary channels
/// mixing one unitary family with weights p and q: the Bhattacharyya
/// coefficient sum_i sqrt(p_i q_i). Attained with equality when the mixed
/// unitaries are pairwise orthogonal in the Hilbert-Schmidt inner product.
pub fn random_unitary_fidelity_bound(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::BadWeights(format!(
            "weight vectors of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    require_probability_vector(p, "p")?;
    require_probability_vector(q, "q")?;
    Ok(p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum())
}

fn epsilon_margin(x: &ComplexMatrix, eps: f64) -> Result<f64> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Lindblad operator must be square, got {} x {}",
            x.rows(),
            x.cols()
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::NonPositiveParameter(format!(
            "step must be positive, got eps = {eps}"
        )));
    }
    let top = operator_norm(x);
    let margin = 1.0 - 0.5 * eps * top * top;
    if margin <= 0.0 {
        return Err(Error::EpsilonTooLarge { margin });
    }
    Ok(margin)
}

/// Two-Kraus channel for one first-order step of the dissipative semigroup
/// generated by X: { 1 - (eps/2) X^dag X, sqrt(eps) X }, renormalized by
/// T^{-1/2} with T = 1 + (eps^2/4)(X^dag X)^2 so the result is exactly trace
/// preserving. The renormalization perturbs the step only at order eps^2.
pub fn lindblad_channel(x: &ComplexMatrix, eps: f64) -> Result<KrausChannel> {
    epsilon_margin(x, eps)?;
    let n = x.rows();
    let xdx = &x.adjoint() * x;
    let k0 = &ComplexMatrix::identity(n) - &xdx.scale_re(0.5 * eps);
    let k1 = x.scale_re(eps.sqrt());
    let t = &(&k0.adjoint() * &k0) + &(&k1.adjoint() * &k1);
    let renorm = hermitian_eig(&t.hermitize())?.assemble(|l| 1.0 / l.sqrt());
    KrausChannel::new(vec![&k0 * &renorm, &k1 * &renorm], ChannelKind::Channel)
}

/// Predicted minimax fidelity sqrt(1 - eps C) between one first-order
/// Lindblad step and the identity, where C is the infimum over pure states of
/// the variance <X^dag X> - |<X>|^2. Returns (predicted, C). In finite
/// dimension X always has an eigenvector, so C = 0 up to optimizer tolerance
/// and the prediction degenerates to 1; the interesting check is how fast the
/// measured fidelity of `lindblad_channel` approaches it as eps shrinks.
pub fn lindblad_infinitesimal_fidelity(
    x: &ComplexMatrix,
    eps: f64,
    cfg: &OptConfig,
) -> Result<(f64, f64)> {
    epsilon_margin(x, eps)?;
    let n = x.rows();
    let xc = x.clone();
    let objective = move |psi: &[Complex64]| {
        let xv = xc.mul_vec(psi);
        let second: f64 = xv.iter().map(|z| z.norm_sqr()).sum();
        second - inner(psi, &xv).norm_sqr()
    };
    let opt = minimize_over_pure_states(objective, n, cfg)?;
    if !opt.converged {
        return Err(Error::NoConvergence {
            iterations: opt.iterations,
            best: opt.value,
        });
    }
    let c = opt.value.max(0.0);
    Ok(((1.0 - eps * c).max(0.0).sqrt(), c))
}
