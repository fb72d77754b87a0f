//! State- and channel-level fidelities and distances: Uhlmann fidelity and
//! trace distance for density operators, the entangled (Choi-state) channel
//! fidelity, the pointwise and global minimax fidelity computed by three
//! independent routes, the CB-norm distance, and the Hellinger forms for
//! channel effects.
//!
//! The pointwise fidelity at an input state rho is
//!
//!   Tr ( Phi_tau^{1/2} (rho^T x 1) Psi_tau (rho^T x 1) Phi_tau^{1/2} )^{1/2}
//!
//! with the transpose on rho fixed by the purification cross-check: for a
//! unit vector upsilon on g x g with reduced input state rho_upsilon, this
//! expression equals the Uhlmann fidelity of the two channel outputs on
//! |upsilon><upsilon|. All three minimax routes agree pointwise through that
//! identity; they differ only in how the extremum is searched.

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::{ChannelKind, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, psd_sqrt, svd_factors, trace_norm, trace_sqrt_product, ComplexMatrix,
    DensityOperator, HERM_TOL,
};
use crate::optimize::{
    maximize_over_pure_states, minimize_over_pure_states, OptConfig, OptResult,
};

/// Which formulation of the minimax extremum to search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Minimize the pointwise operational-density formula at the reduced
    /// state of a purification vector on g x g.
    Density,
    /// Minimize the output fidelity of Phi x id, Psi x id over unit vectors
    /// on the doubled space g x g.
    Purification,
    /// Minimize the trace norm of the Kraus overlap matrix Tr_h(F rho V^dag)
    /// over unit vectors on g x g.
    Stinespring,
    /// Minimize the outcome-overlap functional of a POVM pair over pure
    /// states on g itself (measurement channels need no doubled space).
    Measurement,
}

/// Search telemetry attached to an extremal value.
#[derive(Clone, Debug, Serialize)]
pub struct Diagnostics {
    pub restarts: usize,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// Best value of each restart; the spread exposes rough landscapes.
    pub per_restart_values: Vec<f64>,
}

/// Result of a minimax fidelity or CB-distance search.
#[derive(Clone, Debug)]
pub struct MinimaxResult {
    pub value: f64,
    /// Unit vector achieving the extremum, on the space the route searches.
    pub minimizer: Vec<Complex64>,
    pub route: Route,
    pub diagnostics: Diagnostics,
}

pub(crate) fn finish(opt: OptResult, route: Route, restarts: usize) -> Result<MinimaxResult> {
    if !opt.converged {
        return Err(Error::NoConvergence {
            iterations: opt.iterations,
            best: opt.value,
        });
    }
    Ok(MinimaxResult {
        value: opt.value,
        minimizer: opt.argmin,
        route,
        diagnostics: Diagnostics {
            restarts,
            iterations: opt.iterations,
            final_grad_norm: opt.final_grad_norm,
            per_restart_values: opt.per_restart_values,
        },
    })
}

/// Uhlmann fidelity F(rho, sigma) = Tr (rho^{1/2} sigma rho^{1/2})^{1/2}.
pub fn state_fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    trace_sqrt_product(rho.matrix(), sigma.matrix())
}

/// Trace-norm distance D(rho, sigma) = ||rho - sigma||_1 / 2.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance expects equal dimensions, got {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

/// Bures-type distance sqrt(1 - F(rho, sigma)).
pub fn bures_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    let f = state_fidelity(rho, sigma)?;
    hellinger_channel_distance(f.min(1.0))
}

/// sqrt(1 - f) for a fidelity value already in hand.
pub fn hellinger_channel_distance(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange(format!(
            "fidelity {f} outside [0, 1]"
        )));
    }
    Ok((1.0 - f).sqrt())
}

fn require_same_dims(phi: &KrausChannel, psi: &KrausChannel) -> Result<()> {
    if phi.dim_in() != psi.dim_in() || phi.dim_out() != psi.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "channels act {} -> {} and {} -> {}",
            phi.dim_in(),
            phi.dim_out(),
            psi.dim_in(),
            psi.dim_out()
        )));
    }
    Ok(())
}

fn require_channel(ch: &KrausChannel) -> Result<()> {
    if ch.kind() != ChannelKind::Channel {
        return Err(Error::NotTracePreserving {
            deviation: ch.trace_preservation_deviation(),
        });
    }
    Ok(())
}

/// The normalized maximally entangled projector on g x g.
fn entangled_projector(dim: usize) -> ComplexMatrix {
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let v: Vec<Complex64> = (0..dim * dim)
        .map(|idx| {
            if idx / dim == idx % dim {
                amp
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::outer(&v, &v)
}

/// Entangled channel fidelity: the Uhlmann fidelity of the two Choi states
/// (Phi x id)(pi), (Psi x id)(pi) with pi the maximally entangled projector.
pub fn entangled_channel_fidelity(phi: &KrausChannel, psi: &KrausChannel) -> Result<f64> {
    require_same_dims(phi, psi)?;
    let n = phi.dim_in();
    let pi = entangled_projector(n);
    let id = KrausChannel::identity(n);
    let a = phi.tensor(&id).apply_schrodinger(&pi)?.hermitize();
    let b = psi.tensor(&id).apply_schrodinger(&pi)?.hermitize();
    trace_sqrt_product(&a, &b)
}

/// (rho^T x 1_h) as a matrix on g x h, g slow.
fn transposed_input_blowup(rho: &ComplexMatrix, dim_out: usize) -> ComplexMatrix {
    rho.transpose().kron(&ComplexMatrix::identity(dim_out))
}

/// Pointwise minimax fidelity at the input state rho.
pub fn pointwise_minimax_fidelity(
    phi: &KrausChannel,
    psi: &KrausChannel,
    rho: &DensityOperator,
) -> Result<f64> {
    require_same_dims(phi, psi)?;
    if rho.dim() != phi.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "input state has dimension {}, channel expects {}",
            rho.dim(),
            phi.dim_in()
        )));
    }
    let phi_tau = phi.operational_density();
    let psi_tau = psi.operational_density();
    let x = transposed_input_blowup(rho.matrix(), phi.dim_out());
    let s = &(&x * psi_tau.matrix()) * &x;
    trace_sqrt_product(phi_tau.matrix(), &s)
}

/// Pointwise squared Hellinger distance
///   (Tr[(Phi_tau + Psi_tau)(rho^T x 1)]) / 2 - pointwise fidelity,
/// which reduces to 1 - fidelity when both arguments are channels.
pub fn hellinger_pointwise_distance(
    phi: &KrausChannel,
    psi: &KrausChannel,
    rho: &DensityOperator,
) -> Result<f64> {
    let fid = pointwise_minimax_fidelity(phi, psi, rho)?;
    let x = transposed_input_blowup(rho.matrix(), phi.dim_out());
    let masses = (&(phi.operational_density().matrix() * &x)
        + &(psi.operational_density().matrix() * &x))
        .trace()
        .re;
    Ok(0.5 * masses - fid)
}

/// Reduced state on the first factor of |upsilon><upsilon|, upsilon on
/// C^n x C^n, without forming the projector.
fn reduced_first_factor(upsilon: &[Complex64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |a, b| {
        (0..n)
            .map(|c| upsilon[a * n + c] * upsilon[b * n + c].conj())
            .sum()
    })
}

/// A purification on g x g of a state on g: sum_b sqrt(p_b) v_b (x) e_b over
/// the eigenpairs (p_b, v_b), renormalized to squeeze out roundoff.
fn purify_state(rho: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = rho.rows();
    let eig = hermitian_eig(rho)?;
    let mut u = vec![Complex64::new(0.0, 0.0); n * n];
    for b in 0..n {
        let p = eig.eigenvalues[b].max(0.0).sqrt();
        if p == 0.0 {
            continue;
        }
        let v = eig.eigenvector(b);
        for a in 0..n {
            u[a * n + b] = v[a] * Complex64::new(p, 0.0);
        }
    }
    let nrm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if nrm == 0.0 {
        return Err(Error::OutOfRange(
            "cannot purify a state with no spectral mass".into(),
        ));
    }
    for c in u.iter_mut() {
        *c /= nrm;
    }
    Ok(u)
}

/// Kraus overlap matrix M with M[j, l] = Tr(K_j rho L_l^dag), the partial
/// trace over h of F rho V^dag for the Stinespring blocks F = sum_j K_j x |j>
/// and V = sum_l L_l x |l> on the common dilation; both Kraus lists are
/// zero-padded to a common index count.
pub fn stinespring_overlap_matrix(
    phi: &KrausChannel,
    psi: &KrausChannel,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    require_same_dims(phi, psi)?;
    if !rho.is_square() || rho.rows() != phi.dim_in() {
        return Err(Error::DimensionMismatch(format!(
            "overlap matrix expects a state on {} dimensions, got {} x {}",
            phi.dim_in(),
            rho.rows(),
            rho.cols()
        )));
    }
    let count = phi.kraus().len().max(psi.kraus().len());
    let ks = phi.kraus_padded(count);
    let ls = psi.kraus_padded(count);
    let mut m = ComplexMatrix::zeros(count, count);
    for (j, k) in ks.iter().enumerate() {
        let p = k * rho;
        for (l, lmat) in ls.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..p.rows() {
                for c in 0..p.cols() {
                    acc += p[(r, c)] * lmat[(r, c)].conj();
                }
            }
            m[(j, l)] = acc;
        }
    }
    Ok(m)
}

/// Gap tolerance (relative), iteration cap, and the smallest backtracking
/// step for the convex refinement pass.
const POLISH_GAP_TOL: f64 = 1e-8;
const POLISH_ITER_CAP: usize = 800;
const POLISH_MIN_STEP: f64 = 1e-12;
const POLISH_STALL_WINDOW: usize = 40;

/// Euclidean projection of a descending eigenvalue list onto the
/// probability simplex.
fn project_simplex(lam: &[f64]) -> Vec<f64> {
    let n = lam.len();
    let mut cum = 0.0;
    let mut shift = lam[0] - 1.0;
    for (k, &l) in lam.iter().enumerate() {
        cum += l;
        let theta = (cum - 1.0) / (k + 1) as f64;
        if l - theta > 0.0 {
            shift = theta;
        }
    }
    lam.iter().map(|&l| (l - shift).max(0.0)).collect()
}

/// Nearest density operator to a Hermitian matrix: project the spectrum
/// onto the probability simplex and rebuild.
fn project_density(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(&h.hermitize())?;
    let lam = project_simplex(&eig.eigenvalues);
    let n = h.rows();
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| {
                eig.eigenvectors[(r, k)]
                    * eig.eigenvectors[(c, k)].conj()
                    * Complex64::new(lam[k], 0.0)
            })
            .sum()
    }))
}

/// Refine an input state toward the global infimum of the pointwise
/// fidelity. The overlap matrix M(rho) is linear in rho, so |M(rho)|_1 is
/// convex on the density operators: descending on rho itself cannot be
/// trapped the way the sphere search can, and the conditional-gradient
/// duality gap Tr[G rho] - lambda_min(G) bounds the remaining distance to
/// the infimum, certifying the result. The descent itself uses projected
/// Polak-Ribiere conjugate directions with a halving line search, which
/// rides the curved trace-norm troughs where single vertex steps stall.
/// Returns the refined state, the iterations used, and the final gap.
fn polish_over_densities(
    phi: &KrausChannel,
    psi: &KrausChannel,
    start: ComplexMatrix,
) -> Result<(ComplexMatrix, usize, f64)> {
    let n = phi.dim_in();
    let count = phi.kraus().len().max(psi.kraus().len());
    let ks = phi.kraus_padded(count);
    let ls = psi.kraus_padded(count);
    // d|M|_1 = Re <U V^dag, dM> at M = U Sigma V^dag, and dM[j, l] =
    // Tr(L_l^dag K_j drho), so the subgradient in rho is assembled from the
    // products T[j, l] = L_l^dag K_j.
    let mut pairs = Vec::with_capacity(count * count);
    for j in 0..count {
        for l in 0..count {
            pairs.push(&ls[l].adjoint() * &ks[j]);
        }
    }
    let subgrad = |m: &ComplexMatrix| -> Result<ComplexMatrix> {
        let (u, _, v_dag) = svd_factors(m)?;
        let nmat = &u * &v_dag;
        let mut raw = ComplexMatrix::zeros(n, n);
        for j in 0..count {
            for l in 0..count {
                let w = nmat[(j, l)].conj();
                let t = &pairs[j * count + l];
                for r in 0..n {
                    for c in 0..n {
                        raw[(r, c)] += w * t[(r, c)];
                    }
                }
            }
        }
        Ok(raw.hermitize())
    };
    let inner = |a: &ComplexMatrix, b: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                s += (a[(r, c)] * b[(c, r)]).re;
            }
        }
        s
    };
    let mut rho = project_density(&start)?;
    let mut value = trace_norm(&stinespring_overlap_matrix(phi, psi, &rho)?);
    let mut gap = f64::INFINITY;
    let mut step = 1.0f64;
    let mut prev_grad: Option<ComplexMatrix> = None;
    let mut prev_dir: Option<ComplexMatrix> = None;
    let mut stalled = 0usize;
    let mut iterations = 0usize;
    while iterations < POLISH_ITER_CAP {
        iterations += 1;
        let g = subgrad(&stinespring_overlap_matrix(phi, psi, &rho)?)?;
        let eig = hermitian_eig(&g)?;
        gap = inner(&g, &rho) - eig.eigenvalues[n - 1];
        if gap <= POLISH_GAP_TOL * (1.0 + value.abs()) {
            break;
        }
        let beta = match (&prev_grad, &prev_dir) {
            (Some(pg), Some(_)) => {
                let denom = inner(pg, pg);
                if denom > 0.0 {
                    ((inner(&g, &g) - inner(&g, pg)) / denom).max(0.0)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        };
        let mut dir = match (&prev_dir, beta > 0.0) {
            (Some(pd), true) => ComplexMatrix::from_fn(n, n, |r, c| {
                -g[(r, c)] + pd[(r, c)] * Complex64::new(beta, 0.0)
            }),
            _ => ComplexMatrix::from_fn(n, n, |r, c| -g[(r, c)]),
        };
        if inner(&dir, &g) >= 0.0 {
            dir = ComplexMatrix::from_fn(n, n, |r, c| -g[(r, c)]);
        }
        let noise = 1e-15 * (1.0 + value.abs());
        let mut hit: Option<(ComplexMatrix, f64)> = None;
        let mut t = step;
        while t >= POLISH_MIN_STEP {
            let trial = project_density(&ComplexMatrix::from_fn(n, n, |r, c| {
                rho[(r, c)] + dir[(r, c)] * Complex64::new(t, 0.0)
            }))?;
            let fv = trace_norm(&stinespring_overlap_matrix(phi, psi, &trial)?);
            if fv < value - noise {
                hit = Some((trial, fv));
                break;
            }
            t *= 0.5;
        }
        match hit {
            Some((next, fv)) => {
                let improvement = value - fv;
                rho = next;
                value = fv;
                step = (t * 4.0).min(1.0);
                prev_grad = Some(g);
                prev_dir = Some(dir);
                if improvement < 1e-13 * (1.0 + value.abs()) {
                    stalled += 1;
                    if stalled >= POLISH_STALL_WINDOW {
                        break;
                    }
                } else {
                    stalled = 0;
                }
            }
            None => {
                if prev_dir.is_none() {
                    break;
                }
                prev_grad = None;
                prev_dir = None;
                step = 1.0;
            }
        }
    }
    Ok((rho, iterations, gap))
}

/// Minimax fidelity between two channels: the infimum over input states of
/// the pointwise fidelity, searched on the route's optimization space. Every
/// route searches the unit sphere of g x g; mixed input states, where the
/// infimum of the convex pointwise objective may sit, enter through the
/// reduced state of the searched vector. The sphere lift of the convex
/// pointwise objective is not itself convex and its trace-norm troughs can
/// carry genuine local minima, so the best sphere point is passed through a
/// conditional-gradient refinement on the density operator and the route
/// objective is rescored at a purification of the refined state.
pub fn minimax_fidelity(
    phi: &KrausChannel,
    psi: &KrausChannel,
    route: Route,
    cfg: &OptConfig,
) -> Result<MinimaxResult> {
    require_same_dims(phi, psi)?;
    require_channel(phi)?;
    require_channel(psi)?;
    let n = phi.dim_in();
    let m = phi.dim_out();
    let objective: Box<dyn Fn(&[Complex64]) -> f64> = match route {
        Route::Density => {
            // The pointwise objective is the trace norm of a matrix linear in
            // rho, hence convex in rho, and its infimum can sit at a mixed
            // state (identity vs depolarizing: 1/sqrt(2) at every pure input
            // but 1/2 at the maximally mixed one). Mixed inputs are reached
            // by searching purification vectors on g x g and evaluating the
            // operational-density formula at the reduced state; Tr sqrt of
            // the sandwiched product is the trace norm of
            // Phi_tau^{1/2} (rho^T x 1) Psi_tau^{1/2}, so both square roots
            // come out of the loop.
            let phi_sqrt = psd_sqrt(phi.operational_density().matrix())?;
            let psi_sqrt = psd_sqrt(psi.operational_density().matrix())?;
            Box::new(move |u: &[Complex64]| {
                let rho = reduced_first_factor(u, n).hermitize();
                let blow = transposed_input_blowup(&rho, m);
                trace_norm(&(&(&phi_sqrt * &blow) * &psi_sqrt))
            })
        }
        Route::Purification => {
            let id = KrausChannel::identity(n);
            let phi_ext = phi.tensor(&id);
            let psi_ext = psi.tensor(&id);
            Box::new(move |u: &[Complex64]| {
                let proj = ComplexMatrix::outer(u, u);
                let a = match phi_ext.apply_schrodinger(&proj) {
                    Ok(v) => v.hermitize(),
                    Err(_) => return f64::NAN,
                };
                let b = match psi_ext.apply_schrodinger(&proj) {
                    Ok(v) => v.hermitize(),
                    Err(_) => return f64::NAN,
                };
                trace_sqrt_product(&a, &b).unwrap_or(f64::NAN)
            })
        }
        Route::Stinespring => {
            let count = phi.kraus().len().max(psi.kraus().len());
            let ks = phi.kraus_padded(count);
            let ls = psi.kraus_padded(count);
            Box::new(move |u: &[Complex64]| {
                let rho = reduced_first_factor(u, n);
                let mut m = ComplexMatrix::zeros(count, count);
                for (j, k) in ks.iter().enumerate() {
                    let p = k * &rho;
                    for (l, lmat) in ls.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for r in 0..p.rows() {
                            for c in 0..p.cols() {
                                acc += p[(r, c)] * lmat[(r, c)].conj();
                            }
                        }
                        m[(j, l)] = acc;
                    }
                }
                trace_norm(&m)
            })
        }
        Route::Measurement => {
            return Err(Error::RouteUnavailable(
                "the measurement route applies to POVM pairs, not Kraus channels".into(),
            ))
        }
    };
    let mut opt = minimize_over_pure_states(|u| objective(u), n * n, cfg)?;
    let rho = reduced_first_factor(&opt.argmin, n).hermitize();
    let (refined, _, gap) = polish_over_densities(phi, psi, rho)?;
    let candidate = purify_state(&refined)?;
    let value = objective(&candidate);
    if value.is_finite() && value < opt.value {
        opt.value = value;
        opt.argmin = candidate;
    }
    if gap <= POLISH_GAP_TOL * (1.0 + opt.value.abs()) {
        opt.converged = true;
    }
    finish(opt, route, cfg.restarts)
}

/// CB-norm distance: the supremum over unit vectors on g x g of the trace
/// distance between the outputs of Phi x id and Psi x id. The objective is
/// convex in the input state, so the supremum is attained at a pure state.
pub fn cb_distance(
    phi: &KrausChannel,
    psi: &KrausChannel,
    cfg: &OptConfig,
) -> Result<MinimaxResult> {
    require_same_dims(phi, psi)?;
    let n = phi.dim_in();
    let id = KrausChannel::identity(n);
    let phi_ext = phi.tensor(&id);
    let psi_ext = psi.tensor(&id);
    let obj = move |u: &[Complex64]| {
        let proj = ComplexMatrix::outer(u, u);
        let a = match phi_ext.apply_schrodinger(&proj) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        let b = match psi_ext.apply_schrodinger(&proj) {
            Ok(v) => v,
            Err(_) => return f64::NAN,
        };
        0.5 * trace_norm(&(&a - &b))
    };
    let opt = maximize_over_pure_states(obj, n * n, cfg)?;
    finish(opt, Route::Purification, cfg.restarts)
}

/// Validate 0 <= e <= 1 within tolerance and return e unchanged.
fn require_effect(e: &ComplexMatrix) -> Result<()> {
    if !e.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "effect must be square, got {} x {}",
            e.rows(),
            e.cols()
        )));
    }
    if e.hermitian_deviation() > HERM_TOL * e.max_abs().max(1.0) {
        return Err(Error::NonHermitian {
            deviation: e.hermitian_deviation(),
            tol: HERM_TOL,
        });
    }
    let eig = crate::linalg::hermitian_eig(&e.hermitize())?;
    let tol = 1e-8;
    for &lam in &eig.eigenvalues {
        if lam < -tol || lam > 1.0 + tol {
            return Err(Error::NotEffect { eigenvalue: lam });
        }
    }
    Ok(())
}

/// Pointwise squared Hellinger distance between two effects at the state rho:
///   Tr[(E + F) rho] / 2 - Tr (E^{1/2} rho F rho E^{1/2})^{1/2}.
pub fn effect_fidelity_distance(
    phi_eff: &ComplexMatrix,
    psi_eff: &ComplexMatrix,
    rho: &DensityOperator,
) -> Result<f64> {
    require_effect(phi_eff)?;
    require_effect(psi_eff)?;
    if phi_eff.rows() != psi_eff.rows() || phi_eff.rows() != rho.dim() {
        return Err(Error::DimensionMismatch(format!(
            "effects on {} and {} dimensions with a state on {}",
            phi_eff.rows(),
            psi_eff.rows(),
            rho.dim()
        )));
    }
    let masses = (&(phi_eff * rho.matrix()) + &(psi_eff * rho.matrix())).trace().re;
    let s = &(rho.matrix() * psi_eff) * rho.matrix();
    let overlap = trace_sqrt_product(&phi_eff.hermitize(), &s.hermitize())?;
    Ok(0.5 * masses - overlap)
}

/// Supremum of the pointwise effect distance over pure states.
pub fn effect_fidelity_distance_sup(
    phi_eff: &ComplexMatrix,
    psi_eff: &ComplexMatrix,
    cfg: &OptConfig,
) -> Result<f64> {
    require_effect(phi_eff)?;
    require_effect(psi_eff)?;
    if phi_eff.rows() != psi_eff.rows() {
        return Err(Error::DimensionMismatch(format!(
            "effects on {} and {} dimensions",
            phi_eff.rows(),
            psi_eff.rows()
        )));
    }
    let e = phi_eff.hermitize();
    let f = psi_eff.hermitize();
    let obj = move |x: &[Complex64]| {
        let rho = ComplexMatrix::outer(x, x);
        let masses = (&(&e * &rho) + &(&f * &rho)).trace().re;
        let s = &(&rho * &f) * &rho;
        match trace_sqrt_product(&e, &s.hermitize()) {
            Ok(overlap) => 0.5 * masses - overlap,
            Err(_) => f64::NAN,
        }
    };
    let opt = maximize_over_pure_states(obj, phi_eff.rows(), cfg)?;
    if !opt.converged {
        return Err(Error::NoConvergence {
            iterations: opt.iterations,
            best: opt.value,
        });
    }
    Ok(opt.value)
}
