//! Seeded random fixtures: Gaussian matrices, Haar-style unitaries, PSD
//! operators, densities, channels, POVMs. Deterministic given the caller's RNG,
//! so the same seeds reproduce the same test instances everywhere.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::{ChannelKind, KrausChannel};
use crate::linalg::{hermitian_eig, normalize_vec, ComplexMatrix};

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Unit vector with Gaussian components, uniform on the sphere.
pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-12 {
            return normalize_vec(&v);
        }
    }
}

/// Haar-style unitary: QR of a Gaussian matrix with the R diagonal phase fixed.
pub fn random_unitary(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim).to_dmatrix();
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, k)] *= phase;
        }
    }
    ComplexMatrix::from_dmatrix(&q)
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    (&g + &g.adjoint()).scale_re(0.5)
}

/// G^dag G for a Gaussian G: strictly PSD with probability one.
pub fn random_psd(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let g = random_matrix(rng, dim, dim);
    &g.adjoint() * &g
}

/// Random full-rank density operator.
pub fn random_density(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let p = random_psd(rng, dim);
    let tr = p.trace().re;
    p.scale_re(1.0 / tr)
}

/// Random effect: eigenvalues pushed into [0, 1].
pub fn random_effect(rng: &mut impl Rng, dim: usize) -> ComplexMatrix {
    let p = random_psd(rng, dim);
    let eig = hermitian_eig(&p).expect("random PSD is Hermitian");
    let lam_max = eig.eigenvalues[0].max(1e-12);
    eig.assemble(|l| (l / lam_max).clamp(0.0, 1.0))
}

/// Random channel with `kraus_count` Kraus operators: Gaussian blocks G_j
/// whitened by (sum G^dag G)^{-1/2} so the sum is exactly the identity.
pub fn random_channel(
    rng: &mut impl Rng,
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
) -> KrausChannel {
    let blocks: Vec<ComplexMatrix> = (0..kraus_count)
        .map(|_| random_matrix(rng, dim_out, dim_in))
        .collect();
    let mut total = ComplexMatrix::zeros(dim_in, dim_in);
    for b in &blocks {
        total = &total + &(&b.adjoint() * b);
    }
    let eig = hermitian_eig(&total).expect("Gram sum is Hermitian");
    let whiten = eig.assemble(|l| 1.0 / l.sqrt());
    let kraus: Vec<ComplexMatrix> = blocks.iter().map(|b| b * &whiten).collect();
    KrausChannel::new(kraus, ChannelKind::Channel).expect("whitened blocks are trace preserving")
}

/// Random POVM with `outcomes` elements: PSD blocks A_y renormalized to
/// S^{-1/2} A_y S^{-1/2} so they sum to the identity.
pub fn random_povm(rng: &mut impl Rng, dim: usize, outcomes: usize) -> Vec<ComplexMatrix> {
    let blocks: Vec<ComplexMatrix> = (0..outcomes).map(|_| random_psd(rng, dim)).collect();
    let mut total = ComplexMatrix::zeros(dim, dim);
    for b in &blocks {
        total = &total + b;
    }
    let eig = hermitian_eig(&total).expect("sum of PSD is Hermitian");
    let whiten = eig.assemble(|l| 1.0 / l.sqrt());
    blocks.iter().map(|b| &(&whiten * b) * &whiten).collect()
}

/// Probability vector from squared Gaussians.
pub fn random_probability_vector(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..len)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            x * x + 1e-6
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Column-stochastic kernel with `rows` outputs and `cols` inputs.
pub fn random_stochastic_kernel(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    let mut p = vec![vec![0.0; cols]; rows];
    for x in 0..cols {
        let col = random_probability_vector(rng, rows);
        for y in 0..rows {
            p[y][x] = col[y];
        }
    }
    p
}
