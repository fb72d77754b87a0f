//! Quantum channels and operations in Kraus form.
//!
//! Kraus operators are stored in the Schrodinger picture: K_j maps the input
//! space g to the output space h (each K_j is dim_out x dim_in) and states
//! evolve as rho -> sum_j K_j rho K_j^dag. The Heisenberg dual acts on output
//! observables as B -> sum_j K_j^T B conj(K_j), which makes the transpose
//! pairing duality (Phi(B), rho) = (B, Phi_T(rho)) hold exactly.
//!
//! The operational density Phi_tau lives on the doubled space g (x) h with g
//! the slow (first) tensor factor. It is assembled as sum_j |v_j><v_j| where
//! v_j is the row-major vectorization of K_j^T, the unique choice for which
//!   Phi(B)   = Tr_h [(1_g (x) B^T) Phi_tau]
//!   Phi_T(rho) = Tr_g [Phi_tau (rho^T (x) 1_h)]
//! both reconstruct the channel action.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eig, partial_trace, ComplexMatrix, Factor};

/// Deviation tolerance for sum K_j^dag K_j against the identity.
pub const UNITAL_TOL: f64 = 1e-8;

/// Whether the predual is trace preserving (channel) or merely trace
/// non-increasing (operation).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Channel,
    Operation,
}

/// A completely positive map in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    kind: ChannelKind,
}

impl KrausChannel {
    /// Validate a Kraus family. For `ChannelKind::Channel` the sum
    /// sum K^dag K must equal the identity within UNITAL_TOL (spectral norm);
    /// for `ChannelKind::Operation` it must not exceed the identity.
    pub fn new(kraus: Vec<ComplexMatrix>, kind: ChannelKind) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::ShapeMismatch("empty Kraus family".into()));
        }
        let dim_out = kraus[0].rows();
        let dim_in = kraus[0].cols();
        for (j, k) in kraus.iter().enumerate() {
            if k.rows() != dim_out || k.cols() != dim_in {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {} is {} x {}, expected {} x {}",
                    j,
                    k.rows(),
                    k.cols(),
                    dim_out,
                    dim_in
                )));
            }
        }
        let ch = Self {
            dim_in,
            dim_out,
            kraus,
            kind,
        };
        let dev = &ch.kraus_gram() - &ComplexMatrix::identity(dim_in);
        let eig = hermitian_eig(&dev.hermitize())?;
        match kind {
            ChannelKind::Channel => {
                let norm = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
                if norm > UNITAL_TOL {
                    return Err(Error::NotTracePreserving { deviation: norm });
                }
            }
            ChannelKind::Operation => {
                let excess = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l));
                if excess > UNITAL_TOL {
                    return Err(Error::NotTracePreserving { deviation: excess });
                }
            }
        }
        Ok(ch)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim_in: dim,
            dim_out: dim,
            kraus: vec![ComplexMatrix::identity(dim)],
            kind: ChannelKind::Channel,
        }
    }

    /// Single-Kraus channel rho -> U rho U^dag.
    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "unitary channel needs a square matrix, got {} x {}",
                u.rows(),
                u.cols()
            )));
        }
        let dev = (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.cols())).frobenius_norm();
        if dev > UNITAL_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self {
            dim_in: u.cols(),
            dim_out: u.rows(),
            kraus: vec![u.clone()],
            kind: ChannelKind::Channel,
        })
    }

    /// Convex mixture: Kraus family { sqrt(p_i) K^{(i)}_j }.
    pub fn mixture(weights: &[f64], parts: &[KrausChannel]) -> Result<Self> {
        if weights.len() != parts.len() || parts.is_empty() {
            return Err(Error::BadWeights(format!(
                "{} weights for {} channels",
                weights.len(),
                parts.len()
            )));
        }
        if let Some(&w) = weights.iter().find(|&&w| w < 0.0) {
            return Err(Error::BadWeights(format!("negative weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadWeights(format!("weights sum to {total}")));
        }
        let (dim_in, dim_out) = (parts[0].dim_in, parts[0].dim_out);
        let mut kraus = Vec::new();
        let mut kind = ChannelKind::Channel;
        for (w, part) in weights.iter().zip(parts) {
            if part.dim_in != dim_in || part.dim_out != dim_out {
                return Err(Error::DimensionMismatch(
                    "mixture components must share input and output dimensions".into(),
                ));
            }
            if part.kind == ChannelKind::Operation {
                kind = ChannelKind::Operation;
            }
            for k in &part.kraus {
                kraus.push(k.scale_re(w.sqrt()));
            }
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
            kind,
        })
    }

    /// self after `inner`: states flow through `inner` first. Kraus family is
    /// all products K_self K_inner.
    pub fn compose(&self, inner: &KrausChannel) -> Result<Self> {
        if inner.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose: inner output dim {} != outer input dim {}",
                inner.dim_out, self.dim_in
            )));
        }
        let kraus: Vec<ComplexMatrix> = self
            .kraus
            .iter()
            .flat_map(|a| inner.kraus.iter().map(move |b| a * b))
            .collect();
        let kind = if self.kind == ChannelKind::Channel && inner.kind == ChannelKind::Channel {
            ChannelKind::Channel
        } else {
            ChannelKind::Operation
        };
        Ok(Self {
            dim_in: inner.dim_in,
            dim_out: self.dim_out,
            kraus,
            kind,
        })
    }

    /// Tensor product acting on the product input space, self on the slow factor.
    pub fn tensor(&self, other: &KrausChannel) -> Self {
        let kraus: Vec<ComplexMatrix> = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.kron(b)))
            .collect();
        let kind = if self.kind == ChannelKind::Channel && other.kind == ChannelKind::Channel {
            ChannelKind::Channel
        } else {
            ChannelKind::Operation
        };
        Self {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
            kind,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// sum_j K_j^dag K_j.
    pub fn kraus_gram(&self) -> ComplexMatrix {
        let mut total = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            total = &total + &(&k.adjoint() * k);
        }
        total
    }

    /// Spectral-norm deviation of the Kraus gram from the identity.
    pub fn trace_preservation_deviation(&self) -> f64 {
        let dev = &self.kraus_gram() - &ComplexMatrix::identity(self.dim_in);
        match hermitian_eig(&dev.hermitize()) {
            Ok(eig) => eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs())),
            Err(_) => f64::INFINITY,
        }
    }

    /// rho -> sum_j K_j rho K_j^dag.
    pub fn apply_schrodinger(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.rows() != self.dim_in || rho.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "state is {} x {}, channel input dim is {}",
                rho.rows(),
                rho.cols(),
                self.dim_in
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }

    /// Heisenberg dual of the Kraus action under the transpose pairing:
    /// B -> sum_j K_j^T B conj(K_j).
    pub fn apply_heisenberg(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.rows() != self.dim_out || b.cols() != self.dim_out {
            return Err(Error::DimensionMismatch(format!(
                "observable is {} x {}, channel output dim is {}",
                b.rows(),
                b.cols(),
                self.dim_out
            )));
        }
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out = &out + &(&(&k.transpose() * b) * &k.conj());
        }
        Ok(out)
    }

    /// Operational density Phi_tau = sum_j |v_j><v_j| on g (x) h.
    pub fn operational_density(&self) -> OperationalDensity {
        let side = self.dim_in * self.dim_out;
        let mut matrix = ComplexMatrix::zeros(side, side);
        for k in &self.kraus {
            let v = vectorize_transposed(k, self.dim_in, self.dim_out);
            matrix = &matrix + &ComplexMatrix::outer(&v, &v);
        }
        OperationalDensity {
            matrix,
            dim_in: self.dim_in,
            dim_out: self.dim_out,
        }
    }

    /// Kraus family padded with zero operators to `count` entries.
    pub fn kraus_padded(&self, count: usize) -> Vec<ComplexMatrix> {
        let mut out = self.kraus.clone();
        while out.len() < count {
            out.push(ComplexMatrix::zeros(self.dim_out, self.dim_in));
        }
        out
    }
}

/// v[(i, k)] = K[k, i] with the doubled-space index (i, k) = i * dim_out + k.
fn vectorize_transposed(k: &ComplexMatrix, dim_in: usize, dim_out: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(dim_in * dim_out);
    for i in 0..dim_in {
        for kk in 0..dim_out {
            v.push(k[(kk, i)]);
        }
    }
    v
}

/// PSD operator on the doubled space g (x) h representing a channel.
#[derive(Clone, Debug, PartialEq)]
pub struct OperationalDensity {
    matrix: ComplexMatrix,
    dim_in: usize,
    dim_out: usize,
}

impl OperationalDensity {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Tr_h Phi_tau, the identity on g exactly when the map is a channel.
    pub fn trace_out_output(&self) -> ComplexMatrix {
        partial_trace(&self.matrix, self.dim_in, self.dim_out, Factor::Second)
            .expect("operational density has product shape")
    }
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    kind: ChannelKind,
}

impl Serialize for KrausChannel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ChannelRepr {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.clone(),
            kind: self.kind,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KrausChannel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = ChannelRepr::deserialize(deserializer)?;
        let ch = KrausChannel::new(repr.kraus, repr.kind).map_err(serde::de::Error::custom)?;
        if ch.dim_in != repr.dim_in || ch.dim_out != repr.dim_out {
            return Err(serde::de::Error::custom(format!(
                "declared dims {} -> {} disagree with Kraus shape {} -> {}",
                repr.dim_in, repr.dim_out, ch.dim_in, ch.dim_out
            )));
        }
        Ok(ch)
    }
}

/// Dephasing qubit channel { sqrt(1-p) I, sqrt(p) sigma_z }.
pub fn dephasing_channel(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("dephasing weight {p}")));
    }
    let sz = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
        (0, 0) => cr(1.0),
        (1, 1) => cr(-1.0),
        _ => cr(0.0),
    });
    KrausChannel::new(
        vec![
            ComplexMatrix::identity(2).scale_re((1.0 - p).sqrt()),
            sz.scale_re(p.sqrt()),
        ],
        ChannelKind::Channel,
    )
}

/// Fully depolarizing channel rho -> Tr(rho) 1/d via the basis Kraus family
/// { |i><j| / sqrt(d) }.
pub fn depolarizing_channel(dim: usize) -> KrausChannel {
    let scale = 1.0 / (dim as f64).sqrt();
    let mut kraus = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut k = ComplexMatrix::zeros(dim, dim);
            k[(i, j)] = cr(scale);
            kraus.push(k);
        }
    }
    KrausChannel::new(kraus, ChannelKind::Channel).expect("basis family is trace preserving")
}

/// Constant channel rho -> Tr(rho) |target><target|.
pub fn constant_channel(dim: usize, target: usize) -> KrausChannel {
    let mut kraus = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut k = ComplexMatrix::zeros(dim, dim);
        k[(target, j)] = cr(1.0);
        kraus.push(k);
    }
    KrausChannel::new(kraus, ChannelKind::Channel).expect("constant family is trace preserving")
}
