//! Commutative and hybrid fidelities over finite alphabets: Bhattacharyya
//! overlaps and Hellinger distances of nonnegative vectors, the column-minimum
//! fidelity of stochastic kernels, and the semiclassical (state-family) and
//! semiquantum (POVM) reductions of the channel minimax fidelity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{trace_sqrt_product, ComplexMatrix, DensityOperator, HERM_TOL};
use crate::metrics::{finish, state_fidelity, MinimaxResult, Route};
use crate::optimize::{minimize_over_pure_states, OptConfig};

const STOCHASTIC_TOL: f64 = 1e-10;
const COMPLETENESS_TOL: f64 = 1e-9;

fn require_masses(p: &[f64], q: &[f64]) -> Result<(f64, f64)> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "mass vectors of lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    for (name, v) in [("first", p), ("second", q)] {
        if let Some(&w) = v.iter().find(|&&w| !(w >= 0.0)) {
            return Err(Error::BadWeights(format!(
                "{name} vector has entry {w}, all masses must be nonnegative"
            )));
        }
    }
    let (mp, mq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
    if mp <= 0.0 || mq <= 0.0 {
        return Err(Error::ZeroMass(format!(
            "total masses {mp} and {mq} must both be positive"
        )));
    }
    Ok((mp, mq))
}

/// Relative fidelity of two nonnegative vectors:
/// sum_i sqrt(p_i q_i) / sqrt((sum p)(sum q)). The Bhattacharyya coefficient
/// when both are probability vectors.
pub fn classical_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    let (mp, mq) = require_masses(p, q)?;
    let overlap: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    Ok(overlap / (mp * mq).sqrt())
}

/// Squared Hellinger distance (1/2) sum_i (sqrt(p_i) - sqrt(q_i))^2. Relates
/// to the fidelity through
/// d^2(P,Q) + sqrt((1,P)(1,Q)) f(P,Q) = (1, (P+Q)/2), exactly.
pub fn classical_hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    require_masses(p, q)?;
    Ok(0.5
        * p.iter()
            .zip(q)
            .map(|(a, b)| {
                let d = a.sqrt() - b.sqrt();
                d * d
            })
            .sum::<f64>())
}

/// Positive kernel p(y|x) on finite alphabets, stored row-major with rows
/// indexed by the output letter y and columns by the input letter x.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteKernel {
    rows: usize,
    cols: usize,
    p: Vec<Vec<f64>>,
    column_sums: Vec<f64>,
    stochastic: bool,
}

impl FiniteKernel {
    /// Validates nonnegativity and rectangularity; records column sums and
    /// whether every column is a probability distribution (within 1e-10).
    pub fn new(p: Vec<Vec<f64>>) -> Result<Self> {
        let rows = p.len();
        let cols = p.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch("empty kernel".into()));
        }
        for (y, row) in p.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "kernel row {y} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (x, &w) in row.iter().enumerate() {
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(Error::OutOfRange(format!(
                        "kernel entry p({y}|{x}) = {w} must be a nonnegative real"
                    )));
                }
            }
        }
        let column_sums: Vec<f64> = (0..cols).map(|x| p.iter().map(|row| row[x]).sum()).collect();
        let stochastic = column_sums
            .iter()
            .all(|&s| (s - 1.0).abs() <= STOCHASTIC_TOL);
        Ok(Self {
            rows,
            cols,
            p,
            column_sums,
            stochastic,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, y: usize, x: usize) -> f64 {
        self.p[y][x]
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn column_sums(&self) -> &[f64] {
        &self.column_sums
    }

    pub fn is_stochastic(&self) -> bool {
        self.stochastic
    }

    fn column(&self, x: usize) -> Vec<f64> {
        self.p.iter().map(|row| row[x]).collect()
    }
}

/// Minimax fidelity of two classical channels given as stochastic kernels:
/// the minimum over input letters x of the Bhattacharyya overlap of the
/// output columns. Returns the value and the minimizing column (0-based).
pub fn kernel_minimax_fidelity(p: &FiniteKernel, q: &FiniteKernel) -> Result<(f64, usize)> {
    if p.rows() != q.rows() || p.cols() != q.cols() {
        return Err(Error::DimensionMismatch(format!(
            "kernels of shapes {}x{} and {}x{}",
            p.rows(),
            p.cols(),
            q.rows(),
            q.cols()
        )));
    }
    for (name, k) in [("first", p), ("second", q)] {
        if !k.is_stochastic() {
            return Err(Error::NotStochastic(format!(
                "{name} kernel column sums {:?}",
                k.column_sums()
            )));
        }
    }
    let mut best = (f64::INFINITY, 0);
    for x in 0..p.cols() {
        let overlap: f64 = p
            .column(x)
            .iter()
            .zip(q.column(x).iter())
            .map(|(a, b)| (a * b).sqrt())
            .sum();
        if overlap < best.0 {
            best = (overlap, x);
        }
    }
    Ok(best)
}

/// Minimax fidelity of two semiclassical (c-q) channels given as equal-length
/// state families: the minimum over the classical input x of the Uhlmann
/// fidelity of the output pair. Returns the value and the minimizing index.
pub fn cq_fidelity(
    rho_family: &[DensityOperator],
    sigma_family: &[DensityOperator],
) -> Result<(f64, usize)> {
    if rho_family.len() != sigma_family.len() || rho_family.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "state families of lengths {} and {}",
            rho_family.len(),
            sigma_family.len()
        )));
    }
    let mut best = (f64::INFINITY, 0);
    for (x, (rho, sigma)) in rho_family.iter().zip(sigma_family).enumerate() {
        let f = state_fidelity(rho, sigma)?;
        if f < best.0 {
            best = (f, x);
        }
    }
    Ok(best)
}

/// Positive operator-valued measure: PSD elements on a fixed space summing to
/// the identity within 1e-9.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    dim: usize,
}

impl Povm {
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = match elements.first() {
            Some(e) if e.is_square() => e.rows(),
            _ => return Err(Error::NotPovm("empty list or non-square element".into())),
        };
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (y, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::NotPovm(format!(
                    "element {y} is {}x{}, expected {dim}x{dim}",
                    e.rows(),
                    e.cols()
                )));
            }
            if e.hermitian_deviation() > HERM_TOL * e.max_abs().max(1.0) {
                return Err(Error::NotPovm(format!("element {y} is not Hermitian")));
            }
            let eig = crate::linalg::hermitian_eig(&e.hermitize())?;
            let floor = -COMPLETENESS_TOL * eig.eigenvalues[0].abs().max(1.0);
            if let Some(&lam) = eig.eigenvalues.iter().find(|&&l| l < floor) {
                return Err(Error::NotPovm(format!(
                    "element {y} has eigenvalue {lam:.3e}"
                )));
            }
            total = &total + e;
        }
        let dev = (&total - &ComplexMatrix::identity(dim)).max_abs();
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotPovm(format!(
                "elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { elements, dim })
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    /// Coarse-graining: replace outcomes a and b by their sum. The result is
    /// again a POVM with one outcome fewer.
    pub fn merge_outcomes(&self, a: usize, b: usize) -> Result<Povm> {
        if a == b || a >= self.outcomes() || b >= self.outcomes() {
            return Err(Error::OutOfRange(format!(
                "cannot merge outcomes {a} and {b} of {}",
                self.outcomes()
            )));
        }
        let mut merged = Vec::with_capacity(self.outcomes() - 1);
        merged.push(&self.elements[a] + &self.elements[b]);
        for (y, e) in self.elements.iter().enumerate() {
            if y != a && y != b {
                merged.push(e.clone());
            }
        }
        Povm::new(merged)
    }
}

/// Minimax fidelity of two measurement (q-c) channels given as POVMs with a
/// common outcome set: the infimum over pure input states rho of
/// sum_y Tr sqrt(M_y (rho N_y rho)). Restricting to pure states loses
/// nothing; each term is a trace_sqrt_product, and for M = N the identity
/// Tr sqrt(M (rho M rho)) = Tr(M rho) collapses the sum to 1.
pub fn qc_povm_fidelity(m: &Povm, n: &Povm, cfg: &OptConfig) -> Result<MinimaxResult> {
    if m.dim() != n.dim() {
        return Err(Error::DimensionMismatch(format!(
            "POVMs on spaces of dimensions {} and {}",
            m.dim(),
            n.dim()
        )));
    }
    if m.outcomes() != n.outcomes() {
        return Err(Error::DimensionMismatch(format!(
            "POVMs with {} and {} outcomes",
            m.outcomes(),
            n.outcomes()
        )));
    }
    let dim = m.dim();
    let ms = m.elements().to_vec();
    let ns = n.elements().to_vec();
    let objective = move |psi: &[Complex64]| {
        let rho = ComplexMatrix::outer(psi, psi);
        let mut total = 0.0;
        for (my, ny) in ms.iter().zip(&ns) {
            let sandwich = (&(&rho * ny) * &rho).hermitize();
            match trace_sqrt_product(my, &sandwich) {
                Ok(t) => total += t,
                Err(_) => return f64::NAN,
            }
        }
        total
    };
    let opt = minimize_over_pure_states(objective, dim, cfg)?;
    finish(opt, Route::Measurement, cfg.restarts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rand_nonneg(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        use rand::Rng;
        (0..len).map(|_| rng.gen::<f64>() * 2.0).collect()
    }

    #[test]
    fn fidelity_examples() {
        let p = [0.5, 0.5];
        assert!((classical_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            classical_fidelity(&[0.3, 0.0], &[0.0, 0.7]).unwrap(),
            0.0
        );
        let got = classical_fidelity(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let want = 0.125f64.sqrt() + 0.375f64.sqrt();
        assert!((got - want).abs() < 1e-15);
        // Relative normalization: scaling either argument changes nothing.
        let scaled = classical_fidelity(&[5.0, 5.0], &[0.25, 0.75]).unwrap();
        assert!((scaled - want).abs() < 1e-15);
        assert!(matches!(
            classical_fidelity(&[0.0, 0.0], &[0.5, 0.5]),
            Err(Error::ZeroMass(_))
        ));
        assert!(matches!(
            classical_fidelity(&[-0.1, 1.1], &[0.5, 0.5]),
            Err(Error::BadWeights(_))
        ));
        assert!(matches!(
            classical_fidelity(&[1.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn hellinger_examples() {
        let p = [0.25, 0.75];
        assert_eq!(classical_hellinger(&p, &p).unwrap(), 0.0);
        assert!((classical_hellinger(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        let d2 = classical_hellinger(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let f = classical_fidelity(&[0.5, 0.5], &[0.25, 0.75]).unwrap();
        assert!((d2 - (1.0 - f)).abs() < 1e-15);
    }

    #[test]
    fn masses_identity_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let mut p = rand_nonneg(&mut rng, 6);
            let q = rand_nonneg(&mut rng, 6);
            p[2] = 0.0;
            let (mp, mq) = (p.iter().sum::<f64>(), q.iter().sum::<f64>());
            let lhs = classical_hellinger(&p, &q).unwrap()
                + (mp * mq).sqrt() * classical_fidelity(&p, &q).unwrap();
            let rhs = 0.5 * (mp + mq);
            assert!((lhs - rhs).abs() < 1e-12, "identity residual {}", lhs - rhs);
        }
    }

    #[test]
    fn kernel_validation() {
        let k = FiniteKernel::new(vec![vec![0.5, 0.1], vec![0.5, 0.9]]).unwrap();
        assert!(k.is_stochastic());
        assert_eq!(k.rows(), 2);
        assert_eq!(k.cols(), 2);
        assert_eq!(k.entry(1, 0), 0.5);
        let sub = FiniteKernel::new(vec![vec![0.5], vec![0.4]]).unwrap();
        assert!(!sub.is_stochastic());
        assert!((sub.column_sums()[0] - 0.9).abs() < 1e-15);
        assert!(matches!(
            FiniteKernel::new(vec![vec![0.5, 0.5], vec![-0.5, 0.5]]),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            FiniteKernel::new(vec![vec![0.5, 0.5], vec![0.5]]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn kernel_minimax_examples() {
        let p = FiniteKernel::new(vec![vec![0.5, 0.1], vec![0.5, 0.9]]).unwrap();
        let (same, _) = kernel_minimax_fidelity(&p, &p).unwrap();
        assert!((same - 1.0).abs() < 1e-12);

        // Deterministic kernels that disagree on input 1.
        let det_a = FiniteKernel::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let det_b = FiniteKernel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (zero, x) = kernel_minimax_fidelity(&det_a, &det_b).unwrap();
        assert_eq!(zero, 0.0);
        assert_eq!(x, 1);

        let q = FiniteKernel::new(vec![vec![0.25, 0.2], vec![0.75, 0.8]]).unwrap();
        let (value, col) = kernel_minimax_fidelity(&p, &q).unwrap();
        let want = 0.125f64.sqrt() + 0.375f64.sqrt();
        assert!((value - want).abs() < 1e-12, "got {value}");
        assert_eq!(col, 0);

        let sub = FiniteKernel::new(vec![vec![0.5, 0.1], vec![0.4, 0.9]]).unwrap();
        assert!(matches!(
            kernel_minimax_fidelity(&p, &sub),
            Err(Error::NotStochastic(_))
        ));
    }

    #[test]
    fn cq_family_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let rhos: Vec<DensityOperator> = (0..3)
            .map(|_| DensityOperator::new(sampling::random_density(&mut rng, 2)).unwrap())
            .collect();
        let sigmas: Vec<DensityOperator> = (0..3)
            .map(|_| DensityOperator::new(sampling::random_density(&mut rng, 2)).unwrap())
            .collect();
        let (value, x) = cq_fidelity(&rhos, &sigmas).unwrap();
        let elementwise: Vec<f64> = rhos
            .iter()
            .zip(&sigmas)
            .map(|(r, s)| state_fidelity(r, s).unwrap())
            .collect();
        let want = elementwise.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((value - want).abs() < 1e-15);
        assert!((elementwise[x] - want).abs() < 1e-15);

        let (one, _) = cq_fidelity(&rhos, &rhos).unwrap();
        assert!((one - 1.0).abs() < 1e-9);

        let zero = DensityOperator::from_pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let one_state = DensityOperator::from_pure(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let (f, idx) = cq_fidelity(
            &[rhos[0].clone(), zero],
            &[sigmas[0].clone(), one_state],
        )
        .unwrap();
        assert!(f < 1e-7, "orthogonal pair should zero the minimum, got {f}");
        assert_eq!(idx, 1);
    }

    #[test]
    fn povm_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let elements = sampling::random_povm(&mut rng, 2, 3);
        let povm = Povm::new(elements).unwrap();
        assert_eq!(povm.dim(), 2);
        assert_eq!(povm.outcomes(), 3);

        // Halving one element breaks completeness.
        let mut broken = povm.elements().to_vec();
        broken[0] = broken[0].scale_re(0.5);
        assert!(matches!(Povm::new(broken), Err(Error::NotPovm(_))));

        // A negative element is rejected even when the sum is the identity.
        let plus = ComplexMatrix::from_fn(2, 2, |_, _| c(0.75, 0.0));
        let rest = &ComplexMatrix::identity(2) - &plus;
        assert!(matches!(Povm::new(vec![plus, rest]), Err(Error::NotPovm(_))));
    }

    #[test]
    fn rank_one_sandwich_identity() {
        // Tr sqrt(M (rho M rho)) = Tr(M rho) for pure rho, the mechanism
        // behind unit self-fidelity.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let m = sampling::random_effect(&mut rng, 3);
            let psi = sampling::random_unit_vector(&mut rng, 3);
            let rho = ComplexMatrix::outer(&psi, &psi);
            let sandwich = (&(&rho * &m) * &rho).hermitize();
            let lhs = trace_sqrt_product(&m, &sandwich).unwrap();
            let rhs = (&m * &rho).trace().re;
            assert!((lhs - rhs).abs() < 1e-10, "identity gap {}", lhs - rhs);
        }
    }

    #[test]
    fn povm_self_fidelity_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for (dim, outcomes) in [(2, 3), (3, 2)] {
            let povm = Povm::new(sampling::random_povm(&mut rng, dim, outcomes)).unwrap();
            let res = qc_povm_fidelity(&povm, &povm, &OptConfig::with_seed(7)).unwrap();
            assert!(
                (res.value - 1.0).abs() < 1e-9,
                "self-fidelity {} for dim {dim}",
                res.value
            );
        }
    }

    #[test]
    fn z_versus_x_measurement() {
        let z = Povm::new(vec![
            ComplexMatrix::from_fn(2, 2, |r, q| c(if r == 0 && q == 0 { 1.0 } else { 0.0 }, 0.0)),
            ComplexMatrix::from_fn(2, 2, |r, q| c(if r == 1 && q == 1 { 1.0 } else { 0.0 }, 0.0)),
        ])
        .unwrap();
        let x = Povm::new(vec![
            ComplexMatrix::from_fn(2, 2, |_, _| c(0.5, 0.0)),
            ComplexMatrix::from_fn(2, 2, |r, q| c(if r == q { 0.5 } else { -0.5 }, 0.0)),
        ])
        .unwrap();
        let res = qc_povm_fidelity(&z, &x, &OptConfig::with_seed(8)).unwrap();
        let want = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            (res.value - want).abs() < 1e-6,
            "Z vs X fidelity {} should be {want}",
            res.value
        );
    }

    #[test]
    fn diagonal_povms_reduce_to_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for trial in 0..3 {
            let p = sampling::random_stochastic_kernel(&mut rng, 3, 2);
            let q = sampling::random_stochastic_kernel(&mut rng, 3, 2);
            let diag = |k: &Vec<Vec<f64>>, y: usize| {
                ComplexMatrix::from_fn(2, 2, |r, c_| {
                    if r == c_ {
                        c(k[y][r], 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                })
            };
            let m = Povm::new((0..3).map(|y| diag(&p, y)).collect()).unwrap();
            let n = Povm::new((0..3).map(|y| diag(&q, y)).collect()).unwrap();
            let pk = FiniteKernel::new(p).unwrap();
            let qk = FiniteKernel::new(q).unwrap();
            let (classical, _) = kernel_minimax_fidelity(&pk, &qk).unwrap();
            let quantum = qc_povm_fidelity(&m, &n, &OptConfig::with_seed(60 + trial))
                .unwrap()
                .value;
            assert!(
                (classical - quantum).abs() < 1e-6,
                "trial {trial}: kernel {classical} vs POVM {quantum}"
            );
        }
    }

    #[test]
    fn coarse_graining_never_decreases_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for trial in 0..3 {
            let m = Povm::new(sampling::random_povm(&mut rng, 2, 4)).unwrap();
            let n = Povm::new(sampling::random_povm(&mut rng, 2, 4)).unwrap();
            let cfg = OptConfig::with_seed(70 + trial);
            let fine = qc_povm_fidelity(&m, &n, &cfg).unwrap().value;
            let coarse = qc_povm_fidelity(
                &m.merge_outcomes(0, 1).unwrap(),
                &n.merge_outcomes(0, 1).unwrap(),
                &cfg,
            )
            .unwrap()
            .value;
            assert!(
                coarse >= fine - 1e-6,
                "trial {trial}: merging dropped {fine} to {coarse}"
            );
        }
    }

    #[test]
    fn povm_dimension_guards() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let m2 = Povm::new(sampling::random_povm(&mut rng, 2, 3)).unwrap();
        let m3 = Povm::new(sampling::random_povm(&mut rng, 3, 3)).unwrap();
        let m2b = Povm::new(sampling::random_povm(&mut rng, 2, 2)).unwrap();
        let cfg = OptConfig::with_seed(1);
        assert!(matches!(
            qc_povm_fidelity(&m2, &m3, &cfg),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            qc_povm_fidelity(&m2, &m2b, &cfg),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
