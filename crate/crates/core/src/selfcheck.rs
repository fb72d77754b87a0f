//! Built-in invariant suite behind the CLI `selfcheck` subcommand: fast,
//! deterministic checks that span every module at qubit scale. Fixture
//! validation failures (for instance corrupted mixture weights) propagate as
//! errors; optimizer non-convergence propagates too; a false invariant comes
//! back as a failed outcome instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{dephasing_channel, KrausChannel};
use crate::classical::{kernel_minimax_fidelity, qc_povm_fidelity, FiniteKernel, Povm};
use crate::closedforms::{gaussian_noise_fidelity, unitary_minimax_fidelity};
use crate::error::Result;
use crate::linalg::{ComplexMatrix, DensityOperator};
use crate::metrics::{cb_distance, minimax_fidelity, state_fidelity, trace_distance, Route};
use crate::optimize::{maximize_over_pure_states, minimize_over_pure_states, OptConfig};
use crate::qbc::{impossibility_report, CommitmentProtocol};
use crate::sampling;

/// One named invariant with its verdict and the numbers behind it.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

/// Runs the embedded suite. The seed steers every sampled fixture and
/// optimizer start, so runs are reproducible; the mixture weights parametrize
/// one fixture channel and are validated like any user input (two entries,
/// nonnegative, summing to one).
pub fn run_selfcheck(seed: u64, mixture_weights: &[f64]) -> Result<Vec<CheckOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = OptConfig::with_seed(seed);
    let mut checks = Vec::new();

    // Fixtures. The mixture construction validates the supplied weights and
    // a bad vector aborts the whole run before any check executes.
    let sigma_z = ComplexMatrix::from_fn(2, 2, |r, c| {
        num_complex::Complex64::new(if r != c { 0.0 } else if r == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    let mixed = KrausChannel::mixture(
        mixture_weights,
        &[
            KrausChannel::identity(2),
            KrausChannel::unitary(&sigma_z)?,
        ],
    )?;
    let random_pair = (
        sampling::random_channel(&mut rng, 2, 2, 2),
        sampling::random_channel(&mut rng, 2, 2, 2),
    );

    // Route agreement on a sampled qubit pair.
    {
        let values: Vec<f64> = [Route::Density, Route::Purification, Route::Stinespring]
            .iter()
            .map(|&r| Ok(minimax_fidelity(&random_pair.0, &random_pair.1, r, &cfg)?.value))
            .collect::<Result<_>>()?;
        let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - values.iter().cloned().fold(f64::INFINITY, f64::min);
        checks.push(outcome(
            "route-agreement",
            spread < 1e-4,
            format!("route spread {spread:.3e} over values {values:?}"),
        ));
    }

    // Unitary closed form against the optimizer.
    {
        let gate = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => num_complex::Complex64::new(1.0, 0.0),
            (1, 1) => num_complex::Complex64::new(0.0, 1.0),
            _ => num_complex::Complex64::new(0.0, 0.0),
        });
        let (hull_value, _) = unitary_minimax_fidelity(&ComplexMatrix::identity(2), &gate)?;
        let numeric = minimax_fidelity(
            &KrausChannel::identity(2),
            &KrausChannel::unitary(&gate)?,
            Route::Purification,
            &cfg,
        )?
        .value;
        let exact = (std::f64::consts::FRAC_PI_4).cos();
        let gap = (hull_value - numeric).abs().max((hull_value - exact).abs());
        checks.push(outcome(
            "unitary-closed-form",
            gap < 1e-4,
            format!("hull {hull_value:.9}, optimizer {numeric:.9}, exact {exact:.9}"),
        ));
    }

    // Fidelity-distance equivalence bounds on the mixture fixture.
    {
        let other = dephasing_channel(0.3)?;
        let f = minimax_fidelity(&mixed, &other, Route::Purification, &cfg)?.value;
        let d = cb_distance(&mixed, &other, &cfg)?.value;
        let lower = 1.0 - d;
        let upper = (1.0 - d * d).max(0.0).sqrt();
        let ok = f >= lower - 1e-3 && f <= upper + 1e-3;
        checks.push(outcome(
            "equivalence-bounds",
            ok,
            format!("1 - D = {lower:.6} <= f = {f:.6} <= sqrt(1 - D^2) = {upper:.6}"),
        ));
    }

    // State-level Fuchs - van de Graaf on sampled qubit pairs.
    {
        let mut worst = f64::INFINITY;
        for _ in 0..20 {
            let rho = DensityOperator::new(sampling::random_density(&mut rng, 2))?;
            let sig = DensityOperator::new(sampling::random_density(&mut rng, 2))?;
            let f = state_fidelity(&rho, &sig)?;
            let d = trace_distance(&rho, &sig)?;
            worst = worst
                .min(d - (1.0 - f))
                .min((1.0 - f * f).max(0.0).sqrt() - d);
        }
        checks.push(outcome(
            "fuchs-van-de-graaf",
            worst >= -1e-9,
            format!("worst slack {worst:.3e} over 20 pairs"),
        ));
    }

    // Gaussian closed form, exact arithmetic.
    {
        let a = gaussian_noise_fidelity(1.0, 4.0)?;
        let b = gaussian_noise_fidelity(1.0, 9.0)?;
        let c = gaussian_noise_fidelity(3.0, 3.0)?;
        let ok = (a - 0.8).abs() < 1e-12 && (b - 0.6).abs() < 1e-12 && (c - 1.0).abs() < 1e-12;
        checks.push(outcome(
            "gaussian-closed-form",
            ok,
            format!("(1,4) -> {a}, (1,9) -> {b}, (3,3) -> {c}"),
        ));
    }

    // Bit-commitment chain on the fixture protocol.
    {
        let protocol = CommitmentProtocol::new(random_pair.0.clone(), mixed.clone())?;
        let report = impossibility_report(&protocol, &cfg)?;
        checks.push(outcome(
            "qbc-chain",
            report.slack >= -1e-3,
            format!(
                "f^2 = {:.6}, (1 - D)^2 = {:.6}, slack {:.3e}",
                report.alice_bound, report.concealment_bound, report.slack
            ),
        ));
    }

    // POVM self-fidelity.
    {
        let povm = Povm::new(sampling::random_povm(&mut rng, 2, 3))?;
        let value = qc_povm_fidelity(&povm, &povm, &cfg)?.value;
        checks.push(outcome(
            "povm-self-fidelity",
            (value - 1.0).abs() < 1e-9,
            format!("self-fidelity {value:.12}"),
        ));
    }

    // Classical kernel example.
    {
        let p = FiniteKernel::new(vec![vec![0.5, 0.1], vec![0.5, 0.9]])?;
        let q = FiniteKernel::new(vec![vec![0.25, 0.2], vec![0.75, 0.8]])?;
        let (value, x) = kernel_minimax_fidelity(&p, &q)?;
        let want = 0.125f64.sqrt() + 0.375f64.sqrt();
        checks.push(outcome(
            "kernel-example",
            (value - want).abs() < 1e-12 && x == 0,
            format!("value {value:.9} at column {x}, expected {want:.9}"),
        ));
    }

    // Optimizer recovers the spectral edges of a sampled Hermitian matrix.
    {
        let h = sampling::random_hermitian(&mut rng, 4);
        let eig = crate::linalg::hermitian_eig(&h)?;
        let top = eig.eigenvalues[0];
        let bottom = *eig.eigenvalues.last().expect("nonempty spectrum");
        let hc = h.clone();
        let quad = move |psi: &[num_complex::Complex64]| {
            crate::linalg::inner(psi, &hc.mul_vec(psi)).re
        };
        let found_min = minimize_over_pure_states(&quad, 4, &cfg)?.value;
        let found_max = maximize_over_pure_states(&quad, 4, &cfg)?.value;
        let gap = (found_min - bottom).abs().max((found_max - top).abs());
        checks.push(outcome(
            "optimizer-eigen-recovery",
            gap < 1e-6,
            format!("edge recovery gap {gap:.3e}"),
        ));
    }

    Ok(checks)
}
