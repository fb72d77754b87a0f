//! Security bounds for quantum bit commitment. A protocol is the pair of
//! channels Alice's actions induce on Bob's side for the two committed bits;
//! Bob's optimal cheating probability comes from their CB-norm distance,
//! Alice's from the squared minimax fidelity, and the two are chained by the
//! fidelity-distance inequalities: protocols concealing against Bob are
//! automatically vulnerable to Alice.

use serde::Serialize;

use crate::channels::{ChannelKind, KrausChannel};
use crate::error::{Error, Result};
use crate::metrics::{cb_distance, minimax_fidelity, Route};
use crate::optimize::OptConfig;

/// Tolerance on the impossibility chain; a deeper violation indicates an
/// optimizer or convention bug, not physics.
const CHAIN_TOL: f64 = 1e-3;

/// The two commitment channels of a single-round, non-aborting protocol.
#[derive(Clone, Debug)]
pub struct CommitmentProtocol {
    phi0: KrausChannel,
    phi1: KrausChannel,
}

impl CommitmentProtocol {
    /// Both channels must be trace preserving and share input and output
    /// spaces.
    pub fn new(phi0: KrausChannel, phi1: KrausChannel) -> Result<Self> {
        if phi0.dim_in() != phi1.dim_in() || phi0.dim_out() != phi1.dim_out() {
            return Err(Error::DimensionMismatch(format!(
                "commitment channels of shapes {}->{} and {}->{}",
                phi0.dim_in(),
                phi0.dim_out(),
                phi1.dim_in(),
                phi1.dim_out()
            )));
        }
        for ch in [&phi0, &phi1] {
            if ch.kind() != ChannelKind::Channel {
                return Err(Error::NotTracePreserving {
                    deviation: ch.trace_preservation_deviation(),
                });
            }
        }
        Ok(Self { phi0, phi1 })
    }

    pub fn phi0(&self) -> &KrausChannel {
        &self.phi0
    }

    pub fn phi1(&self) -> &KrausChannel {
        &self.phi1
    }
}

/// Bob's optimal probability of guessing the committed bit before unveiling:
/// (1 + D(Phi0, Phi1)) / 2, in [1/2, 1]. Equals 1/2 exactly for perfectly
/// concealing protocols.
pub fn bob_cheat_probability(protocol: &CommitmentProtocol, cfg: &OptConfig) -> Result<f64> {
    let d = cb_distance(&protocol.phi0, &protocol.phi1, cfg)?.value;
    Ok(0.5 * (1.0 + d))
}

/// Lower bound on Alice's probability of successfully unveiling the bit she
/// did not commit: f(Phi0, Phi1)^2, via the minimax EPR attack on the Kraus
/// index space.
pub fn alice_cheat_lower_bound(protocol: &CommitmentProtocol, cfg: &OptConfig) -> Result<f64> {
    let f = minimax_fidelity(&protocol.phi0, &protocol.phi1, Route::Purification, cfg)?.value;
    Ok(f * f)
}

/// The three members of the impossibility chain, each a squared quantity in
/// [0, 1].
#[derive(Clone, Debug, Serialize)]
pub struct ImpossibilityReport {
    /// Alice's lower bound f^2.
    pub alice_bound: f64,
    /// Concealment penalty (1 - D)^2.
    pub concealment_bound: f64,
    /// The same penalty restated through Bob: [1 - 2(P_B - 1/2)]^2.
    pub bob_restated: f64,
    /// alice_bound - concealment_bound; nonnegative up to optimizer
    /// tolerance.
    pub slack: f64,
}

/// Evaluates the chain f^2 >= (1 - D)^2 = [1 - 2(P_B - 1/2)]^2 on a protocol.
/// A slack below -1e-3 is flagged as ChainViolation.
pub fn impossibility_report(
    protocol: &CommitmentProtocol,
    cfg: &OptConfig,
) -> Result<ImpossibilityReport> {
    let d = cb_distance(&protocol.phi0, &protocol.phi1, cfg)?.value;
    let f = minimax_fidelity(&protocol.phi0, &protocol.phi1, Route::Purification, cfg)?.value;
    let bob = 0.5 * (1.0 + d);
    let alice_bound = f * f;
    let concealment_bound = (1.0 - d) * (1.0 - d);
    let restated = 1.0 - 2.0 * (bob - 0.5);
    let bob_restated = restated * restated;
    let slack = alice_bound - concealment_bound;
    if slack < -CHAIN_TOL {
        return Err(Error::ChainViolation(format!(
            "f^2 = {alice_bound:.9} fell below (1 - D)^2 = {concealment_bound:.9} by {:.3e}",
            -slack
        )));
    }
    Ok(ImpossibilityReport {
        alice_bound,
        concealment_bound,
        bob_restated,
        slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::constant_channel;
    use crate::linalg::ComplexMatrix;
    use crate::sampling;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn phase_protocol(theta: f64) -> CommitmentProtocol {
        let gate = ComplexMatrix::from_fn(2, 2, |r, c| match (r, c) {
            (0, 0) => Complex64::new(1.0, 0.0),
            (1, 1) => Complex64::from_polar(1.0, theta),
            _ => Complex64::new(0.0, 0.0),
        });
        CommitmentProtocol::new(
            KrausChannel::identity(2),
            KrausChannel::unitary(&gate).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identical_channels_hide_nothing_from_alice() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let ch = sampling::random_channel(&mut rng, 2, 2, 2);
        let protocol = CommitmentProtocol::new(ch.clone(), ch).unwrap();
        let cfg = OptConfig::with_seed(500);
        let bob = bob_cheat_probability(&protocol, &cfg).unwrap();
        let alice = alice_cheat_lower_bound(&protocol, &cfg).unwrap();
        assert!((bob - 0.5).abs() < 1e-6, "Bob should be guessing, got {bob}");
        assert!((alice - 1.0).abs() < 1e-9, "Alice always wins, got {alice}");
        let report = impossibility_report(&protocol, &cfg).unwrap();
        assert!((report.alice_bound - 1.0).abs() < 1e-9);
        assert!((report.concealment_bound - 1.0).abs() < 1e-6);
        assert!((report.bob_restated - report.concealment_bound).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_outputs_reveal_the_bit() {
        let protocol =
            CommitmentProtocol::new(constant_channel(2, 0), constant_channel(2, 1)).unwrap();
        let cfg = OptConfig::with_seed(501);
        let bob = bob_cheat_probability(&protocol, &cfg).unwrap();
        let alice = alice_cheat_lower_bound(&protocol, &cfg).unwrap();
        assert!((bob - 1.0).abs() < 1e-6, "Bob reads the bit, got {bob}");
        assert!(alice < 1e-9, "Alice cannot flip, got {alice}");
        let report = impossibility_report(&protocol, &cfg).unwrap();
        assert!(report.alice_bound < 1e-9);
        assert!(report.concealment_bound < 1e-6);
    }

    #[test]
    fn quarter_phase_matches_closed_forms() {
        let protocol = phase_protocol(std::f64::consts::FRAC_PI_2);
        let cfg = OptConfig::with_seed(502);
        let bob = bob_cheat_probability(&protocol, &cfg).unwrap();
        let alice = alice_cheat_lower_bound(&protocol, &cfg).unwrap();
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert!(
            (bob - 0.5 * (1.0 + d)).abs() < 1e-3,
            "Bob {bob} vs closed form {}",
            0.5 * (1.0 + d)
        );
        assert!((alice - 0.5).abs() < 1e-3, "Alice {alice} vs 0.5");
    }

    #[test]
    fn chain_holds_on_random_protocols() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for trial in 0..5 {
            let protocol = CommitmentProtocol::new(
                sampling::random_channel(&mut rng, 2, 2, 2),
                sampling::random_channel(&mut rng, 2, 2, 2),
            )
            .unwrap();
            let cfg = OptConfig::with_seed(510 + trial);
            let report = impossibility_report(&protocol, &cfg).unwrap();
            assert!(
                report.slack >= -1e-3,
                "trial {trial}: slack {}",
                report.slack
            );
            assert!((report.bob_restated - report.concealment_bound).abs() < 1e-12);
        }
    }

    #[test]
    fn narrowing_phase_conceals_and_exposes() {
        let cfg = OptConfig::with_seed(54);
        let mut last_bob = 1.0;
        let mut last_alice = 0.0;
        for m in [4u32, 8, 16] {
            let theta = std::f64::consts::PI / f64::from(m);
            let protocol = phase_protocol(theta);
            let bob = bob_cheat_probability(&protocol, &cfg).unwrap();
            let alice = alice_cheat_lower_bound(&protocol, &cfg).unwrap();
            assert!(bob < last_bob, "Bob's edge should shrink with theta");
            assert!(alice > last_alice, "Alice's bound should grow with theta");
            assert!(
                alice >= (2.0 * (1.0 - bob)).powi(2) - 1e-3,
                "restated chain failed at m = {m}: alice {alice}, bob {bob}"
            );
            // Closed forms for the phase family.
            let f = (theta / 2.0).cos();
            let d = (theta / 2.0).sin();
            assert!((alice - f * f).abs() < 1e-3);
            assert!((bob - 0.5 * (1.0 + d)).abs() < 1e-3);
            last_bob = bob;
            last_alice = alice;
        }
    }

    #[test]
    fn protocol_validation() {
        let ok = KrausChannel::identity(2);
        let bigger = KrausChannel::identity(3);
        assert!(matches!(
            CommitmentProtocol::new(ok.clone(), bigger),
            Err(Error::DimensionMismatch(_))
        ));
        let half = ComplexMatrix::from_fn(2, 2, |r, c| {
            if r == c {
                Complex64::new(0.5, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let lossy =
            KrausChannel::new(vec![half], crate::channels::ChannelKind::Operation).unwrap();
        assert!(matches!(
            CommitmentProtocol::new(ok, lossy),
            Err(Error::NotTracePreserving { .. })
        ));
    }
}
