//! Event-by-event coincidence sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{run_teleport, InputQubit, NoiseModel};
use crate::error::{Error, Result};
use crate::tomography::{
    allocate_events, projective_probabilities, Basis, CountsMetadata, CountsRecord, DetectorCounts,
    GENERATOR_ID,
};

/// Samples `n_events` coincidences analysed in a single basis.
pub fn monte_carlo_run(
    input: &InputQubit,
    noise: &NoiseModel,
    n_events: u64,
    seed: u64,
    analysis_basis: Basis,
) -> Result<CountsRecord> {
    sample(input, noise, &[(analysis_basis, n_events)], n_events, seed)
}

/// Samples `n_events` coincidences split evenly across H/V, D/A and R/L, in
/// that order, from one generator stream.
pub fn monte_carlo_tomography(
    input: &InputQubit,
    noise: &NoiseModel,
    n_events: u64,
    seed: u64,
) -> Result<CountsRecord> {
    sample(input, noise, &allocate_events(n_events), n_events, seed)
}

fn sample(
    input: &InputQubit,
    noise: &NoiseModel,
    plan: &[(Basis, u64)],
    n_events: u64,
    seed: u64,
) -> Result<CountsRecord> {
    if n_events < 1 {
        return Err(Error::NoEvents);
    }
    let result = run_teleport(input, noise)?;
    let probs = result.branch_probs();

    // p_plus[branch][basis] for each corrected Bob state.
    let mut p_plus = [[0.0; 3]; 4];
    for (row, branch) in p_plus.iter_mut().zip(&result.branches) {
        if let Some(rho) = &branch.corrected_state {
            for basis in Basis::ALL {
                row[basis.index()] = projective_probabilities(rho, basis)?.0;
            }
        }
    }
    let last_possible = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut detectors = DetectorCounts::default();
    let mut branch_counts = [0u64; 4];
    for &(basis, count) in plan {
        for _ in 0..count {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut branch = last_possible;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    branch = i;
                    break;
                }
            }
            branch_counts[branch] += 1;
            let plus = rng.random::<f64>() < p_plus[branch][basis.index()];
            detectors.record(basis, plus);
        }
    }
    Ok(CountsRecord {
        detectors,
        branch_counts,
        metadata: CountsMetadata {
            seed,
            n_events,
            generator: GENERATOR_ID.to_string(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_state_lands_in_one_detector() {
        let input = InputQubit::new(1.0, 0.0).unwrap();
        let counts = monte_carlo_run(&input, &NoiseModel::ideal(), 10_000, 1, Basis::HV).unwrap();
        assert_eq!(counts.detectors.pair(Basis::HV), (10_000, 0));
        assert_eq!(counts.branch_counts.iter().sum::<u64>(), 10_000);
    }

    #[test]
    fn balanced_state_splits_evenly() {
        let n = 100_000;
        let input = InputQubit::new(0.5, 0.0).unwrap();
        let counts = monte_carlo_run(&input, &NoiseModel::ideal(), n, 2024, Basis::HV).unwrap();
        let frac = counts.detectors.h as f64 / n as f64;
        let sigma = 0.5 / (n as f64).sqrt();
        assert!((frac - 0.5).abs() < 3.0 * sigma, "{frac}");
    }

    #[test]
    fn limited_visibility_lowers_diagonal_contrast() {
        let n = 100_000;
        let input = InputQubit::new(0.5, 0.0).unwrap();
        let noise = NoiseModel::new(1.0, 0.83, 0.0).unwrap();
        let counts = monte_carlo_run(&input, &noise, n, 77, Basis::DA).unwrap();
        let frac = counts.detectors.d as f64 / n as f64;
        let sigma = (0.915 * 0.085 / n as f64).sqrt();
        assert!((frac - 0.915).abs() < 3.0 * sigma, "{frac}");
    }

    #[test]
    fn same_seed_same_record() {
        let input = InputQubit::new(0.3, 1.0).unwrap();
        let noise = NoiseModel::new(0.95, 0.8, 0.1).unwrap();
        let a = monte_carlo_tomography(&input, &noise, 5_000, 9).unwrap();
        let b = monte_carlo_tomography(&input, &noise, 5_000, 9).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = monte_carlo_tomography(&input, &noise, 5_000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tomography_allocation_is_even() {
        let input = InputQubit::new(0.3, 1.0).unwrap();
        let counts = monte_carlo_tomography(&input, &NoiseModel::ideal(), 10, 0).unwrap();
        let sizes: Vec<u64> = Basis::ALL
            .iter()
            .map(|&b| {
                let (p, m) = counts.detectors.pair(b);
                p + m
            })
            .collect();
        assert_eq!(sizes, vec![4, 3, 3]);
    }

    #[test]
    fn zero_events_is_an_error() {
        let input = InputQubit::new(0.3, 1.0).unwrap();
        assert_eq!(
            monte_carlo_run(&input, &NoiseModel::ideal(), 0, 0, Basis::HV).unwrap_err(),
            Error::NoEvents
        );
    }
}
