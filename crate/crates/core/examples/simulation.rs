//! Measure-and-prepare Monte Carlo for the tetrahedron channel.

use ebtkit::channels::{simulate_measure_prepare, QuantumChannel};
use ebtkit::extremality::tetrahedron_channel;
use ebtkit::linalg::trace_distance;
use ebtkit::states::random_density;

fn main() -> ebtkit::Result<()> {
    let phi = tetrahedron_channel();
    let rho = random_density(3, 1, 42)?;
    let exact = phi.apply(&rho)?;
    println!(
        "outcome probabilities: {:.4?}",
        phi.outcome_probabilities(&rho)?
    );
    for n in [1_000, 10_000, 100_000, 400_000] {
        let sim = simulate_measure_prepare(&phi, &rho, n, 7)?;
        let dist = trace_distance(sim.empirical.matrix(), exact.matrix())?;
        println!(
            "N = {n:>7}: counts {:?}, trace distance {dist:.5}",
            sim.outcome_counts
        );
    }
    Ok(())
}
