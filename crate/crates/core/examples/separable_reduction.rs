//! Shrinks a redundant product decomposition of a rank-d separable state to
//! at most d terms.

use ebtkit::ebt::{random_redundant_decomposition, reduce_decomposition};
use ebtkit::linalg::relative_rank;
use ebtkit::states::seeded_rng;

fn main() -> ebtkit::Result<()> {
    let mut rng = seeded_rng(5);
    for (d, k) in [(2, 3), (2, 4), (3, 4), (3, 6)] {
        let dec = random_redundant_decomposition(&mut rng, d, k)?;
        let rho = dec.reconstruct();
        let reduced = reduce_decomposition(&dec)?;
        let weights: Vec<String> = reduced
            .terms()
            .iter()
            .map(|t| format!("{:.4}", t.weight))
            .collect();
        println!(
            "d = {d}, rank {}: {} terms -> {} (residual {:.2e}), weights [{}]",
            relative_rank(&rho, 1e-9),
            dec.len(),
            reduced.len(),
            reduced.residual(&rho),
            weights.join(", ")
        );
    }
    Ok(())
}
