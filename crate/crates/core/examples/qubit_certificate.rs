//! Certifies a qubit channel given only as a Choi matrix by decomposing it
//! into product states.

use ebtkit::channels::{choi_of, random_holevo_with, Channel, ChoiMatrix};
use ebtkit::ebt::classify;
use ebtkit::states::seeded_rng;

fn main() -> ebtkit::Result<()> {
    let mut rng = seeded_rng(3);
    let h = random_holevo_with(&mut rng, 2, 2, 3, 2)?;
    let choi = choi_of(&h);
    let ch = Channel::Choi(ChoiMatrix::new(choi.matrix().clone(), 2, 2)?);
    let verdict = classify(&ch)?;
    println!("verdict: {}", verdict.status());
    if let Some(cert) = verdict.certificate() {
        println!("{} product terms via {}", cert.holevo.len(), cert.source);
        println!("Choi residual {:.2e}", cert.choi_residual);
        for p in cert.holevo.pairs() {
            println!("  Tr F = {:.4}", p.effect.trace().re);
        }
    }
    Ok(())
}
