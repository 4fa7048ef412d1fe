//! Holevo -> Kraus -> Choi -> Kraus -> Holevo for a random measure-and-prepare
//! channel, checking that every form acts identically.

use ebtkit::channels::{
    choi_of, kraus_from_choi, kraus_from_holevo, random_holevo_with, Channel, QuantumChannel,
};
use ebtkit::ebt::classify;
use ebtkit::states::{random_density_with, seeded_rng};

fn main() -> ebtkit::Result<()> {
    let mut rng = seeded_rng(11);
    let holevo = random_holevo_with(&mut rng, 3, 3, 3, 1)?;
    let kraus = kraus_from_holevo(&holevo);
    let choi = choi_of(&kraus);
    let canonical = kraus_from_choi(&choi)?;
    println!(
        "Holevo branches {}, Kraus operators {} -> canonical {}",
        holevo.len(),
        kraus.len(),
        canonical.len()
    );

    // the Choi matrix alone has rank above d here, outside the regime the
    // product decomposition covers
    println!(
        "Choi-only verdict: {}",
        classify(&Channel::Choi(choi))?.status()
    );
    let verdict = classify(&Channel::Holevo(holevo.clone()))?;
    let Some(cert) = verdict.certificate() else {
        unreachable!("Holevo input always carries a certificate")
    };
    println!(
        "certificate: {} rank-one branches from the {}",
        cert.holevo.len(),
        cert.source
    );

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let rho = random_density_with(&mut rng, 3, 3)?;
        let reference = holevo.map(rho.matrix())?;
        for other in [
            kraus.map(rho.matrix())?,
            canonical.map(rho.matrix())?,
            cert.holevo.map(rho.matrix())?,
        ] {
            worst = worst.max(other.distance(&reference));
        }
    }
    println!("largest output discrepancy over 20 states: {worst:.2e}");
    Ok(())
}
