//! Extremality of CQ and QC channels among all channels.

use ebtkit::channels::{cq_channel, kraus_from_holevo, qc_channel};
use ebtkit::extremality::cpt_extremality;
use ebtkit::linalg::basis_vector;
use ebtkit::states::{random_povm, random_pure_state, DensityMatrix, PureState};

fn main() -> ebtkit::Result<()> {
    let basis: Vec<PureState> = (0..3)
        .map(|k| PureState::new(basis_vector(3, k)))
        .collect::<Result<_, _>>()?;

    let psis: Vec<PureState> = (0..3).map(|k| random_pure_state(3, k)).collect();
    let cq = cq_channel(psis.iter().map(DensityMatrix::pure).collect(), &basis)?;
    let report = cpt_extremality(&kraus_from_holevo(&cq));
    println!(
        "extreme CQ, generic states: CPT-extreme {} (sigma_min {:.3e})",
        report.cpt_extreme, report.gram_min_singular_value
    );
    if let Some(g) = &report.cq_overlap_matrix {
        println!("  |<psi_0|psi_1>| = {:.4}", g[(0, 1)].norm());
    }

    // psi_1 orthogonal to psi_0
    let mut planted = psis.clone();
    planted[1] = PureState::new(basis_vector(3, 0))?;
    planted[0] = PureState::new(basis_vector(3, 1))?;
    let cq = cq_channel(planted.iter().map(DensityMatrix::pure).collect(), &basis)?;
    let report = cpt_extremality(&kraus_from_holevo(&cq));
    println!(
        "one orthogonal pair: CPT-extreme {} (sigma_min {:.3e})",
        report.cpt_extreme, report.gram_min_singular_value
    );

    let qc = qc_channel(&random_povm(3, 3, 1)?, &basis)?;
    let report = cpt_extremality(&kraus_from_holevo(&qc));
    println!(
        "QC channel ({}): CPT-extreme {}",
        report.structural_class, report.cpt_extreme
    );
    Ok(())
}
