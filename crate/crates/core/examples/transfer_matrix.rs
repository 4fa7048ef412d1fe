//! Transfer matrices in the generalized Gell-Mann basis and the factorization
//! T = W U^T of a measure-and-prepare channel.

use ebtkit::basis::{bloch_vector, gell_mann_basis, transfer_matrix, wu_factorization};
use ebtkit::channels::{cq_channel, QuantumChannel};
use ebtkit::extremality::tetrahedron_channel;
use ebtkit::linalg::basis_vector;
use ebtkit::states::{random_density, PureState};

fn main() -> ebtkit::Result<()> {
    let basis = gell_mann_basis(3)?;
    let phi = tetrahedron_channel();
    let t = transfer_matrix(&phi, &basis)?;
    println!("tetrahedron T:{:.4}", t.matrix());
    println!(
        "rank {}, first-row residual {:.2e}",
        t.rank(),
        t.first_row_residual()
    );

    let wu = wu_factorization(&phi, &basis)?;
    println!("|W U^T - T|_F = {:.2e}", (wu.product() - t.matrix()).norm());

    let rho = random_density(3, 2, 1)?;
    let w = bloch_vector(&rho, &basis)?;
    let out = bloch_vector(&phi.apply(&rho)?, &basis)?;
    let mapped = t.apply(&w);
    let err = out
        .iter()
        .zip(&mapped)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("Bloch vector of Phi(rho) vs T w: {err:.2e}");

    let basis_states: Vec<PureState> = (0..3)
        .map(|k| PureState::new(basis_vector(3, k)))
        .collect::<Result<_, _>>()?;
    let cq = cq_channel(
        (0..3)
            .map(|k| random_density(3, 3, 10 + k))
            .collect::<Result<_, _>>()?,
        &basis_states,
    )?;
    println!(
        "CQ channel: rank(T) = {} <= d = 3",
        transfer_matrix(&cq, &basis)?.rank()
    );
    Ok(())
}
