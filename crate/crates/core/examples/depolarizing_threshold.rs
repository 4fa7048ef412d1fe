//! Sweeps the qubit depolarizing channel through its entanglement-breaking
//! threshold at lambda = 1/3.

use ebtkit::basis::{ebt_diag_necessary, gell_mann_basis, transfer_matrix};
use ebtkit::channels::{depolarizing, Channel};
use ebtkit::ebt::classify;

fn main() -> ebtkit::Result<()> {
    let basis = gell_mann_basis(2)?;
    println!(
        "{:>6}  {:>8}  {:>12}  {:>9}  witness",
        "lambda", "verdict", "min PT eig", "sum|t_jj|"
    );
    for lambda in [0.0, 0.1, 0.2, 0.33, 1.0 / 3.0, 0.34, 0.5, 1.0] {
        let ch: Channel = depolarizing(2, lambda)?.into();
        let verdict = classify(&ch)?;
        let (_, diag) = ebt_diag_necessary(&transfer_matrix(&ch, &basis)?)?;
        let witness = verdict.witness().map(|w| w.test_name()).unwrap_or("-");
        println!(
            "{lambda:>6.4}  {:>8}  {:>12.4e}  {diag:>9.4}  {witness}",
            verdict.status().to_string(),
            verdict.diagnostics().min_pt_eigenvalue
        );
    }
    Ok(())
}
