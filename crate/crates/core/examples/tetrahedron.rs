//! The tetrahedron channel on C^3: entanglement breaking, extreme among such
//! maps, yet neither CQ nor extreme among all channels.
//!
//! ```bash
//! cargo run -p ebtkit --example tetrahedron
//! ```

use ebtkit::channels::Channel;
use ebtkit::ebt::classify;
use ebtkit::extremality::{
    classify_structure, ebt_extremality_hints, tetrahedron_channel, verify_tetrahedron,
};

fn main() -> ebtkit::Result<()> {
    let report = verify_tetrahedron();
    println!("sum (3/4)|v_i><v_i| - I: {:.2e}", report.povm_residual);
    for p in &report.pairs {
        println!(
            "w_{}{}: output residual {:.2e}, rank {}, eigenvalues [{:.4}, {:.4}, {:.4}], complementary overlap {:.2e}",
            p.i, p.j, p.output_residual, p.output_rank,
            p.output_eigenvalues[0], p.output_eigenvalues[1], p.output_eigenvalues[2],
            p.complementary_overlap
        );
    }
    println!("CPT-extreme: {}", report.cpt.cpt_extreme);

    let phi: Channel = tetrahedron_channel().into();
    println!("verdict: {}", classify(&phi)?.status());
    println!("structural class: {}", classify_structure(&phi));
    println!(
        "extreme among EBT maps: {:?}",
        ebt_extremality_hints(&phi)?.hint
    );
    Ok(())
}
