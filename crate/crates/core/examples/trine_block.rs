//! The trine4 quantum-classical channel: a trine POVM on span{g1, g2} and a
//! block projection on span{g3, g4}.

use ebtkit::channels::{kraus_from_holevo, Channel};
use ebtkit::ebt::classify;
use ebtkit::extremality::{classify_structure, cpt_extremality, trine_block_channel};

fn main() -> ebtkit::Result<()> {
    let h = trine_block_channel();
    println!("POVM completeness residual: {:.2e}", h.tp_residual());
    for (k, f) in h.effects().enumerate() {
        println!("F_{} trace {:.4}", k + 1, f.trace().re);
    }
    let ch: Channel = h.clone().into();
    println!("structural class: {}", classify_structure(&ch));
    println!("verdict: {}", classify(&ch)?.status());
    println!(
        "CPT-extreme: {}",
        cpt_extremality(&kraus_from_holevo(&h)).cpt_extreme
    );
    Ok(())
}
