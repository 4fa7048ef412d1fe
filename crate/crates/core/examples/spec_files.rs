//! Reading and writing the JSON channel format used by the command line.

use ebtkit::channels::{Channel, QuantumChannel};
use ebtkit::cli::format::{builtin, parse_spec, to_canonical_json, ChannelSpec, ChannelSpecFile};

const QC: &str = r#"{
  "ebtkit-spec": 1,
  "type": "qc",
  "povm": [[[0.5, 0], [0, 0]], [[0.5, 0], [0, 1]]],
  "basis": [[1, 0, 0], [0, 1, 0]]
}"#;

fn main() -> ebtkit::Result<()> {
    let qc = parse_spec(QC)?.channel.build()?;
    println!(
        "qc: {} -> {} ({})",
        qc.dim_in(),
        qc.dim_out(),
        qc.representation()
    );
    let tetra = builtin("tetrahedron", None)?;
    let text = to_canonical_json(&ChannelSpecFile::new(ChannelSpec::from_channel(&tetra)));
    print!("{text}");
    let back: Channel = parse_spec(&text)?.channel.build()?;
    println!(
        "Choi distance after round trip: {:.2e}",
        back.choi().matrix().distance(tetra.choi().matrix())
    );
    Ok(())
}
