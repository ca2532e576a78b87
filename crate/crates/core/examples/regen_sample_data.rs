//! Regenerates the bundled sample dataset at `data/sample_flows.csv`.
//!
//! The generator is fully seeded, so rerunning this produces the exact
//! bytes already checked in; it only matters when the generator itself
//! changes. Run from the workspace root:
//!
//! ```text
//! cargo run -p nnids-core --example regen_sample_data
//! ```

use std::path::Path;

fn main() {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample_flows.csv");
    std::fs::write(&out, nnids_core::synth::sample_flow_csv()).expect("write sample dataset");
    println!("wrote {}", out.display());
}
