//! Per-layer output shapes of the two reference networks.
//!
//! ```text
//! cargo run --example conv_shapes
//! ```

use strokebench::cli::shape_table;
use strokebench::model::{Arch, NetworkSpec};

pub fn run() -> strokebench::Result<()> {
    for arch in [Arch::V1, Arch::V2] {
        let spec = NetworkSpec::default_for(arch);
        println!("{arch}: {} attention blocks, {} parameter tensors", spec.attention_blocks(), spec.param_shapes()?.len());
        print!("{}", shape_table(&spec)?);
        println!();
    }
    // A reduced V2 for 32x32 frames and 16-frame clips.
    let small = NetworkSpec::v2([3, 16, 32, 32], &[8, 16], 5)?;
    print!("{}", shape_table(&small)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> strokebench::Result<()> {
    run()
}
