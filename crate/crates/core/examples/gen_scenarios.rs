//! Regenerates the bundled scenario files from the built-in definitions.
//!
//! Usage: cargo run -p morphoevo-core --example gen_scenarios [DIR]

use std::path::PathBuf;

use morphoevo_core::scenario::Scenario;

fn main() {
    let dir: PathBuf =
        std::env::args().nth(1).unwrap_or_else(|| "scenarios".into()).into();
    std::fs::create_dir_all(&dir).expect("create output dir");
    for name in ["channel", "channel2", "compound"] {
        let path = dir.join(format!("{name}.scn"));
        Scenario::builtin(name).unwrap().save(&path).expect("write scenario");
        println!("wrote {}", path.display());
    }
}
