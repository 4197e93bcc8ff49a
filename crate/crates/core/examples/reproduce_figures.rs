//! Regenerate both figure data sets at reduced size into a temporary
//! directory and list what was written.

use kifid::harness::commands::{cmd_reproduce, Figure, Overrides};

fn main() -> kifid::Result<()> {
    let root = std::env::temp_dir().join("kifid-figures");
    for (figure, name) in [(Figure::Fig1, "fig1"), (Figure::Fig2, "fig2")] {
        let overrides = Overrides { output_dir: Some(root.join(name)), samples: Some(4), ..Default::default() };
        let outcome = cmd_reproduce(figure, &overrides, false, Some(vec![10]))?;
        println!("{name}: {} files, manifest {}", outcome.manifest.outputs.len(), outcome.manifest_path.display());
        for out in outcome.manifest.outputs.iter().filter(|o| o.path.extension().is_some_and(|e| e == "csv")) {
            println!("  {} {} bytes sha256 {}", out.path.display(), out.bytes, &out.sha256[..16]);
        }
        if outcome.unresolved {
            println!("  some series are UNRESOLVED at this size");
        }
    }
    Ok(())
}
