//! Report files: provenance header and atomic-enough writing.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

/// Flags that only choose where output goes or how work is scheduled; left
/// out of the header so such reruns produce identical bytes.
const OUTPUT_FLAGS: [&str; 4] = ["--out", "--out-dir", "--lexicon-out", "--jobs"];

/// `# windowlens <version> <command> seed=<seed> flags: ...`
pub fn provenance(command: &str, seed: Option<u64>) -> String {
    let mut flags = Vec::new();
    let mut args = std::env::args().skip(1).peekable();
    while let Some(a) = args.next() {
        if a == command && flags.is_empty() {
            continue;
        }
        if OUTPUT_FLAGS.contains(&a.as_str()) {
            args.next();
            continue;
        }
        if OUTPUT_FLAGS.iter().any(|f| a.starts_with(&format!("{f}="))) {
            continue;
        }
        flags.push(a.replace(['\n', '\t'], " "));
    }
    let seed = seed.map_or("none".to_string(), |s| s.to_string());
    format!(
        "# windowlens {} {command} seed={seed} flags: {}\n",
        env!("CARGO_PKG_VERSION"),
        flags.join(" ")
    )
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_to_string(path: &Path, what: &str) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {what} {}", path.display()))
}
