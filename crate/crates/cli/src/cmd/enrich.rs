use anyhow::{bail, Context, Result};
use windowlens::analysis::{enrichment, write_enrichment_tsv, EnrichmentResult};
use windowlens::benchmarks::band_partition;

use crate::report::{provenance, read_to_string, write_file};
use crate::{EnrichArgs, UsageError};

/// Rows of `name n_related related_same n_unrelated unrelated_same`,
/// tab-separated; `#` comments and a `benchmark` header line are skipped.
fn read_counts(text: &str) -> Result<Vec<EnrichmentResult>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') || line.starts_with("benchmark\t") {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 5 {
            bail!("line {}: expected 5 tab-separated fields", i + 1);
        }
        let n = |j: usize| -> Result<u64> {
            f[j].trim().parse().with_context(|| format!("line {}: bad count {:?}", i + 1, f[j]))
        };
        rows.push(EnrichmentResult::from_counts(f[0], n(1)?, n(2)?, n(3)?, n(4)?).with_context(|| format!("line {}", i + 1))?);
    }
    Ok(rows)
}

pub fn run(a: EnrichArgs) -> Result<()> {
    let rows = match &a.counts {
        Some(path) => {
            read_counts(&read_to_string(path, "counts")?).with_context(|| format!("in {}", path.display()))?
        }
        None => {
            if a.benchmarks.is_empty() {
                return Err(UsageError("give --benchmark or --counts".into()).into());
            }
            let lex = a.lexicon.load()?;
            let mut rows = Vec::new();
            for arg in &a.benchmarks {
                let b = arg.load()?;
                let bands = band_partition(&b).with_context(|| format!("benchmark {}", b.name))?;
                rows.push(enrichment(&b, &bands, &lex).with_context(|| format!("benchmark {}", b.name))?);
            }
            rows
        }
    };
    let mut bytes = provenance("enrich", None).into_bytes();
    write_enrichment_tsv(&mut bytes, &rows)?;
    write_file(&a.out, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_fixture() {
        let rows = read_counts("# c\nbenchmark\tn\nWS\t122\t107\t53\t40\n").unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].p_value - 0.038).abs() < 0.001);
        assert!(read_counts("WS\t1\t2\n").is_err());
    }
}
