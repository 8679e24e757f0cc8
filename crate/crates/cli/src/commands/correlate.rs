//! `ceat correlate`: Pearson correlation between two score files, with
//! per-text deviations.

use std::path::Path;

use anyhow::Context;
use ceat_core::evaluation::compare_scores;

use super::{canonical, read_scores};
use crate::config::RunConfig;

pub fn run(config: &RunConfig, left: &Path, right: &Path) -> anyhow::Result<()> {
    let comparison = compare_scores(&read_scores(left)?, &read_scores(right)?)
        .context("cannot correlate the score files")?;

    println!(
        "r = {:.4} over {} texts",
        comparison.pearson.r, comparison.pearson.n_points
    );
    for delta in &comparison.deltas {
        println!(
            "{}: {:.4} vs {:.4} (delta {:.4})",
            delta.corpus_id, delta.gt_score, delta.extracted_score, delta.delta
        );
    }

    if let Some(out) = &config.out {
        std::fs::write(out, canonical(&comparison)?)
            .with_context(|| format!("cannot write {}", out.display()))?;
    }
    Ok(())
}
