//! Estimate variance components and ICC per feature, then partition the
//! features into decile persistence bands.
//!
//! Run with: cargo run --example icc_estimation

use persim::prelude::*;

fn main() -> Result<()> {
    // Features of very different persistence in one dataset.
    let targets: Vec<(f64, String)> = [0.05, 0.25, 0.45, 0.65, 0.85, 0.95]
        .iter()
        .enumerate()
        .map(|(j, &t)| (t, format!("target{t:.2}_f{j}")))
        .collect();
    let dataset = persim::synth::generate_named_features(2000, &targets, RngSeed::new(7))?;

    let estimates = estimate_icc(&dataset)?;
    println!("feature            var_subj  var_sess  var_err   icc");
    for e in &estimates {
        println!(
            "{:<18} {:>8.4} {:>9.6} {:>8.4} {:>6.3}",
            e.feature_name,
            e.components.var_subject,
            e.components.var_session,
            e.components.var_error,
            e.icc
        );
    }

    let partition = band_partition(&estimates, &decile_edges())?;
    println!("\nband counts (decile edges):");
    for (band, count) in &partition.counts {
        println!("  band {band}: {count}");
    }
    Ok(())
}
