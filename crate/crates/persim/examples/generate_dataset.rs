//! Generate a synthetic two-session dataset and write it as CSV.
//!
//! Run with: cargo run --example generate_dataset

use persim::prelude::*;
use persim::stats;

fn main() -> Result<()> {
    let n_subjects = 500;
    let n_features = 10;
    let icc_target = 0.7;
    let dataset = generate_feature_set(n_subjects, n_features, icc_target, RngSeed::new(42))?;

    println!(
        "generated {} subjects x {} features x {} sessions (target ICC {icc_target})",
        dataset.n_subjects(),
        dataset.n_features(),
        dataset.session_ids().len()
    );
    for j in 0..dataset.n_features() {
        let col = dataset.feature_column(j);
        let mean = stats::mean(col);
        let sd = stats::population_sd(col, mean);
        println!(
            "  {}: mean {mean:+.2e}, sd {sd:.12}",
            dataset.feature_names()[j]
        );
    }

    let path = std::env::temp_dir().join("persim_example_dataset.csv");
    persim::io::write_dataset(&dataset, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
