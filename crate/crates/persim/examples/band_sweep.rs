//! Reduced-scale band sweep: how the genuine score distribution and the
//! EER move as feature persistence rises band by band, while the impostor
//! distribution stays put.
//!
//! Run with: cargo run --release --example band_sweep
//! (The full-scale sweep lives behind `persim sweep --config default`.)

use persim::prelude::*;

fn main() -> Result<()> {
    let config = SweepConfig {
        n_subjects: 300,
        n_repeats: 5,
        ..SweepConfig::default()
    };
    let report = run_band_sweep(&config)?;

    println!("band  genuine_median  impostor_median  genuine_iqr  impostor_iqr   eer%");
    for b in &report.per_band {
        println!(
            "{:>4} {:>15.3} {:>16.3} {:>12.3} {:>13.3} {:>6.2}",
            b.band,
            b.genuine_median.median,
            b.impostor_median.median,
            b.genuine_iqr.median,
            b.impostor_iqr.median,
            b.eer_percent.median
        );
    }
    println!(
        "\n({} repeats of {}-of-50 features per band, {} subjects)",
        config.n_repeats, config.subset_size, config.n_subjects
    );
    Ok(())
}
