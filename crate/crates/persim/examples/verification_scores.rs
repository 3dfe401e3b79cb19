//! Turn one band's features into genuine/impostor similarity
//! distributions, summary statistics, an EER, and a plottable histogram.
//!
//! Run with: cargo run --example verification_scores

use persim::prelude::*;

fn main() -> Result<()> {
    let band = BandSpec::decile(6)?;
    let dataset = generate_band(&band, 500, RngSeed::new(11))?;

    // Score a random 20-of-50 feature subset, as in the band sweep.
    let subset = subset_sample(dataset.feature_names(), 20, 1, RngSeed::new(12))?.remove(0);
    let scores = score_pairs(&dataset, &subset)?;

    let genuine = distribution_summary(&scores.genuine)?;
    let impostor = distribution_summary(&scores.impostor)?;
    let roc = roc_eer(&scores)?;
    println!(
        "band 6, {} genuine / {} impostor scores",
        genuine.count, impostor.count
    );
    println!(
        "genuine : median {:.3}, IQR {:.3}",
        genuine.median, genuine.iqr
    );
    println!(
        "impostor: median {:.3}, IQR {:.3}",
        impostor.median, impostor.iqr
    );
    println!(
        "EER {:.2}% at threshold {:.4}",
        roc.eer * 100.0,
        roc.eer_threshold
    );

    // Text rendering of the score histogram.
    let hist = export_score_histograms(&scores, 25)?;
    println!("\n     bin        genuine   impostor");
    for b in 0..hist.genuine.len() {
        let bar = |p: f64| "#".repeat((p * 120.0).round() as usize);
        println!(
            "[{:.2},{:.2})  {:>8.3} {:>9.3}  {}",
            hist.bin_edges[b],
            hist.bin_edges[b + 1],
            hist.genuine[b],
            hist.impostor[b],
            bar(hist.impostor[b])
        );
    }
    Ok(())
}
