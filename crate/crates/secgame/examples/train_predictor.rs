//! Training the per-component compromise classifiers that feed the
//! adaptation loop's monitor stage.
//!
//! Each component gets its own small feed-forward network over its sensor
//! readings; a compromised component shifts two of its twenty readings.
//! The classifier's softmax head reports P(compromised), and a threshold
//! derived from the attack's capability turns that into a verdict.

use secgame::efg::fmt_decimal;
use secgame::predictor::{
    apply_threshold, capability_threshold, clf, synthetic_dataset, train, ClfNetwork,
    Hyperparams, SENSOR_DIM,
};
use secgame::Result;

fn main() -> Result<()> {
    let hyper = Hyperparams { epochs: 25, ..Hyperparams::default() };
    println!(
        "network dims {:?}, {} epochs, learning rate {}, batch size {}",
        ClfNetwork::seeded(SENSOR_DIM, hyper.seed)?.dims(),
        hyper.epochs,
        fmt_decimal(hyper.learning_rate),
        hyper.batch_size
    );

    println!("\n== one classifier per component ==");
    let mut nets = Vec::new();
    for (k, name) in ["MV101", "P101"].iter().enumerate() {
        let data = synthetic_dataset(k + 1, 1000, SENSOR_DIM, hyper.seed)?;
        let (net, report) = train(&data, &hyper)?;
        println!(
            "{name}: train accuracy {}, holdout accuracy {} on {} held-out samples",
            fmt_decimal(report.train_accuracy),
            report.holdout_accuracy.map(fmt_decimal).unwrap_or_else(|| "n/a".into()),
            report.holdout_samples
        );
        nets.push(net);
    }

    // The verdict pipeline on two hand-made sensor snapshots.
    println!("\n== thresholded verdicts ==");
    let quiet = vec![vec![0.0; SENSOR_DIM], vec![0.0; SENSOR_DIM]];
    let mut noisy = quiet.clone();
    noisy[1][2] += 3.0; // P101's informative readings shift under attack
    noisy[1][3] += 3.0;
    let threshold = capability_threshold(1, 2);
    println!("capability threshold for one attackable of two components: {threshold}");
    for (label, sensors) in [("all-normal", &quiet), ("P101 attacked", &noisy)] {
        let verdict = clf(&nets, sensors, threshold)?;
        println!(
            "{label:>14}: t = {:?}, p = [{}]",
            verdict.t,
            verdict.p.iter().copied().map(fmt_decimal).collect::<Vec<_>>().join(", ")
        );
    }

    // The threshold rule itself is exact, not fuzzy.
    assert_eq!(apply_threshold(0.9, 0.5), (1, 0.9));
    assert_eq!(apply_threshold(0.5, 0.5), (0, 0.0));
    println!("\nA probability at or below the threshold is zeroed (treated as");
    println!("normal); above it the component is flagged and the probability");
    println!("feeds the knowledge-base query as-is.");

    // Models round-trip through their text format bit-for-bit.
    let text = nets[0].to_text();
    assert_eq!(ClfNetwork::from_text(&text)?.to_text(), text);
    println!("\nmodel file round-trip: ok ({} bytes)", text.len());
    Ok(())
}
