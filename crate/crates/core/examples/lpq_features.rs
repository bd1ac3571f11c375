//! Preprocess one synthetic image and print its LPQ histogram summary,
//! with and without decorrelation.

use swarmsel::dataset::{synth_generate, SynthConfig};
use swarmsel::imaging::{preprocess, PreprocessConfig};
use swarmsel::lpq::{LpqConfig, LpqExtractor};

fn main() -> swarmsel::Result<()> {
    let synth = SynthConfig { n_classes: 2, samples_per_class: 2, ..Default::default() };
    let (images, labels) = synth_generate(&synth)?;
    let img = preprocess(&images[0], &PreprocessConfig::default());
    println!("class {} image, {}x{} after preprocessing", labels.labels()[0], img.width(), img.height());

    for decorrelate in [false, true] {
        let extractor = LpqExtractor::new(&LpqConfig { decorrelate, ..Default::default() })?;
        let codes = extractor.codes(&img)?;
        let hist = extractor.extract(&img)?;
        let mut top: Vec<(usize, f64)> = hist.histogram.iter().copied().enumerate().collect();
        top.sort_by(|a, b| b.1.total_cmp(&a.1));
        println!(
            "decorrelate={decorrelate}: {}x{} codes, sum={:.6}, top bins {:?}",
            codes.width,
            codes.height,
            hist.histogram.iter().sum::<f64>(),
            &top[..4].iter().map(|(b, p)| format!("{b}:{p:.3}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
