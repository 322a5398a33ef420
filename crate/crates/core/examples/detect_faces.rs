// Runs the bundled frontal-face cascade over a few synthetic images and
// prints the detection report.

use std::error::Error;

use forgery_kit::cascade::{detect_multiscale, CascadeModel, DetectParams, DetectionReport};
use forgery_kit::synth::face_like;
use forgery_kit::{DeterministicRng, ImageBuffer};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/haarcascade_frontalface_default.xml");
    let model = CascadeModel::load(path)?;
    println!(
        "cascade: {} stages, {} features, window {}x{}",
        model.stages.len(),
        model.features.len(),
        model.window_w,
        model.window_h
    );

    let params = DetectParams::default();
    let mut report = DetectionReport::default();

    let flat = ImageBuffer::filled(160, 160, &[128, 128, 128])?;
    let dets = detect_multiscale(&model, &flat, &params)?;
    assert!(dets.is_empty(), "flat image produced detections");
    report.insert("flat.png", dets);

    let mut rng = DeterministicRng::new(42, 0);
    for i in 0..3 {
        let (img, _) = face_like(160, 160, "face", &mut rng);
        let dets = detect_multiscale(&model, &img, &params)?;
        report.insert(format!("face_{i}.png"), dets);
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
