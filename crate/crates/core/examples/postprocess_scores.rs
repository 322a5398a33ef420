// Corrects a small score table using detector boxes and landmarks.

use std::error::Error;

use forgery_kit::cascade::{Detection, DetectionReport};
use forgery_kit::landmarks::LandmarkStore;
use forgery_kit::postprocess::{batch_correct, write_corrected, CorrectionPolicy, ScoreRow};
use forgery_kit::synth::face_like;
use forgery_kit::{DeterministicRng, Rect};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rows: Vec<ScoreRow> = [("a.png", 0.50), ("b.png", 0.55), ("c.png", 0.99), ("d.png", 0.45)]
        .into_iter()
        .map(|(id, score)| ScoreRow {
            image_id: id.to_string(),
            score,
        })
        .collect();

    let mut report = DetectionReport::default();
    report.insert("a.png", vec![]);
    report.insert("b.png", vec![Detection { rect: Rect::new(20, 20, 100, 100), neighbors: 6 }]);
    report.insert("c.png", vec![]);
    // d.png was never run through the detector

    let (_, lms) = face_like(140, 140, "b.png", &mut DeterministicRng::new(3, 0));
    let mut store = LandmarkStore::default();
    store.insert(lms);

    let table = batch_correct(&rows, &report, &store, &CorrectionPolicy::default())?;
    let mut out = Vec::new();
    write_corrected(&mut out, &table)?;
    print!("{}", String::from_utf8(out)?);
    println!("{}", table.summary);
    assert_eq!(table.records[0].corrected_score, 0.6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
