// End-to-end batch run: write a tiny labelled corpus with landmark
// sidecars, execute a plan over it and verify the manifest.

use std::error::Error;

use forgery_kit::landmarks::LandmarkStore;
use forgery_kit::pipeline::{execute_plan, scan_dataset, verify_manifest, GenerationPlan};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;

const PLAN: &str = r#"
master_seed = 2024

[[entry]]
recipe = "cutout"
count = 6
source = "fake"

[[entry]]
recipe = "crop"
count = 2
[entry.params]
crop_size = 100
out_size = 128

[[entry]]
recipe = "binarize"
count = 3
stage = 2
"#;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let images = dir.path().join("images");
    let marks = dir.path().join("landmarks");
    std::fs::create_dir_all(&images)?;
    std::fs::create_dir_all(&marks)?;

    let mut labels = String::from("image_id,label\n");
    let mut rng = DeterministicRng::new(9, 0);
    for i in 0..8 {
        let name = format!("img_{i:03}.png");
        let (img, lms) = face_like(160, 160, &name, &mut rng);
        img.save(images.join(&name))?;
        let mut store = LandmarkStore::default();
        store.insert(lms);
        store.save(marks.join(format!("img_{i:03}.txt")))?;
        labels.push_str(&format!("{name},{}\n", if i % 2 == 0 { "real" } else { "fake" }));
    }
    let labels_path = dir.path().join("labels.csv");
    std::fs::write(&labels_path, labels)?;

    let plan = GenerationPlan::parse(PLAN)?;
    let index = scan_dataset(&images, &labels_path)?;
    let store = LandmarkStore::load(&marks)?;
    let out = dir.path().join("out");
    let manifest = execute_plan(&plan, &index, &store, &out, 2)?;

    for (recipe, n) in manifest.counts_by_recipe() {
        println!("{recipe}: {n}");
    }
    let check = verify_manifest(&out)?;
    println!("manifest ok: {} samples, {} skips", check.samples, check.skips);
    for r in manifest.samples().take(3) {
        println!("{} <- {} reused={}", r.output.as_deref().unwrap_or("-"), r.source_id, r.reused);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
