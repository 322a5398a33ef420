// Applies each of the six offline recipes to one synthetic face and saves
// the results next to the source.

use std::error::Error;

use forgery_kit::recipes::{Recipe, RecipeInput, RecipeParams};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let mut rng = DeterministicRng::new(7, 0);
    let (img, lms) = face_like(200, 200, "face.png", &mut rng);
    img.save(dir.path().join("face.png"))?;

    let input = RecipeInput {
        source_id: "face.png",
        image: &img,
        landmarks: Some(&lms),
    };
    let params = RecipeParams::default();
    for (i, recipe) in Recipe::ALL.into_iter().enumerate() {
        let mut rng = DeterministicRng::new(7, 100 + i as u64);
        let sample = recipe.apply(&input, &params, &mut rng)?;
        let out = dir.path().join(format!("{recipe}.png"));
        sample.image.save(&out)?;
        println!(
            "{recipe:>8}: {}x{}x{} params={}",
            sample.image.width(),
            sample.image.height(),
            sample.image.channels(),
            sample.params_used
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
