// Shows the intermediate layers of the cartoon recipe: the edge mask, the
// k-means palette and the final composite.

use std::error::Error;

use forgery_kit::imaging::kmeans_quantize;
use forgery_kit::recipes::{cartoon_layers, CartoonParams};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (img, _) = face_like(120, 120, "src.png", &mut DeterministicRng::new(11, 0));
    let params = CartoonParams::default();
    let layers = cartoon_layers(&img, &params, &mut DeterministicRng::new(11, 1))?;
    let edge_px = layers.edges.data().iter().filter(|&&v| v == 0).count();
    println!("edge pixels: {edge_px} of {}", img.width() * img.height());
    println!("output colors: {}", layers.output.distinct_colors());

    let q = kmeans_quantize(&img, 4, 20, &mut DeterministicRng::new(11, 2))?;
    println!("k=4 palette {:?} after {} iterations", q.palette, q.iterations);
    println!("error history {:?}", q.error_history);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
