// Draws a handful of online augmentations and tallies how often each op fires.

use std::error::Error;

use forgery_kit::recipes::{apply_online, draw_online, OnlinePolicy, PolicyOp};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (img, _) = face_like(300, 300, "src.png", &mut DeterministicRng::new(5, 0));
    let policy = OnlinePolicy::default();

    let mut rng = DeterministicRng::new(5, 1);
    for _ in 0..4 {
        let draw = draw_online(&policy, &mut rng);
        let out = apply_online(&img, &policy, &draw)?;
        assert_eq!((out.width(), out.height()), (policy.size, policy.size));
        println!("{draw:?}");
    }

    let (mut flips, mut inverts, mut contrasts, mut rotations) = (0, 0, 0, 0);
    let n = 10_000;
    for _ in 0..n {
        let d = draw_online(&policy, &mut rng);
        flips += d.flip as usize;
        match d.op {
            PolicyOp::Invert { applied } => inverts += applied as usize,
            PolicyOp::Contrast { .. } => contrasts += 1,
            PolicyOp::Rotate { .. } => rotations += 1,
        }
    }
    println!("over {n} draws: flip={flips} invert={inverts} contrast={contrasts} rotate={rotations}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
