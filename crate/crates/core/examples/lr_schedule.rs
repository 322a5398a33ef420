// Prints the anchor points of both fine-tuning stages and a gradient clip.

use std::error::Error;

use forgery_kit::schedule::{clip_gradient_norm, emit_schedule, lr_at, StageSchedule};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let steps_per_epoch = 1000;
    let s1 = StageSchedule::stage_one(35, steps_per_epoch);
    let s2 = StageSchedule::stage_two(15, steps_per_epoch);
    for (name, s) in [("stage1", &s1), ("stage2", &s2)] {
        let mid = (s.warmup_steps() + s.total_steps()) / 2;
        println!(
            "{name}: start={:e} peak={:e} mid={:e} end={:e}",
            lr_at(s, 0)?,
            lr_at(s, s.warmup_steps())?,
            lr_at(s, mid)?,
            lr_at(s, s.total_steps())?
        );
    }
    let rows = emit_schedule(&s1, &s2)?;
    println!("{} schedule rows", rows.len());
    println!("clip([6, 8], 5) = {:?}", clip_gradient_norm(&[6.0, 8.0], 5.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
