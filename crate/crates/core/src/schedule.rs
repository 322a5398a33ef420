//! Two-stage fine-tuning schedule: linear warmup then cosine decay, evaluated
//! per optimizer step, plus the AdamW hyperparameter bundle and gradient-norm
//! clipping.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub eps: f64,
    pub betas: (f64, f64),
    pub weight_decay: f64,
    pub grad_clip: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            eps: 1e-8,
            betas: (0.9, 0.999),
            weight_decay: 0.1,
            grad_clip: 5.0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let (b1, b2) = self.betas;
        if !(self.eps > 0.0) || !(0.0 < b1 && b1 < b2 && b2 < 1.0) || !(self.grad_clip > 0.0) {
            return Err(Error::param(format!("invalid optimizer config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSchedule {
    pub warmup_epochs: u64,
    pub base_lr: f64,
    pub warmup_lr: f64,
    pub min_lr: f64,
    pub total_epochs: u64,
    pub steps_per_epoch: u64,
}

impl StageSchedule {
    /// First fine-tuning stage: 5 warmup epochs, 5e-8 → 5e-5, decaying to 5e-7.
    pub fn stage_one(total_epochs: u64, steps_per_epoch: u64) -> Self {
        Self {
            warmup_epochs: 5,
            base_lr: 5e-5,
            warmup_lr: 5e-8,
            min_lr: 5e-7,
            total_epochs,
            steps_per_epoch,
        }
    }

    /// Second stage: 5 warmup epochs, 5e-9 → 5e-6, decaying back to 5e-9.
    pub fn stage_two(total_epochs: u64, steps_per_epoch: u64) -> Self {
        Self {
            warmup_epochs: 5,
            base_lr: 5e-6,
            warmup_lr: 5e-9,
            min_lr: 5e-9,
            total_epochs,
            steps_per_epoch,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.base_lr) && pos(self.warmup_lr) && pos(self.min_lr)) {
            return Err(Error::param("learning rates must be positive"));
        }
        if self.warmup_lr > self.base_lr || self.min_lr > self.base_lr {
            return Err(Error::param("warmup_lr and min_lr must not exceed base_lr"));
        }
        if self.warmup_epochs >= self.total_epochs {
            return Err(Error::param(format!(
                "warmup_epochs ({}) must be below total_epochs ({})",
                self.warmup_epochs, self.total_epochs
            )));
        }
        if self.steps_per_epoch == 0 {
            return Err(Error::param("steps_per_epoch must be positive"));
        }
        Ok(())
    }

    pub fn warmup_steps(&self) -> u64 {
        self.warmup_epochs * self.steps_per_epoch
    }

    pub fn total_steps(&self) -> u64 {
        self.total_epochs * self.steps_per_epoch
    }

    /// Schedule at a continuous step position `t` (no range check).
    pub fn lr_continuous(&self, t: f64) -> f64 {
        let w = self.warmup_steps() as f64;
        if t < w {
            self.warmup_lr + (self.base_lr - self.warmup_lr) * t / w
        } else {
            let progress = (t - w) / (self.total_steps() as f64 - w);
            self.min_lr + 0.5 * (self.base_lr - self.min_lr) * (1.0 + (PI * progress).cos())
        }
    }
}

/// Learning rate at an integer step in `0..=total_steps`.
pub fn lr_at(sched: &StageSchedule, step: u64) -> Result<f64> {
    sched.validate()?;
    if step > sched.total_steps() {
        return Err(Error::param(format!(
            "step {step} beyond schedule end {}",
            sched.total_steps()
        )));
    }
    Ok(sched.lr_continuous(step as f64))
}

/// Rescales `grads` so its L2 norm is at most `max_norm`.
pub fn clip_gradient_norm(grads: &[f64], max_norm: f64) -> Result<Vec<f64>> {
    if !(max_norm > 0.0) {
        return Err(Error::param(format!("max_norm must be positive, got {max_norm}")));
    }
    if let Some(bad) = grads.iter().find(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite gradient entry {bad}")));
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm <= max_norm {
        return Ok(grads.to_vec());
    }
    let k = max_norm / norm;
    Ok(grads.iter().map(|g| g * k).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub stage: u8,
    pub epoch: u64,
    /// Step within the stage; each stage restarts at 0.
    pub step: u64,
    pub lr: f64,
}

/// Both stages back to back, each covering steps `0..=total_steps`.
pub fn emit_schedule(stage1: &StageSchedule, stage2: &StageSchedule) -> Result<Vec<ScheduleRow>> {
    let mut rows = Vec::new();
    for (n, s) in [(1u8, stage1), (2u8, stage2)] {
        s.validate()?;
        for step in 0..=s.total_steps() {
            rows.push(ScheduleRow {
                stage: n,
                epoch: step / s.steps_per_epoch,
                step,
                lr: s.lr_continuous(step as f64),
            });
        }
    }
    Ok(rows)
}

/// CSV `stage,epoch,step,lr` preceded by `#` comment lines carrying the
/// optimizer config and both stage definitions.
pub fn write_schedule_csv<W: Write>(
    mut w: W,
    opt: &OptimizerConfig,
    stage1: &StageSchedule,
    stage2: &StageSchedule,
) -> Result<()> {
    opt.validate()?;
    let rows = emit_schedule(stage1, stage2)?;
    let io = |e| Error::io("<schedule>", e);
    writeln!(w, "# optimizer: adamw {}", json(opt)).map_err(io)?;
    writeln!(w, "# stage1: {}", json(stage1)).map_err(io)?;
    writeln!(w, "# stage2: {}", json(stage2)).map_err(io)?;
    writeln!(w, "stage,epoch,step,lr").map_err(io)?;
    for r in rows {
        writeln!(w, "{},{},{},{:e}", r.stage, r.epoch, r.step, r.lr).map_err(io)?;
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain structs serialize")
}
