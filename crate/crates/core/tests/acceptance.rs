//! The eight acceptance criteria, run in order. Each prints one PASS/FAIL
//! line; the test fails if any criterion does.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use forgery_kit::cascade::{detect_multiscale, eval_window, CascadeModel, DetectParams, IntegralPair};
use forgery_kit::imaging::{to_grayscale, ImageBuffer, Rect};
use forgery_kit::landmarks::LandmarkStore;
use forgery_kit::pipeline::{execute_plan, scan_dataset, verify_manifest, GenerationPlan, PlanEntry, RunManifest};
use forgery_kit::postprocess::{CorrectionPolicy, Evidence};
use forgery_kit::recipes::{draw_online, draw_region_selection, draw_threshold, BinarizeParams, OnlinePolicy, Recipe};
use forgery_kit::schedule::{clip_gradient_norm, lr_at, StageSchedule};
use forgery_kit::synth::{face_like, noise_rgb};
use forgery_kit::DeterministicRng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use common::cascade::{naive_eval, naive_sq_sum, naive_sum, round_len};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plan_of(seed: u64, entries: &[(Recipe, usize)]) -> GenerationPlan {
    let mut plan = GenerationPlan::parse(&format!("master_seed = {seed}\n")).unwrap();
    plan.entries = entries.iter().map(|&(r, n)| PlanEntry::new(r, n)).collect();
    plan
}

fn plan_fidelity() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = common::build_corpus(dir.path(), 1000, 160, 2024);
    let index = scan_dataset(&corpus.images, &corpus.labels).map_err(|e| e.to_string())?;
    let store = LandmarkStore::load(&corpus.landmarks).map_err(|e| e.to_string())?;
    let plan = GenerationPlan::default_mix(7, 100);
    let want: BTreeMap<Recipe, usize> = plan.entries.iter().map(|e| (e.recipe, e.count)).collect();
    check(
        want == BTreeMap::from([
            (Recipe::Cutout, 400),
            (Recipe::Crop, 100),
            (Recipe::Overlay, 100),
            (Recipe::Cartoon, 100),
            (Recipe::Sketch, 50),
            (Recipe::Binarize, 50),
        ]),
        || format!("scaled plan is {want:?}"),
    )?;

    let mut snaps = Vec::new();
    let mut slowest = Duration::ZERO;
    for (run, workers) in [(0, 1), (1, 8), (2, 1)] {
        let out = dir.path().join(format!("run{run}"));
        let t = Instant::now();
        let m = execute_plan(&plan, &index, &store, &out, workers).map_err(|e| e.to_string())?;
        slowest = slowest.max(t.elapsed());
        check(m.counts_by_recipe() == want, || format!("counts {:?}", m.counts_by_recipe()))?;
        let v = verify_manifest(&out).map_err(|e| e.to_string())?;
        check(v.samples == 800, || format!("{} samples", v.samples))?;
        check(RunManifest::load(&out).map_err(|e| e.to_string())?.records == m.records, || {
            "manifest on disk differs from the returned one".into()
        })?;
        snaps.push(common::snapshot(&out));
    }
    check(snaps[0] == snaps[1], || "workers 1 and 8 differ".into())?;
    check(snaps[0] == snaps[2], || "two runs at workers 1 differ".into())?;
    check(slowest < Duration::from_secs(120), || format!("slowest run took {slowest:?}"))?;
    Ok(format!("800 samples, {} files identical across 3 runs, slowest run {slowest:.1?}", snaps[0].len()))
}

fn recipe_identities() -> Outcome {
    let mut n = 0;
    for i in 0..50u64 {
        let mut rng = DeterministicRng::new(31, i);
        let size = 96 + 8 * (i as usize % 5);
        let (face, lms) = face_like(size, size, "p.png", &mut rng);
        let img = match i % 3 {
            0 => face,
            1 => to_grayscale(&face),
            _ => noise_rgb(size, size, &mut rng),
        };
        common::check_recipe_identities(&img, &lms, i).map_err(|e| format!("image {i}: {e}"))?;
        n += 1;
    }
    Ok(format!("{n}/50 images"))
}

fn probabilistic_contracts() -> Outcome {
    const N: u64 = 10_000;
    let policy = OnlinePolicy::default();
    let flips = (0..N).filter(|&i| draw_online(&policy, &mut DeterministicRng::new(77, i)).flip).count();
    let flip_rate = flips as f64 / N as f64;
    check((0.48..=0.52).contains(&flip_rate), || format!("hflip rate {flip_rate}"))?;

    let params = BinarizeParams::default();
    let mut bins = [0u64; 41];
    for i in 0..N {
        let t = draw_threshold(&params, &mut DeterministicRng::new(78, i));
        check((108..=148).contains(&t), || format!("threshold {t} out of range"))?;
        bins[(t - 108) as usize] += 1;
    }
    let expected = N as f64 / 41.0;
    let chi2: f64 = bins.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let p = 1.0 - ChiSquared::new(40.0).unwrap().cdf(chi2);
    check(p > 0.01, || format!("chi-square {chi2:.2}, p = {p:.4}"))?;

    let (mut picked, mut total) = (0u64, 0u64);
    for i in 0..N {
        let sel = draw_region_selection(6, 0.5, true, &mut DeterministicRng::new(79, i)).map_err(|e| e.to_string())?;
        picked += sel.iter().filter(|&&b| b).count() as u64;
        total += sel.len() as u64;
    }
    let rate = picked as f64 / total as f64;
    check((rate - 0.5).abs() <= 0.02, || format!("cutout selection rate {rate}"))?;
    Ok(format!("hflip {flip_rate:.4}, binarize chi2 p={p:.3}, cutout rate {rate:.4}"))
}

fn cascade_equivalence() -> Outcome {
    let mut rng = DeterministicRng::new(10, 0);
    let mut rects = 0u64;
    for _ in 0..200 {
        let (w, h) = (rng.range(1..=16usize), rng.range(1..=16usize));
        let img = common::random_gray(w, h, &mut rng);
        let ii = IntegralPair::new(&img).map_err(|e| e.to_string())?;
        for y in 0..h {
            for x in 0..w {
                for rh in 1..=h - y {
                    for rw in 1..=w - x {
                        let r = Rect::new(x, y, rw, rh);
                        check(ii.rect_sum(r) == naive_sum(&img, r), || format!("sum {r:?}"))?;
                        check(ii.rect_sq_sum(r) == naive_sq_sum(&img, r), || format!("sq sum {r:?}"))?;
                        rects += 1;
                    }
                }
            }
        }
    }

    let model = CascadeModel::load(common::REFERENCE_CASCADE).map_err(|e| e.to_string())?;
    let mut images = Vec::new();
    for i in 0..8 {
        let (img, _) = face_like(96, 96, "f", &mut rng);
        images.push(to_grayscale(&img));
        if i % 4 == 0 {
            images.push(common::random_gray(96, 96, &mut rng));
        }
    }
    let ints: Vec<IntegralPair> = images.iter().map(|i| IntegralPair::new(i).unwrap()).collect();
    let (mut accepted, mut windows) = (0, 0);
    while windows < 1000 {
        let k = rng.range(0..images.len());
        let s = 1.0 + 2.8 * rng.unit();
        let side = round_len(24, s);
        if side > 96 {
            continue;
        }
        let (x, y) = (rng.range(0..=96 - side), rng.range(0..=96 - side));
        let fast = eval_window(&model, &ints[k], (x, y), s);
        check(fast == naive_eval(&model, &images[k], x, y, s), || format!("window ({x},{y}) scale {s}"))?;
        accepted += fast as usize;
        windows += 1;
    }

    let text = std::fs::read_to_string(common::REFERENCE_CASCADE).map_err(|e| e.to_string())?;
    let scanned = text.matches("<stageThreshold>").count();
    check(model.stages.len() == scanned, || format!("{} stages parsed, {scanned} in file", model.stages.len()))?;
    Ok(format!("{rects} rects, {windows} windows ({accepted} accepted), {scanned} stages"))
}

fn detector_sanity() -> Outcome {
    let model = CascadeModel::load(common::REFERENCE_CASCADE).map_err(|e| e.to_string())?;
    let params = DetectParams::default();
    for v in [0u8, 37, 128, 255] {
        let flat = ImageBuffer::filled(160, 120, &[v, v, v]).unwrap();
        let d = detect_multiscale(&model, &flat, &params).map_err(|e| e.to_string())?;
        check(d.is_empty(), || format!("{} detections on flat {v}", d.len()))?;
    }

    let mut faces_found = 0;
    for i in 0..100u64 {
        let mut rng = DeterministicRng::new(55, i);
        let img = if i % 4 == 3 { noise_rgb(96, 96, &mut rng) } else { face_like(96, 96, "f", &mut rng).0 };
        let mut prev = usize::MAX;
        for mn in 0..=5 {
            let p = DetectParams {
                min_neighbors: mn,
                ..params.clone()
            };
            let a = detect_multiscale(&model, &img, &p).map_err(|e| e.to_string())?;
            check(a.len() <= prev, || format!("image {i}: {} boxes at min_neighbors {mn}, {prev} before", a.len()))?;
            if mn == 3 {
                let b = detect_multiscale(&model, &img, &p).map_err(|e| e.to_string())?;
                check(a == b, || format!("image {i}: rerun differs"))?;
                faces_found += !a.is_empty() as usize;
            }
            prev = a.len();
        }
    }
    Ok(format!("flat images clean, monotone over 100 images ({faces_found} with faces at defaults)"))
}

fn postprocess_properties() -> Outcome {
    let evidence = [Evidence::NoFace, Evidence::ConsistentFace, Evidence::Mixed, Evidence::Missing];
    let mut policies = 0;
    for &(tau, delta) in &[(0.15, 0.10), (0.15, 0.15), (0.15, -0.15), (0.05, 0.01), (0.49, 0.3)] {
        let p = CorrectionPolicy::new(tau, delta).map_err(|e| e.to_string())?;
        for ev in evidence {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=10_000 {
                let s = i as f64 / 10_000.0;
                let c = p.apply(s, ev);
                if (s - 0.5).abs() >= tau {
                    check(c == s, || format!("τ={tau} δ={delta} {ev:?}: {s} moved to {c}"))?;
                }
                check(c >= prev, || format!("τ={tau} δ={delta} {ev:?}: not monotone at {s}"))?;
                check((0.0..=1.0).contains(&c), || format!("{c} out of range"))?;
                prev = c;
            }
        }
        policies += 1;
    }
    let d = CorrectionPolicy::default().apply(0.5, Evidence::NoFace);
    check(d == 0.6, || format!("(0.5, no face) -> {d}"))?;
    Ok(format!("{policies} policies × 4 evidence kinds × 10001 points, (0.5, no face) -> {d}"))
}

fn schedule_reproduction() -> Outcome {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let s = StageSchedule::stage_one(35, 1000);
    let anchors = [(0, 5e-8), (s.warmup_steps(), 5e-5), (s.total_steps(), 5e-7)];
    for (step, want) in anchors {
        let got = lr_at(&s, step).map_err(|e| e.to_string())?;
        check(rel(got, want) <= 1e-12, || format!("step {step}: {got} vs {want}"))?;
    }

    let w = s.warmup_steps() as f64;
    let gap = rel(s.lr_continuous(w - 1e-6), s.lr_continuous(w));
    check(gap < 1e-9, || format!("warmup boundary gap {gap}"))?;

    let t_end = s.total_steps() as f64;
    let mut worst: f64 = 0.0;
    for k in 1..100 {
        let t = w + (t_end - w) * k as f64 / 100.0;
        let h = 1e-2;
        let fd = (s.lr_continuous(t + h) - s.lr_continuous(t - h)) / (2.0 * h);
        let exact = -0.5 * (5e-5 - 5e-7) * PI / (t_end - w) * (PI * (t - w) / (t_end - w)).sin();
        worst = worst.max(rel(fd, exact));
    }
    check(worst <= 1e-6, || format!("derivative rel error {worst:e}"))?;

    let c = clip_gradient_norm(&[6.0, 8.0], 5.0).map_err(|e| e.to_string())?;
    check(c == vec![3.0, 4.0], || format!("clip gave {c:?}"))?;
    Ok(format!("anchors exact, boundary gap {gap:.1e}, derivative rel err {worst:.1e}, clip [3, 4]"))
}

fn binarize_throughput() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let images = dir.path().join("images");
    std::fs::create_dir_all(&images).map_err(|e| e.to_string())?;
    let mut labels = String::from("image_id,label\n");
    for i in 0..40u64 {
        let (img, _) = face_like(512, 512, "t", &mut DeterministicRng::new(90, i));
        img.save(images.join(format!("{i:03}.png"))).map_err(|e| e.to_string())?;
        labels.push_str(&format!("{i:03}.png,real\n"));
    }
    let labels_path = dir.path().join("labels.csv");
    std::fs::write(&labels_path, labels).map_err(|e| e.to_string())?;
    let index = scan_dataset(&images, &labels_path).map_err(|e| e.to_string())?;

    let n = 240;
    let out = dir.path().join("out");
    let t = Instant::now();
    execute_plan(&plan_of(3, &[(Recipe::Binarize, n)]), &index, &LandmarkStore::default(), &out, 4)
        .map_err(|e| e.to_string())?;
    let rate = n as f64 / t.elapsed().as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |c| c.get());
    check(rate >= 30.0, || format!("{rate:.1} images/s ({cores} cores available)"))?;
    Ok(format!("{rate:.1} images/s at 512x512, 4 workers, {cores} cores available"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("1 dataset-plan fidelity", plan_fidelity),
        ("2 recipe analytic identities", recipe_identities),
        ("3 probabilistic contracts", probabilistic_contracts),
        ("4 integral/cascade oracle equivalence", cascade_equivalence),
        ("5 detector sanity", detector_sanity),
        ("6 post-processing properties", postprocess_properties),
        ("7 schedule reproduction", schedule_reproduction),
        ("8 throughput floor", binarize_throughput),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
