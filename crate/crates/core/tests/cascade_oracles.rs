mod common;

use forgery_kit::cascade::{
    detect_multiscale, eval_window, group_hits, parse_cascade, CascadeError, CascadeModel, DetectParams,
    IntegralPair,
};
use forgery_kit::imaging::{to_grayscale, ImageBuffer, Rect};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;
use proptest::prelude::*;

use common::cascade::{naive_eval, naive_sq_sum, naive_sum, round_len};
use common::{random_gray, REFERENCE_CASCADE};

#[test]
fn rect_sums_match_naive_for_every_rect() {
    let mut rng = DeterministicRng::new(10, 0);
    for _ in 0..200 {
        let (w, h) = (rng.range(1..=16usize), rng.range(1..=16usize));
        let img = random_gray(w, h, &mut rng);
        let ii = IntegralPair::new(&img).unwrap();
        for y in 0..h {
            for x in 0..w {
                for rh in 1..=h - y {
                    for rw in 1..=w - x {
                        let r = Rect::new(x, y, rw, rh);
                        assert_eq!(ii.rect_sum(r), naive_sum(&img, r));
                        assert_eq!(ii.rect_sq_sum(r), naive_sq_sum(&img, r));
                    }
                }
            }
        }
    }
}

fn reference() -> CascadeModel {
    CascadeModel::load(REFERENCE_CASCADE).unwrap()
}

#[test]
fn eval_window_matches_naive_on_reference_model() {
    let model = reference();
    let mut rng = DeterministicRng::new(11, 0);
    let mut images = Vec::new();
    for i in 0..8 {
        let (img, _) = face_like(96, 96, "f", &mut rng);
        images.push(to_grayscale(&img));
        if i % 4 == 0 {
            images.push(random_gray(96, 96, &mut rng));
        }
    }
    let ints: Vec<IntegralPair> = images.iter().map(|i| IntegralPair::new(i).unwrap()).collect();
    let (mut accepted, mut total) = (0, 0);
    while total < 1000 {
        let k = rng.range(0..images.len());
        let s = 1.0 + 2.8 * rng.unit();
        let side = round_len(24, s);
        if side > 96 {
            continue;
        }
        let (x, y) = (rng.range(0..=96 - side), rng.range(0..=96 - side));
        let fast = eval_window(&model, &ints[k], (x, y), s);
        assert_eq!(fast, naive_eval(&model, &images[k], x, y, s), "window ({x},{y}) scale {s}");
        accepted += fast as usize;
        total += 1;
    }
    eprintln!("{accepted}/{total} windows accepted");
}

/// XML for a random cascade with two-level trees (three internal nodes).
fn random_cascade_xml(rng: &mut DeterministicRng) -> String {
    let (ww, wh) = (rng.range(6..=12usize), rng.range(6..=12usize));
    let nfeat = 6;
    let mut feats = String::new();
    for _ in 0..nfeat {
        let mut rects = String::new();
        let n = rng.range(2..=3usize);
        for j in 0..n {
            let w = rng.range(1..=ww);
            let h = rng.range(1..=wh);
            let x = rng.range(0..=ww - w);
            let y = rng.range(0..=wh - h);
            let wt = if j == 0 { -1.0 } else { [2.0, 3.0][rng.range(0..2usize)] };
            rects.push_str(&format!("<_>{x} {y} {w} {h} {wt}</_>"));
        }
        feats.push_str(&format!("<_><rects>{rects}</rects></_>"));
    }
    let mut stages = String::new();
    let nstages = rng.range(1..=4usize);
    for _ in 0..nstages {
        let mut weak = String::new();
        for _ in 0..rng.range(1..=3usize) {
            let t = |rng: &mut DeterministicRng| rng.unit() * 0.4 - 0.2;
            let f = |rng: &mut DeterministicRng| rng.range(0..nfeat);
            // root -> nodes 1 and 2, each with two leaves
            let nodes = format!(
                "1 2 {} {:.6} -0 -1 {} {:.6} -2 -3 {} {:.6}",
                f(rng),
                t(rng),
                f(rng),
                t(rng),
                f(rng),
                t(rng)
            );
            let leaves: Vec<String> = (0..4).map(|_| format!("{:.4}", rng.unit() * 2.0 - 1.0)).collect();
            weak.push_str(&format!(
                "<_><internalNodes>{nodes}</internalNodes><leafValues>{}</leafValues></_>",
                leaves.join(" ")
            ));
        }
        let thr = rng.unit() * 1.0 - 0.8;
        stages.push_str(&format!(
            "<_><maxWeakCount>3</maxWeakCount><stageThreshold>{thr:.5}</stageThreshold><weakClassifiers>{weak}</weakClassifiers></_>"
        ));
    }
    format!(
        "<?xml version=\"1.0\"?><opencv_storage><cascade><stageType>BOOST</stageType><featureType>HAAR</featureType>\
         <height>{wh}</height><width>{ww}</width><stageNum>{nstages}</stageNum><stages>{stages}</stages>\
         <features>{feats}</features></cascade></opencv_storage>"
    )
}

#[test]
fn eval_window_matches_naive_on_random_tree_cascades() {
    let mut rng = DeterministicRng::new(12, 0);
    let mut accepted = 0;
    for _ in 0..100 {
        let xml = random_cascade_xml(&mut rng);
        let model = parse_cascade(xml.as_bytes()).unwrap();
        let img = random_gray(40, 40, &mut rng);
        let ii = IntegralPair::new(&img).unwrap();
        for _ in 0..20 {
            let s = 1.0 + 2.0 * rng.unit();
            let (ww, wh) = (round_len(model.window_w, s), round_len(model.window_h, s));
            let (x, y) = (rng.range(0..=40 - ww), rng.range(0..=40 - wh));
            let fast = eval_window(&model, &ii, (x, y), s);
            assert_eq!(fast, naive_eval(&model, &img, x, y, s));
            accepted += fast as usize;
        }
    }
    assert!(accepted > 0 && accepted < 2000, "degenerate mix: {accepted}");
}

#[test]
fn reference_model_counts_match_text_scan() {
    let text = std::fs::read_to_string(REFERENCE_CASCADE).unwrap();
    let model = reference();
    assert_eq!(model.stages.len(), text.matches("<stageThreshold>").count());
    let weak: usize = model.stages.iter().map(|s| s.weak.len()).sum();
    assert_eq!(weak, text.matches("<internalNodes>").count());
    assert_eq!(model.features.len(), text.matches("<rects>").count());
    assert_eq!((model.window_w, model.window_h), (24, 24));
    let first_thr: f64 = text
        .split("<stageThreshold>")
        .nth(1)
        .and_then(|t| t.split('<').next())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(model.stages[0].threshold, first_thr);
}

#[test]
fn parser_rejects_bad_cascades() {
    let good = include_str!("../data/tiny_cascade.xml");
    assert!(parse_cascade(good.as_bytes()).is_ok());
    assert!(matches!(parse_cascade(b"<opencv_storage><cascade>"), Err(CascadeError::Xml(_))));
    let lbp = good.replace("<featureType>HAAR", "<featureType>LBP");
    assert!(matches!(parse_cascade(lbp.as_bytes()), Err(CascadeError::UnsupportedFeatureType(_))));
    let outside = good.replace("0 0 2 4 2.", "3 0 2 4 2.");
    assert!(matches!(parse_cascade(outside.as_bytes()), Err(CascadeError::RectOutOfWindow { .. })));
    let tilted = good.replace("</rects></_>", "</rects><tilted>1</tilted></_>");
    assert!(matches!(parse_cascade(tilted.as_bytes()), Err(CascadeError::TiltedFeature(0))));
}

#[test]
fn flat_images_have_no_detections() {
    let model = reference();
    for (size, v) in [(24, 0u8), (40, 128), (64, 255), (100, 77), (160, 200)] {
        let img = ImageBuffer::filled(size, size, &[v]).unwrap();
        for min_neighbors in [0, 1, 3] {
            let params = DetectParams {
                min_neighbors,
                min_size: 0,
                ..DetectParams::default()
            };
            assert!(detect_multiscale(&model, &img, &params).unwrap().is_empty());
        }
    }
}

#[test]
fn grouping_examples() {
    let a = Rect::new(10, 10, 30, 30);
    let b = Rect::new(12, 11, 30, 30);
    let far = Rect::new(100, 100, 30, 30);
    let g = group_hits(&[a, b, far], 0.5, 2);
    assert_eq!(g.len(), 1);
    assert_eq!(g[0].neighbors, 2);
    assert_eq!(g[0].rect, Rect::new(11, 11, 30, 30));
    assert_eq!(group_hits(&[a, b, far], 0.5, 1).len(), 2);
}

proptest! {
    #[test]
    fn rect_sum_additivity(w in 2usize..20, h in 1usize..20, seed in any::<u64>(), split_frac in 0.0f64..1.0) {
        let img = random_gray(w, h, &mut DeterministicRng::new(seed, 0));
        let ii = IntegralPair::new(&img).unwrap();
        let split = 1 + ((w - 1) as f64 * split_frac) as usize;
        let split = split.min(w - 1);
        let left = Rect::new(0, 0, split, h);
        let right = Rect::new(split, 0, w - split, h);
        prop_assert_eq!(ii.rect_sum(left) + ii.rect_sum(right), ii.rect_sum(img.full_rect()));
    }

    #[test]
    fn group_count_shrinks_with_min_neighbors(raw in proptest::collection::vec((0usize..60, 0usize..60, 10usize..30), 0..25)) {
        let hits: Vec<Rect> = raw.iter().map(|&(x, y, s)| Rect::new(x, y, s, s)).collect();
        let mut prev = usize::MAX;
        for n in 1..6 {
            let c = group_hits(&hits, 0.5, n).len();
            prop_assert!(c <= prev);
            prev = c;
        }
    }
}
