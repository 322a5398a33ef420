use roxmltree::{Document, Node};

use super::{CascadeError, CascadeModel, HaarFeature, HaarRect, Stage, TreeNode, WeakClassifier};
use crate::imaging::Rect;

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|c| c.is_element() && c.has_tag_name(name))
}

fn req_child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Result<Node<'a, 'i>, CascadeError> {
    child(node, name).ok_or_else(|| CascadeError::Malformed(format!("missing <{name}>")))
}

fn items<'a, 'i>(node: Node<'a, 'i>) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children().filter(|c| c.is_element() && c.has_tag_name("_"))
}

fn text<'a>(node: Node<'a, '_>) -> &'a str {
    node.text().unwrap_or("").trim()
}

fn numbers(node: Node<'_, '_>, what: &str) -> Result<Vec<f64>, CascadeError> {
    text(node)
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CascadeError::Malformed(format!("bad number `{t}` in {what}")))
        })
        .collect()
}

fn int(node: Node<'_, '_>, name: &str) -> Result<usize, CascadeError> {
    let n = req_child(node, name)?;
    text(n)
        .parse()
        .map_err(|_| CascadeError::Malformed(format!("<{name}> is not an integer")))
}

/// Parses the BOOST/HAAR cascade serialization (stages of weak-classifier
/// trees given as `internalNodes`/`leafValues`, features as weighted rects).
pub fn parse_cascade(xml: &[u8]) -> Result<CascadeModel, CascadeError> {
    let text_doc = std::str::from_utf8(xml).map_err(|e| CascadeError::Xml(e.to_string()))?;
    let doc = Document::parse(text_doc).map_err(|e| CascadeError::Xml(e.to_string()))?;
    let cascade = doc
        .descendants()
        .find(|n| n.is_element() && n.has_tag_name("cascade"))
        .ok_or_else(|| CascadeError::Malformed("no <cascade> element".into()))?;

    if child(cascade, "stages").is_none() && child(cascade, "stageType").is_none() {
        return Err(CascadeError::Malformed("legacy or unknown cascade layout".into()));
    }
    let stage_type = text(req_child(cascade, "stageType")?);
    if stage_type != "BOOST" {
        return Err(CascadeError::UnsupportedStageType(stage_type.to_string()));
    }
    let feature_type = text(req_child(cascade, "featureType")?);
    if feature_type != "HAAR" {
        return Err(CascadeError::UnsupportedFeatureType(feature_type.to_string()));
    }
    let window_w = int(cascade, "width")?;
    let window_h = int(cascade, "height")?;
    if window_w < 3 || window_h < 3 {
        return Err(CascadeError::Malformed(format!("window {window_w}x{window_h} too small")));
    }

    let features = parse_features(req_child(cascade, "features")?, window_w, window_h)?;

    let mut stages = Vec::new();
    for (si, stage) in items(req_child(cascade, "stages")?).enumerate() {
        let threshold = numbers(req_child(stage, "stageThreshold")?, "stageThreshold")?
            .first()
            .copied()
            .ok_or_else(|| CascadeError::Malformed(format!("stage {si} has no threshold")))?;
        let mut weak = Vec::new();
        for (wi, wc) in items(req_child(stage, "weakClassifiers")?).enumerate() {
            let ctx = || format!("stage {si} weak classifier {wi}");
            let raw = numbers(req_child(wc, "internalNodes")?, "internalNodes")?;
            let leaves = numbers(req_child(wc, "leafValues")?, "leafValues")?;
            if raw.is_empty() || raw.len() % 4 != 0 {
                return Err(CascadeError::Malformed(format!("{}: internalNodes not a multiple of 4", ctx())));
            }
            let mut nodes = Vec::with_capacity(raw.len() / 4);
            for q in raw.chunks_exact(4) {
                let feature = q[2] as usize;
                if q[2] < 0.0 || q[2].fract() != 0.0 || feature >= features.len() {
                    return Err(CascadeError::Malformed(format!("{}: bad feature index {}", ctx(), q[2])));
                }
                nodes.push(TreeNode {
                    left: q[0] as i32,
                    right: q[1] as i32,
                    feature,
                    threshold: q[3],
                });
            }
            // every child reference must resolve to a node or a leaf
            for n in &nodes {
                for c in [n.left, n.right] {
                    let ok = if c > 0 {
                        (c as usize) < nodes.len()
                    } else {
                        ((-c) as usize) < leaves.len()
                    };
                    if !ok {
                        return Err(CascadeError::Malformed(format!("{}: dangling child {c}", ctx())));
                    }
                }
            }
            weak.push(WeakClassifier { nodes, leaves });
        }
        if weak.is_empty() {
            return Err(CascadeError::Malformed(format!("stage {si} has no weak classifiers")));
        }
        stages.push(Stage { threshold, weak });
    }
    if stages.is_empty() {
        return Err(CascadeError::Malformed("cascade has no stages".into()));
    }
    if let Some(n) = child(cascade, "stageNum") {
        let declared: usize = text(n)
            .parse()
            .map_err(|_| CascadeError::Malformed("<stageNum> is not an integer".into()))?;
        if declared != stages.len() {
            return Err(CascadeError::Malformed(format!(
                "<stageNum> says {declared} but {} stages present",
                stages.len()
            )));
        }
    }

    Ok(CascadeModel {
        window_w,
        window_h,
        stages,
        features,
    })
}

fn parse_features(node: Node<'_, '_>, ww: usize, wh: usize) -> Result<Vec<HaarFeature>, CascadeError> {
    let mut out = Vec::new();
    for (fi, f) in items(node).enumerate() {
        if let Some(t) = child(f, "tilted") {
            if text(t) != "0" {
                return Err(CascadeError::TiltedFeature(fi));
            }
        }
        let mut rects = Vec::new();
        for r in items(req_child(f, "rects")?) {
            let v = numbers(r, "rects")?;
            if v.len() != 5 {
                return Err(CascadeError::Malformed(format!("feature {fi}: rect needs 5 values")));
            }
            if v[..4].iter().any(|c| *c < 0.0 || c.fract() != 0.0) {
                return Err(CascadeError::Malformed(format!("feature {fi}: non-integer rect")));
            }
            let rect = Rect::new(v[0] as usize, v[1] as usize, v[2] as usize, v[3] as usize);
            if rect.w == 0 || rect.h == 0 || rect.right() > ww || rect.bottom() > wh {
                return Err(CascadeError::RectOutOfWindow { feature: fi, rect });
            }
            rects.push(HaarRect { rect, weight: v[4] });
        }
        if !(2..=3).contains(&rects.len()) {
            return Err(CascadeError::Malformed(format!(
                "feature {fi} has {} rects, expected 2 or 3",
                rects.len()
            )));
        }
        out.push(HaarFeature { rects });
    }
    Ok(out)
}
