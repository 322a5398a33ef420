// Landmark sidecar round trip, facial-region boxes and a region cutout.

use std::error::Error;

use forgery_kit::landmarks::{region_bbox, LandmarkStore, RegionTable, DEFAULT_PAD};
use forgery_kit::recipes::{cutout_regions, CutoutParams};
use forgery_kit::synth::face_like;
use forgery_kit::DeterministicRng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = tempfile::tempdir()?;
    let (img, lms) = face_like(128, 128, "person_01.png", &mut DeterministicRng::new(1, 0));

    // one record per line: image name followed by 136 coordinates
    let mut store = LandmarkStore::default();
    store.insert(lms.clone());
    let sidecar = dir.path().join("person_01.txt");
    store.save(&sidecar)?;
    let reloaded = LandmarkStore::load(&sidecar)?;
    assert_eq!(reloaded.get("person_01.png"), Some(&lms));

    let table = RegionTable::default();
    for region in table.regions() {
        let r = region_bbox(&lms, region, DEFAULT_PAD, img.width(), img.height())?;
        println!("{:>14}: x={} y={} w={} h={}", region.name, r.x, r.y, r.w, r.h);
    }

    let params = CutoutParams::default();
    let (out, erased) = cutout_regions(&img, &lms, &table, &params, &mut DeterministicRng::new(1, 1))?;
    for e in &erased {
        println!("erased {} at {:?} with {:?}", e.name, e.rect, e.color);
    }
    out.save(dir.path().join("cutout.png"))?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
