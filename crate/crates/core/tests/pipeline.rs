use std::collections::HashMap;

use image::{Rgb, RgbImage};
use lightkit::annotation::{LightAnnotation, LightPosition, SceneAnnotation, VehicleInstance};
use lightkit::curation::{
    augment_reflect, compute_stats, curate, manifest_text, read_manifest, write_manifest,
    CropApproach, CurateOptions, DatasetManifest,
};
use lightkit::geometry::{BoxTlbr, CornerSet, PixelPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn textured(w: u32, h: u32, seed: u8) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        Rgb([(x % 251) as u8 | 1, (y % 241) as u8 | 1, seed.wrapping_add((x * 7 + y * 3) as u8) | 1])
    })
}

/// Random scenes with fully specified corner geometry, some lights near edges.
fn synthetic(seed: u64, n_scenes: usize) -> (Vec<SceneAnnotation>, HashMap<String, RgbImage>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::new();
    let mut images = HashMap::new();
    for s in 0..n_scenes {
        let (w, h) = (rng.random_range(200..400u32), rng.random_range(150..300u32));
        let mut vehicles = Vec::new();
        for v in 0..rng.random_range(1..4) {
            let vw = rng.random_range(40.0..(w as f64 * 0.8));
            let vh = rng.random_range(30.0..(h as f64 * 0.8));
            let x0 = rng.random_range(0.0..(w as f64 - vw));
            let y0 = rng.random_range(0.0..(h as f64 - vh));
            let bbox = BoxTlbr::from_coords(x0, y0, x0 + vw, y0 + vh);
            let mut lights = Vec::new();
            for p in LightPosition::ALL {
                if rng.random_bool(0.3) {
                    lights.push(LightAnnotation::hidden(p));
                    continue;
                }
                let lw = rng.random_range(2.0..(vw / 3.0).min(40.0));
                let lh = rng.random_range(2.0..(vh / 3.0).min(30.0));
                let lx = rng.random_range(x0..(x0 + vw - lw));
                let ly = rng.random_range(y0..(y0 + vh - lh));
                let pts = [
                    PixelPoint::new(lx, ly),
                    PixelPoint::new(lx + lw, ly + rng.random_range(-1.0..1.0f64).max(-ly + y0)),
                    PixelPoint::new(lx, ly + lh),
                    PixelPoint::new(lx + lw, ly + lh),
                ];
                let mut visible: Vec<bool> = (0..4).map(|_| rng.random_bool(0.8)).collect();
                if !visible.contains(&true) {
                    visible[rng.random_range(0..4)] = true;
                }
                let corners = CornerSet::new(pts.iter().map(|&q| Some(q)).collect(), visible).unwrap();
                let center = rng
                    .random_bool(0.5)
                    .then(|| PixelPoint::new(lx + lw / 2.0, ly + lh / 2.0));
                lights.push(LightAnnotation {
                    visible: true,
                    center,
                    corners: Some(corners),
                    ..LightAnnotation::hidden(p)
                });
            }
            vehicles.push(VehicleInstance {
                vehicle_id: format!("v{v}"),
                bbox,
                lights,
            });
        }
        let path = format!("img/{s:03}.png");
        images.insert(path.clone(), textured(w, h, s as u8));
        scenes.push(SceneAnnotation {
            scene_id: format!("scene{s:03}"),
            image_path: path,
            width: w,
            height: h,
            vehicles,
        });
    }
    (scenes, images)
}

fn visible_lights(scenes: &[SceneAnnotation]) -> usize {
    scenes
        .iter()
        .flat_map(|s| &s.vehicles)
        .flat_map(|v| &v.lights)
        .filter(|l| l.visible)
        .count()
}

fn run(scenes: &[SceneAnnotation], images: &HashMap<String, RgbImage>, approach: CropApproach, workers: usize) -> DatasetManifest {
    curate(scenes, &CurateOptions { approach, workers }, images, "synthetic").unwrap()
}

#[test]
fn one_sample_per_visible_light_under_both_approaches() {
    let (scenes, images) = synthetic(1, 12);
    let a = run(&scenes, &images, CropApproach::VehicleOnly, 2);
    let b = run(&scenes, &images, CropApproach::SceneContext, 2);
    assert_eq!(a.samples.len(), visible_lights(&scenes));
    assert_eq!(a.samples.len(), b.samples.len());
    assert!(a.samples.iter().all(|s| s.crop.dimensions() == (128, 128)));
    let ids_a: Vec<_> = a.samples.iter().map(|s| &s.record.sample_id).collect();
    let ids_b: Vec<_> = b.samples.iter().map(|s| &s.record.sample_id).collect();
    assert_eq!(ids_a, ids_b);
    // vehicle boxes are smaller than the scene, so at least one crop differs
    assert!(a.samples.iter().zip(&b.samples).any(|(x, y)| x.crop != y.crop));
}

#[test]
fn worker_count_never_changes_output() {
    let (scenes, images) = synthetic(2, 10);
    let one = run(&scenes, &images, CropApproach::VehicleOnly, 1);
    let many = run(&scenes, &images, CropApproach::VehicleOnly, 4);
    assert_eq!(manifest_text(&one), manifest_text(&many));
    assert_eq!(one, many);
}

#[test]
fn offsets_match_independent_recomputation() {
    let (scenes, images) = synthetic(3, 15);
    for approach in [CropApproach::VehicleOnly, CropApproach::SceneContext] {
        let m = run(&scenes, &images, approach, 0);
        for s in &m.samples {
            let r = &s.record;
            let scene = scenes.iter().find(|x| x.scene_id == r.scene_id).unwrap();
            let vehicle = scene.vehicles.iter().find(|v| v.vehicle_id == r.vehicle_id).unwrap();
            let light = &vehicle.lights[r.light_index];
            let corners = light.corners.as_ref().unwrap();
            let visible_pts: Vec<PixelPoint> = (0..4).filter(|&i| corners.visible[i]).map(|i| corners.corners[i].unwrap()).collect();
            let center = light.center.unwrap_or_else(|| {
                let n = visible_pts.len() as f64;
                PixelPoint::new(
                    visible_pts.iter().map(|p| p.x).sum::<f64>() / n,
                    visible_pts.iter().map(|p| p.y).sum::<f64>() / n,
                )
            });
            let (ox, oy) = match approach {
                CropApproach::VehicleOnly => (
                    vehicle.bbox.top_left.x.floor().max(0.0),
                    vehicle.bbox.top_left.y.floor().max(0.0),
                ),
                CropApproach::SceneContext => (0.0, 0.0),
            };
            let round = |v: f64| {
                let f = v.floor();
                if v - f > 0.5 { f + 1.0 } else { f }
            };
            let (wx, wy) = (round(center.x - ox) - 64.0, round(center.y - oy) - 64.0);
            assert_eq!(r.center, [(wx + 64.0 + ox) as i64, (wy + 64.0 + oy) as i64]);
            for i in 0..4 {
                let (x, y) = (r.offsets[2 * i], r.offsets[2 * i + 1]);
                if !corners.visible[i] {
                    assert_eq!((x.to_bits(), y.to_bits()), (0, 0), "{}", r.sample_id);
                    assert!(!r.corner_visible[i]);
                    continue;
                }
                let q = corners.corners[i].unwrap();
                let ex = (((q.x - ox) - wx - 64.0) / 64.0).clamp(-1.0, 1.0);
                let ey = (((q.y - oy) - wy - 64.0) / 64.0).clamp(-1.0, 1.0);
                assert!((x - ex).abs() <= 1e-12, "{} x{i}: {x} vs {ex}", r.sample_id);
                assert!((y - ey).abs() <= 1e-12, "{} y{i}: {y} vs {ey}", r.sample_id);
            }
        }
    }
}

#[test]
fn scene_context_center_pixel_lands_at_64() {
    let (scenes, images) = synthetic(4, 8);
    let m = run(&scenes, &images, CropApproach::SceneContext, 0);
    for s in &m.samples {
        let [cx, cy] = s.record.center;
        let scene = scenes.iter().find(|x| x.scene_id == s.record.scene_id).unwrap();
        if cx >= 0 && cy >= 0 && (cx as u32) < scene.width && (cy as u32) < scene.height {
            let img = &images[&scene.image_path];
            assert_eq!(s.crop.get_pixel(64, 64), img.get_pixel(cx as u32, cy as u32));
        }
    }
}

#[test]
fn manifest_round_trips_through_disk() {
    let (scenes, images) = synthetic(5, 6);
    let m = augment_reflect(&run(&scenes, &images, CropApproach::VehicleOnly, 0));
    let dir = tempfile::tempdir().unwrap();
    write_manifest(&m, dir.path()).unwrap();
    let back = read_manifest(dir.path()).unwrap();
    assert_eq!(back, m);
    let first = std::fs::read(dir.path().join("manifest.jsonl")).unwrap();
    write_manifest(&back, dir.path()).unwrap();
    assert_eq!(std::fs::read(dir.path().join("manifest.jsonl")).unwrap(), first);
}

#[test]
fn missing_images_are_recorded_per_scene() {
    let (scenes, mut images) = synthetic(6, 5);
    images.remove(&scenes[2].image_path);
    let m = run(&scenes, &images, CropApproach::SceneContext, 0);
    assert_eq!(m.errors.len(), usize::from(visible_lights(&scenes[2..3]) > 0));
    assert!(m.samples.iter().all(|s| s.record.scene_id != scenes[2].scene_id));
    let rest: Vec<_> = scenes.iter().enumerate().filter(|(i, _)| *i != 2).map(|(_, s)| s.clone()).collect();
    assert_eq!(m.samples.len(), visible_lights(&rest));
}

#[test]
fn augmentation_doubles_and_swaps_sides() {
    let (scenes, images) = synthetic(7, 10);
    let m = run(&scenes, &images, CropApproach::VehicleOnly, 0);
    let once = augment_reflect(&m);
    assert_eq!(once.samples.len(), 2 * m.samples.len());
    let base = compute_stats(&m.records());
    let mirrored = compute_stats(&once.records()[1..].iter().step_by(2).cloned().collect::<Vec<_>>());
    for p in LightPosition::ALL {
        assert_eq!(mirrored.count(p), base.count(p.mirrored()));
    }
    let twice = augment_reflect(&once);
    assert_eq!(twice.samples.len(), 4 * m.samples.len());
    let flags: Vec<bool> = twice.samples.iter().map(|s| s.record.reflected).collect();
    for (i, f) in flags.iter().enumerate() {
        // original, reflect, reflected, reflect-of-reflected
        assert_eq!(*f, matches!(i % 4, 1 | 2));
    }
    assert_eq!(twice.provenance.augmentations, vec!["reflect", "reflect"]);
    assert_eq!(twice.samples[3], once.samples[0]);
    assert!(augment_reflect(&DatasetManifest { samples: vec![], ..m.clone() }).samples.is_empty());
}
