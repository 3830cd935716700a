//! Writes a small synthetic keypoint dataset with matching detector and
//! visibility predictions.
//!
//! ```text
//! cargo run -p lightkit --example make_fixture -- <out-dir> [--scenes N] [--seed S]
//! ```

use std::collections::HashMap;
use std::path::PathBuf;

use image::{Rgb, RgbImage};
use lightkit::annotation::{
    canonical_line, import_keypoint_dataset, KeypointMapping, KeypointRecord, KeypointVehicle,
    LightPosition, RawKeypoint,
};
use lightkit::curation::{export_visibility_dataset, VisibilityOptions};
use lightkit::geometry::BoxTlbr;
use lightkit::io::{save_png, write_text};
use lightkit::metrics::{PredictionRecord, VisibilityRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WIDTH: u32 = 320;
const HEIGHT: u32 = 240;

fn q(v: f64) -> f64 {
    (v * 4.0).round() / 4.0
}

fn fill(img: &mut RgbImage, b: &BoxTlbr, c: Rgb<u8>) {
    let x0 = b.top_left.x.floor().max(0.0) as u32;
    let y0 = b.top_left.y.floor().max(0.0) as u32;
    let x1 = (b.bottom_right.x.ceil() as u32).min(img.width());
    let y1 = (b.bottom_right.y.ceil() as u32).min(img.height());
    for y in y0..y1 {
        for x in x0..x1 {
            img.put_pixel(x, y, c);
        }
    }
}

fn main() {
    let mut args = std::env::args().skip(1);
    let mut out = None;
    let mut n_scenes = 10usize;
    let mut seed = 20_240_601u64;
    while let Some(a) = args.next() {
        match a.as_str() {
            "--scenes" => n_scenes = args.next().and_then(|v| v.parse().ok()).expect("--scenes N"),
            "--seed" => seed = args.next().and_then(|v| v.parse().ok()).expect("--seed S"),
            _ => out = Some(PathBuf::from(a)),
        }
    }
    let out = out.expect("usage: make_fixture <out-dir> [--scenes N] [--seed S]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mapping = KeypointMapping::default_layout();

    let mut records = Vec::new();
    let mut images = HashMap::new();
    for s in 0..n_scenes {
        let mut img = RgbImage::from_fn(WIDTH, HEIGHT, |x, y| {
            Rgb([(40 + x / 4) as u8, (60 + y / 3) as u8, ((x + 2 * y + s as u32 * 17) % 97 + 30) as u8])
        });
        let mut vehicles = Vec::new();
        for v in 0..rng.random_range(1..=3) {
            let small = rng.random_bool(0.15);
            let (vw, vh) = if small {
                (rng.random_range(16.0..30.0), rng.random_range(12.0..28.0))
            } else {
                (rng.random_range(60.0..200.0), rng.random_range(40.0..120.0))
            };
            // some vehicles hug the image border so crops need padding
            let x0 = q(match rng.random_range(0..4) {
                0 => 0.0,
                1 => WIDTH as f64 - vw,
                _ => rng.random_range(0.0..(WIDTH as f64 - vw)),
            });
            let y0 = q(rng.random_range(0.0..(HEIGHT as f64 - vh)));
            let bbox = BoxTlbr::from_coords(x0, y0, q(x0 + vw).min(WIDTH as f64), q(y0 + vh));
            let shade = rng.random_range(60..200u8);
            fill(&mut img, &bbox, Rgb([shade, shade, shade]));

            let mut keypoints = Vec::new();
            for p in LightPosition::ALL {
                if !rng.random_bool(0.65) {
                    continue;
                }
                let lw = rng.random_range(2.0..(bbox.width() / 3.0).max(3.0));
                let lh = rng.random_range(2.0..(bbox.height() / 3.0).max(3.0));
                let lx = q(rng.random_range(bbox.top_left.x..(bbox.bottom_right.x - lw)));
                let ly = q(rng.random_range(bbox.top_left.y..(bbox.bottom_right.y - lh)));
                let (rx, by) = (q(lx + lw), q(ly + lh));
                let light = BoxTlbr::from_coords(lx, ly, rx, by);
                let color = if p.as_str().starts_with("front") {
                    Rgb([250, 250, 210])
                } else {
                    Rgb([220, 20, 30])
                };
                fill(&mut img, &light, color);
                let base = 5 * p.index() as u32;
                let corners = [(lx, ly), (rx, ly), (lx, by), (rx, by)];
                let mut kept = 0;
                for (role, (x, y)) in corners.into_iter().enumerate() {
                    if rng.random_bool(0.85) || (role == 3 && kept == 0) {
                        keypoints.push(RawKeypoint { id: base + role as u32, x, y });
                        kept += 1;
                    }
                }
                if rng.random_bool(0.7) {
                    keypoints.push(RawKeypoint {
                        id: base + 4,
                        x: q((lx + rx) / 2.0),
                        y: q((ly + by) / 2.0),
                    });
                }
            }
            if rng.random_bool(0.3) {
                // a keypoint id the mapping does not know is ignored on import
                let c = bbox.center();
                keypoints.push(RawKeypoint { id: 57, x: q(c.x), y: q(c.y) });
            }
            vehicles.push(KeypointVehicle {
                vehicle_id: format!("car{v}"),
                bbox,
                keypoints,
            });
        }
        let image_path = format!("images/scene_{s:02}.png");
        save_png(&img, &out.join(&image_path)).expect("write image");
        images.insert(image_path.clone(), img);
        records.push(KeypointRecord {
            scene_id: format!("scene_{s:02}"),
            image_path,
            width: WIDTH,
            height: HEIGHT,
            vehicles,
        });
    }

    let lines = |items: Vec<String>| items.into_iter().map(|l| l + "\n").collect::<String>();
    write_text(&out.join("keypoints.jsonl"), &lines(records.iter().map(canonical_line).collect()))
        .expect("write keypoints");
    write_text(&out.join("mapping.json"), &mapping.to_json()).expect("write mapping");

    let scenes = import_keypoint_dataset(&records, &mapping).expect("fixture imports cleanly");
    let mut predictions = Vec::new();
    for scene in &scenes {
        for vehicle in &scene.vehicles {
            for light in vehicle.lights.iter().filter(|l| l.visible) {
                let Some(b) = light.resolved_box() else { continue };
                if !rng.random_bool(0.85) {
                    continue;
                }
                let mut j = || q(rng.random_range(-1.0..1.0));
                let (x0, y0) = (b.top_left.x + j(), b.top_left.y + j());
                let (x1, y1) = (b.bottom_right.x + j(), b.bottom_right.y + j());
                predictions.push(PredictionRecord {
                    scene_id: scene.scene_id.clone(),
                    vehicle_id: Some(vehicle.vehicle_id.clone()),
                    position: light.position,
                    bbox: Some(BoxTlbr::from_coords(x0.min(x1), y0.min(y1), x0.max(x1), y0.max(y1))),
                    center: None,
                    confidence: (rng.random_range(0.3..1.0f64) * 1000.0).round() / 1000.0,
                });
            }
        }
        for _ in 0..rng.random_range(0..3) {
            let x = q(rng.random_range(0.0..(WIDTH as f64 - 20.0)));
            let y = q(rng.random_range(0.0..(HEIGHT as f64 - 20.0)));
            predictions.push(PredictionRecord {
                scene_id: scene.scene_id.clone(),
                vehicle_id: None,
                position: Some(LightPosition::ALL[rng.random_range(0..4)]),
                bbox: Some(BoxTlbr::from_coords(x, y, x + 12.0, y + 8.0)),
                center: None,
                confidence: (rng.random_range(0.0..0.6f64) * 1000.0).round() / 1000.0,
            });
        }
    }
    write_text(
        &out.join("predictions.jsonl"),
        &lines(predictions.iter().map(canonical_line).collect()),
    )
    .expect("write predictions");

    let export = export_visibility_dataset(&scenes, &images, &VisibilityOptions::default());
    let visibility: Vec<String> = export
        .samples
        .iter()
        .map(|s| {
            let mut labels = s.labels;
            for l in labels.iter_mut() {
                if rng.random_bool(0.1) {
                    *l = !*l;
                }
            }
            canonical_line(&VisibilityRecord::from_labels(&s.scene_id, &s.vehicle_id, labels))
        })
        .collect();
    write_text(&out.join("visibility_predictions.jsonl"), &lines(visibility))
        .expect("write visibility predictions");
    println!(
        "{} scenes, {} predictions, {} visibility samples -> {}",
        scenes.len(),
        predictions.len(),
        export.samples.len(),
        out.display()
    );
}
