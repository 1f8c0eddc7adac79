//! Pose overlays. Visible joints are filled disks joined by solid limbs;
//! occluded joints are hollow rings and their limbs are dashed.

use super::RenderArgs;
use anyhow::{bail, Context, Result};
use image::{Rgb, RgbImage};
use jointtrack::io::{load_poses, PoseFrame};
use jointtrack::{Point2, PosePrediction, SkeletonTopology};
use std::path::{Path, PathBuf};

const PALETTE: [[u8; 3]; 8] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
];
const UNTRACKED: [u8; 3] = [255, 255, 255];

pub fn run(args: &RenderArgs, text: &str, topo: &SkeletonTopology) -> Result<()> {
    let frames = load_poses(text).context("poses")?;
    let background = match &args.background {
        Some(p) => Some(
            image::open(p)
                .with_context(|| format!("reading {}", p.display()))?
                .to_rgb8(),
        ),
        None => None,
    };
    let canvas = || {
        background
            .clone()
            .unwrap_or_else(|| RgbImage::from_pixel(args.size.0, args.size.1, Rgb([0, 0, 0])))
    };
    if args.size.0 == 0 || args.size.1 == 0 {
        bail!("canvas size must be non-zero");
    }

    if args.all {
        for f in &frames {
            let mut img = canvas();
            draw_frame(&mut img, f, topo);
            save(&img, &numbered_path(&args.output, f.frame_index))?;
        }
        return Ok(());
    }
    let frame = match args.frame {
        Some(n) => Some(
            frames
                .iter()
                .find(|f| f.frame_index == n)
                .with_context(|| format!("frame {n} not in pose file"))?,
        ),
        None => frames.first(),
    };
    let mut img = canvas();
    if let Some(f) = frame {
        draw_frame(&mut img, f, topo);
    }
    save(&img, &args.output)
}

fn save(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path)
        .with_context(|| format!("writing {}", path.display()))
}

fn numbered_path(base: &Path, frame: u32) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}_{frame:05}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{frame:05}"),
    };
    base.with_file_name(name)
}

fn color(pose: &PosePrediction) -> Rgb<u8> {
    Rgb(pose
        .track_id
        .map_or(UNTRACKED, |id| PALETTE[(id as usize) % PALETTE.len()]))
}

fn draw_frame(img: &mut RgbImage, frame: &PoseFrame, topo: &SkeletonTopology) {
    let radius = (img.height() as f64 / 270.0).max(2.0);
    for pose in &frame.poses {
        let c = color(pose);
        for &(a, b) in topo.limbs() {
            if let (Some(ja), Some(jb)) = (pose.get(a), pose.get(b)) {
                let dash = if ja.occluded || jb.occluded {
                    Some(3.0 * radius)
                } else {
                    None
                };
                draw_line(img, ja.position, jb.position, c, dash);
            }
        }
        for j in pose.present() {
            if j.occluded {
                draw_ring(img, j.position, radius * 1.5, c);
            } else {
                draw_disk(img, j.position, radius, c);
            }
        }
    }
}

fn put(img: &mut RgbImage, x: f64, y: f64, c: Rgb<u8>) {
    let (x, y) = (x.round(), y.round());
    if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn draw_line(img: &mut RgbImage, a: Point2, b: Point2, c: Rgb<u8>, dash: Option<f64>) {
    let len = a.distance(b);
    let steps = len.ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        if let Some(d) = dash {
            if ((t * len / d) as usize) % 2 == 1 {
                continue;
            }
        }
        let p = a.lerp(b, t);
        put(img, p.x, p.y, c);
    }
}

fn draw_disk(img: &mut RgbImage, p: Point2, r: f64, c: Rgb<u8>) {
    let ri = r.ceil() as i64;
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            if ((dx * dx + dy * dy) as f64) <= r * r {
                put(img, p.x + dx as f64, p.y + dy as f64, c);
            }
        }
    }
}

fn draw_ring(img: &mut RgbImage, p: Point2, r: f64, c: Rgb<u8>) {
    let ri = r.ceil() as i64 + 1;
    for dy in -ri..=ri {
        for dx in -ri..=ri {
            let d = ((dx * dx + dy * dy) as f64).sqrt();
            if (d - r).abs() <= 0.75 {
                put(img, p.x + dx as f64, p.y + dy as f64, c);
            }
        }
    }
}
