//! On-disk sequences: `intrinsics.cfg`, `rgb/NNNNNN.png` (8-bit color) and
//! `disparity/NNNNNN.png` (16-bit fixed point, 0 = invalid).

use std::collections::BTreeSet;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{DynamicImage, ImageEncoder};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraModel;
use crate::grid::{DisparityMap, Grid, ImageRgb, INVALID_DISPARITY};

pub const INTRINSICS_FILE: &str = "intrinsics.cfg";
pub const RGB_DIR: &str = "rgb";
pub const DISPARITY_DIR: &str = "disparity";
/// Pixels per stored disparity unit.
pub const DEFAULT_DISPARITY_SCALE: f64 = 1.0 / 16.0;

/// One synchronized color and disparity frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBundle {
    pub frame_id: u64,
    pub rgb: ImageRgb,
    pub disparity: DisparityMap,
    pub timestamp: Option<f64>,
}

impl FrameBundle {
    pub fn validate(&self) -> Result<()> {
        self.rgb.same_dims(&self.disparity)
    }
}

pub fn frame_file_name(frame_id: u64) -> String {
    format!("{frame_id:06}.png")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub baseline_m: f64,
    pub disparity_scale: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn from_camera(cam: &CameraModel<f64>, width: usize, height: usize) -> Self {
        Intrinsics {
            fx: cam.fx,
            fy: cam.fy,
            cx: cam.cx,
            cy: cam.cy,
            baseline_m: cam.baseline,
            disparity_scale: DEFAULT_DISPARITY_SCALE,
            width,
            height,
        }
    }

    pub fn camera(&self) -> Result<CameraModel<f64>> {
        CameraModel::new(self.fx, self.fy, self.cx, self.cy, self.baseline_m)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut vals: [Option<f64>; 8] = [None; 8];
        const KEYS: [&str; 8] = ["fx", "fy", "cx", "cy", "baseline_m", "disparity_scale", "width", "height"];
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Dataset(format!("intrinsics line {}: expected key = value", n + 1)))?;
            let k = k.trim();
            let slot = KEYS
                .iter()
                .position(|&key| key == k)
                .ok_or_else(|| Error::Dataset(format!("intrinsics line {}: unknown key '{k}'", n + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Dataset(format!("intrinsics line {}: bad number '{}'", n + 1, v.trim())))?;
            vals[slot] = Some(v);
        }
        let get = |i: usize| vals[i].ok_or_else(|| Error::Dataset(format!("intrinsics missing '{}'", KEYS[i])));
        let dim = |i: usize| -> Result<usize> {
            let v = get(i)?;
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Dataset(format!("intrinsics '{}' must be a positive integer", KEYS[i])))
            }
        };
        let out = Intrinsics {
            fx: get(0)?,
            fy: get(1)?,
            cx: get(2)?,
            cy: get(3)?,
            baseline_m: get(4)?,
            disparity_scale: get(5)?,
            width: dim(6)?,
            height: dim(7)?,
        };
        if !(out.disparity_scale > 0.0) {
            return Err(Error::Dataset("disparity_scale must be > 0".into()));
        }
        out.camera()?.validate_for(out.width, out.height)?;
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        format!(
            "fx = {}\nfy = {}\ncx = {}\ncy = {}\nbaseline_m = {}\ndisparity_scale = {}\nwidth = {}\nheight = {}\n",
            self.fx, self.fy, self.cx, self.cy, self.baseline_m, self.disparity_scale, self.width, self.height
        )
    }
}

/// Why a frame present on disk was not turned into a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameWarning {
    pub frame_id: u64,
    pub message: String,
}

/// An opened sequence directory. Frames are read lazily in id order.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub dir: PathBuf,
    pub intrinsics: Intrinsics,
    /// Ids with both images present, ascending.
    pub frame_ids: Vec<u64>,
    pub warnings: Vec<FrameWarning>,
}

fn list_ids(dir: &Path) -> Result<BTreeSet<u64>> {
    let mut ids = BTreeSet::new();
    if !dir.is_dir() {
        return Ok(ids);
    }
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("png") {
            continue;
        }
        if let Some(id) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok()) {
            ids.insert(id);
        }
    }
    Ok(ids)
}

/// Opens `dir`. A missing intrinsics file is fatal; frames lacking one of
/// their two images are skipped with a warning.
pub fn load_sequence(dir: &Path) -> Result<Sequence> {
    let ipath = dir.join(INTRINSICS_FILE);
    let text = fs::read_to_string(&ipath).map_err(|e| Error::io(&ipath, e))?;
    let intrinsics = Intrinsics::parse(&text)?;
    let rgb = list_ids(&dir.join(RGB_DIR))?;
    let disp = list_ids(&dir.join(DISPARITY_DIR))?;
    let mut frame_ids = Vec::new();
    let mut warnings = Vec::new();
    for &id in rgb.union(&disp) {
        match (rgb.contains(&id), disp.contains(&id)) {
            (true, true) => frame_ids.push(id),
            (true, false) => warnings.push(FrameWarning {
                frame_id: id,
                message: "missing disparity image, frame skipped".into(),
            }),
            _ => warnings.push(FrameWarning {
                frame_id: id,
                message: "missing color image, frame skipped".into(),
            }),
        }
    }
    for w in &warnings {
        log::warn!("frame {}: {}", w.frame_id, w.message);
    }
    Ok(Sequence {
        dir: dir.to_path_buf(),
        intrinsics,
        frame_ids,
        warnings,
    })
}

impl Sequence {
    pub fn rgb_path(&self, id: u64) -> PathBuf {
        self.dir.join(RGB_DIR).join(frame_file_name(id))
    }

    pub fn disparity_path(&self, id: u64) -> PathBuf {
        self.dir.join(DISPARITY_DIR).join(frame_file_name(id))
    }

    pub fn read(&self, id: u64) -> Result<FrameBundle> {
        let rgb = read_rgb(&self.rgb_path(id))?;
        let disparity = read_disparity(&self.disparity_path(id), self.intrinsics.disparity_scale)?;
        let (w, h) = (self.intrinsics.width, self.intrinsics.height);
        if rgb.dims() != (w, h) || disparity.dims() != (w, h) {
            return Err(Error::DimensionMismatch {
                expected: (w, h),
                actual: if rgb.dims() != (w, h) { rgb.dims() } else { disparity.dims() },
            });
        }
        Ok(FrameBundle {
            frame_id: id,
            rgb,
            disparity,
            timestamp: None,
        })
    }

    /// Bundles in ascending id order; unreadable frames yield their error.
    pub fn frames(&self) -> impl Iterator<Item = (u64, Result<FrameBundle>)> + '_ {
        self.frame_ids.iter().map(move |&id| (id, self.read(id)))
    }
}

fn image_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn read_rgb(path: &Path) -> Result<ImageRgb> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| image_err(path, e))?;
    let rgb = match img {
        DynamicImage::ImageRgb8(i) => i,
        DynamicImage::ImageRgba8(_) => img.to_rgb8(),
        other => return Err(image_err(path, format!("expected 8-bit color, got {:?}", other.color()))),
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.into_raw().chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Grid::new(w, h, data)
}

pub fn read_disparity(path: &Path, scale: f64) -> Result<DisparityMap> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| image_err(path, e))?;
    let DynamicImage::ImageLuma16(raw) = img else {
        return Err(image_err(path, format!("expected 16-bit single channel, got {:?}", img.color())));
    };
    let (w, h) = (raw.width() as usize, raw.height() as usize);
    let data = raw
        .into_raw()
        .into_iter()
        .map(|q| if q == 0 { INVALID_DISPARITY } else { (q as f64 * scale) as f32 })
        .collect();
    Grid::new(w, h, data)
}

fn create_png(path: &Path) -> Result<PngEncoder<BufWriter<fs::File>>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(PngEncoder::new_with_quality(BufWriter::new(file), CompressionType::Fast, FilterType::Adaptive))
}

pub fn write_rgb(path: &Path, img: &ImageRgb) -> Result<()> {
    let bytes: Vec<u8> = img.as_slice().iter().flatten().copied().collect();
    create_png(path)?
        .write_image(&bytes, img.width() as u32, img.height() as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| image_err(path, e))
}

/// Quantizes to `scale` steps; non-positive or out-of-range values become 0.
pub fn quantize_disparity(d: f32, scale: f64) -> u16 {
    if !(d > 0.0) {
        return 0;
    }
    let q = (d as f64 / scale).round();
    if q < 1.0 || q > u16::MAX as f64 {
        0
    } else {
        q as u16
    }
}

pub fn write_disparity(path: &Path, disp: &DisparityMap, scale: f64) -> Result<()> {
    let bytes: Vec<u8> = disp
        .as_slice()
        .iter()
        .flat_map(|&d| quantize_disparity(d, scale).to_ne_bytes())
        .collect();
    create_png(path)?
        .write_image(&bytes, disp.width() as u32, disp.height() as u32, image::ExtendedColorType::L16)
        .map_err(|e| image_err(path, e))
}

/// Creates the directory layout and intrinsics file of a sequence.
pub fn create_sequence(dir: &Path, intrinsics: &Intrinsics) -> Result<()> {
    for sub in [RGB_DIR, DISPARITY_DIR] {
        let p = dir.join(sub);
        fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
    }
    let p = dir.join(INTRINSICS_FILE);
    fs::write(&p, intrinsics.to_text()).map_err(|e| Error::io(&p, e))
}

/// Writes both images of a bundle into a sequence created with
/// [`create_sequence`].
pub fn write_frame(dir: &Path, bundle: &FrameBundle, intrinsics: &Intrinsics) -> Result<()> {
    bundle.validate()?;
    let name = frame_file_name(bundle.frame_id);
    write_rgb(&dir.join(RGB_DIR).join(&name), &bundle.rgb)?;
    write_disparity(&dir.join(DISPARITY_DIR).join(&name), &bundle.disparity, intrinsics.disparity_scale)
}
