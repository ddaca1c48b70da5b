//! Handwritten-character feature extraction.
//!
//! An ink image is normalized to 40×40 (tight crop, uniform scale,
//! centering), slant corrected from its second-order moments, and expanded
//! into ten 40×40 feature maps: the raw and slant-corrected images, five
//! directional-derivative magnitudes, and interior/endpoint/junction maps
//! from a thinned skeleton. Each map is anti-aliased down to 10×10 and the
//! maps are concatenated into a 1000-dimensional vector.

use crate::image::{intensity_moments, GrayImage};
use crate::num::{cast, Real};
use crate::{Error, Result};

/// Side length of the normalized character frame.
pub const NORM_SIZE: usize = 40;
/// Side length of each downsampled feature map.
pub const MAP_SIZE: usize = 10;
/// Number of feature maps in the full vector.
pub const MAP_COUNT: usize = 10;
/// Length of the full feature vector.
pub const FEATURE_DIM: usize = MAP_COUNT * MAP_SIZE * MAP_SIZE;

/// Intensities strictly above this count as ink.
pub const INK_THRESHOLD: f64 = 0.5;

/// Which of the ten maps to keep, in the fixed order
/// `[raw, slant, deriv₀..deriv₄, interior, endpoints, junctions]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapSelection {
    pub include: [bool; MAP_COUNT],
}

impl MapSelection {
    pub const ALL: Self = Self {
        include: [true; MAP_COUNT],
    };
    /// Raw image only (a 100-dimensional vector).
    pub const RAW_ONLY: Self = Self {
        include: [true, false, false, false, false, false, false, false, false, false],
    };
    /// Raw, slant-corrected, and the five derivative maps (700 dimensions).
    pub const RAW_SLANT_DERIVS: Self = Self {
        include: [true, true, true, true, true, true, true, false, false, false],
    };

    pub fn count(&self) -> usize {
        self.include.iter().filter(|&&b| b).count()
    }

    pub fn dim(&self) -> usize {
        self.count() * MAP_SIZE * MAP_SIZE
    }
}

/// Full 1000-dimensional character descriptor, 10 maps × 10×10 row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    values: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn require_norm_frame<T: Real>(img: &GrayImage<T>) -> Result<()> {
    if img.width() != NORM_SIZE || img.height() != NORM_SIZE {
        return Err(Error::Shape(format!(
            "expected a {NORM_SIZE}×{NORM_SIZE} frame, got {}×{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Tight-crops the thresholded ink, scales uniformly so the larger side is
/// exactly 40, and centers the result in a 40×40 background frame.
pub fn crop_and_scale<T: Real>(img: &GrayImage<T>) -> Result<GrayImage<T>> {
    let threshold = cast::<T>(INK_THRESHOLD);
    let mut x0 = usize::MAX;
    let mut x1 = 0usize;
    let mut y0 = usize::MAX;
    let mut y1 = 0usize;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) > threshold {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::EmptyImage(
            "no pixel above the ink threshold".into(),
        ));
    }
    let crop_w = x1 - x0 + 1;
    let crop_h = y1 - y0 + 1;
    let (tw, th) = if crop_w >= crop_h {
        let th = ((crop_h as f64) * (NORM_SIZE as f64) / (crop_w as f64)).round() as usize;
        (NORM_SIZE, th.max(1))
    } else {
        let tw = ((crop_w as f64) * (NORM_SIZE as f64) / (crop_h as f64)).round() as usize;
        (tw.max(1), NORM_SIZE)
    };
    let x_off = (NORM_SIZE - tw) / 2;
    let y_off = (NORM_SIZE - th) / 2;
    let sx = cast::<T>(crop_w as f64) / cast::<T>(tw as f64);
    let sy = cast::<T>(crop_h as f64) / cast::<T>(th as f64);
    let half = cast::<T>(0.5);
    let mut out = GrayImage::zeros(NORM_SIZE, NORM_SIZE);
    for j in 0..th {
        for i in 0..tw {
            let fx = (cast::<T>(i as f64) + half) * sx - half + cast::<T>(x0 as f64);
            let fy = (cast::<T>(j as f64) + half) * sy - half + cast::<T>(y0 as f64);
            let v = img.sample_clamped_to(fx, fy, x0, x1, y0, y1);
            out.set(x_off + i, y_off + j, v);
        }
    }
    Ok(out)
}

/// Removes slant with the horizontal shear `x' = x − (μ₁₁/μ₀₂)(y − ȳ)`
/// computed from the second-order intensity moments; the sheared image has
/// μ₁₁ ≈ 0. Degenerate single-row ink (μ₀₂ below 1e-9) is returned
/// unchanged.
pub fn slant_correct<T: Real>(img: &GrayImage<T>) -> Result<GrayImage<T>> {
    require_norm_frame(img)?;
    let m = intensity_moments(img)
        .ok_or_else(|| Error::EmptyImage("cannot slant correct a blank image".into()))?;
    if m.mu02 < cast(1e-9) {
        return Ok(img.clone());
    }
    let shear = m.mu11 / m.mu02;
    let mut out = GrayImage::zeros(NORM_SIZE, NORM_SIZE);
    for y in 0..NORM_SIZE {
        let dy = cast::<T>(y as f64) - m.mean_y;
        for x in 0..NORM_SIZE {
            let src_x = cast::<T>(x as f64) + shear * dy;
            let v = img.sample_zero_outside(src_x, cast(y as f64));
            out.set(x, y, v);
        }
    }
    Ok(out)
}

/// Derivative-magnitude maps along the directions `kπ/5` for `k = 0..4`,
/// from central differences (background outside the frame), scaled by ½ so
/// values stay inside [0, 1].
pub fn directional_derivatives<T: Real>(img: &GrayImage<T>) -> Result<[GrayImage<T>; 5]> {
    require_norm_frame(img)?;
    let n = NORM_SIZE;
    let at = |x: i64, y: i64| -> T {
        if x < 0 || y < 0 || x >= n as i64 || y >= n as i64 {
            T::zero()
        } else {
            img.get(x as usize, y as usize)
        }
    };
    let half = cast::<T>(0.5);
    let mut dx = vec![T::zero(); n * n];
    let mut dy = vec![T::zero(); n * n];
    for y in 0..n {
        for x in 0..n {
            dx[y * n + x] = (at(x as i64 + 1, y as i64) - at(x as i64 - 1, y as i64)) * half;
            dy[y * n + x] = (at(x as i64, y as i64 + 1) - at(x as i64, y as i64 - 1)) * half;
        }
    }
    let mut maps = Vec::with_capacity(5);
    for k in 0..5usize {
        let theta = T::PI() * cast::<T>(k as f64) / cast::<T>(5.0);
        let (c, s) = (theta.cos(), theta.sin());
        let map = GrayImage::from_fn(n, n, |x, y| {
            (c * dx[y * n + x] + s * dy[y * n + x]).abs() * half
        });
        maps.push(map);
    }
    let mut it = maps.into_iter();
    Ok(std::array::from_fn(|_| it.next().unwrap()))
}

const NEIGHBOR_OFFSETS: [(i64, i64); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

struct Mask {
    w: usize,
    h: usize,
    bits: Vec<bool>,
}

impl Mask {
    fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x >= self.w as i64 || y >= self.h as i64 {
            false
        } else {
            self.bits[y as usize * self.w + x as usize]
        }
    }

    fn neighbors(&self, x: usize, y: usize) -> [bool; 8] {
        let mut out = [false; 8];
        for (i, (dx, dy)) in NEIGHBOR_OFFSETS.iter().enumerate() {
            out[i] = self.get(x as i64 + dx, y as i64 + dy);
        }
        out
    }
}

/// Zhang–Suen thinning: two alternating sub-iterations delete boundary
/// pixels until the mask is stable, leaving a one-pixel-wide skeleton.
fn zhang_suen(mask: &mut Mask) {
    loop {
        let mut changed = false;
        for step in 0..2 {
            let mut to_delete = Vec::new();
            for y in 0..mask.h {
                for x in 0..mask.w {
                    if !mask.bits[y * mask.w + x] {
                        continue;
                    }
                    let nb = mask.neighbors(x, y);
                    let b: usize = nb.iter().filter(|&&v| v).count();
                    if !(2..=6).contains(&b) {
                        continue;
                    }
                    let a = (0..8)
                        .filter(|&i| !nb[i] && nb[(i + 1) % 8])
                        .count();
                    if a != 1 {
                        continue;
                    }
                    // nb indices: 0=N, 2=E, 4=S, 6=W.
                    let ok = if step == 0 {
                        (!nb[0] || !nb[2] || !nb[4]) && (!nb[2] || !nb[4] || !nb[6])
                    } else {
                        (!nb[0] || !nb[2] || !nb[6]) && (!nb[0] || !nb[4] || !nb[6])
                    };
                    if ok {
                        to_delete.push(y * mask.w + x);
                    }
                }
            }
            if !to_delete.is_empty() {
                changed = true;
                for idx in to_delete {
                    mask.bits[idx] = false;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Interior (8-neighborhood erosion), skeletal endpoint, and skeletal
/// junction maps, each {0, 1}-valued. A blank input yields three zero maps.
pub fn skeleton_maps<T: Real>(
    img: &GrayImage<T>,
) -> Result<(GrayImage<T>, GrayImage<T>, GrayImage<T>)> {
    require_norm_frame(img)?;
    let n = NORM_SIZE;
    let threshold = cast::<T>(INK_THRESHOLD);
    let ink = Mask {
        w: n,
        h: n,
        bits: img.pixels().iter().map(|&p| p > threshold).collect(),
    };

    let mut interior = GrayImage::zeros(n, n);
    for y in 0..n {
        for x in 0..n {
            if ink.bits[y * n + x] && ink.neighbors(x, y).iter().all(|&v| v) {
                interior.set(x, y, T::one());
            }
        }
    }

    let mut skel = Mask {
        w: n,
        h: n,
        bits: ink.bits.clone(),
    };
    zhang_suen(&mut skel);

    let mut endpoints = GrayImage::zeros(n, n);
    let mut junctions = GrayImage::zeros(n, n);
    for y in 0..n {
        for x in 0..n {
            if !skel.bits[y * n + x] {
                continue;
            }
            let count = skel.neighbors(x, y).iter().filter(|&&v| v).count();
            if count == 1 {
                endpoints.set(x, y, T::one());
            } else if count >= 3 {
                junctions.set(x, y, T::one());
            }
        }
    }
    Ok((interior, endpoints, junctions))
}

/// Anti-aliased 4× reduction: each 10×10 cell is the mean of its 4×4 block.
pub fn downsample10<T: Real>(map: &GrayImage<T>) -> Result<GrayImage<T>> {
    require_norm_frame(map)?;
    let sixteenth = T::one() / cast::<T>(16.0);
    Ok(GrayImage::from_fn(MAP_SIZE, MAP_SIZE, |cx, cy| {
        let mut s = T::zero();
        for y in 4 * cy..4 * cy + 4 {
            for x in 4 * cx..4 * cx + 4 {
                s = s + map.get(x, y);
            }
        }
        s * sixteenth
    }))
}

/// Full pipeline: normalize, slant correct, derive the ten maps (derivative
/// and skeleton maps come from the slant-corrected image), downsample each
/// to 10×10, and concatenate in the fixed map order.
pub fn extract<T: Real>(img: &GrayImage<T>) -> Result<FeatureVector<T>> {
    let values = extract_maps(img, MapSelection::ALL)?;
    debug_assert_eq!(values.len(), FEATURE_DIM);
    Ok(FeatureVector { values })
}

/// Like [`extract`] but keeps only the selected maps (e.g. the 100- or
/// 700-dimensional subsets).
pub fn extract_maps<T: Real>(img: &GrayImage<T>, sel: MapSelection) -> Result<Vec<T>> {
    if sel.count() == 0 {
        return Err(Error::Config("no feature maps selected".into()));
    }
    let raw = crop_and_scale(img)?;
    let slant = slant_correct(&raw)?;
    let derivs = directional_derivatives(&slant)?;
    let (interior, endpoints, junctions) = skeleton_maps(&slant)?;
    let maps: [&GrayImage<T>; MAP_COUNT] = [
        &raw, &slant, &derivs[0], &derivs[1], &derivs[2], &derivs[3], &derivs[4], &interior,
        &endpoints, &junctions,
    ];
    let mut values = Vec::with_capacity(sel.dim());
    for (map, keep) in maps.iter().zip(sel.include) {
        if keep {
            values.extend_from_slice(downsample10(map)?.pixels());
        }
    }
    Ok(values)
}
