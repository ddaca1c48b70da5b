//! Grayscale raster with intensities in [0, 1] (1 = ink), plus the bilinear
//! sampling and moment machinery the feature pipeline is built on.

use crate::num::{cast, Real};
use crate::{Error, Result};

/// Row-major grayscale image. `x` indexes columns, `y` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    width: usize,
    height: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn new(width: usize, height: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config(format!(
                "image dimensions must be positive, got {width}×{height}"
            )));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}×{height} image",
                pixels.len()
            )));
        }
        if pixels
            .iter()
            .any(|p| !p.is_finite() || *p < T::zero() || *p > T::one())
        {
            return Err(Error::Config("pixel intensities must lie in [0, 1]".into()));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![T::zero(); width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x]
    }

    /// Callers are responsible for keeping values in [0, 1].
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: T) {
        debug_assert!(x < self.width && y < self.height);
        self.pixels[y * self.width + x] = v;
    }

    /// Bilinear sample with coordinates clamped into the rectangle
    /// `[x_min, x_max] × [y_min, y_max]` (pixel-center coordinates).
    pub fn sample_clamped_to(
        &self,
        fx: T,
        fy: T,
        x_min: usize,
        x_max: usize,
        y_min: usize,
        y_max: usize,
    ) -> T {
        let fx = clamp(fx, cast(x_min as f64), cast(x_max as f64));
        let fy = clamp(fy, cast(y_min as f64), cast(y_max as f64));
        let x0 = fx.floor();
        let y0 = fy.floor();
        let tx = fx - x0;
        let ty = fy - y0;
        let x0 = x0.to_usize().unwrap().min(x_max);
        let y0 = y0.to_usize().unwrap().min(y_max);
        let x1 = (x0 + 1).min(x_max);
        let y1 = (y0 + 1).min(y_max);
        let one = T::one();
        self.get(x0, y0) * (one - tx) * (one - ty)
            + self.get(x1, y0) * tx * (one - ty)
            + self.get(x0, y1) * (one - tx) * ty
            + self.get(x1, y1) * tx * ty
    }

    /// Bilinear sample treating everything outside the frame as background
    /// (zero intensity).
    pub fn sample_zero_outside(&self, fx: T, fy: T) -> T {
        let x0f = fx.floor();
        let y0f = fy.floor();
        let tx = fx - x0f;
        let ty = fy - y0f;
        let one = T::one();
        let mut acc = T::zero();
        let corners = [
            (0i64, 0i64, (one - tx) * (one - ty)),
            (1, 0, tx * (one - ty)),
            (0, 1, (one - tx) * ty),
            (1, 1, tx * ty),
        ];
        let xb = x0f.to_f64().unwrap() as i64;
        let yb = y0f.to_f64().unwrap() as i64;
        for (dx, dy, w) in corners {
            let x = xb + dx;
            let y = yb + dy;
            if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
                acc = acc + self.get(x as usize, y as usize) * w;
            }
        }
        acc
    }
}

#[inline]
fn clamp<T: Real>(v: T, lo: T, hi: T) -> T {
    if v < lo {
        lo
    } else if v > hi {
        hi
    } else {
        v
    }
}

/// Mass-normalized first and second central moments of the intensity
/// distribution (pixel centers at integer coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments<T> {
    pub mass: T,
    pub mean_x: T,
    pub mean_y: T,
    pub mu20: T,
    pub mu11: T,
    pub mu02: T,
}

/// `None` when the image carries no intensity at all.
pub fn intensity_moments<T: Real>(img: &GrayImage<T>) -> Option<Moments<T>> {
    let mut mass = T::zero();
    let mut sx = T::zero();
    let mut sy = T::zero();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y);
            mass = mass + v;
            sx = sx + v * cast(x as f64);
            sy = sy + v * cast(y as f64);
        }
    }
    if mass == T::zero() {
        return None;
    }
    let mean_x = sx / mass;
    let mean_y = sy / mass;
    let mut mu20 = T::zero();
    let mut mu11 = T::zero();
    let mut mu02 = T::zero();
    for y in 0..img.height() {
        for x in 0..img.width() {
            let v = img.get(x, y);
            let dx = cast::<T>(x as f64) - mean_x;
            let dy = cast::<T>(y as f64) - mean_y;
            mu20 = mu20 + v * dx * dx;
            mu11 = mu11 + v * dx * dy;
            mu02 = mu02 + v * dy * dy;
        }
    }
    Some(Moments {
        mass,
        mean_x,
        mean_y,
        mu20: mu20 / mass,
        mu11: mu11 / mass,
        mu02: mu02 / mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validates() {
        assert!(GrayImage::new(2, 2, vec![0.0, 0.5, 1.0, 0.25]).is_ok());
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
    }

    #[test]
    fn sampling_at_pixel_centers_is_exact() {
        let img = GrayImage::from_fn(3, 3, |x, y| (x + 3 * y) as f64 / 10.0);
        for y in 0..3 {
            for x in 0..3 {
                let s = img.sample_clamped_to(x as f64, y as f64, 0, 2, 0, 2);
                assert_eq!(s, img.get(x, y));
            }
        }
    }

    #[test]
    fn zero_outside_sampling_fades_at_border() {
        let img = GrayImage::new(1, 1, vec![1.0]).unwrap();
        assert_eq!(img.sample_zero_outside(0.0, 0.0), 1.0);
        assert!((img.sample_zero_outside(-0.5, 0.0) - 0.5).abs() < 1e-12);
        assert_eq!(img.sample_zero_outside(-2.0, 0.0), 0.0);
    }

    #[test]
    fn moments_of_symmetric_blob_are_centered() {
        // A 3×3 uniform block centered at (2, 3) inside a 5×7 frame.
        let img = GrayImage::from_fn(5, 7, |x, y| {
            if (1..=3).contains(&x) && (2..=4).contains(&y) {
                1.0
            } else {
                0.0
            }
        });
        let m = intensity_moments(&img).unwrap();
        assert!((m.mean_x - 2.0).abs() < 1e-12);
        assert!((m.mean_y - 3.0).abs() < 1e-12);
        assert!(m.mu11.abs() < 1e-12);
        assert!((m.mu20 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.mu02 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_blank_image_are_none() {
        let img = GrayImage::<f64>::zeros(4, 4);
        assert!(intensity_moments(&img).is_none());
    }
}
