//! Pixel grids: grayscale rasters and binary masks, PNG I/O and binarization.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row; storage is
//! row-major.

use std::fs::File;
use std::io::{BufWriter, ErrorKind};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ColorType, DynamicImage, ImageEncoder, ImageReader};

use crate::error::{mismatch, Error, Result};

/// 8-bit grayscale image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayRaster {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayRaster {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }
}

/// Row-major grid of foreground (`true`) / background (`false`) pixels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// All-background mask.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height, width * height)?;
        Ok(Self {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn from_bools(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Builds a mask from `0`/`1` values; any other value is rejected.
    pub fn from_bits(width: usize, height: usize, bits: &[u8]) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        let bits = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Domain(format!("mask value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    /// Parses rows of `#`/`1` (foreground) and `.`/`0` (background).
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut bits = Vec::with_capacity(width * height);
        for row in rows {
            if row.chars().count() != width {
                return Err(Error::InvalidDimensions("ragged ascii mask".into()));
            }
            for c in row.chars() {
                bits.push(matches!(c, '#' | '1'));
            }
        }
        Self::from_bools(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    /// Bits as `0`/`1` bytes.
    pub fn to_bits(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| u8::from(b)).collect()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-bounds reads are background (zero padding).
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            false
        } else {
            self.bits[y as usize * self.width + x as usize]
        }
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    /// Sets `(x, y)` if it lies inside the mask; returns whether it did.
    #[inline]
    pub fn set_clipped(&mut self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        self.bits[y as usize * self.width + x as usize] = true;
        true
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Foreground coordinates in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Copies the `w`×`h` window with top-left corner `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> Result<Self> {
        if x0 + w > self.width || y0 + h > self.height {
            return Err(Error::InvalidDimensions(format!(
                "window {w}x{h}+{x0}+{y0} exceeds {}x{}",
                self.width, self.height
            )));
        }
        let mut out = Self::new(w, h)?;
        for y in 0..h {
            let src = (y0 + y) * self.width + x0;
            out.bits[y * w..(y + 1) * w].copy_from_slice(&self.bits[src..src + w]);
        }
        Ok(out)
    }

    /// Pixelwise complement.
    pub fn inverted(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// Sets every pixel that is set in `other`.
    pub fn union_with(&mut self, other: &BinaryMask) -> Result<()> {
        self.check_same_dims(other)?;
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        Ok(())
    }

    /// `(|A ∩ B|, |A ∪ B|)`.
    pub fn overlap_counts(&self, other: &BinaryMask) -> Result<(usize, usize)> {
        self.check_same_dims(other)?;
        Ok(self
            .bits
            .iter()
            .zip(&other.bits)
            .fold((0, 0), |(i, u), (&a, &b)| {
                (i + usize::from(a && b), u + usize::from(a || b))
            }))
    }

    pub fn check_same_dims(&self, other: &BinaryMask) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(mismatch(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }

    /// 0 → 0 and 1 → 255.
    pub fn to_gray(&self) -> GrayRaster {
        GrayRaster {
            width: self.width,
            height: self.height,
            pixels: self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions(format!(
            "{width}x{height} has a zero side"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidDimensions(format!(
            "{width}x{height} needs {} pixels, got {len}",
            width.saturating_mul(height)
        )));
    }
    Ok(())
}

/// Integer luma `0.299 R + 0.587 G + 0.114 B`, rounded half up.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let acc = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((acc + 500) / 1000) as u8
}

/// Reads an 8-bit grayscale or RGB PNG. RGB is reduced with [`luma`].
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayRaster> {
    let path = path.as_ref();
    let reader = ImageReader::open(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    let reader = reader.with_guessed_format()?;
    let img = reader.decode().map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat(u.to_string()),
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Image(other.to_string()),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => GrayRaster::new(w, h, buf.into_raw()),
        DynamicImage::ImageRgb8(buf) => {
            let pixels = buf.pixels().map(|p| luma(p[0], p[1], p[2])).collect();
            GrayRaster::new(w, h, pixels)
        }
        other => Err(Error::UnsupportedFormat(format!(
            "{:?} (only 8-bit gray or RGB without alpha)",
            other.color()
        ))),
    }
}

/// `true` where `pixel >= threshold`.
pub fn binarize(img: &GrayRaster, threshold: u8) -> BinaryMask {
    BinaryMask {
        width: img.width,
        height: img.height,
        bits: img.pixels.iter().map(|&p| p >= threshold).collect(),
    }
}

/// Writes an 8-bit grayscale PNG.
pub fn save_gray(img: &GrayRaster, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let enc = PngEncoder::new(BufWriter::new(file));
    enc.write_image(
        &img.pixels,
        img.width as u32,
        img.height as u32,
        ColorType::L8.into(),
    )
    .map_err(|e| match e {
        image::ImageError::IoError(io) => Error::Io(io),
        other => Error::Image(other.to_string()),
    })
}

/// Writes a mask as a 0/255 grayscale PNG.
pub fn save_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    save_gray(&mask.to_gray(), path)
}

/// [`load_gray`] followed by [`binarize`] at 128.
pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    Ok(binarize(&load_gray(path)?, 128))
}
