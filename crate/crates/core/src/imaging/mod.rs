//! Deterministic raster filtering primitives.
//!
//! Every filter here works on [`ImageBuffer`], an 8-bit row-major raster with
//! one (gray) or three (R,G,B) interleaved channels. Arithmetic is carried out
//! in `f64` and written back with round-half-away-from-zero followed by a
//! clamp to `[0, 255]`, so results are reproducible byte-for-byte on every
//! platform.
//!
//! Border handling is explicit through [`BorderMode`]. Kernels larger than the
//! image are legal: the border rule is applied repeatedly until the index
//! lands inside the image.

mod filter;
pub mod io;
mod kernel;

pub use filter::{
    box_blur, convolve, gaussian_blur, highband_energy, median_blur, sharpen, to_grayscale,
};
pub use kernel::{make_gaussian_kernel, Kernel1D, Kernel2D};

use thiserror::Error;

/// Errors raised by the imaging primitives.
#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("expected {expected}-channel image, got {found} channels")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("bad kernel size for `{name}`: {value} ({reason})")]
    BadKernelSize {
        name: String,
        value: usize,
        reason: &'static str,
    },
    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("invalid image geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("image size mismatch: {0}")]
    SizeMismatch(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ImagingError {
    pub(crate) fn bad_kernel(name: &str, value: usize, reason: &'static str) -> Self {
        ImagingError::BadKernelSize {
            name: name.to_string(),
            value,
            reason,
        }
    }
}

/// How samples outside the image are synthesized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BorderMode {
    /// Mirror without repeating the edge sample: `cba|abcd|cba`.
    Reflect101,
    /// Repeat the edge sample: `aaa|abcd|ddd`.
    Replicate,
}

impl BorderMode {
    /// Maps a possibly out-of-range coordinate onto `0..len`.
    ///
    /// `len` must be non-zero.
    pub fn resolve(self, index: isize, len: usize) -> usize {
        debug_assert!(len > 0);
        let n = len as isize;
        if (0..n).contains(&index) {
            return index as usize;
        }
        match self {
            BorderMode::Replicate => index.clamp(0, n - 1) as usize,
            BorderMode::Reflect101 => {
                if n == 1 {
                    return 0;
                }
                let period = 2 * (n - 1);
                let m = index.rem_euclid(period);
                (if m >= n { period - m } else { m }) as usize
            }
        }
    }
}

/// An 8-bit raster with 1 or 3 interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<u8>,
    ) -> Result<Self, ImagingError> {
        if width == 0 || height == 0 {
            return Err(ImagingError::InvalidGeometry(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(ImagingError::InvalidGeometry(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImagingError::InvalidGeometry(format!(
                "data length {} does not match {width}x{height}x{channels} = {expected}",
                data.len()
            )));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
        })
    }

    /// An image where every pixel equals `pixel` (whose length sets the
    /// channel count).
    pub fn filled(width: usize, height: usize, pixel: &[u8]) -> Result<Self, ImagingError> {
        let data = pixel
            .iter()
            .copied()
            .cycle()
            .take(width * height * pixel.len())
            .collect();
        ImageBuffer::new(width, height, pixel.len(), data)
    }

    /// Builds an image from a per-sample function `f(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self, ImagingError> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        ImageBuffer::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, channel: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + channel]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, channel: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + channel] = value;
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn same_shape(&self, other: &ImageBuffer) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    /// True when every pixel equals the first one.
    pub fn is_constant(&self) -> bool {
        let first = self.pixel(0, 0);
        self.data.chunks_exact(self.channels).all(|p| p == first)
    }

    /// Left-right mirror image.
    pub fn mirrored(&self) -> ImageBuffer {
        ImageBuffer::from_fn(self.width, self.height, self.channels, |x, y, c| {
            self.get(self.width - 1 - x, y, c)
        })
        .expect("same geometry")
    }

    /// Copies a gray image into all three channels. 3-channel input is
    /// returned unchanged.
    pub fn to_rgb(&self) -> ImageBuffer {
        if self.channels == 3 {
            return self.clone();
        }
        let data = self.data.iter().flat_map(|&v| [v, v, v]).collect();
        ImageBuffer::new(self.width, self.height, 3, data).expect("same geometry")
    }

    /// Mean of all samples.
    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len() as f64
    }

    pub(crate) fn require_channels(&self, expected: usize) -> Result<(), ImagingError> {
        if self.channels != expected {
            return Err(ImagingError::ChannelMismatch {
                expected,
                found: self.channels,
            });
        }
        Ok(())
    }
}

/// Round half away from zero, then saturate to a sample.
#[inline]
pub fn saturate(value: f64) -> u8 {
    value.round().clamp(0.0, 255.0) as u8
}
