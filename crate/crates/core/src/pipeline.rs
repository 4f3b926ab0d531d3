//! The illusion-revealing filter chain.
//!
//! A color image is blurred three times (Gaussian, box, median), collapsed to
//! luma, and finally sharpened with a fixed 3x3 kernel. The heavy low-pass
//! stages wipe out fine texture so that a large-scale shape hidden in the
//! image's brightness dominates what is left.

use serde::{Deserialize, Serialize};

use crate::imaging::{
    box_blur, gaussian_blur, median_blur, sharpen, to_grayscale, ImageBuffer, ImagingError,
};

/// Kernel sizes for each stage of [`reveal`]. The sharpening kernel is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub gaussian_ksize: usize,
    pub box_kw: usize,
    pub box_kh: usize,
    pub median_ksize: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            gaussian_ksize: 61,
            box_kw: 20,
            box_kh: 20,
            median_ksize: 5,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<(), ImagingError> {
        if self.gaussian_ksize == 0 || self.gaussian_ksize.is_multiple_of(2) {
            return Err(ImagingError::bad_kernel(
                "gaussian_ksize",
                self.gaussian_ksize,
                "must be odd and >= 1",
            ));
        }
        if self.box_kw == 0 {
            return Err(ImagingError::bad_kernel(
                "box_kw",
                self.box_kw,
                "must be >= 1",
            ));
        }
        if self.box_kh == 0 {
            return Err(ImagingError::bad_kernel(
                "box_kh",
                self.box_kh,
                "must be >= 1",
            ));
        }
        if self.median_ksize < 3 || self.median_ksize.is_multiple_of(2) {
            return Err(ImagingError::bad_kernel(
                "median_ksize",
                self.median_ksize,
                "must be odd and >= 3",
            ));
        }
        Ok(())
    }
}

/// Free-function form of [`FilterConfig::validate`].
pub fn validate_config(cfg: &FilterConfig) -> Result<(), ImagingError> {
    cfg.validate()
}

/// The three low-pass stages, still in color.
pub fn low_pass(img: &ImageBuffer, cfg: &FilterConfig) -> Result<ImageBuffer, ImagingError> {
    cfg.validate()?;
    let blurred = gaussian_blur(img, cfg.gaussian_ksize)?;
    let blurred = box_blur(&blurred, cfg.box_kw, cfg.box_kh)?;
    median_blur(&blurred, cfg.median_ksize)
}

/// Runs the full chain: Gaussian, box, median, luma, sharpen.
///
/// Input must be RGB; output is a gray image of the same size.
pub fn reveal(img: &ImageBuffer, cfg: &FilterConfig) -> Result<ImageBuffer, ImagingError> {
    img.require_channels(3)?;
    let smoothed = low_pass(img, cfg)?;
    sharpen(&to_grayscale(&smoothed)?)
}
