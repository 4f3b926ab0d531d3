//! PNG and binary PGM (P5) / PPM (P6) reading and writing.
//!
//! Gray files load as 1-channel buffers; anything with color loads as RGB
//! (alpha is dropped).

use std::fs::File;
use std::io::{BufWriter, Cursor, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use super::{ImageBuffer, ImagingError};

/// File encodings understood by [`read_image`] / [`write_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Png,
    Pgm,
    Ppm,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self, ImagingError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "png" => Ok(ImageFormat::Png),
            "pgm" => Ok(ImageFormat::Pgm),
            "ppm" => Ok(ImageFormat::Ppm),
            _ => Err(ImagingError::UnsupportedFormat(path.display().to_string())),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Pgm => "pgm",
            ImageFormat::Ppm => "ppm",
        }
    }
}

fn color_type(img: &ImageBuffer) -> ExtendedColorType {
    if img.channels() == 1 {
        ExtendedColorType::L8
    } else {
        ExtendedColorType::Rgb8
    }
}

fn from_dynamic(decoded: DynamicImage) -> Result<ImageBuffer, ImagingError> {
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    if decoded.color().has_color() {
        ImageBuffer::new(w, h, 3, decoded.to_rgb8().into_raw())
    } else {
        ImageBuffer::new(w, h, 1, decoded.to_luma8().into_raw())
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuffer, ImagingError> {
    let decoded = ImageReader::open(path.as_ref())?
        .with_guessed_format()?
        .decode()?;
    from_dynamic(decoded)
}

/// Decodes an in-memory PNG/PNM file.
pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer, ImagingError> {
    let decoded = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()?
        .decode()?;
    from_dynamic(decoded)
}

/// Encodes `img` in `format` into `out`.
pub fn encode_image(
    img: &ImageBuffer,
    format: ImageFormat,
    out: impl Write,
) -> Result<(), ImagingError> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    match format {
        ImageFormat::Png => PngEncoder::new(out).write_image(img.data(), w, h, color_type(img))?,
        ImageFormat::Pgm => {
            img.require_channels(1)?;
            PnmEncoder::new(out)
                .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
                .write_image(img.data(), w, h, ExtendedColorType::L8)?
        }
        ImageFormat::Ppm => {
            img.require_channels(3)?;
            PnmEncoder::new(out)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(img.data(), w, h, ExtendedColorType::Rgb8)?
        }
    }
    Ok(())
}

pub fn encode_png(img: &ImageBuffer) -> Result<Vec<u8>, ImagingError> {
    let mut bytes = Vec::new();
    encode_image(img, ImageFormat::Png, &mut bytes)?;
    Ok(bytes)
}

/// Writes `img` with the encoding implied by the file extension, creating
/// parent directories as needed.
pub fn write_image(path: impl AsRef<Path>, img: &ImageBuffer) -> Result<(), ImagingError> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path)?;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut writer = BufWriter::new(File::create(path)?);
    encode_image(img, format, &mut writer)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_bytes_are_plain() {
        let img = ImageBuffer::new(2, 1, 1, vec![7, 200]).unwrap();
        let mut bytes = Vec::new();
        encode_image(&img, ImageFormat::Pgm, &mut bytes).unwrap();
        assert!(bytes.starts_with(b"P5"));
        assert!(bytes.ends_with(&[7, 200]));
        assert_eq!(decode_image(&bytes).unwrap(), img);
    }

    #[test]
    fn ppm_round_trip() {
        let img = ImageBuffer::from_fn(3, 2, 3, |x, y, c| (x * 50 + y * 20 + c) as u8).unwrap();
        let mut bytes = Vec::new();
        encode_image(&img, ImageFormat::Ppm, &mut bytes).unwrap();
        assert!(bytes.starts_with(b"P6"));
        assert_eq!(decode_image(&bytes).unwrap(), img);
    }

    #[test]
    fn png_round_trip_gray_and_rgb() {
        let gray = ImageBuffer::from_fn(4, 3, 1, |x, y, _| (x * 60 + y) as u8).unwrap();
        assert_eq!(decode_image(&encode_png(&gray).unwrap()).unwrap(), gray);
        let rgb = ImageBuffer::from_fn(4, 3, 3, |x, y, c| (x * 60 + y * 3 + c) as u8).unwrap();
        assert_eq!(decode_image(&encode_png(&rgb).unwrap()).unwrap(), rgb);
    }

    #[test]
    fn channel_format_mismatch() {
        let rgb = ImageBuffer::filled(2, 2, &[1, 2, 3]).unwrap();
        assert!(encode_image(&rgb, ImageFormat::Pgm, Vec::new()).is_err());
    }

    #[test]
    fn unknown_extension() {
        assert!(ImageFormat::from_path(Path::new("a.jpg")).is_err());
        assert_eq!(
            ImageFormat::from_path(Path::new("a.PNG")).unwrap(),
            ImageFormat::Png
        );
    }
}
