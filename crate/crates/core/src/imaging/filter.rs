use super::{make_gaussian_kernel, saturate, BorderMode, ImageBuffer, ImagingError, Kernel2D};

/// For every output coordinate `p` in `0..len`, the source indices of the
/// taps `p - anchor .. p - anchor + taps`, already resolved through `border`.
fn tap_table(len: usize, taps: usize, anchor: usize, border: BorderMode) -> Vec<usize> {
    let mut table = Vec::with_capacity(len * taps);
    for p in 0..len {
        for t in 0..taps {
            table.push(border.resolve(p as isize + t as isize - anchor as isize, len));
        }
    }
    table
}

/// Rec.601 luma of an RGB image.
pub fn to_grayscale(img: &ImageBuffer) -> Result<ImageBuffer, ImagingError> {
    img.require_channels(3)?;
    let data = img
        .data()
        .chunks_exact(3)
        .map(|p| saturate(0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64))
        .collect();
    ImageBuffer::new(img.width(), img.height(), 1, data)
}

/// One 1-D correlation pass along rows (`horizontal`) or columns, rounding
/// into a fresh 8-bit buffer.
fn separable_pass(src: &ImageBuffer, coeffs: &[f64], horizontal: bool) -> ImageBuffer {
    let (w, h, ch) = (src.width(), src.height(), src.channels());
    let k = coeffs.len();
    let len = if horizontal { w } else { h };
    let table = tap_table(len, k, k / 2, BorderMode::Reflect101);
    let data = src.data();
    let mut out = vec![0u8; data.len()];
    for y in 0..h {
        for x in 0..w {
            let p = if horizontal { x } else { y };
            let taps = &table[p * k..(p + 1) * k];
            for c in 0..ch {
                let mut acc = 0.0f64;
                for (&coef, &s) in coeffs.iter().zip(taps) {
                    let (sx, sy) = if horizontal { (s, y) } else { (x, s) };
                    acc += coef * data[(sy * w + sx) * ch + c] as f64;
                }
                out[(y * w + x) * ch + c] = saturate(acc);
            }
        }
    }
    ImageBuffer::new(w, h, ch, out).expect("same geometry")
}

/// Separable Gaussian blur with a size-derived sigma and reflect-101 borders.
///
/// The horizontal pass runs first; each pass rounds and saturates on write.
pub fn gaussian_blur(img: &ImageBuffer, ksize: usize) -> Result<ImageBuffer, ImagingError> {
    let kernel = make_gaussian_kernel(ksize)?;
    if ksize == 1 {
        return Ok(img.clone());
    }
    let horizontal = separable_pass(img, kernel.coefficients(), true);
    Ok(separable_pass(&horizontal, kernel.coefficients(), false))
}

/// Normalized box filter of `kw x kh` with reflect-101 borders.
///
/// The anchor sits at `(kw / 2, kh / 2)`, so an even extent covers one more
/// sample before the pixel than after it (`[x - 10, x + 9]` for 20). Window
/// sums are exact integers; only the final mean is rounded.
pub fn box_blur(img: &ImageBuffer, kw: usize, kh: usize) -> Result<ImageBuffer, ImagingError> {
    if kw == 0 {
        return Err(ImagingError::bad_kernel("kw", kw, "must be >= 1"));
    }
    if kh == 0 {
        return Err(ImagingError::bad_kernel("kh", kh, "must be >= 1"));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let data = img.data();
    let xs = tap_table(w, kw, kw / 2, BorderMode::Reflect101);
    let ys = tap_table(h, kh, kh / 2, BorderMode::Reflect101);

    let mut row_sums = vec![0u32; data.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                row_sums[(y * w + x) * ch + c] = xs[x * kw..(x + 1) * kw]
                    .iter()
                    .map(|&sx| data[(y * w + sx) * ch + c] as u32)
                    .sum();
            }
        }
    }

    let area = (kw * kh) as f64;
    let mut out = vec![0u8; data.len()];
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                let total: u32 = ys[y * kh..(y + 1) * kh]
                    .iter()
                    .map(|&sy| row_sums[(sy * w + x) * ch + c])
                    .sum();
                out[(y * w + x) * ch + c] = saturate(total as f64 / area);
            }
        }
    }
    ImageBuffer::new(w, h, ch, out)
}

/// Exact `ksize x ksize` median per channel with replicated borders.
///
/// Uses a running 256-bin histogram that slides along each row.
pub fn median_blur(img: &ImageBuffer, ksize: usize) -> Result<ImageBuffer, ImagingError> {
    if ksize < 3 || ksize.is_multiple_of(2) {
        return Err(ImagingError::bad_kernel(
            "ksize",
            ksize,
            "must be odd and >= 3",
        ));
    }
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let data = img.data();
    let r = (ksize / 2) as isize;
    let rank = (ksize * ksize - 1) / 2;
    let border = BorderMode::Replicate;
    let mut out = vec![0u8; data.len()];

    let rows_of = |y: usize| -> Vec<usize> {
        (-r..=r)
            .map(|d| border.resolve(y as isize + d, h))
            .collect()
    };
    let sample = |x: usize, y: usize, c: usize| data[(y * w + x) * ch + c] as usize;

    for y in 0..h {
        let rows = rows_of(y);
        for c in 0..ch {
            let mut hist = [0u32; 256];
            for dx in -r..=r {
                let sx = border.resolve(dx, w);
                for &sy in &rows {
                    hist[sample(sx, sy, c)] += 1;
                }
            }
            for x in 0..w {
                if x > 0 {
                    let leaving = border.resolve(x as isize - r - 1, w);
                    let entering = border.resolve(x as isize + r, w);
                    for &sy in &rows {
                        hist[sample(leaving, sy, c)] -= 1;
                        hist[sample(entering, sy, c)] += 1;
                    }
                }
                let mut seen = 0u32;
                let mut value = 0usize;
                for (v, &count) in hist.iter().enumerate() {
                    seen += count;
                    if seen as usize > rank {
                        value = v;
                        break;
                    }
                }
                out[(y * w + x) * ch + c] = value as u8;
            }
        }
    }
    ImageBuffer::new(w, h, ch, out)
}

/// 2-D correlation (the kernel is not flipped), per channel, with saturation.
pub fn convolve(
    img: &ImageBuffer,
    kernel: &Kernel2D,
    border: BorderMode,
) -> Result<ImageBuffer, ImagingError> {
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let (kh, kw) = (kernel.rows(), kernel.cols());
    let (ay, ax) = kernel.anchor();
    let xs = tap_table(w, kw, ax, border);
    let ys = tap_table(h, kh, ay, border);
    let data = img.data();
    let coeffs = kernel.coefficients();
    let mut out = vec![0u8; data.len()];
    for y in 0..h {
        let yrow = &ys[y * kh..(y + 1) * kh];
        for x in 0..w {
            let xrow = &xs[x * kw..(x + 1) * kw];
            for c in 0..ch {
                let mut acc = 0.0f64;
                for (i, &sy) in yrow.iter().enumerate() {
                    let krow = &coeffs[i * kw..(i + 1) * kw];
                    for (&coef, &sx) in krow.iter().zip(xrow) {
                        acc += coef * data[(sy * w + sx) * ch + c] as f64;
                    }
                }
                out[(y * w + x) * ch + c] = saturate(acc);
            }
        }
    }
    ImageBuffer::new(w, h, ch, out)
}

/// Applies the fixed sharpening kernel to a gray image.
pub fn sharpen(img: &ImageBuffer) -> Result<ImageBuffer, ImagingError> {
    img.require_channels(1)?;
    convolve(img, &Kernel2D::sharpening(), BorderMode::Reflect101)
}

/// Mean squared 4-neighbour Laplacian response over interior pixels.
///
/// Used as a scalar measure of how much high-frequency content a gray image
/// carries; no clamping is applied to the response.
pub fn highband_energy(img: &ImageBuffer) -> Result<f64, ImagingError> {
    img.require_channels(1)?;
    let (w, h) = (img.width(), img.height());
    if w < 3 || h < 3 {
        return Err(ImagingError::ImageTooSmall {
            width: w,
            height: h,
            min: 3,
        });
    }
    let v = |x: usize, y: usize| img.get(x, y, 0) as f64;
    let mut total = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let response = v(x - 1, y) + v(x + 1, y) + v(x, y - 1) + v(x, y + 1) - 4.0 * v(x, y);
            total += response * response;
        }
    }
    Ok(total / ((w - 2) * (h - 2)) as f64)
}
