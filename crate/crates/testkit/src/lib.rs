//! Slow, obviously-correct reference implementations used as test oracles.
//!
//! Nothing here calls into the filter code under test except to build
//! `ImageBuffer` values; border handling and kernels are recomputed from
//! first principles.

use illusory_core::imaging::ImageBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(
    rng: &mut impl Rng,
    width: usize,
    height: usize,
    channels: usize,
) -> ImageBuffer {
    let data = (0..width * height * channels)
        .map(|_| rng.gen::<u8>())
        .collect();
    ImageBuffer::new(width, height, channels, data).expect("valid shape")
}

pub fn random_string(rng: &mut impl Rng, alphabet: &[char], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// `gfedcb|abcdefgh|gfedcba` by walking back and forth, one step at a time.
pub fn reflect101(mut i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

pub fn replicate(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

fn round_clamp(v: f64) -> u8 {
    let r = if v >= 0.0 {
        (v + 0.5).floor()
    } else {
        (v - 0.5).ceil()
    };
    r.clamp(0.0, 255.0) as u8
}

/// Gaussian taps from the closed form, summed and normalized by hand.
pub fn gaussian_taps(ksize: usize) -> Vec<f64> {
    let sigma = 0.3 * ((ksize as f64 - 1.0) / 2.0 - 1.0) + 0.8;
    let c = (ksize as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..ksize)
        .map(|i| (-(i as f64 - c).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Direct 2D correlation with reflect-101 borders, f64 accumulation.
pub fn correlate_oracle(
    img: &ImageBuffer,
    coeffs: &[f64],
    rows: usize,
    cols: usize,
    anchor: (usize, usize),
) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    ImageBuffer::from_fn(w, h, img.channels(), |x, y, c| {
        let mut acc = 0.0;
        for r in 0..rows {
            for q in 0..cols {
                let sy = reflect101(y as isize + r as isize - anchor.0 as isize, h);
                let sx = reflect101(x as isize + q as isize - anchor.1 as isize, w);
                acc += coeffs[r * cols + q] * f64::from(img.get(sx, sy, c));
            }
        }
        round_clamp(acc)
    })
    .expect("valid shape")
}

/// 2D Gaussian as one full convolution with the outer-product kernel.
pub fn gaussian_oracle(img: &ImageBuffer, ksize: usize) -> ImageBuffer {
    let t = gaussian_taps(ksize);
    let coeffs: Vec<f64> = t
        .iter()
        .flat_map(|a| t.iter().map(move |b| a * b))
        .collect();
    correlate_oracle(img, &coeffs, ksize, ksize, (ksize / 2, ksize / 2))
}

/// Window mean with the anchor at `k / 2`, computed with integer sums.
pub fn box_oracle(img: &ImageBuffer, kw: usize, kh: usize) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let n = (kw * kh) as u64;
    ImageBuffer::from_fn(w, h, img.channels(), |x, y, c| {
        let mut sum = 0u64;
        for dy in 0..kh as isize {
            for dx in 0..kw as isize {
                let sy = reflect101(y as isize + dy - (kh / 2) as isize, h);
                let sx = reflect101(x as isize + dx - (kw / 2) as isize, w);
                sum += u64::from(img.get(sx, sy, c));
            }
        }
        ((2 * sum + n) / (2 * n)) as u8
    })
    .expect("valid shape")
}

/// Sorts every replicate-padded window and takes the middle element.
pub fn median_oracle(img: &ImageBuffer, ksize: usize) -> ImageBuffer {
    let (w, h) = (img.width(), img.height());
    let r = (ksize / 2) as isize;
    ImageBuffer::from_fn(w, h, img.channels(), |x, y, c| {
        let mut window = Vec::with_capacity(ksize * ksize);
        for dy in -r..=r {
            for dx in -r..=r {
                window.push(img.get(
                    replicate(x as isize + dx, w),
                    replicate(y as isize + dy, h),
                    c,
                ));
            }
        }
        window.sort_unstable();
        window[window.len() / 2]
    })
    .expect("valid shape")
}

/// Mean squared 4-neighbour Laplacian over interior pixels of a gray image.
pub fn laplacian_energy_oracle(img: &ImageBuffer) -> f64 {
    let (w, h) = (img.width(), img.height());
    let p = |x: usize, y: usize| f64::from(img.get(x, y, 0));
    let mut total = 0.0;
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = p(x - 1, y) + p(x + 1, y) + p(x, y - 1) + p(x, y + 1) - 4.0 * p(x, y);
            total += v * v;
        }
    }
    total / ((w - 2) * (h - 2)) as f64
}

/// Edit distance via the full (|a|+1)×(|b|+1) table.
pub fn levenshtein_oracle<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=b.len() {
        d[0][j] = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

/// Largest absolute per-sample difference between two same-shape images.
pub fn max_abs_diff(a: &ImageBuffer, b: &ImageBuffer) -> u8 {
    assert!(a.same_shape(b), "shape mismatch");
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| x.abs_diff(*y))
        .max()
        .unwrap_or(0)
}

pub mod fixture {
    //! A tiny on-disk classification set whose images encode their index, and
    //! a mock reply rule that answers correctly by reading that index back.

    use std::path::Path;

    use base64::Engine;
    use illusory_core::client::mock::{MockReply, MockRequest};
    use illusory_core::dataset::{
        builtin_labelset, Manifest, SampleKind, SampleRecord, Split, Variant,
    };
    use illusory_core::imaging::io::{decode_image, write_image};
    use illusory_core::imaging::ImageBuffer;

    pub const SIZE: usize = 8;

    fn class_of(value: u8) -> String {
        let set = builtin_labelset("IllusionAnimals", true).unwrap();
        set.concept_classes()[value as usize % 10].clone()
    }

    pub fn sample_id(i: usize) -> String {
        format!("q{i:03}")
    }

    /// `n` samples; sample `i` is a constant `(i, i, i)` image labeled with
    /// animal class `i % 10`.
    pub fn write_set(root: &Path, n: usize) -> Manifest {
        assert!(n <= 256);
        let records = (0..n)
            .map(|i| {
                let v = i as u8;
                let rel = format!("images/{}.png", sample_id(i));
                write_image(
                    root.join(&rel),
                    &ImageBuffer::filled(SIZE, SIZE, &[v, v, v]).unwrap(),
                )
                .unwrap();
                SampleRecord {
                    id: sample_id(i),
                    image_path: rel,
                    variant: Variant::Illusion,
                    kind: SampleKind::Classification,
                    true_label: class_of(v),
                    split: Split::Test,
                }
            })
            .collect();
        let manifest = Manifest::new(builtin_labelset("IllusionAnimals", true), records).unwrap();
        manifest.write(root.join("manifest.jsonl")).unwrap();
        manifest
    }

    /// First sample of the PNG carried in a `data:image/png;base64,` URL.
    pub fn first_sample(url: &str) -> Option<u8> {
        let b64 = url.strip_prefix("data:image/png;base64,")?;
        let png = base64::engine::general_purpose::STANDARD.decode(b64).ok()?;
        decode_image(&png).ok().map(|img| img.data()[0])
    }

    /// The reply a well-behaved model would give for `request`.
    pub fn expected_answer(request: &MockRequest) -> String {
        match first_sample(&request.image_url) {
            Some(v) => format!("It is a {}.", class_of(v)),
            None => "unreadable".into(),
        }
    }

    pub fn answer(request: &MockRequest) -> MockReply {
        MockReply::text(&expected_answer(request))
    }
}
