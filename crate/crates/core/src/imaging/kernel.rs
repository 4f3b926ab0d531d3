use super::ImagingError;

/// A normalized, symmetric 1-D kernel with its anchor at the center tap.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    coefficients: Vec<f64>,
}

impl Kernel1D {
    /// Accepts an odd-length, symmetric coefficient vector and rescales it to
    /// sum to one.
    pub fn new(coefficients: Vec<f64>) -> Result<Self, ImagingError> {
        let n = coefficients.len();
        if n == 0 || n.is_multiple_of(2) {
            return Err(ImagingError::bad_kernel("ksize", n, "must be odd and >= 1"));
        }
        let sum: f64 = coefficients.iter().sum();
        if !sum.is_finite() || sum == 0.0 {
            return Err(ImagingError::InvalidKernel(format!(
                "coefficients must have a finite non-zero sum, got {sum}"
            )));
        }
        let coefficients: Vec<f64> = coefficients.into_iter().map(|c| c / sum).collect();
        let symmetric =
            (0..n / 2).all(|i| (coefficients[i] - coefficients[n - 1 - i]).abs() < 1e-15);
        if !symmetric {
            return Err(ImagingError::InvalidKernel(
                "1-D kernels must be symmetric about the center".into(),
            ));
        }
        Ok(Kernel1D { coefficients })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.coefficients.len() / 2
    }

    /// Outer product `self ⊗ self` as a centered 2-D kernel.
    pub fn outer(&self) -> Kernel2D {
        let n = self.len();
        let mut coefficients = Vec::with_capacity(n * n);
        for a in &self.coefficients {
            for b in &self.coefficients {
                coefficients.push(a * b);
            }
        }
        Kernel2D::new(n, n, coefficients, (n / 2, n / 2)).expect("square kernel is valid")
    }
}

/// Standard deviation used for a Gaussian of size `ksize` when none is given.
pub(crate) fn sigma_for_ksize(ksize: usize) -> f64 {
    0.3 * ((ksize as f64 - 1.0) * 0.5 - 1.0) + 0.8
}

/// Sampled Gaussian of odd size `ksize` with the size-derived sigma
/// `0.3 * ((ksize - 1) / 2 - 1) + 0.8`, normalized to unit sum.
pub fn make_gaussian_kernel(ksize: usize) -> Result<Kernel1D, ImagingError> {
    if ksize == 0 || ksize.is_multiple_of(2) {
        return Err(ImagingError::bad_kernel(
            "ksize",
            ksize,
            "must be odd and >= 1",
        ));
    }
    let sigma = sigma_for_ksize(ksize);
    let center = ((ksize - 1) / 2) as f64;
    let denom = 2.0 * sigma * sigma;
    let raw = (0..ksize)
        .map(|i| {
            let d = i as f64 - center;
            (-d * d / denom).exp()
        })
        .collect();
    Kernel1D::new(raw)
}

/// A dense 2-D correlation kernel with an explicit anchor `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    rows: usize,
    cols: usize,
    coefficients: Vec<f64>,
    anchor: (usize, usize),
}

impl Kernel2D {
    pub fn new(
        rows: usize,
        cols: usize,
        coefficients: Vec<f64>,
        anchor: (usize, usize),
    ) -> Result<Self, ImagingError> {
        if rows == 0 {
            return Err(ImagingError::bad_kernel("kh", rows, "must be >= 1"));
        }
        if cols == 0 {
            return Err(ImagingError::bad_kernel("kw", cols, "must be >= 1"));
        }
        if coefficients.len() != rows * cols {
            return Err(ImagingError::InvalidKernel(format!(
                "{} coefficients for a {rows}x{cols} kernel",
                coefficients.len()
            )));
        }
        if anchor.0 >= rows || anchor.1 >= cols {
            return Err(ImagingError::InvalidKernel(format!(
                "anchor {anchor:?} outside {rows}x{cols} kernel"
            )));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(ImagingError::InvalidKernel("non-finite coefficient".into()));
        }
        Ok(Kernel2D {
            rows,
            cols,
            coefficients,
            anchor,
        })
    }

    /// Builds a centered kernel from nested rows.
    pub fn from_rows<const R: usize, const C: usize>(
        rows: [[f64; C]; R],
    ) -> Result<Self, ImagingError> {
        let coefficients = rows.iter().flatten().copied().collect();
        Kernel2D::new(R, C, coefficients, (R / 2, C / 2))
    }

    /// The fixed 3x3 sharpening kernel of the reveal pipeline; unit DC gain.
    pub fn sharpening() -> Self {
        Kernel2D::from_rows([[-1.0, -2.0, -1.0], [-2.0, 13.0, -2.0], [-1.0, -2.0, -1.0]])
            .expect("constant kernel")
    }

    /// 4-neighbour Laplacian.
    pub fn laplacian() -> Self {
        Kernel2D::from_rows([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
            .expect("constant kernel")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.coefficients[row * self.cols + col]
    }

    pub fn sum(&self) -> f64 {
        self.coefficients.iter().sum()
    }
}
