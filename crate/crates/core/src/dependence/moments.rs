//! Centered Gram-matrix inner products in one pass over pairs.
//!
//! For symmetric `n × n` matrices `A` and `B` with centering matrix
//! `H = I - 11ᵀ/n`,
//!
//! ```text
//! ⟨HAH, HBH⟩ = Σᵢⱼ AᵢⱼBᵢⱼ − (2/n) Σᵢ rᴬᵢ rᴮᵢ + (Σrᴬ)(Σrᴮ)/n²
//! ```
//!
//! where `rᴬ` are row sums. This lets both the distance covariance and the
//! HSIC run in `O(n)` memory instead of materializing `n × n` matrices.

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// The three centered inner products needed for a normalized dependence
/// statistic between two Gram-like matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenteredMoments {
    /// `⟨HAH, HBH⟩`
    pub cross: f64,
    /// `⟨HAH, HAH⟩`
    pub left: f64,
    /// `⟨HBH, HBH⟩`
    pub right: f64,
}

/// Accumulates raw sums for one `(A, B)` pair; finishes into
/// [`CenteredMoments`].
pub(crate) struct MomentAccumulator {
    n: usize,
    row_a: Vec<f64>,
    row_b: Vec<f64>,
    ab: CompensatedSum,
    aa: CompensatedSum,
    bb: CompensatedSum,
}

impl MomentAccumulator {
    /// `diag_a`/`diag_b` are the constant diagonal entries (0 for distance
    /// matrices, 1 for normalized kernels).
    pub fn new(n: usize, diag_a: f64, diag_b: f64) -> Self {
        let mut ab = CompensatedSum::default();
        let mut aa = CompensatedSum::default();
        let mut bb = CompensatedSum::default();
        let nf = n as f64;
        ab.add(nf * diag_a * diag_b);
        aa.add(nf * diag_a * diag_a);
        bb.add(nf * diag_b * diag_b);
        Self {
            n,
            row_a: vec![diag_a; n],
            row_b: vec![diag_b; n],
            ab,
            aa,
            bb,
        }
    }

    /// Feeds the upper triangle of row `i`: `pairs` yields `(A_ij, B_ij)` for
    /// `j = i+1..n` in order.
    #[inline]
    pub fn push_row(&mut self, i: usize, pairs: impl Iterator<Item = (f64, f64)>) {
        let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
        let (mut ra, mut rb) = (0.0, 0.0);
        for (k, (a, b)) in pairs.enumerate() {
            let j = i + 1 + k;
            ab += a * b;
            aa += a * a;
            bb += b * b;
            ra += a;
            rb += b;
            self.row_a[j] += a;
            self.row_b[j] += b;
        }
        self.row_a[i] += ra;
        self.row_b[i] += rb;
        // off-diagonal terms appear twice in the full double sum
        self.ab.add(2.0 * ab);
        self.aa.add(2.0 * aa);
        self.bb.add(2.0 * bb);
    }

    pub fn finish(self) -> CenteredMoments {
        let nf = self.n as f64;
        let mut ra_rb = CompensatedSum::default();
        let mut ra_ra = CompensatedSum::default();
        let mut rb_rb = CompensatedSum::default();
        let mut sa = CompensatedSum::default();
        let mut sb = CompensatedSum::default();
        for (&a, &b) in self.row_a.iter().zip(&self.row_b) {
            ra_rb.add(a * b);
            ra_ra.add(a * a);
            rb_rb.add(b * b);
            sa.add(a);
            sb.add(b);
        }
        let (sa, sb) = (sa.value(), sb.value());
        let center =
            |raw: f64, rows: f64, s1: f64, s2: f64| raw - 2.0 * rows / nf + s1 * s2 / (nf * nf);
        CenteredMoments {
            cross: center(self.ab.value(), ra_rb.value(), sa, sb),
            left: center(self.aa.value(), ra_ra.value(), sa, sa),
            right: center(self.bb.value(), rb_rb.value(), sb, sb),
        }
    }
}

/// Squared Euclidean distance between two equal-length rows, summed in index
/// order.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s
}
