//! Synthetic wideband multipath channels and their autocorrelation matrices.
//!
//! Each surface element sees two tapped-delay-line links: source to element
//! and element to receiver. The cascaded per-element channel is the linear
//! convolution of the two, collected columnwise into an `L x N` matrix. Its
//! Gram matrix `R = H^H H` is the channel autocorrelation matrix: for any
//! unit-modulus reflection vector the wideband channel power equals
//! `v^H R v`, which the frequency response computed with a unitary DFT
//! reproduces exactly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::complexmat::ComplexMatrixJson;
use crate::error::{Error, Result};
use crate::reflection::ReflectionVector;
use crate::stream::{self, substream};

/// OFDM and codebook parameters shared across the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    /// Number of reflecting elements.
    pub n: usize,
    /// Number of OFDM subcarriers.
    pub m: usize,
    /// Per-subcarrier transmit power in watts.
    pub p0: f64,
    /// Per-subcarrier noise power in watts.
    pub sigma2: f64,
    /// Phase-shift resolution in bits; the codebook has `2^b` points.
    pub b: u32,
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config("N and M must be positive".into()));
        }
        if !(self.p0 > 0.0) {
            return Err(Error::Config("P0 must be positive".into()));
        }
        if !(self.sigma2 >= 0.0) {
            return Err(Error::Config("sigma2 must be nonnegative".into()));
        }
        if !(1..=8).contains(&self.b) {
            return Err(Error::Config("b must be in 1..=8".into()));
        }
        Ok(())
    }

    /// The `2^b`-point phase codebook.
    pub fn codebook(&self) -> Vec<Complex64> {
        (0..(1u32 << self.b))
            .map(|i| ReflectionVector::phase(self.b, i as u8))
            .collect()
    }
}

/// Multipath generation parameters for one scenario.
///
/// Paths are physical rays: each draws a delay bin (exponentially weighted
/// towards small delays) and a circularly-symmetric Gaussian gain. Several
/// rays may land in the same bin, so the number of occupied taps — which
/// bounds the rank of the autocorrelation matrix — is typically well below
/// the number of rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipathProfile {
    /// Delay taps available on the source-to-surface link.
    pub l_g: usize,
    /// Delay taps available on the surface-to-receiver link.
    pub l_r: usize,
    /// Inclusive path-count range for the source-to-surface link.
    pub paths_g: (usize, usize),
    /// Inclusive path-count range for the surface-to-receiver link.
    pub paths_r: (usize, usize),
    /// Exponential delay-profile decay for the source-to-surface link.
    pub decay_g: f64,
    /// Exponential delay-profile decay for the surface-to-receiver link.
    pub decay_r: f64,
}

impl MultipathProfile {
    pub fn validate(&self) -> Result<()> {
        if self.l_g == 0 || self.l_r == 0 {
            return Err(Error::InvalidProfile("tap counts must be positive".into()));
        }
        if !(self.decay_g > 0.0) || !(self.decay_r > 0.0) {
            return Err(Error::InvalidProfile("decay must be positive".into()));
        }
        let ok = |range: (usize, usize), l: usize| range.0 >= 1 && range.0 <= range.1 && range.1 <= l;
        if !ok(self.paths_g, self.l_g) {
            return Err(Error::InvalidProfile(format!(
                "source-link path range {:?} outside [1, {}]",
                self.paths_g, self.l_g
            )));
        }
        if !ok(self.paths_r, self.l_r) {
            return Err(Error::InvalidProfile(format!(
                "receiver-link path range {:?} outside [1, {}]",
                self.paths_r, self.l_r
            )));
        }
        Ok(())
    }

    /// Total cascaded tap count `L = L_g + L_r - 1`.
    pub fn total_taps(&self) -> usize {
        self.l_g + self.l_r - 1
    }
}

/// Per-element tapped delay lines of one link; rows are delay taps, columns
/// are elements.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTaps {
    taps: DMatrix<Complex64>,
}

impl LinkTaps {
    pub fn new(taps: DMatrix<Complex64>) -> Result<Self> {
        if taps.nrows() == 0 || taps.ncols() == 0 {
            return Err(Error::EmptyInput("link taps must be nonempty".into()));
        }
        Ok(Self { taps })
    }

    pub fn tap_count(&self) -> usize {
        self.taps.nrows()
    }

    pub fn elements(&self) -> usize {
        self.taps.ncols()
    }

    pub fn taps(&self) -> &DMatrix<Complex64> {
        &self.taps
    }
}

/// Cascaded per-element channel matrix `H_c` (`L x N`).
#[derive(Debug, Clone, PartialEq)]
pub struct CascadedChannel {
    h: DMatrix<Complex64>,
}

impl CascadedChannel {
    pub fn taps(&self) -> usize {
        self.h.nrows()
    }

    pub fn elements(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    /// Composite impulse response `h = H_c v` for one reflection vector.
    pub fn impulse_response(&self, v: &ReflectionVector) -> Result<DVector<Complex64>> {
        if v.len() != self.elements() {
            return Err(Error::DimensionMismatch(format!(
                "reflection vector has {} entries, channel has {} elements",
                v.len(),
                self.elements()
            )));
        }
        Ok(&self.h * v.value())
    }
}

/// Hermitian channel autocorrelation matrix `R = H^H H` (or an estimate).
#[derive(Debug, Clone, PartialEq)]
pub struct AutocorrMatrix {
    r: DMatrix<Complex64>,
}

impl AutocorrMatrix {
    /// Wrap a Hermitian matrix, symmetrizing away floating-point asymmetry.
    pub fn new(r: DMatrix<Complex64>) -> Result<Self> {
        if r.nrows() != r.ncols() || r.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "autocorrelation matrix must be square and nonempty, got {}x{}",
                r.nrows(),
                r.ncols()
            )));
        }
        let sym = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { r: sym })
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.r
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.r
    }

    /// Real part, the estimation target for the 1-bit codebook.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.r.map(|z| z.re)
    }

    /// Numerical rank at a relative eigenvalue threshold.
    pub fn numerical_rank(&self, rel_tol: f64) -> usize {
        let eig = self.r.clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, |a, b| a.max(b.abs()));
        if max == 0.0 {
            return 0;
        }
        eig.eigenvalues.iter().filter(|l| l.abs() > rel_tol * max).count()
    }

    /// Smallest eigenvalue relative to the largest (negative when the matrix
    /// is not PSD).
    pub fn min_eigenvalue_ratio(&self) -> f64 {
        let eig = self.r.clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if max <= 0.0 {
            return 0.0;
        }
        min / max
    }

    /// Nearest PSD matrix in Frobenius norm: clip negative eigenvalues.
    pub fn nearest_psd(&self) -> AutocorrMatrix {
        let eig = self.r.clone().symmetric_eigen();
        let clipped = DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0), 0.0)),
        );
        let r = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.adjoint();
        AutocorrMatrix::new(r).expect("square by construction")
    }
}

/// One circularly-symmetric complex Gaussian draw with the given variance.
fn complex_gaussian(rng: &mut impl Rng, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

fn draw_link(
    rng: &mut impl Rng,
    taps: usize,
    elements: usize,
    path_range: (usize, usize),
    decay: f64,
) -> (LinkTaps, usize) {
    // Delay bins are drawn with probability proportional to exp(-decay * bin),
    // so the expected power-delay profile decays exponentially.
    let weights: Vec<f64> = (0..taps).map(|d| (-decay * d as f64).exp()).collect();
    let total: f64 = weights.iter().sum();

    let path_count = rng.gen_range(path_range.0..=path_range.1);
    let mut m = DMatrix::zeros(taps, elements);
    for _ in 0..path_count {
        let mut u = rng.gen::<f64>() * total;
        let mut delay = taps - 1;
        for (d, w) in weights.iter().enumerate() {
            if u < *w {
                delay = d;
                break;
            }
            u -= w;
        }
        // Per-element gains of one ray, normalized so the expected total
        // power per element is independent of the path count.
        let per_path_power = 1.0 / path_count as f64;
        for e in 0..elements {
            m[(delay, e)] += complex_gaussian(rng, per_path_power);
        }
    }
    (LinkTaps { taps: m }, path_count)
}

/// Draw the two links for one receiver location.
///
/// The source-to-surface link is a single physical channel: it depends only
/// on the seed, not the location. The surface-to-receiver link is drawn
/// independently per location.
pub fn generate_location_channels(
    seed: u64,
    location: usize,
    profile: &MultipathProfile,
    elements: usize,
) -> Result<(LinkTaps, LinkTaps)> {
    generate_location_channels_counting(seed, location, profile, elements)
        .map(|(g, r, _)| (g, r))
}

/// Same as [`generate_location_channels`], additionally reporting the number
/// of cascaded ray pairs (source rays times receiver rays).
pub fn generate_location_channels_counting(
    seed: u64,
    location: usize,
    profile: &MultipathProfile,
    elements: usize,
) -> Result<(LinkTaps, LinkTaps, usize)> {
    profile.validate()?;
    if elements == 0 {
        return Err(Error::Config("element count must be positive".into()));
    }
    let mut rng_g = substream(seed, &[stream::LINK_BS_IRS]);
    let (g, count_g) =
        draw_link(&mut rng_g, profile.l_g, elements, profile.paths_g, profile.decay_g);
    let mut rng_r = substream(seed, &[stream::LINK_IRS_RX, location as u64]);
    let (r, count_r) =
        draw_link(&mut rng_r, profile.l_r, elements, profile.paths_r, profile.decay_r);
    Ok((g, r, count_g * count_r))
}

/// Cascade two links: per element, the full linear convolution of the tap
/// columns; the result has `L_g + L_r - 1` taps.
pub fn cascade(g: &LinkTaps, r: &LinkTaps) -> Result<CascadedChannel> {
    if g.elements() != r.elements() {
        return Err(Error::DimensionMismatch(format!(
            "links disagree on element count: {} vs {}",
            g.elements(),
            r.elements()
        )));
    }
    let (lg, lr, n) = (g.tap_count(), r.tap_count(), g.elements());
    let l = lg + lr - 1;
    let mut h = DMatrix::zeros(l, n);
    for e in 0..n {
        for a in 0..lg {
            let ga = g.taps[(a, e)];
            if ga == Complex64::new(0.0, 0.0) {
                continue;
            }
            for b in 0..lr {
                h[(a + b, e)] += ga * r.taps[(b, e)];
            }
        }
    }
    Ok(CascadedChannel { h })
}

/// Channel autocorrelation matrix `R = H^H H`.
pub fn autocorrelation(channel: &CascadedChannel) -> AutocorrMatrix {
    let r = channel.h.adjoint() * &channel.h;
    AutocorrMatrix::new(r).expect("gram matrix is square")
}

/// Channel frequency response over `m` subcarriers using the unitary DFT.
///
/// The impulse response `H_c v` is zero-padded to length `m`; unitarity makes
/// `||cfr||^2 = v^H R v` hold exactly.
pub fn cfr(
    channel: &CascadedChannel,
    v: &ReflectionVector,
    m: usize,
) -> Result<DVector<Complex64>> {
    let l = channel.taps();
    if l > m {
        return Err(Error::PadError { taps: l, subcarriers: m });
    }
    let h = channel.impulse_response(v)?;
    let scale = 1.0 / (m as f64).sqrt();
    let mut out = DVector::zeros(m);
    for k in 0..m {
        let mut acc = Complex64::new(0.0, 0.0);
        for (tap, &value) in h.iter().enumerate() {
            let angle = -std::f64::consts::TAU * (k * tap) as f64 / m as f64;
            acc += value * Complex64::from_polar(1.0, angle);
        }
        out[k] = acc * scale;
    }
    Ok(out)
}

/// Serializable snapshot of the cascaded channels (and exact autocorrelation
/// matrices) at all sampled locations, for test-vector pinning.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelSnapshot {
    pub elements: usize,
    pub taps: usize,
    pub seed: u64,
    pub profile: MultipathProfile,
    pub locations: Vec<LocationChannelJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocationChannelJson {
    pub location: usize,
    pub cascaded: ComplexMatrixJson,
}

impl ChannelSnapshot {
    pub fn capture(
        seed: u64,
        profile: &MultipathProfile,
        elements: usize,
        locations: usize,
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(locations);
        for k in 0..locations {
            let (g, r) = generate_location_channels(seed, k, profile, elements)?;
            let cascaded = cascade(&g, &r)?;
            out.push(LocationChannelJson {
                location: k,
                cascaded: ComplexMatrixJson::from_matrix(cascaded.matrix()),
            });
        }
        Ok(Self {
            elements,
            taps: profile.total_taps(),
            seed,
            profile: *profile,
            locations: out,
        })
    }

    pub fn channel(&self, index: usize) -> Result<CascadedChannel> {
        let loc = self
            .locations
            .get(index)
            .ok_or_else(|| Error::EmptyInput(format!("no location {index} in snapshot")))?;
        Ok(CascadedChannel { h: loc.cascaded.to_matrix()? })
    }
}
