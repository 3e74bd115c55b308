//! Uniform samples from Euclidean annuli `{ y in R^n : r <= |y| <= s }`.
//!
//! Directions are normalised standard Gaussian vectors and radii come from
//! the inverse of the radial CDF `F(ρ) = (ρ^n - r^n) / (s^n - r^n)`. All
//! randomness is drawn from ChaCha20 streams seeded through [`derive_seed`],
//! and all transcendental functions come from `libm`, so a seed fixes the
//! output bit for bit on every platform.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Identifier of the random number pipeline, recorded with every result.
pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.9+splitmix64-seeds+libm-polar-gaussian";

/// The generator used everywhere in this crate.
pub type Generator = ChaCha20Rng;

pub fn generator(seed: u64) -> Generator {
    ChaCha20Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a global seed with a path of indices (point id, draw, ...).
///
/// Work items seeded this way are independent of scheduling order.
pub fn derive_seed(global: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(global), |h, &p| splitmix64(h ^ splitmix64(p)))
}

/// One standard normal deviate by the Marsaglia polar method.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * rng.random::<f64>() - 1.0;
        let v = 2.0 * rng.random::<f64>() - 1.0;
        let q = u * u + v * v;
        if q > 0.0 && q < 1.0 {
            return u * libm::sqrt(-2.0 * libm::log(q) / q);
        }
    }
}

/// Uniform direction on `S^{n-1}`, written into `out`.
pub fn unit_direction<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    loop {
        let mut norm2 = 0.0;
        for c in out.iter_mut() {
            *c = standard_normal(rng);
            norm2 += *c * *c;
        }
        if norm2 > 0.0 {
            let inv = 1.0 / libm::sqrt(norm2);
            out.iter_mut().for_each(|c| *c *= inv);
            return;
        }
    }
}

/// Radius with density proportional to `ρ^(n-1)` on `[r, s]`.
pub fn annulus_radius<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64, s: f64) -> f64 {
    let u: f64 = rng.random();
    let nf = n as f64;
    let lo = libm::pow(r, nf);
    let hi = libm::pow(s, nf);
    libm::pow(lo + u * (hi - lo), 1.0 / nf).clamp(r, s)
}

/// Uniform points of a Euclidean annulus centred at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanAnnulusSample {
    pub intrinsic_dim: usize,
    pub center: Vec<f64>,
    pub inner_radius: f64,
    pub outer_radius: f64,
    /// Row-major, `intrinsic_dim` coordinates per point.
    pub points: Vec<f64>,
    pub seed: u64,
    extensions: u64,
}

impl EuclideanAnnulusSample {
    pub fn len(&self) -> usize {
        self.points.len() / self.intrinsic_dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.intrinsic_dim..(i + 1) * self.intrinsic_dim]
    }
}

fn check(n: usize, r: f64, s: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(r >= 0.0) || !(s >= r) || !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidRadii { inner: r, outer: s });
    }
    Ok(())
}

fn push_point<R: Rng + ?Sized>(rng: &mut R, n: usize, r: f64, s: f64, dir: &mut [f64], out: &mut Vec<f64>) {
    unit_direction(rng, dir);
    let rho = annulus_radius(rng, n, r, s);
    out.extend(dir.iter().map(|c| c * rho));
}

/// `count` i.i.d. uniform points of the annulus `r <= |y| <= s` in `R^n`.
pub fn sample_annulus(n: usize, r: f64, s: f64, count: usize, seed: u64) -> Result<EuclideanAnnulusSample> {
    check(n, r, s)?;
    let mut rng = generator(seed);
    let mut points = Vec::with_capacity(count * n);
    let mut dir = alloc::vec![0.0; n];
    for _ in 0..count {
        push_point(&mut rng, n, r, s, &mut dir, &mut points);
    }
    Ok(EuclideanAnnulusSample {
        intrinsic_dim: n,
        center: alloc::vec![0.0; n],
        inner_radius: r,
        outer_radius: s,
        points,
        seed,
        extensions: 0,
    })
}

/// Grows a sample to the annulus `[r_new, s_new] ⊇ [r, s]`.
///
/// Existing points are kept as a prefix. New points fall in the inner band
/// `[r_new, r)` or the outer band `(s, s_new]`, chosen with probability
/// proportional to band volume, so the union stays uniform on the larger
/// annulus.
pub fn extend_annulus(
    base: &EuclideanAnnulusSample,
    r_new: f64,
    s_new: f64,
    new_count: usize,
) -> Result<EuclideanAnnulusSample> {
    let n = base.intrinsic_dim;
    check(n, r_new, s_new)?;
    if r_new > base.inner_radius || s_new < base.outer_radius {
        return Err(Error::InvalidExtension(alloc::format!(
            "[{r_new}, {s_new}] does not contain [{}, {}]",
            base.inner_radius,
            base.outer_radius
        )));
    }
    if new_count < base.len() {
        return Err(Error::InvalidExtension(alloc::format!(
            "new count {new_count} below current count {}",
            base.len()
        )));
    }
    let mut out = base.clone();
    out.inner_radius = r_new;
    out.outer_radius = s_new;
    out.extensions += 1;
    let extra = new_count - base.len();
    if extra == 0 {
        return Ok(out);
    }
    let nf = n as f64;
    let inner = libm::pow(base.inner_radius, nf) - libm::pow(r_new, nf);
    let outer = libm::pow(s_new, nf) - libm::pow(base.outer_radius, nf);
    let total = inner + outer;
    let mut rng = generator(derive_seed(base.seed, &[out.extensions]));
    let mut dir = alloc::vec![0.0; n];
    out.points.reserve(extra * n);
    for _ in 0..extra {
        if !(total > 0.0) {
            // degenerate: the enlarged annulus equals the old one
            push_point(&mut rng, n, base.inner_radius, base.outer_radius, &mut dir, &mut out.points);
        } else if rng.random::<f64>() * total < inner {
            push_point(&mut rng, n, r_new, base.inner_radius, &mut dir, &mut out.points);
        } else {
            push_point(&mut rng, n, base.outer_radius, s_new, &mut dir, &mut out.points);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::euclidean;
    use alloc::vec;

    fn norms(s: &EuclideanAnnulusSample) -> Vec<f64> {
        let origin = vec![0.0; s.intrinsic_dim];
        (0..s.len()).map(|i| euclidean(s.point(i), &origin)).collect()
    }

    /// Kolmogorov–Smirnov statistic of `xs` against the CDF `cdf`.
    fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_unstable_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn one_dimensional_annulus() {
        let s = sample_annulus(1, 0.0, 1.0, 1000, 3).unwrap();
        assert_eq!(s.len(), 1000);
        assert!(s.points.iter().all(|x| (-1.0..=1.0).contains(x)));
        let positive = s.points.iter().filter(|&&x| x > 0.0).count() as f64;
        // binomial(1000, 1/2): 3 sigma is about 47
        assert!((positive - 500.0).abs() < 3.0 * libm::sqrt(250.0));
    }

    #[test]
    fn empty_sample() {
        let s = sample_annulus(3, 0.5, 1.0, 0, 1).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(sample_annulus(2, 2.0, 1.0, 1, 0), Err(Error::InvalidRadii { .. })));
        assert_eq!(sample_annulus(0, 0.0, 1.0, 1, 0), Err(Error::ZeroDimension));
    }

    #[test]
    fn radial_cdf_planar() {
        let s = sample_annulus(2, 1.0, 2.0, 10_000, 11).unwrap();
        let r = norms(&s);
        assert!(r.iter().all(|&x| (1.0 - 1e-12..=2.0 + 2e-12).contains(&x)));
        let d = ks(r, |x| (x * x - 1.0) / 3.0);
        assert!(d < 0.02, "KS statistic {d}");
    }

    #[test]
    fn mean_direction_is_centred() {
        let count = 10_000;
        let s = sample_annulus(3, 0.0, 1.0, count, 5).unwrap();
        let mut mean = [0.0; 3];
        let mut dir = [0.0; 3];
        for i in 0..count {
            let p = s.point(i);
            let norm = euclidean(p, &[0.0; 3]);
            for k in 0..3 {
                dir[k] = p[k] / norm;
                mean[k] += dir[k] / count as f64;
            }
        }
        let m = euclidean(&mean, &[0.0; 3]);
        assert!(m < 5.0 / libm::sqrt(count as f64), "mean direction norm {m}");
    }

    #[test]
    fn determinism() {
        let a = sample_annulus(4, 0.2, 0.9, 100, 42).unwrap();
        let b = sample_annulus(4, 0.2, 0.9, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_annulus(4, 0.2, 0.9, 100, 43).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn extension_noop() {
        let a = sample_annulus(2, 1.0, 2.0, 50, 9).unwrap();
        let b = extend_annulus(&a, 1.0, 2.0, 50).unwrap();
        assert_eq!(a.points, b.points);
    }

    #[test]
    fn extension_bands_and_uniformity() {
        let a = sample_annulus(2, 1.0, 2.0, 4000, 9).unwrap();
        // area ratio of [0.5, 2.5] to [1, 2] is 6 / 3
        let b = extend_annulus(&a, 0.5, 2.5, 8000).unwrap();
        assert_eq!(&b.points[..a.points.len()], &a.points[..]);
        let r = norms(&b);
        assert!(r[4000..].iter().all(|&x| (0.5 - 1e-12..=1.0 + 1e-12).contains(&x)
            || (2.0 - 1e-12..=2.5 + 1e-12).contains(&x)));
        let d = ks(r, |x| (x * x - 0.25) / 6.0);
        assert!(d < 0.02, "KS statistic {d}");
    }

    #[test]
    fn extension_errors() {
        let a = sample_annulus(2, 1.0, 2.0, 10, 9).unwrap();
        assert!(extend_annulus(&a, 1.5, 2.0, 10).is_err());
        assert!(extend_annulus(&a, 1.0, 1.5, 10).is_err());
        assert!(extend_annulus(&a, 0.5, 2.5, 5).is_err());
    }

    #[test]
    fn seeds_differ_by_path() {
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
        assert_ne!(derive_seed(1, &[0]), derive_seed(2, &[0]));
        assert_eq!(derive_seed(7, &[3, 4]), derive_seed(7, &[3, 4]));
    }
}
