//! Synthetic spaces with known singular points.
//!
//! Strata labels hold the dimension of the stratum a point was drawn from;
//! isolated singular points get label 0 unless stated otherwise.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pointcloud::PointCloud;
use crate::sampler::{annulus_radius, generator, unit_direction};

pub const DEFAULT_TORUS_MAJOR: f64 = 2.0;
pub const DEFAULT_TORUS_MINOR: f64 = 1.0;
pub const DEFAULT_WEDGE_COUNT: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub cloud: PointCloud,
    pub singular_ids: Vec<usize>,
    pub strata_labels: Vec<usize>,
}

/// Torus with the meridian at angle 0 collapsed to the point `(R, 0, 0)`.
///
/// The tube radius at longitude `φ` is `r·sin(φ/2)`. Samples are uniform with
/// respect to surface area (rejection on the exact area element). The pinch
/// point is appended last.
pub fn gen_pinched_torus(count: usize, major: f64, minor: f64, seed: u64) -> Result<LabeledCloud> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if !(minor > 0.0) || !(major > minor) || !major.is_finite() {
        return Err(Error::InvalidParameter(alloc::format!(
            "pinched torus needs R > r > 0, got R = {major}, r = {minor}"
        )));
    }
    let mut rng = generator(seed);
    let bound = minor * libm::sqrt((major + minor) * (major + minor) + 0.25 * minor * minor);
    let mut coords = Vec::with_capacity(3 * (count + 1));
    let mut accepted = 0;
    while accepted < count {
        let phi = TAU * rng.random::<f64>();
        let theta = TAU * rng.random::<f64>();
        let rho = minor * libm::sin(0.5 * phi);
        let drho = 0.5 * minor * libm::cos(0.5 * phi);
        let ring = major + rho * libm::cos(theta);
        let weight = rho * libm::sqrt(ring * ring + drho * drho);
        if rng.random::<f64>() * bound >= weight {
            continue;
        }
        coords.extend_from_slice(&[ring * libm::cos(phi), ring * libm::sin(phi), rho * libm::sin(theta)]);
        accepted += 1;
    }
    coords.extend_from_slice(&[major, 0.0, 0.0]);
    let mut strata_labels = alloc::vec![2; count];
    strata_labels.push(0);
    Ok(LabeledCloud { cloud: PointCloud::new(3, coords)?, singular_ids: alloc::vec![count], strata_labels })
}

fn sphere_points<R: Rng>(rng: &mut R, center: &[f64], count: usize, out: &mut Vec<f64>) {
    let mut dir = alloc::vec![0.0; center.len()];
    for _ in 0..count {
        unit_direction(rng, &mut dir);
        out.extend(dir.iter().zip(center).map(|(d, c)| c + d));
    }
}

/// Two unit `n`-spheres in `R^{n+1}` centred at `(±1, 0, …)`, touching at the
/// origin. Points are split evenly (the first sphere takes any odd one) and
/// the origin is appended last.
pub fn gen_wedged_spheres(n: usize, count: usize, seed: u64) -> Result<LabeledCloud> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if count < 2 {
        return Err(Error::InvalidParameter(alloc::format!("count must be at least 2, got {count}")));
    }
    let mut rng = generator(seed);
    let d = n + 1;
    let mut coords = Vec::with_capacity(d * (count + 1));
    let first = count - count / 2;
    let mut center = alloc::vec![0.0; d];
    center[0] = -1.0;
    sphere_points(&mut rng, &center, first, &mut coords);
    center[0] = 1.0;
    sphere_points(&mut rng, &center, count / 2, &mut coords);
    coords.extend(core::iter::repeat(0.0).take(d));
    let mut strata_labels = alloc::vec![n; count];
    strata_labels.push(0);
    Ok(LabeledCloud { cloud: PointCloud::new(d, coords)?, singular_ids: alloc::vec![count], strata_labels })
}

/// Unit sphere at the origin of `R^3` and the unit circle centred at
/// `(2, 0, 0)` in the plane `z = 0`; they touch at `(1, 0, 0)`.
///
/// The first `⌈count/2⌉` points lie on the circle (label 1), the rest on the
/// sphere (label 2). The gluing point is appended last with label 2.
pub fn gen_circle_wedge_sphere(count: usize, seed: u64) -> Result<LabeledCloud> {
    if count < 2 {
        return Err(Error::InvalidParameter(alloc::format!("count must be at least 2, got {count}")));
    }
    let mut rng = generator(seed);
    let on_circle = count - count / 2;
    let mut coords = Vec::with_capacity(3 * (count + 1));
    for _ in 0..on_circle {
        let t = TAU * rng.random::<f64>();
        coords.extend_from_slice(&[2.0 + libm::cos(t), libm::sin(t), 0.0]);
    }
    sphere_points(&mut rng, &[0.0; 3], count / 2, &mut coords);
    coords.extend_from_slice(&[1.0, 0.0, 0.0]);
    let mut strata_labels = alloc::vec![1; on_circle];
    strata_labels.resize(count + 1, 2);
    Ok(LabeledCloud { cloud: PointCloud::new(3, coords)?, singular_ids: alloc::vec![count], strata_labels })
}

/// Uniform points of the `n`-disc of the given radius, placed in the first
/// `n` coordinates of `R^ambient`.
pub fn gen_flat_disc(n: usize, ambient: usize, count: usize, radius: f64, seed: u64) -> Result<LabeledCloud> {
    if n == 0 {
        return Err(Error::ZeroDimension);
    }
    if n > ambient {
        return Err(Error::InvalidParameter(alloc::format!(
            "disc dimension {n} exceeds ambient dimension {ambient}"
        )));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidRadii { inner: 0.0, outer: radius });
    }
    let mut rng = generator(seed);
    let mut dir = alloc::vec![0.0; n];
    let mut coords = Vec::with_capacity(ambient * count);
    for _ in 0..count {
        unit_direction(&mut rng, &mut dir);
        let rho = annulus_radius(&mut rng, n, 0.0, radius);
        coords.extend(dir.iter().map(|c| c * rho));
        coords.extend(core::iter::repeat(0.0).take(ambient - n));
    }
    Ok(LabeledCloud { cloud: PointCloud::new(ambient, coords)?, singular_ids: Vec::new(), strata_labels: alloc::vec![n; count] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::euclidean;

    #[test]
    fn pinched_torus_shape() {
        let t = gen_pinched_torus(2000, 2.0, 1.0, 1).unwrap();
        assert_eq!(t.cloud.len(), 2001);
        assert_eq!(t.singular_ids, [2000]);
        assert_eq!(t.cloud.point(2000), &[2.0, 0.0, 0.0]);
        for p in t.cloud.points() {
            assert!(euclidean(p, &[0.0; 3]) <= 3.0 + 1e-12);
            // distance to the core circle is the local tube radius
            let ring = libm::hypot(p[0], p[1]);
            let phi = libm::atan2(p[1], p[0]).rem_euclid(TAU);
            let tube = libm::hypot(ring - 2.0, p[2]);
            assert!((tube - libm::sin(0.5 * phi)).abs() < 1e-9);
        }
        assert!(gen_pinched_torus(10, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn wedge_membership() {
        let w = gen_wedged_spheres(2, 1001, 3).unwrap();
        assert_eq!(w.cloud.len(), 1002);
        for p in w.cloud.points() {
            let a = euclidean(p, &[-1.0, 0.0, 0.0]);
            let b = euclidean(p, &[1.0, 0.0, 0.0]);
            assert!((a.min(b) - 1.0).abs() <= 1e-12);
        }
        let left = w.cloud.points().take(1001).filter(|p| p[0] < 0.0).count();
        assert_eq!(left, 501);
        assert_eq!(w.cloud.point(1001), &[0.0; 3]);
        assert_eq!(w.strata_labels[1001], 0);
    }

    #[test]
    fn circle_wedge_sphere_parts() {
        let c = gen_circle_wedge_sphere(100, 5).unwrap();
        for (i, p) in c.cloud.points().enumerate() {
            match c.strata_labels[i] {
                1 => {
                    assert_eq!(p[2], 0.0);
                    assert!((euclidean(p, &[2.0, 0.0, 0.0]) - 1.0).abs() < 1e-12);
                }
                _ => assert!((euclidean(p, &[0.0; 3]) - 1.0).abs() < 1e-12),
            }
        }
        assert_eq!(c.strata_labels.iter().filter(|&&l| l == 1).count(), 50);
        assert_eq!(c.strata_labels[100], 2);
    }

    #[test]
    fn flat_disc_padding() {
        let d = gen_flat_disc(2, 4, 500, 0.5, 2).unwrap();
        for p in d.cloud.points() {
            assert_eq!(&p[2..], &[0.0, 0.0]);
            assert!(euclidean(p, &[0.0; 4]) <= 0.5 + 1e-12);
        }
        assert!(gen_flat_disc(3, 2, 10, 1.0, 0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_pinched_torus(50, 2.0, 1.0, 9).unwrap(), gen_pinched_torus(50, 2.0, 1.0, 9).unwrap());
        assert_eq!(gen_wedged_spheres(3, 50, 9).unwrap(), gen_wedged_spheres(3, 50, 9).unwrap());
        assert_ne!(gen_flat_disc(2, 2, 50, 1.0, 9).unwrap(), gen_flat_disc(2, 2, 50, 1.0, 8).unwrap());
    }
}
