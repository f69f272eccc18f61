//! Electromagnetic primitives: free-space spreading and planar reflection
//! coefficients for a dielectric half-space and a single dielectric slab.
//!
//! Phasors follow the `exp(+j ω τ)` convention of the channel terms, i.e. a
//! path of length `r` carries the phase factor `exp(+j k r)`.
//!
//! TE coefficients are ratios of the (perpendicular) electric field, TM
//! coefficients are ratios of the perpendicular magnetic field. With that
//! convention `r_TE = -r_TM` at normal incidence.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EmError {
    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),
    #[error("incidence angle {0} rad outside [0, π/2)")]
    IncidenceAngle(f64),
    #[error("relative permittivity must be ≥ 1, got {0}")]
    Permittivity(f64),
    #[error("slab thickness must be positive, got {0} m")]
    Thickness(f64),
    #[error("wavelength must be positive, got {0} m")]
    Wavelength(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    /// Electric field perpendicular to the plane of incidence.
    Te,
    /// Magnetic field perpendicular to the plane of incidence.
    Tm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Medium {
    HalfSpace { rel_permittivity: f64 },
    Slab { rel_permittivity: f64, thickness_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionQuery {
    pub incidence_angle_rad: f64,
    pub polarization: Polarization,
    pub medium: Medium,
    pub wavelength_m: f64,
}

impl ReflectionQuery {
    pub fn new(
        incidence_angle_rad: f64,
        polarization: Polarization,
        medium: Medium,
        wavelength_m: f64,
    ) -> Result<Self, EmError> {
        if !(0.0..FRAC_PI_2).contains(&incidence_angle_rad) {
            return Err(EmError::IncidenceAngle(incidence_angle_rad));
        }
        if !(wavelength_m > 0.0) {
            return Err(EmError::Wavelength(wavelength_m));
        }
        match medium {
            Medium::HalfSpace { rel_permittivity } => check_permittivity(rel_permittivity)?,
            Medium::Slab {
                rel_permittivity,
                thickness_m,
            } => {
                check_permittivity(rel_permittivity)?;
                if !(thickness_m > 0.0) {
                    return Err(EmError::Thickness(thickness_m));
                }
            }
        }
        Ok(ReflectionQuery {
            incidence_angle_rad,
            polarization,
            medium,
            wavelength_m,
        })
    }

    pub fn coefficient(&self) -> Complex64 {
        match self.medium {
            Medium::HalfSpace { rel_permittivity } => {
                fresnel_half_space(rel_permittivity, self.incidence_angle_rad, self.polarization)
            }
            Medium::Slab {
                rel_permittivity,
                thickness_m,
            } => fresnel_slab(
                rel_permittivity,
                thickness_m,
                self.wavelength_m,
                self.incidence_angle_rad,
                self.polarization,
            ),
        }
    }
}

fn check_permittivity(eps: f64) -> Result<(), EmError> {
    if eps >= 1.0 {
        Ok(())
    } else {
        Err(EmError::Permittivity(eps))
    }
}

/// Normalised normal wavenumber in the medium, `sqrt(eps - sin^2 θ)`, on the
/// branch that decays into a lossy medium (`eps = eps' - j eps''`).
fn normal_wavenumber(eps: Complex64, theta: f64) -> Complex64 {
    let s = theta.sin();
    (eps - s * s).sqrt()
}

/// Air-to-medium interface coefficient for a possibly lossy medium.
pub fn interface_coefficient(eps: Complex64, theta: f64, pol: Polarization) -> Complex64 {
    let c = Complex64::new(theta.cos(), 0.0);
    let kz = normal_wavenumber(eps, theta);
    match pol {
        Polarization::Te => (c - kz) / (c + kz),
        Polarization::Tm => (eps * c - kz) / (eps * c + kz),
    }
}

/// Fresnel reflection coefficient of a lossless dielectric half-space.
pub fn fresnel_half_space(rel_permittivity: f64, theta: f64, pol: Polarization) -> Complex64 {
    interface_coefficient(Complex64::new(rel_permittivity, 0.0), theta, pol)
}

/// Reflection coefficient of a slab of thickness `d` backed by free space,
/// summing all internal bounces:
/// `R = r (1 - e) / (1 - r^2 e)` with `e = exp(-2 j k0 d sqrt(eps - sin^2 θ))`.
pub fn slab_coefficient(
    eps: Complex64,
    thickness_m: f64,
    wavelength_m: f64,
    theta: f64,
    pol: Polarization,
) -> Complex64 {
    let r = interface_coefficient(eps, theta, pol);
    let k0 = 2.0 * PI / wavelength_m;
    let delta = normal_wavenumber(eps, theta) * (k0 * thickness_m);
    let e = (Complex64::new(0.0, -2.0) * delta).exp();
    let one = Complex64::new(1.0, 0.0);
    r * (one - e) / (one - r * r * e)
}

/// Reflection coefficient of a lossless dielectric slab in free space.
pub fn fresnel_slab(
    rel_permittivity: f64,
    thickness_m: f64,
    wavelength_m: f64,
    theta: f64,
    pol: Polarization,
) -> Complex64 {
    slab_coefficient(
        Complex64::new(rel_permittivity, 0.0),
        thickness_m,
        wavelength_m,
        theta,
        pol,
    )
}

/// Free-space LOS amplitude `a0 = λ/(4π r0) · exp(j k r0)`.
pub fn friis_los_amplitude(r0: f64, wavelength_m: f64) -> Result<Complex64, EmError> {
    if !(r0 > 0.0) {
        return Err(EmError::NonPositiveDistance(r0));
    }
    Ok(spreading_phasor(r0, wavelength_m) * (wavelength_m / (4.0 * PI * r0)))
}

/// Unit phasor `exp(j k r)` for a path of length `r`.
pub fn spreading_phasor(r: f64, wavelength_m: f64) -> Complex64 {
    let phase = (2.0 * PI * (r / wavelength_m).fract()).rem_euclid(2.0 * PI);
    Complex64::from_polar(1.0, phase)
}

/// `-20 log10 |a|`.
pub fn path_loss_db(amplitude: Complex64) -> f64 {
    -20.0 * amplitude.norm().log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA_60G: f64 = 299_792_458.0 / 60e9;

    #[test]
    fn half_space_normal_incidence() {
        let expected = (6f64.sqrt() - 1.0) / (6f64.sqrt() + 1.0);
        for pol in [Polarization::Te, Polarization::Tm] {
            let r = fresnel_half_space(6.0, 0.0, pol);
            assert!((r.norm() - expected).abs() < 1e-14);
        }
        assert!((expected - 0.4202).abs() < 5e-5);
    }

    #[test]
    fn no_contrast_no_reflection() {
        for th in [0.0, 0.3, 1.2, 1.5] {
            for pol in [Polarization::Te, Polarization::Tm] {
                assert!(fresnel_half_space(1.0, th, pol).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn brewster_angle_kills_tm() {
        let tb = 6f64.sqrt().atan();
        assert!(fresnel_half_space(6.0, tb, Polarization::Tm).norm() < 1e-12);
        assert!(fresnel_half_space(6.0, tb, Polarization::Te).norm() > 0.1);
    }

    #[test]
    fn grazing_tends_to_unit_magnitude() {
        let th = FRAC_PI_2 - 1e-7;
        for pol in [Polarization::Te, Polarization::Tm] {
            assert!((fresnel_half_space(6.0, th, pol).norm() - 1.0).abs() < 1e-5);
            assert!((fresnel_slab(3.26, 0.1, LAMBDA_60G, th, pol).norm() - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn vanishing_slab_is_transparent() {
        let r = fresnel_slab(3.26, 1e-12, LAMBDA_60G, 0.4, Polarization::Te);
        assert!(r.norm() < 1e-8);
    }

    #[test]
    fn half_wave_slab_window() {
        let eps: f64 = 3.26;
        let d = LAMBDA_60G / (2.0 * eps.sqrt());
        for pol in [Polarization::Te, Polarization::Tm] {
            assert!(fresnel_slab(eps, d, LAMBDA_60G, 0.0, pol).norm() < 1e-10);
        }
    }

    #[test]
    fn friis_values() {
        let r0 = 173f64.sqrt();
        let pl = path_loss_db(friis_los_amplitude(r0, LAMBDA_60G).unwrap());
        assert!((pl - 90.39).abs() < 0.01, "{pl}");
        let unit = path_loss_db(friis_los_amplitude(LAMBDA_60G / (4.0 * PI), LAMBDA_60G).unwrap());
        assert!(unit.abs() < 1e-12);
        let a = path_loss_db(friis_los_amplitude(7.0, LAMBDA_60G).unwrap());
        let b = path_loss_db(friis_los_amplitude(14.0, LAMBDA_60G).unwrap());
        assert!((b - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!((b - a - 6.02).abs() < 0.001);
        assert_eq!(friis_los_amplitude(0.0, LAMBDA_60G), Err(EmError::NonPositiveDistance(0.0)));
    }

    #[test]
    fn query_validation() {
        let hs = Medium::HalfSpace { rel_permittivity: 6.0 };
        assert!(ReflectionQuery::new(FRAC_PI_2, Polarization::Te, hs, 1.0).is_err());
        assert!(ReflectionQuery::new(-0.1, Polarization::Te, hs, 1.0).is_err());
        let bad = Medium::Slab { rel_permittivity: 3.0, thickness_m: 0.0 };
        assert_eq!(
            ReflectionQuery::new(0.1, Polarization::Te, bad, 1.0),
            Err(EmError::Thickness(0.0))
        );
        let q = ReflectionQuery::new(0.0, Polarization::Tm, hs, 1.0).unwrap();
        assert!((q.coefficient().norm() - 0.4202).abs() < 1e-4);
    }
}
