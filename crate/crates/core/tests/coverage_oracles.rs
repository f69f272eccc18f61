mod common;

use std::f64::consts::{FRAC_PI_2, TAU};

use common::{integrate_coverage, RejectionSampler};
use qdrt::coverage::{coverage_pdf, sample_coverage, CoverageParams};
use qdrt::stats::cvm_two_sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn sidewalk() -> CoverageParams {
    CoverageParams::new(2.5, 2.0, 4.0, 150.0).unwrap()
}

#[test]
fn density_integrates_to_one() {
    for p in [
        sidewalk(),
        CoverageParams::new(2.5, 0.5, 2.0, 150.0).unwrap(),
        CoverageParams::new(-0.5, 12.0, 14.0, 150.0).unwrap(),
        CoverageParams::new(1.0, 1.0, 3.0, 20.0).unwrap(),
    ] {
        let total = integrate_coverage(&p, |_| 1.0, 40_000);
        assert!((total - 1.0).abs() < 1e-3, "{p:?}: {total}");
    }
}

#[test]
fn mean_polar_angle_matches_quadrature() {
    let p = sidewalk();
    let want = integrate_coverage(&p, |t| t, 40_000);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 1_000_000;
    let got = (0..n).map(|_| sample_coverage(&p, &mut rng).0).sum::<f64>() / n as f64;
    assert!((got - want).abs() < 1e-2, "E[θ] {got} vs {want}");
}

#[test]
fn samples_lie_in_support() {
    let p = sidewalk();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100_000 {
        let (t, f) = sample_coverage(&p, &mut rng);
        assert!(p.contains(t, f));
        assert!(coverage_pdf(&p, t, f) > 0.0);
    }
}

/// Probability mass of the cell `[t0, t1] × [f0, f1]`: θ-integral in closed
/// form (`sinθ/cos³θ dθ = d(tan²θ)/2`) clipped to the support, midpoint
/// rule in φ.
fn cell_mass(p: &CoverageParams, (t0, t1): (f64, f64), (f0, f1): (f64, f64)) -> f64 {
    let k = p.delta_z_m * p.delta_z_m / (2.0 * p.canyon_length_m * p.strip_width_m);
    let m = 400;
    let df = (f1 - f0) / m as f64;
    (0..m)
        .map(|i| {
            let phi = f0 + (i as f64 + 0.5) * df;
            match p.theta_bounds(phi) {
                None => 0.0,
                Some((lo, hi)) => {
                    let (a, b) = (lo.max(t0), hi.min(t1));
                    if b > a {
                        0.5 * k * (b.tan().powi(2) - a.tan().powi(2))
                    } else {
                        0.0
                    }
                }
            }
        })
        .sum::<f64>()
        * df
}

#[test]
fn histogram_matches_density_chi_square() {
    let p = sidewalk();
    let (nt, nf) = (24, 72);
    let t_max = 1.56;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 1_000_000;
    let mut counts = vec![0u64; nt * nf];
    for _ in 0..n {
        let (t, f) = sample_coverage(&p, &mut rng);
        let i = ((t / t_max) * nt as f64).min(nt as f64 - 1.0) as usize;
        let j = ((f / TAU) * nf as f64).min(nf as f64 - 1.0) as usize;
        counts[i * nf + j] += 1;
    }
    let mut chi2 = 0.0;
    let mut cells = 0usize;
    let (mut rest_obs, mut rest_exp) = (0.0, 0.0);
    for i in 0..nt {
        let t0 = i as f64 * t_max / nt as f64;
        let t1 = if i + 1 == nt { FRAC_PI_2 } else { (i + 1) as f64 * t_max / nt as f64 };
        for j in 0..nf {
            let f0 = j as f64 * TAU / nf as f64;
            let f1 = (j + 1) as f64 * TAU / nf as f64;
            let e = n as f64 * cell_mass(&p, (t0, t1), (f0, f1));
            let o = counts[i * nf + j] as f64;
            if e >= 20.0 {
                chi2 += (o - e).powi(2) / e;
                cells += 1;
            } else {
                rest_obs += o;
                rest_exp += e;
            }
        }
    }
    if rest_exp > 0.0 {
        chi2 += (rest_obs - rest_exp).powi(2) / rest_exp;
        cells += 1;
    }
    let dof = (cells - 1) as f64;
    let pval = 1.0 - ChiSquared::new(dof).unwrap().cdf(chi2);
    assert!(cells > 100, "only {cells} cells populated");
    assert!(pval > 0.01, "χ² = {chi2} on {dof} dof, p = {pval}");
}

#[test]
fn placement_route_agrees_with_density_route() {
    let p = CoverageParams::new(2.5, 2.0, 4.0, 20.0).unwrap();
    let direct_route = RejectionSampler::new(p);
    let mut r1 = ChaCha8Rng::seed_from_u64(1);
    let mut r2 = ChaCha8Rng::seed_from_u64(2);
    let n = 3000;
    let direct: Vec<(f64, f64)> = (0..n).map(|_| direct_route.sample(&mut r1)).collect();
    let placed: Vec<(f64, f64)> = (0..n).map(|_| sample_coverage(&p, &mut r2)).collect();
    for (name, pick) in [("theta", 0usize), ("phi", 1usize)] {
        let x: Vec<f64> = direct.iter().map(|s| if pick == 0 { s.0 } else { s.1 }).collect();
        let y: Vec<f64> = placed.iter().map(|s| if pick == 0 { s.0 } else { s.1 }).collect();
        let r = cvm_two_sample(&x, &y, 999, 7, 0.01).unwrap();
        assert!(r.passed(), "{name}: T = {}, p = {}", r.statistic, r.p_value);
    }
}

#[test]
fn density_ratio_depends_only_on_theta() {
    let p = sidewalk();
    let (t1, t2, f) = (0.75, 0.95, 1.4);
    assert!(p.contains(t1, f) && p.contains(t2, f));
    let ratio = coverage_pdf(&p, t1, f) / coverage_pdf(&p, t2, f);
    let want = t1.sin() * t2.cos().powi(3) / (t2.sin() * t1.cos().powi(3));
    assert!((ratio - want).abs() < 1e-12 * want);
}
