//! Closed forms for the torsion function and the torsions themselves.
//!
//! For the trivial character the torsion function of the lens space is
//! `kappa(s) = -(n+1) (1 + 2^{2s+1} mu^{-2s} zeta(2s))`, and for a
//! nontrivial character `u` it is
//! `kappa(s) = -2^{2s} mu^{-2s} sum_j [zeta(2s, A(u tau_j)/mu)
//!                                     + zeta(2s, A(-u tau_j)/mu)]`,
//! where `A(w)` is the representative of `w` in `1..=mu` and `tau_j` the
//! inverse of `nu_j`. Both branches vanish at `s = 0`; their derivative at
//! the origin gives the contact torsion `T = exp(kappa'(0)/2)`, namely
//! `(4 pi / mu)^{n+1}` resp. `prod_j |e^{2 pi i u tau_j / mu} - 1|`.
//!
//! The de Rham (Ray-Singer) torsion of the same metric is
//! `(4 pi)^{n+1} / (n! mu^{n+1})` for the trivial character and the same
//! sine product for nontrivial ones, so the two torsions differ exactly by
//! `n!` per invariant section.

use num_complex::Complex64;

use crate::lens::{a_mu, FlatBundle, LensSpace};
use crate::zeta::{hurwitz_zeta, hurwitz_zeta_ds, riemann_zeta, riemann_zeta_ds, ZetaValue};
use crate::{Error, Result};

/// Exact `n!`, guarded to the range where it is exactly representable.
pub fn factorial(n: usize) -> Result<u128> {
    if n > 20 {
        return Err(Error::Domain(format!(
            "factorial limited to n <= 20, got {n}"
        )));
    }
    Ok((1..=n as u128).product())
}

/// Closed form of the torsion function at complex `s` (pole at `s = 1/2`).
pub fn kappa_closed(lens: &LensSpace, u: i64, s: Complex64) -> Result<ZetaValue> {
    let n = lens.n() as f64;
    let mu = lens.mu() as f64;
    let u = lens.reduce_u(u);
    let two_s = 2.0 * s;
    if (two_s - Complex64::new(1.0, 0.0)).norm() < 1e-9 {
        return Err(Error::Domain(
            "kappa has a pole at s = 1/2 (the zeta(2s) singularity)".into(),
        ));
    }
    let mu_pow = (-two_s * mu.ln()).exp();
    if u == 0 {
        // -(n+1) (1 + 2^{2s+1} mu^{-2s} zeta(2s))
        let z = riemann_zeta(two_s)?;
        let two_pow = ((two_s + 1.0) * 2f64.ln()).exp();
        let scale = two_pow * mu_pow;
        let value = -(n + 1.0) * (1.0 + scale * z.value);
        let err = (n + 1.0) * scale.norm() * z.err;
        Ok(ZetaValue { value, err })
    } else {
        // -2^{2s} mu^{-2s} sum_j [zeta(2s, A(u tau_j)/mu) + zeta(2s, A(-u tau_j)/mu)]
        let two_pow = (two_s * 2f64.ln()).exp();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut err = 0.0;
        for &tau in lens.tau() {
            let a_plus = a_mu(u * tau, lens.mu()) as f64 / mu;
            let a_minus = a_mu(-u * tau, lens.mu()) as f64 / mu;
            let zp = hurwitz_zeta(two_s, a_plus)?;
            let zm = hurwitz_zeta(two_s, a_minus)?;
            sum += zp.value + zm.value;
            err += zp.err + zm.err;
        }
        let scale = two_pow * mu_pow;
        Ok(ZetaValue {
            value: -scale * sum,
            err: scale.norm() * err,
        })
    }
}

/// Derivative of the closed form at the origin, evaluated through the zeta
/// derivatives. Equals `2(n+1) log(4 pi / mu)` for the trivial character
/// and `2 sum_j log |e^{2 pi i u tau_j / mu} - 1|` otherwise.
pub fn kappa_prime0(lens: &LensSpace, u: i64) -> Result<f64> {
    let n = lens.n() as f64;
    let mu = lens.mu() as f64;
    let u = lens.reduce_u(u);
    let zero = Complex64::new(0.0, 0.0);
    if u == 0 {
        // d/ds [2^{2s+1} mu^{-2s} zeta(2s)] at 0
        //   = 2 [2 log(2/mu) zeta(0) + 2 zeta'(0)]
        let z0 = riemann_zeta(zero)?.re();
        let dz0 = riemann_zeta_ds(zero)?.re();
        Ok(-(n + 1.0) * 2.0 * (2.0 * (2.0 / mu).ln() * z0 + 2.0 * dz0))
    } else {
        // The prefactor 2^{2s} mu^{-2s} is 1 at s = 0; product rule gives
        // 2 log(2/mu) S(0) + 2 S'(0) with S the Hurwitz pair sum.
        let mut s0 = 0.0;
        let mut ds0 = 0.0;
        for &tau in lens.tau() {
            let a_plus = a_mu(u * tau, lens.mu()) as f64 / mu;
            let a_minus = a_mu(-u * tau, lens.mu()) as f64 / mu;
            s0 += hurwitz_zeta(zero, a_plus)?.re() + hurwitz_zeta(zero, a_minus)?.re();
            ds0 += hurwitz_zeta_ds(zero, a_plus)?.re() + hurwitz_zeta_ds(zero, a_minus)?.re();
        }
        Ok(-(2.0 * (2.0 / mu).ln() * s0 + 2.0 * ds0))
    }
}

/// `|e^{2 pi i a} - 1| = 2 sin(pi a)` for `a` in (0, 1).
fn chord(a: f64) -> f64 {
    2.0 * (std::f64::consts::PI * a).sin()
}

fn contact_torsion_line(lens: &LensSpace, u: i64) -> f64 {
    let n = lens.n();
    let mu = lens.mu();
    if lens.reduce_u(u) == 0 {
        (4.0 * std::f64::consts::PI / mu as f64).powi(n as i32 + 1)
    } else {
        lens.tau()
            .iter()
            .map(|&tau| chord(a_mu(u * tau, mu) as f64 / mu as f64))
            .product()
    }
}

/// Contact analytic torsion of the bundle: the product over rank-one
/// summands of `(4 pi / mu)^{n+1}` (trivial character) and
/// `prod_j |e^{2 pi i u tau_j / mu} - 1|` (nontrivial). Cross-checked
/// against `exp(sum_u kappa'(0) / 2)` to 1e-9 relative.
pub fn contact_torsion(lens: &LensSpace, bundle: &FlatBundle) -> Result<f64> {
    let product: f64 = bundle
        .us()
        .iter()
        .map(|&u| contact_torsion_line(lens, u))
        .product();
    let mut logs = 0.0;
    for &u in bundle.us() {
        logs += kappa_prime0(lens, u)?;
    }
    let via_kappa = (logs / 2.0).exp();
    let delta = (product - via_kappa).abs() / product.abs().max(f64::MIN_POSITIVE);
    if delta > 1e-9 {
        return Err(Error::Inconsistency {
            what: "contact torsion product vs exp(kappa'(0)/2)".into(),
            delta,
        });
    }
    Ok(product)
}

/// Ray-Singer torsion of the bundle for the contact metric: per summand,
/// `(4 pi)^{n+1} / (n! mu^{n+1})` for the trivial character and the same
/// sine product as the contact torsion for nontrivial characters.
pub fn ray_singer_torsion(lens: &LensSpace, bundle: &FlatBundle) -> Result<f64> {
    let n = lens.n();
    let mu = lens.mu();
    let nfact = factorial(n)? as f64;
    let trivial =
        (4.0 * std::f64::consts::PI).powi(n as i32 + 1) / (nfact * (mu as f64).powi(n as i32 + 1));
    Ok(bundle
        .us()
        .iter()
        .map(|&u| {
            if lens.reduce_u(u) == 0 {
                trivial
            } else {
                contact_torsion_line(lens, u)
            }
        })
        .product())
}

/// Ray-Singer torsion of the round sphere with the standard metric:
/// `2 pi^{n+1} / n!`.
pub fn weng_you_sphere(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain(format!("need n >= 1, got {n}")));
    }
    Ok(2.0 * std::f64::consts::PI.powi(n as i32 + 1) / factorial(n)? as f64)
}

/// The two closed endpoints of the standard-metric computation: the
/// averaged rotational part `2(n+1) log(2 pi / mu)` (evaluated through the
/// zeta derivative at the origin) and the constant part
/// `2 log(2^{-n} / n!)`. Their sum is `2 log` of the standard-metric
/// Ray-Singer torsion `2 pi^{n+1} / (n! mu^{n+1})`.
pub fn standard_metric_endpoints(lens: &LensSpace) -> Result<(f64, f64)> {
    let n = lens.n() as f64;
    let mu = lens.mu() as f64;
    let zero = Complex64::new(0.0, 0.0);
    // d/ds [-2(n+1) mu^{-2s} zeta(2s)] at 0 = -2(n+1) (-2 log mu zeta(0) + 2 zeta'(0))
    let z0 = riemann_zeta(zero)?.re();
    let dz0 = riemann_zeta_ds(zero)?.re();
    let h1 = -2.0 * (n + 1.0) * (-2.0 * mu.ln() * z0 + 2.0 * dz0);
    let h0 = 2.0 * (-n * 2f64.ln() - (factorial(lens.n())? as f64).ln());
    Ok((h1, h0))
}

/// Number of rank-one summands with trivial character; the dimension of
/// the space of invariant sections.
pub fn dim_h0(lens: &LensSpace, bundle: &FlatBundle) -> usize {
    bundle
        .us()
        .iter()
        .filter(|&&u| lens.reduce_u(u) == 0)
        .count()
}

/// Full comparison report for a bundle on a lens space.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionReport {
    pub n: usize,
    pub mu: i64,
    pub nu: Vec<i64>,
    pub us: Vec<i64>,
    /// Value of the torsion function at the origin (should vanish).
    pub kappa0: f64,
    pub kappa_prime0: f64,
    pub t_contact: f64,
    pub t_ray_singer: f64,
    pub dim_h0: usize,
    /// `T_contact / (n!^{dim H0} T_raySinger)`; 1 up to roundoff.
    pub ratio_check: f64,
}

/// Assembles the report: kappa at 0 and its derivative (summed over the
/// summands), both torsions, and the ratio that the two torsions differ by
/// exactly `n!` per invariant section.
pub fn corollary_report(lens: &LensSpace, bundle: &FlatBundle) -> Result<TorsionReport> {
    let zero = Complex64::new(0.0, 0.0);
    let mut kappa0 = 0.0;
    let mut kprime = 0.0;
    for &u in bundle.us() {
        kappa0 += kappa_closed(lens, u, zero)?.re();
        kprime += kappa_prime0(lens, u)?;
    }
    let t_contact = contact_torsion(lens, bundle)?;
    let t_ray_singer = ray_singer_torsion(lens, bundle)?;
    let d = dim_h0(lens, bundle);
    let nfact = factorial(lens.n())? as f64;
    let ratio_check = t_contact / (nfact.powi(d as i32) * t_ray_singer);
    Ok(TorsionReport {
        n: lens.n(),
        mu: lens.mu(),
        nu: lens.nu().to_vec(),
        us: bundle.us().to_vec(),
        kappa0,
        kappa_prime0: kprime,
        t_contact,
        t_ray_singer,
        dim_h0: d,
        ratio_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kappa_closed_sphere_n1_at_3() {
        let lens = LensSpace::sphere(1);
        let k = kappa_closed(&lens, 0, c(3.0)).unwrap();
        let z6 = PI.powi(6) / 945.0; // zeta(6)
        let expect = -2.0 * (1.0 + 128.0 * z6);
        assert!((k.re() - expect).abs() <= 1e-10, "{} vs {expect}", k.re());
        assert!(k.value.im.abs() <= k.err);
    }

    #[test]
    fn kappa_closed_vanishes_at_origin() {
        for (n, mu, nu, us) in [
            (1usize, 1i64, vec![1i64, 1], 0..1),
            (1, 5, vec![1, 2], 0..5),
            (2, 7, vec![1, 3, 5], 0..7),
            (3, 12, vec![1, 5, 7, 11], 0..12),
        ] {
            let lens = LensSpace::new(n, mu, &nu).unwrap();
            for u in us {
                let k = kappa_closed(&lens, u, c(0.0)).unwrap();
                assert!(
                    k.value.norm() <= 1e-10,
                    "n={n} mu={mu} u={u}: {}",
                    k.value
                );
            }
        }
    }

    #[test]
    fn kappa_closed_pole_at_half() {
        let lens = LensSpace::sphere(1);
        assert!(matches!(kappa_closed(&lens, 0, c(0.5)), Err(Error::Domain(_))));
        let l5 = LensSpace::new(1, 5, &[1, 2]).unwrap();
        assert!(matches!(kappa_closed(&l5, 1, c(0.5)), Err(Error::Domain(_))));
        assert!(kappa_closed(&l5, 1, c(0.5 + 1e-6)).is_ok());
    }

    #[test]
    fn kappa_prime0_trivial_character() {
        // 2(n+1) log(4 pi / mu)
        let lens = LensSpace::new(1, 5, &[1, 2]).unwrap();
        let d = kappa_prime0(&lens, 0).unwrap();
        assert!((d - 4.0 * (4.0 * PI / 5.0).ln()).abs() <= 1e-9);
        // mu = 1: exp(kappa'(0)/2) = (4 pi)^2.
        let sphere = LensSpace::sphere(1);
        let d = kappa_prime0(&sphere, 0).unwrap();
        assert!((d - 4.0 * (4.0 * PI).ln()).abs() <= 1e-9);
        assert!(((d / 2.0).exp() - (4.0 * PI).powi(2)).abs() <= 1e-7);
    }

    #[test]
    fn kappa_prime0_nontrivial_character() {
        // 2 sum_j log |e^{2 pi i u tau_j / mu} - 1| at mu = 5, nu = (1, 2).
        let lens = LensSpace::new(1, 5, &[1, 2]).unwrap();
        let d = kappa_prime0(&lens, 1).unwrap();
        let expect = 2.0
            * ((Complex64::new(0.0, 2.0 * PI / 5.0).exp() - 1.0).norm().ln()
                + (Complex64::new(0.0, 6.0 * PI / 5.0).exp() - 1.0).norm().ln());
        assert!((d - expect).abs() <= 1e-9, "{d} vs {expect}");
    }

    #[test]
    fn kappa_prime0_matches_finite_difference() {
        let lens = LensSpace::new(2, 7, &[1, 3, 5]).unwrap();
        let h = 1e-6;
        for u in 0..7 {
            let d = kappa_prime0(&lens, u).unwrap();
            let fp = kappa_closed(&lens, u, c(h)).unwrap().re();
            let fm = kappa_closed(&lens, u, c(-h)).unwrap().re();
            let fd = (fp - fm) / (2.0 * h);
            assert!((d - fd).abs() <= 1e-5, "u = {u}: {d} vs {fd}");
        }
    }

    #[test]
    fn contact_torsion_values() {
        // Trivial bundle on mu = 5: (4 pi / 5)^2.
        let lens = LensSpace::new(1, 5, &[1, 2]).unwrap();
        let t = contact_torsion(&lens, &FlatBundle::line(&lens, 0)).unwrap();
        assert!((t - (4.0 * PI / 5.0).powi(2)).abs() <= 1e-9 * t);
        // u = 1: 4 sin(pi/5) sin(3 pi/5).
        let t1 = contact_torsion(&lens, &FlatBundle::line(&lens, 1)).unwrap();
        let expect = 4.0 * (PI / 5.0).sin() * (3.0 * PI / 5.0).sin();
        assert!((t1 - expect).abs() <= 1e-12);
        // Product over all nontrivial characters is the cyclotomic norm
        // mu^{n+1} = 25.
        let all: f64 = (1..5)
            .map(|u| contact_torsion(&lens, &FlatBundle::line(&lens, u)).unwrap())
            .product();
        assert!((all - 25.0).abs() <= 1e-10, "{all}");
        // Rank-2 trivial bundle on the sphere: ((4 pi)^2)^2.
        let sphere = LensSpace::sphere(1);
        let b = FlatBundle::new(&sphere, &[0, 0]).unwrap();
        let t = contact_torsion(&sphere, &b).unwrap();
        assert!((t - (4.0 * PI).powi(4)).abs() <= 1e-9 * t);
    }

    #[test]
    fn ray_singer_values() {
        // Trivial character, n = 1, mu = 1: (4 pi)^2 / 1!.
        let sphere = LensSpace::sphere(1);
        let t = ray_singer_torsion(&sphere, &FlatBundle::line(&sphere, 0)).unwrap();
        assert!((t - (4.0 * PI).powi(2)).abs() <= 1e-9 * t);
        // Nontrivial character agrees with the contact torsion.
        let lens = LensSpace::new(1, 5, &[1, 2]).unwrap();
        let b = FlatBundle::line(&lens, 1);
        let rs = ray_singer_torsion(&lens, &b).unwrap();
        let ct = contact_torsion(&lens, &b).unwrap();
        assert_eq!(rs, ct);
        // Mixed bundle multiplies the factors.
        let l2 = LensSpace::new(1, 2, &[1, 1]).unwrap();
        let b = FlatBundle::new(&l2, &[0, 1]).unwrap();
        let rs = ray_singer_torsion(&l2, &b).unwrap();
        let triv = (4.0 * PI).powi(2) / 4.0;
        let nontriv = chord(0.5).powi(2); // |e^{i pi} - 1| = 2 per coordinate
        assert!((rs - triv * nontriv).abs() <= 1e-9 * rs);
    }

    #[test]
    fn weng_you_values() {
        assert!((weng_you_sphere(1).unwrap() - 2.0 * PI * PI).abs() <= 1e-12);
        assert!((weng_you_sphere(2).unwrap() - PI.powi(3)).abs() <= 1e-12);
        assert!((weng_you_sphere(3).unwrap() - PI.powi(4) / 3.0).abs() <= 1e-12);
        assert!(weng_you_sphere(0).is_err());
    }

    #[test]
    fn standard_metric_endpoint_values() {
        // mu = 1, n = 1: (4 log 2 pi, 2 log(1/2)).
        let sphere = LensSpace::sphere(1);
        let (h1, h0) = standard_metric_endpoints(&sphere).unwrap();
        assert!((h1 - 4.0 * (2.0 * PI).ln()).abs() <= 1e-12);
        assert!((h0 - 2.0 * 0.5f64.ln()).abs() <= 1e-14);
        // Sum reproduces 2 log of the standard-metric torsion.
        for (n, mu, nu) in [(1usize, 5i64, vec![1i64, 2]), (2, 3, vec![1, 1, 2])] {
            let lens = LensSpace::new(n, mu, &nu).unwrap();
            let (h1, h0) = standard_metric_endpoints(&lens).unwrap();
            let expect = 2.0
                * (2.0 * PI.powi(n as i32 + 1)
                    / (factorial(n).unwrap() as f64 * (mu as f64).powi(n as i32 + 1)))
                .ln();
            assert!((h1 + h0 - expect).abs() <= 1e-12, "n={n} mu={mu}");
        }
        // At mu = 1 the sum is 2 log of the sphere torsion.
        let (h1, h0) = standard_metric_endpoints(&sphere).unwrap();
        assert!((h1 + h0 - 2.0 * weng_you_sphere(1).unwrap().ln()).abs() <= 1e-12);
    }

    #[test]
    fn dim_h0_counts_trivial_summands() {
        let l2 = LensSpace::new(1, 2, &[1, 1]).unwrap();
        assert_eq!(dim_h0(&l2, &FlatBundle::line(&l2, 0)), 1);
        assert_eq!(dim_h0(&l2, &FlatBundle::line(&l2, 1)), 0);
        let b = FlatBundle::new(&l2, &[0, 1, 0]).unwrap();
        assert_eq!(dim_h0(&l2, &b), 2);
    }

    #[test]
    fn corollary_reports() {
        // Sphere, n = 2, trivial: T_contact / T_raySinger = 2! = 2.
        let sphere = LensSpace::sphere(2);
        let r = corollary_report(&sphere, &FlatBundle::line(&sphere, 0)).unwrap();
        assert!((r.t_contact / r.t_ray_singer - 2.0).abs() <= 1e-9);
        assert_eq!(r.dim_h0, 1);
        assert!((r.ratio_check - 1.0).abs() <= 1e-9);
        assert!(r.kappa0.abs() <= 1e-10);

        // mu = 5, u = 1: torsions equal.
        let lens = LensSpace::new(1, 5, &[1, 2]).unwrap();
        let r = corollary_report(&lens, &FlatBundle::line(&lens, 1)).unwrap();
        assert_eq!(r.dim_h0, 0);
        assert!((r.ratio_check - 1.0).abs() <= 1e-9);

        // mu = 3, us = (0, 1, 2): one invariant summand.
        let l3 = LensSpace::new(1, 3, &[1, 1]).unwrap();
        let b = FlatBundle::new(&l3, &[0, 1, 2]).unwrap();
        let r = corollary_report(&l3, &b).unwrap();
        assert_eq!(r.dim_h0, 1);
        assert!((r.ratio_check - 1.0).abs() <= 1e-9);
        // T_contact = exp(kappa'(0)/2) at bundle level.
        assert!((r.t_contact - (r.kappa_prime0 / 2.0).exp()).abs() <= 1e-9 * r.t_contact);
    }

    #[test]
    fn scale_structure_bit_identity() {
        // Relabelling (nu, u) -> (k' nu, k' u) fixes every A(u tau_j), so
        // the nontrivial branch must reproduce bit-identically.
        let mu = 7i64;
        let lens_a = LensSpace::new(2, mu, &[1, 2, 3]).unwrap();
        let k = 4; // unit mod 7
        let nu_b: Vec<i64> = lens_a.nu().iter().map(|v| (v * k) % mu).collect();
        let lens_b = LensSpace::new(2, mu, &nu_b).unwrap();
        for u in 1..mu {
            let ub = (u * k) % mu;
            for &s in &[0.0, 0.25, 4.0] {
                let a = kappa_closed(&lens_a, u, c(s)).unwrap();
                let b = kappa_closed(&lens_b, ub, c(s)).unwrap();
                assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
                assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
            }
        }
    }

    #[test]
    fn factorial_values_and_guard() {
        assert_eq!(factorial(0).unwrap(), 1);
        assert_eq!(factorial(5).unwrap(), 120);
        assert_eq!(factorial(20).unwrap(), 2_432_902_008_176_640_000);
        assert!(factorial(21).is_err());
    }
}
