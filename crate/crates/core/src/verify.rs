//! The identity ledger: every intermediate identity of the torsion
//! computation run over a seeded pseudo-random grid, with per-check maximal
//! residuals. The `verify` subcommand prints these; the acceptance suite
//! reuses the same samplers with pinned parameters.

use num_complex::Complex64;

use crate::characters::{
    check_generating_identity, check_richardson_littlewood, elementary_symmetric, fixed_dim,
    HighestWeight, TorusElement,
};
use crate::lens::{mod_inverse, FlatBundle, LensSpace};
use crate::rng::SplitMix64;
use crate::spectrum::{
    check_cancellation, kappa_case_partial, kappa_direct_all, CaseTag,
};
use crate::torsion::{
    contact_torsion, corollary_report, factorial, kappa_closed, kappa_prime0, ray_singer_torsion,
    standard_metric_endpoints, weng_you_sphere,
};
use crate::zeta::{hurwitz_zeta, hurwitz_zeta_ds, log_gamma, riemann_zeta, riemann_zeta_ds};
use crate::Result;

/// Outcome of one identity check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Number of points the residual was maximized over.
    pub points: usize,
}

impl CheckResult {
    fn new(name: &'static str, max_residual: f64, tolerance: f64, points: usize) -> CheckResult {
        CheckResult {
            name,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            points,
        }
    }
}

/// Grid parameters for the lens-space checks.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Largest group order in the lens-space grid.
    pub grid_mu: i64,
    /// Largest n in the lens-space grid.
    pub grid_n: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            grid_mu: 8,
            grid_n: 2,
        }
    }
}

/// A uniformly sampled tuple of units mod `mu`.
pub fn sample_coprime_nu(rng: &mut SplitMix64, n: usize, mu: i64) -> Vec<i64> {
    (0..=n)
        .map(|_| loop {
            let v = rng.range_i64(1, mu);
            if mod_inverse(v, mu).is_ok() {
                return v;
            }
        })
        .collect()
}

/// A seeded torus element with `n + 1` coordinates, `n <= max_n`,
/// `mu <= max_mu`.
pub fn sample_torus_element(rng: &mut SplitMix64, max_n: usize, max_mu: i64) -> TorusElement {
    let n = rng.range_i64(1, max_n as i64) as usize;
    let mu = rng.range_i64(1, max_mu);
    let exps: Vec<i64> = (0..=n).map(|_| rng.range_i64(0, mu - 1)).collect();
    TorusElement::new(mu, &exps).expect("sampled element is valid")
}

/// Every lens space of the grid with one sampled nu per (n, mu) cell.
fn grid_spaces(cfg: &VerifyConfig) -> Vec<LensSpace> {
    let mut out = Vec::new();
    for n in 1..=cfg.grid_n {
        for mu in 1..=cfg.grid_mu {
            let mut rng = SplitMix64::new(cfg.seed).fork(((n as u64) << 32) | mu as u64);
            let nu = sample_coprime_nu(&mut rng, n, mu);
            out.push(LensSpace::new(n, mu, &nu).expect("sampled nu is coprime"));
        }
    }
    out
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_riemann_special_values() -> Result<CheckResult> {
    let z0 = riemann_zeta(c(0.0))?;
    let d0 = riemann_zeta_ds(c(0.0))?;
    let r1 = (z0.value.re + 0.5).abs().max(z0.value.im.abs());
    let r2 = (d0.value.re + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs();
    Ok(CheckResult::new(
        "riemann special values",
        r1.max(r2),
        1e-12,
        2,
    ))
}

fn check_hurwitz_pairing_value() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for k in 1..64 {
        let a = k as f64 / 64.0;
        let z1 = hurwitz_zeta(c(0.0), a)?;
        let z2 = hurwitz_zeta(c(0.0), 1.0 - a)?;
        worst = worst.max((z1.value + z2.value).norm());
    }
    Ok(CheckResult::new("hurwitz pairing at 0", worst, 1e-10, 63))
}

fn check_hurwitz_pairing_derivative() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for k in 1..64 {
        let a = k as f64 / 64.0;
        let d1 = hurwitz_zeta_ds(c(0.0), a)?;
        let d2 = hurwitz_zeta_ds(c(0.0), 1.0 - a)?;
        let rhs = -(Complex64::new(0.0, 2.0 * std::f64::consts::PI * a).exp() - 1.0)
            .norm()
            .ln();
        worst = worst.max((d1.value.re + d2.value.re - rhs).abs());
    }
    Ok(CheckResult::new(
        "hurwitz derivative pairing",
        worst,
        1e-9,
        63,
    ))
}

fn check_lerch() -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for k in 1..=64 {
        let a = k as f64 / 64.0;
        let d = hurwitz_zeta_ds(c(0.0), a)?;
        let lerch = log_gamma(a)? - 0.5 * (2.0 * std::f64::consts::PI).ln();
        worst = worst.max((d.value.re - lerch).abs());
    }
    Ok(CheckResult::new("lerch form of zeta'(0,a)", worst, 1e-10, 64))
}

fn check_finite_difference() -> Result<CheckResult> {
    // Central differences at h = 1e-5 carry an h^2 zeta''' truncation error
    // of their own, so the grid keeps a away from 0 where zeta''' blows up.
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut points = 0;
    for &s in &[0.0, 2.0, 3.0] {
        for k in [16, 32, 48, 64] {
            let a = k as f64 / 64.0;
            let d = hurwitz_zeta_ds(c(s), a)?.value;
            let fd =
                (hurwitz_zeta(c(s + h), a)?.value - hurwitz_zeta(c(s - h), a)?.value) / (2.0 * h);
            worst = worst.max((d - fd).norm());
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "zeta derivative vs finite difference",
        worst,
        1e-5,
        points,
    ))
}

fn check_direct_summation() -> Result<CheckResult> {
    // For Re s >= 2 the continuation must agree with a compensated partial
    // sum within its reported error plus the integral tail bound.
    let mut worst = 0.0f64;
    let mut points = 0;
    for &s in &[c(2.0), c(3.0), Complex64::new(2.5, 1.0)] {
        for k in [1, 13, 40, 64] {
            let a = k as f64 / 64.0;
            let z = hurwitz_zeta(s, a)?;
            let terms = 200_000usize;
            let mut acc = Complex64::new(0.0, 0.0);
            let mut comp = Complex64::new(0.0, 0.0);
            for q in (0..terms).rev() {
                let t = (-s * (q as f64 + a).ln()).exp();
                let y = t - comp;
                let v = acc + y;
                comp = (v - acc) - y;
                acc = v;
            }
            let w = terms as f64 + a;
            let tail = w.powf(1.0 - s.re) / (s.re - 1.0) + w.powf(-s.re);
            let excess = (z.value - acc).norm() - (z.err + tail);
            worst = worst.max(excess);
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "direct summation agreement",
        worst.max(0.0),
        1e-13,
        points,
    ))
}

fn check_f1_factorization(seed: u64) -> Result<CheckResult> {
    let mut rng = SplitMix64::new(seed).fork(0xF1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = sample_torus_element(&mut rng, 4, 64);
        let x = rng.next_f64();
        let m = t.len();
        let mut lhs = Complex64::new(0.0, 0.0);
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            lhs += sign * elementary_symmetric(&t, j)? * x.powi(j as i32);
        }
        let rhs: Complex64 = t
            .coords()
            .iter()
            .map(|&z| Complex64::new(1.0, 0.0) - z * x)
            .product();
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(CheckResult::new("product form of F1", worst, 1e-12, 100))
}

fn check_richardson_littlewood_sweep(seed: u64) -> Result<CheckResult> {
    let mut rng = SplitMix64::new(seed).fork(0x51);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = sample_torus_element(&mut rng, 4, 64);
        let n = t.len() - 1;
        let q = rng.range_i64(1, 12);
        let j = rng.range_i64(1, n as i64) as usize;
        worst = worst.max(check_richardson_littlewood(&t, q, j)?);
    }
    Ok(CheckResult::new(
        "richardson-littlewood rule",
        worst,
        1e-10,
        100,
    ))
}

fn check_generating_identity_sweep(seed: u64) -> Result<CheckResult> {
    let mut rng = SplitMix64::new(seed).fork(0x6E);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = sample_torus_element(&mut rng, 4, 64);
        let x = 0.9 * rng.next_f64();
        let g = check_generating_identity(&t, x)?;
        worst = worst.max(g.residual - g.tail);
    }
    Ok(CheckResult::new(
        "generating-function identity",
        worst.max(0.0),
        1e-8,
        100,
    ))
}

fn check_case_cancellation() -> CheckResult {
    let failures = (1..=16).filter(|&n| !check_cancellation(n)).count();
    CheckResult::new("case II/V coefficient cancellation", failures as f64, 0.5, 16)
}

fn check_kappa_origin(spaces: &[LensSpace]) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut points = 0;
    for lens in spaces {
        for u in 0..lens.mu() {
            worst = worst.max(kappa_closed(lens, u, c(0.0))?.value.norm());
            points += 1;
        }
    }
    Ok(CheckResult::new("kappa vanishes at 0", worst, 1e-10, points))
}

fn check_torsion_consistency(spaces: &[LensSpace]) -> Result<CheckResult> {
    // exp(kappa'(0)/2) against the closed product forms, relative.
    let mut worst = 0.0f64;
    let mut points = 0;
    for lens in spaces {
        for u in 0..lens.mu() {
            let via_kappa = (kappa_prime0(lens, u)? / 2.0).exp();
            let closed = contact_torsion(lens, &FlatBundle::line(lens, u))?;
            worst = worst.max((via_kappa - closed).abs() / closed);
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "torsion closed forms",
        worst,
        1e-9,
        points,
    ))
}

fn check_corollary_ratio(spaces: &[LensSpace], seed: u64) -> Result<CheckResult> {
    let mut rng = SplitMix64::new(seed).fork(0xC0);
    let mut worst = 0.0f64;
    let mut points = 0;
    for lens in spaces {
        for u in 0..lens.mu() {
            let r = corollary_report(lens, &FlatBundle::line(lens, u))?;
            worst = worst.max((r.ratio_check - 1.0).abs());
            points += 1;
        }
        // A couple of multi-summand bundles per space.
        for _ in 0..2 {
            let rank = rng.range_i64(2, 3) as usize;
            let us: Vec<i64> = (0..rank).map(|_| rng.range_i64(0, lens.mu() - 1)).collect();
            let r = corollary_report(lens, &FlatBundle::new(lens, &us)?)?;
            worst = worst.max((r.ratio_check - 1.0).abs());
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "torsion ratio n!^dimH0",
        worst,
        1e-9,
        points,
    ))
}

fn check_standard_metric(spaces: &[LensSpace]) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    for lens in spaces {
        let (h1, h0) = standard_metric_endpoints(lens)?;
        let n = lens.n();
        let expect = 2.0
            * (2.0 * std::f64::consts::PI.powi(n as i32 + 1)
                / (factorial(n)? as f64 * (lens.mu() as f64).powi(n as i32 + 1)))
            .ln();
        worst = worst.max((h1 + h0 - expect).abs());
        if lens.mu() == 1 {
            worst = worst.max((h1 + h0 - 2.0 * weng_you_sphere(n)?.ln()).abs());
        }
    }
    Ok(CheckResult::new(
        "standard-metric endpoints",
        worst,
        1e-12,
        spaces.len(),
    ))
}

fn check_kappa_symmetry(spaces: &[LensSpace]) -> Result<CheckResult> {
    // Cases III+VI at u match Cases IV+VII at -u shell for shell.
    let mut worst = 0.0f64;
    let mut points = 0;
    for lens in spaces.iter().filter(|l| l.mu() <= 6) {
        let s = (lens.n() + 2) as f64;
        for u in 0..lens.mu() {
            let a = kappa_case_partial(lens, u, s, 48, 48, &[CaseTag::III, CaseTag::VI])?;
            let b = kappa_case_partial(lens, -u, s, 48, 48, &[CaseTag::IV, CaseTag::VII])?;
            worst = worst.max((a.value - b.value).abs());
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "kappa2/kappa3 duality",
        worst,
        1e-9,
        points,
    ))
}

fn check_oracle_spot(spaces: &[LensSpace]) -> Result<CheckResult> {
    // Truncated spectral sum against the closed form on the smaller spaces.
    // Above n = 2 the Jacobi-Trudi determinants are order >= 4 and lose
    // integer accuracy at large (p, q), so the cutoff shrinks with n; the
    // tails at s = n + 3 are negligible either way.
    let mut worst = 0.0f64;
    let mut points = 0;
    for lens in spaces.iter().filter(|l| l.mu() <= 5) {
        let s = (lens.n() + 3) as f64;
        let cut = if lens.n() <= 2 { 72 } else { 24 };
        let direct = kappa_direct_all(lens, s, cut, cut)?;
        for (u, d) in direct.iter().enumerate() {
            let closed = kappa_closed(lens, u as i64, c(s))?;
            let excess = (d.value - closed.value.re).abs() - d.tail;
            worst = worst.max(excess);
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "spectral sum vs closed form",
        worst.max(0.0),
        1e-8,
        points,
    ))
}

fn check_fixed_dim_partition(spaces: &[LensSpace], seed: u64) -> Result<CheckResult> {
    let mut rng = SplitMix64::new(seed).fork(0xD1);
    let mut failures = 0usize;
    let mut points = 0;
    for lens in spaces {
        for _ in 0..3 {
            let n = lens.n();
            let mut entries: Vec<i64> = (0..=n).map(|_| rng.range_i64(-8, 12)).collect();
            entries.sort_unstable_by(|a, b| b.cmp(a));
            let w = HighestWeight::new(&entries)?;
            let mut total = 0u64;
            for u in 0..lens.mu() {
                total += fixed_dim(&w, lens, u)?;
            }
            if total != w.dim() as u64 {
                failures += 1;
            }
            points += 1;
        }
    }
    Ok(CheckResult::new(
        "fixed dimensions partition dim V",
        failures as f64,
        0.5,
        points,
    ))
}

/// Runs the whole ledger. Checks never abort the run; an evaluation error
/// inside a check is reported as a failed check with residual infinity.
pub fn run_all(cfg: &VerifyConfig) -> Vec<CheckResult> {
    let spaces = grid_spaces(cfg);
    let wrap = |name: &'static str, r: Result<CheckResult>| -> CheckResult {
        r.unwrap_or(CheckResult {
            name,
            max_residual: f64::INFINITY,
            tolerance: 0.0,
            pass: false,
            points: 0,
        })
    };
    vec![
        wrap("riemann special values", check_riemann_special_values()),
        wrap("hurwitz pairing at 0", check_hurwitz_pairing_value()),
        wrap(
            "hurwitz derivative pairing",
            check_hurwitz_pairing_derivative(),
        ),
        wrap("lerch form of zeta'(0,a)", check_lerch()),
        wrap(
            "zeta derivative vs finite difference",
            check_finite_difference(),
        ),
        wrap("direct summation agreement", check_direct_summation()),
        wrap("product form of F1", check_f1_factorization(cfg.seed)),
        wrap(
            "richardson-littlewood rule",
            check_richardson_littlewood_sweep(cfg.seed),
        ),
        wrap(
            "generating-function identity",
            check_generating_identity_sweep(cfg.seed),
        ),
        check_case_cancellation(),
        wrap("kappa vanishes at 0", check_kappa_origin(&spaces)),
        wrap("torsion closed forms", check_torsion_consistency(&spaces)),
        wrap(
            "torsion ratio n!^dimH0",
            check_corollary_ratio(&spaces, cfg.seed),
        ),
        wrap("standard-metric endpoints", check_standard_metric(&spaces)),
        wrap("kappa2/kappa3 duality", check_kappa_symmetry(&spaces)),
        wrap("spectral sum vs closed form", check_oracle_spot(&spaces)),
        wrap(
            "fixed dimensions partition dim V",
            check_fixed_dim_partition(&spaces, cfg.seed),
        ),
        wrap(
            "ray-singer vs contact on spheres",
            check_sphere_factorial(cfg.grid_n),
        ),
    ]
}

fn check_sphere_factorial(max_n: usize) -> Result<CheckResult> {
    // On spheres the two torsions differ by exactly n!, and the Ray-Singer
    // value for the contact metric is 2^{2n+1} times the standard-metric
    // one: (4 pi)^{n+1} / n! versus 2 pi^{n+1} / n!.
    let mut worst = 0.0f64;
    for n in 1..=max_n.max(2) {
        let sphere = LensSpace::sphere(n);
        let b = FlatBundle::line(&sphere, 0);
        let ct = contact_torsion(&sphere, &b)?;
        let rs = ray_singer_torsion(&sphere, &b)?;
        let nfact = factorial(n)? as f64;
        worst = worst.max((ct / rs - nfact).abs() / nfact);
        let std_metric = weng_you_sphere(n)?;
        let scale = 2.0f64.powi(2 * n as i32 + 1);
        worst = worst.max((rs / std_metric - scale).abs() / scale);
    }
    Ok(CheckResult::new(
        "ray-singer vs contact on spheres",
        worst,
        1e-9,
        max_n.max(2),
    ))
}
