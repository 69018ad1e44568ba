//! Characters and dimensions of the U(n+1) irreducibles that occur in the
//! spectral decomposition, evaluated at torus elements of the cyclic group,
//! and fixed-subspace dimensions on the quotient by group averaging.
//!
//! Characters are Schur polynomials. They are evaluated through the
//! Jacobi-Trudi determinant `det(h_{lambda_i - i + j})` in complete
//! homogeneous values rather than the Weyl bialternant, because torus
//! elements of a cyclic group routinely have repeated coordinates where the
//! bialternant degenerates to 0/0. Negative weight entries are handled by
//! tensoring with a determinant power: shift all entries up by `m` and
//! multiply the result by `(t_1 ... t_{n+1})^{-m}`.
//!
//! The group average `(1/mu) sum_l chi(gamma^l) e^{2 pi i u l / mu}` must
//! round to an integer within 1e-8 even when the characters involved are
//! ~1e7 and the Jacobi-Trudi entries are ~1e5. Two internal measures keep
//! that budget: roots of unity are Newton-refined to double-double accuracy
//! and the `h_k` recurrence runs in double-double arithmetic (entries are
//! rounded back to f64 before the determinant, whose own rounding is
//! harmless); and scalar torus elements, where the determinant would cancel
//! catastrophically, are dispatched to the central character
//! `chi(z * id) = z^{|lambda|} dim V(lambda)` with the dimension computed
//! exactly by the Weyl formula.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64;

use crate::lens::LensSpace;
use crate::{Error, Result};

// ----------------------------------------------------------------------
// Double-double building blocks (Dekker/Knuth error-free transformations).
// ----------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn split(a: f64) -> (f64, f64) {
    let t = 134_217_729.0 * a; // 2^27 + 1
    let hi = t - (t - a);
    (hi, a - hi)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let (hi, lo) = quick_two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }

    #[inline]
    fn scale(self, x: f64) -> Dd {
        self.mul(Dd::from_f64(x))
    }

    #[inline]
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r1 = self.sub(o.scale(q1));
        let q2 = r1.hi / o.hi;
        let r2 = r1.sub(o.scale(q2));
        let q3 = r2.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }
}

#[derive(Debug, Clone, Copy)]
struct DdC {
    re: Dd,
    im: Dd,
}

impl DdC {
    const ZERO: DdC = DdC {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };
    const ONE: DdC = DdC {
        re: Dd::ONE,
        im: Dd::ZERO,
    };

    #[inline]
    fn from_c64(z: Complex64) -> DdC {
        DdC {
            re: Dd::from_f64(z.re),
            im: Dd::from_f64(z.im),
        }
    }

    #[inline]
    fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    #[inline]
    fn add(self, o: DdC) -> DdC {
        DdC {
            re: self.re.add(o.re),
            im: self.im.add(o.im),
        }
    }

    #[inline]
    fn sub(self, o: DdC) -> DdC {
        DdC {
            re: self.re.sub(o.re),
            im: self.im.sub(o.im),
        }
    }

    #[inline]
    fn mul(self, o: DdC) -> DdC {
        DdC {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    #[inline]
    fn div(self, o: DdC) -> DdC {
        let den = o.re.mul(o.re).add(o.im.mul(o.im));
        let num = self.mul(DdC {
            re: o.re,
            im: o.im.neg(),
        });
        DdC {
            re: num.re.div(den),
            im: num.im.div(den),
        }
    }

    fn powi(self, mut m: u64) -> DdC {
        let mut base = self;
        let mut acc = DdC::ONE;
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            m >>= 1;
        }
        acc
    }
}

// ----------------------------------------------------------------------
// Roots of unity.
// ----------------------------------------------------------------------

/// Table of the mu-th roots of unity, Newton-refined on z^mu = 1 so the
/// stored values are accurate to well below f64 roundoff.
#[derive(Debug)]
pub(crate) struct RootTable {
    mu: i64,
    roots: Vec<DdC>,
}

impl RootTable {
    pub(crate) fn new(mu: i64) -> RootTable {
        assert!(mu >= 1);
        let roots = (0..mu)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 / mu as f64);
                let (s, c) = theta.sin_cos();
                let mut z = DdC::from_c64(Complex64::new(c, s));
                for _ in 0..2 {
                    let zm1 = z.powi(mu as u64 - 1);
                    let f = zm1.mul(z).sub(DdC::ONE);
                    let df = DdC {
                        re: zm1.re.scale(mu as f64),
                        im: zm1.im.scale(mu as f64),
                    };
                    z = z.sub(f.div(df));
                }
                z
            })
            .collect();
        RootTable { mu, roots }
    }

    #[inline]
    fn root_dd(&self, k: i64) -> DdC {
        self.roots[k.rem_euclid(self.mu) as usize]
    }

    /// e^{2 pi i k / mu} as f64 complex.
    #[inline]
    pub(crate) fn root(&self, k: i64) -> Complex64 {
        self.root_dd(k).to_c64()
    }
}

// ----------------------------------------------------------------------
// Torus elements and highest weights.
// ----------------------------------------------------------------------

/// A torus element of the cyclic group: the tuple
/// `(e^{2 pi i exps_1 / mu}, ..., e^{2 pi i exps_m / mu})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusElement {
    mu: i64,
    exps: Vec<i64>,
}

impl TorusElement {
    pub fn new(mu: i64, exps: &[i64]) -> Result<TorusElement> {
        if mu < 1 {
            return Err(Error::Domain(format!("need mu >= 1, got {mu}")));
        }
        if exps.is_empty() {
            return Err(Error::Domain("torus element needs coordinates".into()));
        }
        Ok(TorusElement {
            mu,
            exps: exps.iter().map(|e| e.rem_euclid(mu)).collect(),
        })
    }

    /// The group element `gamma^ell` of a lens space.
    pub fn from_power(lens: &LensSpace, ell: i64) -> TorusElement {
        let mu = lens.mu();
        TorusElement {
            mu,
            exps: lens.nu().iter().map(|&v| (ell * v).rem_euclid(mu)).collect(),
        }
    }

    /// The identity with `m` coordinates.
    pub fn identity(m: usize) -> TorusElement {
        TorusElement {
            mu: 1,
            exps: vec![0; m],
        }
    }

    pub fn mu(&self) -> i64 {
        self.mu
    }

    pub fn exps(&self) -> &[i64] {
        &self.exps
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Coordinate-wise complex conjugate.
    pub fn conjugate(&self) -> TorusElement {
        TorusElement {
            mu: self.mu,
            exps: self.exps.iter().map(|e| (-e).rem_euclid(self.mu)).collect(),
        }
    }

    /// The unit-circle coordinates.
    pub fn coords(&self) -> Vec<Complex64> {
        let roots = cached_roots(self.mu);
        self.exps.iter().map(|&e| roots.root(e)).collect()
    }

    /// `Some(k)` when the element is the scalar `zeta^k * id`.
    fn scalar_exponent(&self) -> Option<i64> {
        let first = self.exps[0];
        if self.exps.iter().all(|&e| e == first) {
            Some(first)
        } else {
            None
        }
    }

    fn sum_exps(&self) -> i64 {
        self.exps.iter().sum::<i64>().rem_euclid(self.mu)
    }
}

/// Weakly decreasing integer tuple labelling a U(m) irreducible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HighestWeight {
    entries: Vec<i64>,
}

impl HighestWeight {
    pub fn new(entries: &[i64]) -> Result<HighestWeight> {
        if entries.is_empty() {
            return Err(Error::Domain("empty highest weight".into()));
        }
        if entries.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!(
                "highest weight must be weakly decreasing, got {entries:?}"
            )));
        }
        Ok(HighestWeight {
            entries: entries.to_vec(),
        })
    }

    /// Run-length constructor: `from_runs(&[(1, 3), (0, 2), (-1, 2)])` is
    /// `(1, 1, 1, 0, 0, -1, -1)`. Runs of length zero are skipped.
    pub fn from_runs(runs: &[(i64, usize)]) -> Result<HighestWeight> {
        let mut entries = Vec::new();
        for &(value, count) in runs {
            entries.extend(std::iter::repeat_n(value, count));
        }
        HighestWeight::new(&entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the entries; the power of the central character.
    pub fn weight_sum(&self) -> i64 {
        self.entries.iter().sum()
    }

    /// Entries shifted to be nonnegative, with the shift amount.
    fn shifted(&self) -> (Vec<i64>, i64) {
        let min = *self.entries.last().expect("nonempty");
        let m = (-min).max(0);
        (self.entries.iter().map(|e| e + m).collect(), m)
    }

    /// Dimension of V(lambda) by the Weyl formula
    /// `prod_{a<b} (lambda_a - lambda_b + b - a) / (b - a)`, exactly.
    pub fn dim(&self) -> u128 {
        let l = &self.entries;
        let d = l.len();
        let mut num: u128 = 1;
        let mut den: u128 = 1;
        for a in 0..d {
            for b in (a + 1)..d {
                num = num
                    .checked_mul((l[a] - l[b] + (b - a) as i64) as u128)
                    .expect("weight dimension overflows u128");
                den *= (b - a) as u128;
                let g = gcd_u128(num, den);
                num /= g;
                den /= g;
            }
        }
        debug_assert_eq!(den, 1);
        num / den
    }
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    if a == 0 || b == 0 {
        return 1;
    }
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// ----------------------------------------------------------------------
// Per-thread memo tables.
// ----------------------------------------------------------------------

struct CharCache {
    roots: HashMap<i64, Rc<RootTable>>,
    htabs: HashMap<TorusElement, Rc<Vec<Complex64>>>,
}

thread_local! {
    static CACHE: RefCell<CharCache> = RefCell::new(CharCache {
        roots: HashMap::new(),
        htabs: HashMap::new(),
    });
}

fn cached_roots(mu: i64) -> Rc<RootTable> {
    CACHE.with(|c| {
        c.borrow_mut()
            .roots
            .entry(mu)
            .or_insert_with(|| Rc::new(RootTable::new(mu)))
            .clone()
    })
}

/// The memoized table of `h_0 .. h_{>=min_len-1}` at `t`. Tables only grow;
/// growth recomputes from scratch since the recurrence is cumulative.
fn cached_htab(t: &TorusElement, min_len: usize) -> Rc<Vec<Complex64>> {
    let existing = CACHE.with(|c| c.borrow().htabs.get(t).cloned());
    if let Some(tab) = &existing {
        if tab.len() >= min_len {
            return tab.clone();
        }
    }
    let roots = cached_roots(t.mu());
    let len = min_len.max(64).next_power_of_two();
    let tab = Rc::new(compute_h_table(t.exps(), &roots, len));
    CACHE.with(|c| {
        c.borrow_mut().htabs.insert(t.clone(), tab.clone());
    });
    tab
}

/// `h_0 .. h_{len-1}` at the element with the given exponents, by the
/// generating-function recurrence: dividing by each `(1 - t_j X)` in turn
/// sends `c_k` to `c_k + t_j c_{k-1}` in increasing k.
fn compute_h_table(exps: &[i64], roots: &RootTable, len: usize) -> Vec<Complex64> {
    let mut c = vec![DdC::ZERO; len];
    c[0] = DdC::ONE;
    for &e in exps {
        let r = roots.root_dd(e);
        for k in 1..len {
            c[k] = c[k].add(r.mul(c[k - 1]));
        }
    }
    c.iter().map(|z| z.to_c64()).collect()
}

// ----------------------------------------------------------------------
// Determinant and character evaluation.
// ----------------------------------------------------------------------

/// Fraction-free (Bareiss) determinant with partial pivoting by modulus.
fn bareiss_det(m: &mut [Vec<Complex64>]) -> Complex64 {
    let d = m.len();
    if d == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut sign = 1.0;
    let mut prev = Complex64::new(1.0, 0.0);
    for k in 0..d - 1 {
        let mut piv = k;
        let mut best = m[k][k].norm_sqr();
        for (r, row) in m.iter().enumerate().skip(k + 1) {
            let v = row[k].norm_sqr();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != k {
            m.swap(k, piv);
            sign = -sign;
        }
        let (pivot_rows, rest) = m.split_at_mut(k + 1);
        let pk = &pivot_rows[k];
        for row in rest.iter_mut() {
            for c in (k + 1)..d {
                row[c] = (pk[k] * row[c] - row[k] * pk[c]) / prev;
            }
            row[k] = Complex64::new(0.0, 0.0);
        }
        prev = m[k][k];
    }
    sign * m[d - 1][d - 1]
}

/// Jacobi-Trudi determinant `det(h_{shifted_r - r + c})` for a nonnegative
/// shifted weight, given `h` by index (zero for negative indices).
fn jacobi_trudi(shifted: &[i64], h: impl Fn(i64) -> Complex64) -> Complex64 {
    let d = shifted.len();
    let mut m: Vec<Vec<Complex64>> = (0..d)
        .map(|r| {
            (0..d)
                .map(|c| {
                    let idx = shifted[r] - r as i64 + c as i64;
                    if idx < 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        h(idx)
                    }
                })
                .collect()
        })
        .collect();
    bareiss_det(&mut m)
}

fn scalar_character(lambda: &HighestWeight, exp: i64, roots: &RootTable) -> Complex64 {
    let mu = roots.mu;
    let k = (exp.rem_euclid(mu) * lambda.weight_sum().rem_euclid(mu)).rem_euclid(mu);
    roots.root(k) * lambda.dim() as f64
}

fn character_with(
    lambda: &HighestWeight,
    scalar: Option<i64>,
    sum_exps: i64,
    htab: &[Complex64],
    roots: &RootTable,
) -> Complex64 {
    if let Some(e) = scalar {
        return scalar_character(lambda, e, roots);
    }
    let (shifted, m) = lambda.shifted();
    let det = jacobi_trudi(&shifted, |idx| htab[idx as usize]);
    if m == 0 {
        det
    } else {
        det * roots.root((-m * sum_exps).rem_euclid(roots.mu))
    }
}

fn h_len_for(lambda: &HighestWeight) -> usize {
    let (shifted, _) = lambda.shifted();
    (shifted[0] + shifted.len() as i64) as usize
}

// ----------------------------------------------------------------------
// Public operations.
// ----------------------------------------------------------------------

/// Character `chi_{V(lambda)}(t)` of the U(m) irreducible with highest
/// weight `lambda` at a torus element with m coordinates.
pub fn character(lambda: &HighestWeight, t: &TorusElement) -> Result<Complex64> {
    if lambda.len() != t.len() {
        return Err(Error::Domain(format!(
            "weight length {} does not match torus rank {}",
            lambda.len(),
            t.len()
        )));
    }
    let roots = cached_roots(t.mu());
    if let Some(e) = t.scalar_exponent() {
        return Ok(scalar_character(lambda, e, &roots));
    }
    let htab = cached_htab(t, h_len_for(lambda));
    Ok(character_with(lambda, None, t.sum_exps(), &htab, &roots))
}

/// The Jacobi-Trudi route unconditionally, bypassing the scalar-element
/// shortcut; used to cross-check the two evaluations against each other.
#[cfg(test)]
pub(crate) fn character_jacobi_trudi(lambda: &HighestWeight, t: &TorusElement) -> Complex64 {
    let roots = cached_roots(t.mu());
    let htab = cached_htab(t, h_len_for(lambda));
    character_with(lambda, None, t.sum_exps(), &htab, &roots)
}

/// Elementary symmetric polynomial `e_j` of the coordinates; the character
/// of the fundamental representation `V(1_j, 0_{m-j})`.
pub fn elementary_symmetric(t: &TorusElement, j: usize) -> Result<Complex64> {
    let m = t.len();
    if j > m {
        return Err(Error::IndexOutOfRange(format!("e_{j} of {m} coordinates")));
    }
    // Expand prod (1 + t_c X) and read off the X^j coefficient.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m + 1];
    coeffs[0] = Complex64::new(1.0, 0.0);
    for (i, z) in t.coords().into_iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = coeffs[k - 1];
            coeffs[k] += z * prev;
        }
    }
    Ok(coeffs[j])
}

/// Complete homogeneous symmetric polynomial `h_q`; the character of
/// `V(q, 0_{m-1})`.
pub fn complete_homogeneous(t: &TorusElement, q: i64) -> Result<Complex64> {
    if q < 0 {
        return Err(Error::IndexOutOfRange(format!("h_{q}")));
    }
    let htab = cached_htab(t, q as usize + 1);
    Ok(htab[q as usize])
}

/// Outcome of a fixed-subspace dimension computation, with the integrality
/// residuals observed before rounding.
#[derive(Debug, Clone, Copy)]
pub struct FixedDim {
    pub dim: u64,
    /// |real part - nearest integer| before rounding.
    pub residual: f64,
    /// |imaginary part| before rounding.
    pub imag: f64,
}

/// `dim V(lambda)^{alpha_u}` on the lens space: the multiplicity of the
/// character `u` under the group average
/// `(1/mu) sum_l chi(gamma^l) e^{2 pi i u l / mu}`.
pub fn fixed_dim_detailed(lambda: &HighestWeight, lens: &LensSpace, u: i64) -> Result<FixedDim> {
    if lambda.len() != lens.n() + 1 {
        return Err(Error::Domain(format!(
            "weight length {} does not match n + 1 = {}",
            lambda.len(),
            lens.n() + 1
        )));
    }
    let mu = lens.mu();
    let roots = cached_roots(mu);
    let mut acc = Complex64::new(0.0, 0.0);
    for ell in 0..mu {
        let t = TorusElement::from_power(lens, ell);
        let chi = if let Some(e) = t.scalar_exponent() {
            scalar_character(lambda, e, &roots)
        } else {
            let htab = cached_htab(&t, h_len_for(lambda));
            character_with(lambda, None, t.sum_exps(), &htab, &roots)
        };
        acc += chi * roots.root((u * ell).rem_euclid(mu));
    }
    acc /= mu as f64;
    round_multiplicity(acc)
}

/// As [`fixed_dim_detailed`], returning only the integer.
pub fn fixed_dim(lambda: &HighestWeight, lens: &LensSpace, u: i64) -> Result<u64> {
    fixed_dim_detailed(lambda, lens, u).map(|d| d.dim)
}

pub(crate) fn round_multiplicity(acc: Complex64) -> Result<FixedDim> {
    let nearest = acc.re.round();
    let residual = (acc.re - nearest).abs();
    let imag = acc.im.abs();
    if residual > 1e-8 || imag > 1e-8 || nearest < 0.0 {
        return Err(Error::Integrality {
            re: acc.re,
            im: acc.im,
        });
    }
    Ok(FixedDim {
        dim: nearest as u64,
        residual,
        imag,
    })
}

/// Residual of the character product rule
/// `e_j h_q = chi(q, 1_j, 0_{n-j}) + chi(q+1, 1_{j-1}, 0_{n-j+1})`
/// (Richardson-Littlewood) at `t`; identically zero as characters.
pub fn check_richardson_littlewood(t: &TorusElement, q: i64, j: usize) -> Result<f64> {
    let n = t.len() - 1;
    if q < 1 || j < 1 || j > n {
        return Err(Error::Domain(format!(
            "need q >= 1 and 1 <= j <= {n}, got q = {q}, j = {j}"
        )));
    }
    let ej = HighestWeight::from_runs(&[(1, j), (0, n - j + 1)])?;
    let hq = HighestWeight::from_runs(&[(q, 1), (0, n)])?;
    let w1 = HighestWeight::from_runs(&[(q, 1), (1, j), (0, n - j)])?;
    let w2 = HighestWeight::from_runs(&[(q + 1, 1), (1, j - 1), (0, n - j + 1)])?;
    let lhs = character(&ej, t)? * character(&hq, t)?;
    let rhs = character(&w1, t)? + character(&w2, t)?;
    Ok((lhs - rhs).norm())
}

/// Result of the generating-function telescoping check.
#[derive(Debug, Clone, Copy)]
pub struct GenIdentityCheck {
    pub residual: f64,
    /// Bound on the truncation of the q-series.
    pub tail: f64,
}

/// Residual of the generating identity with the q-series truncated under a
/// geometric tail bound:
///
/// ```text
/// (sum_{j=0..n} (-1)^{j+1}(n+1-j) e_j X^j) (sum_{q>=1} h_q X^q)
///     + sum_{j=1..n} (-1)^{j+1}(n+1-j) e_j X^j
///   = -sum_c t_c X / (1 - t_c X)
/// ```
pub fn check_generating_identity(t: &TorusElement, x: f64) -> Result<GenIdentityCheck> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!("need X in [0, 1), got {x}")));
    }
    let m = t.len();
    let n = m - 1;

    // Truncation point: |h_q| <= C(q+n, n), so the dropped tail is below
    // coef * C(Q+n, n) X^Q * rX/(1 - rX) with r = (Q+1+n)/(Q+1).
    let coef_e: f64 = (0..=n)
        .map(|j| ((n + 1 - j) as f64) * binom_f64(m, j))
        .sum();
    let mut qcut = 8usize;
    let mut binom = 1.0f64;
    for i in 1..=n {
        binom *= (qcut + i) as f64 / i as f64;
    }
    let tail_at = |q: usize, b: f64| -> f64 {
        let r = (q + 1 + n) as f64 / (q + 1) as f64;
        let rx = r * x;
        if rx >= 1.0 {
            f64::INFINITY
        } else {
            coef_e.max(1.0) * b * x.powi(q as i32) * rx / (1.0 - rx)
        }
    };
    while tail_at(qcut, binom) > 1e-10 {
        qcut += 1;
        binom = binom * (qcut + n) as f64 / qcut as f64;
        if qcut > 200_000 {
            return Err(Error::Domain(format!(
                "generating identity cannot be truncated at X = {x}"
            )));
        }
    }
    let tail = tail_at(qcut, binom);

    let coords = t.coords();
    let mut e1 = Complex64::new(0.0, 0.0); // sum_{j=0}^{n} (-1)^{j+1} (n+1-j) e_j X^j
    let mut e2 = Complex64::new(0.0, 0.0); // same, from j = 1
    for j in 0..=n {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        let term = sign * (n + 1 - j) as f64 * elementary_symmetric(t, j)? * x.powi(j as i32);
        e1 += term;
        if j >= 1 {
            e2 += term;
        }
    }
    let htab = cached_htab(t, qcut + 1);
    let mut s = Complex64::new(0.0, 0.0);
    for q in (1..=qcut).rev() {
        s += htab[q] * x.powi(q as i32);
    }
    let lhs = e1 * s + e2;
    let rhs = -coords
        .iter()
        .map(|&z| z * x / (Complex64::new(1.0, 0.0) - z * x))
        .sum::<Complex64>();
    Ok(GenIdentityCheck {
        residual: (lhs - rhs).norm(),
        tail,
    })
}

fn binom_f64(n: usize, k: usize) -> f64 {
    let mut b = 1.0f64;
    for i in 1..=k {
        b *= (n + 1 - i) as f64 / i as f64;
    }
    b
}

// ----------------------------------------------------------------------
// Shared evaluation tables for the spectral sum (no thread-local state, so
// rayon workers can read them concurrently).
// ----------------------------------------------------------------------

pub(crate) struct CharTables {
    mu: i64,
    roots: RootTable,
    scalar: Vec<Option<i64>>,
    sum_exps: Vec<i64>,
    htabs: Vec<Vec<Complex64>>,
}

impl CharTables {
    pub(crate) fn new(lens: &LensSpace, h_len: usize) -> CharTables {
        let mu = lens.mu();
        let roots = RootTable::new(mu);
        let mut scalar = Vec::with_capacity(mu as usize);
        let mut sum_exps = Vec::with_capacity(mu as usize);
        let mut htabs = Vec::with_capacity(mu as usize);
        for ell in 0..mu {
            let t = TorusElement::from_power(lens, ell);
            let sc = t.scalar_exponent();
            // Scalar elements never read the h table.
            htabs.push(if sc.is_some() {
                Vec::new()
            } else {
                compute_h_table(t.exps(), &roots, h_len)
            });
            scalar.push(sc);
            sum_exps.push(t.sum_exps());
        }
        CharTables {
            mu,
            roots,
            scalar,
            sum_exps,
            htabs,
        }
    }

    pub(crate) fn mu(&self) -> i64 {
        self.mu
    }

    /// `chi_{V(lambda)}(gamma^ell)`.
    pub(crate) fn character(&self, ell: usize, lambda: &HighestWeight) -> Complex64 {
        character_with(
            lambda,
            self.scalar[ell],
            self.sum_exps[ell],
            &self.htabs[ell],
            &self.roots,
        )
    }

    /// The group averages for every u at once, given per-ell characters.
    pub(crate) fn multiplicities(&self, chis: &[Complex64]) -> Result<Vec<FixedDim>> {
        let mu = self.mu;
        let mut out = Vec::with_capacity(mu as usize);
        for u in 0..mu {
            let mut acc = Complex64::new(0.0, 0.0);
            for (ell, &chi) in chis.iter().enumerate() {
                acc += chi * self.roots.root((u * ell as i64).rem_euclid(mu));
            }
            acc /= mu as f64;
            out.push(round_multiplicity(acc)?);
        }
        Ok(out)
    }
}
