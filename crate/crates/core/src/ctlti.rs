//! Continuous-time polynomials and transfer functions in the differential
//! operator `p`.
//!
//! Denominators use the non-monic parameterisation
//! `A(p) = a_1 p^n + ... + a_n p + 1`: the constant term is fixed at one and
//! the leading coefficient is free.

use std::fmt;
use std::str::FromStr;

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Threshold below which a denominator constant term is treated as zero.
pub const DEGENERATE_CONSTANT: f64 = 1e-12;

/// Distance below which a numerator root and a denominator root are
/// reported as a (near) common factor.
pub const COPRIME_TOLERANCE: f64 = 1e-8;

/// Real polynomial in `p`, coefficients stored highest power first.
#[derive(Debug, Clone, PartialEq)]
pub struct CtPolynomial {
    coeffs: Vec<f64>,
}

impl CtPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Dimension(
                "polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!(
                "polynomial coefficients {coeffs:?}"
            )));
        }
        Ok(Self { coeffs })
    }

    /// The constant polynomial `c`.
    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// `p^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[0] = 1.0;
        Self { coeffs }
    }

    /// Monic polynomial `prod (p - r)`. Roots must come in conjugate pairs;
    /// the imaginary residue of the expansion is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            acc = next;
        }
        Self {
            coeffs: acc.into_iter().map(|c| c.re).collect(),
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Formal degree (number of coefficients minus one), counting leading
    /// zeros.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Coefficient of `p^k`; zero above the formal degree.
    pub fn coeff_of_power(&self, k: usize) -> f64 {
        if k > self.degree() {
            0.0
        } else {
            self.coeffs[self.degree() - k]
        }
    }

    /// Largest coefficient magnitude.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn mul(&self, other: &CtPolynomial) -> CtPolynomial {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CtPolynomial { coeffs: out }
    }

    /// Multiply by a scalar.
    pub fn scaled(&self, k: f64) -> CtPolynomial {
        CtPolynomial {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Raise to a non-negative integer power.
    pub fn pow(&self, k: usize) -> CtPolynomial {
        (0..k).fold(CtPolynomial::constant(1.0), |acc, _| acc.mul(self))
    }

    /// Drop leading zero coefficients (keeps at least one).
    pub fn trimmed(&self) -> CtPolynomial {
        let first = self
            .coeffs
            .iter()
            .position(|&c| c != 0.0)
            .unwrap_or(self.coeffs.len() - 1);
        CtPolynomial {
            coeffs: self.coeffs[first..].to_vec(),
        }
    }

    pub fn roots(&self) -> Result<Vec<Complex64>> {
        poly_roots(self)
    }
}

/// All roots of `poly` (with multiplicity) from the eigenvalues of its
/// balanced companion matrix, followed by a Newton polish.
///
/// Leading zero coefficients are ignored; a nonzero constant has no roots.
pub fn poly_roots(poly: &CtPolynomial) -> Result<Vec<Complex64>> {
    if poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = poly.trimmed();
    let deg = p.degree();
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let monic: Vec<f64> = p.coeffs.iter().map(|c| c / lead).collect();
    if deg == 1 {
        return Ok(vec![Complex64::new(-monic[1], 0.0)]);
    }

    let mut companion = DMatrix::<f64>::zeros(deg, deg);
    for j in 0..deg {
        companion[(0, j)] = -monic[j + 1];
    }
    for i in 1..deg {
        companion[(i, i - 1)] = 1.0;
    }
    balance_parlett_reinsch(&mut companion);
    let eig = match Schur::try_new(companion.clone(), f64::EPSILON, 10_000) {
        Some(schur) => schur.complex_eigenvalues(),
        None => {
            return Err(Error::NonFinite(format!(
                "eigenvalue iteration did not converge for {:?}",
                poly.coeffs
            )))
        }
    };

    let dp = derivative(&p);
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        let mut best = *r;
        let mut best_res = p.eval(best).norm();
        let mut z = best;
        for _ in 0..3 {
            let d = dp.eval(z);
            if d.norm() == 0.0 {
                break;
            }
            z -= p.eval(z) / d;
            let res = p.eval(z).norm();
            if res < best_res {
                best = z;
                best_res = res;
            } else {
                break;
            }
        }
        *r = best;
    }
    // Real input: snap near-real roots onto the axis.
    for r in roots.iter_mut() {
        if r.im.abs() <= 1e-14 * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(roots)
}

fn derivative(p: &CtPolynomial) -> CtPolynomial {
    let deg = p.degree();
    if deg == 0 {
        return CtPolynomial::constant(0.0);
    }
    let coeffs = p.coeffs[..deg]
        .iter()
        .enumerate()
        .map(|(i, c)| c * (deg - i) as f64)
        .collect();
    CtPolynomial { coeffs }
}

/// Proper transfer function `B(p)/A(p)` with `A(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CtTransferFunction {
    num: CtPolynomial,
    den: CtPolynomial,
}

impl CtTransferFunction {
    /// Builds `num/den`, dividing both by the denominator constant term.
    pub fn new(num: CtPolynomial, den: CtPolynomial) -> Result<Self> {
        let c = den.constant_term();
        if c.abs() < DEGENERATE_CONSTANT {
            return Err(Error::DegenerateModel(c));
        }
        if den.leading() == 0.0 {
            return Err(Error::ZeroLeadingCoefficient);
        }
        if num.degree() > den.degree() {
            return Err(Error::Improper {
                n: den.degree(),
                m: num.degree(),
            });
        }
        let (num, mut den) = if c == 1.0 {
            (num, den)
        } else {
            (num.scaled(1.0 / c), den.scaled(1.0 / c))
        };
        let last = den.coeffs.len() - 1;
        den.coeffs[last] = 1.0;
        Ok(Self { num, den })
    }

    /// Unity gain.
    pub fn identity() -> Self {
        Self {
            num: CtPolynomial::constant(1.0),
            den: CtPolynomial::constant(1.0),
        }
    }

    pub fn num(&self) -> &CtPolynomial {
        &self.num
    }

    pub fn den(&self) -> &CtPolynomial {
        &self.den
    }

    /// Denominator order n.
    pub fn n(&self) -> usize {
        self.den.degree()
    }

    /// Numerator order m.
    pub fn m(&self) -> usize {
        self.num.degree()
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        poly_roots(&self.den)
    }

    /// Pairs of (numerator root, denominator root) closer than `tol`.
    pub fn near_common_roots(&self, tol: f64) -> Vec<(Complex64, Complex64)> {
        let (Ok(zeros), Ok(poles)) = (poly_roots(&self.num), poly_roots(&self.den)) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for z in &zeros {
            for p in &poles {
                if (z - p).norm() < tol {
                    out.push((*z, *p));
                }
            }
        }
        out
    }

    pub fn is_coprime(&self) -> bool {
        self.near_common_roots(COPRIME_TOLERANCE).is_empty()
    }
}

impl fmt::Display for CtTransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |c: &[f64]| {
            c.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "num: {} ; den: {}",
            join(self.num.coeffs()),
            join(self.den.coeffs())
        )
    }
}

impl FromStr for CtTransferFunction {
    type Err = Error;

    /// Parses `num: b0,...,bm ; den: a1,...,an,1`. Whitespace is optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut num = None;
        let mut den = None;
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, list) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected `key: list` in {part:?}")))?;
            let coeffs = list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("bad coefficient {v:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            match key.trim() {
                "num" => num = Some(CtPolynomial::new(coeffs)?),
                "den" => den = Some(CtPolynomial::new(coeffs)?),
                other => return Err(Error::Parse(format!("unknown key {other:?}"))),
            }
        }
        match (num, den) {
            (Some(num), Some(den)) => CtTransferFunction::new(num, den),
            _ => Err(Error::Parse(format!(
                "transfer function needs num and den: {s:?}"
            ))),
        }
    }
}

/// Ordered parameters `[a_1 ... a_n, b_0 ... b_m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    n: usize,
    m: usize,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, n: usize, m: usize) -> Result<Self> {
        let expected = n + m + 1;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected,
                n,
                m,
            });
        }
        Ok(Self { values, n, m })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Denominator coefficients `a_1 .. a_n`.
    pub fn den_params(&self) -> &[f64] {
        &self.values[..self.n]
    }

    /// Numerator coefficients `b_0 .. b_m`.
    pub fn num_params(&self) -> &[f64] {
        &self.values[self.n..]
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `||self - other|| / ||self||`.
    pub fn relative_distance(&self, other: &ParameterVector) -> f64 {
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        diff / self.norm()
    }
}

/// Maps `theta = [a_1..a_n, b_0..b_m]` to `B(p)/A(p)` with
/// `A = [a_1, .., a_n, 1]`.
pub fn tf_from_theta(theta: &ParameterVector) -> Result<CtTransferFunction> {
    let (n, m) = (theta.n, theta.m);
    if m > n {
        return Err(Error::Improper { n, m });
    }
    if n > 0 && theta.values[0] == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let mut den = theta.den_params().to_vec();
    den.push(1.0);
    let num = theta.num_params().to_vec();
    Ok(CtTransferFunction {
        num: CtPolynomial::new(num)?,
        den: CtPolynomial::new(den)?,
    })
}

/// Inverse of [`tf_from_theta`].
pub fn theta_from_tf(tf: &CtTransferFunction) -> ParameterVector {
    let n = tf.n();
    let m = tf.m();
    let mut values = tf.den.coeffs[..n].to_vec();
    values.extend_from_slice(tf.num.coeffs());
    ParameterVector { values, n, m }
}

/// True iff every pole has a strictly negative real part.
pub fn is_stable(tf: &CtTransferFunction) -> bool {
    match tf.poles() {
        Ok(poles) => poles.iter().all(|p| p.re < 0.0),
        Err(_) => false,
    }
}

/// Mirrors right-half-plane poles into the left half plane (real part
/// negated, modulus kept) and renormalizes the denominator constant term to
/// one. The numerator is left unchanged; stable inputs are returned as is.
pub fn reflect_unstable_poles(tf: &CtTransferFunction) -> Result<CtTransferFunction> {
    let poles = tf.poles()?;
    let mut changed = false;
    let mut reflected = Vec::with_capacity(poles.len());
    for p in poles {
        if p.re == 0.0 || p.re.abs() <= 1e-14 * p.norm() {
            return Err(Error::PoleOnImaginaryAxis(p));
        }
        if p.re > 0.0 {
            changed = true;
            reflected.push(Complex64::new(-p.re, p.im));
        } else {
            reflected.push(p);
        }
    }
    if !changed {
        return Ok(tf.clone());
    }
    let monic = CtPolynomial::from_roots(&reflected);
    let c = monic.constant_term();
    if c.abs() < DEGENERATE_CONSTANT {
        return Err(Error::DegenerateModel(c));
    }
    let mut den = monic.scaled(1.0 / c);
    let last = den.coeffs.len() - 1;
    den.coeffs[last] = 1.0;
    Ok(CtTransferFunction {
        num: tf.num.clone(),
        den,
    })
}

/// `B(j omega) / A(j omega)`.
pub fn tf_frequency_response(tf: &CtTransferFunction, omega: f64) -> Result<Complex64> {
    if !omega.is_finite() {
        return Err(Error::NonFinite(format!("frequency {omega}")));
    }
    let s = Complex64::new(0.0, omega);
    let a = tf.den.eval(s);
    if a.norm() <= f64::EPSILON * tf.den.scale() * 1e-2 {
        return Err(Error::PoleOnAxis(omega));
    }
    Ok(tf.num.eval(s) / a)
}
