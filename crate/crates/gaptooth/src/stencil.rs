//! Macroscopic interpolation stencils and tooth boundary conditions.
//!
//! Tooth edges sit a fraction `r` of the macroscopic spacing `H` away from
//! the tooth centre, inside the gap between neighbouring centres.  Edge
//! values and edge derivatives are estimated from the field of centre
//! values by the classical operator series in the centred difference
//! `delta` and average `mu`, truncated after the `delta^(2p)` term.  The
//! truncated series is exact for polynomials of degree `2p`, so the weights
//! coincide with evaluating (or differentiating) the Lagrange interpolant
//! through the `2p + 1` nearest centres.
//!
//! Weights are assembled in exact rational arithmetic as polynomials in the
//! signed edge fraction and converted to floating point in a single Horner
//! evaluation, so the high-order coefficients carry no cancellation error.

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Largest supported half-width; boundary condition orders are `2..=2*MAX_P`.
pub const MAX_HALF_WIDTH: usize = 4;

/// Which edge of a tooth a stencil serves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign of the edge offset: the edge lies at `signum() * r * H` from
    /// the tooth centre.
    pub fn signum(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

/// What a weight vector estimates when dotted with macro values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    /// The field value at the edge.
    Value,
    /// The field derivative at the edge, premultiplied by `H`.
    DerivativeOverH,
}

/// Weights over the macro offsets `-p ..= p` around a tooth.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilWeights {
    pub side: Side,
    /// Half-width `p`; the vector has `2p + 1` entries.
    pub half_width: usize,
    pub kind: WeightKind,
    /// Weight for macro offset `k` is `weights[(k + p) as usize]`.
    pub weights: Vec<f64>,
}

impl StencilWeights {
    /// Offsets paired with their weights, from `-p` to `p`.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let p = self.half_width as isize;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as isize - p, w))
    }

    /// Dots the stencil with values supplied per macro offset.
    pub fn apply(&self, values: impl Fn(isize) -> f64) -> f64 {
        self.iter().map(|(k, w)| w * values(k)).sum()
    }
}

/// Interpolation weights for the edge value at fraction `r` of `H`.
///
/// `r = 0` is allowed and degenerates to the identity on the tooth centre.
pub fn interp_weights(r: f64, p: usize, side: Side) -> Result<StencilWeights> {
    check_fraction_and_width(r, p)?;
    let weights = evaluate_weight_polys(p, side.signum() * r, false);
    Ok(StencilWeights {
        side,
        half_width: p,
        kind: WeightKind::Value,
        weights,
    })
}

/// Weights estimating `H * du/dx` at fraction `r` of `H`.
///
/// Dividing the dot product by `H` gives the edge derivative; `r = 0`
/// degenerates to the centred derivative at the tooth centre.
pub fn deriv_weights(r: f64, p: usize, side: Side) -> Result<StencilWeights> {
    check_fraction_and_width(r, p)?;
    let weights = evaluate_weight_polys(p, side.signum() * r, true);
    Ok(StencilWeights {
        side,
        half_width: p,
        kind: WeightKind::DerivativeOverH,
        weights,
    })
}

fn check_fraction_and_width(r: f64, p: usize) -> Result<()> {
    if !(1..=MAX_HALF_WIDTH).contains(&p) {
        return Err(Error::config(
            "p",
            format!("half-width must be 1..={MAX_HALF_WIDTH}, got {p}"),
        ));
    }
    if !r.is_finite() || !(0.0..0.5).contains(&r) {
        return Err(Error::config(
            "r",
            format!("edge fraction must lie in [0, 0.5), got {r}"),
        ));
    }
    Ok(())
}

/// Polynomial in the signed edge fraction with rational coefficients.
#[derive(Clone, Debug)]
struct RatPoly(Vec<Rational64>);

impl RatPoly {
    fn zero() -> Self {
        RatPoly(Vec::new())
    }

    fn constant(c: Rational64) -> Self {
        RatPoly(vec![c])
    }

    /// `self += s * other`
    fn add_scaled(&mut self, other: &RatPoly, s: Rational64) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), Rational64::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += *b * s;
        }
    }

    fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.0.is_empty() || other.0.is_empty() {
            return RatPoly::zero();
        }
        let mut out = vec![Rational64::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += *a * *b;
            }
        }
        RatPoly(out)
    }

    fn scaled(&self, s: Rational64) -> RatPoly {
        RatPoly(self.0.iter().map(|c| *c * s).collect())
    }

    fn derivative(&self) -> RatPoly {
        RatPoly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| *c * Rational64::from_integer(i as i64))
                .collect(),
        )
    }

    /// Horner evaluation; the only point where rationals become floats.
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| {
            acc * x + *c.numer() as f64 / *c.denom() as f64
        })
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

fn binomial(n: usize, k: usize) -> i64 {
    let mut acc = 1i64;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `x^2 - i^2`
fn x2_minus_square(i: usize) -> RatPoly {
    let ii = (i * i) as i64;
    RatPoly(vec![
        Rational64::from_integer(-ii),
        Rational64::zero(),
        Rational64::one(),
    ])
}

/// Coefficient of `delta^(2k)` in the shift series `E^x`:
/// `1` for `k = 0`, else `x^2 (x^2 - 1) ... (x^2 - (k-1)^2) / (2k)!`.
fn even_coeff(k: usize) -> RatPoly {
    if k == 0 {
        return RatPoly::constant(Rational64::one());
    }
    let mut poly = RatPoly(vec![
        Rational64::zero(),
        Rational64::zero(),
        Rational64::one(),
    ]);
    for i in 1..k {
        poly = poly.mul(&x2_minus_square(i));
    }
    poly.scaled(Rational64::new(1, factorial(2 * k)))
}

/// Coefficient of `mu delta^(2k+1)` in the shift series `E^x`:
/// `x (x^2 - 1) ... (x^2 - k^2) / (2k+1)!`.
fn odd_coeff(k: usize) -> RatPoly {
    let mut poly = RatPoly(vec![Rational64::zero(), Rational64::one()]);
    for i in 1..=k {
        poly = poly.mul(&x2_minus_square(i));
    }
    poly.scaled(Rational64::new(1, factorial(2 * k + 1)))
}

/// `delta^(2k)` expanded onto integer offsets, as `(offset, weight)` pairs.
fn delta_even_stencil(k: usize) -> Vec<(isize, Rational64)> {
    let kk = k as isize;
    (-kk..=kk)
        .map(|o| {
            let j = (kk - o) as usize;
            let sign = if j.is_multiple_of(2) { 1 } else { -1 };
            (o, Rational64::from_integer(sign * binomial(2 * k, j)))
        })
        .collect()
}

/// `mu delta^(2k+1)` expanded onto integer offsets, as `(offset, weight)`
/// pairs (offsets may repeat; callers accumulate).
fn mu_delta_odd_stencil(k: usize) -> Vec<(isize, Rational64)> {
    let mut pairs = Vec::with_capacity(4 * k + 4);
    for j in 0..=(2 * k + 1) {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        let c = Rational64::new(sign * binomial(2 * k + 1, j), 2);
        pairs.push((k as isize + 1 - j as isize, c));
        pairs.push((k as isize - j as isize, c));
    }
    pairs
}

/// Per-offset weight polynomials of the series truncated after
/// `delta^(2p)`, then evaluated at the signed fraction `x` (for values) or
/// differentiated first (for `H`-scaled derivatives).
fn evaluate_weight_polys(p: usize, x: f64, derivative: bool) -> Vec<f64> {
    let mut polys = vec![RatPoly::zero(); 2 * p + 1];
    for k in 0..=p {
        let coeff = even_coeff(k);
        for (offset, w) in delta_even_stencil(k) {
            polys[(offset + p as isize) as usize].add_scaled(&coeff, w);
        }
    }
    for k in 0..p {
        let coeff = odd_coeff(k);
        for (offset, w) in mu_delta_odd_stencil(k) {
            polys[(offset + p as isize) as usize].add_scaled(&coeff, w);
        }
    }
    polys
        .iter()
        .map(|poly| {
            if derivative {
                poly.derivative().eval(x)
            } else {
                poly.eval(x)
            }
        })
        .collect()
}

/// Families of tooth boundary conditions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TbcFamily {
    /// The edge value itself is prescribed.
    Dirichlet,
    /// `a * v + b * dv/dn` is prescribed at the edge, with `dv/dn` the
    /// outward normal derivative (so `+b dv/dx` on the right edge and
    /// `-b dv/dx` on the left).
    Mixed { a: f64, b: f64 },
    /// `v(edge) + beta * v(next micro point inward)` is prescribed.
    TwoPoint { beta: f64 },
}

/// A boundary condition family together with its interpolation order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TbcSpec {
    pub family: TbcFamily,
    /// Consistency order of the macro-side interpolation: 2, 4, 6 or 8.
    pub order: usize,
}

impl TbcSpec {
    /// Stencil half-width `p = order / 2`.
    pub fn half_width(&self) -> usize {
        self.order / 2
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.order, 2 | 4 | 6 | 8) {
            return Err(Error::config(
                "tbc.order",
                format!("order must be one of 2, 4, 6, 8, got {}", self.order),
            ));
        }
        if let TbcFamily::Mixed { a, b } = self.family {
            if !a.is_finite() || !b.is_finite() || (a == 0.0 && b == 0.0) {
                return Err(Error::config(
                    "tbc.a, tbc.b",
                    "mixed condition needs finite (a, b) != (0, 0)",
                ));
            }
        }
        if let TbcFamily::TwoPoint { beta } = self.family {
            if !beta.is_finite() {
                return Err(Error::config("tbc.beta", "beta must be finite"));
            }
        }
        Ok(())
    }
}

/// The micro-side expression a boundary target constrains.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MicroCombination {
    /// The edge micro value.
    EdgeValue,
    /// `a * v + b * dv/dn` at the edge (outward normal derivative).
    MixedValueSlope { a: f64, b: f64 },
    /// `v(edge) + beta * v(next micro point inward)`.
    EdgePlusPenultimate { beta: f64 },
}

/// Macro-side weights of one tooth boundary condition, plus the micro-side
/// combination they constrain.
#[derive(Clone, Debug, PartialEq)]
pub struct TbcWeights {
    pub side: Side,
    pub half_width: usize,
    /// Weight for macro offset `k` is `weights[(k + p) as usize]`.
    pub weights: Vec<f64>,
    pub constrains: MicroCombination,
}

impl TbcWeights {
    /// Offsets paired with their weights, from `-p` to `p`.
    pub fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let p = self.half_width as isize;
        self.weights
            .iter()
            .enumerate()
            .map(move |(i, &w)| (i as isize - p, w))
    }
}

/// Builds the macro-side weight vector of a boundary condition.
///
/// `r` is the edge fraction, `r_prime` the fraction of the next micro point
/// inward (used by [`TbcFamily::TwoPoint`] only) and `h_macro` the macro
/// spacing `H` (used by [`TbcFamily::Mixed`] to scale the derivative term).
pub fn tbc_weights(
    spec: &TbcSpec,
    r: f64,
    r_prime: f64,
    h_macro: f64,
    side: Side,
) -> Result<TbcWeights> {
    spec.validate()?;
    let p = spec.half_width();
    let (weights, constrains) = match spec.family {
        TbcFamily::Dirichlet => (
            interp_weights(r, p, side)?.weights,
            MicroCombination::EdgeValue,
        ),
        TbcFamily::Mixed { a, b } => {
            if !h_macro.is_finite() || h_macro <= 0.0 {
                return Err(Error::config(
                    "h_macro",
                    format!("macro spacing must be positive, got {h_macro}"),
                ));
            }
            let value = interp_weights(r, p, side)?;
            let slope = deriv_weights(r, p, side)?;
            // The outward normal derivative flips sign on the left edge,
            // on both the macro and the micro side.
            let sign = side.signum();
            let weights = value
                .weights
                .iter()
                .zip(&slope.weights)
                .map(|(v, s)| a * v + sign * (b / h_macro) * s)
                .collect();
            (weights, MicroCombination::MixedValueSlope { a, b })
        }
        TbcFamily::TwoPoint { beta } => {
            if !r_prime.is_finite() || r_prime <= 0.0 || r_prime >= r {
                return Err(Error::config(
                    "r_prime",
                    format!("inner fraction must satisfy 0 < r_prime < r, got {r_prime}"),
                ));
            }
            let edge = interp_weights(r, p, side)?;
            let inner = interp_weights(r_prime, p, side)?;
            let weights = edge
                .weights
                .iter()
                .zip(&inner.weights)
                .map(|(e, i)| e + beta * i)
                .collect();
            (weights, MicroCombination::EdgePlusPenultimate { beta })
        }
    };
    Ok(TbcWeights {
        side,
        half_width: p,
        weights,
        constrains,
    })
}
