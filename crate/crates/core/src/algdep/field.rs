//! Exact scalar fields (ℚ and ℚ(i)) and the integral domains used for
//! fraction-free elimination.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::complex::C64;

/// Integral domain with integer content, as needed by fraction-free
/// elimination (`ℤ` and `ℤ[i]`).
pub trait IntDomain:
    Clone + PartialEq + fmt::Debug + Zero + Mul<Output = Self> + Sub<Output = Self>
{
    /// Non-negative gcd of the integer components.
    fn content(&self) -> BigInt;
    /// Exact division by an integer dividing every component.
    fn div_int(&self, g: &BigInt) -> Self;
}

impl IntDomain for BigInt {
    fn content(&self) -> BigInt {
        self.abs()
    }

    fn div_int(&self, g: &BigInt) -> Self {
        self / g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl Zero for GaussInt {
    fn zero() -> Self {
        GaussInt { re: BigInt::zero(), im: BigInt::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl Add for GaussInt {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussInt { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussInt {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussInt { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl IntDomain for GaussInt {
    fn content(&self) -> BigInt {
        self.re.gcd(&self.im)
    }

    fn div_int(&self, g: &BigInt) -> Self {
        GaussInt { re: &self.re / g, im: &self.im / g }
    }
}

/// Exact coefficient field for [`MPoly`](super::MPoly).
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    type Int: IntDomain;

    fn from_rational(q: BigRational) -> Self;
    fn to_c64(&self) -> C64;
    /// Positive common denominator of the components.
    fn denom(&self) -> BigInt;
    /// `self · scale`, which must be integral.
    fn to_int(&self, scale: &BigInt) -> Self::Int;
    fn from_int(x: &Self::Int) -> Self;
    fn write_json(&self, obj: &mut Map<String, Value>);
    fn read_json(obj: &Map<String, Value>) -> Option<Self>;
}

fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn rat_json(q: &BigRational) -> Value {
    json!([q.numer().to_string(), q.denom().to_string()])
}

fn big_from_value(v: &Value) -> Option<BigInt> {
    match v {
        Value::String(s) => s.parse().ok(),
        Value::Number(n) => n.as_i64().map(BigInt::from),
        _ => None,
    }
}

fn rat_from_parts(num: &Value, den: &Value) -> Option<BigRational> {
    let den = big_from_value(den)?;
    if den.is_zero() {
        return None;
    }
    Some(BigRational::new(big_from_value(num)?, den))
}

fn rat_from_pair(v: &Value) -> Option<BigRational> {
    let arr = v.as_array()?;
    if arr.len() != 2 {
        return None;
    }
    rat_from_parts(&arr[0], &arr[1])
}

/// Rational scalars; JSON form `"num": "...", "den": "..."`.
impl Field for BigRational {
    type Int = BigInt;

    fn from_rational(q: BigRational) -> Self {
        q
    }

    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(self), 0.0)
    }

    fn denom(&self) -> BigInt {
        self.denom().clone()
    }

    fn to_int(&self, scale: &BigInt) -> BigInt {
        let v = self * BigRational::from_integer(scale.clone());
        debug_assert!(v.is_integer());
        v.to_integer()
    }

    fn from_int(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }

    fn write_json(&self, obj: &mut Map<String, Value>) {
        obj.insert("num".into(), Value::String(self.numer().to_string()));
        obj.insert("den".into(), Value::String(self.denom().to_string()));
    }

    fn read_json(obj: &Map<String, Value>) -> Option<Self> {
        rat_from_parts(obj.get("num")?, obj.get("den")?)
    }
}

/// Gaussian rational `re + im·i`. The derived order is lexicographic on
/// `(re, im)`, which is what exponent grouping relies on.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRat {
            re: BigRational::from_integer(re.into()),
            im: BigRational::from_integer(im.into()),
        }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "({}-{}i)", self.re, -self.im.clone())
        } else {
            write!(f, "({}+{}i)", self.re, self.im)
        }
    }
}

impl Zero for GaussRat {
    fn zero() -> Self {
        GaussRat::real(BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRat {
    fn one() -> Self {
        GaussRat::real(BigRational::one())
    }
}

impl Add for GaussRat {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussRat { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussRat {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussRat { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussRat {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Div for GaussRat {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let n = &o.re * &o.re + &o.im * &o.im;
        assert!(!n.is_zero(), "division by zero Gaussian rational");
        GaussRat {
            re: (&self.re * &o.re + &self.im * &o.im) / &n,
            im: (&self.im * &o.re - &self.re * &o.im) / &n,
        }
    }
}

impl Neg for GaussRat {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRat { re: -self.re, im: -self.im }
    }
}

/// JSON form `"re": [num, den], "im": [num, den]`.
impl Field for GaussRat {
    type Int = GaussInt;

    fn from_rational(q: BigRational) -> Self {
        GaussRat::real(q)
    }

    fn to_c64(&self) -> C64 {
        C64::new(rat_to_f64(&self.re), rat_to_f64(&self.im))
    }

    fn denom(&self) -> BigInt {
        self.re.denom().lcm(self.im.denom())
    }

    fn to_int(&self, scale: &BigInt) -> GaussInt {
        GaussInt {
            re: self.re.to_int(scale),
            im: self.im.to_int(scale),
        }
    }

    fn from_int(x: &GaussInt) -> Self {
        GaussRat {
            re: BigRational::from_integer(x.re.clone()),
            im: BigRational::from_integer(x.im.clone()),
        }
    }

    fn write_json(&self, obj: &mut Map<String, Value>) {
        obj.insert("re".into(), rat_json(&self.re));
        obj.insert("im".into(), rat_json(&self.im));
    }

    fn read_json(obj: &Map<String, Value>) -> Option<Self> {
        Some(GaussRat {
            re: rat_from_pair(obj.get("re")?)?,
            im: rat_from_pair(obj.get("im")?)?,
        })
    }
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only if it reproduces `x` to within `tol · max(1, |x|)`.
pub fn recover_rational(x: f64, max_den: u64, tol: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        return Some(BigRational::from_integer(BigInt::from(x as i64)));
    }
    // continued-fraction convergents
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as i128 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if ((p1 as f64) / (q1 as f64) - x).abs() <= tol * x.abs().max(1.0) {
            return Some(BigRational::new(BigInt::from(p1), BigInt::from(q1)));
        }
        let frac = v - a as f64;
        if frac == 0.0 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

/// Parses `p`, `p/q` or decimal literals exactly (decimals as their exact
/// finite-decimal value, e.g. `0.1 = 1/10`).
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let q = BigRational::new(n, d);
        return Some(if neg { -q } else { q });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Parses exact Gaussian rationals: `p/q`, `ai`, `a+bi`, `a-bi` where `a`, `b`
/// are rational literals.
pub fn parse_gauss(s: &str) -> Option<GaussRat> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let im_of = |t: &str| match t {
            "" | "+" => Some(BigRational::one()),
            "-" => Some(-BigRational::one()),
            _ => parse_rational(t),
        };
        match split {
            Some(i) => Some(GaussRat::new(parse_rational(&body[..i])?, im_of(&body[i..])?)),
            None => Some(GaussRat::new(BigRational::zero(), im_of(body)?)),
        }
    } else {
        parse_rational(&s).map(GaussRat::real)
    }
}
