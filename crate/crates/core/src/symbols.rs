//! Entire functions `Φ` of exponential type parameterizing `Φ(D)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{pair, pairs, parse_complex, C64};

#[derive(Debug, Error, PartialEq)]
pub enum SymbolError {
    #[error("polynomial symbol needs at least one coefficient")]
    EmptyPolynomial,
    #[error("malformed symbol `{0}`")]
    Malformed(String),
}

/// The symbol `Φ` of a convolution operator.
///
/// Scaled kinds carry the inner factor `a`, i.e. `Exp { a }` is `e^{az}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Symbol {
    /// `Σ cₙ zⁿ`, coefficients in increasing degree.
    Poly {
        #[serde(with = "pairs")]
        coeffs: Vec<C64>,
    },
    Exp {
        #[serde(with = "pair")]
        a: C64,
    },
    Sin {
        #[serde(with = "pair")]
        a: C64,
    },
    Cos {
        #[serde(with = "pair")]
        a: C64,
    },
}

impl Symbol {
    /// Polynomial symbol with trailing zero coefficients trimmed. An all-zero
    /// input becomes the constant zero polynomial.
    pub fn poly(coeffs: Vec<C64>) -> Result<Self, SymbolError> {
        if coeffs.is_empty() {
            return Err(SymbolError::EmptyPolynomial);
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && *coeffs.last().unwrap() == C64::new(0.0, 0.0) {
            coeffs.pop();
        }
        Ok(Symbol::Poly { coeffs })
    }

    /// `Φ(z) = z`, the differentiation operator `D`.
    pub fn identity() -> Self {
        Symbol::Poly {
            coeffs: vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        }
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            Symbol::Poly { coeffs } => coeffs
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c),
            Symbol::Exp { a } => (a * z).exp(),
            Symbol::Sin { a } => (a * z).sin(),
            Symbol::Cos { a } => (a * z).cos(),
        }
    }

    /// Closed-form `Φ'(z)`.
    pub fn derivative(&self, z: C64) -> C64 {
        match self {
            Symbol::Poly { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, (n, &c)| acc * z + c * n as f64),
            Symbol::Exp { a } => a * (a * z).exp(),
            Symbol::Sin { a } => a * (a * z).cos(),
            Symbol::Cos { a } => -a * (a * z).sin(),
        }
    }

    /// Central finite difference of `Φ` with step `h`, taken along the real axis.
    pub fn fd_derivative(&self, z: C64, h: f64) -> C64 {
        (self.eval(z + h) - self.eval(z - h)) / (2.0 * h)
    }

    pub fn is_constant(&self) -> bool {
        let zero = C64::new(0.0, 0.0);
        match self {
            Symbol::Poly { coeffs } => coeffs.iter().skip(1).all(|&c| c == zero),
            Symbol::Exp { a } | Symbol::Sin { a } | Symbol::Cos { a } => *a == zero,
        }
    }

    /// `z ↦ Φ(ωz)`. Level sets of the result are those of `Φ` rotated by `ω⁻¹`.
    pub fn rotated(&self, omega: C64) -> Symbol {
        match self {
            Symbol::Poly { coeffs } => {
                let mut w = C64::new(1.0, 0.0);
                let coeffs = coeffs
                    .iter()
                    .map(|&c| {
                        let out = c * w;
                        w *= omega;
                        out
                    })
                    .collect();
                Symbol::Poly { coeffs }
            }
            Symbol::Exp { a } => Symbol::Exp { a: a * omega },
            Symbol::Sin { a } => Symbol::Sin { a: a * omega },
            Symbol::Cos { a } => Symbol::Cos { a: a * omega },
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = |z: &C64| {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else if z.re == 0.0 {
                format!("{}i", z.im)
            } else {
                format!("{}{:+}i", z.re, z.im)
            }
        };
        match self {
            Symbol::Poly { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(c).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            Symbol::Exp { a } => write!(f, "exp:{}", c(a)),
            Symbol::Sin { a } => write!(f, "sin:{}", c(a)),
            Symbol::Cos { a } => write!(f, "cos:{}", c(a)),
        }
    }
}

/// `poly:c0,c1,...`, `exp:a`, `sin:a`, `cos:a`; a bare `exp`/`sin`/`cos` means `a = 1`.
impl FromStr for Symbol {
    type Err = SymbolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = || SymbolError::Malformed(s.to_string());
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let scalar = |arg: Option<&str>| -> Result<C64, SymbolError> {
            match arg {
                None | Some("") => Ok(C64::new(1.0, 0.0)),
                Some(a) => parse_complex(a).map_err(|_| malformed()),
            }
        };
        match kind {
            "poly" => {
                let arg = arg.ok_or_else(malformed)?;
                let coeffs = arg
                    .split(',')
                    .map(|t| parse_complex(t).map_err(|_| malformed()))
                    .collect::<Result<Vec<_>, _>>()?;
                Symbol::poly(coeffs)
            }
            "exp" => Ok(Symbol::Exp { a: scalar(arg)? }),
            "sin" => Ok(Symbol::Sin { a: scalar(arg)? }),
            "cos" => Ok(Symbol::Cos { a: scalar(arg)? }),
            _ => Err(malformed()),
        }
    }
}

pub fn eval_symbol(phi: &Symbol, lambda: C64) -> C64 {
    phi.eval(lambda)
}

/// `|Φ(z)| < r`.
pub fn in_open_disc_preimage(phi: &Symbol, z: C64, r: f64) -> bool {
    phi.eval(z).norm() < r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// `|Φ(0)| < 1`
    pub origin_ok: bool,
    pub nonconstant: bool,
}

pub fn validate_hypotheses(phi: &Symbol) -> HypothesisReport {
    HypothesisReport {
        origin_ok: in_open_disc_preimage(phi, C64::new(0.0, 0.0), 1.0),
        nonconstant: !phi.is_constant(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_symbol(&Symbol::identity(), c(2.0, 0.0)), c(2.0, 0.0));
        let cos = Symbol::Cos { a: c(1.0, 0.0) };
        assert_eq!(eval_symbol(&cos, c(0.0, 0.0)), c(1.0, 0.0));
        let p = Symbol::poly(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(eval_symbol(&p, c(1.0, 0.0)), c(2.0, 0.0));
    }

    #[test]
    fn disc_preimage_examples() {
        let id = Symbol::identity();
        assert!(in_open_disc_preimage(&id, c(0.5, 0.0), 1.0));
        assert!(!in_open_disc_preimage(&id, c(1.0, 0.0), 1.0));
        let cos: Symbol = "cos".parse().unwrap();
        assert!(!in_open_disc_preimage(&cos, c(0.0, 0.0), 1.0));
    }

    #[test]
    fn hypotheses() {
        assert_eq!(
            validate_hypotheses(&Symbol::identity()),
            HypothesisReport { origin_ok: true, nonconstant: true }
        );
        let cos: Symbol = "cos:1".parse().unwrap();
        assert_eq!(
            validate_hypotheses(&cos),
            HypothesisReport { origin_ok: false, nonconstant: true }
        );
        let two: Symbol = "poly:2".parse().unwrap();
        assert!(!validate_hypotheses(&two).nonconstant);
        let zero_scale = Symbol::Sin { a: c(0.0, 0.0) };
        assert!(zero_scale.is_constant());
    }

    #[test]
    fn horner_matches_multiply_add() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let deg = rng.random_range(0..6);
            let coeffs: Vec<C64> = (0..=deg)
                .map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let z = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let phi = Symbol::Poly { coeffs: coeffs.clone() };
            let mut power = c(1.0, 0.0);
            let mut naive = c(0.0, 0.0);
            for &a in &coeffs {
                naive += a * power;
                power *= z;
            }
            let got = phi.eval(z);
            assert!((got - naive).norm() <= 1e-12 * (1.0 + naive.norm()));
            assert_eq!(in_open_disc_preimage(&phi, z, 1.5), got.norm() < 1.5);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let syms: Vec<Symbol> = ["poly:1,2-i,0.5,3", "exp:1+i", "sin:0.5", "cos:2i"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        for phi in &syms {
            let z = c(0.3, -0.7);
            let fd = phi.fd_derivative(z, 1e-6);
            assert!((phi.derivative(z) - fd).norm() < 1e-6 * (1.0 + fd.norm()), "{phi}");
        }
    }

    #[test]
    fn rotation_composes() {
        let omega = c(0.0, 1.0);
        for s in ["poly:0.2,1,1", "exp:2", "sin:1-i", "cos:1"] {
            let phi: Symbol = s.parse().unwrap();
            let rot = phi.rotated(omega);
            let z = c(0.4, 0.9);
            assert!((rot.eval(z) - phi.eval(omega * z)).norm() < 1e-12);
        }
    }

    #[test]
    fn spec_parsing_and_json() {
        let p: Symbol = "poly:0,1".parse().unwrap();
        assert_eq!(p, Symbol::identity());
        assert_eq!(
            serde_json::to_string(&p).unwrap(),
            r#"{"kind":"poly","coeffs":[[0.0,0.0],[1.0,0.0]]}"#
        );
        let cos: Symbol = serde_json::from_str(r#"{"kind":"cos","a":[1.0,0.0]}"#).unwrap();
        assert_eq!(cos, Symbol::Cos { a: c(1.0, 0.0) });
        assert!("tan:1".parse::<Symbol>().is_err());
        assert!("poly:".parse::<Symbol>().is_err());
        assert_eq!("poly:1,0,0".parse::<Symbol>().unwrap(), Symbol::Poly { coeffs: vec![c(1.0, 0.0)] });
        let round: Symbol = p.to_string().parse().unwrap();
        assert_eq!(round, p);
    }
}
