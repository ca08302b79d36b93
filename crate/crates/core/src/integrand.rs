//! Built-in test integrands.

use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kappa::KappaVector;
use crate::walsh::{walsh_coeff_product, walsh_coeff_xsq};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Integrand {
    /// `f(x) = x²` on `[0,1)`.
    Xsq,
    /// `g(x) = Π_j x_j²` on `[0,1)^s`.
    ProdXsq { s: usize },
    /// A constant function on `[0,1)^s`.
    Const { s: usize, value: f64 },
}

impl Integrand {
    /// Parses `xsq`, `prod_xsq` or `const:<value>`; `s` fixes the dimension
    /// of the latter two.
    pub fn parse(name: &str, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        match name {
            "xsq" if s == 1 => Ok(Integrand::Xsq),
            "xsq" => Err(Error::InvalidParameter(format!(
                "xsq is one-dimensional, got s = {s}; use prod_xsq"
            ))),
            "prod_xsq" => Ok(Integrand::ProdXsq { s }),
            _ => match name.strip_prefix("const:") {
                Some(v) => {
                    let value: f64 = v
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad constant {v:?}")))?;
                    Ok(Integrand::Const { s, value })
                }
                None => Err(Error::InvalidParameter(format!("unknown integrand {name:?}"))),
            },
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Integrand::Xsq => 1,
            Integrand::ProdXsq { s } | Integrand::Const { s, .. } => s,
        }
    }

    /// The exact integral over the unit cube.
    pub fn mean(&self) -> f64 {
        match *self {
            Integrand::Xsq => 1.0 / 3.0,
            Integrand::ProdXsq { s } => 3f64.powi(-(s as i32)),
            Integrand::Const { value, .. } => value,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            Integrand::Xsq => x[0] * x[0],
            Integrand::ProdXsq { .. } => x.iter().map(|v| v * v).product(),
            Integrand::Const { value, .. } => value,
        }
    }

    /// Exact Walsh coefficient, where a rule is known.
    pub fn walsh_coeff(&self, k: &KappaVector) -> Option<BigRational> {
        match self {
            Integrand::Xsq => Some(walsh_coeff_xsq(k.component(0))),
            Integrand::ProdXsq { .. } => Some(walsh_coeff_product(k)),
            Integrand::Const { .. } => None,
        }
    }
}

impl fmt::Display for Integrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Integrand::Xsq => write!(f, "xsq"),
            Integrand::ProdXsq { .. } => write!(f, "prod_xsq"),
            Integrand::Const { value, .. } => write!(f, "const:{value}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(Integrand::parse("xsq", 1).unwrap(), Integrand::Xsq);
        assert!(Integrand::parse("xsq", 2).is_err());
        assert_eq!(Integrand::parse("prod_xsq", 3).unwrap().mean(), 1.0 / 27.0);
        assert_eq!(
            Integrand::parse("const:2.5", 2).unwrap(),
            Integrand::Const { s: 2, value: 2.5 }
        );
        assert!(Integrand::parse("const:abc", 1).is_err());
        assert!(Integrand::parse("sin", 1).is_err());
    }

    #[test]
    fn evaluation() {
        assert_eq!(Integrand::Xsq.eval(&[0.5]), 0.25);
        assert_eq!(Integrand::ProdXsq { s: 2 }.eval(&[0.5, 0.5]), 1.0 / 16.0);
    }
}
