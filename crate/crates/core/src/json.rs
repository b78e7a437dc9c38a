//! JSON input formats and output formatting.

use crate::error::{Error, Result};
use crate::germ::{normalize_germ, Germ};
use crate::poly::TriPoly;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A germ given as `[a, b, re, im]` terms meaning (re + i im) x^a y^b.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GermInput {
    pub terms: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
}

fn exponent(v: f64, what: &str) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v < 1e6 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidInput(format!("{what} exponent {v} is not a natural number")))
    }
}

impl GermInput {
    pub fn to_germ(&self) -> Result<Germ> {
        let terms = self
            .terms
            .iter()
            .map(|&[a, b, re, im]| Ok((exponent(a, "x")?, exponent(b, "y")?, C64::new(re, im))))
            .collect::<Result<Vec<_>>>()?;
        normalize_germ(&terms, self.delta1, self.delta2)
    }

    /// Coefficient of the top power of y in the input.
    pub fn leading_coefficient(&self) -> Result<C64> {
        let top = self
            .terms
            .iter()
            .map(|t| t[1])
            .fold(f64::NEG_INFINITY, f64::max);
        let lead: C64 = self
            .terms
            .iter()
            .filter(|t| t[1] == top)
            .map(|t| C64::new(t[2], t[3]))
            .sum();
        if lead.norm() == 0.0 {
            return Err(Error::NotWeierstrass("zero leading coefficient".into()));
        }
        Ok(lead)
    }
}

/// Input of `dis` and `fiber`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointInput {
    pub germ: GermInput,
    pub t: Vec<C64>,
}

/// Input of `classify`: `[a, b, k, re, im]` meaning (re + i im) x^a y^b s^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyInput {
    pub germ: GermInput,
    #[serde(rename = "F_terms")]
    pub f_terms: Vec<[f64; 5]>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub s_max: Option<f64>,
}

impl ClassifyInput {
    /// F in the coordinates of the normalized germ.
    pub fn path_poly(&self, germ: &Germ) -> Result<TriPoly> {
        let terms = self
            .f_terms
            .iter()
            .map(|&[a, b, k, re, im]| {
                Ok((
                    exponent(a, "x")?,
                    exponent(b, "y")?,
                    exponent(k, "s")?,
                    C64::new(re, im),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let f = TriPoly::from_terms(&terms);
        // F is normalized with the same leading coefficient and x-scale as f
        let lead = self.germ.leading_coefficient()?;
        Ok(f.scale(C64::new(1.0, 0.0) / lead).scale_x(germ.x_scale))
    }
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed input: {e}")))
}

/// f64 rounded to 15 significant digits.
pub fn round15(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.14e}").parse().unwrap_or(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if !(n.is_i64() || n.is_u64()) {
                if let Some(x) = n.as_f64() {
                    if let Some(m) = serde_json::Number::from_f64(round15(x)) {
                        *n = m;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 15 significant digits.
pub fn to_output<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::InvalidInput(format!("unserializable output: {e}")))?;
    round_value(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidInput(e.to_string()))
}
