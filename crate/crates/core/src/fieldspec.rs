//! Field-spec files: TOML documents describing Q(w) and optional ring data.

use crate::error::{Error, Result};
use crate::numberfield::{parse_rational, Field, FieldElement, NumberField, DEFAULT_PRECISION};
use crate::valuation::{IntegerRing, Ring, RingData, UserPrime};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

/// An element written either as an expression in `w` or as power-basis coefficients.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Expr(String),
    Int(i64),
    Coeffs(Vec<String>),
}

impl ElementSpec {
    pub fn resolve(&self, field: &Field) -> Result<FieldElement> {
        match self {
            ElementSpec::Expr(s) => FieldElement::parse(field, s),
            ElementSpec::Int(n) => Ok(FieldElement::from_int(field, *n)),
            ElementSpec::Coeffs(c) => {
                if c.len() != field.degree() {
                    return Err(Error::Parse(format!("coefficient vector needs {} entries", field.degree())));
                }
                let q = c.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>()?;
                Ok(FieldElement::new(field, q))
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrincipalPowerSpec {
    pub k: u32,
    pub y: ElementSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimeSpec {
    pub e: u32,
    pub f: u32,
    /// `[p, α]`
    pub two_element_rep: Vec<ElementSpec>,
    pub uniformizer: ElementSpec,
    pub valuation_witness: Option<ElementSpec>,
    pub principal_power: Option<PrincipalPowerSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Ascending coefficients, monic.
    pub min_poly: Vec<String>,
    pub precision: Option<u32>,
    pub integral_basis: Option<Vec<ElementSpec>>,
    #[serde(default)]
    pub prime_splittings: BTreeMap<String, Vec<PrimeSpec>>,
    pub fundamental_units: Option<Vec<ElementSpec>>,
    pub torsion_order: Option<u32>,
    pub class_bound: Option<u32>,
}

impl FieldSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The field Q (min_poly x).
    pub fn rationals() -> Self {
        FieldSpec {
            min_poly: vec!["0".into(), "1".into()],
            precision: None,
            integral_basis: None,
            prime_splittings: BTreeMap::new(),
            fundamental_units: None,
            torsion_order: None,
            class_bound: None,
        }
    }

    pub fn build(&self) -> Result<(Field, Ring)> {
        let field = NumberField::from_strings(&self.min_poly, self.precision.unwrap_or(DEFAULT_PRECISION))?;
        let resolve_all = |v: &[ElementSpec]| v.iter().map(|e| e.resolve(&field)).collect::<Result<Vec<_>>>();
        let mut data = RingData {
            integral_basis: self.integral_basis.as_deref().map(resolve_all).transpose()?,
            fundamental_units: self.fundamental_units.as_deref().map(resolve_all).transpose()?,
            torsion_order: self.torsion_order,
            class_bound: self.class_bound,
            ..Default::default()
        };
        for (key, list) in &self.prime_splittings {
            let p: u64 = key.trim().parse().map_err(|_| Error::Parse(format!("bad prime key {key:?}")))?;
            let mut primes = Vec::new();
            for ps in list {
                if ps.two_element_rep.len() != 2 {
                    return Err(Error::Parse("two_element_rep must be [p, alpha]".into()));
                }
                let first = ps.two_element_rep[0].resolve(&field)?;
                if first != FieldElement::from_int(&field, p as i64) {
                    return Err(Error::Parse(format!("two_element_rep for {p} must start with {p}")));
                }
                primes.push(UserPrime {
                    e: ps.e,
                    f: ps.f,
                    generator: ps.two_element_rep[1].resolve(&field)?,
                    uniformizer: ps.uniformizer.resolve(&field)?,
                    witness: ps.valuation_witness.as_ref().map(|w| w.resolve(&field)).transpose()?,
                    principal_power: match &ps.principal_power {
                        Some(pp) => Some((pp.k, pp.y.resolve(&field)?)),
                        None => None,
                    },
                });
            }
            data.prime_splittings.insert(p, primes);
        }
        let ring = IntegerRing::with_data(&field, data)?;
        Ok((field, ring))
    }
}
