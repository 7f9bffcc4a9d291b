//! Built-in PDE definitions with their solve defaults and figure parameter sets.

use crate::pde_ast::{parse_pde, PdeDefinition};

/// A discrepancy between derived and published results, with the location it concerns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub location: String,
    pub message: String,
}

impl Warning {
    pub fn new(location: &str, message: impl Into<String>) -> Self {
        Warning { location: location.to_string(), message: message.into() }
    }
}

/// Parameter set of one published figure.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureDefaults {
    pub number: u32,
    pub key: &'static str,
    pub caption: &'static str,
    pub params: &'static [(&'static str, f64)],
    /// `Some(σ)` for sub-equation figures.
    pub sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegistryEntry {
    pub key: &'static str,
    pub fractional: bool,
    pub source: &'static str,
    /// Decay integrations applied before the ansatz.
    pub integrations: u32,
    pub notes: &'static [(&'static str, &'static str)],
}

impl RegistryEntry {
    pub fn definition(&self) -> PdeDefinition {
        parse_pde(self.source).expect("built-in definition parses")
    }

    pub fn warnings(&self) -> Vec<Warning> {
        self.notes.iter().map(|(l, m)| Warning::new(l, *m)).collect()
    }

    /// Key without the `_frac` suffix.
    pub fn base_key(&self) -> &'static str {
        self.key.trim_end_matches("_frac")
    }
}

pub const REGISTRY: &[RegistryEntry] = &[
    RegistryEntry {
        key: "toy",
        fractional: false,
        source: "pde toy vars(x,t) : u_xx = u*u_t",
        integrations: 0,
        notes: &[],
    },
    RegistryEntry {
        key: "toy_frac",
        fractional: true,
        source: "pde toy_frac vars(x,t) frac(alpha) : u_x^a2 = u*u_t^a1",
        integrations: 0,
        notes: &[],
    },
    RegistryEntry {
        key: "sww",
        fractional: false,
        source: "pde sww vars(x,y,t) params(p,q) : u_xt + u_xx = u_xxxy + p*u_x*u_xt + q*u_t*u_xx",
        integrations: 1,
        notes: &[
            ("§4", "the integer-order equation is printed with u_xxy; the fourth-order term u_xxxy is used, as the printed reduction and fractional form require"),
            ("§7", "the reduced form is printed with +(c+k)u_ξξ; direct reduction gives -(c+k)u_ξξ, the sign consistent with the printed constraint (c+k) = 4k²m"),
            ("§7", "the φ³ row is printed with (α+β) in place of (p+q)"),
        ],
    },
    RegistryEntry {
        key: "sww_frac",
        fractional: true,
        source: "pde sww_frac vars(x,y,t) params(p,q) frac(alpha) : \
                 u_{x:a1,t:a1} + u_x^a2 = u_{x:a3,y:a1} + p*u_x^a1*u_{x:a1,t:a1} + q*u_t^a1*u_x^a2",
        integrations: 0,
        notes: &[
            ("§8", "a₁ is printed with (α+β) in place of (p+q)"),
            ("§8", "the Φ⁵ row is printed as 24k^(2α)m^α = 2a₁c^αk^α(p+q), which gives a₁ the opposite sign to the printed solution; the derived row a₁c^α(p+q) + 12k^αm^α = 0 agrees with the printed a₁"),
        ],
    },
    RegistryEntry {
        key: "kp",
        fractional: false,
        source: "pde kp vars(x,y,t) : u_yy = (u_t + 6*u*u_x + u_xxx)_x",
        integrations: 2,
        notes: &[(
            "§9",
            "the printed relation 9a₀² = 8k² + 2k⁴ is not reproduced; the φ⁰ row with a₂ = -2k² and c eliminated gives 3a₀² - 8k²a₀ + 4k⁴ = 0",
        )],
    },
    RegistryEntry {
        key: "kp_frac",
        fractional: true,
        source: "pde kp_frac vars(x,y,t) frac(alpha) : u_y^a2 = (u_t^a1 + 6*u*u_x^a1 + u_x^a3)_x^a1",
        integrations: 0,
        notes: &[("§10", "a₀ is printed with denominator 6k²; the derived denominator is 6k^(2α)")],
    },
    RegistryEntry {
        key: "boussinesq4",
        fractional: false,
        source: "pde boussinesq4 vars(x,t) : u_tt = u_xx + 3*(u^2)_xx + u_xxxx",
        integrations: 0,
        notes: &[("§11", "a₀ is printed with denominator 6k⁴; the derived denominator is 6k²")],
    },
    RegistryEntry {
        key: "boussinesq4_frac",
        fractional: true,
        source: "pde boussinesq4_frac vars(x,t) frac(alpha) : u_t^a2 = u_x^a2 + 3*(u^2)_x^a2 + u_x^a4",
        integrations: 0,
        notes: &[("§12", "a₀ is printed with denominator 6k²; the derived denominator is 6k^(2α)")],
    },
];

pub const FIGURES: &[FigureDefaults] = &[
    FigureDefaults {
        number: 1,
        key: "sww",
        caption: "p = q = m = k = 1, c = 3",
        params: &[("p", 1.0), ("q", 1.0), ("m", 1.0), ("k", 1.0), ("c", 3.0)],
        sigma: None,
    },
    FigureDefaults {
        number: 2,
        key: "sww_frac",
        caption: "p = q = m = k = 1, c = 3, for σ = -1",
        params: &[("p", 1.0), ("q", 1.0), ("m", 1.0), ("k", 1.0), ("c", 3.0)],
        sigma: Some(-1.0),
    },
    FigureDefaults {
        number: 3,
        key: "kp",
        caption: "m = k = 1, c = 3.68",
        params: &[("m", 1.0), ("k", 1.0), ("c", 3.68)],
        sigma: None,
    },
    FigureDefaults {
        number: 4,
        key: "kp_frac",
        caption: "m = k = 1, c = 3.68, for σ = -1",
        params: &[("m", 1.0), ("k", 1.0), ("c", 3.68)],
        sigma: Some(-1.0),
    },
    FigureDefaults {
        number: 5,
        key: "boussinesq4",
        caption: "c = k = 1",
        params: &[("c", 1.0), ("k", 1.0)],
        sigma: None,
    },
    FigureDefaults {
        number: 6,
        key: "boussinesq4_frac",
        caption: "c = k = 1, for σ = -1",
        params: &[("c", 1.0), ("k", 1.0)],
        sigma: Some(-1.0),
    },
];

/// Looks up `key`; a base key with `fractional = true` resolves to its `_frac` variant.
pub fn lookup(key: &str, fractional: bool) -> Option<&'static RegistryEntry> {
    let exact = REGISTRY.iter().find(|e| e.key == key)?;
    if fractional && !exact.fractional {
        REGISTRY.iter().find(|e| e.fractional && e.base_key() == key).or(Some(exact))
    } else {
        Some(exact)
    }
}

pub fn figure(n: u32) -> Option<&'static FigureDefaults> {
    FIGURES.iter().find(|f| f.number == n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_with_matching_order_kind() {
        for e in REGISTRY {
            let p = e.definition();
            assert_eq!(p.is_fractional(), e.fractional, "{}", e.key);
            assert_eq!(p.name, e.key);
        }
    }

    #[test]
    fn keys_are_unique_and_resolve() {
        for (i, e) in REGISTRY.iter().enumerate() {
            assert!(REGISTRY[i + 1..].iter().all(|f| f.key != e.key));
        }
        assert_eq!(lookup("kp", true).unwrap().key, "kp_frac");
        assert_eq!(lookup("kp", false).unwrap().key, "kp");
        assert!(lookup("kdv", false).is_none());
        for f in FIGURES {
            assert!(lookup(f.key, false).is_some());
        }
    }
}
