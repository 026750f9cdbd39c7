//! Design space definition and configuration algebra.
//!
//! A [`DesignSpace`] is an ordered list of tunable parameters, each with a
//! strictly ascending list of numeric settings. Points in the space are
//! [`Configuration`]s; assignments over a subset of parameters are
//! [`PartialConfiguration`]s, which can be enumerated and composed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("parameter `{0}` has no settings")]
    EmptySettings(String),
    #[error("parameter name `{0}` appears more than once")]
    DuplicateName(String),
    #[error("settings of parameter `{name}` are not ascending ({previous} then {next})")]
    NonAscendingSettings {
        name: String,
        previous: Setting,
        next: Setting,
    },
    #[error("parameter `{name}` lists setting {value} more than once")]
    DuplicateSetting { name: String, value: Setting },
    #[error("design space has no parameters")]
    NoParameters,
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("setting {value} is not a member of parameter `{name}`")]
    NotASetting { name: String, value: Setting },
    #[error("parameter `{0}` is assigned by both partial configurations")]
    OverlappingDomains(String),
    #[error("parameter `{0}` is not assigned")]
    IncompleteCoverage(String),
    #[error("invalid setting value `{0}`")]
    InvalidSetting(String),
}

/// An exact decimal setting value.
///
/// Stored as a decimal rather than a float so membership tests against a
/// parameter's settings list are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting(Decimal);

impl Setting {
    pub fn new(value: Decimal) -> Self {
        Setting(value.normalize())
    }

    pub fn as_decimal(&self) -> Decimal {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    fn from_f64_literal(v: f64) -> Result<Self, SpaceError> {
        if !v.is_finite() {
            return Err(SpaceError::InvalidSetting(v.to_string()));
        }
        // `Display` for f64 yields the shortest string that round-trips, which
        // is exactly the literal written in a JSON document.
        Setting::from_str(&v.to_string())
    }
}

impl From<i64> for Setting {
    fn from(v: i64) -> Self {
        Setting(Decimal::from(v))
    }
}

impl From<i32> for Setting {
    fn from(v: i32) -> Self {
        Setting(Decimal::from(v))
    }
}

impl From<u32> for Setting {
    fn from(v: u32) -> Self {
        Setting(Decimal::from(v))
    }
}

impl FromStr for Setting {
    type Err = SpaceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let parsed = Decimal::from_str(trimmed)
            .or_else(|_| Decimal::from_scientific(trimmed))
            .map_err(|_| SpaceError::InvalidSetting(s.to_string()))?;
        Ok(Setting::new(parsed))
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Setting {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.0.fract().is_zero() {
            if let Some(i) = self.0.to_i64() {
                return serializer.serialize_i64(i);
            }
        }
        match self.0.to_f64() {
            Some(f) if Setting::from_f64_literal(f).ok() == Some(*self) => serializer.serialize_f64(f),
            _ => serializer.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Setting {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct SettingVisitor;

        impl Visitor<'_> for SettingVisitor {
            type Value = Setting;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a decimal number")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Setting, E> {
                Ok(Setting::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Setting, E> {
                Ok(Setting::new(Decimal::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Setting, E> {
                Setting::from_f64_literal(v).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Setting, E> {
                Setting::from_str(v).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(SettingVisitor)
    }
}

/// One tunable parameter and its ascending list of settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSpec {
    pub name: String,
    pub settings: Vec<Setting>,
}

impl ParameterSpec {
    pub fn new(name: impl Into<String>, settings: impl IntoIterator<Item = Setting>) -> Self {
        ParameterSpec {
            name: name.into(),
            settings: settings.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.settings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.settings.is_empty()
    }

    pub fn first(&self) -> Setting {
        self.settings[0]
    }

    pub fn last(&self) -> Setting {
        self.settings[self.settings.len() - 1]
    }

    pub fn contains(&self, value: &Setting) -> bool {
        self.settings.binary_search(value).is_ok()
    }
}

/// The ordered list of tunable parameters. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DesignSpace {
    parameters: Vec<ParameterSpec>,
}

impl DesignSpace {
    /// Validates a raw parameter list into a design space.
    pub fn new(parameters: Vec<ParameterSpec>) -> Result<Self, SpaceError> {
        if parameters.is_empty() {
            return Err(SpaceError::NoParameters);
        }
        let mut names = HashSet::new();
        for p in &parameters {
            if !names.insert(p.name.as_str()) {
                return Err(SpaceError::DuplicateName(p.name.clone()));
            }
            if p.settings.is_empty() {
                return Err(SpaceError::EmptySettings(p.name.clone()));
            }
            for pair in p.settings.windows(2) {
                match pair[0].cmp(&pair[1]) {
                    std::cmp::Ordering::Less => {}
                    std::cmp::Ordering::Equal => {
                        return Err(SpaceError::DuplicateSetting {
                            name: p.name.clone(),
                            value: pair[0],
                        })
                    }
                    std::cmp::Ordering::Greater => {
                        return Err(SpaceError::NonAscendingSettings {
                            name: p.name.clone(),
                            previous: pair[0],
                            next: pair[1],
                        })
                    }
                }
            }
        }
        Ok(DesignSpace { parameters })
    }

    pub fn parameters(&self) -> &[ParameterSpec] {
        &self.parameters
    }

    /// Number of tunable parameters.
    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parameters.iter().map(|p| p.name.as_str())
    }

    /// Product of the settings-list sizes, saturating at `u128::MAX`.
    pub fn cardinality(&self) -> u128 {
        self.parameters
            .iter()
            .fold(1u128, |acc, p| acc.saturating_mul(p.len() as u128))
    }

    /// The configuration with every parameter at its first (smallest) setting.
    pub fn all_first(&self) -> Configuration {
        Configuration {
            assignment: self
                .parameters
                .iter()
                .map(|p| (p.name.clone(), p.first()))
                .collect(),
        }
    }

    pub fn all_last(&self) -> Configuration {
        Configuration {
            assignment: self
                .parameters
                .iter()
                .map(|p| (p.name.clone(), p.last()))
                .collect(),
        }
    }

    /// Enumerates every assignment of the named parameters, in lexicographic
    /// order of setting indices with the last-listed parameter varying fastest.
    pub fn enumerate_partial<S: AsRef<str>>(
        &self,
        subset: &[S],
    ) -> Result<PartialEnumeration<'_>, SpaceError> {
        let mut params = Vec::with_capacity(subset.len());
        let mut seen = HashSet::new();
        for name in subset {
            let name = name.as_ref();
            let spec = self
                .parameter(name)
                .ok_or_else(|| SpaceError::UnknownParameter(name.to_string()))?;
            if !seen.insert(name) {
                return Err(SpaceError::DuplicateName(name.to_string()));
            }
            params.push(spec);
        }
        Ok(PartialEnumeration {
            odometer: vec![0; params.len()],
            params,
            done: false,
        })
    }

    /// Enumerates every complete configuration of the space.
    pub fn enumerate(&self) -> impl Iterator<Item = Configuration> + '_ {
        let names: Vec<&str> = self.names().collect();
        self.enumerate_partial(&names)
            .expect("own parameter names are valid")
            .map(|p| Configuration {
                assignment: p.assignment,
            })
    }

    /// Joins two partial configurations with disjoint domains that together
    /// cover every parameter.
    pub fn compose(
        &self,
        a: &PartialConfiguration,
        b: &PartialConfiguration,
    ) -> Result<Configuration, SpaceError> {
        self.check_partial(a)?;
        self.check_partial(b)?;
        let mut assignment = a.assignment.clone();
        for (name, value) in &b.assignment {
            if assignment.insert(name.clone(), *value).is_some() {
                return Err(SpaceError::OverlappingDomains(name.clone()));
            }
        }
        for p in &self.parameters {
            if !assignment.contains_key(&p.name) {
                return Err(SpaceError::IncompleteCoverage(p.name.clone()));
            }
        }
        Ok(Configuration { assignment })
    }

    fn check_partial(&self, partial: &PartialConfiguration) -> Result<(), SpaceError> {
        for (name, value) in &partial.assignment {
            let spec = self
                .parameter(name)
                .ok_or_else(|| SpaceError::UnknownParameter(name.clone()))?;
            if !spec.contains(value) {
                return Err(SpaceError::NotASetting {
                    name: name.clone(),
                    value: *value,
                });
            }
        }
        Ok(())
    }

    /// Checks that `config` assigns exactly this space's parameters with
    /// member settings.
    pub fn check(&self, config: &Configuration) -> Result<(), SpaceError> {
        for p in &self.parameters {
            match config.assignment.get(&p.name) {
                None => return Err(SpaceError::IncompleteCoverage(p.name.clone())),
                Some(v) if !p.contains(v) => {
                    return Err(SpaceError::NotASetting {
                        name: p.name.clone(),
                        value: *v,
                    })
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = config
            .assignment
            .keys()
            .find(|k| self.parameter(k).is_none())
        {
            return Err(SpaceError::UnknownParameter(extra.clone()));
        }
        Ok(())
    }
}

impl<'de> Deserialize<'de> for DesignSpace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parameters = Vec::<ParameterSpec>::deserialize(deserializer)?;
        DesignSpace::new(parameters).map_err(de::Error::custom)
    }
}

/// Iterator returned by [`DesignSpace::enumerate_partial`].
pub struct PartialEnumeration<'a> {
    params: Vec<&'a ParameterSpec>,
    odometer: Vec<usize>,
    done: bool,
}

impl Iterator for PartialEnumeration<'_> {
    type Item = PartialConfiguration;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let assignment = self
            .params
            .iter()
            .zip(&self.odometer)
            .map(|(p, &i)| (p.name.clone(), p.settings[i]))
            .collect();

        // advance, last parameter fastest
        self.done = true;
        for pos in (0..self.params.len()).rev() {
            self.odometer[pos] += 1;
            if self.odometer[pos] < self.params[pos].len() {
                self.done = false;
                break;
            }
            self.odometer[pos] = 0;
        }
        Some(PartialConfiguration { assignment })
    }
}

/// A complete point in a design space, keyed by parameter name.
///
/// The name-sorted map doubles as the canonical form used for hashing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    assignment: BTreeMap<String, Setting>,
}

impl Configuration {
    /// Builds a configuration from an assignment, validating it against `space`.
    pub fn from_assignment(
        space: &DesignSpace,
        assignment: impl IntoIterator<Item = (String, Setting)>,
    ) -> Result<Self, SpaceError> {
        let config = Configuration {
            assignment: assignment.into_iter().collect(),
        };
        space.check(&config)?;
        Ok(config)
    }

    pub fn get(&self, name: &str) -> Option<Setting> {
        self.assignment.get(name).copied()
    }

    pub fn assignment(&self) -> &BTreeMap<String, Setting> {
        &self.assignment
    }

    /// Returns a copy with one parameter changed. The caller guarantees the
    /// value is a member of that parameter's settings.
    pub fn with(&self, name: &str, value: Setting) -> Configuration {
        let mut next = self.clone();
        next.assignment.insert(name.to_string(), value);
        next
    }

    /// Restricts the configuration to the named parameters.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> PartialConfiguration {
        PartialConfiguration {
            assignment: names
                .iter()
                .filter_map(|n| {
                    let n = n.as_ref();
                    self.assignment.get(n).map(|v| (n.to_string(), *v))
                })
                .collect(),
        }
    }

    /// Settings listed in the space's parameter order.
    pub fn ordered_values<'a>(&'a self, space: &'a DesignSpace) -> impl Iterator<Item = Setting> + 'a {
        space
            .names()
            .map(move |n| self.assignment.get(n).copied().expect("validated configuration"))
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in &self.assignment {
            if !first {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// An assignment over a subset of parameters; the subset may be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartialConfiguration {
    assignment: BTreeMap<String, Setting>,
}

impl PartialConfiguration {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Setting)>) -> Self {
        PartialConfiguration {
            assignment: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, name: &str) -> Option<Setting> {
        self.assignment.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &BTreeMap<String, Setting> {
        &self.assignment
    }
}
