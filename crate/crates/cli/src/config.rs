//! Flat `key = value` configuration with command-line overrides.
//!
//! Every value is read through [`Resolver`], which records the resolved value
//! (defaults included) so outputs can echo the complete configuration, and
//! which rejects keys that the command never consumed.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use soft_scatter::specfun::{bessel_zeros, HarmonicIndex};
use soft_scatter::sphgrid::{Direction, HarmonicCoeffs};
use soft_scatter::Complex64;

use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = split_pair(line).ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected `key = value`, got `{}`",
                    n + 1,
                    raw.trim()
                ))
            })?;
            if cfg.values.insert(key.clone(), value).is_some() {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    n + 1
                )));
            }
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, pair: &str) -> Result<(), CliError> {
        let (key, value) = split_pair(pair)
            .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{pair}`")))?;
        self.values.insert(key, value);
        Ok(())
    }
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    let valid = !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    valid.then(|| (k.to_string(), v.to_string()))
}

/// Typed access to a [`Config`] that remembers what was resolved.
pub struct Resolver {
    raw: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(command: &str, cfg: Config) -> Self {
        let mut resolved = BTreeMap::new();
        resolved.insert("command".to_string(), command.to_string());
        Self {
            raw: cfg.values,
            resolved,
        }
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.raw.remove(key)
    }

    fn record_f64(&mut self, key: &str, value: f64) {
        self.record(key, format!("{value:?}"));
    }

    fn record(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    fn invalid(key: &str, value: &str, why: impl Display) -> CliError {
        CliError::Config(format!("invalid value for `{key}`: `{value}` ({why})"))
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        match self.take(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| Self::invalid(key, &v, e)),
        }
    }

    pub fn string(
        &mut self,
        key: &str,
        default: &str,
        allowed: &[&str],
    ) -> Result<String, CliError> {
        let v = self.take(key).unwrap_or_else(|| default.to_string());
        if !allowed.contains(&v.as_str()) {
            return Err(Self::invalid(
                key,
                &v,
                format!("expected one of {}", allowed.join(", ")),
            ));
        }
        self.record(key, &v);
        Ok(v)
    }

    pub fn positive_f64(&mut self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = match self.parsed::<f64>(key)? {
            Some(v) => v,
            None => {
                default.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?
            }
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Self::invalid(
                key,
                &v.to_string(),
                "must be positive and finite",
            ));
        }
        self.record_f64(key, v);
        Ok(v)
    }

    pub fn non_negative_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        let v = self.parsed::<f64>(key)?.unwrap_or(default);
        if !(v.is_finite() && v >= 0.0) {
            return Err(Self::invalid(
                key,
                &v.to_string(),
                "must be non-negative and finite",
            ));
        }
        self.record_f64(key, v);
        Ok(v)
    }

    /// Integer in `[min, max]`. Negative input is reported as out of range.
    pub fn int(
        &mut self,
        key: &str,
        default: Option<i64>,
        min: i64,
        max: i64,
    ) -> Result<i64, CliError> {
        let v = match self.parsed::<i64>(key)? {
            Some(v) => v,
            None => {
                default.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?
            }
        };
        if v < min || v > max {
            return Err(Self::invalid(
                key,
                &v.to_string(),
                format!("must lie in [{min}, {max}]"),
            ));
        }
        self.record(key, v);
        Ok(v)
    }

    pub fn optional_int(&mut self, key: &str, min: i64, max: i64) -> Result<Option<i64>, CliError> {
        if self.raw.contains_key(key) {
            self.int(key, None, min, max).map(Some)
        } else {
            Ok(None)
        }
    }

    /// A wavenumber; `zero(l,n)` stands for the n-th zero of `j_l` divided by `radius`.
    pub fn wavenumber(
        &mut self,
        key: &str,
        radius: f64,
        default: Option<f64>,
    ) -> Result<f64, CliError> {
        let v = match self.take(key) {
            Some(text) => {
                parse_wavenumber(&text, radius).map_err(|why| Self::invalid(key, &text, why))?
            }
            None => {
                default.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?
            }
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Self::invalid(
                key,
                &v.to_string(),
                "must be positive and finite",
            ));
        }
        self.record_f64(key, v);
        Ok(v)
    }

    /// Comma-separated list of wavenumbers, sorted ascending.
    pub fn wavenumbers(&mut self, key: &str, radius: f64) -> Result<Vec<f64>, CliError> {
        let text = self
            .take(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?;
        let mut ks = Vec::new();
        for item in split_top_level(&text) {
            let k = parse_wavenumber(item, radius).map_err(|why| Self::invalid(key, &text, why))?;
            if !(k.is_finite() && k > 0.0) {
                return Err(Self::invalid(key, &text, "wavenumbers must be positive"));
            }
            ks.push(k);
        }
        if ks.is_empty() {
            return Err(Self::invalid(key, &text, "empty list"));
        }
        ks.sort_by(f64::total_cmp);
        ks.dedup();
        self.record(key, join(&ks));
        Ok(ks)
    }

    pub fn int_list(
        &mut self,
        key: &str,
        default: &[usize],
        max: usize,
    ) -> Result<Vec<usize>, CliError> {
        let list = match self.take(key) {
            None => default.to_vec(),
            Some(text) => split_list(&text, ',')
                .map(|s| s.parse::<usize>().map_err(|e| Self::invalid(key, &text, e)))
                .collect::<Result<_, _>>()?,
        };
        if list.is_empty() || list.iter().any(|&m| m == 0 || m > max) {
            return Err(Self::invalid(
                key,
                &join(&list),
                format!("entries must lie in [1, {max}]"),
            ));
        }
        let mut sorted = list;
        sorted.sort_unstable();
        sorted.dedup();
        self.record(key, join(&sorted));
        Ok(sorted)
    }

    pub fn triple(&mut self, key: &str, default: [f64; 3]) -> Result<[f64; 3], CliError> {
        let v = match self.take(key) {
            None => default,
            Some(text) => {
                let items: Vec<f64> = split_list(&text, ',')
                    .map(|s| s.parse::<f64>().map_err(|e| Self::invalid(key, &text, e)))
                    .collect::<Result<_, _>>()?;
                <[f64; 3]>::try_from(items)
                    .map_err(|_| Self::invalid(key, &text, "expected three numbers"))?
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Self::invalid(key, &join(&v), "must be finite"));
        }
        self.record(key, join(&v));
        Ok(v)
    }

    pub fn direction(&mut self, key: &str, default: [f64; 3]) -> Result<Direction, CliError> {
        let v = self.triple(key, default)?;
        Direction::new(v[0], v[1], v[2]).map_err(|e| Self::invalid(key, &join(&v), e))
    }

    /// Target pattern as `ell,m[,re[,im]]` terms separated by `;`.
    pub fn target(&mut self, key: &str) -> Result<HarmonicCoeffs, CliError> {
        let text = self
            .take(key)
            .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))?;
        let coeffs = parse_target(&text).map_err(|why| Self::invalid(key, &text, why))?;
        if coeffs.norm() == 0.0 {
            return Err(Self::invalid(key, &text, "target is identically zero"));
        }
        self.record(key, &text);
        Ok(coeffs)
    }

    /// Fails on keys that were supplied but never read.
    pub fn finish(self) -> Result<Resolved, CliError> {
        if let Some(key) = self.raw.keys().next() {
            return Err(CliError::Config(format!(
                "unknown key `{key}` for command {}",
                self.resolved["command"]
            )));
        }
        Ok(Resolved {
            values: self.resolved,
        })
    }
}

fn split_list(text: &str, sep: char) -> impl Iterator<Item = &str> {
    text.split(sep).map(str::trim).filter(|s| !s.is_empty())
}

/// Splits on commas outside parentheses, so `zero(3,1)` stays whole.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0_i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts.into_iter().filter(|s| !s.is_empty()).collect()
}

fn join<T: std::fmt::Debug>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_wavenumber(text: &str, radius: f64) -> Result<f64, String> {
    let t = text.trim();
    if let Some(inner) = t.strip_prefix("zero(").and_then(|s| s.strip_suffix(')')) {
        let (l, n) = inner.split_once(',').ok_or("expected zero(l,n)")?;
        let ell: usize = l.trim().parse().map_err(|e| format!("{e}"))?;
        let index: usize = n.trim().parse().map_err(|e| format!("{e}"))?;
        if index == 0 {
            return Err("zero index is 1-based".into());
        }
        let zeros = bessel_zeros(ell, index).map_err(|e| e.to_string())?;
        return Ok(zeros[index - 1].x / radius);
    }
    t.parse::<f64>().map_err(|e| e.to_string())
}

fn parse_target(text: &str) -> Result<HarmonicCoeffs, String> {
    let mut terms = Vec::new();
    for term in split_list(text, ';') {
        let parts: Vec<&str> = term.split(',').map(str::trim).collect();
        if !(2..=4).contains(&parts.len()) {
            return Err(format!("term `{term}` should be ell,m[,re[,im]]"));
        }
        let ell: usize = parts[0]
            .parse()
            .map_err(|e| format!("ell in `{term}`: {e}"))?;
        let m: i64 = parts[1]
            .parse()
            .map_err(|e| format!("m in `{term}`: {e}"))?;
        let re: f64 = parts
            .get(2)
            .map_or(Ok(1.0), |s| s.parse())
            .map_err(|e| format!("re in `{term}`: {e}"))?;
        let im: f64 = parts
            .get(3)
            .map_or(Ok(0.0), |s| s.parse())
            .map_err(|e| format!("im in `{term}`: {e}"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(format!("weight in `{term}` is not finite"));
        }
        terms.push((
            HarmonicIndex::new(ell, m).map_err(|e| e.to_string())?,
            Complex64::new(re, im),
        ));
    }
    if terms.is_empty() {
        return Err("no terms".into());
    }
    let lmax = terms.iter().map(|(i, _)| i.ell()).max().unwrap_or(0);
    let mut c = HarmonicCoeffs::zeros(lmax);
    for (idx, w) in terms {
        c.set(idx, c.get(idx) + w);
    }
    Ok(c)
}

/// The full resolved configuration of a run.
#[derive(Debug, Clone)]
pub struct Resolved {
    values: BTreeMap<String, String>,
}

impl Resolved {
    /// `# config: key=value; …` in key order.
    pub fn comment(&self) -> String {
        let body: Vec<String> = self
            .values
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        format!("config: {}", body.join("; "))
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({ "config": self.values })
    }
}
