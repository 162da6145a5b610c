//! TOML system configurations.
//!
//! A configuration names the domain, the polynomial pieces with their
//! guards, prescribed values at switching sets, the grid and time step,
//! named cell sets and the run parameters. See the README for the full
//! grammar; [`SystemConfig::to_toml`] prints a configuration that parses
//! back to an identical value.

use std::collections::BTreeMap;
use std::ops::Range;

use multiflow_core::continuation::SweepMode;
use multiflow_core::{
    BoxSet, Grid, Halfspace, Interval, IntervalVector, Override, PiecewiseInclusion, Polynomial, RegionPiece,
    StepScheme,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::expr::{parse_polynomial, ExprError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn invalid<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Validation(message.into()))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: RawSystem,
    grid: RawGrid,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    sets: BTreeMap<String, SetSpec>,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda_range: Option<[f64; 2]>,
    #[serde(rename = "piece")]
    pieces: Vec<RawPiece>,
    #[serde(rename = "override", default, skip_serializing_if = "Vec::is_empty")]
    overrides: Vec<RawOverride>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    guard: Vec<Spanned<String>>,
    rhs: Vec<Spanned<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOverride {
    region: Vec<[f64; 2]>,
    value: Vec<Spanned<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    subdivisions: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(default)]
    scheme: SchemeSpec,
}

/// Serialized form of [`StepScheme`]: `"first-order"` or
/// `{ centered = { substeps = .., subdivisions = .. } }`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
enum SchemeSpec {
    #[default]
    FirstOrder,
    Centered { substeps: usize, subdivisions: usize },
}

impl From<SchemeSpec> for StepScheme {
    fn from(s: SchemeSpec) -> StepScheme {
        match s {
            SchemeSpec::FirstOrder => StepScheme::FirstOrder,
            SchemeSpec::Centered { substeps, subdivisions } => StepScheme::Centered { substeps, subdivisions },
        }
    }
}

impl From<StepScheme> for SchemeSpec {
    fn from(s: StepScheme) -> SchemeSpec {
        match s {
            StepScheme::FirstOrder => SchemeSpec::FirstOrder,
            StepScheme::Centered { substeps, subdivisions } => SchemeSpec::Centered { substeps, subdivisions },
        }
    }
}

/// A named cell set, independent of the grid resolution except for
/// explicit cell lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    /// Every cell.
    All,
    /// Cells meeting a box (positive-measure overlap).
    Box(Vec<[f64; 2]>),
    /// Union over several boxes.
    Boxes(Vec<Vec<[f64; 2]>>),
    /// Explicit cell ids.
    Cells(Vec<usize>),
    /// Cells whose centre lies at distance in `(inner, outer)` from `center`.
    Shell { center: Vec<f64>, inner: f64, outer: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModeSpec {
    Sampled,
    Interval,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mode: Option<ModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slope: Option<f64>,
}

/// Pipeline parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Parameter value for single-sample commands.
    pub lambda: f64,
    /// Attractor search budget; defaults to four times the carrier size.
    pub k_max: Option<usize>,
    /// Parameter samples for `sweep` and `continue`.
    pub samples: Vec<f64>,
    pub mode: SweepMode,
    pub anchor: Option<f64>,
    /// Semicontinuity slack in cells per unit of `lambda`.
    pub slope: f64,
}

pub const DEFAULT_SLOPE: f64 = 20.0;

/// A validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub inclusion: PiecewiseInclusion,
    pub grid: Grid,
    /// `None` selects the default step heuristic.
    pub tau: Option<f64>,
    pub scheme: StepScheme,
    pub sets: BTreeMap<String, SetSpec>,
    pub run: RunSettings,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn error_at(&self, offset: usize, message: impl Into<String>) -> ConfigError {
        let (line, column) = line_col(self.text, offset);
        ConfigError::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Byte offset of the first character inside a quoted TOML string.
    fn content_start(&self, span: &Range<usize>) -> usize {
        let raw = self.text.get(span.clone()).unwrap_or("");
        let quote = ["\"\"\"", "'''", "\"", "'"].iter().find(|q| raw.starts_with(**q));
        span.start + quote.map_or(0, |q| q.len())
    }

    fn expr_error(&self, s: &Spanned<String>, e: ExprError) -> ConfigError {
        let start = self.content_start(&s.span());
        self.error_at(start + e.offset, e.message)
    }

    fn polynomial(&self, s: &Spanned<String>, nvars: usize) -> Result<Polynomial, ConfigError> {
        parse_polynomial(s.get_ref(), nvars).map_err(|e| self.expr_error(s, e))
    }

    fn guard(&self, s: &Spanned<String>, nvars: usize) -> Result<Halfspace, ConfigError> {
        let text = s.get_ref();
        let start = self.content_start(&s.span());
        let (pos, flip) = match (text.find("<="), text.find(">=")) {
            (Some(p), None) => (p, false),
            (None, Some(p)) => (p, true),
            _ => return Err(self.error_at(start, "guard needs exactly one '<=' or '>='")),
        };
        let side = |range: Range<usize>| {
            parse_polynomial(&text[range.clone()], nvars).map_err(|e| self.error_at(start + range.start + e.offset, e.message))
        };
        let lhs = side(0..pos)?;
        let rhs = side(pos + 2..text.len())?;
        let diff = if flip { rhs.sub(&lhs) } else { lhs.sub(&rhs) };
        if diff.depends_on_lambda() || diff.state_degree() > 1 {
            return Err(self.error_at(start, "guards must be affine in the state variables and free of lambda"));
        }
        let mut normal = vec![0.0; nvars];
        let mut offset = 0.0;
        for (e, c) in diff.terms() {
            if !c.is_point() {
                return Err(self.error_at(start, "guard coefficients must be numbers, not intervals"));
            }
            match e[..nvars].iter().position(|&k| k == 1) {
                Some(i) => normal[i] = c.lo(),
                None => offset = c.lo(),
            }
        }
        Ok(Halfspace::new(normal, offset))
    }

    fn constant(&self, s: &Spanned<String>, nvars: usize) -> Result<Interval, ConfigError> {
        let p = self.polynomial(s, nvars)?;
        if p.is_zero() {
            return Ok(Interval::ZERO);
        }
        let value = match p.terms().next() {
            Some((e, c)) if p.terms().count() == 1 && e.iter().all(|&k| k == 0) => Ok(c),
            _ => Err(self.error_at(self.content_start(&s.span()), "override values must be constants")),
        };
        value
    }
}

fn boxes(bounds: &[[f64; 2]], what: &str) -> Result<IntervalVector, ConfigError> {
    let lo: Vec<f64> = bounds.iter().map(|b| b[0]).collect();
    let hi: Vec<f64> = bounds.iter().map(|b| b[1]).collect();
    if bounds.iter().flatten().any(|v| !v.is_finite()) {
        return invalid(format!("{what} has a non-finite bound"));
    }
    IntervalVector::from_bounds(&lo, &hi).ok_or_else(|| ConfigError::Validation(format!("{what} has lo > hi")))
}

fn bounds_of(b: &IntervalVector) -> Vec<[f64; 2]> {
    b.iter().map(|c| [c.lo(), c.hi()]).collect()
}

fn guard_text(h: &Halfspace) -> String {
    let mut parts: Vec<String> = h
        .normal
        .iter()
        .enumerate()
        .filter(|(_, g)| **g != 0.0)
        .map(|(i, g)| format!("{g:?}*x{}", i + 1))
        .collect();
    if h.offset != 0.0 || parts.is_empty() {
        parts.push(format!("{:?}", h.offset));
    }
    format!("{} <= 0", parts.join(" + "))
}

fn spanned(s: String) -> Spanned<String> {
    Spanned::new(0..0, s)
}

impl SystemConfig {
    /// Parses and validates configuration text.
    pub fn parse(text: &str) -> Result<SystemConfig, ConfigError> {
        let src = Source { text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            src.error_at(offset, e.message().trim().to_string())
        })?;

        let domain = boxes(&raw.system.domain, "domain")?;
        let n = domain.dim();
        if n == 0 {
            return invalid("domain needs at least one axis");
        }
        let mut pieces = Vec::new();
        for (k, p) in raw.system.pieces.iter().enumerate() {
            if p.rhs.len() != n {
                return invalid(format!("piece {} has {} right-hand sides for a {n}-dimensional domain", k + 1, p.rhs.len()));
            }
            let guard = p.guard.iter().map(|g| src.guard(g, n)).collect::<Result<Vec<_>, _>>()?;
            let rhs = p.rhs.iter().map(|r| src.polynomial(r, n)).collect::<Result<Vec<_>, _>>()?;
            pieces.push(RegionPiece::new(guard, rhs));
        }
        let mut overrides = Vec::new();
        for (k, o) in raw.system.overrides.iter().enumerate() {
            let region = boxes(&o.region, "override region")?;
            if region.dim() != n || o.value.len() != n {
                return invalid(format!("override {} does not match the domain dimension", k + 1));
            }
            let value = o.value.iter().map(|v| src.constant(v, n)).collect::<Result<Vec<_>, _>>()?;
            overrides.push(Override {
                region,
                value: IntervalVector::new(value),
            });
        }
        let lambda_range = match raw.system.lambda_range {
            Some([lo, hi]) => Interval::new(lo, hi)
                .filter(|l| l.subset_of(Interval::SYMMETRIC_UNIT))
                .ok_or_else(|| ConfigError::Validation("lambda_range must be an interval inside [-1, 1]".into()))?,
            None => Interval::SYMMETRIC_UNIT,
        };
        let inclusion = PiecewiseInclusion::new(domain.clone(), pieces, overrides, lambda_range)
            .map_err(|e| ConfigError::Validation(e.to_string()))?;

        if raw.grid.subdivisions.len() != n {
            return invalid(format!("grid needs {n} subdivision counts"));
        }
        let grid = Grid::new(domain, raw.grid.subdivisions.clone()).map_err(|e| ConfigError::Validation(e.to_string()))?;
        if let Some(t) = raw.grid.tau {
            if !(t > 0.0 && t.is_finite()) {
                return invalid("tau must be positive");
            }
        }
        let scheme: StepScheme = raw.grid.scheme.into();
        if let StepScheme::Centered { substeps, subdivisions } = scheme {
            if substeps == 0 || subdivisions == 0 {
                return invalid("centered scheme needs positive substeps and subdivisions");
            }
        }

        let lambda = raw.run.lambda.unwrap_or(0.0);
        if !lambda_range.contains(lambda) {
            return invalid("run.lambda lies outside lambda_range");
        }
        let samples = raw.run.samples.clone().unwrap_or_else(|| vec![lambda]);
        if samples.is_empty() || samples.iter().any(|l| !lambda_range.contains(*l)) {
            return invalid("run.samples must be non-empty and inside lambda_range");
        }
        if samples.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return invalid("run.samples must be strictly increasing");
        }
        let slope = raw.run.slope.unwrap_or(DEFAULT_SLOPE);
        if !(slope >= 0.0 && slope.is_finite()) {
            return invalid("run.slope must be non-negative");
        }
        let cfg = SystemConfig {
            inclusion,
            grid,
            tau: raw.grid.tau,
            scheme,
            sets: raw.sets,
            run: RunSettings {
                lambda,
                k_max: raw.run.k_max,
                samples,
                mode: match raw.run.mode {
                    Some(ModeSpec::Interval) => SweepMode::Interval,
                    _ => SweepMode::Sampled,
                },
                anchor: raw.run.anchor,
                slope,
            },
        };
        for name in cfg.sets.keys() {
            cfg.set(name)?;
        }
        Ok(cfg)
    }

    /// Canonical TOML text for this configuration.
    pub fn to_toml(&self) -> String {
        let inc = &self.inclusion;
        let raw = RawConfig {
            system: RawSystem {
                domain: bounds_of(inc.domain()),
                lambda_range: (inc.lambda_range() != Interval::SYMMETRIC_UNIT)
                    .then(|| [inc.lambda_range().lo(), inc.lambda_range().hi()]),
                pieces: inc
                    .pieces()
                    .iter()
                    .map(|p| RawPiece {
                        guard: p.guard.iter().map(|g| spanned(guard_text(g))).collect(),
                        rhs: p.rhs.iter().map(|r| spanned(r.to_string())).collect(),
                    })
                    .collect(),
                overrides: inc
                    .overrides()
                    .iter()
                    .map(|o| RawOverride {
                        region: bounds_of(&o.region),
                        value: o.value.iter().map(|v| spanned(v.to_string())).collect(),
                    })
                    .collect(),
            },
            grid: RawGrid {
                subdivisions: self.grid.subdivisions().to_vec(),
                tau: self.tau,
                scheme: self.scheme.into(),
            },
            sets: self.sets.clone(),
            run: RawRun {
                lambda: Some(self.run.lambda),
                k_max: self.run.k_max,
                samples: Some(self.run.samples.clone()),
                mode: Some(match self.run.mode {
                    SweepMode::Sampled => ModeSpec::Sampled,
                    SweepMode::Interval => ModeSpec::Interval,
                }),
                anchor: self.run.anchor,
                slope: Some(self.run.slope),
            },
        };
        toml::to_string(&raw).expect("configuration serializes")
    }

    /// Replaces the grid resolution, keeping the domain.
    pub fn with_subdivisions(&mut self, subdivisions: Vec<usize>) -> Result<(), ConfigError> {
        if subdivisions.len() != self.grid.dim() {
            return invalid(format!("--grid needs {} counts", self.grid.dim()));
        }
        self.grid =
            Grid::new(self.grid.domain().clone(), subdivisions).map_err(|e| ConfigError::Validation(e.to_string()))?;
        Ok(())
    }

    /// Resolves a named set on the current grid.
    pub fn set(&self, name: &str) -> Result<BoxSet, ConfigError> {
        let spec = self
            .sets
            .get(name)
            .ok_or_else(|| ConfigError::Validation(format!("set '{name}' is not defined")))?;
        resolve(&self.grid, spec).map_err(|m| ConfigError::Validation(format!("set '{name}': {m}")))
    }

    /// A named set, or `default` when the name is not defined.
    pub fn set_or(&self, name: &str, default: BoxSet) -> Result<BoxSet, ConfigError> {
        if self.sets.contains_key(name) {
            self.set(name)
        } else {
            Ok(default)
        }
    }
}

fn resolve(grid: &Grid, spec: &SetSpec) -> Result<BoxSet, String> {
    let count = grid.cell_count();
    let domain = grid.domain();
    let one_box = |b: &[[f64; 2]]| -> Result<BoxSet, String> {
        let bx = boxes(b, "box").map_err(|e| e.to_string())?;
        if bx.dim() != grid.dim() {
            return Err(format!("box has {} axes, the domain has {}", bx.dim(), grid.dim()));
        }
        if !bx.subset_of(domain) {
            return Err("box is not inside the domain".into());
        }
        Ok(grid.cells_overlapping(&bx))
    };
    match spec {
        SetSpec::All => Ok(BoxSet::full(count)),
        SetSpec::Box(b) => one_box(b),
        SetSpec::Boxes(list) => list
            .iter()
            .try_fold(BoxSet::empty(count), |acc, b| Ok(acc.union(&one_box(b)?))),
        SetSpec::Cells(ids) => {
            if let Some(bad) = ids.iter().find(|&&c| c >= count) {
                return Err(format!("cell {bad} does not exist on a grid of {count} cells"));
            }
            Ok(BoxSet::from_ids(count, ids.clone()))
        }
        SetSpec::Shell { center, inner, outer } => {
            if center.len() != grid.dim() {
                return Err("shell centre has the wrong dimension".into());
            }
            let ids = (0..count)
                .filter(|&c| {
                    let mid = grid.cell_box(c).mid();
                    let r = mid.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    r > *inner && r < *outer
                })
                .collect();
            Ok(BoxSet::from_ids(count, ids))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[system]
domain = [[-1.0, 1.0]]

[[system.piece]]
guard = ["x1 <= 0"]
rhs = ["0"]

[[system.piece]]
guard = ["x1 >= 0"]
rhs = ["1 - x1"]

[[system.override]]
region = [[0.0, 0.0]]
value = ["[0, 1]"]

[grid]
subdivisions = [128]
tau = 0.25

[sets]
U = { box = [[0.7, 1.0]] }
"#;

    #[test]
    fn switching_example_parses_and_hulls_the_switch() {
        let cfg = SystemConfig::parse(EXAMPLE).unwrap();
        let b = IntervalVector::from_bounds(&[-0.1], &[0.1]).unwrap();
        let h = cfg.inclusion.evaluate_hull(&b, &Default::default()).unwrap();
        assert!(Interval::new(0.0, 1.0).unwrap().subset_of(h[0]));
        assert_eq!(cfg.set("U").unwrap().len(), 20);
        assert_eq!(cfg.run.samples, vec![0.0]);
    }

    #[test]
    fn round_trip() {
        let cfg = SystemConfig::parse(EXAMPLE).unwrap();
        let text = cfg.to_toml();
        assert_eq!(SystemConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn gap_in_coverage_is_rejected() {
        let text = r#"
[system]
domain = [[0.0, 1.0]]
[[system.piece]]
guard = ["x1 <= 0.5"]
rhs = ["1"]
[grid]
subdivisions = [8]
"#;
        match SystemConfig::parse(text) {
            Err(ConfigError::Validation(m)) => assert!(m.contains("covers"), "{m}"),
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn expression_errors_carry_file_positions() {
        let text = "[system]\ndomain = [[0.0, 1.0]]\n[[system.piece]]\nrhs = [\"1 + * x1\"]\n[grid]\nsubdivisions = [4]\n";
        match SystemConfig::parse(text) {
            Err(ConfigError::Parse { line, column, .. }) => assert_eq!((line, column), (4, 13)),
            other => panic!("{other:?}"),
        }
        let text = "[system]\ndomain = [[0.0, 1.0]]\n[[system.piece]]\nguard = [\"x1 <= y\"]\nrhs = [\"1\"]\n[grid]\nsubdivisions = [4]\n";
        match SystemConfig::parse(text) {
            Err(ConfigError::Parse { line, column, .. }) => assert_eq!((line, column), (4, 17)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toml_syntax_errors_carry_positions() {
        match SystemConfig::parse("[system]\ndomain = [[0.0, 1.0]\n") {
            Err(ConfigError::Parse { line, .. }) => assert!(line >= 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sets_outside_the_domain_are_rejected() {
        let text = EXAMPLE.replace("[[0.7, 1.0]]", "[[0.7, 1.5]]");
        assert!(matches!(SystemConfig::parse(&text), Err(ConfigError::Validation(_))));
    }

    #[test]
    fn lambda_family_evaluation() {
        let text = r#"
[system]
domain = [[-1.0, 1.0]]
lambda_range = [0.0, 1.0]
[[system.piece]]
rhs = ["x1^2 + lambda"]
[grid]
subdivisions = [128]
[run]
samples = [0.0, 0.25, 0.5, 0.75, 1.0]
"#;
        let cfg = SystemConfig::parse(text).unwrap();
        let p = multiflow_core::Params::at(1.0).unwrap();
        let v = cfg.inclusion.evaluate_hull(&IntervalVector::point(&[0.0]), &p).unwrap();
        assert_eq!(v[0], Interval::ONE);
        assert_eq!(SystemConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert!(SystemConfig::parse(&text.replace("0.75, 1.0", "0.75, 1.5")).is_err());
    }
}
