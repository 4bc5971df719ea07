//! Problem representation and the two reformulations of semi-continuity.
//!
//! A [`Problem`] lives in one of two stages. In [`Stage::SemiContinuous`] the
//! governed variables carry a [`SemiContinuousSpec`] whose domain is
//! `{0} ∪ [min_lot, upper]` and whose cost is `unit_cost·y + setup_cost·[y > 0]`.
//! [`Problem::reformulate_indicator`] turns that into [`Stage::Indicator`]:
//! a binary `z` per spec, the linear row `min_lot·z − y ≤ 0`, bounds
//! `y ∈ [0, upper]` and the side constraint `z = 0 ⇒ y ≤ 0` stored as an
//! [`IndicatorLink`] rather than a row. [`Problem::reformulate_big_m`]
//! instead produces a plain MIP with `y ≤ M·z`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Deref, DerefMut};

use crate::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_discrete(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub obj: f64,
}

impl Variable {
    pub fn new(name: impl Into<String>, kind: VarKind, lower: f64, upper: f64, obj: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            lower,
            upper,
            obj,
        }
    }

    pub fn continuous(name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> Self {
        Self::new(name, VarKind::Continuous, lower, upper, obj)
    }

    pub fn integer(name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> Self {
        Self::new(name, VarKind::Integer, lower, upper, obj)
    }

    pub fn binary(name: impl Into<String>, obj: f64) -> Self {
        Self::new(name, VarKind::Binary, 0.0, 1.0, obj)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }

    /// Amount by which `activity` violates `activity <sense> rhs` (0 if satisfied).
    pub fn violation(self, activity: f64, rhs: f64) -> f64 {
        match self {
            Sense::Le => (activity - rhs).max(0.0),
            Sense::Ge => (rhs - activity).max(0.0),
            Sense::Eq => (activity - rhs).abs(),
        }
    }

    /// Activity range `[lo, hi]` admitted by the row.
    pub fn range(self, rhs: f64) -> (f64, f64) {
        match self {
            Sense::Le => (f64::NEG_INFINITY, rhs),
            Sense::Ge => (rhs, f64::INFINITY),
            Sense::Eq => (rhs, rhs),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self {
            name: name.into(),
            coeffs,
            sense,
            rhs,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }

    pub fn violation(&self, values: &[f64]) -> f64 {
        self.sense.violation(self.activity(values), self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiContinuousSpec {
    pub var: usize,
    pub min_lot: f64,
    pub upper: f64,
    pub unit_cost: f64,
    pub setup_cost: f64,
}

impl SemiContinuousSpec {
    /// Distance of `y` to the domain `{0} ∪ [min_lot, upper]`.
    pub fn domain_violation(&self, y: f64) -> f64 {
        let to_zero = y.abs();
        let to_range = if y < self.min_lot {
            self.min_lot - y
        } else if y > self.upper {
            y - self.upper
        } else {
            0.0
        };
        to_zero.min(to_range)
    }
}

/// What an indicator binary controls.
#[derive(Debug, Clone, PartialEq)]
pub enum Implication {
    /// `z = 0 ⇒ y ≤ 0`, paired with the row `min_lot·z ≤ y`.
    SemiContinuous { var: usize, min_lot: f64 },
    /// `z = active ⇒ row`. No semi-continuity structure is assumed.
    Generic { active: bool, row: LinearRow },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorLink {
    pub binary: usize,
    pub implication: Implication,
}

impl IndicatorLink {
    pub fn semi_continuous(binary: usize, var: usize, min_lot: f64) -> Self {
        Self {
            binary,
            implication: Implication::SemiContinuous { var, min_lot },
        }
    }

    pub fn generic(binary: usize, active: bool, row: LinearRow) -> Self {
        Self {
            binary,
            implication: Implication::Generic { active, row },
        }
    }

    /// Governed variable and minimum lot for semi-continuity links.
    pub fn semi_continuous_parts(&self) -> Option<(usize, f64)> {
        match self.implication {
            Implication::SemiContinuous { var, min_lot } => Some((var, min_lot)),
            Implication::Generic { .. } => None,
        }
    }

    /// Violation of the implication at `values`, given the binary is at its
    /// active value within `int_tol`.
    pub fn violation(&self, values: &[f64], int_tol: f64) -> f64 {
        let z = values[self.binary];
        match &self.implication {
            Implication::SemiContinuous { var, .. } => {
                if z <= int_tol {
                    values[*var].max(0.0)
                } else {
                    0.0
                }
            }
            Implication::Generic { active, row } => {
                let target = if *active { 1.0 } else { 0.0 };
                if (z - target).abs() <= int_tol {
                    row.violation(values)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Semi-continuous specs present, no indicator links.
    SemiContinuous,
    /// Indicator links (possibly none: a plain MIP).
    Indicator,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub feas: f64,
    pub int: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-6,
            int: 1e-6,
        }
    }
}

/// Dense assignment, one value per variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn zeros(n: usize) -> Self {
        Point(vec![0.0; n])
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    WrongStage { expected: Stage, found: Stage },
    BigMNotFinite { var: usize },
    BigMBelowUpper { var: usize, m: f64, upper: f64 },
    BigMCount { expected: usize, found: usize },
    Invalid(ValidationReport),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::WrongStage { expected, found } => {
                write!(f, "problem is in {found:?} form, expected {expected:?}")
            }
            ModelError::BigMNotFinite { var } => write!(f, "bigM requires finite M (variable {var})"),
            ModelError::BigMBelowUpper { var, m, upper } => {
                write!(f, "M = {m} is below the upper bound {upper} of variable {var}")
            }
            ModelError::BigMCount { expected, found } => {
                write!(f, "expected {expected} M values, got {found}")
            }
            ModelError::Invalid(report) => write!(f, "invalid problem: {report}"),
        }
    }
}

impl core::error::Error for ModelError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    BoundsCrossed { var: usize },
    NanBound { var: usize },
    BinaryBounds { var: usize },
    FractionalIntegerBound { var: usize },
    DanglingIndex { context: String, index: usize },
    DuplicateCoefficient { row: usize, var: usize },
    BadCoefficient { row: usize, var: usize },
    BadRhs { row: usize },
    MinLotNotPositive { spec: usize },
    MinLotAboveUpper { spec: usize },
    DuplicateSpec { var: usize },
    UnitCostMismatch { spec: usize },
    LinkNotBinary { link: usize },
    LinkMissingRow { link: usize },
    MixedStage,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::BoundsCrossed { var } => write!(f, "variable {var}: lower bound exceeds upper bound"),
            Issue::NanBound { var } => write!(f, "variable {var}: NaN bound"),
            Issue::BinaryBounds { var } => write!(f, "variable {var}: binary bounds must lie in {{0,1}}"),
            Issue::FractionalIntegerBound { var } => {
                write!(f, "variable {var}: integer variable with fractional bound")
            }
            Issue::DanglingIndex { context, index } => write!(f, "{context}: dangling index {index}"),
            Issue::DuplicateCoefficient { row, var } => {
                write!(f, "row {row}: duplicate coefficient for variable {var}")
            }
            Issue::BadCoefficient { row, var } => {
                write!(f, "row {row}: coefficient of variable {var} must be finite and nonzero")
            }
            Issue::BadRhs { row } => write!(f, "row {row}: right-hand side must be finite"),
            Issue::MinLotNotPositive { spec } => write!(f, "semi-continuous spec {spec}: min_lot must be positive"),
            Issue::MinLotAboveUpper { spec } => {
                write!(f, "semi-continuous spec {spec}: min_lot exceeds upper bound")
            }
            Issue::DuplicateSpec { var } => {
                write!(f, "variable {var}: more than one semi-continuous spec")
            }
            Issue::UnitCostMismatch { spec } => write!(
                f,
                "semi-continuous spec {spec}: unit_cost disagrees with the variable's objective coefficient"
            ),
            Issue::LinkNotBinary { link } => write!(f, "indicator link {link}: controlling variable is not binary"),
            Issue::LinkMissingRow { link } => {
                write!(f, "indicator link {link}: missing row min_lot*z - y <= 0")
            }
            Issue::MixedStage => write!(f, "problem mixes semi-continuous specs and indicator links"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.issues.iter().map(|i| i.to_string()).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Maximum violation per constraint class.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeasibilityReport {
    pub rows: f64,
    pub bounds: f64,
    pub integrality: f64,
    pub indicators: f64,
    tol: Tolerances,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.rows <= self.tol.feas
            && self.bounds <= self.tol.feas
            && self.integrality <= self.tol.int
            && self.indicators <= self.tol.feas
    }

    pub fn max_violation(&self) -> f64 {
        self.rows.max(self.bounds).max(self.integrality).max(self.indicators)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub name: String,
    pub variables: Vec<Variable>,
    pub rows: Vec<LinearRow>,
    pub links: Vec<IndicatorLink>,
    pub sc_specs: Vec<SemiContinuousSpec>,
    pub stage: Stage,
}

impl Problem {
    pub fn new(stage: Stage) -> Self {
        Self {
            name: String::new(),
            variables: Vec::new(),
            rows: Vec::new(),
            links: Vec::new(),
            sc_specs: Vec::new(),
            stage,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn add_var(&mut self, var: Variable) -> usize {
        self.variables.push(var);
        self.variables.len() - 1
    }

    pub fn add_row(&mut self, row: LinearRow) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    /// Number of semi-continuous variables (specs or semi-continuity links).
    pub fn num_semi_continuous(&self) -> usize {
        match self.stage {
            Stage::SemiContinuous => self.sc_specs.len(),
            Stage::Indicator => self
                .links
                .iter()
                .filter(|l| l.semi_continuous_parts().is_some())
                .count(),
        }
    }

    /// Round finite bounds of integer variables inward.
    pub fn normalize(&mut self) {
        for v in &mut self.variables {
            if v.kind.is_discrete() {
                if v.lower.is_finite() {
                    v.lower = num::ceil(v.lower - 1e-9) + 0.0;
                }
                if v.upper.is_finite() {
                    v.upper = num::floor(v.upper + 1e-9) + 0.0;
                }
            }
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.variables.len();
        let mut issues = Vec::new();

        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() {
                issues.push(Issue::NanBound { var: j });
                continue;
            }
            if v.lower > v.upper {
                issues.push(Issue::BoundsCrossed { var: j });
            }
            match v.kind {
                VarKind::Binary => {
                    let ok = |b: f64| b == 0.0 || b == 1.0;
                    if !ok(v.lower) || !ok(v.upper) {
                        issues.push(Issue::BinaryBounds { var: j });
                    }
                }
                VarKind::Integer => {
                    let frac = |b: f64| b.is_finite() && num::frac_dist(b) > 0.0;
                    if frac(v.lower) || frac(v.upper) {
                        issues.push(Issue::FractionalIntegerBound { var: j });
                    }
                }
                VarKind::Continuous => {}
            }
        }

        let check_row = |issues: &mut Vec<Issue>, r: usize, row: &LinearRow, ctx: &str| {
            let mut seen = Vec::with_capacity(row.coeffs.len());
            for &(j, a) in &row.coeffs {
                if j >= n {
                    issues.push(Issue::DanglingIndex {
                        context: format!("{ctx} {r}"),
                        index: j,
                    });
                    continue;
                }
                if seen.contains(&j) {
                    issues.push(Issue::DuplicateCoefficient { row: r, var: j });
                }
                seen.push(j);
                if !a.is_finite() || a == 0.0 {
                    issues.push(Issue::BadCoefficient { row: r, var: j });
                }
            }
            if !row.rhs.is_finite() {
                issues.push(Issue::BadRhs { row: r });
            }
        };

        for (r, row) in self.rows.iter().enumerate() {
            check_row(&mut issues, r, row, "row");
        }

        if !self.sc_specs.is_empty() && !self.links.is_empty() {
            issues.push(Issue::MixedStage);
        }

        let mut governed: Vec<usize> = Vec::new();
        for (k, spec) in self.sc_specs.iter().enumerate() {
            if spec.var >= n {
                issues.push(Issue::DanglingIndex {
                    context: format!("semi-continuous spec {k}"),
                    index: spec.var,
                });
                continue;
            }
            if !(spec.min_lot > 0.0) {
                issues.push(Issue::MinLotNotPositive { spec: k });
            } else if spec.min_lot > spec.upper {
                issues.push(Issue::MinLotAboveUpper { spec: k });
            }
            if governed.contains(&spec.var) {
                issues.push(Issue::DuplicateSpec { var: spec.var });
            }
            governed.push(spec.var);
            let obj = self.variables[spec.var].obj;
            if obj != 0.0 && obj != spec.unit_cost {
                issues.push(Issue::UnitCostMismatch { spec: k });
            }
        }

        for (k, link) in self.links.iter().enumerate() {
            if link.binary >= n {
                issues.push(Issue::DanglingIndex {
                    context: format!("indicator link {k}"),
                    index: link.binary,
                });
                continue;
            }
            if self.variables[link.binary].kind != VarKind::Binary {
                issues.push(Issue::LinkNotBinary { link: k });
            }
            match &link.implication {
                Implication::SemiContinuous { var, min_lot } => {
                    if *var >= n {
                        issues.push(Issue::DanglingIndex {
                            context: format!("indicator link {k}"),
                            index: *var,
                        });
                        continue;
                    }
                    if !(*min_lot > 0.0) {
                        issues.push(Issue::MinLotNotPositive { spec: k });
                    }
                    if governed.contains(var) {
                        issues.push(Issue::DuplicateSpec { var: *var });
                    }
                    governed.push(*var);
                    if !self.has_min_lot_row(link.binary, *var, *min_lot) {
                        issues.push(Issue::LinkMissingRow { link: k });
                    }
                }
                Implication::Generic { row, .. } => check_row(&mut issues, k, row, "indicator row"),
            }
        }

        ValidationReport { issues }
    }

    /// Whether a row equivalent to `min_lot·z − y ≤ 0` is present.
    fn has_min_lot_row(&self, z: usize, y: usize, min_lot: f64) -> bool {
        self.rows.iter().any(|row| min_lot_of_row(row, z, y).is_some_and(|s| (s - min_lot).abs() <= 1e-9 * s.max(1.0)))
    }

    fn require_stage(&self, expected: Stage) -> Result<(), ModelError> {
        if self.stage != expected {
            return Err(ModelError::WrongStage {
                expected,
                found: self.stage,
            });
        }
        Ok(())
    }

    fn require_valid(&self) -> Result<(), ModelError> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    /// Indicator reformulation of every semi-continuous spec.
    pub fn reformulate_indicator(&self) -> Result<Problem, ModelError> {
        self.require_stage(Stage::SemiContinuous)?;
        self.require_valid()?;
        let mut out = self.clone();
        out.sc_specs.clear();
        out.stage = Stage::Indicator;
        for spec in &self.sc_specs {
            let y = spec.var;
            let yname = self.variables[y].name.clone();
            let z = out.add_var(Variable::binary(format!("z_{yname}"), spec.setup_cost));
            {
                let yv = &mut out.variables[y];
                yv.lower = 0.0;
                yv.upper = spec.upper;
                yv.obj = spec.unit_cost;
            }
            out.add_row(LinearRow::new(
                format!("minlot_{yname}"),
                vec![(z, spec.min_lot), (y, -1.0)],
                Sense::Le,
                0.0,
            ));
            out.links.push(IndicatorLink::semi_continuous(z, y, spec.min_lot));
        }
        Ok(out)
    }

    /// Big-M reformulation with one `M` per spec (in spec order).
    pub fn reformulate_big_m(&self, big_m: &[f64]) -> Result<Problem, ModelError> {
        self.require_stage(Stage::SemiContinuous)?;
        self.require_valid()?;
        if big_m.len() != self.sc_specs.len() {
            return Err(ModelError::BigMCount {
                expected: self.sc_specs.len(),
                found: big_m.len(),
            });
        }
        for (spec, &m) in self.sc_specs.iter().zip(big_m) {
            if !m.is_finite() {
                return Err(ModelError::BigMNotFinite { var: spec.var });
            }
            if spec.upper.is_finite() && m < spec.upper {
                return Err(ModelError::BigMBelowUpper {
                    var: spec.var,
                    m,
                    upper: spec.upper,
                });
            }
        }
        let mut out = self.clone();
        out.sc_specs.clear();
        out.stage = Stage::Indicator;
        for (spec, &m) in self.sc_specs.iter().zip(big_m) {
            let y = spec.var;
            let yname = self.variables[y].name.clone();
            let z = out.add_var(Variable::binary(format!("z_{yname}"), spec.setup_cost));
            {
                let yv = &mut out.variables[y];
                yv.lower = 0.0;
                yv.upper = spec.upper.min(m);
                yv.obj = spec.unit_cost;
            }
            out.add_row(LinearRow::new(
                format!("bigm_{yname}"),
                vec![(y, 1.0), (z, -m)],
                Sense::Le,
                0.0,
            ));
            out.add_row(LinearRow::new(
                format!("minlot_{yname}"),
                vec![(z, spec.min_lot), (y, -1.0)],
                Sense::Le,
                0.0,
            ));
        }
        Ok(out)
    }

    /// Objective at `point`. In semi-continuous form the setup cost of every
    /// spec with a nonzero value is added; feasibility is not checked.
    pub fn objective_value(&self, point: &[f64]) -> f64 {
        let linear: f64 = self
            .variables
            .iter()
            .zip(point)
            .map(|(v, &x)| v.obj * x)
            .sum();
        match self.stage {
            Stage::Indicator => linear,
            Stage::SemiContinuous => {
                // The spec's unit cost replaces the governed variable's coefficient.
                let mut total = linear;
                for spec in &self.sc_specs {
                    let y = point[spec.var];
                    total += (spec.unit_cost - self.variables[spec.var].obj) * y;
                    if y != 0.0 {
                        total += spec.setup_cost;
                    }
                }
                total
            }
        }
    }

    pub fn check_feasible(&self, point: &[f64], tol: Tolerances) -> FeasibilityReport {
        let mut rep = FeasibilityReport {
            tol,
            ..Default::default()
        };
        for row in &self.rows {
            rep.rows = rep.rows.max(row.violation(point));
        }
        for (v, &x) in self.variables.iter().zip(point) {
            let b = (v.lower - x).max(x - v.upper).max(0.0);
            rep.bounds = rep.bounds.max(b);
            if v.kind.is_discrete() {
                rep.integrality = rep.integrality.max(num::frac_dist(x));
            }
        }
        for link in &self.links {
            rep.indicators = rep.indicators.max(link.violation(point, tol.int));
        }
        for spec in &self.sc_specs {
            rep.indicators = rep.indicators.max(spec.domain_violation(point[spec.var]));
        }
        rep
    }

    /// Variables that take part in some indicator link (as binary or governed).
    pub fn link_index(&self) -> LinkIndex {
        LinkIndex::new(self)
    }
}

/// If `row` is equivalent to `s·z − y ≤ 0` (or `y − s·z ≥ 0`) with `s > 0`,
/// returns `s`.
pub fn min_lot_of_row(row: &LinearRow, z: usize, y: usize) -> Option<f64> {
    if row.coeffs.len() != 2 || row.rhs != 0.0 || row.sense == Sense::Eq {
        return None;
    }
    let coef = |j: usize| row.coeffs.iter().find(|c| c.0 == j).map(|c| c.1);
    let (a_z, a_y) = (coef(z)?, coef(y)?);
    // Normalize to the `≤` orientation.
    let (a_z, a_y) = match row.sense {
        Sense::Le => (a_z, a_y),
        Sense::Ge => (-a_z, -a_y),
        Sense::Eq => unreachable!(),
    };
    if a_y >= 0.0 || a_z <= 0.0 {
        return None;
    }
    Some(a_z / -a_y)
}

/// Lookup from a variable to the links it takes part in.
#[derive(Debug, Clone, Default)]
pub struct LinkIndex {
    by_var: Vec<Vec<usize>>,
}

impl LinkIndex {
    fn new(problem: &Problem) -> Self {
        let mut by_var = vec![Vec::new(); problem.num_vars()];
        for (k, link) in problem.links.iter().enumerate() {
            by_var[link.binary].push(k);
            match &link.implication {
                Implication::SemiContinuous { var, .. } => by_var[*var].push(k),
                Implication::Generic { row, .. } => {
                    for &(j, _) in &row.coeffs {
                        if !by_var[j].contains(&k) {
                            by_var[j].push(k);
                        }
                    }
                }
            }
        }
        Self { by_var }
    }

    pub fn links_of(&self, var: usize) -> &[usize] {
        self.by_var.get(var).map(|v| v.as_slice()).unwrap_or(&[])
    }
}
