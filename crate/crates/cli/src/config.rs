//! Run configuration: strict JSON, every section optional.

use std::f64::consts::PI;
use std::path::PathBuf;

use polaron_core::fock::{AlphaConvention, CutoffConvention, FockBudget, LanczosOptions};
use polaron_core::hessian::{HessianOptions, ZeroModeOptions};
use polaron_core::pekar::{BallOptions, FieldCoupling, FreeOptions};
use polaron_core::radial::GridKind;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_OUTPUT_DIR: &str = "polaron-lab-output";
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    PekarFree,
    PekarBall,
    HessianBall,
    HessianFree,
    FockConfined,
    Fiber,
    Dispersion,
    Bounds,
    Report,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::PekarFree,
        Task::PekarBall,
        Task::HessianBall,
        Task::HessianFree,
        Task::FockConfined,
        Task::Fiber,
        Task::Dispersion,
        Task::Bounds,
        Task::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::PekarFree => "pekar-free",
            Task::PekarBall => "pekar-ball",
            Task::HessianBall => "hessian-ball",
            Task::HessianFree => "hessian-free",
            Task::FockConfined => "fock-confined",
            Task::Fiber => "fiber",
            Task::Dispersion => "dispersion",
            Task::Bounds => "bounds",
            Task::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| CliError::config("task", format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ConfinedKind {
    #[default]
    Ball,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: i64,
    pub r_max: f64,
    pub kind: GridKind,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: polaron_core::pekar::DEFAULT_POINTS as i64,
            r_max: polaron_core::pekar::DEFAULT_R_MAX,
            kind: GridKind::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallConfig {
    pub radius: f64,
    pub l_max: i64,
    /// Field modes per angular sector.
    pub n_radial: i64,
    /// Electron modes per angular sector.
    pub n_electron: i64,
    /// Energy cutoff of the `pekar-ball` basis; overrides the mode counts.
    pub e_max: Option<f64>,
    pub coupling: FieldCoupling,
    /// Number of simultaneous doublings of the three truncations.
    pub doublings: i64,
    /// Radii of the `hessian-free` sequence.
    pub radii: Vec<f64>,
}

impl Default for BallConfig {
    fn default() -> Self {
        let h = HessianOptions::default();
        Self {
            radius: 1.0,
            l_max: h.l_max as i64,
            n_radial: h.n_radial as i64,
            n_electron: h.n_electron as i64,
            e_max: None,
            coupling: h.coupling,
            doublings: 0,
            radii: vec![6.0, 8.0, 10.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub max_dimension: i64,
    pub max_nonzeros: i64,
    pub max_modes: i64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        let b = FockBudget::default();
        Self {
            max_dimension: b.max_dimension as i64,
            max_nonzeros: b.max_nonzeros as i64,
            max_modes: b.max_modes as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    pub alpha: f64,
    pub max_phonons: i64,
    #[serde(rename = "K_cut")]
    pub k_cut: f64,
    pub eps: f64,
    pub cutoff_convention: CutoffConvention,
    /// Units of the reported energies.
    pub units: AlphaConvention,
    #[serde(rename = "P_values")]
    pub p_values: Vec<f64>,
    pub budget: BudgetConfig,
    /// Confined geometry for `fock-confined`.
    pub model: ConfinedKind,
    /// Phonon cutoff of the confined models, in the cutoff convention.
    pub lambda: f64,
    pub length: f64,
    pub n_electron: i64,
    /// Couplings tabulated by `report`.
    pub alpha_values: Vec<f64>,
}

impl Default for FockConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            max_phonons: 3,
            k_cut: 2.0,
            eps: 1.0,
            cutoff_convention: CutoffConvention::Momentum,
            units: AlphaConvention::OriginalUnits,
            p_values: vec![0.0, 0.1, 0.2, -0.1],
            budget: BudgetConfig::default(),
            model: ConfinedKind::Ball,
            lambda: 3.0 * PI + 0.1,
            length: 1.0,
            n_electron: 3,
            alpha_values: vec![0.1, 0.5, 1.0, 2.0],
        }
    }
}

/// Absent entries keep each solver's own default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub solver: Option<f64>,
    pub eigen: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<String>,
    pub grid: GridConfig,
    pub ball: BallConfig,
    pub fock: FockConfig,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Strict parse followed by semantic validation.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::ConfigSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive_count(key: &'static str, v: i64) -> Result<usize, CliError> {
    if v <= 0 {
        return Err(CliError::config(key, format!("must be a positive integer, got {v}")));
    }
    Ok(v as usize)
}

fn nonnegative_count(key: &'static str, v: i64) -> Result<usize, CliError> {
    if v < 0 {
        return Err(CliError::config(key, format!("must be nonnegative, got {v}")));
    }
    Ok(v as usize)
}

fn positive(key: &'static str, v: f64) -> Result<f64, CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(key, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

fn finite(key: &'static str, v: f64) -> Result<f64, CliError> {
    if !v.is_finite() {
        return Err(CliError::config(key, format!("must be finite, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = &self.task {
            Task::parse(t)?;
        }
        positive_count("grid.n", self.grid.n)?;
        positive("grid.r_max", self.grid.r_max)?;
        positive("ball.radius", self.ball.radius)?;
        nonnegative_count("ball.l_max", self.ball.l_max)?;
        positive_count("ball.n_radial", self.ball.n_radial)?;
        positive_count("ball.n_electron", self.ball.n_electron)?;
        nonnegative_count("ball.doublings", self.ball.doublings)?;
        if let Some(e) = self.ball.e_max {
            positive("ball.e_max", e)?;
        }
        for &r in &self.ball.radii {
            positive("ball.radii", r)?;
        }
        let f = &self.fock;
        if !(f.alpha >= 0.0 && f.alpha.is_finite()) {
            return Err(CliError::config("fock.alpha", format!("must be nonnegative and finite, got {}", f.alpha)));
        }
        nonnegative_count("fock.max_phonons", f.max_phonons)?;
        positive("fock.K_cut", f.k_cut)?;
        positive("fock.eps", f.eps)?;
        positive("fock.lambda", f.lambda)?;
        positive("fock.length", f.length)?;
        positive_count("fock.n_electron", f.n_electron)?;
        for &p in &f.p_values {
            finite("fock.P_values", p)?;
        }
        for &a in &f.alpha_values {
            positive("fock.alpha_values", a)?;
        }
        positive_count("fock.budget.max_dimension", f.budget.max_dimension)?;
        positive_count("fock.budget.max_nonzeros", f.budget.max_nonzeros)?;
        positive_count("fock.budget.max_modes", f.budget.max_modes)?;
        if let Some(t) = self.tolerances.solver {
            positive("tolerances.solver", t)?;
        }
        if let Some(t) = self.tolerances.eigen {
            positive("tolerances.eigen", t)?;
        }
        Ok(())
    }

    /// The task named on the command line, checked against the config.
    pub fn resolve_task(&self, cli: Option<&str>) -> Result<Task, CliError> {
        let from_cfg = self.task.as_deref().map(Task::parse).transpose()?;
        match (cli.map(Task::parse).transpose()?, from_cfg) {
            (Some(a), Some(b)) if a != b => Err(CliError::config(
                "task",
                format!("command line asks for `{}` but the config names `{}`", a.name(), b.name()),
            )),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(CliError::config("task", "no task given")),
        }
    }

    pub fn budget(&self) -> FockBudget {
        let b = &self.fock.budget;
        FockBudget {
            max_dimension: b.max_dimension as u128,
            max_nonzeros: b.max_nonzeros as u128,
            max_modes: b.max_modes as usize,
        }
    }

    pub fn free_options(&self) -> FreeOptions {
        let mut o = FreeOptions::default();
        if let Some(t) = self.tolerances.solver {
            o.tol = t;
        }
        o
    }

    pub fn ball_options(&self) -> BallOptions {
        let mut o = BallOptions {
            coupling: self.ball.coupling,
            ..BallOptions::default()
        };
        if self.ball.e_max.is_none() {
            o.n_electron = Some(self.ball.n_electron as usize);
            o.n_field = Some(self.ball.n_radial as usize);
        }
        if let Some(t) = self.tolerances.solver {
            o.tol = t;
        }
        o
    }

    pub fn hessian_options(&self) -> HessianOptions {
        let mut o = HessianOptions {
            l_max: self.ball.l_max as usize,
            n_radial: self.ball.n_radial as usize,
            n_electron: self.ball.n_electron as usize,
            coupling: self.ball.coupling,
            ..HessianOptions::default()
        };
        if let Some(t) = self.tolerances.solver {
            o.pekar_tol = t;
        }
        o
    }

    pub fn zero_mode_options(&self) -> ZeroModeOptions {
        let mut o = ZeroModeOptions::default();
        if let Some(t) = self.tolerances.solver {
            o.pekar_tol = t;
        }
        o
    }

    pub fn lanczos_options(&self, seed: u64) -> LanczosOptions {
        let mut o = LanczosOptions {
            seed,
            ..LanczosOptions::default()
        };
        if let Some(t) = self.tolerances.eigen {
            o.tol = t;
        }
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(r#"{"task":"pekar-free"}"#).unwrap();
        assert_eq!(c.grid.n, 3000);
        assert_eq!(c.grid.r_max, 30.0);
        assert_eq!(c.resolve_task(None).unwrap(), Task::PekarFree);
    }

    #[test]
    fn unknown_task_is_semantic() {
        let e = parse_config(r#"{"task":"warp"}"#).unwrap_err();
        assert_eq!(e.category(), "config");
        assert!(e.to_string().contains("unknown task"));
    }

    #[test]
    fn unknown_keys_are_rejected_at_every_level() {
        for text in [r#"{"tsk":"bounds"}"#, r#"{"fock":{"kcut":2}}"#, r#"{"fock":{"budget":{"dim":5}}}"#] {
            let e = parse_config(text).unwrap_err();
            assert_eq!(e.category(), "config-syntax", "{text}");
            assert!(e.to_string().contains("unknown field"), "{e}");
        }
    }

    #[test]
    fn negative_budget_names_the_key() {
        let e = parse_config(r#"{"fock":{"budget":{"max_dimension":-5}}}"#).unwrap_err();
        assert_eq!(e.category(), "config");
        assert!(e.to_string().contains("fock.budget.max_dimension"), "{e}");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_config("{\n  \"task\": \"bounds\",\n  \"seed\": ,\n}").unwrap_err();
        match e {
            CliError::ConfigSyntax { line, column, .. } => assert_eq!((line, column), (3, 11)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conflicting_task_rejected() {
        let c = parse_config(r#"{"task":"bounds"}"#).unwrap();
        assert!(c.resolve_task(Some("fiber")).is_err());
        assert_eq!(c.resolve_task(Some("bounds")).unwrap(), Task::Bounds);
    }

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            assert_eq!(Task::parse(t.name()).unwrap(), t);
            assert_eq!(serde_json::to_value(t).unwrap(), t.name());
        }
    }
}
