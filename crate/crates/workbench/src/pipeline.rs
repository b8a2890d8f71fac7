use serde::Serialize;
use spat_core::cleanse::{cleanse, CleanseError};
use spat_core::emit::render_colors;
use spat_core::overlay::{overlay, OverlayError};
use spat_core::plan_ir::lint_ir;
use spat_core::timing::{place, TimingError};
use spat_core::validate::{validate, ValidationReport};
use spat_core::{ColorTable, Diagnostic, IntersectionConfig, PlanIR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Lint,
    Cleanse,
    Timing,
    Overlay,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StageError {
    #[error("{}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    Lint(Vec<Diagnostic>),
    #[error(transparent)]
    Cleanse(#[from] CleanseError),
    #[error(transparent)]
    Timing(#[from] TimingError),
    #[error(transparent)]
    Overlay(#[from] OverlayError),
}

/// A pipeline failure and the stage it happened in.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage:?} failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: StageError,
    /// Diagnostics gathered before the failure.
    pub diagnostics: Vec<Diagnostic>,
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match &self.source {
            StageError::Lint(_) => "lint-error",
            StageError::Cleanse(e) => e.code(),
            StageError::Timing(e) => e.code(),
            StageError::Overlay(e) => e.code(),
        }
    }

    /// Every diagnostic, ending with the failure itself.
    pub fn all_diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = self.diagnostics.clone();
        match &self.source {
            StageError::Lint(errors) => out.extend(errors.iter().cloned()),
            other => out.push(Diagnostic::error(
                self.code(),
                stage_name(self.stage),
                other.to_string(),
            )),
        }
        out
    }
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Lint => "lint",
        Stage::Cleanse => "cleanse",
        Stage::Timing => "timing",
        Stage::Overlay => "overlay",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub table: ColorTable,
    pub report: ValidationReport,
    /// Lint warnings, repair notes and placement notes, in pipeline order.
    pub warnings: Vec<Diagnostic>,
    pub cleansed: PlanIR,
}

/// lint, cleanse, timing, overlay, emit, validate.
pub fn assemble(ir: &PlanIR, cfg: &IntersectionConfig) -> Result<Assembly, PipelineError> {
    let mut warnings = Vec::new();
    let fail = |stage, source: StageError, diagnostics: &Vec<Diagnostic>| PipelineError {
        stage,
        source,
        diagnostics: diagnostics.clone(),
    };

    let (errors, lint_warnings): (Vec<Diagnostic>, Vec<Diagnostic>) =
        lint_ir(ir).into_iter().partition(|d| d.is_error());
    warnings.extend(lint_warnings);
    if !errors.is_empty() {
        return Err(fail(Stage::Lint, StageError::Lint(errors), &warnings));
    }

    let (cleansed, notes) =
        cleanse(ir, cfg).map_err(|e| fail(Stage::Cleanse, e.into(), &warnings))?;
    warnings.extend(notes);

    let placement = place(&cleansed, cfg).map_err(|e| fail(Stage::Timing, e.into(), &warnings))?;
    warnings.extend(placement.warnings.iter().cloned());

    let (merged, overlay_notes) = overlay(
        &placement.phases,
        &placement.overlapped,
        placement.cycle,
        cfg,
    )
    .map_err(|e| fail(Stage::Overlay, e.into(), &warnings))?;
    warnings.extend(overlay_notes);

    let (table, render_notes) = render_colors(&merged, placement.cycle);
    warnings.extend(render_notes);

    let report = validate(&table, cfg);
    Ok(Assembly {
        table,
        report,
        warnings,
        cleansed,
    })
}
