//! Exact-match evaluation over a case corpus.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use spat_core::cleanse::{REPAIR_FLAT_RING, REPAIR_OVERTHINKING, REPAIR_UNLABELED};
use spat_core::validate::{compare_to_golden, Verdict};
use spat_core::{Diagnostic, IntersectionConfig, PlanIR};
use spat_gateway::{turn, ChatSession, CompletionConfig, Language, PromptAssets, Transport};

use crate::dataset::{BenchCase, DatasetError};
use crate::pipeline::{assemble, StageError};

/// Where each run's plan comes from.
#[derive(Clone, Copy)]
pub enum Source<'a> {
    /// Each turn goes through the gateway.
    Chat {
        transport: &'a dyn Transport,
        completion: &'a CompletionConfig,
        assets: &'a PromptAssets,
    },
    /// The case's `ir.json`, no model involved.
    RecordedIr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorCategory {
    /// Output shape problems: unparsable replies, unlabeled or un-nested structures.
    Formatting,
    /// Redundant attributes next to start and end times.
    Overthinking,
    /// A well-formed plan that does not match the expectation.
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseRun {
    pub run: u32,
    pub correct: bool,
    /// `match`, `mismatch`, `flagged`, `missed`, `no-plan`, `pipeline-error` or `transport-error`.
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    /// Malformations repaired during cleansing.
    pub repairs: Vec<ErrorCategory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<ErrorCategory>,
    pub diff_count: usize,
    pub codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CaseReport {
    pub id: String,
    pub language: Language,
    pub expected_verdict: Verdict,
    pub runs: Vec<CaseRun>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AccuracyStats {
    pub cases: usize,
    pub accuracy_per_run: Vec<f64>,
    pub mean_accuracy: f64,
    /// Share of cases correct in at least one run.
    pub any_run_accuracy: f64,
    /// Share of cases correct in every run.
    pub every_run_accuracy: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Taxonomy {
    pub formatting: usize,
    pub overthinking: usize,
    pub semantic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchReport {
    pub runs: u32,
    pub overall: AccuracyStats,
    pub by_language: BTreeMap<Language, AccuracyStats>,
    /// Runs touched by each error category, repaired or not.
    pub taxonomy: Taxonomy,
    pub cases: Vec<CaseReport>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn repairs_in(diags: &[Diagnostic]) -> Vec<ErrorCategory> {
    let mut set = BTreeSet::new();
    for d in diags {
        match d.code.as_str() {
            REPAIR_UNLABELED | REPAIR_FLAT_RING | "wrapped-bare-results" => {
                set.insert(ErrorCategory::Formatting);
            }
            REPAIR_OVERTHINKING => {
                set.insert(ErrorCategory::Overthinking);
            }
            _ => {}
        }
    }
    set.into_iter().collect()
}

fn failed(run: u32, outcome: &str, failure: ErrorCategory, codes: Vec<String>) -> CaseRun {
    CaseRun {
        run,
        correct: false,
        outcome: outcome.into(),
        verdict: None,
        repairs: Vec::new(),
        failure: Some(failure),
        diff_count: 0,
        codes,
    }
}

/// Scores one plan against the case expectation.
pub fn score(
    case: &BenchCase,
    ir: &PlanIR,
    run: u32,
    cfg: &IntersectionConfig,
    mut early: Vec<Diagnostic>,
) -> CaseRun {
    let assembly = match assemble(ir, cfg) {
        Ok(a) => a,
        Err(e) => {
            let category = match e.source {
                StageError::Cleanse(spat_core::cleanse::CleanseError::StructureUnrepairable {
                    ..
                }) => ErrorCategory::Formatting,
                _ => ErrorCategory::Semantic,
            };
            early.extend(e.all_diagnostics());
            let mut r = failed(run, "pipeline-error", category, vec![e.code().to_owned()]);
            r.repairs = repairs_in(&early);
            return r;
        }
    };
    early.extend(assembly.warnings.iter().cloned());
    let repairs = repairs_in(&early);
    let verdict = assembly.report.verdict;
    let (correct, outcome, diff_count, codes) = match (&case.golden, case.meta.verdict) {
        (_, Verdict::Invalid) => {
            let found: BTreeSet<&str> = assembly
                .report
                .errors
                .iter()
                .map(|f| f.code.as_str())
                .collect();
            let ok = verdict == Verdict::Invalid
                && case
                    .meta
                    .expected_errors
                    .iter()
                    .all(|c| found.contains(c.as_str()));
            let codes = found.into_iter().map(str::to_owned).collect();
            (ok, if ok { "flagged" } else { "missed" }, 0, codes)
        }
        (Some(golden), Verdict::Valid) => {
            let m = compare_to_golden(&assembly.table, golden);
            let diffs = m.diffs.len() + m.missing_rows.len() + m.extra_rows.len();
            let codes = m.code.into_iter().collect();
            (
                m.correct,
                if m.correct { "match" } else { "mismatch" },
                diffs,
                codes,
            )
        }
        (None, Verdict::Valid) => (false, "mismatch", 0, vec!["no-golden".to_owned()]),
    };
    CaseRun {
        run,
        correct,
        outcome: outcome.into(),
        verdict: Some(verdict),
        repairs,
        failure: (!correct).then_some(ErrorCategory::Semantic),
        diff_count,
        codes,
    }
}

/// One end-to-end run of a case: every turn in a fresh session, then the
/// final plan is assembled and scored.
pub fn run_case(
    case: &BenchCase,
    run: u32,
    cfg: &IntersectionConfig,
    source: Source<'_>,
) -> CaseRun {
    match source {
        Source::RecordedIr => match &case.recorded_ir {
            Some(ir) => score(case, ir, run, cfg, Vec::new()),
            None => failed(
                run,
                "no-plan",
                ErrorCategory::Formatting,
                vec!["no-recorded-ir".into()],
            ),
        },
        Source::Chat {
            transport,
            completion,
            assets,
        } => {
            let mut session =
                ChatSession::with_id(format!("{}#{run}", case.id), case.meta.language);
            let mut warnings = Vec::new();
            for text in case.turns() {
                match turn(&mut session, assets, text, completion, transport) {
                    Ok(outcome) => warnings.extend(outcome.warnings),
                    Err(e) => {
                        return failed(
                            run,
                            "transport-error",
                            ErrorCategory::Formatting,
                            vec![e.code().into()],
                        )
                    }
                }
            }
            let last_parsed = session
                .turns
                .last()
                .is_some_and(|t| spat_core::plan_ir::parse_llm_output(&t.text).is_ok());
            match (&session.latest_ir, last_parsed) {
                (Some(ir), true) => score(case, ir, run, cfg, warnings),
                _ => failed(
                    run,
                    "no-plan",
                    ErrorCategory::Formatting,
                    vec!["no-json-found".into()],
                ),
            }
        }
    }
}

fn stats(cases: &[&CaseReport], runs: u32) -> AccuracyStats {
    let n = cases.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let accuracy_per_run: Vec<f64> = (0..runs as usize)
        .map(|r| frac(cases.iter().filter(|c| c.runs[r].correct).count()))
        .collect();
    let mean_accuracy = if runs == 0 {
        0.0
    } else {
        accuracy_per_run.iter().sum::<f64>() / f64::from(runs)
    };
    AccuracyStats {
        cases: n,
        mean_accuracy,
        any_run_accuracy: frac(
            cases
                .iter()
                .filter(|c| c.runs.iter().any(|r| r.correct))
                .count(),
        ),
        every_run_accuracy: frac(
            cases
                .iter()
                .filter(|c| !c.runs.is_empty() && c.runs.iter().all(|r| r.correct))
                .count(),
        ),
        accuracy_per_run,
    }
}

/// Runs every case `runs` times. Cases run in parallel on up to `workers`
/// threads; the runs of one case are sequential.
pub fn run_bench(
    cases: &[BenchCase],
    runs: u32,
    cfg: &IntersectionConfig,
    source: Source<'_>,
    workers: usize,
) -> Result<BenchReport, DatasetError> {
    if cases.is_empty() {
        return Err(DatasetError::Empty("(no cases)".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| DatasetError::Invalid {
            case: String::new(),
            message: e.to_string(),
        })?;
    let reports: Vec<CaseReport> = pool.install(|| {
        cases
            .par_iter()
            .map(|case| CaseReport {
                id: case.id.clone(),
                language: case.meta.language,
                expected_verdict: case.meta.verdict,
                runs: (1..=runs).map(|r| run_case(case, r, cfg, source)).collect(),
            })
            .collect()
    });

    let all: Vec<&CaseReport> = reports.iter().collect();
    let mut by_language = BTreeMap::new();
    for lang in Language::ALL {
        let subset: Vec<&CaseReport> = reports.iter().filter(|c| c.language == lang).collect();
        if !subset.is_empty() {
            by_language.insert(lang, stats(&subset, runs));
        }
    }
    let mut taxonomy = Taxonomy::default();
    for run in reports.iter().flat_map(|c| &c.runs) {
        let mut cats: BTreeSet<ErrorCategory> = run.repairs.iter().copied().collect();
        cats.extend(run.failure);
        for c in cats {
            match c {
                ErrorCategory::Formatting => taxonomy.formatting += 1,
                ErrorCategory::Overthinking => taxonomy.overthinking += 1,
                ErrorCategory::Semantic => taxonomy.semantic += 1,
            }
        }
    }
    Ok(BenchReport {
        runs,
        overall: stats(&all, runs),
        by_language,
        taxonomy,
        cases: reports,
    })
}
