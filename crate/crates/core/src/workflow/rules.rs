//! Rule engine turning diagnostic readings into architecture changes.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::DiagnosticsReport;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKey {
    Tsi,
    Qgn,
    Bpi,
    Edqfs,
    Qos,
    Eee,
    Qmi,
}

impl MetricKey {
    pub fn read(&self, report: &DiagnosticsReport) -> Real {
        match self {
            MetricKey::Tsi => report.tsi,
            MetricKey::Qgn => report.qgn,
            MetricKey::Bpi => report.bpi,
            MetricKey::Edqfs => report.edqfs,
            MetricKey::Qos => report.qos,
            MetricKey::Eee => report.eee,
            MetricKey::Qmi => report.qmi,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Comparator {
    fn holds(&self, value: Real, threshold: Real) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Gt => value > threshold,
            Comparator::Ge => value >= threshold,
        }
    }
}

/// One architecture modification. Deduplication by kind keeps change sets
/// free of contradictions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Change {
    SetEntanglingReps { reps: usize },
    EnableAdapter { l2: Real },
    SetHeadWidth { width: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ChangeKind {
    EntanglingReps,
    Adapter,
    HeadWidth,
}

impl Change {
    pub fn kind(&self) -> ChangeKind {
        match self {
            Change::SetEntanglingReps { .. } => ChangeKind::EntanglingReps,
            Change::EnableAdapter { .. } => ChangeKind::Adapter,
            Change::SetHeadWidth { .. } => ChangeKind::HeadWidth,
        }
    }
}

/// A diagnostic condition and the single change it triggers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementRule {
    pub metric: MetricKey,
    pub comparator: Comparator,
    pub threshold: Real,
    pub change: Change,
}

/// The default rule table. Thresholds sit between the two operating points
/// the diagnostics move across when the architecture deepens, so a shallow
/// low-entanglement model fires all three rules.
pub fn default_rules(cfg: &RunConfig) -> Vec<RefinementRule> {
    vec![
        RefinementRule {
            metric: MetricKey::Eee,
            comparator: Comparator::Lt,
            threshold: cfg.rule_eee_threshold,
            change: Change::SetEntanglingReps {
                reps: cfg.rule_reps,
            },
        },
        RefinementRule {
            metric: MetricKey::Edqfs,
            comparator: Comparator::Gt,
            threshold: cfg.rule_edqfs_threshold,
            change: Change::EnableAdapter {
                l2: cfg.rule_adapter_l2,
            },
        },
        RefinementRule {
            metric: MetricKey::Qos,
            comparator: Comparator::Lt,
            threshold: cfg.rule_qos_threshold,
            change: Change::SetHeadWidth {
                width: cfg.rule_head_width,
            },
        },
    ]
}

/// All fired rules' changes, deduplicated by change kind (the last fired
/// rule of a kind wins) and ordered by kind for determinism.
pub fn evaluate_rules(report: &DiagnosticsReport, rules: &[RefinementRule]) -> Vec<Change> {
    let mut by_kind: Vec<(ChangeKind, Change)> = Vec::new();
    for rule in rules {
        if rule.comparator.holds(rule.metric.read(report), rule.threshold) {
            let kind = rule.change.kind();
            by_kind.retain(|(k, _)| *k != kind);
            by_kind.push((kind, rule.change));
        }
    }
    by_kind.sort_by_key(|(kind, _)| *kind);
    by_kind.into_iter().map(|(_, change)| change).collect()
}
