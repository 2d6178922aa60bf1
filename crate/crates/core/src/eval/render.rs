//! Plain-text and CSV renderings of the report tables. Correlations print
//! with two decimals, percentages with one; all arithmetic upstream is full
//! precision.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::goldsets::DatasetId;

use super::diff::DiffReport;
use super::experiment::{ExperimentReport, SizeCorrelation, SizeIndicator, Strategy};

fn fmt_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.2}", super::diff::round2(v)),
        None => "-".to_string(),
    }
}

fn write_row(out: &mut String, label: &str, cells: &[String], width: usize) {
    let _ = write!(out, "{label:<14}");
    for cell in cells {
        let _ = write!(out, "{cell:>width$}");
    }
    out.push('\n');
}

/// Dataset × model × language score grid for one strategy, with model
/// averages per row, language averages, and dataset averages.
pub fn render_scores_table(report: &ExperimentReport, strategy: Strategy) -> String {
    let report = report.only_strategy(strategy);
    let width = 8;
    let mut out = String::new();
    let mut header: Vec<String> = report.languages.clone();
    header.push("M.AVG".into());
    let _ = writeln!(out, "strategy: {}", strategy.as_str());
    write_row(&mut out, "ds/model", &header, width);
    for dataset in report.datasets() {
        for model in report.models() {
            let mut cells: Vec<String> = report
                .languages
                .iter()
                .map(|lang| fmt_cell(report.cell(dataset, model, lang, strategy).and_then(|c| c.rho)))
                .collect();
            cells.push(fmt_cell(report.model_avg(dataset, model, strategy)));
            write_row(&mut out, &format!("{dataset}/{model}"), &cells, width);
        }
        let mut ds_row: Vec<String> = vec!["".into(); report.languages.len()];
        ds_row.push(fmt_cell(report.dataset_avg(dataset, strategy)));
        write_row(&mut out, &format!("{dataset}/DS.AVG"), &ds_row, width);
    }
    let mut lang_avgs: Vec<String> = report
        .languages
        .iter()
        .map(|lang| fmt_cell(report.lang_avg(lang, strategy)))
        .collect();
    let all: Vec<f64> = report.cells.iter().filter_map(|c| c.rho).collect();
    lang_avgs.push(fmt_cell(if all.is_empty() {
        None
    } else {
        Some(all.iter().sum::<f64>() / all.len() as f64)
    }));
    write_row(&mut out, "LANG.AVG", &lang_avgs, width);
    out
}

/// Difference table: per-cell relative differences with row means, plus the
/// per-model absolute/percent diff column computed on rounded averages.
pub fn render_diff_table(diff: &DiffReport) -> String {
    let width = 8;
    let mut out = String::new();
    let mut header: Vec<String> = diff.languages.clone();
    header.push("M.AVG".into());
    header.push("DIFF".into());
    write_row(&mut out, "ds/model", &header, 9);
    for dataset in diff.datasets() {
        for model in diff.models() {
            let mut cells: Vec<String> = diff
                .languages
                .iter()
                .map(|lang| {
                    fmt_cell(diff.cell(dataset, model, lang).and_then(|c| c.relative))
                })
                .collect();
            cells.push(fmt_cell(diff.row_mean_relative(dataset, model)));
            match diff.model_diff(dataset, model) {
                Some(d) => cells.push(format!("{:+.2} ({:+.1}%)", d.abs_diff, d.pct_diff)),
                None => cells.push("-".into()),
            }
            let label = format!("{dataset}/{model}");
            let _ = write!(out, "{label:<14}");
            for (i, cell) in cells.iter().enumerate() {
                if i == cells.len() - 1 {
                    let _ = write!(out, "  {cell}");
                } else {
                    let _ = write!(out, "{cell:>width$}");
                }
            }
            out.push('\n');
        }
        let rels: Vec<f64> = diff
            .cells
            .iter()
            .filter(|c| c.dataset == dataset)
            .filter_map(|c| c.relative)
            .collect();
        let ds_avg = if rels.is_empty() {
            None
        } else {
            Some(rels.iter().sum::<f64>() / rels.len() as f64)
        };
        let mut ds_row: Vec<String> = vec!["".into(); diff.languages.len()];
        ds_row.push(fmt_cell(ds_avg));
        write_row(&mut out, &format!("{dataset}/DS.AVG"), &ds_row, width);
    }
    out
}

/// Translation accuracy per dataset and language.
pub fn render_accuracy_table(accuracy: &BTreeMap<DatasetId, BTreeMap<String, f64>>) -> String {
    let mut out = String::new();
    let mut languages: Vec<String> = Vec::new();
    for langs in accuracy.values() {
        for lang in langs.keys() {
            if !languages.contains(lang) {
                languages.push(lang.clone());
            }
        }
    }
    write_row(&mut out, "dataset", &languages, 8);
    for (dataset, langs) in accuracy {
        let cells: Vec<String> = languages
            .iter()
            .map(|l| fmt_cell(langs.get(l).copied()))
            .collect();
        write_row(&mut out, dataset.as_str(), &cells, 8);
    }
    out
}

/// Correlation between scores and corpus size, one row per model.
pub fn render_size_correlation_table(correlations: &[SizeCorrelation]) -> String {
    let mut out = String::new();
    let mut datasets: Vec<DatasetId> = Vec::new();
    let mut models: Vec<crate::vecspace::ModelKind> = Vec::new();
    for c in correlations {
        if !datasets.contains(&c.dataset) {
            datasets.push(c.dataset);
        }
        if !models.contains(&c.model) {
            models.push(c.model);
        }
    }
    datasets.sort();
    let mut header: Vec<String> = Vec::new();
    for d in &datasets {
        header.push(format!("{d}/uniq"));
        header.push(format!("{d}/tok"));
    }
    write_row(&mut out, "model", &header, 10);
    for model in models {
        let mut cells = Vec::new();
        for &dataset in &datasets {
            for indicator in [SizeIndicator::UniqueTokens, SizeIndicator::Tokens] {
                let value = correlations
                    .iter()
                    .find(|c| c.dataset == dataset && c.model == model && c.indicator == indicator)
                    .and_then(|c| c.r);
                cells.push(fmt_cell(value));
            }
        }
        write_row(&mut out, model.as_str(), &cells, 10);
    }
    out
}

/// Machine-readable cell dump: one CSV row per grid cell.
pub fn render_scores_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("dataset,model,lang,strategy,rho,n_pairs,n_oov,low_coverage\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.dataset,
            c.model,
            c.lang,
            c.strategy.as_str(),
            c.rho.map(|r| format!("{r:.6}")).unwrap_or_default(),
            c.n_pairs,
            c.n_oov,
            c.low_coverage
        );
    }
    out
}
