use std::fmt::Write as _;
use std::str::FromStr;

use super::{block_spread_percent, TrialResult, VARIANCE_BLOCKS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectAccuracy {
    pub subject_id: u8,
    pub accuracy_percent: f64,
    /// Block-wise accuracy standard deviation, reported as `+-`.
    pub variance_percent: f64,
    pub n_trials: usize,
    pub n_correct: usize,
}

impl SubjectAccuracy {
    pub fn from_trials(subject_id: u8, trials: &[TrialResult]) -> Self {
        let correct: Vec<bool> = trials.iter().map(|t| t.correct).collect();
        let n_correct = correct.iter().filter(|&&c| c).count();
        SubjectAccuracy {
            subject_id,
            accuracy_percent: 100.0 * n_correct as f64 / trials.len().max(1) as f64,
            variance_percent: block_spread_percent(&correct, VARIANCE_BLOCKS),
            n_trials: trials.len(),
            n_correct,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EvalReport {
    pub subjects: Vec<SubjectAccuracy>,
}

impl EvalReport {
    pub fn total_trials(&self) -> usize {
        self.subjects.iter().map(|s| s.n_trials).sum()
    }

    /// Trial-weighted mean accuracy; `None` for an empty report.
    pub fn overall_accuracy_percent(&self) -> Option<f64> {
        let n = self.total_trials();
        (n > 0).then(|| 100.0 * self.subjects.iter().map(|s| s.n_correct).sum::<usize>() as f64 / n as f64)
    }

    pub fn best_subject(&self) -> Option<&SubjectAccuracy> {
        self.subjects
            .iter()
            .fold(None, |best: Option<&SubjectAccuracy>, s| match best {
                Some(b) if b.accuracy_percent >= s.accuracy_percent => Some(b),
                _ => Some(s),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Plain,
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" | "text" => Ok(ReportFormat::Plain),
            "csv" => Ok(ReportFormat::Csv),
            "md" | "markdown" => Ok(ReportFormat::Markdown),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

const CSV_HEADER: &str = "subject,accuracy_percent,variance_percent,n_trials";

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Plain => {
            out.push_str("Subjects, Accuracy, Variance\n");
            for s in &report.subjects {
                let _ = writeln!(
                    out,
                    "{:02}, {:.2}%, ±{:.1}%",
                    s.subject_id, s.accuracy_percent, s.variance_percent
                );
            }
            if let Some(overall) = report.overall_accuracy_percent() {
                let _ = writeln!(out, "Overall average: {overall:.2}% over {} trials", report.total_trials());
            }
            if let Some(best) = report.best_subject() {
                let _ = writeln!(out, "Best subject: {:02} at {:.2}%", best.subject_id, best.accuracy_percent);
            }
        }
        ReportFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for s in &report.subjects {
                let _ = writeln!(
                    out,
                    "{:02},{:.2},{:.2},{}",
                    s.subject_id, s.accuracy_percent, s.variance_percent, s.n_trials
                );
            }
        }
        ReportFormat::Markdown => {
            out.push_str("| Subjects | Accuracy | Variance |\n|:---:|:---:|:---:|\n");
            for s in &report.subjects {
                let _ = writeln!(
                    out,
                    "| {:02} | {:.2}% | ±{:.1}% |",
                    s.subject_id, s.accuracy_percent, s.variance_percent
                );
            }
            if let (Some(overall), Some(best)) = (report.overall_accuracy_percent(), report.best_subject()) {
                let _ = writeln!(
                    out,
                    "\nOverall average: **{overall:.2}%** over {} trials; best subject {:02} at {:.2}%.",
                    report.total_trials(),
                    best.subject_id,
                    best.accuracy_percent
                );
            }
        }
    }
    out
}

/// Reads the CSV rendering back. Values carry the two decimals written.
pub fn parse_report_csv(text: &str) -> Result<EvalReport> {
    let bad = |line: usize, reason: String| Error::Parse {
        path: "<report>".into(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header `{CSV_HEADER}`"))),
    }
    let mut subjects = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(bad(idx + 1, format!("expected 4 fields, found {}", fields.len())));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| bad(idx + 1, format!("`{}` is not a number", fields[i])))
        };
        let subject_id = fields[0]
            .parse()
            .map_err(|_| bad(idx + 1, format!("bad subject id `{}`", fields[0])))?;
        let n_trials: usize = fields[3]
            .parse()
            .map_err(|_| bad(idx + 1, format!("bad trial count `{}`", fields[3])))?;
        let accuracy_percent = num(1)?;
        subjects.push(SubjectAccuracy {
            subject_id,
            accuracy_percent,
            variance_percent: num(2)?,
            n_trials,
            n_correct: (accuracy_percent * n_trials as f64 / 100.0).round() as usize,
        });
    }
    Ok(EvalReport { subjects })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: u8, acc: f64, var: f64, n: usize) -> SubjectAccuracy {
        SubjectAccuracy {
            subject_id: id,
            accuracy_percent: acc,
            variance_percent: var,
            n_trials: n,
            n_correct: (acc * n as f64 / 100.0).round() as usize,
        }
    }

    fn table() -> EvalReport {
        EvalReport {
            subjects: vec![
                row(1, 98.0, 1.0, 1000),
                row(2, 98.7, 1.2, 1000),
                row(3, 99.5, 1.0, 1000),
                row(4, 99.0, 0.5, 1000),
                row(5, 98.3, 1.5, 1000),
            ],
        }
    }

    #[test]
    fn plain_row_layout() {
        let text = render_report(&table(), ReportFormat::Plain);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("Subjects, Accuracy, Variance"));
        assert_eq!(lines.next(), Some("01, 98.00%, ±1.0%"));
        assert!(text.contains("Overall average: 98.70% over 5000 trials"));
        assert!(text.contains("Best subject: 03 at 99.50%"));
    }

    #[test]
    fn empty_report_is_header_only() {
        let empty = EvalReport::default();
        assert_eq!(render_report(&empty, ReportFormat::Plain), "Subjects, Accuracy, Variance\n");
        assert_eq!(render_report(&empty, ReportFormat::Csv).lines().count(), 1);
        assert_eq!(render_report(&empty, ReportFormat::Markdown).lines().count(), 2);
        assert_eq!(empty.overall_accuracy_percent(), None);
    }

    #[test]
    fn csv_round_trip() {
        let mut report = table();
        report.subjects[1].variance_percent = 1.23456;
        let back = parse_report_csv(&render_report(&report, ReportFormat::Csv)).unwrap();
        assert_eq!(back.subjects.len(), 5);
        for (a, b) in report.subjects.iter().zip(&back.subjects) {
            assert_eq!(a.subject_id, b.subject_id);
            assert_eq!(a.n_trials, b.n_trials);
            assert_eq!(a.n_correct, b.n_correct);
            assert_eq!(format!("{:.2}", a.accuracy_percent), format!("{:.2}", b.accuracy_percent));
            assert_eq!(format!("{:.2}", a.variance_percent), format!("{:.2}", b.variance_percent));
        }
    }

    #[test]
    fn markdown_table() {
        let text = render_report(&table(), ReportFormat::Markdown);
        assert!(text.starts_with("| Subjects | Accuracy | Variance |"));
        assert!(text.contains("| 03 | 99.50% | ±1.0% |"));
    }

    #[test]
    fn format_names() {
        assert_eq!("md".parse::<ReportFormat>().unwrap(), ReportFormat::Markdown);
        assert!(matches!("xml".parse::<ReportFormat>(), Err(Error::UnknownFormat(_))));
    }

    #[test]
    fn overall_is_trial_weighted() {
        let report = EvalReport {
            subjects: vec![row(1, 100.0, 0.0, 300), row(2, 50.0, 0.0, 100)],
        };
        assert_eq!(report.overall_accuracy_percent(), Some(87.5));
    }
}
