use std::fmt::Write;

use super::{p_value_summary, EvaluationReport, ErrorSummary};

const NA: &str = "n/a";

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |v| format!("{:.2}%", v * 100.0))
}

fn mm(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |v| format!("{v:.4}"))
}

/// Fixed-width table: first column left-aligned, the rest centred.
fn table(out: &mut String, title: &str, header: &[&str], rows: &[Vec<String>]) {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    let rule: String = widths
        .iter()
        .map(|w| "-".repeat(w + 2))
        .collect::<Vec<_>>()
        .join("+");
    let line = |cells: &[String]| {
        let parts: Vec<String> = (0..cols)
            .map(|i| {
                if i == 0 {
                    format!(" {:<w$} ", cells[i], w = widths[i])
                } else {
                    format!(" {:^w$} ", cells[i], w = widths[i])
                }
            })
            .collect();
        format!("|{}|", parts.join("|"))
    };
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "+{rule}+");
    let head: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", line(&head));
    let _ = writeln!(out, "+{rule}+");
    for row in rows {
        let _ = writeln!(out, "{}", line(row));
    }
    let _ = writeln!(out, "+{rule}+");
    out.push('\n');
}

fn bucket_row(label: &str, s: &ErrorSummary) -> Vec<String> {
    let mut row = vec![label.to_string()];
    match s.buckets {
        Some(b) => row.extend(b.iter().map(|v| pct(Some(*v)))),
        None => row.extend(std::iter::repeat_n(NA.to_string(), 4)),
    }
    row
}

const BUCKET_HEADER: [&str; 5] = ["", "<= 5 mm", "<= 10 mm", "<= 15 mm", "<= 20 mm"];

/// Plain-text tables in the layouts of the published result tables.
pub fn render_tables(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let (t, c) = (&report.tip, &report.carina);

    table(
        &mut out,
        "Object detection performance in recall and precision",
        &["", "Tube tip recall", "Tube tip precision", "Carina recall", "Carina precision"],
        &[vec![
            "Result".into(),
            pct(t.recall),
            pct(t.precision),
            pct(c.recall),
            pct(c.precision),
        ]],
    );
    table(
        &mut out,
        "Detection counts",
        &["", "TP", "FP", "FN"],
        &[
            vec!["Tube tip".into(), t.counts.tp.to_string(), t.counts.fp.to_string(), t.counts.fn_.to_string()],
            vec!["Carina".into(), c.counts.tp.to_string(), c.counts.fp.to_string(), c.counts.fn_.to_string()],
        ],
    );
    table(
        &mut out,
        "Object detection performance in object error",
        &["", "Tube tip mean (mm)", "Tube tip std. (mm)", "Carina mean (mm)", "Carina std. (mm)"],
        &[vec![
            "Result".into(),
            mm(t.object_error.mean_mm),
            mm(t.object_error.std_mm),
            mm(c.object_error.mean_mm),
            mm(c.object_error.std_mm),
        ]],
    );
    let d = &report.distance_error;
    table(
        &mut out,
        "Object detection performance in ETT-carina distance error",
        &["", "Mean (mm)", "Std. (mm)"],
        &[vec!["Result".into(), mm(d.mean_mm), mm(d.std_mm)]],
    );
    table(
        &mut out,
        "Distribution of images in ETT-carina distance error",
        &BUCKET_HEADER,
        &[bucket_row("Result", d)],
    );
    table(
        &mut out,
        "Distribution of images in object error (tube tip)",
        &BUCKET_HEADER,
        &[bucket_row("Result", &t.object_error)],
    );
    table(
        &mut out,
        "Distribution of images in object error (carina)",
        &BUCKET_HEADER,
        &[bucket_row("Result", &c.object_error)],
    );

    let m = &report.confusion;
    let row = |label: &str, r: usize| vec![label.to_string(), m.cells[r][0].to_string(), m.cells[r][1].to_string()];
    table(
        &mut out,
        &format!(
            "Confusion matrix of diagnosis (suitable: {} to {} mm)",
            report.suitable_range_mm[0], report.suitable_range_mm[1]
        ),
        &["Predict \\ GT", "Suitable", "Unsuitable"],
        &[row("Suitable", 0), row("Unsuitable", 1), row("Undetection", 2)],
    );
    let _ = writeln!(
        out,
        "Agreement: {} of {} images; ground truth without a distance: {}\n",
        m.agreement(),
        m.total(),
        m.gt_unavailable
    );

    let corr = &report.correlation;
    let mut rows = Vec::new();
    match &corr.stats {
        Some(s) => {
            let p = if s.p_two_tailed < 0.0001 {
                "< 0.0001".to_string()
            } else {
                format!("{:.4}", s.p_two_tailed)
            };
            rows.push(vec!["r".into(), format!("{:.4}", s.r)]);
            rows.push(vec![
                "95% confidence interval".into(),
                format!("{:.4} to {:.4}", s.ci95_low, s.ci95_high),
            ]);
            rows.push(vec!["R square".into(), format!("{:.4}", s.r_squared)]);
            rows.push(vec!["P (two-tailed)".into(), p]);
            rows.push(vec!["P value summary".into(), p_value_summary(s.p_two_tailed).into()]);
            let yes = if s.p_two_tailed < 0.05 { "Yes" } else { "No" };
            rows.push(vec!["Significant? (alpha=0.05)".into(), yes.into()]);
        }
        None => rows.push(vec![
            "r".into(),
            corr.note.clone().unwrap_or_else(|| NA.to_string()),
        ]),
    }
    rows.push(vec!["Number of XY Pairs".into(), corr.n_pairs.to_string()]);
    rows.push(vec!["Overall number".into(), corr.n_total.to_string()]);
    table(
        &mut out,
        "Correlation between ground truth and prediction in ETT-carina distance",
        &["Pearson r", "Result"],
        &rows,
    );
    out
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn quoted(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One row per image.
pub fn render_csv(report: &EvaluationReport) -> String {
    let mut out = String::from(
        "image_id,dice_tip,dice_carina,err_tip_mm,err_carina_mm,d1_mm,d2_mm,distance_error_mm,suitability_gt,suitability_pred\n",
    );
    for i in &report.images {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            quoted(&i.image_id),
            cell(i.tip.dice),
            cell(i.carina.dice),
            cell(i.tip.object_error_mm),
            cell(i.carina.object_error_mm),
            cell(i.d1_mm),
            cell(i.d2_mm),
            cell(i.distance_error_mm),
            i.suitability_gt.map(|s| s.as_str()).unwrap_or(""),
            i.suitability_pred.as_str(),
        );
    }
    out
}
