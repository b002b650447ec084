use railvib::metrics::{confusion, format_reports_table, report, write_reports_csv, ConfusionMatrix, EvalReport, Label};

struct Reported {
    name: String,
    tpr: f64,
    tnr: f64,
    ba: f64,
}

fn reported() -> Vec<Reported> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reported_results.csv");
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            Reported {
                name: format!("{} {}", &rec[0], &rec[1]),
                tpr: rec[2].parse().unwrap(),
                tnr: rec[3].parse().unwrap(),
                ba: rec[4].parse().unwrap(),
            }
        })
        .collect()
}

/// Labels realising the given percentages over 10 000 instances per class.
fn labels(tpr: f64, tnr: f64) -> (Vec<Label>, Vec<Label>) {
    let tp = (tpr * 100.0).round() as usize;
    let tn = (tnr * 100.0).round() as usize;
    let mut truth = vec![Label::Healthy; 10_000];
    truth.extend(vec![Label::Damaged; 10_000]);
    let mut pred = vec![Label::Healthy; tp];
    pred.extend(vec![Label::Damaged; 10_000 - tp]);
    pred.extend(vec![Label::Damaged; tn]);
    pred.extend(vec![Label::Healthy; 10_000 - tn]);
    (truth, pred)
}

#[test]
fn reported_rows_reproduce_balanced_accuracy() {
    let rows = reported();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let (truth, pred) = labels(r.tpr, r.tnr);
        let rep = report(&confusion(&truth, &pred).unwrap()).unwrap();
        assert!((100.0 * rep.tpr - r.tpr).abs() < 1e-9, "{}", r.name);
        assert!((100.0 * rep.tnr - r.tnr).abs() < 1e-9, "{}", r.name);
        assert!((100.0 * rep.ba - r.ba).abs() <= 0.01 + 1e-9, "{}: {} vs {}", r.name, 100.0 * rep.ba, r.ba);
    }
}

#[test]
fn hand_counted_matrix() {
    let t = [Label::Healthy, Label::Healthy, Label::Healthy, Label::Damaged, Label::Damaged];
    let p = [Label::Healthy, Label::Damaged, Label::Healthy, Label::Healthy, Label::Damaged];
    let cm = confusion(&t, &p).unwrap();
    assert_eq!(cm, ConfusionMatrix { tp: 2, fn_: 1, fp: 1, tn: 1 });
    let r = report(&cm).unwrap();
    assert!((r.tpr - 2.0 / 3.0).abs() < 1e-15);
    assert!((r.tnr - 0.5).abs() < 1e-15);
    assert!((r.ba - 7.0 / 12.0).abs() < 1e-15);
    assert!((r.accuracy - 0.6).abs() < 1e-15);
    assert!((r.fpr + r.tnr - 1.0).abs() < 1e-15 && (r.fnr + r.tpr - 1.0).abs() < 1e-15);
}

#[test]
fn one_class_only_is_rejected() {
    let t = [Label::Healthy; 3];
    assert!(report(&confusion(&t, &t).unwrap()).is_err());
    assert!(confusion(&t, &t[..2]).is_err());
}

#[test]
fn report_outputs() {
    let r = report(&ConfusionMatrix { tp: 9, fn_: 1, fp: 2, tn: 8 }).unwrap();
    let rows = vec![("MFCC".to_string(), r)];
    let mut buf = Vec::new();
    write_reports_csv(&mut buf, &rows).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("name,{}", EvalReport::CSV_HEADER.join(",")));
    assert_eq!(lines.next().unwrap(), "MFCC,0.900000,0.800000,0.200000,0.100000,0.850000,0.850000");
    let table = format_reports_table(&rows);
    assert!(table.contains("MFCC") && table.contains("85.00"));
}
