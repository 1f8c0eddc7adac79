//! Evaluation reports as JSON lines: a header, then one `{"metric", "value"}`
//! record per number.

use super::{
    canonical, json_error, line_pos, numbered_lines, parse_header, to_line, FormatError,
    TEXT_VERSION,
};
use crate::metrics::EvalReport;
use crate::model::{JointKind, NUM_JOINTS};
use serde::{Deserialize, Serialize};

const FORMAT: &str = "jointtrack-report";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    metric: String,
    value: Option<f64>,
}

/// Named values of a report in output order. Per-joint PCKh is `None` for
/// kinds without ground truth.
pub fn report_entries(r: &EvalReport) -> Vec<(String, Option<f64>)> {
    let mut out: Vec<(String, Option<f64>)> = vec![
        ("pckh_mean".into(), Some(r.pckh_mean)),
        ("joint_map".into(), Some(r.joint_map)),
        ("det_precision".into(), Some(r.det_precision)),
        ("det_recall".into(), Some(r.det_recall)),
        ("det_f1".into(), Some(r.det_f1)),
        ("mota".into(), Some(r.mota)),
        ("idf1".into(), Some(r.idf1)),
        ("mt".into(), Some(r.mt)),
        ("ml".into(), Some(r.ml)),
        ("fp".into(), Some(r.fp as f64)),
        ("fn".into(), Some(r.fn_ as f64)),
        ("ids".into(), Some(r.ids as f64)),
        ("frag".into(), Some(r.frag as f64)),
        ("gt_count".into(), Some(r.gt_count as f64)),
        ("pckh_skipped".into(), Some(r.pckh_skipped as f64)),
        ("recovered_joints".into(), Some(r.recovered_joints as f64)),
    ];
    for (k, v) in JointKind::ALL.iter().zip(r.pckh_per_joint) {
        out.push((format!("pckh_{}", k.name()), v));
    }
    out
}

pub fn save_report(r: &EvalReport) -> String {
    let mut out = to_line(&Header {
        format: FORMAT.into(),
        version: TEXT_VERSION,
    });
    for (metric, value) in report_entries(r) {
        out.push_str(&to_line(&Record {
            metric,
            value: value.map(canonical),
        }));
    }
    out
}

pub fn load_report(text: &str) -> Result<EvalReport, FormatError> {
    let _: (Header, usize) = parse_header(text, FORMAT)?;
    let mut r = EvalReport {
        pckh_per_joint: [None; NUM_JOINTS],
        pckh_mean: 0.0,
        joint_map: 0.0,
        det_precision: 0.0,
        det_recall: 0.0,
        det_f1: 0.0,
        mota: 0.0,
        idf1: 0.0,
        mt: 0.0,
        ml: 0.0,
        fp: 0,
        fn_: 0,
        ids: 0,
        frag: 0,
        gt_count: 0,
        pckh_skipped: 0,
        recovered_joints: 0,
    };
    for (line, text) in numbered_lines(text).skip(1) {
        let rec: Record = serde_json::from_str(text).map_err(|e| json_error(e, line))?;
        let schema = |reason: String| FormatError::Schema {
            position: line_pos(line),
            reason,
        };
        if let Some(kind) = rec
            .metric
            .strip_prefix("pckh_")
            .and_then(JointKind::from_name)
        {
            r.pckh_per_joint[kind.index()] = rec.value;
            continue;
        }
        let Some(v) = rec.value else {
            return Err(schema(format!("metric {} requires a value", rec.metric)));
        };
        let count = || -> Result<usize, FormatError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(schema(format!(
                    "metric {} must be a count, found {v}",
                    rec.metric
                )))
            }
        };
        match rec.metric.as_str() {
            "pckh_mean" => r.pckh_mean = v,
            "joint_map" => r.joint_map = v,
            "det_precision" => r.det_precision = v,
            "det_recall" => r.det_recall = v,
            "det_f1" => r.det_f1 = v,
            "mota" => r.mota = v,
            "idf1" => r.idf1 = v,
            "mt" => r.mt = v,
            "ml" => r.ml = v,
            "fp" => r.fp = count()?,
            "fn" => r.fn_ = count()?,
            "ids" => r.ids = count()?,
            "frag" => r.frag = count()?,
            "gt_count" => r.gt_count = count()?,
            "pckh_skipped" => r.pckh_skipped = count()?,
            "recovered_joints" => r.recovered_joints = count()?,
            other => return Err(schema(format!("unknown metric {other}"))),
        }
    }
    Ok(r)
}
