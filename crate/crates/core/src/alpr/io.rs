use std::io::{Read, Write};

use super::{BBox, DetectionRecord, EvalReport, GroundTruthRecord};
use crate::error::EvalError;
use crate::sim::VehicleClass;

pub const DETECTION_HEADER: [&str; 7] = ["frame_id", "class", "x", "y", "w", "h", "confidence"];
pub const GROUND_TRUTH_HEADER: [&str; 6] = ["frame_id", "class", "x", "y", "w", "h"];
pub const REPORT_HEADER: &str = "Class,Images,Labels,P,R,F1,mAP@.5";

struct Row {
    line: usize,
    frame_id: String,
    class: VehicleClass,
    bbox: BBox,
    rest: Vec<String>,
}

fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Row>, EvalError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let found = rdr
        .headers()
        .map_err(|e| EvalError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if found.len() != header.len()
        || found
            .iter()
            .zip(header)
            .any(|(a, b)| !a.eq_ignore_ascii_case(b))
    {
        return Err(EvalError::Header {
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| EvalError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(EvalError::Parse {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let class = VehicleClass::parse(&rec[1]).ok_or_else(|| EvalError::UnknownClass {
            line,
            label: rec[1].to_string(),
        })?;
        let num = |i: usize| -> Result<f64, EvalError> {
            rec[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| EvalError::Parse {
                    line,
                    message: format!("{}: not a number: {:?}", header[i], &rec[i]),
                })
        };
        let bbox = BBox::new(num(2)?, num(3)?, num(4)?, num(5)?);
        if !(bbox.w > 0.0 && bbox.h > 0.0) {
            return Err(EvalError::Parse {
                line,
                message: "box width and height must be positive".into(),
            });
        }
        rows.push(Row {
            line,
            frame_id: rec[0].to_string(),
            class,
            bbox,
            rest: rec.iter().skip(6).map(str::to_string).collect(),
        });
    }
    Ok(rows)
}

pub fn read_detections<R: Read>(input: R) -> Result<Vec<DetectionRecord>, EvalError> {
    read_rows(input, &DETECTION_HEADER)?
        .into_iter()
        .map(|r| {
            let confidence = r.rest[0]
                .parse::<f64>()
                .ok()
                .filter(|c| (0.0..=1.0).contains(c))
                .ok_or_else(|| EvalError::Parse {
                    line: r.line,
                    message: format!("confidence must be in [0, 1]: {:?}", r.rest[0]),
                })?;
            Ok(DetectionRecord {
                frame_id: r.frame_id,
                class: r.class,
                bbox: r.bbox,
                confidence,
            })
        })
        .collect()
}

pub fn read_ground_truth<R: Read>(input: R) -> Result<Vec<GroundTruthRecord>, EvalError> {
    Ok(read_rows(input, &GROUND_TRUTH_HEADER)?
        .into_iter()
        .map(|r| GroundTruthRecord {
            frame_id: r.frame_id,
            class: r.class,
            bbox: r.bbox,
        })
        .collect())
}

pub fn write_detections<W: Write>(mut out: W, dets: &[DetectionRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", DETECTION_HEADER.join(","))?;
    for d in dets {
        let b = &d.bbox;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            d.frame_id,
            d.class.as_str(),
            b.x,
            b.y,
            b.w,
            b.h,
            d.confidence
        )?;
    }
    Ok(())
}

pub fn write_ground_truth<W: Write>(mut out: W, gts: &[GroundTruthRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", GROUND_TRUTH_HEADER.join(","))?;
    for g in gts {
        let b = &g.bbox;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            g.frame_id,
            g.class.as_str(),
            b.x,
            b.y,
            b.w,
            b.h
        )?;
    }
    Ok(())
}

fn fmt3(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"))
}

/// Report in the column order of the usual detection results table. The "All" row's
/// last column is the class-mean mAP.
pub fn report_csv(report: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str(REPORT_HEADER);
    s.push('\n');
    let a = &report.all;
    s.push_str(&format!(
        "All,{},{},{},{},{},{}\n",
        a.images,
        a.labels,
        fmt3(a.precision),
        fmt3(a.recall),
        fmt3(a.f1),
        fmt3(report.map50)
    ));
    for (_, m) in &report.classes {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            m.name,
            m.images,
            m.labels,
            fmt3(m.precision),
            fmt3(m.recall),
            fmt3(m.f1),
            fmt3(m.ap50)
        ));
    }
    s
}

/// Interpolated PR curves as `class,recall,precision` rows.
pub fn export_pr_curve(report: &EvalReport) -> String {
    let mut s = String::from("class,recall,precision\n");
    let rows = report
        .classes
        .iter()
        .map(|(_, m)| m)
        .chain(std::iter::once(&report.all));
    for m in rows {
        for (r, p) in &m.pr_curve {
            s.push_str(&format!("{},{r:.6},{p:.6}\n", m.name));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpr::evaluate;

    #[test]
    fn round_trip_and_report() {
        let gts = read_ground_truth(
            "frame_id,class,x,y,w,h\nf1,car,0,0,10,10\nf1,bus,20,20,5,5\n".as_bytes(),
        )
        .unwrap();
        let mut buf = Vec::new();
        let dets: Vec<DetectionRecord> = gts
            .iter()
            .map(|g| DetectionRecord {
                frame_id: g.frame_id.clone(),
                class: g.class,
                bbox: g.bbox,
                confidence: 1.0,
            })
            .collect();
        write_detections(&mut buf, &dets).unwrap();
        assert_eq!(read_detections(buf.as_slice()).unwrap(), dets);
        let csv = report_csv(&evaluate(&dets, &gts, 0.5));
        assert_eq!(
            csv,
            "Class,Images,Labels,P,R,F1,mAP@.5\nAll,1,2,1.000,1.000,1.000,1.000\nCar,1,1,1.000,1.000,1.000,1.000\nBus,1,1,1.000,1.000,1.000,1.000\n"
        );
    }

    #[test]
    fn diagnostics() {
        assert!(matches!(
            read_ground_truth("frame,class,x,y,w,h\n".as_bytes()),
            Err(EvalError::Header { .. })
        ));
        assert_eq!(
            read_ground_truth(
                "frame_id,class,x,y,w,h\nf1,car,0,0,1,1\nf1,tractor,0,0,1,1\n".as_bytes()
            )
            .err(),
            Some(EvalError::UnknownClass {
                line: 3,
                label: "tractor".into()
            })
        );
        assert!(matches!(
            read_detections("frame_id,class,x,y,w,h,confidence\nf1,car,0,0,1,1,1.5\n".as_bytes()),
            Err(EvalError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn pr_export_recall_is_strictly_increasing() {
        let gts = read_ground_truth(
            "frame_id,class,x,y,w,h\na,car,0,0,10,10\na,car,40,0,10,10\nb,car,0,0,10,10\n"
                .as_bytes(),
        )
        .unwrap();
        let dets = read_detections(
            "frame_id,class,x,y,w,h,confidence\na,car,0,0,10,10,0.9\na,car,80,0,10,10,0.9\na,car,40,0,10,10,0.3\nb,car,1,1,10,10,0.3\nb,car,60,60,5,5,0.1\n"
                .as_bytes(),
        )
        .unwrap();
        let text = export_pr_curve(&evaluate(&dets, &gts, 0.5));
        let recalls: Vec<f64> = text
            .lines()
            .skip(1)
            .filter(|l| l.starts_with("Car"))
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(recalls.windows(2).all(|w| w[1] > w[0]), "{recalls:?}");
    }
}
