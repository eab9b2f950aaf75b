//! Risk-table CSV: `theta_norm,estimator,risk_hat,std_err,n_reps,seed`,
//! UTF-8, LF line endings, optional `#` comment lines before the header.

use std::io::{Read, Write};

use crate::risk::{RiskCurve, RiskPoint};

pub const HEADER: [&str; 6] = ["theta_norm", "estimator", "risk_hat", "std_err", "n_reps", "seed"];

/// 17 significant digits, which round-trips every `f64`.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_risk_csv<W: Write>(mut out: W, curve: &RiskCurve, comments: &[String]) -> csv::Result<()> {
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for p in &curve.points {
        w.write_record([
            p.theta_norm.to_string(),
            p.estimator_name.clone(),
            full_precision(p.risk_hat),
            full_precision(p.std_err),
            p.n_reps.to_string(),
            p.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_risk_csv<R: Read>(input: R) -> csv::Result<Vec<RiskPoint>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(csv::Error::from(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("unexpected header {:?}", headers),
        )));
    }
    r.deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelConfig;
    use crate::risk::risk_curve;
    use crate::shrinkage::ShrinkageEstimator;
    use crate::AdmParams;

    #[test]
    fn round_trip_reproduces_cells() {
        let cfg = ModelConfig::new(4, 1.5).unwrap();
        let ests = [ShrinkageEstimator::james_stein(), ShrinkageEstimator::adm(AdmParams::new(1.0, 1.0).unwrap())];
        let curve = risk_curve(&ests, &[0.0, 0.7, 2.25], &cfg, 300, 99, true).unwrap();
        let mut buf = Vec::new();
        write_risk_csv(&mut buf, &curve, &["first note".into(), "second".into()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# first note\n# second\ntheta_norm,estimator,risk_hat,std_err,n_reps,seed\n"));
        assert!(!text.contains('\r'));
        assert!(text.contains("\"ADM(m=1,c=1)\""));
        let parsed = read_risk_csv(buf.as_slice()).unwrap();
        assert_eq!(parsed, curve.points);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(read_risk_csv("a,b\n1,2\n".as_bytes()).is_err());
    }
}
