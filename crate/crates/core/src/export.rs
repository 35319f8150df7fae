//! CSV output. Floats are written in shortest round-trip form.

use std::io::Write;

use crate::error::Result;
use crate::operators::corpus::CorpusEntry;
use crate::schemes::IterationTrace;
use crate::stability::StabilityReport;

/// Shortest round-trip text for `v`: plain notation for magnitudes in
/// `[1e-4, 1e15)` and zero, exponent notation otherwise.
pub fn format_float(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || (1e-4..1e15).contains(&m) || !m.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

/// Columns `n, x_0..x_{d−1}, err`; `err` is blank when `q` is unknown.
pub fn write_trace_csv<W: Write>(w: W, trace: &IterationTrace) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let dim = trace.points.first().map_or(0, |p| p.dim());
    let mut header = vec!["n".to_string()];
    header.extend((0..dim).map(|i| format!("x_{i}")));
    header.push("err".into());
    out.write_record(&header)?;
    for (n, p) in trace.points.iter().enumerate() {
        let mut rec = vec![n.to_string()];
        rec.extend(p.as_slice().iter().map(|c| format_float(*c)));
        rec.push(opt(trace.errors.as_ref().map(|e| e[n])));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `n, eps_n, y_err_n`; the last row has no residual.
pub fn write_stability_csv<W: Write>(w: W, report: &StabilityReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "eps_n", "y_err_n"])?;
    for (n, e) in report.y_errors.iter().enumerate() {
        out.write_record([n.to_string(), opt(report.eps.get(n).copied()), format_float(*e)])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `n, sigma, observed`, where `observed` is
/// `‖x_{n+1} − q‖ / ‖x_n − q‖` when known.
pub fn write_sigma_csv<W: Write>(w: W, rows: &[(usize, f64, Option<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "sigma", "observed"])?;
    for (n, s, o) in rows {
        out.write_record([n.to_string(), format_float(*s), opt(*o)])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `id, dimension, norm, class, a, L, phi, q`; `q` lists its
/// coordinates separated by spaces.
pub fn write_corpus_csv<W: Write>(w: W, table: &[CorpusEntry]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "dimension", "norm", "class", "a", "L", "phi", "q"])?;
    for e in table {
        let q = e
            .fixed_point
            .as_ref()
            .map(|q| q.as_slice().iter().map(|c| format_float(*c)).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        out.write_record([
            e.id.clone(),
            e.dim.to_string(),
            e.norm.to_string(),
            e.class.map(|c| c.tag().to_string()).unwrap_or_default(),
            opt(e.a),
            opt(e.l),
            e.phi.map(|p| p.to_string()).unwrap_or_default(),
            q,
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::corpus;
    use crate::schemes::{run, specialize, ClassicScheme, RunOptions};
    use crate::vector::Vector;

    #[test]
    fn trace_round_trips() {
        let op = corpus::get("affine-2d-a03").unwrap();
        let cfg = specialize(&ClassicScheme::Picard).unwrap();
        let t = run(&op, &cfg, &Vector::new(vec![0.1, -3.7]).unwrap(), RunOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(r.headers().unwrap(), vec!["n", "x_0", "x_1", "err"]);
        for (n, rec) in r.records().enumerate() {
            let rec = rec.unwrap();
            assert_eq!(rec[1].parse::<f64>().unwrap(), t.points[n][0]);
            assert_eq!(rec[2].parse::<f64>().unwrap(), t.points[n][1]);
            assert_eq!(rec[3].parse::<f64>().unwrap(), t.errors.as_ref().unwrap()[n]);
        }
    }

    #[test]
    fn unknown_fixed_point_leaves_err_blank() {
        let op = crate::operators::Operator::new("free", 1, |x| vec![x[0] / 2.0]);
        let cfg = specialize(&ClassicScheme::Picard).unwrap();
        let opts = RunOptions { max_iter: 3, ..Default::default() };
        let t = run(&op, &cfg, &Vector::scalar(1.0), opts).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.0, 1.0, -0.625, 1e-11, 9.956824444577825e-11, 3.0e20, f64::MIN_POSITIVE, 1e-4, 0.1 + 0.2] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_float(1e-11), "1e-11");
        assert_eq!(format_float(0.5), "0.5");
    }

    #[test]
    fn corpus_listing_has_every_operator() {
        let mut buf = Vec::new();
        write_corpus_csv(&mut buf, &corpus::table()).unwrap();
        let mut r = csv::Reader::from_reader(buf.as_slice());
        assert_eq!(r.records().count(), corpus::IDS.len());
    }
}
