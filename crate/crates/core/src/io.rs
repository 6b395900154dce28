//! File formats: measurements and images as CSV, instances as JSON.
//!
//! Numbers are written with 17 significant digits so a write/read round trip
//! is bit-exact.

use std::io::{Read, Write};

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hankel_music::ImagingResult;
use crate::model::{ClusterRegion, SampledMeasurement, Source, SourceMeasure};

fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `x,re,im` rows.
pub fn write_measurement_csv(out: impl Write, meas: &SampledMeasurement<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "re", "im"])?;
    for (x, v) in meas.grid().iter().zip(meas.values()) {
        w.write_record([full(*x), full(v.re), full(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct MeasurementRow {
    x: f64,
    re: f64,
    im: f64,
}

/// Reads `x,re,im` rows; the file carries neither `omega` nor `sigma`.
pub fn read_measurement_csv(input: impl Read, omega: f64, sigma: f64) -> Result<SampledMeasurement<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["x", "re", "im"] {
        return Err(Error::Parse(format!("measurement header must be x,re,im (got {})", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for row in r.deserialize() {
        let row: MeasurementRow = row?;
        grid.push(row.x);
        values.push(Complex::new(row.re, row.im));
    }
    SampledMeasurement::new(grid, values, omega, sigma, false)
}

/// Writes `omega,J` rows of a MUSIC image.
pub fn write_image_csv(out: impl Write, image: &ImagingResult<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["omega", "J"])?;
    for (t, j) in image.test_points.iter().zip(&image.values) {
        w.write_record([full(*t), full(*j)])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one `location` per row.
pub fn write_locations_csv(out: impl Write, locations: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["location"])?;
    for y in locations {
        w.write_record([full(*y)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEntry {
    pub y: f64,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterEntry {
    pub center: f64,
    /// Spatial half-width.
    pub half_width: f64,
    pub sources: Vec<SourceEntry>,
}

/// Instance file: `{omega, sigma, clusters: [{center, half_width, sources: [{y, re, im}]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub omega: f64,
    pub sigma: f64,
    pub clusters: Vec<ClusterEntry>,
}

impl InstanceFile {
    /// Groups the sources by their cluster assignment, or by the nearest
    /// center when the measure carries none.
    pub fn from_instance(measure: &SourceMeasure<f64>, region: &ClusterRegion<f64>, sigma: f64) -> Self {
        let mut clusters: Vec<ClusterEntry> = region
            .centers()
            .iter()
            .zip(region.half_widths())
            .map(|(&center, &half_width)| ClusterEntry { center, half_width, sources: Vec::new() })
            .collect();
        for (q, src) in measure.sources().iter().enumerate() {
            let j = measure.cluster_assignment().map(|a| a[q]).unwrap_or_else(|| region.nearest(src.location));
            clusters[j].sources.push(SourceEntry { y: src.location, re: src.amplitude.re, im: src.amplitude.im });
        }
        Self { omega: region.omega(), sigma, clusters }
    }

    /// The measure with cluster assignment, and the region spanned by the
    /// listed clusters.
    pub fn to_instance(&self) -> Result<(SourceMeasure<f64>, ClusterRegion<f64>)> {
        if self.clusters.is_empty() {
            return Err(Error::Parse("instance has no clusters".into()));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::Parse("sigma must be non-negative".into()));
        }
        let mut sources = Vec::new();
        let mut assignment = Vec::new();
        for (j, c) in self.clusters.iter().enumerate() {
            for s in &c.sources {
                sources.push(Source::new(s.y, Complex::new(s.re, s.im)));
                assignment.push(j);
            }
        }
        let measure = SourceMeasure::with_clusters(sources, assignment)?;
        let centers: Vec<f64> = self.clusters.iter().map(|c| c.center).collect();
        let half_widths: Vec<f64> = self.clusters.iter().map(|c| c.half_width).collect();
        let mut sorted = centers.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let separation = if gap.is_finite() { gap * self.omega } else { 0.0 };
        let max_half_width = half_widths.iter().fold(0.0f64, |a, &b| a.max(b)) * self.omega;
        let region = ClusterRegion::new(centers, half_widths, separation, max_half_width, self.omega)?;
        Ok((measure, region))
    }

    pub fn read(input: impl Read) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    pub fn write(&self, out: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::synthesize;

    #[test]
    fn measurement_round_trip_is_exact() {
        let mu = SourceMeasure::new(vec![Source::new(0.3, Complex::new(0.7, -0.2)), Source::real(-2.1, 1.3)]).unwrap();
        let y = synthesize(&mu, 101, 1.0, 1e-3, Some(5)).unwrap();
        let mut buf = Vec::new();
        write_measurement_csv(&mut buf, &y).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re,im\n"));
        assert_eq!(text.lines().count(), 102);
        let back = read_measurement_csv(buf.as_slice(), 1.0, 1e-3).unwrap();
        assert_eq!(back.grid(), y.grid());
        assert_eq!(back.values(), y.values());
    }

    #[test]
    fn bad_header_is_rejected() {
        let err = read_measurement_csv("a,b,c\n1,2,3\n".as_bytes(), 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn instance_round_trip() {
        let region = ClusterRegion::new(vec![-10.0, 10.0], vec![1.0, 0.5], 20.0, 1.0, 1.0).unwrap();
        let mu = SourceMeasure::with_clusters(
            vec![Source::real(-10.5, 1.0), Source::new(10.2, Complex::new(0.0, 2.0)), Source::real(-9.6, -0.5)],
            vec![0, 1, 0],
        )
        .unwrap();
        let file = InstanceFile::from_instance(&mu, &region, 1e-3);
        assert_eq!(file.clusters[0].sources.len(), 2);
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        let back = InstanceFile::read(buf.as_slice()).unwrap();
        assert_eq!(back, file);
        let (mu2, region2) = back.to_instance().unwrap();
        assert_eq!(mu2.sorted_locations(), mu.sorted_locations());
        assert_eq!(region2.centers(), region.centers());
        assert_eq!(mu2.cluster_members(1).len(), 1);
    }

    #[test]
    fn unknown_instance_field_is_named() {
        let err = InstanceFile::read(r#"{"omega":1,"sigma":0,"clusters":[],"extra":1}"#.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("extra"), "{err}");
    }
}
