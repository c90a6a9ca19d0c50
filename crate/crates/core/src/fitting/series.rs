use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Abscissa of a measured series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum SeriesX {
    /// `(φ, θ)` in degrees.
    Orientation(Vec<(f64, f64)>),
    DetuningHz(Vec<f64>),
    FieldGauss(Vec<f64>),
    RepetitionTimeS(Vec<f64>),
}

impl SeriesX {
    pub fn len(&self) -> usize {
        match self {
            SeriesX::Orientation(v) => v.len(),
            SeriesX::DetuningHz(v) | SeriesX::FieldGauss(v) | SeriesX::RepetitionTimeS(v) => {
                v.len()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// CSV column names for this abscissa.
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            SeriesX::Orientation(_) => &["phi_deg", "theta_deg"],
            SeriesX::DetuningHz(_) => &["detuning_hz"],
            SeriesX::FieldGauss(_) => &["field_gauss"],
            SeriesX::RepetitionTimeS(_) => &["t_rep_s"],
        }
    }

    fn scalars(&self) -> Option<&[f64]> {
        match self {
            SeriesX::Orientation(_) => None,
            SeriesX::DetuningHz(v) | SeriesX::FieldGauss(v) | SeriesX::RepetitionTimeS(v) => {
                Some(v)
            }
        }
    }
}

/// Measured values (cyclicity, rate or time) against one abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSeries {
    pub x: SeriesX,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
}

impl DataSeries {
    pub fn new(x: SeriesX, y: Vec<f64>, sigma: Option<Vec<f64>>) -> Result<Self> {
        let s = Self { x, y, sigma };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::invalid(
                "series",
                format!("{} abscissae but {} values", self.x.len(), self.y.len()),
            ));
        }
        if let Some(bad) = self.y.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(
                "series",
                format!("values must be positive, got {bad}"),
            ));
        }
        if let Some(s) = &self.sigma {
            if s.len() != self.y.len() {
                return Err(Error::invalid("series", "sigma length differs from values"));
            }
            if let Some(bad) = s.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
                return Err(Error::invalid(
                    "series",
                    format!("sigma must be positive, got {bad}"),
                ));
            }
        }
        let finite = match &self.x {
            SeriesX::Orientation(v) => v.iter().all(|(a, b)| a.is_finite() && b.is_finite()),
            other => other.scalars().unwrap().iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::invalid("series", "abscissae must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Reads a CSV whose header names the abscissa: `phi_deg,theta_deg`,
    /// `detuning_hz`, `field_gauss` or `t_rep_s`, then `y` and an optional
    /// `sigma` column.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let y_col = col("y").ok_or_else(|| Error::Format("missing `y` column".into()))?;
        let sigma_col = col("sigma");
        let kind = if let (Some(p), Some(t)) = (col("phi_deg"), col("theta_deg")) {
            Kind::Orientation(p, t)
        } else if let Some(c) = col("detuning_hz") {
            Kind::Scalar(c, SeriesX::DetuningHz as fn(Vec<f64>) -> SeriesX)
        } else if let Some(c) = col("field_gauss") {
            Kind::Scalar(c, SeriesX::FieldGauss)
        } else if let Some(c) = col("t_rep_s") {
            Kind::Scalar(c, SeriesX::RepetitionTimeS)
        } else {
            return Err(Error::Format(format!(
                "header names no known abscissa: {}",
                headers.join(",")
            )));
        };

        let mut first = Vec::new();
        let mut second = Vec::new();
        let mut y = Vec::new();
        let mut sigma = Vec::new();
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let field = |i: usize| -> Result<f64> {
                row.get(i)
                    .ok_or_else(|| Error::Format(format!("row {}: missing column {i}", line + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("row {}: {e}", line + 2)))
            };
            match kind {
                Kind::Orientation(p, t) => {
                    first.push(field(p)?);
                    second.push(field(t)?);
                }
                Kind::Scalar(c, _) => first.push(field(c)?),
            }
            y.push(field(y_col)?);
            if let Some(c) = sigma_col {
                sigma.push(field(c)?);
            }
        }
        let x = match kind {
            Kind::Orientation(..) => SeriesX::Orientation(first.into_iter().zip(second).collect()),
            Kind::Scalar(_, make) => make(first),
        };
        DataSeries::new(x, y, sigma_col.map(|_| sigma))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.x.columns().to_vec();
        header.push("y");
        if self.sigma.is_some() {
            header.push("sigma");
        }
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut row: Vec<String> = match &self.x {
                SeriesX::Orientation(v) => vec![v[i].0.to_string(), v[i].1.to_string()],
                other => vec![other.scalars().unwrap()[i].to_string()],
            };
            row.push(self.y[i].to_string());
            if let Some(s) = &self.sigma {
                row.push(s[i].to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Kind {
    Orientation(usize, usize),
    Scalar(usize, fn(Vec<f64>) -> SeriesX),
}
