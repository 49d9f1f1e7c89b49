//! JSON documents for histogram and inflated-histogram models.
//!
//! ```json
//! {"kind": "inflated_histogram",
//!  "partition": {"dim": 1, "width": 0.5, "offset": [0.25]},
//!  "empty_default": 0.0,
//!  "coefficients": {"-1": 0.3, "0": -0.1},
//!  "bumps": [{"center": [0.1], "amplitude": 0.4}],
//!  "radius": 0.001}
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{CellKey, CubicPartition};
use crate::histogram::{Histogram, LossKind};
use crate::interpolate::{Bump, InflatedHistogram};
use crate::Predictor;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionDoc {
    pub dim: usize,
    pub width: f64,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpDoc {
    pub center: Vec<f64>,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Histogram,
    InflatedHistogram,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    pub partition: PartitionDoc,
    pub empty_default: f64,
    #[serde(serialize_with = "sorted_map")]
    pub coefficients: HashMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<BumpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

fn sorted_map<S: Serializer>(m: &HashMap<String, f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut entries: Vec<(CellKey, &String, f64)> = m
        .iter()
        .map(|(k, v)| (k.parse::<CellKey>().unwrap_or(CellKey(Vec::new())), k, *v))
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    s.collect_map(entries.into_iter().map(|(_, k, v)| (k, v)))
}

/// A model loaded from a document.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Histogram(Histogram),
    Inflated(InflatedHistogram),
}

impl Model {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Histogram(h) => h.predict(x),
            Model::Inflated(f) => f.predict(x),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Histogram(h) => h.partition().dim(),
            Model::Inflated(f) => f.partition().dim(),
        }
    }
}

impl Predictor for Model {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Model::Histogram(h) => h.value(x),
            Model::Inflated(f) => f.value(x),
        }
    }
}

fn partition_doc(p: &CubicPartition) -> PartitionDoc {
    PartitionDoc {
        dim: p.dim(),
        width: p.width(),
        offset: p.offset().to_vec(),
    }
}

fn coefficients_doc(h: &Histogram) -> HashMap<String, f64> {
    h.coefficients().iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

impl ModelDoc {
    pub fn from_histogram(h: &Histogram, loss: Option<LossKind>) -> Self {
        ModelDoc {
            kind: ModelKind::Histogram,
            loss,
            partition: partition_doc(h.partition()),
            empty_default: h.empty_default(),
            coefficients: coefficients_doc(h),
            bumps: Vec::new(),
            radius: None,
        }
    }

    pub fn from_inflated(f: &InflatedHistogram, loss: Option<LossKind>) -> Self {
        ModelDoc {
            kind: ModelKind::InflatedHistogram,
            loss,
            partition: partition_doc(f.partition()),
            empty_default: f.base().empty_default(),
            coefficients: coefficients_doc(f.base()),
            bumps: f
                .bumps()
                .iter()
                .map(|b| BumpDoc {
                    center: b.center.clone(),
                    amplitude: b.amplitude,
                })
                .collect(),
            radius: Some(f.radius()),
        }
    }

    fn histogram(&self) -> Result<Histogram> {
        let p = &self.partition;
        if p.offset.len() != p.dim {
            return Err(Error::Format(format!("offset has {} entries for dim {}", p.offset.len(), p.dim)));
        }
        let part = CubicPartition::new(p.width, p.offset.clone()).map_err(|e| Error::Format(e.to_string()))?;
        let mut coeffs = HashMap::with_capacity(self.coefficients.len());
        for (k, v) in &self.coefficients {
            let key: CellKey = k.parse()?;
            if key.dim() != p.dim {
                return Err(Error::Format(format!("cell key {k:?} does not have {} entries", p.dim)));
            }
            coeffs.insert(key, *v);
        }
        let h = Histogram::new(part, coeffs, self.empty_default).map_err(|e| Error::Format(e.to_string()))?;
        if let Some(loss) = self.loss {
            if !h.values_in_label_set(loss) {
                return Err(Error::Format(format!("coefficients leave the label set of {loss}")));
            }
        }
        Ok(h)
    }

    pub fn into_model(&self) -> Result<Model> {
        let h = self.histogram()?;
        match self.kind {
            ModelKind::Histogram => {
                if !self.bumps.is_empty() {
                    return Err(Error::Format("a plain histogram cannot carry bumps".into()));
                }
                Ok(Model::Histogram(h))
            }
            ModelKind::InflatedHistogram => {
                let radius = self
                    .radius
                    .ok_or_else(|| Error::Format("inflated histogram needs a radius".into()))?;
                let bumps = self
                    .bumps
                    .iter()
                    .map(|b| Bump {
                        center: b.center.clone(),
                        amplitude: b.amplitude,
                    })
                    .collect();
                Ok(Model::Inflated(InflatedHistogram::from_parts(h, bumps, radius)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

pub fn load_model(path: impl AsRef<std::path::Path>) -> Result<Model> {
    ModelDoc::from_json(&std::fs::read_to_string(path)?)?.into_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::interpolate::good_erm;

    #[test]
    fn inflated_round_trip() {
        let d = Dataset::from_rows(
            &[vec![0.1, -0.4], vec![-0.7, 0.3], vec![0.9, 0.9], vec![0.1, -0.4]],
            vec![0.3, -0.2, 0.8, 0.1],
        )
        .unwrap();
        let f = good_erm(&d, 0.5, LossKind::LeastSquares).unwrap();
        let text = ModelDoc::from_inflated(&f, Some(LossKind::LeastSquares)).to_json();
        let back = ModelDoc::from_json(&text).unwrap().into_model().unwrap();
        assert_eq!(back, Model::Inflated(f.clone()));
        for (x, _) in d.iter() {
            assert_eq!(back.value(x).to_bits(), f.value(x).to_bits());
        }
    }

    #[test]
    fn coefficients_are_written_in_key_order() {
        let part = CubicPartition::grid(1, 0.5).unwrap();
        let mut c = HashMap::new();
        c.insert(CellKey(vec![1]), 0.5);
        c.insert(CellKey(vec![-2]), 0.25);
        c.insert(CellKey(vec![0]), -0.5);
        let h = Histogram::new(part, c, 0.0).unwrap();
        let text = serde_json::to_string(&ModelDoc::from_histogram(&h, None)).unwrap();
        assert!(text.contains(r#""coefficients":{"-2":0.25,"0":-0.5,"1":0.5}"#), "{text}");
    }

    #[test]
    fn rejects_malformed_documents() {
        let bad_key = r#"{"kind":"histogram","partition":{"dim":1,"width":0.5,"offset":[0]},"empty_default":0,"coefficients":{"a":1}}"#;
        assert!(ModelDoc::from_json(bad_key).unwrap().into_model().is_err());
        let no_radius = r#"{"kind":"inflated_histogram","partition":{"dim":1,"width":0.5,"offset":[0]},"empty_default":0,"coefficients":{}}"#;
        assert!(ModelDoc::from_json(no_radius).unwrap().into_model().is_err());
        let misaligned = r#"{"kind":"inflated_histogram","partition":{"dim":1,"width":0.5,"offset":[0]},"empty_default":0,"coefficients":{},"bumps":[{"center":[0.5],"amplitude":1}],"radius":0.1}"#;
        assert!(ModelDoc::from_json(misaligned).unwrap().into_model().is_err());
    }
}
