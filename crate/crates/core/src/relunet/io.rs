//! Dense JSON weight documents.
//!
//! Floats are written as JSON numbers in shortest round-trip form. On import
//! numbers and decimal strings are both accepted.

use serde::de::Deserializer;
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use super::{Head, Layer, ReluNet, SparseMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDoc {
    pub input_dim: usize,
    pub hidden: Vec<LayerDoc>,
    pub head: HeadDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDoc {
    pub rows: usize,
    pub cols: usize,
    #[serde(deserialize_with = "de_floats")]
    pub weights: Vec<f64>,
    #[serde(deserialize_with = "de_floats")]
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadDoc {
    #[serde(deserialize_with = "de_floats")]
    pub weights: Vec<f64>,
    #[serde(deserialize_with = "de_float")]
    pub bias: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Lit {
    Num(f64),
    Str(String),
}

impl Lit {
    fn value<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            Lit::Num(v) => Ok(v),
            Lit::Str(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| E::custom(format!("not a finite decimal: {s:?}"))),
        }
    }
}

fn de_float<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Lit::deserialize(d)?.value()
}

fn de_floats<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    Vec::<Lit>::deserialize(d)?.into_iter().map(Lit::value).collect()
}

pub fn export_weights(net: &ReluNet) -> WeightDoc {
    WeightDoc {
        input_dim: net.input_dim(),
        hidden: net
            .hidden()
            .iter()
            .map(|l| LayerDoc {
                rows: l.weights.rows(),
                cols: l.weights.cols(),
                weights: l.weights.to_dense(),
                bias: l.bias.clone(),
            })
            .collect(),
        head: HeadDoc {
            weights: net.head().weights.clone(),
            bias: net.head().bias,
        },
    }
}

pub fn import_weights(doc: &WeightDoc) -> Result<ReluNet> {
    let mut cols = doc.input_dim;
    let mut hidden = Vec::with_capacity(doc.hidden.len());
    for (l, layer) in doc.hidden.iter().enumerate() {
        if layer.cols != cols {
            return Err(Error::Format(format!(
                "hidden layer {} declares {} columns, previous width is {cols}",
                l + 1,
                layer.cols
            )));
        }
        if layer.bias.len() != layer.rows {
            return Err(Error::Format(format!("hidden layer {} has {} biases for {} rows", l + 1, layer.bias.len(), layer.rows)));
        }
        hidden.push(Layer {
            weights: SparseMatrix::from_dense(layer.rows, layer.cols, &layer.weights)?,
            bias: layer.bias.clone(),
        });
        cols = layer.rows;
    }
    let head = Head {
        weights: doc.head.weights.clone(),
        bias: doc.head.bias,
    };
    ReluNet::new(doc.input_dim, hidden, head).map_err(|e| Error::Format(e.to_string()))
}

impl WeightDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Writes the weight document of `net` without materializing dense matrices.
pub(crate) fn write_weights_json<W: std::io::Write>(net: &ReluNet, writer: W) -> Result<()> {
    struct DenseRows<'a>(&'a SparseMatrix);
    impl Serialize for DenseRows<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            let m = self.0;
            let mut seq = s.serialize_seq(Some(m.rows() * m.cols()))?;
            for r in 0..m.rows() {
                let mut next = 0;
                for (c, v) in m.row(r) {
                    for _ in next..c {
                        seq.serialize_element(&0.0)?;
                    }
                    seq.serialize_element(&v)?;
                    next = c + 1;
                }
                for _ in next..m.cols() {
                    seq.serialize_element(&0.0)?;
                }
            }
            seq.end()
        }
    }
    #[derive(Serialize)]
    struct LayerOut<'a> {
        rows: usize,
        cols: usize,
        weights: DenseRows<'a>,
        bias: &'a [f64],
    }
    #[derive(Serialize)]
    struct HeadOut<'a> {
        weights: &'a [f64],
        bias: f64,
    }
    #[derive(Serialize)]
    struct DocOut<'a> {
        input_dim: usize,
        hidden: Vec<LayerOut<'a>>,
        head: HeadOut<'a>,
    }
    let doc = DocOut {
        input_dim: net.input_dim(),
        hidden: net
            .hidden()
            .iter()
            .map(|l| LayerOut {
                rows: l.weights.rows(),
                cols: l.weights.cols(),
                weights: DenseRows(&l.weights),
                bias: &l.bias,
            })
            .collect(),
        head: HeadOut {
            weights: &net.head().weights,
            bias: net.head().bias,
        },
    };
    serde_json::to_writer(writer, &doc)?;
    Ok(())
}

impl ReluNet {
    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        write_weights_json(self, &mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn write_json<W: std::io::Write>(&self, writer: W) -> Result<()> {
        write_weights_json(self, writer)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        import_weights(&WeightDoc::from_json(text)?)
    }
}
